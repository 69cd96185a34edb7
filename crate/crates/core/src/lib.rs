//! Core algorithms for randomized broadcasting in blind multi-hop radio
//! networks.
//!
//! The crate simulates synchronous radio networks in which a listening node
//! hears a message iff exactly one of its in-neighbors transmits, with and
//! without collision detection. Nodes are *blind*: they know nothing about
//! the network, not even bounds on its size or eccentricity. Broadcast is
//! driven by a doubling framework in which the source guesses a horizon
//! `T = 2^t`, draws a shared protocol sequence and per-step global variables,
//! and all active nodes turn those shared coins into transmission
//! probabilities. Under collision detection, a beep wave interleaved on odd
//! rounds lets every node learn its hop distance, which the distance-aware
//! protocol exploits.
//!
//! Modules map onto the moving parts:
//!
//! * [`topology`] — graph construction, benchmark generators, BFS oracle,
//!   edge-list text format.
//! * [`radio`] — one synchronous step with bit-exact collision semantics.
//! * [`coins`] — the shared-coin distributions, transmission probability
//!   functions, and the exact Poisson-binomial kernel.
//! * [`broadcast`] — the protocol state machines and full trial runs.
//!
//! Everything here is `no_std + alloc`; all floating-point math goes through
//! `libm` so results are identical across platforms and build profiles.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod broadcast;
pub mod coins;
pub mod radio;
pub mod topology;
pub mod trace;

pub use radio::NodeId;
