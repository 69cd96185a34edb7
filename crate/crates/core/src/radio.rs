//! One synchronous step of the radio model.
//!
//! In every step each node either transmits or listens. A listener hears a
//! message iff exactly one of its in-neighbors transmits. With collision
//! detection a listener can tell two-or-more transmitters (a collision) from
//! none (silence); without it both sound like silence. Transmitters hear
//! nothing.

use alloc::vec;
use alloc::vec::Vec;

use crate::topology::Network;

pub type NodeId = u32;

/// Model variant, fixed for the lifetime of a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ModelVariant {
    pub collision_detection: bool,
    pub directed: bool,
}

impl ModelVariant {
    pub fn no_cd(directed: bool) -> Self {
        ModelVariant {
            collision_detection: false,
            directed,
        }
    }

    pub fn cd(directed: bool) -> Self {
        ModelVariant {
            collision_detection: true,
            directed,
        }
    }

    pub fn label(&self) -> &'static str {
        if self.collision_detection {
            "cd-directed"
        } else {
            "no-cd"
        }
    }
}

/// What one listening node perceived in one step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Reception {
    /// Exactly one in-neighbor transmitted. The sender id is carried for
    /// trace debugging only; protocol logic never branches on it.
    Message { from: NodeId },
    Collision,
    Silence,
}

/// Per-node reception results for one step. Transmitters have no entry.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoundOutcome {
    pub round: u64,
    pub collision_detection: bool,
    receptions: Vec<Option<Reception>>,
}

impl RoundOutcome {
    /// `None` means the node transmitted this step.
    pub fn reception(&self, node: NodeId) -> Option<Reception> {
        self.receptions[node as usize]
    }

    pub fn transmitted(&self, node: NodeId) -> bool {
        self.receptions[node as usize].is_none()
    }

    pub fn node_count(&self) -> usize {
        self.receptions.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum RadioError {
    /// Energy perception is a collision-detection device; without it a
    /// collision is indistinguishable from silence.
    #[error("hears_energy requires the collision-detection variant")]
    NoCollisionDetection,
}

/// Whether `node` perceived any energy (a message or a collision) in the
/// step. Only meaningful under collision detection; transmitters hear
/// nothing.
pub fn hears_energy(outcome: &RoundOutcome, node: NodeId) -> Result<bool, RadioError> {
    if !outcome.collision_detection {
        return Err(RadioError::NoCollisionDetection);
    }
    Ok(matches!(
        outcome.reception(node),
        Some(Reception::Message { .. }) | Some(Reception::Collision)
    ))
}

/// Reusable per-step accumulators. The broadcast engines keep one of these
/// alive across millions of steps; marking and counting is stamped by a
/// token so nothing needs clearing between steps.
#[derive(Debug, Clone)]
pub struct StepBuffers {
    token: u64,
    tx_mark: Vec<u64>,
    hit_mark: Vec<u64>,
    hits: Vec<u32>,
    sender: Vec<NodeId>,
    tx_list: Vec<NodeId>,
    touched: Vec<NodeId>,
}

impl StepBuffers {
    pub fn new(node_count: usize) -> Self {
        StepBuffers {
            token: 0,
            tx_mark: vec![0; node_count],
            hit_mark: vec![0; node_count],
            hits: vec![0; node_count],
            sender: vec![0; node_count],
            tx_list: Vec::new(),
            touched: Vec::new(),
        }
    }

    /// Start a fresh step; all previous marks become stale.
    pub fn begin(&mut self) {
        self.token += 1;
        self.tx_list.clear();
        self.touched.clear();
    }

    /// Register a transmitter. Duplicate registrations are ignored.
    pub fn mark_transmitter(&mut self, node: NodeId) {
        let idx = node as usize;
        if self.tx_mark[idx] != self.token {
            self.tx_mark[idx] = self.token;
            self.tx_list.push(node);
        }
    }

    pub fn is_transmitter(&self, node: NodeId) -> bool {
        self.tx_mark[node as usize] == self.token
    }

    pub fn transmitters(&self) -> &[NodeId] {
        &self.tx_list
    }

    /// Propagate all registered transmissions along out-edges, counting per
    /// listener. Call once per step after the transmitter set is complete.
    pub fn deliver(&mut self, network: &Network) {
        for i in 0..self.tx_list.len() {
            let u = self.tx_list[i];
            for &v in network.out_neighbors(u) {
                let idx = v as usize;
                if self.hit_mark[idx] != self.token {
                    self.hit_mark[idx] = self.token;
                    self.hits[idx] = 1;
                    self.sender[idx] = u;
                    self.touched.push(v);
                } else {
                    self.hits[idx] += 1;
                }
            }
        }
    }

    /// Nodes that at least one transmission reached this step (including
    /// transmitters, which do not listen).
    pub fn touched(&self) -> &[NodeId] {
        &self.touched
    }

    /// Number of in-neighbor transmissions that reached `node` this step.
    pub fn hit_count(&self, node: NodeId) -> u32 {
        let idx = node as usize;
        if self.hit_mark[idx] == self.token {
            self.hits[idx]
        } else {
            0
        }
    }

    /// The unique sender, when exactly one transmission reached `node`.
    pub fn message_from(&self, node: NodeId) -> Option<NodeId> {
        (self.hit_count(node) == 1 && !self.is_transmitter(node))
            .then(|| self.sender[node as usize])
    }
}

/// Execute one synchronous step: every node in `transmitters` transmits,
/// everyone else listens. Pure in (network, variant, transmitters); the
/// round number is carried through for bookkeeping only.
pub fn step(
    network: &Network,
    variant: ModelVariant,
    transmitters: &[NodeId],
    round: u64,
) -> RoundOutcome {
    let n = network.node_count();
    let mut buf = StepBuffers::new(n);
    buf.begin();
    for &u in transmitters {
        assert!((u as usize) < n, "transmitter {u} out of range");
        buf.mark_transmitter(u);
    }
    buf.deliver(network);

    let receptions = (0..n as NodeId)
        .map(|v| {
            if buf.is_transmitter(v) {
                None
            } else {
                Some(match buf.hit_count(v) {
                    0 => Reception::Silence,
                    1 => Reception::Message {
                        from: buf.sender[v as usize],
                    },
                    _ if variant.collision_detection => Reception::Collision,
                    _ => Reception::Silence,
                })
            }
        })
        .collect();

    RoundOutcome {
        round,
        collision_detection: variant.collision_detection,
        receptions,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::{make_path, make_star, Network};

    #[test]
    fn single_transmitter_on_a_path() {
        let net = make_path(2).unwrap();
        let out = step(&net, ModelVariant::no_cd(true), &[0], 1);
        assert_eq!(out.reception(1), Some(Reception::Message { from: 0 }));
        assert!(out.transmitted(0));
    }

    #[test]
    fn two_leaves_collide_at_the_center_under_cd() {
        // Undirected star: leaves 1 and 2 both reach the center.
        let net = make_star(5).unwrap();
        let out = step(&net, ModelVariant::cd(false), &[1, 2], 1);
        assert_eq!(out.reception(0), Some(Reception::Collision));
        // Other leaves see nothing: leaves are only adjacent to the center.
        assert_eq!(out.reception(3), Some(Reception::Silence));
    }

    #[test]
    fn collision_sounds_like_silence_without_cd() {
        let net = make_star(5).unwrap();
        let out = step(&net, ModelVariant::no_cd(false), &[1, 2], 1);
        assert_eq!(out.reception(0), Some(Reception::Silence));
    }

    #[test]
    fn hears_energy_cases() {
        let net = make_star(5).unwrap();
        let cd = step(&net, ModelVariant::cd(false), &[1, 2], 1);
        assert_eq!(hears_energy(&cd, 0), Ok(true)); // collision
        assert_eq!(hears_energy(&cd, 3), Ok(false)); // silence
        let single = step(&net, ModelVariant::cd(false), &[0], 2);
        assert_eq!(hears_energy(&single, 1), Ok(true)); // message

        let nocd = step(&net, ModelVariant::no_cd(false), &[0], 3);
        assert_eq!(hears_energy(&nocd, 1), Err(RadioError::NoCollisionDetection));
    }

    #[test]
    fn duplicate_transmitter_entries_count_once() {
        let net = make_path(2).unwrap();
        let out = step(&net, ModelVariant::cd(true), &[0, 0], 1);
        assert_eq!(out.reception(1), Some(Reception::Message { from: 0 }));
    }

    #[test]
    fn no_cd_alphabet_is_message_or_silence() {
        let net = Network::from_edges(4, true, 0, &[(0, 1), (0, 2), (1, 2), (2, 3), (1, 3)]).unwrap();
        for mask in 0u32..16 {
            let tx: alloc::vec::Vec<NodeId> =
                (0..4).filter(|&v| mask >> v & 1 == 1).map(|v| v as NodeId).collect();
            let out = step(&net, ModelVariant::no_cd(true), &tx, 1);
            for v in 0..4 {
                if let Some(r) = out.reception(v) {
                    assert!(!matches!(r, Reception::Collision));
                }
            }
        }
    }
}
