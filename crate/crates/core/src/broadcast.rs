//! The protocol state machines.
//!
//! The doubling framework loops `t = 1, 2, ...`, guessing the horizon
//! `T = 2^t`. Each iteration the source draws fresh shared coins; every
//! step, each active node transmits with the probability induced by that
//! step's shared pair. A node becomes active when it first hears a message
//! in the current iteration; at the iteration boundary every non-source
//! node is deactivated and the message has to re-propagate under the longer
//! horizon. Being *informed* — having heard the message at least once, ever
//! — survives resets; completion is the first global round at which every
//! node is informed, detected by the omniscient harness (the protocol
//! itself never terminates).
//!
//! Without collision detection the active protocol set is
//! {shallow, general}. With collision detection all four protocols run, and
//! odd global rounds carry a beep wave: the source beeps on the first odd
//! round, every node that heard energy on the previous odd round beeps on
//! the next one, and a node's hop distance is the index of the first odd
//! round on which it hears energy. The wave reaches distance `d` at global
//! round `2d - 1` while the message cannot arrive before even round `2d`,
//! so the distance-aware deep protocol always finds the distance it needs.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::coins::{
    transmit_prob, CoinSource, Constants, GeneralDist, IterationRandomness, ProtocolId,
    DEFAULT_Y2_CAP,
};
use crate::radio::{ModelVariant, NodeId, StepBuffers};
use crate::topology::Network;
use crate::trace::TraceSink;

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum BroadcastError {
    #[error("beep waves require the collision-detection variant")]
    BeepWithoutCd,
    #[error("internal invariant violated: active node {node} reached a deep step with no known distance")]
    MissingDistance { node: NodeId },
}

/// Configuration for one run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunConfig {
    pub variant: ModelVariant,
    pub constants: Constants,
    /// Budget in global rounds; exhausting it is not an error, the record
    /// just comes back without a completion round.
    pub max_global_rounds: u64,
    pub master_seed: u64,
    /// Truncation cap for the general distribution.
    pub y2_cap: u64,
    pub trace: bool,
}

impl RunConfig {
    pub fn new(variant: ModelVariant, constants: Constants, max_global_rounds: u64, master_seed: u64) -> Self {
        assert!(max_global_rounds >= 1);
        RunConfig {
            variant,
            constants,
            max_global_rounds,
            master_seed,
            y2_cap: DEFAULT_Y2_CAP,
            trace: false,
        }
    }
}

/// Per-node protocol state, struct-of-arrays.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeStates {
    collision_detection: bool,
    source: NodeId,
    active: Vec<bool>,
    first_informed: Vec<Option<u64>>,
    informed_count: u32,
    distance: Vec<Option<u32>>,
    distance_set_round: Vec<Option<u64>>,
    /// Beep-wave stamp: node v beeps on beep-local round r iff
    /// `beep_at[v] == r`.
    beep_at: Vec<u64>,
    global_round: u64,
    beep_round: u64,
    framework_steps: u64,
}

impl NodeStates {
    pub fn new(network: &Network, variant: ModelVariant) -> Self {
        let n = network.node_count();
        let source = network.source();
        let mut states = NodeStates {
            collision_detection: variant.collision_detection,
            source,
            active: vec![false; n],
            first_informed: vec![None; n],
            informed_count: 1,
            distance: vec![None; n],
            distance_set_round: vec![None; n],
            beep_at: vec![0; n],
            global_round: 0,
            beep_round: 0,
            framework_steps: 0,
        };
        states.active[source as usize] = true;
        states.first_informed[source as usize] = Some(0);
        if variant.collision_detection {
            // The source knows its own distance; it beeps on the first
            // beep-local round unprompted.
            states.distance[source as usize] = Some(0);
            states.distance_set_round[source as usize] = Some(0);
            states.beep_at[source as usize] = 1;
        }
        states
    }

    pub fn collision_detection(&self) -> bool {
        self.collision_detection
    }

    pub fn all_informed(&self) -> bool {
        self.informed_count as usize == self.active.len()
    }

    pub fn is_active(&self, v: NodeId) -> bool {
        self.active[v as usize]
    }

    pub fn first_informed_round(&self, v: NodeId) -> Option<u64> {
        self.first_informed[v as usize]
    }

    pub fn distance_known(&self, v: NodeId) -> Option<u32> {
        self.distance[v as usize]
    }

    pub fn global_round(&self) -> u64 {
        self.global_round
    }

    pub fn beep_round(&self) -> u64 {
        self.beep_round
    }

    /// Iteration boundary: every non-source node goes inactive. Informed
    /// rounds and beep-wave state survive.
    pub fn reset_iteration(&mut self) {
        for (v, a) in self.active.iter_mut().enumerate() {
            *a = v == self.source as usize;
        }
    }

    fn mark_informed(&mut self, v: NodeId, round: u64) {
        let idx = v as usize;
        if !self.active[idx] {
            self.active[idx] = true;
            if self.first_informed[idx].is_none() {
                self.first_informed[idx] = Some(round);
                self.informed_count += 1;
            }
        }
    }
}

/// Outcome of driving one iteration (or a prefix of it).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IterationOutcome {
    /// Every node informed; the run can stop.
    Completed,
    /// The round budget ran out mid-iteration.
    BudgetExhausted,
    /// All `T` steps executed and the reset applied.
    Finished,
}

fn trace_round(
    trace: &mut dyn TraceSink,
    buf: &StepBuffers,
    states: &NodeStates,
    collision_detection: bool,
) {
    let mut line = format!("round {} tx=", states.global_round);
    let mut first = true;
    for &u in buf.transmitters() {
        if !first {
            line.push(',');
        }
        line.push_str(&format!("{u}"));
        first = false;
    }
    line.push_str(" rx=");
    let n = states.active.len() as NodeId;
    let mut first = true;
    for v in 0..n {
        if buf.is_transmitter(v) {
            continue;
        }
        let tag = match buf.hit_count(v) {
            0 => 'S',
            1 => 'M',
            _ if collision_detection => 'C',
            _ => 'S',
        };
        if !first {
            line.push(' ');
        }
        line.push_str(&format!("{v}:{tag}"));
        first = false;
    }
    trace.line(&line);
}

/// One framework step under the shared pair `(proto, x)`. Active nodes
/// draw their local coin in ascending node order; listeners that hear a
/// message become active at the end of the step.
#[allow(clippy::too_many_arguments)]
fn framework_step<R: Rng + ?Sized>(
    network: &Network,
    states: &mut NodeStates,
    buf: &mut StepBuffers,
    proto: ProtocolId,
    x: u64,
    t_len: u64,
    constants: &Constants,
    rng: &mut R,
    trace: &mut dyn TraceSink,
) -> Result<(), BroadcastError> {
    states.global_round += 1;
    states.framework_steps += 1;
    let round = states.global_round;

    buf.begin();
    let common_p = match proto {
        ProtocolId::Deep => None,
        _ => Some(transmit_prob(proto, t_len, x, 0, constants)),
    };
    for v in 0..network.node_count() as NodeId {
        if !states.active[v as usize] {
            continue;
        }
        let p = match common_p {
            Some(p) => p,
            None => {
                let d = states.distance[v as usize]
                    .ok_or(BroadcastError::MissingDistance { node: v })?;
                transmit_prob(ProtocolId::Deep, t_len, x, d, constants)
            }
        };
        if rng.random::<f64>() < p {
            buf.mark_transmitter(v);
        }
    }
    buf.deliver(network);

    for i in 0..buf.touched().len() {
        let v = buf.touched()[i];
        if buf.hit_count(v) == 1 && !buf.is_transmitter(v) {
            states.mark_informed(v, round);
        }
    }

    if trace.enabled() {
        trace_round(trace, buf, states, states.collision_detection);
    }
    Ok(())
}

/// One beep-wave step on an odd global round. The source beeps on
/// beep-local round 1; afterwards exactly the nodes that heard energy on
/// the previous beep round beep. First energy fixes a node's distance.
fn beep_step(
    network: &Network,
    states: &mut NodeStates,
    buf: &mut StepBuffers,
    trace: &mut dyn TraceSink,
) {
    states.global_round += 1;
    states.beep_round += 1;
    let r = states.beep_round;

    buf.begin();
    for v in 0..network.node_count() as NodeId {
        if states.beep_at[v as usize] == r {
            buf.mark_transmitter(v);
        }
    }
    buf.deliver(network);

    for i in 0..buf.touched().len() {
        let v = buf.touched()[i];
        if buf.is_transmitter(v) {
            continue;
        }
        // Any energy: a lone beep or a collision of beeps.
        states.beep_at[v as usize] = r + 1;
        let idx = v as usize;
        if states.distance[idx].is_none() && v != states.source {
            states.distance[idx] = Some(r as u32);
            states.distance_set_round[idx] = Some(states.global_round);
        }
    }

    if trace.enabled() {
        trace_round(trace, buf, states, true);
    }
}

/// Public single-step beep wave, for direct protocol exploration. Errors
/// under the no-collision-detection variant, where beeps do not exist.
pub fn beep_wave_step(
    network: &Network,
    states: &mut NodeStates,
    trace: &mut dyn TraceSink,
) -> Result<(), BroadcastError> {
    if !states.collision_detection {
        return Err(BroadcastError::BeepWithoutCd);
    }
    let mut buf = StepBuffers::new(network.node_count());
    beep_step(network, states, &mut buf, trace);
    Ok(())
}

/// Drive the `T = 2^t` framework steps of one iteration from materialized
/// randomness, then apply the iteration reset. Checks completion and the
/// round budget after every step.
pub fn run_iteration<R: Rng + ?Sized>(
    network: &Network,
    randomness: &IterationRandomness,
    states: &mut NodeStates,
    constants: &Constants,
    rng: &mut R,
    max_global_rounds: u64,
    trace: &mut dyn TraceSink,
) -> Result<IterationOutcome, BroadcastError> {
    assert_eq!(randomness.seq.len() as u64, randomness.steps);
    assert_eq!(randomness.xs.len() as u64, randomness.steps);
    let mut buf = StepBuffers::new(network.node_count());
    if trace.enabled() {
        trace.line(&format!("iter t={} T={}", randomness.t, randomness.steps));
    }
    for j in 0..randomness.steps as usize {
        framework_step(
            network,
            states,
            &mut buf,
            randomness.seq[j],
            randomness.xs[j],
            randomness.steps,
            constants,
            rng,
            trace,
        )?;
        if states.all_informed() {
            return Ok(IterationOutcome::Completed);
        }
        if states.global_round >= max_global_rounds {
            return Ok(IterationOutcome::BudgetExhausted);
        }
    }
    states.reset_iteration();
    if trace.enabled() {
        trace.line(&format!("reset t={}", randomness.t));
    }
    Ok(IterationOutcome::Finished)
}

/// Everything the harness records about one trial.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TrialRecord {
    pub trial: u32,
    pub master_seed: u64,
    /// First global round at which every node was informed; absent when
    /// the budget ran out first.
    pub completion_round: Option<u64>,
    pub iterations_executed: u32,
    pub framework_steps: u64,
    pub first_informed_round: Vec<Option<u64>>,
    /// Beep-wave hop distances (collision-detection runs only).
    #[cfg_attr(feature = "serde", serde(skip_serializing_if = "Option::is_none", default))]
    pub beep_distances: Option<Vec<Option<u32>>>,
    /// Global round on which each node's distance was fixed.
    #[cfg_attr(feature = "serde", serde(skip_serializing_if = "Option::is_none", default))]
    pub distance_set_round: Option<Vec<Option<u64>>>,
}

impl TrialRecord {
    fn from_states(states: NodeStates, trial: u32, master_seed: u64, iterations: u32, completion: Option<u64>) -> Self {
        debug_assert_eq!(
            completion,
            completion.and(states.first_informed.iter().copied().max().flatten())
        );
        let cd = states.collision_detection;
        TrialRecord {
            trial,
            master_seed,
            completion_round: completion,
            iterations_executed: iterations,
            framework_steps: states.framework_steps,
            first_informed_round: states.first_informed,
            beep_distances: cd.then_some(states.distance),
            distance_set_round: cd.then_some(states.distance_set_round),
        }
    }
}

/// Independent per-trial randomness: one seed, one stream per trial index.
pub fn trial_rng(master_seed: u64, trial: u32) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(master_seed);
    rng.set_stream(trial as u64);
    rng
}

/// Run the doubling framework without collision detection (protocols
/// {shallow, general}, C = 2) until every node has been informed or the
/// round budget is exhausted.
pub fn run_broadcast_no_cd(
    network: &Network,
    config: &RunConfig,
    trial: u32,
    trace: &mut dyn TraceSink,
) -> TrialRecord {
    run_engine(network, config, trial, false, trace)
        .expect("no-cd runs never touch the deep protocol")
}

/// Run the collision-detection variant: beep waves on odd global rounds,
/// framework steps (all four protocols, C = 4) on even ones. Accepts
/// directed and undirected networks alike.
pub fn run_broadcast_cd_directed(
    network: &Network,
    config: &RunConfig,
    trial: u32,
    trace: &mut dyn TraceSink,
) -> Result<TrialRecord, BroadcastError> {
    run_engine(network, config, trial, true, trace)
}

fn run_engine(
    network: &Network,
    config: &RunConfig,
    trial: u32,
    collision_detection: bool,
    trace: &mut dyn TraceSink,
) -> Result<TrialRecord, BroadcastError> {
    let variant = ModelVariant {
        collision_detection,
        directed: network.directed(),
    };
    let mut rng = trial_rng(config.master_seed, trial);
    let mut states = NodeStates::new(network, variant);
    let mut buf = StepBuffers::new(network.node_count());
    let y2 = GeneralDist::new(config.y2_cap);
    let budget = config.max_global_rounds;
    let mut iterations = 0u32;

    if states.all_informed() {
        return Ok(TrialRecord::from_states(states, trial, config.master_seed, 0, Some(0)));
    }

    for t in 1..=62u32 {
        iterations = t;
        let coins = CoinSource::new(t, collision_detection, &config.constants, &y2);
        let t_len = coins.t_len();
        if trace.enabled() {
            trace.line(&format!("iter t={t} T={t_len}"));
        }
        for _ in 0..t_len {
            if collision_detection {
                beep_step(network, &mut states, &mut buf, trace);
                // Interleaving layout: beep-local round r sits on global
                // round 2r - 1.
                debug_assert_eq!(states.global_round.div_ceil(2), states.beep_round);
                if states.global_round >= budget {
                    return Ok(TrialRecord::from_states(states, trial, config.master_seed, iterations, None));
                }
            }
            let (proto, x) = coins.draw(&mut rng);
            framework_step(
                network,
                &mut states,
                &mut buf,
                proto,
                x,
                t_len,
                &config.constants,
                &mut rng,
                trace,
            )?;
            if states.all_informed() {
                let round = states.global_round;
                return Ok(TrialRecord::from_states(states, trial, config.master_seed, iterations, Some(round)));
            }
            if states.global_round >= budget {
                return Ok(TrialRecord::from_states(states, trial, config.master_seed, iterations, None));
            }
        }
        states.reset_iteration();
        if trace.enabled() {
            trace.line(&format!("reset t={t}"));
        }
    }
    // Unreachable for any budget below 2^63 rounds.
    Ok(TrialRecord::from_states(states, trial, config.master_seed, iterations, None))
}
