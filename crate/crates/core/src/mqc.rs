//! Adaptive measurement sequences on the planar code state: conditional
//! probabilities, chain-rule sampling, and the connectivity discipline.
//!
//! A measurement step is legal when both the measured set and its complement
//! stay connected; the simulator checks this at runtime instead of trusting
//! the strategy. Conditional probabilities are ratios of consecutive joint
//! magnitudes computed in log space, and the two branches of each step are
//! renormalized to sum to one so the chain product cannot drift.
//!
//! Sampling draws exactly one number per step from a seeded ChaCha8 stream
//! ([`RNG_NAME`]), so identical `(lattice size, strategy, seed)` always
//! reproduce the same trace byte for byte.

use crate::codestate::{partial_overlap, MeasurementBasis, ProductState};
use crate::lattice::{EdgeId, EdgeSet, Lattice};
use crate::{Error, Result};
use alloc::vec::Vec;
use num_traits::Float;
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

/// Identity of the sampling generator recorded in traces.
pub const RNG_NAME: &str = "chacha8";

/// Tolerated numerical excess before a probability ratio is clamped.
const RATIO_SLACK: f64 = 1e-9;

/// A single-qubit measurement: which edge, in which basis.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Measurement {
    pub edge: EdgeId,
    pub basis: MeasurementBasis,
}

/// One executed step of a simulation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepRecord {
    pub edge: EdgeId,
    pub theta: f64,
    pub phi: f64,
    /// Probability of outcome 0 given the preceding history.
    pub p0: f64,
    pub outcome: u8,
}

/// Full record of a simulated measurement sequence.
#[derive(Clone, Debug, PartialEq)]
pub struct SimulationTrace {
    pub lattice_size: usize,
    pub seed: u64,
    pub rng: &'static str,
    pub steps: Vec<StepRecord>,
}

/// Decision procedure for the next measurement, fed the outcome history.
pub trait Strategy {
    fn next_measurement(&mut self, lat: &Lattice, history: &[StepRecord]) -> Measurement;
}

/// The connectivity-respecting sweep order: row of horizontal edges left to
/// right, then the verticals below them, row by row. Every prefix and every
/// suffix of this order is a connected edge set.
pub fn raster_order(lat: &Lattice) -> Vec<EdgeId> {
    let l = lat.size();
    let mut order = Vec::with_capacity(lat.n_edges());
    for row in 0..=l {
        for col in 0..l {
            order.push(EdgeId { kind: crate::lattice::EdgeKind::Horizontal, row, col });
        }
        if row < l {
            for col in 0..=l {
                order.push(EdgeId { kind: crate::lattice::EdgeKind::Vertical, row, col });
            }
        }
    }
    order
}

/// Measures every edge in raster order with one fixed basis.
#[derive(Clone, Debug)]
pub struct RasterStrategy {
    basis: MeasurementBasis,
}

impl RasterStrategy {
    pub fn raster_z() -> Self {
        RasterStrategy { basis: MeasurementBasis::z() }
    }

    pub fn raster_x() -> Self {
        RasterStrategy { basis: MeasurementBasis::x() }
    }

    pub fn raster_basis(theta: f64, phi: f64) -> Self {
        RasterStrategy { basis: MeasurementBasis::new(theta, phi) }
    }
}

impl Strategy for RasterStrategy {
    fn next_measurement(&mut self, lat: &Lattice, history: &[StepRecord]) -> Measurement {
        let order = raster_order(lat);
        Measurement {
            edge: order[history.len()],
            basis: self.basis,
        }
    }
}

/// Basis selection rule for one scripted step.
#[derive(Clone, Debug)]
pub enum BasisRule {
    Fixed(MeasurementBasis),
    /// Choose by the parity of earlier outcomes: `even` when the XOR of the
    /// referenced outcomes is 0, `odd` otherwise.
    OutcomeParity {
        depends_on: Vec<usize>,
        even: MeasurementBasis,
        odd: MeasurementBasis,
    },
}

#[derive(Clone, Debug)]
pub struct ScriptedStep {
    pub edge: EdgeId,
    pub rule: BasisRule,
}

/// An explicit step list, optionally with outcome-conditioned bases — enough
/// to express adaptive measurement plans reproducibly.
#[derive(Clone, Debug)]
pub struct ScriptedStrategy {
    steps: Vec<ScriptedStep>,
}

impl ScriptedStrategy {
    pub fn new(steps: Vec<ScriptedStep>) -> Result<Self> {
        for (j, step) in steps.iter().enumerate() {
            if let BasisRule::OutcomeParity { depends_on, .. } = &step.rule {
                if depends_on.iter().any(|&k| k >= j) {
                    return Err(Error::InvalidStrategy("basis rule references a later step"));
                }
            }
        }
        Ok(ScriptedStrategy { steps })
    }

    pub fn order(&self) -> Vec<EdgeId> {
        self.steps.iter().map(|s| s.edge).collect()
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}

impl Strategy for ScriptedStrategy {
    fn next_measurement(&mut self, _lat: &Lattice, history: &[StepRecord]) -> Measurement {
        let step = &self.steps[history.len()];
        let basis = match &step.rule {
            BasisRule::Fixed(basis) => *basis,
            BasisRule::OutcomeParity { depends_on, even, odd } => {
                let parity = depends_on
                    .iter()
                    .fold(0u8, |acc, &k| acc ^ history[k].outcome);
                if parity == 0 {
                    *even
                } else {
                    *odd
                }
            }
        };
        Measurement { edge: step.edge, basis }
    }
}

fn draw_unit(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Joint log-magnitudes of the two outcome branches for measuring `edge`.
fn branch_logs(
    lat: &Lattice,
    set: &EdgeSet,
    phi: &mut ProductState,
    edge: usize,
    basis: MeasurementBasis,
) -> Result<(f64, f64)> {
    phi.set(edge, basis.state(0));
    let l0 = partial_overlap(lat, set, phi)?.ln();
    phi.set(edge, basis.state(1));
    let l1 = partial_overlap(lat, set, phi)?.ln();
    phi.unset(edge);
    Ok((l0, l1))
}

/// Normalized probability of outcome 0 from branch logs and the log of the
/// joint history magnitude. Ratios are clamped to [0, 1] (drift beyond
/// [`RATIO_SLACK`] would indicate a real inconsistency) and the pair is
/// renormalized.
fn normalized_p0(l0: f64, l1: f64, l_prev: f64, step: usize) -> Result<f64> {
    let mut r0 = (l0 - l_prev).exp();
    let mut r1 = (l1 - l_prev).exp();
    debug_assert!(r0 <= 1.0 + RATIO_SLACK && r1 <= 1.0 + RATIO_SLACK);
    r0 = r0.clamp(0.0, 1.0);
    r1 = r1.clamp(0.0, 1.0);
    if r0 + r1 == 0.0 {
        return Err(Error::DegenerateHistory { step });
    }
    Ok(r0 / (r0 + r1))
}

fn replay_history(
    lat: &Lattice,
    history: &[StepRecord],
) -> Result<(EdgeSet, ProductState)> {
    let mut covered = lat.empty_edge_set();
    let mut phi = ProductState::new(lat);
    for record in history {
        let idx = lat.edge_index(record.edge)?;
        if covered.get(idx) {
            return Err(Error::InvalidStrategy("edge measured twice"));
        }
        covered.set(idx, true);
        let basis = MeasurementBasis::new(record.theta, record.phi);
        phi.set(idx, basis.state(record.outcome));
    }
    Ok((covered, phi))
}

/// `p(outcome ‖ history)` for measuring `next` after the recorded history.
///
/// Both the extended measured set and its complement must be connected.
/// Fails with [`Error::DegenerateHistory`] when the history itself has
/// probability zero.
pub fn conditional_probability(
    lat: &Lattice,
    history: &[StepRecord],
    next: &Measurement,
    outcome: u8,
) -> Result<f64> {
    let (mut covered, mut phi) = replay_history(lat, history)?;
    let idx = lat.edge_index(next.edge)?;
    if covered.get(idx) {
        return Err(Error::InvalidStrategy("edge measured twice"));
    }
    let step = history.len() + 1;
    covered.set(idx, true);
    if !lat.is_connected(&covered) || !lat.is_connected(&covered.complement()) {
        return Err(Error::ConnectivityViolation { step, edge: next.edge });
    }
    let l_prev = if history.is_empty() {
        0.0
    } else {
        let mut prefix = covered.clone();
        prefix.set(idx, false);
        partial_overlap(lat, &prefix, &phi)?.ln()
    };
    if l_prev == f64::NEG_INFINITY {
        return Err(Error::DegenerateHistory { step: history.len() });
    }
    let (l0, l1) = branch_logs(lat, &covered, &mut phi, idx, next.basis)?;
    let p0 = normalized_p0(l0, l1, l_prev, step)?;
    Ok(if outcome == 0 { p0 } else { 1.0 - p0 })
}

/// Runs a full measurement sequence, sampling outcomes by the chain rule.
/// The trace is a pure function of `(lattice, strategy, seed)`.
pub fn simulate(
    lat: &Lattice,
    strategy: &mut dyn Strategy,
    seed: u64,
) -> Result<SimulationTrace> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut covered = lat.empty_edge_set();
    let mut phi = ProductState::new(lat);
    let mut log_joint = 0.0f64;
    let mut steps: Vec<StepRecord> = Vec::with_capacity(lat.n_edges());
    for step in 1..=lat.n_edges() {
        let m = strategy.next_measurement(lat, &steps);
        let idx = lat.edge_index(m.edge)?;
        if covered.get(idx) {
            return Err(Error::InvalidStrategy("edge measured twice"));
        }
        covered.set(idx, true);
        if !lat.is_connected(&covered) || !lat.is_connected(&covered.complement()) {
            return Err(Error::ConnectivityViolation { step, edge: m.edge });
        }
        let (l0, l1) = branch_logs(lat, &covered, &mut phi, idx, m.basis)?;
        let p0 = normalized_p0(l0, l1, log_joint, step)?;
        let outcome = u8::from(draw_unit(&mut rng) >= p0);
        phi.set(idx, m.basis.state(outcome));
        log_joint = if outcome == 0 { l0 } else { l1 };
        steps.push(StepRecord {
            edge: m.edge,
            theta: m.basis.theta,
            phi: m.basis.phi,
            p0,
            outcome,
        });
    }
    Ok(SimulationTrace {
        lattice_size: lat.size(),
        seed,
        rng: RNG_NAME,
        steps,
    })
}

/// A step at which one side of the bipartition is disconnected.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OrderViolation {
    /// 1-based step index.
    pub step: usize,
    pub edge: EdgeId,
    pub measured_connected: bool,
    pub unmeasured_connected: bool,
}

/// Checks a full measurement order against the connectivity requirement and
/// reports every offending step. The order must cover each edge exactly
/// once.
pub fn validate_measurement_order(
    lat: &Lattice,
    order: &[EdgeId],
) -> Result<Vec<OrderViolation>> {
    if order.len() != lat.n_edges() {
        return Err(Error::InvalidStrategy("order must cover every edge"));
    }
    let mut covered = lat.empty_edge_set();
    let mut violations = Vec::new();
    for (j, &edge) in order.iter().enumerate() {
        let idx = lat.edge_index(edge)?;
        if covered.get(idx) {
            return Err(Error::InvalidStrategy("edge measured twice"));
        }
        covered.set(idx, true);
        let measured = lat.is_connected(&covered);
        let unmeasured = lat.is_connected(&covered.complement());
        if !measured || !unmeasured {
            violations.push(OrderViolation {
                step: j + 1,
                edge,
                measured_connected: measured,
                unmeasured_connected: unmeasured,
            });
        }
    }
    Ok(violations)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf2;
    use crate::lattice::EdgeKind;
    use crate::oracle;
    use core::f64::consts::{LN_2, PI, TAU};

    fn xorshift(state: &mut u64) -> f64 {
        *state ^= *state << 13;
        *state ^= *state >> 7;
        *state ^= *state << 17;
        (*state >> 11) as f64 / (1u64 << 53) as f64
    }

    #[test]
    fn raster_order_covers_every_edge_connectedly() {
        for l in 1..=4 {
            let lat = Lattice::new(l).unwrap();
            let order = raster_order(&lat);
            assert_eq!(order.len(), lat.n_edges());
            assert!(validate_measurement_order(&lat, &order).unwrap().is_empty());
        }
    }

    #[test]
    fn reverse_raster_has_no_violations() {
        let lat = Lattice::new(3).unwrap();
        let mut order = raster_order(&lat);
        order.reverse();
        assert!(validate_measurement_order(&lat, &order).unwrap().is_empty());
    }

    #[test]
    fn alternating_far_edges_violate_from_step_two() {
        let lat = Lattice::new(2).unwrap();
        let raster = raster_order(&lat);
        let mut order = Vec::new();
        let (mut lo, mut hi) = (0usize, raster.len() - 1);
        while lo <= hi {
            order.push(raster[lo]);
            if lo != hi {
                order.push(raster[hi]);
            }
            lo += 1;
            hi -= 1;
        }
        let violations = validate_measurement_order(&lat, &order).unwrap();
        assert!(!violations.is_empty());
        assert_eq!(violations[0].step, 2);
    }

    #[test]
    fn first_measurement_is_a_fair_coin() {
        let lat = Lattice::new(2).unwrap();
        let mut state = 0xfeed_beefu64;
        for _ in 0..10 {
            let edge = raster_order(&lat)[0];
            let basis = MeasurementBasis::new(xorshift(&mut state) * PI, xorshift(&mut state) * TAU);
            let p = conditional_probability(&lat, &[], &Measurement { edge, basis }, 0).unwrap();
            assert!((p - 0.5).abs() < 1e-10);
        }
    }

    #[test]
    fn l1_raster_z_outcomes_form_a_cycle_and_last_step_is_forced() {
        let lat = Lattice::new(1).unwrap();
        for seed in 0..20 {
            let trace = simulate(&lat, &mut RasterStrategy::raster_z(), seed).unwrap();
            let outcomes: Vec<u8> = trace.steps.iter().map(|s| s.outcome).collect();
            // the only cycles at L=1 are all-0 and all-1
            assert!(outcomes.iter().all(|&m| m == outcomes[0]), "seed {seed}");
            assert!((trace.steps[0].p0 - 0.5).abs() < 1e-10);
            // after the first outcome everything is determined
            for step in &trace.steps[1..] {
                let p = if step.outcome == 0 { step.p0 } else { 1.0 - step.p0 };
                assert!((p - 1.0).abs() < 1e-9, "forced: p={p}");
            }
        }
    }

    #[test]
    fn l2_raster_z_step_probabilities_are_half_or_one() {
        let lat = Lattice::new(2).unwrap();
        for seed in [1u64, 7, 42] {
            let trace = simulate(&lat, &mut RasterStrategy::raster_z(), seed).unwrap();
            let mut log_joint = 0.0;
            for step in &trace.steps {
                let p = if step.outcome == 0 { step.p0 } else { 1.0 - step.p0 };
                assert!(
                    (p - 0.5).abs() < 1e-9 || (p - 1.0).abs() < 1e-9,
                    "p = {p}"
                );
                log_joint += p.ln();
            }
            assert!((log_joint - (-4.0 * LN_2)).abs() < 1e-8);
            // Z-raster outcomes always form a 1-cycle.
            let chain = trace_outcome_chain(&lat, &trace);
            let edges: Vec<(usize, usize)> = (0..lat.n_edges()).map(|e| lat.endpoints(e)).collect();
            assert!(gf2::boundary(lat.n_vertices(), &edges, &chain).is_zero());
        }
    }

    fn trace_outcome_chain(lat: &Lattice, trace: &SimulationTrace) -> gf2::BitVec {
        let mut chain = gf2::BitVec::zeros(lat.n_edges());
        for step in &trace.steps {
            if step.outcome == 1 {
                chain.set(lat.edge_index(step.edge).unwrap(), true);
            }
        }
        chain
    }

    #[test]
    fn raster_x_outcomes_satisfy_plaquette_parity() {
        let lat = Lattice::new(2).unwrap();
        for seed in [3u64, 11, 2026] {
            let trace = simulate(&lat, &mut RasterStrategy::raster_x(), seed).unwrap();
            let chain = trace_outcome_chain(&lat, &trace);
            for p in 0..lat.n_plaquettes() {
                let parity = lat
                    .plaquette_boundary(p)
                    .iter()
                    .filter(|&&e| chain.get(e))
                    .count();
                assert_eq!(parity % 2, 0, "plaquette {p}, seed {seed}");
            }
        }
    }

    #[test]
    fn traces_are_deterministic_in_the_seed() {
        let lat = Lattice::new(2).unwrap();
        let a = simulate(&lat, &mut RasterStrategy::raster_basis(1.1, 0.4), 99).unwrap();
        let b = simulate(&lat, &mut RasterStrategy::raster_basis(1.1, 0.4), 99).unwrap();
        assert_eq!(a, b);
        let c = simulate(&lat, &mut RasterStrategy::raster_basis(1.1, 0.4), 100).unwrap();
        assert_eq!(c.steps.len(), a.steps.len());
    }

    #[test]
    fn disconnected_script_fails_at_step_two() {
        let lat = Lattice::new(2).unwrap();
        let far = EdgeId { kind: EdgeKind::Horizontal, row: 2, col: 1 };
        let near = EdgeId { kind: EdgeKind::Horizontal, row: 0, col: 0 };
        let mut steps: Vec<ScriptedStep> = raster_order(&lat)
            .into_iter()
            .filter(|&e| e != far && e != near)
            .map(|edge| ScriptedStep { edge, rule: BasisRule::Fixed(MeasurementBasis::z()) })
            .collect();
        steps.insert(0, ScriptedStep { edge: far, rule: BasisRule::Fixed(MeasurementBasis::z()) });
        steps.insert(0, ScriptedStep { edge: near, rule: BasisRule::Fixed(MeasurementBasis::z()) });
        let mut strategy = ScriptedStrategy::new(steps).unwrap();
        let err = simulate(&lat, &mut strategy, 5).unwrap_err();
        assert_eq!(
            err,
            Error::ConnectivityViolation { step: 2, edge: far }
        );
    }

    #[test]
    fn scripted_outcome_conditioning_is_validated() {
        let lat = Lattice::new(1).unwrap();
        let order = raster_order(&lat);
        let bad = vec![ScriptedStep {
            edge: order[0],
            rule: BasisRule::OutcomeParity {
                depends_on: vec![0],
                even: MeasurementBasis::z(),
                odd: MeasurementBasis::x(),
            },
        }];
        assert!(matches!(
            ScriptedStrategy::new(bad).unwrap_err(),
            Error::InvalidStrategy(_)
        ));
    }

    #[test]
    fn adaptive_scripted_strategy_runs() {
        let lat = Lattice::new(2).unwrap();
        let steps: Vec<ScriptedStep> = raster_order(&lat)
            .into_iter()
            .enumerate()
            .map(|(j, edge)| ScriptedStep {
                edge,
                rule: if j == 0 {
                    BasisRule::Fixed(MeasurementBasis::x())
                } else {
                    BasisRule::OutcomeParity {
                        depends_on: vec![j - 1],
                        even: MeasurementBasis::new(0.3, 0.0),
                        odd: MeasurementBasis::new(2.1, 1.0),
                    }
                },
            })
            .collect();
        let mut strategy = ScriptedStrategy::new(steps).unwrap();
        let trace = simulate(&lat, &mut strategy, 17).unwrap();
        assert_eq!(trace.steps.len(), lat.n_edges());
        for step in &trace.steps {
            assert!((0.0..=1.0).contains(&step.p0));
        }
    }

    #[test]
    fn exchange_consistency_against_oracle_at_l1() {
        // A fixed basis assignment measured in two different orders gives
        // the same joint distribution, equal to the oracle's.
        let lat = Lattice::new(1).unwrap();
        let n = lat.n_edges();
        let mut state = 0x5151_5151u64;
        let bases: Vec<MeasurementBasis> = (0..n)
            .map(|_| MeasurementBasis::new(xorshift(&mut state) * PI, xorshift(&mut state) * TAU))
            .collect();
        let forward = raster_order(&lat);
        let mut backward = forward.clone();
        backward.reverse();

        for mask in 0u32..1 << n {
            let outcome_of = |edge: EdgeId| {
                let idx = lat.edge_index(edge).unwrap();
                (mask >> idx & 1) as u8
            };
            let mut joints = Vec::new();
            for order in [&forward, &backward] {
                let mut history: Vec<StepRecord> = Vec::new();
                let mut joint = 1.0f64;
                for &edge in order.iter() {
                    let idx = lat.edge_index(edge).unwrap();
                    let basis = bases[idx];
                    let m = outcome_of(edge);
                    let p = conditional_probability(
                        &lat,
                        &history,
                        &Measurement { edge, basis },
                        m,
                    )
                    .unwrap();
                    joint *= p;
                    history.push(StepRecord {
                        edge,
                        theta: basis.theta,
                        phi: basis.phi,
                        p0: if m == 0 { p } else { 1.0 - p },
                        outcome: m,
                    });
                }
                joints.push(joint);
            }
            let mut phi = ProductState::new(&lat);
            for e in 0..n {
                phi.set(e, bases[e].state((mask >> e & 1) as u8));
            }
            let expect = oracle::oracle_overlap(&lat, &phi).unwrap().norm_sqr();
            assert!((joints[0] - joints[1]).abs() < 1e-9, "orders disagree");
            assert!((joints[0] - expect).abs() < 1e-8, "oracle disagrees");
        }
    }

    #[test]
    fn conditional_probabilities_match_oracle_ratios_at_l2() {
        let lat = Lattice::new(2).unwrap();
        let mut state = 0xc0ff_ee11u64;
        // Random adaptive runs; compare each step against oracle ratios.
        for _ in 0..4 {
            let mut covered = lat.empty_edge_set();
            let mut history: Vec<StepRecord> = Vec::new();
            let mut phi = ProductState::new(&lat);
            for _step in 0..lat.n_edges() {
                // any edge keeping both sides connected
                let candidates: Vec<usize> = (0..lat.n_edges())
                    .filter(|&e| !covered.get(e))
                    .filter(|&e| {
                        let mut with = covered.clone();
                        with.set(e, true);
                        lat.is_connected(&with) && lat.is_connected(&with.complement())
                    })
                    .collect();
                let pick = candidates[(xorshift(&mut state) * candidates.len() as f64) as usize
                    % candidates.len()];
                let edge = lat.edge_from_index(pick);
                let basis =
                    MeasurementBasis::new(xorshift(&mut state) * PI, xorshift(&mut state) * TAU);
                let p0 = conditional_probability(
                    &lat,
                    &history,
                    &Measurement { edge, basis },
                    0,
                )
                .unwrap();
                let p1 = conditional_probability(
                    &lat,
                    &history,
                    &Measurement { edge, basis },
                    1,
                )
                .unwrap();
                assert!((p0 + p1 - 1.0).abs() < 1e-9);

                let base = if history.is_empty() {
                    1.0
                } else {
                    oracle::oracle_partial(&lat, &covered, &phi).unwrap()
                };
                let mut with = covered.clone();
                with.set(pick, true);
                phi.set(pick, basis.state(0));
                let oracle_p0 = oracle::oracle_partial(&lat, &with, &phi).unwrap() / base;
                assert!((p0 - oracle_p0).abs() < 1e-8, "p0={p0} oracle={oracle_p0}");

                let outcome = u8::from(xorshift(&mut state) >= p0);
                phi.set(pick, basis.state(outcome));
                covered.set(pick, true);
                history.push(StepRecord {
                    edge,
                    theta: basis.theta,
                    phi: basis.phi,
                    p0,
                    outcome,
                });
            }
        }
    }
}
