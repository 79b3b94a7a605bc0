//! Subcommand implementations with typed errors mapped to exit codes.

use crate::formats::{build_strategy, graph_debug_json, RunConfig, StateFile, TraceJson};
use planar_mqc_core::codestate::{
    overlap_abs, partial_overlap, MeasurementBasis, ProductState,
};
use planar_mqc_core::lattice::Lattice;
use planar_mqc_core::mqc::{
    conditional_probability, simulate, Measurement, StepRecord,
};
use planar_mqc_core::{oracle, Error as CoreError};
use std::f64::consts::{PI, TAU};
use std::fmt::Write as _;
use std::time::Instant;

/// Process exit codes, one per error family.
pub mod exit_code {
    pub const OK: i32 = 0;
    pub const OTHER: i32 = 1;
    pub const CONNECTIVITY: i32 = 2;
    pub const SCHEMA: i32 = 3;
    pub const RESOURCE_GUARD: i32 = 4;
    pub const DEGENERATE: i32 = 5;
}

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.message)
    }
}

impl std::error::Error for CliError {}

pub type CliResult<T> = Result<T, CliError>;

fn schema_err(err: impl std::fmt::Display) -> CliError {
    CliError { code: exit_code::SCHEMA, message: format!("config error: {err}") }
}

fn core_err(err: CoreError) -> CliError {
    let code = match &err {
        CoreError::Disconnected | CoreError::ConnectivityViolation { .. } => {
            exit_code::CONNECTIVITY
        }
        CoreError::ResourceGuard(_) => exit_code::RESOURCE_GUARD,
        CoreError::DegenerateHistory { .. } => exit_code::DEGENERATE,
        CoreError::InvalidSize
        | CoreError::InvalidEdge
        | CoreError::EmptyEdgeSet
        | CoreError::StateDomain
        | CoreError::InvalidStrategy(_) => exit_code::SCHEMA,
        _ => exit_code::OTHER,
    };
    CliError { code, message: err.to_string() }
}

fn verbose() -> bool {
    std::env::var_os("PLANAR_MQC_VERBOSE").is_some_and(|v| !v.is_empty() && v != "0")
}

fn read_file(path: &str) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| CliError {
        code: exit_code::OTHER,
        message: format!("cannot read {path}: {e}"),
    })
}

/// `simulate`: run a config, write the trace file, optionally cross-check
/// each step against the oracle.
pub fn cmd_simulate(config_path: &str, output_override: Option<&str>) -> CliResult<String> {
    let config = RunConfig::parse(&read_file(config_path)?).map_err(schema_err)?;
    let lat = Lattice::new(config.lattice_size).map_err(core_err)?;
    let mut strategy = build_strategy(&lat, &config.strategy).map_err(schema_err)?;

    let started = Instant::now();
    let trace = simulate(&lat, strategy.as_mut(), config.seed).map_err(core_err)?;
    if verbose() {
        eprintln!(
            "simulated {} steps in {:.3}s",
            trace.steps.len(),
            started.elapsed().as_secs_f64()
        );
    }

    if config.oracle_check {
        oracle_check_trace(&lat, &trace.steps).map_err(core_err)?;
    }

    let json = TraceJson::from_trace(&trace, config.emit_probabilities);
    let text = serde_json::to_string_pretty(&json).expect("trace serializes");
    let output = output_override.or(config.output_path.as_deref());
    match output {
        Some(path) => {
            std::fs::write(path, text.as_bytes()).map_err(|e| CliError {
                code: exit_code::OTHER,
                message: format!("cannot write {path}: {e}"),
            })?;
            Ok(format!("wrote {} steps to {path}", json.steps.len()))
        }
        None => Ok(text),
    }
}

/// Replays a trace against the enumeration oracle, step by step.
fn oracle_check_trace(lat: &Lattice, steps: &[StepRecord]) -> Result<(), CoreError> {
    if lat.size() > 3 {
        return Err(CoreError::ResourceGuard(
            "oracle verification of traces is limited to L <= 3",
        ));
    }
    let mut covered = lat.empty_edge_set();
    let mut phi = ProductState::new(lat);
    let mut previous = 1.0f64;
    for step in steps {
        let idx = lat.edge_index(step.edge)?;
        let basis = MeasurementBasis::new(step.theta, step.phi);
        covered.set(idx, true);
        phi.set(idx, basis.state(0));
        let joint0 = oracle::oracle_partial(lat, &covered, &phi)?;
        let oracle_p0 = joint0 / previous;
        if (oracle_p0 - step.p0).abs() > 1e-8 {
            return Err(CoreError::InvalidStrategy(
                "recorded probability disagrees with the oracle",
            ));
        }
        phi.set(idx, basis.state(step.outcome));
        previous = if step.outcome == 0 {
            joint0
        } else {
            oracle::oracle_partial(lat, &covered, &phi)?
        };
    }
    Ok(())
}

/// `overlap`: log-magnitude of `⟨G_E|Φ⟩` for the state file's edge set.
pub fn cmd_overlap(input_path: &str) -> CliResult<String> {
    let file = StateFile::parse(&read_file(input_path)?).map_err(schema_err)?;
    let (lat, set, phi) = file.load().map_err(schema_err)?;
    let value = overlap_abs(&lat, &set, &phi).map_err(core_err)?;
    Ok(serde_json::json!({
        "log_magnitude": value.ln(),
        "magnitude": value.value(),
    })
    .to_string())
}

/// `prob`: `⟨Φ|ρ_E|Φ⟩` for the state file's edge set.
pub fn cmd_prob(input_path: &str) -> CliResult<String> {
    let file = StateFile::parse(&read_file(input_path)?).map_err(schema_err)?;
    let (lat, set, phi) = file.load().map_err(schema_err)?;
    let value = partial_overlap(&lat, &set, &phi).map_err(core_err)?;
    Ok(serde_json::json!({
        "log_value": value.ln(),
        "value": value.value(),
    })
    .to_string())
}

struct SplitMix(u64);

impl SplitMix {
    fn next_f64(&mut self) -> f64 {
        self.0 = self.0.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        ((z ^ (z >> 31)) >> 11) as f64 / (1u64 << 53) as f64
    }

    fn basis(&mut self) -> MeasurementBasis {
        MeasurementBasis::new(self.next_f64() * PI, self.next_f64() * TAU)
    }
}

fn random_connected_pair(
    lat: &Lattice,
    rng: &mut SplitMix,
) -> (planar_mqc_core::EdgeSet, ProductState) {
    loop {
        let mut set = lat.empty_edge_set();
        for e in 0..lat.n_edges() {
            if rng.next_f64() < 0.5 {
                set.set(e, true);
            }
        }
        if set.is_zero()
            || set.complement().is_zero()
            || !lat.is_connected(&set)
            || !lat.is_connected(&set.complement())
        {
            continue;
        }
        let mut phi = ProductState::new(lat);
        for e in set.iter_ones() {
            phi.set(e, rng.basis().state((rng.next_f64() < 0.5) as u8));
        }
        return (set, phi);
    }
}

/// `oracle-check`: randomized comparisons of the pipeline against the
/// brute-force oracle. Returns a report; errors with a nonzero exit code on
/// any mismatch.
pub fn cmd_oracle_check(lattice_size: usize, trials: usize, seed: u64) -> CliResult<String> {
    if lattice_size > 3 {
        return Err(core_err(CoreError::ResourceGuard(
            "oracle comparisons are limited to L <= 3",
        )));
    }
    let lat = Lattice::new(lattice_size).map_err(core_err)?;
    let mut rng = SplitMix(seed);
    let mut report = String::new();
    let mut failed = false;

    let cycles = oracle::enumerate_cycles(&lat).map_err(core_err)?;
    let counting_ok = cycles.len() == 1 << lat.n_plaquettes();
    failed |= !counting_ok;
    let _ = writeln!(
        report,
        "counting: |Z| = 2^{} {}",
        lat.n_plaquettes(),
        if counting_ok { "ok" } else { "MISMATCH" }
    );

    let full = lat.full_edge_set();
    let mut worst = 0.0f64;
    for _ in 0..trials {
        let mut phi = ProductState::new(&lat);
        for e in 0..lat.n_edges() {
            phi.set(e, rng.basis().state((rng.next_f64() < 0.5) as u8));
        }
        let fast = overlap_abs(&lat, &full, &phi).map_err(core_err)?.value();
        let slow = oracle::oracle_overlap(&lat, &phi).map_err(core_err)?.norm();
        worst = worst.max((fast - slow).abs() / (1.0 + slow));
    }
    failed |= worst > 1e-8;
    let _ = writeln!(
        report,
        "overlap: {trials} trials, max relative error {worst:.3e} {}",
        if worst <= 1e-8 { "ok" } else { "MISMATCH" }
    );

    let mut worst = 0.0f64;
    for _ in 0..trials {
        let (set, phi) = random_connected_pair(&lat, &mut rng);
        let fast = partial_overlap(&lat, &set, &phi).map_err(core_err)?.value();
        let slow = oracle::oracle_partial(&lat, &set, &phi).map_err(core_err)?;
        worst = worst.max((fast - slow).abs() / (1.0 + slow));
    }
    failed |= worst > 1e-8;
    let _ = writeln!(
        report,
        "partial: {trials} trials, max relative error {worst:.3e} {}",
        if worst <= 1e-8 { "ok" } else { "MISMATCH" }
    );

    // One adaptive run's worth of conditional probabilities per 10 trials.
    let runs = (trials / 10).max(1);
    let mut worst = 0.0f64;
    for _ in 0..runs {
        let mut covered = lat.empty_edge_set();
        let mut history: Vec<StepRecord> = Vec::new();
        let mut phi = ProductState::new(&lat);
        let mut previous = 1.0f64;
        for _ in 0..lat.n_edges() {
            let candidates: Vec<usize> = (0..lat.n_edges())
                .filter(|&e| !covered.get(e))
                .filter(|&e| {
                    let mut with = covered.clone();
                    with.set(e, true);
                    lat.is_connected(&with) && lat.is_connected(&with.complement())
                })
                .collect();
            let pick = candidates[(rng.next_f64() * candidates.len() as f64) as usize
                % candidates.len()];
            let edge = lat.edge_from_index(pick);
            let basis = rng.basis();
            let p0 = conditional_probability(&lat, &history, &Measurement { edge, basis }, 0)
                .map_err(core_err)?;
            covered.set(pick, true);
            phi.set(pick, basis.state(0));
            let joint0 = oracle::oracle_partial(&lat, &covered, &phi).map_err(core_err)?;
            worst = worst.max((p0 - joint0 / previous).abs());
            let outcome = u8::from(rng.next_f64() >= p0);
            phi.set(pick, basis.state(outcome));
            previous = if outcome == 0 {
                joint0
            } else {
                oracle::oracle_partial(&lat, &covered, &phi).map_err(core_err)?
            };
            history.push(StepRecord {
                edge,
                theta: basis.theta,
                phi: basis.phi,
                p0,
                outcome,
            });
        }
    }
    failed |= worst > 1e-8;
    let _ = writeln!(
        report,
        "conditional: {runs} adaptive runs, max absolute error {worst:.3e} {}",
        if worst <= 1e-8 { "ok" } else { "MISMATCH" }
    );

    if failed {
        Err(CliError { code: exit_code::OTHER, message: report })
    } else {
        Ok(report.trim_end().to_string())
    }
}

/// Builds the raster-prefix edge set covering half the lattice.
pub fn half_lattice_prefix(lat: &Lattice) -> planar_mqc_core::EdgeSet {
    let order = planar_mqc_core::mqc::raster_order(lat);
    let mut set = lat.empty_edge_set();
    for edge in order.iter().take(lat.n_edges() / 2) {
        set.set(lat.edge_index(*edge).unwrap(), true);
    }
    set
}

/// `bench`: timing runs at desk scale. `full` runs a whole adaptive
/// simulation; `partial` evaluates one partial overlap with half the
/// lattice measured (raster prefix).
pub fn cmd_bench(mode: &str, lattice_size: usize, seed: u64) -> CliResult<String> {
    let lat = Lattice::new(lattice_size).map_err(core_err)?;
    match mode {
        "full" => {
            let steps = {
                let mut rng = SplitMix(seed);
                let order = planar_mqc_core::mqc::raster_order(&lat);
                order
                    .into_iter()
                    .enumerate()
                    .map(|(j, edge)| planar_mqc_core::mqc::ScriptedStep {
                        edge,
                        rule: if j == 0 {
                            planar_mqc_core::mqc::BasisRule::Fixed(rng.basis())
                        } else {
                            planar_mqc_core::mqc::BasisRule::OutcomeParity {
                                depends_on: vec![j - 1],
                                even: rng.basis(),
                                odd: rng.basis(),
                            }
                        },
                    })
                    .collect::<Vec<_>>()
            };
            let mut strategy =
                planar_mqc_core::mqc::ScriptedStrategy::new(steps).map_err(core_err)?;
            let started = Instant::now();
            let trace = simulate(&lat, &mut strategy, seed).map_err(core_err)?;
            let elapsed = started.elapsed().as_secs_f64();
            Ok(format!(
                "full adaptive simulation: L={lattice_size}, {} steps, {elapsed:.3}s",
                trace.steps.len()
            ))
        }
        "partial" => {
            let set = half_lattice_prefix(&lat);
            let mut rng = SplitMix(seed);
            let mut phi = ProductState::new(&lat);
            for e in set.iter_ones() {
                phi.set(e, rng.basis().state((rng.next_f64() < 0.5) as u8));
            }
            let started = Instant::now();
            let value = partial_overlap(&lat, &set, &phi).map_err(core_err)?;
            let elapsed = started.elapsed().as_secs_f64();
            Ok(format!(
                "partial overlap: L={lattice_size}, {} of {} edges measured, log value {:.6}, {elapsed:.3}s",
                set.count_ones(),
                lat.n_edges(),
                value.ln()
            ))
        }
        other => Err(CliError {
            code: exit_code::SCHEMA,
            message: format!("unknown bench mode {other:?} (use full|partial)"),
        }),
    }
}

/// Debug dump of the weighted subgraph for an edge set (test hook for the
/// graph JSON schema).
pub fn dump_subgraph_json(lat: &Lattice, set: &planar_mqc_core::EdgeSet) -> CliResult<String> {
    let sub = lat.subgraph_embedding(set).map_err(core_err)?;
    Ok(serde_json::to_string_pretty(&graph_debug_json(&sub.graph)).expect("serializes"))
}

/// Validates a measurement order file-style (used by tests and by simulate's
/// error paths); returns human-readable violation lines.
pub fn describe_order_violations(
    lat: &Lattice,
    order: &[planar_mqc_core::EdgeId],
) -> CliResult<Vec<String>> {
    let violations =
        planar_mqc_core::mqc::validate_measurement_order(lat, order).map_err(core_err)?;
    Ok(violations
        .iter()
        .map(|v| {
            format!(
                "step {}: measuring {:?} leaves measured {} / unmeasured {}",
                v.step,
                v.edge,
                if v.measured_connected { "connected" } else { "disconnected" },
                if v.unmeasured_connected { "connected" } else { "disconnected" },
            )
        })
        .collect())
}
