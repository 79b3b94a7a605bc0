//! JSON schemas for configs, traces, state files and graph dumps.
//!
//! All files carry `"schema": 1`. Edges are named
//! `{"kind": "h"|"v", "row": r, "col": c}`; complex numbers are `[re, im]`
//! pairs; probabilities are decimal doubles; angles are radians.

use anyhow::{bail, Context};
use planar_mqc_core::codestate::{MeasurementBasis, QubitState};
use planar_mqc_core::lattice::{EdgeId, EdgeKind, Lattice};
use planar_mqc_core::mqc::{BasisRule, ScriptedStep, ScriptedStrategy, SimulationTrace};
use planar_mqc_core::planar_reduce::{Complex64, EdgeWeight, WeightedPlanarGraph};
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct EdgeJson {
    pub kind: char,
    pub row: usize,
    pub col: usize,
}

impl EdgeJson {
    pub fn to_edge(self) -> anyhow::Result<EdgeId> {
        let kind = match self.kind {
            'h' => EdgeKind::Horizontal,
            'v' => EdgeKind::Vertical,
            other => bail!("edge kind must be 'h' or 'v', got {other:?}"),
        };
        Ok(EdgeId { kind, row: self.row, col: self.col })
    }

    pub fn from_edge(edge: EdgeId) -> Self {
        EdgeJson {
            kind: match edge.kind {
                EdgeKind::Horizontal => 'h',
                EdgeKind::Vertical => 'v',
            },
            row: edge.row,
            col: edge.col,
        }
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct BasisJson {
    pub theta: f64,
    pub phi: f64,
}

impl From<BasisJson> for MeasurementBasis {
    fn from(b: BasisJson) -> Self {
        MeasurementBasis::new(b.theta, b.phi)
    }
}

/// One scripted step: a fixed basis, or a pair of bases selected by the
/// parity of earlier outcomes.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScriptedStepJson {
    pub edge: EdgeJson,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub depends_on: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub even: Option<BasisJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub odd: Option<BasisJson>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StrategyJson {
    Builtin {
        name: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        theta: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        phi: Option<f64>,
    },
    Scripted {
        steps: Vec<ScriptedStepJson>,
    },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema: u32,
    pub lattice_size: usize,
    pub seed: u64,
    pub strategy: StrategyJson,
    #[serde(default = "default_true")]
    pub emit_probabilities: bool,
    #[serde(default)]
    pub oracle_check: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_path: Option<String>,
}

fn default_true() -> bool {
    true
}

impl RunConfig {
    pub fn parse(text: &str) -> anyhow::Result<Self> {
        let config: RunConfig = serde_json::from_str(text).context("malformed config")?;
        if config.schema != SCHEMA_VERSION {
            bail!("unsupported schema version {}", config.schema);
        }
        Ok(config)
    }
}

/// Builds the runtime strategy, validating scripted step counts and edges.
pub fn build_strategy(
    lat: &Lattice,
    strategy: &StrategyJson,
) -> anyhow::Result<Box<dyn planar_mqc_core::Strategy>> {
    use planar_mqc_core::mqc::RasterStrategy;
    match strategy {
        StrategyJson::Builtin { name, theta, phi } => match name.as_str() {
            "raster_z" => Ok(Box::new(RasterStrategy::raster_z())),
            "raster_x" => Ok(Box::new(RasterStrategy::raster_x())),
            "raster_basis" => {
                let theta = theta.context("raster_basis requires theta")?;
                let phi = phi.context("raster_basis requires phi")?;
                Ok(Box::new(RasterStrategy::raster_basis(theta, phi)))
            }
            other => bail!("unknown builtin strategy {other:?}"),
        },
        StrategyJson::Scripted { steps } => {
            if steps.len() != lat.n_edges() {
                bail!(
                    "scripted strategy has {} steps, lattice needs {}",
                    steps.len(),
                    lat.n_edges()
                );
            }
            let mut script = Vec::with_capacity(steps.len());
            for (j, step) in steps.iter().enumerate() {
                let edge = step.edge.to_edge()?;
                lat.edge_index(edge)
                    .map_err(|e| anyhow::anyhow!("step {j}: {e}"))?;
                let rule = match (&step.depends_on, step.theta, step.phi) {
                    (None, theta, phi) => BasisRule::Fixed(MeasurementBasis::new(
                        theta.with_context(|| format!("step {j}: theta required"))?,
                        phi.with_context(|| format!("step {j}: phi required"))?,
                    )),
                    (Some(depends_on), None, None) => {
                        let even = step.even.with_context(|| format!("step {j}: even basis"))?;
                        let odd = step.odd.with_context(|| format!("step {j}: odd basis"))?;
                        BasisRule::OutcomeParity {
                            depends_on: depends_on.clone(),
                            even: even.into(),
                            odd: odd.into(),
                        }
                    }
                    _ => bail!("step {j}: give either a fixed basis or a conditioned pair"),
                };
                script.push(ScriptedStep { edge, rule });
            }
            Ok(Box::new(ScriptedStrategy::new(script)?))
        }
    }
}

/// The measurement order of a strategy when it is outcome-independent.
pub fn strategy_order(lat: &Lattice, strategy: &StrategyJson) -> anyhow::Result<Vec<EdgeId>> {
    match strategy {
        StrategyJson::Builtin { .. } => Ok(planar_mqc_core::mqc::raster_order(lat)),
        StrategyJson::Scripted { steps } => {
            steps.iter().map(|s| s.edge.to_edge()).collect::<anyhow::Result<Vec<_>>>()
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StepJson {
    pub edge: EdgeJson,
    pub theta: f64,
    pub phi: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p0: Option<f64>,
    pub outcome: u8,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceJson {
    pub lattice_size: usize,
    pub seed: u64,
    pub rng: String,
    pub steps: Vec<StepJson>,
}

impl TraceJson {
    pub fn from_trace(trace: &SimulationTrace, emit_probabilities: bool) -> Self {
        TraceJson {
            lattice_size: trace.lattice_size,
            seed: trace.seed,
            rng: trace.rng.to_string(),
            steps: trace
                .steps
                .iter()
                .map(|s| StepJson {
                    edge: EdgeJson::from_edge(s.edge),
                    theta: s.theta,
                    phi: s.phi,
                    p0: emit_probabilities.then_some(s.p0),
                    outcome: s.outcome,
                })
                .collect(),
        }
    }

    /// Schema-level validation of a parsed trace file.
    pub fn validate(&self) -> anyhow::Result<()> {
        let lat = Lattice::new(self.lattice_size).context("bad lattice size")?;
        if self.steps.len() != lat.n_edges() {
            bail!("trace has {} steps, expected {}", self.steps.len(), lat.n_edges());
        }
        let mut seen = lat.empty_edge_set();
        for (j, step) in self.steps.iter().enumerate() {
            let idx = lat
                .edge_index(step.edge.to_edge()?)
                .map_err(|e| anyhow::anyhow!("step {j}: {e}"))?;
            if seen.get(idx) {
                bail!("step {j}: edge repeated");
            }
            seen.set(idx, true);
            if let Some(p0) = step.p0 {
                if !(0.0..=1.0).contains(&p0) {
                    bail!("step {j}: p0 out of range");
                }
            }
            if step.outcome > 1 {
                bail!("step {j}: outcome must be 0 or 1");
            }
        }
        Ok(())
    }
}

/// Input for `overlap` and `prob`: per-edge qubit amplitudes; the listed
/// edges form the (measured) set.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateFile {
    pub schema: u32,
    pub lattice_size: usize,
    pub state: Vec<QubitJson>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QubitJson {
    pub edge: EdgeJson,
    pub alpha: [f64; 2],
    pub beta: [f64; 2],
}

impl StateFile {
    pub fn parse(text: &str) -> anyhow::Result<Self> {
        let file: StateFile = serde_json::from_str(text).context("malformed state file")?;
        if file.schema != SCHEMA_VERSION {
            bail!("unsupported schema version {}", file.schema);
        }
        Ok(file)
    }

    pub fn load(
        &self,
    ) -> anyhow::Result<(Lattice, planar_mqc_core::EdgeSet, planar_mqc_core::ProductState)> {
        let lat = Lattice::new(self.lattice_size).context("bad lattice size")?;
        let mut set = lat.empty_edge_set();
        let mut phi = planar_mqc_core::ProductState::new(&lat);
        for (i, qubit) in self.state.iter().enumerate() {
            let idx = lat
                .edge_index(qubit.edge.to_edge()?)
                .map_err(|e| anyhow::anyhow!("state entry {i}: {e}"))?;
            if set.get(idx) {
                bail!("state entry {i}: edge listed twice");
            }
            let q = QubitState::new(
                Complex64::new(qubit.alpha[0], qubit.alpha[1]),
                Complex64::new(qubit.beta[0], qubit.beta[1]),
            );
            if (q.norm_sqr() - 1.0).abs() > 1e-9 {
                bail!("state entry {i}: amplitudes are not normalized");
            }
            set.set(idx, true);
            phi.set(idx, q);
        }
        Ok((lat, set, phi))
    }
}

/// Debug dump of a weighted planar graph: vertices with rotations and defect
/// flags, edges with complex weights, and the accumulated prefactor.
pub fn graph_debug_json(g: &WeightedPlanarGraph) -> serde_json::Value {
    let vertices: Vec<serde_json::Value> = g
        .alive_vertices()
        .map(|v| {
            serde_json::json!({
                "id": v,
                "defect": g.is_defect(v),
                "rotation": g.rotation(v).iter()
                    .map(|h| serde_json::json!([h.edge, h.end]))
                    .collect::<Vec<_>>(),
            })
        })
        .collect();
    let edges: Vec<serde_json::Value> = g
        .alive_edges()
        .map(|(e, u, v)| {
            let weight = match g.edge_weight(e) {
                EdgeWeight::Free(w) => serde_json::json!([w.re, w.im]),
                EdgeWeight::Forced { value, scale } => serde_json::json!({
                    "forced": value as u8,
                    "scale": [scale.re, scale.im],
                }),
            };
            serde_json::json!({ "id": e, "u": u, "v": v, "weight": weight })
        })
        .collect();
    let prefactor = g.prefactor();
    serde_json::json!({
        "schema": SCHEMA_VERSION,
        "vertices": vertices,
        "edges": edges,
        "prefactor": {
            "log_magnitude": prefactor.log_magnitude,
            "phase": [prefactor.phase.re, prefactor.phase.im],
        },
    })
}
