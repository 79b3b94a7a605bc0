//! Product states, overlaps with planar code states, and partial-measurement
//! probabilities.
//!
//! The overlap `⟨G_E|Φ⟩` of the code state on an edge set with a product
//! state is `|Z(E)|^{-1/2} · ∏ α_e · Σ_{x∈Z(E)} ∏_{x_e=1} (β_e/α_e)` — a
//! weighted cycle sum evaluated by the matching pipeline. Qubits whose
//! amplitudes sit within [`EXACT_PROJECTION_EPS`] of a computational basis
//! state are routed as exact projections (forced edges) instead of weights
//! near a pole.
//!
//! For a partial measurement the reduced state `ρ_E` is a uniform mixture of
//! syndrome-shifted code states, and
//! `⟨Φ|ρ_E|Φ⟩ = Z(G_E ⊔ G_E*) / (2^{|∂E|-1} |Z(E)|)` where `G_E ⊔ G_E*` is
//! the doubled graph: two mirror copies of `G_E` (conjugated weights on the
//! copy) glued along the boundary vertices into a sphere. Both `E` and its
//! complement must be connected. Connectivity usually lets one face of
//! `G_E` reach the whole boundary; when unmeasured edges are buried between
//! several inner faces it cannot, the plain gluing would leave the sphere,
//! and the evaluation falls back to an explicit sum over the syndrome bits
//! of the unreachable boundary vertices (see [`partial_overlap`]).

use crate::gf2;
use crate::lattice::{EdgeSet, Lattice, LatticeSubgraph};
use crate::pfaffian::{cycle_sum_magnitude, LogMagnitude};
use crate::planar_reduce::{Complex64, EdgeWeight, HalfEdge, WeightedPlanarGraph};
use crate::{Error, Result};
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::LN_2;
use num_traits::Float;

/// Amplitudes below this threshold make a qubit an exact Z-basis projection,
/// handled by graph modification rather than by a divergent weight.
pub const EXACT_PROJECTION_EPS: f64 = 1e-12;

/// Single-qubit state `α|0⟩ + β|1⟩`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QubitState {
    pub alpha: Complex64,
    pub beta: Complex64,
}

impl QubitState {
    pub fn new(alpha: Complex64, beta: Complex64) -> Self {
        QubitState { alpha, beta }
    }

    pub fn zero() -> Self {
        QubitState::new(Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0))
    }

    pub fn one() -> Self {
        QubitState::new(Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0))
    }

    pub fn plus() -> Self {
        let h = Complex64::new(core::f64::consts::FRAC_1_SQRT_2, 0.0);
        QubitState::new(h, h)
    }

    /// Amplitude of the computational basis state `|bit⟩`.
    pub fn amplitude(&self, bit: bool) -> Complex64 {
        if bit {
            self.beta
        } else {
            self.alpha
        }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.alpha.norm_sqr() + self.beta.norm_sqr()
    }
}

/// Von Neumann measurement basis in polar angles:
/// `|ψ⁰⟩ = cos(θ/2)|0⟩ + e^{iφ} sin(θ/2)|1⟩`,
/// `|ψ¹⟩ = sin(θ/2)|0⟩ − e^{iφ} cos(θ/2)|1⟩`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeasurementBasis {
    pub theta: f64,
    pub phi: f64,
}

impl MeasurementBasis {
    pub fn new(theta: f64, phi: f64) -> Self {
        MeasurementBasis { theta, phi }
    }

    /// Z basis (`θ = 0`).
    pub fn z() -> Self {
        MeasurementBasis::new(0.0, 0.0)
    }

    /// X basis (`θ = π/2, φ = 0`).
    pub fn x() -> Self {
        MeasurementBasis::new(core::f64::consts::FRAC_PI_2, 0.0)
    }

    /// Post-measurement state for the given outcome.
    pub fn state(&self, outcome: u8) -> QubitState {
        let half = 0.5 * self.theta;
        let (sin, cos) = (half.sin(), half.cos());
        let phase = Complex64::new(self.phi.cos(), self.phi.sin());
        if outcome == 0 {
            QubitState::new(Complex64::new(cos, 0.0), phase * sin)
        } else {
            QubitState::new(Complex64::new(sin, 0.0), -phase * cos)
        }
    }
}

/// Per-edge qubit states over (a subset of) the lattice edges.
#[derive(Clone, Debug)]
pub struct ProductState {
    slots: Vec<Option<QubitState>>,
}

impl ProductState {
    pub fn new(lat: &Lattice) -> Self {
        ProductState {
            slots: vec![None; lat.n_edges()],
        }
    }

    pub fn set(&mut self, edge: usize, state: QubitState) {
        debug_assert!((state.norm_sqr() - 1.0).abs() < 1e-9, "unnormalized qubit");
        self.slots[edge] = Some(state);
    }

    pub fn unset(&mut self, edge: usize) {
        self.slots[edge] = None;
    }

    pub fn get(&self, edge: usize) -> Option<QubitState> {
        self.slots[edge]
    }

    /// Uniform state over all lattice edges.
    pub fn uniform(lat: &Lattice, state: QubitState) -> Self {
        ProductState {
            slots: vec![Some(state); lat.n_edges()],
        }
    }

    pub fn covers(&self, set: &EdgeSet) -> bool {
        set.iter_ones().all(|e| self.slots[e].is_some())
    }

    pub fn domain(&self, lat: &Lattice) -> EdgeSet {
        let mut set = lat.empty_edge_set();
        for (e, s) in self.slots.iter().enumerate() {
            if s.is_some() {
                set.set(e, true);
            }
        }
        set
    }
}

/// How a qubit state enters the pipeline.
enum WeightClass {
    /// `w = β/α`, with `log|α|` collected outside the graph.
    Free(Complex64, f64),
    Forced { value: bool, scale: Complex64 },
}

fn classify(q: QubitState) -> WeightClass {
    let a = q.alpha.norm();
    let b = q.beta.norm();
    if a < EXACT_PROJECTION_EPS {
        WeightClass::Forced { value: true, scale: q.beta }
    } else if b < EXACT_PROJECTION_EPS {
        WeightClass::Forced { value: false, scale: q.alpha }
    } else {
        WeightClass::Free(q.beta / q.alpha, a.ln())
    }
}

/// Builds `G_E` with weights from the product state. Returns the embedded
/// subgraph and the collected `Σ log|α_e|` over free edges.
fn weighted_subgraph(
    lat: &Lattice,
    set: &EdgeSet,
    phi: &ProductState,
) -> Result<(LatticeSubgraph, f64)> {
    if !phi.covers(set) {
        return Err(Error::StateDomain);
    }
    let mut sub = lat.subgraph_embedding(set)?;
    let mut free_log = 0.0;
    for ge in 0..sub.edge_of.len() {
        let q = phi.get(sub.edge_of[ge]).expect("coverage checked");
        match classify(q) {
            WeightClass::Free(w, log_alpha) => {
                sub.graph.set_edge_weight(ge, EdgeWeight::Free(w));
                free_log += log_alpha;
            }
            WeightClass::Forced { value, scale } => {
                sub.graph
                    .set_edge_weight(ge, EdgeWeight::Forced { value, scale });
            }
        }
    }
    Ok((sub, free_log))
}

/// `log |⟨G_E|Φ⟩|` for a product state on a nonempty edge set.
pub fn overlap_abs(lat: &Lattice, set: &EdgeSet, phi: &ProductState) -> Result<LogMagnitude> {
    let (sub, free_log) = weighted_subgraph(lat, set, phi)?;
    let edges: Vec<(usize, usize)> = sub.graph.alive_edges().map(|(_, a, b)| (a, b)).collect();
    let dim = gf2::cycle_space_dim(sub.graph.vertex_slots(), &edges);
    let z = cycle_sum_magnitude(sub.graph)?;
    Ok(LogMagnitude::from_ln(-0.5 * dim as f64 * LN_2 + free_log) * z)
}

/// `log₂ |S|` for the syndrome space of a bipartition: `|∂E| - 1` when both
/// the set and its complement are connected and nonempty.
pub fn syndrome_count(lat: &Lattice, set: &EdgeSet) -> Result<usize> {
    let complement = set.complement();
    if set.is_zero() || complement.is_zero() {
        return Err(Error::EmptyEdgeSet);
    }
    if !lat.is_connected(set) || !lat.is_connected(&complement) {
        return Err(Error::Disconnected);
    }
    let boundary = lat.boundary_vertices(set).count_ones();
    debug_assert!(boundary >= 2, "even boundaries of connected bipartitions");
    Ok(boundary - 1)
}

/// Boundary vertices that cannot sit on the chosen gluing face. Their
/// syndrome bits are summed explicitly, so the cost scales as `2^rogues`.
const MAX_ROGUE_VERTICES: usize = 16;

/// The doubled graph `G_E ⊔ G_E*`: the subgraph and its mirror copy with
/// conjugated weights, glued at the boundary vertices. At a glued vertex the
/// rotation is the original cyclic order, linearized at a corner on the
/// common face, followed by the mirrored copy of the same order reversed;
/// this realizes the disk-and-mirror-disk drawing on a sphere, so the result
/// passes the Euler check.
///
/// Fails when no single face of `G_E` walks through every boundary vertex
/// (connectivity of `E` and its complement does not always provide one: the
/// unmeasured edges may be buried between inner faces). [`partial_overlap`]
/// handles that case by summing over the uncovered boundary syndromes.
pub fn glue_doubled(
    lat: &Lattice,
    set: &EdgeSet,
    phi: &ProductState,
) -> Result<WeightedPlanarGraph> {
    let complement = set.complement();
    if set.is_zero() {
        return Err(Error::EmptyEdgeSet);
    }
    if !lat.is_connected(set) || !lat.is_connected(&complement) {
        return Err(Error::Disconnected);
    }
    let (sub, _) = weighted_subgraph(lat, set, phi)?;
    let (doubled, rogue) = double_graph(lat, set, &sub)?;
    if !rogue.is_empty() {
        return Err(Error::Embedding("glue boundary spreads over several faces"));
    }
    doubled.validate_embedding()?;
    Ok(doubled)
}

fn conjugate_weight(w: EdgeWeight) -> EdgeWeight {
    match w {
        EdgeWeight::Free(w) => EdgeWeight::Free(w.conj()),
        EdgeWeight::Forced { value, scale } => EdgeWeight::Forced { value, scale: scale.conj() },
    }
}

/// Builds the doubled graph, gluing the mirror copy along the boundary
/// vertices that share one face of `G_E` (the face walking through the most
/// of them). Boundary vertices that no common face reaches are left
/// unglued; the returned pairs `(v, v*)` are their two copies, whose
/// matching syndromes the caller must sum over explicitly.
fn double_graph(
    lat: &Lattice,
    set: &EdgeSet,
    sub: &LatticeSubgraph,
) -> Result<(WeightedPlanarGraph, Vec<(usize, usize)>)> {
    let g = &sub.graph;
    let n = g.vertex_slots();
    let m = g.edge_slots();
    let boundary_lat = lat.boundary_vertices(set);
    let mut is_boundary = vec![false; n];
    for (gv, &lv) in sub.vertex_of.iter().enumerate() {
        is_boundary[gv] = boundary_lat.get(lv);
    }
    let n_boundary = is_boundary.iter().filter(|&&b| b).count();

    // The gluing face: the orbit whose walk reaches the most boundary
    // vertices. When the unmeasured part borders a single face (the disk
    // picture), that face covers all of them.
    let mut corner_of: Vec<Option<HalfEdge>> = vec![None; n];
    if n_boundary > 0 {
        let faces = g.faces();
        let mut best: Option<(usize, usize)> = None; // (coverage, orbit)
        let mut corners_scratch: Vec<Vec<(usize, HalfEdge)>> = Vec::new();
        for (f, orbit) in faces.orbits.iter().enumerate() {
            let mut corners: Vec<(usize, HalfEdge)> = Vec::new();
            let mut seen = vec![false; n];
            for &h in orbit {
                let (a, b) = g.edge_endpoints(h.edge);
                let v = if h.end == 0 { a } else { b };
                if is_boundary[v] && !seen[v] {
                    seen[v] = true;
                    corners.push((v, h));
                }
            }
            if best.is_none_or(|(coverage, _)| corners.len() > coverage) {
                best = Some((corners.len(), f));
            }
            corners_scratch.push(corners);
        }
        let (_, chosen) = best.expect("a nonempty graph has faces");
        for &(v, h) in &corners_scratch[chosen] {
            corner_of[v] = Some(h);
        }
    }

    // Copy vertex ids: glued vertices are shared, the rest get fresh ids.
    let mut rogue = Vec::new();
    let mut copy_id = vec![usize::MAX; n];
    let mut next = n;
    for v in 0..n {
        if corner_of[v].is_some() {
            copy_id[v] = v;
        } else {
            copy_id[v] = next;
            next += 1;
            if is_boundary[v] {
                rogue.push((v, copy_id[v]));
            }
        }
    }

    let mut out = WeightedPlanarGraph::new(next);
    // Original edges keep their ids; the copy of edge e is m + e.
    for (e, a, b) in g.alive_edges() {
        debug_assert_eq!(e, out.add_edge(a, b, g.edge_weight(e)));
    }
    for (e, a, b) in g.alive_edges() {
        let ce = out.add_edge(copy_id[a], copy_id[b], conjugate_weight(g.edge_weight(e)));
        debug_assert_eq!(ce, m + e);
    }

    let mirror = |h: HalfEdge| HalfEdge { edge: m + h.edge, end: h.end };

    for v in 0..n {
        match corner_of[v] {
            Some(arrival) => {
                let rot = g.rotation(v);
                let pos = rot
                    .iter()
                    .position(|&h| h == arrival)
                    .expect("arrival slot present");
                // Linearize ending at the arrival slot, then append the
                // mirrored copy of the same run reversed.
                let mut merged: Vec<HalfEdge> = Vec::with_capacity(2 * rot.len());
                for i in 0..rot.len() {
                    merged.push(rot[(pos + 1 + i) % rot.len()]);
                }
                for i in (0..rot.len()).rev() {
                    merged.push(mirror(merged[i]));
                }
                out.set_rotation(v, merged);
            }
            None => {
                let rot = g.rotation(v).to_vec();
                out.set_rotation(v, rot.clone());
                let reversed: Vec<HalfEdge> = rot.iter().rev().map(|&h| mirror(h)).collect();
                out.set_rotation(copy_id[v], reversed);
            }
        }
    }
    Ok((out, rogue))
}

/// `log Σ exp(l_i)` with the usual max shift.
fn log_sum_exp(logs: &[f64]) -> f64 {
    let peak = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if peak == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    let sum: f64 = logs.iter().map(|&l| (l - peak).exp()).sum();
    peak + sum.ln()
}

/// `log ⟨Φ|ρ_E|Φ⟩`: the probability weight of the product state on the
/// measured set `E`, before normalization over outcomes. Requires `E` and
/// its complement connected; when `E` is the whole lattice this is the pure
/// overlap squared.
///
/// Evaluates `Z(G_E ⊔ G_E*) / (2^{|∂E|-1} |Z(E)|)`. Boundary vertices that
/// the gluing face cannot reach contribute their syndrome bits as an
/// explicit sum: each bit pins a mirrored defect pair on the two copies, and
/// the per-assignment partition magnitudes are combined in log space. The
/// sum is exponential only in the number of such vertices, which is zero
/// whenever the unmeasured region borders a single face of `G_E`.
pub fn partial_overlap(lat: &Lattice, set: &EdgeSet, phi: &ProductState) -> Result<LogMagnitude> {
    if set.is_zero() {
        return Err(Error::EmptyEdgeSet);
    }
    let complement = set.complement();
    if complement.is_zero() {
        let gamma = overlap_abs(lat, set, phi)?;
        return Ok(gamma * gamma);
    }
    if !lat.is_connected(set) || !lat.is_connected(&complement) {
        return Err(Error::Disconnected);
    }
    let (sub, free_log) = weighted_subgraph(lat, set, phi)?;
    let edges: Vec<(usize, usize)> = sub.graph.alive_edges().map(|(_, a, b)| (a, b)).collect();
    let dim = gf2::cycle_space_dim(sub.graph.vertex_slots(), &edges);
    let boundary = lat.boundary_vertices(set).count_ones();
    debug_assert!(boundary >= 2);

    let (doubled, rogue) = double_graph(lat, set, &sub)?;
    debug_assert!(doubled.validate_embedding().is_ok());
    if rogue.len() > MAX_ROGUE_VERTICES {
        return Err(Error::ResourceGuard(
            "glue boundary spreads over too many faces",
        ));
    }
    let z_glued = if rogue.is_empty() {
        cycle_sum_magnitude(doubled)?.ln()
    } else {
        let mut logs = Vec::with_capacity(1 << rogue.len());
        for syndrome in 0u32..1 << rogue.len() {
            let mut term = doubled.clone();
            for (bit, &(v, v_copy)) in rogue.iter().enumerate() {
                if syndrome >> bit & 1 != 0 {
                    term.set_defect(v, true);
                    term.set_defect(v_copy, true);
                }
            }
            logs.push(cycle_sum_magnitude(term)?.ln());
        }
        log_sum_exp(&logs)
    };

    let norm = (boundary as f64 - 1.0 + dim as f64) * LN_2;
    Ok(LogMagnitude::from_ln(2.0 * free_log - norm + z_glued))
}
