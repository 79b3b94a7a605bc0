//! Brute-force reference implementations for small lattices.
//!
//! Everything here works by explicit enumeration — of the `2^{L²}` cycles of
//! the lattice, of chains of small graphs, of perfect matchings — and never
//! touches the matching pipeline. The acceptance suite compares the fast
//! path against these. Resource guards are hard errors so CI stays
//! deterministic.

use crate::codestate::ProductState;
use crate::gf2::{self, BitVec};
use crate::lattice::{EdgeSet, Lattice};
use crate::planar_reduce::{Complex64, EdgeWeight, MatchingGraph, WeightedPlanarGraph};
use crate::{Error, Result};
use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;
use num_traits::Float;

/// All 1-cycles of the lattice, as chains over the flat edge index.
#[derive(Clone, Debug)]
pub struct CycleList {
    lattice_size: usize,
    cycles: Vec<BitVec>,
}

impl CycleList {
    pub fn len(&self) -> usize {
        self.cycles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cycles.is_empty()
    }

    pub fn lattice_size(&self) -> usize {
        self.lattice_size
    }

    pub fn iter(&self) -> impl Iterator<Item = &BitVec> {
        self.cycles.iter()
    }

    pub fn get(&self, i: usize) -> &BitVec {
        &self.cycles[i]
    }

    /// Test hook: drop one chain to break closure.
    pub fn corrupted(mut self) -> Self {
        self.cycles.pop();
        self
    }
}

/// Enumerates the span of the plaquette boundary chains by a Gray walk.
/// Guarded to `L ≤ 4` (`2^16` cycles).
pub fn enumerate_cycles(lat: &Lattice) -> Result<CycleList> {
    if lat.size() > 4 {
        return Err(Error::ResourceGuard("cycle enumeration is limited to L <= 4"));
    }
    let n2 = lat.n_plaquettes();
    let mut cycles = Vec::with_capacity(1 << n2);
    let mut current = BitVec::zeros(lat.n_edges());
    cycles.push(current.clone());
    for i in 1u32..1 << n2 {
        let p = i.trailing_zeros() as usize;
        current.xor_assign(&lat.plaquette_chain(p));
        cycles.push(current.clone());
    }
    Ok(CycleList {
        lattice_size: lat.size(),
        cycles,
    })
}

/// `⟨G|Φ⟩ = |Z|^{-1/2} Σ_{x∈Z} ∏_e amp(φ_e, x_e)` by direct summation.
/// The product state must cover every edge. Guarded to `L ≤ 4`.
pub fn oracle_overlap(lat: &Lattice, phi: &ProductState) -> Result<Complex64> {
    if !phi.covers(&lat.full_edge_set()) {
        return Err(Error::StateDomain);
    }
    let cycles = enumerate_cycles(lat)?;
    let mut total = Complex64::new(0.0, 0.0);
    for x in cycles.iter() {
        let mut term = Complex64::new(1.0, 0.0);
        for e in 0..lat.n_edges() {
            term *= phi.get(e).expect("covered").amplitude(x.get(e));
        }
        total += term;
    }
    let norm = (cycles.len() as f64).sqrt();
    Ok(total / norm)
}

/// `⟨Φ|ρ_E|Φ⟩` by grouping cycles over their restriction to the unmeasured
/// edges: `|Z|^{-1} Σ_classes |Σ_{x in class} ∏_{e∈E} amp(φ_e, x_e)|²`.
/// No connectivity assumption. Guarded to `L ≤ 3`.
pub fn oracle_partial(lat: &Lattice, set: &EdgeSet, phi: &ProductState) -> Result<f64> {
    if lat.size() > 3 {
        return Err(Error::ResourceGuard("partial-trace oracle is limited to L <= 3"));
    }
    if set.is_zero() {
        return Err(Error::EmptyEdgeSet);
    }
    if !phi.covers(set) {
        return Err(Error::StateDomain);
    }
    let cycles = enumerate_cycles(lat)?;
    let mut classes: alloc::collections::BTreeMap<Vec<u64>, Complex64> =
        alloc::collections::BTreeMap::new();
    for x in cycles.iter() {
        let key: Vec<u64> = x
            .words()
            .iter()
            .zip(set.words())
            .map(|(xw, sw)| xw & !sw)
            .collect();
        let mut term = Complex64::new(1.0, 0.0);
        for e in set.iter_ones() {
            term *= phi.get(e).expect("covered").amplitude(x.get(e));
        }
        *classes.entry(key).or_insert(Complex64::new(0.0, 0.0)) += term;
    }
    let total: f64 = classes.values().map(|z| z.norm_sqr()).sum();
    Ok(total / cycles.len() as f64)
}

/// Verifies the stabilizer equations on the enumerated state: every cycle
/// has even incidence everywhere (Z-type generators act as +1) and adding
/// any plaquette boundary permutes the cycle set (X-type generators act as
/// +1). Guarded to `L ≤ 3`.
pub fn check_stabilizers(lat: &Lattice) -> Result<bool> {
    if lat.size() > 3 {
        return Err(Error::ResourceGuard("stabilizer check is limited to L <= 3"));
    }
    let cycles = enumerate_cycles(lat)?;
    Ok(stabilizers_hold(lat, &cycles))
}

/// The checkable core of [`check_stabilizers`], usable on a corrupted list.
pub fn stabilizers_hold(lat: &Lattice, cycles: &CycleList) -> bool {
    if cycles.len() != 1 << lat.n_plaquettes() {
        return false;
    }
    let edges: Vec<(usize, usize)> = (0..lat.n_edges()).map(|e| lat.endpoints(e)).collect();
    for x in cycles.iter() {
        if !gf2::boundary(lat.n_vertices(), &edges, x).is_zero() {
            return false;
        }
    }
    let index: BTreeSet<&BitVec> = cycles.iter().collect();
    for p in 0..lat.n_plaquettes() {
        let chain = lat.plaquette_chain(p);
        for x in cycles.iter() {
            let mut shifted = x.clone();
            shifted.xor_assign(&chain);
            if !index.contains(&shifted) {
                return false;
            }
        }
    }
    true
}

/// Brute-force weighted chain sum of a graph, honoring forced edges and the
/// defect set: sums `∏ scale · ∏_{x_e=1} w_e` over chains whose boundary
/// equals the defects. Exponential in the free edge count (capped at 26);
/// the independent route backing the reduction pipeline. Excludes the
/// graph's prefactor.
pub fn brute_cycle_sum(g: &WeightedPlanarGraph) -> Complex64 {
    let mut free: Vec<(usize, usize, Complex64)> = Vec::new();
    let mut scale = Complex64::new(1.0, 0.0);
    let n = g.vertex_slots();
    let mut base_boundary = BitVec::zeros(n);
    for (e, a, b) in g.alive_edges() {
        match g.edge_weight(e) {
            EdgeWeight::Free(w) => free.push((a, b, w)),
            EdgeWeight::Forced { value, scale: s } => {
                scale *= s;
                if value && a != b {
                    base_boundary.toggle(a);
                    base_boundary.toggle(b);
                }
            }
        }
    }
    assert!(free.len() <= 26, "brute-force chain sum is exponential");
    let mut target = BitVec::zeros(n);
    for v in 0..n {
        if g.is_vertex_alive(v) && g.is_defect(v) {
            target.set(v, true);
        }
    }
    target.xor_assign(&base_boundary);

    let mut total = Complex64::new(0.0, 0.0);
    for mask in 0u64..1 << free.len() {
        let mut boundary = BitVec::zeros(n);
        let mut term = Complex64::new(1.0, 0.0);
        for (i, &(a, b, w)) in free.iter().enumerate() {
            if mask >> i & 1 != 0 {
                term *= w;
                if a != b {
                    boundary.toggle(a);
                    boundary.toggle(b);
                }
            }
        }
        if boundary == target {
            total += term;
        }
    }
    scale * total
}

/// Brute-force perfect-matching generating function by recursive cover of
/// the lowest uncovered vertex. Excludes the prefactor.
pub fn brute_matching_sum(mg: &MatchingGraph) -> Complex64 {
    let g = mg.graph();
    let n = mg.n_vertices();
    assert!(n <= 64, "brute-force matching sum is exponential");
    let mut adjacency = vec![Vec::new(); n];
    for (e, a, b) in g.alive_edges() {
        if a != b {
            adjacency[a].push((b, mg.free_weight(e)));
            adjacency[b].push((a, mg.free_weight(e)));
        }
    }
    let mut covered = vec![false; n];
    fn recurse(
        adjacency: &[Vec<(usize, Complex64)>],
        covered: &mut [bool],
        from: usize,
    ) -> Complex64 {
        let Some(v) = (from..covered.len()).find(|&v| !covered[v]) else {
            return Complex64::new(1.0, 0.0);
        };
        let mut total = Complex64::new(0.0, 0.0);
        covered[v] = true;
        for &(w, weight) in &adjacency[v] {
            if covered[w] {
                continue;
            }
            covered[w] = true;
            total += weight * recurse(adjacency, covered, v + 1);
            covered[w] = false;
        }
        covered[v] = false;
        total
    }
    recurse(&adjacency, &mut covered, 0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codestate::{MeasurementBasis, QubitState};
    use core::f64::consts::LN_2;

    #[test]
    fn l1_has_two_cycles() {
        let lat = Lattice::new(1).unwrap();
        let cycles = enumerate_cycles(&lat).unwrap();
        assert_eq!(cycles.len(), 2);
        assert!(cycles.iter().any(|x| x.is_zero()));
        assert!(cycles.iter().any(|x| x.count_ones() == 4));
    }

    #[test]
    fn cycle_counts_follow_two_to_the_plaquettes() {
        for l in 1..=3 {
            let lat = Lattice::new(l).unwrap();
            let cycles = enumerate_cycles(&lat).unwrap();
            assert_eq!(cycles.len(), 1 << (l * l));
        }
    }

    #[test]
    fn every_cycle_has_zero_boundary() {
        let lat = Lattice::new(2).unwrap();
        let edges: Vec<(usize, usize)> = (0..lat.n_edges()).map(|e| lat.endpoints(e)).collect();
        for x in enumerate_cycles(&lat).unwrap().iter() {
            assert!(gf2::boundary(lat.n_vertices(), &edges, x).is_zero());
        }
    }

    #[test]
    fn resource_guard_fires() {
        let lat = Lattice::new(5).unwrap();
        assert!(matches!(
            enumerate_cycles(&lat).unwrap_err(),
            Error::ResourceGuard(_)
        ));
        assert!(matches!(
            check_stabilizers(&Lattice::new(4).unwrap()).unwrap_err(),
            Error::ResourceGuard(_)
        ));
    }

    #[test]
    fn stabilizers_hold_on_small_lattices() {
        for l in 1..=2 {
            assert!(check_stabilizers(&Lattice::new(l).unwrap()).unwrap(), "L={l}");
        }
    }

    #[test]
    fn corrupted_cycle_list_fails_stabilizers() {
        let lat = Lattice::new(2).unwrap();
        let cycles = enumerate_cycles(&lat).unwrap().corrupted();
        assert!(!stabilizers_hold(&lat, &cycles));
    }

    #[test]
    fn overlap_examples() {
        let lat = Lattice::new(2).unwrap();
        let zeros = ProductState::uniform(&lat, QubitState::zero());
        let got = oracle_overlap(&lat, &zeros).unwrap();
        assert!((got.norm().ln() - (-0.5 * 4.0 * LN_2)).abs() < 1e-12);

        let plus = ProductState::uniform(&lat, QubitState::plus());
        let got = oracle_overlap(&lat, &plus).unwrap();
        let expect = 0.5 * (lat.n_plaquettes() as f64 - lat.n_edges() as f64) * LN_2;
        assert!((got.norm().ln() - expect).abs() < 1e-12);

        let mut single = ProductState::uniform(&lat, QubitState::zero());
        single.set(2, QubitState::one());
        assert!(oracle_overlap(&lat, &single).unwrap().norm() < 1e-15);
    }

    #[test]
    fn partial_of_full_set_is_overlap_squared() {
        let lat = Lattice::new(2).unwrap();
        let mut phi = ProductState::new(&lat);
        for e in 0..lat.n_edges() {
            let basis = MeasurementBasis::new(0.3 + 0.1 * e as f64, 0.7 * e as f64);
            phi.set(e, basis.state((e % 2) as u8));
        }
        let full = lat.full_edge_set();
        let partial = oracle_partial(&lat, &full, &phi).unwrap();
        let gamma = oracle_overlap(&lat, &phi).unwrap().norm();
        assert!((partial - gamma * gamma).abs() < 1e-12);
    }

    #[test]
    fn partial_of_single_edge_is_half() {
        let lat = Lattice::new(2).unwrap();
        for e in [0usize, 4, 9] {
            let set = BitVec::from_indices(lat.n_edges(), &[e]);
            let mut phi = ProductState::new(&lat);
            phi.set(e, MeasurementBasis::new(0.9, 1.7).state(1));
            let p = oracle_partial(&lat, &set, &phi).unwrap();
            assert!((p - 0.5).abs() < 1e-12, "edge {e}");
        }
    }

    #[test]
    fn marginalization_is_exact() {
        let lat = Lattice::new(2).unwrap();
        let small = BitVec::from_indices(lat.n_edges(), &[0, 1, 6]);
        let extra = 7usize;
        let mut big = small.clone();
        big.set(extra, true);
        let mut phi = ProductState::new(&lat);
        for (i, e) in small.iter_ones().enumerate() {
            phi.set(e, MeasurementBasis::new(0.4 + i as f64, 1.1 * i as f64).state(0));
        }
        let base = oracle_partial(&lat, &small, &phi).unwrap();
        let basis = MeasurementBasis::new(2.2, 0.5);
        let mut total = 0.0;
        for outcome in 0..2u8 {
            phi.set(extra, basis.state(outcome));
            total += oracle_partial(&lat, &big, &phi).unwrap();
        }
        assert!((total - base).abs() < 1e-12);
    }

    #[test]
    fn brute_matching_sum_counts_dimers() {
        // 2x2 grid graph (a 4-cycle) has two perfect matchings.
        let mut g = WeightedPlanarGraph::new(4);
        for i in 0..4 {
            g.add_edge(i, (i + 1) % 4, EdgeWeight::Free(Complex64::new(1.0, 0.0)));
        }
        let mg = MatchingGraph::new(g).unwrap();
        assert_eq!(brute_matching_sum(&mg), Complex64::new(2.0, 0.0));
    }
}
