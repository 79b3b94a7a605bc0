//! Bit-packed linear algebra over GF(2).
//!
//! Carries the boundary operator between 1-chains (bit vectors over edges)
//! and 0-chains (bit vectors over vertices). Cycle spaces are kernels of the
//! boundary map; their dimensions come from exact Gaussian elimination on
//! word-packed rows. `solve_boundary` produces a representative preimage of a
//! 0-chain by pairing odd vertices along spanning-forest paths, which is the
//! constructive argument behind the even-syndrome characterization.

use crate::{Error, Result};
use alloc::vec;
use alloc::vec::Vec;

/// A 1-chain over edges: bit `e` is the coefficient of edge `e`.
pub type Chain = BitVec;

/// A 0-chain over vertices: bit `s` is the coefficient of vertex `s`.
pub type ZeroChain = BitVec;

/// Fixed-length vector over GF(2), packed 64 bits per word.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct BitVec {
    len: usize,
    words: Vec<u64>,
}

impl BitVec {
    pub fn zeros(len: usize) -> Self {
        BitVec {
            len,
            words: vec![0; len.div_ceil(64)],
        }
    }

    pub fn from_indices(len: usize, indices: &[usize]) -> Self {
        let mut v = BitVec::zeros(len);
        for &i in indices {
            v.set(i, true);
        }
        v
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        self.words[i / 64] >> (i % 64) & 1 != 0
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        debug_assert!(i < self.len);
        let mask = 1u64 << (i % 64);
        if value {
            self.words[i / 64] |= mask;
        } else {
            self.words[i / 64] &= !mask;
        }
    }

    #[inline]
    pub fn toggle(&mut self, i: usize) {
        debug_assert!(i < self.len);
        self.words[i / 64] ^= 1 << (i % 64);
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn xor_assign(&mut self, other: &BitVec) {
        debug_assert_eq!(self.len, other.len);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    /// Complement within the fixed length.
    pub fn complement(&self) -> BitVec {
        let mut v = self.clone();
        for w in &mut v.words {
            *w = !*w;
        }
        v.clear_tail();
        v
    }

    pub fn intersects(&self, other: &BitVec) -> bool {
        self.words.iter().zip(&other.words).any(|(a, b)| a & b != 0)
    }

    /// Indices of set bits, ascending.
    pub fn iter_ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            core::iter::from_fn(move || {
                if w == 0 {
                    None
                } else {
                    let b = w.trailing_zeros() as usize;
                    w &= w - 1;
                    Some(wi * 64 + b)
                }
            })
        })
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    fn clear_tail(&mut self) {
        let used = self.len % 64;
        if used != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << used) - 1;
            }
        }
    }
}

impl core::fmt::Debug for BitVec {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "BitVec[{}]{{", self.len)?;
        for (k, i) in self.iter_ones().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{i}")?;
        }
        write!(f, "}}")
    }
}

/// Dense GF(2) matrix with word-packed rows.
#[derive(Clone, Debug)]
pub struct BitMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BitVec>,
}

impl BitMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        BitMatrix {
            rows,
            cols,
            data: vec![BitVec::zeros(cols); rows],
        }
    }

    pub fn from_rows(rows: Vec<BitVec>, cols: usize) -> Self {
        debug_assert!(rows.iter().all(|r| r.len() == cols));
        BitMatrix {
            rows: rows.len(),
            cols,
            data: rows,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> bool {
        self.data[r].get(c)
    }

    pub fn set(&mut self, r: usize, c: usize, value: bool) {
        self.data[r].set(c, value);
    }

    pub fn rank(&self) -> usize {
        self.clone().echelonize().len()
    }

    /// In-place row echelon form; returns the pivot columns.
    pub fn echelonize(&mut self) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..self.cols {
            if row == self.rows {
                break;
            }
            let Some(p) = (row..self.rows).find(|&r| self.data[r].get(col)) else {
                continue;
            };
            self.data.swap(row, p);
            let pivot_row = self.data[row].clone();
            for (r, other) in self.data.iter_mut().enumerate() {
                if r != row && other.get(col) {
                    other.xor_assign(&pivot_row);
                }
            }
            pivots.push(col);
            row += 1;
        }
        pivots
    }

    /// Basis of the kernel `{x : Ax = 0}` (x over columns).
    pub fn kernel_basis(&self) -> Vec<BitVec> {
        let mut m = self.clone();
        let pivots = m.echelonize();
        let mut is_pivot = vec![false; self.cols];
        for &c in &pivots {
            is_pivot[c] = true;
        }
        let mut basis = Vec::new();
        for free in (0..self.cols).filter(|&c| !is_pivot[c]) {
            let mut v = BitVec::zeros(self.cols);
            v.set(free, true);
            for (r, &pc) in pivots.iter().enumerate() {
                if m.data[r].get(free) {
                    v.set(pc, true);
                }
            }
            basis.push(v);
        }
        basis
    }
}

/// Rank of the span of a family of vectors.
pub fn span_rank(vectors: &[BitVec], len: usize) -> usize {
    BitMatrix::from_rows(vectors.to_vec(), len).rank()
}

/// Boundary of a 1-chain: parity of occupied edges incident to each vertex.
/// Self-loops contribute twice and therefore never show up.
pub fn boundary(n_vertices: usize, edges: &[(usize, usize)], chain: &Chain) -> ZeroChain {
    debug_assert_eq!(chain.len(), edges.len());
    let mut u = BitVec::zeros(n_vertices);
    for e in chain.iter_ones() {
        let (a, b) = edges[e];
        u.toggle(a);
        u.toggle(b);
    }
    u
}

/// Boundary matrix with one row per vertex and one column per edge.
pub fn boundary_matrix(n_vertices: usize, edges: &[(usize, usize)]) -> BitMatrix {
    let mut m = BitMatrix::zeros(n_vertices, edges.len());
    for (e, &(a, b)) in edges.iter().enumerate() {
        if a != b {
            m.set(a, e, true);
            m.set(b, e, true);
        }
    }
    m
}

/// Dimension of the cycle space `ker ∂`; the number of 1-cycles is `2^dim`.
pub fn cycle_space_dim(n_vertices: usize, edges: &[(usize, usize)]) -> usize {
    edges.len() - boundary_matrix(n_vertices, edges).rank()
}

/// Any 1-chain `z` with `∂z = target`, or `None` when `target` has odd weight
/// on some connected component.
///
/// Odd vertices are paired through spanning-forest paths: xoring the
/// root-paths of all odd vertices of a component yields a preimage exactly
/// when their number is even.
pub fn solve_boundary(
    n_vertices: usize,
    edges: &[(usize, usize)],
    target: &ZeroChain,
) -> Option<Chain> {
    debug_assert_eq!(target.len(), n_vertices);
    let mut adjacency = vec![Vec::new(); n_vertices];
    for (e, &(a, b)) in edges.iter().enumerate() {
        if a != b {
            adjacency[a].push((e, b));
            adjacency[b].push((e, a));
        }
    }

    // parent_edge[v] = edge to the BFS parent; roots keep usize::MAX.
    let mut parent_edge = vec![usize::MAX; n_vertices];
    let mut parent = vec![usize::MAX; n_vertices];
    let mut component = vec![usize::MAX; n_vertices];
    let mut n_components = 0;
    let mut queue = Vec::new();
    for start in 0..n_vertices {
        if component[start] != usize::MAX {
            continue;
        }
        let c = n_components;
        n_components += 1;
        component[start] = c;
        queue.clear();
        queue.push(start);
        let mut head = 0;
        while head < queue.len() {
            let v = queue[head];
            head += 1;
            for &(e, w) in &adjacency[v] {
                if component[w] == usize::MAX {
                    component[w] = c;
                    parent[w] = v;
                    parent_edge[w] = e;
                    queue.push(w);
                }
            }
        }
    }

    let mut odd_per_component = vec![0usize; n_components];
    for s in target.iter_ones() {
        odd_per_component[component[s]] += 1;
    }
    if odd_per_component.iter().any(|&k| k % 2 != 0) {
        return None;
    }

    let mut z = BitVec::zeros(edges.len());
    for s in target.iter_ones() {
        let mut v = s;
        while parent_edge[v] != usize::MAX {
            z.toggle(parent_edge[v]);
            v = parent[v];
        }
    }
    Some(z)
}

/// Guard used by operations that take caller-supplied chains.
pub fn check_chain_len(chain: &BitVec, expected: usize) -> Result<()> {
    if chain.len() == expected {
        Ok(())
    } else {
        Err(Error::StateDomain)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // 4-cycle: vertices 0-1-2-3, edges (0,1),(1,2),(2,3),(3,0).
    fn square() -> Vec<(usize, usize)> {
        vec![(0, 1), (1, 2), (2, 3), (3, 0)]
    }

    #[test]
    fn boundary_of_zero_chain_is_zero() {
        let edges = square();
        let u = boundary(4, &edges, &BitVec::zeros(4));
        assert!(u.is_zero());
    }

    #[test]
    fn boundary_of_single_edge_is_its_endpoints() {
        let edges = square();
        let x = BitVec::from_indices(4, &[1]);
        let u = boundary(4, &edges, &x);
        assert_eq!(u, BitVec::from_indices(4, &[1, 2]));
    }

    #[test]
    fn boundary_of_full_square_is_zero() {
        let edges = square();
        let x = BitVec::from_indices(4, &[0, 1, 2, 3]);
        assert!(boundary(4, &edges, &x).is_zero());
    }

    #[test]
    fn cycle_dim_of_square_is_one() {
        // Independent count: of the 16 chains on C4 exactly 2 are cycles.
        let edges = square();
        let mut cycles = 0;
        for bits in 0u32..16 {
            let x = BitVec::from_indices(4, &(0..4).filter(|&e| bits >> e & 1 != 0).collect::<Vec<_>>());
            if boundary(4, &edges, &x).is_zero() {
                cycles += 1;
            }
        }
        assert_eq!(cycles, 2);
        assert_eq!(cycle_space_dim(4, &edges), 1);
    }

    #[test]
    fn cycle_dim_of_single_edge_is_zero() {
        assert_eq!(cycle_space_dim(2, &[(0, 1)]), 0);
    }

    #[test]
    fn solve_boundary_zero_target() {
        let edges = square();
        let z = solve_boundary(4, &edges, &BitVec::zeros(4)).unwrap();
        assert!(z.is_zero());
    }

    #[test]
    fn solve_boundary_edge_endpoints() {
        let edges = square();
        let u = BitVec::from_indices(4, &[1, 2]);
        let z = solve_boundary(4, &edges, &u).unwrap();
        assert_eq!(boundary(4, &edges, &z), u);
    }

    #[test]
    fn solve_boundary_single_vertex_has_no_solution() {
        let edges = square();
        let u = BitVec::from_indices(4, &[2]);
        assert!(solve_boundary(4, &edges, &u).is_none());
    }

    #[test]
    fn solve_boundary_respects_components() {
        // Two disjoint edges; one odd vertex in each component.
        let edges = vec![(0, 1), (2, 3)];
        assert!(solve_boundary(4, &edges, &BitVec::from_indices(4, &[0, 2])).is_none());
        let u = BitVec::from_indices(4, &[0, 1]);
        let z = solve_boundary(4, &edges, &u).unwrap();
        assert_eq!(boundary(4, &edges, &z), u);
    }

    #[test]
    fn kernel_basis_spans_kernel() {
        let edges = square();
        let m = boundary_matrix(4, &edges);
        let basis = m.kernel_basis();
        assert_eq!(basis.len(), 1);
        assert!(boundary(4, &edges, &basis[0]).is_zero());
        assert!(!basis[0].is_zero());
    }

    #[test]
    fn rank_of_identity() {
        let mut m = BitMatrix::zeros(5, 5);
        for i in 0..5 {
            m.set(i, i, true);
        }
        assert_eq!(m.rank(), 5);
    }

    #[test]
    fn iter_ones_crosses_word_boundaries() {
        let v = BitVec::from_indices(130, &[0, 63, 64, 129]);
        assert_eq!(v.iter_ones().collect::<Vec<_>>(), vec![0, 63, 64, 129]);
        assert_eq!(v.count_ones(), 4);
        assert_eq!(v.complement().count_ones(), 126);
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(200))]

        #[test]
        fn boundary_is_linear(xa in proptest::collection::vec(proptest::bool::ANY, 12),
                              xb in proptest::collection::vec(proptest::bool::ANY, 12)) {
            // L=2-sized random graph: 6 vertices, 12 random edges.
            let edges: Vec<(usize, usize)> = (0..12).map(|e| (e % 6, (e * 5 + 1) % 6)).collect();
            let mut a = BitVec::zeros(12);
            let mut b = BitVec::zeros(12);
            for i in 0..12 {
                a.set(i, xa[i]);
                b.set(i, xb[i]);
            }
            let mut sum = a.clone();
            sum.xor_assign(&b);
            let mut lhs = boundary(6, &edges, &a);
            lhs.xor_assign(&boundary(6, &edges, &b));
            proptest::prop_assert_eq!(boundary(6, &edges, &sum), lhs);
        }
    }
}
