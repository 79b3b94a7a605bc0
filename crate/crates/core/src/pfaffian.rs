//! Kasteleyn orientation of planar matching graphs and numerically robust
//! Pfaffian magnitudes.
//!
//! An orientation is Pfaffian when every face except one per component has
//! an odd number of edges directed against the face walk. With such an
//! orientation the signed adjacency matrix `B^w` satisfies
//! `|Pf(B^w)| = |Σ_matchings ∏ w|`, and `Pf(X)² = det(X)` turns the matching
//! sum into a determinant. Only magnitudes are ever produced: all consumers
//! are probabilities, so the sign branch of the square root never matters.
//!
//! The determinant is evaluated by complex LU with partial pivoting,
//! accumulating `log|pivot|` so that weights like `tan(θ/2)` near basis
//! poles cannot overflow. Vertices are pre-ordered by reverse Cuthill-McKee;
//! the elimination skips the structural zero blocks outside the band, which
//! keeps desk-scale doubled lattices fast while storage stays dense.

use crate::planar_reduce::{
    expand_to_matching, preprocess_weights, reduce_degrees, shift_defects, Complex64, HalfEdge,
    MatchingGraph, WeightedPlanarGraph,
};
use crate::{Error, Result};
use alloc::vec;
use alloc::vec::Vec;
use num_traits::Float;

/// Logarithm of a nonnegative real; `-∞` encodes zero. Multiplication of
/// magnitudes is addition of logs.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct LogMagnitude(f64);

impl LogMagnitude {
    pub const fn zero() -> Self {
        LogMagnitude(f64::NEG_INFINITY)
    }

    pub const fn one() -> Self {
        LogMagnitude(0.0)
    }

    pub const fn from_ln(ln: f64) -> Self {
        LogMagnitude(ln)
    }

    /// From a linear-scale nonnegative value.
    pub fn from_value(value: f64) -> Self {
        debug_assert!(value >= 0.0);
        LogMagnitude(value.ln())
    }

    pub fn ln(self) -> f64 {
        self.0
    }

    pub fn value(self) -> f64 {
        self.0.exp()
    }

    pub fn is_zero(self) -> bool {
        self.0 == f64::NEG_INFINITY
    }
}

impl core::ops::Mul for LogMagnitude {
    type Output = LogMagnitude;
    fn mul(self, rhs: LogMagnitude) -> LogMagnitude {
        if self.is_zero() || rhs.is_zero() {
            return LogMagnitude::zero();
        }
        LogMagnitude(self.0 + rhs.0)
    }
}

impl core::ops::MulAssign for LogMagnitude {
    fn mul_assign(&mut self, rhs: LogMagnitude) {
        *self = *self * rhs;
    }
}

/// Antisymmetric sign-and-weight pattern of a Kasteleyn-oriented matching
/// graph: entry `(s, t, w)` stands for `B^w_{s,t} = w`, `B^w_{t,s} = -w`.
#[derive(Clone, Debug)]
pub struct KasteleynMatrix {
    n: usize,
    entries: Vec<(u32, u32, Complex64)>,
    /// Per matching-graph edge: the endpoint index the edge is directed from.
    orientation: Vec<u8>,
}

impl KasteleynMatrix {
    /// Directly from oriented weighted edges; rows and columns are not
    /// reordered. Meant for tests against dense antisymmetric matrices.
    pub fn from_oriented_edges(n: usize, entries: Vec<(u32, u32, Complex64)>) -> Self {
        KasteleynMatrix {
            n,
            entries,
            orientation: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// The orientation produced by [`kasteleyn_orient`], indexed by the
    /// matching graph's edge ids.
    pub fn orientation(&self) -> &[u8] {
        &self.orientation
    }
}

/// Finds a Pfaffian orientation by the spanning-tree construction: tree
/// edges are oriented arbitrarily, and the remaining edges — which form a
/// spanning tree of the dual — are fixed leaf-to-root so that each face
/// reaches odd parity. Rows and columns of the returned matrix are permuted
/// by reverse Cuthill-McKee to shrink the elimination band; a symmetric
/// permutation only flips the sign of the Pfaffian.
pub fn kasteleyn_orient(mg: &MatchingGraph) -> Result<KasteleynMatrix> {
    let g = mg.graph();
    let n = mg.n_vertices();
    let n_edges = mg.n_edges();
    let faces = g.faces();

    let mut adjacency = vec![Vec::new(); n];
    for (e, a, b) in g.alive_edges() {
        adjacency[a].push((e, b));
        adjacency[b].push((e, a));
    }

    // Spanning forest; tree edges get a fixed arbitrary direction.
    let mut in_tree = vec![false; n_edges];
    let mut visited = vec![false; n];
    let mut component_seed_edge = Vec::new();
    let mut queue = Vec::new();
    for start in 0..n {
        if visited[start] {
            continue;
        }
        visited[start] = true;
        queue.clear();
        queue.push(start);
        let mut head = 0;
        let mut seed = usize::MAX;
        while head < queue.len() {
            let v = queue[head];
            head += 1;
            for &(e, w) in &adjacency[v] {
                if seed == usize::MAX {
                    seed = e;
                }
                if !visited[w] {
                    visited[w] = true;
                    in_tree[e] = true;
                    queue.push(w);
                }
            }
        }
        if seed != usize::MAX {
            component_seed_edge.push(seed);
        }
    }

    const UNSET: u8 = u8::MAX;
    let mut orientation = vec![UNSET; n_edges];
    for e in 0..n_edges {
        if in_tree[e] {
            orientation[e] = 0;
        }
    }

    // Dual adjacency through non-tree edges only; by interdigitation this
    // is a spanning tree of the faces of each component.
    let n_faces = faces.orbits.len();
    let mut dual = vec![Vec::new(); n_faces];
    for e in 0..n_edges {
        if in_tree[e] {
            continue;
        }
        let f0 = faces.face_of(HalfEdge { edge: e, end: 0 });
        let f1 = faces.face_of(HalfEdge { edge: e, end: 1 });
        dual[f0].push((e, f1));
        dual[f1].push((e, f0));
    }

    let mut parent_edge = vec![usize::MAX; n_faces];
    let mut seen_face = vec![false; n_faces];
    let mut bfs_order = Vec::with_capacity(n_faces);
    for &seed in &component_seed_edge {
        let root = faces.face_of(HalfEdge { edge: seed, end: 0 });
        if seen_face[root] {
            continue;
        }
        seen_face[root] = true;
        let mut head = bfs_order.len();
        bfs_order.push(root);
        while head < bfs_order.len() {
            let f = bfs_order[head];
            head += 1;
            for &(e, f2) in &dual[f] {
                if !seen_face[f2] {
                    seen_face[f2] = true;
                    parent_edge[f2] = e;
                    bfs_order.push(f2);
                }
            }
        }
    }
    if !seen_face.iter().all(|&s| s) {
        return Err(Error::Embedding("dual face walk did not close"));
    }

    // Leaf to root: every face except the roots gets odd disagreement.
    for &f in bfs_order.iter().rev() {
        let pe = parent_edge[f];
        if pe == usize::MAX {
            continue;
        }
        let mut disagree = 0usize;
        let mut pe_end = UNSET;
        for h in &faces.orbits[f] {
            if h.edge == pe {
                pe_end = h.end;
                continue;
            }
            debug_assert_ne!(orientation[h.edge], UNSET);
            // Arrival at ends[end] means the walk runs ends[1-end] -> ends[end].
            if orientation[h.edge] == h.end {
                disagree += 1;
            }
        }
        debug_assert_ne!(pe_end, UNSET);
        orientation[pe] = if disagree % 2 == 0 { pe_end } else { 1 - pe_end };
    }

    let perm = reverse_cuthill_mckee(n, &adjacency);
    let mut entries = Vec::with_capacity(n_edges);
    for (e, a, b) in g.alive_edges() {
        let (from, to) = if orientation[e] == 0 { (a, b) } else { (b, a) };
        entries.push((perm[from] as u32, perm[to] as u32, mg.free_weight(e)));
    }
    Ok(KasteleynMatrix {
        n,
        entries,
        orientation,
    })
}

/// True when at most one face per component has an even count of edges
/// directed against its walk — the Pfaffian orientation condition with one
/// exempt (outer) face.
pub fn orientation_satisfies_face_condition(mg: &MatchingGraph, orientation: &[u8]) -> bool {
    let g = mg.graph();
    let faces = g.faces();
    let (n_comp, comp) = g.components();
    let mut even_faces = vec![0usize; n_comp];
    for orbit in &faces.orbits {
        let mut disagree = 0usize;
        for h in orbit {
            if orientation[h.edge] == h.end {
                disagree += 1;
            }
        }
        if disagree % 2 == 0 {
            let v = g.edge_endpoints(orbit[0].edge).0;
            even_faces[comp[v]] += 1;
        }
    }
    even_faces.iter().all(|&k| k <= 1)
}

/// `|Pf(B^w)| = sqrt(|det(B^w)|)` by partial-pivoted LU in log scale.
/// Returns zero (log `-∞`) for singular matrices, which covers matching
/// graphs without any perfect matching.
pub fn abs_pfaffian(km: &KasteleynMatrix) -> LogMagnitude {
    let n = km.n;
    if n == 0 {
        return LogMagnitude::one();
    }
    let mut re = vec![0.0f64; n * n];
    let mut im = vec![0.0f64; n * n];
    let mut band = 0usize;
    let mut hi = vec![0usize; n];
    for i in 0..n {
        hi[i] = i;
    }
    for &(s, t, w) in &km.entries {
        let (s, t) = (s as usize, t as usize);
        re[s * n + t] += w.re;
        im[s * n + t] += w.im;
        re[t * n + s] -= w.re;
        im[t * n + s] -= w.im;
        band = band.max(s.abs_diff(t));
        hi[s] = hi[s].max(t);
        hi[t] = hi[t].max(s);
    }

    // Row equilibration, folded into the log accumulator.
    let mut log_det = 0.0f64;
    for i in 0..n {
        let row_max = (0..n)
            .map(|j| re[i * n + j].abs().max(im[i * n + j].abs()))
            .fold(0.0f64, f64::max);
        if row_max == 0.0 {
            return LogMagnitude::zero();
        }
        let inv = 1.0 / row_max;
        for j in 0..n {
            re[i * n + j] *= inv;
            im[i * n + j] *= inv;
        }
        log_det += row_max.ln();
    }

    let mut pivot_re: Vec<f64> = Vec::with_capacity(n);
    let mut pivot_im: Vec<f64> = Vec::with_capacity(n);
    for k in 0..n {
        // Column k is structurally zero below k + band: initial entries obey
        // the band, eliminations at step j only touch rows j+1..=j+band, and
        // pivot swaps stay inside that window.
        let window_end = (k + band).min(n - 1);
        let mut pivot_row = k;
        let mut pivot_mag = 0.0f64;
        for i in k..=window_end {
            let m = re[i * n + k] * re[i * n + k] + im[i * n + k] * im[i * n + k];
            if m > pivot_mag {
                pivot_mag = m;
                pivot_row = i;
            }
        }
        if pivot_mag == 0.0 {
            return LogMagnitude::zero();
        }
        if pivot_row != k {
            for j in k..n {
                re.swap(k * n + j, pivot_row * n + j);
                im.swap(k * n + j, pivot_row * n + j);
            }
            hi.swap(k, pivot_row);
        }
        log_det += 0.5 * pivot_mag.ln();

        // Normalize the pivot row so multipliers below are the raw column
        // entries; the determinant already banked the pivot.
        let inv = 1.0 / pivot_mag;
        let (ir, ii) = (re[k * n + k] * inv, -im[k * n + k] * inv);
        let row_end = hi[k];
        let width = row_end - k;
        pivot_re.clear();
        pivot_im.clear();
        for j in k + 1..=row_end {
            let (ar, ai) = (re[k * n + j], im[k * n + j]);
            pivot_re.push(ar * ir - ai * ii);
            pivot_im.push(ar * ii + ai * ir);
        }
        for i in k + 1..=window_end {
            let (mr, mi) = (re[i * n + k], im[i * n + k]);
            if mr == 0.0 && mi == 0.0 {
                continue;
            }
            let base = i * n + k + 1;
            let row_re = &mut re[base..base + width];
            for (r, &p) in row_re.iter_mut().zip(&pivot_re) {
                *r -= mr * p;
            }
            let row_re = &mut re[base..base + width];
            for (r, &p) in row_re.iter_mut().zip(&pivot_im) {
                *r += mi * p;
            }
            let row_im = &mut im[base..base + width];
            for (r, &p) in row_im.iter_mut().zip(&pivot_im) {
                *r -= mr * p;
            }
            let row_im = &mut im[base..base + width];
            for (r, &p) in row_im.iter_mut().zip(&pivot_re) {
                *r -= mi * p;
            }
            hi[i] = hi[i].max(row_end);
        }
    }

    LogMagnitude(0.5 * log_det)
}

/// Pipeline driver: weighted cycle sum of an arbitrary defect-carrying
/// planar graph, as a magnitude. Runs preprocessing, defect shifting, degree
/// reduction, matching expansion, orientation and the Pfaffian, including
/// the prefactor accumulated along the way. An odd defect count means the
/// sum is exactly zero.
pub fn cycle_sum_magnitude(g: WeightedPlanarGraph) -> Result<LogMagnitude> {
    g.validate_embedding()?;
    let g = preprocess_weights(g);
    let g = match shift_defects(g) {
        Ok(g) => g,
        Err(Error::OddDefect) => return Ok(LogMagnitude::zero()),
        Err(e) => return Err(e),
    };
    let g = reduce_degrees(g)?;
    let mg = expand_to_matching(&g)?;
    let km = kasteleyn_orient(&mg)?;
    let pf = abs_pfaffian(&km);
    Ok(LogMagnitude::from_ln(mg.graph().prefactor().log_magnitude) * pf)
}

fn reverse_cuthill_mckee(n: usize, adjacency: &[Vec<(usize, usize)>]) -> Vec<usize> {
    let degree = |v: usize| adjacency[v].len();
    let mut order = Vec::with_capacity(n);
    let mut visited = vec![false; n];
    let mut candidates: Vec<usize> = (0..n).collect();
    candidates.sort_unstable_by_key(|&v| degree(v));
    for &start in &candidates {
        if visited[start] {
            continue;
        }
        visited[start] = true;
        let mut head = order.len();
        order.push(start);
        while head < order.len() {
            let v = order[head];
            head += 1;
            let mut next: Vec<usize> = adjacency[v]
                .iter()
                .map(|&(_, w)| w)
                .filter(|&w| !visited[w])
                .collect();
            next.sort_unstable();
            next.dedup();
            next.sort_unstable_by_key(|&w| degree(w));
            for w in next {
                visited[w] = true;
                order.push(w);
            }
        }
    }
    order.reverse();
    let mut perm = vec![0usize; n];
    for (new, &old) in order.iter().enumerate() {
        perm[old] = new;
    }
    perm
}
