//! Weighted planar graphs with combinatorial embeddings, and the reduction
//! chain that turns a weighted cycle sum into a perfect-matching sum.
//!
//! The partition function of a graph is `Σ_x ∏_{e: x_e=1} w_e` over all
//! 1-chains `x` whose boundary equals the defect set (plain 1-cycles when
//! there are no defects). The stages preserve this value up to the scalar
//! `prefactor` carried on the graph:
//!
//! 1. [`preprocess_weights`] consumes forced edges (exact Z projections) and
//!    zero-weight edges.
//! 2. [`shift_defects`] removes defects by rerouting a representative
//!    relative cycle into the edge weights.
//! 3. [`reduce_degrees`] eliminates degree 1, 2 and ≥4 vertices until the
//!    graph is 3-valent, folding closed loops into the prefactor.
//! 4. [`expand_to_matching`] replaces each 3-valent vertex by a six-vertex
//!    gadget whose perfect matchings biject with cycles.
//!
//! Embeddings are rotation systems: the cyclic order of edge ends around
//! each vertex. Every stage keeps the rotation system planar, which the
//! Euler check [`WeightedPlanarGraph::validate_embedding`] certifies.

use crate::gf2::{self, BitVec};
use crate::{Error, Result};
use alloc::vec;
use alloc::vec::Vec;
use num_traits::Float;

pub type Complex64 = num_complex::Complex<f64>;

/// Edge weight, or a pinned chain value from an exact Z-basis projection.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum EdgeWeight {
    /// Contributes `w^{x_e}` to the partition function.
    Free(Complex64),
    /// `x_e` is pinned to `value`; the partition function gains the factor
    /// `scale` once.
    Forced { value: bool, scale: Complex64 },
}

/// One end of an edge: `end` selects which endpoint slot this is, so
/// self-loops and parallel edges stay distinguishable in rotations.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct HalfEdge {
    pub edge: usize,
    pub end: u8,
}

impl HalfEdge {
    #[inline]
    fn id(self) -> usize {
        2 * self.edge + self.end as usize
    }
}

/// Scalar accumulated by the reductions, kept as log-magnitude plus a unit
/// phase so products of extreme weights cannot overflow.
#[derive(Clone, Copy, Debug)]
pub struct Prefactor {
    pub log_magnitude: f64,
    pub phase: Complex64,
}

impl Prefactor {
    pub fn one() -> Self {
        Prefactor {
            log_magnitude: 0.0,
            phase: Complex64::new(1.0, 0.0),
        }
    }

    pub fn mul_complex(&mut self, w: Complex64) {
        let mag = w.norm();
        if mag == 0.0 {
            self.log_magnitude = f64::NEG_INFINITY;
            self.phase = Complex64::new(1.0, 0.0);
        } else {
            self.log_magnitude += mag.ln();
            self.phase *= w / mag;
        }
    }

    /// The represented value in linear scale (may overflow for extreme logs).
    pub fn value(&self) -> Complex64 {
        self.phase * self.log_magnitude.exp()
    }
}

#[derive(Clone, Debug)]
struct VertexSlot {
    rot: Vec<HalfEdge>,
    alive: bool,
    defect: bool,
}

#[derive(Clone, Copy, Debug)]
struct EdgeSlot {
    ends: [usize; 2],
    weight: EdgeWeight,
    alive: bool,
}

/// A planar graph with complex edge weights, a defect vertex set, and a
/// rotation system.
#[derive(Clone, Debug)]
pub struct WeightedPlanarGraph {
    verts: Vec<VertexSlot>,
    edges: Vec<EdgeSlot>,
    prefactor: Prefactor,
}

impl WeightedPlanarGraph {
    pub fn new(n_vertices: usize) -> Self {
        WeightedPlanarGraph {
            verts: vec![
                VertexSlot {
                    rot: Vec::new(),
                    alive: true,
                    defect: false,
                };
                n_vertices
            ],
            edges: Vec::new(),
            prefactor: Prefactor::one(),
        }
    }

    /// Appends an edge; its two ends are pushed onto the endpoint rotations
    /// in call order. Use [`Self::set_rotation`] to fix cyclic orders
    /// afterwards.
    pub fn add_edge(&mut self, u: usize, v: usize, weight: EdgeWeight) -> usize {
        let e = self.edges.len();
        self.edges.push(EdgeSlot {
            ends: [u, v],
            weight,
            alive: true,
        });
        self.verts[u].rot.push(HalfEdge { edge: e, end: 0 });
        self.verts[v].rot.push(HalfEdge { edge: e, end: 1 });
        e
    }

    /// Replaces the cyclic order around `v`. The new order must mention
    /// exactly the ends currently incident to `v`.
    pub fn set_rotation(&mut self, v: usize, rot: Vec<HalfEdge>) {
        debug_assert_eq!(rot.len(), self.verts[v].rot.len());
        debug_assert!(self.verts[v].rot.iter().all(|h| rot.contains(h)));
        self.verts[v].rot = rot;
    }

    pub fn rotation(&self, v: usize) -> &[HalfEdge] {
        &self.verts[v].rot
    }

    /// Total slots, raw dead entries included.
    pub fn vertex_slots(&self) -> usize {
        self.verts.len()
    }

    pub fn edge_slots(&self) -> usize {
        self.edges.len()
    }

    pub fn n_vertices(&self) -> usize {
        self.verts.iter().filter(|v| v.alive).count()
    }

    pub fn n_edges(&self) -> usize {
        self.edges.iter().filter(|e| e.alive).count()
    }

    pub fn is_vertex_alive(&self, v: usize) -> bool {
        self.verts[v].alive
    }

    pub fn is_edge_alive(&self, e: usize) -> bool {
        self.edges[e].alive
    }

    pub fn degree(&self, v: usize) -> usize {
        self.verts[v].rot.len()
    }

    pub fn edge_endpoints(&self, e: usize) -> (usize, usize) {
        (self.edges[e].ends[0], self.edges[e].ends[1])
    }

    pub fn edge_weight(&self, e: usize) -> EdgeWeight {
        self.edges[e].weight
    }

    pub fn set_edge_weight(&mut self, e: usize, weight: EdgeWeight) {
        self.edges[e].weight = weight;
    }

    pub fn set_defect(&mut self, v: usize, defect: bool) {
        self.verts[v].defect = defect;
    }

    pub fn toggle_defect(&mut self, v: usize) {
        self.verts[v].defect = !self.verts[v].defect;
    }

    pub fn is_defect(&self, v: usize) -> bool {
        self.verts[v].defect
    }

    pub fn has_defects(&self) -> bool {
        self.verts.iter().any(|v| v.alive && v.defect)
    }

    pub fn prefactor(&self) -> Prefactor {
        self.prefactor
    }

    pub fn prefactor_mut(&mut self) -> &mut Prefactor {
        &mut self.prefactor
    }

    /// Alive edges as `(edge, u, v)`.
    pub fn alive_edges(&self) -> impl Iterator<Item = (usize, usize, usize)> + '_ {
        self.edges
            .iter()
            .enumerate()
            .filter(|(_, s)| s.alive)
            .map(|(e, s)| (e, s.ends[0], s.ends[1]))
    }

    pub fn alive_vertices(&self) -> impl Iterator<Item = usize> + '_ {
        self.verts
            .iter()
            .enumerate()
            .filter(|(_, s)| s.alive)
            .map(|(v, _)| v)
    }

    fn delete_edge(&mut self, e: usize) {
        let [a, b] = self.edges[e].ends;
        self.verts[a].rot.retain(|h| h.edge != e);
        if b != a {
            self.verts[b].rot.retain(|h| h.edge != e);
        }
        self.edges[e].alive = false;
    }

    fn delete_isolated_vertex(&mut self, v: usize) {
        debug_assert!(self.verts[v].rot.is_empty());
        self.verts[v].alive = false;
        self.verts[v].defect = false;
    }

    /// Arrival slot lookup: for each half-edge id, the `(vertex, position)`
    /// of that end in its rotation. Dead ends map to `usize::MAX`.
    fn slot_positions(&self) -> Vec<(usize, usize)> {
        let mut pos = vec![(usize::MAX, usize::MAX); 2 * self.edges.len()];
        for (v, slot) in self.verts.iter().enumerate() {
            if !slot.alive {
                continue;
            }
            for (i, h) in slot.rot.iter().enumerate() {
                pos[h.id()] = (v, i);
            }
        }
        pos
    }

    /// Face orbits of the rotation system. Each orbit lists arrival
    /// half-edges: `HalfEdge { edge, end }` means the walk enters the vertex
    /// `ends[end]` along `edge`.
    pub fn faces(&self) -> Faces {
        let pos = self.slot_positions();
        let mut face_of = vec![usize::MAX; 2 * self.edges.len()];
        let mut orbits = Vec::new();
        for (e, slot) in self.edges.iter().enumerate() {
            if !slot.alive {
                continue;
            }
            for end in 0..2u8 {
                let start = HalfEdge { edge: e, end };
                if face_of[start.id()] != usize::MAX {
                    continue;
                }
                let face = orbits.len();
                let mut orbit = Vec::new();
                let mut h = start;
                loop {
                    face_of[h.id()] = face;
                    orbit.push(h);
                    let (v, i) = pos[h.id()];
                    let rot = &self.verts[v].rot;
                    let next = rot[(i + 1) % rot.len()];
                    h = HalfEdge {
                        edge: next.edge,
                        end: 1 - next.end,
                    };
                    if h == start {
                        break;
                    }
                }
                orbits.push(orbit);
            }
        }
        Faces { orbits, face_of }
    }

    /// Connected components over alive vertices; `usize::MAX` for dead ones.
    pub fn components(&self) -> (usize, Vec<usize>) {
        let mut comp = vec![usize::MAX; self.verts.len()];
        let mut adjacency = vec![Vec::new(); self.verts.len()];
        for (_, a, b) in self.alive_edges() {
            adjacency[a].push(b);
            adjacency[b].push(a);
        }
        let mut n = 0;
        let mut stack = Vec::new();
        for v in 0..self.verts.len() {
            if !self.verts[v].alive || comp[v] != usize::MAX {
                continue;
            }
            comp[v] = n;
            stack.push(v);
            while let Some(x) = stack.pop() {
                for &y in &adjacency[x] {
                    if comp[y] == usize::MAX {
                        comp[y] = n;
                        stack.push(y);
                    }
                }
            }
            n += 1;
        }
        (n, comp)
    }

    /// Structural and Euler validation of the rotation system: every alive
    /// edge end appears exactly once, and each connected component with edges
    /// satisfies `V - E + F = 2` for the faces traced from the rotations.
    pub fn validate_embedding(&self) -> Result<()> {
        let mut seen = vec![0u8; 2 * self.edges.len()];
        for (v, slot) in self.verts.iter().enumerate() {
            if !slot.alive {
                if !slot.rot.is_empty() {
                    return Err(Error::Embedding("dead vertex with rotation entries"));
                }
                continue;
            }
            for h in &slot.rot {
                let e = &self.edges[h.edge];
                if !e.alive {
                    return Err(Error::Embedding("rotation references dead edge"));
                }
                if e.ends[h.end as usize] != v {
                    return Err(Error::Embedding("rotation entry at wrong vertex"));
                }
                seen[h.id()] += 1;
            }
        }
        for (e, slot) in self.edges.iter().enumerate() {
            let expect = u8::from(slot.alive);
            for end in 0..2 {
                if seen[2 * e + end] != expect {
                    return Err(Error::Embedding("edge end multiplicity"));
                }
            }
            if slot.alive && (!self.verts[slot.ends[0]].alive || !self.verts[slot.ends[1]].alive) {
                return Err(Error::Embedding("edge incident to dead vertex"));
            }
        }

        let faces = self.faces();
        let (n_comp, comp) = self.components();
        let mut v_count = vec![0usize; n_comp];
        let mut e_count = vec![0usize; n_comp];
        let mut f_count = vec![0usize; n_comp];
        for v in self.alive_vertices() {
            v_count[comp[v]] += 1;
        }
        for (_, a, _) in self.alive_edges() {
            e_count[comp[a]] += 1;
        }
        for orbit in &faces.orbits {
            let v = self.edges[orbit[0].edge].ends[orbit[0].end as usize];
            f_count[comp[v]] += 1;
        }
        for c in 0..n_comp {
            if e_count[c] == 0 {
                continue; // isolated vertex: a bare sphere
            }
            if v_count[c] + f_count[c] != e_count[c] + 2 {
                return Err(Error::Embedding("Euler check failed"));
            }
        }
        Ok(())
    }
}

/// Face orbits plus the orbit index of every arrival half-edge.
pub struct Faces {
    pub orbits: Vec<Vec<HalfEdge>>,
    face_of: Vec<usize>,
}

impl Faces {
    #[inline]
    pub fn face_of(&self, arrival: HalfEdge) -> usize {
        self.face_of[arrival.id()]
    }
}

/// Consumes forced and zero-weight edges: a forced edge is deleted (its
/// endpoints toggle in the defect set when the pinned value is 1) and its
/// scale joins the prefactor; a zero-weight edge can never be occupied and
/// is deleted outright. Afterwards every weight is finite and nonzero.
pub fn preprocess_weights(mut g: WeightedPlanarGraph) -> WeightedPlanarGraph {
    for e in 0..g.edges.len() {
        if !g.edges[e].alive {
            continue;
        }
        match g.edges[e].weight {
            EdgeWeight::Forced { value, scale } => {
                g.prefactor.mul_complex(scale);
                if value {
                    let [a, b] = g.edges[e].ends;
                    g.toggle_defect(a);
                    g.toggle_defect(b);
                }
                g.delete_edge(e);
            }
            EdgeWeight::Free(w) if w == Complex64::new(0.0, 0.0) => {
                g.delete_edge(e);
            }
            EdgeWeight::Free(_) => {}
        }
    }
    g
}

/// Removes the defect set by shifting a representative relative cycle into
/// the weights: for each edge of a chain `z` with `∂z = D`, the weight
/// becomes `1/w` and `w` joins the prefactor. Fails with [`Error::OddDefect`]
/// when some component has an odd number of defects (the partition function
/// is exactly zero, and callers short-circuit).
pub fn shift_defects(mut g: WeightedPlanarGraph) -> Result<WeightedPlanarGraph> {
    if !g.has_defects() {
        return Ok(g);
    }
    let edge_list: Vec<(usize, usize, usize)> = g.alive_edges().collect();
    let pairs: Vec<(usize, usize)> = edge_list.iter().map(|&(_, a, b)| (a, b)).collect();
    let mut target = BitVec::zeros(g.verts.len());
    for (v, slot) in g.verts.iter().enumerate() {
        if slot.alive && slot.defect {
            target.set(v, true);
        }
    }
    let z = gf2::solve_boundary(g.verts.len(), &pairs, &target).ok_or(Error::OddDefect)?;
    for idx in z.iter_ones() {
        let e = edge_list[idx].0;
        let EdgeWeight::Free(w) = g.edges[e].weight else {
            unreachable!("forced edges were preprocessed away");
        };
        debug_assert!(w.norm() > 0.0);
        g.prefactor.mul_complex(w);
        g.edges[e].weight = EdgeWeight::Free(w.finv());
    }
    for slot in &mut g.verts {
        slot.defect = false;
    }
    Ok(g)
}

/// Reduces every vertex to degree 3, keeping the partition function times
/// the prefactor invariant:
///
/// - self-loops contribute `1 + w` and disappear;
/// - pendant edges can never be occupied and disappear;
/// - a degree-2 vertex merges its edges with the product weight;
/// - a degree ≥ 4 vertex repeatedly detaches its first two edges in cyclic
///   order onto a new degree-3 vertex joined back by a unit edge.
///
/// Components that melt away entirely contribute factor 1.
pub fn reduce_degrees(mut g: WeightedPlanarGraph) -> Result<WeightedPlanarGraph> {
    debug_assert!(!g.has_defects(), "shift defects before reducing degrees");
    let mut work: Vec<usize> = g.alive_vertices().collect();
    while let Some(v) = work.pop() {
        if !g.verts[v].alive {
            continue;
        }

        // Self-loops first; a loop contributes the factor (1 + w).
        while let Some(h) = g.verts[v]
            .rot
            .iter()
            .copied()
            .find(|h| g.edges[h.edge].ends[0] == g.edges[h.edge].ends[1])
        {
            let EdgeWeight::Free(w) = g.edges[h.edge].weight else {
                unreachable!("forced edges were preprocessed away");
            };
            g.prefactor.mul_complex(Complex64::new(1.0, 0.0) + w);
            g.delete_edge(h.edge);
        }

        match g.degree(v) {
            0 => g.delete_isolated_vertex(v),
            1 => {
                // Pendant edge: x_e = 0 in every contributing chain.
                let h = g.verts[v].rot[0];
                let other = g.edges[h.edge].ends[1 - h.end as usize];
                g.delete_edge(h.edge);
                g.delete_isolated_vertex(v);
                work.push(other);
            }
            2 => {
                let (s1, s2) = (g.verts[v].rot[0], g.verts[v].rot[1]);
                debug_assert_ne!(s1.edge, s2.edge, "self-loops already removed");
                let a = g.edges[s1.edge].ends[1 - s1.end as usize];
                let b = g.edges[s2.edge].ends[1 - s2.end as usize];
                let (EdgeWeight::Free(w1), EdgeWeight::Free(w2)) =
                    (g.edges[s1.edge].weight, g.edges[s2.edge].weight)
                else {
                    unreachable!("forced edges were preprocessed away");
                };
                let merged = g.edges.len();
                g.edges.push(EdgeSlot {
                    ends: [a, b],
                    weight: EdgeWeight::Free(w1 * w2),
                    alive: true,
                });
                // Replace the far ends in place so the cyclic orders at a
                // and b are untouched.
                let far1 = HalfEdge { edge: s1.edge, end: 1 - s1.end };
                let far2 = HalfEdge { edge: s2.edge, end: 1 - s2.end };
                let p1 = g.verts[a].rot.iter().position(|&h| h == far1).unwrap();
                g.verts[a].rot[p1] = HalfEdge { edge: merged, end: 0 };
                let p2 = g.verts[b].rot.iter().position(|&h| h == far2).unwrap();
                g.verts[b].rot[p2] = HalfEdge { edge: merged, end: 1 };
                g.edges[s1.edge].alive = false;
                g.edges[s2.edge].alive = false;
                g.verts[v].rot.clear();
                g.delete_isolated_vertex(v);
                work.push(a);
                if b != a {
                    work.push(b);
                }
            }
            3 => {}
            _ => {
                // Detach the first two ends onto a fresh vertex joined back
                // by a unit edge; cycles biject because the new edge carries
                // the parity of the detached pair.
                let s1 = g.verts[v].rot[0];
                let s2 = g.verts[v].rot[1];
                let v2 = g.verts.len();
                g.verts.push(VertexSlot {
                    rot: Vec::new(),
                    alive: true,
                    defect: false,
                });
                g.edges[s1.edge].ends[s1.end as usize] = v2;
                g.edges[s2.edge].ends[s2.end as usize] = v2;
                let bridge = g.edges.len();
                g.edges.push(EdgeSlot {
                    ends: [v2, v],
                    weight: EdgeWeight::Free(Complex64::new(1.0, 0.0)),
                    alive: true,
                });
                g.verts[v2].rot = vec![s1, s2, HalfEdge { edge: bridge, end: 0 }];
                let mut rot = vec![HalfEdge { edge: bridge, end: 1 }];
                rot.extend_from_slice(&g.verts[v].rot[2..]);
                g.verts[v].rot = rot;
                work.push(v);
            }
        }
    }
    debug_assert!(g.alive_vertices().all(|v| g.degree(v) == 3));
    Ok(g)
}

/// A planar matching instance: every vertex has degree at most 3 and the
/// weighted sum over perfect matchings equals the original cycle sum (times
/// the carried prefactor).
#[derive(Clone, Debug)]
pub struct MatchingGraph {
    graph: WeightedPlanarGraph,
}

impl MatchingGraph {
    /// Wraps a compact graph (no dead slots, no defects, free weights,
    /// degrees ≤ 3) as a matching instance.
    pub fn new(graph: WeightedPlanarGraph) -> Result<Self> {
        graph.validate_embedding()?;
        let ok = graph.verts.iter().all(|v| v.alive && !v.defect && v.rot.len() <= 3)
            && graph
                .edges
                .iter()
                .all(|e| e.alive && matches!(e.weight, EdgeWeight::Free(_)));
        if !ok {
            return Err(Error::Embedding("not a compact matching instance"));
        }
        Ok(MatchingGraph { graph })
    }

    pub fn graph(&self) -> &WeightedPlanarGraph {
        &self.graph
    }

    pub fn n_vertices(&self) -> usize {
        self.graph.verts.len()
    }

    pub fn n_edges(&self) -> usize {
        self.graph.edges.len()
    }

    pub fn free_weight(&self, e: usize) -> Complex64 {
        match self.graph.edge_weight(e) {
            EdgeWeight::Free(w) => w,
            EdgeWeight::Forced { .. } => unreachable!("validated on construction"),
        }
    }
}

/// Replaces each 3-valent vertex by the six-vertex gadget: three ports, an
/// inner triangle, and unit-weight spokes. External edges attach to ports in
/// rotation order, so the expansion stays planar. Perfect matchings of the
/// result biject with cycles of the input: a matched external edge means the
/// cycle occupies it, and the gadget admits exactly one internal completion
/// when an even number of its ports is externally matched.
pub fn expand_to_matching(g: &WeightedPlanarGraph) -> Result<MatchingGraph> {
    if g.alive_vertices().any(|v| g.degree(v) != 3) {
        return Err(Error::NotThreeValent);
    }
    debug_assert!(!g.has_defects());

    let mut gadget_base = vec![usize::MAX; g.verts.len()];
    let mut count = 0;
    for v in g.alive_vertices() {
        gadget_base[v] = 6 * count;
        count += 1;
    }
    let mut out = WeightedPlanarGraph::new(6 * count);
    out.prefactor = g.prefactor;

    // Per gadget: ports p0,p1,p2 = base..base+2, inner a,b,c = base+3..base+5.
    // Edges: spokes (p_k, inner_k), triangle (a,b), (b,c), (c,a).
    let mut spokes = vec![[0usize; 3]; count];
    let mut triangle = vec![[0usize; 3]; count];
    let unit = EdgeWeight::Free(Complex64::new(1.0, 0.0));
    for i in 0..count {
        let base = 6 * i;
        for k in 0..3 {
            spokes[i][k] = out.add_edge(base + k, base + 3 + k, unit);
        }
        triangle[i][0] = out.add_edge(base + 3, base + 4, unit); // (a,b)
        triangle[i][1] = out.add_edge(base + 4, base + 5, unit); // (b,c)
        triangle[i][2] = out.add_edge(base + 5, base + 3, unit); // (c,a)
    }

    // External edges land on the port matching their position in the
    // original rotation.
    let pos = g.slot_positions();
    let mut external = vec![(usize::MAX, [0usize; 2]); g.edges.len()];
    for (e, u, v) in g.alive_edges() {
        let (pu, iu) = pos[HalfEdge { edge: e, end: 0 }.id()];
        let (pv, iv) = pos[HalfEdge { edge: e, end: 1 }.id()];
        debug_assert_eq!((pu, pv), (u, v));
        let port_u = gadget_base[u] + iu;
        let port_v = gadget_base[v] + iv;
        let ne = out.add_edge(port_u, port_v, g.edges[e].weight);
        external[e] = (ne, [port_u, port_v]);
    }

    // Fix all rotations. Ports: [external, spoke]; inner vertices carry
    // [spoke, forward triangle edge, backward triangle edge], which is the
    // planar layout of the gadget read counterclockwise.
    for v in g.alive_vertices() {
        let i = gadget_base[v] / 6;
        let base = 6 * i;
        for (k, h) in g.verts[v].rot.iter().enumerate() {
            let (ne, ports) = external[h.edge];
            let end = u8::from(ports[1] == base + k);
            debug_assert_eq!(ports[end as usize], base + k);
            out.set_rotation(
                base + k,
                vec![HalfEdge { edge: ne, end }, HalfEdge { edge: spokes[i][k], end: 0 }],
            );
        }
        for k in 0..3 {
            let rot = vec![
                HalfEdge { edge: spokes[i][k], end: 1 },
                HalfEdge { edge: triangle[i][k], end: 0 },
                HalfEdge { edge: triangle[i][(k + 2) % 3], end: 1 },
            ];
            out.set_rotation(base + 3 + k, rot);
        }
    }

    MatchingGraph::new(out)
}
