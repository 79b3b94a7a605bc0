//! The L×L square lattice: qubits on edges, Z-type generators on vertices,
//! X-type generators on plaquettes.
//!
//! Vertices are `(row, col)` with `row, col ∈ 0..=L`. Horizontal edge
//! `h(r, c)` joins `(r, c)` to `(r, c+1)`; vertical edge `v(r, c)` joins
//! `(r, c)` to `(r+1, c)`. The flat edge index enumerates horizontals
//! row-major first, then verticals row-major; all file formats and
//! bit vectors use this index.

use crate::gf2::BitVec;
use crate::planar_reduce::{Complex64, EdgeWeight, HalfEdge, WeightedPlanarGraph};
use crate::{Error, Result};
use alloc::vec;
use alloc::vec::Vec;

/// Orientation of a lattice edge.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EdgeKind {
    Horizontal,
    Vertical,
}

/// A lattice edge in canonical coordinates.
///
/// Horizontal: `row ∈ 0..=L`, `col ∈ 0..L`. Vertical: `row ∈ 0..L`,
/// `col ∈ 0..=L`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct EdgeId {
    pub kind: EdgeKind,
    pub row: usize,
    pub col: usize,
}

/// Subset of lattice edges as a bit vector over flat edge indices.
pub type EdgeSet = BitVec;

/// Subset of lattice vertices as a bit vector over vertex indices.
pub type VertexSet = BitVec;

/// The L×L square lattice with precomputed incidence.
#[derive(Clone, Debug)]
pub struct Lattice {
    l: usize,
    /// `δs`: edges incident to each vertex in cyclic N, E, S, W order.
    vertex_edges: Vec<Vec<usize>>,
    /// `∂p`: the four boundary edges of each plaquette.
    plaquette_edges: Vec<[usize; 4]>,
    /// Endpoint vertices of each edge.
    endpoints: Vec<(usize, usize)>,
}

/// Builds the lattice; `l = 0` is rejected.
pub fn build_lattice(l: usize) -> Result<Lattice> {
    Lattice::new(l)
}

impl Lattice {
    pub fn new(l: usize) -> Result<Self> {
        if l == 0 {
            return Err(Error::InvalidSize);
        }
        let n_vertices = (l + 1) * (l + 1);
        let n_edges = 2 * l * (l + 1);
        let mut endpoints = vec![(0, 0); n_edges];
        let mut vertex_edges = vec![Vec::new(); n_vertices];

        let vid = |r: usize, c: usize| r * (l + 1) + c;
        let hid = |r: usize, c: usize| r * l + c;
        let wid = |r: usize, c: usize| l * (l + 1) + r * (l + 1) + c;

        for r in 0..=l {
            for c in 0..l {
                endpoints[hid(r, c)] = (vid(r, c), vid(r, c + 1));
            }
        }
        for r in 0..l {
            for c in 0..=l {
                endpoints[wid(r, c)] = (vid(r, c), vid(r + 1, c));
            }
        }
        for r in 0..=l {
            for c in 0..=l {
                let rot = &mut vertex_edges[vid(r, c)];
                if r > 0 {
                    rot.push(wid(r - 1, c)); // north
                }
                if c < l {
                    rot.push(hid(r, c)); // east
                }
                if r < l {
                    rot.push(wid(r, c)); // south
                }
                if c > 0 {
                    rot.push(hid(r, c - 1)); // west
                }
            }
        }

        let mut plaquette_edges = Vec::with_capacity(l * l);
        for r in 0..l {
            for c in 0..l {
                plaquette_edges.push([hid(r, c), wid(r, c + 1), hid(r + 1, c), wid(r, c)]);
            }
        }

        Ok(Lattice {
            l,
            vertex_edges,
            plaquette_edges,
            endpoints,
        })
    }

    pub fn size(&self) -> usize {
        self.l
    }

    /// `N0 = (L+1)²`
    pub fn n_vertices(&self) -> usize {
        (self.l + 1) * (self.l + 1)
    }

    /// `N1 = 2L(L+1)`
    pub fn n_edges(&self) -> usize {
        2 * self.l * (self.l + 1)
    }

    /// `N2 = L²`
    pub fn n_plaquettes(&self) -> usize {
        self.l * self.l
    }

    pub fn vertex_index(&self, row: usize, col: usize) -> usize {
        debug_assert!(row <= self.l && col <= self.l);
        row * (self.l + 1) + col
    }

    pub fn edge_index(&self, edge: EdgeId) -> Result<usize> {
        let l = self.l;
        match edge.kind {
            EdgeKind::Horizontal if edge.row <= l && edge.col < l => Ok(edge.row * l + edge.col),
            EdgeKind::Vertical if edge.row < l && edge.col <= l => {
                Ok(l * (l + 1) + edge.row * (l + 1) + edge.col)
            }
            _ => Err(Error::InvalidEdge),
        }
    }

    pub fn edge_from_index(&self, index: usize) -> EdgeId {
        let l = self.l;
        debug_assert!(index < self.n_edges());
        if index < l * (l + 1) {
            EdgeId {
                kind: EdgeKind::Horizontal,
                row: index / l,
                col: index % l,
            }
        } else {
            let k = index - l * (l + 1);
            EdgeId {
                kind: EdgeKind::Vertical,
                row: k / (l + 1),
                col: k % (l + 1),
            }
        }
    }

    pub fn endpoints(&self, edge: usize) -> (usize, usize) {
        self.endpoints[edge]
    }

    /// Edges incident to a vertex, in cyclic N, E, S, W order.
    pub fn incident_edges(&self, vertex: usize) -> &[usize] {
        &self.vertex_edges[vertex]
    }

    /// The four boundary edges of a plaquette.
    pub fn plaquette_boundary(&self, plaquette: usize) -> &[usize; 4] {
        &self.plaquette_edges[plaquette]
    }

    /// The boundary chain of a plaquette as a bit vector over edges.
    pub fn plaquette_chain(&self, plaquette: usize) -> BitVec {
        let mut v = BitVec::zeros(self.n_edges());
        for &e in self.plaquette_boundary(plaquette) {
            v.set(e, true);
        }
        v
    }

    pub fn empty_edge_set(&self) -> EdgeSet {
        BitVec::zeros(self.n_edges())
    }

    pub fn full_edge_set(&self) -> EdgeSet {
        self.empty_edge_set().complement()
    }

    pub fn edge_set_from(&self, edges: &[EdgeId]) -> Result<EdgeSet> {
        let mut set = self.empty_edge_set();
        for &e in edges {
            set.set(self.edge_index(e)?, true);
        }
        Ok(set)
    }

    /// `∂E`: vertices with at least one incident edge inside `set` and at
    /// least one outside. Symmetric in `set` and its complement.
    pub fn boundary_vertices(&self, set: &EdgeSet) -> VertexSet {
        let mut out = BitVec::zeros(self.n_vertices());
        for v in 0..self.n_vertices() {
            let mut inside = false;
            let mut outside = false;
            for &e in &self.vertex_edges[v] {
                if set.get(e) {
                    inside = true;
                } else {
                    outside = true;
                }
            }
            if inside && outside {
                out.set(v, true);
            }
        }
        out
    }

    /// Edge-set connectivity: every pair of edges in `set` is joined by a
    /// path of edges within `set` where consecutive edges share a vertex.
    /// Empty and singleton sets count as connected.
    pub fn is_connected(&self, set: &EdgeSet) -> bool {
        let Some(start) = set.iter_ones().next() else {
            return true;
        };
        let total = set.count_ones();
        let mut seen = BitVec::zeros(self.n_edges());
        seen.set(start, true);
        let mut queue = vec![start];
        let mut reached = 1;
        while let Some(e) = queue.pop() {
            let (a, b) = self.endpoints[e];
            for v in [a, b] {
                for &f in &self.vertex_edges[v] {
                    if set.get(f) && !seen.get(f) {
                        seen.set(f, true);
                        reached += 1;
                        queue.push(f);
                    }
                }
            }
        }
        reached == total
    }

    /// Embeds the subgraph `G_E` spanned by an edge set: vertices touched by
    /// `set`, rotation inherited from the lattice drawing, unit weights, no
    /// defects.
    pub fn subgraph_embedding(&self, set: &EdgeSet) -> Result<LatticeSubgraph> {
        if set.is_zero() {
            return Err(Error::EmptyEdgeSet);
        }
        let mut graph_vertex = vec![usize::MAX; self.n_vertices()];
        let mut vertex_of = Vec::new();
        for v in 0..self.n_vertices() {
            if self.vertex_edges[v].iter().any(|&e| set.get(e)) {
                graph_vertex[v] = vertex_of.len();
                vertex_of.push(v);
            }
        }
        let mut graph = WeightedPlanarGraph::new(vertex_of.len());
        let mut graph_edge = vec![usize::MAX; self.n_edges()];
        let mut edge_of = Vec::new();
        for e in set.iter_ones() {
            let (a, b) = self.endpoints[e];
            let ge = graph.add_edge(
                graph_vertex[a],
                graph_vertex[b],
                EdgeWeight::Free(Complex64::new(1.0, 0.0)),
            );
            debug_assert_eq!(ge, edge_of.len());
            graph_edge[e] = ge;
            edge_of.push(e);
        }
        // Rebuild each rotation in the lattice's N, E, S, W order.
        for (gv, &v) in vertex_of.iter().enumerate() {
            let rot: Vec<HalfEdge> = self.vertex_edges[v]
                .iter()
                .filter(|&&e| set.get(e))
                .map(|&e| {
                    let ge = graph_edge[e];
                    let end = if graph_vertex[self.endpoints[e].0] == gv { 0 } else { 1 };
                    HalfEdge { edge: ge, end }
                })
                .collect();
            graph.set_rotation(gv, rot);
        }
        graph.validate_embedding()?;
        Ok(LatticeSubgraph {
            graph,
            vertex_of,
            edge_of,
            graph_vertex,
        })
    }
}

/// A subgraph embedding together with the index maps back to the lattice.
#[derive(Clone, Debug)]
pub struct LatticeSubgraph {
    pub graph: WeightedPlanarGraph,
    /// Graph vertex -> lattice vertex.
    pub vertex_of: Vec<usize>,
    /// Graph edge -> flat lattice edge index.
    pub edge_of: Vec<usize>,
    /// Lattice vertex -> graph vertex (`usize::MAX` when absent).
    pub graph_vertex: Vec<usize>,
}
