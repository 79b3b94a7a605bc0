//! Exact classical simulation of measurement-based quantum computation (MQC)
//! on the planar code state of an L×L square lattice.
//!
//! The planar code state is the equal superposition of all 1-cycles of the
//! lattice. Overlaps with product states reduce to weighted sums over cycles,
//! which in turn reduce to perfect-matching generating functions of planar
//! graphs and are evaluated as Pfaffians of Kasteleyn-oriented adjacency
//! matrices. Probabilities of partial measurements come from the same
//! machinery applied to a doubled graph: two mirror copies glued along the
//! boundary between measured and unmeasured qubits.
//!
//! Module layout follows the pipeline:
//!
//! - [`lattice`]: the L×L lattice, edge sets, incidence, connectivity.
//! - [`gf2`]: bit-packed linear algebra over GF(2); boundary maps and cycle
//!   spaces.
//! - [`planar_reduce`]: weighted planar graphs with rotation systems; degree
//!   reductions and the vertex gadget that turns cycle sums into matching
//!   sums.
//! - [`pfaffian`]: Kasteleyn orientation and log-scaled Pfaffian magnitudes.
//! - [`codestate`]: product states, overlaps, and partial-measurement
//!   probabilities via the doubled graph.
//! - [`mqc`]: adaptive measurement strategies and chain-rule sampling.
//! - [`oracle`]: brute-force reference by explicit cycle enumeration (small L
//!   only).
//!
//! Everything is deterministic: a simulation is a pure function of
//! `(lattice size, strategy, seed)`.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod codestate;
mod error;
pub mod gf2;
pub mod lattice;
pub mod mqc;
pub mod oracle;
pub mod pfaffian;
pub mod planar_reduce;

pub use error::{Error, Result};

pub use codestate::{MeasurementBasis, ProductState, QubitState};
pub use lattice::{EdgeId, EdgeKind, EdgeSet, Lattice};
pub use mqc::{Measurement, SimulationTrace, Strategy};
pub use pfaffian::LogMagnitude;
pub use planar_reduce::{Complex64, WeightedPlanarGraph};
