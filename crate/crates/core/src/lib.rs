//! Exact polyhedral toolkit for the operational Peres-Mermin scenario.
//!
//! The pipeline builds the measurement/source assignment polytopes from the
//! compatibility contexts, enumerates their vertices, pairs them into the
//! noncontextual correlation polytope, enumerates its facets, classifies
//! everything under the scenario's symmetry group, and evaluates the
//! resulting inequalities against depolarized two-qubit realizations.
//! All arithmetic is exact.

pub mod exactgeom;
pub mod linalg;
pub mod lp;
pub mod dualdesc;
pub mod scenario;
pub mod symmetry;
pub mod correlation;
pub mod quantum;
pub mod io;
pub mod pipeline;

pub use exactgeom::{pair, HRep, HomogeneousVector, Rational, VRep, VectorKind};
