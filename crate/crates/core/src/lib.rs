//! Band spectra of periodic Schrödinger, Jacobi and CMV operators,
//! limit-periodic approximant sequences with super-exponentially small
//! increments, and lattice certification of Carleson homogeneity for the
//! resulting spectra.

pub mod arcs;
pub mod bands;
pub mod cli;
pub mod cmv;
pub mod continuum;
pub mod error;
pub mod homogeneity;
pub mod intervals;
pub mod jacobi;
pub mod mat2;
pub mod pt;
pub mod roots;
pub mod verify;

pub use arcs::CircularArcSet;
pub use bands::{BandEdge, BandStructure, EdgeLabel};
pub use cmv::PeriodicCmv;
pub use continuum::PiecewisePotential;
pub use error::{Error, Result};
pub use homogeneity::{certify_arc_homogeneity, certify_homogeneity, HomogeneityReport, LatticeSpec};
pub use intervals::{Interval, IntervalSet};
pub use jacobi::PeriodicJacobi;
pub use pt::{generate_pt_sequence, PtKind, PtSequence, Schedule};
