//! Decision procedure for the equational theory of time warps:
//! sup-preserving functions on ω∪{ω} with composition, lattice operations,
//! and residuals. Queries are decided by normalizing to basic-term goals,
//! saturating a finite sample set, encoding diagram existence as
//! quantifier-free satisfiability over the naturals, and extracting a
//! machine-verified counterexample valuation from any satisfying model.

pub mod constraints;
pub mod extnat;
pub mod extract;
pub mod generate;
pub mod interp;
pub mod normalize;
pub mod pipeline;
pub mod saturate;
pub mod solve;
pub mod term;
pub mod warp;
