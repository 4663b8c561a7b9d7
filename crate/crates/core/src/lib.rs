//! Labelled polygon subdivisions and P-resolutions of cyclic quotient
//! surface singularities.

pub mod chains;
pub mod error;
pub mod labelled;
pub mod moves;
pub mod polygon;
pub mod presolve;
pub mod sequences;

pub use chains::{ChainGraph, TKind};
pub use error::{Error, Result};
pub use labelled::{LabelledSubdivision, TSubdivision};
pub use polygon::{IsoMode, Law, Subdivision};
pub use presolve::{Gj, GjVerdict};
pub use sequences::{Rational, Sequence};
