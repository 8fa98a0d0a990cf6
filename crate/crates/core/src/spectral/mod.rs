//! Periodic calculus on the unit torus `[0,1)²`.

mod field;
mod grid;
mod ops;

pub use field::{ScalarField, Spectrum, VectorField};
pub use grid::PeriodicGrid;
pub use ops::*;
