//! Radially symmetric wave and Helmholtz solvers with the oracles, ray
//! tracer and decay diagnostics used to study the limiting amplitude
//! principle for variable-coefficient media in one, two and three dimensions.

pub mod error;
pub mod experiments;
pub mod grid;
pub mod helmholtz;
pub mod lap;
pub mod medium;
pub mod operator;
pub mod oracle;
pub mod par;
pub mod quad;
pub mod rays;
pub mod special;
pub mod wave;

pub use error::{Error, Result};
pub use grid::{Field, RadialGrid};
pub use medium::{MediumProfile, SourceProfile};
pub use par::Execution;
