//! Delzant and Grassmannian reductions, the weighted contact sphere over
//! them, and the quaternionic frame maps, with exact lattice arithmetic and
//! numerical verification of the resulting geometry.

pub mod contact;
pub mod error;
pub mod lattice;
pub mod linalg;
pub mod moment;
pub mod quatgrass;
pub mod report;
pub mod seed;
pub mod toric;

pub use error::{Error, Result};
pub use lattice::{IntMatrix, KernelLattice, Rational, RationalVector, WeightVector};
pub use linalg::C64;
pub use toric::{DelzantData, GrassmannFactor, InteriorPoint, PolytopeSpec, StageTorus};
pub use moment::{AmbientPoint, ReductionSpec, TangentVector};
pub use report::{builtin, load_spec, run_suites, Report, RunConfig, Suite};
