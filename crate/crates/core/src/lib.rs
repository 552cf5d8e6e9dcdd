//! Numerical and exact verification kernels for second-order functional
//! inequalities on hyperbolic space.

pub mod corpus;
pub mod deficit;
pub mod error;
pub mod extremal;
pub mod hypgeo;
pub mod jet;
pub mod polyexact;
pub mod precise;
pub mod profile;
pub mod quad;
pub mod rearrange;
pub mod report;

pub use deficit::SharpConstants;
pub use error::{Error, Result};
pub use hypgeo::{GeometryContext, PhiPair, RadialPoint};
pub use jet::Jet;
pub use profile::{DecayClass, Grid, Interpolation, RadialProfile, Side, SourceProfile};
pub use rearrange::{decreasing_rearrangement, Rearrangement, SampledFunction};
pub use report::{DeficitReport, Status};
