//! Continuous-time exponential good-news bandit: value ODEs with smooth
//! pasting, switching beliefs, single-strategy benchmarks and the capped
//! immediate-revelation regime.

mod curve;
pub(crate) mod march;
mod model;
mod solve;

pub use curve::{PolicyMap, ValueCurve, EXPORT_POINTS};
pub(crate) use model::Slope;
pub use model::{Branch, ContinuousModel};
pub use solve::DEFAULT_GRID_STEP;
