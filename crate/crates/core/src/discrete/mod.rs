//! Perfect-learning model: bonus recursions, stationary bonuses, strategy
//! profits and the choice among full coverage, partial coverage, safe arm,
//! no bonus and immediate revelation.

mod emax;
mod model;
mod schedule;
mod sweep;

pub use emax::{emax_oracle, R1Law};
pub use model::{DiscreteModel, FixedPoint, Horizon, Variant};
pub use schedule::BonusSchedule;
pub use sweep::{sweep_r2, write_sweep_csv, SweepRow};
