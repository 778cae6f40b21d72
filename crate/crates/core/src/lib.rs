//! Optimal review bonuses and dynamic pricing under social learning.
//!
//! The crate solves a platform's joint pricing and review-bonus problem in a
//! finite or infinite horizon perfect-learning model ([`discrete`]) and in a
//! continuous-time exponential good-news bandit ([`continuous`]), computes the
//! social planner's benchmark ([`planner`]) and checks the analytic values by
//! Monte Carlo ([`sim`]). All solvers are generic over `f32`/`f64`; the
//! aliases at the crate root fix the common `f64` instantiation.

pub mod continuous;
pub mod cost_model;
pub mod discrete;
pub mod error;
pub mod format;
pub mod numeric;
pub mod planner;
pub mod scalar;
pub mod sim;
pub mod strategy;

pub use cost_model::{CostDistribution, CostKind};
pub use error::{Error, Result};
pub use scalar::Real;
pub use strategy::Strategy;

pub type CostDistributionF64 = CostDistribution<f64>;
pub type CostDistributionF32 = CostDistribution<f32>;
pub type DiscreteModelF64 = discrete::DiscreteModel<f64>;
pub type BonusScheduleF64 = discrete::BonusSchedule<f64>;
pub type ContinuousModelF64 = continuous::ContinuousModel<f64>;
pub type PolicyMapF64 = continuous::PolicyMap<f64>;
pub type ValueCurveF64 = continuous::ValueCurve<f64>;
pub type PlannerSolutionF64 = planner::PlannerSolution<f64>;
