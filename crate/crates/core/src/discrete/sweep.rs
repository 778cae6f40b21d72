use std::io::Write;

use crate::error::Result;
use crate::format::g12;
use crate::scalar::{lit, to_f64, Real};
use crate::strategy::Strategy;

use super::emax::{emax_oracle, R1Law};
use super::model::DiscreteModel;
use super::schedule::BonusSchedule;

/// Profits of every strategy at one safe value.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow<S> {
    pub r2: S,
    /// Profit of the full-coverage family schedule, whatever it degenerates to.
    pub pi_fc: S,
    /// Profit of the partial-coverage family schedule, whatever it degenerates to.
    pub pi_pc: S,
    pub pi_sa: S,
    pub pi_nb: S,
    pub pi_ir: S,
    pub winner: Strategy,
}

/// Solves `base` at every safe value of `r2_grid`, with `E R1` and `E max`
/// taken from `law`. The other fields of `base` are kept.
pub fn sweep_r2<S: Real>(base: &DiscreteModel<S>, law: &R1Law, r2_grid: &[S]) -> Result<Vec<SweepRow<S>>> {
    let er1: S = lit(law.mean());
    r2_grid
        .iter()
        .map(|&r2| {
            let emax = emax_oracle(law, r2)?;
            let m = DiscreteModel::new(base.horizon, base.discount, er1, emax, r2, base.costs.clone())?;
            let fc = m.fc_schedule();
            let pc = m.pc_schedule();
            let profit = |s: &BonusSchedule<S>| m.strategy_profit(s.strategy, s);
            let ir = BonusSchedule::immediate_revelation(m.horizon, m.costs.cbar());
            Ok(SweepRow {
                r2,
                pi_fc: profit(&fc)?,
                pi_pc: profit(&pc)?,
                pi_sa: m.r2 * m.annuity(),
                pi_nb: m.er1 * m.annuity(),
                pi_ir: profit(&ir)?,
                winner: m.optimal_strategy().0,
            })
        })
        .collect()
}

/// Writes sweep rows as CSV.
pub fn write_sweep_csv<S: Real, W: Write>(rows: &[SweepRow<S>], mut out: W) -> Result<()> {
    writeln!(out, "r2,pi_fc,pi_pc,pi_sa,pi_nb,pi_ir,winner")?;
    for row in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            g12(to_f64(row.r2)),
            g12(to_f64(row.pi_fc)),
            g12(to_f64(row.pi_pc)),
            g12(to_f64(row.pi_sa)),
            g12(to_f64(row.pi_nb)),
            g12(to_f64(row.pi_ir)),
            row.winner
        )?;
    }
    Ok(())
}
