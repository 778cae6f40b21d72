use crate::error::{Error, Result};
use crate::scalar::{lit, Real};
use crate::strategy::Strategy;

use super::model::{DiscreteModel, FixedPoint, Horizon, Variant};

/// Per-period bonus sequence `b_1..b_T` (a single constant when the horizon is infinite).
#[derive(Debug, Clone, PartialEq)]
pub struct BonusSchedule<S> {
    pub horizon: Horizon,
    pub bonuses: Vec<S>,
    pub strategy: Strategy,
    /// Set when a negative bonus before the last period was clamped to zero.
    pub interior_clamped: bool,
}

impl<S: Real> BonusSchedule<S> {
    pub fn zeros(horizon: Horizon, strategy: Strategy) -> Self {
        let len = match horizon {
            Horizon::Finite(t) => t,
            Horizon::Infinite => 1,
        };
        Self {
            horizon,
            bonuses: vec![S::zero(); len],
            strategy,
            interior_clamped: false,
        }
    }

    /// Bonus at the cost cap in the first period and zero afterwards.
    pub fn immediate_revelation(horizon: Horizon, cbar: S) -> Self {
        let mut s = Self::zeros(horizon, Strategy::IR);
        s.bonuses[0] = cbar;
        s
    }

    pub fn first(&self) -> S {
        self.bonuses[0]
    }

    /// Bonus offered in period `t` (1-based).
    pub fn bonus_at(&self, t: usize) -> S {
        match self.horizon {
            Horizon::Infinite => self.bonuses[0],
            Horizon::Finite(_) => self.bonuses[t - 1],
        }
    }
}

impl<S: Real> DiscreteModel<S> {
    /// Full-coverage schedule built backward from a zero final bonus.
    pub fn fc_schedule(&self) -> BonusSchedule<S> {
        let cbar = self.costs.cbar();
        match self.horizon {
            Horizon::Finite(1) => BonusSchedule::zeros(self.horizon, Strategy::NB),
            Horizon::Finite(t) => {
                let mut b = vec![S::zero(); t];
                for i in (0..t - 1).rev() {
                    b[i] = self.gamma_step(b[i + 1], Variant::M);
                }
                if b.iter().any(|&x| x > cbar) {
                    return BonusSchedule::immediate_revelation(self.horizon, cbar);
                }
                BonusSchedule {
                    horizon: self.horizon,
                    bonuses: b,
                    strategy: Strategy::FC,
                    interior_clamped: false,
                }
            }
            Horizon::Infinite => match self.fixed_point_status(Variant::M) {
                FixedPoint::Root(x) => BonusSchedule {
                    horizon: self.horizon,
                    bonuses: vec![x],
                    strategy: Strategy::FC,
                    interior_clamped: false,
                },
                FixedPoint::NonPositivePremium => BonusSchedule::zeros(self.horizon, Strategy::NB),
                FixedPoint::AboveCap => BonusSchedule::immediate_revelation(self.horizon, cbar),
            },
        }
    }

    /// Partial-coverage schedule built backward from the terminal indifference bonus.
    pub fn pc_schedule(&self) -> BonusSchedule<S> {
        let cbar = self.costs.cbar();
        match self.horizon {
            Horizon::Finite(t) => {
                let mut d = vec![S::zero(); t];
                d[t - 1] = self.pc_terminal();
                for i in (0..t - 1).rev() {
                    d[i] = self.gamma_step(d[i + 1], Variant::N);
                }
                if d[0] > cbar {
                    return BonusSchedule::immediate_revelation(self.horizon, cbar);
                }
                if d[0] <= S::zero() {
                    return BonusSchedule::zeros(self.horizon, Strategy::SA);
                }
                let interior_clamped = d[..t - 1].iter().any(|&x| x < S::zero());
                let bonuses = d.into_iter().map(|x| x.max(S::zero())).collect();
                BonusSchedule {
                    horizon: self.horizon,
                    bonuses,
                    strategy: Strategy::PC,
                    interior_clamped,
                }
            }
            Horizon::Infinite => match self.fixed_point_status(Variant::N) {
                FixedPoint::Root(x) => BonusSchedule {
                    horizon: self.horizon,
                    bonuses: vec![x],
                    strategy: Strategy::PC,
                    interior_clamped: false,
                },
                FixedPoint::NonPositivePremium => BonusSchedule::zeros(self.horizon, Strategy::SA),
                FixedPoint::AboveCap => BonusSchedule::immediate_revelation(self.horizon, cbar),
            },
        }
    }

    /// Total discounted profit of `strategy` run with `schedule`.
    pub fn strategy_profit(&self, strategy: Strategy, schedule: &BonusSchedule<S>) -> Result<S> {
        if schedule.strategy != strategy {
            return Err(Error::Inconsistent(format!(
                "schedule is labelled {} but profit requested for {}",
                schedule.strategy, strategy
            )));
        }
        let f = self.annuity();
        Ok(match strategy {
            Strategy::FC | Strategy::PC => self.emax * f - self.psi(schedule.first(), Variant::M),
            Strategy::SA => self.r2 * f,
            Strategy::NB => self.er1 * f,
            Strategy::IR => self.emax * f - self.m() - self.costs.cbar(),
        })
    }

    /// Profit-maximizing strategy; ties go to the earlier entry of FC, PC, IR, NB, SA.
    pub fn optimal_strategy(&self) -> (Strategy, BonusSchedule<S>, S) {
        let mut candidates = vec![
            self.fc_schedule(),
            self.pc_schedule(),
            BonusSchedule::zeros(self.horizon, Strategy::NB),
            BonusSchedule::zeros(self.horizon, Strategy::SA),
        ];
        if !self.excludes_immediate_revelation() {
            candidates.push(BonusSchedule::immediate_revelation(self.horizon, self.costs.cbar()));
        }
        let rank = |s: Strategy| match s {
            Strategy::FC => 0,
            Strategy::PC => 1,
            Strategy::IR => 2,
            Strategy::NB => 3,
            Strategy::SA => 4,
        };
        let mut best: Option<(BonusSchedule<S>, S)> = None;
        for sched in candidates {
            let p = self
                .strategy_profit(sched.strategy, &sched)
                .expect("candidate labels are consistent");
            best = match best {
                None => Some((sched, p)),
                Some((bs, bp)) => {
                    let tie = lit::<S>(1e-12) * (S::one() + bp.abs());
                    let better = p > bp + tie
                        || ((p - bp).abs() <= tie && rank(sched.strategy) < rank(bs.strategy));
                    if better {
                        Some((sched, p))
                    } else {
                        Some((bs, bp))
                    }
                }
            };
        }
        let (sched, p) = best.expect("at least one candidate");
        (sched.strategy, sched, p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cost_model::CostDistribution;

    fn model(horizon: Horizon, r: f64, r2: f64) -> DiscreteModel<f64> {
        let emax = (16.0 + r2 * r2) / 8.0;
        DiscreteModel::new(horizon, r, 2.0, emax, r2, CostDistribution::uniform(1.0).unwrap()).unwrap()
    }

    #[test]
    fn fc_schedule_examples() {
        let s = model(Horizon::Finite(1), 0.95, 2.0).fc_schedule();
        assert_eq!(s.strategy, Strategy::NB);
        assert_eq!(s.bonuses, vec![0.0]);
        let s = model(Horizon::Finite(2), 0.95, 2.0).fc_schedule();
        assert_eq!(s.strategy, Strategy::FC);
        assert!((s.bonuses[0] - 0.2375).abs() < 1e-15);
        assert_eq!(s.bonuses[1], 0.0);
        let s = model(Horizon::Infinite, 0.95, 2.0).fc_schedule();
        assert_eq!(s.strategy, Strategy::FC);
        assert!((s.bonuses[0] - 0.656434).abs() < 5e-6);
    }

    #[test]
    fn pc_schedule_examples() {
        let c = CostDistribution::<f64>::uniform(1.0).unwrap();
        let m: DiscreteModel<f64> = DiscreteModel::new(Horizon::Finite(1), 0.95, 2.0, 2.125, 1.0, c.clone()).unwrap();
        let s = m.pc_schedule();
        assert_eq!(s.strategy, Strategy::PC);
        assert!((s.bonuses[0] - 0.5).abs() < 1e-12);
        let m = DiscreteModel::new(Horizon::Finite(1), 0.95, 2.0, 2.78125, 2.5, c.clone()).unwrap();
        let s = m.pc_schedule();
        assert_eq!(s.strategy, Strategy::SA);
        assert_eq!(s.bonuses, vec![0.0]);
        let m = DiscreteModel::new(Horizon::Infinite, 0.5, 2.0, 2.9, 2.5, c).unwrap();
        assert!((m.n() + 0.1).abs() < 1e-12);
        let s = m.pc_schedule();
        assert_eq!(s.strategy, Strategy::SA);
        assert_eq!(s.bonuses, vec![0.0]);
    }

    #[test]
    fn profit_examples() {
        let m = model(Horizon::Finite(2), 0.95, 2.0);
        let fc = m.fc_schedule();
        let p = m.strategy_profit(Strategy::FC, &fc).unwrap();
        let oracle = 2.0 + 0.2375 * (0.95 * 2.5 - 0.2375) + 0.7625 * 0.95 * 2.0;
        assert!((p - 3.95640625).abs() < 1e-12);
        assert!((p - oracle).abs() < 1e-12);
        let sa = BonusSchedule::zeros(m.horizon, Strategy::SA);
        assert!((m.strategy_profit(Strategy::SA, &sa).unwrap() - 3.9).abs() < 1e-12);
        let c = CostDistribution::<f64>::uniform(1.0).unwrap();
        let inf: DiscreteModel<f64> = DiscreteModel::new(Horizon::Infinite, 0.5, 2.0, 2.5, 2.0, c).unwrap();
        let nb = BonusSchedule::zeros(Horizon::Infinite, Strategy::NB);
        assert!((inf.strategy_profit(Strategy::NB, &nb).unwrap() - 4.0).abs() < 1e-12);
        assert!(matches!(m.strategy_profit(Strategy::PC, &fc), Err(Error::Inconsistent(_))));
    }

    #[test]
    fn optimal_strategy_examples() {
        assert_eq!(model(Horizon::Finite(2), 0.95, 1.0).optimal_strategy().0, Strategy::FC);
        assert_eq!(model(Horizon::Finite(1), 0.95, 1.0).optimal_strategy().0, Strategy::NB);
        assert_eq!(model(Horizon::Infinite, 0.95, 2.5).optimal_strategy().0, Strategy::PC);
        assert_eq!(model(Horizon::Finite(2), 0.95, 3.5).optimal_strategy().0, Strategy::SA);
    }

    #[test]
    fn fc_and_pc_coincide_when_safe_equals_mean() {
        for h in [Horizon::Finite(2), Horizon::Finite(7), Horizon::Infinite] {
            let m = model(h, 0.95, 2.0);
            let fc = m.fc_schedule();
            let pc = m.pc_schedule();
            let a = m.strategy_profit(fc.strategy, &fc).unwrap();
            let b = m.strategy_profit(pc.strategy, &pc).unwrap();
            assert!((a - b).abs() < 1e-10);
            assert_eq!(m.optimal_strategy().0, Strategy::FC);
        }
    }

    #[test]
    fn overlarge_premium_triggers_immediate_revelation() {
        let c = CostDistribution::<f64>::uniform(0.1).unwrap();
        let m = DiscreteModel::new(Horizon::Finite(4), 0.9, 2.0, 4.0, 2.0, c).unwrap();
        let s = m.fc_schedule();
        assert_eq!(s.strategy, Strategy::IR);
        assert_eq!(s.bonuses, vec![0.1, 0.0, 0.0, 0.0]);
        let p = m.strategy_profit(Strategy::IR, &s).unwrap();
        assert!((p - (4.0 * m.annuity() - 2.0 - 0.1)).abs() < 1e-12);
    }
}
