use rand::Rng;

use crate::discrete::{BonusSchedule, DiscreteModel, Horizon, R1Law};
use crate::error::{Error, Result};
use crate::strategy::Strategy;

use super::{path_rng, run_paths, PathOutcome, SimConfig, SimResult};

/// Estimates the discounted profit of running `schedule` in `model` when the
/// risky value is drawn from `law`. Only `n_paths`, `master_seed` and
/// `threads` of `cfg` are used.
pub fn simulate_discrete(
    model: &DiscreteModel<f64>,
    schedule: &BonusSchedule<f64>,
    law: &R1Law,
    cfg: &SimConfig,
) -> Result<SimResult> {
    let periods = match schedule.horizon {
        Horizon::Finite(t) => t,
        Horizon::Infinite => {
            return Err(Error::Config(
                "discrete simulation needs a finite horizon".into(),
            ))
        }
    };
    if cfg.n_paths == 0 {
        return Err(Error::Config("n_paths must be positive".into()));
    }
    law.validate()?;
    let r = model.discount;
    run_paths(cfg.n_paths, cfg.threads, |id| {
        let mut rng = path_rng(cfg.master_seed, id);
        let r1 = law.quantile(rng.random::<f64>());
        let mut revealed = false;
        let mut reveal_period = periods as f64;
        let mut disc = 1.0;
        let mut total = 0.0;
        for t in 1..=periods {
            let revenue = if revealed {
                r1.max(model.r2)
            } else {
                let c = model.costs.quantile(rng.random::<f64>());
                let b = schedule.bonus_at(t);
                let reports = match schedule.strategy {
                    Strategy::FC | Strategy::PC => b > 0.0 && c <= b,
                    Strategy::IR => b > 0.0,
                    Strategy::SA | Strategy::NB => false,
                };
                if reports {
                    revealed = true;
                    reveal_period = t as f64;
                    model.er1 - b
                } else if schedule.strategy.risky_default() {
                    model.er1
                } else {
                    model.r2
                }
            };
            total += disc * revenue;
            disc *= r;
        }
        PathOutcome {
            value: total,
            good: r1 > model.r2,
            stop_time: reveal_period,
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cost_model::CostDistribution;

    fn model(r2: f64) -> DiscreteModel<f64> {
        let emax = (16.0 + r2 * r2) / 8.0;
        DiscreteModel::new(Horizon::Finite(2), 0.95, 2.0, emax, r2, CostDistribution::uniform(1.0).unwrap()).unwrap()
    }

    #[test]
    fn safe_schedule_is_deterministic() {
        let m = model(2.0);
        let s = BonusSchedule::zeros(m.horizon, Strategy::SA);
        let cfg = SimConfig { n_paths: 500, ..SimConfig::default() };
        let res = simulate_discrete(&m, &s, &R1Law::UniformR1 { upper: 4.0 }, &cfg).unwrap();
        assert!((res.mean - 3.9).abs() < 1e-12);
        assert!(res.std_error < 1e-12);
    }

    #[test]
    fn infinite_horizon_is_rejected() {
        let c = CostDistribution::uniform(1.0).unwrap();
        let m = DiscreteModel::new(Horizon::Infinite, 0.95, 2.0, 2.5, 2.0, c).unwrap();
        let s = m.fc_schedule();
        let cfg = SimConfig::default();
        assert!(simulate_discrete(&m, &s, &R1Law::UniformR1 { upper: 4.0 }, &cfg).is_err());
    }

    #[test]
    fn full_coverage_matches_expectation() {
        let m = model(2.0);
        let s = m.fc_schedule();
        let cfg = SimConfig { n_paths: 40_000, ..SimConfig::default() };
        let res = simulate_discrete(&m, &s, &R1Law::UniformR1 { upper: 4.0 }, &cfg).unwrap();
        assert!((res.mean - 3.95640625).abs() < 4.0 * res.std_error);
    }
}
