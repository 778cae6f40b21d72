use std::io::Write;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Geometric};

use crate::continuous::PolicyMap;
use crate::error::Result;
use crate::format::g12;
use crate::strategy::Strategy;

use super::{bayes_update, path_rng, run_paths, PathOutcome, SimConfig, StepMode};

/// One simulated period (or the terminal news event) of a traced path.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub path_id: u64,
    pub t: f64,
    pub alpha: f64,
    pub strategy: Strategy,
    pub bonus: f64,
    pub cost: f64,
    pub reported: bool,
    /// Cash flow discounted to time zero.
    pub cash_flow: f64,
    /// Latent state of the path; not part of the CSV.
    pub good: bool,
}

struct Constants {
    r: f64,
    g: f64,
    s: f64,
    lambda: f64,
    dt: f64,
    decay: f64,
    /// Present value at period start of a unit flow over one period.
    annuity: f64,
    news: f64,
    periods: u64,
}

impl Constants {
    fn new(policy: &PolicyMap<f64>, cfg: &SimConfig) -> Self {
        let m = &policy.model;
        let r = m.discount_rate;
        let decay = (-r * cfg.dt).exp();
        Self {
            r,
            g: m.g(),
            s: m.safe_flow,
            lambda: m.arrival_rate,
            dt: cfg.dt,
            decay,
            annuity: (1.0 - decay) / r,
            news: 1.0 - (-m.arrival_rate * cfg.dt).exp(),
            periods: (cfg.horizon / cfg.dt).ceil() as u64,
        }
    }

    /// Present value of `n` periods of a unit flow.
    fn run_value(&self, n: u64) -> f64 {
        self.annuity * (1.0 - self.decay.powf(n as f64)) / (1.0 - self.decay)
    }
}

/// Simulates one path; `trace` receives per-period rows in per-period mode.
fn run_path(
    policy: &PolicyMap<f64>,
    cfg: &SimConfig,
    k: &Constants,
    path_id: u64,
    mut trace: Option<&mut Vec<TraceRow>>,
) -> PathOutcome {
    let mut rng: ChaCha8Rng = path_rng(cfg.master_seed, path_id);
    let good = rng.random::<f64>() < cfg.alpha0;
    let costs = &policy.model.costs;
    let mut alpha = cfg.alpha0;
    let mut period: u64 = 0;
    let mut disc = 1.0;
    let mut total = 0.0;
    loop {
        let t = period as f64 * k.dt;
        if period >= k.periods {
            total += disc * policy.lookup(alpha).2;
            return PathOutcome { value: total, good, stop_time: t };
        }
        let (region, bonus, _) = policy.lookup(alpha);
        match region {
            Strategy::SA => {
                total += disc * k.s / k.r;
                return PathOutcome { value: total, good, stop_time: t };
            }
            Strategy::NB => {
                total += disc * alpha * k.g / k.r;
                return PathOutcome { value: total, good, stop_time: t };
            }
            _ => {}
        }
        let risky = alpha * k.g;
        let quiet_flow = if region.risky_default() { risky } else { k.s };
        let p = if region == Strategy::IR { 1.0 } else { costs.cdf(bonus) };
        let left = k.periods - period;
        let quiet = match cfg.mode {
            StepMode::SkipAhead => {
                let run = if p >= 1.0 {
                    0
                } else if p <= 0.0 {
                    u64::MAX
                } else {
                    Geometric::new(p).map(|d| d.sample(&mut rng)).unwrap_or(u64::MAX)
                };
                run
            }
            StepMode::PerPeriod => {
                let c = costs.quantile(rng.random::<f64>());
                let reports = region == Strategy::IR || (bonus > 0.0 && c <= bonus);
                if let Some(rows) = trace.as_deref_mut() {
                    let flow = if reports {
                        risky * k.annuity - bonus * k.dt * k.decay
                    } else {
                        quiet_flow * k.annuity
                    };
                    rows.push(TraceRow {
                        path_id,
                        t,
                        alpha,
                        strategy: region,
                        bonus,
                        cost: c,
                        reported: reports,
                        cash_flow: disc * flow,
                        good,
                    });
                }
                u64::from(!reports)
            }
        };
        if quiet > 0 {
            let n = quiet.min(left);
            total += disc * quiet_flow * k.run_value(n);
            disc *= k.decay.powf(n as f64);
            period += n;
            // A skip-ahead run ends with a report; a single quiet period does not.
            if n == left || cfg.mode == StepMode::PerPeriod {
                continue;
            }
        }
        total += disc * (risky * k.annuity - bonus * k.dt * k.decay);
        disc *= k.decay;
        period += 1;
        if good && rng.random::<f64>() < k.news {
            let tail = disc * k.g / k.r;
            total += tail;
            let t_news = period as f64 * k.dt;
            if let Some(rows) = trace.as_deref_mut() {
                rows.push(TraceRow {
                    path_id,
                    t: t_news,
                    alpha: 1.0,
                    strategy: Strategy::NB,
                    bonus: 0.0,
                    cost: f64::NAN,
                    reported: false,
                    cash_flow: tail,
                    good,
                });
            }
            return PathOutcome { value: total, good, stop_time: t_news };
        }
        alpha = bayes_update(alpha, k.lambda, k.dt);
    }
}

/// Estimates the discounted profit of `policy` from belief `cfg.alpha0`.
pub fn simulate_continuous(policy: &PolicyMap<f64>, cfg: &SimConfig) -> Result<super::SimResult> {
    cfg.validate(policy.model.discount_rate, policy.model.arrival_rate)?;
    let k = Constants::new(policy, cfg);
    run_paths(cfg.n_paths, cfg.threads, |id| run_path(policy, cfg, &k, id, None))
}

/// Per-period rows of the first `n_paths` paths, drawn as in [`StepMode::PerPeriod`].
pub fn trace_continuous(policy: &PolicyMap<f64>, cfg: &SimConfig, n_paths: usize) -> Result<Vec<TraceRow>> {
    cfg.validate(policy.model.discount_rate, policy.model.arrival_rate)?;
    let cfg = SimConfig { mode: StepMode::PerPeriod, ..cfg.clone() };
    let k = Constants::new(policy, &cfg);
    let mut rows = Vec::new();
    for id in 0..n_paths as u64 {
        run_path(policy, &cfg, &k, id, Some(&mut rows));
    }
    Ok(rows)
}

/// Writes `path_id,t,alpha,strategy,bonus,cost,reported,cash_flow` rows.
pub fn write_trace_csv<W: Write>(rows: &[TraceRow], mut out: W) -> Result<()> {
    writeln!(out, "path_id,t,alpha,strategy,bonus,cost,reported,cash_flow")?;
    for row in rows {
        let cost = if row.cost.is_nan() { String::new() } else { g12(row.cost) };
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            row.path_id,
            g12(row.t),
            g12(row.alpha),
            row.strategy,
            g12(row.bonus),
            cost,
            u8::from(row.reported),
            g12(row.cash_flow)
        )?;
    }
    Ok(())
}
