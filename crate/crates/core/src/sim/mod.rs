//! Monte Carlo evaluation of solved policies by direct simulation of the
//! purchase, report and belief-update process.

mod belief;
mod continuous;
mod discrete;

pub use belief::{belief_consistency, BeliefCheck};
pub use continuous::{simulate_continuous, trace_continuous, write_trace_csv, TraceRow};
pub use discrete::simulate_discrete;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};

/// How the continuous simulator advances through periods without reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepMode {
    /// Jump over runs of non-reporting periods with a geometric draw.
    SkipAhead,
    /// Draw one agent cost per period.
    PerPeriod,
}

/// Monte Carlo controls.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    /// Period length.
    pub dt: f64,
    /// Truncation time; the policy value at the truncation belief is added as a tail.
    pub horizon: f64,
    pub n_paths: usize,
    pub master_seed: u64,
    pub alpha0: f64,
    /// Worker threads; `None` uses the global pool.
    pub threads: Option<usize>,
    pub mode: StepMode,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            dt: 1e-3,
            horizon: 40.0,
            n_paths: 100_000,
            master_seed: 20_240_601,
            alpha0: 0.5,
            threads: None,
            mode: StepMode::SkipAhead,
        }
    }
}

impl SimConfig {
    /// Checks the controls against the model rates `r` and `lambda`.
    pub fn validate(&self, r: f64, lambda: f64) -> Result<()> {
        if !(self.dt > 0.0) {
            return Err(Error::Config(format!("dt = {} must be positive", self.dt)));
        }
        if !(lambda * self.dt < 0.1 && r * self.dt < 0.1) {
            return Err(Error::Config(format!(
                "dt = {} too coarse: need lambda*dt < 0.1 and r*dt < 0.1",
                self.dt
            )));
        }
        if !(self.horizon > 0.0) {
            return Err(Error::Config(format!("horizon = {} must be positive", self.horizon)));
        }
        if self.n_paths == 0 {
            return Err(Error::Config("n_paths must be positive".into()));
        }
        if !(self.alpha0 > 0.0 && self.alpha0 < 1.0) {
            return Err(Error::Config(format!("alpha0 = {} must lie in (0, 1)", self.alpha0)));
        }
        if self.threads == Some(0) {
            return Err(Error::Config("threads must be positive".into()));
        }
        Ok(())
    }
}

/// Summary of the per-path stopping times.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StopTimeStats {
    pub mean: f64,
    pub q10: f64,
    pub q50: f64,
    pub q90: f64,
}

/// Monte Carlo estimate of a discounted profit.
#[derive(Debug, Clone, PartialEq)]
pub struct SimResult {
    pub mean: f64,
    pub std_error: f64,
    pub n_paths: usize,
    pub good_state_fraction: f64,
    /// Time at which each path leaves the experimentation regime.
    pub stop_time_stats: StopTimeStats,
}

/// Posterior after a report without news: `a e^{-l dt} / (a e^{-l dt} + 1 - a)`.
pub fn bayes_update(alpha: f64, lambda: f64, dt: f64) -> f64 {
    let keep = alpha * (-lambda * dt).exp();
    let denom = keep + 1.0 - alpha;
    if denom <= 0.0 {
        return alpha;
    }
    keep / denom
}

/// Independent stream for path `path_id`.
pub(crate) fn path_rng(master_seed: u64, path_id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(path_id);
    rng
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct PathOutcome {
    pub value: f64,
    pub good: bool,
    pub stop_time: f64,
}

/// Runs `n` paths, in parallel when allowed, and reduces them in path order.
pub(crate) fn run_paths<F>(n: usize, threads: Option<usize>, f: F) -> Result<SimResult>
where
    F: Fn(u64) -> PathOutcome + Send + Sync,
{
    let collect = || -> Vec<PathOutcome> { (0..n as u64).into_par_iter().map(&f).collect() };
    let outcomes = match threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?
            .install(collect),
        None => collect(),
    };
    Ok(summarize(&outcomes))
}

/// Neumaier summation; keeps the mean of identical values exact.
fn compensated_sum(values: impl Iterator<Item = f64>) -> f64 {
    let (mut sum, mut carry) = (0.0f64, 0.0f64);
    for v in values {
        let t = sum + v;
        carry += if sum.abs() >= v.abs() { (sum - t) + v } else { (v - t) + sum };
        sum = t;
    }
    sum + carry
}

fn summarize(outcomes: &[PathOutcome]) -> SimResult {
    let n = outcomes.len();
    let nf = n as f64;
    let mean = compensated_sum(outcomes.iter().map(|o| o.value)) / nf;
    let var = if n > 1 {
        outcomes.iter().map(|o| (o.value - mean).powi(2)).sum::<f64>() / (nf - 1.0)
    } else {
        0.0
    };
    let good = outcomes.iter().filter(|o| o.good).count() as f64 / nf;
    let mut times: Vec<f64> = outcomes.iter().map(|o| o.stop_time).collect();
    times.sort_by(|a, b| a.total_cmp(b));
    let q = |p: f64| times[((nf - 1.0) * p).round() as usize];
    SimResult {
        mean,
        std_error: (var / nf).sqrt(),
        n_paths: n,
        good_state_fraction: good,
        stop_time_stats: StopTimeStats {
            mean: times.iter().sum::<f64>() / nf,
            q10: q(0.1),
            q50: q(0.5),
            q90: q(0.9),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bayes_update_examples() {
        assert_eq!(bayes_update(1.0, 0.8, 0.125), 1.0);
        assert_eq!(bayes_update(0.0, 0.8, 0.125), 0.0);
        let expected = (-0.1f64).exp() / ((-0.1f64).exp() + 1.0);
        assert!((bayes_update(0.5, 1.0, 0.1) - expected).abs() < 1e-15);
        assert!((bayes_update(0.5, 1.0, 0.1) - 0.475021).abs() < 1e-6);
    }

    #[test]
    fn config_validation() {
        let cfg = SimConfig::default();
        assert!(cfg.validate(0.5, 0.8).is_ok());
        let coarse = SimConfig { dt: 0.5, ..SimConfig::default() };
        assert!(coarse.validate(0.5, 0.8).is_err());
        let bad_alpha = SimConfig { alpha0: 1.0, ..SimConfig::default() };
        assert!(bad_alpha.validate(0.5, 0.8).is_err());
    }

    #[test]
    fn streams_are_reproducible_and_distinct() {
        use rand::Rng;
        let a: u64 = path_rng(7, 3).random();
        let b: u64 = path_rng(7, 3).random();
        let c: u64 = path_rng(7, 4).random();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn summary_statistics() {
        let outs: Vec<PathOutcome> = (0..5)
            .map(|i| PathOutcome { value: i as f64, good: i % 2 == 0, stop_time: i as f64 })
            .collect();
        let s = summarize(&outs);
        assert_eq!(s.mean, 2.0);
        assert!((s.std_error - (2.5f64 / 5.0).sqrt()).abs() < 1e-15);
        assert!((s.good_state_fraction - 0.6).abs() < 1e-15);
        assert_eq!(s.stop_time_stats.q50, 2.0);
    }
}
