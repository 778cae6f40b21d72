use rand::Rng;

use crate::error::{Error, Result};

use super::{bayes_update, path_rng};

const Z_99: f64 = 2.576;

/// Outcome of the posterior check after `k` reports without news.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeliefCheck {
    pub k: usize,
    /// Paths whose first `k` reports brought no news.
    pub survivors: usize,
    pub empirical: f64,
    pub analytic: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub passed: bool,
}

/// Compares the fraction of good states among paths with `k` quiet reports
/// against the Bayesian posterior, using a 99% normal-approximation interval.
pub fn belief_consistency(
    alpha0: f64,
    lambda: f64,
    dt: f64,
    k: usize,
    n_paths: usize,
    seed: u64,
) -> Result<BeliefCheck> {
    if !(alpha0 > 0.0 && alpha0 < 1.0) || !(lambda > 0.0) || !(dt > 0.0) || n_paths == 0 {
        return Err(Error::Config("belief check needs alpha0 in (0,1), positive lambda, dt and paths".into()));
    }
    let news = 1.0 - (-lambda * dt).exp();
    let mut survivors = 0usize;
    let mut good_survivors = 0usize;
    for id in 0..n_paths as u64 {
        let mut rng = path_rng(seed, id);
        let good = rng.random::<f64>() < alpha0;
        let mut quiet = true;
        for _ in 0..k {
            if good && rng.random::<f64>() < news {
                quiet = false;
                break;
            }
        }
        if quiet {
            survivors += 1;
            good_survivors += usize::from(good);
        }
    }
    let analytic = (0..k).fold(alpha0, |a, _| bayes_update(a, lambda, dt));
    let n = survivors.max(1) as f64;
    let empirical = good_survivors as f64 / n;
    let half = Z_99 * (analytic * (1.0 - analytic) / n).sqrt();
    Ok(BeliefCheck {
        k,
        survivors,
        empirical,
        analytic,
        ci_low: analytic - half,
        ci_high: analytic + half,
        passed: survivors > 0 && (empirical - analytic).abs() <= half,
    })
}
