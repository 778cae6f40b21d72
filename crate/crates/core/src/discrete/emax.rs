use std::fmt;
use std::sync::Arc;

use crate::error::{domain, Error, Result};
use crate::numeric::{adaptive_simpson, bisect};
use crate::scalar::{lit, to_f64, Real};

const QUAD_TOL: f64 = 1e-10;

/// Law of the risky value `R1`.
#[derive(Clone)]
pub enum R1Law {
    /// Uniform on `[0, upper]`.
    UniformR1 { upper: f64 },
    /// `rho * U[0, 4] + (1 - rho) * U[1, 3]` with independent components.
    RhoMix { rho: f64 },
    /// Arbitrary law given by its CDF, supported on `[lo, hi]`.
    NumericQuadrature {
        cdf: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
        lo: f64,
        hi: f64,
    },
}

impl fmt::Debug for R1Law {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            R1Law::UniformR1 { upper } => write!(f, "UniformR1 {{ upper: {upper} }}"),
            R1Law::RhoMix { rho } => write!(f, "RhoMix {{ rho: {rho} }}"),
            R1Law::NumericQuadrature { lo, hi, .. } => {
                write!(f, "NumericQuadrature {{ lo: {lo}, hi: {hi} }}")
            }
        }
    }
}

/// CDF of the sum of independent `U[a1, b1]` and `U[a2, b2]`.
fn uniform_sum_cdf(w: f64, a1: f64, b1: f64, a2: f64, b2: f64) -> f64 {
    let q = |t: f64| if t > 0.0 { t * t / 2.0 } else { 0.0 };
    let area = (b1 - a1) * (b2 - a2);
    ((q(w - a1 - a2) - q(w - b1 - a2) - q(w - a1 - b2) + q(w - b1 - b2)) / area).clamp(0.0, 1.0)
}

impl R1Law {
    pub fn validate(&self) -> Result<()> {
        match *self {
            R1Law::UniformR1 { upper } if !(upper > 0.0 && upper.is_finite()) => {
                Err(domain("upper", upper, "(0, inf)"))
            }
            R1Law::RhoMix { rho } if !(rho > 0.0 && rho < 1.0) => Err(domain("rho", rho, "(0, 1)")),
            R1Law::NumericQuadrature { lo, hi, .. } if !(lo.is_finite() && hi.is_finite() && lo < hi) => {
                Err(domain("hi", hi, "finite and above lo"))
            }
            _ => Ok(()),
        }
    }

    /// Support `[lo, hi]`.
    pub fn support(&self) -> (f64, f64) {
        match *self {
            R1Law::UniformR1 { upper } => (0.0, upper),
            R1Law::RhoMix { rho } => (1.0 - rho, 3.0 + rho),
            R1Law::NumericQuadrature { lo, hi, .. } => (lo, hi),
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match self {
            R1Law::UniformR1 { upper } => (x / upper).clamp(0.0, 1.0),
            R1Law::RhoMix { rho } => {
                let rho = *rho;
                uniform_sum_cdf(x, 0.0, 4.0 * rho, 1.0 - rho, 3.0 * (1.0 - rho))
            }
            R1Law::NumericQuadrature { cdf, lo, hi } => {
                if x <= *lo {
                    0.0
                } else if x >= *hi {
                    1.0
                } else {
                    cdf(x).clamp(0.0, 1.0)
                }
            }
        }
    }

    /// Breakpoints where the CDF is not smooth.
    fn kinks(&self) -> Vec<f64> {
        match *self {
            R1Law::RhoMix { rho } => {
                let mut k = vec![1.0 - rho, 3.0 * (1.0 - rho), 1.0 + 3.0 * rho, 3.0 + rho];
                k.sort_by(|a, b| a.total_cmp(b));
                k
            }
            _ => {
                let (lo, hi) = self.support();
                vec![lo, hi]
            }
        }
    }

    /// `int_from^to (1 - F)` split at the kinks of `F`.
    fn survival_integral(&self, from: f64, to: f64) -> f64 {
        let mut pts: Vec<f64> = self.kinks().into_iter().filter(|&k| k > from && k < to).collect();
        pts.insert(0, from);
        pts.push(to);
        pts.windows(2)
            .map(|w| adaptive_simpson(&|x: f64| 1.0 - self.cdf(x), w[0], w[1], QUAD_TOL))
            .sum()
    }

    pub fn mean(&self) -> f64 {
        match *self {
            R1Law::UniformR1 { upper } => upper / 2.0,
            R1Law::RhoMix { .. } => 2.0,
            R1Law::NumericQuadrature { lo, hi, .. } => lo + self.survival_integral(lo, hi),
        }
    }

    /// Quantile function, used for sampling.
    pub fn quantile(&self, u: f64) -> f64 {
        match *self {
            R1Law::UniformR1 { upper } => u * upper,
            _ => {
                let (lo, hi) = self.support();
                bisect(|x| self.cdf(x) - u, lo, hi, 1e-13).unwrap_or(if u <= 0.5 { lo } else { hi })
            }
        }
    }
}

/// `E max(R1, r2)` for the given law.
pub fn emax_oracle<S: Real>(law: &R1Law, r2: S) -> Result<S> {
    law.validate()?;
    let r2f = to_f64(r2);
    if !(r2f >= 0.0) || !r2f.is_finite() {
        return Err(domain("r2", r2f, "[0, inf)"));
    }
    let v = match *law {
        R1Law::UniformR1 { upper } => {
            if r2f >= upper {
                r2f
            } else {
                (upper * upper + r2f * r2f) / (2.0 * upper)
            }
        }
        R1Law::RhoMix { rho } if r2f == 3.0 => {
            if rho < 2.0 / 3.0 {
                (18.0 + (12.0 - 15.0 * rho) / (2.0 * (1.0 - rho)) + rho * (rho + 9.0) / (6.0 * (1.0 - rho)))
                    / 8.0
            } else {
                (58.0 / 3.0 + 13.0 * rho / 3.0 + 4.0 / (3.0 * rho)) / 8.0
            }
        }
        _ => {
            let (lo, hi) = law.support();
            if r2f >= hi {
                r2f
            } else if r2f <= lo {
                law.mean()
            } else {
                r2f + law.survival_integral(r2f, hi)
            }
        }
    };
    S::from_f64(v).ok_or_else(|| Error::Invariant("E max not representable".into()))
        .map(|x: S| x.max(lit(0.0)))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Independent 2-D Simpson oracle for the rho mixture at safe value `r2`.
    fn rho_oracle(rho: f64, r2: f64) -> f64 {
        let inner = |x: f64| {
            adaptive_simpson(
                &|y: f64| (rho * x + (1.0 - rho) * y).max(r2) / 8.0,
                1.0,
                3.0,
                1e-12,
            )
        };
        adaptive_simpson(&inner, 0.0, 4.0, 1e-11)
    }

    #[test]
    fn uniform_closed_form() {
        let law = R1Law::UniformR1 { upper: 4.0 };
        assert!((emax_oracle(&law, 2.0f64).unwrap() - 2.5).abs() < 1e-15);
        for x in [2.5, 3.0, 6.0] {
            let law = R1Law::UniformR1 { upper: x };
            let v: f64 = emax_oracle(&law, 2.0).unwrap();
            assert!((v - (x * x + 4.0) / (2.0 * x)).abs() < 1e-14);
        }
    }

    #[test]
    fn rho_branches_meet() {
        let rho: f64 = 2.0 / 3.0;
        let a = (18.0 + (12.0 - 15.0 * rho) / (2.0 * (1.0 - rho)) + rho * (rho + 9.0) / (6.0 * (1.0 - rho))) / 8.0;
        let b = (58.0 / 3.0 + 13.0 * rho / 3.0 + 4.0 / (3.0 * rho)) / 8.0;
        assert!((a - b).abs() < 1e-12);
        let v: f64 = emax_oracle(&R1Law::RhoMix { rho }, 3.0).unwrap();
        assert!((v - 218.0 / 72.0).abs() < 1e-12);
        let v: f64 = emax_oracle(&R1Law::RhoMix { rho: 0.8 }, 3.0).unwrap();
        assert!((v - 3.058333333333).abs() < 1e-9);
    }

    #[test]
    fn rho_closed_form_matches_quadrature() {
        for rho in [0.1, 0.3, 0.5, 2.0 / 3.0, 0.8, 0.95] {
            let v: f64 = emax_oracle(&R1Law::RhoMix { rho }, 3.0).unwrap();
            assert!((v - rho_oracle(rho, 3.0)).abs() < 1e-6, "rho = {rho}");
        }
    }

    #[test]
    fn rho_generic_path_matches_quadrature() {
        for (rho, r2) in [(0.3, 2.0), (0.7, 2.5), (0.5, 3.4)] {
            let v: f64 = emax_oracle(&R1Law::RhoMix { rho }, r2).unwrap();
            assert!((v - rho_oracle(rho, r2)).abs() < 1e-7, "rho = {rho}, r2 = {r2}");
        }
    }

    #[test]
    fn numeric_law_matches_uniform() {
        let law = R1Law::NumericQuadrature {
            cdf: Arc::new(|x| x / 4.0),
            lo: 0.0,
            hi: 4.0,
        };
        for r2 in [0.0, 1.0, 2.0, 3.3, 5.0] {
            let v: f64 = emax_oracle(&law, r2).unwrap();
            let exact: f64 = emax_oracle(&R1Law::UniformR1 { upper: 4.0 }, r2).unwrap();
            assert!((v - exact).abs() < 1e-9, "r2 = {r2}");
        }
        assert!((law.mean() - 2.0).abs() < 1e-10);
    }

    #[test]
    fn invalid_parameters_are_rejected() {
        assert!(emax_oracle(&R1Law::RhoMix { rho: 1.2 }, 3.0f64).is_err());
        assert!(emax_oracle(&R1Law::UniformR1 { upper: 0.0 }, 1.0f64).is_err());
        assert!(emax_oracle(&R1Law::UniformR1 { upper: 4.0 }, -1.0f64).is_err());
    }

    #[test]
    fn mixture_mean_and_quantile() {
        let law = R1Law::RhoMix { rho: 0.4 };
        let (lo, hi) = law.support();
        let m = lo + law.survival_integral(lo, hi);
        assert!((m - 2.0).abs() < 1e-9);
        let q = law.quantile(0.5);
        assert!((law.cdf(q) - 0.5).abs() < 1e-10);
    }
}
