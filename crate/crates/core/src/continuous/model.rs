use crate::cost_model::CostDistribution;
use crate::error::{domain, Error, Result};
use crate::numeric::bisect;
use crate::scalar::{lit, to_f64, Real};

/// Which flow the seller collects from agents that do not report.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    /// Non-reporters buy the safe arm.
    Partial,
    /// Everyone buys the risky arm.
    Full,
}

/// Right-hand side of the value ODE at one point.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Slope<S> {
    pub slope: S,
    pub bonus: S,
    pub capped: bool,
    /// Bellman gap before clamping at zero; negative values mean the point
    /// lies below the branch.
    pub gap: S,
}

/// Exponential good-news bandit: a lump `z` arrives at rate `lambda` in the
/// good state, the safe arm pays the flow `s`, and the seller discounts at `r`.
#[derive(Debug, Clone)]
pub struct ContinuousModel<S> {
    pub discount_rate: S,
    pub arrival_rate: S,
    pub lump_value: S,
    pub safe_flow: S,
    pub costs: CostDistribution<S>,
    /// Treat the cost cap as non-binding even when the sufficient bound fails.
    pub assume_large_cbar: bool,
}

impl<S: Real> ContinuousModel<S> {
    pub fn new(r: S, lambda: S, z: S, s: S, costs: CostDistribution<S>) -> Result<Self> {
        for (name, v) in [("r", r), ("lambda", lambda), ("z", z), ("s", s)] {
            if !(v > S::zero()) || !v.is_finite() {
                return Err(domain(name, to_f64(v), "(0, inf)"));
            }
        }
        if !(lambda * z > s) {
            return Err(Error::Assumption(format!(
                "g = lambda*z > s > 0 violated (g = {}, s = {})",
                to_f64(lambda * z),
                to_f64(s)
            )));
        }
        Ok(Self {
            discount_rate: r,
            arrival_rate: lambda,
            lump_value: z,
            safe_flow: s,
            costs,
            assume_large_cbar: false,
        })
    }

    pub fn with_large_cbar_assumed(mut self, assume: bool) -> Self {
        self.assume_large_cbar = assume;
        self
    }

    /// Expected flow of the risky arm in the good state, `lambda * z`.
    pub fn g(&self) -> S {
        self.arrival_rate * self.lump_value
    }

    /// Sufficient cost-cap bound above which the cap never binds.
    pub fn cbar_bound(&self) -> S {
        (self.arrival_rate / self.discount_rate + S::one()) * (self.g() - self.safe_flow)
    }

    /// Whether the large-cap solution applies.
    pub fn ir_admissible(&self) -> bool {
        self.assume_large_cbar || self.costs.cbar() > self.cbar_bound()
    }

    /// Belief at which the seller starts experimenting with partial coverage.
    pub fn cutoff_sa_pc(&self) -> S {
        let (r, l, s, g) = (self.discount_rate, self.arrival_rate, self.safe_flow, self.g());
        r * s / (l * (g - s) + r * g)
    }

    /// Belief at which the myopic flows of the two arms coincide.
    pub fn cutoff_pc_fc(&self) -> S {
        self.safe_flow / self.g()
    }

    /// Stopping belief of a seller restricted to immediate revelation or the safe arm.
    pub fn ir_only_cutoff(&self) -> S {
        let (r, l, s, g) = (self.discount_rate, self.arrival_rate, self.safe_flow, self.g());
        r * (self.costs.cbar() + s) / (l * (g - s) + r * g)
    }

    /// Stopping point `(alpha, bonus)` of a seller restricted to full coverage
    /// or the safe arm.
    pub fn naive_fc_boundary(&self) -> Result<(S, S)> {
        let (r, l, s, g) = (self.discount_rate, self.arrival_rate, self.safe_flow, self.g());
        let top = self.costs.rent_raw(self.costs.cbar());
        let hi = s / g;
        let lo = ((s - top) / g).max(S::zero());
        let bonus = |a: S| {
            let y = (s - a * g).max(S::zero()).min(top);
            self.costs.info_rent_inverse(y).unwrap_or(self.costs.cbar())
        };
        let f = |a: S| self.costs.beta_raw(bonus(a)) - a * l * (g - s) / r;
        let alpha = bisect(f, lo, hi, lit(1e-14)).ok_or_else(|| {
            Error::NoRoot("full-coverage stopping system has no solution in (0,1) x (0,cbar)".into())
        })?;
        if !(alpha > S::zero() && alpha < S::one()) {
            return Err(Error::NoRoot(format!(
                "full-coverage stopping belief {} outside (0,1)",
                to_f64(alpha)
            )));
        }
        Ok((alpha, bonus(alpha)))
    }

    /// Flow that non-reporters generate on `branch` at belief `alpha`.
    pub(crate) fn offset(&self, branch: Branch, alpha: S) -> S {
        match branch {
            Branch::Partial => self.safe_flow,
            Branch::Full => alpha * self.g(),
        }
    }

    /// Bellman gap `r w - offset`, which equals the information rent of the bonus.
    pub(crate) fn gap(&self, branch: Branch, alpha: S, w: S) -> S {
        self.discount_rate * w - self.offset(branch, alpha)
    }

    /// Value slope and bonus on `branch`. With `cap` set, a gap above the
    /// rent at the cost cap switches to the immediate-revelation law.
    pub(crate) fn slope(&self, branch: Branch, alpha: S, w: S, cap: bool) -> Result<Slope<S>> {
        let (r, l, s) = (self.discount_rate, self.arrival_rate, self.safe_flow);
        let k = (alpha * alpha - alpha) * l;
        if k == S::zero() || !k.is_finite() {
            return Err(Error::Singularity(to_f64(alpha)));
        }
        let learn = alpha * l * self.g() / r;
        let x = self.gap(branch, alpha, w);
        let top = self.costs.rent_raw(self.costs.cbar());
        if x >= top {
            if !cap {
                return Err(Error::Range {
                    value: to_f64(x),
                    max: to_f64(top),
                });
            }
            let cbar = self.costs.cbar();
            let num = r * w - alpha * self.g() - learn + cbar + alpha * l * w;
            return Ok(Slope {
                slope: num / k,
                bonus: cbar,
                capped: true,
                gap: x,
            });
        }
        let b = self.costs.info_rent_inverse(x.max(S::zero()))?;
        let beta = self.costs.beta_raw(b);
        let num = match branch {
            Branch::Partial => beta - alpha * self.g() + s - learn + alpha * l * w,
            Branch::Full => beta + alpha * l * w - learn,
        };
        Ok(Slope {
            slope: num / k,
            bonus: b,
            capped: false,
            gap: x,
        })
    }

    /// ODE residual `(a^2 - a) lambda w' - numerator` at a solved point.
    pub fn ode_residual(&self, branch: Branch, alpha: S, w: S, dw: S, bonus: S) -> S {
        let (r, l, s) = (self.discount_rate, self.arrival_rate, self.safe_flow);
        let k = (alpha * alpha - alpha) * l;
        let learn = alpha * l * self.g() / r;
        let beta = self.costs.beta_raw(bonus);
        let num = match branch {
            Branch::Partial => beta - alpha * self.g() + s - learn + alpha * l * w,
            Branch::Full => beta + alpha * l * w - learn,
        };
        k * dw - num
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn large_cap() -> ContinuousModel<f64> {
        ContinuousModel::new(0.5, 0.8, 7.0, 2.8, CostDistribution::uniform(1.0).unwrap()).unwrap()
    }

    #[test]
    fn closed_form_cutoffs() {
        let m = large_cap();
        assert!((m.cutoff_sa_pc() - 1.4 / 5.04).abs() < 1e-15);
        assert!((m.cutoff_pc_fc() - 0.5).abs() < 1e-15);
        let mut slow = large_cap();
        slow.discount_rate = 0.9;
        assert_eq!(slow.cutoff_pc_fc(), m.cutoff_pc_fc());
        let q = ContinuousModel::<f64>::new(0.5, 0.8, 7.0, 5.6 * 0.25, CostDistribution::uniform(1.0).unwrap()).unwrap();
        assert!((q.cutoff_pc_fc() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn cutoff_limits() {
        let tiny_s = ContinuousModel::new(0.5, 0.8, 7.0, 1e-9, CostDistribution::uniform(1.0).unwrap()).unwrap();
        assert!(tiny_s.cutoff_sa_pc() < 1e-9);
        let patient = ContinuousModel::new(1e-9, 0.8, 7.0, 2.8, CostDistribution::uniform(1.0).unwrap()).unwrap();
        assert!(patient.cutoff_sa_pc() < 1e-8);
    }

    #[test]
    fn naive_boundary_matches_uniform_closed_form() {
        let m = large_cap();
        let (a1, b1) = m.naive_fc_boundary().unwrap();
        let (g, s) = (5.6f64, 2.8f64);
        let big_a = 0.8 * (g - s) / 0.5;
        let closed = (-2.0 * g + 2.0 * (g * g + big_a * big_a * s).sqrt()) / (big_a * big_a);
        assert!((a1 - closed).abs() < 1e-10);
        assert!((a1 - 0.37441).abs() < 1e-5);
        let r1 = m.costs.virtual_value(b1).unwrap() - a1 * 0.8 * (g - s) / 0.5;
        let r2 = s - a1 * g - m.costs.info_rent(b1).unwrap();
        assert!(r1.abs() < 1e-10 && r2.abs() < 1e-10);
        assert!(a1 > m.cutoff_sa_pc() && a1 < m.cutoff_pc_fc());
    }

    #[test]
    fn ir_benchmark_and_admissibility() {
        let m = ContinuousModel::<f64>::new(0.5, 0.8, 20.0, 8.0, CostDistribution::uniform(1.0).unwrap()).unwrap();
        assert!((m.ir_only_cutoff() - 0.3125).abs() < 1e-12);
        assert!(!m.ir_admissible());
        assert!(!large_cap().ir_admissible());
        assert!(large_cap().with_large_cbar_assumed(true).ir_admissible());
    }

    #[test]
    fn rejects_safe_flow_above_risky_flow() {
        let err = ContinuousModel::new(0.5, 0.8, 7.0, 6.0, CostDistribution::uniform(1.0).unwrap()).unwrap_err();
        assert!(err.to_string().contains("g = lambda*z > s > 0"));
    }

    #[test]
    fn slope_is_continuous_across_the_cap() {
        let m = large_cap();
        let top = m.costs.info_rent(1.0).unwrap();
        for (branch, alpha) in [(Branch::Partial, 0.45), (Branch::Full, 0.6)] {
            let w = (top + m.offset(branch, alpha)) / 0.5;
            let below = m.slope(branch, alpha, w - 1e-9, true).unwrap();
            let above = m.slope(branch, alpha, w + 1e-9, true).unwrap();
            assert!(!below.capped && above.capped);
            assert!((below.slope - above.slope).abs() < 1e-5);
        }
    }
}
