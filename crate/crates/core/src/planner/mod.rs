//! Social planner benchmark: the planner's value and reporting cutoffs, the
//! implementing allocation/transfer rule, and the surplus generated under
//! the monopolist's policy.

mod mechanism;
mod welfare;

pub use mechanism::{write_mechanism_csv, MechanismRule};
pub use welfare::{compare_welfare, reporting_probabilities, write_welfare_csv, WelfareRow};

use crate::continuous::march::{March, Stop};
use crate::continuous::{Branch, ContinuousModel, Slope, ValueCurve};
use crate::error::{domain, Error, Result};
use crate::scalar::{lit, to_f64, Real};
use crate::strategy::Strategy;

/// Planner value `W` with reporting cutoffs and switching beliefs.
#[derive(Debug, Clone)]
pub struct PlannerSolution<S> {
    pub model: ContinuousModel<S>,
    /// `W` on `[alpha_sa_pc, alpha_fc_nb]`; the `bonuses` field holds the
    /// active reporting cutoff (`C1` on PC nodes, `C2` on FC nodes).
    pub curve: ValueCurve<S>,
    /// `(alpha, C1)` on the partial-coverage region.
    pub c1: Vec<(S, S)>,
    /// `(alpha, C2)` on the full-coverage region.
    pub c2: Vec<(S, S)>,
    pub alpha_sa_pc: S,
    pub alpha_pc_fc: S,
    pub alpha_fc_nb: S,
}

impl<S: Real> ContinuousModel<S> {
    /// Planner slope: the reporting cutoff inverts `r w - offset = lambda G(C)`.
    fn planner_slope(&self, branch: Branch, alpha: S, w: S) -> Result<Slope<S>> {
        let (r, l) = (self.discount_rate, self.arrival_rate);
        let k = (alpha * alpha - alpha) * l;
        if k == S::zero() {
            return Err(Error::Singularity(to_f64(alpha)));
        }
        let y = self.gap(branch, alpha, w) / l;
        let c = self.costs.expected_excess_inverse(y.max(S::zero()))?;
        let b = match branch {
            Branch::Partial => l * c - alpha * self.g() + self.safe_flow,
            Branch::Full => l * c,
        };
        let slope = (b - alpha * l * self.g() / r + l * alpha * w) / k;
        Ok(Slope {
            slope,
            bonus: c,
            capped: false,
            gap: y,
        })
    }

    fn planner_march(
        &self,
        branch: Branch,
        step: S,
    ) -> March<S, impl Fn(S, S) -> Result<Slope<S>> + '_> {
        March {
            rhs: move |a, w| self.planner_slope(branch, a, w),
            label: match branch {
                Branch::Partial => Strategy::PC,
                Branch::Full => Strategy::FC,
            },
            cap: false,
            step,
            bonus_tol: lit::<S>(1e-10) * self.costs.cbar(),
        }
    }

    /// Solves the planner's value from the safe-arm switch to the no-bonus switch.
    pub fn solve_planner(&self, grid_step: S) -> Result<PlannerSolution<S>> {
        if !(grid_step > S::zero() && grid_step < lit(0.1)) {
            return Err(domain("grid_step", to_f64(grid_step), "(0, 0.1)"));
        }
        let a2 = self.cutoff_sa_pc();
        let a3 = self.cutoff_pc_fc();
        let w0 = self.safe_flow / self.discount_rate;
        let mut start = ValueCurve::default();
        start.push(a2, w0, S::zero(), S::zero(), Strategy::PC);
        let launch = lit::<S>(1e-6).min(grid_step / lit(10.0));
        let pc = self
            .planner_march(Branch::Partial, grid_step)
            .run(a2 + launch, w0, Stop::At(a3), start)?;
        let w_switch = *pc.curve.values.last().expect("non-empty segment");
        let fc = self
            .planner_march(Branch::Full, grid_step)
            .run(a3, w_switch, Stop::BonusVanishes, ValueCurve::default())?;
        let c1 = pc.curve.alphas.iter().copied().zip(pc.curve.bonuses.iter().copied()).collect();
        let c2 = fc.curve.alphas.iter().copied().zip(fc.curve.bonuses.iter().copied()).collect();
        let alpha_fc_nb = fc.curve.last_alpha().expect("non-empty segment");
        let mut curve = pc.curve;
        curve.extend_from(&fc.curve);
        Ok(PlannerSolution {
            model: self.clone(),
            curve,
            c1,
            c2,
            alpha_sa_pc: a2,
            alpha_pc_fc: a3,
            alpha_fc_nb,
        })
    }
}

impl<S: Real> PlannerSolution<S> {
    /// Planner value at `alpha`, including the constant tails.
    pub fn value_at(&self, alpha: S) -> S {
        let m = &self.model;
        if alpha < self.alpha_sa_pc {
            m.safe_flow / m.discount_rate
        } else if alpha >= self.alpha_fc_nb {
            alpha * m.g() / m.discount_rate
        } else {
            self.curve.interpolate(alpha).0
        }
    }

    /// Reporting cutoffs `(C1, C2)` at `alpha`; `C2` is zero left of the coverage switch.
    pub fn cutoffs_at(&self, alpha: S) -> (S, S) {
        let m = &self.model;
        if alpha <= self.alpha_sa_pc || alpha >= self.alpha_fc_nb {
            if alpha >= self.alpha_fc_nb {
                let c1 = (alpha * m.g() - m.safe_flow) / m.arrival_rate;
                return (c1.max(S::zero()), S::zero());
            }
            return (S::zero(), S::zero());
        }
        let w = self.curve.interpolate(alpha).0;
        let inv = |y: S| m.costs.expected_excess_inverse(y.max(S::zero())).unwrap_or(S::zero());
        if alpha < self.alpha_pc_fc {
            (inv(m.gap(Branch::Partial, alpha, w) / m.arrival_rate), S::zero())
        } else {
            let c2 = inv(m.gap(Branch::Full, alpha, w) / m.arrival_rate);
            (c2 + (alpha * m.g() - m.safe_flow) / m.arrival_rate, c2)
        }
    }

    /// Marginal value of information `B` recomputed from `(W, W')` at node `i`.
    pub fn information_value(&self, i: usize) -> S {
        let m = &self.model;
        let (a, w, dw) = (self.curve.alphas[i], self.curve.values[i], self.curve.slopes[i]);
        let l = m.arrival_rate;
        (a * a - a) * l * dw + a * l * m.g() / m.discount_rate - l * a * w
    }

    /// Probability that the planner's mechanism elicits a report at `alpha`.
    pub fn reporting_probability(&self, alpha: S) -> S {
        let (c1, c2) = self.cutoffs_at(alpha);
        let c = if alpha < self.alpha_pc_fc { c1 } else { c2 };
        self.model.costs.cdf(c)
    }
}
