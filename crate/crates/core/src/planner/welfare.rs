use std::io::Write;

use crate::continuous::{PolicyMap, ValueCurve};
use crate::error::{domain, Error, Result};
use crate::format::g12;
use crate::scalar::{lit, to_f64, Real};
use crate::strategy::Strategy;

use super::PlannerSolution;

/// The three surplus curves at one belief.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WelfareRow<S> {
    pub alpha: S,
    /// Planner value.
    pub w: S,
    /// Social surplus under the monopolist's policy.
    pub lambda: S,
    /// Monopolist profit.
    pub pi: S,
}

/// Slack allowed in the welfare ordering checks.
pub const WELFARE_SLACK: f64 = 1e-6;

/// Coefficients `(a, f)` of the surplus ODE `L' = a L + f` at `alpha`, or
/// `None` when nobody reports and the surplus equals the stage flow over `r`.
fn surplus_coefficients<S: Real>(policy: &PolicyMap<S>, alpha: S) -> (S, S, Option<(S, S)>) {
    let m = &policy.model;
    let (r, l) = (m.discount_rate, m.arrival_rate);
    let (region, b, _) = policy.lookup(alpha);
    let h = m.costs.cdf(b);
    let mass = m.costs.mass_raw(b);
    let stage = match region {
        Strategy::PC => h * alpha * m.g() + (S::one() - h) * m.safe_flow - mass,
        Strategy::SA => m.safe_flow,
        _ => alpha * m.g() - mass,
    };
    let learn = h * alpha * l * m.g() / r;
    if h <= lit(1e-14) {
        return (stage, learn, None);
    }
    let k = (alpha * alpha - alpha) * l;
    let a = (r + h * alpha * l) / (h * k);
    let f = -(stage + learn) / (h * k);
    (stage, learn, Some((a, f)))
}

impl<S: Real> PolicyMap<S> {
    /// Social surplus generated when the monopolist's bonuses are imposed,
    /// integrated with an exponential midpoint rule on the policy grid
    /// refined to at most `grid_step`.
    pub fn social_surplus(&self, grid_step: S) -> Result<ValueCurve<S>> {
        if !(grid_step > S::zero()) {
            return Err(domain("grid_step", to_f64(grid_step), "(0, inf)"));
        }
        let m = &self.model;
        let r = m.discount_rate;
        let nodes = &self.curve.alphas;
        let mut out = ValueCurve::with_capacity(nodes.len());
        let mut value = m.safe_flow / r;
        let push = |out: &mut ValueCurve<S>, a: S, v: S| {
            let (region, b, _) = self.lookup(a);
            let slope = match surplus_coefficients(self, a).2 {
                Some((ca, cf)) => ca * v + cf,
                None => S::zero(),
            };
            out.push(a, v, slope, b, region);
        };
        push(&mut out, nodes[0], value);
        for win in nodes.windows(2) {
            let (a0, a1) = (win[0], win[1]);
            let span = a1 - a0;
            let pieces = (span / grid_step).ceil().to_usize().unwrap_or(1).max(1);
            let h = span / lit(pieces as f64);
            for j in 0..pieces {
                let lo = a0 + h * lit(j as f64);
                let mid = lo + h / lit(2.0);
                value = match surplus_coefficients(self, mid) {
                    (stage, learn, None) => (stage + learn) / r,
                    (_, _, Some((ca, cf))) => {
                        let e = (ca * h).exp();
                        e * value + (e - S::one()) / ca * cf
                    }
                };
            }
            if !value.is_finite() {
                return Err(Error::Welfare {
                    alpha: to_f64(a1),
                    detail: "surplus integration diverged".into(),
                });
            }
            push(&mut out, a1, value);
        }
        Ok(out)
    }

    /// Surplus at `alpha` from a curve produced by [`social_surplus`](Self::social_surplus).
    pub fn surplus_at(&self, surplus: &ValueCurve<S>, alpha: S) -> S {
        match self.region(alpha) {
            Strategy::SA => self.safe_value(),
            Strategy::NB => self.risky_value(alpha),
            _ => surplus.interpolate(alpha).0,
        }
    }
}

/// Evaluates the three curves on `alphas` and checks `W >= Lambda >= Pi`, with
/// `W = Lambda` beyond the planner's no-bonus switch.
pub fn compare_welfare<S: Real>(
    policy: &PolicyMap<S>,
    planner: &PlannerSolution<S>,
    surplus: &ValueCurve<S>,
    alphas: &[S],
) -> Result<Vec<WelfareRow<S>>> {
    let slack = lit::<S>(WELFARE_SLACK);
    let mut rows = Vec::with_capacity(alphas.len());
    for &a in alphas {
        let row = WelfareRow {
            alpha: a,
            w: planner.value_at(a),
            lambda: policy.surplus_at(surplus, a),
            pi: policy.lookup(a).2,
        };
        let fail = |detail: String| Error::Welfare {
            alpha: to_f64(a),
            detail,
        };
        if row.w < row.lambda - slack {
            return Err(fail(format!("W = {} below Lambda = {}", to_f64(row.w), to_f64(row.lambda))));
        }
        if row.lambda < row.pi - slack {
            return Err(fail(format!("Lambda = {} below Pi = {}", to_f64(row.lambda), to_f64(row.pi))));
        }
        if a >= planner.alpha_fc_nb && (row.w - row.lambda).abs() > slack {
            return Err(fail(format!("W = {} differs from Lambda = {} past the planner's switch", to_f64(row.w), to_f64(row.lambda))));
        }
        rows.push(row);
    }
    Ok(rows)
}

/// `(alpha, planner, monopolist)` reporting probabilities on the monopolist's
/// experimentation beliefs among `alphas`.
pub fn reporting_probabilities<S: Real>(
    policy: &PolicyMap<S>,
    planner: &PlannerSolution<S>,
    alphas: &[S],
) -> Vec<(S, S, S)> {
    alphas
        .iter()
        .filter(|&&a| a >= policy.alpha_sa_pc && a < policy.alpha_fc_nb)
        .map(|&a| {
            let (_, b, _) = policy.lookup(a);
            (a, planner.reporting_probability(a), policy.model.costs.cdf(b))
        })
        .collect()
}

/// Writes `alpha,W,Lambda,Pi` rows.
pub fn write_welfare_csv<S: Real, W: Write>(rows: &[WelfareRow<S>], mut out: W) -> Result<()> {
    writeln!(out, "alpha,W,Lambda,Pi")?;
    for row in rows {
        writeln!(
            out,
            "{},{},{},{}",
            g12(to_f64(row.alpha)),
            g12(to_f64(row.w)),
            g12(to_f64(row.lambda)),
            g12(to_f64(row.pi))
        )?;
    }
    Ok(())
}

impl<S: Real> crate::continuous::ContinuousModel<S> {
    /// Solves the policy, the planner and the surplus curve, then compares
    /// them on the policy's export grid.
    pub fn welfare_compare(&self, grid_step: S) -> Result<Vec<WelfareRow<S>>> {
        let policy = self.solve(grid_step)?;
        let planner = self.solve_planner(grid_step)?;
        let surplus = policy.social_surplus(grid_step)?;
        let grid = policy.export_grid(crate::continuous::EXPORT_POINTS);
        compare_welfare(&policy, &planner, &surplus, &grid)
    }
}
