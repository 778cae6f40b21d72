use std::io::Write;

use crate::error::{domain, Result};
use crate::format::g12;
use crate::scalar::{to_f64, Real};

use super::PlannerSolution;

/// Allocation, reporting duty and flow transfer for one agent type.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MechanismRule<S> {
    /// Whether the agent is given the risky arm.
    pub p: bool,
    /// Whether the agent must report; `None` when no risky arm is allocated.
    pub q: Option<bool>,
    /// Transfer from the agent per unit time.
    pub t: S,
}

impl<S: Real> PlannerSolution<S> {
    /// Planner mechanism at belief `alpha` for an agent with reporting cost `c`.
    pub fn mechanism_at(&self, alpha: S, c: S) -> Result<MechanismRule<S>> {
        let m = &self.model;
        if !(alpha > S::zero() && alpha < S::one()) {
            return Err(domain("alpha", to_f64(alpha), "(0, 1)"));
        }
        if !(c >= S::zero() && c <= m.costs.cbar()) {
            return Err(domain("c", to_f64(c), format!("[0, {}]", to_f64(m.costs.cbar()))));
        }
        let risky = alpha * m.g();
        let l = m.arrival_rate;
        if alpha >= self.alpha_fc_nb {
            return Ok(MechanismRule {
                p: true,
                q: Some(false),
                t: risky,
            });
        }
        let (c1, c2) = self.cutoffs_at(alpha);
        let safe = MechanismRule {
            p: false,
            q: None,
            t: m.safe_flow,
        };
        Ok(if alpha > self.alpha_pc_fc {
            if c < c2 {
                MechanismRule {
                    p: true,
                    q: Some(true),
                    t: risky - l * c2,
                }
            } else if c < c1 {
                MechanismRule {
                    p: true,
                    q: Some(false),
                    t: risky,
                }
            } else {
                safe
            }
        } else if c < c1 {
            MechanismRule {
                p: true,
                q: Some(true),
                t: risky - l * c1,
            }
        } else {
            safe
        })
    }

    /// Flow utility of an agent with cost `c` who announces `reported`.
    pub fn agent_utility(&self, alpha: S, c: S, reported: S) -> Result<S> {
        let m = &self.model;
        let rule = self.mechanism_at(alpha, reported)?;
        Ok(if rule.p {
            let duty = if rule.q == Some(true) { m.arrival_rate * c } else { S::zero() };
            -rule.t + alpha * m.g() - duty
        } else {
            -rule.t + m.safe_flow
        })
    }
}

/// Writes `alpha,c,p,q,t` rows over the product of the two grids; `q` is
/// empty when no risky arm is allocated. Transfers are flow rates.
pub fn write_mechanism_csv<S: Real, W: Write>(
    sol: &PlannerSolution<S>,
    alphas: &[S],
    costs: &[S],
    mut out: W,
) -> Result<()> {
    writeln!(out, "alpha,c,p,q,t")?;
    for &a in alphas {
        for &c in costs {
            let rule = sol.mechanism_at(a, c)?;
            let q = match rule.q {
                Some(true) => "1",
                Some(false) => "0",
                None => "",
            };
            writeln!(
                out,
                "{},{},{},{},{}",
                g12(to_f64(a)),
                g12(to_f64(c)),
                u8::from(rule.p),
                q,
                g12(to_f64(rule.t))
            )?;
        }
    }
    Ok(())
}
