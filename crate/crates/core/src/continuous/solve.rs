use crate::error::{Error, Result};
use crate::scalar::{lit, to_f64, Real};
use crate::strategy::Strategy;

use super::curve::{PolicyMap, ValueCurve};
use super::march::{March, Segment, Stop};
use super::model::{Branch, ContinuousModel};

/// Default marching step in the belief.
pub const DEFAULT_GRID_STEP: f64 = 1e-4;
const LAUNCH_OFFSET: f64 = 1e-6;

fn cap_binds<S>(e: Error) -> Error {
    match e {
        Error::Range { value, max } => Error::Regime(format!(
            "bonus cap binds (information rent {value} exceeds {max}); use the immediate-revelation solver"
        )),
        other => other,
    }
}

impl<S: Real> ContinuousModel<S> {
    fn check_step(&self, grid_step: S) -> Result<()> {
        if !(grid_step > S::zero() && grid_step < lit(0.1)) {
            return Err(crate::error::domain("grid_step", to_f64(grid_step), "(0, 0.1)"));
        }
        Ok(())
    }

    fn march(
        &self,
        branch: Branch,
        cap: bool,
        step: S,
    ) -> March<S, impl Fn(S, S) -> Result<super::model::Slope<S>> + '_> {
        March {
            rhs: move |a, w| self.slope(branch, a, w, cap),
            label: match branch {
                Branch::Partial => Strategy::PC,
                Branch::Full => Strategy::FC,
            },
            cap,
            step,
            bonus_tol: lit::<S>(1e-10) * self.costs.cbar(),
        }
    }

    /// Partial-coverage march from the safe-arm pasting point up to `stop`.
    fn pc_segment(&self, grid_step: S, cap: bool, stop: Stop<S>) -> Result<Segment<S>> {
        self.check_step(grid_step)?;
        let a2 = self.cutoff_sa_pc();
        if !(a2 > S::zero() && a2 < S::one()) {
            return Err(Error::Singularity(to_f64(a2)));
        }
        let u0 = self.safe_flow / self.discount_rate;
        let mut curve = ValueCurve::default();
        curve.push(a2, u0, S::zero(), S::zero(), Strategy::PC);
        let launch = lit::<S>(LAUNCH_OFFSET).min(grid_step / lit(10.0));
        self.march(Branch::Partial, cap, grid_step)
            .run(a2 + launch, u0, stop, curve)
    }

    /// Partial-coverage value from the safe-arm switch to the coverage switch.
    pub fn solve_pc_curve(&self, grid_step: S) -> Result<ValueCurve<S>> {
        let end = self.cutoff_pc_fc();
        Ok(self
            .pc_segment(grid_step, false, Stop::At(end))
            .map_err(cap_binds::<S>)?
            .curve)
    }

    /// Full-coverage value from the coverage switch until the bonus vanishes;
    /// the last node is the switch to no bonus.
    pub fn solve_fc_curve(&self, u_at_switch: S, grid_step: S) -> Result<ValueCurve<S>> {
        self.check_step(grid_step)?;
        Ok(self
            .march(Branch::Full, false, grid_step)
            .run(self.cutoff_pc_fc(), u_at_switch, Stop::BonusVanishes, ValueCurve::default())
            .map_err(cap_binds::<S>)?
            .curve)
    }

    fn compose(&self, grid_step: S, cap: bool) -> Result<PolicyMap<S>> {
        let a3 = self.cutoff_pc_fc();
        let pc = self.pc_segment(grid_step, cap, Stop::At(a3))?;
        let u_switch = *pc.curve.values.last().expect("non-empty segment");
        let fc = self
            .march(Branch::Full, cap, grid_step)
            .run(a3, u_switch, Stop::BonusVanishes, ValueCurve::default())?;
        let mut curve = pc.curve;
        curve.extend_from(&fc.curve);
        let alpha_fc_nb = fc.curve.last_alpha().expect("non-empty segment");
        let entries: Vec<S> = pc.cap_entries.iter().chain(&fc.cap_entries).copied().collect();
        let exits: Vec<S> = pc.cap_exits.iter().chain(&fc.cap_exits).copied().collect();
        let (alpha_pc_ir, alpha_ir_fc) = match (entries.first(), exits.last()) {
            (Some(&lo), Some(&hi)) => (Some(lo), Some(hi)),
            (None, None) => (None, None),
            _ => {
                return Err(Error::Regime(
                    "bonus cap entered but never released before the no-bonus switch".into(),
                ))
            }
        };
        Ok(PolicyMap {
            model: self.clone(),
            alpha_sa_pc: self.cutoff_sa_pc(),
            alpha_pc_fc: a3,
            alpha_fc_nb,
            alpha_pc_ir,
            alpha_ir_fc,
            curve,
        })
    }

    /// Full policy when the cost cap never binds.
    pub fn solve_policy(&self, grid_step: S) -> Result<PolicyMap<S>> {
        if !self.ir_admissible() {
            return Err(Error::Regime(format!(
                "cost cap {} is below the large-cap bound {}; use the immediate-revelation solver",
                to_f64(self.costs.cbar()),
                to_f64(self.cbar_bound())
            )));
        }
        self.compose(grid_step, false).map_err(cap_binds::<S>)
    }

    /// Full policy with the bonus capped at the cost cap, including the
    /// immediate-revelation segment where the cap binds.
    pub fn solve_policy_with_ir(&self, grid_step: S) -> Result<PolicyMap<S>> {
        if self.ir_admissible() {
            return Err(Error::Regime(
                "cost cap satisfies the large-cap bound; use the unconstrained solver".into(),
            ));
        }
        self.compose(grid_step, true)
    }

    /// Dispatches on [`ir_admissible`](Self::ir_admissible).
    pub fn solve(&self, grid_step: S) -> Result<PolicyMap<S>> {
        if self.ir_admissible() {
            self.solve_policy(grid_step)
        } else {
            self.solve_policy_with_ir(grid_step)
        }
    }

    /// Value of a seller restricted to full coverage or the safe arm, on its
    /// experimentation interval.
    pub fn naive_fc_curve(&self, grid_step: S) -> Result<ValueCurve<S>> {
        self.check_step(grid_step)?;
        let (a1, _) = self.naive_fc_boundary()?;
        let v0 = self.safe_flow / self.discount_rate;
        Ok(self
            .march(Branch::Full, true, grid_step)
            .run(a1, v0, Stop::BonusVanishes, ValueCurve::default())?
            .curve)
    }

    /// Value of a seller restricted to partial coverage or the safe arm, up to belief 0.999.
    pub fn naive_pc_curve(&self, grid_step: S) -> Result<ValueCurve<S>> {
        Ok(self.pc_segment(grid_step, true, Stop::At(lit(0.999)))?.curve)
    }

    /// Belief where the full-coverage slope first reaches `g/r`, by linear
    /// interpolation of the stored slopes.
    pub fn fc_nb_tangency(&self, map: &PolicyMap<S>) -> Option<S> {
        let target = self.g() / self.discount_rate;
        let c = &map.curve;
        let start = c.alphas.partition_point(|&a| a < map.alpha_pc_fc);
        let mut prev: Option<usize> = None;
        for i in start..c.len() {
            if c.regions[i] != Strategy::FC {
                prev = None;
                continue;
            }
            if c.slopes[i] >= target {
                return Some(match prev {
                    Some(p) if c.slopes[p] < c.slopes[i] => {
                        let t = (target - c.slopes[p]) / (c.slopes[i] - c.slopes[p]);
                        c.alphas[p] + t * (c.alphas[i] - c.alphas[p])
                    }
                    _ => c.alphas[i],
                });
            }
            prev = Some(i);
        }
        None
    }
}
