use std::io::Write;

use crate::error::{domain, Result};
use crate::format::g12;
use crate::scalar::{lit, to_f64, Real};
use crate::strategy::Strategy;

use super::model::ContinuousModel;

/// Value function sampled on an increasing belief grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueCurve<S> {
    pub alphas: Vec<S>,
    pub values: Vec<S>,
    /// Derivative of the value in the belief.
    pub slopes: Vec<S>,
    pub bonuses: Vec<S>,
    pub regions: Vec<Strategy>,
}

impl<S> Default for ValueCurve<S> {
    fn default() -> Self {
        Self {
            alphas: Vec::new(),
            values: Vec::new(),
            slopes: Vec::new(),
            bonuses: Vec::new(),
            regions: Vec::new(),
        }
    }
}

impl<S: Real> ValueCurve<S> {
    pub fn with_capacity(n: usize) -> Self {
        Self {
            alphas: Vec::with_capacity(n),
            values: Vec::with_capacity(n),
            slopes: Vec::with_capacity(n),
            bonuses: Vec::with_capacity(n),
            regions: Vec::with_capacity(n),
        }
    }

    pub fn len(&self) -> usize {
        self.alphas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alphas.is_empty()
    }

    pub fn push(&mut self, alpha: S, value: S, slope: S, bonus: S, region: Strategy) {
        self.alphas.push(alpha);
        self.values.push(value);
        self.slopes.push(slope);
        self.bonuses.push(bonus);
        self.regions.push(region);
    }

    /// Appends `other`, skipping a leading point that repeats the last belief.
    pub fn extend_from(&mut self, other: &ValueCurve<S>) {
        for i in 0..other.len() {
            if let Some(&last) = self.alphas.last() {
                if other.alphas[i] <= last {
                    continue;
                }
            }
            self.push(
                other.alphas[i],
                other.values[i],
                other.slopes[i],
                other.bonuses[i],
                other.regions[i],
            );
        }
    }

    pub fn first_alpha(&self) -> Option<S> {
        self.alphas.first().copied()
    }

    pub fn last_alpha(&self) -> Option<S> {
        self.alphas.last().copied()
    }

    /// Index `i` with `alphas[i] <= alpha <= alphas[i + 1]`, clamped to the ends.
    fn bracket(&self, alpha: S) -> usize {
        let n = self.alphas.len();
        if n < 2 {
            return 0;
        }
        let idx = self.alphas.partition_point(|&a| a <= alpha);
        idx.saturating_sub(1).min(n - 2)
    }

    /// Linear interpolation of `(value, slope, bonus)` at `alpha`.
    pub fn interpolate(&self, alpha: S) -> (S, S, S) {
        let n = self.alphas.len();
        if n == 1 {
            return (self.values[0], self.slopes[0], self.bonuses[0]);
        }
        let i = self.bracket(alpha);
        let (a0, a1) = (self.alphas[i], self.alphas[i + 1]);
        let t = ((alpha - a0) / (a1 - a0)).max(S::zero()).min(S::one());
        let lerp = |v: &[S]| v[i] + t * (v[i + 1] - v[i]);
        (lerp(&self.values), lerp(&self.slopes), lerp(&self.bonuses))
    }

    /// Writes `alpha,value,bonus,region` rows.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "alpha,value,bonus,region")?;
        for i in 0..self.len() {
            writeln!(
                out,
                "{},{},{},{}",
                g12(to_f64(self.alphas[i])),
                g12(to_f64(self.values[i])),
                g12(to_f64(self.bonuses[i])),
                self.regions[i]
            )?;
        }
        Ok(())
    }
}

/// Solved policy: switching beliefs and the value/bonus curve between them.
#[derive(Debug, Clone)]
pub struct PolicyMap<S> {
    pub model: ContinuousModel<S>,
    pub alpha_sa_pc: S,
    pub alpha_pc_fc: S,
    pub alpha_fc_nb: S,
    pub alpha_pc_ir: Option<S>,
    pub alpha_ir_fc: Option<S>,
    /// Solver nodes on `[alpha_sa_pc, alpha_fc_nb]`.
    pub curve: ValueCurve<S>,
}

/// Default number of export grid points.
pub const EXPORT_POINTS: usize = 2001;

impl<S: Real> PolicyMap<S> {
    pub fn safe_value(&self) -> S {
        self.model.safe_flow / self.model.discount_rate
    }

    pub fn risky_value(&self, alpha: S) -> S {
        alpha * self.model.g() / self.model.discount_rate
    }

    /// Region label from the switching beliefs.
    pub fn region(&self, alpha: S) -> Strategy {
        if alpha < self.alpha_sa_pc {
            Strategy::SA
        } else if alpha >= self.alpha_fc_nb {
            Strategy::NB
        } else if let (Some(lo), Some(hi)) = (self.alpha_pc_ir, self.alpha_ir_fc) {
            if alpha >= lo && alpha <= hi {
                Strategy::IR
            } else if alpha < lo {
                Strategy::PC
            } else {
                Strategy::FC
            }
        } else if alpha < self.alpha_pc_fc {
            Strategy::PC
        } else {
            Strategy::FC
        }
    }

    /// Strategy, bonus and value at `alpha`, interpolating the stored grid.
    pub fn policy_at(&self, alpha: S) -> Result<(Strategy, S, S)> {
        if !(alpha > S::zero() && alpha < S::one()) {
            return Err(domain("alpha", to_f64(alpha), "(0, 1)"));
        }
        Ok(self.lookup(alpha))
    }

    pub(crate) fn lookup(&self, alpha: S) -> (Strategy, S, S) {
        let region = self.region(alpha);
        match region {
            Strategy::SA => (region, S::zero(), self.safe_value()),
            Strategy::NB => (region, S::zero(), self.risky_value(alpha)),
            Strategy::IR => {
                let (v, _, _) = self.curve.interpolate(alpha);
                (region, self.model.costs.cbar(), v)
            }
            _ => {
                let (v, _, b) = self.curve.interpolate(alpha);
                (region, b.max(S::zero()), v)
            }
        }
    }

    /// Value slope at `alpha` (zero on the safe region, `g/r` on the risky one).
    pub fn slope_at(&self, alpha: S) -> S {
        match self.region(alpha) {
            Strategy::SA => S::zero(),
            Strategy::NB => self.model.g() / self.model.discount_rate,
            _ => self.curve.interpolate(alpha).1,
        }
    }

    /// Uniform export grid on `[alpha_sa_pc - 0.05, 0.999]` clipped to `(0, 1)`.
    pub fn export_grid(&self, points: usize) -> Vec<S> {
        let lo = (self.alpha_sa_pc - lit(0.05)).max(lit(1e-6));
        let hi = lit::<S>(0.999).max(lo);
        let n = points.max(2);
        (0..n)
            .map(|i| lo + (hi - lo) * lit::<S>(i as f64 / (n - 1) as f64))
            .collect()
    }

    /// The policy resampled on [`export_grid`](Self::export_grid), including the SA and NB tails.
    pub fn export_curve(&self, points: usize) -> ValueCurve<S> {
        let grid = self.export_grid(points);
        let mut out = ValueCurve::with_capacity(grid.len());
        for a in grid {
            let (region, b, v) = self.lookup(a);
            out.push(a, v, self.slope_at(a), b, region);
        }
        out
    }

    /// `key=value` lines with the switching beliefs.
    pub fn write_cutoffs<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "alpha_sa_pc={}", g12(to_f64(self.alpha_sa_pc)))?;
        writeln!(out, "alpha_pc_fc={}", g12(to_f64(self.alpha_pc_fc)))?;
        writeln!(out, "alpha_fc_nb={}", g12(to_f64(self.alpha_fc_nb)))?;
        if let Some(a) = self.alpha_pc_ir {
            writeln!(out, "alpha_pc_ir={}", g12(to_f64(a)))?;
        }
        if let Some(a) = self.alpha_ir_fc {
            writeln!(out, "alpha_ir_fc={}", g12(to_f64(a)))?;
        }
        Ok(())
    }
}
