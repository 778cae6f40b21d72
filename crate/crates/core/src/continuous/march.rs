use crate::error::{Error, Result};
use crate::scalar::{lit, to_f64, Real};
use crate::strategy::Strategy;

use super::curve::ValueCurve;
use super::model::Slope;

const REFINE_TOL: f64 = 1e-12;
const DRIFT_TOL: f64 = 1e-9;
const MAX_SPLITS: u32 = 12;
const STIFF_LIMIT: f64 = 0.5;
const MAX_SUBSTEPS: u32 = 4096;

/// Where a march stops.
#[derive(Debug, Clone, Copy)]
pub(crate) enum Stop<S> {
    /// March exactly to this belief.
    At(S),
    /// March until the bonus reaches zero on the full-coverage branch.
    BonusVanishes,
}

/// Fixed-step RK4 march of one value branch with slope law `rhs`.
pub(crate) struct March<S, F> {
    pub rhs: F,
    /// Region label of uncapped nodes.
    pub label: Strategy,
    /// Whether to track cap crossings.
    pub cap: bool,
    pub step: S,
    /// Bonus level treated as zero by [`Stop::BonusVanishes`].
    pub bonus_tol: S,
}

#[derive(Debug, Clone)]
pub(crate) struct Segment<S> {
    pub curve: ValueCurve<S>,
    pub cap_entries: Vec<S>,
    pub cap_exits: Vec<S>,
}

impl<S: Real, F: Fn(S, S) -> Result<Slope<S>>> March<S, F> {
    fn eval(&self, a: S, w: S) -> Result<Slope<S>> {
        (self.rhs)(a, w)
    }

    fn rk4(&self, a: S, w: S, dt: S) -> Result<S> {
        let half = dt / lit(2.0);
        let k1 = self.eval(a, w)?.slope;
        let k2 = self.eval(a + half, w + half * k1)?.slope;
        let k3 = self.eval(a + half, w + half * k2)?.slope;
        let k4 = self.eval(a + dt, w + dt * k3)?.slope;
        Ok(w + dt / lit(6.0) * (k1 + lit::<S>(2.0) * k2 + lit::<S>(2.0) * k3 + k4))
    }

    fn region(&self, s: &Slope<S>) -> Strategy {
        if s.capped {
            Strategy::IR
        } else {
            self.label
        }
    }

    fn push(&self, curve: &mut ValueCurve<S>, a: S, w: S, s: &Slope<S>) {
        curve.push(a, w, s.slope, s.bonus, self.region(s));
    }

    /// Smallest partial step in `(0, dt]` after which `flipped` holds.
    fn refine<P: Fn(&Slope<S>) -> bool>(&self, a: S, w: S, dt: S, flipped: P) -> Result<(S, S)> {
        let (mut lo, mut hi) = (S::zero(), dt);
        let tol = lit::<S>(REFINE_TOL).max(S::epsilon() * lit(4.0));
        while hi - lo > tol {
            let mid = (lo + hi) / lit(2.0);
            let wm = self.advance(a, w, mid, 0)?;
            if flipped(&self.eval(a + mid, wm)?) {
                hi = mid;
            } else {
                lo = mid;
            }
            if mid == lo || mid == hi {
                break;
            }
        }
        Ok((a + hi, self.advance(a, w, hi, 0)?))
    }

    fn below_branch(&self, s: &Slope<S>, w: S) -> bool {
        self.label == Strategy::PC && !s.capped && s.gap < -lit::<S>(DRIFT_TOL).max(S::root_tol()) * (S::one() + w.abs())
    }

    /// Number of RK4 substeps for a step of `dt` from `(a, w)`, from a finite
    /// difference estimate of the slope's sensitivity to `w`. The bonus grows
    /// like a square root of the Bellman gap, so the sensitivity is unbounded
    /// where the gap vanishes.
    fn substeps(&self, a: S, w: S, dt: S, at: &Slope<S>) -> Result<u32> {
        if !at.capped && at.gap <= S::zero() {
            return Ok(MAX_SUBSTEPS);
        }
        // Keep the probe inside the square-root regime of the current gap.
        let mut dw = lit::<S>(1e-7) * (S::one() + w.abs());
        if !at.capped {
            dw = dw.min(at.gap * lit(0.1)).max(lit::<S>(1e-13).max(S::epsilon() * lit(16.0)) * (S::one() + w.abs()));
        }
        let up = self.eval(a, w + dw)?;
        let jac = ((up.slope - at.slope) / dw).abs();
        let n = (dt * jac / lit(STIFF_LIMIT)).ceil();
        Ok(if n.is_finite() {
            n.to_u32().unwrap_or(MAX_SUBSTEPS).clamp(1, MAX_SUBSTEPS)
        } else {
            MAX_SUBSTEPS
        })
    }

    /// One step of length `dt`, taken as stiffness-limited RK4 substeps and
    /// split further while the end point falls below the partial-coverage branch.
    fn advance(&self, a: S, w: S, dt: S, depth: u32) -> Result<S> {
        let at = self.eval(a, w)?;
        let n = self.substeps(a, w, dt, &at)?;
        let sub = dt / lit(f64::from(n));
        let mut wn = w;
        for i in 0..n {
            wn = self.rk4(a + sub * lit(f64::from(i)), wn, sub)?;
        }
        if depth >= MAX_SPLITS || !self.below_branch(&self.eval(a + dt, wn)?, wn) {
            return Ok(wn);
        }
        let half = dt / lit(2.0);
        let w_mid = self.advance(a, w, half, depth + 1)?;
        self.advance(a + half, w_mid, half, depth + 1)
    }

    /// Marches from `(a0, w0)`, recording cap crossings as extra nodes.
    pub fn run(&self, a0: S, w0: S, stop: Stop<S>, mut curve: ValueCurve<S>) -> Result<Segment<S>> {
        let h = self.step;
        let bonus_tol = self.bonus_tol;
        let mut seg = Segment {
            curve: ValueCurve::default(),
            cap_entries: Vec::new(),
            cap_exits: Vec::new(),
        };
        let (mut a, mut w) = (a0, w0);
        let mut cur = self.eval(a, w)?;
        self.push(&mut curve, a, w, &cur);
        let limit = S::one() - h;
        loop {
            let dt = match stop {
                Stop::At(end) => {
                    let rest = end - a;
                    if rest <= h * lit(1e-9) {
                        break;
                    }
                    if rest <= h * (S::one() + lit(1e-6)) {
                        rest
                    } else {
                        h
                    }
                }
                Stop::BonusVanishes => {
                    if a >= limit {
                        return Err(Error::NonTermination { alpha: to_f64(a) });
                    }
                    h
                }
            };
            let a_next = match stop {
                Stop::At(end) if dt < h || end - (a + dt) <= h * lit(1e-9) => end,
                _ => a + dt,
            };
            let w_next = self.advance(a, w, dt, 0)?;
            let next = self.eval(a_next, w_next)?;
            if self.below_branch(&next, w_next) {
                return Err(Error::StepRejected {
                    alpha: to_f64(a_next),
                    residual: to_f64(next.gap),
                });
            }
            if self.cap && next.capped != cur.capped {
                let want = next.capped;
                let (ae, we) = self.refine(a, w, dt, |s| s.capped == want)?;
                let at = self.eval(ae, we)?;
                if want {
                    seg.cap_entries.push(ae);
                } else {
                    seg.cap_exits.push(ae);
                }
                self.push(&mut curve, ae, we, &at);
                a = ae;
                w = we;
                cur = at;
                continue;
            }
            if let Stop::BonusVanishes = stop {
                if !next.capped && next.bonus <= bonus_tol {
                    let (ae, we) = self.refine(a, w, dt, |s| !s.capped && s.bonus <= bonus_tol)?;
                    let mut at = self.eval(ae, we)?;
                    at.bonus = S::zero();
                    self.push(&mut curve, ae, we, &at);
                    break;
                }
            }
            self.push(&mut curve, a_next, w_next, &next);
            a = a_next;
            w = w_next;
            cur = next;
        }
        seg.curve = curve;
        Ok(seg)
    }
}
