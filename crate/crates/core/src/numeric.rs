//! Scalar root finding, quadrature and monotone interpolation.

use crate::scalar::{lit, Real};

const MAX_BISECT_ITERS: usize = 400;

/// Bisection for a root of `f` on `[lo, hi]`, where `f(lo)` and `f(hi)` have
/// opposite signs (either orientation). Returns `None` without a bracket.
pub fn bisect<S: Real, F: FnMut(S) -> S>(mut f: F, lo: S, hi: S, tol: S) -> Option<S> {
    let (mut a, mut b) = (lo, hi);
    let fa = f(a);
    let fb = f(b);
    if fa == S::zero() {
        return Some(a);
    }
    if fb == S::zero() {
        return Some(b);
    }
    if fa.signum() == fb.signum() || fa.is_nan() || fb.is_nan() {
        return None;
    }
    let increasing = fa < S::zero();
    let two = lit::<S>(2.0);
    for _ in 0..MAX_BISECT_ITERS {
        let m = (a + b) / two;
        if (b - a).abs() <= tol || m == a || m == b {
            return Some(m);
        }
        let fm = f(m);
        if fm == S::zero() {
            return Some(m);
        }
        if (fm < S::zero()) == increasing {
            a = m;
        } else {
            b = m;
        }
    }
    Some((a + b) / two)
}

/// Adaptive Simpson quadrature of `f` over `[a, b]` to absolute tolerance `tol`.
pub fn adaptive_simpson<S: Real, F: Fn(S) -> S>(f: &F, a: S, b: S, tol: S) -> S {
    if a == b {
        return S::zero();
    }
    let two = lit::<S>(2.0);
    let m = (a + b) / two;
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = simpson(a, b, fa, fm, fb);
    simpson_rec(f, a, b, fa, fm, fb, whole, tol, 48)
}

fn simpson<S: Real>(a: S, b: S, fa: S, fm: S, fb: S) -> S {
    (b - a) / lit::<S>(6.0) * (fa + lit::<S>(4.0) * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn simpson_rec<S: Real, F: Fn(S) -> S>(
    f: &F,
    a: S,
    b: S,
    fa: S,
    fm: S,
    fb: S,
    whole: S,
    tol: S,
    depth: u32,
) -> S {
    let two = lit::<S>(2.0);
    let m = (a + b) / two;
    let lm = (a + m) / two;
    let rm = (m + b) / two;
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= lit::<S>(15.0) * tol {
        return left + right + delta / lit::<S>(15.0);
    }
    simpson_rec(f, a, m, fa, flm, fm, left, tol / two, depth - 1)
        + simpson_rec(f, m, b, fm, frm, fb, right, tol / two, depth - 1)
}

/// Three-point end slope, limited so the end segment stays monotone.
fn edge_slope<S: Real>(h0: S, h1: S, s0: S, s1: S) -> S {
    let d = ((lit::<S>(2.0) * h0 + h1) * s0 - h0 * s1) / (h0 + h1);
    if d.signum() != s0.signum() {
        S::zero()
    } else if s0.signum() != s1.signum() && d.abs() > lit::<S>(3.0) * s0.abs() {
        lit::<S>(3.0) * s0
    } else {
        d
    }
}

/// Monotone piecewise-cubic Hermite interpolant (Fritsch-Carlson slopes).
#[derive(Debug, Clone)]
pub struct MonotoneCubic<S> {
    xs: Vec<S>,
    ys: Vec<S>,
    ds: Vec<S>,
    /// Cumulative integral of the interpolant up to each knot.
    cum: Vec<S>,
}

impl<S: Real> MonotoneCubic<S> {
    /// Builds the interpolant; `xs` must be strictly increasing with at least two knots.
    pub fn new(xs: Vec<S>, ys: Vec<S>) -> Option<Self> {
        let n = xs.len();
        if n < 2 || ys.len() != n || xs.windows(2).any(|w| w[1] <= w[0]) {
            return None;
        }
        let slopes: Vec<S> = (0..n - 1)
            .map(|i| (ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i]))
            .collect();
        let mut ds = vec![S::zero(); n];
        if n == 2 {
            ds[0] = slopes[0];
            ds[1] = slopes[0];
        } else {
            ds[0] = edge_slope(xs[1] - xs[0], xs[2] - xs[1], slopes[0], slopes[1]);
            ds[n - 1] = edge_slope(
                xs[n - 1] - xs[n - 2],
                xs[n - 2] - xs[n - 3],
                slopes[n - 2],
                slopes[n - 3],
            );
        }
        for i in 1..n - 1 {
            let (s0, s1) = (slopes[i - 1], slopes[i]);
            if s0 * s1 <= S::zero() {
                ds[i] = S::zero();
            } else {
                let h0 = xs[i] - xs[i - 1];
                let h1 = xs[i + 1] - xs[i];
                let w0 = lit::<S>(2.0) * h1 + h0;
                let w1 = h1 + lit::<S>(2.0) * h0;
                ds[i] = (w0 + w1) / (w0 / s0 + w1 / s1);
            }
        }
        for i in 0..n - 1 {
            let s = slopes[i];
            if s == S::zero() {
                ds[i] = S::zero();
                ds[i + 1] = S::zero();
                continue;
            }
            let a = ds[i] / s;
            let b = ds[i + 1] / s;
            let r2 = a * a + b * b;
            let nine = lit::<S>(9.0);
            if r2 > nine {
                let tau = lit::<S>(3.0) / r2.sqrt();
                ds[i] = tau * a * s;
                ds[i + 1] = tau * b * s;
            }
        }
        let mut cum = vec![S::zero(); n];
        for i in 0..n - 1 {
            let h = xs[i + 1] - xs[i];
            let seg = h * (ys[i] + ys[i + 1]) / lit::<S>(2.0)
                + h * h * (ds[i] - ds[i + 1]) / lit::<S>(12.0);
            cum[i + 1] = cum[i] + seg;
        }
        Some(Self { xs, ys, ds, cum })
    }

    pub fn knots(&self) -> &[S] {
        &self.xs
    }

    fn segment(&self, x: S) -> usize {
        let n = self.xs.len();
        match self
            .xs
            .binary_search_by(|k| k.partial_cmp(&x).unwrap_or(std::cmp::Ordering::Less))
        {
            Ok(i) => i.min(n - 2),
            Err(0) => 0,
            Err(i) => (i - 1).min(n - 2),
        }
    }

    /// Value, derivative and integral from the first knot, on segment `i` at `x`.
    fn eval_parts(&self, x: S) -> (S, S, S) {
        let i = self.segment(x);
        let h = self.xs[i + 1] - self.xs[i];
        let t = (x - self.xs[i]) / h;
        let (y0, y1, d0, d1) = (self.ys[i], self.ys[i + 1], self.ds[i], self.ds[i + 1]);
        let one = S::one();
        let two = lit::<S>(2.0);
        let three = lit::<S>(3.0);
        let t2 = t * t;
        let t3 = t2 * t;
        let h00 = two * t3 - three * t2 + one;
        let h10 = t3 - two * t2 + t;
        let h01 = -two * t3 + three * t2;
        let h11 = t3 - t2;
        let value = h00 * y0 + h10 * h * d0 + h01 * y1 + h11 * h * d1;
        let six = lit::<S>(6.0);
        let deriv = ((six * t2 - six * t) * y0
            + (three * t2 - lit::<S>(4.0) * t + one) * h * d0
            + (-six * t2 + six * t) * y1
            + (three * t2 - two * t) * h * d1)
            / h;
        let half = lit::<S>(0.5);
        let t4 = t3 * t;
        let i00 = half * t4 - t3 + t;
        let i10 = t4 / lit::<S>(4.0) - two * t3 / three + half * t2;
        let i01 = -half * t4 + t3;
        let i11 = t4 / lit::<S>(4.0) - t3 / three;
        let integral = self.cum[i] + h * (i00 * y0 + i10 * h * d0 + i01 * y1 + i11 * h * d1);
        (value, deriv, integral)
    }

    pub fn value(&self, x: S) -> S {
        self.eval_parts(x).0
    }

    pub fn derivative(&self, x: S) -> S {
        self.eval_parts(x).1
    }

    /// Integral of the interpolant from the first knot to `x`.
    pub fn integral(&self, x: S) -> S {
        self.eval_parts(x).2
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bisect_finds_sqrt_two() {
        let r = bisect(|x: f64| x * x - 2.0, 0.0, 2.0, 1e-14).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-13);
    }

    #[test]
    fn bisect_handles_decreasing_functions() {
        let r = bisect(|x: f64| 1.0 - x, 0.0, 3.0, 1e-14).unwrap();
        assert!((r - 1.0).abs() < 1e-13);
    }

    #[test]
    fn bisect_without_bracket_is_none() {
        assert!(bisect(|x: f64| x * x + 1.0, -1.0, 1.0, 1e-12).is_none());
    }

    #[test]
    fn simpson_integrates_smooth_functions() {
        let v = adaptive_simpson(&|x: f64| x.sin(), 0.0, std::f64::consts::PI, 1e-12);
        assert!((v - 2.0).abs() < 1e-10);
    }

    #[test]
    fn cubic_reproduces_linear_data_exactly() {
        let xs: Vec<f64> = (0..11).map(|i| i as f64 / 10.0).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 0.5 * x + 0.1).collect();
        let c = MonotoneCubic::new(xs, ys).unwrap();
        for &x in &[0.0, 0.033, 0.5, 0.71, 1.0] {
            assert!((c.value(x) - (0.5 * x + 0.1)).abs() < 1e-14);
            assert!((c.derivative(x) - 0.5).abs() < 1e-12);
            assert!((c.integral(x) - (0.25 * x * x + 0.1 * x)).abs() < 1e-14);
        }
    }

    #[test]
    fn cubic_stays_monotone_on_steps() {
        let xs = vec![0.0, 1.0, 2.0, 3.0, 4.0];
        let ys = vec![0.0, 0.0, 1.0, 1.0, 2.0];
        let c = MonotoneCubic::new(xs, ys).unwrap();
        let mut prev = c.value(0.0);
        for k in 1..=400 {
            let v = c.value(k as f64 / 100.0);
            assert!(v >= prev - 1e-15);
            prev = v;
        }
    }

    #[test]
    fn cubic_integral_matches_quadrature() {
        let xs: Vec<f64> = (0..9).map(|i| i as f64 / 8.0).collect();
        let ys: Vec<f64> = xs.iter().map(|x| x.powi(3)).collect();
        let c = MonotoneCubic::new(xs, ys).unwrap();
        let q = adaptive_simpson(&|x| c.value(x), 0.0, 0.77, 1e-13);
        assert!((c.integral(0.77) - q).abs() < 1e-11);
    }
}
