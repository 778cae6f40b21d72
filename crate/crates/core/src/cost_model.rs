//! Reporting-cost distributions on `[0, cbar]` and their virtual-value machinery.

use std::fs::File;
use std::io::Read;
use std::path::Path;
use std::sync::Arc;

use crate::error::{domain, Error, Result};
use crate::numeric::{bisect, MonotoneCubic};
use crate::scalar::{lit, to_f64, Real};

const DENSITY_FLOOR: f64 = 1e-12;
const MONOTONE_CHECK_POINTS: usize = 4001;

/// Representation of the cost law.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CostKind {
    UniformOnZeroToCbar,
    NumericTabulated,
}

#[derive(Debug, Clone)]
enum Law<S> {
    Uniform,
    Tabulated(Arc<MonotoneCubic<S>>),
}

/// Cost law `H` with density `h` supported on `[0, cbar]`.
#[derive(Debug, Clone)]
pub struct CostDistribution<S> {
    cbar: S,
    law: Law<S>,
}

impl<S: Real> CostDistribution<S> {
    /// Uniform law on `[0, cbar]`.
    pub fn uniform(cbar: S) -> Result<Self> {
        if !(cbar > S::zero()) || !cbar.is_finite() {
            return Err(domain("cbar", to_f64(cbar), "(0, inf)"));
        }
        Ok(Self {
            cbar,
            law: Law::Uniform,
        })
    }

    /// Tabulated law from samples `(x_i, H(x_i))` with `x_0 = 0`, `H(x_0) = 0` and
    /// `H(x_last) = 1`; both columns strictly increasing.
    pub fn tabulated(xs: Vec<S>, hs: Vec<S>) -> Result<Self> {
        if xs.len() < 2 || xs.len() != hs.len() {
            return Err(Error::Invariant(
                "tabulated law needs at least two (x, H) rows of equal length".into(),
            ));
        }
        let edge_tol = lit::<S>(1e-9);
        if xs[0].abs() > edge_tol || hs[0].abs() > edge_tol {
            return Err(Error::Invariant("tabulated law must start at (0, 0)".into()));
        }
        if (hs[hs.len() - 1] - S::one()).abs() > edge_tol {
            return Err(Error::Invariant("tabulated law must end at H = 1".into()));
        }
        if xs.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Invariant(
                "tabulated cost grid must be strictly increasing".into(),
            ));
        }
        if hs.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Invariant(
                "tabulated H must be strictly increasing".into(),
            ));
        }
        let mut xs = xs;
        let mut hs = hs;
        xs[0] = S::zero();
        hs[0] = S::zero();
        let last = hs.len() - 1;
        hs[last] = S::one();
        let cbar = xs[last];
        let cubic = MonotoneCubic::new(xs, hs)
            .ok_or_else(|| Error::Invariant("tabulated law could not be interpolated".into()))?;
        let dist = Self {
            cbar,
            law: Law::Tabulated(Arc::new(cubic)),
        };
        dist.check_virtual_value_monotone()?;
        Ok(dist)
    }

    /// Reads a two-column CSV `(x, H(x))` with a header row.
    pub fn from_csv_reader<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let mut xs = Vec::new();
        let mut hs = Vec::new();
        for (line, rec) in rdr.records().enumerate() {
            let rec = rec?;
            if rec.len() < 2 {
                return Err(Error::Invariant(format!(
                    "cost table row {} has fewer than two columns",
                    line + 2
                )));
            }
            let parse = |s: &str| -> Result<S> {
                s.parse::<f64>()
                    .ok()
                    .and_then(S::from_f64)
                    .ok_or_else(|| Error::Invariant(format!("cost table value '{s}' is not a number")))
            };
            xs.push(parse(&rec[0])?);
            hs.push(parse(&rec[1])?);
        }
        Self::tabulated(xs, hs)
    }

    /// Loads a tabulated law from a CSV file.
    pub fn load_csv(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_csv_reader(File::open(path)?)
    }

    fn check_virtual_value_monotone(&self) -> Result<()> {
        let n = MONOTONE_CHECK_POINTS;
        let mut prev = -S::one();
        for i in 0..n {
            let x = self.cbar * lit::<S>(i as f64 / (n - 1) as f64);
            let (h_cdf, h_pdf) = self.raw(x);
            let beta = x + h_cdf / h_pdf;
            if i > 0 && !(beta > prev) {
                return Err(Error::Assumption(format!(
                    "virtual value x + H/h must be strictly increasing (fails near x = {})",
                    to_f64(x)
                )));
            }
            prev = beta;
        }
        Ok(())
    }

    pub fn kind(&self) -> CostKind {
        match self.law {
            Law::Uniform => CostKind::UniformOnZeroToCbar,
            Law::Tabulated(_) => CostKind::NumericTabulated,
        }
    }

    /// Upper support bound.
    pub fn cbar(&self) -> S {
        self.cbar
    }

    /// `(H(x), h(x))` with `x` clamped into the support.
    pub(crate) fn raw(&self, x: S) -> (S, S) {
        let x = x.max(S::zero()).min(self.cbar);
        match &self.law {
            Law::Uniform => (x / self.cbar, S::one() / self.cbar),
            Law::Tabulated(c) => {
                let cdf = c.value(x).max(S::zero()).min(S::one());
                let pdf = c.derivative(x).max(lit(DENSITY_FLOOR));
                (cdf, pdf)
            }
        }
    }

    /// `H(x)` extended by 0 below and 1 above the support.
    pub fn cdf(&self, x: S) -> S {
        if x <= S::zero() {
            S::zero()
        } else if x >= self.cbar {
            S::one()
        } else {
            self.raw(x).0
        }
    }

    fn check_support(&self, what: &'static str, x: S) -> Result<()> {
        let slack = self.cbar * lit::<S>(1e-12);
        if x.is_nan() || x < -slack || x > self.cbar + slack {
            return Err(domain(what, to_f64(x), format!("[0, {}]", to_f64(self.cbar))));
        }
        Ok(())
    }

    /// Returns `(H(x), h(x))`.
    pub fn eval(&self, x: S) -> Result<(S, S)> {
        self.check_support("x", x)?;
        Ok(self.raw(x))
    }

    pub(crate) fn beta_raw(&self, x: S) -> S {
        match self.law {
            Law::Uniform => lit::<S>(2.0) * x.max(S::zero()).min(self.cbar),
            _ => {
                let (c, d) = self.raw(x);
                x.max(S::zero()).min(self.cbar) + c / d
            }
        }
    }

    pub(crate) fn rent_raw(&self, x: S) -> S {
        let (c, d) = self.raw(x);
        c * c / d
    }

    /// Virtual value `x + H(x)/h(x)`.
    pub fn virtual_value(&self, x: S) -> Result<S> {
        self.check_support("x", x)?;
        Ok(self.beta_raw(x))
    }

    /// Information rent `H(x)^2 / h(x)`.
    pub fn info_rent(&self, x: S) -> Result<S> {
        self.check_support("x", x)?;
        Ok(self.rent_raw(x))
    }

    /// Inverse of the virtual value; beyond `beta(cbar)` the identity extension applies.
    pub fn virtual_inverse(&self, y: S) -> Result<S> {
        if y.is_nan() || y < S::zero() {
            return Err(Error::NegativeInput(to_f64(y)));
        }
        let top = self.beta_raw(self.cbar);
        if y > top {
            return Ok(y);
        }
        match self.law {
            Law::Uniform => Ok(y / lit::<S>(2.0)),
            _ => Ok(bisect(|x| self.beta_raw(x) - y, S::zero(), self.cbar, S::root_tol())
                .unwrap_or(self.cbar)),
        }
    }

    /// Inverse of the information rent on `[0, info_rent(cbar)]`.
    pub fn info_rent_inverse(&self, y: S) -> Result<S> {
        if y.is_nan() || y < S::zero() {
            return Err(Error::NegativeInput(to_f64(y)));
        }
        let top = self.rent_raw(self.cbar);
        if y > top * (S::one() + lit::<S>(1e-12)) {
            return Err(Error::Range {
                value: to_f64(y),
                max: to_f64(top),
            });
        }
        let y = y.min(top);
        match self.law {
            Law::Uniform => Ok((self.cbar * y).sqrt().min(self.cbar)),
            _ => Ok(bisect(|x| self.rent_raw(x) - y, S::zero(), self.cbar, S::root_tol())
                .unwrap_or(self.cbar)),
        }
    }

    /// Integral of `H` over `[0, b]` for `b` inside the support.
    fn cdf_integral(&self, b: S) -> S {
        let b = b.max(S::zero()).min(self.cbar);
        match &self.law {
            Law::Uniform => b * b / (lit::<S>(2.0) * self.cbar),
            Law::Tabulated(c) => c.integral(b),
        }
    }

    /// Truncated cost mass `int_0^b x dH(x)`.
    pub fn truncated_cost_mass(&self, b: S) -> Result<S> {
        self.check_support("b", b)?;
        Ok(self.mass_raw(b))
    }

    pub(crate) fn mass_raw(&self, b: S) -> S {
        let b = b.max(S::zero()).min(self.cbar);
        match self.law {
            Law::Uniform => b * b / (lit::<S>(2.0) * self.cbar),
            _ => (b * self.raw(b).0 - self.cdf_integral(b)).max(S::zero()),
        }
    }

    /// Expected excess `E[(k - c)^+] = int_0^k H`, defined for every `k >= 0`.
    pub fn expected_excess(&self, k: S) -> S {
        if k <= S::zero() {
            return S::zero();
        }
        if k <= self.cbar {
            self.cdf_integral(k)
        } else {
            self.cdf_integral(self.cbar) + (k - self.cbar)
        }
    }

    /// Inverse of [`expected_excess`](Self::expected_excess) for `y >= 0`.
    pub fn expected_excess_inverse(&self, y: S) -> Result<S> {
        if y.is_nan() || y < S::zero() {
            return Err(Error::NegativeInput(to_f64(y)));
        }
        let at_cap = self.cdf_integral(self.cbar);
        if y >= at_cap {
            return Ok(self.cbar + (y - at_cap));
        }
        match self.law {
            Law::Uniform => Ok((lit::<S>(2.0) * self.cbar * y).sqrt()),
            _ => Ok(bisect(
                |k| self.cdf_integral(k) - y,
                S::zero(),
                self.cbar,
                S::root_tol(),
            )
            .unwrap_or(self.cbar)),
        }
    }

    /// Mean cost.
    pub fn mean(&self) -> S {
        self.cbar - self.cdf_integral(self.cbar)
    }

    /// Quantile function `H^{-1}(u)` for `u` in `[0, 1]`.
    pub fn quantile(&self, u: S) -> S {
        let u = u.max(S::zero()).min(S::one());
        match self.law {
            Law::Uniform => u * self.cbar,
            _ => bisect(|x| self.raw(x).0 - u, S::zero(), self.cbar, S::root_tol())
                .unwrap_or(self.cbar),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn uni(c: f64) -> CostDistribution<f64> {
        CostDistribution::uniform(c).unwrap()
    }

    /// H(x) = (x + x^2)/2 on [0, 1], so h(x) = (1 + 2x)/2.
    fn quad_law(n: usize) -> CostDistribution<f64> {
        let xs: Vec<f64> = (0..=n).map(|i| i as f64 / n as f64).collect();
        let hs: Vec<f64> = xs.iter().map(|x| (x + x * x) / 2.0).collect();
        CostDistribution::tabulated(xs, hs).unwrap()
    }

    #[test]
    fn uniform_eval_examples() {
        assert_eq!(uni(1.0).eval(0.0).unwrap(), (0.0, 1.0));
        assert_eq!(uni(1.0).eval(0.4).unwrap(), (0.4, 1.0));
        let (c, d) = uni(0.8).eval(0.4).unwrap();
        assert!((c - 0.5).abs() < 1e-15 && (d - 1.25).abs() < 1e-15);
        assert!(uni(1.0).eval(1.2).is_err());
        assert!(uni(1.0).eval(-0.1).is_err());
    }

    #[test]
    fn uniform_virtual_value_and_rent() {
        let u = uni(1.0);
        assert!((u.virtual_value(0.3).unwrap() - 0.6).abs() < 1e-15);
        assert_eq!(u.virtual_value(0.0).unwrap(), 0.0);
        assert!((uni(0.8).virtual_value(0.4).unwrap() - 0.8).abs() < 1e-15);
        assert!((u.info_rent(0.5).unwrap() - 0.25).abs() < 1e-15);
        assert_eq!(u.info_rent(0.0).unwrap(), 0.0);
        assert!((u.info_rent(1.0).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn uniform_inverses() {
        let u = uni(1.0);
        assert!((u.virtual_inverse(0.6).unwrap() - 0.3).abs() < 1e-12);
        assert_eq!(u.virtual_inverse(0.0).unwrap(), 0.0);
        assert_eq!(u.virtual_inverse(2.5).unwrap(), 2.5);
        assert!(matches!(u.virtual_inverse(-0.1), Err(Error::NegativeInput(_))));
        assert!((u.info_rent_inverse(0.25).unwrap() - 0.5).abs() < 1e-12);
        assert_eq!(u.info_rent_inverse(0.0).unwrap(), 0.0);
        assert!((u.info_rent_inverse(1.0).unwrap() - 1.0).abs() < 1e-12);
        assert!(matches!(u.info_rent_inverse(1.5), Err(Error::Range { .. })));
    }

    #[test]
    fn uniform_truncated_mass() {
        let u = uni(1.0);
        assert!((u.truncated_cost_mass(0.4).unwrap() - 0.08).abs() < 1e-15);
        assert_eq!(u.truncated_cost_mass(0.0).unwrap(), 0.0);
        assert!((u.truncated_cost_mass(1.0).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn tabulated_law_matches_closed_forms() {
        let q = quad_law(400);
        for &x in &[0.0, 0.1, 0.37, 0.5, 0.93, 1.0] {
            let (c, d) = q.eval(x).unwrap();
            assert!((c - (x + x * x) / 2.0).abs() < 1e-9, "cdf at {x}");
            assert!((d - (1.0 + 2.0 * x) / 2.0).abs() < 1e-4, "pdf at {x}");
            let mass = x * x / 4.0 + x * x * x / 3.0;
            assert!((q.truncated_cost_mass(x).unwrap() - mass).abs() < 1e-8);
        }
        let beta_half = 0.5 + 0.375 / 1.0;
        assert!((q.virtual_inverse(beta_half).unwrap() - 0.5).abs() < 1e-6);
    }

    #[test]
    fn tabulated_law_rejects_bad_tables() {
        let bad = CostDistribution::<f64>::tabulated(vec![0.0, 0.5, 0.4, 1.0], vec![0.0, 0.2, 0.5, 1.0]);
        assert!(matches!(bad, Err(Error::Invariant(_))));
        let flat = CostDistribution::<f64>::tabulated(vec![0.0, 0.5, 1.0], vec![0.0, 0.5, 0.5]);
        assert!(matches!(flat, Err(Error::Invariant(_))));
        let short = CostDistribution::<f64>::tabulated(vec![0.0, 1.0], vec![0.0, 0.9]);
        assert!(matches!(short, Err(Error::Invariant(_))));
    }

    #[test]
    fn csv_loader_reads_header_and_rows() {
        let text = "x,H\n0,0\n0.5,0.5\n1,1\n";
        let d = CostDistribution::<f64>::from_csv_reader(text.as_bytes()).unwrap();
        assert_eq!(d.kind(), CostKind::NumericTabulated);
        assert!((d.cdf(0.25) - 0.25).abs() < 1e-12);
        assert!((d.cbar() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn expected_excess_round_trip() {
        for d in [uni(1.0), quad_law(200)] {
            for &k in &[0.0, 0.2, 0.7, 1.0, 1.6] {
                let y = d.expected_excess(k);
                assert!((d.expected_excess_inverse(y).unwrap() - k).abs() < 1e-9);
            }
        }
        assert!((uni(1.0).expected_excess(0.6) - 0.18).abs() < 1e-15);
    }

    #[test]
    fn works_in_single_precision() {
        let u = CostDistribution::<f32>::uniform(1.0).unwrap();
        assert!((u.virtual_inverse(0.6).unwrap() - 0.3).abs() < 1e-6);
        assert!((u.info_rent_inverse(0.25).unwrap() - 0.5).abs() < 1e-6);
    }

    proptest! {
        #[test]
        fn virtual_value_round_trip(cbar in 0.2f64..5.0, t in 0.0f64..1.0, tab in any::<bool>()) {
            let d = if tab { quad_law(300) } else { uni(cbar) };
            let x = t * d.cbar();
            let y = d.virtual_value(x).unwrap();
            prop_assert!((d.virtual_inverse(y).unwrap() - x).abs() < 1e-10);
            let rent = d.info_rent(x).unwrap();
            prop_assert!((d.info_rent_inverse(rent).unwrap() - x).abs() < 1e-9);
        }

        #[test]
        fn monotone_structure(r in 0.01f64..0.99, tab in any::<bool>()) {
            let d = if tab { quad_law(300) } else { uni(1.0) };
            let n = 400;
            let mut prev: Option<(f64, f64, f64, f64)> = None;
            for i in 0..=n {
                let x = i as f64 / n as f64 * d.cbar();
                let b = d.virtual_value(x).unwrap();
                let k = d.info_rent(x).unwrap();
                let diff = b - k;
                let weighted = (1.0 / r - 1.0) * b + k;
                if let Some((pb, pk, pd, pw)) = prev {
                    prop_assert!(b > pb);
                    prop_assert!(k > pk);
                    if i < n {
                        prop_assert!(diff > pd);
                    }
                    prop_assert!(weighted > pw);
                }
                prev = Some((b, k, diff, weighted));
                prop_assert!(d.truncated_cost_mass(x).unwrap() <= x * d.cdf(x) + 1e-15);
            }
        }
    }
}
