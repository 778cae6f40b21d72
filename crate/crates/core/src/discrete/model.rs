use crate::cost_model::CostDistribution;
use crate::error::{domain, Error, Result};
use crate::scalar::{lit, to_f64, Real};

/// Number of periods, possibly unbounded.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Horizon {
    Finite(usize),
    Infinite,
}

/// Which premium enters the recursion: the learning premium `M` (full
/// coverage) or the adjusted premium `N` (partial coverage).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    M,
    N,
}

/// Outcome of the stationary-bonus root search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FixedPoint<S> {
    Root(S),
    /// The premium is not positive; no interior stationary bonus.
    NonPositivePremium,
    /// The root lies beyond the cost cap.
    AboveCap,
}

impl<S: Copy> FixedPoint<S> {
    pub fn root(self) -> Option<S> {
        match self {
            FixedPoint::Root(x) => Some(x),
            _ => None,
        }
    }
}

/// Perfect-learning model: one conclusive report reveals the risky value `R1`.
#[derive(Debug, Clone)]
pub struct DiscreteModel<S> {
    pub horizon: Horizon,
    pub discount: S,
    /// Expected risky value.
    pub er1: S,
    /// Expected value of the better of the two arms.
    pub emax: S,
    /// Safe value.
    pub r2: S,
    pub costs: CostDistribution<S>,
}

impl<S: Real> DiscreteModel<S> {
    pub fn new(
        horizon: Horizon,
        discount: S,
        er1: S,
        emax: S,
        r2: S,
        costs: CostDistribution<S>,
    ) -> Result<Self> {
        if horizon == Horizon::Finite(0) {
            return Err(domain("horizon", 0.0, "positive integer or infinite"));
        }
        if !(discount > S::zero() && discount < S::one()) {
            return Err(domain("discount", to_f64(discount), "(0, 1)"));
        }
        for (name, v) in [("er1", er1), ("emax", emax), ("r2", r2)] {
            if !v.is_finite() {
                return Err(domain(name, to_f64(v), "finite reals"));
            }
        }
        if r2 < S::zero() {
            return Err(domain("r2", to_f64(r2), "[0, inf)"));
        }
        let slack = lit::<S>(1e-12) * (S::one() + emax.abs());
        if emax + slack < er1.max(r2) {
            return Err(Error::Assumption(format!(
                "E max(R1, R2) = {} must be at least max(E R1, R2) = {}",
                to_f64(emax),
                to_f64(er1.max(r2))
            )));
        }
        Ok(Self {
            horizon,
            discount,
            er1,
            emax,
            r2,
            costs,
        })
    }

    /// Learning premium `E max - E R1`.
    pub fn m(&self) -> S {
        self.emax - self.er1
    }

    /// Partial-coverage premium `M + (E R1 - R2) / r`.
    pub fn n(&self) -> S {
        self.m() + (self.er1 - self.r2) / self.discount
    }

    pub fn premium(&self, variant: Variant) -> S {
        match variant {
            Variant::M => self.m(),
            Variant::N => self.n(),
        }
    }

    /// Present-value factor of a unit flow over the horizon.
    pub fn annuity(&self) -> S {
        let r = self.discount;
        match self.horizon {
            Horizon::Finite(t) => (S::one() - r.powi(t as i32)) / (S::one() - r),
            Horizon::Infinite => S::one() / (S::one() - r),
        }
    }

    /// `beta - rent + premium` on the support, `x + premium` elsewhere.
    pub fn psi(&self, x: S, variant: Variant) -> S {
        let p = self.premium(variant);
        if x >= S::zero() && x <= self.costs.cbar() {
            self.costs.beta_raw(x) - self.costs.rent_raw(x) + p
        } else {
            x + p
        }
    }

    /// `(1 - 1/r) beta(x) + premium - rent(x)` on the support.
    pub fn big_psi(&self, x: S, variant: Variant) -> S {
        let r = self.discount;
        (S::one() - S::one() / r) * self.costs.beta_raw(x) + self.premium(variant)
            - self.costs.rent_raw(x)
    }

    /// Whether the stationarity gaps at the cost cap rule out immediate revelation.
    pub fn excludes_immediate_revelation(&self) -> bool {
        let c = self.costs.cbar();
        self.big_psi(c, Variant::M) < S::zero() && self.big_psi(c, Variant::N) < S::zero()
    }

    /// One backward step of the bonus recursion. A negative target is returned
    /// unchanged so that schedule builders can clamp it.
    pub fn gamma_step(&self, b_next: S, variant: Variant) -> S {
        let y = self.discount * self.psi(b_next, variant);
        if y < S::zero() {
            return y;
        }
        self.costs.virtual_inverse(y).unwrap_or(y)
    }

    /// Stationary bonus: root of `(1/r - 1) beta(x) + rent(x) = premium` on `[0, cbar]`.
    pub fn fixed_point_status(&self, variant: Variant) -> FixedPoint<S> {
        let p = self.premium(variant);
        if p <= S::zero() {
            return FixedPoint::NonPositivePremium;
        }
        let k = S::one() / self.discount - S::one();
        let f = |x: S| k * self.costs.beta_raw(x) + self.costs.rent_raw(x) - p;
        let cbar = self.costs.cbar();
        if f(cbar) < S::zero() {
            return FixedPoint::AboveCap;
        }
        match crate::numeric::bisect(f, S::zero(), cbar, S::root_tol()) {
            Some(x) => FixedPoint::Root(x),
            None => FixedPoint::AboveCap,
        }
    }

    pub fn fixed_point(&self, variant: Variant) -> Option<S> {
        self.fixed_point_status(variant).root()
    }

    /// Cross-check of [`fixed_point`](Self::fixed_point) by iterating the
    /// recursion from zero until successive iterates differ by less than `1e-12`.
    pub fn fixed_point_by_iteration(&self, variant: Variant) -> Option<S> {
        let tol = S::root_tol();
        let mut b = S::zero();
        for _ in 0..1_000_000 {
            let next = self.gamma_step(b, variant);
            if (next - b).abs() < tol {
                return (next > S::zero() && next <= self.costs.cbar()).then_some(next);
            }
            if next > self.costs.cbar() * lit::<S>(1e6) {
                return None;
            }
            b = next;
        }
        None
    }

    /// Terminal partial-coverage bonus: `beta(d) = E R1 - R2`, identity below zero.
    pub fn pc_terminal(&self) -> S {
        let y = self.er1 - self.r2;
        if y < S::zero() {
            y
        } else {
            self.costs.virtual_inverse(y).unwrap_or(y)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn base(horizon: Horizon, r2: f64) -> DiscreteModel<f64> {
        let emax = (16.0 + r2 * r2) / 8.0;
        DiscreteModel::new(horizon, 0.95, 2.0, emax, r2, CostDistribution::uniform(1.0).unwrap())
            .unwrap()
    }

    #[test]
    fn psi_examples() {
        let m = base(Horizon::Finite(2), 2.0);
        assert!((m.m() - 0.5).abs() < 1e-15);
        assert!((m.psi(0.0, Variant::M) - 0.5).abs() < 1e-15);
        let x = 0.2375;
        let direct = m.costs.virtual_value(x).unwrap() - m.costs.info_rent(x).unwrap() + 0.5;
        assert!((m.psi(x, Variant::M) - 0.91859375).abs() < 1e-14);
        assert!((m.psi(x, Variant::M) - direct).abs() < 1e-15);
        assert!((m.psi(1.5, Variant::M) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn psi_extension_with_negative_premium() {
        // E R1 = 2, R2 = 2.5, r = 0.5: N = (emax - 2) - 1.
        let m = DiscreteModel::<f64>::new(Horizon::Infinite, 0.5, 2.0, 2.7, 2.5, CostDistribution::uniform(1.0).unwrap()).unwrap();
        assert!((m.n() + 0.3).abs() < 1e-12);
        assert!((m.psi(-0.1, Variant::N) + 0.4).abs() < 1e-12);
        assert!(m.gamma_step(-0.1, Variant::N) < 0.0);
        assert!(m.gamma_step(0.0, Variant::N) < 0.0);
    }

    #[test]
    fn gamma_step_examples() {
        let m = base(Horizon::Finite(2), 2.0);
        assert!((m.gamma_step(0.0, Variant::M) - 0.2375).abs() < 1e-12);
        let r: f64 = 0.95;
        let oracle = (-(1.0 - r) + ((1.0 - r).powi(2) + r * r * 0.5).sqrt()) / r;
        assert!((oracle - 0.656434).abs() < 5e-6);
        assert!((m.gamma_step(oracle, Variant::M) - oracle).abs() < 1e-10);
    }

    #[test]
    fn fixed_points_match_quadratic_roots() {
        let m = base(Horizon::Infinite, 2.0);
        let r: f64 = 0.95;
        // Uniform on [0, 1]: r x^2 + 2 x (1 - r) - r M = 0.
        let oracle = (-(1.0 - r) + ((1.0 - r).powi(2) + r * r * 0.5).sqrt()) / r;
        let b = m.fixed_point(Variant::M).unwrap();
        assert!((b - oracle).abs() < 1e-11);
        let residual = m.costs.virtual_value(b).unwrap() - r * m.psi(b, Variant::M);
        assert!(residual.abs() < 1e-10);
        // E R1 = R2 makes both premiums equal.
        let bn = m.fixed_point(Variant::N).unwrap();
        assert!((bn - oracle).abs() < 1e-11);
        let it = m.fixed_point_by_iteration(Variant::M).unwrap();
        assert!((it - b).abs() < 1e-9);
    }

    #[test]
    fn negative_premium_has_no_fixed_point() {
        let m = DiscreteModel::<f64>::new(Horizon::Infinite, 0.5, 2.0, 2.9, 2.5, CostDistribution::uniform(1.0).unwrap()).unwrap();
        assert!((m.n() + 0.1).abs() < 1e-12);
        assert_eq!(m.fixed_point_status(Variant::N), FixedPoint::NonPositivePremium);
        assert!(m.fixed_point(Variant::N).is_none());
        assert!(m.fixed_point_by_iteration(Variant::N).is_none());
    }

    #[test]
    fn root_above_cap_is_absent() {
        let m = DiscreteModel::new(Horizon::Infinite, 0.5, 2.0, 10.0, 2.0, CostDistribution::uniform(1.0).unwrap()).unwrap();
        assert_eq!(m.fixed_point_status(Variant::M), FixedPoint::AboveCap);
        assert!(!m.excludes_immediate_revelation());
    }

    #[test]
    fn constructor_rejects_bad_inputs() {
        let c = CostDistribution::uniform(1.0).unwrap();
        assert!(DiscreteModel::new(Horizon::Finite(0), 0.9, 2.0, 2.5, 2.0, c.clone()).is_err());
        assert!(DiscreteModel::new(Horizon::Finite(2), 1.0, 2.0, 2.5, 2.0, c.clone()).is_err());
        assert!(DiscreteModel::new(Horizon::Finite(2), 0.9, 2.0, 1.5, 2.0, c).is_err());
    }

    #[test]
    fn annuity_factor() {
        let m = base(Horizon::Finite(2), 2.0);
        assert!((m.annuity() - 1.95).abs() < 1e-14);
        let m = base(Horizon::Infinite, 2.0);
        assert!((m.annuity() - 20.0).abs() < 1e-12);
    }
}
