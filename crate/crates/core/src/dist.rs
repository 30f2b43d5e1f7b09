//! Distributions of risks on `[0, 1]`.
//!
//! [`Distribution`] is the abstraction the mapping code works against: a CDF
//! on the unit interval with an optional density and quantile function. The
//! three named two-parameter families implement it, as do the triangular
//! distributions and mixtures used for the mode/median counterexamples.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::real::Real;
use crate::special::{
    expit, ln_beta, reg_inc_beta_unchecked, std_normal_cdf, std_normal_pdf, std_normal_quantile,
};

/// A distribution with support in `[0, 1]`.
///
/// `cdf` must satisfy `cdf(0) = 0`, `cdf(1) = 1` and be nondecreasing;
/// arguments outside the unit interval evaluate to the nearest limit.
pub trait Distribution<T: Real> {
    fn cdf(&self, x: T) -> T;

    fn pdf(&self, _x: T) -> Option<T> {
        None
    }

    fn quantile(&self, _p: T) -> Option<T> {
        None
    }
}

impl<T: Real, D: Distribution<T> + ?Sized> Distribution<T> for &D {
    fn cdf(&self, x: T) -> T {
        (**self).cdf(x)
    }
    fn pdf(&self, x: T) -> Option<T> {
        (**self).pdf(x)
    }
    fn quantile(&self, p: T) -> Option<T> {
        (**self).quantile(p)
    }
}

/// A distribution given only by its CDF.
#[derive(Clone, Copy)]
pub struct CdfFn<F>(pub F);

impl<T: Real, F: Fn(T) -> T> Distribution<T> for CdfFn<F> {
    fn cdf(&self, x: T) -> T {
        if x <= T::zero() {
            T::zero()
        } else if x >= T::one() {
            T::one()
        } else {
            (self.0)(x)
        }
    }
}

fn check_finite<T: Real>(what: &str, v: T) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("{what} must be finite, got {v}")))
    }
}

/// Beta(α, β).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Beta<T> {
    alpha: T,
    beta: T,
    #[serde(skip)]
    ln_b: T,
}

impl<T: Real> Beta<T> {
    pub fn new(alpha: T, beta: T) -> Result<Self> {
        check_finite("alpha", alpha)?;
        check_finite("beta", beta)?;
        if !(alpha > T::zero() && beta > T::zero()) {
            return Err(Error::domain(format!(
                "beta shapes must be positive, got alpha = {alpha}, beta = {beta}"
            )));
        }
        Ok(Self {
            alpha,
            beta,
            ln_b: ln_beta(alpha, beta),
        })
    }

    pub fn alpha(&self) -> T {
        self.alpha
    }

    pub fn beta(&self) -> T {
        self.beta
    }

    pub fn mean(&self) -> T {
        self.alpha / (self.alpha + self.beta)
    }
}

impl<T: Real> Distribution<T> for Beta<T> {
    fn cdf(&self, x: T) -> T {
        reg_inc_beta_unchecked(x, self.alpha, self.beta, self.ln_b)
    }

    fn pdf(&self, x: T) -> Option<T> {
        if x < T::zero() || x > T::one() {
            return Some(T::zero());
        }
        let one = T::one();
        Some(((self.alpha - one) * x.ln() + (self.beta - one) * (-x).ln_1p() - self.ln_b).exp())
    }
}

/// Distribution of `expit(Z)` with `Z ~ Normal(μ, σ²)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LogitNormal<T> {
    mu: T,
    sigma: T,
}

impl<T: Real> LogitNormal<T> {
    pub fn new(mu: T, sigma: T) -> Result<Self> {
        check_finite("mu", mu)?;
        check_finite("sigma", sigma)?;
        if !(sigma > T::zero()) {
            return Err(Error::domain(format!(
                "sigma must be positive, got {sigma}"
            )));
        }
        Ok(Self { mu, sigma })
    }

    pub fn mu(&self) -> T {
        self.mu
    }

    pub fn sigma(&self) -> T {
        self.sigma
    }
}

impl<T: Real> Distribution<T> for LogitNormal<T> {
    fn cdf(&self, x: T) -> T {
        if x <= T::zero() {
            return T::zero();
        }
        if x >= T::one() {
            return T::one();
        }
        let logit = x.ln() - (-x).ln_1p();
        std_normal_cdf((logit - self.mu) / self.sigma)
    }

    fn pdf(&self, x: T) -> Option<T> {
        if x <= T::zero() || x >= T::one() {
            return Some(T::zero());
        }
        let logit = x.ln() - (-x).ln_1p();
        let z = (logit - self.mu) / self.sigma;
        Some(std_normal_pdf(z) / (self.sigma * x * (T::one() - x)))
    }

    fn quantile(&self, p: T) -> Option<T> {
        let z = std_normal_quantile(p).ok()?;
        Some(expit(self.mu + self.sigma * z))
    }
}

/// Distribution of `Φ(Z)` with `Z ~ Normal(μ, σ²)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProbitNormal<T> {
    mu: T,
    sigma: T,
}

impl<T: Real> ProbitNormal<T> {
    pub fn new(mu: T, sigma: T) -> Result<Self> {
        check_finite("mu", mu)?;
        check_finite("sigma", sigma)?;
        if !(sigma > T::zero()) {
            return Err(Error::domain(format!(
                "sigma must be positive, got {sigma}"
            )));
        }
        Ok(Self { mu, sigma })
    }

    pub fn mu(&self) -> T {
        self.mu
    }

    pub fn sigma(&self) -> T {
        self.sigma
    }

    /// Closed-form mean `Φ(μ / √(1 + σ²))`.
    pub fn mean(&self) -> T {
        std_normal_cdf(self.mu / (T::one() + self.sigma * self.sigma).sqrt())
    }
}

impl<T: Real> Distribution<T> for ProbitNormal<T> {
    fn cdf(&self, x: T) -> T {
        match std_normal_quantile(x) {
            Ok(q) => std_normal_cdf((q - self.mu) / self.sigma),
            Err(_) if x <= T::zero() => T::zero(),
            Err(_) if x >= T::one() => T::one(),
            Err(_) => x,
        }
    }

    fn pdf(&self, x: T) -> Option<T> {
        match std_normal_quantile(x) {
            Ok(q) => {
                Some(std_normal_pdf((q - self.mu) / self.sigma) / (self.sigma * std_normal_pdf(q)))
            }
            Err(_) => Some(T::zero()),
        }
    }

    fn quantile(&self, p: T) -> Option<T> {
        let z = std_normal_quantile(p).ok()?;
        Some(std_normal_cdf(self.mu + self.sigma * z))
    }
}

/// The named two-parameter families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Family {
    #[serde(rename = "beta")]
    Beta,
    #[serde(rename = "logitnorm")]
    LogitNormal,
    #[serde(rename = "probitnorm")]
    ProbitNormal,
}

impl Family {
    pub const ALL: [Family; 3] = [Family::Beta, Family::LogitNormal, Family::ProbitNormal];

    pub fn name(self) -> &'static str {
        match self {
            Family::Beta => "beta",
            Family::LogitNormal => "logitnorm",
            Family::ProbitNormal => "probitnorm",
        }
    }

    /// Names of the two parameters, in `(p1, p2)` order.
    pub fn param_names(self) -> (&'static str, &'static str) {
        match self {
            Family::Beta => ("alpha", "beta"),
            Family::LogitNormal | Family::ProbitNormal => ("mu", "sigma"),
        }
    }

    pub fn params<T: Real>(self, p1: T, p2: T) -> Result<FamilyParams<T>> {
        Ok(match self {
            Family::Beta => FamilyParams::Beta(Beta::new(p1, p2)?),
            Family::LogitNormal => FamilyParams::LogitNormal(LogitNormal::new(p1, p2)?),
            Family::ProbitNormal => FamilyParams::ProbitNormal(ProbitNormal::new(p1, p2)?),
        })
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "beta" => Ok(Family::Beta),
            "logitnorm" => Ok(Family::LogitNormal),
            "probitnorm" => Ok(Family::ProbitNormal),
            other => Err(Error::domain(format!(
                "unknown family {other:?} (expected beta, logitnorm or probitnorm)"
            ))),
        }
    }
}

/// A member of one of the named families.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FamilyParams<T> {
    Beta(Beta<T>),
    LogitNormal(LogitNormal<T>),
    ProbitNormal(ProbitNormal<T>),
}

impl<T: Real> FamilyParams<T> {
    pub fn family(&self) -> Family {
        match self {
            FamilyParams::Beta(_) => Family::Beta,
            FamilyParams::LogitNormal(_) => Family::LogitNormal,
            FamilyParams::ProbitNormal(_) => Family::ProbitNormal,
        }
    }

    /// `(α, β)` or `(μ, σ)`.
    pub fn values(&self) -> (T, T) {
        match self {
            FamilyParams::Beta(b) => (b.alpha(), b.beta()),
            FamilyParams::LogitNormal(d) => (d.mu(), d.sigma()),
            FamilyParams::ProbitNormal(d) => (d.mu(), d.sigma()),
        }
    }

    /// Parameters of the law of `1 − π`: beta swaps its shapes, the normal
    /// families negate `μ`.
    pub fn mirrored(&self) -> Self {
        match *self {
            FamilyParams::Beta(b) => FamilyParams::Beta(Beta {
                alpha: b.beta,
                beta: b.alpha,
                ln_b: b.ln_b,
            }),
            FamilyParams::LogitNormal(d) => FamilyParams::LogitNormal(LogitNormal {
                mu: -d.mu,
                sigma: d.sigma,
            }),
            FamilyParams::ProbitNormal(d) => FamilyParams::ProbitNormal(ProbitNormal {
                mu: -d.mu,
                sigma: d.sigma,
            }),
        }
    }
}

impl<T: Real> Distribution<T> for FamilyParams<T> {
    fn cdf(&self, x: T) -> T {
        match self {
            FamilyParams::Beta(d) => d.cdf(x),
            FamilyParams::LogitNormal(d) => d.cdf(x),
            FamilyParams::ProbitNormal(d) => d.cdf(x),
        }
    }

    fn pdf(&self, x: T) -> Option<T> {
        match self {
            FamilyParams::Beta(d) => d.pdf(x),
            FamilyParams::LogitNormal(d) => d.pdf(x),
            FamilyParams::ProbitNormal(d) => d.pdf(x),
        }
    }

    fn quantile(&self, p: T) -> Option<T> {
        match self {
            FamilyParams::Beta(d) => d.quantile(p),
            FamilyParams::LogitNormal(d) => d.quantile(p),
            FamilyParams::ProbitNormal(d) => d.quantile(p),
        }
    }
}

/// Triangular distribution on `[lower, upper]` peaking at `mode`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Triangular<T> {
    lower: T,
    upper: T,
    mode: T,
}

impl<T: Real> Triangular<T> {
    pub fn new(lower: T, upper: T, mode: T) -> Result<Self> {
        let unit = |v: T| v >= T::zero() && v <= T::one();
        if !(unit(lower) && unit(upper) && unit(mode)) {
            return Err(Error::domain(
                "triangular bounds and mode must lie in [0, 1]",
            ));
        }
        if !(lower <= mode && mode <= upper && lower < upper) {
            return Err(Error::domain(format!(
                "triangular needs lower <= mode <= upper and lower < upper, got ({lower}, {upper}, {mode})"
            )));
        }
        Ok(Self { lower, upper, mode })
    }

    pub fn lower(&self) -> T {
        self.lower
    }

    pub fn upper(&self) -> T {
        self.upper
    }

    pub fn mode(&self) -> T {
        self.mode
    }

    pub fn mirrored(&self) -> Self {
        let one = T::one();
        Self {
            lower: one - self.upper,
            upper: one - self.lower,
            mode: one - self.mode,
        }
    }

    pub fn density(&self, x: T) -> T {
        let (a, b, c) = (self.lower, self.upper, self.mode);
        let two = T::lit(2.0);
        if x < a || x > b {
            T::zero()
        } else if x < c {
            two * (x - a) / ((b - a) * (c - a))
        } else if x == c {
            two / (b - a)
        } else {
            two * (b - x) / ((b - a) * (b - c))
        }
    }

    pub fn cumulative(&self, x: T) -> T {
        let (a, b, c) = (self.lower, self.upper, self.mode);
        if x <= a {
            T::zero()
        } else if x >= b {
            T::one()
        } else if x <= c {
            (x - a) * (x - a) / ((b - a) * (c - a))
        } else {
            T::one() - (b - x) * (b - x) / ((b - a) * (b - c))
        }
    }
}

impl<T: Real> Distribution<T> for Triangular<T> {
    fn cdf(&self, x: T) -> T {
        self.cumulative(x)
    }

    fn pdf(&self, x: T) -> Option<T> {
        Some(self.density(x))
    }

    fn quantile(&self, p: T) -> Option<T> {
        if !(p >= T::zero() && p <= T::one()) {
            return None;
        }
        let (a, b, c) = (self.lower, self.upper, self.mode);
        let split = (c - a) / (b - a);
        Some(if p <= split {
            a + (p * (b - a) * (c - a)).sqrt()
        } else {
            b - ((T::one() - p) * (b - a) * (b - c)).sqrt()
        })
    }
}

/// `weight · first + (1 − weight) · second`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TwoComponentMixture<T> {
    first: Triangular<T>,
    weight: T,
    second: Triangular<T>,
}

impl<T: Real> TwoComponentMixture<T> {
    pub fn new(first: Triangular<T>, weight: T, second: Triangular<T>) -> Result<Self> {
        if !(weight > T::zero() && weight < T::one()) {
            return Err(Error::domain(format!(
                "mixture weight must be in (0, 1), got {weight}"
            )));
        }
        Ok(Self {
            first,
            weight,
            second,
        })
    }

    pub fn first(&self) -> &Triangular<T> {
        &self.first
    }

    pub fn second(&self) -> &Triangular<T> {
        &self.second
    }

    pub fn weight(&self) -> T {
        self.weight
    }

    pub fn mirrored(&self) -> Self {
        Self {
            first: self.first.mirrored(),
            weight: self.weight,
            second: self.second.mirrored(),
        }
    }
}

impl<T: Real> Distribution<T> for TwoComponentMixture<T> {
    fn cdf(&self, x: T) -> T {
        self.weight * self.first.cumulative(x)
            + (T::one() - self.weight) * self.second.cumulative(x)
    }

    fn pdf(&self, x: T) -> Option<T> {
        Some(
            self.weight * self.first.density(x) + (T::one() - self.weight) * self.second.density(x),
        )
    }
}

/// The law of `1 − π` for `π ~ inner`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mirrored<D>(pub D);

/// Reflects a distribution about `1/2`: `F_mirror(x) = 1 − F(1 − x)`.
pub fn mirror<D>(d: D) -> Mirrored<D> {
    Mirrored(d)
}

impl<D> Mirrored<D> {
    pub fn into_inner(self) -> D {
        self.0
    }
}

impl<T: Real, D: Distribution<T>> Distribution<T> for Mirrored<D> {
    fn cdf(&self, x: T) -> T {
        if x <= T::zero() {
            return T::zero();
        }
        if x >= T::one() {
            return T::one();
        }
        T::one() - self.0.cdf(T::one() - x)
    }

    fn pdf(&self, x: T) -> Option<T> {
        self.0.pdf(T::one() - x)
    }

    fn quantile(&self, p: T) -> Option<T> {
        self.0.quantile(T::one() - p).map(|q| T::one() - q)
    }
}
