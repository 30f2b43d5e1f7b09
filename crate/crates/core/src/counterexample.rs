//! Pairs of distinct distributions sharing a mode (or a median) and a
//! c-statistic, showing that neither summary identifies the distribution.
//!
//! Both families are mixtures of triangular distributions, and each pair is a
//! distribution and its mirror image, which share `c` by label swapping.
//!
//! - Mode family: `0.75·Tri(0, 1, 0.5) + 0.25·Tri(0, 1, a)`, paired with `1 − a`.
//! - Median family: `0.5·Tri(0, 0.5, a) + 0.5·Tri(0.5, 1, 0.5 + a)`, paired
//!   with `0.5 − a`.

use std::fmt;

use serde::Serialize;

use crate::dist::{Distribution, Triangular, TwoComponentMixture};
use crate::error::{Error, Result};
use crate::mapping::mean_cstat_of;
use crate::real::Real;
use crate::solver::{brent_root_with, RootOptions};

pub const MODE_GRID_POINTS: usize = 10_000;
pub const MODE_TOL: f64 = 1e-6;
pub const MEDIAN_TOL: f64 = 1e-10;
/// Two local maxima closer than this in density count as a tie.
pub const TIE_TOL: f64 = 1e-9;

pub const SAME_MODE_TOL: f64 = 1e-4;
pub const SAME_MEDIAN_TOL: f64 = 1e-8;
pub const SAME_CSTAT_TOL: f64 = 1e-8;
/// Minimum `sup |F₁ − F₂|` for a pair to count as distinct.
pub const MIN_CDF_GAP: f64 = 0.01;

const CSTAT_QUAD_TOL: f64 = 1e-12;
const GAP_GRID_POINTS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeEstimate<T> {
    pub mode: T,
    pub density: T,
    /// Set when another local maximum has (nearly) the same density.
    pub tie: Option<T>,
}

/// Location of the highest density on `[0, 1]`: a grid scan followed by a
/// golden-section search around the best grid point.
pub fn mode_of<T: Real, D: Distribution<T> + ?Sized>(d: &D) -> Result<ModeEstimate<T>> {
    let pdf = |x: T| -> Result<T> {
        let v = d
            .pdf(x)
            .ok_or_else(|| Error::domain("mode needs a density"))?;
        if v.is_nan() {
            Err(Error::NonFinite("mode_of"))
        } else {
            Ok(v)
        }
    };
    let n = MODE_GRID_POINTS;
    let step = T::one() / T::from_usize(n).unwrap();
    let xs: Vec<T> = (0..=n).map(|i| T::from_usize(i).unwrap() * step).collect();
    let ys = xs.iter().map(|&x| pdf(x)).collect::<Result<Vec<T>>>()?;

    let best = (0..=n).fold(0, |b, i| if ys[i] > ys[b] { i } else { b });

    let lo = xs[best.saturating_sub(1)];
    let hi = xs[(best + 1).min(n)];
    let (mut a, mut b) = (lo, hi);
    let inv_phi = T::lit((5f64.sqrt() - 1.0) / 2.0);
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let (mut f1, mut f2) = (pdf(x1)?, pdf(x2)?);
    let tol = T::tol(MODE_TOL * 1e-3, 10.0);
    while b - a > tol {
        if f1 >= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = pdf(x1)?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = pdf(x2)?;
        }
    }
    let mut mode = (a + b) * T::lit(0.5);
    let mut density = pdf(mode)?;
    // A peak sitting on the grid (or an endpoint) can beat the polished point.
    if ys[best] > density {
        mode = xs[best];
        density = ys[best];
    }

    // Other grid-level local maxima, separated from the best one by a dip.
    let tie_tol = T::lit(TIE_TOL);
    let mut tie = None;
    for i in 0..=n {
        let left = i == 0 || ys[i] > ys[i - 1];
        let right = i == n || ys[i] >= ys[i + 1];
        if !(left && right) || i.abs_diff(best) <= 1 {
            continue;
        }
        let (s, e) = (i.min(best), i.max(best));
        let dip = ys[s..=e].iter().copied().fold(T::infinity(), T::min);
        if dip < ys[i].min(ys[best]) && (density - ys[i]).abs() <= tie_tol {
            tie = Some(xs[i]);
            break;
        }
    }
    Ok(ModeEstimate { mode, density, tie })
}

/// Median by Brent's method on `F(x) − 1/2` over `[0, 1]`, stopping on the
/// bracket width (the CDF can be flat at the median).
pub fn median_of<T: Real, D: Distribution<T> + ?Sized>(d: &D) -> Result<T> {
    let half = T::lit(0.5);
    let opts = RootOptions::argument(T::tol(MEDIAN_TOL, 10.0));
    Ok(brent_root_with(|x| d.cdf(x) - half, T::zero(), T::one(), &opts)?.root)
}

/// `0.75·Tri(0, 1, 0.5) + 0.25·Tri(0, 1, a)`.
pub fn mode_family<T: Real>(a: T) -> Result<TwoComponentMixture<T>> {
    let (zero, one, half) = (T::zero(), T::one(), T::lit(0.5));
    TwoComponentMixture::new(
        Triangular::new(zero, one, half)?,
        T::lit(0.75),
        Triangular::new(zero, one, a)?,
    )
}

/// `0.5·Tri(0, 0.5, a) + 0.5·Tri(0.5, 1, 0.5 + a)`.
pub fn median_family<T: Real>(a: T) -> Result<TwoComponentMixture<T>> {
    let half = T::lit(0.5);
    if !(a > T::zero() && a < half) {
        return Err(Error::domain(format!(
            "median family needs a in (0, 0.5), got {a}"
        )));
    }
    TwoComponentMixture::new(
        Triangular::new(T::zero(), half, a)?,
        half,
        Triangular::new(half, T::one(), half + a)?,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Mode,
    Median,
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Kind::Mode => "mode",
            Kind::Median => "median",
        })
    }
}

/// Numerical check of one counterexample pair.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CounterexampleReport {
    pub kind: Kind,
    /// Parameters of the two members.
    pub a: [f64; 2],
    /// Modes or medians of the two members.
    pub locations: [f64; 2],
    /// Where both locations should sit.
    pub expected_location: f64,
    pub location_tol: f64,
    pub means: [f64; 2],
    pub cstats: [f64; 2],
    /// `sup |F₁ − F₂|` over a grid.
    pub cdf_gap: f64,
    pub warnings: Vec<String>,
}

impl CounterexampleReport {
    pub fn same_location(&self) -> bool {
        let [l1, l2] = self.locations;
        (l1 - l2).abs() <= self.location_tol
            && (l1 - self.expected_location).abs() <= self.location_tol
            && (l2 - self.expected_location).abs() <= self.location_tol
    }

    pub fn same_cstat(&self) -> bool {
        (self.cstats[0] - self.cstats[1]).abs() <= SAME_CSTAT_TOL
    }

    pub fn distinct(&self) -> bool {
        self.cdf_gap >= MIN_CDF_GAP
    }

    pub fn verified(&self) -> bool {
        self.same_location() && self.same_cstat() && self.distinct()
    }
}

fn cdf_gap<D: Distribution<f64>>(d1: &D, d2: &D) -> f64 {
    (0..=GAP_GRID_POINTS)
        .map(|i| {
            let x = i as f64 / GAP_GRID_POINTS as f64;
            (d1.cdf(x) - d2.cdf(x)).abs()
        })
        .fold(0.0, f64::max)
}

fn report(
    kind: Kind,
    a: [f64; 2],
    pair: [TwoComponentMixture<f64>; 2],
    locate: impl Fn(&TwoComponentMixture<f64>) -> Result<(f64, Option<String>)>,
    location_tol: f64,
) -> Result<CounterexampleReport> {
    let mut warnings = Vec::new();
    let mut locations = [0.0; 2];
    let mut means = [0.0; 2];
    let mut cstats = [0.0; 2];
    for (k, d) in pair.iter().enumerate() {
        let (loc, warning) = locate(d)?;
        locations[k] = loc;
        warnings.extend(warning);
        let mc = mean_cstat_of(d, CSTAT_QUAD_TOL)?;
        means[k] = mc.m();
        cstats[k] = mc.c();
    }
    Ok(CounterexampleReport {
        kind,
        a,
        locations,
        expected_location: 0.5,
        location_tol,
        means,
        cstats,
        cdf_gap: cdf_gap(&pair[0], &pair[1]),
        warnings,
    })
}

/// Checks that the mode-family members for `a` and `1 − a` share mode 0.5
/// and `c` but have different CDFs. `a = 0.5` pairs a distribution with
/// itself and is rejected.
pub fn verify_mode_counterexample(a: f64) -> Result<CounterexampleReport> {
    if !(a > 0.0 && a < 1.0) || a == 0.5 {
        return Err(Error::domain(format!(
            "mode counterexample needs a in (0, 1) other than 0.5, got {a}"
        )));
    }
    let a = [a, 1.0 - a];
    let pair = [mode_family(a[0])?, mode_family(a[1])?];
    report(
        Kind::Mode,
        a,
        pair,
        |d| {
            let est = mode_of(d)?;
            let warning = est
                .tie
                .map(|x| format!("density at {x} ties the maximum at {}", est.mode));
            Ok((est.mode, warning))
        },
        SAME_MODE_TOL,
    )
}

/// Checks that the median-family members for `a` and `0.5 − a` share
/// median 0.5 and `c` but have different CDFs. `a = 0.25` is its own mirror
/// and is rejected.
pub fn verify_median_counterexample(a: f64) -> Result<CounterexampleReport> {
    if !(a > 0.0 && a < 0.5) || a == 0.25 {
        return Err(Error::domain(format!(
            "median counterexample needs a in (0, 0.5) other than 0.25, got {a}"
        )));
    }
    let a = [a, 0.5 - a];
    let pair = [median_family(a[0])?, median_family(a[1])?];
    report(
        Kind::Median,
        a,
        pair,
        |d| Ok((median_of(d)?, None)),
        SAME_MEDIAN_TOL,
    )
}
