//! The map between `(m, c)` and the parameters of a two-parameter family.
//!
//! For a CDF `F` on `[0, 1]` with mean `m` and c-statistic `c`,
//!
//! ```text
//! ∫₀¹ F    = 1 − m
//! ∫₀¹ F²   = 1 − 2cm + (2c − 1)m²
//! m(1−m)c  = ½ − ½∫₀¹F² − ½m²
//! ```
//!
//! [`mean_cstat_of`] evaluates the forward direction by quadrature. The
//! inverse is solved per family:
//!
//! * beta: `β = α(1 − m)/m` is fixed by the mean, leaving a scalar root in `α`;
//! * probit-normal: `Φ(μ/√(1+σ²)) = m` fixes `μ` given `σ`, leaving a root
//!   in `σ`;
//! * logit-normal: no closed-form mean, so both integral equations are solved
//!   together by minimizing their squared residuals over `(μ, log σ)`;
//! * anything else: the same least-squares problem over caller-defined
//!   parameters ([`map_generic`]).

use serde::Serialize;

use crate::dist::{Beta, Distribution, Family, FamilyParams, LogitNormal, ProbitNormal};
use crate::error::{Error, Result};
use crate::quad::{cdf_moments, CdfMoments, DEFAULT_TOL};
use crate::real::Real;
use crate::solver::{
    brent_root_with, nelder_mead, NelderMeadOptions, RootOptions, DEFAULT_MIN_MAX_ITER,
    DEFAULT_ROOT_MAX_ITER, DEFAULT_ROOT_TOL,
};
use crate::special::{logit, std_normal_quantile};

/// Largest `|I1 − target|`, `|I2 − target|` accepted as a solution.
pub const RESIDUAL_TOL: f64 = 1e-8;
/// Objective value accepted by the least-squares paths.
pub const OBJECTIVE_TOL: f64 = 1e-16;
/// Objective assigned to parameters outside a family's admissible region.
pub const PENALTY: f64 = 1e6;
/// Below this `m(1 − m)` the c-statistic is not computed.
pub const DEGENERATE_SPREAD: f64 = 1e-12;
/// `c` outside this range triggers an accuracy warning.
pub const PLAUSIBLE_C: (f64, f64) = (0.51, 0.99);

/// A population mean risk and c-statistic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeanCstat<T> {
    m: T,
    c: T,
}

impl<T: Real> MeanCstat<T> {
    /// Validates `0 < m < 1` and `0.5 < c < 1`.
    pub fn new(m: T, c: T) -> Result<Self> {
        if !(m > T::zero() && m < T::one()) {
            return Err(Error::domain(format!("mean must be in (0, 1), got {m}")));
        }
        let half = T::lit(0.5);
        if c.is_nan() || c < T::zero() || c > T::one() {
            return Err(Error::domain(format!(
                "c-statistic must be in (0.5, 1), got {c}"
            )));
        }
        if c < half {
            return Err(Error::domain(format!(
                "c-statistic {c} is below 0.5; swap the case/control labels (use c = {}) and retry",
                T::one() - c
            )));
        }
        if c == half {
            return Err(Error::domain(
                "c-statistic 0.5 means the risks do not vary; no continuous distribution fits",
            ));
        }
        if c == T::one() {
            return Err(Error::domain(
                "c-statistic 1 means complete separation of cases and controls; no continuous distribution fits",
            ));
        }
        Ok(Self { m, c })
    }

    pub fn m(&self) -> T {
        self.m
    }

    pub fn c(&self) -> T {
        self.c
    }

    /// `(1 − m, c)`: the pair belonging to the law of `1 − π`.
    pub fn mirrored(&self) -> Self {
        Self {
            m: T::one() - self.m,
            c: self.c,
        }
    }

    /// Warning text when `c` is outside the range where the solvers are
    /// known to be reliable.
    pub fn extreme_c_warning(&self) -> Option<String> {
        let (lo, hi) = PLAUSIBLE_C;
        if self.c < T::lit(lo) || self.c > T::lit(hi) {
            Some(format!(
                "c = {} is outside [{lo}, {hi}]; the CDF is nearly flat over much of [0, 1] and the solution may be inaccurate",
                self.c
            ))
        } else {
            None
        }
    }
}

/// Values `∫F` and `∫F²` must take for a distribution with the given `(m, c)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TargetIntegrals<T> {
    pub i1: T,
    pub i2: T,
}

pub fn target_integrals<T: Real>(mc: &MeanCstat<T>) -> TargetIntegrals<T> {
    let (m, c) = (mc.m, mc.c);
    let one = T::one();
    let two = T::lit(2.0);
    TargetIntegrals {
        i1: one - m,
        i2: one - two * c * m + (two * c - one) * m * m,
    }
}

/// `(m, c)` from the two CDF integrals.
pub fn mean_cstat_from_moments<T: Real>(i1: T, i2: T) -> Result<MeanCstat<T>> {
    let one = T::one();
    let m = one - i1;
    let spread = m * (one - m);
    if !(spread >= T::lit(DEGENERATE_SPREAD)) {
        return Err(Error::Degenerate(format!(
            "m(1 - m) = {spread} is too small to define a c-statistic"
        )));
    }
    let c = (one - i2 - m * m) / (T::lit(2.0) * spread);
    Ok(MeanCstat { m, c })
}

/// Forward map: mean and c-statistic of `d`, via `m = 1 − ∫F` and
/// `c = (1 − ∫F² − m²) / (2m(1 − m))`.
///
/// The result is not checked against `0.5 < c < 1`.
pub fn mean_cstat_of<T: Real, D: Distribution<T> + ?Sized>(d: &D, tol: T) -> Result<MeanCstat<T>> {
    let mom = cdf_moments(d, tol)?;
    mean_cstat_from_moments(mom.i1, mom.i2)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MapOptions<T> {
    pub quad_tol: T,
    /// Solver iteration cap; `None` uses 200 for root finding and 500 per
    /// Nelder–Mead run.
    pub max_iter: Option<usize>,
    /// Residual tolerance handed to the root finder.
    pub root_tol: T,
}

impl<T: Real> Default for MapOptions<T> {
    fn default() -> Self {
        Self {
            quad_tol: T::tol(DEFAULT_TOL, 100.0),
            max_iter: None,
            root_tol: T::tol(DEFAULT_ROOT_TOL, 100.0),
        }
    }
}

/// Outcome of solving for a family's parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport<T, P> {
    pub params: P,
    /// `∫F − (1 − m)` at the solution.
    pub residual_i1: T,
    /// `∫F² − (1 − 2cm + (2c − 1)m²)` at the solution.
    pub residual_i2: T,
    pub iterations: usize,
    pub converged: bool,
    pub warning: Option<String>,
}

impl<T: Real, P> SolveReport<T, P> {
    pub fn max_residual(&self) -> T {
        self.residual_i1.abs().max(self.residual_i2.abs())
    }

    pub fn map_params<Q>(self, f: impl FnOnce(P) -> Q) -> SolveReport<T, Q> {
        SolveReport {
            params: f(self.params),
            residual_i1: self.residual_i1,
            residual_i2: self.residual_i2,
            iterations: self.iterations,
            converged: self.converged,
            warning: self.warning,
        }
    }
}

fn residuals<T: Real>(mom: &CdfMoments<T>, target: &TargetIntegrals<T>) -> (T, T) {
    (mom.i1 - target.i1, mom.i2 - target.i2)
}

fn residual_ok<T: Real>(r1: T, r2: T) -> bool {
    let tol = T::tol(RESIDUAL_TOL, 1e3);
    r1.abs() <= tol && r2.abs() <= tol
}

/// Runs `h` and stashes the first error so that closures handed to the
/// solvers can stay infallible.
struct Fallible<T> {
    first_error: Option<Error>,
    evaluations: usize,
    _marker: std::marker::PhantomData<T>,
}

impl<T: Real> Fallible<T> {
    fn new() -> Self {
        Self {
            first_error: None,
            evaluations: 0,
            _marker: std::marker::PhantomData,
        }
    }

    fn eval(&mut self, r: Result<T>) -> T {
        self.evaluations += 1;
        match r {
            Ok(v) => v,
            Err(e) => {
                self.first_error.get_or_insert(e);
                T::nan()
            }
        }
    }
}

/// Finds adjacent points `x, 10x` (or `x/10, x`) around `start` where the
/// monotone function `h` changes sign, staying within `[min, max]`.
fn scan_bracket<T: Real>(
    mut h: impl FnMut(T) -> Result<T>,
    start: T,
    increasing: bool,
    min: T,
    max: T,
) -> Result<(T, T, usize)> {
    let factor = T::lit(10.0);
    let mut x = start;
    let mut hx = h(x)?;
    let mut evals = 1;
    if hx == T::zero() {
        return Ok((x, x, evals));
    }
    // Root lies above x when h is still on the "low" side there.
    let go_up = (hx < T::zero()) == increasing;
    loop {
        let next = if go_up { x * factor } else { x / factor };
        let next = next.max(min).min(max);
        if next == x {
            return Err(Error::NoConvergence {
                method: "geometric bracket search",
                iterations: evals,
                estimate: x.to_f64().unwrap_or(f64::NAN),
                error: hx.to_f64().unwrap_or(f64::NAN),
            });
        }
        let hn = h(next)?;
        evals += 1;
        if hn.is_nan() {
            return Err(Error::NonFinite("bracket search objective"));
        }
        if hn == T::zero() || hn.signum() != hx.signum() {
            return Ok(if go_up {
                (x, next, evals)
            } else {
                (next, x, evals)
            });
        }
        x = next;
        hx = hn;
    }
}

/// Shared driver for the families with a one-dimensional reduction.
fn solve_scalar<T: Real>(
    mc: &MeanCstat<T>,
    opts: &MapOptions<T>,
    build: impl Fn(T) -> Result<FamilyParams<T>>,
    increasing: bool,
    range: (f64, f64),
) -> Result<SolveReport<T, FamilyParams<T>>> {
    let target = target_integrals(mc);
    let h = |x: T| -> Result<T> {
        let d = build(x)?;
        Ok(cdf_moments(&d, opts.quad_tol)?.i2 - target.i2)
    };
    let (lo, hi, scan_evals) =
        scan_bracket(h, T::one(), increasing, T::lit(range.0), T::lit(range.1))?;

    let (root, brent_iters) = if lo == hi {
        (lo, 0)
    } else {
        let mut guard = Fallible::new();
        let root_opts = RootOptions {
            f_tol: opts.root_tol,
            x_tol: T::zero(),
            max_iter: opts.max_iter.unwrap_or(DEFAULT_ROOT_MAX_ITER),
        };
        let r = brent_root_with(|x| guard.eval(h(x)), lo, hi, &root_opts);
        if let Some(e) = guard.first_error {
            return Err(e);
        }
        let r = r?;
        (r.root, r.iterations)
    };

    let params = build(root)?;
    let mom = cdf_moments(&params, opts.quad_tol)?;
    let (r1, r2) = residuals(&mom, &target);
    Ok(SolveReport {
        params,
        residual_i1: r1,
        residual_i2: r2,
        iterations: scan_evals + brent_iters,
        converged: residual_ok(r1, r2),
        warning: mc.extreme_c_warning(),
    })
}

/// Beta parameters with the given mean and c-statistic.
///
/// `β = α(1 − m)/m`; `α` is the root of `∫I_x(α, β)² dx − I2_target`, which
/// increases with `α` (larger concentration, smaller `c`).
pub fn map_beta<T: Real>(
    mc: &MeanCstat<T>,
    opts: &MapOptions<T>,
) -> Result<SolveReport<T, FamilyParams<T>>> {
    let ratio = (T::one() - mc.m) / mc.m;
    solve_scalar(
        mc,
        opts,
        |alpha| Ok(FamilyParams::Beta(Beta::new(alpha, alpha * ratio)?)),
        true,
        (1e-5, 1e5),
    )
}

/// Probit-normal parameters with the given mean and c-statistic.
///
/// `μ = Φ⁻¹(m)√(1 + σ²)`; `σ` is the root of `∫F² − I2_target`, which
/// decreases with `σ`.
pub fn map_probit_normal<T: Real>(
    mc: &MeanCstat<T>,
    opts: &MapOptions<T>,
) -> Result<SolveReport<T, FamilyParams<T>>> {
    let q = std_normal_quantile(mc.m)?;
    solve_scalar(
        mc,
        opts,
        |sigma| {
            let mu = q * (T::one() + sigma * sigma).sqrt();
            Ok(FamilyParams::ProbitNormal(ProbitNormal::new(mu, sigma)?))
        },
        false,
        (1e-5, 1e3),
    )
}

/// Logit-normal parameters with the given mean and c-statistic.
///
/// Least squares over `(μ, log σ)` from `(logit m, 0)`.
pub fn map_logit_normal<T: Real>(
    mc: &MeanCstat<T>,
    opts: &MapOptions<T>,
) -> Result<SolveReport<T, FamilyParams<T>>> {
    let start = [logit(mc.m)?, T::one()];
    let report = map_generic(&LogSecond(Family::LogitNormal), mc, start, opts)?;
    let [mu, sigma] = report.params;
    let params = FamilyParams::LogitNormal(LogitNormal::new(mu, sigma)?);
    Ok(report.map_params(|_| params))
}

/// Dispatches to the solver for `family`.
pub fn map_family<T: Real>(
    family: Family,
    mc: &MeanCstat<T>,
    opts: &MapOptions<T>,
) -> Result<SolveReport<T, FamilyParams<T>>> {
    match family {
        Family::Beta => map_beta(mc, opts),
        Family::LogitNormal => map_logit_normal(mc, opts),
        Family::ProbitNormal => map_probit_normal(mc, opts),
    }
}

/// A family of distributions indexed by two real parameters.
///
/// The optimizer searches in the coordinates given by `to_search` /
/// `to_params`, which default to the raw parameters. Override them to map a
/// constrained region onto the plane (e.g. `log σ`).
pub trait ParamFamily<T: Real> {
    type Dist: Distribution<T>;

    /// `None` for parameters outside the admissible region.
    fn build(&self, params: [T; 2]) -> Option<Self::Dist>;

    fn to_search(&self, params: [T; 2]) -> [T; 2] {
        params
    }

    fn to_params(&self, x: [T; 2]) -> [T; 2] {
        x
    }
}

impl<T: Real> ParamFamily<T> for Family {
    type Dist = FamilyParams<T>;

    fn build(&self, params: [T; 2]) -> Option<FamilyParams<T>> {
        self.params(params[0], params[1]).ok()
    }
}

/// Wraps a family so that its second parameter is searched on the log scale.
#[derive(Debug, Clone, Copy)]
pub struct LogSecond<F>(pub F);

impl<T: Real, F: ParamFamily<T>> ParamFamily<T> for LogSecond<F> {
    type Dist = F::Dist;

    fn build(&self, params: [T; 2]) -> Option<F::Dist> {
        self.0.build(params)
    }

    fn to_search(&self, params: [T; 2]) -> [T; 2] {
        let inner = self.0.to_search(params);
        [inner[0], inner[1].ln()]
    }

    fn to_params(&self, x: [T; 2]) -> [T; 2] {
        self.0.to_params([x[0], x[1].exp()])
    }
}

/// A family given by a constructor closure.
#[derive(Clone, Copy)]
pub struct FnFamily<B>(pub B);

impl<T: Real, D: Distribution<T>, B: Fn([T; 2]) -> Option<D>> ParamFamily<T> for FnFamily<B> {
    type Dist = D;

    fn build(&self, params: [T; 2]) -> Option<D> {
        (self.0)(params)
    }
}

/// Parameters of an arbitrary two-parameter family matching `(m, c)`, by
/// Nelder–Mead on `(∫F − I1_target)² + (∫F² − I2_target)²`.
///
/// Parameters the family rejects (or whose integrals fail) score
/// [`PENALTY`]. The simplex is restarted from the incumbent until a restart
/// no longer improves it.
pub fn map_generic<T: Real, F: ParamFamily<T>>(
    family: &F,
    mc: &MeanCstat<T>,
    start: [T; 2],
    opts: &MapOptions<T>,
) -> Result<SolveReport<T, [T; 2]>> {
    let target = target_integrals(mc);
    let penalty = T::lit(PENALTY);
    let objective = |x: [T; 2]| -> T {
        let params = family.to_params(x);
        if params.iter().any(|v| !v.is_finite()) {
            return penalty;
        }
        let Some(d) = family.build(params) else {
            return penalty;
        };
        match cdf_moments(&d, opts.quad_tol) {
            Ok(mom) => {
                let (r1, r2) = residuals(&mom, &target);
                r1 * r1 + r2 * r2
            }
            Err(_) => penalty,
        }
    };

    let nm_opts = NelderMeadOptions {
        max_iter: opts.max_iter.unwrap_or(DEFAULT_MIN_MAX_ITER),
        f_tol: T::tol(1e-30, 0.0),
        x_tol: T::tol(1e-11, 16.0),
        target: None,
    };
    let objective_tol = T::tol(OBJECTIVE_TOL, 1e6);
    let mut x = family.to_search(start);
    if family.build(start).is_none() || x.iter().any(|v| !v.is_finite()) {
        return Err(Error::domain(format!(
            "starting parameters ({}, {}) are not admissible",
            start[0], start[1]
        )));
    }
    let mut best = T::infinity();
    let mut iterations = 0;
    for _ in 0..6 {
        let r = nelder_mead(&objective, x, &nm_opts)?;
        iterations += r.iterations;
        let improved = r.objective_value < best;
        if improved {
            x = r.argmin;
            best = r.objective_value;
        }
        if !improved || (best <= objective_tol && r.converged) {
            break;
        }
    }

    let params = family.to_params(x);
    let d = family
        .build(params)
        .ok_or_else(|| Error::domain("optimizer left the admissible parameter region"))?;
    let mom = cdf_moments(&d, opts.quad_tol)?;
    let (r1, r2) = residuals(&mom, &target);
    Ok(SolveReport {
        params,
        residual_i1: r1,
        residual_i2: r2,
        iterations,
        converged: best <= objective_tol && residual_ok(r1, r2),
        warning: mc.extreme_c_warning(),
    })
}

/// Solution for `(1 − m, c)` from a solution for `(m, c)`: beta swaps its
/// shapes, the normal families negate `μ`.
pub fn mirror_solution<T: Real>(
    mc: &MeanCstat<T>,
    params: &FamilyParams<T>,
) -> (MeanCstat<T>, FamilyParams<T>) {
    (mc.mirrored(), params.mirrored())
}
