//! Scalar root finding (Brent) and derivative-free minimization in two
//! variables (Nelder–Mead).

use crate::error::{Error, Result};
use crate::real::Real;

pub const DEFAULT_ROOT_MAX_ITER: usize = 200;
pub const DEFAULT_ROOT_TOL: f64 = 1e-10;
pub const DEFAULT_MIN_MAX_ITER: usize = 500;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootResult<T> {
    pub root: T,
    /// `f(root)`.
    pub residual: T,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootOptions<T> {
    /// Stop once `|f(x)| ≤ f_tol`.
    pub f_tol: T,
    /// Stop once the bracket half-width is below `x_tol` (plus a few ulps of
    /// the iterate). With `x_tol = 0` only the machine-precision floor
    /// applies and such a stop is not reported as converged.
    pub x_tol: T,
    pub max_iter: usize,
}

impl<T: Real> RootOptions<T> {
    pub fn residual(tol: T) -> Self {
        Self {
            f_tol: tol,
            x_tol: T::zero(),
            max_iter: DEFAULT_ROOT_MAX_ITER,
        }
    }

    pub fn argument(tol: T) -> Self {
        Self {
            f_tol: T::zero(),
            x_tol: tol,
            max_iter: DEFAULT_ROOT_MAX_ITER,
        }
    }
}

fn bracket_error<T: Real>(lo: T, hi: T, f_lo: T, f_hi: T) -> Error {
    let cv = |v: T| v.to_f64().unwrap_or(f64::NAN);
    Error::Bracket {
        lo: cv(lo),
        hi: cv(hi),
        f_lo: cv(f_lo),
        f_hi: cv(f_hi),
    }
}

/// Root of `f` on `[lo, hi]` to residual tolerance `tol`.
pub fn brent_root<T: Real>(f: impl FnMut(T) -> T, lo: T, hi: T, tol: T) -> Result<RootResult<T>> {
    brent_root_with(f, lo, hi, &RootOptions::residual(tol))
}

/// Brent's method: inverse quadratic interpolation and secant steps guarded
/// by bisection. Every iterate stays inside `[lo, hi]`.
pub fn brent_root_with<T: Real>(
    mut f: impl FnMut(T) -> T,
    lo: T,
    hi: T,
    opts: &RootOptions<T>,
) -> Result<RootResult<T>> {
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::domain(format!(
            "need finite lo < hi, got [{lo}, {hi}]"
        )));
    }
    let (mut a, mut b) = (lo, hi);
    let (mut fa, mut fb) = (f(a), f(b));
    if fa.is_nan() || fb.is_nan() {
        return Err(Error::NonFinite("root-finding objective"));
    }
    let done = |root: T, residual: T, iterations: usize| {
        Ok(RootResult {
            root,
            residual,
            iterations,
            converged: residual.abs() <= opts.f_tol,
        })
    };
    if fa.abs() <= opts.f_tol || fa == T::zero() {
        return done(a, fa, 0);
    }
    if fb.abs() <= opts.f_tol || fb == T::zero() {
        return done(b, fb, 0);
    }
    if fa.signum() == fb.signum() {
        return Err(bracket_error(lo, hi, fa, fb));
    }

    let two = T::lit(2.0);
    let half = T::lit(0.5);
    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut e = d;

    for iter in 1..=opts.max_iter {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol1 = two * T::epsilon() * b.abs() + half * opts.x_tol;
        let xm = half * (c - b);
        if fb.abs() <= opts.f_tol || fb == T::zero() {
            return done(b, fb, iter);
        }
        if xm.abs() <= tol1 {
            return Ok(RootResult {
                root: b,
                residual: fb,
                iterations: iter,
                converged: fb.abs() <= opts.f_tol || opts.x_tol > T::zero(),
            });
        }

        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = two * xm * s;
                q = T::one() - s;
            } else {
                let qq = fa / fc;
                let r = fb / fc;
                p = s * (two * xm * qq * (qq - r) - (b - a) * (r - T::one()));
                q = (qq - T::one()) * (r - T::one()) * (s - T::one());
            }
            if p > T::zero() {
                q = -q;
            }
            p = p.abs();
            let bound = (T::lit(3.0) * xm * q - (tol1 * q).abs()).min((e * q).abs());
            if two * p < bound {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b = if d.abs() > tol1 {
            b + d
        } else {
            b + tol1.copysign(xm)
        };
        // keep rounding from stepping outside the original bracket
        b = b.max(lo).min(hi);
        fb = f(b);
        if fb.is_nan() {
            return Err(Error::NonFinite("root-finding objective"));
        }
    }
    Err(Error::NoConvergence {
        method: "Brent root finding",
        iterations: opts.max_iter,
        estimate: b.to_f64().unwrap_or(f64::NAN),
        error: fb.to_f64().unwrap_or(f64::NAN),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinResult<T> {
    pub argmin: [T; 2],
    pub objective_value: T,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NelderMeadOptions<T> {
    pub max_iter: usize,
    /// Spread of objective values across the simplex.
    pub f_tol: T,
    /// Largest vertex distance from the best vertex.
    pub x_tol: T,
    /// Stop as soon as the best value is at or below this.
    pub target: Option<T>,
}

impl<T: Real> Default for NelderMeadOptions<T> {
    fn default() -> Self {
        Self {
            max_iter: DEFAULT_MIN_MAX_ITER,
            f_tol: T::tol(1e-14, 4.0),
            x_tol: T::tol(1e-9, 16.0),
            target: None,
        }
    }
}

impl<T: Real> NelderMeadOptions<T> {
    pub fn with_tol(tol: T) -> Self {
        Self {
            f_tol: tol,
            x_tol: tol.sqrt(),
            ..Self::default()
        }
    }
}

/// Initial simplex offsets: 10% of each start coordinate, at least 0.1.
fn initial_steps<T: Real>(start: [T; 2]) -> [T; 2] {
    start.map(|v| (T::lit(0.1) * v.abs()).max(T::lit(0.1)))
}

/// Nelder–Mead in two variables with reflection 1, expansion 2, contraction
/// ½ and shrink ½. Returns the best vertex whether or not the stopping rule
/// was met; NaN objective values are treated as `+∞`.
pub fn nelder_mead<T: Real>(
    mut f: impl FnMut([T; 2]) -> T,
    start: [T; 2],
    opts: &NelderMeadOptions<T>,
) -> Result<MinResult<T>> {
    let mut evaluations = 0usize;
    let mut eval = |x: [T; 2]| {
        evaluations += 1;
        let v = f(x);
        if v.is_nan() {
            T::infinity()
        } else {
            v
        }
    };
    let f0 = eval(start);
    if !f0.is_finite() {
        return Err(Error::domain(format!(
            "objective is not finite at the starting point ({}, {})",
            start[0], start[1]
        )));
    }
    let step = initial_steps(start);
    let mut simplex = [
        (start, f0),
        ([start[0] + step[0], start[1]], T::zero()),
        ([start[0], start[1] + step[1]], T::zero()),
    ];
    for v in simplex.iter_mut().skip(1) {
        v.1 = eval(v.0);
    }

    let half = T::lit(0.5);
    let two = T::lit(2.0);
    let lerp = |from: [T; 2], to: [T; 2], t: T| {
        [
            from[0] + t * (to[0] - from[0]),
            from[1] + t * (to[1] - from[1]),
        ]
    };

    let mut iterations = 0;
    let converged = loop {
        simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
        let (best, worst) = (simplex[0], simplex[2]);
        if let Some(target) = opts.target {
            if best.1 <= target {
                break true;
            }
        }
        let spread = worst.1 - best.1;
        let size = simplex[1..].iter().fold(T::zero(), |acc, v| {
            acc.max((v.0[0] - best.0[0]).abs().max((v.0[1] - best.0[1]).abs()))
        });
        if spread <= opts.f_tol && size <= opts.x_tol {
            break opts.target.is_none();
        }
        if iterations >= opts.max_iter {
            break false;
        }
        iterations += 1;

        let centroid = lerp(simplex[0].0, simplex[1].0, half);
        let reflected = lerp(centroid, worst.0, -T::one());
        let fr = eval(reflected);
        if fr < best.1 {
            let expanded = lerp(centroid, worst.0, -two);
            let fe = eval(expanded);
            simplex[2] = if fe < fr {
                (expanded, fe)
            } else {
                (reflected, fr)
            };
            continue;
        }
        if fr < simplex[1].1 {
            simplex[2] = (reflected, fr);
            continue;
        }
        let (candidate, fc) = if fr < worst.1 {
            let outside = lerp(centroid, reflected, half);
            let fo = eval(outside);
            (outside, if fo <= fr { fo } else { T::infinity() })
        } else {
            let inside = lerp(centroid, worst.0, half);
            let fi = eval(inside);
            (inside, if fi < worst.1 { fi } else { T::infinity() })
        };
        if fc.is_finite() {
            simplex[2] = (candidate, fc);
            continue;
        }
        for vertex in &mut simplex[1..] {
            let p = lerp(best.0, vertex.0, half);
            *vertex = (p, eval(p));
        }
    };

    simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
    Ok(MinResult {
        argmin: simplex[0].0,
        objective_value: simplex[0].1,
        iterations,
        evaluations,
        converged,
    })
}

/// Minimizes `f` from `start`; fails if the stopping rule is not met within
/// the iteration cap.
pub fn minimize2<T: Real>(
    f: impl FnMut([T; 2]) -> T,
    start: [T; 2],
    opts: &NelderMeadOptions<T>,
) -> Result<MinResult<T>> {
    let r = nelder_mead(f, start, opts)?;
    if r.converged {
        Ok(r)
    } else {
        Err(Error::NoConvergence {
            method: "Nelder-Mead",
            iterations: r.iterations,
            estimate: r.objective_value.to_f64().unwrap_or(f64::NAN),
            error: r.objective_value.to_f64().unwrap_or(f64::NAN),
        })
    }
}
