//! Adaptive Gauss–Kronrod integration over `[0, 1]`.
//!
//! Panels are bisected globally by largest error estimate (QUADPACK QAG
//! style) until the summed estimate meets an absolute tolerance. Nodes are
//! interior to every panel, so integrands are never evaluated at exactly 0
//! or 1.

use crate::dist::Distribution;
use crate::error::{Error, Result};
use crate::real::Real;

pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_SUBDIVISIONS: usize = 200;

// 15-point Kronrod abscissae (descending, last one is the centre) and
// weights; odd indices plus the centre form the embedded 7-point Gauss rule.
#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult<T> {
    pub value: T,
    pub abs_error_estimate: T,
    /// Number of panels in the final partition.
    pub subdivisions: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadOptions<T> {
    pub tol: T,
    pub max_subdivisions: usize,
}

impl<T: Real> Default for QuadOptions<T> {
    fn default() -> Self {
        Self::with_tol(T::lit(DEFAULT_TOL))
    }
}

impl<T: Real> QuadOptions<T> {
    pub fn with_tol(tol: T) -> Self {
        Self {
            tol,
            max_subdivisions: DEFAULT_MAX_SUBDIVISIONS,
        }
    }
}

#[derive(Clone, Copy)]
struct Panel<T, const N: usize> {
    lo: T,
    hi: T,
    value: [T; N],
    error: [T; N],
}

impl<T: Real, const N: usize> Panel<T, N> {
    fn worst(&self) -> T {
        self.error.iter().fold(T::zero(), |acc, &e| acc.max(e))
    }
}

fn rescale_error<T: Real>(err: T, res_abs: T, res_asc: T) -> T {
    let mut err = err.abs();
    if res_asc != T::zero() && err != T::zero() {
        let scale = (T::lit(200.0) * err / res_asc).powf(T::lit(1.5));
        err = res_asc * scale.min(T::one());
    }
    let fifty_eps = T::lit(50.0) * T::epsilon();
    if res_abs > T::min_positive_value() / fifty_eps {
        err = err.max(fifty_eps * res_abs);
    }
    err
}

fn gauss_kronrod<T: Real, const N: usize>(
    f: &mut impl FnMut(T) -> [T; N],
    lo: T,
    hi: T,
) -> Result<Panel<T, N>> {
    let half = T::lit(0.5);
    let centre = half * (lo + hi);
    let half_len = half * (hi - lo);

    let mut fvals = [[T::zero(); N]; 15];
    fvals[7] = f(centre);
    for j in 0..7 {
        let dx = half_len * T::lit(XGK[j]);
        fvals[j] = f(centre - dx);
        fvals[14 - j] = f(centre + dx);
    }
    for row in &fvals {
        if row.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("integrand"));
        }
    }

    let weight_k = |i: usize| T::lit(WGK[if i <= 7 { i } else { 14 - i }]);
    let mut value = [T::zero(); N];
    let mut error = [T::zero(); N];
    for k in 0..N {
        let mut res_k = T::zero();
        let mut res_abs = T::zero();
        for (i, row) in fvals.iter().enumerate() {
            res_k = res_k + weight_k(i) * row[k];
            res_abs = res_abs + weight_k(i) * row[k].abs();
        }
        let mut res_g = T::lit(WG[3]) * fvals[7][k];
        for (g, &j) in [1usize, 3, 5].iter().enumerate() {
            res_g = res_g + T::lit(WG[g]) * (fvals[j][k] + fvals[14 - j][k]);
        }
        let mean = res_k * half;
        let mut res_asc = T::zero();
        for (i, row) in fvals.iter().enumerate() {
            res_asc = res_asc + weight_k(i) * (row[k] - mean).abs();
        }
        value[k] = res_k * half_len;
        error[k] = rescale_error(
            (res_k - res_g) * half_len,
            res_abs * half_len,
            res_asc * half_len,
        );
    }
    Ok(Panel {
        lo,
        hi,
        value,
        error,
    })
}

/// Integrates `N` functions of `x` over `[0, 1]` on one shared partition.
///
/// Refinement continues until every component's summed error estimate is at
/// most `tol` (or a small multiple of machine epsilon relative to its value,
/// whichever is larger).
pub fn integrate01_vec<T: Real, const N: usize>(
    mut f: impl FnMut(T) -> [T; N],
    opts: &QuadOptions<T>,
) -> Result<[QuadResult<T>; N]> {
    if !(opts.tol > T::zero()) {
        return Err(Error::domain(format!(
            "quadrature tolerance must be positive, got {}",
            opts.tol
        )));
    }
    let limit = opts.max_subdivisions.max(1);
    let mut panels = vec![gauss_kronrod(&mut f, T::zero(), T::one())?];

    loop {
        let mut total = [T::zero(); N];
        let mut error = [T::zero(); N];
        for p in &panels {
            for k in 0..N {
                total[k] = total[k] + p.value[k];
                error[k] = error[k] + p.error[k];
            }
        }
        let done =
            (0..N).all(|k| error[k] <= opts.tol.max(T::lit(100.0) * T::epsilon() * total[k].abs()));
        if done {
            return Ok(std::array::from_fn(|k| QuadResult {
                value: total[k],
                abs_error_estimate: error[k],
                subdivisions: panels.len(),
            }));
        }
        if panels.len() >= limit {
            let worst = (0..N)
                .max_by(|&a, &b| error[a].partial_cmp(&error[b]).unwrap())
                .unwrap_or(0);
            return Err(Error::NoConvergence {
                method: "adaptive Gauss-Kronrod quadrature",
                iterations: panels.len(),
                estimate: total[worst].to_f64().unwrap_or(f64::NAN),
                error: error[worst].to_f64().unwrap_or(f64::NAN),
            });
        }

        let (idx, _) = panels
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.worst().partial_cmp(&b.1.worst()).unwrap())
            .unwrap();
        let p = panels.swap_remove(idx);
        let mid = T::lit(0.5) * (p.lo + p.hi);
        if !(mid > p.lo && mid < p.hi) {
            return Err(Error::NoConvergence {
                method: "adaptive Gauss-Kronrod quadrature (panel below resolution)",
                iterations: panels.len() + 1,
                estimate: f64::NAN,
                error: p.worst().to_f64().unwrap_or(f64::NAN),
            });
        }
        panels.push(gauss_kronrod(&mut f, p.lo, mid)?);
        panels.push(gauss_kronrod(&mut f, mid, p.hi)?);
    }
}

/// `∫₀¹ f(x) dx` to absolute tolerance `tol` with the default subdivision
/// limit.
pub fn integrate01<T: Real>(mut f: impl FnMut(T) -> T, tol: T) -> Result<QuadResult<T>> {
    integrate01_with(&mut f, &QuadOptions::with_tol(tol))
}

pub fn integrate01_with<T: Real>(
    mut f: impl FnMut(T) -> T,
    opts: &QuadOptions<T>,
) -> Result<QuadResult<T>> {
    let [r] = integrate01_vec(move |x| [f(x)], opts)?;
    Ok(r)
}

/// The two CDF integrals that identify a distribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CdfMoments<T> {
    /// `∫₀¹ F(x) dx`, equal to `1 − mean`.
    pub i1: T,
    /// `∫₀¹ F²(x) dx`.
    pub i2: T,
    pub i1_error: T,
    pub i2_error: T,
}

/// `∫F` and `∫F²` in one pass over a shared partition.
pub fn cdf_moments<T: Real, D: Distribution<T> + ?Sized>(d: &D, tol: T) -> Result<CdfMoments<T>> {
    cdf_moments_with(d, &QuadOptions::with_tol(tol))
}

pub fn cdf_moments_with<T: Real, D: Distribution<T> + ?Sized>(
    d: &D,
    opts: &QuadOptions<T>,
) -> Result<CdfMoments<T>> {
    let [first, second] = integrate01_vec(
        |x| {
            let f = d.cdf(x);
            [f, f * f]
        },
        opts,
    )?;
    Ok(CdfMoments {
        i1: first.value,
        i2: second.value,
        i1_error: first.abs_error_estimate,
        i2_error: second.abs_error_estimate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::{Beta, CdfFn};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn polynomial_examples() {
        let r = integrate01(|x: f64| x, 1e-12).unwrap();
        assert_abs_diff_eq!(r.value, 0.5, epsilon = 1e-12);
        // (3x² − 2x³)² = 9x⁴ − 12x⁵ + 4x⁶ → 9/5 − 2 + 4/7 = 13/35
        let r = integrate01(|x: f64| (3.0 * x * x - 2.0 * x.powi(3)).powi(2), 1e-10).unwrap();
        assert_abs_diff_eq!(r.value, 13.0 / 35.0, epsilon = 1e-10);
        // (1 − (1−x)³)², substitute u = 1−x: ∫(1 − 2u³ + u⁶) = 1 − 1/2 + 1/7 = 9/14
        let r = integrate01(|x: f64| (1.0 - (1.0 - x).powi(3)).powi(2), 1e-10).unwrap();
        assert_abs_diff_eq!(r.value, 9.0 / 14.0, epsilon = 1e-10);
    }

    #[test]
    fn exact_through_degree_22_on_one_panel() {
        for deg in 0..=22 {
            let r = integrate01(|x: f64| (deg as f64 + 1.0) * x.powi(deg), 1.0).unwrap();
            assert_eq!(r.subdivisions, 1);
            assert_abs_diff_eq!(r.value, 1.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn cdf_moment_examples() {
        let uniform = CdfFn(|x: f64| x);
        let m = cdf_moments(&uniform, 1e-10).unwrap();
        assert_abs_diff_eq!(m.i1, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(m.i2, 1.0 / 3.0, epsilon = 1e-12);

        let b22 = Beta::new(2.0, 2.0).unwrap();
        let m = cdf_moments(&b22, 1e-10).unwrap();
        assert_abs_diff_eq!(m.i1, 0.5, epsilon = 1e-10);
        assert_abs_diff_eq!(m.i2, 13.0 / 35.0, epsilon = 1e-10);

        let b13 = Beta::new(1.0, 3.0).unwrap();
        let m = cdf_moments(&b13, 1e-10).unwrap();
        assert_abs_diff_eq!(m.i1, 0.75, epsilon = 1e-10);
        assert_abs_diff_eq!(m.i2, 9.0 / 14.0, epsilon = 1e-10);
    }

    #[test]
    fn shared_pass_matches_separate_calls() {
        let d = Beta::new(0.7, 3.2).unwrap();
        let m = cdf_moments(&d, 1e-11).unwrap();
        let i1 = integrate01(|x| d.cdf(x), 1e-11).unwrap().value;
        let i2 = integrate01(|x: f64| d.cdf(x).powi(2), 1e-11).unwrap().value;
        assert_abs_diff_eq!(m.i1, i1, epsilon = 2e-11);
        assert_abs_diff_eq!(m.i2, i2, epsilon = 2e-11);
    }

    #[test]
    fn endpoints_never_evaluated() {
        let r = integrate01(
            |x: f64| {
                assert!(x > 0.0 && x < 1.0);
                1.0 / x.sqrt()
            },
            1e-6,
        );
        // 1/√x is improper at 0; we only care that 0 was never touched
        let _ = r;
    }

    #[test]
    fn subdivision_limit_reported() {
        let opts = QuadOptions {
            tol: 1e-14,
            max_subdivisions: 3,
        };
        let err = integrate01_with(|x: f64| (x - 1.0 / 3.0).abs().sqrt(), &opts).unwrap_err();
        assert!(matches!(err, Error::NoConvergence { .. }), "{err:?}");
        assert!(integrate01(|x: f64| x, 0.0).is_err());
        assert!(matches!(
            integrate01(|_x: f64| f64::NAN, 1e-8).unwrap_err(),
            Error::NonFinite(_)
        ));
    }

    #[test]
    fn doubling_limit_stays_within_error_estimate() {
        let f = |x: f64| (x - 0.3).abs().powf(1.5) + (20.0 * x).sin();
        let a = integrate01_with(
            f,
            &QuadOptions {
                tol: 1e-10,
                max_subdivisions: 200,
            },
        )
        .unwrap();
        let b = integrate01_with(
            f,
            &QuadOptions {
                tol: 1e-10,
                max_subdivisions: 400,
            },
        )
        .unwrap();
        assert!((a.value - b.value).abs() <= a.abs_error_estimate);
    }

    #[test]
    fn single_precision_works() {
        let r = integrate01(|x: f32| x * x, 1e-10).unwrap();
        assert!((r.value - 1.0 / 3.0).abs() < 1e-6);
    }

    proptest! {
        #[test]
        fn moments_are_ordered(a in 0.2_f64..20.0, b in 0.2_f64..20.0) {
            let d = Beta::new(a, b).unwrap();
            let m = cdf_moments(&d, 1e-10).unwrap();
            prop_assert!(m.i2 >= -1e-10);
            prop_assert!(m.i2 <= m.i1 + 1e-10);
            prop_assert!(m.i1 <= 1.0 + 1e-10);
            prop_assert!(m.i1_error >= 0.0 && m.i2_error >= 0.0);
        }
    }
}
