//! Identification of two-parameter risk distributions on `[0, 1]` from a
//! population mean `m` and a c-statistic `c`.
//!
//! Any family whose CDF `F` is continuous, strictly increasing and
//! quantile-identifiable is pinned down by the pair of integrals
//!
//! ```text
//! ∫₀¹ F(x) dx  = 1 − m
//! ∫₀¹ F²(x) dx = 1 − 2cm + (2c − 1)m²
//! ```
//!
//! The [`mapping`] module solves those equations for the beta, logit-normal
//! and probit-normal families (and for any user supplied family), and
//! [`mapping::mean_cstat_of`] evaluates the forward direction. [`sim`] holds
//! the Monte-Carlo accuracy study and [`counterexample`] checks that mode or
//! median paired with `c` do not identify a distribution.
//!
//! The numerical core is generic over the scalar type ([`Real`], implemented
//! for `f32` and `f64`). The aliases at the crate root fix the scalar to `f64`.

// `!(x > 0)` style checks reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod counterexample;
pub mod dist;
pub mod error;
pub mod mapping;
pub mod quad;
pub mod real;
pub mod sim;
pub mod solver;
pub mod special;

pub use error::{Error, Result};
pub use real::Real;

pub type BetaParams = dist::Beta<f64>;
pub type LogitNormalParams = dist::LogitNormal<f64>;
pub type ProbitNormalParams = dist::ProbitNormal<f64>;
pub type FamilyParams = dist::FamilyParams<f64>;
pub type Triangular = dist::Triangular<f64>;
pub type TriangularMixture = dist::TwoComponentMixture<f64>;

pub type MeanCstat = mapping::MeanCstat<f64>;
pub type TargetIntegrals = mapping::TargetIntegrals<f64>;
pub type SolveReport<P = FamilyParams> = mapping::SolveReport<f64, P>;
pub type MapOptions = mapping::MapOptions<f64>;

pub type QuadResult = quad::QuadResult<f64>;
pub type RootResult = solver::RootResult<f64>;
pub type MinResult = solver::MinResult<f64>;
