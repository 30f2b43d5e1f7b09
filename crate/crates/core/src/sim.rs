//! Monte-Carlo check of the mapping: solve a family for `(m, c)`, draw a
//! large sample of risks and outcomes, and compare the empirical mean and
//! c-statistic with the targets.
//!
//! The simulation runs in `f64` only.

use std::io::{self, Write};

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution as _, Gamma};
use rayon::prelude::*;

use crate::dist::{Family, FamilyParams};
use crate::error::{Error, Result};
use crate::mapping::{map_family, MapOptions, MeanCstat};
use crate::special::{expit, std_normal_cdf, std_normal_quantile};

/// Column names of the grid CSV.
pub const CSV_HEADER: &str = "family,m,c,p1,p2,n,m_hat,c_hat,dm,dc,converged,seed";

const RISK_STREAM: u64 = 0;
const OUTCOME_STREAM: u64 = 1;

// Largest double below one.
const ONE_BELOW: f64 = 1.0 - f64::EPSILON / 2.0;

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Uniform on the open interval `(0, 1)`: midpoints of the 2⁵³ grid.
fn open_unit(rng: &mut impl RngCore) -> f64 {
    ((rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
}

fn check_se(se: f64) -> Result<()> {
    if se > 0.0 && se.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!(
            "target standard error must be positive, got {se}"
        )))
    }
}

/// Smallest `n` with `sqrt(m(1 − m)/n) ≤ se`.
pub fn wald_n(m: f64, se: f64) -> Result<u64> {
    if !(m > 0.0 && m < 1.0) {
        return Err(Error::domain(format!("mean must lie in (0, 1), got {m}")));
    }
    check_se(se)?;
    let ratio = m * (1.0 - m) / (se * se);
    // Forgive rounding in the ratio so that 0.25/1e-6 gives 250000, not 250001.
    let n = (ratio * (1.0 - 1e-12)).ceil();
    Ok((n as u64).max(1))
}

/// Hanley–McNeil variance of the empirical c-statistic with `n` subjects,
/// `round(m·n)` of them cases. Infinite when a class is empty.
pub fn cstat_variance(m: f64, c: f64, n: u64) -> f64 {
    let cases = (m * n as f64).round();
    let controls = n as f64 - cases;
    if cases < 1.0 || controls < 1.0 {
        return f64::INFINITY;
    }
    let q1 = c / (2.0 - c);
    let q2 = 2.0 * c * c / (1.0 + c);
    let c2 = c * c;
    (c * (1.0 - c) + (cases - 1.0) * (q1 - c2) + (controls - 1.0) * (q2 - c2)) / (cases * controls)
}

/// Smallest `n` at which [`cstat_variance`] drops to `se²`, found by
/// doubling and then integer bisection.
pub fn newcombe_n(mc: &MeanCstat<f64>, se: f64) -> Result<u64> {
    check_se(se)?;
    let (m, c) = (mc.m(), mc.c());
    let target = se * se;
    let ok = |n: u64| cstat_variance(m, c, n) <= target;
    let mut hi = 2u64;
    while !ok(hi) {
        hi = hi
            .checked_mul(2)
            .ok_or_else(|| Error::domain(format!("no sample size reaches standard error {se}")))?;
    }
    let mut lo = hi / 2;
    if ok(lo) {
        return Ok(lo);
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if ok(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Sample size for a cell: the larger of the two rules, at least 2.
pub fn target_n(mc: &MeanCstat<f64>, se: f64) -> Result<u64> {
    Ok(wald_n(mc.m(), se)?.max(newcombe_n(mc, se)?).max(2))
}

/// `n` independent risks from `params`, reproducible from `seed`.
///
/// Beta draws use the ratio of two gamma variates; the normal families
/// transform inverse-CDF normals. Values are clamped into the open interval.
pub fn sample_risks(params: &FamilyParams<f64>, n: usize, seed: u64) -> Vec<f64> {
    let mut rng = rng_for(seed, RISK_STREAM);
    let clamp = |x: f64| x.clamp(f64::MIN_POSITIVE, ONE_BELOW);
    let normal =
        |rng: &mut ChaCha8Rng| std_normal_quantile(open_unit(rng)).expect("open unit interval");
    match params {
        FamilyParams::Beta(b) => {
            let ga = Gamma::new(b.alpha(), 1.0).expect("validated shape");
            let gb = Gamma::new(b.beta(), 1.0).expect("validated shape");
            (0..n)
                .map(|_| {
                    let x: f64 = ga.sample(&mut rng);
                    let y: f64 = gb.sample(&mut rng);
                    let r = if x + y > 0.0 { x / (x + y) } else { 0.5 };
                    clamp(r)
                })
                .collect()
        }
        FamilyParams::LogitNormal(d) => (0..n)
            .map(|_| clamp(expit(d.mu() + d.sigma() * normal(&mut rng))))
            .collect(),
        FamilyParams::ProbitNormal(d) => (0..n)
            .map(|_| clamp(std_normal_cdf(d.mu() + d.sigma() * normal(&mut rng))))
            .collect(),
    }
}

/// Bernoulli outcomes with success probabilities `risks`.
pub fn simulate_outcomes(risks: &[f64], seed: u64) -> Vec<bool> {
    let mut rng = rng_for(seed, OUTCOME_STREAM);
    risks.iter().map(|&p| rng.random::<f64>() < p).collect()
}

/// Mann–Whitney estimate of `P(risk of a case > risk of a control)`, ties
/// counting one half.
pub fn empirical_cstat(risks: &[f64], outcomes: &[bool]) -> Result<f64> {
    if risks.len() != outcomes.len() {
        return Err(Error::domain(format!(
            "{} risks but {} outcomes",
            risks.len(),
            outcomes.len()
        )));
    }
    if risks.iter().any(|r| r.is_nan()) {
        return Err(Error::NonFinite("empirical_cstat"));
    }
    let cases = outcomes.iter().filter(|&&y| y).count() as u64;
    let controls = outcomes.len() as u64 - cases;
    if cases == 0 || controls == 0 {
        return Err(Error::Degenerate(format!(
            "c-statistic undefined with {cases} cases and {controls} controls"
        )));
    }
    let mut order: Vec<usize> = (0..risks.len()).collect();
    order.sort_unstable_by(|&i, &j| risks[i].total_cmp(&risks[j]));

    // Twice the rank sum of the cases; a tie block at 1-based positions
    // i..=j has doubled average rank i + j, so everything stays integral.
    let mut doubled = 0u64;
    let mut start = 0;
    while start < order.len() {
        let value = risks[order[start]];
        let mut end = start + 1;
        while end < order.len() && risks[order[end]] == value {
            end += 1;
        }
        let block_cases = order[start..end].iter().filter(|&&k| outcomes[k]).count() as u64;
        doubled += block_cases * (start as u64 + 1 + end as u64);
        start = end;
    }
    let doubled_u = doubled - cases * (cases + 1);
    Ok(doubled_u as f64 / (2.0 * cases as f64 * controls as f64))
}

/// Per-cell seed mixed from the base seed and the cell's grid position.
pub fn cell_seed(base_seed: u64, family: Family, m_index: usize, c_index: usize) -> u64 {
    fn mix(mut z: u64) -> u64 {
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }
    let family_index = Family::ALL.iter().position(|&f| f == family).unwrap_or(0) as u64;
    [family_index, m_index as u64, c_index as u64]
        .into_iter()
        .fold(mix(base_seed), |h, x| {
            mix(h ^ x.wrapping_add(0x9e37_79b9_7f4a_7c15))
        })
}

/// Evenly spaced values from `from` to `to` (inclusive), rounded to 12
/// decimals so that `0.01 + 2·0.01` prints as `0.03`.
pub fn grid_values(from: f64, to: f64, step: f64) -> Result<Vec<f64>> {
    if !(from.is_finite() && to.is_finite() && step.is_finite()) || step <= 0.0 || to < from {
        return Err(Error::domain(format!(
            "bad grid range {from}..{to} step {step}"
        )));
    }
    let count = ((to - from) / step + 1e-9).floor() as usize + 1;
    Ok((0..count)
        .map(|i| ((from + i as f64 * step) * 1e12).round() / 1e12)
        .collect())
}

/// Grid of `(family, m, c)` cells to simulate.
#[derive(Debug, Clone, PartialEq)]
pub struct SimGrid {
    pub families: Vec<Family>,
    pub m_values: Vec<f64>,
    pub c_values: Vec<f64>,
    pub se_target: f64,
    pub base_seed: u64,
    pub options: MapOptions<f64>,
}

impl SimGrid {
    pub fn new(
        families: Vec<Family>,
        m_values: Vec<f64>,
        c_values: Vec<f64>,
        se_target: f64,
        base_seed: u64,
    ) -> Result<Self> {
        check_se(se_target)?;
        if families.is_empty() || m_values.is_empty() || c_values.is_empty() {
            return Err(Error::domain("grid has no cells"));
        }
        for &m in &m_values {
            for &c in &c_values {
                MeanCstat::new(m, c)?;
            }
        }
        Ok(Self {
            families,
            m_values,
            c_values,
            se_target,
            base_seed,
            options: MapOptions::default(),
        })
    }

    pub fn with_options(mut self, options: MapOptions<f64>) -> Self {
        self.options = options;
        self
    }

    pub fn len(&self) -> usize {
        self.families.len() * self.m_values.len() * self.c_values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn cell_index(&self, k: usize) -> (Family, usize, usize) {
        let per_family = self.m_values.len() * self.c_values.len();
        let family = self.families[k / per_family];
        let rest = k % per_family;
        (
            family,
            rest / self.c_values.len(),
            rest % self.c_values.len(),
        )
    }
}

/// Sample estimates for one cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimates {
    /// Proportion of positive outcomes.
    pub m_hat: f64,
    pub c_hat: f64,
    pub dm: f64,
    pub dc: f64,
    /// Mean of the drawn risks (not written to the CSV).
    pub risk_mean: f64,
}

/// One simulated `(family, m, c)` cell.
#[derive(Debug, Clone, PartialEq)]
pub struct SimCell {
    pub family: Family,
    pub m: f64,
    pub c: f64,
    pub seed: u64,
    pub n: u64,
    /// `None` when the solve failed outright.
    pub params: Option<FamilyParams<f64>>,
    pub converged: bool,
    pub estimates: Option<Estimates>,
    pub failure: Option<String>,
}

impl SimCell {
    /// `max(|dm|, |dc|)`, if the cell produced estimates.
    pub fn max_error(&self) -> Option<f64> {
        self.estimates.map(|e| e.dm.abs().max(e.dc.abs()))
    }
}

/// Simulates one cell.
pub fn run_cell(
    family: Family,
    mc: &MeanCstat<f64>,
    se: f64,
    seed: u64,
    options: &MapOptions<f64>,
) -> Result<SimCell> {
    let n = target_n(mc, se)?;
    let mut cell = SimCell {
        family,
        m: mc.m(),
        c: mc.c(),
        seed,
        n,
        params: None,
        converged: false,
        estimates: None,
        failure: None,
    };
    let report = match map_family(family, mc, options) {
        Ok(r) => r,
        Err(e) => {
            cell.failure = Some(e.to_string());
            return Ok(cell);
        }
    };
    cell.params = Some(report.params);
    cell.converged = report.converged;

    let count =
        usize::try_from(n).map_err(|_| Error::domain(format!("sample size {n} too large")))?;
    let risks = sample_risks(&report.params, count, seed);
    let outcomes = simulate_outcomes(&risks, seed);
    let c_hat = match empirical_cstat(&risks, &outcomes) {
        Ok(c) => c,
        Err(e) => {
            cell.failure = Some(e.to_string());
            return Ok(cell);
        }
    };
    let m_hat = outcomes.iter().filter(|&&y| y).count() as f64 / count as f64;
    let risk_mean = risks.iter().sum::<f64>() / count as f64;
    cell.estimates = Some(Estimates {
        m_hat,
        c_hat,
        dm: m_hat - mc.m(),
        dc: c_hat - mc.c(),
        risk_mean,
    });
    Ok(cell)
}

/// Simulates every cell of `grid` on the current rayon pool. Output order is
/// family, then `m`, then `c`, independent of scheduling.
pub fn run_grid(grid: &SimGrid) -> Result<Vec<SimCell>> {
    (0..grid.len())
        .into_par_iter()
        .map(|k| {
            let (family, mi, ci) = grid.cell_index(k);
            let mc = MeanCstat::new(grid.m_values[mi], grid.c_values[ci])?;
            let seed = cell_seed(grid.base_seed, family, mi, ci);
            run_cell(family, &mc, grid.se_target, seed, &grid.options)
        })
        .collect()
}

/// [`run_grid`] on a dedicated pool of `threads` workers.
pub fn run_grid_with_threads(grid: &SimGrid, threads: usize) -> Result<Vec<SimCell>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::domain(format!("cannot start {threads} worker threads: {e}")))?;
    pool.install(|| run_grid(grid))
}

/// Writes `cells` as CSV. Failed cells leave the parameter and estimate
/// columns empty.
pub fn write_csv<W: Write>(cells: &[SimCell], mut out: W) -> io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for cell in cells {
        write!(out, "{},{},{},", cell.family, cell.m, cell.c)?;
        match cell.params {
            Some(p) => {
                let (p1, p2) = p.values();
                write!(out, "{p1},{p2},")?;
            }
            None => write!(out, ",,")?,
        }
        write!(out, "{},", cell.n)?;
        match cell.estimates {
            Some(e) => write!(out, "{},{},{},{},", e.m_hat, e.c_hat, e.dm, e.dc)?,
            None => write!(out, ",,,,")?,
        }
        writeln!(out, "{},{}", cell.converged, cell.seed)?;
    }
    Ok(())
}
