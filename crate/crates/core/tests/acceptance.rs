//! Acceptance gate. Runs every criterion, prints one PASS/FAIL line each and
//! exits non-zero if any fails. `cargo test --test acceptance -- --full` adds
//! the full 50 × 49 simulation grid.

use std::process::{Command, ExitCode};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use riskdist::counterexample::{verify_median_counterexample, verify_mode_counterexample};
use riskdist::dist::{mirror, Beta, Family, FamilyParams, LogitNormal, ProbitNormal};
use riskdist::mapping::{
    map_beta, map_family, mean_cstat_of, mirror_solution, MapOptions, MeanCstat,
};
use riskdist::quad::integrate01;
use riskdist::sim::{grid_values, run_grid, run_grid_with_threads, write_csv, SimGrid};
use riskdist::special::{reg_inc_beta, std_normal_cdf, std_normal_quantile};

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(ok: bool, detail: String) -> Check {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn opts() -> MapOptions<f64> {
    MapOptions::default()
}

fn random_params(rng: &mut ChaCha8Rng, family: Family) -> FamilyParams<f64> {
    match family {
        Family::Beta => {
            let a = 10f64.powf(rng.random_range(-0.5..1.3));
            let b = 10f64.powf(rng.random_range(-0.5..1.3));
            FamilyParams::Beta(Beta::new(a, b).unwrap())
        }
        Family::LogitNormal => FamilyParams::LogitNormal(
            LogitNormal::new(rng.random_range(-3.0..3.0), rng.random_range(0.1..3.0)).unwrap(),
        ),
        Family::ProbitNormal => FamilyParams::ProbitNormal(
            ProbitNormal::new(rng.random_range(-2.0..2.0), rng.random_range(0.1..3.0)).unwrap(),
        ),
    }
}

fn beta_anchors() -> Check {
    let cases = [
        (0.5, 5.0 / 6.0, 1.0, 1.0),
        (0.5, 53.0 / 70.0, 2.0, 2.0),
        (0.25, 11.0 / 14.0, 1.0, 3.0),
    ];
    let mut worst = 0.0f64;
    for (m, c, a, b) in cases {
        let r = map_beta(&MeanCstat::new(m, c).map_err(|e| e.to_string())?, &opts())
            .map_err(|e| e.to_string())?;
        let (pa, pb) = r.params.values();
        worst = worst.max((pa - a).abs()).max((pb - b).abs());
    }
    ensure(
        worst <= 1e-6,
        format!("max parameter error {worst:.2e} (tol 1e-6)"),
    )
}

fn round_trip() -> Check {
    let mut points = Vec::new();
    for a in [0.5, 1.0, 2.0, 5.0] {
        for b in [0.5, 1.0, 2.0, 5.0] {
            points.push(FamilyParams::Beta(Beta::new(a, b).unwrap()));
        }
    }
    for mu in [-2.0, -1.0, 0.0] {
        for sigma in [0.25, 0.5, 1.0, 2.0] {
            points.push(FamilyParams::LogitNormal(
                LogitNormal::new(mu, sigma).unwrap(),
            ));
            points.push(FamilyParams::ProbitNormal(
                ProbitNormal::new(mu, sigma).unwrap(),
            ));
        }
    }
    let mut failures = Vec::new();
    let mut worst = [0.0f64; 3];
    for p in &points {
        let family = p.family();
        let tol = if family == Family::LogitNormal {
            1e-5
        } else {
            1e-6
        };
        let outcome = mean_cstat_of(p, 1e-12)
            .and_then(|mc| MeanCstat::new(mc.m(), mc.c()))
            .and_then(|mc| map_family(family, &mc, &opts()));
        let (t1, t2) = p.values();
        match outcome {
            Ok(r) => {
                let (s1, s2) = r.params.values();
                let err = (s1 - t1).abs().max((s2 - t2).abs());
                let slot = &mut worst[Family::ALL.iter().position(|&f| f == family).unwrap()];
                *slot = slot.max(err);
                if err > tol {
                    failures.push(format!("{family}({t1}, {t2}) error {err:.2e}"));
                }
            }
            Err(e) => failures.push(format!("{family}({t1}, {t2}): {e}")),
        }
    }
    let detail = format!(
        "{} points, max error beta {:.1e} logitnorm {:.1e} probitnorm {:.1e} (tol 1e-6 / 1e-5 / 1e-6)",
        points.len(),
        worst[0],
        worst[1],
        worst[2]
    );
    ensure(
        failures.is_empty(),
        if failures.is_empty() {
            detail
        } else {
            format!("{detail}; {}", failures.join("; "))
        },
    )
}

fn identity() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = 0.0f64;
    for i in 0..100 {
        let p = random_params(&mut rng, Family::ALL[i % 3]);
        let mc = mean_cstat_of(&p, 1e-12).map_err(|e| format!("{p:?}: {e}"))?;
        let i2 = integrate01(
            |x| {
                let f = riskdist::dist::Distribution::cdf(&p, x);
                f * f
            },
            1e-12,
        )
        .map_err(|e| format!("{p:?}: {e}"))?
        .value;
        let (m, c) = (mc.m(), mc.c());
        let lhs = m * (1.0 - m) * c + 0.5 * m * m + 0.5 * i2;
        worst = worst.max((lhs - 0.5).abs());
    }
    ensure(
        worst <= 1e-8,
        format!("100 random members, max |lhs - 1/2| {worst:.2e} (tol 1e-8)"),
    )
}

fn reduced_grid() -> Check {
    let grid = SimGrid::new(
        Family::ALL.to_vec(),
        vec![0.1, 0.3, 0.5],
        vec![0.6, 0.75, 0.9],
        0.001,
        20_240_101,
    )
    .map_err(|e| e.to_string())?;
    grid_check(&grid, 1.0)
}

fn full_grid() -> Check {
    let m = grid_values(0.01, 0.50, 0.01).map_err(|e| e.to_string())?;
    let c = grid_values(0.51, 0.99, 0.01).map_err(|e| e.to_string())?;
    let grid =
        SimGrid::new(Family::ALL.to_vec(), m, c, 0.001, 20_240_101).map_err(|e| e.to_string())?;
    grid_check(&grid, 0.99)
}

/// Passes when at least `share` of the cells converged with both errors
/// within 0.005.
fn grid_check(grid: &SimGrid, share: f64) -> Check {
    let cells = run_grid(grid).map_err(|e| e.to_string())?;
    let converged: Vec<_> = cells
        .iter()
        .filter(|c| c.converged && c.estimates.is_some())
        .collect();
    let good = converged
        .iter()
        .filter(|c| c.max_error().unwrap() <= 0.005)
        .count();
    let worst = converged
        .iter()
        .filter_map(|c| c.max_error())
        .fold(0.0, f64::max);
    let detail = format!(
        "{} cells, {} converged, {good} within 0.005, max error {worst:.4}",
        cells.len(),
        converged.len()
    );
    let needed = (share * cells.len() as f64).ceil() as usize;
    ensure(
        good >= needed && (share < 1.0 || good == converged.len()),
        detail,
    )
}

fn mirrors() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut dc, mut dm, mut ds) = (0.0f64, 0.0f64, 0.0f64);
    for family in Family::ALL {
        for _ in 0..20 {
            let p = random_params(&mut rng, family);
            let fail = |e: riskdist::Error| format!("{p:?}: {e}");
            let mc = mean_cstat_of(&p, 1e-12).map_err(fail)?;
            let reflected = mean_cstat_of(&mirror(p), 1e-12).map_err(fail)?;
            dc = dc.max((reflected.c() - mc.c()).abs());
            dm = dm.max((reflected.m() - (1.0 - mc.m())).abs());
            let (target, solved) = mirror_solution(&mc, &p);
            let forward = mean_cstat_of(&solved, 1e-12).map_err(fail)?;
            ds = ds
                .max((forward.m() - target.m()).abs())
                .max((forward.c() - target.c()).abs());
        }
    }
    ensure(
        dc <= 1e-8 && dm <= 1e-8 && ds <= 1e-8,
        format!("60 members, |dc| {dc:.1e}, |dm| {dm:.1e}, mirror_solution {ds:.1e} (tol 1e-8)"),
    )
}

fn counterexamples() -> Check {
    let mut failed = Vec::new();
    for a in [0.1, 0.2, 0.3, 0.4] {
        match verify_mode_counterexample(a) {
            Ok(r) if r.verified() => {}
            Ok(r) => failed.push(format!("mode a={a}: {r:?}")),
            Err(e) => failed.push(format!("mode a={a}: {e}")),
        }
    }
    for a in [0.05, 0.1, 0.2] {
        match verify_median_counterexample(a) {
            Ok(r) if r.verified() => {}
            Ok(r) => failed.push(format!("median a={a}: {r:?}")),
            Err(e) => failed.push(format!("median a={a}: {e}")),
        }
    }
    ensure(
        failed.is_empty(),
        if failed.is_empty() {
            "mode a = 0.1, 0.2, 0.3, 0.4 and median a = 0.05, 0.1, 0.2 verified".into()
        } else {
            failed.join("; ")
        },
    )
}

fn special_functions() -> Check {
    let mut round = 0.0f64;
    let n = 100_000;
    for i in 0..=n {
        // Log-spaced into both tails plus a linear sweep of the middle.
        let t = i as f64 / n as f64;
        let tail = 10f64.powf(-6.0 + 5.7 * t);
        for p in [tail, 1.0 - tail, 1e-6 + t * (1.0 - 2e-6)] {
            let q = std_normal_quantile(p).map_err(|e| e.to_string())?;
            round = round.max((std_normal_cdf(q) - p).abs());
        }
    }
    let mut refl = 0.0f64;
    let shapes: Vec<f64> = (0..40)
        .map(|k| 0.1 * (500.0f64).powf(k as f64 / 39.0))
        .collect();
    for &a in &shapes {
        for &b in &shapes {
            for k in 0..=50 {
                let x = k as f64 / 50.0;
                let s = reg_inc_beta(x, a, b).map_err(|e| e.to_string())?
                    + reg_inc_beta(1.0 - x, b, a).map_err(|e| e.to_string())?;
                refl = refl.max((s - 1.0).abs());
            }
        }
    }
    ensure(
        round <= 1e-10 && refl <= 1e-12,
        format!("quantile round trip {round:.1e} (tol 1e-10), incomplete-beta reflection {refl:.1e} (tol 1e-12)"),
    )
}

fn csv_bytes(grid: &SimGrid, threads: usize) -> Result<Vec<u8>, String> {
    let cells = run_grid_with_threads(grid, threads).map_err(|e| e.to_string())?;
    let mut out = Vec::new();
    write_csv(&cells, &mut out).map_err(|e| e.to_string())?;
    Ok(out)
}

fn determinism() -> Check {
    let grid = SimGrid::new(
        Family::ALL.to_vec(),
        vec![0.2, 0.4],
        vec![0.65, 0.8],
        0.004,
        99,
    )
    .map_err(|e| e.to_string())?;
    let first = csv_bytes(&grid, 1)?;
    for threads in [1, 2, 4] {
        if csv_bytes(&grid, threads)? != first {
            return Err(format!("library CSV differs with {threads} threads"));
        }
    }

    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut outputs = Vec::new();
    for (run, threads) in [(0, "1"), (1, "1"), (2, "3")] {
        let path = dir.path().join(format!("run{run}.csv"));
        let status = Command::new(env!("CARGO_BIN_EXE_riskdist"))
            .args([
                "grid",
                "--families",
                "beta,probitnorm",
                "--m-from",
                "0.2",
                "--m-to",
                "0.4",
                "--m-step",
                "0.2",
            ])
            .args([
                "--c-from", "0.65", "--c-to", "0.8", "--c-step", "0.15", "--se", "0.004", "--seed",
                "99",
            ])
            .args(["--threads", threads, "--out"])
            .arg(&path)
            .output()
            .map_err(|e| e.to_string())?;
        if !status.status.success() {
            return Err(format!("grid exited with {}", status.status));
        }
        outputs.push(std::fs::read(&path).map_err(|e| e.to_string())?);
    }
    ensure(
        outputs.iter().all(|o| *o == outputs[0]),
        format!(
            "{} library rows identical over 1/2/4 threads, CLI output identical over two runs and 1/3 threads",
            first.iter().filter(|&&b| b == b'\n').count() - 1
        ),
    )
}

fn main() -> ExitCode {
    let full = std::env::args().any(|a| a == "--full");
    let mut criteria: Vec<Criterion> = vec![
        ("1 beta closed-form anchors", beta_anchors),
        ("2 round trip over the parameter grid", round_trip),
        ("3 integral identity on random members", identity),
        ("4 simulation accuracy on the reduced grid", reduced_grid),
        ("5 mirror properties", mirrors),
        ("6 mode and median counterexamples", counterexamples),
        ("7 special-function accuracy", special_functions),
        ("8 grid determinism", determinism),
    ];
    if full {
        criteria.push((
            "4 (full) simulation accuracy on the 50 x 49 grid",
            full_grid,
        ));
    }
    let mut all = true;
    for (name, check) in criteria {
        let start = Instant::now();
        let result = check();
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("PASS criterion {name}: {detail} [{secs:.1}s]"),
            Err(detail) => {
                all = false;
                println!("FAIL criterion {name}: {detail} [{secs:.1}s]");
            }
        }
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
