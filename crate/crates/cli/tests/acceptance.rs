//! Acceptance suite. Every criterion runs even when an earlier one fails,
//! prints one `PASS`/`FAIL` line, and the process exits nonzero on any failure.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use symm_core::geometry::{build_mesh, Geometry};
use symm_core::pde::{moment_hierarchy, smallest_eigenpairs};
use symm_core::radial::{
    chiti_constant, faber_krahn_bound, moment_sequence_ball, second_eig_bound,
    SymmetrizationContext,
};
use symm_core::rearrange::{hardy_littlewood_gap, hlp_dominance, WeightedSample};
use symm_core::source::Source;
use symm_core::specialfn::{bessel_first_zero, unit_ball_volume, BesselOrder};
use symm_core::verify::{
    convergence_study, richardson, talenti_profiles, Check, ComparisonReport, Extrapolation,
};

const SQUARE_LEVELS: [usize; 3] = [32, 64, 128];
const DISK_LEVELS: [usize; 3] = [16, 32, 64];
const SEED: u64 = 7;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn within_budget(start: Instant, limit: Duration) -> Result<Duration, String> {
    let t = start.elapsed();
    ensure!(t < limit, "took {t:.2?}, limit {limit:?}");
    Ok(t)
}

fn study(check: Check, g: &Geometry, levels: &[usize]) -> Result<Vec<ComparisonReport>, String> {
    convergence_study(&check, g, levels, &Source::default(), SEED).map_err(|e| e.to_string())
}

fn fit(r: &ComparisonReport) -> Result<&Extrapolation, String> {
    r.extrapolation
        .as_ref()
        .ok_or_else(|| format!("{:?} has no extrapolation", r.theorem))
}

fn param(r: &ComparisonReport, key: &str) -> f64 {
    r.params[key].as_f64().expect("numeric parameter")
}

fn spacings(levels: &[usize; 3]) -> [f64; 3] {
    levels.map(|n| 1.0 / n as f64)
}

fn constants_table() -> Outcome {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for n in 2u32..=6 {
        let omega = unit_ball_volume(n).map_err(|e| e.to_string())?;
        let ctx = SymmetrizationContext::new(n, 1.0, omega).map_err(|e| e.to_string())?;
        let ball = moment_sequence_ball(&ctx, 2).map_err(|e| e.to_string())?;
        let nf = f64::from(n);
        let t1 = 1.0 / (nf * (nf + 2.0));
        let t2 = 4.0 / (nf * nf * (nf + 2.0) * (nf + 4.0));
        let e1 = (ball[0].torsion / omega - t1).abs();
        let e2 = (ball[1].torsion / omega - t2).abs();
        ensure!(e1 <= 1e-10 && e2 <= 1e-10, "n={n}: errors {e1:e}, {e2:e}");
        worst = worst.max(e1).max(e2);
    }
    let t = within_budget(start, Duration::from_secs(1))?;
    Ok(format!("max |error| {worst:.1e} for n = 2..6 in {t:.2?}"))
}

/// `J₀(x) = (1/π) ∫₀^π cos(x sin θ) dθ`; the trapezoid rule converges
/// geometrically on this periodic integrand.
fn j0_by_integral(x: f64) -> f64 {
    let m = 256;
    let h = PI / m as f64;
    let mut acc = 0.5 * (1.0 + (x * PI.sin()).cos());
    for k in 1..m {
        acc += (x * (k as f64 * h).sin()).cos();
    }
    acc * h / PI
}

fn bessel_kernel() -> Outcome {
    let start = Instant::now();
    let (mut lo, mut hi) = (2.0, 3.0);
    while hi - lo > 1e-15 {
        let mid = 0.5 * (lo + hi);
        if j0_by_integral(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let oracle = 0.5 * (lo + hi);
    let j0 = bessel_first_zero(BesselOrder::new(0.0).unwrap()).map_err(|e| e.to_string())?;
    let jh = bessel_first_zero(BesselOrder::new(0.5).unwrap()).map_err(|e| e.to_string())?;
    ensure!((j0 - oracle).abs() <= 1e-11, "j0 {j0} vs oracle {oracle}");
    ensure!((j0 - 2.404825557695773).abs() <= 1e-11, "j0 {j0}");
    ensure!((jh - PI).abs() <= 1e-12, "j_1/2 {jh}");
    let t = within_budget(start, Duration::from_secs(1))?;
    Ok(format!(
        "j0 = {j0:.15}, oracle {oracle:.15}, j_1/2 - pi = {:.1e} in {t:.2?}",
        jh - PI
    ))
}

#[allow(clippy::approx_constant)]
fn faber_krahn_square() -> Outcome {
    let start = Instant::now();
    let r = study(Check::FaberKrahn, &Geometry::unit_square(), &SQUARE_LEVELS)?.remove(0);
    let e = fit(&r)?;
    let bound = param(&r, "bound");
    let j = bessel_first_zero(BesselOrder::new(0.0).unwrap()).unwrap();
    ensure!((bound - PI * j * j).abs() <= 1e-10, "bound {bound}");
    ensure!((bound - 18.1684).abs() <= 1e-4, "bound {bound}");
    let lambda = e.slack0 + bound;
    let target = 2.0 * PI * PI;
    ensure!(
        (lambda - target).abs() <= 2e-3 * target,
        "lambda1 extrapolates to {lambda}"
    );
    ensure!((e.slack0 - 1.5708).abs() <= 0.05, "slack0 {}", e.slack0);
    ensure!(r.passed, "report failed: {r:?}");
    let t = within_budget(start, Duration::from_secs(30))?;
    Ok(format!(
        "lambda1 -> {lambda:.5} (2pi^2 = {target:.5}), bound {bound:.4}, slack0 {:.4}, rate {:.2} in {t:.2?}",
        e.slack0,
        e.rate.unwrap_or(f64::NAN)
    ))
}

fn talenti_square() -> Outcome {
    let start = Instant::now();
    let g = Geometry::unit_square();
    let mut last = None;
    for n in SQUARE_LEVELS {
        let mesh = build_mesh(&g.at(n)).map_err(|e| e.to_string())?;
        let prof = talenti_profiles(&mesh, &Source::default(), SEED).map_err(|e| e.to_string())?;
        let bad = prof
            .u_star
            .iter()
            .zip(&prof.v_star)
            .filter(|(u, v)| u > v)
            .count();
        ensure!(
            bad == 0,
            "N={n}: u* > v* at {bad} of {} points",
            prof.s.len()
        );
        last = Some(prof);
    }
    let prof = last.unwrap();
    let (u0, v0) = (prof.u_star[0], prof.v_star[0]);
    ensure!((u0 - 0.07367).abs() <= 5e-4, "u*(0) = {u0}");
    ensure!((v0 - 1.0 / (4.0 * PI)).abs() <= 1e-10, "v*(0) = {v0}");
    let t = within_budget(start, Duration::from_secs(30))?;
    Ok(format!(
        "u* <= v* at all points, u*(0) = {u0:.5}, v*(0) = {v0:.5}, min slack {:.2e} in {t:.2?}",
        prof.min_slack()
    ))
}

fn disk_equality() -> Outcome {
    let start = Instant::now();
    let g = Geometry::unit_disk();
    let mut reports = study(Check::Talenti, &g, &DISK_LEVELS)?;
    reports.extend(study(Check::FaberKrahn, &g, &DISK_LEVELS)?);
    let moments = study(Check::Moments { k_max: 1 }, &g, &DISK_LEVELS)?;
    reports.push(moments[0].clone());
    reports.extend(study(
        Check::Chiti {
            p: 1.0,
            q: 2.0,
            eigenpair: 1,
        },
        &g,
        &DISK_LEVELS,
    )?);
    let mut line = Vec::new();
    for r in &reports {
        let e = fit(r)?;
        let rate = e.rate.unwrap_or(f64::NAN);
        ensure!(e.conclusive, "{:?}: inconclusive fit", r.theorem);
        ensure!(
            e.slack0.abs() <= 1e-3,
            "{:?}: slack0 {}",
            r.theorem,
            e.slack0
        );
        ensure!(rate >= 1.0, "{:?}: rate {rate}", r.theorem);
        ensure!(r.passed, "{:?} failed", r.theorem);
        line.push(format!("{:?} {:.1e}/{rate:.2}", r.theorem, e.slack0));
    }
    let normalized = param(&moments[0], "normalized");
    ensure!(
        (normalized - 0.125).abs() <= 1e-3,
        "normalized torsion {normalized}"
    );
    let t = within_budget(start, Duration::from_secs(60))?;
    Ok(format!(
        "{}; normalized {normalized:.6} in {t:.2?}",
        line.join(", ")
    ))
}

fn cone_sharpness() -> Outcome {
    let start = Instant::now();
    let ball = Geometry::ConeRadial {
        alpha: 0.5,
        r_min: 0.0,
        r_max: 1.0,
    };
    let levels = [256usize, 512, 1024];
    let mut torsion_gap = [0.0; 3];
    let mut lambda_gap = [0.0; 3];
    for (i, &n) in levels.iter().enumerate() {
        let mesh = build_mesh(&ball.at(n)).map_err(|e| e.to_string())?;
        let ctx = SymmetrizationContext::new(2, 0.5, mesh.volume()).map_err(|e| e.to_string())?;
        let sharp = moment_sequence_ball(&ctx, 1).map_err(|e| e.to_string())?;
        let rows = moment_hierarchy(&mesh, 1).map_err(|e| e.to_string())?;
        torsion_gap[i] = rows[1].torsion - ctx.avr() * sharp[0].torsion;
        let lambda = smallest_eigenpairs(&mesh, 1).map_err(|e| e.to_string())?[0].lambda;
        lambda_gap[i] = lambda - faber_krahn_bound(&ctx).map_err(|e| e.to_string())?;
    }
    let tg = richardson(spacings(&levels), torsion_gap);
    let lg = richardson(spacings(&levels), lambda_gap);
    ensure!(
        tg.slack0.abs() <= 1e-8,
        "T - AVR T# extrapolates to {:e}",
        tg.slack0
    );
    ensure!(
        lg.slack0.abs() <= 1e-8,
        "lambda1 - FK extrapolates to {:e}",
        lg.slack0
    );

    let sector = Geometry::ConePolar {
        alpha: 0.7,
        r_min: 1.0,
        r_max: 2.0,
        theta_span: PI,
    };
    let checks = [
        Check::Talenti,
        Check::FaberKrahn,
        Check::Hks,
        Check::Moments { k_max: 1 },
        Check::Chiti {
            p: 1.0,
            q: 2.0,
            eigenpair: 1,
        },
    ];
    let mut min_slack = f64::INFINITY;
    for check in checks {
        for r in study(check, &sector, &DISK_LEVELS)? {
            ensure!(r.passed, "sector {:?} failed", r.theorem);
            for l in &r.levels {
                ensure!(
                    l.slack > 0.0,
                    "sector {:?} N={}: slack {}",
                    r.theorem,
                    l.resolution,
                    l.slack
                );
                min_slack = min_slack.min(l.slack);
            }
        }
    }
    let t = within_budget(start, Duration::from_secs(30))?;
    Ok(format!(
        "ball: torsion gap {:.1e}, eigen gap {:.1e}; sector min slack {min_slack:.2e} in {t:.2?}",
        tg.slack0, lg.slack0
    ))
}

fn hks_square() -> Outcome {
    let start = Instant::now();
    let r = study(Check::Hks, &Geometry::unit_square(), &SQUARE_LEVELS)?.remove(0);
    let e = fit(&r)?;
    let bound = param(&r, "bound");
    let ctx = SymmetrizationContext::new(2, 1.0, 1.0).unwrap();
    ensure!(
        (bound - second_eig_bound(&ctx).unwrap()).abs() <= 1e-12,
        "bound {bound}"
    );
    ensure!((bound - 36.337).abs() <= 1e-3, "bound {bound}");
    let lambda2 = e.slack0 + bound;
    let target = 5.0 * PI * PI;
    ensure!(
        (lambda2 - target).abs() <= 2e-3 * target,
        "lambda2 extrapolates to {lambda2}"
    );
    ensure!((e.slack0 - 13.0).abs() <= 0.3, "slack0 {}", e.slack0);
    ensure!(r.levels.iter().all(|l| l.slack > 0.0), "non-strict level");
    let t = within_budget(start, Duration::from_secs(30))?;
    Ok(format!(
        "lambda2 -> {lambda2:.4} (5pi^2 = {target:.4}), bound {bound:.4}, slack0 {:.3} in {t:.2?}",
        e.slack0
    ))
}

fn chiti_square() -> Outcome {
    let start = Instant::now();
    let levels = SQUARE_LEVELS;
    let r = study(
        Check::Chiti {
            p: 1.0,
            q: 2.0,
            eigenpair: 1,
        },
        &Geometry::unit_square(),
        &levels,
    )?
    .remove(0);
    ensure!(
        r.levels.iter().all(|l| l.slack > 0.0),
        "nonpositive slack: {:?}",
        r.levels
    );
    let mut ratios = [0.0; 3];
    for (i, &n) in levels.iter().enumerate() {
        let mesh = build_mesh(&Geometry::unit_square().at(n)).map_err(|e| e.to_string())?;
        let r = symm_core::verify::verify_chiti(&mesh, 1.0, 2.0, 1).map_err(|e| e.to_string())?;
        ratios[i] = param(&r, "ratio");
    }
    let ratio = richardson(spacings(&levels), ratios).slack0;
    let exact = PI * PI / 8.0;
    ensure!(
        (ratio - exact).abs() <= 1e-3,
        "ratio extrapolates to {ratio}"
    );
    let k = chiti_constant(1.0, 2.0, 2.0 * PI * PI, 2, 1.0).map_err(|e| e.to_string())?;
    ensure!(k > exact, "K = {k} does not exceed pi^2/8");
    let t = within_budget(start, Duration::from_secs(30))?;
    Ok(format!(
        "ratio -> {ratio:.5} (pi^2/8 = {exact:.5}), K = {k:.5} in {t:.2?}"
    ))
}

fn random_cells(rng: &mut ChaCha8Rng, len: usize) -> (Vec<f64>, Vec<f64>) {
    let values = (0..len).map(|_| rng.gen_range(0.0..1.5)).collect();
    let measures = (0..len).map(|_| rng.gen_range(0.01..1.0)).collect();
    (values, measures)
}

fn property_suites() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let (mut worst_equi, mut worst_hl, mut premises) = (0.0f64, f64::INFINITY, 0usize);
    for case in 0..1000 {
        let len = rng.gen_range(1..120);
        let (values, measures) = random_cells(&mut rng, len);
        let h = WeightedSample::from_parts(&values, &measures).unwrap();
        let star = h.decreasing_rearrangement();
        for p in [0.5, 1.0, 2.0, 3.0] {
            let (a, b) = (h.lp_norm(p), star.lp_norm(p));
            let rel = (a - b).abs() / a.max(f64::MIN_POSITIVE);
            ensure!(rel <= 1e-10, "case {case}: L^{p} norms {a} vs {b}");
            worst_equi = worst_equi.max(rel);
        }

        let (weights, _) = random_cells(&mut rng, len);
        let w = WeightedSample::from_parts(&weights, &measures).unwrap();
        let gap = hardy_littlewood_gap(&h, &w).unwrap();
        ensure!(gap >= -1e-10, "case {case}: Hardy-Littlewood gap {gap}");
        worst_hl = worst_hl.min(gap);

        let p = rng.gen_range(0.5..2.0);
        let dominated: Vec<f64> = values
            .iter()
            .zip(&weights)
            .map(|(v, b)| if rng.gen_bool(0.8) { v + 0.2 * b } else { *b })
            .collect();
        let g = WeightedSample::from_parts(&dominated, &measures)
            .unwrap()
            .decreasing_rearrangement();
        for q in [p, 2.0 * p, 5.0 * p] {
            let (premise, gap) = hlp_dominance(&star, &g, p, q).unwrap();
            if premise {
                premises += 1;
                ensure!(
                    gap >= -1e-10,
                    "case {case}: p={p} q={q} premise holds, gap {gap}"
                );
            }
        }
    }
    ensure!(premises > 300, "only {premises} dominance premises held");
    let t = within_budget(start, Duration::from_secs(10))?;
    Ok(format!(
        "1000 samples: equimeasurability {worst_equi:.1e}, min HL gap {worst_hl:.2e}, {premises} premises in {t:.2?}"
    ))
}

fn workspace_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn run_acceptance_config(dir: &Path, jobs: &str) -> Result<(), String> {
    let status = Command::new(env!("CARGO_BIN_EXE_symm"))
        .arg("verify")
        .arg(workspace_root().join("configs/acceptance.json"))
        .args(["--jobs", jobs])
        .env("SYMM_OUTPUT_DIR", dir)
        .output()
        .map_err(|e| e.to_string())?;
    ensure!(
        status.status.code() == Some(0),
        "exit {:?}",
        status.status.code()
    );
    Ok(())
}

fn determinism() -> Outcome {
    let start = Instant::now();
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    run_acceptance_config(&a, "1")?;
    run_acceptance_config(&b, "4")?;
    let mut names: Vec<_> = std::fs::read_dir(&a)
        .map_err(|e| e.to_string())?
        .map(|e| e.unwrap().file_name())
        .collect();
    names.sort();
    ensure!(names.len() >= 3, "only {} files written", names.len());
    for name in &names {
        let x = std::fs::read(a.join(name)).map_err(|e| e.to_string())?;
        let y = std::fs::read(b.join(name)).map_err(|e| format!("{name:?}: {e}"))?;
        ensure!(x == y, "{name:?} differs between runs");
    }
    let t = start.elapsed();
    Ok(format!(
        "{} files bitwise identical across two runs in {t:.2?}",
        names.len()
    ))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("constants table", constants_table),
        ("bessel kernel", bessel_kernel),
        ("faber-krahn on the unit square", faber_krahn_square),
        ("talenti on the unit square", talenti_square),
        ("equality suite on the unit disk", disk_equality),
        ("cone sharpness", cone_sharpness),
        ("second eigenvalue on the unit square", hks_square),
        ("chiti on the unit square", chiti_square),
        ("property suites", property_suites),
        ("determinism", determinism),
    ];
    let mut failures = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let outcome =
            catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|_| Err("panicked".to_string()));
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail}", i + 1),
            Err(why) => {
                failures += 1;
                println!("criterion {:>2} FAIL  {name}: {why}", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} of {} criteria passed",
        criteria.len() - failures,
        criteria.len()
    );
    if failures > 0 {
        std::process::exit(1);
    }
}
