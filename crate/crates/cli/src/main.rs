//! `symm`: batch runner for the symmetrization comparison checks.
//!
//! Exit codes: 0 when every asserted comparison passes, 1 when one fails,
//! 2 for usage and configuration errors.

mod config;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use rayon::prelude::*;
use symm_core::geometry::build_mesh;
use symm_core::radial::{moment_sequence_ball, SymmetrizationContext};
use symm_core::specialfn::{bessel_first_zero, unit_ball_volume, BesselOrder};
use symm_core::verify::{convergence_study, talenti_profiles, ComparisonReport};
use symm_core::Error;

use config::{ConfigError, ScenarioConfig};

#[derive(Parser)]
#[command(
    name = "symm",
    version,
    about = "Numerical checks of symmetrization inequalities"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Ball constants per dimension: ω_n, j_{n/2−1,1}, T₁/ω_n and T₂/ω_n.
    Constants {
        /// Dimensions, as a range `2..10`, a list `2,3,5` or a single value.
        #[arg(long = "n", default_value = "2..10")]
        n: String,
    },
    /// Run every check of a scenario at every level and write reports.
    Verify {
        config: PathBuf,
        /// Worker threads (defaults to the number of CPUs).
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Write the `(s, u*, v*)` table of each level as CSV.
    Profile { config: PathBuf },
}

/// Failures that map onto a specific exit code.
enum Failure {
    Usage(String),
    Run(anyhow::Error),
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Run(e)
    }
}

/// Precondition failures in the library are the caller's fault.
fn classify(e: Error) -> Failure {
    match e {
        Error::Domain(_) | Error::Contract(_) | Error::UnsupportedGeometry(_) => {
            Failure::Usage(e.to_string())
        }
        other => Failure::Run(other.into()),
    }
}

fn parse_dimensions(spec: &str) -> Result<Vec<u32>, String> {
    let bad = || format!("cannot read dimensions from `{spec}`");
    let dims: Vec<u32> = if let Some((lo, hi)) = spec.split_once("..") {
        let lo: u32 = lo.trim().parse().map_err(|_| bad())?;
        let hi = hi.trim();
        let hi: u32 = match hi.strip_prefix('=') {
            Some(h) => h.parse().map_err(|_| bad())?,
            None => hi.parse().map_err(|_| bad())?,
        };
        (lo..=hi).collect()
    } else {
        spec.split(',')
            .map(|t| t.trim().parse().map_err(|_| bad()))
            .collect::<Result<_, _>>()?
    };
    if dims.is_empty() {
        return Err(bad());
    }
    if let Some(n) = dims.iter().find(|n| !(2..=10).contains(*n)) {
        return Err(format!("dimension {n} outside 2..=10"));
    }
    Ok(dims)
}

fn cmd_constants(spec: &str) -> Result<bool, Failure> {
    let dims = parse_dimensions(spec).map_err(Failure::Usage)?;
    println!(
        "{:>2}  {:>18}  {:>18}  {:>16}  {:>16}",
        "n", "omega_n", "j_(n/2-1),1", "T1/omega_n", "T2/omega_n"
    );
    for n in dims {
        let omega = unit_ball_volume(n).map_err(classify)?;
        let j = bessel_first_zero(BesselOrder::for_dimension(n).map_err(classify)?)
            .map_err(classify)?;
        let ctx = SymmetrizationContext::new(n, 1.0, omega).map_err(classify)?;
        let ball = moment_sequence_ball(&ctx, 2).map_err(classify)?;
        println!(
            "{n:>2}  {omega:>18.15}  {j:>18.15}  {:>16.14}  {:>16.14}",
            ball[0].torsion / omega,
            ball[1].torsion / omega
        );
    }
    Ok(true)
}

fn write_json(path: &Path, value: &impl serde::Serialize) -> anyhow::Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn summary_table(rows: &[(String, ComparisonReport)]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<20} {:>14} {:>12} {:>14} {:>6} {:>8} {:>6}",
        "report", "slack", "tolerance", "slack0", "rate", "asserted", "status"
    );
    for (name, r) in rows {
        let (slack0, rate) = match &r.extrapolation {
            Some(e) => (
                format!("{:.6e}", e.slack0),
                e.rate
                    .map_or_else(|| "-".to_string(), |p| format!("{p:.2}")),
            ),
            None => ("-".to_string(), "-".to_string()),
        };
        let _ = writeln!(
            out,
            "{:<20} {:>14.6e} {:>12.3e} {:>14} {:>6} {:>8} {:>6}",
            name,
            r.slack,
            r.tolerance,
            slack0,
            rate,
            if r.asserted() { "yes" } else { "no" },
            if r.passed { "PASS" } else { "FAIL" }
        );
    }
    out
}

fn cmd_verify(path: &Path, jobs: Option<usize>) -> Result<bool, Failure> {
    let cfg = ScenarioConfig::load(path)?;
    if jobs == Some(0) {
        return Err(Failure::Usage("--jobs must be at least 1".into()));
    }
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(j) = jobs {
        pool = pool.num_threads(j);
    }
    let pool = pool.build().context("starting worker pool")?;
    let studies: Vec<_> = pool.install(|| {
        cfg.checks
            .par_iter()
            .map(|c| convergence_study(c, &cfg.domain, &cfg.levels, &cfg.source, cfg.seed))
            .collect()
    });

    let mut rows = Vec::new();
    for (check, study) in cfg.checks.iter().zip(studies) {
        let reports = study.map_err(classify)?;
        rows.extend(check.report_names().into_iter().zip(reports));
    }

    let out_dir = cfg.resolved_output_dir();
    std::fs::create_dir_all(&out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
    for (i, (name, report)) in rows.iter().enumerate() {
        write_json(&out_dir.join(format!("{:02}_{name}.json", i + 1)), report)?;
    }
    let meshes = cfg
        .levels
        .iter()
        .map(|&n| build_mesh(&cfg.domain.at(n)).map(|m| m.stats()))
        .collect::<Result<Vec<_>, _>>()
        .map_err(classify)?;
    write_json(&out_dir.join("mesh.json"), &meshes)?;
    let table = summary_table(&rows);
    std::fs::write(out_dir.join("summary.txt"), &table).context("writing summary")?;
    print!("{table}");

    let ok = rows
        .iter()
        .filter(|(_, r)| r.asserted())
        .all(|(_, r)| r.passed);
    println!(
        "{} -> {}",
        if ok { "all passed" } else { "FAILED" },
        out_dir.display()
    );
    Ok(ok)
}

fn cmd_profile(path: &Path) -> Result<bool, Failure> {
    let cfg = ScenarioConfig::load(path)?;
    let out_dir = cfg.resolved_output_dir();
    std::fs::create_dir_all(&out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
    for &n in &cfg.levels {
        let mesh = build_mesh(&cfg.domain.at(n)).map_err(classify)?;
        let prof = talenti_profiles(&mesh, &cfg.source, cfg.seed).map_err(classify)?;
        let file = out_dir.join(format!("profile_{n}.csv"));
        std::fs::write(&file, prof.to_csv())
            .with_context(|| format!("writing {}", file.display()))?;
        println!(
            "N={n:<5} u*(0)={:.6} v*(0)={:.6} min(v*-u*)={:.3e} -> {}",
            prof.u_star[0],
            prof.v_star[0],
            prof.min_slack(),
            file.display()
        );
    }
    Ok(true)
}

fn run(cli: Cli) -> Result<bool, Failure> {
    match cli.command {
        Command::Constants { n } => cmd_constants(&n),
        Command::Verify { config, jobs } => cmd_verify(&config, jobs),
        Command::Profile { config } => cmd_profile(&config),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Run(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
