//! Comparison reports for the symmetrization inequalities.
//!
//! Each check produces a slack (positive when the inequality holds with
//! room to spare) and a discretization allowance. The allowance at
//! resolution `N` is twice the relative error of the same quantity on the
//! unit disk, computed at the same `N` with the radial solver, where the
//! inequality is an equality and the exact value is known.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{domain, Error, Result};
use crate::geometry::{build_mesh, Coordinates, Geometry, Mesh};
use crate::pde::{
    field_to_node_sample, moment_hierarchy, poisson_solve, smallest_eigenpairs, Field,
};
use crate::radial::{
    chiti_constant, faber_krahn_bound, moment_sequence_ball, saint_venant_normalized,
    second_eig_bound, SymmetrizationContext, TalentiSolution,
};
use crate::rearrange::{DecreasingProfile, WeightedSample};
use crate::source::Source;

/// Uniform comparison points added to the profile breakpoints.
pub const UNIFORM_SAMPLES: usize = 10_000;
/// Allowance floor, relative to the compared quantity.
const TOL_FLOOR: f64 = 1e-9;
/// Relative spread under which neighbouring values of `u*` count as tied.
const TIE_TOL: f64 = 1e-11;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Theorem {
    Talenti,
    FaberKrahn,
    Hks,
    SaintVenantK,
    LinfMomentK,
    Chiti,
}

/// A requested verification.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Check {
    Talenti,
    FaberKrahn,
    Hks,
    Moments {
        k_max: u32,
    },
    Chiti {
        p: f64,
        q: f64,
        #[serde(default = "first_pair")]
        eigenpair: usize,
    },
}

fn first_pair() -> usize {
    1
}

impl Check {
    /// Report file stems in output order.
    pub fn report_names(&self) -> Vec<String> {
        match self {
            Check::Talenti => vec!["talenti".into()],
            Check::FaberKrahn => vec!["faber_krahn".into()],
            Check::Hks => vec!["hks".into()],
            Check::Moments { k_max } => (1..=*k_max)
                .flat_map(|k| [format!("saint_venant_k{k}"), format!("linf_moment_k{k}")])
                .collect(),
            Check::Chiti { eigenpair, .. } if *eigenpair != 1 => {
                vec![format!("chiti_pair{eigenpair}")]
            }
            Check::Chiti { .. } => vec!["chiti".into()],
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Check::Moments { k_max } if !(1..=10).contains(k_max) => {
                domain(format!("moments.k_max must lie in 1..=10, got {k_max}"))
            }
            Check::Chiti { p, q, eigenpair } => {
                if !(*p > 0.0) || !(q >= p) || !q.is_finite() {
                    return domain(format!("chiti needs 0 < p <= q, got p={p}, q={q}"));
                }
                if !(1..=2).contains(eigenpair) {
                    return domain(format!("chiti.eigenpair must be 1 or 2, got {eigenpair}"));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelResult {
    pub resolution: usize,
    pub slack: f64,
    pub tolerance: f64,
    pub passed: bool,
}

/// Fit of `slack(h) = slack₀ + C·h^rate` through the three finest levels.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Extrapolation {
    pub slack0: f64,
    pub rate: Option<f64>,
    pub conclusive: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub theorem: Theorem,
    pub slack: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub levels: Vec<LevelResult>,
    pub extrapolation: Option<Extrapolation>,
    pub params: BTreeMap<String, Value>,
}

impl ComparisonReport {
    fn single(
        theorem: Theorem,
        mesh: &Mesh,
        slack: f64,
        tolerance: f64,
        params: BTreeMap<String, Value>,
    ) -> Self {
        let passed = slack >= -tolerance;
        let mut params = params;
        params.insert("domain".into(), json!(mesh.spec().geometry));
        Self {
            theorem,
            slack,
            tolerance,
            passed,
            levels: vec![LevelResult {
                resolution: mesh.spec().resolution,
                slack,
                tolerance,
                passed,
            }],
            extrapolation: None,
            params,
        }
    }

    /// Whether the report counts towards the overall verdict.
    pub fn asserted(&self) -> bool {
        self.params
            .get("asserted")
            .and_then(Value::as_bool)
            .unwrap_or(true)
    }
}

fn context(mesh: &Mesh) -> Result<SymmetrizationContext> {
    SymmetrizationContext::new(mesh.n(), mesh.avr(), mesh.volume())
}

fn unit_disk_radial(resolution: usize) -> Result<Mesh> {
    build_mesh(
        &Geometry::ConeRadial {
            alpha: 1.0,
            r_min: 0.0,
            r_max: 1.0,
        }
        .at(resolution),
    )
}

fn allowance(rel_err: f64, scale: f64) -> f64 {
    (2.0 * rel_err + TOL_FLOOR) * scale.abs()
}

/// `u*` and `v*` of one Poisson problem, on a common set of comparison points.
#[derive(Debug, Clone)]
pub struct TalentiProfiles {
    pub s: Vec<f64>,
    pub u_star: Vec<f64>,
    pub v_star: Vec<f64>,
    pub volume: f64,
}

impl TalentiProfiles {
    pub fn min_slack(&self) -> f64 {
        self.u_star
            .iter()
            .zip(&self.v_star)
            .map(|(u, v)| v - u)
            .fold(f64::INFINITY, f64::min)
    }

    /// CSV with header `s,u_star,v_star`.
    pub fn to_csv(&self) -> String {
        use std::fmt::Write as _;
        let mut out = String::from("s,u_star,v_star\n");
        for ((s, u), v) in self.s.iter().zip(&self.u_star).zip(&self.v_star) {
            let _ = writeln!(out, "{s},{u},{v}");
        }
        out
    }
}

/// The collocated reading of a nodal field as a decreasing profile: ties
/// merged, each value placed at the midpoint of its measure interval.
fn collocated_profile(sample: &WeightedSample) -> Result<DecreasingProfile> {
    let raw = sample.decreasing_rearrangement();
    raw.merge_within(TIE_TOL * raw.sup())?
        .midpoint_interpolant()
}

/// Solves the Poisson problem with `source` and evaluates both profiles.
pub fn talenti_profiles(mesh: &Mesh, source: &Source, seed: u64) -> Result<TalentiProfiles> {
    let f_nodes = source.sample(mesh, seed)?;
    if f_nodes.iter().all(|&v| v == 0.0) {
        return domain("the source must not vanish identically");
    }
    let f_field = Field::from_nodes(mesh, &f_nodes)?;
    let u = poisson_solve(mesh, &f_field)?;
    let u_sample = field_to_node_sample(&u)?;
    let u_star = collocated_profile(&u_sample)?;
    let f_star =
        WeightedSample::from_parts(&f_nodes, mesh.node_measures())?.decreasing_rearrangement();
    let volume = f_star.total();
    let ctx = SymmetrizationContext::new(mesh.n(), mesh.avr(), volume)?;
    let v = TalentiSolution::new(&f_star, &ctx)?;
    let mut s: Vec<f64> = (0..=UNIFORM_SAMPLES)
        .map(|k| volume * k as f64 / UNIFORM_SAMPLES as f64)
        .chain(u_star.breakpoints().iter().copied())
        .chain(f_star.breakpoints().iter().copied())
        .filter(|&x| x < volume * (1.0 - 1e-12))
        .collect();
    s.sort_by(f64::total_cmp);
    s.dedup();
    let u_vals = s.iter().map(|&x| u_star.eval(x)).collect();
    let v_vals = s.iter().map(|&x| v.eval(x)).collect();
    Ok(TalentiProfiles {
        s,
        u_star: u_vals,
        v_star: v_vals,
        volume,
    })
}

/// Relative error of the collocated `u*` against `v*` for `f ≡ 1` on the unit disk.
pub fn disk_talenti_error(resolution: usize) -> Result<f64> {
    let mesh = unit_disk_radial(resolution)?;
    let prof = talenti_profiles(&mesh, &Source::default(), 0)?;
    let scale = prof.v_star[0];
    Ok(prof
        .u_star
        .iter()
        .zip(&prof.v_star)
        .map(|(u, v)| (u - v).abs())
        .fold(0.0, f64::max)
        / scale)
}

fn j01_squared() -> Result<f64> {
    faber_krahn_bound(&SymmetrizationContext::new(2, 1.0, PI)?)
}

/// Relative error of the discrete `λ₁` of the unit disk.
pub fn disk_eigen_error(resolution: usize) -> Result<f64> {
    let mesh = unit_disk_radial(resolution)?;
    let exact = j01_squared()?;
    let pairs = smallest_eigenpairs(&mesh, 1)?;
    Ok((pairs[0].lambda - exact).abs() / exact)
}

/// Relative errors of the discrete `T_k` and `J_k` of the unit disk.
pub fn disk_moment_errors(resolution: usize, k: u32) -> Result<(f64, f64)> {
    let mesh = unit_disk_radial(resolution)?;
    let rows = moment_hierarchy(&mesh, k)?;
    let exact = moment_sequence_ball(&SymmetrizationContext::new(2, 1.0, PI)?, k)?;
    let (row, ball) = (&rows[k as usize], &exact[k as usize - 1]);
    Ok((
        (row.torsion - ball.torsion).abs() / ball.torsion,
        (row.sup - ball.sup).abs() / ball.sup,
    ))
}

fn norm_ratio(values: &[f64], measures: &[f64], p: f64, q: f64) -> Result<f64> {
    let sample = WeightedSample::absolute(values, measures)?;
    Ok(sample.lp_norm(q) / sample.lp_norm(p))
}

/// Relative gap between the discrete norm ratio of the disk eigenfunction
/// and its Chiti constant.
pub fn disk_chiti_error(resolution: usize, p: f64, q: f64) -> Result<f64> {
    let mesh = unit_disk_radial(resolution)?;
    let pairs = smallest_eigenpairs(&mesh, 1)?;
    let u = &pairs[0].field;
    let ratio = norm_ratio(&u.node_values(), mesh.node_measures(), p, q)?;
    let k = chiti_constant(p, q, pairs[0].lambda, 2, 1.0)?;
    Ok((ratio - k).abs() / k)
}

pub fn verify_talenti(mesh: &Mesh, source: &Source, seed: u64) -> Result<ComparisonReport> {
    let prof = talenti_profiles(mesh, source, seed)?;
    let slack = prof.min_slack();
    let tol = allowance(disk_talenti_error(mesh.spec().resolution)?, prof.v_star[0]);
    let mut params = BTreeMap::new();
    params.insert("source".into(), json!(source));
    params.insert("u_star_0".into(), json!(prof.u_star[0]));
    params.insert("v_star_0".into(), json!(prof.v_star[0]));
    params.insert("comparison_points".into(), json!(prof.s.len()));
    Ok(ComparisonReport::single(
        Theorem::Talenti,
        mesh,
        slack,
        tol,
        params,
    ))
}

pub fn verify_faber_krahn(mesh: &Mesh) -> Result<ComparisonReport> {
    let ctx = context(mesh)?;
    let bound = faber_krahn_bound(&ctx)?;
    let lambda = smallest_eigenpairs(mesh, 1)?[0].lambda;
    let tol = allowance(disk_eigen_error(mesh.spec().resolution)?, bound);
    let mut params = BTreeMap::new();
    params.insert("lambda1".into(), json!(lambda));
    params.insert("bound".into(), json!(bound));
    Ok(ComparisonReport::single(
        Theorem::FaberKrahn,
        mesh,
        lambda - bound,
        tol,
        params,
    ))
}

fn require_planar(mesh: &Mesh, what: &str) -> Result<()> {
    if mesh.coordinates() == Coordinates::Radial {
        return Err(Error::UnsupportedGeometry(format!(
            "{what} needs non-radial modes, which the radial reduction does not carry"
        )));
    }
    Ok(())
}

pub fn verify_hks(mesh: &Mesh) -> Result<ComparisonReport> {
    require_planar(mesh, "the second eigenvalue")?;
    let ctx = context(mesh)?;
    let bound = second_eig_bound(&ctx)?;
    let pairs = smallest_eigenpairs(mesh, 2)?;
    let tol = allowance(disk_eigen_error(mesh.spec().resolution)?, bound);
    let mut params = BTreeMap::new();
    params.insert("lambda1".into(), json!(pairs[0].lambda));
    params.insert("lambda2".into(), json!(pairs[1].lambda));
    params.insert("bound".into(), json!(bound));
    Ok(ComparisonReport::single(
        Theorem::Hks,
        mesh,
        pairs[1].lambda - bound,
        tol,
        params,
    ))
}

/// `T_k(Ω) ≤ AVR·T_k(Ω♯)` and `J_k(Ω) ≤ J_k(Ω♯)` for `k = 1..=k_max`.
pub fn verify_moments(mesh: &Mesh, k_max: u32) -> Result<Vec<ComparisonReport>> {
    Check::Moments { k_max }.validate()?;
    let ctx = context(mesh)?;
    let rows = moment_hierarchy(mesh, k_max)?;
    let ball = moment_sequence_ball(&ctx, k_max)?;
    let mut out = Vec::new();
    for k in 1..=k_max {
        let (row, sharp) = (&rows[k as usize], &ball[k as usize - 1]);
        let (t_err, j_err) = disk_moment_errors(mesh.spec().resolution, k)?;
        let rhs_t = ctx.avr() * sharp.torsion;
        let mut params = BTreeMap::new();
        params.insert("k".into(), json!(k));
        params.insert("torsion".into(), json!(row.torsion));
        params.insert("bound".into(), json!(rhs_t));
        if k == 1 {
            let nf = f64::from(mesh.n());
            params.insert(
                "normalized".into(),
                json!(saint_venant_normalized(
                    row.torsion,
                    mesh.volume(),
                    mesh.n(),
                    mesh.avr()
                )?),
            );
            params.insert("normalized_bound".into(), json!(1.0 / (nf * (nf + 2.0))));
        }
        out.push(ComparisonReport::single(
            Theorem::SaintVenantK,
            mesh,
            rhs_t - row.torsion,
            allowance(t_err, rhs_t),
            params,
        ));
        let mut params = BTreeMap::new();
        params.insert("k".into(), json!(k));
        params.insert("sup".into(), json!(row.sup));
        params.insert("bound".into(), json!(sharp.sup));
        out.push(ComparisonReport::single(
            Theorem::LinfMomentK,
            mesh,
            sharp.sup - row.sup,
            allowance(j_err, sharp.sup),
            params,
        ));
    }
    Ok(out)
}

/// `‖u‖_q/‖u‖_p ≤ K(p, q, λ, n, AVR)` for the chosen eigenpair.
pub fn verify_chiti(
    mesh: &Mesh,
    p: f64,
    q: f64,
    which_eigenpair: usize,
) -> Result<ComparisonReport> {
    Check::Chiti {
        p,
        q,
        eigenpair: which_eigenpair,
    }
    .validate()?;
    if which_eigenpair == 2 {
        require_planar(mesh, "the second eigenpair")?;
    }
    let pairs = smallest_eigenpairs(mesh, which_eigenpair)?;
    let pair = &pairs[which_eigenpair - 1];
    let ratio = norm_ratio(&pair.field.node_values(), mesh.node_measures(), p, q)?;
    let k = chiti_constant(p, q, pair.lambda, mesh.n(), mesh.avr())?;
    let tol = allowance(disk_chiti_error(mesh.spec().resolution, p, q)?, k);
    let mut params = BTreeMap::new();
    params.insert("p".into(), json!(p));
    params.insert("q".into(), json!(q));
    params.insert("eigenpair".into(), json!(which_eigenpair));
    params.insert("lambda".into(), json!(pair.lambda));
    params.insert("ratio".into(), json!(ratio));
    params.insert("constant".into(), json!(k));
    params.insert("asserted".into(), json!(which_eigenpair == 1));
    Ok(ComparisonReport::single(
        Theorem::Chiti,
        mesh,
        k - ratio,
        tol,
        params,
    ))
}

/// Runs one check on one mesh.
pub fn run_check(
    mesh: &Mesh,
    check: &Check,
    source: &Source,
    seed: u64,
) -> Result<Vec<ComparisonReport>> {
    check.validate()?;
    Ok(match check {
        Check::Talenti => vec![verify_talenti(mesh, source, seed)?],
        Check::FaberKrahn => vec![verify_faber_krahn(mesh)?],
        Check::Hks => vec![verify_hks(mesh)?],
        Check::Moments { k_max } => verify_moments(mesh, *k_max)?,
        Check::Chiti { p, q, eigenpair } => vec![verify_chiti(mesh, *p, *q, *eigenpair)?],
    })
}

/// Fits `s(h) = s₀ + C hᵖ` through three points with `h₁ > h₂ > h₃`.
pub fn richardson(h: [f64; 3], s: [f64; 3]) -> Extrapolation {
    let (d1, d2) = (s[0] - s[1], s[1] - s[2]);
    let scale = s.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    if d1.abs() <= 1e-14 * scale && d2.abs() <= 1e-14 * scale {
        return Extrapolation {
            slack0: s[2],
            rate: Some(0.0),
            conclusive: true,
        };
    }
    let inconclusive = Extrapolation {
        slack0: s[2],
        rate: None,
        conclusive: false,
    };
    if d1 * d2 <= 0.0 {
        return inconclusive;
    }
    let ratio = d1 / d2;
    let g = |p: f64| (h[0].powf(p) - h[1].powf(p)) / (h[1].powf(p) - h[2].powf(p)) - ratio;
    let (mut lo, mut hi) = (1e-6, 12.0);
    if g(lo) > 0.0 || g(hi) < 0.0 {
        return inconclusive;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let p = 0.5 * (lo + hi);
    let c = d2 / (h[1].powf(p) - h[2].powf(p));
    Extrapolation {
        slack0: s[2] - c * h[2].powf(p),
        rate: Some(p),
        conclusive: true,
    }
}

/// Merges per-level reports of the same quantity into one convergence report.
pub fn merge_levels(per_level: Vec<(f64, ComparisonReport)>) -> Result<ComparisonReport> {
    let Some((_, finest)) = per_level.last() else {
        return domain("a convergence study needs at least one level");
    };
    let mut report = finest.clone();
    report.levels = per_level
        .iter()
        .flat_map(|(_, r)| r.levels.clone())
        .collect();
    let all_pass = report.levels.iter().all(|l| l.passed);
    report.extrapolation = if per_level.len() >= 3 {
        let k = per_level.len();
        let pick = |i: usize| &per_level[k - 3 + i];
        Some(richardson(
            [pick(0).0, pick(1).0, pick(2).0],
            [pick(0).1.slack, pick(1).1.slack, pick(2).1.slack],
        ))
    } else {
        None
    };
    let extrapolated_ok = match &report.extrapolation {
        Some(e) if e.conclusive => e.slack0 >= -report.tolerance,
        _ => true,
    };
    report.passed = all_pass && extrapolated_ok;
    report.params.insert(
        "monotone_refinement".into(),
        json!(monotone_beyond_coarsest(&report.levels)),
    );
    Ok(report)
}

/// Whether the slack moves in one direction from the second level onwards.
/// Informational only: it does not affect `passed`.
fn monotone_beyond_coarsest(levels: &[LevelResult]) -> bool {
    let steps: Vec<f64> = levels
        .iter()
        .skip(1)
        .map(|l| l.slack)
        .collect::<Vec<_>>()
        .windows(2)
        .map(|w| w[1] - w[0])
        .collect();
    steps.iter().all(|&d| d >= 0.0) || steps.iter().all(|&d| d <= 0.0)
}

/// Runs `check` on `geometry` at every level (in parallel) and fits the trend.
pub fn convergence_study(
    check: &Check,
    geometry: &Geometry,
    levels: &[usize],
    source: &Source,
    seed: u64,
) -> Result<Vec<ComparisonReport>> {
    if levels.is_empty() || levels.windows(2).any(|w| w[1] <= w[0]) {
        return domain("levels must be nonempty and strictly ascending");
    }
    let runs: Vec<(f64, Vec<ComparisonReport>)> = levels
        .par_iter()
        .map(|&n| {
            let mesh = build_mesh(&geometry.at(n))?;
            Ok((mesh.spacing(), run_check(&mesh, check, source, seed)?))
        })
        .collect::<Result<_>>()?;
    let count = runs[0].1.len();
    (0..count)
        .map(|i| merge_levels(runs.iter().map(|(h, r)| (*h, r[i].clone())).collect()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn monotone_flag_ignores_the_coarsest_level() {
        let lv = |slacks: &[f64]| -> Vec<LevelResult> {
            slacks
                .iter()
                .map(|&slack| LevelResult {
                    resolution: 8,
                    slack,
                    tolerance: 0.0,
                    passed: true,
                })
                .collect()
        };
        assert!(monotone_beyond_coarsest(&lv(&[5.0, 1.0, 2.0, 3.0])));
        assert!(!monotone_beyond_coarsest(&lv(&[1.0, 2.0, 1.0, 3.0])));
        assert!(monotone_beyond_coarsest(&lv(&[1.0])));
    }

    #[test]
    fn richardson_recovers_power_laws() {
        let h = [0.1, 0.05, 0.025];
        let s = h.map(|x| 1.5 + 3.0 * x * x);
        let e = richardson(h, s);
        assert!(e.conclusive);
        assert!((e.rate.unwrap() - 2.0).abs() < 1e-9);
        assert!((e.slack0 - 1.5).abs() < 1e-12);
        let flat = richardson(h, [0.3, 0.3, 0.3]);
        assert_eq!(flat.rate, Some(0.0));
        let zigzag = richardson(h, [0.1, 0.2, 0.1]);
        assert!(!zigzag.conclusive);
    }

    #[test]
    fn check_names_and_json() {
        let c: Check = serde_json::from_str(r#"{"moments":{"k_max":2}}"#).unwrap();
        assert_eq!(
            c.report_names(),
            [
                "saint_venant_k1",
                "linf_moment_k1",
                "saint_venant_k2",
                "linf_moment_k2"
            ]
        );
        let t: Check = serde_json::from_str(r#""talenti""#).unwrap();
        assert_eq!(t, Check::Talenti);
        let ch: Check = serde_json::from_str(r#"{"chiti":{"p":1,"q":2}}"#).unwrap();
        assert_eq!(ch.report_names(), ["chiti"]);
        assert!(serde_json::from_str::<Check>(r#"{"chiti":{"p":1,"r":2}}"#).is_err());
        assert!(Check::Chiti {
            p: 2.0,
            q: 1.0,
            eigenpair: 1
        }
        .validate()
        .is_err());
    }

    #[test]
    fn disk_calibration_errors_shrink() {
        let a = disk_talenti_error(16).unwrap();
        let b = disk_talenti_error(32).unwrap();
        assert!(b < 0.6 * a && a < 5e-2, "{a} {b}");
        let a = disk_eigen_error(16).unwrap();
        let b = disk_eigen_error(32).unwrap();
        assert!(b < a / 3.0);
    }

    #[test]
    fn zero_source_rejected() {
        let mesh = build_mesh(&Geometry::unit_square().at(8)).unwrap();
        let zero = Source::Constant { value: 0.0 };
        assert!(matches!(
            verify_talenti(&mesh, &zero, 0),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn hks_rejects_radial() {
        let g = Geometry::ConeRadial {
            alpha: 0.5,
            r_min: 0.0,
            r_max: 1.0,
        };
        let mesh = build_mesh(&g.at(16)).unwrap();
        assert!(matches!(
            verify_hks(&mesh),
            Err(Error::UnsupportedGeometry(_))
        ));
    }
}
