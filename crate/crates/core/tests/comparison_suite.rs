use std::f64::consts::PI;

use symm_core::geometry::{build_mesh, Geometry, MaskShape};
use symm_core::source::Source;
use symm_core::verify::{
    convergence_study, talenti_profiles, verify_chiti, Check, ComparisonReport,
};

fn euclidean_domains() -> Vec<(Geometry, [usize; 3])> {
    vec![
        (Geometry::unit_square(), [16, 32, 64]),
        (Geometry::unit_disk(), [16, 24, 32]),
        (
            Geometry::EuclidMask {
                shape: MaskShape::Ellipse { a: 1.0, b: 0.6 },
            },
            [16, 32, 64],
        ),
        (
            Geometry::EuclidMask {
                shape: MaskShape::LShape { size: 1.0 },
            },
            [16, 32, 64],
        ),
    ]
}

fn study(check: Check, g: &Geometry, levels: &[usize], source: &Source) -> Vec<ComparisonReport> {
    convergence_study(&check, g, levels, source, 11).unwrap()
}

#[test]
fn talenti_holds_on_builtin_domains() {
    let sources = [
        Source::default(),
        Source::RandomStep {
            blocks: 4,
            seed: None,
        },
    ];
    for (g, levels) in euclidean_domains() {
        for src in &sources {
            let r = &study(Check::Talenti, &g, &levels, src)[0];
            assert!(
                r.levels.iter().all(|l| l.passed),
                "{} {src:?}: {r:?}",
                g.kind()
            );
            assert!(r.passed);
        }
    }
}

#[test]
fn sup_of_u_is_below_sup_of_v() {
    for (g, _) in euclidean_domains() {
        let mesh = build_mesh(&g.at(24)).unwrap();
        let prof = talenti_profiles(&mesh, &Source::default(), 0).unwrap();
        assert_eq!(prof.s[0], 0.0);
        assert!(prof.u_star[0] <= prof.v_star[0] + 1e-12, "{}", g.kind());
    }
}

#[test]
fn disk_equality_trio() {
    let g = Geometry::unit_disk();
    let levels = [16, 32, 64];
    let talenti = study(Check::Talenti, &g, &levels, &Source::default()).remove(0);
    let fk = study(Check::FaberKrahn, &g, &levels, &Source::default()).remove(0);
    let chiti = study(
        Check::Chiti {
            p: 1.0,
            q: 2.0,
            eigenpair: 1,
        },
        &g,
        &levels,
        &Source::default(),
    )
    .remove(0);
    for r in [&talenti, &fk, &chiti] {
        let e = r.extrapolation.as_ref().unwrap();
        assert!(e.conclusive, "{r:?}");
        assert!(e.slack0.abs() <= 1e-3, "{r:?}");
        assert!(e.rate.unwrap() >= 1.0, "{r:?}");
        assert!(r.passed);
    }
}

#[test]
fn chiti_slack_nonnegative_across_exponents() {
    let domains = [
        Geometry::unit_square(),
        Geometry::EuclidMask {
            shape: MaskShape::Ellipse { a: 1.0, b: 0.6 },
        },
        Geometry::EuclidMask {
            shape: MaskShape::LShape { size: 1.0 },
        },
        Geometry::ConePolar {
            alpha: 0.7,
            r_min: 1.0,
            r_max: 2.0,
            theta_span: PI,
        },
    ];
    for g in &domains {
        let mesh = build_mesh(&g.at(32)).unwrap();
        for (p, q) in [(1.0, 2.0), (2.0, 4.0), (0.5, 1.0)] {
            let r = verify_chiti(&mesh, p, q, 1).unwrap();
            assert!(r.slack >= 0.0, "{} p={p} q={q}: {}", g.kind(), r.slack);
        }
    }
}

#[test]
fn second_eigenpair_chiti_is_reported_but_not_asserted() {
    let mesh = build_mesh(&Geometry::unit_square().at(16)).unwrap();
    let r = verify_chiti(&mesh, 1.0, 2.0, 2).unwrap();
    assert!(!r.asserted());
    assert!(r.slack.is_finite());
}

#[test]
fn moment_reports_on_the_square() {
    let reports = study(
        Check::Moments { k_max: 2 },
        &Geometry::unit_square(),
        &[16, 32, 64],
        &Source::default(),
    );
    assert_eq!(reports.len(), 4);
    assert!(reports.iter().all(|r| r.passed && r.slack > 0.0));
    let sv = &reports[0];
    let normalized = sv.params["normalized"].as_f64().unwrap();
    assert!(normalized < 0.125);
}
