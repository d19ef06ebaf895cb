//! The residual checks are only worth something if they can fail. Each test
//! here breaks one ingredient on purpose and expects the corresponding
//! check to notice.

use algebroid_loc::checks::random_global_cochain;
use algebroid_loc::equivariant::Equivariant;
use algebroid_loc::localization::{validate_fixed_points, verify_localization};
use algebroid_loc::twisted::TwistedCochain;
use algebroid_loc::{load_example, Error, Example, Tolerance};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn volume_cocycle(ex: &Example) -> &algebroid_loc::EquivTwistedCochain {
    ex.cocycle(ex.defaults.cocycle.as_deref().unwrap()).unwrap()
}

/// `∫ p(δc)` with the modular twist left out.
fn untwisted_boundary_integral(ex: &Example, c: &TwistedCochain) -> f64 {
    let a = &ex.algebroid;
    let charts = a
        .local
        .iter()
        .zip(&c.charts)
        .map(|(l, x)| l.delta(x))
        .collect();
    let dc = TwistedCochain {
        degree: c.degree + 1,
        charts,
    };
    a.integrate_twisted(&dc, None).unwrap()
}

#[test]
fn dropping_the_modular_twist_breaks_stokes_for_poisson() {
    let ex = load_example("s2-poisson").unwrap();
    let a = &ex.algebroid;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst_twisted: f64 = 0.0;
    let mut worst_untwisted: f64 = 0.0;
    for _ in 0..5 {
        let c = random_global_cochain(&ex, a.rank - 1, &mut rng);
        worst_twisted = worst_twisted.max(a.stokes_check(&c, None).unwrap());
        worst_untwisted = worst_untwisted.max(untwisted_boundary_integral(&ex, &c).abs());
    }
    assert!(worst_twisted < 1e-7, "twisted {worst_twisted:e}");
    assert!(worst_untwisted > 1e-3, "untwisted {worst_untwisted:e}");
}

#[test]
fn non_closed_cochain_is_refused() {
    let ex = load_example("s2-tangent-rotation").unwrap();
    let vol = volume_cocycle(&ex);
    // keep the top-degree part only: no longer δ̃_g-closed
    let mut truncated = Equivariant::zero(vol.g_dim);
    for t in vol
        .terms
        .iter()
        .filter(|t| t.exponents.iter().all(|&e| e == 0))
    {
        truncated.push(t.exponents.clone(), t.cochain.clone());
    }
    assert!(!truncated.terms.is_empty());
    let err = verify_localization(
        &ex.algebroid,
        ex.action.as_ref().unwrap(),
        &truncated,
        &ex.defaults.xi,
        &ex.fixed_points,
        None,
        Tolerance::default(),
    )
    .unwrap_err();
    assert!(matches!(err, Error::Precondition(_)), "{err}");
}

#[test]
fn declared_point_that_is_not_a_zero_is_refused() {
    let ex = load_example("s2-tangent-rotation").unwrap();
    let mut declared = ex.fixed_points.clone();
    declared[0].coords = vec![0.3, 0.0];
    let err = validate_fixed_points(
        &ex.algebroid,
        ex.action.as_ref().unwrap(),
        &ex.defaults.xi,
        &declared,
    );
    assert!(err.is_err());
}

#[test]
fn forgetting_a_fixed_point_makes_localization_fail() {
    let ex = load_example("s2-tangent-rotation").unwrap();
    let report = verify_localization(
        &ex.algebroid,
        ex.action.as_ref().unwrap(),
        volume_cocycle(&ex),
        &ex.defaults.xi,
        &ex.fixed_points[..1],
        None,
        Tolerance::default(),
    )
    .unwrap();
    assert!(!report.pass);
    assert!((report.lhs - 4.0 * std::f64::consts::PI).abs() < 1e-9);
    assert!((report.rhs - 2.0 * std::f64::consts::PI).abs() < 1e-9);
}

#[test]
fn wrong_declared_linearization_is_refused() {
    let ex = load_example("s2-tangent-rotation").unwrap();
    let mut declared = ex.fixed_points.clone();
    let n = declared[0].coords.len();
    declared[0].linearization = Some(vec![vec![0.0; n]; n]);
    let res = validate_fixed_points(
        &ex.algebroid,
        ex.action.as_ref().unwrap(),
        &ex.defaults.xi,
        &declared,
    );
    assert!(res.is_err());
}

#[test]
fn tight_tolerance_with_coarse_quadrature_fails() {
    let ex = load_example("s2-tangent-rotation").unwrap();
    let report = verify_localization(
        &ex.algebroid,
        ex.action.as_ref().unwrap(),
        volume_cocycle(&ex),
        &ex.defaults.xi,
        &ex.fixed_points,
        Some(3),
        Tolerance {
            rel: 1e-12,
            abs: 0.0,
        },
    )
    .unwrap();
    assert!(!report.pass, "abs diff {}", report.abs_diff);
}
