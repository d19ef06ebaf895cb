use algebroid_loc::localization::{sqrt_det, FixedPointRecord};
use algebroid_loc::Tolerance;
use nalgebra::DMatrix;
use proptest::prelude::*;

fn record(l: Vec<Vec<f64>>, metric: Vec<Vec<f64>>, orientation: f64) -> FixedPointRecord {
    FixedPointRecord {
        chart: 0,
        chart_id: "x".into(),
        coords: vec![0.0; l.len()],
        linearization: l,
        orientation,
        metric,
    }
}

fn identity(n: usize) -> Vec<Vec<f64>> {
    (0..n).map(|i| (0..n).map(|j| f64::from(u8::from(i == j))).collect()).collect()
}

fn rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}

#[test]
fn two_by_two_block() {
    // Pf([[0, a], [-a, 0]]) = a
    let r = record(vec![vec![0.0, 3.0], vec![-3.0, 0.0]], identity(2), 1.0);
    assert!((sqrt_det(&r).unwrap() - 3.0).abs() < 1e-14);
}

#[test]
fn orientation_flips_the_sign() {
    let l = vec![vec![0.0, 3.0], vec![-3.0, 0.0]];
    let plus = sqrt_det(&record(l.clone(), identity(2), 1.0)).unwrap();
    let minus = sqrt_det(&record(l, identity(2), -1.0)).unwrap();
    assert_eq!(plus, -minus);
}

#[test]
fn block_diagonal_rotations_multiply() {
    let (a, b) = (1.5, -0.25);
    let l = vec![
        vec![0.0, a, 0.0, 0.0],
        vec![-a, 0.0, 0.0, 0.0],
        vec![0.0, 0.0, 0.0, b],
        vec![0.0, 0.0, -b, 0.0],
    ];
    let v = sqrt_det(&record(l, identity(4), 1.0)).unwrap();
    assert!((v - a * b).abs() < 1e-14, "{v}");
}

#[test]
fn conformal_metric_rescales_to_the_orthonormal_frame() {
    // in stereographic coordinates at a pole the round metric is 4·id; a
    // rotation field u∂v − v∂u has L = [[0, 1], [-1, 0]] there
    let r = record(vec![vec![0.0, 1.0], vec![-1.0, 0.0]], vec![vec![4.0, 0.0], vec![0.0, 4.0]], 1.0);
    assert!((sqrt_det(&r).unwrap() - 1.0).abs() < 1e-14);
}

#[test]
fn non_skew_linearization_is_refused() {
    let r = record(vec![vec![1.0, 0.0], vec![0.0, 1.0]], identity(2), 1.0);
    assert!(sqrt_det(&r).is_err());
}

#[test]
fn mismatched_metric_size_is_refused() {
    let r = record(vec![vec![0.0, 1.0], vec![-1.0, 0.0]], identity(3), 1.0);
    assert!(sqrt_det(&r).is_err());
}

proptest! {
    #[test]
    fn square_is_the_determinant(
        raw in prop::collection::vec(-2.0f64..2.0, 16),
        diag in prop::collection::vec(0.5f64..3.0, 4),
        shear in -0.4f64..0.4,
    ) {
        let n = 4;
        let a = DMatrix::from_row_slice(n, n, &raw);
        let s = &a - a.transpose();
        // a positive definite, non-diagonal metric
        let mut g = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(diag));
        g[(0, 1)] = shear;
        g[(1, 0)] = shear;
        // skew for g means g·L is antisymmetric
        let l = g.clone().try_inverse().unwrap() * &s;
        let v = sqrt_det(&record(rows(&l), rows(&g), 1.0)).unwrap();
        let det = l.determinant();
        prop_assert!((v * v - det).abs() <= 1e-9 * (1.0 + det.abs()), "{} vs {}", v * v, det);
    }
}

#[test]
fn tolerance_passes_on_either_criterion() {
    let t = Tolerance::default();
    assert!(t.compare(1.0, 1.0 + 5e-6).2);
    assert!(!t.compare(1.0, 1.0 + 5e-5).2);
    // both sides near zero: only the absolute bound can decide
    assert!(t.compare(3e-8, -4e-8).2);
    assert!(!t.compare(3e-6, -4e-6).2);
    assert!(t.compare(0.0, 0.0).2);
    assert!(!t.compare(f64::NAN, 0.0).2);
}
