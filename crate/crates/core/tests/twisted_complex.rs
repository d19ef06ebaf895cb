use algebroid_loc::algebroid::ACochain;
use algebroid_loc::geometry::{lie_derivative, VectorField};
use algebroid_loc::sampling::{alt_exprs, max_abs_sampled};
use algebroid_loc::twisted::TwistedCochain;
use algebroid_loc::{load_example, Example, Expr};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const POINTWISE: f64 = 1e-9;
const EXAMPLES: [&str; 4] = [
    "s2-tangent-rotation",
    "s2-poisson",
    "s2-atiyah-line",
    "t2-tangent-translation",
];

fn random_plain(ex: &Example, degree: usize, rng: &mut ChaCha8Rng) -> ACochain {
    let a = &ex.algebroid;
    ACochain {
        degree,
        charts: (0..a.manifold.n_charts())
            .map(|ch| ex.pool.random_alt(ch, a.rank, degree, rng))
            .collect(),
    }
}

fn random_twisted(ex: &Example, degree: usize, rng: &mut ChaCha8Rng) -> TwistedCochain {
    let a = &ex.algebroid;
    TwistedCochain {
        degree,
        charts: (0..a.manifold.n_charts())
            .map(|ch| ex.pool.random_alt(ch, a.rank, degree, rng))
            .collect(),
    }
}

fn worst(ex: &Example, charts: &[algebroid_loc::alt::Alt]) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    max_abs_sampled(
        &ex.algebroid.manifold,
        &alt_exprs(charts),
        &[],
        40,
        &mut rng,
    )
    .unwrap()
}

#[test]
fn cup_product_obeys_the_leibniz_rule() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for name in EXAMPLES {
        let ex = load_example(name).unwrap();
        let a = &ex.algebroid;
        for i in 0..a.rank {
            for j in 0..a.rank - i {
                let xi = random_plain(&ex, i, &mut rng);
                let c = random_twisted(&ex, j, &mut rng);
                let lhs = a.delta_twisted(&a.cup_product(&xi, &c).unwrap()).unwrap();
                let first = a.cup_product(&a.delta(&xi).unwrap(), &c).unwrap();
                let second = a.cup_product(&xi, &a.delta_twisted(&c).unwrap()).unwrap();
                let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
                let diff: Vec<_> = lhs
                    .charts
                    .iter()
                    .zip(first.charts.iter().zip(&second.charts))
                    .map(|(l, (f, s))| l.sub(&f.add(&s.scale(&Expr::constant(sign)))))
                    .collect();
                let r = worst(&ex, &diff);
                assert!(r < POINTWISE, "{name} i={i} j={j}: {r:e}");
            }
        }
    }
}

#[test]
fn unit_cochain_is_the_identity_for_cup() {
    let ex = load_example("s2-poisson").unwrap();
    let a = &ex.algebroid;
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let c = random_twisted(&ex, 1, &mut rng);
    let one = ACochain {
        degree: 0,
        charts: (0..a.manifold.n_charts())
            .map(|_| algebroid_loc::alt::Alt::scalar(a.rank, Expr::one()))
            .collect(),
    };
    let d = a.cup_product(&one, &c).unwrap().sub(&c);
    assert_eq!(worst(&ex, &d.charts), 0.0);
}

/// `∫ δη·c = (−1)^k ∫ η·δ̃c` with `k = deg δη`, so the pairing descends to
/// cohomology.
#[test]
fn pairing_moves_the_differential_across() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for name in [
        "s2-tangent-rotation",
        "s2-poisson",
        "t2-tangent-translation",
    ] {
        let ex = load_example(name).unwrap();
        let a = &ex.algebroid;
        for k in 1..=a.rank {
            let eta = random_plain(&ex, k - 1, &mut rng);
            let c = random_twisted(&ex, a.rank - k, &mut rng);
            let left = a
                .pairing_integral(&a.delta(&eta).unwrap(), &c, None)
                .unwrap();
            let right = a
                .pairing_integral(&eta, &a.delta_twisted(&c).unwrap(), None)
                .unwrap();
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            assert!(
                (left - sign * right).abs() < 1e-7 * (1.0 + left.abs()),
                "{name} k={k}: {left} vs {}",
                sign * right
            );
        }
    }
}

#[test]
fn coboundaries_pair_to_zero() {
    // ∫ δf·δ̃c = ±∫ f·δ̃δ̃c
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for name in ["s2-tangent-rotation", "s2-poisson"] {
        let ex = load_example(name).unwrap();
        let a = &ex.algebroid;
        let f = random_plain(&ex, 0, &mut rng);
        let c = random_twisted(&ex, 0, &mut rng);
        let v = a
            .pairing_integral(&a.delta(&f).unwrap(), &a.delta_twisted(&c).unwrap(), None)
            .unwrap();
        assert!(v.abs() < 1e-7, "{name}: {v:e}");
    }
}

#[test]
fn pairing_unit_with_volume_is_the_area() {
    let ex = load_example("s2-tangent-rotation").unwrap();
    let a = &ex.algebroid;
    let vol = ex.cocycle("volume").unwrap();
    let top = vol
        .terms
        .iter()
        .find(|t| t.cochain.degree == a.rank)
        .unwrap();
    let one = ACochain {
        degree: 0,
        charts: (0..a.manifold.n_charts())
            .map(|_| algebroid_loc::alt::Alt::scalar(a.rank, Expr::one()))
            .collect(),
    };
    let area = a.pairing_integral(&one, &top.cochain, None).unwrap();
    assert!((area - 4.0 * std::f64::consts::PI).abs() < 1e-10, "{area}");
}

#[test]
fn twisted_lie_derivative_matches_the_de_rham_one() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for name in EXAMPLES {
        let ex = load_example(name).unwrap();
        let a = &ex.algebroid;
        let m = a.manifold.dim;
        for k in a.rank - m..=a.rank {
            let s: Vec<Vec<Expr>> = (0..a.manifold.n_charts())
                .map(|ch| {
                    (0..a.rank)
                        .map(|_| ex.pool.random_function(ch, &mut rng))
                        .collect()
                })
                .collect();
            let c = random_twisted(&ex, k, &mut rng);
            let field = VectorField {
                charts: a
                    .local
                    .iter()
                    .zip(&s)
                    .map(|(l, v)| l.anchor_of(v))
                    .collect(),
            };
            let lhs = a.p_map(&a.twisted_lie(&s, &c).unwrap()).unwrap();
            let rhs = lie_derivative(&field, &a.p_map(&c).unwrap());
            let diff: Vec<_> = lhs
                .charts
                .iter()
                .zip(&rhs.charts)
                .map(|(x, y)| x.sub(y))
                .collect();
            let r = worst(&ex, &diff);
            assert!(r < POINTWISE, "{name} k={k}: {r:e}");
        }
    }
}
