use std::hint::black_box;

use algebroid_loc::checks::{self, SuiteConfig};
use algebroid_loc::connection::InvariantPoly;
use algebroid_loc::geometry::integrate_chart;
use algebroid_loc::localization::verify_localization;
use algebroid_loc::{load_example, parse_expr, Compiled, SymbolTable, Tolerance};
use criterion::{criterion_group, criterion_main, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn expressions(c: &mut Criterion) {
    let symbols = SymbolTable::new(&["th", "ph"], &["x"]);
    let src = "sin(th)^3*cos(ph) + x*exp(-th^2)/(2 + cos(th)) - sqrt(1 + ph^2)";
    c.bench_function("parse", |b| {
        b.iter(|| parse_expr(black_box(src), &symbols).unwrap())
    });
    let e = parse_expr(src, &symbols).unwrap();
    c.bench_function("differentiate", |b| {
        b.iter(|| black_box(&e).partial(0).partial(1))
    });
    let tape = Compiled::new(&[e.partial(0), e.partial(1), e]);
    let mut scratch = Vec::new();
    let mut out = [0.0; 3];
    c.bench_function("tape_eval", |b| {
        b.iter(|| {
            tape.eval_into(black_box(&[0.7, 1.3]), &[0.4], &mut scratch, &mut out)
                .unwrap()
        })
    });
}

fn quadrature(c: &mut Criterion) {
    let ex = load_example("s2-tangent-rotation").unwrap();
    let chart = &ex.algebroid.manifold.charts[0];
    let f = parse_expr("sin(th)*cos(th)^2*(1 + cos(ph)^2)", &chart.symbols()).unwrap();
    c.bench_function("integrate_sphere_48", |b| {
        b.iter(|| integrate_chart(chart, &f, &[], Some(48)).unwrap())
    });
}

fn suites(c: &mut Criterion) {
    let mut group = c.benchmark_group("suites");
    group.sample_size(10);
    let cfg = SuiteConfig {
        cochains: 10,
        stokes_cochains: 4,
        ..SuiteConfig::default()
    };
    for name in ["s2-tangent-rotation", "s2-poisson", "s2-atiyah-line"] {
        let ex = load_example(name).unwrap();
        group.bench_function(format!("axioms/{name}"), |b| {
            b.iter(|| checks::axiom_suite(&ex, &cfg, &mut ChaCha8Rng::seed_from_u64(1)).unwrap())
        });
        group.bench_function(format!("chain_map/{name}"), |b| {
            b.iter(|| {
                checks::chain_map_suite(&ex, &cfg, &mut ChaCha8Rng::seed_from_u64(1)).unwrap()
            })
        });
        group.bench_function(format!("connection/{name}"), |b| {
            b.iter(|| {
                checks::connection_suite(&ex, &cfg, &mut ChaCha8Rng::seed_from_u64(1)).unwrap()
            })
        });
    }
    group.finish();
}

fn localization(c: &mut Criterion) {
    let mut group = c.benchmark_group("localization");
    group.sample_size(10);
    for name in ["s2-tangent-rotation", "s2-atiyah-line", "s2xs2-tangent"] {
        let ex = load_example(name).unwrap();
        let action = ex.action.as_ref().unwrap();
        let gamma = ex.cocycle(ex.defaults.cocycle.as_deref().unwrap()).unwrap();
        group.bench_function(name, |b| {
            b.iter(|| {
                verify_localization(
                    &ex.algebroid,
                    action,
                    gamma,
                    &ex.defaults.xi,
                    &ex.fixed_points,
                    None,
                    Tolerance::default(),
                )
                .unwrap()
            })
        });
    }
    group.finish();
}

fn chern_weil(c: &mut Criterion) {
    let ex = load_example("s2xs2-tangent").unwrap();
    let conn = ex.connection.as_ref().unwrap();
    let q = InvariantPoly::sigma(2);
    c.bench_function("chern_weil_s2xs2_sigma2", |b| {
        b.iter(|| conn.chern_weil(&ex.algebroid, &q).unwrap())
    });
}

fn loading(c: &mut Criterion) {
    let mut group = c.benchmark_group("load");
    group.sample_size(10);
    for name in ["s2-tangent-rotation", "s2-poisson"] {
        group.bench_function(name, |b| b.iter(|| load_example(black_box(name)).unwrap()));
    }
    group.finish();
}

criterion_group!(
    benches,
    expressions,
    quadrature,
    suites,
    localization,
    chern_weil,
    loading
);
criterion_main!(benches);
