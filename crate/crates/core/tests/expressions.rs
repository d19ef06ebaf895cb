use algebroid_loc::{parse_expr, Compiled, Expr, SymbolTable};
use proptest::prelude::*;

fn table() -> SymbolTable {
    SymbolTable::new(&["x", "y", "z"], &["s"])
}

fn exprs() -> Vec<Expr> {
    let t = table();
    [
        "sin(x)*cos(y) + z^2",
        "exp(-x*x - y*y)*s",
        "x*y*z + cos(pi*z)",
        "sqrt(1 + x*x)/(2 + sin(y))",
        "3",
        "y - s*x",
    ]
    .iter()
    .map(|s| parse_expr(s, &t).unwrap())
    .collect()
}

proptest! {
    #[test]
    fn staged_evaluation_agrees_with_full_evaluation(
        first in prop::collection::vec(-2.0f64..2.0, 3),
        second in prop::collection::vec(-2.0f64..2.0, 3),
        changed in 0usize..3,
        s in -1.0f64..1.0,
    ) {
        let c = Compiled::new(&exprs());
        let mut scratch = Vec::new();
        let mut staged = vec![0.0; 6];
        c.eval_staged(&first, &[s], &mut scratch, &mut staged, 0).unwrap();
        // only coordinates from `changed` onwards move
        let mut next = first.clone();
        next[changed..].copy_from_slice(&second[changed..]);
        c.eval_staged(&next, &[s], &mut scratch, &mut staged, changed).unwrap();
        let full = c.eval(&next, &[s]).unwrap();
        for (a, b) in staged.iter().zip(&full) {
            prop_assert!((a - b).abs() <= 1e-14 * (1.0 + b.abs()), "{a} vs {b}");
        }
    }

    #[test]
    fn derivatives_match_central_differences(
        p in prop::collection::vec(-1.5f64..1.5, 3),
        k in 0usize..3,
    ) {
        let h = 1e-5;
        for e in exprs() {
            let d = e.partial(k).eval(&p, &[0.7]).unwrap();
            let mut hi = p.clone();
            let mut lo = p.clone();
            hi[k] += h;
            lo[k] -= h;
            let fd = (e.eval(&hi, &[0.7]).unwrap() - e.eval(&lo, &[0.7]).unwrap()) / (2.0 * h);
            prop_assert!((d - fd).abs() < 1e-6 * (1.0 + d.abs()), "{d} vs {fd}");
        }
    }
}

#[test]
fn unknown_symbol_is_an_error() {
    assert!(parse_expr("x + w", &table()).is_err());
}

#[test]
fn pi_constant() {
    let e = parse_expr("pi", &table()).unwrap();
    assert_eq!(e.eval(&[0.0; 3], &[0.0]).unwrap(), std::f64::consts::PI);
}
