//! Chart-described manifolds, differential forms and vector fields.

use std::num::NonZeroUsize;

use gauss_quad::legendre::GaussLegendre;
use rand::Rng;

use crate::alt::{sort_sign, subsets, Alt};
use crate::expr::{Compiled, EvalError, Expr, SymbolTable};
use crate::Error;

/// Tensor-product Gauss–Legendre rule over a box.
#[derive(Clone, Debug, PartialEq)]
pub struct Quadrature {
    pub domain: Vec<(f64, f64)>,
    pub order: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Chart {
    pub id: String,
    pub coords: Vec<String>,
    pub quadrature: Option<Quadrature>,
    /// Fixed points may only be declared in evaluation charts.
    pub evaluation: bool,
    /// `+1` or `-1` relative to the orientation of the manifold.
    pub orientation: f64,
    /// Box used for random pointwise sampling.
    pub sample_box: Vec<(f64, f64)>,
}

impl Chart {
    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn symbols(&self) -> SymbolTable {
        SymbolTable::new(&self.coords, &[] as &[String])
    }

    pub fn sample_point<R: Rng>(&self, rng: &mut R) -> Vec<f64> {
        self.sample_box
            .iter()
            .map(|&(a, b)| rng.gen_range(a..b))
            .collect()
    }

    pub fn contains(&self, p: &[f64]) -> bool {
        p.len() == self.dim()
            && self
                .sample_box
                .iter()
                .zip(p)
                .all(|(&(a, b), &x)| x >= a && x <= b)
    }
}

/// A point in a particular chart.
#[derive(Clone, Debug, PartialEq)]
pub struct Point {
    pub chart: usize,
    pub coords: Vec<f64>,
}

/// Two coordinate descriptions of the same manifold point, plus the
/// Jacobian `∂x_to^i / ∂x_from^j` as expressions in the source chart.
#[derive(Clone, Debug)]
pub struct TransitionSample {
    pub from: Point,
    pub to: Point,
    pub jacobian: Vec<Vec<Expr>>,
}

#[derive(Clone, Debug)]
pub struct ManifoldModel {
    pub dim: usize,
    pub charts: Vec<Chart>,
    pub transitions: Vec<TransitionSample>,
}

impl ManifoldModel {
    pub fn new(dim: usize, charts: Vec<Chart>) -> Result<Self, Error> {
        if !charts.iter().any(|c| c.quadrature.is_some()) {
            return Err(Error::Invalid(
                "manifold needs at least one quadrature chart".into(),
            ));
        }
        for c in &charts {
            if c.dim() != dim {
                return Err(Error::Invalid(format!(
                    "chart `{}` has {} coordinates, expected {dim}",
                    c.id,
                    c.dim()
                )));
            }
            if c.orientation != 1.0 && c.orientation != -1.0 {
                return Err(Error::Invalid(format!(
                    "chart `{}`: orientation must be ±1",
                    c.id
                )));
            }
            if let Some(q) = &c.quadrature {
                if q.domain.len() != dim
                    || q.order.len() != dim
                    || q.domain
                        .iter()
                        .any(|(a, b)| !(a.is_finite() && b.is_finite() && a < b))
                {
                    return Err(Error::Invalid(format!(
                        "chart `{}`: quadrature needs a bounded box and one order per axis",
                        c.id
                    )));
                }
            }
            if c.sample_box.len() != dim {
                return Err(Error::Invalid(format!(
                    "chart `{}`: sample box dimension",
                    c.id
                )));
            }
        }
        Ok(ManifoldModel {
            dim,
            charts,
            transitions: Vec::new(),
        })
    }

    pub fn chart_index(&self, id: &str) -> Option<usize> {
        self.charts.iter().position(|c| c.id == id)
    }

    pub fn n_charts(&self) -> usize {
        self.charts.len()
    }
}

/// Exterior derivative of a coefficient array over coordinates.
pub fn d_local(w: &Alt) -> Alt {
    let m = w.dim();
    let k = w.degree();
    let mut out = Alt::zero(m, k + 1);
    if k + 1 > m {
        return out;
    }
    for idx in subsets(m, k + 1) {
        let c = Expr::sum((0..=k).map(|j| {
            let mut rest = idx.clone();
            let i = rest.remove(j);
            let t = w.at(&rest).partial(i);
            if j % 2 == 0 {
                t
            } else {
                -t
            }
        }));
        out.set(&idx, c);
    }
    out
}

/// `X(f) = Σ X^i ∂_i f`.
pub fn directional(v: &[Expr], f: &Expr) -> Expr {
    Expr::sum(
        v.iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, c)| c * f.partial(i)),
    )
}

/// Lie derivative of a form along a vector field via `i_X d + d i_X`.
pub fn lie_local(v: &[Expr], w: &Alt) -> Alt {
    let a = if w.degree() < w.dim() {
        d_local(w).interior(v)
    } else {
        Alt::zero(w.dim(), w.degree())
    };
    if w.degree() == 0 {
        return Alt::scalar(w.dim(), directional(v, &w.coeffs()[0]));
    }
    a.add(&d_local(&w.interior(v)))
}

/// Vector-field bracket `[X, Y]^i = X(Y^i) − Y(X^i)`.
pub fn bracket_local(x: &[Expr], y: &[Expr]) -> Vec<Expr> {
    (0..x.len())
        .map(|i| directional(x, &y[i]) - directional(y, &x[i]))
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct DiffForm {
    pub degree: usize,
    pub charts: Vec<Alt>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct VectorField {
    pub charts: Vec<Vec<Expr>>,
}

impl DiffForm {
    pub fn zero(m: &ManifoldModel, degree: usize) -> Self {
        DiffForm {
            degree,
            charts: vec![Alt::zero(m.dim, degree); m.n_charts()],
        }
    }

    pub fn from_charts(charts: Vec<Alt>) -> Result<Self, Error> {
        let degree = charts.first().map(Alt::degree).unwrap_or(0);
        if charts.iter().any(|c| c.degree() != degree) {
            return Err(Error::Degree(
                "chart pieces of a form differ in degree".into(),
            ));
        }
        Ok(DiffForm { degree, charts })
    }

    pub fn map(&self, f: impl Fn(&Alt) -> Alt) -> DiffForm {
        let charts: Vec<Alt> = self.charts.iter().map(f).collect();
        DiffForm {
            degree: charts.first().map(Alt::degree).unwrap_or(0),
            charts,
        }
    }
}

pub fn exterior_derivative(w: &DiffForm) -> DiffForm {
    DiffForm {
        degree: w.degree + 1,
        charts: w.charts.iter().map(d_local).collect(),
    }
}

pub fn interior_product(x: &VectorField, w: &DiffForm) -> Result<DiffForm, Error> {
    if w.degree == 0 {
        return Err(Error::Degree("interior product of a 0-form".into()));
    }
    Ok(DiffForm {
        degree: w.degree - 1,
        charts: w
            .charts
            .iter()
            .zip(&x.charts)
            .map(|(a, v)| a.interior(v))
            .collect(),
    })
}

pub fn lie_derivative(x: &VectorField, w: &DiffForm) -> DiffForm {
    DiffForm {
        degree: w.degree,
        charts: w
            .charts
            .iter()
            .zip(&x.charts)
            .map(|(a, v)| lie_local(v, a))
            .collect(),
    }
}

/// Nodes and weights of a Gauss–Legendre rule mapped to `[a, b]`.
pub fn gauss_legendre(order: usize, a: f64, b: f64) -> Vec<(f64, f64)> {
    let n = NonZeroUsize::new(order.max(1)).unwrap();
    let rule = GaussLegendre::new(n);
    let half = 0.5 * (b - a);
    let mid = 0.5 * (b + a);
    rule.as_node_weight_pairs()
        .iter()
        .map(|&(x, w)| (mid + half * x, half * w))
        .collect()
}

/// Compensated accumulator; fixed summation order keeps results reproducible.
#[derive(Default, Clone, Copy)]
struct Neumaier {
    sum: f64,
    c: f64,
}

impl Neumaier {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.c += (self.sum - t) + x;
        } else {
            self.c += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn total(self) -> f64 {
        self.sum + self.c
    }
}

/// Integrates a scalar density over a chart's quadrature box.
pub fn integrate_chart(
    chart: &Chart,
    f: &Expr,
    params: &[f64],
    order: Option<usize>,
) -> Result<f64, EvalError> {
    Ok(integrate_chart_many(chart, std::slice::from_ref(f), params, order)?[0])
}

/// Integrates several densities over the same grid in one sweep, so that
/// subexpressions they share are evaluated once per node.
pub fn integrate_chart_many(
    chart: &Chart,
    fs: &[Expr],
    params: &[f64],
    order: Option<usize>,
) -> Result<Vec<f64>, EvalError> {
    let q = chart
        .quadrature
        .as_ref()
        .expect("integrate_chart needs a quadrature chart");
    let m = chart.dim();
    if fs.iter().all(Expr::is_zero) {
        return Ok(vec![0.0; fs.len()]);
    }
    let axes: Vec<Vec<(f64, f64)>> = (0..m)
        .map(|i| gauss_legendre(order.unwrap_or(q.order[i]), q.domain[i].0, q.domain[i].1))
        .collect();
    let tape = Compiled::new(fs);
    let mut scratch = Vec::new();
    let mut out = vec![0.0; fs.len()];
    let mut acc = vec![Neumaier::default(); fs.len()];
    let mut counter = vec![0usize; m];
    let mut x = vec![0.0; m];
    // lowest axis that moved since the last node; ops depending only on
    // earlier axes keep their cached values
    let mut changed = 0;
    loop {
        let mut w = 1.0;
        for i in 0..m {
            let (node, wt) = axes[i][counter[i]];
            x[i] = node;
            w *= wt;
        }
        tape.eval_staged(&x, params, &mut scratch, &mut out, changed)?;
        for (a, v) in acc.iter_mut().zip(&out) {
            a.add(w * v);
        }
        // advance the multi-index, last axis fastest
        let mut i = m;
        loop {
            if i == 0 {
                return Ok(acc.iter().map(|a| chart.orientation * a.total()).collect());
            }
            i -= 1;
            counter[i] += 1;
            if counter[i] < axes[i].len() {
                changed = i;
                break;
            }
            counter[i] = 0;
        }
    }
}

/// Integral of a top-degree form: the sum over quadrature charts of the
/// oriented tensor-grid quadrature of its coefficient.
pub fn integrate_top_form(
    m: &ManifoldModel,
    w: &DiffForm,
    order: Option<usize>,
) -> Result<f64, Error> {
    if w.degree != m.dim {
        return Err(Error::Degree(format!(
            "can only integrate {}-forms, got degree {}",
            m.dim, w.degree
        )));
    }
    if w.charts.len() != m.n_charts() {
        return Err(Error::Invalid("form is missing chart data".into()));
    }
    let mut total = 0.0;
    for (chart, piece) in m.charts.iter().zip(&w.charts) {
        if chart.quadrature.is_some() {
            total += integrate_chart(chart, &piece.coeffs()[0], &[], order)?;
        }
    }
    Ok(total)
}

/// Residuals of declared transitions applied to a vector field.
pub fn transition_check_vector(m: &ManifoldModel, x: &VectorField) -> Result<Vec<f64>, Error> {
    let mut out = Vec::new();
    for t in &m.transitions {
        let jac: Vec<Expr> = t.jacobian.iter().flatten().cloned().collect();
        let j = Compiled::new(&jac).eval(&t.from.coords, &[])?;
        let vf = Compiled::new(&x.charts[t.from.chart]).eval(&t.from.coords, &[])?;
        let vt = Compiled::new(&x.charts[t.to.chart]).eval(&t.to.coords, &[])?;
        let n = m.dim;
        let mut r: f64 = 0.0;
        for i in 0..n {
            let pushed: f64 = (0..n).map(|k| j[i * n + k] * vf[k]).sum();
            r = r.max((pushed - vt[i]).abs());
        }
        out.push(r);
    }
    Ok(out)
}

/// Residuals of declared transitions applied to a form: the source-chart
/// coefficients must equal the pullback of the target-chart coefficients.
pub fn transition_check_form(m: &ManifoldModel, w: &DiffForm) -> Result<Vec<f64>, Error> {
    let mut out = Vec::new();
    for t in &m.transitions {
        let jac_vals: Vec<Vec<f64>> = t
            .jacobian
            .iter()
            .map(|row| Compiled::new(row).eval(&t.from.coords, &[]))
            .collect::<Result<_, _>>()?;
        let jac: Vec<Vec<Expr>> = jac_vals
            .iter()
            .map(|r| r.iter().map(|&v| Expr::constant(v)).collect())
            .collect();
        let target = &w.charts[t.to.chart];
        let tv = Compiled::new(target.coeffs()).eval(&t.to.coords, &[])?;
        let frozen = Alt::from_coeffs(
            m.dim,
            w.degree,
            tv.into_iter().map(Expr::constant).collect(),
        );
        let pulled = frozen.pullback(&jac, m.dim);
        let pv = Compiled::new(pulled.coeffs()).eval(&[], &[])?;
        let sv = Compiled::new(w.charts[t.from.chart].coeffs()).eval(&t.from.coords, &[])?;
        let r = pv
            .iter()
            .zip(&sv)
            .fold(0.0f64, |acc, (a, b)| acc.max((a - b).abs()));
        out.push(r);
    }
    Ok(out)
}

/// Coordinate basis covector `dx^i` as a 1-form piece.
pub fn coordinate_form(m: usize, idx: &[usize], f: Expr) -> Alt {
    match sort_sign(idx) {
        Some(_) => Alt::monomial(m, idx, f),
        None => Alt::zero(m, idx.len()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_expr;
    use std::f64::consts::PI;

    fn sphere_chart(order: usize) -> Chart {
        Chart {
            id: "sph".into(),
            coords: vec!["th".into(), "ph".into()],
            quadrature: Some(Quadrature {
                domain: vec![(0.0, PI), (0.0, 2.0 * PI)],
                order: vec![order, order],
            }),
            evaluation: false,
            orientation: 1.0,
            sample_box: vec![(0.2, PI - 0.2), (0.0, 2.0 * PI)],
        }
    }

    fn p(src: &str) -> Expr {
        parse_expr(src, &SymbolTable::new(&["th", "ph"], &[])).unwrap()
    }

    #[test]
    fn d_examples() {
        let f = Alt::scalar(2, Expr::constant(4.0));
        assert!(d_local(&f).is_zero());
        let f = Alt::scalar(2, p("cos(th)"));
        let df = d_local(&f);
        assert_eq!(df.at(&[0]), &p("-sin(th)"));
        assert!(df.at(&[1]).is_zero());
        let top = Alt::monomial(2, &[0, 1], p("sin(th)"));
        assert_eq!(d_local(&top).degree(), 3);
        assert!(d_local(&top).is_zero());
    }

    #[test]
    fn interior_examples() {
        let vol = Alt::monomial(2, &[0, 1], Expr::one());
        let dph = vec![Expr::zero(), Expr::one()];
        assert_eq!(
            vol.interior(&dph),
            Alt::monomial(2, &[0], Expr::constant(-1.0))
        );
        let dth = vec![Expr::one(), Expr::zero()];
        let w = Alt::monomial(2, &[0, 1], p("sin(th)"));
        assert_eq!(w.interior(&dth), Alt::monomial(2, &[1], p("sin(th)")));
        let m = ManifoldModel::new(2, vec![sphere_chart(8)]).unwrap();
        let f = DiffForm::zero(&m, 0);
        let x = VectorField {
            charts: vec![dph.clone()],
        };
        assert!(interior_product(&x, &f).is_err());
    }

    #[test]
    fn sphere_area_stabilises() {
        let w = DiffForm {
            degree: 2,
            charts: vec![Alt::monomial(2, &[0, 1], p("sin(th)"))],
        };
        let m = ManifoldModel::new(2, vec![sphere_chart(32)]).unwrap();
        let a32 = integrate_top_form(&m, &w, None).unwrap();
        let a64 = integrate_top_form(&m, &w, Some(64)).unwrap();
        assert!((a32 - 4.0 * PI).abs() < 1e-8);
        assert!((a32 - a64).abs() < 1e-12);
        let z = DiffForm::zero(&m, 2);
        assert_eq!(integrate_top_form(&m, &z, None).unwrap(), 0.0);
    }

    #[test]
    fn torus_area() {
        let c = Chart {
            id: "t".into(),
            coords: vec!["a".into(), "b".into()],
            quadrature: Some(Quadrature {
                domain: vec![(0.0, 2.0 * PI), (0.0, 2.0 * PI)],
                order: vec![4, 4],
            }),
            evaluation: true,
            orientation: 1.0,
            sample_box: vec![(0.0, 2.0 * PI), (0.0, 2.0 * PI)],
        };
        let m = ManifoldModel::new(2, vec![c]).unwrap();
        let w = DiffForm {
            degree: 2,
            charts: vec![Alt::monomial(2, &[0, 1], Expr::one())],
        };
        let v = integrate_top_form(&m, &w, None).unwrap();
        assert!((v - 4.0 * PI * PI).abs() < 1e-12);
    }

    #[test]
    fn orientation_flips_sign() {
        let mut c = sphere_chart(16);
        c.orientation = -1.0;
        let v = integrate_chart(&c, &p("sin(th)"), &[], None).unwrap();
        assert!((v + 4.0 * PI).abs() < 1e-10);
    }

    #[test]
    fn lie_derivative_matches_linearised_pullback() {
        // (ψ_t^* w)(x) with ψ_t(x) = x + t X(x) has t-derivative L_X w at t = 0.
        let x = vec![p("sin(ph)*th"), p("cos(th) + th*ph")];
        let w = Alt::from_coeffs(2, 1, vec![p("th*cos(ph)"), p("sin(th)^2")]);
        let lie = lie_local(&x, &w);
        let pt = [0.7, 0.4];
        let xs = Compiled::new(&x);
        let jac: Vec<Expr> = (0..2)
            .flat_map(|i| (0..2).map(move |j| (i, j)))
            .map(|(i, j)| x[i].partial(j))
            .collect();
        let jt = Compiled::new(&jac).eval(&pt, &[]).unwrap();
        let wt = Compiled::new(w.coeffs());
        let pull = |t: f64| -> Vec<f64> {
            let xv = xs.eval(&pt, &[]).unwrap();
            let q = [pt[0] + t * xv[0], pt[1] + t * xv[1]];
            let wv = wt.eval(&q, &[]).unwrap();
            (0..2)
                .map(|j| {
                    (0..2)
                        .map(|i| wv[i] * ((i == j) as u8 as f64 + t * jt[i * 2 + j]))
                        .sum()
                })
                .collect()
        };
        let h = 1e-5;
        let (a, b) = (pull(h), pull(-h));
        let lv = Compiled::new(lie.coeffs()).eval(&pt, &[]).unwrap();
        for j in 0..2 {
            let fd = (a[j] - b[j]) / (2.0 * h);
            assert!((fd - lv[j]).abs() < 1e-5, "{fd} vs {}", lv[j]);
        }
    }

    #[test]
    fn d_squared_vanishes() {
        let w = Alt::from_coeffs(3, 1, vec![p("th*ph"), p("sin(th*ph)"), p("exp(th)")]);
        let dd = d_local(&d_local(&w));
        assert!(dd.max_abs_at(&[0.3, 0.9, 0.1], &[]).unwrap() < 1e-12);
    }
}
