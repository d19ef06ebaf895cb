//! Fixed points of `ξ*`, square-root determinants, and both sides of the
//! localization formula.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::algebroid::AlgebroidModel;
use crate::equivariant::{
    delta_g_evaluated, p_mixed, xi_constants, EquivTwistedCochain, LieAlgebraAction,
};
use crate::expr::{Compiled, Expr};
use crate::geometry::{integrate_chart, ManifoldModel};
use crate::linalg::{metric_factor, pfaffian, skew_residual, to_matrix};
use crate::sampling::{max_abs_sampled, mixed_exprs};
use crate::{Error, Result};

/// A fixed point as declared in an example, before validation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeclaredFixedPoint {
    pub chart: String,
    pub coords: Vec<f64>,
    pub metric: Vec<Vec<f64>>,
    /// Expected `L_{ξ,x}` for the example's default `ξ`, if given.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub linearization: Option<Vec<Vec<f64>>>,
}

/// A validated isolated zero of `ξ*`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FixedPointRecord {
    pub chart: usize,
    pub chart_id: String,
    pub coords: Vec<f64>,
    /// `L_{ξ,x}(v) = [ξ*, v]`, i.e. `L^i_j = −∂_j (ξ*)^i`.
    pub linearization: Vec<Vec<f64>>,
    pub orientation: f64,
    pub metric: Vec<Vec<f64>>,
}

pub const ZERO_TOL: f64 = 1e-10;
pub const SKEW_TOL: f64 = 1e-9;

/// Linearisation `−∂_j X^i` of a vector field at a point.
pub fn linearization(field: &[Expr], coords: &[f64]) -> Result<Vec<Vec<f64>>> {
    let m = field.len();
    let jac: Vec<Expr> = field
        .iter()
        .flat_map(|f| (0..m).map(move |j| -f.partial(j)))
        .collect();
    let v = Compiled::new(&jac).eval(coords, &[])?;
    Ok(v.chunks(m.max(1)).take(m).map(<[f64]>::to_vec).collect())
}

pub fn validate_fixed_points(
    a: &AlgebroidModel,
    action: &LieAlgebraAction,
    xi: &[f64],
    declared: &[DeclaredFixedPoint],
) -> Result<Vec<FixedPointRecord>> {
    let m = a.manifold.dim;
    let xi_e = xi_constants(xi);
    let mut out = Vec::new();
    for d in declared {
        let ch = a
            .manifold
            .chart_index(&d.chart)
            .ok_or_else(|| Error::Invalid(format!("unknown chart `{}`", d.chart)))?;
        let chart = &a.manifold.charts[ch];
        if !chart.evaluation || d.coords.len() != m {
            return Err(Error::Precondition(format!(
                "fixed point must be given by {m} coordinates in an evaluation chart (`{}`)",
                d.chart
            )));
        }
        let field = action.fundamental_of(a, ch, &xi_e);
        let vals = Compiled::new(&field).eval(&d.coords, &[])?;
        let size = vals.iter().fold(0.0f64, |s, v| s.max(v.abs()));
        if size > ZERO_TOL {
            return Err(Error::Precondition(format!(
                "ξ* does not vanish at {:?} in `{}` (|ξ*| = {size:.3e})",
                d.coords, d.chart
            )));
        }
        let lin = linearization(&field, &d.coords)?;
        let l = to_matrix(&lin);
        if let Some(expected) = &d.linearization {
            let diff = (&l - to_matrix(expected)).amax();
            if diff > 1e-9 * (1.0 + l.amax()) {
                return Err(Error::Precondition(format!(
                    "declared linearization differs from the computed one by {diff:.3e}"
                )));
            }
        }
        let det = l.determinant();
        if m > 0 && det.abs() <= 1e-12 * (1.0 + l.amax()).powi(m as i32) {
            return Err(Error::Precondition(format!(
                "zero at {:?} in `{}` is not isolated (det L = {det:.3e})",
                d.coords, d.chart
            )));
        }
        let rec = FixedPointRecord {
            chart: ch,
            chart_id: d.chart.clone(),
            coords: d.coords.clone(),
            linearization: lin,
            orientation: chart.orientation,
            metric: d.metric.clone(),
        };
        sqrt_det(&rec)?;
        out.push(rec);
    }
    Ok(out)
}

/// `det^{1/2} L`: the Pfaffian of `L` in a positively oriented
/// orthonormal basis of the declared metric.
pub fn sqrt_det(rec: &FixedPointRecord) -> Result<f64> {
    let l = to_matrix(&rec.linearization);
    let g = to_matrix(&rec.metric);
    if g.nrows() != l.nrows() {
        return Err(Error::Invalid(
            "metric and linearization sizes differ".into(),
        ));
    }
    let u = metric_factor(&g)?;
    let res = skew_residual(&l, &g);
    if res > SKEW_TOL * (1.0 + l.amax() * g.amax()) {
        return Err(Error::Precondition(format!(
            "L is not skew for the declared metric (residual {res:.3e})"
        )));
    }
    let u_inv = u
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Precondition("degenerate metric".into()))?;
    let hat: DMatrix<f64> = &u * l * u_inv;
    let hat = (&hat - hat.transpose()) * 0.5;
    Ok(rec.orientation * pfaffian(&hat))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocalizationReport {
    pub lhs: f64,
    pub rhs: f64,
    pub abs_diff: f64,
    pub rel_diff: f64,
    pub pass: bool,
    pub contributions: Vec<f64>,
    pub closedness: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
}

/// Tolerances for a both-sides comparison: pass when the relative
/// difference is below `rel`, or the absolute one below `abs` (which is
/// what decides near-zero cases).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerance {
    pub rel: f64,
    pub abs: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance {
            rel: 1e-5,
            abs: 1e-7,
        }
    }
}

impl Tolerance {
    pub fn compare(&self, lhs: f64, rhs: f64) -> (f64, f64, bool) {
        let abs_diff = (lhs - rhs).abs();
        let scale = lhs.abs().max(rhs.abs());
        let rel_diff = if scale > 0.0 { abs_diff / scale } else { 0.0 };
        let pass = abs_diff.is_finite() && (abs_diff <= self.abs || rel_diff <= self.rel);
        (abs_diff, rel_diff, pass)
    }
}

/// `∫_M p(γ(ξ))`, or 0 with a reason when `r < m`.
pub fn localization_lhs(
    a: &AlgebroidModel,
    gamma: &EquivTwistedCochain,
    xi: &[f64],
    order: Option<usize>,
) -> Result<(f64, Option<String>)> {
    let m = a.manifold.dim;
    if a.rank < m {
        return Ok((
            0.0,
            Some(format!("rank {} < dim {m}: the integral vanishes", a.rank)),
        ));
    }
    let vals = gamma.evaluate(a.rank, a.manifold.n_charts(), &xi_constants(xi));
    let forms = p_mixed(a, &vals);
    let mut total = 0.0;
    for (chart, w) in a.manifold.charts.iter().zip(&forms) {
        if chart.quadrature.is_some() {
            total += integrate_chart(chart, &w.part(m).coeffs()[0], &[], order)?;
        }
    }
    Ok((total, None))
}

/// Degree-zero part of `p(γ(ξ))` at a fixed point.
pub fn p_zero_at(
    a: &AlgebroidModel,
    gamma: &EquivTwistedCochain,
    xi: &[f64],
    fp: &FixedPointRecord,
) -> Result<f64> {
    let vals = gamma.evaluate(a.rank, a.manifold.n_charts(), &xi_constants(xi));
    let forms = p_mixed(a, &vals);
    Ok(forms[fp.chart].part(0).coeffs()[0].eval(&fp.coords, &[])?)
}

/// `(−2π)^{m/2} Σ_x p(γ(ξ))₀(x) / det^{1/2} L_{ξ,x}` and its terms.
pub fn localization_rhs(
    a: &AlgebroidModel,
    gamma: &EquivTwistedCochain,
    xi: &[f64],
    fixed: &[FixedPointRecord],
) -> Result<(f64, Vec<f64>)> {
    let m = a.manifold.dim;
    let pref = (-2.0 * PI).powi((m / 2) as i32);
    let mut terms = Vec::new();
    for fp in fixed {
        let p0 = p_zero_at(a, gamma, xi, fp)?;
        terms.push(pref * p0 / sqrt_det(fp)?);
    }
    Ok((terms.iter().sum(), terms))
}

/// `max |δ̃_g γ|` at the given `ξ` over sampled points.
pub fn closedness_at(
    a: &AlgebroidModel,
    action: &LieAlgebraAction,
    gamma: &EquivTwistedCochain,
    xi: &[f64],
    samples: usize,
) -> Result<f64> {
    let xi_e = xi_constants(xi);
    let vals = gamma.evaluate(a.rank, a.manifold.n_charts(), &xi_e);
    let d = delta_g_evaluated(a, action, &vals, &xi_e, true);
    max_abs_sampled(
        &a.manifold,
        &mixed_exprs(&d),
        &[],
        samples,
        &mut ChaCha8Rng::seed_from_u64(7),
    )
}

pub const CLOSED_TOL: f64 = 1e-8;

#[allow(clippy::too_many_arguments)]
pub fn verify_localization(
    a: &AlgebroidModel,
    action: &LieAlgebraAction,
    gamma: &EquivTwistedCochain,
    xi: &[f64],
    declared: &[DeclaredFixedPoint],
    order: Option<usize>,
    tol: Tolerance,
) -> Result<LocalizationReport> {
    if a.manifold.dim % 2 == 1 {
        return Err(Error::Precondition(
            "localization needs an even-dimensional base".into(),
        ));
    }
    let closedness = closedness_at(a, action, gamma, xi, 50)?;
    if closedness > CLOSED_TOL {
        return Err(Error::Precondition(format!(
            "cochain is not equivariantly closed (residual {closedness:.3e})"
        )));
    }
    let fixed = validate_fixed_points(a, action, xi, declared)?;
    let (lhs, reason) = localization_lhs(a, gamma, xi, order)?;
    let (rhs, contributions) = localization_rhs(a, gamma, xi, &fixed)?;
    let (abs_diff, rel_diff, pass) = tol.compare(lhs, rhs);
    Ok(LocalizationReport {
        lhs,
        rhs,
        abs_diff,
        rel_diff,
        pass,
        contributions,
        closedness,
        reason,
    })
}

/// The classical statement on forms alone: `α` is an inhomogeneous form
/// given per chart by its homogeneous parts, `field` the generating vector
/// field. No algebroid data is involved, so this is an independent route
/// to the same numbers in the `A = TM` case.
pub mod classical {
    use super::*;
    use crate::alt::Mixed;

    pub struct ClassicalPoint {
        pub chart: usize,
        pub coords: Vec<f64>,
        pub metric: Vec<Vec<f64>>,
    }

    /// Pfaffian by expansion along the first row.
    fn pf(a: &[Vec<f64>]) -> f64 {
        let n = a.len();
        if n == 0 {
            return 1.0;
        }
        let mut s = 0.0;
        for j in 1..n {
            let keep: Vec<usize> = (1..n).filter(|&k| k != j).collect();
            let sub: Vec<Vec<f64>> = keep
                .iter()
                .map(|&x| keep.iter().map(|&y| a[x][y]).collect())
                .collect();
            let sign = if j % 2 == 1 { 1.0 } else { -1.0 };
            s += sign * a[0][j] * pf(&sub);
        }
        s
    }

    /// Gram–Schmidt on the coordinate basis for the metric `g`; returns the
    /// matrix whose columns are the orthonormal vectors.
    fn orthonormal(g: &[Vec<f64>]) -> Vec<Vec<f64>> {
        let n = g.len();
        let ip = |u: &[f64], v: &[f64]| {
            let mut s = 0.0;
            for i in 0..n {
                for j in 0..n {
                    s += u[i] * g[i][j] * v[j];
                }
            }
            s
        };
        let mut basis: Vec<Vec<f64>> = Vec::new();
        for k in 0..n {
            let mut v = vec![0.0; n];
            v[k] = 1.0;
            for b in &basis {
                let c = ip(&v, b);
                for i in 0..n {
                    v[i] -= c * b[i];
                }
            }
            let norm = ip(&v, &v).sqrt();
            basis.push(v.iter().map(|x| x / norm).collect());
        }
        basis
    }

    pub fn lhs(m: &ManifoldModel, alpha: &[Mixed], order: Option<usize>) -> Result<f64> {
        let mut total = 0.0;
        for (chart, w) in m.charts.iter().zip(alpha) {
            if chart.quadrature.is_some() {
                total += integrate_chart(chart, &w.part(m.dim).coeffs()[0], &[], order)?;
            }
        }
        Ok(total)
    }

    /// `(−2π)^{m/2} Σ α₀(x) / Pf(L_x)` with `L_x v = [X, v]`.
    pub fn rhs(
        m: &ManifoldModel,
        alpha: &[Mixed],
        field: &[Vec<Expr>],
        points: &[ClassicalPoint],
    ) -> Result<f64> {
        let n = m.dim;
        let mut total = 0.0;
        for p in points {
            let x = &field[p.chart];
            let mut l = vec![vec![0.0; n]; n];
            for i in 0..n {
                for j in 0..n {
                    l[i][j] = -x[i].partial(j).eval(&p.coords, &[])?;
                }
            }
            let b = orthonormal(&p.metric);
            // matrix of L in the orthonormal basis: entries ⟨b_i, L b_j⟩_g
            let mut hat = vec![vec![0.0; n]; n];
            for i in 0..n {
                for j in 0..n {
                    let lb: Vec<f64> = (0..n)
                        .map(|r| (0..n).map(|c| l[r][c] * b[j][c]).sum())
                        .collect();
                    let mut s = 0.0;
                    for r in 0..n {
                        for c in 0..n {
                            s += b[i][r] * p.metric[r][c] * lb[c];
                        }
                    }
                    hat[i][j] = s;
                }
            }
            let sd = m.charts[p.chart].orientation * pf(&hat);
            let a0 = alpha[p.chart].part(0).coeffs()[0].eval(&p.coords, &[])?;
            total += a0 / sd;
        }
        Ok((-2.0 * PI).powi((n / 2) as i32) * total)
    }
}
