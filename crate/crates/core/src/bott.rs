//! Polynomials in the Pontryagin-type classes, the numbers `Φ_Ξ(A)`, and
//! the fixed-point formula for them.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::algebroid::{ACochain, AlgebroidModel};
use crate::alt::Mixed;
use crate::connection::{elementary_invariants, AConnectionModel, InvariantPoly};
use crate::equivariant::{p_mixed, xi_constants, EquivTwistedCochain, LieAlgebraAction};
use crate::expr::{parse_expr, Compiled, Expr, SymbolTable};
use crate::geometry::integrate_chart;
use crate::linalg::{char_coefficients, to_matrix};
use crate::localization::{
    closedness_at, sqrt_det, validate_fixed_points, DeclaredFixedPoint, Tolerance, CLOSED_TOL,
};
use crate::sampling::max_abs_sampled;
use crate::twisted::TwistedCochain;
use crate::{Error, Result};

/// Weight of `Π λ_{2i}^{e_i}`: each `λ_{2i}` is a `4i`-cochain.
pub fn total_weight(exponents: &[u32]) -> usize {
    exponents
        .iter()
        .enumerate()
        .map(|(i, &e)| 4 * (i + 1) * e as usize)
        .sum()
}

/// `Σ coef · Π λ_{2i}^{e_i}` with `e` indexed from `i = 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightedPoly {
    pub terms: Vec<(f64, Vec<u32>)>,
}

impl WeightedPoly {
    pub fn one() -> Self {
        WeightedPoly {
            terms: vec![(1.0, Vec::new())],
        }
    }

    pub fn monomial(exponents: Vec<u32>) -> Self {
        WeightedPoly {
            terms: vec![(1.0, exponents)],
        }
    }

    /// Parses a polynomial in `x1, …, xn` (`xi` standing for `λ_{2i}`) of
    /// weight at most `max_weight`. The coefficients are read off as Taylor
    /// coefficients at the origin, and the reconstruction is compared with
    /// the expression at random points, which rejects anything that is not
    /// such a polynomial.
    pub fn parse(src: &str, max_weight: usize) -> Result<Self> {
        let n = max_weight / 4;
        let names: Vec<String> = (1..=n).map(|i| format!("x{i}")).collect();
        let expr = parse_expr(src, &SymbolTable::new(&names, &[] as &[String]))?;
        let mut terms = Vec::new();
        let mut exps = vec![0u32; n];
        collect_monomials(&expr, &mut exps, 0, max_weight, 1.0, &mut terms)?;
        let poly = WeightedPoly { terms };
        let check: Vec<f64> = (0..n).map(|i| 0.37 + 0.21 * i as f64).collect();
        for scale in [0.5, 1.3, -0.8] {
            let pt: Vec<f64> = check.iter().map(|v| v * scale).collect();
            let want = expr.eval(&pt, &[])?;
            let got = poly.eval(&pt);
            if (want - got).abs() > 1e-9 * (1.0 + want.abs()) {
                return Err(Error::Invalid(format!(
                    "`{src}` is not a polynomial in x1..x{n} of weight at most {max_weight}"
                )));
            }
        }
        Ok(poly)
    }

    /// Total weight, if all terms share it.
    pub fn weight(&self) -> Option<usize> {
        let mut it = self.terms.iter().map(|(_, e)| total_weight(e));
        let first = it.next()?;
        it.all(|w| w == first).then_some(first)
    }

    /// Value with `λ_{2i}` bound to `vals[i − 1]`.
    pub fn eval(&self, vals: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(c, e)| {
                c * e
                    .iter()
                    .enumerate()
                    .map(|(i, &k)| vals[i].powi(k as i32))
                    .product::<f64>()
            })
            .sum()
    }

    /// The same polynomial in the elementary invariants `ς_j`, with
    /// `λ_{2i} = ς_{2i}`.
    pub fn to_invariant(&self) -> InvariantPoly {
        InvariantPoly {
            terms: self
                .terms
                .iter()
                .map(|(c, e)| {
                    let mut out = vec![0; 2 * e.len()];
                    for (i, &k) in e.iter().enumerate() {
                        out[2 * i + 1] = k;
                    }
                    (*c, out)
                })
                .collect(),
        }
    }
}

fn factorial(k: u32) -> f64 {
    (1..=k).map(f64::from).product()
}

fn collect_monomials(
    expr: &Expr,
    exps: &mut Vec<u32>,
    var: usize,
    budget: usize,
    denom: f64,
    out: &mut Vec<(f64, Vec<u32>)>,
) -> Result<()> {
    if var == exps.len() {
        let c = expr.eval(&vec![0.0; exps.len()], &[])? / denom;
        if c.abs() > 1e-14 {
            out.push((c, exps.clone()));
        }
        return Ok(());
    }
    let w = 4 * (var + 1);
    let mut e = expr.clone();
    let mut k = 0u32;
    while (k as usize) * w <= budget {
        exps[var] = k;
        collect_monomials(
            &e,
            exps,
            var + 1,
            budget - k as usize * w,
            denom * factorial(k),
            out,
        )?;
        e = e.partial(var);
        k += 1;
    }
    exps[var] = 0;
    Ok(())
}

/// `c_i(L)`: coefficient of `t^{m−i}` in `det(tI + L)`.
pub fn chern_of_endomorphism(l: &[Vec<f64>], i: usize) -> f64 {
    char_coefficients(&to_matrix(l))
        .get(i)
        .copied()
        .unwrap_or(0.0)
}

fn mixed_to_cochain(values: &[Mixed], degree: usize) -> ACochain {
    ACochain {
        degree,
        charts: values.iter().map(|v| v.part(degree).clone()).collect(),
    }
}

/// `(−2π)^{−m/2} ∫_M Φ(λ_2(A), …) ∧ Ξ` for a closed twisted cochain `Ξ` of
/// degree `r − W_Φ`.
pub fn phi_number(
    a: &AlgebroidModel,
    conn: &AConnectionModel,
    phi: &WeightedPoly,
    xi_tw: &TwistedCochain,
    order: Option<usize>,
) -> Result<f64> {
    let w = phi
        .weight()
        .ok_or_else(|| Error::Degree("Φ must have a single total weight".into()))?;
    if w > a.rank || xi_tw.degree + w != a.rank {
        return Err(Error::Degree(format!(
            "Φ has weight {w}, so Ξ must have degree {} (got {})",
            a.rank as i64 - w as i64,
            xi_tw.degree
        )));
    }
    if xi_tw.degree < a.rank {
        let closed = a.delta_twisted(xi_tw)?;
        let exprs: Vec<Vec<Expr>> = closed.charts.iter().map(|c| c.coeffs().to_vec()).collect();
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(7);
        let res = max_abs_sampled(&a.manifold, &exprs, &[], 50, &mut rng)?;
        if res > CLOSED_TOL {
            return Err(Error::Precondition(format!(
                "Ξ is not closed (residual {res:.3e})"
            )));
        }
    }
    let cw = conn.chern_weil(a, &phi.to_invariant())?;
    let integrand = a.cup_product(&mixed_to_cochain(&cw, w), xi_tw)?;
    let m = a.manifold.dim;
    Ok((-2.0 * PI).powf(-(m as f64) / 2.0) * a.integrate_twisted(&integrand, order)?)
}

/// `Φ^g_Ξ(A)(ξ) = (−2π)^{−m/2} ∫_M p(Φ(ς_2(R^g), …) ∧ Ξ^g)(ξ)`.
#[allow(clippy::too_many_arguments)]
pub fn phi_equivariant(
    a: &AlgebroidModel,
    conn: &AConnectionModel,
    action: &LieAlgebraAction,
    phi: &WeightedPoly,
    xi_g: &EquivTwistedCochain,
    xi: &[f64],
    order: Option<usize>,
) -> Result<f64> {
    let m = a.manifold.dim;
    let forms = p_mixed(a, &equivariant_integrand(a, conn, action, phi, xi_g, xi)?);
    let mut total = 0.0;
    for (chart, w) in a.manifold.charts.iter().zip(&forms) {
        if chart.quadrature.is_some() {
            total += integrate_chart(chart, &w.part(m).coeffs()[0], &[], order)?;
        }
    }
    Ok((-2.0 * PI).powf(-(m as f64) / 2.0) * total)
}

fn equivariant_integrand(
    a: &AlgebroidModel,
    conn: &AConnectionModel,
    action: &LieAlgebraAction,
    phi: &WeightedPoly,
    xi_g: &EquivTwistedCochain,
    xi: &[f64],
) -> Result<Vec<Mixed>> {
    let x = xi_constants(xi);
    let cw = conn.chern_weil_equivariant(a, action, &phi.to_invariant(), &x)?;
    let vals = xi_g.evaluate(a.rank, a.manifold.n_charts(), &x);
    Ok(cw.iter().zip(&vals).map(|(c, v)| c.wedge(v)).collect())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BottContribution {
    pub chart: String,
    pub coords: Vec<f64>,
    /// `c_0(L), …, c_m(L)`.
    pub chern: Vec<f64>,
    pub phi: f64,
    pub p0: f64,
    pub sqrt_det: f64,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BottReport {
    pub weight: usize,
    /// `Φ_Ξ(A)`, computed with `Ξ = Ξ^g(0)`.
    pub phi_number: f64,
    /// `Φ^g_Ξ(A)(ξ)`, the integral of the equivariant integrand at `ξ`.
    pub phi_equivariant: f64,
    pub rhs: f64,
    pub abs_diff: f64,
    pub rel_diff: f64,
    pub pass: bool,
    pub contributions: Vec<BottContribution>,
    /// `max |ς_i(R^g)_0(x) − c_i(L)|` over fixed points, when the bundle
    /// has the rank of the base.
    pub fixed_point_identity: Option<f64>,
    pub closedness: f64,
}

/// `max_i |ς_i(μ(x)) − c_i(L)|` at a validated fixed point.
pub fn fixed_point_identity(
    a: &AlgebroidModel,
    conn: &AConnectionModel,
    action: &LieAlgebraAction,
    xi: &[f64],
    chart: usize,
    coords: &[f64],
    l: &[Vec<f64>],
) -> Result<f64> {
    let rg = conn.equivariant_curvature(a, action, &xi_constants(xi))?;
    let (sig, _) = elementary_invariants(&rg[chart], conn.n, None);
    let exprs: Vec<Expr> = sig.iter().map(|s| s.part(0).coeffs()[0].clone()).collect();
    let vals = Compiled::new(&exprs).eval(coords, &[])?;
    let c = char_coefficients(&to_matrix(l));
    Ok(vals
        .iter()
        .zip(c.iter())
        .map(|(s, c)| (s - c).abs())
        .fold(0.0, f64::max))
}

/// Both sides of the fixed-point formula for `Φ_Ξ(A)`:
/// `Σ_x Φ(c_2(L), …, c_{2n}(L)) p(Ξ^g(ξ))_0(x) / det^{1/2} L_{ξ,x}`.
#[allow(clippy::too_many_arguments)]
pub fn verify_bott(
    a: &AlgebroidModel,
    conn: &AConnectionModel,
    action: &LieAlgebraAction,
    phi: &WeightedPoly,
    xi_g: &EquivTwistedCochain,
    xi: &[f64],
    declared: &[DeclaredFixedPoint],
    order: Option<usize>,
    tol: Tolerance,
) -> Result<BottReport> {
    let m = a.manifold.dim;
    let weight = phi
        .weight()
        .ok_or_else(|| Error::Degree("Φ must have a single total weight".into()))?;
    if !(a.rank >= m && m >= weight) {
        return Err(Error::Precondition(format!(
            "need r ≥ m ≥ W_Φ, got r = {}, m = {m}, W_Φ = {weight}",
            a.rank
        )));
    }
    if m % 2 == 1 {
        return Err(Error::Precondition(
            "the base must be even-dimensional".into(),
        ));
    }
    let closedness = closedness_at(a, action, xi_g, xi, 50)?;
    if closedness > CLOSED_TOL {
        return Err(Error::Precondition(format!(
            "Ξ^g is not equivariantly closed (residual {closedness:.3e})"
        )));
    }
    let fixed = validate_fixed_points(a, action, xi, declared)?;

    let xi0 = xi_g.evaluate(
        a.rank,
        a.manifold.n_charts(),
        &xi_constants(&vec![0.0; action.dim]),
    );
    let xi_tw = TwistedCochain {
        degree: a.rank - weight,
        charts: xi0
            .iter()
            .map(|v| v.part(a.rank - weight).clone())
            .collect(),
    };
    let lhs = phi_number(a, conn, phi, &xi_tw, order)?;
    let phi_eq = phi_equivariant(a, conn, action, phi, xi_g, xi, order)?;

    let vals = xi_g.evaluate(a.rank, a.manifold.n_charts(), &xi_constants(xi));
    let forms = p_mixed(a, &vals);
    let mut contributions = Vec::new();
    let mut identity: Option<f64> = None;
    for fp in &fixed {
        let chern = char_coefficients(&to_matrix(&fp.linearization));
        let lam: Vec<f64> = (1..=m / 2)
            .map(|i| chern.get(2 * i).copied().unwrap_or(0.0))
            .collect();
        let phi_val = phi.eval(&lam);
        let p0 = forms[fp.chart].part(0).coeffs()[0].eval(&fp.coords, &[])?;
        let sd = sqrt_det(fp)?;
        if conn.n == m {
            let r =
                fixed_point_identity(a, conn, action, xi, fp.chart, &fp.coords, &fp.linearization)?;
            identity = Some(identity.map_or(r, |v: f64| v.max(r)));
        }
        contributions.push(BottContribution {
            chart: fp.chart_id.clone(),
            coords: fp.coords.clone(),
            chern,
            phi: phi_val,
            p0,
            sqrt_det: sd,
            value: phi_val * p0 / sd,
        });
    }
    let rhs: f64 = contributions.iter().map(|c| c.value).sum();
    let (abs_diff, rel_diff, pass) = tol.compare(lhs, rhs);
    Ok(BottReport {
        weight,
        phi_number: lhs,
        phi_equivariant: phi_eq,
        rhs,
        abs_diff,
        rel_diff,
        pass,
        contributions,
        fixed_point_identity: identity,
        closedness,
    })
}
