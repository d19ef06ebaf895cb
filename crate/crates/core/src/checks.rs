//! Residual suites over a loaded example: algebroid axioms, the complex
//! identities, Stokes, the equivariant identity, and the connection
//! calculus. Each suite returns a [`ResidualReport`].

use rand::Rng;

use crate::algebroid::AlgebroidModel;
use crate::alt::{Alt, Mixed};
use crate::connection::{
    chern_weil_forms, transgression, AConnectionModel, InvariantPoly, MatForm,
};
use crate::equivariant::{
    delta_g_evaluated, membership_check_qg, p_identity_check, xi_symbols, EquivTwistedCochain,
};
use crate::expr::Expr;
use crate::geometry::d_local;
use crate::localization::{closedness_at, validate_fixed_points, CLOSED_TOL};
use crate::sampling::{max_abs_sampled, mixed_exprs, FunctionPool, ResidualReport};
use crate::spec::Example;
use crate::twisted::{delta_twisted_local, p_local, TwistedCochain};
use crate::{bott, Result};

pub const POINTWISE_TOL: f64 = 1e-9;
pub const STOKES_TOL: f64 = 1e-7;
pub const TRANSGRESSION_TOL: f64 = 1e-6;
pub const FIXED_POINT_TOL: f64 = 1e-8;

/// Knobs shared by the suites.
#[derive(Clone, Copy, Debug)]
pub struct SuiteConfig {
    /// Random points per chart for pointwise residuals.
    pub samples: usize,
    /// Random cochains per degree.
    pub cochains: usize,
    /// Random cochains for the Stokes check.
    pub stokes_cochains: usize,
    /// Quadrature order per axis for Stokes; `None` uses each chart's own.
    pub stokes_order: Option<usize>,
    /// Points per chart for the closedness check of declared cocycles.
    pub closed_samples: usize,
    /// Gauss–Legendre order of the transgression `t`-integral.
    pub t_order: usize,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            samples: 200,
            cochains: 50,
            stokes_cochains: 20,
            stokes_order: None,
            closed_samples: 50,
            t_order: 8,
        }
    }
}

fn sampled(
    a: &AlgebroidModel,
    exprs: &[Vec<Expr>],
    params: &[f64],
    samples: usize,
    rng: &mut impl Rng,
) -> Result<f64> {
    max_abs_sampled(&a.manifold, exprs, params, samples, rng)
}

/// Anchor homomorphism, Jacobi, and `δ² = 0` on random cochains of every
/// degree.
pub fn axiom_suite(ex: &Example, cfg: &SuiteConfig, rng: &mut impl Rng) -> Result<ResidualReport> {
    let a = &ex.algebroid;
    let mut report = a.check_axioms(cfg.samples, rng)?;
    let pool = FunctionPool::polynomial(&a.manifold);
    let mut worst: f64 = 0.0;
    for k in 0..a.rank.saturating_sub(1) {
        let mut exprs = vec![Vec::new(); a.manifold.n_charts()];
        for _ in 0..cfg.cochains {
            for (ch, l) in a.local.iter().enumerate() {
                let psi = pool.random_alt(ch, a.rank, k, rng);
                exprs[ch].extend_from_slice(l.delta(&l.delta(&psi)).coeffs());
            }
        }
        worst = worst.max(sampled(a, &exprs, &[], cfg.samples.min(20), rng)?);
    }
    report.push("delta_squared", worst, POINTWISE_TOL);
    Ok(report)
}

fn p_or_zero(a: &AlgebroidModel, ch: usize, psi: &Alt) -> Option<Alt> {
    (psi.degree() + a.manifold.dim >= a.rank).then(|| p_local(&a.local[ch], psi))
}

/// `p∘δ̃ = (−1)^k d∘p` on random twisted cochains of every degree.
pub fn chain_map_suite(
    ex: &Example,
    cfg: &SuiteConfig,
    rng: &mut impl Rng,
) -> Result<ResidualReport> {
    let a = &ex.algebroid;
    let m = a.manifold.dim;
    let pool = FunctionPool::polynomial(&a.manifold);
    let mut report = ResidualReport::default();
    let mut worst: f64 = 0.0;
    let mut worst_sq: f64 = 0.0;
    for k in 0..a.rank {
        let mut exprs = vec![Vec::new(); a.manifold.n_charts()];
        let mut sq = vec![Vec::new(); a.manifold.n_charts()];
        for _ in 0..cfg.cochains {
            for (ch, l) in a.local.iter().enumerate() {
                let psi = pool.random_alt(ch, a.rank, k, rng);
                let dpsi = delta_twisted_local(l, &psi);
                if k + 1 < a.rank {
                    sq[ch].extend_from_slice(delta_twisted_local(l, &dpsi).coeffs());
                }
                let lhs = p_or_zero(a, ch, &dpsi);
                let rhs = p_or_zero(a, ch, &psi).filter(|p| p.degree() < m).map(|p| {
                    let d = d_local(&p);
                    if k % 2 == 0 {
                        d
                    } else {
                        d.neg()
                    }
                });
                match (lhs, rhs) {
                    (Some(l), Some(r)) => exprs[ch].extend_from_slice(l.sub(&r).coeffs()),
                    (Some(l), None) => exprs[ch].extend_from_slice(l.coeffs()),
                    (None, Some(r)) => exprs[ch].extend_from_slice(r.coeffs()),
                    (None, None) => {}
                }
            }
        }
        worst = worst.max(sampled(a, &exprs, &[], cfg.samples.min(20), rng)?);
        worst_sq = worst_sq.max(sampled(a, &sq, &[], cfg.samples.min(20), rng)?);
    }
    report.push("twisted_delta_squared", worst_sq, POINTWISE_TOL);
    report.push("chain_map", worst, POINTWISE_TOL);
    Ok(report)
}

/// A random twisted cochain built from the example's globally smooth test
/// functions on the quadrature charts, zero elsewhere.
pub fn random_global_cochain(ex: &Example, degree: usize, rng: &mut impl Rng) -> TwistedCochain {
    let a = &ex.algebroid;
    let charts = a
        .manifold
        .charts
        .iter()
        .enumerate()
        .map(|(ch, c)| {
            if c.quadrature.is_some() {
                ex.pool.random_alt(ch, a.rank, degree, rng)
            } else {
                Alt::zero(a.rank, degree)
            }
        })
        .collect();
    TwistedCochain { degree, charts }
}

/// `|∫ δ̃c|` for random global `(r−1)`-cochains.
pub fn stokes_suite(ex: &Example, cfg: &SuiteConfig, rng: &mut impl Rng) -> Result<ResidualReport> {
    let a = &ex.algebroid;
    let mut report = ResidualReport::default();
    if a.rank == 0 {
        return Ok(report);
    }
    let cs: Vec<TwistedCochain> = (0..cfg.stokes_cochains)
        .map(|_| random_global_cochain(ex, a.rank - 1, rng))
        .collect();
    let worst = a
        .stokes_check_many(&cs, cfg.stokes_order)?
        .into_iter()
        .fold(0.0, f64::max);
    report.push("stokes", worst, STOKES_TOL);
    Ok(report)
}

fn exponent_vectors(dim: usize, total: u32) -> Vec<Vec<u32>> {
    if dim == 0 {
        return if total == 0 {
            vec![Vec::new()]
        } else {
            Vec::new()
        };
    }
    let mut out = Vec::new();
    for first in 0..=total {
        for mut rest in exponent_vectors(dim - 1, total - first) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// A random element of equivariant degree `k`: one random cochain for
/// every monomial `x^e` with `2|e| + deg = k`.
pub fn random_equivariant(
    a: &AlgebroidModel,
    g_dim: usize,
    k: usize,
    pool: &FunctionPool,
    rng: &mut impl Rng,
) -> EquivTwistedCochain {
    let mut out = EquivTwistedCochain::zero(g_dim);
    for j in 0..=(k / 2) {
        let deg = k - 2 * j;
        if deg > a.rank {
            continue;
        }
        for e in exponent_vectors(g_dim, j as u32) {
            let charts = (0..a.manifold.n_charts())
                .map(|ch| pool.random_alt(ch, a.rank, deg, rng))
                .collect();
            out.push(
                e,
                TwistedCochain {
                    degree: deg,
                    charts,
                },
            );
        }
    }
    out
}

/// `p(δ̃_g γ) = (−1)^k (d + i_{ξ*}) p(γ)` on random equivariant cochains of
/// each equivariant degree up to `r + 2`.
pub fn equivariant_suite(
    ex: &Example,
    cfg: &SuiteConfig,
    rng: &mut impl Rng,
) -> Result<ResidualReport> {
    let a = &ex.algebroid;
    let mut report = ResidualReport::default();
    let Some(action) = &ex.action else {
        return Ok(report);
    };
    let pool = FunctionPool::polynomial(&a.manifold);
    let per_degree = (cfg.cochains / 10).max(1);
    let mut worst: f64 = 0.0;
    for k in 0..=a.rank + 2 {
        for _ in 0..per_degree {
            let g = random_equivariant(a, action.dim, k, &pool, rng);
            worst = worst.max(p_identity_check(
                a,
                action,
                &g,
                2,
                cfg.samples.min(20),
                rng,
            )?);
        }
    }
    report.push("equivariant_identity", worst, POINTWISE_TOL);
    // δ̃_g squares to a Lie derivative, so it only vanishes on invariant
    // elements; the declared cocycles are the invariant data we have
    for c in &ex.cocycles {
        let sq = membership_check_qg(a, action, &c.cochain, 2, cfg.samples.min(20), rng)?;
        report.push(format!("square_vanishes[{}]", c.name), sq, POINTWISE_TOL);
        let closed = closedness_at(a, action, &c.cochain, &ex.defaults.xi, cfg.closed_samples)?;
        report.push(format!("closed[{}]", c.name), closed, CLOSED_TOL);
    }
    Ok(report)
}

fn mats_exprs(mats: &[MatForm]) -> Vec<Vec<Expr>> {
    mats.iter().map(MatForm::exprs).collect()
}

/// The invariant polynomials exercised by the connection suite: `ς_j` for
/// each `j` with `2j ≤ r` plus `ς_1²` when it fits.
fn test_polys(n: usize, r: usize) -> Vec<InvariantPoly> {
    let mut out: Vec<InvariantPoly> = (1..=n.min(r / 2)).map(InvariantPoly::sigma).collect();
    if r >= 4 {
        out.push(InvariantPoly {
            terms: vec![(1.0, vec![2])],
        });
    }
    out
}

/// Bianchi identities, invariance, Chern–Weil closedness, transgression
/// between the connection and a rescaled copy, and agreement with the
/// ordinary Chern–Weil forms for induced connections.
pub fn connection_suite(
    ex: &Example,
    cfg: &SuiteConfig,
    rng: &mut impl Rng,
) -> Result<ResidualReport> {
    let a = &ex.algebroid;
    let mut report = ResidualReport::default();
    let Some(conn) = &ex.connection else {
        return Ok(report);
    };
    let n_samples = cfg.samples.min(24);
    report.push(
        "bianchi",
        sampled(
            a,
            &mats_exprs(&conn.bianchi_residual(a)),
            &[],
            n_samples,
            rng,
        )?,
        POINTWISE_TOL,
    );

    let polys = test_polys(conn.n, a.rank);
    let mut closed: f64 = 0.0;
    for q in &polys {
        let cw = conn.chern_weil(a, q)?;
        let d: Vec<Vec<Expr>> = cw
            .iter()
            .zip(&a.local)
            .map(|(c, l)| {
                c.parts()
                    .iter()
                    .filter(|p| p.degree() < a.rank && !p.is_zero())
                    .flat_map(|p| l.delta(p).coeffs().to_vec())
                    .collect()
            })
            .collect();
        closed = closed.max(sampled(a, &d, &[], n_samples, rng)?);
    }
    report.push("chern_weil_closed", closed, POINTWISE_TOL);

    if let Some(zeta) = &conn.ordinary {
        let mut worst: f64 = 0.0;
        for q in polys
            .iter()
            .filter(|q| q.degree().is_some_and(|d| 2 * d <= a.manifold.dim))
        {
            let lam = conn.chern_weil(a, q)?;
            let forms = chern_weil_forms(zeta, q);
            let diff: Vec<Vec<Expr>> = lam
                .iter()
                .zip(&forms)
                .zip(&a.local)
                .map(|((x, f), l)| {
                    let mut pulled = Mixed::zero(a.rank);
                    for p in f.parts() {
                        if !p.is_zero() && p.degree() <= a.rank {
                            pulled.add_alt(&l.anchor_pullback(p));
                        }
                    }
                    mixed_exprs(&[x.sub(&pulled)]).remove(0)
                })
                .collect();
            worst = worst.max(sampled(a, &diff, &[], n_samples, rng)?);
        }
        report.push("chern_weil_diagram", worst, POINTWISE_TOL);
    }

    let Some(action) = &ex.action else {
        return Ok(report);
    };
    if conn.lift.is_none() {
        return Ok(report);
    }
    let inv = conn.invariance_residual(a, action)?;
    report.push(
        "invariance",
        sampled(a, &inv, &[], n_samples, rng)?,
        POINTWISE_TOL,
    );

    let xi = xi_symbols(action.dim);
    let xi_vals: Vec<f64> = ex.defaults.xi.clone();
    let eb = conn.equivariant_bianchi_residual(a, action, &xi)?;
    report.push(
        "equivariant_bianchi",
        sampled(a, &mats_exprs(&eb), &xi_vals, n_samples, rng)?,
        POINTWISE_TOL,
    );

    // a second invariant connection: the lift is constant in every chart
    // of the built-ins, so any constant multiple of ω is invariant too
    let scaled = AConnectionModel {
        n: conn.n,
        omega: conn
            .omega
            .iter()
            .map(|w| w.scale(&Expr::constant(1.5)))
            .collect(),
        lift: conn.lift.clone(),
        ordinary: conn
            .ordinary
            .as_ref()
            .map(|z| z.iter().map(|w| w.scale(&Expr::constant(1.5))).collect()),
    };
    let inv2 = scaled.invariance_residual(a, action)?;
    report.push(
        "invariance_second",
        sampled(a, &inv2, &[], n_samples, rng)?,
        POINTWISE_TOL,
    );
    let mut worst: f64 = 0.0;
    for q in &polys {
        let t = transgression(a, conn, &scaled, q, action, &xi, cfg.t_order)?;
        let q0 = conn.chern_weil_equivariant(a, action, q, &xi)?;
        let q1 = scaled.chern_weil_equivariant(a, action, q, &xi)?;
        let dq = delta_g_evaluated(a, action, &t, &xi, false);
        let res: Vec<Mixed> = q1
            .iter()
            .zip(&q0)
            .zip(&dq)
            .map(|((x, y), z)| x.sub(y).sub(z))
            .collect();
        worst = worst.max(sampled(a, &mixed_exprs(&res), &xi_vals, n_samples, rng)?);
    }
    report.push("transgression", worst, TRANSGRESSION_TOL);
    Ok(report)
}

/// `ς_i(R^g)_0(x) = c_i(L)` at every validated fixed point, for bundles of
/// the rank of the base.
pub fn fixed_point_suite(ex: &Example) -> Result<ResidualReport> {
    let a = &ex.algebroid;
    let mut report = ResidualReport::default();
    let (Some(conn), Some(action)) = (&ex.connection, &ex.action) else {
        return Ok(report);
    };
    if conn.n != a.manifold.dim || ex.fixed_points.is_empty() || conn.lift.is_none() {
        return Ok(report);
    }
    let xi = &ex.defaults.xi;
    let fixed = validate_fixed_points(a, action, xi, &ex.fixed_points)?;
    let mut worst: f64 = 0.0;
    for fp in &fixed {
        worst = worst.max(bott::fixed_point_identity(
            a,
            conn,
            action,
            xi,
            fp.chart,
            &fp.coords,
            &fp.linearization,
        )?);
    }
    report.push("fixed_point_identity", worst, FIXED_POINT_TOL);
    Ok(report)
}

/// Action consistency: `b` is a Lie map and matches the declared fields.
pub fn action_suite(ex: &Example, cfg: &SuiteConfig, rng: &mut impl Rng) -> Result<ResidualReport> {
    match &ex.action {
        Some(action) => action.check(&ex.algebroid, cfg.samples, rng),
        None => Ok(ResidualReport::default()),
    }
}
