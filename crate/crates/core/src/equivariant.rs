//! Infinitesimal actions on an algebroid and the equivariant complexes.
//!
//! Equivariant cochains are polynomials in the coordinates `x_a` of
//! `ξ = Σ x_a ε_a`, with cochain coefficients. Evaluation binds `ξ` either
//! numerically or to the parameter symbols `Expr::param(a)`, which keeps
//! everything symbolic in `ξ` until sampling.

use rand::Rng;

use crate::algebroid::{ACochain, AlgebroidModel};
use crate::alt::{Alt, Mixed};
use crate::expr::Expr;
use crate::geometry::{d_local, ManifoldModel};
use crate::sampling::{max_abs_sampled, mixed_exprs, ResidualReport};
use crate::twisted::{delta_twisted_local, p_local, TwistedCochain};
use crate::{Error, Result};

/// A Lie algebra `g` acting on `A` through `b: g → Γ(A)`.
#[derive(Clone, Debug)]
pub struct LieAlgebraAction {
    pub dim: usize,
    /// `structure[c]` holds `f^c_{ab}` as a 2-form over `g`.
    pub structure: Vec<Alt>,
    /// `b[chart][a]` are the frame components of `b(ε_a)`.
    pub b: Vec<Vec<Vec<Expr>>>,
    /// Declared fundamental fields `ε_a^*` per chart, if any.
    pub fundamental: Option<Vec<Vec<Vec<Expr>>>>,
}

/// The symbolic generic element `ξ = Σ x_a ε_a`.
pub fn xi_symbols(dim: usize) -> Vec<Expr> {
    (0..dim).map(Expr::param).collect()
}

pub fn xi_constants(xi: &[f64]) -> Vec<Expr> {
    xi.iter().map(|&v| Expr::constant(v)).collect()
}

impl LieAlgebraAction {
    pub fn new(
        a: &AlgebroidModel,
        structure: Vec<Alt>,
        b: Vec<Vec<Vec<Expr>>>,
        fundamental: Option<Vec<Vec<Vec<Expr>>>>,
    ) -> Result<Self> {
        let dim = structure.len();
        if structure.iter().any(|s| s.dim() != dim || s.degree() != 2) {
            return Err(Error::Invalid(
                "action structure constants have the wrong shape".into(),
            ));
        }
        if b.len() != a.manifold.n_charts()
            || b.iter()
                .any(|c| c.len() != dim || c.iter().any(|v| v.len() != a.rank))
        {
            return Err(Error::Invalid(
                "b needs one section per generator on every chart".into(),
            ));
        }
        if let Some(f) = &fundamental {
            if f.len() != a.manifold.n_charts()
                || f.iter()
                    .any(|c| c.len() != dim || c.iter().any(|v| v.len() != a.manifold.dim))
            {
                return Err(Error::Invalid(
                    "declared fundamental fields have the wrong shape".into(),
                ));
            }
        }
        Ok(LieAlgebraAction {
            dim,
            structure,
            b,
            fundamental,
        })
    }

    /// The trivial action of an abelian algebra: `b = 0`.
    pub fn trivial(a: &AlgebroidModel, dim: usize) -> Self {
        LieAlgebraAction {
            dim,
            structure: vec![Alt::zero(dim, 2); dim],
            b: vec![vec![vec![Expr::zero(); a.rank]; dim]; a.manifold.n_charts()],
            fundamental: None,
        }
    }

    /// Frame components of `b(ξ)` on a chart.
    pub fn b_of(&self, chart: usize, xi: &[Expr]) -> Vec<Expr> {
        let r = self.b[chart].first().map_or(0, Vec::len);
        (0..r)
            .map(|al| {
                Expr::sum(
                    self.b[chart]
                        .iter()
                        .zip(xi)
                        .filter(|(_, x)| !x.is_zero())
                        .map(|(ba, x)| x * &ba[al]),
                )
            })
            .collect()
    }

    /// Coordinate components of `ξ*` on a chart. Declared fields take
    /// precedence over `a(b(ξ))`; `check` verifies the two agree, and the
    /// declared form stays finite where `b` itself is singular.
    pub fn fundamental_of(&self, a: &AlgebroidModel, chart: usize, xi: &[Expr]) -> Vec<Expr> {
        match &self.fundamental {
            Some(f) => (0..a.manifold.dim)
                .map(|i| {
                    Expr::sum(
                        f[chart]
                            .iter()
                            .zip(xi)
                            .filter(|(_, x)| !x.is_zero())
                            .map(|(fa, x)| x * &fa[i]),
                    )
                })
                .collect(),
            None => a.local[chart].anchor_of(&self.b_of(chart, xi)),
        }
    }

    /// Residuals of `{b(ε_a), b(ε_b)} = b([ε_a, ε_b])` and of
    /// `a∘b = ρ̃` against the declared fundamental fields.
    pub fn check<R: Rng>(
        &self,
        a: &AlgebroidModel,
        samples: usize,
        rng: &mut R,
    ) -> Result<ResidualReport> {
        let d = self.dim;
        let mut lie = Vec::new();
        let mut diagram = Vec::new();
        for (ch, l) in a.local.iter().enumerate() {
            let mut here = Vec::new();
            for x in 0..d {
                for y in x + 1..d {
                    let br = l.bracket(&self.b[ch][x], &self.b[ch][y]);
                    let coefs: Vec<Expr> = (0..d).map(|c| self.structure[c].get(&[x, y])).collect();
                    let rhs = self.b_of(ch, &coefs);
                    here.extend(br.iter().zip(&rhs).map(|(p, q)| p - q));
                }
            }
            lie.push(here);
            let mut dg = Vec::new();
            if let Some(f) = &self.fundamental {
                for x in 0..d {
                    let field = l.anchor_of(&self.b[ch][x]);
                    dg.extend(field.iter().zip(&f[ch][x]).map(|(p, q)| p - q));
                }
            }
            diagram.push(dg);
        }
        let mut report = ResidualReport::default();
        report.push(
            "b_lie_map",
            max_abs_sampled(&a.manifold, &lie, &[], samples, rng)?,
            1e-9,
        );
        report.push(
            "anchor_b_diagram",
            max_abs_sampled(&a.manifold, &diagram, &[], samples, rng)?,
            1e-9,
        );
        Ok(report)
    }
}

/// Access to the per-chart coefficient arrays shared by plain and twisted
/// cochains.
pub trait CochainData: Clone {
    fn degree(&self) -> usize;
    fn charts(&self) -> &[Alt];
    fn build(degree: usize, charts: Vec<Alt>) -> Self;
}

impl CochainData for ACochain {
    fn degree(&self) -> usize {
        self.degree
    }
    fn charts(&self) -> &[Alt] {
        &self.charts
    }
    fn build(degree: usize, charts: Vec<Alt>) -> Self {
        ACochain { degree, charts }
    }
}

impl CochainData for TwistedCochain {
    fn degree(&self) -> usize {
        self.degree
    }
    fn charts(&self) -> &[Alt] {
        &self.charts
    }
    fn build(degree: usize, charts: Vec<Alt>) -> Self {
        TwistedCochain { degree, charts }
    }
}

/// One term `P ⊗ β` with `P = Π x_a^{e_a}`.
#[derive(Clone, Debug)]
pub struct PolyTerm<C> {
    pub exponents: Vec<u32>,
    pub cochain: C,
}

/// `Sym(g*) ⊗ C` with `C` plain or twisted cochains.
#[derive(Clone, Debug)]
pub struct Equivariant<C> {
    pub g_dim: usize,
    pub terms: Vec<PolyTerm<C>>,
}

pub type EquivCochain = Equivariant<ACochain>;
pub type EquivTwistedCochain = Equivariant<TwistedCochain>;

pub fn monomial_value(exponents: &[u32], xi: &[Expr]) -> Expr {
    let mut v = Expr::one();
    for (e, x) in exponents.iter().zip(xi) {
        if *e > 0 {
            v = v * x.powi(*e as i32);
        }
    }
    v
}

impl<C: CochainData> Equivariant<C> {
    pub fn zero(g_dim: usize) -> Self {
        Equivariant {
            g_dim,
            terms: Vec::new(),
        }
    }

    pub fn constant(g_dim: usize, c: C) -> Self {
        Equivariant {
            g_dim,
            terms: vec![PolyTerm {
                exponents: vec![0; g_dim],
                cochain: c,
            }],
        }
    }

    pub fn push(&mut self, exponents: Vec<u32>, cochain: C) {
        assert_eq!(exponents.len(), self.g_dim);
        self.terms.push(PolyTerm { exponents, cochain });
    }

    /// `2·deg P + deg β` when all terms agree.
    pub fn equivariant_degree(&self) -> Option<usize> {
        let mut it = self
            .terms
            .iter()
            .map(|t| 2 * t.exponents.iter().sum::<u32>() as usize + t.cochain.degree());
        let first = it.next()?;
        it.all(|d| d == first).then_some(first)
    }

    /// `γ(ξ)` as an inhomogeneous element on each chart.
    pub fn evaluate(&self, rank: usize, n_charts: usize, xi: &[Expr]) -> Vec<Mixed> {
        let mut out = vec![Mixed::zero(rank); n_charts];
        for t in &self.terms {
            let p = monomial_value(&t.exponents, xi);
            if p.is_zero() {
                continue;
            }
            for (o, c) in out.iter_mut().zip(t.cochain.charts()) {
                o.add_alt(&c.scale(&p));
            }
        }
        out
    }

    /// Polynomial form of `δ_g` for a given coefficient differential:
    /// `P⊗β ↦ P⊗Δβ − Σ_a (x_a P)⊗i_{b(ε_a)}β`.
    fn delta_poly(
        &self,
        action: &LieAlgebraAction,
        diff: impl Fn(usize, &Alt) -> Alt,
        rank: usize,
    ) -> Self {
        let mut out = Equivariant::zero(self.g_dim);
        for t in &self.terms {
            let k = t.cochain.degree();
            if k < rank {
                let charts = t
                    .cochain
                    .charts()
                    .iter()
                    .enumerate()
                    .map(|(ch, a)| diff(ch, a))
                    .collect();
                out.push(t.exponents.clone(), C::build(k + 1, charts));
            }
            if k > 0 {
                for a in 0..self.g_dim {
                    let charts = t
                        .cochain
                        .charts()
                        .iter()
                        .enumerate()
                        .map(|(ch, c)| c.interior(&action.b[ch][a]).neg())
                        .collect();
                    let mut e = t.exponents.clone();
                    e[a] += 1;
                    out.push(e, C::build(k - 1, charts));
                }
            }
        }
        out
    }
}

impl EquivCochain {
    pub fn delta_g(&self, a: &AlgebroidModel, action: &LieAlgebraAction) -> EquivCochain {
        self.delta_poly(action, |ch, x| a.local[ch].delta(x), a.rank)
    }
}

impl EquivTwistedCochain {
    pub fn delta_g_twisted(
        &self,
        a: &AlgebroidModel,
        action: &LieAlgebraAction,
    ) -> EquivTwistedCochain {
        self.delta_poly(action, |ch, x| delta_twisted_local(&a.local[ch], x), a.rank)
    }
}

/// `δ_g` at a fixed `ξ` on an evaluated element: `δ − i_{b(ξ)}`, with `δ̃`
/// in place of `δ` when `twisted` is set.
pub fn delta_g_evaluated(
    a: &AlgebroidModel,
    action: &LieAlgebraAction,
    values: &[Mixed],
    xi: &[Expr],
    twisted: bool,
) -> Vec<Mixed> {
    values
        .iter()
        .enumerate()
        .map(|(ch, v)| {
            let l = &a.local[ch];
            let b = action.b_of(ch, xi);
            let mut out = Mixed::zero(a.rank);
            for part in v.parts() {
                if part.is_zero() {
                    continue;
                }
                let k = part.degree();
                if k < a.rank {
                    out.add_alt(&if twisted {
                        delta_twisted_local(l, part)
                    } else {
                        l.delta(part)
                    });
                }
                if k > 0 {
                    out.add_alt(&part.interior(&b).neg());
                }
            }
            out
        })
        .collect()
}

/// `d − i_X` on inhomogeneous forms, chart by chart.
pub fn equivariant_derham_d(forms: &[Mixed], field: &[Vec<Expr>]) -> Vec<Mixed> {
    forms
        .iter()
        .zip(field)
        .map(|(w, x)| {
            let mut out = Mixed::zero(w.dim());
            for part in w.parts() {
                if part.is_zero() {
                    continue;
                }
                if part.degree() < w.dim() {
                    out.add_alt(&d_local(part));
                }
                if part.degree() > 0 {
                    out.add_alt(&part.interior(x).neg());
                }
            }
            out
        })
        .collect()
}

/// `p` applied part by part; parts below degree `r − m` have no image.
pub fn p_mixed(a: &AlgebroidModel, values: &[Mixed]) -> Vec<Mixed> {
    let shift = a.rank as i64 - a.manifold.dim as i64;
    values
        .iter()
        .enumerate()
        .map(|(ch, v)| {
            let mut out = Mixed::zero(a.manifold.dim);
            for part in v.parts() {
                if part.degree() as i64 >= shift && !part.is_zero() {
                    out.add_alt(&p_local(&a.local[ch], part));
                }
            }
            out
        })
        .collect()
}

pub fn neg_fields(fields: &[Vec<Expr>]) -> Vec<Vec<Expr>> {
    fields
        .iter()
        .map(|f| f.iter().map(|e| -e).collect())
        .collect()
}

/// Random values of `ξ` in `[−1, 1]^d`, used as parameter bindings.
pub fn random_xi<R: Rng>(dim: usize, rng: &mut R) -> Vec<f64> {
    (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

/// Largest value of a family of `ξ`-dependent expressions over sampled
/// points and sampled `ξ`.
pub fn max_over_xi<R: Rng>(
    m: &ManifoldModel,
    exprs: &[Vec<Expr>],
    g_dim: usize,
    xi_samples: usize,
    samples: usize,
    rng: &mut R,
) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for _ in 0..xi_samples.max(1) {
        let xi = random_xi(g_dim, rng);
        worst = worst.max(max_abs_sampled(m, exprs, &xi, samples, rng)?);
    }
    Ok(worst)
}

/// `max |δ_g² γ|` over sampled `ξ` and points.
pub fn membership_check_ag<R: Rng>(
    a: &AlgebroidModel,
    action: &LieAlgebraAction,
    gamma: &EquivCochain,
    xi_samples: usize,
    samples: usize,
    rng: &mut R,
) -> Result<f64> {
    let sq = gamma.delta_g(a, action).delta_g(a, action);
    let vals = sq.evaluate(a.rank, a.manifold.n_charts(), &xi_symbols(action.dim));
    max_over_xi(
        &a.manifold,
        &mixed_exprs(&vals),
        action.dim,
        xi_samples,
        samples,
        rng,
    )
}

/// `max |δ̃_g² Γ|`, the membership residual for `𝔔_G`.
pub fn membership_check_qg<R: Rng>(
    a: &AlgebroidModel,
    action: &LieAlgebraAction,
    gamma: &EquivTwistedCochain,
    xi_samples: usize,
    samples: usize,
    rng: &mut R,
) -> Result<f64> {
    let sq = gamma.delta_g_twisted(a, action).delta_g_twisted(a, action);
    let vals = sq.evaluate(a.rank, a.manifold.n_charts(), &xi_symbols(action.dim));
    max_over_xi(
        &a.manifold,
        &mixed_exprs(&vals),
        action.dim,
        xi_samples,
        samples,
        rng,
    )
}

/// Residual of `p(δ̃_g γ) = (−1)^k d'_g p(γ)` at sampled `ξ` and points,
/// where `d'_g = d + i_{ξ*}` is the de Rham partner of `δ̃_g` under `p`
/// (see the crate's conventions table). `γ` must be homogeneous of
/// equivariant degree `k`.
pub fn p_identity_check<R: Rng>(
    a: &AlgebroidModel,
    action: &LieAlgebraAction,
    gamma: &EquivTwistedCochain,
    xi_samples: usize,
    samples: usize,
    rng: &mut R,
) -> Result<f64> {
    let Some(k) = gamma.equivariant_degree() else {
        if gamma.terms.is_empty() {
            return Ok(0.0);
        }
        return Err(Error::Degree(
            "identity check needs a homogeneous cochain".into(),
        ));
    };
    let xi = xi_symbols(action.dim);
    let n = a.manifold.n_charts();
    let vals = gamma.evaluate(a.rank, n, &xi);
    let lhs = p_mixed(a, &delta_g_evaluated(a, action, &vals, &xi, true));
    let field: Vec<Vec<Expr>> = (0..n).map(|ch| action.fundamental_of(a, ch, &xi)).collect();
    let rhs = equivariant_derham_d(&p_mixed(a, &vals), &neg_fields(&field));
    let res: Vec<Mixed> = lhs
        .iter()
        .zip(&rhs)
        .map(|(l, r)| if k % 2 == 0 { l.sub(r) } else { l.add(r) })
        .collect();
    max_over_xi(
        &a.manifold,
        &mixed_exprs(&res),
        action.dim,
        xi_samples,
        samples,
        rng,
    )
}
