//! A-connections given by local connection 1-sections, their (equivariant)
//! curvature, Chern–Weil cochains and transgression.

use serde::{Deserialize, Serialize};

use crate::algebroid::{AlgebroidModel, LocalAlgebroid};
use crate::alt::{Alt, Mixed};
use crate::equivariant::LieAlgebraAction;
use crate::expr::Expr;
use crate::geometry::{d_local, gauss_legendre, ManifoldModel};
use crate::{Error, Result};

/// An `n×n` matrix whose entries are inhomogeneous elements of an exterior
/// algebra on `dim` generators (frame coefficients or coordinate forms).
#[derive(Clone, Debug, PartialEq)]
pub struct MatForm {
    pub n: usize,
    pub dim: usize,
    entries: Vec<Mixed>,
}

impl MatForm {
    pub fn zero(n: usize, dim: usize) -> Self {
        MatForm {
            n,
            dim,
            entries: vec![Mixed::zero(dim); n * n],
        }
    }

    pub fn from_fn(n: usize, dim: usize, mut f: impl FnMut(usize, usize) -> Mixed) -> Self {
        let mut entries = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                entries.push(f(i, j));
            }
        }
        MatForm { n, dim, entries }
    }

    /// A matrix of 1-forms from one function matrix per generator:
    /// `Σ_α M_α e^α`.
    pub fn one_form(dim: usize, mats: &[Vec<Vec<Expr>>]) -> Self {
        let n = mats.first().map_or(0, Vec::len);
        MatForm::from_fn(n, dim, |i, j| {
            let coeffs = mats.iter().map(|m| m[i][j].clone()).collect();
            Mixed::from_alt(Alt::from_coeffs(dim, 1, coeffs))
        })
    }

    /// A matrix of functions.
    pub fn functions(dim: usize, m: &[Vec<Expr>]) -> Self {
        MatForm::from_fn(m.len(), dim, |i, j| Mixed::scalar(dim, m[i][j].clone()))
    }

    pub fn get(&self, i: usize, j: usize) -> &Mixed {
        &self.entries[i * self.n + j]
    }

    pub fn entries(&self) -> &[Mixed] {
        &self.entries
    }

    pub fn map(&self, f: impl Fn(&Mixed) -> Mixed) -> MatForm {
        MatForm {
            n: self.n,
            dim: self.dim,
            entries: self.entries.iter().map(f).collect(),
        }
    }

    /// Applies `f` to every nonzero homogeneous part of every entry.
    pub fn map_parts(&self, f: impl Fn(&Alt) -> Alt) -> MatForm {
        self.map_parts_into(self.dim, f)
    }

    /// Like [`MatForm::map_parts`] with results in an algebra on `dim`
    /// generators.
    pub fn map_parts_into(&self, dim: usize, f: impl Fn(&Alt) -> Alt) -> MatForm {
        MatForm {
            n: self.n,
            dim,
            entries: self
                .entries
                .iter()
                .map(|m| {
                    let mut out = Mixed::zero(dim);
                    for p in m.parts() {
                        if !p.is_zero() {
                            let q = f(p);
                            if q.degree() <= dim {
                                out.add_alt(&q);
                            }
                        }
                    }
                    out
                })
                .collect(),
        }
    }

    pub fn add(&self, other: &MatForm) -> MatForm {
        MatForm {
            n: self.n,
            dim: self.dim,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a.add(b))
                .collect(),
        }
    }

    pub fn sub(&self, other: &MatForm) -> MatForm {
        MatForm {
            n: self.n,
            dim: self.dim,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a.sub(b))
                .collect(),
        }
    }

    pub fn scale(&self, c: &Expr) -> MatForm {
        self.map(|m| m.scale(c))
    }

    /// Matrix product with wedge multiplication of entries.
    pub fn mul(&self, other: &MatForm) -> MatForm {
        let n = self.n;
        MatForm::from_fn(n, self.dim, |i, j| {
            let mut acc = Mixed::zero(self.dim);
            for k in 0..n {
                let (a, b) = (self.get(i, k), other.get(k, j));
                if !a.is_zero() && !b.is_zero() {
                    acc = acc.add(&a.wedge(b));
                }
            }
            acc
        })
    }

    /// Negates the odd-degree parts.
    pub fn parity(&self) -> MatForm {
        self.map_parts(|p| {
            if p.degree() % 2 == 1 {
                p.neg()
            } else {
                p.clone()
            }
        })
    }

    /// Graded commutator `[ω, χ] = ω∧χ − (−1)^{|χ|} χ∧ω` for a matrix
    /// `ω` of 1-forms.
    pub fn bracket_odd(omega: &MatForm, chi: &MatForm) -> MatForm {
        omega.mul(chi).sub(&chi.parity().mul(omega))
    }

    pub fn trace(&self) -> Mixed {
        let mut acc = Mixed::zero(self.dim);
        for i in 0..self.n {
            acc = acc.add(self.get(i, i));
        }
        acc
    }

    pub fn part(&self, k: usize) -> MatForm {
        self.map(|m| Mixed::from_alt(m.part(k).clone()))
    }

    pub fn interior(&self, v: &[Expr]) -> MatForm {
        self.map_parts(|p| {
            if p.degree() == 0 {
                Alt::zero(p.dim(), 0)
            } else {
                p.interior(v)
            }
        })
    }

    pub fn exprs(&self) -> Vec<Expr> {
        self.entries
            .iter()
            .flat_map(|m| {
                m.parts()
                    .iter()
                    .flat_map(|p| p.coeffs().to_vec())
                    .collect::<Vec<_>>()
            })
            .collect()
    }
}

/// Entrywise `δ` of the algebroid.
pub fn delta_mat(l: &LocalAlgebroid, x: &MatForm) -> MatForm {
    let r = l.rank();
    x.map_parts(|p| {
        if p.degree() < r {
            l.delta(p)
        } else {
            Alt::zero(r, p.degree() + 1)
        }
    })
}

/// Entrywise de Rham `d`.
pub fn d_mat(x: &MatForm) -> MatForm {
    let m = x.dim;
    x.map_parts(|p| {
        if p.degree() < m {
            d_local(p)
        } else {
            Alt::zero(m, p.degree() + 1)
        }
    })
}

/// `A`-connection on a rank-`n` bundle: per chart the matrix of 1-sections
/// `ω = Σ_α ω_α e^α`, so that `∇_{e_α} s = a(e_α)(s) + ω_α s`.
#[derive(Clone, Debug)]
pub struct AConnectionModel {
    pub n: usize,
    pub omega: Vec<MatForm>,
    /// Generator of the action on the fibres: `lift[chart][a]` is the
    /// matrix `Λ(ε_a)` such that `ε_a` acts on sections by `ε_a*(s) + Λ(ε_a)s`.
    pub lift: Option<Vec<Vec<MatForm>>>,
    /// The ordinary connection this one was induced from, if any.
    pub ordinary: Option<Vec<MatForm>>,
}

impl AConnectionModel {
    pub fn new(a: &AlgebroidModel, omega: Vec<MatForm>) -> Result<Self> {
        let n = omega.first().map_or(0, |w| w.n);
        if omega.len() != a.manifold.n_charts() || omega.iter().any(|w| w.n != n || w.dim != a.rank)
        {
            return Err(Error::Invalid(
                "connection needs one n×n matrix of 1-sections per chart".into(),
            ));
        }
        Ok(AConnectionModel {
            n,
            omega,
            lift: None,
            ordinary: None,
        })
    }

    pub fn with_lift(mut self, lift: Vec<Vec<MatForm>>) -> Self {
        self.lift = Some(lift);
        self
    }

    /// `ω_α = Σ_i a^i_α ζ_i` from an ordinary connection `ζ` (matrices of
    /// coordinate 1-forms per chart).
    pub fn from_ordinary_connection(a: &AlgebroidModel, zeta: &[MatForm]) -> Result<Self> {
        let omega = a
            .local
            .iter()
            .zip(zeta)
            .map(|(l, z)| z.map_parts_into(a.rank, |p| l.anchor_pullback(p)))
            .collect();
        let mut c = Self::new(a, omega)?;
        c.ordinary = Some(zeta.to_vec());
        Ok(c)
    }

    /// `∇_α s = a(α)(s) + ω(α)s` on one chart.
    pub fn covariant_derivative(
        &self,
        a: &AlgebroidModel,
        chart: usize,
        alpha: &[Expr],
        s: &[Expr],
    ) -> Vec<Expr> {
        let l = &a.local[chart];
        let w = self.omega[chart].interior(alpha);
        (0..self.n)
            .map(|p| {
                let mut terms = vec![l.act_section(alpha, &s[p])];
                for (q, sq) in s.iter().enumerate() {
                    terms.push(&w.get(p, q).part(0).coeffs()[0] * sq);
                }
                Expr::sum(terms)
            })
            .collect()
    }

    /// `R = δω + ω∧ω` per chart.
    pub fn curvature(&self, a: &AlgebroidModel) -> Vec<MatForm> {
        a.local
            .iter()
            .zip(&self.omega)
            .map(|(l, w)| delta_mat(l, w).add(&w.mul(w)))
            .collect()
    }

    /// Local form `D_A χ = δχ + [ω, χ]`.
    pub fn exterior_a_derivative(&self, a: &AlgebroidModel, chi: &[MatForm]) -> Vec<MatForm> {
        a.local
            .iter()
            .zip(&self.omega)
            .zip(chi)
            .map(|((l, w), x)| delta_mat(l, x).add(&MatForm::bracket_odd(w, x)))
            .collect()
    }

    /// `D_A χ` for a homogeneous degree-`p` matrix cochain from the defining
    /// two-sum formula with covariant first terms:
    /// `Σ_i (−1)^i (a(α_i)χ(…α̂_i…) + [ω(α_i), χ(…α̂_i…)]) +
    ///  Σ_{i<j} (−1)^{i+j} χ({α_i,α_j}, …)`.
    pub fn exterior_a_derivative_literal(
        &self,
        l: &LocalAlgebroid,
        chart: usize,
        chi: &MatForm,
        p: usize,
    ) -> MatForm {
        let r = l.rank();
        let n = self.n;
        let w = &self.omega[chart];
        let mut out = MatForm::zero(n, r);
        let mut entries: Vec<Alt> = vec![Alt::zero(r, p + 1); n * n];
        for idx in crate::alt::subsets(r, p + 1) {
            for row in 0..n {
                for col in 0..n {
                    let mut terms = Vec::new();
                    for i in 0..=p {
                        let rest: Vec<usize> = idx
                            .iter()
                            .enumerate()
                            .filter(|(k, _)| *k != i)
                            .map(|(_, v)| *v)
                            .collect();
                        let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
                        let mut t = vec![l.act(idx[i], &chi.get(row, col).part(p).get(&rest))];
                        for k in 0..n {
                            let wa = w.get(row, k).part(1).get(&[idx[i]]);
                            let wb = w.get(k, col).part(1).get(&[idx[i]]);
                            t.push(wa * chi.get(k, col).part(p).get(&rest));
                            t.push(-(chi.get(row, k).part(p).get(&rest) * wb));
                        }
                        terms.push(Expr::sum(t).scale(sign));
                    }
                    for i in 0..=p {
                        for j in i + 1..=p {
                            let rest: Vec<usize> = idx
                                .iter()
                                .enumerate()
                                .filter(|(k, _)| *k != i && *k != j)
                                .map(|(_, v)| *v)
                                .collect();
                            let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
                            for g in 0..r {
                                let c = l.c(g, idx[i], idx[j]);
                                if c.is_zero() {
                                    continue;
                                }
                                let mut full = vec![g];
                                full.extend_from_slice(&rest);
                                terms.push((c * chi.get(row, col).part(p).get(&full)).scale(sign));
                            }
                        }
                    }
                    entries[row * n + col].set(&idx, Expr::sum(terms));
                }
            }
        }
        for (slot, e) in entries.into_iter().enumerate() {
            out.entries[slot] = Mixed::from_alt(e);
        }
        out
    }

    /// `δR + [ω, R]` per chart.
    pub fn bianchi_residual(&self, a: &AlgebroidModel) -> Vec<MatForm> {
        self.exterior_a_derivative(a, &self.curvature(a))
    }

    fn lift_of(&self, chart: usize, xi: &[Expr], r: usize) -> Result<MatForm> {
        let lift = self
            .lift
            .as_ref()
            .ok_or_else(|| Error::Precondition("connection has no action lift".into()))?;
        let mut acc = MatForm::zero(self.n, r);
        for (la, x) in lift[chart].iter().zip(xi) {
            if !x.is_zero() {
                acc = acc.add(&la.scale(x));
            }
        }
        Ok(acc)
    }

    /// `μ(ξ) = Λ(ξ) − ω(b(ξ))` per chart. For an induced connection
    /// `ω(b) = ζ(a(b)) = ζ(ξ*)`, which is used instead so that `μ` stays
    /// finite where `b` is singular but `ξ*` is not.
    pub fn moment(
        &self,
        a: &AlgebroidModel,
        action: &LieAlgebraAction,
        xi: &[Expr],
    ) -> Result<Vec<MatForm>> {
        (0..a.manifold.n_charts())
            .map(|ch| {
                let wb = match &self.ordinary {
                    Some(z) => {
                        let field = action.fundamental_of(a, ch, xi);
                        let mut w = z[ch].interior(&field);
                        w.dim = a.rank;
                        w.map(|m| Mixed::scalar(a.rank, m.part(0).coeffs()[0].clone()))
                    }
                    None => self.omega[ch].interior(&action.b_of(ch, xi)),
                };
                Ok(self.lift_of(ch, xi, a.rank)?.sub(&wb))
            })
            .collect()
    }

    /// `R^g(ξ) = R + μ(ξ)` per chart.
    pub fn equivariant_curvature(
        &self,
        a: &AlgebroidModel,
        action: &LieAlgebraAction,
        xi: &[Expr],
    ) -> Result<Vec<MatForm>> {
        let mu = self.moment(a, action, xi)?;
        Ok(self
            .curvature(a)
            .iter()
            .zip(&mu)
            .map(|(r, m)| r.add(m))
            .collect())
    }

    /// `δ_g R^g + [ω, R^g]` with `δ_g = δ − i_{b(ξ)}`.
    pub fn equivariant_bianchi_residual(
        &self,
        a: &AlgebroidModel,
        action: &LieAlgebraAction,
        xi: &[Expr],
    ) -> Result<Vec<MatForm>> {
        let rg = self.equivariant_curvature(a, action, xi)?;
        Ok(rg
            .iter()
            .enumerate()
            .map(|(ch, x)| {
                let b = action.b_of(ch, xi);
                delta_mat(&a.local[ch], x)
                    .sub(&x.interior(&b))
                    .add(&MatForm::bracket_odd(&self.omega[ch], x))
            })
            .collect())
    }

    /// Infinitesimal invariance of the connection under each generator:
    /// `ξ*(ω_α) − ω({b(ξ), e_α}) − a(e_α)(Λ) + [Λ, ω_α]` for all `α`.
    pub fn invariance_residual(
        &self,
        a: &AlgebroidModel,
        action: &LieAlgebraAction,
    ) -> Result<Vec<Vec<Expr>>> {
        let r = a.rank;
        let mut out = Vec::new();
        for (ch, l) in a.local.iter().enumerate() {
            let mut here = Vec::new();
            for g in 0..action.dim {
                let mut unit = vec![Expr::zero(); action.dim];
                unit[g] = Expr::one();
                let b = action.b_of(ch, &unit);
                let lam = self.lift_of(ch, &unit, r)?;
                let lam_at = |i: usize, j: usize| lam.get(i, j).part(0).coeffs()[0].clone();
                let w_at =
                    |al: usize, i: usize, j: usize| self.omega[ch].get(i, j).part(1).get(&[al]);
                for al in 0..r {
                    let br = l.bracket_with_basis(&b, al);
                    for i in 0..self.n {
                        for j in 0..self.n {
                            let mut t = vec![l.act_section(&b, &w_at(al, i, j))];
                            for (be, c) in br.iter().enumerate() {
                                if !c.is_zero() {
                                    t.push(-(c * w_at(be, i, j)));
                                }
                            }
                            t.push(-l.act(al, &lam_at(i, j)));
                            for k in 0..self.n {
                                t.push(lam_at(i, k) * w_at(al, k, j));
                                t.push(-(w_at(al, i, k) * lam_at(k, j)));
                            }
                            here.push(Expr::sum(t));
                        }
                    }
                }
            }
            out.push(here);
        }
        Ok(out)
    }
}

/// Invariant polynomial `Σ coef · Π ς_i^{e_i}` in the elementary invariants
/// `ς_1, …, ς_n` (`exponents[i-1]` is the power of `ς_i`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InvariantPoly {
    pub terms: Vec<(f64, Vec<u32>)>,
}

impl InvariantPoly {
    pub fn sigma(i: usize) -> Self {
        let mut e = vec![0; i];
        e[i - 1] = 1;
        InvariantPoly {
            terms: vec![(1.0, e)],
        }
    }

    pub fn one() -> Self {
        InvariantPoly {
            terms: vec![(1.0, Vec::new())],
        }
    }

    /// Polynomial degree in the matrix entries, if homogeneous.
    pub fn degree(&self) -> Option<usize> {
        let mut it = self.terms.iter().map(|(_, e)| {
            e.iter()
                .enumerate()
                .map(|(i, k)| (i + 1) * *k as usize)
                .sum::<usize>()
        });
        let first = it.next()?;
        it.all(|d| d == first).then_some(first)
    }

    fn max_index(&self) -> usize {
        self.terms.iter().map(|(_, e)| e.len()).max().unwrap_or(0)
    }

    /// Value and, when `dsig` is given, the first-order variation along the
    /// matching variations of the `ς_i`.
    fn eval_with(&self, sig: &[Mixed], dsig: Option<&[Mixed]>, dim: usize) -> (Mixed, Mixed) {
        let mut val = Mixed::zero(dim);
        let mut der = Mixed::zero(dim);
        for (c, e) in &self.terms {
            let c = Expr::constant(*c);
            let mut mono = Mixed::scalar(dim, Expr::one());
            for (i, &k) in e.iter().enumerate() {
                for _ in 0..k {
                    mono = mono.wedge(&sig[i + 1]);
                }
            }
            val = val.add(&mono.scale(&c));
            if let Some(ds) = dsig {
                for (i, &k) in e.iter().enumerate() {
                    if k == 0 {
                        continue;
                    }
                    // ∂/∂ς_i of the monomial times dς_i
                    let mut m = Mixed::scalar(dim, Expr::constant(k as f64));
                    for (j, &kj) in e.iter().enumerate() {
                        let pw = if j == i { kj - 1 } else { kj };
                        for _ in 0..pw {
                            m = m.wedge(&sig[j + 1]);
                        }
                    }
                    der = der.add(&m.wedge(&ds[i + 1]).scale(&c));
                }
            }
        }
        (val, der)
    }
}

/// `ς_0, …, ς_k` of a matrix with even entries through Newton's identities
/// on trace powers: `ς_j = (1/j) Σ_{i=1}^{j} (−1)^{i−1} ς_{j−i} tr(R^i)`.
/// With `a` given, also returns the first-order variations along `R + εa`,
/// using `d tr(R^i) = i tr(a R^{i−1})`.
pub fn elementary_invariants(
    r: &MatForm,
    k: usize,
    a: Option<&MatForm>,
) -> (Vec<Mixed>, Vec<Mixed>) {
    let dim = r.dim;
    let mut traces = Vec::with_capacity(k);
    let mut dtraces = Vec::with_capacity(k);
    let mut power = MatForm::from_fn(r.n, dim, |i, j| {
        Mixed::scalar(dim, if i == j { Expr::one() } else { Expr::zero() })
    });
    for i in 1..=k {
        if let Some(a) = a {
            dtraces.push(a.mul(&power).trace().scale(&Expr::constant(i as f64)));
        }
        power = power.mul(r);
        traces.push(power.trace());
    }
    let mut e = vec![Mixed::scalar(dim, Expr::one())];
    let mut de = vec![Mixed::zero(dim)];
    for j in 1..=k {
        let mut s = Mixed::zero(dim);
        let mut ds = Mixed::zero(dim);
        for i in 1..=j {
            let sign = Expr::constant(if i % 2 == 1 { 1.0 } else { -1.0 });
            s = s.add(&e[j - i].wedge(&traces[i - 1]).scale(&sign));
            if a.is_some() {
                ds = ds.add(&de[j - i].wedge(&traces[i - 1]).scale(&sign));
                ds = ds.add(&e[j - i].wedge(&dtraces[i - 1]).scale(&sign));
            }
        }
        let inv = Expr::constant(1.0 / j as f64);
        e.push(s.scale(&inv));
        de.push(ds.scale(&inv));
    }
    (e, de)
}

/// `Q(R)` per chart for matrices with even entries.
pub fn apply_invariant(q: &InvariantPoly, mats: &[MatForm]) -> Vec<Mixed> {
    let k = q.max_index();
    mats.iter()
        .map(|r| {
            let (sig, _) = elementary_invariants(r, k, None);
            q.eval_with(&sig, None, r.dim).0
        })
        .collect()
}

impl AConnectionModel {
    /// `λ_Q = Q(R)`, a closed cochain of degree `2ℓ`.
    pub fn chern_weil(&self, a: &AlgebroidModel, q: &InvariantPoly) -> Result<Vec<Mixed>> {
        if let Some(l) = q.degree() {
            if 2 * l > a.rank {
                return Err(Error::Degree(format!(
                    "Q of degree {l} gives a {}-cochain beyond rank {}",
                    2 * l,
                    a.rank
                )));
            }
        }
        Ok(apply_invariant(q, &self.curvature(a)))
    }

    /// `Q(R^g(ξ))` per chart.
    pub fn chern_weil_equivariant(
        &self,
        a: &AlgebroidModel,
        action: &LieAlgebraAction,
        q: &InvariantPoly,
        xi: &[Expr],
    ) -> Result<Vec<Mixed>> {
        Ok(apply_invariant(
            q,
            &self.equivariant_curvature(a, action, xi)?,
        ))
    }
}

/// Transgression `q(η, η')` along `ω_t = ω + t(ω' − ω)`:
/// `∫_0^1 (d/dε) Q(R^g_t + ε(ω' − ω)) dt`, with the `t`-integral done by
/// Gauss–Legendre quadrature of the given order. Both connections must
/// carry the same action lift.
pub fn transgression(
    a: &AlgebroidModel,
    conn0: &AConnectionModel,
    conn1: &AConnectionModel,
    q: &InvariantPoly,
    action: &LieAlgebraAction,
    xi: &[Expr],
    order: usize,
) -> Result<Vec<Mixed>> {
    let k = q.max_index();
    let n_ch = a.manifold.n_charts();
    let mut out = vec![Mixed::zero(a.rank); n_ch];
    let diff: Vec<MatForm> = conn1
        .omega
        .iter()
        .zip(&conn0.omega)
        .map(|(x, y)| x.sub(y))
        .collect();
    for (t, w) in gauss_legendre(order, 0.0, 1.0) {
        let omega_t: Vec<MatForm> = conn0
            .omega
            .iter()
            .zip(&diff)
            .map(|(w0, dw)| w0.add(&dw.scale(&Expr::constant(t))))
            .collect();
        let mut ct = AConnectionModel::new(a, omega_t)?;
        ct.lift = conn0.lift.clone();
        if let (Some(z0), Some(z1)) = (&conn0.ordinary, &conn1.ordinary) {
            ct.ordinary = Some(
                z0.iter()
                    .zip(z1)
                    .map(|(x, y)| x.add(&y.sub(x).scale(&Expr::constant(t))))
                    .collect(),
            );
        }
        let rg = ct.equivariant_curvature(a, action, xi)?;
        for ch in 0..n_ch {
            let (sig, dsig) = elementary_invariants(&rg[ch], k, Some(&diff[ch]));
            let (_, der) = q.eval_with(&sig, Some(&dsig), a.rank);
            out[ch] = out[ch].add(&der.scale(&Expr::constant(w)));
        }
    }
    Ok(out)
}

/// The ordinary Chern–Weil form `Q(F)` with `F = dζ + ζ∧ζ`, per chart.
pub fn chern_weil_forms(zeta: &[MatForm], q: &InvariantPoly) -> Vec<Mixed> {
    let curv: Vec<MatForm> = zeta.iter().map(|z| d_mat(z).add(&z.mul(z))).collect();
    apply_invariant(q, &curv)
}

/// Levi-Civita connection matrices `(ζ_k)^i_j = Γ^i_{kj}` in the
/// coordinate frame of the tangent bundle, one matrix of coordinate
/// 1-forms per chart.
pub fn levi_civita(m: &ManifoldModel, metric: &[Vec<Vec<Expr>>]) -> Vec<MatForm> {
    let dim = m.dim;
    metric
        .iter()
        .map(|g| {
            let inv = crate::alt::inverse_expr(g);
            let mut mats = vec![vec![vec![Expr::zero(); dim]; dim]; dim];
            for (k, mk) in mats.iter_mut().enumerate() {
                for (i, row) in mk.iter_mut().enumerate() {
                    for (j, entry) in row.iter_mut().enumerate() {
                        // Γ^i_{kj} = ½ g^{il}(∂_k g_{lj} + ∂_j g_{lk} − ∂_l g_{kj})
                        let terms = (0..dim).map(|l| {
                            &inv[i][l]
                                * (g[l][j].partial(k) + g[l][k].partial(j) - g[k][j].partial(l))
                        });
                        *entry = Expr::sum(terms).scale(0.5);
                    }
                }
            }
            MatForm::one_form(dim, &mats)
        })
        .collect()
}

/// The dual connection on the cotangent bundle in the coframe `dx^j`:
/// `ζ* = −ζᵀ`.
pub fn dual_connection(zeta: &[MatForm]) -> Vec<MatForm> {
    zeta.iter()
        .map(|z| MatForm::from_fn(z.n, z.dim, |i, j| z.get(j, i).scale(&Expr::constant(-1.0))))
        .collect()
}
