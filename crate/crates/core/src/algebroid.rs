//! Lie algebroid data on a local frame and the cochain complex `(C•_A, δ)`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::alt::{subsets, Alt};
use crate::expr::Expr;
use crate::geometry::{bracket_local, directional, lie_local, Chart, ManifoldModel, Quadrature};
use crate::sampling::{max_abs_sampled, ResidualReport};
use crate::{Error, Result};

/// Anchor and structure functions of an algebroid on one chart's frame.
///
/// `anchor[i][α]` is the `i`-th coordinate component of `a(e_α)`, and
/// `structure[γ]` is the degree-2 array `c^γ_{αβ}`, so that
/// `{e_α, e_β} = Σ_γ c^γ_{αβ} e_γ` with antisymmetry built into storage.
#[derive(Clone, Debug)]
pub struct LocalAlgebroid {
    pub anchor: Vec<Vec<Expr>>,
    pub structure: Vec<Alt>,
}

impl LocalAlgebroid {
    pub fn new(anchor: Vec<Vec<Expr>>, structure: Vec<Alt>) -> Result<Self> {
        let r = structure.len();
        if anchor.iter().any(|row| row.len() != r) {
            return Err(Error::Invalid(format!("anchor rows must have {r} entries")));
        }
        if structure.iter().any(|c| c.dim() != r || c.degree() != 2) {
            return Err(Error::Invalid(
                "structure functions must be 2-forms over the frame".into(),
            ));
        }
        Ok(LocalAlgebroid { anchor, structure })
    }

    pub fn rank(&self) -> usize {
        self.structure.len()
    }

    pub fn base_dim(&self) -> usize {
        self.anchor.len()
    }

    /// Coordinate components of `a(e_α)`.
    pub fn anchor_col(&self, alpha: usize) -> Vec<Expr> {
        self.anchor.iter().map(|row| row[alpha].clone()).collect()
    }

    pub fn c(&self, gamma: usize, alpha: usize, beta: usize) -> Expr {
        self.structure[gamma].get(&[alpha, beta])
    }

    /// `a(e_α)(f)`.
    pub fn act(&self, alpha: usize, f: &Expr) -> Expr {
        directional(&self.anchor_col(alpha), f)
    }

    /// `a(s)(f)` for a section with frame components `s`.
    pub fn act_section(&self, s: &[Expr], f: &Expr) -> Expr {
        Expr::sum(
            s.iter()
                .enumerate()
                .filter(|(_, sa)| !sa.is_zero())
                .map(|(a, sa)| sa * self.act(a, f)),
        )
    }

    /// Coordinate components of `a(s)`.
    pub fn anchor_of(&self, s: &[Expr]) -> Vec<Expr> {
        self.anchor
            .iter()
            .map(|row| Expr::sum(row.iter().zip(s).map(|(a, x)| a * x)))
            .collect()
    }

    /// Frame components of `{s, e_β}`.
    pub fn bracket_with_basis(&self, s: &[Expr], beta: usize) -> Vec<Expr> {
        let r = self.rank();
        (0..r)
            .map(|g| {
                let mut terms: Vec<Expr> = (0..r)
                    .filter(|a| !s[*a].is_zero())
                    .map(|a| &s[a] * self.c(g, a, beta))
                    .collect();
                terms.push(-self.act(beta, &s[g]));
                Expr::sum(terms)
            })
            .collect()
    }

    /// Frame components of `{s, t}`.
    pub fn bracket(&self, s: &[Expr], t: &[Expr]) -> Vec<Expr> {
        let r = self.rank();
        (0..r)
            .map(|g| {
                let mut terms = vec![self.act_section(s, &t[g]), -self.act_section(t, &s[g])];
                for a in 0..r {
                    for b in 0..r {
                        if !s[a].is_zero() && !t[b].is_zero() {
                            terms.push(&s[a] * &t[b] * self.c(g, a, b));
                        }
                    }
                }
                Expr::sum(terms)
            })
            .collect()
    }

    /// The Cartan differential of a local cochain.
    pub fn delta(&self, xi: &Alt) -> Alt {
        let r = self.rank();
        let p = xi.degree();
        assert!(p < r || r == 0 && p == 0, "delta of a top-degree cochain");
        if p >= r {
            return Alt::zero(r, p + 1);
        }
        let mut out = Alt::zero(r, p + 1);
        for idx in subsets(r, p + 1) {
            let mut terms = Vec::new();
            for i in 0..=p {
                let rest: Vec<usize> = without(&idx, &[i]);
                let v = self.act(idx[i], &xi.get(&rest));
                terms.push(if i % 2 == 0 { v } else { -v });
            }
            for i in 0..=p {
                for j in i + 1..=p {
                    let rest = without(&idx, &[i, j]);
                    for g in 0..r {
                        let c = self.c(g, idx[i], idx[j]);
                        if c.is_zero() {
                            continue;
                        }
                        let mut full = vec![g];
                        full.extend_from_slice(&rest);
                        let v = c * xi.get(&full);
                        terms.push(if (i + j) % 2 == 0 { v } else { -v });
                    }
                }
            }
            out.set(&idx, Expr::sum(terms));
        }
        out
    }

    /// Lie derivative `L_s = {s, ·}` of a multisection, expanded as a
    /// derivation over wedge factors.
    pub fn lie_multisection(&self, s: &[Expr], x: &Alt) -> Alt {
        let r = self.rank();
        let images: Vec<Vec<Expr>> = (0..r).map(|b| self.bracket_with_basis(s, b)).collect();
        let mut out = Alt::zero(r, x.degree());
        for (idx, f) in x.iter() {
            if f.is_zero() {
                continue;
            }
            out = out.add(&Alt::monomial(r, &idx, self.act_section(s, f)));
            for pos in 0..idx.len() {
                for (g, coef) in images[idx[pos]].iter().enumerate() {
                    if coef.is_zero() {
                        continue;
                    }
                    let mut j = idx.clone();
                    j[pos] = g;
                    out = out.add(&Alt::monomial(r, &j, f * coef));
                }
            }
        }
        out
    }

    /// `a^*ω` for a form with coordinate coefficients.
    pub fn anchor_pullback(&self, w: &Alt) -> Alt {
        w.pullback(&self.anchor, self.rank())
    }

    /// The derivation tables of `δ`: images of coordinate functions and of
    /// the dual coframe.
    pub fn derivation(&self) -> LocalDerivation {
        let m = self.base_dim();
        let r = self.rank();
        LocalDerivation {
            rank: r,
            coord_images: (0..m)
                .map(|k| self.delta(&Alt::scalar(r, Expr::coord(k))))
                .collect(),
            gen_images: (0..r)
                .map(|g| self.delta(&Alt::monomial(r, &[g], Expr::one())))
                .collect(),
        }
    }
}

fn without(idx: &[usize], drop: &[usize]) -> Vec<usize> {
    idx.iter()
        .enumerate()
        .filter(|(k, _)| !drop.contains(k))
        .map(|(_, &v)| v)
        .collect()
}

/// A degree-one derivation of `Γ(Λ•A*)` on one chart, given by its values
/// on coordinate functions and on the coframe `e^γ`.
#[derive(Clone, Debug)]
pub struct LocalDerivation {
    pub rank: usize,
    pub coord_images: Vec<Alt>,
    pub gen_images: Vec<Alt>,
}

impl LocalDerivation {
    fn of_function(&self, f: &Expr) -> Alt {
        let mut out = Alt::zero(self.rank, 1);
        for (k, img) in self.coord_images.iter().enumerate() {
            let df = f.partial(k);
            if !df.is_zero() {
                out = out.add(&img.scale(&df));
            }
        }
        out
    }

    pub fn apply(&self, xi: &Alt) -> Alt {
        let r = self.rank;
        let mut out = Alt::zero(r, xi.degree() + 1);
        for (idx, f) in xi.iter() {
            if f.is_zero() {
                continue;
            }
            let basis = Alt::monomial(r, &idx, Expr::one());
            out = out.add(&self.of_function(f).wedge(&basis));
            for j in 0..idx.len() {
                let head = Alt::monomial(r, &idx[..j], Expr::one());
                let tail = Alt::monomial(r, &idx[j + 1..], Expr::one());
                let term = head.wedge(&self.gen_images[idx[j]]).wedge(&tail).scale(f);
                out = if j % 2 == 0 {
                    out.add(&term)
                } else {
                    out.sub(&term)
                };
            }
        }
        out
    }

    /// Reads off anchor and structure functions: `a^k_α = (D x^k)(e_α)` and
    /// `c^γ_{αβ} = −(D e^γ)(e_α, e_β)`.
    pub fn induce(&self) -> Result<LocalAlgebroid> {
        let anchor = self
            .coord_images
            .iter()
            .map(|img| (0..self.rank).map(|a| img.get(&[a])).collect())
            .collect();
        let structure = self.gen_images.iter().map(Alt::neg).collect();
        LocalAlgebroid::new(anchor, structure)
    }

    /// `D²` on every generator; it vanishes identically iff these do.
    pub fn square_on_generators(&self) -> Vec<Expr> {
        let r = self.rank;
        let mut out = Vec::new();
        for k in 0..self.coord_images.len() {
            out.extend_from_slice(self.apply(&self.of_function(&Expr::coord(k))).coeffs());
        }
        for g in 0..r {
            let e = Alt::monomial(r, &[g], Expr::one());
            out.extend_from_slice(self.apply(&self.apply(&e)).coeffs());
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlgebroidKind {
    Tangent,
    PoissonCotangent,
    AtiyahTrivialBundle,
    LieAlgebraPoint,
    Custom,
}

/// A Lie algebroid over a chart-described manifold.
#[derive(Clone, Debug)]
pub struct AlgebroidModel {
    pub kind: AlgebroidKind,
    pub rank: usize,
    pub manifold: ManifoldModel,
    pub local: Vec<LocalAlgebroid>,
}

/// Element of `Γ(Λ^p A*)` given chart by chart.
#[derive(Clone, Debug)]
pub struct ACochain {
    pub degree: usize,
    pub charts: Vec<Alt>,
}

/// Element of `Γ(A)`: frame components per chart.
#[derive(Clone, Debug)]
pub struct ASection {
    pub charts: Vec<Vec<Expr>>,
}

/// Element of `Γ(Λ^q A)`.
#[derive(Clone, Debug)]
pub struct AMultiSection {
    pub degree: usize,
    pub charts: Vec<Alt>,
}

impl ACochain {
    pub fn zero(a: &AlgebroidModel, degree: usize) -> Self {
        ACochain {
            degree,
            charts: vec![Alt::zero(a.rank, degree); a.manifold.n_charts()],
        }
    }

    pub fn unit(a: &AlgebroidModel) -> Self {
        ACochain {
            degree: 0,
            charts: vec![Alt::scalar(a.rank, Expr::one()); a.manifold.n_charts()],
        }
    }

    pub fn from_charts(charts: Vec<Alt>) -> Result<Self> {
        let degree = charts.first().map_or(0, Alt::degree);
        if charts.iter().any(|c| c.degree() != degree) {
            return Err(Error::Degree("chart pieces of different degree".into()));
        }
        Ok(ACochain { degree, charts })
    }

    pub fn add(&self, other: &ACochain) -> ACochain {
        ACochain {
            degree: self.degree,
            charts: self
                .charts
                .iter()
                .zip(&other.charts)
                .map(|(a, b)| a.add(b))
                .collect(),
        }
    }

    pub fn sub(&self, other: &ACochain) -> ACochain {
        ACochain {
            degree: self.degree,
            charts: self
                .charts
                .iter()
                .zip(&other.charts)
                .map(|(a, b)| a.sub(b))
                .collect(),
        }
    }
}

const BUILD_SAMPLES: usize = 16;
const BUILD_TOL: f64 = 1e-8;

impl AlgebroidModel {
    /// Assembles and validates a model; fails when the axiom residuals
    /// exceed a fixed tolerance on a fixed set of sample points.
    pub fn new(
        kind: AlgebroidKind,
        manifold: ManifoldModel,
        local: Vec<LocalAlgebroid>,
    ) -> Result<Self> {
        if local.len() != manifold.n_charts() {
            return Err(Error::Invalid(
                "one local algebroid per chart is required".into(),
            ));
        }
        let rank = local.first().map_or(0, LocalAlgebroid::rank);
        for l in &local {
            if l.rank() != rank || l.base_dim() != manifold.dim {
                return Err(Error::Invalid(
                    "inconsistent anchor or rank across charts".into(),
                ));
            }
        }
        let model = AlgebroidModel {
            kind,
            rank,
            manifold,
            local,
        };
        let report = model.check_axioms(BUILD_SAMPLES, &mut ChaCha8Rng::seed_from_u64(0))?;
        for e in &report.entries {
            if e.max > BUILD_TOL {
                return Err(Error::Axiom(format!("{} residual {:.3e}", e.name, e.max)));
            }
        }
        Ok(model)
    }

    /// The tangent algebroid with coordinate frames.
    pub fn tangent(manifold: ManifoldModel) -> Result<Self> {
        let m = manifold.dim;
        let local = (0..manifold.n_charts())
            .map(|_| LocalAlgebroid {
                anchor: identity(m),
                structure: vec![Alt::zero(m, 2); m],
            })
            .collect();
        Self::new(AlgebroidKind::Tangent, manifold, local)
    }

    /// The cotangent algebroid of a bivector `Π` (one degree-2 array of
    /// coordinate components per chart), on the coordinate coframe.
    /// Frame `e_i = dx^i`, anchor `a(dx^i) = Π^{ij} ∂_j`, and bracket
    /// `{α,β} = L_{Πα}β − L_{Πβ}α − dΠ(α,β)`.
    pub fn poisson_cotangent(manifold: ManifoldModel, pi: Vec<Alt>) -> Result<Self> {
        let m = manifold.dim;
        if pi.len() != manifold.n_charts() || pi.iter().any(|p| p.dim() != m || p.degree() != 2) {
            return Err(Error::Invalid(
                "Poisson tensor needs one bivector per chart".into(),
            ));
        }
        let local = pi.iter().map(|p| local_poisson(m, p)).collect();
        Self::new(AlgebroidKind::PoissonCotangent, manifold, local)
    }

    /// The Atiyah algebroid of the trivial rank-`n` bundle: frame
    /// `(∂_1, …, ∂_m, E_{pq})` with `E_{pq}` at index `m + p·n + q`,
    /// bracket from the matrix commutator, anchor the projection.
    pub fn atiyah_trivial_bundle(manifold: ManifoldModel, n: usize) -> Result<Self> {
        let m = manifold.dim;
        let r = m + n * n;
        let mut structure = vec![Alt::zero(r, 2); r];
        let e = |p: usize, q: usize| m + p * n + q;
        for p in 0..n {
            for q in 0..n {
                for s in 0..n {
                    for t in 0..n {
                        let (x, y) = (e(p, q), e(s, t));
                        if x >= y {
                            continue;
                        }
                        // [E_pq, E_st] = δ_qs E_pt − δ_tp E_sq
                        if q == s {
                            let g = e(p, t);
                            let v = structure[g].get(&[x, y]);
                            structure[g].set(&[x, y], v + Expr::one());
                        }
                        if t == p {
                            let g = e(s, q);
                            let v = structure[g].get(&[x, y]);
                            structure[g].set(&[x, y], v - Expr::one());
                        }
                    }
                }
            }
        }
        let anchor = (0..m)
            .map(|i| {
                (0..r)
                    .map(|a| if a == i { Expr::one() } else { Expr::zero() })
                    .collect()
            })
            .collect::<Vec<Vec<Expr>>>();
        let local = (0..manifold.n_charts())
            .map(|_| LocalAlgebroid {
                anchor: anchor.clone(),
                structure: structure.clone(),
            })
            .collect();
        Self::new(AlgebroidKind::AtiyahTrivialBundle, manifold, local)
    }

    /// A Lie algebra viewed as an algebroid over a point; `structure[γ]`
    /// holds the constants `f^γ_{αβ}`.
    pub fn lie_algebra_point(structure: Vec<Alt>) -> Result<Self> {
        let chart = Chart {
            id: "pt".into(),
            coords: Vec::new(),
            quadrature: Some(Quadrature {
                domain: Vec::new(),
                order: Vec::new(),
            }),
            evaluation: true,
            orientation: 1.0,
            sample_box: Vec::new(),
        };
        let manifold = ManifoldModel::new(0, vec![chart])?;
        let local = vec![LocalAlgebroid::new(Vec::new(), structure)?];
        Self::new(AlgebroidKind::LieAlgebraPoint, manifold, local)
    }

    pub fn custom(manifold: ManifoldModel, local: Vec<LocalAlgebroid>) -> Result<Self> {
        Self::new(AlgebroidKind::Custom, manifold, local)
    }

    /// Residuals of the anchor homomorphism and of the Jacobi identity on
    /// the frame, sampled per chart.
    pub fn check_axioms<R: rand::Rng>(
        &self,
        samples: usize,
        rng: &mut R,
    ) -> Result<ResidualReport> {
        let (anchor, jacobi): (Vec<Vec<Expr>>, Vec<Vec<Expr>>) =
            self.local.iter().map(axiom_residuals).unzip();
        let mut report = ResidualReport::default();
        report.push(
            "anchor",
            max_abs_sampled(&self.manifold, &anchor, &[], samples, rng)?,
            1e-9,
        );
        report.push(
            "jacobi",
            max_abs_sampled(&self.manifold, &jacobi, &[], samples, rng)?,
            1e-9,
        );
        Ok(report)
    }

    pub fn delta(&self, xi: &ACochain) -> Result<ACochain> {
        if xi.degree >= self.rank {
            return Err(Error::Degree(format!(
                "delta of a degree-{} cochain on a rank-{} algebroid",
                xi.degree, self.rank
            )));
        }
        Ok(ACochain {
            degree: xi.degree + 1,
            charts: self
                .local
                .iter()
                .zip(&xi.charts)
                .map(|(l, x)| l.delta(x))
                .collect(),
        })
    }

    pub fn wedge(&self, xi: &ACochain, zeta: &ACochain) -> Result<ACochain> {
        if xi.degree + zeta.degree > self.rank {
            return Err(Error::Degree("wedge exceeds the rank".into()));
        }
        Ok(ACochain {
            degree: xi.degree + zeta.degree,
            charts: xi
                .charts
                .iter()
                .zip(&zeta.charts)
                .map(|(a, b)| a.wedge(b))
                .collect(),
        })
    }

    pub fn contract(&self, s: &ASection, xi: &ACochain) -> Result<ACochain> {
        if xi.degree == 0 {
            return Err(Error::Degree("contraction into a 0-cochain".into()));
        }
        Ok(ACochain {
            degree: xi.degree - 1,
            charts: s
                .charts
                .iter()
                .zip(&xi.charts)
                .map(|(v, a)| a.interior(v))
                .collect(),
        })
    }

    pub fn lie_multisection(&self, s: &ASection, x: &AMultiSection) -> AMultiSection {
        AMultiSection {
            degree: x.degree,
            charts: self
                .local
                .iter()
                .zip(&s.charts)
                .zip(&x.charts)
                .map(|((l, v), a)| l.lie_multisection(v, a))
                .collect(),
        }
    }

    pub fn anchor_pullback(&self, w: &crate::geometry::DiffForm) -> Result<ACochain> {
        if w.degree > self.rank {
            return Err(Error::Degree("form degree exceeds the rank".into()));
        }
        Ok(ACochain {
            degree: w.degree,
            charts: self
                .local
                .iter()
                .zip(&w.charts)
                .map(|(l, a)| l.anchor_pullback(a))
                .collect(),
        })
    }

    /// Rebuilds anchor and bracket from derivation tables, one per chart,
    /// after checking `D² = 0` at sampled points.
    pub fn induce_from_differential(
        manifold: ManifoldModel,
        tables: &[LocalDerivation],
        samples: usize,
        tol: f64,
    ) -> Result<Self> {
        let sq: Vec<Vec<Expr>> = tables
            .iter()
            .map(LocalDerivation::square_on_generators)
            .collect();
        let res = max_abs_sampled(
            &manifold,
            &sq,
            &[],
            samples,
            &mut ChaCha8Rng::seed_from_u64(1),
        )?;
        if res > tol {
            return Err(Error::Precondition(format!(
                "D² does not vanish (residual {res:.3e})"
            )));
        }
        let local = tables
            .iter()
            .map(LocalDerivation::induce)
            .collect::<Result<_>>()?;
        Self::new(AlgebroidKind::Custom, manifold, local)
    }
}

fn identity(m: usize) -> Vec<Vec<Expr>> {
    (0..m)
        .map(|i| {
            (0..m)
                .map(|j| if i == j { Expr::one() } else { Expr::zero() })
                .collect()
        })
        .collect()
}

fn local_poisson(m: usize, pi: &Alt) -> LocalAlgebroid {
    // Π♯(dx^i) = Π^{ij} ∂_j
    let sharp: Vec<Vec<Expr>> = (0..m)
        .map(|i| (0..m).map(|j| pi.get(&[i, j])).collect())
        .collect();
    let anchor = (0..m)
        .map(|j| (0..m).map(|i| sharp[i][j].clone()).collect())
        .collect();
    let mut structure = vec![Alt::zero(m, 2); m];
    for i in 0..m {
        for j in i + 1..m {
            let dxi = Alt::monomial(m, &[i], Expr::one());
            let dxj = Alt::monomial(m, &[j], Expr::one());
            let br = lie_local(&sharp[i], &dxj)
                .sub(&lie_local(&sharp[j], &dxi))
                .sub(&crate::geometry::d_local(&Alt::scalar(m, pi.get(&[i, j]))));
            for (k, s) in structure.iter_mut().enumerate() {
                s.set(&[i, j], br.get(&[k]));
            }
        }
    }
    LocalAlgebroid { anchor, structure }
}

/// Expressions whose vanishing expresses the anchor homomorphism and the
/// frame Jacobi identity (including anchor derivatives of the structure
/// functions).
fn axiom_residuals(l: &LocalAlgebroid) -> (Vec<Expr>, Vec<Expr>) {
    let r = l.rank();
    let m = l.base_dim();
    let cols: Vec<Vec<Expr>> = (0..r).map(|a| l.anchor_col(a)).collect();
    let mut anchor = Vec::new();
    for a in 0..r {
        for b in a + 1..r {
            let br = bracket_local(&cols[a], &cols[b]);
            for (i, bri) in br.iter().enumerate().take(m) {
                let mapped = Expr::sum((0..r).map(|g| l.c(g, a, b) * &cols[g][i]));
                anchor.push(mapped - bri);
            }
        }
    }
    // {e_α,{e_β,e_γ}}^ε = Σ_δ c^δ_{βγ} c^ε_{αδ} + a_α(c^ε_{βγ})
    let nested = |a: usize, b: usize, g: usize, e: usize| {
        let mut terms: Vec<Expr> = (0..r).map(|d| l.c(d, b, g) * l.c(e, a, d)).collect();
        terms.push(l.act(a, &l.c(e, b, g)));
        Expr::sum(terms)
    };
    let mut jacobi = Vec::new();
    for idx in subsets(r, 3) {
        let (a, b, g) = (idx[0], idx[1], idx[2]);
        for e in 0..r {
            jacobi.push(nested(a, b, g, e) + nested(b, g, a, e) + nested(g, a, b, e));
        }
    }
    (anchor, jacobi)
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn su2() -> Vec<Alt> {
        let mut s = vec![Alt::zero(3, 2); 3];
        s[0].set(&[1, 2], Expr::one());
        s[1].set(&[2, 0], Expr::one());
        s[2].set(&[0, 1], Expr::one());
        s
    }

    #[test]
    fn su2_delta_of_coframe() {
        let a = AlgebroidModel::lie_algebra_point(su2()).unwrap();
        let e1 = Alt::monomial(3, &[0], Expr::one());
        let d = a.local[0].delta(&e1);
        assert_eq!(d.get(&[1, 2]).as_const(), Some(-1.0));
        assert!(d.get(&[0, 1]).is_zero() && d.get(&[0, 2]).is_zero());
    }

    #[test]
    fn corrupted_structure_is_rejected() {
        let mut s = su2();
        let v = s[0].get(&[1, 2]);
        s[0].set(&[1, 2], v + Expr::constant(0.1));
        // rescaling one constant keeps Jacobi for a 3-dimensional algebra,
        // a trace part does not
        s[0].set(&[0, 1], Expr::constant(0.3));
        match AlgebroidModel::lie_algebra_point(s) {
            Err(Error::Axiom(_)) => {}
            other => panic!("expected an axiom failure, got {other:?}"),
        }
    }

    #[test]
    fn lie_multisection_on_su2() {
        let a = AlgebroidModel::lie_algebra_point(su2()).unwrap();
        let e1 = vec![Expr::one(), Expr::zero(), Expr::zero()];
        let x = Alt::monomial(3, &[1, 2], Expr::one());
        let l = a.local[0].lie_multisection(&e1, &x);
        assert!(l.coeffs().iter().all(Expr::is_zero));
    }
}
