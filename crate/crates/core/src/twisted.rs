//! The twisted complex `Γ(Λ•A* ⊗ Q_A)` with `Q_A = Λ^r A ⊗ Ω^m_M`.
//!
//! On every chart a twisted cochain is stored by its coefficients against
//! the fixed section `τ₀ = (e_1∧…∧e_r) ⊗ (dx^1∧…∧dx^m)`; a general
//! `ψ ⊗ q τ₀` is kept as the single array `q ψ`. With this normalisation
//! `Dτ₀ = θ ⊗ τ₀` for the modular 1-cochain `θ`, and `δ̃ψ = δψ + θ∧ψ`.

use crate::algebroid::{ACochain, AlgebroidModel, LocalAlgebroid};
use crate::alt::{complement, det_expr, shuffle_sign, subset_rank, subsets, Alt};
use crate::expr::Expr;
use crate::geometry::{integrate_chart_many, integrate_top_form, DiffForm};
use crate::{Error, Result};

/// A section of `Q_A`: the coefficient of `τ₀` on each chart.
#[derive(Clone, Debug)]
pub struct QSection {
    pub charts: Vec<Expr>,
}

#[derive(Clone, Debug)]
pub struct TwistedCochain {
    pub degree: usize,
    pub charts: Vec<Alt>,
}

impl TwistedCochain {
    pub fn zero(a: &AlgebroidModel, degree: usize) -> Self {
        TwistedCochain {
            degree,
            charts: vec![Alt::zero(a.rank, degree); a.manifold.n_charts()],
        }
    }

    pub fn from_q(a: &AlgebroidModel, q: &QSection) -> Self {
        TwistedCochain {
            degree: 0,
            charts: q
                .charts
                .iter()
                .map(|f| Alt::scalar(a.rank, f.clone()))
                .collect(),
        }
    }

    pub fn from_charts(charts: Vec<Alt>) -> Result<Self> {
        let degree = charts.first().map_or(0, Alt::degree);
        if charts.iter().any(|c| c.degree() != degree) {
            return Err(Error::Degree("chart pieces of different degree".into()));
        }
        Ok(TwistedCochain { degree, charts })
    }

    pub fn add(&self, other: &TwistedCochain) -> TwistedCochain {
        TwistedCochain {
            degree: self.degree,
            charts: self
                .charts
                .iter()
                .zip(&other.charts)
                .map(|(a, b)| a.add(b))
                .collect(),
        }
    }

    pub fn sub(&self, other: &TwistedCochain) -> TwistedCochain {
        TwistedCochain {
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

/// `θ(e_α) = Σ_β c^β_{αβ} + Σ_k ∂_k a^k_α`: the trace of `ad(e_α)` acting
/// on `Λ^r A` plus the divergence of `a(e_α)` acting on the volume.
pub fn modular_local(l: &LocalAlgebroid) -> Alt {
    let r = l.rank();
    let coeffs = (0..r)
        .map(|a| {
            let trace = (0..r).map(|b| l.c(b, a, b));
            let div = l
                .anchor
                .iter()
                .enumerate()
                .map(|(k, row)| row[a].partial(k));
            Expr::sum(trace.chain(div))
        })
        .collect();
    Alt::from_coeffs(r, 1, coeffs)
}

pub fn delta_twisted_local(l: &LocalAlgebroid, psi: &Alt) -> Alt {
    if psi.degree() >= l.rank() {
        return Alt::zero(l.rank(), psi.degree() + 1);
    }
    l.delta(psi).add(&modular_local(l).wedge(psi))
}

/// Sign attached to the contraction on degree `k`. It reverses the order
/// of the `(r−k)`-vector `ψ⌟X`, and is the choice that makes `p` satisfy
/// `p∘δ̃ = (−1)^k d∘p` while `p` is the identity on top degree.
fn p_sign(r: usize, k: usize) -> f64 {
    let j = r - k;
    if (j * j.saturating_sub(1) / 2) % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// `p(ψ ⊗ X ⊗ μ) = (a(ψ⌟X))⌟μ` on one chart, as a form of degree
/// `k − r + m`.
pub fn p_local(l: &LocalAlgebroid, psi: &Alt) -> Alt {
    let r = l.rank();
    let m = l.base_dim();
    let k = psi.degree();
    assert!(k + m >= r, "p is only defined from degree r − m up");
    let j = r - k;
    let out_deg = m - j;
    let sign = p_sign(r, k);
    // ψ⌟X as a j-vector: coefficient on e_J is Σ ψ_I ε(I,J)
    let mut contracted = vec![Expr::zero(); crate::alt::binom(r, j)];
    for (idx, f) in psi.iter() {
        if f.is_zero() {
            continue;
        }
        let comp = complement(r, &idx);
        contracted[subset_rank(r, &comp)] = f.scale(shuffle_sign(&idx, &comp));
    }
    let mut out = Alt::zero(m, out_deg);
    let targets = subsets(m, out_deg);
    let rows = subsets(m, j);
    let mut acc: Vec<Vec<Expr>> = vec![Vec::new(); targets.len()];
    for (jr, jset) in subsets(r, j).into_iter().enumerate() {
        let x = &contracted[jr];
        if x.is_zero() {
            continue;
        }
        for kset in &rows {
            let minor: Vec<Vec<Expr>> = kset
                .iter()
                .map(|&i| jset.iter().map(|&b| l.anchor[i][b].clone()).collect())
                .collect();
            let det = det_expr(&minor);
            if det.is_zero() {
                continue;
            }
            let lset = complement(m, kset);
            let s = shuffle_sign(kset, &lset) * sign;
            acc[subset_rank(m, &lset)].push((x * det).scale(s));
        }
    }
    for (slot, terms) in acc.into_iter().enumerate() {
        out.set(&targets[slot], Expr::sum(terms));
    }
    out
}

impl AlgebroidModel {
    pub fn modular(&self) -> ACochain {
        ACochain {
            degree: 1,
            charts: self.local.iter().map(modular_local).collect(),
        }
    }

    /// `Dτ` as a twisted 1-cochain.
    pub fn d_operator_q(&self, tau: &QSection) -> TwistedCochain {
        let charts = self
            .local
            .iter()
            .zip(&tau.charts)
            .map(|(l, q)| {
                let r = l.rank();
                let dq = l.delta(&Alt::scalar(r, q.clone()));
                dq.add(&modular_local(l).scale(q))
            })
            .collect();
        TwistedCochain { degree: 1, charts }
    }

    pub fn delta_twisted(&self, c: &TwistedCochain) -> Result<TwistedCochain> {
        if c.degree >= self.rank {
            return Err(Error::Degree(format!(
                "twisted delta of degree {} on rank {}",
                c.degree, self.rank
            )));
        }
        Ok(TwistedCochain {
            degree: c.degree + 1,
            charts: self
                .local
                .iter()
                .zip(&c.charts)
                .map(|(l, x)| delta_twisted_local(l, x))
                .collect(),
        })
    }

    pub fn p_map(&self, c: &TwistedCochain) -> Result<DiffForm> {
        if c.degree + self.manifold.dim < self.rank {
            return Err(Error::Degree(format!(
                "p needs degree at least r − m = {}",
                self.rank as i64 - self.manifold.dim as i64
            )));
        }
        Ok(DiffForm {
            degree: c.degree + self.manifold.dim - self.rank,
            charts: self
                .local
                .iter()
                .zip(&c.charts)
                .map(|(l, x)| p_local(l, x))
                .collect(),
        })
    }

    /// Integral of a top-degree twisted cochain, i.e. of its image under `p`.
    pub fn integrate_twisted(&self, c: &TwistedCochain, order: Option<usize>) -> Result<f64> {
        if c.degree != self.rank {
            return Err(Error::Degree(
                "only top-degree twisted cochains integrate".into(),
            ));
        }
        integrate_top_form(&self.manifold, &self.p_map(c)?, order)
    }

    /// `|∫ δ̃c|` for a twisted cochain of degree `r − 1`.
    pub fn stokes_check(&self, c: &TwistedCochain, order: Option<usize>) -> Result<f64> {
        if c.degree + 1 != self.rank {
            return Err(Error::Degree("Stokes check needs degree r − 1".into()));
        }
        Ok(self
            .integrate_twisted(&self.delta_twisted(c)?, order)?
            .abs())
    }

    /// `|∫ δ̃c|` for several `(r − 1)`-cochains, integrated in one sweep
    /// per chart.
    pub fn stokes_check_many(
        &self,
        cs: &[TwistedCochain],
        order: Option<usize>,
    ) -> Result<Vec<f64>> {
        let mut totals = vec![0.0; cs.len()];
        let images = cs
            .iter()
            .map(|c| {
                if c.degree + 1 != self.rank {
                    return Err(Error::Degree("Stokes check needs degree r − 1".into()));
                }
                self.p_map(&self.delta_twisted(c)?)
            })
            .collect::<Result<Vec<_>>>()?;
        for (ch, chart) in self.manifold.charts.iter().enumerate() {
            if chart.quadrature.is_none() {
                continue;
            }
            let fs: Vec<Expr> = images
                .iter()
                .map(|w| w.charts[ch].coeffs()[0].clone())
                .collect();
            for (t, v) in totals
                .iter_mut()
                .zip(integrate_chart_many(chart, &fs, &[], order)?)
            {
                *t += v;
            }
        }
        Ok(totals.into_iter().map(f64::abs).collect())
    }

    pub fn cup_product(&self, xi: &ACochain, c: &TwistedCochain) -> Result<TwistedCochain> {
        if xi.degree + c.degree > self.rank {
            return Err(Error::Degree("cup product exceeds the rank".into()));
        }
        Ok(TwistedCochain {
            degree: xi.degree + c.degree,
            charts: xi
                .charts
                .iter()
                .zip(&c.charts)
                .map(|(a, b)| a.wedge(b))
                .collect(),
        })
    }

    /// `∫_M (ξ∧ψ, X) μ`.
    pub fn pairing_integral(
        &self,
        xi: &ACochain,
        c: &TwistedCochain,
        order: Option<usize>,
    ) -> Result<f64> {
        if xi.degree + c.degree != self.rank {
            return Err(Error::Degree(format!(
                "pairing needs complementary degrees, got {} and {}",
                xi.degree, c.degree
            )));
        }
        self.integrate_twisted(&self.cup_product(xi, c)?, order)
    }

    /// Contraction `i_s` on twisted cochains.
    pub fn contract_twisted(&self, s: &[Vec<Expr>], c: &TwistedCochain) -> Result<TwistedCochain> {
        if c.degree == 0 {
            return Err(Error::Degree("contraction into a twisted 0-cochain".into()));
        }
        Ok(TwistedCochain {
            degree: c.degree - 1,
            charts: s
                .iter()
                .zip(&c.charts)
                .map(|(v, a)| a.interior(v))
                .collect(),
        })
    }

    /// `L_s = i_s δ̃ + δ̃ i_s`; at the top degree only the second term exists.
    pub fn twisted_lie(&self, s: &[Vec<Expr>], c: &TwistedCochain) -> Result<TwistedCochain> {
        let mut out = TwistedCochain::zero(self, c.degree);
        if c.degree < self.rank {
            out = out.add(&self.contract_twisted(s, &self.delta_twisted(c)?)?);
        }
        if c.degree > 0 {
            out = out.add(&self.delta_twisted(&self.contract_twisted(s, c)?)?);
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{d_local, Chart, ManifoldModel, Quadrature};
    use crate::sampling::{max_abs_sampled, FunctionPool};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn sphere() -> ManifoldModel {
        let chart = Chart {
            id: "sph".into(),
            coords: vec!["th".into(), "ph".into()],
            quadrature: Some(Quadrature {
                domain: vec![(0.0, PI), (0.0, 2.0 * PI)],
                order: vec![32, 32],
            }),
            evaluation: false,
            orientation: 1.0,
            sample_box: vec![(0.3, 2.8), (0.0, 6.0)],
        };
        ManifoldModel::new(2, vec![chart]).unwrap()
    }

    fn chain_residual(a: &AlgebroidModel, seed: u64) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pool = FunctionPool::polynomial(&a.manifold);
        let l = &a.local[0];
        let r = a.rank;
        let m = a.manifold.dim;
        let mut worst: f64 = 0.0;
        for k in (r - m)..r {
            let psi = pool.random_alt(0, r, k, &mut rng);
            let lhs = p_local(l, &delta_twisted_local(l, &psi));
            let rhs = d_local(&p_local(l, &psi));
            let rhs = if k % 2 == 0 { rhs } else { rhs.neg() };
            let res = lhs.sub(&rhs);
            worst = worst.max(
                max_abs_sampled(&a.manifold, &[res.coeffs().to_vec()], &[], 20, &mut rng).unwrap(),
            );
        }
        worst
    }

    #[test]
    fn p_is_a_chain_map_up_to_sign() {
        let tm = AlgebroidModel::tangent(sphere()).unwrap();
        assert!(chain_residual(&tm, 1) < 1e-9);
        let at = AlgebroidModel::atiyah_trivial_bundle(sphere(), 1).unwrap();
        assert!(chain_residual(&at, 2) < 1e-9, "{}", chain_residual(&at, 2));
        let at2 = AlgebroidModel::atiyah_trivial_bundle(sphere(), 2).unwrap();
        assert!(
            chain_residual(&at2, 3) < 1e-9,
            "{}",
            chain_residual(&at2, 3)
        );
        let mut pi = Alt::zero(2, 2);
        pi.set(&[0, 1], Expr::coord(0).sin());
        let po = AlgebroidModel::poisson_cotangent(sphere(), vec![pi]).unwrap();
        assert!(chain_residual(&po, 4) < 1e-9, "{}", chain_residual(&po, 4));
    }

    #[test]
    fn top_degree_p_is_the_volume() {
        let tm = AlgebroidModel::tangent(sphere()).unwrap();
        let top = Alt::monomial(2, &[0, 1], Expr::coord(0).sin());
        let w = p_local(&tm.local[0], &top);
        assert_eq!(w.get(&[0, 1]).eval(&[1.0, 0.0], &[]).unwrap(), 1f64.sin());
    }
}
