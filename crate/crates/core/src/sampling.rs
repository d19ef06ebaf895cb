//! Pointwise residual sampling and random smooth test data.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::alt::{binom, Alt, Mixed};
use crate::expr::{Compiled, Expr};
use crate::geometry::ManifoldModel;
use crate::Result;

/// Maximum of one residual family against its tolerance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Residual {
    pub name: String,
    pub max: f64,
    pub tol: f64,
}

impl Residual {
    pub fn pass(&self) -> bool {
        self.max.is_finite() && self.max <= self.tol
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub entries: Vec<Residual>,
}

impl ResidualReport {
    pub fn push(&mut self, name: impl Into<String>, max: f64, tol: f64) {
        self.entries.push(Residual {
            name: name.into(),
            max,
            tol,
        });
    }

    pub fn extend(&mut self, other: ResidualReport) {
        self.entries.extend(other.entries);
    }

    pub fn pass(&self) -> bool {
        self.entries.iter().all(Residual::pass)
    }

    pub fn get(&self, name: &str) -> Option<&Residual> {
        self.entries.iter().find(|r| r.name == name)
    }

    pub fn max(&self) -> f64 {
        self.entries.iter().fold(0.0, |m, r| m.max(r.max))
    }
}

/// Largest absolute value of any of the per-chart expressions over
/// `samples` random points of each chart.
pub fn max_abs_sampled<R: Rng>(
    m: &ManifoldModel,
    per_chart: &[Vec<Expr>],
    params: &[f64],
    samples: usize,
    rng: &mut R,
) -> Result<f64> {
    let mut worst: f64 = 0.0;
    let mut scratch = Vec::new();
    for (chart, exprs) in m.charts.iter().zip(per_chart) {
        let live: Vec<Expr> = exprs.iter().filter(|e| !e.is_zero()).cloned().collect();
        if live.is_empty() {
            continue;
        }
        let tape = Compiled::new(&live);
        let mut out = vec![0.0; live.len()];
        for _ in 0..samples {
            let p = chart.sample_point(rng);
            tape.eval_into(&p, params, &mut scratch, &mut out)?;
            for v in &out {
                worst = worst.max(if v.is_finite() {
                    v.abs()
                } else {
                    f64::INFINITY
                });
            }
        }
    }
    Ok(worst)
}

pub fn alt_exprs(charts: &[Alt]) -> Vec<Vec<Expr>> {
    charts.iter().map(|a| a.coeffs().to_vec()).collect()
}

pub fn mixed_exprs(charts: &[Mixed]) -> Vec<Vec<Expr>> {
    charts
        .iter()
        .map(|m| m.parts().iter().flat_map(|p| p.coeffs().to_vec()).collect())
        .collect()
}

/// Smooth functions used to assemble random test data in each chart.
///
/// A random function is `envelope · (c₀ + Σ cᵢ bᵢ + Σ cᵢⱼ bᵢ bⱼ)` with
/// random coefficients, where the `bᵢ` are chart expressions of globally
/// smooth functions and the envelope vanishes wherever a chart's
/// coordinates degenerate (so that integrals of exact data see no boundary
/// contribution).
#[derive(Clone, Debug)]
pub struct FunctionPool {
    pub basis: Vec<Vec<Expr>>,
    pub envelope: Vec<Expr>,
}

impl FunctionPool {
    /// Polynomials in the coordinates, no envelope.
    pub fn polynomial(m: &ManifoldModel) -> Self {
        FunctionPool {
            basis: m
                .charts
                .iter()
                .map(|c| (0..c.dim()).map(Expr::coord).collect())
                .collect(),
            envelope: vec![Expr::one(); m.n_charts()],
        }
    }

    pub fn random_function<R: Rng>(&self, chart: usize, rng: &mut R) -> Expr {
        let b = &self.basis[chart];
        let mut terms = vec![Expr::constant(coef(rng))];
        for (i, bi) in b.iter().enumerate() {
            terms.push(bi.scale(coef(rng)));
            for bj in &b[i..] {
                if rng.gen_bool(0.5) {
                    terms.push((bi * bj).scale(coef(rng)));
                }
            }
        }
        &self.envelope[chart] * Expr::sum(terms)
    }

    /// Random homogeneous alternating array of the given degree in a chart.
    pub fn random_alt<R: Rng>(&self, chart: usize, dim: usize, degree: usize, rng: &mut R) -> Alt {
        let coeffs = (0..binom(dim, degree))
            .map(|_| self.random_function(chart, rng))
            .collect();
        Alt::from_coeffs(dim, degree, coeffs)
    }
}

fn coef<R: Rng>(rng: &mut R) -> f64 {
    // round to keep printed expressions short
    (rng.gen_range(-1.0..1.0) * 1000.0f64).round() / 1000.0
}
