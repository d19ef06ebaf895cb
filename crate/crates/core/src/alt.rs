//! Alternating multilinear coefficient arrays.
//!
//! [`Alt`] stores one [`Expr`] per strictly increasing index tuple, so
//! antisymmetry holds by construction. The same carrier serves differential
//! forms (indices over coordinates), algebroid cochains and multisections
//! (indices over a local frame), and twisted cochains.

use crate::expr::{Compiled, EvalError, Expr};

/// Binomial coefficient; small arguments only.
pub fn binom(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut r = 1usize;
    for i in 0..k {
        r = r * (n - i) / (i + 1);
    }
    r
}

/// All strictly increasing `k`-tuples drawn from `0..n`, in lexicographic order.
pub fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::with_capacity(binom(n, k));
    if k > n {
        return out;
    }
    let mut cur: Vec<usize> = (0..k).collect();
    loop {
        out.push(cur.clone());
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if cur[i] < n - k + i {
                cur[i] += 1;
                for j in i + 1..k {
                    cur[j] = cur[j - 1] + 1;
                }
                break;
            }
        }
    }
}

/// Lexicographic rank of a strictly increasing tuple among `subsets(n, k)`.
pub fn subset_rank(n: usize, idx: &[usize]) -> usize {
    let k = idx.len();
    let mut rank = 0;
    let mut prev: isize = -1;
    for (pos, &v) in idx.iter().enumerate() {
        for skipped in (prev + 1) as usize..v {
            rank += binom(n - skipped - 1, k - pos - 1);
        }
        prev = v as isize;
    }
    rank
}

/// Sorts `idx` and returns the permutation sign, or `None` on a repeat.
pub fn sort_sign(idx: &[usize]) -> Option<(Vec<usize>, f64)> {
    let mut v = idx.to_vec();
    let mut sign = 1.0;
    for i in 1..v.len() {
        let mut j = i;
        while j > 0 && v[j - 1] > v[j] {
            v.swap(j - 1, j);
            sign = -sign;
            j -= 1;
        }
    }
    if v.windows(2).any(|w| w[0] == w[1]) {
        None
    } else {
        Some((v, sign))
    }
}

/// Complement of an increasing tuple in `0..n`.
pub fn complement(n: usize, idx: &[usize]) -> Vec<usize> {
    (0..n).filter(|i| !idx.contains(i)).collect()
}

/// Sign of the shuffle permutation `(a, b)` where `a ∪ b = 0..n` disjointly.
pub fn shuffle_sign(a: &[usize], b: &[usize]) -> f64 {
    let mut inv = 0usize;
    for &x in a {
        inv += b.iter().filter(|&&y| y < x).count();
    }
    if inv % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Determinant by Leibniz expansion; intended for minors of size ≤ 4.
pub fn det_expr(m: &[Vec<Expr>]) -> Expr {
    let n = m.len();
    match n {
        0 => Expr::one(),
        1 => m[0][0].clone(),
        2 => &m[0][0] * &m[1][1] - &m[0][1] * &m[1][0],
        _ => Expr::sum((0..n).map(|j| {
            if m[0][j].is_zero() {
                return Expr::zero();
            }
            let minor: Vec<Vec<Expr>> = m[1..]
                .iter()
                .map(|row| {
                    row.iter()
                        .enumerate()
                        .filter(|(c, _)| *c != j)
                        .map(|(_, e)| e.clone())
                        .collect()
                })
                .collect();
            let t = &m[0][j] * det_expr(&minor);
            if j % 2 == 0 {
                t
            } else {
                -t
            }
        })),
    }
}

/// Inverse of a small symbolic matrix through the adjugate.
pub fn inverse_expr(m: &[Vec<Expr>]) -> Vec<Vec<Expr>> {
    let n = m.len();
    let det = det_expr(m);
    let minor = |r: usize, c: usize| -> Vec<Vec<Expr>> {
        m.iter()
            .enumerate()
            .filter(|(i, _)| *i != r)
            .map(|(_, row)| {
                row.iter()
                    .enumerate()
                    .filter(|(j, _)| *j != c)
                    .map(|(_, e)| e.clone())
                    .collect()
            })
            .collect()
    };
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let cof = det_expr(&minor(j, i));
                    let cof = if (i + j) % 2 == 0 { cof } else { -cof };
                    cof / det.clone()
                })
                .collect()
        })
        .collect()
}

/// A homogeneous alternating array of degree `degree` over `dim` slots.
#[derive(Clone, Debug, PartialEq)]
pub struct Alt {
    dim: usize,
    degree: usize,
    coeffs: Vec<Expr>,
}

impl Alt {
    pub fn zero(dim: usize, degree: usize) -> Self {
        Alt {
            dim,
            degree,
            coeffs: vec![Expr::zero(); binom(dim, degree)],
        }
    }

    /// Degree-0 element holding a single function.
    pub fn scalar(dim: usize, f: Expr) -> Self {
        Alt {
            dim,
            degree: 0,
            coeffs: vec![f],
        }
    }

    /// `f · e^{i1} ∧ … ∧ e^{ik}` for an arbitrary (unsorted) index list.
    pub fn monomial(dim: usize, idx: &[usize], f: Expr) -> Self {
        let mut a = Alt::zero(dim, idx.len());
        if let Some((sorted, s)) = sort_sign(idx) {
            a.coeffs[subset_rank(dim, &sorted)] = f.scale(s);
        }
        a
    }

    pub fn from_coeffs(dim: usize, degree: usize, coeffs: Vec<Expr>) -> Self {
        assert_eq!(coeffs.len(), binom(dim, degree), "coefficient count");
        Alt {
            dim,
            degree,
            coeffs,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn coeffs(&self) -> &[Expr] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Expr::is_zero)
    }

    /// Coefficient at an increasing tuple.
    pub fn at(&self, idx: &[usize]) -> &Expr {
        &self.coeffs[subset_rank(self.dim, idx)]
    }

    /// Sets the value on an index list in any order, so that `get` on the
    /// same list returns `f`.
    pub fn set(&mut self, idx: &[usize], f: Expr) {
        let (sorted, s) = sort_sign(idx).expect("repeated index in set");
        let r = subset_rank(self.dim, &sorted);
        self.coeffs[r] = f.scale(s);
    }

    /// Value on an arbitrary index list, with the antisymmetry sign applied.
    pub fn get(&self, idx: &[usize]) -> Expr {
        match sort_sign(idx) {
            Some((sorted, s)) => self.at(&sorted).scale(s),
            None => Expr::zero(),
        }
    }

    /// Iterator over `(increasing tuple, coefficient)`.
    pub fn iter(&self) -> impl Iterator<Item = (Vec<usize>, &Expr)> {
        subsets(self.dim, self.degree).into_iter().zip(&self.coeffs)
    }

    pub fn map(&self, mut f: impl FnMut(&Expr) -> Expr) -> Alt {
        Alt {
            dim: self.dim,
            degree: self.degree,
            coeffs: self.coeffs.iter().map(&mut f).collect(),
        }
    }

    pub fn scale(&self, c: &Expr) -> Alt {
        self.map(|e| c * e)
    }

    pub fn add(&self, other: &Alt) -> Alt {
        assert_eq!((self.dim, self.degree), (other.dim, other.degree));
        Alt {
            dim: self.dim,
            degree: self.degree,
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &Alt) -> Alt {
        assert_eq!((self.dim, self.degree), (other.dim, other.degree));
        Alt {
            dim: self.dim,
            degree: self.degree,
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    pub fn neg(&self) -> Alt {
        self.map(|e| -e)
    }

    /// Exterior product. Returns the zero array of degree `p + q` when it
    /// would exceed `dim`.
    pub fn wedge(&self, other: &Alt) -> Alt {
        assert_eq!(self.dim, other.dim, "wedge of arrays over different spaces");
        let deg = self.degree + other.degree;
        let mut out = Alt::zero(self.dim, deg);
        if deg > self.dim {
            return out;
        }
        let mut acc: Vec<Vec<Expr>> = vec![Vec::new(); out.coeffs.len()];
        for (i, a) in self.iter() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.iter() {
                if b.is_zero() {
                    continue;
                }
                let mut idx = i.clone();
                idx.extend_from_slice(&j);
                if let Some((sorted, s)) = sort_sign(&idx) {
                    acc[subset_rank(self.dim, &sorted)].push((a * b).scale(s));
                }
            }
        }
        out.coeffs = acc.into_iter().map(Expr::sum).collect();
        out
    }

    /// Interior product with a vector `v` in the first slot:
    /// `(i_v ξ)(rest) = Σ_j v^j ξ(j, rest)`.
    pub fn interior(&self, v: &[Expr]) -> Alt {
        assert!(self.degree >= 1, "interior product of a degree-0 element");
        assert_eq!(v.len(), self.dim);
        let mut out = Alt::zero(self.dim, self.degree - 1);
        for (slot, rest) in subsets(self.dim, self.degree - 1).into_iter().enumerate() {
            out.coeffs[slot] = Expr::sum((0..self.dim).filter(|j| !v[*j].is_zero()).map(|j| {
                let mut idx = vec![j];
                idx.extend_from_slice(&rest);
                &v[j] * self.get(&idx)
            }));
        }
        out
    }

    /// Pullback along a linear map `m` (rows index this space, columns the
    /// target space): `(m^*ξ)(f_A) = Σ_K ξ_K det m[K, A]`.
    pub fn pullback(&self, m: &[Vec<Expr>], target_dim: usize) -> Alt {
        assert_eq!(m.len(), self.dim);
        let k = self.degree;
        let mut out = Alt::zero(target_dim, k);
        for (slot, cols) in subsets(target_dim, k).into_iter().enumerate() {
            out.coeffs[slot] =
                Expr::sum(self.iter().filter(|(_, c)| !c.is_zero()).map(|(rows, c)| {
                    let minor: Vec<Vec<Expr>> = rows
                        .iter()
                        .map(|&r| cols.iter().map(|&cc| m[r][cc].clone()).collect())
                        .collect();
                    c * det_expr(&minor)
                }));
        }
        out
    }

    /// Pointwise maximum absolute coefficient.
    pub fn max_abs_at(&self, coords: &[f64], params: &[f64]) -> Result<f64, EvalError> {
        if self.coeffs.is_empty() {
            return Ok(0.0);
        }
        let c = Compiled::new(&self.coeffs);
        Ok(c.eval(coords, params)?
            .into_iter()
            .fold(0.0, |m, v| m.max(v.abs())))
    }
}

/// An inhomogeneous alternating element, one homogeneous part per degree.
#[derive(Clone, Debug, PartialEq)]
pub struct Mixed {
    parts: Vec<Alt>,
}

impl Mixed {
    pub fn zero(dim: usize) -> Self {
        Mixed {
            parts: (0..=dim).map(|k| Alt::zero(dim, k)).collect(),
        }
    }

    pub fn from_alt(a: Alt) -> Self {
        let mut m = Mixed::zero(a.dim());
        let k = a.degree();
        m.parts[k] = a;
        m
    }

    pub fn scalar(dim: usize, f: Expr) -> Self {
        Mixed::from_alt(Alt::scalar(dim, f))
    }

    pub fn dim(&self) -> usize {
        self.parts.len() - 1
    }

    pub fn part(&self, k: usize) -> &Alt {
        &self.parts[k]
    }

    pub fn parts(&self) -> &[Alt] {
        &self.parts
    }

    pub fn add_alt(&mut self, a: &Alt) {
        let k = a.degree();
        self.parts[k] = self.parts[k].add(a);
    }

    pub fn add(&self, other: &Mixed) -> Mixed {
        Mixed {
            parts: self
                .parts
                .iter()
                .zip(&other.parts)
                .map(|(a, b)| a.add(b))
                .collect(),
        }
    }

    pub fn sub(&self, other: &Mixed) -> Mixed {
        Mixed {
            parts: self
                .parts
                .iter()
                .zip(&other.parts)
                .map(|(a, b)| a.sub(b))
                .collect(),
        }
    }

    pub fn scale(&self, c: &Expr) -> Mixed {
        Mixed {
            parts: self.parts.iter().map(|a| a.scale(c)).collect(),
        }
    }

    pub fn map_parts(&self, f: impl Fn(&Alt) -> Alt) -> Mixed {
        let mut out = Mixed::zero(self.dim());
        for p in &self.parts {
            if !p.is_zero() {
                out.add_alt(&f(p));
            }
        }
        out
    }

    pub fn wedge(&self, other: &Mixed) -> Mixed {
        let mut out = Mixed::zero(self.dim());
        for a in &self.parts {
            if a.is_zero() {
                continue;
            }
            for b in &other.parts {
                if b.is_zero() || a.degree() + b.degree() > self.dim() {
                    continue;
                }
                out.add_alt(&a.wedge(b));
            }
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.parts.iter().all(Alt::is_zero)
    }

    pub fn max_abs_at(&self, coords: &[f64], params: &[f64]) -> Result<f64, EvalError> {
        let all: Vec<Expr> = self.parts.iter().flat_map(|p| p.coeffs.clone()).collect();
        let c = Compiled::new(&all);
        Ok(c.eval(coords, params)?
            .into_iter()
            .fold(0.0, |m, v| m.max(v.abs())))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranks_match_enumeration() {
        for n in 0..6 {
            for k in 0..=n {
                for (r, s) in subsets(n, k).iter().enumerate() {
                    assert_eq!(subset_rank(n, s), r);
                }
                assert_eq!(subsets(n, k).len(), binom(n, k));
            }
        }
    }

    #[test]
    fn wedge_is_graded_antisymmetric() {
        let e1 = Alt::monomial(3, &[0], Expr::one());
        let e2 = Alt::monomial(3, &[1], Expr::one());
        assert_eq!(e1.wedge(&e2), e2.wedge(&e1).neg());
        assert!(e1.wedge(&e1).is_zero());
    }

    #[test]
    fn interior_on_basis() {
        let e12 = Alt::monomial(2, &[0, 1], Expr::one());
        let v = vec![Expr::one(), Expr::zero()];
        assert_eq!(e12.interior(&v), Alt::monomial(2, &[1], Expr::one()));
        let w = vec![Expr::zero(), Expr::one()];
        assert_eq!(
            e12.interior(&w),
            Alt::monomial(2, &[0], Expr::constant(-1.0))
        );
    }

    #[test]
    fn determinant_of_rotation() {
        let c = Expr::constant;
        let m = vec![
            vec![c(0.0), c(-2.0), c(0.0)],
            vec![c(2.0), c(0.0), c(0.0)],
            vec![c(0.0), c(0.0), c(3.0)],
        ];
        assert_eq!(det_expr(&m).as_const(), Some(12.0));
    }
}
