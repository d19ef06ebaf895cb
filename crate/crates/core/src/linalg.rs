//! Small dense linear algebra: Pfaffians, characteristic coefficients and
//! metric-orthonormal frames.

use nalgebra::DMatrix;

use crate::{Error, Result};

pub fn to_matrix(rows: &[Vec<f64>]) -> DMatrix<f64> {
    let n = rows.len();
    DMatrix::from_fn(n, n, |i, j| rows[i][j])
}

/// Pfaffian of a skew-symmetric matrix by skew Gaussian elimination with
/// pivoting. Only the strict upper triangle is read, so `Pf([[0,a],[−a,0]]) = a`.
pub fn pfaffian(m: &DMatrix<f64>) -> f64 {
    let n = m.nrows();
    if n % 2 == 1 {
        return 0.0;
    }
    let mut a = m.clone();
    let mut pf = 1.0;
    let mut k = 0;
    while k + 1 < n {
        // bring the largest entry of column k below the diagonal to row k+1
        let (mut piv, mut best) = (k + 1, a[(k + 1, k)].abs());
        for i in k + 2..n {
            if a[(i, k)].abs() > best {
                piv = i;
                best = a[(i, k)].abs();
            }
        }
        if piv != k + 1 {
            a.swap_rows(k + 1, piv);
            a.swap_columns(k + 1, piv);
            pf = -pf;
        }
        let akk1 = a[(k, k + 1)];
        if akk1 == 0.0 {
            return 0.0;
        }
        pf *= akk1;
        if k + 2 < n {
            let tau: Vec<f64> = (k + 2..n).map(|j| a[(k, j)] / akk1).collect();
            let col: Vec<f64> = (k + 2..n).map(|i| a[(i, k + 1)]).collect();
            for (ii, i) in (k + 2..n).enumerate() {
                for (jj, j) in (k + 2..n).enumerate() {
                    a[(i, j)] += tau[ii] * col[jj] - col[ii] * tau[jj];
                }
            }
        }
        k += 2;
    }
    pf
}

/// Coefficients `c_0, …, c_n` of `det(tI + L) = Σ c_i t^{n−i}`, i.e. the
/// elementary symmetric functions of the eigenvalues, from trace powers
/// through Newton's identities.
pub fn char_coefficients(l: &DMatrix<f64>) -> Vec<f64> {
    let n = l.nrows();
    let mut powers = Vec::with_capacity(n);
    let mut p = l.clone();
    for _ in 0..n {
        powers.push(p.trace());
        p = &p * l;
    }
    let mut e = vec![1.0];
    for k in 1..=n {
        let mut s = 0.0;
        for i in 1..=k {
            let sign = if i % 2 == 1 { 1.0 } else { -1.0 };
            s += sign * e[k - i] * powers[i - 1];
        }
        e.push(s / k as f64);
    }
    e
}

/// Upper-triangular `U` with `g = UᵀU`; the columns of `U⁻¹` form a
/// `g`-orthonormal basis with the orientation of the coordinate basis.
pub fn metric_factor(g: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let asym = (g - g.transpose()).amax();
    if asym > 1e-12 * (1.0 + g.amax()) {
        return Err(Error::Precondition("metric is not symmetric".into()));
    }
    let chol = nalgebra::Cholesky::new(g.clone())
        .ok_or_else(|| Error::Precondition("metric is not positive definite".into()))?;
    Ok(chol.l().transpose())
}

/// `g L + Lᵀ g`, which vanishes iff `L` is skew for `g`.
pub fn skew_residual(l: &DMatrix<f64>, g: &DMatrix<f64>) -> f64 {
    (g * l + l.transpose() * g).amax()
}
