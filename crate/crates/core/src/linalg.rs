//! Dense and Toeplitz Hermitian helpers.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{NugsError, Result};

/// Smallest and largest eigenvalue of a Hermitian matrix.
pub fn hermitian_extremes(h: &DMatrix<Complex64>) -> (f64, f64) {
    let sym = (h + h.adjoint()) * Complex64::new(0.5, 0.0);
    let ev = sym.symmetric_eigenvalues();
    (ev.min(), ev.max())
}

/// `L^{-1}` for the Cholesky factor `G = L L^T`.
pub fn whitening(g: &DMatrix<f64>) -> Result<DMatrix<Complex64>> {
    let n = g.nrows();
    let chol = g
        .clone()
        .cholesky()
        .ok_or(NugsError::GramNotPositiveDefinite)?;
    let linv = chol
        .l()
        .solve_lower_triangular(&DMatrix::identity(n, n))
        .ok_or(NugsError::GramNotPositiveDefinite)?;
    Ok(linv.map(|v| Complex64::new(v, 0.0)))
}

/// Extreme singular values of a dense matrix from its SVD. A matrix with
/// fewer rows than columns has a kernel, so its smallest singular value is 0.
pub fn singular_extremes(a: &DMatrix<Complex64>) -> (f64, f64) {
    let s = a.clone().singular_values();
    let smin = if a.nrows() < a.ncols() { 0.0 } else { s.min() };
    (smin, s.max())
}

/// Hermitian Toeplitz matrix with first column `t` (`T[i, j] = t_{i-j}`,
/// `t_{-d} = conj(t_d)`).
#[derive(Debug, Clone)]
pub struct HermitianToeplitz {
    pub t: Vec<Complex64>,
}

impl HermitianToeplitz {
    pub fn new(t: Vec<Complex64>) -> Self {
        Self { t }
    }

    pub fn dim(&self) -> usize {
        self.t.len()
    }

    fn entry(&self, d: i64) -> Complex64 {
        if d >= 0 {
            self.t[d as usize]
        } else {
            self.t[(-d) as usize].conj()
        }
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let n = self.dim();
        DMatrix::from_fn(n, n, |i, j| self.entry(i as i64 - j as i64))
    }

    pub fn matvec(&self, x: &DVector<Complex64>) -> DVector<Complex64> {
        let n = self.dim();
        let rows: Vec<Complex64> = (0..n)
            .into_par_iter()
            .map(|i| {
                let mut s = Complex64::new(0.0, 0.0);
                for (j, xj) in x.iter().enumerate() {
                    s += self.entry(i as i64 - j as i64) * xj;
                }
                s
            })
            .collect();
        DVector::from_vec(rows)
    }

    /// Whether `T - shift I` is positive definite, by the Levinson-Durbin
    /// recursion: every prediction error must stay positive.
    pub fn is_positive_definite(&self, shift: f64) -> bool {
        let n = self.dim();
        let r0 = self.t[0].re - shift;
        if r0 <= 0.0 {
            return false;
        }
        let mut err = r0;
        let mut a = vec![Complex64::new(0.0, 0.0); n];
        a[0] = Complex64::new(1.0, 0.0);
        for k in 1..n {
            // the shift only touches lag 0, which never enters gamma
            let mut gamma = Complex64::new(0.0, 0.0);
            for j in 0..k {
                gamma += a[j] * self.t[k - j];
            }
            let kappa = -gamma / err;
            let prev = a.clone();
            for j in 1..=k {
                a[j] = prev[j] + kappa * prev[k - j].conj();
            }
            err *= 1.0 - kappa.norm_sqr();
            if err <= 0.0 || !err.is_finite() {
                return false;
            }
        }
        true
    }
}

/// Largest eigenvalue of a Hermitian positive semidefinite operator by
/// Lanczos with full reorthogonalisation.
pub fn lanczos_max<F>(n: usize, matvec: F, tol: f64) -> f64
where
    F: Fn(&DVector<Complex64>) -> DVector<Complex64>,
{
    let max_steps = n.min(400);
    // deterministic, generic start vector
    let mut q = DVector::from_fn(n, |i, _| {
        Complex64::new(1.0 + 0.5 * ((i as f64) * 0.618_033_988_75).fract(), 0.0)
    });
    q /= Complex64::new(q.norm(), 0.0);
    let mut basis: Vec<DVector<Complex64>> = Vec::with_capacity(max_steps);
    let mut alphas = Vec::new();
    let mut betas: Vec<f64> = Vec::new();
    let mut last = f64::NEG_INFINITY;
    for step in 0..max_steps {
        let mut w = matvec(&q);
        let alpha = q.dotc(&w).re;
        basis.push(q.clone());
        alphas.push(alpha);
        for _ in 0..2 {
            for v in &basis {
                let c = v.dotc(&w);
                w.axpy(-c, v, Complex64::new(1.0, 0.0));
            }
        }
        let beta = w.norm();
        let k = alphas.len();
        let tri = DMatrix::from_fn(k, k, |i, j| {
            if i == j {
                alphas[i]
            } else if i + 1 == j {
                betas[i]
            } else if j + 1 == i {
                betas[j]
            } else {
                0.0
            }
        });
        let top = tri.symmetric_eigenvalues().max();
        if (top - last).abs() <= tol * top.abs() && step > 2 || beta <= 1e-14 * top.abs() {
            return top;
        }
        last = top;
        betas.push(beta);
        q = w / Complex64::new(beta, 0.0);
    }
    last
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_symbol(n: usize) -> Vec<Complex64> {
        (0..n)
            .map(|d| {
                if d == 0 {
                    Complex64::new(3.0, 0.0)
                } else {
                    Complex64::new(0.9 / (d * d) as f64, 0.4 / (d as f64 + 1.0).powi(3))
                }
            })
            .collect()
    }

    #[test]
    fn toeplitz_matvec_matches_dense() {
        let t = HermitianToeplitz::new(sample_symbol(9));
        let x = DVector::from_fn(9, |i, _| Complex64::new(i as f64, 1.0));
        let d = t.to_dense();
        assert!((t.matvec(&x) - &d * &x).norm() < 1e-12);
        assert!((&d - d.adjoint()).norm() < 1e-15);
    }

    #[test]
    fn levinson_agrees_with_eigenvalues() {
        let t = HermitianToeplitz::new(sample_symbol(12));
        let (lo, hi) = hermitian_extremes(&t.to_dense());
        assert!(t.is_positive_definite(lo - 1e-6));
        assert!(!t.is_positive_definite(lo + 1e-6));
        assert!(!t.is_positive_definite(hi));
    }

    #[test]
    fn lanczos_finds_top_eigenvalue() {
        let t = HermitianToeplitz::new(sample_symbol(40));
        let (_, hi) = hermitian_extremes(&t.to_dense());
        let l = lanczos_max(40, |x| t.matvec(x), 1e-14);
        assert!((l - hi).abs() < 1e-10 * hi, "{l} {hi}");
    }

    #[test]
    fn wide_matrices_have_zero_smallest_singular_value() {
        let a = DMatrix::from_fn(2, 3, |i, j| Complex64::new((i + 2 * j) as f64, 1.0));
        let (lo, hi) = singular_extremes(&a);
        assert_eq!(lo, 0.0);
        assert!(hi > 0.0);
        let (lo, _) = singular_extremes(&a.adjoint());
        assert!(lo > 0.0);
    }

    #[test]
    fn whitening_inverts_gram() {
        let g = DMatrix::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 1.0]);
        let w = whitening(&g).unwrap();
        let gc = g.map(|v| Complex64::new(v, 0.0));
        let i = &w * gc * w.adjoint();
        assert!((i - DMatrix::identity(2, 2)).norm() < 1e-14);
    }
}
