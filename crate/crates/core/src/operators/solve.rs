//! Least-squares solvers for `A a ~ b`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

use super::system::LinearOperator;
use crate::error::{NugsError, Result};

pub const DEFAULT_TOL: f64 = 1e-12;

/// Above this condition number dense solves switch from CG to the SVD.
pub const SVD_SWITCH_KAPPA: f64 = 1e8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SolveMethod {
    Cg,
    Svd,
}

#[derive(Debug, Clone)]
pub struct Solution {
    pub coeffs: DVector<Complex64>,
    pub iterations: usize,
    pub converged: bool,
    /// `||A^*(b - A a)|| / ||A^* b||`.
    pub residual: f64,
    pub method: SolveMethod,
}

#[derive(Debug, Clone, Copy)]
pub struct SolveOptions {
    pub tol: f64,
    /// Defaults to `10 M` when `None`.
    pub max_iter: Option<usize>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            tol: DEFAULT_TOL,
            max_iter: None,
        }
    }
}

/// Conjugate gradients on the normal equations `A^*A a = A^*b` (CGLS form).
/// Returns the best iterate with `converged = false` when `max_iter` runs out.
pub fn solve_nugs<O: LinearOperator + ?Sized>(
    op: &O,
    b: &DVector<Complex64>,
    opts: SolveOptions,
) -> Result<Solution> {
    if b.len() != op.nrows() {
        return Err(NugsError::ShapeMismatch {
            expected: op.nrows(),
            got: b.len(),
        });
    }
    if !(opts.tol > 0.0) {
        return Err(NugsError::InvalidParameter(format!(
            "tol must be positive, got {}",
            opts.tol
        )));
    }
    let m = op.ncols();
    let max_iter = opts.max_iter.unwrap_or(10 * m).max(1);
    let mut x = DVector::zeros(m);
    let mut r = b.clone();
    let mut s = op.adjoint(&r);
    let norm0 = s.norm();
    if norm0 == 0.0 {
        return Ok(Solution {
            coeffs: x,
            iterations: 0,
            converged: true,
            residual: 0.0,
            method: SolveMethod::Cg,
        });
    }
    let mut p = s.clone();
    let mut gamma = s.norm_squared();
    let mut best = (f64::INFINITY, x.clone());
    let mut iterations = 0;
    let mut rel = 1.0;
    while iterations < max_iter {
        let q = op.apply(&p);
        let qq = q.norm_squared();
        if qq == 0.0 {
            break;
        }
        let alpha = gamma / qq;
        x.axpy(Complex64::new(alpha, 0.0), &p, Complex64::new(1.0, 0.0));
        r.axpy(Complex64::new(-alpha, 0.0), &q, Complex64::new(1.0, 0.0));
        s = op.adjoint(&r);
        let gamma_new = s.norm_squared();
        iterations += 1;
        rel = gamma_new.sqrt() / norm0;
        if rel < best.0 {
            best = (rel, x.clone());
        }
        if rel <= opts.tol {
            break;
        }
        let beta = gamma_new / gamma;
        gamma = gamma_new;
        p = &s + &p * Complex64::new(beta, 0.0);
    }
    let converged = rel <= opts.tol;
    let (residual, coeffs) = if converged { (rel, x) } else { best };
    Ok(Solution {
        coeffs,
        iterations,
        converged,
        residual,
        method: SolveMethod::Cg,
    })
}

/// Minimum-norm least squares through the SVD, discarding singular values
/// below `eps * max(N, M) * sigma_max`.
pub fn solve_svd(a: &DMatrix<Complex64>, b: &DVector<Complex64>) -> Result<Solution> {
    if b.len() != a.nrows() {
        return Err(NugsError::ShapeMismatch {
            expected: a.nrows(),
            got: b.len(),
        });
    }
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let cut = f64::EPSILON * a.nrows().max(a.ncols()) as f64 * smax;
    let coeffs = svd
        .solve(b, cut)
        .map_err(|e| NugsError::Numerical(format!("SVD solve failed: {e}")))?;
    let atb = a.ad_mul(b);
    let res = a.ad_mul(&(b - a * &coeffs));
    let residual = if atb.norm() > 0.0 {
        res.norm() / atb.norm()
    } else {
        0.0
    };
    Ok(Solution {
        coeffs,
        iterations: 0,
        converged: true,
        residual,
        method: SolveMethod::Svd,
    })
}

/// CG when `kappa <= 1e8`, otherwise the dense SVD solve.
pub fn solve_dense_auto(
    a: &DMatrix<Complex64>,
    b: &DVector<Complex64>,
    kappa: f64,
    opts: SolveOptions,
) -> Result<Solution> {
    if kappa > SVD_SWITCH_KAPPA || !kappa.is_finite() {
        solve_svd(a, b)
    } else {
        solve_nugs(a, b, opts)
    }
}
