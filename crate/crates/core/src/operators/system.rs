//! The weighted sampling operator `A[n, m] = sqrt(mu_n) phi_m^(omega_n)`.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;

use super::signal::Signal;
use crate::error::{NugsError, Result};
use crate::sampling::SamplingScheme;
use crate::wavelets::ReconstructionSpace;

/// Default cap on dense matrix entries.
pub const DEFAULT_MEMORY_LIMIT: usize = 1 << 26;

/// A linear map `C^M -> C^N` with an adjoint.
pub trait LinearOperator: Sync {
    fn nrows(&self) -> usize;
    fn ncols(&self) -> usize;
    fn apply(&self, x: &DVector<Complex64>) -> DVector<Complex64>;
    fn adjoint(&self, y: &DVector<Complex64>) -> DVector<Complex64>;
}

/// `b[n] = sqrt(mu_n) f^(omega_n)`.
pub fn measure(f: &Signal, scheme: &SamplingScheme) -> Result<DVector<Complex64>> {
    let vals = f.fourier_many(&scheme.frequencies)?;
    Ok(DVector::from_iterator(
        vals.len(),
        vals.iter().zip(&scheme.weights).map(|(v, w)| v * w.sqrt()),
    ))
}

/// `b + eta * measure(h)`.
pub fn perturb_measurements(
    b: &DVector<Complex64>,
    h: &Signal,
    eta: f64,
    scheme: &SamplingScheme,
) -> Result<DVector<Complex64>> {
    if eta < 0.0 {
        return Err(NugsError::InvalidParameter(format!(
            "eta must be >= 0, got {eta}"
        )));
    }
    if b.len() != scheme.len() {
        return Err(NugsError::ShapeMismatch {
            expected: scheme.len(),
            got: b.len(),
        });
    }
    if eta == 0.0 {
        return Ok(b.clone());
    }
    Ok(b + measure(h, scheme)? * Complex64::new(eta, 0.0))
}

/// Dense `N x M` matrix `A`; rows computed in parallel.
pub fn build_matrix(
    scheme: &SamplingScheme,
    space: &ReconstructionSpace,
    limit: usize,
) -> Result<DMatrix<Complex64>> {
    let (n, m) = (scheme.len(), space.dim());
    if n.saturating_mul(m) > limit {
        return Err(NugsError::TooLarge {
            rows: n,
            cols: m,
            limit,
        });
    }
    let rows: Vec<Vec<Complex64>> = scheme
        .frequencies
        .par_iter()
        .zip(&scheme.weights)
        .map(|(&w, &mu)| {
            let mut row = vec![Complex64::new(0.0, 0.0); m];
            space.fourier_row(w, &mut row);
            let s = mu.sqrt();
            row.iter_mut().for_each(|z| *z *= s);
            row
        })
        .collect();
    Ok(DMatrix::from_fn(n, m, |i, j| rows[i][j]))
}

#[derive(Debug, Clone)]
pub struct MeasurementSystem {
    pub scheme: SamplingScheme,
    pub space: Arc<ReconstructionSpace>,
    pub a: DMatrix<Complex64>,
    pub b: DVector<Complex64>,
}

pub fn build_system(
    f: &Signal,
    scheme: &SamplingScheme,
    space: Arc<ReconstructionSpace>,
) -> Result<MeasurementSystem> {
    build_system_with_limit(f, scheme, space, DEFAULT_MEMORY_LIMIT)
}

pub fn build_system_with_limit(
    f: &Signal,
    scheme: &SamplingScheme,
    space: Arc<ReconstructionSpace>,
    limit: usize,
) -> Result<MeasurementSystem> {
    let a = build_matrix(scheme, &space, limit)?;
    let b = measure(f, scheme)?;
    Ok(MeasurementSystem {
        scheme: scheme.clone(),
        space,
        a,
        b,
    })
}

impl MeasurementSystem {
    /// Header line for CSV dumps: `N,M,scheme label,space descriptor`.
    fn csv_header(&self) -> String {
        format!(
            "{},{},{},{}",
            self.a.nrows(),
            self.a.ncols(),
            self.scheme.label,
            self.space.descriptor()
        )
    }

    /// Column-major `re,im` pairs of `A`, one entry per line.
    pub fn matrix_csv(&self) -> String {
        let mut out = self.csv_header();
        out.push('\n');
        for z in self.a.iter() {
            let _ = writeln!(out, "{:.17e},{:.17e}", z.re, z.im);
        }
        out
    }

    pub fn rhs_csv(&self) -> String {
        let mut out = self.csv_header();
        out.push('\n');
        for z in self.b.iter() {
            let _ = writeln!(out, "{:.17e},{:.17e}", z.re, z.im);
        }
        out
    }
}

impl LinearOperator for DMatrix<Complex64> {
    fn nrows(&self) -> usize {
        self.nrows()
    }
    fn ncols(&self) -> usize {
        self.ncols()
    }
    fn apply(&self, x: &DVector<Complex64>) -> DVector<Complex64> {
        self * x
    }
    fn adjoint(&self, y: &DVector<Complex64>) -> DVector<Complex64> {
        self.ad_mul(y)
    }
}

impl LinearOperator for MeasurementSystem {
    fn nrows(&self) -> usize {
        self.a.nrows()
    }
    fn ncols(&self) -> usize {
        self.a.ncols()
    }
    fn apply(&self, x: &DVector<Complex64>) -> DVector<Complex64> {
        &self.a * x
    }
    fn adjoint(&self, y: &DVector<Complex64>) -> DVector<Complex64> {
        self.a.ad_mul(y)
    }
}

/// Matrix-free `A`: columns that are plain dilates `phi_{R,k}` share the
/// factor `sqrt(mu_n) 2^{-R/2} phi^(omega_n / 2^R)` and a nonuniform DFT in `k`;
/// the remaining (edge) columns are stored explicitly.
#[derive(Debug, Clone)]
pub struct FactoredOperator {
    xi: Vec<f64>,
    /// `sqrt(mu_n) 2^{-R/2} phi^(xi_n)`.
    factor: Vec<Complex64>,
    /// `(column, k)` for plain-dilate columns.
    interior: Vec<(usize, i64)>,
    edge_cols: Vec<usize>,
    /// `N x |edge_cols|`, already weighted.
    edge: DMatrix<Complex64>,
    ncols: usize,
}

const RESYNC: usize = 64;

impl FactoredOperator {
    pub fn new(scheme: &SamplingScheme, space: &ReconstructionSpace) -> Self {
        let ncell = space.cells() as f64;
        let xi: Vec<f64> = scheme.frequencies.iter().map(|w| w / ncell).collect();
        let scale = ncell.sqrt().recip();
        let factor: Vec<Complex64> = xi
            .par_iter()
            .zip(&scheme.weights)
            .map(|(&x, &mu)| space.pieces.scaling_fourier(x) * (scale * mu.sqrt()))
            .collect();
        let mut interior = Vec::new();
        let mut edge_cols = Vec::new();
        for m in 0..space.dim() {
            match plain_dilate(space, m) {
                Some(k) => interior.push((m, k)),
                None => edge_cols.push(m),
            }
        }
        let n = scheme.len();
        let cols: Vec<Vec<Complex64>> = edge_cols
            .par_iter()
            .map(|&m| {
                space
                    .fourier_column(m, &scheme.frequencies)
                    .into_iter()
                    .zip(&scheme.weights)
                    .map(|(z, mu)| z * mu.sqrt())
                    .collect()
            })
            .collect();
        let edge = DMatrix::from_fn(n, edge_cols.len(), |i, j| cols[j][i]);
        Self {
            xi,
            factor,
            interior,
            edge_cols,
            edge,
            ncols: space.dim(),
        }
    }

    pub fn interior_count(&self) -> usize {
        self.interior.len()
    }

    pub fn edge_columns(&self) -> &[usize] {
        &self.edge_cols
    }
}

/// `Some(k)` when basis function `m` is exactly `phi_{R,k}` with full support in `[0, 1]`.
pub fn plain_dilate(space: &ReconstructionSpace, m: usize) -> Option<i64> {
    let k = space.basis[m].shift?;
    let terms = &space.basis[m].terms;
    if terms.len() != space.pieces.count() {
        return None;
    }
    terms
        .iter()
        .all(|t| !t.reversed && t.coeff == 1.0 && t.cell as i64 == t.piece + k)
        .then_some(k)
}

impl LinearOperator for FactoredOperator {
    fn nrows(&self) -> usize {
        self.xi.len()
    }

    fn ncols(&self) -> usize {
        self.ncols
    }

    fn apply(&self, x: &DVector<Complex64>) -> DVector<Complex64> {
        let xe = DVector::from_iterator(self.edge_cols.len(), self.edge_cols.iter().map(|&m| x[m]));
        let mut y = &self.edge * xe;
        let sums: Vec<Complex64> = self
            .xi
            .par_iter()
            .map(|&xi| {
                let step = Complex64::cis(-2.0 * PI * xi);
                let mut s = Complex64::new(0.0, 0.0);
                let mut ph = Complex64::new(1.0, 0.0);
                let mut prev_k = i64::MIN;
                for (i, &(m, k)) in self.interior.iter().enumerate() {
                    if i % RESYNC == 0 || k != prev_k + 1 {
                        ph = Complex64::cis(-2.0 * PI * k as f64 * xi);
                    } else {
                        ph *= step;
                    }
                    prev_k = k;
                    s += x[m] * ph;
                }
                s
            })
            .collect();
        for (n, s) in sums.into_iter().enumerate() {
            y[n] += self.factor[n] * s;
        }
        y
    }

    fn adjoint(&self, y: &DVector<Complex64>) -> DVector<Complex64> {
        let mut out = DVector::zeros(self.ncols);
        let ye = self.edge.ad_mul(y);
        for (j, &m) in self.edge_cols.iter().enumerate() {
            out[m] = ye[j];
        }
        let g: Vec<Complex64> = self
            .factor
            .iter()
            .zip(y.iter())
            .map(|(f, v)| f.conj() * v)
            .collect();
        let vals: Vec<(usize, Complex64)> = self
            .interior
            .par_chunks(RESYNC)
            .flat_map_iter(|chunk| {
                let k0 = chunk[0].1;
                let mut acc = vec![Complex64::new(0.0, 0.0); chunk.len()];
                for (&xi, gn) in self.xi.iter().zip(&g) {
                    let step = Complex64::cis(2.0 * PI * xi);
                    let mut ph = Complex64::cis(2.0 * PI * k0 as f64 * xi) * gn;
                    let mut prev_k = k0;
                    for (a, &(_, k)) in acc.iter_mut().zip(chunk) {
                        if k != prev_k {
                            ph = if k == prev_k + 1 {
                                ph * step
                            } else {
                                Complex64::cis(2.0 * PI * k as f64 * xi) * gn
                            };
                            prev_k = k;
                        }
                        *a += ph;
                    }
                }
                chunk.iter().map(|&(m, _)| m).zip(acc).collect::<Vec<_>>()
            })
            .collect();
        for (m, v) in vals {
            out[m] = v;
        }
        out
    }
}

/// `A^* A` for the factored operator. The plain-dilate block is Toeplitz,
/// `t_d = sum_n |factor_n|^2 e^{2 pi i d xi_n}`, so it costs `O(N M)`.
pub fn normal_matrix(op: &FactoredOperator) -> DMatrix<Complex64> {
    let m = op.ncols;
    let mut g = DMatrix::zeros(m, m);
    if !op.interior.is_empty() {
        let kmin = op.interior.iter().map(|p| p.1).min().unwrap();
        let kmax = op.interior.iter().map(|p| p.1).max().unwrap();
        let span = (kmax - kmin) as usize;
        let t = toeplitz_symbol(&op.xi, &op.factor, span);
        for &(ma, ka) in &op.interior {
            for &(mb, kb) in &op.interior {
                // (A^*A)[a, b] = sum conj(A[n,a]) A[n,b], phases e^{2 pi i (ka - kb) xi}
                let d = ka - kb;
                g[(ma, mb)] = if d >= 0 {
                    t[d as usize]
                } else {
                    t[(-d) as usize].conj()
                };
            }
        }
    }
    for (j, &me) in op.edge_cols.iter().enumerate() {
        let col = op.edge.column(j).into_owned();
        let v = op.adjoint(&col);
        for i in 0..m {
            // v[i] = sum conj(A[n,i]) A[n,me]
            g[(i, me)] = v[i];
            g[(me, i)] = v[i].conj();
        }
    }
    g
}

/// `t_d = sum_n |f_n|^2 e^{2 pi i d xi_n}` for `d = 0..=span`.
pub fn toeplitz_symbol(xi: &[f64], factor: &[Complex64], span: usize) -> Vec<Complex64> {
    xi.par_iter()
        .zip(factor)
        .fold(
            || vec![Complex64::new(0.0, 0.0); span + 1],
            |mut acc, (&x, f)| {
                let w = f.norm_sqr();
                let step = Complex64::cis(2.0 * PI * x);
                let mut ph = Complex64::new(w, 0.0);
                for (d, a) in acc.iter_mut().enumerate() {
                    if d % RESYNC == 0 {
                        ph = Complex64::cis(2.0 * PI * d as f64 * x) * w;
                    }
                    *a += ph;
                    ph *= step;
                }
                acc
            },
        )
        .reduce(
            || vec![Complex64::new(0.0, 0.0); span + 1],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        )
}
