//! Stability constants `C1`, `C3`, the `C2` limit, reconstruction bounds,
//! condition numbers and z-residuals.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{NugsError, Result};
use crate::linalg::{
    hermitian_extremes, lanczos_max, singular_extremes, whitening, HermitianToeplitz,
};
use crate::operators::system::{build_matrix, normal_matrix, toeplitz_symbol, FactoredOperator};
use crate::operators::DEFAULT_MEMORY_LIMIT;
use crate::quadrature::UnitRule;
use crate::sampling::SamplingScheme;
use crate::wavelets::refinement::haar_hat;
use crate::wavelets::ReconstructionSpace;

/// Eigenvalue ratios above this are recomputed from an SVD of `A`.
const EIG_KAPPA_LIMIT: f64 = 1e8;

/// Largest Haar dimension used for the `C2` limit.
pub const C2_CAP: usize = 4096;

/// `A^* A` for a scheme and space.
pub fn normal_equations(
    scheme: &SamplingScheme,
    space: &ReconstructionSpace,
) -> DMatrix<Complex64> {
    normal_matrix(&FactoredOperator::new(scheme, space))
}

/// `(c1, c3)`: extreme eigenvalues of `A^*A` relative to the Gram matrix.
pub fn quadratic_form_extrema(
    scheme: &SamplingScheme,
    space: &ReconstructionSpace,
) -> Result<(f64, f64)> {
    let h = normal_equations(scheme, space);
    let (h, w) = if space.is_orthonormal() {
        (h, None)
    } else {
        let w = whitening(space.gram_matrix())?;
        (&w * h * w.adjoint(), Some(w))
    };
    let (lo, hi) = hermitian_extremes(&h);
    if hi <= 0.0 {
        return Err(NugsError::Numerical("A is zero".into()));
    }
    if lo > hi / EIG_KAPPA_LIMIT {
        return Ok((lo, hi));
    }
    // small c1 is lost to round-off in A^*A; take it from the SVD instead
    let mut a = build_matrix(scheme, space, DEFAULT_MEMORY_LIMIT)?;
    if let Some(w) = w {
        a *= w.adjoint();
    }
    let (smin, smax) = singular_extremes(&a);
    Ok((smin * smin, smax * smax))
}

/// `sigma_max(A) / sigma_min(A)`; infinite when `sigma_min` vanishes.
pub fn condition_number(scheme: &SamplingScheme, space: &ReconstructionSpace) -> Result<f64> {
    let h = normal_equations(scheme, space);
    let (lo, hi) = hermitian_extremes(&h);
    if lo > hi / EIG_KAPPA_LIMIT {
        return Ok((hi / lo).sqrt());
    }
    let a = build_matrix(scheme, space, DEFAULT_MEMORY_LIMIT)?;
    Ok(matrix_condition_number(&a))
}

/// Condition number from the full SVD of a dense matrix.
pub fn matrix_condition_number(a: &DMatrix<Complex64>) -> f64 {
    let (smin, smax) = singular_extremes(a);
    if smin == 0.0 {
        f64::INFINITY
    } else {
        smax / smin
    }
}

/// `A^*A` on the Haar space of dimension `dim` as a Toeplitz matrix.
pub fn haar_normal_toeplitz(scheme: &SamplingScheme, dim: usize) -> HermitianToeplitz {
    let m = dim as f64;
    let xi: Vec<f64> = scheme.frequencies.iter().map(|w| w / m).collect();
    let factor: Vec<Complex64> = xi
        .iter()
        .zip(&scheme.weights)
        .map(|(&x, &mu)| haar_hat(x) * (mu / m).sqrt())
        .collect();
    HermitianToeplitz::new(toeplitz_symbol(&xi, &factor, dim - 1))
}

/// `C3(Omega, T_dim)` for the Haar space of dimension `dim`.
pub fn haar_c3(scheme: &SamplingScheme, dim: usize) -> f64 {
    let t = haar_normal_toeplitz(scheme, dim);
    lanczos_max(dim, |x| t.matvec(x), 1e-13)
}

#[derive(Debug, Clone, Serialize)]
pub struct C2Estimate {
    pub value: f64,
    /// `(dimension, C3)` per level.
    pub trace: Vec<(usize, f64)>,
    pub converged: bool,
}

/// `C2` as the limit of `C3` over nested Haar spaces of dimension `2^q`,
/// `q = q0, q0 + 1, ...`, until the relative change drops below `tol` or the
/// dimension reaches `cap`.
pub fn c2_estimate(scheme: &SamplingScheme, tol: f64, q0: u32, cap: usize) -> Result<C2Estimate> {
    if cap < (1usize << q0) {
        return Err(NugsError::InvalidParameter(format!(
            "cap {cap} below 2^{q0}"
        )));
    }
    let mut trace: Vec<(usize, f64)> = Vec::new();
    let mut q = q0;
    loop {
        let dim = 1usize << q;
        let v = haar_c3(scheme, dim);
        // nested spaces: round-off must not break monotonicity
        let v = trace.last().map_or(v, |&(_, prev)| v.max(prev));
        let done = trace
            .last()
            .is_some_and(|&(_, prev)| (v - prev).abs() <= tol * v);
        trace.push((dim, v));
        if done {
            return Ok(C2Estimate {
                value: v,
                trace,
                converged: true,
            });
        }
        if dim * 2 > cap {
            return Ok(C2Estimate {
                value: v,
                trace,
                converged: false,
            });
        }
        q += 1;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundMode {
    Dense,
    Frame,
}

/// `(1 + delta) / sqrt(c1)` for dense schemes, `sqrt(c2) / sqrt(c1)` for frames.
pub fn reconstruction_bound(
    c1: f64,
    mode: BoundMode,
    delta: Option<f64>,
    c2: Option<f64>,
) -> Result<f64> {
    if !(c1 > 0.0) {
        return Err(NugsError::Numerical(format!(
            "c1 = {c1:e}: reconstruction is unstable"
        )));
    }
    match mode {
        BoundMode::Dense => {
            let d = delta
                .ok_or_else(|| NugsError::InvalidParameter("dense bound needs delta".into()))?;
            Ok((1.0 + d) / c1.sqrt())
        }
        BoundMode::Frame => {
            let c2 =
                c2.ok_or_else(|| NugsError::InvalidParameter("frame bound needs c2".into()))?;
            Ok((c2 / c1).sqrt())
        }
    }
}

/// Explicit bound for Haar spaces of dimension `M <= 2K`.
pub fn haar_bound(delta: f64, m: usize, bandwidth: f64) -> Result<f64> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(NugsError::InvalidParameter(format!(
            "delta must lie in (0, 1), got {delta}"
        )));
    }
    if m == 0 || m as f64 > 2.0 * bandwidth {
        return Err(NugsError::InvalidParameter(format!(
            "haar bound needs 0 < M <= 2K (M = {m}, K = {bandwidth})"
        )));
    }
    let ratio = (1.0 + delta) / (1.0 - delta);
    let q = 2.0 * bandwidth / m as f64;
    if (q - q.round()).abs() < 1e-12 {
        return Ok(PI / 2.0 * ratio);
    }
    if m < 2 {
        return Err(NugsError::InvalidParameter("case (ii) needs M >= 2".into()));
    }
    let x = PI / 2.0 + PI * delta / m as f64;
    Ok(ratio * x / x.sin())
}

/// `E(T, z)`: the largest fraction of Fourier energy outside `(-z, z)` of a
/// unit-norm element of `T`, from `E^2 = 1 - lambda_min(G_z, G)`.
pub fn z_residual(space: &ReconstructionSpace, z: f64) -> Result<f64> {
    if !(z >= 0.0) {
        return Err(NugsError::InvalidParameter(format!(
            "z must be >= 0, got {z}"
        )));
    }
    if z == 0.0 {
        return Ok(1.0);
    }
    let panels = (8.0 * z).ceil() as usize;
    let (nodes, weights) = UnitRule::new(10).composite(-z, z, panels);
    let b = space.basis_fourier(&nodes);
    let m = space.dim();
    let mut gz = DMatrix::<Complex64>::zeros(m, m);
    let scaled = DMatrix::from_fn(b.nrows(), m, |i, j| b[(i, j)] * weights[i].sqrt());
    gz.gemm_ad(
        Complex64::new(1.0, 0.0),
        &scaled,
        &scaled,
        Complex64::new(0.0, 0.0),
    );
    let gz = if space.is_orthonormal() {
        gz
    } else {
        let w = whitening(space.gram_matrix())?;
        &w * gz * w.adjoint()
    };
    let (lo, _) = hermitian_extremes(&gz);
    Ok((1.0 - lo).clamp(0.0, 1.0).sqrt())
}

#[derive(Debug, Clone, Serialize)]
pub struct ConstantsReport {
    pub c1: f64,
    pub c3: f64,
    pub c2_estimate: f64,
    pub c2_trace: Vec<(usize, f64)>,
    pub c2_converged: bool,
    pub kappa: f64,
    pub bound_dense: Option<f64>,
    pub bound_frame: f64,
    pub haar_bound: Option<f64>,
    pub z_residuals: Option<Vec<(f64, f64)>>,
}

#[derive(Debug, Clone)]
pub struct ReportOptions {
    /// Density of the scheme; enables the dense and Haar bounds.
    pub delta: Option<f64>,
    pub c2_tol: f64,
    pub c2_q0: u32,
    pub c2_cap: usize,
    pub z_values: Vec<f64>,
}

impl Default for ReportOptions {
    fn default() -> Self {
        Self {
            delta: None,
            c2_tol: 1e-6,
            c2_q0: 6,
            c2_cap: C2_CAP,
            z_values: Vec::new(),
        }
    }
}

pub fn constants_report(
    scheme: &SamplingScheme,
    space: &ReconstructionSpace,
    opts: &ReportOptions,
) -> Result<ConstantsReport> {
    let (c1, c3) = quadratic_form_extrema(scheme, space)?;
    let kappa = if space.is_orthonormal() {
        (c3 / c1).sqrt()
    } else {
        condition_number(scheme, space)?
    };
    let c2 = c2_estimate(scheme, opts.c2_tol, opts.c2_q0, opts.c2_cap)?;
    let c2_value = c2.value.max(c3);
    let bound_dense = match opts.delta {
        Some(d) => Some(reconstruction_bound(c1, BoundMode::Dense, Some(d), None)?),
        None => None,
    };
    let bound_frame = reconstruction_bound(c1, BoundMode::Frame, None, Some(c2_value))?;
    let haar = match opts.delta {
        Some(d) if space.filter.is_haar() && d < 1.0 => {
            haar_bound(d, space.dim(), scheme.bandwidth).ok()
        }
        _ => None,
    };
    let z_residuals = if opts.z_values.is_empty() {
        None
    } else {
        Some(
            opts.z_values
                .iter()
                .map(|&z| z_residual(space, z).map(|e| (z, e)))
                .collect::<Result<Vec<_>>>()?,
        )
    };
    Ok(ConstantsReport {
        c1,
        c3,
        c2_estimate: c2_value,
        c2_trace: c2.trace,
        c2_converged: c2.converged,
        kappa,
        bound_dense,
        bound_frame,
        haar_bound: haar,
        z_residuals,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::{jittered_scheme, log_scheme};
    use crate::wavelets::{build_space, make_filter, BoundaryType, Family};

    fn haar(r: u32) -> ReconstructionSpace {
        build_space(
            &make_filter(Family::Haar, 1).unwrap(),
            r,
            0,
            BoundaryType::Periodic,
        )
        .unwrap()
    }

    #[test]
    fn haar_bound_values() {
        assert!((haar_bound(0.8, 64, 32.0).unwrap() - 14.137167).abs() < 5e-7);
        assert!((haar_bound(0.9, 64, 64.0).unwrap() - 29.845130).abs() < 5e-7);
        // case (ii) tends to pi/2 times the ratio
        let big = haar_bound(0.5, 100_000, 50_000.3).unwrap();
        assert!((big / 3.0 - PI / 2.0).abs() < 1e-4);
        assert!(haar_bound(0.8, 65, 32.0).is_err());
        assert!(haar_bound(1.0, 64, 32.0).is_err());
    }

    #[test]
    fn toeplitz_normal_matrix_matches_dense() {
        let s = log_scheme(16.0, 0.8, 0.4).unwrap();
        let space = haar(5);
        let t = haar_normal_toeplitz(&s, 32).to_dense();
        let h = normal_equations(&s, &space);
        assert!((t - h).iter().map(|z| z.norm()).fold(0.0, f64::max) < 1e-12);
    }

    #[test]
    fn extrema_and_kappa() {
        let s = jittered_scheme(32.0, 0.6, 0.1, 7).unwrap();
        let space = haar(6);
        let (c1, c3) = quadratic_form_extrema(&s, &space).unwrap();
        assert!(0.0 < c1 && c1 <= c3);
        let d = s.density.unwrap();
        assert!(c3 <= (1.0 + d).powi(2) * (1.0 + 1e-10));
        let a = build_matrix(&s, &space, DEFAULT_MEMORY_LIMIT).unwrap();
        let k = matrix_condition_number(&a);
        assert!(((c3 / c1).sqrt() - k).abs() < 1e-8 * k);
        assert!((condition_number(&s, &space).unwrap() - k).abs() < 1e-8 * k);
    }

    #[test]
    fn c2_trace_is_monotone_and_bounded() {
        let s = log_scheme(16.0, 0.8, 0.4).unwrap();
        let est = c2_estimate(&s, 1e-9, 3, 1024).unwrap();
        for w in est.trace.windows(2) {
            assert!(w[1].1 >= w[0].1);
        }
        assert!(est.value <= 1.8f64.powi(2) * (1.0 + 1e-10));
    }

    #[test]
    fn z_residual_limits_and_monotonicity() {
        let space = haar(3);
        assert_eq!(z_residual(&space, 0.0).unwrap(), 1.0);
        let mut prev = 1.0;
        for z in [0.5, 2.0, 8.0, 32.0] {
            let e = z_residual(&space, z).unwrap();
            assert!(e <= prev + 1e-12, "{z}: {e} > {prev}");
            prev = e;
        }
        // E^2 is at least the tail energy of a single basis function
        let inside =
            UnitRule::new(20).integrate(-32.0, 32.0, 512, |w| haar_hat(w / 8.0).norm_sqr() / 8.0);
        assert!(prev * prev >= 1.0 - inside - 1e-9);
        assert!(prev < 1.0);
    }

    #[test]
    fn bounds() {
        assert!(
            (reconstruction_bound(0.25, BoundMode::Dense, Some(0.5), None).unwrap() - 3.0).abs()
                < 1e-15
        );
        assert!(
            (reconstruction_bound(0.25, BoundMode::Frame, None, Some(4.0)).unwrap() - 4.0).abs()
                < 1e-15
        );
        assert!(reconstruction_bound(0.0, BoundMode::Frame, None, Some(4.0)).is_err());
    }
}
