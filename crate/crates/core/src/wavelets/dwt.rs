//! Discrete wavelet transform between `V_R` and `V_J + W_J + ... + W_{R-1}`.
//!
//! Supported for periodic spaces (any filter) and for Haar in every boundary
//! type, where the multiresolution is the plain periodised one. Coefficients
//! are laid out as `[a_J, d_J, d_{J+1}, ..., d_{R-1}]`.

use num_complex::Complex64;

use super::space::{BoundaryType, ReconstructionSpace};
use crate::error::{NugsError, Result};

fn check(space: &ReconstructionSpace, len: usize) -> Result<()> {
    if space.boundary != BoundaryType::Periodic && !space.filter.is_haar() {
        return Err(NugsError::InvalidSpace(format!(
            "wavelet transform is only available for periodic spaces or Haar, got {} {}",
            space.filter.name(),
            space.boundary
        )));
    }
    if len != space.dim() {
        return Err(NugsError::ShapeMismatch {
            expected: space.dim(),
            got: len,
        });
    }
    Ok(())
}

/// Scaling coefficients at level `R` to `[a_J, d_J, ..., d_{R-1}]`.
pub fn dwt(space: &ReconstructionSpace, coeffs: &[Complex64]) -> Result<Vec<Complex64>> {
    check(space, coeffs.len())?;
    let f = &space.filter;
    let mut out = coeffs.to_vec();
    let mut len = coeffs.len();
    for _ in space.j..space.r {
        let half = len / 2;
        let a = out[..len].to_vec();
        for k in 0..half {
            let mut s = Complex64::new(0.0, 0.0);
            let mut d = Complex64::new(0.0, 0.0);
            for m in f.k_min()..=f.k_max() {
                let n = (2 * k as i64 + m).rem_euclid(len as i64) as usize;
                s += a[n] * f.h(m);
            }
            for m in 1 - f.k_max()..=1 - f.k_min() {
                let n = (2 * k as i64 + m).rem_euclid(len as i64) as usize;
                d += a[n] * f.g(m);
            }
            out[k] = s;
            out[half + k] = d;
        }
        len = half;
    }
    Ok(out)
}

/// Inverse of [`dwt`].
pub fn idwt(space: &ReconstructionSpace, coeffs: &[Complex64]) -> Result<Vec<Complex64>> {
    check(space, coeffs.len())?;
    let f = &space.filter;
    let mut out = coeffs.to_vec();
    let mut half = coeffs.len() >> (space.r - space.j);
    for _ in space.j..space.r {
        let len = 2 * half;
        let mut a = vec![Complex64::new(0.0, 0.0); len];
        for k in 0..half {
            for m in f.k_min()..=f.k_max() {
                let n = (2 * k as i64 + m).rem_euclid(len as i64) as usize;
                a[n] += out[k] * f.h(m);
            }
            for m in 1 - f.k_max()..=1 - f.k_min() {
                let n = (2 * k as i64 + m).rem_euclid(len as i64) as usize;
                a[n] += out[half + k] * f.g(m);
            }
        }
        out[..len].copy_from_slice(&a);
        half = len;
    }
    Ok(out)
}
