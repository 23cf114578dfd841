//! Projections and `L^2(0, 1)` errors.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::signal::Signal;
use crate::error::{NugsError, Result};
use crate::quadrature::UnitRule;
use crate::wavelets::ReconstructionSpace;

fn complex_gram(space: &ReconstructionSpace) -> DMatrix<Complex64> {
    space.gram_matrix().map(|v| Complex64::new(v, 0.0))
}

/// Coefficients of `P_T f`: solves `G c = v`, `v_m = <f, phi_m>`.
pub fn project(space: &ReconstructionSpace, f: &Signal) -> Result<DVector<Complex64>> {
    let v = f.space_inner_products(space);
    if space.is_orthonormal() {
        return Ok(v);
    }
    complex_gram(space)
        .cholesky()
        .map(|c| c.solve(&v))
        .ok_or(NugsError::GramNotPositiveDefinite)
}

/// Below this fraction of `||f||^2` the expanded forms of the squared error
/// have lost too many digits to cancellation and the error is recomputed by
/// quadrature of the residual.
const CANCELLATION_FLOOR: f64 = 1e-8;

fn settle(
    space: &ReconstructionSpace,
    f: &Signal,
    c: &DVector<Complex64>,
    ff: f64,
    e2: f64,
) -> Result<f64> {
    if e2 >= CANCELLATION_FLOOR * ff {
        return Ok(e2.sqrt());
    }
    let coeffs = c.as_slice();
    let mut err = None;
    let direct = l2_error(
        f,
        |xs| match space.evaluate(coeffs, xs) {
            Ok(v) => v,
            Err(e) => {
                err = Some(e);
                vec![Complex64::new(0.0, 0.0); xs.len()]
            }
        },
        error_panels(space),
    );
    match err {
        Some(e) => Err(e),
        None => Ok(direct),
    }
}

/// `||f - P_T f|| = sqrt(||f||^2 - v^* G^{-1} v)`.
pub fn projection_error(space: &ReconstructionSpace, f: &Signal) -> Result<f64> {
    let v = f.space_inner_products(space);
    let c = project(space, f)?;
    let captured = v.dotc(&c).re;
    let ff = f.inner(f).re;
    settle(space, f, &c, ff, (ff - captured).max(0.0))
}

/// `||f - sum a_m phi_m||` from `||f||^2 - 2 Re <f, g> + a^* G a`.
pub fn space_error(
    space: &ReconstructionSpace,
    f: &Signal,
    coeffs: &DVector<Complex64>,
) -> Result<f64> {
    if coeffs.len() != space.dim() {
        return Err(NugsError::ShapeMismatch {
            expected: space.dim(),
            got: coeffs.len(),
        });
    }
    let v = f.space_inner_products(space);
    // <f, g> = sum conj(a_m) <f, phi_m>
    let fg = coeffs.dotc(&v);
    let gg = if space.is_orthonormal() {
        coeffs.norm_squared()
    } else {
        coeffs.dotc(&(complex_gram(space) * coeffs)).re
    };
    let ff = f.inner(f).re;
    settle(space, f, coeffs, ff, (ff - 2.0 * fg.re + gg).max(0.0))
}

/// `||f - g||_{L^2(0,1)}` by composite Gauss-Legendre over `panels` equal panels;
/// `g` evaluates a batch of points.
pub fn l2_error<G>(f: &Signal, g: G, panels: usize) -> f64
where
    G: FnOnce(&[f64]) -> Vec<Complex64>,
{
    let rule = UnitRule::new(10);
    let (xs, ws) = rule.composite(0.0, 1.0, panels.max(1));
    let fv = f.eval_many(&xs);
    let gv = g(&xs);
    fv.iter()
        .zip(&gv)
        .zip(&ws)
        .map(|((a, b), w)| (a - b).norm_sqr() * w)
        .sum::<f64>()
        .sqrt()
}

/// Panel count giving width `2^-(R+4)`.
pub fn error_panels(space: &ReconstructionSpace) -> usize {
    space.cells() << 4
}
