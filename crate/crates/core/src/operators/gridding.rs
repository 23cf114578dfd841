//! Density-compensated gridding, the baseline `S f(x) = sum mu_n f^(omega_n) e^{2 pi i omega_n x}`.

use num_complex::Complex64;

use super::signal::Signal;
use crate::error::{NugsError, Result};
use crate::sampling::SamplingScheme;

/// Gridding reconstruction from transform samples `f^(omega_n)`, as a signal on `[0, 1]`.
pub fn gridding_reconstruct(scheme: &SamplingScheme, samples: &[Complex64]) -> Result<Signal> {
    if samples.len() != scheme.len() {
        return Err(NugsError::ShapeMismatch {
            expected: scheme.len(),
            got: samples.len(),
        });
    }
    Ok(Signal::Exponentials(
        scheme
            .frequencies
            .iter()
            .zip(&scheme.weights)
            .zip(samples)
            .map(|((&w, &mu), &v)| (w, v * mu))
            .collect(),
    ))
}

/// Same, from weighted measurements `b_n = sqrt(mu_n) f^(omega_n)`.
pub fn gridding_from_measurements(scheme: &SamplingScheme, b: &[Complex64]) -> Result<Signal> {
    let samples: Vec<Complex64> = b
        .iter()
        .zip(&scheme.weights)
        .map(|(v, mu)| v / mu.sqrt())
        .collect();
    gridding_reconstruct(scheme, &samples)
}
