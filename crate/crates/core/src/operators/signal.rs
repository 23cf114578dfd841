//! Test signals on `[0, 1]` and their Fourier transforms.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use nalgebra::DVector;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{NugsError, Result};
use crate::quadrature::UnitRule;
use crate::wavelets::refinement::sinc;
use crate::wavelets::ReconstructionSpace;

/// Absolute accuracy targeted by quadrature-backed transforms.
pub const QUADRATURE_TOL: f64 = 1e-9;

type Evaluator = Arc<dyn Fn(f64) -> Complex64 + Send + Sync>;

/// A function supported on `[0, 1]`.
#[derive(Clone)]
pub enum Signal {
    /// `sum c e^{2 pi i nu x}` on `[0, 1]`; trigonometric polynomials and the
    /// indicator are special cases.
    Exponentials(Vec<(f64, Complex64)>),
    /// `scale sin(rate (x - center)) / (rate (x - center))`.
    Sinc {
        center: f64,
        rate: f64,
        scale: f64,
    },
    /// `sum a_m phi_m` in a reconstruction space.
    Expansion {
        space: Arc<ReconstructionSpace>,
        coeffs: Vec<Complex64>,
    },
    Sum(Vec<(Complex64, Signal)>),
    /// Pointwise closure; transforms come from panel quadrature.
    Custom {
        label: String,
        f: Evaluator,
    },
}

impl fmt::Debug for Signal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Signal::Exponentials(t) => f.debug_tuple("Exponentials").field(t).finish(),
            Signal::Sinc {
                center,
                rate,
                scale,
            } => f
                .debug_struct("Sinc")
                .field("center", center)
                .field("rate", rate)
                .field("scale", scale)
                .finish(),
            Signal::Expansion { coeffs, .. } => write!(f, "Expansion({} coeffs)", coeffs.len()),
            Signal::Sum(parts) => f.debug_tuple("Sum").field(parts).finish(),
            Signal::Custom { label, .. } => write!(f, "Custom({label})"),
        }
    }
}

/// `int_0^1 e^{2 pi i nu x} e^{-2 pi i omega x} dx`.
fn exp_hat(nu: f64, omega: f64) -> Complex64 {
    let d = omega - nu;
    Complex64::cis(-PI * d) * sinc(PI * d)
}

impl Signal {
    /// `sum_k a_k cos(2 pi k x) + b_k sin(2 pi k x)`.
    pub fn trig(terms: &[(f64, f64, f64)]) -> Signal {
        let mut out = Vec::new();
        for &(k, a, b) in terms {
            if k == 0.0 {
                out.push((0.0, Complex64::new(a, 0.0)));
                continue;
            }
            // cos = (e+ + e-)/2, sin = (e+ - e-)/(2i)
            out.push((k, Complex64::new(0.5 * a, -0.5 * b)));
            out.push((-k, Complex64::new(0.5 * a, 0.5 * b)));
        }
        Signal::Exponentials(out)
    }

    pub fn exponential(nu: f64) -> Signal {
        Signal::Exponentials(vec![(nu, Complex64::new(1.0, 0.0))])
    }

    pub fn indicator() -> Signal {
        Signal::exponential(0.0)
    }

    pub fn zero() -> Signal {
        Signal::Exponentials(Vec::new())
    }

    /// `sin(rate (x - center)) / (rate (x - center))` scaled to unit norm on `[0, 1]`.
    pub fn normalized_sinc(center: f64, rate: f64) -> Signal {
        let raw = Signal::Sinc {
            center,
            rate,
            scale: 1.0,
        };
        let n = raw.norm();
        Signal::Sinc {
            center,
            rate,
            scale: 1.0 / n,
        }
    }

    pub fn custom<F>(label: &str, f: F) -> Signal
    where
        F: Fn(f64) -> Complex64 + Send + Sync + 'static,
    {
        Signal::Custom {
            label: label.to_string(),
            f: Arc::new(f),
        }
    }

    pub fn expansion(space: Arc<ReconstructionSpace>, coeffs: Vec<Complex64>) -> Result<Signal> {
        if coeffs.len() != space.dim() {
            return Err(NugsError::ShapeMismatch {
                expected: space.dim(),
                got: coeffs.len(),
            });
        }
        Ok(Signal::Expansion { space, coeffs })
    }

    pub fn scaled(self, c: f64) -> Signal {
        Signal::Sum(vec![(Complex64::new(c, 0.0), self)])
    }

    /// `self + c g`.
    pub fn plus(self, c: f64, g: Signal) -> Signal {
        Signal::Sum(vec![
            (Complex64::new(1.0, 0.0), self),
            (Complex64::new(c, 0.0), g),
        ])
    }

    /// Collapses sums of exponential sums into a single exponential sum.
    fn as_exponentials(&self) -> Option<Vec<(f64, Complex64)>> {
        match self {
            Signal::Exponentials(t) => Some(t.clone()),
            Signal::Sum(parts) => {
                let mut out = Vec::new();
                for (c, s) in parts {
                    out.extend(s.as_exponentials()?.into_iter().map(|(nu, a)| (nu, a * c)));
                }
                Some(out)
            }
            _ => None,
        }
    }

    pub fn eval(&self, x: f64) -> Complex64 {
        if !(0.0..=1.0).contains(&x) {
            return Complex64::new(0.0, 0.0);
        }
        match self {
            Signal::Exponentials(t) => t
                .iter()
                .map(|(nu, c)| c * Complex64::cis(2.0 * PI * nu * x))
                .sum(),
            Signal::Sinc {
                center,
                rate,
                scale,
            } => Complex64::new(scale * sinc(rate * (x - center)), 0.0),
            Signal::Expansion { space, coeffs } => coeffs
                .iter()
                .enumerate()
                .map(|(m, a)| a * space.basis_value(m, x))
                .sum(),
            Signal::Sum(parts) => parts.iter().map(|(c, s)| c * s.eval(x)).sum(),
            Signal::Custom { f, .. } => f(x),
        }
    }

    pub fn eval_many(&self, xs: &[f64]) -> Vec<Complex64> {
        match self {
            Signal::Expansion { space, coeffs } => space
                .evaluate(coeffs, xs)
                .expect("expansion coefficients match the space"),
            Signal::Sum(parts) => {
                let mut out = vec![Complex64::new(0.0, 0.0); xs.len()];
                for (c, s) in parts {
                    for (o, v) in out.iter_mut().zip(s.eval_many(xs)) {
                        *o += c * v;
                    }
                }
                out
            }
            _ => xs.par_iter().map(|&x| self.eval(x)).collect(),
        }
    }

    /// `f^(omega) = int_0^1 f(x) e^{-2 pi i omega x} dx`.
    pub fn fourier(&self, omega: f64) -> Result<Complex64> {
        Ok(self.fourier_many(&[omega])?[0])
    }

    pub fn fourier_many(&self, omegas: &[f64]) -> Result<Vec<Complex64>> {
        if let Some(t) = self.as_exponentials() {
            return Ok(omegas
                .par_iter()
                .map(|&w| t.iter().map(|(nu, c)| c * exp_hat(*nu, w)).sum())
                .collect());
        }
        match self {
            Signal::Expansion { space, coeffs } => {
                let m = space.dim();
                Ok(omegas
                    .par_iter()
                    .map(|&w| {
                        let mut row = vec![Complex64::new(0.0, 0.0); m];
                        space.fourier_row(w, &mut row);
                        row.iter().zip(coeffs).map(|(r, a)| r * a).sum()
                    })
                    .collect())
            }
            Signal::Sum(parts) => {
                let mut out = vec![Complex64::new(0.0, 0.0); omegas.len()];
                for (c, s) in parts {
                    for (o, v) in out.iter_mut().zip(s.fourier_many(omegas)?) {
                        *o += c * v;
                    }
                }
                Ok(out)
            }
            _ => self.fourier_quadrature(omegas),
        }
    }

    /// Panel Gauss-Legendre with panel width at most `min(1/(4|omega|), 1/16)`,
    /// checked against a higher-order rule at the largest frequency.
    fn fourier_quadrature(&self, omegas: &[f64]) -> Result<Vec<Complex64>> {
        let wmax = omegas.iter().fold(0.0f64, |a, w| a.max(w.abs()));
        let panels = ((4.0 * wmax).ceil() as usize).max(16);
        let rule = UnitRule::new(20);
        let (xs, ws) = rule.composite(0.0, 1.0, panels);
        let fx = self.eval_many(&xs);
        let weighted: Vec<Complex64> = fx.iter().zip(&ws).map(|(v, w)| v * w).collect();
        let out: Vec<Complex64> = omegas
            .par_iter()
            .map(|&w| {
                xs.iter()
                    .zip(&weighted)
                    .map(|(&x, v)| v * Complex64::cis(-2.0 * PI * w * x))
                    .sum()
            })
            .collect();
        if let Some(imax) = (0..omegas.len())
            .max_by(|&a, &b| omegas[a].abs().partial_cmp(&omegas[b].abs()).unwrap())
        {
            let w = omegas[imax];
            let check = UnitRule::new(28).integrate_complex(0.0, 1.0, 2 * panels, |x| {
                self.eval(x) * Complex64::cis(-2.0 * PI * w * x)
            });
            let achieved = (check - out[imax]).norm();
            if achieved > QUADRATURE_TOL {
                return Err(NugsError::Quadrature { achieved });
            }
        }
        Ok(out)
    }

    /// `||f||_{L^2(0,1)}`.
    pub fn norm(&self) -> f64 {
        self.inner(self).re.max(0.0).sqrt()
    }

    /// `<f, g> = int_0^1 f conj(g)`.
    pub fn inner(&self, g: &Signal) -> Complex64 {
        if let (Some(a), Some(b)) = (self.as_exponentials(), g.as_exponentials()) {
            let mut s = Complex64::new(0.0, 0.0);
            for (nu, c) in &a {
                for (mu, d) in &b {
                    s += c * d.conj() * exp_hat(*nu, *mu);
                }
            }
            return s;
        }
        if let (
            Signal::Expansion {
                space: s1,
                coeffs: a,
            },
            Signal::Expansion {
                space: s2,
                coeffs: b,
            },
        ) = (self, g)
        {
            if Arc::ptr_eq(s1, s2) {
                let gm = s1.gram_matrix().map(|v| Complex64::new(v, 0.0));
                let av = DVector::from_column_slice(a);
                let bv = DVector::from_column_slice(b);
                return (bv.adjoint() * gm * av)[(0, 0)];
            }
        }
        // 4096 panels resolve every supported dyadic scale
        let rule = UnitRule::new(12);
        let (xs, ws) = rule.composite(0.0, 1.0, 4096);
        let f = self.eval_many(&xs);
        let h = g.eval_many(&xs);
        f.iter()
            .zip(&h)
            .zip(&ws)
            .map(|((a, b), w)| a * b.conj() * *w)
            .sum()
    }

    /// `<f, phi_m>` for every basis function of `space`.
    pub fn space_inner_products(&self, space: &ReconstructionSpace) -> DVector<Complex64> {
        if let Some(t) = self.as_exponentials() {
            let mut v = DVector::zeros(space.dim());
            for (nu, c) in t {
                v += space.exponential_inner_products(nu) * c;
            }
            return v;
        }
        match self {
            Signal::Expansion { space: s, coeffs } if std::ptr::eq(s.as_ref(), space) => {
                let gm = space.gram_matrix().map(|v| Complex64::new(v, 0.0));
                gm * DVector::from_column_slice(coeffs)
            }
            Signal::Sum(parts) => {
                let mut v = DVector::zeros(space.dim());
                for (c, s) in parts {
                    v += s.space_inner_products(space) * *c;
                }
                v
            }
            _ => space.inner_products(|x| self.eval(x)).0,
        }
    }
}

/// Named signals used in the experiments.
pub fn named_signal(name: &str) -> Result<Signal> {
    let s = match name {
        // cos(6 pi x) + 1/2 sin(2 pi x)
        "table3" => Signal::trig(&[(3.0, 1.0, 0.0), (1.0, 0.0, 0.5)]),
        // 1/2 cos(4 pi x)
        "table2" => Signal::trig(&[(2.0, 0.5, 0.0)]),
        // cos(8 pi x) - 2 sin(2 pi x)
        "table4" => Signal::trig(&[(4.0, 1.0, 0.0), (1.0, 0.0, -2.0)]),
        // sin(10 pi x) / ||sin(10 pi x)|| = sqrt(2) sin(10 pi x)
        "table4-noise" => Signal::trig(&[(5.0, 0.0, std::f64::consts::SQRT_2)]),
        // 1/2 cos(8 pi x) - sin(2 pi x)
        "fig5" => Signal::trig(&[(4.0, 0.5, 0.0), (1.0, 0.0, -1.0)]),
        "fig4" => Signal::custom("fig4", |x| {
            let v = -((6.0 * PI * x).cos() + (4.0 * PI * x).sin()).exp() * (10.0 * PI * x).cos()
                + (4.0 * PI * x).cos();
            Complex64::new(v, 0.0)
        }),
        "fig4-noise" => Signal::normalized_sinc(0.5, 14.0 * PI),
        "indicator" => Signal::indicator(),
        "zero" => Signal::zero(),
        other => {
            return Err(NugsError::InvalidParameter(format!(
                "unknown signal {other:?}; known: {}",
                SIGNAL_NAMES.join(", ")
            )))
        }
    };
    Ok(s)
}

pub const SIGNAL_NAMES: [&str; 9] = [
    "table3",
    "table2",
    "table4",
    "table4-noise",
    "fig5",
    "fig4",
    "fig4-noise",
    "indicator",
    "zero",
];
