//! Orthonormal scaling filters.
//!
//! Taps are indexed `h_k`, `k = -p+1..=p`, so that
//! `phi(x) = sqrt(2) sum_k h_k phi(2x - k)` with `supp phi = [-p+1, p]`.

use std::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2};
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{NugsError, Result};

/// Minimum-phase Daubechies taps in the usual `0..2p` ordering.
const DB2: [f64; 4] = [
    0.482_962_913_144_534_16,
    0.836_516_303_737_807_9,
    0.224_143_868_042_013_4,
    -0.129_409_522_551_260_37,
];
const DB3: [f64; 6] = [
    0.332_670_552_950_082_63,
    0.806_891_509_311_092_5,
    0.459_877_502_118_491_54,
    -0.135_011_020_010_254_58,
    -0.085_441_273_882_026_66,
    0.035_226_291_885_709_53,
];
const DB4: [f64; 8] = [
    0.230_377_813_308_896_5,
    0.714_846_570_552_915_7,
    0.630_880_767_929_858_9,
    -0.027_983_769_416_859_854,
    -0.187_034_811_719_093_09,
    0.030_841_381_835_560_764,
    0.032_883_011_666_885_2,
    -0.010_597_401_785_069_032,
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Haar,
    Daubechies,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::Haar => write!(f, "haar"),
            Family::Daubechies => write!(f, "daubechies"),
        }
    }
}

impl FromStr for Family {
    type Err = NugsError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "haar" => Ok(Family::Haar),
            "daubechies" | "db" => Ok(Family::Daubechies),
            other => Err(NugsError::UnsupportedFilter(format!(
                "unknown family {other:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingFilter {
    pub family: Family,
    pub p: usize,
    /// `taps[k + p - 1] = h_k`.
    pub taps: Vec<f64>,
}

pub fn make_filter(family: Family, p: usize) -> Result<ScalingFilter> {
    let taps: Vec<f64> = match (family, p) {
        (Family::Haar, 1) => vec![FRAC_1_SQRT_2, FRAC_1_SQRT_2],
        (Family::Daubechies, 2) => DB2.to_vec(),
        (Family::Daubechies, 3) => DB3.to_vec(),
        (Family::Daubechies, 4) => DB4.to_vec(),
        (Family::Haar, p) => {
            return Err(NugsError::UnsupportedFilter(format!(
                "Haar requires p = 1, got {p}"
            )))
        }
        (Family::Daubechies, p) => {
            return Err(NugsError::UnsupportedFilter(format!(
                "Daubechies filters are available for p in 2..=4, got {p}"
            )))
        }
    };
    let filter = ScalingFilter { family, p, taps };
    filter.check()?;
    Ok(filter)
}

impl ScalingFilter {
    pub fn is_haar(&self) -> bool {
        self.family == Family::Haar
    }

    /// Short name such as `haar` or `db2`.
    pub fn name(&self) -> String {
        match self.family {
            Family::Haar => "haar".into(),
            Family::Daubechies => format!("db{}", self.p),
        }
    }

    pub fn k_min(&self) -> i64 {
        1 - self.p as i64
    }

    pub fn k_max(&self) -> i64 {
        self.p as i64
    }

    /// `h_k`, zero outside the support.
    pub fn h(&self, k: i64) -> f64 {
        let i = k - self.k_min();
        if i < 0 || i as usize >= self.taps.len() {
            0.0
        } else {
            self.taps[i as usize]
        }
    }

    /// Highpass taps `g_k = (-1)^k h_{1-k}`.
    pub fn g(&self, k: i64) -> f64 {
        let s = if k.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
        s * self.h(1 - k)
    }

    /// `m0(xi) = 2^{-1/2} sum_k h_k e^{-2 pi i k xi}`.
    pub fn m0(&self, xi: f64) -> Complex64 {
        let mut s = Complex64::new(0.0, 0.0);
        for k in self.k_min()..=self.k_max() {
            s += Complex64::cis(-2.0 * PI * k as f64 * xi) * self.h(k);
        }
        s * FRAC_1_SQRT_2
    }

    /// Residuals of the defining conditions: `|sum h - sqrt 2|` and
    /// `max_m |sum_k h_k h_{k+2m} - delta_m0|`.
    pub fn residuals(&self) -> (f64, f64) {
        let sum: f64 = self.taps.iter().sum();
        let mut orth: f64 = 0.0;
        for m in 0..self.p as i64 {
            let s: f64 = (self.k_min()..=self.k_max())
                .map(|k| self.h(k) * self.h(k + 2 * m))
                .sum();
            let target = if m == 0 { 1.0 } else { 0.0 };
            orth = orth.max((s - target).abs());
        }
        ((sum - SQRT_2).abs(), orth)
    }

    fn check(&self) -> Result<()> {
        if self.taps.len() != 2 * self.p {
            return Err(NugsError::InvalidFilter(format!(
                "expected {} taps, got {}",
                2 * self.p,
                self.taps.len()
            )));
        }
        let (sum, orth) = self.residuals();
        if sum > 1e-14 || orth > 1e-12 {
            return Err(NugsError::InvalidFilter(format!(
                "filter conditions violated (sum residual {sum:e}, orthogonality residual {orth:e})"
            )));
        }
        Ok(())
    }
}
