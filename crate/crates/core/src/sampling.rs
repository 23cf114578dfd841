//! Nonuniform sampling schemes in frequency and their density-compensation
//! weights.
//!
//! A scheme is a strictly increasing list of frequencies inside `[-K, K]`
//! together with one positive weight per frequency. Density-compensated
//! ("dense") schemes carry the half-gap weights
//! `mu_n = (w_{n+1} - w_{n-1}) / 2`, where the two ghost points wrap around
//! the band: `w_0 = w_N - 2K` and `w_{N+1} = w_1 + 2K`. These telescope to
//! `sum mu_n = 2K`.
//!
//! Frame schemes (Seip's sequence) are sampled with the unweighted partial
//! frame operator; their weights are sample multiplicities.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{NugsError, Result};

/// Name of the generator used for jitter draws. Part of the scheme file format.
pub const JITTER_RNG: &str = "chacha8-u64-53bit";

/// How the weights of a scheme are to be interpreted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum SchemeKind {
    /// `(K, delta)`-dense scheme with half-gap density-compensation weights.
    #[default]
    Dense,
    /// Truncated Fourier frame; weights count repeated samples.
    Frame,
}

/// Provenance of a generated scheme.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct GeneratorInfo {
    pub family: String,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rng: Option<String>,
}

/// A finite set of sampling frequencies with weights.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplingScheme {
    pub label: String,
    pub bandwidth: f64,
    pub frequencies: Vec<f64>,
    pub weights: Vec<f64>,
    pub kind: SchemeKind,
    /// Declared density `delta` for dense schemes, if known.
    pub density: Option<f64>,
    pub generator: GeneratorInfo,
}

impl SamplingScheme {
    /// Builds a dense scheme from arbitrary frequencies, computing the
    /// density-compensation weights.
    pub fn from_frequencies(frequencies: Vec<f64>, bandwidth: f64) -> Result<Self> {
        let weights = compute_weights(&frequencies, bandwidth)?;
        let density = density_from_frequencies(&frequencies, bandwidth)?;
        Ok(Self {
            label: format!("custom K={bandwidth}"),
            bandwidth,
            frequencies,
            weights,
            kind: SchemeKind::Dense,
            density: Some(density),
            generator: GeneratorInfo {
                family: "custom".into(),
                ..Default::default()
            },
        })
    }

    /// Number of distinct frequencies.
    pub fn len(&self) -> usize {
        self.frequencies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frequencies.is_empty()
    }

    /// Number of samples `|Omega|`, counting repeated frame samples.
    pub fn sample_count(&self) -> usize {
        match self.kind {
            SchemeKind::Dense => self.len(),
            SchemeKind::Frame => self.weights.iter().sum::<f64>().round() as usize,
        }
    }

    /// Square roots of the weights, the row scaling of the measurement matrix.
    pub fn sqrt_weights(&self) -> Vec<f64> {
        self.weights.iter().map(|w| w.sqrt()).collect()
    }

    /// Checks every structural invariant of the scheme.
    pub fn validate(&self) -> Result<()> {
        if !(self.bandwidth > 0.0) {
            return Err(NugsError::InvalidParameter(format!(
                "bandwidth must be positive, got {}",
                self.bandwidth
            )));
        }
        check_frequencies(&self.frequencies, self.bandwidth)?;
        if self.weights.len() != self.frequencies.len() {
            return Err(NugsError::ShapeMismatch {
                expected: self.frequencies.len(),
                got: self.weights.len(),
            });
        }
        if let Some(i) = self.weights.iter().position(|w| !(*w > 0.0)) {
            return Err(NugsError::InvalidParameter(format!(
                "weight {i} is not positive ({})",
                self.weights[i]
            )));
        }
        Ok(())
    }

    /// Returns the same scheme with frequencies (and their weights) permuted.
    /// Only useful for testing order-independence of downstream code; the
    /// result deliberately violates the ordering invariant.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let mut out = self.clone();
        out.frequencies = perm.iter().map(|&i| self.frequencies[i]).collect();
        out.weights = perm.iter().map(|&i| self.weights[i]).collect();
        out
    }

    /// Serializes to the scheme file format. Numbers carry 17 significant
    /// digits so every binary double round-trips exactly.
    pub fn to_json(&self) -> String {
        let mut s = String::new();
        s.push_str("{\n");
        let _ = writeln!(
            s,
            "  \"label\": {},",
            serde_json::to_string(&self.label).unwrap()
        );
        let _ = writeln!(
            s,
            "  \"kind\": \"{}\",",
            match self.kind {
                SchemeKind::Dense => "dense",
                SchemeKind::Frame => "frame",
            }
        );
        let _ = writeln!(s, "  \"bandwidth\": {},", fmt17(self.bandwidth));
        match self.density {
            Some(d) => {
                let _ = writeln!(s, "  \"density\": {},", fmt17(d));
            }
            None => s.push_str("  \"density\": null,\n"),
        }
        let _ = writeln!(s, "  \"frequencies\": {},", fmt_list(&self.frequencies));
        let _ = writeln!(s, "  \"weights\": {},", fmt_list(&self.weights));
        s.push_str("  \"generator\": {\n");
        let _ = writeln!(
            s,
            "    \"family\": {},",
            serde_json::to_string(&self.generator.family).unwrap()
        );
        let params: Vec<String> = self
            .generator
            .params
            .iter()
            .map(|(k, v)| format!("{}: {}", serde_json::to_string(k).unwrap(), fmt17(*v)))
            .collect();
        let _ = writeln!(s, "    \"params\": {{{}}},", params.join(", "));
        if let Some(rng) = &self.generator.rng {
            let _ = writeln!(s, "    \"rng\": {},", serde_json::to_string(rng).unwrap());
        }
        match self.generator.seed {
            Some(seed) => {
                let _ = writeln!(s, "    \"seed\": {seed}");
            }
            None => s.push_str("    \"seed\": null\n"),
        }
        s.push_str("  }\n}\n");
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: SchemeFile = serde_json::from_str(text)?;
        let scheme = Self {
            label: file.label,
            bandwidth: file.bandwidth,
            frequencies: file.frequencies,
            weights: file.weights,
            kind: file.kind,
            density: file.density,
            generator: file.generator,
        };
        scheme.validate()?;
        Ok(scheme)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

#[derive(Deserialize)]
struct SchemeFile {
    label: String,
    #[serde(default)]
    kind: SchemeKind,
    bandwidth: f64,
    #[serde(default)]
    density: Option<f64>,
    frequencies: Vec<f64>,
    weights: Vec<f64>,
    #[serde(default)]
    generator: GeneratorInfo,
}

fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

fn fmt_list(xs: &[f64]) -> String {
    let parts: Vec<String> = xs.iter().map(|&x| fmt17(x)).collect();
    format!("[{}]", parts.join(", "))
}

fn check_frequencies(frequencies: &[f64], bandwidth: f64) -> Result<()> {
    if frequencies.is_empty() {
        return Err(NugsError::InvalidParameter("empty sampling scheme".into()));
    }
    for (i, &w) in frequencies.iter().enumerate() {
        if !w.is_finite() || w.abs() > bandwidth {
            return Err(NugsError::OutOfBand {
                index: i,
                value: w,
                bandwidth,
            });
        }
    }
    if let Some(i) = frequencies.windows(2).position(|p| !(p[1] > p[0])) {
        return Err(NugsError::NotIncreasing { index: i + 1 });
    }
    Ok(())
}

/// Half-gap density-compensation weights with wrap-around ghost points.
pub fn compute_weights(frequencies: &[f64], bandwidth: f64) -> Result<Vec<f64>> {
    check_frequencies(frequencies, bandwidth)?;
    let n = frequencies.len();
    let lower_ghost = frequencies[n - 1] - 2.0 * bandwidth;
    let upper_ghost = frequencies[0] + 2.0 * bandwidth;
    let at = |i: isize| -> f64 {
        if i < 0 {
            lower_ghost
        } else if i as usize >= n {
            upper_ghost
        } else {
            frequencies[i as usize]
        }
    };
    let weights: Vec<f64> = (0..n as isize)
        .map(|i| 0.5 * (at(i + 1) - at(i - 1)))
        .collect();
    if let Some(i) = weights.iter().position(|w| !(*w > 0.0)) {
        return Err(NugsError::InvalidParameter(format!(
            "weight {i} is not positive; bandwidth too small for the frequency set"
        )));
    }
    Ok(weights)
}

fn density_from_frequencies(frequencies: &[f64], bandwidth: f64) -> Result<f64> {
    check_frequencies(frequencies, bandwidth)?;
    let span = frequencies[frequencies.len() - 1] - frequencies[0];
    let wrap = 2.0 * bandwidth - span;
    Ok(frequencies
        .windows(2)
        .map(|p| p[1] - p[0])
        .fold(wrap, f64::max))
}

/// Largest gap of the scheme, including the two wrap-around gaps, relative
/// to bandwidth `bandwidth`. The scheme is `(K, d)`-dense for every `d`
/// at least this value.
pub fn density_of(scheme: &SamplingScheme, bandwidth: f64) -> Result<f64> {
    density_from_frequencies(&scheme.frequencies, bandwidth)
}

/// Jittered grid `w_n = n eps + eta_n`, `n = -floor(K/eps)..floor(K/eps)`,
/// with `eta_n` uniform in `(-eta, eta)`.
///
/// Jitter is drawn from ChaCha8 seeded by `seed`; each draw takes one `u64`,
/// keeps its top 53 bits as `u` in `[0, 1)` (redrawing `u = 0`) and maps it to
/// `eta (2u - 1)`. Interior gaps are at most `eps + 2 eta`; the declared
/// density is the larger of that and the wrap-around gap.
pub fn jittered_scheme(bandwidth: f64, eps: f64, eta: f64, seed: u64) -> Result<SamplingScheme> {
    if !(bandwidth > 0.0) || !(eps > 0.0 && eps < 1.0) || !(0.0..1.0).contains(&eta) {
        return Err(NugsError::InvalidParameter(format!(
            "jittered scheme needs K > 0, eps in (0,1), eta in [0,1); got K={bandwidth}, eps={eps}, eta={eta}"
        )));
    }
    let delta = eps + 2.0 * eta;
    if delta >= 1.0 {
        return Err(NugsError::InvalidParameter(format!(
            "eps + 2 eta = {delta} must be below 1"
        )));
    }
    let half = (bandwidth / eps).floor() as i64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut frequencies: Vec<f64> = (-half..=half)
        .map(|n| {
            let u = loop {
                let u = (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
                if u > 0.0 {
                    break u;
                }
            };
            n as f64 * eps + eta * (2.0 * u - 1.0)
        })
        .collect();
    if frequencies.windows(2).any(|p| !(p[1] > p[0])) {
        frequencies.sort_by(f64::total_cmp);
        if let Some(i) = frequencies.windows(2).position(|p| p[1] == p[0]) {
            return Err(NugsError::NotIncreasing { index: i + 1 });
        }
    }
    let band = bandwidth + eta;
    let weights = compute_weights(&frequencies, band)?;
    // the wrap-around gap exceeds eps + 2 eta when K / eps is far from an integer
    let delta = delta.max(density_from_frequencies(&frequencies, band)?);
    let mut params = BTreeMap::new();
    params.insert("K".into(), bandwidth);
    params.insert("eps".into(), eps);
    params.insert("eta".into(), eta);
    Ok(SamplingScheme {
        label: format!("jittered K={bandwidth} eps={eps} eta={eta} seed={seed}"),
        bandwidth: band,
        frequencies,
        weights,
        kind: SchemeKind::Dense,
        density: Some(delta),
        generator: GeneratorInfo {
            family: "jittered".into(),
            params,
            seed: Some(seed),
            rng: Some(JITTER_RNG.into()),
        },
    })
}

/// Logarithmically spaced scheme `{-w_n} u {w_n}`,
/// `w_n = 10^(-nu + (n / Nt)(log10 K + nu))`, `n = 0..Nt`, with
/// `Nt = ceil(-(log10 K + nu) / log10(1 - delta / K))`.
pub fn log_scheme(bandwidth: f64, delta: f64, nu: f64) -> Result<SamplingScheme> {
    if !(bandwidth > 0.0) || !(delta > 0.0 && delta < 1.0) || !(nu > 0.0) {
        return Err(NugsError::InvalidParameter(format!(
            "log scheme needs K > 0, delta in (0,1), nu > 0; got K={bandwidth}, delta={delta}, nu={nu}"
        )));
    }
    if !(delta < bandwidth) {
        return Err(NugsError::InvalidParameter(format!(
            "log scheme needs delta < K (delta={delta}, K={bandwidth})"
        )));
    }
    if !(2.0 * 10f64.powf(-nu) < delta) {
        return Err(NugsError::InvalidParameter(format!(
            "log scheme needs 2*10^-nu < delta (nu={nu}, delta={delta})"
        )));
    }
    let span = bandwidth.log10() + nu;
    if !(span > 0.0) {
        return Err(NugsError::InvalidParameter(format!(
            "log scheme needs log10 K + nu > 0 (K={bandwidth}, nu={nu})"
        )));
    }
    let half = (-span / (1.0 - delta / bandwidth).log10()).ceil() as usize;
    let mut positive: Vec<f64> = (0..=half)
        .map(|n| 10f64.powf(-nu + (n as f64 / half as f64) * span))
        .collect();
    // The last point is K in exact arithmetic.
    positive[half] = bandwidth;
    let mut frequencies: Vec<f64> = positive.iter().rev().map(|w| -w).collect();
    frequencies.extend_from_slice(&positive);
    let weights = compute_weights(&frequencies, bandwidth)?;
    let mut params = BTreeMap::new();
    params.insert("K".into(), bandwidth);
    params.insert("delta".into(), delta);
    params.insert("nu".into(), nu);
    Ok(SamplingScheme {
        label: format!("log K={bandwidth} delta={delta} nu={nu}"),
        bandwidth,
        frequencies,
        weights,
        kind: SchemeKind::Dense,
        density: Some(delta),
        generator: GeneratorInfo {
            family: "log".into(),
            params,
            seed: None,
            rng: None,
        },
    })
}

/// Truncation `{w_n : 1 <= |n| <= N}` of Seip's frame `w_n = n (1 - |n|^(-1/2))`.
///
/// `w_1 = w_-1 = 0`, so zero is stored once with multiplicity two; all
/// other samples carry weight one (unweighted partial frame operator).
pub fn seip_scheme(n: usize) -> Result<SamplingScheme> {
    if n < 2 {
        return Err(NugsError::InvalidParameter(format!(
            "Seip scheme needs N >= 2 (N = 1 gives the single repeated frequency 0), got {n}"
        )));
    }
    let positive: Vec<f64> = (2..=n)
        .map(|k| {
            let k = k as f64;
            k * (1.0 - 1.0 / k.sqrt())
        })
        .collect();
    let mut frequencies: Vec<f64> = positive.iter().rev().map(|w| -w).collect();
    frequencies.push(0.0);
    frequencies.extend_from_slice(&positive);
    let mut weights = vec![1.0; frequencies.len()];
    weights[n - 1] = 2.0;
    let bandwidth = positive[positive.len() - 1];
    let mut params = BTreeMap::new();
    params.insert("N".into(), n as f64);
    Ok(SamplingScheme {
        label: format!("seip N={n}"),
        bandwidth,
        frequencies,
        weights,
        kind: SchemeKind::Frame,
        density: None,
        generator: GeneratorInfo {
            family: "seip".into(),
            params,
            seed: None,
            rng: None,
        },
    })
}

/// Uniform grid `n eps`, `n = -floor(K/eps)..floor(K/eps)`, with
/// density-compensation weights for bandwidth `K`.
pub fn uniform_scheme(bandwidth: f64, eps: f64) -> Result<SamplingScheme> {
    if !(bandwidth > 0.0) || !(eps > 0.0 && eps <= 1.0) {
        return Err(NugsError::InvalidParameter(format!(
            "uniform scheme needs K > 0, eps in (0,1]; got K={bandwidth}, eps={eps}"
        )));
    }
    let half = (bandwidth / eps).floor() as i64;
    let frequencies: Vec<f64> = (-half..=half).map(|n| n as f64 * eps).collect();
    let weights = compute_weights(&frequencies, bandwidth)?;
    let density = density_from_frequencies(&frequencies, bandwidth)?;
    let mut params = BTreeMap::new();
    params.insert("K".into(), bandwidth);
    params.insert("eps".into(), eps);
    Ok(SamplingScheme {
        label: format!("uniform K={bandwidth} eps={eps}"),
        bandwidth,
        frequencies,
        weights,
        kind: SchemeKind::Dense,
        density: Some(density),
        generator: GeneratorInfo {
            family: "uniform".into(),
            params,
            seed: None,
            rng: None,
        },
    })
}
