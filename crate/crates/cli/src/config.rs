//! Flat `key=value` configuration files; command-line flags win.

use std::path::{Path, PathBuf};

use clap::Args;

#[derive(Debug, Clone, Default, Args)]
pub struct Settings {
    /// Flat key=value file; flags given on the command line override it.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long = "scheme-file", global = true)]
    pub scheme_file: Option<PathBuf>,
    /// log | jittered | seip | uniform; inferred from the other flags if absent.
    #[arg(long, global = true)]
    pub scheme: Option<String>,
    #[arg(long, global = true)]
    pub family: Option<String>,
    #[arg(long, global = true)]
    pub p: Option<usize>,
    #[arg(long = "R", global = true)]
    pub r: Option<u32>,
    #[arg(long = "J", global = true)]
    pub j: Option<u32>,
    #[arg(long = "type", global = true)]
    pub boundary: Option<String>,
    #[arg(long, global = true)]
    pub signal: Option<String>,
    #[arg(long = "K", global = true)]
    pub k: Option<f64>,
    #[arg(long, global = true)]
    pub delta: Option<f64>,
    #[arg(long, global = true)]
    pub nu: Option<f64>,
    #[arg(long, global = true)]
    pub eps: Option<f64>,
    #[arg(long, global = true)]
    pub eta: Option<f64>,
    #[arg(long = "N", global = true)]
    pub n: Option<usize>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    #[arg(long = "max-iter", global = true)]
    pub max_iter: Option<usize>,
    /// Noise signal `h` added as `eta_noise * h` to the measurements.
    #[arg(long, global = true)]
    pub noise: Option<String>,
    #[arg(long = "noise-level", global = true)]
    pub noise_level: Option<f64>,
    /// Comma-separated `z` values for the z-residuals in `constants`.
    #[arg(long, global = true, value_delimiter = ',')]
    pub z: Option<Vec<f64>>,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// CSV of `x, f, reconstruction, |error|` on a `2^(R+4)` grid.
    #[arg(long, global = true)]
    pub plot: Option<PathBuf>,
    /// Directory receiving `A.csv` and `b.csv`.
    #[arg(long, global = true)]
    pub dump: Option<PathBuf>,
}

fn parse<T: std::str::FromStr>(key: &str, v: &str) -> Result<T, String> {
    v.parse().map_err(|_| format!("bad value for {key}: {v:?}"))
}

impl Settings {
    pub fn from_text(text: &str) -> Result<Self, String> {
        let mut s = Settings::default();
        for (no, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, v) = line
                .split_once('=')
                .ok_or_else(|| format!("line {}: expected key=value", no + 1))?;
            let (key, v) = (key.trim(), v.trim());
            match key {
                "scheme-file" | "scheme_file" => s.scheme_file = Some(v.into()),
                "scheme" => s.scheme = Some(v.into()),
                "family" => s.family = Some(v.into()),
                "p" => s.p = Some(parse(key, v)?),
                "R" => s.r = Some(parse(key, v)?),
                "J" => s.j = Some(parse(key, v)?),
                "type" => s.boundary = Some(v.into()),
                "signal" => s.signal = Some(v.into()),
                "K" => s.k = Some(parse(key, v)?),
                "delta" => s.delta = Some(parse(key, v)?),
                "nu" => s.nu = Some(parse(key, v)?),
                "eps" => s.eps = Some(parse(key, v)?),
                "eta" => s.eta = Some(parse(key, v)?),
                "N" => s.n = Some(parse(key, v)?),
                "seed" => s.seed = Some(parse(key, v)?),
                "tol" => s.tol = Some(parse(key, v)?),
                "max-iter" | "max_iter" => s.max_iter = Some(parse(key, v)?),
                "noise" => s.noise = Some(v.into()),
                "noise-level" | "noise_level" => s.noise_level = Some(parse(key, v)?),
                "z" => {
                    s.z = Some(
                        v.split(',')
                            .map(|x| parse(key, x.trim()))
                            .collect::<Result<_, _>>()?,
                    )
                }
                "out" => s.out = Some(v.into()),
                "plot" => s.plot = Some(v.into()),
                "dump" => s.dump = Some(v.into()),
                other => return Err(format!("line {}: unknown key {other:?}", no + 1)),
            }
        }
        Ok(s)
    }

    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        Self::from_text(&text)
    }

    /// Fields set in `self` win over `base`.
    pub fn over(self, base: Settings) -> Settings {
        macro_rules! pick {
            ($($f:ident),*) => { Settings { $($f: self.$f.or(base.$f)),* } };
        }
        pick!(
            config,
            scheme_file,
            scheme,
            family,
            p,
            r,
            j,
            boundary,
            signal,
            k,
            delta,
            nu,
            eps,
            eta,
            n,
            seed,
            tol,
            max_iter,
            noise,
            noise_level,
            z,
            out,
            plot,
            dump
        )
    }

    /// Reads `--config` if given and applies the flags on top.
    pub fn resolve(self) -> Result<Settings, String> {
        match &self.config {
            Some(path) => {
                let base = Settings::load(path)?;
                Ok(self.over(base))
            }
            None => Ok(self),
        }
    }
}
