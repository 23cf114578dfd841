//! End-to-end pipelines and the table scans.

use nalgebra::DVector;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::constants::{
    condition_number, haar_bound, haar_c3, haar_normal_toeplitz, matrix_condition_number,
    normal_equations, quadratic_form_extrema, C2_CAP,
};
use crate::error::{NugsError, Result};
use crate::operators::{
    build_matrix, gridding_from_measurements, measure, named_signal, perturb_measurements,
    projection_error, solve_dense_auto, solve_nugs, space_error, FactoredOperator, Signal,
    SolveMethod, SolveOptions, DEFAULT_MEMORY_LIMIT, SVD_SWITCH_KAPPA,
};
use crate::sampling::{jittered_scheme, log_scheme, seip_scheme, SamplingScheme};
use crate::wavelets::{build_space, make_filter, BoundaryType, Family, ReconstructionSpace};

/// Default seed for jittered schemes in the tables.
pub const DEFAULT_SEED: u64 = 1;

#[derive(Debug, Clone, Serialize)]
pub struct ReconstructionReport {
    pub scheme: String,
    pub samples: usize,
    pub dim: usize,
    pub error: f64,
    pub projection_error: f64,
    pub ratio: f64,
    pub kappa: f64,
    pub iterations: usize,
    pub converged: bool,
    pub residual: f64,
    pub method: SolveMethod,
}

/// Measures `f + eta h`, solves for the NUGS coefficients and reports
/// `||f - f~||`, `||f - P_T f||` and `kappa(A)`. CG runs matrix-free unless
/// `kappa > 1e8`, where a dense SVD solve is used.
pub fn reconstruct(
    scheme: &SamplingScheme,
    space: &ReconstructionSpace,
    f: &Signal,
    noise: Option<(&Signal, f64)>,
    opts: SolveOptions,
) -> Result<(ReconstructionReport, DVector<Complex64>)> {
    let mut b = measure(f, scheme)?;
    if let Some((h, eta)) = noise {
        b = perturb_measurements(&b, h, eta, scheme)?;
    }
    let kappa = condition_number(scheme, space)?;
    let sol = if kappa > SVD_SWITCH_KAPPA || !kappa.is_finite() {
        let a = build_matrix(scheme, space, DEFAULT_MEMORY_LIMIT)?;
        solve_dense_auto(&a, &b, kappa, opts)?
    } else {
        solve_nugs(&FactoredOperator::new(scheme, space), &b, opts)?
    };
    let error = space_error(space, f, &sol.coeffs)?;
    let proj = projection_error(space, f)?;
    let report = ReconstructionReport {
        scheme: scheme.label.clone(),
        samples: scheme.sample_count(),
        dim: space.dim(),
        error,
        projection_error: proj,
        ratio: error / proj,
        kappa,
        iterations: sol.iterations,
        converged: sol.converged,
        residual: sol.residual,
        method: sol.method,
    };
    Ok((report, sol.coeffs))
}

fn haar_space(r: u32) -> Result<ReconstructionSpace> {
    build_space(&make_filter(Family::Haar, 1)?, r, 0, BoundaryType::Periodic)
}

fn log2_exact(n: usize) -> Result<u32> {
    if n.is_power_of_two() && n >= 4 {
        Ok(n.trailing_zeros())
    } else {
        Err(NugsError::InvalidParameter(format!(
            "dimension {n} is not a power of two >= 4"
        )))
    }
}

// ---------------------------------------------------------------- table 3

#[derive(Debug, Clone, Serialize)]
pub struct Table3Row {
    pub scheme: String,
    #[serde(rename = "K")]
    pub bandwidth: f64,
    pub samples: usize,
    pub dim: usize,
    pub error: f64,
    pub projection_error: f64,
    pub ratio: f64,
    pub kappa: f64,
    /// `sigma_max(A_4096) / sigma_min(A)`.
    pub sigma_ratio: f64,
    /// `(1 + delta) / sigma_min(A)`.
    pub bound_dense: Option<f64>,
    pub haar_bound: Option<f64>,
    pub seed: Option<u64>,
}

/// One row: Haar reconstruction of the Table 3 function in dimension `dim`.
pub fn table3_row(scheme: &SamplingScheme, dim: usize, opts: SolveOptions) -> Result<Table3Row> {
    let space = haar_space(log2_exact(dim)?)?;
    let f = named_signal("table3")?;
    let (rep, _) = reconstruct(scheme, &space, &f, None, opts)?;
    let (c1, _) = quadratic_form_extrema(scheme, &space)?;
    let c3_big = haar_c3(scheme, C2_CAP);
    let k = scheme
        .generator
        .params
        .get("K")
        .copied()
        .unwrap_or(scheme.bandwidth);
    let (bound_dense, hb) = match scheme.density {
        Some(d) => (Some((1.0 + d) / c1.sqrt()), haar_bound(d, dim, k).ok()),
        None => (None, None),
    };
    Ok(Table3Row {
        scheme: scheme.generator.family.clone(),
        bandwidth: k,
        samples: scheme.sample_count(),
        dim,
        error: rep.error,
        projection_error: rep.projection_error,
        ratio: rep.ratio,
        kappa: rep.kappa,
        sigma_ratio: (c3_big / c1).sqrt(),
        bound_dense,
        haar_bound: hb,
        seed: scheme.generator.seed,
    })
}

/// Seip truncation order for each Table 3 frame row (`|Omega| = 2N`).
pub const TABLE3_SEIP_N: [usize; 4] = [38, 72, 139, 272];

/// All twelve rows: jittered (eps 0.6, eta 0.1), log (delta 0.8, nu 0.4) and
/// Seip frame schemes for `K = 32, 64, 128, 256` and `2^R = 2K`.
pub fn table3(seed: u64, opts: SolveOptions) -> Result<Vec<Table3Row>> {
    let ks = [32.0, 64.0, 128.0, 256.0];
    let mut jobs: Vec<(SamplingScheme, usize)> = Vec::new();
    for &k in &ks {
        jobs.push((jittered_scheme(k, 0.6, 0.1, seed)?, 2 * k as usize));
    }
    for &k in &ks {
        jobs.push((log_scheme(k, 0.8, 0.4)?, 2 * k as usize));
    }
    for (&k, &n) in ks.iter().zip(&TABLE3_SEIP_N) {
        let mut s = seip_scheme(n)?;
        s.generator.params.insert("K".into(), k);
        jobs.push((s, 2 * k as usize));
    }
    jobs.iter().map(|(s, d)| table3_row(s, *d, opts)).collect()
}

// ---------------------------------------------------------------- table 2

#[derive(Debug, Clone, Serialize)]
pub struct BlowupRow {
    pub space: String,
    pub c0: f64,
    #[serde(rename = "K")]
    pub bandwidth: f64,
    pub samples: usize,
    pub kappa: f64,
    pub ratio: f64,
    pub method: SolveMethod,
    pub seed: u64,
}

/// `kappa(A)` and the error ratio for jittered schemes with `K = c0 2^R`.
#[allow(clippy::too_many_arguments)]
pub fn blowup_scan(
    space: &ReconstructionSpace,
    c_list: &[f64],
    eps: f64,
    eta: f64,
    seed: u64,
    f: &Signal,
    opts: SolveOptions,
) -> Result<Vec<BlowupRow>> {
    let proj = projection_error(space, f)?;
    c_list
        .par_iter()
        .map(|&c0| {
            let k = c0 * space.dim() as f64;
            let scheme = jittered_scheme(k, eps, eta, seed)?;
            let a = build_matrix(&scheme, space, DEFAULT_MEMORY_LIMIT)?;
            let kappa = matrix_condition_number(&a);
            let b = measure(f, &scheme)?;
            let sol = solve_dense_auto(&a, &b, kappa, opts)?;
            let err = space_error(space, f, &sol.coeffs)?;
            Ok(BlowupRow {
                space: space_name(space),
                c0,
                bandwidth: k,
                samples: scheme.sample_count(),
                kappa,
                ratio: err / proj,
                method: sol.method,
                seed,
            })
        })
        .collect()
}

pub const TABLE2_C0: [f64; 6] = [0.3125, 0.375, 0.4375, 0.5, 0.5625, 0.625];

/// Haar and periodic DB4 at `2^R = 64`, jittered eps 0.6, eta 0.15,
/// `f = 1/2 cos(4 pi x)`.
pub fn table2(seed: u64, opts: SolveOptions) -> Result<Vec<BlowupRow>> {
    let f = named_signal("table2")?;
    let mut out = blowup_scan(&haar_space(6)?, &TABLE2_C0, 0.6, 0.15, seed, &f, opts)?;
    let db4 = build_space(
        &make_filter(Family::Daubechies, 4)?,
        6,
        3,
        BoundaryType::Periodic,
    )?;
    out.extend(blowup_scan(&db4, &TABLE2_C0, 0.6, 0.15, seed, &f, opts)?);
    Ok(out)
}

pub fn space_name(space: &ReconstructionSpace) -> String {
    if space.filter.is_haar() {
        "haar".into()
    } else {
        format!("{}-{}", space.filter.name(), space.boundary)
    }
}

// ---------------------------------------------------------------- table 1

/// Whether `A^*A - t G` is positive definite, i.e. `C1 > t`.
pub fn c1_exceeds(scheme: &SamplingScheme, space: &ReconstructionSpace, t: f64) -> Result<bool> {
    if space.filter.is_haar() && space.boundary == BoundaryType::Periodic {
        return Ok(haar_normal_toeplitz(scheme, space.dim()).is_positive_definite(t));
    }
    let h = normal_equations(scheme, space);
    let g = space.gram_matrix().map(|v| Complex64::new(v * t, 0.0));
    Ok((h - g).cholesky().is_some())
}

/// Smallest integer in `(lo, hi]` with `pred` true, given `pred(hi)`.
fn bisect<F: Fn(usize) -> Result<bool>>(mut lo: usize, mut hi: usize, pred: F) -> Result<usize> {
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if pred(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Smallest `K` with `(1 + delta) / sqrt(C1) <= threshold` for log schemes:
/// scans `K = 2^k`, `k = 3..=12`, then bisects on integers.
pub fn min_log_bandwidth(
    space: &ReconstructionSpace,
    delta: f64,
    nu: f64,
    threshold: f64,
) -> Result<usize> {
    let t = ((1.0 + delta) / threshold).powi(2);
    let pred = |k: usize| -> Result<bool> {
        if (k as f64) <= delta {
            return Ok(false);
        }
        c1_exceeds(&log_scheme(k as f64, delta, nu)?, space, t)
    };
    let mut lo = 1;
    for e in 3..=12 {
        let k = 1usize << e;
        if pred(k)? {
            return bisect(lo, k, pred);
        }
        lo = k;
    }
    Err(NugsError::Numerical(format!(
        "no K <= 4096 reaches C <= {threshold}"
    )))
}

/// Smallest Seip order `N` with `sqrt(C3(T_4096)) / sqrt(C1(T)) <= threshold`.
pub fn min_seip_order(space: &ReconstructionSpace, threshold: f64) -> Result<usize> {
    let pred = |n: usize| -> Result<bool> {
        let s = seip_scheme(n)?;
        let t = haar_c3(&s, C2_CAP) / (threshold * threshold);
        c1_exceeds(&s, space, t)
    };
    let mut lo = 1;
    for e in 1..=13 {
        let n = 1usize << e;
        if n >= 2 && pred(n)? {
            return bisect(lo.max(1), n, |m| if m < 2 { Ok(false) } else { pred(m) });
        }
        lo = n;
    }
    Err(NugsError::Numerical(format!(
        "no N <= 8192 reaches C <= {threshold}"
    )))
}

#[derive(Debug, Clone, Serialize)]
pub struct Table1Row {
    pub space: String,
    pub dim: usize,
    pub log_k: usize,
    pub frame_n: usize,
    pub delta: f64,
    pub nu: f64,
    pub threshold: f64,
}

/// Minimal log-scheme `K` (delta 0.95, nu 0.33) and Seip `N` with estimated
/// reconstruction constant at most 100, for `2^R = 32..=1024`.
pub fn table1(
    filter_family: Family,
    p: usize,
    boundary: BoundaryType,
    dims: &[usize],
) -> Result<Vec<Table1Row>> {
    let filter = make_filter(filter_family, p)?;
    dims.par_iter()
        .map(|&dim| {
            let r = log2_exact(dim)?;
            let j = if boundary == BoundaryType::Boundary {
                r - 1
            } else {
                0
            };
            let space = build_space(&filter, r, j, boundary)?;
            Ok(Table1Row {
                space: space_name(&space),
                dim,
                log_k: min_log_bandwidth(&space, 0.95, 0.33, 100.0)?,
                frame_n: min_seip_order(&space, 100.0)?,
                delta: 0.95,
                nu: 0.33,
                threshold: 100.0,
            })
        })
        .collect()
}

pub const TABLE1_DIMS: [usize; 6] = [32, 64, 128, 256, 512, 1024];

// ---------------------------------------------------------------- table 4

#[derive(Debug, Clone, Serialize)]
pub struct Table4Row {
    pub space: String,
    pub eta: f64,
    pub error: f64,
    pub estimate: f64,
    pub projection_error: f64,
    /// `sqrt(C3(T_4096) / C1(T))`.
    pub c_tilde: f64,
    /// `C3(T_4096) / C1(T)` without square roots.
    pub c_ratio: f64,
}

pub const TABLE4_ETAS: [f64; 5] = [0.0, 0.05, 0.1, 0.2, 0.4];

/// Noisy reconstructions `F(f + eta h)` for one space; log scheme `K = 128`,
/// delta 0.95, nu 0.33.
pub fn table4_space(
    space: &ReconstructionSpace,
    etas: &[f64],
    opts: SolveOptions,
) -> Result<Vec<Table4Row>> {
    let scheme = log_scheme(128.0, 0.95, 0.33)?;
    let f = named_signal("table4")?;
    let h = named_signal("table4-noise")?;
    let (c1, _) = quadratic_form_extrema(&scheme, space)?;
    let c3 = haar_c3(&scheme, C2_CAP);
    let c_tilde = (c3 / c1).sqrt();
    let hn = h.norm();
    etas.iter()
        .map(|&eta| {
            let (rep, _) = reconstruct(&scheme, space, &f, Some((&h, eta)), opts)?;
            Ok(Table4Row {
                space: space_name(space),
                eta,
                error: rep.error,
                estimate: c_tilde * (rep.projection_error + eta * hn),
                projection_error: rep.projection_error,
                c_tilde,
                c_ratio: c3 / c1,
            })
        })
        .collect()
}

/// Haar, periodic DB2 and boundary DB2 at `2^R = 128`.
pub fn table4(opts: SolveOptions) -> Result<Vec<Table4Row>> {
    let db2 = make_filter(Family::Daubechies, 2)?;
    let spaces = [
        haar_space(7)?,
        build_space(&db2, 7, 2, BoundaryType::Periodic)?,
        build_space(&db2, 7, 2, BoundaryType::Boundary)?,
    ];
    let mut out = Vec::new();
    for s in &spaces {
        out.extend(table4_space(s, &TABLE4_ETAS, opts)?);
    }
    Ok(out)
}

/// Least-squares slope of `y` against `x`.
pub fn ls_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

// ---------------------------------------------------------------- gridding

#[derive(Debug, Clone, Serialize)]
pub struct GriddingComparison {
    pub scheme: String,
    pub samples: usize,
    pub gridding_error: f64,
    /// `(space, ||f - f~||)`.
    pub nugs: Vec<(String, f64)>,
}

/// Gridding against NUGS on the same measurements.
pub fn compare_gridding(
    scheme: &SamplingScheme,
    spaces: &[ReconstructionSpace],
    f: &Signal,
    opts: SolveOptions,
) -> Result<GriddingComparison> {
    let b = measure(f, scheme)?;
    let g = gridding_from_measurements(scheme, b.as_slice())?;
    let gridding_error = f.clone().plus(-1.0, g).norm();
    let mut nugs = Vec::new();
    for space in spaces {
        let (rep, _) = reconstruct(scheme, space, f, None, opts)?;
        nugs.push((space_name(space), rep.error));
    }
    Ok(GriddingComparison {
        scheme: scheme.label.clone(),
        samples: scheme.sample_count(),
        gridding_error,
        nugs,
    })
}

/// Jittered eps 0.7, eta 0.14, `K = 256`; Haar and periodic DB2 at `2^R = 512`;
/// `f = 1/2 cos(8 pi x) - sin(2 pi x)`.
pub fn gridding_experiment(seed: u64, opts: SolveOptions) -> Result<GriddingComparison> {
    let scheme = jittered_scheme(256.0, 0.7, 0.14, seed)?;
    let db2 = make_filter(Family::Daubechies, 2)?;
    let spaces = [
        haar_space(9)?,
        build_space(&db2, 9, 3, BoundaryType::Periodic)?,
    ];
    compare_gridding(&scheme, &spaces, &named_signal("fig5")?, opts)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bisect_finds_threshold() {
        assert_eq!(bisect(0, 64, |x| Ok(x >= 37)).unwrap(), 37);
        assert_eq!(bisect(36, 37, |x| Ok(x >= 37)).unwrap(), 37);
    }

    #[test]
    fn slope_of_line() {
        assert!((ls_slope(&[0.0, 1.0, 2.0], &[1.0, 3.0, 5.0]) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn small_reconstruction() {
        let space = haar_space(4).unwrap();
        let s = log_scheme(8.0, 0.8, 0.4).unwrap();
        let f = named_signal("table3").unwrap();
        let (rep, c) = reconstruct(&s, &space, &f, None, SolveOptions::default()).unwrap();
        assert_eq!(c.len(), 16);
        assert!(rep.converged);
        assert!(rep.ratio >= 1.0 && rep.ratio < 1.2, "{}", rep.ratio);
    }
}
