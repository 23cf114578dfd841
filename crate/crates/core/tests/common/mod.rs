#![allow(dead_code)]

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::DVector;
use num_complex::Complex64;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use nugs::constants::z_residual;
use nugs::operators::{
    build_matrix, measure, solve_nugs, space_error, FactoredOperator, LinearOperator, Signal,
    SolveOptions, DEFAULT_MEMORY_LIMIT,
};
use nugs::sampling::{jittered_scheme, log_scheme, uniform_scheme, SamplingScheme};
use nugs::wavelets::{
    build_space, cascade_evaluate, make_filter, scaling_fourier, BoundaryType, Family,
    ReconstructionSpace,
};

pub type Check = Result<String, String>;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn unif(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64
}

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

pub fn space(fam: Family, p: usize, r: u32, ty: BoundaryType) -> ReconstructionSpace {
    let j = if ty == BoundaryType::Boundary {
        r - 1
    } else {
        0
    };
    build_space(&make_filter(fam, p).unwrap(), r, j, ty).unwrap()
}

pub fn haar(r: u32) -> ReconstructionSpace {
    space(Family::Haar, 1, r, BoundaryType::Periodic)
}

/// Frequencies with random gaps in `[delta / 5, delta]` covering `[-K, K]`
/// so that every gap, wrap-around included, is at most `delta`.
pub fn random_dense_scheme(rng: &mut ChaCha8Rng, k: f64, delta: f64) -> SamplingScheme {
    let mut w = vec![-k + 0.5 * delta * unif(rng)];
    loop {
        let next = w[w.len() - 1] + delta * (0.2 + 0.8 * unif(rng));
        if next > k {
            break;
        }
        w.push(next);
    }
    let need = w[0] + 2.0 * k - 0.9 * delta;
    if need > w[w.len() - 1] {
        w.push(need);
    }
    SamplingScheme::from_frequencies(w, k).unwrap()
}

pub fn random_coeffs(rng: &mut ChaCha8Rng, m: usize) -> DVector<Complex64> {
    DVector::from_fn(m, |_, _| c(2.0 * unif(rng) - 1.0, 2.0 * unif(rng) - 1.0))
}

fn max_abs(v: &DVector<Complex64>) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn check(ok: bool, detail: String) -> Check {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

pub fn telescoping() -> Check {
    let mut r = rng(11);
    let mut schemes = vec![
        log_scheme(32.0, 0.8, 0.4).unwrap(),
        log_scheme(256.0, 0.95, 0.33).unwrap(),
        jittered_scheme(128.0, 0.6, 0.1, 3).unwrap(),
        uniform_scheme(40.0, 0.7).unwrap(),
    ];
    for _ in 0..20 {
        let k = 4.0 + 100.0 * unif(&mut r);
        let d = 0.1 + 0.85 * unif(&mut r);
        schemes.push(random_dense_scheme(&mut r, k, d));
    }
    let worst = schemes
        .iter()
        .map(|s| rel(s.weights.iter().sum::<f64>(), 2.0 * s.bandwidth))
        .fold(0.0, f64::max);
    check(
        worst <= 1e-12,
        format!("max relative |sum mu - 2K| = {worst:.2e}"),
    )
}

pub fn operator_spaces() -> Vec<ReconstructionSpace> {
    vec![
        haar(6),
        space(Family::Daubechies, 2, 6, BoundaryType::Periodic),
        space(Family::Daubechies, 3, 6, BoundaryType::Boundary),
        space(Family::Daubechies, 2, 6, BoundaryType::Folded),
    ]
}

pub fn dense_vs_factored() -> Check {
    let s = log_scheme(32.0, 0.8, 0.4).unwrap();
    let mut r = rng(5);
    let mut worst: f64 = 0.0;
    for sp in operator_spaces() {
        let a = build_matrix(&s, &sp, DEFAULT_MEMORY_LIMIT).unwrap();
        let op = FactoredOperator::new(&s, &sp);
        let x = random_coeffs(&mut r, sp.dim());
        let y = random_coeffs(&mut r, s.len());
        let d = &a * &x;
        worst = worst.max(max_abs(&(op.apply(&x) - &d)) / max_abs(&d));
        let d = a.ad_mul(&y);
        worst = worst.max(max_abs(&(op.adjoint(&y) - &d)) / max_abs(&d));
    }
    check(
        worst <= 1e-12,
        format!("max relative deviation {worst:.2e}"),
    )
}

pub fn adjoint_identity() -> Check {
    let s = jittered_scheme(40.0, 0.6, 0.1, 9).unwrap();
    let mut r = rng(6);
    let mut worst: f64 = 0.0;
    for sp in operator_spaces() {
        let op = FactoredOperator::new(&s, &sp);
        for _ in 0..5 {
            let x = random_coeffs(&mut r, sp.dim());
            let y = random_coeffs(&mut r, s.len());
            let ax = op.apply(&x);
            let lhs = y.dotc(&ax);
            let rhs = op.adjoint(&y).dotc(&x);
            worst = worst.max((lhs - rhs).norm() / (ax.norm() * y.norm()));
        }
    }
    check(
        worst <= 1e-12,
        format!("max |<Ax,y> - <x,A*y>| / (|Ax||y|) = {worst:.2e}"),
    )
}

pub fn exact_recovery() -> Check {
    let s = log_scheme(64.0, 0.8, 0.4).unwrap();
    let mut r = rng(7);
    let mut worst: f64 = 0.0;
    for sp in operator_spaces() {
        let sp = Arc::new(sp);
        let a = random_coeffs(&mut r, sp.dim());
        let f = Signal::expansion(sp.clone(), a.iter().copied().collect()).unwrap();
        let b = measure(&f, &s).unwrap();
        let sol = solve_nugs(&FactoredOperator::new(&s, &sp), &b, SolveOptions::default()).unwrap();
        let ce = (&sol.coeffs - &a).norm() / a.norm();
        let fe = space_error(&sp, &f, &sol.coeffs).unwrap() / f.norm();
        worst = worst.max(ce).max(fe);
    }
    check(
        worst <= 1e-8,
        format!("max relative coefficient / L2 error {worst:.2e}"),
    )
}

/// Lower and upper sampling bounds on unit-norm elements of `T`.
pub fn two_sided_bound(cases: usize) -> Check {
    let spaces = [
        haar(4),
        haar(5),
        space(Family::Daubechies, 2, 5, BoundaryType::Periodic),
        space(Family::Daubechies, 2, 5, BoundaryType::Boundary),
    ];
    let mut r = rng(43);
    let (mut upper_worst, mut lower_checked, mut lower_worst) = (0.0f64, 0usize, f64::INFINITY);
    for i in 0..cases {
        let sp = &spaces[i % spaces.len()];
        let k = (sp.dim() as f64) * (1.0 + 2.0 * unif(&mut r));
        let d = 0.1 + 0.85 * unif(&mut r);
        let s = random_dense_scheme(&mut r, k, d);
        let delta = s.density.unwrap();
        let op = FactoredOperator::new(&s, sp);
        let mut a = random_coeffs(&mut r, sp.dim());
        // unit norm in L2: a* G a = 1
        let g = sp.gram_matrix().map(|v| c(v, 0.0));
        let nrm = a.dotc(&(&g * &a)).re.sqrt();
        a /= c(nrm, 0.0);
        let energy = op.apply(&a).norm_squared();
        upper_worst = upper_worst.max(energy / (1.0 + delta).powi(2));
        let e = z_residual(sp, k - delta / 2.0).unwrap();
        let root = (1.0 - e * e).sqrt() - delta;
        if root > 0.0 {
            lower_checked += 1;
            lower_worst = lower_worst.min(energy / (root * root));
        }
    }
    check(
        upper_worst <= 1.0 + 1e-10 && lower_worst >= 1.0 - 1e-10,
        format!(
            "{cases} cases: max energy/(1+d)^2 = {upper_worst:.6}, min energy/lower = {lower_worst:.4} over {lower_checked} cases"
        ),
    )
}

pub fn residual_monotone() -> Check {
    let mut bad = Vec::new();
    for sp in [
        haar(3),
        space(Family::Daubechies, 2, 4, BoundaryType::Periodic),
        space(Family::Daubechies, 2, 4, BoundaryType::Boundary),
    ] {
        let es: Vec<f64> = (0..=16)
            .map(|i| z_residual(&sp, 4.0 * i as f64).unwrap())
            .collect();
        if (es[0] - 1.0).abs() > 1e-12 || es.windows(2).any(|w| w[1] > w[0] + 1e-9) {
            bad.push(format!("{}: {:?}", sp.descriptor(), es));
        }
    }
    check(
        bad.is_empty(),
        if bad.is_empty() {
            "E(T, z) nonincreasing on z = 0..64".into()
        } else {
            bad.join("; ")
        },
    )
}

pub fn polynomial_reproduction() -> Check {
    let mut worst: f64 = 0.0;
    for (p, r) in [(2usize, 5u32), (2, 7), (3, 6), (3, 7)] {
        let sp = space(Family::Daubechies, p, r, BoundaryType::Boundary);
        for d in 0..p as i32 {
            let f = Signal::custom("monomial", move |x| c(x.powi(d), 0.0));
            worst = worst.max(nugs::operators::projection_error(&sp, &f).unwrap());
        }
    }
    check(
        worst <= 1e-8,
        format!("max ||x^d - P_T x^d|| = {worst:.2e}"),
    )
}

/// Fourier transform of the piecewise-linear interpolant of the cascade samples.
fn cascade_fourier(v: &[f64], q: u32, lo: i64, omega: f64) -> Complex64 {
    let h = 1.0 / (1u64 << q) as f64;
    let step = Complex64::cis(-2.0 * PI * omega * h);
    let mut ph = Complex64::cis(-2.0 * PI * omega * lo as f64);
    let mut s = c(0.0, 0.0);
    for (i, &x) in v.iter().enumerate() {
        if i % 1024 == 0 {
            ph = Complex64::cis(-2.0 * PI * omega * (lo as f64 + i as f64 * h));
        }
        s += ph * x;
        ph *= step;
    }
    let t = PI * omega * h;
    let sinc2 = if t == 0.0 { 1.0 } else { (t.sin() / t).powi(2) };
    s * h * sinc2
}

pub fn product_vs_cascade() -> Check {
    let q = 14;
    let mut worst: f64 = 0.0;
    for p in 2..=4usize {
        let f = make_filter(Family::Daubechies, p).unwrap();
        let v = cascade_evaluate(&f, q).unwrap();
        for i in 0..=160 {
            let omega = -64.0 + 0.8 * i as f64 + 0.013;
            let d =
                (scaling_fourier(&f, omega) - cascade_fourier(&v, q, 1 - p as i64, omega)).norm();
            worst = worst.max(d);
        }
    }
    check(
        worst <= 1e-6,
        format!("max |phi^ product - cascade| = {worst:.2e}"),
    )
}

pub fn periodic_gram() -> Check {
    let mut worst: f64 = 0.0;
    for (fam, p) in [
        (Family::Haar, 1usize),
        (Family::Daubechies, 2),
        (Family::Daubechies, 3),
        (Family::Daubechies, 4),
    ] {
        for r in 4..=7 {
            let sp = space(fam, p, r, BoundaryType::Periodic);
            let g = sp.gram_matrix();
            let n = g.nrows();
            let e = (g - nalgebra::DMatrix::identity(n, n)).amax();
            worst = worst.max(e);
        }
    }
    check(worst <= 1e-10, format!("max |G - I| = {worst:.2e}"))
}

pub type NamedCheck = (&'static str, fn() -> Check);

pub const PROPERTY_CHECKS: [NamedCheck; 9] = [
    ("weight telescoping", telescoping),
    ("dense vs factored", dense_vs_factored),
    ("adjoint identity", adjoint_identity),
    ("exact recovery", exact_recovery),
    ("two-sided bound", || two_sided_bound(200)),
    ("residual monotone", residual_monotone),
    ("polynomial reproduction", polynomial_reproduction),
    ("product vs cascade", product_vs_cascade),
    ("periodic gram", periodic_gram),
];
