//! Exact quantities of the unit-cell pieces `u_j(t) = phi(j + t)`, `t in [0,1)`,
//! `j = -p+1..=p-1`, derived from the refinement equation alone.
//!
//! Restricting the refinement equation to a unit cell gives
//!
//! ```text
//! u_j(t) = sqrt 2 sum_k h_k u_{2j-k}(2t)       for t <  1/2
//! u_j(t) = sqrt 2 sum_k h_k u_{2j-k+1}(2t-1)   for t >= 1/2
//! ```
//!
//! so moments, cell Fourier transforms and cell Gram tables all satisfy small
//! linear fixed-point systems. Every truncated or folded scaling function is
//! a finite sum of pieces, which makes their Fourier transforms and inner
//! products exact up to round-off instead of quadrature-limited.

use std::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::filter::ScalingFilter;
use crate::error::{NugsError, Result};
use crate::quadrature::{shifted_legendre, UnitRule};

/// Degree of the Taylor tail used for cell Fourier transforms.
const TAYLOR_DEGREE: usize = 16;
/// `|xi|` below which the Taylor tail is used directly.
const TAYLOR_RADIUS: f64 = 1.0 / 16.0;
/// Highest shifted-Legendre moment kept per piece.
pub const LEGENDRE_DEGREE: usize = 20;
/// Dyadic level of the stored cascade used for pointwise evaluation.
const EVAL_LEVEL: u32 = 14;

#[derive(Debug, Clone)]
pub struct Pieces {
    pub filter: ScalingFilter,
    /// `moments[m][j - j_min] = int_0^1 t^m u_j(t) dt`.
    pub moments: Vec<Vec<f64>>,
    /// `legendre[i][j - j_min] = int_0^1 P~_i(t) u_j(t) dt`.
    pub legendre: Vec<Vec<f64>>,
    /// `gram_ff[(a, b)] = int_0^1 u_a(t) u_b(t) dt`.
    pub gram_ff: DMatrix<f64>,
    /// `gram_fr[(a, b)] = int_0^1 u_a(t) u_b(1 - t) dt`.
    pub gram_fr: DMatrix<f64>,
    /// Moments `int x^m phi(x) dx` of the whole scaling function.
    pub global_moments: Vec<f64>,
    cascade: Vec<f64>,
}

impl Pieces {
    pub fn new(filter: &ScalingFilter) -> Result<Self> {
        let n = 2 * filter.p - 1;
        let t0 = transfer_real(filter);
        let plo = half_operator(filter, 0);
        let phi = half_operator(filter, 1);

        let m0 = fixed_point_unit_sum(&t0, n)?;

        // Monomials: (t/2)^m = 2^-m t^m, ((t+1)/2)^m = 2^-m sum_l C(m,l) t^l.
        let mut a_mono = DMatrix::zeros(TAYLOR_DEGREE + 1, TAYLOR_DEGREE + 1);
        let mut b_mono = DMatrix::zeros(TAYLOR_DEGREE + 1, TAYLOR_DEGREE + 1);
        for m in 0..=TAYLOR_DEGREE {
            let s = 0.5f64.powi(m as i32);
            a_mono[(m, m)] = s;
            for l in 0..=m {
                b_mono[(m, l)] = s * binomial(m, l);
            }
        }
        let moments = graded_moments(&t0, &plo, &phi, &a_mono, &b_mono, &m0)?;

        let (a_leg, b_leg) = legendre_dilations(LEGENDRE_DEGREE);
        let legendre = graded_moments(&t0, &plo, &phi, &a_leg, &b_leg, &m0)?;

        let global_moments = (0..=TAYLOR_DEGREE)
            .map(|i| {
                let mut s = 0.0;
                for (idx, j) in (filter.k_min()..filter.p as i64).enumerate() {
                    for l in 0..=i {
                        s += binomial(i, l) * (j as f64).powi((i - l) as i32) * moments[l][idx];
                    }
                }
                s
            })
            .collect();

        let (gram_ff, gram_fr) = if filter.is_haar() {
            (
                DMatrix::from_element(1, 1, 1.0),
                DMatrix::from_element(1, 1, 1.0),
            )
        } else {
            (
                cell_gram(filter, &m0, false)?,
                cell_gram(filter, &m0, true)?,
            )
        };

        let cascade = cascade_evaluate(filter, EVAL_LEVEL)?;

        Ok(Self {
            filter: filter.clone(),
            moments,
            legendre,
            gram_ff,
            gram_fr,
            global_moments,
            cascade,
        })
    }

    pub fn count(&self) -> usize {
        2 * self.filter.p - 1
    }

    pub fn j_min(&self) -> i64 {
        self.filter.k_min()
    }

    pub fn j_max(&self) -> i64 {
        self.filter.p as i64 - 1
    }

    /// Index of piece `j` in the per-piece arrays.
    pub fn index(&self, j: i64) -> usize {
        (j - self.j_min()) as usize
    }

    /// `int_0^1 u_j(t) e^{-2 pi i xi t} dt` for every piece.
    pub fn local_fourier(&self, xi: f64) -> Vec<Complex64> {
        if self.filter.is_haar() {
            return vec![haar_hat(xi)];
        }
        let mut levels = 0;
        let mut base = xi;
        while base.abs() > TAYLOR_RADIUS {
            base *= 0.5;
            levels += 1;
        }
        let n = self.count();
        let mut v = vec![Complex64::new(0.0, 0.0); n];
        let z = Complex64::new(0.0, -2.0 * PI * base);
        let mut zm = Complex64::new(1.0, 0.0);
        let mut fact = 1.0;
        for (m, row) in self.moments.iter().enumerate() {
            if m > 0 {
                zm *= z;
                fact *= m as f64;
            }
            let c = zm / fact;
            for (vj, &mj) in v.iter_mut().zip(row) {
                *vj += c * mj;
            }
        }
        let mut w = vec![Complex64::new(0.0, 0.0); n];
        let j_min = self.j_min();
        for l in (1..=levels).rev() {
            let eta = xi / f64::powi(2.0, l);
            let e = Complex64::cis(-2.0 * PI * eta);
            for (a, wa) in w.iter_mut().enumerate() {
                let j = a as i64 + j_min;
                let mut s = Complex64::new(0.0, 0.0);
                for (b, vb) in v.iter().enumerate() {
                    let i = b as i64 + j_min;
                    let lo = self.filter.h(2 * j - i);
                    let hi = self.filter.h(2 * j + 1 - i);
                    if lo != 0.0 || hi != 0.0 {
                        s += *vb * (e * hi + lo);
                    }
                }
                *wa = s * FRAC_1_SQRT_2;
            }
            std::mem::swap(&mut v, &mut w);
        }
        v
    }

    /// `phi^(omega)` assembled from the cell transforms.
    pub fn scaling_fourier(&self, omega: f64) -> Complex64 {
        let u = self.local_fourier(omega);
        let mut s = Complex64::new(0.0, 0.0);
        for (idx, uj) in u.iter().enumerate() {
            let j = idx as i64 + self.j_min();
            s += Complex64::cis(-2.0 * PI * j as f64 * omega) * uj;
        }
        s
    }

    /// `u_j(t)` for `t in [0, 1]`, linearly interpolated from the stored cascade.
    /// Exact at dyadic points of level 14 and everywhere for Haar.
    pub fn value(&self, j: i64, t: f64) -> f64 {
        if self.filter.is_haar() {
            return if j == 0 && (0.0..1.0).contains(&t) {
                1.0
            } else {
                0.0
            };
        }
        let x = (j - self.j_min()) as f64 + t;
        let scale = (1u64 << EVAL_LEVEL) as f64;
        let pos = x * scale;
        let last = self.cascade.len() - 1;
        if pos <= 0.0 {
            return self.cascade[0];
        }
        let i = pos.floor() as usize;
        if i >= last {
            return self.cascade[last];
        }
        let frac = pos - i as f64;
        self.cascade[i] * (1.0 - frac) + self.cascade[i + 1] * frac
    }

    /// `phi(x)` on the whole line.
    pub fn phi(&self, x: f64) -> f64 {
        let j = x.floor() as i64;
        if j < self.j_min() || j > self.j_max() {
            return 0.0;
        }
        self.value(j, x - j as f64)
    }
}

/// `phi^(omega)` from the infinite product `prod_j m0(omega / 2^j)`, truncated
/// at `J* = max(30, ceil(log2(1 + |omega|)) + 30)` with the first-order tail
/// `phi^(e) ~ 1 - 2 pi i e M1`, `M1 = 2^{-1/2} sum_k k h_k`.
pub fn scaling_fourier(filter: &ScalingFilter, omega: f64) -> Complex64 {
    if filter.is_haar() {
        return haar_hat(omega);
    }
    let levels = 30.max((1.0 + omega.abs()).log2().ceil() as i32 + 30);
    let mut prod = Complex64::new(1.0, 0.0);
    let mut x = omega;
    for _ in 0..levels {
        x *= 0.5;
        prod *= filter.m0(x);
    }
    let m1: f64 = (filter.k_min()..=filter.k_max())
        .map(|k| k as f64 * filter.h(k))
        .sum::<f64>()
        * std::f64::consts::FRAC_1_SQRT_2;
    prod * Complex64::new(1.0, -2.0 * PI * x * m1)
}

/// `e^{-i pi xi} sinc(pi xi)`, the transform of the unit indicator.
pub fn haar_hat(xi: f64) -> Complex64 {
    Complex64::cis(-PI * xi) * sinc(PI * xi)
}

/// `sin(x) / x` with the removable singularity filled in.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        1.0 - x2 / 6.0 + x2 * x2 / 120.0
    } else {
        x.sin() / x
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    let mut r = 1.0;
    for i in 0..k {
        r = r * (n - i) as f64 / (i + 1) as f64;
    }
    r
}

/// `(T0 v)_j = 2^{-1/2} sum_k h_k (v_{2j-k} + v_{2j-k+1})` as a matrix.
fn transfer_real(filter: &ScalingFilter) -> DMatrix<f64> {
    half_operator(filter, 0) + half_operator(filter, 1)
}

/// `(P v)_j = 2^{-1/2} sum_k h_k v_{2j-k+shift}`.
fn half_operator(filter: &ScalingFilter, shift: i64) -> DMatrix<f64> {
    let n = 2 * filter.p - 1;
    let j_min = filter.k_min();
    DMatrix::from_fn(n, n, |a, b| {
        let j = a as i64 + j_min;
        let i = b as i64 + j_min;
        FRAC_1_SQRT_2 * filter.h(2 * j + shift - i)
    })
}

/// Eigenvector of `t0` at eigenvalue one with entries summing to one.
fn fixed_point_unit_sum(t0: &DMatrix<f64>, n: usize) -> Result<DVector<f64>> {
    let mut a = DMatrix::zeros(n + 1, n);
    a.view_mut((0, 0), (n, n))
        .copy_from(&(DMatrix::identity(n, n) - t0));
    for c in 0..n {
        a[(n, c)] = 1.0;
    }
    let mut rhs = DVector::zeros(n + 1);
    rhs[n] = 1.0;
    solve_checked(a, rhs, "piece masses")
}

fn solve_checked(a: DMatrix<f64>, rhs: DVector<f64>, what: &str) -> Result<DVector<f64>> {
    let svd = a.clone().svd(true, true);
    let smin = svd
        .singular_values
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min);
    if smin < 1e-10 {
        return Err(NugsError::InvalidFilter(format!(
            "{what}: fixed-point system is singular (smallest singular value {smin:e})"
        )));
    }
    let x = svd
        .solve(&rhs, 1e-14)
        .map_err(|e| NugsError::Numerical(format!("{what}: {e}")))?;
    let resid = (&a * &x - &rhs).norm();
    if resid > 1e-10 {
        return Err(NugsError::InvalidFilter(format!(
            "{what}: inconsistent fixed-point system (residual {resid:e})"
        )));
    }
    Ok(x)
}

/// Moments against a polynomial family `q_i` with dilation matrices
/// `q_i(t/2) = sum_l a[i,l] q_l(t)` and `q_i((t+1)/2) = sum_l b[i,l] q_l(t)`,
/// both lower triangular with diagonal `2^-i`.
fn graded_moments(
    t0: &DMatrix<f64>,
    plo: &DMatrix<f64>,
    phi: &DMatrix<f64>,
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
    mass: &DVector<f64>,
) -> Result<Vec<Vec<f64>>> {
    let n = t0.nrows();
    let degree = a.nrows() - 1;
    let mut out: Vec<DVector<f64>> = Vec::with_capacity(degree + 1);
    // q_0 = 1 in both families.
    out.push(mass.clone());
    for i in 1..=degree {
        let mut rhs = DVector::zeros(n);
        for l in 0..i {
            if a[(i, l)] != 0.0 {
                rhs += plo * &out[l] * a[(i, l)];
            }
            if b[(i, l)] != 0.0 {
                rhs += phi * &out[l] * b[(i, l)];
            }
        }
        let diag = a[(i, i)];
        let m = DMatrix::identity(n, n) - t0 * diag;
        let x = m
            .lu()
            .solve(&rhs)
            .ok_or_else(|| NugsError::InvalidFilter("moment system is singular".into()))?;
        out.push(x);
    }
    Ok(out
        .into_iter()
        .map(|v| v.iter().cloned().collect())
        .collect())
}

/// Dilation matrices of the shifted Legendre polynomials.
fn legendre_dilations(degree: usize) -> (DMatrix<f64>, DMatrix<f64>) {
    let rule = UnitRule::new(degree + 2);
    let mut a = DMatrix::zeros(degree + 1, degree + 1);
    let mut b = DMatrix::zeros(degree + 1, degree + 1);
    for (s, w) in rule.nodes.iter().zip(&rule.weights) {
        let base = shifted_legendre(degree, *s);
        let lo = shifted_legendre(degree, 0.5 * s);
        let hi = shifted_legendre(degree, 0.5 * (s + 1.0));
        for i in 0..=degree {
            for l in 0..=i {
                let norm = (2 * l + 1) as f64;
                a[(i, l)] += w * lo[i] * base[l] * norm;
                b[(i, l)] += w * hi[i] * base[l] * norm;
            }
        }
    }
    (a, b)
}

/// Cell Gram table from its refinement fixed point plus the partition-of-unity
/// row sums and, for the forward table, the integer-shift orthonormality.
fn cell_gram(filter: &ScalingFilter, mass: &DVector<f64>, reflected: bool) -> Result<DMatrix<f64>> {
    let n = 2 * filter.p - 1;
    let j_min = filter.k_min();
    let j_max = filter.p as i64 - 1;
    let nn = n * n;
    let var = |a: i64, b: i64| -> Option<usize> {
        if a < j_min || a > j_max || b < j_min || b > j_max {
            None
        } else {
            Some(((a - j_min) as usize) * n + (b - j_min) as usize)
        }
    };
    let mut rows: Vec<(Vec<f64>, f64)> = Vec::new();
    for a in j_min..=j_max {
        for b in j_min..=j_max {
            let mut row = vec![0.0; nn];
            row[var(a, b).unwrap()] -= 1.0;
            for k in filter.k_min()..=filter.k_max() {
                for k2 in filter.k_min()..=filter.k_max() {
                    let c = filter.h(k) * filter.h(k2);
                    let (first, second) = if reflected {
                        ((2 * a - k, 2 * b + 1 - k2), (2 * a - k + 1, 2 * b - k2))
                    } else {
                        ((2 * a - k, 2 * b - k2), (2 * a - k + 1, 2 * b - k2 + 1))
                    };
                    if let Some(v) = var(first.0, first.1) {
                        row[v] += c;
                    }
                    if let Some(v) = var(second.0, second.1) {
                        row[v] += c;
                    }
                }
            }
            rows.push((row, 0.0));
        }
    }
    for a in j_min..=j_max {
        let mut row = vec![0.0; nn];
        for b in j_min..=j_max {
            row[var(a, b).unwrap()] = 1.0;
        }
        rows.push((row, mass[(a - j_min) as usize]));
    }
    if !reflected {
        for e in -(n as i64) + 1..n as i64 {
            let mut row = vec![0.0; nn];
            for a in j_min..=j_max {
                if let Some(v) = var(a, a - e) {
                    row[v] = 1.0;
                }
            }
            rows.push((row, if e == 0 { 1.0 } else { 0.0 }));
        }
    }
    let m = DMatrix::from_fn(rows.len(), nn, |r, c| rows[r].0[c]);
    let rhs = DVector::from_iterator(rows.len(), rows.iter().map(|r| r.1));
    let x = solve_checked(
        m,
        rhs,
        if reflected {
            "reflected cell Gram"
        } else {
            "cell Gram"
        },
    )?;
    let g = DMatrix::from_fn(n, n, |a, b| x[a * n + b]);
    Ok((&g + g.transpose()) * 0.5)
}

/// Values of `phi` at `k / 2^q` for `k = (-p+1) 2^q ..= p 2^q`, iterated
/// from the exact integer values (eigenvector of the refinement matrix at
/// eigenvalue one, normalised to `sum_k phi(k) = 1`).
pub fn cascade_evaluate(filter: &ScalingFilter, q: u32) -> Result<Vec<f64>> {
    if q > 24 {
        return Err(NugsError::InvalidParameter(format!(
            "cascade level {q} too large"
        )));
    }
    let p = filter.p as i64;
    let lo = 1 - p;
    // Level-0 values at integers lo..=p.
    if filter.is_haar() {
        let n = 1usize << q;
        let mut v = vec![1.0; n + 1];
        v[n] = 0.0;
        return Ok(v);
    }
    let mut cur: Vec<f64> = vec![0.0; (p - lo + 1) as usize];
    {
        let ints: Vec<i64> = (lo + 1..p).collect();
        let n = ints.len();
        let m = DMatrix::from_fn(n, n, |a, b| SQRT_2 * filter.h(2 * ints[a] - ints[b]));
        let shifted = &m - DMatrix::identity(n, n);
        let sv = shifted.clone().svd(false, false).singular_values;
        let mut sorted: Vec<f64> = sv.iter().cloned().collect();
        sorted.sort_by(f64::total_cmp);
        if sorted[0] > 1e-10 || (n > 1 && sorted[1] < 1e-8) {
            return Err(NugsError::InvalidFilter(
                "eigenvalue-one eigenspace of the refinement matrix is not one-dimensional".into(),
            ));
        }
        let v = fixed_point_unit_sum(&m, n)?;
        for (i, &k) in ints.iter().enumerate() {
            cur[(k - lo) as usize] = v[i];
        }
    }
    for level in 0..q {
        let step = 1i64 << level;
        let len = ((p - lo) << (level + 1)) as usize + 1;
        let mut next = vec![0.0; len];
        let base_lo = lo << (level + 1);
        for (idx, out) in next.iter_mut().enumerate() {
            let m = base_lo + idx as i64;
            let mut s = 0.0;
            // phi(m / 2^(level+1)) needs phi((m - k 2^level) / 2^level).
            for k in filter.k_min()..=filter.k_max() {
                let off = m - k * step - lo * step;
                if off >= 0 && (off as usize) < cur.len() {
                    s += filter.h(k) * cur[off as usize];
                }
            }
            *out = SQRT_2 * s;
        }
        cur = next;
    }
    Ok(cur)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wavelets::filter::{make_filter, Family};

    fn trapezoid_cell(vals: &[f64], q: u32, p: usize, j: i64, f: impl Fn(f64, f64) -> f64) -> f64 {
        let scale = 1usize << q;
        let start = ((j + p as i64 - 1) as usize) * scale;
        let h = 1.0 / scale as f64;
        (0..=scale)
            .map(|i| {
                let w = if i == 0 || i == scale { 0.5 } else { 1.0 };
                w * h * f(i as f64 * h, vals[start + i])
            })
            .sum()
    }

    #[test]
    fn cascade_mass_and_orthogonality() {
        let f = make_filter(Family::Daubechies, 2).unwrap();
        let q = 12;
        let v = cascade_evaluate(&f, q).unwrap();
        let h = 1.0 / (1u64 << q) as f64;
        let mass: f64 = v.iter().sum::<f64>() * h;
        assert!((mass - 1.0).abs() < 1e-8, "{mass}");
        let shift = 1usize << q;
        let overlap: f64 = (0..v.len() - shift)
            .map(|i| v[i] * v[i + shift])
            .sum::<f64>()
            * h;
        assert!(overlap.abs() < 1e-6, "{overlap}");
    }

    #[test]
    fn cascade_haar_is_indicator() {
        let f = make_filter(Family::Haar, 1).unwrap();
        let v = cascade_evaluate(&f, 5).unwrap();
        assert_eq!(v.len(), 33);
        assert!(v[..32].iter().all(|&x| x == 1.0));
        assert_eq!(v[32], 0.0);
    }

    #[test]
    fn moments_and_grams_match_cascade_quadrature() {
        for p in 2..=4 {
            let f = make_filter(Family::Daubechies, p).unwrap();
            let pieces = Pieces::new(&f).unwrap();
            let q = 14;
            let v = cascade_evaluate(&f, q).unwrap();
            for j in pieces.j_min()..=pieces.j_max() {
                let idx = pieces.index(j);
                for m in 0..4 {
                    let quad = trapezoid_cell(&v, q, p, j, |t, u| t.powi(m) * u);
                    assert!(
                        (quad - pieces.moments[m as usize][idx]).abs() < 5e-8,
                        "p={p} j={j} m={m}"
                    );
                }
                let leg = trapezoid_cell(&v, q, p, j, |t, u| shifted_legendre(5, t)[5] * u);
                assert!((leg - pieces.legendre[5][idx]).abs() < 5e-8);
            }
            let scale = 1usize << q;
            for a in pieces.j_min()..=pieces.j_max() {
                for b in pieces.j_min()..=pieces.j_max() {
                    let sa = ((a + p as i64 - 1) as usize) * scale;
                    let sb = ((b + p as i64 - 1) as usize) * scale;
                    let (mut ff, mut fr) = (0.0, 0.0);
                    for i in 0..=scale {
                        let w = if i == 0 || i == scale { 0.5 } else { 1.0 } / scale as f64;
                        ff += w * v[sa + i] * v[sb + i];
                        fr += w * v[sa + i] * v[sb + scale - i];
                    }
                    let (ia, ib) = (pieces.index(a), pieces.index(b));
                    assert!(
                        (ff - pieces.gram_ff[(ia, ib)]).abs() < 1e-7,
                        "ff p={p} {a} {b}"
                    );
                    assert!(
                        (fr - pieces.gram_fr[(ia, ib)]).abs() < 1e-7,
                        "fr p={p} {a} {b}"
                    );
                }
            }
        }
    }

    #[test]
    fn local_fourier_matches_cascade_quadrature() {
        let f = make_filter(Family::Daubechies, 3).unwrap();
        let pieces = Pieces::new(&f).unwrap();
        let q = 14;
        let v = cascade_evaluate(&f, q).unwrap();
        for &xi in &[0.0, 0.3, -3.7, 12.9] {
            let u = pieces.local_fourier(xi);
            for j in pieces.j_min()..=pieces.j_max() {
                let re = trapezoid_cell(&v, q, 3, j, |t, u| u * (2.0 * PI * xi * t).cos());
                let im = -trapezoid_cell(&v, q, 3, j, |t, u| u * (2.0 * PI * xi * t).sin());
                let d = (u[pieces.index(j)] - Complex64::new(re, im)).norm();
                assert!(d < 1e-7, "xi={xi} j={j} d={d}");
            }
        }
    }

    #[test]
    fn global_moments_of_haar() {
        let f = make_filter(Family::Haar, 1).unwrap();
        let pieces = Pieces::new(&f).unwrap();
        for m in 0..6 {
            assert!((pieces.global_moments[m] - 1.0 / (m as f64 + 1.0)).abs() < 1e-14);
        }
    }

    #[test]
    fn unit_mass_and_orthonormal_shifts() {
        for p in 2..=4 {
            let f = make_filter(Family::Daubechies, p).unwrap();
            let pieces = Pieces::new(&f).unwrap();
            assert!((pieces.global_moments[0] - 1.0).abs() < 1e-13);
            let trace: f64 = (0..pieces.count()).map(|i| pieces.gram_ff[(i, i)]).sum();
            assert!((trace - 1.0).abs() < 1e-12);
        }
    }
}
