//! Reconstruction spaces `V_R` on `[0, 1]`.
//!
//! Every basis function is stored as a short list of [`Term`]s: on dyadic cell
//! `c` (of width `2^-R`), with local coordinate `t = 2^R x - c`, a term
//! contributes `coeff 2^{R/2} u_j(t)` or, when reversed, `coeff 2^{R/2} u_j(1 - t)`,
//! where `u_j` are the unit-cell pieces of the scaling function. Periodised,
//! folded and orthonormalised edge functions are all finite sums of such terms.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, OnceLock};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::filter::{Family, ScalingFilter};
use super::refinement::{Pieces, LEGENDRE_DEGREE};
use crate::error::{NugsError, Result};
use crate::quadrature::{shifted_legendre, UnitRule};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryType {
    Periodic,
    Folded,
    Boundary,
}

impl fmt::Display for BoundaryType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            BoundaryType::Periodic => "periodic",
            BoundaryType::Folded => "folded",
            BoundaryType::Boundary => "boundary",
        };
        f.write_str(s)
    }
}

impl FromStr for BoundaryType {
    type Err = NugsError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "periodic" => Ok(BoundaryType::Periodic),
            "folded" => Ok(BoundaryType::Folded),
            "boundary" => Ok(BoundaryType::Boundary),
            other => Err(NugsError::InvalidSpace(format!(
                "unknown boundary type {other:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Term {
    pub cell: usize,
    pub piece: i64,
    pub reversed: bool,
    pub coeff: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Region {
    Left,
    Interior,
    Right,
}

#[derive(Debug, Clone)]
pub struct BasisFunction {
    pub region: Region,
    /// `k` when the function is the plain dilate `phi_{R,k}`.
    pub shift: Option<i64>,
    pub terms: Vec<Term>,
}

/// Text descriptor of a space: family, p, R, J and boundary type.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpaceDescriptor {
    pub family: Family,
    pub p: usize,
    #[serde(rename = "R")]
    pub r: u32,
    #[serde(rename = "J")]
    pub j: u32,
    #[serde(rename = "type")]
    pub boundary: BoundaryType,
}

impl fmt::Display for SpaceDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "family={} p={} R={} J={} type={}",
            self.family, self.p, self.r, self.j, self.boundary
        )
    }
}

#[derive(Debug)]
pub struct ReconstructionSpace {
    pub filter: ScalingFilter,
    pub r: u32,
    pub j: u32,
    pub boundary: BoundaryType,
    pub pieces: Arc<Pieces>,
    pub basis: Vec<BasisFunction>,
    orthonormal: bool,
    gram: OnceLock<DMatrix<f64>>,
}

pub fn build_space(
    filter: &ScalingFilter,
    r: u32,
    j: u32,
    boundary: BoundaryType,
) -> Result<ReconstructionSpace> {
    let pieces = Arc::new(Pieces::new(filter)?);
    build_space_with(pieces, r, j, boundary)
}

/// Like [`build_space`] but reuses precomputed piece tables.
pub fn build_space_with(
    pieces: Arc<Pieces>,
    r: u32,
    j: u32,
    boundary: BoundaryType,
) -> Result<ReconstructionSpace> {
    let filter = pieces.filter.clone();
    let p = filter.p;
    if r > 20 {
        return Err(NugsError::InvalidSpace(format!("R = {r} is too large")));
    }
    if r == 0 || (1usize << (r - 1)) <= p {
        return Err(NugsError::InvalidSpace(format!(
            "need 2^(R-1) > p (R = {r}, p = {p})"
        )));
    }
    if j > r {
        return Err(NugsError::InvalidSpace(format!(
            "need J <= R (J = {j}, R = {r})"
        )));
    }
    if boundary == BoundaryType::Boundary && (1usize << j) < 2 * p {
        return Err(NugsError::InvalidSpace(format!(
            "boundary type needs J >= log2(2p) (J = {j}, p = {p})"
        )));
    }
    let m = 1i64 << r;
    let pi = p as i64;
    let mut basis = Vec::with_capacity(m as usize);
    let region = |k: i64| {
        if k < pi {
            Region::Left
        } else if k >= m - pi {
            Region::Right
        } else {
            Region::Interior
        }
    };
    let orthonormal;
    match boundary {
        BoundaryType::Periodic => {
            for k in 0..m {
                let mut terms = Vec::new();
                for l in -1..=1 {
                    terms.extend(forward_terms(&pieces, r, k + l * m, 1.0));
                }
                basis.push(BasisFunction {
                    region: region(k),
                    shift: (region(k) == Region::Interior || filter.is_haar()).then_some(k),
                    terms: merge_terms(terms),
                });
            }
            orthonormal = true;
        }
        BoundaryType::Folded => {
            for k in 0..m {
                let mut terms = forward_terms(&pieces, r, k, 1.0);
                for big_l in [0i64, 2] {
                    terms.extend(reversed_terms(&pieces, r, k, big_l, 1.0));
                }
                let terms = merge_terms(terms);
                let plain = terms.iter().all(|t| !t.reversed);
                basis.push(BasisFunction {
                    region: region(k),
                    shift: plain.then_some(k),
                    terms,
                });
            }
            orthonormal = filter.is_haar();
        }
        BoundaryType::Boundary => {
            basis = boundary_basis(&pieces, r)?;
            orthonormal = true;
        }
    }
    let space = ReconstructionSpace {
        filter,
        r,
        j,
        boundary,
        pieces,
        basis,
        orthonormal,
        gram: OnceLock::new(),
    };
    if !space.orthonormal {
        let g = space.gram_matrix();
        if g.clone().cholesky().is_none() {
            return Err(NugsError::GramNotPositiveDefinite);
        }
    }
    Ok(space)
}

/// Terms of `phi_{R,k}` restricted to `[0, 1]` (`k` may lie outside `0..2^R`).
fn forward_terms(pieces: &Pieces, r: u32, k: i64, coeff: f64) -> Vec<Term> {
    let m = 1i64 << r;
    (pieces.j_min()..=pieces.j_max())
        .filter_map(|j| {
            let c = j + k;
            (0..m).contains(&c).then_some(Term {
                cell: c as usize,
                piece: j,
                reversed: false,
                coeff,
            })
        })
        .collect()
}

/// Terms of `x -> phi_{R,k}(L - x)` restricted to `[0, 1]`.
fn reversed_terms(pieces: &Pieces, r: u32, k: i64, big_l: i64, coeff: f64) -> Vec<Term> {
    let m = 1i64 << r;
    (pieces.j_min()..=pieces.j_max())
        .filter_map(|j| {
            let c = m * big_l - k - 1 - j;
            (0..m).contains(&c).then_some(Term {
                cell: c as usize,
                piece: j,
                reversed: true,
                coeff,
            })
        })
        .collect()
}

fn merge_terms(mut terms: Vec<Term>) -> Vec<Term> {
    terms.sort_by_key(|t| (t.cell, t.piece, t.reversed));
    let mut out: Vec<Term> = Vec::with_capacity(terms.len());
    for t in terms {
        match out.last_mut() {
            Some(last)
                if last.cell == t.cell && last.piece == t.piece && last.reversed == t.reversed =>
            {
                last.coeff += t.coeff;
            }
            _ => out.push(t),
        }
    }
    out.retain(|t| t.coeff != 0.0);
    out
}

fn term_product(pieces: &Pieces, a: &Term, b: &Term) -> f64 {
    let (ia, ib) = (pieces.index(a.piece), pieces.index(b.piece));
    let v = if a.reversed == b.reversed {
        pieces.gram_ff[(ia, ib)]
    } else {
        pieces.gram_fr[(ia, ib)]
    };
    a.coeff * b.coeff * v
}

/// `int_0^1 f g` for two term lists.
pub fn inner_terms(pieces: &Pieces, f: &[Term], g: &[Term]) -> f64 {
    let mut s = 0.0;
    for a in f {
        for b in g.iter().filter(|b| b.cell == a.cell) {
            s += term_product(pieces, a, b);
        }
    }
    s
}

/// Orthonormal basis with polynomial-reproducing edge functions: `p` left
/// edge functions, the interior `phi_{R,k}`, `k = p..2^R-p-1`, and `p` right
/// edge functions.
fn boundary_basis(pieces: &Pieces, r: u32) -> Result<Vec<BasisFunction>> {
    let p = pieces.filter.p as i64;
    let m = 1i64 << r;
    let moments = &pieces.global_moments;
    let binom = |n: usize, k: usize| -> f64 {
        (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
    };
    // <x^d, phi(. - n)> = sum_i C(d,i) n^(d-i) M_i
    let poly_coeff = |d: usize, n: f64| -> f64 {
        (0..=d)
            .map(|i| binom(d, i) * n.powi((d - i) as i32) * moments[i])
            .sum()
    };
    let interior: Vec<BasisFunction> = (p..m - p)
        .map(|k| BasisFunction {
            region: Region::Interior,
            shift: Some(k),
            terms: forward_terms(pieces, r, k, 1.0),
        })
        .collect();
    let mut raw: Vec<(Region, Vec<Term>)> = Vec::new();
    for d in 0..p as usize {
        let mut terms = Vec::new();
        for n in -p + 1..p {
            terms.extend(forward_terms(pieces, r, n, poly_coeff(d, n as f64)));
        }
        raw.push((Region::Left, merge_terms(terms)));
    }
    for d in 0..p as usize {
        let mut terms = Vec::new();
        for n in m - p..m + p - 1 {
            terms.extend(forward_terms(pieces, r, n, poly_coeff(d, (n - m) as f64)));
        }
        raw.push((Region::Right, merge_terms(terms)));
    }
    // Remove interior components, then orthonormalise edge functions in order.
    let ne = raw.len();
    let mut residual: Vec<Vec<Term>> = Vec::with_capacity(ne);
    for (_, e) in &raw {
        let mut terms = e.clone();
        for f in &interior {
            let c = inner_terms(pieces, e, &f.terms);
            if c != 0.0 {
                terms.extend(f.terms.iter().map(|t| Term {
                    coeff: -c * t.coeff,
                    ..*t
                }));
            }
        }
        residual.push(merge_terms(terms));
    }
    let s = DMatrix::from_fn(ne, ne, |a, b| {
        inner_terms(pieces, &residual[a], &residual[b])
    });
    let chol = s.clone().cholesky().ok_or_else(|| {
        NugsError::InvalidSpace("edge functions are linearly dependent for this R".into())
    })?;
    let linv = chol
        .l()
        .solve_lower_triangular(&DMatrix::identity(ne, ne))
        .ok_or_else(|| NugsError::Numerical("edge orthonormalisation failed".into()))?;
    let mut edges = Vec::with_capacity(ne);
    for a in 0..ne {
        let mut terms = Vec::new();
        for b in 0..=a {
            let c = linv[(a, b)];
            terms.extend(residual[b].iter().map(|t| Term {
                coeff: c * t.coeff,
                ..*t
            }));
        }
        let mut terms = merge_terms(terms);
        terms.retain(|t| t.coeff.abs() > 1e-15);
        edges.push(BasisFunction {
            region: raw[a].0,
            shift: None,
            terms,
        });
    }
    let mut out = Vec::with_capacity(m as usize);
    out.extend(edges.iter().take(p as usize).cloned());
    out.extend(interior);
    out.extend(edges.into_iter().skip(p as usize));
    Ok(out)
}

impl ReconstructionSpace {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Number of dyadic cells `2^R`.
    pub fn cells(&self) -> usize {
        1 << self.r
    }

    pub fn descriptor(&self) -> SpaceDescriptor {
        SpaceDescriptor {
            family: self.filter.family,
            p: self.filter.p,
            r: self.r,
            j: self.j,
            boundary: self.boundary,
        }
    }

    /// Whether the basis is orthonormal by construction.
    pub fn is_orthonormal(&self) -> bool {
        self.orthonormal
    }

    /// Number of basis functions in each of `T_left`, `T_i`, `T_right`.
    pub fn region_counts(&self) -> (usize, usize, usize) {
        let mut c = (0, 0, 0);
        for b in &self.basis {
            match b.region {
                Region::Left => c.0 += 1,
                Region::Interior => c.1 += 1,
                Region::Right => c.2 += 1,
            }
        }
        c
    }

    /// `G[m, m'] = int_0^1 phi_m phi_m'`, computed cell by cell from the exact
    /// piece tables and cached.
    pub fn gram_matrix(&self) -> &DMatrix<f64> {
        self.gram.get_or_init(|| {
            let n = self.dim();
            let mut by_cell: Vec<Vec<(usize, Term)>> = vec![Vec::new(); self.cells()];
            for (idx, b) in self.basis.iter().enumerate() {
                for t in &b.terms {
                    by_cell[t.cell].push((idx, *t));
                }
            }
            let mut g = DMatrix::zeros(n, n);
            for list in &by_cell {
                for (ia, ta) in list {
                    for (ib, tb) in list {
                        g[(*ia, *ib)] += term_product(&self.pieces, ta, tb);
                    }
                }
            }
            (&g + g.transpose()) * 0.5
        })
    }

    /// Fourier transforms of every basis function at `omega`, written to `out`.
    pub fn fourier_row(&self, omega: f64, out: &mut [Complex64]) {
        let ncell = self.cells();
        let xi = omega / ncell as f64;
        let u = self.pieces.local_fourier(xi);
        let phases = phase_table(xi, ncell + 1);
        let scale = (ncell as f64).sqrt().recip();
        for (o, b) in out.iter_mut().zip(&self.basis) {
            let mut s = Complex64::new(0.0, 0.0);
            for t in &b.terms {
                let uj = u[self.pieces.index(t.piece)];
                s += if t.reversed {
                    uj.conj() * phases[t.cell + 1] * t.coeff
                } else {
                    uj * phases[t.cell] * t.coeff
                };
            }
            *o = s * scale;
        }
    }

    /// Fourier transforms of one basis function at several frequencies.
    pub fn fourier_column(&self, m: usize, omegas: &[f64]) -> Vec<Complex64> {
        let ncell = self.cells() as f64;
        let scale = ncell.sqrt().recip();
        omegas
            .iter()
            .map(|&w| {
                let xi = w / ncell;
                let u = self.pieces.local_fourier(xi);
                let mut s = Complex64::new(0.0, 0.0);
                for t in &self.basis[m].terms {
                    let uj = u[self.pieces.index(t.piece)];
                    s += if t.reversed {
                        uj.conj() * Complex64::cis(-2.0 * PI * (t.cell + 1) as f64 * xi) * t.coeff
                    } else {
                        uj * Complex64::cis(-2.0 * PI * t.cell as f64 * xi) * t.coeff
                    };
                }
                s * scale
            })
            .collect()
    }

    /// `|omegas| x M` matrix of basis Fourier transforms.
    pub fn basis_fourier(&self, omegas: &[f64]) -> DMatrix<Complex64> {
        let m = self.dim();
        let rows: Vec<Vec<Complex64>> = omegas
            .par_iter()
            .map(|&w| {
                let mut row = vec![Complex64::new(0.0, 0.0); m];
                self.fourier_row(w, &mut row);
                row
            })
            .collect();
        DMatrix::from_fn(omegas.len(), m, |i, j| rows[i][j])
    }

    /// `phi^(omega / 2^R)` for the interior closed form
    /// `phi_{R,k}^(omega) = 2^{-R/2} phi^(omega / 2^R) e^{-2 pi i k omega / 2^R}`.
    pub fn scaled_scaling_fourier(&self, omega: f64) -> Complex64 {
        self.pieces.scaling_fourier(omega / self.cells() as f64)
    }

    /// Value of basis function `m` at `x in [0, 1]`.
    pub fn basis_value(&self, m: usize, x: f64) -> f64 {
        let (cell, t) = self.locate(x);
        let amp = (self.cells() as f64).sqrt();
        self.basis[m]
            .terms
            .iter()
            .filter(|term| term.cell == cell)
            .map(|term| term.coeff * amp * self.piece_value(term, t))
            .sum()
    }

    fn locate(&self, x: f64) -> (usize, f64) {
        let n = self.cells();
        let s = x.clamp(0.0, 1.0) * n as f64;
        let c = (s.floor() as usize).min(n - 1);
        (c, s - c as f64)
    }

    fn piece_value(&self, term: &Term, t: f64) -> f64 {
        if self.filter.is_haar() {
            // t = 1 only occurs at x = 1, taken as a left limit
            return if term.piece == 0 { 1.0 } else { 0.0 };
        }
        if term.reversed {
            self.pieces.value(term.piece, 1.0 - t)
        } else {
            self.pieces.value(term.piece, t)
        }
    }

    /// `sum_m a_m phi_m(x)` at every grid point.
    pub fn evaluate(&self, coeffs: &[Complex64], grid: &[f64]) -> Result<Vec<Complex64>> {
        if coeffs.len() != self.dim() {
            return Err(NugsError::ShapeMismatch {
                expected: self.dim(),
                got: coeffs.len(),
            });
        }
        let mut by_cell: Vec<Vec<(usize, Term)>> = vec![Vec::new(); self.cells()];
        for (idx, b) in self.basis.iter().enumerate() {
            for t in &b.terms {
                by_cell[t.cell].push((idx, *t));
            }
        }
        let amp = (self.cells() as f64).sqrt();
        Ok(grid
            .par_iter()
            .map(|&x| {
                let (cell, t) = self.locate(x);
                by_cell[cell]
                    .iter()
                    .map(|(idx, term)| {
                        coeffs[*idx] * (term.coeff * amp * self.piece_value(term, t))
                    })
                    .sum()
            })
            .collect())
    }

    /// `<f, phi_m> = int_0^1 f phi_m` for every basis function, from a
    /// degree-20 Legendre expansion of `f` on each cell and the exact piece
    /// Legendre moments. Returns the products and the largest trailing
    /// Legendre coefficient seen, a proxy for the expansion error.
    pub fn inner_products<F>(&self, f: F) -> (DVector<Complex64>, f64)
    where
        F: Fn(f64) -> Complex64 + Sync,
    {
        let ncell = self.cells();
        let rule = UnitRule::new(LEGENDRE_DEGREE + 12);
        let polys: Vec<Vec<f64>> = rule
            .nodes
            .iter()
            .map(|&t| shifted_legendre(LEGENDRE_DEGREE, t))
            .collect();
        let width = 1.0 / ncell as f64;
        let cell_coeffs: Vec<(Vec<Complex64>, f64)> = (0..ncell)
            .into_par_iter()
            .map(|c| {
                let mut a = vec![Complex64::new(0.0, 0.0); LEGENDRE_DEGREE + 1];
                for (q, (&t, &w)) in rule.nodes.iter().zip(&rule.weights).enumerate() {
                    let v = f((c as f64 + t) * width) * w;
                    for (i, ai) in a.iter_mut().enumerate() {
                        *ai += v * polys[q][i];
                    }
                }
                for (i, ai) in a.iter_mut().enumerate() {
                    *ai *= (2 * i + 1) as f64;
                }
                let tail = a[LEGENDRE_DEGREE].norm() + a[LEGENDRE_DEGREE - 1].norm();
                (a, tail)
            })
            .collect();
        let tail = cell_coeffs.iter().map(|c| c.1).fold(0.0, f64::max);
        let scale = width.sqrt();
        let out = self
            .basis
            .iter()
            .map(|b| {
                let mut s = Complex64::new(0.0, 0.0);
                for t in &b.terms {
                    let a = &cell_coeffs[t.cell].0;
                    let idx = self.pieces.index(t.piece);
                    let mut acc = Complex64::new(0.0, 0.0);
                    for (i, ai) in a.iter().enumerate() {
                        let lam = self.pieces.legendre[i][idx];
                        let sign = if t.reversed && i % 2 == 1 { -1.0 } else { 1.0 };
                        acc += *ai * (sign * lam);
                    }
                    s += acc * (t.coeff * scale);
                }
                s
            })
            .collect::<Vec<_>>();
        (DVector::from_vec(out), tail)
    }

    /// Inner products `<e_nu, phi_m> = conj(phi_m^(nu))` with `e_nu(x) = e^{2 pi i nu x}`.
    pub fn exponential_inner_products(&self, nu: f64) -> DVector<Complex64> {
        let mut row = vec![Complex64::new(0.0, 0.0); self.dim()];
        self.fourier_row(nu, &mut row);
        DVector::from_iterator(self.dim(), row.into_iter().map(|z| z.conj()))
    }
}

/// `e^{-2 pi i c xi}` for `c = 0..len`, resynchronised every 32 steps.
pub fn phase_table(xi: f64, len: usize) -> Vec<Complex64> {
    let step = Complex64::cis(-2.0 * PI * xi);
    let mut out = Vec::with_capacity(len);
    let mut cur = Complex64::new(1.0, 0.0);
    for c in 0..len {
        if c % 32 == 0 {
            cur = Complex64::cis(-2.0 * PI * c as f64 * xi);
        }
        out.push(cur);
        cur *= step;
    }
    out
}
