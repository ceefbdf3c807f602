//! Unimodular lattices in dimensions 2 and 3.
//!
//! A [`LatticeBasis`] stores the generating columns of `g Z^d` for some
//! `g` of determinant one. Shortest vectors are found by LLL reduction
//! followed by Fincke–Pohst enumeration; [`shortest_vector_exhaustive`] is a
//! slower box search that does not share any code with that path and serves
//! as an oracle.

use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use num_traits::Float;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub const MAX_DIM: usize = 3;

/// Allowed deviation of the determinant from one.
pub const DET_TOLERANCE: f64 = 1e-9;

/// Inputs to [`shortest_vector`] above this (Frobenius) condition number are rejected.
pub const MAX_CONDITION: f64 = 1e12;

/// Relative tolerance under which two vector norms count as a tie.
const TIE_TOLERANCE: f64 = 1e-12;

type Mat = [[f64; MAX_DIM]; MAX_DIM];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NormKind {
    Euclidean,
    Supremum,
}

impl NormKind {
    pub fn of(self, v: &[f64]) -> f64 {
        match self {
            NormKind::Euclidean => v.iter().map(|x| x * x).sum::<f64>().sqrt(),
            NormKind::Supremum => v.iter().fold(0.0, |m, x| m.max(x.abs())),
        }
    }
}

/// Columns generating a unimodular lattice; `cols[j]` is the j-th column.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatticeBasis {
    dim: usize,
    cols: Mat,
}

impl LatticeBasis {
    pub fn identity(dim: usize) -> Self {
        assert!((2..=MAX_DIM).contains(&dim), "dimension must be 2 or 3");
        let mut cols = [[0.0; MAX_DIM]; MAX_DIM];
        for (i, c) in cols.iter_mut().enumerate().take(dim) {
            c[i] = 1.0;
        }
        LatticeBasis { dim, cols }
    }

    /// Builds a basis from columns and checks unimodularity.
    pub fn from_cols(cols: &[&[f64]]) -> Result<Self> {
        let dim = cols.len();
        if !(2..=MAX_DIM).contains(&dim) {
            return Err(Error::unsupported("lattice dimension must be 2 or 3"));
        }
        let mut m = [[0.0; MAX_DIM]; MAX_DIM];
        for (j, c) in cols.iter().enumerate() {
            if c.len() != dim {
                return Err(Error::invalid("basis must be square"));
            }
            m[j][..dim].copy_from_slice(c);
        }
        let b = LatticeBasis { dim, cols: m };
        b.validate()?;
        Ok(b)
    }

    /// Builds a basis from a row-major matrix and checks unimodularity.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.len();
        if !(2..=MAX_DIM).contains(&dim) {
            return Err(Error::unsupported("lattice dimension must be 2 or 3"));
        }
        let mut m = [[0.0; MAX_DIM]; MAX_DIM];
        for (i, r) in rows.iter().enumerate() {
            if r.len() != dim {
                return Err(Error::invalid("basis must be square"));
            }
            for (j, &x) in r.iter().enumerate() {
                m[j][i] = x;
            }
        }
        let b = LatticeBasis { dim, cols: m };
        b.validate()?;
        Ok(b)
    }

    /// Skips validation; used internally for products of unimodular matrices.
    pub(crate) fn from_raw(dim: usize, cols: Mat) -> Self {
        LatticeBasis { dim, cols }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn col(&self, j: usize) -> &[f64] {
        &self.cols[j][..self.dim]
    }

    pub fn entry(&self, row: usize, col: usize) -> f64 {
        self.cols[col][row]
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.dim).map(|i| (0..self.dim).map(|j| self.cols[j][i]).collect()).collect()
    }

    pub fn det(&self) -> f64 {
        let c = &self.cols;
        match self.dim {
            2 => c[0][0] * c[1][1] - c[1][0] * c[0][1],
            _ => {
                c[0][0] * (c[1][1] * c[2][2] - c[2][1] * c[1][2])
                    - c[1][0] * (c[0][1] * c[2][2] - c[2][1] * c[0][2])
                    + c[2][0] * (c[0][1] * c[1][2] - c[1][1] * c[0][2])
            }
        }
    }

    fn inverse(&self) -> Option<Mat> {
        let det = self.det();
        if det == 0.0 || !det.is_finite() {
            return None;
        }
        let a = |i: usize, j: usize| self.cols[j][i];
        let mut inv = [[0.0; MAX_DIM]; MAX_DIM];
        // inv stored column-major like `cols`: inv[j][i] = (B^{-1})_{ij}
        match self.dim {
            2 => {
                inv[0][0] = a(1, 1) / det;
                inv[1][1] = a(0, 0) / det;
                inv[1][0] = -a(0, 1) / det;
                inv[0][1] = -a(1, 0) / det;
            }
            _ => {
                for i in 0..3 {
                    for j in 0..3 {
                        let (r0, r1) = ((j + 1) % 3, (j + 2) % 3);
                        let (c0, c1) = ((i + 1) % 3, (i + 2) % 3);
                        let cof = a(r0, c0) * a(r1, c1) - a(r0, c1) * a(r1, c0);
                        inv[j][i] = cof / det;
                    }
                }
            }
        }
        Some(inv)
    }

    /// Frobenius condition number `|B|_F |B^{-1}|_F`.
    pub fn condition_number(&self) -> f64 {
        let frob = |m: &Mat| -> f64 {
            let mut s = 0.0;
            for c in m.iter().take(self.dim) {
                for x in c.iter().take(self.dim) {
                    s += x * x;
                }
            }
            s.sqrt()
        };
        match self.inverse() {
            Some(inv) => frob(&self.cols) * frob(&inv),
            None => f64::INFINITY,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let det = self.det();
        if !det.is_finite() || (det - 1.0).abs() > DET_TOLERANCE {
            return Err(Error::invalid(alloc::format!("basis is not unimodular (det = {det})")));
        }
        if !self.condition_number().is_finite() {
            return Err(Error::invalid("basis columns are linearly dependent"));
        }
        Ok(())
    }

    /// `g · B` for a row-major `d × d` matrix `g`.
    pub fn left_mul(&self, g: &[[f64; MAX_DIM]; MAX_DIM]) -> Self {
        let d = self.dim;
        let mut out = [[0.0; MAX_DIM]; MAX_DIM];
        for (j, col) in self.cols.iter().enumerate().take(d) {
            for (i, g_row) in g.iter().enumerate().take(d) {
                out[j][i] = (0..d).map(|k| g_row[k] * col[k]).sum();
            }
        }
        LatticeBasis { dim: d, cols: out }
    }

    /// Multiplies row `i` by `factors[i]`.
    pub fn scale_rows(&self, factors: &[f64]) -> Self {
        let mut out = self.cols;
        for col in out.iter_mut().take(self.dim) {
            for (x, f) in col.iter_mut().zip(factors) {
                *x *= f;
            }
        }
        LatticeBasis { dim: self.dim, cols: out }
    }

    /// Rescales by `|det|^{-1/d}` when the determinant drifted away from one.
    /// Returns the basis and whether a correction was applied.
    pub fn renormalized(&self) -> (Self, bool) {
        let det = self.det();
        if (det - 1.0).abs() <= 1e-12 || det <= 0.0 {
            return (*self, false);
        }
        let s = det.powf(-1.0 / self.dim as f64);
        let mut out = self.cols;
        for col in out.iter_mut().take(self.dim) {
            for x in col.iter_mut().take(self.dim) {
                *x *= s;
            }
        }
        (LatticeBasis { dim: self.dim, cols: out }, true)
    }

    /// Lattice vector `B c`.
    pub fn combine(&self, coeffs: &[i64]) -> Vec<f64> {
        let d = self.dim;
        (0..d).map(|i| (0..d).map(|j| self.cols[j][i] * coeffs[j] as f64).sum()).collect()
    }

    /// LLL-reduced basis of the same lattice (δ = 0.99).
    pub fn reduced(&self) -> LatticeBasis {
        let mut cols = self.cols;
        lll(self.dim, &mut cols, None);
        LatticeBasis { dim: self.dim, cols }
    }

    /// LLL-reduced basis together with the integer matrix `U` (column-major)
    /// such that `reduced = B U`.
    pub fn reduced_with_transform(&self) -> (LatticeBasis, [[i64; MAX_DIM]; MAX_DIM]) {
        let mut cols = self.cols;
        let mut u = [[0i64; MAX_DIM]; MAX_DIM];
        for (i, c) in u.iter_mut().enumerate().take(self.dim) {
            c[i] = 1;
        }
        lll(self.dim, &mut cols, Some(&mut u));
        (LatticeBasis { dim: self.dim, cols }, u)
    }

    /// Length of the shortest nonzero vector. Unlike [`shortest_vector`] this
    /// does not reject ill-conditioned input; it reduces first.
    pub fn systole(&self, norm: NormKind) -> f64 {
        let red = self.reduced();
        enumerate_shortest(&red, norm).1
    }
}

impl Serialize for LatticeBasis {
    fn serialize<S: Serializer>(&self, s: S) -> core::result::Result<S::Ok, S::Error> {
        self.to_rows().serialize(s)
    }
}

impl<'de> Deserialize<'de> for LatticeBasis {
    fn deserialize<D: Deserializer<'de>>(d: D) -> core::result::Result<Self, D::Error> {
        let rows = Vec::<Vec<f64>>::deserialize(d)?;
        LatticeBasis::from_rows(&rows).map_err(|e| serde::de::Error::custom(e.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShortVectorResult {
    /// Integer coordinates with respect to the input basis.
    pub vector: Vec<i64>,
    pub embedded: Vec<f64>,
    pub norm: f64,
    pub norm_kind: NormKind,
    /// Every nonzero lattice vector of norm below this radius was examined.
    pub radius: f64,
}

fn dot(a: &[f64; MAX_DIM], b: &[f64; MAX_DIM], d: usize) -> f64 {
    (0..d).map(|i| a[i] * b[i]).sum()
}

/// Gram–Schmidt data: squared lengths of b*_i and coefficients mu[i][j], j < i.
fn gram_schmidt(d: usize, cols: &Mat) -> ([f64; MAX_DIM], Mat) {
    let mut bstar = *cols;
    let mut norms = [0.0; MAX_DIM];
    let mut mu = [[0.0; MAX_DIM]; MAX_DIM];
    for i in 0..d {
        for j in 0..i {
            mu[i][j] = if norms[j] > 0.0 { dot(&cols[i], &bstar[j], d) / norms[j] } else { 0.0 };
            for k in 0..d {
                bstar[i][k] -= mu[i][j] * bstar[j][k];
            }
        }
        norms[i] = dot(&bstar[i], &bstar[i], d);
    }
    (norms, mu)
}

fn lll(d: usize, cols: &mut Mat, mut u: Option<&mut [[i64; MAX_DIM]; MAX_DIM]>) {
    const DELTA: f64 = 0.99;
    let mut k = 1;
    let mut guard = 0;
    while k < d && guard < 10_000 {
        guard += 1;
        for j in (0..k).rev() {
            let (_, mu) = gram_schmidt(d, cols);
            let q = mu[k][j].round();
            if q != 0.0 {
                let src = cols[j];
                for (x, s) in cols[k].iter_mut().zip(src.iter()).take(d) {
                    *x -= q * s;
                }
                if let Some(u) = u.as_deref_mut() {
                    let qi = q as i64;
                    let srcu = u[j];
                    for (x, s) in u[k].iter_mut().zip(srcu.iter()).take(d) {
                        *x -= qi * s;
                    }
                }
            }
        }
        let (norms, mu) = gram_schmidt(d, cols);
        if norms[k] >= (DELTA - mu[k][k - 1] * mu[k][k - 1]) * norms[k - 1] {
            k += 1;
        } else {
            cols.swap(k, k - 1);
            if let Some(u) = u.as_deref_mut() {
                u.swap(k, k - 1);
            }
            k = if k > 1 { k - 1 } else { 1 };
        }
    }
}

/// Sign-normalises so the first nonzero coordinate is positive.
fn canonical_sign(c: &mut [i64]) {
    if let Some(&first) = c.iter().find(|&&x| x != 0) {
        if first < 0 {
            c.iter_mut().for_each(|x| *x = -*x);
        }
    }
}

/// Deterministic preference among equal-norm minima: after sign
/// normalisation, the lexicographically largest coefficient vector wins
/// (so `(1, 0)` beats `(0, 1)` and `(1, -1)`).
fn prefer(candidate: &[i64], incumbent: &[i64]) -> bool {
    candidate.cmp(incumbent) == Ordering::Greater
}

struct Best {
    coeffs: [i64; MAX_DIM],
    norm: f64,
    found: bool,
}

impl Best {
    fn offer(&mut self, d: usize, coeffs: &[i64; MAX_DIM], norm: f64) {
        let mut c = *coeffs;
        canonical_sign(&mut c[..d]);
        if !self.found || norm < self.norm * (1.0 - TIE_TOLERANCE) {
            self.coeffs = c;
            self.norm = norm;
            self.found = true;
        } else if norm <= self.norm * (1.0 + TIE_TOLERANCE) && prefer(&c[..d], &self.coeffs[..d]) {
            self.coeffs = c;
            self.norm = self.norm.min(norm);
        }
    }
}

/// Fincke–Pohst enumeration on a (preferably reduced) basis. Returns the
/// coefficient vector with respect to `basis`, its norm, and the radius used.
fn enumerate_shortest(basis: &LatticeBasis, norm: NormKind) -> ([i64; MAX_DIM], f64, f64) {
    let d = basis.dim;
    let cols = &basis.cols;
    let (r, mu) = gram_schmidt(d, cols);
    let sqrt_d = (d as f64).sqrt();

    // initial bound from the basis columns themselves
    let mut best = Best { coeffs: [0; MAX_DIM], norm: f64::INFINITY, found: false };
    for j in 0..d {
        let mut c = [0i64; MAX_DIM];
        c[j] = 1;
        best.offer(d, &c, norm.of(&cols[j][..d]));
    }
    let radius_of = |b: f64| -> f64 {
        match norm {
            NormKind::Euclidean => b,
            NormKind::Supremum => b * sqrt_d,
        }
    };
    let initial_radius = best.norm;

    let mut coeffs = [0i64; MAX_DIM];
    let mut centers = [0.0; MAX_DIM];
    let mut partial = [0.0; MAX_DIM + 1];
    let mut upper = [0i64; MAX_DIM];
    // iterative depth-first search from level d-1 down to 0
    let mut level = d - 1;
    let start_level = |lvl: usize,
                       coeffs: &[i64; MAX_DIM],
                       partial: &[f64; MAX_DIM + 1],
                       centers: &mut [f64; MAX_DIM],
                       bound2: f64|
     -> Option<(i64, i64)> {
        let c: f64 = -((lvl + 1)..d).map(|j| mu[j][lvl] * coeffs[j] as f64).sum::<f64>();
        centers[lvl] = c;
        let rem = bound2 - partial[lvl + 1];
        if rem < 0.0 || r[lvl] <= 0.0 {
            return None;
        }
        let w = (rem / r[lvl]).sqrt();
        let lo = (c - w).ceil() as i64;
        let hi = (c + w).floor() as i64;
        if lo > hi {
            None
        } else {
            Some((lo, hi))
        }
    };
    let bound2 = |b: f64| {
        let rad = radius_of(b) * (1.0 + 1e-9);
        rad * rad
    };
    match start_level(level, &coeffs, &partial, &mut centers, bound2(best.norm)) {
        Some((lo, hi)) => {
            coeffs[level] = lo;
            upper[level] = hi;
        }
        None => return (best.coeffs, best.norm, initial_radius),
    }
    loop {
        if coeffs[level] > upper[level] {
            if level == d - 1 {
                break;
            }
            level += 1;
            coeffs[level] += 1;
            continue;
        }
        let diff = coeffs[level] as f64 - centers[level];
        partial[level] = partial[level + 1] + r[level] * diff * diff;
        if level == 0 {
            if coeffs[..d].iter().any(|&x| x != 0) {
                let v: Vec<f64> =
                    (0..d).map(|i| (0..d).map(|j| cols[j][i] * coeffs[j] as f64).sum()).collect();
                best.offer(d, &coeffs, norm.of(&v));
            }
            coeffs[0] += 1;
            continue;
        }
        let next = level - 1;
        match start_level(next, &coeffs, &partial, &mut centers, bound2(best.norm)) {
            Some((lo, hi)) => {
                level = next;
                coeffs[level] = lo;
                upper[level] = hi;
            }
            None => coeffs[level] += 1,
        }
    }
    (best.coeffs, best.norm, initial_radius)
}

fn transform_coeffs(d: usize, u: &[[i64; MAX_DIM]; MAX_DIM], c: &[i64; MAX_DIM]) -> Vec<i64> {
    // original coefficients = U c, with U column-major
    let mut out: Vec<i64> = (0..d).map(|i| (0..d).map(|j| u[j][i] * c[j]).sum()).collect();
    canonical_sign(&mut out);
    out
}

/// Shortest nonzero vector, with ties broken deterministically.
pub fn shortest_vector(basis: &LatticeBasis, norm: NormKind) -> Result<ShortVectorResult> {
    basis.validate()?;
    let cond = basis.condition_number();
    if cond > MAX_CONDITION {
        return Err(Error::invalid(alloc::format!(
            "ill-conditioned basis (condition number {cond:.3e} > {MAX_CONDITION:.0e})"
        )));
    }
    let (red, u) = basis.reduced_with_transform();
    let (c, best, radius) = enumerate_shortest(&red, norm);
    let d = basis.dim;
    // the enumeration may have picked a different tie representative in the
    // reduced coordinates; re-run the tie-break in original coordinates
    let mut ties = vec![transform_coeffs(d, &u, &c)];
    collect_ties(&red, norm, best, &u, &mut ties);
    ties.sort();
    let vector = ties.pop().expect("at least one minimum");
    let embedded = basis.combine(&vector);
    Ok(ShortVectorResult { norm: norm.of(&embedded), vector, embedded, norm_kind: norm, radius })
}

/// Gathers every coefficient vector (in original coordinates) whose norm ties `best`.
fn collect_ties(
    red: &LatticeBasis,
    norm: NormKind,
    best: f64,
    u: &[[i64; MAX_DIM]; MAX_DIM],
    out: &mut Vec<Vec<i64>>,
) {
    let d = red.dim;
    let bound = match norm {
        NormKind::Euclidean => best,
        NormKind::Supremum => best * (d as f64).sqrt(),
    } * (1.0 + 1e-9);
    for c in box_points(red, bound) {
        if c.iter().all(|&x| x == 0) {
            continue;
        }
        let mut cc = [0i64; MAX_DIM];
        cc[..d].copy_from_slice(&c);
        let v = red.combine(&c);
        let n = norm.of(&v);
        if n <= best * (1.0 + TIE_TOLERANCE) {
            let t = transform_coeffs(d, u, &cc);
            if !out.contains(&t) {
                out.push(t);
            }
        }
    }
}

/// Coefficient box `|c_i| <= radius * |row_i(B^{-1})|`, which contains
/// every lattice vector of Euclidean norm at most `radius`.
fn coefficient_box(basis: &LatticeBasis, radius: f64) -> Option<Vec<i64>> {
    let inv = basis.inverse()?;
    let d = basis.dim;
    Some(
        (0..d)
            .map(|i| {
                let row_norm = (0..d).map(|j| inv[j][i] * inv[j][i]).sum::<f64>().sqrt();
                (radius * row_norm).floor() as i64
            })
            .collect(),
    )
}

fn box_points(basis: &LatticeBasis, radius: f64) -> Vec<Vec<i64>> {
    let d = basis.dim;
    let Some(bounds) = coefficient_box(basis, radius) else {
        return Vec::new();
    };
    let mut out = Vec::new();
    let mut c: Vec<i64> = bounds.iter().map(|b| -b).collect();
    loop {
        out.push(c.clone());
        let mut i = 0;
        loop {
            if i == d {
                return out;
            }
            c[i] += 1;
            if c[i] > bounds[i] {
                c[i] = -bounds[i];
                i += 1;
            } else {
                break;
            }
        }
    }
}

/// Certified exhaustive search over the coefficient box implied by the
/// shortest input column. Independent of reduction and enumeration; meant as
/// a test oracle for small, well-conditioned inputs.
pub fn shortest_vector_exhaustive(basis: &LatticeBasis, norm: NormKind) -> Result<ShortVectorResult> {
    basis.validate()?;
    let d = basis.dim;
    let shortest_col = (0..d).map(|j| norm.of(basis.col(j))).fold(f64::INFINITY, f64::min);
    let radius = match norm {
        NormKind::Euclidean => shortest_col,
        NormKind::Supremum => shortest_col * (d as f64).sqrt(),
    };
    let bounds = coefficient_box(basis, radius * (1.0 + 1e-9))
        .ok_or_else(|| Error::invalid("singular basis"))?;
    let volume: f64 = bounds.iter().map(|&b| (2 * b + 1) as f64).product();
    if volume > 1e7 {
        return Err(Error::budget("exhaustive coefficient box too large", None));
    }
    let mut best: Option<(Vec<i64>, f64)> = None;
    for mut c in box_points(basis, radius * (1.0 + 1e-9)) {
        if c.iter().all(|&x| x == 0) {
            continue;
        }
        let n = norm.of(&basis.combine(&c));
        canonical_sign(&mut c);
        best = match best {
            None => Some((c, n)),
            Some((bc, bn)) => {
                if n < bn * (1.0 - TIE_TOLERANCE) || (n <= bn * (1.0 + TIE_TOLERANCE) && prefer(&c, &bc)) {
                    Some((c, n.min(bn)))
                } else {
                    Some((bc, bn))
                }
            }
        };
    }
    let (vector, _) = best.expect("box contains the basis columns");
    let embedded = basis.combine(&vector);
    Ok(ShortVectorResult { norm: norm.of(&embedded), vector, embedded, norm_kind: norm, radius })
}
