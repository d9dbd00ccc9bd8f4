//! Scalars over R, C and H, and dense matrices over each.
//!
//! Every matrix is stored with quaternion entries; real and complex matrices
//! simply leave the unused imaginary components at zero. Vectors are column
//! vectors and `K^N` is a *right* K-module: matrices act on the left, scalars
//! multiply on the right. Spectral data of quaternionic matrices is always
//! read off the complex adjoint
//!
//! ```text
//! chi(A1 + A2 j) = [[A1, A2], [-conj(A2), conj(A1)]]
//! ```
//!
//! which is a ring homomorphism `M_n(H) -> M_2n(C)`.

use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A Hamilton quaternion `w + x i + y j + z k`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Quaternion {
    pub w: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Quaternion {
    pub const ZERO: Self = Self::new(0.0, 0.0, 0.0, 0.0);
    pub const ONE: Self = Self::new(1.0, 0.0, 0.0, 0.0);
    pub const I: Self = Self::new(0.0, 1.0, 0.0, 0.0);
    pub const J: Self = Self::new(0.0, 0.0, 1.0, 0.0);
    pub const K: Self = Self::new(0.0, 0.0, 0.0, 1.0);

    pub const fn new(w: f64, x: f64, y: f64, z: f64) -> Self {
        Self { w, x, y, z }
    }

    pub const fn real(w: f64) -> Self {
        Self::new(w, 0.0, 0.0, 0.0)
    }

    pub fn from_complex(c: Complex64) -> Self {
        Self::new(c.re, c.im, 0.0, 0.0)
    }

    /// Splits `q = c1 + c2 j` into its two complex parts.
    pub fn complex_parts(self) -> (Complex64, Complex64) {
        // (y + z i) j = y j + z k
        (Complex64::new(self.w, self.x), Complex64::new(self.y, self.z))
    }

    pub fn from_complex_parts(c1: Complex64, c2: Complex64) -> Self {
        Self::new(c1.re, c1.im, c2.re, c2.im)
    }

    pub fn conj(self) -> Self {
        Self::new(self.w, -self.x, -self.y, -self.z)
    }

    pub fn norm_sqr(self) -> f64 {
        self.w * self.w + self.x * self.x + self.y * self.y + self.z * self.z
    }

    pub fn norm(self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn scale(self, s: f64) -> Self {
        Self::new(self.w * s, self.x * s, self.y * s, self.z * s)
    }

    /// Multiplicative inverse. Returns `None` for zero.
    pub fn inv(self) -> Option<Self> {
        let n = self.norm_sqr();
        (n > 0.0).then(|| self.conj().scale(1.0 / n))
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.w, self.x, self.y, self.z]
    }

    pub fn from_slice(c: &[f64]) -> Self {
        let g = |i: usize| c.get(i).copied().unwrap_or(0.0);
        Self::new(g(0), g(1), g(2), g(3))
    }

    /// The 4x4 real matrix of `v -> self * v` in the basis (1, i, j, k).
    pub fn left_matrix(self) -> [[f64; 4]; 4] {
        let Quaternion { w, x, y, z } = self;
        [
            [w, -x, -y, -z],
            [x, w, -z, y],
            [y, z, w, -x],
            [z, -y, x, w],
        ]
    }
}

/// Hamilton product with `i^2 = j^2 = k^2 = ijk = -1`.
pub fn quaternion_mul(a: Quaternion, b: Quaternion) -> Quaternion {
    Quaternion::new(
        a.w * b.w - a.x * b.x - a.y * b.y - a.z * b.z,
        a.w * b.x + a.x * b.w + a.y * b.z - a.z * b.y,
        a.w * b.y - a.x * b.z + a.y * b.w + a.z * b.x,
        a.w * b.z + a.x * b.y - a.y * b.x + a.z * b.w,
    )
}

impl Mul for Quaternion {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        quaternion_mul(self, rhs)
    }
}

impl Mul<f64> for Quaternion {
    type Output = Self;
    fn mul(self, rhs: f64) -> Self {
        self.scale(rhs)
    }
}

impl Div<f64> for Quaternion {
    type Output = Self;
    fn div(self, rhs: f64) -> Self {
        self.scale(1.0 / rhs)
    }
}

impl Add for Quaternion {
    type Output = Self;
    fn add(self, r: Self) -> Self {
        Self::new(self.w + r.w, self.x + r.x, self.y + r.y, self.z + r.z)
    }
}

impl AddAssign for Quaternion {
    fn add_assign(&mut self, r: Self) {
        *self = *self + r;
    }
}

impl Sub for Quaternion {
    type Output = Self;
    fn sub(self, r: Self) -> Self {
        Self::new(self.w - r.w, self.x - r.x, self.y - r.y, self.z - r.z)
    }
}

impl Neg for Quaternion {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.w, -self.x, -self.y, -self.z)
    }
}

impl fmt::Display for Quaternion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{:+}i{:+}j{:+}k", self.w, self.x, self.y, self.z)
    }
}

/// The scalar field (or skew field) a matrix lives over.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ScalarTag {
    R,
    C,
    H,
}

impl ScalarTag {
    /// Real dimension of the scalars: 1, 2 or 4.
    pub fn dim_r(self) -> usize {
        match self {
            ScalarTag::R => 1,
            ScalarTag::C => 2,
            ScalarTag::H => 4,
        }
    }

    /// Imaginary units of the scalars, as quaternions.
    pub fn imaginary_units(self) -> &'static [Quaternion] {
        match self {
            ScalarTag::R => &[],
            ScalarTag::C => &[Quaternion::I],
            ScalarTag::H => &[Quaternion::I, Quaternion::J, Quaternion::K],
        }
    }

    /// Drops the components a scalar of this kind cannot carry.
    pub fn project(self, q: Quaternion) -> Quaternion {
        match self {
            ScalarTag::R => Quaternion::real(q.w),
            ScalarTag::C => Quaternion::new(q.w, q.x, 0.0, 0.0),
            ScalarTag::H => q,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ScalarTag::R => "R",
            ScalarTag::C => "C",
            ScalarTag::H => "H",
        }
    }

    /// The larger of two scalar fields.
    pub fn join(self, other: ScalarTag) -> ScalarTag {
        if self.dim_r() >= other.dim_r() {
            self
        } else {
            other
        }
    }
}

impl fmt::Display for ScalarTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Dense row-major matrix over R, C or H.
#[derive(Clone, Debug, PartialEq)]
pub struct MatK {
    tag: ScalarTag,
    rows: usize,
    cols: usize,
    data: Vec<Quaternion>,
}

impl MatK {
    pub fn zeros(tag: ScalarTag, rows: usize, cols: usize) -> Self {
        Self {
            tag,
            rows,
            cols,
            data: vec![Quaternion::ZERO; rows * cols],
        }
    }

    pub fn identity(tag: ScalarTag, n: usize) -> Self {
        let mut m = Self::zeros(tag, n, n);
        for i in 0..n {
            m.set(i, i, Quaternion::ONE);
        }
        m
    }

    /// Builds a matrix from row-major entries. Components the tag cannot
    /// carry are dropped.
    pub fn from_entries(tag: ScalarTag, rows: usize, cols: usize, data: Vec<Quaternion>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                found: data.len(),
            });
        }
        let data = data.into_iter().map(|q| tag.project(q)).collect();
        Ok(Self { tag, rows, cols, data })
    }

    pub fn from_real(rows: usize, cols: usize, data: &[f64]) -> Self {
        assert_eq!(data.len(), rows * cols, "entry count");
        Self {
            tag: ScalarTag::R,
            rows,
            cols,
            data: data.iter().map(|&v| Quaternion::real(v)).collect(),
        }
    }

    pub fn from_complex(rows: usize, cols: usize, data: &[Complex64]) -> Self {
        assert_eq!(data.len(), rows * cols, "entry count");
        Self {
            tag: ScalarTag::C,
            rows,
            cols,
            data: data.iter().map(|&c| Quaternion::from_complex(c)).collect(),
        }
    }

    pub fn from_fn(tag: ScalarTag, rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Quaternion) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(tag.project(f(r, c)));
            }
        }
        Self { tag, rows, cols, data }
    }

    /// Diagonal matrix with real entries.
    pub fn real_diagonal(tag: ScalarTag, diag: &[f64]) -> Self {
        let n = diag.len();
        Self::from_fn(tag, n, n, |r, c| if r == c { Quaternion::real(diag[r]) } else { Quaternion::ZERO })
    }

    pub fn tag(&self) -> ScalarTag {
        self.tag
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn entries(&self) -> &[Quaternion] {
        &self.data
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> Quaternion {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: Quaternion) {
        self.data[r * self.cols + c] = self.tag.project(v);
    }

    /// Same entries, reinterpreted over a larger scalar field.
    pub fn promote(&self, tag: ScalarTag) -> Self {
        let tag = self.tag.join(tag);
        Self {
            tag,
            rows: self.rows,
            cols: self.cols,
            data: self.data.clone(),
        }
    }

    pub fn matmul(&self, rhs: &MatK) -> MatK {
        assert_eq!(self.cols, rhs.rows, "matmul shape mismatch");
        let tag = self.tag.join(rhs.tag);
        let mut out = MatK::zeros(tag, self.rows, rhs.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(r, k);
                if a == Quaternion::ZERO {
                    continue;
                }
                let row = &rhs.data[k * rhs.cols..(k + 1) * rhs.cols];
                let dst = &mut out.data[r * rhs.cols..(r + 1) * rhs.cols];
                for (d, &b) in dst.iter_mut().zip(row) {
                    *d += a * b;
                }
            }
        }
        out
    }

    pub fn add(&self, rhs: &MatK) -> MatK {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "add shape mismatch");
        MatK {
            tag: self.tag.join(rhs.tag),
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(&a, &b)| a + b).collect(),
        }
    }

    pub fn sub(&self, rhs: &MatK) -> MatK {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "sub shape mismatch");
        MatK {
            tag: self.tag.join(rhs.tag),
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(&a, &b)| a - b).collect(),
        }
    }

    pub fn scale(&self, s: f64) -> MatK {
        MatK {
            tag: self.tag,
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&a| a.scale(s)).collect(),
        }
    }

    /// Right multiplication of every entry by a scalar.
    pub fn scale_right(&self, s: Quaternion) -> MatK {
        let tag = self.tag.join(if s.y != 0.0 || s.z != 0.0 {
            ScalarTag::H
        } else if s.x != 0.0 {
            ScalarTag::C
        } else {
            ScalarTag::R
        });
        MatK {
            tag,
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&a| a * s).collect(),
        }
    }

    pub fn transpose(&self) -> MatK {
        MatK::from_fn(self.tag, self.cols, self.rows, |r, c| self.get(c, r))
    }

    /// Entrywise conjugate.
    pub fn conj(&self) -> MatK {
        MatK {
            tag: self.tag,
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|q| q.conj()).collect(),
        }
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> MatK {
        MatK::from_fn(self.tag, self.cols, self.rows, |r, c| self.get(c, r).conj())
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|q| q.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|q| q.norm()).fold(0.0, f64::max)
    }

    /// Spectral (operator) norm.
    pub fn op_norm(&self) -> f64 {
        self.singular_values().first().copied().unwrap_or(0.0)
    }

    pub fn submatrix(&self, row0: usize, rows: usize, col0: usize, cols: usize) -> MatK {
        assert!(row0 + rows <= self.rows && col0 + cols <= self.cols, "submatrix out of range");
        MatK::from_fn(self.tag, rows, cols, |r, c| self.get(row0 + r, col0 + c))
    }

    pub fn column(&self, c: usize) -> Vec<Quaternion> {
        (0..self.rows).map(|r| self.get(r, c)).collect()
    }

    pub fn from_columns(tag: ScalarTag, rows: usize, columns: &[Vec<Quaternion>]) -> MatK {
        MatK::from_fn(tag, rows, columns.len(), |r, c| columns[c][r])
    }

    pub fn hstack(&self, rhs: &MatK) -> MatK {
        assert_eq!(self.rows, rhs.rows, "hstack row mismatch");
        let tag = self.tag.join(rhs.tag);
        MatK::from_fn(tag, self.rows, self.cols + rhs.cols, |r, c| {
            if c < self.cols {
                self.get(r, c)
            } else {
                rhs.get(r, c - self.cols)
            }
        })
    }

    pub fn vstack(&self, rhs: &MatK) -> MatK {
        assert_eq!(self.cols, rhs.cols, "vstack column mismatch");
        let tag = self.tag.join(rhs.tag);
        MatK::from_fn(tag, self.rows + rhs.rows, self.cols, |r, c| {
            if r < self.rows {
                self.get(r, c)
            } else {
                rhs.get(r - self.rows, c)
            }
        })
    }

    pub fn block_diag(&self, rhs: &MatK) -> MatK {
        let tag = self.tag.join(rhs.tag);
        MatK::from_fn(tag, self.rows + rhs.rows, self.cols + rhs.cols, |r, c| {
            match (r < self.rows, c < self.cols) {
                (true, true) => self.get(r, c),
                (false, false) => rhs.get(r - self.rows, c - self.cols),
                _ => Quaternion::ZERO,
            }
        })
    }

    /// The complex adjoint `chi(A)` of a quaternionic matrix.
    pub fn complex_adjoint(&self) -> Result<MatK> {
        if self.tag != ScalarTag::H {
            return Err(Error::WrongScalar {
                expected: ScalarTag::H,
                found: self.tag,
            });
        }
        let m = self.complex_adjoint_dmatrix();
        Ok(MatK::from_fn(ScalarTag::C, 2 * self.rows, 2 * self.cols, |r, c| {
            Quaternion::from_complex(m[(r, c)])
        }))
    }

    fn complex_adjoint_dmatrix(&self) -> DMatrix<Complex64> {
        let (n, m) = (self.rows, self.cols);
        DMatrix::from_fn(2 * n, 2 * m, |r, c| {
            let (a1, a2) = self.get(r % n, c % m).complex_parts();
            match (r < n, c < m) {
                (true, true) => a1,
                (true, false) => a2,
                (false, true) => -a2.conj(),
                (false, false) => a1.conj(),
            }
        })
    }

    /// Complex matrix carrying the spectral data: the matrix itself over R
    /// or C, the complex adjoint over H.
    pub fn to_complex(&self) -> DMatrix<Complex64> {
        match self.tag {
            ScalarTag::R | ScalarTag::C => {
                DMatrix::from_fn(self.rows, self.cols, |r, c| self.get(r, c).complex_parts().0)
            }
            ScalarTag::H => self.complex_adjoint_dmatrix(),
        }
    }

    /// Inverse of [`MatK::to_complex`]. For H the argument must have the
    /// complex-adjoint block shape; only its top blocks are read.
    pub fn from_complex_rep(tag: ScalarTag, m: &DMatrix<Complex64>) -> MatK {
        match tag {
            ScalarTag::R => MatK::from_fn(tag, m.nrows(), m.ncols(), |r, c| Quaternion::real(m[(r, c)].re)),
            ScalarTag::C => MatK::from_fn(tag, m.nrows(), m.ncols(), |r, c| Quaternion::from_complex(m[(r, c)])),
            ScalarTag::H => {
                let (n, k) = (m.nrows() / 2, m.ncols() / 2);
                MatK::from_fn(tag, n, k, |r, c| Quaternion::from_complex_parts(m[(r, c)], m[(r, c + k)]))
            }
        }
    }

    /// Real matrix of the underlying R-linear map, with `K^n` identified
    /// with `R^(d n)` coordinate-by-coordinate.
    pub fn realify(&self) -> DMatrix<f64> {
        let d = self.tag.dim_r();
        let mut out = DMatrix::zeros(d * self.rows, d * self.cols);
        for r in 0..self.rows {
            for c in 0..self.cols {
                let l = self.get(r, c).left_matrix();
                for a in 0..d {
                    for b in 0..d {
                        out[(d * r + a, d * c + b)] = l[a][b];
                    }
                }
            }
        }
        out
    }

    /// Reads a K-linear map back from its realification (first column of
    /// each block).
    pub fn from_realified(tag: ScalarTag, m: &DMatrix<f64>) -> MatK {
        let d = tag.dim_r();
        let (rows, cols) = (m.nrows() / d, m.ncols() / d);
        MatK::from_fn(tag, rows, cols, |r, c| {
            let comps: Vec<f64> = (0..d).map(|a| m[(d * r + a, d * c)]).collect();
            Quaternion::from_slice(&comps)
        })
    }

    /// Real coordinates of a single column, length `d * rows`.
    pub fn column_realified(&self, c: usize) -> Vec<f64> {
        let d = self.tag.dim_r();
        let mut out = Vec::with_capacity(d * self.rows);
        for r in 0..self.rows {
            out.extend_from_slice(&self.get(r, c).to_array()[..d]);
        }
        out
    }

    pub fn try_inverse(&self) -> Result<MatK> {
        if !self.is_square() {
            return Err(Error::NotSquare {
                rows: self.rows,
                cols: self.cols,
            });
        }
        let inv = self
            .to_complex()
            .try_inverse()
            .ok_or_else(|| Error::Singular("matrix is not invertible".into()))?;
        Ok(MatK::from_complex_rep(self.tag, &inv))
    }

    /// Singular values over K, descending. Over H each singular value of
    /// the complex adjoint is doubled and is reported once.
    pub fn singular_values(&self) -> Vec<f64> {
        let m = self.to_complex();
        let mut sv: Vec<f64> = m.singular_values().iter().copied().collect();
        sv.sort_by(|a, b| b.total_cmp(a));
        match self.tag {
            ScalarTag::H => sv.into_iter().step_by(2).collect(),
            _ => sv,
        }
    }

    /// Matrix exponential by scaling and squaring with a Taylor kernel.
    pub fn exp(&self) -> MatK {
        assert!(self.is_square(), "exp of a non-square matrix");
        let n = self.rows;
        let norm = self.frobenius_norm();
        let squarings = if norm > 0.5 { (norm / 0.5).log2().ceil() as u32 } else { 0 };
        let a = self.scale(1.0 / f64::from(2u32.pow(squarings)));
        let mut result = MatK::identity(self.tag, n);
        let mut term = MatK::identity(self.tag, n);
        for k in 1..=30 {
            term = term.matmul(&a).scale(1.0 / k as f64);
            result = result.add(&term);
            if term.frobenius_norm() < 1e-18 * result.frobenius_norm() {
                break;
            }
        }
        for _ in 0..squarings {
            result = result.matmul(&result);
        }
        result
    }

    /// Integer power by repeated squaring (`k >= 0`).
    pub fn pow(&self, mut k: u32) -> MatK {
        let mut base = self.clone();
        let mut acc = MatK::identity(self.tag, self.rows);
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.matmul(&base);
            }
            base = base.matmul(&base);
            k >>= 1;
        }
        acc
    }
}

/// Moduli of the eigenvalues of a square matrix, sorted descending.
///
/// Over H the moduli are those of the complex adjoint, whose eigenvalues come
/// in conjugate pairs; each pair is reported once so the list has length
/// `rows`.
pub fn spectrum(a: &MatK) -> Result<Vec<f64>> {
    Ok(eigenvalues(a)?.into_iter().map(|z| z.norm()).collect())
}

/// Complex eigenvalues sorted by descending modulus (one representative per
/// conjugate pair over H).
pub fn eigenvalues(a: &MatK) -> Result<Vec<Complex64>> {
    if !a.is_square() {
        return Err(Error::NotSquare {
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    if a.rows() == 0 {
        return Ok(Vec::new());
    }
    let m = a.to_complex();
    let schur = nalgebra::linalg::Schur::new(m);
    let (_, t) = schur.unpack();
    let mut ev: Vec<Complex64> = (0..t.nrows()).map(|i| t[(i, i)]).collect();
    ev.sort_by(|x, y| y.norm().total_cmp(&x.norm()).then(y.im.total_cmp(&x.im)));
    if a.tag() == ScalarTag::H {
        ev = ev.into_iter().step_by(2).collect();
    }
    Ok(ev)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn hamilton_relations() {
        assert_eq!(Quaternion::I * Quaternion::J, Quaternion::K);
        assert_eq!(Quaternion::J * Quaternion::I, -Quaternion::K);
        assert_eq!(Quaternion::I * Quaternion::I, -Quaternion::ONE);
        let q = Quaternion::new(0.3, -1.0, 2.0, 0.5);
        assert_eq!(Quaternion::ONE * q, q);
        assert_eq!(Quaternion::I * Quaternion::J * Quaternion::K, -Quaternion::ONE);
    }

    #[test]
    fn complex_adjoint_of_j() {
        let a = MatK::from_entries(ScalarTag::H, 1, 1, vec![Quaternion::J]).unwrap();
        let chi = a.complex_adjoint().unwrap();
        let expect = [0.0, 1.0, -1.0, 0.0];
        for (q, e) in chi.entries().iter().zip(expect) {
            assert_eq!(*q, Quaternion::real(e));
        }
        let id = MatK::identity(ScalarTag::H, 1).complex_adjoint().unwrap();
        assert_eq!(id, MatK::identity(ScalarTag::C, 2));
    }

    #[test]
    fn complex_adjoint_rejects_real() {
        assert!(matches!(
            MatK::identity(ScalarTag::R, 2).complex_adjoint(),
            Err(Error::WrongScalar { .. })
        ));
    }

    #[test]
    fn spectrum_examples() {
        let d = MatK::real_diagonal(ScalarTag::R, &[0.5, 2.0]);
        let s = spectrum(&d).unwrap();
        assert_abs_diff_eq!(s[0], 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s[1], 0.5, epsilon = 1e-12);
        let s = spectrum(&MatK::identity(ScalarTag::H, 3)).unwrap();
        assert_eq!(s.len(), 3);
        assert!(s.iter().all(|v| (v - 1.0).abs() < 1e-12));
        let shear = MatK::from_real(2, 2, &[1.0, 1.0, 0.0, 1.0]);
        let s = spectrum(&shear).unwrap();
        assert!(s.iter().all(|v| (v - 1.0).abs() < 1e-8));
        assert!(matches!(spectrum(&MatK::zeros(ScalarTag::R, 2, 3)), Err(Error::NotSquare { .. })));
    }

    #[test]
    fn complex_eigenvalues_of_rotation() {
        let (c, s) = (0.3f64.cos(), 0.3f64.sin());
        let rot = MatK::from_real(2, 2, &[c, -s, s, c]);
        let ev = eigenvalues(&rot).unwrap();
        assert_abs_diff_eq!(ev[0].norm(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(ev[0].im.abs(), s, epsilon = 1e-12);
    }

    #[test]
    fn realify_is_multiplicative() {
        let a = MatK::from_entries(
            ScalarTag::H,
            2,
            2,
            vec![
                Quaternion::new(1.0, 2.0, 0.0, -1.0),
                Quaternion::new(0.0, 0.5, 1.0, 0.0),
                Quaternion::new(-1.0, 0.0, 0.3, 0.2),
                Quaternion::new(0.1, 0.0, 0.0, 2.0),
            ],
        )
        .unwrap();
        let b = a.adjoint().add(&MatK::identity(ScalarTag::H, 2));
        let lhs = a.matmul(&b).realify();
        let rhs = a.realify() * b.realify();
        assert!((lhs - rhs).norm() < 1e-12);
        assert_eq!(MatK::from_realified(ScalarTag::H, &a.realify()), a);
    }

    #[test]
    fn exp_of_rotation_generator() {
        let x = MatK::from_real(2, 2, &[0.0, -1.0, 1.0, 0.0]).scale(std::f64::consts::FRAC_PI_2);
        let e = x.exp();
        let expect = MatK::from_real(2, 2, &[0.0, -1.0, 1.0, 0.0]);
        assert!(e.sub(&expect).frobenius_norm() < 1e-13);
        let big = MatK::from_real(2, 2, &[3.0, 0.0, 0.0, -3.0]).exp();
        assert_abs_diff_eq!(big.get(0, 0).w, 3f64.exp(), epsilon = 1e-10);
    }

    #[test]
    fn quaternion_inverse() {
        let q = Quaternion::new(1.0, -2.0, 0.5, 3.0);
        let p = q * q.inv().unwrap();
        assert_abs_diff_eq!(p.w, 1.0, epsilon = 1e-15);
        assert!(Quaternion::ZERO.inv().is_none());
        let m = MatK::from_entries(ScalarTag::H, 2, 2, vec![q, Quaternion::J, Quaternion::ONE, q.conj()]).unwrap();
        let prod = m.matmul(&m.try_inverse().unwrap());
        assert!(prod.sub(&MatK::identity(ScalarTag::H, 2)).frobenius_norm() < 1e-12);
    }
}
