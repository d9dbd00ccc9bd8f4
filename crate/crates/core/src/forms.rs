//! Nondegenerate forms on K^N, their automorphism groups and restricted
//! root data.
//!
//! A form is stored by its Gram matrix `G`; `b(x, y) = x* G y` where `x*` is
//! the conjugate transpose for Hermitian forms and the plain transpose for
//! bilinear ones (complex symmetric and symplectic). All Gram matrices built
//! here are signed permutation matrices, so every automorphism group is
//! stable under conjugate transposition.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, k_null_space};
use crate::scalars::{MatK, Quaternion, ScalarTag};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FormKind {
    Symmetric,
    Hermitian,
    Symplectic,
}

impl FormKind {
    pub fn name(self) -> &'static str {
        match self {
            FormKind::Symmetric => "symmetric",
            FormKind::Hermitian => "hermitian",
            FormKind::Symplectic => "symplectic",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RootType {
    A,
    B,
    C,
    BC,
    D,
}

/// Simple roots, fundamental weights and opposition involution, written as
/// coefficient vectors in the coordinates `eps_1, ..., eps_dim`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RootData {
    pub root_type: RootType,
    /// Length of the Weyl vectors the functionals act on.
    pub dim: usize,
    pub simple_roots: Vec<Vec<f64>>,
    pub fundamental_weights: Vec<Vec<f64>>,
}

fn unit(dim: usize, i: usize) -> Vec<f64> {
    let mut v = vec![0.0; dim];
    v[i] = 1.0;
    v
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl RootData {
    /// Root data of rank `n`. For type A, `n` is the number of coordinates
    /// and there are `n - 1` simple roots.
    pub fn new(root_type: RootType, n: usize) -> Self {
        let dim = n;
        let mut roots = Vec::new();
        for i in 0..n.saturating_sub(1) {
            let mut r = vec![0.0; dim];
            r[i] = 1.0;
            r[i + 1] = -1.0;
            roots.push(r);
        }
        if n >= 1 {
            match root_type {
                RootType::A => {}
                RootType::B | RootType::BC => roots.push(unit(dim, n - 1)),
                RootType::C => {
                    let mut r = vec![0.0; dim];
                    r[n - 1] = 2.0;
                    roots.push(r);
                }
                RootType::D if n == 1 => roots.push(unit(dim, 0)),
                RootType::D => {
                    let mut r = vec![0.0; dim];
                    r[n - 2] = 1.0;
                    r[n - 1] = 1.0;
                    roots.push(r);
                }
            }
        }
        let fundamental_weights = Self::dual_weights(&roots, dim);
        Self {
            root_type,
            dim,
            simple_roots: roots,
            fundamental_weights,
        }
    }

    /// Solves `2 <w_i, a_j> / <a_j, a_j> = delta_ij` with the minimal-norm
    /// solution (orthogonal to the trace direction in type A).
    fn dual_weights(roots: &[Vec<f64>], dim: usize) -> Vec<Vec<f64>> {
        if roots.is_empty() {
            return Vec::new();
        }
        let m = DMatrix::from_fn(roots.len(), dim, |j, c| 2.0 * roots[j][c] / dot(&roots[j], &roots[j]));
        let pinv = m.pseudo_inverse(1e-12).expect("pseudo-inverse");
        (0..roots.len())
            .map(|i| {
                (0..dim)
                    .map(|c| {
                        let v = pinv[(c, i)];
                        // Rational entries with small denominators; snap noise.
                        let snapped = (v * 840.0).round() / 840.0;
                        if (v - snapped).abs() < 1e-9 {
                            snapped
                        } else {
                            v
                        }
                    })
                    .collect()
            })
            .collect()
    }

    pub fn rank(&self) -> usize {
        self.simple_roots.len()
    }

    fn check(&self, index: usize, v: &[f64]) -> Result<()> {
        if index == 0 || index > self.rank() {
            return Err(Error::IndexOutOfRange {
                index,
                max: self.rank(),
            });
        }
        if v.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: v.len(),
            });
        }
        Ok(())
    }

    /// Value of the simple root `alpha_index` (1-based).
    pub fn eval_root(&self, index: usize, v: &[f64]) -> Result<f64> {
        self.check(index, v)?;
        Ok(dot(&self.simple_roots[index - 1], v))
    }

    /// Value of the fundamental weight attached to `alpha_index` (1-based).
    pub fn eval_weight(&self, index: usize, v: &[f64]) -> Result<f64> {
        self.check(index, v)?;
        Ok(dot(&self.fundamental_weights[index - 1], v))
    }

    /// The involution `-w0` on the closed positive chamber.
    pub fn opposition(&self, v: &[f64]) -> Vec<f64> {
        match self.root_type {
            RootType::A => v.iter().rev().map(|x| -x).collect(),
            _ => v.to_vec(),
        }
    }

    /// Permutation of simple-root indices induced by the opposition.
    pub fn opposition_on_roots(&self, index: usize) -> usize {
        match self.root_type {
            RootType::A => self.rank() + 1 - index,
            _ => index,
        }
    }

    /// Whether `v` lies in the closed positive chamber up to `tol`.
    pub fn in_chamber(&self, v: &[f64], tol: f64) -> bool {
        self.simple_roots.iter().all(|r| dot(r, v) >= -tol)
    }
}

/// A nondegenerate form together with its rank and root type.
#[derive(Clone, Debug, PartialEq)]
pub struct FormSpec {
    tag: ScalarTag,
    kind: FormKind,
    gram: MatK,
    rank: usize,
    root_type: RootType,
    signature: (usize, usize),
}

impl FormSpec {
    /// Signature form `diag(I_p, -I_q)`. Hermitian over R is read as
    /// symmetric.
    pub fn signature(tag: ScalarTag, kind: FormKind, p: usize, q: usize) -> Result<Self> {
        if p + q == 0 {
            return Err(Error::UnsupportedForm("signature form needs p + q >= 1".into()));
        }
        let kind = match (tag, kind) {
            (ScalarTag::R, FormKind::Hermitian) => FormKind::Symmetric,
            (ScalarTag::H, FormKind::Symmetric) => {
                return Err(Error::UnsupportedForm("quaternionic symmetric forms are not supported".into()))
            }
            (_, FormKind::Symplectic) => return Self::symplectic(tag, p),
            (_, k) => k,
        };
        let diag: Vec<f64> = (0..p + q).map(|i| if i < p { 1.0 } else { -1.0 }).collect();
        Self::from_gram(tag, kind, MatK::real_diagonal(tag, &diag))
    }

    /// Standard symplectic form on K^{2m}: `w(x, y) = sum x_r y_{m+r} - x_{m+r} y_r`.
    pub fn symplectic(tag: ScalarTag, m: usize) -> Result<Self> {
        if tag == ScalarTag::H {
            return Err(Error::UnsupportedForm("quaternionic symplectic forms are not supported".into()));
        }
        if m == 0 {
            return Err(Error::UnsupportedForm("symplectic form needs m >= 1".into()));
        }
        let gram = MatK::from_fn(tag, 2 * m, 2 * m, |r, c| {
            if c == r + m {
                Quaternion::ONE
            } else if r == c + m {
                -Quaternion::ONE
            } else {
                Quaternion::ZERO
            }
        });
        Self::from_gram(tag, FormKind::Symplectic, gram)
    }

    /// Form with an explicit signed-permutation Gram matrix.
    pub fn from_gram(tag: ScalarTag, kind: FormKind, gram: MatK) -> Result<Self> {
        let n = gram.rows();
        if !gram.is_square() || n == 0 {
            return Err(Error::UnsupportedForm("gram must be square and nonempty".into()));
        }
        let gram = gram.promote(tag);
        let mut count = 0;
        for r in 0..n {
            for c in 0..n {
                let v = gram.get(r, c);
                if v == Quaternion::ZERO {
                    continue;
                }
                if v != Quaternion::ONE && v != -Quaternion::ONE {
                    return Err(Error::UnsupportedForm("gram entries must be 0 or ±1".into()));
                }
                count += 1;
            }
        }
        if count != n {
            return Err(Error::UnsupportedForm("gram must be a signed permutation".into()));
        }
        let (rank, root_type, signature) = match kind {
            FormKind::Symplectic => {
                if tag == ScalarTag::H {
                    return Err(Error::UnsupportedForm("quaternionic symplectic forms are not supported".into()));
                }
                if gram.add(&gram.transpose()).frobenius_norm() != 0.0 {
                    return Err(Error::UnsupportedForm("symplectic gram must be antisymmetric".into()));
                }
                (n / 2, RootType::C, (n / 2, n / 2))
            }
            FormKind::Symmetric | FormKind::Hermitian => {
                let mut p = 0;
                for r in 0..n {
                    match gram.get(r, r).w {
                        x if x == 1.0 => p += 1,
                        x if x == -1.0 => {}
                        _ => return Err(Error::UnsupportedForm("symmetric/hermitian gram must be diagonal".into())),
                    }
                }
                let q = n - p;
                let kind_eff = if tag == ScalarTag::R { FormKind::Symmetric } else { kind };
                match (tag, kind_eff) {
                    (ScalarTag::H, FormKind::Symmetric) => {
                        return Err(Error::UnsupportedForm("quaternionic symmetric forms are not supported".into()))
                    }
                    (ScalarTag::C, FormKind::Symmetric) => {
                        let rt = if n.is_multiple_of(2) { RootType::D } else { RootType::B };
                        (n / 2, rt, (p, q))
                    }
                    (ScalarTag::R, _) => {
                        let rt = if p == q { RootType::D } else { RootType::B };
                        (p.min(q), rt, (p, q))
                    }
                    _ => {
                        let rt = if p == q { RootType::C } else { RootType::BC };
                        (p.min(q), rt, (p, q))
                    }
                }
            }
        };
        let kind = if tag == ScalarTag::R && kind == FormKind::Hermitian {
            FormKind::Symmetric
        } else {
            kind
        };
        Ok(Self {
            tag,
            kind,
            gram,
            rank,
            root_type,
            signature,
        })
    }

    pub fn tag(&self) -> ScalarTag {
        self.tag
    }

    pub fn kind(&self) -> FormKind {
        self.kind
    }

    pub fn gram(&self) -> &MatK {
        &self.gram
    }

    /// Dimension N over K.
    pub fn dim(&self) -> usize {
        self.gram.rows()
    }

    /// Real rank n of the automorphism group.
    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn root_type(&self) -> RootType {
        self.root_type
    }

    /// `(p, q)` for signature forms, `(m, m)` for symplectic ones.
    pub fn signature_pair(&self) -> (usize, usize) {
        self.signature
    }

    pub fn root_data(&self) -> RootData {
        RootData::new(self.root_type, self.rank)
    }

    /// Real split form `O(n, n)`.
    pub fn is_split_orthogonal(&self) -> bool {
        self.tag == ScalarTag::R && self.kind == FormKind::Symmetric && self.signature.0 == self.signature.1
    }

    pub fn is_sesquilinear(&self) -> bool {
        self.kind == FormKind::Hermitian
    }

    /// The adjoint `x*` used in `b(x, y) = x* G y`.
    pub fn star(&self, m: &MatK) -> MatK {
        if self.is_sesquilinear() {
            m.adjoint()
        } else {
            m.transpose()
        }
    }

    /// Gram matrix `B* G B` of the columns of `b`.
    pub fn gram_of(&self, b: &MatK) -> MatK {
        self.star(b).matmul(&self.gram).matmul(b)
    }

    /// `b(x, y)` for two column vectors.
    pub fn eval(&self, x: &MatK, y: &MatK) -> Quaternion {
        self.star(x).matmul(&self.gram).matmul(y).get(0, 0)
    }

    /// Whether `g* G g = G` up to `tol`, relative to `|G| max(1, |g|^2)`.
    pub fn is_automorphism(&self, g: &MatK, tol: f64) -> Result<bool> {
        Ok(self.automorphism_residual(g)? <= tol)
    }

    /// Normalized residual `|g* G g - G| / (|G| max(1, |g|^2))`.
    pub fn automorphism_residual(&self, g: &MatK) -> Result<f64> {
        if !g.is_square() {
            return Err(Error::NotSquare {
                rows: g.rows(),
                cols: g.cols(),
            });
        }
        if g.rows() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: g.rows(),
            });
        }
        let g = g.promote(self.tag);
        let r = self.gram_of(&g).sub(&self.gram).frobenius_norm();
        let scale = g.op_norm().powi(2).max(1.0);
        Ok(r / (self.gram.frobenius_norm() * scale))
    }

    /// `blockdiag(G, -G)` on `K^{2N}`.
    pub fn direct_sum_minus(&self) -> FormSpec {
        let gram = self.gram.block_diag(&self.gram.scale(-1.0));
        Self::from_gram(self.tag, self.kind, gram).expect("direct sum of a valid form")
    }

    /// Real dimension of the automorphism group.
    pub fn group_dim_r(&self) -> usize {
        let n = self.dim();
        match (self.tag, self.kind) {
            (ScalarTag::R, FormKind::Symplectic) => n * (n + 1) / 2,
            (ScalarTag::C, FormKind::Symplectic) => n * (n + 1),
            (ScalarTag::R, _) => n * (n - 1) / 2,
            (ScalarTag::C, FormKind::Symmetric) => n * (n - 1),
            (ScalarTag::C, _) => n * n,
            (ScalarTag::H, _) => n * (2 * n + 1),
        }
    }

    /// Hyperbolic pairs `(f_r, f'_r)`, `r < rank`, with `b(f_r, f'_r) = 1`,
    /// all other pairings zero, supported on disjoint coordinates.
    pub fn witt_pairs(&self) -> Vec<(MatK, MatK)> {
        let n = self.dim();
        let tag = self.tag;
        let col = |entries: &[(usize, Quaternion)]| {
            let mut v = MatK::zeros(tag, n, 1);
            for &(i, q) in entries {
                v.set(i, 0, q);
            }
            v
        };
        let mut out = Vec::new();
        match self.kind {
            FormKind::Symplectic => {
                for r in 0..n {
                    for c in 0..n {
                        if self.gram.get(r, c) == Quaternion::ONE {
                            out.push((col(&[(r, Quaternion::ONE)]), col(&[(c, Quaternion::ONE)])));
                        }
                    }
                }
            }
            _ => {
                let pos: Vec<usize> = (0..n).filter(|&i| self.gram.get(i, i).w > 0.0).collect();
                let neg: Vec<usize> = (0..n).filter(|&i| self.gram.get(i, i).w < 0.0).collect();
                let cross = pos.len().min(neg.len());
                for k in 0..cross {
                    let (a, b) = (pos[k], neg[k]);
                    out.push((
                        col(&[(a, Quaternion::ONE), (b, Quaternion::ONE)]),
                        col(&[(a, Quaternion::real(0.5)), (b, Quaternion::real(-0.5))]),
                    ));
                }
                if self.tag == ScalarTag::C && self.kind == FormKind::Symmetric {
                    let rest: Vec<usize> = pos[cross..].iter().chain(&neg[cross..]).copied().collect();
                    for pair in rest.chunks_exact(2) {
                        let (a, b) = (pair[0], pair[1]);
                        let s = self.gram.get(a, a).w;
                        out.push((
                            col(&[(a, Quaternion::ONE), (b, Quaternion::I)]),
                            col(&[(a, Quaternion::real(0.5 / s)), (b, Quaternion::I.scale(-0.5 / s))]),
                        ));
                    }
                }
            }
        }
        out.truncate(self.rank);
        out
    }

    /// Standard isotropic subspace spanned by the first `i` Witt vectors.
    pub fn standard_isotropic(&self, i: usize) -> Result<MatK> {
        if i > self.rank {
            return Err(Error::IndexOutOfRange { index: i, max: self.rank });
        }
        let pairs = self.witt_pairs();
        let cols: Vec<Vec<Quaternion>> = pairs[..i].iter().map(|(f, _)| f.column(0)).collect();
        let m = MatK::from_columns(self.tag, self.dim(), &cols);
        Ok(linalg::k_column_space(&m, 1e-12)?.0.promote(self.tag))
    }

    /// Basis of `{v : b(c, v) = 0 for every column c}`.
    pub fn orthogonal_complement(&self, cols: &MatK, tol: f64) -> Result<MatK> {
        if cols.cols() == 0 {
            return Ok(MatK::identity(self.tag, self.dim()));
        }
        let m = self.star(cols).matmul(&self.gram);
        Ok(k_null_space(&m, tol)?.0)
    }

    /// Basis of the nondegenerate subspace spanned by `span` whose Gram
    /// matrix is in normal form: `diag(I, -I)` (Hermitian or real
    /// symmetric), `I` (complex symmetric) or the standard symplectic
    /// matrix.
    pub fn normal_basis(&self, span: &MatK, tol: f64) -> Result<MatK> {
        let tag = self.tag;
        let n = self.dim();
        let mut work = span.promote(tag);
        if self.kind == FormKind::Symplectic {
            let mut us = Vec::new();
            let mut ws = Vec::new();
            while work.cols() > 0 {
                let g = self.gram_of(&work);
                let mut best = (0, 0, 0.0);
                for a in 0..g.rows() {
                    for b in 0..g.cols() {
                        let v = g.get(a, b).norm();
                        if v > best.2 {
                            best = (a, b, v);
                        }
                    }
                }
                if best.2 <= tol || work.cols() < 2 {
                    return Err(Error::Singular("form is degenerate on the subspace".into()));
                }
                let u = work.submatrix(0, n, best.0, 1);
                let coef = g.get(best.0, best.1).inv().expect("nonzero pairing");
                let w = work.submatrix(0, n, best.1, 1).scale_right(coef);
                let cons = self.star(&u.hstack(&w)).matmul(&self.gram).matmul(&work);
                let (ns, _) = k_null_space(&cons, 1e-10)?;
                work = work.matmul(&ns);
                us.push(u.column(0));
                ws.push(w.column(0));
            }
            let cols: Vec<Vec<Quaternion>> = us.into_iter().chain(ws).collect();
            return Ok(MatK::from_columns(tag, n, &cols));
        }
        let mut pos = Vec::new();
        let mut neg = Vec::new();
        let units: Vec<Quaternion> = std::iter::once(Quaternion::ONE).chain(tag.imaginary_units().iter().copied()).collect();
        while work.cols() > 0 {
            let k = work.cols();
            let mut cands: Vec<MatK> = (0..k).map(|a| work.submatrix(0, n, a, 1)).collect();
            for a in 0..k {
                for b in a + 1..k {
                    for &u in &units {
                        cands.push(work.submatrix(0, n, a, 1).add(&work.submatrix(0, n, b, 1).scale_right(u)));
                    }
                }
            }
            let mut best: Option<(MatK, Quaternion)> = None;
            let mut best_val = 0.0;
            for c in cands {
                let v = c.scale(1.0 / c.frobenius_norm());
                let val = self.eval(&v, &v);
                if val.norm() > best_val {
                    best_val = val.norm();
                    best = Some((v, val));
                }
            }
            let Some((v, val)) = best.filter(|_| best_val > tol) else {
                return Err(Error::Singular("form is degenerate on the subspace".into()));
            };
            let v = if self.is_sesquilinear() || tag == ScalarTag::R {
                let v = v.scale(1.0 / val.w.abs().sqrt());
                if val.w > 0.0 {
                    pos.push(v.column(0));
                } else {
                    neg.push(v.column(0));
                }
                v
            } else {
                let z = Complex64::new(val.w, val.x).sqrt().inv();
                let v = v.scale_right(Quaternion::from_complex(z));
                pos.push(v.column(0));
                v
            };
            let cons = self.star(&v).matmul(&self.gram).matmul(&work);
            let (ns, _) = k_null_space(&cons, 1e-10)?;
            work = work.matmul(&ns);
        }
        let cols: Vec<Vec<Quaternion>> = pos.into_iter().chain(neg).collect();
        Ok(MatK::from_columns(tag, n, &cols))
    }

    /// Standard frame `[f_1..f_i, f'_1..f'_i, E]` with `E` a normal basis of
    /// the orthogonal complement of the first `i` hyperbolic planes.
    pub fn standard_frame(&self, i: usize, tol: f64) -> Result<MatK> {
        if i > self.rank {
            return Err(Error::IndexOutOfRange { index: i, max: self.rank });
        }
        let pairs = self.witt_pairs();
        let n = self.dim();
        let fs: Vec<Vec<Quaternion>> = pairs[..i].iter().map(|(f, _)| f.column(0)).collect();
        let ys: Vec<Vec<Quaternion>> = pairs[..i].iter().map(|(_, y)| y.column(0)).collect();
        let fy = MatK::from_columns(self.tag, n, &fs.iter().chain(&ys).cloned().collect::<Vec<_>>());
        let e = self.complement_normal(&fy, tol)?;
        Ok(fy.hstack(&e))
    }

    fn complement_normal(&self, fy: &MatK, tol: f64) -> Result<MatK> {
        let comp = self.orthogonal_complement(fy, 1e-10)?;
        if comp.cols() == 0 {
            return Ok(MatK::zeros(self.tag, self.dim(), 0));
        }
        self.normal_basis(&comp, tol)
    }

    /// An automorphism `g` carrying the first `i` standard Witt vectors onto
    /// the columns of `f` (a basis of an isotropic subspace).
    pub fn witt_extension(&self, f: &MatK, tol: f64) -> Result<MatK> {
        let i = f.cols();
        let n = self.dim();
        let f = f.promote(self.tag);
        let iso = self.gram_of(&f).frobenius_norm();
        if iso > 1e-6 * f.frobenius_norm().powi(2).max(1.0) {
            return Err(Error::NotIsotropic { residual: iso });
        }
        if i == 0 {
            return Ok(MatK::identity(self.tag, n));
        }
        let t1 = self.standard_frame(i, tol)?;
        let m = self.star(&f).matmul(&self.gram);
        let mh = m.adjoint();
        let y0 = mh.matmul(&m.matmul(&mh).try_inverse()?);
        let b = self.gram_of(&y0);
        let c = if self.kind == FormKind::Symplectic { b.scale(0.5) } else { b.scale(-0.5) };
        let y = y0.add(&f.matmul(&c));
        let fy = f.hstack(&y);
        let e = self.complement_normal(&fy, tol)?;
        let t2 = fy.hstack(&e);
        Ok(t2.matmul(&t1.try_inverse()?))
    }

    fn random_entry<R: Rng + ?Sized>(&self, rng: &mut R) -> Quaternion {
        random_scalar(self.tag, rng)
    }

    /// Random element of the Lie algebra `{X : X* G + G X = 0}`.
    pub fn random_lie_element<R: Rng + ?Sized>(&self, rng: &mut R, scale: f64) -> MatK {
        let n = self.dim();
        let mut a = MatK::zeros(self.tag, n, n);
        match self.kind {
            FormKind::Symplectic => {
                for r in 0..n {
                    for c in r..n {
                        let v = self.random_entry(rng);
                        a.set(r, c, v);
                        a.set(c, r, v);
                    }
                }
            }
            _ if self.is_sesquilinear() || self.tag == ScalarTag::R => {
                for r in 0..n {
                    let v = self.random_entry(rng);
                    a.set(r, r, Quaternion::new(0.0, v.x, v.y, v.z));
                    for c in r + 1..n {
                        let v = self.random_entry(rng);
                        a.set(r, c, v);
                        a.set(c, r, -v.conj());
                    }
                }
            }
            _ => {
                for r in 0..n {
                    for c in r + 1..n {
                        let v = self.random_entry(rng);
                        a.set(r, c, v);
                        a.set(c, r, -v);
                    }
                }
            }
        }
        self.gram.matmul(&a).scale(scale)
    }

    pub fn random_automorphism<R: Rng + ?Sized>(&self, rng: &mut R, scale: f64) -> MatK {
        self.random_lie_element(rng, scale).exp()
    }

    /// Real basis of the Lie algebra of `Aut(b)`.
    pub fn lie_algebra_basis(&self, tol: f64) -> Vec<MatK> {
        lie_basis_from_constraint(self.tag, self.dim(), tol, |x| self.star(x).matmul(&self.gram).add(&self.gram.matmul(x)))
    }
}

pub(crate) fn random_scalar<R: Rng + ?Sized>(tag: ScalarTag, rng: &mut R) -> Quaternion {
    let mut c = [0.0; 4];
    for v in c.iter_mut().take(tag.dim_r()) {
        *v = rng.gen_range(-1.0..=1.0);
    }
    Quaternion::from_slice(&c)
}

pub(crate) fn random_matrix<R: Rng + ?Sized>(tag: ScalarTag, rows: usize, cols: usize, rng: &mut R) -> MatK {
    let mut m = MatK::zeros(tag, rows, cols);
    for r in 0..rows {
        for c in 0..cols {
            m.set(r, c, random_scalar(tag, rng));
        }
    }
    m
}

fn real_basis_matrices(tag: ScalarTag, n: usize) -> Vec<MatK> {
    let units: Vec<Quaternion> = std::iter::once(Quaternion::ONE).chain(tag.imaginary_units().iter().copied()).collect();
    let mut out = Vec::with_capacity(n * n * units.len());
    for r in 0..n {
        for c in 0..n {
            for &u in &units {
                let mut m = MatK::zeros(tag, n, n);
                m.set(r, c, u);
                out.push(m);
            }
        }
    }
    out
}

fn matrix_coordinates(m: &MatK) -> Vec<f64> {
    let d = m.tag().dim_r();
    m.entries().iter().flat_map(|q| q.to_array()[..d].to_vec()).collect()
}

fn lie_basis_from_constraint(
    tag: ScalarTag,
    n: usize,
    tol: f64,
    constraint: impl Fn(&MatK) -> MatK,
) -> Vec<MatK> {
    let basis = real_basis_matrices(tag, n);
    let rows = matrix_coordinates(&constraint(&basis[0])).len();
    let mut a = DMatrix::zeros(rows, basis.len());
    for (j, e) in basis.iter().enumerate() {
        for (i, v) in matrix_coordinates(&constraint(e)).into_iter().enumerate() {
            a[(i, j)] = v;
        }
    }
    let (ns, _) = linalg::real_null_space(&a, tol);
    (0..ns.ncols())
        .map(|k| {
            basis
                .iter()
                .enumerate()
                .fold(MatK::zeros(tag, n, n), |acc, (j, e)| acc.add(&e.scale(ns[(j, k)])))
        })
        .collect()
}

/// The group a computation runs in: the automorphisms of a form, or the full
/// linear group.
#[derive(Clone, Debug, PartialEq)]
pub enum Group {
    Aut(FormSpec),
    Gl { tag: ScalarTag, n: usize },
}

impl Group {
    pub fn gl(tag: ScalarTag, n: usize) -> Self {
        Group::Gl { tag, n }
    }

    pub fn tag(&self) -> ScalarTag {
        match self {
            Group::Aut(f) => f.tag(),
            Group::Gl { tag, .. } => *tag,
        }
    }

    /// Dimension N of the vector space acted on.
    pub fn dim(&self) -> usize {
        match self {
            Group::Aut(f) => f.dim(),
            Group::Gl { n, .. } => *n,
        }
    }

    /// Length of Cartan and Lyapunov vectors.
    pub fn weyl_len(&self) -> usize {
        match self {
            Group::Aut(f) => f.rank(),
            Group::Gl { n, .. } => *n,
        }
    }

    pub fn form(&self) -> Option<&FormSpec> {
        match self {
            Group::Aut(f) => Some(f),
            Group::Gl { .. } => None,
        }
    }

    pub fn root_data(&self) -> RootData {
        match self {
            Group::Aut(f) => f.root_data(),
            Group::Gl { n, .. } => RootData::new(RootType::A, *n),
        }
    }

    /// Real dimension of the group.
    pub fn dim_r(&self) -> usize {
        match self {
            Group::Aut(f) => f.group_dim_r(),
            Group::Gl { tag, n } => tag.dim_r() * n * n,
        }
    }

    /// Membership residual: the form residual, or `0` for invertible
    /// matrices in the linear group and `inf` otherwise.
    pub fn membership_residual(&self, g: &MatK) -> Result<f64> {
        match self {
            Group::Aut(f) => f.automorphism_residual(g),
            Group::Gl { n, .. } => {
                if !g.is_square() || g.rows() != *n {
                    return Err(Error::DimensionMismatch {
                        expected: *n,
                        found: g.rows(),
                    });
                }
                let sv = g.singular_values();
                let top = sv.first().copied().unwrap_or(0.0);
                let bottom = sv.last().copied().unwrap_or(0.0);
                Ok(if top > 0.0 && bottom > 1e-14 * top { 0.0 } else { f64::INFINITY })
            }
        }
    }

    pub fn contains(&self, g: &MatK, tol: f64) -> Result<bool> {
        Ok(self.membership_residual(g)? <= tol)
    }

    pub fn random_lie_element<R: Rng + ?Sized>(&self, rng: &mut R, scale: f64) -> MatK {
        match self {
            Group::Aut(f) => f.random_lie_element(rng, scale),
            Group::Gl { tag, n } => random_matrix(*tag, *n, *n, rng).scale(scale),
        }
    }

    pub fn random_element<R: Rng + ?Sized>(&self, rng: &mut R, scale: f64) -> MatK {
        self.random_lie_element(rng, scale).exp()
    }

    /// Random element of the maximal compact subgroup (group elements that
    /// are also unitary).
    pub fn random_compact<R: Rng + ?Sized>(&self, rng: &mut R) -> MatK {
        let x = self.random_lie_element(rng, 1.0);
        x.sub(&x.adjoint()).scale(0.5).exp()
    }

    pub fn lie_algebra_basis(&self, tol: f64) -> Vec<MatK> {
        match self {
            Group::Aut(f) => f.lie_algebra_basis(tol),
            Group::Gl { tag, n } => real_basis_matrices(*tag, *n),
        }
    }

    pub fn identity(&self) -> MatK {
        MatK::identity(self.tag(), self.dim())
    }
}
