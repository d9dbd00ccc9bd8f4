//! Numerical subspaces of K^N: isotropy, intersections, the projection
//! `W -> (W ∩ (V⊕0), W ∩ (0⊕V))` and induced forms on `V_i^⊥ / V_i`.
//!
//! A subspace is stored by a K-orthonormal basis. Two subspaces are compared
//! through their orthogonal projectors, never through bases.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::forms::{FormKind, FormSpec, Group};
use crate::linalg::{self, RankInfo};
use crate::scalars::{MatK, ScalarTag};

#[derive(Clone, Debug, PartialEq)]
pub struct Subspace {
    basis: MatK,
}

impl Subspace {
    /// Span of the columns of `m`, with rank decided at `tol`.
    pub fn from_span(m: &MatK, tol: f64) -> Result<Self> {
        Ok(Self {
            basis: linalg::k_column_space(m, tol)?.0.promote(m.tag()),
        })
    }

    /// Wraps a basis that is already K-orthonormal.
    pub fn from_orthonormal(basis: MatK) -> Self {
        Self { basis }
    }

    pub fn zero(tag: ScalarTag, n: usize) -> Self {
        Self {
            basis: MatK::zeros(tag, n, 0),
        }
    }

    pub fn whole(tag: ScalarTag, n: usize) -> Self {
        Self {
            basis: MatK::identity(tag, n),
        }
    }

    pub fn basis(&self) -> &MatK {
        &self.basis
    }

    pub fn tag(&self) -> ScalarTag {
        self.basis.tag()
    }

    /// Dimension over K.
    pub fn dim(&self) -> usize {
        self.basis.cols()
    }

    pub fn ambient_dim(&self) -> usize {
        self.basis.rows()
    }

    /// Real orthogonal projector on the realification.
    pub fn projector(&self) -> DMatrix<f64> {
        linalg::projector(&self.basis)
    }

    /// Operator-norm distance between projectors.
    pub fn distance(&self, other: &Subspace) -> f64 {
        let a = self.promote(other.tag());
        let b = other.promote(self.tag());
        linalg::op_norm(&(a.projector() - b.projector()))
    }

    pub fn approx_eq(&self, other: &Subspace, tol: f64) -> bool {
        self.dim() == other.dim() && self.distance(other) <= tol
    }

    pub fn promote(&self, tag: ScalarTag) -> Subspace {
        Subspace {
            basis: self.basis.promote(tag),
        }
    }

    /// Largest distance from a unit vector of `inner` to `self`:
    /// `|(I - P_self) B_inner|`. Zero iff `inner ⊂ self`.
    pub fn containment_residual(&self, inner: &Subspace) -> f64 {
        if inner.dim() == 0 {
            return 0.0;
        }
        let outer = self.promote(inner.tag());
        let inner = inner.promote(outer.tag());
        let p = outer.projector();
        let b = inner.basis.realify();
        let r = &b - &p * &b;
        linalg::op_norm(&r)
    }

    /// Image under a linear map.
    pub fn map(&self, g: &MatK, tol: f64) -> Result<Subspace> {
        if g.cols() != self.ambient_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.ambient_dim(),
                found: g.cols(),
            });
        }
        if self.dim() == 0 {
            return Ok(Subspace::zero(self.tag().join(g.tag()), g.rows()));
        }
        Subspace::from_span(&g.matmul(&self.basis), tol)
    }

    /// Embeds `K^N` as the first (`second = false`) or second summand of
    /// `K^N ⊕ K^N`.
    pub fn inject(&self, second: bool) -> Subspace {
        let z = MatK::zeros(self.tag(), self.ambient_dim(), self.dim());
        let basis = if second { z.vstack(&self.basis) } else { self.basis.vstack(&z) };
        Subspace { basis }
    }

    /// Sum of two subspaces.
    pub fn sum(&self, other: &Subspace, tol: f64) -> Result<Subspace> {
        let tag = self.tag().join(other.tag());
        Subspace::from_span(&self.basis.promote(tag).hstack(&other.basis.promote(tag)), tol)
    }
}

/// A nested sequence of subspaces.
#[derive(Clone, Debug, PartialEq)]
pub struct FlagPoint {
    parts: Vec<Subspace>,
}

impl FlagPoint {
    pub fn new(parts: Vec<Subspace>, tol: f64) -> Result<Self> {
        for w in parts.windows(2) {
            let r = w[1].containment_residual(&w[0]);
            if r > tol {
                return Err(Error::Invalid(format!("flag parts are not nested (residual {r:.3e})")));
            }
        }
        Ok(Self { parts })
    }

    pub fn parts(&self) -> &[Subspace] {
        &self.parts
    }
}

/// `|B* G B|` relative to `|G|`.
pub fn isotropy_residual(w: &Subspace, b: &FormSpec) -> Result<f64> {
    if w.ambient_dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: b.dim(),
            found: w.ambient_dim(),
        });
    }
    if w.dim() == 0 {
        return Ok(0.0);
    }
    let basis = w.basis.promote(b.tag());
    Ok(b.gram_of(&basis).frobenius_norm() / b.gram().frobenius_norm())
}

pub fn is_isotropic(w: &Subspace, b: &FormSpec, tol: f64) -> Result<bool> {
    Ok(isotropy_residual(w, b)? <= tol)
}

/// Intersection computed as the null space of the stacked complementary
/// projectors.
pub fn intersect(w1: &Subspace, w2: &Subspace, tol: f64) -> Result<(Subspace, RankInfo)> {
    if w1.ambient_dim() != w2.ambient_dim() {
        return Err(Error::DimensionMismatch {
            expected: w1.ambient_dim(),
            found: w2.ambient_dim(),
        });
    }
    let tag = w1.tag().join(w2.tag());
    let (a, b) = (w1.promote(tag), w2.promote(tag));
    let n = a.projector().nrows();
    let id = DMatrix::<f64>::identity(n, n);
    let mut stacked = DMatrix::zeros(2 * n, n);
    stacked.rows_mut(0, n).copy_from(&(&id - a.projector()));
    stacked.rows_mut(n, n).copy_from(&(&id - b.projector()));
    let (real, info) = linalg::real_null_space(&stacked, tol);
    if real.ncols() == 0 {
        return Ok((Subspace::zero(tag, a.ambient_dim()), info));
    }
    let basis = linalg::pull_back(tag, &real)?;
    Ok((Subspace { basis }, info))
}

/// Result of the projection of a subspace of `V ⊕ V` onto its two
/// boundary components.
#[derive(Clone, Debug)]
pub struct PiImage {
    /// `W ∩ (V⊕0)`, viewed in `V`.
    pub first: Subspace,
    /// `W ∩ (0⊕V)`, viewed in `V`.
    pub second: Subspace,
    pub first_rank: RankInfo,
    pub second_rank: RankInfo,
}

impl PiImage {
    /// Smaller of the two rank margins.
    pub fn margin(&self) -> f64 {
        self.first_rank.margin.min(self.second_rank.margin)
    }
}

/// `pi(W) = (W ∩ (V⊕0), W ∩ (0⊕V))`.
pub fn pi_project(w: &Subspace, tol: f64) -> Result<PiImage> {
    let n2 = w.ambient_dim();
    if !n2.is_multiple_of(2) {
        return Err(Error::Invalid("ambient dimension of V ⊕ V must be even".into()));
    }
    let n = n2 / 2;
    let whole = Subspace::whole(w.tag(), n);
    let (a, ra) = intersect(w, &whole.inject(false), tol)?;
    let (b, rb) = intersect(w, &whole.inject(true), tol)?;
    let top = |s: &Subspace, second: bool| {
        let off = if second { n } else { 0 };
        Subspace {
            basis: s.basis.submatrix(off, n, 0, s.dim()),
        }
    };
    Ok(PiImage {
        first: top(&a, false),
        second: top(&b, true),
        first_rank: ra,
        second_rank: rb,
    })
}

/// Image of the standard isotropic `i`-plane under a random automorphism.
pub fn random_isotropic(b: &FormSpec, i: usize, seed: u64) -> Result<Subspace> {
    let std = b.standard_isotropic(i)?;
    if i == 0 {
        return Ok(Subspace::zero(b.tag(), b.dim()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = Group::Aut(b.clone()).random_element(&mut rng, 1.0);
    Subspace::from_span(&g.matmul(&std), 1e-12)
}

/// The form induced by `b` on `V_i^⊥ / V_i`, realised on a complement of
/// `V_i` inside `V_i^⊥`. Returns the form and a basis whose Gram matrix is
/// the returned form's Gram matrix.
pub fn induced_form(b: &FormSpec, v: &Subspace, tol: f64) -> Result<(FormSpec, MatK)> {
    let res = isotropy_residual(v, b)?;
    if res > tol.max(1e-8) {
        return Err(Error::NotIsotropic { residual: res });
    }
    let i = v.dim();
    let n = b.dim();
    if i == 0 {
        return Ok((b.clone(), MatK::identity(b.tag(), n)));
    }
    let perp = b.orthogonal_complement(&v.basis.promote(b.tag()), 1e-10)?;
    // Euclidean complement of V_i inside V_i^⊥.
    let vb = v.basis.promote(b.tag());
    let proj = perp.sub(&vb.matmul(&vb.adjoint().matmul(&perp)));
    let (comp, _) = linalg::k_column_space(&proj, 1e-8)?;
    if comp.cols() + 2 * i != n {
        return Err(Error::Invalid("complement has unexpected dimension".into()));
    }
    if comp.cols() == 0 {
        return Err(Error::Invalid("maximal isotropic subspace of a split form has trivial quotient".into()));
    }
    let nb = b.normal_basis(&comp, 1e-9)?;
    let g = b.gram_of(&nb);
    let k = nb.cols();
    let form = match b.kind() {
        FormKind::Symplectic => FormSpec::symplectic(b.tag(), k / 2)?,
        kind => {
            let p = (0..k).filter(|&r| g.get(r, r).w > 0.0).count();
            let p = if b.tag() == ScalarTag::C && kind == FormKind::Symmetric { k } else { p };
            FormSpec::signature(b.tag(), kind, p, k - p)?
        }
    };
    Ok((form, nb))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalars::Quaternion;

    fn span_real(n: usize, cols: &[&[f64]]) -> Subspace {
        let data: Vec<f64> = (0..n).flat_map(|r| cols.iter().map(move |c| c[r])).collect();
        Subspace::from_span(&MatK::from_real(n, cols.len(), &data), 1e-12).unwrap()
    }

    #[test]
    fn isotropy_examples() {
        let b = FormSpec::signature(ScalarTag::R, FormKind::Symmetric, 2, 1).unwrap();
        assert!(is_isotropic(&span_real(3, &[&[1.0, 0.0, 1.0]]), &b, 1e-12).unwrap());
        assert!(!is_isotropic(&span_real(3, &[&[1.0, 0.0, 0.0]]), &b, 1e-12).unwrap());
        let bb = b.direct_sum_minus();
        let diag = Subspace::from_span(&MatK::identity(ScalarTag::R, 3).vstack(&MatK::identity(ScalarTag::R, 3)), 1e-12).unwrap();
        assert!(is_isotropic(&diag, &bb, 1e-12).unwrap());
        assert!(is_isotropic(&diag, &b, 1e-12).is_err());
    }

    #[test]
    fn intersect_examples() {
        let a = span_real(3, &[&[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0]]);
        let b = span_real(3, &[&[0.0, 1.0, 0.0], &[0.0, 0.0, 1.0]]);
        let (c, _) = intersect(&a, &b, 1e-8).unwrap();
        assert!(c.approx_eq(&span_real(3, &[&[0.0, 1.0, 0.0]]), 1e-10));
        let (d, _) = intersect(&a, &a, 1e-8).unwrap();
        assert!(d.approx_eq(&a, 1e-8));
    }

    #[test]
    fn quaternionic_intersection() {
        let q = Quaternion::new(0.5, -0.5, 0.5, 0.5);
        let a = Subspace::from_span(&MatK::from_entries(ScalarTag::H, 2, 1, vec![Quaternion::ONE, q]).unwrap(), 1e-12).unwrap();
        let b = Subspace::whole(ScalarTag::H, 2);
        let (c, _) = intersect(&a, &b, 1e-8).unwrap();
        assert!(c.approx_eq(&a, 1e-10));
        let e1 = Subspace::from_span(&MatK::from_entries(ScalarTag::H, 2, 1, vec![Quaternion::ONE, Quaternion::ZERO]).unwrap(), 1e-12).unwrap();
        let (z, _) = intersect(&a, &e1, 1e-8).unwrap();
        assert_eq!(z.dim(), 0);
    }

    #[test]
    fn pi_of_diagonal_is_zero() {
        let diag = Subspace::from_span(&MatK::identity(ScalarTag::C, 2).vstack(&MatK::identity(ScalarTag::C, 2)), 1e-12).unwrap();
        let pi = pi_project(&diag, 1e-8).unwrap();
        assert_eq!((pi.first.dim(), pi.second.dim()), (0, 0));
    }

    #[test]
    fn random_isotropic_examples() {
        let b = FormSpec::signature(ScalarTag::R, FormKind::Symmetric, 2, 2).unwrap();
        assert_eq!(random_isotropic(&b, 0, 1).unwrap().dim(), 0);
        let w = random_isotropic(&b, 2, 1).unwrap();
        assert_eq!(w.dim(), 2);
        assert!(is_isotropic(&w, &b, 1e-10).unwrap());
        assert_eq!(w, random_isotropic(&b, 2, 1).unwrap());
        assert!(random_isotropic(&b, 3, 1).is_err());
    }

    #[test]
    fn induced_form_examples() {
        let b = FormSpec::signature(ScalarTag::R, FormKind::Symmetric, 2, 1).unwrap();
        let v = random_isotropic(&b, 1, 4).unwrap();
        let (f, basis) = induced_form(&b, &v, 1e-9).unwrap();
        assert_eq!(f.signature_pair(), (1, 0));
        assert!(b.gram_of(&basis).sub(f.gram()).frobenius_norm() < 1e-9);
        let (f0, _) = induced_form(&b, &Subspace::zero(ScalarTag::R, 3), 1e-9).unwrap();
        assert_eq!(f0, b);
        let w = FormSpec::symplectic(ScalarTag::R, 2).unwrap();
        let v = random_isotropic(&w, 1, 9).unwrap();
        let (f, basis) = induced_form(&w, &v, 1e-9).unwrap();
        assert_eq!((f.kind(), f.dim()), (FormKind::Symplectic, 2));
        let g = w.gram_of(&basis);
        assert!(g.add(&g.transpose()).frobenius_norm() < 1e-9);
        assert!(g.try_inverse().is_ok());
        assert!(induced_form(&b, &span_real(3, &[&[1.0, 0.0, 0.0]]), 1e-9).is_err());
    }
}
