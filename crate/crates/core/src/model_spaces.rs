//! The pseudo-hyperbolic space `H^{p,q}_K = {x : b^{p,q+1}(x, x) = -1}`
//! embedded as the open orbit of isotropic lines of `b^{p+1,q+1}`, and the
//! orbit representatives for the `U(p,q)`-type and `U(p,m-p)`-type
//! isotropic subspaces, with their stabilizers measured numerically.

use nalgebra::DMatrix;
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::forms::{random_scalar, FormKind, FormSpec};
use crate::linalg::{self, k_norm};
use crate::scalars::{MatK, Quaternion, ScalarTag};
use crate::subspaces::{isotropy_residual, Subspace};
use crate::tolerances::Tolerances;

/// `b^{p,q+1}` on `K^{p+q+1}`, the form defining the quadric.
pub fn quadric_form(p: usize, q: usize, tag: ScalarTag) -> Result<FormSpec> {
    FormSpec::signature(tag, FormKind::Hermitian, p, q + 1)
}

/// `b^{p+1,q+1}` on `K ⊕ K^{p+q+1}`, extra coordinate first and positive.
pub fn ambient_form(p: usize, q: usize, tag: ScalarTag) -> Result<FormSpec> {
    FormSpec::signature(tag, FormKind::Hermitian, p + 1, q + 1)
}

fn quadric_value(x: &[Quaternion], p: usize) -> f64 {
    x.iter()
        .enumerate()
        .map(|(i, v)| if i < p { v.norm_sqr() } else { -v.norm_sqr() })
        .sum()
}

/// The line through `(1, x)`. `x` must lie on the quadric, up to
/// `tol.model` scaled by `max(1, |x|^2)`.
pub fn embed_hpq(x: &[Quaternion], p: usize, q: usize, tag: ScalarTag, tol: &Tolerances) -> Result<Subspace> {
    let n = p + q + 1;
    if x.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: x.len() });
    }
    let defect = (quadric_value(x, p) + 1.0).abs();
    let scale = k_norm(x).powi(2).max(1.0);
    if defect > tol.model * scale {
        return Err(Error::OffHypersurface { defect });
    }
    let v: Vec<Quaternion> = std::iter::once(Quaternion::ONE).chain(x.iter().map(|&q| tag.project(q))).collect();
    let norm = k_norm(&v);
    let v: Vec<Quaternion> = v.iter().map(|q| q.scale(1.0 / norm)).collect();
    Ok(Subspace::from_orthonormal(MatK::from_columns(tag, n + 1, &[v])))
}

fn line_vector(l: &Subspace, p: usize, q: usize, tol: &Tolerances) -> Result<Vec<Quaternion>> {
    if l.dim() != 1 {
        return Err(Error::DimensionMismatch { expected: 1, found: l.dim() });
    }
    let form = ambient_form(p, q, l.tag())?;
    let residual = isotropy_residual(l, &form)?;
    if residual > tol.rank {
        return Err(Error::NotIsotropic { residual });
    }
    Ok(l.basis().column(0))
}

/// Whether the isotropic line has vanishing extra coordinate.
pub fn is_boundary(l: &Subspace, p: usize, q: usize, tol: &Tolerances) -> Result<bool> {
    let v = line_vector(l, p, q, tol)?;
    Ok(v[0].norm() / k_norm(&v) <= tol.rank)
}

/// Inverse of [`embed_hpq`]: scales the spanning vector to first coordinate
/// one and returns the tail.
pub fn unembed_hpq(l: &Subspace, p: usize, q: usize, tol: &Tolerances) -> Result<Vec<Quaternion>> {
    let v = line_vector(l, p, q, tol)?;
    if v[0].norm() / k_norm(&v) <= tol.rank {
        return Err(Error::BoundaryPoint);
    }
    let inv = v[0].inv().expect("nonzero");
    Ok(v[1..].iter().map(|&c| l.tag().project(c * inv)).collect())
}

/// `[1 : 0 : ... : 0 : 1]` in coordinates: the base point `(0, ..., 0, 1)`.
pub fn base_point(p: usize, q: usize) -> Vec<Quaternion> {
    let mut x = vec![Quaternion::ZERO; p + q + 1];
    x[p + q] = Quaternion::ONE;
    x
}

/// Random point of the quadric: a random vector with negative value,
/// rescaled onto `b(x, x) = -1`.
pub fn random_hpq_point<R: Rng + ?Sized>(p: usize, q: usize, tag: ScalarTag, rng: &mut R) -> Vec<Quaternion> {
    loop {
        let y: Vec<Quaternion> = (0..p + q + 1).map(|_| random_scalar(tag, rng)).collect();
        let s = quadric_value(&y, p);
        if s < -0.05 {
            let f = 1.0 / (-s).sqrt();
            return y.iter().map(|v| v.scale(f)).collect();
        }
    }
}

/// `diag(1, g)` for `g` acting on the quadric.
pub fn lift_to_ambient(g: &MatK) -> MatK {
    MatK::identity(g.tag(), 1).block_diag(g)
}

/// Dimension of `{X in span(lie) : X W ⊂ W}` for `W` with orthonormal
/// basis `B`, from the null space of `X ↦ (I - B B*) X B`.
fn stabilizer_dimension(lie: &[MatK], w: &Subspace, tol: f64) -> (usize, f64) {
    let b = w.basis();
    let tag = b.tag();
    let cols: Vec<Vec<f64>> = lie
        .iter()
        .map(|x| {
            let x = x.promote(tag);
            let xb = x.matmul(b);
            let m = xb.sub(&b.matmul(&b.adjoint().matmul(&xb)));
            m.realify().as_slice().to_vec()
        })
        .collect();
    let a = DMatrix::from_fn(cols[0].len(), cols.len(), |r, c| cols[c][r]);
    let (ns, info) = linalg::real_null_space(&a, tol);
    (ns.ncols(), info.margin)
}

/// Orbit representative built from a complex structure on `R^{2p+2q}`.
#[derive(Clone, Debug, Serialize)]
pub struct CaseIvReport {
    pub p: usize,
    pub q: usize,
    /// Complex basis of `W'_0`, columns `x + i I x`.
    #[serde(skip)]
    pub subspace: Subspace,
    pub dim: usize,
    pub isotropy_residual: f64,
    pub real_intersection_dim: usize,
    pub stabilizer_dim: usize,
    pub stabilizer_margin: f64,
    /// `(p + q)^2`, the real dimension of `U(p, q)`.
    pub expected_stabilizer_dim: usize,
}

/// Complex structure `I` on `R^{2p+2q}` rotating coordinate pairs inside
/// each sign block; `I` preserves `diag(I_{2p}, -I_{2q})`.
pub fn complex_structure(p: usize, q: usize) -> MatK {
    let n = 2 * (p + q);
    let mut m = MatK::zeros(ScalarTag::R, n, n);
    for k in 0..p + q {
        m.set(2 * k + 1, 2 * k, Quaternion::ONE);
        m.set(2 * k, 2 * k + 1, -Quaternion::ONE);
    }
    m
}

pub fn orbit_rep_case_iv(p: usize, q: usize, tol: &Tolerances) -> Result<CaseIvReport> {
    if p == 0 || q == 0 {
        return Err(Error::Invalid("case iv needs p >= 1 and q >= 1".into()));
    }
    let n = 2 * (p + q);
    let i_mat = complex_structure(p, q).promote(ScalarTag::C);
    let id = MatK::identity(ScalarTag::C, n);
    let span = id.add(&i_mat.scale_right(Quaternion::I));
    let w = Subspace::from_span(&span, tol.rank)?;
    let real_form = FormSpec::signature(ScalarTag::R, FormKind::Symmetric, 2 * p, 2 * q)?;
    let g = real_form.gram().promote(ScalarTag::C);
    let b = w.basis();
    let isotropy = b.transpose().matmul(&g).matmul(b).frobenius_norm();
    let wr = b.realify();
    let reals = id.realify();
    let real_cols: Vec<usize> = (0..n).map(|j| 2 * j).collect();
    let rr = reals.select_columns(&real_cols);
    let mut joined = DMatrix::zeros(2 * n, wr.ncols() + n);
    joined.columns_mut(0, wr.ncols()).copy_from(&wr);
    joined.columns_mut(wr.ncols(), n).copy_from(&rr);
    let rank = linalg::real_column_space(&joined, tol.rank).1.rank;
    let real_intersection_dim = wr.ncols() + n - rank;
    let lie = real_form.lie_algebra_basis(1e-10);
    let (stabilizer_dim, stabilizer_margin) = stabilizer_dimension(&lie, &w, tol.rank);
    Ok(CaseIvReport {
        p,
        q,
        dim: w.dim(),
        subspace: w,
        isotropy_residual: isotropy,
        real_intersection_dim,
        stabilizer_dim,
        stabilizer_margin,
        expected_stabilizer_dim: (p + q) * (p + q),
    })
}

/// Lagrangian representative for the symplectic group.
#[derive(Clone, Debug, Serialize)]
pub struct CaseViReport {
    pub m: usize,
    pub p: usize,
    #[serde(skip)]
    pub subspace: Subspace,
    pub lagrangian_residual: f64,
    /// Eigenvalues of `h(v, w) = i w(conj v, w)` restricted to `W'_0`.
    pub h_eigenvalues: Vec<f64>,
    pub signature: (usize, usize),
    pub stabilizer_dim: usize,
    pub stabilizer_margin: f64,
    /// `m^2`, the real dimension of `U(p, m - p)`.
    pub expected_stabilizer_dim: usize,
}

/// `W'_0 = span{e_r - i e_{m+r} : r < p} + span{e_r + i e_{m+r} : r >= p}`.
pub fn orbit_rep_case_vi(m: usize, p: usize, tol: &Tolerances) -> Result<CaseViReport> {
    if m == 0 || p > m {
        return Err(Error::Invalid("case vi needs 0 <= p <= m and m >= 1".into()));
    }
    let n = 2 * m;
    let cols: Vec<Vec<Quaternion>> = (0..m)
        .map(|r| {
            let mut v = vec![Quaternion::ZERO; n];
            let s = if r < p { -1.0 } else { 1.0 };
            v[r] = Quaternion::real(std::f64::consts::FRAC_1_SQRT_2);
            v[m + r] = Quaternion::new(0.0, s * std::f64::consts::FRAC_1_SQRT_2, 0.0, 0.0);
            v
        })
        .collect();
    let w = Subspace::from_orthonormal(MatK::from_columns(ScalarTag::C, n, &cols));
    let omega = FormSpec::symplectic(ScalarTag::C, m)?;
    let b = w.basis();
    let lagrangian_residual = omega.gram_of(b).frobenius_norm();
    let h = b.adjoint().matmul(omega.gram()).matmul(b).scale_right(Quaternion::I).to_complex();
    let herm = (&h + h.adjoint()).map(|z| z * 0.5);
    let mut eig: Vec<f64> = herm.symmetric_eigen().eigenvalues.iter().copied().collect();
    eig.sort_by(|a, b| b.total_cmp(a));
    let scale = eig.iter().fold(0.0f64, |a, v| a.max(v.abs())).max(1.0);
    if let Some(&e) = eig.iter().find(|e| e.abs() <= tol.rank * scale) {
        return Err(Error::SignatureAmbiguity { eigenvalue: e });
    }
    let pos = eig.iter().filter(|&&e| e > 0.0).count();
    let real_form = FormSpec::symplectic(ScalarTag::R, m)?;
    let lie = real_form.lie_algebra_basis(1e-10);
    let (stabilizer_dim, stabilizer_margin) = stabilizer_dimension(&lie, &w, tol.rank);
    Ok(CaseViReport {
        m,
        p,
        subspace: w,
        lagrangian_residual,
        h_eigenvalues: eig.clone(),
        signature: (pos, eig.len() - pos),
        stabilizer_dim,
        stabilizer_margin,
        expected_stabilizer_dim: m * m,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn small_examples() {
        let tol = Tolerances::default();
        let x = [Quaternion::ZERO, Quaternion::ONE];
        let l = embed_hpq(&x, 1, 0, ScalarTag::R, &tol).unwrap();
        let v = l.basis().column(0);
        assert!((v[0].w - v[2].w).abs() < 1e-15 && v[1].norm() == 0.0);
        assert!(!is_boundary(&l, 1, 0, &tol).unwrap());
        let bad = [Quaternion::ONE, Quaternion::ONE];
        assert!(embed_hpq(&bad, 1, 0, ScalarTag::R, &tol).is_err());
        let back = unembed_hpq(&embed_hpq(&base_point(2, 1), 2, 1, ScalarTag::C, &tol).unwrap(), 2, 1, &tol).unwrap();
        assert!(back.iter().zip(base_point(2, 1)).all(|(a, b)| (*a - b).norm() < 1e-12));
    }

    #[test]
    fn boundary_lines() {
        let tol = Tolerances::default();
        let v = vec![Quaternion::ZERO, Quaternion::ONE, Quaternion::ZERO, Quaternion::ONE];
        let l = Subspace::from_span(&MatK::from_columns(ScalarTag::R, 4, &[v]), 1e-12).unwrap();
        assert!(is_boundary(&l, 1, 1, &tol).unwrap());
        assert!(matches!(unembed_hpq(&l, 1, 1, &tol), Err(Error::BoundaryPoint)));
    }

    #[test]
    fn round_trip_quaternionic() {
        let tol = Tolerances::default();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let x = random_hpq_point(1, 1, ScalarTag::H, &mut rng);
            let l = embed_hpq(&x, 1, 1, ScalarTag::H, &tol).unwrap();
            let y = unembed_hpq(&l, 1, 1, &tol).unwrap();
            assert!(x.iter().zip(&y).all(|(a, b)| (*a - *b).norm() < 1e-10));
        }
    }

    #[test]
    fn case_iv_u11() {
        let r = orbit_rep_case_iv(1, 1, &Tolerances::default()).unwrap();
        assert_eq!(r.dim, 2);
        assert!(r.isotropy_residual < 1e-10);
        assert_eq!(r.real_intersection_dim, 0);
        assert_eq!(r.stabilizer_dim, 4);
    }

    #[test]
    fn case_vi_examples() {
        let t = Tolerances::default();
        let r = orbit_rep_case_vi(2, 1, &t).unwrap();
        assert_eq!(r.signature, (1, 1));
        assert_eq!(r.stabilizer_dim, 4);
        assert_eq!(orbit_rep_case_vi(1, 0, &t).unwrap().signature, (0, 1));
        for m in 1..=4 {
            assert!(orbit_rep_case_vi(m, m / 2, &t).unwrap().lagrangian_residual < 1e-10);
        }
    }
}
