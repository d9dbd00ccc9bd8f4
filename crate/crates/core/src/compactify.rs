//! The compactification of a classical group `G` as the space of maximal
//! isotropic subspaces of `(V ⊕ V, b ⊕ -b)`, or of all N-planes of
//! `V ⊕ V` for `G = GL(V)`.
//!
//! `g` is sent to its graph `{(v, g v)}`; `G × G` acts by
//! `(g1, g2) · W = blockdiag(g1, g2) W`, and the orbits are the strata
//! `U_i = pi^{-1}(F_i(b) × F_i(-b))` (resp. `U_{i,j}`).

use nalgebra::DMatrix;
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::forms::Group;
use crate::linalg;
use crate::scalars::{MatK, ScalarTag};
use crate::subspaces::{self, PiImage, Subspace};
use crate::tolerances::Tolerances;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(untagged)]
pub enum StratumIndex {
    /// `U_i` for the automorphism group of a form.
    Aut(usize),
    /// `U_{i,j}` for the general linear group.
    Gl(usize, usize),
}

impl StratumIndex {
    /// `i` for `U_i`, and `i + j` for `U_{i,j}`.
    pub fn depth(&self) -> usize {
        match *self {
            StratumIndex::Aut(i) => i,
            StratumIndex::Gl(i, j) => i + j,
        }
    }
}

impl std::fmt::Display for StratumIndex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            StratumIndex::Aut(i) => write!(f, "{i}"),
            StratumIndex::Gl(i, j) => write!(f, "({i},{j})"),
        }
    }
}

fn check_member(group: &Group, g: &MatK, tol: &Tolerances) -> Result<()> {
    let r = group.membership_residual(g)?;
    if r > tol.group {
        return Err(match group {
            Group::Aut(_) => Error::NotAutomorphism { residual: r },
            Group::Gl { .. } => Error::Singular("element is not invertible".into()),
        });
    }
    Ok(())
}

/// The diagonal `{(v, v)}`.
pub fn diagonal(tag: ScalarTag, n: usize) -> Subspace {
    let id = MatK::identity(tag, n).scale(std::f64::consts::FRAC_1_SQRT_2);
    Subspace::from_orthonormal(id.vstack(&id))
}

/// Graph `{(v, g v)}` of a group element.
pub fn embed_graph(g: &MatK, group: &Group, tol: &Tolerances) -> Result<Subspace> {
    check_member(group, g, tol)?;
    let g = g.promote(group.tag());
    let stacked = MatK::identity(group.tag(), group.dim()).vstack(&g);
    Subspace::from_span(&stacked, tol.rank)
}

/// Inverse of [`embed_graph`] on the open stratum.
pub fn unembed(w: &Subspace, group: &Group, tol: &Tolerances) -> Result<MatK> {
    let n = group.dim();
    check_ambient(w, group)?;
    let b = w.basis();
    let top = b.submatrix(0, n, 0, n);
    let sv = top.singular_values();
    let smax = sv.first().copied().unwrap_or(0.0);
    let smin = sv.last().copied().unwrap_or(0.0);
    if smax == 0.0 || smin / smax <= tol.rank {
        let i = stratum_index(w, group, tol).map(|(s, _)| s.depth()).unwrap_or(0);
        return Err(Error::NotOpenStratum(i));
    }
    let g = b.submatrix(n, n, 0, n).matmul(&top.try_inverse()?);
    check_member(group, &g, tol)?;
    Ok(g)
}

fn check_ambient(w: &Subspace, group: &Group) -> Result<()> {
    let n = group.dim();
    if w.ambient_dim() != 2 * n {
        return Err(Error::DimensionMismatch {
            expected: 2 * n,
            found: w.ambient_dim(),
        });
    }
    if w.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: w.dim(),
        });
    }
    Ok(())
}

/// Stratum of `W` together with its two boundary components.
pub fn stratum_index(w: &Subspace, group: &Group, tol: &Tolerances) -> Result<(StratumIndex, PiImage)> {
    check_ambient(w, group)?;
    let pi = subspaces::pi_project(w, tol.rank)?;
    let threshold = tol.ambiguity_threshold();
    pi.first_rank.check_margin(threshold)?;
    pi.second_rank.check_margin(threshold)?;
    let (i, j) = (pi.first.dim(), pi.second.dim());
    let idx = match group {
        Group::Aut(_) => {
            if i != j {
                return Err(Error::StratumMismatch { left: i, right: j });
            }
            StratumIndex::Aut(i)
        }
        Group::Gl { .. } => StratumIndex::Gl(i, j),
    };
    Ok((idx, pi))
}

/// `(g1, g2) · W`.
pub fn act(g1: &MatK, g2: &MatK, w: &Subspace, tol: f64) -> Result<Subspace> {
    let m = g1.block_diag(g2);
    w.map(&m, tol)
}

/// Closed-form dimension of a stratum: real dimension in the form case,
/// dimension over K in the linear case.
pub fn stratum_dimension(group: &Group, idx: StratumIndex) -> Result<usize> {
    validate_index(group, idx)?;
    Ok(match (group, idx) {
        (Group::Aut(f), StratumIndex::Aut(i)) => f.group_dim_r() - i * i * f.tag().dim_r(),
        (Group::Gl { n, .. }, StratumIndex::Gl(i, j)) => n * n - i * i - j * j,
        _ => unreachable!("validated"),
    })
}

fn validate_index(group: &Group, idx: StratumIndex) -> Result<()> {
    match (group, idx) {
        (Group::Aut(f), StratumIndex::Aut(i)) if i <= f.rank() => Ok(()),
        (Group::Gl { n, .. }, StratumIndex::Gl(i, j)) if i + j <= *n => Ok(()),
        (Group::Aut(f), StratumIndex::Aut(i)) => Err(Error::IndexOutOfRange { index: i, max: f.rank() }),
        (Group::Gl { n, .. }, StratumIndex::Gl(i, j)) => Err(Error::IndexOutOfRange { index: i + j, max: *n }),
        _ => Err(Error::Invalid("stratum index does not match the group".into())),
    }
}

/// Number of strata `U_{i,j}` of the compactification of `GL_N`.
pub fn stratum_count_gl(n: usize) -> usize {
    (n + 1) * (n + 2) / 2
}

/// All stratum indices of a group.
pub fn all_strata(group: &Group) -> Vec<StratumIndex> {
    match group {
        Group::Aut(f) => (0..=f.rank()).map(StratumIndex::Aut).collect(),
        Group::Gl { n, .. } => (0..=*n)
            .flat_map(|i| (0..=*n - i).map(move |j| StratumIndex::Gl(i, j)))
            .collect(),
    }
}

/// Standard point of a stratum.
///
/// Form case: `(V_i ⊕ 0) + (0 ⊕ V_i) + {(e, e) : e ∈ E}` with `V_i` spanned
/// by the first `i` Witt vectors and `E` the orthogonal complement of the
/// first `i` hyperbolic planes. Linear case: `(V_i ⊕ 0) + (0 ⊕ V'_j)` plus
/// the diagonal of the remaining coordinates, with `V_i` the first `i` and
/// `V'_j` the last `j` coordinate axes.
pub fn standard_point(group: &Group, idx: StratumIndex, tol: &Tolerances) -> Result<Subspace> {
    validate_index(group, idx)?;
    let tag = group.tag();
    let n = group.dim();
    let cols: Vec<(MatK, MatK)> = match (group, idx) {
        (Group::Aut(f), StratumIndex::Aut(i)) => {
            let frame = f.standard_frame(i, tol.spec.max(1e-9))?;
            let zero = MatK::zeros(tag, n, 1);
            let mut v = Vec::new();
            for c in 0..i {
                let fc = frame.submatrix(0, n, c, 1);
                v.push((fc.clone(), zero.clone()));
                v.push((zero.clone(), fc));
            }
            for c in 2 * i..n {
                let e = frame.submatrix(0, n, c, 1);
                v.push((e.clone(), e));
            }
            v
        }
        (Group::Gl { .. }, StratumIndex::Gl(i, j)) => {
            let id = MatK::identity(tag, n);
            let zero = MatK::zeros(tag, n, 1);
            let mut v = Vec::new();
            for c in 0..i {
                v.push((id.submatrix(0, n, c, 1), zero.clone()));
            }
            for c in n - j..n {
                v.push((zero.clone(), id.submatrix(0, n, c, 1)));
            }
            for c in i..n - j {
                let e = id.submatrix(0, n, c, 1);
                v.push((e.clone(), e));
            }
            v
        }
        _ => unreachable!("validated"),
    };
    let m = cols
        .iter()
        .map(|(a, b)| a.vstack(b))
        .reduce(|acc, c| acc.hstack(&c))
        .unwrap_or_else(|| MatK::zeros(tag, 2 * n, 0));
    Subspace::from_span(&m, tol.rank)
}

/// Random point of a stratum: the standard point moved by a random pair of
/// group elements.
pub fn random_point<R: Rng + ?Sized>(group: &Group, idx: StratumIndex, rng: &mut R, tol: &Tolerances) -> Result<Subspace> {
    let w = standard_point(group, idx, tol)?;
    let g1 = group.random_element(rng, 1.0);
    let g2 = group.random_element(rng, 1.0);
    act(&g1, &g2, &w, tol.rank)
}

/// Report of a numerical orbit-dimension computation.
#[derive(Clone, Debug, Serialize)]
pub struct OrbitDimReport {
    pub stratum: StratumIndex,
    /// Closed-form dimension (real for forms, over K for GL).
    pub expected: usize,
    /// Expected real dimension.
    pub expected_real: usize,
    /// Numerical rank of the differential of the orbit map.
    pub rank: usize,
    pub margin: f64,
    pub agrees: bool,
}

/// Numerical rank of the differential at the identity of
/// `(g1, g2) -> (g1, g2) · W` for a point `W` of the stratum, using
/// central differences of projectors.
pub fn verify_stratum_dimension<R: Rng + ?Sized>(
    group: &Group,
    idx: StratumIndex,
    rng: &mut R,
    tol: &Tolerances,
) -> Result<OrbitDimReport> {
    let w = random_point(group, idx, rng, tol)?;
    orbit_dimension_at(group, idx, &w, tol)
}

/// As [`verify_stratum_dimension`], at a given point.
pub fn orbit_dimension_at(group: &Group, idx: StratumIndex, w: &Subspace, tol: &Tolerances) -> Result<OrbitDimReport> {
    const H: f64 = 1e-5;
    let expected = stratum_dimension(group, idx)?;
    let expected_real = match group {
        Group::Aut(_) => expected,
        Group::Gl { tag, .. } => expected * tag.dim_r(),
    };
    let basis = group.lie_algebra_basis(tol.rank);
    let n = group.dim();
    let id = MatK::identity(group.tag(), n);
    let mut columns: Vec<Vec<f64>> = Vec::with_capacity(2 * basis.len());
    for x in &basis {
        let ep = x.scale(H).exp();
        let em = x.scale(-H).exp();
        for (plus, minus) in [((&ep, &id), (&em, &id)), ((&id, &ep), (&id, &em))] {
            let pp = act(plus.0, plus.1, w, 1e-12)?.projector();
            let pm = act(minus.0, minus.1, w, 1e-12)?.projector();
            let dp = (pp - pm) / (2.0 * H);
            columns.push(dp.as_slice().to_vec());
        }
    }
    let rows = columns.first().map(|c| c.len()).unwrap_or(0);
    let m = DMatrix::from_fn(rows, columns.len(), |r, c| columns[c][r]);
    let sv = linalg::singular_values(&m);
    // Floor the scale at 1 so a zero-dimensional orbit reads as rank 0
    // rather than as rank of the roundoff.
    let top = sv.first().copied().unwrap_or(0.0).max(1.0);
    let rel: Vec<f64> = sv.iter().map(|s| s / top).collect();
    let rank = rel.iter().filter(|&&s| s > tol.rank).count();
    let kept = if rank > 0 { rel[rank - 1] } else { 1.0 };
    let dropped = rel.get(rank).copied().unwrap_or(0.0);
    let margin = kept - dropped;
    if margin < tol.ambiguity_threshold() {
        return Err(Error::AmbiguousRank {
            margin,
            threshold: tol.ambiguity_threshold(),
        });
    }
    Ok(OrbitDimReport {
        stratum: idx,
        expected,
        expected_real,
        rank,
        margin,
        agrees: rank == expected_real,
    })
}

/// A pair `(g1, g2)` with `(g1, g2) · W1 = W2`, built from Witt frames of
/// the boundary components. Both points must lie in the same stratum of the
/// compactification of `Aut(b)`.
pub fn transitivity_witness(group: &Group, w1: &Subspace, w2: &Subspace, tol: &Tolerances) -> Result<(MatK, MatK)> {
    let Group::Aut(form) = group else {
        return Err(Error::Invalid("transitivity witness is built for automorphism groups".into()));
    };
    let (s1, _) = stratum_index(w1, group, tol)?;
    let (s2, _) = stratum_index(w2, group, tol)?;
    if s1 != s2 {
        return Err(Error::Invalid(format!("points lie in different strata ({s1} and {s2})")));
    }
    let i = s1.depth();
    let n = form.dim();
    let frame = form.standard_frame(i, 1e-9)?;
    let frame_inv = frame.try_inverse()?;
    let normalize = |w: &Subspace| -> Result<(MatK, MatK, MatK)> {
        let (_, pi) = stratum_index(w, group, tol)?;
        let a = form.witt_extension(pi.first.basis(), 1e-9)?;
        let b = form.witt_extension(pi.second.basis(), 1e-9)?;
        let w2 = act(&a.try_inverse()?, &b.try_inverse()?, w, tol.rank)?;
        let basis = w2.basis();
        let cx = frame_inv.matmul(&basis.submatrix(0, n, 0, n));
        let cy = frame_inv.matmul(&basis.submatrix(n, n, 0, n));
        let k = n - 2 * i;
        let z = cx.submatrix(2 * i, k, 0, n).vstack(&cy.submatrix(2 * i, k, 0, n));
        let (zb, _) = linalg::k_column_space(&z, 1e-8)?;
        if zb.cols() != k {
            return Err(Error::Invalid("quotient of the normalized point is not a graph".into()));
        }
        let h = zb.submatrix(k, k, 0, k).matmul(&zb.submatrix(0, k, 0, k).try_inverse()?);
        Ok((a, b, h))
    };
    let (a1, b1, h1) = normalize(w1)?;
    let (a2, b2, h2) = normalize(w2)?;
    let h = h2.matmul(&h1.try_inverse()?);
    let lift = frame
        .matmul(&MatK::identity(form.tag(), 2 * i).block_diag(&h))
        .matmul(&frame_inv);
    let g1 = a2.matmul(&a1.try_inverse()?);
    let g2 = b2.matmul(&lift).matmul(&b1.try_inverse()?);
    Ok((g1, g2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms::{FormKind, FormSpec};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn o21() -> Group {
        Group::Aut(FormSpec::signature(ScalarTag::R, FormKind::Symmetric, 2, 1).unwrap())
    }

    #[test]
    fn identity_embeds_to_diagonal() {
        let t = Tolerances::default();
        let g = o21();
        let w = embed_graph(&g.identity(), &g, &t).unwrap();
        assert!(w.approx_eq(&diagonal(ScalarTag::R, 3), 1e-12));
        let (s, pi) = stratum_index(&w, &g, &t).unwrap();
        assert_eq!(s, StratumIndex::Aut(0));
        assert_eq!(pi.first.dim(), 0);
        assert!(unembed(&w, &g, &t).unwrap().sub(&g.identity()).frobenius_norm() < 1e-12);
    }

    #[test]
    fn boost_graph_is_isotropic() {
        let t = Tolerances::default();
        let f = FormSpec::signature(ScalarTag::R, FormKind::Symmetric, 1, 1).unwrap();
        let s: f64 = 0.4;
        let boost = MatK::from_real(2, 2, &[s.cosh(), s.sinh(), s.sinh(), s.cosh()]);
        let w = embed_graph(&boost, &Group::Aut(f.clone()), &t).unwrap();
        assert!(subspaces::is_isotropic(&w, &f.direct_sum_minus(), 1e-12).unwrap());
        assert!(w.distance(&diagonal(ScalarTag::R, 2)) > 0.1);
        assert!(embed_graph(&MatK::real_diagonal(ScalarTag::R, &[2.0, 1.0]), &Group::Aut(f), &t).is_err());
    }

    #[test]
    fn dimension_formulas() {
        assert_eq!(stratum_dimension(&o21(), StratumIndex::Aut(1)).unwrap(), 2);
        assert_eq!(stratum_dimension(&o21(), StratumIndex::Aut(0)).unwrap(), 3);
        assert_eq!(stratum_dimension(&Group::gl(ScalarTag::R, 2), StratumIndex::Gl(1, 1)).unwrap(), 2);
        assert!(stratum_dimension(&o21(), StratumIndex::Aut(2)).is_err());
        assert_eq!(stratum_count_gl(1), 3);
        assert_eq!(stratum_count_gl(2), 6);
        assert_eq!(stratum_count_gl(3), 10);
        assert_eq!(all_strata(&Group::gl(ScalarTag::R, 3)).len(), 10);
    }

    #[test]
    fn standard_points_have_their_index() {
        let t = Tolerances::default();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for g in [o21(), Group::gl(ScalarTag::R, 2)] {
            for idx in all_strata(&g) {
                let w = random_point(&g, idx, &mut rng, &t).unwrap();
                assert_eq!(stratum_index(&w, &g, &t).unwrap().0, idx);
                if let Group::Aut(f) = &g {
                    assert!(subspaces::is_isotropic(&w, &f.direct_sum_minus(), 1e-9).unwrap());
                }
            }
        }
    }

    #[test]
    fn gl_corner_point() {
        let t = Tolerances::default();
        let g = Group::gl(ScalarTag::R, 2);
        let m = MatK::from_real(4, 2, &[1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0]);
        let w = Subspace::from_span(&m, 1e-12).unwrap();
        assert_eq!(stratum_index(&w, &g, &t).unwrap().0, StratumIndex::Gl(1, 1));
        assert!(matches!(unembed(&w, &g, &t), Err(Error::NotOpenStratum(2))));
    }

    #[test]
    fn orbit_dimension_o21() {
        let t = Tolerances::default();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let r = verify_stratum_dimension(&o21(), StratumIndex::Aut(1), &mut rng, &t).unwrap();
        assert_eq!(r.rank, 2);
        assert!(r.agrees);
    }
}
