//! Rank-revealing helpers shared by the subspace code.
//!
//! K-linear problems are solved on the realification and the resulting real
//! subspaces, which are K-invariant, are pulled back to K-orthonormal bases.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalars::{MatK, Quaternion, ScalarTag};

/// Outcome of a rank decision.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RankInfo {
    /// Numerical rank over R.
    pub rank: usize,
    /// Smallest retained minus largest discarded relative singular value.
    pub margin: f64,
    /// Singular values divided by the largest one, descending.
    pub relative_singular_values: Vec<f64>,
}

impl RankInfo {
    fn from_sorted(sv: &[f64], tol: f64) -> Self {
        let top = sv.first().copied().unwrap_or(0.0);
        if top <= f64::MIN_POSITIVE {
            return Self {
                rank: 0,
                margin: 1.0,
                relative_singular_values: vec![0.0; sv.len()],
            };
        }
        let rel: Vec<f64> = sv.iter().map(|s| s / top).collect();
        let rank = rel.iter().filter(|&&s| s > tol).count();
        let kept = if rank > 0 { rel[rank - 1] } else { 1.0 };
        let dropped = rel.get(rank).copied().unwrap_or(0.0);
        Self {
            rank,
            margin: kept - dropped,
            relative_singular_values: rel,
        }
    }

    pub fn check_margin(&self, threshold: f64) -> Result<()> {
        if self.margin < threshold {
            Err(Error::AmbiguousRank {
                margin: self.margin,
                threshold,
            })
        } else {
            Ok(())
        }
    }
}

/// SVD with singular values sorted descending. `V` is square when
/// `rows >= cols`.
///
/// nalgebra's implicit-shift SVD can return wrong singular vectors for
/// nearly rank-deficient input (its closing 2x2 step divides by the small
/// singular value), so the factorisation is checked and recomputed by
/// one-sided Jacobi when it does not reproduce `m`.
pub fn sorted_svd(m: &DMatrix<f64>) -> (DMatrix<f64>, Vec<f64>, DMatrix<f64>) {
    let svd = m.clone().svd(true, true);
    let u = svd.u.expect("u requested");
    let v = svd.v_t.expect("v requested").transpose();
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let sv: Vec<f64> = order.iter().map(|&i| svd.singular_values[i]).collect();
    let u = DMatrix::from_fn(u.nrows(), order.len(), |r, c| u[(r, order[c])]);
    let v = DMatrix::from_fn(v.nrows(), order.len(), |r, c| v[(r, order[c])]);
    let scale = m.norm().max(f64::MIN_POSITIVE);
    let recomposed = &u * DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(&sv)) * v.transpose();
    if (recomposed - m).norm() <= 1e-12 * scale {
        return (u, sv, v);
    }
    jacobi_svd(m)
}

/// One-sided Jacobi SVD, thin, singular values descending.
fn jacobi_svd(m: &DMatrix<f64>) -> (DMatrix<f64>, Vec<f64>, DMatrix<f64>) {
    if m.nrows() < m.ncols() {
        let (u, s, v) = jacobi_svd(&m.transpose());
        return (v, s, u);
    }
    let (rows, n) = m.shape();
    let mut a = m.clone();
    let mut v = DMatrix::<f64>::identity(n, n);
    for _sweep in 0..60 {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha = a.column(p).norm_squared();
                let beta = a.column(q).norm_squared();
                let gamma = a.column(p).dot(&a.column(q));
                if gamma.abs() <= f64::EPSILON * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for mat in [&mut a, &mut v] {
                    for r in 0..mat.nrows() {
                        let (x, y) = (mat[(r, p)], mat[(r, q)]);
                        mat[(r, p)] = c * x - s * y;
                        mat[(r, q)] = s * x + c * y;
                    }
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    let norms: Vec<f64> = (0..n).map(|c| a.column(c).norm()).collect();
    order.sort_by(|&x, &y| norms[y].total_cmp(&norms[x]));
    let sv: Vec<f64> = order.iter().map(|&i| norms[i]).collect();
    let floor = sv.first().copied().unwrap_or(0.0) * f64::EPSILON * rows as f64;
    let mut u = DMatrix::<f64>::zeros(rows, n);
    let mut filled = 0;
    for (c, &i) in order.iter().enumerate() {
        if sv[c] > floor {
            u.set_column(c, &(a.column(i) / sv[c]));
            filled += 1;
        }
    }
    // Complete the columns of vanishing singular values.
    let mut e = 0;
    while filled < n && e < rows {
        let mut x = nalgebra::DVector::<f64>::zeros(rows);
        x[e] = 1.0;
        for _ in 0..2 {
            for c in 0..filled {
                let d = u.column(c).dot(&x);
                x -= u.column(c) * d;
            }
        }
        let nx = x.norm();
        if nx > 0.5 {
            u.set_column(filled, &(x / nx));
            filled += 1;
        }
        e += 1;
    }
    let v = DMatrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    (u, sv, v)
}

/// Singular values only, descending.
pub fn singular_values(m: &DMatrix<f64>) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut sv: Vec<f64> = m.singular_values().iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

/// Orthonormal basis of the null space of a real matrix.
pub fn real_null_space(m: &DMatrix<f64>, tol: f64) -> (DMatrix<f64>, RankInfo) {
    let cols = m.ncols();
    if cols == 0 {
        return (DMatrix::zeros(0, 0), RankInfo::from_sorted(&[], tol));
    }
    let padded = if m.nrows() < cols {
        let mut p = DMatrix::zeros(cols, cols);
        p.view_mut((0, 0), (m.nrows(), cols)).copy_from(m);
        p
    } else {
        m.clone()
    };
    let (_, sv, v) = sorted_svd(&padded);
    let info = RankInfo::from_sorted(&sv, tol);
    let basis = v.columns(info.rank, cols - info.rank).into_owned();
    (basis, info)
}

/// Orthonormal basis of the column space of a real matrix.
pub fn real_column_space(m: &DMatrix<f64>, tol: f64) -> (DMatrix<f64>, RankInfo) {
    if m.ncols() == 0 || m.nrows() == 0 {
        return (DMatrix::zeros(m.nrows(), 0), RankInfo::from_sorted(&[], tol));
    }
    let (u, sv, _) = sorted_svd(m);
    let info = RankInfo::from_sorted(&sv, tol);
    (u.columns(0, info.rank).into_owned(), info)
}

/// Reads a real vector of length `d * n` as a K-vector of length `n`.
pub fn k_vector_from_real(tag: ScalarTag, v: &[f64]) -> Vec<Quaternion> {
    let d = tag.dim_r();
    v.chunks(d).map(Quaternion::from_slice).collect()
}

/// `sum conj(x_i) y_i`.
pub fn k_dot(x: &[Quaternion], y: &[Quaternion]) -> Quaternion {
    x.iter().zip(y).fold(Quaternion::ZERO, |acc, (a, b)| acc + a.conj() * *b)
}

pub fn k_norm(x: &[Quaternion]) -> f64 {
    x.iter().map(|q| q.norm_sqr()).sum::<f64>().sqrt()
}

/// Pivoted Gram-Schmidt over K. Returns up to `max_vectors` K-orthonormal
/// vectors spanning the K-span of `candidates`, skipping residuals whose
/// norm falls below `floor`.
pub fn k_gram_schmidt(
    tag: ScalarTag,
    candidates: &[Vec<Quaternion>],
    max_vectors: usize,
    floor: f64,
) -> Vec<Vec<Quaternion>> {
    let mut residuals: Vec<Vec<Quaternion>> = candidates.to_vec();
    let mut basis: Vec<Vec<Quaternion>> = Vec::new();
    while basis.len() < max_vectors {
        let best = residuals
            .iter()
            .enumerate()
            .map(|(i, r)| (i, k_norm(r)))
            .max_by(|a, b| a.1.total_cmp(&b.1));
        let Some((idx, norm)) = best else { break };
        if norm <= floor {
            break;
        }
        let q: Vec<Quaternion> = residuals.swap_remove(idx).iter().map(|&a| tag.project(a.scale(1.0 / norm))).collect();
        // Two passes keep the basis orthogonal to working precision.
        for _ in 0..2 {
            for r in residuals.iter_mut() {
                let c = k_dot(&q, r);
                for (ri, &qi) in r.iter_mut().zip(&q) {
                    *ri = *ri - qi * c;
                }
            }
        }
        basis.push(q);
    }
    basis
}

/// K-orthonormal basis (as matrix columns) of a K-invariant real subspace
/// given by real orthonormal columns.
pub fn pull_back(tag: ScalarTag, real_basis: &DMatrix<f64>) -> Result<MatK> {
    let d = tag.dim_r();
    let n = real_basis.nrows() / d;
    let r = real_basis.ncols();
    if !r.is_multiple_of(d) {
        return Err(Error::AmbiguousRank {
            margin: 0.0,
            threshold: 0.0,
        });
    }
    let cands: Vec<Vec<Quaternion>> = (0..r)
        .map(|c| k_vector_from_real(tag, real_basis.column(c).as_slice()))
        .collect();
    let basis = k_gram_schmidt(tag, &cands, r / d, 1e-6);
    if basis.len() != r / d {
        return Err(Error::Invalid("real subspace is not K-invariant".into()));
    }
    Ok(MatK::from_columns(tag, n, &basis))
}

/// K-orthonormal basis of `{x : m x = 0}`.
pub fn k_null_space(m: &MatK, tol: f64) -> Result<(MatK, RankInfo)> {
    let (real, info) = real_null_space(&m.realify(), tol);
    if real.ncols() == 0 {
        return Ok((MatK::zeros(m.tag(), m.cols(), 0), info));
    }
    Ok((pull_back(m.tag(), &real)?, info))
}

/// K-orthonormal basis of the column space of `m`.
pub fn k_column_space(m: &MatK, tol: f64) -> Result<(MatK, RankInfo)> {
    let (real, info) = real_column_space(&m.realify(), tol);
    if real.ncols() == 0 {
        return Ok((MatK::zeros(m.tag(), m.rows(), 0), info));
    }
    Ok((pull_back(m.tag(), &real)?, info))
}

/// Orthogonal projector onto the real span of the columns of a
/// K-orthonormal basis.
pub fn projector(basis: &MatK) -> DMatrix<f64> {
    let r = basis.realify();
    &r * r.transpose()
}

/// Spectral norm of a real matrix.
pub fn op_norm(m: &DMatrix<f64>) -> f64 {
    singular_values(m).first().copied().unwrap_or(0.0)
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

/// `k`-th exterior power of a square matrix in the basis of sorted index
/// subsets.
pub fn exterior_power(m: &DMatrix<f64>, k: usize) -> DMatrix<f64> {
    let idx = subsets(m.nrows(), k);
    DMatrix::from_fn(idx.len(), idx.len(), |r, c| {
        DMatrix::from_fn(k, k, |a, b| m[(idx[r][a], idx[c][b])]).determinant()
    })
}

/// Log of the largest singular value of `m^(2^e)`, squaring with
/// renormalisation.
fn log_top_singular_value_of_power(m: &DMatrix<f64>, e: u32) -> f64 {
    let mut p = m.clone();
    let mut log_scale = 0.0;
    for _ in 0..e {
        p = &p * &p;
        log_scale *= 2.0;
        let s = p.amax();
        if s > 0.0 {
            p /= s;
            log_scale += s.ln();
        }
    }
    singular_values(&p).first().map_or(f64::NEG_INFINITY, |s| s.ln() + log_scale)
}

/// The `count` largest log singular values of `m^(2^e)`. Each is read off
/// the top singular value of an exterior power, which stays accurate when
/// the values spread beyond machine precision.
pub fn log_singular_values_of_power(m: &DMatrix<f64>, e: u32, count: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(count);
    let mut prev = 0.0;
    for k in 1..=count.min(m.nrows()) {
        let top = log_top_singular_value_of_power(&exterior_power(m, k), e);
        out.push(top - prev);
        prev = top;
    }
    out
}
