//! Cartan projection `mu`, Lyapunov projection `lambda` and the opposition
//! involution.
//!
//! In the Gram bases used by [`FormSpec`](crate::forms::FormSpec) every
//! automorphism group is stable under conjugate transposition, so `mu(g)` is
//! read off the singular values of `g` directly: the `n` largest log
//! singular values, clamped at zero. For `GL_N` all `N` log singular values
//! are kept. `lambda` applies the same rule to eigenvalue moduli.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::forms::{Group, RootData};
use crate::linalg;
use crate::scalars::{spectrum, MatK};
use crate::tolerances::Tolerances;

/// A point of the closed positive Weyl chamber.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(transparent)]
pub struct WeylVector(pub Vec<f64>);

impl WeylVector {
    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn max_abs_diff(&self, other: &WeylVector) -> f64 {
        self.0.iter().zip(&other.0).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }

    pub fn scale(&self, s: f64) -> WeylVector {
        WeylVector(self.0.iter().map(|v| v * s).collect())
    }

    pub fn in_chamber(&self, rd: &RootData, tol: f64) -> bool {
        rd.in_chamber(&self.0, tol)
    }
}

/// Log singular values, descending.
pub fn log_singular_values(g: &MatK) -> Vec<f64> {
    g.singular_values().into_iter().map(f64::ln).collect()
}

/// Log eigenvalue moduli, descending.
pub fn log_eigenvalue_moduli(g: &MatK) -> Result<Vec<f64>> {
    Ok(spectrum(g)?.into_iter().map(f64::ln).collect())
}

/// Largest violation of the symmetry `l_k = -l_{N-1-k}` beyond the
/// accuracy with which the small singular value can be resolved.
pub fn pairing_defect(logs: &[f64], tol: f64) -> f64 {
    let n = logs.len();
    let top = logs.first().copied().unwrap_or(0.0);
    let mut worst: f64 = 0.0;
    for k in 0..n / 2 {
        let (a, b) = (logs[k], logs[n - 1 - k]);
        let resolution = 1e-13 * (top - b).exp();
        let allowed = tol * (1.0 + a.abs()) + resolution;
        let excess = (a + b).abs() - allowed;
        if excess > 0.0 {
            worst = worst.max((a + b).abs());
        }
    }
    worst
}

fn truncate(logs: Vec<f64>, group: &Group) -> WeylVector {
    match group {
        Group::Aut(f) => WeylVector(logs.into_iter().take(f.rank()).map(|v| v.max(0.0)).collect()),
        Group::Gl { .. } => WeylVector(logs),
    }
}

fn check_shape(g: &MatK, group: &Group) -> Result<()> {
    if !g.is_square() {
        return Err(Error::NotSquare {
            rows: g.rows(),
            cols: g.cols(),
        });
    }
    if g.rows() != group.dim() {
        return Err(Error::DimensionMismatch {
            expected: group.dim(),
            found: g.rows(),
        });
    }
    Ok(())
}

/// Cartan projection without membership or pairing checks.
pub fn cartan_mu_unchecked(g: &MatK, group: &Group) -> WeylVector {
    truncate(log_singular_values(g), group)
}

/// Cartan projection. In the form case the log singular values must pair
/// up under negation, which fails when `g` has left the group.
pub fn cartan_mu(g: &MatK, group: &Group, tol: &Tolerances) -> Result<WeylVector> {
    check_shape(g, group)?;
    let logs = log_singular_values(g);
    if let Group::Aut(_) = group {
        let defect = pairing_defect(&logs, tol.pairing);
        if defect > 0.0 {
            return Err(Error::PairingViolation { defect });
        }
    }
    Ok(truncate(logs, group))
}

/// Lyapunov projection from eigenvalue moduli.
pub fn lyapunov_lambda(g: &MatK, group: &Group) -> Result<WeylVector> {
    check_shape(g, group)?;
    Ok(truncate(log_eigenvalue_moduli(g)?, group))
}

/// Comparison of `lambda(g)` with `mu(g^k) / k`.
#[derive(Clone, Debug, Serialize)]
pub struct LyapunovCheck {
    pub lambda: WeylVector,
    pub estimate: WeylVector,
    pub power: u32,
    pub difference: f64,
}

/// `mu(g^k) / k` for `k` a power of two.
pub fn mu_of_power(g: &MatK, group: &Group, k: u32) -> Result<WeylVector> {
    check_shape(g, group)?;
    if !k.is_power_of_two() {
        return Err(Error::Invalid("power must be a power of two".into()));
    }
    let count = match group {
        Group::Aut(f) => f.rank(),
        Group::Gl { n, .. } => *n,
    };
    // The realification repeats every singular value `d` times.
    let d = g.tag().dim_r();
    let real = linalg::log_singular_values_of_power(&g.realify(), k.trailing_zeros(), d * count);
    let logs: Vec<f64> = real.chunks(d).map(|c| c.iter().sum::<f64>() / d as f64).collect();
    Ok(truncate(logs, group).scale(1.0 / f64::from(k)))
}

/// `lambda(g)` cross-checked against `mu(g^k) / k`.
pub fn lyapunov_cross_check(g: &MatK, group: &Group, k: u32, tol: f64) -> Result<LyapunovCheck> {
    let lambda = lyapunov_lambda(g, group)?;
    let estimate = mu_of_power(g, group, k)?;
    let difference = lambda.max_abs_diff(&estimate);
    if difference > tol {
        return Err(Error::CrossCheck { difference });
    }
    Ok(LyapunovCheck {
        lambda,
        estimate,
        power: k,
        difference,
    })
}

/// The opposition involution `-w0`.
pub fn opposition_apply(rd: &RootData, v: &WeylVector) -> WeylVector {
    WeylVector(rd.opposition(&v.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms::{FormKind, FormSpec, RootType};
    use crate::scalars::ScalarTag;

    fn sl2() -> Group {
        Group::Aut(FormSpec::symplectic(ScalarTag::R, 1).unwrap())
    }

    #[test]
    fn mu_examples() {
        let t = Tolerances::default();
        let o11 = Group::Aut(FormSpec::signature(ScalarTag::R, FormKind::Symmetric, 1, 1).unwrap());
        let d = MatK::real_diagonal(ScalarTag::R, &[2.0, 0.5]);
        assert!((cartan_mu(&d, &sl2(), &t).unwrap().0[0] - 2f64.ln()).abs() < 1e-12);
        assert_eq!(cartan_mu(&MatK::identity(ScalarTag::R, 2), &o11, &t).unwrap().0, vec![0.0]);
        let shear = MatK::from_real(2, 2, &[1.0, 1.0, 0.0, 1.0]);
        let golden = (1.0 + 5f64.sqrt()) / 2.0;
        assert!((cartan_mu(&shear, &sl2(), &t).unwrap().0[0] - golden.ln()).abs() < 1e-12);
        assert!(cartan_mu(&MatK::real_diagonal(ScalarTag::R, &[2.0, 1.0]), &sl2(), &t).is_err());
    }

    #[test]
    fn lambda_examples() {
        let shear = MatK::from_real(2, 2, &[1.0, 1.0, 0.0, 1.0]);
        assert!(lyapunov_lambda(&shear, &sl2()).unwrap().0[0].abs() < 1e-7);
        let d = MatK::real_diagonal(ScalarTag::R, &[3.0, 1.0 / 3.0]);
        assert!((lyapunov_lambda(&d, &sl2()).unwrap().0[0] - 3f64.ln()).abs() < 1e-12);
        let chk = lyapunov_cross_check(&d, &sl2(), 64, 1e-3).unwrap();
        assert!(chk.difference < 1e-12);
    }

    #[test]
    fn power_keeps_inner_singular_values() {
        // Sp(4,R) element with outer log singular value 3 and inner 0.1: in
        // g^64 the inner values sit far below machine precision of the top.
        let sp4 = Group::Aut(FormSpec::symplectic(ScalarTag::R, 2).unwrap());
        let (a, b) = (3f64.exp(), 0.1f64.exp());
        let d = MatK::real_diagonal(ScalarTag::R, &[a, b, 1.0 / a, 1.0 / b]);
        let mu = mu_of_power(&d, &sp4, 64).unwrap();
        assert!((mu.0[0] - 3.0).abs() < 1e-12 && (mu.0[1] - 0.1).abs() < 1e-10, "{mu:?}");
        let u21 = Group::Aut(FormSpec::signature(ScalarTag::C, FormKind::Hermitian, 2, 1).unwrap());
        let one = MatK::identity(ScalarTag::C, 3);
        assert!(mu_of_power(&one, &u21, 8).unwrap().0[0].abs() < 1e-12);
    }

    #[test]
    fn gl_mu_keeps_all_values() {
        let g = Group::gl(ScalarTag::R, 3);
        let m = MatK::real_diagonal(ScalarTag::R, &[1.0, 4.0, 0.5]);
        let mu = cartan_mu(&m, &g, &Tolerances::default()).unwrap();
        assert!((mu.0[0] - 4f64.ln()).abs() < 1e-12 && (mu.0[2] - 0.5f64.ln()).abs() < 1e-12);
        let inv = cartan_mu(&m.try_inverse().unwrap(), &g, &Tolerances::default()).unwrap();
        let opp = opposition_apply(&g.root_data(), &mu);
        assert!(inv.max_abs_diff(&opp) < 1e-12);
    }

    #[test]
    fn opposition_examples() {
        let rd = RootData::new(RootType::B, 2);
        assert_eq!(opposition_apply(&rd, &WeylVector(vec![3.0, 1.0])).0, vec![3.0, 1.0]);
        assert_eq!(opposition_apply(&rd, &WeylVector(vec![0.0, 0.0])).0, vec![0.0, 0.0]);
    }
}
