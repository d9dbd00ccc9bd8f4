//! Membership in the thickened limit set `K_xi`, in the strata of the
//! quotient compactification, and a finite-ball recurrence diagnostic for
//! the action of `rho_L ⊕ rho_R`.
//!
//! `K_xi` is only known through a finite sample, so every answer comes with
//! the smallest containment residual seen.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::anosov::{scan_ball, AnosovConfig, LimitSetSample, RepSpec, Word};
use crate::compactify::{act, standard_point, stratum_index, StratumIndex};
use crate::error::{Error, Result};
use crate::forms::{FormSpec, Group};
use crate::scalars::MatK;
use crate::subspaces::Subspace;
use crate::tolerances::Tolerances;

/// Outcome of a containment search against a sample.
#[derive(Clone, Debug, Serialize)]
pub struct Containment {
    pub contained: bool,
    /// Smallest residual over the sample; `1` for an empty sample.
    pub min_residual: f64,
    /// Index of the sample point achieving it.
    pub nearest: Option<usize>,
}

fn search(points: &[Subspace], residual: impl Fn(&Subspace) -> f64, tol: f64) -> Containment {
    let mut best = Containment {
        contained: false,
        min_residual: 1.0,
        nearest: None,
    };
    for (i, p) in points.iter().enumerate() {
        let r = residual(p);
        if best.nearest.is_none() || r < best.min_residual {
            best.min_residual = r;
            best.nearest = Some(i);
        }
    }
    best.contained = best.nearest.is_some() && best.min_residual <= tol;
    best
}

fn check_ambient(a: &Subspace, b: &Subspace) -> Result<()> {
    if a.ambient_dim() != b.ambient_dim() {
        return Err(Error::DimensionMismatch {
            expected: b.ambient_dim(),
            found: a.ambient_dim(),
        });
    }
    Ok(())
}

/// Whether some sampled line lies in `w`.
pub fn in_k_xi(w: &Subspace, sample: &LimitSetSample, tol: f64) -> Result<Containment> {
    let pts = sample.subspaces();
    for p in &pts {
        check_ambient(p, w)?;
    }
    Ok(search(&pts, |p| w.containment_residual(p), tol))
}

/// Whether the line `l` lies in some sampled plane. Refused for split
/// orthogonal forms.
pub fn in_k_xi_dual(l: &Subspace, sample: &LimitSetSample, form: &FormSpec, tol: f64) -> Result<Containment> {
    if form.is_split_orthogonal() {
        return Err(Error::UnsupportedForm("the dual thickening is not defined for split orthogonal forms".into()));
    }
    let pts = sample.subspaces();
    for p in &pts {
        check_ambient(p, l)?;
    }
    Ok(search(&pts, |p| p.containment_residual(l), tol))
}

/// Stratum of a point of the compactification and whether it lies in the
/// domain.
#[derive(Clone, Debug, Serialize)]
pub struct Membership {
    pub stratum: StratumIndex,
    pub in_omega: bool,
    /// Smallest residual of a sampled line inside `W ∩ (V⊕0)`.
    pub margin: f64,
    pub nearest: Option<usize>,
}

/// `W` lies outside the domain exactly when a sampled line sits in its
/// first boundary component.
pub fn stratum_membership(w: &Subspace, group: &Group, sample: &LimitSetSample, tol: &Tolerances) -> Result<Membership> {
    let (stratum, pi) = stratum_index(w, group, tol)?;
    let c = in_k_xi(&pi.first, sample, tol.contain)?;
    Ok(Membership {
        stratum,
        in_omega: !c.contained,
        margin: c.min_residual,
        nearest: c.nearest,
    })
}

/// A point of stratum 1 whose first boundary component is the isotropic
/// line `l`.
pub fn stratum_one_point(l: &Subspace, group: &Group, tol: &Tolerances) -> Result<Subspace> {
    let Group::Aut(form) = group else {
        return Err(Error::Invalid("stratum-one points are built for form groups".into()));
    };
    if l.dim() != 1 {
        return Err(Error::DimensionMismatch { expected: 1, found: l.dim() });
    }
    let g = form.witt_extension(l.basis(), tol.spec.max(1e-9))?;
    let w = standard_point(group, StratumIndex::Aut(1), tol)?;
    act(&g, &group.identity(), &w, tol.rank)
}

/// Perturbation test of openness around a point of the domain.
#[derive(Clone, Debug, Serialize)]
pub struct OpennessReport {
    pub margin: f64,
    pub directions: usize,
    /// Distance of each perturbed point from the original.
    pub distances: Vec<f64>,
    pub failures: usize,
    pub passed: bool,
}

/// Moves `w` by `(exp(tX), exp(tY))` for random Lie algebra elements, with
/// `t` halved until the move is at most half the margin, and checks that
/// the moved point stays in the domain.
pub fn openness_test(
    w: &Subspace,
    group: &Group,
    sample: &LimitSetSample,
    directions: usize,
    seed: u64,
    tol: &Tolerances,
) -> Result<OpennessReport> {
    let base = stratum_membership(w, group, sample, tol)?;
    if !base.in_omega {
        return Err(Error::Invalid("openness is tested at points of the domain".into()));
    }
    let margin = base.margin;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut distances = Vec::with_capacity(directions);
    let mut failures = 0;
    for _ in 0..directions {
        let x = group.random_lie_element(&mut rng, 1.0);
        let y = group.random_lie_element(&mut rng, 1.0);
        let mut t = 0.5 * margin / x.op_norm().max(y.op_norm()).max(1e-12);
        let moved = loop {
            let m = act(&x.scale(t).exp(), &y.scale(t).exp(), w, tol.rank)?;
            let d = m.distance(w);
            if d <= margin / 2.0 || t < 1e-12 {
                distances.push(d);
                break m;
            }
            t /= 2.0;
        };
        if !stratum_membership(&moved, group, sample, tol)?.in_omega {
            failures += 1;
        }
    }
    Ok(OpennessReport {
        margin,
        directions,
        distances,
        failures,
        passed: failures == 0,
    })
}

/// Words of the ball that bring `W0` back within `delta`.
#[derive(Clone, Debug, Serialize)]
pub struct RecurrenceReport {
    pub radius: usize,
    pub delta: f64,
    /// Number of returning words, the empty word included.
    pub count: usize,
    pub words_checked: usize,
    /// Longest returning word length.
    pub max_length: usize,
    /// Returning words, capped at 100.
    pub returners: Vec<Word>,
    /// Smallest distance reached by a nontrivial word.
    pub min_nontrivial_distance: Option<f64>,
}

pub fn orbit_recurrence_probe(
    left: &RepSpec,
    right: &RepSpec,
    w0: &Subspace,
    radius: usize,
    delta: f64,
    cfg: &AnosovConfig,
    tol: &Tolerances,
) -> Result<RecurrenceReport> {
    let pair = left.product(right, tol)?;
    if w0.ambient_dim() != pair.group().dim() {
        return Err(Error::DimensionMismatch {
            expected: pair.group().dim(),
            found: w0.ambient_dim(),
        });
    }
    let mut dists: Vec<(Word, f64)> = vec![(Word::empty(), 0.0)];
    if radius > 0 {
        let found = scan_ball(&pair, radius, cfg, |_, m: &MatK| match w0.map(m, tol.rank) {
            Ok(moved) => moved.distance(w0),
            Err(_) => f64::INFINITY,
        })?;
        dists.extend(found);
    }
    let words_checked = dists.len();
    let min_nontrivial_distance = dists.iter().skip(1).map(|(_, d)| *d).reduce(f64::min);
    let back: Vec<Word> = dists.into_iter().filter(|(_, d)| *d < delta).map(|(w, _)| w).collect();
    Ok(RecurrenceReport {
        radius,
        delta,
        count: back.len(),
        words_checked,
        max_length: back.iter().map(Word::len).max().unwrap_or(0),
        returners: back.into_iter().take(100).collect(),
        min_nontrivial_distance,
    })
}

/// A random maximal isotropic subspace of `V ⊕ V` of stratum `i`, kept
/// only if it avoids the sample. Rejection sampling, up to `tries`.
pub fn random_domain_point(group: &Group, i: usize, sample: &LimitSetSample, seed: u64, tries: usize, tol: &Tolerances) -> Result<Subspace> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..tries {
        let w = crate::compactify::random_point(group, StratumIndex::Aut(i), &mut rng, tol)?;
        let m = stratum_membership(&w, group, sample, tol)?;
        if m.in_omega && m.margin > 1e-3 {
            return Ok(w);
        }
    }
    Err(Error::Invalid("no domain point found".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::anosov::{limit_set, samples};
    use crate::compactify::embed_graph;

    fn setup() -> (RepSpec, LimitSetSample, Tolerances) {
        let tol = Tolerances::default();
        let rep = samples::fuchsian_o21(2.0 * 3f64.ln());
        let sample = limit_set(&rep, 3, 1, &AnosovConfig::default(), &tol).unwrap();
        (rep, sample, tol)
    }

    #[test]
    fn graph_points_are_in_the_domain() {
        let (rep, sample, tol) = setup();
        let w = embed_graph(&rep.evaluate(&"abA".parse().unwrap()).unwrap(), rep.group(), &tol).unwrap();
        let m = stratum_membership(&w, rep.group(), &sample, &tol).unwrap();
        assert_eq!(m.stratum, StratumIndex::Aut(0));
        assert!(m.in_omega);
    }

    #[test]
    fn points_through_limit_lines_are_excluded() {
        let (rep, sample, tol) = setup();
        let l = &sample.points[0].subspace;
        let w = stratum_one_point(l, rep.group(), &tol).unwrap();
        let m = stratum_membership(&w, rep.group(), &sample, &tol).unwrap();
        assert_eq!(m.stratum, StratumIndex::Aut(1));
        assert!(!m.in_omega, "{m:?}");
        assert!(in_k_xi(l, &sample, tol.contain).unwrap().contained);
    }

    #[test]
    fn empty_sample_contains_nothing() {
        let (rep, mut sample, tol) = setup();
        sample.points.clear();
        let w = Subspace::whole(rep.group().tag(), 3);
        assert!(!in_k_xi(&w, &sample, tol.contain).unwrap().contained);
    }

    #[test]
    fn dual_refuses_split_forms() {
        let (_, sample, tol) = setup();
        let split = FormSpec::signature(crate::ScalarTag::R, crate::FormKind::Symmetric, 2, 2).unwrap();
        let l = sample.points[0].subspace.clone();
        assert!(in_k_xi_dual(&l, &sample, &split, tol.contain).is_err());
    }

    #[test]
    fn recurrence_radius_zero() {
        let (rep, _, tol) = setup();
        let triv = samples::trivial(rep.group(), 2);
        let w = embed_graph(&rep.group().identity(), rep.group(), &tol).unwrap();
        let r = orbit_recurrence_probe(&rep, &triv, &w, 0, 0.1, &AnosovConfig::default(), &tol).unwrap();
        assert_eq!(r.count, 1);
    }
}
