//! Free-group representations: word balls, divergence profiles of root
//! values of `mu`, domination constants between two representations,
//! attracting subspaces and sampled limit sets.
//!
//! Every verdict here is a statement about a finite ball ("consistent at
//! radius r"), never a proof of the asymptotic property.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::cartan::{cartan_mu_unchecked, lyapunov_lambda};
use crate::error::{Error, Result};
use crate::forms::{FormKind, Group};
use crate::linalg::{self, k_dot};
use crate::parallel::Executor;
use crate::scalars::{spectrum, MatK, Quaternion, ScalarTag};
use crate::subspaces::{isotropy_residual, Subspace};
use crate::tolerances::Tolerances;

/// A freely reduced word. Letter `+(i+1)` is the generator `a_i`, `-(i+1)`
/// its inverse. Printed with `a, b, c, ...` for generators and capitals for
/// inverses.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Word(Vec<i16>);

fn letter_key(l: i16) -> u32 {
    2 * (l.unsigned_abs() as u32 - 1) + u32::from(l < 0)
}

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    /// Builds a word, reducing it freely.
    pub fn from_letters(letters: &[i16]) -> Result<Self> {
        let mut out: Vec<i16> = Vec::with_capacity(letters.len());
        for &l in letters {
            if l == 0 {
                return Err(Error::Parse("letter 0 is not a generator".into()));
            }
            if out.last() == Some(&-l) {
                out.pop();
            } else {
                out.push(l);
            }
        }
        Ok(Word(out))
    }

    pub fn letters(&self) -> &[i16] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Largest generator index used, plus one.
    pub fn rank_used(&self) -> usize {
        self.0.iter().map(|l| l.unsigned_abs() as usize).max().unwrap_or(0)
    }

    pub fn inverse(&self) -> Word {
        Word(self.0.iter().rev().map(|l| -l).collect())
    }

    /// Free product `self * other`.
    pub fn concat(&self, other: &Word) -> Word {
        let letters: Vec<i16> = self.0.iter().chain(&other.0).copied().collect();
        Word::from_letters(&letters).expect("letters are nonzero")
    }

    /// `u * self * u^-1`, freely reduced.
    pub fn conjugate_by(&self, u: &Word) -> Word {
        u.concat(self).concat(&u.inverse())
    }

    pub fn pow(&self, k: usize) -> Word {
        let letters: Vec<i16> = std::iter::repeat_n(self.0.iter().copied(), k).flatten().collect();
        Word::from_letters(&letters).expect("letters are nonzero")
    }

    /// Whether the first and last letters are not mutually inverse.
    pub fn is_cyclically_reduced(&self) -> bool {
        match (self.0.first(), self.0.last()) {
            (Some(&a), Some(&b)) => a != -b || self.0.len() == 1,
            _ => true,
        }
    }

    /// Smallest cyclic rotation in word order.
    pub fn min_rotation(&self) -> Word {
        let n = self.0.len();
        (0..n.max(1))
            .map(|s| Word(self.0[s.min(n)..].iter().chain(&self.0[..s.min(n)]).copied().collect()))
            .min()
            .unwrap_or_default()
    }

    /// Whether `self` is the chosen representative of its rotation class.
    pub fn is_class_representative(&self) -> bool {
        !self.is_empty() && self.is_cyclically_reduced() && *self == self.min_rotation()
    }

    fn keys(&self) -> impl Iterator<Item = u32> + '_ {
        self.0.iter().map(|&l| letter_key(l))
    }
}

impl Ord for Word {
    fn cmp(&self, other: &Self) -> Ordering {
        self.len().cmp(&other.len()).then_with(|| self.keys().cmp(other.keys()))
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "e");
        }
        for &l in &self.0 {
            let i = l.unsigned_abs() as u32 - 1;
            if i < 26 {
                let base = if l > 0 { b'a' } else { b'A' };
                write!(f, "{}", (base + i as u8) as char)?;
            } else {
                write!(f, "[{l}]")?;
            }
        }
        Ok(())
    }
}

impl FromStr for Word {
    type Err = Error;

    /// Parses `abAB`-style words; `e` or the empty string is the identity.
    /// Generators beyond `z` are written `[n]` or `[-n]`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() || s == "e" {
            return Ok(Word::empty());
        }
        let mut letters = Vec::new();
        let mut chars = s.chars().peekable();
        while let Some(c) = chars.next() {
            match c {
                'a'..='z' => letters.push((c as u8 - b'a') as i16 + 1),
                'A'..='Z' => letters.push(-((c as u8 - b'A') as i16 + 1)),
                '[' => {
                    let num: String = chars.by_ref().take_while(|&c| c != ']').collect();
                    let v: i16 = num.trim().parse().map_err(|_| Error::Parse(format!("bad letter [{num}]")))?;
                    letters.push(v);
                }
                c if c.is_whitespace() => {}
                _ => return Err(Error::Parse(format!("unexpected character {c:?} in word"))),
            }
        }
        Word::from_letters(&letters)
    }
}

impl Serialize for Word {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Word {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Number of reduced words of length exactly `len` in `F_k`.
pub fn sphere_size(k: usize, len: usize) -> u128 {
    if len == 0 {
        return 1;
    }
    let k = k as u128;
    let mut n = 2 * k;
    for _ in 1..len {
        n = n.saturating_mul(2 * k - 1);
    }
    n
}

/// Number of nontrivial reduced words of length at most `radius`.
pub fn ball_size(k: usize, radius: usize) -> u128 {
    (1..=radius).fold(0u128, |acc, l| acc.saturating_add(sphere_size(k, l)))
}

/// All nontrivial freely reduced words of length at most `radius`, in word
/// order.
#[derive(Clone, Debug, Serialize)]
pub struct WordBall {
    pub rank: usize,
    pub radius: usize,
    pub words: Vec<Word>,
}

fn children(k: usize, w: &Word) -> Vec<Word> {
    let last = w.0.last().copied();
    let mut out = Vec::with_capacity(2 * k);
    for i in 1..=k as i16 {
        for l in [i, -i] {
            if last != Some(-l) {
                let mut v = w.0.clone();
                v.push(l);
                out.push(Word(v));
            }
        }
    }
    out
}

fn check_ball(k: usize, radius: usize, cap: usize) -> Result<()> {
    if k == 0 {
        return Err(Error::Invalid("free rank must be at least 1".into()));
    }
    let count = ball_size(k, radius);
    if count > cap as u128 {
        return Err(Error::BallTooLarge { count, cap });
    }
    Ok(())
}

pub fn word_ball(k: usize, radius: usize, cap: usize) -> Result<WordBall> {
    check_ball(k, radius, cap)?;
    let mut words = Vec::new();
    let mut layer = vec![Word::empty()];
    for _ in 0..radius {
        layer = layer.iter().flat_map(|w| children(k, w)).collect();
        words.extend(layer.iter().cloned());
    }
    Ok(WordBall { rank: k, radius, words })
}

/// Images of the free generators of `F_k` in a group.
#[derive(Clone, Debug)]
pub struct RepSpec {
    group: Group,
    generators: Vec<MatK>,
    inverses: Vec<MatK>,
}

impl RepSpec {
    /// Checks that every generator lies in the group at `tol.group`.
    pub fn new(group: Group, generators: Vec<MatK>, tol: &Tolerances) -> Result<Self> {
        if generators.is_empty() {
            return Err(Error::Invalid("a representation needs at least one generator".into()));
        }
        let tag = group.tag();
        let mut gens = Vec::with_capacity(generators.len());
        let mut inverses = Vec::with_capacity(generators.len());
        for g in generators {
            if g.tag().join(tag) != tag {
                return Err(Error::WrongScalar {
                    expected: tag,
                    found: g.tag(),
                });
            }
            let g = g.promote(tag);
            let residual = group.membership_residual(&g)?;
            if residual > tol.group {
                return Err(Error::NotAutomorphism { residual });
            }
            inverses.push(g.try_inverse()?);
            gens.push(g);
        }
        Ok(Self {
            group,
            generators: gens,
            inverses,
        })
    }

    pub fn group(&self) -> &Group {
        &self.group
    }

    pub fn generators(&self) -> &[MatK] {
        &self.generators
    }

    /// Number of free generators.
    pub fn rank_free(&self) -> usize {
        self.generators.len()
    }

    pub fn letter(&self, l: i16) -> &MatK {
        let i = l.unsigned_abs() as usize - 1;
        if l > 0 {
            &self.generators[i]
        } else {
            &self.inverses[i]
        }
    }

    /// Product of the letter matrices, left to right.
    pub fn evaluate(&self, w: &Word) -> Result<MatK> {
        if w.rank_used() > self.rank_free() {
            return Err(Error::IndexOutOfRange {
                index: w.rank_used(),
                max: self.rank_free(),
            });
        }
        let mut m = self.group.identity();
        for &l in w.letters() {
            m = m.matmul(self.letter(l));
        }
        Ok(m)
    }

    /// `h rho h^-1`.
    pub fn conjugate(&self, h: &MatK, tol: &Tolerances) -> Result<RepSpec> {
        let hi = h.try_inverse()?;
        let gens = self.generators.iter().map(|g| h.matmul(g).matmul(&hi)).collect();
        RepSpec::new(self.group.clone(), gens, tol)
    }

    /// `rho_L ⊕ rho_R` into `Aut(b ⊕ -b)`, or into `GL_{2N}` for linear
    /// groups.
    pub fn product(&self, right: &RepSpec, tol: &Tolerances) -> Result<RepSpec> {
        if self.rank_free() != right.rank_free() {
            return Err(Error::DimensionMismatch {
                expected: self.rank_free(),
                found: right.rank_free(),
            });
        }
        let group = match (&self.group, &right.group) {
            (Group::Aut(a), Group::Aut(b)) if a == b => Group::Aut(a.direct_sum_minus()),
            (Group::Gl { tag, n }, Group::Gl { tag: t2, n: n2 }) if tag == t2 && n == n2 => Group::gl(*tag, 2 * n),
            _ => return Err(Error::Invalid("product needs two representations into the same group".into())),
        };
        let gens = self.generators.iter().zip(&right.generators).map(|(a, b)| a.block_diag(b)).collect();
        RepSpec::new(group, gens, tol)
    }
}

/// Knobs for the finite-ball certificates.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AnosovConfig {
    /// Minimal fitted slope for a positive divergence verdict.
    pub s_min: f64,
    /// Required log-gap `log(sigma_d / sigma_{d+1})`.
    pub gap_min: f64,
    /// Largest power tried while looking for the gap.
    pub m_max: u64,
    /// Extra squarings after the gap is found, stopped early on convergence.
    pub refine_steps: u32,
    /// Projector distance under which two limit points are merged.
    pub dedup: f64,
    /// Isotropy defect that is still corrected by projection.
    pub projection_tol: f64,
    /// Largest number of words enumerated.
    pub word_cap: usize,
    /// Worker threads; `None` uses every core.
    pub workers: Option<usize>,
}

impl Default for AnosovConfig {
    fn default() -> Self {
        Self {
            s_min: 0.1,
            gap_min: 10f64.ln(),
            m_max: 1024,
            refine_steps: 8,
            dedup: 1e-5,
            projection_tol: 1e-6,
            word_cap: 1_000_000,
            workers: None,
        }
    }
}

/// Evaluates `f` on every nontrivial word of the ball, layer by layer, so
/// each matrix costs one product. Output follows word order.
pub fn scan_ball<U, F>(rep: &RepSpec, radius: usize, cfg: &AnosovConfig, f: F) -> Result<Vec<(Word, U)>>
where
    U: Send,
    F: Fn(&Word, &MatK) -> U + Sync + Send,
{
    let k = rep.rank_free();
    check_ball(k, radius, cfg.word_cap)?;
    let exec = Executor::new(cfg.workers);
    let mut out = Vec::new();
    let mut layer: Vec<(Word, MatK)> = vec![(Word::empty(), rep.group.identity())];
    for _ in 0..radius {
        let next: Vec<Vec<(Word, MatK)>> = exec.map(&layer, |(w, m)| {
            children(k, w)
                .into_iter()
                .map(|c| {
                    let l = *c.0.last().expect("child is nonempty");
                    let mc = m.matmul(rep.letter(l));
                    (c, mc)
                })
                .collect()
        });
        layer = next.into_iter().flatten().collect();
        let vals = exec.map(&layer, |(w, m)| f(w, m));
        out.extend(layer.iter().map(|(w, _)| w.clone()).zip(vals));
    }
    Ok(out)
}

/// Per-length minima of a simple root along `mu(rho(w))`.
#[derive(Clone, Debug, Serialize)]
pub struct DivergenceProfile {
    pub root_index: usize,
    pub radius: usize,
    /// `minima[l - 1]` is the minimum over words of length `l`.
    pub minima: Vec<f64>,
    pub witnesses: Vec<Word>,
    pub slope: f64,
    pub intercept: f64,
    pub strictly_increasing: bool,
    /// Nondecreasing from length 2 on.
    pub nondecreasing: bool,
    pub s_min: f64,
    /// Slope at least `s_min` and nondecreasing minima.
    pub verdict: bool,
}

/// Least-squares line through `(x_i, y_i)`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    if xs.len() < 2 {
        return (0.0, ys.first().copied().unwrap_or(0.0));
    }
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

pub fn divergence_profile(rep: &RepSpec, root_index: usize, radius: usize, cfg: &AnosovConfig) -> Result<DivergenceProfile> {
    if radius == 0 {
        return Err(Error::EmptyBall);
    }
    let rd = rep.group.root_data();
    rd.eval_root(root_index, &vec![0.0; rd.dim])?;
    let group = rep.group.clone();
    let values = scan_ball(rep, radius, cfg, |_, m| {
        let mu = cartan_mu_unchecked(m, &group);
        rd.eval_root(root_index, mu.values()).expect("index checked")
    })?;
    let mut minima = vec![f64::INFINITY; radius];
    let mut witnesses = vec![Word::empty(); radius];
    for (w, v) in values {
        let l = w.len() - 1;
        if v < minima[l] {
            minima[l] = v;
            witnesses[l] = w;
        }
    }
    let xs: Vec<f64> = (1..=radius).map(|l| l as f64).collect();
    let (slope, intercept) = linear_fit(&xs, &minima);
    let strictly_increasing = minima.windows(2).all(|p| p[1] > p[0]);
    let nondecreasing = minima.windows(2).skip(1).all(|p| p[1] >= p[0] - 1e-9);
    let verdict = radius >= 2 && slope >= cfg.s_min && nondecreasing;
    Ok(DivergenceProfile {
        root_index,
        radius,
        minima,
        witnesses,
        slope,
        intercept,
        strictly_increasing,
        nondecreasing,
        s_min: cfg.s_min,
        verdict,
    })
}

/// Largest ratio `omega(lambda(rho_R(w))) / omega(lambda(rho_L(w)))` over
/// conjugacy-class representatives.
#[derive(Clone, Debug, Serialize)]
pub struct DominationReport {
    pub weight_index: usize,
    pub radius: usize,
    pub c_hat: f64,
    pub witness: Option<Word>,
    /// Words whose denominator is below the positivity threshold.
    pub violations: Vec<Word>,
    pub classes_checked: usize,
    pub verdict: bool,
}

/// Nontrivial cyclically reduced words of length at most `radius`, one per
/// rotation class, in word order.
pub fn class_representatives(k: usize, radius: usize, cap: usize) -> Result<Vec<Word>> {
    Ok(word_ball(k, radius, cap)?
        .words
        .into_iter()
        .filter(Word::is_class_representative)
        .collect())
}

pub fn domination_constant(
    left: &RepSpec,
    right: &RepSpec,
    weight_index: usize,
    radius: usize,
    cfg: &AnosovConfig,
    tol: &Tolerances,
) -> Result<DominationReport> {
    if left.rank_free() != right.rank_free() {
        return Err(Error::DimensionMismatch {
            expected: left.rank_free(),
            found: right.rank_free(),
        });
    }
    let (rl, rr) = (left.group.root_data(), right.group.root_data());
    rl.eval_weight(weight_index, &vec![0.0; rl.dim])?;
    rr.eval_weight(weight_index, &vec![0.0; rr.dim])?;
    let classes = class_representatives(left.rank_free(), radius, cfg.word_cap)?;
    if classes.is_empty() {
        return Err(Error::EmptyBall);
    }
    let exec = Executor::new(cfg.workers);
    let pairs: Vec<Result<(f64, f64)>> = exec.map(&classes, |w| {
        let ll = lyapunov_lambda(&left.evaluate(w)?, &left.group)?;
        let lr = lyapunov_lambda(&right.evaluate(w)?, &right.group)?;
        Ok((rl.eval_weight(weight_index, ll.values())?, rr.eval_weight(weight_index, lr.values())?))
    });
    let mut c_hat = 0.0;
    let mut witness = None;
    let mut violations = Vec::new();
    for (w, p) in classes.iter().zip(pairs) {
        let (den, num) = p?;
        if den < tol.positive {
            violations.push(w.clone());
            continue;
        }
        let ratio = num / den;
        if witness.is_none() || ratio > c_hat {
            c_hat = ratio;
            witness = Some(w.clone());
        }
    }
    let verdict = violations.is_empty() && c_hat < 1.0;
    Ok(DominationReport {
        weight_index,
        radius,
        c_hat,
        witness,
        violations,
        classes_checked: classes.len(),
        verdict,
    })
}

/// Attracting subspace of a word.
#[derive(Clone, Debug)]
pub struct BoundaryPoint {
    pub word: Word,
    pub subspace: Subspace,
    /// `log(sigma_d / sigma_{d+1})` at the power where the gap was found.
    pub gap: f64,
    /// Power used for the final subspace.
    pub power: u64,
    /// Isotropy residual after any projection; `0` for linear groups.
    pub isotropy_residual: f64,
    pub projected: bool,
    /// Set when the subspace is not isotropic and could not be corrected.
    pub flagged: bool,
}

fn normalized_square(m: &MatK) -> MatK {
    let s = m.matmul(m);
    let a = s.max_abs();
    if a > 0.0 {
        s.scale(1.0 / a)
    } else {
        s
    }
}

fn dominant(m: &MatK, d: usize) -> Result<(Subspace, f64)> {
    let tag = m.tag();
    let dr = d * tag.dim_r();
    let (u, sv, _) = linalg::sorted_svd(&m.realify());
    let top = sv[dr - 1];
    let next = sv.get(dr).copied().unwrap_or(0.0);
    let gap = if next > 0.0 { (top / next).ln() } else { f64::INFINITY };
    let real = u.columns(0, dr).into_owned();
    let basis = linalg::pull_back(tag, &real)?;
    Ok((Subspace::from_orthonormal(basis), gap))
}

/// Subspace distance with a fast path for lines.
pub fn point_distance(a: &Subspace, b: &Subspace) -> f64 {
    if a.dim() == 1 && b.dim() == 1 && a.tag() == b.tag() {
        // |v - u <u, v>| is the sine of the angle, without cancellation.
        let (u, v) = (a.basis().column(0), b.basis().column(0));
        let c = k_dot(&u, &v);
        return v.iter().zip(&u).map(|(&vi, &ui)| (vi - ui * c).norm_sqr()).sum::<f64>().sqrt();
    }
    a.distance(b)
}

/// Pushes a nearly isotropic line onto the cone of a diagonal form by
/// rebalancing its positive and negative parts.
fn balance_line(v: &[Quaternion], diag: &[f64]) -> Option<Vec<Quaternion>> {
    let pos: f64 = v.iter().zip(diag).filter(|(_, &g)| g > 0.0).map(|(q, _)| q.norm_sqr()).sum();
    let neg: f64 = v.iter().zip(diag).filter(|(_, &g)| g < 0.0).map(|(q, _)| q.norm_sqr()).sum();
    if pos <= 0.0 || neg <= 0.0 {
        return None;
    }
    let (sp, sn) = ((0.5 / pos).sqrt(), (0.5 / neg).sqrt());
    Some(
        v.iter()
            .zip(diag)
            .map(|(q, &g)| if g > 0.0 { q.scale(sp) } else { q.scale(sn) })
            .collect(),
    )
}

fn diagonal_signs(g: &MatK) -> Option<Vec<f64>> {
    let n = g.rows();
    for r in 0..n {
        for c in 0..n {
            if r != c && g.get(r, c).norm() != 0.0 {
                return None;
            }
        }
    }
    Some((0..n).map(|i| g.get(i, i).w).collect())
}

/// The `d`-dimensional dominant singular subspace of `rho(w)^m`, with `m`
/// doubled until both the singular log-gap and `m` times the eigenvalue
/// log-gap reach `gap_min`, then refined by further
/// squaring. Meant for nontrivial cyclically reduced words; other words are
/// accepted.
pub fn boundary_point(rep: &RepSpec, word: &Word, d: usize, cfg: &AnosovConfig, tol: &Tolerances) -> Result<BoundaryPoint> {
    if word.is_empty() {
        return Err(Error::Invalid("boundary points need a nontrivial word".into()));
    }
    let n = rep.group.dim();
    if d == 0 || d >= n {
        return Err(Error::IndexOutOfRange { index: d, max: n.saturating_sub(1) });
    }
    let g = rep.evaluate(word)?;
    // Singular gaps of unipotent powers grow polynomially, so the gap must
    // also be carried by the eigenvalue moduli.
    let moduli = spectrum(&g)?;
    let eig_gap = if moduli[d] > 0.0 { (moduli[d - 1] / moduli[d]).ln() } else { f64::INFINITY };
    let a = g.max_abs();
    let mut m = g.scale(1.0 / a);
    let mut power: u64 = 1;
    let (mut sub, gap) = loop {
        let (s, gap) = dominant(&m, d)?;
        if gap >= cfg.gap_min && eig_gap * power as f64 >= cfg.gap_min {
            break (s, gap);
        }
        if power >= cfg.m_max {
            return Err(Error::NoGap { gap, power });
        }
        m = normalized_square(&m);
        power *= 2;
    };
    for _ in 0..cfg.refine_steps {
        m = normalized_square(&m);
        let (next, _) = dominant(&m, d)?;
        let moved = point_distance(&next, &sub);
        sub = next;
        power = power.saturating_mul(2);
        if moved < 1e-15 {
            break;
        }
    }
    let mut projected = false;
    let mut flagged = false;
    let mut residual = 0.0;
    if let Group::Aut(form) = &rep.group {
        residual = isotropy_residual(&sub, form)?;
        if residual > tol.rank {
            let signs = diagonal_signs(form.gram());
            let balanced = match (d, signs, residual <= cfg.projection_tol, form.kind()) {
                (1, Some(s), true, k) if k != FormKind::Symplectic && (form.is_sesquilinear() || form.tag() == ScalarTag::R) => {
                    balance_line(&sub.basis().column(0), &s)
                }
                _ => None,
            };
            match balanced {
                Some(v) => {
                    sub = Subspace::from_orthonormal(MatK::from_columns(form.tag(), n, &[v]));
                    residual = isotropy_residual(&sub, form)?;
                    projected = true;
                    flagged = residual > tol.rank;
                }
                None => flagged = true,
            }
        }
    }
    Ok(BoundaryPoint {
        word: word.clone(),
        subspace: sub,
        gap,
        power,
        isotropy_residual: residual,
        projected,
        flagged,
    })
}

/// Deduplicated attracting subspaces of the cyclically reduced words of a
/// ball.
#[derive(Clone, Debug)]
pub struct LimitSetSample {
    pub radius: usize,
    pub d: usize,
    pub dedup: f64,
    pub points: Vec<BoundaryPoint>,
    /// Words whose boundary point failed or was dropped, with the reason.
    pub warnings: Vec<String>,
    /// Divergence verdict of the representation at the same radius.
    pub divergence_consistent: bool,
}

impl LimitSetSample {
    pub fn subspaces(&self) -> Vec<Subspace> {
        self.points.iter().map(|p| p.subspace.clone()).collect()
    }

    /// Sample transported by a linear map.
    pub fn transport(&self, g: &MatK, tol: f64) -> Result<LimitSetSample> {
        let mut out = self.clone();
        for p in out.points.iter_mut() {
            p.subspace = p.subspace.map(g, tol)?;
        }
        Ok(out)
    }
}

pub fn limit_set(rep: &RepSpec, radius: usize, d: usize, cfg: &AnosovConfig, tol: &Tolerances) -> Result<LimitSetSample> {
    let mut warnings = Vec::new();
    let divergence_consistent = match divergence_profile(rep, 1, radius, cfg) {
        Ok(p) => p.verdict,
        Err(e) => {
            warnings.push(format!("divergence check unavailable: {e}"));
            false
        }
    };
    if !divergence_consistent {
        warnings.push(format!("representation is not divergence-consistent at radius {radius}"));
    }
    let words: Vec<Word> = word_ball(rep.rank_free(), radius, cfg.word_cap)?
        .words
        .into_iter()
        .filter(Word::is_cyclically_reduced)
        .collect();
    let exec = Executor::new(cfg.workers);
    let results = exec.map(&words, |w| boundary_point(rep, w, d, cfg, tol));
    let mut points: Vec<BoundaryPoint> = Vec::new();
    for (w, r) in words.iter().zip(results) {
        match r {
            Ok(p) if p.flagged => warnings.push(format!("{w}: not isotropic (residual {:.3e})", p.isotropy_residual)),
            Ok(p) => {
                if points.iter().all(|q| point_distance(&q.subspace, &p.subspace) >= cfg.dedup) {
                    points.push(p);
                }
            }
            Err(e) => warnings.push(format!("{w}: {e}")),
        }
    }
    Ok(LimitSetSample {
        radius,
        d,
        dedup: cfg.dedup,
        points,
        warnings,
        divergence_consistent,
    })
}

/// Smallest normalized pairing `|b(u, v)|` over pairs of sampled lines, on
/// up to `pairs` pseudo-random pairs. Transverse lines pair nontrivially.
pub fn transversality_spot_check(sample: &LimitSetSample, group: &Group, pairs: usize, seed: u64) -> Result<f64> {
    use rand::{Rng, SeedableRng};
    let Group::Aut(form) = group else {
        return Err(Error::Invalid("transversality is checked for form groups".into()));
    };
    let pts = &sample.points;
    if pts.len() < 2 {
        return Ok(f64::INFINITY);
    }
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut worst = f64::INFINITY;
    for _ in 0..pairs {
        let i = rng.gen_range(0..pts.len());
        let mut j = rng.gen_range(0..pts.len() - 1);
        if j >= i {
            j += 1;
        }
        let u = pts[i].subspace.basis().promote(form.tag());
        let v = pts[j].subspace.basis().promote(form.tag());
        let m = form.star(&u).matmul(form.gram()).matmul(&v);
        worst = worst.min(m.singular_values().last().copied().unwrap_or(0.0));
    }
    Ok(worst)
}

/// Standard representations used as test cases.
pub mod samples {
    use super::*;
    use crate::forms::FormSpec;

    fn sl2() -> Group {
        Group::Aut(FormSpec::symplectic(ScalarTag::R, 1).expect("sp(2)"))
    }

    /// `diag(e^s, e^-s)` and the boost with the same translation length
    /// along the perpendicular axis. Free and discrete for `s >= ln 3 / 2`.
    pub fn fuchsian_sl2(s: f64) -> RepSpec {
        let a = MatK::real_diagonal(ScalarTag::R, &[s.exp(), (-s).exp()]);
        let b = MatK::from_real(2, 2, &[s.cosh(), s.sinh(), s.sinh(), s.cosh()]);
        RepSpec::new(sl2(), vec![a, b], &Tolerances::default()).expect("valid generators")
    }

    /// The default Fuchsian group: `A = diag(3, 1/3)` and its perpendicular
    /// partner.
    pub fn fuchsian() -> RepSpec {
        fuchsian_sl2(3f64.ln())
    }

    /// The same group acting on `R^{2,1}` with Gram `diag(1, 1, -1)`:
    /// boosts of rapidity `t` in the `xz` and `yz` planes.
    pub fn fuchsian_o21(t: f64) -> RepSpec {
        let (c, s) = (t.cosh(), t.sinh());
        let a = MatK::from_real(3, 3, &[c, 0.0, s, 0.0, 1.0, 0.0, s, 0.0, c]);
        let b = MatK::from_real(3, 3, &[1.0, 0.0, 0.0, 0.0, c, s, 0.0, s, c]);
        let form = FormSpec::signature(ScalarTag::R, FormKind::Symmetric, 2, 1).expect("o(2,1)");
        RepSpec::new(Group::Aut(form), vec![a, b], &Tolerances::default()).expect("valid generators")
    }

    /// Cyclic group generated by `diag(e^s, e^-s)`.
    pub fn cyclic_sl2(s: f64) -> RepSpec {
        let a = MatK::real_diagonal(ScalarTag::R, &[s.exp(), (-s).exp()]);
        RepSpec::new(sl2(), vec![a], &Tolerances::default()).expect("valid generator")
    }

    /// Cyclic group generated by a rotation.
    pub fn elliptic_sl2(theta: f64) -> RepSpec {
        let (c, s) = (theta.cos(), theta.sin());
        let r = MatK::from_real(2, 2, &[c, -s, s, c]);
        RepSpec::new(sl2(), vec![r], &Tolerances::default()).expect("valid generator")
    }

    /// All generators sent to the identity.
    pub fn trivial(group: &Group, k: usize) -> RepSpec {
        RepSpec::new(group.clone(), vec![group.identity(); k], &Tolerances::default()).expect("identity")
    }

    /// Square root of a hyperbolic element of `SL_2(R)` with positive
    /// trace: `(g + I) / sqrt(tr g + 2)`.
    pub fn sqrt_sl2(g: &MatK) -> Result<MatK> {
        if g.rows() != 2 || g.cols() != 2 || g.tag() != ScalarTag::R {
            return Err(Error::Invalid("expected a real 2x2 matrix".into()));
        }
        let tr = g.get(0, 0).w + g.get(1, 1).w;
        if tr <= -2.0 {
            return Err(Error::Invalid("no real square root with positive trace".into()));
        }
        Ok(g.add(&MatK::identity(ScalarTag::R, 2)).scale(1.0 / (tr + 2.0).sqrt()))
    }

    /// Generators replaced by their square roots, then conjugated by `h`.
    pub fn half_speed(rep: &RepSpec, h: &MatK) -> Result<RepSpec> {
        let tol = Tolerances::default();
        let gens = rep.generators().iter().map(sqrt_sl2).collect::<Result<Vec<_>>>()?;
        RepSpec::new(rep.group().clone(), gens, &tol)?.conjugate(h, &tol)
    }

    /// A fixed rotation used to conjugate the half-speed representation.
    pub fn rotation(theta: f64) -> MatK {
        let (c, s) = (theta.cos(), theta.sin());
        MatK::from_real(2, 2, &[c, -s, s, c])
    }
}
