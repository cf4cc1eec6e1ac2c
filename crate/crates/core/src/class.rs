//! Base classes `H`: the per-piece hypothesis families.
//!
//! Every class in this module has the zero-measure crossings property: two
//! distinct members agree only on a null set. [`check_zero_measure_crossings`]
//! probes that property statistically for any [`BaseClass`] implementation.

use std::f64::consts::{PI, TAU};

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interp::{horner, NewtonPoly};

/// Equality predicate on the value space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self { abs: 1e-9, rel: 1e-9 }
    }
}

impl Tolerance {
    pub const EXACT: Self = Self { abs: 0.0, rel: 0.0 };

    #[inline]
    pub fn agree(&self, a: f64, b: f64) -> bool {
        (a - b).abs() <= self.abs + self.rel * a.abs().max(b.abs())
    }
}

/// A labeled observation `(x, f(x))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValuePoint {
    pub x: f64,
    pub y: f64,
}

impl ValuePoint {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    /// Constructs a point on the unit interval, rejecting anything else.
    pub fn checked(x: f64, y: f64) -> Result<Self> {
        if !x.is_finite() {
            return Err(Error::NonFinite(x));
        }
        if !y.is_finite() {
            return Err(Error::NonFinite(y));
        }
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::InvalidParameter(format!("x = {x} outside [0, 1]")));
        }
        Ok(Self { x, y })
    }

    fn ensure_finite(&self) -> Result<()> {
        if !self.x.is_finite() {
            return Err(Error::NonFinite(self.x));
        }
        if !self.y.is_finite() {
            return Err(Error::NonFinite(self.y));
        }
        Ok(())
    }
}

/// Descriptor of a single base-class member.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Member {
    Constant(f64),
    /// Monomial coefficients, constant term first.
    Polynomial(Vec<f64>),
    /// `x -> sin(x + shift)`.
    ShiftedSine(f64),
}

impl Member {
    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Self::Constant(v) => *v,
            Self::Polynomial(c) => horner(c, x),
            Self::ShiftedSine(t) => (x + t).sin(),
        }
    }
}

/// Result of an anchored disagreement minimization.
#[derive(Debug, Clone, PartialEq)]
pub struct AnchoredFit {
    /// Minimum number of disagreeing probes; `probes + 1` when no member
    /// passes through the anchor.
    pub disagreements: usize,
    pub witness: Option<Member>,
}

impl AnchoredFit {
    fn empty(probes: usize) -> Self {
        Self { disagreements: probes + 1, witness: None }
    }

    /// Disagreement rate, or 1 when the anchored subclass is empty.
    pub fn rate(&self, probes: usize) -> f64 {
        match self.witness {
            Some(_) if probes > 0 => self.disagreements as f64 / probes as f64,
            Some(_) => 0.0,
            None => 1.0,
        }
    }
}

/// A hypothesis family usable as the per-piece class of `F_k(H)`.
pub trait BaseClass: Send + Sync {
    /// VC dimension of the member graphs `{(x, h(x))}`.
    fn graph_dimension(&self) -> usize;

    fn tolerance(&self) -> Tolerance;

    fn random_member(&self, rng: &mut dyn RngCore) -> Member;

    /// Minimum, over members `h` with `h(anchor.x) = anchor.y`, of the number
    /// of probes `h` disagrees with.
    fn min_disagreements_anchored(
        &self,
        anchor: ValuePoint,
        probes: &[ValuePoint],
    ) -> Result<AnchoredFit>;

    /// Some member agreeing with every point, if one exists.
    fn fit_all(&self, points: &[ValuePoint]) -> Option<Member>;

    /// Largest number of points a single member agrees with.
    fn max_agreement(&self, points: &[ValuePoint]) -> usize;

    /// Whether the instantaneous noise sensitivity reduces to the plain
    /// indicator `1[f(x') != f(x)]`, so one probe per anchor suffices.
    fn indicator_suffices(&self) -> bool {
        false
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum ClassKind {
    Constants,
    Polynomials { degree: usize },
    ShiftedSine,
}

/// The shipped base classes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Class {
    pub kind: ClassKind,
    #[serde(default)]
    pub tolerance: Tolerance,
}

/// Symbols used for random constant members.
pub const CONSTANT_ALPHABET: usize = 4;

impl Class {
    pub fn constants() -> Self {
        Self { kind: ClassKind::Constants, tolerance: Tolerance::default() }
    }

    pub fn polynomials(degree: usize) -> Self {
        Self { kind: ClassKind::Polynomials { degree }, tolerance: Tolerance::default() }
    }

    pub fn shifted_sine() -> Self {
        Self { kind: ClassKind::ShiftedSine, tolerance: Tolerance::default() }
    }

    pub fn with_tolerance(mut self, tolerance: Tolerance) -> Self {
        self.tolerance = tolerance;
        self
    }

    fn count_disagreements(&self, member: &Member, probes: &[ValuePoint]) -> usize {
        probes.iter().filter(|p| !self.tolerance.agree(member.eval(p.x), p.y)).count()
    }

    /// The (up to) two shifts `t` with `sin(x + t) = y`.
    fn sine_shifts(&self, anchor: ValuePoint) -> Option<[f64; 2]> {
        if anchor.y.abs() > 1.0 + self.tolerance.abs {
            return None;
        }
        let a = anchor.y.clamp(-1.0, 1.0).asin();
        Some([(a - anchor.x).rem_euclid(TAU), (PI - a - anchor.x).rem_euclid(TAU)])
    }
}

impl BaseClass for Class {
    fn graph_dimension(&self) -> usize {
        match self.kind {
            ClassKind::Constants => 1,
            ClassKind::Polynomials { degree } => degree + 1,
            ClassKind::ShiftedSine => 1,
        }
    }

    fn tolerance(&self) -> Tolerance {
        self.tolerance
    }

    fn random_member(&self, rng: &mut dyn RngCore) -> Member {
        match self.kind {
            ClassKind::Constants => {
                Member::Constant(rng.random_range(0..CONSTANT_ALPHABET) as f64)
            }
            ClassKind::Polynomials { degree } => {
                Member::Polynomial((0..=degree).map(|_| rng.random_range(-1.0..1.0)).collect())
            }
            ClassKind::ShiftedSine => Member::ShiftedSine(rng.random_range(0.0..TAU)),
        }
    }

    fn min_disagreements_anchored(
        &self,
        anchor: ValuePoint,
        probes: &[ValuePoint],
    ) -> Result<AnchoredFit> {
        anchor.ensure_finite()?;
        for p in probes {
            p.ensure_finite()?;
        }
        match self.kind {
            ClassKind::Constants => {
                let witness = Member::Constant(anchor.y);
                Ok(AnchoredFit {
                    disagreements: self.count_disagreements(&witness, probes),
                    witness: Some(witness),
                })
            }
            ClassKind::Polynomials { degree } => {
                Ok(anchored_polynomial(degree, self.tolerance, anchor, probes))
            }
            ClassKind::ShiftedSine => {
                let Some(shifts) = self.sine_shifts(anchor) else {
                    return Ok(AnchoredFit::empty(probes.len()));
                };
                let fits = shifts.map(|t| {
                    let m = Member::ShiftedSine(t);
                    (self.count_disagreements(&m, probes), m)
                });
                let [(c0, m0), (c1, m1)] = fits;
                let (disagreements, witness) = if c1 < c0 { (c1, m1) } else { (c0, m0) };
                Ok(AnchoredFit { disagreements, witness: Some(witness) })
            }
        }
    }

    fn fit_all(&self, points: &[ValuePoint]) -> Option<Member> {
        let Some(first) = points.first() else {
            return Some(match self.kind {
                ClassKind::Constants => Member::Constant(0.0),
                ClassKind::Polynomials { degree } => Member::Polynomial(vec![0.0; degree + 1]),
                ClassKind::ShiftedSine => Member::ShiftedSine(0.0),
            });
        };
        let consistent = |m: &Member| points.iter().all(|p| self.tolerance.agree(m.eval(p.x), p.y));
        match self.kind {
            ClassKind::Constants => Some(Member::Constant(first.y)).filter(consistent),
            ClassKind::Polynomials { degree } => {
                let head = &points[..points.len().min(degree + 1)];
                let xs: Vec<f64> = head.iter().map(|p| p.x).collect();
                let ys: Vec<f64> = head.iter().map(|p| p.y).collect();
                let newton = NewtonPoly::fit(&xs, &ys).ok()?;
                if !points[head.len()..]
                    .iter()
                    .all(|p| self.tolerance.agree(newton.eval(p.x), p.y))
                {
                    return None;
                }
                let mut coeffs = newton.to_monomial();
                coeffs.resize(degree + 1, 0.0);
                Some(Member::Polynomial(coeffs))
            }
            ClassKind::ShiftedSine => self
                .sine_shifts(*first)?
                .into_iter()
                .map(Member::ShiftedSine)
                .find(consistent),
        }
    }

    fn max_agreement(&self, points: &[ValuePoint]) -> usize {
        let n = points.len();
        match self.kind {
            ClassKind::Constants => (0..n)
                .map(|i| points.iter().filter(|p| self.tolerance.agree(points[i].y, p.y)).count())
                .max()
                .unwrap_or(0),
            ClassKind::Polynomials { degree } => {
                if n <= degree + 1 {
                    return n;
                }
                // Every optimum passes through at least degree + 1 of the points;
                // anchor on the first of them and search the rest.
                (0..n)
                    .map(|i| {
                        let fit = anchored_polynomial(
                            degree,
                            self.tolerance,
                            points[i],
                            &points[i + 1..],
                        );
                        1 + (n - i - 1) - fit.disagreements
                    })
                    .max()
                    .unwrap_or(0)
            }
            ClassKind::ShiftedSine => points
                .iter()
                .filter_map(|&p| self.sine_shifts(p))
                .flatten()
                .map(|t| n - self.count_disagreements(&Member::ShiftedSine(t), points))
                .max()
                .unwrap_or(0),
        }
    }

    fn indicator_suffices(&self) -> bool {
        self.kind == ClassKind::Constants
    }
}

/// Exact anchored minimization for degree-`degree` polynomials.
///
/// Enumerates every `degree`-subset of probes in lexicographic order, fits the
/// interpolant through the anchor and the subset, and counts disagreements.
/// An optimum agrees with at least `degree` probes whenever that many exist,
/// so the enumeration covers it. Ties keep the lexicographically first subset.
///
/// Two shortcuts leave the result unchanged: a candidate stops counting once
/// it is worse than the incumbent, and a subset whose members all lie on one
/// earlier candidate is skipped because it interpolates that same polynomial.
fn anchored_polynomial(
    degree: usize,
    tol: Tolerance,
    anchor: ValuePoint,
    probes: &[ValuePoint],
) -> AnchoredFit {
    let n = probes.len();
    let mut xs = Vec::with_capacity(degree + 1);
    let mut ys = Vec::with_capacity(degree + 1);
    let mut newton = NewtonPoly::default();

    let witness_for = |subset: &[usize], newton: &mut NewtonPoly| -> Option<Member> {
        let mut xs = vec![anchor.x];
        let mut ys = vec![anchor.y];
        for &j in subset {
            xs.push(probes[j].x);
            ys.push(probes[j].y);
        }
        newton.refit(&xs, &ys).ok()?;
        let mut coeffs = newton.to_monomial();
        coeffs.resize(degree + 1, 0.0);
        Some(Member::Polynomial(coeffs))
    };

    let size = degree.min(n);
    let mut best: Option<(usize, Vec<usize>)> = None;
    // cover[j] = id of the first candidate probe j was seen to agree with.
    let mut cover: Vec<usize> = vec![usize::MAX; n];
    let mut subset: Vec<usize> = (0..size).collect();
    let mut candidate_id = 0usize;

    loop {
        let shared_cover = size > 0
            && cover[subset[0]] != usize::MAX
            && subset.iter().all(|&j| cover[j] == cover[subset[0]]);
        if !shared_cover {
            xs.clear();
            ys.clear();
            xs.push(anchor.x);
            ys.push(anchor.y);
            for &j in &subset {
                xs.push(probes[j].x);
                ys.push(probes[j].y);
            }
            if newton.refit(&xs, &ys).is_ok() {
                let limit = best.as_ref().map_or(usize::MAX, |b| b.0);
                let mut count = 0usize;
                let mut complete = true;
                for (j, p) in probes.iter().enumerate() {
                    if tol.agree(newton.eval(p.x), p.y) {
                        if cover[j] == usize::MAX {
                            cover[j] = candidate_id;
                        }
                    } else {
                        count += 1;
                        if count > limit {
                            complete = false;
                            break;
                        }
                    }
                }
                candidate_id += 1;
                if complete && count < limit {
                    best = Some((count, subset.clone()));
                    if count == 0 {
                        break;
                    }
                }
            }
        }
        if !next_combination(&mut subset, n) {
            break;
        }
    }

    match best {
        Some((disagreements, subset)) => AnchoredFit {
            disagreements,
            witness: witness_for(&subset, &mut newton),
        },
        // Every subset was degenerate (repeated abscissae); the constant
        // through the anchor is still a member of the anchored subclass.
        None => {
            let witness = Member::Polynomial({
                let mut c = vec![0.0; degree + 1];
                c[0] = anchor.y;
                c
            });
            let disagreements =
                probes.iter().filter(|p| !tol.agree(witness.eval(p.x), p.y)).count();
            AnchoredFit { disagreements, witness: Some(witness) }
        }
    }
}

/// Advances `idx` to the next `idx.len()`-subset of `0..n` in lexicographic
/// order. Returns false when exhausted.
pub(crate) fn next_combination(idx: &mut [usize], n: usize) -> bool {
    let r = idx.len();
    if r == 0 {
        return false;
    }
    let mut i = r;
    while i > 0 {
        i -= 1;
        if idx[i] < n - r + i {
            idx[i] += 1;
            for j in i + 1..r {
                idx[j] = idx[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Outcome of [`check_zero_measure_crossings`].
#[derive(Debug, Clone, PartialEq)]
pub struct CrossingReport {
    pub passed: bool,
    pub trials: usize,
    /// Largest agreement fraction seen over all member pairs.
    pub worst_fraction: f64,
    pub max_fraction: f64,
}

pub const DEFAULT_CROSSING_FRACTION: f64 = 0.01;

/// Statistical sanity check of the zero-measure crossings property: random
/// pairs of distinct members must agree on at most `max_fraction` of a random
/// grid. Not a proof.
pub fn check_zero_measure_crossings(
    class: &dyn BaseClass,
    trials: usize,
    grid_size: usize,
    seed: u64,
    max_fraction: f64,
) -> Result<CrossingReport> {
    if trials == 0 || grid_size == 0 {
        return Err(Error::InvalidParameter("trials and grid_size must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tol = class.tolerance();
    let mut worst = 0.0f64;
    let mut performed = 0;
    for _ in 0..trials {
        let a = class.random_member(&mut rng);
        // Bounded redraw; a class that keeps returning one descriptor has
        // no distinct pairs to check.
        let Some(b) = (0..64).map(|_| class.random_member(&mut rng)).find(|b| *b != a) else {
            continue;
        };
        performed += 1;
        let agreements = (0..grid_size)
            .filter(|_| {
                let x: f64 = rng.random();
                tol.agree(a.eval(x), b.eval(x))
            })
            .count();
        worst = worst.max(agreements as f64 / grid_size as f64);
    }
    Ok(CrossingReport {
        passed: worst <= max_fraction,
        trials: performed,
        worst_fraction: worst,
        max_fraction,
    })
}
