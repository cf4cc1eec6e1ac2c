//! Ground-truth distance oracles `dist(f, F_k(H))` under Uniform(0,1).
//!
//! [`dist_step_to_piecewise_const`] is exact for step functions;
//! [`dist_grid_general`] discretizes any target on a uniform grid and is
//! tagged accordingly in its certificate.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::class::{BaseClass, Member, ValuePoint};
use crate::error::{invalid, Error, Result};
use crate::piecewise::{PiecewiseFunction, Target};

/// A piecewise-constant function on `[0, 1]` with breakpoints in `(0, 1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepFunction {
    breakpoints: Vec<f64>,
    values: Vec<f64>,
}

impl StepFunction {
    pub fn new(breakpoints: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if values.len() != breakpoints.len() + 1 {
            return Err(invalid("values count must be breakpoints count + 1"));
        }
        if breakpoints.iter().any(|&t| !(t > 0.0 && t < 1.0)) {
            return Err(invalid("breakpoints must lie in (0, 1)"));
        }
        if breakpoints.windows(2).any(|w| w[0] >= w[1]) {
            return Err(invalid("breakpoints must be strictly increasing"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(invalid("values must be finite"));
        }
        Ok(Self { breakpoints, values })
    }

    /// `n` equal-width pieces with the given values.
    pub fn equal_pieces(values: Vec<f64>) -> Result<Self> {
        let n = values.len();
        let breakpoints = (1..n).map(|i| i as f64 / n as f64).collect();
        Self::new(breakpoints, values)
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn pieces(&self) -> usize {
        self.values.len()
    }

    /// Lebesgue mass of each piece.
    pub fn masses(&self) -> Vec<f64> {
        let mut edges = Vec::with_capacity(self.values.len() + 1);
        edges.push(0.0);
        edges.extend_from_slice(&self.breakpoints);
        edges.push(1.0);
        edges.windows(2).map(|w| w[1] - w[0]).collect()
    }

    /// Merges adjacent pieces with equal values.
    pub fn normalized(&self) -> Self {
        let mut breakpoints = Vec::new();
        let mut values = vec![self.values[0]];
        for (i, &v) in self.values.iter().enumerate().skip(1) {
            if v != *values.last().unwrap() {
                breakpoints.push(self.breakpoints[i - 1]);
                values.push(v);
            }
        }
        Self { breakpoints, values }
    }

    pub fn to_piecewise(&self) -> PiecewiseFunction {
        PiecewiseFunction::new(
            self.breakpoints.clone(),
            self.values.iter().map(|&v| Member::Constant(v)).collect(),
        )
        .expect("step functions are well-formed piecewise functions")
    }

    #[inline]
    pub fn evaluate(&self, x: f64) -> f64 {
        self.values[self.breakpoints.partition_point(|&t| t < x)]
    }
}

impl Target for StepFunction {
    fn value(&self, x: f64) -> f64 {
        self.evaluate(x)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DistanceMethod {
    DpExact,
    GridApprox,
    Exhaustive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceCertificate {
    pub instance_id: String,
    pub k: usize,
    pub distance: f64,
    pub method: DistanceMethod,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid_size: Option<usize>,
}

pub const DEFAULT_GRID_SIZE: usize = 4096;

/// Assigns dense label ids to values by exact equality.
fn label_ids(values: &[f64]) -> (Vec<usize>, usize) {
    let mut ids = HashMap::new();
    let labels = values
        .iter()
        .map(|v| {
            let next = ids.len();
            *ids.entry(v.to_bits()).or_insert(next)
        })
        .collect();
    (labels, ids.len())
}

/// Minimum weighted mismatch over labelings of a sequence with at most `k`
/// runs. `dp[c][a]` is the best cost with `c + 1` runs so far, the current
/// run labeled `a`; the run label only ever needs to be one of the sequence's
/// own labels.
fn min_mismatch_runs(labels: &[usize], alphabet: usize, weights: &[f64], k: usize) -> f64 {
    if labels.is_empty() {
        return 0.0;
    }
    let inf = f64::INFINITY;
    let mut dp = vec![vec![inf; alphabet]; k];
    for a in 0..alphabet {
        dp[0][a] = if labels[0] == a { 0.0 } else { weights[0] };
    }
    let mut best_prev = vec![inf; k];
    for (j, &label) in labels.iter().enumerate().skip(1) {
        for (c, row) in dp.iter().enumerate() {
            best_prev[c] = row.iter().copied().fold(inf, f64::min);
        }
        for c in (0..k).rev() {
            for a in 0..alphabet {
                let stay = dp[c][a];
                let switch = if c > 0 { best_prev[c - 1] } else { inf };
                let cost = if label == a { 0.0 } else { weights[j] };
                dp[c][a] = stay.min(switch) + cost;
            }
        }
    }
    dp.iter().flatten().copied().fold(inf, f64::min)
}

/// Exact `dist(f, F_k(constants))` for a step function.
///
/// An optimal approximant can place its boundaries on `f`'s breakpoints, so
/// the problem reduces to labeling `f`'s pieces with at most `k` runs while
/// minimizing mismatched mass.
pub fn dist_step_to_piecewise_const(f: &StepFunction, k: usize) -> Result<f64> {
    if k == 0 {
        return Err(invalid("k must be positive"));
    }
    let (labels, alphabet) = label_ids(f.values());
    Ok(min_mismatch_runs(&labels, alphabet, &f.masses(), k))
}

/// Brute-force counterpart of [`dist_step_to_piecewise_const`]: tries every
/// grouping of `f`'s pieces into at most `k` consecutive segments and every
/// value present in each segment as its label. Mismatched masses are summed
/// in piece order, the same order the dynamic program uses, so the two agree
/// bit for bit. Exponential; for small `f` only.
pub fn dist_step_exhaustive(f: &StepFunction, k: usize) -> Result<f64> {
    if k == 0 {
        return Err(invalid("k must be positive"));
    }
    let n = f.pieces();
    if n > 24 {
        return Err(invalid("exhaustive search limited to 24 pieces"));
    }
    let masses = f.masses();
    let values = f.values();
    // Running mismatch after labeling pieces a..b, starting from `running`.
    // Floating-point addition is monotone, so keeping the smallest running
    // sum at every segment end is optimal for a fixed segmentation.
    let extend = |running: f64, a: usize, b: usize| {
        values[a..b]
            .iter()
            .map(|&label| {
                (a..b).fold(running, |acc, i| if values[i] == label { acc } else { acc + masses[i] })
            })
            .fold(f64::INFINITY, f64::min)
    };
    let mut best = f64::INFINITY;
    // Bit i of `cuts` set: a segment boundary after piece i.
    for cuts in 0u32..(1 << (n - 1)) {
        if cuts.count_ones() as usize + 1 > k {
            continue;
        }
        let mut cost = 0.0;
        let mut begin = 0;
        for i in 0..n {
            if i == n - 1 || cuts & (1 << i) != 0 {
                cost = extend(cost, begin, i + 1);
                begin = i + 1;
            }
        }
        best = best.min(cost);
    }
    Ok(best)
}

pub fn certify_step(instance_id: impl Into<String>, f: &StepFunction, k: usize) -> Result<DistanceCertificate> {
    Ok(DistanceCertificate {
        instance_id: instance_id.into(),
        k,
        distance: dist_step_to_piecewise_const(f, k)?,
        method: DistanceMethod::DpExact,
        grid_size: None,
    })
}

/// Grid estimate of `dist(f, F_k(H))`.
///
/// Evaluates `f` at the midpoints `(g + 1/2)/N` of a uniform grid and returns
/// the smallest fraction of grid points at which every member of `F_k(H)`
/// must disagree with `f`, minimizing over all breakpoint placements between
/// grid points. Constants use the run-labeling program; other classes use a
/// segment program whose costs come from [`BaseClass::max_agreement`], which
/// is polynomial in the segment length with exponent growing in the degree,
/// so keep the grid small there.
pub fn dist_grid_general(
    f: &dyn Target,
    class: &dyn BaseClass,
    k: usize,
    grid_size: usize,
) -> Result<f64> {
    if k == 0 {
        return Err(invalid("k must be positive"));
    }
    if grid_size < 4 * k {
        return Err(Error::InfeasibleGrid(format!(
            "grid of {grid_size} points is too coarse for k = {k} (need at least {})",
            4 * k
        )));
    }
    let n = grid_size;
    let points: Vec<ValuePoint> = (0..n)
        .map(|g| {
            let x = (g as f64 + 0.5) / n as f64;
            ValuePoint::new(x, f.value(x))
        })
        .collect();
    if let Some(p) = points.iter().find(|p| !p.y.is_finite()) {
        return Err(Error::NonFinite(p.y));
    }

    let mismatches = if class.indicator_suffices() {
        let tol = class.tolerance();
        // Cluster values within tolerance, in sorted order.
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| points[a].y.total_cmp(&points[b].y));
        let mut labels = vec![0usize; n];
        let mut alphabet = 0;
        let mut lead = f64::NAN;
        for &i in &order {
            if alphabet == 0 || !tol.agree(lead, points[i].y) {
                alphabet += 1;
                lead = points[i].y;
            }
            labels[i] = alphabet - 1;
        }
        min_mismatch_runs(&labels, alphabet, &vec![1.0; n], k).round() as usize
    } else if k == 1 {
        n - class.max_agreement(&points)
    } else {
        segment_program(&points, class, k)
    };
    Ok(mismatches as f64 / n as f64)
}

fn segment_program(points: &[ValuePoint], class: &dyn BaseClass, k: usize) -> usize {
    let n = points.len();
    let mut cost = vec![vec![0usize; n + 1]; n + 1];
    for begin in 0..n {
        for end in begin + 1..=n {
            let seg = &points[begin..end];
            cost[begin][end] = seg.len() - class.max_agreement(seg);
        }
    }
    let mut best = vec![usize::MAX; n + 1];
    best[0] = 0;
    for _ in 0..k {
        let mut next = best.clone();
        for end in 1..=n {
            for begin in 0..end {
                if best[begin] != usize::MAX {
                    next[end] = next[end].min(best[begin] + cost[begin][end]);
                }
            }
        }
        best = next;
    }
    best[n]
}

pub fn certify_grid(
    instance_id: impl Into<String>,
    f: &dyn Target,
    class: &dyn BaseClass,
    k: usize,
    grid_size: usize,
) -> Result<DistanceCertificate> {
    Ok(DistanceCertificate {
        instance_id: instance_id.into(),
        k,
        distance: dist_grid_general(f, class, k, grid_size)?,
        method: DistanceMethod::GridApprox,
        grid_size: Some(grid_size),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::class::Class;

    fn alternating(n: usize) -> StepFunction {
        StepFunction::equal_pieces((0..n).map(|i| (i % 2) as f64).collect()).unwrap()
    }

    #[test]
    fn quarters_alternating() {
        assert_eq!(dist_step_to_piecewise_const(&alternating(4), 2).unwrap(), 0.25);
    }

    #[test]
    fn enough_pieces_means_zero() {
        let f = alternating(7);
        for k in 7..10 {
            assert_eq!(dist_step_to_piecewise_const(&f, k).unwrap(), 0.0);
        }
    }

    #[test]
    fn alternating_family_two_pieces() {
        // (N - 1) / (2N) on 2N alternating pieces.
        for big_n in 1..=6usize {
            let d = dist_step_to_piecewise_const(&alternating(2 * big_n), 2).unwrap();
            let want = (big_n as f64 - 1.0) / (2.0 * big_n as f64);
            assert!((d - want).abs() < 1e-12, "N = {big_n}: {d} vs {want}");
        }
    }

    #[test]
    fn dp_matches_exhaustive_on_small_steps() {
        let f = StepFunction::new(vec![0.1, 0.35, 0.4, 0.8], vec![2.0, 0.0, 2.0, 1.0, 2.0]).unwrap();
        for k in 1..=5 {
            let a = dist_step_to_piecewise_const(&f, k).unwrap();
            let b = dist_step_exhaustive(&f, k).unwrap();
            assert!((a - b).abs() < 1e-12, "k = {k}: {a} vs {b}");
        }
    }

    #[test]
    fn normalization_merges_runs() {
        let f = StepFunction::new(vec![0.2, 0.5, 0.7], vec![1.0, 1.0, 0.0, 0.0]).unwrap();
        let g = f.normalized();
        assert_eq!(g.breakpoints(), &[0.5]);
        assert_eq!(g.values(), &[1.0, 0.0]);
        assert_eq!(dist_step_to_piecewise_const(&f, 2).unwrap(), 0.0);
    }

    #[test]
    fn grid_needs_resolution() {
        let f = alternating(4);
        assert!(matches!(
            dist_grid_general(&f, &Class::constants(), 3, 11),
            Err(Error::InfeasibleGrid(_))
        ));
    }

    #[test]
    fn grid_matches_dp_on_dyadic_steps() {
        let f = StepFunction::equal_pieces(vec![0.0, 1.0, 1.0, 2.0, 0.0, 1.0, 0.0, 2.0]).unwrap();
        for k in 1..=4 {
            let exact = dist_step_to_piecewise_const(&f, k).unwrap();
            let grid = dist_grid_general(&f, &Class::constants(), k, 512).unwrap();
            assert_eq!(exact, grid, "k = {k}");
        }
    }

    #[test]
    fn grid_polynomial_membership_is_zero() {
        let f = PiecewiseFunction::new(
            vec![0.4],
            vec![Member::Polynomial(vec![0.1, 0.7]), Member::Polynomial(vec![-0.3, 0.2])],
        )
        .unwrap();
        assert_eq!(dist_grid_general(&f, &Class::polynomials(1), 2, 32).unwrap(), 0.0);
        assert!(dist_grid_general(&f, &Class::polynomials(1), 1, 32).unwrap() > 0.3);
    }
}
