//! Noise sensitivity: Monte-Carlo ground truth and the two empirical
//! estimators the testers threshold.
//!
//! `NS_delta(f; H)` averages, over a uniform anchor `x`, the smallest
//! probability that a member of `H` passing through `(x, f(x))` disagrees
//! with `f` at a neighbor `x' ~ Uniform(x - delta, x + delta)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::class::{BaseClass, Tolerance, ValuePoint};
use crate::error::{invalid, Result};
use crate::oracle::TargetOracle;
use crate::piecewise::Target;
use crate::report::FailureEvent;
use crate::testers::params::{ActiveParams, ConstantParams, Mode};

/// Inner probes per anchor used by [`ns_true_mc`] for classes where the
/// indicator shortcut does not apply.
pub const DEFAULT_INNER_PROBES: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NsEstimate {
    pub value: f64,
    pub std_error: f64,
    /// Anchors (or pairs) that contributed to `value`.
    pub used: usize,
}

impl NsEstimate {
    fn from_values(values: &[f64]) -> Self {
        let n = values.len();
        if n == 0 {
            return Self { value: 0.0, std_error: 0.0, used: 0 };
        }
        let mean = values.iter().sum::<f64>() / n as f64;
        let std_error = if n > 1 {
            let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
            (var / n as f64).sqrt()
        } else {
            0.0
        };
        Self { value: mean, std_error, used: n }
    }

    fn scaled(self, factor: f64) -> Self {
        Self { value: self.value * factor, std_error: self.std_error * factor, used: self.used }
    }
}

/// Monte-Carlo estimate of `NS_delta(f; H)` with [`DEFAULT_INNER_PROBES`].
pub fn ns_true_mc(
    f: &dyn Target,
    class: &dyn BaseClass,
    delta: f64,
    pairs: usize,
    seed: u64,
) -> Result<NsEstimate> {
    ns_true_mc_with(f, class, delta, pairs, seed, DEFAULT_INNER_PROBES)
}

/// Monte-Carlo estimate of `NS_delta(f; H)`.
///
/// Each of `pairs` anchors `x ~ Uniform(0,1)` gets `inner_probes` neighbors
/// from the unclipped window `(x - delta, x + delta)`; the instantaneous
/// sensitivity is estimated by the anchored disagreement minimum. When the
/// class reduces to the plain indicator, a single neighbor is used.
pub fn ns_true_mc_with(
    f: &dyn Target,
    class: &dyn BaseClass,
    delta: f64,
    pairs: usize,
    seed: u64,
    inner_probes: usize,
) -> Result<NsEstimate> {
    if pairs == 0 || inner_probes == 0 {
        return Err(invalid("pairs and inner_probes must be positive"));
    }
    if !(delta > 0.0) {
        return Err(invalid(format!("delta = {delta} must be positive")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tol = class.tolerance();
    let mut values = Vec::with_capacity(pairs);
    let mut probes = Vec::with_capacity(inner_probes);
    for _ in 0..pairs {
        let x: f64 = rng.random();
        let y = f.value(x);
        if class.indicator_suffices() {
            let xn = x + delta * (2.0 * rng.random::<f64>() - 1.0);
            values.push(if tol.agree(f.value(xn), y) { 0.0 } else { 1.0 });
        } else {
            probes.clear();
            for _ in 0..inner_probes {
                let xn = x + delta * (2.0 * rng.random::<f64>() - 1.0);
                probes.push(ValuePoint::new(xn, f.value(xn)));
            }
            let fit = class.min_disagreements_anchored(ValuePoint::new(x, y), &probes)?;
            values.push(fit.rate(inner_probes));
        }
    }
    Ok(NsEstimate::from_values(&values))
}

/// Pool indices bucketed by value, each bucket in increasing index order.
struct BucketedPool {
    width: f64,
    offsets: Vec<usize>,
    indices: Vec<u32>,
}

impl BucketedPool {
    fn new(points: &[f64], pool_start: usize, width: f64) -> Self {
        let buckets = (1.0 / width).ceil() as usize + 1;
        let bucket_of = |x: f64| ((x / width) as usize).min(buckets - 1);
        let mut offsets = vec![0usize; buckets + 1];
        for &x in &points[pool_start..] {
            offsets[bucket_of(x) + 1] += 1;
        }
        for b in 0..buckets {
            offsets[b + 1] += offsets[b];
        }
        let mut fill = offsets.clone();
        let mut indices = vec![0u32; points.len() - pool_start];
        for (t, &x) in points.iter().enumerate().skip(pool_start) {
            let b = bucket_of(x);
            indices[fill[b]] = t as u32;
            fill[b] += 1;
        }
        Self { width, offsets, indices }
    }

    fn bucket(&self, b: usize) -> &[u32] {
        &self.indices[self.offsets[b]..self.offsets[b + 1]]
    }

    fn bucket_range(&self, lo: f64, hi: f64) -> std::ops::RangeInclusive<usize> {
        let last = self.offsets.len() - 2;
        let first = (lo.max(0.0) / self.width) as usize;
        let end = ((hi.max(0.0) / self.width) as usize).min(last);
        first.min(last)..=end
    }
}

/// Neighbor lists of the general active tester.
///
/// Anchors are `points[..m]`. For each anchor `x_i`, scans the pool
/// `points[m..]` in index order and keeps the first `ell` indices whose point
/// lies in the open window `(x_i - delta, x_i + delta)`. Pool points may serve
/// several anchors. Lists shorter than `ell` mean the pool ran out.
pub fn neighbor_schedule(points: &[f64], m: usize, ell: usize, delta: f64) -> Vec<Vec<usize>> {
    assert!(m <= points.len(), "more anchors than points");
    let pool = BucketedPool::new(points, m, delta);
    let mut lists = Vec::with_capacity(m);
    let mut cursors: Vec<(&[u32], usize)> = Vec::with_capacity(4);
    for &x in &points[..m] {
        let (lo, hi) = (x - delta, x + delta);
        cursors.clear();
        cursors.extend(pool.bucket_range(lo, hi).map(|b| (pool.bucket(b), 0)));
        let mut chosen = Vec::with_capacity(ell);
        // Merge the bucket lists by index until ell in-window points are found.
        while chosen.len() < ell {
            let Some(next) = cursors
                .iter()
                .enumerate()
                .filter(|(_, (list, pos))| *pos < list.len())
                .min_by_key(|(_, (list, pos))| list[*pos])
                .map(|(c, _)| c)
            else {
                break;
            };
            let (list, pos) = &mut cursors[next];
            let t = list[*pos] as usize;
            *pos += 1;
            let z = points[t];
            if z > lo && z < hi {
                chosen.push(t);
            }
        }
        lists.push(chosen);
    }
    lists
}

/// Result of [`ns_hat_general`].
#[derive(Debug, Clone, PartialEq)]
pub struct GeneralEstimate {
    pub estimate: NsEstimate,
    pub failure: Option<FailureEvent>,
}

/// The general active estimator `NS^_delta(f; H)`.
///
/// Draws `s` points; the first `m` are anchors and the rest the neighbor
/// pool scanned by [`neighbor_schedule`]. Anchors and neighbors are labeled
/// (or, when `m (ell + 1) > s`, every sample is), and the estimate averages
/// the anchored disagreement rate over anchors, counting 1 for an anchor
/// whose anchored subclass is empty. Anchors left short of `ell` neighbors
/// are dropped and flag [`FailureEvent::NeighborPoolExhausted`].
pub fn ns_hat_general(
    oracle: &mut TargetOracle<'_>,
    class: &dyn BaseClass,
    params: &ActiveParams,
) -> Result<GeneralEstimate> {
    let range = oracle.draw(params.s)?;
    let base = range.start;
    let lists = neighbor_schedule(&oracle.points()[base..], params.m, params.ell, params.delta);
    let failure = lists
        .iter()
        .any(|l| l.len() < params.ell)
        .then_some(FailureEvent::NeighborPoolExhausted);

    let query_all = params.queries_all();
    if query_all {
        oracle.query_all()?;
    }
    let label = |oracle: &mut TargetOracle<'_>, i: usize| -> Result<f64> {
        match oracle.known_label(i) {
            Some(v) if query_all => Ok(v),
            _ => oracle.query(i),
        }
    };

    let mut values = Vec::with_capacity(params.m);
    let mut probes = Vec::with_capacity(params.ell);
    for (i, list) in lists.iter().enumerate() {
        if list.len() < params.ell {
            continue;
        }
        let anchor = ValuePoint::new(oracle.point(base + i), label(oracle, base + i)?);
        probes.clear();
        for &t in list {
            probes.push(ValuePoint::new(oracle.point(base + t), label(oracle, base + t)?));
        }
        let fit = class.min_disagreements_anchored(anchor, &probes)?;
        values.push(fit.rate(params.ell));
    }
    Ok(GeneralEstimate { estimate: NsEstimate::from_values(&values), failure })
}

/// The pair selected within one block: the smallest index `i` with
/// `z_i` in `(delta, 1 - delta)` and some later `j` within `delta`, and the
/// smallest such `j`. Indices are relative to the block.
pub fn block_pair(block: &[f64], delta: f64) -> Option<(usize, usize)> {
    let mut order: Vec<usize> = (0..block.len()).collect();
    order.sort_by(|&a, &b| block[a].total_cmp(&block[b]).then(a.cmp(&b)));
    let mut best: Option<(usize, usize)> = None;
    for (pos, &i) in order.iter().enumerate() {
        let zi = block[i];
        if !(zi > delta && zi < 1.0 - delta) {
            continue;
        }
        if best.is_some_and(|(bi, _)| bi < i) {
            continue;
        }
        let close = |&&j: &&usize| (block[j] - zi).abs() < delta;
        let left = order[..pos].iter().rev().take_while(close);
        let right = order[pos + 1..].iter().take_while(close);
        if let Some(j) = left.chain(right).copied().filter(|&j| j > i).min() {
            best = Some((i, j));
        }
    }
    best
}

/// Birthday pairs: scans consecutive size-`n` blocks of `points` and keeps
/// [`block_pair`] of the first `pairs` blocks that have one. Indices are
/// absolute.
pub fn birthday_pairs(points: &[f64], n: usize, pairs: usize, delta: f64) -> Vec<(usize, usize)> {
    points
        .chunks_exact(n)
        .enumerate()
        .filter_map(|(t, block)| block_pair(block, delta).map(|(i, j)| (t * n + i, t * n + j)))
        .take(pairs)
        .collect()
}

/// Result of [`ns_hat_pairs`].
#[derive(Debug, Clone, PartialEq)]
pub struct PairsEstimate {
    pub estimate: NsEstimate,
    pub failure: Option<FailureEvent>,
    pub pairs: Vec<(usize, usize)>,
}

/// The birthday-pairing estimator `NS'^_delta(f)` for piecewise constants:
/// `(1 - 2 delta)` times the disagreement rate over the selected pairs.
///
/// Active mode labels only the pair endpoints; passive mode labels every
/// sample and reads the pair labels from them. Fewer than `m'` qualifying
/// blocks flags [`FailureEvent::InsufficientPairs`] and averages over the
/// pairs found.
pub fn ns_hat_pairs(
    oracle: &mut TargetOracle<'_>,
    params: &ConstantParams,
    mode: Mode,
) -> Result<PairsEstimate> {
    let range = oracle.draw(params.s_prime)?;
    let base = range.start;
    let mut pairs =
        birthday_pairs(&oracle.points()[base..], params.n, params.m_prime, params.delta);
    for p in &mut pairs {
        p.0 += base;
        p.1 += base;
    }
    let failure =
        (pairs.len() < params.m_prime).then_some(FailureEvent::InsufficientPairs);
    if mode == Mode::Passive {
        oracle.query_all()?;
    }
    let tol = Tolerance::default();
    let mut indicators = Vec::with_capacity(pairs.len());
    for &(i, j) in &pairs {
        let (fz, fy) = match mode {
            Mode::Active => (oracle.query(i)?, oracle.query(j)?),
            Mode::Passive => (
                oracle.known_label(i).expect("passive mode labels every sample"),
                oracle.known_label(j).expect("passive mode labels every sample"),
            ),
        };
        indicators.push(if tol.agree(fz, fy) { 0.0 } else { 1.0 });
    }
    let estimate = NsEstimate::from_values(&indicators).scaled(1.0 - 2.0 * params.delta);
    Ok(PairsEstimate { estimate, failure, pairs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::class::{Class, Member};
    use crate::piecewise::PiecewiseFunction;
    use crate::testers::params::ActiveConstants;

    fn two_piece() -> PiecewiseFunction {
        PiecewiseFunction::new(vec![0.5], vec![Member::Constant(0.0), Member::Constant(1.0)])
            .unwrap()
    }

    #[test]
    fn constant_function_has_zero_ns() {
        let f = PiecewiseFunction::single(Member::Constant(2.0));
        for class in [Class::constants(), Class::polynomials(1)] {
            let est = ns_true_mc(&f, &class, 0.01, 2000, 3).unwrap();
            assert_eq!(est.value, 0.0);
            assert_eq!(est.std_error, 0.0);
        }
    }

    #[test]
    fn two_piece_matches_half_delta() {
        let est = ns_true_mc(&two_piece(), &Class::constants(), 0.01, 200_000, 11).unwrap();
        assert!((est.value - 0.005).abs() <= 3.0 * est.std_error, "{est:?}");
    }

    #[test]
    fn block_pair_picks_smallest_indices() {
        let d = 0.01;
        // Both (0, 3) and (1, 2) are close pairs; index 0 leads.
        let block = [0.300, 0.600, 0.605, 0.302, 0.9];
        assert_eq!(block_pair(&block, d), Some((0, 3)));
        // Left point too close to the edge is skipped; its partner can still lead.
        let block = [0.005, 0.006, 0.5, 0.7, 0.703];
        assert_eq!(block_pair(&block, d), Some((3, 4)));
        let block = [0.1, 0.3, 0.5];
        assert_eq!(block_pair(&block, d), None);
        // Smallest partner j among several.
        let block = [0.40, 0.95, 0.405, 0.401];
        assert_eq!(block_pair(&block, d), Some((0, 2)));
    }

    #[test]
    fn neighbor_schedule_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let points: Vec<f64> = (0..3000).map(|_| rng.random()).collect();
        let (m, ell, delta) = (25, 7, 0.004);
        let lists = neighbor_schedule(&points, m, ell, delta);
        for (i, list) in lists.iter().enumerate() {
            let x = points[i];
            let want: Vec<usize> = (m..points.len())
                .filter(|&t| points[t] > x - delta && points[t] < x + delta)
                .take(ell)
                .collect();
            assert_eq!(list, &want);
        }
    }

    #[test]
    fn pairs_estimator_on_constant_is_zero() {
        let f = PiecewiseFunction::single(Member::Constant(1.0));
        let params = ConstantParams::with_delta(0.4, 2, 0.01, 1.0).unwrap();
        for mode in [Mode::Active, Mode::Passive] {
            let mut o = TargetOracle::new(&f, params.s_prime, params.queries(mode), 1);
            let est = ns_hat_pairs(&mut o, &params, mode).unwrap();
            assert_eq!(est.estimate.value, 0.0);
            assert_eq!(est.failure, None);
            if mode == Mode::Active {
                assert_eq!(o.queries_made(), 2 * params.m_prime);
            }
        }
    }

    #[test]
    fn general_estimator_on_constant_is_zero() {
        let f = PiecewiseFunction::single(Member::Constant(1.0));
        let params = ActiveParams::with_delta(0.4, 2, 1, 0.01, ActiveConstants::default()).unwrap();
        let mut o = TargetOracle::new(&f, params.s, params.effective_queries(), 1);
        let est = ns_hat_general(&mut o, &Class::constants(), &params).unwrap();
        assert_eq!(est.estimate.value, 0.0);
        assert_eq!(est.failure, None);
    }
}
