use crate::class::{BaseClass, ValuePoint};
use crate::error::{invalid, Error, Result};
use crate::piecewise::PiecewiseFunction;

/// Finds some `g` in `F_k(H)` agreeing with every labeled point, or `None`.
///
/// Dynamic program over the sorted points: `pieces[j]` is the fewest
/// segments covering the first `j` points, where a segment is feasible when
/// one member of `H` fits all of its points. Feasibility is hereditary, so
/// the backward scan from each end stops at the first infeasible start.
/// Breakpoints sit at midpoints between consecutive segments.
pub fn fit_consistent_piecewise(
    points: &[ValuePoint],
    class: &dyn BaseClass,
    k: usize,
) -> Result<Option<PiecewiseFunction>> {
    if k == 0 {
        return Err(invalid("k must be positive"));
    }
    for w in points.windows(2) {
        if w[0].x == w[1].x {
            return Err(Error::DuplicateX(w[0].x));
        }
        if w[0].x > w[1].x {
            return Err(invalid("points must be sorted by x"));
        }
    }
    let n = points.len();
    if n == 0 {
        let member = class.fit_all(&[]).expect("empty sample always fits");
        return Ok(Some(PiecewiseFunction::single(member)));
    }

    let mut pieces = vec![usize::MAX; n + 1];
    let mut start = vec![0usize; n + 1];
    pieces[0] = 0;
    for end in 1..=n {
        for begin in (0..end).rev() {
            if class.fit_all(&points[begin..end]).is_none() {
                break;
            }
            if pieces[begin] != usize::MAX && pieces[begin] + 1 < pieces[end] {
                pieces[end] = pieces[begin] + 1;
                start[end] = begin;
            }
        }
    }
    if pieces[n] > k {
        return Ok(None);
    }

    let mut bounds = Vec::with_capacity(pieces[n]);
    let mut end = n;
    while end > 0 {
        bounds.push((start[end], end));
        end = start[end];
    }
    bounds.reverse();
    let members = bounds
        .iter()
        .map(|&(b, e)| class.fit_all(&points[b..e]).expect("segment was feasible"))
        .collect();
    let breakpoints = bounds[1..]
        .iter()
        .map(|&(b, _)| 0.5 * (points[b - 1].x + points[b].x))
        .collect();
    PiecewiseFunction::new(breakpoints, members).map(Some)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::class::{Class, Member};

    fn labeled(v: &[(f64, f64)]) -> Vec<ValuePoint> {
        v.iter().map(|&(x, y)| ValuePoint::new(x, y)).collect()
    }

    #[test]
    fn alternation_needs_four_pieces() {
        let pts = labeled(&[(0.1, 0.0), (0.2, 1.0), (0.3, 0.0), (0.4, 1.0)]);
        let c = Class::constants();
        assert_eq!(fit_consistent_piecewise(&pts, &c, 2).unwrap(), None);
        assert_eq!(fit_consistent_piecewise(&pts, &c, 3).unwrap(), None);
        let g = fit_consistent_piecewise(&pts, &c, 4).unwrap().unwrap();
        assert_eq!(g.breakpoints(), &[0.15000000000000002, 0.25, 0.35]);
        for p in &pts {
            assert_eq!(g.evaluate(p.x), p.y);
        }
    }

    #[test]
    fn recovers_parabola() {
        let pts: Vec<_> = (0..12)
            .map(|i| {
                let x = (i as f64 + 0.5) / 12.0;
                ValuePoint::new(x, x * x)
            })
            .collect();
        let g = fit_consistent_piecewise(&pts, &Class::polynomials(2), 1).unwrap().unwrap();
        let Member::Polynomial(c) = &g.pieces()[0] else { panic!() };
        for (a, b) in c.iter().zip([0.0, 0.0, 1.0]) {
            assert!((a - b).abs() < 1e-9, "{c:?}");
        }
    }

    #[test]
    fn input_validation() {
        let c = Class::constants();
        let dup = labeled(&[(0.1, 0.0), (0.1, 1.0)]);
        assert_eq!(fit_consistent_piecewise(&dup, &c, 2), Err(Error::DuplicateX(0.1)));
        let unsorted = labeled(&[(0.2, 0.0), (0.1, 1.0)]);
        assert!(fit_consistent_piecewise(&unsorted, &c, 2).is_err());
        assert!(fit_consistent_piecewise(&[], &c, 1).unwrap().is_some());
    }
}
