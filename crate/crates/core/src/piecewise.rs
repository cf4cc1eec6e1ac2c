//! k-piecewise functions and the [`Target`] abstraction testers observe.

use serde::{Deserialize, Serialize};

use crate::class::Member;
use crate::error::{invalid, Result};

/// Anything a tester can be pointed at.
pub trait Target: Send + Sync {
    fn value(&self, x: f64) -> f64;
}

impl<F> Target for F
where
    F: Fn(f64) -> f64 + Send + Sync,
{
    fn value(&self, x: f64) -> f64 {
        self(x)
    }
}

/// `f(x; {h_i}, {t_i})`: equals `h_i(x)` on `(t_{i-1}, t_i]`, with
/// `t_0 = -inf` and `t_k = +inf`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseFunction {
    breakpoints: Vec<f64>,
    pieces: Vec<Member>,
}

impl PiecewiseFunction {
    pub fn new(breakpoints: Vec<f64>, pieces: Vec<Member>) -> Result<Self> {
        if pieces.len() != breakpoints.len() + 1 {
            return Err(invalid(format!(
                "{} pieces need {} breakpoints, got {}",
                pieces.len(),
                pieces.len().saturating_sub(1),
                breakpoints.len()
            )));
        }
        if breakpoints.iter().any(|t| !t.is_finite()) {
            return Err(invalid("breakpoints must be finite"));
        }
        if breakpoints.windows(2).any(|w| w[0] > w[1]) {
            return Err(invalid("breakpoints must be nondecreasing"));
        }
        Ok(Self { breakpoints, pieces })
    }

    pub fn single(member: Member) -> Self {
        Self { breakpoints: Vec::new(), pieces: vec![member] }
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn pieces(&self) -> &[Member] {
        &self.pieces
    }

    /// Number of pieces `k`.
    pub fn k(&self) -> usize {
        self.pieces.len()
    }

    /// Index of the piece owning `x`: the left piece owns its right endpoint.
    #[inline]
    pub fn piece_index(&self, x: f64) -> usize {
        self.breakpoints.partition_point(|&t| t < x)
    }

    #[inline]
    pub fn evaluate(&self, x: f64) -> f64 {
        self.pieces[self.piece_index(x)].eval(x)
    }
}

impl Target for PiecewiseFunction {
    fn value(&self, x: f64) -> f64 {
        self.evaluate(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn left_piece_owns_breakpoint() {
        let f = PiecewiseFunction::new(vec![0.5], vec![Member::Constant(0.0), Member::Constant(1.0)])
            .unwrap();
        assert_eq!(f.evaluate(0.5), 0.0);
        assert_eq!(f.evaluate(0.5000001), 1.0);
    }

    #[test]
    fn single_piece() {
        assert_eq!(PiecewiseFunction::single(Member::Constant(7.0)).evaluate(0.3), 7.0);
    }

    #[test]
    fn polynomial_pieces() {
        let f = PiecewiseFunction::new(
            vec![0.5],
            vec![Member::Polynomial(vec![0.0, 1.0]), Member::Polynomial(vec![0.0, 0.0, 1.0])],
        )
        .unwrap();
        assert_eq!(f.evaluate(0.75), 0.5625);
        assert_eq!(f.evaluate(0.25), 0.25);
    }

    #[test]
    fn rejects_malformed() {
        assert!(PiecewiseFunction::new(vec![0.5], vec![Member::Constant(0.0)]).is_err());
        assert!(PiecewiseFunction::new(
            vec![0.6, 0.5],
            vec![Member::Constant(0.0), Member::Constant(1.0), Member::Constant(2.0)]
        )
        .is_err());
    }

    proptest! {
        #[test]
        fn breakpoints_belong_to_left_piece(mut ts in prop::collection::vec(0.0f64..1.0, 1..12)) {
            ts.sort_by(f64::total_cmp);
            let pieces: Vec<_> = (0..=ts.len()).map(|i| Member::Constant(i as f64)).collect();
            let f = PiecewiseFunction::new(ts.clone(), pieces).unwrap();
            for &t in &ts {
                // With ties, the first piece ending at t owns it.
                let first = ts.iter().position(|&s| s == t).unwrap();
                prop_assert_eq!(f.evaluate(t), first as f64);
            }
        }
    }
}
