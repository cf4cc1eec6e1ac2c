//! Newton divided-difference interpolation.
//!
//! Anchored fits in the polynomial base class interpolate through a handful of
//! nodes many times per estimator call, so [`NewtonPoly`] can be refitted in
//! place without reallocating.

use crate::error::{Error, Result};

/// Interpolating polynomial stored in Newton form.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct NewtonPoly {
    nodes: Vec<f64>,
    coeffs: Vec<f64>,
}

impl NewtonPoly {
    /// Interpolates through `(xs[i], ys[i])`. Nodes must be pairwise distinct.
    pub fn fit(xs: &[f64], ys: &[f64]) -> Result<Self> {
        let mut poly = Self::default();
        poly.refit(xs, ys)?;
        Ok(poly)
    }

    /// Refits in place, reusing the existing buffers.
    pub fn refit(&mut self, xs: &[f64], ys: &[f64]) -> Result<()> {
        assert_eq!(xs.len(), ys.len(), "node and value counts differ");
        self.nodes.clear();
        self.nodes.extend_from_slice(xs);
        self.coeffs.clear();
        self.coeffs.extend_from_slice(ys);
        let n = xs.len();
        for level in 1..n {
            for i in (level..n).rev() {
                let span = xs[i] - xs[i - level];
                if span == 0.0 {
                    return Err(Error::DuplicateX(xs[i]));
                }
                self.coeffs[i] = (self.coeffs[i] - self.coeffs[i - 1]) / span;
            }
        }
        Ok(())
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    /// Nested evaluation of the Newton form.
    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        let n = self.coeffs.len();
        if n == 0 {
            return 0.0;
        }
        let mut acc = self.coeffs[n - 1];
        for i in (0..n - 1).rev() {
            acc = acc * (x - self.nodes[i]) + self.coeffs[i];
        }
        acc
    }

    /// Expands to monomial coefficients, constant term first.
    pub fn to_monomial(&self) -> Vec<f64> {
        let n = self.coeffs.len();
        if n == 0 {
            return vec![0.0];
        }
        let mut poly = vec![self.coeffs[n - 1]];
        for i in (0..n - 1).rev() {
            // poly <- poly * (x - nodes[i]) + coeffs[i]
            let mut next = vec![0.0; poly.len() + 1];
            for (d, &a) in poly.iter().enumerate() {
                next[d + 1] += a;
                next[d] -= a * self.nodes[i];
            }
            next[0] += self.coeffs[i];
            poly = next;
        }
        poly
    }
}

/// Horner evaluation of monomial coefficients (constant term first).
#[inline]
pub fn horner(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}
