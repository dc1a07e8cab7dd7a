//! Interval complements `K = [−α,α] ∖ ⋃ Iᵢ` and their middle-thirds
//! truncations. The removed intervals are the data; the fan constructions
//! read off gap midpoints and endpoints from them.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// A compact subset of `[−α, α]` presented through the finite list of open
/// intervals removed from it. Always contains `±α`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntervalComplement {
    pub alpha: f64,
    /// Sorted, pairwise disjoint open intervals `(a, b) ⊂ (−α, α)`.
    pub intervals: Vec<(f64, f64)>,
}

impl IntervalComplement {
    pub fn new(alpha: f64, mut intervals: Vec<(f64, f64)>) -> Result<Self> {
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(Error::InvalidSurface("alpha must be positive".into()));
        }
        intervals.sort_by(|p, q| p.0.partial_cmp(&q.0).unwrap());
        let mut prev_end = -alpha;
        for &(a, b) in &intervals {
            if !(a < b) {
                return Err(Error::InvalidSurface(format!("empty interval ({a}, {b})")));
            }
            if a < prev_end {
                return Err(Error::InvalidSurface("intervals overlap".into()));
            }
            if a < -alpha || b > alpha {
                return Err(Error::InvalidSurface("interval escapes [-alpha, alpha]".into()));
            }
            prev_end = b;
        }
        Ok(IntervalComplement { alpha, intervals })
    }

    /// Maximal closed subintervals making up `K`. Endpoint coincidences
    /// produce degenerate single-point pieces, which are kept.
    pub fn retained(&self) -> Vec<(f64, f64)> {
        let mut out = Vec::new();
        let mut lo = -self.alpha;
        for &(a, b) in &self.intervals {
            out.push((lo, a));
            lo = b;
        }
        out.push((lo, self.alpha));
        out
    }

    /// Midpoint and half-width of each removed interval.
    pub fn gaps(&self) -> Vec<Gap> {
        self.intervals
            .iter()
            .map(|&(a, b)| Gap { a, b, mid: 0.5 * (a + b), half_width: 0.5 * (b - a) })
            .collect()
    }

    pub fn contains(&self, k: f64) -> bool {
        if k < -self.alpha || k > self.alpha {
            return false;
        }
        !self.intervals.iter().any(|&(a, b)| k > a && k < b)
    }
}

/// One removed interval with its derived quantities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gap {
    pub a: f64,
    pub b: f64,
    pub mid: f64,
    pub half_width: f64,
}

/// Middle-thirds construction on `[−α, α]` truncated at the given depth:
/// depth 0 removes nothing, each further level removes the open middle third
/// of every remaining closed piece.
pub fn make_cantor(depth: u32, alpha: f64) -> Result<IntervalComplement> {
    let mut gaps: Vec<(f64, f64)> = Vec::new();
    let mut pieces = vec![(-alpha, alpha)];
    for _ in 0..depth {
        let mut next = Vec::with_capacity(pieces.len() * 2);
        for (lo, hi) in pieces {
            let third = (hi - lo) / 3.0;
            gaps.push((lo + third, hi - third));
            next.push((lo, lo + third));
            next.push((hi - third, hi));
        }
        pieces = next;
    }
    IntervalComplement::new(alpha, gaps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    /// Independent recursion: collect depth-d gap intervals by direct
    /// subdivision, sorted.
    fn cantor_gaps_oracle(depth: u32, alpha: f64) -> Vec<(f64, f64)> {
        fn rec(lo: f64, hi: f64, depth: u32, out: &mut Vec<(f64, f64)>) {
            if depth == 0 {
                return;
            }
            let third = (hi - lo) / 3.0;
            out.push((lo + third, hi - third));
            rec(lo, lo + third, depth - 1, out);
            rec(hi - third, hi, depth - 1, out);
        }
        let mut out = Vec::new();
        rec(-alpha, alpha, depth, &mut out);
        out.sort_by(|p, q| p.0.partial_cmp(&q.0).unwrap());
        out
    }

    #[test]
    fn depth_zero_and_one() {
        let k0 = make_cantor(0, 1.0).unwrap();
        assert!(k0.intervals.is_empty());
        assert_eq!(k0.retained(), vec![(-1.0, 1.0)]);

        let k1 = make_cantor(1, 1.0).unwrap();
        assert_eq!(k1.intervals.len(), 1);
        assert_abs_diff_eq!(k1.intervals[0].0, -1.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(k1.intervals[0].1, 1.0 / 3.0, epsilon = 1e-15);
    }

    #[test]
    fn depth_two_matches_recursion_oracle() {
        let k2 = make_cantor(2, 1.0).unwrap();
        let expected = [(-7.0 / 9.0, -5.0 / 9.0), (-1.0 / 3.0, 1.0 / 3.0), (5.0 / 9.0, 7.0 / 9.0)];
        assert_eq!(k2.intervals.len(), 3);
        for (got, want) in k2.intervals.iter().zip(expected.iter()) {
            assert_abs_diff_eq!(got.0, want.0, epsilon = 1e-15);
            assert_abs_diff_eq!(got.1, want.1, epsilon = 1e-15);
        }
        for depth in 0..5 {
            let k = make_cantor(depth, 0.7).unwrap();
            let oracle = cantor_gaps_oracle(depth, 0.7);
            assert_eq!(k.intervals.len(), oracle.len());
            for (got, want) in k.intervals.iter().zip(oracle.iter()) {
                assert_abs_diff_eq!(got.0, want.0, epsilon = 1e-14);
                assert_abs_diff_eq!(got.1, want.1, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn membership_and_retained_pieces() {
        let k = make_cantor(2, 1.0).unwrap();
        assert!(k.contains(1.0) && k.contains(-1.0));
        assert!(k.contains(-5.0 / 9.0));
        assert!(!k.contains(0.0));
        assert!(!k.contains(2.0));
        assert_eq!(k.retained().len(), 4);

        assert!(IntervalComplement::new(1.0, vec![(0.5, 0.2)]).is_err());
        assert!(IntervalComplement::new(1.0, vec![(-0.5, 0.1), (0.0, 0.4)]).is_err());
        assert!(IntervalComplement::new(1.0, vec![(0.5, 1.5)]).is_err());
    }
}
