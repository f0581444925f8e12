//! Window partitioning for combinations.
//!
//! A window is cut at every support endpoint and every interior turning point
//! of every active piece. Between consecutive cuts each active piece is
//! monotone, which is what the sup and integration kernels rely on.

use super::combined::{CombinedFunction, Term};
use super::{Interval, Piece};

/// A maximal subinterval on which the active piece set is constant and every
/// active piece is monotone.
#[derive(Debug, Clone)]
pub struct Segment {
    pub lo: f64,
    pub hi: f64,
    /// `(coefficient, piece)` pairs whose support covers the whole segment.
    pub parts: Vec<(f64, Piece)>,
}

/// The partition of a window, plus the candidate point set: all cuts, where
/// pointwise evaluation catches anything narrower than the binary64 grid.
#[derive(Debug)]
pub struct Partition {
    pub segments: Vec<Segment>,
    pub points: Vec<f64>,
}

pub(crate) fn collect_pieces(f: &CombinedFunction, lo: f64, hi: f64) -> Vec<(f64, Piece)> {
    let window = Interval { lo, hi, closed_lo: true, closed_hi: true };
    let mut out = Vec::new();
    for (c, term) in f.terms() {
        match term {
            Term::Train(t) => {
                for (_, p) in t.pieces_in(&window) {
                    out.push((*c, p));
                }
            }
            Term::Finite(fp) => {
                for (_, p) in fp.pieces_in(&window) {
                    out.push((*c, p));
                }
            }
        }
    }
    out
}

/// Sum of the active piece formulas at `x`; valid only where every listed
/// piece's support covers `x`.
pub(crate) fn seg_value(parts: &[(f64, Piece)], x: f64) -> f64 {
    parts.iter().map(|(c, p)| c * p.formula_at(x)).sum()
}

/// Partition `[lo, hi]` for the combination `f`.
pub fn segments(f: &CombinedFunction, lo: f64, hi: f64) -> Partition {
    debug_assert!(lo.is_finite() && hi.is_finite() && lo <= hi);
    let pieces = collect_pieces(f, lo, hi);

    let mut cuts: Vec<f64> = Vec::with_capacity(2 * pieces.len() + 2);
    cuts.push(lo);
    cuts.push(hi);
    for (_, p) in &pieces {
        let s = p.support();
        for x in [s.lo, s.hi] {
            if x > lo && x < hi {
                cuts.push(x);
            }
        }
        if let Some(t) = p.interior_turn() {
            if t > lo && t < hi {
                cuts.push(t);
            }
        }
    }
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();

    let mut segments: Vec<Segment> = cuts
        .windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| Segment { lo: w[0], hi: w[1], parts: Vec::new() })
        .collect();

    // both cut list and piece list are sorted; walk them together
    let mut sorted = pieces;
    sorted.sort_by(|a, b| a.1.support().lo.total_cmp(&b.1.support().lo));
    let mut start = 0usize;
    for (c, p) in sorted {
        let s = p.support();
        while start < segments.len() && segments[start].hi <= s.lo {
            start += 1;
        }
        for seg in segments[start..].iter_mut() {
            if seg.lo >= s.hi {
                break;
            }
            if seg.lo >= s.lo && seg.hi <= s.hi {
                seg.parts.push((c, p));
            }
        }
    }

    Partition { segments, points: cuts }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::piecewise::{LazyTrain, TrainKind};

    #[test]
    fn partition_covers_window_without_gaps() {
        let f: CombinedFunction =
            LazyTrain::new(TrainKind::Triangle, 1, 0.0).unwrap().into();
        let part = segments(&f, 0.0, 5.0);
        assert_eq!(part.segments.first().unwrap().lo, 0.0);
        assert_eq!(part.segments.last().unwrap().hi, 5.0);
        for w in part.segments.windows(2) {
            assert_eq!(w[0].hi, w[1].lo);
        }
    }

    #[test]
    fn segment_sum_matches_pointwise_evaluation() {
        let a = LazyTrain::new(TrainKind::Triangle, 1, 0.0).unwrap();
        let b = LazyTrain::new(TrainKind::Power { p: 2.0 }, 1, 0.05).unwrap();
        let f = crate::piecewise::combined::combine(&[(2.0, a), (-1.5, b)]).unwrap();
        let part = segments(&f, 0.0, 8.0);
        for seg in &part.segments {
            for frac in [0.25, 0.5, 0.75] {
                let x = seg.lo + frac * (seg.hi - seg.lo);
                if x <= seg.lo || x >= seg.hi {
                    continue;
                }
                let via_segment = seg_value(&seg.parts, x);
                let direct = f.value_at(x);
                assert!(
                    (via_segment - direct).abs() <= 1e-12 * direct.abs().max(1.0),
                    "x = {x}: {via_segment} vs {direct}"
                );
            }
        }
    }

    #[test]
    fn bump_turn_becomes_a_cut() {
        let f: CombinedFunction = LazyTrain::new(TrainKind::Smooth, 1, 0.0).unwrap().into();
        let part = segments(&f, 0.5, 1.5);
        assert!(part.points.contains(&1.0));
        // the two segments adjacent to the apex carry the bump piece
        let with_parts: Vec<_> =
            part.segments.iter().filter(|s| !s.parts.is_empty()).collect();
        assert_eq!(with_parts.len(), 2);
        assert_eq!(with_parts[0].hi, 1.0);
        assert_eq!(with_parts[1].lo, 1.0);
    }
}
