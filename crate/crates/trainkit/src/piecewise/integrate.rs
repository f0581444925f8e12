//! Absolute-value integrals with certified error accounting.
//!
//! Segments whose sum is a single closed-form piece or a pure affine sum are
//! integrated exactly. Everything else goes through adaptive quadrature with
//! an explicit budget. Unbounded windows are cut where the per-train tail
//! bounds drop below the tail budget, and those bounds are added to the
//! reported error instead of being silently dropped.

use super::combined::{CombinedFunction, Term};
use super::segments::{seg_value, segments, Segment};
use super::{abs_integral_affine, Interval, PieceKind};
use crate::{Error, Result};

/// `value` approximates the integral with `|true - value| <= error_bound`.
#[derive(Debug, Clone, Copy)]
pub struct IntegralEstimate {
    pub value: f64,
    pub error_bound: f64,
}

const SIMPSON_MAX_DEPTH: u32 = 48;

/// Integral of `|f|` over the window. `tol` of zero is allowed only when every
/// segment resolves in closed form and the window is bounded.
pub fn integrate_abs(
    f: &CombinedFunction,
    window: &Interval,
    tol: f64,
) -> Result<IntegralEstimate> {
    if !(tol >= 0.0) || !tol.is_finite() {
        return Err(Error::Parameter(format!("tolerance must be finite and >= 0, got {tol}")));
    }
    let (est, _) = if window.hi.is_finite() {
        integrate_abs_split(f, window.lo, window.hi, tol, 0.0)?
    } else {
        integrate_abs_split(f, window.lo, f64::INFINITY, tol * 0.5, tol * 0.5)?
    };
    Ok(est)
}

/// Core routine with separate quadrature and tail budgets. Returns the
/// estimate and the largest train index used as a tail cut.
pub(crate) fn integrate_abs_split(
    f: &CombinedFunction,
    lo: f64,
    hi: f64,
    quad_tol: f64,
    tail_tol: f64,
) -> Result<(IntegralEstimate, u32)> {
    let lo = lo.max(0.0);
    if f.terms().is_empty() || hi <= lo {
        return Ok((IntegralEstimate { value: 0.0, error_bound: 0.0 }, 0));
    }

    let mut tail_error = 0.0f64;
    let mut cut_index = 0u32;
    let hi_eff = if hi.is_finite() {
        hi
    } else {
        let trains: Vec<_> = f
            .terms()
            .iter()
            .filter_map(|(c, t)| match t {
                Term::Train(tr) => Some((*c, tr)),
                Term::Finite(_) => None,
            })
            .collect();
        let mut cut = lo;
        for (_, term) in f.terms() {
            if let Term::Finite(fp) = term {
                cut = cut.max(fp.end_x());
            }
        }
        if !trains.is_empty() {
            if tail_tol <= 0.0 {
                return Err(Error::Parameter(
                    "an unbounded window over a train needs a positive tolerance".into(),
                ));
            }
            let budget = tail_tol / trains.len() as f64;
            for (c, tr) in &trains {
                let mut n = tr.start();
                loop {
                    let b = c.abs() * tr.l1_tail_bound(n);
                    if b <= budget {
                        tail_error += b;
                        cut_index = cut_index.max(n);
                        cut = cut.max(tr.center(n) - 0.5);
                        break;
                    }
                    n += 1;
                    if n > 500_000 {
                        return Err(Error::Budget(format!(
                            "tail bound for {} never reached {budget:e}",
                            tr.describe()
                        )));
                    }
                }
            }
        }
        cut
    };

    if hi_eff <= lo {
        return Ok((
            IntegralEstimate { value: 0.0, error_bound: tail_error },
            cut_index,
        ));
    }

    let part = segments(f, lo, hi_eff);
    let mut exact_sum = 0.0f64;
    let mut sliver_error = 0.0f64;
    let mut quad_segments: Vec<&Segment> = Vec::new();
    for seg in &part.segments {
        match exact_segment(seg) {
            SegmentPlan::Exact(v) => exact_sum += v,
            SegmentPlan::Quad => quad_segments.push(seg),
            SegmentPlan::Sliver(b) => sliver_error += b,
        }
    }

    // Pieces narrower than an ulp of their position round to a single point
    // and never enter the partition, yet their mass is exact per index.
    // Credit it here; a point sitting exactly on a window endpoint has an
    // unknowable overlap and goes to the error bound instead. Wider pieces
    // whose rounded endpoints land strictly inside the exact support leave a
    // rounding sliver the partition may drop; its mass is bounded by the
    // formula value at the rounded end (the halves are monotone) and charged
    // to the error. The anchored families have exact dyadic offsets, so for
    // them both deltas are identically zero.
    let probe = Interval { lo, hi: hi_eff, closed_lo: true, closed_hi: true };
    let mut point_mass = 0.0f64;
    for (c, term) in f.terms() {
        let Term::Train(tr) = term else { continue };
        for (m, piece) in tr.pieces_in(&probe) {
            let s = piece.support();
            if s.hi > s.lo {
                let d0 = (s.lo - piece.anchor) - piece.lo_off;
                let d1 = piece.hi_off - (s.hi - piece.anchor);
                if d0 > 0.0 {
                    tail_error += c.abs() * piece.formula_at(s.lo).abs() * d0;
                }
                if d1 > 0.0 {
                    tail_error += c.abs() * piece.formula_at(s.hi).abs() * d1;
                }
                continue;
            }
            match tr.piece_area(m) {
                // every multi-piece kind splits symmetrically, so one half
                // carries half the index mass
                Some(a) => {
                    let mass = c.abs() * 0.5 * a;
                    if s.lo > lo && s.lo < hi_eff {
                        point_mass += mass;
                    } else {
                        tail_error += mass;
                    }
                }
                None => tail_error += c.abs() * tr.peak(m) * tr.width(m),
            }
        }
    }

    let mut quad_value = 0.0f64;
    let mut quad_error = 0.0f64;
    if !quad_segments.is_empty() {
        if quad_tol <= 0.0 {
            return Err(Error::Parameter(
                "window needs quadrature but the tolerance budget is zero".into(),
            ));
        }
        let total_len: f64 = quad_segments.iter().map(|s| s.hi - s.lo).sum();
        for seg in quad_segments {
            let budget = (quad_tol * (seg.hi - seg.lo) / total_len).max(1e-300);
            let g = |x: f64| seg_value(&seg.parts, x).abs();
            let (v, e) = adaptive_simpson(&g, seg.lo, seg.hi, budget);
            quad_value += v;
            quad_error += e;
        }
    }

    Ok((
        IntegralEstimate {
            value: exact_sum + quad_value + point_mass,
            error_bound: tail_error + quad_error + sliver_error,
        },
        cut_index,
    ))
}

enum SegmentPlan {
    Exact(f64),
    Quad,
    /// Formula extrapolation over the segment would be garbage; the carried
    /// value bounds the segment's whole mass via the triangle inequality.
    Sliver(f64),
}

/// Parts attach to segments by rounded support, which can poke up to an ulp
/// past the exact one. For ordinary pieces that sliver is far below any
/// tolerance, but for pieces narrower than an ulp the extrapolated formula
/// swamps everything. Flag the segment when the uncovered fraction is a
/// noticeable share of some part's true width.
fn poorly_covered(seg: &Segment) -> bool {
    seg.parts.iter().any(|(_, p)| {
        let d0 = seg.lo - p.anchor;
        let d1 = seg.hi - p.anchor;
        let uncovered = (p.lo_off - d0).max(0.0) + (d1 - p.hi_off).max(0.0);
        uncovered > 0.125 * (p.hi_off - p.lo_off)
    })
}

fn sliver_bound(seg: &Segment) -> f64 {
    seg.parts
        .iter()
        .map(|(c, p)| {
            let v = p.abs_integral_closed(seg.lo, seg.hi).unwrap_or_else(|| {
                let d0 = (seg.lo - p.anchor).max(p.lo_off);
                let d1 = (seg.hi - p.anchor).min(p.hi_off);
                let peak = match p.kind {
                    PieceKind::SmoothBump { height, .. } => height,
                    _ => p.formula_at(p.anchor).abs(),
                };
                peak * (d1 - d0).max(0.0)
            });
            c.abs() * v
        })
        .sum()
}

/// Exact integral of `|sum|` over the segment, when available.
fn exact_segment(seg: &Segment) -> SegmentPlan {
    if seg.parts.is_empty() {
        return SegmentPlan::Exact(0.0);
    }
    if seg.parts.len() == 1 {
        let (c, p) = &seg.parts[0];
        // the closed forms clamp to true offsets, so coverage cannot hurt them
        if let Some(v) = p.abs_integral_closed(seg.lo, seg.hi) {
            return SegmentPlan::Exact(c.abs() * v);
        }
    }
    if poorly_covered(seg) {
        return SegmentPlan::Sliver(sliver_bound(seg));
    }
    if seg.parts.len() == 1 {
        return SegmentPlan::Quad;
    }
    let all_affine = seg.parts.iter().all(|(_, p)| {
        matches!(
            p.kind,
            PieceKind::Affine { .. } | PieceKind::Zero | PieceKind::AffinePower { q: 1.0, .. }
        )
    });
    if all_affine {
        let v0 = seg_value(&seg.parts, seg.lo);
        let v1 = seg_value(&seg.parts, seg.hi);
        return SegmentPlan::Exact(abs_integral_affine(v0, v1, seg.hi - seg.lo));
    }
    SegmentPlan::Quad
}

fn simpson_rule(fa: f64, fm: f64, fb: f64, len: f64) -> f64 {
    len / 6.0 * (fa + 4.0 * fm + fb)
}

fn adaptive_simpson<F: Fn(f64) -> f64>(g: &F, a: f64, b: f64, tol: f64) -> (f64, f64) {
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (g(a), g(m), g(b));
    let whole = simpson_rule(fa, fm, fb, b - a);
    simpson_step(g, a, b, fa, fm, fb, whole, tol, SIMPSON_MAX_DEPTH)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F: Fn(f64) -> f64>(
    g: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> (f64, f64) {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    if lm <= a || rm <= m {
        // can no longer split; the samples do not pin the mass down, so the
        // claimed error has to cover the whole estimate
        return (whole, whole.abs().max(tol));
    }
    let flm = g(lm);
    let frm = g(rm);
    let left = simpson_rule(fa, flm, fm, m - a);
    let right = simpson_rule(fm, frm, fb, b - m);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return (left + right + delta / 15.0, delta.abs() / 15.0);
    }
    let (lv, le) = simpson_step(g, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1);
    let (rv, re) = simpson_step(g, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
    (lv + rv, le + re)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::piecewise::{FinitePiecewise, LazyTrain, TrainKind};

    fn window(lo: f64, hi: f64) -> Interval {
        Interval { lo, hi, closed_lo: true, closed_hi: true }
    }

    #[test]
    fn triangle_partial_sum_matches_term_oracle() {
        let f: CombinedFunction =
            LazyTrain::new(TrainKind::Triangle, 1, 0.0).unwrap().into();
        let est = integrate_abs(&f, &window(0.0, 10.5), 0.0).unwrap();
        let oracle: f64 = (1..=10).map(|n| n as f64 * 2f64.powi(-(n as i32 + 1))).sum();
        assert!((est.value - oracle).abs() <= 1e-15, "{} vs {oracle}", est.value);
        assert_eq!(est.error_bound, 0.0);
    }

    #[test]
    fn full_line_triangle_mass_is_one() {
        let f: CombinedFunction =
            LazyTrain::new(TrainKind::Triangle, 1, 0.0).unwrap().into();
        let est = integrate_abs(&f, &Interval::closed(0.0, f64::INFINITY).unwrap(), 1e-10).unwrap();
        assert!((est.value - 1.0).abs() <= est.error_bound + 1e-13);
        assert!(est.error_bound <= 1e-10);
    }

    #[test]
    fn full_line_square_train_mass_is_two() {
        // sum of n^2 2^-n over n >= 1 is 6, and each spike holds n^2 2^-n / 3
        let f: CombinedFunction =
            LazyTrain::new(TrainKind::Power { p: 2.0 }, 1, 0.0).unwrap().into();
        let est = integrate_abs(&f, &Interval::closed(0.0, f64::INFINITY).unwrap(), 1e-10).unwrap();
        assert!((est.value - 2.0).abs() <= est.error_bound + 1e-12, "{}", est.value);
    }

    #[test]
    fn single_power_spike_resolves_in_closed_form() {
        let f: CombinedFunction =
            LazyTrain::new(TrainKind::Power { p: 2.0 }, 1, 0.0).unwrap().into();
        let est = integrate_abs(&f, &window(2.75, 3.25), 0.0).unwrap();
        assert!((est.value - 0.375).abs() <= 1e-15);
        assert_eq!(est.error_bound, 0.0);
    }

    #[test]
    fn affine_difference_with_sign_change_is_exact() {
        let up = FinitePiecewise::from_knots(&[(0.0, 0.0), (1.0, 1.0)]).unwrap();
        let down = FinitePiecewise::from_knots(&[(0.0, 1.0), (1.0, 0.0)]).unwrap();
        let f = CombinedFunction::from(up).sub(&down.into());
        // |x - (1 - x)| = |2x - 1| integrates to 1/2 over [0, 1]
        let est = integrate_abs(&f, &window(0.0, 1.0), 0.0).unwrap();
        assert!((est.value - 0.5).abs() <= 1e-15);
        assert_eq!(est.error_bound, 0.0);
    }

    #[test]
    fn smooth_bump_quadrature_matches_composite_oracle() {
        let f: CombinedFunction = LazyTrain::new(TrainKind::Smooth, 1, 0.0).unwrap().into();
        let est = integrate_abs(&f, &window(0.5, 1.5), 1e-11).unwrap();
        // independent composite rule with a fixed fine mesh
        let n = 1 << 16;
        let (a, b) = (0.75f64, 1.25f64);
        let h = (b - a) / n as f64;
        let mut acc = f.value_at(a) + f.value_at(b);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            acc += w * f.value_at(a + i as f64 * h);
        }
        let oracle = acc * h / 3.0;
        assert!(
            (est.value - oracle).abs() <= est.error_bound + 1e-10,
            "{} vs {oracle}",
            est.value
        );
    }

    #[test]
    fn unbounded_window_rejects_zero_tolerance() {
        let f: CombinedFunction =
            LazyTrain::new(TrainKind::Triangle, 1, 0.0).unwrap().into();
        assert!(integrate_abs(&f, &Interval::closed(0.0, f64::INFINITY).unwrap(), 0.0).is_err());
    }

    #[test]
    fn growth_weighted_mass_survives_sub_ulp_spikes() {
        // heights n e^n make spikes narrower than an ulp of n from the teens
        // on; their mass must come back through the per-index closed forms
        use crate::families::GrowthProfile;
        let f: CombinedFunction =
            LazyTrain::new(TrainKind::Alpha { profile: GrowthProfile::Exp }, 1, 0.0)
                .unwrap()
                .into();
        let est = integrate_abs(&f, &Interval::closed(0.0, f64::INFINITY).unwrap(), 1e-10).unwrap();
        assert!(
            (est.value - 0.5).abs() <= est.error_bound + 1e-13,
            "value {} error {}",
            est.value,
            est.error_bound
        );
        // the bound carries the rounding slivers of the transition indices
        assert!(est.error_bound <= 1e-8, "error bound {}", est.error_bound);
    }

    #[test]
    fn sub_ulp_overlap_keeps_value_sane_and_error_honest() {
        // a growth-weighted spike sits inside a triangle spike's support at
        // the same integer; the rounded partition cannot see the overlap, so
        // the tiny spike's mass may land in the error bound but must never
        // blow up the value
        use crate::families::GrowthProfile;
        let tri = LazyTrain::new(TrainKind::Triangle, 1, 0.0).unwrap();
        let alp = LazyTrain::new(TrainKind::Alpha { profile: GrowthProfile::Exp }, 1, 0.0).unwrap();
        let f = CombinedFunction::from(tri).add(&alp.into());
        let est = integrate_abs(&f, &window(29.5, 30.5), 1e-12).unwrap();
        // triangle piece mass 30 * 2^-31 plus alpha piece mass 2^-31
        let oracle = 30.0 * 2f64.powi(-31) + 2f64.powi(-31);
        assert!(
            (est.value - oracle).abs() <= est.error_bound + 1e-14,
            "value {} vs {oracle}, error {}",
            est.value,
            est.error_bound
        );
        assert!(est.error_bound <= 1e-7, "error bound {} too loose", est.error_bound);
    }
}
