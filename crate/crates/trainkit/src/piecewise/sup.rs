//! Certified bounds on `sup |f|` over a bounded window.
//!
//! Per segment the active sum is either resolved exactly (affine sums, a
//! single power plus affine remainder in a shared lattice coordinate, or two
//! pure power groups, all of which have at most one interior critical point)
//! or bracketed by monotone range arithmetic with priority bisection. Cut
//! points are always evaluated directly so that pieces narrower than the
//! binary64 grid still contribute their peak.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::combined::CombinedFunction;
use super::segments::{seg_value, segments, Segment};
use super::PieceKind;

/// Two-sided enclosure of a sup: `lo <= sup|f| <= hi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SupBound {
    pub lo: f64,
    pub hi: f64,
}

impl SupBound {
    pub const ZERO: SupBound = SupBound { lo: 0.0, hi: 0.0 };

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    fn join(self, other: SupBound) -> SupBound {
        SupBound { lo: self.lo.max(other.lo), hi: self.hi.max(other.hi) }
    }
}

const BISECT_REL_SLACK: f64 = 1e-12;
const BISECT_MAX_POPS: usize = 100_000;

/// Closed interval enclosure used for derivative ranges.
#[derive(Debug, Clone, Copy)]
struct Enclosure {
    lo: f64,
    hi: f64,
}

impl Enclosure {
    const ZERO: Enclosure = Enclosure { lo: 0.0, hi: 0.0 };

    fn point(v: f64) -> Enclosure {
        Enclosure { lo: v, hi: v }
    }

    fn span(a: f64, b: f64) -> Enclosure {
        Enclosure { lo: a.min(b), hi: a.max(b) }
    }

    fn add(self, o: Enclosure) -> Enclosure {
        Enclosure { lo: self.lo + o.lo, hi: self.hi + o.hi }
    }

    fn scale(self, k: f64) -> Enclosure {
        Enclosure::span(k * self.lo, k * self.hi)
    }

    fn mul(self, o: Enclosure) -> Enclosure {
        let c = [self.lo * o.lo, self.lo * o.hi, self.hi * o.lo, self.hi * o.hi];
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for v in c {
            lo = lo.min(v);
            hi = hi.max(v);
        }
        Enclosure { lo, hi }
    }

    fn sign_definite(&self) -> bool {
        self.lo > 0.0 || self.hi < 0.0
    }
}

/// Certified `sup |f|` over `[lo, hi]`.
pub fn sup_abs(f: &CombinedFunction, lo: f64, hi: f64) -> SupBound {
    assert!(lo.is_finite() && hi.is_finite() && lo <= hi, "window must be bounded");
    let part = segments(f, lo, hi);

    let mut bound = SupBound::ZERO;
    for x in &part.points {
        let v = f.value_at(*x).abs();
        bound = bound.join(SupBound { lo: v, hi: v });
    }
    for seg in &part.segments {
        bound = bound.join(segment_sup(seg));
    }
    bound
}

pub(crate) fn segment_sup(seg: &Segment) -> SupBound {
    if seg.parts.is_empty() {
        return SupBound::ZERO;
    }
    if let Some(b) = exact_sup(seg) {
        return b;
    }
    bisect_sup(seg)
}

/// Groups the active pieces of one segment by shape. Powers only group when
/// they share the anchor lattice `(anchor, a, b0)`, so a single coordinate
/// `l = a (x - anchor) + b0` describes them all.
struct Grouped {
    /// summed slope of everything affine in x (plain affine and q = 1 powers)
    affine_slope: f64,
    has_affine: bool,
    /// (anchor, a, b0) shared by all power pieces, if consistent
    lattice: Option<(f64, f64, f64)>,
    /// (total coefficient, exponent) per distinct exponent, q != 1
    powers: Vec<(f64, f64)>,
}

fn group(seg: &Segment) -> Option<Grouped> {
    let mut g = Grouped {
        affine_slope: 0.0,
        has_affine: false,
        lattice: None,
        powers: Vec::new(),
    };
    for (c, p) in &seg.parts {
        match p.kind {
            PieceKind::Zero => {}
            PieceKind::Affine { slope, .. } => {
                g.affine_slope += c * slope;
                g.has_affine = true;
            }
            PieceKind::AffinePower { c: pc, a, b0, q } => {
                if q == 1.0 {
                    g.affine_slope += c * pc * a;
                    g.has_affine = true;
                    continue;
                }
                match g.lattice {
                    None => g.lattice = Some((p.anchor, a, b0)),
                    Some(l) if l == (p.anchor, a, b0) => {}
                    Some(_) => return None,
                }
                match g.powers.iter_mut().find(|(_, e)| *e == q) {
                    Some(entry) => entry.0 += c * pc,
                    None => g.powers.push((c * pc, q)),
                }
            }
            PieceKind::SmoothBump { .. } => return None,
        }
    }
    g.powers.retain(|(c, _)| *c != 0.0);
    Some(g)
}

/// Exact sup when the segment sum has at most one interior critical point
/// with a closed form.
fn exact_sup(seg: &Segment) -> Option<SupBound> {
    let g = group(seg)?;
    let ends = [seg.lo, seg.hi];
    let endpoint_max = ends
        .iter()
        .map(|x| seg_value(&seg.parts, *x).abs())
        .fold(0.0f64, f64::max);

    let critical = match g.powers.len() {
        0 => None, // affine sum, endpoints suffice
        1 => {
            let (cc, q) = g.powers[0];
            let (anchor, a, b0) = g.lattice?;
            let s = g.affine_slope;
            if s == 0.0 {
                None // single monotone power
            } else {
                // d/dx [cc l^q] = cc q a l^(q-1); root of cc q a l^(q-1) + s
                let base = -s / (cc * q * a);
                if base > 0.0 {
                    let l = base.powf(1.0 / (q - 1.0));
                    Some(anchor + (l - b0) / a)
                } else {
                    None
                }
            }
        }
        2 if !g.has_affine => {
            let (c1, q1) = g.powers[0];
            let (c2, q2) = g.powers[1];
            let (anchor, a, b0) = g.lattice?;
            // c1 q1 l^(q1-1) + c2 q2 l^(q2-1) = 0
            let base = -(c2 * q2) / (c1 * q1);
            if base > 0.0 {
                let l = base.powf(1.0 / (q1 - q2));
                Some(anchor + (l - b0) / a)
            } else {
                None
            }
        }
        _ => return None,
    };

    let mut m = endpoint_max;
    if let Some(x) = critical {
        if x.is_finite() && x > seg.lo && x < seg.hi {
            m = m.max(seg_value(&seg.parts, x).abs());
        }
    }
    Some(SupBound { lo: m, hi: m })
}

/// Range of the segment sum over `[a, b]` from per-piece monotonicity:
/// every piece attains its extremes at the endpoints.
fn monotone_range(seg: &Segment, a: f64, b: f64) -> (f64, f64) {
    let mut lo = 0.0;
    let mut hi = 0.0;
    for (c, p) in &seg.parts {
        let v0 = c * p.formula_at(a);
        let v1 = c * p.formula_at(b);
        lo += v0.min(v1);
        hi += v0.max(v1);
    }
    (lo, hi)
}

/// exp(1 - 1/t) / t^2, the shape factor of the bump derivative; unimodal in t
/// with its peak at t = 1/2, and 0 by continuity at t = 0.
fn bump_shape(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else {
        (1.0 - 1.0 / t).exp() / (t * t)
    }
}

/// Enclosure of the derivative of one piece formula over `[a, b]`, assumed to
/// lie inside the support on one side of any interior turn.
fn derivative_range(p: &super::Piece, a: f64, b: f64) -> Enclosure {
    match p.kind {
        super::PieceKind::Zero => Enclosure::ZERO,
        super::PieceKind::Affine { slope, .. } => Enclosure::point(slope),
        super::PieceKind::AffinePower { c, a: lat, b0, q } => {
            // d/dx of c l^q is c q lat l^(q-1), monotone in l
            let la = (lat * (a - p.anchor) + b0).max(0.0);
            let lb = (lat * (b - p.anchor) + b0).max(0.0);
            let k = c * q * lat;
            Enclosure::span(la.powf(q - 1.0), lb.powf(q - 1.0)).scale(k)
        }
        super::PieceKind::SmoothBump { height, halfwidth } => {
            // B'(x) = -2 H / hw * u * shape(1 - u^2)
            let ua = (a - p.anchor) / halfwidth;
            let ub = (b - p.anchor) / halfwidth;
            let (ta, tb) = (1.0 - ua * ua, 1.0 - ub * ub);
            let (tlo, thi) = (ta.min(tb).max(0.0), ta.max(tb).min(1.0));
            let shape = if tlo <= 0.5 && 0.5 <= thi {
                Enclosure {
                    lo: bump_shape(tlo).min(bump_shape(thi)),
                    hi: bump_shape(0.5),
                }
            } else {
                Enclosure::span(bump_shape(tlo), bump_shape(thi))
            };
            Enclosure::span(ua, ub)
                .mul(shape)
                .scale(-2.0 * height / halfwidth)
        }
    }
}

fn derivative_enclosure(seg: &Segment, a: f64, b: f64) -> Enclosure {
    let mut acc = Enclosure::ZERO;
    for (c, p) in &seg.parts {
        acc = acc.add(derivative_range(p, a, b).scale(*c));
    }
    acc
}

struct Node {
    bound: f64,
    a: f64,
    b: f64,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.bound == other.bound
    }
}
impl Eq for Node {}
impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Node {
    fn cmp(&self, other: &Self) -> Ordering {
        self.bound.total_cmp(&other.bound)
    }
}

/// Examines `[a, b]`: a sign-definite derivative sum means the segment sum is
/// monotone there, so its sup is an endpoint value and the node dissolves
/// into the witness. Otherwise the node stays with a range bound.
fn examine(seg: &Segment, a: f64, b: f64, best_lo: &mut f64) -> Option<Node> {
    let va = seg_value(&seg.parts, a).abs();
    let vb = seg_value(&seg.parts, b).abs();
    *best_lo = best_lo.max(va).max(vb);
    if derivative_enclosure(seg, a, b).sign_definite() {
        return None;
    }
    let (lo, hi) = monotone_range(seg, a, b);
    let bound = lo.abs().max(hi.abs());
    let mid = 0.5 * (a + b);
    if mid > a && mid < b {
        *best_lo = best_lo.max(seg_value(&seg.parts, mid).abs());
    }
    Some(Node { bound, a, b })
}

/// Priority bisection. Monotone pruning keeps the live set down to the
/// chains around interior critical points, so the bound tightens linearly
/// in the refinement depth rather than in the node count.
fn bisect_sup(seg: &Segment) -> SupBound {
    let mut best_lo = 0.0f64;
    let mut heap = BinaryHeap::new();
    if let Some(n) = examine(seg, seg.lo, seg.hi, &mut best_lo) {
        heap.push(n);
    }

    let mut pops = 0usize;
    while let Some(top) = heap.pop() {
        let slack = top.bound - best_lo;
        if slack <= BISECT_REL_SLACK * best_lo.max(1.0) || pops >= BISECT_MAX_POPS {
            heap.push(top);
            break;
        }
        pops += 1;
        let mid = 0.5 * (top.a + top.b);
        if mid <= top.a || mid >= top.b {
            heap.push(top);
            break;
        }
        for (a, b) in [(top.a, mid), (mid, top.b)] {
            if let Some(n) = examine(seg, a, b, &mut best_lo) {
                if n.bound > best_lo {
                    heap.push(n);
                }
            }
        }
    }
    let hi = heap.peek().map(|n| n.bound).unwrap_or(best_lo).max(best_lo);
    SupBound { lo: best_lo, hi }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::piecewise::combined::combine;
    use crate::piecewise::{LazyTrain, TrainKind};

    fn dense_grid_sup(f: &CombinedFunction, lo: f64, hi: f64, n: usize) -> f64 {
        // breakpoint-aware grid: uniform samples plus every cut point
        let part = segments(f, lo, hi);
        let mut best = 0.0f64;
        for x in &part.points {
            best = best.max(f.value_at(*x).abs());
        }
        for seg in &part.segments {
            for i in 0..=n {
                let x = seg.lo + (seg.hi - seg.lo) * (i as f64) / (n as f64);
                best = best.max(f.value_at(x).abs());
            }
        }
        best
    }

    #[test]
    fn triangle_peaks_are_found_exactly() {
        let f: CombinedFunction =
            LazyTrain::new(TrainKind::Triangle, 1, 0.0).unwrap().into();
        for n in [1u32, 2, 7, 30, 50] {
            let b = sup_abs(&f, (n as f64) - 0.5, (n as f64) + 0.5);
            assert_eq!(b.lo, n as f64, "window around {n}");
            assert_eq!(b.hi, n as f64);
        }
    }

    #[test]
    fn power_train_sup_matches_peak() {
        let g = LazyTrain::new(TrainKind::Power { p: 2.0 }, 1, 0.0).unwrap();
        let f: CombinedFunction = g.into();
        let b = sup_abs(&f, 0.0, 4.5);
        assert_eq!(b.lo, 16.0);
        assert_eq!(b.hi, 16.0);
    }

    #[test]
    fn power_difference_interior_extremum() {
        // two power trains at the same lattice, difference has an interior
        // critical point inside each spike
        let g1 = LazyTrain::new(TrainKind::Power { p: 2.0f64.ln() }, 1, 0.0).unwrap();
        let g2 = LazyTrain::new(TrainKind::Power { p: 2.0 }, 1, 0.0).unwrap();
        let f = combine(&[(1.0, g1), (-1.0, g2)]).unwrap();
        let b = sup_abs(&f, 2.5, 3.5);
        let grid = dense_grid_sup(&f, 2.5, 3.5, 20_000);
        assert!(b.lo <= b.hi);
        assert!(grid <= b.hi + 1e-12 * grid.max(1.0), "grid {grid} vs hi {}", b.hi);
        assert!(b.lo >= grid - 1e-9 * grid.max(1.0), "lo {} vs grid {grid}", b.lo);
        assert!(b.width() <= 1e-12 * b.lo.max(1.0));
    }

    #[test]
    fn smooth_bump_bisection_brackets_grid_oracle() {
        let s = LazyTrain::new(TrainKind::Smooth, 1, 0.0).unwrap();
        let t = LazyTrain::new(TrainKind::Triangle, 1, 0.0).unwrap();
        let f = combine(&[(1.0, s), (-1.0, t)]).unwrap();
        let b = sup_abs(&f, 1.5, 2.5);
        let grid = dense_grid_sup(&f, 1.5, 2.5, 50_000);
        assert!(b.lo <= grid + 1e-9);
        assert!(b.hi >= grid - 1e-12);
        assert!(b.width() <= 1e-10 * grid.max(1.0), "width {}", b.width());
    }

    #[test]
    fn narrow_piece_far_out_still_counted() {
        // at n = 50 the spike is narrower than one ulp of 50; only the point
        // candidates can see it
        let f: CombinedFunction =
            LazyTrain::new(TrainKind::Triangle, 1, 0.0).unwrap().into();
        let b = sup_abs(&f, 49.5, 50.5);
        assert_eq!(b.lo, 50.0);
    }

    #[test]
    fn cancelling_combination_sup_is_zero() {
        let a = LazyTrain::new(TrainKind::Triangle, 1, 0.0).unwrap();
        let f = combine(&[(1.0, a.clone()), (-1.0, a)]).unwrap();
        let b = sup_abs(&f, 0.0, 6.0);
        assert_eq!(b.lo, 0.0);
        assert_eq!(b.hi, 0.0);
    }

    #[test]
    fn window_of_zero_width_evaluates_the_point() {
        let f: CombinedFunction =
            LazyTrain::new(TrainKind::Triangle, 1, 0.0).unwrap().into();
        let b = sup_abs(&f, 3.0, 3.0);
        assert_eq!(b.lo, 3.0);
        assert_eq!(b.hi, 3.0);
    }
}
