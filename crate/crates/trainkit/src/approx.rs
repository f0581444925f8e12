//! Constructive approximation with fully accounted error budgets.
//!
//! A polygonal approximant of a combination is assembled from the natural
//! breakpoints plus adaptive refinement, cut off at an index chosen from the
//! target accuracy, and finished with a linear ramp to zero. Every source of
//! discrepancy is a line item in the returned certificate, and the achieved
//! distance is re-measured with the metric itself rather than trusted.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::families::make_cutoff_polygonal;
use crate::metrics::{
    dc0_distance, dx_at_depth, dx_distance, FuncSeq, MetricValue, ToleranceConfig,
};
use crate::piecewise::{
    seg_value, segment_sup, segments, CombinedFunction, FinitePiecewise, LazyTrain, Piece,
    PieceKind, Segment, Term,
};
use crate::{Error, Result};

/// One accounted error source: the measured `value` against the `bound` the
/// construction promised for it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BudgetItem {
    pub label: String,
    pub value: f64,
    pub bound: f64,
}

impl BudgetItem {
    fn new(label: &str, value: f64, bound: f64) -> Self {
        BudgetItem { label: label.to_string(), value, bound }
    }

    pub fn holds(&self) -> bool {
        self.value <= self.bound
    }
}

/// Certificate for one polygonal approximant.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ApproxCertificate {
    pub epsilon: f64,
    /// re-measured distance between the target and the approximant
    pub achieved: MetricValue,
    pub cutoff_index: u32,
    pub ramp_width: f64,
    pub knots: usize,
    pub budget: Vec<BudgetItem>,
}

const MAX_KNOTS: usize = 1_000_000;
const MAX_CUTOFF: u32 = 200;
const MAX_REFINE_DEPTH: u32 = 60;

/// Builds a compactly supported polygonal chain within `eps` of `f` in the
/// combined metric, with the distance re-measured and certified.
pub fn polygonal_approximant(
    f: &CombinedFunction,
    eps: f64,
    cfg: &ToleranceConfig,
) -> Result<(Arc<FinitePiecewise>, ApproxCertificate)> {
    cfg.validate()?;
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(Error::Parameter(format!("target accuracy must be positive, got {eps}")));
    }
    if f.terms().is_empty() {
        let chain = Arc::new(FinitePiecewise::empty());
        return Ok((
            Arc::clone(&chain),
            ApproxCertificate {
                epsilon: eps,
                achieved: MetricValue::EXACT_ZERO,
                cutoff_index: 0,
                ramp_width: 0.0,
                knots: 0,
                budget: Vec::new(),
            },
        ));
    }

    let slice = eps / 6.0;
    let (cutoff, mass_tail) = choose_cutoff(f, slice)?;
    let series_tail = 2f64.powi(-(cutoff as i32));

    // refine until every knot interval carries at most half the per-interval
    // share of the sup budget
    let chord_tol = eps / (12.0 * cutoff as f64);
    let (knots, chord_sup) = refine_knots(f, cutoff as f64, chord_tol)?;

    let body = FinitePiecewise::from_knots(&knots)?;
    let value_at_cut = body.value_at(cutoff as f64).abs();
    let ramp_width = eps / (6.0 * (1.0 + value_at_cut));
    let chain = make_cutoff_polygonal(&body, cutoff, ramp_width)?;

    let p: CombinedFunction = Arc::clone(&chain).into();
    let achieved = dx_distance(f, &p, cfg)?;
    let deeper = dx_at_depth(f, &p, cfg, 62)?;

    let budget = vec![
        BudgetItem::new("series-weight-beyond-cutoff", series_tail, slice),
        BudgetItem::new("mass-beyond-cutoff", mass_tail, slice),
        BudgetItem::new("chord-sup-error", chord_sup, slice),
        BudgetItem::new("chord-mass-error", chord_sup * cutoff as f64, slice),
        BudgetItem::new("ramp-mass", value_at_cut * ramp_width * 0.5, slice),
        BudgetItem::new(
            "depth-stability",
            (deeper.value - achieved.value).abs(),
            2f64.powi(-30),
        ),
    ];
    let cert = ApproxCertificate {
        epsilon: eps,
        achieved,
        cutoff_index: cutoff,
        ramp_width,
        knots: chain.len() + 1,
        budget,
    };
    if achieved.value + achieved.error_bound > eps {
        return Err(Error::Budget(format!(
            "approximant landed at {} + {} against a target of {eps}",
            achieved.value, achieved.error_bound
        )));
    }
    for item in &cert.budget {
        if !item.holds() {
            return Err(Error::Budget(format!(
                "budget item {} measured {} over its bound {}",
                item.label, item.value, item.bound
            )));
        }
    }
    Ok((chain, cert))
}

/// Smallest cutoff whose series weight and whose remaining spike mass both
/// fit in one budget slice.
fn choose_cutoff(f: &CombinedFunction, slice: f64) -> Result<(u32, f64)> {
    for n in 1..=MAX_CUTOFF {
        if 2f64.powi(-(n as i32)) >= slice {
            continue;
        }
        let mut mass = 0.0f64;
        for (c, term) in f.terms() {
            match term {
                Term::Train(t) => mass += c.abs() * t.l1_tail_bound(n),
                Term::Finite(fp) => {
                    if fp.end_x() > n as f64 {
                        mass = f64::INFINITY;
                    }
                }
            }
        }
        if mass <= slice {
            return Ok((n, mass));
        }
    }
    Err(Error::Budget(format!(
        "no cutoff below {MAX_CUTOFF} brings the tail under {slice:e}"
    )))
}

/// Knot chain over `[0, cut]` whose chords stay within `tol` of `f` on every
/// interval, by certified sup bounds. Returns the knots and the largest
/// certified chord error.
fn refine_knots(
    f: &CombinedFunction,
    cut: f64,
    tol: f64,
) -> Result<(Vec<(f64, f64)>, f64)> {
    let part = segments(f, 0.0, cut);
    let mut knots: Vec<(f64, f64)> = Vec::new();
    let mut worst = 0.0f64;

    for seg in &part.segments {
        if knots.is_empty() {
            knots.push((seg.lo, seg_value(&seg.parts, seg.lo)));
        }
        // intervals pending refinement within this segment, deepest last
        let mut stack: Vec<(f64, f64, u32)> = vec![(seg.lo, seg.hi, 0)];
        let mut accepted: Vec<(f64, f64)> = Vec::new();
        while let Some((a, b, depth)) = stack.pop() {
            let err = chord_error(seg, a, b);
            let mid = 0.5 * (a + b);
            if err.hi <= tol || depth >= MAX_REFINE_DEPTH || mid <= a || mid >= b {
                worst = worst.max(err.hi);
                accepted.push((b, seg_value(&seg.parts, b)));
                continue;
            }
            // push right first so the left half is processed next
            stack.push((mid, b, depth + 1));
            stack.push((a, mid, depth + 1));
            if knots.len() + accepted.len() + stack.len() > MAX_KNOTS {
                return Err(Error::Budget(format!(
                    "refinement exceeded {MAX_KNOTS} knots at tolerance {tol:e}"
                )));
            }
        }
        knots.extend(accepted);
    }
    Ok((knots, worst))
}

/// Certified sup of `|f - chord|` over `[a, b]`, where the chord interpolates
/// the segment sum at the endpoints.
fn chord_error(seg: &Segment, a: f64, b: f64) -> crate::piecewise::SupBound {
    let fa = seg_value(&seg.parts, a);
    let fb = seg_value(&seg.parts, b);
    let slope = if b > a { (fb - fa) / (b - a) } else { 0.0 };
    let chord = Piece {
        anchor: a,
        lo_off: 0.0,
        hi_off: b - a,
        closed_lo: true,
        closed_hi: true,
        kind: PieceKind::Affine { slope, y0: fa },
    };
    let mut parts = seg.parts.clone();
    parts.push((-1.0, chord));
    segment_sup(&Segment { lo: a, hi: b, parts })
}

/// Certificate for a sequencewise approximation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SeqApproxCertificate {
    pub epsilon: f64,
    pub achieved: MetricValue,
    /// how many leading elements got explicit chains
    pub elements: u32,
    pub budget: Vec<BudgetItem>,
}

const MAX_SEQ_ELEMENTS: u32 = 300;

/// Approximates a tail sequence elementwise: explicit chains while the
/// elements stay large, zero once the tail bound fits half the budget.
pub fn sequence_approximant(
    seq: &FuncSeq,
    eps: f64,
    cfg: &ToleranceConfig,
) -> Result<(FuncSeq, SeqApproxCertificate)> {
    cfg.validate()?;
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(Error::Parameter(format!("target accuracy must be positive, got {eps}")));
    }
    let base = match seq {
        FuncSeq::TailTrains { base } => base,
        _ => {
            return Err(Error::Unsupported(
                "sequencewise approximation expects a tail-train sequence".into(),
            ))
        }
    };

    let mut elements = 0u32;
    while tail_bound(base, elements + 1) > eps / 2.0 {
        elements += 1;
        if elements > MAX_SEQ_ELEMENTS {
            return Err(Error::Budget(format!(
                "tail bound never reached {:e} within {MAX_SEQ_ELEMENTS} elements",
                eps / 2.0
            )));
        }
    }

    let mut prefix = Vec::with_capacity(elements as usize);
    for n in 1..=elements {
        let (chain, _) = polygonal_approximant(&seq.element(n), eps / 2.0, cfg)?;
        prefix.push(chain);
    }
    let approx = FuncSeq::Chain { prefix };
    let achieved = dc0_distance(seq, &approx, cfg)?;
    let cut_tail = tail_bound(base, elements + 1);
    let budget = vec![
        BudgetItem::new("per-element-target", eps / 2.0, eps / 2.0),
        BudgetItem::new("tail-at-cut", cut_tail, eps / 2.0),
    ];
    if achieved.value + achieved.error_bound > eps {
        return Err(Error::Budget(format!(
            "sequence approximant landed at {} + {} against a target of {eps}",
            achieved.value, achieved.error_bound
        )));
    }
    Ok((
        approx,
        SeqApproxCertificate { epsilon: eps, achieved, elements, budget },
    ))
}

/// Distance-to-zero bound for the n-th tail element, mirroring the stopping
/// rule of the sequence metric.
fn tail_bound(base: &LazyTrain, n: u32) -> f64 {
    let m = n.max(base.start());
    base.l1_tail_bound(m) + 2f64.powi(1 - m as i32)
}

/// Certificate for a growing-spike perturbation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PerturbCertificate {
    pub epsilon: f64,
    /// index of the first spike; earlier gaps stay empty
    pub first_index: u32,
    /// total spike mass, at most a quarter of epsilon
    pub mass_bound: f64,
    /// measured distance the perturbation moves the function
    pub moved: MetricValue,
    /// floor the witness value clears
    pub height: f64,
    /// a point where the perturbed function exceeds the requested floor
    pub witness_x: f64,
    pub witness_value: f64,
}

/// Unbounded-but-small perturbation: spikes of height `height + m` in the
/// support gaps, starting far enough out that the metric barely sees them.
/// The perturbed function clears the requested floor at the witness, keeps
/// climbing after it, and still moves by less than `eps`.
pub fn bump_perturb(
    base: &LazyTrain,
    eps: f64,
    height: f64,
    cfg: &ToleranceConfig,
) -> Result<(LazyTrain, PerturbCertificate)> {
    cfg.validate()?;
    if !(eps > 0.0) || !(eps < 1.0) {
        return Err(Error::Parameter(format!(
            "perturbation size must lie in (0, 1), got {eps}"
        )));
    }
    if !height.is_finite() || height < 0.0 {
        return Err(Error::Parameter(format!(
            "witness floor must be finite and nonnegative, got {height}"
        )));
    }
    let mut first = 1u32;
    while 2f64.powi(1 - first as i32) >= eps / 2.0 {
        first += 1;
        if first > 2000 {
            return Err(Error::Budget("perturbation start index ran away".into()));
        }
    }
    let spikes = LazyTrain::new(
        crate::piecewise::TrainKind::Spike { base: height, eps, first },
        1,
        base.shift(),
    )?;
    let g: CombinedFunction = spikes.clone().into();
    let moved = dx_distance(&g, &CombinedFunction::zero(), cfg)?;
    if moved.value + moved.error_bound > eps {
        return Err(Error::Budget(format!(
            "perturbation moved the function by {} against a target of {eps}",
            moved.value
        )));
    }
    // the first spike already peaks at height + 1, and the base train
    // vanishes between its pieces, so the sum clears the floor right there
    let witness_x = spikes.center(1);
    let witness_value = base.value_at(witness_x) + spikes.value_at(witness_x);
    Ok((
        spikes,
        PerturbCertificate {
            epsilon: eps,
            first_index: first,
            mass_bound: eps * 0.25,
            moved,
            height,
            witness_x,
            witness_value,
        },
    ))
}
