//! Function-space metrics with certified error bounds.
//!
//! Every routine returns a `MetricValue` whose `error_bound` covers all
//! truncation and quadrature error committed along the way. The series metric
//! cuts its sum at a depth chosen from the requested tolerance and charges
//! the geometric tail to the bound.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::piecewise::{
    integrate_abs_split, sup_abs, CombinedFunction, FinitePiecewise, LazyTrain, SupBound,
};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ToleranceConfig {
    /// target accuracy of the series metric; sets its truncation depth
    pub metric_tol: f64,
    /// budget handed to adaptive quadrature
    pub quad_tol: f64,
    /// budget for cutting infinite series and unbounded integrals
    pub series_tail_tol: f64,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        ToleranceConfig { metric_tol: 1e-9, quad_tol: 1e-12, series_tail_tol: 1e-12 }
    }
}

impl ToleranceConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("metric_tol", self.metric_tol),
            ("quad_tol", self.quad_tol),
            ("series_tail_tol", self.series_tail_tol),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::Parameter(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

/// A computed quantity with a certified two-sided error bound and the series
/// depth (or tail cut index) that produced it.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct MetricValue {
    pub value: f64,
    pub error_bound: f64,
    pub truncation_index: u32,
}

impl MetricValue {
    pub const EXACT_ZERO: MetricValue =
        MetricValue { value: 0.0, error_bound: 0.0, truncation_index: 0 };
}

/// Depth at which the remaining geometric series weight drops below half the
/// tolerance; capped because binary64 cannot resolve past 2^-64 anyway.
pub fn auto_depth(metric_tol: f64) -> u32 {
    let n = (2.0 / metric_tol).log2().ceil();
    (n.max(1.0) as u32).min(64)
}

/// Integral of `|f|` over the half line.
pub fn l1_norm(f: &CombinedFunction, cfg: &ToleranceConfig) -> Result<MetricValue> {
    cfg.validate()?;
    let (est, cut) =
        integrate_abs_split(f, 0.0, f64::INFINITY, cfg.quad_tol, cfg.series_tail_tol)?;
    Ok(MetricValue {
        value: est.value,
        error_bound: est.error_bound,
        truncation_index: cut,
    })
}

/// `sup |f|` over `[0, n]`, the n-th seminorm of the series metric.
pub fn sup_norm_window(f: &CombinedFunction, n: u32) -> Result<MetricValue> {
    if n == 0 {
        return Err(Error::Parameter("window index must be at least 1".into()));
    }
    let b = sup_abs(f, 0.0, n as f64);
    Ok(MetricValue { value: b.hi, error_bound: b.width(), truncation_index: 0 })
}

/// The combined metric: L1 distance plus the weighted series of saturated
/// window seminorms, truncated at a depth derived from `metric_tol`.
pub fn dx_distance(
    f: &CombinedFunction,
    g: &CombinedFunction,
    cfg: &ToleranceConfig,
) -> Result<MetricValue> {
    cfg.validate()?;
    dx_at_depth(f, g, cfg, auto_depth(cfg.metric_tol))
}

/// Same metric with an explicit truncation depth; the geometric tail past the
/// depth is charged to the error bound.
pub fn dx_at_depth(
    f: &CombinedFunction,
    g: &CombinedFunction,
    cfg: &ToleranceConfig,
    depth: u32,
) -> Result<MetricValue> {
    cfg.validate()?;
    if depth == 0 {
        return Err(Error::Parameter("series depth must be at least 1".into()));
    }
    let diff = f.sub(g);
    if diff.terms().is_empty() {
        // structural cancellation; both sides were the same combination
        return Ok(MetricValue::EXACT_ZERO);
    }
    let (l1, _) =
        integrate_abs_split(&diff, 0.0, f64::INFINITY, cfg.quad_tol, cfg.series_tail_tol)?;

    let mut cum = SupBound::ZERO;
    let mut series = 0.0f64;
    let mut slack = 0.0f64;
    for k in 1..=depth {
        let b = sup_abs(&diff, (k - 1) as f64, k as f64);
        cum = SupBound { lo: cum.lo.max(b.lo), hi: cum.hi.max(b.hi) };
        let w = 2f64.powi(-(k as i32));
        series += w * saturate(cum.hi);
        slack += w * (saturate(cum.hi) - saturate(cum.lo));
    }
    let tail = 2f64.powi(-(depth as i32));

    Ok(MetricValue {
        value: l1.value + series,
        error_bound: l1.error_bound + slack + tail,
        truncation_index: depth,
    })
}

fn saturate(s: f64) -> f64 {
    if s.is_infinite() {
        1.0
    } else {
        s / (1.0 + s)
    }
}

/// A sequence of functions indexed from 1, as fed to the sequence-space
/// metric.
#[derive(Debug, Clone)]
pub enum FuncSeq {
    /// n-th element keeps the spikes of `base` from index n on
    TailTrains { base: LazyTrain },
    /// finitely many explicit chains, zero beyond them
    Chain { prefix: Vec<Arc<FinitePiecewise>> },
    Zero,
}

impl FuncSeq {
    pub fn element(&self, n: u32) -> CombinedFunction {
        assert!(n >= 1, "sequence index is 1-based");
        match self {
            FuncSeq::TailTrains { base } => base.tail_from(n).into(),
            FuncSeq::Chain { prefix } => match prefix.get(n as usize - 1) {
                Some(p) => Arc::clone(p).into(),
                None => CombinedFunction::zero(),
            },
            FuncSeq::Zero => CombinedFunction::zero(),
        }
    }

    /// Upper bound on the metric distance of the n-th element to zero,
    /// infinite where no cheap bound exists.
    fn tail_bound(&self, n: u32) -> f64 {
        match self {
            FuncSeq::TailTrains { base } => {
                let m = n.max(base.start());
                // spikes from index m live right of m - 1, so only series
                // weights from m on can see them
                base.l1_tail_bound(m) + 2f64.powi(1 - m as i32)
            }
            FuncSeq::Chain { prefix } => {
                if n as usize > prefix.len() {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
            FuncSeq::Zero => 0.0,
        }
    }

    fn same(&self, other: &FuncSeq) -> bool {
        match (self, other) {
            (FuncSeq::Zero, FuncSeq::Zero) => true,
            (FuncSeq::TailTrains { base: a }, FuncSeq::TailTrains { base: b }) => a == b,
            (FuncSeq::Chain { prefix: a }, FuncSeq::Chain { prefix: b }) => {
                a.len() == b.len()
                    && a.iter().zip(b.iter()).all(|(x, y)| Arc::ptr_eq(x, y))
            }
            _ => false,
        }
    }
}

const DC0_MAX_ELEMENTS: u32 = 300;

/// Supremum over n of the combined metric between the n-th elements. Stops
/// once the remaining elements provably stay under the running maximum.
pub fn dc0_distance(a: &FuncSeq, b: &FuncSeq, cfg: &ToleranceConfig) -> Result<MetricValue> {
    cfg.validate()?;
    if a.same(b) {
        return Ok(MetricValue::EXACT_ZERO);
    }
    let mut best = 0.0f64;
    let mut err = 0.0f64;
    let mut n = 1u32;
    loop {
        let d = dx_distance(&a.element(n), &b.element(n), cfg)?;
        best = best.max(d.value);
        err = err.max(d.error_bound);
        let remaining = a.tail_bound(n + 1) + b.tail_bound(n + 1);
        if remaining <= best.max(cfg.metric_tol) {
            return Ok(MetricValue {
                value: best,
                error_bound: err + (remaining - best).max(0.0),
                truncation_index: n,
            });
        }
        n += 1;
        if n > DC0_MAX_ELEMENTS {
            return Err(Error::Budget(format!(
                "sequence metric did not settle within {DC0_MAX_ELEMENTS} elements"
            )));
        }
    }
}

/// Total width of the spike supports from index n on.
pub fn support_tail_measure(train: &LazyTrain, n: u32) -> Result<MetricValue> {
    if n == 0 {
        return Err(Error::Parameter("tail index is 1-based".into()));
    }
    let n = n.max(train.start());
    if let Some(exact) = train.widths_tail_exact(n) {
        return Ok(MetricValue { value: exact, error_bound: 0.0, truncation_index: n });
    }
    // widths at least halve per step for every kind, so the partial sum
    // converges geometrically and twice the last term bounds the remainder
    let mut acc = 0.0f64;
    let mut m = n;
    loop {
        let w = train.width(m);
        acc += w;
        if w <= 1e-18 * acc.max(f64::MIN_POSITIVE) || m > n + 1200 {
            return Ok(MetricValue {
                value: acc,
                error_bound: 2.0 * w,
                truncation_index: m,
            });
        }
        m += 1;
    }
}
