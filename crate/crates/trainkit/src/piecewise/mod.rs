//! Exact piecewise geometry.
//!
//! Every piece is stored relative to an anchor point. Support membership and
//! evaluation work on the offset `x - anchor`, which stays exact in binary64
//! whenever `x` sits near the anchor (Sterbenz), even when the absolute
//! endpoint `anchor + offset` is not representable. That is what keeps apex
//! values and dyadic breakpoints bit-exact out to index 50, where the raw
//! slope/intercept form has already lost the constant term to rounding.

mod combined;
mod integrate;
mod segments;
mod sup;
mod train;

pub use combined::{combine, CombinedFunction, FinitePiecewise, Term};
pub use integrate::{integrate_abs, IntegralEstimate};
pub use segments::{segments, Partition, Segment};
pub use sup::{sup_abs, SupBound};
pub use train::{train_power, train_product, LazyTrain, TrainKind, MAX_SHIFT};

pub(crate) use integrate::integrate_abs_split;
pub(crate) use segments::seg_value;
pub(crate) use sup::segment_sup;

use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// A real interval with independently closed or open endpoints.
/// `hi` may be `+inf` for tail queries; `lo` must be finite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
    pub closed_lo: bool,
    pub closed_hi: bool,
}

impl Interval {
    pub fn new(lo: f64, hi: f64, closed_lo: bool, closed_hi: bool) -> Result<Self> {
        if !lo.is_finite() || hi.is_nan() || lo > hi {
            return Err(Error::Parameter(format!("bad interval [{lo}, {hi}]")));
        }
        Ok(Self { lo, hi, closed_lo, closed_hi })
    }

    /// Closed interval `[lo, hi]`.
    pub fn closed(lo: f64, hi: f64) -> Result<Self> {
        Self::new(lo, hi, true, true)
    }

    pub fn contains(&self, x: f64) -> bool {
        let above = if self.closed_lo { x >= self.lo } else { x > self.lo };
        let below = if self.closed_hi { x <= self.hi } else { x < self.hi };
        above && below
    }

    pub fn length(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn intersects(&self, other: &Interval) -> bool {
        self.lo <= other.hi && other.lo <= self.hi
    }
}

/// Shape of a single piece, parameterized relative to the owning `Piece`'s anchor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum PieceKind {
    /// `y0 + slope * (x - anchor)`.
    Affine { slope: f64, y0: f64 },
    /// `c * (a*(x - anchor) + b0)^q`, with the linear part kept in `[0, 1]`
    /// on the support. `q > 0`, `q != 1`.
    AffinePower { c: f64, a: f64, b0: f64, q: f64 },
    /// `height * exp(1 - 1/(1 - u^2))` with `u = (x - anchor)/halfwidth`,
    /// zero outside `|u| < 1`. Infinitely flat at the support boundary.
    SmoothBump { height: f64, halfwidth: f64 },
    Zero,
}

/// One compactly supported piece: a kind anchored at a reference point with
/// offset bounds. Support is `[anchor+lo_off, anchor+hi_off]` with the stated
/// endpoint closedness; membership is decided on the offset, exactly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Piece {
    pub anchor: f64,
    pub lo_off: f64,
    pub hi_off: f64,
    pub closed_lo: bool,
    pub closed_hi: bool,
    pub kind: PieceKind,
}

impl Piece {
    pub fn new(
        anchor: f64,
        lo_off: f64,
        hi_off: f64,
        closed_lo: bool,
        closed_hi: bool,
        kind: PieceKind,
    ) -> Result<Self> {
        if !anchor.is_finite() || !lo_off.is_finite() || !hi_off.is_finite() || lo_off > hi_off {
            return Err(Error::Parameter(format!(
                "bad piece geometry: anchor {anchor}, offsets [{lo_off}, {hi_off}]"
            )));
        }
        Ok(Self { anchor, lo_off, hi_off, closed_lo, closed_hi, kind })
    }

    pub fn contains(&self, x: f64) -> bool {
        let d = x - self.anchor;
        let above = if self.closed_lo { d >= self.lo_off } else { d > self.lo_off };
        let below = if self.closed_hi { d <= self.hi_off } else { d < self.hi_off };
        above && below
    }

    /// Absolute support bounds, rounded to binary64. For pieces narrower than
    /// an ulp of the anchor these collapse; membership via [`Piece::contains`]
    /// stays exact regardless.
    pub fn support(&self) -> Interval {
        Interval {
            lo: self.anchor + self.lo_off,
            hi: self.anchor + self.hi_off,
            closed_lo: self.closed_lo,
            closed_hi: self.closed_hi,
        }
    }

    /// Piece formula at `x`, ignoring support bounds. At the anchor the stored
    /// value is returned directly, which keeps apexes exact and stays finite
    /// even when a sub-denormal width has pushed the slope to infinity.
    pub fn formula_at(&self, x: f64) -> f64 {
        let d = x - self.anchor;
        match self.kind {
            PieceKind::Affine { slope, y0 } => {
                if d == 0.0 {
                    y0
                } else {
                    y0 + slope * d
                }
            }
            PieceKind::AffinePower { c, a, b0, q } => {
                let ell = a * d + b0;
                if ell <= 0.0 {
                    0.0
                } else if q == 1.0 {
                    c * ell
                } else {
                    c * ell.powf(q)
                }
            }
            PieceKind::SmoothBump { height, halfwidth } => {
                let u = d / halfwidth;
                let t = 1.0 - u * u;
                if t <= 0.0 {
                    0.0
                } else {
                    height * (1.0 - 1.0 / t).exp()
                }
            }
            PieceKind::Zero => 0.0,
        }
    }

    /// Value at `x`: the formula on the support, zero outside.
    pub fn value_at(&self, x: f64) -> f64 {
        if self.contains(x) {
            self.formula_at(x)
        } else {
            0.0
        }
    }

    /// A point strictly inside the support where the piece changes monotone
    /// direction, if any. Bumps rise then fall across their anchor; the other
    /// kinds are monotone on their whole support.
    pub fn interior_turn(&self) -> Option<f64> {
        match self.kind {
            PieceKind::SmoothBump { .. } if self.lo_off < 0.0 && self.hi_off > 0.0 => {
                Some(self.anchor)
            }
            _ => None,
        }
    }

    /// Exact |integral| over `[x0, x1]` intersected with the true support.
    /// A bound that equals this piece's own rounded support endpoint snaps to
    /// the exact offset: rounding can land the cut strictly inside the
    /// support, and the strip beyond it belongs to no other segment. Other
    /// bounds are clamped so a steep formula is never extrapolated past the
    /// exact support. `None` when no closed form exists (bumps).
    pub fn abs_integral_closed(&self, x0: f64, x1: f64) -> Option<f64> {
        let d0 = if x0 == self.anchor + self.lo_off {
            self.lo_off
        } else {
            (x0 - self.anchor).max(self.lo_off)
        };
        let d1 = if x1 == self.anchor + self.hi_off {
            self.hi_off
        } else {
            (x1 - self.anchor).min(self.hi_off)
        };
        if d1 <= d0 {
            return Some(0.0);
        }
        match self.kind {
            PieceKind::Zero => Some(0.0),
            PieceKind::Affine { slope, y0 } => {
                let v0 = y0 + slope * d0;
                let v1 = y0 + slope * d1;
                Some(abs_integral_affine(v0, v1, d1 - d0))
            }
            PieceKind::AffinePower { c, a, b0, q } => {
                // antiderivative c*(a d + b0)^(q+1) / (a (q+1)); sign fixed by c
                let l0 = (a * d0 + b0).max(0.0);
                let l1 = (a * d1 + b0).max(0.0);
                let f0 = l0.powf(q + 1.0);
                let f1 = l1.powf(q + 1.0);
                Some((c * (f1 - f0) / (a * (q + 1.0))).abs())
            }
            PieceKind::SmoothBump { .. } => None,
        }
    }
}

/// Exact integral of |affine| given endpoint values over a span of `len`.
pub(crate) fn abs_integral_affine(v0: f64, v1: f64, len: f64) -> f64 {
    if v0 == 0.0 && v1 == 0.0 {
        0.0
    } else if v0 >= 0.0 && v1 >= 0.0 || v0 <= 0.0 && v1 <= 0.0 {
        0.5 * (v0.abs() + v1.abs()) * len
    } else {
        // sign change: two triangles split at the root
        let r = v0 / (v0 - v1); // fraction of len
        0.5 * len * (v0.abs() * r + v1.abs() * (1.0 - r))
    }
}
