//! Lazy trains: infinite series of compactly supported pieces on a unit
//! lattice, materialized on demand from per-index closed forms.
//!
//! A train of kind `K` with start index `n0` and shift `t` is the function
//! `sum_{m >= n0} P_m(x - t)` where `P_m` sits near `x = m` with halfwidth at
//! most 1/4. Consecutive supports are separated by gaps, so at any point at
//! most one index is active and a window holds O(len) pieces.

use super::{Piece, PieceKind};
use crate::families::GrowthProfile;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// Maximal shift; keeps shifted supports inside the inter-index gaps.
pub const MAX_SHIFT: f64 = 0.125;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum TrainKind {
    /// Triangles of height `m` and halfwidth `2^-(m+1)`; unit total mass.
    Triangle,
    /// Triangles raised to the power `p` pointwise: height `m^p`, the linear
    /// ramp replaced by `ramp^p`. `p = 1` is the triangle train in power form.
    Power { p: f64 },
    /// Smooth bumps of height `m` and halfwidth `2^-(m+1)`.
    Smooth,
    /// Triangles rescaled by a growth profile: height `m * alpha(m)`,
    /// halfwidth `2^-(m+1) / (m * alpha(m))`, so every piece has mass
    /// `2^-(m+1)` and the peak outruns `alpha` by the factor `m`.
    Alpha { profile: GrowthProfile },
    /// Thin triangular spikes at half-integer centers `first + m - 1/2` with
    /// heights `base + m` and masses at most `eps * 2^-(m+2)`. Used to push a
    /// function past any prescribed bound while moving it by less than `eps`.
    Spike { base: f64, eps: f64, first: u32 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LazyTrain {
    kind: TrainKind,
    start: u32,
    shift: f64,
}

impl LazyTrain {
    pub fn new(kind: TrainKind, start: u32, shift: f64) -> Result<Self> {
        if start == 0 {
            return Err(Error::Parameter("train start index must be >= 1".into()));
        }
        if !(0.0..MAX_SHIFT).contains(&shift) {
            return Err(Error::Parameter(format!("shift {shift} outside [0, 1/8)")));
        }
        match &kind {
            TrainKind::Power { p } => {
                if !p.is_finite() || *p <= 0.0 {
                    return Err(Error::Parameter(format!("power exponent {p} must be > 0")));
                }
            }
            TrainKind::Spike { base, eps, .. } => {
                if !base.is_finite() || *base < 0.0 || !eps.is_finite() || *eps <= 0.0 {
                    return Err(Error::Parameter("spike train needs base >= 0 and eps > 0".into()));
                }
            }
            _ => {}
        }
        Ok(Self { kind, start, shift })
    }

    pub fn kind(&self) -> &TrainKind {
        &self.kind
    }

    pub fn start(&self) -> u32 {
        self.start
    }

    pub fn shift(&self) -> f64 {
        self.shift
    }

    /// Same train translated right by `t` (shifts compose; the total must stay
    /// inside `[0, 1/8)`).
    pub fn translate(&self, t: f64) -> Result<Self> {
        Self::new(self.kind.clone(), self.start, self.shift + t)
    }

    /// Same train with the leading pieces dropped: the tail from `n`.
    /// Raising the start of a valid train cannot fail.
    pub fn tail_from(&self, n: u32) -> Self {
        let mut t = self.clone();
        t.start = n.max(self.start);
        t
    }

    /// Center of the index-`m` piece.
    pub fn center(&self, m: u32) -> f64 {
        match &self.kind {
            TrainKind::Spike { first, .. } => (*first as f64 + m as f64 - 0.5) + self.shift,
            _ => m as f64 + self.shift,
        }
    }

    /// Peak height of the index-`m` piece.
    pub fn peak(&self, m: u32) -> f64 {
        let mf = m as f64;
        match &self.kind {
            TrainKind::Triangle => mf,
            TrainKind::Power { p } => mf.powf(*p),
            TrainKind::Smooth => mf,
            TrainKind::Alpha { profile } => mf * profile.alpha(mf),
            TrainKind::Spike { base, .. } => base + mf,
        }
    }

    pub fn halfwidth(&self, m: u32) -> f64 {
        let dyadic = 2f64.powi(-(m as i32) - 1);
        match &self.kind {
            TrainKind::Triangle | TrainKind::Power { .. } | TrainKind::Smooth => dyadic,
            TrainKind::Alpha { .. } => dyadic / self.peak(m),
            TrainKind::Spike { eps, .. } => (eps * 2f64.powi(-(m as i32) - 2) / self.peak(m))
                .min(MAX_SHIFT),
        }
    }

    /// Exact mass of the index-`m` piece, when a closed form exists.
    pub fn piece_area(&self, m: u32) -> Option<f64> {
        let mf = m as f64;
        match &self.kind {
            TrainKind::Triangle => Some(mf * 2f64.powi(-(m as i32) - 1)),
            TrainKind::Power { p } => Some(mf.powf(*p) * 2f64.powi(-(m as i32)) / (p + 1.0)),
            TrainKind::Smooth => None,
            TrainKind::Alpha { .. } => Some(2f64.powi(-(m as i32) - 1)),
            TrainKind::Spike { .. } => Some(self.peak(m) * self.halfwidth(m)),
        }
    }

    /// Upper bound on the total mass of all pieces with index `>= n`.
    /// Exact for the kinds whose areas telescope; `inf` when the geometric
    /// ratio bound does not yet apply at `n` (caller moves the cut out).
    pub fn l1_tail_bound(&self, n: u32) -> f64 {
        let n = n.max(self.start);
        let nf = n as f64;
        match &self.kind {
            TrainKind::Triangle => (nf + 1.0) * 2f64.powi(-(n as i32)),
            TrainKind::Power { p } => {
                let r = ((nf + 1.0) / nf).powf(*p) / 2.0;
                if r < 0.99 {
                    let term = nf.powf(*p) * 2f64.powi(-(n as i32)) / (p + 1.0);
                    term / (1.0 - r)
                } else {
                    f64::INFINITY
                }
            }
            TrainKind::Smooth => (nf + 1.0) * 2f64.powi(1 - n as i32),
            TrainKind::Alpha { .. } => 2f64.powi(-(n as i32)),
            TrainKind::Spike { eps, .. } => eps * 2f64.powi(-(n as i32) - 1),
        }
    }

    /// Support width of the index-`m` piece.
    pub fn width(&self, m: u32) -> f64 {
        2.0 * self.halfwidth(m)
    }

    /// Exact total width of all supports with index `>= n`, when the widths
    /// form a closed geometric sum.
    pub fn widths_tail_exact(&self, n: u32) -> Option<f64> {
        let n = n.max(self.start);
        match &self.kind {
            TrainKind::Triangle | TrainKind::Power { .. } | TrainKind::Smooth => {
                Some(2f64.powi(1 - n as i32))
            }
            _ => None,
        }
    }

    /// The pieces of index `m`: two monotone halves, or one bump.
    pub fn pieces_at(&self, m: u32) -> Vec<Piece> {
        let c = self.center(m);
        let h = self.halfwidth(m);
        let peak = self.peak(m);
        match &self.kind {
            TrainKind::Triangle | TrainKind::Alpha { .. } | TrainKind::Spike { .. } => {
                let slope = peak / h;
                vec![
                    Piece {
                        anchor: c,
                        lo_off: -h,
                        hi_off: 0.0,
                        closed_lo: true,
                        closed_hi: false,
                        kind: PieceKind::Affine { slope, y0: peak },
                    },
                    Piece {
                        anchor: c,
                        lo_off: 0.0,
                        hi_off: h,
                        closed_lo: true,
                        closed_hi: true,
                        kind: PieceKind::Affine { slope: -slope, y0: peak },
                    },
                ]
            }
            TrainKind::Power { p } => {
                let a = 2f64.powi(m as i32 + 1);
                vec![
                    Piece {
                        anchor: c,
                        lo_off: -h,
                        hi_off: 0.0,
                        closed_lo: true,
                        closed_hi: false,
                        kind: PieceKind::AffinePower { c: peak, a, b0: 1.0, q: *p },
                    },
                    Piece {
                        anchor: c,
                        lo_off: 0.0,
                        hi_off: h,
                        closed_lo: true,
                        closed_hi: true,
                        kind: PieceKind::AffinePower { c: peak, a: -a, b0: 1.0, q: *p },
                    },
                ]
            }
            TrainKind::Smooth => vec![Piece {
                anchor: c,
                lo_off: -h,
                hi_off: h,
                closed_lo: false,
                closed_hi: false,
                kind: PieceKind::SmoothBump { height: peak, halfwidth: h },
            }],
        }
    }

    /// Indices whose support can intersect `[lo, hi]`, in increasing order.
    /// Inverts the support map analytically; cost is O(hi - lo), not O(index).
    pub fn indices_overlapping(&self, lo: f64, hi: f64) -> std::ops::RangeInclusive<u32> {
        debug_assert!(lo.is_finite() && hi.is_finite() && lo <= hi);
        // center(m) is m (+ offset) + shift; halfwidths never exceed 1/4
        let offset = match &self.kind {
            TrainKind::Spike { first, .. } => *first as f64 - 0.5,
            _ => 0.0,
        };
        let m_lo = (lo - self.shift - offset - 0.5).floor().max(self.start as f64);
        let m_hi = (hi - self.shift - offset + 0.5).ceil().max(0.0);
        let m_lo = m_lo.min(u32::MAX as f64) as u32;
        let m_hi = m_hi.min(u32::MAX as f64) as u32;
        m_lo.max(self.start)..=m_hi.max(self.start).max(m_lo)
    }

    /// Pieces whose support intersects the window, tagged with their index.
    pub fn pieces_in(&self, window: &super::Interval) -> Vec<(u32, Piece)> {
        if !window.hi.is_finite() {
            // callers cut unbounded windows first
            debug_assert!(false, "pieces_in needs a bounded window");
        }
        let mut out = Vec::new();
        for m in self.indices_overlapping(window.lo, window.hi) {
            let c = self.center(m);
            let h = self.halfwidth(m);
            if c + h < window.lo || c - h > window.hi {
                continue;
            }
            for p in self.pieces_at(m) {
                let s = p.support();
                if s.intersects(&super::Interval {
                    lo: window.lo,
                    hi: window.hi,
                    closed_lo: true,
                    closed_hi: true,
                }) {
                    out.push((m, p));
                }
            }
        }
        out
    }

    /// Pointwise value; at most one index is active at any `x`.
    pub fn value_at(&self, x: f64) -> f64 {
        let mut v = 0.0;
        for m in self.indices_overlapping(x, x) {
            for p in self.pieces_at(m) {
                if p.contains(x) {
                    v += p.formula_at(x);
                }
            }
        }
        v
    }

    /// Exponent of the power-lattice form, when the pieces are `AffinePower`
    /// on the standard lattice. This is the class closed under pointwise
    /// powers and products.
    pub fn power_exponent(&self) -> Option<f64> {
        match &self.kind {
            TrainKind::Power { p } => Some(*p),
            _ => None,
        }
    }

    /// Canonical textual description, used as a provenance label.
    pub fn describe(&self) -> String {
        let mut s = match &self.kind {
            TrainKind::Triangle => "triangle".to_string(),
            TrainKind::Power { p } => format!("power:p={p}"),
            TrainKind::Smooth => "smooth".to_string(),
            TrainKind::Alpha { profile } => format!("alpha:profile={profile}"),
            TrainKind::Spike { base, eps, first } => {
                format!("spike:base={base}:eps={eps}:first={first}")
            }
        };
        if self.shift != 0.0 {
            s.push_str(&format!(":t={}", self.shift));
        }
        if self.start != 1 {
            s.push_str(&format!(":start={}", self.start));
        }
        s
    }
}

/// Pointwise power `f^r` of a power-lattice train; exponents multiply.
pub fn train_power(f: &LazyTrain, r: f64) -> Result<LazyTrain> {
    if !r.is_finite() || r <= 0.0 {
        return Err(Error::Parameter(format!("power {r} must be positive")));
    }
    match f.power_exponent() {
        Some(p) => LazyTrain::new(TrainKind::Power { p: p * r }, f.start, f.shift),
        None => Err(Error::Unsupported(
            "pointwise power needs a power-lattice train".into(),
        )),
    }
}

/// Pointwise product `prod_i f_i^{e_i}` of power-lattice trains sharing one
/// lattice (equal shift and start); exponents combine linearly.
pub fn train_product(fs: &[LazyTrain], exps: &[u32]) -> Result<LazyTrain> {
    if fs.is_empty() || fs.len() != exps.len() {
        return Err(Error::Parameter("product needs matching trains and exponents".into()));
    }
    if exps.iter().all(|&e| e == 0) {
        return Err(Error::Parameter("product needs at least one positive exponent".into()));
    }
    let (shift, start) = (fs[0].shift, fs[0].start);
    let mut total = 0.0;
    for (f, &e) in fs.iter().zip(exps) {
        let p = f.power_exponent().ok_or_else(|| {
            Error::Unsupported("pointwise product needs power-lattice trains".into())
        })?;
        if f.shift != shift || f.start != start {
            return Err(Error::Unsupported(
                "pointwise product needs a common lattice: equal shift and start".into(),
            ));
        }
        total += e as f64 * p;
    }
    LazyTrain::new(TrainKind::Power { p: total }, start, shift)
}
