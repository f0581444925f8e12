//! Finite piecewise functions and finite linear combinations of terms.

use super::train::LazyTrain;
use super::{Interval, Piece};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::sync::Arc;

/// An ordered list of pairwise-disjoint pieces on `[0, +inf)`; zero wherever
/// no piece applies. This is the concrete, fully materialized counterpart of a
/// train: polygonal approximants and cutoff functions live here.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FinitePiecewise {
    pieces: Vec<Piece>,
}

impl FinitePiecewise {
    pub fn new(mut pieces: Vec<Piece>) -> Result<Self> {
        pieces.sort_by(|a, b| a.support().lo.total_cmp(&b.support().lo));
        for w in pieces.windows(2) {
            let (prev, next) = (w[0].support(), w[1].support());
            if prev.hi > next.lo {
                return Err(Error::Parameter(format!(
                    "overlapping pieces at [{}, {}] and [{}, {}]",
                    prev.lo, prev.hi, next.lo, next.hi
                )));
            }
            if prev.hi == next.lo && w[0].closed_hi && w[1].closed_lo {
                return Err(Error::Parameter(format!(
                    "ambiguous shared endpoint at {}",
                    prev.hi
                )));
            }
        }
        if let Some(first) = pieces.first() {
            if first.support().lo < 0.0 {
                return Err(Error::Parameter("pieces must live on [0, +inf)".into()));
            }
        }
        Ok(Self { pieces })
    }

    pub fn empty() -> Self {
        Self { pieces: Vec::new() }
    }

    /// Polygonal interpolant through the given points (strictly increasing x).
    /// Pieces are half-open `[x_i, x_{i+1})`, the last one closed.
    pub fn from_knots(points: &[(f64, f64)]) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::Parameter("a polygon needs at least two knots".into()));
        }
        let mut pieces = Vec::with_capacity(points.len() - 1);
        for (i, w) in points.windows(2).enumerate() {
            let ((x0, y0), (x1, y1)) = (w[0], w[1]);
            if !(x0.is_finite() && x1.is_finite() && y0.is_finite() && y1.is_finite()) {
                return Err(Error::Parameter("non-finite knot".into()));
            }
            if x1 <= x0 {
                return Err(Error::Parameter(format!(
                    "knots must increase strictly: {x0} then {x1}"
                )));
            }
            let last = i + 2 == points.len();
            pieces.push(Piece {
                anchor: x0,
                lo_off: 0.0,
                hi_off: x1 - x0,
                closed_lo: true,
                closed_hi: last,
                kind: super::PieceKind::Affine { slope: (y1 - y0) / (x1 - x0), y0 },
            });
        }
        Self::new(pieces)
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    pub fn len(&self) -> usize {
        self.pieces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pieces.is_empty()
    }

    /// Right end of the covered prefix; zero for the empty function.
    pub fn end_x(&self) -> f64 {
        self.pieces.last().map_or(0.0, |p| p.support().hi)
    }

    pub fn value_at(&self, x: f64) -> f64 {
        // rightmost piece whose support starts at or before x
        let idx = self.pieces.partition_point(|p| p.support().lo <= x);
        for p in self.pieces[..idx].iter().rev().take(2) {
            if p.contains(x) {
                return p.formula_at(x);
            }
        }
        0.0
    }

    /// Pieces intersecting the window, with positional indices.
    pub fn pieces_in(&self, window: &Interval) -> Vec<(u32, Piece)> {
        let lo_idx = self.pieces.partition_point(|p| p.support().hi < window.lo);
        self.pieces[lo_idx..]
            .iter()
            .take_while(|p| p.support().lo <= window.hi)
            .enumerate()
            .map(|(i, p)| ((lo_idx + i) as u32, *p))
            .collect()
    }

    /// Knot list `(x, value)` for a contiguous affine chain.
    pub fn knots(&self) -> Vec<(f64, f64)> {
        let mut out = Vec::with_capacity(self.pieces.len() + 1);
        for p in &self.pieces {
            let s = p.support();
            out.push((s.lo, p.formula_at(s.lo)));
        }
        if let Some(p) = self.pieces.last() {
            let s = p.support();
            out.push((s.hi, p.formula_at(s.hi)));
        }
        out
    }
}

/// One term of a combination.
#[derive(Debug, Clone)]
pub enum Term {
    Train(LazyTrain),
    Finite(Arc<FinitePiecewise>),
}

impl Term {
    pub fn value_at(&self, x: f64) -> f64 {
        match self {
            Term::Train(t) => t.value_at(x),
            Term::Finite(f) => f.value_at(x),
        }
    }

    pub fn label(&self) -> String {
        match self {
            Term::Train(t) => t.describe(),
            Term::Finite(f) => format!("finite[{} pieces]", f.len()),
        }
    }

    /// Structural identity, used to cancel matching terms in differences.
    fn same(&self, other: &Term) -> bool {
        match (self, other) {
            (Term::Train(a), Term::Train(b)) => a == b,
            (Term::Finite(a), Term::Finite(b)) => Arc::ptr_eq(a, b),
            _ => false,
        }
    }
}

/// A finite linear combination of trains and finite piecewise functions.
/// The zero function is the empty combination.
#[derive(Debug, Clone, Default)]
pub struct CombinedFunction {
    terms: Vec<(f64, Term)>,
}

impl CombinedFunction {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn terms(&self) -> &[(f64, Term)] {
        &self.terms
    }

    pub fn labels(&self) -> Vec<String> {
        self.terms.iter().map(|(c, t)| format!("{c} * {}", t.label())).collect()
    }

    pub fn value_at(&self, x: f64) -> f64 {
        self.terms.iter().map(|(c, t)| c * t.value_at(x)).sum()
    }

    /// Checked evaluation on the domain `[0, +inf)`.
    pub fn evaluate(&self, x: f64) -> Result<f64> {
        if !x.is_finite() || x < 0.0 {
            return Err(Error::Domain(format!("evaluation point {x} outside [0, +inf)")));
        }
        Ok(self.value_at(x))
    }

    pub fn scale(&self, c: f64) -> Self {
        if c == 0.0 {
            return Self::zero();
        }
        Self {
            terms: self.terms.iter().map(|(k, t)| (c * k, t.clone())).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        Self { terms }.canonical()
    }

    /// Difference with structural cancellation: identical terms merge, so
    /// `f - f` is the empty (exactly zero) combination.
    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(-1.0))
    }

    fn canonical(mut self) -> Self {
        let mut merged: Vec<(f64, Term)> = Vec::with_capacity(self.terms.len());
        for (c, t) in self.terms.drain(..) {
            if let Some(slot) = merged.iter_mut().find(|(_, u)| u.same(&t)) {
                slot.0 += c;
            } else {
                merged.push((c, t));
            }
        }
        merged.retain(|(c, _)| *c != 0.0);
        Self { terms: merged }
    }
}

impl From<LazyTrain> for CombinedFunction {
    fn from(t: LazyTrain) -> Self {
        Self { terms: vec![(1.0, Term::Train(t))] }
    }
}

impl From<FinitePiecewise> for CombinedFunction {
    fn from(f: FinitePiecewise) -> Self {
        if f.is_empty() {
            return Self::zero();
        }
        Self { terms: vec![(1.0, Term::Finite(Arc::new(f)))] }
    }
}

impl From<Arc<FinitePiecewise>> for CombinedFunction {
    fn from(f: Arc<FinitePiecewise>) -> Self {
        if f.is_empty() {
            return Self::zero();
        }
        Self { terms: vec![(1.0, Term::Finite(f))] }
    }
}

/// Weighted combination of trains. Shifts were validated at construction;
/// coefficients must be finite and the list nonempty.
pub fn combine(parts: &[(f64, LazyTrain)]) -> Result<CombinedFunction> {
    if parts.is_empty() {
        return Err(Error::Parameter("empty combination".into()));
    }
    for (c, _) in parts {
        if !c.is_finite() {
            return Err(Error::Parameter(format!("non-finite coefficient {c}")));
        }
    }
    Ok(CombinedFunction {
        terms: parts.iter().map(|(c, t)| (*c, Term::Train(t.clone()))).collect(),
    }
    .canonical())
}
