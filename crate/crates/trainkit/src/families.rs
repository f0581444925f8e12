//! Named witness families, growth profiles, and the prime-index codec.

use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};

use crate::piecewise::{FinitePiecewise, LazyTrain, TrainKind};
use crate::{Error, Result};

/// Nondecreasing weight applied to spike heights. Values saturate well below
/// f64 overflow so downstream products stay finite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum GrowthProfile {
    One,
    Poly(i32),
    Exp,
    DoubleExp,
}

impl GrowthProfile {
    /// alpha(x) for x >= 1; always >= 1 and nondecreasing.
    pub fn alpha(&self, x: f64) -> f64 {
        match self {
            GrowthProfile::One => 1.0,
            GrowthProfile::Poly(k) => x.powi(*k).max(1.0),
            GrowthProfile::Exp => x.min(690.0).exp(),
            GrowthProfile::DoubleExp => x.exp().min(690.0).exp(),
        }
    }
}

impl fmt::Display for GrowthProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GrowthProfile::One => write!(f, "one"),
            GrowthProfile::Poly(k) => write!(f, "poly{k}"),
            GrowthProfile::Exp => write!(f, "exp"),
            GrowthProfile::DoubleExp => write!(f, "double_exp"),
        }
    }
}

impl FromStr for GrowthProfile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "one" => Ok(GrowthProfile::One),
            "exp" => Ok(GrowthProfile::Exp),
            "double_exp" => Ok(GrowthProfile::DoubleExp),
            _ => {
                if let Some(k) = s.strip_prefix("poly") {
                    let k: i32 = k
                        .parse()
                        .map_err(|_| Error::Parse(format!("bad growth profile {s:?}")))?;
                    if !(1..=60).contains(&k) {
                        return Err(Error::Parameter(format!(
                            "polynomial growth degree must lie in 1..=60, got {k}"
                        )));
                    }
                    Ok(GrowthProfile::Poly(k))
                } else {
                    Err(Error::Parse(format!("unknown growth profile {s:?}")))
                }
            }
        }
    }
}

pub const PRIME_TABLE_LIMIT: u64 = 1_000_000;

struct PrimeTable {
    /// smallest prime factor for every index up to the limit
    spf: Vec<u32>,
    primes: Vec<u32>,
}

fn prime_table() -> &'static PrimeTable {
    static TABLE: OnceLock<PrimeTable> = OnceLock::new();
    TABLE.get_or_init(|| {
        let n = PRIME_TABLE_LIMIT as usize;
        let mut spf = vec![0u32; n + 1];
        let mut primes = Vec::with_capacity(80_000);
        for i in 2..=n {
            if spf[i] == 0 {
                primes.push(i as u32);
                let mut j = i;
                while j <= n {
                    if spf[j] == 0 {
                        spf[j] = i as u32;
                    }
                    j += i;
                }
            }
        }
        PrimeTable { spf, primes }
    })
}

/// The j-th prime, 1-based: prime(1) = 2.
pub fn prime(j: u32) -> Result<u64> {
    if j == 0 {
        return Err(Error::Parameter("prime index is 1-based".into()));
    }
    let t = prime_table();
    match t.primes.get(j as usize - 1) {
        Some(p) => Ok(*p as u64),
        None => Err(Error::Parameter(format!(
            "prime index {j} exceeds the table ({} primes below {PRIME_TABLE_LIMIT})",
            t.primes.len()
        ))),
    }
}

/// Position of `p` in the prime sequence (1-based), if `p` is prime and within
/// the table.
pub fn prime_rank(p: u64) -> Option<u32> {
    if p > PRIME_TABLE_LIMIT {
        return None;
    }
    let t = prime_table();
    t.primes
        .binary_search(&(p as u32))
        .ok()
        .map(|i| i as u32 + 1)
}

/// Prime factorization with ascending primes. Input must be >= 2 and every
/// prime factor must fit the table.
pub fn factorize(n: u64) -> Result<Vec<(u64, u32)>> {
    if n < 2 {
        return Err(Error::Parameter(format!("factorization needs n >= 2, got {n}")));
    }
    let t = prime_table();
    let mut out: Vec<(u64, u32)> = Vec::new();
    let mut m = n;
    if m <= PRIME_TABLE_LIMIT {
        while m > 1 {
            let p = t.spf[m as usize] as u64;
            let mut e = 0u32;
            while m % p == 0 {
                m /= p;
                e += 1;
            }
            out.push((p, e));
        }
        return Ok(out);
    }
    for p in &t.primes {
        let p = *p as u64;
        if p * p > m {
            break;
        }
        if m % p == 0 {
            let mut e = 0u32;
            while m % p == 0 {
                m /= p;
                e += 1;
            }
            out.push((p, e));
        }
    }
    if m > 1 {
        if m > PRIME_TABLE_LIMIT {
            return Err(Error::Overflow(format!(
                "prime factor {m} of {n} lies beyond the table"
            )));
        }
        out.push((m, 1));
    }
    out.sort_by_key(|(p, _)| *p);
    Ok(out)
}

/// Exponent vector of a monomial in variables x1, x2, ...; trailing zeros are
/// trimmed and the total degree is at least one.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Monomial {
    exps: Vec<u32>,
}

impl Monomial {
    pub fn new(mut exps: Vec<u32>) -> Result<Self> {
        while exps.last() == Some(&0) {
            exps.pop();
        }
        if exps.is_empty() {
            return Err(Error::Parameter("monomial must have positive degree".into()));
        }
        Ok(Monomial { exps })
    }

    pub fn exponents(&self) -> &[u32] {
        &self.exps
    }

    pub fn degree(&self) -> u64 {
        self.exps.iter().map(|e| *e as u64).sum()
    }

    pub fn vars(&self) -> usize {
        self.exps.len()
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, e) in self.exps.iter().enumerate() {
            if *e == 0 {
                continue;
            }
            if !first {
                write!(f, " ")?;
            }
            first = false;
            if *e == 1 {
                write!(f, "x{}", i + 1)?;
            } else {
                write!(f, "x{}^{}", i + 1, e)?;
            }
        }
        Ok(())
    }
}

/// Integer code of a monomial: product of the i-th prime raised to the i-th
/// exponent. Overflow past u64 is an error, not a wraparound.
pub fn monomial_p_index(m: &Monomial) -> Result<u64> {
    let mut acc: u64 = 1;
    for (i, e) in m.exponents().iter().enumerate() {
        if *e == 0 {
            continue;
        }
        let p = prime(i as u32 + 1)?;
        let pe = p
            .checked_pow(*e)
            .ok_or_else(|| Error::Overflow(format!("{p}^{e} exceeds u64")))?;
        acc = acc
            .checked_mul(pe)
            .ok_or_else(|| Error::Overflow(format!("index of {m} exceeds u64")))?;
    }
    Ok(acc)
}

/// Inverse of the integer code; rejects 0 and 1, which code no monomial.
pub fn p_index_to_monomial(n: u64) -> Result<Monomial> {
    let factors = factorize(n)?;
    let mut exps = Vec::new();
    for (p, e) in factors {
        let rank = prime_rank(p).ok_or_else(|| {
            Error::Overflow(format!("prime factor {p} lies beyond the table"))
        })? as usize;
        if exps.len() < rank {
            exps.resize(rank, 0);
        }
        exps[rank - 1] = e;
    }
    Monomial::new(exps)
}

/// Parseable description of one train family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilySpec {
    pub kind: FamilyKind,
    pub shift: f64,
    pub start: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum FamilyKind {
    Triangle,
    Power { p: f64 },
    Prime { j: u32 },
    Smooth,
    Alpha { profile: GrowthProfile },
}

impl FamilySpec {
    pub fn make_train(&self) -> Result<LazyTrain> {
        let kind = match &self.kind {
            FamilyKind::Triangle => TrainKind::Triangle,
            FamilyKind::Power { p } => TrainKind::Power { p: *p },
            FamilyKind::Prime { j } => {
                let p = prime(*j)? as f64;
                TrainKind::Power { p: p.ln() }
            }
            FamilyKind::Smooth => TrainKind::Smooth,
            FamilyKind::Alpha { profile } => TrainKind::Alpha { profile: *profile },
        };
        LazyTrain::new(kind, self.start, self.shift)
    }
}

impl fmt::Display for FamilySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            FamilyKind::Triangle => write!(f, "triangle")?,
            FamilyKind::Power { p } => write!(f, "power:p={p}")?,
            FamilyKind::Prime { j } => write!(f, "prime:j={j}")?,
            FamilyKind::Smooth => write!(f, "smooth")?,
            FamilyKind::Alpha { profile } => write!(f, "alpha:profile={profile}")?,
        }
        if self.shift != 0.0 {
            write!(f, ":t={}", self.shift)?;
        }
        if self.start != 1 {
            write!(f, ":start={}", self.start)?;
        }
        Ok(())
    }
}

impl FromStr for FamilySpec {
    type Err = Error;

    /// Accepts forms like `triangle`, `triangle:t=0.05`, `power:p=2`,
    /// `prime:j=4:start=3`, `alpha:profile=exp`, `smooth:t=0.1`.
    fn from_str(s: &str) -> Result<Self> {
        let mut parts = s.split(':');
        let head = parts.next().unwrap_or_default();
        let mut kind = match head {
            "triangle" => FamilyKind::Triangle,
            "power" => FamilyKind::Power { p: f64::NAN },
            "prime" => FamilyKind::Prime { j: 0 },
            "smooth" => FamilyKind::Smooth,
            "alpha" => FamilyKind::Alpha { profile: GrowthProfile::One },
            other => return Err(Error::Parse(format!("unknown family {other:?}"))),
        };
        let mut shift = 0.0f64;
        let mut start = 1u32;
        for item in parts {
            let (key, val) = item
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("expected key=value, got {item:?}")))?;
            match (key, &mut kind) {
                ("p", FamilyKind::Power { p }) => {
                    *p = val
                        .parse()
                        .map_err(|_| Error::Parse(format!("bad exponent {val:?}")))?;
                }
                ("j", FamilyKind::Prime { j }) => {
                    *j = val
                        .parse()
                        .map_err(|_| Error::Parse(format!("bad prime index {val:?}")))?;
                }
                ("profile", FamilyKind::Alpha { profile }) => {
                    *profile = val.parse()?;
                }
                ("t", _) => {
                    shift = val
                        .parse()
                        .map_err(|_| Error::Parse(format!("bad shift {val:?}")))?;
                }
                ("start", _) => {
                    start = val
                        .parse()
                        .map_err(|_| Error::Parse(format!("bad start index {val:?}")))?;
                }
                _ => return Err(Error::Parse(format!("key {key:?} does not fit {head:?}"))),
            }
        }
        match &kind {
            FamilyKind::Power { p } if !p.is_finite() => {
                return Err(Error::Parse("power family needs p=<exponent>".into()));
            }
            FamilyKind::Prime { j } if *j == 0 => {
                return Err(Error::Parse("prime family needs j=<index>".into()));
            }
            _ => {}
        }
        Ok(FamilySpec { kind, shift, start })
    }
}

/// Appends a linear ramp to zero over `[n, n + gamma]` to a polygonal chain
/// that ends exactly at `x = n`.
pub fn make_cutoff_polygonal(
    p: &FinitePiecewise,
    n: u32,
    gamma: f64,
) -> Result<Arc<FinitePiecewise>> {
    if !(gamma > 0.0) || !gamma.is_finite() {
        return Err(Error::Parameter(format!("ramp width must be positive, got {gamma}")));
    }
    let nf = n as f64;
    if p.end_x() != nf {
        return Err(Error::Parameter(format!(
            "chain ends at {} but the cutoff is at {nf}",
            p.end_x()
        )));
    }
    let mut knots = p.knots();
    if knots.is_empty() {
        return Err(Error::Parameter("cannot append a ramp to an empty chain".into()));
    }
    knots.push((nf + gamma, 0.0));
    Ok(Arc::new(FinitePiecewise::from_knots(&knots)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_primes_match_known_list() {
        let known = [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29];
        for (i, p) in known.iter().enumerate() {
            assert_eq!(prime(i as u32 + 1).unwrap(), *p);
        }
        assert_eq!(prime(78_498).unwrap(), 999_983);
        assert!(prime(78_499).is_err());
    }

    #[test]
    fn factorization_multiplies_back() {
        for n in [2u64, 12, 360, 1_000_000, 999_983, 6_469_693_230] {
            let f = factorize(n).unwrap();
            let back: u64 = f.iter().map(|(p, e)| p.pow(*e)).product();
            assert_eq!(back, n);
            for w in f.windows(2) {
                assert!(w[0].0 < w[1].0);
            }
        }
    }

    #[test]
    fn codec_round_trips_over_a_range() {
        for n in 2u64..2000 {
            let m = p_index_to_monomial(n).unwrap();
            assert_eq!(monomial_p_index(&m).unwrap(), n);
        }
        // 360 = 2^3 3^2 5
        let m = p_index_to_monomial(360).unwrap();
        assert_eq!(m.exponents(), &[3, 2, 1]);
        assert_eq!(m.to_string(), "x1^3 x2^2 x3");
    }

    #[test]
    fn codec_rejects_degenerate_codes_and_overflow() {
        assert!(p_index_to_monomial(0).is_err());
        assert!(p_index_to_monomial(1).is_err());
        let big = Monomial::new(vec![64]).unwrap();
        assert!(monomial_p_index(&big).is_err());
    }

    #[test]
    fn family_specs_round_trip_through_display() {
        for s in [
            "triangle",
            "triangle:t=0.05",
            "power:p=2",
            "prime:j=4",
            "smooth:t=0.1:start=2",
            "alpha:profile=exp",
            "alpha:profile=poly3",
            "alpha:profile=double_exp",
        ] {
            let spec: FamilySpec = s.parse().unwrap();
            let round: FamilySpec = spec.to_string().parse().unwrap();
            assert_eq!(spec, round, "{s}");
            spec.make_train().unwrap();
        }
        assert!("power".parse::<FamilySpec>().is_err());
        assert!("prime:j=0".parse::<FamilySpec>().is_err());
        assert!("waves".parse::<FamilySpec>().is_err());
    }

    #[test]
    fn prime_family_heights_follow_log_weights() {
        let spec: FamilySpec = "prime:j=2".parse().unwrap();
        let t = spec.make_train().unwrap();
        // heights n^(ln 3)
        let expect = 4.0f64.powf(3.0f64.ln());
        assert!((t.peak(4) - expect).abs() <= 1e-12 * expect);
    }

    #[test]
    fn growth_profiles_stay_finite_and_monotone() {
        for g in [
            GrowthProfile::One,
            GrowthProfile::Poly(3),
            GrowthProfile::Exp,
            GrowthProfile::DoubleExp,
        ] {
            let mut last = 0.0;
            for n in 1..=2000 {
                let v = g.alpha(n as f64);
                assert!(v.is_finite() && v >= 1.0, "{g} at {n}");
                assert!(v >= last);
                last = v;
            }
        }
    }

    #[test]
    fn cutoff_ramp_reaches_zero() {
        let chain = FinitePiecewise::from_knots(&[(0.0, 0.0), (1.5, 3.0), (4.0, 1.0)]).unwrap();
        let cut = make_cutoff_polygonal(&chain, 4, 0.5).unwrap();
        assert_eq!(cut.value_at(4.0), 1.0);
        assert!((cut.value_at(4.25) - 0.5).abs() <= 1e-15);
        assert_eq!(cut.value_at(4.5), 0.0);
        assert_eq!(cut.end_x(), 4.5);
        assert!(make_cutoff_polygonal(&chain, 5, 0.5).is_err());
    }
}
