//! Machine checks for the quantitative behaviour of the train families:
//! closed-form masses, independence witnesses, growth minorants, convergence
//! envelopes, and the constructive approximation certificates. Every check
//! records the measured values next to their pinned bounds, so a serialized
//! report can be audited without rerunning anything.
//!
//! Two assertion shapes cover everything. An equality claim stores the
//! absolute deviation against a tolerance. A lower-bound claim stores the
//! shortfall (required floor minus measurement) against zero, so a negative
//! value is a passing margin.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::approx::{bump_perturb, polygonal_approximant, sequence_approximant};
use crate::families::{monomial_p_index, p_index_to_monomial, prime, GrowthProfile, Monomial};
use crate::metrics::{
    dx_distance, l1_norm, sup_norm_window, support_tail_measure, FuncSeq, ToleranceConfig,
};
use crate::piecewise::{combine, train_product, CombinedFunction, Interval, LazyTrain, TrainKind};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Detail {
    pub description: String,
    pub value: f64,
    pub bound: f64,
}

impl Detail {
    fn new(description: impl Into<String>, value: f64, bound: f64) -> Self {
        Detail { description: description.into(), value, bound }
    }

    /// NaN never satisfies a bound.
    pub fn satisfied(&self) -> bool {
        self.value <= self.bound
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub paper_anchor: String,
    pub details: Vec<Detail>,
}

impl CheckResult {
    fn assemble(name: &str, anchor: &str, details: Vec<Detail>) -> Self {
        let passed = !details.is_empty() && details.iter().all(Detail::satisfied);
        CheckResult { name: name.to_string(), passed, paper_anchor: anchor.to_string(), details }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub version: String,
    pub config: ToleranceConfig,
    pub seed: u64,
    pub results: Vec<CheckResult>,
}

impl Report {
    pub fn all_passed(&self) -> bool {
        self.results.iter().all(|r| r.passed)
    }
}

fn triangle(shift: f64) -> Result<LazyTrain> {
    LazyTrain::new(TrainKind::Triangle, 1, shift)
}

fn power(p: f64) -> Result<LazyTrain> {
    LazyTrain::new(TrainKind::Power { p }, 1, 0.0)
}

/// Mass identities: the base train integrates to one, its tails to
/// (n+1)/2^n, and the power trains to their term series.
pub fn check_l1_closed_forms(cfg: &ToleranceConfig) -> Result<CheckResult> {
    let base = triangle(0.0)?;
    let f: CombinedFunction = base.clone().into();
    let mut details = Vec::new();

    let mass = l1_norm(&f, cfg)?;
    details.push(Detail::new("deviation of total mass from one", (mass.value - 1.0).abs(), 1e-10));
    details.push(Detail::new("certified integration error of the total mass", mass.error_bound, 1e-10));

    let mut worst = 0.0f64;
    let mut worst_n = 1u32;
    for n in 1..=40u32 {
        let tail: CombinedFunction = base.tail_from(n).into();
        let got = l1_norm(&tail, cfg)?;
        let expect = (n as f64 + 1.0) * 2f64.powi(-(n as i32));
        let dev = (got.value - expect).abs();
        if dev > worst {
            worst = dev;
            worst_n = n;
        }
    }
    details.push(Detail::new(
        format!("largest deviation of tail mass from (n+1)/2^n over n=1..40 (worst at n={worst_n})"),
        worst,
        1e-10,
    ));

    for (label, p) in [("log-two", 2f64.ln()), ("log-three", 3f64.ln()), ("square", 2.0)] {
        let g: CombinedFunction = power(p)?.into();
        let got = l1_norm(&g, cfg)?;
        // term series sum n^p 2^-n / (p+1); 300 terms exhaust binary64
        let oracle: f64 =
            (1..=300).map(|n| (n as f64).powf(p) * 2f64.powi(-n)).sum::<f64>() / (p + 1.0);
        details.push(Detail::new(
            format!("deviation of the {label} train mass from its term series"),
            (got.value - oracle).abs(),
            1e-10,
        ));
    }

    Ok(CheckResult::assemble("unit-mass-closed-forms", "l1-mass-identities", details))
}

/// Distinct shifts are independent: a witness point between the first two
/// rising feet sees only the first translate, and far enough out every
/// distinguished shift owns its apexes outright.
pub fn check_independence_witness(ts: &[f64]) -> Result<CheckResult> {
    if ts.len() < 2 {
        return Err(Error::Parameter("need at least two shifts".into()));
    }
    for w in ts.windows(2) {
        if !(w[0] < w[1]) {
            return Err(Error::Parameter("shifts must be strictly increasing".into()));
        }
    }
    if ts[0] < 0.0 || ts[ts.len() - 1] >= 0.125 {
        return Err(Error::Parameter("shifts must lie in [0, 1/8)".into()));
    }
    let trains: Vec<LazyTrain> = ts.iter().map(|&t| triangle(t)).collect::<Result<_>>()?;
    let mut details = Vec::new();

    // index-1 spikes have halfwidth 1/4, so their rising feet sit at 3/4 + t;
    // halfway between the first two feet only the first translate is alive
    let x0 = 0.75 + 0.5 * (ts[0] + ts[1]);
    let floor = ts[1] - ts[0];
    details.push(Detail::new(
        format!("shortfall of the first translate at witness {x0} below the foot gap"),
        floor - trains[0].value_at(x0),
        0.0,
    ));
    let mut cross0 = 0.0f64;
    for t in &trains[1..] {
        cross0 = cross0.max(t.value_at(x0).abs());
    }
    details.push(Detail::new("largest later-translate value at the witness", cross0, 0.0));

    // generic form: once spikes are narrower than the smallest shift gap,
    // the apexes of any distinguished translate meet nothing else
    let mut worst_apex = 0.0f64;
    let mut worst_cross = 0.0f64;
    for (s, own) in trains.iter().enumerate() {
        let gap = ts
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != s)
            .map(|(_, &t)| (t - ts[s]).abs())
            .fold(f64::INFINITY, f64::min);
        let mut first = 1u32;
        while 2f64.powi(-(first as i32) - 1) >= gap {
            first += 1;
        }
        for n in first..first + 5 {
            let x = n as f64 + ts[s];
            worst_apex = worst_apex.max((own.value_at(x) - n as f64).abs());
            for (i, other) in trains.iter().enumerate() {
                if i != s {
                    worst_cross = worst_cross.max(other.value_at(x).abs());
                }
            }
        }
    }
    details.push(Detail::new("largest apex deviation at distinguished shifts", worst_apex, 0.0));
    details.push(Detail::new(
        "largest cross-translate value at distinguished apexes",
        worst_cross,
        0.0,
    ));

    Ok(CheckResult::assemble("translate-independence", "shifted-train-independence", details))
}

/// A combination with nonzero last coefficient grows linearly along the last
/// shift's apexes once the spikes separate, so it cannot stay bounded.
pub fn check_combination_growth(coefs: &[f64], ts: &[f64]) -> Result<CheckResult> {
    if coefs.is_empty() || coefs.len() != ts.len() {
        return Err(Error::Parameter("need matching, nonempty coefficients and shifts".into()));
    }
    let last = coefs[coefs.len() - 1];
    if last == 0.0 {
        return Err(Error::Parameter("the distinguished last coefficient must be nonzero".into()));
    }
    for i in 0..ts.len() {
        if !(0.0..0.125).contains(&ts[i]) {
            return Err(Error::Parameter("shifts must lie in [0, 1/8)".into()));
        }
        for j in i + 1..ts.len() {
            if ts[i] == ts[j] {
                return Err(Error::Parameter(
                    "duplicate shifts are a single translate, not independent inputs".into(),
                ));
            }
        }
    }
    let t_last = ts[ts.len() - 1];
    let parts: Vec<(f64, LazyTrain)> = coefs
        .iter()
        .zip(ts)
        .map(|(&c, &t)| Ok((c, triangle(t)?)))
        .collect::<Result<_>>()?;
    let comb = combine(&parts)?;

    let gap = ts[..ts.len() - 1]
        .iter()
        .map(|&t| (t - t_last).abs())
        .fold(f64::INFINITY, f64::min);
    let mut first = 1u32;
    while 2f64.powi(-(first as i32) - 1) >= gap {
        first += 1;
    }

    let mut worst = 0.0f64;
    for n in first + 1..=first + 20 {
        let x = n as f64 + t_last;
        worst = worst.max((comb.value_at(x).abs() - last.abs() * n as f64).abs());
    }
    let mut details = vec![Detail::new(
        format!(
            "largest deviation of |combination| from |c|*n at the last shift's apexes, n={}..{}",
            first + 1,
            first + 20
        ),
        worst,
        0.0,
    )];

    // the window sup is squeezed between the distinguished apex inside the
    // window and the coefficient-sum envelope
    let n_win = first + 20;
    let sup = sup_norm_window(&comb, n_win)?;
    let inner_apex = last.abs() * (n_win as f64 - 1.0);
    details.push(Detail::new(
        format!("shortfall of the sup over [0, {n_win}] below the last interior apex"),
        inner_apex - sup.value,
        0.0,
    ));
    let envelope: f64 = coefs.iter().map(|c| c.abs()).sum::<f64>() * n_win as f64;
    details.push(Detail::new(
        format!("excess of the sup over [0, {n_win}] above the coefficient envelope"),
        sup.value - envelope,
        1e-9,
    ));

    Ok(CheckResult::assemble("combination-growth", "unbounded-linear-combinations", details))
}

/// Pointwise products of the prime-log trains collapse to a single power
/// train whose exponent is the log of the monomial's prime code.
pub fn check_monomial_identity(m: &Monomial) -> Result<CheckResult> {
    if m.degree() == 0 {
        return Err(Error::Parameter("the monomial must have degree at least one".into()));
    }
    let ind = monomial_p_index(m)?;
    let factors: Vec<LazyTrain> = (1..=m.vars() as u32)
        .map(|j| power((prime(j)? as f64).ln()))
        .collect::<Result<_>>()?;
    let product = train_product(&factors, m.exponents())?;
    let direct = power((ind as f64).ln())?;
    let mut details = Vec::new();

    let pf: CombinedFunction = product.clone().into();
    let df: CombinedFunction = direct.into();
    let mut worst_rel = 0.0f64;
    for i in 0..1000 {
        let x = 0.5 + 20.0 * i as f64 / 999.0;
        let (a, b) = (pf.value_at(x), df.value_at(x));
        worst_rel = worst_rel.max((a - b).abs() / a.abs().max(1.0));
    }
    details.push(Detail::new(
        "largest relative gap between the product train and the coded power train on a thousand-point grid",
        worst_rel,
        1e-9,
    ));

    let e = (ind as f64).ln();
    let mut worst_apex = 0.0f64;
    for n in 1..=20u32 {
        let expect = (n as f64).powf(e);
        worst_apex = worst_apex.max((pf.value_at(n as f64) - expect).abs() / expect);
    }
    details.push(Detail::new(
        "largest relative apex deviation of the product train from n^log(code)",
        worst_apex,
        1e-12,
    ));

    let back = p_index_to_monomial(ind)?;
    details.push(Detail::new(
        format!("code round trip mismatch indicator for {m} (code {ind})"),
        if back == *m { 0.0 } else { 1.0 },
        0.0,
    ));

    Ok(CheckResult::assemble("monomial-product-identity", "product-code-identity", details))
}

/// A weighted sum of coded power trains is dominated by its largest exponent:
/// past an explicit index its apex values clear half the dominant term.
pub fn check_algebraic_growth(terms: &[(f64, Monomial)]) -> Result<CheckResult> {
    let live: Vec<(f64, u64)> = terms
        .iter()
        .filter(|(l, _)| *l != 0.0)
        .map(|(l, m)| Ok((*l, monomial_p_index(m)?)))
        .collect::<Result<_>>()?;
    if live.is_empty() {
        return Err(Error::Parameter("need at least one nonzero coefficient".into()));
    }
    let mut codes: Vec<u64> = terms
        .iter()
        .map(|(_, m)| monomial_p_index(m))
        .collect::<Result<_>>()?;
    codes.sort_unstable();
    if codes.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::Parameter("duplicate monomials must be merged upstream".into()));
    }

    let mut details = vec![Detail::new(
        "number of coinciding monomial codes among the terms",
        0.0,
        0.0,
    )];

    let exps: Vec<(f64, f64)> = live.iter().map(|&(l, c)| (l, (c as f64).ln())).collect();
    let (lam_star, e_star) =
        exps.iter().copied().fold((0.0, f64::NEG_INFINITY), |acc, (l, e)| {
            if e > acc.1 { (l, e) } else { acc }
        });
    let rest_sum: f64 = exps.iter().filter(|(_, e)| *e < e_star).map(|(l, _)| l.abs()).sum();
    let second = exps
        .iter()
        .map(|(_, e)| *e)
        .filter(|e| *e < e_star)
        .fold(f64::NEG_INFINITY, f64::max);
    let n_star = if rest_sum == 0.0 {
        1.0
    } else {
        (2.0 * rest_sum / lam_star.abs()).powf(1.0 / (e_star - second)).ceil().max(1.0)
    };
    if !(n_star <= 1e12) {
        return Err(Error::Budget(format!(
            "domination index {n_star:e} is too large to evaluate"
        )));
    }

    let parts: Vec<(f64, LazyTrain)> = exps
        .iter()
        .map(|&(l, e)| Ok((l, power(e)?)))
        .collect::<Result<_>>()?;
    let comb = combine(&parts)?;
    let mut worst_short = f64::NEG_INFINITY;
    let mut worst_dev = 0.0f64;
    for n in [n_star, n_star + 1.0, n_star + 3.0, n_star + 10.0, 2.0 * n_star] {
        let v = comb.value_at(n);
        let floor = 0.5 * lam_star.abs() * n.powf(e_star);
        worst_short = worst_short.max(floor - v.abs());
        let oracle: f64 = exps.iter().map(|&(l, e)| l * n.powf(e)).sum();
        worst_dev = worst_dev.max((v - oracle).abs() / oracle.abs().max(1.0));
    }
    details.push(Detail::new(
        format!("largest shortfall of |sum| below half the dominant term from index {n_star} on"),
        worst_short,
        0.0,
    ));
    details.push(Detail::new(
        "largest relative deviation of apex values from direct exponent arithmetic",
        worst_dev,
        1e-12,
    ));

    Ok(CheckResult::assemble("weighted-growth-floor", "dominant-exponent-divergence", details))
}

/// Tail trains shrink to zero in the combined metric, strictly and inside an
/// analytic envelope; the coded power trains obey the same envelope.
pub fn check_sequence_convergence(t: f64, cfg: &ToleranceConfig) -> Result<CheckResult> {
    if !(0.0..0.125).contains(&t) {
        return Err(Error::Parameter("shift must lie in [0, 1/8)".into()));
    }
    let base = triangle(t)?;
    let zero = CombinedFunction::zero();
    let mut details = Vec::new();

    let envelope = |tr: &LazyTrain, n: u32| tr.l1_tail_bound(n) + 2f64.powi(1 - n as i32);

    let mut prev = f64::INFINITY;
    let mut worst_inc = f64::NEG_INFINITY;
    let mut at = [0.0f64; 2];
    for n in 1..=40u32 {
        let d = dx_distance(&base.tail_from(n).into(), &zero, cfg)?;
        if n > 1 {
            worst_inc = worst_inc.max(d.value - prev);
        }
        prev = d.value;
        if n == 24 {
            at[0] = d.value;
        }
        if n == 40 {
            at[1] = d.value;
        }
    }
    details.push(Detail::new(
        "largest increment between consecutive tail distances over n=1..40 (strict decrease)",
        worst_inc,
        -1e-13,
    ));
    details.push(Detail::new(
        "tail distance at n=24 against its analytic envelope",
        at[0],
        envelope(&base, 24),
    ));
    details.push(Detail::new(
        "tail distance at n=40 against its analytic envelope",
        at[1],
        envelope(&base, 40),
    ));

    // explicit smallness threshold: first n whose envelope clears 1e-5
    let mut n_thr = 1u32;
    while envelope(&base, n_thr) >= 1e-5 {
        n_thr += 1;
    }
    let d_thr = dx_distance(&base.tail_from(n_thr).into(), &zero, cfg)?;
    details.push(Detail::new(
        format!("tail distance at the computed threshold n={n_thr} against 1e-5"),
        d_thr.value,
        1e-5,
    ));

    for j in 1..=3u32 {
        let g = power((prime(j)? as f64).ln())?;
        let d = dx_distance(&g.tail_from(20).into(), &zero, cfg)?;
        details.push(Detail::new(
            format!("coded train {j} tail distance at n=20 against its envelope"),
            d.value,
            envelope(&g, 20),
        ));
    }

    Ok(CheckResult::assemble("tail-sequence-vanishes", "metric-convergence-to-zero", details))
}

/// Off an exceptional set of small measure the tails vanish identically;
/// sample points in the gaps confirm exact zeros, and the set's measure is a
/// closed dyadic value shrinking monotonically.
pub fn check_almost_uniform(
    t: f64,
    epsilon: f64,
    rng: &mut impl Rng,
) -> Result<CheckResult> {
    if !(0.0..0.125).contains(&t) {
        return Err(Error::Parameter("shift must lie in [0, 1/8)".into()));
    }
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return Err(Error::Parameter("epsilon must be positive".into()));
    }
    let base = triangle(t)?;
    let mut cut = 1u32;
    while support_tail_measure(&base, cut)?.value >= epsilon {
        cut += 1;
        if cut > 60 {
            break;
        }
    }
    let measure = support_tail_measure(&base, cut)?;
    let mut details = Vec::new();
    details.push(Detail::new(
        format!("deviation of the tail support measure at n={cut} from 2^(1-n)"),
        (measure.value - 2f64.powi(1 - cut as i32)).abs(),
        0.0,
    ));
    details.push(Detail::new(
        format!("tail support measure at n={cut} against epsilon"),
        measure.value,
        epsilon,
    ));
    let next = support_tail_measure(&base, cut + 1)?;
    details.push(Detail::new(
        "growth of the support measure when the cut advances (sets are nested)",
        next.value - measure.value,
        0.0,
    ));

    // gap points: integer offsets 0.5 +- 0.15 stay at least 0.35 - 1/8 away
    // from every apex, which beats every halfwidth from index 1 on
    let mut worst = 0.0f64;
    for _ in 0..10_000 {
        let k = rng.gen_range(0..cut + 25) as f64;
        let x = k + 0.5 + 0.15 * (2.0 * rng.gen::<f64>() - 1.0);
        for n in cut..=cut + 20 {
            worst = worst.max(base.tail_from(n).value_at(x).abs());
        }
    }
    details.push(Detail::new(
        format!("largest tail value over ten thousand gap points, tails n={cut}..{}", cut + 20),
        worst,
        0.0,
    ));

    Ok(CheckResult::assemble("almost-uniform-vanishing", "shrinking-exceptional-sets", details))
}

/// No almost-everywhere uniform collapse: every tail index carries an
/// explicit interval of positive length where the function clears the
/// threshold, so no null set can absorb the failure.
pub fn refute_uniform_ae(n: u32, threshold: f64) -> Result<CheckResult> {
    if n < 1 {
        return Err(Error::Parameter("index must be at least one".into()));
    }
    if !(threshold > 0.0) || !threshold.is_finite() {
        return Err(Error::Parameter("threshold must be positive".into()));
    }
    let base = triangle(0.0)?;
    let mut details = Vec::new();
    let mut min_len = f64::INFINITY;
    let mut nonempty = 0u32;
    let mut worst_edge = 0.0f64;
    let mut worst_mid = 0.0f64;
    // the edge point m +- ext is representable only to half an ulp of m, and
    // the slope m 2^{m+1} maps that onto the value; the bound has to carry it
    let mut edge_tol = 0.0f64;
    for m in n..=n + 20 {
        let mf = m as f64;
        if threshold >= mf {
            details.push(Detail::new(
                format!("no super-level interval at index {m}: peak {mf} does not clear the threshold"),
                0.0,
                0.0,
            ));
            continue;
        }
        // the triangle sits above the threshold on the middle fraction of
        // its base; solve the edge offsets exactly
        let ext = (1.0 - threshold / mf) * 2f64.powi(-(m as i32) - 1);
        nonempty += 1;
        min_len = min_len.min(2.0 * ext);
        for x in [mf - ext, mf + ext] {
            worst_edge = worst_edge.max((base.value_at(x) - threshold).abs());
        }
        edge_tol = edge_tol.max(mf * 2f64.powi(m as i32 + 1) * (mf * f64::EPSILON));
        worst_mid = worst_mid.max((base.value_at(mf) - mf).abs());
    }
    details.push(Detail::new(
        "negated count of indices with a nonempty super-level interval",
        -(nonempty as f64),
        -1.0,
    ));
    if nonempty > 0 {
        details.push(Detail::new(
            "negated smallest super-level interval length (strict positivity)",
            -min_len,
            0.0,
        ));
        details.push(Detail::new(
            "largest deviation of the function from the threshold at the interval edges",
            worst_edge,
            edge_tol,
        ));
        details.push(Detail::new("largest apex deviation at the interval midpoints", worst_mid, 0.0));
    }

    Ok(CheckResult::assemble("no-uniform-ae-limit", "persistent-level-sets", details))
}

/// Growth-weighted trains attain ratio n against their profile at the apexes
/// while keeping total mass one half.
pub fn check_growth_alpha(profile: GrowthProfile, cfg: &ToleranceConfig) -> Result<CheckResult> {
    let tr = LazyTrain::new(TrainKind::Alpha { profile }, 1, 0.0)?;
    let f: CombinedFunction = tr.into();
    let mut details = Vec::new();

    let mut worst = 0.0f64;
    for n in 1..=20u32 {
        let x = n as f64;
        let ratio = f.value_at(x) / profile.alpha(x);
        worst = worst.max((ratio - x).abs() / x);
    }
    details.push(Detail::new(
        "largest relative deviation of the apex-to-profile ratio from n over n=1..20",
        worst,
        1e-12,
    ));

    let mass = l1_norm(&f, cfg)?;
    details.push(Detail::new(
        "deviation of the total mass from one half",
        (mass.value - 0.5).abs(),
        1e-10 + mass.error_bound,
    ));
    details.push(Detail::new("certified integration error of the mass", mass.error_bound, 1e-7));

    let name = format!("growth-alpha-{}", profile.to_string().replace('_', "-"));
    Ok(CheckResult::assemble(&name, "arbitrary-growth-attained", details))
}

/// The smooth train: exact apexes, support edges that vanish with their
/// one-sided difference quotients, and Cauchy partial norm sums.
pub fn check_smooth_family(cfg: &ToleranceConfig) -> Result<CheckResult> {
    let tr = LazyTrain::new(TrainKind::Smooth, 1, 0.0)?;
    let f: CombinedFunction = tr.clone().into();
    let mut details = Vec::new();

    let mut worst_apex = 0.0f64;
    let mut worst_edge = 0.0f64;
    for n in 1..=20u32 {
        let x = n as f64;
        let h = tr.halfwidth(n);
        worst_apex = worst_apex.max((f.value_at(x) - x).abs());
        worst_edge = worst_edge.max(f.value_at(x - h).abs()).max(f.value_at(x + h).abs());
    }
    details.push(Detail::new("largest apex deviation over n=1..20", worst_apex, 0.0));
    details.push(Detail::new("largest support-edge value over n=1..20", worst_edge, 0.0));

    // one-sided difference quotients at the support edges; flat decay keeps
    // them small long before the step resolves the bump's interior scale
    let mut worst_fd = 0.0f64;
    for n in [3u32, 5, 8] {
        let hw = tr.halfwidth(n);
        let step = hw / 512.0;
        for edge in [n as f64 - hw, n as f64 + hw] {
            let dir = if edge < n as f64 { 1.0 } else { -1.0 };
            let v = |k: u32| f.value_at(edge + dir * k as f64 * step);
            let d1 = (v(1) - v(0)) / step;
            let d2 = (v(2) - 2.0 * v(1) + v(0)) / (step * step);
            let d3 = (v(3) - 3.0 * v(2) + 3.0 * v(1) - v(0)) / (step * step * step);
            worst_fd = worst_fd.max(d1.abs()).max(d2.abs()).max(d3.abs());
        }
    }
    details.push(Detail::new(
        "largest one-sided difference quotient up to third order at the support edges",
        worst_fd,
        1e-4,
    ));

    // Cauchy gap of the partial norm sums between indices 30 and 40
    let mut gap = 0.0f64;
    for n in 31..=40u32 {
        let h = tr.halfwidth(n);
        let w = Interval::closed(n as f64 - h, n as f64 + h)?;
        gap += crate::piecewise::integrate_abs(&f, &w, cfg.quad_tol)?.value;
    }
    details.push(Detail::new(
        "partial norm sum gap between cutoffs 30 and 40",
        gap,
        1e-6,
    ));

    let h3 = tr.halfwidth(3);
    let m3 = crate::piecewise::integrate_abs(
        &f,
        &Interval::closed(3.0 - h3, 3.0 + h3)?,
        cfg.quad_tol,
    )?;
    details.push(Detail::new("bump mass at index three against its box bound", m3.value, 3.0 * 2.0 * h3));
    details.push(Detail::new("negated bump mass at index three (strict positivity)", -m3.value, -1e-4));

    Ok(CheckResult::assemble("smooth-train-regularity", "smooth-compact-bumps", details))
}

fn named(mut r: CheckResult, name: &str) -> CheckResult {
    r.name = name.to_string();
    r
}

/// Records a check's error as a failing result instead of aborting the run.
fn recorded(
    name: &str,
    anchor: &str,
    run: impl FnOnce() -> Result<CheckResult>,
) -> CheckResult {
    match run() {
        Ok(r) => r,
        Err(e) => CheckResult {
            name: name.to_string(),
            passed: false,
            paper_anchor: anchor.to_string(),
            details: vec![Detail::new(format!("errored: {e}"), 1.0, 0.0)],
        },
    }
}

fn approx_result(name: &str, f: &CombinedFunction, eps: f64, cfg: &ToleranceConfig) -> CheckResult {
    recorded(name, "constructive-polygonal-density", || {
        let (_, cert) = polygonal_approximant(f, eps, cfg)?;
        let mut details = vec![Detail::new(
            "achieved distance plus its error bound against the target",
            cert.achieved.value + cert.achieved.error_bound,
            eps,
        )];
        for item in &cert.budget {
            details.push(Detail::new(format!("budget item {}", item.label), item.value, item.bound));
        }
        Ok(CheckResult::assemble(name, "constructive-polygonal-density", details))
    })
}

fn draw_shifts(rng: &mut ChaCha8Rng, count: usize) -> Vec<f64> {
    loop {
        let mut ts: Vec<f64> = (0..count).map(|_| rng.gen_range(0.0..0.12)).collect();
        ts.sort_by(f64::total_cmp);
        if ts.windows(2).all(|w| w[1] - w[0] > 1e-3) {
            return ts;
        }
    }
}

fn draw_coef(rng: &mut ChaCha8Rng) -> f64 {
    let mag = rng.gen_range(0.25..2.0);
    if rng.gen::<bool>() {
        mag
    } else {
        -mag
    }
}

/// Runs every check plus the approximation certificates over the standard
/// corpus. Failures are recorded, never fatal; the result list is sorted by
/// name and fully determined by `(cfg, seed)`.
pub fn run_all(cfg: &ToleranceConfig, seed: u64) -> Result<Report> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut results = Vec::new();

    results.push(recorded("unit-mass-closed-forms", "l1-mass-identities", || {
        check_l1_closed_forms(cfg)
    }));

    results.push(recorded("translate-independence", "shifted-train-independence", || {
        check_independence_witness(&[0.0, 0.05, 0.1])
    }));
    let ts = draw_shifts(&mut rng, 4);
    results.push(named(
        recorded("translate-independence-random", "shifted-train-independence", || {
            check_independence_witness(&ts)
        }),
        "translate-independence-random",
    ));

    results.push(recorded("combination-growth", "unbounded-linear-combinations", || {
        check_combination_growth(&[2.0, 3.0], &[0.0, 0.1])
    }));
    let ts = draw_shifts(&mut rng, 3);
    let cs: Vec<f64> = (0..3).map(|_| draw_coef(&mut rng)).collect();
    results.push(named(
        recorded("combination-growth-random", "unbounded-linear-combinations", || {
            check_combination_growth(&cs, &ts)
        }),
        "combination-growth-random",
    ));

    let m_ab = Monomial::new(vec![1, 1]).expect("static monomial");
    results.push(recorded("monomial-product-identity", "product-code-identity", || {
        check_monomial_identity(&m_ab)
    }));
    let m_rand = Monomial::new(vec![
        rng.gen_range(0..=3),
        rng.gen_range(0..=3),
        rng.gen_range(1..=3),
    ])
    .expect("drawn monomial has positive degree");
    results.push(named(
        recorded("monomial-product-identity-random", "product-code-identity", || {
            check_monomial_identity(&m_rand)
        }),
        "monomial-product-identity-random",
    ));

    let canon = vec![
        (1.0, Monomial::new(vec![0, 1]).expect("static monomial")),
        (-5.0, Monomial::new(vec![1]).expect("static monomial")),
    ];
    results.push(recorded("weighted-growth-floor", "dominant-exponent-divergence", || {
        check_algebraic_growth(&canon)
    }));
    let rand_terms = vec![
        (draw_coef(&mut rng), Monomial::new(vec![1]).expect("static monomial")),
        (draw_coef(&mut rng), Monomial::new(vec![0, 1]).expect("static monomial")),
        (draw_coef(&mut rng), Monomial::new(vec![1, 1]).expect("static monomial")),
    ];
    results.push(named(
        recorded("weighted-growth-floor-random", "dominant-exponent-divergence", || {
            check_algebraic_growth(&rand_terms)
        }),
        "weighted-growth-floor-random",
    ));

    results.push(recorded("tail-sequence-vanishes", "metric-convergence-to-zero", || {
        check_sequence_convergence(0.0, cfg)
    }));
    results.push(named(
        recorded("tail-sequence-vanishes-shifted", "metric-convergence-to-zero", || {
            check_sequence_convergence(0.05, cfg)
        }),
        "tail-sequence-vanishes-shifted",
    ));

    {
        let r = recorded("almost-uniform-vanishing", "shrinking-exceptional-sets", || {
            check_almost_uniform(0.05, 0.3, &mut rng)
        });
        results.push(r);
    }

    results.push(recorded("no-uniform-ae-limit", "persistent-level-sets", || {
        refute_uniform_ae(3, 1.0)
    }));

    for profile in [
        GrowthProfile::One,
        GrowthProfile::Poly(3),
        GrowthProfile::Exp,
        GrowthProfile::DoubleExp,
    ] {
        let name = format!("growth-alpha-{}", profile.to_string().replace('_', "-"));
        results.push(recorded(&name, "arbitrary-growth-attained", || {
            check_growth_alpha(profile, cfg)
        }));
    }

    results.push(recorded("smooth-train-regularity", "smooth-compact-bumps", || {
        check_smooth_family(cfg)
    }));

    // approximation certificates over the standard corpus
    let corpus: Vec<(&str, CombinedFunction)> = vec![
        ("approx-triangle", triangle(0.0)?.into()),
        ("approx-triangle-shifted", triangle(0.05)?.into()),
        ("approx-log-two-power", power(2f64.ln())?.into()),
        ("approx-square-power", power(2.0)?.into()),
        (
            "approx-combination",
            combine(&[(2.0, triangle(0.0)?), (3.0, triangle(0.1)?)])?,
        ),
        ("approx-smooth", LazyTrain::new(TrainKind::Smooth, 1, 0.0)?.into()),
    ];
    for (name, f) in &corpus {
        results.push(approx_result(name, f, 1e-2, cfg));
    }

    results.push(recorded("approx-sequence", "constructive-sequence-density", || {
        let seq = FuncSeq::TailTrains { base: triangle(0.05)? };
        let (_, cert) = sequence_approximant(&seq, 0.5, cfg)?;
        let mut details = vec![Detail::new(
            "achieved sequence distance plus its error bound against the target",
            cert.achieved.value + cert.achieved.error_bound,
            cert.epsilon,
        )];
        for item in &cert.budget {
            details.push(Detail::new(format!("budget item {}", item.label), item.value, item.bound));
        }
        Ok(CheckResult::assemble("approx-sequence", "constructive-sequence-density", details))
    }));

    results.push(recorded(
        "perturbation-small-but-unbounded",
        "gap-spike-perturbations",
        || {
            let (_, cert) = bump_perturb(&triangle(0.0)?, 1e-2, 10.0, cfg)?;
            let details = vec![
                Detail::new(
                    "distance moved plus its error bound against the target",
                    cert.moved.value + cert.moved.error_bound,
                    cert.epsilon,
                ),
                Detail::new("spike mass against a quarter of the target", cert.mass_bound, cert.epsilon / 4.0),
                Detail::new(
                    format!("shortfall of the spike witness at x={} below the floor", cert.witness_x),
                    cert.height - cert.witness_value,
                    0.0,
                ),
            ];
            Ok(CheckResult::assemble(
                "perturbation-small-but-unbounded",
                "gap-spike-perturbations",
                details,
            ))
        },
    ));

    results.sort_by(|a, b| a.name.cmp(&b.name));
    Ok(Report { version: "1".to_string(), config: *cfg, seed, results })
}
