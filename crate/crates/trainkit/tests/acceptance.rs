//! End to end acceptance sweep. Each test prints one `acceptance cNN <slug>:
//! PASS` line; a failure panics with the offending numbers so the harness
//! shows exactly one pass or fail line per criterion.

use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use trainkit::approx::{bump_perturb, polygonal_approximant};
use trainkit::families::{monomial_p_index, p_index_to_monomial, GrowthProfile, Monomial};
use trainkit::metrics::{
    dc0_distance, dx_at_depth, dx_distance, l1_norm, support_tail_measure, FuncSeq,
};
use trainkit::piecewise::{combine, integrate_abs, TrainKind};
use trainkit::verify::{
    check_algebraic_growth, check_combination_growth, check_independence_witness,
    check_monomial_identity, refute_uniform_ae,
};
use trainkit::{CombinedFunction, Interval, LazyTrain, ToleranceConfig};

const SEED: u64 = 20260822;

fn cfg() -> ToleranceConfig {
    ToleranceConfig::default()
}

fn triangle(shift: f64) -> LazyTrain {
    LazyTrain::new(TrainKind::Triangle, 1, shift).unwrap()
}

fn tail(n: u32, shift: f64) -> LazyTrain {
    LazyTrain::new(TrainKind::Triangle, n, shift).unwrap()
}

fn power(p: f64) -> LazyTrain {
    LazyTrain::new(TrainKind::Power { p }, 1, 0.0).unwrap()
}

fn pass(id: u32, slug: &str) {
    println!("acceptance c{id:02} {slug}: PASS");
}

/// 0.125-bounded shift tuples, sorted and pairwise separated.
fn draw_shifts(rng: &mut ChaCha8Rng, k: usize, min_gap: f64) -> Vec<f64> {
    loop {
        let mut ts: Vec<f64> = (0..k).map(|_| rng.gen::<f64>() * 0.125).collect();
        ts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        if ts.windows(2).all(|w| w[1] - w[0] > min_gap) {
            return ts;
        }
    }
}

#[test]
fn c01_unit_mass_closed_forms() {
    let cfg = cfg();
    for n in 1..=40u32 {
        let f: CombinedFunction = tail(n, 0.0).into();
        let measured = l1_norm(&f, &cfg).unwrap();
        let closed = (n as f64 + 1.0) * 2f64.powi(-(n as i32));
        // independent oracle: piece areas summed term by term, geometric tail
        let mut oracle = 0.0f64;
        for m in (n..n + 300).rev() {
            oracle += m as f64 * 2f64.powi(-(m as i32) - 1);
        }
        assert!(
            (measured.value - closed).abs() <= 1e-10,
            "n={n}: measured {} vs closed form {closed}",
            measured.value
        );
        assert!(
            (oracle - closed).abs() <= 1e-12 * closed.max(1e-300),
            "n={n}: oracle {oracle} vs closed form {closed}"
        );
        assert!(measured.error_bound <= 1e-10, "n={n}: error {}", measured.error_bound);
    }
    pass(1, "unit-mass-closed-forms");
}

#[test]
fn c02_exact_apex_values() {
    let f: CombinedFunction = triangle(0.0).into();
    for n in 1..=50u32 {
        let v = f.evaluate(n as f64).unwrap();
        assert_eq!(v.to_bits(), (n as f64).to_bits(), "apex {n} gave {v}");
    }
    for p in [2f64.ln(), 3f64.ln(), 2.0] {
        let g: CombinedFunction = power(p).into();
        for n in 1..=30u32 {
            let v = g.evaluate(n as f64).unwrap();
            let want = (n as f64).powf(p);
            assert!(
                (v - want).abs() <= 1e-14 * want,
                "p={p} n={n}: {v} vs {want}"
            );
        }
    }
    pass(2, "exact-apex-values");
}

#[test]
fn c03_independence_witnesses() {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    for round in 0..100 {
        let ts = draw_shifts(&mut rng, 5, 0.0);
        let result = check_independence_witness(&ts).unwrap();
        assert!(result.passed, "round {round} with shifts {ts:?}: {:#?}", result.details);
    }
    pass(3, "independence-witnesses");
}

#[test]
fn c04_combination_growth() {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 0x04);
    for round in 0..50 {
        let k = rng.gen_range(2..=5usize);
        let ts = draw_shifts(&mut rng, k, 1e-3);
        let coefs: Vec<f64> = (0..k)
            .map(|_| {
                let mag = 0.25 + 1.75 * rng.gen::<f64>();
                if rng.gen::<bool>() {
                    mag
                } else {
                    -mag
                }
            })
            .collect();
        let result = check_combination_growth(&coefs, &ts).unwrap();
        assert!(result.passed, "round {round}: {:#?}", result.details);
    }
    pass(4, "combination-growth");
}

#[test]
fn c05_monomial_product_identities() {
    // every monomial in up to four variables with total degree at most four
    let mut seen: HashSet<Vec<u32>> = HashSet::new();
    for a in 0..=4u32 {
        for b in 0..=4u32 {
            for c in 0..=4u32 {
                for d in 0..=4u32 {
                    let sum = a + b + c + d;
                    if sum == 0 || sum > 4 {
                        continue;
                    }
                    let mut exps = vec![a, b, c, d];
                    while exps.last() == Some(&0) {
                        exps.pop();
                    }
                    seen.insert(exps);
                }
            }
        }
    }
    assert_eq!(seen.len(), 69, "enumeration miscounted");
    for exps in &seen {
        let m = Monomial::new(exps.clone()).unwrap();
        let result = check_monomial_identity(&m).unwrap();
        assert!(result.passed, "monomial {m}: {:#?}", result.details);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 0x05);
    for round in 0..20 {
        let exps: Vec<u32> = loop {
            let cand: Vec<u32> = (0..4).map(|_| rng.gen_range(0..=4u32)).collect();
            let sum: u32 = cand.iter().sum();
            if sum >= 1 && sum <= 4 {
                break cand;
            }
        };
        let m = Monomial::new(exps).unwrap();
        let result = check_monomial_identity(&m).unwrap();
        assert!(result.passed, "round {round}, monomial {m}: {:#?}", result.details);
    }
    pass(5, "monomial-product-identities");
}

#[test]
fn c06_codec_bijection() {
    for k in 2..=1_000_000u64 {
        let m = p_index_to_monomial(k).unwrap();
        let back = monomial_p_index(&m).unwrap();
        assert_eq!(back, k);
    }
    pass(6, "codec-bijection");
}

#[test]
fn c07_weighted_growth_floors() {
    // codes are spread multiplicatively so dominance kicks in at a modest index
    const POOL: [u64; 12] = [2, 3, 5, 8, 12, 18, 27, 41, 62, 93, 140, 210];
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 0x07);
    for round in 0..20 {
        let k = rng.gen_range(1..=4usize);
        let mut picks: Vec<u64> = Vec::new();
        while picks.len() < k {
            let c = POOL[rng.gen_range(0..POOL.len())];
            if !picks.contains(&c) {
                picks.push(c);
            }
        }
        let terms: Vec<(f64, Monomial)> = picks
            .iter()
            .map(|&c| {
                let mag = 0.25 + 1.75 * rng.gen::<f64>();
                let lam = if rng.gen::<bool>() { mag } else { -mag };
                (lam, p_index_to_monomial(c).unwrap())
            })
            .collect();
        let result = check_algebraic_growth(&terms).unwrap();
        assert!(result.passed, "round {round} codes {picks:?}: {:#?}", result.details);
    }
    pass(7, "weighted-growth-floors");
}

fn corpus() -> Vec<(String, CombinedFunction)> {
    vec![
        ("triangle".into(), triangle(0.0).into()),
        ("triangle:t=0.05".into(), triangle(0.05).into()),
        ("power:p=log2".into(), power(2f64.ln()).into()),
        ("power:p=2".into(), power(2.0).into()),
        (
            "2*triangle + 3*triangle:t=0.1".into(),
            combine(&[(2.0, triangle(0.0)), (3.0, triangle(0.1))]).unwrap(),
        ),
        (
            "smooth".into(),
            LazyTrain::new(TrainKind::Smooth, 1, 0.0).unwrap().into(),
        ),
    ]
}

#[test]
fn c08_approximant_certificates() {
    let cfg = cfg();
    for (label, f) in corpus() {
        for eps in [0.1, 0.01, 0.001] {
            let (chain, cert) = polygonal_approximant(&f, eps, &cfg)
                .unwrap_or_else(|e| panic!("{label} at eps={eps}: {e}"));
            let achieved = cert.achieved.value + cert.achieved.error_bound;
            assert!(achieved < eps, "{label} eps={eps}: achieved {achieved}");
            // re-measuring with twice the series depth must stay certified
            let g: CombinedFunction = chain.into();
            let deeper =
                dx_at_depth(&f, &g, &cfg, 2 * cert.achieved.truncation_index).unwrap();
            assert!(
                deeper.value + deeper.error_bound < eps,
                "{label} eps={eps}: deeper re-measure {} + {}",
                deeper.value,
                deeper.error_bound
            );
        }
    }
    pass(8, "approximant-certificates");
}

#[test]
fn c09_metric_truncation_stability() {
    let cfg = cfg();
    // ten pairs drawn from the five members with exact segment integrals
    let members: Vec<CombinedFunction> =
        corpus().into_iter().take(5).map(|(_, f)| f).collect();
    let mut pairs = 0;
    for i in 0..members.len() {
        for j in i + 1..members.len() {
            pairs += 1;
            let at = |depth: u32| {
                dx_at_depth(&members[i], &members[j], &cfg, depth).unwrap().value
            };
            let depths: Vec<f64> = (10..=35).map(at).collect();
            for n in 10..=30u32 {
                let shallow = depths[(n - 10) as usize];
                let deep = depths[(n - 5) as usize];
                assert!(
                    (deep - shallow).abs() < 2f64.powi(-(n as i32)),
                    "pair ({i},{j}) depth {n}: {shallow} vs {deep}"
                );
            }
        }
    }
    assert_eq!(pairs, 10);
    pass(9, "metric-truncation-stability");
}

#[test]
fn c10_sequence_convergence() {
    let cfg = cfg();
    let zero = CombinedFunction::zero();
    let mut previous = f64::INFINITY;
    for n in 1..=40u32 {
        let f: CombinedFunction = tail(n, 0.05).into();
        let d = dx_distance(&f, &zero, &cfg).unwrap();
        assert!(
            d.value < previous,
            "n={n}: distance {} did not drop below {previous}",
            d.value
        );
        if n >= 14 {
            assert!(d.value + d.error_bound < 1e-3, "n={n}: {}", d.value);
        }
        previous = d.value;
    }
    let seq = FuncSeq::TailTrains { base: triangle(0.05) };
    let d = dc0_distance(&seq, &FuncSeq::Zero, &cfg).unwrap();
    assert!(d.value > 0.0 && d.value < 3.0, "{}", d.value);
    assert!(d.error_bound < 1e-6, "{}", d.error_bound);
    pass(10, "sequence-convergence");
}

#[test]
fn c11_vanishing_tail_sets() {
    let train = triangle(0.05);
    for n in 1..=40u32 {
        let measured = support_tail_measure(&train, n).unwrap();
        let want = 2f64.powi(1 - n as i32);
        assert!(
            (measured.value - want).abs() <= 1e-12,
            "n={n}: {} vs {want}",
            measured.value
        );
    }
    // the tails vanish identically between the supports
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 0x11);
    for n in 1..=25u32 {
        let f: CombinedFunction = tail(n, 0.05).into();
        for _ in 0..10_000 {
            let k = rng.gen_range(0..(n + 60)) as f64;
            let x = k + 0.35 + 0.3 * rng.gen::<f64>();
            let v = f.value_at(x);
            assert!(v == 0.0, "n={n} x={x}: {v}");
        }
    }
    pass(11, "vanishing-tail-sets");
}

#[test]
fn c12_level_interval_refuter() {
    for m in 3..=30u32 {
        let f: CombinedFunction = tail(m, 0.0).into();
        let mf = m as f64;
        let ext = (1.0 - 1.0 / mf) * 2f64.powi(-(m as i32) - 1);
        let length = 2.0 * ext;
        let want = (1.0 - 1.0 / mf) * 2f64.powi(-(m as i32));
        assert_eq!(length.to_bits(), want.to_bits(), "m={m}");
        // the midpoint is the apex, and interior points stay above the level
        assert_eq!(f.value_at(mf).to_bits(), mf.to_bits(), "m={m}");
        assert!(f.value_at(mf - 0.5 * ext) > 1.0, "m={m}");
        assert!(f.value_at(mf + 0.5 * ext) > 1.0, "m={m}");
    }
    for start in [3u32, 10] {
        let result = refute_uniform_ae(start, 1.0).unwrap();
        assert!(result.passed, "start {start}: {:#?}", result.details);
    }
    pass(12, "level-interval-refuter");
}

#[test]
fn c13_growth_profiles() {
    let cfg = cfg();
    let cases = [
        (GrowthProfile::One, 30u32),
        (GrowthProfile::Poly(2), 30),
        (GrowthProfile::Exp, 30),
        (GrowthProfile::DoubleExp, 4),
    ];
    for (profile, cap) in cases {
        let train = LazyTrain::new(TrainKind::Alpha { profile }, 1, 0.0).unwrap();
        for n in 1..=cap {
            let ratio = train.value_at(n as f64) / profile.alpha(n as f64);
            assert!(
                (ratio - n as f64).abs() <= 1e-12 * n as f64,
                "{profile:?} n={n}: ratio {ratio}"
            );
        }
        let f: CombinedFunction = train.into();
        let mass = l1_norm(&f, &cfg).unwrap();
        assert!(
            mass.value + mass.error_bound <= 1.0,
            "{profile:?}: mass {} + {}",
            mass.value,
            mass.error_bound
        );
    }
    pass(13, "growth-profiles");
}

#[test]
fn c14_smooth_regularity() {
    let train = LazyTrain::new(TrainKind::Smooth, 1, 0.0).unwrap();
    let f: CombinedFunction = train.clone().into();
    for n in 1..=30u32 {
        let nf = n as f64;
        assert_eq!(f.value_at(nf).to_bits(), nf.to_bits(), "apex {n}");
    }
    for n in 1..=25u32 {
        let h = train.halfwidth(n);
        let c = train.center(n);
        assert_eq!(f.value_at(c - h), 0.0, "lower edge {n}");
        assert_eq!(f.value_at(c + h), 0.0, "upper edge {n}");
    }
    // bump masses keep the norm partial sums Cauchy
    let mass = |m: u32| {
        let c = train.center(m);
        let window = Interval::new(c - 0.25, c + 0.25, true, true).unwrap();
        let est = integrate_abs(&f, &window, 1e-12).unwrap();
        est.value + est.error_bound
    };
    for start in [31u32, 41] {
        let gap: f64 = (start..start + 10).map(&mass).sum();
        assert!(gap < 1e-6, "sum from {start}: {gap}");
    }
    // one-sided differences at the edges fade to third order
    for n in [3u32, 5, 8] {
        let h = train.halfwidth(n);
        let step = h / 512.0;
        for (sign, edge) in [(1.0, train.center(n) - h), (-1.0, train.center(n) + h)] {
            let v = |k: f64| f.value_at(edge + sign * k * step);
            let d1 = (v(1.0) - v(0.0)) / step;
            let d2 = (v(2.0) - 2.0 * v(1.0) + v(0.0)) / (step * step);
            let d3 = (v(3.0) - 3.0 * v(2.0) + 3.0 * v(1.0) - v(0.0)) / (step * step * step);
            for (order, d) in [(1, d1), (2, d2), (3, d3)] {
                assert!(d.abs() < 1e-4, "n={n} edge order {order}: {d}");
            }
        }
    }
    pass(14, "smooth-regularity");
}

#[test]
fn c15_small_unbounded_perturbations() {
    let cfg = cfg();
    let base = triangle(0.0);
    for eps in [0.1, 0.01] {
        for floor in [10.0, 100.0] {
            let (spikes, cert) = bump_perturb(&base, eps, floor, &cfg).unwrap();
            assert!(
                cert.moved.value + cert.moved.error_bound < eps,
                "eps={eps} floor={floor}: moved {}",
                cert.moved.value
            );
            let g = combine(&[(1.0, base.clone()), (1.0, spikes)]).unwrap();
            let witnessed = g.value_at(cert.witness_x).abs();
            assert!(
                witnessed > floor,
                "eps={eps} floor={floor}: witness {witnessed} at x={}",
                cert.witness_x
            );
            assert_eq!(witnessed, cert.witness_value.abs());
        }
    }
    pass(15, "small-unbounded-perturbations");
}

#[test]
fn c16_deterministic_reports() {
    let dest = |tag: &str| {
        let mut p = std::env::temp_dir();
        p.push(format!("trainkit-accept-{}-{tag}.json", std::process::id()));
        p
    };
    let a = dest("a");
    let b = dest("b");
    for path in [&a, &b] {
        let code = trainkit::cli::run([
            "trainkit",
            "verify",
            "--suite",
            "all",
            "--seed",
            "7",
            "--format",
            "json",
            "--out",
            &path.display().to_string(),
        ]);
        assert_eq!(code, 0);
    }
    let bytes_a = std::fs::read(&a).unwrap();
    let bytes_b = std::fs::read(&b).unwrap();
    assert!(!bytes_a.is_empty());
    assert_eq!(bytes_a, bytes_b);
    let report: serde_json::Value = serde_json::from_slice(&bytes_a).unwrap();
    assert!(report["results"].as_array().unwrap().len() >= 20);
    std::fs::remove_file(a).unwrap();
    std::fs::remove_file(b).unwrap();
    pass(16, "deterministic-reports");
}
