//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::cell::OnceCell;
use std::collections::HashMap;
use std::process::ExitCode;
use std::time::Instant;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use alpha_hash::bounds::{finite_k_residue, lambda_for_alpha, sampling_rate_bound, sweep, uniform_grid, INV_E};
use alpha_hash::codes::{decode_int, IntegerCode};
use alpha_hash::harness::{report_csv, run_experiment, ExperimentConfig, ExperimentReport, DEFAULT_UNIVERSE};
use alpha_hash::model::{collision_profile, singleton_count};
use alpha_hash::oracle::{
    conditional_entropy_identity_check, enumerate_r_lambda, exact_entropy, exact_expected_distortion,
};
use alpha_hash::schemes::{pfr_encode, Scheme, SchemeConfig, SchemeKind};
use alpha_hash::urn::{urn_entropy_lower_bound, UrnDistribution, LOG2_E};
use alpha_hash::{HashFunctionHandle, KeySet, RestrictionVector, SharedSeed};

/// Lambda grid shared by the exact criteria, as `num / 4`.
const QUARTERS: [u32; 5] = [0, 1, 2, 3, 4];
const ENTROPY_TOL: f64 = 1e-9;
const IDENTITY_TOL: f64 = 1e-9;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn all_vectors(k: usize) -> impl Iterator<Item = RestrictionVector> {
    (0..k.pow(k as u32)).map(move |mut code| {
        let mut v = Vec::with_capacity(k);
        for _ in 0..k {
            v.push((code % k) as u32 + 1);
            code /= k;
        }
        RestrictionVector(v)
    })
}

fn draws_for_quarter(k: usize, num: u32) -> usize {
    (num as usize * k).div_ceil(4)
}

fn run(kind: SchemeKind, k: usize, alpha: f64, trials: usize, key_sets: usize, seed: u64) -> ExperimentReport {
    let cfg = SchemeConfig::new(kind, DEFAULT_UNIVERSE, k, alpha);
    run_experiment(&ExperimentConfig::new(cfg, trials, key_sets, seed)).expect("experiment runs")
}

fn oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let mut checked = 0usize;
    let mut mismatches = Vec::new();
    for k in 1..=5 {
        for w in 0..=k {
            let law = enumerate_r_lambda(k, w).unwrap();
            let urn = UrnDistribution::with_draws(k, w).unwrap();
            for x in all_vectors(k) {
                checked += 1;
                if urn.pmf(&x).unwrap() != law.mass(&x) {
                    mismatches.push((k, w, x.0.clone()));
                }
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        mismatches.is_empty() && secs < 60.0,
        format!("{checked} (k, w, x) triples, {} mismatches, {secs:.1}s", mismatches.len()),
    )
}

fn expected_distortion_cap_exact() -> Outcome {
    // 1 - 1/e lies strictly between these two rationals.
    let scale = BigInt::from(10u64.pow(15));
    let lower = BigRational::new(BigInt::from(632_120_558_828_557u64), scale.clone());
    let upper = BigRational::new(BigInt::from(632_120_558_828_558u64), scale);
    let mut failures = Vec::new();
    let mut points = 0;
    for k in 1..=5 {
        for num in QUARTERS {
            let w = draws_for_quarter(k, num);
            let d = exact_expected_distortion(&enumerate_r_lambda(k, w).unwrap());
            let share = BigRational::new(BigInt::from(4 - num), BigInt::from(4));
            points += 1;
            if d <= &lower * &share {
                continue;
            }
            let verdict = if d > &upper * &share { "exceeds" } else { "undecided at 1e-15" };
            failures.push(format!("k={k} lambda={}/4 E[d]={d} {verdict}", num));
        }
    }
    outcome(failures.is_empty(), format!("{points} grid points, failures: {failures:?}"))
}

fn entropy_lower_bound_exact() -> Outcome {
    let mut failures = Vec::new();
    let mut worst_gap = f64::INFINITY;
    for k in 1..=5 {
        let entropies: Vec<f64> = (0..=k).map(|w| exact_entropy(&enumerate_r_lambda(k, w).unwrap())).collect();
        for num in QUARTERS {
            let lambda = num as f64 / 4.0;
            let h = entropies[draws_for_quarter(k, num)];
            let bound = urn_entropy_lower_bound(k, lambda);
            worst_gap = worst_gap.min(h - bound);
            if h < bound - ENTROPY_TOL {
                failures.push(format!("k={k} lambda={lambda}: H={h:.6} < {bound:.6}"));
            }
        }
    }
    let mut identity_failures = Vec::new();
    for k in 1..=5 {
        for w in 0..=k {
            let check = conditional_entropy_identity_check(k, w).unwrap();
            if !check.equal || (check.lhs - check.rhs).abs() > IDENTITY_TOL {
                identity_failures.push(format!("k={k} w={w}"));
            }
        }
    }
    outcome(
        failures.is_empty() && identity_failures.is_empty(),
        format!(
            "entropy bound violations {failures:?} (min H - bound {worst_gap:.4}); H(X|v)=H(Y|v) mismatches {identity_failures:?}"
        ),
    )
}

fn zero_bit_law() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for (k, seed) in [(2usize, 40u64), (10, 41), (100, 42)] {
        let r = run(SchemeKind::ZeroBit, k, 0.0, 10_000, 1, seed);
        let d = r.pooled_d();
        let exact = 1.0 - (1.0 - 1.0 / k as f64).powi(k as i32 - 1);
        let ok = (d.mean - exact).abs() <= 3.0 * d.se
            && d.mean <= 1.0 - INV_E + 3.0 * d.se
            && r.outcomes().all(|o| o.bits == 0);
        pass &= ok;
        parts.push(format!("k={k} d={:.4}±{:.4} exact {exact:.4}", d.mean, d.se));
    }
    outcome(pass, parts.join("; "))
}

fn perfect_scheme(k16: &ExperimentReport) -> Outcome {
    let r3 = run(SchemeKind::Perfect, 3, 1.0, 10_000, 1, 50);
    let r8 = run(SchemeKind::Perfect, 8, 1.0, 1_000, 1, 51);
    let collision_free = [&r3, &r8, k16].iter().all(|r| r.outcomes().all(|o| o.colliding == 0));

    let bpk = k16.pooled_bits_per_key();
    let rate_ok = k16.trials >= 200 && bpk <= LOG2_E + 0.5;

    let p: f64 = 2.0 / 9.0;
    let cells = 30usize;
    let mut observed = vec![0u64; cells + 1];
    for o in r3.outcomes() {
        observed[(o.index.unwrap() as usize).min(cells + 1) - 1] += 1;
    }
    let n = r3.trials as f64;
    let stat: f64 = observed
        .iter()
        .enumerate()
        .map(|(i, &obs)| {
            let prob = if i < cells { (1.0 - p).powi(i as i32) * p } else { (1.0 - p).powi(cells as i32) };
            (obs as f64 - n * prob).powi(2) / (n * prob)
        })
        .sum();
    let p_value = 1.0 - ChiSquared::new(cells as f64).unwrap().cdf(stat);

    outcome(
        collision_free && rate_ok && p_value > 0.001,
        format!(
            "collision-free {collision_free}; k=16 bits/key {bpk:.4} over {} trials (limit {:.4}); k=3 index chi-square p={p_value:.4}",
            k16.trials,
            LOG2_E + 0.5
        ),
    )
}

fn pfr_sampling() -> Outcome {
    let dist = UrnDistribution::with_draws(4, 2).unwrap();
    let keys = KeySet::new(DEFAULT_UNIVERSE, vec![11, 2_024, 77_777, 999_999]).unwrap();
    let code = IntegerCode::EliasDelta;
    let samples = 100_000u64;
    let mut counts: HashMap<Vec<u32>, u64> = HashMap::new();
    for t in 0..samples {
        let seed = SharedSeed::for_trial(60, 0, t);
        let enc = pfr_encode(&keys, &seed, &dist, &code, u64::MAX).unwrap();
        let (index, _) = decode_int(&code, &enc.description).unwrap();
        let x = HashFunctionHandle::new(seed, index, 4).unwrap().restrict(&keys).unwrap();
        *counts.entry(x.0).or_default() += 1;
    }
    let mut tv = 0.0;
    let mut outside = 0u64;
    for x in all_vectors(4) {
        let p = dist.pmf(&x).unwrap().to_f64().unwrap();
        let observed = counts.get(&x.0).copied().unwrap_or(0);
        if p == 0.0 {
            outside += observed;
        }
        tv += (observed as f64 / samples as f64 - p).abs();
    }
    tv /= 2.0;
    outcome(tv <= 0.02 && outside == 0, format!("TV={tv:.5} over {samples} samples, {outside} off-support"))
}

fn pfr_rate() -> Outcome {
    let k = 12;
    let mut pass = true;
    let mut parts = Vec::new();
    for (alpha, seed) in [(0.7, 70u64), (0.8, 71), (0.9, 72)] {
        let r = run(SchemeKind::Pfr, k, alpha, 1_000, 1, seed);
        let d = r.pooled_d();
        let bpk = r.pooled_bits_per_key();
        let limit = sampling_rate_bound(alpha) + finite_k_residue(k) / k as f64 + 0.3;
        pass &= d.mean <= 1.0 - alpha + 3.0 * d.se && bpk <= limit;
        parts.push(format!("alpha={alpha} d={:.4}±{:.4} bits/key {bpk:.4} (limit {limit:.4})", d.mean, d.se));
    }
    outcome(pass, parts.join("; "))
}

fn bound_curve() -> Outcome {
    let points = sweep(&uniform_grid(101));
    let mut problems = Vec::new();
    for p in &points {
        let (m, s) = (p.mixture_bound_bits_per_key, p.sampling_bound_bits_per_key);
        if p.alpha <= INV_E {
            if m.abs() > 1e-9 || s.abs() > 1e-9 {
                problems.push(format!("alpha={} not zero", p.alpha));
            }
        } else if p.alpha < 1.0 {
            if s >= m {
                problems.push(format!("alpha={} sampling {s} >= mixture {m}", p.alpha));
            }
        } else if (m - LOG2_E).abs() > 1e-9 || (s - LOG2_E).abs() > 1e-9 {
            problems.push(format!("alpha=1 gives ({m}, {s})"));
        }
    }
    let last = points.last().unwrap();
    outcome(
        points.len() == 101 && problems.is_empty(),
        format!(
            "{} points; alpha=1 -> ({:.6}, {:.6}); problems {problems:?}",
            points.len(),
            last.mixture_bound_bits_per_key,
            last.sampling_bound_bits_per_key
        ),
    )
}

fn mixture_scheme(perfect16: &ExperimentReport) -> Outcome {
    let alpha = 0.9;
    let r = run(SchemeKind::Mixture, 16, alpha, 1_000, 1, 90);
    let d = r.pooled_d();
    let lambda = lambda_for_alpha(alpha);
    let target = lambda * perfect16.pooled_bits_per_key();
    let bpk = r.pooled_bits_per_key();
    let rel = (bpk - target).abs() / target;
    outcome(
        d.mean <= 0.1 + 3.0 * d.se && rel <= 0.10,
        format!(
            "d={:.4}±{:.4}; bits/key {bpk:.4} vs lambda x perfect {target:.4} ({:.1}% off)",
            d.mean,
            d.se,
            100.0 * rel
        ),
    )
}

fn random_case(rng: &mut ChaCha8Rng) -> (SchemeConfig, KeySet, SharedSeed) {
    let kind = [SchemeKind::Perfect, SchemeKind::ZeroBit, SchemeKind::Mixture, SchemeKind::Pfr][rng.gen_range(0..4)];
    let k = rng.gen_range(1..=9usize);
    let n = rng.gen_range(k as u64..=2_000_000);
    let alpha = rng.gen_range(0.0..=1.0);
    let mut cfg = SchemeConfig::new(kind, n, k, alpha);
    match rng.gen_range(0..4) {
        0 => cfg = cfg.with_code(IntegerCode::EliasGamma),
        1 => cfg = cfg.with_code(IntegerCode::EliasDelta),
        2 => cfg = cfg.with_code(IntegerCode::Golomb { m: rng.gen_range(1..=64) }),
        _ => {}
    }
    let keys = KeySet::random(n, k, rng).unwrap();
    (cfg, keys, SharedSeed::from_master(rng.gen()))
}

fn determinism_and_round_trip() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(100);
    let mut failures = Vec::new();
    for case in 0..100 {
        let (cfg, keys, seed) = random_case(&mut rng);
        let attempt = || -> alpha_hash::Result<(Vec<u8>, RestrictionVector)> {
            let scheme = Scheme::new(cfg.clone())?;
            let enc = scheme.encode(&keys, &seed)?;
            let decoded = scheme.decode(&enc.description, &seed)?.restrict(&keys)?;
            if decoded != enc.handle.restrict(&keys)? {
                return Err(alpha_hash::Error::RoundTrip);
            }
            Ok((alpha_hash::codes::to_wire(cfg.code.tag(), &enc.description)?, decoded))
        };
        match (attempt(), attempt()) {
            (Ok(a), Ok(b)) if a == b => {
                if cfg.kind == SchemeKind::Perfect && collision_profile(&a.1).weight != 0 {
                    failures.push(format!("case {case}: perfect output collides"));
                }
                if singleton_count(&a.1) > keys.len() {
                    failures.push(format!("case {case}: impossible singleton count"));
                }
            }
            (Ok(_), Ok(_)) => failures.push(format!("case {case}: re-run differs")),
            (Err(e), _) | (_, Err(e)) => failures.push(format!("case {case}: {e}")),
        }
    }
    let csv_a = report_csv(&run(SchemeKind::Pfr, 7, 0.8, 300, 3, 101));
    let csv_b = report_csv(&run(SchemeKind::Pfr, 7, 0.8, 300, 3, 101));
    let identical = csv_a.as_bytes() == csv_b.as_bytes();
    outcome(
        failures.is_empty() && identical,
        format!("100 cases, failures {failures:?}; report re-run byte-identical {identical}"),
    )
}

fn main() -> ExitCode {
    let names = [
        "oracle equivalence (closed-form pmf)",
        "expected collision fraction cap, exact",
        "entropy lower bound, exact",
        "zero-bit collision law",
        "perfect scheme",
        "sampling scheme correctness",
        "sampling scheme rate",
        "bound curve",
        "mixture scheme",
        "determinism and round trip",
    ];
    let perfect16 = OnceCell::new();
    let perfect16 = || perfect16.get_or_init(|| run(SchemeKind::Perfect, 16, 1.0, 400, 1, 16));
    let checks: Vec<Box<dyn Fn() -> Outcome + '_>> = vec![
        Box::new(oracle_equivalence),
        Box::new(expected_distortion_cap_exact),
        Box::new(entropy_lower_bound_exact),
        Box::new(zero_bit_law),
        Box::new(|| perfect_scheme(perfect16())),
        Box::new(pfr_sampling),
        Box::new(pfr_rate),
        Box::new(bound_curve),
        Box::new(|| mixture_scheme(perfect16())),
        Box::new(determinism_and_round_trip),
    ];
    let mut failed = 0;
    for (i, (name, check)) in names.iter().zip(&checks).enumerate() {
        let start = Instant::now();
        let o = check();
        if !o.pass {
            failed += 1;
        }
        println!(
            "criterion {:>2} {} {name} [{:.1}s]: {}",
            i + 1,
            if o.pass { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64(),
            o.detail
        );
    }
    println!("{} of {} criteria passed", names.len() - failed, names.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
