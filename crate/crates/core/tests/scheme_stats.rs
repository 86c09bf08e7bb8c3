//! Monte Carlo checks of the schemes against their exact index and
//! collision laws.

use alpha_hash::bounds::lambda_for_alpha;
use alpha_hash::codes::IntegerCode;
use alpha_hash::harness::{fit_empirical_code, run_experiment, ExperimentConfig, DEFAULT_UNIVERSE};
use alpha_hash::schemes::{mixture_branch, Branch, LambdaMode, Scheme, SchemeConfig, SchemeKind};
use alpha_hash::{KeySet, SharedSeed};
use statrs::distribution::{ChiSquared, ContinuousCDF};

fn config(kind: SchemeKind, k: usize, alpha: f64) -> SchemeConfig {
    SchemeConfig::new(kind, DEFAULT_UNIVERSE, k, alpha)
}

#[test]
fn zero_bit_at_k100_matches_birthday_law() {
    let r = run_experiment(&ExperimentConfig::new(config(SchemeKind::ZeroBit, 100, 0.0), 10_000, 1, 4)).unwrap();
    let d = r.pooled_d();
    let exact = 1.0 - 0.99f64.powi(99);
    assert!((d.mean - exact).abs() <= 3.0 * d.se, "mean {} vs {exact} (se {})", d.mean, d.se);
    assert!(r.outcomes().all(|o| o.bits == 0));
}

#[test]
fn perfect_index_at_k4_is_geometric() {
    let p: f64 = 24.0 / 256.0;
    let r = run_experiment(&ExperimentConfig::new(config(SchemeKind::Perfect, 4, 1.0), 20_000, 1, 8)).unwrap();
    // Cells t = 1..=20 and a tail cell.
    let mut observed = [0u64; 21];
    for o in r.outcomes() {
        let t = o.index.unwrap() as usize;
        observed[t.min(21) - 1] += 1;
        assert_eq!(o.colliding, 0);
    }
    let n = r.trials as f64;
    let mut stat = 0.0;
    for (i, &obs) in observed.iter().enumerate() {
        let prob = if i < 20 { (1.0 - p).powi(i as i32) * p } else { (1.0 - p).powi(20) };
        let e = n * prob;
        stat += (obs as f64 - e).powi(2) / e;
    }
    let pval = 1.0 - ChiSquared::new(20.0).unwrap().cdf(stat);
    assert!(pval > 0.001, "p={pval}");
}

#[test]
fn mixture_branch_frequency_tracks_lambda() {
    let lambda = lambda_for_alpha(0.7);
    let n = 50_000u64;
    let hits = (0..n).filter(|&s| mixture_branch(&SharedSeed::from_master(s), lambda) == Branch::Perfect).count();
    let freq = hits as f64 / n as f64;
    let se = (lambda * (1.0 - lambda) / n as f64).sqrt();
    assert!((freq - lambda).abs() <= 4.0 * se, "freq {freq} vs {lambda}");
}

#[test]
fn mixture_meets_its_collision_budget() {
    for alpha in [0.5, 0.8] {
        let r = run_experiment(&ExperimentConfig::new(config(SchemeKind::Mixture, 8, alpha), 4_000, 1, 12)).unwrap();
        let d = r.pooled_d();
        assert!(d.mean <= 1.0 - alpha + 3.0 * d.se, "alpha {alpha}: {}", d.mean);
        for o in r.outcomes() {
            match o.branch.unwrap() {
                Branch::Perfect => assert_eq!(o.colliding, 0),
                Branch::Zero => assert_eq!(o.bits, 0),
            }
        }
    }
}

#[test]
fn pfr_at_k12_meets_the_alpha_guarantee() {
    let r = run_experiment(&ExperimentConfig::new(config(SchemeKind::Pfr, 12, 0.9), 1_000, 1, 21)).unwrap();
    let d = r.pooled_d();
    assert!(d.mean <= 0.1 + 3.0 * d.se, "mean d {}", d.mean);
}

#[test]
fn calibrated_lambda_never_needs_more_draws() {
    for alpha in [0.6, 0.75, 0.9] {
        let theory = Scheme::new(config(SchemeKind::Pfr, 10, alpha)).unwrap();
        let calibrated =
            Scheme::new(config(SchemeKind::Pfr, 10, alpha).with_lambda_mode(LambdaMode::Calibrated)).unwrap();
        assert!(calibrated.urn().unwrap().w() <= theory.urn().unwrap().w());
        let r = run_experiment(&ExperimentConfig::new(
            config(SchemeKind::Pfr, 10, alpha).with_lambda_mode(LambdaMode::Calibrated),
            2_000,
            1,
            30,
        ))
        .unwrap();
        let d = r.pooled_d();
        assert!(d.mean <= 1.0 - alpha + 3.0 * d.se, "alpha {alpha}: {}", d.mean);
    }
}

#[test]
fn cost_does_not_depend_on_the_key_set() {
    let r = run_experiment(&ExperimentConfig::new(config(SchemeKind::Pfr, 8, 0.8), 1_500, 5, 77)).unwrap();
    let means: Vec<(f64, f64)> = r.key_sets.iter().map(|s| (s.bits.mean, s.bits.se)).collect();
    for (i, a) in means.iter().enumerate() {
        for b in &means[i + 1..] {
            let se = (a.1 * a.1 + b.1 * b.1).sqrt();
            assert!((a.0 - b.0).abs() < 5.0 * se, "{a:?} vs {b:?}");
        }
    }
}

#[test]
fn fitted_code_is_no_longer_than_delta() {
    let base = config(SchemeKind::Pfr, 10, 0.85);
    let fitted = fit_empirical_code(&base, 4_000, 5).unwrap();
    let delta =
        run_experiment(&ExperimentConfig::new(base.clone().with_code(IntegerCode::EliasDelta), 2_000, 1, 9)).unwrap();
    let empirical = run_experiment(&ExperimentConfig::new(base.with_code(fitted), 2_000, 1, 9)).unwrap();
    // Same seeds, so both runs select the same indices.
    let idx = |r: &alpha_hash::harness::ExperimentReport| r.outcomes().map(|o| o.index).collect::<Vec<_>>();
    assert_eq!(idx(&delta), idx(&empirical));
    assert!(empirical.pooled_bits().mean <= delta.pooled_bits().mean + 0.5);
}

#[test]
fn single_key_sets_are_free_to_describe_perfectly() {
    let keys = KeySet::new(10, vec![4]).unwrap();
    let scheme = Scheme::new(config(SchemeKind::Perfect, 1, 1.0).with_code(IntegerCode::EliasGamma)).unwrap();
    let enc = scheme.encode(&keys, &SharedSeed::from_master(0)).unwrap();
    assert_eq!(enc.index, Some(1));
    assert_eq!(enc.description.len(), 1);
}
