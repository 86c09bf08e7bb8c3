//! Statistical checks on the shared randomness: hash values, restrictions and
//! arrival times.

use alpha_hash::randomness::{arrival_time, eval_hash, restriction, ArrivalStream};
use alpha_hash::{KeySet, SharedSeed};
use statrs::distribution::{ChiSquared, ContinuousCDF};

fn chi_square_p_value(observed: &[u64], expected_each: f64) -> f64 {
    let stat: f64 = observed.iter().map(|&o| (o as f64 - expected_each).powi(2) / expected_each).sum();
    let dist = ChiSquared::new((observed.len() - 1) as f64).unwrap();
    1.0 - dist.cdf(stat)
}

#[test]
fn hash_values_are_uniform_on_the_range() {
    for (k, seed) in [(2u32, 1u64), (8, 2), (64, 3)] {
        let seed = SharedSeed::from_master(seed);
        let per_cell = 2_000u64;
        let samples = per_cell * k as u64;
        let mut counts = vec![0u64; k as usize];
        for i in 0..samples {
            let index = 1 + i / 97;
            let key = (i % 97) * 10_007 + 13;
            let v = eval_hash(&seed, index, key, k).unwrap();
            assert!((1..=k).contains(&v));
            counts[(v - 1) as usize] += 1;
        }
        let p = chi_square_p_value(&counts, per_cell as f64);
        assert!(p > 0.001, "k={k}: p={p}, counts={counts:?}");
    }
}

#[test]
fn restrictions_of_three_keys_cover_the_cube_evenly() {
    let keys = KeySet::new(1_000_000, vec![3, 17, 99]).unwrap();
    let seed = SharedSeed::from_master(42);
    let trials = 100_000u64;
    let mut counts = [0u64; 27];
    for t in 1..=trials {
        let x = restriction(&seed, t, &keys).unwrap();
        let v = x.values();
        let cell = (v[0] - 1) as usize * 9 + (v[1] - 1) as usize * 3 + (v[2] - 1) as usize;
        counts[cell] += 1;
    }
    let tv: f64 = counts.iter().map(|&c| (c as f64 / trials as f64 - 1.0 / 27.0).abs()).sum::<f64>() / 2.0;
    assert!(tv <= 0.02, "tv={tv}");
    assert!(chi_square_p_value(&counts, trials as f64 / 27.0) > 0.001);
}

#[test]
fn tenth_arrival_averages_ten() {
    let streams = 10_000u64;
    let mean: f64 = (0..streams).map(|s| arrival_time(s, 10).unwrap() / 10.0).sum::<f64>() / streams as f64;
    // T_10 / 10 has standard deviation 1/sqrt(10); the sample mean is within
    // about 0.003 of one.
    assert!((mean - 1.0).abs() < 0.015, "mean={mean}");
}

#[test]
fn arrival_gaps_are_unit_exponential() {
    let times: Vec<f64> = ArrivalStream::new(7).take(50_000).collect();
    let mut prev = 0.0;
    let mut counts = [0u64; 10];
    for &t in &times {
        let gap: f64 = t - prev;
        prev = t;
        // deciles of Exp(1)
        let u = 1.0 - (-gap).exp();
        counts[((u * 10.0) as usize).min(9)] += 1;
    }
    let p = chi_square_p_value(&counts, times.len() as f64 / 10.0);
    assert!(p > 0.001, "p={p}, counts={counts:?}");
}

#[test]
fn distinct_trial_seeds_give_unrelated_functions() {
    let keys = KeySet::new(1_000_000, (1..=32).collect()).unwrap();
    let a = restriction(&SharedSeed::for_trial(5, 0, 0), 1, &keys).unwrap();
    let b = restriction(&SharedSeed::for_trial(5, 0, 1), 1, &keys).unwrap();
    let c = restriction(&SharedSeed::for_trial(5, 1, 0), 1, &keys).unwrap();
    let agree = |x: &[u32], y: &[u32]| x.iter().zip(y).filter(|(p, q)| p == q).count();
    // Expected agreement is 1 of 32 positions.
    assert!(agree(a.values(), b.values()) < 8);
    assert!(agree(a.values(), c.values()) < 8);
}
