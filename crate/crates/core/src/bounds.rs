//! Closed-form achievability bounds on description length.
//!
//! Lengths are in bits, rates in bits per key. Everything is plain `f64`.

use crate::urn::{urn_entropy_lower_bound, LOG2_E, ONE_MINUS_INV_E};

pub const INV_E: f64 = 1.0 / std::f64::consts::E;

/// `((alpha - 1/e) / (1 - 1/e))^+`: the share of the budget that must come
/// from collision-free hashing.
pub fn lambda_for_alpha(alpha: f64) -> f64 {
    ((alpha - INV_E) / ONE_MINUS_INV_E).clamp(0.0, 1.0)
}

/// Expected length of a minimal perfect hash description: `k log2 e + 3`.
pub fn perfect_length_bound(k: usize) -> f64 {
    k as f64 * LOG2_E + 3.0
}

/// Rate of randomizing between perfect and zero-bit hashing.
pub fn mixture_rate_bound(alpha: f64) -> f64 {
    lambda_for_alpha(alpha) * LOG2_E
}

/// Length bound from sampling a law with entropy `entropy_x` on `[k]^k`:
/// `D + log2(D + 1) + 5` with `D = k log2 k - entropy_x`.
pub fn length_from_entropy(k: usize, entropy_x: f64) -> f64 {
    let d = k as f64 * (k as f64).log2() - entropy_x;
    d + (d + 1.0).log2() + 5.0
}

fn log_correction(lambda: f64, shift: f64) -> f64 {
    // log2((1 - (lambda - shift)/2) / (1 - (lambda - shift)/2 - (1 - 1/e)(1 - lambda - shift)))
    let numer = 1.0 - (lambda - shift) / 2.0;
    (numer / (numer - ONE_MINUS_INV_E * (1.0 - lambda - shift))).log2()
}

/// Amortized rate of the sampling scheme.
pub fn sampling_rate_bound(alpha: f64) -> f64 {
    let lambda = lambda_for_alpha(alpha);
    if lambda == 0.0 {
        return 0.0;
    }
    lambda * (LOG2_E - log_correction(lambda, 0.0))
}

/// Leading terms of the finite-`k` length bound,
/// `lambda k log2 e - lambda k log2(...)`. This equals
/// `k log2 k - urn_entropy_lower_bound(k, lambda)`.
pub fn sampling_main_terms(k: usize, alpha: f64) -> f64 {
    let lambda = lambda_for_alpha(alpha);
    if lambda == 0.0 {
        return 0.0;
    }
    let lk = lambda * k as f64;
    lk * LOG2_E - lk * log_correction(lambda, 1.0 / k as f64)
}

/// `log2(k log2 k + 1) + 5`, the sampling overhead at the largest possible
/// divergence on `[k]^k`. Used as slack for finite-`k` measurements.
pub fn finite_k_residue(k: usize) -> f64 {
    (k as f64 * (k as f64).log2() + 1.0).log2() + 5.0
}

/// Finite-`k` length bound: the main terms plus the sampling overhead
/// `log2(D + 1) + 5` evaluated at `D` = main terms (clamped at 0). This is
/// exactly `length_from_entropy` applied to the entropy lower bound, and it
/// never exceeds `main + finite_k_residue(k)` while the main terms stay
/// below `k log2 k`.
pub fn sampling_length_bound(k: usize, alpha: f64) -> f64 {
    let main = sampling_main_terms(k, alpha);
    main + (main.max(0.0) + 1.0).log2() + 5.0
}

/// One point of the rate curves.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct BoundPoint {
    pub alpha: f64,
    pub mixture_bound_bits_per_key: f64,
    pub sampling_bound_bits_per_key: f64,
}

pub fn bound_point(alpha: f64) -> BoundPoint {
    BoundPoint {
        alpha,
        mixture_bound_bits_per_key: mixture_rate_bound(alpha),
        sampling_bound_bits_per_key: sampling_rate_bound(alpha),
    }
}

pub fn sweep(alpha_grid: &[f64]) -> Vec<BoundPoint> {
    alpha_grid.iter().map(|&a| bound_point(a)).collect()
}

/// `n` evenly spaced points on `[0, 1]` (a single point is `0`).
pub fn uniform_grid(n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![0.0],
        _ => (0..n).map(|i| i as f64 / (n - 1) as f64).collect(),
    }
}

/// CSV rendering of a sweep, six decimals.
pub fn sweep_csv(points: &[BoundPoint]) -> String {
    let mut out = String::from("alpha,mixture_bits_per_key,sampling_bits_per_key\n");
    for p in points {
        out.push_str(&format!(
            "{:.6},{:.6},{:.6}\n",
            p.alpha, p.mixture_bound_bits_per_key, p.sampling_bound_bits_per_key
        ));
    }
    out
}

/// Entropy lower bound re-exported here so callers composing bounds need one
/// import.
pub fn entropy_lower_bound(k: usize, alpha: f64) -> f64 {
    urn_entropy_lower_bound(k, lambda_for_alpha(alpha))
}
