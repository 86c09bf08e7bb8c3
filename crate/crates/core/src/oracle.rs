//! Ground truth by brute force.
//!
//! Everything here enumerates the urn process literally, over all draw
//! sequences and all coordinate permutations. Nothing on this path calls the
//! closed forms in [`crate::urn`].

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::model::{collision_fraction_vector, collision_profile, RestrictionVector};
use crate::urn::{urn_entropy_lower_bound, UrnDistribution, LOG2_E};

/// Largest `k` for which distributions are enumerated.
pub const MAX_ENUMERATION_K: usize = 6;
/// Largest `k` for the joint (vector, collision pattern) checks.
pub const MAX_JOINT_K: usize = 5;
/// Largest `k` for the perfect-hashing index law.
pub const MAX_INDEX_LAW_K: usize = 8;

const ENTROPY_TOL: f64 = 1e-9;

/// A finite law on `[k]^k` with exact probabilities.
#[derive(Clone, Debug, PartialEq)]
pub struct ExactDistribution {
    /// Sorted by vector; every probability is positive.
    support: Vec<(RestrictionVector, BigRational)>,
}

impl ExactDistribution {
    fn from_counts(k: usize, counts: &[u64], total: u64) -> Self {
        let mut support: Vec<_> = counts
            .iter()
            .enumerate()
            .filter(|&(_, &c)| c > 0)
            .map(|(code, &c)| (decode_vector(code, k), BigRational::new(BigInt::from(c), BigInt::from(total))))
            .collect();
        support.sort_by(|a: &(RestrictionVector, BigRational), b| a.0.cmp(&b.0));
        Self { support }
    }

    pub fn support(&self) -> &[(RestrictionVector, BigRational)] {
        &self.support
    }

    /// Probability of `x`; zero off the support.
    pub fn mass(&self, x: &RestrictionVector) -> BigRational {
        match self.support.binary_search_by(|(v, _)| v.cmp(x)) {
            Ok(i) => self.support[i].1.clone(),
            Err(_) => BigRational::zero(),
        }
    }

    pub fn total_mass(&self) -> BigRational {
        self.support.iter().fold(BigRational::zero(), |acc, (_, p)| acc + p)
    }
}

/// Vectors are indexed in base `k` with the first coordinate least
/// significant; entries are stored 0-based inside the code.
fn encode_vector(x: &[u32], k: usize) -> usize {
    x.iter().rev().fold(0, |acc, &v| acc * k + (v as usize - 1))
}

fn decode_vector(mut code: usize, k: usize) -> RestrictionVector {
    let mut v = Vec::with_capacity(k);
    for _ in 0..k {
        v.push((code % k) as u32 + 1);
        code /= k;
    }
    RestrictionVector(v)
}

fn check_k(k: usize, max: usize) -> Result<()> {
    if k == 0 || k > max {
        return Err(Error::EnumerationTooLarge { k, max });
    }
    Ok(())
}

fn permutations(k: usize) -> Vec<Vec<usize>> {
    fn rec(prefix: &mut Vec<usize>, used: &mut Vec<bool>, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                prefix.push(i);
                rec(prefix, used, out);
                prefix.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; k], &mut out);
    out
}

/// Every pre-shuffle sequence `y`, each equally likely.
fn urn_sequences(k: usize, w: usize) -> Vec<Vec<u32>> {
    let mut prefixes: Vec<Vec<u32>> = vec![vec![]];
    for _ in 0..w {
        prefixes = prefixes
            .into_iter()
            .flat_map(|p| {
                let free: Vec<u32> = (1..=k as u32).filter(|v| !p.contains(v)).collect();
                free.into_iter()
                    .map(move |v| {
                        let mut q = p.clone();
                        q.push(v);
                        q
                    })
                    .collect::<Vec<_>>()
            })
            .collect();
    }
    let mut out = Vec::new();
    for prefix in prefixes {
        let left: Vec<u32> = (1..=k as u32).filter(|v| !prefix.contains(v)).collect();
        let mut seqs = vec![prefix];
        for _ in w..k {
            seqs = seqs
                .into_iter()
                .flat_map(|s| {
                    left.iter()
                        .map(|&v| {
                            let mut t = s.clone();
                            t.push(v);
                            t
                        })
                        .collect::<Vec<_>>()
                })
                .collect();
        }
        out.extend(seqs);
    }
    out
}

/// Law of the pre-shuffle sequence `Y`.
pub fn enumerate_pre_permutation(k: usize, w: usize) -> Result<ExactDistribution> {
    check_k(k, MAX_ENUMERATION_K)?;
    check_w(k, w)?;
    let seqs = urn_sequences(k, w);
    let mut counts = vec![0u64; k.pow(k as u32)];
    for y in &seqs {
        counts[encode_vector(y, k)] += 1;
    }
    Ok(ExactDistribution::from_counts(k, &counts, seqs.len() as u64))
}

fn check_w(k: usize, w: usize) -> Result<()> {
    if w > k {
        return Err(Error::InvalidParameter(format!("w = {w} exceeds k = {k}")));
    }
    Ok(())
}

/// Law of `X`, the shuffled urn sequence.
pub fn enumerate_r_lambda(k: usize, w: usize) -> Result<ExactDistribution> {
    check_k(k, MAX_ENUMERATION_K)?;
    check_w(k, w)?;
    let seqs = urn_sequences(k, w);
    let perms = permutations(k);
    let mut counts = vec![0u64; k.pow(k as u32)];
    let mut x = vec![0u32; k];
    for y in &seqs {
        for pi in &perms {
            for (slot, &src) in x.iter_mut().zip(pi) {
                *slot = y[src];
            }
            counts[encode_vector(&x, k)] += 1;
        }
    }
    Ok(ExactDistribution::from_counts(k, &counts, (seqs.len() * perms.len()) as u64))
}

fn entropy_of<'a>(probs: impl Iterator<Item = &'a BigRational>) -> f64 {
    probs.map(|p| p.to_f64().unwrap()).filter(|&p| p > 0.0).map(|p| -p * p.log2()).sum()
}

/// Shannon entropy in bits.
pub fn exact_entropy(dist: &ExactDistribution) -> f64 {
    entropy_of(dist.support.iter().map(|(_, p)| p))
}

/// `log2(k!/(k-w)!) + (k-w) log2(k-w)`, with `0 log 0 = 0`.
pub fn exact_pre_permutation_entropy(k: usize, w: usize) -> Result<f64> {
    check_k(k, MAX_ENUMERATION_K)?;
    check_w(k, w)?;
    let m = k - w;
    let falling: f64 = ((m + 1)..=k).map(|i| (i as f64).log2()).sum();
    let tail = if m > 0 { m as f64 * (m as f64).log2() } else { 0.0 };
    Ok(falling + tail)
}

/// `E[d(X)]` as an exact rational.
pub fn exact_expected_distortion(dist: &ExactDistribution) -> BigRational {
    dist.support.iter().fold(BigRational::zero(), |acc, (x, p)| {
        let d = collision_fraction_vector(x);
        acc + p * BigRational::new(BigInt::from(*d.numer()), BigInt::from(*d.denom()))
    })
}

/// `H(V | v(V))` where `v` is the collision indicator.
fn conditional_entropy_given_pattern(dist: &ExactDistribution) -> f64 {
    let mut groups: BTreeMap<Vec<bool>, Vec<&BigRational>> = BTreeMap::new();
    for (x, p) in &dist.support {
        groups.entry(collision_profile(x).indicator).or_default().push(p);
    }
    groups
        .values()
        .map(|ps| {
            let total = ps.iter().fold(BigRational::zero(), |a, p| a + *p);
            let conditional: Vec<BigRational> = ps.iter().map(|p| *p / &total).collect();
            total.to_f64().unwrap() * entropy_of(conditional.iter())
        })
        .sum()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IdentityCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub equal: bool,
}

/// Compares `H(X | v(X))` with `H(Y | v(Y))`.
pub fn conditional_entropy_identity_check(k: usize, w: usize) -> Result<IdentityCheck> {
    check_k(k, MAX_JOINT_K)?;
    let lhs = conditional_entropy_given_pattern(&enumerate_r_lambda(k, w)?);
    let rhs = conditional_entropy_given_pattern(&enumerate_pre_permutation(k, w)?);
    Ok(IdentityCheck { lhs, rhs, equal: (lhs - rhs).abs() <= 1e-12 })
}

/// Success probability `k!/k^k` of one uniform hash function being perfect.
pub fn exact_perfect_index_law(k: usize) -> Result<BigRational> {
    check_k(k, MAX_INDEX_LAW_K)?;
    let fact: BigInt = (1..=k).map(BigInt::from).product();
    Ok(BigRational::new(fact, BigInt::from(k).pow(k as u32)))
}

/// Counts injective vectors in `[k]^k` directly.
fn injective_fraction_by_enumeration(k: usize) -> BigRational {
    let total = k.pow(k as u32);
    let injective = (0..total)
        .filter(|&code| {
            let x = decode_vector(code, k);
            collision_fraction_vector(&x).numer() == &0
        })
        .count();
    BigRational::new(BigInt::from(injective), BigInt::from(total))
}

/// `lambda` values used by the bound checks, as exact quarters.
pub const LAMBDA_GRID: [(u32, u32); 5] = [(0, 4), (1, 4), (2, 4), (3, 4), (4, 4)];

/// Rational strictly below `1 - 1/e` (= 0.63212055882855767...).
fn one_minus_inv_e_lower() -> BigRational {
    BigRational::new(BigInt::from(632_120_558_828_557u64), BigInt::from(10u64.pow(15)))
}

/// One line of the verification table.
#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct CheckRow {
    pub check: &'static str,
    pub k: usize,
    pub w: usize,
    pub lambda: Option<f64>,
    pub lhs: f64,
    pub rhs: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, Default, serde::Serialize)]
pub struct VerificationReport {
    pub rows: Vec<CheckRow>,
}

impl VerificationReport {
    pub fn all_passed(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckRow> {
        self.rows.iter().filter(|r| !r.pass)
    }

    pub fn render(&self) -> String {
        let mut out = format!(
            "{:<34} {:>2} {:>2} {:>6} {:>16} {:>16}  {}\n",
            "check", "k", "w", "lambda", "lhs", "rhs", "result"
        );
        for r in &self.rows {
            let lambda = r.lambda.map(|l| format!("{l:.2}")).unwrap_or_else(|| "-".into());
            out.push_str(&format!(
                "{:<34} {:>2} {:>2} {:>6} {:>16.9} {:>16.9}  {}\n",
                r.check,
                r.k,
                r.w,
                lambda,
                r.lhs,
                r.rhs,
                if r.pass { "PASS" } else { "FAIL" }
            ));
        }
        let failed = self.failures().count();
        out.push_str(&format!("{} checks, {} failed\n", self.rows.len(), failed));
        out
    }
}

/// Runs every exhaustive check for `k` in `1..=kmax`. Each row carries the two
/// sides it compared; for inequalities `lhs` must not fall below `rhs` (or
/// exceed it, for the distortion cap) and `pass` records the outcome.
pub fn verify(kmax: usize) -> Result<VerificationReport> {
    check_k(kmax, MAX_ENUMERATION_K)?;
    let mut report = VerificationReport::default();
    let mut push = |check, k, w, lambda, lhs: f64, rhs: f64, pass| {
        report.rows.push(CheckRow { check, k, w, lambda, lhs, rhs, pass });
    };
    for k in 1..=kmax {
        let law = exact_perfect_index_law(k)?;
        let brute = injective_fraction_by_enumeration(k);
        push("perfect_index_success_prob", k, k, None, law.to_f64().unwrap(), brute.to_f64().unwrap(), law == brute);

        let mut entropies = Vec::with_capacity(k + 1);
        for w in 0..=k {
            let x_law = enumerate_r_lambda(k, w)?;
            let y_law = enumerate_pre_permutation(k, w)?;
            let urn = UrnDistribution::with_draws(k, w)?;

            let mut mismatches = 0usize;
            for code in 0..k.pow(k as u32) {
                let x = decode_vector(code, k);
                if urn.pmf(&x)? != x_law.mass(&x) {
                    mismatches += 1;
                }
            }
            push("pmf_matches_enumeration", k, w, None, mismatches as f64, 0.0, mismatches == 0);

            let total = x_law.total_mass();
            push("normalized", k, w, None, total.to_f64().unwrap(), 1.0, total == BigRational::from_integer(1.into()));

            let h_x = exact_entropy(&x_law);
            let h_y = exact_entropy(&y_law);
            let h_y_formula = exact_pre_permutation_entropy(k, w)?;
            push(
                "pre_permutation_entropy_formula",
                k,
                w,
                None,
                h_y,
                h_y_formula,
                (h_y - h_y_formula).abs() <= ENTROPY_TOL,
            );

            let stirling = k as f64 * (k as f64).log2() - w as f64 * LOG2_E;
            push("pre_permutation_entropy_stirling", k, w, None, h_y, stirling, h_y >= stirling - ENTROPY_TOL);
            push("shuffle_does_not_reduce_entropy", k, w, None, h_x, h_y, h_x >= h_y - ENTROPY_TOL);

            if k <= MAX_JOINT_K {
                let id = conditional_entropy_identity_check(k, w)?;
                push("conditional_entropy_identity", k, w, None, id.lhs, id.rhs, id.equal);
            }
            entropies.push((x_law, h_x));
        }

        for &(num, den) in &LAMBDA_GRID {
            let lambda = num as f64 / den as f64;
            // exact ceil(num * k / den)
            let w = (num as usize * k).div_ceil(den as usize);
            let (x_law, h_x) = &entropies[w];

            let expected_d = exact_expected_distortion(x_law);
            let cap = one_minus_inv_e_lower() * BigRational::new(BigInt::from(den - num), BigInt::from(den));
            push(
                "expected_distortion_cap",
                k,
                w,
                Some(lambda),
                expected_d.to_f64().unwrap(),
                cap.to_f64().unwrap(),
                expected_d <= cap,
            );

            let bound = urn_entropy_lower_bound(k, lambda);
            push("urn_entropy_lower_bound", k, w, Some(lambda), *h_x, bound, *h_x >= bound - ENTROPY_TOL);
        }
    }
    Ok(report)
}
