//! The urn distribution on `[k]^k`.
//!
//! Draw `w = ceil(lambda * k)` values without replacement from an urn holding
//! `1..=k`, then `k - w` more values with replacement from the `k - w` values
//! left in the urn, then shuffle the coordinates. The first `w` draws are
//! collision-free by construction, which caps the expected collision fraction,
//! while the shuffle keeps the entropy high.
//!
//! The law depends on a vector only through its singleton count `s`:
//!
//! ```text
//! r(x) = [s >= w] * s!/(s-w)! * ((k-w)!/k!)^2 * (k-w)^-(k-w),    0^0 = 1
//! ```

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::model::{singleton_count, RestrictionVector};

pub const LOG2_E: f64 = std::f64::consts::LOG2_E;
pub const ONE_MINUS_INV_E: f64 = 1.0 - 1.0 / std::f64::consts::E;

/// `ceil(lambda * k)`, treating products within 1e-9 of an integer as that
/// integer so that e.g. `0.1 * 10` maps to 1 rather than 2.
pub fn without_replacement_draws(k: usize, lambda: f64) -> usize {
    let x = lambda * k as f64;
    let r = x.round();
    let w = if (x - r).abs() < 1e-9 { r } else { x.ceil() };
    (w.max(0.0) as usize).min(k)
}

fn big_factorial(n: usize) -> BigUint {
    (1..=n).fold(BigUint::one(), |acc, i| acc * i)
}

fn big_ratio(num: BigUint, den: BigUint) -> BigRational {
    BigRational::new(num.into(), den.into())
}

/// `log2(n!)`, summed term by term.
fn log2_factorial(n: usize) -> f64 {
    (2..=n).map(|i| (i as f64).log2()).sum()
}

/// Number of vectors in `[k]^k` with exactly `s` singleton values, for every
/// `s` in `0..=k`.
pub fn singleton_class_sizes(k: usize) -> Vec<BigUint> {
    // no_single[m][v]: strings of length m over v letters where no letter
    // appears exactly once.
    let mut no_single = vec![vec![BigUint::zero(); k + 1]; k + 1];
    let mut binom = vec![vec![BigUint::zero(); k + 1]; k + 1];
    for n in 0..=k {
        binom[n][0] = BigUint::one();
        for j in 1..=n {
            binom[n][j] = &binom[n - 1][j - 1] + if j < n { binom[n - 1][j].clone() } else { BigUint::zero() };
        }
    }
    no_single[0].fill(BigUint::one());
    for v in 1..=k {
        for m in 1..=k {
            let mut acc = no_single[m][v - 1].clone();
            for j in 2..=m {
                acc += &binom[m][j] * &no_single[m - j][v - 1];
            }
            no_single[m][v] = acc;
        }
    }
    (0..=k)
        .map(|s| {
            let arrangements = big_factorial(k) / big_factorial(k - s);
            &binom[k][s] * arrangements * &no_single[k - s][k - s]
        })
        .collect()
}

#[derive(Clone, Debug)]
pub struct UrnDistribution {
    k: usize,
    lambda: f64,
    w: usize,
    /// `log2(r(x) * k^k)` indexed by the singleton count of `x`.
    log2_ratio: Vec<f64>,
}

impl UrnDistribution {
    pub fn new(k: usize, lambda: f64) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidParameter("urn needs k >= 1".into()));
        }
        if !(0.0..=1.0).contains(&lambda) {
            return Err(Error::InvalidParameter(format!("lambda {lambda} outside [0, 1]")));
        }
        Ok(Self::build(k, lambda, without_replacement_draws(k, lambda)))
    }

    /// Distribution with an explicit number of without-replacement draws;
    /// `lambda` is set to `w / k`.
    pub fn with_draws(k: usize, w: usize) -> Result<Self> {
        if k == 0 || w > k {
            return Err(Error::InvalidParameter(format!("need 0 <= w <= k, k >= 1 (k={k}, w={w})")));
        }
        Ok(Self::build(k, w as f64 / k as f64, w))
    }

    fn build(k: usize, lambda: f64, w: usize) -> Self {
        let m = k - w;
        let tail = log2_factorial(m) - log2_factorial(k);
        let base = 2.0 * tail - if m > 0 { m as f64 * (m as f64).log2() } else { 0.0 } + k as f64 * (k as f64).log2();
        let log2_ratio = (0..=k)
            .map(|s| if s < w { f64::NEG_INFINITY } else { log2_factorial(s) - log2_factorial(s - w) + base })
            .collect();
        Self { k, lambda, w, log2_ratio }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn w(&self) -> usize {
        self.w
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> RestrictionVector {
        let k = self.k;
        let mut urn: Vec<u32> = (1..=k as u32).collect();
        for i in 0..self.w {
            let j = rng.gen_range(i..k);
            urn.swap(i, j);
        }
        let mut y: Vec<u32> = urn[..self.w].to_vec();
        let remaining = &urn[self.w..];
        for _ in self.w..k {
            y.push(remaining[rng.gen_range(0..remaining.len())]);
        }
        y.shuffle(rng);
        RestrictionVector(y)
    }

    fn check(&self, x: &RestrictionVector) -> Result<()> {
        if x.len() != self.k {
            return Err(Error::InvalidParameter(format!("vector of length {} for k = {}", x.len(), self.k)));
        }
        RestrictionVector::new(x.0.clone()).map(|_| ())
    }

    /// Exact probability of any vector with `s` singletons.
    pub fn pmf_by_singletons(&self, s: usize) -> BigRational {
        let (k, w) = (self.k, self.w);
        if s < w || s > k {
            return BigRational::zero();
        }
        let m = k - w;
        let falling = big_factorial(s) / big_factorial(s - w);
        let num = falling * big_factorial(m) * big_factorial(m);
        let k_fact = big_factorial(k);
        let den = &k_fact * &k_fact * BigUint::from(m).pow(m as u32);
        big_ratio(num, den)
    }

    pub fn pmf(&self, x: &RestrictionVector) -> Result<BigRational> {
        self.check(x)?;
        Ok(self.pmf_by_singletons(singleton_count(x)))
    }

    /// `log2(r(s) * k^k)`; negative infinity off the support.
    pub fn log2_ratio_by_singletons(&self, s: usize) -> f64 {
        self.log2_ratio[s]
    }

    pub fn log_ratio_to_uniform(&self, x: &RestrictionVector) -> Result<f64> {
        self.check(x)?;
        Ok(self.log2_ratio[singleton_count(x)])
    }

    /// Largest `log2(r(x) * k^k)` over vectors that actually exist. A vector
    /// with `k - 1` singletons is impossible (the last position would be a
    /// singleton too), every other `s` is realized.
    pub fn max_log_ratio(&self) -> f64 {
        (self.w..=self.k).filter(|&s| self.k - s != 1).map(|s| self.log2_ratio[s]).fold(f64::NEG_INFINITY, f64::max)
    }

    /// Exact entropy in bits, summed over singleton classes.
    pub fn entropy(&self) -> f64 {
        let kk = self.k as f64 * (self.k as f64).log2();
        singleton_class_sizes(self.k)
            .into_iter()
            .enumerate()
            .filter(|&(s, _)| s >= self.w)
            .map(|(s, count)| {
                let mass = (big_ratio(count, BigUint::one()) * self.pmf_by_singletons(s)).to_f64().unwrap_or(0.0);
                if mass > 0.0 {
                    -mass * (self.log2_ratio[s] - kk)
                } else {
                    0.0
                }
            })
            .sum()
    }

    /// Exact `E[d(X)]`, summed over singleton classes.
    pub fn expected_distortion(&self) -> BigRational {
        let k = self.k;
        singleton_class_sizes(k)
            .into_iter()
            .enumerate()
            .filter(|&(s, _)| s >= self.w)
            .map(|(s, count)| big_ratio(count * BigUint::from(k - s), BigUint::from(k)) * self.pmf_by_singletons(s))
            .fold(BigRational::zero(), |a, b| a + b)
    }

    pub fn distortion_bound(&self) -> f64 {
        urn_distortion_bound(self.lambda)
    }

    pub fn entropy_lower_bound(&self) -> f64 {
        urn_entropy_lower_bound(self.k, self.lambda)
    }
}

/// `(1 - 1/e)(1 - lambda)`: the cap on the expected collision fraction.
pub fn urn_distortion_bound(lambda: f64) -> f64 {
    ONE_MINUS_INV_E * (1.0 - lambda)
}

/// Lower bound on the entropy of the urn law, in bits:
///
/// ```text
/// k log k - lambda k log e
///   + lambda k log( (1 - (lambda - 1/k)/2)
///                   / (1 - (lambda - 1/k)/2 - (1 - 1/e)(1 - lambda - 1/k)) )
/// ```
pub fn urn_entropy_lower_bound(k: usize, lambda: f64) -> f64 {
    let kf = k as f64;
    let lk = lambda * kf;
    let shift = (lambda - 1.0 / kf) / 2.0;
    let numer = 1.0 - shift;
    let denom = numer - ONE_MINUS_INV_E * (1.0 - lambda - 1.0 / kf);
    let correction = if lk == 0.0 { 0.0 } else { lk * (numer / denom).log2() };
    kf * kf.log2() - lk * LOG2_E + correction
}

/// `D(p || uniform) = k log2 k - H(p)` for a law on `[k]^k`.
pub fn divergence_from_uniform(k: usize, entropy: f64) -> f64 {
    k as f64 * (k as f64).log2() - entropy
}
