//! Seed-derived common randomness.
//!
//! Every random quantity a scheme shares between encoder and decoder comes out
//! of one keyed 64-bit mixer used in counter mode. A query is the tuple
//! `(seed, domain, a, b, counter)`; each word is absorbed through the
//! SplitMix64 finalizer, which is a bijection on `u64`, so two queries that
//! differ in exactly one word never collide.
//!
//! Derivation:
//!
//! ```text
//! absorb(h, w) = mix64((h + 0x9E3779B97F4A7C15) ^ w)        (wrapping add)
//! prf(s, d, a, b, c) = absorb(absorb(absorb(absorb(absorb(s, d), a), b), c), 0)
//! ```
//!
//! * hash function `t` at key `x` with range `k`: draw `v = prf(z_seed,
//!   HASH, t, x, c)` for `c = 0, 1, …` and return `v mod k + 1` for the first
//!   `v < k * floor(2^64 / k)`.
//! * arrival increment `t`: `v = prf(u_seed, ARRIVAL, t, 0, 0)`,
//!   `u = ((v >> 11) + 0.5) / 2^53`, increment `-ln u`.

use crate::error::{Error, Result};
use crate::model::{HashFunctionHandle, KeySet, RestrictionVector};

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// Domain separators for the independent streams carved out of one seed.
pub mod domain {
    pub const HASH: u64 = 0x6861_7368; // "hash"
    pub const ARRIVAL: u64 = 0x6172_7276; // "arrv"
    pub const BRANCH: u64 = 0x6272_6e63; // "brnc"
    pub const DERIVE: u64 = 0x6465_7276; // "derv"
    pub const KEYSET: u64 = 0x6b73_6574; // "kset"
}

#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[inline]
fn absorb(h: u64, w: u64) -> u64 {
    mix64(h.wrapping_add(GOLDEN) ^ w)
}

/// The keyed counter-mode mixer.
#[inline]
pub fn prf(seed: u64, domain: u64, a: u64, b: u64, counter: u64) -> u64 {
    absorb(absorb(absorb(absorb(absorb(seed, domain), a), b), counter), 0)
}

/// Common randomness shared by encoder and decoder: `z_seed` names the stream
/// of hash functions, `u_seed` the auxiliary arrival process.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub struct SharedSeed {
    pub z_seed: u64,
    pub u_seed: u64,
}

impl SharedSeed {
    pub fn new(z_seed: u64, u_seed: u64) -> Self {
        Self { z_seed, u_seed }
    }

    /// Splits one user-facing seed into the two streams.
    pub fn from_master(seed: u64) -> Self {
        Self { z_seed: prf(seed, domain::DERIVE, 0, 0, 0), u_seed: prf(seed, domain::DERIVE, 1, 0, 0) }
    }

    /// Seed for trial `trial` of key set `set` under a base seed.
    pub fn for_trial(base: u64, set: u64, trial: u64) -> Self {
        Self::from_master(prf(base, domain::DERIVE, set.wrapping_add(2), trial, 1))
    }

    /// Uniform draw in `[0, 1)` from the hash-function seed, used for
    /// branch decisions that both sides must agree on.
    pub fn shared_uniform(&self, tag: u64) -> f64 {
        let v = prf(self.z_seed, domain::BRANCH, tag, 0, 0);
        (v >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

/// Per-index precomputed state, so evaluating one hash function at many keys
/// only absorbs the key and the rejection counter.
#[derive(Clone, Copy, Debug)]
pub(crate) struct HashState {
    prefix: u64,
    range: u64,
    /// Values at or above this are rejected; `None` when `range` divides 2^64.
    reject_from: Option<u64>,
}

impl HashState {
    #[inline]
    pub(crate) fn new(z_seed: u64, index: u64, range: u32) -> Self {
        let range = range as u64;
        let rem = (u64::MAX % range + 1) % range;
        Self {
            prefix: absorb(absorb(z_seed, domain::HASH), index),
            range,
            reject_from: if rem == 0 { None } else { Some(0u64.wrapping_sub(rem)) },
        }
    }

    #[inline]
    pub(crate) fn eval(&self, key: u64) -> u32 {
        let keyed = absorb(self.prefix, key);
        let mut counter = 0u64;
        loop {
            let v = absorb(absorb(keyed, counter), 0);
            match self.reject_from {
                Some(limit) if v >= limit => counter += 1,
                _ => return (v % self.range) as u32 + 1,
            }
        }
    }
}

/// Value of the `index`-th shared hash function at `key`, in `1..=range`.
pub fn eval_hash(seed: &SharedSeed, index: u64, key: u64, range: u32) -> Result<u32> {
    if index < 1 {
        return Err(Error::InvalidIndex(index));
    }
    if key < 1 {
        return Err(Error::KeyOutOfRange { key, universe: u64::MAX });
    }
    if range < 1 {
        return Err(Error::InvalidRange(range));
    }
    Ok(HashState::new(seed.z_seed, index, range).eval(key))
}

/// The restriction of hash function `index` to the key set, with range `k`.
pub fn restriction(seed: &SharedSeed, index: u64, keys: &KeySet) -> Result<RestrictionVector> {
    HashFunctionHandle::new(*seed, index, keys.len() as u32)?.restrict(keys)
}

#[inline]
fn exp_increment(u_seed: u64, t: u64) -> f64 {
    let v = prf(u_seed, domain::ARRIVAL, t, 0, 0);
    let u = ((v >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64);
    -u.ln()
}

/// Arrival times of a unit-rate Poisson process, generated lazily.
#[derive(Clone, Debug)]
pub struct ArrivalStream {
    u_seed: u64,
    emitted: u64,
    current: f64,
}

impl ArrivalStream {
    pub fn new(u_seed: u64) -> Self {
        Self { u_seed, emitted: 0, current: 0.0 }
    }

    pub fn emitted(&self) -> u64 {
        self.emitted
    }
}

impl Iterator for ArrivalStream {
    type Item = f64;

    fn next(&mut self) -> Option<f64> {
        self.emitted += 1;
        self.current += exp_increment(self.u_seed, self.emitted);
        Some(self.current)
    }
}

/// `T_t`, the `t`-th arrival of the stream seeded by `u_seed`.
pub fn arrival_time(u_seed: u64, t: u64) -> Result<f64> {
    if t < 1 {
        return Err(Error::InvalidIndex(t));
    }
    Ok(ArrivalStream::new(u_seed).nth((t - 1) as usize).unwrap())
}
