//! Key sets, hash-function handles and the collision metrics.

use num_rational::Ratio;
use rand::Rng;

use crate::error::{Error, Result};
use crate::randomness::{domain, prf, HashState, SharedSeed};

/// Exact fraction of colliding positions.
pub type Fraction = Ratio<u64>;

/// A size-`k` subset of the universe `[1, n]`, stored sorted.
#[derive(Clone, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub struct KeySet {
    universe: u64,
    keys: Vec<u64>,
}

impl KeySet {
    pub fn new(universe: u64, mut keys: Vec<u64>) -> Result<Self> {
        if keys.is_empty() {
            return Err(Error::EmptyKeySet);
        }
        keys.sort_unstable();
        for w in keys.windows(2) {
            if w[0] == w[1] {
                return Err(Error::DuplicateKey(w[0]));
            }
        }
        if let Some(&bad) = keys.iter().find(|&&x| x < 1 || x > universe) {
            return Err(Error::KeyOutOfRange { key: bad, universe });
        }
        if keys.len() as u64 > universe {
            return Err(Error::KeySetTooLarge { k: keys.len(), n: universe });
        }
        Ok(Self { universe, keys })
    }

    /// Uniform `k`-subset of `[1, n]` by partial Fisher-Yates over a sparse
    /// swap map, so `n` can be large.
    pub fn random<R: Rng + ?Sized>(universe: u64, k: usize, rng: &mut R) -> Result<Self> {
        if k == 0 {
            return Err(Error::EmptyKeySet);
        }
        if k as u64 > universe {
            return Err(Error::KeySetTooLarge { k, n: universe });
        }
        let mut swapped = std::collections::HashMap::<u64, u64>::new();
        let mut keys = Vec::with_capacity(k);
        for i in 0..k as u64 {
            let j = rng.gen_range(i..universe);
            let at_j = *swapped.get(&j).unwrap_or(&j);
            let at_i = *swapped.get(&i).unwrap_or(&i);
            swapped.insert(j, at_i);
            keys.push(at_j + 1);
        }
        Self::new(universe, keys)
    }

    /// Deterministic random key set derived from a seed and a set id.
    pub fn seeded(universe: u64, k: usize, seed: u64, set_id: u64) -> Result<Self> {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(prf(seed, domain::KEYSET, set_id, 0, 0));
        Self::random(universe, k, &mut rng)
    }

    pub fn universe(&self) -> u64 {
        self.universe
    }

    pub fn keys(&self) -> &[u64] {
        &self.keys
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }
}

/// One shared hash function `[n] -> [k]`, identified by its position in the
/// seeded stream and evaluated on demand.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct HashFunctionHandle {
    pub seed: SharedSeed,
    pub index: u64,
    pub range: u32,
}

impl HashFunctionHandle {
    pub fn new(seed: SharedSeed, index: u64, range: u32) -> Result<Self> {
        if index < 1 {
            return Err(Error::InvalidIndex(index));
        }
        if range < 1 {
            return Err(Error::InvalidRange(range));
        }
        Ok(Self { seed, index, range })
    }

    pub fn eval(&self, key: u64) -> u32 {
        HashState::new(self.seed.z_seed, self.index, self.range).eval(key)
    }

    /// Values at every key of `keys`, in key order.
    pub fn restrict(&self, keys: &KeySet) -> Result<RestrictionVector> {
        if self.range as usize != keys.len() {
            return Err(Error::RangeMismatch { range: self.range, k: keys.len() });
        }
        let state = HashState::new(self.seed.z_seed, self.index, self.range);
        Ok(RestrictionVector(keys.keys().iter().map(|&x| state.eval(x)).collect()))
    }
}

/// A vector in `[k]^k`: the values a hash function takes on a size-`k` key set.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, serde::Serialize, serde::Deserialize)]
pub struct RestrictionVector(pub Vec<u32>);

impl RestrictionVector {
    /// Checks every entry lies in `1..=len`.
    pub fn new(values: Vec<u32>) -> Result<Self> {
        let k = values.len();
        if let Some(&v) = values.iter().find(|&&v| v < 1 || v as usize > k) {
            return Err(Error::MalformedVector { value: v, k });
        }
        Ok(Self(values))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn values(&self) -> &[u32] {
        &self.0
    }

    fn multiplicities(&self) -> Vec<u32> {
        let mut counts = vec![0u32; self.0.len() + 1];
        for &v in &self.0 {
            counts[v as usize] += 1;
        }
        counts
    }
}

/// Which positions of a vector share their value with another position.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CollisionProfile {
    pub indicator: Vec<bool>,
    pub weight: usize,
}

/// Number of values that occur exactly once.
pub fn singleton_count(x: &RestrictionVector) -> usize {
    x.multiplicities().iter().filter(|&&c| c == 1).count()
}

pub fn collision_profile(x: &RestrictionVector) -> CollisionProfile {
    let counts = x.multiplicities();
    let indicator: Vec<bool> = x.0.iter().map(|&v| counts[v as usize] >= 2).collect();
    let weight = indicator.iter().filter(|&&b| b).count();
    CollisionProfile { indicator, weight }
}

/// Fraction of positions involved in a value collision.
pub fn collision_fraction_vector(x: &RestrictionVector) -> Fraction {
    let k = x.len() as u64;
    Fraction::new(k - singleton_count(x) as u64, k.max(1))
}

/// Fraction of `keys` that collide under `h`.
pub fn collision_fraction_set(keys: &KeySet, h: &HashFunctionHandle) -> Result<Fraction> {
    Ok(collision_fraction_vector(&h.restrict(keys)?))
}
