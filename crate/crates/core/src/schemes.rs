//! Encoders and decoders for the four hashing schemes.
//!
//! All schemes draw from the same seeded stream of hash functions
//! `C(1), C(2), …`. An encoder picks an index into that stream and writes a
//! prefix-free description of it; the decoder reads the index back and
//! rebuilds the handle from the seed.
//!
//! * perfect: first index whose function is injective on the key set.
//! * zero-bit: empty description, always index 1.
//! * mixture: a shared coin with bias `lambda` picks perfect or zero-bit.
//! * pfr: Poisson functional representation targeting the urn law; the
//!   chosen index minimizes `T_t / ratio(X(t))` over the arrival times `T_t`.

use crate::bounds::lambda_for_alpha;
use crate::codes::{decode_int, encode_int, golomb_parameter_for_geometric, BitString, IntegerCode};
use crate::error::{Error, Result};
use crate::model::{HashFunctionHandle, KeySet};
use crate::randomness::{ArrivalStream, HashState, SharedSeed};
use crate::urn::UrnDistribution;

pub const DEFAULT_PROBE_CAP: u64 = 1_000_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemeKind {
    Perfect,
    ZeroBit,
    Mixture,
    Pfr,
}

impl SchemeKind {
    pub fn name(self) -> &'static str {
        match self {
            SchemeKind::Perfect => "perfect",
            SchemeKind::ZeroBit => "zero",
            SchemeKind::Mixture => "mixture",
            SchemeKind::Pfr => "pfr",
        }
    }
}

/// How the sampling scheme sets its urn parameter.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum LambdaMode {
    /// `lambda = lambda(alpha)`.
    #[default]
    Theoretical,
    /// Smallest `w` whose exact expected collision fraction meets `1 - alpha`.
    Calibrated,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    Perfect,
    Zero,
}

#[derive(Clone, Debug)]
pub struct SchemeConfig {
    pub n: u64,
    pub k: usize,
    pub alpha: f64,
    pub kind: SchemeKind,
    pub code: IntegerCode,
    pub probe_cap: u64,
    pub lambda_mode: LambdaMode,
}

impl SchemeConfig {
    /// Config with the default index code for the scheme: Golomb matched to
    /// `k!/k^k` for perfect and mixture, Elias delta otherwise.
    pub fn new(kind: SchemeKind, n: u64, k: usize, alpha: f64) -> Self {
        let code = match kind {
            SchemeKind::Perfect | SchemeKind::Mixture => perfect_index_code(k),
            SchemeKind::ZeroBit | SchemeKind::Pfr => IntegerCode::EliasDelta,
        };
        Self { n, k, alpha, kind, code, probe_cap: DEFAULT_PROBE_CAP, lambda_mode: LambdaMode::default() }
    }

    pub fn with_code(mut self, code: IntegerCode) -> Self {
        self.code = code;
        self
    }

    pub fn with_probe_cap(mut self, cap: u64) -> Self {
        self.probe_cap = cap;
        self
    }

    pub fn with_lambda_mode(mut self, mode: LambdaMode) -> Self {
        self.lambda_mode = mode;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::EmptyKeySet);
        }
        if self.k as u64 > self.n {
            return Err(Error::KeySetTooLarge { k: self.k, n: self.n });
        }
        if self.k > u32::MAX as usize {
            return Err(Error::InvalidParameter("k must fit in 32 bits".into()));
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(Error::InvalidParameter(format!("alpha {} outside [0, 1]", self.alpha)));
        }
        Ok(())
    }
}

/// `k!/k^k` as a float.
pub fn perfect_success_probability(k: usize) -> f64 {
    let kf = k as f64;
    ((1..=k).map(|i| (i as f64).ln()).sum::<f64>() - kf * kf.ln()).exp()
}

/// Golomb code matched to the geometric law of the perfect-hashing index.
pub fn perfect_index_code(k: usize) -> IntegerCode {
    IntegerCode::Golomb { m: golomb_parameter_for_geometric(perfect_success_probability(k)) }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EncodeResult {
    pub description: BitString,
    /// Selected stream index; `None` for the zero-bit path.
    pub index: Option<u64>,
    pub branch: Option<Branch>,
    /// Hash functions examined.
    pub probes: u64,
    /// The function the encoder settled on.
    pub handle: HashFunctionHandle,
}

fn range_of(keys: &KeySet) -> Result<u32> {
    u32::try_from(keys.len()).map_err(|_| Error::InvalidParameter("k must fit in 32 bits".into()))
}

/// Scratch space for repeated "which values repeat" queries on one key set.
struct ValueCounter {
    counts: Vec<u32>,
    touched: Vec<u32>,
}

impl ValueCounter {
    fn new(k: usize) -> Self {
        Self { counts: vec![0; k + 1], touched: Vec::with_capacity(k) }
    }

    fn reset(&mut self) {
        for &v in &self.touched {
            self.counts[v as usize] = 0;
        }
        self.touched.clear();
    }

    /// True if the function is injective on the keys; stops at the first
    /// repeat.
    fn injective(&mut self, state: &HashState, keys: &[u64]) -> bool {
        self.reset();
        for &key in keys {
            let v = state.eval(key);
            if self.counts[v as usize] != 0 {
                return false;
            }
            self.counts[v as usize] = 1;
            self.touched.push(v);
        }
        true
    }

    fn singletons(&mut self, state: &HashState, keys: &[u64]) -> usize {
        self.reset();
        for &key in keys {
            let v = state.eval(key);
            if self.counts[v as usize] == 0 {
                self.touched.push(v);
            }
            self.counts[v as usize] += 1;
        }
        self.touched.iter().filter(|&&v| self.counts[v as usize] == 1).count()
    }
}

/// Searches for the first hash function that is injective on `keys`.
pub fn perfect_encode(keys: &KeySet, seed: &SharedSeed, code: &IntegerCode, probe_cap: u64) -> Result<EncodeResult> {
    let k = range_of(keys)?;
    let mut counter = ValueCounter::new(keys.len());
    for t in 1..=probe_cap {
        let state = HashState::new(seed.z_seed, t, k);
        if counter.injective(&state, keys.keys()) {
            return Ok(EncodeResult {
                description: encode_int(code, t)?,
                index: Some(t),
                branch: None,
                probes: t,
                handle: HashFunctionHandle::new(*seed, t, k)?,
            });
        }
    }
    Err(Error::ProbeBudgetExceeded { cap: probe_cap })
}

pub fn zero_bit_encode(keys: &KeySet, seed: &SharedSeed) -> Result<EncodeResult> {
    Ok(EncodeResult {
        description: BitString::new(),
        index: None,
        branch: None,
        probes: 0,
        handle: HashFunctionHandle::new(*seed, 1, range_of(keys)?)?,
    })
}

/// The branch both sides derive from the shared seed.
pub fn mixture_branch(seed: &SharedSeed, lambda: f64) -> Branch {
    if seed.shared_uniform(0) < lambda {
        Branch::Perfect
    } else {
        Branch::Zero
    }
}

pub fn mixture_encode(
    keys: &KeySet,
    seed: &SharedSeed,
    lambda: f64,
    code: &IntegerCode,
    probe_cap: u64,
) -> Result<EncodeResult> {
    let branch = mixture_branch(seed, lambda);
    let inner = match branch {
        Branch::Perfect => perfect_encode(keys, seed, code, probe_cap)?,
        Branch::Zero => zero_bit_encode(keys, seed)?,
    };
    Ok(EncodeResult { branch: Some(branch), ..inner })
}

/// Poisson functional representation of the urn law over the shared stream.
///
/// Scores are kept in the log domain: `log2 T_t - log2 ratio(X(t))`. Once
/// `log2 T_t - log2 Rmax` exceeds the best score no later index can win,
/// because every ratio is at most `Rmax` and arrivals only grow.
pub fn pfr_encode(
    keys: &KeySet,
    seed: &SharedSeed,
    dist: &UrnDistribution,
    code: &IntegerCode,
    probe_cap: u64,
) -> Result<EncodeResult> {
    let k = range_of(keys)?;
    if dist.k() != keys.len() {
        return Err(Error::RangeMismatch { range: dist.k() as u32, k: keys.len() });
    }
    let log_rmax = dist.max_log_ratio();
    let mut counter = ValueCounter::new(keys.len());
    let mut best = f64::INFINITY;
    let mut chosen = 0u64;
    let mut probes = 0u64;
    for (t, arrival) in (1u64..).zip(ArrivalStream::new(seed.u_seed)) {
        let log_t = arrival.log2();
        if log_t - log_rmax > best {
            break;
        }
        if probes == probe_cap {
            return Err(Error::ProbeBudgetExceeded { cap: probe_cap });
        }
        probes += 1;
        let s = counter.singletons(&HashState::new(seed.z_seed, t, k), keys.keys());
        let log_ratio = dist.log2_ratio_by_singletons(s);
        if log_ratio == f64::NEG_INFINITY {
            continue;
        }
        let score = log_t - log_ratio;
        if score < best {
            best = score;
            chosen = t;
        }
    }
    Ok(EncodeResult {
        description: encode_int(code, chosen)?,
        index: Some(chosen),
        branch: None,
        probes,
        handle: HashFunctionHandle::new(*seed, chosen, k)?,
    })
}

fn decode_index(code: &IntegerCode, description: &BitString) -> Result<u64> {
    let (t, used) = decode_int(code, description)?;
    if used != description.len() {
        return Err(Error::Decode(format!("{} trailing bits after the index", description.len() - used)));
    }
    Ok(t)
}

fn expect_empty(description: &BitString) -> Result<()> {
    if description.is_empty() {
        Ok(())
    } else {
        Err(Error::Decode(format!("zero-bit branch expects an empty description, got {} bits", description.len())))
    }
}

/// Picks the urn parameter for the sampling scheme.
pub fn pfr_distribution(k: usize, alpha: f64, mode: LambdaMode) -> Result<UrnDistribution> {
    match mode {
        LambdaMode::Theoretical => UrnDistribution::new(k, lambda_for_alpha(alpha)),
        LambdaMode::Calibrated => {
            use num_traits::ToPrimitive;
            let budget = 1.0 - alpha;
            for w in 0..=k {
                let d = UrnDistribution::with_draws(k, w)?;
                if d.expected_distortion().to_f64().unwrap_or(f64::INFINITY) <= budget + 1e-12 {
                    return Ok(d);
                }
            }
            UrnDistribution::with_draws(k, k)
        }
    }
}

/// A configured scheme. `lambda` and the urn law are fixed at construction.
#[derive(Clone, Debug)]
pub struct Scheme {
    config: SchemeConfig,
    lambda: f64,
    urn: Option<UrnDistribution>,
}

impl Scheme {
    pub fn new(config: SchemeConfig) -> Result<Self> {
        config.validate()?;
        let (lambda, urn) = match config.kind {
            SchemeKind::Perfect => (1.0, None),
            SchemeKind::ZeroBit => (0.0, None),
            SchemeKind::Mixture => (lambda_for_alpha(config.alpha), None),
            SchemeKind::Pfr => {
                let d = pfr_distribution(config.k, config.alpha, config.lambda_mode)?;
                (d.lambda(), Some(d))
            }
        };
        Ok(Self { config, lambda, urn })
    }

    pub fn config(&self) -> &SchemeConfig {
        &self.config
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn urn(&self) -> Option<&UrnDistribution> {
        self.urn.as_ref()
    }

    fn check_keys(&self, keys: &KeySet) -> Result<()> {
        if keys.len() != self.config.k {
            return Err(Error::RangeMismatch { range: self.config.k as u32, k: keys.len() });
        }
        Ok(())
    }

    pub fn encode(&self, keys: &KeySet, seed: &SharedSeed) -> Result<EncodeResult> {
        self.check_keys(keys)?;
        let c = &self.config;
        match c.kind {
            SchemeKind::Perfect => perfect_encode(keys, seed, &c.code, c.probe_cap),
            SchemeKind::ZeroBit => zero_bit_encode(keys, seed),
            SchemeKind::Mixture => mixture_encode(keys, seed, self.lambda, &c.code, c.probe_cap),
            SchemeKind::Pfr => pfr_encode(keys, seed, self.urn.as_ref().unwrap(), &c.code, c.probe_cap),
        }
    }

    pub fn decode(&self, description: &BitString, seed: &SharedSeed) -> Result<HashFunctionHandle> {
        let c = &self.config;
        let k = c.k as u32;
        let index = match c.kind {
            SchemeKind::Perfect | SchemeKind::Pfr => decode_index(&c.code, description)?,
            SchemeKind::ZeroBit => {
                expect_empty(description)?;
                1
            }
            SchemeKind::Mixture => match mixture_branch(seed, self.lambda) {
                Branch::Perfect => decode_index(&c.code, description)?,
                Branch::Zero => {
                    expect_empty(description)?;
                    1
                }
            },
        };
        HashFunctionHandle::new(*seed, index, k)
    }
}

/// Decodes a description under `config`.
pub fn decode(description: &BitString, seed: &SharedSeed, config: &SchemeConfig) -> Result<HashFunctionHandle> {
    Scheme::new(config.clone())?.decode(description, seed)
}
