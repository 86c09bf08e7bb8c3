//! Monte Carlo driver. Runs encode/decode round trips on random key sets and
//! averages collision fractions and description lengths.
//!
//! Trials are independent and run on the rayon pool. Results are collected
//! in trial order, so reports do not depend on the thread count. Set
//! `ALPHAHASH_THREADS` to size the pool.

use std::io::Write;
use std::path::Path;

use rayon::prelude::*;

use crate::bounds::{mixture_rate_bound, sampling_rate_bound};
use crate::codes::{build_empirical_code, IntegerCode};
use crate::error::{Error, Result};
use crate::model::{collision_profile, KeySet, RestrictionVector};
use crate::randomness::SharedSeed;
use crate::schemes::{Branch, Scheme, SchemeConfig, SchemeKind};

pub const DEFAULT_UNIVERSE: u64 = 1_000_000;
pub const THREADS_ENV: &str = "ALPHAHASH_THREADS";

#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub scheme: SchemeConfig,
    pub trials: usize,
    pub key_sets: usize,
    pub base_seed: u64,
}

impl ExperimentConfig {
    pub fn new(scheme: SchemeConfig, trials: usize, key_sets: usize, base_seed: u64) -> Self {
        Self { scheme, trials, key_sets, base_seed }
    }

    fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidParameter("at least one trial is required".into()));
        }
        if self.key_sets == 0 {
            return Err(Error::InvalidParameter("at least one key set is required".into()));
        }
        Ok(())
    }
}

/// What one encode/decode round trip produced.
#[derive(Clone, Debug, PartialEq)]
pub struct TrialOutcome {
    pub seed: SharedSeed,
    pub index: Option<u64>,
    pub branch: Option<Branch>,
    pub probes: u64,
    pub bits: usize,
    /// Number of colliding keys; the collision fraction is this over `k`.
    pub colliding: usize,
    /// Restriction of the decoded function to the key set.
    pub restriction: RestrictionVector,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, serde::Serialize)]
pub struct MeanSe {
    pub mean: f64,
    pub se: f64,
}

impl MeanSe {
    pub fn of(samples: impl Iterator<Item = f64>) -> Self {
        let xs: Vec<f64> = samples.collect();
        let n = xs.len() as f64;
        if xs.is_empty() {
            return Self::default();
        }
        let mean = xs.iter().sum::<f64>() / n;
        if xs.len() < 2 {
            return Self { mean, se: 0.0 };
        }
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        Self { mean, se: (var / n).sqrt() }
    }
}

#[derive(Clone, Debug)]
pub struct KeySetReport {
    pub keyset_id: u64,
    pub keys: KeySet,
    pub d: MeanSe,
    pub bits: MeanSe,
    pub bits_per_key: f64,
    pub mean_probes: f64,
    pub max_probes: u64,
    pub outcomes: Vec<TrialOutcome>,
}

#[derive(Clone, Debug)]
pub struct ExperimentReport {
    pub scheme: SchemeKind,
    pub code: &'static str,
    pub n: u64,
    pub k: usize,
    pub alpha: f64,
    pub lambda: f64,
    /// Without-replacement draws of the urn law (sampling scheme only).
    pub w: Option<usize>,
    pub trials: usize,
    pub bound_bits_per_key: f64,
    pub key_sets: Vec<KeySetReport>,
}

impl ExperimentReport {
    pub fn outcomes(&self) -> impl Iterator<Item = &TrialOutcome> {
        self.key_sets.iter().flat_map(|s| s.outcomes.iter())
    }

    /// Collision fraction pooled over every trial of every key set.
    pub fn pooled_d(&self) -> MeanSe {
        let k = self.k as f64;
        MeanSe::of(self.outcomes().map(|o| o.colliding as f64 / k))
    }

    pub fn pooled_bits(&self) -> MeanSe {
        MeanSe::of(self.outcomes().map(|o| o.bits as f64))
    }

    pub fn pooled_bits_per_key(&self) -> f64 {
        self.pooled_bits().mean / self.k as f64
    }
}

/// Amortized bound the scheme is compared against, in bits per key.
pub fn reference_bound(kind: SchemeKind, alpha: f64) -> f64 {
    match kind {
        SchemeKind::Perfect => mixture_rate_bound(1.0),
        SchemeKind::ZeroBit => 0.0,
        SchemeKind::Mixture => mixture_rate_bound(alpha),
        SchemeKind::Pfr => sampling_rate_bound(alpha),
    }
}

fn run_trial(scheme: &Scheme, keys: &KeySet, seed: SharedSeed) -> Result<TrialOutcome> {
    let encoded = scheme.encode(keys, &seed)?;
    let decoded = scheme.decode(&encoded.description, &seed)?;
    let restriction = decoded.restrict(keys)?;
    if restriction != encoded.handle.restrict(keys)? {
        return Err(Error::RoundTrip);
    }
    let colliding = collision_profile(&restriction).weight;
    Ok(TrialOutcome {
        seed,
        index: encoded.index,
        branch: encoded.branch,
        probes: encoded.probes,
        bits: encoded.description.len(),
        colliding,
        restriction,
    })
}

fn with_pool<T: Send>(f: impl FnOnce() -> T + Send) -> Result<T> {
    match std::env::var(THREADS_ENV).ok().and_then(|v| v.parse::<usize>().ok()) {
        Some(threads) if threads > 0 => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .map_err(|e| Error::InvalidParameter(e.to_string()))?;
            Ok(pool.install(f))
        }
        _ => Ok(f()),
    }
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let scheme = Scheme::new(cfg.scheme.clone())?;
    let k = cfg.scheme.k;
    let mut key_sets = Vec::with_capacity(cfg.key_sets);
    for set in 0..cfg.key_sets as u64 {
        let keys = KeySet::seeded(cfg.scheme.n, k, cfg.base_seed, set)?;
        let results: Vec<Result<TrialOutcome>> = with_pool(|| {
            (0..cfg.trials as u64)
                .into_par_iter()
                .map(|t| {
                    let seed = SharedSeed::for_trial(cfg.base_seed, set, t);
                    run_trial(&scheme, &keys, seed).map_err(|e| Error::TrialFailed {
                        keyset_id: set,
                        keys: keys.keys().to_vec(),
                        seed,
                        source: Box::new(e),
                    })
                })
                .collect()
        })?;
        let outcomes = results.into_iter().collect::<Result<Vec<_>>>()?;
        let d = MeanSe::of(outcomes.iter().map(|o| o.colliding as f64 / k as f64));
        let bits = MeanSe::of(outcomes.iter().map(|o| o.bits as f64));
        key_sets.push(KeySetReport {
            keyset_id: set,
            keys,
            d,
            bits,
            bits_per_key: bits.mean / k as f64,
            mean_probes: outcomes.iter().map(|o| o.probes as f64).sum::<f64>() / outcomes.len() as f64,
            max_probes: outcomes.iter().map(|o| o.probes).max().unwrap_or(0),
            outcomes,
        });
    }
    Ok(ExperimentReport {
        scheme: cfg.scheme.kind,
        code: cfg.scheme.code.name(),
        n: cfg.scheme.n,
        k,
        alpha: cfg.scheme.alpha,
        lambda: scheme.lambda(),
        w: scheme.urn().map(|u| u.w()),
        trials: cfg.trials,
        bound_bits_per_key: reference_bound(cfg.scheme.kind, cfg.scheme.alpha),
        key_sets,
    })
}

/// Fits an empirical Shannon code to the index law of `scheme` by running
/// `pilot_trials` encodes on a pilot key set whose seeds are disjoint from
/// those `run_experiment` uses. The index law does not depend on the key set,
/// so the fitted code applies to every key set.
pub fn fit_empirical_code(scheme: &SchemeConfig, pilot_trials: usize, base_seed: u64) -> Result<IntegerCode> {
    let pilot = Scheme::new(scheme.clone().with_code(IntegerCode::EliasDelta))?;
    let keys = KeySet::seeded(scheme.n, scheme.k, base_seed ^ 0x5049_4c4f_545f_5345, u64::MAX)?;
    let indices: Vec<Result<Option<u64>>> = with_pool(|| {
        (0..pilot_trials.max(1) as u64)
            .into_par_iter()
            .map(|t| {
                let seed = SharedSeed::for_trial(base_seed, u64::MAX, t);
                pilot.encode(&keys, &seed).map(|r| r.index)
            })
            .collect()
    })?;
    let mut samples = Vec::with_capacity(indices.len());
    for i in indices {
        if let Some(t) = i? {
            samples.push(t);
        }
    }
    if samples.is_empty() {
        samples.push(1);
    }
    build_empirical_code(&samples)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Json,
}

pub const CSV_HEADER: &str =
    "scheme,n,k,alpha,keyset_id,trials,mean_d,se_d,mean_bits,se_bits,bits_per_key,bound_bits_per_key";

pub fn report_csv(r: &ExperimentReport) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for s in &r.key_sets {
        out.push_str(&format!(
            "{},{},{},{:.6},{},{},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6}\n",
            r.scheme.name(),
            r.n,
            r.k,
            r.alpha,
            s.keyset_id,
            s.outcomes.len(),
            s.d.mean,
            s.d.se,
            s.bits.mean,
            s.bits.se,
            s.bits_per_key,
            r.bound_bits_per_key
        ));
    }
    out
}

#[derive(serde::Serialize)]
struct JsonKeySet<'a> {
    keyset_id: u64,
    keys: &'a [u64],
    trials: usize,
    mean_d: f64,
    se_d: f64,
    mean_bits: f64,
    se_bits: f64,
    bits_per_key: f64,
    mean_probes: f64,
    max_probes: u64,
}

#[derive(serde::Serialize)]
struct JsonReport<'a> {
    scheme: &'static str,
    code: &'static str,
    n: u64,
    k: usize,
    alpha: f64,
    lambda: f64,
    w: Option<usize>,
    bound_bits_per_key: f64,
    key_sets: Vec<JsonKeySet<'a>>,
}

pub fn report_json(r: &ExperimentReport) -> Result<String> {
    let doc = JsonReport {
        scheme: r.scheme.name(),
        code: r.code,
        n: r.n,
        k: r.k,
        alpha: r.alpha,
        lambda: r.lambda,
        w: r.w,
        bound_bits_per_key: r.bound_bits_per_key,
        key_sets: r
            .key_sets
            .iter()
            .map(|s| JsonKeySet {
                keyset_id: s.keyset_id,
                keys: s.keys.keys(),
                trials: s.outcomes.len(),
                mean_d: s.d.mean,
                se_d: s.d.se,
                mean_bits: s.bits.mean,
                se_bits: s.bits.se,
                bits_per_key: s.bits_per_key,
                mean_probes: s.mean_probes,
                max_probes: s.max_probes,
            })
            .collect(),
    };
    let mut text = serde_json::to_string_pretty(&doc)?;
    text.push('\n');
    Ok(text)
}

pub fn render_report(r: &ExperimentReport, format: ReportFormat) -> Result<String> {
    match format {
        ReportFormat::Csv => Ok(report_csv(r)),
        ReportFormat::Json => report_json(r),
    }
}

/// Writes the report to `path`.
pub fn emit_report(r: &ExperimentReport, format: ReportFormat, path: &Path) -> Result<()> {
    let mut f = std::fs::File::create(path)?;
    f.write_all(render_report(r, format)?.as_bytes())?;
    Ok(())
}
