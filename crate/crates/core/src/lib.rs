//! Minimal α-perfect hashing.
//!
//! A scheme maps a size-`k` key set to a short description of a hash function
//! `[n] -> [k]` whose expected fraction of colliding keys is at most `1 - α`.
//! Encoder and decoder share a seeded stream of uniform hash functions; the
//! description only names an index into that stream.
//!
//! * [`schemes`]: perfect, zero-bit, mixture and Poisson-functional-representation
//!   encoders/decoders.
//! * [`urn`]: the urn law on `[k]^k` the sampling scheme targets.
//! * [`oracle`]: brute-force enumeration used as ground truth at small `k`.
//! * [`bounds`]: closed-form length and rate bounds.
//! * [`harness`]: Monte Carlo experiments and CSV/JSON reports.

pub mod bounds;
pub mod codes;
pub mod error;
pub mod harness;
pub mod model;
pub mod oracle;
pub mod randomness;
pub mod schemes;
pub mod urn;

pub use error::{Error, Result};
pub use model::{HashFunctionHandle, KeySet, RestrictionVector};
pub use randomness::SharedSeed;
pub use schemes::{Scheme, SchemeConfig, SchemeKind};
