//! The process behavior profile: call metadata keyed by a digest of the
//! call path, plus the T² memory signature. Profiles are immutable once
//! built and are the unit of exchange between replica datanodes.

mod codec;

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use sha1::{Digest, Sha1};

use crate::error::{Error, Result};
use crate::stats::TSquaredVector;

pub use codec::{deserialize_profile, serialize_profile};

/// Digest key for one distinct call path: 40 lowercase hex chars of the
/// path's SHA-1.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CallKey(String);

impl CallKey {
    /// Wraps an existing digest string, validating shape.
    pub fn from_hex(digest: &str) -> Result<Self> {
        if digest.len() != 40
            || !digest
                .bytes()
                .all(|b| matches!(b, b'0'..=b'9' | b'a'..=b'f'))
        {
            return Err(Error::BadDigest {
                got: digest.to_string(),
            });
        }
        Ok(CallKey(digest.to_string()))
    }

    pub fn as_hex(&self) -> &str {
        &self.0
    }
}

impl std::fmt::Display for CallKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

/// SHA-1 of the exact bytes of a call path, as the profile's lookup key.
pub fn hash_call_path(path: &str) -> Result<CallKey> {
    if path.is_empty() {
        return Err(Error::EmptyPath);
    }
    let mut hasher = Sha1::new();
    hasher.update(path.as_bytes());
    let digest = hasher.finalize();
    let mut hex = String::with_capacity(40);
    for byte in digest {
        use std::fmt::Write;
        let _ = write!(hex, "{byte:02x}");
    }
    Ok(CallKey(hex))
}

/// Metadata for one distinct system or library call.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CallRecord {
    /// Full class name (or symbol) of the callee.
    pub callee: String,
    /// Method signature.
    pub signature: String,
    /// Source line number, 0 when unavailable.
    pub line: u32,
    /// Filesystem path of the jar or shared library the call resolves to.
    pub path: String,
    /// How many times the call was observed; always at least 1.
    pub count: u64,
}

/// One periodic observation of a process's memory footprint, in KiB.
///
/// `rss` should theoretically equal `shared + private` but the equality is
/// not enforced: swapping and page reclaim produce legitimate outliers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MemorySample {
    pub timestamp_ms: i64,
    pub rss_kib: u64,
    pub shared_kib: u64,
    pub private_kib: u64,
}

/// Per-process behavior profile shared among replicas: identity, one
/// record per distinct call path, and the T² memory signature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BehaviorProfile {
    /// Job/task identity; identical across replicas executing the same task.
    pub identifier: String,
    /// The node that produced this profile.
    pub node_id: String,
    /// Call table keyed by path digest; average O(1) lookup.
    pub calls: HashMap<CallKey, CallRecord>,
    /// Hotelling T² values, one per accepted memory sample.
    pub t_squared: TSquaredVector,
    /// Number of memory samples that fed the signature.
    pub sample_count: usize,
    /// Sampling cadence used during observation, in milliseconds.
    pub interval_ms: u64,
}

impl BehaviorProfile {
    /// Total calls across all records.
    pub fn total_call_count(&self) -> u64 {
        self.calls.values().map(|r| r.count).sum()
    }

    /// Call keys in ascending digest order (the canonical order used by
    /// the wire format).
    pub fn sorted_keys(&self) -> Vec<&CallKey> {
        let mut keys: Vec<&CallKey> = self.calls.keys().collect();
        keys.sort();
        keys
    }

    /// Structural equality with floating-point tolerance on the T²
    /// values, matching the 12-significant-digit wire precision.
    pub fn approx_eq(&self, other: &BehaviorProfile, rel_tol: f64) -> bool {
        if self.identifier != other.identifier
            || self.node_id != other.node_id
            || self.sample_count != other.sample_count
            || self.interval_ms != other.interval_ms
            || self.calls != other.calls
            || self.t_squared.len() != other.t_squared.len()
        {
            return false;
        }
        self.t_squared
            .values
            .iter()
            .zip(&other.t_squared.values)
            .all(|(&a, &b)| {
                let scale = a.abs().max(b.abs()).max(1e-300);
                a == b || (a - b).abs() / scale <= rel_tol
            })
    }
}
