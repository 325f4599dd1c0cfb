//! Pairwise verification of behavior profiles: call tables first, then
//! the T² memory signatures.
//!
//! Call comparison looks for keys present on only one side and, for shared
//! keys, for relative count differences past the δ threshold. A missing
//! key or count violation is necessary but not sufficient evidence of an
//! intrusion, so the verdict carries the full comparison detail and the
//! final call is left to cluster consensus.
//!
//! Memory comparison follows the tail-filter → ANOVA → Tukey chain: each
//! profile's T² vector is cut at the configured percentile, the filtered
//! groups go through one-way ANOVA, and only when the null is rejected
//! does Tukey HSD run to localize which node diverged.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::profile::{BehaviorProfile, CallKey};
use crate::stats::{one_way_anova, tukey_hsd, AnovaResult, TSquaredVector, TukeyResult};

/// Thresholds used throughout verification.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VerifyConfig {
    /// Significance level for ANOVA/Tukey (and the F-test utilities).
    pub alpha: f64,
    /// Maximum tolerated relative difference in per-call counts.
    pub delta: f64,
    /// Tail-filter percentile applied to each T² vector.
    pub percentile: f64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            alpha: 0.05,
            delta: 0.5,
            percentile: 99.0,
        }
    }
}

/// One shared key whose counts moved apart by more than δ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountViolation {
    pub key: CallKey,
    pub local_count: u64,
    pub remote_count: u64,
}

/// Outcome of comparing two call tables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CallComparison {
    /// Keys the remote profile has but the local one lacks.
    pub missing_local: Vec<CallKey>,
    /// Keys the local profile has but the remote one lacks.
    pub missing_remote: Vec<CallKey>,
    pub count_violations: Vec<CountViolation>,
    pub calls_match: bool,
}

/// Outcome of comparing the T² signatures of a profile group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MemComparison {
    pub anova: AnovaResult,
    /// Present exactly when the ANOVA null was rejected.
    pub tukey: Option<TukeyResult>,
    pub mem_match: bool,
    pub suspected_node: Option<String>,
}

/// Per-node verdict: the conjunction of call and memory agreement, plus
/// the full comparison detail for consensus to weigh.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub node_id: String,
    pub calls_match: bool,
    pub mem_match: bool,
    pub overall: bool,
    pub suspected_node: Option<String>,
    /// One entry per received profile, keyed by the remote node id.
    pub call_comparisons: Vec<(String, CallComparison)>,
    /// Absent when no profile in the group carried memory samples.
    pub memory: Option<MemComparison>,
}

/// Compares two call tables under relative-count threshold `delta`.
pub fn compare_calls(
    local: &BehaviorProfile,
    remote: &BehaviorProfile,
    delta: f64,
) -> Result<CallComparison> {
    if !delta.is_finite() || delta <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "delta must be positive, got {delta}"
        )));
    }
    let mut missing_local: Vec<CallKey> = remote
        .calls
        .keys()
        .filter(|k| !local.calls.contains_key(k))
        .cloned()
        .collect();
    let mut missing_remote: Vec<CallKey> = local
        .calls
        .keys()
        .filter(|k| !remote.calls.contains_key(k))
        .cloned()
        .collect();
    missing_local.sort();
    missing_remote.sort();

    let mut count_violations = Vec::new();
    for key in local.sorted_keys() {
        let Some(remote_record) = remote.calls.get(key) else {
            continue;
        };
        let local_count = local.calls[key].count;
        let remote_count = remote_record.count;
        let larger = local_count.max(remote_count) as f64;
        let diff = local_count.abs_diff(remote_count) as f64;
        if diff / larger > delta {
            count_violations.push(CountViolation {
                key: key.clone(),
                local_count,
                remote_count,
            });
        }
    }
    let calls_match =
        missing_local.is_empty() && missing_remote.is_empty() && count_violations.is_empty();
    Ok(CallComparison {
        missing_local,
        missing_remote,
        count_violations,
        calls_match,
    })
}

/// Drops T² values strictly above the given percentile of the vector,
/// preserving the order of survivors.
///
/// The percentile is interpolated linearly between order statistics
/// (the R-7 convention), so `percentile = 100` is the identity filter.
pub fn filter_tail(t2: &TSquaredVector, percentile: f64) -> Result<TSquaredVector> {
    if t2.is_empty() {
        return Err(Error::EmptyVector);
    }
    if !(percentile > 50.0 && percentile <= 100.0) {
        return Err(Error::InvalidParameter(format!(
            "percentile must lie in (50, 100], got {percentile}"
        )));
    }
    let threshold = percentile_r7(&t2.values, percentile);
    Ok(TSquaredVector::new(
        t2.values
            .iter()
            .copied()
            .filter(|&v| v <= threshold)
            .collect(),
    ))
}

fn percentile_r7(values: &[f64], percentile: f64) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let h = (sorted.len() - 1) as f64 * percentile / 100.0;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    if lo == hi {
        sorted[lo]
    } else {
        sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
    }
}

/// Filters, sorts and ANOVA-compares the T² groups of two or more
/// profiles; on rejection, runs Tukey HSD and names the suspect.
pub fn compare_memory(
    profiles: &[&BehaviorProfile],
    alpha: f64,
    percentile: f64,
) -> Result<MemComparison> {
    if profiles.len() < 2 {
        return Err(Error::InvalidParameter(format!(
            "memory comparison requires at least 2 profiles, got {}",
            profiles.len()
        )));
    }
    let mut groups = Vec::with_capacity(profiles.len());
    for (index, profile) in profiles.iter().enumerate() {
        if profile.t_squared.is_empty() {
            return Err(Error::InsufficientGroup { index, len: 0 });
        }
        let mut filtered = filter_tail(&profile.t_squared, percentile)?.values;
        if filtered.len() < 2 {
            return Err(Error::InsufficientGroup {
                index,
                len: filtered.len(),
            });
        }
        filtered.sort_by(f64::total_cmp);
        groups.push(filtered);
    }
    let anova = one_way_anova(&groups, alpha)?;
    let mem_match = anova.p_value >= alpha;
    let (tukey, suspected_node) = if mem_match {
        (None, None)
    } else {
        let tukey = tukey_hsd(&groups, alpha)?;
        let suspected = suspect_from_pairs(&tukey, profiles);
        (Some(tukey), suspected)
    };
    Ok(MemComparison {
        anova,
        tukey,
        mem_match,
        suspected_node,
    })
}

/// Maps the Tukey outcome onto a node id: the node implicated by the most
/// significant pairs, ties broken toward the lowest node id so the answer
/// is independent of profile ordering.
fn suspect_from_pairs(tukey: &TukeyResult, profiles: &[&BehaviorProfile]) -> Option<String> {
    let mut hits = vec![0_usize; profiles.len()];
    for pair in &tukey.pairwise {
        if pair.significant {
            hits[pair.group_a] += 1;
            hits[pair.group_b] += 1;
        }
    }
    let best = *hits.iter().max()?;
    if best == 0 {
        return None;
    }
    hits.iter()
        .enumerate()
        .filter(|&(_, &c)| c == best)
        .map(|(i, _)| profiles[i].node_id.clone())
        .min()
}

/// Full verification of a local profile against the profiles received
/// from the other replicas.
pub fn verify(
    local: &BehaviorProfile,
    received: &[&BehaviorProfile],
    config: &VerifyConfig,
) -> Result<Verdict> {
    if received.is_empty() {
        return Err(Error::InvalidParameter(
            "verification requires at least one received profile".to_string(),
        ));
    }
    for profile in received {
        if profile.identifier != local.identifier {
            return Err(Error::ProfileIdentityMismatch {
                expected: local.identifier.clone(),
                got: profile.identifier.clone(),
            });
        }
    }
    let mut call_comparisons = Vec::with_capacity(received.len());
    let mut calls_match = true;
    for remote in received {
        let comparison = compare_calls(local, remote, config.delta)?;
        calls_match &= comparison.calls_match;
        call_comparisons.push((remote.node_id.clone(), comparison));
    }

    let mut group: Vec<&BehaviorProfile> = Vec::with_capacity(received.len() + 1);
    group.push(local);
    group.extend(received.iter().copied());
    // A cluster that never observed memory anywhere has nothing to
    // compare; treat memory as vacuously matching in that case.
    let memory = if group.iter().all(|p| p.t_squared.is_empty()) {
        None
    } else {
        Some(compare_memory(&group, config.alpha, config.percentile)?)
    };
    let mem_match = memory.as_ref().is_none_or(|m| m.mem_match);
    let suspected_node = memory.as_ref().and_then(|m| m.suspected_node.clone());
    Ok(Verdict {
        node_id: local.node_id.clone(),
        calls_match,
        mem_match,
        overall: calls_match && mem_match,
        suspected_node,
        call_comparisons,
        memory,
    })
}
