//! Builds a behavior profile from a node's call-trace events and periodic
//! smaps-style memory snapshots.
//!
//! A builder is single-writer: feed it events and snapshots in timestamp
//! order, then call [`ProfileBuilder::finalize`] to run PCA and T² over
//! the accumulated memory samples. Snapshots arriving faster than the
//! configured cadence are skipped, which makes runs over logical
//! timestamps deterministic.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::profile::{hash_call_path, BehaviorProfile, CallKey, CallRecord, MemorySample};
use crate::stats::{hotelling_t2, pca, SampleMatrix, TSquaredVector};

/// Call classification; only system and library calls enter profiles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CallKind {
    System,
    Library,
}

impl std::str::FromStr for CallKind {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "system" => Ok(CallKind::System),
            "library" => Ok(CallKind::Library),
            other => Err(format!("unknown call kind {other:?}")),
        }
    }
}

/// One observed call instruction.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CallEvent {
    pub timestamp_ms: i64,
    pub kind: CallKind,
    pub callee: String,
    pub signature: String,
    pub line: u32,
    pub path: String,
}

/// Per-mapping sizes from one smaps reading, in KiB.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MappingSizes {
    pub rss_kib: u64,
    pub shared_clean_kib: u64,
    pub shared_dirty_kib: u64,
    pub private_clean_kib: u64,
    pub private_dirty_kib: u64,
}

/// One smaps snapshot: every mapping of the process at one instant.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SmapsSnapshot {
    pub timestamp_ms: i64,
    pub mappings: Vec<MappingSizes>,
}

impl SmapsSnapshot {
    /// Collapses the mappings into one (rss, shared, private) sample.
    pub fn totals(&self) -> MemorySample {
        let mut rss = 0;
        let mut shared = 0;
        let mut private = 0;
        for m in &self.mappings {
            rss += m.rss_kib;
            shared += m.shared_clean_kib + m.shared_dirty_kib;
            private += m.private_clean_kib + m.private_dirty_kib;
        }
        MemorySample {
            timestamp_ms: self.timestamp_ms,
            rss_kib: rss,
            shared_kib: shared,
            private_kib: private,
        }
    }
}

/// Accumulates one node's observations into a behavior profile.
#[derive(Debug, Clone)]
pub struct ProfileBuilder {
    identifier: String,
    node_id: String,
    interval_ms: u64,
    calls: HashMap<CallKey, CallRecord>,
    samples: Vec<MemorySample>,
    last_snapshot_ms: Option<i64>,
    last_accepted_ms: Option<i64>,
}

impl ProfileBuilder {
    pub fn new(identifier: &str, node_id: &str, interval_ms: u64) -> Self {
        ProfileBuilder {
            identifier: identifier.to_string(),
            node_id: node_id.to_string(),
            interval_ms,
            calls: HashMap::new(),
            samples: Vec::new(),
            last_snapshot_ms: None,
            last_accepted_ms: None,
        }
    }

    /// Counts one call event: a previously seen path increments its
    /// record, a new path creates one with count 1.
    pub fn accumulate_call(&mut self, event: &CallEvent) -> Result<()> {
        let key = hash_call_path(&event.path)?;
        self.calls
            .entry(key)
            .and_modify(|record| record.count += 1)
            .or_insert_with(|| CallRecord {
                callee: event.callee.clone(),
                signature: event.signature.clone(),
                line: event.line,
                path: event.path.clone(),
                count: 1,
            });
        Ok(())
    }

    /// Folds one smaps snapshot into the sample series.
    ///
    /// Timestamps must be monotone; snapshots closer than `interval_ms`
    /// to the last accepted one are skipped (cadence filter). Returns
    /// whether the snapshot was accepted.
    pub fn accumulate_memory(&mut self, snapshot: &SmapsSnapshot) -> Result<bool> {
        if let Some(prev) = self.last_snapshot_ms {
            if snapshot.timestamp_ms < prev {
                return Err(Error::NonMonotoneSample {
                    timestamp: snapshot.timestamp_ms,
                    previous: prev,
                });
            }
        }
        self.last_snapshot_ms = Some(snapshot.timestamp_ms);
        if let Some(accepted) = self.last_accepted_ms {
            if (snapshot.timestamp_ms - accepted) < self.interval_ms as i64 {
                return Ok(false);
            }
        }
        self.last_accepted_ms = Some(snapshot.timestamp_ms);
        self.samples.push(snapshot.totals());
        Ok(true)
    }

    pub fn sample_count(&self) -> usize {
        self.samples.len()
    }

    pub fn samples(&self) -> &[MemorySample] {
        &self.samples
    }

    /// Runs PCA + T² over the accumulated (rss, shared, private) samples
    /// and assembles the profile.
    ///
    /// Zero memory samples yield a call-only profile (the idle-cluster
    /// case); exactly one sample cannot support PCA and is an error.
    pub fn finalize(self) -> Result<BehaviorProfile> {
        let t_squared = match self.samples.len() {
            0 => TSquaredVector::default(),
            1 => return Err(Error::InsufficientObservations { got: 1 }),
            _ => {
                let rows: Vec<Vec<f64>> = self
                    .samples
                    .iter()
                    .map(|s| vec![s.rss_kib as f64, s.shared_kib as f64, s.private_kib as f64])
                    .collect();
                let matrix = SampleMatrix::from_rows(&rows)?;
                hotelling_t2(&pca(&matrix)?)
            }
        };
        Ok(BehaviorProfile {
            identifier: self.identifier,
            node_id: self.node_id,
            calls: self.calls,
            sample_count: t_squared.len(),
            t_squared,
            interval_ms: self.interval_ms,
        })
    }
}

/// Parses a call-trace log: one event per line, tab-separated
/// `<timestamp_ms> <kind> <callee> <signature> <line> <path>`.
pub fn parse_call_trace(text: &str) -> Result<Vec<CallEvent>> {
    let mut events = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 6 {
            return Err(Error::parse(
                line_no,
                format!(
                    "call trace line needs 6 tab-separated fields, got {}",
                    fields.len()
                ),
            ));
        }
        let timestamp_ms: i64 = fields[0]
            .parse()
            .map_err(|e| Error::parse(line_no, format!("bad timestamp: {e}")))?;
        let kind: CallKind = fields[1].parse().map_err(|e| Error::parse(line_no, e))?;
        let source_line: u32 = fields[4]
            .parse()
            .map_err(|e| Error::parse(line_no, format!("bad line number: {e}")))?;
        if fields[5].is_empty() {
            return Err(Error::parse(line_no, "empty call path"));
        }
        events.push(CallEvent {
            timestamp_ms,
            kind,
            callee: fields[2].to_string(),
            signature: fields[3].to_string(),
            line: source_line,
            path: fields[5].to_string(),
        });
    }
    Ok(events)
}

/// Parses a smaps snapshot file: blocks separated by blank lines, each
/// block `TS <timestamp_ms>` followed by `M <rss> <shared_clean>
/// <shared_dirty> <private_clean> <private_dirty>` lines (KiB).
pub fn parse_smaps_log(text: &str) -> Result<Vec<SmapsSnapshot>> {
    let mut snapshots = Vec::new();
    let mut current: Option<SmapsSnapshot> = None;
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.trim_end();
        if line.is_empty() {
            if let Some(snap) = current.take() {
                snapshots.push(snap);
            }
            continue;
        }
        if let Some(rest) = line.strip_prefix("TS ") {
            if let Some(snap) = current.take() {
                snapshots.push(snap);
            }
            let timestamp_ms: i64 = rest
                .trim()
                .parse()
                .map_err(|e| Error::parse(line_no, format!("bad timestamp: {e}")))?;
            current = Some(SmapsSnapshot {
                timestamp_ms,
                mappings: Vec::new(),
            });
        } else if let Some(rest) = line.strip_prefix("M ") {
            let snap = current
                .as_mut()
                .ok_or_else(|| Error::parse(line_no, "mapping line before TS header"))?;
            let fields: Vec<&str> = rest.split_whitespace().collect();
            if fields.len() != 5 {
                return Err(Error::parse(
                    line_no,
                    format!("mapping line needs 5 sizes, got {}", fields.len()),
                ));
            }
            let mut sizes = [0_u64; 5];
            for (slot, token) in sizes.iter_mut().zip(&fields) {
                *slot = token
                    .parse()
                    .map_err(|e| Error::parse(line_no, format!("bad size {token:?}: {e}")))?;
            }
            snap.mappings.push(MappingSizes {
                rss_kib: sizes[0],
                shared_clean_kib: sizes[1],
                shared_dirty_kib: sizes[2],
                private_clean_kib: sizes[3],
                private_dirty_kib: sizes[4],
            });
        } else {
            return Err(Error::parse(line_no, format!("unrecognized line {line:?}")));
        }
    }
    if let Some(snap) = current.take() {
        snapshots.push(snap);
    }
    Ok(snapshots)
}
