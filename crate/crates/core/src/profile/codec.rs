//! Profile exchange format v1: line-oriented UTF-8 text, chosen over a
//! binary encoding so simulator message logs stay human-diffable.
//!
//! ```text
//! BPv1 <identifier> <node_id> <sample_count> <interval_ms>
//! C\t<digest>\t<count>\t<line>\t<callee>\t<signature>\t<path>
//! ...one line per call, ascending digest...
//! T <v1> <v2> ...
//! ```
//!
//! Identifiers and node ids are whitespace-free tokens; call fields may
//! contain spaces but not tabs. T² values are written with 12 significant
//! digits, which preserves the 1e-6 comparison tolerances used downstream.

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::profile::{BehaviorProfile, CallKey, CallRecord};
use crate::stats::TSquaredVector;

/// Canonical byte encoding of a profile. Equal profiles serialize to
/// identical bytes: calls are emitted in ascending digest order.
pub fn serialize_profile(profile: &BehaviorProfile) -> Vec<u8> {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "BPv1 {} {} {} {}",
        profile.identifier, profile.node_id, profile.sample_count, profile.interval_ms
    );
    for key in profile.sorted_keys() {
        let record = &profile.calls[key];
        let _ = writeln!(
            out,
            "C\t{}\t{}\t{}\t{}\t{}\t{}",
            key.as_hex(),
            record.count,
            record.line,
            record.callee,
            record.signature,
            record.path
        );
    }
    out.push('T');
    for value in &profile.t_squared.values {
        let _ = write!(out, " {value:.11e}");
    }
    out.push('\n');
    out.into_bytes()
}

/// Parses format v1 bytes back into a profile. Inverse of
/// [`serialize_profile`] on valid input.
pub fn deserialize_profile(bytes: &[u8]) -> Result<BehaviorProfile> {
    let text =
        std::str::from_utf8(bytes).map_err(|e| Error::parse(0, format!("invalid utf-8: {e}")))?;
    let mut lines = text.lines().enumerate();

    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::parse(1, "empty input, expected BPv1 header"))?;
    let fields: Vec<&str> = header.split(' ').collect();
    if fields.len() != 5 || fields[0] != "BPv1" {
        return Err(Error::parse(1, format!("malformed header {header:?}")));
    }
    let identifier = fields[1].to_string();
    let node_id = fields[2].to_string();
    if identifier.is_empty() || node_id.is_empty() {
        return Err(Error::parse(1, "empty identifier or node id"));
    }
    let sample_count: usize = fields[3]
        .parse()
        .map_err(|e| Error::parse(1, format!("bad sample count {:?}: {e}", fields[3])))?;
    let interval_ms: u64 = fields[4]
        .parse()
        .map_err(|e| Error::parse(1, format!("bad interval {:?}: {e}", fields[4])))?;

    let mut calls: HashMap<CallKey, CallRecord> = HashMap::new();
    let mut t_squared: Option<Vec<f64>> = None;
    for (idx, line) in lines {
        let line_no = idx + 1;
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix("C\t") {
            if t_squared.is_some() {
                return Err(Error::parse(line_no, "call record after T line"));
            }
            let fields: Vec<&str> = rest.split('\t').collect();
            if fields.len() != 6 {
                return Err(Error::parse(
                    line_no,
                    format!("call record needs 6 fields, got {}", fields.len()),
                ));
            }
            let key = CallKey::from_hex(fields[0])?;
            let count: u64 = fields[1]
                .parse()
                .map_err(|e| Error::parse(line_no, format!("bad count: {e}")))?;
            if count == 0 {
                return Err(Error::parse(line_no, "call count must be at least 1"));
            }
            let source_line: u32 = fields[2]
                .parse()
                .map_err(|e| Error::parse(line_no, format!("bad line number: {e}")))?;
            if fields[5].is_empty() {
                return Err(Error::parse(line_no, "empty call path"));
            }
            let record = CallRecord {
                callee: fields[3].to_string(),
                signature: fields[4].to_string(),
                line: source_line,
                path: fields[5].to_string(),
                count,
            };
            if calls.insert(key, record).is_some() {
                return Err(Error::parse(line_no, "duplicate call digest"));
            }
        } else if line == "T" || line.starts_with("T ") {
            if t_squared.is_some() {
                return Err(Error::parse(line_no, "duplicate T line"));
            }
            let mut values = Vec::new();
            if let Some(rest) = line.strip_prefix("T ") {
                for token in rest.split(' ') {
                    let v: f64 = token.parse().map_err(|e| {
                        Error::parse(line_no, format!("bad t² value {token:?}: {e}"))
                    })?;
                    if !v.is_finite() || v < 0.0 {
                        return Err(Error::parse(
                            line_no,
                            format!("t² values must be finite and non-negative, got {token:?}"),
                        ));
                    }
                    values.push(v);
                }
            }
            t_squared = Some(values);
        } else {
            return Err(Error::parse(line_no, format!("unrecognized line {line:?}")));
        }
    }
    let values = t_squared.ok_or_else(|| Error::parse(0, "truncated stream: missing T line"))?;
    if values.len() != sample_count {
        return Err(Error::parse(
            0,
            format!(
                "t² length {} does not match declared sample count {sample_count}",
                values.len()
            ),
        ));
    }
    Ok(BehaviorProfile {
        identifier,
        node_id,
        calls,
        t_squared: TSquaredVector::new(values),
        sample_count,
        interval_ms,
    })
}
