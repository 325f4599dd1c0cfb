//! Deterministic simulation of a replicated cluster: a namenode and k
//! replica datanodes executing the same task.
//!
//! A run proceeds in synchronous rounds. Every datanode generates its
//! observation streams, builds a behavior profile, and broadcasts it to
//! the other replicas (round 0). Each node then verifies its local
//! profile against everything it received and sends its verdict to the
//! primary datanode (round 1). The primary tallies a majority vote and,
//! on an intrusion decision, alerts the namenode (round 2). The network
//! is lossless and ordered, matching the threat-model assumption that
//! inter-replica communication stays intact, so no retry or leader
//! election machinery is simulated.
//!
//! The whole report is a pure function of `(seed, config)`: node maps are
//! ordered, message logs are sorted by `(round, from, to)`, and all
//! randomness flows from seeded generators.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use sha1::{Digest, Sha1};

use crate::attack::{gen_scenario_streams, ScenarioSpec};
use crate::builder::ProfileBuilder;
use crate::error::{Error, Result};
use crate::profile::{deserialize_profile, serialize_profile, BehaviorProfile};
use crate::verify::{verify, Verdict, VerifyConfig};

pub const NAMENODE_ID: &str = "namenode";

/// Full configuration of one simulated run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    /// Number of replica datanodes; HDFS-style clusters replicate 3 ways.
    pub replication: usize,
    pub seed: u64,
    pub alpha: f64,
    pub delta: f64,
    pub percentile: f64,
    pub interval_ms: u64,
    pub scenario: ScenarioSpec,
}

impl SimConfig {
    pub fn new(scenario: ScenarioSpec, seed: u64) -> Self {
        SimConfig {
            replication: 3,
            seed,
            alpha: 0.05,
            delta: 0.5,
            percentile: 99.0,
            interval_ms: 2000,
            scenario,
        }
    }

    fn verify_config(&self) -> VerifyConfig {
        VerifyConfig {
            alpha: self.alpha,
            delta: self.delta,
            percentile: self.percentile,
        }
    }

    /// The datanode ids, in primary-first (ascending) order.
    pub fn node_ids(&self) -> Vec<String> {
        (1..=self.replication)
            .map(|i| format!("datanode{i}"))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MessageKind {
    Profile,
    Vote,
    Alert,
}

/// One message on the simulated (lossless, per-sender ordered) network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Message {
    pub from: String,
    pub to: String,
    pub kind: MessageKind,
    pub payload: String,
}

/// A message plus the synchronous round it was delivered in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoggedMessage {
    pub round: u32,
    #[serde(flatten)]
    pub message: Message,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Decision {
    Clean,
    Intrusion,
}

/// The cluster-level outcome of the vote round.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsensusOutcome {
    pub votes: BTreeMap<String, Verdict>,
    pub decision: Decision,
    pub suspected_node: Option<String>,
    /// True when the modal suspect was tied and the lowest id was chosen.
    pub suspect_tie: bool,
    /// The primary datanode, responsible for notifying the namenode.
    pub reporter: String,
}

/// One call-table row as it appears in the report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportCall {
    pub digest: String,
    pub path: String,
    pub count: u64,
}

/// Per-node summary embedded in the report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeReport {
    pub node_id: String,
    /// SHA-1 of the profile's canonical serialized form.
    pub profile_digest: String,
    pub distinct_paths: usize,
    pub total_calls: u64,
    pub sample_count: usize,
    pub calls: Vec<ReportCall>,
    pub t_squared: Vec<f64>,
}

/// Everything a run produced, serialized as one JSON document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimReport {
    pub config: SimConfig,
    pub identifier: String,
    pub nodes: Vec<NodeReport>,
    pub consensus: ConsensusOutcome,
    pub messages: Vec<LoggedMessage>,
}

impl SimReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::parse(0, format!("bad report JSON: {e}")))
    }
}

fn at_node(node: &str) -> impl Fn(Error) -> Error + '_ {
    move |source| Error::AtNode {
        node: node.to_string(),
        source: Box::new(source),
    }
}

/// Majority vote over per-node verdicts.
///
/// An intrusion needs a strict majority of `overall = false`. The suspect
/// is the modal explicitly-suspected node; ties go to the lowest node id
/// and are flagged.
pub fn consensus(votes: &BTreeMap<String, Verdict>) -> Result<ConsensusOutcome> {
    if votes.len() < 2 {
        return Err(Error::InvalidParameter(format!(
            "consensus requires at least 2 verdicts, got {}",
            votes.len()
        )));
    }
    let reporter = votes.keys().min().expect("non-empty votes").clone();
    let dissent = votes.values().filter(|v| !v.overall).count();
    let decision = if 2 * dissent > votes.len() {
        Decision::Intrusion
    } else {
        Decision::Clean
    };
    let mut suspect_counts: BTreeMap<&str, usize> = BTreeMap::new();
    for verdict in votes.values() {
        if let Some(s) = &verdict.suspected_node {
            *suspect_counts.entry(s.as_str()).or_default() += 1;
        }
    }
    let best = suspect_counts.values().copied().max().unwrap_or(0);
    let (suspected_node, suspect_tie) = if best == 0 {
        (None, false)
    } else {
        let tied: Vec<&str> = suspect_counts
            .iter()
            .filter(|&(_, &c)| c == best)
            .map(|(&s, _)| s)
            .collect();
        (Some(tied[0].to_string()), tied.len() > 1)
    };
    Ok(ConsensusOutcome {
        votes: votes.clone(),
        decision,
        suspected_node,
        suspect_tie,
        reporter,
    })
}

/// Builds the alert message the primary datanode sends to the namenode.
/// Calling this on a clean outcome is an error.
pub fn notify_namenode(outcome: &ConsensusOutcome) -> Result<Message> {
    if outcome.decision != Decision::Intrusion {
        return Err(Error::NoIntrusion);
    }
    let payload = serde_json::json!({
        "decision": "intrusion",
        "suspected_node": outcome.suspected_node,
        "suspect_tie": outcome.suspect_tie,
        "dissenting_votes": outcome.votes.values().filter(|v| !v.overall).count(),
        "total_votes": outcome.votes.len(),
    });
    Ok(Message {
        from: outcome.reporter.clone(),
        to: NAMENODE_ID.to_string(),
        kind: MessageKind::Alert,
        payload: payload.to_string(),
    })
}

/// Runs one full scenario: generation, profiling, exchange, verification,
/// consensus and (on intrusion) namenode notification.
pub fn run_scenario(config: &SimConfig) -> Result<SimReport> {
    if config.replication < 2 {
        return Err(Error::InvalidParameter(format!(
            "replication must be at least 2, got {}",
            config.replication
        )));
    }
    let node_ids = config.node_ids();
    // scenario-file seeds are resolved into config.seed by the caller
    let seed = config.seed;
    let identifier = format!("job-{}-{seed:016x}", config.scenario.workload.name());

    let streams = gen_scenario_streams(&config.scenario, &node_ids, seed, config.interval_ms)?;

    // profiling phase: one builder per node
    let mut profiles: BTreeMap<String, BehaviorProfile> = BTreeMap::new();
    for (node, stream) in &streams {
        let mut builder = ProfileBuilder::new(&identifier, node, config.interval_ms);
        for event in &stream.call_events {
            builder.accumulate_call(event).map_err(at_node(node))?;
        }
        for snapshot in &stream.snapshots {
            builder.accumulate_memory(snapshot).map_err(at_node(node))?;
        }
        profiles.insert(node.clone(), builder.finalize().map_err(at_node(node))?);
    }

    // round 0: full profile exchange among replicas
    let mut messages: Vec<LoggedMessage> = Vec::new();
    let mut inboxes: BTreeMap<String, Vec<(String, Vec<u8>)>> = BTreeMap::new();
    for from in &node_ids {
        let bytes = serialize_profile(&profiles[from]);
        let payload = String::from_utf8(bytes.clone()).expect("format v1 is utf-8");
        for to in &node_ids {
            if from == to {
                continue;
            }
            messages.push(LoggedMessage {
                round: 0,
                message: Message {
                    from: from.clone(),
                    to: to.clone(),
                    kind: MessageKind::Profile,
                    payload: payload.clone(),
                },
            });
            inboxes
                .entry(to.clone())
                .or_default()
                .push((from.clone(), bytes.clone()));
        }
    }

    // verification phase: each node parses what it received and verifies
    let mut votes: BTreeMap<String, Verdict> = BTreeMap::new();
    let verify_config = config.verify_config();
    for node in &node_ids {
        let mut received = Vec::new();
        for (_, bytes) in inboxes.get(node).into_iter().flatten() {
            received.push(deserialize_profile(bytes).map_err(at_node(node))?);
        }
        let received_refs: Vec<&BehaviorProfile> = received.iter().collect();
        let verdict =
            verify(&profiles[node], &received_refs, &verify_config).map_err(at_node(node))?;
        votes.insert(node.clone(), verdict);
    }

    // round 1: verdicts flow to the primary
    let outcome = consensus(&votes)?;
    for node in &node_ids {
        if *node == outcome.reporter {
            continue;
        }
        messages.push(LoggedMessage {
            round: 1,
            message: Message {
                from: node.clone(),
                to: outcome.reporter.clone(),
                kind: MessageKind::Vote,
                payload: serde_json::to_string(&votes[node])
                    .expect("verdict serialization cannot fail"),
            },
        });
    }

    // round 2: alert the namenode if the cluster agreed on an intrusion
    if outcome.decision == Decision::Intrusion {
        messages.push(LoggedMessage {
            round: 2,
            message: notify_namenode(&outcome)?,
        });
    }
    messages.sort_by(|a, b| {
        (a.round, &a.message.from, &a.message.to).cmp(&(b.round, &b.message.from, &b.message.to))
    });

    let nodes = node_ids
        .iter()
        .map(|node| {
            let profile = &profiles[node];
            let calls = profile
                .sorted_keys()
                .into_iter()
                .map(|key| ReportCall {
                    digest: key.as_hex().to_string(),
                    path: profile.calls[key].path.clone(),
                    count: profile.calls[key].count,
                })
                .collect();
            NodeReport {
                node_id: node.clone(),
                profile_digest: sha1_hex(&serialize_profile(profile)),
                distinct_paths: profile.calls.len(),
                total_calls: profile.total_call_count(),
                sample_count: profile.sample_count,
                calls,
                t_squared: profile.t_squared.values.clone(),
            }
        })
        .collect();

    Ok(SimReport {
        config: config.clone(),
        identifier,
        nodes,
        consensus: outcome,
        messages,
    })
}

fn sha1_hex(bytes: &[u8]) -> String {
    let mut hasher = Sha1::new();
    hasher.update(bytes);
    let digest = hasher.finalize();
    let mut hex = String::with_capacity(40);
    for byte in digest {
        use std::fmt::Write;
        let _ = write!(hex, "{byte:02x}");
    }
    hex
}
