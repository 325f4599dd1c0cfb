//! Cluster-level behavior: false-positive calibration, alert discipline,
//! and message-log structure.

use replicheck_core::attack::{ScenarioSpec, WorkloadKind};
use replicheck_core::profile::{deserialize_profile, serialize_profile};
use replicheck_core::sim::{run_scenario, Decision, MessageKind, SimConfig};

#[test]
fn clean_runs_calibrate_below_alpha_plus_margin() {
    // per-node verdict false positives over 200 seeded clean trials must
    // stay within alpha + 0.05
    let mut false_positives = 0_usize;
    let mut verdicts = 0_usize;
    for (kind, base) in [
        (WorkloadKind::Idle, 80_000_u64),
        (WorkloadKind::RandomTextWriter, 81_000),
    ] {
        for seed in 0..100_u64 {
            let config = SimConfig::new(ScenarioSpec::clean(kind), base + seed);
            let report = run_scenario(&config).unwrap();
            for verdict in report.consensus.votes.values() {
                verdicts += 1;
                if !verdict.overall {
                    false_positives += 1;
                }
            }
        }
    }
    let rate = false_positives as f64 / verdicts as f64;
    assert!(
        rate <= 0.05 + 0.05,
        "false-positive rate {rate:.3} ({false_positives}/{verdicts})"
    );
}

#[test]
fn no_alert_when_all_verdicts_pass() {
    for seed in 0..40_u64 {
        let config = SimConfig::new(ScenarioSpec::clean(WorkloadKind::AggregateWordCount), seed);
        let report = run_scenario(&config).unwrap();
        if report.consensus.votes.values().all(|v| v.overall) {
            assert_eq!(report.consensus.decision, Decision::Clean);
            assert!(
                report
                    .messages
                    .iter()
                    .all(|m| m.message.kind != MessageKind::Alert),
                "seed {seed}: alert emitted in a clean run"
            );
        }
    }
}

#[test]
fn message_log_is_sorted_and_counts_match_topology() {
    let mut config = SimConfig::new(ScenarioSpec::clean(WorkloadKind::Idle), 4);
    config.replication = 4;
    let report = run_scenario(&config).unwrap();
    let k = config.replication;
    let profile_messages = report
        .messages
        .iter()
        .filter(|m| m.message.kind == MessageKind::Profile)
        .count();
    assert_eq!(profile_messages, k * (k - 1));
    let vote_messages = report
        .messages
        .iter()
        .filter(|m| m.message.kind == MessageKind::Vote)
        .count();
    assert_eq!(vote_messages, k - 1);
    let keys: Vec<(u32, &str, &str)> = report
        .messages
        .iter()
        .map(|m| (m.round, m.message.from.as_str(), m.message.to.as_str()))
        .collect();
    let mut sorted = keys.clone();
    sorted.sort();
    assert_eq!(keys, sorted, "message log not in (round, from, to) order");
}

#[test]
fn exchanged_profile_payloads_are_canonical() {
    let config = SimConfig::new(ScenarioSpec::clean(WorkloadKind::Teragen), 21);
    let report = run_scenario(&config).unwrap();
    for logged in report
        .messages
        .iter()
        .filter(|m| m.message.kind == MessageKind::Profile)
    {
        let parsed = deserialize_profile(logged.message.payload.as_bytes()).unwrap();
        assert_eq!(
            serialize_profile(&parsed),
            logged.message.payload.as_bytes(),
            "payload from {} is not canonical",
            logged.message.from
        );
        assert_eq!(parsed.node_id, logged.message.from);
        assert_eq!(parsed.identifier, report.identifier);
    }
}

#[test]
fn report_json_round_trips() {
    let config = SimConfig::new(ScenarioSpec::clean(WorkloadKind::Idle), 33);
    let report = run_scenario(&config).unwrap();
    let json = report.to_json();
    let back = replicheck_core::sim::SimReport::from_json(&json).unwrap();
    assert_eq!(report, back);
}
