//! Behavioral checks for the workload generators and attack injectors.

use std::collections::{BTreeMap, BTreeSet};

use replicheck_core::attack::{
    gen_workload, inject_config_attack, inject_exfil_attack, ConfigAttackParams, ExfilAttackParams,
    NodeStreams, WorkloadKind, WorkloadSpec,
};
use replicheck_core::builder::ProfileBuilder;
use replicheck_core::error::Error;
use replicheck_core::stats::two_sample_f_test;

fn streams_for(kind: WorkloadKind, nodes: &[&str], seed: u64) -> BTreeMap<String, NodeStreams> {
    let spec = WorkloadSpec::default_for(kind);
    nodes
        .iter()
        .map(|node| {
            (
                node.to_string(),
                gen_workload(&spec, node, seed, 2000).unwrap(),
            )
        })
        .collect()
}

fn path_counts(streams: &NodeStreams) -> BTreeMap<&str, u64> {
    let mut counts = BTreeMap::new();
    for event in &streams.call_events {
        *counts.entry(event.path.as_str()).or_default() += 1;
    }
    counts
}

#[test]
fn generators_are_pure_functions_of_inputs() {
    let spec = WorkloadSpec::default_for(WorkloadKind::Teragen);
    let a = gen_workload(&spec, "datanode1", 99, 2000).unwrap();
    let b = gen_workload(&spec, "datanode1", 99, 2000).unwrap();
    assert_eq!(a, b);
    let other_node = gen_workload(&spec, "datanode2", 99, 2000).unwrap();
    assert_ne!(a, other_node);
}

#[test]
fn snapshot_count_follows_cadence_arithmetic() {
    let mut spec = WorkloadSpec::default_for(WorkloadKind::Idle);
    spec.duration_ms = 120_000;
    let streams = gen_workload(&spec, "datanode1", 5, 2000).unwrap();
    assert_eq!(streams.snapshots.len(), 60);
}

#[test]
fn idle_total_call_count_tracks_275() {
    let mut totals = Vec::new();
    for seed in 0..50_u64 {
        let streams = streams_for(WorkloadKind::Idle, &["datanode1"], seed);
        let total = streams["datanode1"].call_events.len() as f64;
        assert!((total - 275.0).abs() < 80.0, "seed {seed}: total {total}");
        totals.push(total);
    }
    let mean = totals.iter().sum::<f64>() / totals.len() as f64;
    assert!((mean - 275.0).abs() < 10.0, "mean {mean}");
}

#[test]
fn no_attack_path_sets_and_count_ratios_agree() {
    // clean nodes must agree on the distinct-path set in every run and
    // stay within the δ = 0.5 count ratio in at least 95% of seeds
    let nodes = ["datanode1", "datanode2", "datanode3"];
    let mut ratio_clean_runs = 0;
    let runs = 100;
    for seed in 0..runs {
        let streams = streams_for(WorkloadKind::Teragen, &nodes, seed);
        let sets: Vec<BTreeSet<&str>> = nodes
            .iter()
            .map(|n| path_counts(&streams[*n]).keys().copied().collect())
            .collect();
        assert!(
            sets.windows(2).all(|w| w[0] == w[1]),
            "seed {seed}: sets differ"
        );
        let counts: Vec<BTreeMap<&str, u64>> =
            nodes.iter().map(|n| path_counts(&streams[*n])).collect();
        let mut worst = 0.0_f64;
        for a in 0..nodes.len() {
            for b in (a + 1)..nodes.len() {
                for (path, &ca) in &counts[a] {
                    let cb = counts[b][path];
                    let ratio = ca.abs_diff(cb) as f64 / ca.max(cb) as f64;
                    worst = worst.max(ratio);
                }
            }
        }
        if worst <= 0.5 {
            ratio_clean_runs += 1;
        }
    }
    assert!(
        ratio_clean_runs * 100 >= 95 * runs,
        "count ratios within delta in only {ratio_clean_runs}/{runs} runs"
    );
}

#[test]
fn clean_two_node_t2_passes_f_test() {
    // same workload on two nodes: the variance test must accept the null
    // in at least 95% of seeds
    let spec = WorkloadSpec::default_for(WorkloadKind::Teragen);
    let mut accepted = 0;
    let runs = 60;
    for seed in 0..runs {
        let mut profiles = Vec::new();
        for node in ["datanode1", "datanode2"] {
            let streams = gen_workload(&spec, node, seed, 2000).unwrap();
            let mut builder = ProfileBuilder::new("job", node, 2000);
            for snapshot in &streams.snapshots {
                builder.accumulate_memory(snapshot).unwrap();
            }
            profiles.push(builder.finalize().unwrap());
        }
        let r = two_sample_f_test(
            &profiles[0].t_squared.values,
            &profiles[1].t_squared.values,
            0.05,
        )
        .unwrap();
        if r.p_value > 0.05 {
            accepted += 1;
        }
    }
    assert!(accepted * 100 >= 95 * runs, "accepted {accepted}/{runs}");
}

#[test]
fn config_attack_preserves_path_set_exactly() {
    for seed in 0..25_u64 {
        let nodes = ["datanode1", "datanode2"];
        let mut streams = streams_for(WorkloadKind::Terasort, &nodes, seed);
        let before: BTreeSet<String> = path_counts(&streams["datanode1"])
            .keys()
            .map(|s| s.to_string())
            .collect();
        inject_config_attack(
            &mut streams,
            "datanode1",
            &ConfigAttackParams::default(),
            seed,
        )
        .unwrap();
        let after: BTreeSet<String> = path_counts(&streams["datanode1"])
            .keys()
            .map(|s| s.to_string())
            .collect();
        assert_eq!(before, after, "seed {seed}");
    }
}

#[test]
fn config_attack_scales_system_calls_only() {
    let nodes = ["datanode1", "datanode2"];
    let mut streams = streams_for(WorkloadKind::Teragen, &nodes, 7);
    let before = path_counts(&streams["datanode1"]);
    let before: BTreeMap<String, u64> = before.iter().map(|(k, v)| (k.to_string(), *v)).collect();
    inject_config_attack(&mut streams, "datanode1", &ConfigAttackParams::default(), 7).unwrap();
    let after = path_counts(&streams["datanode1"]);
    for (path, &count_before) in &before {
        let count_after = after[path.as_str()];
        if path.contains(".so.6#") {
            let expect = ((count_before as f64 * 0.5).ceil() as u64).max(1);
            assert_eq!(count_after, expect, "{path}");
        } else {
            assert_eq!(count_after, count_before, "{path}");
        }
    }
}

#[test]
fn config_attack_with_unit_scales_is_identity() {
    let nodes = ["datanode1", "datanode2"];
    let mut streams = streams_for(WorkloadKind::Teragen, &nodes, 3);
    let before = streams.clone();
    inject_config_attack(
        &mut streams,
        "datanode1",
        &ConfigAttackParams {
            heap_scale: 1.0,
            thread_scale: 1.0,
        },
        3,
    )
    .unwrap();
    assert_eq!(streams, before);
}

#[test]
fn exfil_attack_grows_target_path_set_only() {
    let nodes = ["datanode1", "datanode2", "datanode3"];
    let mut streams = streams_for(WorkloadKind::Idle, &nodes, 13);
    let before: BTreeMap<String, BTreeSet<String>> = streams
        .iter()
        .map(|(n, s)| {
            (
                n.clone(),
                path_counts(s).keys().map(|p| p.to_string()).collect(),
            )
        })
        .collect();
    inject_exfil_attack(&mut streams, "datanode2", &ExfilAttackParams::default()).unwrap();
    for (node, s) in &streams {
        let after: BTreeSet<String> = path_counts(s).keys().map(|p| p.to_string()).collect();
        if node == "datanode2" {
            assert!(after.is_superset(&before[node]) && after.len() > before[node].len());
        } else {
            assert_eq!(after, before[node], "{node} changed");
        }
    }
}

#[test]
fn exfil_attack_with_zero_batches_is_identity() {
    let nodes = ["datanode1", "datanode2"];
    let mut streams = streams_for(WorkloadKind::Idle, &nodes, 17);
    let before = streams.clone();
    inject_exfil_attack(
        &mut streams,
        "datanode1",
        &ExfilAttackParams {
            file_size_kib: 4096,
            batch: 0,
        },
    )
    .unwrap();
    assert_eq!(streams, before);
}

#[test]
fn injectors_reject_unknown_target() {
    let nodes = ["datanode1"];
    let mut streams = streams_for(WorkloadKind::Idle, &nodes, 1);
    let err = inject_config_attack(&mut streams, "datanode9", &ConfigAttackParams::default(), 1)
        .unwrap_err();
    assert!(matches!(err, Error::NoSuchNode { .. }));
    let err =
        inject_exfil_attack(&mut streams, "datanode9", &ExfilAttackParams::default()).unwrap_err();
    assert!(matches!(err, Error::NoSuchNode { .. }));
}

#[test]
fn workload_rejects_too_short_duration() {
    let mut spec = WorkloadSpec::default_for(WorkloadKind::Idle);
    spec.duration_ms = 3000;
    assert!(gen_workload(&spec, "datanode1", 0, 2000).is_err());
}
