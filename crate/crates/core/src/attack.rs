//! Synthetic workload and insider-attack generators.
//!
//! Clean replicas must be statistically indistinguishable, so every node
//! draws from the same per-workload model with only seeded jitter:
//!
//! * Call counts per path are Poisson around a common rate (never zero,
//!   so clean nodes always agree on the distinct-path set).
//! * Memory features follow a deterministic-amplitude oscillation around
//!   the workload mean — buffer pools and GC cycles at a fixed cadence —
//!   plus bounded uniform jitter, with a node-random phase. Resident size
//!   is shared + private plus a small residual. The bounded noise keeps
//!   the T² signature platykurtic, which the variance F-test between
//!   clean nodes needs in order to hold its nominal level; heavy-tailed
//!   noise would inflate its false-positive rate far past alpha.
//!
//! The configuration attack scales the target's memory means and halves
//! its system-call counts, and — because reduced heap headroom causes
//! swap/reclaim storms — injects rare extreme memory spikes. A pure
//! affine change to the features would be provably invisible to T²
//! (Mahalanobis distance is affine-invariant), so the spike mixture is
//! what the memory comparison actually detects, mirroring how real heap
//! pressure shows up as outlier observations. The exfiltration attack
//! appends device, compression and mail-client calls plus page-cache
//! bumps while files are staged and shipped.

use std::collections::BTreeMap;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::builder::{CallEvent, CallKind, MappingSizes, SmapsSnapshot};
use crate::error::{Error, Result};

/// The workloads a scenario can run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WorkloadKind {
    Idle,
    Teragen,
    Terasort,
    RandomTextWriter,
    AggregateWordCount,
}

impl WorkloadKind {
    pub const ALL: [WorkloadKind; 5] = [
        WorkloadKind::Idle,
        WorkloadKind::Teragen,
        WorkloadKind::Terasort,
        WorkloadKind::RandomTextWriter,
        WorkloadKind::AggregateWordCount,
    ];

    /// The four job kinds (everything but idle).
    pub const JOBS: [WorkloadKind; 4] = [
        WorkloadKind::Teragen,
        WorkloadKind::Terasort,
        WorkloadKind::RandomTextWriter,
        WorkloadKind::AggregateWordCount,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            WorkloadKind::Idle => "idle",
            WorkloadKind::Teragen => "teragen",
            WorkloadKind::Terasort => "terasort",
            WorkloadKind::RandomTextWriter => "random_text_writer",
            WorkloadKind::AggregateWordCount => "aggregate_word_count",
        }
    }
}

/// Mean and spread of one memory feature, in KiB.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureModel {
    pub mean_kib: f64,
    pub stddev_kib: f64,
}

/// Per-feature memory model. `rss.mean_kib` tracks shared + private;
/// `rss.stddev_kib` is the scale of the residual between rss and that sum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MemProfile {
    pub rss: FeatureModel,
    pub shared: FeatureModel,
    pub private: FeatureModel,
}

/// A synthetic workload: what runs on every node of a clean cluster.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorkloadSpec {
    pub kind: WorkloadKind,
    pub duration_ms: u64,
    pub base_call_paths: Vec<String>,
    pub mem_profile: MemProfile,
}

/// Knobs for the configuration-tampering attack.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ConfigAttackParams {
    /// Factor applied to the target's memory feature means
    /// (+25% non-DFS allocation leaves 0.75 of the headroom).
    pub heap_scale: f64,
    /// Factor applied to the target's system-call counts
    /// (fewer handler threads make fewer kernel calls).
    pub thread_scale: f64,
}

impl Default for ConfigAttackParams {
    fn default() -> Self {
        ConfigAttackParams {
            heap_scale: 0.75,
            thread_scale: 0.5,
        }
    }
}

/// Knobs for the data-exfiltration attack.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExfilAttackParams {
    /// Size of each staged file, KiB.
    pub file_size_kib: u64,
    /// Number of zip-and-mail batches over the run.
    pub batch: u32,
}

impl Default for ExfilAttackParams {
    fn default() -> Self {
        ExfilAttackParams {
            file_size_kib: 4096,
            batch: 40,
        }
    }
}

/// Which insider attack (if any) runs against which node.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AttackSpec {
    #[default]
    None,
    ConfigModification {
        target_node: String,
        #[serde(flatten)]
        params: ConfigAttackParams,
    },
    DataExfiltration {
        target_node: String,
        #[serde(flatten)]
        params: ExfilAttackParams,
    },
}

impl AttackSpec {
    pub fn target(&self) -> Option<&str> {
        match self {
            AttackSpec::None => None,
            AttackSpec::ConfigModification { target_node, .. }
            | AttackSpec::DataExfiltration { target_node, .. } => Some(target_node),
        }
    }
}

/// Scenario descriptor: the file format consumed by the simulator and the
/// CLI. Workload defaults (duration, paths, memory model) come from the
/// kind; the attack block defaults to none.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub workload: WorkloadKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub duration_ms: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default)]
    pub attack: AttackSpec,
}

impl ScenarioSpec {
    pub fn clean(workload: WorkloadKind) -> Self {
        ScenarioSpec {
            workload,
            duration_ms: None,
            seed: None,
            attack: AttackSpec::None,
        }
    }

    pub fn workload_spec(&self) -> WorkloadSpec {
        let mut spec = WorkloadSpec::default_for(self.workload);
        if let Some(duration) = self.duration_ms {
            spec.duration_ms = duration;
        }
        spec
    }
}

/// One node's generated observation streams.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct NodeStreams {
    pub call_events: Vec<CallEvent>,
    pub snapshots: Vec<SmapsSnapshot>,
}

struct CallPathSpec {
    path: &'static str,
    callee: &'static str,
    signature: &'static str,
    line: u32,
    kind: CallKind,
    weight: f64,
}

macro_rules! syscall_path {
    ($name:literal, $weight:expr) => {
        CallPathSpec {
            path: concat!("/lib/x86_64-linux-gnu/libc.so.6#", $name),
            callee: $name,
            signature: concat!("long ", $name, "(...)"),
            line: 0,
            kind: CallKind::System,
            weight: $weight,
        }
    };
}

const IDLE_PATHS: &[CallPathSpec] = &[
    syscall_path!("futex", 60.0),
    syscall_path!("epoll_wait", 60.0),
    syscall_path!("read", 55.0),
    CallPathSpec {
        path: "/opt/hadoop/share/hadoop/hdfs/hadoop-hdfs-2.7.1.jar",
        callee: "org.apache.hadoop.hdfs.server.datanode.DataNode",
        signature: "void sendHeartbeat()",
        line: 2281,
        kind: CallKind::Library,
        weight: 50.0,
    },
    CallPathSpec {
        path: "/opt/hadoop/share/hadoop/common/hadoop-common-2.7.1.jar",
        callee: "org.apache.hadoop.ipc.Client",
        signature: "Writable call(RPC.RpcKind, Writable)",
        line: 1438,
        kind: CallKind::Library,
        weight: 50.0,
    },
];

const JOB_SYSCALLS: &[CallPathSpec] = &[
    syscall_path!("read", 2.2),
    syscall_path!("write", 2.2),
    syscall_path!("open", 1.0),
    syscall_path!("close", 1.0),
    syscall_path!("mmap", 0.8),
    syscall_path!("munmap", 0.7),
    syscall_path!("brk", 0.7),
    syscall_path!("futex", 2.0),
    syscall_path!("epoll_wait", 1.6),
    syscall_path!("poll", 0.9),
    syscall_path!("lseek", 1.1),
    syscall_path!("stat", 0.8),
    syscall_path!("fstat", 0.8),
    syscall_path!("fsync", 1.2),
    syscall_path!("socket", 0.7),
    syscall_path!("sendto", 1.6),
    syscall_path!("recvfrom", 1.6),
    syscall_path!("clone", 0.6),
    syscall_path!("getdents", 0.6),
    syscall_path!("fcntl", 0.7),
];

const JOB_LIBRARIES: &[CallPathSpec] = &[
    CallPathSpec {
        path: "/opt/hadoop/share/hadoop/common/hadoop-common-2.7.1.jar",
        callee: "org.apache.hadoop.ipc.Client",
        signature: "Writable call(RPC.RpcKind, Writable)",
        line: 1438,
        kind: CallKind::Library,
        weight: 2.4,
    },
    CallPathSpec {
        path: "/opt/hadoop/share/hadoop/hdfs/hadoop-hdfs-2.7.1.jar",
        callee: "org.apache.hadoop.hdfs.server.datanode.BlockReceiver",
        signature: "void receiveBlock(...)",
        line: 906,
        kind: CallKind::Library,
        weight: 2.6,
    },
    CallPathSpec {
        path: "/opt/hadoop/share/hadoop/mapreduce/hadoop-mapreduce-client-core-2.7.1.jar",
        callee: "org.apache.hadoop.mapred.MapTask",
        signature: "void run(JobConf, TaskUmbilicalProtocol)",
        line: 343,
        kind: CallKind::Library,
        weight: 1.8,
    },
    CallPathSpec {
        path: "/usr/lib/jvm/java-8-openjdk-amd64/jre/lib/rt.jar",
        callee: "java.io.BufferedOutputStream",
        signature: "void write(byte[], int, int)",
        line: 117,
        kind: CallKind::Library,
        weight: 3.0,
    },
    CallPathSpec {
        path: "/opt/hadoop/share/hadoop/common/lib/log4j-1.2.17.jar",
        callee: "org.apache.log4j.Category",
        signature: "void info(Object)",
        line: 666,
        kind: CallKind::Library,
        weight: 1.2,
    },
    CallPathSpec {
        path: "/opt/hadoop/share/hadoop/mapreduce/hadoop-mapreduce-examples-2.7.1.jar",
        callee: "org.apache.hadoop.examples.ExampleDriver",
        signature: "void main(String[])",
        line: 74,
        kind: CallKind::Library,
        weight: 2.2,
    },
];

fn call_budget(kind: WorkloadKind) -> f64 {
    match kind {
        WorkloadKind::Idle => 275.0,
        WorkloadKind::Teragen => 7_200.0,
        WorkloadKind::Terasort => 9_000.0,
        WorkloadKind::RandomTextWriter => 4_600.0,
        WorkloadKind::AggregateWordCount => 4_200.0,
    }
}

/// Oscillation period of the memory model, in samples at default cadence.
fn mem_period(kind: WorkloadKind) -> f64 {
    match kind {
        WorkloadKind::Idle => 12.0,
        WorkloadKind::Teragen => 10.0,
        WorkloadKind::Terasort => 15.0,
        WorkloadKind::RandomTextWriter => 6.0,
        WorkloadKind::AggregateWordCount => 20.0,
    }
}

fn default_mem_profile(kind: WorkloadKind) -> MemProfile {
    let (shared_mean, shared_sd, private_mean, private_sd, rss_sd) = match kind {
        WorkloadKind::Idle => (24_000.0, 450.0, 180_000.0, 2_800.0, 260.0),
        WorkloadKind::Teragen => (90_000.0, 2_200.0, 700_000.0, 16_000.0, 900.0),
        WorkloadKind::Terasort => (120_000.0, 3_000.0, 900_000.0, 22_000.0, 1_100.0),
        WorkloadKind::RandomTextWriter => (60_000.0, 1_600.0, 520_000.0, 12_000.0, 700.0),
        WorkloadKind::AggregateWordCount => (55_000.0, 1_500.0, 460_000.0, 11_000.0, 650.0),
    };
    MemProfile {
        rss: FeatureModel {
            mean_kib: shared_mean + private_mean,
            stddev_kib: rss_sd,
        },
        shared: FeatureModel {
            mean_kib: shared_mean,
            stddev_kib: shared_sd,
        },
        private: FeatureModel {
            mean_kib: private_mean,
            stddev_kib: private_sd,
        },
    }
}

fn path_specs(kind: WorkloadKind) -> Vec<&'static CallPathSpec> {
    match kind {
        WorkloadKind::Idle => IDLE_PATHS.iter().collect(),
        _ => JOB_SYSCALLS.iter().chain(JOB_LIBRARIES.iter()).collect(),
    }
}

impl WorkloadSpec {
    pub fn default_for(kind: WorkloadKind) -> Self {
        WorkloadSpec {
            kind,
            duration_ms: 600_000,
            base_call_paths: path_specs(kind)
                .iter()
                .map(|p| p.path.to_string())
                .collect(),
            mem_profile: default_mem_profile(kind),
        }
    }
}

fn mix_seed(seed: u64, tag: &str) -> u64 {
    let mut h = 0xcbf2_9ce4_8422_2325_u64 ^ seed.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    for b in tag.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Poisson sample by Knuth's product method, halving large rates so the
/// exponential never underflows. Deterministic for a given rng state.
fn poisson(rng: &mut ChaCha8Rng, lambda: f64) -> u64 {
    if lambda <= 0.0 {
        return 0;
    }
    if lambda > 30.0 {
        let half = lambda / 2.0;
        return poisson(rng, half) + poisson(rng, lambda - half);
    }
    let limit = (-lambda).exp();
    let mut count = 0_u64;
    let mut product = 1.0_f64;
    loop {
        product *= rng.random_range(0.0..1.0_f64);
        if product <= limit {
            return count;
        }
        count += 1;
    }
}

/// Fraction of feature variance carried by the deterministic oscillation;
/// the remainder is bounded uniform jitter.
const OSC_VARIANCE_SHARE: f64 = 0.97;

/// Generates one node's call events and memory snapshots for a workload.
///
/// Pure function of `(spec, node, seed, interval_ms)`.
pub fn gen_workload(
    spec: &WorkloadSpec,
    node: &str,
    seed: u64,
    interval_ms: u64,
) -> Result<NodeStreams> {
    if interval_ms == 0 {
        return Err(Error::InvalidParameter(
            "interval_ms must be positive".into(),
        ));
    }
    if spec.duration_ms < 2 * interval_ms {
        return Err(Error::InvalidParameter(format!(
            "duration {}ms is shorter than two sampling intervals",
            spec.duration_ms
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(seed, node));

    // calls: Poisson counts per path around the common workload rates,
    // offset by one so every node keeps the full path set
    let specs = path_specs(spec.kind);
    let known: BTreeMap<&str, &CallPathSpec> = specs.iter().map(|p| (p.path, *p)).collect();
    let total_weight: f64 = spec
        .base_call_paths
        .iter()
        .map(|p| known.get(p.as_str()).map_or(1.0, |s| s.weight))
        .sum();
    let budget = call_budget(spec.kind);
    let mut call_events = Vec::new();
    for path in &spec.base_call_paths {
        let (weight, callee, signature, line, kind) = match known.get(path.as_str()) {
            Some(s) => (s.weight, s.callee, s.signature, s.line, s.kind),
            None => {
                let kind = if path.ends_with(".jar") {
                    CallKind::Library
                } else {
                    CallKind::System
                };
                (1.0, "unknown", "unknown()", 0, kind)
            }
        };
        let rate = (budget * weight / total_weight).max(1.0);
        let count = 1 + poisson(&mut rng, rate - 1.0);
        for i in 0..count {
            call_events.push(CallEvent {
                timestamp_ms: (spec.duration_ms as i64 * i as i64) / count as i64,
                kind,
                callee: callee.to_string(),
                signature: signature.to_string(),
                line,
                path: path.clone(),
            });
        }
    }
    call_events.sort_by(|a, b| (a.timestamp_ms, &a.path).cmp(&(b.timestamp_ms, &b.path)));

    // memory: allocation-cycle oscillations with node-random phase plus
    // bounded jitter. The two features oscillate at distinct integer
    // cycle counts over the run, so their empirical cross-moments vanish
    // exactly and the T² distribution is identical across nodes no
    // matter the phases.
    let n_samples = spec.duration_ms / interval_ms;
    let period = mem_period(spec.kind);
    let shared_cycles = pick_cycles((n_samples as f64 / period).round() as u64, n_samples, &[]);
    let private_cycles = pick_cycles(
        (shared_cycles as f64 * 1.618).round() as u64,
        n_samples,
        &[shared_cycles],
    );
    // the rss residual (page-cache churn) cycles at a third frequency
    let residual_cycles = pick_cycles(
        (shared_cycles as f64 * 2.618).round() as u64,
        n_samples,
        &[shared_cycles, private_cycles],
    );
    let omega = |cycles: u64| std::f64::consts::TAU * cycles as f64 / n_samples as f64;
    let omega_shared = omega(shared_cycles);
    let omega_private = omega(private_cycles);
    let omega_residual = omega(residual_cycles);
    let phase_shared: f64 = rng.random_range(0.0..std::f64::consts::TAU);
    let phase_private: f64 = rng.random_range(0.0..std::f64::consts::TAU);
    let phase_residual: f64 = rng.random_range(0.0..std::f64::consts::TAU);
    let amp = |sd: f64| sd * (2.0 * OSC_VARIANCE_SHARE).sqrt();
    let jitter = |sd: f64| sd * (3.0 * (1.0 - OSC_VARIANCE_SHARE)).sqrt();
    let mem = &spec.mem_profile;

    let mut snapshots = Vec::with_capacity(n_samples as usize);
    for idx in 0..n_samples {
        let t = idx as f64;
        let shared = mem.shared.mean_kib
            + amp(mem.shared.stddev_kib) * (omega_shared * t + phase_shared).sin()
            + rng.random_range(-1.0..1.0) * jitter(mem.shared.stddev_kib);
        let private = mem.private.mean_kib
            + amp(mem.private.stddev_kib) * (omega_private * t + phase_private).sin()
            + rng.random_range(-1.0..1.0) * jitter(mem.private.stddev_kib);
        let rss = shared
            + private
            + amp(mem.rss.stddev_kib) * (omega_residual * t + phase_residual).sin()
            + rng.random_range(-1.0..1.0) * jitter(mem.rss.stddev_kib);
        snapshots.push(build_snapshot(
            (idx * interval_ms) as i64,
            rss.max(0.0) as u64,
            shared.max(0.0) as u64,
            private.max(0.0) as u64,
        ));
    }
    Ok(NodeStreams {
        call_events,
        snapshots,
    })
}

/// Picks an oscillation cycle count near `want` such that no integer
/// combination of total degree ≤ 4 with the already-chosen frequencies
/// hits a multiple of the sample count. T² moments involve products of
/// at most four sinusoid factors, so with those resonances excluded every
/// trigonometric moment averages out exactly over the run and clean
/// nodes' T² moments stay phase-independent.
fn pick_cycles(want: u64, n_samples: u64, taken: &[u64]) -> u64 {
    let n = n_samples as i64;
    let ceiling = (n_samples / 2).saturating_sub(1).max(2);
    // (combination value, total degree spent on the taken frequencies)
    let mut combos: Vec<(i64, i64)> = vec![(0, 0)];
    for &other in taken {
        let mut next = Vec::with_capacity(combos.len() * 9);
        for &(value, degree) in &combos {
            for b in -4..=4_i64 {
                if degree + b.abs() <= 4 {
                    next.push((value + b * other as i64, degree + b.abs()));
                }
            }
        }
        combos = next;
    }
    let resonant = |k: u64| {
        let ki = k as i64;
        for a in 1..=4_i64 {
            for &(value, degree) in &combos {
                if a + degree <= 4 && (a * ki + value).rem_euclid(n) == 0 {
                    return true;
                }
            }
        }
        false
    };
    let start = want.clamp(2, ceiling);
    let mut k = start;
    loop {
        if !resonant(k) {
            return k;
        }
        k = if k < ceiling { k + 1 } else { 2 };
        if k == start {
            // no clean candidate at this sample count; fall back to the
            // requested cycle count rather than spin
            return start;
        }
    }
}

/// Splits feature totals into a plausible heap/data/stack mapping set.
fn build_snapshot(timestamp_ms: i64, rss: u64, shared: u64, private: u64) -> SmapsSnapshot {
    let split = |total: u64, num: u64, den: u64| total * num / den;
    let mappings = vec![
        // heap: most private pages, dirty
        MappingSizes {
            rss_kib: split(rss, 60, 100),
            shared_clean_kib: 0,
            shared_dirty_kib: split(shared, 10, 100),
            private_clean_kib: 0,
            private_dirty_kib: split(private, 70, 100),
        },
        // mapped files and shared libs: mostly clean shared pages
        MappingSizes {
            rss_kib: split(rss, 30, 100),
            shared_clean_kib: split(shared, 70, 100),
            shared_dirty_kib: shared - split(shared, 10, 100) - split(shared, 70, 100),
            private_clean_kib: split(private, 20, 100),
            private_dirty_kib: 0,
        },
        // stack and the rest
        MappingSizes {
            rss_kib: rss - split(rss, 60, 100) - split(rss, 30, 100),
            shared_clean_kib: 0,
            shared_dirty_kib: 0,
            private_clean_kib: 0,
            private_dirty_kib: private - split(private, 70, 100) - split(private, 20, 100),
        },
    ];
    SmapsSnapshot {
        timestamp_ms,
        mappings,
    }
}

/// Applies the configuration-tampering attack to the target node's
/// streams: memory means scaled by `heap_scale` with pressure spikes
/// injected at a rate tied to the lost headroom, system-call counts
/// scaled by `thread_scale`. The call-path set is left untouched so the
/// attack stays invisible to set matching.
pub fn inject_config_attack(
    streams: &mut BTreeMap<String, NodeStreams>,
    target: &str,
    params: &ConfigAttackParams,
    seed: u64,
) -> Result<()> {
    if !(params.heap_scale > 0.0 && params.heap_scale <= 1.0)
        || !(params.thread_scale > 0.0 && params.thread_scale <= 1.0)
    {
        return Err(Error::InvalidParameter(format!(
            "attack scales must lie in (0, 1], got heap={} thread={}",
            params.heap_scale, params.thread_scale
        )));
    }
    let node = streams.get_mut(target).ok_or_else(|| Error::NoSuchNode {
        node: target.to_string(),
    })?;
    if params.heap_scale == 1.0 && params.thread_scale == 1.0 {
        return Ok(());
    }

    // thin system-call events per path down to ceil(count * scale),
    // keeping at least one so the path set is preserved
    let mut per_path_total: BTreeMap<&str, u64> = BTreeMap::new();
    for event in &node.call_events {
        if event.kind == CallKind::System {
            *per_path_total.entry(event.path.as_str()).or_default() += 1;
        }
    }
    let keep_target: BTreeMap<String, u64> = per_path_total
        .iter()
        .map(|(&path, &count)| {
            let keep = ((count as f64 * params.thread_scale).ceil() as u64).max(1);
            (path.to_string(), keep)
        })
        .collect();
    let mut kept_so_far: BTreeMap<String, u64> = BTreeMap::new();
    let mut filtered = Vec::with_capacity(node.call_events.len());
    for event in node.call_events.drain(..) {
        if event.kind == CallKind::System {
            let kept = kept_so_far.entry(event.path.clone()).or_default();
            if *kept >= keep_target[&event.path] {
                continue;
            }
            *kept += 1;
        }
        filtered.push(event);
    }
    node.call_events = filtered;

    // memory: scale every mapping, then land a handful of huge reclaim
    // spikes at seeded positions. The spike count is pinned (only the
    // placement is random): the scale change alone is affine and T²
    // cannot see it, so the spikes are the detectable footprint of the
    // squeezed heap.
    let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(seed, "config-attack"));
    for snapshot in &mut node.snapshots {
        for m in &mut snapshot.mappings {
            m.rss_kib = scale_kib(m.rss_kib, params.heap_scale);
            m.shared_clean_kib = scale_kib(m.shared_clean_kib, params.heap_scale);
            m.shared_dirty_kib = scale_kib(m.shared_dirty_kib, params.heap_scale);
            m.private_clean_kib = scale_kib(m.private_clean_kib, params.heap_scale);
            m.private_dirty_kib = scale_kib(m.private_dirty_kib, params.heap_scale);
        }
    }
    if params.heap_scale < 1.0 && !node.snapshots.is_empty() {
        let n = node.snapshots.len();
        let spike_rate = 0.02 * (1.0 - params.heap_scale);
        let spike_count = ((spike_rate * n as f64).round() as usize).max(2).min(n);
        let spike_factor = 8.0 * (1.0 - params.heap_scale);
        let mut positions = std::collections::BTreeSet::new();
        while positions.len() < spike_count {
            positions.insert(rng.random_range(0..n));
        }
        for idx in positions {
            let snapshot = &mut node.snapshots[idx];
            let private_total: u64 = snapshot
                .mappings
                .iter()
                .map(|m| m.private_clean_kib + m.private_dirty_kib)
                .sum();
            let spike = (private_total as f64 * spike_factor) as u64;
            if let Some(first) = snapshot.mappings.first_mut() {
                first.private_dirty_kib += spike;
                first.rss_kib += spike;
            }
        }
    }
    Ok(())
}

fn scale_kib(v: u64, scale: f64) -> u64 {
    (v as f64 * scale).round() as u64
}

struct ExfilCall {
    path: &'static str,
    callee: &'static str,
    signature: &'static str,
    kind: CallKind,
    per_batch: PerBatch,
}

enum PerBatch {
    Fixed(u64),
    PerFileChunks,
}

const EXFIL_CALLS: &[ExfilCall] = &[
    ExfilCall {
        path: "/dev/loop0#open",
        callee: "open",
        signature: "int open(const char*, int)",
        kind: CallKind::System,
        per_batch: PerBatch::Fixed(2),
    },
    ExfilCall {
        path: "/dev/loop0#read",
        callee: "read",
        signature: "ssize_t read(int, void*, size_t)",
        kind: CallKind::System,
        per_batch: PerBatch::PerFileChunks,
    },
    ExfilCall {
        path: "/dev/loop0#ioctl",
        callee: "ioctl",
        signature: "int ioctl(int, unsigned long, ...)",
        kind: CallKind::System,
        per_batch: PerBatch::Fixed(6),
    },
    ExfilCall {
        path: "/dev/loop0#close",
        callee: "close",
        signature: "int close(int)",
        kind: CallKind::System,
        per_batch: PerBatch::Fixed(2),
    },
    ExfilCall {
        path: "/dev/ram0#open",
        callee: "open",
        signature: "int open(const char*, int)",
        kind: CallKind::System,
        per_batch: PerBatch::Fixed(2),
    },
    ExfilCall {
        path: "/dev/ram0#write",
        callee: "write",
        signature: "ssize_t write(int, const void*, size_t)",
        kind: CallKind::System,
        per_batch: PerBatch::PerFileChunks,
    },
    ExfilCall {
        path: "/dev/ram0#poll",
        callee: "poll",
        signature: "int poll(struct pollfd*, nfds_t, int)",
        kind: CallKind::System,
        per_batch: PerBatch::Fixed(4),
    },
    ExfilCall {
        path: "/dev/ram0#mmap",
        callee: "mmap",
        signature: "void* mmap(void*, size_t, int, int, int, off_t)",
        kind: CallKind::System,
        per_batch: PerBatch::Fixed(2),
    },
    ExfilCall {
        path: "/dev/ram0#fcntl",
        callee: "fcntl",
        signature: "int fcntl(int, int, ...)",
        kind: CallKind::System,
        per_batch: PerBatch::Fixed(2),
    },
    ExfilCall {
        path: "/dev/ram0#close",
        callee: "close",
        signature: "int close(int)",
        kind: CallKind::System,
        per_batch: PerBatch::Fixed(2),
    },
    ExfilCall {
        path: "/usr/bin/gzip",
        callee: "gzip",
        signature: "int main(int, char**)",
        kind: CallKind::Library,
        per_batch: PerBatch::Fixed(1),
    },
    ExfilCall {
        path: "/usr/share/java/mail-client.jar",
        callee: "com.sun.mail.smtp.SMTPTransport",
        signature: "void sendMessage(Message, Address[])",
        kind: CallKind::Library,
        per_batch: PerBatch::Fixed(1),
    },
];

/// Applies the data-exfiltration attack: per batch, the insider stages a
/// file on a RAM disk, zips it and mails it out. New device, compression
/// and mail-client call paths appear on the target only, plus shared
/// page-cache bumps while each file is in flight.
pub fn inject_exfil_attack(
    streams: &mut BTreeMap<String, NodeStreams>,
    target: &str,
    params: &ExfilAttackParams,
) -> Result<()> {
    if params.file_size_kib == 0 {
        return Err(Error::InvalidParameter(
            "file_size_kib must be positive".to_string(),
        ));
    }
    let node = streams.get_mut(target).ok_or_else(|| Error::NoSuchNode {
        node: target.to_string(),
    })?;
    if params.batch == 0 {
        return Ok(());
    }
    let duration = node
        .call_events
        .iter()
        .map(|e| e.timestamp_ms)
        .chain(node.snapshots.iter().map(|s| s.timestamp_ms))
        .max()
        .unwrap_or(0)
        .max(1);
    // 100 KiB transfer chunks
    let chunks = (params.file_size_kib / 100).max(1);
    let batch = u64::from(params.batch);
    let window = duration / batch as i64;

    for b in 0..batch {
        let start = window * b as i64;
        let mut offset = 0_i64;
        for call in EXFIL_CALLS {
            let count = match call.per_batch {
                PerBatch::Fixed(n) => n,
                PerBatch::PerFileChunks => chunks,
            };
            for _ in 0..count {
                node.call_events.push(CallEvent {
                    timestamp_ms: start + offset % window.max(1),
                    kind: call.kind,
                    callee: call.callee.to_string(),
                    signature: call.signature.to_string(),
                    line: 0,
                    path: call.path.to_string(),
                });
                offset += 1;
            }
        }
        // staged file sits in the page cache for the first half of the window
        let bump_end = start + window / 2;
        for snapshot in &mut node.snapshots {
            if snapshot.timestamp_ms >= start && snapshot.timestamp_ms < bump_end {
                if let Some(m) = snapshot.mappings.first_mut() {
                    m.shared_dirty_kib += params.file_size_kib;
                    m.rss_kib += params.file_size_kib;
                }
            }
        }
    }
    node.call_events
        .sort_by(|a, b| (a.timestamp_ms, &a.path).cmp(&(b.timestamp_ms, &b.path)));
    Ok(())
}

/// Generates all node streams for a scenario and applies its attack.
pub fn gen_scenario_streams(
    scenario: &ScenarioSpec,
    node_ids: &[String],
    seed: u64,
    interval_ms: u64,
) -> Result<BTreeMap<String, NodeStreams>> {
    let workload = scenario.workload_spec();
    let mut streams = BTreeMap::new();
    for node in node_ids {
        streams.insert(
            node.clone(),
            gen_workload(&workload, node, seed, interval_ms)?,
        );
    }
    match &scenario.attack {
        AttackSpec::None => {}
        AttackSpec::ConfigModification {
            target_node,
            params,
        } => inject_config_attack(&mut streams, target_node, params, seed)?,
        AttackSpec::DataExfiltration {
            target_node,
            params,
        } => inject_exfil_attack(&mut streams, target_node, params)?,
    }
    Ok(streams)
}
