//! Command-line driver: run scenarios, ingest trace fixtures into
//! profiles, verify profile sets, and turn reports into plot data.
//!
//! Exit codes across all subcommands: 0 clean, 1 intrusion detected,
//! 2 usage or parse error, 3 runtime error.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use replicheck_core::attack::ScenarioSpec;
use replicheck_core::builder::{parse_call_trace, parse_smaps_log, ProfileBuilder};
use replicheck_core::profile::{deserialize_profile, serialize_profile, BehaviorProfile};
use replicheck_core::sim::{run_scenario, Decision, SimConfig, SimReport};
use replicheck_core::stats::studentized_range_quantile;
use replicheck_core::verify::{compare_calls, filter_tail, verify, VerifyConfig};

const EXIT_CLEAN: u8 = 0;
const EXIT_INTRUSION: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_RUNTIME: u8 = 3;

#[derive(Parser)]
#[command(
    name = "replicheck",
    about = "Replica behavior-profile simulation and cross-verification",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Copy)]
struct Thresholds {
    /// Significance level for the memory comparison tests
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// Maximum tolerated relative difference in per-call counts
    #[arg(long, default_value_t = 0.5)]
    delta: f64,
    /// Tail-filter percentile applied to each T² vector
    #[arg(long, default_value_t = 99.0)]
    percentile: f64,
}

impl Thresholds {
    fn validate(&self) -> Result<(), String> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(format!("--alpha must lie in (0, 1), got {}", self.alpha));
        }
        if !self.delta.is_finite() || self.delta <= 0.0 {
            return Err(format!("--delta must be positive, got {}", self.delta));
        }
        if !(self.percentile > 50.0 && self.percentile <= 100.0) {
            return Err(format!(
                "--percentile must lie in (50, 100], got {}",
                self.percentile
            ));
        }
        Ok(())
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run a cluster scenario and write the full report as JSON
    Run {
        /// Scenario descriptor file (JSON)
        #[arg(long)]
        scenario: PathBuf,
        /// Master seed; overrides the scenario file's seed
        #[arg(long)]
        seed: Option<u64>,
        /// Number of replica datanodes
        #[arg(long, default_value_t = 3)]
        replication: usize,
        #[arg(long, default_value_t = 2000)]
        interval_ms: u64,
        #[command(flatten)]
        thresholds: Thresholds,
        /// Where to write the report JSON
        #[arg(long)]
        out: PathBuf,
    },
    /// Build a behavior profile from call-trace and smaps fixture files
    Ingest {
        /// Call-trace log (tab-separated events)
        #[arg(long)]
        calls: PathBuf,
        /// Memory snapshot log (TS/M blocks)
        #[arg(long)]
        smaps: PathBuf,
        /// Job identifier shared by all replicas of the task
        #[arg(long)]
        identifier: String,
        /// Node the trace came from
        #[arg(long)]
        node: String,
        #[arg(long, default_value_t = 2000)]
        interval_ms: u64,
        /// Where to write the serialized profile
        #[arg(long)]
        out: PathBuf,
    },
    /// Verify two or more serialized profiles against each other
    Verify {
        /// Profile files (format v1); at least two
        profiles: Vec<PathBuf>,
        #[command(flatten)]
        thresholds: Thresholds,
    },
    /// Expand a report into CSV series for plotting
    Report {
        /// Report JSON produced by `run`
        #[arg(long)]
        input: PathBuf,
        /// Directory for the CSV output
        #[arg(long)]
        out_dir: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Run {
            scenario,
            seed,
            replication,
            interval_ms,
            thresholds,
            out,
        } => cmd_run(&scenario, seed, replication, interval_ms, thresholds, &out),
        Command::Ingest {
            calls,
            smaps,
            identifier,
            node,
            interval_ms,
            out,
        } => cmd_ingest(&calls, &smaps, &identifier, &node, interval_ms, &out),
        Command::Verify {
            profiles,
            thresholds,
        } => cmd_verify(&profiles, thresholds),
        Command::Report { input, out_dir } => cmd_report(&input, &out_dir),
    };
    ExitCode::from(code)
}

fn usage_error(message: impl std::fmt::Display) -> u8 {
    eprintln!("error: {message}");
    EXIT_USAGE
}

fn runtime_error(message: impl std::fmt::Display) -> u8 {
    eprintln!("error: {message}");
    EXIT_RUNTIME
}

fn read_file(path: &Path) -> Result<String, u8> {
    std::fs::read_to_string(path)
        .map_err(|e| usage_error(format!("cannot read {}: {e}", path.display())))
}

fn cmd_run(
    scenario_path: &Path,
    seed: Option<u64>,
    replication: usize,
    interval_ms: u64,
    thresholds: Thresholds,
    out: &Path,
) -> u8 {
    if let Err(message) = thresholds.validate() {
        return usage_error(message);
    }
    if replication < 2 {
        return usage_error("--replication must be at least 2");
    }
    let text = match read_file(scenario_path) {
        Ok(t) => t,
        Err(code) => return code,
    };
    let scenario: ScenarioSpec = match serde_json::from_str(&text) {
        Ok(s) => s,
        Err(e) => return usage_error(format!("bad scenario {}: {e}", scenario_path.display())),
    };
    let config = SimConfig {
        replication,
        seed: seed.or(scenario.seed).unwrap_or(0),
        alpha: thresholds.alpha,
        delta: thresholds.delta,
        percentile: thresholds.percentile,
        interval_ms,
        scenario,
    };
    let report = match run_scenario(&config) {
        Ok(r) => r,
        Err(e) => return runtime_error(e),
    };
    if let Err(e) = std::fs::write(out, report.to_json()) {
        return runtime_error(format!("cannot write {}: {e}", out.display()));
    }
    println!(
        "{}: consensus {} (suspected: {})",
        report.identifier,
        match report.consensus.decision {
            Decision::Clean => "clean",
            Decision::Intrusion => "intrusion",
        },
        report.consensus.suspected_node.as_deref().unwrap_or("-")
    );
    match report.consensus.decision {
        Decision::Clean => EXIT_CLEAN,
        Decision::Intrusion => EXIT_INTRUSION,
    }
}

fn cmd_ingest(
    calls_path: &Path,
    smaps_path: &Path,
    identifier: &str,
    node: &str,
    interval_ms: u64,
    out: &Path,
) -> u8 {
    if identifier.is_empty() || identifier.contains(char::is_whitespace) {
        return usage_error("identifier must be a non-empty whitespace-free token");
    }
    if node.is_empty() || node.contains(char::is_whitespace) {
        return usage_error("node id must be a non-empty whitespace-free token");
    }
    let calls_text = match read_file(calls_path) {
        Ok(t) => t,
        Err(code) => return code,
    };
    let events = match parse_call_trace(&calls_text) {
        Ok(e) => e,
        Err(e) => return usage_error(format!("{}: {e}", calls_path.display())),
    };
    let smaps_text = match read_file(smaps_path) {
        Ok(t) => t,
        Err(code) => return code,
    };
    let snapshots = match parse_smaps_log(&smaps_text) {
        Ok(s) => s,
        Err(e) => return usage_error(format!("{}: {e}", smaps_path.display())),
    };
    let mut builder = ProfileBuilder::new(identifier, node, interval_ms);
    for event in &events {
        if let Err(e) = builder.accumulate_call(event) {
            return usage_error(format!("{}: {e}", calls_path.display()));
        }
    }
    for snapshot in &snapshots {
        if let Err(e) = builder.accumulate_memory(snapshot) {
            return usage_error(format!("{}: {e}", smaps_path.display()));
        }
    }
    let profile = match builder.finalize() {
        Ok(p) => p,
        Err(e) => return usage_error(format!("{}: {e}", smaps_path.display())),
    };
    if let Err(e) = std::fs::write(out, serialize_profile(&profile)) {
        return runtime_error(format!("cannot write {}: {e}", out.display()));
    }
    println!(
        "{}: {} calls over {} paths, {} memory samples",
        profile.node_id,
        profile.total_call_count(),
        profile.calls.len(),
        profile.sample_count
    );
    EXIT_CLEAN
}

fn cmd_verify(paths: &[PathBuf], thresholds: Thresholds) -> u8 {
    if paths.len() < 2 {
        return usage_error("verification needs at least two profile files");
    }
    if let Err(message) = thresholds.validate() {
        return usage_error(message);
    }
    let mut profiles: Vec<BehaviorProfile> = Vec::with_capacity(paths.len());
    for path in paths {
        let bytes = match std::fs::read(path) {
            Ok(b) => b,
            Err(e) => return usage_error(format!("cannot read {}: {e}", path.display())),
        };
        match deserialize_profile(&bytes) {
            Ok(p) => profiles.push(p),
            Err(e) => return usage_error(format!("{}: {e}", path.display())),
        }
    }
    let identifier = profiles[0].identifier.clone();
    if let Some(other) = profiles.iter().find(|p| p.identifier != identifier) {
        return usage_error(format!(
            "profile-identity-mismatch: {} vs {}",
            identifier, other.identifier
        ));
    }
    let config = VerifyConfig {
        alpha: thresholds.alpha,
        delta: thresholds.delta,
        percentile: thresholds.percentile,
    };

    // per-pair call comparison, each unordered pair once
    let mut pairs = Vec::new();
    for a in 0..profiles.len() {
        for b in (a + 1)..profiles.len() {
            match compare_calls(&profiles[a], &profiles[b], config.delta) {
                Ok(c) => pairs.push(serde_json::json!({
                    "local": profiles[a].node_id,
                    "remote": profiles[b].node_id,
                    "comparison": c,
                })),
                Err(e) => return runtime_error(e),
            }
        }
    }

    // full per-node verdicts drive the exit code
    let mut verdicts = Vec::new();
    let mut any_mismatch = false;
    let mut memory_summary = serde_json::Value::Null;
    for i in 0..profiles.len() {
        let received: Vec<&BehaviorProfile> = profiles
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i)
            .map(|(_, p)| p)
            .collect();
        let verdict = match verify(&profiles[i], &received, &config) {
            Ok(v) => v,
            Err(e) => return runtime_error(e),
        };
        any_mismatch |= !verdict.overall;
        if memory_summary.is_null() {
            if let Some(m) = &verdict.memory {
                memory_summary = serde_json::json!({
                    "f_statistic": m.anova.f_statistic,
                    "p_value": m.anova.p_value,
                    "mem_match": m.mem_match,
                    "suspected_node": m.suspected_node,
                });
            }
        }
        verdicts.push(verdict);
    }
    let output = serde_json::json!({
        "identifier": identifier,
        "pairs": pairs,
        "memory": memory_summary,
        "verdicts": verdicts,
    });
    println!("{}", serde_json::to_string_pretty(&output).expect("json"));
    if any_mismatch {
        EXIT_INTRUSION
    } else {
        EXIT_CLEAN
    }
}

fn cmd_report(input: &Path, out_dir: &Path) -> u8 {
    let text = match read_file(input) {
        Ok(t) => t,
        Err(code) => return code,
    };
    let report = match SimReport::from_json(&text) {
        Ok(r) => r,
        Err(e) => return usage_error(format!("{}: {e}", input.display())),
    };
    if let Err(e) = std::fs::create_dir_all(out_dir) {
        return runtime_error(format!("cannot create {}: {e}", out_dir.display()));
    }
    let mut written = Vec::new();
    let mut notes = Vec::new();

    // sorted per-node T² columns, for box-plot style summaries
    let node_ids: Vec<&str> = report.nodes.iter().map(|n| n.node_id.as_str()).collect();
    let mut t2_csv = node_ids.join(",");
    t2_csv.push('\n');
    let sorted_t2: Vec<Vec<f64>> = report
        .nodes
        .iter()
        .map(|n| {
            let mut v = n.t_squared.clone();
            v.sort_by(f64::total_cmp);
            v
        })
        .collect();
    let longest = sorted_t2.iter().map(Vec::len).max().unwrap_or(0);
    for row in 0..longest {
        let line: Vec<String> = sorted_t2
            .iter()
            .map(|col| col.get(row).map_or(String::new(), |v| format!("{v:.6}")))
            .collect();
        t2_csv.push_str(&line.join(","));
        t2_csv.push('\n');
    }
    if let Err(e) = std::fs::write(out_dir.join("t2.csv"), t2_csv) {
        return runtime_error(e);
    }
    written.push("t2.csv");

    // per-path call counts per node
    let mut all_paths: BTreeMap<&str, &str> = BTreeMap::new();
    for node in &report.nodes {
        for call in &node.calls {
            all_paths.insert(call.digest.as_str(), call.path.as_str());
        }
    }
    let mut calls_csv = String::from("digest,path");
    for id in &node_ids {
        calls_csv.push(',');
        calls_csv.push_str(id);
    }
    calls_csv.push('\n');
    for (digest, path) in &all_paths {
        calls_csv.push_str(digest);
        calls_csv.push(',');
        calls_csv.push_str(path);
        for node in &report.nodes {
            let count = node
                .calls
                .iter()
                .find(|c| c.digest == *digest)
                .map_or(0, |c| c.count);
            calls_csv.push_str(&format!(",{count}"));
        }
        calls_csv.push('\n');
    }
    if let Err(e) = std::fs::write(out_dir.join("calls.csv"), calls_csv) {
        return runtime_error(e);
    }
    written.push("calls.csv");

    // Tukey comparison intervals, only when some verdict ran the test
    let tukey_ran = report
        .consensus
        .votes
        .values()
        .any(|v| v.memory.as_ref().is_some_and(|m| m.tukey.is_some()));
    if tukey_ran {
        match tukey_csv(&report) {
            Ok(csv) => {
                if let Err(e) = std::fs::write(out_dir.join("tukey.csv"), csv) {
                    return runtime_error(e);
                }
                written.push("tukey.csv");
            }
            Err(e) => return runtime_error(e),
        }
    } else {
        notes.push("tukey.csv absent: memory comparison accepted the null everywhere");
    }

    let manifest = serde_json::json!({
        "source": input.display().to_string(),
        "identifier": report.identifier,
        "decision": report.consensus.decision,
        "suspected_node": report.consensus.suspected_node,
        "files": written,
        "notes": notes,
    });
    if let Err(e) = std::fs::write(
        out_dir.join("manifest.json"),
        serde_json::to_string_pretty(&manifest).expect("json"),
    ) {
        return runtime_error(e);
    }
    match report.consensus.decision {
        Decision::Clean => EXIT_CLEAN,
        Decision::Intrusion => EXIT_INTRUSION,
    }
}

/// Comparison-interval rows recomputed from the reported T² vectors:
/// filtered group mean with half-width `q/2 · √(MSW/n)`, so that
/// non-overlapping intervals correspond to a significant Tukey pair
/// (exactly, for equal group sizes).
fn tukey_csv(report: &SimReport) -> Result<String, replicheck_core::Error> {
    let percentile = report.config.percentile;
    let alpha = report.config.alpha;
    let mut groups = Vec::new();
    for node in &report.nodes {
        let t2 = replicheck_core::TSquaredVector::new(node.t_squared.clone());
        groups.push(filter_tail(&t2, percentile)?.values);
    }
    let k = groups.len();
    let n_total: usize = groups.iter().map(Vec::len).sum();
    let df = n_total - k;
    let means: Vec<f64> = groups
        .iter()
        .map(|g| g.iter().sum::<f64>() / g.len() as f64)
        .collect();
    let ss_within: f64 = groups
        .iter()
        .zip(&means)
        .map(|(g, &m)| g.iter().map(|&x| (x - m) * (x - m)).sum::<f64>())
        .sum();
    let msw = ss_within / df as f64;
    let q = studentized_range_quantile(k, df, alpha)?;
    let suspected = report.consensus.suspected_node.as_deref();
    let mut csv = String::from("node,filtered_mean,lower,upper,suspected\n");
    for (node, (group, mean)) in report.nodes.iter().zip(groups.iter().zip(&means)) {
        let half = 0.5 * q * (msw / group.len() as f64).sqrt();
        let mark = if suspected == Some(node.node_id.as_str()) {
            "yes"
        } else {
            ""
        };
        csv.push_str(&format!(
            "{},{:.6},{:.6},{:.6},{}\n",
            node.node_id,
            mean,
            mean - half,
            mean + half,
            mark
        ));
    }
    Ok(csv)
}
