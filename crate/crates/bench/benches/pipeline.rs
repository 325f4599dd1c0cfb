use criterion::{criterion_group, criterion_main, Criterion};

use replicheck_core::attack::{gen_workload, ScenarioSpec, WorkloadKind, WorkloadSpec};
use replicheck_core::builder::ProfileBuilder;
use replicheck_core::profile::{deserialize_profile, serialize_profile, BehaviorProfile};
use replicheck_core::sim::{run_scenario, SimConfig};

fn build_profile(seed: u64) -> BehaviorProfile {
    let spec = WorkloadSpec::default_for(WorkloadKind::Teragen);
    let streams = gen_workload(&spec, "datanode1", seed, 2000).unwrap();
    let mut builder = ProfileBuilder::new("job-bench", "datanode1", 2000);
    for event in &streams.call_events {
        builder.accumulate_call(event).unwrap();
    }
    for snapshot in &streams.snapshots {
        builder.accumulate_memory(snapshot).unwrap();
    }
    builder.finalize().unwrap()
}

fn bench_profile_build(c: &mut Criterion) {
    let spec = WorkloadSpec::default_for(WorkloadKind::Teragen);
    let streams = gen_workload(&spec, "datanode1", 9, 2000).unwrap();
    c.bench_function("profile_build_teragen", |b| {
        b.iter(|| {
            let mut builder = ProfileBuilder::new("job-bench", "datanode1", 2000);
            for event in &streams.call_events {
                builder.accumulate_call(event).unwrap();
            }
            for snapshot in &streams.snapshots {
                builder.accumulate_memory(snapshot).unwrap();
            }
            builder.finalize().unwrap()
        })
    });
}

fn bench_codec(c: &mut Criterion) {
    let profile = build_profile(11);
    c.bench_function("profile_serialize", |b| {
        b.iter(|| serialize_profile(&profile))
    });
    let bytes = serialize_profile(&profile);
    c.bench_function("profile_deserialize", |b| {
        b.iter(|| deserialize_profile(&bytes).unwrap())
    });
}

fn bench_scenario(c: &mut Criterion) {
    let config = SimConfig::new(ScenarioSpec::clean(WorkloadKind::Idle), 5);
    let mut group = c.benchmark_group("scenario");
    group.sample_size(20);
    group.bench_function("idle_clean_run", |b| {
        b.iter(|| run_scenario(&config).unwrap())
    });
    group.finish();
}

criterion_group!(benches, bench_profile_build, bench_codec, bench_scenario);
criterion_main!(benches);
