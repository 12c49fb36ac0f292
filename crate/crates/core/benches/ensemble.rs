use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use ph_stability::model::{structural_constants, DEFAULT_SAFETY, DEFAULT_SAMPLES};
use ph_stability::models::{Preset, PresetParams};
use ph_stability::stability::{prepare, run_histories, Execution};

fn ensemble(c: &mut Criterion) {
    let sys = Preset::TwoString.build(&PresetParams::default()).unwrap();
    let consts = structural_constants(&sys, DEFAULT_SAMPLES, DEFAULT_SAFETY).unwrap();
    let (op, stepper) = prepare(&sys, &consts, 128, None).unwrap();
    let steps = (2.0 / stepper.dt()).ceil() as usize;
    let runs: Vec<(u64, usize)> = (0..8).map(|m| (m, steps)).collect();

    let mut modes = vec![("sequential", Execution::Sequential)];
    #[cfg(feature = "parallel")]
    modes.push(("parallel", Execution::default()));

    let mut group = c.benchmark_group("ensemble");
    group.sample_size(10);
    for (name, exec) in modes {
        group.bench_with_input(BenchmarkId::new(name, runs.len()), &exec, |b, &exec| {
            b.iter(|| run_histories(&op, &stepper, 0, &runs, exec).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, ensemble);
criterion_main!(benches);
