use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use qloss::channels::{ChannelModel, LorentzianBath, RateFunction};
use qloss::witness::{sample_trajectory_with, Execution};

fn trajectory(c: &mut Criterion) {
    let cases = [
        ("dephasing-sin", ChannelModel::Dephasing(RateFunction::sinusoid(1.0, 1.0)), 4.0 * std::f64::consts::PI),
        ("damping-strong", ChannelModel::AmplitudeDamping(LorentzianBath::new(0.2, 2.0).unwrap()), 30.0),
    ];
    let mut group = c.benchmark_group("sample_trajectory");
    for (name, channel, t_max) in &cases {
        for points in [2001usize, 20001] {
            for exec in [Execution::Sequential, Execution::Parallel] {
                let id = BenchmarkId::new(format!("{name}/{exec:?}"), points);
                group.bench_with_input(id, &points, |b, &n| {
                    b.iter(|| sample_trajectory_with(black_box(channel), *t_max, n, exec).unwrap())
                });
            }
        }
    }
    group.finish();
}

criterion_group!(benches, trajectory);
criterion_main!(benches);
