use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rcdstab_core::data::{make_synthetic, Generator, Population, SyntheticSpec};
use rcdstab_core::exec::ExecMode;
use rcdstab_core::losses::LossModel;
use rcdstab_core::optim::{Algorithm, RunConfig, StepSchedule};
use rcdstab_core::stability::{
    argument_stability_curve, DataSource, PairingPolicy, StabilityExperiment,
};

fn experiment(exec: ExecMode) -> StabilityExperiment {
    let spec = SyntheticSpec::new(200, 20, Generator::GaussianLinearRegression);
    StabilityExperiment {
        algorithm: Algorithm::Rcd,
        model: LossModel::LeastSquares,
        source: DataSource::Synthetic {
            population: Population::new(spec, 1).unwrap(),
            n: 200,
        },
        config: RunConfig::new(500, StepSchedule::Constant { eta: 0.01 }, 1, 20),
        policy: PairingPolicy::default(),
        replicates: 32,
        probe: None,
        exec,
    }
}

fn replicates(c: &mut Criterion) {
    let mut group = c.benchmark_group("stability-replicates");
    group.sample_size(10);
    for (name, mode) in [
        ("sequential", ExecMode::Sequential),
        ("parallel", ExecMode::Parallel),
    ] {
        let exp = experiment(mode);
        group.bench_with_input(BenchmarkId::from_parameter(name), &exp, |b, exp| {
            b.iter(|| argument_stability_curve(exp).unwrap())
        });
    }
    group.finish();
}

fn margins(c: &mut Criterion) {
    let s = make_synthetic(
        &SyntheticSpec::new(1000, 50, Generator::GaussianLogistic),
        2,
    )
    .unwrap();
    let mut group = c.benchmark_group("rcd-margins");
    for cache in [false, true] {
        let mut cfg = RunConfig::new(2000, StepSchedule::Constant { eta: 0.05 }, 2, 50);
        cfg.margin_cache = cache;
        let name = if cache { "cached" } else { "exact" };
        group.bench_with_input(BenchmarkId::from_parameter(name), &cfg, |b, cfg| {
            b.iter(|| Algorithm::Rcd.run(&LossModel::Logistic, &s, cfg).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, replicates, margins);
criterion_main!(benches);
