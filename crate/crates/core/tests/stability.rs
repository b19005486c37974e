use proptest::prelude::*;
use rcdstab_core::data::{make_synthetic, Generator, Population, SyntheticSpec};
use rcdstab_core::exec::ExecMode;
use rcdstab_core::losses::LossModel;
use rcdstab_core::optim::{Algorithm, RunConfig, StepSchedule};
use rcdstab_core::stability::{
    argument_stability_curve, paired_trajectories, DataSource, PairingPolicy, StabilityExperiment,
};

fn experiment(seed: u64, exec: ExecMode) -> StabilityExperiment {
    let spec = SyntheticSpec::new(30, 4, Generator::GaussianLogistic);
    StabilityExperiment {
        algorithm: Algorithm::Rcd,
        model: LossModel::Logistic,
        source: DataSource::Synthetic {
            population: Population::new(spec, seed).unwrap(),
            n: 30,
        },
        config: RunConfig::new(80, StepSchedule::Constant { eta: 0.1 }, seed, 4),
        policy: PairingPolicy::default(),
        replicates: 8,
        probe: None,
        exec,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn sequential_and_parallel_agree_bitwise(seed in any::<u64>()) {
        let a = argument_stability_curve(&experiment(seed, ExecMode::Sequential)).unwrap();
        let b = argument_stability_curve(&experiment(seed, ExecMode::Parallel)).unwrap();
        prop_assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }

    #[test]
    fn identical_neighbor_gives_identical_path(seed in any::<u64>(), i in 0usize..20) {
        let s = make_synthetic(&SyntheticSpec::new(20, 3, Generator::GaussianLinearRegression), seed).unwrap();
        let cfg = RunConfig::new(40, StepSchedule::Constant { eta: 0.05 }, seed, 3);
        let (a, b) = paired_trajectories(Algorithm::Sgd, &LossModel::LeastSquares, &s, i, &s.example(i), &cfg, &PairingPolicy::default()).unwrap();
        prop_assert_eq!(a.final_iterate, b.final_iterate);
    }

    // Jensen: E||delta|| <= sqrt(E||delta||^2) at every recorded time.
    #[test]
    fn mean_distance_below_root_mean_square(seed in any::<u64>()) {
        let r = argument_stability_curve(&experiment(seed, ExecMode::Parallel)).unwrap();
        for (m, sq) in r.distance.mean.iter().zip(&r.squared_distance.mean) {
            prop_assert!(*m <= sq.sqrt() * (1.0 + 1e-12) + 1e-300);
        }
        prop_assert_eq!(r.distance.mean[0], 0.0);
    }
}
