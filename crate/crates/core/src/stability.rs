//! Paired runs on neighboring datasets and Monte-Carlo stability estimates.
//!
//! Each replicate draws `(S, i, z')` and the algorithm's randomness from seeds
//! derived from the base seed and the replicate index, runs the algorithm on
//! `S` and `S^(i)`, and records the iterate distance at every recorded `t`.
//! Replicates may run in parallel; they are reduced in index order.

use serde::{Deserialize, Serialize};

use crate::data::{Dataset, Example, Population};
use crate::error::{Error, Result};
use crate::exec::{try_map_indexed, ExecMode};
use crate::losses::{smoothness, LossModel};
use crate::numeric::{distance_l2, mean_and_se, norm_l2};
use crate::optim::{Algorithm, RunConfig, Trajectory};
use crate::rng::{derive_seed, Purpose, Stream, GENERATOR_VERSION};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NeighborIndex {
    Uniform,
    /// 0-based index of the replaced example.
    Fixed(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReplacementSource {
    /// A fresh draw from the synthetic population.
    FreshSynthetic,
    /// A uniformly chosen example of the held-out pool.
    HeldOutPool,
    /// `z' = z_i`; the pair is identical (a zero-distance control).
    Identical,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairingPolicy {
    /// Drive both runs with the same coordinate (or example) sequence.
    #[serde(default = "coupled")]
    pub couple_randomness: bool,
    #[serde(default = "uniform_index")]
    pub neighbor_index: NeighborIndex,
    #[serde(default = "fresh")]
    pub replacement_source: ReplacementSource,
}

fn coupled() -> bool {
    true
}

fn uniform_index() -> NeighborIndex {
    NeighborIndex::Uniform
}

fn fresh() -> ReplacementSource {
    ReplacementSource::FreshSynthetic
}

impl Default for PairingPolicy {
    fn default() -> Self {
        Self {
            couple_randomness: true,
            neighbor_index: NeighborIndex::Uniform,
            replacement_source: ReplacementSource::FreshSynthetic,
        }
    }
}

/// Where each replicate's training sample comes from.
#[derive(Debug, Clone)]
pub enum DataSource {
    /// A fresh `S` of size `n` per replicate.
    Synthetic { population: Population, n: usize },
    /// The same `S` in every replicate, with an optional held-out pool for
    /// replacements and held-out risk.
    Fixed {
        train: Dataset,
        pool: Option<Dataset>,
    },
}

impl DataSource {
    pub fn is_fixed(&self) -> bool {
        matches!(self, DataSource::Fixed { .. })
    }

    pub fn n(&self) -> usize {
        match self {
            DataSource::Synthetic { n, .. } => *n,
            DataSource::Fixed { train, .. } => train.len(),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            DataSource::Synthetic { population, .. } => population.spec().d,
            DataSource::Fixed { train, .. } => train.dim(),
        }
    }
}

/// Seed of the coordinate/example sequence for the neighbor run.
fn neighbor_run_seed(seed: u64, policy: &PairingPolicy) -> u64 {
    if policy.couple_randomness {
        seed
    } else {
        derive_seed(seed, Purpose::Replicate, 1)
    }
}

/// Runs `algorithm` on `S` and on `S^(i)` (with `z_i` replaced by `z_prime`).
///
/// Coupled pairs share the draw sequence of `config.seed`; otherwise the
/// neighbor uses an independent seed derived from it.
pub fn paired_trajectories(
    algorithm: Algorithm,
    model: &LossModel,
    s: &Dataset,
    i: usize,
    z_prime: &Example,
    config: &RunConfig,
    policy: &PairingPolicy,
) -> Result<(Trajectory, Trajectory)> {
    let neighbor = s.make_neighbor(i, z_prime)?;
    let draws = algorithm.draws(config.seed, s, config.iterations);
    let first = algorithm
        .run_with_draws(model, s, config, &draws)
        .map_err(|e| Error::PairMember {
            member: "original",
            source: Box::new(e),
        })?;
    let second_seed = neighbor_run_seed(config.seed, policy);
    let second_config = RunConfig {
        seed: second_seed,
        ..config.clone()
    };
    let second_draws = if second_seed == config.seed {
        draws
    } else {
        algorithm.draws(second_seed, &neighbor, config.iterations)
    };
    let second = algorithm
        .run_with_draws(model, &neighbor, &second_config, &second_draws)
        .map_err(|e| Error::PairMember {
            member: "neighbor",
            source: Box::new(e),
        })?;
    Ok((first, second))
}

/// `max_{z in probe} |f(w_t; z) - f(w'_t; z)|` at each recorded `t`.
///
/// A finite probe only gives a lower bound on the supremum over all `z`.
pub fn uniform_stability_estimate(
    model: &LossModel,
    pair: (&Trajectory, &Trajectory),
    probe: &Dataset,
) -> Result<Vec<f64>> {
    model.check_dataset(probe)?;
    let (a, b) = pair;
    if a.snapshots.len() != b.snapshots.len() {
        return Err(Error::DimensionMismatch {
            expected: a.snapshots.len(),
            actual: b.snapshots.len(),
        });
    }
    let mut out = Vec::with_capacity(a.snapshots.len());
    for (sa, sb) in a.snapshots.iter().zip(&b.snapshots) {
        if sa.t != sb.t {
            return Err(Error::invalid("trajectories", "recorded times differ"));
        }
        for w in [&sa.w, &sb.w] {
            if w.len() != probe.dim() {
                return Err(Error::DimensionMismatch {
                    expected: probe.dim(),
                    actual: w.len(),
                });
            }
        }
        let worst = probe.iter().fold(0.0f64, |m, (x, y)| {
            let diff = model.value_unchecked(&sa.w, x, y) - model.value_unchecked(&sb.w, x, y);
            m.max(diff.abs())
        });
        out.push(worst);
    }
    Ok(out)
}

/// A Monte-Carlo stability study.
#[derive(Debug, Clone)]
pub struct StabilityExperiment {
    pub algorithm: Algorithm,
    pub model: LossModel,
    pub source: DataSource,
    /// `config.seed` is the base seed of the study.
    pub config: RunConfig,
    pub policy: PairingPolicy,
    pub replicates: usize,
    /// Probe set for the uniform-stability estimate.
    pub probe: Option<Dataset>,
    pub exec: ExecMode,
}

/// Everything one replicate is built from.
#[derive(Debug, Clone)]
pub struct ReplicateInputs {
    pub seed: u64,
    pub train: Dataset,
    pub index: usize,
    pub replacement: Example,
    /// Independent sample used for the held-out risk, if any.
    pub heldout: Option<Dataset>,
    pub config: RunConfig,
}

/// Per-replicate measurements at the recorded times.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplicateOutcome {
    pub distances: Vec<f64>,
    pub uniform: Option<Vec<f64>>,
    pub train_risk: Vec<f64>,
    pub heldout_risk: Option<Vec<f64>>,
}

impl StabilityExperiment {
    pub fn validate(&self) -> Result<()> {
        if self.replicates < 2 {
            return Err(Error::invalid("replicates", "need at least 2 replicates"));
        }
        self.model.validate()?;
        self.config.validate(self.source.dim())?;
        if let NeighborIndex::Fixed(i) = self.policy.neighbor_index {
            if i >= self.source.n() {
                return Err(Error::IndexOutOfRange {
                    index: i,
                    len: self.source.n(),
                });
            }
        }
        match (&self.source, self.policy.replacement_source) {
            (DataSource::Fixed { .. }, ReplacementSource::FreshSynthetic) => Err(Error::invalid(
                "replacement_source",
                "fresh-synthetic replacements need a synthetic data source",
            )),
            (DataSource::Synthetic { .. }, ReplacementSource::HeldOutPool)
            | (DataSource::Fixed { pool: None, .. }, ReplacementSource::HeldOutPool) => {
                Err(Error::MissingInput("held-out pool"))
            }
            _ => Ok(()),
        }
    }

    pub fn replicate_seed(&self, r: usize) -> u64 {
        derive_seed(self.config.seed, Purpose::Replicate, r as u64)
    }

    pub fn replicate_inputs(&self, r: usize) -> Result<ReplicateInputs> {
        let seed = self.replicate_seed(r);
        let (train, heldout) = match &self.source {
            DataSource::Synthetic { population, n } => (
                population.sample(*n, derive_seed(seed, Purpose::Features, 0))?,
                Some(population.sample(*n, derive_seed(seed, Purpose::Split, 0))?),
            ),
            DataSource::Fixed { train, pool } => (train.clone(), pool.clone()),
        };
        let mut pick = Stream::new(seed, Purpose::Neighbor);
        let index = match self.policy.neighbor_index {
            NeighborIndex::Uniform => pick.index(train.len()),
            NeighborIndex::Fixed(i) => i,
        };
        let replacement = match (self.policy.replacement_source, &self.source) {
            (ReplacementSource::Identical, _) => train.example(index),
            (ReplacementSource::FreshSynthetic, DataSource::Synthetic { population, .. }) => {
                let z_seed = derive_seed(seed, Purpose::Neighbor, 1);
                population.draw(
                    &mut Stream::new(z_seed, Purpose::Features),
                    &mut Stream::new(z_seed, Purpose::Noise),
                )
            }
            (
                ReplacementSource::HeldOutPool,
                DataSource::Fixed {
                    pool: Some(pool), ..
                },
            ) => pool.example(pick.index(pool.len())),
            _ => {
                return Err(Error::invalid(
                    "replacement_source",
                    "not available for this data source",
                ))
            }
        };
        Ok(ReplicateInputs {
            seed,
            train,
            index,
            replacement,
            heldout,
            config: RunConfig {
                seed,
                ..self.config.clone()
            },
        })
    }

    pub fn run_replicate(&self, r: usize) -> Result<ReplicateOutcome> {
        let inputs = self.replicate_inputs(r)?;
        let (a, b) = paired_trajectories(
            self.algorithm,
            &self.model,
            &inputs.train,
            inputs.index,
            &inputs.replacement,
            &inputs.config,
            &self.policy,
        )?;
        let distances = a
            .snapshots
            .iter()
            .zip(&b.snapshots)
            .map(|(x, y)| distance_l2(&x.w, &y.w))
            .collect();
        let uniform = match &self.probe {
            Some(p) => Some(uniform_stability_estimate(&self.model, (&a, &b), p)?),
            None => None,
        };
        let heldout_risk = match (&inputs.heldout, inputs.config.record_risk) {
            (Some(h), true) => {
                self.model.check_dataset(h)?;
                Some(
                    a.snapshots
                        .iter()
                        .map(|s| self.model.risk_unchecked(&s.w, h))
                        .collect(),
                )
            }
            _ => None,
        };
        Ok(ReplicateOutcome {
            distances,
            uniform,
            train_risk: a.risks,
            heldout_risk,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanCurve {
    pub mean: Vec<f64>,
    pub se: Vec<f64>,
}

impl MeanCurve {
    fn from_rows(rows: &[&Vec<f64>]) -> Self {
        let len = rows.first().map_or(0, |r| r.len());
        let (mean, se) = (0..len)
            .map(|k| mean_and_se(rows.iter().map(|r| r[k])))
            .unzip();
        Self { mean, se }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub algorithm: Algorithm,
    /// Recorded iterate indices `t` (the curves refer to `w_t`).
    pub times: Vec<usize>,
    /// `E ||w_t - w_t^(i)||_2`.
    pub distance: MeanCurve,
    /// `E ||w_t - w_t^(i)||_2^2`, before any square root.
    pub squared_distance: MeanCurve,
    /// Per-replicate max over the probe of the loss difference, averaged.
    pub uniform: Option<MeanCurve>,
    pub probe_size: Option<usize>,
    /// `E F_S(w_t)`.
    pub train_risk: Option<Vec<f64>>,
    /// `E F_{S'}(w_t)` on an independent sample (held-out proxy for `F`).
    pub heldout_risk: Option<Vec<f64>>,
    pub replicates: usize,
    pub policy: PairingPolicy,
    /// The same `S` was used in every replicate.
    pub fixed_sample: bool,
    pub base_seed: u64,
    pub replicate_seeds: Vec<u64>,
    pub generator: String,
}

/// Monte-Carlo estimate of the on-average argument stability curves.
pub fn argument_stability_curve(exp: &StabilityExperiment) -> Result<StabilityReport> {
    exp.validate()?;
    let outcomes = try_map_indexed(exp.replicates, exp.exec, |r| {
        exp.run_replicate(r).map_err(|e| Error::Replicate {
            replicate: r,
            source: Box::new(e),
        })
    })?;
    let dist: Vec<&Vec<f64>> = outcomes.iter().map(|o| &o.distances).collect();
    let squared: Vec<Vec<f64>> = outcomes
        .iter()
        .map(|o| o.distances.iter().map(|d| d * d).collect())
        .collect();
    let uniform = if exp.probe.is_some() {
        let rows: Vec<&Vec<f64>> = outcomes.iter().filter_map(|o| o.uniform.as_ref()).collect();
        Some(MeanCurve::from_rows(&rows))
    } else {
        None
    };
    let train_risk = exp.config.record_risk.then(|| {
        let rows: Vec<&Vec<f64>> = outcomes.iter().map(|o| &o.train_risk).collect();
        MeanCurve::from_rows(&rows).mean
    });
    let heldout_risk = if outcomes.iter().all(|o| o.heldout_risk.is_some()) {
        let rows: Vec<&Vec<f64>> = outcomes
            .iter()
            .filter_map(|o| o.heldout_risk.as_ref())
            .collect();
        Some(MeanCurve::from_rows(&rows).mean)
    } else {
        None
    };
    Ok(StabilityReport {
        algorithm: exp.algorithm,
        times: exp.config.recorded_times(),
        distance: MeanCurve::from_rows(&dist),
        squared_distance: MeanCurve::from_rows(&squared.iter().collect::<Vec<_>>()),
        uniform,
        probe_size: exp.probe.as_ref().map(|p| p.len()),
        train_risk,
        heldout_risk,
        replicates: exp.replicates,
        policy: exp.policy,
        fixed_sample: exp.source.is_fixed(),
        base_seed: exp.config.seed,
        replicate_seeds: (0..exp.replicates).map(|r| exp.replicate_seed(r)).collect(),
        generator: GENERATOR_VERSION.to_string(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReferenceOptions {
    pub max_iter: usize,
    /// Stop once `||grad F_S||_2` falls below this.
    pub grad_tol: f64,
}

impl Default for ReferenceOptions {
    fn default() -> Self {
        Self {
            max_iter: 100_000,
            grad_tol: 1e-10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceSolution {
    pub w: Vec<f64>,
    pub risk: f64,
    pub grad_norm: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Approximate empirical risk minimizer: full-batch gradient descent with step
/// `1/L` from zero until `||grad F_S|| <= grad_tol` or `max_iter` steps.
pub fn reference_solution(
    model: &LossModel,
    s: &Dataset,
    opts: &ReferenceOptions,
) -> Result<ReferenceSolution> {
    model.check_dataset(s)?;
    let l = smoothness(model, s);
    let step = if l > 0.0 { 1.0 / l } else { 1.0 };
    let mut w = vec![0.0; s.dim()];
    let mut grad = crate::losses::risk_gradient(model, &w, s)?;
    let mut iterations = 0;
    while iterations < opts.max_iter && norm_l2(&grad) > opts.grad_tol {
        for (wj, gj) in w.iter_mut().zip(&grad) {
            *wj -= step * gj;
        }
        iterations += 1;
        grad = crate::losses::risk_gradient(model, &w, s)?;
    }
    let grad_norm = norm_l2(&grad);
    Ok(ReferenceSolution {
        risk: crate::losses::empirical_risk(model, &w, s)?,
        w,
        grad_norm,
        iterations,
        converged: grad_norm <= opts.grad_tol,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceInfo {
    pub supplied: bool,
    pub train_risk: f64,
    pub test_risk: f64,
    pub iterations: Option<usize>,
    pub grad_norm: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapReport {
    pub times: Vec<usize>,
    pub train_risk: Vec<f64>,
    pub test_risk: Vec<f64>,
    /// `F_test(w_t) - F_S(w_t)`.
    pub estimation_error: Vec<f64>,
    /// `F_S(w_t) - F_S(w_hat)`.
    pub optimization_error: Vec<f64>,
    /// `F_test(w_t) - F_test(w_hat)`.
    pub excess_risk_proxy: Vec<f64>,
    pub reference: ReferenceInfo,
}

/// Splits the test risk of a trajectory into estimation and optimization
/// error against a reference point `w_hat`.
///
/// Without a supplied reference, `w_hat` comes from [`reference_solution`];
/// strongly convex (ridge) models need the exact minimizer and therefore an
/// explicit reference.
pub fn generalization_gap(
    model: &LossModel,
    traj: &Trajectory,
    s: &Dataset,
    test: &Dataset,
    reference: Option<&[f64]>,
) -> Result<GapReport> {
    model.check_dataset(s)?;
    model.check_dataset(test)?;
    if test.dim() != s.dim() {
        return Err(Error::DimensionMismatch {
            expected: s.dim(),
            actual: test.dim(),
        });
    }
    if test.provenance() == s.provenance() && test != s {
        log::warn!("test and training sets share provenance; they may overlap");
    }
    let (w_hat, info) = match reference {
        Some(w) => {
            if w.len() != s.dim() {
                return Err(Error::DimensionMismatch {
                    expected: s.dim(),
                    actual: w.len(),
                });
            }
            (w.to_vec(), (None, None))
        }
        None if model.lambda() > 0.0 => return Err(Error::MissingInput("reference")),
        None => {
            let r = reference_solution(model, s, &ReferenceOptions::default())?;
            (r.w, (Some(r.iterations), Some(r.grad_norm)))
        }
    };
    let ref_train = model.risk_unchecked(&w_hat, s);
    let ref_test = model.risk_unchecked(&w_hat, test);
    let mut report = GapReport {
        times: Vec::with_capacity(traj.snapshots.len()),
        train_risk: Vec::new(),
        test_risk: Vec::new(),
        estimation_error: Vec::new(),
        optimization_error: Vec::new(),
        excess_risk_proxy: Vec::new(),
        reference: ReferenceInfo {
            supplied: reference.is_some(),
            train_risk: ref_train,
            test_risk: ref_test,
            iterations: info.0,
            grad_norm: info.1,
        },
    };
    for snap in &traj.snapshots {
        let tr = model.risk_unchecked(&snap.w, s);
        let te = model.risk_unchecked(&snap.w, test);
        report.times.push(snap.t);
        report.train_risk.push(tr);
        report.test_risk.push(te);
        report.estimation_error.push(te - tr);
        report.optimization_error.push(tr - ref_train);
        report.excess_risk_proxy.push(te - ref_test);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{make_synthetic, Generator, Provenance, SyntheticSpec};
    use crate::optim::StepSchedule;

    fn ds(rows: &[(&[f64], f64)]) -> Dataset {
        let d = rows[0].0.len();
        Dataset::new(
            rows.iter()
                .map(|(x, y)| Example::new(x.to_vec(), *y))
                .collect(),
            d,
            Provenance::Manual,
        )
        .unwrap()
    }

    fn cfg(t: usize, eta: f64, d: usize, seed: u64) -> RunConfig {
        RunConfig::new(t, StepSchedule::Constant { eta }, seed, d)
    }

    #[test]
    fn identical_pair_has_zero_distance() {
        let spec = SyntheticSpec::new(30, 5, Generator::GaussianLinearRegression);
        let s = make_synthetic(&spec, 1).unwrap();
        for alg in [Algorithm::Rcd, Algorithm::Sgd] {
            let (a, b) = paired_trajectories(
                alg,
                &LossModel::LeastSquares,
                &s,
                4,
                &s.example(4),
                &cfg(200, 0.05, 5, 3),
                &PairingPolicy::default(),
            )
            .unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn one_step_hand_example() {
        let s = ds(&[(&[1.0], 1.0), (&[1.0], -1.0)]);
        let (a, b) = paired_trajectories(
            Algorithm::Rcd,
            &LossModel::LeastSquares,
            &s,
            1,
            &Example::new(vec![1.0], 1.0),
            &cfg(1, 0.1, 1, 0),
            &PairingPolicy::default(),
        )
        .unwrap();
        assert_eq!(a.final_iterate, vec![0.0]);
        assert!((b.final_iterate[0] - 0.1).abs() < 1e-15);
        assert!((distance_l2(&a.final_iterate, &b.final_iterate) - 0.1).abs() < 1e-15);
    }

    #[test]
    fn uncoupled_pairs_use_different_draws() {
        let s = make_synthetic(
            &SyntheticSpec::new(20, 6, Generator::GaussianLinearRegression),
            2,
        )
        .unwrap();
        let policy = PairingPolicy {
            couple_randomness: false,
            ..PairingPolicy::default()
        };
        let (a, b) = paired_trajectories(
            Algorithm::Rcd,
            &LossModel::LeastSquares,
            &s,
            0,
            &s.example(0),
            &cfg(50, 0.05, 6, 9),
            &policy,
        )
        .unwrap();
        assert_ne!(a.draws, b.draws);
    }

    #[test]
    fn pair_errors_name_member() {
        let s = ds(&[(&[1.0], 1.0), (&[1.0], -1.0)]);
        let err = paired_trajectories(
            Algorithm::Rcd,
            &LossModel::LeastSquares,
            &s,
            1,
            &Example::new(vec![1e200], 1e200),
            &cfg(100, 1.0, 1, 0),
            &PairingPolicy::default(),
        )
        .unwrap_err();
        assert!(
            matches!(
                err,
                Error::PairMember {
                    member: "neighbor",
                    ..
                }
            ),
            "{err:?}"
        );
    }

    #[test]
    fn uniform_hand_example() {
        let probe = ds(&[(&[1.0], 0.0)]);
        let s = ds(&[(&[1.0], 1.0), (&[1.0], -1.0)]);
        let (a, b) = paired_trajectories(
            Algorithm::Rcd,
            &LossModel::LeastSquares,
            &s,
            1,
            &Example::new(vec![1.0], 1.0),
            &cfg(1, 0.1, 1, 0),
            &PairingPolicy::default(),
        )
        .unwrap();
        let u = uniform_stability_estimate(&LossModel::LeastSquares, (&a, &b), &probe).unwrap();
        assert_eq!(u[0], 0.0);
        assert!((u[1] - 0.005).abs() < 1e-15);
        let same = uniform_stability_estimate(&LossModel::LeastSquares, (&a, &a), &probe).unwrap();
        assert!(same.iter().all(|&v| v == 0.0));
    }

    fn experiment(policy: PairingPolicy, exec: ExecMode) -> StabilityExperiment {
        let spec = SyntheticSpec::new(40, 6, Generator::GaussianLogistic);
        StabilityExperiment {
            algorithm: Algorithm::Rcd,
            model: LossModel::Logistic,
            source: DataSource::Synthetic {
                population: Population::new(spec, 11).unwrap(),
                n: 40,
            },
            config: cfg(300, 0.05, 6, 5),
            policy,
            replicates: 12,
            probe: Some(
                make_synthetic(&SyntheticSpec::new(25, 6, Generator::GaussianLogistic), 99)
                    .unwrap(),
            ),
            exec,
        }
    }

    #[test]
    fn identical_replacements_give_zero_report() {
        let exp = experiment(
            PairingPolicy {
                replacement_source: ReplacementSource::Identical,
                ..PairingPolicy::default()
            },
            ExecMode::Parallel,
        );
        let rep = argument_stability_curve(&exp).unwrap();
        assert!(rep.distance.mean.iter().all(|&v| v == 0.0));
        assert!(rep.squared_distance.mean.iter().all(|&v| v == 0.0));
        assert!(rep.uniform.unwrap().mean.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn report_is_schedule_independent_and_jensen_holds() {
        let seq =
            argument_stability_curve(&experiment(PairingPolicy::default(), ExecMode::Sequential))
                .unwrap();
        let par =
            argument_stability_curve(&experiment(PairingPolicy::default(), ExecMode::Parallel))
                .unwrap();
        assert_eq!(seq, par);
        assert_eq!(seq.times.len(), seq.distance.mean.len());
        for (m, sq) in seq.distance.mean.iter().zip(&seq.squared_distance.mean) {
            assert!(*sq >= m * m - 1e-15);
        }
        assert!(seq.distance.mean.last().unwrap() > &0.0);
        assert!(seq.heldout_risk.is_some());
    }

    #[test]
    fn replicate_count_is_validated() {
        let mut exp = experiment(PairingPolicy::default(), ExecMode::Sequential);
        exp.replicates = 1;
        assert!(argument_stability_curve(&exp).is_err());
        let mut exp = experiment(PairingPolicy::default(), ExecMode::Sequential);
        exp.policy.neighbor_index = NeighborIndex::Fixed(40);
        assert!(argument_stability_curve(&exp).is_err());
    }

    #[test]
    fn gap_on_training_set_has_no_estimation_error() {
        let s = make_synthetic(
            &SyntheticSpec::new(50, 4, Generator::GaussianLinearRegression),
            8,
        )
        .unwrap();
        let traj =
            crate::optim::rcd_run(&LossModel::LeastSquares, &s, &cfg(100, 0.1, 4, 1)).unwrap();
        let gap = generalization_gap(&LossModel::LeastSquares, &traj, &s, &s, None).unwrap();
        assert!(gap.estimation_error.iter().all(|&e| e == 0.0));
        assert!(gap.optimization_error.iter().all(|&e| e >= -1e-12));

        let at_ref = generalization_gap(
            &LossModel::LeastSquares,
            &traj,
            &s,
            &s,
            Some(&traj.final_iterate),
        )
        .unwrap();
        assert_eq!(*at_ref.optimization_error.last().unwrap(), 0.0);

        let ridge = LossModel::ridge(crate::losses::BaseLoss::LeastSquares, 0.1);
        assert!(matches!(
            generalization_gap(&ridge, &traj, &s, &s, None),
            Err(Error::MissingInput("reference"))
        ));
    }

    #[test]
    fn reference_solution_converges_on_least_squares() {
        let s = make_synthetic(
            &SyntheticSpec::new(60, 5, Generator::GaussianLinearRegression).with_noise(0.0),
            3,
        )
        .unwrap();
        let r =
            reference_solution(&LossModel::LeastSquares, &s, &ReferenceOptions::default()).unwrap();
        assert!(r.converged);
        assert!(r.risk < 1e-18);
    }
}
