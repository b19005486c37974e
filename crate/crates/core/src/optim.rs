//! Seeded randomized coordinate descent and SGD runners.
//!
//! RCD: `w_{t+1} = w_t - eta_t grad_{i_t} F_S(w_t) e_{i_t}` with `i_t` uniform
//! over coordinates. SGD: `w_{t+1} = w_t - eta_t grad f(w_t; z_{i_t})` with `i_t`
//! uniform over examples. Indices are 0-based throughout.

use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::losses::{coordinate_smoothness, margins, LossModel};
use crate::numeric::dot;
use crate::rng::{Purpose, Stream};

/// Iterate snapshots are kept for every step up to this horizon.
pub const FULL_RECORD_LIMIT: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum StepSchedule {
    Constant {
        eta: f64,
    },
    /// `eta_t = c / t`.
    InverseT {
        c: f64,
    },
}

impl Default for StepSchedule {
    fn default() -> Self {
        StepSchedule::Constant { eta: 0.01 }
    }
}

impl StepSchedule {
    /// `eta_t` for `t >= 1`.
    #[inline]
    pub fn eta(&self, t: usize) -> f64 {
        debug_assert!(t >= 1);
        match *self {
            StepSchedule::Constant { eta } => eta,
            StepSchedule::InverseT { c } => c / t as f64,
        }
    }

    /// The largest step, `eta_1` (schedules are nonincreasing).
    pub fn max_eta(&self) -> f64 {
        self.eta(1)
    }

    pub fn constant(&self) -> Option<f64> {
        match *self {
            StepSchedule::Constant { eta } => Some(eta),
            StepSchedule::InverseT { .. } => None,
        }
    }

    /// `eta_1, ..., eta_t`.
    pub fn etas(&self, t: usize) -> Vec<f64> {
        (1..=t).map(|k| self.eta(k)).collect()
    }

    pub fn validate(&self) -> Result<()> {
        let (name, v) = match *self {
            StepSchedule::Constant { eta } => ("eta", eta),
            StepSchedule::InverseT { c } => ("c", c),
        };
        if v > 0.0 && v.is_finite() {
            Ok(())
        } else {
            Err(Error::invalid(
                name,
                "step size parameter must be finite and positive",
            ))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Horizon `T`: the number of updates.
    pub iterations: usize,
    pub schedule: StepSchedule,
    pub seed: u64,
    pub w1: Vec<f64>,
    /// Snapshot stride; `None` applies [`default_stride`].
    #[serde(default)]
    pub record_every: Option<usize>,
    /// Maintain the margins `<w, x_i>` incrementally instead of recomputing
    /// them every step (linear models only; O(n) instead of O(nd) per step).
    #[serde(default)]
    pub margin_cache: bool,
    #[serde(default = "yes")]
    pub record_risk: bool,
}

fn yes() -> bool {
    true
}

impl RunConfig {
    /// Zero start, default recording.
    pub fn new(iterations: usize, schedule: StepSchedule, seed: u64, d: usize) -> Self {
        Self {
            iterations,
            schedule,
            seed,
            w1: vec![0.0; d],
            record_every: None,
            margin_cache: false,
            record_risk: true,
        }
    }

    pub fn stride(&self) -> usize {
        self.record_every
            .unwrap_or_else(|| default_stride(self.iterations))
    }

    pub fn recorded_times(&self) -> Vec<usize> {
        recorded_times(self.iterations, self.stride())
    }

    pub fn validate(&self, d: usize) -> Result<()> {
        if self.iterations == 0 {
            return Err(Error::invalid("iterations", "T must be at least 1"));
        }
        self.schedule.validate()?;
        if self.record_every == Some(0) {
            return Err(Error::invalid("record_every", "stride must be at least 1"));
        }
        if self.w1.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                actual: self.w1.len(),
            });
        }
        if self.w1.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("w1"));
        }
        Ok(())
    }
}

/// Every step for `T <= 10^4`, otherwise `ceil(T / 10^4)`.
pub fn default_stride(iterations: usize) -> usize {
    if iterations <= FULL_RECORD_LIMIT {
        1
    } else {
        iterations.div_ceil(FULL_RECORD_LIMIT)
    }
}

/// Recorded iterate indices: `1, 1 + stride, 1 + 2 stride, ...` and always `T + 1`.
pub fn recorded_times(iterations: usize, stride: usize) -> Vec<usize> {
    let mut out: Vec<usize> = (1..=iterations + 1).step_by(stride.max(1)).collect();
    if out.last() != Some(&(iterations + 1)) {
        out.push(iterations + 1);
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    Rcd,
    Sgd,
}

impl Algorithm {
    /// The index sequence that drives a run: coordinates for RCD, examples for SGD.
    pub fn draws(self, seed: u64, s: &Dataset, iterations: usize) -> Vec<usize> {
        match self {
            Algorithm::Rcd => coordinate_sequence(seed, s.dim(), iterations),
            Algorithm::Sgd => example_sequence(seed, s.len(), iterations),
        }
    }

    pub fn run_with_draws(
        self,
        model: &LossModel,
        s: &Dataset,
        config: &RunConfig,
        draws: &[usize],
    ) -> Result<Trajectory> {
        match self {
            Algorithm::Rcd => rcd_run_with_coordinates(model, s, config, draws),
            Algorithm::Sgd => sgd_run_with_examples(model, s, config, draws),
        }
    }

    pub fn run(self, model: &LossModel, s: &Dataset, config: &RunConfig) -> Result<Trajectory> {
        let draws = self.draws(config.seed, s, config.iterations);
        self.run_with_draws(model, s, config, &draws)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub t: usize,
    pub w: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub algorithm: Algorithm,
    pub config: RunConfig,
    /// `(t, w_t)` at the recorded times, `t` from 1 to `T + 1`.
    pub snapshots: Vec<Snapshot>,
    /// `F_S(w_t)` at the recorded times (empty if risk recording was off).
    pub risks: Vec<f64>,
    /// `i_1, ..., i_T`.
    pub draws: Vec<usize>,
    /// `w_{T+1}`.
    pub final_iterate: Vec<f64>,
    /// `(1/T) sum_{t=1}^T w_t`, present when every iterate was recorded.
    pub averaged: Option<Vec<f64>>,
}

impl Trajectory {
    pub fn times(&self) -> impl Iterator<Item = usize> + '_ {
        self.snapshots.iter().map(|s| s.t)
    }
}

/// `T` coordinates uniform on `0..d` from the coordinate stream of `seed`.
pub fn coordinate_sequence(seed: u64, d: usize, iterations: usize) -> Vec<usize> {
    let mut rng = Stream::new(seed, Purpose::Coordinates);
    (0..iterations).map(|_| rng.index(d)).collect()
}

/// `T` example indices uniform on `0..n` from the example stream of `seed`.
pub fn example_sequence(seed: u64, n: usize, iterations: usize) -> Vec<usize> {
    let mut rng = Stream::new(seed, Purpose::Examples);
    (0..iterations).map(|_| rng.index(n)).collect()
}

struct Recorder<'a> {
    model: &'a LossModel,
    s: &'a Dataset,
    stride: usize,
    iterations: usize,
    record_risk: bool,
    snapshots: Vec<Snapshot>,
    risks: Vec<f64>,
}

impl<'a> Recorder<'a> {
    fn new(model: &'a LossModel, s: &'a Dataset, config: &RunConfig) -> Self {
        let stride = config.stride();
        let capacity = config.iterations / stride + 2;
        Self {
            model,
            s,
            stride,
            iterations: config.iterations,
            record_risk: config.record_risk,
            snapshots: Vec::with_capacity(capacity),
            risks: Vec::with_capacity(if config.record_risk { capacity } else { 0 }),
        }
    }

    #[inline]
    fn observe(&mut self, t: usize, w: &[f64]) {
        if (t - 1).is_multiple_of(self.stride) || t == self.iterations + 1 {
            self.snapshots.push(Snapshot { t, w: w.to_vec() });
            if self.record_risk {
                self.risks.push(self.model.risk_unchecked(w, self.s));
            }
        }
    }

    fn finish(
        self,
        algorithm: Algorithm,
        config: &RunConfig,
        draws: &[usize],
        w: Vec<f64>,
    ) -> Trajectory {
        let mut traj = Trajectory {
            algorithm,
            config: config.clone(),
            snapshots: self.snapshots,
            risks: self.risks,
            draws: draws.to_vec(),
            final_iterate: w,
            averaged: None,
        };
        traj.averaged = averaged_iterate(&traj).ok();
        traj
    }
}

fn check_draws(draws: &[usize], iterations: usize, bound: usize) -> Result<()> {
    if draws.len() != iterations {
        return Err(Error::DimensionMismatch {
            expected: iterations,
            actual: draws.len(),
        });
    }
    if let Some(&bad) = draws.iter().find(|&&i| i >= bound) {
        return Err(Error::IndexOutOfRange {
            index: bad,
            len: bound,
        });
    }
    Ok(())
}

fn warn_step_cap(model: &LossModel, s: &Dataset, config: &RunConfig) {
    if !model.is_convex() {
        return;
    }
    let l_tilde = coordinate_smoothness(model, s);
    let eta = config.schedule.max_eta();
    if l_tilde > 0.0 && eta > 2.0 / l_tilde {
        log::warn!(
            "step size {eta} exceeds 2/L_tilde = {}; convex stability bounds do not apply",
            2.0 / l_tilde
        );
    }
}

/// RCD with coordinates drawn from `config.seed`.
pub fn rcd_run(model: &LossModel, s: &Dataset, config: &RunConfig) -> Result<Trajectory> {
    let coords = coordinate_sequence(config.seed, s.dim(), config.iterations);
    rcd_run_with_coordinates(model, s, config, &coords)
}

/// RCD along a given coordinate sequence (`coords[t-1]` is `i_t`).
pub fn rcd_run_with_coordinates(
    model: &LossModel,
    s: &Dataset,
    config: &RunConfig,
    coords: &[usize],
) -> Result<Trajectory> {
    model.check_dataset(s)?;
    config.validate(s.dim())?;
    check_draws(coords, config.iterations, s.dim())?;
    warn_step_cap(model, s, config);

    let d = s.dim();
    let features = s.features();
    let mut w = config.w1.clone();
    let mut m = margins(&w, s);
    let mut rec = Recorder::new(model, s, config);
    rec.observe(1, &w);
    for t in 1..=config.iterations {
        let j = coords[t - 1];
        if !config.margin_cache {
            for (mi, (x, _)) in m.iter_mut().zip(s.iter()) {
                *mi = dot(&w, x);
            }
        }
        let g = model.coordinate_gradient_from_margins(s, &m, w[j], j);
        let delta = -config.schedule.eta(t) * g;
        w[j] += delta;
        if !w[j].is_finite() {
            return Err(Error::Diverged { t });
        }
        if config.margin_cache {
            for (i, mi) in m.iter_mut().enumerate() {
                *mi += delta * features[i * d + j];
            }
        }
        rec.observe(t + 1, &w);
    }
    Ok(rec.finish(Algorithm::Rcd, config, coords, w))
}

/// SGD with example indices drawn from `config.seed`.
pub fn sgd_run(model: &LossModel, s: &Dataset, config: &RunConfig) -> Result<Trajectory> {
    let idx = example_sequence(config.seed, s.len(), config.iterations);
    sgd_run_with_examples(model, s, config, &idx)
}

/// SGD along a given example sequence (`examples[t-1]` is `i_t`).
pub fn sgd_run_with_examples(
    model: &LossModel,
    s: &Dataset,
    config: &RunConfig,
    examples: &[usize],
) -> Result<Trajectory> {
    model.check_dataset(s)?;
    config.validate(s.dim())?;
    check_draws(examples, config.iterations, s.len())?;
    warn_step_cap(model, s, config);

    let mut w = config.w1.clone();
    let mut g = vec![0.0; s.dim()];
    let mut rec = Recorder::new(model, s, config);
    rec.observe(1, &w);
    for t in 1..=config.iterations {
        let i = examples[t - 1];
        model.gradient_into(&w, s.row(i), s.label(i), &mut g);
        let eta = config.schedule.eta(t);
        for (wj, gj) in w.iter_mut().zip(&g) {
            *wj -= eta * gj;
        }
        if w.iter().any(|v| !v.is_finite()) {
            return Err(Error::Diverged { t });
        }
        rec.observe(t + 1, &w);
    }
    Ok(rec.finish(Algorithm::Sgd, config, examples, w))
}

/// `(1/T) sum_{t=1}^T w_t`; needs every iterate recorded.
pub fn averaged_iterate(traj: &Trajectory) -> Result<Vec<f64>> {
    let stride = traj.config.stride();
    if stride != 1 {
        return Err(Error::StrideTooCoarse { stride });
    }
    let iterations = traj.config.iterations;
    let used: Vec<&Snapshot> = traj
        .snapshots
        .iter()
        .filter(|s| s.t <= iterations)
        .collect();
    if used.len() != iterations {
        return Err(Error::MissingInput("iterates w_1..w_T"));
    }
    let d = traj.config.w1.len();
    let mut sums = vec![crate::numeric::CompensatedSum::new(); d];
    for snap in used {
        for (acc, v) in sums.iter_mut().zip(&snap.w) {
            acc.add(*v);
        }
    }
    Ok(sums.iter().map(|a| a.value() / iterations as f64).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{Example, Provenance};
    use crate::losses::{empirical_risk, BaseLoss};

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

    fn cfg(t: usize, eta: f64, w1: Vec<f64>) -> RunConfig {
        RunConfig {
            w1,
            ..RunConfig::new(t, StepSchedule::Constant { eta }, 7, 0)
        }
    }

    #[test]
    fn coordinate_sequence_basics() {
        assert!(coordinate_sequence(3, 1, 50).iter().all(|&i| i == 0));
        assert_eq!(
            coordinate_sequence(11, 7, 300),
            coordinate_sequence(11, 7, 300)
        );
        assert_ne!(
            coordinate_sequence(11, 7, 300),
            coordinate_sequence(12, 7, 300)
        );
    }

    #[test]
    fn coordinate_frequencies_are_uniform() {
        let seq = coordinate_sequence(2024, 5, 100_000);
        let mut counts = [0usize; 5];
        for i in seq {
            counts[i] += 1;
        }
        for c in counts {
            let f = c as f64 / 100_000.0;
            assert!((f - 0.2).abs() <= 0.01, "{f}");
        }
    }

    #[test]
    fn forced_coordinate_step() {
        let s = ds(&[(&[1.0, 2.0], 0.0)]);
        let traj = rcd_run_with_coordinates(
            &LossModel::LeastSquares,
            &s,
            &cfg(1, 0.1, vec![1.0, 1.0]),
            &[1],
        )
        .unwrap();
        assert_eq!(traj.final_iterate[0], 1.0);
        assert!((traj.final_iterate[1] - 0.4).abs() < 1e-15);
    }

    #[test]
    fn minimizer_is_fixed() {
        let s = ds(&[(&[1.0, 0.0], 2.0), (&[0.0, 1.0], -1.0)]);
        let traj = rcd_run(&LossModel::LeastSquares, &s, &cfg(50, 0.3, vec![2.0, -1.0])).unwrap();
        for snap in &traj.snapshots {
            assert_eq!(snap.w, vec![2.0, -1.0]);
        }
    }

    #[test]
    fn scalar_contraction_closed_form() {
        let s = ds(&[(&[1.0], 0.0)]);
        let traj = rcd_run(&LossModel::LeastSquares, &s, &cfg(20, 0.5, vec![1.0])).unwrap();
        for snap in &traj.snapshots {
            assert_eq!(snap.w[0], 0.5f64.powi(snap.t as i32 - 1));
        }
    }

    #[test]
    fn sgd_closed_form_and_single_example() {
        let s = ds(&[(&[1.0], 0.0)]);
        let traj = sgd_run(&LossModel::LeastSquares, &s, &cfg(10, 0.01, vec![1.0])).unwrap();
        assert!((traj.final_iterate[0] - 0.99f64.powi(10)).abs() < 1e-15);

        // n = 1: gradient descent on the single example
        let s = ds(&[(&[1.0, -2.0], 0.5)]);
        let m = LossModel::ridge(BaseLoss::LeastSquares, 0.1);
        let traj = sgd_run(&m, &s, &cfg(5, 0.05, vec![0.3, 0.3])).unwrap();
        let mut w = vec![0.3, 0.3];
        for _ in 0..5 {
            let g = crate::losses::loss_gradient(&m, &w, &s.example(0)).unwrap();
            for (wj, gj) in w.iter_mut().zip(&g) {
                *wj -= 0.05 * gj;
            }
        }
        assert_eq!(traj.final_iterate, w);
    }

    #[test]
    fn sgd_interpolating_start_is_stationary() {
        let s = ds(&[(&[1.0, 1.0], 2.0), (&[1.0, -1.0], 0.0)]);
        let traj = sgd_run(&LossModel::LeastSquares, &s, &cfg(30, 0.1, vec![1.0, 1.0])).unwrap();
        assert_eq!(traj.final_iterate, vec![1.0, 1.0]);
    }

    #[test]
    fn averages() {
        let mk = |ws: Vec<Vec<f64>>| {
            let t = ws.len();
            Trajectory {
                algorithm: Algorithm::Rcd,
                config: RunConfig {
                    record_every: Some(1),
                    ..cfg(t, 0.1, vec![0.0; ws[0].len()])
                },
                snapshots: ws
                    .into_iter()
                    .enumerate()
                    .map(|(k, w)| Snapshot { t: k + 1, w })
                    .collect(),
                risks: vec![],
                draws: vec![0; t],
                final_iterate: vec![],
                averaged: None,
            }
        };
        assert_eq!(
            averaged_iterate(&mk(vec![vec![3.0, -1.0]; 5])).unwrap(),
            vec![3.0, -1.0]
        );
        assert_eq!(
            averaged_iterate(&mk(vec![vec![0.0, 0.0], vec![2.0, 4.0]])).unwrap(),
            vec![1.0, 2.0]
        );
        let lin = mk((1..=4).map(|t| vec![t as f64]).collect());
        assert_eq!(averaged_iterate(&lin).unwrap(), vec![2.5]);
        let mut coarse = lin.clone();
        coarse.config.record_every = Some(2);
        assert!(matches!(
            averaged_iterate(&coarse),
            Err(Error::StrideTooCoarse { stride: 2 })
        ));
    }

    #[test]
    fn recorded_times_include_endpoints() {
        assert_eq!(recorded_times(5, 1), vec![1, 2, 3, 4, 5, 6]);
        assert_eq!(recorded_times(5, 2), vec![1, 3, 5, 6]);
        assert_eq!(recorded_times(4, 2), vec![1, 3, 5]);
        assert_eq!(default_stride(10_000), 1);
        assert_eq!(default_stride(10_001), 2);
        assert_eq!(default_stride(1_000_000), 100);
    }

    #[test]
    fn divergence_aborts() {
        let s = ds(&[(&[1.0], 0.0)]);
        match rcd_run(&LossModel::LeastSquares, &s, &cfg(5000, 3.0, vec![1.0])) {
            Err(Error::Diverged { t }) => assert!(t > 1),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn risks_track_snapshots() {
        let s = ds(&[(&[1.0, 2.0], 0.5), (&[-1.0, 0.5], 1.0)]);
        let m = LossModel::LeastSquares;
        let traj = rcd_run(&m, &s, &cfg(20, 0.1, vec![0.0, 0.0])).unwrap();
        assert_eq!(traj.snapshots.len(), 21);
        for (snap, r) in traj.snapshots.iter().zip(&traj.risks) {
            assert_eq!(*r, empirical_risk(&m, &snap.w, &s).unwrap());
        }
    }

    #[test]
    fn margin_cache_matches_exact() {
        let spec = crate::data::SyntheticSpec::new(60, 8, crate::data::Generator::GaussianLogistic);
        let s = crate::data::make_synthetic(&spec, 4).unwrap();
        let m = LossModel::ridge(BaseLoss::Logistic, 0.05);
        let exact = rcd_run(&m, &s, &cfg(3000, 0.5, vec![0.0; 8])).unwrap();
        let cached = rcd_run(
            &m,
            &s,
            &RunConfig {
                margin_cache: true,
                ..cfg(3000, 0.5, vec![0.0; 8])
            },
        )
        .unwrap();
        for (a, b) in exact.snapshots.iter().zip(&cached.snapshots) {
            for (x, y) in a.w.iter().zip(&b.w) {
                assert!(
                    (x - y).abs() <= 1e-10 * x.abs().max(1e-300) + 1e-300 || x == y,
                    "{x} vs {y}"
                );
            }
        }
    }

    #[test]
    fn config_errors() {
        let s = ds(&[(&[1.0], 0.0)]);
        let m = LossModel::LeastSquares;
        assert!(rcd_run(&m, &s, &cfg(0, 0.1, vec![0.0])).is_err());
        assert!(rcd_run(&m, &s, &cfg(3, -0.1, vec![0.0])).is_err());
        assert!(rcd_run(&m, &s, &cfg(3, 0.1, vec![0.0, 0.0])).is_err());
        assert!(rcd_run_with_coordinates(&m, &s, &cfg(1, 0.1, vec![0.0]), &[1]).is_err());
    }
}
