//! Executable checks of the step inequalities the stability analysis rests on.
//!
//! Each check draws random instances and reports the largest violation of its
//! inequality. A row passes when that violation is within tolerance, or, for a
//! negative control, when it is not.

use serde::{Deserialize, Serialize};

use crate::data::{make_synthetic, Dataset, Example, Generator, Provenance, SyntheticSpec};
use crate::error::{Error, Result};
use crate::losses::{
    coordinate_gradient, empirical_risk, estimate_constants, loss_gradient, loss_value,
    per_example_smoothness, BaseLoss, LossModel,
};
use crate::numeric::{dot, norm_l1, norm_l2, power_iteration};
use crate::optim::Algorithm;
use crate::optim::{RunConfig, StepSchedule};
use crate::rng::{derive_seed, Purpose, Stream};
use crate::stability::{paired_trajectories, PairingPolicy};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PropertySuiteConfig {
    /// Random quadratics per operator check.
    #[serde(default = "default_trials")]
    pub trials: usize,
    /// Random `(w, z)` points per loss check.
    #[serde(default = "default_sample_trials")]
    pub sample_trials: usize,
    #[serde(default)]
    pub seed: u64,
    /// Quadratics have dimension drawn from `2..=max_dim`.
    #[serde(default = "default_max_dim")]
    pub max_dim: usize,
}

fn default_trials() -> usize {
    10_000
}

fn default_sample_trials() -> usize {
    1_000
}

fn default_max_dim() -> usize {
    8
}

impl Default for PropertySuiteConfig {
    fn default() -> Self {
        Self {
            trials: default_trials(),
            sample_trials: default_sample_trials(),
            seed: 0,
            max_dim: default_max_dim(),
        }
    }
}

impl PropertySuiteConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::invalid("trials", "must be at least 1"));
        }
        if self.sample_trials == 0 {
            return Err(Error::invalid("sample_trials", "must be at least 1"));
        }
        if self.max_dim < 2 {
            return Err(Error::invalid("max_dim", "must be at least 2"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropertyRow {
    pub name: String,
    /// What the instances are drawn from.
    pub scope: String,
    pub trials: usize,
    pub max_violation: f64,
    pub tolerance: f64,
    /// Negative controls pass only if they do find a violation.
    pub expect_violation: bool,
    pub passed: bool,
}

impl PropertyRow {
    fn new(
        name: &str,
        scope: &str,
        trials: usize,
        max_violation: f64,
        tolerance: f64,
        expect_violation: bool,
    ) -> Self {
        let within = max_violation <= tolerance;
        Self {
            name: name.to_string(),
            scope: scope.to_string(),
            trials,
            max_violation,
            tolerance,
            expect_violation,
            passed: within != expect_violation,
        }
    }
}

const OPERATOR_TOL: f64 = 1e-12;
const SELF_BOUNDING_TOL: f64 = 1e-9;
const FD_TOL: f64 = 1e-6;

/// `g(w) = w^T A w / 2 + b^T w` with symmetric positive semidefinite `A`.
struct Quadratic {
    d: usize,
    a: Vec<f64>,
    b: Vec<f64>,
}

impl Quadratic {
    fn random(rng: &mut Stream, d: usize, separable: bool, ridge: f64) -> Self {
        let mut a = vec![0.0; d * d];
        if separable {
            for j in 0..d {
                a[j * d + j] = 0.05 + 2.0 * rng.unit() + ridge;
            }
        } else {
            let m: Vec<f64> = (0..d * d).map(|_| rng.normal()).collect();
            for r in 0..d {
                for c in 0..d {
                    let mut s = 0.0;
                    for k in 0..d {
                        s += m[k * d + r] * m[k * d + c];
                    }
                    a[r * d + c] = s / d as f64;
                }
                a[r * d + r] += ridge;
            }
        }
        let b = (0..d).map(|_| rng.normal()).collect();
        Self { d, a, b }
    }

    fn coord_grad(&self, w: &[f64], i: usize) -> f64 {
        dot(&self.a[i * self.d..(i + 1) * self.d], w) + self.b[i]
    }

    /// `L_tilde = max_i A_ii`.
    fn l_tilde(&self) -> f64 {
        (0..self.d).fold(0.0f64, |m, i| m.max(self.a[i * self.d + i]))
    }

    /// Coordinate-wise strong convexity `min_i A_ii`.
    fn sigma(&self) -> f64 {
        (0..self.d).fold(f64::INFINITY, |m, i| m.min(self.a[i * self.d + i]))
    }

    fn lambda_max(&self) -> f64 {
        power_iteration(&self.a, self.d, 1e-14, 100_000)
    }

    fn step(&self, w: &[f64], eta: f64, i: usize) -> Vec<f64> {
        let mut out = w.to_vec();
        out[i] -= eta * self.coord_grad(w, i);
        out
    }
}

fn random_point(rng: &mut Stream, d: usize) -> Vec<f64> {
    (0..d).map(|_| rng.uniform(-1.0, 1.0)).collect()
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

#[derive(Clone, Copy)]
enum OperatorCheck {
    /// `||T w - T w~|| <= ||w - w~||`, `eta <= 2 / L_tilde`.
    Nonexpansive { separable: bool },
    /// `||T w - T w~||^2 <= ||w - w~||^2 - eta sigma |w_i - w~_i|^2`, `eta <= 1 / L_tilde`.
    Contraction { separable: bool },
    /// `E_i ||T_i w - T_i w~||^2 <= ||w - w~||^2`, `eta <= 2 / lambda_max`.
    ExpectedNonexpansive,
    /// Nonexpansiveness at `eta = 10 / L_tilde`; must fail.
    OversizedStep,
}

fn operator_check(cfg: &PropertySuiteConfig, salt: u64, check: OperatorCheck) -> f64 {
    let mut rng = Stream::new(
        derive_seed(cfg.seed, Purpose::Property, salt),
        Purpose::Property,
    );
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..cfg.trials {
        let d = 2 + rng.index(cfg.max_dim - 1);
        let (separable, ridge) = match check {
            OperatorCheck::Nonexpansive { separable } => (separable, 0.0),
            OperatorCheck::Contraction { separable } => (separable, 0.1 + rng.unit()),
            OperatorCheck::ExpectedNonexpansive => (false, 0.0),
            OperatorCheck::OversizedStep => (true, 0.0),
        };
        let g = Quadratic::random(&mut rng, d, separable, ridge);
        let w = random_point(&mut rng, d);
        let v = random_point(&mut rng, d);
        let i = rng.index(d);
        // u in (0, 1]
        let u = 1.0 - rng.unit();
        let violation = match check {
            OperatorCheck::Nonexpansive { .. } => {
                let eta = 2.0 * u / g.l_tilde();
                sq_dist(&g.step(&w, eta, i), &g.step(&v, eta, i)).sqrt() - sq_dist(&w, &v).sqrt()
            }
            OperatorCheck::Contraction { .. } => {
                let eta = u / g.l_tilde();
                let lhs = sq_dist(&g.step(&w, eta, i), &g.step(&v, eta, i));
                let di = w[i] - v[i];
                lhs - (sq_dist(&w, &v) - eta * g.sigma() * di * di)
            }
            OperatorCheck::ExpectedNonexpansive => {
                let eta = 2.0 * u / g.lambda_max();
                let mean = (0..d)
                    .map(|k| sq_dist(&g.step(&w, eta, k), &g.step(&v, eta, k)))
                    .sum::<f64>()
                    / d as f64;
                mean - sq_dist(&w, &v)
            }
            OperatorCheck::OversizedStep => {
                let eta = 10.0 / g.l_tilde();
                sq_dist(&g.step(&w, eta, i), &g.step(&v, eta, i)).sqrt() - sq_dist(&w, &v).sqrt()
            }
        };
        worst = worst.max(violation);
    }
    worst.max(0.0)
}

fn random_label(rng: &mut Stream, base: BaseLoss) -> f64 {
    match base {
        BaseLoss::LeastSquares => rng.normal(),
        BaseLoss::Logistic => {
            if rng.unit() < 0.5 {
                -1.0
            } else {
                1.0
            }
        }
        BaseLoss::SigmoidLeastSquares => rng.unit(),
    }
}

fn random_example(rng: &mut Stream, d: usize, base: BaseLoss) -> Example {
    let x = (0..d).map(|_| rng.normal()).collect();
    Example::new(x, random_label(rng, base))
}

/// `||grad f||^2 <= 2 L_z f`, relative violation.
fn self_bounding(cfg: &PropertySuiteConfig, salt: u64, model: &LossModel) -> Result<f64> {
    let mut rng = Stream::new(
        derive_seed(cfg.seed, Purpose::Property, salt),
        Purpose::Property,
    );
    let mut worst = 0.0f64;
    for _ in 0..cfg.sample_trials {
        let d = 1 + rng.index(cfg.max_dim);
        let z = random_example(&mut rng, d, model.base());
        let w: Vec<f64> = (0..d).map(|_| 2.0 * rng.normal()).collect();
        let g = loss_gradient(model, &w, &z)?;
        let f = loss_value(model, &w, &z)?;
        let lhs = dot(&g, &g);
        let rhs = 2.0 * per_example_smoothness(model, &z.features) * f;
        let v = if rhs > 0.0 { (lhs - rhs) / rhs } else { lhs };
        worst = worst.max(v);
    }
    Ok(worst)
}

fn relative_error(exact: f64, approx: f64) -> f64 {
    (exact - approx).abs() / exact.abs().max(1.0)
}

/// Per-example gradients and coordinate gradients of `F_S` against central
/// differences with `h = 1e-5 (1 + |w_j|)`.
///
/// The relative error is measured against `max(|exact|, 1)`, so derivatives
/// near zero are compared absolutely.
fn finite_differences(cfg: &PropertySuiteConfig, salt: u64, model: &LossModel) -> Result<f64> {
    let mut rng = Stream::new(
        derive_seed(cfg.seed, Purpose::Property, salt),
        Purpose::Property,
    );
    let mut worst = 0.0f64;
    for trial in 0..cfg.sample_trials {
        let d = 1 + rng.index(cfg.max_dim);
        let w: Vec<f64> = (0..d).map(|_| rng.normal()).collect();
        let h_at = |j: usize| 1e-5 * (1.0 + w[j].abs());
        let shifted = |j: usize, s: f64| {
            let mut v = w.clone();
            v[j] += s;
            v
        };
        let z = random_example(&mut rng, d, model.base());
        let g = loss_gradient(model, &w, &z)?;
        for (j, &gj) in g.iter().enumerate() {
            let h = h_at(j);
            let fd = (loss_value(model, &shifted(j, h), &z)?
                - loss_value(model, &shifted(j, -h), &z)?)
                / (2.0 * h);
            worst = worst.max(relative_error(gj, fd));
        }
        if trial % 10 == 0 {
            let examples = (0..5)
                .map(|_| random_example(&mut rng, d, model.base()))
                .collect();
            let s = Dataset::new(examples, d, Provenance::Manual)?;
            for j in 0..d {
                let h = h_at(j);
                let exact = coordinate_gradient(model, &w, &s, j)?;
                let fd = (empirical_risk(model, &shifted(j, h), &s)?
                    - empirical_risk(model, &shifted(j, -h), &s)?)
                    / (2.0 * h);
                worst = worst.max(relative_error(exact, fd));
            }
        }
    }
    Ok(worst)
}

/// Gradients at random `w` in the domain box against the estimated constants,
/// plus the norm ordering `G2 <= G1 <= sqrt(d) G2`. Relative violation.
fn constant_dominance(cfg: &PropertySuiteConfig, salt: u64, model: &LossModel) -> Result<f64> {
    let seed = derive_seed(cfg.seed, Purpose::Property, salt);
    let mut rng = Stream::new(seed, Purpose::Property);
    let d = cfg.max_dim;
    let generator = match model.base() {
        BaseLoss::LeastSquares => Generator::GaussianLinearRegression,
        _ => Generator::GaussianLogistic,
    };
    let mut s = make_synthetic(&SyntheticSpec::new(40, d, generator), seed)?;
    if model.base() == BaseLoss::SigmoidLeastSquares {
        let labels: Vec<f64> = s.labels().iter().map(|&y| (y + 1.0) / 2.0).collect();
        s = Dataset::from_parts(d, s.features().to_vec(), labels, Provenance::Manual)?;
    }
    let radius = 2.0;
    let c = estimate_constants(model, &s, Some(radius))?;
    let rel = |lhs: f64, rhs: f64| if rhs > 0.0 { (lhs - rhs) / rhs } else { lhs };
    let mut worst = rel(c.g2, c.g1).max(rel(c.g1, (d as f64).sqrt() * c.g2));
    for _ in 0..cfg.sample_trials {
        let w: Vec<f64> = (0..d).map(|_| rng.uniform(-radius, radius)).collect();
        let z = s.example(rng.index(s.len()));
        let g = loss_gradient(model, &w, &z)?;
        worst = worst
            .max(rel(norm_l1(&g), c.g1))
            .max(rel(norm_l2(&g), c.g2));
        let j = rng.index(d);
        worst = worst.max(rel(coordinate_gradient(model, &w, &s, j)?.abs(), c.g_tilde));
    }
    Ok(worst.max(0.0))
}

/// The per-step inequality of the coupled-pair argument,
/// `||w_{t+1} - w'_{t+1}|| <= ||w_t - w'_t|| + eta |grad_i F_{S'}(w_t) - grad_i F_S(w_t)|`,
/// along real paired RCD runs.
fn paired_step(cfg: &PropertySuiteConfig, salt: u64, d: usize) -> Result<(usize, f64)> {
    let seed = derive_seed(cfg.seed, Purpose::Property, salt);
    let model = LossModel::Logistic;
    let runs = (cfg.sample_trials / 100).max(1);
    let mut checks = 0;
    let mut worst = 0.0f64;
    for r in 0..runs {
        let run_seed = derive_seed(seed, Purpose::Replicate, r as u64);
        let spec = SyntheticSpec::new(20, d, Generator::GaussianLogistic).with_feature_scale(2.0);
        let s = make_synthetic(&spec, run_seed)?;
        let z = make_synthetic(
            &SyntheticSpec::new(1, d, Generator::GaussianLogistic).with_feature_scale(2.0),
            run_seed ^ 1,
        )?
        .example(0);
        let l_tilde = crate::losses::coordinate_smoothness(&model, &s);
        let eta = 1.0 / l_tilde;
        let config = RunConfig::new(100, StepSchedule::Constant { eta }, run_seed, d);
        let i = (run_seed % 20) as usize;
        let (a, b) = paired_trajectories(
            Algorithm::Rcd,
            &model,
            &s,
            i,
            &z,
            &config,
            &PairingPolicy::default(),
        )?;
        let neighbor = s.make_neighbor(i, &z)?;
        for t in 1..=config.iterations {
            let (wa, wb) = (&a.snapshots[t - 1].w, &b.snapshots[t - 1].w);
            let (na, nb) = (&a.snapshots[t].w, &b.snapshots[t].w);
            let j = a.draws[t - 1];
            let drift = (coordinate_gradient(&model, wa, &neighbor, j)?
                - coordinate_gradient(&model, wa, &s, j)?)
            .abs();
            let lhs = sq_dist(na, nb).sqrt();
            let rhs = sq_dist(wa, wb).sqrt() + eta * drift;
            worst = worst.max(lhs - rhs);
            checks += 1;
        }
    }
    Ok((checks, worst.max(0.0)))
}

fn models() -> Vec<(&'static str, LossModel)> {
    vec![
        ("least-squares", LossModel::LeastSquares),
        ("logistic", LossModel::Logistic),
        ("sigmoid-least-squares", LossModel::SigmoidLeastSquares),
        (
            "ridge-least-squares",
            LossModel::ridge(BaseLoss::LeastSquares, 0.1),
        ),
        ("ridge-logistic", LossModel::ridge(BaseLoss::Logistic, 0.1)),
    ]
}

/// Runs every check; rows come back in a fixed order.
pub fn run_property_suite(cfg: &PropertySuiteConfig) -> Result<Vec<PropertyRow>> {
    cfg.validate()?;
    let mut rows = Vec::new();
    let quad = |name: &str, scope: &str, salt: u64, check: OperatorCheck, expect: bool| {
        PropertyRow::new(
            name,
            scope,
            cfg.trials,
            operator_check(cfg, salt, check),
            OPERATOR_TOL,
            expect,
        )
    };
    rows.push(quad(
        "nonexpansive",
        "random convex quadratics, eta <= 2/L_tilde, single coordinate",
        1,
        OperatorCheck::Nonexpansive { separable: false },
        false,
    ));
    rows.push(quad(
        "strongly-convex-contraction",
        "random strongly convex quadratics, eta <= 1/L_tilde, single coordinate",
        2,
        OperatorCheck::Contraction { separable: false },
        false,
    ));
    rows.push(quad(
        "nonexpansive-separable",
        "random separable convex quadratics, eta <= 2/L_tilde",
        3,
        OperatorCheck::Nonexpansive { separable: true },
        false,
    ));
    rows.push(quad(
        "strongly-convex-contraction-separable",
        "random separable strongly convex quadratics, eta <= 1/L_tilde",
        4,
        OperatorCheck::Contraction { separable: true },
        false,
    ));
    rows.push(quad(
        "nonexpansive-in-expectation",
        "random convex quadratics, mean over coordinates, eta <= 2/lambda_max",
        5,
        OperatorCheck::ExpectedNonexpansive,
        false,
    ));
    rows.push(quad(
        "negative-control-oversized-step",
        "random separable convex quadratics, eta = 10/L_tilde",
        6,
        OperatorCheck::OversizedStep,
        true,
    ));
    for (k, (name, model)) in models().into_iter().enumerate() {
        let salt = 100 + 10 * k as u64;
        rows.push(PropertyRow::new(
            &format!("self-bounding/{name}"),
            "random (w, z), relative slack",
            cfg.sample_trials,
            self_bounding(cfg, salt, &model)?,
            SELF_BOUNDING_TOL,
            false,
        ));
        rows.push(PropertyRow::new(
            &format!("gradient-finite-difference/{name}"),
            "random (w, z) and random 5-example samples, central differences",
            cfg.sample_trials,
            finite_differences(cfg, salt + 1, &model)?,
            FD_TOL,
            false,
        ));
        rows.push(PropertyRow::new(
            &format!("constant-dominance/{name}"),
            "random w with ||w||_inf <= 2 on a 40-example sample",
            cfg.sample_trials,
            constant_dominance(cfg, salt + 2, &model)?,
            1e-12,
            false,
        ));
    }
    for (name, d, salt) in [
        ("paired-step/d=1", 1usize, 200u64),
        ("paired-step/d=5", 5, 201),
    ] {
        let (checks, worst) = paired_step(cfg, salt, d)?;
        rows.push(PropertyRow::new(
            name,
            "coupled logistic RCD pairs, eta = 1/L_tilde",
            checks,
            worst,
            OPERATOR_TOL,
            false,
        ));
    }
    Ok(rows)
}
