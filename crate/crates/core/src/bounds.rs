//! Closed-form stability, optimization and generalization bounds for RCD, and
//! early-stopping horizons.
//!
//! Every curve stores `values[t]` for `t = 0..=T`. For the stability curves,
//! `sc-contraction` and the excess-risk curves, index `t` means "after `t`
//! updates", i.e. it bounds a quantity at `w_{t+1}` (`iterate_offset = 1`).
//! `convex-average` bounds `F_S(w_t)` directly (`iterate_offset = 0`) and is
//! infinite at `t = 0`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::losses::LossConstants;
use crate::numeric::CompensatedSum;
use crate::optim::StepSchedule;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StabilityRegime {
    ConvexL1,
    ConvexL2,
    StronglyConvex,
    Nonconvex,
    Uniform,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OptimizationKind {
    ConvexAverage,
    ScContraction,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EstimationKind {
    Lipschitz,
    Smooth,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExcessRegime {
    ConvexLipschitz,
    StronglyConvex,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RecipeRegime {
    ConvexLipschitz,
    ConvexSmooth,
    ConvexLownoise,
    StronglyConvex,
    HighProbability,
}

/// Tag of a [`BoundCurve`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "family", content = "regime", rename_all = "kebab-case")]
pub enum CurveKind {
    Stability(StabilityRegime),
    Optimization(OptimizationKind),
    Excess(ExcessRegime),
}

impl CurveKind {
    pub fn name(&self) -> &'static str {
        match self {
            CurveKind::Stability(r) => match r {
                StabilityRegime::ConvexL1 => "convex-l1",
                StabilityRegime::ConvexL2 => "convex-l2",
                StabilityRegime::StronglyConvex => "strongly-convex",
                StabilityRegime::Nonconvex => "nonconvex",
                StabilityRegime::Uniform => "uniform",
            },
            CurveKind::Optimization(k) => match k {
                OptimizationKind::ConvexAverage => "convex-average",
                OptimizationKind::ScContraction => "sc-contraction",
            },
            CurveKind::Excess(r) => match r {
                ExcessRegime::ConvexLipschitz => "excess-convex-lipschitz",
                ExcessRegime::StronglyConvex => "excess-strongly-convex",
            },
        }
    }
}

/// The `p` of the squared-distance recursion `(a + b)^2 <= (1+p) a^2 + (1+1/p) b^2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "policy", content = "value", rename_all = "kebab-case")]
pub enum PPolicy {
    Fixed(f64),
    /// `p = 1/t` at each evaluation point `t`; costs `O(T^2)`.
    OneOverT,
}

impl Default for PPolicy {
    fn default() -> Self {
        PPolicy::Fixed(1.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundParams {
    pub constants: LossConstants,
    pub n: usize,
    pub d: usize,
    pub schedule: StepSchedule,
    /// Horizon `T`.
    pub horizon: usize,
    pub gamma: f64,
    pub p: PPolicy,
    pub delta: f64,
    /// `E[F_S(w_j) + F_{S'}(w_j)]` for `j = 1..=T`.
    pub risk_trace: Option<Vec<f64>>,
    /// `||w_1 - w||_2` for the comparator `w`.
    pub w1_distance: Option<f64>,
    /// Risk at `w_1` (`F_S(w_1)` for optimization bounds, `F(w_1)` for excess-risk bounds).
    pub f_w1: Option<f64>,
    /// `E[F_S(w_1) - F_S(w_S)]` for the contraction bound.
    pub initial_gap: Option<f64>,
    pub c: f64,
}

impl BoundParams {
    pub fn new(
        constants: LossConstants,
        n: usize,
        d: usize,
        schedule: StepSchedule,
        horizon: usize,
    ) -> Self {
        Self {
            constants,
            n,
            d,
            schedule,
            horizon,
            gamma: 1.0,
            p: PPolicy::default(),
            delta: 0.05,
            risk_trace: None,
            w1_distance: None,
            f_w1: None,
            initial_gap: None,
            c: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.d == 0 {
            return Err(Error::invalid("n, d", "must be at least 1"));
        }
        if self.horizon == 0 {
            return Err(Error::invalid("T", "must be at least 1"));
        }
        if self.gamma.is_nan() || self.gamma <= 0.0 {
            return Err(Error::invalid("gamma", "must be positive"));
        }
        if let PPolicy::Fixed(p) = self.p {
            if p.is_nan() || p <= 0.0 {
                return Err(Error::invalid("p", "must be positive"));
            }
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::invalid("delta", "must lie in (0, 1)"));
        }
        if self.c.is_nan() || self.c <= 0.0 {
            return Err(Error::invalid("c", "must be positive"));
        }
        self.schedule.validate()
    }

    fn nf(&self) -> f64 {
        self.n as f64
    }

    fn df(&self) -> f64 {
        self.d as f64
    }

    /// `sum_{t=1}^T eta_t^2`.
    fn sum_sq_eta(&self) -> f64 {
        let mut s = CompensatedSum::new();
        for t in 1..=self.horizon {
            let e = self.schedule.eta(t);
            s.add(e * e);
        }
        s.value()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidityFlag {
    pub name: String,
    pub satisfied: bool,
    /// Left- and right-hand sides of the checked inequality.
    pub lhs: f64,
    pub rhs: f64,
}

impl ValidityFlag {
    fn le(name: &str, lhs: f64, rhs: f64) -> Self {
        Self {
            name: name.to_string(),
            satisfied: lhs <= rhs,
            lhs,
            rhs,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundCurve {
    pub kind: CurveKind,
    /// `values[t]` refers to iterate `w_{t + iterate_offset}`.
    pub iterate_offset: usize,
    pub values: Vec<f64>,
    pub constants: LossConstants,
    pub flags: Vec<ValidityFlag>,
}

impl BoundCurve {
    pub fn is_valid(&self) -> bool {
        self.flags.iter().all(|f| f.satisfied)
    }

    /// Bound on the quantity at iterate `w_tau`, if `tau` is in range.
    pub fn at_iterate(&self, tau: usize) -> Option<f64> {
        tau.checked_sub(self.iterate_offset)
            .and_then(|t| self.values.get(t).copied())
    }
}

fn step_cap(params: &BoundParams, factor: f64) -> ValidityFlag {
    let l_tilde = params.constants.l_tilde;
    let name = if factor == 2.0 {
        "eta <= 2/L_tilde"
    } else {
        "eta <= 1/L_tilde"
    };
    ValidityFlag::le(name, params.schedule.max_eta() * l_tilde, factor)
}

/// Running sums `sum_{k<=t} eta_k` for `t = 0..=T`.
fn eta_prefix(params: &BoundParams) -> Vec<f64> {
    let mut out = Vec::with_capacity(params.horizon + 1);
    let mut s = CompensatedSum::new();
    out.push(0.0);
    for t in 1..=params.horizon {
        s.add(params.schedule.eta(t));
        out.push(s.value());
    }
    out
}

fn require_sigma(params: &BoundParams) -> Result<f64> {
    let sigma = params.constants.sigma;
    if sigma > 0.0 {
        Ok(sigma)
    } else {
        Err(Error::invalid(
            "sigma",
            "strongly convex regime needs sigma > 0",
        ))
    }
}

/// Side conditions of the smooth (non-Lipschitz) generalization results, all
/// evaluated with `L = constants.l`:
///
/// * `(1+T)(1+gamma) L^2 e sum_t eta_t^2 <= n^2 d / 4`
/// * `(1+T)(L + n sqrt(d)/T) L e T eta^2 <= n^2 d / 4` (constant step)
/// * `(1+T) L^2 e T eta^2 <= n^2 d / 8` (constant step)
pub fn side_conditions(params: &BoundParams) -> Vec<ValidityFlag> {
    let t = params.horizon as f64;
    let l = params.constants.l;
    let e = std::f64::consts::E;
    let n2d = params.nf() * params.nf() * params.df();
    let mut out = vec![ValidityFlag::le(
        "(1+T)(1+gamma)L^2 e sum eta^2 <= n^2 d/4",
        (1.0 + t) * (1.0 + params.gamma) * l * l * e * params.sum_sq_eta(),
        n2d / 4.0,
    )];
    if let Some(eta) = params.schedule.constant() {
        out.push(ValidityFlag::le(
            "(1+T)(L+n sqrt(d)/T) L e T eta^2 <= n^2 d/4",
            (1.0 + t) * (l + params.nf() * params.df().sqrt() / t) * l * e * t * eta * eta,
            n2d / 4.0,
        ));
        out.push(ValidityFlag::le(
            "(1+T) L^2 e T eta^2 <= n^2 d/8",
            (1.0 + t) * l * l * e * t * eta * eta,
            n2d / 8.0,
        ));
    }
    out
}

/// Stability bound curves.
///
/// * `convex-l1`: `2 G1/(n d) sum_{k<=t} eta_k`
/// * `convex-l2`: `4 L (1+1/p)/(n^2 d) sum_{j<=t} (1+p)^{t-j} eta_j^2 r_j` with
///   `r_j` the risk trace and `L` the per-example smoothness
/// * `strongly-convex`: `4 G1/(n sigma)` for `t >= 1`
/// * `nonconvex`: `2 G1/(n d) sum_{j<=t} eta_j prod_{k=j+1}^t (1 + L_tilde eta_k / sqrt d)`
/// * `uniform`: `2 G2 G_tilde / n sum_{k<=t} eta_k`
pub fn stability_bound(regime: StabilityRegime, params: &BoundParams) -> Result<BoundCurve> {
    params.validate()?;
    let c = &params.constants;
    let (n, d) = (params.nf(), params.df());
    let horizon = params.horizon;
    let mut flags = Vec::new();
    let values = match regime {
        StabilityRegime::ConvexL1 => {
            flags.push(step_cap(params, 2.0));
            let scale = 2.0 * c.g1 / (n * d);
            eta_prefix(params).into_iter().map(|s| scale * s).collect()
        }
        StabilityRegime::Uniform => {
            flags.push(step_cap(params, 2.0));
            let scale = 2.0 * c.g2 * c.g_tilde / n;
            eta_prefix(params).into_iter().map(|s| scale * s).collect()
        }
        StabilityRegime::StronglyConvex => {
            let sigma = require_sigma(params)?;
            flags.push(step_cap(params, 1.0));
            let level = 4.0 * c.g1 / (n * sigma);
            let mut v = vec![level; horizon + 1];
            v[0] = 0.0;
            v
        }
        StabilityRegime::Nonconvex => {
            let scale = 2.0 * c.g1 / (n * d);
            let mut acc = CompensatedSum::new();
            let mut v = Vec::with_capacity(horizon + 1);
            v.push(0.0);
            for t in 1..=horizon {
                let eta = params.schedule.eta(t);
                let growth = c.l_tilde * eta / d.sqrt();
                if growth != 0.0 {
                    // B_t = (1 + a_t) B_{t-1} + eta_t
                    let b = acc.value() * (1.0 + growth);
                    acc = CompensatedSum::new();
                    acc.add(b);
                }
                acc.add(eta);
                v.push(scale * acc.value());
            }
            v
        }
        StabilityRegime::ConvexL2 => {
            flags.push(step_cap(params, 2.0));
            flags.extend(side_conditions(params).into_iter().take(1));
            let trace = params
                .risk_trace
                .as_ref()
                .ok_or(Error::MissingInput("risk_trace"))?;
            if trace.len() < horizon {
                return Err(Error::DimensionMismatch {
                    expected: horizon,
                    actual: trace.len(),
                });
            }
            let l = c.example_smoothness;
            let weight = |j: usize| {
                let e = params.schedule.eta(j);
                e * e * trace[j - 1]
            };
            let mut v = Vec::with_capacity(horizon + 1);
            v.push(0.0);
            match params.p {
                PPolicy::Fixed(p) => {
                    // A_t = (1+p) A_{t-1} + eta_t^2 r_t
                    let mut a = 0.0;
                    for t in 1..=horizon {
                        a = (1.0 + p) * a + weight(t);
                        v.push(4.0 * l * (1.0 + 1.0 / p) / (n * n * d) * a);
                    }
                }
                PPolicy::OneOverT => {
                    let w: Vec<f64> = (1..=horizon).map(weight).collect();
                    for t in 1..=horizon {
                        let p = 1.0 / t as f64;
                        let ln_growth = p.ln_1p();
                        let mut s = CompensatedSum::new();
                        for j in 1..=t {
                            s.add(((t - j) as f64 * ln_growth).exp() * w[j - 1]);
                        }
                        v.push(4.0 * l * (1.0 + 1.0 / p) / (n * n * d) * s.value());
                    }
                }
            }
            v
        }
    };
    if values.iter().any(|v: &f64| v.is_nan()) {
        return Err(Error::NonFinite("stability bound"));
    }
    Ok(BoundCurve {
        kind: CurveKind::Stability(regime),
        iterate_offset: 1,
        values,
        constants: *c,
        flags,
    })
}

/// Optimization-error bound curves.
///
/// * `convex-average`: `d / (2 sum_{j<=t} eta_j) (||w_1 - w||^2 + 2 eta_1 F_S(w_1))`
///   bounding `E F_S(w_t) - F_S(w)`
/// * `sc-contraction`: `gap prod_{k<=t} (1 - eta_k sigma / d)` bounding
///   `E F_S(w_{t+1}) - F_S(w_S)`
pub fn optimization_bound(kind: OptimizationKind, params: &BoundParams) -> Result<BoundCurve> {
    params.validate()?;
    let d = params.df();
    let horizon = params.horizon;
    let mut flags = Vec::new();
    let (values, offset) = match kind {
        OptimizationKind::ConvexAverage => {
            flags.push(step_cap(params, 2.0));
            let dist = params
                .w1_distance
                .ok_or(Error::MissingInput("w1_distance"))?;
            let f1 = params.f_w1.ok_or(Error::MissingInput("f_w1"))?;
            let numerator = dist * dist + 2.0 * params.schedule.eta(1) * f1;
            let v = eta_prefix(params)
                .into_iter()
                .map(|s| {
                    if s == 0.0 {
                        f64::INFINITY
                    } else {
                        d / (2.0 * s) * numerator
                    }
                })
                .collect();
            (v, 0)
        }
        OptimizationKind::ScContraction => {
            let sigma = require_sigma(params)?;
            flags.push(step_cap(params, 1.0));
            let gap = params
                .initial_gap
                .ok_or(Error::MissingInput("initial_gap"))?;
            let mut v = Vec::with_capacity(horizon + 1);
            let mut cur = gap;
            v.push(cur);
            for t in 1..=horizon {
                cur *= 1.0 - params.schedule.eta(t) * sigma / d;
                v.push(cur);
            }
            (v, 1)
        }
    };
    Ok(BoundCurve {
        kind: CurveKind::Optimization(kind),
        iterate_offset: offset,
        values,
        constants: params.constants,
        flags,
    })
}

/// Input to [`estimation_bound_from_stability`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StabilityInput {
    /// Mean distance (lipschitz) or mean squared distance (smooth).
    pub epsilon: f64,
    /// `E[F_S(A(S))]`, used by the smooth form.
    pub mean_risk: f64,
}

/// Estimation-error bound from an argument-stability estimate.
///
/// * `lipschitz`: `G2 epsilon`
/// * `smooth`: `E F_S / gamma + L (1 + gamma) / 2 epsilon_2^2`
pub fn estimation_bound_from_stability(
    kind: EstimationKind,
    input: StabilityInput,
    params: &BoundParams,
) -> Result<f64> {
    if params.gamma.is_nan() || params.gamma <= 0.0 {
        return Err(Error::invalid("gamma", "must be positive"));
    }
    let c = &params.constants;
    Ok(match kind {
        EstimationKind::Lipschitz => c.g2 * input.epsilon,
        EstimationKind::Smooth => {
            input.mean_risk / params.gamma + c.l * (1.0 + params.gamma) / 2.0 * input.epsilon
        }
    })
}

/// Excess generalization bounds as a function of the horizon `T = 0..=horizon`
/// (constant step `eta` only).
///
/// * `convex-lipschitz`: `2 G1 G2 T eta/(n d) + d ||w_1 - w*||^2/(2 T eta) + d F(w_1)/T`
/// * `strongly-convex`: `4 G1 G2/(n sigma) + (1 - eta sigma/d)^T F(w_1)`
pub fn excess_generalization_bound(
    regime: ExcessRegime,
    params: &BoundParams,
) -> Result<BoundCurve> {
    params.validate()?;
    let eta = params
        .schedule
        .constant()
        .ok_or_else(|| Error::invalid("schedule", "excess-risk bounds need a constant step"))?;
    let c = &params.constants;
    let (n, d) = (params.nf(), params.df());
    let f1 = params.f_w1.ok_or(Error::MissingInput("f_w1"))?;
    let mut flags = Vec::new();
    let values: Vec<f64> = match regime {
        ExcessRegime::ConvexLipschitz => {
            flags.push(step_cap(params, 2.0));
            let dist = params
                .w1_distance
                .ok_or(Error::MissingInput("w1_distance"))?;
            (0..=params.horizon)
                .map(|t| {
                    if t == 0 {
                        return f64::INFINITY;
                    }
                    let tf = t as f64;
                    2.0 * c.g1 * c.g2 * tf * eta / (n * d)
                        + d * dist * dist / (2.0 * tf * eta)
                        + d * f1 / tf
                })
                .collect()
        }
        ExcessRegime::StronglyConvex => {
            let sigma = require_sigma(params)?;
            flags.push(step_cap(params, 1.0));
            let floor = 4.0 * c.g1 * c.g2 / (n * sigma);
            let rho = 1.0 - eta * sigma / d;
            let mut v = Vec::with_capacity(params.horizon + 1);
            let mut geo = 1.0;
            for _ in 0..=params.horizon {
                v.push(floor + geo * f1);
                geo *= rho;
            }
            v
        }
    };
    Ok(BoundCurve {
        kind: CurveKind::Excess(regime),
        iterate_offset: 1,
        values,
        constants: *c,
        flags,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RecipeParams {
    pub n: usize,
    pub d: usize,
    pub sigma: Option<f64>,
    pub delta: Option<f64>,
    pub c: f64,
    /// `F(w_1)` for the strongly convex recipe; 1 if absent.
    pub f_w1: Option<f64>,
}

impl RecipeParams {
    pub fn new(n: usize, d: usize) -> Self {
        Self {
            n,
            d,
            sigma: None,
            delta: None,
            c: 1.0,
            f_w1: None,
        }
    }
}

/// Early-stopping horizon `max(1, ceil(c * recipe))`.
///
/// * `convex-lipschitz`: `d sqrt(n)`
/// * `convex-smooth`: `sqrt(n) d^{3/4}`
/// * `convex-lownoise`: `n sqrt(d)`
/// * `strongly-convex`: `(d/sigma) ln(F(w_1) n sigma)`, the smallest horizon with
///   `exp(-T eta sigma/d) F(w_1) <= 1/(n sigma)` at `eta ~ 1`; it is 1 whenever
///   `F(w_1) n sigma <= 1`, where the initial risk already meets the target
/// * `high-probability`: `n^{2/3} d^{1/3} (ln n)^{-2/3} (ln 1/delta)^{-1/3}`, with
///   `ln n` floored at 1 so tiny `n` stays finite
pub fn early_stop_t(regime: RecipeRegime, p: &RecipeParams) -> Result<usize> {
    if p.n == 0 || p.d == 0 {
        return Err(Error::invalid("n, d", "must be at least 1"));
    }
    if !(p.c > 0.0 && p.c.is_finite()) {
        return Err(Error::invalid("c", "must be finite and positive"));
    }
    let (n, d) = (p.n as f64, p.d as f64);
    let raw = match regime {
        RecipeRegime::ConvexLipschitz => d * n.sqrt(),
        RecipeRegime::ConvexSmooth => n.sqrt() * d.powf(0.75),
        RecipeRegime::ConvexLownoise => n * d.sqrt(),
        RecipeRegime::StronglyConvex => {
            let sigma = match p.sigma {
                Some(s) if s > 0.0 => s,
                _ => {
                    return Err(Error::invalid(
                        "sigma",
                        "strongly convex recipe needs sigma > 0",
                    ))
                }
            };
            let f1 = p.f_w1.unwrap_or(1.0);
            let arg = f1 * n * sigma;
            if arg <= 1.0 {
                return Ok(1);
            }
            d / sigma * arg.ln()
        }
        RecipeRegime::HighProbability => {
            let delta = match p.delta {
                Some(x) if x > 0.0 && x < 1.0 => x,
                _ => return Err(Error::invalid("delta", "must lie in (0, 1)")),
            };
            let ln_n = n.ln().max(1.0);
            n.powf(2.0 / 3.0)
                * d.cbrt()
                * ln_n.powf(-2.0 / 3.0)
                * (1.0 / delta).ln().powf(-1.0 / 3.0)
        }
    };
    let t = (p.c * raw).ceil();
    if !t.is_finite() {
        return Err(Error::NonFinite("early stopping horizon"));
    }
    Ok((t as usize).max(1))
}
