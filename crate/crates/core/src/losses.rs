//! Linear-model losses `f(w; z) = phi(<w, x>, y) [+ (lambda/2) ||w||^2]` and the
//! data-dependent constants the bounds are stated in.

use serde::{Deserialize, Serialize};

use crate::data::{Dataset, Example};
use crate::error::{Error, Result};
use crate::numeric::{dot, norm_l1, norm_l2, power_iteration};

const POWER_TOL: f64 = 1e-8;
const POWER_MAX_ITER: usize = 10_000;

/// `sup |phi''|` for `phi(m, y) = (s(m) - y)^2` with `y` in `[0, 1]`:
/// `2 (sup s'^2 + sup |s''|) = 2 (1/16 + 1/(6 sqrt 3))`.
pub const SIGMOID_LS_CURVATURE: f64 = 2.0 * (1.0 / 16.0 + 1.0 / (6.0 * 1.732_050_807_568_877_2));
/// `sup |phi'| = 2 * 1 * 1/4`.
pub const SIGMOID_LS_SLOPE: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BaseLoss {
    LeastSquares,
    Logistic,
    SigmoidLeastSquares,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", try_from = "RawLossModel")]
pub enum LossModel {
    LeastSquares,
    Logistic,
    SigmoidLeastSquares,
    Ridge { base: BaseLoss, lambda: f64 },
}

// Internally tagged unit variants silently accept stray keys, so configs are
// read through this flat form instead.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLossModel {
    kind: RawKind,
    base: Option<BaseLoss>,
    lambda: Option<f64>,
}

#[derive(Deserialize)]
#[serde(rename_all = "kebab-case")]
enum RawKind {
    LeastSquares,
    Logistic,
    SigmoidLeastSquares,
    Ridge,
}

impl TryFrom<RawLossModel> for LossModel {
    type Error = String;

    fn try_from(raw: RawLossModel) -> std::result::Result<Self, String> {
        let plain = |m: LossModel| {
            if raw.base.is_some() || raw.lambda.is_some() {
                Err("`base` and `lambda` are only valid for kind \"ridge\"".to_string())
            } else {
                Ok(m)
            }
        };
        match raw.kind {
            RawKind::LeastSquares => plain(LossModel::LeastSquares),
            RawKind::Logistic => plain(LossModel::Logistic),
            RawKind::SigmoidLeastSquares => plain(LossModel::SigmoidLeastSquares),
            RawKind::Ridge => match (raw.base, raw.lambda) {
                (Some(base), Some(lambda)) => Ok(LossModel::Ridge { base, lambda }),
                (None, _) => Err("missing field `base`".into()),
                (_, None) => Err("missing field `lambda`".into()),
            },
        }
    }
}

fn sigmoid(m: f64) -> f64 {
    if m >= 0.0 {
        1.0 / (1.0 + (-m).exp())
    } else {
        let e = m.exp();
        e / (1.0 + e)
    }
}

/// `log(1 + e^z)` without overflow.
fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

impl BaseLoss {
    #[inline]
    pub fn value(self, m: f64, y: f64) -> f64 {
        match self {
            BaseLoss::LeastSquares => 0.5 * (m - y) * (m - y),
            BaseLoss::Logistic => softplus(-y * m),
            BaseLoss::SigmoidLeastSquares => {
                let r = sigmoid(m) - y;
                r * r
            }
        }
    }

    /// `d phi / d m`.
    #[inline]
    pub fn slope(self, m: f64, y: f64) -> f64 {
        match self {
            BaseLoss::LeastSquares => m - y,
            BaseLoss::Logistic => -y * sigmoid(-y * m),
            BaseLoss::SigmoidLeastSquares => {
                let s = sigmoid(m);
                2.0 * (s - y) * s * (1.0 - s)
            }
        }
    }

    /// Global bound on `|phi''|`.
    pub fn curvature_bound(self) -> f64 {
        match self {
            BaseLoss::LeastSquares => 1.0,
            BaseLoss::Logistic => 0.25,
            BaseLoss::SigmoidLeastSquares => SIGMOID_LS_CURVATURE,
        }
    }

    fn check_label(self, index: usize, y: f64) -> Result<()> {
        let ok = match self {
            BaseLoss::LeastSquares => true,
            BaseLoss::Logistic => y == 1.0 || y == -1.0,
            BaseLoss::SigmoidLeastSquares => (0.0..=1.0).contains(&y),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidLabel {
                index,
                label: y,
                requirement: match self {
                    BaseLoss::Logistic => "logistic loss needs labels in {-1, +1}",
                    _ => "sigmoid least squares needs labels in [0, 1]",
                },
            })
        }
    }
}

impl LossModel {
    pub fn ridge(base: BaseLoss, lambda: f64) -> Self {
        LossModel::Ridge { base, lambda }
    }

    pub fn base(&self) -> BaseLoss {
        match *self {
            LossModel::LeastSquares => BaseLoss::LeastSquares,
            LossModel::Logistic => BaseLoss::Logistic,
            LossModel::SigmoidLeastSquares => BaseLoss::SigmoidLeastSquares,
            LossModel::Ridge { base, .. } => base,
        }
    }

    /// Ridge weight; 0 for unregularized models.
    pub fn lambda(&self) -> f64 {
        match *self {
            LossModel::Ridge { lambda, .. } => lambda,
            _ => 0.0,
        }
    }

    pub fn is_convex(&self) -> bool {
        self.base() != BaseLoss::SigmoidLeastSquares
    }

    pub fn validate(&self) -> Result<()> {
        if let LossModel::Ridge { lambda, .. } = *self {
            if !(lambda > 0.0 && lambda.is_finite()) {
                return Err(Error::invalid("lambda", "ridge needs a finite lambda > 0"));
            }
        }
        Ok(())
    }

    /// Validates the model and that every label of `s` is admissible.
    pub fn check_dataset(&self, s: &Dataset) -> Result<()> {
        self.validate()?;
        let base = self.base();
        for (i, &y) in s.labels().iter().enumerate() {
            base.check_label(i, y)?;
        }
        Ok(())
    }

    /// Unchecked per-example value.
    #[inline]
    pub(crate) fn value_unchecked(&self, w: &[f64], x: &[f64], y: f64) -> f64 {
        let v = self.base().value(dot(w, x), y);
        match *self {
            LossModel::Ridge { lambda, .. } => v + 0.5 * lambda * dot(w, w),
            _ => v,
        }
    }

    /// Unchecked per-example gradient, written into `out`.
    pub(crate) fn gradient_into(&self, w: &[f64], x: &[f64], y: f64, out: &mut [f64]) {
        let g = self.base().slope(dot(w, x), y);
        let lambda = self.lambda();
        for ((o, xj), wj) in out.iter_mut().zip(x).zip(w) {
            *o = g * xj + lambda * wj;
        }
    }

    /// Mean of the base loss over `s` plus the ridge term, accumulated in index order.
    pub(crate) fn risk_unchecked(&self, w: &[f64], s: &Dataset) -> f64 {
        let base = self.base();
        let mut sum = 0.0;
        for (x, y) in s.iter() {
            sum += base.value(dot(w, x), y);
        }
        let mean = sum / s.len() as f64;
        match *self {
            LossModel::Ridge { lambda, .. } => mean + 0.5 * lambda * dot(w, w),
            _ => mean,
        }
    }

    /// `grad_j F_S(w)` given the margins `<w, x_i>`.
    #[inline]
    pub(crate) fn coordinate_gradient_from_margins(
        &self,
        s: &Dataset,
        margins: &[f64],
        w_j: f64,
        j: usize,
    ) -> f64 {
        let base = self.base();
        let d = s.dim();
        let features = s.features();
        let mut sum = 0.0;
        for (i, (&m, &y)) in margins.iter().zip(s.labels()).enumerate() {
            sum += base.slope(m, y) * features[i * d + j];
        }
        sum / s.len() as f64 + self.lambda() * w_j
    }
}

/// `<w, x_i>` for every example.
pub(crate) fn margins(w: &[f64], s: &Dataset) -> Vec<f64> {
    s.iter().map(|(x, _)| dot(w, x)).collect()
}

fn check_dim(w: &[f64], d: usize) -> Result<()> {
    if w.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            actual: w.len(),
        });
    }
    Ok(())
}

fn finite(v: f64, what: &'static str) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFinite(what))
    }
}

pub fn loss_value(model: &LossModel, w: &[f64], z: &Example) -> Result<f64> {
    model.validate()?;
    check_dim(w, z.dim())?;
    model.base().check_label(0, z.label)?;
    finite(model.value_unchecked(w, &z.features, z.label), "loss value")
}

pub fn loss_gradient(model: &LossModel, w: &[f64], z: &Example) -> Result<Vec<f64>> {
    model.validate()?;
    check_dim(w, z.dim())?;
    model.base().check_label(0, z.label)?;
    let mut g = vec![0.0; w.len()];
    model.gradient_into(w, &z.features, z.label, &mut g);
    if g.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("loss gradient"));
    }
    Ok(g)
}

/// `F_S(w)`.
pub fn empirical_risk(model: &LossModel, w: &[f64], s: &Dataset) -> Result<f64> {
    model.check_dataset(s)?;
    check_dim(w, s.dim())?;
    finite(model.risk_unchecked(w, s), "empirical risk")
}

/// `grad F_S(w)`: the mean of the per-example gradients.
pub fn risk_gradient(model: &LossModel, w: &[f64], s: &Dataset) -> Result<Vec<f64>> {
    model.check_dataset(s)?;
    check_dim(w, s.dim())?;
    let base = model.base();
    let mut g = vec![0.0; w.len()];
    for (x, y) in s.iter() {
        let slope = base.slope(dot(w, x), y);
        for (gj, xj) in g.iter_mut().zip(x) {
            *gj += slope * xj;
        }
    }
    let n = s.len() as f64;
    let lambda = model.lambda();
    for (gj, wj) in g.iter_mut().zip(w) {
        *gj = *gj / n + lambda * wj;
    }
    if g.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("risk gradient"));
    }
    Ok(g)
}

/// `grad_j F_S(w)` with a 0-based coordinate `j`.
pub fn coordinate_gradient(model: &LossModel, w: &[f64], s: &Dataset, j: usize) -> Result<f64> {
    model.check_dataset(s)?;
    check_dim(w, s.dim())?;
    if j >= s.dim() {
        return Err(Error::IndexOutOfRange {
            index: j,
            len: s.dim(),
        });
    }
    let m = margins(w, s);
    finite(
        model.coordinate_gradient_from_margins(s, &m, w[j], j),
        "coordinate gradient",
    )
}

/// Constants of the smoothness, Lipschitz and strong-convexity assumptions,
/// evaluated on a dataset.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossConstants {
    /// `sup ||grad f(w; z)||_1`.
    #[serde(rename = "G1")]
    pub g1: f64,
    /// `sup ||grad f(w; z)||_2`.
    #[serde(rename = "G2")]
    pub g2: f64,
    /// Smoothness of `F_S`: `kappa * lambda_max(X^T X / n) + lambda`.
    #[serde(rename = "L")]
    pub l: f64,
    /// Coordinate-wise smoothness of `F_S`: `kappa * max_j mean_i x_ij^2 + lambda`.
    #[serde(rename = "L_tilde")]
    pub l_tilde: f64,
    pub sigma: f64,
    /// `sup |grad_j F_S(w)|`.
    #[serde(rename = "G_tilde")]
    pub g_tilde: f64,
    /// `max_i kappa ||x_i||_2^2 + lambda`: smoothness of the individual losses.
    pub example_smoothness: f64,
    /// The `||w||_inf <= R` box the gradient bounds hold on, when one was needed.
    pub domain_radius: Option<f64>,
}

/// Data-dependent constants for `model` on `s`.
///
/// With `kappa = sup |phi''|` and `a_i` a bound on `|phi'(<w, x_i>, y_i)|`:
/// `G1 = max_i a_i ||x_i||_1`, `G2 = max_i a_i ||x_i||_2`,
/// `G_tilde = max_j mean_i a_i |x_ij|`. For logistic `a_i = 1`, for sigmoid
/// least squares `a_i = 1/2`, and for least squares `a_i = R ||x_i||_1 + |y_i|`
/// on the box `||w||_inf <= R`. Ridge adds `lambda R d`, `lambda R sqrt(d)` and
/// `lambda R` to the three gradient bounds, so it always needs `R`.
pub fn estimate_constants(
    model: &LossModel,
    s: &Dataset,
    domain_radius: Option<f64>,
) -> Result<LossConstants> {
    model.check_dataset(s)?;
    if let Some(r) = domain_radius {
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::invalid(
                "domain_radius",
                "must be finite and positive",
            ));
        }
    }
    let base = model.base();
    let lambda = model.lambda();
    let n = s.len();
    let d = s.dim();
    let nf = n as f64;

    let needs_radius = base == BaseLoss::LeastSquares || lambda > 0.0;
    let radius = match (needs_radius, domain_radius) {
        (true, None) => return Err(Error::MissingDomainRadius { constant: "G1" }),
        (_, r) => r,
    };

    let slope_bound = |x: &[f64], y: f64| -> f64 {
        match base {
            BaseLoss::LeastSquares => radius.unwrap_or(0.0) * norm_l1(x) + y.abs(),
            BaseLoss::Logistic => 1.0,
            BaseLoss::SigmoidLeastSquares => SIGMOID_LS_SLOPE,
        }
    };

    let mut g1 = 0.0f64;
    let mut g2 = 0.0f64;
    let mut max_sq_norm = 0.0f64;
    let mut col_abs = vec![0.0; d];
    let mut col_sq = vec![0.0; d];
    let mut gram = vec![0.0; d * d];
    for (x, y) in s.iter() {
        let a = slope_bound(x, y);
        g1 = g1.max(a * norm_l1(x));
        g2 = g2.max(a * norm_l2(x));
        max_sq_norm = max_sq_norm.max(dot(x, x));
        for j in 0..d {
            col_abs[j] += a * x[j].abs();
            col_sq[j] += x[j] * x[j];
            let row = &mut gram[j * d..(j + 1) * d];
            for (g, xk) in row.iter_mut().zip(x) {
                *g += x[j] * xk;
            }
        }
    }
    for g in gram.iter_mut() {
        *g /= nf;
    }
    let g_tilde = col_abs.iter().fold(0.0f64, |m, c| m.max(c / nf));
    let max_col_sq = col_sq.iter().fold(0.0f64, |m, c| m.max(c / nf));
    // power iteration approaches lambda_max from below; the largest diagonal
    // entry is also a lower bound, so taking the max keeps L_tilde <= L
    let lambda_max = power_iteration(&gram, d, POWER_TOL, POWER_MAX_ITER).max(max_col_sq);

    let kappa = base.curvature_bound();
    let (mut g1, mut g2, mut g_tilde) = (g1, g2, g_tilde);
    if lambda > 0.0 {
        let r = radius.expect("ridge requires a radius");
        g1 += lambda * r * d as f64;
        g2 += lambda * r * (d as f64).sqrt();
        g_tilde += lambda * r;
    }
    let out = LossConstants {
        g1,
        g2,
        l: kappa * lambda_max + lambda,
        l_tilde: kappa * max_col_sq + lambda,
        sigma: lambda,
        g_tilde,
        example_smoothness: kappa * max_sq_norm + lambda,
        domain_radius: radius,
    };
    for v in [
        out.g1,
        out.g2,
        out.l,
        out.l_tilde,
        out.g_tilde,
        out.example_smoothness,
    ] {
        finite(v, "loss constants")?;
    }
    Ok(out)
}

/// `L` alone, without the gradient bounds (no domain radius needed).
pub fn smoothness(model: &LossModel, s: &Dataset) -> f64 {
    let d = s.dim();
    let mut gram = vec![0.0; d * d];
    for (x, _) in s.iter() {
        for j in 0..d {
            for (g, xk) in gram[j * d..(j + 1) * d].iter_mut().zip(x) {
                *g += x[j] * xk;
            }
        }
    }
    let n = s.len() as f64;
    gram.iter_mut().for_each(|g| *g /= n);
    let diag = (0..d).fold(0.0f64, |m, j| m.max(gram[j * d + j]));
    let lambda_max = power_iteration(&gram, d, POWER_TOL, POWER_MAX_ITER).max(diag);
    model.base().curvature_bound() * lambda_max + model.lambda()
}

/// `L_tilde` alone, without the gradient bounds (no domain radius needed).
pub fn coordinate_smoothness(model: &LossModel, s: &Dataset) -> f64 {
    let d = s.dim();
    let mut col_sq = vec![0.0; d];
    for (x, _) in s.iter() {
        for (c, xj) in col_sq.iter_mut().zip(x) {
            *c += xj * xj;
        }
    }
    let n = s.len() as f64;
    let max_col_sq = col_sq.iter().fold(0.0f64, |m, c| m.max(c / n));
    model.base().curvature_bound() * max_col_sq + model.lambda()
}

/// Smoothness of a single example's loss: `kappa ||x||_2^2 + lambda`.
pub fn per_example_smoothness(model: &LossModel, x: &[f64]) -> f64 {
    model.base().curvature_bound() * dot(x, x) + model.lambda()
}

/// Radius of the sublevel set `{w : F_S(w) <= F_S(w1)}` for ridge models:
/// `F_S(w) >= (lambda/2) ||w||^2` gives `||w||_inf <= sqrt(2 F_S(w1) / lambda)`.
///
/// Coordinate descent with steps at most `2 / L_tilde` never increases `F_S`,
/// so every iterate of such a run stays inside this box.
pub fn ridge_sublevel_radius(model: &LossModel, s: &Dataset, w1: &[f64]) -> Result<f64> {
    let lambda = model.lambda();
    if lambda <= 0.0 {
        return Err(Error::invalid(
            "model",
            "sublevel radius needs a ridge model",
        ));
    }
    let f = empirical_risk(model, w1, s)?;
    Ok((2.0 * f / lambda).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Provenance;

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

    #[test]
    fn least_squares_value_and_gradient() {
        let z = Example::new(vec![1.0, 2.0], 0.0);
        let m = LossModel::LeastSquares;
        assert_eq!(loss_value(&m, &[1.0, 1.0], &z).unwrap(), 4.5);
        assert_eq!(loss_gradient(&m, &[1.0, 1.0], &z).unwrap(), vec![3.0, 6.0]);
    }

    #[test]
    fn logistic_at_zero_is_ln2() {
        let m = LossModel::Logistic;
        for (x, y) in [(vec![3.0, -1.0], 1.0), (vec![0.2, 7.0], -1.0)] {
            let v = loss_value(&m, &[0.0, 0.0], &Example::new(x, y)).unwrap();
            assert_eq!(v, std::f64::consts::LN_2);
        }
    }

    #[test]
    fn logistic_saturates() {
        let m = LossModel::Logistic;
        let z = Example::new(vec![1.0, 1.0], 1.0);
        let g = loss_gradient(&m, &[400.0, 400.0], &z).unwrap();
        assert!(g.iter().all(|v| v.abs() < 1e-300));
        // and the far side stays finite
        let v = loss_value(&m, &[-400.0, -400.0], &z).unwrap();
        assert!((v - 800.0).abs() < 1e-9);
    }

    #[test]
    fn ridge_value() {
        let m = LossModel::ridge(BaseLoss::LeastSquares, 2.0);
        let v = loss_value(&m, &[1.0, 0.0], &Example::new(vec![0.0, 0.0], 0.0)).unwrap();
        assert_eq!(v, 1.0);
    }

    #[test]
    fn empirical_risk_examples() {
        let s = ds(&[(&[1.0], 1.0), (&[1.0], -1.0)]);
        assert_eq!(
            empirical_risk(&LossModel::LeastSquares, &[0.0], &s).unwrap(),
            0.5
        );
        let one = ds(&[(&[1.0, 2.0], 0.3)]);
        let w = [0.4, -0.2];
        for m in [
            LossModel::LeastSquares,
            LossModel::ridge(BaseLoss::LeastSquares, 0.7),
        ] {
            assert_eq!(
                empirical_risk(&m, &w, &one).unwrap(),
                loss_value(&m, &w, &one.example(0)).unwrap()
            );
        }
        let interp = ds(&[(&[1.0, 0.0], 2.0), (&[0.0, 1.0], -3.0)]);
        assert_eq!(
            empirical_risk(&LossModel::LeastSquares, &[2.0, -3.0], &interp).unwrap(),
            0.0
        );
    }

    #[test]
    fn coordinate_gradient_examples() {
        let s = ds(&[(&[1.0, 2.0], 0.0)]);
        let m = LossModel::LeastSquares;
        assert_eq!(coordinate_gradient(&m, &[1.0, 1.0], &s, 1).unwrap(), 6.0);
        assert!(matches!(
            coordinate_gradient(&m, &[1.0, 1.0], &s, 2),
            Err(Error::IndexOutOfRange { .. })
        ));
        let r = LossModel::ridge(BaseLoss::LeastSquares, 0.3);
        let w = [1.0, -2.5];
        for j in 0..2 {
            let diff = coordinate_gradient(&r, &w, &s, j).unwrap()
                - coordinate_gradient(&m, &w, &s, j).unwrap();
            assert!((diff - 0.3 * w[j]).abs() <= 1e-15 * (1.0 + diff.abs()));
        }
    }

    #[test]
    fn labels_are_checked() {
        let s = ds(&[(&[1.0], 0.0)]);
        assert!(matches!(
            empirical_risk(&LossModel::Logistic, &[0.0], &s),
            Err(Error::InvalidLabel { .. })
        ));
        let s = ds(&[(&[1.0], -1.0)]);
        assert!(empirical_risk(&LossModel::SigmoidLeastSquares, &[0.0], &s).is_err());
    }

    #[test]
    fn dimension_checked() {
        let z = Example::new(vec![1.0, 2.0], 0.0);
        assert!(matches!(
            loss_value(&LossModel::LeastSquares, &[1.0], &z),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn constants_examples() {
        let s = ds(&[(&[1.0, 2.0], 0.0)]);
        let c = estimate_constants(&LossModel::LeastSquares, &s, Some(1.0)).unwrap();
        assert_eq!(c.l_tilde, 4.0);
        let s = ds(&[(&[3.0, 4.0], 1.0)]);
        let c = estimate_constants(&LossModel::Logistic, &s, None).unwrap();
        assert_eq!(c.g2, 5.0);
        assert_eq!(c.g1, 7.0);
        let c =
            estimate_constants(&LossModel::ridge(BaseLoss::Logistic, 0.1), &s, Some(2.0)).unwrap();
        assert_eq!(c.sigma, 0.1);
    }

    #[test]
    fn missing_radius_names_constant() {
        let s = ds(&[(&[1.0, 2.0], 0.0)]);
        match estimate_constants(&LossModel::LeastSquares, &s, None) {
            Err(Error::MissingDomainRadius { constant }) => assert_eq!(constant, "G1"),
            other => panic!("{other:?}"),
        }
        assert!(estimate_constants(
            &LossModel::ridge(BaseLoss::Logistic, 0.1),
            &ds(&[(&[1.0], 1.0)]),
            None
        )
        .is_err());
    }

    #[test]
    fn lambda_must_be_positive() {
        let s = ds(&[(&[1.0], 1.0)]);
        assert!(empirical_risk(&LossModel::ridge(BaseLoss::Logistic, 0.0), &[0.0], &s).is_err());
    }

    #[test]
    fn sigmoid_envelopes_hold_on_a_grid() {
        let b = BaseLoss::SigmoidLeastSquares;
        let h = 1e-4;
        for k in -400..=400 {
            let m = k as f64 * 0.05;
            for y in [0.0, 0.3, 1.0] {
                assert!(b.slope(m, y).abs() <= SIGMOID_LS_SLOPE);
                let curv = (b.slope(m + h, y) - b.slope(m - h, y)) / (2.0 * h);
                assert!(curv.abs() <= SIGMOID_LS_CURVATURE);
            }
        }
    }

    #[test]
    fn serde_shape() {
        let m: LossModel =
            serde_json::from_str(r#"{"kind":"ridge","base":"logistic","lambda":0.1}"#).unwrap();
        assert_eq!(m, LossModel::ridge(BaseLoss::Logistic, 0.1));
        let m: LossModel = serde_json::from_str(r#"{"kind":"least-squares"}"#).unwrap();
        assert_eq!(m, LossModel::LeastSquares);
        assert!(serde_json::from_str::<LossModel>(r#"{"kind":"logistic","lambda":1}"#).is_err());
        assert!(serde_json::from_str::<LossModel>(r#"{"kind":"ridge","lambda":1}"#).is_err());
        assert!(serde_json::from_str::<LossModel>(r#"{"kind":"logistic","extra":1}"#).is_err());
        let back: LossModel = serde_json::from_str(
            &serde_json::to_string(&LossModel::ridge(BaseLoss::LeastSquares, 2.0)).unwrap(),
        )
        .unwrap();
        assert_eq!(back, LossModel::ridge(BaseLoss::LeastSquares, 2.0));
    }
}
