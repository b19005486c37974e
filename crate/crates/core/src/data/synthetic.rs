//! Gaussian synthetic populations.
//!
//! A [`Population`] fixes the hidden teacher vector; samples drawn from it with
//! different seeds are independent draws from the same distribution, which is
//! what neighboring-dataset experiments need.

use serde::{Deserialize, Serialize};

use super::{Dataset, Example, Provenance};
use crate::error::{Error, Result};
use crate::numeric::dot;
use crate::rng::{Purpose, Stream};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Generator {
    /// `y = <w°, x> + noise_scale * N(0, 1)`.
    GaussianLinearRegression,
    /// `y = +1` with probability `sigmoid(<w°, x> / noise_scale)`, else `-1`;
    /// `noise_scale = 0` gives `y = sign(<w°, x>)`.
    GaussianLogistic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticSpec {
    pub n: usize,
    pub d: usize,
    pub generator: Generator,
    #[serde(default = "default_noise")]
    pub noise_scale: f64,
    #[serde(default = "default_feature_scale")]
    pub feature_scale: f64,
}

fn default_noise() -> f64 {
    0.1
}

fn default_feature_scale() -> f64 {
    1.0
}

impl SyntheticSpec {
    pub fn new(n: usize, d: usize, generator: Generator) -> Self {
        Self {
            n,
            d,
            generator,
            noise_scale: default_noise(),
            feature_scale: default_feature_scale(),
        }
    }

    pub fn with_noise(mut self, noise_scale: f64) -> Self {
        self.noise_scale = noise_scale;
        self
    }

    pub fn with_feature_scale(mut self, feature_scale: f64) -> Self {
        self.feature_scale = feature_scale;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::invalid("n", "must be at least 1"));
        }
        if self.d == 0 {
            return Err(Error::invalid("d", "must be at least 1"));
        }
        if !(self.noise_scale >= 0.0 && self.noise_scale.is_finite()) {
            return Err(Error::invalid(
                "noise_scale",
                "must be finite and nonnegative",
            ));
        }
        if !(self.feature_scale > 0.0 && self.feature_scale.is_finite()) {
            return Err(Error::invalid(
                "feature_scale",
                "must be finite and positive",
            ));
        }
        Ok(())
    }
}

/// A synthetic distribution: features `x ~ feature_scale * N(0, I_d)` and a
/// fixed teacher `w°`.
///
/// Teacher entries are `N(0, 1/d)`; for the logistic generator they are further
/// divided by `feature_scale` so the logit `<w°, x>` stays roughly standard
/// normal whatever the feature scale.
#[derive(Debug, Clone, PartialEq)]
pub struct Population {
    spec: SyntheticSpec,
    teacher: Vec<f64>,
    seed: u64,
}

impl Population {
    pub fn new(spec: SyntheticSpec, seed: u64) -> Result<Self> {
        spec.validate()?;
        let mut rng = Stream::new(seed, Purpose::Teacher);
        let sd = match spec.generator {
            Generator::GaussianLinearRegression => 1.0 / (spec.d as f64).sqrt(),
            Generator::GaussianLogistic => 1.0 / ((spec.d as f64).sqrt() * spec.feature_scale),
        };
        let teacher = (0..spec.d).map(|_| sd * rng.normal()).collect();
        Ok(Self {
            spec,
            teacher,
            seed,
        })
    }

    pub fn spec(&self) -> &SyntheticSpec {
        &self.spec
    }

    pub fn teacher(&self) -> &[f64] {
        &self.teacher
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// One example; consumes `d` normals from `features` and one draw from `noise`.
    pub fn draw(&self, features: &mut Stream, noise: &mut Stream) -> Example {
        let x: Vec<f64> = (0..self.spec.d)
            .map(|_| self.spec.feature_scale * features.normal())
            .collect();
        let signal = dot(&self.teacher, &x);
        let y = match self.spec.generator {
            Generator::GaussianLinearRegression => {
                let eps = noise.normal();
                if self.spec.noise_scale == 0.0 {
                    signal
                } else {
                    signal + self.spec.noise_scale * eps
                }
            }
            Generator::GaussianLogistic => {
                let u = noise.unit();
                let p = if self.spec.noise_scale == 0.0 {
                    if signal >= 0.0 {
                        1.0
                    } else {
                        0.0
                    }
                } else {
                    1.0 / (1.0 + (-signal / self.spec.noise_scale).exp())
                };
                if u < p {
                    1.0
                } else {
                    -1.0
                }
            }
        };
        Example::new(x, y)
    }

    /// `n` examples drawn with the streams of `seed`.
    pub fn sample(&self, n: usize, seed: u64) -> Result<Dataset> {
        let mut features = Stream::new(seed, Purpose::Features);
        let mut noise = Stream::new(seed, Purpose::Noise);
        let examples = (0..n)
            .map(|_| self.draw(&mut features, &mut noise))
            .collect();
        let mut spec = self.spec.clone();
        spec.n = n;
        Dataset::new(
            examples,
            self.spec.d,
            Provenance::Synthetic {
                spec,
                population_seed: self.seed,
                sample_seed: seed,
            },
        )
    }
}

/// `spec.n` examples from the population seeded by `seed`, sampled with the same seed.
pub fn make_synthetic(spec: &SyntheticSpec, seed: u64) -> Result<Dataset> {
    Population::new(spec.clone(), seed)?.sample(spec.n, seed)
}
