//! Datasets, LIBSVM ingestion, synthetic populations and neighboring samples.
//!
//! Features are stored densely in row-major order: the coordinate-descent
//! inner loop touches one coordinate of every example, and sparse inputs are
//! densified at parse time.

mod libsvm;
mod synthetic;

pub use libsvm::{load_libsvm, parse_libsvm, parse_libsvm_str};
pub use synthetic::{make_synthetic, Generator, Population, SyntheticSpec};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{Purpose, Stream};

/// A labeled example `z = (x, y)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Example {
    pub features: Vec<f64>,
    pub label: f64,
}

impl Example {
    pub fn new(features: Vec<f64>, label: f64) -> Self {
        Self { features, label }
    }

    pub fn dim(&self) -> usize {
        self.features.len()
    }
}

/// Where a dataset came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "kebab-case")]
pub enum Provenance {
    File {
        path: String,
    },
    Text,
    Synthetic {
        spec: SyntheticSpec,
        population_seed: u64,
        sample_seed: u64,
    },
    Manual,
    Derived {
        from: Box<Provenance>,
        step: String,
    },
}

impl Provenance {
    pub fn derived(&self, step: impl Into<String>) -> Self {
        Provenance::Derived {
            from: Box::new(self.clone()),
            step: step.into(),
        }
    }
}

/// An ordered, immutable sample `S = {z_1, ..., z_n}` of dimension `d`.
///
/// Equality compares content (dimension, features, labels) and ignores
/// provenance.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Dataset {
    dim: usize,
    features: Vec<f64>,
    labels: Vec<f64>,
    provenance: Provenance,
}

impl PartialEq for Dataset {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim && self.features == other.features && self.labels == other.labels
    }
}

impl Dataset {
    pub fn new(examples: Vec<Example>, dim: usize, provenance: Provenance) -> Result<Self> {
        if examples.is_empty() {
            return Err(Error::Empty("a dataset needs at least one example".into()));
        }
        let mut features = Vec::with_capacity(examples.len() * dim);
        let mut labels = Vec::with_capacity(examples.len());
        for ex in examples {
            if ex.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    actual: ex.dim(),
                });
            }
            features.extend_from_slice(&ex.features);
            labels.push(ex.label);
        }
        Self::from_parts(dim, features, labels, provenance)
    }

    /// Builds a dataset from a row-major feature buffer.
    pub fn from_parts(
        dim: usize,
        features: Vec<f64>,
        labels: Vec<f64>,
        provenance: Provenance,
    ) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::Empty("a dataset needs at least one example".into()));
        }
        if dim == 0 {
            return Err(Error::invalid("d", "dimension must be at least 1"));
        }
        if features.len() != labels.len() * dim {
            return Err(Error::DimensionMismatch {
                expected: labels.len() * dim,
                actual: features.len(),
            });
        }
        if features.iter().chain(&labels).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("dataset entries"));
        }
        Ok(Self {
            dim,
            features,
            labels,
            provenance,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.dim..(i + 1) * self.dim]
    }

    #[inline]
    pub fn label(&self, i: usize) -> f64 {
        self.labels[i]
    }

    pub fn labels(&self) -> &[f64] {
        &self.labels
    }

    /// Row-major `n x d` feature buffer.
    pub fn features(&self) -> &[f64] {
        &self.features
    }

    pub fn example(&self, i: usize) -> Example {
        Example::new(self.row(i).to_vec(), self.label(i))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[f64], f64)> + '_ {
        self.features
            .chunks_exact(self.dim)
            .zip(self.labels.iter().copied())
    }

    /// `S^(i)`: a copy of `self` with example `i` replaced by `replacement`.
    pub fn make_neighbor(&self, i: usize, replacement: &Example) -> Result<Dataset> {
        if i >= self.len() {
            return Err(Error::IndexOutOfRange {
                index: i,
                len: self.len(),
            });
        }
        if replacement.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                actual: replacement.dim(),
            });
        }
        if replacement.features.iter().any(|v| !v.is_finite()) || !replacement.label.is_finite() {
            return Err(Error::NonFinite("replacement example"));
        }
        let mut out = self.clone();
        out.features[i * self.dim..(i + 1) * self.dim].copy_from_slice(&replacement.features);
        out.labels[i] = replacement.label;
        out.provenance = self.provenance.derived(format!("replace example {i}"));
        Ok(out)
    }

    /// Rows selected by `indices`, in that order.
    pub fn select(&self, indices: &[usize], step: &str) -> Result<Dataset> {
        let mut features = Vec::with_capacity(indices.len() * self.dim);
        let mut labels = Vec::with_capacity(indices.len());
        for &i in indices {
            if i >= self.len() {
                return Err(Error::IndexOutOfRange {
                    index: i,
                    len: self.len(),
                });
            }
            features.extend_from_slice(self.row(i));
            labels.push(self.label(i));
        }
        Dataset::from_parts(self.dim, features, labels, self.provenance.derived(step))
    }

    /// Seeded uniform split into `(train, test)` with `round(n * test_fraction)`
    /// test examples. Both parts must end up nonempty.
    pub fn split(&self, test_fraction: f64, seed: u64) -> Result<(Dataset, Dataset)> {
        if !(test_fraction > 0.0 && test_fraction < 1.0) {
            return Err(Error::invalid("test_fraction", "must lie in (0, 1)"));
        }
        let n = self.len();
        let n_test = ((n as f64) * test_fraction).round() as usize;
        if n_test == 0 || n_test == n {
            return Err(Error::invalid(
                "test_fraction",
                format!("splitting {n} examples would leave one side empty"),
            ));
        }
        let mut order: Vec<usize> = (0..n).collect();
        let mut rng = Stream::new(seed, Purpose::Split);
        for k in (1..n).rev() {
            let j = rng.index(k + 1);
            order.swap(k, j);
        }
        let (test_idx, train_idx) = order.split_at(n_test);
        let mut train_idx = train_idx.to_vec();
        let mut test_idx = test_idx.to_vec();
        train_idx.sort_unstable();
        test_idx.sort_unstable();
        Ok((
            self.select(&train_idx, &format!("train split seed {seed}"))?,
            self.select(&test_idx, &format!("test split seed {seed}"))?,
        ))
    }

    /// Scales each column to max absolute value 1; all-zero columns are left alone.
    pub fn normalized(&self) -> Dataset {
        let mut scale = vec![0.0f64; self.dim];
        for (row, _) in self.iter() {
            for (s, x) in scale.iter_mut().zip(row) {
                *s = s.max(x.abs());
            }
        }
        let mut out = self.clone();
        for row in out.features.chunks_exact_mut(self.dim) {
            for (x, s) in row.iter_mut().zip(&scale) {
                if *s > 0.0 {
                    *x /= s;
                }
            }
        }
        out.provenance = self.provenance.derived("column max-abs normalization");
        out
    }

    /// Maps labels equal to `positive` to `+1` and everything else to `-1`.
    pub fn relabeled(&self, positive: f64) -> Dataset {
        let mut out = self.clone();
        for y in out.labels.iter_mut() {
            *y = if *y == positive { 1.0 } else { -1.0 };
        }
        out.provenance = self
            .provenance
            .derived(format!("relabel {positive} -> +1, rest -> -1"));
        out
    }

    /// LIBSVM text with 17 significant digits; zero entries are omitted.
    pub fn to_libsvm(&self) -> String {
        use std::fmt::Write;
        let mut out = String::new();
        for (row, y) in self.iter() {
            write!(out, "{y:.16e}").unwrap();
            for (j, x) in row.iter().enumerate() {
                if *x != 0.0 {
                    write!(out, " {}:{x:.16e}", j + 1).unwrap();
                }
            }
            out.push('\n');
        }
        out
    }
}
