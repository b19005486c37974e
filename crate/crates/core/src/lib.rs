//! Randomized coordinate descent with an SGD baseline, paired-run stability
//! measurement on neighboring datasets, and closed-form stability,
//! optimization and generalization bound evaluators.

pub mod bounds;
pub mod data;
pub mod error;
pub mod exec;
pub mod losses;
pub mod numeric;
pub mod optim;
pub mod properties;
pub mod rng;
pub mod stability;

pub use error::{Error, Result};
