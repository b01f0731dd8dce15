pub mod classifiers;
pub mod dataset;
pub mod error;
pub mod estimators;
pub mod lp;
pub mod numerics;
pub mod population;
pub mod simharness;
pub mod theory;
pub mod tuning;

pub use error::{Error, Result};
