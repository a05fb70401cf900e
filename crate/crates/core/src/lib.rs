//! Surrogate-model global optimization for mixed-variable black-box
//! problems with radial basis functions.

pub mod bench;
pub mod design;
pub mod engine;
pub mod error;
pub mod linalg;
pub mod modelsel;
pub mod parallel;
pub mod problem;
pub mod rbf;
pub mod refine;
pub mod search;
pub mod subsolver;
pub mod testbed;

pub use error::{Error, Result};
