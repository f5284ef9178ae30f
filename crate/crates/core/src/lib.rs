//! Calibration measures for binary predictors.
//!
//! Everything is computed from an [`EmpiricalJoint`]: a finite distribution
//! over (prediction, label) pairs. Measures range from the expected
//! calibration error through smooth and kernel variants to decision-theoretic
//! losses and distances to the nearest calibrated predictor.

pub mod basic;
pub mod chain;
pub mod decision;
pub mod distance;
pub mod error;
pub mod fixtures;
pub mod io;
pub mod joint;
pub mod lp;
pub mod online;
pub mod partitions;
pub mod plot;
pub mod report;
pub mod weighted;

pub use error::{Error, Result};
pub use joint::{Atom, EmpiricalJoint, FiniteInstance, InstancePoint, LevelSet, RecalibrationMap};
