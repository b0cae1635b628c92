//! Occupational skill-shortage analytics.
//!
//! The crate covers the whole pipeline from raw job-ad and labour-force
//! files to an evaluated shortage classifier:
//!
//! * [`corpus`] parses and validates the input files and profiles the labels.
//! * [`skills`] ranks skills per occupation-year by raw frequency or by
//!   Revealed Comparative Advantage (RCA).
//! * [`features`] builds the occupation-year design matrix with lagged copies.
//! * [`boost`] is a gradient-boosted tree classifier with missing-value routing.
//! * [`tune`] holds oversampling, k-fold cross-validation and random search.
//! * [`eval`] computes macro metrics, baselines and the feature-subset ablation.
//! * [`synth`] generates a calibrated synthetic dataset with planted signal.
//! * [`cli`] wires everything behind the `skillgap` command.

pub mod boost;
pub mod cli;
pub mod corpus;
pub mod eval;
pub mod features;
pub mod seed;
pub mod skills;
pub mod synth;
pub mod tune;

mod error;

pub use error::{Error, Result};
