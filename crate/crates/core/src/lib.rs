//! Metric mean dimension estimators for free semigroup actions on sampled metric spaces.

pub mod config;
pub mod counting;
pub mod dynamics;
pub mod error;
pub mod graph;
pub mod irregular;
pub mod local;
pub mod mdim;
pub mod metric;
pub mod report;
pub mod runner;
pub mod randomwalk;
pub mod semigroup;
pub mod shift;
pub mod skew;
pub mod zoo;

pub use error::{Error, Result};
