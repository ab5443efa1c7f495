//! Proper-score evaluation of time-series models under non-stationarity.
//!
//! The core idea: a non-stationary series is approximately stationary on
//! short time windows. A penalized changepoint analysis ([`changepoint`])
//! splits the observation series into such windows, window planners
//! ([`windows`]) turn the segmentation into a per-instance moving window,
//! and the evaluation layer ([`evaluation`]) scores model realizations
//! against observations window by window with proper scoring rules
//! ([`scoring`]). Averaged scores rank competing models.
//!
//! [`simulation`] generates the built-in changepoint/trend/periodicity
//! scenarios and runs seeded replication experiments over them;
//! [`trend`] provides the classical linear-trend comparison baseline.
//!
//! The numeric kernels are generic over the scalar type through [`Real`]
//! (`f32` or `f64`). The crate root exports `f64` aliases for the generic
//! types; the simulation harness is `f64` throughout.

mod accum;
mod error;
mod real;

pub mod changepoint;
pub mod evaluation;
pub mod scoring;
pub mod simulation;
pub mod trend;
pub mod windows;

pub use error::{Error, Result};
pub use real::Real;

pub use changepoint::Segmentation;
pub use evaluation::{Method, Rule};
pub use windows::{WindowKind, WindowPlan};

/// `f64` specialization of [`scoring::GaussianSpec`].
pub type GaussianSpec = scoring::GaussianSpec<f64>;
/// `f64` specialization of [`changepoint::PeltConfig`].
pub type PeltConfig = changepoint::PeltConfig<f64>;
/// `f64` specialization of [`changepoint::SegmentStats`].
pub type SegmentStats = changepoint::SegmentStats<f64>;
/// `f64` specialization of [`evaluation::ScoreSeries`].
pub type ScoreSeries = evaluation::ScoreSeries<f64>;
/// `f64` specialization of [`trend::AnnualSeries`].
pub type AnnualSeries = trend::AnnualSeries<f64>;
/// `f64` specialization of [`trend::TrendFit`].
pub type TrendFit = trend::TrendFit<f64>;
