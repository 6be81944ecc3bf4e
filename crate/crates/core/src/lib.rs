//! Training-free streaming anomaly detection for univariate series.
//!
//! The detector keeps the most recent `c` statuses, maintains the left matrix
//! profile of every incoming subsequence against them, and judges each new
//! point by how much of the distance to its nearest neighbour is concentrated
//! in that last point (distance significance). When the nearest neighbour
//! itself ends on an anomaly, the judgement falls back to spectral residual
//! saliency.
//!
//! ```
//! use omp_core::{Detector, EngineConfig};
//!
//! let mut series: Vec<f64> = (0..480)
//!     .map(|i| (i as f64 * std::f64::consts::TAU / 24.0).sin())
//!     .collect();
//! series[300] += 7.0;
//!
//! let outcomes = Detector::run(EngineConfig::hourly(), &series).unwrap();
//! let alarms: Vec<u64> = outcomes.iter().filter(|o| o.decision).map(|o| o.timestamp).collect();
//! assert_eq!(alarms, vec![300]);
//! ```

mod buffer;
pub mod engine;
pub mod error;
pub mod eval;
pub mod ingest;
pub mod math;
pub mod spectral;

pub use engine::{
    DecidedBy, DetectionOutcome, Detector, DistanceKind, DistanceProfileEntry, EngineConfig, Judge, LeftProfileEntry,
    Mode, Significance, UNBOUNDED,
};
pub use error::{Error, Result};
pub use eval::{EvalReport, Granularity};
pub use ingest::{LabeledSeries, SynthSpec};
pub use spectral::{SpectralResidual, SrConfig};
