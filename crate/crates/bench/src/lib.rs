//! Inputs shared by the detector benchmarks.

use omp_core::ingest::synthesize;
use omp_core::{Detector, EngineConfig, SynthSpec};

/// Sine with Gaussian noise; the period is half a window so every query has
/// close matches in the cache.
pub fn noisy_sine(len: usize, window: usize, seed: u64) -> Vec<f64> {
    let mut spec = SynthSpec::sine(len, (window / 2).max(2) as f64, 5.0);
    spec.noise_sigma = 0.1;
    spec.seed = seed;
    synthesize(&spec).expect("valid spec").values
}

/// A detector that has already ingested `values`.
pub fn warmed(cfg: EngineConfig, values: &[f64]) -> Detector {
    let mut det = Detector::new(cfg).expect("valid config");
    for &v in values {
        det.ingest(v).expect("finite input");
    }
    det
}
