use std::time::Instant;

use anyhow::{bail, Result};
use clap::Args;
use omp_core::ingest::synthesize;
use omp_core::{Detector, EngineConfig, SynthSpec, UNBOUNDED};

use crate::args::{describe, EngineArgs};

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Comma-separated series lengths.
    #[arg(long, value_delimiter = ',', default_value = "2000,5000,10000")]
    pub lengths: Vec<usize>,
    #[command(flatten)]
    pub engine: EngineArgs,
    /// Seed of the noise in the benchmark series.
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

fn timed(cfg: EngineConfig, values: &[f64]) -> Result<f64> {
    let started = Instant::now();
    let mut detector = Detector::new(cfg)?;
    for &v in values {
        detector.ingest(v)?;
    }
    Ok(started.elapsed().as_secs_f64())
}

/// Times the configured (cached) detector against the same detector keeping
/// the whole history, on a noisy sine with a period of half a window.
pub fn run(args: &BenchArgs) -> Result<()> {
    let cached = args.engine.config()?;
    let unbounded = EngineConfig {
        cache: UNBOUNDED,
        ..cached
    };
    println!("# omp {}", env!("CARGO_PKG_VERSION"));
    println!("# config {}", describe(Some(args.engine.mode), &cached));
    println!("length,cached_s,unbounded_s,speedup,cached_us_per_point,unbounded_us_per_point");
    for &n in &args.lengths {
        if n == 0 {
            bail!("lengths must be positive");
        }
        let mut spec = SynthSpec::sine(n, (cached.window / 2).max(2) as f64, 5.0);
        spec.noise_sigma = 0.1;
        spec.seed = args.seed;
        let values = synthesize(&spec)?.values;
        let c = timed(cached, &values)?;
        let u = timed(unbounded, &values)?;
        println!(
            "{n},{c:.4},{u:.4},{:.2},{:.3},{:.3}",
            u / c,
            c * 1e6 / n as f64,
            u * 1e6 / n as f64
        );
    }
    Ok(())
}
