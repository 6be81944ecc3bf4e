use std::fs::{self, File};
use std::io::{self, BufWriter};
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, ValueEnum};
use omp_core::ingest::{benchmark_suite, synthesize, AnomalySpec, Format, SuiteFamily};
use omp_core::SynthSpec;

use crate::args::FileFormat;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Family {
    Periodic,
    AmplitudeVarying,
    NonPeriodic,
    RepeatedAnomaly,
}

impl From<Family> for SuiteFamily {
    fn from(f: Family) -> Self {
        match f {
            Family::Periodic => SuiteFamily::Periodic,
            Family::AmplitudeVarying => SuiteFamily::AmplitudeVarying,
            Family::NonPeriodic => SuiteFamily::NonPeriodic,
            Family::RepeatedAnomaly => SuiteFamily::RepeatedAnomaly,
        }
    }
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Draw one series of a benchmark family instead of a plain sine.
    #[arg(long, value_enum, conflicts_with = "suite")]
    pub family: Option<Family>,
    /// Write this many benchmark series (cycling through the families) into --out-dir.
    #[arg(long, requires = "out_dir")]
    pub suite: Option<usize>,
    /// Directory for --suite files, named NNN-FAMILY.EXT.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    /// Seed; for --suite, the seed of the first series.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Plain sine: number of points.
    #[arg(long, default_value_t = 720)]
    pub length: usize,
    /// Plain sine: points per season.
    #[arg(long, default_value_t = 24.0)]
    pub period: f64,
    /// Plain sine: amplitude.
    #[arg(long, default_value_t = 1.0)]
    pub amplitude: f64,
    /// Plain sine: standard deviation of Gaussian noise.
    #[arg(long, default_value_t = 0.0)]
    pub noise: f64,
    /// Plain sine: additive spike as POSITION:MAGNITUDE; repeatable.
    #[arg(long, value_parser = parse_spike)]
    pub spike: Vec<AnomalySpec>,
    /// Output file [default: standard output].
    #[arg(short, long, conflicts_with = "suite")]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: FileFormat,
}

fn parse_spike(s: &str) -> Result<AnomalySpec, String> {
    let (pos, mag) = s
        .split_once(':')
        .ok_or_else(|| format!("expected POSITION:MAGNITUDE, got {s:?}"))?;
    let pos = pos.trim().parse().map_err(|_| format!("invalid position {pos:?}"))?;
    let mag = mag.trim().parse().map_err(|_| format!("invalid magnitude {mag:?}"))?;
    Ok(AnomalySpec::spike(pos, mag))
}

pub fn run(args: &SynthArgs) -> Result<()> {
    let format = Format::from(args.format);
    if let Some(count) = args.suite {
        let dir = args.out_dir.as_ref().expect("clap enforces --out-dir");
        if count == 0 {
            bail!("--suite needs at least one series");
        }
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        let ext = match args.format {
            FileFormat::Csv => "csv",
            FileFormat::Ndjson => "ndjson",
        };
        for (i, (family, spec)) in benchmark_suite(count, args.seed).into_iter().enumerate() {
            let path = dir.join(format!("{i:03}-{}.{ext}", family.name()));
            let out = BufWriter::new(File::create(&path).with_context(|| format!("creating {}", path.display()))?);
            synthesize(&spec)?.write(out, format)?;
        }
        return Ok(());
    }
    let spec = match args.family {
        Some(f) => SuiteFamily::from(f).spec(args.seed),
        None => SynthSpec {
            noise_sigma: args.noise,
            anomalies: args.spike.clone(),
            seed: args.seed,
            ..SynthSpec::sine(args.length, args.period, args.amplitude)
        },
    };
    let series = synthesize(&spec)?;
    match &args.output {
        Some(path) => {
            let out = BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?);
            series.write(out, format)?;
        }
        None => series.write(io::stdout().lock(), format)?,
    }
    Ok(())
}
