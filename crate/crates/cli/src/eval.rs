use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, ValueEnum};
use omp_core::eval::{delay_for_granularity, evaluate};
use omp_core::ingest::{fill_missing, parse, points_per_day, Format, SplitProtocol};
use omp_core::{EvalReport, Granularity};
use rayon::prelude::*;
use serde::Serialize;

use crate::args::{describe, EngineArgs, FileFormat};
use crate::detect::{series_files, thread_pool};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Split {
    /// Score the whole file.
    PassThrough,
    /// Score the second half only.
    Halves,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Labeled series file or directory of them.
    pub input: PathBuf,
    #[command(flatten)]
    pub engine: EngineArgs,
    /// Allowed detection delay q [default: 7 at minute level, 3 at hour level].
    #[arg(short = 'q', long)]
    pub delay: Option<usize>,
    /// Which part of each series is scored.
    #[arg(long, value_enum, default_value = "pass-through")]
    pub split: Split,
    /// Input format [default: from the file extension].
    #[arg(long, value_enum)]
    pub format: Option<FileFormat>,
    /// Series processed in parallel [default: all cores].
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Sampling interval in seconds [default: inferred from the timestamps].
    #[arg(long)]
    pub granularity: Option<i64>,
    /// Season length in points used to fill gaps [default: one day].
    #[arg(long)]
    pub period: Option<usize>,
}

#[derive(Serialize)]
struct Line<'a> {
    series: &'a str,
    #[serde(flatten)]
    report: &'a EvalReport,
}

pub fn run(args: &EvalArgs) -> Result<()> {
    let cfg = args.engine.config()?;
    let files = if args.input.is_dir() {
        series_files(&args.input)?
    } else {
        vec![args.input.clone()]
    };
    let protocol = match args.split {
        Split::PassThrough => SplitProtocol::PassThrough,
        Split::Halves => SplitProtocol::Halves,
    };
    let pool = thread_pool(args.jobs)?;
    let results: Vec<Result<EvalReport>> = pool.install(|| {
        files
            .par_iter()
            .map(|path| {
                let format = args.format.map_or_else(|| Format::from_path(path), Format::from);
                let raw = parse(path, format)?;
                let granularity = args.granularity.map_or(raw.granularity, Granularity::from_seconds);
                let raw = omp_core::LabeledSeries { granularity, ..raw };
                let period = args.period.unwrap_or_else(|| points_per_day(granularity));
                let series = fill_missing(&raw, period)?;
                let q = delay_for_granularity(granularity, args.delay)?;
                Ok(evaluate(cfg, &series, protocol, q)?)
            })
            .collect()
    });

    println!("# omp {}", env!("CARGO_PKG_VERSION"));
    println!("# config {}", describe(Some(args.engine.mode), &cfg));
    let mut reports = Vec::with_capacity(files.len());
    for (path, result) in files.iter().zip(results) {
        let report = result.with_context(|| format!("evaluating {}", path.display()))?;
        let name = path.file_name().unwrap_or_default().to_string_lossy();
        println!(
            "{}",
            serde_json::to_string(&Line {
                series: &name,
                report: &report
            })?
        );
        reports.push(report);
    }
    let q = reports[0].q;
    if reports.iter().any(|r| r.q != q) {
        bail!("series have different granularities and so different delays; pass --delay");
    }
    let all = EvalReport::aggregate(&reports, q);
    println!(
        "{}",
        serde_json::to_string(&Line {
            series: "aggregate",
            report: &all
        })?
    );
    Ok(())
}
