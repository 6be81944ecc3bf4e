use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::Args;
use omp_core::ingest::{fill_missing, parse, points_per_day, FilledPoint, Format, RecordReader, StreamFiller};
use omp_core::{Detector, Granularity, Mode};
use rayon::prelude::*;

use crate::args::{describe, EngineArgs, FileFormat};
use crate::output::RecordWriter;

#[derive(Debug, Args)]
pub struct DetectArgs {
    /// Series file, directory of series files, or `-` for standard input.
    #[arg(default_value = "-")]
    pub input: PathBuf,
    #[command(flatten)]
    pub engine: EngineArgs,
    /// Input format [default: from the file extension; csv for standard input].
    #[arg(long, value_enum)]
    pub format: Option<FileFormat>,
    /// Output record format.
    #[arg(long, value_enum, default_value = "csv")]
    pub output_format: FileFormat,
    /// Output file, or the output directory when the input is a directory.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    /// Series processed in parallel for directory input [default: all cores].
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Sampling interval in seconds [default: inferred from the timestamps].
    #[arg(long)]
    pub granularity: Option<i64>,
    /// Season length in points used to fill gaps [default: one day].
    #[arg(long)]
    pub period: Option<usize>,
    /// Continue from a detector snapshot; its configuration replaces the engine flags.
    #[arg(long)]
    pub resume: Option<PathBuf>,
    /// Write the detector's state here when the input ends.
    #[arg(long)]
    pub save: Option<PathBuf>,
}

pub fn run(args: &DetectArgs) -> Result<()> {
    let is_stdin = args.input.as_os_str() == "-";
    if !is_stdin && args.input.is_dir() {
        if args.resume.is_some() || args.save.is_some() {
            bail!("--resume and --save take a single series, not a directory");
        }
        return run_directory(args);
    }
    let detector = match &args.resume {
        Some(path) => {
            let file = File::open(path).with_context(|| format!("opening snapshot {}", path.display()))?;
            Detector::read_snapshot(io::BufReader::new(file))
                .with_context(|| format!("reading snapshot {}", path.display()))?
        }
        None => Detector::new(args.engine.config()?)?,
    };
    let mode = args.resume.is_none().then_some(args.engine.mode);
    let header = header_lines(mode, &detector);

    let detector = match &args.output {
        Some(path) => {
            let open = || -> Result<_> {
                let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
                RecordWriter::new(BufWriter::new(file), args.output_format, &header)
            };
            if is_stdin {
                stream_stdin(args, detector, open)?
            } else {
                detect_file(args, &args.input, detector, open)?
            }
        }
        None => {
            // Stdout is line-buffered, so streamed records appear as they are decided.
            let open = || RecordWriter::new(io::stdout().lock(), args.output_format, &header);
            if is_stdin {
                stream_stdin(args, detector, open)?
            } else {
                detect_file(args, &args.input, detector, open)?
            }
        }
    };
    if let Some(path) = &args.save {
        let out = BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?);
        detector.write_snapshot(out)?;
    }
    Ok(())
}

fn header_lines(mode: Option<Mode>, detector: &Detector) -> Vec<String> {
    let mut lines = vec![format!("omp {}", env!("CARGO_PKG_VERSION"))];
    lines.push(format!("config {}", describe(mode, detector.config())));
    if detector.ingested() > 0 {
        lines.push(format!("resumed after {} statuses", detector.ingested()));
    }
    lines
}

fn input_format(args: &DetectArgs, path: &Path) -> Format {
    args.format.map_or_else(|| Format::from_path(path), Format::from)
}

fn detect_file<W: Write>(
    args: &DetectArgs,
    path: &Path,
    mut detector: Detector,
    open: impl FnOnce() -> Result<RecordWriter<W>>,
) -> Result<Detector> {
    let raw = parse(path, input_format(args, path))?;
    let granularity = args.granularity.map_or(raw.granularity, Granularity::from_seconds);
    let raw = omp_core::LabeledSeries { granularity, ..raw };
    let period = args.period.unwrap_or_else(|| points_per_day(granularity));
    let series = fill_missing(&raw, period).with_context(|| format!("filling gaps in {}", path.display()))?;
    let mut writer = open()?;
    for (&ts, &v) in series.timestamps.iter().zip(&series.values) {
        let outcome = detector.ingest(v)?;
        writer.write(ts, &outcome)?;
    }
    writer.finish()?;
    Ok(detector)
}

fn stream_stdin<W: Write>(
    args: &DetectArgs,
    mut detector: Detector,
    open: impl FnOnce() -> Result<RecordWriter<W>>,
) -> Result<Detector> {
    let format = args.format.map_or(Format::Csv, Format::from);
    let stdin = io::stdin();
    let mut records = RecordReader::new(stdin.lock(), format, "<stdin>");
    let Some(first) = records.next().transpose()? else {
        bail!("standard input holds no records");
    };
    // Without --granularity the grid step is the distance to the second record.
    let second = match args.granularity {
        Some(_) => None,
        None => records.next().transpose()?,
    };
    let step = match (args.granularity, &second) {
        (Some(s), _) => s,
        (None, Some((_, b))) => b.timestamp - first.1.timestamp,
        (None, None) => 1,
    };
    if step <= 0 {
        bail!("cannot infer a positive sampling interval from the first two records; pass --granularity");
    }
    let period = args
        .period
        .unwrap_or_else(|| points_per_day(Granularity::from_seconds(step)));
    let mut filler = StreamFiller::new(step, period)?;
    let mut writer = open()?;
    let mut pending = vec![first.1];
    pending.extend(second.map(|(_, rec)| rec));
    for rec in pending {
        emit(filler.push(rec)?, &mut detector, &mut writer)?;
    }
    for item in records {
        emit(filler.push(item?.1)?, &mut detector, &mut writer)?;
    }
    emit(filler.finish()?, &mut detector, &mut writer)?;
    writer.finish()?;
    Ok(detector)
}

fn emit<W: Write>(points: Vec<FilledPoint>, detector: &mut Detector, writer: &mut RecordWriter<W>) -> Result<()> {
    for p in points {
        let outcome = detector.ingest(p.value)?;
        writer.write(p.timestamp, &outcome)?;
    }
    Ok(())
}

/// Regular files in `dir`, sorted by name.
pub fn series_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .with_context(|| format!("listing {}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file())
        .collect();
    files.sort();
    if files.is_empty() {
        bail!("{} holds no series files", dir.display());
    }
    Ok(files)
}

pub fn thread_pool(jobs: Option<usize>) -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = jobs {
        if n == 0 {
            bail!("--jobs must be at least 1");
        }
        builder = builder.num_threads(n);
    }
    Ok(builder.build()?)
}

fn run_directory(args: &DetectArgs) -> Result<()> {
    let Some(out_dir) = &args.output else {
        bail!("directory input needs --output naming a directory for the results");
    };
    fs::create_dir_all(out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
    let cfg = args.engine.config()?;
    let files = series_files(&args.input)?;
    let ext = match args.output_format {
        FileFormat::Csv => "csv",
        FileFormat::Ndjson => "ndjson",
    };
    let pool = thread_pool(args.jobs)?;
    let failures: Vec<String> = pool.install(|| {
        files
            .par_iter()
            .filter_map(|path| {
                let stem = path.file_stem().unwrap_or_default().to_string_lossy();
                let target = out_dir.join(format!("{stem}.{ext}"));
                let result = (|| -> Result<()> {
                    let detector = Detector::new(cfg)?;
                    let header = header_lines(Some(args.engine.mode), &detector);
                    let open = || -> Result<_> {
                        let out = BufWriter::new(File::create(&target)?);
                        RecordWriter::new(out, args.output_format, &header)
                    };
                    detect_file(args, path, detector, open)?;
                    Ok(())
                })();
                result.err().map(|e| format!("{}: {e:#}", path.display()))
            })
            .collect()
    });
    if !failures.is_empty() {
        for f in &failures {
            eprintln!("error: {f}");
        }
        bail!("{} of {} series failed", failures.len(), files.len());
    }
    Ok(())
}
