use anyhow::Result;
use clap::{Args, ValueEnum};
use omp_core::ingest::Format;
use omp_core::{EngineConfig, Mode, UNBOUNDED};
use serde_json::{json, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    /// m=48, c=240, l=48, t=0.35
    Hourly,
    /// m=2880, c=14400, l=30, t=0.37
    Minutely,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FileFormat {
    Csv,
    Ndjson,
}

impl From<FileFormat> for Format {
    fn from(f: FileFormat) -> Self {
        match f {
            FileFormat::Csv => Format::Csv,
            FileFormat::Ndjson => Format::Ndjson,
        }
    }
}

/// Detector settings shared by every command that runs detection.
#[derive(Debug, Clone, Args)]
pub struct EngineArgs {
    /// Detector variant: omp, mp-znorm, mp-star, mp-star-cache, mp-star-cache-ds or sr-only.
    #[arg(long, default_value = "omp")]
    pub mode: Mode,
    /// Parameter set the other flags override.
    #[arg(long, value_enum, default_value = "hourly")]
    pub preset: Preset,
    /// Subsequence length m.
    #[arg(short = 'm', long)]
    pub window: Option<usize>,
    /// Cached statuses c, or `unbounded`.
    #[arg(short = 'c', long, value_parser = parse_cache)]
    pub cache: Option<usize>,
    /// Trailing strip length l for distance significance.
    #[arg(short = 'l', long = "ds-window")]
    pub ds_window: Option<usize>,
    /// Distance-significance threshold.
    #[arg(short = 't', long)]
    pub threshold: Option<f64>,
    /// Minimum gap between the query start and a reference start [default: m/2].
    #[arg(long)]
    pub exclusion: Option<usize>,
    /// References needed before the first judgement [default: m, or what the cache can hold].
    #[arg(long)]
    pub warmup: Option<usize>,
    /// Spectral-residual score threshold.
    #[arg(long)]
    pub sr_threshold: Option<f64>,
}

fn parse_cache(s: &str) -> Result<usize, String> {
    if s.eq_ignore_ascii_case("unbounded") {
        return Ok(UNBOUNDED);
    }
    s.parse()
        .map_err(|_| format!("expected a count or `unbounded`, got {s:?}"))
}

impl EngineArgs {
    pub fn config(&self) -> Result<EngineConfig> {
        let base = match self.preset {
            Preset::Hourly => EngineConfig::hourly(),
            Preset::Minutely => EngineConfig::minutely(),
        };
        let mut cfg = EngineConfig::new(
            self.window.unwrap_or(base.window),
            self.cache.unwrap_or(base.cache),
            self.ds_window.unwrap_or(base.ds_window),
            self.threshold.unwrap_or(base.threshold),
        );
        if let Some(e) = self.exclusion {
            cfg = cfg.with_exclusion(e);
        }
        if let Some(w) = self.warmup {
            cfg.warmup_min = w;
        }
        if let Some(t) = self.sr_threshold {
            cfg.sr.threshold = t;
        }
        let cfg = self.mode.configure(cfg);
        cfg.validate()?;
        Ok(cfg)
    }
}

/// JSON echo of a configuration, with the unbounded cache spelled out.
pub fn describe(mode: Option<Mode>, cfg: &EngineConfig) -> Value {
    let mut engine = serde_json::to_value(cfg).expect("config serializes");
    if cfg.is_unbounded() {
        engine["cache"] = json!("unbounded");
    }
    match mode {
        Some(m) => json!({ "mode": m.name(), "engine": engine }),
        None => json!({ "engine": engine }),
    }
}
