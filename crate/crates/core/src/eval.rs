//! Delay-adjusted precision, recall and F1.
//!
//! Ground-truth anomalies come in contiguous segments. A segment counts as
//! detected when any prediction fires within its first `q` points; the whole
//! segment is then credited, otherwise every prediction inside it is dropped.
//! Counts are taken pointwise on the adjusted predictions.

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::engine::{Detector, EngineConfig};
use crate::error::{Error, Result};
use crate::ingest::{test_start, LabeledSeries, SplitProtocol};

/// Sampling interval of a series.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Granularity {
    Minute,
    Hour,
    /// Any other interval, in seconds.
    Custom(u32),
}

impl Granularity {
    pub fn seconds(self) -> i64 {
        match self {
            Granularity::Minute => 60,
            Granularity::Hour => 3600,
            Granularity::Custom(s) => i64::from(s),
        }
    }

    pub fn from_seconds(secs: i64) -> Self {
        match secs {
            60 => Granularity::Minute,
            3600 => Granularity::Hour,
            s => Granularity::Custom(s.clamp(1, i64::from(u32::MAX)) as u32),
        }
    }
}

/// Allowed detection delay: 7 points at minute level, 3 at hour level.
/// Other granularities need an explicit value.
pub fn delay_for_granularity(granularity: Granularity, explicit: Option<usize>) -> Result<usize> {
    if let Some(q) = explicit {
        if q == 0 {
            return Err(Error::Config("delay must be at least 1".into()));
        }
        return Ok(q);
    }
    match granularity {
        Granularity::Minute => Ok(7),
        Granularity::Hour => Ok(3),
        Granularity::Custom(s) => Err(Error::Config(format!(
            "no default delay for a {s}s granularity; set it explicitly"
        ))),
    }
}

fn check_lengths(labels: &[bool], preds: &[bool]) -> Result<()> {
    if labels.len() != preds.len() {
        return Err(Error::LengthMismatch {
            left: labels.len(),
            right: preds.len(),
        });
    }
    Ok(())
}

/// Apply the delay rule to `preds`.
pub fn adjust_predictions(labels: &[bool], preds: &[bool], q: usize) -> Result<Vec<bool>> {
    check_lengths(labels, preds)?;
    let mut out = preds.to_vec();
    let mut i = 0;
    while i < labels.len() {
        if !labels[i] {
            i += 1;
            continue;
        }
        let start = i;
        while i < labels.len() && labels[i] {
            i += 1;
        }
        let head = (start + q).min(i);
        let hit = preds[start..head].iter().any(|&p| p);
        out[start..i].fill(hit);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub q: usize,
    /// Wall time spent inside detection, in seconds.
    pub wall_time_total: f64,
    /// Mean detection time per timestamp, in milliseconds.
    pub time_per_timestamp: f64,
    pub timestamps: usize,
}

impl EvalReport {
    pub fn from_counts(tp: usize, fp: usize, fn_: usize, q: usize) -> Self {
        let ratio = |num: usize, den: usize| if den == 0 { 0.0 } else { num as f64 / den as f64 };
        let precision = ratio(tp, tp + fp);
        let recall = ratio(tp, tp + fn_);
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        Self {
            tp,
            fp,
            fn_,
            precision,
            recall,
            f1,
            q,
            wall_time_total: 0.0,
            time_per_timestamp: 0.0,
            timestamps: 0,
        }
    }

    pub fn with_timing(mut self, elapsed: Duration, timestamps: usize) -> Self {
        self.wall_time_total = elapsed.as_secs_f64();
        self.timestamps = timestamps;
        self.time_per_timestamp = if timestamps == 0 {
            0.0
        } else {
            elapsed.as_secs_f64() * 1e3 / timestamps as f64
        };
        self
    }

    /// Pool counts and timings across series.
    pub fn aggregate<'a>(reports: impl IntoIterator<Item = &'a EvalReport>, q: usize) -> Self {
        let (mut tp, mut fp, mut fn_, mut secs, mut n) = (0, 0, 0, 0.0, 0);
        for r in reports {
            tp += r.tp;
            fp += r.fp;
            fn_ += r.fn_;
            secs += r.wall_time_total;
            n += r.timestamps;
        }
        Self::from_counts(tp, fp, fn_, q).with_timing(Duration::from_secs_f64(secs), n)
    }
}

/// Adjust, then count pointwise.
pub fn score(labels: &[bool], preds: &[bool], q: usize) -> Result<EvalReport> {
    let adjusted = adjust_predictions(labels, preds, q)?;
    let (mut tp, mut fp, mut fn_) = (0, 0, 0);
    for (&l, &p) in labels.iter().zip(&adjusted) {
        match (l, p) {
            (true, true) => tp += 1,
            (false, true) => fp += 1,
            (true, false) => fn_ += 1,
            (false, false) => {}
        }
    }
    Ok(EvalReport::from_counts(tp, fp, fn_, q))
}

/// Run the detector over the whole series and score the test partition.
///
/// Detection always sees the full history; `protocol` only decides which
/// points are counted. The series must be complete.
pub fn evaluate(cfg: EngineConfig, series: &LabeledSeries, protocol: SplitProtocol, q: usize) -> Result<EvalReport> {
    if series.is_empty() {
        return Err(Error::Config("cannot evaluate an empty series".into()));
    }
    let started = Instant::now();
    let outcomes = Detector::run(cfg, &series.values)?;
    let elapsed = started.elapsed();
    let from = test_start(series.len(), protocol);
    let preds: Vec<bool> = outcomes[from..].iter().map(|o| o.decision).collect();
    Ok(score(&series.labels[from..], &preds, q)?.with_timing(elapsed, series.len()))
}
