//! Series files, gap filling, train/test splits and synthetic data.

mod fill;
mod parse;
mod stream;
pub mod synth;

use std::io::Write;
use std::ops::Range;

use serde::{Deserialize, Serialize};

pub use fill::fill_missing;
pub use parse::{parse, parse_reader, Format, RawRecord, RecordReader};
pub use stream::{FilledPoint, StreamFiller};
pub use synth::{
    benchmark_suite, synthesize, AmplitudeProfile, AnomalyKind, AnomalySpec, Shape, SuiteFamily, SynthSpec,
};

use crate::error::{Error, Result};
use crate::eval::Granularity;

/// A univariate series with binary anomaly labels.
///
/// Missing values are `NaN` until [`fill_missing`] replaces them; `filled`
/// marks the points it created or repaired.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSeries {
    pub timestamps: Vec<i64>,
    pub values: Vec<f64>,
    pub labels: Vec<bool>,
    pub filled: Vec<bool>,
    pub granularity: Granularity,
}

impl LabeledSeries {
    pub fn new(timestamps: Vec<i64>, values: Vec<f64>, labels: Vec<bool>, granularity: Granularity) -> Result<Self> {
        if timestamps.len() != values.len() {
            return Err(Error::LengthMismatch {
                left: timestamps.len(),
                right: values.len(),
            });
        }
        if labels.len() != values.len() {
            return Err(Error::LengthMismatch {
                left: labels.len(),
                right: values.len(),
            });
        }
        let filled = vec![false; values.len()];
        Ok(Self {
            timestamps,
            values,
            labels,
            filled,
            granularity,
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// No missing values remain.
    pub fn is_complete(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn slice(&self, range: Range<usize>) -> Self {
        Self {
            timestamps: self.timestamps[range.clone()].to_vec(),
            values: self.values[range.clone()].to_vec(),
            labels: self.labels[range.clone()].to_vec(),
            filled: self.filled[range].to_vec(),
            granularity: self.granularity,
        }
    }

    /// Writes `timestamp,value,label` CSV; missing values become empty fields.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["timestamp", "value", "label"]).map_err(csv_io)?;
        for i in 0..self.len() {
            let value = if self.values[i].is_finite() {
                self.values[i].to_string()
            } else {
                String::new()
            };
            w.write_record([
                self.timestamps[i].to_string(),
                value,
                u8::from(self.labels[i]).to_string(),
            ])
            .map_err(csv_io)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Writes one JSON object per line; missing values become `null`.
    pub fn write_ndjson<W: Write>(&self, mut writer: W) -> Result<()> {
        for i in 0..self.len() {
            let rec = RawRecord {
                timestamp: self.timestamps[i],
                value: self.values[i].is_finite().then_some(self.values[i]),
                label: Some(self.labels[i]),
            };
            serde_json::to_writer(&mut writer, &rec).map_err(|e| Error::Io(e.into()))?;
            writer.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn write<W: Write>(&self, writer: W, format: Format) -> Result<()> {
        match format {
            Format::Csv => self.write_csv(writer),
            Format::Ndjson => self.write_ndjson(writer),
        }
    }
}

fn csv_io(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

/// Points in one day at `granularity`, the season used for gap filling.
pub fn points_per_day(granularity: Granularity) -> usize {
    (86_400 / granularity.seconds()).max(1) as usize
}

/// How a series is divided before scoring.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SplitProtocol {
    /// First half for training, second half for testing.
    Halves,
    /// The file already is the test partition.
    PassThrough,
}

/// Returns `(train, test)`. Detection needs no training; the split only
/// decides which points are scored.
pub fn split(series: &LabeledSeries, protocol: SplitProtocol) -> (LabeledSeries, LabeledSeries) {
    let n = series.len();
    match protocol {
        SplitProtocol::Halves => (series.slice(0..n / 2), series.slice(n / 2..n)),
        SplitProtocol::PassThrough => (series.slice(0..0), series.clone()),
    }
}

/// Index where the test partition begins.
pub fn test_start(len: usize, protocol: SplitProtocol) -> usize {
    match protocol {
        SplitProtocol::Halves => len / 2,
        SplitProtocol::PassThrough => 0,
    }
}
