use std::io::Write;

use anyhow::Result;
use omp_core::DetectionOutcome;
use serde::Serialize;

use crate::args::FileFormat;

pub const FIELDS: [&str; 7] = ["timestamp", "value", "mp", "mp_index", "ds", "decision", "decided_by"];

/// One output line. `timestamp` is the input's epoch seconds; `mp_index` is
/// the zero-based stream position where the nearest reference starts.
#[derive(Debug, Serialize)]
struct Record<'a> {
    timestamp: i64,
    value: f64,
    mp: Option<f64>,
    mp_index: Option<u64>,
    ds: Option<f64>,
    decision: u8,
    decided_by: &'a str,
}

pub struct RecordWriter<W: Write> {
    out: W,
    format: FileFormat,
}

impl<W: Write> RecordWriter<W> {
    /// Writes the `#` header lines, then the column names for CSV.
    pub fn new(mut out: W, format: FileFormat, header: &[String]) -> Result<Self> {
        for line in header {
            writeln!(out, "# {line}")?;
        }
        if format == FileFormat::Csv {
            writeln!(out, "{}", FIELDS.join(","))?;
        }
        Ok(Self { out, format })
    }

    pub fn write(&mut self, timestamp: i64, o: &DetectionOutcome) -> Result<()> {
        let rec = Record {
            timestamp,
            value: o.value,
            mp: o.mp,
            mp_index: o.mp_index,
            ds: o.ds,
            decision: u8::from(o.decision),
            decided_by: o.decided_by.name(),
        };
        match self.format {
            FileFormat::Ndjson => {
                serde_json::to_writer(&mut self.out, &rec)?;
                self.out.write_all(b"\n")?;
            }
            FileFormat::Csv => {
                let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
                writeln!(
                    self.out,
                    "{},{},{},{},{},{},{}",
                    rec.timestamp,
                    rec.value,
                    opt(rec.mp),
                    rec.mp_index.map(|i| i.to_string()).unwrap_or_default(),
                    opt(rec.ds),
                    rec.decision,
                    rec.decided_by
                )?;
            }
        }
        Ok(())
    }

    pub fn finish(mut self) -> Result<W> {
        self.out.flush()?;
        Ok(self.out)
    }
}
