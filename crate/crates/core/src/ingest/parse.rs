use std::fs::File;
use std::io::{BufRead, BufReader, Read};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::LabeledSeries;
use crate::error::{Error, Result};
use crate::eval::Granularity;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Ndjson,
}

impl Format {
    /// `.ndjson`/`.jsonl` files are NDJSON, anything else CSV.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("ndjson" | "jsonl") => Format::Ndjson,
            _ => Format::Csv,
        }
    }
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "ndjson" | "jsonl" => Ok(Format::Ndjson),
            other => Err(Error::Config(format!("unknown format {other:?}"))),
        }
    }
}

/// One row of a series file.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RawRecord {
    /// Epoch seconds.
    pub timestamp: i64,
    pub value: Option<f64>,
    #[serde(default, serialize_with = "label_out", deserialize_with = "label_in")]
    pub label: Option<bool>,
}

fn label_out<S: Serializer>(label: &Option<bool>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match label {
        Some(b) => s.serialize_u8(u8::from(*b)),
        None => s.serialize_none(),
    }
}

fn label_in<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Option<bool>, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Wire {
        Int(u64),
        Bool(bool),
    }
    match Option::<Wire>::deserialize(d)? {
        None => Ok(None),
        Some(Wire::Bool(b)) => Ok(Some(b)),
        Some(Wire::Int(0)) => Ok(Some(false)),
        Some(Wire::Int(1)) => Ok(Some(true)),
        Some(Wire::Int(n)) => Err(serde::de::Error::custom(format!("label must be 0 or 1, got {n}"))),
    }
}

/// Streaming reader yielding `(line, record)` pairs in file order.
pub struct RecordReader<R: Read> {
    inner: Inner<R>,
    path: PathBuf,
}

enum Inner<R: Read> {
    Csv {
        reader: csv::Reader<R>,
        columns: Option<Columns>,
        record: csv::StringRecord,
    },
    Ndjson {
        lines: std::io::Lines<BufReader<R>>,
        line: usize,
    },
}

#[derive(Clone, Copy)]
struct Columns {
    timestamp: usize,
    value: usize,
    label: Option<usize>,
}

impl<R: Read> RecordReader<R> {
    /// `name` is only used in error messages.
    pub fn new(reader: R, format: Format, name: impl Into<PathBuf>) -> Self {
        let inner = match format {
            Format::Csv => Inner::Csv {
                reader: csv::ReaderBuilder::new()
                    .trim(csv::Trim::All)
                    .flexible(true)
                    .comment(Some(b'#'))
                    .from_reader(reader),
                columns: None,
                record: csv::StringRecord::new(),
            },
            Format::Ndjson => Inner::Ndjson {
                lines: BufReader::new(reader).lines(),
                line: 0,
            },
        };
        Self {
            inner,
            path: name.into(),
        }
    }

    fn error(&self, line: usize, message: impl Into<String>) -> Error {
        Error::Parse {
            path: self.path.clone(),
            line,
            message: message.into(),
        }
    }

    fn next_csv(&mut self) -> Option<Result<(usize, RawRecord)>> {
        let Inner::Csv {
            reader,
            columns,
            record,
        } = &mut self.inner
        else {
            unreachable!()
        };
        if columns.is_none() {
            let headers = match reader.headers() {
                Ok(h) => h.clone(),
                Err(e) => return Some(Err(csv_error(&self.path, e))),
            };
            if headers.iter().all(str::is_empty) {
                return None;
            }
            let find = |name: &str| headers.iter().position(|h| h.eq_ignore_ascii_case(name));
            match (find("timestamp"), find("value")) {
                (Some(timestamp), Some(value)) => {
                    *columns = Some(Columns {
                        timestamp,
                        value,
                        label: find("label"),
                    })
                }
                _ => {
                    let path = self.path.clone();
                    return Some(Err(Error::Parse {
                        path,
                        line: 1,
                        message: "header must name `timestamp` and `value` columns".into(),
                    }));
                }
            }
        }
        let cols = columns.expect("set above");
        match reader.read_record(record) {
            Ok(false) => None,
            Err(e) => Some(Err(csv_error(&self.path, e))),
            Ok(true) => {
                let line = record.position().map_or(0, |p| p.line() as usize);
                let field = |i: usize| record.get(i).unwrap_or("");
                let parsed = parse_timestamp(field(cols.timestamp)).and_then(|timestamp| {
                    let value = parse_value(field(cols.value))?;
                    let label = match cols.label {
                        Some(i) => parse_label(field(i))?,
                        None => None,
                    };
                    Ok(RawRecord {
                        timestamp,
                        value,
                        label,
                    })
                });
                Some(parsed.map(|r| (line, r)).map_err(|msg| self.error(line, msg)))
            }
        }
    }

    fn next_ndjson(&mut self) -> Option<Result<(usize, RawRecord)>> {
        let Inner::Ndjson { lines, line } = &mut self.inner else {
            unreachable!()
        };
        loop {
            let text = match lines.next()? {
                Ok(t) => t,
                Err(e) => return Some(Err(e.into())),
            };
            *line += 1;
            let trimmed = text.trim();
            if trimmed.is_empty() {
                continue;
            }
            let line = *line;
            return Some(
                serde_json::from_str::<RawRecord>(trimmed)
                    .map(|r| (line, r))
                    .map_err(|e| self.error(line, e.to_string())),
            );
        }
    }
}

impl<R: Read> Iterator for RecordReader<R> {
    type Item = Result<(usize, RawRecord)>;

    fn next(&mut self) -> Option<Self::Item> {
        match self.inner {
            Inner::Csv { .. } => self.next_csv(),
            Inner::Ndjson { .. } => self.next_ndjson(),
        }
    }
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line() as usize);
    Error::Parse {
        path: path.to_path_buf(),
        line,
        message: e.to_string(),
    }
}

fn parse_timestamp(s: &str) -> std::result::Result<i64, String> {
    if let Ok(t) = s.parse::<i64>() {
        return Ok(t);
    }
    match s.parse::<f64>() {
        Ok(f) if f.is_finite() && f.fract() == 0.0 && f.abs() < 9.0e15 => Ok(f as i64),
        _ => Err(format!("invalid timestamp {s:?}")),
    }
}

fn parse_value(s: &str) -> std::result::Result<Option<f64>, String> {
    if s.is_empty() || s.eq_ignore_ascii_case("nan") || s == "null" {
        return Ok(None);
    }
    match s.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(Some(v)),
        _ => Err(format!("invalid value {s:?}")),
    }
}

fn parse_label(s: &str) -> std::result::Result<Option<bool>, String> {
    match s {
        "" => Ok(None),
        "0" | "0.0" | "false" => Ok(Some(false)),
        "1" | "1.0" | "true" => Ok(Some(true)),
        other => Err(format!("label must be 0 or 1, got {other:?}")),
    }
}

/// Read every record, sort by timestamp and keep the last row for any
/// repeated timestamp. Absent labels read as 0; the granularity is the
/// median spacing.
pub fn parse_reader<R: Read>(reader: R, format: Format, name: impl Into<PathBuf>) -> Result<LabeledSeries> {
    let name = name.into();
    let mut records = Vec::new();
    for item in RecordReader::new(reader, format, name.clone()) {
        records.push(item?.1);
    }
    if records.is_empty() {
        return Err(Error::EmptyInput(name));
    }
    // Stable sort keeps file order among equal timestamps; the last one wins.
    records.sort_by_key(|r| r.timestamp);
    let mut deduped: Vec<RawRecord> = Vec::with_capacity(records.len());
    for r in records {
        match deduped.last_mut() {
            Some(last) if last.timestamp == r.timestamp => *last = r,
            _ => deduped.push(r),
        }
    }
    let timestamps: Vec<i64> = deduped.iter().map(|r| r.timestamp).collect();
    let granularity = infer_granularity(&timestamps);
    LabeledSeries::new(
        timestamps,
        deduped.iter().map(|r| r.value.unwrap_or(f64::NAN)).collect(),
        deduped.iter().map(|r| r.label.unwrap_or(false)).collect(),
        granularity,
    )
}

pub fn parse(path: &Path, format: Format) -> Result<LabeledSeries> {
    let file = File::open(path)?;
    parse_reader(file, format, path)
}

fn infer_granularity(timestamps: &[i64]) -> Granularity {
    let mut gaps: Vec<i64> = timestamps.windows(2).map(|w| w[1] - w[0]).collect();
    if gaps.is_empty() {
        return Granularity::Hour;
    }
    let mid = gaps.len() / 2;
    let (_, median, _) = gaps.select_nth_unstable(mid);
    Granularity::from_seconds(*median)
}
