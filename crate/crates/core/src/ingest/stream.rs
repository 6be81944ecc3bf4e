use std::collections::VecDeque;

use super::RawRecord;
use crate::error::{Error, Result};

/// One point on the regular grid, as handed to the detector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilledPoint {
    pub timestamp: i64,
    pub value: f64,
    pub label: bool,
    pub filled: bool,
}

/// Online counterpart of [`fill_missing`](super::fill_missing) for records
/// arriving in timestamp order.
///
/// A gap is held back until the next observed value closes it, then filled
/// with the same rule: linear inside one period, a copy of the previous
/// period otherwise. Gaps still open at the end are copied by [`finish`].
///
/// [`finish`]: StreamFiller::finish
#[derive(Debug, Clone)]
pub struct StreamFiller {
    step: i64,
    period: usize,
    /// Timestamp of the next grid slot.
    next: Option<i64>,
    /// Last `period` emitted values; the front is one period back.
    history: VecDeque<f64>,
    emitted: usize,
    /// Slots awaiting a value, starting at this timestamp.
    gap: Option<(i64, usize)>,
}

impl StreamFiller {
    pub fn new(step: i64, period: usize) -> Result<Self> {
        if step <= 0 {
            return Err(Error::Config(format!("grid step must be positive, got {step}")));
        }
        if period == 0 {
            return Err(Error::Config("period must be at least 1".into()));
        }
        Ok(Self {
            step,
            period,
            next: None,
            history: VecDeque::with_capacity(period),
            emitted: 0,
            gap: None,
        })
    }

    /// Points emitted so far.
    pub fn emitted(&self) -> usize {
        self.emitted
    }

    pub fn push(&mut self, rec: RawRecord) -> Result<Vec<FilledPoint>> {
        let Some(next) = self.next else {
            let Some(value) = rec.value else {
                return Err(Error::UnfillableGap {
                    timestamp: rec.timestamp,
                    len: 1,
                    reason: "no earlier history",
                });
            };
            self.next = Some(rec.timestamp + self.step);
            let mut out = Vec::with_capacity(1);
            self.emit(&mut out, rec.timestamp, value, rec.label.unwrap_or(false), false);
            return Ok(out);
        };
        if rec.timestamp < next {
            return Err(Error::Config(format!(
                "timestamp {} arrives after {}; streamed input must be strictly increasing",
                rec.timestamp,
                next - self.step
            )));
        }
        if (rec.timestamp - next) % self.step != 0 {
            return Err(Error::Config(format!(
                "timestamp {} is not on the {}s grid",
                rec.timestamp, self.step
            )));
        }
        let skipped = ((rec.timestamp - next) / self.step) as usize;
        if skipped > 0 {
            self.widen_gap(next, skipped);
        }
        self.next = Some(rec.timestamp + self.step);
        let mut out = Vec::new();
        match rec.value {
            None => self.widen_gap(rec.timestamp, 1),
            Some(value) => {
                if let Some((start, len)) = self.gap.take() {
                    self.fill(&mut out, start, len, Some(value))?;
                }
                self.emit(&mut out, rec.timestamp, value, rec.label.unwrap_or(false), false);
            }
        }
        Ok(out)
    }

    /// Fill a trailing gap, if any.
    pub fn finish(&mut self) -> Result<Vec<FilledPoint>> {
        let mut out = Vec::new();
        if let Some((start, len)) = self.gap.take() {
            self.fill(&mut out, start, len, None)?;
        }
        Ok(out)
    }

    fn widen_gap(&mut self, from: i64, len: usize) {
        match &mut self.gap {
            Some((_, pending)) => *pending += len,
            None => self.gap = Some((from, len)),
        }
    }

    fn fill(&mut self, out: &mut Vec<FilledPoint>, start: i64, len: usize, close: Option<f64>) -> Result<()> {
        match close {
            Some(b) if len < self.period => {
                let a = *self.history.back().expect("a gap follows an emitted point");
                let span = (len + 1) as f64;
                for k in 0..len {
                    let w = (k + 1) as f64 / span;
                    self.emit(out, start + k as i64 * self.step, a + (b - a) * w, false, true);
                }
            }
            _ => {
                if self.emitted < self.period {
                    return Err(Error::UnfillableGap {
                        timestamp: start,
                        len,
                        reason: "longer than the available history",
                    });
                }
                for k in 0..len {
                    let v = *self.history.front().expect("history holds a full period");
                    self.emit(out, start + k as i64 * self.step, v, false, true);
                }
            }
        }
        Ok(())
    }

    fn emit(&mut self, out: &mut Vec<FilledPoint>, timestamp: i64, value: f64, label: bool, filled: bool) {
        if self.history.len() == self.period {
            self.history.pop_front();
        }
        self.history.push_back(value);
        self.emitted += 1;
        out.push(FilledPoint {
            timestamp,
            value,
            label,
            filled,
        });
    }
}
