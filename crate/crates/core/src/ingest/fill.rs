use super::LabeledSeries;
use crate::error::{Error, Result};

/// Place the series on a regular grid at its granularity and fill every hole.
///
/// A run of missing points shorter than `period` (points per season) is
/// interpolated linearly between its neighbours. Longer runs, and runs at
/// the end of the series, copy the same slot from the previous period so the
/// seasonal shape survives. Filled points get label 0 and `filled = true`.
pub fn fill_missing(series: &LabeledSeries, period: usize) -> Result<LabeledSeries> {
    if period == 0 {
        return Err(Error::Config("period must be at least 1".into()));
    }
    if series.is_empty() {
        return Ok(series.clone());
    }
    let step = series.granularity.seconds();
    let t0 = series.timestamps[0];
    let last = *series.timestamps.last().expect("non-empty");
    for &t in &series.timestamps {
        if (t - t0) % step != 0 {
            return Err(Error::Config(format!(
                "timestamp {t} is not on the {step}s grid starting at {t0}"
            )));
        }
    }
    let n = ((last - t0) / step) as usize + 1;
    let mut values = vec![f64::NAN; n];
    let mut labels = vec![false; n];
    let mut filled = vec![true; n];
    for i in 0..series.len() {
        let slot = ((series.timestamps[i] - t0) / step) as usize;
        values[slot] = series.values[i];
        if series.values[i].is_finite() {
            labels[slot] = series.labels[i];
            filled[slot] = series.filled[i];
        }
    }

    let mut i = 0;
    while i < n {
        if values[i].is_finite() {
            i += 1;
            continue;
        }
        let start = i;
        while i < n && !values[i].is_finite() {
            i += 1;
        }
        let len = i - start;
        let unfillable = |reason| Error::UnfillableGap {
            timestamp: t0 + start as i64 * step,
            len,
            reason,
        };
        if start == 0 {
            return Err(unfillable("no earlier history"));
        }
        if len < period && i < n {
            let (a, b) = (values[start - 1], values[i]);
            let span = (len + 1) as f64;
            for (k, slot) in values[start..i].iter_mut().enumerate() {
                let w = (k + 1) as f64 / span;
                *slot = a + (b - a) * w;
            }
        } else {
            if start < period {
                return Err(unfillable("longer than the available history"));
            }
            for slot in start..i {
                values[slot] = values[slot - period];
            }
        }
    }

    Ok(LabeledSeries {
        timestamps: (0..n as i64).map(|k| t0 + k * step).collect(),
        values,
        labels,
        filled,
        granularity: series.granularity,
    })
}
