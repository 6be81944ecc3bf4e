use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math::EPSILON;
use crate::spectral::SpectralResidual;

/// Which rule produced a decision.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DecidedBy {
    Warmup,
    Ds,
    Sr,
    /// DS with a vanishing denominator.
    Degenerate,
    MpDiff,
}

impl DecidedBy {
    pub fn name(self) -> &'static str {
        match self {
            DecidedBy::Warmup => "warmup",
            DecidedBy::Ds => "ds",
            DecidedBy::Sr => "sr",
            DecidedBy::Degenerate => "degenerate",
            DecidedBy::MpDiff => "mp-diff",
        }
    }
}

/// Distance significance of a query's last point against its neighbour.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Significance {
    pub value: f64,
    /// The strip's squared deviation was below [`EPSILON`]; `value` then
    /// follows the degenerate rule (0 if the last term vanishes too, else 1).
    pub degenerate: bool,
}

/// Squared deviation of the last point relative to the whole trailing strip
/// of length `strip`, after centering each window's strip on its own mean.
///
/// The numerator is one of the denominator's terms, so the result lies in
/// `[0, 1]`.
pub fn distance_significance(query: &[f64], neighbor: &[f64], strip: usize) -> Result<Significance> {
    if query.len() != neighbor.len() {
        return Err(Error::LengthMismatch {
            left: query.len(),
            right: neighbor.len(),
        });
    }
    let m = query.len();
    if strip == 0 || strip > m {
        return Err(Error::Config(format!("strip length {strip} must lie in 1..={m}")));
    }
    let q = &query[m - strip..];
    let n = &neighbor[m - strip..];
    let l = strip as f64;
    let mu_q = q.iter().sum::<f64>() / l;
    let mu_n = n.iter().sum::<f64>() / l;

    let mut denominator = 0.0;
    let mut last = 0.0;
    for (a, b) in q.iter().zip(n) {
        let d = (a - mu_q) - (b - mu_n);
        last = d * d;
        denominator += last;
    }
    let numerator = last;

    if denominator < EPSILON {
        let value = if numerator < EPSILON { 0.0 } else { 1.0 };
        return Ok(Significance {
            value,
            degenerate: true,
        });
    }
    Ok(Significance {
        value: (numerator / denominator).clamp(0.0, 1.0),
        degenerate: false,
    })
}

/// Final judgement for the current point.
///
/// When the nearest neighbour's last point was itself judged anomalous and an
/// SR analyser is supplied, the decision is delegated to it on `window`;
/// otherwise the point is anomalous iff `ds > threshold`.
pub fn decide(
    ds: Significance,
    neighbor_anomalous: bool,
    window: &[f64],
    threshold: f64,
    sr: Option<&mut SpectralResidual>,
) -> Result<(bool, DecidedBy)> {
    if neighbor_anomalous {
        if let Some(sr) = sr {
            return Ok((sr.decide(window)?, DecidedBy::Sr));
        }
    }
    let by = if ds.degenerate {
        DecidedBy::Degenerate
    } else {
        DecidedBy::Ds
    };
    Ok((ds.value > threshold, by))
}

/// First difference of a left-profile sequence; the first score is 0.
pub fn mp_diff_score(profile: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(profile.len());
    if let Some(&first) = profile.first() {
        out.push(0.0);
        let mut prev = first;
        for &p in &profile[1..] {
            out.push(p - prev);
            prev = p;
        }
    }
    out
}
