//! Subsequence distances, window statistics and the sliding inner-product
//! recurrence.
//!
//! All variances are population variances (divide by `m`), which is what makes
//! the `m * sigma^2` terms of the inner-product distance forms cancel exactly.

use serde::{Deserialize, Serialize};

use crate::buffer::SlidingBuffer;
use crate::error::{Error, Result};

/// Degeneracy threshold shared by every "is this zero?" test in the crate.
pub const EPSILON: f64 = 1e-12;

/// Radicands down to `-RADICAND_TOLERANCE` (scaled by the magnitude of the
/// terms) are treated as rounding noise and clamp to zero.
pub const RADICAND_TOLERANCE: f64 = 1e-9;

/// Mean and spread of one subsequence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindowStats {
    pub mean: f64,
    pub std: f64,
    pub sum: f64,
    pub sum_sq: f64,
}

impl WindowStats {
    /// Direct two-pass computation over `values`.
    pub fn from_values(values: &[f64]) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptyWindow);
        }
        let m = values.len() as f64;
        let sum: f64 = values.iter().sum();
        let sum_sq: f64 = values.iter().map(|x| x * x).sum();
        let mean = sum / m;
        let var = values.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / m;
        Ok(Self {
            mean,
            std: var.sqrt(),
            sum,
            sum_sq,
        })
    }

    /// Stats from running sums over `m` values.
    pub fn from_sums(sum: f64, sum_sq: f64, m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::EmptyWindow);
        }
        let len = m as f64;
        let mean = sum / len;
        let var = (sum_sq / len - mean * mean).max(0.0);
        Ok(Self {
            mean,
            std: var.sqrt(),
            sum,
            sum_sq,
        })
    }

    #[inline]
    pub fn variance(&self) -> f64 {
        self.std * self.std
    }
}

/// Inner product `<A, B>` of two equal-length subsequences.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct InnerProduct(pub f64);

impl InnerProduct {
    pub fn direct(a: &[f64], b: &[f64]) -> Result<Self> {
        check_same_len(a, b)?;
        Ok(Self(dot(a, b)))
    }

    /// Slide both windows one step: drop the oldest pair, add the newest.
    #[inline]
    #[must_use]
    pub fn update(self, x_old_a: f64, x_old_b: f64, x_new_a: f64, x_new_b: f64) -> Self {
        Self(self.0 - x_old_a * x_old_b + x_new_a * x_new_b)
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn check_same_len(a: &[f64], b: &[f64]) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    Ok(())
}

/// Euclidean distance between the mean-centered subsequences, computed
/// directly in O(m).
pub fn mean_normalized_distance(a: &[f64], b: &[f64]) -> Result<f64> {
    check_same_len(a, b)?;
    if a.is_empty() {
        return Err(Error::EmptyWindow);
    }
    let m = a.len() as f64;
    let mu_a = a.iter().sum::<f64>() / m;
    let mu_b = b.iter().sum::<f64>() / m;
    let sq: f64 = a
        .iter()
        .zip(b)
        .map(|(x, y)| {
            let d = (x - mu_a) - (y - mu_b);
            d * d
        })
        .sum();
    Ok(sq.sqrt())
}

/// Squared mean-normalized distance from window statistics and the inner
/// product, before clamping.
#[inline]
pub(crate) fn mean_normalized_radicand(ip: f64, sa: &WindowStats, sb: &WindowStats, m: f64) -> f64 {
    m * (sa.variance() + sb.variance()) - 2.0 * (ip - m * sa.mean * sb.mean)
}

/// Magnitude of the terms a radicand is assembled from, for scaling the
/// clamp tolerance.
#[inline]
pub(crate) fn radicand_scale(ip: f64, sa: &WindowStats, sb: &WindowStats, m: f64) -> f64 {
    1.0_f64
        .max(ip.abs())
        .max(m * (sa.mean * sb.mean).abs())
        .max(m * (sa.variance() + sb.variance()))
}

pub(crate) fn clamp_radicand(radicand: f64, scale: f64) -> Result<f64> {
    if radicand >= 0.0 {
        return Ok(radicand);
    }
    let tolerance = RADICAND_TOLERANCE * scale;
    if radicand >= -tolerance {
        Ok(0.0)
    } else {
        Err(Error::InconsistentState { radicand, tolerance })
    }
}

/// Mean-normalized distance from the inner product and the two windows'
/// statistics in O(1).
pub fn distance_via_stats(ip: InnerProduct, sa: &WindowStats, sb: &WindowStats, m: usize) -> Result<f64> {
    if m == 0 {
        return Err(Error::EmptyWindow);
    }
    let m = m as f64;
    let radicand = mean_normalized_radicand(ip.0, sa, sb, m);
    clamp_radicand(radicand, radicand_scale(ip.0, sa, sb, m)).map(f64::sqrt)
}

/// Euclidean distance between z-normalized subsequences, computed directly.
pub fn znorm_distance(a: &[f64], b: &[f64]) -> Result<f64> {
    check_same_len(a, b)?;
    let sa = WindowStats::from_values(a)?;
    let sb = WindowStats::from_values(b)?;
    check_not_degenerate(&sa)?;
    check_not_degenerate(&sb)?;
    let sq: f64 = a
        .iter()
        .zip(b)
        .map(|(x, y)| {
            let d = (x - sa.mean) / sa.std - (y - sb.mean) / sb.std;
            d * d
        })
        .sum();
    Ok(sq.sqrt())
}

/// Z-normalized distance through the correlation form
/// `sqrt(2m (1 - (ip - m mu_a mu_b) / (m sigma_a sigma_b)))`.
pub fn znorm_distance_via_stats(ip: InnerProduct, sa: &WindowStats, sb: &WindowStats, m: usize) -> Result<f64> {
    if m == 0 {
        return Err(Error::EmptyWindow);
    }
    check_not_degenerate(sa)?;
    check_not_degenerate(sb)?;
    let m = m as f64;
    let corr = (ip.0 - m * sa.mean * sb.mean) / (m * sa.std * sb.std);
    let radicand = 2.0 * m * (1.0 - corr);
    // corr is bounded by 1 in exact arithmetic; the tolerance is relative to 2m.
    clamp_radicand(radicand, 2.0 * m).map(f64::sqrt)
}

fn check_not_degenerate(s: &WindowStats) -> Result<()> {
    if s.std <= EPSILON {
        return Err(Error::DegenerateSubsequence {
            std: s.std,
            eps: EPSILON,
        });
    }
    Ok(())
}

/// Prefix sums of `x` and `x^2` over the cached values.
///
/// Windows are answered in O(1) by differencing. Because popped values leave
/// their contribution in the running base, the sums are rebuilt from the raw
/// cache contents every `rebuild_period` updates to bound drift.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RollingSums {
    prefix: SlidingBuffer<f64>,
    prefix_sq: SlidingBuffer<f64>,
    rebuild_period: usize,
    since_rebuild: usize,
}

impl RollingSums {
    pub fn new(rebuild_period: usize) -> Self {
        let mut prefix = SlidingBuffer::new();
        let mut prefix_sq = SlidingBuffer::new();
        prefix.push_back(0.0);
        prefix_sq.push_back(0.0);
        Self {
            prefix,
            prefix_sq,
            rebuild_period: rebuild_period.max(1),
            since_rebuild: 0,
        }
    }

    /// Build from scratch over `values`.
    pub fn from_values(values: &[f64], rebuild_period: usize) -> Self {
        let mut sums = Self::new(rebuild_period);
        sums.rebuild(values);
        sums
    }

    /// Number of values covered.
    pub fn len(&self) -> usize {
        self.prefix.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Append `x_in`, drop the oldest value if `x_out` is given, and rebuild
    /// from `contents` (the cache after this update) when the period elapses.
    pub fn update(&mut self, x_in: f64, x_out: Option<f64>, contents: &[f64]) {
        let last = *self.prefix.last().expect("prefix never empty");
        let last_sq = *self.prefix_sq.last().expect("prefix never empty");
        self.prefix.push_back(last + x_in);
        self.prefix_sq.push_back(last_sq + x_in * x_in);
        if x_out.is_some() {
            self.prefix.pop_front();
            self.prefix_sq.pop_front();
        }
        self.since_rebuild += 1;
        if self.since_rebuild >= self.rebuild_period {
            self.rebuild(contents);
        }
    }

    /// Recompute every prefix from the raw values.
    pub fn rebuild(&mut self, values: &[f64]) {
        self.prefix.clear();
        self.prefix_sq.clear();
        let (mut s, mut s2) = (0.0, 0.0);
        self.prefix.push_back(s);
        self.prefix_sq.push_back(s2);
        for &x in values {
            s += x;
            s2 += x * x;
            self.prefix.push_back(s);
            self.prefix_sq.push_back(s2);
        }
        self.since_rebuild = 0;
    }

    /// Stats for the `m` values starting at cache offset `start`.
    pub fn stats(&self, start: usize, m: usize) -> Result<WindowStats> {
        if m == 0 {
            return Err(Error::EmptyWindow);
        }
        let end = start + m;
        if end > self.len() {
            return Err(Error::WindowOutOfRange {
                start,
                end,
                len: self.len(),
            });
        }
        let p = self.prefix.as_slice();
        let q = self.prefix_sq.as_slice();
        WindowStats::from_sums(p[end] - p[start], q[end] - q[start], m)
    }
}
