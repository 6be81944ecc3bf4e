//! Spectral-residual saliency.
//!
//! A window is extended with a few extrapolated points, moved to the frequency
//! domain, and its log-amplitude spectrum is compared against a smoothed copy
//! of itself. What is left (the residual) is transformed back; positions that
//! are rare in the frequency domain light up in the resulting saliency map.
//!
//! Windows are centred on their mean first, so saliency ignores offsets. The
//! transform is exact for every length (no zero padding), so a window of 53
//! points is analysed as 53 points.

use std::fmt;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SrConfig {
    /// Number of extrapolated points appended after the window.
    pub extend_k: usize,
    /// Width of the moving average over the log-amplitude spectrum.
    pub mean_filter_q: usize,
    /// Number of preceding saliency values the last point is compared to.
    pub score_window_z: usize,
    /// Decision threshold on the relative saliency score.
    pub threshold: f64,
    pub eps: f64,
}

impl Default for SrConfig {
    fn default() -> Self {
        Self {
            extend_k: 5,
            mean_filter_q: 3,
            score_window_z: 21,
            threshold: 3.0,
            eps: 1e-8,
        }
    }
}

impl SrConfig {
    /// Shortest window these settings can analyse.
    pub fn min_window(&self) -> usize {
        (2 * self.extend_k)
            .max(self.extend_k + 2)
            .max(2 * self.mean_filter_q)
            .max(self.score_window_z + 1)
            .max(2)
    }

    pub fn validate(&self) -> Result<()> {
        if self.extend_k == 0 || self.mean_filter_q == 0 || self.score_window_z == 0 {
            return Err(Error::Config("SR window sizes must be at least 1".into()));
        }
        if !(self.threshold > 0.0) || !self.threshold.is_finite() {
            return Err(Error::Config(format!(
                "SR threshold must be positive, got {}",
                self.threshold
            )));
        }
        if !(self.eps > 0.0) {
            return Err(Error::Config("SR eps must be positive".into()));
        }
        Ok(())
    }

    pub fn validate_for(&self, len: usize) -> Result<()> {
        self.validate()?;
        let required = self.min_window();
        if len < required {
            return Err(Error::WindowTooShort { len, required });
        }
        Ok(())
    }
}

/// Per-position saliency over the extended window.
#[derive(Debug, Clone, PartialEq)]
pub struct SaliencyMap {
    pub values: Vec<f64>,
    /// Length of the original window; positions past it are extrapolated.
    pub real_len: usize,
}

/// Appends `k` copies of an estimate extrapolated from the points before the
/// last one.
///
/// With `y` the window minus its last point, the gradient is the mean slope
/// from each of `y`'s trailing `k` points to its last point, and the estimate
/// is `y[len - k] + k * gradient`. Leaving the last real point out keeps an
/// anomaly there from leaking into the estimates, so it is not masked by them.
pub fn extend_window(window: &[f64], k: usize) -> Vec<f64> {
    let y = &window[..window.len() - 1];
    let n = y.len();
    let last = y[n - 1];
    let grad = (1..=k).map(|i| (last - y[n - 1 - i]) / i as f64).sum::<f64>() / k as f64;
    let estimate = y[n - k] + grad * k as f64;
    let mut out = Vec::with_capacity(window.len() + k);
    out.extend_from_slice(window);
    out.extend(std::iter::repeat_n(estimate, k));
    out
}

/// Centered moving average; windows shrink at the edges instead of padding.
pub(crate) fn centered_moving_average(values: &[f64], width: usize) -> Vec<f64> {
    let n = values.len();
    let left = (width - 1) / 2;
    let right = width / 2;
    let mut prefix = Vec::with_capacity(n + 1);
    prefix.push(0.0);
    let mut acc = 0.0;
    for &v in values {
        acc += v;
        prefix.push(acc);
    }
    (0..n)
        .map(|i| {
            let lo = i.saturating_sub(left);
            let hi = (i + right + 1).min(n);
            (prefix[hi] - prefix[lo]) / (hi - lo) as f64
        })
        .collect()
}

type Plan = Arc<dyn Fft<f64>>;

/// Exact forward/inverse discrete Fourier transforms of arbitrary length,
/// with plans cached per length.
pub struct Transformer {
    planner: FftPlanner<f64>,
    cached: Option<(usize, Plan, Plan)>,
}

impl fmt::Debug for Transformer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Transformer")
            .field("planned_len", &self.cached.as_ref().map(|c| c.0))
            .finish()
    }
}

impl Default for Transformer {
    fn default() -> Self {
        Self {
            planner: FftPlanner::new(),
            cached: None,
        }
    }
}

impl Clone for Transformer {
    fn clone(&self) -> Self {
        Self::default()
    }
}

impl Transformer {
    pub fn new() -> Self {
        Self::default()
    }

    fn plans(&mut self, len: usize) -> (Plan, Plan) {
        match &self.cached {
            Some((n, fwd, inv)) if *n == len => (fwd.clone(), inv.clone()),
            _ => {
                let fwd = self.planner.plan_fft_forward(len);
                let inv = self.planner.plan_fft_inverse(len);
                self.cached = Some((len, fwd.clone(), inv.clone()));
                (fwd, inv)
            }
        }
    }

    /// Unnormalized forward transform, in place.
    pub fn forward(&mut self, data: &mut [Complex64]) {
        if data.is_empty() {
            return;
        }
        let (fwd, _) = self.plans(data.len());
        fwd.process(data);
    }

    /// Inverse transform scaled by `1/n`, so `inverse(forward(x)) == x`.
    pub fn inverse(&mut self, data: &mut [Complex64]) {
        if data.is_empty() {
            return;
        }
        let (_, inv) = self.plans(data.len());
        inv.process(data);
        let scale = 1.0 / data.len() as f64;
        for z in data.iter_mut() {
            *z *= scale;
        }
    }
}

/// Spectral-residual analyser; reuses transform plans across calls.
#[derive(Debug, Clone, Default)]
pub struct SpectralResidual {
    cfg: SrConfig,
    transformer: Transformer,
}

impl SpectralResidual {
    pub fn new(cfg: SrConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Self {
            cfg,
            transformer: Transformer::new(),
        })
    }

    pub fn config(&self) -> &SrConfig {
        &self.cfg
    }

    pub fn saliency(&mut self, window: &[f64]) -> Result<SaliencyMap> {
        let cfg = self.cfg;
        cfg.validate_for(window.len())?;
        // An offset only feeds the zero-frequency bin, whose residual would
        // otherwise add a flat floor that hides the point being judged.
        let mean = window.iter().sum::<f64>() / window.len() as f64;
        let centred: Vec<f64> = window.iter().map(|x| x - mean).collect();
        let extended = extend_window(&centred, cfg.extend_k);
        let mut spectrum: Vec<Complex64> = extended.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        self.transformer.forward(&mut spectrum);

        let amplitude: Vec<f64> = spectrum.iter().map(|z| z.norm()).collect();
        let log_amp: Vec<f64> = amplitude.iter().map(|a| (a + cfg.eps).ln()).collect();
        let smoothed = centered_moving_average(&log_amp, cfg.mean_filter_q);

        for (i, z) in spectrum.iter_mut().enumerate() {
            // Bins with no energy have no meaningful phase; they carry nothing back.
            if amplitude[i] <= cfg.eps {
                *z = Complex64::new(0.0, 0.0);
            } else {
                let residual = log_amp[i] - smoothed[i];
                *z *= residual.exp() / amplitude[i];
            }
        }
        self.transformer.inverse(&mut spectrum);

        Ok(SaliencyMap {
            values: spectrum.iter().map(|z| z.norm()).collect(),
            real_len: window.len(),
        })
    }

    /// Relative saliency of the window's last real point against the mean of
    /// the `score_window_z` positions before it.
    pub fn score(&mut self, window: &[f64]) -> Result<f64> {
        let map = self.saliency(window)?;
        Ok(last_point_score(&map, &self.cfg))
    }

    pub fn decide(&mut self, window: &[f64]) -> Result<bool> {
        Ok(self.score(window)? > self.cfg.threshold)
    }
}

pub(crate) fn last_point_score(map: &SaliencyMap, cfg: &SrConfig) -> f64 {
    let last = map.real_len - 1;
    let z = cfg.score_window_z;
    let mean = map.values[last - z..last].iter().sum::<f64>() / z as f64;
    (map.values[last] - mean) / (mean + cfg.eps)
}

/// One-shot saliency with a fresh plan.
pub fn sr_saliency(window: &[f64], cfg: &SrConfig) -> Result<SaliencyMap> {
    SpectralResidual::new(*cfg)?.saliency(window)
}

/// One-shot decision for the last point of `window`.
pub fn sr_decide(window: &[f64], cfg: &SrConfig) -> Result<bool> {
    SpectralResidual::new(*cfg)?.decide(window)
}
