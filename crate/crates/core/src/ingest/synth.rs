//! Seeded synthetic series with labelled anomalies.
//!
//! Output is a pure function of the [`SynthSpec`], including its seed.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::LabeledSeries;
use crate::error::{Error, Result};
use crate::eval::Granularity;

/// Noise-free base pattern, with unit amplitude before scaling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Shape {
    Sine,
    /// Fundamental plus a phase-shifted second harmonic.
    Harmonic,
    /// Three slow sinusoids with incommensurate periods; never repeats.
    QuasiPeriodic,
}

impl Shape {
    fn at(self, t: f64, period: f64) -> f64 {
        match self {
            Shape::Sine => (TAU * t / period).sin(),
            Shape::Harmonic => (TAU * t / period).sin() + 0.4 * (2.0 * TAU * t / period + 1.0).sin(),
            Shape::QuasiPeriodic => {
                (TAU * t / (period * 2.31)).sin()
                    + 0.6 * (TAU * t / (period * 5.17) + 0.7).sin()
                    + 0.4 * (TAU * t / (period * 9.73) + 2.1).sin()
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AmplitudeProfile {
    Constant(f64),
    /// Raised-cosine swing from `min` (at t = 0) up to `max` and back, once per
    /// `period` points.
    Modulated {
        min: f64,
        max: f64,
        period: f64,
    },
    /// `low` for `low_span` points, then `high` for `high_span` points,
    /// repeating; `phase` shifts the schedule left.
    Alternating {
        low: f64,
        high: f64,
        low_span: usize,
        high_span: usize,
        phase: usize,
    },
}

impl AmplitudeProfile {
    fn at(self, t: f64) -> f64 {
        match self {
            AmplitudeProfile::Constant(a) => a,
            AmplitudeProfile::Modulated { min, max, period } => {
                min + (max - min) * (0.5 - 0.5 * (TAU * t / period).cos())
            }
            AmplitudeProfile::Alternating {
                low,
                high,
                low_span,
                high_span,
                phase,
            } => {
                let slot = (t as usize + phase) % (low_span + high_span).max(1);
                if slot < low_span {
                    low
                } else {
                    high
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AnomalyKind {
    /// Adds `magnitude` to every point of the anomaly.
    Spike,
    /// Multiplies the pattern (not the offset or noise) by `magnitude`.
    AmplitudeBurst,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnomalySpec {
    pub position: usize,
    pub magnitude: f64,
    pub duration: usize,
    pub kind: AnomalyKind,
}

impl AnomalySpec {
    pub fn spike(position: usize, magnitude: f64) -> Self {
        Self {
            position,
            magnitude,
            duration: 1,
            kind: AnomalyKind::Spike,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub length: usize,
    /// Season length in points.
    pub period: f64,
    pub shape: Shape,
    pub amplitude: AmplitudeProfile,
    pub offset: f64,
    pub noise_sigma: f64,
    pub anomalies: Vec<AnomalySpec>,
    pub seed: u64,
    pub start_timestamp: i64,
    pub granularity: Granularity,
}

impl SynthSpec {
    /// Noise-free hourly sine, no anomalies.
    pub fn sine(length: usize, period: f64, amplitude: f64) -> Self {
        Self {
            length,
            period,
            shape: Shape::Sine,
            amplitude: AmplitudeProfile::Constant(amplitude),
            offset: 0.0,
            noise_sigma: 0.0,
            anomalies: Vec::new(),
            seed: 0,
            start_timestamp: 1_600_000_000 - 1_600_000_000 % 3600,
            granularity: Granularity::Hour,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.period > 0.0) {
            return Err(Error::Config("period must be positive".into()));
        }
        if !(self.noise_sigma >= 0.0) {
            return Err(Error::Config("noise sigma must be non-negative".into()));
        }
        for a in &self.anomalies {
            if a.duration == 0 || a.position + a.duration > self.length {
                return Err(Error::Config(format!(
                    "anomaly at {} (duration {}) does not fit in {} points",
                    a.position, a.duration, self.length
                )));
            }
        }
        Ok(())
    }
}

pub fn synthesize(spec: &SynthSpec) -> Result<LabeledSeries> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let noise = Normal::new(0.0, spec.noise_sigma).map_err(|e| Error::Config(e.to_string()))?;

    let mut pattern = Vec::with_capacity(spec.length);
    let mut noise_terms = Vec::with_capacity(spec.length);
    for i in 0..spec.length {
        let t = i as f64;
        pattern.push(spec.amplitude.at(t) * spec.shape.at(t, spec.period));
        noise_terms.push(if spec.noise_sigma > 0.0 {
            noise.sample(&mut rng)
        } else {
            0.0
        });
    }

    let mut labels = vec![false; spec.length];
    let mut added = vec![0.0; spec.length];
    for a in &spec.anomalies {
        for i in a.position..a.position + a.duration {
            labels[i] = true;
            match a.kind {
                AnomalyKind::Spike => added[i] += a.magnitude,
                AnomalyKind::AmplitudeBurst => pattern[i] *= a.magnitude,
            }
        }
    }

    let values = (0..spec.length)
        .map(|i| spec.offset + pattern[i] + added[i] + noise_terms[i])
        .collect();
    let step = spec.granularity.seconds();
    let timestamps = (0..spec.length as i64)
        .map(|i| spec.start_timestamp + i * step)
        .collect();
    LabeledSeries::new(timestamps, values, labels, spec.granularity)
}

/// Families of the hourly benchmark suite.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SuiteFamily {
    /// Stable seasonal pattern with isolated spikes and short level shifts.
    Periodic,
    /// Sine whose amplitude alternates between two low days and one day ten
    /// times larger. Anomalies sit in the low days: one cycle of larger
    /// amplitude and two small spikes.
    AmplitudeVarying,
    /// Quasi-periodic signal with spikes.
    NonPeriodic,
    /// Seasonal pattern where a later anomaly repeats an earlier one exactly
    /// a whole number of periods later.
    RepeatedAnomaly,
}

impl SuiteFamily {
    pub const ALL: [SuiteFamily; 4] = [
        SuiteFamily::Periodic,
        SuiteFamily::AmplitudeVarying,
        SuiteFamily::NonPeriodic,
        SuiteFamily::RepeatedAnomaly,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SuiteFamily::Periodic => "periodic",
            SuiteFamily::AmplitudeVarying => "amplitude-varying",
            SuiteFamily::NonPeriodic => "non-periodic",
            SuiteFamily::RepeatedAnomaly => "repeated-anomaly",
        }
    }

    /// Hourly series (24-point season, 720 points) drawn from `seed`.
    pub fn spec(self, seed: u64) -> SynthSpec {
        const LEN: usize = 720;
        const PERIOD: f64 = 24.0;
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x0005_eed0_fa11);
        let amp = rng.random_range(1.0..10.0);
        let offset = rng.random_range(0.0..100.0);
        let sign = |rng: &mut ChaCha8Rng| if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        let mut spec = SynthSpec {
            length: LEN,
            period: PERIOD,
            shape: Shape::Harmonic,
            amplitude: AmplitudeProfile::Constant(amp),
            offset,
            noise_sigma: 0.02 * amp,
            anomalies: Vec::new(),
            seed,
            ..SynthSpec::sine(LEN, PERIOD, amp)
        };
        match self {
            SuiteFamily::Periodic => {
                for pos in spaced_positions(&mut rng, 3, 200..700, 60) {
                    let duration = if rng.random_bool(0.3) {
                        rng.random_range(2..=3)
                    } else {
                        1
                    };
                    let magnitude = sign(&mut rng) * rng.random_range(0.5..1.0) * amp;
                    spec.anomalies.push(AnomalySpec {
                        position: pos,
                        magnitude,
                        duration,
                        kind: AnomalyKind::Spike,
                    });
                }
            }
            SuiteFamily::AmplitudeVarying => {
                // Days are 24 points and amplitude switches at day starts,
                // where the sine crosses zero.
                let shift = rng.random_range(0..3);
                spec.shape = Shape::Sine;
                spec.amplitude = AmplitudeProfile::Alternating {
                    low: amp,
                    high: 10.0 * amp,
                    low_span: 48,
                    high_span: 24,
                    phase: 24 * shift,
                };
                let low_day = |d: usize| (d + shift) % 3 != 2;
                let days: Vec<usize> = (9..19).filter(|&d| low_day(d)).collect();
                let day = days[rng.random_range(0..days.len())];
                spec.anomalies.push(AnomalySpec {
                    position: 24 * day,
                    magnitude: rng.random_range(2.0..4.0),
                    duration: 24,
                    kind: AnomalyKind::AmplitudeBurst,
                });
                let mut spikes: Vec<usize> = Vec::new();
                while spikes.len() < 2 {
                    let p = rng.random_range(24 * day + 72..712);
                    if low_day(p / 24) && spikes.iter().all(|&q| p.abs_diff(q) >= 24) {
                        spikes.push(p);
                    }
                }
                for p in spikes {
                    spec.anomalies
                        .push(AnomalySpec::spike(p, sign(&mut rng) * rng.random_range(0.6..1.0) * amp));
                }
            }
            SuiteFamily::NonPeriodic => {
                spec.shape = Shape::QuasiPeriodic;
                spec.noise_sigma = 0.05 * amp;
                for pos in spaced_positions(&mut rng, 3, 200..700, 60) {
                    let magnitude = sign(&mut rng) * rng.random_range(1.5..2.5) * amp;
                    spec.anomalies.push(AnomalySpec::spike(pos, magnitude));
                }
            }
            SuiteFamily::RepeatedAnomaly => {
                let first = rng.random_range(220..420);
                let repeat = first + 24 * rng.random_range(2..=6);
                let magnitude = sign(&mut rng) * rng.random_range(0.6..1.0) * amp;
                spec.anomalies.push(AnomalySpec::spike(first, magnitude));
                spec.anomalies.push(AnomalySpec::spike(repeat, magnitude));
            }
        }
        spec.anomalies.sort_by_key(|a| a.position);
        spec
    }
}

/// `count` positions in `range`, at least `gap` apart.
fn spaced_positions(rng: &mut ChaCha8Rng, count: usize, range: std::ops::Range<usize>, gap: usize) -> Vec<usize> {
    let mut out: Vec<usize> = Vec::with_capacity(count);
    while out.len() < count {
        let p = rng.random_range(range.clone());
        if out.iter().all(|&q| p.abs_diff(q) >= gap) {
            out.push(p);
        }
    }
    out.sort_unstable();
    out
}

/// `count` series cycling through the four families, seeds `base_seed..`.
pub fn benchmark_suite(count: usize, base_seed: u64) -> Vec<(SuiteFamily, SynthSpec)> {
    (0..count)
        .map(|i| {
            let family = SuiteFamily::ALL[i % SuiteFamily::ALL.len()];
            (family, family.spec(base_seed + i as u64))
        })
        .collect()
}
