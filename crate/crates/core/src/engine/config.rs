use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::SrConfig;

/// Cache capacity meaning "keep the whole history".
pub const UNBOUNDED: usize = usize::MAX;

/// How two subsequences are compared.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DistanceKind {
    /// Subtract each window's mean, keep its amplitude.
    MeanNormalized,
    /// Classic z-normalization (mean and standard deviation).
    ZNormalized,
}

/// What turns a left-profile entry into a 0/1 decision.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Judge {
    /// Distance significance against the threshold.
    Ds,
    /// Distance significance, handing over to spectral residual when the
    /// nearest neighbour ends on a point already judged anomalous.
    DsWithSrFallback,
    /// First difference of the left profile, flagged when it exceeds
    /// `mp_diff_sigma` standard deviations of the past differences.
    MpDiff,
    /// Spectral residual on every window; no profile is computed.
    SrOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EngineConfig {
    /// Subsequence length `m`.
    pub window: usize,
    /// Number of most recent statuses kept (`c`), or [`UNBOUNDED`].
    pub cache: usize,
    /// Length `l` of the trailing strip used by distance significance.
    /// Values above `window` are clamped to it.
    pub ds_window: usize,
    /// Decision threshold on distance significance.
    pub threshold: f64,
    /// Reference windows must start at least this many steps before the query.
    pub exclusion: usize,
    /// Admissible references needed before any judgement is made.
    pub warmup_min: usize,
    pub distance: DistanceKind,
    pub judge: Judge,
    pub mp_diff_sigma: f64,
    pub sr: SrConfig,
}

impl EngineConfig {
    /// Full detector with the default exclusion (`m/2`) and warm-up (`m`
    /// references, or fewer if the cache cannot hold that many).
    pub fn new(window: usize, cache: usize, ds_window: usize, threshold: f64) -> Self {
        let exclusion = window / 2;
        let max_refs = max_references(window, cache, exclusion);
        Self {
            window,
            cache,
            ds_window,
            threshold,
            exclusion,
            warmup_min: window.min(max_refs).max(1),
            distance: DistanceKind::MeanNormalized,
            judge: Judge::DsWithSrFallback,
            mp_diff_sigma: 3.0,
            sr: SrConfig::default(),
        }
    }

    /// Hour-granularity profile: ten days of history.
    pub fn hourly() -> Self {
        Self::new(48, 240, 48, 0.35)
    }

    /// Minute-granularity profile: ten days of history, two-day windows.
    pub fn minutely() -> Self {
        Self::new(2880, 14_400, 30, 0.37)
    }

    pub fn with_exclusion(mut self, exclusion: usize) -> Self {
        self.exclusion = exclusion;
        self.warmup_min = self
            .warmup_min
            .min(max_references(self.window, self.cache, exclusion))
            .max(1);
        self
    }

    /// Effective strip length, `min(l, m)`.
    pub fn strip(&self) -> usize {
        self.ds_window.min(self.window)
    }

    pub fn is_unbounded(&self) -> bool {
        self.cache == UNBOUNDED
    }

    /// Largest number of admissible references the cache can ever hold.
    pub fn max_references(&self) -> usize {
        max_references(self.window, self.cache, self.exclusion)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.window < 2 {
            return bad(format!("window must be at least 2, got {}", self.window));
        }
        if self.judge != Judge::SrOnly && self.cache != UNBOUNDED && self.cache < self.window + self.exclusion + 1 {
            return bad(format!(
                "cache {} must exceed window + exclusion ({} + {})",
                self.cache, self.window, self.exclusion
            ));
        }
        if self.cache < self.window {
            return bad(format!(
                "cache {} is smaller than the window {}",
                self.cache, self.window
            ));
        }
        if self.ds_window == 0 {
            return bad("distance-significance strip must be at least 1".into());
        }
        if !(self.threshold > 0.0 && self.threshold < 1.0) {
            return bad(format!("threshold must lie in (0, 1), got {}", self.threshold));
        }
        if self.warmup_min == 0 {
            return bad("warmup_min must be at least 1".into());
        }
        if self.judge != Judge::SrOnly && self.warmup_min > self.max_references() {
            return bad(format!(
                "warmup_min {} exceeds the {} references the cache can hold",
                self.warmup_min,
                self.max_references()
            ));
        }
        if !(self.mp_diff_sigma.is_finite() && self.mp_diff_sigma > 0.0) {
            return bad(format!("mp_diff_sigma must be positive, got {}", self.mp_diff_sigma));
        }
        if matches!(self.judge, Judge::DsWithSrFallback | Judge::SrOnly) {
            self.sr.validate_for(self.window)?;
        }
        Ok(())
    }
}

fn max_references(window: usize, cache: usize, exclusion: usize) -> usize {
    if cache == UNBOUNDED {
        return usize::MAX;
    }
    (cache + 1).saturating_sub(window + exclusion)
}

/// Ablation configurations, from the plain z-normalized profile up to the
/// full detector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    /// Full detector: mean-normalized, cached, DS with SR fallback.
    Omp,
    /// Z-normalized left profile over the full history, first-difference score.
    MpZnorm,
    /// Mean-normalized left profile over the full history, first-difference score.
    MpStar,
    /// As `MpStar` with the bounded cache.
    MpStarCache,
    /// Cached mean-normalized profile judged by DS only.
    MpStarCacheDs,
    /// Spectral residual alone.
    SrOnly,
}

impl Mode {
    pub const ALL: [Mode; 6] = [
        Mode::Omp,
        Mode::MpZnorm,
        Mode::MpStar,
        Mode::MpStarCache,
        Mode::MpStarCacheDs,
        Mode::SrOnly,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Mode::Omp => "omp",
            Mode::MpZnorm => "mp-znorm",
            Mode::MpStar => "mp-star",
            Mode::MpStarCache => "mp-star-cache",
            Mode::MpStarCacheDs => "mp-star-cache-ds",
            Mode::SrOnly => "sr-only",
        }
    }

    /// Rewrite the distance, judge and cache of `base` for this mode.
    pub fn configure(self, base: EngineConfig) -> EngineConfig {
        let (distance, judge, cached) = match self {
            Mode::Omp => (DistanceKind::MeanNormalized, Judge::DsWithSrFallback, true),
            Mode::MpZnorm => (DistanceKind::ZNormalized, Judge::MpDiff, false),
            Mode::MpStar => (DistanceKind::MeanNormalized, Judge::MpDiff, false),
            Mode::MpStarCache => (DistanceKind::MeanNormalized, Judge::MpDiff, true),
            Mode::MpStarCacheDs => (DistanceKind::MeanNormalized, Judge::Ds, true),
            Mode::SrOnly => (DistanceKind::MeanNormalized, Judge::SrOnly, true),
        };
        EngineConfig {
            distance,
            judge,
            cache: if cached { base.cache } else { UNBOUNDED },
            ..base
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Mode::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown mode {s:?}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_validate() {
        EngineConfig::hourly().validate().unwrap();
        EngineConfig::minutely().validate().unwrap();
        let h = EngineConfig::hourly();
        assert_eq!(
            (h.window, h.cache, h.ds_window, h.exclusion, h.warmup_min),
            (48, 240, 48, 24, 48)
        );
        let k = EngineConfig::minutely();
        assert_eq!((k.window, k.cache, k.ds_window, k.threshold), (2880, 14_400, 30, 0.37));
    }

    #[test]
    fn strip_is_clamped_to_window() {
        let cfg = EngineConfig::new(10, 40, 30, 0.3);
        assert_eq!(cfg.strip(), 10);
    }

    #[test]
    fn rejects_cache_without_admissible_references() {
        let cfg = EngineConfig {
            cache: 60,
            ..EngineConfig::hourly()
        };
        assert!(matches!(cfg.validate(), Err(Error::Config(_))));
    }

    #[test]
    fn rejects_threshold_outside_unit_interval() {
        for t in [0.0, 1.0, -0.2, f64::NAN] {
            let cfg = EngineConfig {
                threshold: t,
                ..EngineConfig::hourly()
            };
            assert!(cfg.validate().is_err(), "threshold {t}");
        }
    }

    #[test]
    fn warmup_shrinks_to_fit_small_caches() {
        let cfg = EngineConfig {
            judge: Judge::Ds,
            ..EngineConfig::new(4, 7, 4, 0.5)
        };
        assert_eq!(cfg.max_references(), 2);
        assert_eq!(cfg.warmup_min, 2);
        cfg.validate().unwrap();
        // Spectral residual needs longer windows than this.
        assert!(EngineConfig::new(4, 7, 4, 0.5).validate().is_err());
    }

    #[test]
    fn mode_names_round_trip() {
        for mode in Mode::ALL {
            assert_eq!(mode.name().parse::<Mode>().unwrap(), mode);
        }
        assert!("mp".parse::<Mode>().is_err());
    }

    #[test]
    fn uncached_modes_drop_the_capacity() {
        let base = EngineConfig::hourly();
        assert!(Mode::MpStar.configure(base).is_unbounded());
        assert!(Mode::MpZnorm.configure(base).is_unbounded());
        assert_eq!(Mode::MpStarCache.configure(base).cache, 240);
        assert_eq!(Mode::Omp.configure(base).judge, Judge::DsWithSrFallback);
    }
}
