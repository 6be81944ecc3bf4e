//! The streaming detector.
//!
//! Each ingested status completes one query subsequence (the last `m`
//! statuses). The query is compared with every reference subsequence still in
//! the cache that starts at least `exclusion` steps earlier; the minimum is the
//! left matrix profile entry, and the nearest reference is used to judge the
//! query's last point.
//!
//! Inner products between the query and each reference are carried from one
//! step to the next with the sliding recurrence, so a step costs O(c) plus one
//! direct O(m) product for the oldest reference, which has no predecessor left
//! in the cache.
//!
//! The label checked before delegating to spectral residual is the stored
//! decision for the *last* point of the nearest reference. Every decision is
//! stored, whichever rule produced it.

mod config;
mod significance;
mod snapshot;

use serde::{Deserialize, Serialize};

pub use config::{DistanceKind, EngineConfig, Judge, Mode, UNBOUNDED};
pub use significance::{decide, distance_significance, mp_diff_score, DecidedBy, Significance};
pub use snapshot::SNAPSHOT_VERSION;

use crate::buffer::SlidingBuffer;
use crate::error::{Error, Result};
use crate::math::{self, RollingSums, WindowStats, EPSILON};
use crate::spectral::SpectralResidual;

/// Per-timestamp result.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectionOutcome {
    /// Zero-based position of the status in the stream.
    pub timestamp: u64,
    pub value: f64,
    /// Left matrix profile value, once at least one reference is admissible.
    pub mp: Option<f64>,
    /// Start of the nearest reference subsequence.
    pub mp_index: Option<u64>,
    pub ds: Option<f64>,
    pub decision: bool,
    pub decided_by: DecidedBy,
}

/// Distance from the current query to one admissible reference.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistanceProfileEntry {
    pub reference_start: u64,
    pub distance: f64,
}

/// Left-profile entry: nearest admissible reference and its distance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LeftProfileEntry {
    pub value: f64,
    pub index: u64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
struct RunningMoments {
    count: u64,
    mean: f64,
    m2: f64,
}

impl RunningMoments {
    fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    fn std(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            (self.m2 / (self.count - 1) as f64).sqrt()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct State {
    /// Statuses ingested so far; the next one gets this timestamp.
    ingested: u64,
    /// First status seen. Values are stored relative to it, which keeps the
    /// inner products small without changing any mean-centered quantity.
    anchor: Option<f64>,
    values: SlidingBuffer<f64>,
    labels: SlidingBuffer<bool>,
    sums: RollingSums,
    /// Mean and population variance of every complete window still cached,
    /// indexed from `stats_base`.
    win_mean: SlidingBuffer<f64>,
    win_var: SlidingBuffer<f64>,
    stats_base: u64,
    /// Inner products of the current query with references `qt_base..`.
    qt: Vec<f64>,
    qt_base: u64,
    /// Squared distances for the same references, from the last step.
    radicands: Vec<f64>,
    prev_mp: Option<f64>,
    diffs: RunningMoments,
}

/// Online matrix profile detector for one series.
#[derive(Debug, Clone)]
pub struct Detector {
    cfg: EngineConfig,
    state: State,
    sr: Option<SpectralResidual>,
}

impl Detector {
    pub fn new(cfg: EngineConfig) -> Result<Self> {
        cfg.validate()?;
        let capacity = if cfg.is_unbounded() { 1024 } else { cfg.cache + 1 };
        let rebuild_period = cfg.cache.min(1 << 16);
        let state = State {
            ingested: 0,
            anchor: None,
            values: SlidingBuffer::with_capacity(capacity),
            labels: SlidingBuffer::with_capacity(capacity),
            sums: RollingSums::new(rebuild_period),
            win_mean: SlidingBuffer::with_capacity(capacity),
            win_var: SlidingBuffer::with_capacity(capacity),
            stats_base: 0,
            qt: Vec::new(),
            qt_base: 0,
            radicands: Vec::new(),
            prev_mp: None,
            diffs: RunningMoments::default(),
        };
        Ok(Self {
            sr: Self::make_sr(&cfg)?,
            cfg,
            state,
        })
    }

    fn make_sr(cfg: &EngineConfig) -> Result<Option<SpectralResidual>> {
        match cfg.judge {
            Judge::DsWithSrFallback | Judge::SrOnly => Ok(Some(SpectralResidual::new(cfg.sr)?)),
            Judge::Ds | Judge::MpDiff => Ok(None),
        }
    }

    pub fn config(&self) -> &EngineConfig {
        &self.cfg
    }

    /// Number of statuses ingested so far.
    pub fn ingested(&self) -> u64 {
        self.state.ingested
    }

    /// Timestamp of the oldest cached status.
    pub fn cache_start(&self) -> u64 {
        self.state.ingested - self.state.values.len() as u64
    }

    /// Cached statuses, oldest first, in original units.
    pub fn cached_values(&self) -> Vec<f64> {
        let anchor = self.state.anchor.unwrap_or(0.0);
        self.state.values.as_slice().iter().map(|v| v + anchor).collect()
    }

    /// Stored decisions aligned with [`Detector::cached_values`].
    pub fn cached_labels(&self) -> &[bool] {
        self.state.labels.as_slice()
    }

    /// Inner products of the current query with each admissible reference,
    /// with the start of the first reference. Computed on the anchored values.
    pub fn inner_products(&self) -> (u64, &[f64]) {
        (self.state.qt_base, &self.state.qt)
    }

    /// The anchored values the kernel runs on.
    pub fn kernel_values(&self) -> &[f64] {
        self.state.values.as_slice()
    }

    /// Distances from the latest query to every admissible reference. Empty
    /// while no reference is admissible yet (warm-up).
    pub fn distance_profile(&self) -> Vec<DistanceProfileEntry> {
        let s = &self.state;
        s.radicands
            .iter()
            .enumerate()
            .map(|(k, r)| DistanceProfileEntry {
                reference_start: s.qt_base + k as u64,
                distance: r.sqrt(),
            })
            .collect()
    }

    /// Process one status and judge the query ending at it.
    pub fn ingest(&mut self, x: f64) -> Result<DetectionOutcome> {
        let t = self.state.ingested;
        if !x.is_finite() {
            return Err(Error::NonFinite { timestamp: t, value: x });
        }
        let m = self.cfg.window;
        let anchor = *self.state.anchor.get_or_insert(x);
        let v = x - anchor;

        let st = &mut self.state;
        st.ingested += 1;
        st.values.push_back(v);
        st.labels.push_back(false);
        let evicted = if st.values.len() > self.cfg.cache {
            st.labels.pop_front();
            st.values.pop_front()
        } else {
            None
        };
        st.sums.update(v, evicted, st.values.as_slice());
        let lo = t + 1 - st.values.len() as u64;

        let mut outcome = DetectionOutcome {
            timestamp: t,
            value: x,
            mp: None,
            mp_index: None,
            ds: None,
            decision: false,
            decided_by: DecidedBy::Warmup,
        };
        if st.values.len() < m {
            return Ok(outcome);
        }
        let query_start = t + 1 - m as u64;
        self.record_window_stats(query_start, lo)?;

        if self.cfg.judge == Judge::SrOnly {
            let raw = self.raw_window(query_start);
            let sr = self.sr.as_mut().expect("SR judge has an analyser");
            outcome.decision = sr.decide(&raw)?;
            outcome.decided_by = DecidedBy::Sr;
            self.store_decision(outcome.decision);
            return Ok(outcome);
        }

        let nearest = self.update_profile(query_start, lo)?;
        let Some(nearest) = nearest else {
            self.store_decision(false);
            return Ok(outcome);
        };
        outcome.mp = Some(nearest.value);
        outcome.mp_index = Some(nearest.index);

        let warm = self.state.radicands.len() >= self.cfg.warmup_min;
        match self.cfg.judge {
            Judge::MpDiff => self.judge_by_mp_diff(nearest.value, warm, &mut outcome),
            Judge::Ds | Judge::DsWithSrFallback => {
                self.judge_by_significance(query_start, lo, nearest, warm, &mut outcome)?
            }
            Judge::SrOnly => unreachable!(),
        }
        self.store_decision(outcome.decision);
        Ok(outcome)
    }

    /// Run a whole series through a fresh detector.
    pub fn run(cfg: EngineConfig, series: &[f64]) -> Result<Vec<DetectionOutcome>> {
        let mut det = Self::new(cfg)?;
        series.iter().map(|&x| det.ingest(x)).collect()
    }

    fn store_decision(&mut self, decision: bool) {
        if let Some(last) = self.state.labels.as_mut_slice().last_mut() {
            *last = decision;
        }
    }

    fn raw_window(&self, start: u64) -> Vec<f64> {
        let anchor = self.state.anchor.unwrap_or(0.0);
        let off = (start - self.cache_start()) as usize;
        self.state.values.as_slice()[off..off + self.cfg.window]
            .iter()
            .map(|v| v + anchor)
            .collect()
    }

    fn record_window_stats(&mut self, query_start: u64, lo: u64) -> Result<()> {
        let m = self.cfg.window;
        let st = &mut self.state;
        let stats = st.sums.stats((query_start - lo) as usize, m)?;
        if st.win_mean.is_empty() {
            st.stats_base = query_start;
        }
        st.win_mean.push_back(stats.mean);
        st.win_var.push_back(stats.variance());
        while st.stats_base < lo {
            st.win_mean.pop_front();
            st.win_var.pop_front();
            st.stats_base += 1;
        }
        Ok(())
    }

    /// Slide the inner products to the new query, recompute the distance
    /// profile and return its minimum (oldest index on ties).
    fn update_profile(&mut self, query_start: u64, lo: u64) -> Result<Option<LeftProfileEntry>> {
        let m = self.cfg.window;
        let excl = self.cfg.exclusion as u64;
        let st = &mut self.state;
        if query_start < lo + excl {
            st.qt.clear();
            st.radicands.clear();
            return Ok(None);
        }
        let count = (query_start - excl - lo + 1) as usize;
        let x = st.values.as_slice();
        let q_off = (query_start - lo) as usize;
        let x_new = x[q_off + m - 1];

        // Carry the previous step's products forward. Reference `j` comes
        // from reference `j - 1` of the previous query.
        let prev_len = st.qt.len();
        if prev_len == 0 {
            st.qt.resize(count, 0.0);
        } else {
            let shift = (lo - st.qt_base) as usize;
            debug_assert!(shift <= 1);
            debug_assert_eq!(prev_len + 1 - shift, count);
            let x_old = if q_off > 0 { x[q_off - 1] } else { 0.0 };
            if shift == 0 {
                st.qt.push(0.0);
                for k in (1..count).rev() {
                    st.qt[k] = st.qt[k - 1] - x[k - 1] * x_old + x[k + m - 1] * x_new;
                }
            } else {
                // Entry k of the previous vector was reference lo - 1 + k.
                for k in 1..count {
                    // x[k - 1] is cache offset k - 1 == timestamp lo + k - 1.
                    st.qt[k] = st.qt[k] - x[k - 1] * x_old + x[k + m - 1] * x_new;
                }
                st.qt.truncate(count);
            }
        }
        st.qt[0] = math::dot(&x[..m], &x[q_off..q_off + m]);
        st.qt_base = lo;

        let mf = m as f64;
        let sb = (lo - st.stats_base) as usize;
        let means = &st.win_mean.as_slice()[sb..];
        let vars = &st.win_var.as_slice()[sb..];
        let query = WindowStats {
            mean: means[q_off],
            std: vars[q_off].sqrt(),
            sum: 0.0,
            sum_sq: 0.0,
        };
        st.radicands.clear();
        st.radicands.reserve(count);
        let mut best = (f64::INFINITY, 0usize);
        for (k, &ip) in st.qt.iter().enumerate() {
            let reference = WindowStats {
                mean: means[k],
                std: vars[k].sqrt(),
                sum: 0.0,
                sum_sq: 0.0,
            };
            let radicand = match self.cfg.distance {
                DistanceKind::MeanNormalized => {
                    let r = mf * (vars[k] + vars[q_off]) - 2.0 * (ip - mf * means[k] * query.mean);
                    if r < 0.0 {
                        math::clamp_radicand(r, math::radicand_scale(ip, &reference, &query, mf))?
                    } else {
                        r
                    }
                }
                DistanceKind::ZNormalized => znorm_radicand(ip, &reference, &query, mf),
            };
            st.radicands.push(radicand);
            if radicand < best.0 {
                best = (radicand, k);
            }
        }
        Ok(Some(LeftProfileEntry {
            value: best.0.sqrt(),
            index: lo + best.1 as u64,
        }))
    }

    fn judge_by_significance(
        &mut self,
        query_start: u64,
        lo: u64,
        nearest: LeftProfileEntry,
        warm: bool,
        outcome: &mut DetectionOutcome,
    ) -> Result<()> {
        let m = self.cfg.window;
        let x = self.state.values.as_slice();
        let q_off = (query_start - lo) as usize;
        let n_off = (nearest.index - lo) as usize;
        let ds = distance_significance(&x[q_off..q_off + m], &x[n_off..n_off + m], self.cfg.strip())?;
        outcome.ds = Some(ds.value);
        if !warm {
            return Ok(());
        }
        let neighbor_anomalous = self.state.labels.as_slice()[n_off + m - 1];
        let sr_active = neighbor_anomalous && self.sr.is_some();
        let window = if sr_active {
            self.raw_window(query_start)
        } else {
            Vec::new()
        };
        let (decision, by) = decide(ds, neighbor_anomalous, &window, self.cfg.threshold, self.sr.as_mut())?;
        outcome.decision = decision;
        outcome.decided_by = by;
        Ok(())
    }

    fn judge_by_mp_diff(&mut self, mp: f64, warm: bool, outcome: &mut DetectionOutcome) {
        let st = &mut self.state;
        let diff = st.prev_mp.map_or(0.0, |prev| mp - prev);
        st.prev_mp = Some(mp);
        if !warm {
            return;
        }
        if st.diffs.count >= self.cfg.window as u64 {
            let sd = st.diffs.std();
            outcome.decision = sd > EPSILON && diff - st.diffs.mean > self.cfg.mp_diff_sigma * sd;
            outcome.decided_by = DecidedBy::MpDiff;
        }
        st.diffs.push(diff);
    }
}

/// Squared z-normalized distance from the correlation form. A constant
/// window has no z-normalization; two constant windows are treated as
/// identical and a constant against a varying one as uncorrelated at
/// distance `sqrt(m)`.
fn znorm_radicand(ip: f64, a: &WindowStats, b: &WindowStats, m: f64) -> f64 {
    let a_flat = a.std <= EPSILON;
    let b_flat = b.std <= EPSILON;
    if a_flat || b_flat {
        return if a_flat && b_flat { 0.0 } else { m };
    }
    let corr = (ip - m * a.mean * b.mean) / (m * a.std * b.std);
    (2.0 * m * (1.0 - corr)).max(0.0)
}
