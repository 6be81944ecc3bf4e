//! Offline reference implementations used as test oracles.
//!
//! Everything here is written from the definitions with plain loops and
//! shares no code with the library.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `|a - b| <= tol * max(1, |a|, |b|)`.
pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * 1f64.max(a.abs()).max(b.abs())
}

pub fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

/// Euclidean distance between mean-centred windows, straight from the
/// definition.
pub fn centred_distance(a: &[f64], b: &[f64]) -> f64 {
    let (ma, mb) = (mean(a), mean(b));
    let mut acc = 0.0;
    for i in 0..a.len() {
        let d = (a[i] - ma) - (b[i] - mb);
        acc += d * d;
    }
    acc.sqrt()
}

/// Euclidean distance between z-normalized windows.
pub fn znormed_distance(a: &[f64], b: &[f64]) -> f64 {
    let (ma, mb) = (mean(a), mean(b));
    let sd = |x: &[f64], mu: f64| (x.iter().map(|v| (v - mu) * (v - mu)).sum::<f64>() / x.len() as f64).sqrt();
    let (sa, sb) = (sd(a, ma), sd(b, mb));
    let mut acc = 0.0;
    for i in 0..a.len() {
        let d = (a[i] - ma) / sa - (b[i] - mb) / sb;
        acc += d * d;
    }
    acc.sqrt()
}

/// Last point's share of the squared strip distance, strips centred on their
/// own means. The flag is set when the strip distance vanishes.
pub fn strip_significance(query: &[f64], neighbor: &[f64], strip: usize) -> (f64, bool) {
    let m = query.len();
    let q = &query[m - strip..];
    let n = &neighbor[m - strip..];
    let (mq, mn) = (mean(q), mean(n));
    let terms: Vec<f64> = (0..strip)
        .map(|i| {
            let d = (q[i] - mq) - (n[i] - mn);
            d * d
        })
        .collect();
    let den: f64 = terms.iter().sum();
    let num = terms[strip - 1];
    if den < 1e-12 {
        (if num < 1e-12 { 0.0 } else { 1.0 }, true)
    } else {
        (num / den, false)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleRow {
    pub mp: Option<f64>,
    pub mp_index: Option<usize>,
    pub ds: Option<f64>,
    /// Only meaningful for the DS-only judge.
    pub decision: bool,
}

#[derive(Debug, Clone, Copy)]
pub struct OracleParams {
    pub m: usize,
    /// `None` keeps the whole history.
    pub cache: Option<usize>,
    pub exclusion: usize,
    pub strip: usize,
    pub threshold: f64,
    pub warmup_min: usize,
    pub znorm: bool,
}

impl OracleParams {
    pub fn new(m: usize, cache: Option<usize>, strip: usize, threshold: f64) -> Self {
        let exclusion = m / 2;
        let max_refs = cache.map_or(usize::MAX, |c| c + 1 - m - exclusion);
        Self {
            m,
            cache,
            exclusion,
            strip: strip.min(m),
            threshold,
            warmup_min: m.min(max_refs).max(1),
            znorm: false,
        }
    }
}

/// Brute-force left matrix profile over the cache, with DS-only decisions.
///
/// At time `t` the cache holds `x[lo..=t]`, `lo = max(0, t + 1 - c)`. The query
/// starts at `s = t + 1 - m`; references start at `j` with
/// `lo <= j <= s - exclusion`. Ties go to the oldest reference.
pub fn left_profile(x: &[f64], p: &OracleParams) -> Vec<OracleRow> {
    let m = p.m;
    let mut rows = Vec::with_capacity(x.len());
    for t in 0..x.len() {
        let lo = p.cache.map_or(0, |c| (t + 1).saturating_sub(c));
        let mut row = OracleRow {
            mp: None,
            mp_index: None,
            ds: None,
            decision: false,
        };
        if t + 1 < m || t + 1 - m < lo + p.exclusion {
            rows.push(row);
            continue;
        }
        let s = t + 1 - m;
        let query = &x[s..=t];
        let mut best = (f64::INFINITY, 0);
        for j in lo..=s - p.exclusion {
            let d = if p.znorm {
                znormed_distance(&x[j..j + m], query)
            } else {
                centred_distance(&x[j..j + m], query)
            };
            if d < best.0 {
                best = (d, j);
            }
        }
        let refs = s - p.exclusion - lo + 1;
        let (ds, _) = strip_significance(query, &x[best.1..best.1 + m], p.strip);
        row.mp = Some(best.0);
        row.mp_index = Some(best.1);
        row.ds = Some(ds);
        if refs >= p.warmup_min {
            row.decision = ds > p.threshold;
        }
        rows.push(row);
    }
    rows
}

/// Direct O(n^2) discrete Fourier transform; `inverse` includes the `1/n`.
pub fn dft(re: &[f64], im: &[f64], inverse: bool) -> (Vec<f64>, Vec<f64>) {
    let n = re.len();
    let sign = if inverse { 1.0 } else { -1.0 };
    let mut out_re = vec![0.0; n];
    let mut out_im = vec![0.0; n];
    for k in 0..n {
        let (mut sr, mut si) = (0.0, 0.0);
        for t in 0..n {
            // Reduce the index first so the angle stays small and accurate.
            let idx = (k * t) % n;
            let ang = sign * std::f64::consts::TAU * idx as f64 / n as f64;
            let (s, c) = ang.sin_cos();
            sr += re[t] * c - im[t] * s;
            si += re[t] * s + im[t] * c;
        }
        if inverse {
            sr /= n as f64;
            si /= n as f64;
        }
        out_re[k] = sr;
        out_im[k] = si;
    }
    (out_re, out_im)
}

/// Spectral-residual saliency of `window`, using the direct transform.
pub fn sr_saliency(window: &[f64], k: usize, q: usize, eps: f64) -> Vec<f64> {
    let mu = mean(window);
    let window: Vec<f64> = window.iter().map(|v| v - mu).collect();
    // The estimate is extrapolated from the window without its last point.
    let y = &window[..window.len() - 1];
    let n = y.len();
    let mut grad = 0.0;
    for i in 1..=k {
        grad += (y[n - 1] - y[n - 1 - i]) / i as f64;
    }
    grad /= k as f64;
    let next = y[n - k] + grad * k as f64;
    let mut ext = window.clone();
    ext.extend(std::iter::repeat_n(next, k));
    let len = ext.len();

    let (re, im) = dft(&ext, &vec![0.0; len], false);
    let amp: Vec<f64> = (0..len).map(|i| re[i].hypot(im[i])).collect();
    let log_amp: Vec<f64> = amp.iter().map(|a| (a + eps).ln()).collect();
    let half_left = (q - 1) / 2;
    let half_right = q / 2;
    let mut res_re = vec![0.0; len];
    let mut res_im = vec![0.0; len];
    for i in 0..len {
        if amp[i] <= eps {
            continue;
        }
        let from = i.saturating_sub(half_left);
        let to = (i + half_right).min(len - 1);
        let avg = log_amp[from..=to].iter().sum::<f64>() / (to - from + 1) as f64;
        let scale = (log_amp[i] - avg).exp() / amp[i];
        res_re[i] = re[i] * scale;
        res_im[i] = im[i] * scale;
    }
    let (back_re, back_im) = dft(&res_re, &res_im, true);
    (0..len).map(|i| back_re[i].hypot(back_im[i])).collect()
}

/// Random walk with seasonal drift and noise; values stay O(10).
pub fn random_series(seed: u64, n: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut level = 0.0;
    (0..n)
        .map(|i| {
            level += rng.random_range(-0.3..0.3);
            level *= 0.995;
            level + 2.0 * (i as f64 * std::f64::consts::TAU / 24.0).sin() + rng.random_range(-1.0..1.0)
        })
        .collect()
}

pub fn uniform(seed: u64, n: usize, lo: f64, hi: f64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.random_range(lo..hi)).collect()
}
