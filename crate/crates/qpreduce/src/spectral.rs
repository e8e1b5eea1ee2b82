//! Welch power spectra, peak sets and trajectory comparison.

use std::f64::consts::PI;

use qpreduce_core::simkit::{max_abs_diff, rms_diff, Trajectory};
use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

/// One-sided power spectral density.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Psd {
    /// Bin frequencies in Hz, from 0 to the Nyquist frequency.
    pub frequencies: Vec<f64>,
    pub density: Vec<f64>,
}

impl Psd {
    pub fn bin_width(&self) -> f64 {
        self.frequencies.get(1).copied().unwrap_or(0.0)
    }

    /// `integral PSD df` by the rectangle rule.
    pub fn total_power(&self) -> f64 {
        self.density.iter().sum::<f64>() * self.bin_width()
    }
}

fn hann(n: usize) -> Vec<f64> {
    // Periodic Hann, as used for spectral estimation.
    (0..n).map(|i| 0.5 - 0.5 * (2.0 * PI * i as f64 / n as f64).cos()).collect()
}

/// Welch estimate with a Hann window; each segment has its mean removed.
pub fn welch_psd(signal: &[f64], sample_rate: f64, segment_len: usize, overlap: f64) -> Result<Psd> {
    if segment_len < 2 || segment_len > signal.len() {
        return Err(CliError::Segment {
            segment: segment_len,
            len: signal.len(),
        });
    }
    if !(0.0..1.0).contains(&overlap) || !(sample_rate > 0.0) {
        return Err(CliError::Config(format!(
            "Welch overlap must be in [0, 1) and the sample rate positive (got {overlap}, {sample_rate})"
        )));
    }
    let window = hann(segment_len);
    let norm = sample_rate * window.iter().map(|w| w * w).sum::<f64>();
    let hop = ((segment_len as f64 * (1.0 - overlap)).round() as usize).max(1);
    let fft = FftPlanner::new().plan_fft_forward(segment_len);
    let bins = segment_len / 2 + 1;
    let mut acc = vec![0.0; bins];
    let mut segments = 0usize;
    let mut buf = vec![Complex64::new(0.0, 0.0); segment_len];
    let mut start = 0;
    while start + segment_len <= signal.len() {
        let seg = &signal[start..start + segment_len];
        let mean = seg.iter().sum::<f64>() / segment_len as f64;
        for ((b, x), w) in buf.iter_mut().zip(seg).zip(&window) {
            *b = Complex64::new((x - mean) * w, 0.0);
        }
        fft.process(&mut buf);
        for (a, b) in acc.iter_mut().zip(&buf) {
            *a += b.norm_sqr();
        }
        segments += 1;
        start += hop;
    }
    let nyquist = segment_len % 2 == 0;
    let density = acc
        .iter()
        .enumerate()
        .map(|(k, a)| {
            let one_sided = if k == 0 || (nyquist && k == bins - 1) { 1.0 } else { 2.0 };
            one_sided * a / (norm * segments as f64)
        })
        .collect();
    let frequencies = (0..bins).map(|k| k as f64 * sample_rate / segment_len as f64).collect();
    Ok(Psd { frequencies, density })
}

/// Local maxima whose power is within `threshold_db` of the largest bin, strongest first.
pub fn peaks(psd: &Psd, threshold_db: f64) -> Vec<usize> {
    let d = &psd.density;
    let max = d.iter().copied().fold(0.0, f64::max);
    if max <= 0.0 {
        return Vec::new();
    }
    let floor = max * 10f64.powf(-threshold_db / 10.0);
    let mut out: Vec<usize> = (0..d.len())
        .filter(|&k| {
            let left = k == 0 || d[k] >= d[k - 1];
            let right = k + 1 == d.len() || d[k] > d[k + 1];
            left && right && d[k] >= floor
        })
        .collect();
    out.sort_by(|&a, &b| d[b].total_cmp(&d[a]).then(a.cmp(&b)));
    out
}

/// True when every significant peak of `a` has a significant peak of `b` within `tolerance_bins`.
pub fn peaks_match(a: &[usize], b: &[usize], tolerance_bins: usize) -> bool {
    a.iter().all(|&p| b.iter().any(|&q| p.abs_diff(q) <= tolerance_bins))
}

/// Spectral settings used by [`compare`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PsdConfig {
    pub segment_len: usize,
    pub overlap: f64,
    /// Signals are subsampled to about this rate (Hz) before the estimate.
    pub target_rate: Option<f64>,
    pub threshold_db: f64,
    pub tolerance_bins: usize,
}

impl Default for PsdConfig {
    fn default() -> Self {
        Self {
            segment_len: 1024,
            overlap: 0.5,
            target_rate: Some(20.0),
            threshold_db: 20.0,
            tolerance_bins: 1,
        }
    }
}

impl PsdConfig {
    /// Subsampling factor for a trajectory sampled every `dt` seconds.
    pub fn decimation(&self, dt: f64) -> usize {
        match self.target_rate {
            Some(rate) if rate > 0.0 => ((1.0 / (rate * dt)).floor() as usize).max(1),
            _ => 1,
        }
    }

    /// PSD of `signal` sampled every `dt`, after subsampling.
    pub fn psd(&self, signal: &[f64], dt: f64) -> Result<Psd> {
        let k = self.decimation(dt);
        let sub: Vec<f64> = signal.iter().step_by(k).copied().collect();
        welch_psd(&sub, 1.0 / (dt * k as f64), self.segment_len.min(sub.len()), self.overlap)
    }
}

/// Per-state errors and spectral agreement of `b` against the reference `a`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub states: Vec<usize>,
    pub rms_error: Vec<f64>,
    pub max_error: Vec<f64>,
    /// Peak frequencies (Hz) of `a` per state, strongest first.
    pub peaks_reference: Vec<Vec<f64>>,
    pub peaks_candidate: Vec<Vec<f64>>,
    pub psd_match_per_state: Vec<bool>,
    pub psd_match: bool,
}

/// Linear interpolation of `b` onto the sample times of `a` that fall inside `b`'s span.
fn aligned(a: &Trajectory<f64>, b: &Trajectory<f64>) -> Result<(Vec<usize>, Trajectory<f64>)> {
    let same = a.len() == b.len() && (a.t0 - b.t0).abs() <= 1e-12 && (a.dt - b.dt).abs() <= 1e-12 * a.dt;
    if same {
        return Ok(((0..a.len()).collect(), b.clone()));
    }
    let (b0, b1) = (b.time(0), b.time(b.len().saturating_sub(1)));
    let keep: Vec<usize> = (0..a.len()).filter(|&i| a.time(i) >= b0 - 1e-12 && a.time(i) <= b1 + 1e-12).collect();
    if keep.len() < 2 || b.len() < 2 {
        return Err(CliError::Grid);
    }
    let mut data = Vec::with_capacity(keep.len() * b.dim);
    for &i in &keep {
        let s = ((a.time(i) - b.t0) / b.dt).clamp(0.0, (b.len() - 1) as f64);
        let k = (s.floor() as usize).min(b.len() - 2);
        let f = s - k as f64;
        let (lo, hi) = (b.state(k), b.state(k + 1));
        data.extend(lo.iter().zip(hi).map(|(x, y)| x + f * (y - x)));
    }
    Ok((
        keep.clone(),
        Trajectory {
            t0: a.time(keep[0]),
            dt: a.dt,
            dim: b.dim,
            data,
            meta: b.meta.clone(),
        },
    ))
}

pub fn compare(a: &Trajectory<f64>, b: &Trajectory<f64>, states: &[usize], cfg: &PsdConfig) -> Result<ComparisonReport> {
    if states.iter().any(|&k| k >= a.dim || k >= b.dim) {
        return Err(CliError::Config(format!("compared states {states:?} exceed the trajectory dimension")));
    }
    let (keep, b) = aligned(a, b)?;
    let mut report = ComparisonReport {
        states: states.to_vec(),
        rms_error: Vec::new(),
        max_error: Vec::new(),
        peaks_reference: Vec::new(),
        peaks_candidate: Vec::new(),
        psd_match_per_state: Vec::new(),
        psd_match: true,
    };
    for &k in states {
        let xa: Vec<f64> = keep.iter().map(|&i| a.state(i)[k]).collect();
        let xb = b.component(k);
        report.rms_error.push(rms_diff(&xa, &xb));
        report.max_error.push(max_abs_diff(&xa, &xb));
        let (pa, pb) = (cfg.psd(&xa, a.dt)?, cfg.psd(&xb, a.dt)?);
        let (ka, kb) = (peaks(&pa, cfg.threshold_db), peaks(&pb, cfg.threshold_db));
        let ok = peaks_match(&ka, &kb, cfg.tolerance_bins);
        report.peaks_reference.push(ka.iter().map(|&i| pa.frequencies[i]).collect());
        report.peaks_candidate.push(kb.iter().map(|&i| pb.frequencies[i]).collect());
        report.psd_match_per_state.push(ok);
        report.psd_match &= ok;
    }
    Ok(report)
}
