//! Short-time Fourier band power and idle-referenced z-scoring.

use ndarray::{s, Array2, ArrayView2, Axis};
use rustfft::{num_complex::Complex64, FftPlanner};

use super::epoch::{TrialLayout, TrialSegments};
use super::recording::{FrequencyBand, MultiChannelRecording};
use crate::error::{Error, Result};

pub const DEFAULT_WINDOW_S: f64 = 0.5;
pub const DEFAULT_HOP_S: f64 = 0.125;

/// Mean over STFT frames of the band-integrated power, per channel (µV²).
///
/// Frames use a periodic-free symmetric Hann window of `window_s` seconds
/// advanced by `hop_s`; each frame's one-sided PSD is summed over the bins
/// inside `band` (edges inclusive) and multiplied by the bin width.
pub fn band_power(segment: &MultiChannelRecording, band: FrequencyBand, window_s: f64, hop_s: f64) -> Result<Vec<f64>> {
    band_power_rows(segment.data(), segment.sample_rate_hz(), band, window_s, hop_s)
}

pub fn band_power_rows(
    data: ArrayView2<'_, f64>,
    sample_rate_hz: f64,
    band: FrequencyBand,
    window_s: f64,
    hop_s: f64,
) -> Result<Vec<f64>> {
    Ok(BandPowerEstimator::new(sample_rate_hz, window_s, hop_s)?.power_rows(data, &[band])?.remove(0))
}

/// Reusable STFT plan for one sample rate and window geometry.
pub struct BandPowerEstimator {
    sample_rate_hz: f64,
    window: Vec<f64>,
    hop: usize,
    fft: std::sync::Arc<dyn rustfft::Fft<f64>>,
    psd_scale: f64,
}

impl BandPowerEstimator {
    pub fn new(sample_rate_hz: f64, window_s: f64, hop_s: f64) -> Result<Self> {
        let n = (window_s * sample_rate_hz).round() as usize;
        let hop = (hop_s * sample_rate_hz).round() as usize;
        if n < 2 || hop == 0 {
            return Err(Error::InvalidArgument(format!(
                "STFT window {window_s} s / hop {hop_s} s too short at {sample_rate_hz} Hz"
            )));
        }
        let window: Vec<f64> = (0..n)
            .map(|i| 0.5 - 0.5 * (2.0 * std::f64::consts::PI * i as f64 / (n - 1) as f64).cos())
            .collect();
        let energy: f64 = window.iter().map(|w| w * w).sum();
        let fft = FftPlanner::new().plan_fft_forward(n);
        // One-sided PSD times bin width: 2 |X|^2 / (fs * sum w^2) * fs / n.
        let psd_scale = 2.0 / (energy * n as f64);
        Ok(Self {
            sample_rate_hz,
            window,
            hop,
            fft,
            psd_scale,
        })
    }

    pub fn window_len(&self) -> usize {
        self.window.len()
    }

    /// Band power of every row for each requested band: `out[band][row]`.
    pub fn power_rows(&self, data: ArrayView2<'_, f64>, bands: &[FrequencyBand]) -> Result<Vec<Vec<f64>>> {
        let n = self.window.len();
        let len = data.ncols();
        if n > len {
            return Err(Error::WindowTooLong {
                window: n,
                available: len,
            });
        }
        for b in bands {
            b.check_nyquist(self.sample_rate_hz)?;
        }
        let df = self.sample_rate_hz / n as f64;
        let bins: Vec<Vec<usize>> = bands
            .iter()
            .map(|b| (0..=n / 2).filter(|&k| b.contains(k as f64 * df)).collect())
            .collect();
        let n_frames = (len - n) / self.hop + 1;

        let mut out = vec![vec![0.0; data.nrows()]; bands.len()];
        let mut buf = vec![Complex64::new(0.0, 0.0); n];
        let mut scratch = vec![Complex64::new(0.0, 0.0); self.fft.get_inplace_scratch_len()];
        for (ch, row) in data.axis_iter(Axis(0)).enumerate() {
            for frame in 0..n_frames {
                let start = frame * self.hop;
                for (i, c) in buf.iter_mut().enumerate() {
                    *c = Complex64::new(row[start + i] * self.window[i], 0.0);
                }
                self.fft.process_with_scratch(&mut buf, &mut scratch);
                for (b, bin_set) in bins.iter().enumerate() {
                    let p: f64 = bin_set
                        .iter()
                        .map(|&k| {
                            // DC and Nyquist have no mirrored twin.
                            let one_sided = if k == 0 || 2 * k == n { 0.5 } else { 1.0 };
                            buf[k].norm_sqr() * one_sided
                        })
                        .sum();
                    out[b][ch] += p * self.psd_scale;
                }
            }
            for o in out.iter_mut() {
                o[ch] /= n_frames as f64;
            }
        }
        Ok(out)
    }
}

/// Which part of a trial a value belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Idle,
    Movement,
}

/// Per-channel, per-trial band power for the idle and movement phases.
///
/// `idle` and `movement` are channels x trials. After [`zscore_to_idle`] the
/// values are z-scores and channels whose idle power had no spread are listed
/// in `invalid_channels` with NaN values.
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct BandPowerSeries {
    pub band_name: String,
    pub band: FrequencyBand,
    pub labels: Vec<String>,
    pub idle: Array2<f64>,
    pub movement: Array2<f64>,
    pub zscored: bool,
    pub invalid_channels: Vec<usize>,
}

impl BandPowerSeries {
    pub fn n_channels(&self) -> usize {
        self.labels.len()
    }

    pub fn n_trials(&self) -> usize {
        self.idle.ncols()
    }

    pub fn channel_index(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn is_valid(&self, channel: usize) -> bool {
        !self.invalid_channels.contains(&channel)
    }

    pub fn phase(&self, phase: Phase) -> &Array2<f64> {
        match phase {
            Phase::Idle => &self.idle,
            Phase::Movement => &self.movement,
        }
    }

    /// Mean over trials of one channel in one phase.
    pub fn trial_mean(&self, channel: usize, phase: Phase) -> f64 {
        self.phase(phase).row(channel).mean().unwrap_or(f64::NAN)
    }
}

/// Band power of every trial segment for several bands at once.
pub fn trial_band_powers(
    trials: &[TrialSegments],
    bands: &[(&str, FrequencyBand)],
    window_s: f64,
    hop_s: f64,
) -> Result<Vec<BandPowerSeries>> {
    let first = trials
        .first()
        .ok_or_else(|| Error::InvalidArgument("no trials to analyse".into()))?;
    let fs = first.idle.sample_rate_hz();
    let n_ch = first.idle.n_channels();
    let labels = first.idle.labels().to_vec();
    let est = BandPowerEstimator::new(fs, window_s, hop_s)?;
    let band_list: Vec<FrequencyBand> = bands.iter().map(|(_, b)| *b).collect();

    let mut series: Vec<BandPowerSeries> = bands
        .iter()
        .map(|(name, band)| BandPowerSeries {
            band_name: name.to_string(),
            band: *band,
            labels: labels.clone(),
            idle: Array2::zeros((n_ch, trials.len())),
            movement: Array2::zeros((n_ch, trials.len())),
            zscored: false,
            invalid_channels: Vec::new(),
        })
        .collect();
    for (k, trial) in trials.iter().enumerate() {
        let idle = est.power_rows(trial.idle.data(), &band_list)?;
        let mv = est.power_rows(trial.movement.data(), &band_list)?;
        for (b, s) in series.iter_mut().enumerate() {
            for ch in 0..n_ch {
                s.idle[[ch, k]] = idle[b][ch];
                s.movement[[ch, k]] = mv[b][ch];
            }
        }
    }
    Ok(series)
}

/// Band powers of every trial of a concatenated recording described by
/// `layout`, without copying the segments.
pub fn layout_band_powers(
    data: ArrayView2<'_, f64>,
    labels: &[String],
    sample_rate_hz: f64,
    layout: &TrialLayout,
    bands: &[(&str, FrequencyBand)],
    window_s: f64,
    hop_s: f64,
) -> Result<Vec<BandPowerSeries>> {
    let n_ch = data.nrows();
    if labels.len() != n_ch {
        return Err(Error::InvalidArgument("one label per row is required".into()));
    }
    if layout.total_samples() > data.ncols() {
        return Err(Error::IndexOutOfRange {
            what: "trial layout sample",
            index: layout.total_samples(),
            len: data.ncols(),
        });
    }
    let est = BandPowerEstimator::new(sample_rate_hz, window_s, hop_s)?;
    let band_list: Vec<FrequencyBand> = bands.iter().map(|(_, b)| *b).collect();
    let n_trials = layout.n_trials();
    let mut series: Vec<BandPowerSeries> = bands
        .iter()
        .map(|(name, band)| BandPowerSeries {
            band_name: name.to_string(),
            band: *band,
            labels: labels.to_vec(),
            idle: Array2::zeros((n_ch, n_trials)),
            movement: Array2::zeros((n_ch, n_trials)),
            zscored: false,
            invalid_channels: Vec::new(),
        })
        .collect();
    for k in 0..n_trials {
        let idle = est.power_rows(data.slice(s![.., layout.idle[k].clone()]), &band_list)?;
        let mv = est.power_rows(data.slice(s![.., layout.movement[k].clone()]), &band_list)?;
        for (b, s) in series.iter_mut().enumerate() {
            for ch in 0..n_ch {
                s.idle[[ch, k]] = idle[b][ch];
                s.movement[[ch, k]] = mv[b][ch];
            }
        }
    }
    Ok(series)
}

/// z = (p - mean_idle) / sd_idle per channel, using the sample standard
/// deviation of that channel's idle trials; applied to both phases.
pub fn zscore_to_idle(powers: &BandPowerSeries) -> Result<BandPowerSeries> {
    let n_idle = powers.idle.ncols();
    if n_idle < 2 {
        return Err(Error::InvalidArgument(format!(
            "z-scoring needs at least 2 idle trials, got {n_idle}"
        )));
    }
    let mut out = powers.clone();
    out.zscored = true;
    out.invalid_channels.clear();
    for ch in 0..powers.n_channels() {
        let idle = powers.idle.row(ch);
        let mean = idle.sum() / n_idle as f64;
        let var = idle.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n_idle - 1) as f64;
        let sd = var.sqrt();
        if !(sd > 0.0 && sd.is_finite()) || powers.invalid_channels.contains(&ch) {
            out.invalid_channels.push(ch);
            out.idle.row_mut(ch).fill(f64::NAN);
            out.movement.row_mut(ch).fill(f64::NAN);
            continue;
        }
        out.idle.row_mut(ch).mapv_inplace(|p| (p - mean) / sd);
        out.movement.row_mut(ch).mapv_inplace(|p| (p - mean) / sd);
    }
    Ok(out)
}
