//! Simulated EEG, EMG contamination and reference-channel augmentation.

use std::collections::HashSet;

use ndarray::{concatenate, Array2, Axis};
use rand::seq::index::sample;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed;
use crate::signal::filter::{edge_padding, SosFilter};
use crate::signal::{ChannelKind, FrequencyBand, MultiChannelRecording};

/// 32-channel cap layout: label and position on a unit-radius head map
/// (x to the right, y to the nose).
pub const MONTAGE_32: [(&str, f64, f64); 32] = [
    ("Fp1", -0.25, 0.76),
    ("Fp2", 0.25, 0.76),
    ("F7", -0.65, 0.47),
    ("F3", -0.33, 0.42),
    ("Fz", 0.0, 0.4),
    ("F4", 0.33, 0.42),
    ("F8", 0.65, 0.47),
    ("FC5", -0.58, 0.2),
    ("FC1", -0.19, 0.2),
    ("FC2", 0.19, 0.2),
    ("FC6", 0.58, 0.2),
    ("T7", -0.8, 0.0),
    ("C3", -0.4, 0.0),
    ("Cz", 0.0, 0.0),
    ("C4", 0.4, 0.0),
    ("T8", 0.8, 0.0),
    ("TP9", -0.95, -0.25),
    ("CP5", -0.58, -0.2),
    ("CP1", -0.19, -0.2),
    ("CP2", 0.19, -0.2),
    ("CP6", 0.58, -0.2),
    ("TP10", 0.95, -0.25),
    ("P7", -0.65, -0.47),
    ("P3", -0.33, -0.42),
    ("Pz", 0.0, -0.4),
    ("P4", 0.33, -0.42),
    ("P8", 0.65, -0.47),
    ("PO9", -0.55, -0.8),
    ("O1", -0.25, -0.76),
    ("Oz", 0.0, -0.8),
    ("O2", 0.25, -0.76),
    ("PO10", 0.55, -0.8),
];

/// Outer ring of the 32-channel layout.
pub const HAT_BAND_32: [&str; 15] = [
    "Fp1", "Fp2", "F7", "F8", "T7", "T8", "TP9", "TP10", "P7", "P8", "PO9", "PO10", "O1", "Oz", "O2",
];

/// Outer ring of the 64-channel 10-10 layout.
pub const HAT_BAND_64: [&str; 20] = [
    "Fp1", "Fpz", "Fp2", "AF7", "AF8", "F7", "F8", "FT9", "FT10", "T7", "T8", "TP9", "TP10", "P7", "P8", "PO9",
    "PO10", "O1", "Oz", "O2",
];

/// Channel labels for a simulated cap: the 32-channel layout when it fits,
/// otherwise `E1..En`.
pub fn eeg_labels(n_channels: usize) -> Vec<String> {
    if n_channels == MONTAGE_32.len() {
        MONTAGE_32.iter().map(|(l, _, _)| l.to_string()).collect()
    } else {
        (1..=n_channels).map(|i| format!("E{i}")).collect()
    }
}

pub fn montage_position(label: &str) -> Option<[f64; 2]> {
    MONTAGE_32.iter().find(|(l, _, _)| *l == label).map(|&(_, x, y)| [x, y])
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EegSimOptions {
    /// (low, high) edges of the noise bands.
    pub bands_hz: Vec<(f64, f64)>,
    /// Standard deviation of each band relative to the others.
    pub band_gains: Vec<f64>,
    pub smoothing_sd_channels: f64,
    pub max_abs_uv: f64,
    pub filter_order: usize,
}

impl Default for EegSimOptions {
    fn default() -> Self {
        Self {
            bands_hz: vec![(1.0, 30.0), (20.0, 40.0), (40.0, 80.0), (80.0, 100.0), (100.0, 200.0)],
            band_gains: vec![1.0, 0.4, 0.25, 0.15, 0.1],
            smoothing_sd_channels: 4.0,
            max_abs_uv: 60.0,
            filter_order: 3,
        }
    }
}

/// Row-stochastic circulant Gaussian kernel over circular channel distance.
pub fn circular_smoothing_kernel(n_channels: usize, sd_channels: f64) -> Array2<f64> {
    let mut k = Array2::from_shape_fn((n_channels, n_channels), |(i, j)| {
        let d = i.abs_diff(j);
        let d = d.min(n_channels - d) as f64;
        (-d * d / (2.0 * sd_channels * sd_channels)).exp()
    });
    for mut row in k.rows_mut() {
        let s = row.sum();
        row /= s;
    }
    k
}

pub fn simulate_eeg(n_channels: usize, duration_s: f64, sample_rate_hz: f64, seed: u64) -> Result<MultiChannelRecording> {
    simulate_eeg_with(n_channels, duration_s, sample_rate_hz, seed, &EegSimOptions::default())
}

/// Band-limited Gaussian noise mixture, circularly smoothed across channels
/// and scaled so the largest absolute sample equals `opts.max_abs_uv`.
pub fn simulate_eeg_with(
    n_channels: usize,
    duration_s: f64,
    sample_rate_hz: f64,
    seed: u64,
    opts: &EegSimOptions,
) -> Result<MultiChannelRecording> {
    if n_channels < 8 {
        return Err(Error::InvalidArgument(format!("need at least 8 EEG channels, got {n_channels}")));
    }
    if !(duration_s > 0.0) {
        return Err(Error::InvalidArgument("duration must be positive".into()));
    }
    if !(sample_rate_hz >= 400.0) {
        return Err(Error::InvalidArgument(format!(
            "EEG simulation needs a sample rate of at least 400 Hz, got {sample_rate_hz}"
        )));
    }
    if opts.bands_hz.len() != opts.band_gains.len() {
        return Err(Error::Config("one gain per EEG band is required".into()));
    }
    let n = (duration_s * sample_rate_hz).round() as usize;
    let filters = opts
        .bands_hz
        .iter()
        .map(|&(lo, hi)| {
            let band = FrequencyBand::new(lo, hi.min(0.45 * sample_rate_hz))?;
            SosFilter::butter_bandpass(opts.filter_order, band, sample_rate_hz)
        })
        .collect::<Result<Vec<_>>>()?;
    let pad = edge_padding(opts.filter_order);

    let mut raw = Array2::<f64>::zeros((n_channels, n));
    let mut noise = vec![0.0; n];
    for (b, filter) in filters.iter().enumerate() {
        let mut band = Array2::<f64>::zeros((n_channels, n));
        for ch in 0..n_channels {
            let mut rng = seed::rng(seed::derive_seed2(seed, ch as u64, b as u64));
            for v in noise.iter_mut() {
                *v = StandardNormal.sample(&mut rng);
            }
            let y = filter.filtfilt(&noise, pad)?;
            band.row_mut(ch).assign(&ndarray::ArrayView1::from(&y));
        }
        let sd = (band.iter().map(|v| v * v).sum::<f64>() / band.len() as f64).sqrt();
        if sd > 0.0 {
            raw.scaled_add(opts.band_gains[b] / sd, &band);
        }
    }
    let kernel = circular_smoothing_kernel(n_channels, opts.smoothing_sd_channels);
    let mut data = kernel.dot(&raw);
    let peak = data.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if !(peak > 0.0) {
        return Err(Error::Numerical("simulated EEG is identically zero".into()));
    }
    data *= opts.max_abs_uv / peak;
    MultiChannelRecording::with_kind(eeg_labels(n_channels), ChannelKind::Eeg, sample_rate_hz, data)
}

/// `n` standard-normal draws divided by the sum of their magnitudes.
pub fn draw_contamination_weights(n: usize, seed: u64) -> Result<Vec<f64>> {
    draw_weights_with(n, &mut seed::rng(seed))
}

pub fn draw_weights_with<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::InvalidArgument("need at least one weight".into()));
    }
    loop {
        let w: Vec<f64> = (0..n).map(|_| StandardNormal.sample(rng)).collect();
        let l1: f64 = w.iter().map(|v: &f64| v.abs()).sum();
        if l1 > 0.0 {
            return Ok(w.into_iter().map(|v| v / l1).collect());
        }
    }
}

/// One EMG type added to a group of EEG channels.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Assignment {
    pub emg_type: String,
    pub channels: Vec<usize>,
    pub weights: Vec<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ContaminationGroundTruth {
    pub assignments: Vec<Assignment>,
    pub rng_seed: u64,
}

impl ContaminationGroundTruth {
    pub fn validate(&self) -> Result<()> {
        let mut seen = HashSet::new();
        for a in &self.assignments {
            if a.channels.len() != a.weights.len() {
                return Err(Error::InvalidArgument(format!(
                    "{}: {} channels but {} weights",
                    a.emg_type,
                    a.channels.len(),
                    a.weights.len()
                )));
            }
            if a.weights.iter().any(|w| !w.is_finite()) {
                return Err(Error::InvalidArgument(format!("{}: non-finite weight", a.emg_type)));
            }
            for &c in &a.channels {
                if !seen.insert(c) {
                    return Err(Error::InvalidArgument(format!("channel {c} carries more than one EMG type")));
                }
            }
        }
        Ok(())
    }

    /// Every contaminated channel, in assignment order.
    pub fn contaminated_channels(&self) -> Vec<usize> {
        self.assignments.iter().flat_map(|a| a.channels.iter().copied()).collect()
    }

    /// The assignment that contaminates `channel`, if any.
    pub fn assignment_of(&self, channel: usize) -> Option<usize> {
        self.assignments.iter().position(|a| a.channels.contains(&channel))
    }
}

/// Random disjoint channel groups, one per EMG type, with fresh normalized
/// weights for each group.
pub fn plan_contamination(
    emg_types: &[&str],
    group_size: usize,
    n_eeg_channels: usize,
    seed: u64,
) -> Result<ContaminationGroundTruth> {
    let needed = emg_types.len() * group_size;
    if needed > n_eeg_channels {
        return Err(Error::InvalidArgument(format!(
            "{needed} contaminated channels requested of {n_eeg_channels}"
        )));
    }
    let mut rng = seed::rng(seed);
    let picked = sample(&mut rng, n_eeg_channels, needed).into_vec();
    let assignments = emg_types
        .iter()
        .enumerate()
        .map(|(k, name)| {
            Ok(Assignment {
                emg_type: name.to_string(),
                channels: picked[k * group_size..(k + 1) * group_size].to_vec(),
                weights: draw_weights_with(group_size, &mut rng)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ContaminationGroundTruth {
        assignments,
        rng_seed: seed,
    })
}

/// Adds each assignment's weighted EMG channel (matched by label) to its EEG
/// channels; untouched channels are copied unchanged.
pub fn contaminate(
    eeg: &MultiChannelRecording,
    emg: &MultiChannelRecording,
    plan: &ContaminationGroundTruth,
) -> Result<MultiChannelRecording> {
    check_aligned(eeg, emg)?;
    plan.validate()?;
    let mut data = eeg.data().to_owned();
    for a in &plan.assignments {
        let src = emg
            .index_of(&a.emg_type)
            .ok_or_else(|| Error::InvalidArgument(format!("no EMG channel named {}", a.emg_type)))?;
        let src = emg.channel(src);
        for (&ch, &w) in a.channels.iter().zip(&a.weights) {
            if ch >= eeg.n_channels() {
                return Err(Error::IndexOutOfRange {
                    what: "EEG channel",
                    index: ch,
                    len: eeg.n_channels(),
                });
            }
            data.row_mut(ch).scaled_add(w, &src);
        }
    }
    eeg.with_data(data)
}

fn check_aligned(a: &MultiChannelRecording, b: &MultiChannelRecording) -> Result<()> {
    if a.sample_rate_hz() != b.sample_rate_hz() {
        return Err(Error::InvalidArgument(format!(
            "sample rates differ: {} vs {} Hz",
            a.sample_rate_hz(),
            b.sample_rate_hz()
        )));
    }
    if a.n_samples() != b.n_samples() {
        return Err(Error::InvalidArgument(format!(
            "lengths differ: {} vs {} samples",
            a.n_samples(),
            b.n_samples()
        )));
    }
    Ok(())
}

/// EEG rows followed by the reference rows.
pub fn append_reference_channels(
    eeg: &MultiChannelRecording,
    refs: &MultiChannelRecording,
) -> Result<MultiChannelRecording> {
    if refs.n_channels() == 0 {
        return Ok(eeg.clone());
    }
    check_aligned(eeg, refs)?;
    if !refs.all_kind(ChannelKind::EmgRef) {
        return Err(Error::InvalidArgument("reference channels must all be EMG_REF".into()));
    }
    if let Some(l) = refs.labels().iter().find(|l| eeg.index_of(l).is_some()) {
        return Err(Error::InvalidArgument(format!("reference label {l} collides with an EEG label")));
    }
    let labels = eeg.labels().iter().chain(refs.labels()).cloned().collect();
    let kinds = eeg.kinds().iter().chain(refs.kinds()).copied().collect();
    let data = concatenate(Axis(0), &[eeg.data(), refs.data()]).map_err(|e| Error::Numerical(e.to_string()))?;
    MultiChannelRecording::new(labels, kinds, eeg.sample_rate_hz(), data)
}
