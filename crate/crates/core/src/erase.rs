//! Reference-augmented ICA with automated artifact-component rejection.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use ndarray::{s, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::eeg_sim::append_reference_channels;
use crate::error::{Error, Result};
use crate::ica::{fastica, reconstruct_without, FastIcaOptions, IcaDecomposition};
use crate::signal::spectral::{layout_band_powers, DEFAULT_HOP_S, DEFAULT_WINDOW_S};
use crate::signal::{zscore_to_idle, ChannelKind, FrequencyBand, MultiChannelRecording, Phase, TrialLayout};

pub const MIN_GAIN: f64 = 0.4;
pub const MAX_GAIN: f64 = 3.0;

/// 0.4, 0.5, ..., 3.0.
pub fn default_gain_grid() -> Vec<f64> {
    (4..=30).map(|k| k as f64 / 10.0).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RejectionMode {
    /// Reference-row threshold plus hat-band rule.
    Experimental,
    /// The largest-magnitude IC of every reference row.
    SimulatedGroundTruth,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RejectionCriteria {
    /// Threshold gain; `None` selects it by sweeping the gain grid.
    pub gain: Option<f64>,
    pub hat_band_labels: Vec<String>,
    pub mode: RejectionMode,
}

impl RejectionCriteria {
    pub fn experimental(gain: Option<f64>, hat_band: &[&str]) -> Self {
        Self {
            gain,
            hat_band_labels: hat_band.iter().map(|s| s.to_string()).collect(),
            mode: RejectionMode::Experimental,
        }
    }

    pub fn simulated(hat_band: &[&str]) -> Self {
        Self {
            gain: None,
            hat_band_labels: hat_band.iter().map(|s| s.to_string()).collect(),
            mode: RejectionMode::SimulatedGroundTruth,
        }
    }

    pub fn with_gain(&self, gain: f64) -> Self {
        Self {
            gain: Some(gain),
            ..self.clone()
        }
    }

    /// Checks the gain range and that every hat-band label names an EEG channel.
    pub fn validate(&self, eeg_labels: &[String]) -> Result<()> {
        if let Some(g) = self.gain {
            if !(MIN_GAIN..=MAX_GAIN).contains(&g) {
                return Err(Error::Config(format!("gain {g} outside [{MIN_GAIN}, {MAX_GAIN}]")));
            }
        }
        if let Some(l) = self.hat_band_labels.iter().find(|l| !eeg_labels.contains(l)) {
            return Err(Error::Config(format!("hat-band label {l} is not an EEG channel")));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    ThresholdCriterion,
    HatBandCriterion,
    MaxRefCoefficient,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlaggedIc {
    pub index: usize,
    pub provenance: Vec<Provenance>,
    /// Reference row (0-based among the references) that singled the IC out.
    pub reference_rows: Vec<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub gain: f64,
    pub objective: f64,
    pub n_rejected: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RejectionReport {
    pub mode: RejectionMode,
    /// Mean RMS of the reference rows; absent without references.
    pub rms_value: Option<f64>,
    pub threshold: Option<f64>,
    pub gain: Option<f64>,
    pub artifact_ics: Vec<FlaggedIc>,
    pub sweep: Vec<SweepPoint>,
    /// Set when no gain on the grid rejected anything.
    pub degenerate_sweep: bool,
}

impl RejectionReport {
    pub fn indices(&self) -> BTreeSet<usize> {
        self.artifact_ics.iter().map(|f| f.index).collect()
    }

    pub fn is_flagged(&self, ic: usize) -> bool {
        self.artifact_ics.iter().any(|f| f.index == ic)
    }
}

fn check_shape(a: ArrayView2<'_, f64>, t: usize, tau: usize) -> Result<()> {
    if a.nrows() != t + tau || a.ncols() != t + tau {
        return Err(Error::InvalidArgument(format!(
            "mixing matrix is {}x{}, expected {}x{}",
            a.nrows(),
            a.ncols(),
            t + tau,
            t + tau
        )));
    }
    Ok(())
}

/// Mean over the last `tau` rows of each row's RMS coefficient.
pub fn rms_of_reference_rows(a: ArrayView2<'_, f64>, t: usize, tau: usize) -> Result<f64> {
    if tau == 0 {
        return Err(Error::InvalidArgument("no reference rows".into()));
    }
    check_shape(a, t, tau)?;
    let total: f64 = a
        .slice(s![t.., ..])
        .rows()
        .into_iter()
        .map(|row| (row.iter().map(|v| v * v).sum::<f64>() / row.len() as f64).sqrt())
        .sum();
    Ok(total / tau as f64)
}

/// Index of the largest |value|, lowest index on ties.
fn argmax_abs(values: impl Iterator<Item = f64>) -> usize {
    let mut best = (0, f64::NEG_INFINITY);
    for (i, v) in values.enumerate() {
        if v.abs() > best.1 {
            best = (i, v.abs());
        }
    }
    best.0
}

/// Artifact ICs of a (t+τ)x(t+τ) mixing matrix whose first `t` rows are the
/// EEG channels named by `eeg_labels`.
pub fn identify_artifact_ics(
    a: ArrayView2<'_, f64>,
    criteria: &RejectionCriteria,
    eeg_labels: &[String],
    t: usize,
    tau: usize,
) -> Result<RejectionReport> {
    check_shape(a, t, tau)?;
    if eeg_labels.len() != t {
        return Err(Error::InvalidArgument(format!("{} EEG labels for {t} EEG rows", eeg_labels.len())));
    }
    let n = t + tau;
    let mut flags: BTreeMap<usize, (BTreeSet<Provenance>, BTreeSet<usize>)> = BTreeMap::new();
    let mut report = RejectionReport {
        mode: criteria.mode,
        rms_value: None,
        threshold: None,
        gain: criteria.gain,
        artifact_ics: Vec::new(),
        sweep: Vec::new(),
        degenerate_sweep: false,
    };

    match criteria.mode {
        RejectionMode::SimulatedGroundTruth => {
            if tau == 0 {
                return Err(Error::Config("ground-truth rejection needs reference rows".into()));
            }
            for k in 0..tau {
                let j = argmax_abs(a.row(t + k).iter().copied());
                let e = flags.entry(j).or_default();
                e.0.insert(Provenance::MaxRefCoefficient);
                e.1.insert(k);
            }
        }
        RejectionMode::Experimental => {
            if criteria.hat_band_labels.is_empty() {
                return Err(Error::Config("the hat-band channel set is empty".into()));
            }
            if tau > 0 {
                let gain = criteria
                    .gain
                    .ok_or_else(|| Error::Config("a gain is required to apply the threshold".into()))?;
                let rms = rms_of_reference_rows(a, t, tau)?;
                let threshold = rms * gain;
                report.rms_value = Some(rms);
                report.threshold = Some(threshold);
                for j in 0..n {
                    for k in 0..tau {
                        if a[[t + k, j]].abs() > threshold {
                            let e = flags.entry(j).or_default();
                            e.0.insert(Provenance::ThresholdCriterion);
                            e.1.insert(k);
                        }
                    }
                }
            }
            let hat: HashSet<&str> = criteria.hat_band_labels.iter().map(String::as_str).collect();
            for j in 0..n {
                let row = argmax_abs(a.column(j).iter().copied());
                if row < t && hat.contains(eeg_labels[row].as_str()) {
                    flags.entry(j).or_default().0.insert(Provenance::HatBandCriterion);
                }
            }
        }
    }
    report.artifact_ics = flags
        .into_iter()
        .map(|(index, (p, r))| FlaggedIc {
            index,
            provenance: p.into_iter().collect(),
            reference_rows: r.into_iter().collect(),
        })
        .collect();
    Ok(report)
}

/// Settings shared by the ERASE and conventional-ICA runs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EraseOptions {
    pub ica: FastIcaOptions,
    pub mu_channel: String,
    pub gain_grid: Vec<f64>,
    pub stft_window_s: f64,
    pub stft_hop_s: f64,
}

impl Default for EraseOptions {
    fn default() -> Self {
        Self {
            ica: FastIcaOptions::default(),
            mu_channel: "C3".into(),
            gain_grid: default_gain_grid(),
            stft_window_s: DEFAULT_WINDOW_S,
            stft_hop_s: DEFAULT_HOP_S,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GainSelection {
    pub gain: f64,
    pub sweep: Vec<SweepPoint>,
    pub degenerate: bool,
}

/// Movement-phase HF z-score summed over EEG channels plus the movement μ
/// z-score at the μ channel (both averaged over trials) after removing
/// `rejected` from `dec`. Channels with no idle spread are skipped.
pub fn gain_objective(
    dec: &IcaDecomposition,
    rejected: &BTreeSet<usize>,
    eeg_labels: &[String],
    sample_rate_hz: f64,
    layout: &TrialLayout,
    opts: &EraseOptions,
) -> Result<f64> {
    let t = eeg_labels.len();
    let mu_idx = eeg_labels
        .iter()
        .position(|l| *l == opts.mu_channel)
        .ok_or_else(|| Error::Config(format!("μ channel {} is not an EEG channel", opts.mu_channel)))?;
    let cleaned = reconstruct_without(dec, rejected)?;
    let series = layout_band_powers(
        cleaned.slice(s![..t, ..]),
        eeg_labels,
        sample_rate_hz,
        layout,
        &[("hf", FrequencyBand::HIGH_FREQUENCY), ("mu", FrequencyBand::MU)],
        opts.stft_window_s,
        opts.stft_hop_s,
    )?;
    let hf = zscore_to_idle(&series[0])?;
    let mu = zscore_to_idle(&series[1])?;
    let hf_sum: f64 = (0..t)
        .filter(|&c| hf.is_valid(c))
        .map(|c| hf.trial_mean(c, Phase::Movement))
        .sum();
    let mu_term = if mu.is_valid(mu_idx) {
        mu.trial_mean(mu_idx, Phase::Movement)
    } else {
        0.0
    };
    Ok(hf_sum + mu_term)
}

/// Sweeps the gain grid on one decomposition and keeps the gain with the
/// smallest objective (the smaller gain on ties).
pub fn select_gain(
    dec: &IcaDecomposition,
    template: &RejectionCriteria,
    eeg_labels: &[String],
    tau: usize,
    sample_rate_hz: f64,
    layout: &TrialLayout,
    opts: &EraseOptions,
) -> Result<GainSelection> {
    if opts.gain_grid.is_empty() {
        return Err(Error::Config("empty gain grid".into()));
    }
    let t = eeg_labels.len();
    let mut cache: BTreeMap<BTreeSet<usize>, f64> = BTreeMap::new();
    let mut sweep = Vec::with_capacity(opts.gain_grid.len());
    for &g in &opts.gain_grid {
        let report = identify_artifact_ics(dec.mixing.view(), &template.with_gain(g), eeg_labels, t, tau)?;
        let rejected = report.indices();
        let objective = match cache.get(&rejected) {
            Some(&v) => v,
            None => {
                let v = gain_objective(dec, &rejected, eeg_labels, sample_rate_hz, layout, opts)?;
                cache.insert(rejected.clone(), v);
                v
            }
        };
        sweep.push(SweepPoint {
            gain: g,
            objective,
            n_rejected: rejected.len(),
        });
    }
    let degenerate = sweep.iter().all(|p| p.n_rejected == 0);
    let smallest = opts.gain_grid.iter().copied().fold(f64::INFINITY, f64::min);
    let gain = if degenerate {
        smallest
    } else {
        let mut best = sweep[0];
        for p in &sweep[1..] {
            if p.objective < best.objective || (p.objective == best.objective && p.gain < best.gain) {
                best = *p;
            }
        }
        best.gain
    };
    Ok(GainSelection { gain, sweep, degenerate })
}

#[derive(Clone, Debug, PartialEq)]
pub struct CleaningOutput {
    pub cleaned: MultiChannelRecording,
    pub report: RejectionReport,
    pub decomposition: IcaDecomposition,
}

/// ERASE: ICA on the EEG augmented with reference EMG rows, rejection of the
/// artifact ICs, and the EEG rows of the reconstruction.
///
/// With `criteria.gain == None` in experimental mode the gain is selected
/// with [`select_gain`], which needs the trial `layout` of `eeg`.
pub fn run_erase(
    eeg: &MultiChannelRecording,
    refs: &MultiChannelRecording,
    criteria: &RejectionCriteria,
    layout: Option<&TrialLayout>,
    opts: &EraseOptions,
    seed: u64,
) -> Result<CleaningOutput> {
    if refs.n_channels() == 0 {
        return Err(Error::InvalidArgument("ERASE needs at least one reference channel".into()));
    }
    if !eeg.all_kind(ChannelKind::Eeg) {
        return Err(Error::InvalidArgument("the EEG input holds non-EEG channels".into()));
    }
    criteria.validate(eeg.labels())?;
    let t = eeg.n_channels();
    let tau = refs.n_channels();
    let augmented = append_reference_channels(eeg, refs)?;
    let dec = fastica(augmented.data(), &opts.ica, seed)?;

    let mut report = match (criteria.mode, criteria.gain) {
        (RejectionMode::Experimental, None) => {
            let layout =
                layout.ok_or_else(|| Error::Config("automatic gain selection needs the trial layout".into()))?;
            let sel = select_gain(&dec, criteria, eeg.labels(), tau, eeg.sample_rate_hz(), layout, opts)?;
            let mut r = identify_artifact_ics(dec.mixing.view(), &criteria.with_gain(sel.gain), eeg.labels(), t, tau)?;
            r.sweep = sel.sweep;
            r.degenerate_sweep = sel.degenerate;
            r
        }
        _ => identify_artifact_ics(dec.mixing.view(), criteria, eeg.labels(), t, tau)?,
    };
    if report.mode == RejectionMode::SimulatedGroundTruth {
        report.gain = None;
    }
    let cleaned = reconstruct_without(&dec, &report.indices())?;
    let cleaned = eeg.with_data(cleaned.slice(s![..t, ..]).to_owned())?;
    Ok(CleaningOutput {
        cleaned,
        report,
        decomposition: dec,
    })
}

/// ICA on the EEG alone with hat-band rejection only.
pub fn run_conventional_ica(
    eeg: &MultiChannelRecording,
    criteria: &RejectionCriteria,
    opts: &EraseOptions,
    seed: u64,
) -> Result<CleaningOutput> {
    if eeg.n_channels() == 0 {
        return Err(Error::InvalidArgument("empty EEG recording".into()));
    }
    criteria.validate(eeg.labels())?;
    let conventional = RejectionCriteria {
        gain: None,
        hat_band_labels: criteria.hat_band_labels.clone(),
        mode: RejectionMode::Experimental,
    };
    let t = eeg.n_channels();
    let dec = fastica(eeg.data(), &opts.ica, seed)?;
    let report = identify_artifact_ics(dec.mixing.view(), &conventional, eeg.labels(), t, 0)?;
    let cleaned = eeg.with_data(reconstruct_without(&dec, &report.indices())?)?;
    Ok(CleaningOutput {
        cleaned,
        report,
        decomposition: dec,
    })
}
