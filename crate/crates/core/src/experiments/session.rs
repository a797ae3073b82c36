//! Cleaning pipeline for trial-structured sessions and a pseudo-real
//! session generator with a known μ desynchronization.

use ndarray::Array2;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::eeg_sim::{montage_position, simulate_eeg};
use crate::emg::{default_head_specs, simulate_head_emg_set, MotorUnitOptions, MuscleSpec};
use crate::erase::{run_conventional_ica, run_erase, EraseOptions, RejectionCriteria, RejectionReport};
use crate::error::{Error, Result};
use crate::seed::{derive_seed, rng};
use crate::signal::spectral::layout_band_powers;
use crate::signal::{
    bandpass_filter, resample, wilcoxon_rank_sum, zscore_to_idle, BandPowerSeries, EpochedRecording, FrequencyBand,
    MultiChannelRecording, Phase, SosFilter, TrialSchedule,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Condition {
    Baseline,
    EraseReal,
    EraseSimulated,
    Conventional,
}

impl Condition {
    pub const CLEANING: [Condition; 3] = [Condition::EraseReal, Condition::EraseSimulated, Condition::Conventional];

    pub fn name(self) -> &'static str {
        match self {
            Condition::Baseline => "baseline",
            Condition::EraseReal => "erase_real",
            Condition::EraseSimulated => "erase_simulated",
            Condition::Conventional => "conventional",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SessionRecordSet {
    pub eeg: MultiChannelRecording,
    pub real_references: Option<MultiChannelRecording>,
    pub simulated_references: Option<MultiChannelRecording>,
    pub schedule: TrialSchedule,
    pub mu_channel: String,
    pub subject: String,
    pub session: String,
}

impl SessionRecordSet {
    fn references(&self, condition: Condition) -> Result<Option<&MultiChannelRecording>> {
        let r = match condition {
            Condition::EraseReal => &self.real_references,
            Condition::EraseSimulated => &self.simulated_references,
            _ => return Ok(None),
        };
        r.as_ref().map(Some).ok_or_else(|| {
            Error::Config(format!("condition {} needs reference channels", condition.name()))
        })
    }

    pub fn validate(&self) -> Result<()> {
        self.schedule.validate()?;
        if self.eeg.index_of(&self.mu_channel).is_none() {
            return Err(Error::Config(format!("μ channel {} is not in the EEG", self.mu_channel)));
        }
        let end = self
            .schedule
            .trials
            .iter()
            .map(|t| t.move_end_s().max(t.idle_end_s()))
            .fold(0.0, f64::max);
        for (what, rec) in [("EEG", Some(&self.eeg)), ("real reference", self.real_references.as_ref()), (
            "simulated reference",
            self.simulated_references.as_ref(),
        )] {
            if let Some(rec) = rec {
                if rec.duration_s() + 0.5 / rec.sample_rate_hz() < end {
                    return Err(Error::InvalidRecording(format!(
                        "{what} lasts {} s but the schedule runs to {end} s",
                        rec.duration_s()
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Per-channel movement-phase z-scores with their idle-vs-movement test.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelRow {
    pub condition: Condition,
    pub label: String,
    pub mu_z: f64,
    pub mu_p: f64,
    /// `mu_z` with channels at p >= 0.01 set to zero.
    pub mu_z_nulled: f64,
    pub hf_z: f64,
    pub hf_p: f64,
    /// `hf_z` with channels at p >= 0.05 set to zero.
    pub hf_z_nulled: f64,
}

pub const MU_ALPHA: f64 = 0.01;
pub const HF_ALPHA: f64 = 0.05;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BandTables {
    pub mu: BandPowerSeries,
    pub hf: BandPowerSeries,
    pub channels: Vec<ChannelRow>,
}

fn band_tables(
    data: &MultiChannelRecording,
    epoched: &EpochedRecording,
    condition: Condition,
    opts: &EraseOptions,
) -> Result<BandTables> {
    let series = layout_band_powers(
        data.data(),
        data.labels(),
        data.sample_rate_hz(),
        &epoched.layout,
        &[("mu", FrequencyBand::MU), ("hf", FrequencyBand::HIGH_FREQUENCY)],
        opts.stft_window_s,
        opts.stft_hop_s,
    )?;
    let mu = zscore_to_idle(&series[0])?;
    let hf = zscore_to_idle(&series[1])?;
    let mut channels = Vec::with_capacity(data.n_channels());
    for (ch, label) in data.labels().iter().enumerate() {
        let test = |s: &BandPowerSeries, alpha: f64| -> Result<(f64, f64, f64)> {
            if !s.is_valid(ch) {
                return Ok((f64::NAN, f64::NAN, 0.0));
            }
            let idle = s.phase(Phase::Idle).row(ch).to_vec();
            let mv = s.phase(Phase::Movement).row(ch).to_vec();
            let p = wilcoxon_rank_sum(&idle, &mv)?.p_value;
            let z = s.trial_mean(ch, Phase::Movement);
            Ok((z, p, if p < alpha { z } else { 0.0 }))
        };
        let (mu_z, mu_p, mu_z_nulled) = test(&mu, MU_ALPHA)?;
        let (hf_z, hf_p, hf_z_nulled) = test(&hf, HF_ALPHA)?;
        channels.push(ChannelRow {
            condition,
            label: label.clone(),
            mu_z,
            mu_p,
            mu_z_nulled,
            hf_z,
            hf_p,
            hf_z_nulled,
        });
    }
    Ok(BandTables { mu, hf, channels })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SessionOutcome {
    pub subject: String,
    pub session: String,
    pub condition: Condition,
    pub baseline: BandTables,
    pub cleaned: BandTables,
    pub report: RejectionReport,
    /// HF percent reduction of the cleaned data against the baseline.
    pub hf_percent_reduction: f64,
    /// Movement μ z-score at the μ channel, baseline and cleaned.
    pub mu_channel_z_baseline: f64,
    pub mu_channel_z: f64,
    pub ica_converged: bool,
}

fn align(rec: &MultiChannelRecording, fs: f64) -> Result<MultiChannelRecording> {
    if rec.sample_rate_hz() == fs {
        Ok(rec.clone())
    } else {
        resample(rec, fs)
    }
}

pub const ANALYSIS_FILTER_ORDER: usize = 3;

/// Bandpass 3-100 Hz, epoch and concatenate trials, clean under
/// `condition`, then compare μ and HF band powers against the uncleaned
/// baseline.
pub fn run_session_pipeline(
    session: &SessionRecordSet,
    condition: Condition,
    criteria: &RejectionCriteria,
    opts: &EraseOptions,
    seed: u64,
) -> Result<SessionOutcome> {
    if condition == Condition::Baseline {
        return Err(Error::Config("baseline is computed alongside every cleaning condition".into()));
    }
    session.validate()?;
    let opts = EraseOptions {
        mu_channel: session.mu_channel.clone(),
        ..opts.clone()
    };
    let fs = session.eeg.sample_rate_hz();
    let eeg = bandpass_filter(&session.eeg, FrequencyBand::ANALYSIS, ANALYSIS_FILTER_ORDER)?;
    let epoched = EpochedRecording::extract(&eeg, &session.schedule)?;
    let baseline = band_tables(&epoched.recording, &epoched, Condition::Baseline, &opts)?;

    let out = match session.references(condition)? {
        Some(refs) => {
            let refs = bandpass_filter(&align(refs, fs)?, FrequencyBand::ANALYSIS, ANALYSIS_FILTER_ORDER)?;
            let refs = EpochedRecording::extract(&refs, &session.schedule)?;
            run_erase(&epoched.recording, &refs.recording, criteria, Some(&epoched.layout), &opts, seed)?
        }
        None => run_conventional_ica(&epoched.recording, criteria, &opts, seed)?,
    };
    let cleaned = band_tables(&out.cleaned, &epoched, condition, &opts)?;
    let hf_percent_reduction = crate::metrics::percent_reduction(&baseline.hf, &cleaned.hf)?;
    let mu_idx = eeg.index_of(&session.mu_channel).expect("validated");
    Ok(SessionOutcome {
        subject: session.subject.clone(),
        session: session.session.clone(),
        condition,
        mu_channel_z_baseline: baseline.channels[mu_idx].mu_z,
        mu_channel_z: cleaned.channels[mu_idx].mu_z,
        baseline,
        cleaned,
        report: out.report,
        hf_percent_reduction,
        ica_converged: out.decomposition.diagnostics.converged,
    })
}

/// Settings of the synthetic session: 32-channel simulated EEG with a 10 Hz
/// rhythm centred on the μ channel that weakens during movement, plus the
/// head-muscle EMG spread over the cap with distance-decaying gains.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PseudoRealOptions {
    pub sample_rate_hz: f64,
    pub emg_sample_rate_hz: f64,
    pub mu_channel: String,
    pub mu_amplitude_uv_rms: f64,
    /// Fractional amplitude drop of the μ rhythm during movement.
    pub erd_fraction: f64,
    /// Gaussian spatial spread of the μ source on the unit head map.
    pub mu_spread: f64,
    /// Exponential decay length of EMG gain with distance from the muscle.
    pub emg_decay: f64,
    pub emg_gain: f64,
    pub muscles: Vec<MuscleSpec>,
    pub motor_unit: MotorUnitOptions,
}

impl Default for PseudoRealOptions {
    fn default() -> Self {
        Self {
            sample_rate_hz: 1000.0,
            emg_sample_rate_hz: 4000.0,
            mu_channel: "C3".into(),
            mu_amplitude_uv_rms: 10.0,
            erd_fraction: 0.3,
            mu_spread: 0.2,
            emg_decay: 0.3,
            emg_gain: 1.0,
            muscles: default_head_specs(),
            motor_unit: MotorUnitOptions::default(),
        }
    }
}

fn distance(a: [f64; 2], b: [f64; 2]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

/// μ rhythm: 8-12 Hz filtered noise, unit RMS, scaled by 1 - `erd` inside
/// the movement windows.
fn mu_rhythm(n: usize, fs: f64, schedule: &TrialSchedule, erd: f64, seed: u64) -> Result<Vec<f64>> {
    let mut r = rng(seed);
    let white: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut r)).collect();
    let filter = SosFilter::butter_bandpass(2, FrequencyBand::MU, fs)?;
    let mut x = filter.filtfilt(&white, crate::signal::filter::edge_padding(2))?;
    let rms = (x.iter().map(|v| v * v).sum::<f64>() / n as f64).sqrt();
    for v in &mut x {
        *v /= rms;
    }
    for t in &schedule.trials {
        let a = ((t.move_start_s * fs).round() as usize).min(n);
        let b = ((t.move_end_s() * fs).round() as usize).min(n);
        for v in &mut x[a..b] {
            *v *= 1.0 - erd;
        }
    }
    Ok(x)
}

/// A 100-s fist-clench session on the 32-channel cap. Real references are
/// the contaminating EMG itself; simulated references come from an
/// independently seeded EMG simulation with the same schedule.
pub fn pseudo_real_session(opts: &PseudoRealOptions, seed: u64) -> Result<SessionRecordSet> {
    let schedule = TrialSchedule::fist_clench_session();
    let fs = opts.sample_rate_hz;
    let eeg = simulate_eeg(32, schedule.duration_s, fs, derive_seed(seed, 0))?;
    let n = eeg.n_samples();
    let mu_pos = montage_position(&opts.mu_channel)
        .ok_or_else(|| Error::Config(format!("{} is not on the 32-channel cap", opts.mu_channel)))?;
    let mu = mu_rhythm(n, fs, &schedule, opts.erd_fraction, derive_seed(seed, 1))?;

    let real = simulate_head_emg_set(
        &opts.muscles,
        &schedule,
        opts.emg_sample_rate_hz,
        derive_seed(seed, 2),
        &opts.motor_unit,
    )?;
    let simulated = simulate_head_emg_set(
        &opts.muscles,
        &schedule,
        opts.emg_sample_rate_hz,
        derive_seed(seed, 3),
        &opts.motor_unit,
    )?;
    let real = align(&real, fs)?;
    let simulated = align(&simulated, fs)?;
    let m = real.n_samples().min(n);

    let mut data: Array2<f64> = eeg.data().to_owned();
    for (c, label) in eeg.labels().iter().enumerate() {
        let pos = montage_position(label).expect("32-channel labels");
        let w_mu = opts.mu_amplitude_uv_rms * (-distance(pos, mu_pos).powi(2) / (2.0 * opts.mu_spread.powi(2))).exp();
        let mut row = data.row_mut(c);
        for (v, s) in row.iter_mut().zip(&mu) {
            *v += w_mu * s;
        }
        for (k, spec) in opts.muscles.iter().enumerate() {
            let g = opts.emg_gain * (-distance(pos, spec.topo_position) / opts.emg_decay).exp();
            let emg = real.channel(k);
            for i in 0..m {
                row[i] += g * emg[i];
            }
        }
    }
    let fit = |r: MultiChannelRecording| -> Result<MultiChannelRecording> {
        if r.n_samples() > n {
            r.select_samples(0..n)
        } else {
            Ok(r)
        }
    };
    Ok(SessionRecordSet {
        eeg: eeg.with_data(data)?,
        real_references: Some(fit(real)?),
        simulated_references: Some(fit(simulated)?),
        schedule,
        mu_channel: opts.mu_channel.clone(),
        subject: format!("pseudo_{seed}"),
        session: "1".into(),
    })
}
