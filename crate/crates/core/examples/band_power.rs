//! Filtering, epoching, STFT band power and idle-referenced z-scores.

use std::f64::consts::PI;

use erase::signal::spectral::trial_band_powers;
use erase::signal::{
    bandpass_filter, extract_trials, zscore_to_idle, ChannelKind, FrequencyBand, MultiChannelRecording, Phase,
    TrialSchedule,
};
use ndarray::Array2;

fn main() -> erase::error::Result<()> {
    let fs = 1000.0;
    let schedule = TrialSchedule::fist_clench_session();
    let n = (schedule.duration_s * fs) as usize;
    // 10 Hz rhythm that drops by a third during movement, plus a slow drift.
    let mut data = Array2::zeros((1, n));
    for i in 0..n {
        let t = i as f64 / fs;
        let moving = schedule.trials.iter().any(|tr| t >= tr.move_start_s && t < tr.move_end_s());
        let amp = if moving { 6.0 } else { 9.0 } + 0.3 * (7.3 * t).sin();
        data[[0, i]] = amp * (2.0 * PI * 10.0 * t).sin() + 40.0 * (2.0 * PI * 0.2 * t).sin();
    }
    let rec = MultiChannelRecording::with_kind(vec!["C3".into()], ChannelKind::Eeg, fs, data)?;
    let filtered = bandpass_filter(&rec, FrequencyBand::ANALYSIS, 3)?;
    let trials = extract_trials(&filtered, &schedule)?;
    let series = trial_band_powers(&trials, &[("mu", FrequencyBand::MU)], 0.5, 0.125)?;
    let z = zscore_to_idle(&series[0])?;
    println!("raw μ power idle {:.2}, movement {:.2}", series[0].trial_mean(0, Phase::Idle), series[0].trial_mean(0, Phase::Movement));
    println!("z-scored movement μ power {:.2}", z.trial_mean(0, Phase::Movement));
    Ok(())
}
