//! Head-muscle EMG over a fist-clench session, with idle and movement RMS.

use erase::emg::{default_head_specs, simulate_head_emg_set, MotorUnitOptions};
use erase::signal::{extract_trials, TrialSchedule};

fn rms(x: ndarray::ArrayView1<'_, f64>) -> f64 {
    (x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64).sqrt()
}

fn main() -> erase::error::Result<()> {
    let schedule = TrialSchedule::fist_clench_session();
    let emg = simulate_head_emg_set(&default_head_specs(), &schedule, 1000.0, 3, &MotorUnitOptions::default())?;
    let trials = extract_trials(&emg, &schedule)?;
    for (i, label) in emg.labels().iter().enumerate() {
        let idle: f64 = trials.iter().map(|t| rms(t.idle.channel(i))).sum::<f64>() / trials.len() as f64;
        let mv: f64 = trials.iter().map(|t| rms(t.movement.channel(i))).sum::<f64>() / trials.len() as f64;
        println!("{label:<14} idle {idle:6.2} µV  movement {mv:6.2} µV");
    }
    Ok(())
}
