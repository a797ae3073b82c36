//! Mixing simulated EMG into random channel groups and appending references.

use erase::eeg_sim::{append_reference_channels, contaminate, plan_contamination, simulate_eeg};
use erase::emg::{simulate_head_emg_set, MotorUnitOptions, Muscle, MuscleSpec};
use erase::signal::TrialSchedule;

fn main() -> erase::error::Result<()> {
    let eeg = simulate_eeg(32, 5.0, 1000.0, 1)?;
    let specs: Vec<MuscleSpec> = [Muscle::FrontalisLeft, Muscle::TemporalisLeft, Muscle::MasseterLeft]
        .iter()
        .map(|&m| MuscleSpec::default_for(m))
        .collect();
    let emg = simulate_head_emg_set(&specs, &TrialSchedule::empty(5.0), 1000.0, 2, &MotorUnitOptions::default())?;
    let names: Vec<&str> = specs.iter().map(|s| s.name()).collect();
    let truth = plan_contamination(&names, 4, 32, 3)?;
    for a in &truth.assignments {
        let labels: Vec<&str> = a.channels.iter().map(|&c| eeg.labels()[c].as_str()).collect();
        let w: Vec<String> = a.weights.iter().map(|w| format!("{w:.3}")).collect();
        println!("{:<14} -> {:?} weights [{}]", a.emg_type, labels, w.join(", "));
    }
    let mixed = contaminate(&eeg, &emg, &truth)?;
    let augmented = append_reference_channels(&mixed, &emg)?;
    println!("augmented recording: {} channels ({} references)", augmented.n_channels(), emg.n_channels());
    println!("{}", serde_json::to_string_pretty(&truth)?);
    Ok(())
}
