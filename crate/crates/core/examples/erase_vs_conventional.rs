//! ERASE against hat-band ICA on one contaminated dataset, scored by the
//! artifact index of each rejected component.

use erase::eeg_sim::HAT_BAND_32;
use erase::experiments::{evaluate_conventional, evaluate_erase, generate_dataset, Configuration, Contaminant, ScenarioConfig, ScenarioKind};

fn main() -> erase::error::Result<()> {
    let cfg = ScenarioConfig::desk(ScenarioKind::S1);
    let ds = generate_dataset(&cfg, 3, 4, Contaminant::ReferenceEmg, 5)?;
    let key = (ScenarioKind::S1, Configuration::S1, 12, 0);
    println!("hat band: {:?}", HAT_BAND_32);
    for r in evaluate_erase(&ds, &cfg, key, 1)?.iter().chain(&evaluate_conventional(&ds, &cfg, key, 1)?) {
        println!(
            "{:<12?} IC{:<3} {:<14} AI {:10.3}  event {}",
            r.method, r.ic, r.emg_type, r.artifact_index, r.event
        );
    }
    Ok(())
}
