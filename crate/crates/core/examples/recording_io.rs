//! Writing and reading recordings with inline CSV and raw float payloads.

use erase::eeg_sim::simulate_eeg;
use erase::signal::io::{read_recording, write_recording, Payload};

fn main() -> erase::error::Result<()> {
    let dir = std::env::temp_dir().join("erase_recording_io");
    std::fs::create_dir_all(&dir)?;
    let eeg = simulate_eeg(32, 2.0, 500.0, 9)?;
    for (name, payload) in [("eeg_csv.json", Payload::Csv), ("eeg_raw.json", Payload::Raw)] {
        let path = dir.join(name);
        write_recording(&path, &eeg, payload)?;
        let back = read_recording(&path)?;
        let err = eeg.data().iter().zip(back.data()).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        println!("{:?}: {} -> max abs difference {err:.2e} µV", payload, path.display());
    }
    Ok(())
}
