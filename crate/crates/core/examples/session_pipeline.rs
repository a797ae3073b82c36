//! The three cleaning conditions on one pseudo-real fist-clench session.

use erase::eeg_sim::HAT_BAND_32;
use erase::erase::{EraseOptions, RejectionCriteria};
use erase::experiments::{aggregate_report, pseudo_real_session, run_session_pipeline, Condition, PseudoRealOptions};
use erase::ica::FastIcaOptions;

fn main() -> erase::error::Result<()> {
    let session = pseudo_real_session(&PseudoRealOptions::default(), 0)?;
    let opts = EraseOptions {
        ica: FastIcaOptions {
            max_iter: 200,
            max_restarts: 0,
            ..FastIcaOptions::default()
        },
        ..EraseOptions::default()
    };
    let criteria = RejectionCriteria::experimental(None, &HAT_BAND_32);
    let mut runs = Vec::new();
    for c in Condition::CLEANING {
        let o = run_session_pipeline(&session, c, &criteria, &opts, 1)?;
        println!(
            "{:<16} HF reduction {:6.2}%  C3 μ z {:.2} (baseline {:.2})  {} ICs rejected",
            c.name(),
            o.hf_percent_reduction,
            o.mu_channel_z,
            o.mu_channel_z_baseline,
            o.report.artifact_ics.len()
        );
        runs.push(o);
    }
    let report = aggregate_report(&runs, "C3")?;
    for s in &report.conditions {
        println!("{:<16} mean HF z {:.3}", s.condition.name(), s.hf_z_mean);
    }
    Ok(())
}
