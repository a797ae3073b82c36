//! Event rates with an independent noise contaminant and with the
//! references themselves as contaminant.

use erase::experiments::{run_false_positive, run_sensitivity, Configuration, ScenarioConfig, ScenarioKind};

fn main() -> erase::error::Result<()> {
    let mut cfg = ScenarioConfig::desk(ScenarioKind::Fp);
    cfg.n_datasets = 4;
    cfg.s1_grid = vec![6];
    cfg.s2_type_counts = vec![2];
    let fp = run_false_positive(&cfg)?;
    let sens = run_sensitivity(&cfg)?;
    for c in [Configuration::S1, Configuration::S2] {
        println!(
            "{c:?}: false-positive rate {:.2}, sensitivity rate {:.2}",
            fp.configuration_rate(c).unwrap_or(f64::NAN),
            sens.configuration_rate(c).unwrap_or(f64::NAN)
        );
    }
    Ok(())
}
