//! One PASS/FAIL line per acceptance criterion; exits non-zero on failure.

mod common;

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::{Command, ExitCode};
use std::sync::OnceLock;
use std::time::Instant;

use common::fixtures;
use common::ranksum::{exact_oracle, permutation_oracle};
use common::{covariance_direct, four_sources, match_sources, max_dev_from_identity, random_mixing, rel_frobenius};
use erase::eeg_sim::HAT_BAND_32;
use erase::erase::{EraseOptions, RejectionCriteria};
use erase::experiments::{
    aggregate_report, pseudo_real_session, run_false_positive, run_scenario1, run_scenario2, run_sensitivity,
    run_session_pipeline, Condition, Configuration, PseudoRealOptions, ScenarioConfig, ScenarioKind, ScenarioOutput,
    SessionOutcome,
};
use erase::ica::{center_and_whiten, fastica, reconstruct_without, FastIcaOptions};
use erase::signal::wilcoxon_rank_sum;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn effectiveness() -> Outcome {
    let s1 = run_scenario1(&ScenarioConfig {
        s1_grid: vec![6, 18, 30],
        ..ScenarioConfig::desk(ScenarioKind::S1)
    })
    .map_err(|e| e.to_string())?;
    let s2 = run_scenario2(&ScenarioConfig {
        s2_type_counts: vec![1, 3, 5],
        ..ScenarioConfig::desk(ScenarioKind::S2)
    })
    .map_err(|e| e.to_string())?;
    let mut ok = true;
    let mut parts = Vec::new();
    for s in s1.summaries.iter().chain(&s2.summaries) {
        let good = s.median_ai_erase > s.median_ai_conventional && s.p_effectiveness < 0.01;
        ok &= good;
        parts.push(format!(
            "{:?}/{}: AI {:.2} vs {:.2}, p={:.1e}, failed={}",
            s.configuration, s.grid_value, s.median_ai_erase, s.median_ai_conventional, s.p_effectiveness, s.n_failed
        ));
    }
    check(ok, parts.join("; "))
}

/// One grid point per configuration, 20 datasets each.
fn rate_config(kind: ScenarioKind) -> ScenarioConfig {
    ScenarioConfig {
        s1_grid: vec![18],
        s2_type_counts: vec![3],
        ..ScenarioConfig::desk(kind)
    }
}

fn rates(out: &ScenarioOutput) -> (f64, f64) {
    let r = |c| out.configuration_rate(c).unwrap_or(f64::NAN);
    (r(Configuration::S1), r(Configuration::S2))
}

fn false_positive() -> Outcome {
    let out = run_false_positive(&rate_config(ScenarioKind::Fp)).map_err(|e| e.to_string())?;
    let (a, b) = rates(&out);
    check(
        a == 0.0 && b == 0.0 && out.failures.is_empty(),
        format!("rate S1={a} S2={b}, failed datasets={}", out.failures.len()),
    )
}

fn sensitivity() -> Outcome {
    let out = run_sensitivity(&rate_config(ScenarioKind::Sens)).map_err(|e| e.to_string())?;
    let (a, b) = rates(&out);
    let mut ok = a == 1.0 && b == 1.0 && out.failures.is_empty();
    let mut parts = vec![format!("rate S1={a} S2={b}")];
    for s in &out.summaries {
        ok &= s.median_contaminated_coefficient > s.median_uncontaminated_coefficient && s.p_coefficients < 0.01;
        parts.push(format!(
            "{:?}: |a| {:.3} vs {:.3}, p={:.1e}",
            s.configuration, s.median_contaminated_coefficient, s.median_uncontaminated_coefficient, s.p_coefficients
        ));
    }
    check(ok, parts.join("; "))
}

fn sessions() -> &'static Result<Vec<SessionOutcome>, String> {
    static RUNS: OnceLock<Result<Vec<SessionOutcome>, String>> = OnceLock::new();
    RUNS.get_or_init(|| {
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
        for seed in 0..10 {
            let s = pseudo_real_session(&PseudoRealOptions::default(), seed).map_err(|e| e.to_string())?;
            for c in Condition::CLEANING {
                runs.push(run_session_pipeline(&s, c, &criteria, &opts, seed).map_err(|e| e.to_string())?);
            }
        }
        Ok(runs)
    })
}

fn mean_reduction(runs: &[SessionOutcome], c: Condition) -> f64 {
    let v: Vec<f64> = runs.iter().filter(|r| r.condition == c).map(|r| r.hf_percent_reduction).collect();
    v.iter().sum::<f64>() / v.len() as f64
}

fn hf_direction() -> Outcome {
    let runs = sessions().as_ref().map_err(Clone::clone)?;
    let real = mean_reduction(runs, Condition::EraseReal);
    let sim = mean_reduction(runs, Condition::EraseSimulated);
    let conv = mean_reduction(runs, Condition::Conventional);
    check(
        real >= conv + 10.0 && sim >= conv + 10.0 && real >= 50.0,
        format!("mean HF reduction erase_real {real:.1}%, erase_simulated {sim:.1}%, conventional {conv:.1}%"),
    )
}

fn mu_preserved() -> Outcome {
    let runs = sessions().as_ref().map_err(Clone::clone)?;
    let report = aggregate_report(runs, "C3").map_err(|e| e.to_string())?;
    let mut ok = true;
    let mut parts = Vec::new();
    for c in Condition::CLEANING {
        let z: Vec<f64> = runs.iter().filter(|r| r.condition == c).map(|r| r.mu_channel_z).collect();
        let p = report.p_value("mu", Condition::Baseline, c).unwrap_or(f64::NAN);
        let max_z = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        ok &= max_z < 0.0 && p > 0.05;
        parts.push(format!("{}: max C3 μ z {max_z:.2}, p={p:.2}", c.name()));
    }
    check(ok, parts.join("; "))
}

fn ica_oracle() -> Outcome {
    let mut worst_corr = f64::INFINITY;
    let mut worst_cov: f64 = 0.0;
    let mut worst_rt: f64 = 0.0;
    for seed in 0..20 {
        let s = four_sources(50_000, seed);
        let x = random_mixing(4, seed).dot(&s);
        let dec = fastica(x.view(), &FastIcaOptions::default(), seed).map_err(|e| e.to_string())?;
        let (c, _) = match_sources(s.view(), dec.sources.view());
        worst_corr = worst_corr.min(c.iter().map(|v| v.abs()).sum::<f64>() / 4.0);
        let (z, _) = center_and_whiten(x.view(), None).map_err(|e| e.to_string())?;
        worst_cov = worst_cov.max(max_dev_from_identity(covariance_direct(z.view()).view()));
        let back = reconstruct_without(&dec, &BTreeSet::new()).map_err(|e| e.to_string())?;
        worst_rt = worst_rt.max(rel_frobenius(back.view(), x.view()));
    }
    check(
        worst_corr > 0.95 && worst_cov < 1e-8 && worst_rt < 1e-6,
        format!("lowest per-seed mean |corr| {worst_corr:.4}, covariance dev {worst_cov:.1e}, round trip {worst_rt:.1e}"),
    )
}

fn equation_fixtures() -> Outcome {
    let (rms, rms_oracle) = fixtures::rms_fixture();
    let rms_err = (rms - rms_oracle).abs();
    let ai_err = fixtures::artifact_index_fixture()
        .iter()
        .map(|(g, o)| (g - o).abs())
        .fold(0.0, f64::max);
    let events = fixtures::event_fixture();
    let event_mismatch = events.iter().filter(|(e, m)| *e != (*m > 0.0)).count();
    let (pd, pd_oracle) = fixtures::percent_reduction_fixture();
    let pd_err = (pd - pd_oracle).abs();
    check(
        rms_err < 1e-12 && ai_err < 1e-12 && event_mismatch == 0 && pd_err < 1e-12,
        format!(
            "reference RMS err {rms_err:.1e}, artifact index err {ai_err:.1e}, event mismatches {event_mismatch}/{}, percent reduction err {pd_err:.1e}",
            events.len()
        ),
    )
}

fn rank_sum_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut mismatches = 0;
    for _ in 0..300 {
        let na = rng.random_range(1..=6);
        let nb = rng.random_range(1..=12 - na);
        let mut draw = |k: usize| -> Vec<f64> { (0..k).map(|_| rng.random_range(0..8) as f64).collect() };
        let (a, b) = (draw(na), draw(nb));
        let p = wilcoxon_rank_sum(&a, &b).map_err(|e| e.to_string())?.p_value;
        if p != exact_oracle(&a, &b).min(1.0) {
            mismatches += 1;
        }
    }
    let a: Vec<f64> = (0..60).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
    let b: Vec<f64> = (0..60).map(|_| rng.sample::<f64, _>(StandardNormal) + 0.3).collect();
    let p = wilcoxon_rank_sum(&a, &b).map_err(|e| e.to_string())?.p_value;
    let oracle = permutation_oracle(&a, &b, 100_000, &mut rng);
    check(
        mismatches == 0 && (p - oracle).abs() < 0.02,
        format!("exact mismatches {mismatches}/300; n=m=60 p {p:.4} vs permutation {oracle:.4}"),
    )
}

fn determinism() -> Outcome {
    let dirs = [tempfile::tempdir().map_err(|e| e.to_string())?, tempfile::tempdir().map_err(|e| e.to_string())?];
    for d in &dirs {
        let status = Command::new(env!("CARGO_BIN_EXE_erase"))
            .args(["scenario1", "--seed", "7", "--datasets", "5", "--out"])
            .arg(d.path())
            .output()
            .map_err(|e| e.to_string())?
            .status;
        if !status.success() {
            return Err(format!("scenario1 exited with {status}"));
        }
    }
    let csvs = |dir: &std::path::Path| -> Result<Vec<(String, Vec<u8>)>, String> {
        let mut v = Vec::new();
        for e in std::fs::read_dir(dir).map_err(|e| e.to_string())? {
            let p = e.map_err(|e| e.to_string())?.path();
            if p.extension().is_some_and(|x| x == "csv") {
                v.push((p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).map_err(|e| e.to_string())?));
            }
        }
        v.sort();
        Ok(v)
    };
    let (a, b) = (csvs(dirs[0].path())?, csvs(dirs[1].path())?);
    let bytes: usize = a.iter().map(|(_, c)| c.len()).sum();
    check(!a.is_empty() && a == b, format!("{} CSV files, {bytes} bytes, identical={}", a.len(), a == b))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("effectiveness", effectiveness),
        ("false positive rate", false_positive),
        ("sensitivity", sensitivity),
        ("HF reduction direction", hf_direction),
        ("μ feature preservation", mu_preserved),
        ("ICA correctness", ica_oracle),
        ("equation fixtures", equation_fixtures),
        ("rank-sum oracle", rank_sum_oracle),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            Err(e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into()))
        });
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(d) => println!("PASS criterion {} ({name}) [{secs:.0} s]: {d}", i + 1),
            Err(d) => {
                failed += 1;
                println!("FAIL criterion {} ({name}) [{secs:.0} s]: {d}", i + 1);
            }
        }
    }
    println!("{} of 9 criteria passed", 9 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
