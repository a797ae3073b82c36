//! Condition-level aggregation of session outcomes.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::output::write_csv;
use super::session::{BandTables, Condition, SessionOutcome};
use crate::error::{Error, Result};
use crate::signal::wilcoxon_rank_sum;

/// Per-run summary values of one condition.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunValues {
    /// Movement HF z-score averaged over valid channels.
    pub hf_z: f64,
    /// Movement μ z-score at the μ channel.
    pub mu_z: f64,
    /// NaN for the baseline.
    pub hf_percent_reduction: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionSummary {
    pub condition: Condition,
    pub n_runs: usize,
    pub hf_z_mean: f64,
    pub hf_z_sd: f64,
    pub mu_z_mean: f64,
    pub mu_z_sd: f64,
    pub reduction_mean: f64,
    pub reduction_sd: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairwiseTest {
    pub band: String,
    pub a: Condition,
    pub b: Condition,
    pub p_value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReductionRow {
    pub subject: String,
    pub session: String,
    pub condition: Condition,
    pub hf_percent_reduction: f64,
    pub mu_channel_z: f64,
    pub n_rejected: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SessionReport {
    pub conditions: Vec<ConditionSummary>,
    pub pairwise: Vec<PairwiseTest>,
    pub reductions: Vec<ReductionRow>,
}

/// Mean and sample standard deviation (0 for a single value).
pub fn mean_sd(x: &[f64]) -> (f64, f64) {
    if x.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    if x.len() < 2 {
        return (mean, 0.0);
    }
    let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

fn table_values(t: &BandTables, mu_label: &str) -> (f64, f64) {
    let hf: Vec<f64> = t.channels.iter().map(|c| c.hf_z).filter(|v| v.is_finite()).collect();
    let hf_z = if hf.is_empty() { f64::NAN } else { hf.iter().sum::<f64>() / hf.len() as f64 };
    let mu_z = t
        .channels
        .iter()
        .find(|c| c.label == mu_label)
        .map_or(f64::NAN, |c| c.mu_z);
    (hf_z, mu_z)
}

/// Per-condition values, with the baseline taken once per subject/session.
pub fn run_values(runs: &[SessionOutcome], mu_label: &str) -> BTreeMap<Condition, Vec<RunValues>> {
    let mut out: BTreeMap<Condition, Vec<RunValues>> = BTreeMap::new();
    let mut seen = std::collections::BTreeSet::new();
    let mut sorted: Vec<&SessionOutcome> = runs.iter().collect();
    sorted.sort_by(|a, b| (&a.subject, &a.session, a.condition).cmp(&(&b.subject, &b.session, b.condition)));
    for r in sorted {
        if seen.insert((r.subject.clone(), r.session.clone())) {
            let (hf_z, mu_z) = table_values(&r.baseline, mu_label);
            out.entry(Condition::Baseline).or_default().push(RunValues {
                hf_z,
                mu_z,
                hf_percent_reduction: f64::NAN,
            });
        }
        let (hf_z, mu_z) = table_values(&r.cleaned, mu_label);
        out.entry(r.condition).or_default().push(RunValues {
            hf_z,
            mu_z,
            hf_percent_reduction: r.hf_percent_reduction,
        });
    }
    out
}

/// Means and SDs per condition and rank-sum p-values between every pair of
/// conditions for the HF and μ summaries.
pub fn aggregate_report(runs: &[SessionOutcome], mu_label: &str) -> Result<SessionReport> {
    if runs.is_empty() {
        return Err(Error::InvalidArgument("no runs to aggregate".into()));
    }
    let values = run_values(runs, mu_label);
    let conditions = values
        .iter()
        .map(|(&condition, v)| {
            let col = |f: fn(&RunValues) -> f64| v.iter().map(f).collect::<Vec<_>>();
            let (hf_z_mean, hf_z_sd) = mean_sd(&col(|r| r.hf_z));
            let (mu_z_mean, mu_z_sd) = mean_sd(&col(|r| r.mu_z));
            let (reduction_mean, reduction_sd) = if condition == Condition::Baseline {
                (f64::NAN, f64::NAN)
            } else {
                mean_sd(&col(|r| r.hf_percent_reduction))
            };
            ConditionSummary {
                condition,
                n_runs: v.len(),
                hf_z_mean,
                hf_z_sd,
                mu_z_mean,
                mu_z_sd,
                reduction_mean,
                reduction_sd,
            }
        })
        .collect();
    let keys: Vec<Condition> = values.keys().copied().collect();
    let mut pairwise = Vec::new();
    for (band, f) in [("hf", (|r: &RunValues| r.hf_z) as fn(&RunValues) -> f64), ("mu", |r: &RunValues| r.mu_z)] {
        for (i, &a) in keys.iter().enumerate() {
            for &b in &keys[i + 1..] {
                let xa: Vec<f64> = values[&a].iter().map(f).collect();
                let xb: Vec<f64> = values[&b].iter().map(f).collect();
                pairwise.push(PairwiseTest {
                    band: band.into(),
                    a,
                    b,
                    p_value: wilcoxon_rank_sum(&xa, &xb)?.p_value,
                });
            }
        }
    }
    let mut reductions: Vec<ReductionRow> = runs
        .iter()
        .map(|r| ReductionRow {
            subject: r.subject.clone(),
            session: r.session.clone(),
            condition: r.condition,
            hf_percent_reduction: r.hf_percent_reduction,
            mu_channel_z: r.mu_channel_z,
            n_rejected: r.report.artifact_ics.len(),
        })
        .collect();
    reductions.sort_by(|a, b| (&a.subject, &a.session, a.condition).cmp(&(&b.subject, &b.session, b.condition)));
    Ok(SessionReport {
        conditions,
        pairwise,
        reductions,
    })
}

impl SessionReport {
    pub fn condition(&self, c: Condition) -> Option<&ConditionSummary> {
        self.conditions.iter().find(|s| s.condition == c)
    }

    pub fn p_value(&self, band: &str, a: Condition, b: Condition) -> Option<f64> {
        self.pairwise
            .iter()
            .find(|t| t.band == band && ((t.a == a && t.b == b) || (t.a == b && t.b == a)))
            .map(|t| t.p_value)
    }

    /// `session_conditions.csv`, `session_pairwise.csv`, `session_reductions.csv`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        write_csv(dir.join("session_conditions.csv"), &self.conditions)?;
        write_csv(dir.join("session_pairwise.csv"), &self.pairwise)?;
        write_csv(dir.join("session_reductions.csv"), &self.reductions)?;
        Ok(())
    }
}
