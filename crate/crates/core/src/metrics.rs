//! Artifact index, artifact events, event rates and percent reduction.

use ndarray::ArrayView2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::{BandPowerSeries, Phase};

/// One mixing-matrix column split by ground truth into contaminated EEG
/// rows, uncontaminated EEG rows and reference rows.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArtifactColumnView {
    pub contaminated: Vec<f64>,
    pub uncontaminated: Vec<f64>,
    pub reference: Vec<f64>,
}

impl ArtifactColumnView {
    /// Column `j` of a matrix with `t` EEG rows followed by reference rows.
    pub fn from_column(a: ArrayView2<'_, f64>, j: usize, contaminated_rows: &[usize], t: usize) -> Result<Self> {
        if j >= a.ncols() {
            return Err(Error::IndexOutOfRange {
                what: "mixing column",
                index: j,
                len: a.ncols(),
            });
        }
        if t > a.nrows() {
            return Err(Error::InvalidArgument(format!("{t} EEG rows in a {}-row matrix", a.nrows())));
        }
        if let Some(&r) = contaminated_rows.iter().find(|&&r| r >= t) {
            return Err(Error::IndexOutOfRange {
                what: "contaminated EEG row",
                index: r,
                len: t,
            });
        }
        let col = a.column(j);
        let mut view = ArtifactColumnView {
            contaminated: Vec::new(),
            uncontaminated: Vec::new(),
            reference: col.iter().skip(t).copied().collect(),
        };
        for (i, &v) in col.iter().take(t).enumerate() {
            if contaminated_rows.contains(&i) {
                view.contaminated.push(v);
            } else {
                view.uncontaminated.push(v);
            }
        }
        Ok(view)
    }

    pub fn mean_abs_contaminated(&self) -> f64 {
        mean_abs(&self.contaminated)
    }

    pub fn mean_abs_uncontaminated(&self) -> f64 {
        mean_abs(&self.uncontaminated)
    }

    pub fn max_abs_reference(&self) -> f64 {
        self.reference.iter().fold(0.0, |m: f64, v| m.max(v.abs()))
    }
}

fn mean_abs(x: &[f64]) -> f64 {
    x.iter().map(|v| v.abs()).sum::<f64>() / x.len() as f64
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArtifactIndex {
    /// +inf when every uncontaminated coefficient is zero.
    pub value: f64,
    pub zero_denominator: bool,
}

/// mean|a*| / mean|a| over the EEG rows of an artifact-IC column.
pub fn artifact_index(view: &ArtifactColumnView) -> Result<ArtifactIndex> {
    if view.contaminated.is_empty() || view.uncontaminated.is_empty() {
        return Err(Error::InvalidArgument(format!(
            "artifact index needs contaminated and uncontaminated rows ({} and {})",
            view.contaminated.len(),
            view.uncontaminated.len()
        )));
    }
    let den = view.mean_abs_uncontaminated();
    if den == 0.0 {
        return Ok(ArtifactIndex {
            value: f64::INFINITY,
            zero_denominator: true,
        });
    }
    Ok(ArtifactIndex {
        value: view.mean_abs_contaminated() / den,
        zero_denominator: false,
    })
}

/// mean|a*| - mean|a| > 0.05 max|ã|.
pub fn artifact_event(view: &ArtifactColumnView) -> bool {
    view.mean_abs_contaminated() - view.mean_abs_uncontaminated() > 0.05 * view.max_abs_reference()
}

/// Fraction of true events.
pub fn rate_over_datasets(events: &[bool]) -> Result<f64> {
    if events.is_empty() {
        return Err(Error::InvalidArgument("no datasets to rate".into()));
    }
    Ok(events.iter().filter(|&&e| e).count() as f64 / events.len() as f64)
}

/// |ΣΣ before - ΣΣ after| / ΣΣ before x 100 over channels and trials of
/// the movement-phase z-scored power. Channels flagged invalid in either
/// series are left out of both sums.
pub fn percent_reduction(before: &BandPowerSeries, after: &BandPowerSeries) -> Result<f64> {
    if before.idle.dim() != after.idle.dim() || before.movement.dim() != after.movement.dim() {
        return Err(Error::InvalidArgument("band-power series differ in shape".into()));
    }
    let mut sb = 0.0;
    let mut sa = 0.0;
    for ch in 0..before.n_channels() {
        if !before.is_valid(ch) || !after.is_valid(ch) {
            continue;
        }
        sb += before.phase(Phase::Movement).row(ch).sum();
        sa += after.phase(Phase::Movement).row(ch).sum();
    }
    if sb == 0.0 || !sb.is_finite() {
        return Err(Error::Numerical(format!("percent reduction denominator is {sb}")));
    }
    Ok((sb - sa).abs() / sb * 100.0)
}
