//! Centering and PCA whitening.

use nalgebra::{DMatrix, SymmetricEigen};
use ndarray::{Array1, Array2, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Eigenvalues below this fraction of the largest are treated as zero.
pub const RANK_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WhiteningTransform {
    pub means: Array1<f64>,
    /// rank x channels.
    pub whitening: Array2<f64>,
    /// channels x rank.
    pub dewhitening: Array2<f64>,
    pub rank: usize,
}

impl WhiteningTransform {
    pub fn apply(&self, data: ArrayView2<'_, f64>) -> Array2<f64> {
        let centered = &data - &self.means.view().insert_axis(Axis(1));
        self.whitening.dot(&centered)
    }
}

pub(crate) fn to_nalgebra(a: &Array2<f64>) -> DMatrix<f64> {
    DMatrix::from_fn(a.nrows(), a.ncols(), |i, j| a[[i, j]])
}

pub(crate) fn from_nalgebra(m: &DMatrix<f64>) -> Array2<f64> {
    Array2::from_shape_fn((m.nrows(), m.ncols()), |(i, j)| m[(i, j)])
}

/// Population covariance (divided by n) of already-centered rows.
pub fn covariance(centered: ArrayView2<'_, f64>) -> Array2<f64> {
    centered.dot(&centered.t()) / centered.ncols() as f64
}

/// Centers each row and whitens onto the retained eigen-subspace.
///
/// `components` is the number of dimensions the caller needs; if the data
/// carry fewer usable dimensions the call fails with the rank found.
pub fn center_and_whiten(data: ArrayView2<'_, f64>, components: Option<usize>) -> Result<(Array2<f64>, WhiteningTransform)> {
    let (c, n) = data.dim();
    if c == 0 || n <= c {
        return Err(Error::InvalidArgument(format!(
            "whitening needs more samples than channels ({c} channels, {n} samples)"
        )));
    }
    let means = data.mean_axis(Axis(1)).expect("nonempty rows");
    let centered = &data - &means.view().insert_axis(Axis(1));
    let cov = covariance(centered.view());
    if cov.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("covariance is not finite".into()));
    }
    let eig = SymmetricEigen::new(to_nalgebra(&cov));
    let max = eig.eigenvalues.iter().fold(0.0f64, |m, &v| m.max(v));
    let mut keep: Vec<usize> = (0..c)
        .filter(|&i| max > 0.0 && eig.eigenvalues[i] >= RANK_TOLERANCE * max)
        .collect();
    keep.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let rank = keep.len();
    let required = components.unwrap_or(c);
    if rank < required {
        return Err(Error::RankDeficient { rank, required });
    }
    keep.truncate(required);

    let mut whitening = Array2::zeros((required, c));
    let mut dewhitening = Array2::zeros((c, required));
    for (k, &i) in keep.iter().enumerate() {
        let d = eig.eigenvalues[i].sqrt();
        for ch in 0..c {
            let e = eig.eigenvectors[(ch, i)];
            whitening[[k, ch]] = e / d;
            dewhitening[[ch, k]] = e * d;
        }
    }
    let z = whitening.dot(&centered);
    Ok((
        z,
        WhiteningTransform {
            means,
            whitening,
            dewhitening,
            rank: required,
        },
    ))
}
