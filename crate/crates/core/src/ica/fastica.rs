//! Symmetric fixed-point FastICA with the tanh contrast.

use std::collections::BTreeSet;

use nalgebra::SymmetricEigen;
use ndarray::{Array1, Array2, ArrayView2, Axis, Zip};
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::whiten::{center_and_whiten, from_nalgebra, to_nalgebra, WhiteningTransform};
use crate::error::{Error, Result};
use crate::seed;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FastIcaOptions {
    pub max_iter: usize,
    pub tol: f64,
    /// Fresh random starts tried after a run fails to converge.
    pub max_restarts: usize,
    /// Turn non-convergence into an error instead of a flagged result.
    pub strict: bool,
}

impl Default for FastIcaOptions {
    fn default() -> Self {
        Self {
            max_iter: 1000,
            tol: 1e-6,
            max_restarts: 5,
            strict: false,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    /// Iterations of the run that was kept.
    pub iterations: usize,
    pub final_tolerance: f64,
    pub converged: bool,
    pub restarts: usize,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IcaDecomposition {
    /// channels x components; column j holds IC j's channel loadings.
    pub mixing: Array2<f64>,
    /// components x channels, acting on centered data.
    pub unmixing: Array2<f64>,
    /// components x samples, unit variance rows.
    pub sources: Array2<f64>,
    pub whitening: WhiteningTransform,
    /// Rotation found in the whitened space (components x components).
    pub rotation: Array2<f64>,
    pub diagnostics: Diagnostics,
}

impl IcaDecomposition {
    pub fn n_components(&self) -> usize {
        self.sources.nrows()
    }

    pub fn n_channels(&self) -> usize {
        self.mixing.nrows()
    }

    /// The decomposition, or `NotConverged` if the iteration did not settle.
    pub fn require_converged(self) -> Result<Self> {
        if self.diagnostics.converged {
            Ok(self)
        } else {
            Err(Error::NotConverged {
                iterations: self.diagnostics.iterations,
                final_tolerance: self.diagnostics.final_tolerance,
                restarts: self.diagnostics.restarts,
            })
        }
    }
}

/// (W W^T)^{-1/2} W.
pub fn symmetric_decorrelation(w: &Array2<f64>) -> Array2<f64> {
    let eig = SymmetricEigen::new(to_nalgebra(&w.dot(&w.t())));
    let n = w.nrows();
    let e = from_nalgebra(&eig.eigenvectors);
    let inv_sqrt = Array1::from_iter(eig.eigenvalues.iter().map(|&d| 1.0 / d.max(f64::MIN_POSITIVE).sqrt()));
    let scaled = Array2::from_shape_fn((n, n), |(i, j)| e[[i, j]] * inv_sqrt[j]);
    scaled.dot(&e.t()).dot(w)
}

struct Run {
    w: Array2<f64>,
    iterations: usize,
    final_tolerance: f64,
    converged: bool,
}

fn iterate(z: &Array2<f64>, w0: Array2<f64>, opts: &FastIcaOptions) -> Run {
    let n = z.ncols() as f64;
    let mut w = symmetric_decorrelation(&w0);
    let mut g = Array2::<f64>::zeros((w.nrows(), z.ncols()));
    let mut lim = f64::INFINITY;
    for it in 1..=opts.max_iter {
        ndarray::linalg::general_mat_mul(1.0, &w, z, 0.0, &mut g);
        g.mapv_inplace(f64::tanh);
        let gp: Array1<f64> = g
            .axis_iter(Axis(0))
            .map(|row| 1.0 - row.iter().map(|v| v * v).sum::<f64>() / n)
            .collect();
        let mut w_new = g.dot(&z.t()) / n;
        Zip::from(w_new.rows_mut()).and(w.rows()).and(&gp).for_each(|mut new, old, &d| {
            new.scaled_add(-d, &old);
        });
        let w_new = symmetric_decorrelation(&w_new);
        lim = w_new
            .rows()
            .into_iter()
            .zip(w.rows())
            .map(|(a, b)| (1.0 - a.dot(&b).abs()).abs())
            .fold(0.0, f64::max);
        w = w_new;
        if lim <= opts.tol {
            return Run {
                w,
                iterations: it,
                final_tolerance: lim,
                converged: true,
            };
        }
    }
    Run {
        w,
        iterations: opts.max_iter,
        final_tolerance: lim,
        converged: false,
    }
}

/// FastICA on a channels x samples matrix.
///
/// Each start draws a Gaussian matrix from `derive_seed(seed, attempt)`.
/// When every start fails to converge the run with the smallest final step
/// is returned with `diagnostics.converged == false` (or an error when
/// `opts.strict` is set).
pub fn fastica(data: ArrayView2<'_, f64>, opts: &FastIcaOptions, seed: u64) -> Result<IcaDecomposition> {
    if opts.max_iter == 0 {
        return Err(Error::InvalidArgument("max_iter must be >= 1".into()));
    }
    let (z, whitening) = center_and_whiten(data, None)?;
    let r = whitening.rank;

    let mut best: Option<(Run, usize)> = None;
    for attempt in 0..=opts.max_restarts {
        let mut rng = seed::rng(seed::derive_seed(seed, attempt as u64));
        let w0 = Array2::from_shape_fn((r, r), |_| StandardNormal.sample(&mut rng));
        let run = iterate(&z, w0, opts);
        let done = run.converged;
        if best.as_ref().is_none_or(|(b, _)| run.final_tolerance < b.final_tolerance) || done {
            best = Some((run, attempt));
        }
        if done {
            break;
        }
    }
    let (run, restarts) = best.expect("at least one attempt");
    if !run.final_tolerance.is_finite() {
        return Err(Error::Numerical("FastICA iteration produced non-finite values".into()));
    }
    let diagnostics = Diagnostics {
        iterations: run.iterations,
        final_tolerance: run.final_tolerance,
        converged: run.converged,
        restarts,
        seed,
    };
    if opts.strict && !run.converged {
        return Err(Error::NotConverged {
            iterations: run.iterations,
            final_tolerance: run.final_tolerance,
            restarts,
        });
    }
    let sources = run.w.dot(&z);
    let mixing = whitening.dewhitening.dot(&run.w.t());
    let unmixing = run.w.dot(&whitening.whitening);
    Ok(IcaDecomposition {
        mixing,
        unmixing,
        sources,
        whitening,
        rotation: run.w,
        diagnostics,
    })
}

/// Remix without the rejected components and restore the channel means.
pub fn reconstruct_without(dec: &IcaDecomposition, rejected: &BTreeSet<usize>) -> Result<Array2<f64>> {
    let k = dec.n_components();
    if let Some(&bad) = rejected.iter().find(|&&i| i >= k) {
        return Err(Error::IndexOutOfRange {
            what: "independent component",
            index: bad,
            len: k,
        });
    }
    let keep: Vec<usize> = (0..k).filter(|i| !rejected.contains(i)).collect();
    let a = dec.mixing.select(Axis(1), &keep);
    let s = dec.sources.select(Axis(0), &keep);
    let mut out = a.dot(&s);
    out += &dec.whitening.means.view().insert_axis(Axis(1));
    Ok(out)
}
