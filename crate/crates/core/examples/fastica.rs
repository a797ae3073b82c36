//! Blind separation of four mixed non-Gaussian sources.

use std::f64::consts::PI;

use erase::ica::{fastica, FastIcaOptions};
use ndarray::{Array2, Axis};
use rand::Rng;

fn main() -> erase::error::Result<()> {
    let n = 20_000;
    let mut rng = erase::seed::rng(11);
    let mut s = Array2::zeros((4, n));
    for i in 0..n {
        let t = i as f64 / 1000.0;
        s[[0, i]] = (2.0 * PI * 7.0 * t).sin();
        s[[1, i]] = if (2.0 * PI * 3.0 * t).sin() > 0.0 { 1.0 } else { -1.0 };
        s[[2, i]] = rng.random::<f64>() * 2.0 - 1.0;
        s[[3, i]] = -(rng.random::<f64>()).ln() * if rng.random::<bool>() { 1.0 } else { -1.0 };
    }
    let a = Array2::from_shape_fn((4, 4), |_| rng.random::<f64>() * 2.0 - 1.0);
    let x = a.dot(&s);
    let dec = fastica(x.view(), &FastIcaOptions::default(), 0)?;
    println!("{:?}", dec.diagnostics);
    for (k, est) in dec.sources.axis_iter(Axis(0)).enumerate() {
        let best = (0..4)
            .map(|j| {
                let src = s.row(j);
                let (ms, me) = (src.mean().unwrap(), est.mean().unwrap());
                let cov: f64 = src.iter().zip(est).map(|(p, q)| (p - ms) * (q - me)).sum();
                let vs: f64 = src.iter().map(|p| (p - ms).powi(2)).sum();
                let ve: f64 = est.iter().map(|q| (q - me).powi(2)).sum();
                (cov / (vs * ve).sqrt()).abs()
            })
            .fold(0.0, f64::max);
        println!("IC{} best |corr| with a true source: {best:.4}", k + 1);
    }
    Ok(())
}
