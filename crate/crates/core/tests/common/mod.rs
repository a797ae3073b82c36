#![allow(dead_code)]

use ndarray::{Array2, ArrayView1, ArrayView2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, StandardNormal};

pub fn corr(a: ArrayView1<f64>, b: ArrayView1<f64>) -> f64 {
    let (ma, mb) = (a.mean().unwrap(), b.mean().unwrap());
    let cov: f64 = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let va: f64 = a.iter().map(|x| (x - ma).powi(2)).sum();
    let vb: f64 = b.iter().map(|y| (y - mb).powi(2)).sum();
    cov / (va * vb).sqrt()
}

fn laplace(rng: &mut ChaCha8Rng) -> f64 {
    let e: f64 = Exp::new(1.0).unwrap().sample(rng);
    if rng.random::<bool>() { e } else { -e }
}

/// Two Laplacian sources, `n` samples.
pub fn two_sources(n: usize, seed: u64) -> Array2<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Array2::from_shape_fn((2, n), |_| laplace(&mut rng))
}

/// Two Laplacian, one uniform and one sinusoidal source.
pub fn four_sources(n: usize, seed: u64) -> Array2<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut s = Array2::zeros((4, n));
    for t in 0..n {
        s[[0, t]] = laplace(&mut rng);
        s[[1, t]] = laplace(&mut rng);
        s[[2, t]] = rng.random_range(-1.0..1.0);
        s[[3, t]] = (2.0 * std::f64::consts::PI * 7.3 * t as f64 / 1000.0).sin();
    }
    s
}

pub fn random_mixing(k: usize, seed: u64) -> Array2<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    Array2::from_shape_fn((k, k), |_| StandardNormal.sample(&mut rng))
}

fn permutations(k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(k - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, k - 1);
            out.push(q);
        }
    }
    out
}

/// Exhaustive matching of estimated rows to true rows over every
/// permutation and sign pattern; returns the signed correlation of each
/// true source with its matched estimate and the permutation used
/// (`perm[i]` = estimate matched to truth `i`).
pub fn match_sources(truth: ArrayView2<f64>, est: ArrayView2<f64>) -> (Vec<f64>, Vec<usize>) {
    let k = truth.nrows();
    let c = Array2::from_shape_fn((k, k), |(i, j)| corr(truth.row(i), est.row(j)));
    let mut best = (f64::MIN, vec![], vec![]);
    for perm in permutations(k) {
        for signs in 0u32..(1 << k) {
            let vals: Vec<f64> = (0..k)
                .map(|i| (if signs >> i & 1 == 1 { -1.0 } else { 1.0 }) * c[[i, perm[i]]])
                .collect();
            let total: f64 = vals.iter().sum();
            if total > best.0 {
                best = (total, vals, perm.clone());
            }
        }
    }
    (best.1, best.2)
}

pub fn rel_frobenius(a: ArrayView2<f64>, b: ArrayView2<f64>) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum();
    let den: f64 = b.iter().map(|y| y * y).sum();
    (num / den).sqrt()
}

/// Population covariance computed entry by entry.
pub fn covariance_direct(x: ArrayView2<f64>) -> Array2<f64> {
    let (c, n) = x.dim();
    let means: Vec<f64> = (0..c).map(|i| x.row(i).sum() / n as f64).collect();
    Array2::from_shape_fn((c, c), |(i, j)| {
        (0..n).map(|t| (x[[i, t]] - means[i]) * (x[[j, t]] - means[j])).sum::<f64>() / n as f64
    })
}

pub fn max_dev_from_identity(m: ArrayView2<f64>) -> f64 {
    m.indexed_iter()
        .map(|((i, j), v)| (v - if i == j { 1.0 } else { 0.0 }).abs())
        .fold(0.0, f64::max)
}

pub mod fixtures {
    use erase::erase::rms_of_reference_rows;
    use erase::metrics::{artifact_event, artifact_index, percent_reduction, ArtifactColumnView};
    use erase::signal::{BandPowerSeries, FrequencyBand};
    use ndarray::Array2;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    pub fn matrix(rows: usize, cols: usize, seed: u64) -> Array2<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Array2::from_shape_fn((rows, cols), |_| rng.random_range(-1.0..1.0))
    }

    /// Mean over reference rows of the row RMS, as library value and oracle.
    pub fn rms_fixture() -> (f64, f64) {
        let a = matrix(6, 6, 61);
        let (t, tau) = (4, 2);
        let mut total = 0.0;
        for i in t..t + tau {
            let mut sq = 0.0;
            for j in 0..t + tau {
                sq += a[[i, j]] * a[[i, j]];
            }
            total += (sq / (t + tau) as f64).sqrt();
        }
        (rms_of_reference_rows(a.view(), t, tau).unwrap(), total / tau as f64)
    }

    pub const CONTAMINATED_ROWS: [usize; 6] = [1, 4, 9, 17, 22, 30];

    fn split(a: &Array2<f64>, j: usize, t: usize) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let (mut c, mut u, mut r) = (vec![], vec![], vec![]);
        for i in 0..a.nrows() {
            let v = a[[i, j]].abs();
            if i >= t {
                r.push(v);
            } else if CONTAMINATED_ROWS.contains(&i) {
                c.push(v);
            } else {
                u.push(v);
            }
        }
        (c, u, r)
    }

    /// Artifact index of every column of a 36x36 fixture (32 EEG rows).
    pub fn artifact_index_fixture() -> Vec<(f64, f64)> {
        let a = matrix(36, 36, 88);
        (0..36)
            .map(|j| {
                let view = ArtifactColumnView::from_column(a.view(), j, &CONTAMINATED_ROWS, 32).unwrap();
                let (c, u, _) = split(&a, j, 32);
                let oracle = (c.iter().sum::<f64>() / c.len() as f64) / (u.iter().sum::<f64>() / u.len() as f64);
                (artifact_index(&view).unwrap().value, oracle)
            })
            .collect()
    }

    /// Event predicate and the margin mean|a*| - mean|a| - 0.05 max|ã| for
    /// every column of the 36x36 fixture, scaled so both outcomes occur.
    pub fn event_fixture() -> Vec<(bool, f64)> {
        let mut a = matrix(36, 36, 89);
        for j in 0..36 {
            for &i in CONTAMINATED_ROWS.iter() {
                a[[i, j]] *= 0.5 + j as f64 / 18.0;
            }
        }
        (0..36)
            .map(|j| {
                let view = ArtifactColumnView::from_column(a.view(), j, &CONTAMINATED_ROWS, 32).unwrap();
                let (c, u, r) = split(&a, j, 32);
                let max_ref = r.iter().cloned().fold(0.0, f64::max);
                let margin = c.iter().sum::<f64>() / c.len() as f64 - u.iter().sum::<f64>() / u.len() as f64
                    - 0.05 * max_ref;
                (artifact_event(&view), margin)
            })
            .collect()
    }

    pub fn series(idle: Array2<f64>, movement: Array2<f64>) -> BandPowerSeries {
        BandPowerSeries {
            band_name: "hf".into(),
            band: FrequencyBand::HIGH_FREQUENCY,
            labels: (0..idle.nrows()).map(|i| format!("c{i}")).collect(),
            idle,
            movement,
            zscored: true,
            invalid_channels: Vec::new(),
        }
    }

    /// Percent reduction of a random 8-channel, 10-trial fixture.
    pub fn percent_reduction_fixture() -> (f64, f64) {
        let before = matrix(8, 10, 7).mapv(|v| v + 1.5);
        let after = matrix(8, 10, 8).mapv(|v| 0.3 * v + 0.2);
        let (mut sb, mut sa) = (0.0, 0.0);
        for i in 0..8 {
            for k in 0..10 {
                sb += before[[i, k]];
                sa += after[[i, k]];
            }
        }
        let idle = Array2::zeros((8, 10));
        let got = percent_reduction(&series(idle.clone(), before), &series(idle, after)).unwrap();
        (got, (sb - sa).abs() / sb * 100.0)
    }
}

pub mod ranksum {
    use rand::Rng;

    /// Two-sided p by enumerating every split of the pooled sample.
    pub fn exact_oracle(a: &[f64], b: &[f64]) -> f64 {
        let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
        let n = pooled.len();
        let ranks: Vec<f64> = pooled
            .iter()
            .map(|x| {
                let below = pooled.iter().filter(|y| *y < x).count() as f64;
                let equal = pooled.iter().filter(|y| *y == x).count() as f64;
                below + (equal + 1.0) / 2.0
            })
            .collect();
        let w: f64 = ranks[..a.len()].iter().sum();
        let mu = a.len() as f64 * (n as f64 + 1.0) / 2.0;
        let (mut hits, mut total) = (0u64, 0u64);
        for mask in 0u32..(1 << n) {
            if mask.count_ones() as usize != a.len() {
                continue;
            }
            total += 1;
            let s: f64 = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| ranks[i]).sum();
            if (s - mu).abs() >= (w - mu).abs() - 1e-9 {
                hits += 1;
            }
        }
        hits as f64 / total as f64
    }

    /// Two-sided p of the rank-sum difference under random relabelling.
    pub fn permutation_oracle<R: Rng>(a: &[f64], b: &[f64], resamples: usize, rng: &mut R) -> f64 {
        let n_a = a.len();
        let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
        let mean_diff = |x: &[f64]| x[..n_a].iter().sum::<f64>() - x[n_a..].iter().sum::<f64>();
        let rank = |x: &[f64]| -> Vec<f64> {
            let mut idx: Vec<usize> = (0..x.len()).collect();
            idx.sort_by(|&i, &j| x[i].total_cmp(&x[j]));
            let mut r = vec![0.0; x.len()];
            for (k, &i) in idx.iter().enumerate() {
                r[i] = k as f64 + 1.0;
            }
            r
        };
        let ranks = rank(&pooled);
        let observed = mean_diff(&ranks).abs();
        let mut perm = ranks.clone();
        let mut hits = 0;
        for _ in 0..resamples {
            for i in (1..perm.len()).rev() {
                let j = rng.random_range(0..=i);
                perm.swap(i, j);
            }
            if mean_diff(&perm).abs() >= observed - 1e-9 {
                hits += 1;
            }
        }
        hits as f64 / resamples as f64
    }
}
