//! Two-sample Wilcoxon rank-sum test.

use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};

/// Combined sample size up to which the null distribution is enumerated.
pub const EXACT_MAX_N: usize = 12;

#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct RankSumResult {
    /// Sum of the (mid)ranks of the first sample.
    pub statistic: f64,
    pub p_value: f64,
    pub exact: bool,
}

/// Midranks (1-based) of `values`, ties sharing the average rank.
pub fn midranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = r;
        }
        i = j + 1;
    }
    ranks
}

/// Two-sided rank-sum test of `a` against `b`.
pub fn wilcoxon_rank_sum(a: &[f64], b: &[f64]) -> Result<RankSumResult> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::InvalidArgument("rank-sum test needs two nonempty samples".into()));
    }
    if a.iter().chain(b).any(|v| v.is_nan()) {
        return Err(Error::InvalidArgument("rank-sum test got NaN".into()));
    }
    let n = a.len();
    let m = b.len();
    let total = n + m;
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let ranks = midranks(&pooled);
    let w: f64 = ranks[..n].iter().sum();
    let mu = n as f64 * (total + 1) as f64 / 2.0;

    if pooled.iter().all(|&v| v == pooled[0]) {
        return Ok(RankSumResult {
            statistic: w,
            p_value: 1.0,
            exact: total <= EXACT_MAX_N,
        });
    }

    if total <= EXACT_MAX_N {
        let observed = (w - mu).abs();
        let mut hits = 0u64;
        let mut count = 0u64;
        // Every n-subset of the pooled ranks, as a bitmask.
        for mask in 0u32..(1u32 << total) {
            if mask.count_ones() as usize != n {
                continue;
            }
            let s: f64 = (0..total).filter(|&i| mask >> i & 1 == 1).map(|i| ranks[i]).sum();
            count += 1;
            if (s - mu).abs() >= observed - 1e-9 {
                hits += 1;
            }
        }
        return Ok(RankSumResult {
            statistic: w,
            p_value: hits as f64 / count as f64,
            exact: true,
        });
    }

    let mut sorted = pooled.clone();
    sorted.sort_by(f64::total_cmp);
    let mut tie_term = 0.0;
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i;
        while j + 1 < sorted.len() && sorted[j + 1] == sorted[i] {
            j += 1;
        }
        let t = (j - i + 1) as f64;
        tie_term += t * t * t - t;
        i = j + 1;
    }
    let nf = total as f64;
    let var = n as f64 * m as f64 / 12.0 * ((nf + 1.0) - tie_term / (nf * (nf - 1.0)));
    let z = ((w - mu).abs() - 0.5).max(0.0) / var.sqrt();
    let normal = Normal::standard();
    let p = (2.0 * normal.sf(z)).min(1.0);
    Ok(RankSumResult {
        statistic: w,
        p_value: p,
        exact: false,
    })
}
