//! Two-sided Wilcoxon rank-sum test, exact and large-sample.

use erase::signal::wilcoxon_rank_sum;

fn main() -> erase::error::Result<()> {
    let r = wilcoxon_rank_sum(&[1.0, 2.0, 3.0, 4.0], &[10.0, 11.0, 12.0, 13.0])?;
    println!("small: W = {} p = {:.6} exact = {}", r.statistic, r.p_value, r.exact);
    let a: Vec<f64> = (0..40).map(|i| (i as f64 * 0.37).sin()).collect();
    let b: Vec<f64> = (0..40).map(|i| (i as f64 * 0.53).cos() + 0.5).collect();
    let r = wilcoxon_rank_sum(&a, &b)?;
    println!("large: W = {} p = {:.6} exact = {}", r.statistic, r.p_value, r.exact);
    Ok(())
}
