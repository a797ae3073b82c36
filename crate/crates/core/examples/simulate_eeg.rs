//! Simulated 32-channel EEG: amplitude bound and neighbour correlation.

use erase::eeg_sim::simulate_eeg;

fn corr(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let (ma, mb) = (a.iter().sum::<f64>() / n, b.iter().sum::<f64>() / n);
    let cov: f64 = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let va: f64 = a.iter().map(|x| (x - ma).powi(2)).sum();
    let vb: f64 = b.iter().map(|y| (y - mb).powi(2)).sum();
    cov / (va * vb).sqrt()
}

fn main() -> erase::error::Result<()> {
    let eeg = simulate_eeg(32, 10.0, 1000.0, 42)?;
    let peak = eeg.data().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    println!("{} channels x {} samples, max |x| = {peak:.2} µV", eeg.n_channels(), eeg.n_samples());
    let row = |i: usize| eeg.channel(i).to_vec();
    println!("corr(ch0, ch1)  = {:.3}", corr(&row(0), &row(1)));
    println!("corr(ch0, ch16) = {:.3}", corr(&row(0), &row(16)));
    Ok(())
}
