//! Action potential and transmembrane ionic current of the squid axon model.

use erase::emg::hh::{hh_simulate, HhParams, Stimulus};

fn main() -> erase::error::Result<()> {
    let trace = hh_simulate(&HhParams::default(), 20.0, 0.01, Stimulus::default())?;
    let (i_peak, v_peak) = trace
        .voltage_mv
        .iter()
        .enumerate()
        .fold((0, f64::MIN), |(bi, bv), (i, &v)| if v > bv { (i, v) } else { (bi, bv) });
    println!("peak membrane voltage {v_peak:.2} mV at {:.2} ms", i_peak as f64 * trace.dt_ms);
    let (lo, hi) = trace
        .ionic_current
        .iter()
        .fold((f64::MAX, f64::MIN), |(lo, hi), &c| (lo.min(c), hi.max(c)));
    println!("ionic current range [{lo:.1}, {hi:.1}] µA/cm²");
    for k in (0..trace.voltage_mv.len()).step_by(200) {
        println!("{:5.1} ms  V {:8.2}  I {:8.2}", k as f64 * trace.dt_ms, trace.voltage_mv[k], trace.ionic_current[k]);
    }
    Ok(())
}
