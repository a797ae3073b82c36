//! Single-fibre and motor-unit action potentials from the volume-conductor model.

use erase::emg::{default_current, draw_fibers, muap, sfap, FiberParams, WaveformGrid};

fn main() -> erase::error::Result<()> {
    let fp = FiberParams::default();
    let grid = WaveformGrid::at_rate(4000.0);
    let (fibers, _) = draw_fibers(&fp, 1, 0)?;
    let single = sfap(&fp, &fibers[0], default_current(), &grid)?;
    let unit = muap(&fp, 100, 0, default_current(), &grid)?;
    let peak = |w: &[f64]| w.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    println!("SFAP peak {:.3} µV, MUAP peak {:.3} µV over {} fibres", peak(&single), peak(&unit.waveform), unit.fibers.len());
    println!("velocity redraws: {}", unit.velocity_redraws);
    for (k, v) in unit.waveform.iter().enumerate().step_by(4) {
        println!("{:5.2} ms {v:9.3}", k as f64 * grid.dt_ms);
    }
    Ok(())
}
