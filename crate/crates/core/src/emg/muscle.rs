//! Per-muscle surface EMG and the head-muscle reference set.

use std::collections::HashSet;
use std::fmt;
use std::path::Path;

use ndarray::Array2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::firing::poisson_times;
use super::sfap::{default_current, muap, FiberParams, WaveformGrid};
use crate::error::{Error, Result};
use crate::seed;
use crate::signal::filter::{edge_padding, SosFilter};
use crate::signal::recording::window_samples;
use crate::signal::{ChannelKind, FrequencyBand, MultiChannelRecording, TrialSchedule};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Muscle {
    FrontalisLeft,
    FrontalisRight,
    TemporalisLeft,
    TemporalisRight,
    MasseterLeft,
    MasseterRight,
    TrapeziusLeft,
    TrapeziusRight,
    EyeBlink,
}

impl Muscle {
    pub const HEAD_SET: [Muscle; 8] = [
        Muscle::FrontalisLeft,
        Muscle::FrontalisRight,
        Muscle::TemporalisLeft,
        Muscle::TemporalisRight,
        Muscle::MasseterLeft,
        Muscle::MasseterRight,
        Muscle::TrapeziusLeft,
        Muscle::TrapeziusRight,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            Muscle::FrontalisLeft => "frontalis_l",
            Muscle::FrontalisRight => "frontalis_r",
            Muscle::TemporalisLeft => "temporalis_l",
            Muscle::TemporalisRight => "temporalis_r",
            Muscle::MasseterLeft => "masseter_l",
            Muscle::MasseterRight => "masseter_r",
            Muscle::TrapeziusLeft => "trapezius_l",
            Muscle::TrapeziusRight => "trapezius_r",
            Muscle::EyeBlink => "eye_blink",
        }
    }

    /// Typical surface-EMG band of the muscle.
    pub fn default_band(&self) -> FrequencyBand {
        let (lo, hi) = match self {
            Muscle::FrontalisLeft | Muscle::FrontalisRight => (20.0, 150.0),
            Muscle::TemporalisLeft | Muscle::TemporalisRight => (20.0, 300.0),
            Muscle::MasseterLeft | Muscle::MasseterRight => (20.0, 300.0),
            Muscle::TrapeziusLeft | Muscle::TrapeziusRight => (20.0, 250.0),
            Muscle::EyeBlink => (1.0, 10.0),
        };
        FrequencyBand { low_hz: lo, high_hz: hi }
    }

    /// Position on a unit-radius head map, x to the right and y to the nose.
    pub fn default_position(&self) -> [f64; 2] {
        match self {
            Muscle::FrontalisLeft => [-0.35, 1.0],
            Muscle::FrontalisRight => [0.35, 1.0],
            Muscle::TemporalisLeft => [-1.05, 0.3],
            Muscle::TemporalisRight => [1.05, 0.3],
            Muscle::MasseterLeft => [-1.05, -0.15],
            Muscle::MasseterRight => [1.05, -0.15],
            Muscle::TrapeziusLeft => [-0.45, -1.05],
            Muscle::TrapeziusRight => [0.45, -1.05],
            Muscle::EyeBlink => [0.0, 1.1],
        }
    }

    fn default_amplitude(&self) -> f64 {
        match self {
            Muscle::FrontalisLeft | Muscle::FrontalisRight => 20.0,
            Muscle::TemporalisLeft | Muscle::TemporalisRight => 30.0,
            Muscle::MasseterLeft | Muscle::MasseterRight => 40.0,
            Muscle::TrapeziusLeft | Muscle::TrapeziusRight => 25.0,
            Muscle::EyeBlink => 30.0,
        }
    }
}

impl fmt::Display for Muscle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

fn default_filter_order() -> usize {
    6
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MuscleSpec {
    pub muscle: Muscle,
    pub band: FrequencyBand,
    pub topo_position: [f64; 2],
    pub rate_idle_hz: f64,
    pub rate_move_hz: f64,
    pub amplitude_uv_rms: f64,
    #[serde(default = "default_filter_order")]
    pub filter_order: usize,
}

impl MuscleSpec {
    pub fn default_for(muscle: Muscle) -> Self {
        Self {
            muscle,
            band: muscle.default_band(),
            topo_position: muscle.default_position(),
            rate_idle_hz: 8.0,
            rate_move_hz: 20.0,
            amplitude_uv_rms: muscle.default_amplitude(),
            filter_order: default_filter_order(),
        }
    }

    pub fn name(&self) -> &'static str {
        self.muscle.label()
    }

    pub fn validate(&self, sample_rate_hz: f64) -> Result<()> {
        if !(self.rate_idle_hz > 0.0 && self.rate_move_hz >= self.rate_idle_hz) {
            return Err(Error::InvalidArgument(format!(
                "{}: need rate_move_hz >= rate_idle_hz > 0",
                self.name()
            )));
        }
        if !(self.amplitude_uv_rms > 0.0 && self.amplitude_uv_rms.is_finite()) {
            return Err(Error::InvalidArgument(format!("{}: amplitude must be > 0", self.name())));
        }
        if self.filter_order == 0 {
            return Err(Error::InvalidArgument("filter order must be >= 1".into()));
        }
        self.band.check_nyquist(sample_rate_hz)
    }
}

/// The eight head and neck muscles with default settings.
pub fn default_head_specs() -> Vec<MuscleSpec> {
    Muscle::HEAD_SET.iter().map(|&m| MuscleSpec::default_for(m)).collect()
}

pub fn load_muscle_specs(path: impl AsRef<Path>) -> Result<Vec<MuscleSpec>> {
    crate::signal::io::read_json(path)
}

/// Poisson-firing superposition of `muap_wave`, band-shaped by the muscle's
/// filter and scaled so the movement-phase RMS equals the configured amplitude.
///
/// Every idle window, movement window and inter-trial gap gets its own
/// Poisson process; movement windows fire at `rate_move_hz`, everything else
/// at `rate_idle_hz`.
pub fn simulate_muscle_emg(
    spec: &MuscleSpec,
    schedule: &TrialSchedule,
    muap_wave: &[f64],
    sample_rate_hz: f64,
    seed: u64,
) -> Result<Vec<f64>> {
    schedule.validate()?;
    spec.validate(sample_rate_hz)?;
    let n = (schedule.duration_s * sample_rate_hz).round() as usize;
    if n == 0 {
        return Ok(Vec::new());
    }
    if muap_wave.len() >= n {
        return Err(Error::InvalidArgument(format!(
            "MUAP of {} samples does not fit a {} sample recording",
            muap_wave.len(),
            n
        )));
    }

    let mut segments: Vec<(f64, f64, f64)> = Vec::new();
    let mut cursor = 0.0;
    for t in &schedule.trials {
        segments.push((cursor, t.idle_start_s, spec.rate_idle_hz));
        segments.push((t.idle_start_s, t.idle_end_s(), spec.rate_idle_hz));
        segments.push((t.idle_end_s(), t.move_start_s, spec.rate_idle_hz));
        segments.push((t.move_start_s, t.move_end_s(), spec.rate_move_hz));
        cursor = t.move_end_s();
    }
    segments.push((cursor, schedule.duration_s, spec.rate_idle_hz));

    let mut rng = seed::rng(seed);
    let mut x = vec![0.0; n];
    for (start, end, rate) in segments {
        if end <= start {
            continue;
        }
        for t in poisson_times(rate, start, end, &mut rng)? {
            let i0 = (t * sample_rate_hz).round() as usize;
            for (xi, m) in x.iter_mut().skip(i0).zip(muap_wave) {
                *xi += m;
            }
        }
    }

    let filter = SosFilter::butter_bandpass(spec.filter_order, spec.band, sample_rate_hz)?;
    let mut y = filter.filtfilt(&x, edge_padding(spec.filter_order))?;

    let mut sum_sq = 0.0;
    let mut count = 0usize;
    for t in &schedule.trials {
        let (a, b) = window_samples(t.move_start_s, t.move_len_s, sample_rate_hz);
        for v in &y[a.min(n)..b.min(n)] {
            sum_sq += v * v;
            count += 1;
        }
    }
    if count == 0 {
        sum_sq = y.iter().map(|v| v * v).sum();
        count = n;
    }
    let rms = (sum_sq / count as f64).sqrt();
    if !(rms > 0.0 && rms.is_finite()) {
        return Err(Error::Domain(format!(
            "{}: cannot scale an all-zero EMG waveform to {} µV RMS",
            spec.name(),
            spec.amplitude_uv_rms
        )));
    }
    let gain = spec.amplitude_uv_rms / rms;
    for v in &mut y {
        *v *= gain;
    }
    Ok(y)
}

/// Motor-unit settings shared by every simulated muscle.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MotorUnitOptions {
    pub fiber: FiberParams,
    pub n_fibers: usize,
}

impl Default for MotorUnitOptions {
    fn default() -> Self {
        Self {
            fiber: FiberParams::default(),
            n_fibers: 100,
        }
    }
}

/// One muscle from a single seed: the seed's first substream draws the
/// motor unit, the second the firing times.
pub fn simulate_muscle(
    spec: &MuscleSpec,
    schedule: &TrialSchedule,
    sample_rate_hz: f64,
    seed: u64,
    opts: &MotorUnitOptions,
) -> Result<Vec<f64>> {
    let grid = WaveformGrid::at_rate(sample_rate_hz);
    let unit = muap(&opts.fiber, opts.n_fibers, seed::derive_seed(seed, 0), default_current(), &grid)?;
    simulate_muscle_emg(spec, schedule, &unit.waveform, sample_rate_hz, seed::derive_seed(seed, 1))
}

/// One EMG_REF channel per spec, in spec order, labelled by muscle name.
/// Muscle `i` uses seed `derive_seed(seed, i)`.
pub fn simulate_head_emg_set(
    specs: &[MuscleSpec],
    schedule: &TrialSchedule,
    sample_rate_hz: f64,
    seed: u64,
    opts: &MotorUnitOptions,
) -> Result<MultiChannelRecording> {
    if specs.is_empty() {
        return Err(Error::InvalidArgument("at least one muscle spec is required".into()));
    }
    let mut names = HashSet::new();
    for s in specs {
        if !names.insert(s.name()) {
            return Err(Error::InvalidArgument(format!("duplicate muscle {}", s.name())));
        }
    }
    let channels = specs
        .par_iter()
        .enumerate()
        .map(|(i, s)| simulate_muscle(s, schedule, sample_rate_hz, seed::derive_seed(seed, i as u64), opts))
        .collect::<Result<Vec<_>>>()?;
    let n = channels[0].len();
    let data = Array2::from_shape_vec((specs.len(), n), channels.concat())
        .map_err(|e| Error::Numerical(e.to_string()))?;
    MultiChannelRecording::with_kind(
        specs.iter().map(|s| s.name().to_string()).collect(),
        ChannelKind::EmgRef,
        sample_rate_hz,
        data,
    )
}
