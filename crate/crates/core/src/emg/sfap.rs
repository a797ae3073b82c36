//! Single-fiber and motor-unit action potentials from a line-source volume
//! conductor.

use std::ops::Range;
use std::sync::OnceLock;

use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::hh::{hh_extracellular_current, Stimulus};
use crate::error::{Error, Result};
use crate::seed;

/// Gain that puts the peak of the default MUAP (100 fibers, seed 0, 4 kHz
/// grid) at 50 µV.
pub const DEFAULT_SCALE_K: f64 = 87.798_980_810_299_35;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FiberParams {
    pub fiber_length_mm: f64,
    pub endplate_mean_mm: f64,
    pub endplate_sd_mm: f64,
    pub velocity_mean_m_s: f64,
    pub velocity_sd: f64,
    pub observation_axial_mm: f64,
    pub observation_radial_mm: f64,
    pub spatial_step_mm: f64,
    pub scale_k: f64,
}

impl Default for FiberParams {
    fn default() -> Self {
        Self {
            fiber_length_mm: 120.0,
            endplate_mean_mm: 60.0,
            endplate_sd_mm: 2.5,
            velocity_mean_m_s: 4.0,
            velocity_sd: 0.125,
            observation_axial_mm: 60.0,
            observation_radial_mm: 10.0,
            spatial_step_mm: 0.5,
            scale_k: DEFAULT_SCALE_K,
        }
    }
}

impl FiberParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("fiber_length_mm", self.fiber_length_mm),
            ("spatial_step_mm", self.spatial_step_mm),
            ("velocity_mean_m_s", self.velocity_mean_m_s),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidArgument(format!("{name} must be > 0, got {v}")));
            }
        }
        let non_negative = [
            ("endplate_mean_mm", self.endplate_mean_mm),
            ("endplate_sd_mm", self.endplate_sd_mm),
            ("velocity_sd", self.velocity_sd),
            ("observation_radial_mm", self.observation_radial_mm),
        ];
        for (name, v) in non_negative {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::InvalidArgument(format!("{name} must be >= 0, got {v}")));
            }
        }
        if self.velocity_mean_m_s <= 3.0 * self.velocity_sd {
            return Err(Error::InvalidArgument("velocity_mean must exceed 3 velocity_sd".into()));
        }
        let cells = self.fiber_length_mm / self.spatial_step_mm;
        if (cells - cells.round()).abs() > 1e-9 {
            return Err(Error::InvalidArgument(format!(
                "spatial step {} mm does not divide fiber length {} mm",
                self.spatial_step_mm, self.fiber_length_mm
            )));
        }
        if self.endplate_mean_mm > self.fiber_length_mm {
            return Err(Error::InvalidArgument("endplate lies beyond the fiber end".into()));
        }
        Ok(())
    }

    pub fn n_elements(&self) -> usize {
        (self.fiber_length_mm / self.spatial_step_mm).round() as usize
    }

    /// The fiber with no endplate or velocity scatter.
    pub fn nominal_fiber(&self) -> FiberDraw {
        FiberDraw {
            endplate_mm: self.endplate_mean_mm,
            velocity_m_s: self.velocity_mean_m_s,
        }
    }
}

/// Time course of the transmembrane current source, I(τ) in µA/cm².
pub trait CurrentSource {
    fn at(&self, tau_ms: f64) -> f64;
}

impl<F: Fn(f64) -> f64> CurrentSource for F {
    fn at(&self, tau_ms: f64) -> f64 {
        self(tau_ms)
    }
}

/// Uniformly sampled current, linearly interpolated and held at both ends.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurrentWaveform {
    pub dt_ms: f64,
    pub values: Vec<f64>,
}

impl CurrentSource for CurrentWaveform {
    fn at(&self, tau_ms: f64) -> f64 {
        let last = self.values.len() - 1;
        let x = tau_ms / self.dt_ms;
        if x <= 0.0 {
            return self.values[0];
        }
        let i = x.floor() as usize;
        if i >= last {
            return self.values[last];
        }
        let frac = x - i as f64;
        self.values[i] * (1.0 - frac) + self.values[i + 1] * frac
    }
}

/// Action-potential current of the default membrane and stimulus, computed
/// once per process.
pub fn default_current() -> &'static CurrentWaveform {
    static CURRENT: OnceLock<CurrentWaveform> = OnceLock::new();
    CURRENT.get_or_init(|| CurrentWaveform {
        dt_ms: 0.01,
        values: hh_extracellular_current(20.0, 0.01, Stimulus::default()).expect("default membrane is stable"),
    })
}

/// Output sampling of an action potential: `n_samples` points `dt_ms` apart
/// from the moment of endplate activation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WaveformGrid {
    pub dt_ms: f64,
    pub n_samples: usize,
}

impl WaveformGrid {
    /// A 30 ms window at `sample_rate_hz`.
    pub fn at_rate(sample_rate_hz: f64) -> Self {
        let dt_ms = 1000.0 / sample_rate_hz;
        Self {
            dt_ms,
            n_samples: (30.0 / dt_ms).ceil() as usize,
        }
    }
}

/// One fiber's endplate position (mm from the fiber start) and conduction
/// velocity.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FiberDraw {
    pub endplate_mm: f64,
    pub velocity_m_s: f64,
}

struct Geometry {
    nodes_mm: Vec<f64>,
    /// 1/r_k - 1/r_{k+1} for each element k.
    weights: Vec<f64>,
}

fn geometry(fp: &FiberParams) -> Result<Geometry> {
    fp.validate()?;
    let n = fp.n_elements();
    let nodes_mm: Vec<f64> = (0..=n).map(|k| k as f64 * fp.spatial_step_mm).collect();
    let inv_r = nodes_mm
        .iter()
        .map(|z| {
            let r = (z - fp.observation_axial_mm).hypot(fp.observation_radial_mm);
            if r <= 1e-12 {
                Err(Error::Domain(format!("observation point lies on the fiber at z = {z} mm")))
            } else {
                Ok(1.0 / r)
            }
        })
        .collect::<Result<Vec<f64>>>()?;
    let weights = inv_r.windows(2).map(|w| w[0] - w[1]).collect();
    Ok(Geometry { nodes_mm, weights })
}

/// SFAP of one fiber, scaled by `fp.scale_k`.
///
/// The source travels both ways from the endplate, e(z, t) = I(t - |z - z_e| / v).
/// The end-section terms and the volume term are summed in the equivalent
/// element form sum_k (e_{k+1} - e_k)/dz * (1/r_k - 1/r_{k+1}).
pub fn sfap(fp: &FiberParams, fiber: &FiberDraw, source: &impl CurrentSource, grid: &WaveformGrid) -> Result<Vec<f64>> {
    let n = fp.n_elements();
    sfap_elements(fp, fiber, source, grid, 0..n)
}

/// Contribution of the elements in `elements` alone.
pub fn sfap_elements(
    fp: &FiberParams,
    fiber: &FiberDraw,
    source: &impl CurrentSource,
    grid: &WaveformGrid,
    elements: Range<usize>,
) -> Result<Vec<f64>> {
    let geo = geometry(fp)?;
    if elements.end > geo.weights.len() {
        return Err(Error::IndexOutOfRange {
            what: "fiber element",
            index: elements.end,
            len: geo.weights.len(),
        });
    }
    if !(fiber.velocity_m_s > 0.0) {
        return Err(Error::InvalidArgument("conduction velocity must be positive".into()));
    }
    let nodes = elements.start..elements.end + 1;
    let delays: Vec<f64> = geo.nodes_mm[nodes]
        .iter()
        .map(|z| (z - fiber.endplate_mm).abs() / fiber.velocity_m_s)
        .collect();
    let w = &geo.weights[elements];
    let mut e = vec![0.0; delays.len()];
    let scale = fp.scale_k / fp.spatial_step_mm;
    Ok((0..grid.n_samples)
        .map(|i| {
            let t = i as f64 * grid.dt_ms;
            for (ek, d) in e.iter_mut().zip(&delays) {
                *ek = source.at(t - d);
            }
            let s: f64 = w.iter().zip(e.windows(2)).map(|(wk, pair)| (pair[1] - pair[0]) * wk).sum();
            scale * s
        })
        .collect())
}

/// Draw fiber endplates and velocities; returns the draws and how many
/// non-positive velocities had to be redrawn.
pub fn draw_fibers(fp: &FiberParams, n_fibers: usize, seed: u64) -> Result<(Vec<FiberDraw>, usize)> {
    fp.validate()?;
    let mut rng = seed::rng(seed);
    let endplate = Normal::new(fp.endplate_mean_mm, fp.endplate_sd_mm).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let velocity =
        Normal::new(fp.velocity_mean_m_s, fp.velocity_sd).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let mut redraws = 0;
    let fibers = (0..n_fibers)
        .map(|_| {
            let z = endplate.sample(&mut rng).clamp(0.0, fp.fiber_length_mm);
            let mut v = velocity.sample(&mut rng);
            while v <= 0.0 {
                redraws += 1;
                v = velocity.sample(&mut rng);
            }
            FiberDraw {
                endplate_mm: z,
                velocity_m_s: v,
            }
        })
        .collect();
    Ok((fibers, redraws))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Muap {
    pub waveform: Vec<f64>,
    pub fibers: Vec<FiberDraw>,
    pub velocity_redraws: usize,
}

/// Average of `n_fibers` SFAPs with scattered endplates and velocities.
pub fn muap(
    fp: &FiberParams,
    n_fibers: usize,
    seed: u64,
    source: &impl CurrentSource,
    grid: &WaveformGrid,
) -> Result<Muap> {
    if n_fibers == 0 {
        return Err(Error::InvalidArgument("a motor unit needs at least one fiber".into()));
    }
    let (fibers, velocity_redraws) = draw_fibers(fp, n_fibers, seed)?;
    let mut waveform = vec![0.0; grid.n_samples];
    for f in &fibers {
        for (acc, v) in waveform.iter_mut().zip(sfap(fp, f, source, grid)?) {
            *acc += v;
        }
    }
    for v in &mut waveform {
        *v /= n_fibers as f64;
    }
    Ok(Muap {
        waveform,
        fibers,
        velocity_redraws,
    })
}

pub fn peak_abs(x: &[f64]) -> f64 {
    x.iter().fold(0.0, |m, v| m.max(v.abs()))
}
