//! Hodgkin–Huxley membrane, integrated with forward Euler.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Membrane constants (mV, mS/cm², µF/cm²), resting near -65 mV.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HhParams {
    pub c_m: f64,
    pub g_na: f64,
    pub g_k: f64,
    pub g_l: f64,
    pub e_na: f64,
    pub e_k: f64,
    pub e_l: f64,
}

impl Default for HhParams {
    fn default() -> Self {
        Self {
            c_m: 1.0,
            g_na: 120.0,
            g_k: 36.0,
            g_l: 0.3,
            e_na: 50.0,
            e_k: -77.0,
            e_l: -54.387,
        }
    }
}

/// Rectangular current pulse (µA/cm²).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Stimulus {
    pub amplitude: f64,
    pub onset_ms: f64,
    pub width_ms: f64,
}

impl Stimulus {
    pub const NONE: Stimulus = Stimulus {
        amplitude: 0.0,
        onset_ms: 0.0,
        width_ms: 0.0,
    };

    pub fn at(&self, t_ms: f64) -> f64 {
        if t_ms >= self.onset_ms && t_ms < self.onset_ms + self.width_ms {
            self.amplitude
        } else {
            0.0
        }
    }
}

impl Default for Stimulus {
    fn default() -> Self {
        Self {
            amplitude: 10.0,
            onset_ms: 1.0,
            width_ms: 1.0,
        }
    }
}

/// x / (1 - exp(-x / k)), continuous through x = 0.
fn vtrap(x: f64, k: f64) -> f64 {
    if (x / k).abs() < 1e-6 {
        k * (1.0 + x / (2.0 * k))
    } else {
        x / (1.0 - (-x / k).exp())
    }
}

pub fn alpha_m(v: f64) -> f64 {
    0.1 * vtrap(v + 40.0, 10.0)
}
pub fn beta_m(v: f64) -> f64 {
    4.0 * (-(v + 65.0) / 18.0).exp()
}
pub fn alpha_h(v: f64) -> f64 {
    0.07 * (-(v + 65.0) / 20.0).exp()
}
pub fn beta_h(v: f64) -> f64 {
    1.0 / (1.0 + (-(v + 35.0) / 10.0).exp())
}
pub fn alpha_n(v: f64) -> f64 {
    0.01 * vtrap(v + 55.0, 10.0)
}
pub fn beta_n(v: f64) -> f64 {
    0.125 * (-(v + 65.0) / 80.0).exp()
}

/// State vector (V, m, h, n).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HhState {
    pub v: f64,
    pub m: f64,
    pub h: f64,
    pub n: f64,
}

impl HhParams {
    pub fn ionic_current(&self, s: &HhState) -> f64 {
        self.g_na * s.m.powi(3) * s.h * (s.v - self.e_na)
            + self.g_k * s.n.powi(4) * (s.v - self.e_k)
            + self.g_l * (s.v - self.e_l)
    }

    pub fn steady_state(&self, v: f64) -> HhState {
        HhState {
            v,
            m: alpha_m(v) / (alpha_m(v) + beta_m(v)),
            h: alpha_h(v) / (alpha_h(v) + beta_h(v)),
            n: alpha_n(v) / (alpha_n(v) + beta_n(v)),
        }
    }

    /// Voltage at which the steady-state ionic current vanishes.
    pub fn resting_state(&self) -> HhState {
        let f = |v: f64| self.ionic_current(&self.steady_state(v));
        let (mut lo, mut hi) = (-90.0, -50.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(lo) * f(mid) <= 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        self.steady_state(0.5 * (lo + hi))
    }

    /// Time derivatives of (V, m, h, n) under injected current `i_ext`.
    pub fn derivatives(&self, s: &HhState, i_ext: f64) -> HhState {
        HhState {
            v: (i_ext - self.ionic_current(s)) / self.c_m,
            m: alpha_m(s.v) * (1.0 - s.m) - beta_m(s.v) * s.m,
            h: alpha_h(s.v) * (1.0 - s.h) - beta_h(s.v) * s.h,
            n: alpha_n(s.v) * (1.0 - s.n) - beta_n(s.v) * s.n,
        }
    }
}

/// Sampled membrane voltage and ionic current, one value per step.
#[derive(Clone, Debug, PartialEq)]
pub struct HhTrace {
    pub dt_ms: f64,
    pub voltage_mv: Vec<f64>,
    /// Transmembrane ionic current relative to rest (µA/cm²).
    pub ionic_current: Vec<f64>,
}

pub fn hh_simulate(params: &HhParams, duration_ms: f64, dt_ms: f64, stim: Stimulus) -> Result<HhTrace> {
    if !(dt_ms > 0.0 && dt_ms <= 0.025) {
        return Err(Error::InvalidArgument(format!("dt_ms must be in (0, 0.025], got {dt_ms}")));
    }
    if !(duration_ms >= 15.0 && duration_ms.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "duration must cover an action potential (>= 15 ms), got {duration_ms}"
        )));
    }
    let steps = (duration_ms / dt_ms).round() as usize;
    let mut s = params.resting_state();
    let rest_current = params.ionic_current(&s);
    let mut voltage = Vec::with_capacity(steps + 1);
    let mut current = Vec::with_capacity(steps + 1);
    voltage.push(s.v);
    current.push(0.0);
    for k in 0..steps {
        let t = k as f64 * dt_ms;
        let d = params.derivatives(&s, stim.at(t));
        s.v += dt_ms * d.v;
        s.m += dt_ms * d.m;
        s.h += dt_ms * d.h;
        s.n += dt_ms * d.n;
        if !s.v.is_finite() || s.v.abs() > 200.0 {
            return Err(Error::IntegrationFailure {
                t_ms: t + dt_ms,
                v_mv: s.v,
            });
        }
        voltage.push(s.v);
        current.push(params.ionic_current(&s) - rest_current);
    }
    Ok(HhTrace {
        dt_ms,
        voltage_mv: voltage,
        ionic_current: current,
    })
}

/// Ionic (non-capacitive) transmembrane current of one action potential.
pub fn hh_extracellular_current(duration_ms: f64, dt_ms: f64, stim: Stimulus) -> Result<Vec<f64>> {
    Ok(hh_simulate(&HhParams::default(), duration_ms, dt_ms, stim)?.ionic_current)
}
