//! Biophysical surface-EMG simulation.

pub mod firing;
pub mod hh;
pub mod muscle;
pub mod sfap;

pub use firing::{poisson_spike_train, SpikeTrain};
pub use hh::{hh_extracellular_current, HhParams, Stimulus};
pub use muscle::{
    default_head_specs, load_muscle_specs, simulate_head_emg_set, simulate_muscle, simulate_muscle_emg, MotorUnitOptions, Muscle,
    MuscleSpec,
};
pub use sfap::{default_current, draw_fibers, muap, sfap, CurrentWaveform, FiberDraw, FiberParams, WaveformGrid};
