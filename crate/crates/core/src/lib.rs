pub mod eeg_sim;
pub mod emg;
pub mod erase;
pub mod error;
pub mod experiments;
pub mod ica;
pub mod metrics;
pub mod seed;
pub mod signal;
