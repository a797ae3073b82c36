//! Signal containers, filtering, epoching, spectra and statistics.

pub mod epoch;
pub mod filter;
pub mod io;
pub mod recording;
pub mod spectral;
pub mod stats;

pub use epoch::{extract_trials, EpochedRecording, TrialLayout, TrialSegments};
pub use filter::{bandpass_filter, resample, SosFilter};
pub use recording::{ChannelKind, FrequencyBand, MultiChannelRecording, Trial, TrialSchedule};
pub use spectral::{band_power, zscore_to_idle, BandPowerSeries, Phase};
pub use stats::{wilcoxon_rank_sum, RankSumResult};
