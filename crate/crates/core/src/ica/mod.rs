//! Independent component analysis.

pub mod fastica;
pub mod whiten;

use std::path::Path;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

pub use fastica::{fastica, reconstruct_without, Diagnostics, FastIcaOptions, IcaDecomposition};
pub use whiten::{center_and_whiten, WhiteningTransform};

use crate::error::Result;
use crate::signal::io::{write_json, write_recording, Payload};
use crate::signal::{ChannelKind, MultiChannelRecording};

/// Metadata written next to the source waveforms of a decomposition.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DecompositionDocument {
    pub n_channels: usize,
    pub n_components: usize,
    pub n_samples: usize,
    pub channel_labels: Vec<String>,
    pub diagnostics: Diagnostics,
    pub mixing: Array2<f64>,
    pub unmixing: Array2<f64>,
    pub whitening: WhiteningTransform,
    pub sources_file: String,
}

/// Writes `<stem>.json` (matrices and diagnostics) and `<stem>_sources.json`
/// (sources in the recording format, raw payload) into `dir`.
pub fn save_decomposition(
    dir: impl AsRef<Path>,
    stem: &str,
    dec: &IcaDecomposition,
    channel_labels: &[String],
    sample_rate_hz: f64,
) -> Result<()> {
    let dir = dir.as_ref();
    let sources_file = format!("{stem}_sources.json");
    let labels = (0..dec.n_components()).map(|i| format!("IC{}", i + 1)).collect();
    let sources = MultiChannelRecording::with_kind(labels, ChannelKind::Eeg, sample_rate_hz, dec.sources.clone())?;
    write_recording(dir.join(&sources_file), &sources, Payload::Raw)?;
    let doc = DecompositionDocument {
        n_channels: dec.n_channels(),
        n_components: dec.n_components(),
        n_samples: dec.sources.ncols(),
        channel_labels: channel_labels.to_vec(),
        diagnostics: dec.diagnostics,
        mixing: dec.mixing.clone(),
        unmixing: dec.unmixing.clone(),
        whitening: dec.whitening.clone(),
        sources_file,
    };
    write_json(dir.join(format!("{stem}.json")), &doc)
}
