//! Multichannel waveform container and the small value types that describe
//! how a recording is analysed (frequency bands, trial timing).

use std::collections::HashSet;
use std::fmt;

use ndarray::{s, Array2, ArrayView1, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// What a channel carries.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ChannelKind {
    #[serde(rename = "EEG")]
    Eeg,
    /// Reference electromyogram appended to the EEG before unmixing.
    #[serde(rename = "EMG_REF")]
    EmgRef,
}

impl fmt::Display for ChannelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ChannelKind::Eeg => f.write_str("EEG"),
            ChannelKind::EmgRef => f.write_str("EMG_REF"),
        }
    }
}

/// Channels x samples matrix in microvolts plus channel metadata.
///
/// Construction validates every invariant; afterwards the value is immutable.
#[derive(Clone, Debug, PartialEq)]
pub struct MultiChannelRecording {
    labels: Vec<String>,
    kinds: Vec<ChannelKind>,
    sample_rate_hz: f64,
    data: Array2<f64>,
}

impl MultiChannelRecording {
    pub fn new(
        labels: Vec<String>,
        kinds: Vec<ChannelKind>,
        sample_rate_hz: f64,
        data: Array2<f64>,
    ) -> Result<Self> {
        if labels.len() != kinds.len() || labels.len() != data.nrows() {
            return Err(Error::InvalidRecording(format!(
                "{} labels, {} kinds and {} data rows",
                labels.len(),
                kinds.len(),
                data.nrows()
            )));
        }
        if !(sample_rate_hz.is_finite() && sample_rate_hz > 0.0) {
            return Err(Error::InvalidRecording(format!(
                "sample rate must be positive, got {sample_rate_hz}"
            )));
        }
        let mut seen = HashSet::with_capacity(labels.len());
        for label in &labels {
            if !seen.insert(label.as_str()) {
                return Err(Error::InvalidRecording(format!("duplicate channel label {label:?}")));
            }
        }
        if let Some(((ch, t), v)) = data.indexed_iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::InvalidRecording(format!(
                "non-finite value {v} at channel {ch}, sample {t}"
            )));
        }
        Ok(Self {
            labels,
            kinds,
            sample_rate_hz,
            data,
        })
    }

    /// All channels of one kind, labels supplied.
    pub fn with_kind(
        labels: Vec<String>,
        kind: ChannelKind,
        sample_rate_hz: f64,
        data: Array2<f64>,
    ) -> Result<Self> {
        let kinds = vec![kind; labels.len()];
        Self::new(labels, kinds, sample_rate_hz, data)
    }

    /// Same channels and rate, new samples.
    pub fn with_data(&self, data: Array2<f64>) -> Result<Self> {
        Self::new(self.labels.clone(), self.kinds.clone(), self.sample_rate_hz, data)
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn kinds(&self) -> &[ChannelKind] {
        &self.kinds
    }

    pub fn sample_rate_hz(&self) -> f64 {
        self.sample_rate_hz
    }

    pub fn data(&self) -> ArrayView2<'_, f64> {
        self.data.view()
    }

    pub fn into_data(self) -> Array2<f64> {
        self.data
    }

    pub fn n_channels(&self) -> usize {
        self.data.nrows()
    }

    pub fn n_samples(&self) -> usize {
        self.data.ncols()
    }

    pub fn duration_s(&self) -> f64 {
        self.n_samples() as f64 / self.sample_rate_hz
    }

    pub fn channel(&self, index: usize) -> ArrayView1<'_, f64> {
        self.data.row(index)
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn count_kind(&self, kind: ChannelKind) -> usize {
        self.kinds.iter().filter(|&&k| k == kind).count()
    }

    pub fn all_kind(&self, kind: ChannelKind) -> bool {
        self.kinds.iter().all(|&k| k == kind)
    }

    /// Copy of a contiguous block of channels.
    pub fn select_channels(&self, range: std::ops::Range<usize>) -> Result<Self> {
        if range.end > self.n_channels() || range.start > range.end {
            return Err(Error::IndexOutOfRange {
                what: "channel",
                index: range.end,
                len: self.n_channels(),
            });
        }
        Self::new(
            self.labels[range.clone()].to_vec(),
            self.kinds[range.clone()].to_vec(),
            self.sample_rate_hz,
            self.data.slice(s![range, ..]).to_owned(),
        )
    }

    /// Copy of a contiguous block of samples.
    pub fn select_samples(&self, range: std::ops::Range<usize>) -> Result<Self> {
        if range.end > self.n_samples() || range.start > range.end {
            return Err(Error::IndexOutOfRange {
                what: "sample",
                index: range.end,
                len: self.n_samples(),
            });
        }
        self.with_data(self.data.slice(s![.., range]).to_owned())
    }

    /// Concatenate recordings with identical channels along time.
    pub fn concat_samples(parts: &[MultiChannelRecording]) -> Result<Self> {
        let first = parts
            .first()
            .ok_or_else(|| Error::InvalidArgument("nothing to concatenate".into()))?;
        for p in parts {
            if p.labels != first.labels || p.kinds != first.kinds || p.sample_rate_hz != first.sample_rate_hz {
                return Err(Error::InvalidRecording(
                    "concatenated recordings must share channels and sample rate".into(),
                ));
            }
        }
        let views: Vec<_> = parts.iter().map(|p| p.data.view()).collect();
        let data = ndarray::concatenate(Axis(1), &views)
            .map_err(|e| Error::InvalidRecording(e.to_string()))?;
        first.with_data(data)
    }
}

/// Closed frequency interval in Hz.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrequencyBand {
    pub low_hz: f64,
    pub high_hz: f64,
}

impl FrequencyBand {
    /// Sensorimotor mu rhythm.
    pub const MU: FrequencyBand = FrequencyBand { low_hz: 8.0, high_hz: 12.0 };
    /// High-frequency band used as the myogenic contamination proxy.
    pub const HIGH_FREQUENCY: FrequencyBand = FrequencyBand { low_hz: 40.0, high_hz: 100.0 };
    /// Pass band applied to recordings before unmixing.
    pub const ANALYSIS: FrequencyBand = FrequencyBand { low_hz: 3.0, high_hz: 100.0 };

    pub fn new(low_hz: f64, high_hz: f64) -> Result<Self> {
        if !(low_hz.is_finite() && high_hz.is_finite() && low_hz >= 0.0 && high_hz > low_hz) {
            return Err(Error::InvalidArgument(format!(
                "frequency band needs 0 <= low < high, got {low_hz}-{high_hz} Hz"
            )));
        }
        Ok(Self { low_hz, high_hz })
    }

    pub fn width_hz(&self) -> f64 {
        self.high_hz - self.low_hz
    }

    pub fn contains(&self, f_hz: f64) -> bool {
        f_hz >= self.low_hz && f_hz <= self.high_hz
    }

    /// Checks the band against the Nyquist limit of `sample_rate_hz`.
    pub fn check_nyquist(&self, sample_rate_hz: f64) -> Result<()> {
        if self.high_hz > sample_rate_hz / 2.0 || self.low_hz < 0.0 || self.high_hz <= self.low_hz {
            return Err(Error::BandOutOfRange {
                low_hz: self.low_hz,
                high_hz: self.high_hz,
                sample_rate_hz,
            });
        }
        Ok(())
    }
}

impl fmt::Display for FrequencyBand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{} Hz", self.low_hz, self.high_hz)
    }
}

/// One idle window followed by one movement window, in seconds.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trial {
    pub idle_start_s: f64,
    pub idle_len_s: f64,
    pub move_start_s: f64,
    pub move_len_s: f64,
}

impl Trial {
    pub fn idle_end_s(&self) -> f64 {
        self.idle_start_s + self.idle_len_s
    }

    pub fn move_end_s(&self) -> f64 {
        self.move_start_s + self.move_len_s
    }
}

/// Trial timing for a session of total length `duration_s`.
///
/// Time not covered by any window counts as idle for the simulators.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialSchedule {
    pub trials: Vec<Trial>,
    pub duration_s: f64,
}

impl TrialSchedule {
    pub fn new(trials: Vec<Trial>, duration_s: f64) -> Result<Self> {
        let schedule = Self { trials, duration_s };
        schedule.validate()?;
        Ok(schedule)
    }

    pub fn empty(duration_s: f64) -> Self {
        Self {
            trials: Vec::new(),
            duration_s,
        }
    }

    /// `n_trials` cycles of `period_s`; in each cycle the idle window opens
    /// `idle_offset_s` after the cycle start and movement follows it directly.
    pub fn periodic(
        n_trials: usize,
        period_s: f64,
        idle_offset_s: f64,
        idle_len_s: f64,
        move_len_s: f64,
        duration_s: f64,
    ) -> Result<Self> {
        let trials = (0..n_trials)
            .map(|k| {
                let idle_start_s = k as f64 * period_s + idle_offset_s;
                Trial {
                    idle_start_s,
                    idle_len_s,
                    move_start_s: idle_start_s + idle_len_s,
                    move_len_s,
                }
            })
            .collect();
        Self::new(trials, duration_s)
    }

    /// Ten 10-s cycles (5 s idle cue, 2 s fist clench, 3 s rest) over a
    /// 100-s session; the analysed window is the last idle second followed by
    /// the two movement seconds.
    pub fn fist_clench_session() -> Self {
        Self::periodic(10, 10.0, 4.0, 1.0, 2.0, 100.0).expect("static schedule is valid")
    }

    pub fn len(&self) -> usize {
        self.trials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trials.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.duration_s.is_finite() && self.duration_s >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "schedule duration must be non-negative, got {}",
                self.duration_s
            )));
        }
        let mut last_end = 0.0;
        for (i, t) in self.trials.iter().enumerate() {
            let fields = [t.idle_start_s, t.idle_len_s, t.move_start_s, t.move_len_s];
            if fields.iter().any(|v| !v.is_finite() || *v < 0.0) {
                return Err(Error::InvalidArgument(format!("trial {i} has a negative or non-finite field")));
            }
            if t.idle_len_s <= 0.0 || t.move_len_s <= 0.0 {
                return Err(Error::InvalidArgument(format!("trial {i} has an empty window")));
            }
            if t.idle_start_s < last_end - 1e-9 || t.move_start_s < t.idle_end_s() - 1e-9 {
                return Err(Error::InvalidArgument(format!(
                    "trial {i} overlaps or is out of chronological order"
                )));
            }
            if t.move_end_s() > self.duration_s + 1e-9 {
                return Err(Error::InvalidArgument(format!(
                    "trial {i} ends at {} s, after the {} s session",
                    t.move_end_s(),
                    self.duration_s
                )));
            }
            last_end = t.move_end_s();
        }
        Ok(())
    }
}

/// Start and end sample of a window given in seconds.
pub(crate) fn window_samples(start_s: f64, len_s: f64, sample_rate_hz: f64) -> (usize, usize) {
    let start = (start_s * sample_rate_hz).round() as usize;
    let len = (len_s * sample_rate_hz).round() as usize;
    (start, start + len)
}
