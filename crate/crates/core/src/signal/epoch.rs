//! Trial extraction and the concatenated-trials layout used for unmixing.

use std::ops::Range;

use super::recording::{window_samples, MultiChannelRecording, TrialSchedule};
use crate::error::{Error, Result};

/// Idle and movement segments of one trial.
#[derive(Clone, Debug, PartialEq)]
pub struct TrialSegments {
    pub idle: MultiChannelRecording,
    pub movement: MultiChannelRecording,
}

/// Copies the idle and movement windows of every scheduled trial.
pub fn extract_trials(rec: &MultiChannelRecording, schedule: &TrialSchedule) -> Result<Vec<TrialSegments>> {
    schedule.validate()?;
    let fs = rec.sample_rate_hz();
    let n = rec.n_samples();
    schedule
        .trials
        .iter()
        .map(|t| {
            let idle = window_samples(t.idle_start_s, t.idle_len_s, fs);
            let mv = window_samples(t.move_start_s, t.move_len_s, fs);
            if idle.1 > n || mv.1 > n {
                return Err(Error::IndexOutOfRange {
                    what: "trial window end sample",
                    index: idle.1.max(mv.1),
                    len: n,
                });
            }
            Ok(TrialSegments {
                idle: rec.select_samples(idle.0..idle.1)?,
                movement: rec.select_samples(mv.0..mv.1)?,
            })
        })
        .collect()
}

/// Sample ranges of each trial's segments inside a concatenated recording.
#[derive(Clone, Debug, PartialEq)]
pub struct TrialLayout {
    pub idle: Vec<Range<usize>>,
    pub movement: Vec<Range<usize>>,
}

impl TrialLayout {
    pub fn n_trials(&self) -> usize {
        self.idle.len()
    }

    pub fn total_samples(&self) -> usize {
        self.idle.iter().chain(&self.movement).map(|r| r.len()).sum()
    }
}

/// Trials joined idle, movement, idle, movement, ... in schedule order.
#[derive(Clone, Debug, PartialEq)]
pub struct EpochedRecording {
    pub recording: MultiChannelRecording,
    pub layout: TrialLayout,
}

impl EpochedRecording {
    pub fn from_trials(trials: &[TrialSegments]) -> Result<Self> {
        let mut parts = Vec::with_capacity(2 * trials.len());
        let mut layout = TrialLayout {
            idle: Vec::with_capacity(trials.len()),
            movement: Vec::with_capacity(trials.len()),
        };
        let mut cursor = 0;
        for t in trials {
            layout.idle.push(cursor..cursor + t.idle.n_samples());
            cursor += t.idle.n_samples();
            layout.movement.push(cursor..cursor + t.movement.n_samples());
            cursor += t.movement.n_samples();
            parts.push(t.idle.clone());
            parts.push(t.movement.clone());
        }
        let recording = MultiChannelRecording::concat_samples(&parts)?;
        Ok(Self { recording, layout })
    }

    pub fn extract(rec: &MultiChannelRecording, schedule: &TrialSchedule) -> Result<Self> {
        Self::from_trials(&extract_trials(rec, schedule)?)
    }

    /// Same layout over new (e.g. cleaned) data.
    pub fn with_recording(&self, recording: MultiChannelRecording) -> Result<Self> {
        if recording.n_samples() != self.layout.total_samples() {
            return Err(Error::InvalidRecording(format!(
                "layout covers {} samples, recording has {}",
                self.layout.total_samples(),
                recording.n_samples()
            )));
        }
        Ok(Self {
            recording,
            layout: self.layout.clone(),
        })
    }

    /// Splits back into per-trial segments.
    pub fn trials(&self) -> Result<Vec<TrialSegments>> {
        self.layout
            .idle
            .iter()
            .zip(&self.layout.movement)
            .map(|(i, m)| {
                Ok(TrialSegments {
                    idle: self.recording.select_samples(i.clone())?,
                    movement: self.recording.select_samples(m.clone())?,
                })
            })
            .collect()
    }
}
