//! On-disk recording format.
//!
//! A JSON metadata document `{format_version: 1, sample_rate_hz, labels,
//! kinds, payload}` where `payload` is either `"csv"` (the samples are held
//! in the `csv` string field: a header row of labels then one row per
//! sample) or `"raw"` (a sidecar file named by `data_file`, holding `samples`
//! little-endian f32 values per channel, channel-major).

use std::fs;
use std::path::{Path, PathBuf};

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::recording::{ChannelKind, MultiChannelRecording};
use crate::error::{Error, Result};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Payload {
    Csv,
    Raw,
}

#[derive(Debug, Serialize, Deserialize)]
struct Metadata {
    format_version: u32,
    sample_rate_hz: f64,
    labels: Vec<String>,
    kinds: Vec<ChannelKind>,
    payload: Payload,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    data_file: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    csv: Option<String>,
}

fn sidecar_path(path: &Path) -> PathBuf {
    path.with_extension("f32")
}

pub fn write_recording(path: impl AsRef<Path>, rec: &MultiChannelRecording, payload: Payload) -> Result<()> {
    let path = path.as_ref();
    let mut meta = Metadata {
        format_version: FORMAT_VERSION,
        sample_rate_hz: rec.sample_rate_hz(),
        labels: rec.labels().to_vec(),
        kinds: rec.kinds().to_vec(),
        payload,
        samples: None,
        data_file: None,
        csv: None,
    };
    match payload {
        Payload::Csv => meta.csv = Some(to_csv(rec)?),
        Payload::Raw => {
            let side = sidecar_path(path);
            let mut bytes = Vec::with_capacity(rec.n_channels() * rec.n_samples() * 4);
            for v in rec.data().iter() {
                bytes.extend_from_slice(&(*v as f32).to_le_bytes());
            }
            fs::write(&side, bytes)?;
            meta.samples = Some(rec.n_samples());
            meta.data_file = side.file_name().map(|n| n.to_string_lossy().into_owned());
        }
    }
    fs::write(path, serde_json::to_string_pretty(&meta)?)?;
    Ok(())
}

pub fn read_recording(path: impl AsRef<Path>) -> Result<MultiChannelRecording> {
    let path = path.as_ref();
    let meta: Metadata = serde_json::from_str(&fs::read_to_string(path)?)?;
    if meta.format_version != FORMAT_VERSION {
        return Err(Error::Format(format!("unsupported format_version {}", meta.format_version)));
    }
    let n_ch = meta.labels.len();
    let data = match meta.payload {
        Payload::Csv => {
            let text = meta.csv.as_deref().ok_or_else(|| Error::Format("csv payload missing".into()))?;
            from_csv(text, &meta.labels)?
        }
        Payload::Raw => {
            let samples = meta.samples.ok_or_else(|| Error::Format("raw payload needs `samples`".into()))?;
            let name = meta
                .data_file
                .clone()
                .ok_or_else(|| Error::Format("raw payload needs `data_file`".into()))?;
            let side = path.parent().unwrap_or(Path::new(".")).join(name);
            let bytes = fs::read(side)?;
            if bytes.len() != n_ch * samples * 4 {
                return Err(Error::Format(format!(
                    "raw payload holds {} bytes, expected {} channels x {} samples",
                    bytes.len(),
                    n_ch,
                    samples
                )));
            }
            let values: Vec<f64> = bytes
                .chunks_exact(4)
                .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64)
                .collect();
            Array2::from_shape_vec((n_ch, samples), values).map_err(|e| Error::Format(e.to_string()))?
        }
    };
    MultiChannelRecording::new(meta.labels, meta.kinds, meta.sample_rate_hz, data)
}

fn to_csv(rec: &MultiChannelRecording) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(rec.labels())?;
    let data = rec.data();
    let mut row = Vec::with_capacity(rec.n_channels());
    for t in 0..rec.n_samples() {
        row.clear();
        row.extend(data.column(t).iter().map(|v| format!("{v}")));
        w.write_record(&row)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Format(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Format(e.to_string()))
}

fn from_csv(text: &str, labels: &[String]) -> Result<Array2<f64>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header: Vec<String> = r.headers()?.iter().map(str::to_owned).collect();
    if header != labels {
        return Err(Error::Format("csv header does not match metadata labels".into()));
    }
    let mut columns: Vec<Vec<f64>> = vec![Vec::new(); labels.len()];
    for record in r.records() {
        let record = record?;
        if record.len() != labels.len() {
            return Err(Error::Format(format!(
                "csv row has {} fields, expected {}",
                record.len(),
                labels.len()
            )));
        }
        for (c, field) in record.iter().enumerate() {
            columns[c].push(
                field
                    .trim()
                    .parse()
                    .map_err(|_| Error::Format(format!("bad sample value {field:?}")))?,
            );
        }
    }
    let samples = columns.first().map_or(0, Vec::len);
    Array2::from_shape_vec((labels.len(), samples), columns.concat()).map_err(|e| Error::Format(e.to_string()))
}

/// Serialize any value as pretty JSON.
pub fn write_json<T: Serialize>(path: impl AsRef<Path>, value: &T) -> Result<()> {
    fs::write(path, serde_json::to_string_pretty(value)?)?;
    Ok(())
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: impl AsRef<Path>) -> Result<T> {
    Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
}
