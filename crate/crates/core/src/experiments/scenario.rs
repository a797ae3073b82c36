//! Monte-Carlo scenarios on simulated EEG with known contamination.

use std::path::PathBuf;

use ndarray::Array2;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::eeg_sim::{
    contaminate, draw_weights_with, plan_contamination, simulate_eeg, Assignment, ContaminationGroundTruth,
    HAT_BAND_32,
};
use crate::emg::{simulate_head_emg_set, MotorUnitOptions, Muscle, MuscleSpec};
use crate::erase::{run_conventional_ica, run_erase, EraseOptions, RejectionCriteria};
use crate::error::{Error, Result};
use crate::ica::FastIcaOptions;
use crate::metrics::{artifact_event, artifact_index, ArtifactColumnView};
use crate::seed::{derive_seed, derive_seed2, rng};
use crate::signal::{wilcoxon_rank_sum, ChannelKind, MultiChannelRecording, TrialSchedule};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum ScenarioKind {
    S1,
    S2,
    Fp,
    Sens,
}

impl ScenarioKind {
    fn code(self) -> u64 {
        match self {
            ScenarioKind::S1 => 1,
            ScenarioKind::S2 => 2,
            ScenarioKind::Fp => 3,
            ScenarioKind::Sens => 4,
        }
    }
}

/// How contaminated channels are grouped: Scenario 1 varies the group size
/// with three EMG types, Scenario 2 varies the number of types.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Configuration {
    S1,
    S2,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Erase,
    Conventional,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScenarioConfig {
    pub scenario: ScenarioKind,
    pub n_datasets: usize,
    pub n_eeg_channels: usize,
    /// Total contaminated channels per Scenario 1 grid point (three groups).
    pub s1_grid: Vec<usize>,
    /// Number of EMG types per Scenario 2 grid point.
    pub s2_type_counts: Vec<usize>,
    pub s2_group_size: usize,
    pub master_seed: u64,
    /// EMG types in the order they are added; Scenario 1 uses the first three.
    pub emg_specs: Vec<MuscleSpec>,
    pub output_dir: Option<PathBuf>,
    pub sample_rate_hz: f64,
    pub duration_s: f64,
    pub fp_noise_sd_uv: f64,
    pub ica: FastIcaOptions,
    pub motor_unit: MotorUnitOptions,
    pub hat_band: Vec<String>,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            scenario: ScenarioKind::S1,
            n_datasets: 200,
            n_eeg_channels: 32,
            s1_grid: vec![6, 12, 18, 24, 30],
            s2_type_counts: vec![1, 2, 3, 4, 5],
            s2_group_size: 6,
            master_seed: 0,
            emg_specs: [
                Muscle::FrontalisLeft,
                Muscle::TemporalisLeft,
                Muscle::MasseterLeft,
                Muscle::TrapeziusLeft,
                Muscle::EyeBlink,
            ]
            .iter()
            .map(|&m| MuscleSpec::default_for(m))
            .collect(),
            output_dir: None,
            sample_rate_hz: 2000.0,
            duration_s: 300.0,
            fp_noise_sd_uv: 30.0,
            ica: FastIcaOptions::default(),
            motor_unit: MotorUnitOptions::default(),
            hat_band: HAT_BAND_32.iter().map(|s| s.to_string()).collect(),
        }
    }
}

impl ScenarioConfig {
    /// Reduced size for a single workstation: 20 datasets of 10 s at 1 kHz,
    /// ICA capped at 200 iterations without restarts.
    pub fn desk(scenario: ScenarioKind) -> Self {
        Self {
            scenario,
            n_datasets: 20,
            sample_rate_hz: 1000.0,
            duration_s: 10.0,
            ica: FastIcaOptions {
                max_iter: 200,
                max_restarts: 0,
                ..FastIcaOptions::default()
            },
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_datasets < 2 {
            return Err(Error::Config("n_datasets must be at least 2".into()));
        }
        if self.n_eeg_channels < 8 {
            return Err(Error::Config("n_eeg_channels must be at least 8".into()));
        }
        if self.s1_grid.is_empty() || self.s2_type_counts.is_empty() {
            return Err(Error::Config("scenario grids must be nonempty".into()));
        }
        if let Some(g) = self.s1_grid.iter().find(|&&g| g == 0 || g % 3 != 0 || g > self.n_eeg_channels) {
            return Err(Error::Config(format!(
                "Scenario 1 grid value {g} must be a positive multiple of 3 up to the channel count"
            )));
        }
        if self.emg_specs.len() < 3 {
            return Err(Error::Config("at least three EMG specs are required".into()));
        }
        if let Some(k) = self
            .s2_type_counts
            .iter()
            .find(|&&k| k == 0 || k > self.emg_specs.len() || k * self.s2_group_size > self.n_eeg_channels)
        {
            return Err(Error::Config(format!("Scenario 2 type count {k} is not feasible")));
        }
        Ok(())
    }

    fn grid(&self, configuration: Configuration) -> Vec<usize> {
        match configuration {
            Configuration::S1 => self.s1_grid.clone(),
            Configuration::S2 => self.s2_type_counts.clone(),
        }
    }

    /// (number of EMG types, channels per type) at a grid value.
    fn layout(&self, configuration: Configuration, grid_value: usize) -> (usize, usize) {
        match configuration {
            Configuration::S1 => (3, grid_value / 3),
            Configuration::S2 => (grid_value, self.s2_group_size),
        }
    }

    fn erase_options(&self) -> EraseOptions {
        EraseOptions {
            ica: self.ica,
            ..EraseOptions::default()
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Contaminant {
    /// The reference EMG itself, weighted per group.
    ReferenceEmg,
    /// One Gaussian noise waveform independent of the references.
    GaussianNoise { sd_uv: f64 },
}

pub const NOISE_LABEL: &str = "gaussian_noise";

#[derive(Clone, Debug, PartialEq)]
pub struct SimulatedDataset {
    pub clean: MultiChannelRecording,
    pub references: MultiChannelRecording,
    pub contaminated: MultiChannelRecording,
    pub truth: ContaminationGroundTruth,
    pub seed: u64,
}

/// Seed of dataset `index` at one grid point of one scenario.
pub fn dataset_seed(master: u64, scenario: ScenarioKind, configuration: Configuration, grid_value: usize, index: usize) -> u64 {
    let cfg_code = match configuration {
        Configuration::S1 => 1,
        Configuration::S2 => 2,
    };
    derive_seed2(derive_seed2(master, scenario.code(), cfg_code), grid_value as u64, index as u64)
}

/// EEG, reference EMG of `n_types` muscles, and the contaminated EEG.
pub fn generate_dataset(
    cfg: &ScenarioConfig,
    n_types: usize,
    group_size: usize,
    contaminant: Contaminant,
    seed: u64,
) -> Result<SimulatedDataset> {
    let fs = cfg.sample_rate_hz;
    let clean = simulate_eeg(cfg.n_eeg_channels, cfg.duration_s, fs, derive_seed(seed, 0))?;
    let specs = &cfg.emg_specs[..n_types];
    let references = simulate_head_emg_set(
        specs,
        &TrialSchedule::empty(cfg.duration_s),
        fs,
        derive_seed(seed, 1),
        &cfg.motor_unit,
    )?;
    let names: Vec<&str> = specs.iter().map(|s| s.name()).collect();
    let plan_seed = derive_seed(seed, 2);
    let (truth, source) = match contaminant {
        Contaminant::ReferenceEmg => (plan_contamination(&names, group_size, cfg.n_eeg_channels, plan_seed)?, references.clone()),
        Contaminant::GaussianNoise { sd_uv } => {
            let layout = plan_contamination(&names, group_size, cfg.n_eeg_channels, plan_seed)?;
            let mut r = rng(derive_seed(seed, 3));
            let assignments = layout
                .assignments
                .iter()
                .map(|a| {
                    Ok(Assignment {
                        emg_type: NOISE_LABEL.into(),
                        channels: a.channels.clone(),
                        weights: draw_weights_with(a.channels.len(), &mut r)?,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            let normal = Normal::new(0.0, sd_uv).map_err(|e| Error::InvalidArgument(e.to_string()))?;
            let noise = Array2::from_shape_fn((1, clean.n_samples()), |_| normal.sample(&mut r));
            let source = MultiChannelRecording::with_kind(vec![NOISE_LABEL.into()], ChannelKind::EmgRef, fs, noise)?;
            (
                ContaminationGroundTruth {
                    assignments,
                    rng_seed: plan_seed,
                },
                source,
            )
        }
    };
    let contaminated = contaminate(&clean, &source, &truth)?;
    Ok(SimulatedDataset {
        clean,
        references,
        contaminated,
        truth,
        seed,
    })
}

/// One artifact-IC column of one dataset.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ColumnRecord {
    pub scenario: ScenarioKind,
    pub configuration: Configuration,
    pub grid_value: usize,
    pub dataset: usize,
    pub method: Method,
    pub ic: usize,
    /// EMG type whose channels form the contaminated rows ("all" for the
    /// union of every contaminated channel).
    pub emg_type: String,
    pub n_contaminated: usize,
    pub artifact_index: f64,
    pub mean_abs_contaminated: f64,
    pub mean_abs_uncontaminated: f64,
    pub max_abs_reference: f64,
    pub event: bool,
}

fn record(
    ds_key: (ScenarioKind, Configuration, usize, usize),
    method: Method,
    ic: usize,
    emg_type: String,
    view: &ArtifactColumnView,
) -> Result<ColumnRecord> {
    Ok(ColumnRecord {
        scenario: ds_key.0,
        configuration: ds_key.1,
        grid_value: ds_key.2,
        dataset: ds_key.3,
        method,
        ic,
        emg_type,
        n_contaminated: view.contaminated.len(),
        artifact_index: artifact_index(view)?.value,
        mean_abs_contaminated: view.mean_abs_contaminated(),
        mean_abs_uncontaminated: view.mean_abs_uncontaminated(),
        max_abs_reference: view.max_abs_reference(),
        event: artifact_event(view),
    })
}

/// ERASE in ground-truth mode. The artifact IC found for reference row k is
/// scored against the channels contaminated by that reference's EMG type,
/// or against every contaminated channel when the contaminant is not one of
/// the references.
pub fn evaluate_erase(
    ds: &SimulatedDataset,
    cfg: &ScenarioConfig,
    key: (ScenarioKind, Configuration, usize, usize),
    seed: u64,
) -> Result<Vec<ColumnRecord>> {
    let hat: Vec<&str> = cfg.hat_band.iter().map(String::as_str).collect();
    let out = run_erase(
        &ds.contaminated,
        &ds.references,
        &RejectionCriteria::simulated(&hat),
        None,
        &cfg.erase_options(),
        seed,
    )?;
    let t = ds.contaminated.n_channels();
    let a = out.decomposition.mixing.view();
    let all = ds.truth.contaminated_channels();
    let mut records = Vec::new();
    for f in &out.report.artifact_ics {
        for &k in &f.reference_rows {
            let name = &ds.references.labels()[k];
            let rows: Vec<usize> = ds
                .truth
                .assignments
                .iter()
                .filter(|a| &a.emg_type == name)
                .flat_map(|a| a.channels.iter().copied())
                .collect();
            let (label, rows) = if rows.is_empty() { ("all".to_string(), all.clone()) } else { (name.clone(), rows) };
            let view = ArtifactColumnView::from_column(a, f.index, &rows, t)?;
            records.push(record(key, Method::Erase, f.index, label, &view)?);
        }
    }
    Ok(records)
}

/// ICA on the contaminated EEG alone with hat-band rejection. Each flagged
/// column is scored against the group of its largest-magnitude row, or
/// against every contaminated channel when that row is clean.
pub fn evaluate_conventional(
    ds: &SimulatedDataset,
    cfg: &ScenarioConfig,
    key: (ScenarioKind, Configuration, usize, usize),
    seed: u64,
) -> Result<Vec<ColumnRecord>> {
    let hat: Vec<&str> = cfg.hat_band.iter().map(String::as_str).collect();
    let out = run_conventional_ica(
        &ds.contaminated,
        &RejectionCriteria::experimental(None, &hat),
        &cfg.erase_options(),
        seed,
    )?;
    let t = ds.contaminated.n_channels();
    let a = out.decomposition.mixing.view();
    let all = ds.truth.contaminated_channels();
    let mut records = Vec::new();
    for f in &out.report.artifact_ics {
        let col = a.column(f.index);
        let mut peak = 0;
        for i in 0..t {
            if col[i].abs() > col[peak].abs() {
                peak = i;
            }
        }
        let (label, rows) = match ds.truth.assignment_of(peak) {
            Some(k) => (ds.truth.assignments[k].emg_type.clone(), ds.truth.assignments[k].channels.clone()),
            None => ("all".to_string(), all.clone()),
        };
        let view = ArtifactColumnView::from_column(a, f.index, &rows, t)?;
        records.push(record(key, Method::Conventional, f.index, label, &view)?);
    }
    Ok(records)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FailedDataset {
    pub configuration: Configuration,
    pub grid_value: usize,
    pub dataset: usize,
    pub error: String,
}

/// Per-grid-point aggregate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSummary {
    pub scenario: ScenarioKind,
    pub configuration: Configuration,
    pub grid_value: usize,
    pub n_datasets: usize,
    pub n_failed: usize,
    pub n_columns_erase: usize,
    pub n_columns_conventional: usize,
    pub median_ai_erase: f64,
    pub median_ai_conventional: f64,
    /// Rank-sum p of ERASE vs conventional artifact indices.
    pub p_effectiveness: f64,
    /// FP: any column event per dataset; SENS: all column events.
    pub event_rate: f64,
    pub median_contaminated_coefficient: f64,
    pub median_uncontaminated_coefficient: f64,
    /// Rank-sum p of per-column contaminated vs uncontaminated mean |coefficient|.
    pub p_coefficients: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioOutput {
    pub records: Vec<ColumnRecord>,
    pub summaries: Vec<GridSummary>,
    pub failures: Vec<FailedDataset>,
    /// Ground truth of every generated dataset, keyed like the records.
    pub truths: Vec<(Configuration, usize, usize, ContaminationGroundTruth)>,
}

impl ScenarioOutput {
    pub fn summary(&self, configuration: Configuration, grid_value: usize) -> Option<&GridSummary> {
        self.summaries
            .iter()
            .find(|s| s.configuration == configuration && s.grid_value == grid_value)
    }

    /// Event rate over every dataset of one configuration.
    pub fn configuration_rate(&self, configuration: Configuration) -> Option<f64> {
        let (mut hit, mut n) = (0.0, 0usize);
        for s in self.summaries.iter().filter(|s| s.configuration == configuration) {
            let ok = s.n_datasets - s.n_failed;
            hit += s.event_rate * ok as f64;
            n += ok;
        }
        (n > 0).then(|| hit / n as f64)
    }
}

pub fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

fn rank_sum_p(a: &[f64], b: &[f64]) -> f64 {
    wilcoxon_rank_sum(a, b).map(|r| r.p_value).unwrap_or(f64::NAN)
}

type DatasetResult = (usize, std::result::Result<(Vec<ColumnRecord>, ContaminationGroundTruth), String>);

fn run_grid(
    cfg: &ScenarioConfig,
    configurations: &[Configuration],
    contaminant: Contaminant,
    methods: &[Method],
) -> Result<ScenarioOutput> {
    cfg.validate()?;
    let mut out = ScenarioOutput {
        records: Vec::new(),
        summaries: Vec::new(),
        failures: Vec::new(),
        truths: Vec::new(),
    };
    for &configuration in configurations {
        for grid_value in cfg.grid(configuration) {
            let (n_types, group) = cfg.layout(configuration, grid_value);
            let results: Vec<DatasetResult> = (0..cfg.n_datasets)
                .into_par_iter()
                .map(|k| {
                    let key = (cfg.scenario, configuration, grid_value, k);
                    let seed = dataset_seed(cfg.master_seed, cfg.scenario, configuration, grid_value, k);
                    let run = || -> Result<(Vec<ColumnRecord>, ContaminationGroundTruth)> {
                        let ds = generate_dataset(cfg, n_types, group, contaminant, seed)?;
                        let mut recs = Vec::new();
                        for m in methods {
                            recs.extend(match m {
                                Method::Erase => evaluate_erase(&ds, cfg, key, derive_seed(seed, 10))?,
                                Method::Conventional => evaluate_conventional(&ds, cfg, key, derive_seed(seed, 11))?,
                            });
                        }
                        Ok((recs, ds.truth))
                    };
                    (k, run().map_err(|e| e.to_string()))
                })
                .collect();
            let mut erase_ai = Vec::new();
            let mut conv_ai = Vec::new();
            let mut contaminated = Vec::new();
            let mut uncontaminated = Vec::new();
            let mut events = Vec::new();
            let mut n_failed = 0;
            for (k, r) in results {
                match r {
                    Ok((recs, truth)) => {
                        let erase: Vec<&ColumnRecord> = recs.iter().filter(|r| r.method == Method::Erase).collect();
                        events.push(match cfg.scenario {
                            ScenarioKind::Sens => !erase.is_empty() && erase.iter().all(|r| r.event),
                            _ => erase.iter().any(|r| r.event),
                        });
                        for r in &recs {
                            match r.method {
                                Method::Erase => {
                                    erase_ai.push(r.artifact_index);
                                    contaminated.push(r.mean_abs_contaminated);
                                    uncontaminated.push(r.mean_abs_uncontaminated);
                                }
                                Method::Conventional => conv_ai.push(r.artifact_index),
                            }
                        }
                        out.records.extend(recs);
                        out.truths.push((configuration, grid_value, k, truth));
                    }
                    Err(error) => {
                        n_failed += 1;
                        out.failures.push(FailedDataset {
                            configuration,
                            grid_value,
                            dataset: k,
                            error,
                        });
                    }
                }
            }
            let event_rate = if events.is_empty() {
                f64::NAN
            } else {
                events.iter().filter(|&&e| e).count() as f64 / events.len() as f64
            };
            out.summaries.push(GridSummary {
                scenario: cfg.scenario,
                configuration,
                grid_value,
                n_datasets: cfg.n_datasets,
                n_failed,
                n_columns_erase: erase_ai.len(),
                n_columns_conventional: conv_ai.len(),
                median_ai_erase: median(&erase_ai),
                median_ai_conventional: median(&conv_ai),
                p_effectiveness: rank_sum_p(&erase_ai, &conv_ai),
                event_rate,
                median_contaminated_coefficient: median(&contaminated),
                median_uncontaminated_coefficient: median(&uncontaminated),
                p_coefficients: rank_sum_p(&contaminated, &uncontaminated),
            });
        }
    }
    sort_records(&mut out.records);
    out.truths.sort_by(|a, b| (a.0, a.1, a.2).cmp(&(b.0, b.1, b.2)));
    if let Some(dir) = &cfg.output_dir {
        super::output::write_scenario(dir, &out)?;
    }
    Ok(out)
}

pub fn sort_records(records: &mut [ColumnRecord]) {
    records.sort_by(|a, b| {
        (a.configuration, a.grid_value, a.dataset, a.method, a.ic, &a.emg_type).cmp(&(
            b.configuration,
            b.grid_value,
            b.dataset,
            b.method,
            b.ic,
            &b.emg_type,
        ))
    });
}

/// Growing contaminated-channel count with three EMG types.
pub fn run_scenario1(cfg: &ScenarioConfig) -> Result<ScenarioOutput> {
    let cfg = ScenarioConfig {
        scenario: ScenarioKind::S1,
        ..cfg.clone()
    };
    run_grid(&cfg, &[Configuration::S1], Contaminant::ReferenceEmg, &[Method::Erase, Method::Conventional])
}

/// Growing number of EMG types, six channels each.
pub fn run_scenario2(cfg: &ScenarioConfig) -> Result<ScenarioOutput> {
    let cfg = ScenarioConfig {
        scenario: ScenarioKind::S2,
        ..cfg.clone()
    };
    run_grid(&cfg, &[Configuration::S2], Contaminant::ReferenceEmg, &[Method::Erase, Method::Conventional])
}

/// Gaussian noise contaminant independent of the references, in both
/// scenario configurations.
pub fn run_false_positive(cfg: &ScenarioConfig) -> Result<ScenarioOutput> {
    let cfg = ScenarioConfig {
        scenario: ScenarioKind::Fp,
        ..cfg.clone()
    };
    let noise = Contaminant::GaussianNoise {
        sd_uv: cfg.fp_noise_sd_uv,
    };
    run_grid(&cfg, &[Configuration::S1, Configuration::S2], noise, &[Method::Erase])
}

/// The references themselves as contaminant, in both scenario configurations.
pub fn run_sensitivity(cfg: &ScenarioConfig) -> Result<ScenarioOutput> {
    let cfg = ScenarioConfig {
        scenario: ScenarioKind::Sens,
        ..cfg.clone()
    };
    run_grid(&cfg, &[Configuration::S1, Configuration::S2], Contaminant::ReferenceEmg, &[Method::Erase])
}
