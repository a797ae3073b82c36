use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use erase::eeg_sim::{contaminate, plan_contamination, simulate_eeg, HAT_BAND_32};
use erase::emg::{default_head_specs, load_muscle_specs, simulate_head_emg_set, MotorUnitOptions};
use erase::erase::{run_conventional_ica, run_erase, EraseOptions, RejectionCriteria};
use erase::error::{Error, Result};
use erase::experiments::output::{scenario_stem, write_csv};
use erase::experiments::{
    aggregate_report, pseudo_real_session, run_false_positive, run_scenario1, run_scenario2, run_sensitivity,
    run_session_pipeline, Condition, PseudoRealOptions, ScenarioConfig, ScenarioKind, ScenarioOutput, SessionOutcome,
    SessionRecordSet,
};
use erase::ica::{save_decomposition, FastIcaOptions};
use erase::signal::io::{read_json, read_recording, write_json, write_recording, Payload};
use erase::signal::{EpochedRecording, MultiChannelRecording, TrialSchedule};

#[derive(Parser)]
#[command(name = "erase", version, about = "Reference-augmented ICA for EMG artifact removal from EEG")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// JSON configuration document.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long)]
    datasets: Option<usize>,
    /// Criterion-1 gain, or `auto` to sweep.
    #[arg(long, default_value = "auto")]
    gain: String,
    /// Hat-band labels: a JSON list or one label per line.
    #[arg(long)]
    hat_band: Option<PathBuf>,
    #[arg(long, default_value = "C3")]
    mu_channel: String,
}

#[derive(Subcommand)]
enum Command {
    /// Simulated EEG recording.
    SimulateEeg {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 32)]
        channels: usize,
        #[arg(long, default_value_t = 10.0)]
        duration: f64,
        #[arg(long, default_value_t = 1000.0)]
        rate: f64,
    },
    /// Simulated EMG of the head muscles (`--config` holds muscle specs).
    SimulateEmg {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 10.0)]
        duration: f64,
        #[arg(long, default_value_t = 1000.0)]
        rate: f64,
        /// Use the 100-s fist-clench trial schedule.
        #[arg(long)]
        fist_clench: bool,
    },
    /// Mix EMG into random disjoint groups of EEG channels.
    Contaminate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        eeg: PathBuf,
        #[arg(long)]
        emg: PathBuf,
        #[arg(long, default_value_t = 2)]
        group_size: usize,
    },
    /// ICA on EEG plus reference EMG with artifact-IC rejection.
    Erase {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        eeg: PathBuf,
        #[arg(long)]
        refs: PathBuf,
        /// Epoch with the fist-clench schedule first (needed for `--gain auto`).
        #[arg(long)]
        fist_clench: bool,
        #[arg(long, default_value_t = 1000)]
        max_iter: usize,
    },
    /// ICA on the EEG alone with hat-band rejection.
    IcaBaseline {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        eeg: PathBuf,
        #[arg(long, default_value_t = 1000)]
        max_iter: usize,
    },
    Scenario1 {
        #[command(flatten)]
        common: Common,
        /// 200 datasets at 2 kHz for 300 s instead of the workstation preset.
        #[arg(long)]
        full: bool,
    },
    Scenario2 {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        full: bool,
    },
    FalsePositive {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        full: bool,
    },
    Sensitivity {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        full: bool,
    },
    /// Session pipeline on pseudo-real sessions, or on recordings given
    /// with `--eeg`, `--real-refs` and `--sim-refs` (fist-clench schedule).
    Session {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 1)]
        sessions: u64,
        #[arg(long)]
        eeg: Option<PathBuf>,
        #[arg(long)]
        real_refs: Option<PathBuf>,
        #[arg(long)]
        sim_refs: Option<PathBuf>,
        #[arg(long, default_value_t = 200)]
        max_iter: usize,
    },
    /// Aggregate `session_runs.json` files into condition tables.
    Report {
        #[command(flatten)]
        common: Common,
        /// Files or directories holding `session_runs.json`.
        runs: Vec<PathBuf>,
    },
}

fn hat_band(common: &Common) -> Result<Vec<String>> {
    let Some(path) = &common.hat_band else {
        return Ok(HAT_BAND_32.iter().map(|s| s.to_string()).collect());
    };
    let text = fs::read_to_string(path)?;
    if text.trim_start().starts_with('[') {
        return Ok(serde_json::from_str(&text)?);
    }
    Ok(text.lines().map(str::trim).filter(|l| !l.is_empty()).map(String::from).collect())
}

fn gain(common: &Common) -> Result<Option<f64>> {
    if common.gain == "auto" {
        return Ok(None);
    }
    common
        .gain
        .parse()
        .map(Some)
        .map_err(|_| Error::Config(format!("--gain must be a number or `auto`, got {}", common.gain)))
}

fn criteria(common: &Common) -> Result<RejectionCriteria> {
    let hat = hat_band(common)?;
    let hat: Vec<&str> = hat.iter().map(String::as_str).collect();
    Ok(RejectionCriteria::experimental(gain(common)?, &hat))
}

fn erase_options(common: &Common, max_iter: usize) -> EraseOptions {
    EraseOptions {
        ica: FastIcaOptions {
            max_iter,
            ..FastIcaOptions::default()
        },
        mu_channel: common.mu_channel.clone(),
        ..EraseOptions::default()
    }
}

fn save(out: &Path, name: &str, rec: &MultiChannelRecording) -> Result<()> {
    fs::create_dir_all(out)?;
    let path = out.join(name);
    write_recording(&path, rec, Payload::Raw)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn scenario_config(common: &Common, kind: ScenarioKind, full: bool) -> Result<ScenarioConfig> {
    let mut cfg = match &common.config {
        Some(p) => read_json(p)?,
        None if full => ScenarioConfig::default(),
        None => ScenarioConfig::desk(kind),
    };
    cfg.scenario = kind;
    cfg.master_seed = common.seed;
    if let Some(n) = common.datasets {
        cfg.n_datasets = n;
    }
    cfg.hat_band = hat_band(common)?;
    cfg.output_dir = Some(common.out.clone());
    cfg.validate()?;
    Ok(cfg)
}

fn print_scenario(out: &ScenarioOutput, dir: &Path) {
    for s in &out.summaries {
        println!(
            "{:?} grid {:>2}: datasets {} failed {} | AI median erase {:.3} conventional {:.3} (p {:.3e}) | event rate {:.3} | coefficient p {:.3e}",
            s.configuration,
            s.grid_value,
            s.n_datasets,
            s.n_failed,
            s.median_ai_erase,
            s.median_ai_conventional,
            s.p_effectiveness,
            s.event_rate,
            s.p_coefficients,
        );
    }
    if let Some(s) = out.summaries.first() {
        println!("wrote {}/{}_*.csv", dir.display(), scenario_stem(s.scenario));
    }
}

fn session_runs(paths: &[PathBuf]) -> Result<Vec<SessionOutcome>> {
    let mut runs = Vec::new();
    for p in paths {
        let file = if p.is_dir() { p.join("session_runs.json") } else { p.clone() };
        let mut r: Vec<SessionOutcome> = read_json(&file)?;
        runs.append(&mut r);
    }
    Ok(runs)
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::SimulateEeg {
            common,
            channels,
            duration,
            rate,
        } => {
            let eeg = simulate_eeg(channels, duration, rate, common.seed)?;
            save(&common.out, "eeg.json", &eeg)
        }
        Command::SimulateEmg {
            common,
            duration,
            rate,
            fist_clench,
        } => {
            let specs = match &common.config {
                Some(p) => load_muscle_specs(p)?,
                None => default_head_specs(),
            };
            let schedule = if fist_clench {
                TrialSchedule::fist_clench_session()
            } else {
                TrialSchedule::empty(duration)
            };
            let emg = simulate_head_emg_set(&specs, &schedule, rate, common.seed, &MotorUnitOptions::default())?;
            save(&common.out, "emg.json", &emg)
        }
        Command::Contaminate {
            common,
            eeg,
            emg,
            group_size,
        } => {
            let eeg = read_recording(eeg)?;
            let emg = read_recording(emg)?;
            let names: Vec<&str> = emg.labels().iter().map(String::as_str).collect();
            let truth = plan_contamination(&names, group_size, eeg.n_channels(), common.seed)?;
            let mixed = contaminate(&eeg, &emg, &truth)?;
            save(&common.out, "contaminated.json", &mixed)?;
            write_json(common.out.join("ground_truth.json"), &truth)
        }
        Command::Erase {
            common,
            eeg,
            refs,
            fist_clench,
            max_iter,
        } => {
            let mut eeg = read_recording(eeg)?;
            let mut refs = read_recording(refs)?;
            let mut layout = None;
            if fist_clench {
                let schedule = TrialSchedule::fist_clench_session();
                let e = EpochedRecording::extract(&eeg, &schedule)?;
                refs = EpochedRecording::extract(&refs, &schedule)?.recording;
                eeg = e.recording;
                layout = Some(e.layout);
            }
            let opts = erase_options(&common, max_iter);
            let out = run_erase(&eeg, &refs, &criteria(&common)?, layout.as_ref(), &opts, common.seed)?;
            save(&common.out, "cleaned.json", &out.cleaned)?;
            write_json(common.out.join("rejection_report.json"), &out.report)?;
            let mut labels = eeg.labels().to_vec();
            labels.extend(refs.labels().iter().cloned());
            save_decomposition(&common.out, "decomposition", &out.decomposition, &labels, eeg.sample_rate_hz())?;
            println!(
                "rejected {} of {} ICs (gain {:?}, converged {})",
                out.report.artifact_ics.len(),
                out.decomposition.n_components(),
                out.report.gain,
                out.decomposition.diagnostics.converged
            );
            Ok(())
        }
        Command::IcaBaseline { common, eeg, max_iter } => {
            let eeg = read_recording(eeg)?;
            let opts = erase_options(&common, max_iter);
            let out = run_conventional_ica(&eeg, &criteria(&common)?, &opts, common.seed)?;
            save(&common.out, "cleaned.json", &out.cleaned)?;
            write_json(common.out.join("rejection_report.json"), &out.report)?;
            save_decomposition(&common.out, "decomposition", &out.decomposition, eeg.labels(), eeg.sample_rate_hz())?;
            println!(
                "rejected {} of {} ICs",
                out.report.artifact_ics.len(),
                out.decomposition.n_components()
            );
            Ok(())
        }
        Command::Scenario1 { common, full } => {
            let out = run_scenario1(&scenario_config(&common, ScenarioKind::S1, full)?)?;
            print_scenario(&out, &common.out);
            Ok(())
        }
        Command::Scenario2 { common, full } => {
            let out = run_scenario2(&scenario_config(&common, ScenarioKind::S2, full)?)?;
            print_scenario(&out, &common.out);
            Ok(())
        }
        Command::FalsePositive { common, full } => {
            let out = run_false_positive(&scenario_config(&common, ScenarioKind::Fp, full)?)?;
            print_scenario(&out, &common.out);
            Ok(())
        }
        Command::Sensitivity { common, full } => {
            let out = run_sensitivity(&scenario_config(&common, ScenarioKind::Sens, full)?)?;
            print_scenario(&out, &common.out);
            Ok(())
        }
        Command::Session {
            common,
            sessions,
            eeg,
            real_refs,
            sim_refs,
            max_iter,
        } => {
            let opts = erase_options(&common, max_iter);
            let criteria = criteria(&common)?;
            let sets: Vec<SessionRecordSet> = match eeg {
                Some(eeg) => vec![SessionRecordSet {
                    eeg: read_recording(eeg)?,
                    real_references: real_refs.map(read_recording).transpose()?,
                    simulated_references: sim_refs.map(read_recording).transpose()?,
                    schedule: TrialSchedule::fist_clench_session(),
                    mu_channel: common.mu_channel.clone(),
                    subject: "file".into(),
                    session: "1".into(),
                }],
                None => {
                    let mut p = match &common.config {
                        Some(path) => read_json(path)?,
                        None => PseudoRealOptions::default(),
                    };
                    p.mu_channel = common.mu_channel.clone();
                    (0..sessions)
                        .map(|k| pseudo_real_session(&p, common.seed + k))
                        .collect::<Result<_>>()?
                }
            };
            let mut runs = Vec::new();
            for (k, s) in sets.iter().enumerate() {
                for c in Condition::CLEANING {
                    let has_refs = match c {
                        Condition::EraseReal => s.real_references.is_some(),
                        Condition::EraseSimulated => s.simulated_references.is_some(),
                        _ => true,
                    };
                    if !has_refs {
                        continue;
                    }
                    let o = run_session_pipeline(s, c, &criteria, &opts, common.seed + k as u64)?;
                    println!(
                        "{} {:<16} HF reduction {:6.2}%  {} μ z {:.3} (baseline {:.3})  rejected {}",
                        o.subject,
                        c.name(),
                        o.hf_percent_reduction,
                        s.mu_channel,
                        o.mu_channel_z,
                        o.mu_channel_z_baseline,
                        o.report.artifact_ics.len()
                    );
                    fs::create_dir_all(&common.out)?;
                    let mut rows = o.baseline.channels.clone();
                    rows.extend(o.cleaned.channels.iter().cloned());
                    write_csv(common.out.join(format!("{}_{}_channels.csv", o.subject, c.name())), &rows)?;
                    runs.push(o);
                }
            }
            write_json(common.out.join("session_runs.json"), &runs)?;
            let report = aggregate_report(&runs, &common.mu_channel)?;
            report.write(&common.out)?;
            println!("wrote {}/session_*.csv", common.out.display());
            Ok(())
        }
        Command::Report { common, runs } => {
            let runs = session_runs(&runs)?;
            let report = aggregate_report(&runs, &common.mu_channel)?;
            report.write(&common.out)?;
            for c in &report.conditions {
                println!(
                    "{:<16} n {:>2}  HF z {:7.3} ± {:.3}  μ z {:7.3} ± {:.3}  reduction {:7.2} ± {:.2}",
                    c.condition.name(),
                    c.n_runs,
                    c.hf_z_mean,
                    c.hf_z_sd,
                    c.mu_z_mean,
                    c.mu_z_sd,
                    c.reduction_mean,
                    c.reduction_sd
                );
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_numerical() { 2 } else { 1 })
        }
    }
}
