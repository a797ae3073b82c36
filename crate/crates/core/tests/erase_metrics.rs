mod common;

use std::collections::BTreeSet;
use std::sync::OnceLock;

use common::fixtures;
use erase::eeg_sim::{contaminate, plan_contamination, simulate_eeg, HAT_BAND_32};
use erase::emg::{simulate_head_emg_set, MotorUnitOptions, Muscle, MuscleSpec};
use erase::erase::{
    gain_objective, identify_artifact_ics, rms_of_reference_rows, run_conventional_ica, run_erase, select_gain,
    EraseOptions, Provenance, RejectionCriteria,
};
use erase::error::Error;
use erase::ica::{Diagnostics, FastIcaOptions, IcaDecomposition, WhiteningTransform};
use erase::metrics::{artifact_event, artifact_index, percent_reduction, rate_over_datasets, ArtifactColumnView};
use erase::signal::{band_power, ChannelKind, FrequencyBand, MultiChannelRecording, TrialLayout, TrialSchedule};
use ndarray::{array, Array1, Array2};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

fn labels(prefix: &str, n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("{prefix}{i}")).collect()
}

#[test]
fn reference_rms_fixtures() {
    let eye = Array2::<f64>::eye(5);
    assert!((rms_of_reference_rows(eye.view(), 3, 2).unwrap() - (1.0f64 / 5.0).sqrt()).abs() < 1e-15);
    let c = Array2::from_elem((6, 6), -2.5);
    assert!((rms_of_reference_rows(c.view(), 4, 2).unwrap() - 2.5).abs() < 1e-15);
    let (got, oracle) = fixtures::rms_fixture();
    assert!((got - oracle).abs() < 1e-12);
    assert!(rms_of_reference_rows(eye.view(), 5, 0).is_err());
    assert!(rms_of_reference_rows(eye.view(), 4, 2).is_err());
}

#[test]
fn identity_mixing_flags_reference_ics() {
    let eye = Array2::<f64>::eye(5);
    let l = labels("E", 3);
    let report = identify_artifact_ics(eye.view(), &RejectionCriteria::experimental(Some(1.0), &["E1"]), &l, 3, 2).unwrap();
    let by_threshold: BTreeSet<usize> = report
        .artifact_ics
        .iter()
        .filter(|f| f.provenance.contains(&Provenance::ThresholdCriterion))
        .map(|f| f.index)
        .collect();
    assert_eq!(by_threshold, [3, 4].into_iter().collect());
    assert_eq!(report.indices(), [0, 3, 4].into_iter().collect());
    assert_eq!(report.artifact_ics[0].provenance, vec![Provenance::HatBandCriterion]);
    assert_eq!(report.threshold, Some((0.2f64).sqrt()));
}

#[test]
fn hat_band_flag_ignores_gain() {
    let mut a = Array2::<f64>::eye(5) * 0.5;
    a[[1, 2]] = 0.9;
    let l = labels("E", 3);
    for g in [0.4, 1.0, 3.0] {
        let r = identify_artifact_ics(a.view(), &RejectionCriteria::experimental(Some(g), &["E2"]), &l, 3, 2).unwrap();
        assert!(r.is_flagged(2), "gain {g}");
        let f = r.artifact_ics.iter().find(|f| f.index == 2).unwrap();
        assert!(f.provenance.contains(&Provenance::HatBandCriterion));
    }
    let none = RejectionCriteria::experimental(Some(1.0), &[]);
    assert!(matches!(identify_artifact_ics(a.view(), &none, &l, 3, 2), Err(Error::Config(_))));
    let missing = RejectionCriteria::experimental(None, &["E2"]);
    assert!(identify_artifact_ics(a.view(), &missing, &l, 3, 2).is_err());
}

#[test]
fn simulated_mode_takes_row_maxima() {
    let a = fixtures::matrix(9, 9, 5);
    let (t, tau) = (6, 3);
    let l = labels("E", t);
    let r = identify_artifact_ics(a.view(), &RejectionCriteria::simulated(&["E1"]), &l, t, tau).unwrap();
    let mut oracle = BTreeSet::new();
    for k in 0..tau {
        let row = a.row(t + k);
        let mut best = 0;
        for j in 1..row.len() {
            if row[j].abs() > row[best].abs() {
                best = j;
            }
        }
        oracle.insert(best);
    }
    assert_eq!(r.indices(), oracle);
    assert!(r.artifact_ics.iter().all(|f| f.provenance == vec![Provenance::MaxRefCoefficient]));
    assert!(identify_artifact_ics(a.view(), &RejectionCriteria::simulated(&["E1"]), &labels("E", 9), 9, 0).is_err());
}

const FS: f64 = 500.0;
const TRIALS: usize = 10;

fn layout() -> TrialLayout {
    let per = 3 * FS as usize;
    let idle_len = FS as usize;
    TrialLayout {
        idle: (0..TRIALS).map(|k| k * per..k * per + idle_len).collect(),
        movement: (0..TRIALS).map(|k| k * per + idle_len..(k + 1) * per).collect(),
    }
}

/// Seven sources: a μ rhythm that weakens in movement, a high-frequency
/// burst active in movement, and five white noise backgrounds.
fn sources(seed: u64) -> Array2<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let lay = layout();
    let n = lay.total_samples();
    let mut s = Array2::<f64>::zeros((7, n));
    for i in 0..n {
        let moving = lay.movement.iter().any(|r| r.contains(&i));
        let t = i as f64 / FS;
        let g: f64 = StandardNormal.sample(&mut rng);
        s[[0, i]] = if moving { 0.3 } else { 1.0 } * (2.0 * std::f64::consts::PI * 10.0 * t).sin() * 3.0 + 0.1 * g;
        let h: f64 = StandardNormal.sample(&mut rng);
        s[[1, i]] = if moving { 1.0 } else { 0.05 } * h;
        for j in 2..7 {
            s[[j, i]] = StandardNormal.sample(&mut rng);
        }
    }
    s
}

/// Six EEG rows (μ on E3) and one reference row whose |coefficients| over
/// the row RMS are 1.45 for the μ IC, 2.05 for the burst IC and 0.373 for
/// the rest, so the flagged set shrinks at gains 1.5 and 2.1.
fn mixing() -> Array2<f64> {
    let rms = 0.5;
    let mut a = Array2::from_elem((7, 7), 0.1);
    a[[2, 0]] = 1.0;
    a[[0, 1]] = 1.2;
    a[[1, 1]] = 1.2;
    for j in 2..6 {
        a[[j - 2, j]] = 1.0;
    }
    a[[4, 6]] = 1.0;
    let rest = ((7.0 - 1.45f64.powi(2) - 2.05f64.powi(2)) / 5.0).sqrt();
    a[[6, 0]] = 1.45 * rms;
    a[[6, 1]] = 2.05 * rms;
    for j in 2..7 {
        a[[6, j]] = rest * rms;
    }
    a
}

fn decomposition(mixing: Array2<f64>, sources: Array2<f64>) -> IcaDecomposition {
    let n = mixing.nrows();
    IcaDecomposition {
        unmixing: Array2::eye(n),
        whitening: WhiteningTransform {
            means: Array1::zeros(n),
            whitening: Array2::eye(n),
            dewhitening: Array2::eye(n),
            rank: n,
        },
        rotation: Array2::eye(n),
        diagnostics: Diagnostics {
            iterations: 0,
            final_tolerance: 0.0,
            converged: true,
            restarts: 0,
            seed: 0,
        },
        mixing,
        sources,
    }
}

fn erase_opts() -> EraseOptions {
    EraseOptions {
        mu_channel: "E3".into(),
        ..EraseOptions::default()
    }
}

/// Objective rebuilt by hand: own flag rule, own reconstruction, per-trial
/// band power and z-scoring against idle trials.
fn objective_oracle(a: &Array2<f64>, s: &Array2<f64>, gain: f64, hat: usize) -> (f64, usize) {
    let (t, n) = (6, 7);
    let ref_row = a.row(t);
    let rms = (ref_row.iter().map(|v| v * v).sum::<f64>() / n as f64).sqrt();
    let mut rejected = BTreeSet::new();
    for j in 0..n {
        if a[[t, j]].abs() > gain * rms {
            rejected.insert(j);
        }
        let col = a.column(j);
        let mut best = 0;
        for i in 1..n {
            if col[i].abs() > col[best].abs() {
                best = i;
            }
        }
        if best == hat {
            rejected.insert(j);
        }
    }
    let mut cleaned = Array2::<f64>::zeros((t, s.ncols()));
    for ch in 0..t {
        for j in (0..n).filter(|j| !rejected.contains(j)) {
            let w = a[[ch, j]];
            for (c, v) in cleaned.row_mut(ch).iter_mut().zip(s.row(j)) {
                *c += w * v;
            }
        }
    }
    let rec = MultiChannelRecording::with_kind(labels("E", t), ChannelKind::Eeg, FS, cleaned).unwrap();
    let lay = layout();
    let power = |range: &std::ops::Range<usize>, band| {
        band_power(&rec.select_samples(range.clone()).unwrap(), band, 0.5, 0.125).unwrap()
    };
    let z = |band: FrequencyBand, ch: usize| -> Option<f64> {
        let idle: Vec<f64> = lay.idle.iter().map(|r| power(r, band)[ch]).collect();
        let mov: Vec<f64> = lay.movement.iter().map(|r| power(r, band)[ch]).collect();
        let m = idle.iter().sum::<f64>() / idle.len() as f64;
        let sd = (idle.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (idle.len() - 1) as f64).sqrt();
        (sd > 0.0).then(|| mov.iter().map(|v| (v - m) / sd).sum::<f64>() / mov.len() as f64)
    };
    let hf: f64 = (0..t).filter_map(|ch| z(FrequencyBand::HIGH_FREQUENCY, ch)).sum();
    (hf + z(FrequencyBand::MU, 2).unwrap_or(0.0), rejected.len())
}

#[test]
fn sweep_picks_gain_one_point_five() {
    let (a, s) = (mixing(), sources(3));
    let dec = decomposition(a.clone(), s.clone());
    let l = labels("E", 6);
    let template = RejectionCriteria::experimental(None, &["E6"]);
    let sel = select_gain(&dec, &template, &l, 1, FS, &layout(), &erase_opts()).unwrap();
    assert!(!sel.degenerate);
    assert_eq!(sel.sweep.len(), 27);
    assert!((sel.gain - 1.5).abs() < 1e-12, "{:?}", sel.sweep);
    for p in &sel.sweep {
        let (obj, count) = objective_oracle(&a, &s, p.gain, 5);
        assert_eq!(p.n_rejected, count, "gain {}", p.gain);
        assert!((p.objective - obj).abs() < 1e-9 * obj.abs().max(1.0), "gain {}: {} vs {obj}", p.gain, p.objective);
    }
}

#[test]
fn constant_objective_selects_smallest_gain() {
    // Identity mixing over ten components: the reference IC exceeds every
    // grid gain (√10 > 3) and the E1 column always lands in the hat band.
    let n = 10;
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let lay = layout();
    let s = Array2::from_shape_fn((n, lay.total_samples()), |_| StandardNormal.sample(&mut rng));
    let dec = decomposition(Array2::eye(n), s);
    let l = labels("E", n - 1);
    let opts = EraseOptions {
        mu_channel: "E2".into(),
        ..EraseOptions::default()
    };
    let sel = select_gain(&dec, &RejectionCriteria::experimental(None, &["E1"]), &l, 1, FS, &lay, &opts).unwrap();
    assert!(sel.sweep.iter().all(|p| p.n_rejected == 2));
    assert!(sel.sweep.iter().all(|p| p.objective == sel.sweep[0].objective));
    assert_eq!(sel.gain, 0.4);

    let rejected: BTreeSet<usize> = [0, 9].into_iter().collect();
    let direct = gain_objective(&dec, &rejected, &l, FS, &lay, &opts).unwrap();
    assert_eq!(direct, sel.sweep[0].objective);
}

#[test]
fn degenerate_sweep_falls_back_to_smallest_gain() {
    // Equal reference coefficients never exceed RMS x gain for gains >= 1,
    // and no column peaks on E6.
    let n = 7;
    let mut a = Array2::from_elem((n, n), 0.2);
    for i in 0..5 {
        a[[i, i]] = 1.0;
    }
    for j in 0..n {
        a[[6, j]] = 0.35;
    }
    let dec = decomposition(a, sources(5));
    let opts = EraseOptions {
        gain_grid: vec![2.0, 1.5, 1.0],
        ..erase_opts()
    };
    let l = labels("E", 6);
    let sel = select_gain(&dec, &RejectionCriteria::experimental(None, &["E6"]), &l, 1, FS, &layout(), &opts).unwrap();
    assert!(sel.degenerate);
    assert_eq!(sel.gain, 1.0);
    assert!(sel.sweep.iter().all(|p| p.n_rejected == 0));
    let empty = EraseOptions {
        gain_grid: vec![],
        ..erase_opts()
    };
    assert!(select_gain(&dec, &RejectionCriteria::experimental(None, &["E6"]), &l, 1, FS, &layout(), &empty).is_err());
}

fn recording(labels: Vec<String>, data: Array2<f64>, kind: ChannelKind) -> MultiChannelRecording {
    MultiChannelRecording::with_kind(labels, kind, 1000.0, data).unwrap()
}

#[test]
fn erase_contracts() {
    let eeg = simulate_eeg(8, 4.0, 1000.0, 2).unwrap();
    let none = recording(vec![], Array2::zeros((0, eeg.n_samples())), ChannelKind::EmgRef);
    let crit = RejectionCriteria::simulated(&["E1"]);
    assert!(run_erase(&eeg, &none, &crit, None, &EraseOptions::default(), 1).is_err());

    let mut refs = recording(vec!["r".into()], Array2::zeros((1, eeg.n_samples())), ChannelKind::EmgRef);
    let dup = recording(vec!["r".into()], eeg.channel(0).to_owned().insert_axis(ndarray::Axis(0)), ChannelKind::EmgRef);
    assert!(matches!(
        run_erase(&eeg, &dup, &crit, None, &EraseOptions::default(), 1),
        Err(Error::RankDeficient { .. })
    ));

    let mut rng = ChaCha8Rng::seed_from_u64(9);
    refs = refs
        .with_data(Array2::from_shape_fn((1, eeg.n_samples()), |_| StandardNormal.sample(&mut rng)))
        .unwrap();
    let out = run_erase(&eeg, &refs, &crit, None, &EraseOptions::default(), 1).unwrap();
    assert_eq!(out.cleaned.labels(), eeg.labels());
    assert_eq!(out.cleaned.n_samples(), eeg.n_samples());
    assert!(out.cleaned.all_kind(ChannelKind::Eeg));
    assert_eq!(out.report.indices().len(), 1);
    assert_eq!(out.report.gain, None);
    let needs_layout = RejectionCriteria::experimental(None, &["E1"]);
    assert!(run_erase(&eeg, &refs, &needs_layout, None, &EraseOptions::default(), 1).is_err());
}

#[test]
fn conventional_rejects_only_hat_band_argmax() {
    let s = common::four_sources(20_000, 3);
    let a = array![
        [1.0, 0.9, 0.1, 0.2],
        [0.5, 0.3, 1.0, 0.1],
        [0.2, 0.1, 0.3, 1.0],
        [0.1, 0.6, 0.2, 0.4]
    ];
    let eeg = recording(labels("E", 4), a.dot(&s), ChannelKind::Eeg);
    let opts = EraseOptions::default();

    let clean = run_conventional_ica(&eeg, &RejectionCriteria::experimental(None, &["E4"]), &opts, 3).unwrap();
    assert!(clean.report.artifact_ics.is_empty());
    for (x, y) in clean.cleaned.data().iter().zip(eeg.data()) {
        assert!((x - y).abs() < 1e-6);
    }

    let out = run_conventional_ica(&eeg, &RejectionCriteria::simulated(&["E1"]), &opts, 3).unwrap();
    assert_eq!(out.report.indices().len(), 2);
    assert!(out.report.artifact_ics.iter().all(|f| f.provenance == vec![Provenance::HatBandCriterion]));
    assert!(out.report.rms_value.is_none());
}

struct HfOutcome {
    floor_ratio: f64,
    erase_ratio: f64,
    conventional_ratio: f64,
}

/// Movement-phase HF power over the contaminated channels after cleaning,
/// relative to the contaminated recording, for ERASE and conventional ICA.
fn hf_fixture(seed: u64) -> HfOutcome {
    let fs = 1000.0;
    let schedule = TrialSchedule::periodic(4, 3.0, 0.0, 1.0, 2.0, 12.0).unwrap();
    let eeg = simulate_eeg(32, 12.0, fs, seed).unwrap();
    let spec = MuscleSpec::default_for(Muscle::MasseterLeft);
    let emg = simulate_head_emg_set(&[spec], &schedule, fs, seed, &MotorUnitOptions::default()).unwrap();
    let plan = plan_contamination(&[spec.name()], 6, 32, seed).unwrap();
    let dirty = contaminate(&eeg, &emg, &plan).unwrap();
    let opts = EraseOptions {
        ica: FastIcaOptions {
            max_iter: 200,
            max_restarts: 0,
            ..FastIcaOptions::default()
        },
        ..EraseOptions::default()
    };
    let er = run_erase(&dirty, &emg, &RejectionCriteria::simulated(&HAT_BAND_32), None, &opts, seed).unwrap();
    let conv = run_conventional_ica(&dirty, &RejectionCriteria::experimental(None, &HAT_BAND_32), &opts, seed).unwrap();
    let channels = plan.contaminated_channels();
    let hf = |rec: &MultiChannelRecording| -> f64 {
        let mut total = 0.0;
        for t in &schedule.trials {
            let a = (t.move_start_s * fs) as usize;
            let b = (t.move_end_s() * fs) as usize;
            let p = band_power(&rec.select_samples(a..b).unwrap(), FrequencyBand::HIGH_FREQUENCY, 0.5, 0.125).unwrap();
            total += channels.iter().map(|&c| p[c]).sum::<f64>();
        }
        total
    };
    let base = hf(&dirty);
    HfOutcome {
        floor_ratio: hf(&eeg) / base,
        erase_ratio: hf(&er.cleaned) / base,
        conventional_ratio: hf(&conv.cleaned) / base,
    }
}

fn hf_outcomes() -> &'static [HfOutcome] {
    static OUT: OnceLock<Vec<HfOutcome>> = OnceLock::new();
    OUT.get_or_init(|| (0..10).map(hf_fixture).collect())
}

#[test]
fn erase_removes_most_movement_hf_power() {
    let erase: Vec<f64> = hf_outcomes().iter().map(|o| o.erase_ratio).collect();
    let mean = erase.iter().sum::<f64>() / erase.len() as f64;
    assert!(mean <= 0.4, "mean {mean}: {erase:?}");
}

#[test]
fn erase_residual_matches_clean_eeg() {
    for o in hf_outcomes() {
        assert!((o.erase_ratio - o.floor_ratio).abs() < 0.02 * o.floor_ratio, "{} vs {}", o.erase_ratio, o.floor_ratio);
    }
}

#[test]
fn erase_beats_conventional_on_hf() {
    let out = hf_outcomes();
    let wins = out.iter().filter(|o| o.erase_ratio < o.conventional_ratio).count();
    let erase: Vec<f64> = out.iter().map(|o| o.erase_ratio).collect();
    let conv: Vec<f64> = out.iter().map(|o| o.conventional_ratio).collect();
    assert!(wins >= 8, "ERASE beat conventional ICA in {wins}/10: {erase:?} vs {conv:?}");
}

#[test]
fn artifact_index_fixtures() {
    let half = ArtifactColumnView {
        contaminated: vec![0.5; 6],
        uncontaminated: vec![0.5; 26],
        reference: vec![1.0],
    };
    assert_eq!(artifact_index(&half).unwrap().value, 1.0);
    let mut un = vec![0.1; 30];
    un[0] = -0.1;
    let spiky = ArtifactColumnView {
        contaminated: vec![0.8, -0.6],
        uncontaminated: un,
        reference: vec![1.0],
    };
    assert!((artifact_index(&spiky).unwrap().value - 7.0).abs() < 1e-12);
    for (got, oracle) in fixtures::artifact_index_fixture() {
        assert!((got - oracle).abs() < 1e-12 * oracle.abs().max(1.0));
    }
    let empty = ArtifactColumnView {
        contaminated: vec![],
        uncontaminated: vec![1.0],
        reference: vec![1.0],
    };
    assert!(artifact_index(&empty).is_err());
    let zero = ArtifactColumnView {
        contaminated: vec![1.0],
        uncontaminated: vec![0.0, 0.0],
        reference: vec![1.0],
    };
    assert!(artifact_index(&zero).unwrap().zero_denominator);
}

#[test]
fn column_view_splits_rows() {
    let a = fixtures::matrix(8, 8, 2);
    let v = ArtifactColumnView::from_column(a.view(), 3, &[1, 4], 6).unwrap();
    assert_eq!(v.contaminated, vec![a[[1, 3]], a[[4, 3]]]);
    assert_eq!(v.uncontaminated, vec![a[[0, 3]], a[[2, 3]], a[[3, 3]], a[[5, 3]]]);
    assert_eq!(v.reference, vec![a[[6, 3]], a[[7, 3]]]);
    assert!(ArtifactColumnView::from_column(a.view(), 3, &[6], 6).is_err());
}

#[test]
fn artifact_event_fixtures() {
    let equal = ArtifactColumnView {
        contaminated: vec![0.3; 6],
        uncontaminated: vec![0.3; 26],
        reference: vec![1.0],
    };
    assert!(!artifact_event(&equal));
    let clear = ArtifactColumnView {
        contaminated: vec![0.9],
        uncontaminated: vec![0.1],
        reference: vec![1.0],
    };
    assert!(artifact_event(&clear));
    assert_eq!(0.05 * 2.5, 0.125);
    let boundary = ArtifactColumnView {
        contaminated: vec![0.375],
        uncontaminated: vec![0.25],
        reference: vec![-2.5, 1.0],
    };
    assert!(!artifact_event(&boundary));
    let mut seen = (false, false);
    for (event, margin) in fixtures::event_fixture() {
        assert_eq!(event, margin > 0.0);
        if event {
            seen.0 = true;
        } else {
            seen.1 = true;
        }
    }
    assert!(seen.0 && seen.1);
}

#[test]
fn rate_fixtures() {
    assert_eq!(rate_over_datasets(&[false; 20]).unwrap(), 0.0);
    assert_eq!(rate_over_datasets(&[true; 20]).unwrap(), 1.0);
    assert_eq!(rate_over_datasets(&[true, false, true, false]).unwrap(), 0.5);
    assert!(rate_over_datasets(&[]).is_err());
}

#[test]
fn percent_reduction_fixtures() {
    let idle = Array2::zeros((2, 5));
    let before = Array2::from_elem((2, 5), 1.0);
    let s = |m: Array2<f64>| fixtures::series(idle.clone(), m);
    assert_eq!(percent_reduction(&s(before.clone()), &s(before.clone())).unwrap(), 0.0);
    assert!((percent_reduction(&s(before.clone()), &s(before.mapv(|v| v / 4.0))).unwrap() - 75.0).abs() < 1e-12);
    let (got, oracle) = fixtures::percent_reduction_fixture();
    assert!((got - oracle).abs() < 1e-12);
    assert!(percent_reduction(&s(Array2::zeros((2, 5))), &s(before)).is_err());
}
