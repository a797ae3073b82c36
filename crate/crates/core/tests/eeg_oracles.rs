use erase::eeg_sim::{
    append_reference_channels, circular_smoothing_kernel, contaminate, draw_contamination_weights, plan_contamination,
    simulate_eeg, Assignment, ContaminationGroundTruth,
};
use erase::signal::{ChannelKind, MultiChannelRecording};
use ndarray::{Array2, ArrayView1};

fn corr(a: ArrayView1<f64>, b: ArrayView1<f64>) -> f64 {
    let (ma, mb) = (a.mean().unwrap(), b.mean().unwrap());
    let cov: f64 = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let va: f64 = a.iter().map(|x| (x - ma).powi(2)).sum();
    let vb: f64 = b.iter().map(|y| (y - mb).powi(2)).sum();
    cov / (va * vb).sqrt()
}

#[test]
fn default_recording_peaks_at_sixty_microvolts() {
    let eeg = simulate_eeg(32, 300.0, 2000.0, 1).unwrap();
    assert_eq!(eeg.n_channels(), 32);
    assert_eq!(eeg.n_samples(), 600_000);
    assert!(eeg.all_kind(ChannelKind::Eeg));
    let peak = eeg.data().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    assert!((peak - 60.0).abs() < 1e-6);
}

#[test]
fn spatial_correlation_decays_and_wraps() {
    let mut near_wins = 0;
    let mut total = 0;
    let mut wrap_wins = 0;
    for seed in 0..20 {
        let eeg = simulate_eeg(32, 10.0, 1000.0, seed).unwrap();
        for i in 0..32 {
            let near = corr(eeg.channel(i), eeg.channel((i + 1) % 32));
            let far = corr(eeg.channel(i), eeg.channel((i + 8) % 32));
            total += 1;
            if near > far {
                near_wins += 1;
            }
        }
        if corr(eeg.channel(0), eeg.channel(31)) > corr(eeg.channel(0), eeg.channel(15)) {
            wrap_wins += 1;
        }
    }
    assert!(near_wins as f64 >= 0.9 * total as f64);
    assert_eq!(wrap_wins, 20);
}

#[test]
fn seeds_give_distinct_recordings() {
    let a = simulate_eeg(8, 2.0, 1000.0, 1).unwrap();
    assert_eq!(a, simulate_eeg(8, 2.0, 1000.0, 1).unwrap());
    assert_ne!(a.data(), simulate_eeg(8, 2.0, 1000.0, 2).unwrap().data());
    assert!(simulate_eeg(7, 2.0, 1000.0, 1).is_err());
    assert!(simulate_eeg(8, 2.0, 300.0, 1).is_err());
}

#[test]
fn kernel_is_circular_and_stochastic() {
    let k = circular_smoothing_kernel(32, 4.0);
    assert_eq!(k.dim(), (32, 32));
    for i in 0..32 {
        assert!((k.row(i).sum() - 1.0).abs() < 1e-12);
        for j in 0..32 {
            assert!((k[[i, j]] - k[[(i + 5) % 32, (j + 5) % 32]]).abs() < 1e-15);
        }
    }
}

#[test]
fn weights_are_l1_normalized() {
    for seed in 0..50 {
        let w = draw_contamination_weights(6, seed).unwrap();
        assert!((w.iter().map(|v| v.abs()).sum::<f64>() - 1.0).abs() < 1e-12);
    }
    for seed in 0..20 {
        let w = draw_contamination_weights(1, seed).unwrap();
        assert!(w[0] == 1.0 || w[0] == -1.0);
    }
    assert!(draw_contamination_weights(0, 1).is_err());
    // Mean of single weights drawn from n = 4 normalized vectors.
    let draws: Vec<f64> = (0..10_000).map(|s| draw_contamination_weights(4, s).unwrap()[0]).collect();
    let n = draws.len() as f64;
    let mean = draws.iter().sum::<f64>() / n;
    let sd = (draws.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    assert!(mean.abs() < 3.0 * sd / n.sqrt(), "{mean}");
}

fn emg_pair(n: usize) -> MultiChannelRecording {
    let data = Array2::from_shape_fn((2, n), |(c, t)| ((t as f64) * (0.1 + c as f64)).sin() * 10.0);
    MultiChannelRecording::with_kind(vec!["frontalis_l".into(), "masseter_l".into()], ChannelKind::EmgRef, 1000.0, data)
        .unwrap()
}

#[test]
fn contamination_residual_is_weighted_emg() {
    let eeg = simulate_eeg(32, 2.0, 1000.0, 3).unwrap();
    let emg = emg_pair(eeg.n_samples());
    let plan = plan_contamination(&["frontalis_l", "masseter_l"], 6, 32, 11).unwrap();
    let out = contaminate(&eeg, &emg, &plan).unwrap();
    let dirty = plan.contaminated_channels();
    for ch in 0..32 {
        let diff = &out.channel(ch) - &eeg.channel(ch);
        match plan.assignment_of(ch) {
            None => {
                assert!(!dirty.contains(&ch));
                assert_eq!(out.channel(ch), eeg.channel(ch));
            }
            Some(a) => {
                let asg = &plan.assignments[a];
                let w = asg.weights[asg.channels.iter().position(|&c| c == ch).unwrap()];
                let src = emg.channel(emg.index_of(&asg.emg_type).unwrap());
                for (d, s) in diff.iter().zip(src) {
                    assert!((d - w * s).abs() < 1e-12);
                }
            }
        }
    }

    assert_eq!(contaminate(&eeg, &emg, &ContaminationGroundTruth::default()).unwrap(), eeg);
    let zero = ContaminationGroundTruth {
        assignments: vec![Assignment {
            emg_type: "frontalis_l".into(),
            channels: vec![4],
            weights: vec![0.0],
        }],
        rng_seed: 0,
    };
    assert_eq!(contaminate(&eeg, &emg, &zero).unwrap().channel(4), eeg.channel(4));
    let collide = ContaminationGroundTruth {
        assignments: vec![
            Assignment {
                emg_type: "frontalis_l".into(),
                channels: vec![4],
                weights: vec![1.0],
            },
            Assignment {
                emg_type: "masseter_l".into(),
                channels: vec![4],
                weights: vec![1.0],
            },
        ],
        rng_seed: 0,
    };
    assert!(contaminate(&eeg, &emg, &collide).is_err());
    assert!(contaminate(&eeg, &emg_pair(10), &plan).is_err());
}

#[test]
fn plans_are_disjoint_and_sized() {
    let plan = plan_contamination(&["a", "b", "c", "d", "e"], 6, 32, 2).unwrap();
    let mut all = plan.contaminated_channels();
    assert_eq!(all.len(), 30);
    all.sort_unstable();
    all.dedup();
    assert_eq!(all.len(), 30);
    assert!(plan_contamination(&["a", "b", "c", "d", "e", "f"], 6, 32, 2).is_err());
}

#[test]
fn references_append_after_eeg() {
    let eeg = simulate_eeg(32, 2.0, 1000.0, 4).unwrap();
    let data = Array2::from_shape_fn((4, eeg.n_samples()), |(c, t)| (c * t) as f64);
    let refs = MultiChannelRecording::with_kind(
        (0..4).map(|i| format!("ref{i}")).collect(),
        ChannelKind::EmgRef,
        1000.0,
        data,
    )
    .unwrap();
    let both = append_reference_channels(&eeg, &refs).unwrap();
    assert_eq!(both.n_channels(), 36);
    assert_eq!(both.count_kind(ChannelKind::Eeg), 32);
    assert!(both.kinds()[..32].iter().all(|k| *k == ChannelKind::Eeg));
    assert!(both.kinds()[32..].iter().all(|k| *k == ChannelKind::EmgRef));
    assert_eq!(both.select_channels(0..32).unwrap(), eeg);
    assert_eq!(both.select_channels(32..36).unwrap().data(), refs.data());

    let none = MultiChannelRecording::with_kind(vec![], ChannelKind::EmgRef, 1000.0, Array2::zeros((0, eeg.n_samples())))
        .unwrap();
    assert_eq!(append_reference_channels(&eeg, &none).unwrap(), eeg);

    let clash = MultiChannelRecording::with_kind(
        vec![eeg.labels()[0].clone()],
        ChannelKind::EmgRef,
        1000.0,
        Array2::zeros((1, eeg.n_samples())),
    )
    .unwrap();
    assert!(append_reference_channels(&eeg, &clash).is_err());
    let wrong_kind = MultiChannelRecording::with_kind(
        vec!["x".into()],
        ChannelKind::Eeg,
        1000.0,
        Array2::zeros((1, eeg.n_samples())),
    )
    .unwrap();
    assert!(append_reference_channels(&eeg, &wrong_kind).is_err());
}
