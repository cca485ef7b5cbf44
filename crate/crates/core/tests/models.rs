use branchcount::counting::{count_equi_amplitude, count_naive, Tau};
use branchcount::histories::{coarse_grain_history, decoherence_report, Grouping, EXACT_DECOHERENCE};
use branchcount::models::*;

fn binomial(n: u64, k: u64) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

#[test]
fn single_measurement_splits_into_two_records() {
    let spin = SpinState::real(0.6, 0.8).unwrap();
    let run = everett_protocol(spin, 1).unwrap();
    let bs = &run.branches;
    assert_eq!(bs.len(), 2);
    let labels: Vec<String> = bs.labels().map(|l| l.to_string()).collect();
    assert_eq!(labels, ["up", "down"]);
    assert!((bs.entries()[0].weight - 0.36).abs() < 1e-12);
    assert!((bs.entries()[1].weight - 0.64).abs() < 1e-12);
    assert_eq!(run.records(0), ["↑"]);
    assert_eq!(run.records(1), ["↓"]);
}

#[test]
fn repeated_measurement_repeats_the_record() {
    let spin = SpinState::real(0.6, 0.8).unwrap();
    for m in 2..=3 {
        let run = everett_protocol(spin, m).unwrap();
        assert_eq!(run.branches.len(), 2, "m = {m}");
        assert_eq!(run.records(0), ["↑".repeat(m)]);
        assert_eq!(run.records(1), ["↓".repeat(m)]);
        assert!(run.branches.pruned_weight() < 1e-20);
    }
}

#[test]
fn eigenstate_has_one_branch() {
    let run = everett_protocol(SpinState::up(), 2).unwrap();
    assert_eq!(run.branches.len(), 1);
}

#[test]
fn protocol_branches_are_exactly_decoherent() {
    let run = everett_protocol(SpinState::from_angle(0.4).unwrap(), 3).unwrap();
    let rep = decoherence_report(&run.branches, EXACT_DECOHERENCE).unwrap();
    assert!(rep.max_offdiag_ratio <= 1e-12, "{}", rep.max_offdiag_ratio);
}

#[test]
fn protocol_weights_are_continuous_but_naive_counts_are_not() {
    let grid: Vec<f64> = (0..=10).map(|i| i as f64 * 0.01).collect();
    let mut weights = Vec::new();
    let mut downs = Vec::new();
    for &theta in &grid {
        let run = everett_protocol(SpinState::from_angle(theta).unwrap(), 1).unwrap();
        let g = Grouping::by_cell(&run.branches, 0, &["up", "down"]).unwrap();
        let rep = count_naive(&run.branches, &g, None).unwrap();
        weights.push(rep.row("down").unwrap().weight);
        downs.push(rep.count("down").unwrap());
    }
    for (w, theta) in weights.iter().zip(&grid) {
        assert!((w - theta.sin().powi(2)).abs() < 1e-12);
    }
    assert_eq!(downs[0], 0);
    assert!(downs[1..].iter().all(|&n| n == 1));
}

#[test]
fn fair_trials_split_evenly() {
    let spin = SpinState::real(1.0, 1.0).unwrap();
    let bs = fresh_spin_trials(spin, 2).unwrap();
    for b in bs.entries() {
        assert!((b.weight / bs.initial_norm_sq() - 0.25).abs() < 1e-15);
    }
}

#[test]
fn trial_frequencies_follow_the_binomial_law() {
    let spin = SpinState::real(0.3f64.sqrt(), 0.7f64.sqrt()).unwrap();
    let bs = fresh_spin_trials(spin, 12).unwrap();
    let g = up_count_grouping(&bs).unwrap();
    let rep = count_naive(&bs, &g, None).unwrap();
    let tail: f64 = (2..=5).map(|j| rep.row(&j.to_string()).unwrap().weight).sum();
    let oracle: f64 = (2..=5u64).map(|j| binomial(12, j) * 0.3f64.powi(j as i32) * 0.7f64.powi(12 - j as i32)).sum();
    assert!((tail - oracle).abs() < 1e-12, "{tail} vs {oracle}");
}

#[test]
fn trial_weights_sum_to_the_product_norm() {
    let spin = SpinState::real(0.9, 1.3).unwrap();
    for m in [1, 5, 9, 14] {
        let bs = fresh_spin_trials(spin, m).unwrap();
        let expected = spin.norm_sq().powi(m as i32);
        assert!((bs.total_weight() - expected).abs() < 1e-12 * expected.max(1.0), "m = {m}");
    }
}

#[test]
fn one_trial_is_one_protocol_measurement() {
    let spin = SpinState::real(0.6, 0.8).unwrap();
    let trials = fresh_spin_trials(spin, 1).unwrap();
    let protocol = everett_protocol(spin, 1).unwrap().branches;
    assert_eq!(trials.labels().collect::<Vec<_>>(), protocol.labels().collect::<Vec<_>>());
    for (a, b) in trials.entries().iter().zip(protocol.entries()) {
        assert!((a.weight - b.weight).abs() < 1e-12);
    }
}

#[test]
fn eigenstate_apparatus_records_only_up() {
    let bs = realistic_measurement(SpinState::up(), &RealisticApparatus::uniform(3, 2)).unwrap();
    assert_eq!(bs.len(), 3);
    assert!((bs.total_weight() - 1.0).abs() < 1e-15);
}

#[test]
fn microbranch_gram_matrix_is_diagonal() {
    let bs = realistic_measurement(SpinState::from_angle(0.7).unwrap(), &RealisticApparatus::uniform(4, 3)).unwrap();
    let rep = decoherence_report(&bs, EXACT_DECOHERENCE).unwrap();
    let g = &rep.gram;
    for i in 0..g.nrows() {
        for j in 0..g.ncols() {
            if i != j {
                assert!(g[(i, j)].norm() <= 1e-12);
            }
        }
    }
}

#[test]
fn naive_ratio_ignores_the_amplitudes() {
    let app = RealisticApparatus::uniform(3, 2);
    for i in 1..20 {
        let theta = i as f64 * std::f64::consts::FRAC_PI_2 / 20.0;
        let bs = realistic_measurement(SpinState::from_angle(theta).unwrap(), &app).unwrap();
        let rep = count_naive(&bs, &spin_grouping(&bs).unwrap(), None).unwrap();
        assert_eq!(rep.ratio("up", "down").unwrap().counts, [3, 2]);
        assert_eq!(rep.ratio("up", "down").unwrap().count_ratio, Some(1.5));
    }
    let bs = realistic_measurement(SpinState::from_angle(0.0).unwrap(), &app).unwrap();
    let rep = count_naive(&bs, &spin_grouping(&bs).unwrap(), None).unwrap();
    assert_eq!((rep.count("up"), rep.count("down")), (Some(3), Some(0)));
}

#[test]
fn equi_amplitude_tracks_born_on_many_microbranches() {
    let app = RealisticApparatus::uniform(256, 256);
    let spin = SpinState::from_angle(0.9).unwrap();
    let bs = realistic_measurement(spin, &app).unwrap();
    let total = bs.total_weight();
    let rep = count_equi_amplitude(&bs, &spin_grouping(&bs).unwrap(), Tau::from_sq(total / 1e4).unwrap()).unwrap();
    let p = rep.row("up").unwrap().count_prob.unwrap();
    assert!((p - spin.weight_up() / total).abs() <= 2e-4);
}

#[test]
fn perfect_records_make_position_histories_decohere() {
    let run = qbm_model(&QbmLattice::default()).unwrap();
    let rep = decoherence_report(&run.branches, 1e-10).unwrap();
    assert!(rep.max_offdiag_ratio <= 1e-10, "{}", rep.max_offdiag_ratio);
    assert!(run.branches.len() > 5);
}

#[test]
fn no_records_means_no_decoherence() {
    let cfg = QbmLattice { record_strength: 0.0, ..QbmLattice::default() };
    let run = qbm_model(&cfg).unwrap();
    let rep = decoherence_report(&run.branches, 1e-10).unwrap();
    assert!(!rep.is_decoherent());
    assert!(rep.max_offdiag_ratio > 0.1, "{}", rep.max_offdiag_ratio);
}

#[test]
fn one_step_reaches_every_cell() {
    let cfg = QbmLattice { record_strength: 0.0, steps: 1, ..QbmLattice::default() };
    let run = qbm_model(&cfg).unwrap();
    let rep = count_naive(&run.branches, &run.position_grouping(0).unwrap(), None).unwrap();
    assert_eq!(rep.total_count, cfg.cells as u64);
}

#[test]
fn frozen_particle_has_one_history() {
    let cfg = QbmLattice { hop: 0.0, ..QbmLattice::default() };
    let run = qbm_model(&cfg).unwrap();
    assert_eq!(run.branches.len(), 1);
    let start = format!("x{}", cfg.start());
    assert!(run.branches.entries()[0].label.cells().iter().all(|c| *c == start));
}

#[test]
fn records_leave_position_weights_alone() {
    for s in [1.0, 0.5] {
        let cfg = QbmLattice { record_strength: s, ..QbmLattice::default() };
        let run = qbm_model(&cfg).unwrap();
        let first = count_naive(&run.branches, &run.position_grouping(0).unwrap(), None).unwrap();
        let free = QbmLattice { steps: 1, ..cfg.clone() };
        let born = dephased_position_weights(&free).unwrap();
        for (row, p) in first.rows.iter().zip(&born) {
            assert!((row.weight - p).abs() < 1e-10, "s = {s}");
        }
    }
    // summing branch vectors (not weights) over the earlier sites: with
    // perfect records this is the dephased walk, without records the
    // coherent one
    let cfg = QbmLattice::default();
    let run = qbm_model(&cfg).unwrap();
    let coarse = coarse_grain_history(&run.branches, &run.position_grouping(cfg.steps - 1).unwrap()).unwrap();
    let dephased = dephased_position_weights(&cfg).unwrap();
    for (b, p) in coarse.entries().iter().zip(&dephased) {
        assert!((b.weight - p).abs() < 1e-10);
    }
    let cfg = QbmLattice { record_strength: 0.0, ..QbmLattice::default() };
    let run = qbm_model(&cfg).unwrap();
    let coarse = coarse_grain_history(&run.branches, &run.position_grouping(cfg.steps - 1).unwrap()).unwrap();
    let coherent = run.space.evolve_to_end(&run.initial).unwrap();
    let env_dim = run.initial.dim() / cfg.cells;
    for (x, b) in coarse.entries().iter().enumerate() {
        let p: f64 = (0..env_dim).map(|e| coherent.amplitude(x * env_dim + e).norm_sqr()).sum();
        assert!((b.weight - p).abs() < 1e-10);
    }
}
