use branchcount::histories::*;
use branchcount::qcore::*;
use nalgebra::DMatrix;
use proptest::prelude::*;

type C64 = Complex<f64>;

fn complex() -> impl Strategy<Value = C64> {
    (-1.0..1.0f64, -1.0..1.0f64).prop_map(|(re, im)| C64::new(re, im))
}

fn state(d: usize) -> impl Strategy<Value = StateVector> {
    prop::collection::vec(complex(), d).prop_map(StateVector::flat)
}

/// Amplitudes `k/8` with small `k`: every product is exact in binary
/// floating point, so association order cannot matter.
fn dyadic_state(d: usize) -> impl Strategy<Value = StateVector> {
    prop::collection::vec((-8..=8i32, -8..=8i32), d).prop_map(|v| {
        StateVector::flat(v.into_iter().map(|(a, b)| C64::new(a as f64 / 8.0, b as f64 / 8.0)).collect())
    })
}

fn hermitian(d: usize) -> impl Strategy<Value = Operator> {
    prop::collection::vec(complex(), d * d).prop_map(move |v| {
        let m = DMatrix::from_vec(d, d, v);
        let h = (&m + m.adjoint()) * C64::new(0.5, 0.0);
        Operator::new(h, vec![d]).unwrap()
    })
}

/// Each basis index goes to one of up to three cells; only occupied cells
/// are kept.
fn family(d: usize) -> impl Strategy<Value = ProjectorFamily> {
    prop::collection::vec(0..3usize, d).prop_map(move |owner| {
        let cells: Vec<(String, Vec<usize>)> = (0..3)
            .map(|c| (format!("c{c}"), (0..d).filter(|&i| owner[i] == c).collect::<Vec<_>>()))
            .filter(|(_, idx)| !idx.is_empty())
            .collect();
        make_projector_family(&[d], &cells).unwrap()
    })
}

fn history_space() -> impl Strategy<Value = (HistorySpace, StateVector, StateVector)> {
    (2..6usize, 1..4usize).prop_flat_map(|(d, n)| {
        (
            hermitian(d),
            prop::collection::vec(family(d), n),
            prop::collection::vec(0.1..2.0f64, n),
            state(d),
            state(d),
        )
            .prop_map(|(h, families, gaps, phi, psi)| {
                let mut t = 0.0;
                let times = gaps
                    .iter()
                    .map(|g| {
                        t += g;
                        t
                    })
                    .collect();
                let hs = HistorySpace::new(times, families, h, 1.0, &Tolerances::default()).unwrap();
                (hs, phi, psi)
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn evolution_preserves_norm((h, phi, t) in (1..=16usize).prop_flat_map(|d| (hermitian(d), state(d), -5.0..5.0f64))) {
        let out = evolve(&phi, &h, t, 1.0).unwrap();
        prop_assert!((out.norm() - phi.norm()).abs() <= 1e-10 * phi.norm().max(1.0));
    }

    #[test]
    fn tensor_is_exactly_associative_on_dyadic_amplitudes(
        u in dyadic_state(2), v in dyadic_state(3), w in dyadic_state(2)
    ) {
        let left = tensor(&tensor(&u, &v), &w);
        let right = tensor(&u, &tensor(&v, &w));
        prop_assert_eq!(left.amplitudes(), right.amplitudes());
        prop_assert_eq!(left.dims(), &[2, 3, 2][..]);
        prop_assert_eq!(right.dims(), &[2, 3, 2][..]);
    }

    #[test]
    fn tensor_is_associative_to_rounding(u in state(2), v in state(3), w in state(2)) {
        let left = tensor(&tensor(&u, &v), &w);
        let right = tensor(&u, &tensor(&v, &w));
        prop_assert!(left.distance(&right).unwrap() <= 1e-14 * left.norm().max(1e-300));
        prop_assert_eq!(left.dims(), right.dims());
    }

    #[test]
    fn families_are_complete_orthogonal_projectors(f in (1..10usize).prop_flat_map(family)) {
        let dev = f.deviation();
        prop_assert!(dev.idempotence <= 1e-12);
        prop_assert!(dev.orthogonality <= 1e-12);
        prop_assert!(dev.completeness <= 1e-12);
    }

    #[test]
    fn chain_operators_are_linear((hs, phi, psi) in history_space(), a in complex(), b in complex()) {
        let mix = phi.scaled(a).add(&psi.scaled(b)).unwrap();
        for label in hs.all_labels() {
            let lhs = chain_apply(&hs, &label, &mix).unwrap();
            let rhs = chain_apply(&hs, &label, &phi).unwrap().scaled(a)
                .add(&chain_apply(&hs, &label, &psi).unwrap().scaled(b)).unwrap();
            prop_assert!(lhs.distance(&rhs).unwrap() <= 1e-10);
        }
    }

    #[test]
    fn projections_never_increase_the_norm((hs, phi, _psi) in history_space()) {
        for label in hs.all_labels() {
            let mut previous = phi.norm();
            for k in 1..=label.len() {
                let prefix = HistoryLabel::new(label.cells()[..k].to_vec());
                let sub = HistorySpace::new(
                    hs.times()[..k].to_vec(),
                    hs.families()[..k].to_vec(),
                    match hs.dynamics() { Dynamics::Hamiltonian { h, .. } => h.clone(), Dynamics::Steps(_) => unreachable!() },
                    1.0,
                    &Tolerances::default(),
                ).unwrap();
                let n = chain_apply(&sub, &prefix, &phi).unwrap().norm();
                prop_assert!(n <= previous + 1e-12);
                previous = n;
            }
        }
    }

    #[test]
    fn branches_sum_to_the_evolved_state((hs, phi, _psi) in history_space()) {
        let bs = enumerate_branches(&hs, &phi, 0.0).unwrap();
        let mut sum = StateVector::zeros(phi.dims());
        for b in bs.entries() {
            sum = sum.add(b.vector.as_ref().unwrap()).unwrap();
        }
        let end = hs.evolve_to_end(&phi).unwrap();
        prop_assert!(sum.distance(&end).unwrap() <= 1e-9);
    }
}

#[test]
fn decoherent_coarse_weights_are_summed_fine_weights() {
    use branchcount::models::{qbm_model, QbmLattice};
    let run = qbm_model(&QbmLattice::default()).unwrap();
    let rep = decoherence_report(&run.branches, EXACT_DECOHERENCE).unwrap();
    assert!(rep.is_decoherent());
    let pairs = (run.branches.len() * (run.branches.len() - 1) / 2) as f64;
    let g = run.position_grouping(1).unwrap();
    let coarse = coarse_grain_history(&run.branches, &g).unwrap();
    let assignment = g.assign(&run.branches).unwrap();
    for (b, idx) in coarse.entries().iter().zip(assignment) {
        let fine: f64 = idx.iter().map(|&i| run.branches.entries()[i].weight).sum();
        assert!((b.weight - fine).abs() <= 10.0 * 1e-12 * pairs);
    }
}
