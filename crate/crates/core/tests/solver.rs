mod common;

use common::*;
use shadowpca::groundstate::{entanglement_entropy, ground_state, PinningPolicy, SolverMethod, SolverOptions};
use shadowpca::lattice::{Boundary, Lattice};
use shadowpca::model::ModelTerms;

fn lanczos() -> SolverOptions {
    SolverOptions { dense_max_sites: 0, pinning_policy: PinningPolicy::Cat, ..Default::default() }
}

fn five_models() -> Vec<ModelTerms> {
    let chain = |n| Lattice::chain(n, Boundary::Open).unwrap();
    vec![
        ModelTerms::tfim_1d(&chain(8), 0.9).unwrap(),
        ModelTerms::cluster_ising(&chain(8), 1.0, 1.5, 1.5).unwrap(),
        ModelTerms::xxz_alternating(&chain(8), 0.3, 1.0).unwrap(),
        ModelTerms::tfim_2d(&Lattice::square(2, 4, Boundary::Open).unwrap(), 2.5).unwrap(),
        ModelTerms::kitaev(&Lattice::honeycomb(2, 2, Boundary::Periodic).unwrap(), 0.3, 0.3, 0.4).unwrap(),
    ]
}

#[test]
fn lanczos_ground_energy_matches_kronecker_reference() {
    for m in five_models() {
        let reference = hermitian_spectrum(&dense_hamiltonian(m.n_sites, &m.terms))[0];
        let g = ground_state(&m, &lanczos()).unwrap();
        assert_eq!(g.method, SolverMethod::Lanczos);
        assert!((g.energy - reference).abs() < 1e-10, "{}: {} vs {reference}", m.label, g.energy);
        assert!(g.residual_norm <= 1e-10);
    }
}

#[test]
fn gap_estimate_matches_reference() {
    for m in five_models() {
        let ev = hermitian_spectrum(&dense_hamiltonian(m.n_sites, &m.terms));
        let g = ground_state(&m, &lanczos()).unwrap();
        assert!((g.gap_estimate - (ev[1] - ev[0])).abs() < 1e-8, "{}", m.label);
    }
}

#[test]
fn returned_state_is_an_eigenvector() {
    let m = ModelTerms::xxz_alternating(&Lattice::chain(10, Boundary::Open).unwrap(), -0.4, 0.6).unwrap();
    for opts in [SolverOptions::default(), lanczos()] {
        let g = ground_state(&m, &opts).unwrap();
        let hv = m.apply(&g.state).unwrap();
        let r: f64 = hv
            .iter()
            .zip(g.state.amplitudes())
            .map(|(a, b)| (a - b * g.energy).norm_sqr())
            .sum::<f64>()
            .sqrt();
        assert!(r < 1e-9, "{r}");
    }
}

#[test]
fn tiny_pinning_leaves_energy_unchanged() {
    let cases = [
        ModelTerms::tfim_1d(&Lattice::chain(8, Boundary::Open).unwrap(), 0.3).unwrap(),
        ModelTerms::cluster_ising(&Lattice::chain(8, Boundary::Open).unwrap(), 0.5, 2.0, 1.0).unwrap(),
        ModelTerms::xxz_alternating(&Lattice::chain(8, Boundary::Open).unwrap(), 0.1, 2.0).unwrap(),
    ];
    for m in cases {
        let free = ground_state(&m, &SolverOptions { pinning_policy: PinningPolicy::Cat, ..Default::default() }).unwrap();
        let pinned = ground_state(
            &m,
            &SolverOptions { pinning_policy: PinningPolicy::Always, pinning_strength: 1e-6, ..Default::default() },
        )
        .unwrap();
        assert!(pinned.pinning_applied);
        assert!((free.energy - pinned.energy).abs() <= 1e-4, "{}", m.label);
    }
}

#[test]
fn pinning_selects_a_broken_state() {
    let m = ModelTerms::tfim_1d(&Lattice::chain(10, Boundary::Open).unwrap(), 0.4).unwrap();
    let cat = ground_state(&m, &SolverOptions { pinning_policy: PinningPolicy::Cat, ..Default::default() }).unwrap();
    let auto = ground_state(&m, &SolverOptions::default()).unwrap();
    assert!(auto.degenerate && auto.pinning_applied && !cat.pinning_applied);
    let mz = |psi: &[num_complex::Complex64]| -> f64 {
        (0..10)
            .map(|i| expectation(10, psi, &shadowpca::PauliString::single(i, shadowpca::Axis::Z)))
            .sum::<f64>()
            / 10.0
    };
    assert!(mz(cat.state.amplitudes()).abs() < 1e-6);
    assert!(mz(auto.state.amplitudes()) > 0.9);
}

#[test]
fn entropy_matches_singular_values() {
    for h in [0.5, 1.0, 2.0] {
        let m = ModelTerms::tfim_1d(&Lattice::chain(8, Boundary::Open).unwrap(), h).unwrap();
        let g = ground_state(&m, &SolverOptions::default()).unwrap();
        for cut in 1..8 {
            let a = entanglement_entropy(&g.state, cut).unwrap();
            let b = entropy_by_svd(8, g.state.amplitudes(), cut);
            assert!((a - b).abs() < 1e-10, "h={h} cut={cut}");
        }
    }
}

#[test]
fn dense_and_lanczos_paths_agree_on_states() {
    let m = ModelTerms::cluster_ising(&Lattice::chain(9, Boundary::Open).unwrap(), 2.5, 1.0, 0.5).unwrap();
    let a = ground_state(&m, &SolverOptions::default()).unwrap();
    let b = ground_state(&m, &lanczos()).unwrap();
    let overlap: num_complex::Complex64 =
        a.state.amplitudes().iter().zip(b.state.amplitudes()).map(|(x, y)| x.conj() * y).sum();
    assert!((overlap.norm() - 1.0).abs() < 1e-9);
}
