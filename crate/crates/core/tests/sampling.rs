mod common;

use std::collections::HashMap;

use common::*;
use shadowpca::exec::Exec;
use shadowpca::groundstate::{ground_state, PinningPolicy, SolverOptions};
use shadowpca::lattice::{Boundary, Lattice};
use shadowpca::model::{Axis, ModelTerms, PauliString};
use shadowpca::oracle::{analytic_covariance, expectations, OracleMode};
use shadowpca::shadow::{estimate_observable, reconstruct_shadow, sample_batch};
use shadowpca::spectra::covariance;
use shadowpca::StateVector;

fn small_ground_states() -> Vec<(String, StateVector)> {
    let chain = |n| Lattice::chain(n, Boundary::Open).unwrap();
    let cat = SolverOptions { pinning_policy: PinningPolicy::Cat, ..Default::default() };
    [
        ModelTerms::tfim_1d(&chain(4), 1.0).unwrap(),
        ModelTerms::cluster_ising(&chain(4), 1.0, 1.0, 2.0).unwrap(),
        ModelTerms::xxz_alternating(&chain(4), 0.5, 1.0).unwrap(),
        ModelTerms::tfim_2d(&Lattice::square(2, 2, Boundary::Open).unwrap(), 3.0).unwrap(),
        ModelTerms::kitaev(&Lattice::honeycomb(1, 2, Boundary::Open).unwrap(), 0.2, 0.3, 0.5).unwrap(),
    ]
    .into_iter()
    .map(|m| (m.label.to_string(), ground_state(&m, &cat).unwrap().state))
    .chain((0..3).map(|s| (format!("random {s}"), StateVector::random(3, 40 + s))))
    .collect()
}

#[test]
fn exact_oracle_equals_channel_enumeration() {
    for (name, psi) in small_ground_states() {
        let n = psi.n_sites();
        let reference = channel_covariance(n, psi.amplitudes());
        let ours = analytic_covariance(&expectations(&psi, Exec::Sequential).unwrap(), OracleMode::Exact);
        let err = (ours.matrix() - &reference).amax();
        assert!(err < 1e-12, "{name}: {err}");
    }
}

#[test]
fn paper_mode_differs_only_on_site_blocks() {
    for (name, psi) in small_ground_states() {
        let n = psi.n_sites();
        let reference = channel_covariance(n, psi.amplitudes());
        let t = expectations(&psi, Exec::Sequential).unwrap();
        let paper = analytic_covariance(&t, OracleMode::Paper);
        for a in 0..3 * n {
            for b in 0..3 * n {
                let (i, j) = (a / 3, b / 3);
                if i != j {
                    assert!((paper.matrix()[(a, b)] - reference[(a, b)]).abs() < 1e-12, "{name}");
                } else if a == b {
                    let m = t.one(i, Axis::from_index(a % 3));
                    assert!((paper.matrix()[(a, a)] - (1.0 - m * m) / 3.0).abs() < 1e-12);
                } else {
                    assert_eq!(paper.matrix()[(a, b)], 0.0);
                }
            }
        }
    }
}

#[test]
fn sampler_reproduces_joint_distribution() {
    let psi = StateVector::random(2, 5);
    let exact = joint_distribution(2, psi.amplitudes());
    let n = 60_000;
    let data = sample_batch(&psi, n, 17, "random", Exec::Parallel).unwrap();
    let mut counts: HashMap<(String, String), usize> = HashMap::new();
    for c in &data.configurations {
        *counts.entry((c.axes_string(), c.signs_string())).or_default() += 1;
    }
    let mut chi2 = 0.0;
    for o in &exact {
        let axes: String = o.axes.iter().map(|a| a.as_char()).collect();
        let signs: String = o.signs.iter().map(|&s| if s > 0 { '+' } else { '-' }).collect();
        let seen = *counts.get(&(axes, signs)).unwrap_or(&0) as f64;
        let expected = o.prob * n as f64;
        if expected > 0.0 {
            chi2 += (seen - expected).powi(2) / expected;
        }
    }
    // 36 cells, 35 degrees of freedom; 70 is far beyond the 0.999 quantile.
    assert!(chi2 < 70.0, "chi2 = {chi2}");
}

#[test]
fn sampled_covariance_converges_to_enumeration() {
    for (name, psi) in small_ground_states() {
        let reference = channel_covariance(psi.n_sites(), psi.amplitudes());
        let data = sample_batch(&psi, 50_000, 3, &name, Exec::Parallel).unwrap();
        let err = (covariance(&data, Exec::Parallel).unwrap().matrix() - &reference).amax();
        assert!(err < 0.02, "{name}: {err}");
    }
}

#[test]
fn shadow_estimates_match_reconstruction_and_truth() {
    let psi = StateVector::random(3, 21);
    let data = sample_batch(&psi, 20_000, 8, "random", Exec::Parallel).unwrap();
    let rho = reconstruct_shadow(&data).unwrap();
    let observables = [
        PauliString::single(0, Axis::X),
        PauliString::pair(1.0, (0, Axis::Z), (2, Axis::Z)),
        PauliString::new(0.5, &[(0, Axis::Y), (1, Axis::X), (2, Axis::Z)]).unwrap(),
    ];
    for p in &observables {
        let (mean, stderr) = estimate_observable(&data, p).unwrap();
        let via_rho = (dense_string(3, p) * &rho).trace().re;
        assert!((mean - via_rho).abs() < 1e-10);
        let truth = expectation(3, psi.amplitudes(), p);
        assert!((mean - truth).abs() < 5.0 * stderr + 1e-12, "{mean} vs {truth} (stderr {stderr})");
    }
}

#[test]
fn batches_are_reproducible_and_schedule_independent() {
    let psi = StateVector::random(6, 2);
    let a = sample_batch(&psi, 3000, 99, "s", Exec::Sequential).unwrap();
    let b = sample_batch(&psi, 3000, 99, "s", Exec::Parallel).unwrap();
    assert_eq!(a, b);
    let c = sample_batch(&psi, 3000, 100, "s", Exec::Parallel).unwrap();
    assert_ne!(a.configurations, c.configurations);
}
