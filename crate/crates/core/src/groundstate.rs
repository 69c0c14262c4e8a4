//! Ground states by exact diagonalization.
//!
//! Small systems go through a dense Hermitian eigensolver; larger ones
//! through restarted Lanczos with full reorthogonalization. The first
//! excited level is found by a second Lanczos run deflated against the
//! ground vector, which also resolves exactly degenerate ground spaces.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::model::{ModelTerms, PauliOperator};
pub use crate::state::StateVector;
use crate::state::{dot, norm, C64, DEFAULT_SITE_CAP};

/// What to do when the two lowest levels are (nearly) degenerate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PinningPolicy {
    /// Re-solve with the model's pinning strings when degeneracy is detected.
    #[default]
    Auto,
    /// Never pin; degenerate ground spaces yield whatever the solver finds.
    Cat,
    /// Always solve with the pinning strings added.
    Always,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverMethod {
    Dense,
    Lanczos,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverOptions {
    /// Residual tolerance `||H v - E v||`.
    pub tol: f64,
    /// Maximum number of Lanczos steps per eigenpair, summed over restarts.
    pub max_iter: usize,
    /// Krylov basis size before a restart.
    pub krylov_dim: usize,
    pub seed: u64,
    pub pinning_policy: PinningPolicy,
    /// Scale applied to the model's unit pinning strings.
    ///
    /// Finite-size splittings of ordered doublets at 12 to 16 sites are of
    /// order 1e-4, so the field has to beat that to select a broken state.
    pub pinning_strength: f64,
    /// Levels closer than `degeneracy_threshold * max(1, |E0|)` count as
    /// (quasi-)degenerate. Kept well above the pinning energy so switching
    /// pinning on near the threshold barely moves the state.
    pub degeneracy_threshold: f64,
    /// Use the dense solver up to this many sites.
    pub dense_max_sites: usize,
    /// Refuse larger systems.
    pub site_cap: usize,
    #[serde(skip)]
    pub exec: Exec,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tol: 1e-10,
            max_iter: 500,
            krylov_dim: 100,
            seed: 0x5eed,
            pinning_policy: PinningPolicy::Auto,
            pinning_strength: 1e-3,
            degeneracy_threshold: 1e-2,
            dense_max_sites: 10,
            site_cap: DEFAULT_SITE_CAP,
            exec: Exec::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct GroundStateReport {
    pub energy: f64,
    pub state: StateVector,
    pub residual_norm: f64,
    pub degenerate: bool,
    /// `E1 - E0` of the unpinned Hamiltonian.
    pub gap_estimate: f64,
    pub pinning_applied: bool,
    pub method: SolverMethod,
    /// Lanczos steps spent (0 for the dense path).
    pub iterations: usize,
}

/// Lowest two levels of one operator.
struct LowPair {
    e0: f64,
    v0: Vec<C64>,
    e1: f64,
    residual: f64,
    iterations: usize,
}

pub fn ground_state(model: &ModelTerms, opts: &SolverOptions) -> Result<GroundStateReport> {
    let n = model.n_sites;
    if n > opts.site_cap {
        return Err(Error::SizeCap { n_sites: n, cap: opts.site_cap });
    }
    if !(opts.tol > 0.0) {
        return Err(Error::Config(format!("solver tolerance must be positive, got {}", opts.tol)));
    }
    let method = if n <= opts.dense_max_sites { SolverMethod::Dense } else { SolverMethod::Lanczos };
    let needs_pinning = |policy_wants: bool| -> Result<bool> {
        if !policy_wants {
            return Ok(false);
        }
        if model.pinning.is_empty() {
            return Err(Error::Config(format!(
                "{} has a degenerate ground space but no pinning terms; use the cat policy",
                model.label
            )));
        }
        Ok(true)
    };

    let bare = model.operator();
    let low = lowest_pair(&bare, method, opts)?;
    let gap = low.e1 - low.e0;
    let degenerate = gap < opts.degeneracy_threshold * low.e0.abs().max(1.0);

    let pin = match opts.pinning_policy {
        PinningPolicy::Cat => false,
        PinningPolicy::Auto => needs_pinning(degenerate)?,
        PinningPolicy::Always => needs_pinning(true)?,
    };

    let (final_pair, pinned) = if pin {
        let op = model.pinned_operator(opts.pinning_strength);
        (lowest_pair(&op, method, opts)?, true)
    } else {
        (low, false)
    };
    let iterations = final_pair.iterations;
    Ok(GroundStateReport {
        energy: final_pair.e0,
        state: StateVector::new(n, final_pair.v0)?,
        residual_norm: final_pair.residual,
        degenerate,
        gap_estimate: gap,
        pinning_applied: pinned,
        method,
        iterations: if method == SolverMethod::Dense { 0 } else { iterations },
    })
}

fn lowest_pair(op: &PauliOperator, method: SolverMethod, opts: &SolverOptions) -> Result<LowPair> {
    match method {
        SolverMethod::Dense => dense_lowest(op, opts.exec),
        SolverMethod::Lanczos => {
            let start = StateVector::random(op.n_sites(), opts.seed).into_amplitudes();
            let g = lanczos_lowest(op, start, &[], opts)?;
            let start1 = StateVector::random(op.n_sites(), opts.seed ^ 0x9e37_79b9_7f4a_7c15)
                .into_amplitudes();
            let e = lanczos_lowest(op, start1, std::slice::from_ref(&g.vector), opts)?;
            Ok(LowPair {
                e0: g.value,
                v0: g.vector,
                e1: e.value,
                residual: g.residual,
                iterations: g.iterations + e.iterations,
            })
        }
    }
}

/// Full spectrum of the dense matrix, ascending.
pub fn dense_spectrum(op: &PauliOperator) -> Vec<f64> {
    let mut ev: Vec<f64> = if op.is_real() {
        SymmetricEigen::new(op.to_dense_real()).eigenvalues.iter().copied().collect()
    } else {
        SymmetricEigen::new(op.to_dense()).eigenvalues.iter().copied().collect()
    };
    ev.sort_by(|a, b| a.total_cmp(b));
    ev
}

fn dense_lowest(op: &PauliOperator, exec: Exec) -> Result<LowPair> {
    let (values, vectors): (Vec<f64>, DMatrix<C64>) = if op.is_real() {
        let eig = SymmetricEigen::new(op.to_dense_real());
        (eig.eigenvalues.iter().copied().collect(), eig.eigenvectors.map(|x| C64::new(x, 0.0)))
    } else {
        let eig = SymmetricEigen::new(op.to_dense());
        (eig.eigenvalues.iter().copied().collect(), eig.eigenvectors)
    };
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let e0 = values[order[0]];
    let e1 = order.get(1).map_or(f64::INFINITY, |&k| values[k]);
    let v0: Vec<C64> = vectors.column(order[0]).iter().copied().collect();
    let residual = residual(op, &v0, e0, &[], exec)?;
    Ok(LowPair { e0, v0, e1, residual, iterations: 0 })
}

fn residual(op: &PauliOperator, v: &[C64], e: f64, deflate: &[Vec<C64>], exec: Exec) -> Result<f64> {
    let mut hv = op.apply_vec(v, exec)?;
    for (h, x) in hv.iter_mut().zip(v) {
        *h -= x * e;
    }
    project_out(&mut hv, deflate);
    Ok(norm(&hv))
}

/// Result of one Lanczos eigenpair search.
#[derive(Debug, Clone)]
pub struct EigenPair {
    pub value: f64,
    pub vector: Vec<C64>,
    pub residual: f64,
    pub iterations: usize,
}

fn project_out(v: &mut [C64], against: &[Vec<C64>]) {
    for q in against {
        let c = dot(q, v);
        for (x, y) in v.iter_mut().zip(q) {
            *x -= y * c;
        }
    }
}

fn normalize(v: &mut [C64]) -> f64 {
    let n = norm(v);
    if n > 0.0 {
        v.iter_mut().for_each(|x| *x /= n);
    }
    n
}

/// Lowest eigenpair of `op` restricted to the orthogonal complement of
/// `deflate` (orthonormal vectors), by restarted Lanczos with full
/// reorthogonalization.
pub fn lanczos_lowest(
    op: &PauliOperator,
    start: Vec<C64>,
    deflate: &[Vec<C64>],
    opts: &SolverOptions,
) -> Result<EigenPair> {
    let dim = op.dim();
    if start.len() != dim {
        return Err(Error::Dimension { expected: dim, got: start.len() });
    }
    let free = dim.saturating_sub(deflate.len());
    if free == 0 {
        return Err(Error::Config("nothing left after deflation".into()));
    }
    let mut x = start;
    project_out(&mut x, deflate);
    if normalize(&mut x) == 0.0 {
        return Err(Error::ZeroNorm);
    }

    let krylov = opts.krylov_dim.max(2).min(free);
    let mut used = 0usize;
    let mut best = f64::INFINITY;
    let mut w = vec![C64::new(0.0, 0.0); dim];

    loop {
        let mut basis: Vec<Vec<C64>> = vec![x.clone()];
        let mut alpha: Vec<f64> = Vec::new();
        let mut beta: Vec<f64> = Vec::new();
        let mut ritz: Option<(f64, Vec<f64>)> = None;

        for k in 0..krylov {
            op.apply_into(&basis[k], &mut w, opts.exec)?;
            used += 1;
            let a = dot(&basis[k], &w).re;
            alpha.push(a);
            // Two passes of classical Gram-Schmidt against the whole basis.
            for _ in 0..2 {
                project_out(&mut w, deflate);
                project_out(&mut w, &basis);
            }
            let b = norm(&w);

            let (theta, s) = tridiagonal_lowest(&alpha, &beta);
            let estimate = b * s.last().copied().unwrap_or(0.0).abs();
            ritz = Some((theta, s));
            let exhausted = b < 1e-14 || k + 1 == krylov || used >= opts.max_iter;
            if estimate < 0.1 * opts.tol || exhausted {
                break;
            }
            beta.push(b);
            let next: Vec<C64> = w.iter().map(|z| z / b).collect();
            basis.push(next);
        }

        let (_, s) = ritz.expect("at least one Lanczos step");
        let mut y = vec![C64::new(0.0, 0.0); dim];
        for (coef, q) in s.iter().zip(&basis) {
            for (yi, qi) in y.iter_mut().zip(q) {
                *yi += qi * *coef;
            }
        }
        project_out(&mut y, deflate);
        normalize(&mut y);
        let value = op.expectation(&y, opts.exec)?.re;
        let r = residual(op, &y, value, deflate, opts.exec)?;
        best = best.min(r);
        if r <= opts.tol {
            return Ok(EigenPair { value, vector: y, residual: r, iterations: used });
        }
        if used >= opts.max_iter {
            return Err(Error::Convergence { iterations: used, residual: best });
        }
        x = y;
    }
}

fn tridiagonal_lowest(alpha: &[f64], beta: &[f64]) -> (f64, Vec<f64>) {
    let m = alpha.len();
    let mut t = DMatrix::<f64>::zeros(m, m);
    for i in 0..m {
        t[(i, i)] = alpha[i];
        if i + 1 < m {
            t[(i, i + 1)] = beta[i];
            t[(i + 1, i)] = beta[i];
        }
    }
    let eig = SymmetricEigen::new(t.clone());
    let (k, &theta) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("nonempty tridiagonal");
    let mut s = eig.eigenvectors.column(k).into_owned();
    // The QR sweep zeroes couplings far below machine precision relative to
    // the diagonal, which freezes restarts once the residual gets small.
    // Inverse iteration with a shift just below theta recovers them.
    let shift = theta - 1e-10 * theta.abs().max(1.0);
    let mut shifted = t;
    for i in 0..m {
        shifted[(i, i)] -= shift;
    }
    if let Some(lu) = Some(shifted.lu()).filter(|lu| lu.is_invertible()) {
        for _ in 0..2 {
            match lu.solve(&s) {
                Some(x) if x.norm().is_finite() && x.norm() > 0.0 => s = &x / x.norm(),
                _ => break,
            }
        }
    }
    (theta, s.iter().copied().collect())
}

/// Von Neumann entropy (nats) of the first `cut` sites.
pub fn entanglement_entropy(state: &StateVector, cut: usize) -> Result<f64> {
    let n = state.n_sites();
    if cut == 0 || cut >= n {
        return Err(Error::Config(format!("cut {cut} must lie strictly between 0 and {n}")));
    }
    let rows = 1usize << cut;
    let cols = 1usize << (n - cut);
    // Row index = low bits (sites 0..cut), column index = high bits.
    let m = DMatrix::from_fn(rows, cols, |a, b| state.amplitudes()[a + b * rows]);
    let rho = if rows <= cols { &m * m.adjoint() } else { m.adjoint() * &m };
    let probs = SymmetricEigen::new(rho).eigenvalues;
    Ok(probs
        .iter()
        .filter(|&&p| p > 1e-14)
        .map(|&p| -p * p.ln())
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{Boundary, Lattice};

    fn chain(n: usize) -> Lattice {
        Lattice::chain(n, Boundary::Open).unwrap()
    }

    #[test]
    fn two_site_tfim_energy() {
        let m = ModelTerms::tfim_1d(&chain(2), 1.0).unwrap();
        let r = ground_state(&m, &SolverOptions::default()).unwrap();
        assert!((r.energy + 5f64.sqrt()).abs() < 1e-12);
        assert!(!r.degenerate);
        assert!(r.residual_norm < 1e-10);
    }

    #[test]
    fn heisenberg_singlet() {
        let m = ModelTerms::xxz_alternating(&chain(2), 0.0, 1.0).unwrap();
        let r = ground_state(&m, &SolverOptions::default()).unwrap();
        assert!((r.energy + 3.0).abs() < 1e-12);
        assert!(!r.degenerate);
        assert!((r.gap_estimate - 4.0).abs() < 1e-10);
    }

    #[test]
    fn ferromagnetic_doublet_is_flagged() {
        let m = ModelTerms::tfim_1d(&chain(8), 0.1).unwrap();
        let r = ground_state(&m, &SolverOptions { pinning_policy: PinningPolicy::Cat, ..Default::default() })
            .unwrap();
        assert!(r.degenerate);
        assert!(r.gap_estimate < 1e-6);
        assert!(!r.pinning_applied);
        let p = ground_state(&m, &SolverOptions::default()).unwrap();
        assert!(p.pinning_applied);
    }

    #[test]
    fn lanczos_matches_dense() {
        let m = ModelTerms::tfim_1d(&chain(9), 0.9).unwrap();
        let dense = ground_state(&m, &SolverOptions::default()).unwrap();
        let lanczos =
            ground_state(&m, &SolverOptions { dense_max_sites: 0, ..Default::default() }).unwrap();
        assert_eq!(lanczos.method, SolverMethod::Lanczos);
        assert!((dense.energy - lanczos.energy).abs() < 1e-10);
        assert!((dense.gap_estimate - lanczos.gap_estimate).abs() < 1e-8);
        assert!(lanczos.residual_norm <= 1e-10);
    }

    #[test]
    fn deflation_finds_exact_degeneracy() {
        // -zz on two sites: |uu> and |dd> are exactly degenerate.
        let m = ModelTerms::tfim_1d(&chain(2), 0.0).unwrap();
        let op = m.operator();
        let opts = SolverOptions::default();
        let g = lanczos_lowest(&op, StateVector::random(2, 1).into_amplitudes(), &[], &opts).unwrap();
        let e = lanczos_lowest(&op, StateVector::random(2, 2).into_amplitudes(), &[g.vector.clone()], &opts)
            .unwrap();
        assert!((g.value + 1.0).abs() < 1e-12);
        assert!((e.value + 1.0).abs() < 1e-12);
    }

    #[test]
    fn missing_pinning_is_a_config_error() {
        let hc = Lattice::honeycomb(1, 1, Boundary::Open).unwrap();
        let m = ModelTerms::kitaev(&hc, 0.0, 0.0, 1.0).unwrap();
        let err = ground_state(&m, &SolverOptions::default()).unwrap_err();
        assert!(matches!(err, Error::Config(_)));
        let r = ground_state(&m, &SolverOptions { pinning_policy: PinningPolicy::Cat, ..Default::default() })
            .unwrap();
        assert!((r.energy + 1.0).abs() < 1e-12);
    }

    #[test]
    fn size_cap_enforced() {
        let m = ModelTerms::tfim_1d(&chain(21), 1.0).unwrap();
        assert!(matches!(
            ground_state(&m, &SolverOptions::default()),
            Err(Error::SizeCap { n_sites: 21, cap: 20 })
        ));
    }

    #[test]
    fn non_convergence_reports_residual() {
        let m = ModelTerms::tfim_1d(&chain(12), 1.0).unwrap();
        let opts = SolverOptions { dense_max_sites: 0, max_iter: 5, krylov_dim: 3, ..Default::default() };
        match ground_state(&m, &opts) {
            Err(Error::Convergence { iterations, residual }) => {
                assert!(iterations >= 5);
                assert!(residual > 1e-10);
            }
            other => panic!("expected convergence error, got {other:?}"),
        }
    }

    #[test]
    fn entropy_simple_states() {
        let up = StateVector::basis(4, 0);
        assert!(entanglement_entropy(&up, 2).unwrap().abs() < 1e-12);
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let bell = StateVector::new(2, vec![C64::new(r, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(r, 0.0)])
            .unwrap();
        assert!((entanglement_entropy(&bell, 1).unwrap() - 2f64.ln()).abs() < 1e-12);
        assert!(entanglement_entropy(&bell, 0).is_err());
        assert!(entanglement_entropy(&bell, 2).is_err());
    }

    fn reversed(s: &StateVector) -> StateVector {
        let n = s.n_sites();
        let amps = (0..s.dim())
            .map(|b| {
                let r = (0..n).fold(0usize, |acc, i| acc | (((b >> i) & 1) << (n - 1 - i)));
                s.amplitudes()[r]
            })
            .collect();
        StateVector::new(n, amps).unwrap()
    }

    #[test]
    fn entropy_symmetric_under_cut_reflection() {
        // S(first cut sites) = S(last n - cut sites) for a pure state.
        let s = StateVector::random(7, 3);
        let r = reversed(&s);
        for cut in 1..7 {
            let a = entanglement_entropy(&s, cut).unwrap();
            let b = entanglement_entropy(&r, 7 - cut).unwrap();
            assert!((a - b).abs() < 1e-10, "cut {cut}: {a} vs {b}");
        }
    }
}
