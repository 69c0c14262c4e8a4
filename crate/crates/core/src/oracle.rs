//! Noise-free covariance of the encoded measurement data, computed directly
//! from ground-state expectation values.
//!
//! For randomized single-site Pauli measurements the encoded vector `x`
//! satisfies `E[x_ia] = <s^a_i>/3`, `E[x_ia x_ib] = delta_ab / 3` and, for
//! `i != j`, `E[x_ia x_jb] = <s^a_i s^b_j> / 9`. Hence
//!
//! * same site: `C_ab = delta_ab / 3 - <s^a><s^b> / 9`
//! * cross site: `C_ab = (<s^a_i s^b_j> - <s^a_i><s^b_j>) / 9`
//!
//! [`OracleMode::Exact`] uses exactly these blocks. [`OracleMode::Paper`]
//! keeps the cross-site blocks and replaces the same-site block by the
//! diagonal approximation `delta_ab (1 - <s^a>^2) / 3`.

use std::io::Write;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::groundstate::{ground_state, GroundStateReport, SolverOptions};
use crate::model::{Axis, ModelTerms};
use crate::spectra::{eigen_spectrum, eigen_spectrum_clamped, CovarianceMatrix, SpectrumResult};
use crate::state::{StateVector, C64, DEFAULT_SITE_CAP};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OracleMode {
    #[default]
    Exact,
    Paper,
}

/// One- and two-point Pauli expectation values of a state.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpectationTables {
    n_sites: usize,
    /// `one_point[i][a] = <s^a_i>`.
    pub one_point: Vec<[f64; 3]>,
    /// Flattened `[L][3][L][3]`; same-site blocks hold `delta_ab`.
    two_point: Vec<f64>,
}

impl ExpectationTables {
    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    fn idx(&self, i: usize, a: usize, j: usize, b: usize) -> usize {
        ((i * 3 + a) * self.n_sites + j) * 3 + b
    }

    /// `<s^a_i s^b_j>` for `i != j`.
    pub fn two(&self, i: usize, a: Axis, j: usize, b: Axis) -> f64 {
        self.two_point[self.idx(i, a.index(), j, b.index())]
    }

    pub fn one(&self, i: usize, a: Axis) -> f64 {
        self.one_point[i][a.index()]
    }

    pub fn bloch_norm_sqr(&self, i: usize) -> f64 {
        self.one_point[i].iter().map(|v| v * v).sum()
    }

    /// CSV with header `kind,i,alpha,j,beta,value`; one-point rows leave
    /// `j` and `beta` empty.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["kind", "i", "alpha", "j", "beta", "value"])?;
        for i in 0..self.n_sites {
            for a in Axis::ALL {
                wr.write_record(["one", &i.to_string(), &a.to_string(), "", "", &self.one(i, a).to_string()])?;
            }
        }
        for i in 0..self.n_sites {
            for a in Axis::ALL {
                for j in 0..self.n_sites {
                    if j == i {
                        continue;
                    }
                    for b in Axis::ALL {
                        wr.write_record([
                            "two",
                            &i.to_string(),
                            &a.to_string(),
                            &j.to_string(),
                            &b.to_string(),
                            &self.two(i, a, j, b).to_string(),
                        ])?;
                    }
                }
            }
        }
        wr.flush()?;
        Ok(())
    }
}

fn pauli(a: usize) -> [[C64; 2]; 2] {
    let (o, l, i) = (C64::new(0.0, 0.0), C64::new(1.0, 0.0), C64::new(0.0, 1.0));
    match a {
        0 => [[o, l], [l, o]],
        1 => [[o, -i], [i, o]],
        _ => [[l, o], [o, -l]],
    }
}

/// Two-site reduced density matrix, index `s_i + 2 s_j`.
fn reduced_pair(psi: &[C64], n: usize, i: usize, j: usize) -> [[C64; 4]; 4] {
    let (bi, bj) = (1usize << i, 1usize << j);
    let mut rho = [[C64::new(0.0, 0.0); 4]; 4];
    let offs = [0, bi, bj, bi | bj];
    for b in 0..1usize << n {
        if b & (bi | bj) != 0 {
            continue;
        }
        let amps = offs.map(|o| psi[b | o]);
        for (k, ak) in amps.iter().enumerate() {
            for (l, al) in amps.iter().enumerate() {
                rho[k][l] += ak * al.conj();
            }
        }
    }
    rho
}

fn reduced_site(psi: &[C64], n: usize, i: usize) -> [[C64; 2]; 2] {
    let bi = 1usize << i;
    let mut rho = [[C64::new(0.0, 0.0); 2]; 2];
    for b in 0..1usize << n {
        if b & bi != 0 {
            continue;
        }
        let amps = [psi[b], psi[b | bi]];
        for k in 0..2 {
            for l in 0..2 {
                rho[k][l] += amps[k] * amps[l].conj();
            }
        }
    }
    rho
}

/// Expectation tables of `state`, parallel over site pairs.
pub fn expectations(state: &StateVector, exec: Exec) -> Result<ExpectationTables> {
    let n = state.n_sites();
    if n > DEFAULT_SITE_CAP {
        return Err(Error::SizeCap { n_sites: n, cap: DEFAULT_SITE_CAP });
    }
    let psi = state.amplitudes();
    let one_point: Vec<[f64; 3]> = exec.map_range(n, |i| {
        let rho = reduced_site(psi, n, i);
        let mut out = [0.0; 3];
        for (a, v) in out.iter_mut().enumerate() {
            let p = pauli(a);
            // Tr(rho P) = sum_kl rho_kl P_lk
            *v = (0..2).flat_map(|k| (0..2).map(move |l| (k, l))).map(|(k, l)| rho[k][l] * p[l][k]).sum::<C64>().re;
        }
        out
    });

    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    let blocks: Vec<[[f64; 3]; 3]> = exec.map_range(pairs.len(), |p| {
        let (i, j) = pairs[p];
        let rho = reduced_pair(psi, n, i, j);
        let mut out = [[0.0; 3]; 3];
        for (a, row) in out.iter_mut().enumerate() {
            let pa = pauli(a);
            for (b, v) in row.iter_mut().enumerate() {
                let pb = pauli(b);
                let mut acc = C64::new(0.0, 0.0);
                for k in 0..4 {
                    for l in 0..4 {
                        // P[l][k] for P = pa (site i, low index bit) x pb (site j)
                        let pl = pa[l & 1][k & 1] * pb[l >> 1][k >> 1];
                        acc += rho[k][l] * pl;
                    }
                }
                *v = acc.re;
            }
        }
        out
    });

    let mut tables = ExpectationTables { n_sites: n, one_point, two_point: vec![0.0; 9 * n * n] };
    for i in 0..n {
        for a in 0..3 {
            let k = tables.idx(i, a, i, a);
            tables.two_point[k] = 1.0;
        }
    }
    for (&(i, j), block) in pairs.iter().zip(&blocks) {
        for a in 0..3 {
            for b in 0..3 {
                let k1 = tables.idx(i, a, j, b);
                let k2 = tables.idx(j, b, i, a);
                tables.two_point[k1] = block[a][b];
                tables.two_point[k2] = block[a][b];
            }
        }
    }
    Ok(tables)
}

/// Covariance of the encoded data in the infinite-shot limit.
pub fn analytic_covariance(tables: &ExpectationTables, mode: OracleMode) -> CovarianceMatrix {
    let n = tables.n_sites;
    let m = DMatrix::from_fn(3 * n, 3 * n, |r, c| {
        let (i, a) = (r / 3, r % 3);
        let (j, b) = (c / 3, c % 3);
        let (ma, mb) = (tables.one_point[i][a], tables.one_point[j][b]);
        if i != j {
            (tables.two_point[tables.idx(i, a, j, b)] - ma * mb) / 9.0
        } else {
            match mode {
                OracleMode::Exact => (if a == b { 1.0 / 3.0 } else { 0.0 }) - ma * mb / 9.0,
                OracleMode::Paper if a == b => (1.0 - ma * ma) / 3.0,
                OracleMode::Paper => 0.0,
            }
        }
    });
    CovarianceMatrix(m)
}

/// Largest elementwise differences between the two modes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeComparison {
    pub max_same_site_deviation: f64,
    pub max_cross_site_deviation: f64,
}

pub fn compare_modes(tables: &ExpectationTables) -> ModeComparison {
    let e = analytic_covariance(tables, OracleMode::Exact);
    let p = analytic_covariance(tables, OracleMode::Paper);
    let mut out = ModeComparison { max_same_site_deviation: 0.0, max_cross_site_deviation: 0.0 };
    for r in 0..e.dim() {
        for c in 0..e.dim() {
            let d = (e.0[(r, c)] - p.0[(r, c)]).abs();
            if r / 3 == c / 3 {
                out.max_same_site_deviation = out.max_same_site_deviation.max(d);
            } else {
                out.max_cross_site_deviation = out.max_cross_site_deviation.max(d);
            }
        }
    }
    out
}

#[derive(Debug, Clone)]
pub struct OracleSpectrum {
    pub spectrum: SpectrumResult,
    pub covariance: CovarianceMatrix,
    pub tables: ExpectationTables,
    pub ground: GroundStateReport,
}

/// Ground state, expectation tables, analytic covariance and its spectrum.
///
/// Paper-mode matrices need not be positive semidefinite; their negative
/// eigenvalues are clamped rather than rejected.
pub fn oracle_spectrum(
    model: &ModelTerms,
    opts: &SolverOptions,
    mode: OracleMode,
    k: usize,
) -> Result<OracleSpectrum> {
    let ground = ground_state(model, opts)?;
    let tables = expectations(&ground.state, opts.exec)?;
    let covariance = analytic_covariance(&tables, mode);
    let spectrum = match mode {
        OracleMode::Exact => eigen_spectrum(&covariance, k)?,
        OracleMode::Paper => eigen_spectrum_clamped(&covariance, k)?,
    };
    Ok(OracleSpectrum { spectrum, covariance, tables, ground })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plus_product(n: usize) -> StateVector {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        StateVector::product(&vec![[C64::new(r, 0.0), C64::new(r, 0.0)]; n]).unwrap()
    }

    #[test]
    fn up_state_bloch_vector() {
        let t = expectations(&StateVector::basis(1, 0), Exec::Sequential).unwrap();
        assert_eq!(t.one_point[0], [0.0, 0.0, 1.0]);
    }

    #[test]
    fn bell_correlations() {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let z = C64::new(0.0, 0.0);
        let bell = StateVector::new(2, vec![C64::new(r, 0.0), z, z, C64::new(r, 0.0)]).unwrap();
        let t = expectations(&bell, Exec::Sequential).unwrap();
        assert!((t.two(0, Axis::Z, 1, Axis::Z) - 1.0).abs() < 1e-12);
        assert!((t.two(0, Axis::X, 1, Axis::X) - 1.0).abs() < 1e-12);
        assert!((t.two(0, Axis::Y, 1, Axis::Y) + 1.0).abs() < 1e-12);
        assert!(t.one_point.iter().flatten().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn plus_state_blocks() {
        let t = expectations(&plus_product(1), Exec::Sequential).unwrap();
        let e = analytic_covariance(&t, OracleMode::Exact);
        let p = analytic_covariance(&t, OracleMode::Paper);
        let want_e = [2.0 / 9.0, 1.0 / 3.0, 1.0 / 3.0];
        let want_p = [0.0, 1.0 / 3.0, 1.0 / 3.0];
        for a in 0..3 {
            for b in 0..3 {
                let (we, wp) = if a == b { (want_e[a], want_p[a]) } else { (0.0, 0.0) };
                assert!((e.0[(a, b)] - we).abs() < 1e-12);
                assert!((p.0[(a, b)] - wp).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn plus_product_exact_spectrum() {
        let l = 4;
        let t = expectations(&plus_product(l), Exec::Parallel).unwrap();
        let s = eigen_spectrum(&analytic_covariance(&t, OracleMode::Exact), 0).unwrap();
        for (k, ev) in s.eigenvalues.iter().enumerate() {
            let want = if k < 2 * l { 1.0 / 3.0 } else { 2.0 / 9.0 };
            assert!((ev - want).abs() < 1e-12);
        }
        assert!((s.lambdas[0] - (1.0f64 / 3.0).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn product_state_has_no_cross_blocks() {
        let t = expectations(&StateVector::basis(3, 0), Exec::Sequential).unwrap();
        for mode in [OracleMode::Exact, OracleMode::Paper] {
            let c = analytic_covariance(&t, mode);
            for r in 0..9 {
                for col in 0..9 {
                    if r / 3 != col / 3 {
                        assert_eq!(c.0[(r, col)], 0.0);
                    }
                }
            }
        }
    }

    #[test]
    fn modes_differ_only_on_site() {
        let s = StateVector::random(5, 4);
        let t = expectations(&s, Exec::Parallel).unwrap();
        let cmp = compare_modes(&t);
        assert!(cmp.max_cross_site_deviation < 1e-12);
        assert!(cmp.max_same_site_deviation > 0.0);
    }

    #[test]
    fn exact_trace_identity_and_psd() {
        let s = StateVector::random(6, 9);
        let t = expectations(&s, Exec::Parallel).unwrap();
        let c = analytic_covariance(&t, OracleMode::Exact);
        let want: f64 = (0..6).map(|i| 1.0 - t.bloch_norm_sqr(i) / 9.0).sum();
        assert!((c.trace() - want).abs() < 1e-12);
        let spec = eigen_spectrum(&c, 0).unwrap();
        assert!(spec.min_raw_eigenvalue >= -1e-12);
        for i in 0..6 {
            assert!(t.bloch_norm_sqr(i) <= 1.0 + 1e-10);
        }
    }

    #[test]
    fn tables_are_symmetric() {
        let s = StateVector::random(4, 2);
        let t = expectations(&s, Exec::Sequential).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                if i == j {
                    continue;
                }
                for a in Axis::ALL {
                    for b in Axis::ALL {
                        assert!((t.two(i, a, j, b) - t.two(j, b, i, a)).abs() < 1e-12);
                        assert!(t.two(i, a, j, b).abs() <= 1.0 + 1e-10);
                    }
                }
            }
        }
    }

    #[test]
    fn tables_csv_shape() {
        let t = expectations(&StateVector::random(2, 1), Exec::Sequential).unwrap();
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("kind,i,alpha,j,beta,value\n"));
        assert_eq!(text.lines().count(), 1 + 6 + 18);
    }
}
