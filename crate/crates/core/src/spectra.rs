//! Encoding of shots as `3L`-vectors, streaming covariance and PCA spectra.
//!
//! Site `i` occupies components `3i..3i+3` in `(x, y, z)` order; an outcome
//! `+-a` puts `+-1` on the `a` component and zeros elsewhere.

use std::io::{BufRead, Write};

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::shadow::{ShotDataset, SpinConfiguration};

/// Eigenvalues below `-NEGATIVE_TOL` mean the covariance is corrupted;
/// those in `[-NEGATIVE_TOL, 0]` are clamped to zero.
pub const NEGATIVE_TOL: f64 = 1e-10;

/// Allowed `|C - C^T|` before a matrix is rejected as asymmetric.
pub const SYMMETRY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct EncodedVector {
    pub values: Vec<f64>,
}

pub fn encode(config: &SpinConfiguration) -> EncodedVector {
    let mut values = vec![0.0; 3 * config.n_sites()];
    for (i, o) in config.outcomes.iter().enumerate() {
        values[3 * i + o.axis.index()] = o.sign as f64;
    }
    EncodedVector { values }
}

/// Sufficient statistics `(count, sum x, sum x x^T)`.
///
/// Entries of encoded vectors are `0, +-1`, so every accumulated value is an
/// integer held exactly in `f64`; merging in any grouping reproduces the
/// sequential result bit for bit.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceAccumulator {
    dim: usize,
    count: u64,
    sum: Vec<f64>,
    /// Row-major `dim x dim`.
    outer_sum: Vec<f64>,
}

impl CovarianceAccumulator {
    pub fn new(dim: usize) -> Self {
        CovarianceAccumulator { dim, count: 0, sum: vec![0.0; dim], outer_sum: vec![0.0; dim * dim] }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn accumulate(&mut self, v: &EncodedVector) -> Result<()> {
        if v.values.len() != self.dim {
            return Err(Error::Dimension { expected: self.dim, got: v.values.len() });
        }
        let nz: Vec<(usize, f64)> =
            v.values.iter().copied().enumerate().filter(|&(_, x)| x != 0.0).collect();
        self.push_sparse(&nz);
        Ok(())
    }

    /// Accumulate a shot without materializing its dense encoding.
    pub fn accumulate_config(&mut self, config: &SpinConfiguration) -> Result<()> {
        if 3 * config.n_sites() != self.dim {
            return Err(Error::Dimension { expected: self.dim, got: 3 * config.n_sites() });
        }
        let nz: Vec<(usize, f64)> = config
            .outcomes
            .iter()
            .enumerate()
            .map(|(i, o)| (3 * i + o.axis.index(), o.sign as f64))
            .collect();
        self.push_sparse(&nz);
        Ok(())
    }

    fn push_sparse(&mut self, nz: &[(usize, f64)]) {
        self.count += 1;
        for &(a, x) in nz {
            self.sum[a] += x;
            let row = a * self.dim;
            for &(b, y) in nz {
                self.outer_sum[row + b] += x * y;
            }
        }
    }

    pub fn merge(mut self, other: &CovarianceAccumulator) -> Result<CovarianceAccumulator> {
        if other.dim != self.dim {
            return Err(Error::Dimension { expected: self.dim, got: other.dim });
        }
        self.count += other.count;
        self.sum.iter_mut().zip(&other.sum).for_each(|(a, b)| *a += b);
        self.outer_sum.iter_mut().zip(&other.outer_sum).for_each(|(a, b)| *a += b);
        Ok(self)
    }

    pub fn mean(&self) -> Vec<f64> {
        let n = self.count.max(1) as f64;
        self.sum.iter().map(|s| s / n).collect()
    }

    /// `C = outer_sum / N - mean mean^T` (population normalization),
    /// symmetrized.
    pub fn finalize(&self) -> Result<CovarianceMatrix> {
        if self.count < 2 {
            return Err(Error::NotEnoughSamples(self.count as usize));
        }
        let n = self.count as f64;
        let mean = self.mean();
        let d = self.dim;
        let mut c = DMatrix::from_fn(d, d, |a, b| self.outer_sum[a * d + b] / n - mean[a] * mean[b]);
        let t = c.transpose();
        c = (c + t) * 0.5;
        Ok(CovarianceMatrix(c))
    }
}

/// Accumulate a whole dataset, chunked over shots.
pub fn accumulate_dataset(dataset: &ShotDataset, exec: Exec) -> Result<CovarianceAccumulator> {
    let dim = 3 * dataset.n_sites;
    let shots = &dataset.configurations;
    exec.fold_range(
        shots.len(),
        || Ok(CovarianceAccumulator::new(dim)),
        |acc: Result<CovarianceAccumulator>, k| {
            let mut acc = acc?;
            acc.accumulate_config(&shots[k])?;
            Ok(acc)
        },
        |a, b| a?.merge(&b?),
    )
}

/// Covariance of the encoded shots.
pub fn covariance(dataset: &ShotDataset, exec: Exec) -> Result<CovarianceMatrix> {
    accumulate_dataset(dataset, exec)?.finalize()
}

#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceMatrix(pub DMatrix<f64>);

impl CovarianceMatrix {
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn trace(&self) -> f64 {
        self.0.trace()
    }

    /// Row-major CSV, one row per line, no header.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::WriterBuilder::new().has_headers(false).from_writer(w);
        for r in 0..self.dim() {
            wr.write_record(self.0.row(r).iter().map(|v| v.to_string()))?;
        }
        wr.flush()?;
        Ok(())
    }

    pub fn read_csv<R: BufRead>(r: R) -> Result<CovarianceMatrix> {
        let mut rd = csv::ReaderBuilder::new().has_headers(false).from_reader(r);
        let mut rows: Vec<Vec<f64>> = Vec::new();
        for rec in rd.records() {
            let rec = rec?;
            rows.push(
                rec.iter()
                    .map(|s| s.trim().parse::<f64>().map_err(|e| Error::Parse(format!("{s:?}: {e}"))))
                    .collect::<Result<_>>()?,
            );
        }
        let n = rows.len();
        if n == 0 || rows.iter().any(|r| r.len() != n) {
            return Err(Error::Parse("covariance CSV must be a nonempty square table".into()));
        }
        Ok(CovarianceMatrix(DMatrix::from_fn(n, n, |a, b| rows[a][b])))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumResult {
    /// Principal-component standard deviations, descending.
    pub lambdas: Vec<f64>,
    /// Covariance eigenvalues (after clamping), descending.
    pub eigenvalues: Vec<f64>,
    /// `lambda_1 / lambda_2`, absent when `lambda_2 = 0`.
    pub ratio: Option<f64>,
    pub trace: f64,
    /// Most negative raw eigenvalue (0 when none).
    pub min_raw_eigenvalue: f64,
    /// Leading eigenvectors, one per inner vector, when requested.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub top_vectors: Option<Vec<Vec<f64>>>,
}

impl SpectrumResult {
    pub fn leading(&self, k: usize) -> &[f64] {
        &self.lambdas[..k.min(self.lambdas.len())]
    }
}

/// Full eigendecomposition; keeps the `k` leading eigenvectors.
pub fn eigen_spectrum(c: &CovarianceMatrix, k: usize) -> Result<SpectrumResult> {
    spectrum_impl(c, k, false)
}

/// Like [`eigen_spectrum`] but clamps negative eigenvalues of any size. For
/// matrices that are not true covariances.
pub fn eigen_spectrum_clamped(c: &CovarianceMatrix, k: usize) -> Result<SpectrumResult> {
    spectrum_impl(c, k, true)
}

fn spectrum_impl(c: &CovarianceMatrix, k: usize, lenient: bool) -> Result<SpectrumResult> {
    let m = c.matrix();
    if m.nrows() != m.ncols() {
        return Err(Error::Dimension { expected: m.nrows(), got: m.ncols() });
    }
    let asym = (m - m.transpose()).amax();
    if asym > SYMMETRY_TOL {
        return Err(Error::Asymmetric(asym));
    }
    let eig = SymmetricEigen::new(m.clone());
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let raw: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let min_raw = raw.last().copied().unwrap_or(0.0).min(0.0);
    if !lenient && min_raw < -NEGATIVE_TOL {
        return Err(Error::NegativeEigenvalue(min_raw));
    }
    let eigenvalues: Vec<f64> = raw.iter().map(|&v| v.max(0.0)).collect();
    let lambdas: Vec<f64> = eigenvalues.iter().map(|v| v.sqrt()).collect();
    let ratio = match (lambdas.first(), lambdas.get(1)) {
        (Some(&l1), Some(&l2)) if l2 > 0.0 => Some(l1 / l2),
        _ => None,
    };
    let top_vectors = (k > 0).then(|| {
        order
            .iter()
            .take(k)
            .map(|&i| eig.eigenvectors.column(i).iter().copied().collect())
            .collect()
    });
    Ok(SpectrumResult { lambdas, eigenvalues, ratio, trace: m.trace(), min_raw_eigenvalue: min_raw, top_vectors })
}

pub fn ratio(spec: &SpectrumResult) -> Result<f64> {
    spec.ratio.ok_or(Error::DegenerateSpectrum)
}

/// Mean-centred coordinates of every shot along the `k` leading components.
pub fn project(dataset: &ShotDataset, spec: &SpectrumResult, k: usize) -> Result<Vec<Vec<f64>>> {
    let vecs = spec
        .top_vectors
        .as_ref()
        .ok_or_else(|| Error::Config("spectrum was computed without eigenvectors".into()))?;
    if k > vecs.len() {
        return Err(Error::Config(format!("asked for {k} components, only {} stored", vecs.len())));
    }
    let dim = 3 * dataset.n_sites;
    if let Some(v) = vecs.iter().find(|v| v.len() != dim) {
        return Err(Error::Dimension { expected: dim, got: v.len() });
    }
    let mean = accumulate_dataset(dataset, Exec::Sequential)?.mean();
    Ok(dataset
        .configurations
        .iter()
        .map(|c| {
            let x = encode(c).values;
            vecs[..k]
                .iter()
                .map(|v| v.iter().zip(&x).zip(&mean).map(|((vi, xi), mi)| vi * (xi - mi)).sum())
                .collect()
        })
        .collect())
}
