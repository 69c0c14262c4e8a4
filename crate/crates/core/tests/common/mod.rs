//! Brute-force references built directly from definitions: Kronecker
//! products of 2x2 Pauli matrices, explicit product-basis projectors and
//! full enumeration of measurement outcomes. Nothing here calls into the
//! crate's operator, sampler or covariance code.

#![allow(dead_code)]

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64 as C;
use shadowpca::model::{Axis, PauliString};

pub fn c(re: f64, im: f64) -> C {
    C::new(re, im)
}

pub fn pauli(a: Option<Axis>) -> DMatrix<C> {
    let (o, l, i) = (c(0.0, 0.0), c(1.0, 0.0), c(0.0, 1.0));
    match a {
        None => DMatrix::from_row_slice(2, 2, &[l, o, o, l]),
        Some(Axis::X) => DMatrix::from_row_slice(2, 2, &[o, l, l, o]),
        Some(Axis::Y) => DMatrix::from_row_slice(2, 2, &[o, -i, i, o]),
        Some(Axis::Z) => DMatrix::from_row_slice(2, 2, &[l, o, o, -l]),
    }
}

/// Site 0 is the least significant bit, so it is the rightmost factor.
pub fn kron_sites(ops: &[DMatrix<C>]) -> DMatrix<C> {
    let mut m = DMatrix::from_element(1, 1, c(1.0, 0.0));
    for op in ops.iter().rev() {
        m = m.kronecker(op);
    }
    m
}

pub fn dense_string(n: usize, s: &PauliString) -> DMatrix<C> {
    let ops: Vec<_> = (0..n).map(|i| pauli(s.axis_at(i))).collect();
    kron_sites(&ops) * c(s.coefficient, 0.0)
}

pub fn dense_hamiltonian(n: usize, terms: &[PauliString]) -> DMatrix<C> {
    let d = 1 << n;
    terms.iter().fold(DMatrix::zeros(d, d), |acc, t| acc + dense_string(n, t))
}

/// Spectrum of a Hermitian matrix through its real `2d x 2d` embedding
/// (every level appears twice; duplicates are removed by taking every
/// other value).
pub fn hermitian_spectrum(h: &DMatrix<C>) -> Vec<f64> {
    let d = h.nrows();
    let big = DMatrix::from_fn(2 * d, 2 * d, |i, j| {
        let z = h[(i % d, j % d)];
        match (i < d, j < d) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        }
    });
    let mut ev: Vec<f64> = SymmetricEigen::new(big).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev.into_iter().step_by(2).collect()
}

/// Eigenvector of the single-site Pauli `axis` with eigenvalue `sign`,
/// found numerically from the 2x2 matrix.
pub fn pauli_eigenvector(axis: Axis, sign: i8) -> [C; 2] {
    let p = pauli(Some(axis));
    // (P + s I) v is proportional to the s-eigenvector for any v not in the
    // other eigenspace; try both basis vectors and keep the larger.
    let m = &p + DMatrix::<C>::identity(2, 2) * c(sign as f64, 0.0);
    let a = m.column(0).into_owned();
    let b = m.column(1).into_owned();
    let v = if a.norm() >= b.norm() { a } else { b };
    let v = &v / c(v.norm(), 0.0);
    [v[0], v[1]]
}

/// Probability of every `(axes, signs)` outcome of a uniformly random
/// Pauli measurement; axes and signs indexed site by site.
pub struct JointOutcome {
    pub axes: Vec<Axis>,
    pub signs: Vec<i8>,
    pub prob: f64,
}

pub fn joint_distribution(n: usize, psi: &[C]) -> Vec<JointOutcome> {
    let mut out = Vec::new();
    let n_axes = 3usize.pow(n as u32);
    for a in 0..n_axes {
        let axes: Vec<Axis> = (0..n)
            .map(|i| [Axis::X, Axis::Y, Axis::Z][(a / 3usize.pow(i as u32)) % 3])
            .collect();
        for s in 0..(1usize << n) {
            let signs: Vec<i8> = (0..n).map(|i| if s >> i & 1 == 0 { 1 } else { -1 }).collect();
            let factors: Vec<[C; 2]> = axes.iter().zip(&signs).map(|(&ax, &sg)| pauli_eigenvector(ax, sg)).collect();
            let amp: C = (0..psi.len())
                .map(|j| {
                    let e: C = (0..n).map(|i| factors[i][j >> i & 1]).product();
                    e.conj() * psi[j]
                })
                .sum();
            out.push(JointOutcome { axes: axes.clone(), signs, prob: amp.norm_sqr() / n_axes as f64 });
        }
    }
    out
}

/// Exact covariance of the encoded shot vectors, by summing over every
/// outcome of the measurement channel.
pub fn channel_covariance(n: usize, psi: &[C]) -> DMatrix<f64> {
    let d = 3 * n;
    let mut mean = DVector::<f64>::zeros(d);
    let mut second = DMatrix::<f64>::zeros(d, d);
    for o in joint_distribution(n, psi) {
        let mut x = DVector::<f64>::zeros(d);
        for i in 0..n {
            x[3 * i + o.axes[i].index()] = o.signs[i] as f64;
        }
        mean += &x * o.prob;
        second += &x * x.transpose() * o.prob;
    }
    second - &mean * mean.transpose()
}

/// `<psi| P |psi>` with a dense Pauli string.
pub fn expectation(n: usize, psi: &[C], s: &PauliString) -> f64 {
    let v = DVector::from_column_slice(psi);
    (v.adjoint() * dense_string(n, s) * &v)[(0, 0)].re
}

/// Half-chain entropy from the singular values of the reshaped state.
pub fn entropy_by_svd(n: usize, psi: &[C], cut: usize) -> f64 {
    let rows = 1 << cut;
    let cols = 1 << (n - cut);
    let m = DMatrix::from_fn(rows, cols, |a, b| psi[a + b * rows]);
    m.svd(false, false)
        .singular_values
        .iter()
        .map(|s| s * s)
        .filter(|&p| p > 1e-14)
        .map(|p| -p * p.ln())
        .sum()
}
