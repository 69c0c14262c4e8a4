//! Pure states on `n` qubits.
//!
//! Basis index `b` encodes site `i` in bit `i`; bit value 0 is spin up
//! (`sigma^z = +1`).

use std::io::{Read, Write};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Hard ceiling for dense state vectors unless a caller raises it explicitly.
pub const DEFAULT_SITE_CAP: usize = 20;

const DUMP_MAGIC: &[u8; 8] = b"SPCASTV1";

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_sites: usize,
    amplitudes: Vec<C64>,
}

impl StateVector {
    /// Wrap raw amplitudes; the length must be `2^n_sites`. The vector is
    /// normalized.
    pub fn new(n_sites: usize, amplitudes: Vec<C64>) -> Result<StateVector> {
        let dim = 1usize << n_sites;
        if amplitudes.len() != dim {
            return Err(Error::Dimension { expected: dim, got: amplitudes.len() });
        }
        let mut s = StateVector { n_sites, amplitudes };
        let n = s.norm();
        if !(n > 0.0) || !n.is_finite() {
            return Err(Error::ZeroNorm);
        }
        s.scale(1.0 / n);
        Ok(s)
    }

    /// Computational basis state `|b>`.
    pub fn basis(n_sites: usize, b: usize) -> StateVector {
        let mut amplitudes = vec![C64::new(0.0, 0.0); 1 << n_sites];
        amplitudes[b] = C64::new(1.0, 0.0);
        StateVector { n_sites, amplitudes }
    }

    /// Product state from single-site spinors `(up, down)`.
    pub fn product(sites: &[[C64; 2]]) -> Result<StateVector> {
        let mut amps = vec![C64::new(1.0, 0.0)];
        for (i, s) in sites.iter().enumerate() {
            let mut next = vec![C64::new(0.0, 0.0); amps.len() * 2];
            let half = 1usize << i;
            for (b, a) in amps.iter().enumerate() {
                next[b] = a * s[0];
                next[b + half] = a * s[1];
            }
            amps = next;
        }
        StateVector::new(sites.len(), amps)
    }

    /// Normalized Gaussian random vector from a seeded generator.
    pub fn random(n_sites: usize, seed: u64) -> StateVector {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let amps = (0..1usize << n_sites)
            .map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        StateVector::new(n_sites, amps).expect("random vector has nonzero norm")
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        norm(&self.amplitudes)
    }

    fn scale(&mut self, s: f64) {
        self.amplitudes.iter_mut().for_each(|a| *a *= s);
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &StateVector) -> C64 {
        dot(&self.amplitudes, &other.amplitudes)
    }

    /// Binary dump: 8-byte magic, `n_sites` as little-endian u64, then
    /// `2^n_sites` interleaved (re, im) little-endian f64 pairs.
    pub fn write_binary<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(DUMP_MAGIC)?;
        w.write_all(&(self.n_sites as u64).to_le_bytes())?;
        for a in &self.amplitudes {
            w.write_all(&a.re.to_le_bytes())?;
            w.write_all(&a.im.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_binary<R: Read>(mut r: R) -> Result<StateVector> {
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic)?;
        if &magic != DUMP_MAGIC {
            return Err(Error::Parse("not a state vector dump".into()));
        }
        let mut word = [0u8; 8];
        r.read_exact(&mut word)?;
        let n_sites = u64::from_le_bytes(word) as usize;
        if n_sites > 40 {
            return Err(Error::Parse(format!("implausible site count {n_sites}")));
        }
        let mut amplitudes = Vec::with_capacity(1 << n_sites);
        for _ in 0..1usize << n_sites {
            r.read_exact(&mut word)?;
            let re = f64::from_le_bytes(word);
            r.read_exact(&mut word)?;
            let im = f64::from_le_bytes(word);
            amplitudes.push(C64::new(re, im));
        }
        Ok(StateVector { n_sites, amplitudes })
    }
}

pub(crate) fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub(crate) fn norm(a: &[C64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}
