//! Randomized single-site Pauli measurements and classical shadows.
//!
//! A shot picks an axis uniformly from `{x, y, z}` for every site and then
//! measures the sites one after another: the Born probability of the `+`
//! outcome is computed from the working vector, a sign is drawn, and the
//! measured site is contracted away with the corresponding eigenvector. The
//! working vector halves in length at every site, so a shot costs `O(2^L)`.
//!
//! Random numbers: shot `k` of a batch with master seed `s` uses
//! `ChaCha8Rng::seed_from_u64(s)` switched to stream `k`. It first draws the
//! `L` axes (`gen_range(0..3)`, 0 = x, 1 = y, 2 = z) and then one uniform
//! `f64` per site for the signs (`u < p(+)` gives `+`). Output therefore does
//! not depend on execution order or thread count.

use std::collections::HashMap;
use std::io::{BufRead, Write};

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::model::{Axis, PauliString};
use crate::state::{StateVector, C64};

/// Largest system accepted by [`reconstruct_shadow`].
pub const RECONSTRUCT_MAX_SITES: usize = 6;

/// Default shot count.
pub const DEFAULT_SHOTS: usize = 2000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Outcome {
    pub axis: Axis,
    /// `+1` or `-1`.
    pub sign: i8,
}

/// Per-site outcomes of one shot.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SpinConfiguration {
    pub outcomes: Vec<Outcome>,
}

impl SpinConfiguration {
    pub fn n_sites(&self) -> usize {
        self.outcomes.len()
    }

    pub fn axes_string(&self) -> String {
        self.outcomes.iter().map(|o| o.axis.as_char()).collect()
    }

    pub fn signs_string(&self) -> String {
        self.outcomes.iter().map(|o| if o.sign > 0 { '+' } else { '-' }).collect()
    }

    pub fn parse(axes: &str, signs: &str) -> Result<SpinConfiguration> {
        if axes.chars().count() != signs.chars().count() {
            return Err(Error::Parse(format!("axes/signs length mismatch: {axes:?} vs {signs:?}")));
        }
        let outcomes = axes
            .chars()
            .zip(signs.chars())
            .map(|(a, s)| {
                let axis = Axis::from_char(a).ok_or_else(|| Error::Parse(format!("bad axis {a:?}")))?;
                let sign = match s {
                    '+' => 1,
                    '-' => -1,
                    _ => return Err(Error::Parse(format!("bad sign {s:?}"))),
                };
                Ok(Outcome { axis, sign })
            })
            .collect::<Result<_>>()?;
        Ok(SpinConfiguration { outcomes })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShotDataset {
    pub n_sites: usize,
    pub seed: u64,
    /// Model label the state came from.
    pub source: String,
    pub configurations: Vec<SpinConfiguration>,
}

#[derive(Serialize, Deserialize)]
struct NdjsonHeader {
    #[serde(rename = "L")]
    n_sites: usize,
    #[serde(rename = "N")]
    n_shots: usize,
    seed: u64,
    model: String,
}

#[derive(Serialize, Deserialize)]
struct NdjsonShot {
    axes: String,
    signs: String,
}

impl ShotDataset {
    pub fn n_shots(&self) -> usize {
        self.configurations.len()
    }

    /// NDJSON: a header line `{"L","N","seed","model"}` followed by one
    /// `{"axes","signs"}` line per shot.
    pub fn write_ndjson<W: Write>(&self, mut w: W) -> Result<()> {
        let header = NdjsonHeader {
            n_sites: self.n_sites,
            n_shots: self.n_shots(),
            seed: self.seed,
            model: self.source.clone(),
        };
        serde_json::to_writer(&mut w, &header)?;
        w.write_all(b"\n")?;
        for c in &self.configurations {
            serde_json::to_writer(&mut w, &NdjsonShot { axes: c.axes_string(), signs: c.signs_string() })?;
            w.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn read_ndjson<R: BufRead>(r: R) -> Result<ShotDataset> {
        let mut lines = r.lines();
        let header: NdjsonHeader = match lines.next() {
            Some(line) => serde_json::from_str(&line?)?,
            None => return Err(Error::EmptyDataset),
        };
        let mut configurations = Vec::with_capacity(header.n_shots);
        for line in lines {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let shot: NdjsonShot = serde_json::from_str(&line)?;
            let c = SpinConfiguration::parse(&shot.axes, &shot.signs)?;
            if c.n_sites() != header.n_sites {
                return Err(Error::Parse(format!(
                    "shot has {} sites, header says {}",
                    c.n_sites(),
                    header.n_sites
                )));
            }
            configurations.push(c);
        }
        if configurations.len() != header.n_shots {
            return Err(Error::Parse(format!(
                "header announces {} shots, found {}",
                header.n_shots,
                configurations.len()
            )));
        }
        Ok(ShotDataset { n_sites: header.n_sites, seed: header.seed, source: header.model, configurations })
    }
}

/// Generator for shot `index` of a batch seeded with `seed`.
pub fn shot_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// One randomized-Pauli shot with uniformly random axes.
pub fn sample_shot<R: Rng>(state: &StateVector, rng: &mut R) -> Result<SpinConfiguration> {
    let axes: Vec<Axis> = (0..state.n_sites()).map(|_| Axis::from_index(rng.gen_range(0..3))).collect();
    sample_shot_with_axes(state, &axes, rng)
}

/// Measure `state` in the given per-site axes. Production code goes through
/// [`sample_shot`]; this entry point lets tests pin the bases.
pub fn sample_shot_with_axes<R: Rng>(
    state: &StateVector,
    axes: &[Axis],
    rng: &mut R,
) -> Result<SpinConfiguration> {
    let n = state.n_sites();
    if axes.len() != n {
        return Err(Error::Dimension { expected: n, got: axes.len() });
    }
    let mut work: Vec<C64> = state.amplitudes().to_vec();
    let mut outcomes = Vec::with_capacity(n);
    for &axis in axes {
        let total: f64 = work.iter().map(|a| a.norm_sqr()).sum();
        if !(total > 0.0) {
            return Err(Error::ZeroNorm);
        }
        let plus = contract(&work, axis, 1);
        let p_plus = plus.iter().map(|a| a.norm_sqr()).sum::<f64>() / total;
        let u: f64 = rng.gen();
        let (sign, next) = if u < p_plus { (1i8, plus) } else { (-1i8, contract(&work, axis, -1)) };
        let kept: f64 = next.iter().map(|a| a.norm_sqr()).sum();
        if !(kept > 0.0) {
            return Err(Error::ZeroNorm);
        }
        let scale = 1.0 / kept.sqrt();
        work = next.into_iter().map(|a| a * scale).collect();
        outcomes.push(Outcome { axis, sign });
    }
    Ok(SpinConfiguration { outcomes })
}

/// Eigenvector `(up, down)` components of `axis` with eigenvalue `sign`.
fn eigenvector(axis: Axis, sign: i8) -> [C64; 2] {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let s = sign as f64;
    match axis {
        Axis::Z if sign > 0 => [C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
        Axis::Z => [C64::new(0.0, 0.0), C64::new(1.0, 0.0)],
        Axis::X => [C64::new(r, 0.0), C64::new(s * r, 0.0)],
        Axis::Y => [C64::new(r, 0.0), C64::new(0.0, s * r)],
    }
}

/// `<e|_0 psi`: project the lowest site onto an eigenvector and drop it.
fn contract(work: &[C64], axis: Axis, sign: i8) -> Vec<C64> {
    let [e0, e1] = eigenvector(axis, sign);
    let (c0, c1) = (e0.conj(), e1.conj());
    work.chunks_exact(2).map(|p| c0 * p[0] + c1 * p[1]).collect()
}

/// `n_shots` independent shots; shot `k` draws from [`shot_rng`]`(seed, k)`.
pub fn sample_batch(
    state: &StateVector,
    n_shots: usize,
    seed: u64,
    source: &str,
    exec: Exec,
) -> Result<ShotDataset> {
    if n_shots == 0 {
        return Err(Error::EmptyDataset);
    }
    let configurations = exec
        .map_range(n_shots, |k| sample_shot(state, &mut shot_rng(seed, k as u64)))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    Ok(ShotDataset { n_sites: state.n_sites(), seed, source: source.to_string(), configurations })
}

fn single_site_tensor(o: Outcome) -> [[C64; 2]; 2] {
    let e = eigenvector(o.axis, o.sign);
    let mut m = [[C64::new(0.0, 0.0); 2]; 2];
    for (a, row) in m.iter_mut().enumerate() {
        for (b, v) in row.iter_mut().enumerate() {
            *v = e[a] * e[b].conj() * 3.0;
            if a == b {
                *v -= 1.0;
            }
        }
    }
    m
}

/// `prod_i (3 |s_i><s_i| - I)` as a dense `2^L x 2^L` matrix.
pub fn shot_tensor(config: &SpinConfiguration) -> Result<DMatrix<C64>> {
    let n = config.n_sites();
    if n > RECONSTRUCT_MAX_SITES {
        return Err(Error::InvalidSize(format!(
            "dense shadow reconstruction is capped at {RECONSTRUCT_MAX_SITES} sites, got {n}"
        )));
    }
    let locals: Vec<_> = config.outcomes.iter().map(|&o| single_site_tensor(o)).collect();
    let dim = 1usize << n;
    Ok(DMatrix::from_fn(dim, dim, |r, c| {
        locals
            .iter()
            .enumerate()
            .fold(C64::new(1.0, 0.0), |acc, (i, m)| acc * m[(r >> i) & 1][(c >> i) & 1])
    }))
}

/// Shadow estimate of the density matrix: the mean of the per-shot tensors.
pub fn reconstruct_shadow(dataset: &ShotDataset) -> Result<DMatrix<C64>> {
    if dataset.configurations.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if dataset.n_sites > RECONSTRUCT_MAX_SITES {
        return Err(Error::InvalidSize(format!(
            "dense shadow reconstruction is capped at {RECONSTRUCT_MAX_SITES} sites, got {}",
            dataset.n_sites
        )));
    }
    let mut counts: HashMap<&SpinConfiguration, usize> = HashMap::new();
    for c in &dataset.configurations {
        *counts.entry(c).or_default() += 1;
    }
    // Sort for a summation order independent of hashing.
    let mut distinct: Vec<_> = counts.into_iter().collect();
    distinct.sort_by(|a, b| (a.0.axes_string(), a.0.signs_string()).cmp(&(b.0.axes_string(), b.0.signs_string())));
    let dim = 1usize << dataset.n_sites;
    let mut rho = DMatrix::from_element(dim, dim, C64::new(0.0, 0.0));
    for (config, count) in distinct {
        rho += shot_tensor(config)? * C64::new(count as f64, 0.0);
    }
    Ok(rho / C64::new(dataset.n_shots() as f64, 0.0))
}

/// Per-shot estimator of a Pauli string: `prod 3 s_i` over its support when
/// every measured axis matches, zero otherwise.
pub fn shot_estimate(config: &SpinConfiguration, obs: &PauliString) -> f64 {
    let mut v = obs.coefficient;
    for &(site, axis) in obs.factors() {
        let o = config.outcomes[site];
        if o.axis != axis {
            return 0.0;
        }
        v *= 3.0 * o.sign as f64;
    }
    v
}

/// Sample mean and standard error of the shadow estimator of `obs`.
pub fn estimate_observable(dataset: &ShotDataset, obs: &PauliString) -> Result<(f64, f64)> {
    let n = dataset.n_shots();
    if n == 0 {
        return Err(Error::EmptyDataset);
    }
    if let Some(max) = obs.max_site() {
        if max >= dataset.n_sites {
            return Err(Error::Config(format!("observable site {max} outside {} sites", dataset.n_sites)));
        }
    }
    let values: Vec<f64> = dataset.configurations.iter().map(|c| shot_estimate(c, obs)).collect();
    let mean = values.iter().sum::<f64>() / n as f64;
    let stderr = if n > 1 {
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        (var / n as f64).sqrt()
    } else {
        f64::NAN
    };
    Ok((mean, stderr))
}
