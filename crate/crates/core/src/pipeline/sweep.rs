//! Running sweeps and persisting their results.

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::{with_workers, Exec};
use crate::groundstate::{ground_state, GroundStateReport, SolverOptions};
use crate::lattice::Lattice;
use crate::oracle::{analytic_covariance, expectations, OracleMode};
use crate::shadow::sample_batch;
use crate::spectra::{covariance, eigen_spectrum, eigen_spectrum_clamped, CovarianceMatrix, SpectrumResult};

use super::spec::{build_model, RowMode, SweepSpec};

pub const RESULTS_FILE: &str = "results.csv";
pub const MANIFEST_FILE: &str = "manifest.json";

const RNG_DESCRIPTION: &str = "ChaCha8 (rand_chacha); shot k of a point draws from stream k of \
     the point's shot seed; point seeds are SplitMix64 mixes of (master seed, grid index)";

/// SplitMix64 output function.
fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of grid point `index`. Depends only on the pair, so growing a grid
/// leaves existing points untouched.
pub fn point_seed(master: u64, index: u64) -> u64 {
    mix64(master ^ mix64(index))
}

/// Seed for the shots of a point, kept apart from the solver's start vector.
pub fn shot_seed(point: u64) -> u64 {
    mix64(point ^ 0x5348_4f54_5345_4544)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub grid_index: usize,
    /// Values in the result's `param_names` order.
    pub params: Vec<f64>,
    pub mode: RowMode,
    /// `lambda1..lambdaK`; empty on failure.
    pub lambdas: Vec<f64>,
    pub ratio: Option<f64>,
    pub trace: Option<f64>,
    pub degenerate: Option<bool>,
    pub pinned: Option<bool>,
    pub wall_ms: Option<f64>,
    pub error: Option<String>,
}

impl SweepRow {
    pub fn lambda(&self, i: usize) -> Option<f64> {
        self.lambdas.get(i).copied()
    }

    pub fn is_ok(&self) -> bool {
        self.error.is_none()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointSeeds {
    pub grid_index: usize,
    pub params: BTreeMap<String, f64>,
    pub seed: u64,
    pub shot_seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub param_names: Vec<String>,
    pub k: usize,
    /// Ordered by grid index, then by mode as listed by the sweep mode.
    pub rows: Vec<SweepRow>,
    pub points: Vec<PointSeeds>,
}

impl SweepResult {
    pub fn failures(&self) -> usize {
        self.rows.iter().filter(|r| !r.is_ok()).count()
    }

    pub fn rows_for(&self, mode: RowMode) -> impl Iterator<Item = &SweepRow> {
        self.rows.iter().filter(move |r| r.mode == mode)
    }

    pub fn param_index(&self, name: &str) -> Result<usize> {
        self.param_names
            .iter()
            .position(|p| p == name)
            .ok_or_else(|| Error::Config(format!("no parameter column {name:?}")))
    }

    /// Modes present, in first-appearance order.
    pub fn modes(&self) -> Vec<RowMode> {
        let mut out = Vec::new();
        for r in &self.rows {
            if !out.contains(&r.mode) {
                out.push(r.mode);
            }
        }
        out
    }

    pub fn header(&self) -> Vec<String> {
        let mut h = vec!["grid_index".to_string()];
        h.extend(self.param_names.iter().cloned());
        h.push("mode".into());
        h.extend((1..=self.k).map(|i| format!("lambda{i}")));
        for c in ["ratio", "trace", "degenerate", "pinned", "wall_ms", "error"] {
            h.push(c.into());
        }
        h
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(self.header())?;
        let num = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        let flag = |v: Option<bool>| v.map(|x| x.to_string()).unwrap_or_default();
        for r in &self.rows {
            let mut rec = vec![r.grid_index.to_string()];
            rec.extend(r.params.iter().map(|v| v.to_string()));
            rec.push(r.mode.as_str().into());
            rec.extend((0..self.k).map(|i| num(r.lambda(i))));
            rec.push(num(r.ratio));
            rec.push(num(r.trace));
            rec.push(flag(r.degenerate));
            rec.push(flag(r.pinned));
            rec.push(num(r.wall_ms));
            rec.push(r.error.clone().unwrap_or_default());
            out.write_record(&rec)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(r: R) -> Result<SweepResult> {
        let mut rdr = csv::Reader::from_reader(r);
        let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
        let bad = |m: &str| Error::Parse(format!("results header: {m}"));
        if header.first().map(String::as_str) != Some("grid_index") {
            return Err(bad("first column must be grid_index"));
        }
        let mode_col = header.iter().position(|h| h == "mode").ok_or_else(|| bad("no mode column"))?;
        let param_names = header[1..mode_col].to_vec();
        let tail = ["ratio", "trace", "degenerate", "pinned", "wall_ms", "error"];
        if header.len() < mode_col + 1 + tail.len() || header[header.len() - tail.len()..] != tail {
            return Err(bad("missing trailing columns"));
        }
        let k = header.len() - mode_col - 1 - tail.len();
        for i in 0..k {
            if header[mode_col + 1 + i] != format!("lambda{}", i + 1) {
                return Err(bad("lambda columns out of order"));
            }
        }

        let f = |s: &str| -> Result<Option<f64>> {
            if s.is_empty() {
                return Ok(None);
            }
            s.parse().map(Some).map_err(|_| Error::Parse(format!("not a number: {s:?}")))
        };
        let b = |s: &str| -> Result<Option<bool>> {
            match s {
                "" => Ok(None),
                "true" => Ok(Some(true)),
                "false" => Ok(Some(false)),
                _ => Err(Error::Parse(format!("not a flag: {s:?}"))),
            }
        };
        let mut rows = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            let grid_index = rec[0]
                .parse()
                .map_err(|_| Error::Parse(format!("bad grid index {:?}", &rec[0])))?;
            let params = (1..mode_col)
                .map(|i| f(&rec[i])?.ok_or_else(|| Error::Parse("empty parameter".into())))
                .collect::<Result<Vec<_>>>()?;
            let mode = RowMode::parse(&rec[mode_col])?;
            let lambdas = (0..k).filter_map(|i| f(&rec[mode_col + 1 + i]).transpose()).collect::<Result<Vec<_>>>()?;
            let t = mode_col + 1 + k;
            let error = Some(rec[t + 5].to_string()).filter(|s| !s.is_empty());
            rows.push(SweepRow {
                grid_index,
                params,
                mode,
                lambdas,
                ratio: f(&rec[t])?,
                trace: f(&rec[t + 1])?,
                degenerate: b(&rec[t + 2])?,
                pinned: b(&rec[t + 3])?,
                wall_ms: f(&rec[t + 4])?,
                error,
            });
        }
        Ok(SweepResult { param_names, k, rows, points: Vec::new() })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub version: String,
    pub spec: SweepSpec,
    pub rng: String,
    pub param_names: Vec<String>,
    pub points: Vec<PointSeeds>,
    pub rows: usize,
    pub failures: usize,
}

impl Manifest {
    pub fn new(spec: &SweepSpec, result: &SweepResult) -> Manifest {
        Manifest {
            version: env!("CARGO_PKG_VERSION").to_string(),
            spec: spec.clone(),
            rng: RNG_DESCRIPTION.to_string(),
            param_names: result.param_names.clone(),
            points: result.points.clone(),
            rows: result.rows.len(),
            failures: result.failures(),
        }
    }
}

/// Write `results.csv` and `manifest.json` into `dir`, creating it if needed.
pub fn write_outputs(spec: &SweepSpec, result: &SweepResult, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    result.write_csv(std::fs::File::create(dir.join(RESULTS_FILE))?)?;
    let manifest = serde_json::to_string_pretty(&Manifest::new(spec, result))?;
    std::fs::write(dir.join(MANIFEST_FILE), manifest + "\n")?;
    Ok(())
}

struct Prepared {
    lattice: Lattice,
    param_names: Vec<String>,
    points: Vec<BTreeMap<String, f64>>,
}

/// Everything that can be checked before any solver runs.
fn prepare(spec: &SweepSpec) -> Result<Prepared> {
    let param_names = spec.param_names()?;
    let lattice = spec.lattice_spec()?.build().map_err(|e| Error::Config(e.to_string()))?;
    if lattice.n_sites > spec.solver.site_cap {
        return Err(Error::Config(
            Error::SizeCap { n_sites: lattice.n_sites, cap: spec.solver.site_cap }.to_string(),
        ));
    }
    if spec.k < 1 {
        return Err(Error::Config("k must be at least 1".into()));
    }
    if spec.shots < 2 && spec.mode.row_modes().contains(&RowMode::Sampled) {
        return Err(Error::Config("sampled sweeps need N >= 2".into()));
    }
    if !(spec.solver.tol > 0.0) {
        return Err(Error::Config("solver tolerance must be positive".into()));
    }

    let mut points = Vec::new();
    for varying in spec.grid.points()? {
        let mut p = spec.model.params.clone();
        for (k, v) in varying {
            if spec.model.params.contains_key(&k) {
                return Err(Error::Config(format!("{k} is both fixed and swept")));
            }
            p.insert(k, v);
        }
        points.push(p);
    }
    // Names and lattice compatibility are the same at every point, so one
    // build catches configuration mistakes up front.
    build_model(&spec.model.name, &points[0], &lattice).map_err(|e| Error::Config(e.to_string()))?;
    Ok(Prepared { lattice, param_names, points })
}

/// Run every grid point. Configuration problems are returned as errors;
/// failures at individual points become rows with an error message.
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepResult> {
    let prep = prepare(spec)?;
    let seeds: Vec<PointSeeds> = prep
        .points
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let seed = point_seed(spec.seed, i as u64);
            PointSeeds { grid_index: i, params: p.clone(), seed, shot_seed: shot_seed(seed) }
        })
        .collect();
    let per_point = with_workers(spec.workers, || {
        Exec::Parallel.map_range(seeds.len(), |i| run_point(spec, &prep, &seeds[i]))
    });
    Ok(SweepResult {
        param_names: prep.param_names,
        k: spec.k,
        rows: per_point.into_iter().flatten().collect(),
        points: seeds,
    })
}

fn run_point(spec: &SweepSpec, prep: &Prepared, seeds: &PointSeeds) -> Vec<SweepRow> {
    let start = Instant::now();
    let params: Vec<f64> = prep.param_names.iter().map(|n| seeds.params[n]).collect();
    let row = |mode: RowMode| SweepRow {
        grid_index: seeds.grid_index,
        params: params.clone(),
        mode,
        lambdas: Vec::new(),
        ratio: None,
        trace: None,
        degenerate: None,
        pinned: None,
        wall_ms: None,
        error: None,
    };
    let modes = spec.mode.row_modes();
    let opts = SolverOptions { seed: seeds.seed, ..spec.solver.clone() };

    let ground = build_model(&spec.model.name, &seeds.params, &prep.lattice)
        .and_then(|m| Ok((ground_state(&m, &opts)?, m.label.to_string())));
    let (ground, label) = match ground {
        Ok(g) => g,
        Err(e) => {
            return modes
                .iter()
                .map(|&m| SweepRow { error: Some(e.to_string()), ..row(m) })
                .collect();
        }
    };
    let setup_ms = start.elapsed().as_secs_f64() * 1e3;

    modes
        .iter()
        .map(|&mode| {
            let t = Instant::now();
            let mut r = row(mode);
            r.degenerate = Some(ground.degenerate);
            r.pinned = Some(ground.pinning_applied);
            match mode_spectrum(&ground, &label, mode, spec, seeds.shot_seed) {
                Ok(s) => {
                    r.lambdas = s.leading(spec.k).to_vec();
                    r.ratio = s.ratio;
                    r.trace = Some(s.trace);
                }
                Err(e) => r.error = Some(e.to_string()),
            }
            if spec.timing {
                r.wall_ms = Some(setup_ms + t.elapsed().as_secs_f64() * 1e3);
            }
            r
        })
        .collect()
}

fn mode_spectrum(
    ground: &GroundStateReport,
    label: &str,
    mode: RowMode,
    spec: &SweepSpec,
    seed: u64,
) -> Result<SpectrumResult> {
    let exec = spec.solver.exec;
    match mode {
        RowMode::Sampled => {
            let data = sample_batch(&ground.state, spec.shots, seed, label, exec)?;
            eigen_spectrum(&covariance(&data, exec)?, 0)
        }
        RowMode::OracleExact => {
            let t = expectations(&ground.state, exec)?;
            eigen_spectrum(&analytic_covariance(&t, OracleMode::Exact), 0)
        }
        RowMode::OraclePaper => {
            let t = expectations(&ground.state, exec)?;
            eigen_spectrum_clamped(&analytic_covariance(&t, OracleMode::Paper), 0)
        }
    }
}

/// Sampled and oracle-exact statistics of the same ground state.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Comparison {
    pub model: String,
    pub shots: usize,
    pub seed: u64,
    pub max_abs_delta_c: f64,
    pub sampled_lambdas: Vec<f64>,
    pub oracle_lambdas: Vec<f64>,
    pub delta_lambdas: Vec<f64>,
    pub sampled_ratio: Option<f64>,
    pub oracle_ratio: Option<f64>,
    pub delta_ratio: Option<f64>,
}

pub fn compare_sampled_oracle(
    model: &crate::model::ModelTerms,
    opts: &SolverOptions,
    shots: usize,
    seed: u64,
    k: usize,
) -> Result<Comparison> {
    let ground = ground_state(model, opts)?;
    let label = model.label.to_string();
    let data = sample_batch(&ground.state, shots, seed, &label, opts.exec)?;
    let sampled: CovarianceMatrix = covariance(&data, opts.exec)?;
    let oracle = analytic_covariance(&expectations(&ground.state, opts.exec)?, OracleMode::Exact);
    let ds = eigen_spectrum(&sampled, 0)?;
    let os = eigen_spectrum(&oracle, 0)?;
    let max_abs_delta_c = (sampled.matrix() - oracle.matrix()).amax();
    let sampled_lambdas = ds.leading(k).to_vec();
    let oracle_lambdas = os.leading(k).to_vec();
    let delta_lambdas = sampled_lambdas.iter().zip(&oracle_lambdas).map(|(a, b)| a - b).collect();
    let delta_ratio = ds.ratio.zip(os.ratio).map(|(a, b)| a - b);
    Ok(Comparison {
        model: label,
        shots,
        seed,
        max_abs_delta_c,
        sampled_lambdas,
        oracle_lambdas,
        delta_lambdas,
        sampled_ratio: ds.ratio,
        oracle_ratio: os.ratio,
        delta_ratio,
    })
}
