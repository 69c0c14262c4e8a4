//! `shadowpca` command-line interface.
//!
//! Exit status: 0 on success, 1 when some sweep points (or a run) failed,
//! 2 for invalid configuration or usage.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use shadowpca::oracle::{analytic_covariance, compare_modes, expectations, OracleMode};
use shadowpca::pipeline::{
    build_model, compare_sampled_oracle, parse_params, render_covariance, render_line, render_scatter,
    render_ternary, run_sweep, write_outputs, Column, LatticeSpec, RowMode, SweepResult, SweepSpec,
    DEFAULT_BLOCK, MANIFEST_FILE, RESULTS_FILE,
};
use shadowpca::shadow::{sample_batch, ShotDataset, DEFAULT_SHOTS};
use shadowpca::spectra::{covariance, eigen_spectrum, eigen_spectrum_clamped, project, CovarianceMatrix, SpectrumResult};
use shadowpca::{ground_state, Error, ModelTerms, PinningPolicy, SolverOptions};

#[derive(Parser)]
#[command(name = "shadowpca", version, about = "PCA of randomized Pauli measurements across quantum phase transitions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a parameter sweep described by a JSON spec.
    Sweep {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Override the spec's worker count.
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Sample randomized Pauli shots from a model's ground state.
    Sample {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = DEFAULT_SHOTS)]
        shots: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Also dump the ground-state vector in binary form.
        #[arg(long)]
        state_out: Option<PathBuf>,
    },
    /// PCA spectrum of a shot file.
    Spectrum {
        #[arg(long)]
        shots: PathBuf,
        #[arg(long, default_value_t = 4)]
        k: usize,
        #[arg(long)]
        out: PathBuf,
        /// Also write the covariance matrix as CSV.
        #[arg(long)]
        covariance_out: Option<PathBuf>,
    },
    /// Noise-free covariance spectrum from ground-state expectation values.
    Oracle {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, value_enum, default_value_t = ModeArg::Exact)]
        mode: ModeArg,
        #[arg(long, default_value_t = 4)]
        k: usize,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        covariance_out: Option<PathBuf>,
        /// Also write the one- and two-point expectation tables as CSV.
        #[arg(long)]
        tables_out: Option<PathBuf>,
    },
    /// Sampled against oracle covariance on the same ground state.
    Compare {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long = "shots-N", default_value_t = DEFAULT_SHOTS)]
        shots_n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 4)]
        k: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Render a results, covariance or shot file as SVG.
    Render {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_enum)]
        kind: RenderKind,
        #[arg(long)]
        out: PathBuf,
        /// Rows to plot (sampled, oracle-exact, oracle-paper); defaults to the first present.
        #[arg(long)]
        mode: Option<String>,
        /// Parameter on the horizontal axis of line plots.
        #[arg(long)]
        axis: Option<String>,
        /// Ternary colour column: lambda1..lambdaK, ratio or trace.
        #[arg(long, default_value = "lambda1")]
        column: String,
        /// Covariance sub-block size.
        #[arg(long, default_value_t = DEFAULT_BLOCK)]
        block: usize,
    },
    /// Write a model (with its lattice and bond list) as JSON.
    Export {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct ModelArgs {
    #[arg(long)]
    model: String,
    /// Comma-separated `name=value` parameters.
    #[arg(long, default_value = "")]
    params: String,
    /// System size; its meaning depends on the model's default lattice.
    #[arg(long = "L")]
    size: Option<usize>,
    /// Lattice as inline JSON, instead of --L.
    #[arg(long)]
    lattice: Option<String>,
    #[arg(long, value_enum, default_value_t = PinningArg::Auto)]
    pinning: PinningArg,
    /// Seed of the solver's random start vector.
    #[arg(long)]
    solver_seed: Option<u64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Exact,
    Paper,
}

#[derive(Clone, Copy, ValueEnum)]
enum PinningArg {
    Auto,
    Cat,
    Always,
}

#[derive(Clone, Copy, ValueEnum)]
enum RenderKind {
    Line,
    TernaryHeatmap,
    CovarianceHeatmap,
    Scatter,
}

impl ModelArgs {
    fn build(&self) -> shadowpca::Result<ModelTerms> {
        let lattice = match (&self.lattice, self.size) {
            (Some(j), None) => serde_json::from_str::<LatticeSpec>(j)
                .map_err(|e| Error::Config(format!("invalid lattice: {e}")))?,
            (None, Some(l)) => LatticeSpec::default_for(&self.model, l)?,
            _ => return Err(Error::Config("give exactly one of --L and --lattice".into())),
        };
        let lattice = lattice.build().map_err(|e| Error::Config(e.to_string()))?;
        build_model(&self.model, &parse_params(&self.params)?, &lattice)
    }

    fn solver(&self) -> SolverOptions {
        let mut o = SolverOptions {
            pinning_policy: match self.pinning {
                PinningArg::Auto => PinningPolicy::Auto,
                PinningArg::Cat => PinningPolicy::Cat,
                PinningArg::Always => PinningPolicy::Always,
            },
            ..SolverOptions::default()
        };
        if let Some(s) = self.solver_seed {
            o.seed = s;
        }
        o
    }
}

/// Failure carrying its exit status.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

impl From<anyhow::Error> for Failure {
    fn from(error: anyhow::Error) -> Self {
        let code = match error.downcast_ref::<Error>() {
            Some(Error::Config(_) | Error::Parse(_) | Error::InvalidSize(_) | Error::Mismatch(_) | Error::SizeCap { .. }) => 2,
            _ => 1,
        };
        Failure { code, error }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        anyhow::Error::from(e).into()
    }
}

type Outcome = Result<u8, Failure>;

fn create(path: &Path) -> anyhow::Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    Ok(BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?))
}

fn open(path: &Path) -> anyhow::Result<BufReader<File>> {
    Ok(BufReader::new(File::open(path).with_context(|| format!("opening {}", path.display()))?))
}

fn write_json(path: &Path, value: &serde_json::Value) -> anyhow::Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn spectrum_json(s: &SpectrumResult, k: usize) -> serde_json::Value {
    json!({
        "lambdas": s.leading(k),
        "eigenvalues": &s.eigenvalues[..k.min(s.eigenvalues.len())],
        "ratio": s.ratio,
        "trace": s.trace,
        "min_raw_eigenvalue": s.min_raw_eigenvalue,
    })
}

fn write_covariance(path: &Path, c: &CovarianceMatrix) -> anyhow::Result<()> {
    let mut w = create(path)?;
    c.write_csv(&mut w)?;
    w.flush()?;
    Ok(())
}

fn run(cli: Cli) -> Outcome {
    match cli.command {
        Command::Sweep { spec, out, workers } => {
            let text = std::fs::read_to_string(&spec)
                .with_context(|| format!("reading {}", spec.display()))
                .map_err(|e| Failure { code: 2, error: e })?;
            let mut spec = SweepSpec::from_json(&text)?;
            if let Some(w) = workers {
                spec.workers = w;
            }
            let result = run_sweep(&spec)?;
            write_outputs(&spec, &result, &out)?;
            let failed = result.failures();
            println!(
                "{} rows, {failed} failed; wrote {} and {}",
                result.rows.len(),
                out.join(RESULTS_FILE).display(),
                out.join(MANIFEST_FILE).display()
            );
            Ok(if failed > 0 { 1 } else { 0 })
        }
        Command::Sample { model, shots, seed, out, state_out } => {
            let m = model.build()?;
            let opts = model.solver();
            let g = ground_state(&m, &opts)?;
            let data = sample_batch(&g.state, shots, seed, &m.label.to_string(), opts.exec)?;
            let mut w = create(&out)?;
            data.write_ndjson(&mut w)?;
            w.flush().context("flushing shots")?;
            if let Some(p) = state_out {
                let mut w = create(&p)?;
                g.state.write_binary(&mut w)?;
                w.flush().context("flushing state")?;
            }
            println!(
                "{}: E0 = {}, degenerate = {}, pinned = {}; {} shots to {}",
                m.label,
                g.energy,
                g.degenerate,
                g.pinning_applied,
                shots,
                out.display()
            );
            Ok(0)
        }
        Command::Spectrum { shots, k, out, covariance_out } => {
            let data = ShotDataset::read_ndjson(open(&shots)?)?;
            let c = covariance(&data, Default::default())?;
            let s = eigen_spectrum(&c, 0)?;
            let mut report = spectrum_json(&s, k);
            report["source"] = json!(data.source);
            report["L"] = json!(data.n_sites);
            report["N"] = json!(data.n_shots());
            report["seed"] = json!(data.seed);
            write_json(&out, &report)?;
            if let Some(p) = covariance_out {
                write_covariance(&p, &c)?;
            }
            Ok(0)
        }
        Command::Oracle { model, mode, k, out, covariance_out, tables_out } => {
            let m = model.build()?;
            let opts = model.solver();
            let g = ground_state(&m, &opts)?;
            let tables = expectations(&g.state, opts.exec)?;
            let mode = match mode {
                ModeArg::Exact => OracleMode::Exact,
                ModeArg::Paper => OracleMode::Paper,
            };
            let c = analytic_covariance(&tables, mode);
            let s = match mode {
                OracleMode::Exact => eigen_spectrum(&c, 0)?,
                OracleMode::Paper => eigen_spectrum_clamped(&c, 0)?,
            };
            let mut report = spectrum_json(&s, k);
            report["model"] = json!(m.label.to_string());
            report["mode"] = json!(if mode == OracleMode::Exact { "exact" } else { "paper" });
            report["energy"] = json!(g.energy);
            report["degenerate"] = json!(g.degenerate);
            report["pinned"] = json!(g.pinning_applied);
            report["mode_comparison"] = json!(compare_modes(&tables));
            write_json(&out, &report)?;
            if let Some(p) = covariance_out {
                write_covariance(&p, &c)?;
            }
            if let Some(p) = tables_out {
                let mut w = create(&p)?;
                tables.write_csv(&mut w)?;
                w.flush().context("flushing tables")?;
            }
            Ok(0)
        }
        Command::Compare { model, shots_n, seed, k, out } => {
            let m = model.build()?;
            let cmp = compare_sampled_oracle(&m, &model.solver(), shots_n, seed, k)?;
            let report = serde_json::to_value(&cmp).context("serializing report")?;
            match out {
                Some(p) => write_json(&p, &report)?,
                None => println!("{}", serde_json::to_string_pretty(&report).context("serializing report")?),
            }
            Ok(0)
        }
        Command::Render { input, kind, out, mode, axis, column, block } => {
            let mode = mode.as_deref().map(RowMode::parse).transpose()?;
            let svg = match kind {
                RenderKind::Line => render_line(&SweepResult::read_csv(open(&input)?)?, mode, axis.as_deref())?,
                RenderKind::TernaryHeatmap => {
                    render_ternary(&SweepResult::read_csv(open(&input)?)?, mode, parse_column(&column)?)?
                }
                RenderKind::CovarianceHeatmap => render_covariance(&CovarianceMatrix::read_csv(open(&input)?)?, block)?,
                RenderKind::Scatter => {
                    let data = ShotDataset::read_ndjson(open(&input)?)?;
                    let s = eigen_spectrum(&covariance(&data, Default::default())?, 2)?;
                    let pts: Vec<(f64, f64)> = project(&data, &s, 2)?.into_iter().map(|p| (p[0], p[1])).collect();
                    render_scatter(&pts, "PC1", "PC2", &format!("shots of {} on the two leading components", data.source))?
                }
            };
            let mut w = create(&out)?;
            w.write_all(svg.as_bytes()).context("writing svg")?;
            w.flush().context("flushing svg")?;
            Ok(0)
        }
        Command::Export { model, out } => {
            let m = model.build()?;
            let mut w = create(&out)?;
            w.write_all(m.to_json()?.as_bytes()).context("writing model")?;
            writeln!(w).context("writing model")?;
            w.flush().context("flushing model")?;
            Ok(0)
        }
    }
}

fn parse_column(s: &str) -> Result<Column, Failure> {
    match s {
        "ratio" => Ok(Column::Ratio),
        "trace" => Ok(Column::Trace),
        _ => s
            .strip_prefix("lambda")
            .and_then(|i| i.parse::<usize>().ok())
            .filter(|&i| i >= 1)
            .map(|i| Column::Lambda(i - 1))
            .ok_or_else(|| Error::Config(format!("unknown column {s:?}")).into()),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}
