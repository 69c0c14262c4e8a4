//! Peak finding along one-dimensional sweeps and ratio-based classification.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::spec::RowMode;
use super::sweep::SweepResult;

pub const DEFAULT_PROMINENCE: f64 = 0.02;
pub const MIN_PEAK_ROWS: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Peak {
    /// Position within the series.
    pub index: usize,
    pub parameter: f64,
    pub value: f64,
    /// Peak value minus the larger endpoint value.
    pub prominence: f64,
}

/// Interior local maximum with the largest prominence over the endpoints,
/// or `None` when no maximum clears `threshold`.
pub fn peak_detect(params: &[f64], values: &[f64], threshold: f64) -> Result<Option<Peak>> {
    if params.len() != values.len() {
        return Err(Error::Mismatch(format!(
            "{} parameters against {} values",
            params.len(),
            values.len()
        )));
    }
    let n = values.len();
    if n < MIN_PEAK_ROWS {
        return Err(Error::NotEnoughSamples(n));
    }
    let baseline = values[0].max(values[n - 1]);
    let mut best: Option<Peak> = None;
    for i in 1..n - 1 {
        // Strict on the left so a plateau reports its first point once.
        let local_max = values[i] > values[i - 1] && values[i] >= values[i + 1];
        if !local_max {
            continue;
        }
        let prominence = values[i] - baseline;
        if best.map_or(true, |b| prominence > b.prominence) {
            best = Some(Peak { index: i, parameter: params[i], value: values[i], prominence });
        }
    }
    Ok(best.filter(|p| p.prominence >= threshold))
}

/// One numeric column of a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Column {
    /// `lambda_{i+1}`.
    Lambda(usize),
    Ratio,
    Trace,
}

impl SweepResult {
    /// `(axis parameter, column value, ratio)` for the successful rows of
    /// one mode, in grid order.
    pub fn series(&self, mode: RowMode, axis: &str, column: Column) -> Result<Vec<(f64, f64, Option<f64>)>> {
        let a = self.param_index(axis)?;
        Ok(self
            .rows_for(mode)
            .filter(|r| r.is_ok())
            .filter_map(|r| {
                let v = match column {
                    Column::Lambda(i) => r.lambda(i),
                    Column::Ratio => r.ratio,
                    Column::Trace => r.trace,
                }?;
                Some((r.params[a], v, r.ratio))
            })
            .collect())
    }

    /// Peak of `lambda1` along `axis` together with the ratio at the peak.
    pub fn lambda1_peak(&self, mode: RowMode, axis: &str, threshold: f64) -> Result<Option<(Peak, Option<f64>)>> {
        let s = self.series(mode, axis, Column::Lambda(0))?;
        let xs: Vec<f64> = s.iter().map(|p| p.0).collect();
        let ys: Vec<f64> = s.iter().map(|p| p.1).collect();
        Ok(peak_detect(&xs, &ys, threshold)?.map(|p| (p, s[p.index].2)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Transition {
    SymmetryBreaking,
    Topological,
    Mixed,
}

impl fmt::Display for Transition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Transition::SymmetryBreaking => "symmetry-breaking",
            Transition::Topological => "topological",
            Transition::Mixed => "mixed",
        })
    }
}

/// Ratio cut-offs. The defaults follow the qualitative bands "well above
/// 1.5" for symmetry breaking and "about 1" for topological transitions;
/// boundaries near multicritical points blur both.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassifyThresholds {
    pub symmetry_breaking: f64,
    pub topological: f64,
}

impl Default for ClassifyThresholds {
    fn default() -> Self {
        ClassifyThresholds { symmetry_breaking: 1.5, topological: 1.15 }
    }
}

pub fn classify_transition(ratio: f64, t: &ClassifyThresholds) -> Transition {
    if ratio >= t.symmetry_breaking {
        Transition::SymmetryBreaking
    } else if ratio <= t.topological {
        Transition::Topological
    } else {
        Transition::Mixed
    }
}
