//! Parameter grids: straight lines, ternary simplices and explicit paths.

use std::collections::BTreeMap;

use crate::error::{Error, Result};

use super::spec::{Grid, LinearGrid, TernaryGrid};

/// All points `(i, j, k) * total / r` with `i + j + k = r`, ordered by
/// descending `i`, then descending `j`.
pub fn ternary_grid(resolution: usize, total: f64) -> Result<Vec<[f64; 3]>> {
    if resolution < 1 {
        return Err(Error::Config("ternary resolution must be at least 1".into()));
    }
    if !(total > 0.0 && total.is_finite()) {
        return Err(Error::Config(format!("ternary total must be positive, got {total}")));
    }
    let r = resolution;
    let step = total / r as f64;
    let mut points = Vec::with_capacity((r + 1) * (r + 2) / 2);
    for i in (0..=r).rev() {
        for j in (0..=r - i).rev() {
            let k = r - i - j;
            points.push([i as f64 * step, j as f64 * step, k as f64 * step]);
        }
    }
    Ok(points)
}

/// `steps` evenly spaced values from `start` to `stop` inclusive.
pub fn linspace(start: f64, stop: f64, steps: usize) -> Result<Vec<f64>> {
    if steps < 2 {
        return Err(Error::Config(format!("a linear grid needs at least 2 steps, got {steps}")));
    }
    if !(start.is_finite() && stop.is_finite()) {
        return Err(Error::Config("linear grid bounds must be finite".into()));
    }
    let d = (stop - start) / (steps - 1) as f64;
    // Pin the last point to `stop` exactly.
    Ok((0..steps).map(|i| if i + 1 == steps { stop } else { start + d * i as f64 }).collect())
}

fn linear_points(g: &LinearGrid) -> Result<Vec<BTreeMap<String, f64>>> {
    linspace(g.start, g.stop, g.steps)?
        .into_iter()
        .map(|v| {
            let mut p = BTreeMap::new();
            for name in std::iter::once(&g.param).chain(&g.tied) {
                if p.insert(name.clone(), v).is_some() {
                    return Err(Error::Config(format!("grid parameter {name} listed twice")));
                }
            }
            if let Some(rem) = &g.remainder {
                let rest = rem.total - p.values().sum::<f64>();
                if p.insert(rem.param.clone(), rest).is_some() {
                    return Err(Error::Config(format!("{} is both swept and a remainder", rem.param)));
                }
            }
            Ok(p)
        })
        .collect()
}

fn ternary_points(g: &TernaryGrid) -> Result<Vec<BTreeMap<String, f64>>> {
    let [a, b, c] = &g.params;
    if a == b || b == c || a == c {
        return Err(Error::Config("ternary parameters must be distinct".into()));
    }
    Ok(ternary_grid(g.resolution, g.total)?
        .into_iter()
        .map(|[x, y, z]| BTreeMap::from([(a.clone(), x), (b.clone(), y), (c.clone(), z)]))
        .collect())
}

impl Grid {
    /// Varying parameters of every grid point, in grid-index order.
    pub fn points(&self) -> Result<Vec<BTreeMap<String, f64>>> {
        match self {
            Grid::Linear(g) => linear_points(g),
            Grid::Ternary(g) => ternary_points(g),
            Grid::Path(p) if p.is_empty() => Err(Error::Config("path grid has no points".into())),
            Grid::Path(p) => Ok(p.clone()),
        }
    }

    /// Parameter that parametrizes a one-dimensional grid.
    pub fn axis(&self) -> Option<&str> {
        match self {
            Grid::Linear(g) => Some(&g.param),
            _ => None,
        }
    }
}
