//! Self-contained SVG figures.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::spectra::CovarianceMatrix;

use super::analysis::Column;
use super::spec::RowMode;
use super::sweep::SweepResult;

/// Upper-left sub-block shown by default in covariance heatmaps.
pub const DEFAULT_BLOCK: usize = 18;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 64.0;
const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"];

fn document(title: &str, body: &str) -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
         viewBox=\"0 0 {WIDTH} {HEIGHT}\" font-family=\"sans-serif\" font-size=\"12\">\n\
         <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n\
         <text x=\"{}\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">{}</text>\n{body}</svg>\n",
        WIDTH / 2.0,
        escape(title)
    )
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn lerp(a: f64, b: f64, t: f64) -> f64 {
    a + (b - a) * t
}

/// Piecewise-linear viridis approximation on `t` in [0, 1].
fn sequential(t: f64) -> String {
    const STOPS: [(f64, f64, f64); 5] = [
        (68.0, 1.0, 84.0),
        (59.0, 82.0, 139.0),
        (33.0, 145.0, 140.0),
        (94.0, 201.0, 98.0),
        (253.0, 231.0, 37.0),
    ];
    let t = if t.is_finite() { t.clamp(0.0, 1.0) } else { 0.0 };
    let x = t * (STOPS.len() - 1) as f64;
    let i = (x.floor() as usize).min(STOPS.len() - 2);
    let f = x - i as f64;
    let (a, b) = (STOPS[i], STOPS[i + 1]);
    format!("rgb({:.0},{:.0},{:.0})", lerp(a.0, b.0, f), lerp(a.1, b.1, f), lerp(a.2, b.2, f))
}

/// Blue through white to red on `t` in [-1, 1].
fn diverging(t: f64) -> String {
    let t = t.clamp(-1.0, 1.0);
    let (r, g, b) = if t < 0.0 {
        (lerp(255.0, 33.0, -t), lerp(255.0, 102.0, -t), lerp(255.0, 172.0, -t))
    } else {
        (lerp(255.0, 178.0, t), lerp(255.0, 24.0, t), lerp(255.0, 43.0, t))
    };
    format!("rgb({r:.0},{g:.0},{b:.0})")
}

fn fmt_tick(v: f64) -> String {
    let s = format!("{v:.3}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" { "0".into() } else { s.into() }
}

fn range(values: impl IntoIterator<Item = f64>) -> Option<(f64, f64)> {
    values.into_iter().filter(|v| v.is_finite()).fold(None, |acc, v| match acc {
        None => Some((v, v)),
        Some((lo, hi)) => Some((lo.min(v), hi.max(v))),
    })
}

/// Widen a degenerate range so it can be mapped.
fn padded((lo, hi): (f64, f64)) -> (f64, f64) {
    if hi - lo > 1e-12 { (lo, hi) } else { (lo - 0.5, hi + 0.5) }
}

/// Frame with five ticks per axis; returns the data-to-pixel maps.
fn axes(
    out: &mut String,
    x: (f64, f64),
    y: (f64, f64),
    xlabel: &str,
    ylabel: &str,
) -> (impl Fn(f64) -> f64, impl Fn(f64) -> f64) {
    let (x0, x1) = padded(x);
    let (y0, y1) = padded(y);
    let (left, right, top, bottom) = (MARGIN, WIDTH - MARGIN, MARGIN, HEIGHT - MARGIN);
    let px = move |v: f64| left + (v - x0) / (x1 - x0) * (right - left);
    let py = move |v: f64| bottom - (v - y0) / (y1 - y0) * (bottom - top);
    let _ = writeln!(
        out,
        "<rect class=\"frame\" x=\"{left}\" y=\"{top}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>",
        right - left,
        bottom - top
    );
    for i in 0..=4 {
        let f = i as f64 / 4.0;
        let (vx, vy) = (lerp(x0, x1, f), lerp(y0, y1, f));
        let (tx, ty) = (px(vx), py(vy));
        let _ = writeln!(
            out,
            "<line x1=\"{tx:.1}\" y1=\"{bottom}\" x2=\"{tx:.1}\" y2=\"{:.1}\" stroke=\"black\"/>\
             <text x=\"{tx:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{}</text>",
            bottom + 5.0,
            bottom + 18.0,
            fmt_tick(vx)
        );
        let _ = writeln!(
            out,
            "<line x1=\"{:.1}\" y1=\"{ty:.1}\" x2=\"{left}\" y2=\"{ty:.1}\" stroke=\"black\"/>\
             <text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\">{}</text>",
            left - 5.0,
            left - 8.0,
            ty + 4.0,
            fmt_tick(vy)
        );
    }
    let _ = writeln!(
        out,
        "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{}</text>",
        (left + right) / 2.0,
        HEIGHT - 18.0,
        escape(xlabel)
    );
    let _ = writeln!(
        out,
        "<text x=\"18\" y=\"{:.1}\" text-anchor=\"middle\" transform=\"rotate(-90 18 {:.1})\">{}</text>",
        (top + bottom) / 2.0,
        (top + bottom) / 2.0,
        escape(ylabel)
    );
    (px, py)
}

/// Vertical color bar on the right edge.
fn colorbar(out: &mut String, lo: f64, hi: f64, color: impl Fn(f64) -> String) {
    let (x, top, h, steps) = (WIDTH - MARGIN + 16.0, MARGIN, HEIGHT - 2.0 * MARGIN, 32);
    for i in 0..steps {
        let f = (i as f64 + 0.5) / steps as f64;
        let _ = writeln!(
            out,
            "<rect class=\"scale\" x=\"{x}\" y=\"{:.1}\" width=\"12\" height=\"{:.2}\" fill=\"{}\"/>",
            top + h * (1.0 - (i + 1) as f64 / steps as f64),
            h / steps as f64 + 0.5,
            color(f)
        );
    }
    let _ = writeln!(out, "<text x=\"{:.1}\" y=\"{:.1}\">{}</text>", x, top - 6.0, fmt_tick(hi));
    let _ = writeln!(out, "<text x=\"{:.1}\" y=\"{:.1}\">{}</text>", x, top + h + 16.0, fmt_tick(lo));
}

fn pick_mode(result: &SweepResult, mode: Option<RowMode>) -> Result<RowMode> {
    match mode {
        Some(m) if result.rows_for(m).next().is_some() => Ok(m),
        Some(m) => Err(Error::Config(format!("no {} rows to plot", m.as_str()))),
        None => result.modes().first().copied().ok_or(Error::EmptyDataset),
    }
}

/// Parameter columns whose value changes across the rows.
fn varying(result: &SweepResult) -> Vec<usize> {
    (0..result.param_names.len())
        .filter(|&i| {
            let mut vals = result.rows.iter().map(|r| r.params[i]);
            let first = vals.next();
            vals.any(|v| Some(v) != first)
        })
        .collect()
}

/// One polyline per `lambda` column against the swept parameter.
pub fn render_line(result: &SweepResult, mode: Option<RowMode>, axis: Option<&str>) -> Result<String> {
    let mode = pick_mode(result, mode)?;
    let axis = match axis {
        Some(a) => a.to_string(),
        None => {
            let v = varying(result);
            result.param_names[*v.first().ok_or_else(|| Error::Config("no parameter varies".into()))?].clone()
        }
    };
    let series: Vec<Vec<(f64, f64, Option<f64>)>> = (0..result.k)
        .map(|i| result.series(mode, &axis, Column::Lambda(i)))
        .collect::<Result<_>>()?;
    if series.iter().all(Vec::is_empty) {
        return Err(Error::EmptyDataset);
    }
    let x = range(series.iter().flatten().map(|p| p.0)).ok_or(Error::EmptyDataset)?;
    let y = range(series.iter().flatten().map(|p| p.1)).ok_or(Error::EmptyDataset)?;
    let mut body = String::new();
    let (px, py) = axes(&mut body, x, y, &axis, "lambda");
    for (i, s) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let pts: Vec<String> = s.iter().map(|p| format!("{:.2},{:.2}", px(p.0), py(p.1))).collect();
        let _ = writeln!(
            body,
            "<polyline class=\"series\" data-name=\"lambda{}\" points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"/>",
            i + 1,
            pts.join(" ")
        );
        let _ = writeln!(
            body,
            "<text x=\"{:.1}\" y=\"{:.1}\" fill=\"{color}\">lambda{}</text>",
            WIDTH - MARGIN - 60.0,
            MARGIN + 16.0 * (i + 1) as f64,
            i + 1
        );
    }
    Ok(document(&format!("PCA spectrum along {axis} ({})", mode.as_str()), &body))
}

/// Hexagonal cells on the simplex spanned by three parameters, colored by
/// `column`.
pub fn render_ternary(result: &SweepResult, mode: Option<RowMode>, column: Column) -> Result<String> {
    let mode = pick_mode(result, mode)?;
    let v = varying(result);
    if v.len() != 3 {
        return Err(Error::Config(format!(
            "ternary heatmap needs exactly three varying parameters, found {}",
            v.len()
        )));
    }
    let rows: Vec<_> = result.rows_for(mode).collect();
    if rows.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let total = rows[0].params[v[0]] + rows[0].params[v[1]] + rows[0].params[v[2]];
    if !(total > 0.0) || rows.iter().any(|r| (v.iter().map(|&i| r.params[i]).sum::<f64>() - total).abs() > 1e-9 * total) {
        return Err(Error::Config("ternary parameters do not share a constant positive sum".into()));
    }
    let value = |r: &super::sweep::SweepRow| match column {
        Column::Lambda(i) => r.lambda(i),
        Column::Ratio => r.ratio,
        Column::Trace => r.trace,
    };
    let (lo, hi) = padded(range(rows.iter().filter_map(|r| value(r))).unwrap_or((0.0, 1.0)));

    // Corners: first parameter on top, second bottom left, third bottom right.
    let side = (HEIGHT - 2.0 * MARGIN) * 2.0 / 3f64.sqrt();
    let (cx, top) = (WIDTH / 2.0 - 20.0, MARGIN);
    let bottom = top + side * 3f64.sqrt() / 2.0;
    let corners = [(cx, top), (cx - side / 2.0, bottom), (cx + side / 2.0, bottom)];
    let at = |w: [f64; 3]| {
        let s: f64 = w.iter().sum();
        let x = (0..3).map(|i| w[i] / s * corners[i].0).sum::<f64>();
        let y = (0..3).map(|i| w[i] / s * corners[i].1).sum::<f64>();
        (x, y)
    };
    // Nearest-neighbour spacing of the grid sets the hexagon size.
    let mut spacing = f64::INFINITY;
    let pos: Vec<(f64, f64)> = rows.iter().map(|r| at([r.params[v[0]], r.params[v[1]], r.params[v[2]]])).collect();
    for (i, a) in pos.iter().enumerate() {
        for b in &pos[i + 1..] {
            let d = ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt();
            if d > 1e-9 {
                spacing = spacing.min(d);
            }
        }
    }
    let radius = if spacing.is_finite() { spacing / 3f64.sqrt() } else { side / 4.0 };

    let mut body = String::new();
    for (r, &(x, y)) in rows.iter().zip(&pos) {
        let fill = value(r).map_or_else(|| "#bbbbbb".to_string(), |z| sequential((z - lo) / (hi - lo)));
        let pts: Vec<String> = (0..6)
            .map(|k| {
                let a = std::f64::consts::PI / 3.0 * k as f64 + std::f64::consts::PI / 6.0;
                format!("{:.2},{:.2}", x + radius * a.cos(), y + radius * a.sin())
            })
            .collect();
        let _ = writeln!(body, "<polygon class=\"cell\" points=\"{}\" fill=\"{fill}\"/>", pts.join(" "));
    }
    let tri: Vec<String> = corners.iter().map(|c| format!("{:.1},{:.1}", c.0, c.1)).collect();
    let _ = writeln!(body, "<polygon class=\"frame\" points=\"{}\" fill=\"none\" stroke=\"black\"/>", tri.join(" "));
    let names = [&result.param_names[v[0]], &result.param_names[v[1]], &result.param_names[v[2]]];
    let offsets = [(0.0, -8.0), (-10.0, 18.0), (10.0, 18.0)];
    for ((c, o), n) in corners.iter().zip(offsets).zip(names) {
        let _ = writeln!(
            body,
            "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{} = {}</text>",
            c.0 + o.0,
            c.1 + o.1,
            escape(n),
            fmt_tick(total)
        );
    }
    colorbar(&mut body, lo, hi, sequential);
    let what = match column {
        Column::Lambda(i) => format!("lambda{}", i + 1),
        Column::Ratio => "lambda1/lambda2".into(),
        Column::Trace => "trace".into(),
    };
    Ok(document(&format!("{what} over the simplex ({})", mode.as_str()), &body))
}

/// Heatmap of the upper-left `block x block` entries (the whole matrix when
/// it is smaller).
pub fn render_covariance(c: &CovarianceMatrix, block: usize) -> Result<String> {
    let n = c.dim().min(block);
    if n == 0 {
        return Err(Error::EmptyDataset);
    }
    let m = c.matrix();
    let scale = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| m[(i, j)].abs())
        .fold(0.0, f64::max)
        .max(1e-300);
    let size = (HEIGHT - 2.0 * MARGIN) / n as f64;
    let (x0, y0) = (WIDTH / 2.0 - size * n as f64 / 2.0 - 20.0, MARGIN);
    let mut body = String::new();
    for i in 0..n {
        for j in 0..n {
            let _ = writeln!(
                body,
                "<rect class=\"cell\" x=\"{:.2}\" y=\"{:.2}\" width=\"{size:.2}\" height=\"{size:.2}\" fill=\"{}\"><title>C[{i},{j}] = {}</title></rect>",
                x0 + j as f64 * size,
                y0 + i as f64 * size,
                diverging(m[(i, j)] / scale),
                m[(i, j)]
            );
        }
    }
    // Site boundaries every three rows (x, y, z components).
    for s in (3..n).step_by(3) {
        let p = s as f64 * size;
        let _ = writeln!(
            body,
            "<line x1=\"{:.2}\" y1=\"{y0}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"#888\" stroke-width=\"0.5\"/>\
             <line x1=\"{x0:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"#888\" stroke-width=\"0.5\"/>",
            x0 + p,
            x0 + p,
            y0 + n as f64 * size,
            y0 + p,
            x0 + n as f64 * size,
            y0 + p
        );
    }
    colorbar(&mut body, -scale, scale, |f| diverging(2.0 * f - 1.0));
    Ok(document(&format!("covariance, upper-left {n}x{n} of {}", c.dim()), &body))
}

/// Scatter of two-dimensional points, such as shots projected on the two
/// leading components.
pub fn render_scatter(points: &[(f64, f64)], xlabel: &str, ylabel: &str, title: &str) -> Result<String> {
    if points.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let x = range(points.iter().map(|p| p.0)).ok_or(Error::EmptyDataset)?;
    let y = range(points.iter().map(|p| p.1)).ok_or(Error::EmptyDataset)?;
    let mut body = String::new();
    let (px, py) = axes(&mut body, x, y, xlabel, ylabel);
    for p in points.iter().filter(|p| p.0.is_finite() && p.1.is_finite()) {
        let _ = writeln!(
            body,
            "<circle class=\"point\" cx=\"{:.2}\" cy=\"{:.2}\" r=\"2\" fill=\"{}\" fill-opacity=\"0.5\"/>",
            px(p.0),
            py(p.1),
            PALETTE[0]
        );
    }
    Ok(document(title, &body))
}
