//! Parameter sweeps over the five models, λ₁ peak detection, ratio
//! classification, result files and SVG figures.

mod analysis;
mod grid;
mod render;
mod spec;
mod sweep;

pub use analysis::{classify_transition, peak_detect, ClassifyThresholds, Column, Peak, Transition, DEFAULT_PROMINENCE};
pub use grid::{linspace, ternary_grid};
pub use render::{render_covariance, render_line, render_scatter, render_ternary, DEFAULT_BLOCK};
pub use spec::{
    build_model, model_params, parse_params, Grid, LatticeSpec, LinearGrid, ModelSpec, Remainder, RowMode,
    SweepMode, SweepSpec, TernaryGrid, MODELS,
};
pub use sweep::{
    compare_sampled_oracle, point_seed, run_sweep, shot_seed, write_outputs, Comparison, Manifest, PointSeeds,
    SweepResult, SweepRow, MANIFEST_FILE, RESULTS_FILE,
};
