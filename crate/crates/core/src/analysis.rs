//! Two-level versus three-level comparison and the sweep over the placement
//! and coupling of the extra level.

use serde::{Deserialize, Serialize};

use crate::dynamics::{evolve, IntegratorConfig, TimeSeries};
use crate::error::{Error, Result};
use crate::model::{initial_state, ModelParams};

/// Coupling ratios `g_ac / g_ab` of the default sweep.
pub const DEFAULT_RATIOS: [f64; 3] = [0.1, 0.5, 1.0];

/// Placements `omega_ac / omega_ab` of the default sweep: 1.1 to 2.0 by 0.05.
pub fn default_placements() -> Vec<f64> {
    (0..=18).map(|k| (110 + 5 * k) as f64 / 100.0).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonResult {
    pub three_level: TimeSeries,
    pub two_level: TimeSeries,
    /// `|P_b(3 levels) - P_b(2 levels)|` per sample.
    pub diff: Vec<f64>,
    pub mean_abs_diff: f64,
}

/// Runs the two-level model: `g_ac = 0` and no `|c>` ladder at all.
pub fn two_level_run(params: &ModelParams, cfg: &IntegratorConfig) -> Result<TimeSeries> {
    let params = params.two_level();
    let state = initial_state(&params)?.without_c();
    evolve(&state, &params, cfg)
}

fn three_level_run(params: &ModelParams, cfg: &IntegratorConfig) -> Result<TimeSeries> {
    let state = initial_state(params)?;
    evolve(&state, params, cfg)
}

fn abs_diff(three: &TimeSeries, two: &TimeSeries) -> Vec<f64> {
    debug_assert_eq!(three.times, two.times);
    three.p_b.iter().zip(&two.p_b).map(|(x, y)| (x - y).abs()).collect()
}

/// Uniform average over the samples, summed in order.
pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

fn combine(three_level: TimeSeries, two_level: TimeSeries) -> ComparisonResult {
    let diff = abs_diff(&three_level, &two_level);
    let mean_abs_diff = mean(&diff);
    ComparisonResult {
        three_level,
        two_level,
        diff,
        mean_abs_diff,
    }
}

/// Evolves `params` as given and with the third level removed, on the same
/// grid, and averages the absolute `P_b` difference over `[0, t_end]`.
pub fn compare(params: &ModelParams, cfg: &IntegratorConfig) -> Result<ComparisonResult> {
    let three = three_level_run(params, cfg)?;
    let two = two_level_run(params, cfg)?;
    Ok(combine(three, two))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellFailure {
    pub ratio_index: usize,
    pub placement_index: usize,
    pub g_ratio: f64,
    pub w_ratio: f64,
    pub message: String,
    /// Failure of the integration rather than of the inputs.
    pub numerical: bool,
}

/// Mean absolute `P_b` difference over a grid of `g_ac / g_ab` (rows) and
/// `omega_ac / omega_ab` (columns). Failed cells hold NaN and are listed in
/// `failures`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorSurface {
    pub coupling_ratios: Vec<f64>,
    pub placements: Vec<f64>,
    pub errors: Vec<Vec<f64>>,
    pub base_params: ModelParams,
    pub integrator: IntegratorConfig,
    /// Averaging window `[0, t_end]`.
    pub window: (f64, f64),
    pub failures: Vec<CellFailure>,
}

impl ErrorSurface {
    pub fn is_complete(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn row(&self, ratio_index: usize) -> &[f64] {
        &self.errors[ratio_index]
    }
}

/// Parameters of one sweep cell.
pub fn cell_params(base: &ModelParams, g_ratio: f64, w_ratio: f64) -> ModelParams {
    ModelParams {
        g_ac: g_ratio * base.g_ab,
        omega_ac: w_ratio * base.omega_ab,
        ..*base
    }
}

fn validate_axes(ratios: &[f64], placements: &[f64]) -> Result<()> {
    if ratios.is_empty() {
        return Err(Error::invalid("ratios", "must not be empty"));
    }
    if placements.is_empty() {
        return Err(Error::invalid("placements", "must not be empty"));
    }
    if let Some(r) = ratios.iter().find(|r| !(r.is_finite() && **r >= 0.0)) {
        return Err(Error::invalid("ratios", format!("must be finite and >= 0, got {r}")));
    }
    if let Some(w) = placements.iter().find(|w| !(w.is_finite() && **w > 1.0)) {
        return Err(Error::invalid(
            "placements",
            format!("the extra level must sit above |b> (ratio > 1), got {w}"),
        ));
    }
    Ok(())
}

fn sweep_cell(base: &ModelParams, cfg: &IntegratorConfig, two: &TimeSeries, g_ratio: f64, w_ratio: f64) -> Result<f64> {
    let params = cell_params(base, g_ratio, w_ratio);
    let three = three_level_run(&params, cfg)?;
    Ok(mean(&abs_diff(&three, two)))
}

fn assemble(
    base: &ModelParams,
    cfg: &IntegratorConfig,
    ratios: &[f64],
    placements: &[f64],
    cells: Vec<Result<f64>>,
) -> ErrorSurface {
    let mut errors = vec![vec![f64::NAN; placements.len()]; ratios.len()];
    let mut failures = Vec::new();
    for (index, cell) in cells.into_iter().enumerate() {
        let (i, j) = (index / placements.len(), index % placements.len());
        match cell {
            Ok(value) => errors[i][j] = value,
            Err(e) => failures.push(CellFailure {
                ratio_index: i,
                placement_index: j,
                g_ratio: ratios[i],
                w_ratio: placements[j],
                message: e.to_string(),
                numerical: e.is_numerical(),
            }),
        }
    }
    ErrorSurface {
        coupling_ratios: ratios.to_vec(),
        placements: placements.to_vec(),
        errors,
        base_params: *base,
        integrator: *cfg,
        window: (0.0, cfg.t_end),
        failures,
    }
}

fn grid(ratios: &[f64], placements: &[f64]) -> Vec<(f64, f64)> {
    ratios
        .iter()
        .flat_map(|&r| placements.iter().map(move |&w| (r, w)))
        .collect()
}

/// Fills the error surface, one independent [`compare`]-equivalent run per
/// cell. The two-level trace depends only on `base` and is computed once.
///
/// Cells are spread over `worker_count` rayon threads (0 means rayon's
/// default) when the `parallel` feature is on; the output does not depend on
/// the worker count. A failing cell is recorded and the sweep carries on;
/// an error is returned only for invalid axes or a failing two-level run.
pub fn sweep(
    base: &ModelParams,
    cfg: &IntegratorConfig,
    ratios: &[f64],
    placements: &[f64],
    worker_count: usize,
) -> Result<ErrorSurface> {
    validate_axes(ratios, placements)?;
    let two = two_level_run(base, cfg)?;
    let cells = grid(ratios, placements);

    #[cfg(feature = "parallel")]
    let values = {
        use rayon::prelude::*;
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(worker_count)
            .build()
            .map_err(|e| Error::invalid("workers", e.to_string()))?;
        pool.install(|| {
            cells
                .par_iter()
                .map(|&(r, w)| sweep_cell(base, cfg, &two, r, w))
                .collect::<Vec<_>>()
        })
    };
    #[cfg(not(feature = "parallel"))]
    let values = {
        let _ = worker_count;
        cells
            .iter()
            .map(|&(r, w)| sweep_cell(base, cfg, &two, r, w))
            .collect::<Vec<_>>()
    };

    Ok(assemble(base, cfg, ratios, placements, values))
}

/// [`sweep`] on the calling thread only.
pub fn sweep_sequential(
    base: &ModelParams,
    cfg: &IntegratorConfig,
    ratios: &[f64],
    placements: &[f64],
) -> Result<ErrorSurface> {
    validate_axes(ratios, placements)?;
    let two = two_level_run(base, cfg)?;
    let values = grid(ratios, placements)
        .iter()
        .map(|&(r, w)| sweep_cell(base, cfg, &two, r, w))
        .collect();
    Ok(assemble(base, cfg, ratios, placements, values))
}

/// Centre of the oscillation packet in `[from, to]`: the mean time weighted by
/// `(P - 1/2)^2`. `None` when the window holds no samples or no oscillation.
pub fn revival_centroid(times: &[f64], values: &[f64], from: f64, to: f64) -> Option<f64> {
    let (mut num, mut den) = (0.0, 0.0);
    for (&t, &p) in times.iter().zip(values) {
        if t >= from && t <= to {
            let w = (p - 0.5).powi(2);
            num += t * w;
            den += w;
        }
    }
    (den > 0.0).then(|| num / den)
}

/// Amplitude of the `cos(omega t + phi)` component of `values` about their
/// mean, by direct projection on the sample grid.
pub fn spectral_amplitude(times: &[f64], values: &[f64], omega: f64) -> f64 {
    let m = mean(values);
    let (mut re, mut im) = (0.0, 0.0);
    for (&t, &v) in times.iter().zip(values) {
        let (s, c) = (omega * t).sin_cos();
        re += (v - m) * c;
        im += (v - m) * s;
    }
    2.0 * (re * re + im * im).sqrt() / values.len() as f64
}
