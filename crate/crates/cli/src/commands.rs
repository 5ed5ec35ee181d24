use std::path::PathBuf;

use serde::Serialize;
use vrabi::analysis::{compare, sweep};
use vrabi::{evolve, initial_state};

use crate::config::RunConfig;
use crate::error::CliError;
use crate::output::OutputSet;
use crate::svg::{line_chart, Curve};

pub fn cmd_simulate(config: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    let state = initial_state(&config.model)?;
    let series = evolve(&state, &config.model, &config.integrator)?;

    let mut out = OutputSet::new(&config.output_dir)?;
    out.csv(
        "timeseries.csv",
        &["t", "p_a", "p_b", "p_c", "norm"],
        (0..series.len()).map(|k| {
            vec![series.times[k], series.p_a[k], series.p_b[k], series.p_c[k], series.norm[k]]
        }),
    )?;
    out.json("run.json", &config.echo("simulate"))?;
    if config.emit_svg {
        let svg = line_chart(
            "Population of |b>",
            "t (1/omega_ab)",
            "P_b",
            &[Curve { label: "P_b", color: "#c0392b", dash: "", x: &series.times, y: &series.p_b }],
        );
        out.text("pb.svg", &svg)?;
    }
    Ok(out.commit())
}

#[derive(Debug, Serialize)]
struct CompareSummary {
    mean_abs_diff: f64,
    max_abs_diff: f64,
    window: (f64, f64),
    samples: usize,
    g_ratio: f64,
    w_ratio: f64,
    max_norm_drift_three_level: f64,
    max_norm_drift_two_level: f64,
}

pub fn cmd_compare(config: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    if config.model.g_ac == 0.0 {
        return Err(CliError::Validation(
            "compare needs g_ac > 0: with the third level decoupled both runs are identical".into(),
        ));
    }
    let result = compare(&config.model, &config.integrator)?;
    let times = &result.three_level.times;

    let mut out = OutputSet::new(&config.output_dir)?;
    out.csv(
        "compare.csv",
        &["t", "p_b_3l", "p_b_2l", "abs_diff"],
        (0..times.len()).map(|k| {
            vec![times[k], result.three_level.p_b[k], result.two_level.p_b[k], result.diff[k]]
        }),
    )?;
    let summary = CompareSummary {
        mean_abs_diff: result.mean_abs_diff,
        max_abs_diff: result.diff.iter().copied().fold(0.0, f64::max),
        window: (0.0, config.integrator.t_end),
        samples: times.len(),
        g_ratio: config.model.g_ac / config.model.g_ab,
        w_ratio: config.model.omega_ac / config.model.omega_ab,
        max_norm_drift_three_level: result.three_level.max_norm_drift(),
        max_norm_drift_two_level: result.two_level.max_norm_drift(),
    };
    out.json("summary.json", &summary)?;
    out.json("run.json", &config.echo("compare"))?;
    if config.emit_svg {
        let svg = line_chart(
            "Population of |b> with and without |c>",
            "t (1/omega_ab)",
            "P_b",
            &[
                Curve { label: "three-level", color: "#c0392b", dash: "", x: times, y: &result.three_level.p_b },
                Curve { label: "two-level", color: "#27ae60", dash: "6 3", x: times, y: &result.two_level.p_b },
                Curve { label: "|difference|", color: "#2e6bd1", dash: "1 2", x: times, y: &result.diff },
            ],
        );
        out.text("compare.svg", &svg)?;
    }
    Ok(out.commit())
}

pub fn cmd_sweep(config: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    let surface = sweep(
        &config.model,
        &config.integrator,
        &config.ratios,
        &config.placements,
        config.workers,
    )?;

    let mut out = OutputSet::new(&config.output_dir)?;
    let rows = surface.coupling_ratios.iter().enumerate().flat_map(|(i, &r)| {
        let surface = &surface;
        surface
            .placements
            .iter()
            .enumerate()
            .map(move |(j, &w)| vec![r, w, surface.errors[i][j]])
    });
    out.csv("surface.csv", &["g_ratio", "w_ratio", "mean_abs_diff"], rows)?;
    out.json("surface_errors.json", &surface.failures)?;
    out.json("run.json", &config.echo("sweep"))?;
    if config.emit_svg {
        const COLORS: [&str; 6] = ["#2e6bd1", "#c0392b", "#27ae60", "#8e44ad", "#d35400", "#16a085"];
        let labels: Vec<String> = surface.coupling_ratios.iter().map(|r| format!("g_ac/g_ab = {r}")).collect();
        let curves: Vec<Curve> = surface
            .errors
            .iter()
            .zip(&labels)
            .enumerate()
            .map(|(i, (row, label))| Curve {
                label,
                color: COLORS[i % COLORS.len()],
                dash: "",
                x: &surface.placements,
                y: row,
            })
            .collect();
        let svg = line_chart(
            "Mean |P_b(3 levels) - P_b(2 levels)|",
            "omega_ac / omega_ab",
            "mean abs difference",
            &curves,
        );
        out.text("surface.svg", &svg)?;
    }
    let files = out.commit();

    if surface.failures.is_empty() {
        Ok(files)
    } else {
        Err(CliError::PartialSweep {
            failed: surface.failures.len(),
            total: surface.coupling_ratios.len() * surface.placements.len(),
        })
    }
}
