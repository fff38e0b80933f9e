//! Dry-run reports: what a config would build and solve, without doing it.

use std::fmt::Write as _;

use heatlab_core::analysis::TimeWindow;
use heatlab_core::kernel::initial_half_width;
use heatlab_core::spectral::DENSE_LIMIT;
use heatlab_core::{iic, BoundaryCondition, GasketPlan, UstBoundary};

use crate::config::{ExperimentConfig, Plan, TimeGrid};
use crate::error::CliError;

fn gasket_lines(out: &mut String, plan: &GasketPlan) {
    match plan {
        GasketPlan::Homogeneous { nus } => {
            let _ = writeln!(out, "gasket: homogeneous, levels {}, nu per level {:?}", nus.len(), nus);
        }
        GasketPlan::Recursive { levels, .. } => {
            let _ = writeln!(out, "gasket: random recursive, levels {levels}");
        }
    }
    let _ = writeln!(out, "cells: {}", plan.cell_total());
    let _ = writeln!(out, "vertices: {}", plan.vertex_count());
    let _ = writeln!(out, "edges: {}", 3 * plan.cell_total());
}

fn window_line(out: &mut String, w: &TimeWindow) {
    let _ = writeln!(out, "fit window: [{}, {}]", w.lo, w.hi);
}

fn time_lines(out: &mut String, grid: &TimeGrid) {
    match grid {
        TimeGrid::Steps(n) => {
            let _ = writeln!(out, "time grid: discrete steps 1..={n}");
        }
        TimeGrid::Times(t) => {
            let _ = writeln!(
                out,
                "time grid: {} dyadic times from {} to {}",
                t.len(),
                t.first().copied().unwrap_or(0.0),
                grid.t_max()
            );
        }
    }
}

/// Trap solver sizing: starting half-width and an upper bound on the
/// uniformization work (jump rate at most 1 since every depth is ≥ 1).
fn btm_lines(out: &mut String, alpha: f64, window: usize, t_max: f64, needed: usize) {
    let k = initial_half_width(alpha, t_max).max(needed).min(window);
    let steps = (t_max + 8.0 * t_max.sqrt() + 32.0).ceil();
    let _ = writeln!(out, "environment: Pareto depths, alpha {alpha}, sites [-{window}, {window}]");
    let _ = writeln!(out, "window K: {k} (doubles while the exit bound exceeds the tolerance, up to {window})");
    let _ = writeln!(
        out,
        "uniformization cost: at most {steps} Poisson terms over {} sites, about {:.2e} site updates",
        2 * k + 1,
        steps * (2 * k + 1) as f64
    );
}

pub fn describe(config: &ExperimentConfig) -> Result<String, CliError> {
    let plan = config.plan()?;
    let mut out = String::new();
    let _ = writeln!(out, "kind: {}", config.kind);
    let _ = writeln!(out, "master seed: {}", config.seed);
    match &plan {
        Plan::GasketKernel { plan, walk, grid, fit, .. } => {
            gasket_lines(&mut out, plan);
            let _ = writeln!(out, "walk: {walk:?}");
            time_lines(&mut out, grid);
            window_line(&mut out, fit);
        }
        Plan::GasketSpectrum { plan, bc, .. } => {
            gasket_lines(&mut out, plan);
            let n = plan.vertex_count() - if *bc == BoundaryCondition::Dirichlet { 3 } else { 0 };
            let _ = writeln!(
                out,
                "dense {bc} Laplacian: {n} x {n} ({:.1} MiB){}",
                (n * n * 8) as f64 / (1 << 20) as f64,
                if n > DENSE_LIMIT { format!(", above the dense limit {DENSE_LIMIT}") } else { String::new() }
            );
        }
        Plan::IicAnnealed {
            n0,
            steps,
            rel_tol,
            members,
            fit,
        } => {
            let _ = writeln!(out, "IIC on the {n0}-ary tree, {members} environments");
            let _ = writeln!(
                out,
                "depth: starts at {} and doubles until the absorbing bound is below {rel_tol} relative",
                iic::INITIAL_DEPTH
            );
            time_lines(&mut out, &TimeGrid::Steps(*steps));
            window_line(&mut out, fit);
        }
        Plan::UstExponent {
            n,
            boundary,
            steps,
            members,
            fit,
        } => {
            let vertices = match boundary {
                UstBoundary::Wired => (2 * n - 1).pow(2) + 1,
                UstBoundary::Free => (2 * n + 1).pow(2),
            };
            let _ = writeln!(out, "uniform spanning tree of [-{n}, {n}]^2, {boundary:?} boundary, {members} trees");
            let _ = writeln!(out, "vertices per tree: {vertices}");
            time_lines(&mut out, &TimeGrid::Steps(*steps));
            window_line(&mut out, fit);
        }
        Plan::BtmQuenched {
            alpha,
            window,
            source,
            target,
            times,
            fit,
            ..
        } => {
            let t_max = times.last().copied().unwrap_or(0.0);
            btm_lines(&mut out, *alpha, *window, t_max, (source.unsigned_abs().max(target.unsigned_abs()) + 2) as usize);
            let _ = writeln!(out, "kernel: p_t({source}, {target})");
            time_lines(&mut out, &TimeGrid::Times(times.clone()));
            window_line(&mut out, fit);
        }
        Plan::BtmAnnealed {
            alpha,
            window,
            times,
            members,
            fit,
            ..
        } => {
            let t_max = times.last().copied().unwrap_or(0.0);
            let _ = writeln!(out, "{members} environments");
            btm_lines(&mut out, *alpha, *window, t_max, 2);
            time_lines(&mut out, &TimeGrid::Times(times.clone()));
            window_line(&mut out, fit);
        }
        Plan::BtmClt {
            alpha,
            window,
            lambdas,
            interval,
            grid_points,
            members,
            normalize,
            ..
        } => {
            let lambda_max = lambdas.iter().copied().fold(0.0, f64::max);
            let _ = writeln!(out, "{members} environments, scales {lambdas:?}, normalized {normalize}");
            let _ = writeln!(
                out,
                "rescaled times: {grid_points} points in [{}, {}], largest solve time {}",
                interval.lo,
                interval.hi,
                lambda_max * lambda_max * interval.hi
            );
            btm_lines(&mut out, *alpha, *window, lambda_max * lambda_max * interval.hi, 2);
        }
        Plan::OracleSuite => {
            let _ = writeln!(out, "oracles: {}", heatlab_core::oracles::ORACLES.len());
            for (name, _) in heatlab_core::oracles::ORACLES {
                let _ = writeln!(out, "  {name}");
            }
        }
    }
    Ok(out)
}
