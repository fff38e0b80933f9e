//! Experiment pipelines.

use std::path::Path;

use heatlab_core::analysis::{
    annealed_mean, band_of, fit_exponent, local_clt_error, oscillation_profile, sample_ensemble, CltOptions,
    ExponentFit, QuantileBand, TimeWindow,
};
use heatlab_core::kernel::{btm_kernel_pair, ctmc_kernel, srw_kernel_discrete};
use heatlab_core::oracles::run_oracle_suite;
use heatlab_core::seed::{derive, member_seed};
use heatlab_core::spectral::{central_decade, counting_exponent, geometric_grid, multiplicity_histogram, weyl_ratio};
use heatlab_core::{
    build_gasket, iic_return_kernel, laplacian_spectrum, phi_alpha, sample_traps, wilson_ust, GasketPlan,
    HeatKernelSeries, Window,
};
use log::info;
use serde_json::{json, Value};

use crate::config::{ExperimentConfig, Plan, TimeGrid, Walk};
use crate::error::{CliError, Context};
use crate::manifest::{ArtifactWriter, Manifest};
use crate::plot::{LogLogPlot, PowerLine};

/// Known on-diagonal decay exponent of SG(2).
pub fn gasket_reference(plan: &GasketPlan) -> Option<f64> {
    match plan {
        GasketPlan::Homogeneous { nus } if nus.iter().all(|&n| n == 2) => Some(3f64.ln() / 5f64.ln()),
        _ => None,
    }
}

pub fn btm_reference(alpha: f64) -> f64 {
    if alpha < 1.0 {
        1.0 / (1.0 + alpha)
    } else {
        0.5
    }
}

fn fit_json(fit: &ExponentFit, reference: Option<f64>) -> Value {
    json!({
        "slope": fit.slope,
        "stderr": fit.stderr,
        "intercept": fit.intercept,
        "window": [fit.window.lo, fit.window.hi],
        "points": fit.points(),
        "reference_slope": reference,
    })
}

/// Log-log plot of a decaying series with its fitted line and an optional
/// reference slope anchored at the middle of the fit window.
pub fn series_plot(series: &HeatKernelSeries, fit: Option<&ExponentFit>, reference: Option<f64>, title: &str) -> LogLogPlot {
    let fit_line = fit.map(|f| {
        let mid = (f.window.lo * f.window.hi).sqrt();
        PowerLine::through(-f.slope, mid, f.predict(mid), f.window.lo, f.window.hi, format!("fit, slope {:.4}", f.slope))
    });
    let reference_line = match (fit, reference) {
        (Some(f), Some(r)) => {
            let mid = (f.window.lo * f.window.hi).sqrt();
            Some(PowerLine::through(-r, mid, f.predict(mid), f.window.lo, f.window.hi, format!("reference slope {r:.4}")))
        }
        _ => None,
    };
    LogLogPlot {
        title: title.to_string(),
        x_label: "t".into(),
        y_label: format!("p_t({}, {})", series.source, series.target),
        points: series.points.iter().map(|p| (p.time, p.value)).collect(),
        fit: fit_line,
        reference: reference_line,
    }
}

fn summary_text(summary: &Value) -> String {
    let mut text = serde_json::to_string_pretty(summary).expect("summary serializes");
    text.push('\n');
    text
}

/// Writes a series, its fit and its plot under `stem`.
fn write_series(
    out: &mut ArtifactWriter,
    stem: &str,
    series: &HeatKernelSeries,
    window: TimeWindow,
    reference: Option<f64>,
    title: &str,
) -> Result<ExponentFit, CliError> {
    let fit = fit_exponent(series, window).context(|| format!("fitting {stem}"))?;
    out.write(&format!("{stem}.csv"), series.to_csv(), "heat kernel series")?;
    out.write(&format!("{stem}-fit.csv"), fit.to_csv(), "exponent fit and residuals")?;
    out.write(
        &format!("{stem}.svg"),
        series_plot(series, Some(&fit), reference, title).to_svg(),
        "log-log plot",
    )?;
    Ok(fit)
}

fn band_plot(band: &QuantileBand) -> LogLogPlot {
    LogLogPlot {
        title: format!("q95/q05 of p_t/φ_α(t), α = {}", band.alpha),
        x_label: "t".into(),
        y_label: "spread".into(),
        points: (0..band.times.len()).map(|i| (band.times[i], band.spread(i))).collect(),
        fit: None,
        reference: None,
    }
}

/// Runs a validated experiment into `dir`.
pub fn run(config: &ExperimentConfig, dir: &Path) -> Result<Manifest, CliError> {
    let plan = config.plan()?;
    let master = config.seed;
    let mut out = ArtifactWriter::create(dir, config.kind.as_str(), master)?;
    // The copy lives in the output directory, so it does not name it.
    let saved = ExperimentConfig {
        output: None,
        ..config.clone()
    };
    out.write("config.toml", saved.to_toml()?, "effective configuration")?;
    info!("{} into {}", config.kind, dir.display());
    let mut oracle_failure = None;

    let summary = match plan {
        Plan::GasketKernel { plan, walk, grid, tol, fit } => {
            let g = build_gasket(&plan).context(|| "building gasket".into())?;
            if matches!(plan, GasketPlan::Recursive { .. }) {
                out.record_seed("recursive plan", derive(master, 0));
            }
            let root = g.root();
            let series = match (walk, &grid) {
                (Walk::Discrete, TimeGrid::Steps(n)) => srw_kernel_discrete(&g, root, root, *n),
                (Walk::Continuous, TimeGrid::Times(t)) => ctmc_kernel(&g, root, root, t, tol),
                _ => unreachable!("walk and grid validated together"),
            }
            .context(|| "solving the gasket walk".into())?;
            let reference = gasket_reference(&plan);
            let f = write_series(&mut out, "kernel", &series, fit, reference, "gasket on-diagonal heat kernel")?;
            let oscillation = oscillation_profile(&series.filter_times(|t| fit.contains(t)), f.slope).ok().map(|o| {
                json!({
                    "log_period": o.log_period,
                    "has_peak": o.has_peak(),
                    "max_decade_ratio": o.max_ratio(),
                })
            });
            json!({
                "vertices": g.len(),
                "edges": g.edge_count(),
                "walk": format!("{walk:?}").to_lowercase(),
                "fit": fit_json(&f, reference),
                "oscillation": oscillation,
            })
        }
        Plan::GasketSpectrum {
            plan,
            bc,
            per_decade,
            multiplicity_tol,
        } => {
            let g = build_gasket(&plan).context(|| "building gasket".into())?;
            if matches!(plan, GasketPlan::Recursive { .. }) {
                out.record_seed("recursive plan", derive(master, 0));
            }
            let spec = laplacian_spectrum(&g, bc).context(|| "computing the spectrum".into())?;
            out.write("spectrum.txt", spec.to_dump(), "sorted Laplacian eigenvalues")?;
            let lo = spec
                .min_positive()
                .ok_or_else(|| CliError::Config("spectrum has no positive eigenvalue".into()))?;
            let grid = geometric_grid(lo, spec.max(), per_decade);
            let reference = gasket_reference(&plan);
            let (d_lo, d_hi) = central_decade(&spec).context(|| "central decade".into())?;
            let fit = counting_exponent(&spec, d_lo, d_hi, per_decade).context(|| "counting exponent".into())?;
            // Without a known exponent the ratio is taken against the fitted one.
            let weyl = weyl_ratio(&spec, reference.unwrap_or(fit.slope), &grid).context(|| "Weyl ratio".into())?;
            let mut csv = String::from("x,count,ratio\n");
            for (x, rho, r) in &weyl.points {
                csv.push_str(&format!("{x},{rho},{r}\n"));
            }
            out.write("weyl.csv", csv, "counting function and Weyl ratio")?;
            let hist = multiplicity_histogram(&spec, multiplicity_tol).context(|| "multiplicities".into())?;
            let mut csv = String::from("multiplicity,clusters\n");
            for (m, c) in &hist {
                csv.push_str(&format!("{m},{c}\n"));
            }
            out.write("multiplicities.csv", csv, "eigenvalue multiplicity histogram")?;
            let mid = (d_lo * d_hi).sqrt();
            let plot = LogLogPlot {
                title: "eigenvalue counting function".into(),
                x_label: "x".into(),
                y_label: "ρ(x)".into(),
                points: weyl.points.iter().map(|p| (p.0, p.1 as f64)).collect(),
                fit: Some(PowerLine::through(
                    fit.slope,
                    mid,
                    1.0 / fit.predict(mid),
                    d_lo,
                    d_hi,
                    format!("fit, exponent {:.4}", fit.slope),
                )),
                reference: reference.map(|r| {
                    PowerLine::through(r, mid, 1.0 / fit.predict(mid), lo, spec.max(), format!("exponent {r:.4}"))
                }),
            };
            out.write("counting.svg", plot.to_svg(), "log-log plot of the counting function")?;
            json!({
                "vertices": g.len(),
                "eigenvalues": spec.len(),
                "bc": bc.as_str(),
                "weyl_exponent": weyl.exponent,
                "weyl_decade": [weyl.decade.0, weyl.decade.1],
                "weyl_max_over_min": weyl.max_over_min(),
                "counting_exponent": fit.slope,
                "counting_window": [d_lo, d_hi],
                "max_multiplicity": hist.keys().next_back(),
            })
        }
        Plan::IicAnnealed {
            n0,
            steps,
            rel_tol,
            members,
            fit,
        } => {
            let ensemble = sample_ensemble(|s| iic_return_kernel(n0, steps, s, rel_tol), members, master)
                .context(|| "IIC ensemble".into())?;
            for (i, s) in ensemble.seeds.iter().enumerate() {
                out.record_seed(format!("environment {i}"), *s);
            }
            let mean = annealed_mean(&ensemble).context(|| "annealed mean".into())?;
            let f = write_series(&mut out, "annealed", &mean.mean, fit, Some(2.0 / 3.0), "IIC annealed return probability")?;
            json!({ "members": members, "n0": n0, "fit": fit_json(&f, Some(2.0 / 3.0)) })
        }
        Plan::UstExponent {
            n,
            boundary,
            steps,
            members,
            fit,
        } => {
            let reference = 8.0 / 13.0;
            let mut slopes = Vec::with_capacity(members);
            let mut fits = Vec::with_capacity(members);
            for i in 0..members {
                let s = member_seed(master, i);
                out.record_seed(format!("tree {i}"), s);
                let g = wilson_ust(n, s, boundary).context(|| format!("sampling tree {i}"))?;
                let series = srw_kernel_discrete(&g, g.root(), g.root(), steps).context(|| format!("walk on tree {i}"))?;
                let f = write_series(&mut out, &format!("tree-{i}"), &series, fit, Some(reference), &format!("UST realization {i}"))?;
                slopes.push(f.slope);
                fits.push(fit_json(&f, Some(reference)));
            }
            let mut sorted = slopes.clone();
            sorted.sort_by(f64::total_cmp);
            let median = if members % 2 == 1 {
                sorted[members / 2]
            } else {
                0.5 * (sorted[members / 2 - 1] + sorted[members / 2])
            };
            json!({ "members": members, "slopes": slopes, "median_slope": median, "reference_slope": reference, "fits": fits })
        }
        Plan::BtmQuenched {
            alpha,
            window,
            source,
            target,
            times,
            exit_tol,
            fit,
        } => {
            let s = member_seed(master, 0);
            out.record_seed("environment", s);
            let env = sample_traps(alpha, Window::symmetric(window), s).context(|| "sampling traps".into())?;
            let series = btm_kernel_pair(&env, source, target, &times, exit_tol).context(|| "trap walk solve".into())?;
            let reference = btm_reference(alpha);
            let f = write_series(&mut out, "kernel", &series, fit, Some(reference), "trap model quenched kernel")?;
            let last = series.points.last().expect("non-empty grid");
            let phi = phi_alpha(last.time, alpha).context(|| "φ_α".into())?.value;
            json!({ "alpha": alpha, "fit": fit_json(&f, Some(reference)), "final_ratio_to_phi": last.value / phi })
        }
        Plan::BtmAnnealed {
            alpha,
            window,
            times,
            exit_tol,
            members,
            fit,
        } => {
            let ensemble = sample_ensemble(
                |s| btm_kernel_pair(&sample_traps(alpha, Window::symmetric(window), s)?, 0, 0, &times, exit_tol),
                members,
                master,
            )
            .context(|| "trap model ensemble".into())?;
            for (i, s) in ensemble.seeds.iter().enumerate() {
                out.record_seed(format!("environment {i}"), *s);
            }
            let mean = annealed_mean(&ensemble).context(|| "annealed mean".into())?;
            let reference = btm_reference(alpha);
            let f = write_series(&mut out, "annealed", &mean.mean, fit, Some(reference), "trap model annealed kernel")?;
            let band = band_of(&ensemble, alpha).context(|| "quantile band".into())?;
            out.write("band.csv", band.to_csv(), "quantiles of p_t/φ_α(t) across environments")?;
            out.write("band.svg", band_plot(&band).to_svg(), "log-log plot of the quantile spread")?;
            let last = band.times.len() - 1;
            json!({
                "alpha": alpha,
                "members": members,
                "fit": fit_json(&f, Some(reference)),
                "final_spread_q95_q05": band.spread(last),
            })
        }
        Plan::BtmClt {
            alpha,
            window,
            lambdas,
            x0,
            interval,
            grid_points,
            normalize,
            exit_tol,
            members,
        } => {
            let options = CltOptions {
                grid_points,
                normalize,
                exit_tol,
            };
            let mut csv = String::from("lambda,member,seed,sigma2,sup_error,worst_x,worst_t,half_width\n");
            let mut columns = vec![Vec::with_capacity(members); lambdas.len()];
            for i in 0..members {
                let s = member_seed(master, i);
                out.record_seed(format!("environment {i}"), s);
                let env = sample_traps(alpha, Window::symmetric(window), s).context(|| format!("environment {i}"))?;
                for (col, &lambda) in columns.iter_mut().zip(&lambdas) {
                    let r = local_clt_error(&env, lambda, x0, interval, &options)
                        .context(|| format!("local limit at λ = {lambda}, environment {i}"))?;
                    csv.push_str(&format!(
                        "{lambda},{i},{s},{},{},{},{},{}\n",
                        r.sigma2, r.sup_error, r.worst.0, r.worst.1, r.half_width
                    ));
                    col.push(r.sup_error);
                }
            }
            out.write("clt.csv", csv, "local limit errors per scale and environment")?;
            let medians: Vec<f64> = columns
                .into_iter()
                .map(|mut c| {
                    c.sort_by(f64::total_cmp);
                    let m = c.len();
                    if m % 2 == 1 {
                        c[m / 2]
                    } else {
                        0.5 * (c[m / 2 - 1] + c[m / 2])
                    }
                })
                .collect();
            let decreasing = medians.windows(2).all(|w| w[0] > w[1]);
            let plot = LogLogPlot {
                title: "median local limit error".into(),
                x_label: "λ".into(),
                y_label: "sup error".into(),
                points: lambdas.iter().copied().zip(medians.iter().copied()).collect(),
                fit: None,
                reference: Some(PowerLine::through(
                    -1.0,
                    lambdas[0],
                    medians[0],
                    lambdas[0],
                    *lambdas.last().expect("non-empty"),
                    "slope 1",
                )),
            };
            out.write("clt.svg", plot.to_svg(), "log-log plot of the median error")?;
            json!({
                "alpha": alpha,
                "members": members,
                "normalize": normalize,
                "lambdas": lambdas,
                "median_sup_error": medians,
                "strictly_decreasing": decreasing,
            })
        }
        Plan::OracleSuite => {
            let outcomes = run_oracle_suite(master);
            let mut text = String::new();
            for o in &outcomes {
                text.push_str(&format!("{o}\n"));
            }
            out.write("oracles.txt", &text, "oracle outcomes")?;
            let failed = outcomes.iter().filter(|o| !o.passed).count();
            if failed > 0 {
                oracle_failure = Some(CliError::OraclesFailed {
                    failed,
                    total: outcomes.len(),
                });
            }
            json!({
                "oracles": outcomes.len(),
                "failed": outcomes.iter().filter(|o| !o.passed).map(|o| o.name).collect::<Vec<_>>(),
            })
        }
    };
    out.write("summary.json", summary_text(&summary), "run summary")?;
    let manifest = out.finish()?;
    match oracle_failure {
        Some(e) => Err(e),
        None => Ok(manifest),
    }
}
