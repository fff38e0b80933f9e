//! Experiment configuration files (TOML) and their validation into a
//! typed [`Plan`].

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use heatlab_core::analysis::TimeWindow;
use heatlab_core::kernel::{dyadic_grid_ending_at, MAX_HALF_WIDTH};
use heatlab_core::{build_recursive_gasket, seed, BoundaryCondition, GasketPlan, UstBoundary};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    GasketHeatkernel,
    GasketSpectrum,
    IicAnnealed,
    UstExponent,
    BtmQuenched,
    BtmAnnealed,
    BtmClt,
    OracleSuite,
}

impl Kind {
    pub fn as_str(&self) -> &'static str {
        match self {
            Kind::GasketHeatkernel => "gasket-heatkernel",
            Kind::GasketSpectrum => "gasket-spectrum",
            Kind::IicAnnealed => "iic-annealed",
            Kind::UstExponent => "ust-exponent",
            Kind::BtmQuenched => "btm-quenched",
            Kind::BtmAnnealed => "btm-annealed",
            Kind::BtmClt => "btm-clt",
            Kind::OracleSuite => "oracle-suite",
        }
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Model parameters; which ones apply depends on the experiment kind.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nu: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub level: Option<usize>,
    /// Per-level branching for a scale-irregular gasket.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nus: Option<Vec<u32>>,
    /// `[ν, probability]` pairs for a random recursive gasket.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub offspring: Option<Vec<(u32, f64)>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n0: Option<u32>,
    /// UST box half-width `N`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub boundary: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    /// Half-width of the sampled trap environment.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub window: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub source: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target: Option<i64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_min: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub per_octave: Option<u32>,
    /// Step count for discrete-time walks.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    /// `discrete` or `continuous` (gasket walks).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub walk: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exit_tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rel_tol: Option<f64>,
    /// Poisson truncation for continuous-time graph walks.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub members: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lo: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hi: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bc: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub per_decade: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub multiplicity_tol: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CltSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambdas: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_lo: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_hi: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid_points: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub normalize: Option<bool>,
}

fn is_default<T: Default + PartialEq>(v: &T) -> bool {
    *v == T::default()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: Kind,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "is_default")]
    pub model: ModelSection,
    #[serde(default, skip_serializing_if = "is_default")]
    pub time: TimeSection,
    #[serde(default, skip_serializing_if = "is_default")]
    pub solver: SolverSection,
    #[serde(default, skip_serializing_if = "is_default")]
    pub ensemble: EnsembleSection,
    #[serde(default, skip_serializing_if = "is_default")]
    pub fit: FitSection,
    #[serde(default, skip_serializing_if = "is_default")]
    pub spectrum: SpectrumSection,
    #[serde(default, skip_serializing_if = "is_default")]
    pub clt: CltSection,
}

impl FromStr for ExperimentConfig {
    type Err = CliError;

    fn from_str(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.message().to_string()))
    }
}

impl ExperimentConfig {
    pub fn to_toml(&self) -> Result<String, CliError> {
        // TOML integers are signed.
        if i64::try_from(self.seed).is_err() {
            return Err(invalid("seed", format!("{} does not fit in a signed 64-bit integer", self.seed)));
        }
        toml::to_string(self).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn plan(&self) -> Result<Plan, CliError> {
        Plan::from_config(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Walk {
    Discrete,
    Continuous,
}

#[derive(Debug, Clone, PartialEq)]
pub enum TimeGrid {
    Steps(usize),
    Times(Vec<f64>),
}

impl TimeGrid {
    pub fn t_max(&self) -> f64 {
        match self {
            TimeGrid::Steps(n) => *n as f64,
            TimeGrid::Times(t) => t.last().copied().unwrap_or(0.0),
        }
    }
}

/// A validated experiment.
#[derive(Debug, Clone, PartialEq)]
pub enum Plan {
    GasketKernel {
        plan: GasketPlan,
        walk: Walk,
        grid: TimeGrid,
        tol: f64,
        fit: TimeWindow,
    },
    GasketSpectrum {
        plan: GasketPlan,
        bc: BoundaryCondition,
        per_decade: usize,
        multiplicity_tol: Option<f64>,
    },
    IicAnnealed {
        n0: u32,
        steps: usize,
        rel_tol: f64,
        members: usize,
        fit: TimeWindow,
    },
    UstExponent {
        n: usize,
        boundary: UstBoundary,
        steps: usize,
        members: usize,
        fit: TimeWindow,
    },
    BtmQuenched {
        alpha: f64,
        window: usize,
        source: i64,
        target: i64,
        times: Vec<f64>,
        exit_tol: f64,
        fit: TimeWindow,
    },
    BtmAnnealed {
        alpha: f64,
        window: usize,
        times: Vec<f64>,
        exit_tol: f64,
        members: usize,
        fit: TimeWindow,
    },
    BtmClt {
        alpha: f64,
        window: usize,
        lambdas: Vec<f64>,
        x0: f64,
        interval: TimeWindow,
        grid_points: usize,
        normalize: bool,
        exit_tol: f64,
        members: usize,
    },
    OracleSuite,
}

fn invalid(field: &str, reason: impl fmt::Display) -> CliError {
    CliError::Validation {
        field: field.to_string(),
        reason: reason.to_string(),
    }
}

fn positive(field: &str, v: f64) -> Result<f64, CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(invalid(field, format!("{v} is not a positive finite number")))
    }
}

fn unit_interval(field: &str, v: f64) -> Result<f64, CliError> {
    if v > 0.0 && v < 1.0 {
        Ok(v)
    } else {
        Err(invalid(field, format!("{v} is not in (0, 1)")))
    }
}

fn at_least(field: &str, v: usize, min: usize) -> Result<usize, CliError> {
    if v >= min {
        Ok(v)
    } else {
        Err(invalid(field, format!("{v} is below the minimum {min}")))
    }
}

impl Plan {
    fn from_config(c: &ExperimentConfig) -> Result<Plan, CliError> {
        c.to_toml()?;
        let m = &c.model;
        let members = |default: usize, min: usize| at_least("ensemble.members", c.ensemble.members.unwrap_or(default), min);
        let steps = || at_least("time.steps", c.time.steps.unwrap_or(10_000), 1);
        let fit = |hi_default: f64| -> Result<TimeWindow, CliError> {
            let lo = positive("fit.lo", c.fit.lo.unwrap_or(100.0_f64.min(hi_default / 10.0)))?;
            let hi = positive("fit.hi", c.fit.hi.unwrap_or(hi_default))?;
            TimeWindow::new(lo, hi).map_err(|e| invalid("fit", e))
        };
        let times = |default_max: f64| -> Result<Vec<f64>, CliError> {
            let t_min = positive("time.t_min", c.time.t_min.unwrap_or(1.0))?;
            let t_max = positive("time.t_max", c.time.t_max.unwrap_or(default_max))?;
            if t_max < t_min {
                return Err(invalid("time.t_max", format!("{t_max} is below time.t_min = {t_min}")));
            }
            let per_octave = c.time.per_octave.unwrap_or(4);
            if per_octave == 0 {
                return Err(invalid("time.per_octave", "must be at least 1"));
            }
            Ok(dyadic_grid_ending_at(t_min, t_max, per_octave))
        };
        let alpha = |default: Option<f64>| -> Result<f64, CliError> {
            let a = m.alpha.or(default).ok_or_else(|| invalid("model.alpha", "required"))?;
            positive("model.alpha", a)
        };
        let env_window = |default: usize| -> Result<usize, CliError> {
            let w = at_least("model.window", m.window.unwrap_or(default), 4)?;
            if w > MAX_HALF_WIDTH {
                return Err(invalid("model.window", format!("{w} exceeds the solver limit {MAX_HALF_WIDTH}")));
            }
            Ok(w)
        };
        let exit_tol = || positive("solver.exit_tol", c.solver.exit_tol.unwrap_or(1e-6));

        Ok(match c.kind {
            Kind::GasketHeatkernel => {
                let walk = match c.solver.walk.as_deref().unwrap_or("discrete") {
                    "discrete" => Walk::Discrete,
                    "continuous" => Walk::Continuous,
                    other => return Err(invalid("solver.walk", format!("`{other}` is not discrete or continuous"))),
                };
                let grid = match walk {
                    Walk::Discrete => TimeGrid::Steps(steps()?),
                    Walk::Continuous => TimeGrid::Times(times(1e4)?),
                };
                Plan::GasketKernel {
                    plan: gasket_plan(m, c.seed)?,
                    walk,
                    fit: fit(grid.t_max())?,
                    grid,
                    tol: unit_interval("solver.tol", c.solver.tol.unwrap_or(1e-12))?,
                }
            }
            Kind::GasketSpectrum => {
                let bc: BoundaryCondition = c
                    .spectrum
                    .bc
                    .as_deref()
                    .unwrap_or("neumann")
                    .parse()
                    .map_err(|e| invalid("spectrum.bc", e))?;
                if let Some(t) = c.spectrum.multiplicity_tol {
                    positive("spectrum.multiplicity_tol", t)?;
                }
                Plan::GasketSpectrum {
                    plan: gasket_plan(m, c.seed)?,
                    bc,
                    per_decade: at_least("spectrum.per_decade", c.spectrum.per_decade.unwrap_or(200), 1)?,
                    multiplicity_tol: c.spectrum.multiplicity_tol,
                }
            }
            Kind::IicAnnealed => {
                let steps = steps()?;
                Plan::IicAnnealed {
                    n0: at_least("model.n0", m.n0.unwrap_or(2) as usize, 2)? as u32,
                    steps,
                    rel_tol: positive("solver.rel_tol", c.solver.rel_tol.unwrap_or(1e-3))?,
                    members: members(200, 20)?,
                    fit: fit(steps as f64)?,
                }
            }
            Kind::UstExponent => {
                let steps = steps()?;
                let boundary = match m.boundary.as_deref().unwrap_or("wired") {
                    "wired" => UstBoundary::Wired,
                    "free" => UstBoundary::Free,
                    other => return Err(invalid("model.boundary", format!("`{other}` is not wired or free"))),
                };
                Plan::UstExponent {
                    n: at_least("model.n", m.n.unwrap_or(100), 1)?,
                    boundary,
                    steps,
                    members: members(5, 1)?,
                    fit: fit(steps as f64)?,
                }
            }
            Kind::BtmQuenched => {
                let alpha = alpha(None)?;
                let times = times(1e5)?;
                let t_max = *times.last().expect("non-empty grid");
                Plan::BtmQuenched {
                    alpha,
                    window: env_window(1 << 16)?,
                    source: m.source.unwrap_or(0),
                    target: m.target.unwrap_or(0),
                    fit: fit(t_max)?,
                    times,
                    exit_tol: exit_tol()?,
                }
            }
            Kind::BtmAnnealed => {
                let alpha = alpha(None)?;
                let times = times(1e5)?;
                let t_max = *times.last().expect("non-empty grid");
                Plan::BtmAnnealed {
                    alpha,
                    window: env_window(1 << 16)?,
                    fit: fit(t_max)?,
                    times,
                    exit_tol: exit_tol()?,
                    members: members(200, 20)?,
                }
            }
            Kind::BtmClt => {
                let alpha = alpha(Some(2.0))?;
                let lambdas = c.clt.lambdas.clone().unwrap_or_else(|| vec![20.0, 40.0, 80.0]);
                if lambdas.is_empty() {
                    return Err(invalid("clt.lambdas", "empty list"));
                }
                for &l in &lambdas {
                    if !(l >= 1.0 && l.is_finite()) {
                        return Err(invalid("clt.lambdas", format!("{l} is not a finite scale ≥ 1")));
                    }
                }
                let t_lo = positive("clt.t_lo", c.clt.t_lo.unwrap_or(0.5))?;
                let t_hi = positive("clt.t_hi", c.clt.t_hi.unwrap_or(2.0))?;
                let interval = TimeWindow::new(t_lo, t_hi).map_err(|e| invalid("clt.t_hi", e))?;
                let x0 = c.clt.x0.unwrap_or(1.0);
                if !(x0 >= 0.0 && x0.is_finite()) {
                    return Err(invalid("clt.x0", format!("{x0} is not a finite non-negative number")));
                }
                Plan::BtmClt {
                    alpha,
                    window: env_window(1 << 14)?,
                    lambdas,
                    x0,
                    interval,
                    grid_points: at_least("clt.grid_points", c.clt.grid_points.unwrap_or(9), 2)?,
                    normalize: c.clt.normalize.unwrap_or(true),
                    exit_tol: positive("solver.exit_tol", c.solver.exit_tol.unwrap_or(1e-8))?,
                    members: members(20, 1)?,
                }
            }
            Kind::OracleSuite => Plan::OracleSuite,
        })
    }
}

fn gasket_plan(m: &ModelSection, master: u64) -> Result<GasketPlan, CliError> {
    let plan = match (&m.offspring, &m.nus) {
        (Some(_), Some(_)) => return Err(invalid("model.nus", "give either nus or offspring, not both")),
        (Some(weights), None) => {
            let level = m.level.ok_or_else(|| invalid("model.level", "required with offspring"))?;
            build_recursive_gasket(weights, level, seed::derive(master, 0)).map_err(|e| invalid("model.offspring", e))?
        }
        (None, Some(nus)) => GasketPlan::Homogeneous { nus: nus.clone() },
        (None, None) => {
            let level = m.level.ok_or_else(|| invalid("model.level", "required"))?;
            GasketPlan::constant(m.nu.unwrap_or(2), level)
        }
    };
    plan.validate().map_err(|e| invalid("model", e))?;
    Ok(plan)
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;

    const SAMPLE: &str = r#"
kind = "btm-annealed"
seed = 42

[model]
alpha = 0.5

[time]
t_max = 1e4
per_octave = 4

[ensemble]
members = 50
"#;

    #[test]
    fn parses_and_round_trips() {
        let c: ExperimentConfig = SAMPLE.parse().unwrap();
        assert_eq!(c.kind, Kind::BtmAnnealed);
        assert_eq!(c.model.alpha, Some(0.5));
        let again: ExperimentConfig = c.to_toml().unwrap().parse().unwrap();
        assert_eq!(again, c);
        let Plan::BtmAnnealed { members, times, .. } = c.plan().unwrap() else { panic!() };
        assert_eq!(members, 50);
        assert_eq!(*times.last().unwrap(), 1e4);
    }

    #[test]
    fn validation_names_the_field() {
        let c: ExperimentConfig = "kind = \"btm-quenched\"\n[model]\nalpha = -1.0\n".parse().unwrap();
        match c.plan() {
            Err(CliError::Validation { field, .. }) => assert_eq!(field, "model.alpha"),
            other => panic!("{other:?}"),
        }
        let c: ExperimentConfig = "kind = \"gasket-spectrum\"\n".parse().unwrap();
        assert!(matches!(c.plan(), Err(CliError::Validation { field, .. }) if field == "model.level"));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!("kind = \"oracle-suite\"\nbogus = 1\n".parse::<ExperimentConfig>().is_err());
        assert!("kind = \"nope\"\n".parse::<ExperimentConfig>().is_err());
    }

    fn kind() -> impl Strategy<Value = Kind> {
        prop::sample::select(vec![
            Kind::GasketHeatkernel,
            Kind::GasketSpectrum,
            Kind::IicAnnealed,
            Kind::UstExponent,
            Kind::BtmQuenched,
            Kind::BtmAnnealed,
            Kind::BtmClt,
            Kind::OracleSuite,
        ])
    }

    fn finite() -> impl Strategy<Value = f64> {
        prop::num::f64::NORMAL | prop::num::f64::ZERO
    }

    proptest! {
        #[test]
        fn config_round_trips(
            kind in kind(),
            seed in 0..=i64::MAX as u64,
            level in prop::option::of(0usize..10),
            nus in prop::option::of(prop::collection::vec(2u32..6, 0..4)),
            offspring in prop::option::of(prop::collection::vec((2u32..5, finite()), 1..3)),
            alpha in prop::option::of(finite()),
            source in prop::option::of(any::<i64>()),
            t_max in prop::option::of(finite()),
            steps in prop::option::of(0usize..100_000),
            walk in prop::option::of("[a-z]{1,10}"),
            members in prop::option::of(0usize..1000),
            lambdas in prop::option::of(prop::collection::vec(finite(), 0..4)),
            normalize in prop::option::of(any::<bool>()),
            output in prop::option::of("[a-z/]{1,12}"),
        ) {
            let c = ExperimentConfig {
                kind,
                seed,
                output: output.map(PathBuf::from),
                model: ModelSection { level, nus, offspring, alpha, source, ..Default::default() },
                time: TimeSection { t_max, steps, ..Default::default() },
                solver: SolverSection { walk, ..Default::default() },
                ensemble: EnsembleSection { members },
                fit: FitSection::default(),
                spectrum: SpectrumSection::default(),
                clt: CltSection { lambdas, normalize, ..Default::default() },
            };
            let text = c.to_toml().unwrap();
            let back: ExperimentConfig = text.parse().unwrap();
            prop_assert_eq!(back, c);
        }
    }
}
