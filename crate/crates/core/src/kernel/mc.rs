use rand::Rng;
use rand_distr::{Distribution, Exp1};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::env::TrapEnvironment;
use crate::error::{Error, Result};
use crate::graph::WeightedGraph;
use crate::seed;

/// Process simulated by [`mc_return_probability`].
#[derive(Debug, Clone, Copy)]
pub enum McModel<'a> {
    /// Discrete-time walk on a graph; `t` must be a whole number of steps.
    Discrete(&'a WeightedGraph),
    /// Unit-rate continuous-time walk on a graph.
    Continuous(&'a WeightedGraph),
    /// Trap walk: exponential holding time of mean `τ_x` at `x`.
    Trap(&'a TrapEnvironment),
}

/// Monte Carlo estimate of the return kernel `P_x(X_t = x) / μ_x` with a
/// normal-approximation (Wald) interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    /// Kernel estimate (hit fraction divided by `μ_x`).
    pub value: f64,
    pub half_width: f64,
    /// `μ_x` (degree-weighted measure or trap depth).
    pub measure: f64,
    pub level: f64,
    pub hits: u64,
    pub samples: u64,
}

impl McEstimate {
    pub fn contains(&self, p: f64) -> bool {
        (p - self.value).abs() <= self.half_width
    }
}

/// Return kernel estimate at the 95% level.
pub fn mc_return_probability(model: McModel, x: i64, t: f64, samples: u64, seed: u64) -> Result<McEstimate> {
    mc_return_probability_at(model, x, t, samples, seed, 0.95)
}

pub fn mc_return_probability_at(
    model: McModel,
    x: i64,
    t: f64,
    samples: u64,
    seed: u64,
    level: f64,
) -> Result<McEstimate> {
    if samples < 100 {
        return Err(Error::param("samples", format!("{samples} < 100")));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::param("level", format!("{level} not in (0, 1)")));
    }
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::param("time", format!("{t} is not a finite non-negative time")));
    }
    let mut rng = seed::rng(seed);
    let mut hits = 0u64;
    let measure;
    match model {
        McModel::Discrete(g) | McModel::Continuous(g) => {
            let v = usize::try_from(x)
                .ok()
                .filter(|&v| v < g.len())
                .ok_or_else(|| Error::param("source", format!("vertex {x} out of range")))?;
            measure = g.measure()[v];
            let cumulative = cumulative_rows(g);
            let discrete = matches!(model, McModel::Discrete(_));
            if discrete && t.fract() != 0.0 {
                return Err(Error::param("time", format!("{t} is not a whole number of steps")));
            }
            for _ in 0..samples {
                let end = if discrete {
                    let mut u = v;
                    for _ in 0..t as u64 {
                        u = jump(g, &cumulative, u, &mut rng);
                    }
                    u
                } else {
                    let mut u = v;
                    let mut clock: f64 = Exp1.sample(&mut rng);
                    while clock <= t {
                        u = jump(g, &cumulative, u, &mut rng);
                        let hold: f64 = Exp1.sample(&mut rng);
                        clock += hold;
                    }
                    u
                };
                hits += (end == v) as u64;
            }
        }
        McModel::Trap(env) => {
            let window = env.window();
            measure = env.tau(x)?;
            for _ in 0..samples {
                let mut u = x;
                let mut clock = 0.0;
                loop {
                    let hold: f64 = Exp1.sample(&mut rng);
                    clock += hold * env.tau(u)?;
                    if clock > t {
                        break;
                    }
                    u += if rng.random::<bool>() { 1 } else { -1 };
                    if !window.contains(u) {
                        return Err(Error::Resource {
                            reason: format!("trajectory left the environment window {window}"),
                            best_window: None,
                        });
                    }
                }
                hits += (u == x) as u64;
            }
        }
    }
    let p = hits as f64 / samples as f64;
    let z = Normal::standard().inverse_cdf(0.5 + level / 2.0);
    Ok(McEstimate {
        value: p / measure,
        half_width: z * (p * (1.0 - p) / samples as f64).sqrt() / measure,
        measure,
        level,
        hits,
        samples,
    })
}

fn cumulative_rows(g: &WeightedGraph) -> Vec<Vec<f64>> {
    (0..g.len())
        .map(|u| {
            let total = g.conductance(u);
            let mut acc = 0.0;
            g.neighbors(u)
                .iter()
                .map(|&(_, c)| {
                    acc += c / total;
                    acc
                })
                .collect()
        })
        .collect()
}

fn jump(g: &WeightedGraph, cumulative: &[Vec<f64>], u: usize, rng: &mut impl Rng) -> usize {
    let r: f64 = rng.random();
    let row = &cumulative[u];
    let i = row.partition_point(|&c| c <= r).min(row.len() - 1);
    g.neighbors(u)[i].0
}
