use super::{HeatKernelSeries, Method, PoissonWeights, SeriesPoint};
use crate::env::TrapEnvironment;
use crate::error::{Error, Result};

const POISSON_TOL: f64 = 1e-13;
const FLUSH: f64 = 1e-280;
/// Largest truncation half-width the auto-sizing will try.
pub const MAX_HALF_WIDTH: usize = 1 << 22;

/// Transient law of the trap walk killed on leaving `[-K, K]`.
#[derive(Debug, Clone, PartialEq)]
pub struct BtmSolution {
    pub half_width: usize,
    pub source: i64,
    pub target: i64,
    pub times: Vec<f64>,
    /// `P_source(X_t = target)` for the killed walk.
    pub values: Vec<f64>,
    /// Upper bound on the probability of leaving the window by time `t`,
    /// which bounds the error of every entry of the killed law.
    pub absorbed: Vec<f64>,
    /// Poisson truncation bound.
    pub tails: Vec<f64>,
    /// Full law on `[-K, K]` per time, when requested.
    pub distributions: Option<Vec<Vec<f64>>>,
}

impl BtmSolution {
    /// Total error bound on the probability at time index `i`.
    pub fn error(&self, i: usize) -> f64 {
        self.absorbed[i] + self.tails[i]
    }
}

/// Analytic starting half-width `max(16, ⌈8 r(t)⌉)`, where `r(t)` is the
/// typical displacement scale of the walk at time `t`.
pub fn initial_half_width(alpha: f64, t: f64) -> usize {
    let t = t.max(1.0);
    let r = if alpha < 1.0 {
        t.powf(alpha / (1.0 + alpha))
    } else if alpha == 1.0 {
        (t / t.max(std::f64::consts::E).ln()).sqrt()
    } else if alpha.is_finite() {
        (t * (alpha - 1.0) / alpha).sqrt()
    } else {
        t.sqrt()
    };
    ((8.0 * r).ceil() as usize).max(16)
}

/// Uniformization solve on the fixed window `[-K, K]`.
pub fn btm_transient(
    env: &TrapEnvironment,
    source: i64,
    target: i64,
    times: &[f64],
    half_width: usize,
    keep_distributions: bool,
) -> Result<BtmSolution> {
    let k = half_width as i64;
    let window = env.window();
    if -k < window.lo || k > window.hi {
        return Err(Error::OutOfRange {
            requested: format!("[{}, {k}]", -k),
            window: window.to_string(),
        });
    }
    for (name, x) in [("source", source), ("target", target)] {
        if x.abs() >= k {
            return Err(Error::param(name, format!("site {x} not inside (-{k}, {k})")));
        }
    }
    if let Some(t) = times.iter().find(|t| !(**t >= 0.0) || !t.is_finite()) {
        return Err(Error::param("time", format!("{t} is not a finite non-negative time")));
    }
    let n = 2 * half_width + 1;
    let offset = (-k - window.lo) as usize;
    let taus = &env.taus()[offset..offset + n];
    let lambda = taus.iter().map(|t| 1.0 / t).fold(0.0, f64::max);
    let side: Vec<f64> = taus.iter().map(|t| 0.5 / (t * lambda)).collect();
    let stay: Vec<f64> = side.iter().map(|a| 1.0 - 2.0 * a).collect();

    let weights: Vec<PoissonWeights> = times
        .iter()
        .map(|&t| PoissonWeights::new(lambda * t, POISSON_TOL))
        .collect();
    let last = weights.iter().map(PoissonWeights::right).max().unwrap_or(0);

    let src = (source + k) as usize;
    let tgt = (target + k) as usize;
    let mut cur = vec![0.0; n];
    cur[src] = 1.0;
    let (mut lo, mut hi) = (src, src);
    let mut killed = 0.0;

    let mut values = vec![0.0; times.len()];
    let mut absorbed = vec![0.0; times.len()];
    let mut dists = keep_distributions.then(|| vec![vec![0.0; n]; times.len()]);

    for step in 0..=last {
        if step > 0 {
            killed += cur[0] * side[0] + cur[n - 1] * side[n - 1];
            let nlo = lo.saturating_sub(1);
            let nhi = (hi + 1).min(n - 1);
            let mut left_old = 0.0;
            for i in nlo..=nhi {
                let old = cur[i];
                let right = if i + 1 < n { cur[i + 1] * side[i + 1] } else { 0.0 };
                let from_left = if i > 0 { left_old * side[i - 1] } else { 0.0 };
                let mut v = old * stay[i] + from_left + right;
                if v != 0.0 && v < FLUSH {
                    killed += v;
                    v = 0.0;
                }
                cur[i] = v;
                left_old = old;
            }
            lo = nlo;
            hi = nhi;
            while lo < hi && cur[lo] == 0.0 {
                lo += 1;
            }
            while hi > lo && cur[hi] == 0.0 {
                hi -= 1;
            }
        }
        for (i, w) in weights.iter().enumerate() {
            let wk = w.weight(step);
            if wk == 0.0 {
                continue;
            }
            values[i] += wk * cur[tgt];
            absorbed[i] += wk * killed;
            if let Some(d) = dists.as_mut() {
                for (acc, p) in d[i][lo..=hi].iter_mut().zip(&cur[lo..=hi]) {
                    *acc += wk * p;
                }
            }
        }
    }
    Ok(BtmSolution {
        half_width,
        source,
        target,
        times: times.to_vec(),
        values,
        absorbed,
        tails: weights.iter().map(|w| w.tail).collect(),
        distributions: dists,
    })
}

/// Quenched on-diagonal kernel `p_t(0, 0)` with automatic window sizing.
pub fn btm_kernel(env: &TrapEnvironment, times: &[f64], exit_tol: f64) -> Result<HeatKernelSeries> {
    btm_kernel_pair(env, 0, 0, times, exit_tol)
}

/// Quenched kernel `p_t(x, y) = P_x(X_t = y) / τ_y`.
///
/// The half-width starts at [`initial_half_width`] and doubles until the
/// probability of leaving the window by the last time is below
/// `exit_tol · P_x(X_t = y)` at every requested time.
pub fn btm_kernel_pair(
    env: &TrapEnvironment,
    x: i64,
    y: i64,
    times: &[f64],
    exit_tol: f64,
) -> Result<HeatKernelSeries> {
    if !(exit_tol > 0.0) {
        return Err(Error::param("exit_tol", format!("{exit_tol} is not positive")));
    }
    if times.is_empty() {
        return Err(Error::Range("empty time grid".into()));
    }
    let sol = solve_auto(env, x, y, times, exit_tol, false)?;
    let tau_y = env.tau(y)?;
    let mut series = HeatKernelSeries::new("btm", x, y, Method::Uniformization)
        .with_param("alpha", env.alpha())
        .with_param("seed", env.seed())
        .with_param("K", sol.half_width);
    for (i, &t) in times.iter().enumerate() {
        series.points.push(SeriesPoint {
            time: t,
            value: sol.values[i] / tau_y,
            error: sol.error(i) / tau_y,
        });
    }
    Ok(series)
}

pub(crate) fn solve_auto(
    env: &TrapEnvironment,
    x: i64,
    y: i64,
    times: &[f64],
    exit_tol: f64,
    keep_distributions: bool,
) -> Result<BtmSolution> {
    let t_max = times.iter().copied().fold(0.0, f64::max);
    let window = env.window();
    let available = (-window.lo).min(window.hi).max(0) as usize;
    let needed = (x.unsigned_abs().max(y.unsigned_abs()) + 2) as usize;
    let limit = available.min(MAX_HALF_WIDTH);
    if needed > limit {
        return Err(Error::Resource {
            reason: format!("environment window {window} too small for sites {x}, {y}"),
            best_window: None,
        });
    }
    let mut k = initial_half_width(env.alpha(), t_max).max(needed).min(limit);
    loop {
        let sol = btm_transient(env, x, y, times, k, keep_distributions)?;
        let worst = sol
            .values
            .iter()
            .zip(&sol.absorbed)
            .map(|(&p, &a)| if a == 0.0 { 0.0 } else { a / p })
            .fold(0.0, f64::max);
        if worst <= exit_tol {
            return Ok(sol);
        }
        if k == limit {
            return Err(Error::Resource {
                reason: format!(
                    "exit probability {worst:.3e} of the truncated walk exceeds {exit_tol:.1e} \
                     within environment window {window}"
                ),
                best_window: Some(k),
            });
        }
        k = (2 * k).min(limit);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::{sample_traps, Window};

    #[test]
    fn constant_environment_is_a_lazy_free_walk() {
        // τ ≡ 1: jumps at rate 1, so P_0(X_t = 0) = e^{-t} I_0(t).
        let env = TrapEnvironment::constant(Window::symmetric(400), 1.0).unwrap();
        let times = [0.5, 2.0, 10.0, 50.0];
        let s = btm_kernel(&env, &times, 1e-10).unwrap();
        for p in &s.points {
            let exact = bessel_i0_scaled(p.time);
            assert!((p.value - exact).abs() < 1e-12, "t={} {} {}", p.time, p.value, exact);
        }
    }

    /// `e^{-x} I_0(x)` from its power series (adequate for x ≤ 60).
    fn bessel_i0_scaled(x: f64) -> f64 {
        let mut term = (-x).exp();
        let mut sum = term;
        for k in 1..400 {
            term *= (x / 2.0).powi(2) / (k as f64 * k as f64);
            sum += term;
        }
        sum
    }

    #[test]
    fn killed_mass_bounds_truncation_error() {
        let env = sample_traps(0.6, Window::symmetric(600), 9).unwrap();
        let times = [10.0, 100.0, 1000.0];
        let small = btm_transient(&env, 0, 0, &times, 20, false).unwrap();
        let big = btm_transient(&env, 0, 0, &times, 500, false).unwrap();
        for i in 0..times.len() {
            assert!((big.values[i] - small.values[i]).abs() <= small.error(i) + big.error(i));
        }
        assert!(small.absorbed[2] > big.absorbed[2]);
    }

    #[test]
    fn small_window_is_a_resource_error() {
        let env = sample_traps(2.0, Window::symmetric(30), 1).unwrap();
        let err = btm_kernel(&env, &[1e4], 1e-8).unwrap_err();
        assert!(matches!(err, Error::Resource { best_window: Some(30), .. }), "{err}");
    }

    #[test]
    fn distributions_sum_to_one_minus_killed() {
        let env = sample_traps(1.5, Window::symmetric(200), 4).unwrap();
        let sol = btm_transient(&env, 3, 3, &[5.0, 80.0], 100, true).unwrap();
        let d = sol.distributions.as_ref().unwrap();
        for (i, row) in d.iter().enumerate() {
            let s: f64 = row.iter().sum();
            assert!(s <= 1.0 + 1e-12 && s >= 1.0 - sol.error(i) - 1e-12);
        }
    }
}
