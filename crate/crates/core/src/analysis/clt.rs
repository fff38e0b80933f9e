use std::f64::consts::PI;

use super::fit::TimeWindow;
use crate::env::TrapEnvironment;
use crate::error::{Error, Result};
use crate::kernel::btm::solve_auto;

/// Settings for [`local_clt_error`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CltOptions {
    /// Equally spaced times across the interval, endpoints included.
    pub grid_points: usize,
    /// Rescale the kernel by `η(s) = 1 / Σ_z p_s(0, z)` before comparing.
    /// The rescaled kernel has total mass one against counting measure,
    /// which is what a single Gaussian density can match when `E[τ] ≠ 1`.
    pub normalize: bool,
    /// Window-exit tolerance passed to the trap solver.
    pub exit_tol: f64,
}

impl Default for CltOptions {
    fn default() -> Self {
        CltOptions {
            grid_points: 9,
            normalize: false,
            exit_tol: 1e-8,
        }
    }
}

/// Distance between the rescaled trap kernel and a fitted Gaussian.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalClt {
    pub lambda: f64,
    pub x0: f64,
    pub interval: TimeWindow,
    pub sigma2: f64,
    pub sup_error: f64,
    /// `(x, t)` where the supremum is attained.
    pub worst: (f64, f64),
    /// Truncation half-width used by the solver.
    pub half_width: usize,
    /// `η` per grid time (all ones without normalization).
    pub normalization: Vec<f64>,
}

/// `sup_{|x| ≤ x0, t ∈ I} |λ p_{λ²t}(0, ⌊λx⌋) - g_{σ²t}(x)|` on a time grid,
/// with `σ²` fitted so the two agree at `x = 0` and the midpoint of `I`.
///
/// For fixed `y = ⌊λx⌋` the kernel term is constant on a cell of length
/// `1/λ` on which the Gaussian is monotone, so the supremum over `x` is
/// taken at cell endpoints.
pub fn local_clt_error(
    env: &TrapEnvironment,
    lambda: f64,
    x0: f64,
    interval: TimeWindow,
    options: &CltOptions,
) -> Result<LocalClt> {
    if !(lambda >= 1.0) || !lambda.is_finite() {
        return Err(Error::param("lambda", format!("{lambda} is not a finite scale ≥ 1")));
    }
    if !(x0 >= 0.0) || !x0.is_finite() {
        return Err(Error::param("x0", format!("{x0} is not a finite non-negative real")));
    }
    if options.grid_points < 2 {
        return Err(Error::param("grid_points", "need at least the two endpoints"));
    }
    let g = options.grid_points;
    let mut times: Vec<f64> = (0..g)
        .map(|j| interval.lo + (interval.hi - interval.lo) * j as f64 / (g - 1) as f64)
        .collect();
    let mid = interval.midpoint();
    times.push(mid);
    let solve_times: Vec<f64> = times.iter().map(|t| lambda * lambda * t).collect();
    let sol = solve_auto(env, 0, 0, &solve_times, options.exit_tol, true)?;
    let k = sol.half_width as i64;
    let dists = sol.distributions.as_ref().expect("distributions were requested");
    let window = env.window();
    let taus = &env.taus()[(-k - window.lo) as usize..][..(2 * k + 1) as usize];

    // `λ p_{λ²t}(0, y)` for every solved time, indexed by `y + K`.
    let scaled: Vec<Vec<f64>> = dists
        .iter()
        .map(|row| row.iter().zip(taus).map(|(p, tau)| lambda * p / tau).collect())
        .collect();
    let normalization: Vec<f64> = scaled
        .iter()
        .map(|row| {
            if options.normalize {
                lambda / row.iter().sum::<f64>()
            } else {
                1.0
            }
        })
        .collect();

    let at_mid = normalization[g] * scaled[g][k as usize];
    let sigma2 = 1.0 / (2.0 * PI * mid * at_mid * at_mid);

    let y_lo = (-lambda * x0).floor() as i64;
    let y_hi = (lambda * x0).floor() as i64;
    if y_lo <= -k || y_hi >= k {
        return Err(Error::Resource {
            reason: format!("sites up to ⌊λ x0⌋ = {y_hi} reach the solver window K = {k}"),
            best_window: Some(sol.half_width),
        });
    }
    let mut sup_error = 0.0;
    let mut worst = (0.0, times[0]);
    for (j, &t) in times.iter().enumerate().take(g) {
        let var = sigma2 * t;
        let gauss = |x: f64| (-x * x / (2.0 * var)).exp() / (2.0 * PI * var).sqrt();
        for y in y_lo..=y_hi {
            let value = normalization[j] * scaled[j][(y + k) as usize];
            let left = (y as f64 / lambda).max(-x0);
            let right = ((y + 1) as f64 / lambda).min(x0);
            for x in [left, right] {
                let err = (value - gauss(x)).abs();
                if err > sup_error {
                    sup_error = err;
                    worst = (x, t);
                }
            }
        }
    }
    Ok(LocalClt {
        lambda,
        x0,
        interval,
        sigma2,
        sup_error,
        worst,
        half_width: sol.half_width,
        normalization: normalization[..g].to_vec(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::Window;

    #[test]
    fn on_diagonal_specialization() {
        let env = TrapEnvironment::constant(Window::symmetric(2000), 1.0).unwrap();
        let i = TimeWindow::new(1.0, 2.0).unwrap();
        let r = local_clt_error(&env, 10.0, 0.0, i, &CltOptions::default()).unwrap();
        // At x0 = 0 the midpoint matches exactly by construction.
        assert!(r.sup_error < 0.05);
        assert!(r.worst.0 == 0.0);
    }

    #[test]
    fn constant_environment_converges() {
        let env = TrapEnvironment::constant(Window::symmetric(4000), 1.0).unwrap();
        let i = TimeWindow::new(0.5, 1.5).unwrap();
        let opts = CltOptions::default();
        let errs: Vec<f64> = [5.0, 10.0, 20.0]
            .iter()
            .map(|&l| local_clt_error(&env, l, 1.0, i, &opts).unwrap().sup_error)
            .collect();
        assert!(errs[0] > errs[1] && errs[1] > errs[2], "{errs:?}");
        let r = local_clt_error(&env, 20.0, 1.0, i, &opts).unwrap();
        // Rate-1 jumps: diffusivity one.
        assert!((r.sigma2 - 1.0).abs() < 0.01, "{}", r.sigma2);
    }
}
