use std::f64::consts::PI;

use super::fit::{fit_power_law, TimeWindow};
use crate::error::{Error, Result};
use crate::kernel::HeatKernelSeries;

/// A periodogram peak counts when it is this many times the median power.
pub const PEAK_FACTOR: f64 = 10.0;
/// Peaks below this power are round-off, whatever the median.
const POWER_FLOOR: f64 = 1e-24;

/// Log-periodic structure of `t^θ p_t`.
#[derive(Debug, Clone, PartialEq)]
pub struct OscillationStats {
    pub theta: f64,
    /// `(t, t^θ p_t)`
    pub normalized: Vec<(f64, f64)>,
    /// `(start of decade, max / min of the normalized series on it)`
    pub decade_ratios: Vec<(f64, f64)>,
    /// Period in `log t` of the strongest periodogram line.
    pub log_period: f64,
    pub peak_power: f64,
    /// Median periodogram power.
    pub noise_floor: f64,
    /// RMS residual of the power-law fit to the normalized series.
    pub residual_rms: f64,
}

impl OscillationStats {
    /// Largest per-decade max/min ratio.
    pub fn max_ratio(&self) -> f64 {
        self.decade_ratios.iter().map(|d| d.1).fold(1.0, f64::max)
    }

    /// Whether the peak stands clear of the noise floor.
    pub fn has_peak(&self) -> bool {
        self.peak_power > POWER_FLOOR && self.peak_power >= PEAK_FACTOR * self.noise_floor
    }
}

pub fn oscillation_profile(series: &HeatKernelSeries, theta: f64) -> Result<OscillationStats> {
    if !(theta > 0.0) {
        return Err(Error::param("theta", format!("{theta} is not positive")));
    }
    let pts: Vec<(f64, f64)> = series
        .points
        .iter()
        .filter(|p| p.time > 0.0)
        .map(|p| (p.time, p.value))
        .collect();
    if let Some(bad) = pts.iter().find(|p| !(p.1 > 0.0)) {
        return Err(Error::Data(format!("value {} at t = {} is not positive", bad.1, bad.0)));
    }
    if pts.len() < 8 {
        return Err(Error::Range(format!("{} points; need at least 8", pts.len())));
    }
    let t_min = pts[0].0;
    let t_max = pts[pts.len() - 1].0;
    if t_max / t_min < 100.0 * (1.0 - 1e-12) {
        return Err(Error::Range(format!(
            "series spans [{t_min}, {t_max}], less than two decades"
        )));
    }
    let normalized: Vec<(f64, f64)> = pts.iter().map(|&(t, p)| (t, t.powf(theta) * p)).collect();

    let mut decade_ratios = Vec::new();
    let mut start = t_min;
    while start * 10.0 <= t_max * (1.0 + 1e-12) {
        let end = start * 10.0;
        let vals: Vec<f64> = normalized
            .iter()
            .filter(|p| p.0 >= start && p.0 <= end * (1.0 + 1e-12))
            .map(|p| p.1)
            .collect();
        if vals.len() >= 2 {
            let hi = vals.iter().copied().fold(f64::MIN, f64::max);
            let lo = vals.iter().copied().fold(f64::MAX, f64::min);
            decade_ratios.push((start, hi / lo));
        }
        start = end;
    }

    let times: Vec<f64> = normalized.iter().map(|p| p.0).collect();
    let values: Vec<f64> = normalized.iter().map(|p| p.1).collect();
    let fit = fit_power_law(&times, &values, TimeWindow { lo: t_min, hi: t_max })?;
    let residual_rms = fit.residual_rms();

    // Resample the detrended log series on a uniform log-time grid.
    let xs: Vec<f64> = times.iter().map(|t| t.ln()).collect();
    let rs: Vec<f64> = fit.residuals.iter().map(|r| -r.1).collect();
    let n = xs.len().max(64);
    let span = xs[xs.len() - 1] - xs[0];
    let grid: Vec<f64> = (0..n).map(|j| xs[0] + span * j as f64 / (n - 1) as f64).collect();
    let mut k = 0;
    let mut sampled = Vec::with_capacity(n);
    for &g in &grid {
        while k + 2 < xs.len() && xs[k + 1] < g {
            k += 1;
        }
        let w = ((g - xs[k]) / (xs[k + 1] - xs[k])).clamp(0.0, 1.0);
        sampled.push(rs[k] * (1.0 - w) + rs[k + 1] * w);
    }
    let hann: Vec<f64> = (0..n)
        .map(|j| 0.5 - 0.5 * (2.0 * PI * j as f64 / (n - 1) as f64).cos())
        .collect();
    let norm: f64 = hann.iter().map(|w| w * w).sum();
    let windowed: Vec<f64> = sampled.iter().zip(&hann).map(|(r, w)| r * w).collect();
    let power_at = |f: f64| {
        let (mut re, mut im) = (0.0, 0.0);
        for (j, v) in windowed.iter().enumerate() {
            let phase = 2.0 * PI * f * (grid[j] - grid[0]);
            re += v * phase.cos();
            im -= v * phase.sin();
        }
        (re * re + im * im) / norm
    };

    // Frequencies in cycles per unit log t, from 1.5 cycles over the span to
    // the resampling Nyquist frequency, oversampled eightfold.
    let df = 1.0 / (8.0 * span);
    let f_lo = 1.5 / span;
    let f_hi = 0.5 * (n - 1) as f64 / span;
    let freqs: Vec<f64> = (0..)
        .map(|i| f_lo + i as f64 * df)
        .take_while(|&f| f <= f_hi)
        .collect();
    let powers: Vec<f64> = freqs.iter().map(|&f| power_at(f)).collect();
    let (best, &peak) = powers
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .ok_or_else(|| Error::Range("no frequency resolvable over the span".into()))?;
    let mut f_peak = freqs[best];
    if best > 0 && best + 1 < powers.len() {
        let (a, b, c) = (powers[best - 1], peak, powers[best + 1]);
        let denom = a - 2.0 * b + c;
        if denom < 0.0 {
            f_peak += 0.5 * (a - c) / denom * df;
        }
    }
    let mut sorted = powers.clone();
    sorted.sort_unstable_by(f64::total_cmp);
    let noise_floor = sorted[sorted.len() / 2];

    Ok(OscillationStats {
        theta,
        normalized,
        decade_ratios,
        log_period: 1.0 / f_peak,
        peak_power: peak,
        noise_floor,
        residual_rms,
    })
}
