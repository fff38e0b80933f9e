use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::kernel::HeatKernelSeries;

/// Closed time interval `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeWindow {
    pub lo: f64,
    pub hi: f64,
}

impl TimeWindow {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo > 0.0 && hi >= lo && hi.is_finite()) {
            return Err(Error::param("window", format!("[{lo}, {hi}] is not a positive interval")));
        }
        Ok(TimeWindow { lo, hi })
    }

    pub fn contains(&self, t: f64) -> bool {
        self.lo <= t && t <= self.hi
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }
}

/// Least-squares fit of `-log p = slope · log t + intercept`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExponentFit {
    pub slope: f64,
    pub intercept: f64,
    pub stderr: f64,
    pub window: TimeWindow,
    /// `(t, observed - fitted)` in `-log p` units.
    pub residuals: Vec<(f64, f64)>,
}

impl ExponentFit {
    pub fn points(&self) -> usize {
        self.residuals.len()
    }

    /// Fitted kernel value at `t`.
    pub fn predict(&self, t: f64) -> f64 {
        (-(self.slope * t.ln() + self.intercept)).exp()
    }

    pub fn residual_rms(&self) -> f64 {
        let n = self.residuals.len() as f64;
        (self.residuals.iter().map(|r| r.1 * r.1).sum::<f64>() / n).sqrt()
    }

    /// Residual table with the fit in the header.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# slope {}", self.slope);
        let _ = writeln!(out, "# intercept {}", self.intercept);
        let _ = writeln!(out, "# stderr {}", self.stderr);
        let _ = writeln!(out, "# window {} {}", self.window.lo, self.window.hi);
        out.push_str("time,residual\n");
        for (t, r) in &self.residuals {
            let _ = writeln!(out, "{t},{r}");
        }
        out
    }
}

pub fn fit_exponent(series: &HeatKernelSeries, window: TimeWindow) -> Result<ExponentFit> {
    let (t, p): (Vec<f64>, Vec<f64>) = series
        .points
        .iter()
        .filter(|pt| window.contains(pt.time))
        .map(|pt| (pt.time, pt.value))
        .unzip();
    fit_power_law(&t, &p, window)
}

/// Power-law fit on raw arrays; points outside `window` are ignored.
pub fn fit_power_law(times: &[f64], values: &[f64], window: TimeWindow) -> Result<ExponentFit> {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut ts = Vec::new();
    for (&t, &p) in times.iter().zip(values) {
        if !window.contains(t) {
            continue;
        }
        if !(p > 0.0) || !p.is_finite() {
            return Err(Error::Data(format!("value {p} at t = {t} is not positive")));
        }
        ts.push(t);
        xs.push(t.ln());
        ys.push(-p.ln());
    }
    let n = xs.len();
    if n < 8 {
        return Err(Error::Range(format!(
            "{n} points in [{}, {}]; need at least 8",
            window.lo, window.hi
        )));
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if !(sxx > 0.0) {
        return Err(Error::Range("all fit times coincide".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residuals: Vec<(f64, f64)> = ts
        .iter()
        .zip(xs.iter().zip(&ys))
        .map(|(&t, (x, y))| (t, y - (slope * x + intercept)))
        .collect();
    let ssr: f64 = residuals.iter().map(|r| r.1 * r.1).sum();
    let stderr = (ssr / (nf - 2.0) / sxx).sqrt();
    Ok(ExponentFit {
        slope,
        intercept,
        stderr,
        window,
        residuals,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_power_law() {
        let t: Vec<f64> = (1..=40).map(|k| k as f64 * 3.0).collect();
        let p: Vec<f64> = t.iter().map(|t| t.powf(-0.5)).collect();
        let f = fit_power_law(&t, &p, TimeWindow::new(1.0, 1e3).unwrap()).unwrap();
        assert!((f.slope - 0.5).abs() < 1e-13);
        assert!(f.intercept.abs() < 1e-12);
        assert!(f.residual_rms() < 1e-13);
        assert!(f.stderr.is_finite());
    }

    #[test]
    fn too_few_points_and_bad_values() {
        let t: Vec<f64> = (1..=7).map(f64::from).collect();
        let p = vec![1.0; 7];
        assert!(matches!(
            fit_power_law(&t, &p, TimeWindow::new(1.0, 10.0).unwrap()),
            Err(Error::Range(_))
        ));
        let t: Vec<f64> = (1..=10).map(f64::from).collect();
        let mut p = vec![1.0; 10];
        p[3] = 0.0;
        assert!(matches!(
            fit_power_law(&t, &p, TimeWindow::new(1.0, 10.0).unwrap()),
            Err(Error::Data(_))
        ));
    }
}
