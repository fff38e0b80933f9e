//! Heat kernels `p_t(x, y) = P_x(X_t = y) / μ_y`.
//!
//! Exact solvers iterate the transition operator (discrete time) or sum a
//! Poisson mixture of its powers (uniformization, continuous time). Every
//! point carries an error bound: Poisson truncation plus the mass absorbed at
//! a truncation boundary, divided by `μ_y`.

pub(crate) mod btm;
mod mc;
mod poisson;
mod walk;

use std::fmt::{self, Write as _};

pub use btm::{btm_kernel, btm_kernel_pair, btm_transient, initial_half_width, BtmSolution, MAX_HALF_WIDTH};
pub use mc::{mc_return_probability, mc_return_probability_at, McEstimate, McModel};
pub use poisson::PoissonWeights;
pub use walk::{
    ctmc_distributions, ctmc_kernel, discrete_distributions, srw_kernel_discrete,
    srw_kernel_discrete_absorbing, DiscreteRun,
};

use crate::error::{Error, Result};

/// How a series was computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    ExactIteration,
    Uniformization,
    MonteCarlo,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::ExactIteration => "exact-iteration",
            Method::Uniformization => "uniformization",
            Method::MonteCarlo => "monte-carlo",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact-iteration" => Ok(Method::ExactIteration),
            "uniformization" => Ok(Method::Uniformization),
            "monte-carlo" => Ok(Method::MonteCarlo),
            other => Err(Error::parse(0, format!("unknown method `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesPoint {
    pub time: f64,
    pub value: f64,
    /// Truncation bound or confidence half-width.
    pub error: f64,
}

/// Samples of `t ↦ p_t(source, target)`.
#[derive(Debug, Clone, PartialEq)]
pub struct HeatKernelSeries {
    pub model: String,
    pub source: i64,
    pub target: i64,
    pub method: Method,
    pub points: Vec<SeriesPoint>,
    /// Model parameters and seeds, written to the CSV header.
    pub params: Vec<(String, String)>,
}

impl HeatKernelSeries {
    pub fn new(model: impl Into<String>, source: i64, target: i64, method: Method) -> Self {
        HeatKernelSeries {
            model: model.into(),
            source,
            target,
            method,
            points: Vec::new(),
            params: Vec::new(),
        }
    }

    pub fn with_param(mut self, key: impl Into<String>, value: impl fmt::Display) -> Self {
        self.params.push((key.into(), value.to_string()));
        self
    }

    pub fn times(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.time).collect()
    }

    pub fn values(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.value).collect()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Value at exactly `time`, if sampled.
    pub fn value_at(&self, time: f64) -> Option<f64> {
        self.points.iter().find(|p| p.time == time).map(|p| p.value)
    }

    /// Series restricted to times accepted by `keep`.
    pub fn filter_times(&self, keep: impl Fn(f64) -> bool) -> HeatKernelSeries {
        let mut out = self.clone();
        out.points.retain(|p| keep(p.time));
        out
    }

    /// CSV with `#` comment header; columns `time,value,error,method`.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# model {}", self.model);
        let _ = writeln!(out, "# source {}", self.source);
        let _ = writeln!(out, "# target {}", self.target);
        let _ = writeln!(out, "# method {}", self.method);
        for (k, v) in &self.params {
            let _ = writeln!(out, "# param {k} {v}");
        }
        out.push_str("time,value,error,method\n");
        for p in &self.points {
            let _ = writeln!(out, "{},{},{},{}", p.time, p.value, p.error, self.method);
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut series = HeatKernelSeries::new("", 0, 0, Method::ExactIteration);
        let mut method = None;
        let mut saw_header = false;
        for (ln, raw) in text.lines().enumerate() {
            let line_no = ln + 1;
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                let rest = rest.trim_start();
                let (key, value) = rest.split_once(' ').unwrap_or((rest, ""));
                match key {
                    "model" => series.model = value.to_string(),
                    "source" => series.source = parse(value, line_no)?,
                    "target" => series.target = parse(value, line_no)?,
                    "method" => {
                        method = Some(value.parse().map_err(|_| Error::parse(line_no, "bad method"))?)
                    }
                    "param" => {
                        let (k, v) = value.split_once(' ').unwrap_or((value, ""));
                        series.params.push((k.to_string(), v.to_string()));
                    }
                    _ => {}
                }
                continue;
            }
            if !saw_header {
                if line != "time,value,error,method" {
                    return Err(Error::parse(line_no, "expected column header"));
                }
                saw_header = true;
                continue;
            }
            let cols: Vec<&str> = line.split(',').collect();
            if cols.len() != 4 {
                return Err(Error::parse(line_no, "expected 4 columns"));
            }
            let m: Method = cols[3].parse().map_err(|_| Error::parse(line_no, "bad method"))?;
            if method.is_some_and(|prev| prev != m) {
                return Err(Error::parse(line_no, "method differs from the rest of the series"));
            }
            method = Some(m);
            series.points.push(SeriesPoint {
                time: parse(cols[0], line_no)?,
                value: parse(cols[1], line_no)?,
                error: parse(cols[2], line_no)?,
            });
        }
        if !saw_header {
            return Err(Error::parse(0, "missing column header"));
        }
        if let Some(m) = method {
            series.method = m;
        }
        Ok(series)
    }
}

fn parse<T: std::str::FromStr>(tok: &str, line: usize) -> Result<T>
where
    T::Err: fmt::Display,
{
    tok.trim()
        .parse()
        .map_err(|e| Error::parse(line, format!("`{tok}`: {e}")))
}

/// Quarter-octave time grid `t₀ 2^{k/4}` for `k = 0, 1, ...` up to `t_max`.
pub fn dyadic_grid(t0: f64, t_max: f64, per_octave: u32) -> Vec<f64> {
    let mut out = Vec::new();
    let mut k = 0;
    loop {
        let t = t0 * 2f64.powf(k as f64 / per_octave as f64);
        if t > t_max * (1.0 + 1e-12) {
            break;
        }
        out.push(t);
        k += 1;
    }
    out
}

/// Dyadic grid anchored at its upper end: `t_max · 2^{-k/per_octave}` down
/// to `t_min`, returned in increasing order with `t_max` exact.
pub fn dyadic_grid_ending_at(t_min: f64, t_max: f64, per_octave: u32) -> Vec<f64> {
    let mut out = Vec::new();
    let mut k = 0;
    loop {
        let t = t_max * 2f64.powf(-(k as f64) / per_octave as f64);
        if t < t_min * (1.0 - 1e-12) {
            break;
        }
        out.push(t);
        k += 1;
    }
    out.reverse();
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip() {
        let mut s = HeatKernelSeries::new("btm", 0, 0, Method::Uniformization)
            .with_param("alpha", 0.5)
            .with_param("seed", 17);
        for k in 1..20 {
            s.points.push(SeriesPoint {
                time: k as f64 * 0.37,
                value: 1.0 / (k as f64).sqrt(),
                error: 1e-13 * k as f64,
            });
        }
        let text = s.to_csv();
        let back = HeatKernelSeries::from_csv(&text).unwrap();
        assert_eq!(back, s);
        assert_eq!(back.to_csv(), text);
    }

    #[test]
    fn dyadic_grid_spacing() {
        let g = dyadic_grid(1.0, 16.0, 4);
        assert_eq!(g.len(), 17);
        assert!((g[4] - 2.0).abs() < 1e-12);
        assert!((g[16] - 16.0).abs() < 1e-9);
    }
}
