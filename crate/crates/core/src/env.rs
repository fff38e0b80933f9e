//! One-dimensional Bouchaud trap environments.
//!
//! A [`TrapEnvironment`] holds i.i.d. Pareto depths `τ_x` with
//! `P(τ_x > u) = u^{-α}` for `u ≥ 1` on a finite window of `ℤ`. Each site is
//! seeded independently from `(seed, x)`, so growing the window never changes
//! values that were already drawn.

use std::fmt::{self, Write as _};

use crate::error::{Error, Result};
use crate::seed;

/// Closed integer interval `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Window {
    pub lo: i64,
    pub hi: i64,
}

impl Window {
    pub fn new(lo: i64, hi: i64) -> Result<Self> {
        if lo > hi {
            return Err(Error::param("window", format!("[{lo}, {hi}] is empty")));
        }
        Ok(Window { lo, hi })
    }

    /// `[-k, k]`
    pub fn symmetric(k: usize) -> Self {
        Window {
            lo: -(k as i64),
            hi: k as i64,
        }
    }

    pub fn len(&self) -> usize {
        (self.hi - self.lo + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, x: i64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn contains_window(&self, other: &Window) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }
}

impl fmt::Display for Window {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

/// A seeded realization of the trap depths on a window.
#[derive(Debug, Clone, PartialEq)]
pub struct TrapEnvironment {
    alpha: f64,
    seed: u64,
    window: Window,
    taus: Vec<f64>,
}

/// Depth of the trap at `x` for the environment `(alpha, seed)`.
#[inline]
fn site_depth(alpha: f64, seed: u64, x: i64) -> f64 {
    let u = seed::unit_open(seed::derive(seed, x as u64));
    u.powf(-1.0 / alpha)
}

/// Samples `τ_x = U_x^{-1/α}` on every site of `window`.
pub fn sample_traps(alpha: f64, window: Window, seed: u64) -> Result<TrapEnvironment> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::param("alpha", format!("{alpha} is not a positive real")));
    }
    let taus = (window.lo..=window.hi)
        .map(|x| site_depth(alpha, seed, x))
        .collect();
    Ok(TrapEnvironment {
        alpha,
        seed,
        window,
        taus,
    })
}

impl TrapEnvironment {
    /// Builds an environment from explicit depths (synthetic or parsed).
    pub fn from_depths(alpha: f64, seed: u64, window: Window, taus: Vec<f64>) -> Result<Self> {
        if !(alpha > 0.0) {
            return Err(Error::param("alpha", format!("{alpha} is not a positive real")));
        }
        if taus.len() != window.len() {
            return Err(Error::param(
                "taus",
                format!("{} depths for a window of {} sites", taus.len(), window.len()),
            ));
        }
        if let Some(bad) = taus.iter().find(|t| !(**t > 0.0) || !t.is_finite()) {
            return Err(Error::param("taus", format!("depth {bad} is not positive")));
        }
        Ok(TrapEnvironment {
            alpha,
            seed,
            window,
            taus,
        })
    }

    /// Synthetic environment with every depth equal to `value`; its `alpha`
    /// is infinite (the degenerate limit of the Pareto law).
    pub fn constant(window: Window, value: f64) -> Result<Self> {
        Self::from_depths(f64::INFINITY, 0, window, vec![value; window.len()])
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn window(&self) -> Window {
        self.window
    }

    /// Depths in window order, `taus()[i]` belongs to site `window.lo + i`.
    pub fn taus(&self) -> &[f64] {
        &self.taus
    }

    pub fn tau(&self, x: i64) -> Result<f64> {
        if !self.window.contains(x) {
            return Err(Error::OutOfRange {
                requested: x.to_string(),
                window: self.window.to_string(),
            });
        }
        Ok(self.taus[(x - self.window.lo) as usize])
    }

    /// Returns a copy covering `window`, which must contain the current window.
    ///
    /// New sites are drawn with the same per-site seeding, so the result is
    /// identical to sampling `window` directly.
    pub fn extend(&self, window: Window) -> Result<TrapEnvironment> {
        if !window.contains_window(&self.window) {
            return Err(Error::param(
                "window",
                format!("{window} does not contain {}", self.window),
            ));
        }
        let mut taus = Vec::with_capacity(window.len());
        for x in window.lo..=window.hi {
            if self.window.contains(x) {
                taus.push(self.taus[(x - self.window.lo) as usize]);
            } else {
                taus.push(site_depth(self.alpha, self.seed, x));
            }
        }
        Ok(TrapEnvironment {
            alpha: self.alpha,
            seed: self.seed,
            window,
            taus,
        })
    }

    /// Writes the text dump: `#` header lines then one `x tau` record per site.
    pub fn to_dump(&self) -> String {
        let mut out = String::with_capacity(self.taus.len() * 24 + 64);
        out.push_str("# heatlab trap-environment\n");
        let _ = writeln!(out, "# alpha {}", self.alpha);
        let _ = writeln!(out, "# seed {}", self.seed);
        let _ = writeln!(out, "# window {} {}", self.window.lo, self.window.hi);
        for (i, t) in self.taus.iter().enumerate() {
            let _ = writeln!(out, "{} {}", self.window.lo + i as i64, t);
        }
        out
    }

    pub fn from_dump(text: &str) -> Result<TrapEnvironment> {
        let mut alpha = None;
        let mut seed = None;
        let mut window = None;
        let mut taus = Vec::new();
        for (ln, line) in text.lines().enumerate() {
            let line_no = ln + 1;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                let mut it = rest.split_whitespace();
                match it.next() {
                    Some("alpha") => alpha = Some(parse_num::<f64>(it.next(), line_no)?),
                    Some("seed") => seed = Some(parse_num::<u64>(it.next(), line_no)?),
                    Some("window") => {
                        let lo = parse_num::<i64>(it.next(), line_no)?;
                        let hi = parse_num::<i64>(it.next(), line_no)?;
                        window = Some(Window::new(lo, hi).map_err(|e| Error::parse(line_no, e))?);
                    }
                    _ => {}
                }
                continue;
            }
            let w = window.ok_or_else(|| Error::parse(line_no, "record before window header"))?;
            let mut it = line.split_whitespace();
            let x = parse_num::<i64>(it.next(), line_no)?;
            let t = parse_num::<f64>(it.next(), line_no)?;
            if x != w.lo + taus.len() as i64 {
                return Err(Error::parse(line_no, format!("site {x} out of order")));
            }
            taus.push(t);
        }
        let alpha = alpha.ok_or_else(|| Error::parse(0, "missing alpha header"))?;
        let seed = seed.ok_or_else(|| Error::parse(0, "missing seed header"))?;
        let window = window.ok_or_else(|| Error::parse(0, "missing window header"))?;
        TrapEnvironment::from_depths(alpha, seed, window, taus)
    }
}

fn parse_num<T: std::str::FromStr>(tok: Option<&str>, line: usize) -> Result<T>
where
    T::Err: fmt::Display,
{
    let tok = tok.ok_or_else(|| Error::parse(line, "missing field"))?;
    tok.parse::<T>().map_err(|e| Error::parse(line, format!("`{tok}`: {e}")))
}

/// `V(x, n) = Σ_{y=x-n}^{x+n} τ_y`.
pub fn volume(env: &TrapEnvironment, x: i64, n: u64) -> Result<f64> {
    let n = n as i64;
    let span = Window {
        lo: x - n,
        hi: x + n,
    };
    if !env.window.contains_window(&span) {
        return Err(Error::OutOfRange {
            requested: span.to_string(),
            window: env.window.to_string(),
        });
    }
    let start = (span.lo - env.window.lo) as usize;
    Ok(env.taus[start..start + span.len()].iter().sum())
}

/// Leading-order on-diagonal decay profile `φ_α(t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhiValue {
    pub t: f64,
    pub alpha: f64,
    pub value: f64,
}

/// `t^{-1/(1+α)}` for `α < 1`, `(t log t)^{-1/2}` for `α = 1`, `t^{-1/2}` for `α > 1`.
pub fn phi_alpha(t: f64, alpha: f64) -> Result<PhiValue> {
    if !(alpha > 0.0) {
        return Err(Error::param("alpha", format!("{alpha} is not a positive real")));
    }
    if !(t > 0.0) {
        return Err(Error::Domain(format!("phi_alpha needs t > 0, got {t}")));
    }
    let value = if alpha < 1.0 {
        t.powf(-1.0 / (1.0 + alpha))
    } else if alpha == 1.0 {
        if t <= 1.0 {
            return Err(Error::Domain(format!(
                "phi_alpha with alpha = 1 needs t > 1, got {t}"
            )));
        }
        (t * t.ln()).powf(-0.5)
    } else {
        t.powf(-0.5)
    };
    Ok(PhiValue { t, alpha, value })
}

/// Hill estimator of the tail index from the `k` largest depths.
pub fn hill_estimate(env: &TrapEnvironment, k: usize) -> Result<f64> {
    hill_from_sample(env.taus(), k)
}

pub(crate) fn hill_from_sample(sample: &[f64], k: usize) -> Result<f64> {
    let n = sample.len();
    if k <= 1 || k >= n {
        return Err(Error::param("k", format!("need 1 < k < {n}, got {k}")));
    }
    let mut sorted = sample.to_vec();
    sorted.sort_unstable_by(|a, b| b.total_cmp(a));
    let threshold = sorted[k].ln();
    let h = sorted[..k].iter().map(|v| v.ln() - threshold).sum::<f64>() / k as f64;
    if !(h > 0.0) {
        return Err(Error::Estimation(
            "top order statistics are all equal".to_string(),
        ));
    }
    Ok(1.0 / h)
}
