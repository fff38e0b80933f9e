//! Combinatorial Laplacian spectra, the eigenvalue counting function, Weyl
//! ratios and multiplicity statistics.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};

use nalgebra::DMatrix;

use crate::analysis::{fit_power_law, ExponentFit, TimeWindow};
use crate::error::{Error, Result};
use crate::graph::{GraphDescriptor, WeightedGraph};

/// Largest matrix the dense eigensolver is asked to handle.
pub const DENSE_LIMIT: usize = 6000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundaryCondition {
    /// The full Laplacian.
    Neumann,
    /// Boundary rows and columns removed.
    Dirichlet,
}

impl BoundaryCondition {
    pub fn as_str(&self) -> &'static str {
        match self {
            BoundaryCondition::Neumann => "neumann",
            BoundaryCondition::Dirichlet => "dirichlet",
        }
    }
}

impl fmt::Display for BoundaryCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for BoundaryCondition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "neumann" => Ok(BoundaryCondition::Neumann),
            "dirichlet" => Ok(BoundaryCondition::Dirichlet),
            other => Err(Error::param("bc", format!("unknown boundary condition `{other}`"))),
        }
    }
}

/// Sorted Laplacian eigenvalues of one graph.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumResult {
    pub eigenvalues: Vec<f64>,
    pub bc: BoundaryCondition,
    pub descriptor: GraphDescriptor,
}

impl SpectrumResult {
    /// Wraps precomputed eigenvalues, sorting them.
    pub fn from_eigenvalues(mut eigenvalues: Vec<f64>, bc: BoundaryCondition, descriptor: GraphDescriptor) -> Result<Self> {
        if let Some(bad) = eigenvalues.iter().find(|v| !v.is_finite()) {
            return Err(Error::Data(format!("eigenvalue {bad} is not finite")));
        }
        eigenvalues.sort_unstable_by(f64::total_cmp);
        Ok(SpectrumResult {
            eigenvalues,
            bc,
            descriptor,
        })
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn max(&self) -> f64 {
        self.eigenvalues.last().copied().unwrap_or(0.0)
    }

    /// Smallest eigenvalue that is clearly nonzero.
    pub fn min_positive(&self) -> Option<f64> {
        let floor = zero_floor(self);
        self.eigenvalues.iter().copied().find(|&v| v > floor)
    }

    pub fn to_dump(&self) -> String {
        let mut out = String::from("# heatlab spectrum\n");
        self.descriptor.write_header(&mut out);
        let _ = writeln!(out, "# bc {}", self.bc);
        for v in &self.eigenvalues {
            let _ = writeln!(out, "{v}");
        }
        out
    }

    pub fn from_dump(text: &str) -> Result<Self> {
        let mut descriptor = GraphDescriptor::default();
        let mut bc = None;
        let mut eigenvalues = Vec::new();
        for (ln, raw) in text.lines().enumerate() {
            let line_no = ln + 1;
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                let mut it = rest.split_whitespace();
                match it.next() {
                    Some("bc") => {
                        let tok = it.next().ok_or_else(|| Error::parse(line_no, "missing bc"))?;
                        bc = Some(tok.parse().map_err(|_| Error::parse(line_no, "bad bc"))?);
                    }
                    Some(key) => descriptor.read_header(key, it, line_no)?,
                    None => {}
                }
                continue;
            }
            eigenvalues.push(
                line.parse::<f64>()
                    .map_err(|e| Error::parse(line_no, format!("`{line}`: {e}")))?,
            );
        }
        let bc = bc.ok_or_else(|| Error::parse(0, "missing bc header"))?;
        Self::from_eigenvalues(eigenvalues, bc, descriptor)
    }
}

/// Eigenvalues below this are numerically zero.
fn zero_floor(spec: &SpectrumResult) -> f64 {
    64.0 * f64::EPSILON * spec.len().max(1) as f64 * spec.max().max(1.0)
}

/// Kept vertex indices for a boundary condition.
fn kept_vertices(graph: &WeightedGraph, bc: BoundaryCondition) -> Result<Vec<usize>> {
    match bc {
        BoundaryCondition::Neumann => Ok((0..graph.len()).collect()),
        BoundaryCondition::Dirichlet => {
            if graph.boundary().is_empty() {
                return Err(Error::param("bc", "Dirichlet condition on a graph without boundary"));
            }
            let mut drop = vec![false; graph.len()];
            for &b in graph.boundary() {
                drop[b] = true;
            }
            let kept: Vec<usize> = (0..graph.len()).filter(|&v| !drop[v]).collect();
            if kept.is_empty() {
                return Err(Error::Range("every vertex is on the boundary".into()));
            }
            Ok(kept)
        }
    }
}

/// Dense combinatorial Laplacian (weighted degree minus conductance
/// matrix), restricted to the interior for Dirichlet conditions.
pub fn laplacian_matrix(graph: &WeightedGraph, bc: BoundaryCondition) -> Result<DMatrix<f64>> {
    let kept = kept_vertices(graph, bc)?;
    let mut index = vec![usize::MAX; graph.len()];
    for (i, &v) in kept.iter().enumerate() {
        index[v] = i;
    }
    let n = kept.len();
    if n > DENSE_LIMIT {
        return Err(Error::Resource {
            reason: format!("{n}×{n} Laplacian exceeds the dense solver limit {DENSE_LIMIT}"),
            best_window: None,
        });
    }
    let mut m = DMatrix::zeros(n, n);
    for (i, &u) in kept.iter().enumerate() {
        for &(v, c) in graph.neighbors(u) {
            m[(i, i)] += c;
            if index[v] != usize::MAX {
                m[(i, index[v])] -= c;
            }
        }
    }
    Ok(m)
}

/// Full Laplacian spectrum by a dense symmetric eigensolve.
pub fn laplacian_spectrum(graph: &WeightedGraph, bc: BoundaryCondition) -> Result<SpectrumResult> {
    let m = laplacian_matrix(graph, bc)?;
    let mut eig: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
    // The Laplacian is positive semidefinite; round-off below zero is clipped.
    for v in &mut eig {
        if *v < 0.0 {
            *v = 0.0;
        }
    }
    SpectrumResult::from_eigenvalues(eig, bc, graph.descriptor().clone())
}

/// Spectrum of the Cartesian product of two graphs: all pairwise sums.
pub fn product_spectrum(a: &SpectrumResult, b: &SpectrumResult, descriptor: GraphDescriptor) -> Result<SpectrumResult> {
    if a.bc != b.bc {
        return Err(Error::param("bc", "factor spectra use different boundary conditions"));
    }
    let sums = a
        .eigenvalues
        .iter()
        .flat_map(|&x| b.eigenvalues.iter().map(move |&y| x + y))
        .collect();
    SpectrumResult::from_eigenvalues(sums, a.bc, descriptor)
}

/// `ρ(x)`: eigenvalues `≤ x`, with multiplicity.
pub fn counting_function(spec: &SpectrumResult, x: f64) -> usize {
    spec.eigenvalues.partition_point(|&v| v <= x)
}

/// `ρ(x) / x^{exponent}` on a grid, with a summary over the top reliable decade.
#[derive(Debug, Clone, PartialEq)]
pub struct WeylRatio {
    pub exponent: f64,
    /// `(x, ρ(x), ratio)` for every grid point inside the spectrum.
    pub points: Vec<(f64, usize, f64)>,
    /// Upper end of the reliable range (the `⌈√N⌉`-th eigenvalue).
    pub reliable_max: f64,
    /// Decade `[lo, hi]` used for the summary.
    pub decade: (f64, f64),
    pub max: f64,
    pub min: f64,
}

impl WeylRatio {
    pub fn max_over_min(&self) -> f64 {
        self.max / self.min
    }
}

/// Weyl ratio series.
///
/// Only the low part of a finite spectrum tracks the continuum counting
/// function; the reliable range is `(λ_min⁺, λ_{⌈√N⌉}]`, and the summary is
/// taken over its top decade.
pub fn weyl_ratio(spec: &SpectrumResult, exponent: f64, x_grid: &[f64]) -> Result<WeylRatio> {
    if !(exponent > 0.0) {
        return Err(Error::param("exponent", format!("{exponent} is not positive")));
    }
    let lo = spec
        .min_positive()
        .ok_or_else(|| Error::Range("spectrum has no positive eigenvalue".into()))?;
    let hi = spec.max();
    let points: Vec<(f64, usize, f64)> = x_grid
        .iter()
        .copied()
        .filter(|&x| x >= lo && x < hi)
        .map(|x| {
            let rho = counting_function(spec, x);
            (x, rho, rho as f64 / x.powf(exponent))
        })
        .collect();
    let cut_index = (spec.len() as f64).sqrt().ceil() as usize;
    let reliable_max = spec.eigenvalues[cut_index.clamp(1, spec.len()) - 1];
    let top = points
        .iter()
        .map(|p| p.0)
        .filter(|&x| x <= reliable_max)
        .fold(f64::NAN, f64::max);
    if top.is_nan() {
        return Err(Error::Range(format!(
            "no grid point in the reliable range [{lo:e}, {reliable_max:e}]"
        )));
    }
    let decade = ((top / 10.0).max(lo), top);
    let in_decade: Vec<f64> = points
        .iter()
        .filter(|p| p.0 >= decade.0 && p.0 <= decade.1)
        .map(|p| p.2)
        .collect();
    let max = in_decade.iter().copied().fold(f64::MIN, f64::max);
    let min = in_decade.iter().copied().fold(f64::MAX, f64::min);
    Ok(WeylRatio {
        exponent,
        points,
        reliable_max,
        decade,
        max,
        min,
    })
}

/// Decade centred geometrically in `[λ_min⁺, λ_max]`.
pub fn central_decade(spec: &SpectrumResult) -> Result<(f64, f64)> {
    let lo = spec
        .min_positive()
        .ok_or_else(|| Error::Range("spectrum has no positive eigenvalue".into()))?;
    let mid = (lo * spec.max()).sqrt();
    Ok((mid / 10f64.sqrt(), mid * 10f64.sqrt()))
}

/// Fitted exponent of `ρ(x) ~ x^e` over `[lo, hi]`, sampled on a geometric
/// grid with `per_decade` points per decade.
pub fn counting_exponent(spec: &SpectrumResult, lo: f64, hi: f64, per_decade: usize) -> Result<ExponentFit> {
    let xs = geometric_grid(lo, hi, per_decade);
    let inverse: Vec<f64> = xs.iter().map(|&x| 1.0 / counting_function(spec, x) as f64).collect();
    // The fit measures decay, so an increasing ρ goes in as 1/ρ.
    fit_power_law(&xs, &inverse, TimeWindow::new(lo, hi)?)
}

/// `per_decade` geometric points per factor of ten from `lo` to `hi`.
pub fn geometric_grid(lo: f64, hi: f64, per_decade: usize) -> Vec<f64> {
    let steps = ((hi / lo).log10() * per_decade as f64).floor() as usize;
    (0..=steps)
        .map(|k| lo * 10f64.powf(k as f64 / per_decade as f64))
        .collect()
}

/// Eigenvalue cluster sizes: consecutive eigenvalues within `tol` share a
/// cluster. Returns multiplicity → number of clusters.
///
/// `tol` defaults to `1e-8 · λ_max`. It is rejected when it reaches the
/// median gap between distinct clusters (gaps above the round-off floor).
pub fn multiplicity_histogram(spec: &SpectrumResult, tol: Option<f64>) -> Result<BTreeMap<usize, usize>> {
    let tol = tol.unwrap_or(1e-8 * spec.max());
    if !(tol >= 0.0) {
        return Err(Error::param("tol", format!("{tol} is negative")));
    }
    let floor = zero_floor(spec);
    let mut gaps: Vec<f64> = spec
        .eigenvalues
        .windows(2)
        .map(|w| w[1] - w[0])
        .filter(|&g| g > floor)
        .collect();
    if !gaps.is_empty() {
        gaps.sort_unstable_by(f64::total_cmp);
        let median = gaps[gaps.len() / 2];
        if tol >= median {
            return Err(Error::Clustering(format!(
                "tolerance {tol:e} is not below the median gap {median:e}"
            )));
        }
    }
    let mut hist = BTreeMap::new();
    let mut size = 0usize;
    for (i, &v) in spec.eigenvalues.iter().enumerate() {
        if i > 0 && v - spec.eigenvalues[i - 1] > tol {
            *hist.entry(size).or_insert(0) += 1;
            size = 0;
        }
        size += 1;
    }
    if size > 0 {
        *hist.entry(size).or_insert(0) += 1;
    }
    Ok(hist)
}
