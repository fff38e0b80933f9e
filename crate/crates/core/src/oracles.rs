//! Independent reference computations used to validate the samplers and
//! solvers: exhaustive enumeration, closed forms and dense eigensolves.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt;

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::{Binomial, Distribution};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::analysis::{fit_power_law, oscillation_profile, TimeWindow};
use crate::env::{sample_traps, TrapEnvironment, Window};
use crate::error::{Error, Result};
use crate::gasket::{build_gasket, GasketPlan};
use crate::graph::{complete, cycle, grid, path, WeightedGraph};
use crate::iic::IicTree;
use crate::kernel::{
    btm_kernel, btm_kernel_pair, btm_transient, ctmc_distributions, ctmc_kernel, discrete_distributions, dyadic_grid,
    mc_return_probability_at, srw_kernel_discrete, HeatKernelSeries, McModel, Method, SeriesPoint,
};
use crate::seed;
use crate::spectral::{counting_function, laplacian_spectrum, multiplicity_histogram, BoundaryCondition};
use crate::ust::{spanning_tree_count, wilson_spanning_tree};

/// Result of one oracle comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl fmt::Display for OracleOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mark = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{mark} {}: {}", self.name, self.detail)
    }
}

fn outcome(name: &'static str, passed: bool, detail: String) -> OracleOutcome {
    OracleOutcome { name, passed, detail }
}

type Oracle = fn(u64) -> Result<OracleOutcome>;

/// Every oracle, in report order.
pub const ORACLES: &[(&str, Oracle)] = &[
    ("iic-enumeration", iic_enumeration),
    ("wilson-cycle", wilson_cycle),
    ("wilson-grid-chi-square", wilson_grid),
    ("matrix-tree-counts", matrix_tree_counts),
    ("two-state-kernel", two_state_kernel),
    ("uniformization-vs-eigensolve", uniformization_vs_eigensolve),
    ("kernel-invariants", kernel_invariants),
    ("chapman-kolmogorov", chapman_kolmogorov),
    ("small-spectra", small_spectra),
    ("path-spectrum", path_spectrum),
    ("btm-constant-environment", btm_constant_environment),
    ("btm-reversibility", btm_reversibility),
    ("monte-carlo-agreement", monte_carlo_agreement),
    ("power-law-fit", power_law_fit),
    ("log-period-detection", log_period_detection),
];

/// Runs every oracle. An oracle that errors is reported as a failure.
pub fn run_oracle_suite(seed: u64) -> Vec<OracleOutcome> {
    ORACLES
        .iter()
        .enumerate()
        .map(|(i, (name, f))| {
            f(seed::derive(seed, i as u64)).unwrap_or_else(|e| outcome(name, false, format!("error: {e}")))
        })
        .collect()
}

/// Exact law of the first `depth` levels of the IIC: every cluster with its
/// probability `Z_depth · P_{p_c}(cluster)`. Clusters are listed as sorted
/// per-level address lists for levels `1..=depth`.
pub fn iic_exact_law(n0: u32, depth: usize) -> Vec<(Vec<Vec<Vec<u32>>>, f64)> {
    let p = 1.0 / n0 as f64;
    let mut out = Vec::new();
    fn grow(
        n0: u32,
        p: f64,
        depth: usize,
        levels: &mut Vec<Vec<Vec<u32>>>,
        weight: f64,
        out: &mut Vec<(Vec<Vec<Vec<u32>>>, f64)>,
    ) {
        let current = levels.last().unwrap().clone();
        if levels.len() == depth + 1 {
            out.push((levels[1..].to_vec(), weight * current.len() as f64));
            return;
        }
        let slots = current.len() * n0 as usize;
        for mask in 0u64..(1 << slots) {
            let chosen = mask.count_ones() as i32;
            let w = weight * p.powi(chosen) * (1.0 - p).powi(slots as i32 - chosen);
            let next: Vec<Vec<u32>> = (0..slots)
                .filter(|s| mask >> s & 1 == 1)
                .map(|s| {
                    let mut a = current[s / n0 as usize].clone();
                    a.push((s % n0 as usize) as u32);
                    a
                })
                .collect();
            if next.is_empty() {
                continue;
            }
            levels.push(next);
            grow(n0, p, depth, levels, w, out);
            levels.pop();
        }
    }
    grow(n0, p, depth, &mut vec![vec![vec![]]], 1.0, &mut out);
    out
}

fn iic_enumeration(seed: u64) -> Result<OracleOutcome> {
    const SAMPLES: u64 = 100_000;
    let mut worst = String::new();
    let mut passed = true;
    for (case, (n0, depth)) in [(2u32, 1usize), (2, 2), (3, 1), (3, 2)].into_iter().enumerate() {
        let law = iic_exact_law(n0, depth);
        let total: f64 = law.iter().map(|c| c.1).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Ok(outcome("iic-enumeration", false, format!("exact law sums to {total}")));
        }
        let index: HashMap<_, usize> = law.iter().enumerate().map(|(i, c)| (c.0.clone(), i)).collect();
        let mut counts = vec![0u64; law.len()];
        for s in 0..SAMPLES {
            let mut tree = IicTree::new(n0, seed::derive(seed, case as u64 * SAMPLES + s))?;
            tree.extend_to(depth);
            let addr = tree.addresses();
            let key: Vec<Vec<Vec<u32>>> = addr[1..].to_vec();
            let i = *index
                .get(&key)
                .ok_or_else(|| Error::Data("sampler produced a cluster outside the support".into()))?;
            counts[i] += 1;
        }
        let probs: Vec<f64> = law.iter().map(|c| c.1).collect();
        let tv = total_variation(&counts, &probs);
        let (mean, sd) = null_tv(&probs, SAMPLES, 400, seed ^ case as u64);
        let ok = tv <= mean + 3.0 * sd;
        passed &= ok;
        worst += &format!(" n0={n0},k={depth}: TV={tv:.2e} (null {mean:.2e}±{sd:.1e})");
    }
    Ok(outcome("iic-enumeration", passed, worst.trim().to_string()))
}

fn total_variation(counts: &[u64], probs: &[f64]) -> f64 {
    let n: u64 = counts.iter().sum();
    0.5 * counts
        .iter()
        .zip(probs)
        .map(|(&c, &p)| (c as f64 / n as f64 - p).abs())
        .sum::<f64>()
}

/// Multinomial draw as a chain of conditional binomials.
fn multinomial(probs: &[f64], n: u64, rng: &mut impl Rng) -> Vec<u64> {
    let mut left = n;
    let mut mass = 1.0;
    let mut counts = Vec::with_capacity(probs.len());
    for &p in probs {
        let q = if mass > 0.0 { (p / mass).clamp(0.0, 1.0) } else { 0.0 };
        let c = Binomial::new(left, q).expect("probability in [0, 1]").sample(rng);
        counts.push(c);
        left -= c;
        mass -= p;
    }
    counts
}

/// Mean and spread of the TV distance between an `n`-sample empirical law
/// and the true law, by simulating multinomial draws.
fn null_tv(probs: &[f64], n: u64, reps: usize, seed: u64) -> (f64, f64) {
    let mut rng = seed::rng(seed);
    let tvs: Vec<f64> = (0..reps)
        .map(|_| total_variation(&multinomial(probs, n, &mut rng), probs))
        .collect();
    let mean = tvs.iter().sum::<f64>() / reps as f64;
    let var = tvs.iter().map(|t| (t - mean).powi(2)).sum::<f64>() / (reps - 1) as f64;
    (mean, var.sqrt())
}

/// All spanning trees of a small graph by testing every `(n-1)`-edge subset.
pub fn enumerate_spanning_trees(graph: &WeightedGraph) -> Vec<Vec<(usize, usize)>> {
    let edges: Vec<(usize, usize)> = graph.edges().into_iter().map(|(u, v, _)| (u, v)).collect();
    let n = graph.len();
    let m = edges.len();
    assert!(m < 32, "exhaustive enumeration is for tiny graphs");
    let mut out = Vec::new();
    for mask in 0u32..(1 << m) {
        if mask.count_ones() as usize != n - 1 {
            continue;
        }
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(parent: &mut [usize], x: usize) -> usize {
            let mut r = x;
            while parent[r] != r {
                r = parent[r];
            }
            parent[x] = r;
            r
        }
        let mut acyclic = true;
        let mut chosen = Vec::with_capacity(n - 1);
        for (i, &(u, v)) in edges.iter().enumerate() {
            if mask >> i & 1 == 0 {
                continue;
            }
            let (a, b) = (find(&mut parent, u), find(&mut parent, v));
            if a == b {
                acyclic = false;
                break;
            }
            parent[a] = b;
            chosen.push((u, v));
        }
        if acyclic {
            out.push(chosen);
        }
    }
    out
}

fn wilson_frequencies(graph: &WeightedGraph, samples: u64, seed: u64) -> Result<(Vec<u64>, usize)> {
    let trees = enumerate_spanning_trees(graph);
    let index: HashMap<_, usize> = trees.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
    let mut counts = vec![0u64; trees.len()];
    for s in 0..samples {
        let t = wilson_spanning_tree(graph, seed::derive(seed, s))?;
        let i = *index
            .get(&t)
            .ok_or_else(|| Error::Data("Wilson returned a non-tree".into()))?;
        counts[i] += 1;
    }
    Ok((counts, trees.len()))
}

fn chi_square_p(counts: &[u64]) -> f64 {
    let n: u64 = counts.iter().sum();
    let e = n as f64 / counts.len() as f64;
    let stat: f64 = counts.iter().map(|&c| (c as f64 - e).powi(2) / e).sum();
    let dist = ChiSquared::new((counts.len() - 1) as f64).expect("positive degrees of freedom");
    1.0 - dist.cdf(stat)
}

fn wilson_cycle(seed: u64) -> Result<OracleOutcome> {
    let g = cycle(4)?;
    let (counts, k) = wilson_frequencies(&g, 10_000, seed)?;
    let p = chi_square_p(&counts);
    Ok(outcome(
        "wilson-cycle",
        k == 4 && p > 0.01,
        format!("{k} trees, counts {counts:?}, chi-square p = {p:.3}"),
    ))
}

fn wilson_grid(seed: u64) -> Result<OracleOutcome> {
    let g = grid(3, 3)?;
    let (counts, k) = wilson_frequencies(&g, 100_000, seed)?;
    let p = chi_square_p(&counts);
    let count = spanning_tree_count(&g)?;
    Ok(outcome(
        "wilson-grid-chi-square",
        k == 192 && count == 192 && p > 0.01,
        format!("enumerated {k}, matrix-tree {count}, chi-square p = {p:.3}"),
    ))
}

fn matrix_tree_counts(_: u64) -> Result<OracleOutcome> {
    let cases: Vec<(&str, WeightedGraph)> = vec![
        ("K3", complete(3)?),
        ("K5", complete(5)?),
        ("C4", cycle(4)?),
        ("C7", cycle(7)?),
        ("P6", path(6)?),
        ("grid 3x3", grid(3, 3)?),
        ("grid 2x4", grid(2, 4)?),
        ("SG(2) level 1", build_gasket(&GasketPlan::constant(2, 1))?),
    ];
    let mut detail = Vec::new();
    let mut passed = true;
    for (name, g) in &cases {
        let det = spanning_tree_count(g)?;
        let brute = enumerate_spanning_trees(g).len() as u128;
        passed &= det == brute;
        detail.push(format!("{name}={det}"));
    }
    Ok(outcome("matrix-tree-counts", passed, detail.join(" ")))
}

fn two_state_kernel(_: u64) -> Result<OracleOutcome> {
    let g = path(2)?;
    let times: Vec<f64> = (0..=40).map(|k| 0.05 * k as f64 + 1e-3).collect();
    let s = ctmc_kernel(&g, 0, 0, &times, 1e-14)?;
    let worst = s
        .points
        .iter()
        .map(|p| (p.value - 0.5 * (1.0 + (-2.0 * p.time).exp())).abs())
        .fold(0.0, f64::max);
    let discrete = srw_kernel_discrete(&g, 0, 0, 20)?;
    let ones = discrete.points.iter().all(|p| p.value == 1.0);
    Ok(outcome(
        "two-state-kernel",
        worst <= 1e-10 && ones,
        format!("max |p - (1+e^-2t)/2| = {worst:.2e}"),
    ))
}

/// Continuous-time kernel `p_t(x, y)` from a dense eigendecomposition of the
/// symmetrised jump matrix `D^{-1/2} C D^{-1/2}`.
pub fn dense_ctmc_kernel(graph: &WeightedGraph, x: usize, y: usize, t: f64) -> f64 {
    let n = graph.len();
    let d: Vec<f64> = (0..n).map(|v| graph.conductance(v)).collect();
    let mut s = DMatrix::zeros(n, n);
    for u in 0..n {
        for &(v, c) in graph.neighbors(u) {
            s[(u, v)] = c / (d[u] * d[v]).sqrt();
        }
    }
    let eig = s.symmetric_eigen();
    let mut acc = 0.0;
    for k in 0..n {
        acc += (t * (eig.eigenvalues[k] - 1.0)).exp() * eig.eigenvectors[(x, k)] * eig.eigenvectors[(y, k)];
    }
    acc * (d[y] / d[x]).sqrt() / graph.measure()[y]
}

fn small_graphs() -> Result<Vec<(&'static str, WeightedGraph)>> {
    Ok(vec![
        ("triangle", complete(3)?),
        ("K6", complete(6)?),
        ("path 12", path(12)?),
        ("cycle 9", cycle(9)?),
        ("grid 5x5", grid(5, 5)?),
        ("SG(2) level 2", build_gasket(&GasketPlan::constant(2, 2))?),
        ("SG(3) level 1", build_gasket(&GasketPlan::constant(3, 1))?),
        ("SG(2) level 3", build_gasket(&GasketPlan::constant(2, 3))?),
    ])
}

fn uniformization_vs_eigensolve(_: u64) -> Result<OracleOutcome> {
    let times = [0.01, 0.3, 1.0, 2.5, 7.0, 20.0];
    let mut worst: f64 = 0.0;
    for (_, g) in small_graphs()? {
        let n = g.len();
        for &(x, y) in &[(0, 0), (0, n - 1), (n / 2, 1)] {
            let s = ctmc_kernel(&g, x, y, &times, 1e-14)?;
            for p in &s.points {
                worst = worst.max((p.value - dense_ctmc_kernel(&g, x, y, p.time)).abs());
            }
        }
    }
    Ok(outcome(
        "uniformization-vs-eigensolve",
        worst <= 1e-10,
        format!("max deviation {worst:.2e} over 8 graphs"),
    ))
}

/// Conservation, symmetry and monotone on-diagonal decay of computed series.
pub fn series_invariants(graph: &WeightedGraph, times: &[f64]) -> Result<Vec<String>> {
    let mut problems = Vec::new();
    let n = graph.len();
    let cont = ctmc_distributions(graph, 0, times, 1e-14)?;
    for (row, t) in cont.iter().zip(times) {
        let mass: f64 = row.iter().sum();
        if (mass - 1.0).abs() > 1e-10 {
            problems.push(format!("continuous mass {mass} at t={t}"));
        }
    }
    let steps: Vec<usize> = (0..=30).collect();
    for row in discrete_distributions(graph, 0, &steps)? {
        let mass: f64 = row.iter().sum();
        if (mass - 1.0).abs() > 1e-12 {
            problems.push(format!("discrete mass {mass}"));
        }
    }
    let y = n - 1;
    let fwd = ctmc_kernel(graph, 0, y, times, 1e-14)?;
    let back = ctmc_kernel(graph, y, 0, times, 1e-14)?;
    for (a, b) in fwd.points.iter().zip(&back.points) {
        if (a.value - b.value).abs() > 1e-12 + a.error + b.error {
            problems.push(format!("asymmetry at t={}", a.time));
        }
    }
    let fwd = srw_kernel_discrete(graph, 0, y, 30)?;
    let back = srw_kernel_discrete(graph, y, 0, 30)?;
    for (a, b) in fwd.points.iter().zip(&back.points) {
        if (a.value - b.value).abs() > 1e-13 {
            problems.push(format!("discrete asymmetry at n={}", a.time));
        }
    }
    let diag = ctmc_kernel(graph, 0, 0, times, 1e-14)?;
    if let Some(w) = diag.points.windows(2).find(|w| w[1].value > w[0].value + 1e-13) {
        problems.push(format!("on-diagonal increase at t={}", w[1].time));
    }
    if let Some(p) = diag.points.iter().chain(&fwd.points).find(|p| !(p.value >= 0.0) || !(p.error >= 0.0)) {
        problems.push(format!("negative entry at t={}", p.time));
    }
    Ok(problems)
}

fn kernel_invariants(_: u64) -> Result<OracleOutcome> {
    let times: Vec<f64> = (0..25).map(|k| 0.05 * 1.4f64.powi(k)).collect();
    let mut problems = Vec::new();
    for (name, g) in small_graphs()? {
        problems.extend(series_invariants(&g, &times)?.into_iter().map(|p| format!("{name}: {p}")));
    }
    let env = sample_traps(0.7, Window::symmetric(3000), 5)?;
    let btm = btm_kernel(&env, &times, 1e-10)?;
    if btm.points.windows(2).any(|w| w[1].value > w[0].value + 1e-13) {
        problems.push("trap kernel increases".into());
    }
    Ok(outcome(
        "kernel-invariants",
        problems.is_empty(),
        if problems.is_empty() {
            "conservation, symmetry, monotone decay hold".into()
        } else {
            problems.join("; ")
        },
    ))
}

fn chapman_kolmogorov(_: u64) -> Result<OracleOutcome> {
    let mut worst: f64 = 0.0;
    for (_, g) in small_graphs()? {
        let n = g.len();
        let (s, t) = (0.7, 1.9);
        let from_x = ctmc_distributions(&g, 0, &[s, s + t], 1e-15)?;
        let mut composed = vec![0.0; n];
        for z in 0..n {
            let from_z = &ctmc_distributions(&g, z, &[t], 1e-15)?[0];
            for y in 0..n {
                composed[y] += from_x[0][z] * from_z[y];
            }
        }
        for y in 0..n {
            worst = worst.max((composed[y] - from_x[1][y]).abs());
        }
        let d = discrete_distributions(&g, 0, &[3, 7])?;
        let mut composed = vec![0.0; n];
        for z in 0..n {
            let from_z = &discrete_distributions(&g, z, &[4])?[0];
            for y in 0..n {
                composed[y] += d[0][z] * from_z[y];
            }
        }
        for y in 0..n {
            worst = worst.max((composed[y] - d[1][y]).abs());
        }
    }
    Ok(outcome(
        "chapman-kolmogorov",
        worst <= 1e-8,
        format!("max deviation {worst:.2e}"),
    ))
}

fn small_spectra(_: u64) -> Result<OracleOutcome> {
    let eig = |g: &WeightedGraph| laplacian_spectrum(g, BoundaryCondition::Neumann).map(|s| s.eigenvalues);
    let close = |a: &[f64], b: &[f64]| a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() < 1e-10);
    let k3 = laplacian_spectrum(&complete(3)?, BoundaryCondition::Neumann)?;
    let hist = multiplicity_histogram(&k3, Some(1e-6))?;
    let passed = close(&eig(&path(2)?)?, &[0.0, 2.0])
        && close(&eig(&path(3)?)?, &[0.0, 1.0, 3.0])
        && close(&k3.eigenvalues, &[0.0, 3.0, 3.0])
        && counting_function(&k3, 2.9) == 1
        && hist.get(&1) == Some(&1)
        && hist.get(&2) == Some(&1);
    Ok(outcome("small-spectra", passed, "P2, P3, K3 spectra and K3 multiplicities".into()))
}

/// Dirichlet spectrum `2(1 - cos(kπ/(n+1)))`, `k = 1..n`, of a path with
/// `n` interior vertices.
pub fn path_dirichlet_eigenvalues(n: usize) -> Vec<f64> {
    (1..=n)
        .map(|k| 2.0 * (1.0 - (k as f64 * PI / (n + 1) as f64).cos()))
        .collect()
}

fn path_spectrum(_: u64) -> Result<OracleOutcome> {
    let n = 50;
    let spec = laplacian_spectrum(&path(n + 2)?, BoundaryCondition::Dirichlet)?;
    let exact = path_dirichlet_eigenvalues(n);
    let worst = spec
        .eigenvalues
        .iter()
        .zip(&exact)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    // Between the k-th and (k+1)-th eigenvalue the count is exactly k.
    let mismatched = exact
        .windows(2)
        .enumerate()
        .filter(|(k, w)| counting_function(&spec, 0.5 * (w[0] + w[1])) != k + 1)
        .count();
    Ok(outcome(
        "path-spectrum",
        worst < 1e-10 && mismatched == 0 && spec.len() == n,
        format!("max eigenvalue deviation {worst:.2e}, ρ mismatches {mismatched}"),
    ))
}

fn btm_constant_environment(_: u64) -> Result<OracleOutcome> {
    let times = [1.0, 10.0, 100.0];
    let env = TrapEnvironment::constant(Window::symmetric(400), 1.0)?;
    let s = btm_kernel(&env, &times, 1e-12)?;
    // Independent reference: the rate-1 walk on ℤ by dense eigensolve of a
    // cycle twice as long as the solver window is wide.
    let ring = cycle(801)?;
    let half_width: usize = s
        .params
        .iter()
        .find(|p| p.0 == "K")
        .and_then(|p| p.1.parse().ok())
        .ok_or_else(|| Error::Data("solver did not report its window".into()))?;
    let wide_env = TrapEnvironment::constant(Window::symmetric(4 * half_width), 1.0)?;
    let wide = btm_transient(&wide_env, 0, 0, &times, 2 * half_width, false)?;
    let mut worst: f64 = 0.0;
    for (i, p) in s.points.iter().enumerate() {
        // Unit-rate walk on the cycle has degree 2, so rescale by μ = 2.
        let reference = 2.0 * dense_ctmc_kernel(&ring, 0, 0, p.time);
        worst = worst.max((p.value - reference).abs()).max((p.value - wide.values[i]).abs());
    }
    Ok(outcome(
        "btm-constant-environment",
        worst <= 1e-8,
        format!("max deviation from the eigensolve and doubled-window references {worst:.2e}"),
    ))
}

fn btm_reversibility(seed: u64) -> Result<OracleOutcome> {
    let env = sample_traps(1.5, Window::symmetric(4000), seed)?;
    let times = [0.5, 5.0, 50.0, 500.0];
    let mut worst: f64 = 0.0;
    for z in [1i64, 5] {
        let a = btm_kernel_pair(&env, 0, z, &times, 1e-10)?;
        let b = btm_kernel_pair(&env, z, 0, &times, 1e-10)?;
        for (p, q) in a.points.iter().zip(&b.points) {
            worst = worst.max((p.value - q.value).abs() / p.value.max(1e-300));
        }
    }
    Ok(outcome(
        "btm-reversibility",
        worst <= 1e-9,
        format!("max relative asymmetry {worst:.2e}"),
    ))
}

fn monte_carlo_agreement(seed: u64) -> Result<OracleOutcome> {
    let tri = complete(3)?;
    let exact_tri = 0.25;
    let mut covered = 0;
    let trials = 40;
    for k in 0..trials {
        let est = mc_return_probability_at(McModel::Discrete(&tri), 0, 2.0, 2_000, seed::derive(seed, k), 0.99)?;
        covered += est.contains(exact_tri) as usize;
    }
    let env = sample_traps(2.0, Window::symmetric(2000), seed)?;
    let exact = btm_kernel(&env, &[50.0], 1e-10)?.points[0].value;
    let est = mc_return_probability_at(McModel::Trap(&env), 0, 50.0, 100_000, seed::derive(seed, 999), 0.99)?;
    let passed = covered as f64 >= 0.95 * trials as f64 && est.contains(exact);
    Ok(outcome(
        "monte-carlo-agreement",
        passed,
        format!(
            "triangle 99% CI covered {covered}/{trials}; trap t=50 exact {exact:.5} vs {:.5}±{:.5}",
            est.value, est.half_width
        ),
    ))
}

fn power_law_fit(seed: u64) -> Result<OracleOutcome> {
    let mut rng = seed::rng(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let slope: f64 = rng.random_range(0.05..3.0);
        let scale: f64 = rng.random_range(0.01..100.0);
        let t = dyadic_grid(rng.random_range(1.0..10.0), 1e4, 4);
        let p: Vec<f64> = t.iter().map(|t| scale * t.powf(-slope)).collect();
        let f = fit_power_law(&t, &p, TimeWindow::new(1.0, 1e5)?)?;
        worst = worst.max((f.slope - slope).abs()).max((f.intercept + scale.ln()).abs());
    }
    Ok(outcome(
        "power-law-fit",
        worst < 1e-10,
        format!("max slope/intercept error {worst:.2e}"),
    ))
}

fn log_period_detection(seed: u64) -> Result<OracleOutcome> {
    let mut rng = seed::rng(seed);
    let mut worst: f64 = 0.0;
    let mut missed = 0;
    for _ in 0..20 {
        let period: f64 = rng.random_range(0.8..2.5);
        let amp: f64 = rng.random_range(0.05..0.3);
        let theta: f64 = rng.random_range(0.3..1.2);
        let phase: f64 = rng.random_range(0.0..2.0 * PI);
        let mut s = HeatKernelSeries::new("synthetic", 0, 0, Method::ExactIteration);
        // At least 8 grid points per period.
        let per_octave = ((8.0 * 2f64.ln() / period).ceil() as u32).max(4);
        for t in dyadic_grid(1.0, 1e4, per_octave) {
            let v = t.powf(-theta) * (1.0 + amp * (2.0 * PI * t.ln() / period + phase).sin());
            s.points.push(SeriesPoint { time: t, value: v, error: 0.0 });
        }
        let o = oscillation_profile(&s, theta)?;
        if !o.has_peak() {
            missed += 1;
        }
        worst = worst.max((o.log_period / period - 1.0).abs());
    }
    let flat: HeatKernelSeries = {
        let mut s = HeatKernelSeries::new("synthetic", 0, 0, Method::ExactIteration);
        for t in dyadic_grid(1.0, 1e4, 4) {
            s.points.push(SeriesPoint { time: t, value: t.powf(-0.7), error: 0.0 });
        }
        s
    };
    let o = oscillation_profile(&flat, 0.7)?;
    let flat_ok = !o.has_peak() && (o.max_ratio() - 1.0).abs() < 1e-12;
    Ok(outcome(
        "log-period-detection",
        worst < 0.05 && missed == 0 && flat_ok,
        format!("max relative period error {worst:.3}, missed {missed}/20, flat series clean: {flat_ok}"),
    ))
}
