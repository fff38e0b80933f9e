use super::{HeatKernelSeries, Method, PoissonWeights, SeriesPoint};
use crate::error::{Error, Result};
use crate::graph::WeightedGraph;

/// Entries below this are dropped (and counted as lost mass) so the
/// iteration never touches subnormal numbers.
const FLUSH: f64 = 1e-280;

/// Distribution of the discrete-time walk started at one vertex, advanced
/// one step at a time.
///
/// Vertices are stored in BFS order from the source with the transition
/// operator in pull form, so step `k` only updates the ball of radius `k`.
/// Mass that arrives at an absorbing vertex is removed and accumulated in
/// [`DiscreteRun::killed`].
#[derive(Debug, Clone)]
pub struct DiscreteRun<'g> {
    graph: &'g WeightedGraph,
    pos: Vec<usize>,
    order: Vec<usize>,
    dist: Vec<u32>,
    /// Offsets of each distance shell in BFS order.
    shells: Vec<usize>,
    bipartite: bool,
    start: Vec<usize>,
    from: Vec<u32>,
    weight: Vec<f64>,
    absorbing: Vec<bool>,
    cur: Vec<f64>,
    next: Vec<f64>,
    steps: usize,
    active: usize,
    absorbed: f64,
    flushed: f64,
}

impl<'g> DiscreteRun<'g> {
    pub fn new(graph: &'g WeightedGraph, source: usize, absorbing: Option<&[bool]>) -> Result<Self> {
        let n = graph.len();
        if source >= n {
            return Err(Error::param("source", format!("vertex {source} out of range")));
        }
        if let Some(a) = absorbing {
            if a.len() != n {
                return Err(Error::param("absorbing", "mask length differs from vertex count"));
            }
            if a[source] {
                return Err(Error::param("absorbing", "source vertex is absorbing"));
            }
        }
        let raw = graph.distances_from(source);
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by_key(|&v| (raw[v].unwrap_or(u32::MAX), v));
        let mut pos = vec![0; n];
        for (i, &v) in order.iter().enumerate() {
            pos[v] = i;
        }
        let dist: Vec<u32> = order.iter().map(|&v| raw[v].unwrap_or(u32::MAX)).collect();
        let mut shells = vec![0];
        for (i, w) in dist.windows(2).enumerate() {
            if w[1] != w[0] {
                shells.push(i + 1);
            }
        }
        shells.push(n);
        let total: Vec<f64> = (0..n).map(|v| graph.conductance(v)).collect();
        let mut start = Vec::with_capacity(n + 1);
        let mut from = Vec::new();
        let mut weight = Vec::new();
        start.push(0);
        for &v in &order {
            for &(u, c) in graph.neighbors(v) {
                from.push(pos[u] as u32);
                weight.push(c / total[u]);
            }
            start.push(from.len());
        }
        let absorbing = match absorbing {
            Some(a) => order.iter().map(|&v| a[v]).collect(),
            None => vec![false; n],
        };
        let mut cur = vec![0.0; n];
        cur[0] = 1.0;
        Ok(DiscreteRun {
            graph,
            pos,
            order,
            dist,
            shells,
            bipartite: graph.is_bipartite(),
            start,
            from,
            weight,
            absorbing,
            cur,
            next: vec![0.0; n],
            steps: 0,
            active: 1,
            absorbed: 0.0,
            flushed: 0.0,
        })
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    /// Mass absorbed or flushed so far; bounds the distance to the
    /// unabsorbed walk at every vertex.
    pub fn killed(&self) -> f64 {
        self.absorbed + self.flushed
    }

    /// Mass that entered the absorbing set.
    pub fn absorbed(&self) -> f64 {
        self.absorbed
    }

    /// Mass dropped below the subnormal guard.
    pub fn flushed(&self) -> f64 {
        self.flushed
    }

    pub fn step(&mut self) {
        let radius = (self.steps + 1) as u32;
        let active = self.dist.partition_point(|&d| d <= radius);
        if self.bipartite {
            // Only the shells with the parity of the step can carry mass;
            // the others keep the zeros they held two steps ago.
            let last = (radius as usize).min(self.shells.len() - 2);
            for d in (radius as usize % 2..=last).step_by(2) {
                self.update(self.shells[d]..self.shells[d + 1]);
            }
        } else {
            self.update(0..active);
        }
        std::mem::swap(&mut self.cur, &mut self.next);
        self.active = active;
        self.steps += 1;
    }

    fn update(&mut self, range: std::ops::Range<usize>) {
        for i in range {
            let mut acc = 0.0;
            for e in self.start[i]..self.start[i + 1] {
                acc += self.cur[self.from[e] as usize] * self.weight[e];
            }
            if self.absorbing[i] {
                self.absorbed += acc;
                acc = 0.0;
            } else if acc != 0.0 && acc < FLUSH {
                self.flushed += acc;
                acc = 0.0;
            }
            self.next[i] = acc;
        }
    }

    /// `P_x(X_n = v)` at the current step.
    pub fn probability(&self, v: usize) -> f64 {
        self.cur[self.pos[v]]
    }

    /// The whole distribution, indexed by vertex.
    pub fn distribution(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.order.len()];
        for (i, &v) in self.order.iter().enumerate().take(self.active) {
            out[v] = self.cur[i];
        }
        out
    }

    pub fn graph(&self) -> &WeightedGraph {
        self.graph
    }
}

/// Discrete-time heat kernel `p_n(x, y)` for `1 ≤ n ≤ n_max`. On a bipartite
/// graph only times with the parity of `d(x, y)` are reported.
pub fn srw_kernel_discrete(
    graph: &WeightedGraph,
    x: usize,
    y: usize,
    n_max: usize,
) -> Result<HeatKernelSeries> {
    discrete_series(graph, x, y, n_max, None)
}

/// As [`srw_kernel_discrete`] with the walk killed on entering `absorbing`.
/// The error column bounds the difference to the unkilled kernel.
pub fn srw_kernel_discrete_absorbing(
    graph: &WeightedGraph,
    x: usize,
    y: usize,
    n_max: usize,
    absorbing: &[bool],
) -> Result<HeatKernelSeries> {
    discrete_series(graph, x, y, n_max, Some(absorbing))
}

fn discrete_series(
    graph: &WeightedGraph,
    x: usize,
    y: usize,
    n_max: usize,
    absorbing: Option<&[bool]>,
) -> Result<HeatKernelSeries> {
    if y >= graph.len() {
        return Err(Error::param("target", format!("vertex {y} out of range")));
    }
    if n_max < 1 {
        return Err(Error::param("n_max", "need at least one step"));
    }
    let parity = graph
        .is_bipartite()
        .then(|| graph.distances_from(x)[y].map(|d| d as usize % 2))
        .flatten();
    let mut run = DiscreteRun::new(graph, x, absorbing)?;
    let mu = graph.measure()[y];
    // On the diagonal, a path that is absorbed and still returns splits at
    // its first hit b of the absorbing set; by reversibility the return leg
    // has probability c_x P_x(X_m = b) / c_b ≤ c_x · killed / c_b. Hence the
    // kernel moves by at most killed² · c_x / min_b c_b.
    let return_factor = match absorbing {
        Some(mask) if x == y => {
            let min_c = (0..graph.len())
                .filter(|&b| mask[b])
                .map(|b| graph.conductance(b))
                .fold(f64::INFINITY, f64::min);
            graph.conductance(x) / min_c
        }
        _ => f64::INFINITY,
    };
    let mut series = HeatKernelSeries::new(graph.descriptor().builder.clone(), x as i64, y as i64, Method::ExactIteration);
    series.points.reserve(n_max);
    for n in 1..=n_max {
        run.step();
        if parity.is_some_and(|p| n % 2 != p) {
            continue;
        }
        series.points.push(SeriesPoint {
            time: n as f64,
            value: run.probability(y) / mu,
            error: (run.absorbed().min(run.absorbed().powi(2) * return_factor) + run.flushed()) / mu,
        });
    }
    Ok(with_graph_params(series, graph))
}

/// `P_x(X_n = ·)` for each requested step count, indexed by vertex.
pub fn discrete_distributions(graph: &WeightedGraph, x: usize, steps: &[usize]) -> Result<Vec<Vec<f64>>> {
    let mut order: Vec<usize> = (0..steps.len()).collect();
    order.sort_by_key(|&i| steps[i]);
    let mut out = vec![Vec::new(); steps.len()];
    let mut run = DiscreteRun::new(graph, x, None)?;
    for i in order {
        while run.steps() < steps[i] {
            run.step();
        }
        out[i] = run.distribution();
    }
    Ok(out)
}

/// Continuous-time (unit jump rate) heat kernel by uniformization. `tol`
/// bounds the discarded Poisson mass per time.
pub fn ctmc_kernel(
    graph: &WeightedGraph,
    x: usize,
    y: usize,
    times: &[f64],
    tol: f64,
) -> Result<HeatKernelSeries> {
    if y >= graph.len() {
        return Err(Error::param("target", format!("vertex {y} out of range")));
    }
    let mu = graph.measure()[y];
    let mut values = vec![0.0; times.len()];
    let (tails, killed) = uniformize(graph, x, times, tol, |run, k, weights| {
        let p = run.probability(y);
        for (v, w) in values.iter_mut().zip(weights) {
            *v += w.weight(k) * p;
        }
    })?;
    let mut series = HeatKernelSeries::new(graph.descriptor().builder.clone(), x as i64, y as i64, Method::Uniformization);
    for (i, &t) in times.iter().enumerate() {
        series.points.push(SeriesPoint {
            time: t,
            value: values[i] / mu,
            error: (tails[i] + killed[i]) / mu,
        });
    }
    Ok(with_graph_params(series, graph))
}

/// `P_x(X_t = ·)` for the continuous-time walk, indexed by vertex.
pub fn ctmc_distributions(graph: &WeightedGraph, x: usize, times: &[f64], tol: f64) -> Result<Vec<Vec<f64>>> {
    let n = graph.len();
    let mut out = vec![vec![0.0; n]; times.len()];
    uniformize(graph, x, times, tol, |run, k, weights| {
        let dist = run.distribution();
        for (acc, w) in out.iter_mut().zip(weights) {
            let wk = w.weight(k);
            if wk > 0.0 {
                for (a, d) in acc.iter_mut().zip(&dist) {
                    *a += wk * d;
                }
            }
        }
    })?;
    Ok(out)
}

/// Runs the jump chain far enough for every time and hands each step to
/// `visit`. Returns per-time Poisson tail bounds and flushed mass.
fn uniformize(
    graph: &WeightedGraph,
    x: usize,
    times: &[f64],
    tol: f64,
    mut visit: impl FnMut(&DiscreteRun, usize, &[PoissonWeights]),
) -> Result<(Vec<f64>, Vec<f64>)> {
    if !(tol > 0.0 && tol < 1.0) {
        return Err(Error::param("tol", format!("{tol} not in (0, 1)")));
    }
    if let Some(t) = times.iter().find(|t| !(**t >= 0.0) || !t.is_finite()) {
        return Err(Error::param("time", format!("{t} is not a finite non-negative time")));
    }
    let weights: Vec<PoissonWeights> = times.iter().map(|&t| PoissonWeights::new(t, tol)).collect();
    let last = weights.iter().map(PoissonWeights::right).max().unwrap_or(0);
    let mut run = DiscreteRun::new(graph, x, None)?;
    let mut killed = vec![0.0; times.len()];
    for k in 0..=last {
        if k > 0 {
            run.step();
        }
        visit(&run, k, &weights);
        for (kl, w) in killed.iter_mut().zip(&weights) {
            if k == w.right() {
                *kl = run.killed();
            }
        }
    }
    Ok((weights.iter().map(|w| w.tail).collect(), killed))
}

fn with_graph_params(mut series: HeatKernelSeries, graph: &WeightedGraph) -> HeatKernelSeries {
    let d = graph.descriptor();
    for (k, v) in &d.params {
        series.params.push((k.clone(), v.clone()));
    }
    if let Some(s) = d.seed {
        series.params.push(("seed".into(), s.to_string()));
    }
    series
}
