//! Incipient infinite cluster of critical percolation on the `n₀`-ary tree.
//!
//! Restricted to the first `k` levels, the IIC law weights a cluster `A` by
//! `|A ∩ 𝔹_k| · P_{p_c}(C(0) ∩ 𝔹_{≤k} = A)`. Conditioning that weight on the
//! first `j` levels shows the next generation has the critical product law
//! size-biased by its own size, normalised by the current size `Z_j`:
//!
//! ```text
//! P(next = S | Z_j = m) = |S| / m · p^{|S|} (1-p)^{m n₀ - |S|}
//! ```
//!
//! The sampler draws `|S|` from that size-biased binomial and then a uniform
//! subset of child slots of that size, one level at a time, so a tree can be
//! deepened later without changing the levels already drawn.

use rand::seq::index;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use statrs::function::factorial::ln_binomial;

use crate::error::{Error, Result};
use crate::graph::{GraphDescriptor, WeightedGraph};
use crate::kernel::{srw_kernel_discrete_absorbing, HeatKernelSeries};
use crate::seed;

/// A partially grown IIC, level by level.
#[derive(Debug, Clone)]
pub struct IicTree {
    n0: u32,
    seed: u64,
    rng: ChaCha8Rng,
    /// `levels[j][i] = (parent index in level j-1, child position 0..n0)`.
    levels: Vec<Vec<(u32, u32)>>,
}

impl IicTree {
    pub fn new(n0: u32, seed: u64) -> Result<Self> {
        if n0 < 2 {
            return Err(Error::param("n0", format!("{n0} < 2")));
        }
        Ok(IicTree {
            n0,
            seed,
            rng: seed::rng(seed ^ 0x0069_6963),
            levels: vec![vec![(0, 0)]],
        })
    }

    pub fn depth(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn n0(&self) -> u32 {
        self.n0
    }

    /// Number of open vertices per level, `Z_0, Z_1, ...`.
    pub fn generation_sizes(&self) -> Vec<usize> {
        self.levels.iter().map(Vec::len).collect()
    }

    /// `(parent, child position)` records of level `j`.
    pub fn level(&self, j: usize) -> &[(u32, u32)] {
        &self.levels[j]
    }

    /// Grows the tree until it has `depth` levels below the root.
    pub fn extend_to(&mut self, depth: usize) {
        while self.depth() < depth {
            let m = self.levels.last().unwrap().len();
            let slots = m * self.n0 as usize;
            let k = sample_size_biased(&mut self.rng, slots, 1.0 / self.n0 as f64, m);
            let mut chosen = index::sample(&mut self.rng, slots, k).into_vec();
            chosen.sort_unstable();
            let next = chosen
                .into_iter()
                .map(|s| ((s / self.n0 as usize) as u32, (s % self.n0 as usize) as u32))
                .collect();
            self.levels.push(next);
        }
    }

    /// Address of every vertex in the ambient `n₀`-ary tree, level by level:
    /// the root is `[]`, a child appends its position.
    pub fn addresses(&self) -> Vec<Vec<Vec<u32>>> {
        let mut out: Vec<Vec<Vec<u32>>> = vec![vec![vec![]]];
        for lvl in &self.levels[1..] {
            let prev = out.last().unwrap();
            let cur = lvl
                .iter()
                .map(|&(p, c)| {
                    let mut a = prev[p as usize].clone();
                    a.push(c);
                    a
                })
                .collect();
            out.push(cur);
        }
        out
    }

    /// The tree as a simple-walk graph: vertices numbered level by level,
    /// root 0, boundary the deepest level.
    pub fn to_graph(&self) -> Result<WeightedGraph> {
        let mut offsets = Vec::with_capacity(self.levels.len());
        let mut total = 0usize;
        for lvl in &self.levels {
            offsets.push(total);
            total += lvl.len();
        }
        let mut edges = Vec::with_capacity(total.saturating_sub(1));
        for (j, lvl) in self.levels.iter().enumerate().skip(1) {
            for (i, &(p, _)) in lvl.iter().enumerate() {
                edges.push((offsets[j - 1] + p as usize, offsets[j] + i, 1.0));
            }
        }
        let deepest = *offsets.last().unwrap();
        let boundary = (deepest..total).collect();
        if total == 1 {
            return Err(Error::param("depth", "the IIC graph needs depth ≥ 1"));
        }
        Ok(WeightedGraph::from_edges(total, &edges, 0, boundary)?.with_descriptor(
            GraphDescriptor::new("iic")
                .param("n0", self.n0)
                .param("depth", self.depth())
                .seed(self.seed),
        ))
    }
}

/// Draws `k` with probability `k/m · C(N,k) p^k (1-p)^{N-k}` (mean of the
/// binomial is `N p = m`).
fn sample_size_biased(rng: &mut impl Rng, slots: usize, p: f64, m: usize) -> usize {
    let ln_p = p.ln();
    let ln_q = (1.0 - p).ln();
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for k in 1..=slots {
        let ln_pmf = ln_binomial(slots as u64, k as u64) + k as f64 * ln_p + (slots - k) as f64 * ln_q;
        acc += (k as f64 / m as f64) * ln_pmf.exp();
        if u < acc {
            return k;
        }
    }
    // Only reachable through rounding in the cumulative sum.
    slots
}

/// Samples the IIC restricted to levels `0..=depth` of the `n₀`-ary tree.
pub fn build_iic(n0: u32, depth: usize, seed: u64) -> Result<WeightedGraph> {
    if depth < 1 {
        return Err(Error::param("depth", "need depth ≥ 1"));
    }
    let mut tree = IicTree::new(n0, seed)?;
    tree.extend_to(depth);
    tree.to_graph()
}

/// Starting depth for [`iic_return_kernel`].
pub const INITIAL_DEPTH: usize = 64;

/// Discrete on-diagonal kernel `p_n(0, 0)`, `n ≤ n_max`, at the root of one
/// IIC sample. The walk is killed at the deepest level, and the tree is
/// deepened (doubling, same seed, so shallower levels are unchanged) until
/// the truncation bound at every reported time is below `rel_tol · p_n`.
pub fn iic_return_kernel(n0: u32, n_max: usize, seed: u64, rel_tol: f64) -> Result<HeatKernelSeries> {
    if !(rel_tol > 0.0) {
        return Err(Error::param("rel_tol", format!("{rel_tol} is not positive")));
    }
    let mut tree = IicTree::new(n0, seed)?;
    // A walk of n_max steps never reaches level n_max + 1.
    let cap = n_max + 1;
    let mut depth = INITIAL_DEPTH.min(cap);
    loop {
        tree.extend_to(depth);
        let g = tree.to_graph()?;
        let mut mask = vec![false; g.len()];
        for &b in g.boundary() {
            mask[b] = true;
        }
        let series = srw_kernel_discrete_absorbing(&g, 0, 0, n_max, &mask)?;
        let ok = series.points.iter().all(|p| p.error <= rel_tol * p.value);
        if ok || depth == cap {
            return Ok(series);
        }
        depth = (2 * depth).min(cap);
    }
}
