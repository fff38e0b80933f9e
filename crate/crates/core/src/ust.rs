//! Uniform spanning trees (Wilson's algorithm) and the matrix-tree count.

use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::{GraphDescriptor, WeightedGraph};
use crate::seed;

/// Boundary condition for the box `Λ_N = [-N, N]²`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum UstBoundary {
    /// Every vertex on the outer ring of the box is identified with a single
    /// wired vertex.
    #[default]
    Wired,
    /// The box as a plain subgraph of `ℤ²`.
    Free,
}

/// Samples a uniform spanning tree of a multigraph given as neighbour lists
/// (a neighbour listed twice is a double edge). Returns `parent[v]`, with
/// `parent[root] = None`.
pub fn wilson(neighbors: &[Vec<usize>], root: usize, rng: &mut impl Rng) -> Vec<Option<usize>> {
    let n = neighbors.len();
    let mut in_tree = vec![false; n];
    let mut next = vec![usize::MAX; n];
    in_tree[root] = true;
    for start in 0..n {
        let mut u = start;
        while !in_tree[u] {
            let nb = &neighbors[u];
            next[u] = nb[rng.random_range(0..nb.len())];
            u = next[u];
        }
        // Following `next` from `start` retraces the loop-erased path.
        u = start;
        while !in_tree[u] {
            in_tree[u] = true;
            u = next[u];
        }
    }
    (0..n)
        .map(|v| if v == root { None } else { Some(next[v]) })
        .collect()
}

/// Uniform spanning tree of a connected simple-walk graph, rooted at its root.
pub fn wilson_spanning_tree(graph: &WeightedGraph, seed: u64) -> Result<Vec<(usize, usize)>> {
    let neighbors = multigraph_lists(graph)?;
    let mut rng = seed::rng(seed);
    let parent = wilson(&neighbors, graph.root(), &mut rng);
    let mut edges: Vec<(usize, usize)> = parent
        .iter()
        .enumerate()
        .filter_map(|(v, p)| p.map(|p| (v.min(p), v.max(p))))
        .collect();
    edges.sort_unstable();
    Ok(edges)
}

fn multigraph_lists(graph: &WeightedGraph) -> Result<Vec<Vec<usize>>> {
    (0..graph.len())
        .map(|u| {
            let mut out = Vec::new();
            for &(v, c) in graph.neighbors(u) {
                if c.fract() != 0.0 || c < 1.0 {
                    return Err(Error::param(
                        "graph",
                        "UST sampling needs integer edge multiplicities",
                    ));
                }
                out.extend(std::iter::repeat_n(v, c as usize));
            }
            Ok(out)
        })
        .collect()
}

/// Uniform spanning tree of `Λ_N` sampled with Wilson's algorithm.
///
/// Vertex `(x, y)` of the kept lattice gets index `(y + M) (2M + 1) + (x + M)`
/// with `M = N - 1` for wired boundary (the ring `|x| = N or |y| = N` is
/// collapsed into one extra vertex, the last index) and `M = N` for free
/// boundary. The root is the origin.
pub fn wilson_ust(n: usize, seed: u64, boundary: UstBoundary) -> Result<WeightedGraph> {
    if n < 1 {
        return Err(Error::param("N", "need N ≥ 1"));
    }
    let n = n as i64;
    let m = match boundary {
        UstBoundary::Wired => n - 1,
        UstBoundary::Free => n,
    };
    let side = 2 * m + 1;
    let kept = (side * side) as usize;
    let wired = kept;
    let total = match boundary {
        UstBoundary::Wired => kept + 1,
        UstBoundary::Free => kept,
    };
    let index = |x: i64, y: i64| -> Option<usize> {
        (x.abs() <= m && y.abs() <= m).then(|| ((y + m) * side + (x + m)) as usize)
    };
    let mut neighbors: Vec<Vec<usize>> = vec![Vec::with_capacity(4); total];
    for y in -m..=m {
        for x in -m..=m {
            let u = index(x, y).unwrap();
            for (dx, dy) in [(1, 0), (-1, 0), (0, 1), (0, -1)] {
                match index(x + dx, y + dy) {
                    Some(v) => neighbors[u].push(v),
                    None if boundary == UstBoundary::Wired => {
                        neighbors[u].push(wired);
                        neighbors[wired].push(u);
                    }
                    None => {}
                }
            }
        }
    }
    let origin = index(0, 0).unwrap();
    let mut rng = seed::rng(seed);
    let sample_root = match boundary {
        UstBoundary::Wired => wired,
        UstBoundary::Free => origin,
    };
    let parent = wilson(&neighbors, sample_root, &mut rng);
    let edges: Vec<_> = parent
        .iter()
        .enumerate()
        .filter_map(|(v, p)| p.map(|p| (v, p, 1.0)))
        .collect();

    let mut coords = Vec::with_capacity(total);
    for y in -m..=m {
        for x in -m..=m {
            coords.push([x as f64, y as f64]);
        }
    }
    let mut outer = Vec::new();
    if boundary == UstBoundary::Wired {
        // Drawn at the corner of the box.
        coords.push([n as f64, n as f64]);
        outer.push(wired);
    } else {
        for y in -m..=m {
            for x in -m..=m {
                if x.abs() == m || y.abs() == m {
                    outer.push(index(x, y).unwrap());
                }
            }
        }
    }
    let label = match boundary {
        UstBoundary::Wired => "wired",
        UstBoundary::Free => "free",
    };
    WeightedGraph::from_edges(total, &edges, origin, outer)?
        .with_coords(coords)
        .map(|g| {
            g.with_descriptor(
                GraphDescriptor::new("ust")
                    .param("N", n)
                    .param("boundary", label)
                    .seed(seed),
            )
        })
}

/// Number of spanning trees: determinant of the Laplacian with the root row
/// and column removed, by fraction-free (Bareiss) elimination in `i128`.
/// Conductances must be integers (edge multiplicities).
pub fn spanning_tree_count(graph: &WeightedGraph) -> Result<u128> {
    let n = graph.len();
    if n == 1 {
        return Ok(1);
    }
    let drop = graph.root();
    let pos = |v: usize| if v < drop { v } else { v - 1 };
    let k = n - 1;
    let mut a = vec![vec![0i128; k]; k];
    for u in 0..n {
        for &(v, c) in graph.neighbors(u) {
            if c.fract() != 0.0 {
                return Err(Error::param("graph", "matrix-tree count needs integer conductances"));
            }
            let c = c as i128;
            if u != drop {
                a[pos(u)][pos(u)] += c;
                if v != drop {
                    a[pos(u)][pos(v)] -= c;
                }
            }
        }
    }
    let overflow = || Error::Size(format!("spanning-tree count of a {n}-vertex graph exceeds i128"));
    let mut prev = 1i128;
    for p in 0..k {
        if a[p][p] == 0 {
            let Some(r) = (p + 1..k).find(|&r| a[r][p] != 0) else {
                return Ok(0);
            };
            // Flips the sign only; the absolute value is taken at the end.
            a.swap(p, r);
        }
        for i in p + 1..k {
            for j in p + 1..k {
                let t = a[i][j]
                    .checked_mul(a[p][p])
                    .and_then(|x| a[i][p].checked_mul(a[p][j]).and_then(|y| x.checked_sub(y)))
                    .ok_or_else(overflow)?;
                a[i][j] = t / prev;
            }
            a[i][p] = 0;
        }
        prev = a[p][p];
    }
    Ok(a[k - 1][k - 1].unsigned_abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{complete, cycle, grid, path};

    #[test]
    fn matrix_tree_small_cases() {
        assert_eq!(spanning_tree_count(&complete(3).unwrap()).unwrap(), 3);
        assert_eq!(spanning_tree_count(&cycle(4).unwrap()).unwrap(), 4);
        assert_eq!(spanning_tree_count(&grid(3, 3).unwrap()).unwrap(), 192);
        assert_eq!(spanning_tree_count(&path(7).unwrap()).unwrap(), 1);
        // Cayley: n^{n-2}
        assert_eq!(spanning_tree_count(&complete(6).unwrap()).unwrap(), 1296);
    }

    #[test]
    fn matrix_tree_overflow_is_reported() {
        let g = grid(14, 14).unwrap();
        assert!(matches!(spanning_tree_count(&g), Err(Error::Size(_))));
    }

    #[test]
    fn wired_box_is_a_tree() {
        for n in 1..=6 {
            let g = wilson_ust(n, 3 + n as u64, UstBoundary::Wired).unwrap();
            assert_eq!(g.len(), (2 * n - 1) * (2 * n - 1) + 1);
            assert_eq!(g.edge_count(), g.len() - 1);
            assert!(g.is_bipartite());
            assert_eq!(g.coords().unwrap()[g.root()], [0.0, 0.0]);
        }
        let f = wilson_ust(4, 1, UstBoundary::Free).unwrap();
        assert_eq!(f.len(), 81);
        assert_eq!(f.edge_count(), 80);
    }

    #[test]
    fn wilson_is_deterministic() {
        let g = grid(5, 4).unwrap();
        assert_eq!(wilson_spanning_tree(&g, 8).unwrap(), wilson_spanning_tree(&g, 8).unwrap());
        assert_eq!(
            wilson_ust(10, 4, UstBoundary::Wired).unwrap(),
            wilson_ust(10, 4, UstBoundary::Wired).unwrap()
        );
    }
}
