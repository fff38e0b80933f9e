//! Generalized Sierpinski gasket graphs SG(ν): deterministic, scale-irregular
//! and random recursive.
//!
//! Corners live on an integer triangular lattice: the outer triangle has
//! corners `(0,0)`, `(D,0)`, `(0,D)` in skew coordinates, where `D` is a common
//! denominator of every cell side. Corners that coincide are therefore glued
//! by exact integer equality. Vertex ids follow the lexicographic order of
//! `(b, a)`, which makes the labelling canonical: two plans describing the same
//! set of cells produce identical graphs.

use std::collections::HashSet;

use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::{GraphDescriptor, WeightedGraph};
use crate::seed;

/// One cell of a recursion tree: either kept whole or split SG(ν)-style into
/// `ν(ν+1)/2` children.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PlanNode {
    Leaf,
    Split { nu: u32, children: Vec<PlanNode> },
}

impl PlanNode {
    fn depth(&self) -> usize {
        match self {
            PlanNode::Leaf => 0,
            PlanNode::Split { children, .. } => {
                1 + children.iter().map(PlanNode::depth).max().unwrap_or(0)
            }
        }
    }

    fn min_depth(&self) -> usize {
        match self {
            PlanNode::Leaf => 0,
            PlanNode::Split { children, .. } => {
                1 + children.iter().map(PlanNode::min_depth).min().unwrap_or(0)
            }
        }
    }

    pub fn nu(&self) -> Option<u32> {
        match self {
            PlanNode::Leaf => None,
            PlanNode::Split { nu, .. } => Some(*nu),
        }
    }

    pub fn children(&self) -> &[PlanNode] {
        match self {
            PlanNode::Leaf => &[],
            PlanNode::Split { children, .. } => children,
        }
    }
}

/// Recipe for a gasket graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GasketPlan {
    /// Every cell at level `i` is split with `nus[i]` (scale-irregular gasket;
    /// constant `nus` gives SG(ν)).
    Homogeneous { nus: Vec<u32> },
    /// Each cell carries its own ν (random recursive gasket).
    Recursive { root: PlanNode, levels: usize },
}

fn cell_count(nu: u32) -> usize {
    (nu * (nu + 1) / 2) as usize
}

impl GasketPlan {
    /// SG(ν) to `level` subdivision rounds.
    pub fn constant(nu: u32, level: usize) -> Self {
        GasketPlan::Homogeneous {
            nus: vec![nu; level],
        }
    }

    pub fn levels(&self) -> usize {
        match self {
            GasketPlan::Homogeneous { nus } => nus.len(),
            GasketPlan::Recursive { levels, .. } => *levels,
        }
    }

    pub fn validate(&self) -> Result<()> {
        fn check(node: &PlanNode) -> Result<()> {
            if let PlanNode::Split { nu, children } = node {
                if *nu < 2 {
                    return Err(Error::param("nu", format!("branching {nu} < 2")));
                }
                if children.len() != cell_count(*nu) {
                    return Err(Error::param(
                        "plan",
                        format!("ν = {nu} cell with {} children", children.len()),
                    ));
                }
                children.iter().try_for_each(check)?;
            }
            Ok(())
        }
        match self {
            GasketPlan::Homogeneous { nus } => match nus.iter().find(|&&nu| nu < 2) {
                Some(nu) => Err(Error::param("nu", format!("branching {nu} < 2"))),
                None => Ok(()),
            },
            GasketPlan::Recursive { root, levels } => {
                check(root)?;
                if root.depth() != *levels || root.min_depth() != *levels {
                    return Err(Error::param(
                        "plan",
                        format!("recursion tree depth differs from level count {levels}"),
                    ));
                }
                Ok(())
            }
        }
    }

    /// Expands the plan into an explicit recursion tree.
    pub fn to_tree(&self) -> PlanNode {
        match self {
            GasketPlan::Recursive { root, .. } => root.clone(),
            GasketPlan::Homogeneous { nus } => {
                fn expand(nus: &[u32]) -> PlanNode {
                    match nus.split_first() {
                        None => PlanNode::Leaf,
                        Some((&nu, rest)) => PlanNode::Split {
                            nu,
                            children: (0..cell_count(nu)).map(|_| expand(rest)).collect(),
                        },
                    }
                }
                expand(nus)
            }
        }
    }

    /// Number of smallest cells.
    pub fn cell_total(&self) -> usize {
        match self {
            GasketPlan::Homogeneous { nus } => nus.iter().map(|&nu| cell_count(nu)).product(),
            GasketPlan::Recursive { root, .. } => {
                fn count(n: &PlanNode) -> usize {
                    match n {
                        PlanNode::Leaf => 1,
                        PlanNode::Split { children, .. } => children.iter().map(count).sum(),
                    }
                }
                count(root)
            }
        }
    }

    /// Vertex count of the built graph. Cells meet only at corners, so
    /// splitting a cell with ν adds its `(ν+1)(ν+2)/2 - 3` non-corner
    /// lattice points.
    pub fn vertex_count(&self) -> usize {
        let added = |nu: u32| ((nu + 1) * (nu + 2) / 2 - 3) as usize;
        match self {
            GasketPlan::Homogeneous { nus } => {
                let mut cells = 1;
                let mut vertices = 3;
                for &nu in nus {
                    vertices += cells * added(nu);
                    cells *= cell_count(nu);
                }
                vertices
            }
            GasketPlan::Recursive { root, .. } => {
                fn walk(n: &PlanNode, added: &dyn Fn(u32) -> usize) -> usize {
                    match n {
                        PlanNode::Leaf => 0,
                        PlanNode::Split { nu, children } => {
                            added(*nu) + children.iter().map(|c| walk(c, added)).sum::<usize>()
                        }
                    }
                }
                3 + walk(root, &added)
            }
        }
    }

    /// Lattice denominator: product over levels of the lcm of the ν used there.
    fn denominator(&self) -> Result<i64> {
        let mut per_level: Vec<i64> = vec![1; self.levels()];
        match self {
            GasketPlan::Homogeneous { nus } => {
                for (slot, &nu) in per_level.iter_mut().zip(nus) {
                    *slot = nu as i64;
                }
            }
            GasketPlan::Recursive { root, .. } => {
                fn walk(n: &PlanNode, depth: usize, acc: &mut [i64]) {
                    if let PlanNode::Split { nu, children } = n {
                        acc[depth] = lcm(acc[depth], *nu as i64);
                        for c in children {
                            walk(c, depth + 1, acc);
                        }
                    }
                }
                walk(root, 0, &mut per_level);
            }
        }
        per_level.iter().try_fold(1i64, |d, &l| {
            d.checked_mul(l)
                .filter(|v| *v < (1i64 << 40))
                .ok_or_else(|| Error::param("plan", "too many levels for exact coordinates"))
        })
    }
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn lcm(a: i64, b: i64) -> i64 {
    a / gcd(a, b) * b
}

type Corner = (i64, i64);

fn emit(
    a: i64,
    b: i64,
    side: i64,
    node: Option<&PlanNode>,
    nus: &[u32],
    cells: &mut Vec<[Corner; 3]>,
) {
    let nu = match node {
        Some(PlanNode::Split { nu, .. }) => Some(*nu),
        Some(PlanNode::Leaf) => None,
        None => nus.first().copied(),
    };
    let Some(nu) = nu else {
        cells.push([(a, b), (a + side, b), (a, b + side)]);
        return;
    };
    let step = side / nu as i64;
    let mut child = 0;
    for j in 0..nu as i64 {
        for i in 0..nu as i64 - j {
            let sub = node.map(|n| &n.children()[child]);
            let rest = if node.is_some() { nus } else { &nus[1..] };
            emit(a + i * step, b + j * step, step, sub, rest, cells);
            child += 1;
        }
    }
}

/// Builds the level-n graph approximation described by `plan`.
///
/// Vertices are corners of the smallest triangles, edges join corners of a
/// common smallest triangle, the boundary is the three outer corners and the
/// root is the corner `(0, 0)`, which always receives id 0.
pub fn build_gasket(plan: &GasketPlan) -> Result<WeightedGraph> {
    plan.validate()?;
    let d = plan.denominator()?;
    let mut cells = Vec::with_capacity(plan.cell_total());
    match plan {
        GasketPlan::Homogeneous { nus } => emit(0, 0, d, None, nus, &mut cells),
        GasketPlan::Recursive { root, .. } => emit(0, 0, d, Some(root), &[], &mut cells),
    }

    let mut corners: Vec<Corner> = cells.iter().flatten().copied().collect();
    corners.sort_unstable_by_key(|&(a, b)| (b, a));
    corners.dedup();
    let id = |c: Corner| {
        corners
            .binary_search_by_key(&(c.1, c.0), |&(a, b)| (b, a))
            .expect("corner registered")
    };

    let mut seen = HashSet::with_capacity(cells.len() * 3);
    let mut edges = Vec::with_capacity(cells.len() * 3);
    for cell in &cells {
        for (p, q) in [(0, 1), (1, 2), (0, 2)] {
            let (u, v) = (id(cell[p]), id(cell[q]));
            let key = (u.min(v), u.max(v));
            if seen.insert(key) {
                edges.push((key.0, key.1, 1.0));
            }
        }
    }
    let boundary = vec![id((0, 0)), id((d, 0)), id((0, d))];
    let scale = d as f64;
    let coords = corners
        .iter()
        .map(|&(a, b)| {
            let (a, b) = (a as f64, b as f64);
            [(a + 0.5 * b) / scale, b * (0.75f64).sqrt() / scale]
        })
        .collect();

    let descriptor = match plan {
        GasketPlan::Homogeneous { nus } => GraphDescriptor::new("gasket")
            .param("level", nus.len())
            .param(
                "nu",
                nus.iter().map(u32::to_string).collect::<Vec<_>>().join(","),
            ),
        GasketPlan::Recursive { levels, .. } => {
            GraphDescriptor::new("recursive-gasket").param("level", levels)
        }
    };
    WeightedGraph::from_edges(corners.len(), &edges, id((0, 0)), boundary)?
        .with_coords(coords)
        .map(|g| g.with_descriptor(descriptor))
}

/// Draws a random recursive plan: every cell independently picks its own ν
/// from `weights` (pairs `(ν, probability)`), in depth-first order.
pub fn build_recursive_gasket(
    weights: &[(u32, f64)],
    level: usize,
    seed: u64,
) -> Result<GasketPlan> {
    if weights.is_empty() {
        return Err(Error::param("offspring_weights", "no branching values"));
    }
    if let Some((nu, _)) = weights.iter().find(|(nu, _)| *nu < 2) {
        return Err(Error::param("offspring_weights", format!("branching {nu} < 2")));
    }
    if weights.iter().any(|&(_, p)| !(p >= 0.0)) {
        return Err(Error::param("offspring_weights", "negative probability"));
    }
    let total: f64 = weights.iter().map(|&(_, p)| p).sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::param(
            "offspring_weights",
            format!("probabilities sum to {total}"),
        ));
    }
    let mut rng = seed::rng(seed);
    fn grow(
        depth: usize,
        level: usize,
        weights: &[(u32, f64)],
        rng: &mut impl Rng,
    ) -> PlanNode {
        if depth == level {
            return PlanNode::Leaf;
        }
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut nu = weights.last().unwrap().0;
        for &(v, p) in weights {
            acc += p;
            if u < acc {
                nu = v;
                break;
            }
        }
        let children = (0..cell_count(nu))
            .map(|_| grow(depth + 1, level, weights, rng))
            .collect();
        PlanNode::Split { nu, children }
    }
    let root = grow(0, level, weights, &mut rng);
    Ok(GasketPlan::Recursive {
        root,
        levels: level,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_cases() {
        let g0 = build_gasket(&GasketPlan::constant(2, 0)).unwrap();
        assert_eq!((g0.len(), g0.edge_count()), (3, 3));
        let g1 = build_gasket(&GasketPlan::constant(2, 1)).unwrap();
        assert_eq!((g1.len(), g1.edge_count()), (6, 9));
        let g3 = build_gasket(&GasketPlan::constant(3, 1)).unwrap();
        assert_eq!((g3.len(), g3.edge_count()), (10, 18));
    }

    #[test]
    fn sg2_vertex_counts() {
        for n in 0..=6u32 {
            let g = build_gasket(&GasketPlan::constant(2, n as usize)).unwrap();
            assert_eq!(g.len(), (3usize.pow(n + 1) + 3) / 2, "level {n}");
            assert_eq!(g.edge_count(), 3usize.pow(n + 1));
            assert_eq!(g.root(), 0);
            assert_eq!(g.boundary().len(), 3);
            for &b in g.boundary() {
                assert_eq!(g.degree(b), 2);
            }
        }
    }

    #[test]
    fn rejects_small_nu() {
        assert!(matches!(
            build_gasket(&GasketPlan::Homogeneous { nus: vec![2, 1] }),
            Err(Error::Parameter { .. })
        ));
        assert!(build_recursive_gasket(&[(1, 1.0)], 2, 0).is_err());
        assert!(build_recursive_gasket(&[(2, 0.5), (3, 0.4)], 2, 0).is_err());
    }

    #[test]
    fn degenerate_recursive_matches_deterministic() {
        let rec = build_recursive_gasket(&[(2, 1.0), (3, 0.0)], 4, 77).unwrap();
        let det = GasketPlan::constant(2, 4);
        assert_eq!(rec.to_tree(), det.to_tree());
        let a = build_gasket(&rec).unwrap();
        let b = build_gasket(&det).unwrap();
        assert_eq!(a.edges(), b.edges());
        assert_eq!(a.coords(), b.coords());
    }

    #[test]
    fn scale_irregular_mixes_levels() {
        let g = build_gasket(&GasketPlan::Homogeneous { nus: vec![3, 2] }).unwrap();
        // 6 cells of SG(3) each split into 3 SG(2) cells.
        assert_eq!(g.edge_count(), 6 * 3 * 3);
        let h = build_gasket(&GasketPlan::Homogeneous { nus: vec![2, 3] }).unwrap();
        assert_eq!(h.edge_count(), 3 * 6 * 3);
        assert_ne!(g.edges(), h.edges());
    }

    #[test]
    fn recursive_child_counts() {
        for s in 0..20 {
            let plan = build_recursive_gasket(&[(2, 0.5), (3, 0.5)], 2, s).unwrap();
            let GasketPlan::Recursive { root, .. } = &plan else {
                unreachable!()
            };
            assert!([3, 6].contains(&root.children().len()));
            let g = build_gasket(&plan).unwrap();
            assert_eq!(g.edge_count(), plan.cell_total() * 3);
        }
    }
}
