//! Weighted graphs with a vertex measure, root and boundary.

use std::collections::{BTreeMap, VecDeque};
use std::fmt::{self, Write as _};

use crate::error::{Error, Result};

/// Builder name, parameters and seed of a constructed graph.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GraphDescriptor {
    pub builder: String,
    pub params: Vec<(String, String)>,
    pub seed: Option<u64>,
}

impl GraphDescriptor {
    pub fn new(builder: impl Into<String>) -> Self {
        GraphDescriptor {
            builder: builder.into(),
            params: Vec::new(),
            seed: None,
        }
    }

    pub fn param(mut self, key: impl Into<String>, value: impl fmt::Display) -> Self {
        self.params.push((key.into(), value.to_string()));
        self
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    /// `# builder`, `# param` and `# seed` comment lines shared by the dumps.
    pub(crate) fn write_header(&self, out: &mut String) {
        let _ = writeln!(out, "# builder {}", self.builder);
        for (k, v) in &self.params {
            let _ = writeln!(out, "# param {k} {v}");
        }
        match self.seed {
            Some(s) => {
                let _ = writeln!(out, "# seed {s}");
            }
            None => out.push_str("# seed none\n"),
        }
    }

    pub(crate) fn read_header<'a>(
        &mut self,
        key: &str,
        mut rest: impl Iterator<Item = &'a str>,
        line: usize,
    ) -> Result<()> {
        match key {
            "builder" => self.builder = rest.collect::<Vec<_>>().join(" "),
            "param" => {
                let k = rest.next().ok_or_else(|| Error::parse(line, "param without key"))?;
                self.params.push((k.to_string(), rest.collect::<Vec<_>>().join(" ")));
            }
            "seed" => {
                self.seed = match rest.next() {
                    Some("none") | None => None,
                    Some(tok) => Some(num(tok, line)?),
                }
            }
            _ => {}
        }
        Ok(())
    }
}

impl fmt::Display for GraphDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.builder)?;
        for (k, v) in &self.params {
            write!(f, " {k}={v}")?;
        }
        if let Some(s) = self.seed {
            write!(f, " seed={s}")?;
        }
        Ok(())
    }
}

/// Finite connected graph with positive conductances and a positive vertex
/// measure. For simple-walk graphs the measure is the vertex degree.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph {
    adjacency: Vec<Vec<(usize, f64)>>,
    measure: Vec<f64>,
    root: usize,
    boundary: Vec<usize>,
    coords: Option<Vec<[f64; 2]>>,
    descriptor: GraphDescriptor,
}

impl WeightedGraph {
    /// Builds a graph from an undirected edge list. Parallel edges are merged
    /// by adding conductances; the measure is the weighted degree.
    pub fn from_edges(
        n: usize,
        edges: &[(usize, usize, f64)],
        root: usize,
        boundary: Vec<usize>,
    ) -> Result<Self> {
        let adjacency = merge_edges(n, edges)?;
        let measure = adjacency
            .iter()
            .map(|nb| nb.iter().map(|&(_, c)| c).sum())
            .collect();
        Self::from_parts(adjacency, measure, root, boundary, None, GraphDescriptor::default())
    }

    /// Builds a graph with an explicit vertex measure.
    pub fn with_measure(
        n: usize,
        edges: &[(usize, usize, f64)],
        measure: Vec<f64>,
        root: usize,
        boundary: Vec<usize>,
    ) -> Result<Self> {
        let adjacency = merge_edges(n, edges)?;
        Self::from_parts(adjacency, measure, root, boundary, None, GraphDescriptor::default())
    }

    fn from_parts(
        adjacency: Vec<Vec<(usize, f64)>>,
        measure: Vec<f64>,
        root: usize,
        boundary: Vec<usize>,
        coords: Option<Vec<[f64; 2]>>,
        descriptor: GraphDescriptor,
    ) -> Result<Self> {
        let n = adjacency.len();
        if n == 0 {
            return Err(Error::Structural("graph has no vertices".into()));
        }
        if root >= n {
            return Err(Error::Structural(format!("root {root} out of range")));
        }
        if let Some(b) = boundary.iter().find(|&&b| b >= n) {
            return Err(Error::Structural(format!("boundary vertex {b} out of range")));
        }
        if measure.len() != n {
            return Err(Error::Structural("measure length mismatch".into()));
        }
        if let Some(m) = measure.iter().find(|m| !(**m > 0.0) || !m.is_finite()) {
            return Err(Error::Structural(format!("vertex measure {m} is not positive")));
        }
        let g = WeightedGraph {
            adjacency,
            measure,
            root,
            boundary,
            coords,
            descriptor,
        };
        if g.distances_from(root).iter().any(|d| d.is_none()) {
            return Err(Error::Structural("graph is not connected".into()));
        }
        Ok(g)
    }

    pub fn with_coords(mut self, coords: Vec<[f64; 2]>) -> Result<Self> {
        if coords.len() != self.len() {
            return Err(Error::Structural("coordinate count mismatch".into()));
        }
        self.coords = Some(coords);
        Ok(self)
    }

    pub fn with_descriptor(mut self, descriptor: GraphDescriptor) -> Self {
        self.descriptor = descriptor;
        self
    }

    pub fn with_root(mut self, root: usize) -> Result<Self> {
        if root >= self.len() {
            return Err(Error::Structural(format!("root {root} out of range")));
        }
        self.root = root;
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.adjacency.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adjacency.is_empty()
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn neighbors(&self, v: usize) -> &[(usize, f64)] {
        &self.adjacency[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    /// Sum of conductances at `v`.
    pub fn conductance(&self, v: usize) -> f64 {
        self.adjacency[v].iter().map(|&(_, c)| c).sum()
    }

    pub fn measure(&self) -> &[f64] {
        &self.measure
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn boundary(&self) -> &[usize] {
        &self.boundary
    }

    pub fn coords(&self) -> Option<&[[f64; 2]]> {
        self.coords.as_deref()
    }

    pub fn descriptor(&self) -> &GraphDescriptor {
        &self.descriptor
    }

    /// Each undirected edge once, as `(u, v, conductance)` with `u < v`.
    pub fn edges(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::with_capacity(self.edge_count());
        for (u, nb) in self.adjacency.iter().enumerate() {
            for &(v, c) in nb {
                if u < v {
                    out.push((u, v, c));
                }
            }
        }
        out
    }

    /// Graph distances from `src` (`None` when unreachable).
    pub fn distances_from(&self, src: usize) -> Vec<Option<u32>> {
        let mut dist = vec![None; self.len()];
        dist[src] = Some(0);
        let mut queue = VecDeque::from([src]);
        while let Some(u) = queue.pop_front() {
            let d = dist[u].unwrap();
            for &(v, _) in &self.adjacency[u] {
                if dist[v].is_none() {
                    dist[v] = Some(d + 1);
                    queue.push_back(v);
                }
            }
        }
        dist
    }

    /// Two-colourability.
    pub fn is_bipartite(&self) -> bool {
        let dist = self.distances_from(self.root);
        self.adjacency.iter().enumerate().all(|(u, nb)| {
            nb.iter()
                .all(|&(v, _)| dist[u].map(|d| d % 2) != dist[v].map(|d| d % 2))
        })
    }

    /// True when every conductance is 1 and the measure equals the degree.
    pub fn is_simple_walk(&self) -> bool {
        self.adjacency.iter().enumerate().all(|(u, nb)| {
            nb.iter().all(|&(_, c)| c == 1.0) && self.measure[u] == nb.len() as f64
        })
    }

    /// Writes the adjacency-list dump.
    pub fn to_dump(&self) -> String {
        let mut out = String::new();
        out.push_str("# heatlab graph\n");
        self.descriptor.write_header(&mut out);
        let _ = writeln!(out, "# vertices {}", self.len());
        let _ = writeln!(out, "# root {}", self.root);
        out.push_str("# boundary");
        for b in &self.boundary {
            let _ = write!(out, " {b}");
        }
        out.push('\n');
        for (u, v, c) in self.edges() {
            let _ = writeln!(out, "e {u} {v} {c}");
        }
        for (i, m) in self.measure.iter().enumerate() {
            match &self.coords {
                Some(xy) => {
                    let _ = writeln!(out, "v {i} {m} {} {}", xy[i][0], xy[i][1]);
                }
                None => {
                    let _ = writeln!(out, "v {i} {m}");
                }
            }
        }
        out
    }

    pub fn from_dump(text: &str) -> Result<Self> {
        let mut descriptor = GraphDescriptor::default();
        let mut n = None;
        let mut root = None;
        let mut boundary = Vec::new();
        let mut edges = Vec::new();
        let mut measure: Vec<f64> = Vec::new();
        let mut coords: Vec<[f64; 2]> = Vec::new();
        for (ln, raw) in text.lines().enumerate() {
            let line_no = ln + 1;
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            let mut it = line.split_whitespace();
            match it.next() {
                Some("#") => match it.next() {
                    Some(key @ ("builder" | "param" | "seed")) => {
                        descriptor.read_header(key, it, line_no)?;
                    }
                    Some("vertices") => n = Some(num::<usize>(field(it.next(), line_no)?, line_no)?),
                    Some("root") => root = Some(num::<usize>(field(it.next(), line_no)?, line_no)?),
                    Some("boundary") => {
                        boundary = it.map(|t| num(t, line_no)).collect::<Result<_>>()?;
                    }
                    _ => {}
                },
                Some("e") => {
                    let u = num(field(it.next(), line_no)?, line_no)?;
                    let v = num(field(it.next(), line_no)?, line_no)?;
                    let c = num(field(it.next(), line_no)?, line_no)?;
                    edges.push((u, v, c));
                }
                Some("v") => {
                    let id: usize = num(field(it.next(), line_no)?, line_no)?;
                    if id != measure.len() {
                        return Err(Error::parse(line_no, format!("vertex {id} out of order")));
                    }
                    measure.push(num(field(it.next(), line_no)?, line_no)?);
                    if let Some(x) = it.next() {
                        let y = field(it.next(), line_no)?;
                        coords.push([num(x, line_no)?, num(y, line_no)?]);
                    }
                }
                Some(other) => {
                    return Err(Error::parse(line_no, format!("unknown record `{other}`")))
                }
                None => {}
            }
        }
        let n = n.ok_or_else(|| Error::parse(0, "missing vertices header"))?;
        let root = root.ok_or_else(|| Error::parse(0, "missing root header"))?;
        if measure.len() != n {
            return Err(Error::parse(0, format!("expected {n} vertex records")));
        }
        let adjacency = merge_edges(n, &edges)?;
        let coords = match coords.len() {
            0 => None,
            k if k == n => Some(coords),
            _ => return Err(Error::parse(0, "coordinates given for only some vertices")),
        };
        Self::from_parts(adjacency, measure, root, boundary, coords, descriptor)
    }
}

fn field(tok: Option<&str>, line: usize) -> Result<&str> {
    tok.ok_or_else(|| Error::parse(line, "missing field"))
}

fn num<T: std::str::FromStr>(tok: &str, line: usize) -> Result<T>
where
    T::Err: fmt::Display,
{
    tok.parse::<T>()
        .map_err(|e| Error::parse(line, format!("`{tok}`: {e}")))
}

fn merge_edges(n: usize, edges: &[(usize, usize, f64)]) -> Result<Vec<Vec<(usize, f64)>>> {
    let mut maps: Vec<BTreeMap<usize, f64>> = vec![BTreeMap::new(); n];
    for &(u, v, c) in edges {
        if u >= n || v >= n {
            return Err(Error::Structural(format!("edge ({u}, {v}) out of range")));
        }
        if u == v {
            return Err(Error::Structural(format!("self-loop at {u}")));
        }
        if !(c > 0.0) || !c.is_finite() {
            return Err(Error::Structural(format!("conductance {c} on ({u}, {v})")));
        }
        *maps[u].entry(v).or_insert(0.0) += c;
        *maps[v].entry(u).or_insert(0.0) += c;
    }
    Ok(maps.into_iter().map(|m| m.into_iter().collect()).collect())
}

/// Path `0 - 1 - ... - (n-1)`, boundary at both ends.
pub fn path(n: usize) -> Result<WeightedGraph> {
    if n < 2 {
        return Err(Error::param("n", "a path needs at least 2 vertices"));
    }
    let edges: Vec<_> = (0..n - 1).map(|i| (i, i + 1, 1.0)).collect();
    Ok(WeightedGraph::from_edges(n, &edges, 0, vec![0, n - 1])?
        .with_descriptor(GraphDescriptor::new("path").param("n", n)))
}

/// Cycle on `n ≥ 3` vertices.
pub fn cycle(n: usize) -> Result<WeightedGraph> {
    if n < 3 {
        return Err(Error::param("n", "a cycle needs at least 3 vertices"));
    }
    let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n, 1.0)).collect();
    Ok(WeightedGraph::from_edges(n, &edges, 0, vec![])?
        .with_descriptor(GraphDescriptor::new("cycle").param("n", n)))
}

/// Complete graph on `n ≥ 2` vertices.
pub fn complete(n: usize) -> Result<WeightedGraph> {
    if n < 2 {
        return Err(Error::param("n", "need at least 2 vertices"));
    }
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            edges.push((u, v, 1.0));
        }
    }
    Ok(WeightedGraph::from_edges(n, &edges, 0, vec![])?
        .with_descriptor(GraphDescriptor::new("complete").param("n", n)))
}

/// `w × h` square-lattice box, vertex `(i, j)` at index `j * w + i`; the
/// boundary is the outer ring.
pub fn grid(w: usize, h: usize) -> Result<WeightedGraph> {
    if w == 0 || h == 0 || w * h < 2 {
        return Err(Error::param("grid", "need at least 2 vertices"));
    }
    let mut edges = Vec::new();
    let mut boundary = Vec::new();
    let mut coords = Vec::with_capacity(w * h);
    for j in 0..h {
        for i in 0..w {
            let v = j * w + i;
            if i + 1 < w {
                edges.push((v, v + 1, 1.0));
            }
            if j + 1 < h {
                edges.push((v, v + w, 1.0));
            }
            if i == 0 || j == 0 || i + 1 == w || j + 1 == h {
                boundary.push(v);
            }
            coords.push([i as f64, j as f64]);
        }
    }
    WeightedGraph::from_edges(w * h, &edges, 0, boundary)?
        .with_coords(coords)
        .map(|g| g.with_descriptor(GraphDescriptor::new("grid").param("w", w).param("h", h)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simple_builders() {
        let p = path(3).unwrap();
        assert_eq!(p.edge_count(), 2);
        assert_eq!(p.measure(), &[1.0, 2.0, 1.0]);
        assert!(p.is_bipartite());
        assert!(!complete(3).unwrap().is_bipartite());
        let g = grid(3, 3).unwrap();
        assert_eq!(g.edge_count(), 12);
        assert_eq!(g.boundary().len(), 8);
        assert!(g.is_simple_walk());
    }

    #[test]
    fn rejects_disconnected_and_bad_edges() {
        assert!(matches!(
            WeightedGraph::from_edges(3, &[(0, 1, 1.0)], 0, vec![]),
            Err(Error::Structural(_))
        ));
        assert!(WeightedGraph::from_edges(2, &[(0, 0, 1.0)], 0, vec![]).is_err());
        assert!(WeightedGraph::from_edges(2, &[(0, 1, -1.0)], 0, vec![]).is_err());
    }

    #[test]
    fn parallel_edges_merge() {
        let g = WeightedGraph::from_edges(2, &[(0, 1, 1.0), (1, 0, 2.0)], 0, vec![]).unwrap();
        assert_eq!(g.neighbors(0), &[(1, 3.0)]);
        assert_eq!(g.measure(), &[3.0, 3.0]);
    }

    #[test]
    fn dump_round_trip() {
        let g = grid(4, 3)
            .unwrap()
            .with_descriptor(GraphDescriptor::new("grid").param("w", 4).param("h", 3).seed(9));
        let text = g.to_dump();
        let back = WeightedGraph::from_dump(&text).unwrap();
        assert_eq!(back, g);
        assert_eq!(back.to_dump(), text);
        let c = cycle(5).unwrap();
        assert_eq!(WeightedGraph::from_dump(&c.to_dump()).unwrap(), c);
    }
}
