//! Undirected simple graphs and the generators used by the experiments:
//! random geometric graphs on the unit square, 2-D tori and complete graphs.
//!
//! Graphs are stored in compressed adjacency form (one offset table plus a
//! flat neighbor array) with every neighbor list sorted ascending. A `Graph`
//! is immutable once built, so one instance can be shared by any number of
//! concurrently running walks.

use std::collections::VecDeque;
use std::f64::consts::PI;
use std::fmt::Write as _;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default number of resampling attempts for connected geometric graphs.
pub const DEFAULT_MAX_RETRIES: u32 = 100;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    offsets: Vec<usize>,
    neighbors: Vec<usize>,
}

impl Graph {
    /// Builds a graph from an undirected edge list.
    ///
    /// Endpoint order within an edge is irrelevant. Self-loops, repeated edges
    /// and out-of-range ids are rejected.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("graph needs at least one node"));
        }
        let mut adjacency = vec![Vec::new(); n];
        for &(u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::invalid(format!("edge ({u}, {v}) out of range for {n} nodes")));
            }
            if u == v {
                return Err(Error::invalid(format!("self-loop at node {u}")));
            }
            adjacency[u].push(v);
            adjacency[v].push(u);
        }
        for (v, list) in adjacency.iter_mut().enumerate() {
            list.sort_unstable();
            if let Some(w) = list.windows(2).find(|w| w[0] == w[1]) {
                return Err(Error::invalid(format!("duplicate edge ({}, {})", v.min(w[0]), v.max(w[0]))));
            }
        }
        Ok(Self::from_sorted_adjacency(adjacency))
    }

    fn from_sorted_adjacency(adjacency: Vec<Vec<usize>>) -> Self {
        let mut offsets = Vec::with_capacity(adjacency.len() + 1);
        offsets.push(0);
        let mut neighbors = Vec::with_capacity(adjacency.iter().map(Vec::len).sum());
        for list in adjacency {
            neighbors.extend_from_slice(&list);
            offsets.push(neighbors.len());
        }
        Graph { offsets, neighbors }
    }

    pub fn node_count(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn edge_count(&self) -> usize {
        self.neighbors.len() / 2
    }

    #[inline]
    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.neighbors[self.offsets[v]..self.offsets[v + 1]]
    }

    #[inline]
    pub fn degree(&self, v: usize) -> usize {
        self.offsets[v + 1] - self.offsets[v]
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.neighbors(u).binary_search(&v).is_ok()
    }

    /// Edges as `(u, v)` pairs with `u < v`, in ascending lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.node_count())
            .flat_map(move |u| self.neighbors(u).iter().copied().filter(move |&v| v > u).map(move |v| (u, v)))
    }

    /// Breadth-first reachability from node 0.
    pub fn is_connected(&self) -> bool {
        let n = self.node_count();
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([0]);
        seen[0] = true;
        let mut reached = 1;
        while let Some(v) = queue.pop_front() {
            for &u in self.neighbors(v) {
                if !seen[u] {
                    seen[u] = true;
                    reached += 1;
                    queue.push_back(u);
                }
            }
        }
        reached == n
    }

    pub fn stats(&self) -> GraphStats {
        let n = self.node_count();
        let degrees = (0..n).map(|v| self.degree(v));
        GraphStats {
            nodes: n,
            edges: self.edge_count(),
            degree_sum: self.neighbors.len(),
            mean_degree: self.neighbors.len() as f64 / n as f64,
            min_degree: degrees.clone().min().unwrap_or(0),
            max_degree: degrees.max().unwrap_or(0),
            connected: self.is_connected(),
        }
    }

    /// Stable 64-bit FNV-1a fingerprint of the canonical edge list.
    pub fn fingerprint(&self) -> u64 {
        const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
        const PRIME: u64 = 0x0000_0100_0000_01b3;
        let mut hash = OFFSET;
        let mut feed = |x: u64| {
            for byte in x.to_le_bytes() {
                hash ^= u64::from(byte);
                hash = hash.wrapping_mul(PRIME);
            }
        };
        feed(self.node_count() as u64);
        for (u, v) in self.edges() {
            feed(u as u64);
            feed(v as u64);
        }
        hash
    }

    /// Parses the `n m` / `u v` edge-list text format.
    pub fn from_edge_list(text: &str) -> Result<Self> {
        let parse_err = |line: usize, message: String| Error::Parse { line, message };
        let mut lines =
            text.lines().enumerate().map(|(i, l)| (i + 1, l.trim())).filter(|(_, l)| !l.is_empty());

        let (header_line, header) =
            lines.next().ok_or_else(|| parse_err(1, "missing header line \"n m\"".into()))?;
        let (n, m) = parse_pair(header)
            .ok_or_else(|| parse_err(header_line, format!("malformed header {header:?}")))?;
        if n == 0 {
            return Err(parse_err(header_line, "node count must be at least 1".into()));
        }

        let mut adjacency = vec![Vec::new(); n];
        let mut seen = 0usize;
        for (line, body) in lines {
            if seen == m {
                return Err(parse_err(line, format!("more than the declared {m} edges")));
            }
            let (u, v) =
                parse_pair(body).ok_or_else(|| parse_err(line, format!("malformed edge {body:?}")))?;
            if u >= n || v >= n {
                return Err(parse_err(line, format!("node id {} out of range 0..{n}", u.max(v))));
            }
            if u == v {
                return Err(parse_err(line, format!("self-loop at node {u}")));
            }
            let (a, b) = (u.min(v), u.max(v));
            if adjacency[a].contains(&b) {
                return Err(parse_err(line, format!("duplicate edge {a} {b}")));
            }
            adjacency[a].push(b);
            adjacency[b].push(a);
            seen += 1;
        }
        if seen != m {
            return Err(parse_err(
                text.lines().count().max(1),
                format!("header declares {m} edges but {seen} were given"),
            ));
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        Ok(Self::from_sorted_adjacency(adjacency))
    }

    /// Canonical edge-list text: header, then edges in ascending `(u, v)`.
    pub fn to_edge_list(&self) -> String {
        let mut out = String::with_capacity(16 + self.edge_count() * 10);
        let _ = writeln!(out, "{} {}", self.node_count(), self.edge_count());
        for (u, v) in self.edges() {
            let _ = writeln!(out, "{u} {v}");
        }
        out
    }
}

fn parse_pair(line: &str) -> Option<(usize, usize)> {
    let mut fields = line.split_ascii_whitespace();
    let a = fields.next()?.parse().ok()?;
    let b = fields.next()?.parse().ok()?;
    fields.next().is_none().then_some((a, b))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphStats {
    pub nodes: usize,
    pub edges: usize,
    /// Numerator of the mean degree; the exact mean is `degree_sum / nodes`.
    pub degree_sum: usize,
    pub mean_degree: f64,
    pub min_degree: usize,
    pub max_degree: usize,
    pub connected: bool,
}

/// Points in the unit square, one per node.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeometricPoints(pub Vec<(f64, f64)>);

impl GeometricPoints {
    pub fn uniform<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        GeometricPoints((0..n).map(|_| (rng.gen::<f64>(), rng.gen::<f64>())).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// One `x y` line per node, in node order.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (x, y) in &self.0 {
            let _ = writeln!(out, "{x} {y}");
        }
        out
    }
}

/// `sqrt(ln n / (pi n))`, the connectivity threshold radius for `n` uniform
/// points in the unit square.
pub fn connectivity_radius(n: usize) -> Result<f64> {
    if n < 2 {
        return Err(Error::invalid(format!("connectivity radius needs n >= 2, got {n}")));
    }
    let n = n as f64;
    Ok((n.ln() / (PI * n)).sqrt())
}

fn check_radius(radius: f64) -> Result<()> {
    if !(radius > 0.0 && radius <= std::f64::consts::SQRT_2) {
        return Err(Error::invalid(format!("radius must lie in (0, sqrt 2], got {radius}")));
    }
    Ok(())
}

/// Connects every pair of points at Euclidean distance at most `radius`.
///
/// Points are bucketed into square cells of side `radius` so only adjacent
/// cells are compared.
pub fn geometric_graph(points: &GeometricPoints, radius: f64) -> Result<Graph> {
    check_radius(radius)?;
    let n = points.len();
    if n == 0 {
        return Err(Error::invalid("geometric graph needs at least one point"));
    }
    for &(x, y) in &points.0 {
        if !(0.0..=1.0).contains(&x) || !(0.0..=1.0).contains(&y) {
            return Err(Error::invalid(format!("point ({x}, {y}) outside the unit square")));
        }
    }

    let r2 = radius * radius;
    let cells = ((1.0 / radius).floor() as usize).clamp(1, 1 << 12);
    let cell_of = |c: f64| ((c * cells as f64) as usize).min(cells - 1);
    let mut grid: Vec<Vec<usize>> = vec![Vec::new(); cells * cells];
    for (i, &(x, y)) in points.0.iter().enumerate() {
        grid[cell_of(y) * cells + cell_of(x)].push(i);
    }

    let mut adjacency = vec![Vec::new(); n];
    for (i, &(x, y)) in points.0.iter().enumerate() {
        let (cx, cy) = (cell_of(x), cell_of(y));
        for gy in cy.saturating_sub(1)..=(cy + 1).min(cells - 1) {
            for gx in cx.saturating_sub(1)..=(cx + 1).min(cells - 1) {
                for &j in &grid[gy * cells + gx] {
                    if j <= i {
                        continue;
                    }
                    let (px, py) = points.0[j];
                    let (dx, dy) = (x - px, y - py);
                    if dx * dx + dy * dy <= r2 {
                        adjacency[i].push(j);
                        adjacency[j].push(i);
                    }
                }
            }
        }
    }
    for list in &mut adjacency {
        list.sort_unstable();
    }
    Ok(Graph::from_sorted_adjacency(adjacency))
}

/// Samples `G(n, radius)`. With `require_connected`, disconnected samples
/// are discarded and redrawn, up to `max_retries` draws in total.
pub fn generate_rgg<R: Rng + ?Sized>(
    n: usize,
    radius: f64,
    rng: &mut R,
    require_connected: bool,
    max_retries: u32,
) -> Result<(Graph, GeometricPoints)> {
    if n == 0 {
        return Err(Error::invalid("geometric graph needs at least one node"));
    }
    check_radius(radius)?;
    let attempts = max_retries.max(1);
    for _ in 0..attempts {
        let points = GeometricPoints::uniform(n, rng);
        let graph = geometric_graph(&points, radius)?;
        if !require_connected || graph.is_connected() {
            return Ok((graph, points));
        }
    }
    Err(Error::GenerationFailure { retries: attempts })
}

/// `rows x cols` torus in row-major order: node `r * cols + c` is adjacent
/// to its four wrap-around grid neighbors.
pub fn generate_torus(rows: usize, cols: usize) -> Result<Graph> {
    if rows < 3 || cols < 3 {
        return Err(Error::invalid(format!("torus dimensions must be at least 3x3, got {rows}x{cols}")));
    }
    let id = |r: usize, c: usize| r * cols + c;
    let adjacency = (0..rows)
        .flat_map(|r| (0..cols).map(move |c| (r, c)))
        .map(|(r, c)| {
            let mut list = vec![
                id((r + rows - 1) % rows, c),
                id((r + 1) % rows, c),
                id(r, (c + cols - 1) % cols),
                id(r, (c + 1) % cols),
            ];
            list.sort_unstable();
            list
        })
        .collect();
    Ok(Graph::from_sorted_adjacency(adjacency))
}

pub fn generate_complete(n: usize) -> Result<Graph> {
    if n == 0 {
        return Err(Error::invalid("complete graph needs at least one node"));
    }
    let adjacency = (0..n).map(|v| (0..n).filter(|&u| u != v).collect()).collect();
    Ok(Graph::from_sorted_adjacency(adjacency))
}

pub fn generate_path(n: usize) -> Result<Graph> {
    let edges: Vec<_> = (1..n).map(|v| (v - 1, v)).collect();
    Graph::from_edges(n, &edges)
}

pub fn generate_cycle(n: usize) -> Result<Graph> {
    if n < 3 {
        return Err(Error::invalid(format!("cycle needs at least 3 nodes, got {n}")));
    }
    let edges: Vec<_> = (0..n).map(|v| (v, (v + 1) % n)).collect();
    Graph::from_edges(n, &edges)
}

/// Star with center 0 and `leaves` leaves.
pub fn generate_star(leaves: usize) -> Result<Graph> {
    let edges: Vec<_> = (1..=leaves).map(|v| (0, v)).collect();
    Graph::from_edges(leaves + 1, &edges)
}
