//! Finite simple undirected connected graphs with 1-indexed vertices.

use std::collections::{BTreeSet, VecDeque};
use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{Error, Result};

pub type Vertex = usize;

/// Immutable graph with precomputed all-pairs distances.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    adj: Vec<Vec<Vertex>>,
    edges: Vec<(Vertex, Vertex)>,
    dist: Vec<u32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Classification {
    pub is_tree: bool,
    pub is_path: bool,
}

impl Graph {
    /// Builds a graph from an edge list. Edges are unordered; the graph must be
    /// simple and connected.
    pub fn new(vertex_count: usize, edges: &[(Vertex, Vertex)]) -> Result<Self> {
        let lines: Vec<(usize, Vertex, Vertex)> = edges.iter().enumerate().map(|(i, &(u, v))| (i + 1, u, v)).collect();
        Self::build(vertex_count, &lines)
    }

    fn build(n: usize, edges: &[(usize, Vertex, Vertex)]) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidSpec {
                field: "vertex_count",
                message: "must be positive".into(),
            });
        }
        let mut adj = vec![Vec::new(); n + 1];
        let mut seen = BTreeSet::new();
        let mut list = Vec::with_capacity(edges.len());
        for &(line, u, v) in edges {
            for w in [u, v] {
                if w == 0 || w > n {
                    return Err(Error::VertexOutOfRange {
                        line,
                        vertex: w,
                        count: n,
                    });
                }
            }
            if u == v {
                return Err(Error::SelfLoop { line, vertex: u });
            }
            let key = (u.min(v), u.max(v));
            if !seen.insert(key) {
                return Err(Error::DuplicateEdge { line, u, v });
            }
            adj[u].push(v);
            adj[v].push(u);
            list.push(key);
        }
        for nb in adj.iter_mut() {
            nb.sort_unstable();
        }
        list.sort_unstable();
        let mut g = Graph {
            n,
            adj,
            edges: list,
            dist: Vec::new(),
        };
        let from_one = g.bfs(1);
        if let Some(i) = from_one.iter().position(|&d| d == u32::MAX) {
            return Err(Error::Disconnected { unreachable: i + 1 });
        }
        let mut dist = Vec::with_capacity(n * n);
        dist.extend_from_slice(&from_one);
        for s in 2..=n {
            dist.extend(g.bfs(s));
        }
        g.dist = dist;
        Ok(g)
    }

    fn bfs(&self, src: Vertex) -> Vec<u32> {
        let mut d = vec![u32::MAX; self.n];
        let mut queue = VecDeque::from([src]);
        d[src - 1] = 0;
        while let Some(u) = queue.pop_front() {
            for &w in &self.adj[u] {
                if d[w - 1] == u32::MAX {
                    d[w - 1] = d[u - 1] + 1;
                    queue.push_back(w);
                }
            }
        }
        d
    }

    /// Parses the edge-list format: the first non-comment line holds the vertex
    /// count, each further line one edge `u v`. Lines starting with `#` and
    /// blank lines are skipped.
    pub fn parse(text: &str) -> Result<Self> {
        let mut count = None;
        let mut edges = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let t = raw.trim();
            if t.is_empty() || t.starts_with('#') {
                continue;
            }
            let malformed = || Error::Malformed {
                line,
                text: raw.to_string(),
            };
            let fields: Vec<&str> = t.split_whitespace().collect();
            match count {
                None => {
                    if fields.len() != 1 {
                        return Err(malformed());
                    }
                    count = Some(fields[0].parse::<usize>().map_err(|_| malformed())?);
                }
                Some(_) => {
                    if fields.len() != 2 {
                        return Err(malformed());
                    }
                    let u = fields[0].parse::<usize>().map_err(|_| malformed())?;
                    let v = fields[1].parse::<usize>().map_err(|_| malformed())?;
                    edges.push((line, u, v));
                }
            }
        }
        let n = count.ok_or(Error::MissingVertexCount)?;
        Self::build(n, &edges)
    }

    pub fn path(n: usize) -> Self {
        let edges: Vec<_> = (1..n).map(|i| (i, i + 1)).collect();
        Self::new(n, &edges).expect("path graph")
    }

    pub fn cycle(n: usize) -> Self {
        assert!(n >= 3, "cycle needs at least 3 vertices");
        let mut edges: Vec<_> = (1..n).map(|i| (i, i + 1)).collect();
        edges.push((n, 1));
        Self::new(n, &edges).expect("cycle graph")
    }

    /// Star with center 1 and leaves 2..=leaves+1.
    pub fn star(leaves: usize) -> Self {
        let edges: Vec<_> = (2..=leaves + 1).map(|i| (1, i)).collect();
        Self::new(leaves + 1, &edges).expect("star graph")
    }

    /// Decodes a Prüfer sequence over 1..=len+2 into a labelled tree.
    pub fn from_prufer(seq: &[Vertex]) -> Result<Self> {
        let n = seq.len() + 2;
        let mut degree = vec![1usize; n + 1];
        for &v in seq {
            if v == 0 || v > n {
                return Err(Error::InvalidVertex { vertex: v, count: n });
            }
            degree[v] += 1;
        }
        let mut edges = Vec::with_capacity(n - 1);
        for &v in seq {
            let leaf = (1..=n).find(|&u| degree[u] == 1).expect("leaf exists");
            edges.push((leaf, v));
            degree[leaf] -= 1;
            degree[v] -= 1;
        }
        let rest: Vec<_> = (1..=n).filter(|&u| degree[u] == 1).collect();
        edges.push((rest[0], rest[1]));
        Self::new(n, &edges)
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(Vertex, Vertex)] {
        &self.edges
    }

    pub fn vertices(&self) -> std::ops::RangeInclusive<Vertex> {
        1..=self.n
    }

    pub fn check_vertex(&self, v: Vertex) -> Result<()> {
        if v == 0 || v > self.n {
            Err(Error::InvalidVertex {
                vertex: v,
                count: self.n,
            })
        } else {
            Ok(())
        }
    }

    /// Open neighborhood, ascending.
    pub fn neighbors(&self, v: Vertex) -> &[Vertex] {
        &self.adj[v]
    }

    pub fn degree(&self, v: Vertex) -> usize {
        self.adj[v].len()
    }

    pub fn has_edge(&self, u: Vertex, v: Vertex) -> bool {
        self.adj[u].binary_search(&v).is_ok()
    }

    /// `N[v]`, ascending.
    pub fn closed_neighborhood(&self, v: Vertex) -> Result<Vec<Vertex>> {
        self.check_vertex(v)?;
        Ok(self.closed_nbhd(v))
    }

    pub(crate) fn closed_nbhd(&self, v: Vertex) -> Vec<Vertex> {
        let mut out = self.adj[v].clone();
        let pos = out.partition_point(|&w| w < v);
        out.insert(pos, v);
        out
    }

    pub fn distance(&self, u: Vertex, v: Vertex) -> Result<usize> {
        self.check_vertex(u)?;
        self.check_vertex(v)?;
        Ok(self.dist(u, v))
    }

    /// Unchecked distance; panics on invalid vertices.
    pub fn dist(&self, u: Vertex, v: Vertex) -> usize {
        self.dist[(u - 1) * self.n + (v - 1)] as usize
    }

    pub fn classify(&self) -> Classification {
        let is_tree = self.edges.len() + 1 == self.n;
        let is_path = is_tree && (1..=self.n).all(|v| self.degree(v) <= 2);
        Classification { is_tree, is_path }
    }

    pub fn is_tree(&self) -> bool {
        self.classify().is_tree
    }

    /// The vertex lying on all three pairwise shortest paths of a tree.
    pub fn median(&self, x: Vertex, y: Vertex, z: Vertex) -> Result<Vertex> {
        for v in [x, y, z] {
            self.check_vertex(v)?;
        }
        if !self.is_tree() {
            return Err(Error::NotATree);
        }
        Ok(self.tree_median(x, y, z))
    }

    pub(crate) fn tree_median(&self, x: Vertex, y: Vertex, z: Vertex) -> Vertex {
        let on = |a: Vertex, m: Vertex, b: Vertex| self.dist(a, m) + self.dist(m, b) == self.dist(a, b);
        let px: BTreeSet<Vertex> = self.vertices().filter(|&m| on(x, m, y)).collect();
        self.vertices()
            .find(|&m| px.contains(&m) && on(y, m, z) && on(x, m, z))
            .expect("trees are median graphs")
    }

    /// Next vertex on a shortest path from `u` to `target`, lowest index first;
    /// `u` itself when already there.
    pub fn step_toward(&self, u: Vertex, target: Vertex) -> Vertex {
        if u == target {
            return u;
        }
        let d = self.dist(u, target);
        *self.adj[u]
            .iter()
            .find(|&&w| self.dist(w, target) + 1 == d)
            .expect("connected graph")
    }

    /// Lowest neighbor strictly farther from `from`, or `u` when none exists.
    pub fn step_away(&self, u: Vertex, from: Vertex) -> Vertex {
        let d = self.dist(u, from);
        self.adj[u]
            .iter()
            .copied()
            .find(|&w| self.dist(w, from) > d)
            .unwrap_or(u)
    }

    /// Vertices of the shortest path from `u` to `v` (lowest-index choices).
    pub fn shortest_path(&self, u: Vertex, v: Vertex) -> Vec<Vertex> {
        let mut out = vec![u];
        let mut cur = u;
        while cur != v {
            cur = self.step_toward(cur, v);
            out.push(cur);
        }
        out
    }

    pub fn to_dot(&self) -> String {
        let mut s = String::from("graph G {\n");
        for v in self.vertices() {
            let _ = writeln!(s, "  {v};");
        }
        for &(u, v) in &self.edges {
            let _ = writeln!(s, "  {u} -- {v};");
        }
        s.push_str("}\n");
        s
    }

    pub fn to_edge_list(&self) -> String {
        let mut s = format!("{}\n", self.n);
        for &(u, v) in &self.edges {
            let _ = writeln!(s, "{u} {v}");
        }
        s
    }
}

/// Parses an edge-list document into a validated graph.
pub fn parse_graph(text: &str) -> Result<Graph> {
    Graph::parse(text)
}
