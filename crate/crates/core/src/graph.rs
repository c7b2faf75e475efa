//! Immutable social-network graph with CSR adjacency, edge-list I/O and
//! the deletion overlay used by the peeling procedures.

use std::collections::{HashMap, HashSet, VecDeque};
use std::fs::File;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use flate2::read::GzDecoder;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense internal vertex id in `[0, n)`.
pub type VertexId = usize;

/// How a dataset flagged as directed is interpreted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum DirectionMode {
    /// Diffusion follows arcs; ranking uses the union neighbourhood.
    #[default]
    Directed,
    /// Every arc is symmetrised at load time.
    AsUndirected,
}

impl std::str::FromStr for DirectionMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "directed" => Ok(DirectionMode::Directed),
            "as-undirected" | "undirected" => Ok(DirectionMode::AsUndirected),
            other => Err(Error::param(format!("unknown direction mode `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct Csr {
    offsets: Vec<usize>,
    targets: Vec<VertexId>,
}

impl Csr {
    /// Builds sorted, deduplicated rows from an arc list.
    fn from_arcs(n: usize, arcs: &[(VertexId, VertexId)]) -> Csr {
        let mut offsets = vec![0usize; n + 1];
        for &(u, _) in arcs {
            offsets[u + 1] += 1;
        }
        for i in 0..n {
            offsets[i + 1] += offsets[i];
        }
        let mut fill = offsets.clone();
        let mut targets = vec![0; arcs.len()];
        for &(u, v) in arcs {
            targets[fill[u]] = v;
            fill[u] += 1;
        }
        for u in 0..n {
            targets[offsets[u]..offsets[u + 1]].sort_unstable();
        }
        Csr { offsets, targets }
    }

    #[inline]
    fn row(&self, v: VertexId) -> &[VertexId] {
        &self.targets[self.offsets[v]..self.offsets[v + 1]]
    }
}

/// Counts reported by the edge-list loader.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct LoadStats {
    pub lines: usize,
    pub self_loops: usize,
    pub duplicates: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    m: usize,
    directed: bool,
    out_adj: Csr,
    /// Present only for directed graphs.
    in_adj: Option<Csr>,
    /// Union (in ∪ out) neighbourhood; present only for directed graphs.
    union_adj: Option<Csr>,
    labels: Vec<u64>,
}

impl Graph {
    /// Builds a graph over internal ids `0..n` from an edge list. Self-loops
    /// are dropped and duplicates collapsed; for undirected graphs `(u, v)`
    /// and `(v, u)` are the same edge.
    pub fn from_edges(n: usize, edges: &[(VertexId, VertexId)], directed: bool) -> Result<Graph> {
        let labels = (0..n as u64).collect();
        Ok(Self::build(n, edges, directed, labels)?.0)
    }

    fn build(
        n: usize,
        edges: &[(VertexId, VertexId)],
        directed: bool,
        labels: Vec<u64>,
    ) -> Result<(Graph, LoadStats)> {
        let mut stats = LoadStats::default();
        let mut seen = HashSet::with_capacity(edges.len());
        let mut arcs = Vec::with_capacity(edges.len() * if directed { 1 } else { 2 });
        for &(u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::param(format!("edge ({u}, {v}) out of range for n = {n}")));
            }
            if u == v {
                stats.self_loops += 1;
                continue;
            }
            let key = if directed { (u, v) } else { (u.min(v), u.max(v)) };
            if !seen.insert(key) {
                stats.duplicates += 1;
                continue;
            }
            arcs.push((u, v));
            if !directed {
                arcs.push((v, u));
            }
        }
        let m = seen.len();
        let out_adj = Csr::from_arcs(n, &arcs);
        let (in_adj, union_adj) = if directed {
            let rev: Vec<_> = arcs.iter().map(|&(u, v)| (v, u)).collect();
            let mut both: Vec<_> = arcs.iter().chain(rev.iter()).copied().collect();
            both.sort_unstable();
            both.dedup();
            (Some(Csr::from_arcs(n, &rev)), Some(Csr::from_arcs(n, &both)))
        } else {
            (None, None)
        };
        let g = Graph { n, m, directed, out_adj, in_adj, union_adj, labels };
        Ok((g, stats))
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn m(&self) -> usize {
        self.m
    }

    #[inline]
    pub fn is_directed(&self) -> bool {
        self.directed
    }

    pub fn vertices(&self) -> std::ops::Range<VertexId> {
        0..self.n
    }

    /// Out-neighbours (all neighbours when undirected).
    #[inline]
    pub fn out_neighbors(&self, v: VertexId) -> &[VertexId] {
        self.out_adj.row(v)
    }

    /// In-neighbours (all neighbours when undirected).
    #[inline]
    pub fn in_neighbors(&self, v: VertexId) -> &[VertexId] {
        self.in_adj.as_ref().unwrap_or(&self.out_adj).row(v)
    }

    /// Union neighbourhood, used by every structural ranking procedure.
    #[inline]
    pub fn neighbors(&self, v: VertexId) -> &[VertexId] {
        self.union_adj.as_ref().unwrap_or(&self.out_adj).row(v)
    }

    /// Degree in the union neighbourhood.
    #[inline]
    pub fn degree(&self, v: VertexId) -> usize {
        self.neighbors(v).len()
    }

    #[inline]
    pub fn out_degree(&self, v: VertexId) -> usize {
        self.out_neighbors(v).len()
    }

    pub fn has_arc(&self, u: VertexId, v: VertexId) -> bool {
        self.out_neighbors(u).binary_search(&v).is_ok()
    }

    /// Original dataset id of an internal vertex.
    pub fn label(&self, v: VertexId) -> u64 {
        self.labels[v]
    }

    pub fn labels(&self) -> &[u64] {
        &self.labels
    }

    /// Internal id for an original dataset id.
    pub fn vertex_of(&self, label: u64) -> Option<VertexId> {
        self.labels.iter().position(|&l| l == label)
    }

    /// Edges as internal id pairs; `u < v` for undirected graphs.
    pub fn edges(&self) -> impl Iterator<Item = (VertexId, VertexId)> + '_ {
        let directed = self.directed;
        self.vertices().flat_map(move |u| {
            self.out_neighbors(u)
                .iter()
                .copied()
                .filter(move |&v| directed || u < v)
                .map(move |v| (u, v))
        })
    }

    /// Writes the graph as an edge list using original ids. Lines are
    /// ordered so that first-appearance remapping on reload reproduces the
    /// internal ids: vertex `v` first shows up on a line with a lower
    /// neighbour, or on a self-loop line when it has none.
    pub fn write_edge_list<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "# n={} m={} directed={}", self.n, self.m, self.directed)?;
        let label = &self.labels;
        for v in self.vertices() {
            let mut any = false;
            for &w in self.neighbors(v).iter().take_while(|&&w| w < v) {
                if self.has_arc(w, v) {
                    writeln!(out, "{} {}", label[w], label[v])?;
                    any = true;
                }
                if self.directed && self.has_arc(v, w) {
                    writeln!(out, "{} {}", label[v], label[w])?;
                    any = true;
                }
            }
            if !any {
                writeln!(out, "{} {}", label[v], label[v])?;
            }
        }
        Ok(())
    }
}

/// Parses a whitespace (or comma) separated edge list. Lines starting with
/// `#` or `%` are comments; tokens after the first two are ignored.
pub fn load_edge_list<R: Read>(source: R, directed: bool) -> Result<Graph> {
    load_edge_list_with_stats(source, directed).map(|(g, _)| g)
}

pub fn load_edge_list_with_stats<R: Read>(source: R, directed: bool) -> Result<(Graph, LoadStats)> {
    let reader = BufReader::new(source);
    let mut ids: HashMap<u64, VertexId> = HashMap::new();
    let mut labels = Vec::new();
    let mut edges = Vec::new();
    let mut lines = 0;
    let mut intern = |label: u64, labels: &mut Vec<u64>| -> VertexId {
        *ids.entry(label).or_insert_with(|| {
            labels.push(label);
            labels.len() - 1
        })
    };
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = idx + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') || trimmed.starts_with('%') {
            continue;
        }
        lines += 1;
        let mut tokens = trimmed
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|t| !t.is_empty());
        let mut next_id = |what: &str| -> Result<u64> {
            let tok = tokens.next().ok_or_else(|| Error::Parse {
                line: lineno,
                message: format!("missing {what} vertex id"),
            })?;
            tok.parse::<u64>().map_err(|_| Error::Parse {
                line: lineno,
                message: format!("`{tok}` is not a non-negative integer vertex id"),
            })
        };
        let a = next_id("source")?;
        let b = next_id("target")?;
        let u = intern(a, &mut labels);
        let v = intern(b, &mut labels);
        edges.push((u, v));
    }
    if edges.is_empty() {
        return Err(Error::EmptyGraph);
    }
    let n = labels.len();
    let (g, mut stats) = Graph::build(n, &edges, directed, labels)?;
    stats.lines = lines;
    if g.m == 0 {
        return Err(Error::EmptyGraph);
    }
    Ok((g, stats))
}

/// Opens an edge-list file, transparently decompressing `.gz` files.
pub fn load_path(path: &Path, directed: bool) -> Result<(Graph, LoadStats)> {
    let file = File::open(path).map_err(|source| Error::File { path: path.to_path_buf(), source })?;
    let gz = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("gz"));
    if gz {
        load_edge_list_with_stats(GzDecoder::new(file), directed)
    } else {
        load_edge_list_with_stats(file, directed)
    }
}

/// Loads a dataset honouring the direction mode: directed datasets read in
/// `AsUndirected` mode are symmetrised.
pub fn load_dataset(path: &Path, directed: bool, mode: DirectionMode) -> Result<(Graph, LoadStats)> {
    load_path(path, directed && mode == DirectionMode::Directed)
}

/// Every vertex `u != v` within `r` hops of `v`, with its exact distance,
/// in BFS order. Follows out-arcs on directed graphs.
pub fn bfs_within(g: &Graph, v: VertexId, r: usize) -> Vec<(VertexId, usize)> {
    bfs_with(g.n(), |x| g.out_neighbors(x), v, r)
}

/// Same as [`bfs_within`] over the union neighbourhood.
pub fn bfs_within_undirected(g: &Graph, v: VertexId, r: usize) -> Vec<(VertexId, usize)> {
    bfs_with(g.n(), |x| g.neighbors(x), v, r)
}

fn bfs_with<'a, F>(n: usize, adj: F, v: VertexId, r: usize) -> Vec<(VertexId, usize)>
where
    F: Fn(VertexId) -> &'a [VertexId],
{
    let mut dist = HashMap::new();
    dist.insert(v, 0usize);
    let mut queue = VecDeque::from([v]);
    let mut found = Vec::new();
    debug_assert!(v < n);
    while let Some(x) = queue.pop_front() {
        let d = dist[&x];
        if d == r {
            continue;
        }
        for &y in adj(x) {
            if let std::collections::hash_map::Entry::Vacant(e) = dist.entry(y) {
                e.insert(d + 1);
                found.push((y, d + 1));
                queue.push_back(y);
            }
        }
    }
    found
}

/// Vertex deletions over a borrowed graph without copying it. Degrees are
/// counted in the union neighbourhood.
#[derive(Debug, Clone)]
pub struct DeletionOverlay<'g> {
    base: &'g Graph,
    deleted: Vec<bool>,
    live_degree: Vec<usize>,
    live: usize,
}

impl<'g> DeletionOverlay<'g> {
    pub fn new(base: &'g Graph) -> Self {
        let live_degree = base.vertices().map(|v| base.degree(v)).collect();
        DeletionOverlay { base, deleted: vec![false; base.n()], live_degree, live: base.n() }
    }

    pub fn graph(&self) -> &'g Graph {
        self.base
    }

    #[inline]
    pub fn is_deleted(&self, v: VertexId) -> bool {
        self.deleted[v]
    }

    #[inline]
    pub fn live_degree(&self, v: VertexId) -> usize {
        self.live_degree[v]
    }

    pub fn live_count(&self) -> usize {
        self.live
    }

    pub fn live_vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.base.vertices().filter(|&v| !self.deleted[v])
    }

    /// Deletes `v` and its incident edges.
    ///
    /// # Panics
    /// If `v` is already deleted.
    pub fn delete(&mut self, v: VertexId) {
        assert!(!self.deleted[v], "vertex {v} deleted twice");
        self.deleted[v] = true;
        self.live -= 1;
        for &u in self.base.neighbors(v) {
            if !self.deleted[u] {
                self.live_degree[u] -= 1;
            }
        }
    }
}
