//! Vertex ranking: classic k-shell, mixed degree decomposition (MDD),
//! gravity centrality (GCI) and plain degree.
//!
//! Every ranking works on the union neighbourhood so that directed
//! datasets can be ranked; ties are broken by ascending vertex id.

use std::cmp::Ordering;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{bfs_within_undirected, DeletionOverlay, Graph, VertexId};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RankMethod {
    Mdd,
    Gci,
    KShell,
    Degree,
}

impl std::fmt::Display for RankMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            RankMethod::Mdd => "mdd",
            RankMethod::Gci => "gci",
            RankMethod::KShell => "kshell",
            RankMethod::Degree => "degree",
        })
    }
}

impl std::str::FromStr for RankMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "mdd" => Ok(RankMethod::Mdd),
            "gci" => Ok(RankMethod::Gci),
            "kshell" | "k-shell" => Ok(RankMethod::KShell),
            "degree" => Ok(RankMethod::Degree),
            other => Err(Error::param(format!("unknown ranking method `{other}`"))),
        }
    }
}

/// A permutation of all vertices in non-increasing estimated influence.
#[derive(Debug, Clone, PartialEq)]
pub struct VertexOrdering<T> {
    pub order: Vec<VertexId>,
    pub method: RankMethod,
    pub scores: Option<Vec<T>>,
}

impl<T: Real> VertexOrdering<T> {
    /// Sorts all vertices by score, highest first, ties by ascending id.
    pub fn from_scores(scores: Vec<T>, method: RankMethod) -> Self {
        let mut order: Vec<VertexId> = (0..scores.len()).collect();
        order.sort_by(|&a, &b| {
            scores[b].partial_cmp(&scores[a]).unwrap_or(Ordering::Equal).then(a.cmp(&b))
        });
        VertexOrdering { order, method, scores: Some(scores) }
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn top(&self, k: usize) -> &[VertexId] {
        &self.order[..k.min(self.order.len())]
    }

    /// Position of every vertex in the ordering.
    pub fn positions(&self) -> Vec<usize> {
        let mut pos = vec![0; self.order.len()];
        for (i, &v) in self.order.iter().enumerate() {
            pos[v] = i;
        }
        pos
    }

    pub fn is_permutation(&self) -> bool {
        let mut seen = vec![false; self.order.len()];
        self.order.iter().all(|&v| v < seen.len() && !std::mem::replace(&mut seen[v], true))
    }
}

/// Shell number of every vertex.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShellIndex {
    pub shell: Vec<usize>,
}

impl ShellIndex {
    pub fn max_shell(&self) -> usize {
        self.shell.iter().copied().max().unwrap_or(0)
    }
}

/// Batagelj–Zaveršnik bucket peel, O(n + m).
pub fn kshell_decompose(g: &Graph) -> ShellIndex {
    let n = g.n();
    let mut deg: Vec<usize> = g.vertices().map(|v| g.degree(v)).collect();
    let max_deg = deg.iter().copied().max().unwrap_or(0);

    let mut bin = vec![0usize; max_deg + 1];
    for &d in &deg {
        bin[d] += 1;
    }
    let mut start = 0;
    for b in bin.iter_mut() {
        let count = *b;
        *b = start;
        start += count;
    }
    let mut pos = vec![0usize; n];
    let mut vert = vec![0usize; n];
    for v in 0..n {
        pos[v] = bin[deg[v]];
        vert[pos[v]] = v;
        bin[deg[v]] += 1;
    }
    for d in (1..=max_deg).rev() {
        bin[d] = bin[d - 1];
    }
    bin[0] = 0;

    for i in 0..n {
        let v = vert[i];
        for &u in g.neighbors(v) {
            if deg[u] > deg[v] {
                let du = deg[u];
                let pu = pos[u];
                let pw = bin[du];
                let w = vert[pw];
                if u != w {
                    pos[u] = pw;
                    vert[pu] = w;
                    pos[w] = pu;
                    vert[pw] = u;
                }
                bin[du] += 1;
                deg[u] -= 1;
            }
        }
    }
    ShellIndex { shell: deg }
}

/// Orders vertices by shell number.
pub fn sortv_kshell<T: Real>(g: &Graph) -> VertexOrdering<T> {
    let shells = kshell_decompose(g);
    let scores = shells.shell.iter().map(|&s| T::count(s)).collect();
    VertexOrdering::from_scores(scores, RankMethod::KShell)
}

/// One removal batch of the mixed degree peel.
#[derive(Debug, Clone, PartialEq)]
pub struct MddBatch<T> {
    /// Threshold at which the batch was removed (the vertices' rank).
    pub level: T,
    /// Removed vertices in ascending id order.
    pub vertices: Vec<VertexId>,
}

/// Stepwise mixed degree decomposition. Each call to [`next_batch`]
/// removes every live vertex whose mixed degree is at most the current
/// threshold, raising the threshold by one whenever nothing qualifies.
///
/// [`next_batch`]: MixedDegreePeel::next_batch
pub struct MixedDegreePeel<'g, T> {
    overlay: DeletionOverlay<'g>,
    lambda: T,
    threshold: T,
    /// Vertices whose mixed degree changed in the last batch.
    touched: Option<Vec<VertexId>>,
}

impl<'g, T: Real> MixedDegreePeel<'g, T> {
    pub fn new(g: &'g Graph, lambda: T) -> Result<Self> {
        if !(lambda >= T::zero() && lambda <= T::one()) {
            return Err(Error::param(format!("lambda must lie in [0, 1], got {lambda}")));
        }
        let min_degree = g.vertices().map(|v| g.degree(v)).min().unwrap_or(0);
        Ok(MixedDegreePeel {
            overlay: DeletionOverlay::new(g),
            lambda,
            threshold: T::count(min_degree),
            touched: None,
        })
    }

    /// Residual degree plus `lambda` times exhausted degree.
    pub fn mixed_degree(&self, v: VertexId) -> T {
        let total = self.overlay.graph().degree(v);
        let residual = self.overlay.live_degree(v);
        T::count(residual) + self.lambda * T::count(total - residual)
    }

    pub fn is_live(&self, v: VertexId) -> bool {
        !self.overlay.is_deleted(v)
    }

    pub fn threshold(&self) -> T {
        self.threshold
    }

    pub fn next_batch(&mut self) -> Option<MddBatch<T>> {
        while self.overlay.live_count() > 0 {
            let mut batch: Vec<VertexId> = match self.touched.take() {
                Some(cands) => cands
                    .into_iter()
                    .filter(|&v| self.is_live(v) && self.mixed_degree(v) <= self.threshold)
                    .collect(),
                None => self
                    .overlay
                    .live_vertices()
                    .filter(|&v| self.mixed_degree(v) <= self.threshold)
                    .collect(),
            };
            if batch.is_empty() {
                // Only vertices touched by the previous batch can have newly
                // qualified; none did, so nothing qualifies at this level.
                self.threshold = self.threshold + T::one();
                continue;
            }
            batch.sort_unstable();
            batch.dedup();
            let g = self.overlay.graph();
            for &v in &batch {
                self.overlay.delete(v);
            }
            let mut touched: Vec<VertexId> = batch
                .iter()
                .flat_map(|&v| g.neighbors(v).iter().copied())
                .filter(|&u| self.is_live(u))
                .collect();
            touched.sort_unstable();
            touched.dedup();
            self.touched = Some(touched);
            return Some(MddBatch { level: self.threshold, vertices: batch });
        }
        None
    }
}

/// Result of [`sortv_mdd`]: the ordering plus the removal sequence.
#[derive(Debug, Clone)]
pub struct MddRanking<T> {
    pub ordering: VertexOrdering<T>,
    /// Vertices in removal order.
    pub removal: Vec<VertexId>,
    /// Removal level of every vertex.
    pub levels: Vec<T>,
}

/// Mixed degree decomposition ranking. The ordering is the reverse of the
/// removal sequence; `scores` holds each vertex's removal level.
pub fn sortv_mdd<T: Real>(g: &Graph, lambda: T) -> Result<MddRanking<T>> {
    let mut peel = MixedDegreePeel::new(g, lambda)?;
    let mut removal = Vec::with_capacity(g.n());
    let mut levels = vec![T::zero(); g.n()];
    while let Some(batch) = peel.next_batch() {
        for &v in &batch.vertices {
            levels[v] = batch.level;
        }
        removal.extend(batch.vertices);
    }
    let order: Vec<VertexId> = removal.iter().rev().copied().collect();
    let ordering = VertexOrdering { order, method: RankMethod::Mdd, scores: Some(levels.clone()) };
    Ok(MddRanking { ordering, removal, levels })
}

/// Gravity centrality: `G(v) = Σ S(v)·S(u) / d(v,u)²` over every `u` within
/// `radius` hops of `v`, with `S` the shell number.
pub fn gci_scores<T: Real>(g: &Graph, radius: usize) -> Result<Vec<T>> {
    if radius == 0 {
        return Err(Error::param("GCI radius must be at least 1"));
    }
    let shells = kshell_decompose(g).shell;
    Ok((0..g.n())
        .into_par_iter()
        .map(|v| {
            let sv = T::count(shells[v]);
            bfs_within_undirected(g, v, radius)
                .into_iter()
                .map(|(u, d)| sv * T::count(shells[u]) / T::count(d * d))
                .sum()
        })
        .collect())
}

pub fn sortv_gci<T: Real>(g: &Graph, radius: usize) -> Result<VertexOrdering<T>> {
    Ok(VertexOrdering::from_scores(gci_scores(g, radius)?, RankMethod::Gci))
}

pub fn sortv_degree<T: Real>(g: &Graph) -> VertexOrdering<T> {
    let scores = g.vertices().map(|v| T::count(g.degree(v))).collect();
    VertexOrdering::from_scores(scores, RankMethod::Degree)
}

/// Default GCI truncation radius.
pub const DEFAULT_GCI_RADIUS: usize = 3;

/// Dispatches to the ranking procedure for `method`.
pub fn rank<T: Real>(g: &Graph, method: RankMethod, lambda: T, radius: usize) -> Result<VertexOrdering<T>> {
    match method {
        RankMethod::Mdd => sortv_mdd(g, lambda).map(|r| r.ordering),
        RankMethod::Gci => sortv_gci(g, radius),
        RankMethod::KShell => Ok(sortv_kshell(g)),
        RankMethod::Degree => Ok(sortv_degree(g)),
    }
}
