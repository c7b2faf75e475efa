#![allow(dead_code)]

use phee_core::{Graph, VertexId};
use proptest::prelude::*;
use rand::Rng;

/// Graph on `2..=max_n` vertices with up to `max_m` random edge draws
/// (self-loops and repeats are dropped by the builder).
pub fn graph(max_n: usize, max_m: usize, directed: bool) -> impl Strategy<Value = Graph> {
    (2..=max_n).prop_flat_map(move |n| {
        prop::collection::vec((0..n, 0..n), 1..=max_m)
            .prop_map(move |e| Graph::from_edges(n, &e, directed).unwrap())
    })
}

pub fn random_graph<R: Rng>(rng: &mut R, n: usize, draws: usize, directed: bool) -> Graph {
    let edges: Vec<(VertexId, VertexId)> = (0..draws).map(|_| (rng.gen_range(0..n), rng.gen_range(0..n))).collect();
    Graph::from_edges(n, &edges, directed).unwrap()
}

/// Random graph with exactly `m` distinct edges (or fewer if the vertex
/// count cannot hold that many).
pub fn graph_with_m<R: Rng>(rng: &mut R, n: usize, m: usize, directed: bool) -> Graph {
    let cap = if directed { n * (n - 1) } else { n * (n - 1) / 2 };
    let m = m.min(cap);
    let mut edges = Vec::new();
    let mut seen = std::collections::HashSet::new();
    while edges.len() < m {
        let (u, v) = (rng.gen_range(0..n), rng.gen_range(0..n));
        if u == v {
            continue;
        }
        let key = if directed { (u, v) } else { (u.min(v), u.max(v)) };
        if seen.insert(key) {
            edges.push((u, v));
        }
    }
    Graph::from_edges(n, &edges, directed).unwrap()
}

/// All-pairs hop distances by Floyd–Warshall over `adj`.
pub fn floyd<'a, F: Fn(VertexId) -> &'a [VertexId]>(n: usize, adj: F) -> Vec<Vec<usize>> {
    let inf = usize::MAX / 4;
    let mut d = vec![vec![inf; n]; n];
    for (u, row) in d.iter_mut().enumerate() {
        row[u] = 0;
        for &v in adj(u) {
            row[v] = 1;
        }
    }
    for w in 0..n {
        for u in 0..n {
            for v in 0..n {
                if d[u][w] + d[w][v] < d[u][v] {
                    d[u][v] = d[u][w] + d[w][v];
                }
            }
        }
    }
    d
}

/// EDV by direct counting: for every vertex outside `seeds`, count the seeds
/// with an arc into it.
pub fn edv_brute(g: &Graph, seeds: &[VertexId], p: f64) -> f64 {
    let k = seeds.len() as f64;
    let mut total = k;
    for v in 0..g.n() {
        if seeds.contains(&v) {
            continue;
        }
        let tau = seeds.iter().filter(|&&s| g.out_neighbors(s).contains(&v)).count();
        if tau > 0 {
            total += 1.0 - (1.0 - p).powi(tau as i32);
        }
    }
    total
}
