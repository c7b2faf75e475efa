//! Reference seed selection: naive greedy, CELF lazy greedy, top-k degree
//! and uniformly random seeds.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::fmt::Debug;
use std::ops::Sub;

use num_rational::Ratio;
use rand::seq::index::sample;
use rand::Rng;
use serde::Serialize;

use crate::diffusion::{estimate_spread, exact_spread, exact_spread_ratio, DiffusionParams};
use crate::error::{Error, Result};
use crate::graph::{Graph, VertexId};
use crate::ranking::sortv_degree;
use crate::scalar::Real;
use crate::seeds::SeedSet;

/// Value type produced by a spread oracle. Must be totally ordered on the
/// values an oracle actually returns.
pub trait Gain: Copy + PartialOrd + Sub<Output = Self> + Debug {
    fn zero() -> Self;
}

macro_rules! float_gain {
    ($($t:ty),*) => {$(
        impl Gain for $t {
            fn zero() -> Self {
                0.0
            }
        }
    )*};
}

float_gain!(f32, f64);

impl Gain for Ratio<i128> {
    fn zero() -> Self {
        Ratio::from_integer(0)
    }
}

/// Evaluates σ(S). The empty set is never queried; its spread is zero.
pub trait SpreadOracle {
    type Value: Gain;

    fn spread(&mut self, seeds: &[VertexId]) -> Result<Self::Value>;
}

/// Exact spread in floating point (graphs with at most 20 edges).
pub struct ExactOracle<'g, T> {
    pub graph: &'g Graph,
    pub p: T,
}

impl<T: Real + Gain> SpreadOracle for ExactOracle<'_, T> {
    type Value = T;

    fn spread(&mut self, seeds: &[VertexId]) -> Result<T> {
        exact_spread(self.graph, seeds, self.p)
    }
}

/// Exact spread in rational arithmetic, so ties and submodularity hold
/// without rounding.
pub struct RationalOracle<'g> {
    pub graph: &'g Graph,
    pub p: Ratio<i128>,
}

impl SpreadOracle for RationalOracle<'_> {
    type Value = Ratio<i128>;

    fn spread(&mut self, seeds: &[VertexId]) -> Result<Ratio<i128>> {
        exact_spread_ratio(self.graph, seeds, self.p)
    }
}

/// Monte-Carlo mean. Every query reuses the same master seed (common
/// random numbers), so the oracle is deterministic.
pub struct MonteCarloOracle<'g, T> {
    pub graph: &'g Graph,
    pub params: DiffusionParams<T>,
}

impl<T: Real + Gain> SpreadOracle for MonteCarloOracle<'_, T> {
    type Value = T;

    fn spread(&mut self, seeds: &[VertexId]) -> Result<T> {
        estimate_spread(self.graph, seeds, &self.params).map(|e| e.mean)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GreedyTrace<V> {
    /// Picked vertices with their marginal gain, in pick order.
    pub picks: Vec<(VertexId, V)>,
    /// Number of oracle queries.
    pub evaluations: usize,
}

impl<V> GreedyTrace<V> {
    pub fn seeds(&self) -> SeedSet {
        self.picks.iter().map(|&(v, _)| v).collect()
    }
}

fn check_k(g: &Graph, k: usize) -> Result<()> {
    if k == 0 || k > g.n() {
        return Err(Error::param(format!("need 1 <= k <= n, got k = {k}, n = {}", g.n())));
    }
    Ok(())
}

/// Hill-climbing greedy: each round adds the vertex of largest marginal
/// gain, lowest id on ties.
pub fn greedy_im<O: SpreadOracle>(g: &Graph, k: usize, oracle: &mut O) -> Result<(SeedSet, GreedyTrace<O::Value>)> {
    check_k(g, k)?;
    let mut chosen: Vec<VertexId> = Vec::with_capacity(k);
    let mut in_set = vec![false; g.n()];
    let mut current = O::Value::zero();
    let mut trace = GreedyTrace { picks: Vec::with_capacity(k), evaluations: 0 };
    for _ in 0..k {
        let mut best: Option<(VertexId, O::Value, O::Value)> = None;
        for v in g.vertices().filter(|&v| !in_set[v]) {
            chosen.push(v);
            let value = oracle.spread(&chosen)?;
            chosen.pop();
            trace.evaluations += 1;
            let gain = value - current;
            if best.as_ref().is_none_or(|&(_, g_best, _)| gain > g_best) {
                best = Some((v, gain, value));
            }
        }
        let (v, gain, value) = best.expect("k <= n leaves a candidate");
        chosen.push(v);
        in_set[v] = true;
        current = value;
        trace.picks.push((v, gain));
    }
    Ok((trace.seeds(), trace))
}

struct Entry<V> {
    gain: V,
    /// Spread of the chosen set plus this vertex when `gain` was computed.
    value: V,
    vertex: VertexId,
    /// Seed-set size when `gain` was computed.
    round: usize,
}

impl<V: PartialOrd> PartialEq for Entry<V> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl<V: PartialOrd> Eq for Entry<V> {}

impl<V: PartialOrd> PartialOrd for Entry<V> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<V: PartialOrd> Ord for Entry<V> {
    /// Max-heap order: larger gain first, then smaller vertex id.
    fn cmp(&self, other: &Self) -> Ordering {
        self.gain
            .partial_cmp(&other.gain)
            .unwrap_or(Ordering::Equal)
            .then_with(|| other.vertex.cmp(&self.vertex))
    }
}

/// Lazy-forward greedy. A popped entry whose gain predates the last pick is
/// re-evaluated and pushed back; a fresh entry on top is selected. Under a
/// deterministic submodular oracle this reproduces [`greedy_im`] exactly.
pub fn celf_im<O: SpreadOracle>(g: &Graph, k: usize, oracle: &mut O) -> Result<(SeedSet, GreedyTrace<O::Value>)> {
    check_k(g, k)?;
    let mut trace = GreedyTrace { picks: Vec::with_capacity(k), evaluations: 0 };
    let mut heap = BinaryHeap::with_capacity(g.n());
    for v in g.vertices() {
        let value = oracle.spread(&[v])?;
        trace.evaluations += 1;
        heap.push(Entry { gain: value - O::Value::zero(), value, vertex: v, round: 0 });
    }
    let mut chosen: Vec<VertexId> = Vec::with_capacity(k);
    let mut current = O::Value::zero();
    while chosen.len() < k {
        let mut top = heap.pop().expect("k <= n leaves a candidate");
        if top.round == chosen.len() {
            chosen.push(top.vertex);
            current = top.value;
            trace.picks.push((top.vertex, top.gain));
            continue;
        }
        chosen.push(top.vertex);
        let value = oracle.spread(&chosen)?;
        chosen.pop();
        trace.evaluations += 1;
        top.gain = value - current;
        top.value = value;
        top.round = chosen.len();
        heap.push(top);
    }
    Ok((trace.seeds(), trace))
}

/// Top-k vertices by degree, ties by ascending id.
pub fn degree_topk(g: &Graph, k: usize) -> Result<SeedSet> {
    check_k(g, k)?;
    Ok(sortv_degree::<f64>(g).top(k).iter().copied().collect())
}

/// `k` distinct vertices drawn uniformly.
pub fn random_seeds<R: Rng + ?Sized>(g: &Graph, k: usize, rng: &mut R) -> Result<SeedSet> {
    check_k(g, k)?;
    Ok(sample(rng, g.n(), k).into_iter().collect())
}
