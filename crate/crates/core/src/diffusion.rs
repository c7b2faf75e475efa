//! Independent Cascade diffusion: Monte-Carlo spread estimation, exact
//! spread by live-edge enumeration, and the EDV one-hop surrogate.

use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Graph, VertexId};
use crate::scalar::Real;

/// Largest edge count accepted by [`exact_spread`].
pub const MAX_EXACT_EDGES: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiffusionParams<T> {
    /// Uniform activation probability on every arc.
    pub p: T,
    /// Monte-Carlo repetitions.
    pub runs: usize,
    pub master_seed: u64,
}

impl<T: Real> DiffusionParams<T> {
    pub fn new(p: T, runs: usize, master_seed: u64) -> Result<Self> {
        let params = DiffusionParams { p, runs, master_seed };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        check_probability(self.p)?;
        if self.runs == 0 {
            return Err(Error::param("runs must be at least 1"));
        }
        Ok(())
    }
}

pub(crate) fn check_probability<T: Real>(p: T) -> Result<()> {
    if p >= T::zero() && p <= T::one() {
        Ok(())
    } else {
        Err(Error::param(format!("activation probability must lie in [0, 1], got {p}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpreadEstimate<T> {
    pub mean: T,
    pub std_error: T,
    pub runs: usize,
}

/// Random stream for Monte-Carlo run `index`: ChaCha keyed by the master
/// seed with the run index as stream id, so every run is reproducible on
/// its own regardless of scheduling.
pub fn run_rng(master_seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(index);
    rng
}

/// Reusable cascade buffers; `stamp` marks activation in the current run.
#[derive(Debug, Clone, Default)]
pub struct Cascade {
    stamp: Vec<u32>,
    epoch: u32,
    frontier: Vec<VertexId>,
    next: Vec<VertexId>,
}

impl Cascade {
    pub fn new(n: usize) -> Self {
        Cascade { stamp: vec![0; n], epoch: 0, frontier: Vec::new(), next: Vec::new() }
    }

    fn begin(&mut self, n: usize) {
        if self.stamp.len() != n {
            self.stamp = vec![0; n];
            self.epoch = 0;
        }
        self.epoch = self.epoch.wrapping_add(1);
        if self.epoch == 0 {
            self.stamp.iter_mut().for_each(|s| *s = 0);
            self.epoch = 1;
        }
    }

    /// Runs one cascade and returns the number of active vertices,
    /// seeds included. Each newly active vertex tries its inactive
    /// out-neighbours once, in ascending id order.
    pub fn run<R: Rng + ?Sized>(&mut self, g: &Graph, seeds: &[VertexId], p: f64, rng: &mut R) -> usize {
        self.begin(g.n());
        let epoch = self.epoch;
        self.frontier.clear();
        for &s in seeds {
            if self.stamp[s] != epoch {
                self.stamp[s] = epoch;
                self.frontier.push(s);
            }
        }
        self.frontier.sort_unstable();
        let mut active = self.frontier.len();
        while !self.frontier.is_empty() {
            self.next.clear();
            for &u in &self.frontier {
                for &v in g.out_neighbors(u) {
                    if self.stamp[v] != epoch && rng.gen::<f64>() < p {
                        self.stamp[v] = epoch;
                        self.next.push(v);
                    }
                }
            }
            active += self.next.len();
            self.next.sort_unstable();
            std::mem::swap(&mut self.frontier, &mut self.next);
        }
        active
    }
}

/// One Independent Cascade realisation.
pub fn simulate_once<T: Real, R: Rng + ?Sized>(g: &Graph, seeds: &[VertexId], p: T, rng: &mut R) -> usize {
    Cascade::new(g.n()).run(g, seeds, p.as_f64(), rng)
}

/// Monte-Carlo estimate of the expected spread. Runs execute in parallel;
/// counts are integers and are reduced exactly, so the estimate is
/// bit-identical for any thread count.
pub fn estimate_spread<T: Real>(g: &Graph, seeds: &[VertexId], params: &DiffusionParams<T>) -> Result<SpreadEstimate<T>> {
    params.validate()?;
    validate_seeds(g, seeds)?;
    let p = params.p.as_f64();
    let counts: Vec<u64> = (0..params.runs as u64)
        .into_par_iter()
        .map_init(
            || Cascade::new(g.n()),
            |cascade, i| {
                let mut rng = run_rng(params.master_seed, i);
                cascade.run(g, seeds, p, &mut rng) as u64
            },
        )
        .collect();
    Ok(summarize(&counts))
}

/// Mean and standard error of integer samples, computed exactly in
/// integer arithmetic before the final division.
pub fn summarize<T: Real>(counts: &[u64]) -> SpreadEstimate<T> {
    let runs = counts.len();
    let sum: u128 = counts.iter().map(|&c| c as u128).sum();
    let sum_sq: u128 = counts.iter().map(|&c| (c as u128) * (c as u128)).sum();
    let mean = sum as f64 / runs as f64;
    let std_error = if runs > 1 {
        let r = runs as u128;
        let numer = r * sum_sq - sum * sum;
        let var = numer as f64 / (r * (r - 1)) as f64;
        (var / runs as f64).sqrt()
    } else {
        0.0
    };
    SpreadEstimate { mean: T::lit(mean), std_error: T::lit(std_error), runs }
}

fn validate_seeds(g: &Graph, seeds: &[VertexId]) -> Result<()> {
    if seeds.is_empty() {
        return Err(Error::param("seed set is empty"));
    }
    if let Some(&bad) = seeds.iter().find(|&&v| v >= g.n()) {
        return Err(Error::param(format!("seed {bad} out of range for n = {}", g.n())));
    }
    Ok(())
}

/// Reachability counts of the live-edge expansion: entry `j` is the total
/// number of vertices reached from `seeds`, summed over every world with
/// exactly `j` live edges. The expected spread is then
/// `Σ_j c_j · p^j · (1 − p)^(m − j)`. On undirected graphs one coin per edge
/// suffices, since a cascade crosses any edge in at most one direction.
pub fn spread_polynomial(g: &Graph, seeds: &[VertexId]) -> Result<Vec<u64>> {
    validate_seeds(g, seeds)?;
    let m = g.m();
    if m > MAX_EXACT_EDGES {
        return Err(Error::TooManyEdges { edges: m, limit: MAX_EXACT_EDGES });
    }
    let edges: Vec<(VertexId, VertexId)> = g.edges().collect();
    let directed = g.is_directed();
    // incident edge index and far endpoint
    let mut incident: Vec<Vec<(usize, VertexId)>> = vec![Vec::new(); g.n()];
    for (i, &(u, v)) in edges.iter().enumerate() {
        incident[u].push((i, v));
        if !directed {
            incident[v].push((i, u));
        }
    }
    let mut coeffs = vec![0u64; m + 1];
    let mut seen = vec![false; g.n()];
    let mut stack = Vec::with_capacity(g.n());
    for world in 0u32..(1u32 << m) {
        seen.iter_mut().for_each(|s| *s = false);
        stack.clear();
        let mut reached = 0u64;
        for &s in seeds {
            if !seen[s] {
                seen[s] = true;
                reached += 1;
                stack.push(s);
            }
        }
        while let Some(u) = stack.pop() {
            for &(e, v) in &incident[u] {
                if world >> e & 1 == 1 && !seen[v] {
                    seen[v] = true;
                    reached += 1;
                    stack.push(v);
                }
            }
        }
        coeffs[world.count_ones() as usize] += reached;
    }
    Ok(coeffs)
}

/// Exact expected spread by enumerating all `2^m` live-edge worlds.
pub fn exact_spread<T: Real>(g: &Graph, seeds: &[VertexId], p: T) -> Result<T> {
    check_probability(p)?;
    let coeffs = spread_polynomial(g, seeds)?;
    let m = coeffs.len() - 1;
    let q = T::one() - p;
    Ok(coeffs
        .iter()
        .enumerate()
        .map(|(j, &c)| T::lit(c as f64) * p.powi(j as i32) * q.powi((m - j) as i32))
        .sum())
}

/// Exact expected spread for a rational activation probability.
pub fn exact_spread_ratio(g: &Graph, seeds: &[VertexId], p: Ratio<i128>) -> Result<Ratio<i128>> {
    if p < Ratio::from_integer(0) || p > Ratio::from_integer(1) {
        return Err(Error::param(format!("activation probability must lie in [0, 1], got {p}")));
    }
    let coeffs = spread_polynomial(g, seeds)?;
    let m = coeffs.len() - 1;
    let q = Ratio::from_integer(1) - p;
    let mut total = Ratio::from_integer(0);
    for (j, &c) in coeffs.iter().enumerate() {
        if c != 0 {
            total += Ratio::from_integer(c as i128) * pow(p, j) * pow(q, m - j);
        }
    }
    Ok(total)
}

fn pow(x: Ratio<i128>, e: usize) -> Ratio<i128> {
    (0..e).fold(Ratio::from_integer(1), |acc, _| acc * x)
}

/// Expected diffusion value:
/// `k + Σ_{v ∈ N(S) \ S} (1 − (1 − p)^τ(v))` with `τ(v)` the number of
/// seeds having an arc into `v`.
pub fn edv<T: Real>(g: &Graph, seeds: &[VertexId], p: T) -> T {
    let mut frontier: Vec<VertexId> = Vec::with_capacity(seeds.len() * 4);
    for &s in seeds {
        frontier.extend(g.out_neighbors(s).iter().copied().filter(|v| !seeds.contains(v)));
    }
    frontier.sort_unstable();
    let q = T::one() - p;
    let mut total = T::count(seeds.len());
    let mut i = 0;
    while i < frontier.len() {
        let v = frontier[i];
        let mut tau = 0;
        while i < frontier.len() && frontier[i] == v {
            tau += 1;
            i += 1;
        }
        total = total + (T::one() - q.powi(tau));
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    fn arc() -> Graph {
        Graph::from_edges(2, &[(0, 1)], true).unwrap()
    }

    fn chain() -> Graph {
        Graph::from_edges(3, &[(0, 1), (1, 2)], true).unwrap()
    }

    fn star(leaves: usize) -> Graph {
        let edges: Vec<_> = (1..=leaves).map(|l| (0, l)).collect();
        Graph::from_edges(leaves + 1, &edges, false).unwrap()
    }

    #[test]
    fn p_zero_and_one() {
        let g = star(4);
        let mut rng = run_rng(1, 0);
        assert_eq!(simulate_once(&g, &[1], 0.0f64, &mut rng), 1);
        assert_eq!(simulate_once(&g, &[1], 1.0f64, &mut rng), 5);
        let est = estimate_spread(&g, &[0, 1], &DiffusionParams::new(0.0f64, 50, 3).unwrap()).unwrap();
        assert_eq!((est.mean, est.std_error), (2.0, 0.0));
    }

    #[test]
    fn chain_full_reachability() {
        let est = estimate_spread(&chain(), &[0], &DiffusionParams::new(1.0f64, 100, 9).unwrap()).unwrap();
        assert_eq!(est.mean, 3.0);
        assert_eq!(est.std_error, 0.0);
    }

    #[test]
    fn single_arc_is_fair_coin() {
        let mut ones = 0;
        let mut rng = run_rng(42, 0);
        for _ in 0..20_000 {
            let c = simulate_once(&arc(), &[0], 0.5f64, &mut rng);
            assert!(c == 1 || c == 2);
            ones += (c == 1) as usize;
        }
        // sd of the count is 70.7; 4 sd band.
        assert!((ones as i64 - 10_000).abs() < 283, "{ones}");
    }

    #[test]
    fn mc_converges_to_exact_on_arc() {
        let est = estimate_spread(&arc(), &[0], &DiffusionParams::new(0.5f64, 100_000, 5).unwrap()).unwrap();
        assert!((est.mean - 1.5).abs() < 4.0 * est.std_error);
    }

    #[test]
    fn exact_small_cases() {
        assert_eq!(exact_spread(&arc(), &[0], 0.5f64).unwrap(), 1.5);
        assert_eq!(exact_spread(&chain(), &[0], 0.5f64).unwrap(), 1.75);
        assert_eq!(exact_spread(&star(4), &[1], 1.0f64).unwrap(), 5.0);
        let und = Graph::from_edges(3, &[(0, 1), (1, 2)], false).unwrap();
        assert_eq!(exact_spread(&und, &[0], 0.5f64).unwrap(), 1.75);
    }

    #[test]
    fn rational_exact_matches_float() {
        let g = Graph::from_edges(4, &[(0, 1), (1, 2), (2, 3), (3, 0), (0, 2)], false).unwrap();
        let exact = exact_spread_ratio(&g, &[0], Ratio::new(1, 10)).unwrap();
        let float = exact_spread(&g, &[0], 0.1f64).unwrap();
        assert!((*exact.numer() as f64 / *exact.denom() as f64 - float).abs() < 1e-13);
        assert_eq!(exact_spread_ratio(&chain(), &[0], Ratio::new(1, 2)).unwrap(), Ratio::new(7, 4));
        assert!(exact_spread_ratio(&chain(), &[0], Ratio::new(3, 2)).is_err());
    }

    #[test]
    fn exact_refuses_large_graphs() {
        let edges: Vec<_> = (0..21).map(|i| (i, i + 1)).collect();
        let g = Graph::from_edges(22, &edges, false).unwrap();
        assert!(matches!(exact_spread(&g, &[0], 0.5f64), Err(Error::TooManyEdges { edges: 21, .. })));
    }

    #[test]
    fn edv_examples() {
        assert!((edv(&star(4), &[0], 0.1f64) - 1.4).abs() < 1e-12);
        let path = Graph::from_edges(3, &[(0, 1), (1, 2)], false).unwrap();
        assert_eq!(edv(&path, &[1], 0.5f64), 2.0);
        assert_eq!(edv(&star(4), &[0, 2], 0.0f64), 2.0);
        // leaf 1 is adjacent to the centre, which is a seed: excluded
        assert!((edv(&star(4), &[0, 1], 0.5f64) - 3.5).abs() < 1e-12);
    }

    #[test]
    fn edv_counts_multiple_seed_neighbours() {
        // 0 -> 2 <- 1
        let g = Graph::from_edges(3, &[(0, 2), (1, 2)], true).unwrap();
        assert!((edv(&g, &[0, 1], 0.5f64) - 2.75).abs() < 1e-12);
        // in-arcs of a seed do not count
        assert_eq!(edv(&g, &[2], 0.5f64), 1.0);
    }

    #[test]
    fn invalid_params() {
        assert!(DiffusionParams::new(1.5f64, 10, 0).is_err());
        assert!(DiffusionParams::new(0.5f64, 0, 0).is_err());
        let p = DiffusionParams::new(0.5f64, 10, 0).unwrap();
        assert!(estimate_spread(&arc(), &[], &p).is_err());
        assert!(estimate_spread(&arc(), &[7], &p).is_err());
    }

    #[test]
    fn summarize_matches_textbook_formula() {
        let e: SpreadEstimate<f64> = summarize(&[1, 2, 3, 4]);
        assert_eq!(e.mean, 2.5);
        let sd = (5.0f64 / 3.0).sqrt();
        assert!((e.std_error - sd / 2.0).abs() < 1e-15);
    }

    #[test]
    fn f32_spread() {
        let est = estimate_spread(&chain(), &[0], &DiffusionParams::new(1.0f32, 10, 0).unwrap()).unwrap();
        assert_eq!(est.mean, 3.0f32);
    }
}
