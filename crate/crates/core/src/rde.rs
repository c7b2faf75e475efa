//! Randomized range-division evolution over seed sets.
//!
//! Every individual draws its own candidate pool: a prefix of the vertex
//! ranking whose length comes from [`up_bound`] at a random division
//! parameter. Initialisation, mutation and crossover all sample
//! replacements from such pools; selection keeps the better of each
//! parent/offspring pair by EDV.

use std::collections::HashMap;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::diffusion::{check_probability, edv};
use crate::error::{Error, Result};
use crate::graph::{Graph, VertexId};
use crate::ranking::VertexOrdering;
use crate::scalar::Real;
use crate::seeds::SeedSet;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RdeParams<T> {
    pub pop: usize,
    pub gmax: usize,
    pub div_factor: T,
    /// Mutation probability.
    pub mp: T,
    /// Crossover probability.
    pub cp: T,
    /// Range of the random division parameter.
    pub p_range: (T, T),
    pub k: usize,
    /// Activation probability used by EDV.
    pub p: T,
}

impl<T: Real> RdeParams<T> {
    /// Defaults: pop 10, gmax 100, div_factor 0.6, mp 0.1, cp 0.6,
    /// division parameter in [0.1, 0.5].
    pub fn with_defaults(k: usize, p: T) -> Self {
        RdeParams {
            pop: 10,
            gmax: 100,
            div_factor: T::lit(0.6),
            mp: T::lit(0.1),
            cp: T::lit(0.6),
            p_range: (T::lit(0.1), T::lit(0.5)),
            k,
            p,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.pop == 0 || self.gmax == 0 || self.k == 0 {
            return Err(Error::param("pop, gmax and k must be at least 1"));
        }
        for (name, v) in [("div_factor", self.div_factor), ("mp", self.mp), ("cp", self.cp)] {
            if !(v >= T::zero() && v <= T::one()) {
                return Err(Error::param(format!("{name} must lie in [0, 1], got {v}")));
            }
        }
        let (lo, hi) = self.p_range;
        if !(lo > T::zero() && lo <= hi && hi < T::one()) {
            return Err(Error::param(format!("division range must satisfy 0 < lo <= hi < 1, got [{lo}, {hi}]")));
        }
        check_probability(self.p)
    }
}

/// `k + n·(k/(n−k))^(1−p)·sin(πp/2)`.
pub fn up_bound<T: Real>(k: usize, n: usize, p: T) -> Result<T> {
    if k == 0 || k >= n {
        return Err(Error::param(format!("up_bound needs 1 <= k < n, got k = {k}, n = {n}")));
    }
    if !(p > T::zero() && p < T::one()) {
        return Err(Error::param(format!("division parameter must lie in (0, 1), got {p}")));
    }
    let (kf, nf) = (T::count(k), T::count(n));
    let ratio = kf / (nf - kf);
    Ok(kf + nf * ratio.powf(T::one() - p) * (T::FRAC_PI_2() * p).sin())
}

/// Pool size for one draw of the division parameter: `floor(up_bound)`
/// clamped to `[k + 1, n]` (or `n` when `k >= n`).
pub fn rrd_pool<T: Real, R: Rng + ?Sized>(k: usize, n: usize, p_range: (T, T), rng: &mut R) -> usize {
    let (lo, hi) = p_range;
    let u = T::lit(rng.gen::<f64>());
    let p = lo + (hi - lo) * u;
    if k >= n {
        return n;
    }
    let raw = up_bound(k, n, p).map(|ub| ub.floor()).unwrap_or_else(|_| T::count(n));
    let ub = raw.to_usize().unwrap_or(n);
    ub.clamp(k + 1, n)
}

/// Uniform draw from `pool \ exclude`, or `None` when nothing is left.
fn draw_outside<R: Rng + ?Sized>(pool: &[VertexId], exclude: &SeedSet, rng: &mut R) -> Option<VertexId> {
    let inside = pool.iter().filter(|&&v| exclude.contains(v)).count();
    let free = pool.len() - inside;
    if free == 0 {
        return None;
    }
    let target = rng.gen_range(0..free);
    pool.iter().copied().filter(|&v| !exclude.contains(v)).nth(target)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Population {
    pub individuals: Vec<SeedSet>,
}

impl Population {
    pub fn len(&self) -> usize {
        self.individuals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.individuals.is_empty()
    }

    /// Every individual has exactly `k` distinct ids below `n`.
    pub fn is_valid(&self, k: usize, n: usize) -> bool {
        self.individuals
            .iter()
            .all(|s| s.len() == k && s.is_consistent() && s.iter().all(|v| v < n))
    }
}

/// Per-slot replacement shared by initialisation and mutation: each slot is
/// replaced with probability `rate` by a uniform vertex of the individual's
/// pool that is not already a member.
fn perturb<T: Real, R: Rng + ?Sized>(
    individual: &mut SeedSet,
    svet: &VertexOrdering<T>,
    rate: T,
    p_range: (T, T),
    rng: &mut R,
) {
    let k = individual.len();
    let ub = rrd_pool(k, svet.len(), p_range, rng);
    let pool = &svet.order[..ub];
    let rate = rate.as_f64();
    for slot in 0..k {
        if rng.gen::<f64>() < rate {
            if let Some(v) = draw_outside(pool, individual, rng) {
                individual.replace(slot, v);
            }
        }
    }
}

/// Initial population: `pop` copies of the top-k vertices, each slot
/// perturbed with probability `div_factor`.
pub fn initial_pop<T: Real, R: Rng + ?Sized>(
    svet: &VertexOrdering<T>,
    params: &RdeParams<T>,
    rng: &mut R,
) -> Result<Population> {
    params.validate()?;
    if params.k > svet.len() {
        return Err(Error::param(format!("k = {} exceeds n = {}", params.k, svet.len())));
    }
    let top: SeedSet = svet.top(params.k).iter().copied().collect();
    let individuals = (0..params.pop)
        .map(|_| {
            let mut x = top.clone();
            perturb(&mut x, svet, params.div_factor, params.p_range, rng);
            x
        })
        .collect();
    Ok(Population { individuals })
}

/// Mutation: same replacement rule with probability `mp`. The input is
/// left untouched.
pub fn rde_mutation<T: Real, R: Rng + ?Sized>(
    x: &Population,
    svet: &VertexOrdering<T>,
    params: &RdeParams<T>,
    rng: &mut R,
) -> Population {
    let individuals = x
        .individuals
        .iter()
        .map(|ind| {
            let mut m = ind.clone();
            perturb(&mut m, svet, params.mp, params.p_range, rng);
            m
        })
        .collect();
    Population { individuals }
}

/// Slot-wise crossover of `x` and its mutant `xm`.
///
/// For slot `j` a fresh pool is drawn, then `ran`. With `ran < cp` the
/// mutant's vertex is preferred, otherwise the parent's; the other one is
/// the fallback. If both are already placed, a uniform vertex of the pool
/// outside the partial offspring is used, widening the pool to the whole
/// ranking if it is exhausted.
pub fn rde_crossover<T: Real, R: Rng + ?Sized>(
    x: &Population,
    xm: &Population,
    svet: &VertexOrdering<T>,
    params: &RdeParams<T>,
    rng: &mut R,
) -> Population {
    assert_eq!(x.len(), xm.len(), "population shapes differ");
    let n = svet.len();
    let cp = params.cp.as_f64();
    let individuals = x
        .individuals
        .iter()
        .zip(&xm.individuals)
        .map(|(parent, mutant)| {
            let k = parent.len();
            let mut child = SeedSet::with_capacity(k);
            for (&a, &b) in parent.slots().iter().zip(mutant.slots()) {
                let ub = rrd_pool(k, n, params.p_range, rng);
                let ran = rng.gen::<f64>();
                let (first, second) = if ran < cp { (b, a) } else { (a, b) };
                let v = if !child.contains(first) {
                    first
                } else if !child.contains(second) {
                    second
                } else {
                    draw_outside(&svet.order[..ub], &child, rng)
                        .or_else(|| draw_outside(&svet.order, &child, rng))
                        .expect("k <= n leaves a free vertex")
                };
                child.push(v);
            }
            child
        })
        .collect();
    Population { individuals }
}

/// Keeps, pair by pair, the individual with the larger EDV; ties keep `x`.
pub fn rde_selection<T: Real>(g: &Graph, x: &Population, xc: &Population, p: T) -> Population {
    assert_eq!(x.len(), xc.len(), "population shapes differ");
    let individuals = x
        .individuals
        .par_iter()
        .zip(xc.individuals.par_iter())
        .map(|(a, b)| {
            if edv(g, b.slots(), p) > edv(g, a.slots(), p) {
                b.clone()
            } else {
                a.clone()
            }
        })
        .collect();
    Population { individuals }
}

/// Distinct vertices of the final population, most frequent first (ties by
/// ascending id).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CandidateSet {
    pub vertices: Vec<VertexId>,
    /// Occurrence count aligned with `vertices`.
    pub counts: Vec<usize>,
}

impl CandidateSet {
    pub fn from_population(x: &Population) -> Self {
        let mut counts: HashMap<VertexId, usize> = HashMap::new();
        for v in x.individuals.iter().flat_map(|s| s.iter()) {
            *counts.entry(v).or_default() += 1;
        }
        let mut pairs: Vec<(VertexId, usize)> = counts.into_iter().collect();
        pairs.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
        let (vertices, counts) = pairs.into_iter().unzip();
        CandidateSet { vertices, counts }
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }
}

/// Full evolution record.
#[derive(Debug, Clone)]
pub struct RdeRun<T> {
    pub candidates: CandidateSet,
    pub population: Population,
    /// Best EDV in the population after initialisation and after each
    /// generation.
    pub best_edv: Vec<T>,
}

pub fn rand_rde<T: Real, R: Rng + ?Sized>(
    g: &Graph,
    svet: &VertexOrdering<T>,
    params: &RdeParams<T>,
    rng: &mut R,
) -> Result<CandidateSet> {
    rand_rde_traced(g, svet, params, rng).map(|run| run.candidates)
}

pub fn rand_rde_traced<T: Real, R: Rng + ?Sized>(
    g: &Graph,
    svet: &VertexOrdering<T>,
    params: &RdeParams<T>,
    rng: &mut R,
) -> Result<RdeRun<T>> {
    if svet.len() != g.n() {
        return Err(Error::param("vertex ordering does not cover the graph"));
    }
    let best = |x: &Population| {
        x.individuals
            .iter()
            .map(|s| edv(g, s.slots(), params.p))
            .fold(T::neg_infinity(), T::max)
    };
    let mut x = initial_pop(svet, params, rng)?;
    let mut best_edv = vec![best(&x)];
    for _ in 0..params.gmax {
        let xm = rde_mutation(&x, svet, params, rng);
        let xc = rde_crossover(&x, &xm, svet, params, rng);
        x = rde_selection(g, &x, &xc, params.p);
        debug_assert!(x.is_valid(params.k, g.n()));
        best_edv.push(best(&x));
    }
    Ok(RdeRun { candidates: CandidateSet::from_population(&x), population: x, best_edv })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diffusion::run_rng;
    use crate::ranking::{sortv_degree, RankMethod};

    fn ordering(order: Vec<VertexId>) -> VertexOrdering<f64> {
        VertexOrdering { order, method: RankMethod::Degree, scores: None }
    }

    fn params(k: usize) -> RdeParams<f64> {
        RdeParams::with_defaults(k, 0.1)
    }

    fn star(leaves: usize) -> Graph {
        let edges: Vec<_> = (1..=leaves).map(|l| (0, l)).collect();
        Graph::from_edges(leaves + 1, &edges, false).unwrap()
    }

    #[test]
    fn up_bound_reference_point() {
        let ub: f64 = up_bound(10, 1000, 0.5).unwrap();
        let expected = 10.0 + 1000.0 * (10.0f64 / 990.0).sqrt() * std::f64::consts::FRAC_PI_4.sin();
        assert!((ub - expected).abs() < 1e-12);
        assert!((ub - 81.07).abs() < 0.01, "{ub}");
    }

    #[test]
    fn up_bound_errors() {
        assert!(up_bound(5, 5, 0.3f64).is_err());
        assert!(up_bound(0, 5, 0.3f64).is_err());
        assert!(up_bound(1, 5, 1.0f64).is_err());
        assert!(up_bound(1, 5, 0.0f64).is_err());
    }

    #[test]
    fn pool_floor_and_clamp() {
        let mut rng = run_rng(0, 0);
        assert_eq!(rrd_pool(10, 1000, (0.5f64, 0.5), &mut rng), 81);
        // ub > n is clamped
        assert_eq!(rrd_pool(3, 5, (0.5f64, 0.5), &mut rng), 5);
        assert_eq!(rrd_pool(9, 10, (0.1f64, 0.5), &mut rng), 10);
    }

    #[test]
    fn initial_pop_without_diversity_is_topk() {
        let svet = ordering((0..20).rev().collect());
        let mut p = params(3);
        p.div_factor = 0.0;
        let x = initial_pop(&svet, &p, &mut run_rng(1, 0)).unwrap();
        assert_eq!(x.len(), 10);
        assert!(x.individuals.iter().all(|s| s.slots() == [19, 18, 17]));
    }

    #[test]
    fn full_pool_exclusion() {
        // k = n: pool equals the individual, nothing to swap in
        let svet = ordering(vec![2, 0, 1]);
        let mut p = params(3);
        p.div_factor = 1.0;
        let x = initial_pop(&svet, &p, &mut run_rng(1, 0)).unwrap();
        assert!(x.individuals.iter().all(|s| s.slots() == [2, 0, 1]));
    }

    #[test]
    fn mutation_zero_is_identity() {
        let svet = ordering((0..50).collect());
        let x = initial_pop(&svet, &params(5), &mut run_rng(2, 0)).unwrap();
        let mut p = params(5);
        p.mp = 0.0;
        let xm = rde_mutation(&x, &svet, &p, &mut run_rng(2, 1));
        assert_eq!(xm, x);
    }

    #[test]
    fn mutation_draws_stay_in_pool() {
        let n = 1000;
        let svet = ordering((0..n).collect());
        let mut p = params(10);
        p.mp = 1.0;
        let x = initial_pop(&svet, &p, &mut run_rng(3, 0)).unwrap();
        let max_ub = up_bound(10, n, 0.5f64).unwrap().floor() as usize;
        let xm = rde_mutation(&x, &svet, &p, &mut run_rng(3, 1));
        assert!(xm.is_valid(10, n));
        assert!(xm.individuals.iter().flat_map(|s| s.iter()).all(|v| v < max_ub));
    }

    #[test]
    fn crossover_identical_parents() {
        let svet = ordering((0..30).collect());
        let x = initial_pop(&svet, &params(4), &mut run_rng(4, 0)).unwrap();
        let xc = rde_crossover(&x, &x, &svet, &params(4), &mut run_rng(4, 1));
        assert_eq!(xc, x);
    }

    #[test]
    fn crossover_cp_one_takes_mutant() {
        let svet = ordering((0..30).collect());
        let x = Population { individuals: vec![SeedSet::new(vec![0, 1, 2], 30).unwrap()] };
        let xm = Population { individuals: vec![SeedSet::new(vec![7, 8, 9], 30).unwrap()] };
        let mut p = params(3);
        p.cp = 1.0;
        let xc = rde_crossover(&x, &xm, &svet, &p, &mut run_rng(5, 0));
        assert_eq!(xc.individuals[0].slots(), &[7, 8, 9]);
        p.cp = 0.0;
        let xc = rde_crossover(&x, &xm, &svet, &p, &mut run_rng(5, 0));
        assert_eq!(xc.individuals[0].slots(), &[0, 1, 2]);
    }

    #[test]
    fn crossover_swapped_pair_hand_trace() {
        let svet = ordering((0..10).collect());
        let x = Population { individuals: vec![SeedSet::new(vec![3, 4], 10).unwrap()] };
        let xm = Population { individuals: vec![SeedSet::new(vec![4, 3], 10).unwrap()] };
        let mut p = params(2);
        p.cp = 1.0;
        let xc = rde_crossover(&x, &xm, &svet, &p, &mut run_rng(6, 0));
        assert_eq!(xc.individuals[0].slots(), &[4, 3]);
        // whatever the draws, the child is a permutation of {3, 4}
        p.cp = 0.5;
        for s in 0..50 {
            let xc = rde_crossover(&x, &xm, &svet, &p, &mut run_rng(s, 0));
            assert_eq!(xc.individuals[0].sorted(), vec![3, 4]);
        }
    }

    #[test]
    fn crossover_c5_draws_outside_child() {
        // slot 2 of both parents repeats slot 1's choice: C5 must fire
        let svet = ordering((0..10).collect());
        let x = Population { individuals: vec![SeedSet::new(vec![5, 6], 10).unwrap()] };
        let xm = Population { individuals: vec![SeedSet::new(vec![6, 5], 10).unwrap()] };
        let mut p = params(2);
        for seed in 0..30 {
            p.cp = 0.5;
            let xc = rde_crossover(&x, &xm, &svet, &p, &mut run_rng(seed, 7));
            assert!(xc.is_valid(2, 10));
        }
    }

    #[test]
    fn selection_prefers_higher_edv_and_keeps_ties() {
        let g = star(5);
        let x = Population { individuals: vec![SeedSet::new(vec![1], 6).unwrap()] };
        let xc = Population { individuals: vec![SeedSet::new(vec![0], 6).unwrap()] };
        assert_eq!(rde_selection(&g, &x, &xc, 0.1f64).individuals[0].slots(), &[0]);
        assert_eq!(rde_selection(&g, &x, &xc, 0.0f64), x);
        assert_eq!(rde_selection(&g, &x, &x, 0.3f64), x);
    }

    #[test]
    fn candidate_set_ordering() {
        let x = Population {
            individuals: vec![
                SeedSet::new(vec![3, 1], 5).unwrap(),
                SeedSet::new(vec![1, 4], 5).unwrap(),
                SeedSet::new(vec![0, 3], 5).unwrap(),
            ],
        };
        let c = CandidateSet::from_population(&x);
        assert_eq!(c.vertices, vec![1, 3, 0, 4]);
        assert_eq!(c.counts, vec![2, 2, 1, 1]);
    }

    #[test]
    fn star_converges_to_centre() {
        let g = star(8);
        // top-1 is a leaf; the centre only enters through the pool
        let svet = ordering(vec![1, 2, 0, 3, 4, 5, 6, 7, 8]);
        let mut p = RdeParams::with_defaults(1, 0.1f64);
        p.pop = 3;
        p.gmax = 50;
        p.mp = 0.5;
        p.p_range = (0.5, 0.5);
        let run = rand_rde_traced(&g, &svet, &p, &mut run_rng(11, 0)).unwrap();
        assert_eq!(run.candidates.vertices[0], 0);
        assert!(run.best_edv.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn single_static_individual_is_topk() {
        let g = star(6);
        let svet = sortv_degree::<f64>(&g);
        let mut p = RdeParams::with_defaults(2, 0.05f64);
        p.pop = 1;
        p.div_factor = 0.0;
        p.mp = 0.0;
        let c = rand_rde(&g, &svet, &p, &mut run_rng(0, 0)).unwrap();
        assert_eq!(c.vertices, vec![0, 1]);
    }

    #[test]
    fn invalid_params_rejected() {
        let svet = ordering((0..5).collect());
        let mut p = params(2);
        p.p_range = (0.0, 0.5);
        assert!(initial_pop(&svet, &p, &mut run_rng(0, 0)).is_err());
        let mut p = params(6);
        p.div_factor = 0.5;
        assert!(initial_pop(&svet, &p, &mut run_rng(0, 0)).is_err());
        let mut p = params(2);
        p.cp = 1.5;
        assert!(p.validate().is_err());
    }
}
