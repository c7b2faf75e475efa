//! Fast-convergence stage: max-degree peeling for a starting seed set,
//! then adaptive simulated annealing over swaps with the candidate set.

use log::warn;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::diffusion::edv;
use crate::error::{Error, Result};
use crate::graph::{DeletionOverlay, Graph};
use crate::rde::CandidateSet;
use crate::scalar::Real;
use crate::seeds::SeedSet;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SaaParams<T> {
    pub t_initial: T,
    pub t_final: T,
    /// Cooling coefficient.
    pub theta: T,
    /// Neighbourhood moves per temperature level.
    pub moves_per_level: usize,
    /// Smallest temperature drop applied at the end of a level.
    pub min_decrement: T,
    pub max_levels: usize,
}

impl<T: Real> Default for SaaParams<T> {
    /// `T_i = 2000`, `T_f = 10`, `θ = 5`, `N = 15`, floor `θ·ln 2`.
    fn default() -> Self {
        let theta = T::lit(5.0);
        SaaParams {
            t_initial: T::lit(2000.0),
            t_final: T::lit(10.0),
            theta,
            moves_per_level: 15,
            min_decrement: theta * T::LN_2(),
            max_levels: 100_000,
        }
    }
}

impl<T: Real> SaaParams<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.t_final > T::zero() && self.t_initial > self.t_final) {
            return Err(Error::param("temperatures must satisfy T_i > T_f > 0"));
        }
        if !(self.theta > T::zero() && self.min_decrement > T::zero()) {
            return Err(Error::param("theta and min_decrement must be positive"));
        }
        if self.moves_per_level == 0 || self.max_levels == 0 {
            return Err(Error::param("moves per level and max_levels must be at least 1"));
        }
        Ok(())
    }

    /// Temperature after a level that ended with `r` consecutive rejections.
    pub fn cool(&self, t: T, rejections: usize) -> T {
        let step = self.theta * (T::count(rejections) + T::one()).ln();
        t - step.max(self.min_decrement)
    }
}

/// Picks `k` vertices by repeatedly taking the live vertex of maximum live
/// degree (lowest id on ties) and deleting it with its edges.
pub fn construct_ss(g: &Graph, k: usize) -> Result<SeedSet> {
    if k == 0 || k > g.n() {
        return Err(Error::param(format!("need 1 <= k <= n, got k = {k}, n = {}", g.n())));
    }
    let mut overlay = DeletionOverlay::new(g);
    let mut seeds = SeedSet::with_capacity(k);
    for _ in 0..k {
        let v = overlay
            .live_vertices()
            .max_by(|&a, &b| overlay.live_degree(a).cmp(&overlay.live_degree(b)).then(b.cmp(&a)))
            .expect("k <= n leaves a live vertex");
        overlay.delete(v);
        seeds.push(v);
    }
    Ok(seeds)
}

#[derive(Debug, Clone, Serialize)]
pub struct SaaOutcome<T> {
    pub seeds: SeedSet,
    pub edv: T,
    pub initial: SeedSet,
    pub initial_edv: T,
    pub levels: usize,
    pub moves: usize,
    pub accepted: usize,
    /// Set when the candidate set offered no vertex outside the seeds.
    pub exhausted: bool,
    pub final_temperature: T,
}

/// Adaptive simulated annealing. Each move swaps a uniform seed for a
/// uniform candidate outside the current set and is kept only on strict
/// EDV improvement. `r` counts consecutive rejections across levels; the
/// temperature drops by `max(θ·ln(r+1), min_decrement)` after every level.
pub fn adap_saa<T: Real, R: Rng + ?Sized>(
    g: &Graph,
    csset: &CandidateSet,
    k: usize,
    params: &SaaParams<T>,
    p: T,
    rng: &mut R,
) -> Result<SaaOutcome<T>> {
    params.validate()?;
    let initial = construct_ss(g, k)?;
    let initial_edv = edv(g, initial.slots(), p);
    let mut best = initial.clone();
    let mut best_edv = initial_edv;

    let mut temperature = params.t_initial;
    let mut rejections = 0usize;
    let (mut levels, mut moves, mut accepted) = (0, 0, 0);
    let mut exhausted = false;
    let mut outside: Vec<usize> = Vec::with_capacity(csset.len());

    'annealing: while temperature > params.t_final && levels < params.max_levels {
        for _ in 0..params.moves_per_level {
            outside.clear();
            outside.extend(csset.vertices.iter().copied().filter(|&v| !best.contains(v)));
            if outside.is_empty() {
                warn!("candidate set is contained in the seed set; no move possible");
                exhausted = true;
                break 'annealing;
            }
            let slot = rng.gen_range(0..k);
            let v = outside[rng.gen_range(0..outside.len())];
            let mut candidate = best.clone();
            candidate.replace(slot, v);
            let value = edv(g, candidate.slots(), p);
            moves += 1;
            if value > best_edv {
                best = candidate;
                best_edv = value;
                rejections = 0;
                accepted += 1;
            } else {
                rejections += 1;
            }
        }
        temperature = params.cool(temperature, rejections);
        levels += 1;
    }

    Ok(SaaOutcome {
        seeds: best,
        edv: best_edv,
        initial,
        initial_edv,
        levels,
        moves,
        accepted,
        exhausted,
        final_temperature: temperature,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diffusion::run_rng;

    fn star(leaves: usize) -> Graph {
        let edges: Vec<_> = (1..=leaves).map(|l| (0, l)).collect();
        Graph::from_edges(leaves + 1, &edges, false).unwrap()
    }

    fn candidates(vertices: Vec<usize>) -> CandidateSet {
        let counts = vec![1; vertices.len()];
        CandidateSet { vertices, counts }
    }

    #[test]
    fn construct_ss_star() {
        assert_eq!(construct_ss(&star(5), 2).unwrap().slots(), &[0, 1]);
    }

    #[test]
    fn construct_ss_two_triangles() {
        let g = Graph::from_edges(6, &[(0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3)], false).unwrap();
        let s = construct_ss(&g, 2).unwrap();
        assert_eq!(s.slots(), &[0, 3]);
    }

    #[test]
    fn construct_ss_all_and_errors() {
        let g = star(3);
        assert_eq!(construct_ss(&g, 4).unwrap().sorted(), vec![0, 1, 2, 3]);
        assert!(construct_ss(&g, 5).is_err());
        assert!(construct_ss(&g, 0).is_err());
    }

    #[test]
    fn construct_ss_can_pick_adjacent_vertices() {
        // Two hubs joined by an edge, each with three private leaves, plus
        // a disjoint triangle. After the first hub goes, the second still
        // has live degree 3 and beats every triangle vertex.
        let edges = [
            (0, 1),
            (0, 2), (0, 3), (0, 4),
            (1, 5), (1, 6), (1, 7),
            (8, 9), (9, 10), (10, 8),
        ];
        let g = Graph::from_edges(11, &edges, false).unwrap();
        let s = construct_ss(&g, 2).unwrap();
        assert_eq!(s.slots(), &[0, 1]);
        assert!(g.has_arc(0, 1), "output is not an independent set");
    }

    #[test]
    fn empty_neighbourhood_returns_construction() {
        let g = star(4);
        let out = adap_saa(&g, &candidates(vec![0]), 1, &SaaParams::default(), 0.1f64, &mut run_rng(0, 0)).unwrap();
        assert!(out.exhausted);
        assert_eq!(out.seeds, out.initial);
        assert_eq!(out.moves, 0);
    }

    #[test]
    fn star_centre_is_kept() {
        let g = star(6);
        let out =
            adap_saa(&g, &candidates((0..7).collect()), 1, &SaaParams::default(), 0.2f64, &mut run_rng(1, 0)).unwrap();
        assert_eq!(out.seeds.slots(), &[0]);
        assert_eq!(out.accepted, 0);
    }

    #[test]
    fn zero_probability_terminates_without_acceptance() {
        let g = star(6);
        let params = SaaParams::<f64>::default();
        let out = adap_saa(&g, &candidates((0..7).collect()), 2, &params, 0.0, &mut run_rng(2, 0)).unwrap();
        assert_eq!(out.accepted, 0);
        assert_eq!(out.moves, out.levels * params.moves_per_level);
        assert!(out.final_temperature <= params.t_final);
    }

    #[test]
    fn rejections_carry_over_between_levels() {
        let params = SaaParams::<f64>::default();
        // level one ends with 15 rejections, level two with 30
        let t1 = params.cool(2000.0, 15);
        let t2 = params.cool(t1, 30);
        assert!((2000.0 - t1 - 5.0 * 16f64.ln()).abs() < 1e-12);
        assert!((t1 - t2 - 5.0 * 31f64.ln()).abs() < 1e-12);
        // an improving last move still cools by the floor
        assert!((2000.0 - params.cool(2000.0, 0) - 5.0 * 2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn improvement_is_adopted() {
        // path 0-1-2-3-4-5-6 plus a hub 7 joined to 8..=13
        let mut edges: Vec<_> = (0..6).map(|i| (i, i + 1)).collect();
        edges.extend((8..14).map(|l| (7, l)));
        let g = Graph::from_edges(14, &edges, false).unwrap();
        let out = adap_saa(&g, &candidates(vec![7, 1, 3, 5]), 2, &SaaParams::default(), 0.3f64, &mut run_rng(3, 0))
            .unwrap();
        assert!(out.edv >= out.initial_edv);
        assert!(out.seeds.contains(7));
    }

    #[test]
    fn level_cap_bounds_runtime() {
        let params = SaaParams::<f64> { max_levels: 3, ..Default::default() };
        let out = adap_saa(&star(5), &candidates((0..6).collect()), 1, &params, 0.1, &mut run_rng(4, 0)).unwrap();
        assert_eq!(out.levels, 3);
    }

    #[test]
    fn invalid_params() {
        let p = SaaParams::<f64> { t_final: 3000.0, ..Default::default() };
        assert!(p.validate().is_err());
        let p = SaaParams::<f64> { moves_per_level: 0, ..Default::default() };
        assert!(p.validate().is_err());
    }
}
