//! Non-parametric comparison of algorithms: Friedman mean ranks and the
//! Wilcoxon signed-rank test.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};

use crate::error::{Error, Result};

/// Largest number of non-zero differences handled by the exact null
/// distribution; above it the normal approximation is used.
pub const WILCOXON_EXACT_MAX: usize = 20;

/// Ascending ranks starting at 1; tied values share their average rank.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap_or(Ordering::Equal));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i + 1;
        while j < idx.len() && values[idx[j]] == values[idx[i]] {
            j += 1;
        }
        // positions i..j hold ranks i+1..=j
        let avg = (i + 1 + j) as f64 / 2.0;
        for &t in &idx[i..j] {
            ranks[t] = avg;
        }
        i = j;
    }
    ranks
}

/// One observation for the Friedman ranking.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation<'a> {
    pub dataset: &'a str,
    pub algorithm: &'a str,
    pub k: usize,
    pub spread: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankReport {
    pub algorithms: Vec<String>,
    pub datasets: Vec<String>,
    /// `mean_ranks[d][a]`: mean over seed sizes of algorithm `a` on dataset `d`.
    pub mean_ranks: Vec<Vec<f64>>,
    /// Mean of the per-dataset mean ranks.
    pub overall: Vec<f64>,
    /// Friedman chi-square over every (dataset, k) block.
    pub chi_square: f64,
    pub p_value: f64,
}

/// Ranks algorithms within every (dataset, k) block so that the largest
/// spread receives rank A, averages over k per dataset and then over
/// datasets. Datasets and algorithms keep their first-appearance order.
pub fn friedman_ranks(obs: &[Observation<'_>]) -> Result<RankReport> {
    let mut datasets: Vec<&str> = Vec::new();
    let mut algorithms: Vec<&str> = Vec::new();
    let mut sizes: Vec<usize> = Vec::new();
    let mut cells: HashMap<(&str, &str, usize), f64> = HashMap::new();
    for o in obs {
        if !datasets.contains(&o.dataset) {
            datasets.push(o.dataset);
        }
        if !algorithms.contains(&o.algorithm) {
            algorithms.push(o.algorithm);
        }
        if !sizes.contains(&o.k) {
            sizes.push(o.k);
        }
        cells.insert((o.dataset, o.algorithm, o.k), o.spread);
    }
    if obs.is_empty() {
        return Err(Error::IncompleteGrid(vec!["<empty table>".into()]));
    }
    sizes.sort_unstable();

    let mut missing = Vec::new();
    for &d in &datasets {
        for &a in &algorithms {
            for &k in &sizes {
                if !cells.contains_key(&(d, a, k)) {
                    missing.push(format!("{d}/{a}/k={k}"));
                }
            }
        }
    }
    if !missing.is_empty() {
        return Err(Error::IncompleteGrid(missing));
    }

    let na = algorithms.len();
    let mut rank_sums = vec![0.0; na];
    let mut blocks = 0usize;
    let mut mean_ranks = Vec::with_capacity(datasets.len());
    for &d in &datasets {
        let mut acc = vec![0.0; na];
        for &k in &sizes {
            let spreads: Vec<f64> = algorithms.iter().map(|&a| cells[&(d, a, k)]).collect();
            let ranks = average_ranks(&spreads);
            for (i, r) in ranks.iter().enumerate() {
                acc[i] += r;
                rank_sums[i] += r;
            }
            blocks += 1;
        }
        mean_ranks.push(acc.iter().map(|s| s / sizes.len() as f64).collect::<Vec<_>>());
    }
    let overall = (0..na)
        .map(|a| mean_ranks.iter().map(|row| row[a]).sum::<f64>() / datasets.len() as f64)
        .collect();

    let (nb, af) = (blocks as f64, na as f64);
    let chi_square = if na > 1 {
        let sum_sq: f64 = rank_sums.iter().map(|r| (r / nb).powi(2)).sum();
        12.0 * nb / (af * (af + 1.0)) * (sum_sq - af * (af + 1.0).powi(2) / 4.0)
    } else {
        0.0
    };
    let p_value = if na > 1 {
        ChiSquared::new(af - 1.0).map(|d| d.sf(chi_square.max(0.0))).unwrap_or(f64::NAN)
    } else {
        1.0
    };

    Ok(RankReport {
        algorithms: algorithms.into_iter().map(String::from).collect(),
        datasets: datasets.into_iter().map(String::from).collect(),
        mean_ranks,
        overall,
        chi_square,
        p_value,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Decision {
    /// First sample significantly larger.
    #[serde(rename = "+")]
    Better,
    #[serde(rename = "-")]
    Worse,
    #[serde(rename = "≈")]
    Similar,
}

impl fmt::Display for Decision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Decision::Better => "+",
            Decision::Worse => "-",
            Decision::Similar => "≈",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WilcoxonResult {
    pub better: usize,
    pub worse: usize,
    pub ties: usize,
    pub w_plus: f64,
    pub w_minus: f64,
    pub p_value: f64,
    pub exact: bool,
    pub decision: Decision,
}

/// How the Wilcoxon p-value is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum PValueMethod {
    /// Exact for at most [`WILCOXON_EXACT_MAX`] non-zero differences,
    /// normal approximation with continuity correction above.
    #[default]
    Auto,
    Exact,
    /// Normal approximation with tie correction, optionally with
    /// continuity correction.
    Normal { continuity: bool },
}

impl std::str::FromStr for PValueMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "auto" => Ok(PValueMethod::Auto),
            "exact" => Ok(PValueMethod::Exact),
            "normal" => Ok(PValueMethod::Normal { continuity: true }),
            "normal-uncorrected" => Ok(PValueMethod::Normal { continuity: false }),
            other => Err(Error::param(format!(
                "unknown p-value method `{other}` (auto, exact, normal, normal-uncorrected)"
            ))),
        }
    }
}

/// Two-sided Wilcoxon signed-rank test on paired samples. Zero differences
/// are dropped; tied absolute differences share average ranks.
pub fn wilcoxon_signed_rank(x: &[f64], y: &[f64], alpha: f64) -> Result<WilcoxonResult> {
    wilcoxon_with(x, y, alpha, PValueMethod::Auto)
}

pub fn wilcoxon_with(x: &[f64], y: &[f64], alpha: f64, method: PValueMethod) -> Result<WilcoxonResult> {
    if x.len() != y.len() {
        return Err(Error::param(format!("paired samples differ in length: {} vs {}", x.len(), y.len())));
    }
    if x.len() < 5 {
        return Err(Error::param(format!("need at least 5 pairs, got {}", x.len())));
    }
    let diffs: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).filter(|d| *d != 0.0).collect();
    let better = diffs.iter().filter(|d| **d > 0.0).count();
    let worse = diffs.len() - better;
    let ties = x.len() - diffs.len();
    if diffs.is_empty() {
        return Ok(WilcoxonResult {
            better,
            worse,
            ties,
            w_plus: 0.0,
            w_minus: 0.0,
            p_value: 1.0,
            exact: true,
            decision: Decision::Similar,
        });
    }
    let abs: Vec<f64> = diffs.iter().map(|d| d.abs()).collect();
    let ranks = average_ranks(&abs);
    let w_plus: f64 = ranks.iter().zip(&diffs).filter(|(_, d)| **d > 0.0).map(|(r, _)| r).sum();
    let w_minus: f64 = ranks.iter().sum::<f64>() - w_plus;

    let n = diffs.len();
    let (exact, continuity) = match method {
        PValueMethod::Auto => (n <= WILCOXON_EXACT_MAX, true),
        PValueMethod::Exact => (true, true),
        PValueMethod::Normal { continuity } => (false, continuity),
    };
    let p_value = if exact {
        exact_p(&ranks, w_plus)
    } else {
        normal_p(&abs, &ranks, w_plus, continuity)
    };
    let decision = if p_value < alpha {
        match w_plus.partial_cmp(&w_minus) {
            Some(Ordering::Greater) => Decision::Better,
            Some(Ordering::Less) => Decision::Worse,
            _ => Decision::Similar,
        }
    } else {
        Decision::Similar
    };
    Ok(WilcoxonResult { better, worse, ties, w_plus, w_minus, p_value, exact, decision })
}

/// Exact two-sided p-value by counting subsets of the (doubled, hence
/// integral) ranks: `min(1, 2·min(P(W ≤ w), P(W ≥ w)))`.
fn exact_p(ranks: &[f64], w_plus: f64) -> f64 {
    let doubled: Vec<usize> = ranks.iter().map(|r| (r * 2.0).round() as usize).collect();
    let total: usize = doubled.iter().sum();
    let mut counts = vec![0f64; total + 1];
    counts[0] = 1.0;
    for &r in &doubled {
        for s in (r..=total).rev() {
            counts[s] += counts[s - r];
        }
    }
    let patterns = 2f64.powi(ranks.len() as i32);
    let w = (w_plus * 2.0).round() as usize;
    let lower: f64 = counts[..=w].iter().sum();
    let upper: f64 = counts[w..].iter().sum();
    (2.0 * lower.min(upper) / patterns).min(1.0)
}

/// Normal approximation with tie correction.
fn normal_p(abs: &[f64], ranks: &[f64], w_plus: f64, continuity: bool) -> f64 {
    let n = ranks.len() as f64;
    let mean = n * (n + 1.0) / 4.0;
    let mut sorted = abs.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
    let mut tie_term = 0.0;
    let mut i = 0;
    while i < sorted.len() {
        let j = sorted[i..].iter().take_while(|v| **v == sorted[i]).count();
        let t = j as f64;
        tie_term += t * t * t - t;
        i += j;
    }
    let var = n * (n + 1.0) * (2.0 * n + 1.0) / 24.0 - tie_term / 48.0;
    if var <= 0.0 {
        return 1.0;
    }
    let shift = if continuity { 0.5 } else { 0.0 };
    let z = ((w_plus - mean).abs() - shift).max(0.0) / var.sqrt();
    let normal = Normal::new(0.0, 1.0).expect("standard normal");
    (2.0 * normal.sf(z)).min(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn average_ranks_with_ties() {
        assert_eq!(average_ranks(&[5.0, 3.0, 3.0]), vec![3.0, 1.5, 1.5]);
        assert_eq!(average_ranks(&[1.0, 1.0, 1.0, 1.0]), vec![2.5; 4]);
    }

    fn obs<'a>(d: &'a str, a: &'a str, k: usize, s: f64) -> Observation<'a> {
        Observation { dataset: d, algorithm: a, k, spread: s }
    }

    #[test]
    fn friedman_dominance() {
        let mut rows = Vec::new();
        for k in (10..=100).step_by(10) {
            rows.push(obs("net", "X", k, 50.0 + k as f64));
            rows.push(obs("net", "Y", k, 40.0 + k as f64));
        }
        let r = friedman_ranks(&rows).unwrap();
        assert_eq!(r.algorithms, vec!["X", "Y"]);
        assert_eq!(r.mean_ranks, vec![vec![2.0, 1.0]]);
        assert_eq!(r.overall, vec![2.0, 1.0]);
        assert!(r.p_value < 0.01);
    }

    #[test]
    fn friedman_all_tied() {
        let rows: Vec<_> = ["a", "b", "c"]
            .iter()
            .flat_map(|&a| [10, 20].map(|k| obs("d", a, k, 7.0)))
            .collect();
        let r = friedman_ranks(&rows).unwrap();
        assert_eq!(r.overall, vec![2.0; 3]);
        assert!(r.chi_square.abs() < 1e-12);
    }

    #[test]
    fn friedman_average_tie_rule() {
        let rows = vec![obs("d", "a", 10, 5.0), obs("d", "b", 10, 3.0), obs("d", "c", 10, 3.0)];
        let r = friedman_ranks(&rows).unwrap();
        assert_eq!(r.mean_ranks[0], vec![3.0, 1.5, 1.5]);
    }

    #[test]
    fn friedman_reports_missing_cells() {
        let rows = vec![obs("d", "a", 10, 1.0), obs("d", "b", 10, 2.0), obs("d", "a", 20, 1.0)];
        match friedman_ranks(&rows) {
            Err(Error::IncompleteGrid(m)) => assert_eq!(m, vec!["d/b/k=20".to_string()]),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn wilcoxon_identical_samples() {
        let x = [1.0, 2.0, 3.0, 4.0, 5.0];
        let r = wilcoxon_signed_rank(&x, &x, 0.05).unwrap();
        assert_eq!((r.p_value, r.decision), (1.0, Decision::Similar));
        assert_eq!(r.ties, 5);
    }

    #[test]
    fn wilcoxon_all_positive_ten() {
        let x: Vec<f64> = (1..=10).map(|i| 100.0 + i as f64 * 1.5).collect();
        let y = vec![100.0; 10];
        let r = wilcoxon_signed_rank(&x, &y, 0.05).unwrap();
        assert_eq!((r.better, r.worse, r.w_minus), (10, 0, 0.0));
        assert!((r.p_value - 2.0 / 1024.0).abs() < 1e-15);
        assert_eq!(r.decision, Decision::Better);
        let r = wilcoxon_signed_rank(&y, &x, 0.05).unwrap();
        assert_eq!(r.decision, Decision::Worse);
    }

    #[test]
    fn uncorrected_normal_matches_published_table() {
        let y = vec![100.0; 10];
        let x: Vec<f64> = (1..=10).map(|i| 100.0 + i as f64).collect();
        let plain = PValueMethod::Normal { continuity: false };
        let r = wilcoxon_with(&x, &y, 0.05, plain).unwrap();
        assert_eq!(format!("{:.3}", r.p_value), "0.005");
        // smallest difference negative: W- = 1
        let mut x9 = x.clone();
        x9[0] = 99.0;
        let r = wilcoxon_with(&x9, &y, 0.05, plain).unwrap();
        assert_eq!((r.better, r.worse), (9, 1));
        assert_eq!(format!("{:.3}", r.p_value), "0.007");
        assert_eq!(r.decision, Decision::Better);
    }

    #[test]
    fn wilcoxon_large_sample_uses_normal() {
        let x: Vec<f64> = (0..30).map(|i| i as f64 + if i % 3 == 0 { -0.5 } else { 0.7 }).collect();
        let y: Vec<f64> = (0..30).map(|i| i as f64).collect();
        let r = wilcoxon_signed_rank(&x, &y, 0.05).unwrap();
        assert!(!r.exact);
        assert!(r.p_value > 0.0 && r.p_value < 1.0);
    }

    #[test]
    fn wilcoxon_input_errors() {
        assert!(wilcoxon_signed_rank(&[1.0; 4], &[0.0; 4], 0.05).is_err());
        assert!(wilcoxon_signed_rank(&[1.0; 6], &[0.0; 5], 0.05).is_err());
    }
}
