//! Controlled proposal-set quality: start from the positive test edges and
//! degrade with uniformly drawn negatives, either growing the set or
//! replacing positives at fixed size.

use std::path::Path;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::eval::{rank_pairs, EvalResult, RunSnapshot};
use crate::graph::{Edge, Graph};
use crate::heuristics::Scorer;
use crate::rng::Seed;
use crate::scalar::Scalar;
use crate::splits::{inference_graph, sample_negatives, EdgeSplit};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QualityOptions {
    pub hits_k: usize,
    pub include_valid: bool,
}

impl Default for QualityOptions {
    fn default() -> Self {
        Self {
            hits_k: 10,
            include_valid: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QualityPoint<T> {
    pub num_pos: usize,
    pub num_neg: usize,
    /// Negatives per positive in the proposal set; infinite with no positives.
    pub raw_ratio: f64,
    /// `raw_ratio` divided by the non-edge to edge ratio of the whole dataset.
    pub relative_ratio: f64,
    pub hits: EvalResult<T>,
}

/// `(C(n, 2) - m) / m` with `m` counting every positive edge of the split.
pub fn ground_truth_ratio(num_nodes: usize, total_positive: usize) -> f64 {
    let pairs = (num_nodes * num_nodes.saturating_sub(1) / 2) as f64;
    let m = total_positive as f64;
    (pairs - m) / m
}

fn ratio(num_pos: usize, num_neg: usize) -> f64 {
    if num_pos == 0 {
        f64::INFINITY
    } else {
        num_neg as f64 / num_pos as f64
    }
}

fn evaluate<T: Scalar>(
    g_train: &Graph,
    split: &EdgeSplit,
    rank: &Scorer<T>,
    proposal: &[Edge],
    num_pos: usize,
    opts: QualityOptions,
    seed: Seed,
) -> Result<QualityPoint<T>> {
    let g = g_train.with_edges(proposal.iter().copied())?;
    let g = inference_graph(&g, split, opts.include_valid)?;
    let config = RunSnapshot {
        filter: None,
        rank: rank.kind().name().to_string(),
        k: proposal.len(),
        seed: Some(seed.0),
    };
    let hits = rank_pairs(&g, rank, &split.test_pos, &split.test_neg, opts.hits_k, config)?;
    let num_neg = proposal.len() - num_pos;
    let raw_ratio = ratio(num_pos, num_neg);
    Ok(QualityPoint {
        num_pos,
        num_neg,
        raw_ratio,
        relative_ratio: raw_ratio / ground_truth_ratio(split.num_nodes, split.total_positive()),
        hits,
    })
}

fn injected_negatives(g_train: &Graph, split: &EdgeSplit, count: usize, seed: Seed) -> Result<Vec<Edge>> {
    let negatives = sample_negatives(
        g_train,
        &[&split.test_pos, &split.valid_pos],
        count,
        seed.derive("quality-negatives"),
    )?;
    debug_assert!(negatives
        .iter()
        .all(|e| !split.test_pos.contains(e) && !split.valid_pos.contains(e)));
    Ok(negatives)
}

/// Setting 1: all positive test edges plus `c` uniform negatives for each
/// `c` in `neg_counts`. Larger counts extend smaller ones.
pub fn quality_grow<T: Scalar>(
    g_train: &Graph,
    split: &EdgeSplit,
    rank: &Scorer<T>,
    neg_counts: &[usize],
    seed: Seed,
    opts: QualityOptions,
) -> Result<Vec<QualityPoint<T>>> {
    let max = neg_counts.iter().copied().max().unwrap_or(0);
    let negatives = injected_negatives(g_train, split, max, seed)?;
    let t = split.test_pos.len();
    neg_counts
        .par_iter()
        .map(|&c| {
            let mut proposal = split.test_pos.clone();
            proposal.extend_from_slice(&negatives[..c]);
            evaluate(g_train, split, rank, &proposal, t, opts, seed)
        })
        .collect()
}

/// Setting 2: proposal size fixed at the number of positive test edges;
/// fraction `phi` of it is a uniform subset of the positives and the rest
/// uniform negatives. Lower `phi` keeps a subset of the positives of any
/// higher `phi` and a superset of its negatives.
pub fn quality_fixed<T: Scalar>(
    g_train: &Graph,
    split: &EdgeSplit,
    rank: &Scorer<T>,
    pos_fracs: &[f64],
    seed: Seed,
    opts: QualityOptions,
) -> Result<Vec<QualityPoint<T>>> {
    if let Some(bad) = pos_fracs.iter().find(|f| !(0.0..=1.0).contains(*f)) {
        return Err(Error::InvalidConfig(format!("positive fraction {bad} outside [0, 1]")));
    }
    let t = split.test_pos.len();
    let mut positives = split.test_pos.clone();
    positives.shuffle(&mut seed.derive("quality-keep").rng());
    let negatives = injected_negatives(g_train, split, t, seed)?;
    pos_fracs
        .par_iter()
        .map(|&phi| {
            let keep = ((phi * t as f64) + 1e-9).floor() as usize;
            let mut proposal = positives[..keep].to_vec();
            proposal.extend_from_slice(&negatives[..t - keep]);
            evaluate(g_train, split, rank, &proposal, keep, opts, seed)
        })
        .collect()
}

/// One row of a quality curve aggregated over seeds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QualitySummary {
    pub raw_ratio: f64,
    pub relative_ratio: f64,
    pub hits_mean: f64,
    pub hits_std: f64,
    pub seed_count: usize,
}

/// Aggregates per-seed curves level by level. Every run must have the same
/// number of levels.
pub fn summarize<T: Scalar>(runs: &[Vec<QualityPoint<T>>]) -> Vec<QualitySummary> {
    let Some(first) = runs.first() else {
        return Vec::new();
    };
    (0..first.len())
        .map(|level| {
            let points: Vec<&QualityPoint<T>> = runs.iter().map(|r| &r[level]).collect();
            let s = points.len() as f64;
            let mean = |f: &dyn Fn(&QualityPoint<T>) -> f64| points.iter().map(|p| f(p)).sum::<f64>() / s;
            let hits_mean = mean(&|p| p.hits.value);
            let var = if points.len() > 1 {
                points.iter().map(|p| (p.hits.value - hits_mean).powi(2)).sum::<f64>() / (s - 1.0)
            } else {
                0.0
            };
            QualitySummary {
                raw_ratio: mean(&|p| p.raw_ratio),
                relative_ratio: mean(&|p| p.relative_ratio),
                hits_mean,
                hits_std: var.sqrt(),
                seed_count: points.len(),
            }
        })
        .collect()
}

/// Writes `raw_ratio,relative_ratio,hits_mean,hits_std,seed_count`.
pub fn write_quality_csv(path: impl AsRef<Path>, rows: &[QualitySummary]) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["raw_ratio", "relative_ratio", "hits_mean", "hits_std", "seed_count"])?;
    for r in rows {
        w.write_record([
            r.raw_ratio.to_string(),
            r.relative_ratio.to_string(),
            r.hits_mean.to_string(),
            r.hits_std.to_string(),
            r.seed_count.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{generate_sbm, SbmConfig};
    use crate::splits::{sbm_eval_edges, SbmEvalCounts, SplitKind};
    use std::collections::HashSet;

    fn fig1(seed: u64) -> (Graph, EdgeSplit) {
        let cfg = SbmConfig {
            block_sizes: vec![50, 50],
            p_in: 0.3,
            p_out: 1.0 / 30.0,
            seed: Seed(seed),
        };
        let (g, blocks) = generate_sbm(&cfg).unwrap();
        let counts = SbmEvalCounts::eighty_ten_ten(g.num_edges());
        let split = sbm_eval_edges(&g, &blocks, counts, Seed(seed + 100)).unwrap();
        (g, split)
    }

    #[test]
    fn relative_ratio_formula() {
        // n=100, m_total=200, 50 positives with 100 negatives.
        let ground = ground_truth_ratio(100, 200);
        assert_eq!(ground, 23.75);
        assert!((ratio(50, 100) / ground - 0.0842).abs() < 1e-4);
        assert!(ratio(0, 5).is_infinite());
    }

    #[test]
    fn grow_points_nest_and_avoid_eval_edges() {
        let (g, split) = fig1(1);
        let cn = Scorer::<f64>::common_neighbors();
        let counts = [0, 20, 60];
        let points = quality_grow(&g, &split, &cn, &counts, Seed(3), QualityOptions::default()).unwrap();
        assert_eq!(points.len(), 3);
        assert_eq!(points[0].raw_ratio, 0.0);
        assert_eq!(points[2].num_neg, 60);
        let negatives = injected_negatives(&g, &split, 60, Seed(3)).unwrap();
        let blocked: HashSet<Edge> = split.test_pos.iter().chain(&split.valid_pos).copied().collect();
        for e in &negatives {
            assert!(!g.has_edge(e.0, e.1));
            assert!(!blocked.contains(e));
        }
        let shorter = injected_negatives(&g, &split, 60, Seed(3)).unwrap();
        assert_eq!(&negatives[..20], &shorter[..20]);
    }

    #[test]
    fn fixed_endpoints() {
        let (g, split) = fig1(2);
        let cn = Scorer::<f64>::common_neighbors();
        let points = quality_fixed(&g, &split, &cn, &[1.0, 0.5, 0.0], Seed(4), QualityOptions::default()).unwrap();
        let t = split.test_pos.len();
        assert_eq!((points[0].num_pos, points[0].num_neg), (t, 0));
        assert_eq!(points[1].num_pos + points[1].num_neg, t);
        assert_eq!((points[2].num_pos, points[2].num_neg), (0, t));
        assert!(points[2].raw_ratio.is_infinite());
        assert!(quality_fixed(&g, &split, &cn, &[1.5], Seed(4), QualityOptions::default()).is_err());
    }

    #[test]
    fn infeasible_negative_count() {
        let g = Graph::from_edges(4, [(0, 1), (1, 2)]).unwrap();
        let split = EdgeSplit {
            num_nodes: 4,
            kind: SplitKind::Random,
            train_pos: vec![(0, 1), (1, 2)],
            valid_pos: vec![],
            test_pos: vec![(0, 2)],
            valid_neg: vec![],
            test_neg: vec![(0, 3)],
        };
        let cn = Scorer::<f64>::common_neighbors();
        assert!(matches!(
            quality_grow(&g, &split, &cn, &[10], Seed(0), QualityOptions::default()),
            Err(Error::InfeasibleSample { .. })
        ));
    }

    #[test]
    fn summary_statistics() {
        let (g, split) = fig1(3);
        let cn = Scorer::<f64>::common_neighbors();
        let runs: Vec<_> = (0..3)
            .map(|s| quality_grow(&g, &split, &cn, &[0, 40], Seed(s), QualityOptions::default()).unwrap())
            .collect();
        let rows = summarize(&runs);
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].seed_count, 3);
        // Level 0 has no randomness: identical across seeds.
        assert_eq!(rows[0].hits_std, 0.0);
        let mean = runs.iter().map(|r| r[1].hits.value).sum::<f64>() / 3.0;
        assert!((rows[1].hits_mean - mean).abs() < 1e-15);
    }
}
