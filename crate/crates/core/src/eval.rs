//! Hits@K and the Filter & Rank pipeline with target-size selection.

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{augment, Edge, Graph};
use crate::heuristics::Scorer;
use crate::proposal::{
    enumerate_starting_set_capped, force_include, rank_candidates, ProposalEntry, ProposalSet,
    TargetSizeGrid, DEFAULT_STARTING_SET_CAP,
};
use crate::scalar::{score_cmp, Scalar};
use crate::splits::{inference_graph, EdgeSplit};

/// Fraction of positives scored strictly above the `k`-th highest negative.
///
/// With fewer than `k` negatives every positive counts as a hit.
pub fn hits_at_k<T: Scalar>(pos: &[T], neg: &[T], k: usize) -> Result<f64> {
    if pos.is_empty() {
        return Err(Error::EmptyPositives);
    }
    if k == 0 {
        return Err(Error::InvalidConfig("hits@K needs K >= 1".into()));
    }
    if neg.len() < k {
        return Ok(1.0);
    }
    let mut scratch = neg.to_vec();
    let (_, &mut threshold, _) = scratch.select_nth_unstable_by(k - 1, |a, b| score_cmp(*b, *a));
    let hits = pos
        .iter()
        .filter(|&&p| score_cmp(p, threshold) == std::cmp::Ordering::Greater)
        .count();
    Ok(hits as f64 / pos.len() as f64)
}

/// Settings recorded alongside every evaluation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunSnapshot {
    pub filter: Option<String>,
    pub rank: String,
    pub k: usize,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalResult<T> {
    pub metric: String,
    #[serde(rename = "K")]
    pub hits_k: usize,
    pub value: f64,
    pub pos_scores: Vec<T>,
    pub neg_scores: Vec<T>,
    pub config: RunSnapshot,
}

impl<T: Scalar> EvalResult<T> {
    pub fn new(pos_scores: Vec<T>, neg_scores: Vec<T>, hits_k: usize, config: RunSnapshot) -> Result<Self> {
        let value = hits_at_k(&pos_scores, &neg_scores, hits_k)?;
        Ok(Self {
            metric: format!("hits@{hits_k}"),
            hits_k,
            value,
            pos_scores,
            neg_scores,
            config,
        })
    }

    /// Hits@`k` recomputed from the retained scores.
    pub fn rethreshold(&self, k: usize) -> Result<f64> {
        hits_at_k(&self.pos_scores, &self.neg_scores, k)
    }
}

/// Scores positive and negative pairs with `scorer` on `g` and computes Hits@K.
pub fn rank_pairs<T: Scalar>(
    g: &Graph,
    scorer: &Scorer<T>,
    pos: &[Edge],
    neg: &[Edge],
    hits_k: usize,
    config: RunSnapshot,
) -> Result<EvalResult<T>> {
    let pos_scores = scorer.batch_score(g, pos)?;
    let neg_scores = scorer.batch_score(g, neg)?;
    EvalResult::new(pos_scores, neg_scores, hits_k, config)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FilterRankOptions {
    /// K in Hits@K.
    pub hits_k: usize,
    /// Add positive validation edges to the test-time graph.
    pub include_valid: bool,
    /// Force positive validation edges into the test-time proposal set.
    pub force_valid: bool,
    pub starting_set_cap: usize,
    pub seed: Option<u64>,
}

impl Default for FilterRankOptions {
    fn default() -> Self {
        Self {
            hits_k: 10,
            include_valid: false,
            force_valid: false,
            starting_set_cap: DEFAULT_STARTING_SET_CAP,
            seed: None,
        }
    }
}

/// Validation and test evaluation at one target size.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FilterRankOutcome<T> {
    pub k: usize,
    pub valid: EvalResult<T>,
    pub test: EvalResult<T>,
}

/// A prepared Filter & Rank run: the starting set is enumerated and ranked
/// once, after which each target size is a prefix.
pub struct FilterRank<'a, T: Scalar> {
    g_train: &'a Graph,
    split: &'a EdgeSplit,
    filter: &'a Scorer<T>,
    rank: &'a Scorer<T>,
    options: FilterRankOptions,
    candidates: ProposalSet<T>,
    forced: Vec<ProposalEntry<T>>,
}

impl<'a, T: Scalar> FilterRank<'a, T> {
    pub fn new(
        g_train: &'a Graph,
        split: &'a EdgeSplit,
        filter: &'a Scorer<T>,
        rank: &'a Scorer<T>,
        options: FilterRankOptions,
    ) -> Result<Self> {
        rank.check(g_train)?;
        let start = enumerate_starting_set_capped(g_train, options.starting_set_cap)?;
        let candidates = rank_candidates(g_train, &start, filter)?;
        let forced = if options.force_valid {
            let scores = filter.batch_score(g_train, &split.valid_pos)?;
            split
                .valid_pos
                .iter()
                .zip(scores)
                .map(|(&(u, v), score)| ProposalEntry { u, v, score })
                .collect()
        } else {
            Vec::new()
        };
        Ok(Self {
            g_train,
            split,
            filter,
            rank,
            options,
            candidates,
            forced,
        })
    }

    pub fn starting_set_size(&self) -> usize {
        self.candidates.len()
    }

    /// Top-`k` proposal set, clamped to the starting set.
    pub fn proposal(&self, k: usize) -> ProposalSet<T> {
        self.candidates.prefix(k)
    }

    /// The proposal set used at test time, with validation edges forced in
    /// when enabled.
    pub fn test_proposal(&self, k: usize) -> ProposalSet<T> {
        let p = self.proposal(k);
        if self.options.force_valid {
            force_include(&p, &self.forced, p.len())
        } else {
            p
        }
    }

    fn snapshot(&self, k: usize) -> RunSnapshot {
        RunSnapshot {
            filter: Some(self.filter.kind().name().to_string()),
            rank: self.rank.kind().name().to_string(),
            k,
            seed: self.options.seed,
        }
    }

    /// Validation Hits@K on the augmented training graph.
    pub fn evaluate_valid(&self, k: usize) -> Result<EvalResult<T>> {
        let p = self.proposal(k);
        let g = augment(self.g_train, &p, p.len())?;
        rank_pairs(
            &g,
            self.rank,
            &self.split.valid_pos,
            &self.split.valid_neg,
            self.options.hits_k,
            self.snapshot(p.len()),
        )
    }

    /// Test Hits@K on the augmented inference graph.
    pub fn evaluate_test(&self, k: usize) -> Result<EvalResult<T>> {
        let p = self.test_proposal(k);
        let g = augment(self.g_train, &p, p.len())?;
        let g = inference_graph(&g, self.split, self.options.include_valid)?;
        rank_pairs(
            &g,
            self.rank,
            &self.split.test_pos,
            &self.split.test_neg,
            self.options.hits_k,
            self.snapshot(p.len()),
        )
    }

    pub fn evaluate(&self, k: usize) -> Result<FilterRankOutcome<T>> {
        let k = k.min(self.starting_set_size());
        Ok(FilterRankOutcome {
            k,
            valid: self.evaluate_valid(k)?,
            test: self.evaluate_test(k)?,
        })
    }
}

/// Enumerate, filter to the top `k`, augment and rank.
pub fn filter_and_rank<T: Scalar>(
    g_train: &Graph,
    split: &EdgeSplit,
    filter: &Scorer<T>,
    rank: &Scorer<T>,
    k: usize,
    options: FilterRankOptions,
) -> Result<FilterRankOutcome<T>> {
    FilterRank::new(g_train, split, filter, rank, options)?.evaluate(k)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub k: usize,
    pub valid: f64,
    pub test: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchOutcome<T> {
    /// Validation argmax; ties resolve to the smaller size.
    pub best_k: usize,
    /// Test argmax under the same tie rule, for diagnostics.
    pub test_best_k: usize,
    pub curve: Vec<CurvePoint>,
    /// Test evaluation at `best_k`.
    pub result: EvalResult<T>,
}

fn argmax_first(points: &[CurvePoint], key: impl Fn(&CurvePoint) -> f64) -> usize {
    let mut best = 0;
    for (i, p) in points.iter().enumerate() {
        if key(p) > key(&points[best]) {
            best = i;
        }
    }
    best
}

/// Evaluates every grid size on validation and test edges and reports the
/// test result at the validation-optimal size.
pub fn target_size_search<T: Scalar>(
    g_train: &Graph,
    split: &EdgeSplit,
    filter: &Scorer<T>,
    rank: &Scorer<T>,
    grid: &TargetSizeGrid,
    options: FilterRankOptions,
) -> Result<SearchOutcome<T>> {
    let pipeline = FilterRank::new(g_train, split, filter, rank, options)?;
    search_prepared(&pipeline, grid)
}

pub fn search_prepared<T: Scalar>(
    pipeline: &FilterRank<'_, T>,
    grid: &TargetSizeGrid,
) -> Result<SearchOutcome<T>> {
    if grid.resolved.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let mut sizes: Vec<usize> = grid
        .resolved
        .iter()
        .map(|&k| k.min(pipeline.starting_set_size()))
        .collect();
    sizes.dedup();
    let outcomes: Vec<FilterRankOutcome<T>> = sizes
        .par_iter()
        .map(|&k| pipeline.evaluate(k))
        .collect::<Result<_>>()?;
    let curve: Vec<CurvePoint> = outcomes
        .iter()
        .map(|o| CurvePoint {
            k: o.k,
            valid: o.valid.value,
            test: o.test.value,
        })
        .collect();
    let best = argmax_first(&curve, |p| p.valid);
    let test_best = argmax_first(&curve, |p| p.test);
    let result = outcomes.into_iter().nth(best).unwrap().test;
    Ok(SearchOutcome {
        best_k: curve[best].k,
        test_best_k: curve[test_best].k,
        curve,
        result,
    })
}

/// On-disk results document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultsFile {
    pub metric: String,
    #[serde(rename = "K")]
    pub hits_k: usize,
    pub value: f64,
    pub best_k: usize,
    pub curves: Vec<CurvePoint>,
    pub seed: Option<u64>,
    pub config: serde_json::Value,
}

impl ResultsFile {
    pub fn write(&self, json_path: impl AsRef<Path>, csv_path: Option<&Path>) -> Result<()> {
        let json_path = json_path.as_ref();
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        std::fs::write(json_path, text).map_err(|e| Error::io(json_path, e))?;
        if let Some(path) = csv_path {
            let mut w = csv::Writer::from_path(path)?;
            w.write_record(["k", "valid", "test"])?;
            for p in &self.curves {
                w.write_record([p.k.to_string(), p.valid.to_string(), p.test.to_string()])?;
            }
            w.flush().map_err(|e| Error::io(path, e))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{generate_sbm, SbmConfig};
    use crate::proposal::{target_size_grid, GridScale};
    use crate::rng::Seed;
    use crate::splits::{sbm_eval_edges, SbmEvalCounts};
    use proptest::prelude::*;

    fn oracle(pos: &[f64], neg: &[f64], k: usize) -> f64 {
        if neg.len() < k {
            return 1.0;
        }
        let mut sorted = neg.to_vec();
        sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
        let t = sorted[k - 1];
        pos.iter().filter(|&&p| p > t).count() as f64 / pos.len() as f64
    }

    #[test]
    fn hand_sorted_example() {
        let v = hits_at_k(&[0.9, 0.5, 0.1], &[0.8, 0.4, 0.2, 0.05], 2).unwrap();
        assert_eq!(v, 2.0 / 3.0);
    }

    #[test]
    fn all_above_and_ties() {
        assert_eq!(hits_at_k(&[5.0, 6.0], &[1.0, 2.0, 3.0], 1).unwrap(), 1.0);
        assert_eq!(hits_at_k(&[2.0, 2.0], &[3.0, 2.0, 1.0], 2).unwrap(), 0.0);
    }

    #[test]
    fn degenerate_inputs() {
        assert_eq!(hits_at_k(&[0.0], &[1.0], 5).unwrap(), 1.0);
        assert!(matches!(hits_at_k::<f64>(&[], &[1.0], 1), Err(Error::EmptyPositives)));
        assert!(hits_at_k(&[1.0], &[1.0], 0).is_err());
    }

    proptest! {
        #[test]
        fn matches_sort_oracle(
            pos in proptest::collection::vec(0u8..20, 1..60),
            neg in proptest::collection::vec(0u8..20, 0..60),
            k in 1usize..70,
        ) {
            let pos: Vec<f64> = pos.into_iter().map(f64::from).collect();
            let neg: Vec<f64> = neg.into_iter().map(f64::from).collect();
            prop_assert_eq!(hits_at_k(&pos, &neg, k).unwrap(), oracle(&pos, &neg, k));
        }

        #[test]
        fn invariant_under_monotone_transform(
            pos in proptest::collection::vec(-5.0f64..5.0, 1..40),
            neg in proptest::collection::vec(-5.0f64..5.0, 0..40),
            k in 1usize..20,
        ) {
            let f = |x: f64| x.exp() * 3.0 + 1.0;
            let tp: Vec<f64> = pos.iter().map(|&x| f(x)).collect();
            let tn: Vec<f64> = neg.iter().map(|&x| f(x)).collect();
            prop_assert_eq!(hits_at_k(&pos, &neg, k).unwrap(), hits_at_k(&tp, &tn, k).unwrap());
        }
    }

    fn fig1(seed: u64) -> (Graph, EdgeSplit) {
        let cfg = SbmConfig {
            block_sizes: vec![50, 50],
            p_in: 0.3,
            p_out: 1.0 / 30.0,
            seed: Seed(seed).derive("graph"),
        };
        let (g, blocks) = generate_sbm(&cfg).unwrap();
        let counts = SbmEvalCounts::eighty_ten_ten(g.num_edges());
        let split = sbm_eval_edges(&g, &blocks, counts, Seed(seed).derive("split")).unwrap();
        (g, split)
    }

    #[test]
    fn empty_proposal_equals_direct_ranking() {
        let (g, split) = fig1(1);
        let cn = Scorer::<f64>::common_neighbors();
        let out = filter_and_rank(&g, &split, &cn, &cn, 0, FilterRankOptions::default()).unwrap();
        let direct = rank_pairs(&g, &cn, &split.test_pos, &split.test_neg, 10, out.test.config.clone()).unwrap();
        assert_eq!(out.test, direct);
        assert_eq!(out.test.rethreshold(10).unwrap(), out.test.value);
    }

    #[test]
    fn single_point_grid_selects_it() {
        let (g, split) = fig1(2);
        let cn = Scorer::<f64>::common_neighbors();
        let grid = TargetSizeGrid::explicit(split.kbar(), &[150], usize::MAX);
        let out = target_size_search(&g, &split, &cn, &cn, &grid, FilterRankOptions::default()).unwrap();
        assert_eq!(out.best_k, 150);
        assert_eq!(out.curve.len(), 1);
    }

    #[test]
    fn empty_grid_rejected() {
        let (g, split) = fig1(2);
        let cn = Scorer::<f64>::common_neighbors();
        let grid = TargetSizeGrid::explicit(0, &[], 0);
        assert!(matches!(
            target_size_search(&g, &split, &cn, &cn, &grid, FilterRankOptions::default()),
            Err(Error::EmptyGrid)
        ));
    }

    #[test]
    fn selection_prefers_smaller_k_on_ties() {
        let curve = [
            CurvePoint { k: 0, valid: 0.5, test: 0.2 },
            CurvePoint { k: 10, valid: 0.7, test: 0.9 },
            CurvePoint { k: 20, valid: 0.7, test: 0.9 },
        ];
        assert_eq!(argmax_first(&curve, |p| p.valid), 1);
    }

    #[test]
    fn search_runs_on_small_grid() {
        let (g, split) = fig1(3);
        let cn = Scorer::<f64>::common_neighbors();
        let aa = Scorer::<f64>::adamic_adar();
        let start = crate::proposal::enumerate_starting_set(&g).unwrap();
        let grid = target_size_grid(split.kbar(), GridScale::Custom { step: 100, radius: 2 }, start.len());
        let out = target_size_search(&g, &split, &cn, &aa, &grid, FilterRankOptions::default()).unwrap();
        assert!(grid.resolved.contains(&out.best_k));
        let best = out.curve.iter().find(|p| p.k == out.best_k).unwrap();
        assert_eq!(best.test, out.result.value);
        assert!(out.curve.iter().all(|p| p.valid <= best.valid));
    }

    #[test]
    fn forcing_valid_edges_changes_only_test_proposal() {
        let (g, split) = fig1(4);
        let cn = Scorer::<f64>::common_neighbors();
        let opts = FilterRankOptions {
            force_valid: true,
            ..Default::default()
        };
        let plain = FilterRank::new(&g, &split, &cn, &cn, FilterRankOptions::default()).unwrap();
        let forced = FilterRank::new(&g, &split, &cn, &cn, opts).unwrap();
        let k = 300;
        assert_eq!(plain.proposal(k), forced.proposal(k));
        let p = forced.test_proposal(k);
        assert_eq!(p.len(), k);
        for e in &split.valid_pos {
            assert!(p.edges().any(|x| x == *e));
        }
        assert_eq!(plain.evaluate_valid(k).unwrap(), forced.evaluate_valid(k).unwrap());
    }
}
