//! Proposal sets: candidate edges added to a graph before ranking.
//!
//! The starting set is every non-edge with at least one common neighbor. A
//! filtering scorer keeps its `k` highest-scoring members. Entries are
//! ordered by score descending, then by `(u, v)` ascending, so the top-`k`
//! sets for increasing `k` are prefixes of each other.

use std::cmp::Ordering;
use std::collections::HashSet;
use std::io::Write;
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering as AtomicOrdering};

use log::warn;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::io::{create, read_fields};
use crate::graph::{canonical, Edge, Graph};
use crate::heuristics::Scorer;
use crate::scalar::{score_cmp, Scalar};

pub const DEFAULT_STARTING_SET_CAP: usize = 50_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProposalEntry<T> {
    pub u: usize,
    pub v: usize,
    pub score: T,
}

impl<T: Scalar> ProposalEntry<T> {
    pub fn edge(&self) -> Edge {
        (self.u, self.v)
    }
}

/// Proposal order: higher score first, then lexicographic `(u, v)`.
pub fn entry_order<T: Scalar>(a: &ProposalEntry<T>, b: &ProposalEntry<T>) -> Ordering {
    score_cmp(b.score, a.score).then_with(|| (a.u, a.v).cmp(&(b.u, b.v)))
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Provenance {
    pub source: String,
    pub forced_edges: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProposalSet<T> {
    entries: Vec<ProposalEntry<T>>,
    provenance: Provenance,
    target_size_hint: Option<usize>,
}

impl<T: Scalar> ProposalSet<T> {
    pub fn empty(source: &str) -> Self {
        Self::from_sorted_unchecked(Vec::new(), source)
    }

    pub(crate) fn from_sorted_unchecked(entries: Vec<ProposalEntry<T>>, source: &str) -> Self {
        Self {
            entries,
            provenance: Provenance {
                source: source.to_string(),
                forced_edges: 0,
            },
            target_size_hint: None,
        }
    }

    /// Builds a proposal set from arbitrary scored pairs against training
    /// graph `g`: pairs are canonicalized and sorted, while self-loops,
    /// training edges and repeated pairs are dropped with a warning.
    pub fn from_scored(g: &Graph, pairs: Vec<ProposalEntry<T>>, source: &str) -> Result<Self> {
        let n = g.num_nodes();
        let mut seen = HashSet::new();
        let mut entries = Vec::with_capacity(pairs.len());
        let mut dropped = 0usize;
        for (row, e) in pairs.into_iter().enumerate() {
            if e.u >= n || e.v >= n {
                return Err(Error::EndpointOutOfRange {
                    row,
                    node: e.u.max(e.v),
                    num_nodes: n,
                });
            }
            let (u, v) = canonical(e.u, e.v);
            if u == v || g.has_edge(u, v) || !seen.insert((u, v)) {
                dropped += 1;
                continue;
            }
            entries.push(ProposalEntry { u, v, score: e.score });
        }
        if dropped > 0 {
            warn!("dropped {dropped} proposal rows (self-loops, training edges or repeats)");
        }
        entries.sort_by(entry_order);
        Ok(Self::from_sorted_unchecked(entries, source))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[ProposalEntry<T>] {
        &self.entries
    }

    pub fn edges(&self) -> impl Iterator<Item = Edge> + '_ {
        self.entries.iter().map(|e| e.edge())
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn target_size_hint(&self) -> Option<usize> {
        self.target_size_hint
    }

    pub fn with_target_size_hint(mut self, hint: Option<usize>) -> Self {
        self.target_size_hint = hint;
        self
    }

    /// The first `k` entries (all of them if `k` exceeds the length).
    pub fn prefix(&self, k: usize) -> Self {
        Self {
            entries: self.entries[..k.min(self.len())].to_vec(),
            provenance: self.provenance.clone(),
            target_size_hint: self.target_size_hint,
        }
    }

    /// Verifies ordering, uniqueness and disjointness from `g`'s edges.
    pub fn validate(&self, g: &Graph) -> Result<()> {
        let mut seen = HashSet::with_capacity(self.len());
        for e in &self.entries {
            if e.u >= e.v || e.v >= g.num_nodes() {
                return Err(Error::InvalidConfig(format!(
                    "proposal entry ({}, {}) is not a canonical in-range pair",
                    e.u, e.v
                )));
            }
            if g.has_edge(e.u, e.v) {
                return Err(Error::InvalidConfig(format!(
                    "proposal entry ({}, {}) is a training edge",
                    e.u, e.v
                )));
            }
            if !seen.insert(e.edge()) {
                return Err(Error::InvalidConfig(format!(
                    "proposal entry ({}, {}) repeated",
                    e.u, e.v
                )));
            }
        }
        if self
            .entries
            .windows(2)
            .any(|w| entry_order(&w[0], &w[1]) != Ordering::Less)
        {
            return Err(Error::InvalidConfig("proposal entries out of order".into()));
        }
        Ok(())
    }

    /// Writes `u<TAB>v<TAB>score` rows in proposal order.
    pub fn write_tsv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut w = create(path)?;
        for e in &self.entries {
            writeln!(w, "{}\t{}\t{}", e.u, e.v, e.score).map_err(|err| Error::io(path, err))?;
        }
        w.flush().map_err(|err| Error::io(path, err))
    }

    /// Reads a proposal TSV, e.g. one supplied by a domain expert. A missing
    /// score column ranks rows in file order.
    pub fn read_tsv(g: &Graph, path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let rows = read_fields(path)?;
        let total = rows.len();
        let mut pairs = Vec::with_capacity(total);
        for (i, (line, fields)) in rows.into_iter().enumerate() {
            let bad = |msg: String| Error::Parse {
                path: path.to_path_buf(),
                line,
                msg,
            };
            if fields.len() < 2 || fields.len() > 3 {
                return Err(bad(format!("expected 2 or 3 fields, got {}", fields.len())));
            }
            let u = fields[0].parse().map_err(|_| bad(format!("bad node id {:?}", fields[0])))?;
            let v = fields[1].parse().map_err(|_| bad(format!("bad node id {:?}", fields[1])))?;
            let score = match fields.get(2) {
                Some(s) => s
                    .parse::<f64>()
                    .map(T::from_f64_lossy)
                    .map_err(|_| bad(format!("bad score {s:?}")))?,
                None => T::from_count(total - i),
            };
            pairs.push(ProposalEntry { u, v, score });
        }
        Self::from_scored(g, pairs, &format!("file:{}", path.display()))
    }
}

/// Sidecar describing how a proposal file was produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProposalMeta {
    pub scorer: String,
    pub k: usize,
    pub kbar: Option<usize>,
    pub seed: Option<u64>,
    pub forced_edges: usize,
}

/// All pairs `u < v` that share a neighbor and are not already edges, in
/// lexicographic order.
pub fn enumerate_starting_set(g: &Graph) -> Result<Vec<Edge>> {
    enumerate_starting_set_capped(g, DEFAULT_STARTING_SET_CAP)
}

pub fn enumerate_starting_set_capped(g: &Graph, cap: usize) -> Result<Vec<Edge>> {
    let total = AtomicUsize::new(0);
    let per_source: Vec<Vec<Edge>> = (0..g.num_nodes())
        .into_par_iter()
        .map(|u| {
            if total.load(AtomicOrdering::Relaxed) > cap {
                return Err(Error::StartingSetTooLarge { cap });
            }
            let mut targets: Vec<usize> = g
                .neighbors(u)
                .iter()
                .flat_map(|&w| g.neighbors(w).iter().copied())
                .filter(|&v| v > u)
                .collect();
            targets.sort_unstable();
            targets.dedup();
            let pairs: Vec<Edge> = targets
                .into_iter()
                .filter(|&v| !g.has_edge(u, v))
                .map(|v| (u, v))
                .collect();
            if total.fetch_add(pairs.len(), AtomicOrdering::Relaxed) + pairs.len() > cap {
                return Err(Error::StartingSetTooLarge { cap });
            }
            Ok(pairs)
        })
        .collect::<Result<_>>()?;
    Ok(per_source.concat())
}

/// Scores the whole starting set and sorts it into proposal order.
pub fn rank_candidates<T: Scalar>(
    g: &Graph,
    start: &[Edge],
    scorer: &Scorer<T>,
) -> Result<ProposalSet<T>> {
    let scores = scorer.batch_score(g, start)?;
    let mut entries: Vec<ProposalEntry<T>> = start
        .iter()
        .zip(scores)
        .map(|(&(u, v), score)| ProposalEntry { u, v, score })
        .collect();
    entries.par_sort_unstable_by(entry_order);
    let set = ProposalSet::from_sorted_unchecked(entries, scorer.kind().name());
    debug_assert!(set.validate(g).is_ok());
    Ok(set)
}

/// The `k` highest-scoring starting-set pairs under `scorer`. `k` larger
/// than the starting set is clamped with a warning.
pub fn filter_top_k<T: Scalar>(
    g: &Graph,
    start: &[Edge],
    scorer: &Scorer<T>,
    k: usize,
) -> Result<ProposalSet<T>> {
    let k = if k > start.len() {
        warn!("target size {k} exceeds starting set of {}; clamping", start.len());
        start.len()
    } else {
        k
    };
    let scores = scorer.batch_score(g, start)?;
    let mut entries: Vec<ProposalEntry<T>> = start
        .iter()
        .zip(scores)
        .map(|(&(u, v), score)| ProposalEntry { u, v, score })
        .collect();
    if k == 0 {
        entries.clear();
    } else if k < entries.len() {
        entries.select_nth_unstable_by(k - 1, entry_order);
        entries.truncate(k);
    }
    entries.sort_unstable_by(entry_order);
    let set = ProposalSet::from_sorted_unchecked(entries, scorer.kind().name());
    check_disjoint(&set, g)?;
    Ok(set)
}

fn check_disjoint<T: Scalar>(set: &ProposalSet<T>, g: &Graph) -> Result<()> {
    if let Some(e) = set.entries.iter().find(|e| g.has_edge(e.u, e.v)) {
        return Err(Error::InvalidConfig(format!(
            "proposal entry ({}, {}) is a training edge",
            e.u, e.v
        )));
    }
    Ok(())
}

/// Places every `must` edge ahead of all candidates of `p`, then fills the
/// remaining slots up to `k` from `p` in order.
///
/// Forced edges count against `k`. When there are more than `k` of them,
/// those with the highest original score are kept. Forced scores are
/// shifted to lie strictly above the largest candidate score while keeping
/// their relative order.
pub fn force_include<T: Scalar>(
    p: &ProposalSet<T>,
    must: &[ProposalEntry<T>],
    k: usize,
) -> ProposalSet<T> {
    let mut forced: Vec<ProposalEntry<T>> = Vec::with_capacity(must.len());
    let mut forced_set = HashSet::with_capacity(must.len());
    for e in must {
        let (u, v) = canonical(e.u, e.v);
        if u != v && forced_set.insert((u, v)) {
            forced.push(ProposalEntry { u, v, score: e.score });
        }
    }
    forced.sort_by(entry_order);
    if forced.len() > k {
        warn!(
            "{} forced edges exceed target size {k}; keeping the top {k}",
            forced.len()
        );
        forced.truncate(k);
        forced_set = forced.iter().map(|e| e.edge()).collect();
    }

    let top = p
        .entries
        .iter()
        .map(|e| e.score)
        .fold(None, |acc: Option<T>, s| Some(acc.map_or(s, |a| num_traits::Float::max(a, s))))
        .unwrap_or_else(T::zero);
    let floor = forced
        .iter()
        .map(|e| e.score)
        .fold(None, |acc: Option<T>, s| Some(acc.map_or(s, |a| num_traits::Float::min(a, s))))
        .unwrap_or_else(T::zero);
    let mut entries: Vec<ProposalEntry<T>> = forced
        .iter()
        .map(|e| ProposalEntry {
            u: e.u,
            v: e.v,
            score: top + T::one() + (e.score - floor),
        })
        .collect();
    let remaining = k - entries.len();
    entries.extend(
        p.entries
            .iter()
            .filter(|e| !forced_set.contains(&e.edge()))
            .take(remaining)
            .copied(),
    );
    ProposalSet {
        entries,
        provenance: Provenance {
            source: p.provenance.source.clone(),
            forced_edges: forced.len(),
        },
        target_size_hint: p.target_size_hint,
    }
}

/// Search range for the target size.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GridScale {
    /// `kbar + {-20000, -10000, ..., 20000}`
    Large,
    /// `kbar + {-3000, -2000, ..., 3000}`
    Small,
    /// `kbar + step * {-radius, ..., radius}`
    Custom { step: usize, radius: usize },
}

impl GridScale {
    fn step_radius(self) -> (usize, usize) {
        match self {
            GridScale::Large => (10_000, 2),
            GridScale::Small => (1_000, 3),
            GridScale::Custom { step, radius } => (step, radius),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TargetSizeGrid {
    pub kbar: usize,
    pub offsets: Vec<i64>,
    /// Clamped to `[0, start_size]`, sorted, deduplicated.
    pub resolved: Vec<usize>,
}

impl TargetSizeGrid {
    /// A grid over an explicit list of sizes.
    pub fn explicit(kbar: usize, sizes: &[usize], start_size: usize) -> Self {
        let offsets = sizes.iter().map(|&s| s as i64 - kbar as i64).collect();
        let mut resolved: Vec<usize> = sizes.iter().map(|&s| s.min(start_size)).collect();
        resolved.sort_unstable();
        resolved.dedup();
        Self {
            kbar,
            offsets,
            resolved,
        }
    }

    /// Distance between consecutive grid points, if uniform.
    pub fn step(&self) -> Option<usize> {
        let steps: HashSet<usize> = self.resolved.windows(2).map(|w| w[1] - w[0]).collect();
        (steps.len() == 1).then(|| *steps.iter().next().unwrap())
    }
}

pub fn target_size_grid(kbar: usize, scale: GridScale, start_size: usize) -> TargetSizeGrid {
    let (step, radius) = scale.step_radius();
    let (step, radius) = (step as i64, radius as i64);
    let offsets: Vec<i64> = (-radius..=radius).map(|i| i * step).collect();
    let mut resolved: Vec<usize> = offsets
        .iter()
        .map(|&o| (kbar as i64 + o).clamp(0, start_size as i64) as usize)
        .collect();
    resolved.sort_unstable();
    resolved.dedup();
    TargetSizeGrid {
        kbar,
        offsets,
        resolved,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{generate_sbm, SbmConfig};
    use crate::rng::Seed;
    use proptest::prelude::*;

    fn sbm(seed: u64) -> Graph {
        let cfg = SbmConfig {
            block_sizes: vec![50, 50],
            p_in: 0.3,
            p_out: 1.0 / 30.0,
            seed: Seed(seed),
        };
        generate_sbm(&cfg).unwrap().0
    }

    fn naive_starting_set(g: &Graph) -> Vec<Edge> {
        let n = g.num_nodes();
        let mut out = Vec::new();
        for u in 0..n {
            for v in u + 1..n {
                let shared = (0..n).any(|w| g.has_edge(u, w) && g.has_edge(v, w));
                if shared && !g.has_edge(u, v) {
                    out.push((u, v));
                }
            }
        }
        out
    }

    #[test]
    fn starting_set_examples() {
        let path = Graph::from_edges(3, [(0, 1), (1, 2)]).unwrap();
        assert_eq!(enumerate_starting_set(&path).unwrap(), vec![(0, 2)]);
        let tri = Graph::from_edges(3, [(0, 1), (1, 2), (0, 2)]).unwrap();
        assert!(enumerate_starting_set(&tri).unwrap().is_empty());
    }

    #[test]
    fn starting_set_matches_brute_force_on_sbm() {
        for seed in 0..3 {
            let g = sbm(seed);
            assert_eq!(enumerate_starting_set(&g).unwrap(), naive_starting_set(&g));
        }
    }

    #[test]
    fn starting_set_cap_is_enforced() {
        let g = sbm(1);
        assert!(matches!(
            enumerate_starting_set_capped(&g, 10),
            Err(Error::StartingSetTooLarge { cap: 10 })
        ));
    }

    #[test]
    fn filter_edge_sizes() {
        let g = sbm(2);
        let start = enumerate_starting_set(&g).unwrap();
        let sc = Scorer::<f64>::common_neighbors();
        assert!(filter_top_k(&g, &start, &sc, 0).unwrap().is_empty());
        let all = filter_top_k(&g, &start, &sc, start.len()).unwrap();
        assert_eq!(all.len(), start.len());
        all.validate(&g).unwrap();
        let over = filter_top_k(&g, &start, &sc, start.len() + 10).unwrap();
        assert_eq!(over, all);
    }

    #[test]
    fn filter_matches_full_sort_oracle() {
        let g = sbm(3);
        let start = enumerate_starting_set(&g).unwrap();
        let sc = Scorer::<f64>::common_neighbors();
        let mut oracle: Vec<(f64, Edge)> = start
            .iter()
            .map(|&(u, v)| (g.common_neighbors(u, v) as f64, (u, v)))
            .collect();
        oracle.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then(a.1.cmp(&b.1)));
        let top = filter_top_k(&g, &start, &sc, 200).unwrap();
        let got: Vec<(f64, Edge)> = top.entries().iter().map(|e| (e.score, e.edge())).collect();
        assert_eq!(got, oracle[..200].to_vec());
        assert_eq!(rank_candidates(&g, &start, &sc).unwrap().prefix(200), top);
    }

    #[test]
    fn proposals_may_contain_held_out_pairs() {
        // (0, 2) is missing from the graph but shares neighbor 1.
        let g = Graph::from_edges(4, [(0, 1), (1, 2), (2, 3)]).unwrap();
        let start = enumerate_starting_set(&g).unwrap();
        let p = filter_top_k(&g, &start, &Scorer::<f64>::common_neighbors(), 2).unwrap();
        assert!(p.edges().any(|e| e == (0, 2)));
    }

    fn candidates(n: usize) -> ProposalSet<f64> {
        let entries = (0..n)
            .map(|i| ProposalEntry {
                u: i,
                v: 100 + i,
                score: (n - i) as f64,
            })
            .collect();
        ProposalSet::from_sorted_unchecked(entries, "test")
    }

    fn must(n: usize) -> Vec<ProposalEntry<f64>> {
        (0..n)
            .map(|i| ProposalEntry {
                u: 50 + i,
                v: 200 + i,
                score: i as f64 * 0.5,
            })
            .collect()
    }

    #[test]
    fn force_include_without_must_is_identity() {
        let p = candidates(10);
        assert_eq!(force_include(&p, &[], 6).entries(), p.prefix(6).entries());
    }

    #[test]
    fn force_include_exactly_must() {
        let p = candidates(10);
        let m = must(4);
        let out = force_include(&p, &m, 4);
        let mut got: Vec<Edge> = out.edges().collect();
        got.sort();
        let mut want: Vec<Edge> = m.iter().map(|e| e.edge()).collect();
        want.sort();
        assert_eq!(got, want);
    }

    #[test]
    fn force_include_five_plus_three() {
        let p = candidates(10);
        let m = must(5);
        let out = force_include(&p, &m, 8);
        assert_eq!(out.len(), 8);
        assert_eq!(out.provenance().forced_edges, 5);
        let top = p.entries()[0].score;
        for e in &out.entries()[..5] {
            assert!(e.score > top);
            assert!(e.u >= 50 && e.u < 55);
        }
        let rest: Vec<Edge> = out.entries()[5..].iter().map(|e| e.edge()).collect();
        assert_eq!(rest, vec![(0, 100), (1, 101), (2, 102)]);
        assert!(out.entries().windows(2).all(|w| entry_order(&w[0], &w[1]) == Ordering::Less));
    }

    #[test]
    fn force_include_truncates_must_by_score() {
        let p = candidates(3);
        let out = force_include(&p, &must(5), 2);
        let kept: Vec<Edge> = out.edges().collect();
        assert_eq!(kept, vec![(54, 204), (53, 203)]);
    }

    #[test]
    fn force_include_size_rule() {
        let p = candidates(2);
        assert_eq!(force_include(&p, &must(3), 10).len(), 5);
    }

    #[test]
    fn grid_examples() {
        let large = target_size_grid(50_000, GridScale::Large, 1_000_000);
        assert_eq!(large.resolved, vec![30_000, 40_000, 50_000, 60_000, 70_000]);
        assert_eq!(large.offsets.len(), 5);
        let small = target_size_grid(2_000, GridScale::Small, 1_000_000);
        assert_eq!(small.offsets.len(), 7);
        assert_eq!(small.resolved, vec![0, 1000, 2000, 3000, 4000, 5000]);
        let zero = target_size_grid(0, GridScale::Small, 1_000_000);
        assert_eq!(zero.resolved, vec![0, 1000, 2000, 3000]);
        let capped = target_size_grid(2_000, GridScale::Small, 2_500);
        assert_eq!(capped.resolved, vec![0, 1000, 2000, 2500]);
    }

    #[test]
    fn proposal_tsv_roundtrip() {
        let g = sbm(4);
        let start = enumerate_starting_set(&g).unwrap();
        let p = filter_top_k(&g, &start, &Scorer::<f64>::adamic_adar(), 50).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.tsv");
        p.write_tsv(&path).unwrap();
        let back = ProposalSet::<f64>::read_tsv(&g, &path).unwrap();
        assert_eq!(back.entries(), p.entries());
    }

    #[test]
    fn ingested_proposals_drop_training_edges() {
        let g = Graph::from_edges(4, [(0, 1), (1, 2)]).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.tsv");
        std::fs::write(&path, "0\t1\n2\t0\n3\t3\n3\t1\n").unwrap();
        let p = ProposalSet::<f64>::read_tsv(&g, &path).unwrap();
        assert_eq!(p.edges().collect::<Vec<_>>(), vec![(0, 2), (1, 3)]);
    }

    proptest! {
        #[test]
        fn top_k_is_prefix_monotone(seed in 0u64..50, k1 in 0usize..300, extra in 0usize..300) {
            let g = sbm(seed);
            let start = enumerate_starting_set(&g).unwrap();
            let sc = Scorer::<f64>::common_neighbors();
            let small = filter_top_k(&g, &start, &sc, k1).unwrap();
            let large = filter_top_k(&g, &start, &sc, k1 + extra).unwrap();
            prop_assert_eq!(small.entries(), &large.entries()[..small.len()]);
            for e in large.entries() {
                prop_assert!(!g.has_edge(e.u, e.v));
            }
        }
    }
}
