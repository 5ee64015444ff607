//! Train/validation/test edge splits and negative sampling.

use std::collections::HashSet;
use std::path::Path;

use log::debug;
use rand::seq::{index, SliceRandom};
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::io::{create, read_pairs, write_pairs};
use crate::graph::{canonical, Edge, EdgeRecord, Graph};
use crate::rng::Seed;

/// Graphs up to this size fall back to enumerating the complement when
/// rejection sampling runs out of budget.
pub const ENUMERATION_LIMIT: usize = 2000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SplitKind {
    Temporal,
    Random,
    Sbm,
}

impl SplitKind {
    /// Validation edges join the inference graph only for temporal splits.
    pub fn include_valid_at_inference(self) -> bool {
        matches!(self, SplitKind::Temporal)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeSplit {
    pub num_nodes: usize,
    pub kind: SplitKind,
    pub train_pos: Vec<Edge>,
    pub valid_pos: Vec<Edge>,
    pub test_pos: Vec<Edge>,
    pub valid_neg: Vec<Edge>,
    pub test_neg: Vec<Edge>,
}

impl EdgeSplit {
    /// Checks that the five sets are pairwise disjoint, hold canonical
    /// in-range pairs, and that negative counts match positive counts.
    pub fn validate(&self) -> Result<()> {
        if self.valid_neg.len() != self.valid_pos.len()
            || self.test_neg.len() != self.test_pos.len()
        {
            return Err(Error::InvalidConfig(format!(
                "negative counts ({}, {}) differ from positive counts ({}, {})",
                self.valid_neg.len(),
                self.test_neg.len(),
                self.valid_pos.len(),
                self.test_pos.len()
            )));
        }
        let mut seen: HashSet<Edge> = HashSet::new();
        for (name, set) in self.parts() {
            for &(u, v) in set {
                if u >= v || v >= self.num_nodes {
                    return Err(Error::InvalidConfig(format!(
                        "{name} holds non-canonical or out-of-range pair ({u}, {v})"
                    )));
                }
                if !seen.insert((u, v)) {
                    return Err(Error::InvalidConfig(format!(
                        "pair ({u}, {v}) appears twice across splits (in {name})"
                    )));
                }
            }
        }
        Ok(())
    }

    fn parts(&self) -> [(&'static str, &Vec<Edge>); 5] {
        [
            ("train_pos", &self.train_pos),
            ("valid_pos", &self.valid_pos),
            ("test_pos", &self.test_pos),
            ("valid_neg", &self.valid_neg),
            ("test_neg", &self.test_neg),
        ]
    }

    pub fn train_graph(&self) -> Result<Graph> {
        Graph::from_edges(self.num_nodes, self.train_pos.iter().copied())
    }

    /// Number of positive edges over all three parts.
    pub fn total_positive(&self) -> usize {
        self.train_pos.len() + self.valid_pos.len() + self.test_pos.len()
    }

    /// Positive validation plus test edges.
    pub fn kbar(&self) -> usize {
        self.valid_pos.len() + self.test_pos.len()
    }

    /// Writes the five edge lists plus `split.json`.
    pub fn write_dir(&self, dir: impl AsRef<Path>, manifest: &SplitManifest) -> Result<()> {
        let dir = dir.as_ref();
        for (name, set) in self.parts() {
            write_pairs(dir.join(format!("{name}.tsv")), set)?;
        }
        let path = dir.join("split.json");
        let mut w = create(&path)?;
        serde_json::to_writer_pretty(&mut w, manifest)?;
        use std::io::Write;
        writeln!(w).map_err(|e| Error::io(&path, e))?;
        Ok(())
    }

    pub fn read_dir(dir: impl AsRef<Path>) -> Result<(Self, SplitManifest)> {
        let dir = dir.as_ref();
        let path = dir.join("split.json");
        let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        let manifest: SplitManifest = serde_json::from_str(&text)?;
        let load = |name: &str| -> Result<Vec<Edge>> {
            Ok(read_pairs(dir.join(format!("{name}.tsv")))?
                .into_iter()
                .map(|(u, v)| canonical(u, v))
                .collect())
        };
        let split = EdgeSplit {
            num_nodes: manifest.num_nodes,
            kind: manifest.kind,
            train_pos: load("train_pos")?,
            valid_pos: load("valid_pos")?,
            test_pos: load("test_pos")?,
            valid_neg: load("valid_neg")?,
            test_neg: load("test_neg")?,
        };
        split.validate()?;
        Ok((split, manifest))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitManifest {
    pub kind: SplitKind,
    pub num_nodes: usize,
    pub fractions: [f64; 3],
    pub seed: u64,
}

fn check_fractions(fractions: [f64; 3]) -> Result<()> {
    let sum: f64 = fractions.iter().sum();
    if fractions.iter().any(|f| !(0.0..=1.0).contains(f)) || (sum - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidFractions(fractions));
    }
    Ok(())
}

/// `(train, valid, test)` sizes: evaluation parts are floored, train takes
/// the remainder.
pub fn split_sizes(m: usize, fractions: [f64; 3]) -> (usize, usize, usize) {
    let part = |f: f64| ((f * m as f64) + 1e-9).floor() as usize;
    let valid = part(fractions[1]);
    let test = part(fractions[2]);
    (m - valid - test, valid, test)
}

/// Canonical, loop-free edges in first-occurrence order.
fn dedup_edges(edges: &[EdgeRecord]) -> Vec<(Edge, Option<i64>)> {
    let mut seen = HashSet::with_capacity(edges.len());
    edges
        .iter()
        .filter(|e| e.u != e.v)
        .filter(|e| seen.insert(e.edge()))
        .map(|e| (e.edge(), e.timestamp))
        .collect()
}

fn assemble(
    num_nodes: usize,
    kind: SplitKind,
    ordered: Vec<Edge>,
    fractions: [f64; 3],
    seed: Seed,
) -> Result<EdgeSplit> {
    let (train, valid, _) = split_sizes(ordered.len(), fractions);
    let full = Graph::from_edges(num_nodes, ordered.iter().copied())?;
    let negatives = sample_negatives(
        &full,
        &[],
        ordered.len() - train,
        seed.derive("negatives"),
    )?;
    let mut parts = ordered.into_iter();
    let train_pos: Vec<Edge> = parts.by_ref().take(train).collect();
    let valid_pos: Vec<Edge> = parts.by_ref().take(valid).collect();
    let test_pos: Vec<Edge> = parts.collect();
    let split = EdgeSplit {
        num_nodes,
        kind,
        valid_neg: negatives[..valid].to_vec(),
        test_neg: negatives[valid..].to_vec(),
        train_pos,
        valid_pos,
        test_pos,
    };
    split.validate()?;
    Ok(split)
}

/// Splits by timestamp: the earliest edges train, the latest test. Equal
/// timestamps keep input order. A pair listed several times keeps its
/// first row only.
pub fn temporal_split(
    num_nodes: usize,
    edges: &[EdgeRecord],
    fractions: [f64; 3],
    seed: Seed,
) -> Result<EdgeSplit> {
    check_fractions(fractions)?;
    if let Some(row) = edges.iter().position(|e| e.timestamp.is_none()) {
        return Err(Error::MissingTimestamp { row });
    }
    let mut rows = dedup_edges(edges);
    rows.sort_by_key(|&(_, t)| t);
    let ordered = rows.into_iter().map(|(e, _)| e).collect();
    assemble(num_nodes, SplitKind::Temporal, ordered, fractions, seed)
}

pub fn random_split(
    num_nodes: usize,
    edges: &[EdgeRecord],
    fractions: [f64; 3],
    seed: Seed,
) -> Result<EdgeSplit> {
    check_fractions(fractions)?;
    let mut ordered: Vec<Edge> = dedup_edges(edges).into_iter().map(|(e, _)| e).collect();
    ordered.shuffle(&mut seed.derive("shuffle").rng());
    assemble(num_nodes, SplitKind::Random, ordered, fractions, seed)
}

/// Evaluation counts for SBM splits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SbmEvalCounts {
    pub valid: usize,
    pub test: usize,
}

impl SbmEvalCounts {
    /// Sizes validation and test so that the sampled graph is 80% of all
    /// positives: each evaluation part gets `floor(m / 8)`.
    pub fn eighty_ten_ten(num_edges: usize) -> Self {
        let each = num_edges / 8;
        Self {
            valid: each,
            test: each,
        }
    }
}

/// Uniform sample without replacement, in draw order.
fn draw(pool: &[Edge], count: usize, rng: &mut crate::rng::Rng) -> Vec<Edge> {
    index::sample(rng, pool.len(), count)
        .into_iter()
        .map(|i| pool[i])
        .collect()
}

/// Evaluation edges for a block-model graph: positives are absent
/// within-block pairs, negatives absent between-block pairs.
pub fn sbm_eval_edges(
    g: &Graph,
    blocks: &[usize],
    counts: SbmEvalCounts,
    seed: Seed,
) -> Result<EdgeSplit> {
    let n = g.num_nodes();
    if blocks.len() != n {
        return Err(Error::InvalidConfig(format!(
            "{} block labels for {n} nodes",
            blocks.len()
        )));
    }
    let mut within = Vec::new();
    let mut between = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if g.has_edge(u, v) {
                continue;
            }
            if blocks[u] == blocks[v] {
                within.push((u, v));
            } else {
                between.push((u, v));
            }
        }
    }
    let needed = counts.valid + counts.test;
    for pool in [&within, &between] {
        if pool.len() < needed {
            return Err(Error::InfeasibleSample {
                requested: needed,
                available: pool.len(),
            });
        }
    }
    let pos = draw(&within, needed, &mut seed.derive("sbm-positives").rng());
    let neg = draw(&between, needed, &mut seed.derive("sbm-negatives").rng());
    let split = EdgeSplit {
        num_nodes: n,
        kind: SplitKind::Sbm,
        train_pos: g.edges().collect(),
        valid_pos: pos[..counts.valid].to_vec(),
        test_pos: pos[counts.valid..].to_vec(),
        valid_neg: neg[..counts.valid].to_vec(),
        test_neg: neg[counts.valid..].to_vec(),
    };
    split.validate()?;
    Ok(split)
}

/// Uniform sample without replacement of node pairs that are neither edges
/// of `g` nor members of any `forbidden` set. Returned in draw order, so
/// any prefix is itself a uniform sample.
pub fn sample_negatives(
    g: &Graph,
    forbidden: &[&[Edge]],
    count: usize,
    seed: Seed,
) -> Result<Vec<Edge>> {
    if count == 0 {
        return Ok(Vec::new());
    }
    let n = g.num_nodes();
    let mut blocked: HashSet<Edge> = forbidden
        .iter()
        .flat_map(|set| set.iter().map(|&(u, v)| canonical(u, v)))
        .filter(|&(u, v)| u != v && !g.has_edge(u, v))
        .collect();
    let universe = n * n.saturating_sub(1) / 2;
    let available = universe - g.num_edges() - blocked.len();
    if count > available {
        return Err(Error::InfeasibleSample {
            requested: count,
            available,
        });
    }

    let mut rng = seed.rng();
    let dense = available < 4 * count;
    if !(dense && n <= ENUMERATION_LIMIT) {
        let budget = 100 * count;
        let mut out = Vec::with_capacity(count);
        for _ in 0..budget {
            let u = rng.random_range(0..n);
            let v = rng.random_range(0..n);
            if u == v || g.has_edge(u, v) {
                continue;
            }
            let e = canonical(u, v);
            if blocked.insert(e) {
                out.push(e);
                if out.len() == count {
                    return Ok(out);
                }
            }
        }
        if n > ENUMERATION_LIMIT {
            return Err(Error::InfeasibleSample {
                requested: count,
                available,
            });
        }
        debug!("rejection sampling exhausted its budget; enumerating complement");
        for e in out {
            blocked.remove(&e);
        }
    }

    let mut pool = Vec::with_capacity(available);
    for u in 0..n {
        for v in u + 1..n {
            if !g.has_edge(u, v) && !blocked.contains(&(u, v)) {
                pool.push((u, v));
            }
        }
    }
    Ok(draw(&pool, count, &mut rng))
}

/// The graph ranking runs on at test time: `g` plus the positive
/// validation edges when `include_valid` is set.
pub fn inference_graph(g: &Graph, split: &EdgeSplit, include_valid: bool) -> Result<Graph> {
    if !include_valid || split.valid_pos.is_empty() {
        return Ok(g.clone());
    }
    g.with_edges(split.valid_pos.iter().copied())
}
