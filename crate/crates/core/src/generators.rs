//! Synthetic graph generators: a stochastic block model and a
//! triangle-closing social growth process.

use std::collections::HashMap;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{canonical, Edge, EdgeList, EdgeRecord, Graph};
use crate::rng::{Rng, Seed};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SbmConfig {
    pub block_sizes: Vec<usize>,
    pub p_in: f64,
    pub p_out: f64,
    pub seed: Seed,
}

impl SbmConfig {
    /// Two blocks with `p = x/3`, `q = (1 - x)/3`.
    pub fn two_block_ratio(block: usize, x: f64, seed: Seed) -> Self {
        Self {
            block_sizes: vec![block, block],
            p_in: x / 3.0,
            p_out: (1.0 - x) / 3.0,
            seed,
        }
    }

    pub fn num_nodes(&self) -> usize {
        self.block_sizes.iter().sum()
    }

    pub fn validate(&self) -> Result<()> {
        let ok = (0.0..=1.0).contains(&self.p_in)
            && (0.0..=1.0).contains(&self.p_out)
            && self.p_out <= self.p_in;
        if !ok {
            return Err(Error::InvalidConfig(format!(
                "SBM needs 0 <= p_out <= p_in <= 1, got p_in={} p_out={}",
                self.p_in, self.p_out
            )));
        }
        Ok(())
    }

    /// Block label per node; blocks are contiguous id ranges.
    pub fn blocks(&self) -> Vec<usize> {
        self.block_sizes
            .iter()
            .enumerate()
            .flat_map(|(b, &size)| std::iter::repeat_n(b, size))
            .collect()
    }
}

/// Samples every pair independently: `p_in` within a block, `p_out` across.
pub fn generate_sbm(cfg: &SbmConfig) -> Result<(Graph, Vec<usize>)> {
    cfg.validate()?;
    let blocks = cfg.blocks();
    let n = blocks.len();
    let mut rng = cfg.seed.rng();
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            let p = if blocks[u] == blocks[v] {
                cfg.p_in
            } else {
                cfg.p_out
            };
            if rng.random::<f64>() < p {
                edges.push((u, v));
            }
        }
    }
    Ok((Graph::from_edges(n, edges)?, blocks))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JinConfig {
    pub num_nodes: usize,
    /// Triangle-closing attempts per iteration.
    pub r1: f64,
    /// Uniform meetings per node per iteration.
    pub r0: f64,
    /// Per-iteration deletion probability for nodes at or above `z_star`.
    pub gamma: f64,
    pub z_star: usize,
    pub iterations: usize,
    pub seed: Seed,
}

impl JinConfig {
    pub fn social(seed: Seed) -> Self {
        Self {
            num_nodes: 2000,
            r1: 2.0,
            r0: 0.0005,
            gamma: 0.005,
            z_star: 5,
            iterations: 30_000,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let rates_ok = [self.r1, self.r0, self.gamma]
            .iter()
            .all(|r| r.is_finite() && *r >= 0.0);
        if !rates_ok || self.gamma > 1.0 || self.z_star < 1 || self.num_nodes < 2 {
            return Err(Error::InvalidConfig(format!(
                "growth model needs nonnegative rates, gamma <= 1, z_star >= 1 and >= 2 nodes: {self:?}"
            )));
        }
        Ok(())
    }
}

/// `floor(lambda)` plus one more with probability `frac(lambda)`.
fn expected_count(rng: &mut Rng, lambda: f64) -> usize {
    let whole = lambda.floor();
    let extra = usize::from(rng.random::<f64>() < lambda - whole);
    whole as usize + extra
}

/// Set of node ids supporting O(1) insert, remove and uniform choice.
struct IndexedSet {
    items: Vec<usize>,
    slot: Vec<Option<usize>>,
}

impl IndexedSet {
    fn new(n: usize) -> Self {
        Self {
            items: Vec::new(),
            slot: vec![None; n],
        }
    }

    fn insert(&mut self, x: usize) {
        if self.slot[x].is_none() {
            self.slot[x] = Some(self.items.len());
            self.items.push(x);
        }
    }

    fn remove(&mut self, x: usize) {
        if let Some(i) = self.slot[x].take() {
            self.items.swap_remove(i);
            if let Some(&moved) = self.items.get(i) {
                self.slot[moved] = Some(i);
            }
        }
    }

    fn choose(&self, rng: &mut Rng) -> Option<usize> {
        (!self.items.is_empty()).then(|| self.items[rng.random_range(0..self.items.len())])
    }
}

struct GrowthState {
    adjacency: Vec<Vec<usize>>,
    // edge -> (iteration, creation sequence)
    born: HashMap<Edge, (usize, u64)>,
    sequence: u64,
    closable: IndexedSet,
}

impl GrowthState {
    fn new(n: usize) -> Self {
        Self {
            adjacency: vec![Vec::new(); n],
            born: HashMap::new(),
            sequence: 0,
            closable: IndexedSet::new(n),
        }
    }

    fn adjacent(&self, u: usize, v: usize) -> bool {
        let (a, b) = if self.adjacency[u].len() <= self.adjacency[v].len() {
            (u, v)
        } else {
            (v, u)
        };
        self.adjacency[a].contains(&b)
    }

    fn refresh(&mut self, x: usize) {
        if self.adjacency[x].len() >= 2 {
            self.closable.insert(x);
        } else {
            self.closable.remove(x);
        }
    }

    fn add(&mut self, u: usize, v: usize, iteration: usize) {
        self.adjacency[u].push(v);
        self.adjacency[v].push(u);
        self.born.insert(canonical(u, v), (iteration, self.sequence));
        self.sequence += 1;
        self.refresh(u);
        self.refresh(v);
    }

    fn remove(&mut self, u: usize, v: usize) {
        for (a, b) in [(u, v), (v, u)] {
            let list = &mut self.adjacency[a];
            let i = list.iter().position(|&x| x == b).expect("edge present");
            list.swap_remove(i);
        }
        self.born.remove(&canonical(u, v));
        self.refresh(u);
        self.refresh(v);
    }
}

/// Runs the growth process and returns surviving edges, each stamped with
/// the iteration of its latest creation, in creation order.
///
/// Every iteration performs, in order:
/// 1. `expected_count(r1)` triangle-closing attempts: a uniform node with
///    degree at least 2 introduces a uniform pair of its neighbors.
/// 2. `expected_count(r0 * n)` uniform meetings between non-adjacent nodes.
/// 3. Each node with degree at least `z_star` drops one uniformly chosen
///    incident edge with probability `gamma`.
pub fn generate_jin(cfg: &JinConfig) -> Result<EdgeList> {
    cfg.validate()?;
    let n = cfg.num_nodes;
    let mut rng = cfg.seed.rng();
    let mut state = GrowthState::new(n);
    let max_pairs = n * (n - 1) / 2;

    for it in 0..cfg.iterations {
        for _ in 0..expected_count(&mut rng, cfg.r1) {
            let Some(w) = state.closable.choose(&mut rng) else {
                break;
            };
            let nb = &state.adjacency[w];
            let i = rng.random_range(0..nb.len());
            let mut j = rng.random_range(0..nb.len() - 1);
            if j >= i {
                j += 1;
            }
            let (a, b) = (nb[i], nb[j]);
            if !state.adjacent(a, b) {
                state.add(a, b, it);
            }
        }

        for _ in 0..expected_count(&mut rng, cfg.r0 * n as f64) {
            if state.born.len() == max_pairs {
                break;
            }
            loop {
                let a = rng.random_range(0..n);
                let b = rng.random_range(0..n);
                if a != b && !state.adjacent(a, b) {
                    state.add(a, b, it);
                    break;
                }
            }
        }

        if cfg.gamma > 0.0 {
            for x in 0..n {
                let degree = state.adjacency[x].len();
                if degree >= cfg.z_star && rng.random::<f64>() < cfg.gamma {
                    let y = state.adjacency[x][rng.random_range(0..degree)];
                    state.remove(x, y);
                }
            }
        }
    }

    let mut survivors: Vec<(u64, usize, Edge)> = state
        .born
        .into_iter()
        .map(|(edge, (it, seq))| (seq, it, edge))
        .collect();
    survivors.sort_unstable();
    Ok(survivors
        .into_iter()
        .map(|(_, it, (u, v))| EdgeRecord::timed(u, v, it as i64))
        .collect())
}
