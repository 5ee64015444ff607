//! Neighborhood scorers used both to filter the starting set and to rank
//! evaluation pairs.

use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::io::create;
use crate::graph::{Edge, Graph};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScorerKind {
    CommonNeighbors,
    AdamicAdar,
    CosCommon,
}

impl ScorerKind {
    pub fn name(self) -> &'static str {
        match self {
            ScorerKind::CommonNeighbors => "common-neighbors",
            ScorerKind::AdamicAdar => "adamic-adar",
            ScorerKind::CosCommon => "cos-common",
        }
    }
}

impl fmt::Display for ScorerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ScorerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "common" | "common-neighbors" | "cn" => Ok(ScorerKind::CommonNeighbors),
            "adamic-adar" | "aa" => Ok(ScorerKind::AdamicAdar),
            "cos-common" => Ok(ScorerKind::CosCommon),
            other => Err(Error::InvalidConfig(format!("unknown scorer {other:?}"))),
        }
    }
}

/// Dense per-node feature vectors, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix<T> {
    num_nodes: usize,
    dim: usize,
    data: Vec<T>,
}

impl<T: Scalar> FeatureMatrix<T> {
    pub fn new(num_nodes: usize, dim: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != num_nodes * dim {
            return Err(Error::InvalidConfig(format!(
                "feature buffer has {} values, expected {num_nodes}x{dim}",
                data.len()
            )));
        }
        if let Some(i) = data.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFiniteFeature { node: i / dim.max(1) });
        }
        Ok(Self {
            num_nodes,
            dim,
            data,
        })
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, node: usize) -> &[T] {
        &self.data[node * self.dim..(node + 1) * self.dim]
    }

    /// Reads `id,f1,f2,...` rows. A first row whose id column is not an
    /// integer is treated as a header. Every id in `0..=max_id` must appear once.
    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(false)
            .from_path(path)?;
        let mut rows: Vec<(usize, Vec<T>)> = Vec::new();
        for (i, record) in reader.records().enumerate() {
            let record = record?;
            let line = i + 1;
            let Some(first) = record.get(0) else { continue };
            let id = match first.trim().parse::<usize>() {
                Ok(id) => id,
                Err(_) if i == 0 => continue,
                Err(_) => {
                    return Err(Error::Parse {
                        path: path.to_path_buf(),
                        line,
                        msg: format!("bad node id {first:?}"),
                    })
                }
            };
            let values = record
                .iter()
                .skip(1)
                .map(|s| {
                    s.trim().parse::<f64>().map(T::from_f64_lossy).map_err(|_| Error::Parse {
                        path: path.to_path_buf(),
                        line,
                        msg: format!("bad feature value {s:?}"),
                    })
                })
                .collect::<Result<Vec<T>>>()?;
            rows.push((id, values));
        }
        let num_nodes = rows.iter().map(|r| r.0 + 1).max().unwrap_or(0);
        let dim = rows.first().map_or(0, |r| r.1.len());
        let mut data = vec![T::zero(); num_nodes * dim];
        let mut seen = vec![false; num_nodes];
        for (id, values) in rows {
            if seen[id] {
                return Err(Error::InvalidConfig(format!("node {id} listed twice")));
            }
            seen[id] = true;
            data[id * dim..(id + 1) * dim].copy_from_slice(&values);
        }
        if let Some(missing) = seen.iter().position(|s| !s) {
            return Err(Error::InvalidConfig(format!("no feature row for node {missing}")));
        }
        Self::new(num_nodes, dim, data)
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut w = create(path)?;
        for node in 0..self.num_nodes {
            let mut line = node.to_string();
            for x in self.row(node) {
                line.push(',');
                line.push_str(&x.to_string());
            }
            writeln!(w, "{line}").map_err(|e| Error::io(path, e))?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }
}

/// A scoring function over node pairs.
///
/// Pairs with `u == v` score zero: they are never candidate edges.
#[derive(Debug, Clone)]
pub struct Scorer<T> {
    kind: ScorerKind,
    features: Option<Arc<FeatureMatrix<T>>>,
    // 1/||h_z||, or 0 for zero rows so their cosine terms vanish.
    inv_norms: Option<Arc<Vec<T>>>,
}

impl<T: Scalar> Scorer<T> {
    pub fn new(kind: ScorerKind, features: Option<Arc<FeatureMatrix<T>>>) -> Result<Self> {
        match kind {
            ScorerKind::CosCommon => {
                let features = features.ok_or(Error::MissingFeatures)?;
                let inv_norms = (0..features.num_nodes())
                    .map(|z| {
                        let norm = features
                            .row(z)
                            .iter()
                            .fold(T::zero(), |acc, &x| acc + x * x);
                        let norm = num_traits::Float::sqrt(norm);
                        if norm > T::zero() {
                            T::one() / norm
                        } else {
                            T::zero()
                        }
                    })
                    .collect();
                Ok(Self {
                    kind,
                    features: Some(features),
                    inv_norms: Some(Arc::new(inv_norms)),
                })
            }
            _ => Ok(Self {
                kind,
                features: None,
                inv_norms: None,
            }),
        }
    }

    pub fn common_neighbors() -> Self {
        Self::new(ScorerKind::CommonNeighbors, None).unwrap()
    }

    pub fn adamic_adar() -> Self {
        Self::new(ScorerKind::AdamicAdar, None).unwrap()
    }

    pub fn cos_common(features: Arc<FeatureMatrix<T>>) -> Self {
        Self::new(ScorerKind::CosCommon, Some(features)).unwrap()
    }

    pub fn kind(&self) -> ScorerKind {
        self.kind
    }

    pub fn features(&self) -> Option<&FeatureMatrix<T>> {
        self.features.as_deref()
    }

    /// Checks that this scorer can evaluate pairs on `g`.
    pub fn check(&self, g: &Graph) -> Result<()> {
        if let Some(f) = &self.features {
            if f.num_nodes() < g.num_nodes() {
                return Err(Error::FeatureShape {
                    rows: f.num_nodes(),
                    num_nodes: g.num_nodes(),
                });
            }
        }
        Ok(())
    }

    fn cosine(&self, a: usize, b: usize) -> T {
        let f = self.features.as_ref().unwrap();
        let inv = self.inv_norms.as_ref().unwrap();
        let dot = f
            .row(a)
            .iter()
            .zip(f.row(b))
            .fold(T::zero(), |acc, (&x, &y)| acc + x * y);
        dot * inv[a] * inv[b]
    }

    /// Score of the pair `(u, v)` on `g`. Endpoints must be in range and,
    /// for cos-common, covered by the feature matrix.
    pub fn score(&self, g: &Graph, u: usize, v: usize) -> T {
        if u == v {
            return T::zero();
        }
        // Fixed operand order keeps the score bit-identical under swapping.
        let (u, v) = crate::graph::canonical(u, v);
        let shared = g.common_neighbor_iter(u, v);
        match self.kind {
            ScorerKind::CommonNeighbors => T::from_count(shared.count()),
            ScorerKind::AdamicAdar => shared.fold(T::zero(), |acc, x| {
                // x is adjacent to both u and v, u != v.
                let d = g.degree(x);
                debug_assert!(d >= 2);
                acc + T::one() / num_traits::Float::ln(T::from_count(d))
            }),
            ScorerKind::CosCommon => shared.fold(T::zero(), |acc, x| {
                acc + self.cosine(u, x) * self.cosine(x, v)
            }),
        }
    }

    /// Scores every pair, preserving order. Runs in parallel; results are
    /// identical to sequential evaluation.
    pub fn batch_score(&self, g: &Graph, pairs: &[Edge]) -> Result<Vec<T>> {
        self.check(g)?;
        let n = g.num_nodes();
        for (row, &(u, v)) in pairs.iter().enumerate() {
            if u >= n || v >= n {
                return Err(Error::EndpointOutOfRange {
                    row,
                    node: u.max(v),
                    num_nodes: n,
                });
            }
        }
        Ok(pairs
            .par_iter()
            .with_min_len(256)
            .map(|&(u, v)| self.score(g, u, v))
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{generate_sbm, SbmConfig};
    use crate::rng::Seed;
    use proptest::prelude::*;
    use rand::Rng;

    #[test]
    fn adamic_adar_two_degree_two_neighbors() {
        // a=0, b=1, c=2, d=3
        let g = Graph::from_edges(4, [(0, 2), (1, 2), (0, 3), (1, 3)]).unwrap();
        let s: f64 = Scorer::adamic_adar().score(&g, 0, 1);
        let expected = 2.0 / 2f64.ln();
        assert!((s - expected).abs() < 1e-12);
        assert!((s - 2.8854).abs() < 1e-4);
    }

    #[test]
    fn no_common_neighbors_scores_zero() {
        let g = Graph::from_edges(4, [(0, 1), (2, 3)]).unwrap();
        let f = Arc::new(FeatureMatrix::new(4, 1, vec![1.0; 4]).unwrap());
        for sc in [
            Scorer::<f64>::common_neighbors(),
            Scorer::adamic_adar(),
            Scorer::cos_common(f),
        ] {
            assert_eq!(sc.score(&g, 0, 3), 0.0);
        }
    }

    #[test]
    fn cos_common_requires_features() {
        assert!(matches!(
            Scorer::<f64>::new(ScorerKind::CosCommon, None),
            Err(Error::MissingFeatures)
        ));
    }

    #[test]
    fn zero_norm_rows_contribute_nothing() {
        let g = Graph::from_edges(3, [(0, 1), (1, 2)]).unwrap();
        let f = Arc::new(FeatureMatrix::new(3, 2, vec![1.0, 0.0, 0.0, 0.0, 1.0, 0.0]).unwrap());
        let s = Scorer::cos_common(f).score(&g, 0, 2);
        assert_eq!(s, 0.0);
    }

    #[test]
    fn short_feature_matrix_is_rejected() {
        let g = Graph::from_edges(3, [(0, 1), (1, 2)]).unwrap();
        let f = Arc::new(FeatureMatrix::new(2, 1, vec![1.0, 1.0]).unwrap());
        let sc = Scorer::cos_common(f);
        assert!(matches!(
            sc.batch_score(&g, &[(0, 2)]),
            Err(Error::FeatureShape { rows: 2, num_nodes: 3 })
        ));
    }

    #[test]
    fn non_finite_features_rejected() {
        assert!(matches!(
            FeatureMatrix::new(2, 1, vec![1.0, f64::NAN]),
            Err(Error::NonFiniteFeature { node: 1 })
        ));
    }

    #[test]
    fn batch_edge_cases() {
        let g = Graph::from_edges(3, [(0, 1), (1, 2)]).unwrap();
        let sc = Scorer::<f64>::common_neighbors();
        assert!(sc.batch_score(&g, &[]).unwrap().is_empty());
        assert_eq!(sc.batch_score(&g, &[(0, 2)]).unwrap(), vec![sc.score(&g, 0, 2)]);
        assert!(matches!(
            sc.batch_score(&g, &[(0, 9)]),
            Err(Error::EndpointOutOfRange { row: 0, node: 9, .. })
        ));
    }

    #[test]
    fn batch_matches_sequential_on_sbm() {
        let cfg = SbmConfig {
            block_sizes: vec![50, 50],
            p_in: 0.3,
            p_out: 1.0 / 30.0,
            seed: Seed(11),
        };
        let (g, _) = generate_sbm(&cfg).unwrap();
        let mut rng = Seed(5).rng();
        let pairs: Vec<Edge> = (0..10_000)
            .map(|_| (rng.random_range(0..100), rng.random_range(0..100)))
            .collect();
        for sc in [Scorer::<f64>::common_neighbors(), Scorer::adamic_adar()] {
            let batch = sc.batch_score(&g, &pairs).unwrap();
            let seq: Vec<f64> = pairs.iter().map(|&(u, v)| sc.score(&g, u, v)).collect();
            assert_eq!(
                batch.iter().map(|x| x.to_bits()).collect::<Vec<_>>(),
                seq.iter().map(|x| x.to_bits()).collect::<Vec<_>>()
            );
        }
    }

    #[test]
    fn feature_csv_with_header() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.csv");
        std::fs::write(&path, "id,a,b\n1,0.5,2\n0,1,-1\n").unwrap();
        let f = FeatureMatrix::<f64>::read_csv(&path).unwrap();
        assert_eq!((f.num_nodes(), f.dim()), (2, 2));
        assert_eq!(f.row(0), &[1.0, -1.0]);
        let out = dir.path().join("g.csv");
        f.write_csv(&out).unwrap();
        assert_eq!(FeatureMatrix::<f64>::read_csv(&out).unwrap(), f);
    }

    #[test]
    fn scorer_names_parse() {
        for kind in [ScorerKind::CommonNeighbors, ScorerKind::AdamicAdar, ScorerKind::CosCommon] {
            assert_eq!(kind.name().parse::<ScorerKind>().unwrap(), kind);
        }
        assert_eq!("common".parse::<ScorerKind>().unwrap(), ScorerKind::CommonNeighbors);
        assert!("jaccard".parse::<ScorerKind>().is_err());
    }

    fn arb_graph() -> impl Strategy<Value = Graph> {
        (3usize..40).prop_flat_map(|n| {
            proptest::collection::vec((0..n, 0..n), 0..(n * 4))
                .prop_map(move |pairs| Graph::from_edges(n, pairs).unwrap())
        })
    }

    proptest! {
        #[test]
        fn scores_are_symmetric(g in arb_graph(), seed in any::<u64>()) {
            let n = g.num_nodes();
            let mut rng = Seed(seed).rng();
            let data: Vec<f64> = (0..n * 3).map(|_| rng.random_range(-1.0..1.0)).collect();
            let f = Arc::new(FeatureMatrix::new(n, 3, data).unwrap());
            for sc in [Scorer::common_neighbors(), Scorer::adamic_adar(), Scorer::cos_common(f.clone())] {
                for u in 0..n {
                    for v in 0..n {
                        prop_assert_eq!(sc.score(&g, u, v), sc.score(&g, v, u));
                    }
                }
            }
        }

        #[test]
        fn cos_common_with_shared_unit_row_is_common_neighbors(g in arb_graph(), seed in any::<u64>()) {
            let n = g.num_nodes();
            let mut rng = Seed(seed).rng();
            let dir: Vec<f64> = (0..4).map(|_| rng.random_range(0.1..1.0)).collect();
            let norm = dir.iter().map(|x| x * x).sum::<f64>().sqrt();
            let unit: Vec<f64> = dir.iter().map(|x| x / norm).collect();
            let data: Vec<f64> = (0..n).flat_map(|_| unit.clone()).collect();
            let sc = Scorer::cos_common(Arc::new(FeatureMatrix::new(n, 4, data).unwrap()));
            for u in 0..n {
                for v in 0..n {
                    if u == v { continue; }
                    let cn = g.common_neighbors(u, v) as f64;
                    prop_assert!((sc.score(&g, u, v) - cn).abs() < 1e-12);
                }
            }
        }
    }
}
