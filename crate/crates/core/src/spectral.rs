//! Combinatorial Laplacian numerics: eigendecomposition, spectral node
//! embeddings and commute times through the Moore–Penrose pseudoinverse.
//!
//! Everything here is dense and cubic in the node count; it targets graphs
//! up to a few thousand nodes.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{augment, Graph};
use crate::heuristics::FeatureMatrix;
use crate::proposal::ProposalSet;
use crate::scalar::Scalar;
use crate::splits::EdgeSplit;

/// `L = D - A`.
pub fn laplacian<T: Scalar>(g: &Graph) -> DMatrix<T> {
    let n = g.num_nodes();
    let mut l = DMatrix::<T>::zeros(n, n);
    for u in 0..n {
        l[(u, u)] = T::from_count(g.degree(u));
        for &v in g.neighbors(u) {
            l[(u, v)] = -T::one();
        }
    }
    l
}

/// Eigendecomposition of a graph Laplacian with its pseudoinverse.
///
/// Eigenvalues are ascending. The null space (one zero eigenvalue per
/// connected component) is represented exactly by normalized component
/// indicator vectors, ordered by component label.
#[derive(Debug, Clone)]
pub struct LaplacianFactor<T: Scalar> {
    num_nodes: usize,
    eigenvalues: Vec<T>,
    eigenvectors: DMatrix<T>,
    component_ids: Vec<usize>,
    num_components: usize,
    pseudoinverse: DMatrix<T>,
}

impl<T: Scalar> LaplacianFactor<T> {
    pub fn new(g: &Graph) -> Self {
        let n = g.num_nodes();
        let (component_ids, num_components) = g.components();
        let eig = SymmetricEigen::new(laplacian::<T>(g));

        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| {
            eig.eigenvalues[a]
                .partial_cmp(&eig.eigenvalues[b])
                .unwrap_or(std::cmp::Ordering::Equal)
        });

        let mut eigenvalues = Vec::with_capacity(n);
        let mut eigenvectors = DMatrix::<T>::zeros(n, n);
        let mut sizes = vec![0usize; num_components];
        for &c in &component_ids {
            sizes[c] += 1;
        }
        for (c, &size) in sizes.iter().enumerate() {
            let entry = T::one() / num_traits::Float::sqrt(T::from_count(size));
            for (u, &cu) in component_ids.iter().enumerate() {
                if cu == c {
                    eigenvectors[(u, c)] = entry;
                }
            }
            eigenvalues.push(T::zero());
        }
        for (col, &src) in order.iter().enumerate().skip(num_components) {
            eigenvalues.push(eig.eigenvalues[src]);
            let mut v = eig.eigenvectors.column(src).into_owned();
            orient(v.as_mut_slice());
            eigenvectors.set_column(col, &v);
        }

        let mut pseudoinverse = DMatrix::<T>::zeros(n, n);
        if n > num_components {
            let tail = eigenvectors.columns(num_components, n - num_components);
            let mut scaled = tail.clone_owned();
            for (j, lambda) in eigenvalues[num_components..].iter().enumerate() {
                let inv = T::one() / *lambda;
                scaled.column_mut(j).scale_mut(inv);
            }
            pseudoinverse = &scaled * tail.transpose();
        }

        Self {
            num_nodes: n,
            eigenvalues,
            eigenvectors,
            component_ids,
            num_components,
            pseudoinverse,
        }
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    pub fn eigenvalues(&self) -> &[T] {
        &self.eigenvalues
    }

    /// Orthonormal eigenvectors as columns, matching [`Self::eigenvalues`].
    pub fn eigenvectors(&self) -> &DMatrix<T> {
        &self.eigenvectors
    }

    pub fn component_ids(&self) -> &[usize] {
        &self.component_ids
    }

    pub fn num_components(&self) -> usize {
        self.num_components
    }

    /// Moore–Penrose pseudoinverse of the Laplacian.
    pub fn pseudoinverse(&self) -> &DMatrix<T> {
        &self.pseudoinverse
    }

    /// Expected round-trip time of a random walk between `u` and `v` on a
    /// graph with `num_edges` edges. Infinite across components.
    pub fn commute_time(&self, num_edges: usize, u: usize, v: usize) -> T {
        if u == v {
            return T::zero();
        }
        if self.component_ids[u] != self.component_ids[v] {
            return <T as num_traits::Float>::infinity();
        }
        let (u, v) = (u.min(v), u.max(v));
        let m = &self.pseudoinverse;
        let resistance = m[(u, u)] + m[(v, v)] - m[(u, v)] - m[(v, u)];
        T::from_count(2 * num_edges) * resistance
    }
}

// Flip so the first clearly nonzero entry is positive.
fn orient<T: Scalar>(v: &mut [T]) {
    let tol = T::from_f64_lossy(1e-3) * num_traits::Float::sqrt(<T as num_traits::Float>::epsilon());
    if let Some(first) = v.iter().find(|x| x.abs() > tol) {
        if *first < T::zero() {
            v.iter_mut().for_each(|x| *x = -*x);
        }
    }
}

/// Eigenvectors of `L = D - A` for the `dim` smallest eigenvalues, as node
/// features.
pub fn spectral_embedding<T: Scalar>(g: &Graph, dim: usize) -> Result<FeatureMatrix<T>> {
    let n = g.num_nodes();
    if dim > n {
        return Err(Error::DimensionTooLarge { dim, num_nodes: n });
    }
    let factor = LaplacianFactor::<T>::new(g);
    let vectors = factor.eigenvectors();
    let mut data = Vec::with_capacity(n * dim);
    for u in 0..n {
        for j in 0..dim {
            data.push(vectors[(u, j)]);
        }
    }
    FeatureMatrix::new(n, dim, data)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CommuteRow<T> {
    pub size: usize,
    pub pct_pos: T,
    pub pct_neg: T,
    pub excluded_pairs: usize,
}

fn mean_commute<T: Scalar>(
    factor: &LaplacianFactor<T>,
    num_edges: usize,
    pairs: &[(usize, usize)],
) -> T {
    let total = pairs
        .iter()
        .fold(T::zero(), |acc, &(u, v)| acc + factor.commute_time(num_edges, u, v));
    total / T::from_count(pairs.len().max(1))
}

/// Percentage change of the average test-pair commute time as the first
/// `size` proposal edges are added, relative to the unaugmented graph.
///
/// Pairs that span components of the unaugmented graph are excluded at
/// every size and counted in `excluded_pairs`.
pub fn commute_change_curve<T: Scalar>(
    g: &Graph,
    split: &EdgeSplit,
    p: &ProposalSet<T>,
    sizes: &[usize],
) -> Result<Vec<CommuteRow<T>>> {
    let base = LaplacianFactor::<T>::new(g);
    let connected = |pairs: &[(usize, usize)]| -> Vec<(usize, usize)> {
        pairs
            .iter()
            .copied()
            .filter(|&(u, v)| base.component_ids[u] == base.component_ids[v])
            .collect()
    };
    let pos = connected(&split.test_pos);
    let neg = connected(&split.test_neg);
    let total = split.test_pos.len() + split.test_neg.len();
    let excluded = total - pos.len() - neg.len();
    if pos.is_empty() || neg.is_empty() {
        return Err(Error::AllPairsDisconnected { pairs: total });
    }
    let base_pos = mean_commute(&base, g.num_edges(), &pos);
    let base_neg = mean_commute(&base, g.num_edges(), &neg);
    let hundred = T::from_count(100);

    sizes
        .iter()
        .map(|&size| {
            let (pos_avg, neg_avg) = if size == 0 {
                (base_pos, base_neg)
            } else {
                let aug = augment(g, p, size)?;
                let factor = LaplacianFactor::<T>::new(&aug);
                (
                    mean_commute(&factor, aug.num_edges(), &pos),
                    mean_commute(&factor, aug.num_edges(), &neg),
                )
            };
            Ok(CommuteRow {
                size,
                pct_pos: (pos_avg - base_pos) / base_pos * hundred,
                pct_neg: (neg_avg - base_neg) / base_neg * hundred,
                excluded_pairs: excluded,
            })
        })
        .collect()
}

/// Writes `size,pct_pos,pct_neg,excluded_pairs`.
pub fn write_commute_csv<T: Scalar>(
    path: impl AsRef<std::path::Path>,
    rows: &[CommuteRow<T>],
) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["size", "pct_pos", "pct_neg", "excluded_pairs"])?;
    for r in rows {
        w.write_record([
            r.size.to_string(),
            r.pct_pos.to_string(),
            r.pct_neg.to_string(),
            r.excluded_pairs.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}
