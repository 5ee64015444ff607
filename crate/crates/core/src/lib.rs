//! Proposal-set augmentation for link prediction.
//!
//! A proposal set is a collection of candidate edges added to a graph before
//! a link predictor scores held-out pairs. This crate builds proposal sets
//! from the neighborhood starting set with a filtering scorer, augments the
//! graph, ranks evaluation pairs with a ranking scorer and measures Hits@K
//! (the Filter & Rank pipeline). It also ships the synthetic generators,
//! edge splits, commute-time analysis and quality-degradation experiments
//! used to study when augmentation helps.
//!
//! Numeric code is generic over [`Scalar`] (`f32` or `f64`); the aliases
//! below fix the common choices.

pub mod cli;
pub mod error;
pub mod eval;
pub mod generators;
pub mod graph;
pub mod heuristics;
pub mod proposal;
pub mod quality;
pub mod rng;
pub mod scalar;
pub mod spectral;
pub mod splits;

pub use error::{Error, Result};
pub use graph::{augment, build_graph, canonical, Edge, EdgeList, EdgeRecord, Graph};
pub use heuristics::ScorerKind;
pub use rng::Seed;
pub use scalar::Scalar;
pub use splits::{EdgeSplit, SplitKind};

pub type Scorer64 = heuristics::Scorer<f64>;
pub type Scorer32 = heuristics::Scorer<f32>;
pub type FeatureMatrix64 = heuristics::FeatureMatrix<f64>;
pub type FeatureMatrix32 = heuristics::FeatureMatrix<f32>;
pub type ProposalSet64 = proposal::ProposalSet<f64>;
pub type ProposalSet32 = proposal::ProposalSet<f32>;
pub type LaplacianFactor64 = spectral::LaplacianFactor<f64>;
pub type LaplacianFactor32 = spectral::LaplacianFactor<f32>;
pub type EvalResult64 = eval::EvalResult<f64>;
pub type EvalResult32 = eval::EvalResult<f32>;
