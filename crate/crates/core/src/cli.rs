//! Command-line front end.
//!
//! Every subcommand takes a mandatory `--seed`, writes its artifacts into an
//! output directory (`--out`, or `PROPSET_OUT`), and records a
//! `manifest.json` holding the exact arguments. `propset replay` re-runs a
//! manifest and reproduces the same bytes.
//!
//! Stage seeds derive from the root seed by label (see [`crate::rng`]):
//! `generate`, `split`, `quality/<trial>`.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::eval::{
    rank_pairs, search_prepared, CurvePoint, FilterRank, FilterRankOptions, ResultsFile, RunSnapshot,
};
use crate::generators::{generate_jin, generate_sbm, JinConfig, SbmConfig};
use crate::graph::io::{implied_num_nodes, read_edge_list, read_labeled_edge_list, write_edge_list};
use crate::graph::{augment, Graph};
use crate::heuristics::{FeatureMatrix, Scorer, ScorerKind};
use crate::proposal::{
    enumerate_starting_set, filter_top_k, force_include, target_size_grid, GridScale, ProposalEntry,
    ProposalMeta, ProposalSet, TargetSizeGrid,
};
use crate::quality::{
    ground_truth_ratio, quality_fixed, quality_grow, summarize, write_quality_csv, QualityOptions,
};
use crate::rng::Seed;
use crate::spectral::{commute_change_curve, spectral_embedding, write_commute_csv};
use crate::splits::{
    inference_graph, random_split, sbm_eval_edges, temporal_split, EdgeSplit, SbmEvalCounts,
    SplitManifest,
};

pub const OUT_ENV: &str = "PROPSET_OUT";

#[derive(Debug, Parser)]
#[command(name = "propset", version, about = "Proposal-set augmented link prediction")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample a synthetic graph.
    Generate {
        #[command(subcommand)]
        model: GenerateModel,
    },
    /// Split an edge list into train/validation/test with negatives.
    Split(SplitArgs),
    /// Build a proposal set from the training graph.
    Propose(ProposeArgs),
    /// Rank test pairs on the (optionally augmented) graph.
    Rank(RankArgs),
    /// Search the target size on validation edges.
    Search(SearchArgs),
    /// Degrade a perfect proposal set and measure ranking quality.
    Quality(QualityArgs),
    /// Commute-time change of test pairs as proposal edges are added.
    Commute(CommuteArgs),
    /// Re-run the command recorded in a manifest.
    Replay(ReplayArgs),
}

#[derive(Debug, Args)]
pub struct Common {
    #[arg(long)]
    pub seed: u64,
    /// Output directory.
    #[arg(long, env = OUT_ENV)]
    pub out: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum GenerateModel {
    /// Stochastic block model.
    Sbm {
        #[arg(long, value_delimiter = ',', default_values_t = vec![50usize, 50])]
        blocks: Vec<usize>,
        /// Within-block edge probability.
        #[arg(long)]
        p: f64,
        /// Between-block edge probability.
        #[arg(long)]
        q: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Triangle-closing growth model.
    Jin {
        #[arg(long, default_value_t = 2000)]
        nodes: usize,
        #[arg(long, default_value_t = 2.0)]
        r1: f64,
        #[arg(long, default_value_t = 0.0005)]
        r0: f64,
        #[arg(long, default_value_t = 0.005)]
        gamma: f64,
        #[arg(long, default_value_t = 5)]
        z_star: usize,
        #[arg(long, default_value_t = 30_000)]
        iterations: usize,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
pub enum SplitMode {
    Temporal,
    Random,
    Sbm,
}

#[derive(Debug, Args)]
pub struct SplitArgs {
    #[arg(long)]
    pub edges: PathBuf,
    /// Node count; defaults to `graph.json` beside the edge list, else max id + 1.
    #[arg(long)]
    pub nodes: Option<usize>,
    /// Treat endpoints as string labels and write `labels.tsv`.
    #[arg(long)]
    pub labels: bool,
    #[arg(long, value_enum)]
    pub kind: SplitMode,
    /// Block assignment (`blocks.json`), required for `--kind sbm`.
    #[arg(long)]
    pub blocks: Option<PathBuf>,
    #[arg(long, value_delimiter = ',', default_values_t = vec![0.8, 0.1, 0.1])]
    pub fractions: Vec<f64>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct FeatureArgs {
    /// Node feature CSV for cos-common.
    #[arg(long)]
    pub features: Option<PathBuf>,
    /// Use this many Laplacian eigenvectors of the training graph as features.
    #[arg(long)]
    pub spectral_dim: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum IncludeValid {
    /// Only for temporal splits.
    Auto,
    Yes,
    No,
}

#[derive(Debug, Args)]
pub struct ProposeArgs {
    #[arg(long)]
    pub split: PathBuf,
    #[arg(long)]
    pub filter: ScorerKind,
    /// Target size; defaults to kbar (positive validation + test edges).
    #[arg(long)]
    pub k: Option<usize>,
    /// Place positive validation edges ahead of all candidates.
    #[arg(long)]
    pub force_valid: bool,
    #[command(flatten)]
    pub features: FeatureArgs,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct RankArgs {
    #[arg(long)]
    pub split: PathBuf,
    #[arg(long)]
    pub rank: ScorerKind,
    /// Proposal TSV to add before ranking.
    #[arg(long, conflicts_with = "filter")]
    pub proposal: Option<PathBuf>,
    /// Build the proposal set with this scorer instead of reading one.
    #[arg(long)]
    pub filter: Option<ScorerKind>,
    /// Number of proposal edges to add (all of the file by default, 0 without one).
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub force_valid: bool,
    #[arg(long, default_value_t = 10)]
    pub hits_k: usize,
    #[arg(long, value_enum, default_value_t = IncludeValid::Auto)]
    pub include_valid: IncludeValid,
    #[command(flatten)]
    pub features: FeatureArgs,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScaleArg {
    Large,
    Small,
}

#[derive(Debug, Args)]
pub struct SearchArgs {
    #[arg(long)]
    pub split: PathBuf,
    #[arg(long)]
    pub filter: ScorerKind,
    #[arg(long)]
    pub rank: ScorerKind,
    #[arg(long, value_enum, default_value_t = ScaleArg::Small)]
    pub scale: ScaleArg,
    /// Custom grid step around kbar (overrides --scale).
    #[arg(long, requires = "radius")]
    pub step: Option<usize>,
    /// Grid points on each side of kbar for --step.
    #[arg(long, requires = "step")]
    pub radius: Option<usize>,
    /// Explicit target sizes (overrides --scale and --step).
    #[arg(long, value_delimiter = ',', conflicts_with = "sweep")]
    pub sizes: Option<Vec<usize>>,
    /// Every multiple of this step from 0 to the starting-set size.
    #[arg(long, conflicts_with_all = ["step", "radius"])]
    pub sweep: Option<usize>,
    #[arg(long)]
    pub force_valid: bool,
    #[arg(long, default_value_t = 10)]
    pub hits_k: usize,
    #[arg(long, value_enum, default_value_t = IncludeValid::Auto)]
    pub include_valid: IncludeValid,
    #[command(flatten)]
    pub features: FeatureArgs,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum QualityMode {
    /// Add negatives to all positive test edges.
    Grow,
    /// Replace positives with negatives at fixed size.
    Fixed,
}

#[derive(Debug, Args)]
pub struct QualityArgs {
    #[arg(long)]
    pub split: PathBuf,
    #[arg(long)]
    pub rank: ScorerKind,
    #[arg(long, value_enum)]
    pub mode: QualityMode,
    /// grow: negative counts (or relative ratios with --relative); fixed:
    /// fractions of positives kept.
    #[arg(long, value_delimiter = ',', required = true)]
    pub levels: Vec<f64>,
    #[arg(long)]
    pub relative: bool,
    #[arg(long, default_value_t = 5)]
    pub trials: u64,
    #[arg(long, default_value_t = 10)]
    pub hits_k: usize,
    #[arg(long, value_enum, default_value_t = IncludeValid::Auto)]
    pub include_valid: IncludeValid,
    #[command(flatten)]
    pub features: FeatureArgs,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct CommuteArgs {
    #[arg(long)]
    pub split: PathBuf,
    #[arg(long)]
    pub filter: ScorerKind,
    #[arg(long, value_delimiter = ',', required = true)]
    pub sizes: Vec<usize>,
    #[command(flatten)]
    pub features: FeatureArgs,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct ReplayArgs {
    pub manifest: PathBuf,
    /// Output directory for the replay.
    #[arg(long, env = OUT_ENV)]
    pub out: PathBuf,
}

/// Written next to every command's outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub command: String,
    /// Arguments after the program name, without the output directory.
    pub args: Vec<String>,
    pub seed: u64,
    pub version: String,
    pub outputs: Vec<String>,
}

/// Arguments with any `--out` option removed.
fn strip_out(args: &[String]) -> Vec<String> {
    let mut kept = Vec::with_capacity(args.len());
    let mut skip = false;
    for a in args {
        if skip {
            skip = false;
        } else if a == "--out" {
            skip = true;
        } else if !a.starts_with("--out=") {
            kept.push(a.clone());
        }
    }
    kept
}

fn write_json<S: Serialize>(path: &Path, value: &S) -> anyhow::Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

struct Ctx {
    command: String,
    args: Vec<String>,
    seed: u64,
    out: PathBuf,
}

impl Ctx {
    fn new(command: &str, args: &[String], common: &Common) -> anyhow::Result<Self> {
        std::fs::create_dir_all(&common.out)
            .with_context(|| format!("creating {}", common.out.display()))?;
        Ok(Self {
            command: command.to_string(),
            args: strip_out(args),
            seed: common.seed,
            out: common.out.clone(),
        })
    }

    fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    fn root(&self) -> Seed {
        Seed(self.seed)
    }

    fn finish(&self, outputs: &[&str]) -> anyhow::Result<()> {
        let manifest = Manifest {
            command: self.command.clone(),
            args: self.args.clone(),
            seed: self.seed,
            version: env!("CARGO_PKG_VERSION").to_string(),
            outputs: outputs.iter().map(|s| s.to_string()).collect(),
        };
        write_json(&self.path("manifest.json"), &manifest)
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct GraphInfo {
    num_nodes: usize,
    num_edges: usize,
}

#[derive(Debug, Serialize, Deserialize)]
struct BlocksFile {
    block_sizes: Vec<usize>,
    blocks: Vec<usize>,
}

/// Parses `args` (without the program name) and runs the command.
pub fn run(args: &[String]) -> anyhow::Result<()> {
    let argv = std::iter::once("propset".to_string()).chain(args.iter().cloned());
    let cli = Cli::try_parse_from(argv)?;
    dispatch(cli.command, args)
}

fn dispatch(command: Command, args: &[String]) -> anyhow::Result<()> {
    match command {
        Command::Generate { model } => run_generate(model, args),
        Command::Split(a) => run_split(a, args),
        Command::Propose(a) => run_propose(a, args),
        Command::Rank(a) => run_rank(a, args),
        Command::Search(a) => run_search(a, args),
        Command::Quality(a) => run_quality(a, args),
        Command::Commute(a) => run_commute(a, args),
        Command::Replay(a) => run_replay(a),
    }
}

fn run_replay(a: ReplayArgs) -> anyhow::Result<()> {
    let text = std::fs::read_to_string(&a.manifest)
        .with_context(|| format!("reading {}", a.manifest.display()))?;
    let manifest: Manifest = serde_json::from_str(&text)?;
    let mut args = manifest.args.clone();
    args.push("--out".into());
    args.push(a.out.display().to_string());
    run(&args)
}

fn run_generate(model: GenerateModel, args: &[String]) -> anyhow::Result<()> {
    match model {
        GenerateModel::Sbm {
            blocks,
            p,
            q,
            common,
        } => {
            let ctx = Ctx::new("generate sbm", args, &common)?;
            let cfg = SbmConfig {
                block_sizes: blocks,
                p_in: p,
                p_out: q,
                seed: ctx.root().derive("generate"),
            };
            let (g, labels) = generate_sbm(&cfg)?;
            write_edge_list(ctx.path("edges.tsv"), &g.to_edge_list())?;
            write_json(
                &ctx.path("blocks.json"),
                &BlocksFile {
                    block_sizes: cfg.block_sizes.clone(),
                    blocks: labels,
                },
            )?;
            write_json(
                &ctx.path("graph.json"),
                &GraphInfo {
                    num_nodes: g.num_nodes(),
                    num_edges: g.num_edges(),
                },
            )?;
            ctx.finish(&["edges.tsv", "blocks.json", "graph.json"])
        }
        GenerateModel::Jin {
            nodes,
            r1,
            r0,
            gamma,
            z_star,
            iterations,
            common,
        } => {
            let ctx = Ctx::new("generate jin", args, &common)?;
            let cfg = JinConfig {
                num_nodes: nodes,
                r1,
                r0,
                gamma,
                z_star,
                iterations,
                seed: ctx.root().derive("generate"),
            };
            let edges = generate_jin(&cfg)?;
            write_edge_list(ctx.path("edges.tsv"), &edges)?;
            write_json(
                &ctx.path("graph.json"),
                &GraphInfo {
                    num_nodes: nodes,
                    num_edges: edges.len(),
                },
            )?;
            ctx.finish(&["edges.tsv", "graph.json"])
        }
    }
}

fn run_split(a: SplitArgs, args: &[String]) -> anyhow::Result<()> {
    let ctx = Ctx::new("split", args, &a.common)?;
    let fractions: [f64; 3] = a
        .fractions
        .as_slice()
        .try_into()
        .map_err(|_| anyhow::anyhow!("--fractions needs three values"))?;
    let (edges, labels) = if a.labels {
        let (e, l) = read_labeled_edge_list(&a.edges)?;
        (e, Some(l))
    } else {
        (read_edge_list(&a.edges)?, None)
    };
    let sidecar = a.edges.parent().map(|d| d.join("graph.json"));
    let num_nodes = match (a.nodes, &labels) {
        (Some(n), _) => n,
        (None, Some(l)) => l.len(),
        (None, None) => match sidecar.filter(|p| p.exists()) {
            Some(p) => {
                let info: GraphInfo = serde_json::from_str(&std::fs::read_to_string(&p)?)?;
                info.num_nodes
            }
            None => implied_num_nodes(&edges),
        },
    };
    let seed = ctx.root().derive("split");
    let split = match a.kind {
        SplitMode::Temporal => temporal_split(num_nodes, &edges, fractions, seed)?,
        SplitMode::Random => random_split(num_nodes, &edges, fractions, seed)?,
        SplitMode::Sbm => {
            let Some(path) = &a.blocks else {
                bail!("--kind sbm requires --blocks");
            };
            let blocks: BlocksFile = serde_json::from_str(
                &std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?,
            )?;
            let (g, _) = crate::graph::build_graph(num_nodes, &edges)?;
            let train = fractions[0];
            if train <= 0.0 {
                bail!("sbm split needs a positive train fraction");
            }
            let m = g.num_edges() as f64;
            let counts = SbmEvalCounts {
                valid: (m * fractions[1] / train + 1e-9).floor() as usize,
                test: (m * fractions[2] / train + 1e-9).floor() as usize,
            };
            sbm_eval_edges(&g, &blocks.blocks, counts, seed)?
        }
    };
    let manifest = SplitManifest {
        kind: split.kind,
        num_nodes,
        fractions,
        seed: a.common.seed,
    };
    split.write_dir(&ctx.out, &manifest)?;
    let mut outputs = vec![
        "train_pos.tsv",
        "valid_pos.tsv",
        "test_pos.tsv",
        "valid_neg.tsv",
        "test_neg.tsv",
        "split.json",
    ];
    if let Some(l) = labels {
        l.write(ctx.path("labels.tsv"))?;
        outputs.push("labels.tsv");
    }
    ctx.finish(&outputs)
}

fn load_split(dir: &Path) -> anyhow::Result<(EdgeSplit, Graph)> {
    let (split, _) = EdgeSplit::read_dir(dir)?;
    let g = split.train_graph()?;
    Ok((split, g))
}

fn load_features(f: &FeatureArgs, g: &Graph) -> anyhow::Result<Option<Arc<FeatureMatrix<f64>>>> {
    match (&f.features, f.spectral_dim) {
        (Some(_), Some(_)) => bail!("--features and --spectral-dim are exclusive"),
        (Some(path), None) => Ok(Some(Arc::new(FeatureMatrix::read_csv(path)?))),
        (None, Some(dim)) => Ok(Some(Arc::new(spectral_embedding(g, dim)?))),
        (None, None) => Ok(None),
    }
}

fn scorer(kind: ScorerKind, features: &Option<Arc<FeatureMatrix<f64>>>) -> anyhow::Result<Scorer<f64>> {
    let f = if kind == ScorerKind::CosCommon {
        features.clone()
    } else {
        None
    };
    Ok(Scorer::new(kind, f)?)
}

fn include_valid(choice: IncludeValid, split: &EdgeSplit) -> bool {
    match choice {
        IncludeValid::Auto => split.kind.include_valid_at_inference(),
        IncludeValid::Yes => true,
        IncludeValid::No => false,
    }
}

fn run_propose(a: ProposeArgs, args: &[String]) -> anyhow::Result<()> {
    let ctx = Ctx::new("propose", args, &a.common)?;
    let (split, g) = load_split(&a.split)?;
    let features = load_features(&a.features, &g)?;
    let filter = scorer(a.filter, &features)?;
    let kbar = split.kbar();
    let k = a.k.unwrap_or(kbar);
    let start = enumerate_starting_set(&g)?;
    let mut p = filter_top_k(&g, &start, &filter, k)?;
    if a.force_valid {
        let scores = filter.batch_score(&g, &split.valid_pos)?;
        let must: Vec<ProposalEntry<f64>> = split
            .valid_pos
            .iter()
            .zip(scores)
            .map(|(&(u, v), score)| ProposalEntry { u, v, score })
            .collect();
        p = force_include(&p, &must, p.len());
    }
    p.write_tsv(ctx.path("proposal.tsv"))?;
    let meta = ProposalMeta {
        scorer: a.filter.name().to_string(),
        k: p.len(),
        kbar: Some(kbar),
        seed: Some(a.common.seed),
        forced_edges: p.provenance().forced_edges,
    };
    write_json(&ctx.path("proposal.json"), &meta)?;
    ctx.finish(&["proposal.tsv", "proposal.json"])
}

fn results_config(pairs: &[(&str, serde_json::Value)]) -> serde_json::Value {
    serde_json::Value::Object(
        pairs
            .iter()
            .map(|(k, v)| (k.to_string(), v.clone()))
            .collect(),
    )
}

fn run_rank(a: RankArgs, args: &[String]) -> anyhow::Result<()> {
    let ctx = Ctx::new("rank", args, &a.common)?;
    let (split, g) = load_split(&a.split)?;
    let features = load_features(&a.features, &g)?;
    let rank = scorer(a.rank, &features)?;
    let include = include_valid(a.include_valid, &split);

    let (valid_p, test_p, filter_name) = if let Some(path) = &a.proposal {
        if a.force_valid {
            bail!("--force-valid needs --filter");
        }
        let p = ProposalSet::<f64>::read_tsv(&g, path)?;
        let p = p.prefix(a.k.unwrap_or(p.len()));
        (p.clone(), p, Some(format!("file:{}", path.display())))
    } else if let Some(kind) = a.filter {
        let filter = scorer(kind, &features)?;
        let options = FilterRankOptions {
            hits_k: a.hits_k,
            include_valid: include,
            force_valid: a.force_valid,
            seed: Some(a.common.seed),
            ..Default::default()
        };
        let pipeline = FilterRank::new(&g, &split, &filter, &rank, options)?;
        let k = a.k.unwrap_or(split.kbar());
        (pipeline.proposal(k), pipeline.test_proposal(k), Some(kind.name().to_string()))
    } else {
        if a.k.unwrap_or(0) != 0 {
            bail!("--k needs --proposal or --filter");
        }
        let empty = ProposalSet::empty("none");
        (empty.clone(), empty, None)
    };

    let snapshot = |k| RunSnapshot {
        filter: filter_name.clone(),
        rank: a.rank.name().to_string(),
        k,
        seed: Some(a.common.seed),
    };
    let gv = augment(&g, &valid_p, valid_p.len())?;
    let valid = rank_pairs(&gv, &rank, &split.valid_pos, &split.valid_neg, a.hits_k, snapshot(valid_p.len()))?;
    let gt = inference_graph(&augment(&g, &test_p, test_p.len())?, &split, include)?;
    let test = rank_pairs(&gt, &rank, &split.test_pos, &split.test_neg, a.hits_k, snapshot(test_p.len()))?;

    let results = ResultsFile {
        metric: test.metric.clone(),
        hits_k: a.hits_k,
        value: test.value,
        best_k: test_p.len(),
        curves: vec![CurvePoint {
            k: test_p.len(),
            valid: valid.value,
            test: test.value,
        }],
        seed: Some(a.common.seed),
        config: results_config(&[
            ("command", "rank".into()),
            ("filter", filter_name.clone().into()),
            ("rank", a.rank.name().into()),
            ("include_valid", include.into()),
            ("force_valid", a.force_valid.into()),
        ]),
    };
    results.write(ctx.path("results.json"), None)?;
    write_json(&ctx.path("scores.json"), &test)?;
    ctx.finish(&["results.json", "scores.json"])
}

fn run_search(a: SearchArgs, args: &[String]) -> anyhow::Result<()> {
    let ctx = Ctx::new("search", args, &a.common)?;
    let (split, g) = load_split(&a.split)?;
    let features = load_features(&a.features, &g)?;
    let filter = scorer(a.filter, &features)?;
    let rank = scorer(a.rank, &features)?;
    let include = include_valid(a.include_valid, &split);
    let options = FilterRankOptions {
        hits_k: a.hits_k,
        include_valid: include,
        force_valid: a.force_valid,
        seed: Some(a.common.seed),
        ..Default::default()
    };
    let pipeline = FilterRank::new(&g, &split, &filter, &rank, options)?;
    let start_size = pipeline.starting_set_size();
    let grid: TargetSizeGrid = match (&a.sizes, a.step, a.radius) {
        (Some(sizes), _, _) => TargetSizeGrid::explicit(split.kbar(), sizes, start_size),
        _ if a.sweep.is_some() => {
            let step = a.sweep.unwrap();
            if step == 0 {
                bail!("--sweep must be positive");
            }
            let mut sizes: Vec<usize> = (0..start_size).step_by(step).collect();
            sizes.push(start_size);
            TargetSizeGrid::explicit(split.kbar(), &sizes, start_size)
        }
        (None, Some(step), Some(radius)) => {
            target_size_grid(split.kbar(), GridScale::Custom { step, radius }, start_size)
        }
        _ => target_size_grid(
            split.kbar(),
            match a.scale {
                ScaleArg::Large => GridScale::Large,
                ScaleArg::Small => GridScale::Small,
            },
            start_size,
        ),
    };
    let outcome = search_prepared(&pipeline, &grid)?;
    let results = ResultsFile {
        metric: outcome.result.metric.clone(),
        hits_k: a.hits_k,
        value: outcome.result.value,
        best_k: outcome.best_k,
        curves: outcome.curve.clone(),
        seed: Some(a.common.seed),
        config: results_config(&[
            ("command", "search".into()),
            ("filter", a.filter.name().into()),
            ("rank", a.rank.name().into()),
            ("kbar", split.kbar().into()),
            ("grid", serde_json::to_value(&grid.resolved)?),
            ("include_valid", include.into()),
            ("force_valid", a.force_valid.into()),
            ("starting_set_size", start_size.into()),
        ]),
    };
    results.write(ctx.path("results.json"), Some(&ctx.path("curve.csv")))?;
    ctx.finish(&["results.json", "curve.csv"])
}

fn run_quality(a: QualityArgs, args: &[String]) -> anyhow::Result<()> {
    let ctx = Ctx::new("quality", args, &a.common)?;
    let (split, g) = load_split(&a.split)?;
    let features = load_features(&a.features, &g)?;
    let rank = scorer(a.rank, &features)?;
    let opts = QualityOptions {
        hits_k: a.hits_k,
        include_valid: include_valid(a.include_valid, &split),
    };
    let ground = ground_truth_ratio(split.num_nodes, split.total_positive());
    let t = split.test_pos.len() as f64;
    let runs = (0..a.trials)
        .map(|trial| {
            let seed = ctx.root().derive_indexed("quality", trial);
            match a.mode {
                QualityMode::Grow => {
                    let counts: Vec<usize> = a
                        .levels
                        .iter()
                        .map(|&l| if a.relative { (l * ground * t).round() as usize } else { l as usize })
                        .collect();
                    quality_grow(&g, &split, &rank, &counts, seed, opts)
                }
                QualityMode::Fixed => quality_fixed(&g, &split, &rank, &a.levels, seed, opts),
            }
        })
        .collect::<crate::Result<Vec<_>>>()?;
    write_quality_csv(ctx.path("quality.csv"), &summarize(&runs))?;
    ctx.finish(&["quality.csv"])
}

fn run_commute(a: CommuteArgs, args: &[String]) -> anyhow::Result<()> {
    let ctx = Ctx::new("commute", args, &a.common)?;
    let (split, g) = load_split(&a.split)?;
    let features = load_features(&a.features, &g)?;
    let filter = scorer(a.filter, &features)?;
    let start = enumerate_starting_set(&g)?;
    let max = a.sizes.iter().copied().max().unwrap_or(0);
    let p = filter_top_k(&g, &start, &filter, max)?;
    let sizes: Vec<usize> = a.sizes.iter().map(|&s| s.min(p.len())).collect();
    let rows = commute_change_curve(&g, &split, &p, &sizes)?;
    write_commute_csv(ctx.path("commute.csv"), &rows)?;
    ctx.finish(&["commute.csv"])
}

/// Single-line machine-readable error: `{"error":<kind>,"message":<text>}`.
pub fn error_line(err: &anyhow::Error) -> String {
    let kind = if let Some(e) = err.downcast_ref::<crate::Error>() {
        e.kind()
    } else if err.downcast_ref::<clap::Error>().is_some() {
        "usage"
    } else if err.downcast_ref::<std::io::Error>().is_some() {
        "io"
    } else if err.downcast_ref::<serde_json::Error>().is_some() {
        "json"
    } else {
        "error"
    };
    let message = format!("{err:#}").replace('\n', " ");
    serde_json::json!({ "error": kind, "message": message.trim() }).to_string()
}
