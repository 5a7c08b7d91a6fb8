use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gsc::testing::Formulation;
use gsc::{Signal, StatisticKind};

#[derive(Parser, Debug)]
#[command(
    name = "gsc",
    version,
    about = "Segmented block subsampling for overlap statistics of genomic feature tracks"
)]
pub struct Cli {
    /// Worker threads for replicate engines (0 = all cores).
    #[arg(long, global = true, env = "GSC_THREADS", default_value_t = 0)]
    pub threads: usize,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Split the genome into approximately homogeneous regions.
    Segment(SegmentArgs),
    /// Replicate distribution of a statistic from stratified blocks.
    Subsample(SubsampleArgs),
    /// Choose a block length by IQR stability across a geometric grid.
    SelectBlockSize(SelectArgs),
    /// Test independence of two tracks.
    Test(TestArgs),
    /// Generate synthetic tracks.
    Simulate(SimulateArgs),
    /// Rerun a simulation study and check it against reference tolerances.
    Reproduce(ReproduceArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Tsv,
}

#[derive(Args, Debug, Clone)]
pub struct Output {
    /// Report format on stdout.
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Directory for additional artifacts.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct Seed {
    /// Seed for every random draw; generated and recorded when absent.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Args, Debug, Clone)]
pub struct Inputs {
    /// Two-column file of sequence names and lengths.
    #[arg(long)]
    pub genome: PathBuf,
    /// BED-like file for track A.
    #[arg(long = "a")]
    pub a: PathBuf,
    /// BED-like file for track B.
    #[arg(long = "b")]
    pub b: PathBuf,
}

#[derive(Args, Debug, Clone)]
pub struct SegmentationOpts {
    /// Segmentation file to use instead of computing one.
    #[arg(long, conflicts_with_all = ["min_segment", "threshold_b", "no_segmentation"])]
    pub segmentation: Option<PathBuf>,
    /// Use only the sequence boundaries as cuts.
    #[arg(long)]
    pub no_segmentation: bool,
    /// Minimum region length; defaults to five block lengths.
    #[arg(long)]
    pub min_segment: Option<u64>,
    /// Stopping threshold on the normalized split statistic.
    #[arg(long, default_value_t = 20.0)]
    pub threshold_b: f64,
    /// Which series to segment.
    #[arg(long, default_value = "both", value_parser = parse_signal)]
    pub signal: Signal,
}

#[derive(Args, Debug)]
pub struct SegmentArgs {
    #[arg(long)]
    pub genome: PathBuf,
    #[arg(long = "a")]
    pub a: PathBuf,
    /// Track B; required for signals other than `a`.
    #[arg(long = "b")]
    pub b: Option<PathBuf>,
    #[arg(long)]
    pub min_segment: u64,
    /// Stopping threshold; a positive value needs `--block-length`.
    #[arg(long, default_value_t = 0.0)]
    pub threshold_b: f64,
    /// Block length used to normalize the split statistic.
    #[arg(long)]
    pub block_length: Option<u64>,
    #[arg(long, default_value = "a", value_parser = parse_signal)]
    pub signal: Signal,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Args, Debug)]
pub struct SubsampleArgs {
    #[command(flatten)]
    pub inputs: Inputs,
    #[arg(long, default_value = "bp-overlap", value_parser = parse_statistic)]
    pub statistic: StatisticKind,
    #[arg(long)]
    pub block_length: u64,
    #[arg(long, default_value_t = 1000)]
    pub replicates: usize,
    /// Confidence level of the reported intervals.
    #[arg(long, default_value_t = 0.95)]
    pub level: f64,
    #[command(flatten)]
    pub segmentation: SegmentationOpts,
    #[command(flatten)]
    pub seed: Seed,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Args, Debug)]
pub struct SelectArgs {
    #[command(flatten)]
    pub inputs: Inputs,
    #[arg(long, default_value = "bp-overlap", value_parser = parse_statistic)]
    pub statistic: StatisticKind,
    #[arg(long, default_value_t = 0.5)]
    pub rho: f64,
    #[arg(long, default_value_t = 8)]
    pub grid_steps: u32,
    #[arg(long, default_value_t = 500)]
    pub replicates: usize,
    #[command(flatten)]
    pub segmentation: SegmentationOpts,
    #[command(flatten)]
    pub seed: Seed,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Args, Debug)]
pub struct TestArgs {
    #[command(flatten)]
    pub inputs: Inputs,
    /// `bp-overlap` (cross-paired null) or `region-overlap` (double bootstrap).
    #[arg(long, default_value = "bp-overlap", value_parser = parse_statistic)]
    pub statistic: StatisticKind,
    /// Block length; chosen from the grid when absent.
    #[arg(long)]
    pub block_length: Option<u64>,
    #[arg(long, default_value_t = 1000)]
    pub replicates: usize,
    #[arg(long, default_value = "conditional", value_parser = parse_formulation)]
    pub formulation: Formulation,
    /// Outer block length of the double bootstrap, in block lengths.
    #[arg(long, default_value_t = 5.0)]
    pub outer_multiplier: f64,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    #[arg(long)]
    pub two_sided: bool,
    /// Keep the two blocks of each cross-paired draw disjoint.
    #[arg(long)]
    pub strict_disjoint: bool,
    #[arg(long, default_value_t = 0.5)]
    pub rho: f64,
    #[arg(long, default_value_t = 8)]
    pub grid_steps: u32,
    #[command(flatten)]
    pub segmentation: SegmentationOpts,
    #[command(flatten)]
    pub seed: Seed,
    #[command(flatten)]
    pub output: Output,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Model {
    /// Two 10 kb Neyman-Scott regions with cluster rates 0.01 and 0.02.
    TwoRegion,
    /// One 5 Mb Neyman-Scott region of broad peaks.
    BroadPeaks,
    /// Markov sequence with pattern sites as A and dense sites as B.
    Markov,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    #[arg(value_enum)]
    pub model: Model,
    /// Neyman-Scott regions as `length:rate:cluster_size:offset_mean:feature_len_mean`,
    /// comma separated; overrides the model preset.
    #[arg(long)]
    pub regions: Option<String>,
    /// Bases per unit of the cluster rate.
    #[arg(long)]
    pub rate_unit: Option<f64>,
    #[arg(long, default_value_t = 10_000)]
    pub length: usize,
    #[arg(long, default_value_t = 0.9)]
    pub p0: f64,
    #[arg(long, default_value_t = 20)]
    pub window: usize,
    /// Draw A and B from independent Markov sequences.
    #[arg(long)]
    pub independent: bool,
    #[command(flatten)]
    pub seed: Seed,
    /// Directory receiving the tracks, genome, truth and manifest.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Study {
    Sim1,
    Sim2a,
    Sim2b,
    Size,
}

#[derive(Args, Debug)]
pub struct ReproduceArgs {
    #[arg(value_enum)]
    pub study: Study,
    /// Reduced sizes for a fast smoke run.
    #[arg(long)]
    pub quick: bool,
    /// Overrides the study's fixed seed.
    #[arg(long)]
    pub seed: Option<u64>,
    #[command(flatten)]
    pub output: Output,
}

fn parse_signal(s: &str) -> Result<Signal, String> {
    s.parse().map_err(|e: gsc::GscError| e.to_string())
}

fn parse_statistic(s: &str) -> Result<StatisticKind, String> {
    s.parse().map_err(|e: gsc::GscError| e.to_string())
}

fn parse_formulation(s: &str) -> Result<Formulation, String> {
    s.parse().map_err(|e: gsc::GscError| e.to_string())
}
