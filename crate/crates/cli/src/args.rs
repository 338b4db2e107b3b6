use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "qsmote", version, about = "Swap-test oversampling of minority classes")]
pub struct Cli {
    /// Worker threads; 0 uses every core. Results do not depend on it.
    #[arg(long, global = true, env = "QSMOTE_THREADS", default_value_t = 0)]
    pub threads: usize,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Clean, bin and encode a raw CSV as described by the config.
    Preprocess(PreprocessArgs),
    /// Add synthetic minority rows until the target share is reached.
    Smote(SmoteArgs),
    /// Score a KNN classifier over a grid of targets, or on an augmented CSV.
    Evaluate(EvaluateArgs),
}

#[derive(Debug, Args)]
pub struct Io {
    /// Run file: the column config plus optional [smote] and [evaluate] tables.
    #[arg(long, short)]
    pub config: PathBuf,

    /// Output CSV.
    #[arg(long, short)]
    pub output: PathBuf,

    /// Run manifest path [default: <output>.manifest.json].
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PreprocessArgs {
    /// Raw input CSV.
    #[arg(long, short)]
    pub input: PathBuf,

    #[command(flatten)]
    pub io: Io,
}

#[derive(Debug, Args)]
pub struct SmoteArgs {
    /// Raw input CSV; it is preprocessed with the config first.
    #[arg(long, short)]
    pub input: PathBuf,

    #[command(flatten)]
    pub io: Io,

    /// Target minority share in percent, exclusive of 0 and 100.
    #[arg(long)]
    pub target_percent: Option<f64>,

    /// Split factor dividing the drawn rotation angle.
    #[arg(long)]
    pub sf: Option<f64>,

    /// Measurement shots per swap test; 0 reads exact probabilities.
    #[arg(long)]
    pub shots: Option<u64>,

    /// Seed for every random draw.
    #[arg(long)]
    pub seed: Option<u64>,

    /// Detect angular outliers and boost sparse outlier bins.
    #[arg(long)]
    pub aol: bool,

    /// Outlier histogram bins used for boosting.
    #[arg(long)]
    pub bins: Option<usize>,

    /// Bins of the angular-distance plot written next to the output.
    #[arg(long, default_value_t = 30)]
    pub plot_bins: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AolModes {
    Off,
    On,
    Both,
}

#[derive(Debug, Args)]
#[command(group = clap::ArgGroup::new("source").required(true).args(["input", "augmented"]))]
pub struct EvaluateArgs {
    /// Raw CSV; runs the baseline and every grid target on a train split.
    #[arg(long, short)]
    pub input: Option<PathBuf>,

    /// Augmented CSV written by `smote`; scored as a single row.
    #[arg(long, conflicts_with_all = ["grid", "aol", "assert_trend"])]
    pub augmented: Option<PathBuf>,

    #[command(flatten)]
    pub io: Io,

    /// Target percents, comma separated; `none` for the baseline only or
    /// `default` for 30,32,34,36,38,40,42,45,48,50.
    #[arg(long)]
    pub grid: Option<String>,

    /// Which AOL settings to run at each target.
    #[arg(long, value_enum)]
    pub aol: Option<AolModes>,

    /// Neighbours voting in the KNN classifier.
    #[arg(long)]
    pub k: Option<usize>,

    /// Test share of the stratified split, in (0, 1).
    #[arg(long)]
    pub split: Option<f64>,

    /// Seed for the split and for synthesis.
    #[arg(long)]
    pub seed: Option<u64>,

    /// Split factor used by synthesis.
    #[arg(long)]
    pub sf: Option<f64>,

    /// Outlier histogram bins used for boosting.
    #[arg(long)]
    pub bins: Option<usize>,

    /// Exit with status 1 unless F1 at the largest target beats the baseline.
    #[arg(long)]
    pub assert_trend: bool,
}
