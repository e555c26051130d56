use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use hotspot::experiment::RunConfig;
use hotspot::ftp::RowMode;
use hotspot::harness::{self, OutputFormat, RunContext};

#[derive(Parser)]
#[command(name = "hotspot", version, about = "Layout hotspot detection with synthetic database enhancement")]
struct Cli {
    /// Run config (JSON or TOML); built-in defaults otherwise.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the config's master seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum Rows {
    Anchor,
    All,
}

#[derive(Subcommand)]
enum Command {
    /// Generate the seed layouts and check them against the rule deck.
    GenCorpus,
    /// Label training and test snippets with the lithography oracle.
    Label,
    /// Generate synthetic variants of the training hotspots and the HTC set.
    Enhance,
    /// Write feature rows and the schema descriptor.
    Featurize {
        #[arg(long, value_enum, default_value_t = Rows::Anchor)]
        rows: Rows,
    },
    /// Grid-search and train a pipeline; saved as model.json.
    Train {
        /// Train on the original patterns only.
        #[arg(long)]
        baseline: bool,
    },
    /// Evaluate a saved pipeline on ETC and HTC.
    Evaluate {
        #[arg(long)]
        model: PathBuf,
    },
    /// Enhanced versus non-enhanced comparison.
    Experiment,
    /// HTC error against the number of synthetic patterns per hotspot.
    Sweep,
    /// Metrics with and without PCA.
    PcaAblation,
    /// Clustered (k-means + per-cluster SVM) variant of the comparison.
    ClusterExperiment,
}

fn run(cli: Cli) -> hotspot::Result<Vec<PathBuf>> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| hotspot::Error::Config(format!("threads: {e}")))?;
    }
    let format = match cli.format {
        Format::Csv => OutputFormat::Csv,
        Format::Json => OutputFormat::Json,
    };
    let ctx = RunContext::new(cfg, cli.out, format)?;
    match cli.command {
        Command::GenCorpus => harness::gen_corpus(&ctx),
        Command::Label => harness::label(&ctx),
        Command::Enhance => harness::enhance(&ctx),
        Command::Featurize { rows } => {
            harness::featurize(&ctx, if matches!(rows, Rows::All) { RowMode::AllFragments } else { RowMode::Anchor })
        }
        Command::Train { baseline } => harness::train(&ctx, baseline),
        Command::Evaluate { model } => harness::evaluate(&ctx, &model),
        Command::Experiment => harness::experiment(&ctx).map(|(c, w)| {
            eprintln!("matched HTC false-positive ratio (enhanced / non-enhanced): {:.3}", c.matched_fp_ratio());
            w
        }),
        Command::Sweep => harness::sweep(&ctx),
        Command::PcaAblation => harness::pca_ablation(&ctx),
        Command::ClusterExperiment => harness::cluster_experiment(&ctx),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(files) => {
            for f in files {
                println!("{}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
