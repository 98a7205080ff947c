//! `bbsrc`: feature extraction, selection, training, calibration,
//! cross-validation and report comparison for texture classification.
//!
//! Exit codes: 0 success, 1 invalid input or configuration, 2 runtime or
//! data error.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use bbsrc::ensemble::DecisionFunction;
use bbsrc::featsel::SelectionMethod;
use bbsrc::sparse::Method;
use clap::{Args, Parser, Subcommand};

use config::{Pipeline, RunConfig};

#[derive(Parser)]
#[command(
    name = "bbsrc",
    version,
    about = "Block-based sparse representation texture classification"
)]
struct Cli {
    /// Worker threads; defaults to the available cores.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

/// Settings shared by every subcommand; each overrides the config file.
#[derive(Args, Clone, Default)]
struct Common {
    /// TOML run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Dataset manifest (`path,label` CSV).
    #[arg(long)]
    manifest: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pipeline: Option<Pipeline>,
    /// Square block size for the block ensemble.
    #[arg(long)]
    block: Option<usize>,
    #[arg(long, value_enum)]
    solver: Option<SolverArg>,
    #[arg(long, value_enum)]
    decision: Option<DecisionArg>,
    #[arg(long, value_enum)]
    selection: Option<SelectionArg>,
    /// Undersampling fractions for SRC, e.g. `1/4`; repeatable.
    #[arg(long)]
    keep: Vec<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    positive_class: Option<usize>,
    /// PDS value at the smallest calibration score.
    #[arg(long)]
    pds_min: Option<f64>,
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum SolverArg {
    Mp,
    Omp,
    Bpdn,
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum DecisionArg {
    Bbmap,
    BbllR,
    BbllS,
}

impl DecisionArg {
    fn function(self) -> DecisionFunction {
        match self {
            DecisionArg::Bbmap => DecisionFunction::Bbmap,
            DecisionArg::BbllR => DecisionFunction::BbllR,
            DecisionArg::BbllS => DecisionFunction::BbllS,
        }
    }
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum SelectionArg {
    None,
    CfsBestFirst,
    CfsGenetic,
    InfoGain,
}

#[derive(Subcommand)]
enum Command {
    /// Generate the synthetic two-class texture set with its manifest.
    Synth {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        per_class: Option<usize>,
        #[arg(long)]
        size: Option<usize>,
    },
    /// Compute texture features for every manifest image into a CSV.
    Extract {
        #[command(flatten)]
        common: Common,
    },
    /// Select features from a feature CSV; writes one name per line.
    Select {
        #[command(flatten)]
        common: Common,
        /// Feature CSV from `extract`.
        #[arg(long)]
        features: PathBuf,
    },
    /// Train the configured pipeline on the whole manifest.
    Train {
        #[command(flatten)]
        common: Common,
        /// Feature CSV for texture-nb; extracted from the images when absent.
        #[arg(long)]
        features: Option<PathBuf>,
    },
    /// Classify images with a trained model.
    Classify {
        #[command(flatten)]
        common: Common,
        /// Directory written by `train`.
        #[arg(long)]
        model: PathBuf,
        /// Individual images instead of a manifest.
        #[arg(long)]
        image: Vec<PathBuf>,
    },
    /// Leave-one-out cross-validation with per-sample, ROC and summary output.
    Crossval {
        #[command(flatten)]
        common: Common,
        /// Feature CSV for texture-nb; extracted from the images when absent.
        #[arg(long)]
        features: Option<PathBuf>,
    },
    /// Fit τ* and the PDS sigmoid; writes the TPR/TNR-vs-τ and PDS curves.
    Calibrate {
        #[command(flatten)]
        common: Common,
        /// CSV with columns `score,positive` (1 or 0).
        #[arg(long, conflicts_with = "model")]
        scores: Option<PathBuf>,
        /// Block-ensemble model; scores come from nested leave-one-out on
        /// `--manifest`, which must be its training set in training order.
        #[arg(long)]
        model: Option<PathBuf>,
    },
    /// DeLong test between two cross-validation reports.
    Compare { report_a: PathBuf, report_b: PathBuf },
}

impl Common {
    fn resolve(&self) -> bbsrc::Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        if let Some(m) = &self.manifest {
            cfg.manifest = Some(m.clone());
        }
        if let Some(o) = &self.out {
            cfg.output = o.clone();
        }
        if let Some(p) = self.pipeline {
            cfg.pipeline = p;
        }
        if let Some(b) = self.block {
            cfg.ensemble.block_width = b;
            cfg.ensemble.block_height = b;
        }
        if let Some(s) = self.solver {
            let method = match s {
                SolverArg::Mp => Method::Mp,
                SolverArg::Omp => Method::Omp,
                SolverArg::Bpdn => Method::Bpdn,
            };
            cfg.ensemble.solver.method = method;
            cfg.src.solver.method = method;
        }
        if let Some(d) = self.decision {
            cfg.ensemble.decision = d.function();
        }
        if let Some(s) = self.selection {
            cfg.selection.method = match s {
                SelectionArg::None => SelectionMethod::None,
                SelectionArg::CfsBestFirst => SelectionMethod::CfsBestFirst,
                SelectionArg::CfsGenetic => SelectionMethod::CfsGenetic,
                SelectionArg::InfoGain => SelectionMethod::InfoGain,
            };
        }
        if !self.keep.is_empty() {
            cfg.src.keep = self.keep.clone();
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(p) = self.positive_class {
            cfg.positive_class = p;
        }
        if let Some(p) = self.pds_min {
            cfg.ensemble.pds_min = p;
        }
        cfg.finalize();
        cfg.validate()?;
        Ok(cfg)
    }
}

fn run(cli: Cli) -> bbsrc::Result<()> {
    match cli.command {
        Command::Synth {
            common,
            per_class,
            size,
        } => {
            let mut cfg = common.resolve()?;
            if let Some(n) = per_class {
                cfg.synth.per_class = n;
            }
            if let Some(s) = size {
                cfg.synth.size = s;
            }
            commands::synth(&cfg)
        }
        Command::Extract { common } => commands::extract(&common.resolve()?),
        Command::Select { common, features } => commands::select(&common.resolve()?, &features),
        Command::Train { common, features } => commands::train(&common.resolve()?, features.as_deref()),
        Command::Classify { common, model, image } => {
            let decision = common.decision.map(DecisionArg::function);
            commands::classify(&common.resolve()?, &model, &image, decision)
        }
        Command::Crossval { common, features } => commands::crossval(&common.resolve()?, features.as_deref()),
        Command::Calibrate { common, scores, model } => {
            commands::calibrate(&common.resolve()?, scores.as_deref(), model.as_deref())
        }
        Command::Compare { report_a, report_b } => commands::compare(&report_a, &report_b),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be positive");
            return ExitCode::from(1);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_validation() { 1 } else { 2 })
        }
    }
}
