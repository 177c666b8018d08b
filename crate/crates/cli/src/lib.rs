//! The `vcf` command line: pipeline stages as subcommands over one config
//! file and one artifact directory.

pub mod config;
pub mod error;
pub mod github;
pub mod lock;
pub mod mine;
pub mod stages;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use vcf_core::dataset::{self, SubsetName};

pub use config::PipelineConfig;
pub use error::{CliError, CliResult};
pub use stages::Pipeline;

#[derive(Debug, Parser)]
#[command(name = "vcf", version, about = "Verilog corpus curation and autocompletion evaluation")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalArgs {
    /// TOML pipeline config; defaults apply when omitted.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Artifact directory.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    /// Worker threads for parallel stages (default: all cores).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Use predecessor artifacts even when their config fingerprint differs.
    #[arg(long, global = true)]
    pub force: bool,
    /// Override a config key, e.g. `--set lm.order=3`. Repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
    /// Overrides `seed`.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Overrides `ingest.offline_root`.
    #[arg(long, global = true)]
    pub offline_root: Option<String>,
    /// Sets `dedup.mode = "exact"`.
    #[arg(long, global = true, conflicts_with = "accelerated")]
    pub exact: bool,
    /// Sets `dedup.mode = "accelerated"`.
    #[arg(long, global = true)]
    pub accelerated: bool,
    /// Sets `ingest.exclude_forks = true`.
    #[arg(long, global = true, conflicts_with = "include_forks")]
    pub exclude_forks: bool,
    /// Sets `ingest.exclude_forks = false`.
    #[arg(long, global = true)]
    pub include_forks: bool,
    /// Sets `split.split_by_repo = true`.
    #[arg(long, global = true)]
    pub split_by_repo: bool,
}

#[derive(Debug, Clone, Args, Default)]
pub struct SubsetArgs {
    /// Training subsets to process (default: the config's list). Repeatable.
    #[arg(long = "subset", value_parser = parse_subset)]
    pub subsets: Vec<SubsetName>,
}

fn parse_subset(s: &str) -> Result<SubsetName, String> {
    SubsetName::parse(s).ok_or_else(|| {
        let names: Vec<&str> = SubsetName::ALL.iter().map(|n| n.as_str()).collect();
        format!("unknown subset `{s}` (expected one of {})", names.join(", "))
    })
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Discover repositories on the hosting service and clone them into the offline corpus.
    Mine {
        /// Skip cloning; only write the repository list.
        #[arg(long)]
        no_clone: bool,
    },
    /// Collect candidate files from the offline corpus.
    Ingest,
    /// Drop autogenerated, license-conflicting, oversized and empty files.
    Filter,
    /// Remove exact and near duplicates.
    Dedup,
    /// Extract module and function snippets.
    Extract,
    /// Assign splits and tag parsability.
    Split,
    /// Write training subsets as JSONL, CSV and token chunks.
    Export(SubsetArgs),
    /// Train n-gram models on exported subsets.
    TrainLm(SubsetArgs),
    /// Greedily complete test definitions; with --definition, complete one and print it.
    Complete {
        #[command(flatten)]
        subsets: SubsetArgs,
        #[arg(long)]
        definition: Option<String>,
    },
    /// Score completions and write reports.
    Evaluate {
        #[command(flatten)]
        subsets: SubsetArgs,
        /// External predictions JSONL ({snippet_id, completion}) to score instead.
        #[arg(long)]
        predictions: Option<PathBuf>,
        /// Model name for external predictions.
        #[arg(long, default_value = "external")]
        model_id: String,
        /// Training-data label for external predictions.
        #[arg(long, default_value = "-")]
        label: String,
    },
    /// Print dataset statistics from the split manifest.
    Stats {
        #[arg(long)]
        json: bool,
    },
    /// Run every offline stage from ingest through evaluate.
    RunAll,
    /// Print the effective config and its fingerprint.
    Config,
}

/// Loads the config and applies flag overrides in order: `--set` first,
/// then the dedicated flags.
pub fn resolve_config(g: &GlobalArgs) -> CliResult<PipelineConfig> {
    let mut cfg = match &g.config {
        Some(p) => PipelineConfig::load(p)?,
        None => PipelineConfig::default(),
    };
    for o in &g.overrides {
        let (k, v) = o.split_once('=').ok_or_else(|| CliError::Validation(format!("--set expects KEY=VALUE, got `{o}`")))?;
        cfg.set(k.trim(), v.trim())?;
    }
    if let Some(s) = g.seed {
        cfg.seed = s;
    }
    if let Some(r) = &g.offline_root {
        cfg.ingest.offline_root = r.clone();
    }
    if g.exact {
        cfg.dedup.mode = vcf_core::dedup::DedupMode::Exact;
    }
    if g.accelerated {
        cfg.dedup.mode = vcf_core::dedup::DedupMode::Accelerated;
    }
    if g.exclude_forks {
        cfg.ingest.exclude_forks = true;
    }
    if g.include_forks {
        cfg.ingest.exclude_forks = false;
    }
    if g.split_by_repo {
        cfg.split.split_by_repo = true;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn pick(args: &SubsetArgs, default: &[SubsetName]) -> Vec<SubsetName> {
    if args.subsets.is_empty() {
        default.to_vec()
    } else {
        args.subsets.clone()
    }
}

/// Runs one command and returns what it prints on stdout.
pub fn execute(cli: &Cli) -> CliResult<String> {
    let cfg = resolve_config(&cli.global)?;
    if let Command::Config = cli.command {
        return Ok(format!("# fingerprint {}\n{}", cfg.fingerprint(), cfg.to_toml()));
    }
    let _lock = lock::DirLock::acquire(&cli.global.out)?;
    let p = Pipeline::new(cfg, &cli.global.out, cli.global.force)?;
    let body = || -> CliResult<String> {
        match &cli.command {
            Command::Mine { no_clone } => mine::mine(&p, !no_clone).map(|_| String::new()),
            Command::Ingest => p.ingest().map(|_| String::new()),
            Command::Filter => p.filter().map(|_| String::new()),
            Command::Dedup => p.dedup().map(|_| String::new()),
            Command::Extract => p.extract().map(|_| String::new()),
            Command::Split => p.split().map(|_| String::new()),
            Command::Export(s) => p.export(&pick(s, &p.cfg.export.subsets)).map(|_| String::new()),
            Command::TrainLm(s) => p.train_lm(&pick(s, &p.cfg.lm.subsets)).map(|_| String::new()),
            Command::Complete { subsets, definition: Some(def) } => {
                let subset = pick(subsets, &p.cfg.lm.subsets)
                    .first()
                    .copied()
                    .ok_or_else(|| CliError::Validation("no subset selected".into()))?;
                let result = p.load_model(subset)?.complete_greedy(def, p.cfg.lm.max_tokens);
                Ok(serde_json::to_string(&result).expect("completion serializes") + "\n")
            }
            Command::Complete { subsets, definition: None } => {
                p.complete(&pick(subsets, &p.cfg.lm.subsets)).map(|_| String::new())
            }
            Command::Evaluate { predictions: Some(path), model_id, label, .. } => {
                p.evaluate_external(path, model_id, label)
            }
            Command::Evaluate { subsets, predictions: None, .. } => p.evaluate(&pick(subsets, &p.cfg.lm.subsets)),
            Command::Stats { json } => {
                let st = dataset::stats(&p.manifest()?);
                Ok(if *json {
                    serde_json::to_string_pretty(&st).expect("stats serialize") + "\n"
                } else {
                    st.render()
                })
            }
            Command::RunAll => p.run_all(),
            Command::Config => unreachable!("handled above"),
        }
    };
    match cli.global.jobs {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(error::runtime)?
            .install(body),
        None => body(),
    }
}

/// Installs the JSON stderr logger; `VCF_LOG` sets the filter (default `info`).
pub fn init_logging() {
    let filter = tracing_subscriber::EnvFilter::try_from_env("VCF_LOG")
        .unwrap_or_else(|_| tracing_subscriber::EnvFilter::new("info"));
    let _ = tracing_subscriber::fmt()
        .json()
        .with_env_filter(filter)
        .with_writer(std::io::stderr)
        .try_init();
}

/// Parses `args`, runs the command, prints its output and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(out) => {
            print!("{out}");
            0
        }
        Err(e) => {
            tracing::error!(error = %e, "command failed");
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
