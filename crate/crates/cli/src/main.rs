//! `policykit`: batch front end for extraction, structuring, training and
//! evaluation. Every output goes to a file; stdout carries a short summary.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};

use config::{parse_modes, parse_seeds, parse_types, PipelineConfig, CONFIG_ENV};
use policykit::corpus::SplitMode;

#[derive(Parser, Debug)]
#[command(name = "policykit", version, about = "Privacy-policy structuring and GDPR concept classification")]
struct Cli {
    /// key=value config file; flags override its values.
    #[arg(long, global = true, env = CONFIG_ENV)]
    config: Option<PathBuf>,
    /// Worker threads (default: all cores). Output order never depends on it.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// More log output on stderr (-v, -vv).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Saved HTML pages -> PP-XML skeletons plus a validation report.
    Extract {
        /// HTML files or directories holding them.
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        /// Output directory for `.ppxml` files, `.clean.html` audit copies and
        /// `extract_report.tsv`.
        #[arg(long, short)]
        out: PathBuf,
        #[command(flatten)]
        shared: Shared,
    },
    /// Train and cross-validate the title/paragraph block classifier.
    Structure {
        /// Saved pages named `<doc-id>.html`, labelled against `--gold`.
        #[arg(long, requires = "gold", conflicts_with = "samples")]
        pages: Option<PathBuf>,
        /// Gold `.ppxml` files matching `--pages`.
        #[arg(long)]
        gold: Option<PathBuf>,
        /// Block-sample file (`class<TAB>v1,...,v20`).
        #[arg(long, required_unless_present = "pages")]
        samples: Option<PathBuf>,
        /// Also write the labelled samples here.
        #[arg(long)]
        samples_out: Option<PathBuf>,
        #[command(flatten)]
        shared: Shared,
    },
    /// Train one model bundle per feature type on one split.
    Train(#[command(flatten)] Shared),
    /// Score the bundles written by `train` on the split's test side.
    Eval(#[command(flatten)] Shared),
    /// Types x modes x seeds comparison table.
    Compare(#[command(flatten)] Shared),
    /// Per-concept document coverage of a labelled corpus.
    Stats {
        /// Count only exact labels, not labels of descendants.
        #[arg(long)]
        exact: bool,
        #[command(flatten)]
        shared: Shared,
    },
    /// Inter-annotator agreement between two labellings of the same documents.
    Kappa {
        first: PathBuf,
        second: PathBuf,
        #[command(flatten)]
        shared: Shared,
    },
}

/// Flags shared by all subcommands; each overrides the config key of the same name.
#[derive(Args, Debug, Default)]
struct Shared {
    #[arg(long)]
    corpus: Option<PathBuf>,
    #[arg(long)]
    taxonomy: Option<PathBuf>,
    #[arg(long)]
    keywords: Option<PathBuf>,
    #[arg(long)]
    embeddings: Option<PathBuf>,
    #[arg(long)]
    block_model: Option<PathBuf>,
    #[arg(long)]
    model_dir: Option<PathBuf>,
    #[arg(long)]
    report_dir: Option<PathBuf>,
    #[arg(long)]
    r_h: Option<f64>,
    #[arg(long)]
    min_policy_chars: Option<usize>,
    #[arg(long, value_parser = config::parse_mode)]
    mode: Option<SplitMode>,
    #[arg(long)]
    seed: Option<u64>,
    /// Comma-separated seeds for `compare`.
    #[arg(long)]
    seeds: Option<String>,
    #[arg(long)]
    n_test: Option<usize>,
    #[arg(long)]
    test_fraction: Option<f64>,
    /// Comma-separated feature types, 1-12.
    #[arg(long)]
    types: Option<String>,
    /// Comma-separated split modes for `compare`.
    #[arg(long)]
    modes: Option<String>,
    #[arg(long)]
    min_pos: Option<usize>,
    #[arg(long)]
    min_support: Option<u64>,
}

impl Shared {
    fn apply(&self, cfg: &mut PipelineConfig) -> Result<()> {
        macro_rules! put {
            ($($flag:ident => $field:ident),*) => {$(
                if let Some(v) = &self.$flag {
                    cfg.$field = v.clone().into();
                }
            )*};
        }
        put!(corpus => corpus_dir, taxonomy => taxonomy, keywords => keywords, embeddings => embeddings,
             block_model => block_model, model_dir => model_dir, report_dir => report_dir, r_h => r_h,
             min_policy_chars => min_policy_chars, mode => split_mode, seed => seed, n_test => n_test,
             test_fraction => test_fraction, min_pos => min_pos, min_support => min_support);
        if let Some(s) = &self.seeds {
            cfg.seeds = parse_seeds(s)?;
        }
        if let Some(s) = &self.types {
            cfg.types = parse_types(s)?;
        }
        if let Some(s) = &self.modes {
            cfg.modes = parse_modes(s)?;
        }
        Ok(())
    }
}

fn run(cli: Cli) -> Result<bool> {
    if let Some(n) = cli.jobs {
        rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global()?;
    }
    let mut cfg = match &cli.config {
        Some(p) => PipelineConfig::load(p)?,
        None => PipelineConfig::default(),
    };
    let shared = match &cli.command {
        Command::Extract { shared, .. }
        | Command::Structure { shared, .. }
        | Command::Stats { shared, .. }
        | Command::Kappa { shared, .. } => shared,
        Command::Train(s) | Command::Eval(s) | Command::Compare(s) => s,
    };
    shared.apply(&mut cfg)?;
    cfg.check_inputs()?;
    match &cli.command {
        Command::Extract { inputs, out, .. } => commands::extract(&cfg, inputs, out),
        Command::Structure { pages, gold, samples, samples_out, .. } => {
            commands::structure(&cfg, pages.as_deref(), gold.as_deref(), samples.as_deref(), samples_out.as_deref())
        }
        Command::Train(_) => commands::train(&cfg),
        Command::Eval(_) => commands::eval(&cfg),
        Command::Compare(_) => commands::compare(&cfg),
        Command::Stats { exact, .. } => commands::stats(&cfg, !exact),
        Command::Kappa { first, second, .. } => commands::kappa(&cfg, first, second),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
