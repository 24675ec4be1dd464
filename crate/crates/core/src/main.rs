use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use logplace::corpus::KeywordGroups;
use logplace::dataset::write_dataset;
use logplace::experiment::{cmd_experiment, cmd_extract, cmd_report, cmd_scan, cmd_transfer, ExperimentConfig};
use logplace::pipeline::ExtractOptions;
use logplace::provenance::{content_hash, to_json, Provenance};
use logplace::{Error, Result};

/// Learn where Java methods should log.
#[derive(Debug, Parser)]
#[command(name = "logplace", version)]
struct Cli {
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct ExtractFlags {
    /// Project name used to prefix method identities.
    #[arg(long)]
    project: Option<String>,
    /// Anchor the log patterns on word boundaries (`dialog` no longer matches).
    #[arg(long)]
    strict_log_regex: bool,
    /// TOML file with `test`, `documentation` and `build` keyword lists.
    #[arg(long)]
    filters: Option<PathBuf>,
    /// Directory to receive the log-free copies of each file.
    #[arg(long)]
    shadow: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct RunFlags {
    /// Experiment configuration (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Override the configured seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory (overrides `output_dir`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Keep going when the residual log ratio is above the limit.
    #[arg(long)]
    force: bool,
    /// Anchor the log patterns on word boundaries (`dialog` no longer matches).
    #[arg(long)]
    strict_log_regex: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Categorize files and summarize log usage of a source tree.
    Scan {
        root: PathBuf,
        /// Write the JSON report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        flags: ExtractFlags,
    },
    /// Remove logs and write the labelled metric dataset.
    Extract {
        root: PathBuf,
        /// Dataset CSV path; the removal report goes next to it.
        #[arg(long)]
        out: PathBuf,
        /// Seed recorded in the provenance header.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write the dataset even if the residual log ratio is too high.
        #[arg(long)]
        force: bool,
        #[command(flatten)]
        flags: ExtractFlags,
    },
    /// Within-corpus learner and sampling comparison.
    Experiment(RunFlags),
    /// Cross-project evaluation against a fixed test split.
    Transfer(RunFlags),
    /// Re-render the text tables of an output directory.
    Report {
        dir: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn extract_options(flags: &ExtractFlags) -> Result<ExtractOptions> {
    let keywords = match &flags.filters {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            toml::from_str::<KeywordGroups>(&text).map_err(|e| Error::config(format!("{}: {e}", path.display())))?
        }
        None => KeywordGroups::default(),
    };
    Ok(ExtractOptions {
        keywords,
        strict_log_regex: flags.strict_log_regex,
        project: flags.project.clone(),
        shadow_dir: flags.shadow.clone(),
    })
}

fn options_hash(options: &ExtractOptions) -> String {
    let canonical = serde_json::json!({
        "keywords": options.keywords,
        "strict_log_regex": options.strict_log_regex,
        "project": options.project,
    });
    content_hash(canonical.to_string().as_bytes())
}

fn write_out(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => {
            if let Some(parent) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
            }
            std::fs::write(p, text).map_err(|e| Error::io(p, e))
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn load_config(flags: &RunFlags) -> Result<(ExperimentConfig, PathBuf)> {
    let mut cfg = ExperimentConfig::load(&flags.config)?;
    if let Some(seed) = flags.seed {
        cfg.seed = seed;
    }
    if flags.force {
        cfg.force = true;
    }
    if flags.strict_log_regex {
        cfg.filters.strict_log_regex = true;
    }
    let out = flags
        .out
        .clone()
        .or_else(|| cfg.output_dir.clone())
        .ok_or_else(|| Error::config("no output directory: set output_dir or pass --out"))?;
    cfg.validate()?;
    Ok((cfg, out))
}

fn run(cli: Cli) -> Result<()> {
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            return Err(Error::config("--jobs must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| Error::Internal(e.to_string()))?;
    }
    match cli.command {
        Command::Scan { root, out, flags } => {
            let options = extract_options(&flags)?;
            let scan = cmd_scan(&root, &options, Provenance::new(options_hash(&options), 0))?;
            for w in &scan.warnings {
                eprintln!("{w}");
            }
            write_out(out.as_deref(), &to_json(&scan))
        }
        Command::Extract {
            root,
            out,
            seed,
            force,
            flags,
        } => {
            let options = extract_options(&flags)?;
            let provenance = Provenance::new(options_hash(&options), seed);
            let removal_path = out.with_extension("removal.json");
            let (summary, dataset) = cmd_extract(&root, &options, provenance, force)?;
            for w in &summary.warnings {
                eprintln!("{w}");
            }
            write_out(Some(&removal_path), &to_json(&summary))?;
            write_dataset(&dataset?, &out)?;
            eprintln!(
                "{} methods ({} logged) from {} files; residual log ratio {:.4}",
                summary.methods, summary.logged_methods, summary.files, summary.residual_ratio
            );
            Ok(())
        }
        Command::Experiment(flags) => {
            let (cfg, out) = load_config(&flags)?;
            let bundle = cmd_experiment(&cfg, &out)?;
            for c in bundle.suite.cells.iter().filter(|c| c.error.is_some()) {
                eprintln!(
                    "{} + {} failed: {}",
                    c.algorithm,
                    c.sampler.as_str(),
                    c.error.as_deref().unwrap_or_default()
                );
            }
            eprintln!("wrote {}", out.join("reports").join("experiment.txt").display());
            Ok(())
        }
        Command::Transfer(flags) => {
            let (cfg, out) = load_config(&flags)?;
            cmd_transfer(&cfg, &out)?;
            eprintln!("wrote {}", out.join("reports").join("transfer.txt").display());
            Ok(())
        }
        Command::Report { dir, out } => write_out(out.as_deref(), &cmd_report(&dir)?),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
