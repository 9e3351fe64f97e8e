//! The `delm` command line.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use delm_core::explore::{compare_policies, explore, Ablation, ExploreError};
use delm_core::icc::LauncherStatus;
use delm_core::manifest::{bind_deep_links, extract_deep_links, ManifestError};
use delm_core::metrics::{best_of, summarize, tally_cases};
use delm_core::triage::{classify_all, TriageVerdict, DEFAULT_DEPTH_LIMIT};
use delm_core::{ExplorationConfig, ExplorationReport, Policy};
use thiserror::Error;

use crate::loader::{corpus_apps, fixtures_dir, load_app, load_json, load_manifest, LoadError};
use crate::manifest_xml::serialize_manifest;
use crate::output::{emit_json, emit_one, emit_table, Format, UnsupportedFormat};

#[derive(Debug, Parser)]
#[command(
    name = "delm",
    version,
    about = "Deep-link guided GUI exploration of simulated apps"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PolicyArg {
    Random,
    Guided,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AblationArg {
    Wacm,
    Wdld,
    Wgea,
}

impl From<AblationArg> for Ablation {
    fn from(a: AblationArg) -> Self {
        match a {
            AblationArg::Wacm => Ablation::Wacm,
            AblationArg::Wdld => Ablation::Wdld,
            AblationArg::Wgea => Ablation::Wgea,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// List the deep links a manifest already declares.
    Analyze {
        manifest: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Add a deep link to every activity that lacks one.
    Bind {
        manifest: PathBuf,
        #[arg(long, default_value = "delm")]
        scheme: String,
        #[arg(long, default_value = "app")]
        host_prefix: String,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Print the activity launcher table of an app.
    Launchers {
        app_dir: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Print the activity transition graph in DOT.
    Atg {
        app_dir: PathBuf,
        /// Add the dynamic edges discovered by an exploration report.
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Run one exploration and write its report as JSON.
    Explore {
        app_dir: PathBuf,
        #[arg(long, value_enum, default_value = "guided")]
        policy: PolicyArg,
        #[arg(long, default_value_t = 2000)]
        budget: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, value_delimiter = ',')]
        ablate: Vec<AblationArg>,
        /// Launch deep links without checking launcher preconditions.
        #[arg(long)]
        no_context_check: bool,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Compare policies and ablations over every app of a corpus.
    Bench {
        /// Defaults to $DELM_FIXTURES or the bundled fixtures.
        corpus: Option<PathBuf>,
        #[arg(long, default_value_t = 2000)]
        budget: u64,
        #[arg(long, value_delimiter = ',', default_value = "1,2,3")]
        seeds: Vec<u64>,
        #[arg(long, default_value_t = DEFAULT_DEPTH_LIMIT)]
        depth: usize,
        /// Keep only the best seed per fixture and policy.
        #[arg(long)]
        best: bool,
        /// json, csv or tsv; defaults to the output extension, else csv.
        #[arg(long)]
        format: Option<String>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Classify the crashes of a report as true or false positives.
    Triage {
        app_dir: PathBuf,
        report: PathBuf,
        #[arg(long, default_value_t = DEFAULT_DEPTH_LIMIT)]
        depth: usize,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Coverage summary of a report.
    Summarize {
        app_dir: PathBuf,
        report: PathBuf,
        /// Verdicts from `triage`; computed when absent.
        #[arg(long)]
        verdicts: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_DEPTH_LIMIT)]
        depth: usize,
        /// Print passed/total check cases per category instead.
        #[arg(long)]
        cases: bool,
        #[arg(long)]
        format: Option<String>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Load(#[from] LoadError),
    #[error(transparent)]
    Manifest(#[from] ManifestError),
    #[error(transparent)]
    Format(#[from] UnsupportedFormat),
    #[error(transparent)]
    Explore(#[from] ExploreError),
    #[error("no apps found under {0}")]
    EmptyCorpus(PathBuf),
    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Write { .. } => 1,
            _ => 2,
        }
    }
}

fn write_out(output: Option<&Path>, text: &str) -> Result<(), CliError> {
    match output {
        Some(path) => fs::write(path, text).map_err(|source| CliError::Write {
            path: path.into(),
            source,
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn pick_format(
    explicit: Option<&str>,
    output: Option<&Path>,
    fallback: Format,
) -> Result<Format, CliError> {
    match (explicit, output) {
        (Some(f), _) => Ok(f.parse()?),
        (None, Some(p)) if p.extension().is_some() => Ok(Format::for_path(p)),
        _ => Ok(fallback),
    }
}

/// Runs one command, writing its output to stdout or the given file.
pub fn execute(cmd: &Command) -> Result<(), CliError> {
    match cmd {
        Command::Analyze { manifest, output } => {
            let m = load_manifest(manifest)?;
            let mut out = String::new();
            for l in extract_deep_links(&m) {
                let _ = writeln!(out, "{}\t{}\t{:?}", l.activity, l.uri, l.origin);
            }
            write_out(output.as_deref(), &out)
        }
        Command::Bind {
            manifest,
            scheme,
            host_prefix,
            output,
        } => {
            let m = load_manifest(manifest)?;
            let (bound, _) = bind_deep_links(&m, scheme, host_prefix)?;
            write_out(output.as_deref(), &serialize_manifest(&bound))
        }
        Command::Launchers { app_dir, output } => {
            let app = load_app(app_dir)?;
            let mut out = String::new();
            for l in app.launchers() {
                let status = match l.status {
                    LauncherStatus::Ready => "ready",
                    LauncherStatus::ConservativeSkip => "skip",
                };
                let _ = writeln!(
                    out,
                    "{}\t{status}\t{}\t{}",
                    l.target,
                    l.deep_link.uri,
                    l.context.summary()
                );
            }
            write_out(output.as_deref(), &out)
        }
        Command::Atg {
            app_dir,
            report,
            output,
        } => {
            let app = load_app(app_dir)?;
            let mut g = app.static_atg();
            if let Some(path) = report {
                let r: ExplorationReport = load_json(path)?;
                for (from, to) in &r.dynamic_edges {
                    g.record_dynamic(from, to);
                }
            }
            write_out(output.as_deref(), &g.to_dot())
        }
        Command::Explore {
            app_dir,
            policy,
            budget,
            seed,
            ablate,
            no_context_check,
            output,
        } => {
            let app = load_app(app_dir)?;
            let policy = match policy {
                PolicyArg::Random => Policy::RandomOnly,
                PolicyArg::Guided => Policy::Guided,
            };
            let mut cfg = ExplorationConfig::new(policy, *budget, *seed);
            cfg.ablations = ablate.iter().map(|&a| a.into()).collect();
            cfg.context_checking = !no_context_check;
            let report = explore(&app, &cfg)?;
            write_out(output.as_deref(), &emit_json(&report))
        }
        Command::Bench {
            corpus,
            budget,
            seeds,
            depth,
            best,
            format,
            output,
        } => {
            let corpus = corpus.clone().unwrap_or_else(fixtures_dir);
            let format = pick_format(format.as_deref(), output.as_deref(), Format::Csv)?;
            let apps = corpus_apps(&corpus)?;
            if apps.is_empty() {
                return Err(CliError::EmptyCorpus(corpus));
            }
            let mut rows = Vec::new();
            for (name, dir) in apps {
                let app = load_app(&dir)?;
                rows.extend(compare_policies(&app, &name, *budget, seeds, *depth)?);
            }
            if *best {
                rows = best_of(&rows);
            }
            write_out(output.as_deref(), &emit_table(&rows, format))
        }
        Command::Triage {
            app_dir,
            report,
            depth,
            output,
        } => {
            let app = load_app(app_dir)?;
            let r: ExplorationReport = load_json(report)?;
            let verdicts = classify_all(&app, &r.crashes, *depth);
            write_out(output.as_deref(), &emit_json(&verdicts))
        }
        Command::Summarize {
            app_dir,
            report,
            verdicts,
            depth,
            cases,
            format,
            output,
        } => {
            let app = load_app(app_dir)?;
            let r: ExplorationReport = load_json(report)?;
            let format = pick_format(format.as_deref(), output.as_deref(), Format::Json)?;
            if *cases {
                let tally = tally_cases(&app, &r.passed_cases);
                return write_out(output.as_deref(), &emit_table(&tally, format));
            }
            let verdicts: Vec<TriageVerdict> = match verdicts {
                Some(p) => load_json(p)?,
                None => classify_all(&app, &r.crashes, *depth),
            };
            let summary = summarize(&app, &r, &verdicts);
            write_out(output.as_deref(), &emit_one(&summary, format))
        }
    }
}

/// Parses `args` and runs the command, mapping errors to exit codes.
pub fn run<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match execute(&cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
