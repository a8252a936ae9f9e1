use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::error;
use rayon::prelude::*;

use navmine::action::{serve, Backend, MockBackend, PromptSet, SidecarBackend};
use navmine::config::PipelineConfig;
use navmine::dataset::Split;
use navmine::pipeline::{self, PipelineError};

/// Builds mobile navigation episodes from screen-recording model outputs.
///
/// Each VIDEO_DIR holds one recording's inputs (meta.json, frames.jsonl,
/// screen_detections.jsonl, ocr.jsonl, icons.jsonl, transcript.jsonl) and
/// receives every stage's outputs.
#[derive(Parser)]
#[command(name = "navmine", version)]
struct Cli {
    /// TOML file overriding the built-in defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Print the fully resolved configuration and exit.
    #[arg(long)]
    print_config: bool,
    /// Videos processed in parallel.
    #[arg(long, short = 'j', global = true, default_value_t = 1)]
    jobs: usize,
    /// More log output (repeatable).
    #[arg(long, short = 'v', global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Option<Cmd>,
}

#[derive(Args)]
struct Dirs {
    #[arg(value_name = "VIDEO_DIR", required = true)]
    dirs: Vec<PathBuf>,
}

#[derive(Args)]
struct BackendArgs {
    /// Answer model requests from a JSON Lines script instead of the sidecar.
    #[arg(long, value_name = "SCRIPT")]
    mock_backend: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum SplitArg {
    Train,
    Val,
    Test,
}

#[derive(Subcommand)]
enum Cmd {
    /// Screen track from per-frame phone detections.
    Track(Dirs),
    /// Transition events and scenes from the OCR stream.
    Scenes(Dirs),
    /// Screen crops, element layouts and marked images per scene.
    Elements(Dirs),
    /// Model-driven action identification; writes the episode.
    Actions {
        #[command(flatten)]
        dirs: Dirs,
        #[command(flatten)]
        backend: BackendArgs,
    },
    /// track, scenes, elements and actions in sequence.
    Run {
        #[command(flatten)]
        dirs: Dirs,
        #[command(flatten)]
        backend: BackendArgs,
    },
    /// Admission verdicts for a corpus of video signals.
    Filter {
        /// JSON Lines of per-video signals.
        #[arg(long)]
        signals: PathBuf,
        /// JSON Lines of protected evaluation titles ({"id","title"}).
        #[arg(long)]
        protected: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Collect complete episodes into a dataset split.
    Assemble {
        #[command(flatten)]
        dirs: Dirs,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value = "train")]
        split: SplitArg,
        /// Keep only videos admitted in this verdicts file.
        #[arg(long)]
        verdicts: Option<PathBuf>,
    },
    /// Score episodes against ground_truth.json in each directory.
    Eval {
        #[command(flatten)]
        dirs: Dirs,
        /// Where to write the pooled report (stdout if absent).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Action, platform and length distributions.
    Stats {
        #[command(flatten)]
        dirs: Dirs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Serve a mock script over the sidecar line protocol on stdio.
    #[command(hide = true)]
    ServeMock {
        #[arg(long)]
        script: PathBuf,
    },
}

/// Exit status: 2 for usage problems, 1 for bad data.
struct Failure {
    code: u8,
    msg: String,
}

impl From<PipelineError> for Failure {
    fn from(e: PipelineError) -> Self {
        Failure { code: if e.is_usage() { 2 } else { 1 }, msg: e.to_string() }
    }
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure { code: 2, msg: msg.into() }
}

fn data(msg: impl ToString) -> Failure {
    Failure { code: 1, msg: msg.to_string() }
}

fn check_dirs(dirs: &[PathBuf]) -> Result<(), Failure> {
    match dirs.iter().find(|d| !d.is_dir()) {
        Some(d) => Err(usage(format!("not a directory: {}", d.display()))),
        None => Ok(()),
    }
}

fn make_backend(cfg: &PipelineConfig, args: &BackendArgs) -> Result<Box<dyn Backend>, Failure> {
    if let Some(script) = &args.mock_backend {
        if !script.exists() {
            return Err(usage(format!("missing input {}", script.display())));
        }
        return Ok(Box::new(MockBackend::from_path(script).map_err(data)?));
    }
    match cfg.sidecar_command() {
        Some(cmd) => Ok(Box::new(SidecarBackend::spawn(&cmd, cfg.actions.sidecar_pool).map_err(data)?)),
        None => Err(usage(format!("no model backend: pass --mock-backend, set actions.sidecar or {}", SidecarBackend::ENV))),
    }
}

fn prompts(cfg: &PipelineConfig) -> Result<PromptSet, Failure> {
    match &cfg.actions.prompts_dir {
        Some(d) => PromptSet::from_dir(d).map_err(|e| data(format!("{}: {e}", d.display()))),
        None => Ok(PromptSet::default()),
    }
}

/// Applies `f` to every directory on `jobs` threads. All directories are
/// attempted; the worst failure decides the exit status.
fn per_dir<F>(dirs: &[PathBuf], jobs: usize, f: F) -> Result<(), Failure>
where
    F: Fn(&Path) -> Result<(), PipelineError> + Sync,
{
    check_dirs(dirs)?;
    let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs.max(1)).build().map_err(data)?;
    let results: Vec<Result<(), PipelineError>> = pool.install(|| dirs.par_iter().map(|d| f(d)).collect());
    let mut worst: Option<Failure> = None;
    for r in results {
        if let Err(e) = r {
            let fail = Failure::from(e);
            error!("{}", fail.msg);
            if worst.as_ref().is_none_or(|w| fail.code > w.code) {
                worst = Some(fail);
            }
        }
    }
    match worst {
        Some(w) => Err(Failure { code: w.code, msg: "one or more videos failed".into() }),
        None => Ok(()),
    }
}

fn execute(cli: Cli) -> Result<(), Failure> {
    let cfg = match &cli.config {
        Some(p) if !p.exists() => return Err(usage(format!("missing input {}", p.display()))),
        Some(p) => PipelineConfig::load(p).map_err(data)?,
        None => PipelineConfig::default(),
    };
    if cli.print_config {
        print!("{}", cfg.to_toml());
        return Ok(());
    }
    let Some(cmd) = cli.command else {
        return Err(usage("no command given; see --help"));
    };
    let jobs = cli.jobs;
    match cmd {
        Cmd::Track(d) => per_dir(&d.dirs, jobs, |dir| pipeline::run_track(dir, &cfg).map(drop)),
        Cmd::Scenes(d) => per_dir(&d.dirs, jobs, |dir| pipeline::run_scenes(dir, &cfg).map(drop)),
        Cmd::Elements(d) => per_dir(&d.dirs, jobs, |dir| pipeline::run_elements(dir, &cfg).map(drop)),
        Cmd::Actions { dirs, backend } => {
            check_dirs(&dirs.dirs)?;
            let b = make_backend(&cfg, &backend)?;
            let p = prompts(&cfg)?;
            per_dir(&dirs.dirs, jobs, |dir| pipeline::run_actions(dir, &cfg, b.as_ref(), &p).map(drop))
        }
        Cmd::Run { dirs, backend } => {
            check_dirs(&dirs.dirs)?;
            let b = make_backend(&cfg, &backend)?;
            let p = prompts(&cfg)?;
            per_dir(&dirs.dirs, jobs, |dir| {
                pipeline::run_track(dir, &cfg)?;
                pipeline::run_scenes(dir, &cfg)?;
                pipeline::run_elements(dir, &cfg)?;
                pipeline::run_actions(dir, &cfg, b.as_ref(), &p).map(drop)
            })
        }
        Cmd::Filter { signals, protected, out } => {
            let report = pipeline::filter_corpus(&signals, protected.as_deref(), &out, &cfg)?;
            println!("{} of {} videos admitted", report.admitted, report.total);
            Ok(())
        }
        Cmd::Assemble { dirs, out, split, verdicts } => {
            check_dirs(&dirs.dirs)?;
            let split = match split {
                SplitArg::Train => Split::Train,
                SplitArg::Val => Split::Val,
                SplitArg::Test => Split::Test,
            };
            let m = pipeline::assemble_dataset(&dirs.dirs, &out, split, verdicts.as_deref(), &cfg)?;
            println!("{} episodes written", m.episodes.len());
            Ok(())
        }
        Cmd::Eval { dirs, out } => {
            check_dirs(&dirs.dirs)?;
            let summary = pipeline::evaluate_dirs(&dirs.dirs, &cfg)?;
            match out {
                Some(p) => pipeline::write_json(&p, &summary)?,
                None => print!("{}", navmine::dataset::to_canonical_json(&summary).map_err(data)?),
            }
            Ok(())
        }
        Cmd::Stats { dirs, out } => {
            check_dirs(&dirs.dirs)?;
            pipeline::stats_for(&dirs.dirs, &out, &cfg)?;
            Ok(())
        }
        Cmd::ServeMock { script } => {
            if !script.exists() {
                return Err(usage(format!("missing input {}", script.display())));
            }
            let mock = MockBackend::from_path(&script).map_err(data)?;
            let stdin = std::io::stdin();
            serve(&mock, stdin.lock(), std::io::stdout().lock()).map_err(data)
        }
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
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("navmine: {}", f.msg);
            if f.code == 2 {
                eprintln!("Usage: navmine [OPTIONS] <COMMAND> ... (see navmine --help)");
            }
            ExitCode::from(f.code)
        }
    }
}
