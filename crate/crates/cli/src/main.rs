use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::info;
use meshfree::harness::{
    self, emit_csv, emit_profile, emit_timing, load_config, ExperimentConfig, Loading, Mode, ProblemKind, RunRecord,
    TimingColumn, TABLE1,
};
use meshfree::{Error, Scheme};

#[derive(Parser)]
#[command(name = "meshfree-bench", version, about = "Meshfree collocation benchmarks for linear elastostatics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a single configuration.
    Run(Common),
    /// Sweep the support size.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Comma-separated support sizes; defaults to the config's list.
        #[arg(long, value_delimiter = ',')]
        n_list: Vec<usize>,
    },
    /// Legacy 1D support-size sweep against the published tip values.
    Table1 {
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Timing::Sidecar)]
        timing: Timing,
    },
    /// End-force cantilever with and without boundary stabilisation.
    #[command(name = "beam3d-fig3")]
    Beam3dFig3 {
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args, Clone)]
struct Common {
    /// Flat `key = value` experiment file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    problem: Option<ProblemArg>,
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    #[arg(long)]
    scheme: Option<Scheme>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, value_enum)]
    stabilize: Option<Switch>,
    /// Use the full 5x5x100 beam grid with n = 50.
    #[arg(long)]
    full: bool,
    /// CSV summary of all runs.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Axis-profile CSV (one file per run, suffixed when there are several).
    #[arg(long)]
    profile: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Timing::Sidecar)]
    timing: Timing,
}

#[derive(Clone, Copy, ValueEnum)]
enum ProblemArg {
    Bar1d,
    Beam3d,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Legacy,
    Corrected,
}

#[derive(Clone, Copy, ValueEnum)]
enum Switch {
    On,
    Off,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Timing {
    /// Wall times in `<out>.timing`.
    Sidecar,
    /// Wall times in the `wall_ms` column.
    Inline,
    None,
}

fn build_config(common: &Common, default: ExperimentConfig) -> Result<ExperimentConfig, Error> {
    let mut config = match &common.config {
        Some(path) => load_config(path)?,
        None => default,
    };
    if let Some(p) = common.problem {
        let target = match p {
            ProblemArg::Bar1d => ProblemKind::Bar1d,
            ProblemArg::Beam3d => ProblemKind::Beam3d,
        };
        if target != config.problem {
            config = match target {
                ProblemKind::Bar1d => ExperimentConfig::bar_default(),
                ProblemKind::Beam3d => ExperimentConfig::beam_default(),
            };
        }
    }
    if common.full {
        if config.problem != ProblemKind::Beam3d {
            return Err(Error::Config("--full applies to the beam3d problem".into()));
        }
        config.grid = [5, 5, 100];
        config.n = 50;
        config.n_list = vec![50];
    }
    if let Some(m) = common.mode {
        config.mode = match m {
            ModeArg::Legacy => Mode::Legacy,
            ModeArg::Corrected => Mode::Corrected,
        };
    }
    if let Some(s) = common.scheme {
        config.scheme = s;
    }
    if let Some(n) = common.n {
        config.n = n;
        config.n_list = vec![n];
    }
    if let Some(s) = common.stabilize {
        config.stabilize = matches!(s, Switch::On);
    }
    config.validate()?;
    Ok(config)
}

fn write_outputs(records: &[RunRecord], out: Option<&Path>, profile: Option<&Path>, timing: Timing) -> Result<(), Error> {
    if let Some(out) = out {
        let column = if timing == Timing::Inline { TimingColumn::Inline } else { TimingColumn::Empty };
        emit_csv(records, out, column)?;
        if timing == Timing::Sidecar {
            emit_timing(records, out)?;
        }
        info!("wrote {}", out.display());
    }
    if let Some(profile) = profile {
        for r in records.iter().filter(|r| r.profile.is_some()) {
            let path = if records.len() == 1 {
                profile.to_path_buf()
            } else {
                suffixed(profile, &format!("{}-n{}-{}", r.config.scheme, r.config.n, stab_name(r)))
            };
            emit_profile(r, &path)?;
            info!("wrote {}", path.display());
        }
    }
    Ok(())
}

fn stab_name(r: &RunRecord) -> &'static str {
    if r.config.stabilize {
        "stab"
    } else {
        "plain"
    }
}

fn suffixed(path: &Path, tag: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let name = match path.extension() {
        Some(ext) => format!("{stem}_{tag}.{}", ext.to_string_lossy()),
        None => format!("{stem}_{tag}"),
    };
    path.with_file_name(name)
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|v| format!("{v:.6}")).unwrap_or_else(|| "-".into())
}

fn print_records(records: &[RunRecord]) {
    println!(
        "{:<6} {:<10} {:>4} {:>12} {:>10} {:>5} {:>12} {:>12} {:>10}  status",
        "scheme", "mode", "n", "tip_mm", "rel_l2", "osc", "min_rcond", "global_rcond", "residual"
    );
    for r in records {
        let status = r.failure.as_ref().map(|f| f.to_string()).unwrap_or_else(|| "ok".into());
        println!(
            "{:<6} {:<10} {:>4} {:>12} {:>10} {:>5} {:>12.3e} {:>12.3e} {:>10.2e}  {}",
            r.config.scheme.name(),
            r.config.mode.name(),
            r.config.n,
            fmt_opt(r.tip_mm),
            r.error.as_ref().map(|e| format!("{:.4}", e.rel_l2)).unwrap_or_else(|| "-".into()),
            r.error.as_ref().map(|e| e.oscillation_count.to_string()).unwrap_or_else(|| "-".into()),
            r.min_moment_rcond,
            r.global_rcond,
            r.residual,
            status
        );
        for d in &r.diagnostics {
            println!("       note: {d}");
        }
    }
}

fn status(records: &[RunRecord]) -> ExitCode {
    if records.iter().all(RunRecord::succeeded) {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn execute(cli: Cli) -> Result<ExitCode, Error> {
    match cli.command {
        Command::Run(common) => {
            let config = build_config(&common, ExperimentConfig::bar_default())?;
            let records = vec![harness::run(&config)];
            print_records(&records);
            write_outputs(&records, common.out.as_deref(), common.profile.as_deref(), common.timing)?;
            Ok(status(&records))
        }
        Command::Sweep { common, n_list } => {
            let config = build_config(&common, ExperimentConfig::bar_default())?;
            let list = if n_list.is_empty() { config.n_list.clone() } else { n_list };
            let records = harness::sweep_support_size(&config, &list)?;
            print_records(&records);
            write_outputs(&records, common.out.as_deref(), common.profile.as_deref(), common.timing)?;
            Ok(status(&records))
        }
        Command::Table1 { out, timing } => {
            let records = harness::table1()?;
            println!("{:>4} {:>10} {:>10} {:>12} {:>12}", "n", "tip_mm", "published", "min_rcond", "global_rcond");
            for (r, (_, published)) in records.iter().zip(TABLE1) {
                println!(
                    "{:>4} {:>10} {:>10.4} {:>12.3e} {:>12.3e}",
                    r.config.n,
                    r.tip_mm.map(|t| format!("{t:.4}")).unwrap_or_else(|| "-".into()),
                    published,
                    r.min_moment_rcond,
                    r.global_rcond
                );
            }
            write_outputs(&records, out.as_deref(), None, timing)?;
            Ok(status(&records))
        }
        Command::Beam3dFig3 { common } => {
            let mut base = ExperimentConfig::beam_default();
            base.loading = Loading::EndForce(50.0);
            base.mode = Mode::Corrected;
            let config = build_config(&common, base)?;
            let records: Vec<RunRecord> = [false, true]
                .iter()
                .map(|&stabilize| harness::run(&ExperimentConfig { stabilize, ..config.clone() }))
                .collect();
            print_records(&records);
            write_outputs(&records, common.out.as_deref(), common.profile.as_deref(), common.timing)?;
            Ok(status(&records))
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Io(_) => ExitCode::from(1),
                _ => ExitCode::from(2),
            }
        }
    }
}
