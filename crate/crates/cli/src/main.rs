use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::{info, warn};

use thermoqfi::parallel::Parallelism;
use thermoqfi::sweep::{
    csv_string, figure_configs, first_ordering_failure, json_string, run_sweep, ModelKind,
    SweepConfig, SweepError, SweepRow,
};
use thermoqfi::verify::{run_all, VerifyOptions, DEFAULT_SEED};
use thermoqfi::Axis;

const EXIT_VERIFICATION: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

#[derive(Parser)]
#[command(
    name = "thermoqfi",
    version,
    about = "Dynamic QFI of thermal probes and its upper bounds"
)]
struct Cli {
    /// More log output (-v info, -vv debug); RUST_LOG overrides.
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a single scenario.
    Compute(ComputeArgs),
    /// Run a grid sweep described by a TOML config.
    Sweep(SweepArgs),
    /// Run the acceptance checks and print a pass/fail table.
    Verify(VerifyArgs),
    /// Write the canonical plotting configs (and optionally run them).
    Figures(FiguresArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModelArg {
    Linear,
    Oat,
    Lmg,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum AxisArg {
    X,
    Y,
    Z,
}

#[derive(Args)]
struct ComputeArgs {
    /// Single-point config; replaces the model flags below.
    #[arg(long, conflicts_with_all = ["model", "twice_j", "beta", "p", "t"])]
    config: Option<PathBuf>,
    #[arg(long, value_enum, required_unless_present = "config")]
    model: Option<ModelArg>,
    #[arg(long, required_unless_present = "config")]
    twice_j: Option<u32>,
    #[arg(long, value_enum)]
    axis: Option<AxisArg>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long, conflicts_with = "p", required_unless_present_any = ["p", "config"])]
    beta: Option<f64>,
    /// Polarization tanh(beta/2) instead of beta.
    #[arg(long)]
    p: Option<f64>,
    #[arg(long, required_unless_present = "config")]
    t: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    config: PathBuf,
    /// Output file; defaults to the config's output_path, then stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    parallelism: Option<usize>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    parallelism: usize,
    /// Also write the JSON summary here.
    #[arg(long)]
    out: Option<PathBuf>,
    /// `json` prints the summary instead of the table.
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Args)]
struct FiguresArgs {
    /// Directory for the configs (and CSV files with --run).
    #[arg(long, default_value = "figures")]
    out: PathBuf,
    /// Also run every sweep and write its CSV next to the config.
    #[arg(long)]
    run: bool,
    #[arg(long)]
    parallelism: Option<usize>,
}

/// Failure with the exit status it maps to.
struct Failure {
    code: u8,
    message: String,
}

impl From<SweepError> for Failure {
    fn from(e: SweepError) -> Self {
        let code = match e {
            SweepError::Numerical { .. } | SweepError::Pipeline(_) => EXIT_NUMERICAL,
            _ => EXIT_CONFIG,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn io_failure(path: &Path, e: io::Error) -> Failure {
    Failure {
        code: EXIT_CONFIG,
        message: format!("{}: {e}", path.display()),
    }
}

fn write_output(path: Option<&Path>, text: &str) -> Result<(), Failure> {
    match path {
        Some(p) => {
            fs::write(p, text).map_err(|e| io_failure(p, e))?;
            info!("wrote {}", p.display());
            Ok(())
        }
        None => io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| io_failure(Path::new("<stdout>"), e)),
    }
}

fn render(config: &SweepConfig, rows: &[SweepRow], format: Format) -> Result<String, Failure> {
    Ok(match format {
        Format::Csv => csv_string(rows)?,
        Format::Json => json_string(config, rows)?,
    })
}

/// Exit 1 with the offending row when any bound ordering failed.
fn ordering_status(rows: &[SweepRow]) -> Result<(), Failure> {
    match first_ordering_failure(rows) {
        None => Ok(()),
        Some(r) => Err(Failure {
            code: EXIT_VERIFICATION,
            message: format!(
                "bound ordering failed ({}) at beta = {}, t = {}: {}",
                r.failed_checks.join(", "),
                r.beta,
                r.t,
                serde_json::to_string(r).unwrap_or_default()
            ),
        }),
    }
}

fn compute(args: ComputeArgs) -> Result<(), Failure> {
    let config = match &args.config {
        Some(path) => SweepConfig::from_path(path)?,
        None => SweepConfig {
            model: match args.model.expect("required by clap") {
                ModelArg::Linear => ModelKind::Linear,
                ModelArg::Oat => ModelKind::Oat,
                ModelArg::Lmg => ModelKind::Lmg,
            },
            axis: args.axis.map(|a| match a {
                AxisArg::X => Axis::X,
                AxisArg::Y => Axis::Y,
                AxisArg::Z => Axis::Z,
            }),
            twice_j: args.twice_j.expect("required by clap"),
            lambda: args.lambda,
            beta_grid: args.beta.map(|b| vec![b]),
            p_grid: args.p.map(|p| vec![p]),
            t_grid: vec![args.t.expect("required by clap")],
            outputs: None,
            output_path: None,
            parallelism: None,
            label: None,
            notes: None,
        },
    };
    config.validate()?;
    let points = config.points()?.len();
    if points != 1 {
        return Err(Failure {
            code: EXIT_CONFIG,
            message: format!("compute takes a single point, the config has {points}; use `sweep`"),
        });
    }
    let rows = run_sweep(&config, Some(Parallelism::sequential()))?;
    write_output(args.out.as_deref(), &render(&config, &rows, args.format)?)?;
    ordering_status(&rows)
}

fn sweep(args: SweepArgs) -> Result<(), Failure> {
    let config = SweepConfig::from_path(&args.config)?;
    let parallelism = args.parallelism.map(Parallelism::new);
    let rows = run_sweep(&config, parallelism)?;
    let out = args.out.or_else(|| config.output_path.clone());
    write_output(out.as_deref(), &render(&config, &rows, args.format)?)?;
    ordering_status(&rows)
}

fn verify(args: VerifyArgs) -> Result<(), Failure> {
    let opts = VerifyOptions {
        seed: args.seed,
        parallelism: Parallelism::new(args.parallelism),
        ..VerifyOptions::default()
    };
    let report = run_all(&opts);
    match args.format {
        Some(Format::Json) => println!("{}", report.to_json()),
        Some(Format::Csv) => {
            return Err(Failure {
                code: EXIT_CONFIG,
                message: "verify reports as a table or as JSON".to_string(),
            })
        }
        None => print!("{}", report.table()),
    }
    if let Some(path) = &args.out {
        fs::write(path, report.to_json() + "\n").map_err(|e| io_failure(path, e))?;
    }
    if report.passed {
        return Ok(());
    }
    if let Some((check, failure)) = report.first_failure() {
        eprintln!("first failure ({}): {}", check.name, failure.description);
        if let Some(config) = &failure.reproducer {
            let text = config.to_toml_string();
            eprintln!("reproduce with `thermoqfi sweep --config <file>` on:\n{text}");
            if let Some(path) = &args.out {
                let repro = path.with_extension("reproducer.toml");
                fs::write(&repro, text).map_err(|e| io_failure(&repro, e))?;
                eprintln!("reproducer written to {}", repro.display());
            }
        }
    }
    Err(Failure {
        code: if report.numerical_failure {
            EXIT_NUMERICAL
        } else {
            EXIT_VERIFICATION
        },
        message: "verification failed".to_string(),
    })
}

fn figures(args: FiguresArgs) -> Result<(), Failure> {
    fs::create_dir_all(&args.out).map_err(|e| io_failure(&args.out, e))?;
    let mut status = Ok(());
    for (name, mut config) in figure_configs() {
        let csv_path = args.out.join(format!("{name}.csv"));
        config.output_path = Some(csv_path.clone());
        let toml_path = args.out.join(format!("{name}.toml"));
        fs::write(&toml_path, config.to_toml_string()).map_err(|e| io_failure(&toml_path, e))?;
        println!("{}", toml_path.display());
        if args.run {
            let rows = run_sweep(&config, args.parallelism.map(Parallelism::new))?;
            write_output(Some(&csv_path), &csv_string(&rows)?)?;
            println!("{}", csv_path.display());
            if let Err(e) = ordering_status(&rows) {
                warn!("{name}: {}", e.message);
                status = Err(e);
            }
        }
    }
    status
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    let result = match cli.command {
        Command::Compute(a) => compute(a),
        Command::Sweep(a) => sweep(a),
        Command::Verify(a) => verify(a),
        Command::Figures(a) => figures(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
