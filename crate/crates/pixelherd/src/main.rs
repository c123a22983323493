//! Command-line front end: flag parsing, optional key=value defaults
//! file, and exit-code mapping (2 config, 3 i/o, 4 solver).

use std::collections::HashMap;
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Parser, ValueEnum};

use pixelherd::kernel::KernelKind;
use pixelherd::runner::{run, RunConfig, RunError, SolverKind};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SolverArg {
    Dal,
    Admm,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum KernelArg {
    /// Standard C2 Wendland polynomial (attractive everywhere).
    Wendland,
    /// The printed variant, repulsive at short range; for comparison runs.
    Paper,
}

/// Grey-scale colour quantization and segmentation driven by a
/// controlled pixel-consensus flow.
#[derive(Debug, Parser)]
#[command(name = "pixelherd", version, about)]
struct Cli {
    /// Input PGM image (P2 or P5, 8-bit)
    #[arg(long)]
    input: Option<PathBuf>,
    /// Directory for the output artifacts (created if missing)
    #[arg(long = "out-dir")]
    out_dir: Option<PathBuf>,
    /// Which solver to run
    #[arg(long, value_enum)]
    solver: Option<SolverArg>,
    /// Fidelity weight
    #[arg(long)]
    alpha: Option<f64>,
    /// Splitting weight of the TV solver [default: 0.01]
    #[arg(long)]
    rho: Option<f64>,
    /// Dual ascent step of the TV solver [default: 0.01]
    #[arg(long)]
    gamma: Option<f64>,
    /// Time horizon [default: 125]
    #[arg(long = "T")]
    horizon: Option<f64>,
    /// Euler step size; must divide T [default: 0.25]
    #[arg(long)]
    dt: Option<f64>,
    /// Lower control bound, both axes [default: 2]
    #[arg(long = "eps-min")]
    eps_min: Option<f64>,
    /// Upper control bound, both axes [default: 1100]
    #[arg(long = "eps-max")]
    eps_max: Option<f64>,
    /// Initial control value, both axes [default: 57]
    #[arg(long = "eps-init")]
    eps_init: Option<f64>,
    /// Stationarity tolerance of the descent loop [default: 1e-10]
    #[arg(long)]
    eta: Option<f64>,
    /// Descent iteration budget (inner budget for admm) [default: 500 dal / 50 admm]
    #[arg(long = "max-iters")]
    max_iters: Option<usize>,
    /// Outer iteration budget of the TV solver [default: 50]
    #[arg(long = "max-outer")]
    max_outer: Option<usize>,
    /// Interaction kernel [default: wendland]
    #[arg(long, value_enum)]
    kernel: Option<KernelArg>,
    /// Worker threads; 0 picks the rayon default [default: 0]
    #[arg(long)]
    threads: Option<usize>,
    /// Intensity gap that separates clusters [default: 0.1]
    #[arg(long = "cluster-gap")]
    cluster_gap: Option<f64>,
    /// Optional key=value file with defaults; flags override it
    #[arg(long)]
    config: Option<PathBuf>,
}

fn parse_config_file(path: &PathBuf) -> Result<HashMap<String, String>, RunError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| RunError::Io(format!("reading {}: {e}", path.display())))?;
    let mut map = HashMap::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            RunError::Config(format!(
                "{}:{}: expected key=value, got {line:?}",
                path.display(),
                lineno + 1
            ))
        })?;
        map.insert(key.trim().to_string(), value.trim().to_string());
    }
    Ok(map)
}

fn from_file<T: FromStr>(file: &HashMap<String, String>, key: &str) -> Result<Option<T>, RunError> {
    match file.get(key) {
        None => Ok(None),
        Some(raw) => raw
            .parse::<T>()
            .map(Some)
            .map_err(|_| RunError::Config(format!("config key {key}: cannot parse {raw:?}"))),
    }
}

/// flag > config file > default; an error if all three are absent.
fn resolve<T: FromStr>(
    flag: Option<T>,
    file: &HashMap<String, String>,
    key: &str,
    default: Option<T>,
) -> Result<T, RunError> {
    if let Some(v) = flag {
        return Ok(v);
    }
    if let Some(v) = from_file(file, key)? {
        return Ok(v);
    }
    default.ok_or_else(|| RunError::Config(format!("missing required option --{key}")))
}

fn build_config(cli: Cli) -> Result<RunConfig, RunError> {
    let file = match &cli.config {
        Some(path) => parse_config_file(path)?,
        None => HashMap::new(),
    };

    let input = resolve(cli.input, &file, "input", None::<PathBuf>)?;
    let out_dir = resolve(cli.out_dir, &file, "out-dir", None::<PathBuf>)?;

    let solver = match cli.solver {
        Some(SolverArg::Dal) => SolverKind::Dal,
        Some(SolverArg::Admm) => SolverKind::Admm,
        None => match file.get("solver").map(String::as_str) {
            Some("dal") => SolverKind::Dal,
            Some("admm") => SolverKind::Admm,
            Some(other) => {
                return Err(RunError::Config(format!(
                    "config key solver: expected dal or admm, got {other:?}"
                )))
            }
            None => return Err(RunError::Config("missing required option --solver".into())),
        },
    };
    let alpha = resolve(cli.alpha, &file, "alpha", None::<f64>)?;

    let mut cfg = RunConfig::new(input, out_dir, solver, alpha);
    cfg.rho = resolve(cli.rho, &file, "rho", Some(cfg.rho))?;
    cfg.gamma = resolve(cli.gamma, &file, "gamma", Some(cfg.gamma))?;
    cfg.horizon = resolve(cli.horizon, &file, "T", Some(cfg.horizon))?;
    cfg.dt = resolve(cli.dt, &file, "dt", Some(cfg.dt))?;
    cfg.eps_min = resolve(cli.eps_min, &file, "eps-min", Some(cfg.eps_min))?;
    cfg.eps_max = resolve(cli.eps_max, &file, "eps-max", Some(cfg.eps_max))?;
    cfg.eps_init = resolve(cli.eps_init, &file, "eps-init", Some(cfg.eps_init))?;
    cfg.eta = resolve(cli.eta, &file, "eta", Some(cfg.eta))?;
    cfg.max_iters = resolve(cli.max_iters, &file, "max-iters", Some(cfg.max_iters))?;
    cfg.max_outer = resolve(cli.max_outer, &file, "max-outer", Some(cfg.max_outer))?;
    cfg.kernel = match cli.kernel {
        Some(KernelArg::Wendland) => KernelKind::StandardWendland,
        Some(KernelArg::Paper) => KernelKind::PaperPrinted,
        None => match file.get("kernel").map(String::as_str) {
            Some("wendland") | None => KernelKind::StandardWendland,
            Some("paper") => KernelKind::PaperPrinted,
            Some(other) => {
                return Err(RunError::Config(format!(
                    "config key kernel: expected wendland or paper, got {other:?}"
                )))
            }
        },
    };
    cfg.threads = resolve(cli.threads, &file, "threads", Some(cfg.threads))?;
    cfg.cluster_gap = resolve(cli.cluster_gap, &file, "cluster-gap", Some(cfg.cluster_gap))?;
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = build_config(cli).and_then(|cfg| run(&cfg));
    match result {
        Ok(_) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("pixelherd: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
