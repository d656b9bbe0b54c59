use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use cliffcft::driver::{
    self, CalibrateConfig, FitKind, PercolateConfig, SimulateConfig, DEFAULT_Y_OVER_T,
};
use cliffcft::error::Error;
use cliffcft::fit::FitWindow;
use cliffcft::series::read_result_file;

/// Hybrid Clifford circuit ensembles and conformal scaling analysis.
#[derive(Parser)]
#[command(name = "cliffcft", version, about)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a circuit ensemble and write a result file.
    Simulate(SimulateArgs),
    /// Run a percolation minimal-cut ensemble in the same file schema.
    Percolate(PercolateArgs),
    /// Fit exponents from result files.
    Fit(FitArgs),
    /// Scan the measurement rate and the time rescaling on periodic rings.
    Calibrate(CalibrateArgs),
    /// Recompute the collapse coordinates of a result file under a new Y/T.
    Collapse(CollapseArgs),
}

#[derive(Args)]
struct SimulateArgs {
    /// Layout kind: fffa | afaa | fafa | aaaa | pbc-product | pbc-bell |
    /// ref:<start>:<len>.
    #[arg(long)]
    layout: String,
    #[arg(long = "L")]
    l: usize,
    #[arg(long = "T")]
    t: u32,
    /// Measurement probability per site per layer.
    #[arg(long)]
    p: f64,
    /// Number of realizations.
    #[arg(long)]
    n: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Worker threads (default: CLIFFCFT_WORKERS or all cores).
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long = "y-over-t", default_value_t = DEFAULT_Y_OVER_T)]
    y_over_t: f64,
    /// Preset name (fig5a, fig5b, fig6a, fig6b, fig8b, fig9a, fig9b,
    /// fig10a, fig10b, fig12, lightcone) or a JSON schedule file.
    #[arg(long)]
    schedule: String,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct PercolateArgs {
    #[arg(long = "L")]
    l: usize,
    /// Comma-separated lattice depths, e.g. 64,128,256.
    #[arg(long = "t-grid", value_delimiter = ',')]
    t_grid: Vec<usize>,
    #[arg(long, default_value_t = 0.5)]
    p: f64,
    /// bipartition | topbottom.
    #[arg(long, default_value = "bipartition")]
    coloring: String,
    #[arg(long, default_value_t = false)]
    periodic: bool,
    #[arg(long)]
    n: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct FitArgs {
    /// log-linear | power-law | eta-one | bell-early | bell-late-open |
    /// bell-late-pbc.
    #[arg(long)]
    kind: String,
    /// One or more result files; a pooled fit over all of them is added.
    #[arg(long, required = true, num_args = 1..)]
    input: Vec<PathBuf>,
    /// JSON output path (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Exclude probes closer than this to a corner / each other.
    #[arg(long = "min-sep", default_value_t = 4.0)]
    min_sep: f64,
    /// Exclude data below this aspect ratio.
    #[arg(long = "tau-min", default_value_t = 0.03)]
    tau_min: f64,
    /// Window edge for the eta fits.
    #[arg(long = "eta-window", default_value_t = 0.1)]
    eta_window: f64,
    /// tau window for the Bell fits, as lo:hi.
    #[arg(long = "tau-range")]
    tau_range: Option<String>,
}

#[derive(Args)]
struct CalibrateArgs {
    #[arg(long = "L")]
    l: usize,
    #[arg(long = "t-steady")]
    t_steady: u32,
    #[arg(long = "t-bell")]
    t_bell: u32,
    /// Measurement-rate grid as start:end:step.
    #[arg(long = "p-grid", default_value = "0.150:0.170:0.002")]
    p_grid: String,
    /// Y/T grid as start:end:step.
    #[arg(long = "yt-grid", default_value = "0.40:0.80:0.02")]
    yt_grid: String,
    #[arg(long = "n-steady", default_value_t = 48)]
    n_steady: u64,
    #[arg(long = "n-bell", default_value_t = 200)]
    n_bell: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    workers: Option<usize>,
    /// JSON output path (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CollapseArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long = "y-over-t")]
    y_over_t: f64,
    #[arg(long)]
    out: PathBuf,
}

fn parse_grid(spec: &str) -> Result<Vec<f64>, Error> {
    let parts: Vec<&str> = spec.split(':').collect();
    let [start, end, step] = parts.as_slice() else {
        return Err(Error::Config(format!("grid {spec:?} is not start:end:step")));
    };
    let f = |v: &str| {
        v.parse::<f64>().map_err(|_| Error::Config(format!("grid field {v:?} in {spec:?}")))
    };
    let (a, b, s) = (f(start)?, f(end)?, f(step)?);
    if s <= 0.0 || b < a {
        return Err(Error::Config(format!("grid {spec:?} is empty or descending")));
    }
    let n = ((b - a) / s).round() as usize;
    Ok((0..=n).map(|i| a + s * i as f64).collect())
}

fn env_workers() -> Option<usize> {
    std::env::var("CLIFFCFT_WORKERS").ok().and_then(|v| v.parse().ok())
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.cmd {
        Cmd::Simulate(a) => {
            let config = SimulateConfig {
                layout: a.layout,
                l: a.l,
                t: a.t,
                p: a.p,
                n: a.n,
                seed: a.seed,
                workers: a.workers.or_else(env_workers),
                y_over_t: a.y_over_t,
                schedule: a.schedule,
                out: a.out.clone(),
            };
            driver::simulate(&config)?;
            eprintln!("wrote {}", a.out.display());
            Ok(())
        }
        Cmd::Percolate(a) => {
            let config = PercolateConfig {
                l: a.l,
                t_grid: a.t_grid,
                p: a.p,
                coloring: a.coloring,
                periodic: a.periodic,
                n: a.n,
                seed: a.seed,
                out: a.out.clone(),
            };
            driver::percolate(&config)?;
            eprintln!("wrote {}", a.out.display());
            Ok(())
        }
        Cmd::Fit(a) => {
            let kind = FitKind::from_name(&a.kind)?;
            let mut win = FitWindow {
                min_sep: a.min_sep,
                min_tau: a.tau_min,
                eta_window: a.eta_window,
                ..FitWindow::default()
            };
            if let Some(range) = &a.tau_range {
                let parts: Vec<&str> = range.split(':').collect();
                let [lo, hi] = parts.as_slice() else {
                    return Err(Error::Config(format!("tau range {range:?} is not lo:hi")));
                };
                win.tau_range = (
                    lo.parse().map_err(|_| Error::Config("bad tau range".into()))?,
                    hi.parse().map_err(|_| Error::Config("bad tau range".into()))?,
                );
            }
            let mut results = Vec::new();
            let mut pooled = Vec::new();
            for path in &a.input {
                let (_, rows) = read_result_file(path)?;
                let pts = driver::rows_to_fit_points(kind, &rows);
                let fit = driver::run_fit(kind, &pts, &win)?;
                results.push(serde_json::json!({
                    "file": path.display().to_string(),
                    "fit": fit,
                }));
                pooled.extend(pts);
            }
            if a.input.len() > 1 {
                let fit = driver::run_fit(kind, &pooled, &win)?;
                results.push(serde_json::json!({ "file": "pooled", "fit": fit }));
            }
            emit_json(&serde_json::Value::Array(results), a.out.as_deref())
        }
        Cmd::Calibrate(a) => {
            let config = CalibrateConfig {
                l: a.l,
                t_steady: a.t_steady,
                t_bell: a.t_bell,
                p_grid: parse_grid(&a.p_grid)?,
                yt_grid: parse_grid(&a.yt_grid)?,
                n_steady: a.n_steady,
                n_bell: a.n_bell,
                seed: a.seed,
                workers: a.workers.or_else(env_workers),
            };
            let cal = driver::calibrate(&config)?;
            let value =
                serde_json::to_value(&cal).map_err(|e| Error::Parse(e.to_string()))?;
            emit_json(&value, a.out.as_deref())
        }
        Cmd::Collapse(a) => {
            driver::recollapse(&a.input, a.y_over_t, &a.out)?;
            eprintln!("wrote {}", a.out.display());
            Ok(())
        }
    }
}

fn emit_json(value: &serde_json::Value, out: Option<&std::path::Path>) -> Result<(), Error> {
    let text =
        serde_json::to_string_pretty(value).map_err(|e| Error::Parse(e.to_string()))?;
    match out {
        Some(path) => std::fs::write(path, text + "\n")?,
        None => println!("{text}"),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Io(_) => ExitCode::from(3),
                Error::Fit(_) => ExitCode::from(4),
                _ => ExitCode::from(2),
            }
        }
    }
}
