//! Command-line front end: oracle checks, reconstructions, Sinc expansions and
//! convergence tables, with every input recorded in a reusable `manifest.txt`.

mod commands;
mod settings;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use settings::Settings;

#[derive(Parser, Debug)]
#[command(
    name = "sidecast",
    version,
    about = "Surface temperature reconstruction from interior heat data"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check closed forms, kernel norms, the transform convention and the central identity.
    Verify {
        /// Frequency points for the symbol check, as "z,r;z,r".
        #[arg(long)]
        points: Option<String>,
        /// Perturb the closed-form symbol by 1% (exercises the failure path).
        #[arg(long, hide = true)]
        break_shat: bool,
    },
    /// Reconstruct the surface temperature and write v_eps.grd, v_eps.csv, manifest.txt.
    Reconstruct(RunArgs),
    /// Reconstruct, expand as a two-dimensional Sinc series and compare with direct evaluation.
    Sinc {
        #[command(flatten)]
        run: RunArgs,
        /// Truncation order of the series.
        #[arg(long = "N")]
        n: Option<String>,
        /// square or triangular.
        #[arg(long)]
        index_set: Option<String>,
        /// Number of off-node comparison points.
        #[arg(long)]
        sinc_points: Option<String>,
        /// Samples on the Sinc lattice (grid file with dx = dt) instead of a reconstruction.
        #[arg(long)]
        v_eps: Option<String>,
    },
    /// Measured error against the error bound over a list of noise levels (L2 mode).
    Convergence {
        #[command(flatten)]
        run: RunArgs,
        /// Comma-separated noise levels.
        #[arg(long)]
        eps_list: Option<String>,
        /// Record wall-clock seconds per row (makes the CSV run-dependent).
        #[arg(long)]
        timing: bool,
    },
}

/// Flags shared by the reconstruction commands. Values override those read from `--config`.
#[derive(Args, Debug)]
struct RunArgs {
    /// key = value file; manifest.txt from an earlier run reproduces it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Synthetic test problem: p1 or p2.
    #[arg(long)]
    problem: Option<String>,
    /// Temperature history on y = 1 (grid file).
    #[arg(long)]
    f: Option<String>,
    /// Temperature history on y = 2 (grid file).
    #[arg(long)]
    g: Option<String>,
    /// l2 or hm.
    #[arg(long)]
    mode: Option<String>,
    #[arg(long)]
    epsilon: Option<String>,
    #[arg(long)]
    gamma: Option<String>,
    /// Sobolev order for hm mode.
    #[arg(long)]
    m: Option<String>,
    /// Output grid "nx,nt,x0,dx,t0,dt".
    #[arg(long)]
    grid: Option<String>,
    /// Data grid "nx,nt,x0,dx,t0,dt" for synthetic problems.
    #[arg(long)]
    data_grid: Option<String>,
    /// Output directory [default: sidecast-out].
    #[arg(long)]
    out: Option<String>,
    /// Noise seed.
    #[arg(long)]
    seed: Option<String>,
    /// L2 size of the injected noise [default: epsilon].
    #[arg(long)]
    noise: Option<String>,
    #[arg(long)]
    spectral_nodes: Option<String>,
    #[arg(long)]
    spectral_coverage: Option<String>,
    /// Estimate the tail energy of the exact solution for the error bound.
    #[arg(long)]
    tail_energy: Option<String>,
}

impl RunArgs {
    fn pairs(self) -> (Option<PathBuf>, Vec<(&'static str, Option<String>)>) {
        (
            self.config,
            vec![
                ("problem", self.problem),
                ("f", self.f),
                ("g", self.g),
                ("mode", self.mode),
                ("epsilon", self.epsilon),
                ("gamma", self.gamma),
                ("m", self.m),
                ("grid", self.grid),
                ("data-grid", self.data_grid),
                ("out", self.out),
                ("seed", self.seed),
                ("noise", self.noise),
                ("spectral-nodes", self.spectral_nodes),
                ("spectral-coverage", self.spectral_coverage),
                ("tail-energy", self.tail_energy),
            ],
        )
    }
}

fn settings(run: RunArgs, extra: Vec<(&'static str, Option<String>)>) -> sidecast::Result<Settings> {
    let (config, mut pairs) = run.pairs();
    pairs.extend(extra);
    Settings::load(config.as_deref(), &pairs)
}

fn configure_threads() -> Result<(), String> {
    let Ok(raw) = std::env::var("SIDECAST_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .map_err(|_| format!("SIDECAST_THREADS must be a nonnegative integer, got {raw:?}"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| format!("cannot configure thread pool: {e}"))
}

fn run(cmd: Command) -> sidecast::Result<bool> {
    match cmd {
        Command::Verify { points, break_shat } => commands::verify(points.as_deref(), break_shat),
        Command::Reconstruct(run) => commands::reconstruct(&settings(run, vec![])?),
        Command::Sinc {
            run,
            n,
            index_set,
            sinc_points,
            v_eps,
        } => commands::sinc(&settings(
            run,
            vec![
                ("N", n),
                ("index-set", index_set),
                ("sinc-points", sinc_points),
                ("v-eps", v_eps),
            ],
        )?),
        Command::Convergence { run, eps_list, timing } => commands::convergence(&settings(
            run,
            vec![("eps-list", eps_list), ("timing", timing.then(|| "true".into()))],
        )?),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Err(msg) = configure_threads() {
        eprintln!("error: {msg}");
        return ExitCode::from(2);
    }
    match run(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_usage() { 2 } else { 1 })
        }
    }
}
