//! `nhaas`: sweeps, collapses and figure pipelines from the command line.

mod commands;
mod config;
mod error;
mod figures;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::Overrides;
use error::CliError;
use figures::Figure;

#[derive(Debug, Parser)]
#[command(name = "nhaas", version, about = "Criticality lab for the non-Hermitian Aubry-André-Stark chain")]
struct Cli {
    /// Flat `key = value` file; flags override its entries.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Worker threads [default: logical cores].
    #[arg(long, global = true)]
    workers: Option<usize>,

    /// Output bundle directory.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Ensemble-averaged ξ, IPR and gap on a distance grid.
    Sweep(SweepArgs),
    /// Finite-size collapse of one scaling form.
    Collapse(CollapseArgs),
    /// Data and exponents behind one figure.
    Reproduce(ReproduceArgs),
}

#[derive(Debug, Args)]
struct ModelArgs {
    #[arg(long = "J")]
    j: Option<f64>,
    #[arg(long)]
    g: Option<f64>,
    #[arg(long = "W")]
    w: Option<f64>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    phi: Option<f64>,
    /// open or periodic.
    #[arg(long)]
    bc: Option<String>,
}

#[derive(Debug, Args)]
struct SweepArgs {
    /// W (distance W − W_c), eps (distance ε) or W-abs (absolute W).
    #[arg(long)]
    axis: Option<String>,
    #[command(flatten)]
    model: ModelArgs,
    /// Single size.
    #[arg(long = "L")]
    l: Option<usize>,
    /// Comma-separated sizes.
    #[arg(long)]
    sizes: Option<String>,
    /// Log grid `lo,hi,n`.
    #[arg(long)]
    grid: Option<String>,
    /// Explicit comma-separated grid.
    #[arg(long)]
    values: Option<String>,
    #[arg(long)]
    n_samples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Args)]
struct CollapseArgs {
    /// stark, aas-at-wc, slice or hybrid.
    #[arg(long)]
    form: Option<String>,
    #[arg(long)]
    g: Option<f64>,
    /// Size of a hybrid collapse.
    #[arg(long = "L")]
    l: Option<usize>,
    #[arg(long)]
    sizes: Option<String>,
    #[arg(long)]
    grid: Option<String>,
    /// full, range:LO:HI, stable:TOL or right-of-peak:HI.
    #[arg(long)]
    window: Option<String>,
    #[arg(long)]
    n_samples: Option<usize>,
    #[arg(long)]
    n_boot: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    bc: Option<String>,
    /// Slice value `(W − W_c) L^{1/ν_δ}`.
    #[arg(long, allow_hyphen_values = true)]
    c: Option<f64>,
    /// Hybrid `W − W_c` values.
    #[arg(long, allow_hyphen_values = true)]
    deltas: Option<String>,
    /// Hybrid: pure-Stark ν_ε [default: fitted].
    #[arg(long)]
    nu_eps: Option<f64>,
    /// Reduced sampling.
    #[arg(long)]
    quick: bool,
}

#[derive(Debug, Args)]
struct ReproduceArgs {
    figure: Figure,
    /// Reduced sampling.
    #[arg(long)]
    quick: bool,
    /// Comma-separated g values for the panels that scan g.
    #[arg(long)]
    gs: Option<String>,
    #[arg(long)]
    n_samples: Option<usize>,
    #[arg(long)]
    n_boot: Option<usize>,
}

impl ModelArgs {
    fn apply(self, o: &mut Overrides) {
        o.flag("J", self.j);
        o.flag("g", self.g);
        o.flag("W", self.w);
        o.flag("eps", self.eps);
        o.flag("alpha", self.alpha);
        o.flag("phi", self.phi);
        o.flag("bc", self.bc);
    }
}

fn run(cli: Cli) -> Result<PathBuf, CliError> {
    let mut o = match &cli.config {
        Some(path) => Overrides::from_file(path)?,
        None => Overrides::default(),
    };
    o.flag("workers", cli.workers);
    o.flag("out", cli.out.map(|p| p.display().to_string()));
    match cli.command {
        Command::Sweep(a) => {
            a.model.apply(&mut o);
            o.flag("axis", a.axis);
            o.flag("L", a.l);
            o.flag("sizes", a.sizes);
            o.flag("grid", a.grid);
            o.flag("values", a.values);
            o.flag("n_samples", a.n_samples);
            o.flag("seed", a.seed);
            commands::sweep(o)
        }
        Command::Collapse(a) => {
            o.flag("form", a.form);
            o.flag("g", a.g);
            o.flag("L", a.l);
            o.flag("sizes", a.sizes);
            o.flag("grid", a.grid);
            o.flag("window", a.window);
            o.flag("n_samples", a.n_samples);
            o.flag("n_boot", a.n_boot);
            o.flag("seed", a.seed);
            o.flag("bc", a.bc);
            o.flag("c", a.c);
            o.flag("deltas", a.deltas);
            o.flag("nu_eps", a.nu_eps);
            o.set("quick", a.quick);
            commands::collapse(o)
        }
        Command::Reproduce(a) => {
            o.set("quick", a.quick);
            o.flag("gs", a.gs);
            o.flag("n_samples", a.n_samples);
            o.flag("n_boot", a.n_boot);
            figures::reproduce(a.figure, o)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(dir) => {
            println!("bundle: {}", dir.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("nhaas: {e}");
            e.exit_code()
        }
    }
}
