mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{parse_config, split_list, Convention, Format, Mode, RunConfig, Usage};

#[derive(Parser)]
#[command(name = "mumford", version, about = "Exact and numerical checks for Mumford-type integrable systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Default)]
struct Common {
    /// key=value file; flags override its settings
    #[arg(long)]
    config: Option<PathBuf>,
    /// mumford, even-mumford, prym1, prym2, dlax1, dlax2, ny1, ny2
    #[arg(long)]
    family: Option<String>,
    #[arg(long)]
    g: Option<usize>,
    #[arg(long, value_enum)]
    mode: Option<Mode>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    points: Option<usize>,
    #[arg(long)]
    tol: Option<f64>,
    /// Write the artifact here instead of stdout
    #[arg(long, short)]
    output: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Args, Default)]
struct Timing {
    #[arg(long, allow_hyphen_values = true)]
    t_end: Option<f64>,
    #[arg(long)]
    step: Option<f64>,
    /// JSON initial point; a seeded random point is drawn otherwise
    #[arg(long)]
    point: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate a flow with RK4 and emit the trajectory
    Simulate {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        timing: Timing,
        /// Record every n-th step
        #[arg(long)]
        every: Option<usize>,
        /// Coefficients c_i of sum c_i D_i, comma separated
        #[arg(long, allow_hyphen_values = true)]
        direction: Option<String>,
        #[arg(long)]
        constraint_tol: Option<f64>,
    },
    /// Exact invariance, bracket, rank and pushforward report
    Verify {
        #[command(flatten)]
        common: Common,
    },
    /// Commutative diagrams of the Lax and chain maps
    DiagramCheck {
        #[command(flatten)]
        common: Common,
        /// Fixed gauge qcheck_1 for even chains
        #[arg(long, allow_hyphen_values = true)]
        gauge: Option<String>,
        /// Compare psi'' across gauges for even chains
        #[arg(long, num_args = 0..=1, default_missing_value = "-2,-1,1/3,1,2,canonical", allow_hyphen_values = true)]
        sweep_gauge: Option<String>,
    },
    /// Betti numbers, Euler numbers and q-Euler characteristics
    CohomologyTable {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        gmax: Option<usize>,
    },
    /// q-Euler characteristic: oracle against closed form, and the q -> 1 limit
    QEuler {
        #[command(flatten)]
        common: Common,
        /// odd, even, prym1, prym2
        #[arg(long)]
        kind: Option<String>,
        #[arg(long, value_enum)]
        convention: Option<Convention>,
    },
    /// Genus-one closed forms compared against RK4
    SolveExact {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        timing: Timing,
        /// CSV written by `simulate` to compare against
        #[arg(long)]
        compare: Option<PathBuf>,
        #[arg(long)]
        sup_tol: Option<f64>,
        #[arg(long)]
        identity_tol: Option<f64>,
    },
    /// Two-sheet splitting of a variant-II fiber
    FiberSplit {
        #[command(flatten)]
        common: Common,
    },
    /// Every contract in one run
    VerifyAll {
        #[command(flatten)]
        common: Common,
    },
}

macro_rules! flag {
    ($cfg:ident . $field:ident, $value:expr) => {
        if let Some(v) = $value {
            $cfg.$field = v;
        }
    };
    ($cfg:ident . $field:ident ?, $value:expr) => {
        if let Some(v) = $value {
            $cfg.$field = Some(v);
        }
    };
}

fn positive_flag(name: &str, v: Option<f64>) -> anyhow::Result<Option<f64>> {
    match v {
        Some(x) if !(x > 0.0 && x.is_finite()) => config::usage(format!("--{name} must be positive")),
        v => Ok(v),
    }
}

fn merge(common: Common, name: &str) -> anyhow::Result<RunConfig> {
    let mut cfg = match &common.config {
        Some(p) => parse_config(p)?,
        None => RunConfig::default(),
    };
    cfg.command = name.to_string();
    flag!(cfg.family?, common.family);
    flag!(cfg.g?, common.g);
    flag!(cfg.mode, common.mode);
    flag!(cfg.seed, common.seed);
    flag!(cfg.points, common.points);
    flag!(cfg.tol, positive_flag("tol", common.tol)?);
    flag!(cfg.output?, common.output);
    flag!(cfg.format?, common.format);
    Ok(cfg)
}

fn merge_timing(cfg: &mut RunConfig, t: Timing) -> anyhow::Result<()> {
    flag!(cfg.t_end?, t.t_end);
    flag!(cfg.step, positive_flag("step", t.step)?);
    flag!(cfg.point?, t.point);
    Ok(())
}

fn configure(cli: Cli) -> anyhow::Result<RunConfig> {
    Ok(match cli.command {
        Command::Simulate { common, timing, every, direction, constraint_tol } => {
            let mut cfg = merge(common, "simulate")?;
            merge_timing(&mut cfg, timing)?;
            flag!(cfg.every, every);
            flag!(cfg.constraint_tol, positive_flag("constraint-tol", constraint_tol)?);
            if let Some(d) = direction {
                cfg.set("direction", &d).map_err(Usage)?;
            }
            cfg
        }
        Command::Verify { common } => merge(common, "verify")?,
        Command::DiagramCheck { common, gauge, sweep_gauge } => {
            let mut cfg = merge(common, "diagram-check")?;
            flag!(cfg.gauge, gauge);
            flag!(cfg.sweep_gauge?, sweep_gauge.map(|s| split_list(&s)));
            cfg
        }
        Command::CohomologyTable { common, gmax } => {
            let mut cfg = merge(common, "cohomology-table")?;
            flag!(cfg.gmax, gmax);
            cfg
        }
        Command::QEuler { common, kind, convention } => {
            let mut cfg = merge(common, "q-euler")?;
            flag!(cfg.kind?, kind);
            flag!(cfg.convention, convention);
            cfg
        }
        Command::SolveExact { common, timing, compare, sup_tol, identity_tol } => {
            let mut cfg = merge(common, "solve-exact")?;
            merge_timing(&mut cfg, timing)?;
            flag!(cfg.compare?, compare);
            flag!(cfg.sup_tol, positive_flag("sup-tol", sup_tol)?);
            flag!(cfg.identity_tol, positive_flag("identity-tol", identity_tol)?);
            cfg
        }
        Command::FiberSplit { common } => merge(common, "fiber-split")?,
        Command::VerifyAll { common } => merge(common, "verify-all")?,
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = configure(cli).and_then(|cfg| commands::run(&cfg));
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<Usage>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
