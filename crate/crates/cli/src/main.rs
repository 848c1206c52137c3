use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use trslink::optimizer::grid_search_oracle;
use trslink_cli::config::{load_scenario, Format, ScenarioConfig};
use trslink_cli::driver::{gamma_sweep, run_optimizer, run_scenario};
use trslink_cli::error::ScenarioError;
use trslink_cli::report;

#[derive(Parser)]
#[command(name = "trslink", version, about = "TRS-assisted link and network simulator")]
struct Cli {
    /// Worker threads (default: all cores). Output does not depend on this.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Scenario file (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Override monte_carlo.seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Write the report here instead of stdout (overrides output.path).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override output.format.
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Subcommand)]
enum Command {
    /// Monte-Carlo run of every link with and without TRS.
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Override monte_carlo.n_samples.
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Power allocation by simulated annealing, optionally checked against a grid.
    Optimize {
        #[command(flatten)]
        common: Common,
        /// Also run the exhaustive grid with this many points per node.
        #[arg(long)]
        grid_points: Option<usize>,
    },
    /// Network totals over a list of γ values, all on the same fading draws.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Comma-separated γ values, each >= 1.
        #[arg(long, value_delimiter = ',', required = true)]
        gamma: Vec<f64>,
        #[arg(long)]
        samples: Option<usize>,
    },
}

fn load(common: &Common) -> Result<ScenarioConfig, ScenarioError> {
    let text = std::fs::read_to_string(&common.config)?;
    let mut cfg = load_scenario(&text)?;
    if let Some(s) = common.seed {
        cfg.set_seed(s);
    }
    if let Some(f) = common.format {
        cfg.format = f;
        cfg.raw.output.format = f;
    }
    if let Some(p) = &common.out {
        cfg.output_path = Some(p.display().to_string());
    }
    Ok(cfg)
}

fn emit(cfg: &ScenarioConfig, text: &str) -> Result<(), ScenarioError> {
    match &cfg.output_path {
        Some(p) => std::fs::write(Path::new(p), text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), ScenarioError> {
    match cli.command {
        Command::Simulate { common, samples } => {
            let mut cfg = load(&common)?;
            if let Some(n) = samples {
                cfg.set_samples(n)?;
            }
            let r = run_scenario(&cfg)?;
            emit(&cfg, &report::render(&r, cfg.format))
        }
        Command::Optimize { common, grid_points } => {
            let cfg = load(&common)?;
            let problem = cfg.power_problem().ok_or_else(|| ScenarioError::Validation {
                path: "optimizer".into(),
                message: "the scenario has no [optimizer] section".into(),
            })??;
            let sa = run_optimizer(&cfg, &problem)?;
            let grid = grid_points.map(|n| grid_search_oracle(&problem, n)).transpose()?;
            let text = match cfg.format {
                Format::Json => {
                    let mut s = serde_json::to_string_pretty(&serde_json::json!({
                        "seed": cfg.seed,
                        "annealing": sa,
                        "grid": grid,
                    }))
                    .expect("serializable");
                    s.push('\n');
                    s
                }
                Format::Csv => {
                    let mut s = String::from("solver,feasible,objective,energy_total_j,latency_total_s,evaluations");
                    for n in &cfg.raw.topology.nodes {
                        s.push_str(&format!(",power_w[{}]", n.id));
                    }
                    s.push('\n');
                    for r in std::iter::once(&sa).chain(grid.as_ref()) {
                        s.push_str(&format!(
                            "{:?},{},{:.16e},{:.16e},{:.16e},{}",
                            r.solver, r.feasible, r.objective, r.energy_total_j, r.latency_total_s, r.evaluations
                        ));
                        for p in r.allocation.powers_w() {
                            s.push_str(&format!(",{p:.16e}"));
                        }
                        s.push('\n');
                    }
                    s
                }
            };
            emit(&cfg, &text)
        }
        Command::Sweep { common, gamma, samples } => {
            let mut cfg = load(&common)?;
            if let Some(n) = samples {
                cfg.set_samples(n)?;
            }
            let rows = gamma_sweep(&cfg, &gamma)?;
            let text = match cfg.format {
                Format::Csv => report::sweep_csv(&rows),
                Format::Json => report::sweep_json(&rows),
            };
            emit(&cfg, &text)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
