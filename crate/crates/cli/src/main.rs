use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use sg_cli::config::{parse_file, RunConfig};
use sg_cli::presets;
use sg_cli::scenario::{self, EXIT_CONFIG, EXIT_OK};

#[derive(Parser)]
#[command(name = "sg", version, about = "Regularised semigeostrophic solver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario to its horizon
    Run { config: PathBuf },
    /// Run the dyadic family tau/2^j, epsilon/2^j and tabulate differences
    Refine {
        config: PathBuf,
        #[arg(long, default_value_t = 3)]
        levels: usize,
    },
    /// Parse the scenario and check the initial data
    Validate { config: PathBuf },
    /// List the domain presets
    Presets,
}

fn init_threads() -> Result<()> {
    if let Ok(v) = std::env::var("SG_THREADS") {
        let n: usize = v.trim().parse().with_context(|| format!("SG_THREADS must be a positive integer, got `{v}`"))?;
        anyhow::ensure!(n > 0, "SG_THREADS must be a positive integer, got `{v}`");
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn load(path: &Path) -> Result<RunConfig> {
    let cfg = parse_file(path).with_context(|| format!("in {}", path.display()))?;
    print!("{}", cfg.echo());
    Ok(cfg)
}

fn run(cli: Cli) -> Result<i32> {
    init_threads()?;
    match cli.command {
        Command::Presets => {
            for p in presets::ALL {
                println!("{:<14} {}", p.name(), p.summary());
            }
            Ok(EXIT_OK)
        }
        Command::Validate { config } => {
            let cfg = load(&config)?;
            match scenario::validate(&cfg) {
                Ok(mu0) => {
                    println!("ok: mu0 = {mu0:.6}, {} steps", cfg.solver.n_steps());
                    Ok(EXIT_OK)
                }
                Err(e) => {
                    eprintln!("sg: {e}");
                    Ok(scenario::exit_code(&e))
                }
            }
        }
        Command::Run { config } => {
            let cfg = load(&config)?;
            let report = scenario::run_scenario(&cfg)?;
            let s = &report.summary;
            match &s.halt {
                None => println!("horizon t = {} reached after {} steps", s.t_reached, s.steps_completed),
                Some(h) => eprintln!("sg: halted at t = {} after {} steps: {}", s.t_reached, s.steps_completed, h.message),
            }
            Ok(s.exit_code)
        }
        Command::Refine { config, levels } => {
            let cfg = load(&config)?;
            let (rows, worst) = scenario::refine(&cfg, levels)?;
            for r in rows {
                let d = r.difference.map(|d| format!("{d:.3e}")).unwrap_or_else(|| "-".into());
                println!("level {} tau {:e} epsilon {:e} exit {} difference {d}", r.level, r.tau, r.epsilon, r.exit_code);
            }
            Ok(worst)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("sg: {e:#}");
            ExitCode::from(EXIT_CONFIG as u8)
        }
    }
}
