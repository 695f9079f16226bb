use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use d2d_core::harness::{rows_to_csv, run_compare, run_sweep, write_atomic, AlgoSpec, SweepSpec};
use d2d_core::scenario_gen::{generate, GenConfig};
use d2d_core::{Error, Scenario};

const EXIT_ERROR: u8 = 2;
const EXIT_VIOLATION: u8 = 3;

/// Name of the generator config looked up in the config directory when
/// `--config` is not given.
const DEFAULT_CONFIG_NAME: &str = "gen.json";

#[derive(Parser, Debug)]
#[command(name = "d2d", version, about = "Mode selection and channel assignment for D2D underlay networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Draw a random scenario.
    Gen {
        /// Generator config (JSON). Defaults to gen.json in the config
        /// directory, or built-in defaults when that file is absent.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, env = "D2D_CONFIG_DIR")]
        config_dir: Option<PathBuf>,
        /// Overrides the config's master seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Solve one scenario.
    Solve {
        /// dp, greedy or exhaustive.
        #[arg(long)]
        algo: String,
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        restrict_sharing: bool,
        #[arg(long)]
        force_d2d_mode: bool,
        #[arg(long)]
        per_hop_qos: bool,
        /// Enumeration budget (exhaustive) or memo budget (dp).
        #[arg(long)]
        budget: Option<u64>,
    },
    /// Run several algorithms on one scenario and cross-check them.
    Compare {
        #[arg(long)]
        scenario: PathBuf,
        /// Comma-separated algorithm tags, e.g. dp,greedy,greedy+restrict-sharing.
        #[arg(long, value_delimiter = ',', default_value = "dp,greedy")]
        algos: Vec<String>,
        /// CSV output; printed to stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a parameter sweep described by a JSON spec.
    Sweep {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long, default_value_t = 1)]
        workers: usize,
        /// Overrides the spec's master seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Overrides the spec's output path.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}

fn run(command: Command) -> Result<ExitCode, Error> {
    match command {
        Command::Gen { config, config_dir, seed, out } => {
            let mut cfg = load_config(config.as_deref(), config_dir.as_deref())?;
            if let Some(seed) = seed {
                cfg.master_seed = seed;
            }
            let scenario = generate(&cfg)?;
            write_atomic(&out, scenario.to_json()?.as_bytes())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Solve { algo, scenario, out, restrict_sharing, force_d2d_mode, per_hop_qos, budget } => {
            let mut tag = algo;
            for (on, flag) in [
                (restrict_sharing, "+restrict-sharing"),
                (force_d2d_mode, "+force-d2d-mode"),
                (per_hop_qos, "+per-hop-qos"),
            ] {
                if on {
                    tag.push_str(flag);
                }
            }
            let mut spec: AlgoSpec = tag.parse()?;
            if let Some(b) = budget {
                spec = spec.with_budget(b);
            }
            let scenario = Scenario::load(&scenario)?;
            let result = spec.run(&scenario)?;
            write_atomic(&out, result.to_json()?.as_bytes())?;
            match result.objective {
                Some(v) => eprintln!("{}: objective {v}", result.algo),
                None => eprintln!("{}: no feasible assignment", result.algo),
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Compare { scenario, algos, out } => {
            let specs = algos.iter().map(|a| a.parse()).collect::<Result<Vec<AlgoSpec>, _>>()?;
            let scenario = Scenario::load(&scenario)?;
            let cmp = run_compare(&scenario, &specs);
            for row in &cmp.rows {
                if let Some(e) = &row.error {
                    eprintln!("{}: failed: {e}", row.algo);
                }
            }
            let csv = rows_to_csv(&cmp.rows)?;
            match out {
                Some(path) => write_atomic(&path, &csv)?,
                None => print!("{}", String::from_utf8_lossy(&csv)),
            }
            Ok(report_violations(&cmp.violations))
        }
        Command::Sweep { spec, workers, seed, out } => {
            let mut spec = SweepSpec::load(&spec)?;
            if let Some(seed) = seed {
                spec.base.master_seed = seed;
            }
            if let Some(out) = out {
                spec.output = out;
            }
            let outcome = run_sweep(&spec, workers)?;
            let failed = outcome.rows.iter().filter(|r| r.error.is_some()).count();
            if failed > 0 {
                eprintln!("{failed} runs failed; their rows carry no objective");
            }
            eprintln!(
                "wrote {} rows to {} and {}",
                outcome.rows.len(),
                spec.output.display(),
                spec.summary_path().display()
            );
            Ok(report_violations(&outcome.violations))
        }
    }
}

fn load_config(config: Option<&Path>, config_dir: Option<&Path>) -> Result<GenConfig, Error> {
    if let Some(path) = config {
        return GenConfig::load(path);
    }
    if let Some(dir) = config_dir {
        let path = dir.join(DEFAULT_CONFIG_NAME);
        if path.exists() {
            return GenConfig::load(path);
        }
    }
    Ok(GenConfig::default())
}

fn report_violations(violations: &[d2d_core::harness::InvariantViolation]) -> ExitCode {
    for v in violations {
        eprintln!("invariant violated: {v}");
    }
    if violations.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_VIOLATION)
    }
}
