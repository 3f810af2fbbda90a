use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use gridsched::bnb::{BnbError, BnbStatus};
use gridsched::model::{load_model, NetworkModel, ScenarioConfig};
use gridsched::scenarios::{
    check_trends, run_case, solve_instance, write_case_files, write_report_files,
    write_solution_files, Case, RunOptions, ScenarioError, StoredSolution,
};

const EXIT_FAILURE: u8 = 1;
const EXIT_PARSE: u8 = 2;
const EXIT_INFEASIBLE: u8 = 3;
const EXIT_LIMIT: u8 = 4;
const EXIT_AUDIT: u8 = 5;
const EXIT_USAGE: u8 = 64;

const AUDIT_TOL: f64 = 1e-6;

/// Day-ahead scheduler for a hybrid AC/DC microgrid with EV storage.
#[derive(Parser)]
#[command(version, about, long_about = None)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Load and validate a model file.
    Validate {
        input: PathBuf,
    },
    /// Solve one day and write solution.json, audit.csv and metrics.csv.
    Solve {
        input: PathBuf,
        #[command(flatten)]
        solve: SolveArgs,
    },
    /// Run a case study sweep and write caseN.csv and caseN_summary.json.
    Sweep {
        /// Case number (1 nominal, 2 degradation, 3 irradiance, 4 inverter capacity).
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=4))]
        case: u8,
        input: PathBuf,
        #[command(flatten)]
        solve: SolveArgs,
    },
    /// Recompute audit.csv and metrics.csv from a stored solution.json.
    Report {
        solution: PathBuf,
        /// Output directory; defaults to the solution's directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct SolveArgs {
    /// Output directory.
    #[arg(long, default_value = "gridsched-out")]
    out: PathBuf,
    /// Relative branch-and-bound gap.
    #[arg(long)]
    gap_tol: Option<f64>,
    /// Interior-point KKT tolerance.
    #[arg(long)]
    tol: Option<f64>,
    /// Worker threads for sweep instances and B&B nodes; 0 uses every core.
    #[arg(long)]
    workers: Option<usize>,
    /// Logged for provenance; the solver itself uses no randomness.
    #[arg(long)]
    seed: Option<u64>,
    /// Config override, repeatable: k_lost, beta1, beta2, xi, deg_multiplier,
    /// irradiance_fraction, inverter_capacity_fraction, gap_tol, tol, workers,
    /// seed, node_limit, max_iter.
    #[arg(long = "override", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

/// A failure with its exit code.
#[derive(Debug)]
struct Exit(u8, anyhow::Error);

fn exit(code: u8) -> impl FnOnce(anyhow::Error) -> Exit {
    move |e| Exit(code, e)
}

fn parse_number<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| anyhow!("override {key}: cannot parse {value:?}"))
}

/// Applies `--override` pairs, then the dedicated flags.
fn configure(args: &SolveArgs, config: &mut ScenarioConfig) -> Result<(RunOptions, Option<u64>)> {
    let mut opts = RunOptions::default();
    let mut seed = None;
    for item in &args.overrides {
        let (key, value) = item
            .split_once('=')
            .ok_or_else(|| anyhow!("override {item:?} is not KEY=VALUE"))?;
        let (key, value) = (key.trim(), value.trim());
        match key {
            "k_lost" => config.k_lost = parse_number(key, value)?,
            "beta1" => config.beta1 = parse_number(key, value)?,
            "beta2" => config.beta2 = parse_number(key, value)?,
            "xi" => config.xi = parse_number(key, value)?,
            "deg_multiplier" => config.deg_multiplier = parse_number(key, value)?,
            "irradiance_fraction" => config.irradiance_fraction = parse_number(key, value)?,
            "inverter_capacity_fraction" => {
                config.inverter_capacity_fraction = parse_number(key, value)?
            }
            "gap_tol" => opts.bnb.gap_tol = parse_number(key, value)?,
            "tol" => opts.bnb.solver.tol = parse_number(key, value)?,
            "workers" => opts.workers = parse_number(key, value)?,
            "node_limit" => opts.bnb.node_limit = parse_number(key, value)?,
            "max_iter" => opts.bnb.solver.max_iter = parse_number(key, value)?,
            "seed" => seed = Some(parse_number(key, value)?),
            _ => bail!("unknown override key {key:?}"),
        }
    }
    if let Some(v) = args.gap_tol {
        opts.bnb.gap_tol = v;
    }
    if let Some(v) = args.tol {
        opts.bnb.solver.tol = v;
    }
    if let Some(v) = args.workers {
        opts.workers = v;
    }
    if args.seed.is_some() {
        seed = args.seed;
    }
    if !(opts.bnb.gap_tol >= 0.0) {
        bail!("gap_tol must be non-negative");
    }
    if opts.bnb.node_limit == 0 {
        bail!("node_limit must be at least 1");
    }
    opts.bnb.solver.validate().map_err(|e| anyhow!("{e}"))?;
    // Sweeps spread instances over the workers; a single solve spreads nodes.
    opts.bnb.workers = opts.workers;
    Ok((opts, seed))
}

fn load(input: &Path) -> Result<(NetworkModel, ScenarioConfig), Exit> {
    load_model(input)
        .with_context(|| format!("loading {}", input.display()))
        .map_err(exit(EXIT_PARSE))
}

/// Maps a library error to its failure class.
fn classify(e: ScenarioError) -> Exit {
    let code = match &e {
        ScenarioError::Model(_) => EXIT_PARSE,
        ScenarioError::Search { source, .. } => match source {
            BnbError::Infeasible | BnbError::Unbounded => EXIT_INFEASIBLE,
            BnbError::Solver(_) | BnbError::NoIncumbent => EXIT_LIMIT,
            BnbError::Qp(_) => EXIT_FAILURE,
        },
        ScenarioError::Audit { .. } => EXIT_AUDIT,
        _ => EXIT_FAILURE,
    };
    Exit(code, e.into())
}

fn run(cli: Cli) -> Result<(), Exit> {
    match cli.command {
        Command::Validate { input } => {
            let (model, config) = load(&input)?;
            println!(
                "ok: {} buses, {} lines, {} inverters, {} renewables, {} loads, {} EV entries, {} hours",
                model.buses().len(),
                model.lines().len(),
                model.inverters().len(),
                model.renewables().len(),
                model.loads().len(),
                model.evs().len(),
                config.horizon
            );
            Ok(())
        }
        Command::Solve { input, solve } => {
            let (model, mut config) = load(&input)?;
            let (opts, seed) = configure(&solve, &mut config).map_err(exit(EXIT_USAGE))?;
            if let Some(seed) = seed {
                log::info!("seed {seed}");
            }
            let solved = solve_instance("nominal", &model, &config, &opts).map_err(classify)?;
            write_solution_files(&solve.out, &solved).map_err(classify)?;
            let st = &solved.solution.stats;
            println!(
                "{:?}: objective {} gap {:e} nodes {}, {} audit violations",
                st.status,
                st.objective,
                st.gap,
                st.nodes,
                solved.audit.violations.len()
            );
            if st.status == BnbStatus::NodeLimit {
                return Err(Exit(EXIT_LIMIT, anyhow!("node limit reached with gap {:e}", st.gap)));
            }
            if !solved.audit.is_empty() {
                return Err(Exit(EXIT_AUDIT, anyhow!("audit found violations, see audit.csv")));
            }
            Ok(())
        }
        Command::Sweep { case, input, solve } => {
            let case = Case::from_number(case).expect("clap restricts the range");
            let (model, mut config) = load(&input)?;
            let (opts, seed) = configure(&solve, &mut config).map_err(exit(EXIT_USAGE))?;
            if let Some(seed) = seed {
                log::info!("seed {seed}");
            }
            let values = case.table();
            let runs = run_case(&model, &config, case, &values, &opts).map_err(classify)?;
            let checks = check_trends(case, &model, &values, &runs, opts.bnb.gap_tol);
            write_case_files(&solve.out, case, &values, &runs, &checks).map_err(classify)?;
            for c in &checks {
                let verdict = if c.holds { "holds" } else { "VIOLATED" };
                println!("{}: {verdict} ({})", c.name, c.detail);
            }
            if runs.iter().any(|r| r.solution.stats.status == BnbStatus::NodeLimit) {
                return Err(Exit(EXIT_LIMIT, anyhow!("an instance hit the node limit")));
            }
            Ok(())
        }
        Command::Report { solution, out } => {
            let text = fs::read_to_string(&solution)
                .with_context(|| format!("reading {}", solution.display()))
                .map_err(exit(EXIT_PARSE))?;
            let stored = StoredSolution::from_json(&text)
                .with_context(|| format!("parsing {}", solution.display()))
                .map_err(exit(EXIT_PARSE))?;
            let (audit, metrics) = stored.evaluate(AUDIT_TOL).map_err(classify)?;
            let dir = out.unwrap_or_else(|| {
                solution
                    .parent()
                    .map(Path::to_path_buf)
                    .unwrap_or_else(|| PathBuf::from("."))
            });
            write_report_files(&dir, &audit, &metrics).map_err(classify)?;
            if !audit.is_empty() {
                return Err(Exit(EXIT_AUDIT, anyhow!("stored solution fails its audit")));
            }
            Ok(())
        }
    }
}

/// The error chain joined by ": ", skipping causes already quoted by the
/// message above them.
fn describe(e: &anyhow::Error) -> String {
    let mut out = String::new();
    for cause in e.chain() {
        let text = cause.to_string();
        if out.contains(&text) {
            continue;
        }
        if !out.is_empty() {
            out.push_str(": ");
        }
        out.push_str(&text);
    }
    out
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("GRIDSCHED_LOG", "warn"))
        .format_timestamp(None)
        .init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Exit(code, e)) => {
            eprintln!("error: {}", describe(&e));
            ExitCode::from(code)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn args(overrides: &[&str]) -> SolveArgs {
        SolveArgs {
            out: PathBuf::from("x"),
            gap_tol: None,
            tol: None,
            workers: None,
            seed: None,
            overrides: overrides.iter().map(|s| s.to_string()).collect(),
        }
    }

    #[test]
    fn overrides_reach_config_and_options() {
        let mut c = ScenarioConfig::default();
        let (o, seed) = configure(&args(&["beta1=0.2", "gap_tol=1e-6", "seed=7"]), &mut c).unwrap();
        assert_eq!(c.beta1, 0.2);
        assert_eq!(o.bnb.gap_tol, 1e-6);
        assert_eq!(seed, Some(7));
    }

    #[test]
    fn flags_win_over_overrides() {
        let mut c = ScenarioConfig::default();
        let mut a = args(&["tol=1e-6"]);
        a.tol = Some(1e-9);
        assert_eq!(configure(&a, &mut c).unwrap().0.bnb.solver.tol, 1e-9);
    }

    #[test]
    fn bad_overrides_are_rejected() {
        let mut c = ScenarioConfig::default();
        assert!(configure(&args(&["colour=blue"]), &mut c).is_err());
        assert!(configure(&args(&["beta1"]), &mut c).is_err());
        assert!(configure(&args(&["tol=-1"]), &mut c).is_err());
    }
}
