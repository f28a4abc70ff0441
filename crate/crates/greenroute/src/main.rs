//! Command-line driver: validate instances and candidate solutions, solve
//! exactly, export LP files, demonstrate the model defects and generate
//! seeded test instances.
//!
//! Exit codes: 0 success, 1 I/O or schema errors, 2 solution-check
//! violations, 3 infeasible, 4 node budget exceeded.

use anyhow::{anyhow, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use greenroute::solver::DEFAULT_MAX_PATHS;
use greenroute::{
    check_solution, demonstrate_defects, instance_from_json, lpexport, solve_exact, GapError,
    Instance, Rat, SolveOptions, SolveStatus, Solution, Variant,
};
use serde_json::{json, Value};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

const EXIT_OK: u8 = 0;
const EXIT_ERROR: u8 = 1;
const EXIT_VIOLATIONS: u8 = 2;
const EXIT_INFEASIBLE: u8 = 3;
const EXIT_BUDGET: u8 = 4;

/// Environment variable overriding the per-demand simple-path cap.
const MAX_PATHS_ENV: &str = "GREENROUTE_MAX_PATHS";

#[derive(Parser)]
#[command(
    name = "greenroute",
    version,
    about = "Exact energy-aware routing: validate, solve, export, demo, gen"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum VariantArg {
    Corrected,
    Relaxed,
}

impl From<VariantArg> for Variant {
    fn from(v: VariantArg) -> Variant {
        match v {
            VariantArg::Corrected => Variant::Corrected,
            VariantArg::Relaxed => Variant::Relaxed,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Validate an instance file and optionally check a solution against it.
    Validate {
        instance: PathBuf,
        /// Solution file to check (JSON with an "assignment" object and an
        /// optional claimed "objective").
        #[arg(long)]
        solution: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "corrected")]
        variant: VariantArg,
        /// Report file; stdout when omitted.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Solve an instance exactly by branch-and-bound.
    Solve {
        instance: PathBuf,
        #[arg(long, value_enum, default_value = "corrected")]
        variant: VariantArg,
        /// Search node limit.
        #[arg(long, default_value_t = 1_000_000)]
        budget: u64,
        /// Worker threads; results are identical to sequential runs.
        #[arg(long, default_value_t = 1)]
        threads: usize,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Export the instance's model in LP format.
    Export {
        instance: PathBuf,
        #[arg(long, value_enum, default_value = "corrected")]
        variant: VariantArg,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Demonstrate both formulation defects on an instance.
    Demo {
        instance: PathBuf,
        #[arg(long, default_value_t = 1_000_000)]
        budget: u64,
        #[arg(long, default_value_t = 1)]
        threads: usize,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Generate a deterministic pseudo-random instance.
    Gen {
        #[arg(long)]
        seed: u64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}

fn run(command: Command) -> Result<u8> {
    match command {
        Command::Validate {
            instance,
            solution,
            variant,
            output,
        } => cmd_validate(&instance, solution.as_deref(), variant.into(), output.as_deref()),
        Command::Solve {
            instance,
            variant,
            budget,
            threads,
            output,
        } => cmd_solve(&instance, variant.into(), budget, threads, output.as_deref()),
        Command::Export {
            instance,
            variant,
            output,
        } => cmd_export(&instance, variant.into(), output.as_deref()),
        Command::Demo {
            instance,
            budget,
            threads,
            output,
        } => cmd_demo(&instance, budget, threads, output.as_deref()),
        Command::Gen { seed, output } => {
            write_output(output.as_deref(), &greenroute::generate::generate_file_json(seed))?;
            Ok(EXIT_OK)
        }
    }
}

fn load_instance(path: &Path) -> Result<Instance> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read instance file {}", path.display()))?;
    instance_from_json(&text).map_err(|e| anyhow!("{e}"))
}

fn solve_options(budget: u64, threads: usize) -> Result<SolveOptions> {
    if budget < 1 {
        return Err(anyhow!("--budget must be at least 1"));
    }
    let max_paths = match std::env::var(MAX_PATHS_ENV) {
        Ok(value) => value
            .parse::<usize>()
            .ok()
            .filter(|&n| n >= 1)
            .ok_or_else(|| anyhow!("{MAX_PATHS_ENV} must be a positive integer, got {value:?}"))?,
        Err(std::env::VarError::NotPresent) => DEFAULT_MAX_PATHS,
        Err(e) => return Err(anyhow!("cannot read {MAX_PATHS_ENV}: {e}")),
    };
    Ok(SolveOptions {
        budget,
        threads: threads.max(1),
        max_paths,
    })
}

fn write_output(path: Option<&Path>, content: &str) -> Result<()> {
    match path {
        Some(path) => std::fs::write(path, content)
            .with_context(|| format!("cannot write {}", path.display())),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn to_pretty(value: &impl serde::Serialize) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("reports serialize");
    text.push('\n');
    text
}

fn cmd_validate(
    instance_path: &Path,
    solution_path: Option<&Path>,
    variant: Variant,
    output: Option<&Path>,
) -> Result<u8> {
    let inst = load_instance(instance_path)?;
    let report = match solution_path {
        None => greenroute::CheckReport {
            passed: true,
            violations: Vec::new(),
        },
        Some(path) => {
            let solution = load_solution(path, &inst)?;
            check_solution(&inst, &solution, variant).map_err(|e| anyhow!("{e}"))?
        }
    };
    write_output(output, &to_pretty(&report))?;
    Ok(if report.passed { EXIT_OK } else { EXIT_VIOLATIONS })
}

fn load_solution(path: &Path, inst: &Instance) -> Result<Solution> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read solution file {}", path.display()))?;
    let value: Value = serde_json::from_str(&text)
        .with_context(|| format!("solution file {} is not valid JSON", path.display()))?;
    let object = value
        .as_object()
        .ok_or_else(|| anyhow!("solution file must hold a JSON object"))?;
    let claimed = match object.get("objective") {
        None | Some(Value::Null) => None,
        Some(Value::String(s)) => Some(s.parse::<Rat>().map_err(|e| anyhow!("{e}"))?),
        Some(Value::Number(n)) => Some(n.to_string().parse::<Rat>().map_err(|e| anyhow!("{e}"))?),
        Some(_) => return Err(anyhow!("objective must be a number or decimal string")),
    };
    let assignment = object
        .get("assignment")
        .and_then(Value::as_object)
        .ok_or_else(|| anyhow!("solution file needs an \"assignment\" object"))?;
    let entries: Vec<(String, u8)> = assignment
        .iter()
        .map(|(name, bit)| {
            let bit = bit
                .as_u64()
                .filter(|&b| b <= 1)
                .ok_or_else(|| anyhow!("assignment value for {name} must be 0 or 1"))?;
            Ok((name.clone(), bit as u8))
        })
        .collect::<Result<_>>()?;
    Solution::from_assignment(inst, entries, claimed).map_err(|e| anyhow!("{e}"))
}

fn cmd_solve(
    instance_path: &Path,
    variant: Variant,
    budget: u64,
    threads: usize,
    output: Option<&Path>,
) -> Result<u8> {
    let inst = load_instance(instance_path)?;
    let options = solve_options(budget, threads)?;
    let outcome = solve_exact(&inst, variant, &options).map_err(|e| anyhow!("{e}"))?;
    let report = json!({
        "status": outcome.status.as_str(),
        "variant": variant.as_str(),
        "objective": outcome.solution.as_ref().map(|s| s.objective_value.to_string()),
        "assignment": outcome.solution.as_ref().map(|s| s.assignment()),
        "nodes_explored": outcome.nodes_explored,
    });
    write_output(output, &to_pretty(&report))?;
    Ok(match outcome.status {
        SolveStatus::Optimal => EXIT_OK,
        SolveStatus::Infeasible => EXIT_INFEASIBLE,
        SolveStatus::BudgetExceeded => EXIT_BUDGET,
    })
}

fn cmd_export(instance_path: &Path, variant: Variant, output: Option<&Path>) -> Result<u8> {
    let inst = load_instance(instance_path)?;
    let model = greenroute::formulation::build_variant(&inst, variant);
    let doc = lpexport::export_lp(&model).map_err(|e| anyhow!("{e}"))?;
    write_output(output, &doc.text)?;
    Ok(EXIT_OK)
}

fn cmd_demo(
    instance_path: &Path,
    budget: u64,
    threads: usize,
    output: Option<&Path>,
) -> Result<u8> {
    let inst = load_instance(instance_path)?;
    let options = solve_options(budget, threads)?;
    match demonstrate_defects(&inst, &options) {
        Ok(report) => {
            write_output(output, &to_pretty(&report))?;
            Ok(EXIT_OK)
        }
        Err(GapError::Infeasible { variant }) => {
            eprintln!("error: the {variant} variant is infeasible on this instance");
            Ok(EXIT_INFEASIBLE)
        }
        Err(GapError::BudgetExceeded { variant }) => {
            eprintln!("error: node budget exceeded while solving the {variant} variant");
            Ok(EXIT_BUDGET)
        }
        Err(GapError::Solve(e)) => Err(anyhow!("{e}")),
    }
}
