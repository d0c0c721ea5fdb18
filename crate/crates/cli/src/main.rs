use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use fntb::descent::{solve, SolveOptions};
use fntb::generate::{random_instance, rng_from_seed, GenParams};
use fntb::oracle::{brute_force_max_violating, brute_force_opt, OracleBudget};
use fntb::report::{max_multiflow_report, read_solution, solve_report, SolveReport, VerifyReport};
use fntb::{
    check_feasibility, decompose, max_multiflow, parse_instance, parse_network, verify_slackness, Error, Instance,
    UndirectedNetwork,
};

#[derive(Parser, Debug)]
#[command(name = "fntb", version, about = "Half-integral terminal backup solver")]
struct Cli {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve an instance; prints capacities, potential and a multiflow.
    Solve {
        /// NTB file (stdin if omitted).
        input: Option<PathBuf>,
        /// Print one line per descent iteration to stderr.
        #[arg(long)]
        trace: bool,
        /// Plain descent from the origin instead of cost scaling.
        #[arg(long)]
        no_scaling: bool,
    },
    /// Per-terminal cut values and requirement violations.
    Feasibility { input: Option<PathBuf> },
    /// Maximum separately-capacitated multiflow; `r` and costs are ignored.
    Maxmultiflow { input: Option<PathBuf> },
    /// Check a solution document against an instance.
    Verify { instance: PathBuf, solution: PathBuf },
    /// Random feasible instance in NTB format.
    Gen(GenArgs),
    /// Brute-force reference answers for tiny inputs.
    Oracle {
        #[command(subcommand)]
        command: OracleCommand,
    },
}

#[derive(Args, Debug)]
struct GenArgs {
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value_t = 8)]
    n: usize,
    #[arg(long, default_value_t = 3)]
    k: usize,
    #[arg(long, default_value_t = 0.4)]
    p_edge: f64,
    /// Maximum edge capacity.
    #[arg(long = "u", default_value_t = 2)]
    max_u: i64,
    /// Maximum edge cost.
    #[arg(long = "a", default_value_t = 5)]
    max_a: i64,
    /// Maximum node capacity.
    #[arg(long = "c", default_value_t = 3)]
    max_c: i64,
    /// Maximum requirement.
    #[arg(long = "r", default_value_t = 2)]
    max_r: i64,
    #[arg(long)]
    max_edges: Option<usize>,
    #[arg(long)]
    allow_degenerate: bool,
    #[arg(long, default_value_t = 200)]
    retries: usize,
}

#[derive(Subcommand, Debug)]
enum OracleCommand {
    /// Exhaustive optimum over half-integral capacities.
    Solve {
        input: Option<PathBuf>,
        /// Maximum number of capacity vectors to enumerate.
        #[arg(long, default_value_t = 5_000_000)]
        budget: u64,
        /// Wall-clock limit in seconds.
        #[arg(long)]
        time_limit: Option<u64>,
    },
    /// Maximum violating cut of a network dump (`u N` header, `i j lo hi` lines).
    Cut {
        input: Option<PathBuf>,
        /// Maximum node count.
        #[arg(long, default_value_t = 12)]
        budget: usize,
    },
}

/// A failed run: exit code plus what to print on stderr.
struct Failure {
    code: u8,
    message: String,
}

const INVALID: u8 = 1;
const INFEASIBLE: u8 = 2;
const INTERNAL: u8 = 3;

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Infeasible(_) => INFEASIBLE,
            Error::Internal(_) | Error::IterationGuard(_) => INTERNAL,
            Error::Parse(_) | Error::Overflow(_) | Error::Contract(_) | Error::Budget(_) => INVALID,
        };
        Failure { code, message: e.to_string() }
    }
}

impl From<fntb::ParseError> for Failure {
    fn from(e: fntb::ParseError) -> Self {
        Failure { code: INVALID, message: e.to_string() }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure { code: INVALID, message: format!("{e:#}") }
    }
}

fn read_input(path: Option<&Path>) -> anyhow::Result<String> {
    match path {
        Some(p) => fs::read_to_string(p).with_context(|| format!("reading {}", p.display())),
        None => {
            let mut s = String::new();
            io::stdin().read_to_string(&mut s).context("reading stdin")?;
            Ok(s)
        }
    }
}

fn emit<T: serde::Serialize>(value: &T) {
    let mut out = io::stdout().lock();
    let _ = writeln!(out, "{}", serde_json::to_string_pretty(value).expect("reports serialize"));
}

fn run(cli: Cli) -> Result<(), Failure> {
    let format = cli.format;
    match cli.command {
        Command::Solve { input, trace, no_scaling } => {
            let inst = parse_instance(&read_input(input.as_deref())?)?;
            let feas = check_feasibility(&inst);
            if !feas.feasible {
                emit(&json!({ "status": "infeasible", "nu": feas.nu, "violations": feas.violations }));
                return Err(Failure { code: INFEASIBLE, message: "instance is infeasible".into() });
            }
            let res = solve(&inst, SolveOptions { scaling: !no_scaling })?;
            if trace {
                let mut err = io::stderr().lock();
                for entry in &res.trace {
                    let _ = writeln!(err, "{entry}");
                }
            }
            let flow = decompose(&inst, &res.x, &res.p)?;
            let report = solve_report(&inst, &res, Some(&flow));
            match format {
                Format::Json => emit(&report),
                Format::Text => print_solve_text(&inst, &report),
            }
        }
        Command::Feasibility { input } => {
            let inst = parse_instance(&read_input(input.as_deref())?)?;
            let feas = check_feasibility(&inst);
            match format {
                Format::Json => emit(&feas),
                Format::Text => {
                    println!("feasible: {}", feas.feasible);
                    for v in &feas.violations {
                        println!("terminal {}: nu = {} < r = {}", v.terminal, v.nu, v.r);
                    }
                }
            }
            if !feas.feasible {
                return Err(Failure {
                    code: INFEASIBLE,
                    message: format!("{} terminal(s) violate their requirement", feas.violations.len()),
                });
            }
        }
        Command::Maxmultiflow { input } => {
            let netw = parse_network(&read_input(input.as_deref())?)?;
            let mm = max_multiflow(&netw)?;
            match format {
                Format::Json => emit(&max_multiflow_report(&mm)),
                Format::Text => {
                    println!("nu: {:?}", mm.nu);
                    println!("value: {}", mm.value);
                    for p in &mm.flow.paths {
                        println!("{} {:?}", p.lambda, p.nodes);
                    }
                }
            }
        }
        Command::Verify { instance, solution } => {
            let inst = parse_instance(&read_input(Some(&instance))?)?;
            let text = read_input(Some(&solution))?;
            let doc: SolveReport =
                serde_json::from_str(&text).map_err(|e| Failure { code: INVALID, message: format!("solution JSON: {e}") })?;
            let (x, p) = read_solution(&inst, &doc)?;
            let slackness = verify_slackness(&inst, &x, &p)?;
            let report = VerifyReport { pass: slackness.pass, gap_x2: slackness.gap.doubled(), slackness };
            match format {
                Format::Json => emit(&report),
                Format::Text => {
                    println!("pass: {} gap: {}", report.pass, report.slackness.gap);
                    for f in &report.slackness.failures {
                        println!("{}: {}", f.clause, f.detail);
                    }
                }
            }
            if !report.pass {
                return Err(Failure { code: INVALID, message: "solution is not certified optimal".into() });
            }
        }
        Command::Gen(args) => {
            let params = GenParams {
                n: args.n,
                k: args.k,
                p_edge: args.p_edge,
                max_u: args.max_u,
                max_a: args.max_a,
                max_c: args.max_c,
                max_r: args.max_r,
                max_edges: args.max_edges,
                allow_degenerate: args.allow_degenerate,
                retries: args.retries,
            };
            let inst = random_instance(&params, &mut rng_from_seed(args.seed))?;
            print!("{}", inst.to_ntb_text());
        }
        Command::Oracle { command: OracleCommand::Solve { input, budget, time_limit } } => {
            let inst = parse_instance(&read_input(input.as_deref())?)?;
            let budget = OracleBudget {
                max_combinations: budget,
                time_limit: time_limit.map(Duration::from_secs),
                ..OracleBudget::default()
            };
            match brute_force_opt(&inst, &budget)? {
                Some(opt) => emit(&json!({ "status": "optimal", "cost_x2": opt.doubled() })),
                None => {
                    emit(&json!({ "status": "infeasible" }));
                    return Err(Failure { code: INFEASIBLE, message: "no feasible capacity vector".into() });
                }
            }
        }
        Command::Oracle { command: OracleCommand::Cut { input, budget } } => {
            let net = UndirectedNetwork::parse_dump(&read_input(input.as_deref())?)?;
            let budget = OracleBudget { max_cut_nodes: budget, ..OracleBudget::default() };
            match brute_force_max_violating(&net, &budget)? {
                Some((cut, k)) => emit(&json!({
                    "status": "violating",
                    "kappa_x2": k.doubled(),
                    "y": cut.y_nodes(),
                    "z": cut.z_nodes(),
                })),
                None => emit(&json!({ "status": "feasible" })),
            }
        }
    }
    Ok(())
}

fn print_solve_text(inst: &Instance, report: &SolveReport) {
    let half = |d: i64| fntb::Half::from_doubled(d).to_string();
    println!("cost: {}", half(report.cost_x2));
    println!("gap: {}", half(report.gap_x2));
    println!("iterations: {:?}", report.iterations);
    for ev in &report.x {
        println!("x {} {} = {}", ev.i, ev.j, half(ev.x_x2));
    }
    for row in &report.potential {
        let coords: Vec<String> = row.tree_x2.iter().map(|&d| half(d)).collect();
        let mark = if inst.is_terminal(row.node) { "t" } else { " " };
        println!("p{mark} {} = ({})", row.node, coords.join(", "));
    }
    if let Some(f) = &report.multiflow {
        println!("multiflow value: {}", half(f.value_x2));
        for p in &f.paths {
            println!("  {} {:?}", half(p.lambda_x2), p.nodes);
        }
    }
}

fn main() -> ExitCode {
    // Usage errors count as invalid input (clap would exit with 2).
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { INVALID } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("fntb: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
