//! Command-line front door: argument parsing and process plumbing around
//! the library pipeline.

use clap::{Parser, ValueEnum};
use loopm::cli::{self, OutputFormat, RunConfig, SimulateOptions};
use loopm::moments::MomentGoal;
use loopm::Limits;
use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Text,
    Json,
}

/// Exact algebraic analyzer for classical and probabilistic while-loops.
#[derive(Parser, Debug)]
#[command(name = "loopm", version)]
struct Args {
    /// Program file to analyze.
    benchmark: PathBuf,

    /// Goals such as "E(x**2)", "c2(x)", or "k3(x)".
    /// Defaults to the expected value of every program variable.
    #[arg(long, num_args = 1.., value_name = "GOAL")]
    goals: Vec<String>,

    /// Compute the invariant ideal of the goal closed forms.
    #[arg(long)]
    invariants: bool,

    /// Report the limits of the goals on loop exit (needs a real guard).
    #[arg(long = "after_loop")]
    after_loop: bool,

    /// Differentiate the goal closed forms with respect to a parameter.
    #[arg(long = "sens_diff", value_name = "PARAM", conflicts_with = "sens")]
    sens_diff: Option<String>,

    /// Solve sensitivity recurrences directly (works past R3 violations).
    #[arg(long, value_name = "PARAM")]
    sens: Option<String>,

    /// Report recurrence-obeying combinations of defective variables.
    #[arg(long = "synth_unsolv_inv")]
    synth_unsolv_inv: bool,

    /// Emit a solvable loop tracking the best combination.
    #[arg(long = "synth_solv_loop")]
    synth_solv_loop: bool,

    /// Degree bound for combination synthesis.
    #[arg(long = "inv_deg", default_value_t = 2, value_parser = clap::value_parser!(u32).range(1..))]
    inv_deg: u32,

    #[arg(long, value_enum, default_value_t = FormatArg::Text)]
    format: FormatArg,

    /// Run the Monte Carlo interpreter for N iterations.
    #[arg(long, value_name = "N")]
    simulate: Option<usize>,

    /// Number of simulation samples.
    #[arg(long, default_value_t = 10_000)]
    samples: usize,

    /// Simulation seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Parameter bindings for simulation, e.g. "p=1/2".
    #[arg(long, value_name = "P=V")]
    bind: Vec<String>,

    /// Write simulated traces to a CSV file.
    #[arg(long = "export_traces", value_name = "PATH")]
    export_traces: Option<PathBuf>,
}

fn usage_error(msg: &str) -> ExitCode {
    eprintln!("{}", msg);
    ExitCode::from(cli::EXIT_USAGE as u8)
}

fn main() -> ExitCode {
    // the sensitivity flags are traditionally spelled with one dash
    let argv: Vec<String> = std::env::args()
        .map(|a| match a.as_str() {
            "-sens" => "--sens".to_string(),
            "-sens_diff" => "--sens_diff".to_string(),
            _ => a,
        })
        .collect();
    let args = Args::parse_from(argv);

    let mut goals = Vec::new();
    for g in &args.goals {
        match MomentGoal::parse(g) {
            Ok(g) => goals.push(g),
            Err(e) => return usage_error(&e.to_string()),
        }
    }
    let mut bindings = BTreeMap::new();
    for b in &args.bind {
        let (name, value) = match b.split_once('=') {
            Some(nv) => nv,
            None => return usage_error(&format!("binding `{}` is not of the form p=value", b)),
        };
        match cli::parse_rational(value) {
            Ok(v) => bindings.insert(name.trim().to_string(), v),
            Err(e) => return usage_error(&e.to_string()),
        };
    }

    let config = RunConfig {
        benchmark: args.benchmark,
        goals,
        invariants: args.invariants,
        after_loop: args.after_loop,
        sens_diff: args.sens_diff,
        sens: args.sens,
        synth_unsolv_inv: args.synth_unsolv_inv,
        synth_solv_loop: args.synth_solv_loop,
        inv_deg: args.inv_deg,
        format: match args.format {
            FormatArg::Text => OutputFormat::Text,
            FormatArg::Json => OutputFormat::Json,
        },
        simulate: args.simulate.map(|iterations| SimulateOptions {
            iterations,
            samples: args.samples,
            seed: args.seed,
            bindings,
            export_traces: args.export_traces.clone(),
        }),
        limits: Limits::from_env(),
    };
    let (code, stdout, stderr) = cli::run(&config);
    print!("{}", stdout);
    eprint!("{}", stderr);
    ExitCode::from(code as u8)
}
