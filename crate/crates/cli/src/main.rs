use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use nestopt::candidates::generate_all;
use nestopt::harness::{run_bench, BenchConfig};
use nestopt::instances::{export_lp, generate, read_instance, write_instance, CapacityRule, GenSpec};
use nestopt::oracle::{brute_force_solve, OracleError};
use nestopt::{solve_with, Instance, Solution, SolveOptions};

/// Relative gap above which `check` reports a mismatch.
const CHECK_TOL: f64 = 1e-8;

const EXIT_FAILURE: u8 = 1;
const EXIT_ORACLE_REFUSED: u8 = 3;
const EXIT_GAP: u8 = 4;

/// Revenue-maximizing assortments under the nested logit model with per-nest
/// cardinality limits.
#[derive(Parser, Debug)]
#[command(name = "nestopt", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a random instance file.
    Gen(GenArgs),
    /// Solve an instance file.
    Solve(SolveArgs),
    /// Compare the solver with exhaustive enumeration on a small instance.
    Check(CheckArgs),
    /// Time the solver over a grid of sizes and print CSV.
    Bench(BenchArgs),
}

fn at_least_one(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(0) => Err("must be >= 1".into()),
        Ok(v) => Ok(v),
        Err(e) => Err(e.to_string()),
    }
}

#[derive(Args, Debug)]
struct GenArgs {
    /// Number of nests (m >= 1).
    #[arg(long, value_parser = at_least_one)]
    m: usize,
    /// Products per nest (n >= 1).
    #[arg(long, value_parser = at_least_one)]
    n: usize,
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value_t = 0.5)]
    gamma: f64,
    #[arg(long, default_value_t = 1.0)]
    v0: f64,
    /// Capacities: one value for all nests or one per nest, comma separated.
    /// Defaults to max(1, floor(n / 2)).
    #[arg(long, value_delimiter = ',')]
    cap: Option<Vec<usize>>,
    #[arg(long, default_value_t = 0.1)]
    v_low: f64,
    #[arg(long, default_value_t = 10.0)]
    v_high: f64,
    #[arg(long, default_value_t = 0.0)]
    r_low: f64,
    #[arg(long, default_value_t = 10.0)]
    r_high: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct SolveArgs {
    /// Instance file (JSON).
    #[arg(long = "in")]
    input: PathBuf,
    /// Write the solution as JSON.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write the reduced LP in CPLEX LP format.
    #[arg(long)]
    emit_lp: Option<PathBuf>,
    /// Build per-nest candidate sets in parallel.
    #[arg(long)]
    parallel_nests: bool,
    /// Skip the per-nest listing.
    #[arg(long)]
    summary: bool,
}

#[derive(Args, Debug)]
struct CheckArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    parallel_nests: bool,
    /// Negative control: scale the solver's value by (1 + x) before comparing.
    #[arg(long, hide = true, default_value_t = 0.0)]
    inject_gap: f64,
}

#[derive(Args, Debug)]
struct BenchArgs {
    #[arg(long, value_parser = at_least_one, value_delimiter = ',', required = true)]
    m_list: Vec<usize>,
    #[arg(long, value_parser = at_least_one, value_delimiter = ',', required = true)]
    n_list: Vec<usize>,
    #[arg(long, default_value_t = 10, value_parser = at_least_one)]
    trials: usize,
    /// Trial t uses seed + t.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0.5)]
    gamma: f64,
    #[arg(long, default_value_t = 1.0)]
    v0: f64,
    #[arg(long)]
    parallel_nests: bool,
    /// Write CSV here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Serialize)]
struct SolutionFile<'a> {
    z_star: f64,
    nests: &'a [Vec<usize>],
    diagnostics: Diagnostics<'a>,
}

#[derive(Serialize)]
struct Diagnostics<'a> {
    g_at_zstar: f64,
    segments_scanned: usize,
    candidate_counts: &'a [usize],
    envelope_sizes: &'a [usize],
    seconds: f64,
}

fn cmd_gen(args: GenArgs) -> Result<()> {
    let spec = GenSpec {
        m: args.m,
        n: args.n,
        seed: args.seed,
        v_low: args.v_low,
        v_high: args.v_high,
        r_low: args.r_low,
        r_high: args.r_high,
        gamma: args.gamma,
        v0: args.v0,
        capacity: args.cap.map_or(CapacityRule::HalfN, CapacityRule::Explicit),
    };
    let instance = generate(&spec)?;
    write_instance(&instance, &args.out)?;
    let caps: Vec<usize> = instance.nests.iter().map(|n| n.capacity).collect();
    let caps = if caps.iter().all(|&c| c == caps[0]) {
        format!("{} (all nests)", caps[0])
    } else {
        format!("{caps:?}")
    };
    println!(
        "wrote {}: m = {}, n = {}, products = {}, capacity = {}",
        args.out.display(),
        instance.num_nests(),
        spec.n,
        instance.total_products(),
        caps
    );
    Ok(())
}

fn timed_solve(instance: &Instance, parallel: bool) -> Result<(Solution, f64)> {
    let start = Instant::now();
    let solution = solve_with(
        instance,
        &SolveOptions {
            parallel_nests: parallel,
        },
    )?;
    Ok((solution, start.elapsed().as_secs_f64()))
}

fn cmd_solve(args: SolveArgs) -> Result<()> {
    let instance = read_instance(&args.input)?;
    let (solution, seconds) = timed_solve(&instance, args.parallel_nests)?;

    let stdout = io::stdout();
    let mut out = stdout.lock();
    writeln!(out, "Z* = {:.12}", solution.z_star)?;
    if !args.summary {
        for (i, members) in solution.assortment.per_nest.iter().enumerate() {
            writeln!(
                out,
                "nest {}: {:?} (candidates {}, envelope pieces {})",
                i + 1,
                members,
                solution.candidate_counts[i],
                solution.envelope_sizes[i]
            )?;
        }
    }
    writeln!(
        out,
        "candidates: {} total, max {} per nest",
        solution.candidate_counts.iter().sum::<usize>(),
        solution.candidate_counts.iter().max().unwrap_or(&0)
    )?;
    writeln!(out, "segments scanned: {}", solution.segments_scanned)?;
    writeln!(out, "G(Z*) = {:e}", solution.g_at_zstar)?;
    writeln!(out, "time: {seconds:.6} s")?;

    if let Some(path) = &args.out {
        let file = SolutionFile {
            z_star: solution.z_star,
            nests: &solution.assortment.per_nest,
            diagnostics: Diagnostics {
                g_at_zstar: solution.g_at_zstar,
                segments_scanned: solution.segments_scanned,
                candidate_counts: &solution.candidate_counts,
                envelope_sizes: &solution.envelope_sizes,
                seconds,
            },
        };
        let text = serde_json::to_string_pretty(&file)?;
        std::fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))?;
    }
    if let Some(path) = &args.emit_lp {
        let sets = generate_all(&instance.nests, args.parallel_nests);
        let summary = export_lp(&instance, &sets, path)?;
        writeln!(
            out,
            "LP written to {}: {} variables, {} constraints",
            path.display(),
            summary.variables,
            summary.constraints
        )?;
    }
    Ok(())
}

fn cmd_check(args: CheckArgs) -> Result<ExitCode> {
    let instance = read_instance(&args.input)?;
    let oracle = match brute_force_solve(&instance) {
        Ok((z, _)) => z,
        Err(e @ OracleError::TooLarge { .. }) => {
            eprintln!("error: {e}");
            return Ok(ExitCode::from(EXIT_ORACLE_REFUSED));
        }
        Err(e) => return Err(e.into()),
    };
    let (solution, _) = timed_solve(&instance, args.parallel_nests)?;
    let solver = solution.z_star * (1.0 + args.inject_gap);
    let gap = (solver - oracle).abs();
    let rel = if oracle == 0.0 { gap } else { gap / oracle.abs() };
    println!("solver: {solver:.15}");
    println!("oracle: {oracle:.15}");
    println!("absolute gap: {gap:e}");
    println!("relative gap: {rel:e}");
    if rel <= CHECK_TOL {
        println!("ok (tolerance {CHECK_TOL:e})");
        Ok(ExitCode::SUCCESS)
    } else {
        println!("MISMATCH (tolerance {CHECK_TOL:e})");
        Ok(ExitCode::from(EXIT_GAP))
    }
}

fn cmd_bench(args: BenchArgs) -> Result<()> {
    let config = BenchConfig {
        m_list: args.m_list,
        n_list: args.n_list,
        trials: args.trials,
        seed: args.seed,
        gamma: args.gamma,
        v0: args.v0,
        options: SolveOptions {
            parallel_nests: args.parallel_nests,
        },
        ..BenchConfig::default()
    };
    let sink: Box<dyn Write> = match &args.out {
        Some(path) => Box::new(File::create(path).with_context(|| format!("creating {}", path.display()))?),
        None => Box::new(io::stdout()),
    };
    let mut writer = csv::Writer::from_writer(sink);
    let mut write_err = None;
    run_bench(&config, |row| {
        if write_err.is_none() {
            if let Err(e) = writer.serialize(row).and_then(|_| Ok(writer.flush()?)) {
                write_err = Some(e);
            }
        }
    })?;
    if let Some(e) = write_err {
        return Err(e.into());
    }
    writer.flush()?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Gen(args) => cmd_gen(args).map(|_| ExitCode::SUCCESS),
        Command::Solve(args) => cmd_solve(args).map(|_| ExitCode::SUCCESS),
        Command::Check(args) => cmd_check(args),
        Command::Bench(args) => cmd_bench(args).map(|_| ExitCode::SUCCESS),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_FAILURE)
        }
    }
}
