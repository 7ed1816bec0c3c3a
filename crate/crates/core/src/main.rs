use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use sacd::bench::{run_bench, BenchAxis, BenchPlan, BENCH_HEADER};
use sacd::error::{Error, Result};
use sacd::eval::{cross_validate, EvalPlan};
use sacd::io::{generate_synthetic, parse_tns, write_factors, write_tns, RunMeta, SynthSpec};
use sacd::solver::{fit, FitReport, Solver, SolverConfig};

const WORKERS_ENV: &str = "SACD_WORKERS";

#[derive(Parser)]
#[command(name = "sacd", version, about = "Sparse nonnegative CP factorization")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit a model to a .tns file and write factors, metadata and a trace.
    Factorize(FactorizeArgs),
    /// Write a random sparse tensor in .tns format.
    Gen(GenArgs),
    /// k-fold cross-validation with RMSE, top-N and distinctiveness scores.
    Eval(EvalArgs),
    /// Runtime sweep over mode length, density or rank; CSV on stdout.
    Bench(BenchArgs),
}

#[derive(Args)]
struct SolverArgs {
    #[arg(long)]
    rank: usize,
    #[arg(long, default_value_t = 30)]
    iters: usize,
    #[arg(long, default_value = "sacd", value_parser = parse_solver)]
    solver: Solver,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Column workers for fsacd [default: $SACD_WORKERS, else available cores]
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Args)]
struct FactorizeArgs {
    #[arg(long)]
    input: PathBuf,
    #[command(flatten)]
    solver: SolverArgs,
    /// Directory for U.csv, V.csv, W.csv and meta.json.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Per-iteration CSV trace.
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Args)]
struct GenArgs {
    /// Mode lengths as Q,P,S.
    #[arg(long, value_parser = parse_dims)]
    dims: [usize; 3],
    #[arg(long)]
    density: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Draw values from a random nonnegative model of this rank.
    #[arg(long)]
    planted_rank: Option<usize>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    input: PathBuf,
    #[command(flatten)]
    solver: SolverArgs,
    #[arg(long, default_value_t = 5)]
    folds: usize,
    #[arg(long, default_value_t = 10)]
    topn: usize,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, value_parser = parse_axis)]
    axis: BenchAxis,
    /// Comma-separated values of the swept axis.
    #[arg(long, value_delimiter = ',', required = true)]
    grid: Vec<f64>,
    #[arg(long, default_value_t = 64)]
    mode_length: usize,
    #[arg(long, default_value_t = 1e-3)]
    density: f64,
    #[arg(long, default_value_t = 10)]
    rank: usize,
    #[arg(long, default_value_t = 1)]
    reps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 30)]
    iters: usize,
    /// Comma-separated solver names.
    #[arg(long, value_delimiter = ',', default_value = "sacd", value_parser = parse_solver)]
    solvers: Vec<Solver>,
    #[arg(long)]
    workers: Option<usize>,
}

fn parse_solver(s: &str) -> std::result::Result<Solver, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_axis(s: &str) -> std::result::Result<BenchAxis, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_dims(s: &str) -> std::result::Result<[usize; 3], String> {
    let parts: Vec<usize> = s
        .split(',')
        .map(|t| t.trim().parse::<usize>().map_err(|e| format!("'{t}': {e}")))
        .collect::<std::result::Result<_, _>>()?;
    match parts[..] {
        [q, p, s] if q > 0 && p > 0 && s > 0 => Ok([q, p, s]),
        _ => Err("expected three positive integers Q,P,S".into()),
    }
}

fn resolve_workers(flag: Option<usize>) -> Result<usize> {
    let workers = match flag {
        Some(w) => w,
        None => match std::env::var(WORKERS_ENV) {
            Ok(v) => v
                .trim()
                .parse()
                .map_err(|_| Error::Argument(format!("{WORKERS_ENV}='{v}' is not a worker count")))?,
            Err(_) => std::thread::available_parallelism().map_or(1, |n| n.get()),
        },
    };
    if workers == 0 {
        return Err(Error::Argument("workers must be at least 1".into()));
    }
    Ok(workers)
}

fn config(args: &SolverArgs) -> SolverConfig {
    SolverConfig::new(args.rank, args.iters, args.seed)
}

fn write_file(path: &Path, body: &str) -> Result<()> {
    fs::write(path, body).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn trace_csv(report: &FitReport) -> String {
    let mut out = String::from("iter,objective,E_u,E_v,E_w,L_u,L_v,L_w,wall_ms\n");
    for r in &report.records {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            r.iter,
            r.objective,
            r.updates[0],
            r.updates[1],
            r.updates[2],
            r.lipschitz[0],
            r.lipschitz[1],
            r.lipschitz[2],
            r.wall_ms
        ));
    }
    out
}

fn factorize(args: FactorizeArgs) -> Result<()> {
    let workers = resolve_workers(args.solver.workers)?;
    let cfg = config(&args.solver);
    cfg.validate()?;
    let x = parse_tns(&args.input)?;
    let start = Instant::now();
    let report = fit(&x, &cfg, args.solver.solver, workers)?;
    let wall_ms = start.elapsed().as_secs_f64() * 1e3;
    if let Some(dir) = &args.out {
        let meta = RunMeta {
            dims: x.dims(),
            rank: cfg.rank,
            solver: report.solver.clone(),
            seed: cfg.seed,
            iters: report.iterations(),
            wall_ms,
        };
        write_factors(&report.model, &meta, dir)?;
    }
    if let Some(path) = &args.trace {
        write_file(path, &trace_csv(&report))?;
    }
    eprintln!(
        "{}: {} iterations, objective {} -> {}, {:.3} ms",
        report.solver,
        report.iterations(),
        report.initial_objective,
        report.final_objective(),
        wall_ms
    );
    Ok(())
}

fn gen(args: GenArgs) -> Result<()> {
    let x = generate_synthetic(&SynthSpec {
        dims: args.dims,
        density: args.density,
        seed: args.seed,
        planted_rank: args.planted_rank,
    })?;
    write_tns(&x, &args.out)?;
    eprintln!("wrote {} entries to {}", x.nnz(), args.out.display());
    Ok(())
}

fn eval(args: EvalArgs) -> Result<()> {
    let workers = resolve_workers(args.solver.workers)?;
    if args.folds < 2 {
        return Err(Error::Argument(format!("--folds must be >= 2, got {}", args.folds)));
    }
    if args.topn == 0 {
        return Err(Error::Argument("--topn must be at least 1".into()));
    }
    let plan = EvalPlan {
        config: config(&args.solver),
        solver: args.solver.solver,
        workers,
        folds: args.folds,
        top_n: args.topn,
    };
    plan.config.validate()?;
    let x = parse_tns(&args.input)?;
    let report = cross_validate(&x, &plan)?;
    let json = serde_json::to_string_pretty(&report).expect("report serialises") + "\n";
    match &args.out {
        Some(path) => write_file(path, &json),
        None => {
            print!("{json}");
            Ok(())
        }
    }
}

fn bench(args: BenchArgs) -> Result<()> {
    let plan = BenchPlan {
        axis: args.axis,
        grid: args.grid,
        mode_length: args.mode_length,
        density: args.density,
        rank: args.rank,
        reps: args.reps,
        seed: args.seed,
        iters: args.iters,
        solvers: args.solvers,
        workers: resolve_workers(args.workers)?,
    };
    plan.validate()?;
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    let stdout_err = |source| Error::Io {
        path: PathBuf::from("<stdout>"),
        source,
    };
    writeln!(out, "{BENCH_HEADER}").map_err(stdout_err)?;
    let mut failed = None;
    run_bench(&plan, |row| {
        if failed.is_none() {
            if let Err(e) = writeln!(out, "{}", row.to_csv()).and_then(|_| out.flush()) {
                failed = Some(e);
            }
        }
    })?;
    failed.map_or(Ok(()), |e| Err(stdout_err(e)))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let result = match cli.command {
        Command::Factorize(a) => factorize(a),
        Command::Gen(a) => gen(a),
        Command::Eval(a) => eval(a),
        Command::Bench(a) => bench(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_argument() { 2 } else { 1 })
        }
    }
}
