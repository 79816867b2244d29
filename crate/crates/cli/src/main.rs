//! `saddle`: analyze, solve, compare and generate minimax instances.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use saddle_core::harness::instance::InstanceDescription;
use saddle_core::harness::solve::{default_start, idapg_setup, pdpg_config};
use saddle_core::harness::{
    compare, generate_erm_instance, generate_quadratic_instance, IdapgOptions, InstanceSpec, PdpgOptions,
    ReferenceSaddle, RunSummary,
};
use saddle_core::{
    check_assumption2, classify_case, derive_constants, idapg_run, mu_phi_lower_bound, pdpg_run,
    predicted_complexities, CaseLabel, Error, MinimaxProblem, ProxTerm, RunStatus, StoppingRule, Trace,
};

#[derive(Parser)]
#[command(name = "saddle", version, about = "PDPG and iDAPG solvers for bilinearly coupled minimax problems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Constants, case label, dual modulus and predicted complexities.
    Analyze {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run one solver and write its trace.
    Solve {
        #[arg(long, value_enum)]
        algo: Algo,
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, value_enum, default_value = "jsonl")]
        format: Format,
    },
    /// Run both solvers and report oracle counts.
    Compare {
        #[command(flatten)]
        run: RunArgs,
    },
    /// Write a random instance (with its reference saddle) as JSON.
    Generate(GenerateArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Algo {
    Pdpg,
    Idapg,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Jsonl,
    Csv,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    theta_extrap: Option<f64>,
    #[arg(long, default_value_t = 2.0)]
    c: f64,
    #[arg(long)]
    mu_phi: Option<f64>,
    #[arg(long, default_value_t = 100_000)]
    max_iters: usize,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GenerateArgs {
    /// SC_SC, SC_FULL_RANK, ASSUMPTION2 or SC_LINEAR.
    #[arg(long, default_value = "SC_SC")]
    case: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 10)]
    dx: usize,
    #[arg(long, default_value_t = 8)]
    dy: usize,
    #[arg(long)]
    mu_x: Option<f64>,
    #[arg(long)]
    l_x: Option<f64>,
    #[arg(long)]
    mu_y: Option<f64>,
    #[arg(long)]
    l_y: Option<f64>,
    #[arg(long)]
    sigma_min: Option<f64>,
    #[arg(long)]
    sigma_max: Option<f64>,
    /// Weight of an l1 term on x.
    #[arg(long)]
    l1: Option<f64>,
    /// Ridge regression ERM instance with `--samples` rows and `--features`
    /// columns instead of a quadratic one.
    #[arg(long)]
    erm: bool,
    #[arg(long, default_value_t = 20)]
    samples: usize,
    #[arg(long, default_value_t = 5)]
    features: usize,
    #[arg(long, default_value_t = 0.1)]
    mu: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

enum Failure {
    Input(Error),
    Solver(Error),
    NotConverged(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::MaxIterations { .. } | Error::Diverged { .. } => Failure::Solver(e),
            other => Failure::Input(other),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Input(Error::Io(e))
    }
}

type CliResult = Result<(), Failure>;

fn writer(out: Option<&Path>) -> io::Result<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn emit_json(value: &Value, out: Option<&Path>) -> CliResult {
    let mut w = writer(out)?;
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| Failure::Input(Error::Parse(e.to_string())))?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

struct Loaded {
    desc: InstanceDescription,
    problem: MinimaxProblem,
    reference: Option<ReferenceSaddle>,
}

fn load(path: &Path) -> Result<Loaded, Failure> {
    let desc = InstanceDescription::load(path)?;
    let problem = desc.to_problem()?;
    let reference = match desc.reference_point() {
        Some((x, y)) => Some(ReferenceSaddle::supplied(&problem, x, y)?),
        None => None,
    };
    Ok(Loaded {
        desc,
        problem,
        reference,
    })
}

fn analyze(instance: &Path, out: Option<&Path>) -> CliResult {
    let Loaded { desc, problem, .. } = load(instance)?;
    let constants = derive_constants(&problem);
    let case = classify_case(&problem);
    let mu_phi = mu_phi_lower_bound(&problem, case).ok();
    let complexities = predicted_complexities(&constants, case).ok();
    let assumption2 = check_assumption2(&problem).ok();
    emit_json(
        &json!({
            "instance_hash": desc.hash(),
            "case": case,
            "mu_phi_lower_bound": mu_phi,
            "constants": constants,
            "assumption2": assumption2,
            "complexities": complexities,
        }),
        out,
    )
}

fn stopping(run: &RunArgs) -> StoppingRule {
    StoppingRule::with_tol(run.max_iters, run.tol)
}

fn pdpg_options(run: &RunArgs) -> PdpgOptions {
    PdpgOptions {
        alpha: run.alpha,
        beta: run.beta,
        theta_extrap: run.theta_extrap,
    }
}

fn idapg_options(run: &RunArgs) -> IdapgOptions {
    IdapgOptions {
        c: run.c,
        mu_phi: run.mu_phi,
        ..Default::default()
    }
}

fn solve(algo: Algo, run: &RunArgs, format: Format) -> CliResult {
    let loaded = load(&run.instance)?;
    let p = &loaded.problem;
    let stop = stopping(run);
    let reference = loaded.reference.as_ref().map(|r| r.as_reference());
    let (x0, y0) = default_start(p);
    let mut trace: Trace = match algo {
        Algo::Pdpg => {
            let cfg = pdpg_config(p, &pdpg_options(run))?;
            pdpg_run(p, &cfg, &x0, &y0, &stop, reference)?
        }
        Algo::Idapg => {
            let (constants, schedule) = idapg_setup(p, &idapg_options(run), &y0)?;
            idapg_run(p, &constants, &schedule, &x0, &y0, &stop, reference)?
        }
    };
    trace.meta.instance_hash = Some(loaded.desc.hash());
    let mut w = writer(run.out.as_deref())?;
    match format {
        Format::Jsonl => trace.write_jsonl(&mut w)?,
        Format::Csv => trace.write_csv(&mut w)?,
    }
    w.flush()?;
    drop(w);
    let name = match algo {
        Algo::Pdpg => "pdpg",
        Algo::Idapg => "idapg",
    };
    if run.out.is_some() {
        emit_json(&serde_json::to_value(RunSummary::of(name, &Ok(trace.clone()))).unwrap_or_default(), None)?;
    }
    match trace.status {
        RunStatus::Converged => Ok(()),
        RunStatus::MaxIterations => Err(Failure::NotConverged(format!(
            "{name} stopped after {} iterations with residual {:e}",
            trace.iterations(),
            trace.last().map_or(f64::NAN, |r| r.primal_cert.max(r.dual_cert))
        ))),
    }
}

fn run_compare(run: &RunArgs) -> CliResult {
    let loaded = load(&run.instance)?;
    let cmp = compare(
        &loaded.problem,
        &pdpg_options(run),
        &idapg_options(run),
        &stopping(run),
        loaded.reference.as_ref(),
    );
    let summaries = cmp.summaries();
    emit_json(
        &json!({
            "instance_hash": loaded.desc.hash(),
            "case": cmp.case,
            "runs": summaries,
        }),
        run.out.as_deref(),
    )?;
    for r in [cmp.pdpg, cmp.idapg] {
        match r {
            Err(e) => return Err(e.into()),
            Ok(t) if t.status != RunStatus::Converged => {
                return Err(Failure::NotConverged(format!("{} did not converge", t.meta.algo)))
            }
            Ok(_) => {}
        }
    }
    Ok(())
}

fn generate(args: &GenerateArgs) -> CliResult {
    let g = if args.erm {
        generate_erm_instance(args.seed, args.samples, args.features, args.mu, args.l1)?
    } else {
        let case = CaseLabel::parse(&args.case)?;
        let mut spec = InstanceSpec::new(case, args.seed, args.dx, args.dy);
        let set = |dst: &mut f64, v: Option<f64>| {
            if let Some(v) = v {
                *dst = v;
            }
        };
        set(&mut spec.mu_x, args.mu_x);
        set(&mut spec.l_x, args.l_x);
        set(&mut spec.mu_y, args.mu_y);
        set(&mut spec.l_y, args.l_y);
        set(&mut spec.sigma_min, args.sigma_min);
        set(&mut spec.sigma_max, args.sigma_max);
        if let Some(w) = args.l1 {
            spec.f2 = ProxTerm::L1 { weight: w };
        }
        generate_quadratic_instance(&spec)?
    };
    let mut w = writer(args.out.as_deref())?;
    writeln!(w, "{}", g.description.to_json())?;
    w.flush()?;
    Ok(())
}

fn error_json(kind: &str, message: String) {
    eprintln!("{}", json!({ "error": kind, "message": message }));
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            error_json("usage", e.to_string());
            return ExitCode::from(2);
        }
    };
    let result = match &cli.command {
        Command::Analyze { instance, out } => analyze(instance, out.as_deref()),
        Command::Solve { algo, run, format } => solve(*algo, run, *format),
        Command::Compare { run } => run_compare(run),
        Command::Generate(args) => generate(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(e)) => {
            error_json(e.kind(), e.to_string());
            ExitCode::from(2)
        }
        Err(Failure::Solver(e)) => {
            error_json(e.kind(), e.to_string());
            ExitCode::from(1)
        }
        Err(Failure::NotConverged(msg)) => {
            error_json("max_iterations", msg);
            ExitCode::from(1)
        }
    }
}
