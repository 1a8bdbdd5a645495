//! Command-line front end.
//!
//! Exit codes: 0 success, 1 I/O or other failure, 2 bad arguments,
//! 3 numerical non-convergence, 4 a property check failed.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use crate::asymptotics::{log_grid, log_growth_diagnostic, offdiagonal_diagnostic, sweep, DiagnosticsResult, LogGrowthBox};
use crate::discretization::QuadratureRule;
use crate::entropy::{ConvergencePolicy, EntropyEngine};
use crate::kernel::{write_kernel_csv, Kernel, KernelMethod, KernelValue, QuadratureSpec, DEFAULT_TAIL_TOL};
use crate::renyi::RenyiOrder;
use crate::schatten::{verify_commutator_lemma, verify_inequalities, SchattenReport};
use crate::symbols::PhysicalParams;
use crate::{Error, Result, VERSION};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_PROPERTY: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "diamond-entropy", version, about = "Rényi entanglement entropy of the regularized Dirac vacuum on an interval")]
struct Cli {
    /// Worker threads (default: number of processors).
    #[arg(long, global = true, env = "DIAMOND_ENTROPY_JOBS")]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Entropy at one ε.
    Entropy(EntropyArgs),
    /// Entropy over an ε grid with a fit against ln(1/ε).
    Sweep(SweepArgs),
    /// Position-space kernel samples.
    KernelDump(KernelDumpArgs),
    /// Randomized Schatten inequality and commutator checks.
    Verify(VerifyArgs),
    /// Off-diagonal and log-growth diagnostics.
    Diag(DiagArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
enum OutputFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, Args, Serialize)]
struct OutputArgs {
    #[arg(long, value_enum, default_value = "json")]
    output_format: OutputFormat,
    /// Output file (default: standard output).
    #[arg(long)]
    #[serde(skip)]
    output: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
struct PhysicsArgs {
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    kappa: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    mass: f64,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    lambda: f64,
    #[arg(long, value_enum, default_value = "gauss-legendre")]
    rule: QuadratureRule,
    #[arg(long, default_value_t = DEFAULT_TAIL_TOL)]
    tail_tol: f64,
    /// First grid size of the doubling policy.
    #[arg(long, default_value_t = 128)]
    n_start: usize,
    /// Largest grid size of the doubling policy.
    #[arg(long, default_value_t = 4096)]
    n_max: usize,
}

impl PhysicsArgs {
    fn order(&self) -> Result<RenyiOrder> {
        RenyiOrder::new(self.kappa)
    }

    fn policy(&self) -> ConvergencePolicy {
        ConvergencePolicy { n_start: self.n_start, n_max: self.n_max, rule: self.rule, ..ConvergencePolicy::default() }
    }

    fn engine(&self) -> Result<EntropyEngine> {
        if !(self.tail_tol > 0.0 && self.tail_tol < 1.0) {
            return Err(Error::invalid(format!("tail tolerance must lie in (0, 1), got {}", self.tail_tol)));
        }
        Ok(EntropyEngine::with_tail_tol(self.tail_tol))
    }
}

#[derive(Debug, Clone, Args, Serialize)]
struct EntropyArgs {
    #[command(flatten)]
    physics: PhysicsArgs,
    #[arg(long, allow_negative_numbers = true)]
    epsilon: f64,
    /// Fixed grid size; without it the doubling policy is used.
    #[arg(long)]
    grid_size: Option<usize>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
struct SweepArgs {
    #[command(flatten)]
    physics: PhysicsArgs,
    /// `start:stop:Nlog`, log-spaced with both ends included.
    #[arg(long, default_value = "0.1:0.002:8log")]
    eps_grid: String,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
struct KernelDumpArgs {
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    mass: f64,
    #[arg(long, allow_negative_numbers = true)]
    epsilon: f64,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    lambda: f64,
    /// Sample range is [−u_max, u_max]; default 5λ.
    #[arg(long)]
    u_max: Option<f64>,
    #[arg(long, default_value_t = 201)]
    points: usize,
    #[arg(long, value_enum, default_value = "auto")]
    method: KernelMethod,
    #[arg(long, default_value_t = DEFAULT_TAIL_TOL)]
    tail_tol: f64,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
struct VerifyArgs {
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    #[arg(long, value_delimiter = ',', default_value = "4,8,16")]
    dims: Vec<usize>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
enum DiagKind {
    Offdiag,
    LogGrowth,
}

#[derive(Debug, Clone, Args, Serialize)]
struct DiagArgs {
    #[arg(long, value_enum)]
    kind: DiagKind,
    #[command(flatten)]
    physics: PhysicsArgs,
    /// α = 1/ε values, increasing.
    #[arg(long, value_delimiter = ',', default_value = "100,1000,5000")]
    alphas: Vec<f64>,
    /// Schatten index q = 1/l for the log-growth diagnostic.
    #[arg(long, default_value_t = 0.5)]
    q: f64,
    /// Damping length in exp(−(l₀/α) ω(k)).
    #[arg(long, default_value_t = 1.0)]
    l0: f64,
    /// Box half-width outside the interval, in units of λ.
    #[arg(long, default_value_t = 8.0)]
    box_factor: f64,
    /// Node budget for the log-growth truncation.
    #[arg(long, default_value_t = 2048)]
    grid_size: usize,
    #[command(flatten)]
    output: OutputArgs,
}

/// Parses `argv` (including the program name), runs the subcommand and
/// returns the process exit code.
pub fn parse_and_dispatch<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            eprintln!("error: --jobs must be >= 1");
            return EXIT_USAGE;
        }
        configure_jobs(jobs);
    }
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::InvalidParameter(_) => EXIT_USAGE,
        e if e.is_numerical() => EXIT_NUMERICAL,
        _ => EXIT_FAILURE,
    }
}

fn configure_jobs(jobs: usize) {
    // The global pool can only be set once per process; later calls keep it.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global();
    #[cfg(feature = "parallel")]
    faer::set_global_parallelism(if jobs == 1 { faer::Par::Seq } else { faer::Par::rayon(jobs) });
}

/// Parses `start:stop:Nlog` into N log-spaced values.
pub fn parse_eps_grid(spec: &str) -> Result<Vec<f64>> {
    let bad = || Error::invalid(format!("eps grid must look like start:stop:Nlog, got {spec:?}"));
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return Err(bad());
    }
    let start: f64 = parts[0].trim().parse().map_err(|_| bad())?;
    let stop: f64 = parts[1].trim().parse().map_err(|_| bad())?;
    let count: usize = parts[2].trim().strip_suffix("log").ok_or_else(bad)?.parse().map_err(|_| bad())?;
    log_grid(start, stop, count)
}

fn run(command: Command) -> Result<i32> {
    match command {
        Command::Entropy(a) => run_entropy(&a),
        Command::Sweep(a) => run_sweep(&a),
        Command::KernelDump(a) => run_kernel_dump(&a),
        Command::Verify(a) => run_verify(&a),
        Command::Diag(a) => run_diag(&a),
    }
}

fn open_output(out: &OutputArgs) -> Result<Box<dyn Write>> {
    Ok(match &out.output {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn write_json<C: Serialize, R: Serialize>(out: &OutputArgs, subcommand: &str, config: &C, result: &R) -> Result<()> {
    let doc = json!({ "version": VERSION, "subcommand": subcommand, "config": config, "result": result });
    let mut w = open_output(out)?;
    serde_json::to_writer_pretty(&mut w, &doc)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

/// `# version` and `# config` comment lines that open every CSV file.
fn write_csv_preamble<C: Serialize>(w: &mut dyn Write, subcommand: &str, config: &C) -> Result<()> {
    writeln!(w, "# version {VERSION}")?;
    writeln!(w, "# config {}", json!({ "subcommand": subcommand, "config": config }))?;
    Ok(())
}

fn g(x: f64) -> String {
    format!("{x:.16e}")
}

fn run_entropy(a: &EntropyArgs) -> Result<i32> {
    let order = a.physics.order()?;
    let params = PhysicalParams::new(a.physics.mass, a.epsilon, a.physics.lambda)?;
    let engine = a.physics.engine()?;
    let r = match a.grid_size {
        Some(n) => engine.entanglement_entropy(&params, order, n, a.physics.rule)?,
        None => engine.converged_entropy(&params, order, &a.physics.policy())?,
    };
    match a.output.output_format {
        OutputFormat::Json => write_json(&a.output, "entropy", a, &r)?,
        OutputFormat::Csv => {
            let mut w = open_output(&a.output)?;
            write_csv_preamble(&mut w, "entropy", a)?;
            writeln!(w, "kappa,mass,epsilon,lambda,n,truncated_trace,subtraction_trace,entropy,converged,relative_change,clamp_count,max_clamp,tail_mass")?;
            writeln!(
                w,
                "{},{},{},{},{},{},{},{},{},{},{},{},{}",
                g(r.kappa),
                g(params.mass),
                g(params.epsilon),
                g(params.lambda),
                r.n,
                g(r.truncated_trace),
                g(r.subtraction_trace),
                g(r.entropy),
                r.converged,
                r.relative_change.map(g).unwrap_or_default(),
                r.clamp_count,
                g(r.max_clamp),
                g(r.tail_mass)
            )?;
            w.flush()?;
        }
    }
    Ok(EXIT_OK)
}

fn run_sweep(a: &SweepArgs) -> Result<i32> {
    let order = a.physics.order()?;
    let eps = parse_eps_grid(&a.eps_grid)?;
    let base = PhysicalParams::new(a.physics.mass, eps[0], a.physics.lambda)?;
    let engine = a.physics.engine()?;
    let r = sweep(&engine, &base, order, &eps, &a.physics.policy())?;
    let fit = json!({
        "slope": r.slope,
        "intercept": r.intercept,
        "r_squared": r.r_squared,
        "theory_slope": r.theory_slope,
        "rel_error": r.rel_error,
    });
    match a.output.output_format {
        OutputFormat::Json => write_json(&a.output, "sweep", a, &json!({ "fit": fit, "sweep": r }))?,
        OutputFormat::Csv => {
            let mut w = open_output(&a.output)?;
            write_csv_preamble(&mut w, "sweep", a)?;
            writeln!(w, "# fit {fit}")?;
            writeln!(w, "epsilon,ln_inv_eps,entropy,n,converged")?;
            for p in &r.points {
                writeln!(w, "{},{},{},{},{}", g(p.epsilon), g(p.ln_inv_eps), g(p.entropy), p.n, p.converged)?;
            }
            w.flush()?;
        }
    }
    Ok(EXIT_OK)
}

fn run_kernel_dump(a: &KernelDumpArgs) -> Result<i32> {
    let params = PhysicalParams::new(a.mass, a.epsilon, a.lambda)?;
    if a.points < 2 {
        return Err(Error::invalid("kernel dump needs at least 2 points"));
    }
    let u_max = a.u_max.unwrap_or(5.0 * a.lambda);
    if !(u_max.is_finite() && u_max > 0.0) {
        return Err(Error::invalid(format!("u_max must be > 0, got {u_max}")));
    }
    let spec = QuadratureSpec::for_params(&params, a.tail_tol)?;
    let kernel = Kernel::new(&params, &spec, a.method)?;
    let values = (0..a.points)
        .map(|i| {
            let u = -u_max + 2.0 * u_max * i as f64 / (a.points - 1) as f64;
            Ok(KernelValue { u, matrix: kernel.eval(u)? })
        })
        .collect::<Result<Vec<_>>>()?;
    match a.output.output_format {
        OutputFormat::Json => write_json(&a.output, "kernel-dump", a, &json!({ "method": kernel.method(), "values": values }))?,
        OutputFormat::Csv => {
            let mut w = open_output(&a.output)?;
            write_csv_preamble(&mut w, "kernel-dump", a)?;
            write_kernel_csv(&mut w, &values)?;
            w.flush()?;
        }
    }
    Ok(EXIT_OK)
}

fn run_verify(a: &VerifyArgs) -> Result<i32> {
    let mut reports: Vec<SchattenReport> = Vec::new();
    for &dim in &a.dims {
        reports.extend(verify_inequalities(dim, a.trials, a.seed)?);
        reports.extend(verify_commutator_lemma(dim, a.trials, a.seed)?);
    }
    match a.output.output_format {
        OutputFormat::Json => write_json(&a.output, "verify", a, &reports)?,
        OutputFormat::Csv => {
            let mut w = open_output(&a.output)?;
            write_csv_preamble(&mut w, "verify", a)?;
            writeln!(w, "inequality,dim,trials,seed,max_violation,max_excess,asserted,passed")?;
            for r in &reports {
                let name = serde_json::to_value(r.inequality_name)?;
                writeln!(
                    w,
                    "{},{},{},{},{},{},{},{}",
                    name.as_str().unwrap_or_default(),
                    r.dim,
                    r.trials,
                    r.seed,
                    g(r.max_violation),
                    g(r.max_excess),
                    r.asserted,
                    r.passed
                )?;
            }
            w.flush()?;
        }
    }
    let failed: Vec<&SchattenReport> = reports.iter().filter(|r| r.asserted && !r.passed).collect();
    for r in &failed {
        eprintln!("property failed: {:?} at dim {} (excess {:e})", r.inequality_name, r.dim, r.max_excess);
    }
    Ok(if failed.is_empty() { EXIT_OK } else { EXIT_PROPERTY })
}

fn run_diag(a: &DiagArgs) -> Result<i32> {
    let d: DiagnosticsResult = match a.kind {
        DiagKind::Offdiag => {
            let engine = a.physics.engine()?;
            offdiagonal_diagnostic(&engine, a.physics.lambda, a.physics.order()?, a.physics.mass, &a.alphas, &a.physics.policy())?
        }
        DiagKind::LogGrowth => {
            let bx = LogGrowthBox {
                lambda: a.physics.lambda,
                l0: a.l0,
                mass: a.physics.mass,
                box_factor: a.box_factor,
                n: a.grid_size,
            };
            log_growth_diagnostic(a.q, &a.alphas, &bx)?
        }
    };
    match a.output.output_format {
        OutputFormat::Json => write_json(&a.output, "diag", a, &d)?,
        OutputFormat::Csv => {
            let mut w = open_output(&a.output)?;
            write_csv_preamble(&mut w, "diag", a)?;
            writeln!(w, "alpha,offdiag_ratio,sup_deviation,logq_norm,n")?;
            let col = |v: &[f64], i: usize| v.get(i).copied().map(g).unwrap_or_default();
            for (i, &alpha) in d.alpha_grid.iter().enumerate() {
                writeln!(
                    w,
                    "{},{},{},{},{}",
                    g(alpha),
                    col(&d.offdiag_ratios, i),
                    col(&d.sup_deviations, i),
                    col(&d.logq_norms, i),
                    d.grid_sizes.get(i).map(|n| n.to_string()).unwrap_or_default()
                )?;
            }
            w.flush()?;
        }
    }
    Ok(EXIT_OK)
}
