//! Command-line front end.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use super::config::{Config, KernelSpec, SolverKind, FAMILY_NAMES};
use super::csv::{format_float, to_csv_string};
use super::sweep::{compare_solvers, kernel_problem, run_config, run_convergence, ConvergenceRecord, RecordStatus};
use crate::dlm::ModeKind;
use crate::error::{Error, Result};
use crate::kernels::FundamentalKind;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_SOLVER: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "dlrbf", version, about = "Direct linearization and Newton RBF collocation solvers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve one case with one solver and print diagnostics.
    Solve(RunArgs),
    /// Sweep over N and write a CSV.
    Converge(RunArgs),
    /// Run DLM and Newton at one N and write a CSV.
    Compare(RunArgs),
    /// List kernel families, or tabulate one kernel on a radial grid.
    Kernels(KernelArgs),
}

#[derive(Debug, Args)]
struct RunArgs {
    /// TOML run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output CSV path; overrides `output` in the config. Default stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Run this single N instead of the config's list.
    #[arg(long)]
    n: Option<usize>,
    /// Shape parameter for every kernel that takes one.
    #[arg(long)]
    c: Option<f64>,
    /// `square` or `least_squares`.
    #[arg(long)]
    mode: Option<String>,
    /// Reserved; all point strategies are deterministic.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Args)]
struct KernelArgs {
    /// Family name; omit to list all families.
    #[arg(long)]
    family: Option<String>,
    /// laplace1d, laplace2d or laplace3d.
    #[arg(long)]
    base: Option<String>,
    #[arg(long)]
    c: Option<f64>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    k: Option<u32>,
    #[arg(long)]
    m: Option<u32>,
    #[arg(long)]
    n: Option<u32>,
    #[arg(long)]
    s: Option<u32>,
    #[arg(long)]
    order: Option<u32>,
    /// Tabulate r on [0, rmax].
    #[arg(long, default_value_t = 1.0)]
    rmax: f64,
    /// Number of intervals; steps + 1 rows.
    #[arg(long, default_value_t = 10)]
    steps: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn exit_code(e: &Error) -> i32 {
    if e.is_validation() {
        EXIT_VALIDATION
    } else {
        EXIT_SOLVER
    }
}

/// Run the CLI on `args` (including the program name); returns the exit code.
pub fn run_cli<I, T>(args: I, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_VALIDATION,
            };
            let _ = e.print();
            return code;
        }
    };
    let result = match cli.command {
        Command::Solve(a) => cmd_solve(&a, out),
        Command::Converge(a) => cmd_converge(&a, out),
        Command::Compare(a) => cmd_compare(&a, out),
        Command::Kernels(a) => cmd_kernels(&a, out),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn load(args: &RunArgs) -> Result<Config> {
    let mut cfg = Config::from_path(&args.config)?;
    if let Some(c) = args.c {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::InvalidArgument(format!("--c must be positive, got {c}")));
        }
        cfg.override_c(c);
    }
    if let Some(m) = &args.mode {
        let mode = match m.as_str() {
            "square" => ModeKind::Square,
            "least_squares" | "lsq" => ModeKind::LeastSquares,
            other => return Err(Error::InvalidArgument(format!("unknown --mode `{other}`"))),
        };
        if let Some(d) = cfg.dlm.as_mut() {
            d.mode = mode;
        }
    }
    if let Some(seed) = args.seed {
        log::debug!("--seed {seed} ignored: point generation is deterministic");
    }
    Ok(cfg)
}

fn single_n(cfg: &Config, args: &RunArgs) -> Result<usize> {
    args.n
        .or(cfg.n)
        .or_else(|| cfg.n_list.as_ref().and_then(|l| l.first().copied()))
        .ok_or_else(|| Error::Config("no N given (use `n`, `n_list` or --n)".into()))
}

fn write_output(text: &str, path: Option<&Path>, out: &mut dyn Write) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| Error::Io(format!("{}: {e}", p.display()))),
        None => out.write_all(text.as_bytes()).map_err(Error::from),
    }
}

fn output_path<'a>(args: &'a RunArgs, cfg: &'a Config) -> Option<&'a Path> {
    args.out.as_deref().or(cfg.output.as_deref().map(Path::new))
}

fn status_code(records: &[ConvergenceRecord]) -> i32 {
    for r in records {
        match &r.status {
            RecordStatus::Ok => {}
            RecordStatus::NotConverged => eprintln!("{} {} N={}: not converged", r.case, r.solver, r.n),
            RecordStatus::Failed(m) => eprintln!("{} {} N={}: failed: {m}", r.case, r.solver, r.n),
        }
    }
    if records.iter().all(ConvergenceRecord::is_ok) {
        EXIT_OK
    } else {
        EXIT_SOLVER
    }
}

fn cmd_solve(args: &RunArgs, out: &mut dyn Write) -> Result<i32> {
    let cfg = load(args)?;
    if cfg.solver == SolverKind::Both {
        return Err(Error::Config("`solve` runs one solver; set solver = \"dlm\" or \"newton\"".into()));
    }
    let case = cfg.manufactured_case()?;
    let n = single_n(&cfg, args)?;
    let records = run_convergence(&case, &cfg.solvers()[0], &[n], &cfg.settings())?;
    let r = &records[0];
    let mut text = String::new();
    for (k, v) in [
        ("case", r.case.clone()),
        ("solver", r.solver.clone()),
        ("kernel", r.kernel.clone()),
        ("N", r.n.to_string()),
        ("mode", r.mode.clone()),
        ("max_error_u", format_float(r.max_error_u)),
        ("l2_error_u", format_float(r.l2_error_u)),
        ("consistency_residual", r.consistency_residual.map(format_float).unwrap_or_else(|| "n/a".into())),
        ("condition_estimate", format_float(r.condition_estimate)),
        ("iterations", r.iterations.to_string()),
        ("wall_time_ms", format_float(r.wall_time_ms)),
    ] {
        text.push_str(&format!("{k}: {v}\n"));
    }
    out.write_all(text.as_bytes())?;
    if let Some(p) = args.out.as_deref() {
        write_output(&to_csv_string(&records)?, Some(p), out)?;
    }
    Ok(status_code(&records))
}

fn cmd_converge(args: &RunArgs, out: &mut dyn Write) -> Result<i32> {
    let cfg = load(args)?;
    let n_list = match args.n {
        Some(n) => vec![n],
        None => cfg.n_list.clone().or(cfg.n.map(|n| vec![n])).ok_or_else(|| Error::Config("no n_list".into()))?,
    };
    let records = run_config(&cfg, Some(&n_list))?;
    write_output(&to_csv_string(&records)?, output_path(args, &cfg), out)?;
    Ok(status_code(&records))
}

fn cmd_compare(args: &RunArgs, out: &mut dyn Write) -> Result<i32> {
    let cfg = load(args)?;
    let (Some(d), Some(nw)) = (&cfg.dlm, &cfg.newton) else {
        return Err(Error::Config("`compare` needs [dlm] and [newton] sections".into()));
    };
    let case = cfg.manufactured_case()?;
    let n = single_n(&cfg, args)?;
    let cmp = compare_solvers(&case, d, nw, n, &cfg.settings())?;
    log::info!("max |u_dlm - u_newton| = {:.3e}", cmp.u_difference);
    eprintln!("u_difference: {}", format_float(cmp.u_difference));
    let records = vec![cmp.dlm, cmp.newton];
    write_output(&to_csv_string(&records)?, output_path(args, &cfg), out)?;
    Ok(status_code(&records))
}

fn cmd_kernels(args: &KernelArgs, out: &mut dyn Write) -> Result<i32> {
    let Some(family) = &args.family else {
        let mut text = String::from("family\n");
        for name in FAMILY_NAMES {
            text.push_str(name);
            text.push('\n');
        }
        write_output(&text, args.out.as_deref(), out)?;
        return Ok(EXIT_OK);
    };
    if !(args.rmax > 0.0 && args.rmax.is_finite()) || args.steps == 0 {
        return Err(Error::InvalidArgument("need rmax > 0 and steps >= 1".into()));
    }
    let base = match &args.base {
        Some(b) => {
            Some(FundamentalKind::parse(b).ok_or_else(|| Error::InvalidArgument(format!("unknown base `{b}`")))?)
        }
        None => None,
    };
    let family = match family.as_str() {
        "spk" => "spk_u",
        "hsk" => "hsk_u",
        "fundamental" => "fundamental_solution",
        other => other,
    };
    let mut spec = KernelSpec::family(family);
    spec.base = base;
    spec.c = args.c;
    spec.epsilon = args.epsilon;
    spec.k = args.k;
    spec.m = args.m;
    spec.n = args.n;
    spec.s = args.s;
    spec.order = args.order;
    if family == "composed_psi_v" {
        return Err(Error::InvalidArgument("composed_psi_v needs a config file (inner kernel)".into()));
    }
    let problem = kernel_problem(base)?;
    let kernel = spec.build(&problem)?;
    if kernel.is_source_weighted() {
        return Err(Error::InvalidArgument(format!(
            "`{family}` depends on the source point; tabulate it from a config"
        )));
    }
    let mut text = String::from("r,value\n");
    for i in 0..=args.steps {
        let r = args.rmax * i as f64 / args.steps as f64;
        let v = kernel.value(r)?;
        text.push_str(&format!("{r},{v}\n"));
    }
    write_output(&text, args.out.as_deref(), out)?;
    Ok(EXIT_OK)
}
