//! Convergence sweeps and solver comparisons.

use std::time::Instant;

use super::config::{Config, DlmConfig, NewtonSection, PointsConfig, VBoundary, WallTime};
use super::manufactured::ManufacturedCase;
use crate::dlm::{assemble_dlm_with_tail, consistency_residual, solve_dlm, DlmSolution, VBoundarySource};
use crate::error::{Error, Result};
use crate::expansion::Expansion;
use crate::geometry::{generate_collocation, BoundaryPartition, CollocationSet, Domain, Point};
use crate::kernels::FundamentalKind;
use crate::newton::newton_solve;
use crate::operators::{EvalPoint, LinearOperator, ProblemSpec, ScalarField};

#[derive(Debug, Clone, PartialEq)]
pub enum RecordStatus {
    Ok,
    NotConverged,
    Failed(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRecord {
    pub case: String,
    pub solver: String,
    pub kernel: String,
    pub n: usize,
    pub mode: String,
    pub max_error_u: f64,
    pub l2_error_u: f64,
    /// DLM only.
    pub consistency_residual: Option<f64>,
    pub condition_estimate: f64,
    pub iterations: usize,
    pub wall_time_ms: f64,
    pub status: RecordStatus,
}

impl ConvergenceRecord {
    pub fn is_ok(&self) -> bool {
        self.status == RecordStatus::Ok
    }

    fn failed(case: &str, solver: &str, kernel: String, n: usize, mode: &str, e: &Error) -> Self {
        ConvergenceRecord {
            case: case.to_string(),
            solver: solver.to_string(),
            kernel,
            n,
            mode: mode.to_string(),
            max_error_u: f64::NAN,
            l2_error_u: f64::NAN,
            consistency_residual: if solver == "dlm" { Some(f64::NAN) } else { None },
            condition_estimate: f64::NAN,
            iterations: 0,
            wall_time_ms: f64::NAN,
            status: RecordStatus::Failed(e.to_string()),
        }
    }
}

#[derive(Debug, Clone)]
pub enum SolverSpec {
    Dlm(DlmConfig),
    Newton(NewtonSection),
}

/// Settings shared by every solve of a sweep.
#[derive(Debug, Clone)]
pub struct SweepSettings {
    pub points: PointsConfig,
    pub eval_grid: usize,
    pub wall_time: WallTime,
}

/// Collocation set with `n` centers per field: in 1D `n − 2` interior points
/// and the two endpoints; in 2D a `k × k` interior grid and `k` points per face,
/// so `n = k² + 4k`.
pub fn points_for_n(case: &ManufacturedCase, n: usize, points: &PointsConfig) -> Result<CollocationSet> {
    let pr = &case.problem;
    if pr.dim() == 1 {
        if n < 3 {
            return Err(Error::InvalidArgument(format!("1D runs need N >= 3, got {n}")));
        }
        generate_collocation(&pr.domain, &pr.partition, n - 2, 2, points.strategy, points.stagger_offset)
    } else {
        let k = (1..=n).find(|k| k * k + 4 * k >= n).unwrap_or(1);
        if k * k + 4 * k != n {
            return Err(Error::InvalidArgument(format!("2D runs need N = k^2 + 4k (5, 12, 21, 32, ...), got {n}")));
        }
        generate_collocation(&pr.domain, &pr.partition, k * k, 4 * k, points.strategy, points.stagger_offset)
    }
}

/// Evaluation grid: `m` points in 1D, `m × m` in 2D, including the boundary.
pub fn evaluation_grid(domain: &Domain, m: usize) -> Vec<Point> {
    let axis = |a: usize| -> Vec<f64> {
        (0..m).map(|i| domain.lower(a) + domain.extent(a) * i as f64 / (m - 1) as f64).collect()
    };
    if domain.dim() == 1 {
        axis(0).into_iter().map(Point::on_line).collect()
    } else {
        let (xs, ys) = (axis(0), axis(1));
        ys.iter().flat_map(|&y| xs.iter().map(move |&x| Point::new(x, y))).collect()
    }
}

fn errors(case: &ManufacturedCase, grid: &[Point], values: &[f64]) -> (f64, f64) {
    let mut max: f64 = 0.0;
    let mut sq = 0.0;
    for (p, v) in grid.iter().zip(values) {
        let e = (v - case.u_value(p)).abs();
        max = max.max(e);
        sq += e * e;
    }
    (max, (sq / grid.len() as f64).sqrt())
}

/// Solve once with the DLM; returns the solution and its timings (solve, total).
pub fn run_dlm(case: &ManufacturedCase, cfg: &DlmConfig, set: &CollocationSet) -> Result<(DlmSolution, f64, f64)> {
    let pr = &case.problem;
    let start = Instant::now();
    let psi_u = cfg.psi_u.build(pr)?;
    let psi_v = cfg.psi_v.build(pr)?;
    let mode = cfg.solve_mode(&pr.domain, set.interior_u.len());
    let v_source = match cfg.v_boundary {
        VBoundary::Exact => VBoundarySource::ExactField(case.v_exact.clone()),
        VBoundary::GoverningEquation => VBoundarySource::GoverningEquation,
    };
    let system = assemble_dlm_with_tail(pr, set, &psi_u, &psi_v, &mode, &v_source, cfg.tail()?)?;
    let t0 = Instant::now();
    let sol = solve_dlm(&system)?;
    let solve_ms = t0.elapsed().as_secs_f64() * 1e3;
    Ok((sol, solve_ms, start.elapsed().as_secs_f64() * 1e3))
}

fn dlm_record(
    case: &ManufacturedCase,
    cfg: &DlmConfig,
    n: usize,
    settings: &SweepSettings,
) -> (ConvergenceRecord, Option<Vec<f64>>) {
    let label =
        cfg.psi_u.build(&case.problem).map(|k| k.label().to_string()).unwrap_or_else(|_| cfg.psi_u.family.clone());
    let label = match cfg.psi_v.build(&case.problem) {
        Ok(v) => format!("{label}|{}", v.label()),
        Err(_) => format!("{label}|{}", cfg.psi_v.family),
    };
    let mode = cfg.mode.to_string();
    let result = (|| -> Result<(ConvergenceRecord, Vec<f64>)> {
        let set = points_for_n(case, n, &settings.points)?;
        let (sol, solve_ms, total_ms) = run_dlm(case, cfg, &set)?;
        let grid = evaluation_grid(&case.problem.domain, settings.eval_grid);
        let u: Vec<f64> = grid.iter().map(|p| sol.u_at(p)).collect::<Result<_>>()?;
        let (max_e, l2_e) = errors(case, &grid, &u);
        let test: Vec<EvalPoint> = grid.iter().map(|p| EvalPoint::interior(*p)).collect();
        let consistency = consistency_residual(&sol, &case.problem, &test)?;
        let record = ConvergenceRecord {
            case: case.name.clone(),
            solver: "dlm".into(),
            kernel: label.clone(),
            n,
            mode: mode.clone(),
            max_error_u: max_e,
            l2_error_u: l2_e,
            consistency_residual: Some(consistency),
            condition_estimate: sol.diagnostics.condition_estimate,
            iterations: 1,
            wall_time_ms: match settings.wall_time {
                WallTime::Solve => solve_ms,
                WallTime::Total => total_ms,
            },
            status: RecordStatus::Ok,
        };
        Ok((record, u))
    })();
    match result {
        Ok((r, u)) => (r, Some(u)),
        Err(e) => {
            log::error!("dlm N={n}: {e}");
            (ConvergenceRecord::failed(&case.name, "dlm", label.clone(), n, &mode, &e), None)
        }
    }
}

fn newton_record(
    case: &ManufacturedCase,
    cfg: &NewtonSection,
    n: usize,
    settings: &SweepSettings,
) -> (ConvergenceRecord, Option<Vec<f64>>) {
    let label =
        cfg.kernel.build(&case.problem).map(|k| k.label().to_string()).unwrap_or_else(|_| cfg.kernel.family.clone());
    let result = (|| -> Result<(ConvergenceRecord, Vec<f64>)> {
        let set = points_for_n(case, n, &settings.points)?;
        let kernel = cfg.kernel.build(&case.problem)?;
        let ncfg = cfg.newton_config(case)?;
        let start = Instant::now();
        let (coeffs, report) = newton_solve(&case.problem, &kernel, &set, &ncfg)?;
        let total_ms = start.elapsed().as_secs_f64() * 1e3;
        let exp = Expansion::new(kernel, set.set_u(), ncfg.tail, case.problem.dim());
        let grid = evaluation_grid(&case.problem.domain, settings.eval_grid);
        let u: Vec<f64> = grid.iter().map(|p| exp.evaluate(&coeffs, p)).collect::<Result<_>>()?;
        let (max_e, l2_e) = errors(case, &grid, &u);
        if !report.converged {
            log::warn!("newton N={n}: not converged after {} iterations", report.iterations);
        }
        Ok((
            ConvergenceRecord {
                case: case.name.clone(),
                solver: "newton".into(),
                kernel: label.clone(),
                n,
                mode: "square".into(),
                max_error_u: max_e,
                l2_error_u: l2_e,
                consistency_residual: None,
                condition_estimate: report.jacobian_condition,
                iterations: report.iterations,
                wall_time_ms: match settings.wall_time {
                    WallTime::Solve => report.solve_time.as_secs_f64() * 1e3,
                    WallTime::Total => total_ms,
                },
                status: if report.converged { RecordStatus::Ok } else { RecordStatus::NotConverged },
            },
            u,
        ))
    })();
    match result {
        Ok((r, u)) => (r, Some(u)),
        Err(e) => {
            log::error!("newton N={n}: {e}");
            (ConvergenceRecord::failed(&case.name, "newton", label.clone(), n, "square", &e), None)
        }
    }
}

fn check_n_list(n_list: &[usize]) -> Result<()> {
    if n_list.is_empty() {
        return Err(Error::InvalidArgument("N list is empty".into()));
    }
    if n_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument(format!("N list {n_list:?} must be strictly increasing")));
    }
    Ok(())
}

/// One record per `N`; per-N failures are recorded, an all-N failure is an error.
pub fn run_convergence(
    case: &ManufacturedCase,
    solver: &SolverSpec,
    n_list: &[usize],
    settings: &SweepSettings,
) -> Result<Vec<ConvergenceRecord>> {
    check_n_list(n_list)?;
    if settings.eval_grid < 10 {
        return Err(Error::InvalidArgument(format!("eval_grid must be >= 10, got {}", settings.eval_grid)));
    }
    // One worker per N; records come back in N order.
    let records: Vec<ConvergenceRecord> = std::thread::scope(|scope| {
        let handles: Vec<_> = n_list
            .iter()
            .map(|&n| {
                scope.spawn(move || match solver {
                    SolverSpec::Dlm(c) => dlm_record(case, c, n, settings).0,
                    SolverSpec::Newton(c) => newton_record(case, c, n, settings).0,
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("sweep worker panicked")).collect()
    });
    if records.iter().all(|r| matches!(r.status, RecordStatus::Failed(_))) {
        let RecordStatus::Failed(msg) = &records[0].status else { unreachable!() };
        return Err(Error::SweepFailed(msg.clone()));
    }
    Ok(records)
}

#[derive(Debug, Clone)]
pub struct Comparison {
    pub dlm: ConvergenceRecord,
    pub newton: ConvergenceRecord,
    /// Max-norm difference of the two `u` fields on the evaluation grid.
    pub u_difference: f64,
}

pub fn compare_solvers(
    case: &ManufacturedCase,
    dlm: &DlmConfig,
    newton: &NewtonSection,
    n: usize,
    settings: &SweepSettings,
) -> Result<Comparison> {
    if settings.eval_grid < 10 {
        return Err(Error::InvalidArgument(format!("eval_grid must be >= 10, got {}", settings.eval_grid)));
    }
    let (d, u_dlm) = dlm_record(case, dlm, n, settings);
    let (nw, u_newton) = newton_record(case, newton, n, settings);
    let u_difference = match (u_dlm, u_newton) {
        (Some(a), Some(b)) => a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max),
        _ => f64::NAN,
    };
    Ok(Comparison { dlm: d, newton: nw, u_difference })
}

/// Run every solver of `cfg` over `n_list` (default: the config's own list).
pub fn run_config(cfg: &Config, n_list: Option<&[usize]>) -> Result<Vec<ConvergenceRecord>> {
    cfg.validate()?;
    let case = cfg.manufactured_case()?;
    let own = cfg.n_list.clone().or(cfg.n.map(|n| vec![n]));
    let ns = match n_list {
        Some(l) => l.to_vec(),
        None => own.ok_or_else(|| Error::Config("no `n` or `n_list`".into()))?,
    };
    let mut records = Vec::new();
    for s in cfg.solvers() {
        records.extend(run_convergence(&case, &s, &ns, &cfg.settings())?);
    }
    Ok(records)
}

/// A problem that only serves kernel construction: `R` the Laplacian of the
/// base kind, `p = q = identity`.
pub fn kernel_problem(base: Option<FundamentalKind>) -> Result<ProblemSpec> {
    let dim = base.map_or(1, |b| b.natural_dim().min(2));
    let (domain, r) = if dim == 1 {
        (Domain::unit_interval(), LinearOperator::partial(0, 2))
    } else {
        (Domain::unit_square(), LinearOperator::laplacian())
    };
    let partition = BoundaryPartition::all_dirichlet(&domain);
    ProblemSpec::new(
        LinearOperator::identity(),
        LinearOperator::identity(),
        r,
        ScalarField::zero(),
        ScalarField::zero(),
        ScalarField::zero(),
        domain,
        partition,
    )
}
