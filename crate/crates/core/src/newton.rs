//! Newton baseline: single-field collocation of the nonlinear equation.
//!
//! Interior rows are `F = (P α)∘(Q α) + L α − f`, where `P`, `Q` and `L` collocate
//! `p`, `q` and `R`. Boundary rows are linear. The Jacobian is
//! `J = diag(Qα) P + diag(Pα) Q + L` on interior rows.
//!
//! By default the iteration runs on nodal values `w = T α` (`T` the
//! interpolation matrix at the centers), which keeps the unknowns O(1) for
//! flat kernels. Newton's method is affine invariant, so the iterates match the
//! coefficient-space ones in exact arithmetic.

use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expansion::{Expansion, PolynomialTail};
use crate::geometry::CollocationSet;
use crate::kernels::RadialKernel;
use crate::linalg::DenseLu;
use crate::operators::{EvalPoint, LinearOperator, ProblemSpec, ScalarField};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Damping {
    None,
    Backtracking { factor: f64, max_halvings: u32 },
}

impl Default for Damping {
    fn default() -> Self {
        Damping::Backtracking { factor: 0.5, max_halvings: 20 }
    }
}

#[derive(Debug, Clone, Default)]
pub enum InitialGuess {
    #[default]
    Zeros,
    /// Interpolate this field at the centers.
    Field(ScalarField),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Unknowns {
    #[default]
    NodalValues,
    Coefficients,
}

#[derive(Debug, Clone)]
pub struct NewtonConfig {
    pub max_iterations: usize,
    /// Absolute tolerance on `‖F‖₂`.
    pub residual_tolerance: f64,
    pub step_tolerance: f64,
    pub damping: Damping,
    pub initial_guess: InitialGuess,
    pub unknowns: Unknowns,
    pub tail: Option<PolynomialTail>,
}

impl Default for NewtonConfig {
    fn default() -> Self {
        NewtonConfig {
            max_iterations: 50,
            residual_tolerance: 1e-10,
            step_tolerance: 1e-12,
            damping: Damping::default(),
            initial_guess: InitialGuess::Zeros,
            unknowns: Unknowns::NodalValues,
            tail: None,
        }
    }
}

impl NewtonConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iterations < 1 {
            return Err(Error::InvalidArgument("max_iterations must be >= 1".into()));
        }
        if !(self.residual_tolerance > 0.0 && self.step_tolerance > 0.0) {
            return Err(Error::InvalidArgument("Newton tolerances must be positive".into()));
        }
        if let Damping::Backtracking { factor, .. } = self.damping {
            if !(factor > 0.0 && factor < 1.0) {
                return Err(Error::InvalidArgument(format!("damping factor {factor} outside (0, 1)")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    ResidualTolerance,
    StepTolerance,
    MaxIterations,
}

#[derive(Debug, Clone)]
pub struct NewtonReport {
    pub iterations: usize,
    /// `‖F‖₂` at the initial guess and after every step.
    pub residual_history: Vec<f64>,
    pub converged: bool,
    pub stop_reason: StopReason,
    /// Final expansion coefficients `α` (centers, then tail).
    pub coefficients: Vec<f64>,
    /// Condition estimate of the last Jacobian factored.
    pub jacobian_condition: f64,
    /// Time spent in the iteration loop.
    pub solve_time: Duration,
    /// Time including assembly.
    pub total_time: Duration,
}

/// The collocated problem in quadratic form.
#[derive(Debug, Clone)]
pub struct NewtonSystem {
    pub expansion: Expansion,
    pub p: DMatrix<f64>,
    pub q: DMatrix<f64>,
    pub l: DMatrix<f64>,
    pub f: DVector<f64>,
    /// Boundary and moment rows.
    pub b: DMatrix<f64>,
    pub g: DVector<f64>,
}

fn stack(rows: &[Vec<f64>], ncols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), ncols, |i, j| rows[i][j])
}

impl NewtonSystem {
    pub fn new(
        problem: &ProblemSpec,
        kernel: &RadialKernel,
        points: &CollocationSet,
        tail: Option<PolynomialTail>,
    ) -> Result<Self> {
        let dim = problem.dim();
        let expansion = Expansion::new(kernel.clone(), points.set_u(), tail, dim);
        let n = expansion.len();
        let (mut p, mut q, mut l, mut f) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
        for x in &points.interior_u {
            let e = EvalPoint::interior(*x);
            p.push(expansion.row(&problem.p, &e)?);
            q.push(expansion.row(&problem.q, &e)?);
            l.push(expansion.row(&problem.r, &e)?);
            f.push(problem.f.eval(x));
        }
        let (mut b, mut g) = (Vec::new(), Vec::new());
        let id = LinearOperator::identity();
        let dn = LinearOperator::normal_derivative();
        for bp in &points.boundary {
            let e = EvalPoint::boundary(bp.point, bp.normal);
            if problem.partition.is_dirichlet(bp.face) {
                b.push(expansion.row(&id, &e)?);
                g.push(problem.dirichlet.eval(&bp.point));
            } else {
                b.push(expansion.row(&dn, &e)?);
                g.push(problem.neumann.eval(&bp.point));
            }
        }
        for m in expansion.moment_rows() {
            b.push(m);
            g.push(0.0);
        }
        let rows = f.len() + g.len();
        if rows != n {
            return Err(Error::RowBudget { rows, cols: n, mode: "newton" });
        }
        let sys = NewtonSystem {
            p: stack(&p, n),
            q: stack(&q, n),
            l: stack(&l, n),
            f: DVector::from_vec(f),
            b: stack(&b, n),
            g: DVector::from_vec(g),
            expansion,
        };
        let finite = [&sys.p, &sys.q, &sys.l, &sys.b].iter().all(|m| m.iter().all(|v| v.is_finite()))
            && sys.f.iter().chain(sys.g.iter()).all(|v| v.is_finite());
        if !finite {
            return Err(Error::NonFinite("Newton collocation matrices".into()));
        }
        Ok(sys)
    }

    pub fn len(&self) -> usize {
        self.expansion.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn residual(&self, x: &DVector<f64>) -> DVector<f64> {
        let px = &self.p * x;
        let qx = &self.q * x;
        let interior = px.component_mul(&qx) + &self.l * x - &self.f;
        let boundary = &self.b * x - &self.g;
        let mut out = DVector::zeros(self.len());
        out.rows_mut(0, interior.len()).copy_from(&interior);
        out.rows_mut(interior.len(), boundary.len()).copy_from(&boundary);
        out
    }

    pub fn jacobian(&self, x: &DVector<f64>) -> DMatrix<f64> {
        let px = &self.p * x;
        let qx = &self.q * x;
        let ni = self.f.len();
        let mut j = DMatrix::zeros(self.len(), self.len());
        for i in 0..ni {
            for k in 0..self.len() {
                j[(i, k)] = qx[i] * self.p[(i, k)] + px[i] * self.q[(i, k)] + self.l[(i, k)];
            }
        }
        j.view_mut((ni, 0), (self.b.nrows(), self.len())).copy_from(&self.b);
        j
    }

    /// The same system with unknowns `w = T α`: every matrix `M` becomes `M T⁻¹`.
    pub fn to_nodal(&self, t: &DenseLu) -> Result<NewtonSystem> {
        let right_solve = |m: &DMatrix<f64>| -> Result<DMatrix<f64>> {
            let mut out = DMatrix::zeros(m.nrows(), m.ncols());
            for i in 0..m.nrows() {
                let row = t.solve_transpose(&m.row(i).transpose())?;
                out.set_row(i, &row.transpose());
            }
            Ok(out)
        };
        Ok(NewtonSystem {
            expansion: self.expansion.clone(),
            p: right_solve(&self.p)?,
            q: right_solve(&self.q)?,
            l: right_solve(&self.l)?,
            f: self.f.clone(),
            b: right_solve(&self.b)?,
            g: self.g.clone(),
        })
    }
}

fn coeffs_vector(sys: &NewtonSystem, coeffs: &[f64]) -> Result<DVector<f64>> {
    if coeffs.len() != sys.len() {
        return Err(Error::InvalidArgument(format!("{} coefficients for {} basis functions", coeffs.len(), sys.len())));
    }
    Ok(DVector::from_column_slice(coeffs))
}

/// `F(α)` without a polynomial tail.
pub fn assemble_residual(
    problem: &ProblemSpec,
    coeffs: &[f64],
    kernel: &RadialKernel,
    points: &CollocationSet,
) -> Result<DVector<f64>> {
    let sys = NewtonSystem::new(problem, kernel, points, None)?;
    Ok(sys.residual(&coeffs_vector(&sys, coeffs)?))
}

/// `J(α)` without a polynomial tail.
pub fn assemble_jacobian(
    problem: &ProblemSpec,
    coeffs: &[f64],
    kernel: &RadialKernel,
    points: &CollocationSet,
) -> Result<DMatrix<f64>> {
    let sys = NewtonSystem::new(problem, kernel, points, None)?;
    Ok(sys.jacobian(&coeffs_vector(&sys, coeffs)?))
}

/// Steps in a window this long may grow the residual at most tenfold once
/// damping is exhausted.
const DIVERGENCE_WINDOW: usize = 5;
const DIVERGENCE_GROWTH: f64 = 10.0;

pub fn newton_solve(
    problem: &ProblemSpec,
    kernel: &RadialKernel,
    points: &CollocationSet,
    config: &NewtonConfig,
) -> Result<(Vec<f64>, NewtonReport)> {
    config.validate()?;
    let start = Instant::now();
    let base = NewtonSystem::new(problem, kernel, points, config.tail)?;
    let n = base.len();
    let nodal_values =
        |field: &ScalarField| DVector::from_fn(n, |i, _| base.expansion.centers.get(i).map_or(0.0, |c| field.eval(c)));
    let (sys, t_lu) = match config.unknowns {
        Unknowns::NodalValues => {
            let t = DenseLu::factor(&base.expansion.interpolation_matrix()?)?;
            (base.to_nodal(&t)?, Some(t))
        }
        Unknowns::Coefficients => (base.clone(), None),
    };
    let mut x = match (&config.initial_guess, &t_lu) {
        (InitialGuess::Zeros, _) => DVector::zeros(n),
        (InitialGuess::Field(f), Some(_)) => nodal_values(f),
        (InitialGuess::Field(f), None) => {
            let t = DenseLu::factor(&base.expansion.interpolation_matrix()?)?;
            t.solve(&nodal_values(f))?
        }
    };

    let loop_start = Instant::now();
    let mut fx = sys.residual(&x);
    let mut history = vec![fx.norm()];
    let mut condition = f64::NAN;
    let mut stop = StopReason::MaxIterations;
    let mut exhausted_since: Option<usize> = None;
    for it in 0..config.max_iterations {
        if history[it] <= config.residual_tolerance {
            stop = StopReason::ResidualTolerance;
            break;
        }
        let lu = DenseLu::factor(&sys.jacobian(&x)).map_err(|e| match e {
            Error::SingularSystem { .. } => Error::SingularJacobian { iteration: it },
            other => other,
        })?;
        let step = lu.solve(&(-&fx)).map_err(|_| Error::SingularJacobian { iteration: it })?;
        condition = lu.condition_estimate();

        let current = history[it];
        let mut t = 1.0;
        let mut trial = &x + &step;
        let mut f_trial = sys.residual(&trial);
        let mut exhausted = false;
        match config.damping {
            Damping::None => exhausted = true,
            Damping::Backtracking { factor, max_halvings } => {
                let mut halvings = 0;
                while f_trial.norm().is_nan() || f_trial.norm() >= current {
                    if halvings == max_halvings {
                        exhausted = true;
                        break;
                    }
                    t *= factor;
                    halvings += 1;
                    trial = &x + &step * t;
                    f_trial = sys.residual(&trial);
                }
            }
        }
        x = trial;
        fx = f_trial;
        let norm = fx.norm();
        history.push(norm);
        if !norm.is_finite() {
            return Err(Error::Divergence { iteration: it + 1, residual: norm });
        }
        if exhausted {
            exhausted_since.get_or_insert(it + 1);
        } else {
            exhausted_since = None;
        }
        let k = history.len() - 1;
        if exhausted_since.is_some()
            && k >= DIVERGENCE_WINDOW
            && norm > DIVERGENCE_GROWTH * history[k - DIVERGENCE_WINDOW]
        {
            return Err(Error::Divergence { iteration: k, residual: norm });
        }
        if norm <= config.residual_tolerance {
            stop = StopReason::ResidualTolerance;
            break;
        }
        if t * step.norm() <= config.step_tolerance {
            stop = StopReason::StepTolerance;
            break;
        }
    }
    let solve_time = loop_start.elapsed();

    let alpha = match &t_lu {
        Some(t) => t.solve(&x)?,
        None => x,
    };
    if alpha.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("Newton coefficients".into()));
    }
    let coefficients: Vec<f64> = alpha.iter().copied().collect();
    let report = NewtonReport {
        iterations: history.len() - 1,
        converged: stop != StopReason::MaxIterations,
        stop_reason: stop,
        residual_history: history,
        coefficients: coefficients.clone(),
        jacobian_condition: condition,
        solve_time,
        total_time: start.elapsed(),
    };
    Ok((coefficients, report))
}
