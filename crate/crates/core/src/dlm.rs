//! Direct Linearization Method.
//!
//! With `v = p(u) q(u)` as a second unknown field the PDE becomes the linear
//! equation `v + R(u) = f`. Both fields are RBF expansions over staggered
//! center sets, giving the block system
//!
//! ```text
//! [A1 A2] [α]   [b1]
//! [C1 C2] [β] = [b2]
//! ```
//!
//! which is solved once, by LU when square and by pivoted QR when over-posed.
//! The relation `v = p(u) q(u)` is never collocated; its defect is reported as
//! the consistency residual.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expansion::{ExpandedField, Expansion, PolynomialTail};
use crate::geometry::{CollocationSet, Point};
use crate::kernels::RadialKernel;
use crate::linalg::{factorization_count, DenseLu, PivotedQr};
use crate::operators::{apply_product_to_field, EvalPoint, LinearOperator, ProblemSpec, ScalarField};

/// Condition estimates above this trigger a warning.
pub const CONDITION_WARNING: f64 = 1e12;

#[derive(Debug, Clone, PartialEq)]
pub enum SolveMode {
    Square,
    /// Extra `v + R(u) = f` rows at the given points, solved in least squares.
    LeastSquares {
        extra_points: Vec<Point>,
    },
}

impl SolveMode {
    pub fn kind(&self) -> ModeKind {
        match self {
            SolveMode::Square => ModeKind::Square,
            SolveMode::LeastSquares { .. } => ModeKind::LeastSquares,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeKind {
    Square,
    LeastSquares,
}

impl fmt::Display for ModeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModeKind::Square => "square",
            ModeKind::LeastSquares => "least_squares",
        })
    }
}

/// Where the Dirichlet rows of `v` come from.
#[derive(Debug, Clone)]
pub enum VBoundarySource {
    /// Known values of `v` (manufactured benchmarks).
    ExactField(ScalarField),
    /// Collocate `v + R(u) = f` on the boundary instead.
    GoverningEquation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RowTag {
    InteriorEq4,
    DirichletU,
    NeumannU,
    DirichletV,
    /// Governing equation collocated at a Dirichlet boundary point in place of a `v` value.
    DirichletVSubstituted,
    NeumannVSubstituted,
    /// Polynomial-tail moment condition.
    Moment,
    ExtraOverposed,
}

impl RowTag {
    /// Rows that collocate `v + R(u) = f` (the `A` blocks).
    pub fn is_equation(self) -> bool {
        matches!(
            self,
            RowTag::InteriorEq4 | RowTag::DirichletVSubstituted | RowTag::NeumannVSubstituted | RowTag::ExtraOverposed
        )
    }

    fn is_u_boundary(self) -> bool {
        matches!(self, RowTag::DirichletU | RowTag::NeumannU)
    }

    fn is_v_boundary(self) -> bool {
        matches!(self, RowTag::DirichletV | RowTag::DirichletVSubstituted | RowTag::NeumannVSubstituted)
    }
}

#[derive(Debug, Clone)]
pub struct BlockSystem {
    pub matrix: DMatrix<f64>,
    pub rhs: DVector<f64>,
    pub row_tags: Vec<RowTag>,
    /// Columns of the `α` block (centers plus tail).
    pub n_u: usize,
    /// Columns of the `β` block.
    pub n_v: usize,
    pub mode: ModeKind,
    pub u_basis: Expansion,
    pub v_basis: Expansion,
    p: LinearOperator,
    q: LinearOperator,
    test_points: Vec<EvalPoint>,
}

impl BlockSystem {
    pub fn rows(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn cols(&self) -> usize {
        self.matrix.ncols()
    }

    fn select(&self, equation: bool, u_block: bool) -> DMatrix<f64> {
        let rows: Vec<usize> = (0..self.rows()).filter(|&i| self.row_tags[i].is_equation() == equation).collect();
        let (c0, nc) = if u_block { (0, self.n_u) } else { (self.n_u, self.n_v) };
        DMatrix::from_fn(rows.len(), nc, |i, j| self.matrix[(rows[i], c0 + j)])
    }

    fn select_rhs(&self, equation: bool) -> DVector<f64> {
        let v: Vec<f64> =
            (0..self.rows()).filter(|&i| self.row_tags[i].is_equation() == equation).map(|i| self.rhs[i]).collect();
        DVector::from_vec(v)
    }

    /// `u` columns of the governing-equation rows.
    pub fn a1(&self) -> DMatrix<f64> {
        self.select(true, true)
    }

    pub fn a2(&self) -> DMatrix<f64> {
        self.select(true, false)
    }

    /// `u` columns of the boundary and moment rows.
    pub fn c1(&self) -> DMatrix<f64> {
        self.select(false, true)
    }

    pub fn c2(&self) -> DMatrix<f64> {
        self.select(false, false)
    }

    pub fn b1(&self) -> DVector<f64> {
        self.select_rhs(true)
    }

    pub fn b2(&self) -> DVector<f64> {
        self.select_rhs(false)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveDiagnostics {
    pub algebraic_residual: f64,
    pub boundary_residual_u: f64,
    pub boundary_residual_v: f64,
    /// `max |v − p(u) q(u)|` over the collocation points.
    pub consistency_residual: f64,
    /// 1-norm condition estimate (of `A` for LU, of `R` for QR).
    pub condition_estimate: f64,
    pub mode: ModeKind,
    pub tail_degree: Option<u32>,
    /// Factorizations performed by the solve; always 1.
    pub factorizations: usize,
    pub rank: usize,
}

#[derive(Debug, Clone)]
pub struct DlmSolution {
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    pub u: Expansion,
    pub v: Expansion,
    pub diagnostics: SolveDiagnostics,
}

impl DlmSolution {
    pub fn u_at(&self, x: &Point) -> Result<f64> {
        self.u.evaluate(&self.alpha, x)
    }

    pub fn v_at(&self, x: &Point) -> Result<f64> {
        self.v.evaluate(&self.beta, x)
    }
}

fn push_row(m: &mut Vec<Vec<f64>>, rhs: &mut Vec<f64>, tags: &mut Vec<RowTag>, row: Vec<f64>, b: f64, tag: RowTag) {
    m.push(row);
    rhs.push(b);
    tags.push(tag);
}

fn concat(a: Vec<f64>, b: Vec<f64>) -> Vec<f64> {
    let mut a = a;
    a.extend(b);
    a
}

/// Assemble without a polynomial tail.
pub fn assemble_dlm(
    problem: &ProblemSpec,
    points: &CollocationSet,
    psi_u: &RadialKernel,
    psi_v: &RadialKernel,
    mode: &SolveMode,
    v_source: &VBoundarySource,
) -> Result<BlockSystem> {
    assemble_dlm_with_tail(problem, points, psi_u, psi_v, mode, v_source, None)
}

/// Row order: `v + R(u) = f` at interior_u then interior_v; `u` Dirichlet rows;
/// `u` Neumann rows; `v` rows at the Γ₁ then Γ₂ boundary points; tail moment
/// rows; extra least-squares rows.
pub fn assemble_dlm_with_tail(
    problem: &ProblemSpec,
    points: &CollocationSet,
    psi_u: &RadialKernel,
    psi_v: &RadialKernel,
    mode: &SolveMode,
    v_source: &VBoundarySource,
    tail: Option<PolynomialTail>,
) -> Result<BlockSystem> {
    let dim = problem.dim();
    if points.dim != dim {
        return Err(Error::InvalidArgument(format!("{}D points for a {dim}D problem", points.dim)));
    }
    let u = Expansion::new(psi_u.clone(), points.set_u(), tail, dim);
    let v = Expansion::new(psi_v.clone(), points.set_v(), None, dim);
    let (n_u, n_v) = (u.len(), v.len());
    let id = LinearOperator::identity();
    let dn = LinearOperator::normal_derivative();

    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    let mut tags = Vec::new();
    let mut test_points = Vec::new();

    let eq_row = |x: &EvalPoint| -> Result<(Vec<f64>, f64)> {
        let row = concat(u.row(&problem.r, x)?, v.row(&id, x)?);
        Ok((row, problem.f.eval(&x.point)))
    };

    for p in points.interior_u.iter().chain(&points.interior_v) {
        let x = EvalPoint::interior(*p);
        let (row, b) = eq_row(&x)?;
        push_row(&mut rows, &mut rhs, &mut tags, row, b, RowTag::InteriorEq4);
        test_points.push(x);
    }
    let (gamma1, gamma2): (Vec<&crate::geometry::BoundaryPoint>, Vec<_>) =
        points.boundary.iter().partition(|b| problem.partition.is_dirichlet(b.face));
    for b in &gamma1 {
        let x = EvalPoint::boundary(b.point, b.normal);
        let row = concat(u.row(&id, &x)?, vec![0.0; n_v]);
        push_row(&mut rows, &mut rhs, &mut tags, row, problem.dirichlet.eval(&b.point), RowTag::DirichletU);
        test_points.push(x);
    }
    for b in &gamma2 {
        let x = EvalPoint::boundary(b.point, b.normal);
        let row = concat(u.row(&dn, &x)?, vec![0.0; n_v]);
        push_row(&mut rows, &mut rhs, &mut tags, row, problem.neumann.eval(&b.point), RowTag::NeumannU);
        test_points.push(x);
    }
    for b in &gamma1 {
        let x = EvalPoint::boundary(b.point, b.normal);
        match v_source {
            VBoundarySource::ExactField(field) => {
                let row = concat(vec![0.0; n_u], v.row(&id, &x)?);
                push_row(&mut rows, &mut rhs, &mut tags, row, field.eval(&b.point), RowTag::DirichletV);
            }
            VBoundarySource::GoverningEquation => {
                let (row, val) = eq_row(&x)?;
                push_row(&mut rows, &mut rhs, &mut tags, row, val, RowTag::DirichletVSubstituted);
            }
        }
    }
    for b in &gamma2 {
        let x = EvalPoint::boundary(b.point, b.normal);
        let (row, val) = eq_row(&x)?;
        push_row(&mut rows, &mut rhs, &mut tags, row, val, RowTag::NeumannVSubstituted);
    }
    for m in u.moment_rows() {
        push_row(&mut rows, &mut rhs, &mut tags, concat(m, vec![0.0; n_v]), 0.0, RowTag::Moment);
    }
    if let SolveMode::LeastSquares { extra_points } = mode {
        for p in extra_points {
            if !problem.domain.contains(p, 1e-12) {
                return Err(Error::InvalidArgument(format!("extra point ({}, {}) outside the domain", p.x, p.y)));
            }
            let x = EvalPoint::interior(*p);
            let (row, b) = eq_row(&x)?;
            push_row(&mut rows, &mut rhs, &mut tags, row, b, RowTag::ExtraOverposed);
        }
    }

    let cols = n_u + n_v;
    let budget_ok = match mode {
        SolveMode::Square => rows.len() == cols,
        SolveMode::LeastSquares { .. } => rows.len() > cols,
    };
    if !budget_ok {
        let mode = match mode {
            SolveMode::Square => "square",
            SolveMode::LeastSquares { .. } => "least-squares",
        };
        return Err(Error::RowBudget { rows: rows.len(), cols, mode });
    }
    let matrix = DMatrix::from_fn(rows.len(), cols, |i, j| rows[i][j]);
    if matrix.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("assembled matrix".into()));
    }
    if rhs.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("right-hand side".into()));
    }
    Ok(BlockSystem {
        matrix,
        rhs: DVector::from_vec(rhs),
        row_tags: tags,
        n_u,
        n_v,
        mode: mode.kind(),
        u_basis: u,
        v_basis: v,
        p: problem.p.clone(),
        q: problem.q.clone(),
        test_points,
    })
}

enum Factored {
    Lu(DenseLu),
    Qr(PivotedQr),
}

fn factor(system: &BlockSystem) -> Result<Factored> {
    Ok(match system.mode {
        ModeKind::Square => Factored::Lu(DenseLu::factor(&system.matrix)?),
        ModeKind::LeastSquares => Factored::Qr(PivotedQr::factor(&system.matrix)?),
    })
}

/// One factorization, one solve.
pub fn solve_dlm(system: &BlockSystem) -> Result<DlmSolution> {
    let before = factorization_count();
    let (x, condition, rank) = match factor(system)? {
        Factored::Lu(lu) => {
            let x = lu.solve(&system.rhs)?;
            (x, lu.condition_estimate(), system.cols())
        }
        Factored::Qr(qr) => {
            if !qr.is_full_rank() {
                return Err(Error::SingularSystem { condition: qr.condition_estimate() });
            }
            let x = qr.solve(&system.rhs)?;
            (x, qr.condition_estimate(), qr.rank())
        }
    };
    let factorizations = factorization_count() - before;
    if condition > CONDITION_WARNING {
        log::warn!("DLM system condition estimate {condition:.3e} exceeds {CONDITION_WARNING:.0e}");
    }
    let residual = &system.matrix * &x - &system.rhs;
    let max_over = |pred: fn(RowTag) -> bool| {
        (0..system.rows()).filter(|&i| pred(system.row_tags[i])).map(|i| residual[i].abs()).fold(0.0, f64::max)
    };
    let alpha: Vec<f64> = x.rows(0, system.n_u).iter().copied().collect();
    let beta: Vec<f64> = x.rows(system.n_u, system.n_v).iter().copied().collect();
    let consistency =
        consistency_with(&system.u_basis, &alpha, &system.v_basis, &beta, &system.p, &system.q, &system.test_points)?;
    let diagnostics = SolveDiagnostics {
        algebraic_residual: residual.norm(),
        boundary_residual_u: max_over(RowTag::is_u_boundary),
        boundary_residual_v: max_over(RowTag::is_v_boundary),
        consistency_residual: consistency,
        condition_estimate: condition,
        mode: system.mode,
        tail_degree: system.u_basis.tail.map(|t| t.degree),
        factorizations,
        rank,
    };
    Ok(DlmSolution { alpha, beta, u: system.u_basis.clone(), v: system.v_basis.clone(), diagnostics })
}

/// `u` and `v` values at `points`.
pub fn evaluate_solution(sol: &DlmSolution, points: &[Point]) -> Result<(Vec<f64>, Vec<f64>)> {
    let u = points.iter().map(|p| sol.u_at(p)).collect::<Result<Vec<_>>>()?;
    let v = points.iter().map(|p| sol.v_at(p)).collect::<Result<Vec<_>>>()?;
    Ok((u, v))
}

fn consistency_with(
    u: &Expansion,
    alpha: &[f64],
    v: &Expansion,
    beta: &[f64],
    p: &LinearOperator,
    q: &LinearOperator,
    points: &[EvalPoint],
) -> Result<f64> {
    let field = ExpandedField { expansion: u, coeffs: alpha };
    let mut worst: f64 = 0.0;
    for x in points {
        let pq = apply_product_to_field(p, q, &field, x)?;
        let vx = v.evaluate(beta, &x.point)?;
        worst = worst.max((vx - pq).abs());
    }
    Ok(worst)
}

/// `max |v(x) − (p u)(x) (q u)(x)|` over `test_points`; 0 when empty.
pub fn consistency_residual(sol: &DlmSolution, problem: &ProblemSpec, test_points: &[EvalPoint]) -> Result<f64> {
    consistency_with(&sol.u, &sol.alpha, &sol.v, &sol.beta, &problem.p, &problem.q, test_points)
}

/// 1-norm condition estimate from a fresh factorization: of the matrix itself
/// in square mode, of the triangular QR factor in least-squares mode.
/// An exactly singular matrix reports infinity.
pub fn condition_estimate(system: &BlockSystem) -> Result<f64> {
    Ok(match factor(system) {
        Ok(Factored::Lu(lu)) => lu.condition_estimate(),
        Ok(Factored::Qr(qr)) => qr.condition_estimate(),
        Err(Error::SingularSystem { .. }) => f64::INFINITY,
        Err(e) => return Err(e),
    })
}
