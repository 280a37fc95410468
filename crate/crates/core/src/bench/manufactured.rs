//! Manufactured cases: `f`, `ū`, `q̄` and `v*` derived from a chosen exact field.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::fields::ExactField;
use crate::error::{Error, Result};
use crate::geometry::{BoundaryPartition, Domain, Face, Point};
use crate::operators::{EvalPoint, FieldJet, LinearOperator, ProblemSpec, ScalarField};

type JetFn = Arc<dyn Fn(&Point) -> FieldJet + Send + Sync>;

#[derive(Clone)]
pub struct ManufacturedCase {
    pub name: String,
    pub problem: ProblemSpec,
    u_exact: JetFn,
    pub v_exact: ScalarField,
}

impl std::fmt::Debug for ManufacturedCase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ManufacturedCase").field("name", &self.name).field("problem", &self.problem).finish()
    }
}

impl ManufacturedCase {
    pub fn u_jet(&self, p: &Point) -> FieldJet {
        (self.u_exact)(p)
    }

    pub fn u_value(&self, p: &Point) -> f64 {
        (self.u_exact)(p).value
    }

    pub fn u_field(&self) -> ScalarField {
        let u = self.u_exact.clone();
        ScalarField::new(move |p| u(p).value)
    }
}

/// Derive `f = (p u*)(q u*) + R u*`, `ū = u*`, `q̄ = ∂u*/∂n` and `v* = (p u*)(q u*)`.
pub fn manufacture(
    name: &str,
    p: LinearOperator,
    q: LinearOperator,
    r: LinearOperator,
    u_exact: impl Fn(&Point) -> FieldJet + Send + Sync + 'static,
    domain: Domain,
    partition: BoundaryPartition,
) -> Result<ManufacturedCase> {
    let u: JetFn = Arc::new(u_exact);
    for op in [&p, &q, &r] {
        if op.needs_normal() {
            return Err(Error::InvalidArgument(format!("`{op}` has no meaning in the interior")));
        }
    }
    let (pu, qu) = (p.clone(), q.clone());
    let uf = u.clone();
    let v_exact = ScalarField::new(move |x| {
        let j = uf(x);
        j.apply(&pu, None).unwrap_or(f64::NAN) * j.apply(&qu, None).unwrap_or(f64::NAN)
    });
    let (pf, qf, rf) = (p.clone(), q.clone(), r.clone());
    let uf = u.clone();
    let f = ScalarField::new(move |x| {
        let j = uf(x);
        let e = |op: &LinearOperator| j.apply(op, None).unwrap_or(f64::NAN);
        e(&pf) * e(&qf) + e(&rf)
    });
    let uf = u.clone();
    let dirichlet = ScalarField::new(move |x| uf(x).value);
    let uf = u.clone();
    let dom = domain.clone();
    let neumann = ScalarField::new(move |x| {
        let Some(face) = dom.face_of(x) else { return f64::NAN };
        let n = crate::geometry::outward_normal(&dom, x, face).unwrap_or([f64::NAN; 2]);
        uf(x).apply(&LinearOperator::normal_derivative(), Some(n)).unwrap_or(f64::NAN)
    });
    let problem = ProblemSpec::new(p, q, r, f, dirichlet, neumann, domain, partition)?;
    Ok(ManufacturedCase { name: name.to_string(), problem, u_exact: u, v_exact })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BenchmarkCase {
    /// `u'' = f`, `u* = x²` (nonlinearity switched off).
    B1,
    /// `λ u u' + u'' = f`, `u* = sin(πx)`, Dirichlet at both ends.
    B2,
    /// `λ u² + Δu = f`, `u* = x + y` on the unit square, Neumann on the top face.
    B3,
}

impl BenchmarkCase {
    pub fn name(self) -> &'static str {
        match self {
            BenchmarkCase::B1 => "b1",
            BenchmarkCase::B2 => "b2",
            BenchmarkCase::B3 => "b3",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "b1" => Some(BenchmarkCase::B1),
            "b2" => Some(BenchmarkCase::B2),
            "b3" => Some(BenchmarkCase::B3),
            _ => None,
        }
    }

    pub fn dim(self) -> usize {
        match self {
            BenchmarkCase::B3 => 2,
            _ => 1,
        }
    }
}

/// A benchmark with the nonlinear operator `p` scaled by `lambda`.
pub fn benchmark(case: BenchmarkCase, lambda: f64) -> Result<ManufacturedCase> {
    if !lambda.is_finite() {
        return Err(Error::InvalidArgument(format!("lambda must be finite, got {lambda}")));
    }
    let name = if lambda == 1.0 || case == BenchmarkCase::B1 {
        case.name().to_string()
    } else {
        format!("{}(lambda={lambda})", case.name())
    };
    match case {
        BenchmarkCase::B1 => {
            let d = Domain::unit_interval();
            let part = BoundaryPartition::all_dirichlet(&d);
            let u = ExactField::Quadratic;
            manufacture(
                &name,
                LinearOperator::scale(0.0),
                LinearOperator::identity(),
                LinearOperator::partial(0, 2),
                move |x| u.jet_at(x, 1),
                d,
                part,
            )
        }
        BenchmarkCase::B2 => {
            let d = Domain::unit_interval();
            let part = BoundaryPartition::all_dirichlet(&d);
            let u = ExactField::SinPi;
            manufacture(
                &name,
                LinearOperator::scale(lambda),
                LinearOperator::partial(0, 1),
                LinearOperator::partial(0, 2),
                move |x| u.jet_at(x, 1),
                d,
                part,
            )
        }
        BenchmarkCase::B3 => {
            let d = Domain::unit_square();
            let part = BoundaryPartition::new(&d, &[Face::XMin, Face::XMax, Face::YMin], &[Face::YMax])?;
            let u = ExactField::LinearSum;
            manufacture(
                &name,
                LinearOperator::scale(lambda),
                LinearOperator::identity(),
                LinearOperator::laplacian(),
                move |x| u.jet_at(x, 2),
                d,
                part,
            )
        }
    }
}

/// `|f(x) − (p u*)(q u*)(x) − (R u*)(x)|`, recomputed independently of `f`'s closure.
pub fn manufactured_defect(case: &ManufacturedCase, x: &Point) -> Result<f64> {
    let j = case.u_jet(x);
    let pr = &case.problem;
    let e = EvalPoint::interior(*x);
    let lhs = j.apply(&pr.p, e.normal)? * j.apply(&pr.q, e.normal)? + j.apply(&pr.r, e.normal)?;
    Ok((pr.f.eval(x) - lhs).abs())
}
