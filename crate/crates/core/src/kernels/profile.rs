//! Radial profiles: symbolic log-polynomials or smooth expressions.

use super::expr::Expr;
use super::logpoly::LogPoly;
use crate::error::{Error, Result};
use crate::operators::{LinearOperator, OpTerm};

#[derive(Debug, Clone, PartialEq)]
pub enum Profile {
    Log(LogPoly),
    Smooth(Expr),
}

impl Profile {
    pub fn constant(c: f64) -> Self {
        Profile::Log(LogPoly::constant(c))
    }

    pub fn to_expr(&self) -> Expr {
        match self {
            Profile::Log(p) => Expr::from_logpoly(p, Expr::R),
            Profile::Smooth(e) => e.clone(),
        }
    }

    pub fn mul(&self, other: &Profile) -> Profile {
        match (self, other) {
            (Profile::Log(a), Profile::Log(b)) => Profile::Log(a.mul(b)),
            _ => Profile::Smooth(self.to_expr().times(other.to_expr())),
        }
    }

    pub fn add(&self, other: &Profile) -> Profile {
        match (self, other) {
            (Profile::Log(a), Profile::Log(b)) => Profile::Log(a.add(b)),
            _ => Profile::Smooth(self.to_expr().plus(other.to_expr())),
        }
    }

    pub fn scale(&self, s: f64) -> Profile {
        match self {
            Profile::Log(p) => Profile::Log(p.scale(s)),
            Profile::Smooth(e) => Profile::Smooth(Expr::Const(s).times(e.clone())),
        }
    }

    /// Multiply by `r^(2k)`.
    pub fn augment(&self, k: u32) -> Profile {
        if k == 0 {
            return self.clone();
        }
        match self {
            Profile::Log(p) => Profile::Log(p.shift(2 * k as i32)),
            Profile::Smooth(e) => Profile::Smooth(Expr::R.pow(2.0 * k as f64).times(e.clone())),
        }
    }

    pub fn derivative(&self, k: usize) -> Profile {
        match self {
            Profile::Log(p) => Profile::Log(p.nth_derivative(k)),
            Profile::Smooth(e) => Profile::Smooth(e.clone().derivative(k)),
        }
    }

    pub fn div_r(&self) -> Profile {
        match self {
            Profile::Log(p) => Profile::Log(p.shift(-1)),
            Profile::Smooth(e) => Profile::Smooth(e.clone().div_r()),
        }
    }

    /// A log-polynomial evaluated at `sqrt(r^2 + c^2)` instead of `r`.
    pub fn shifted(p: &LogPoly, c: f64) -> Profile {
        Profile::Smooth(Expr::from_logpoly(p, Expr::Shifted(c)))
    }

    /// Apply `op` radially: partials of order k become `d^k/dr^k`, the normal
    /// derivative becomes `d/dr` and the Laplacian is `φ'' + (d − 1) φ' / r`.
    pub fn apply_radial(&self, op: &LinearOperator, dim: usize) -> Result<Profile> {
        let mut acc: Option<Profile> = None;
        for (coef, term) in op.terms() {
            let t = match term {
                OpTerm::Identity => self.clone(),
                OpTerm::Partial { order, .. } => self.derivative(*order),
                OpTerm::NormalDerivative => self.derivative(1),
                OpTerm::Laplacian => {
                    let d1 = self.derivative(1);
                    if dim > 1 {
                        self.derivative(2).add(&d1.div_r().scale((dim - 1) as f64))
                    } else {
                        self.derivative(2)
                    }
                }
            }
            .scale(*coef);
            acc = Some(match acc {
                None => t,
                Some(a) => a.add(&t),
            });
        }
        acc.ok_or_else(|| Error::InvalidArgument("empty operator".into()))
    }

    pub fn derivatives(&self, r: f64, max_order: usize) -> Result<Vec<f64>> {
        if r.is_nan() || r < 0.0 {
            return Err(Error::InvalidArgument(format!("radius {r} must be nonnegative")));
        }
        match self {
            Profile::Log(p) => p.derivatives(r, max_order),
            Profile::Smooth(e) => e.derivatives(r, max_order),
        }
    }
}
