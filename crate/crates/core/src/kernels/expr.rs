//! Smooth radial expressions evaluated by Taylor jets.

use std::sync::Arc;

use super::jet::{self, Jet};
use super::logpoly::LogPoly;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    /// The radius `r`.
    R,
    /// `sqrt(r^2 + c^2)`.
    Shifted(f64),
    Sum(Vec<Expr>),
    Product(Vec<Expr>),
    Pow(Arc<Expr>, f64),
    Exp(Arc<Expr>),
    Ln(Arc<Expr>),
    /// k-th derivative with respect to `r`.
    Derivative(Arc<Expr>, usize),
    /// `e(r) / r`.
    DivR(Arc<Expr>),
}

impl Expr {
    pub fn pow(self, a: f64) -> Expr {
        Expr::Pow(Arc::new(self), a)
    }

    pub fn exp(self) -> Expr {
        Expr::Exp(Arc::new(self))
    }

    pub fn ln(self) -> Expr {
        Expr::Ln(Arc::new(self))
    }

    pub fn derivative(self, k: usize) -> Expr {
        if k == 0 {
            return self;
        }
        match self {
            Expr::Derivative(e, j) => Expr::Derivative(e, j + k),
            Expr::Const(_) => Expr::Const(0.0),
            e => Expr::Derivative(Arc::new(e), k),
        }
    }

    pub fn div_r(self) -> Expr {
        Expr::DivR(Arc::new(self))
    }

    pub fn times(self, other: Expr) -> Expr {
        match (self, other) {
            (Expr::Const(a), Expr::Const(b)) => Expr::Const(a * b),
            (Expr::Const(a), e) | (e, Expr::Const(a)) if a == 1.0 => e,
            (Expr::Product(mut v), Expr::Product(w)) => {
                v.extend(w);
                Expr::Product(v)
            }
            (Expr::Product(mut v), e) | (e, Expr::Product(mut v)) => {
                v.push(e);
                Expr::Product(v)
            }
            (a, b) => Expr::Product(vec![a, b]),
        }
    }

    pub fn plus(self, other: Expr) -> Expr {
        match (self, other) {
            (Expr::Const(a), Expr::Const(b)) => Expr::Const(a + b),
            (Expr::Sum(mut v), e) | (e, Expr::Sum(mut v)) => {
                v.push(e);
                Expr::Sum(v)
            }
            (a, b) => Expr::Sum(vec![a, b]),
        }
    }

    /// `Σ c · x^a · ln^b x` with `x` the given inner expression.
    pub fn from_logpoly(p: &LogPoly, inner: Expr) -> Expr {
        let terms: Vec<Expr> = p
            .terms()
            .map(|(a, b, c)| {
                let mut t = Expr::Const(c);
                if a != 0 {
                    t = t.times(inner.clone().pow(a as f64));
                }
                if b != 0 {
                    t = t.times(inner.clone().ln().pow(b as f64));
                }
                t
            })
            .collect();
        match terms.len() {
            0 => Expr::Const(0.0),
            1 => terms.into_iter().next().unwrap(),
            _ => Expr::Sum(terms),
        }
    }

    /// Taylor jet of length `len` at `r0 ≥ 0`.
    pub fn jet(&self, r0: f64, len: usize) -> Result<Jet> {
        let singular = || Error::SingularAtOrigin { order: len.saturating_sub(1) };
        Ok(match self {
            Expr::Const(c) => jet::constant(*c, len),
            Expr::R => jet::variable(r0, len),
            Expr::Shifted(c) => {
                let mut g = jet::constant(r0 * r0 + c * c, len);
                if len > 1 {
                    g[1] = 2.0 * r0;
                }
                if len > 2 {
                    g[2] = 1.0;
                }
                jet::powf(&g, 0.5).ok_or_else(singular)?
            }
            Expr::Sum(v) => {
                let mut acc = jet::constant(0.0, len);
                for e in v {
                    acc = jet::add(&acc, &e.jet(r0, len)?);
                }
                acc
            }
            Expr::Product(v) => {
                let mut acc = jet::constant(1.0, len);
                for e in v {
                    acc = jet::mul(&acc, &e.jet(r0, len)?);
                }
                acc
            }
            Expr::Pow(e, a) => jet::powf(&e.jet(r0, len)?, *a).ok_or_else(singular)?,
            Expr::Exp(e) => jet::exp(&e.jet(r0, len)?),
            Expr::Ln(e) => jet::ln(&e.jet(r0, len)?).ok_or_else(singular)?,
            Expr::Derivative(e, k) => jet::derivative(&e.jet(r0, len + k)?, *k),
            Expr::DivR(e) => {
                let extra = usize::from(r0 == 0.0);
                jet::div_r(&e.jet(r0, len + extra)?, r0).ok_or_else(singular)?
            }
        })
    }

    /// `φ(r), …, φ^(max_order)(r)`.
    pub fn derivatives(&self, r: f64, max_order: usize) -> Result<Vec<f64>> {
        let d = jet::to_derivatives(&self.jet(r, max_order + 1)?);
        if d.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("kernel derivatives at r = {r}")));
        }
        Ok(d)
    }
}
