//! Exact sums of `c · r^a · ln^b r`.

use std::collections::BTreeMap;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Default)]
pub struct LogPoly {
    terms: BTreeMap<(i32, u32), f64>,
}

impl LogPoly {
    pub fn zero() -> Self {
        LogPoly::default()
    }

    pub fn constant(c: f64) -> Self {
        LogPoly::term(c, 0, 0)
    }

    /// `c · r^a · ln^b r`.
    pub fn term(c: f64, a: i32, b: u32) -> Self {
        let mut p = LogPoly::zero();
        p.push(c, a, b);
        p
    }

    fn push(&mut self, c: f64, a: i32, b: u32) {
        if c == 0.0 {
            return;
        }
        let e = self.terms.entry((a, b)).or_insert(0.0);
        *e += c;
        if *e == 0.0 {
            self.terms.remove(&(a, b));
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (i32, u32, f64)> + '_ {
        self.terms.iter().map(|(&(a, b), &c)| (a, b, c))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, other: &LogPoly) -> LogPoly {
        let mut out = self.clone();
        for (a, b, c) in other.terms() {
            out.push(c, a, b);
        }
        out
    }

    pub fn scale(&self, s: f64) -> LogPoly {
        let mut out = LogPoly::zero();
        for (a, b, c) in self.terms() {
            out.push(c * s, a, b);
        }
        out
    }

    pub fn mul(&self, other: &LogPoly) -> LogPoly {
        let mut out = LogPoly::zero();
        for (a1, b1, c1) in self.terms() {
            for (a2, b2, c2) in other.terms() {
                out.push(c1 * c2, a1 + a2, b1 + b2);
            }
        }
        out
    }

    pub fn powi(&self, e: u32) -> LogPoly {
        (0..e).fold(LogPoly::constant(1.0), |acc, _| acc.mul(self))
    }

    /// Multiply by `r^k`.
    pub fn shift(&self, k: i32) -> LogPoly {
        let mut out = LogPoly::zero();
        for (a, b, c) in self.terms() {
            out.push(c, a + k, b);
        }
        out
    }

    pub fn derivative(&self) -> LogPoly {
        let mut out = LogPoly::zero();
        for (a, b, c) in self.terms() {
            out.push(c * a as f64, a - 1, b);
            if b > 0 {
                out.push(c * b as f64, a - 1, b - 1);
            }
        }
        out
    }

    pub fn nth_derivative(&self, k: usize) -> LogPoly {
        (0..k).fold(self.clone(), |p, _| p.derivative())
    }

    /// Value at `r > 0`.
    pub fn eval(&self, r: f64) -> f64 {
        let lr = r.ln();
        self.terms().map(|(a, b, c)| c * r.powi(a) * lr.powi(b as i32)).sum()
    }

    /// Limit as `r → 0+`, if finite.
    pub fn limit_at_zero(&self) -> Option<f64> {
        let mut value = 0.0;
        for (a, b, c) in self.terms() {
            match (a, b) {
                (a, _) if a > 0 => {}
                (0, 0) => value += c,
                _ => return None,
            }
        }
        Some(value)
    }

    /// Smallest `n` such that `r^(2n) · self` has a finite limit at 0.
    pub fn required_augmentation(&self) -> u32 {
        (0..64).find(|&n| self.shift(2 * n as i32).limit_at_zero().is_some()).unwrap_or(64)
    }

    /// `φ(r), φ'(r), …, φ^(max_order)(r)`, using exact limits at `r = 0`.
    pub fn derivatives(&self, r: f64, max_order: usize) -> Result<Vec<f64>> {
        let mut p = self.clone();
        let mut out = Vec::with_capacity(max_order + 1);
        for k in 0..=max_order {
            let v = if r == 0.0 { p.limit_at_zero().ok_or(Error::SingularAtOrigin { order: k })? } else { p.eval(r) };
            out.push(v);
            p = p.derivative();
        }
        Ok(out)
    }
}
