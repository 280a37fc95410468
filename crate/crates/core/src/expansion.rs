//! Finite RBF expansions `u(x) = Σ α_k φ(‖x − x_k‖) + Σ γ_j π_j(x)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::kernels::RadialKernel;
use crate::operators::{kernel_jet, DifferentiableField, EvalPoint, FieldJet, LinearOperator};

/// Polynomial tail of total degree 1 or 2 with moment conditions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolynomialTail {
    pub degree: u32,
}

impl PolynomialTail {
    pub fn new(degree: u32) -> Result<Self> {
        if !(1..=2).contains(&degree) {
            return Err(Error::InvalidArgument(format!("tail degree must be 1 or 2, got {degree}")));
        }
        Ok(PolynomialTail { degree })
    }

    /// Number of monomials: 1D `{1, x, x²}`, 2D `{1, x, y, x², xy, y²}` up to the degree.
    pub fn len(&self, dim: usize) -> usize {
        match (dim, self.degree) {
            (1, d) => d as usize + 1,
            (_, 1) => 3,
            _ => 6,
        }
    }

    /// Jet of monomial `j` at `p`.
    pub fn monomial_jet(&self, j: usize, p: &Point, dim: usize) -> FieldJet {
        let (x, y) = (p.x, p.y);
        let (value, grad, second) = if dim == 1 {
            match j {
                0 => (1.0, [0.0, 0.0], [0.0, 0.0]),
                1 => (x, [1.0, 0.0], [0.0, 0.0]),
                _ => (x * x, [2.0 * x, 0.0], [2.0, 0.0]),
            }
        } else {
            match j {
                0 => (1.0, [0.0, 0.0], [0.0, 0.0]),
                1 => (x, [1.0, 0.0], [0.0, 0.0]),
                2 => (y, [0.0, 1.0], [0.0, 0.0]),
                3 => (x * x, [2.0 * x, 0.0], [2.0, 0.0]),
                4 => (x * y, [y, x], [0.0, 0.0]),
                _ => (y * y, [0.0, 2.0 * y], [0.0, 2.0]),
            }
        };
        FieldJet { value, grad, second, dim }
    }
}

#[derive(Debug, Clone)]
pub struct Expansion {
    pub kernel: RadialKernel,
    pub centers: Vec<Point>,
    pub tail: Option<PolynomialTail>,
    pub dim: usize,
}

impl Expansion {
    pub fn new(kernel: RadialKernel, centers: Vec<Point>, tail: Option<PolynomialTail>, dim: usize) -> Self {
        let kernel = kernel.with_dim(dim);
        Expansion { kernel, centers, tail, dim }
    }

    pub fn tail_len(&self) -> usize {
        self.tail.map_or(0, |t| t.len(self.dim))
    }

    /// Number of coefficients (centers plus tail).
    pub fn len(&self) -> usize {
        self.centers.len() + self.tail_len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Jets of every basis function at `x`.
    pub fn basis_jets(&self, x: &Point, order: usize) -> Result<Vec<FieldJet>> {
        let mut out = Vec::with_capacity(self.len());
        for c in &self.centers {
            out.push(kernel_jet(&self.kernel, c, x, self.dim, order)?);
        }
        if let Some(t) = self.tail {
            for j in 0..t.len(self.dim) {
                out.push(t.monomial_jet(j, x, self.dim));
            }
        }
        Ok(out)
    }

    /// `[op b_k](x)` for every basis function `b_k`.
    pub fn row(&self, op: &LinearOperator, x: &EvalPoint) -> Result<Vec<f64>> {
        self.basis_jets(&x.point, op.order())?.iter().map(|j| j.apply(op, x.normal)).collect()
    }

    pub fn field_jet(&self, coeffs: &[f64], x: &Point, order: usize) -> Result<FieldJet> {
        if coeffs.len() != self.len() {
            return Err(Error::InvalidArgument(format!(
                "{} coefficients for an expansion of length {}",
                coeffs.len(),
                self.len()
            )));
        }
        let mut acc = FieldJet { dim: self.dim, ..Default::default() };
        for (j, c) in self.basis_jets(x, order)?.iter().zip(coeffs) {
            acc.scaled_add(j, *c);
        }
        Ok(acc)
    }

    pub fn evaluate(&self, coeffs: &[f64], x: &Point) -> Result<f64> {
        Ok(self.field_jet(coeffs, x, 0)?.value)
    }

    pub fn apply(&self, op: &LinearOperator, coeffs: &[f64], x: &EvalPoint) -> Result<f64> {
        self.field_jet(coeffs, &x.point, op.order())?.apply(op, x.normal)
    }

    /// Moment rows `Σ_k α_k π_j(x_k) = 0`, one per tail monomial.
    pub fn moment_rows(&self) -> Vec<Vec<f64>> {
        let Some(t) = self.tail else { return Vec::new() };
        (0..t.len(self.dim))
            .map(|j| {
                let mut row: Vec<f64> = self.centers.iter().map(|c| t.monomial_jet(j, c, self.dim).value).collect();
                row.resize(self.len(), 0.0);
                row
            })
            .collect()
    }

    /// Interpolation matrix at the centers with moment rows appended; square.
    pub fn interpolation_matrix(&self) -> Result<nalgebra::DMatrix<f64>> {
        let n = self.len();
        let mut m = nalgebra::DMatrix::zeros(n, n);
        let id = LinearOperator::identity();
        for (i, c) in self.centers.iter().enumerate() {
            let row = self.row(&id, &EvalPoint::interior(*c))?;
            for (j, v) in row.into_iter().enumerate() {
                m[(i, j)] = v;
            }
        }
        for (k, row) in self.moment_rows().into_iter().enumerate() {
            for (j, v) in row.into_iter().enumerate() {
                m[(self.centers.len() + k, j)] = v;
            }
        }
        Ok(m)
    }
}

/// An expansion bound to its coefficients.
pub struct ExpandedField<'a> {
    pub expansion: &'a Expansion,
    pub coeffs: &'a [f64],
}

impl DifferentiableField for ExpandedField<'_> {
    fn jet(&self, p: &Point) -> Result<FieldJet> {
        self.expansion.field_jet(self.coeffs, p, 2)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{multiquadric, polyharmonic};

    #[test]
    fn single_center_value() {
        let e = Expansion::new(multiquadric(1.0).unwrap(), vec![Point::on_line(0.3)], None, 1);
        assert_eq!(e.evaluate(&[1.0], &Point::on_line(0.3)).unwrap(), 1.0);
        assert_eq!(e.evaluate(&[0.0], &Point::on_line(0.9)).unwrap(), 0.0);
        assert!(e.evaluate(&[1.0, 2.0], &Point::on_line(0.9)).is_err());
    }

    #[test]
    fn tail_reproduces_quadratic() {
        let centers: Vec<Point> = (0..6).map(|i| Point::on_line(i as f64 / 5.0)).collect();
        let e = Expansion::new(polyharmonic(3).unwrap(), centers, Some(PolynomialTail::new(2).unwrap()), 1);
        assert_eq!(e.len(), 9);
        let mut c = vec![0.0; 9];
        c[8] = 1.0;
        let x = Point::on_line(0.4);
        let j = e.field_jet(&c, &x, 2).unwrap();
        assert!((j.value - 0.16).abs() < 1e-15 && (j.grad[0] - 0.8).abs() < 1e-15 && j.second[0] == 2.0);
        assert_eq!(e.moment_rows().len(), 3);
        assert!(PolynomialTail::new(3).is_err());
    }
}
