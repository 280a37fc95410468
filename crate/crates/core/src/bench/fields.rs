//! Closed-form exact fields with derivatives.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::geometry::Point;
use crate::operators::{DifferentiableField, FieldJet, JetField, ScalarField};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExactField {
    /// `x²`
    Quadratic,
    /// `sin(πx)`
    SinPi,
    /// `x + y`
    LinearSum,
    /// `x² + y²`
    RadialSquare,
    Zero,
}

impl ExactField {
    pub fn name(self) -> &'static str {
        match self {
            ExactField::Quadratic => "quadratic",
            ExactField::SinPi => "sin_pi",
            ExactField::LinearSum => "linear_sum",
            ExactField::RadialSquare => "radial_square",
            ExactField::Zero => "zero",
        }
    }

    pub fn jet_at(self, p: &Point, dim: usize) -> FieldJet {
        let (x, y) = (p.x, p.y);
        let (value, grad, second) = match self {
            ExactField::Quadratic => (x * x, [2.0 * x, 0.0], [2.0, 0.0]),
            ExactField::SinPi => {
                let (s, c) = (PI * x).sin_cos();
                (s, [PI * c, 0.0], [-PI * PI * s, 0.0])
            }
            ExactField::LinearSum => (x + y, [1.0, 1.0], [0.0, 0.0]),
            ExactField::RadialSquare => (x * x + y * y, [2.0 * x, 2.0 * y], [2.0, 2.0]),
            ExactField::Zero => (0.0, [0.0, 0.0], [0.0, 0.0]),
        };
        let mut j = FieldJet { value, grad, second, dim };
        if dim == 1 {
            j.grad[1] = 0.0;
            j.second[1] = 0.0;
        }
        j
    }

    pub fn value(self, p: &Point) -> f64 {
        self.jet_at(p, 2).value
    }

    pub fn scalar_field(self) -> ScalarField {
        ScalarField::new(move |p| self.value(p))
    }

    pub fn jet_field(self, dim: usize) -> JetField {
        JetField::new(move |p| self.jet_at(p, dim))
    }
}

/// An [`ExactField`] bound to a dimension.
#[derive(Debug, Clone, Copy)]
pub struct BoundField {
    pub field: ExactField,
    pub dim: usize,
}

impl DifferentiableField for BoundField {
    fn jet(&self, p: &Point) -> Result<FieldJet> {
        Ok(self.field.jet_at(p, self.dim))
    }
}
