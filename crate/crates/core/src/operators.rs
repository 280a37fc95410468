//! Linear differential operators and their application to radial kernels and fields.

use std::fmt;
use std::ops::{Add, Mul};
use std::str::FromStr;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::geometry::{BoundaryPartition, Domain, Point};
use crate::kernels::RadialKernel;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OpTerm {
    Identity,
    /// `∂^order / ∂x_axis^order`, order 1 or 2.
    Partial {
        axis: usize,
        order: usize,
    },
    Laplacian,
    NormalDerivative,
}

impl OpTerm {
    pub fn order(self) -> usize {
        match self {
            OpTerm::Identity => 0,
            OpTerm::Partial { order, .. } => order,
            OpTerm::Laplacian => 2,
            OpTerm::NormalDerivative => 1,
        }
    }

    fn name(self) -> &'static str {
        match self {
            OpTerm::Identity => "identity",
            OpTerm::Partial { axis: 0, order: 1 } => "dx",
            OpTerm::Partial { axis: 0, order: 2 } => "dxx",
            OpTerm::Partial { axis: 1, order: 1 } => "dy",
            OpTerm::Partial { axis: 1, order: 2 } => "dyy",
            OpTerm::Partial { .. } => "partial",
            OpTerm::Laplacian => "laplacian",
            OpTerm::NormalDerivative => "dn",
        }
    }
}

/// A flat sum `Σ c_i T_i` of catalogue terms.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearOperator {
    terms: Vec<(f64, OpTerm)>,
}

impl LinearOperator {
    fn single(c: f64, t: OpTerm) -> Self {
        LinearOperator { terms: vec![(c, t)] }
    }

    pub fn identity() -> Self {
        Self::single(1.0, OpTerm::Identity)
    }

    /// `γ · identity`.
    pub fn scale(gamma: f64) -> Self {
        Self::single(gamma, OpTerm::Identity)
    }

    pub fn partial(axis: usize, order: usize) -> Self {
        assert!(axis < 2 && (1..=2).contains(&order), "partial derivative out of catalogue");
        Self::single(1.0, OpTerm::Partial { axis, order })
    }

    pub fn laplacian() -> Self {
        Self::single(1.0, OpTerm::Laplacian)
    }

    pub fn normal_derivative() -> Self {
        Self::single(1.0, OpTerm::NormalDerivative)
    }

    /// Build from explicit terms; rejects non-finite coefficients and
    /// derivative orders above 2.
    pub fn from_terms(terms: Vec<(f64, OpTerm)>) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::InvalidArgument("operator needs at least one term".into()));
        }
        for (c, t) in &terms {
            if !c.is_finite() {
                return Err(Error::InvalidArgument(format!("non-finite operator coefficient {c}")));
            }
            if let OpTerm::Partial { axis, order } = t {
                if *axis > 1 || !(1..=2).contains(order) {
                    return Err(Error::InvalidArgument(format!("partial (axis {axis}, order {order}) not supported")));
                }
            }
        }
        Ok(LinearOperator { terms })
    }

    pub fn terms(&self) -> &[(f64, OpTerm)] {
        &self.terms
    }

    pub fn order(&self) -> usize {
        self.terms.iter().map(|(_, t)| t.order()).max().unwrap_or(0)
    }

    pub fn needs_normal(&self) -> bool {
        self.terms.iter().any(|(_, t)| *t == OpTerm::NormalDerivative)
    }

    /// True when every coefficient is zero.
    pub fn is_zero(&self) -> bool {
        self.terms.iter().all(|(c, _)| *c == 0.0)
    }
}

impl Add for LinearOperator {
    type Output = LinearOperator;
    fn add(mut self, rhs: LinearOperator) -> LinearOperator {
        self.terms.extend(rhs.terms);
        self
    }
}

impl Mul<f64> for LinearOperator {
    type Output = LinearOperator;
    fn mul(mut self, rhs: f64) -> LinearOperator {
        for (c, _) in &mut self.terms {
            *c *= rhs;
        }
        self
    }
}

impl fmt::Display for LinearOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (c, t)) in self.terms.iter().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            match (c, t) {
                (c, OpTerm::Identity) if *c != 1.0 => write!(f, "scale({c})")?,
                (c, t) if *c == 1.0 => f.write_str(t.name())?,
                (c, t) => write!(f, "{c}*{}", t.name())?,
            }
        }
        Ok(())
    }
}

impl FromStr for LinearOperator {
    type Err = Error;

    /// Grammar: terms joined by `+` or `-`; a term is `[coef*]name` or `scale(γ)`,
    /// with names `identity`, `dx`, `dxx`, `dy`, `dyy`, `laplacian`, `dn`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = |what: &str| Error::InvalidArgument(format!("cannot parse operator `{s}`: {what}"));
        let mut terms = Vec::new();
        for raw in split_terms(s) {
            let t = raw.trim();
            let (sign, t) = match t.strip_prefix('-') {
                Some(rest) => (-1.0, rest.trim_start()),
                None => (1.0, t.strip_prefix('+').unwrap_or(t).trim_start()),
            };
            if t.is_empty() {
                return Err(bad("empty term"));
            }
            if let Some(inner) = t.strip_prefix("scale(").and_then(|r| r.strip_suffix(')')) {
                let g: f64 = inner.trim().parse().map_err(|_| bad("scale coefficient"))?;
                terms.push((sign * g, OpTerm::Identity));
                continue;
            }
            let (coef, name) = match t.split_once('*') {
                Some((c, n)) => (c.trim().parse::<f64>().map_err(|_| bad("coefficient"))?, n.trim()),
                None => (1.0, t),
            };
            let term = match name {
                "identity" | "id" => OpTerm::Identity,
                "dx" => OpTerm::Partial { axis: 0, order: 1 },
                "dxx" => OpTerm::Partial { axis: 0, order: 2 },
                "dy" => OpTerm::Partial { axis: 1, order: 1 },
                "dyy" => OpTerm::Partial { axis: 1, order: 2 },
                "laplacian" => OpTerm::Laplacian,
                "dn" => OpTerm::NormalDerivative,
                other => return Err(bad(&format!("unknown term `{other}`"))),
            };
            terms.push((sign * coef, term));
        }
        LinearOperator::from_terms(terms)
    }
}

/// Split at top-level `+`/`-`, keeping the sign with the following term. Signs
/// inside parentheses and exponent signs (`1e-3`) do not split.
fn split_terms(s: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    let mut depth = 0usize;
    for ch in s.chars() {
        match ch {
            '(' => depth += 1,
            ')' => depth = depth.saturating_sub(1),
            _ => {}
        }
        let is_sign = (ch == '+' || ch == '-') && depth == 0;
        let body = cur.trim();
        let in_exponent = {
            let mut it = body.chars().rev();
            matches!(it.next(), Some('e' | 'E')) && matches!(it.next(), Some(c) if c.is_ascii_digit() || c == '.')
        };
        if is_sign && !body.is_empty() && body != "-" && body != "+" && !in_exponent {
            out.push(std::mem::take(&mut cur));
        }
        cur.push(ch);
    }
    out.push(cur);
    out
}

/// Value, gradient and pure second partials of a field at one point.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FieldJet {
    pub value: f64,
    pub grad: [f64; 2],
    pub second: [f64; 2],
    pub dim: usize,
}

impl FieldJet {
    pub fn scaled_add(&mut self, other: &FieldJet, s: f64) {
        self.value += s * other.value;
        for a in 0..2 {
            self.grad[a] += s * other.grad[a];
            self.second[a] += s * other.second[a];
        }
    }

    pub fn apply(&self, op: &LinearOperator, normal: Option<[f64; 2]>) -> Result<f64> {
        let mut acc = 0.0;
        for (c, t) in op.terms() {
            let v = match *t {
                OpTerm::Identity => self.value,
                OpTerm::Partial { axis, order } => {
                    if axis >= self.dim {
                        return Err(Error::InvalidArgument(format!("axis {axis} in a {}D problem", self.dim)));
                    }
                    if order == 1 {
                        self.grad[axis]
                    } else {
                        self.second[axis]
                    }
                }
                OpTerm::Laplacian => self.second[..self.dim].iter().sum(),
                OpTerm::NormalDerivative => {
                    let n = normal.ok_or_else(|| {
                        Error::InvalidArgument("normal derivative at a point without a normal".into())
                    })?;
                    (0..self.dim).map(|a| n[a] * self.grad[a]).sum()
                }
            };
            acc += c * v;
        }
        Ok(acc)
    }
}

/// A point with the outward normal attached when it lies on the boundary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalPoint {
    pub point: Point,
    pub normal: Option<[f64; 2]>,
}

impl EvalPoint {
    pub fn interior(point: Point) -> Self {
        EvalPoint { point, normal: None }
    }

    pub fn boundary(point: Point, normal: [f64; 2]) -> Self {
        EvalPoint { point, normal: Some(normal) }
    }
}

impl From<Point> for EvalPoint {
    fn from(point: Point) -> Self {
        EvalPoint::interior(point)
    }
}

/// A shareable scalar field `Ω → ℝ`.
#[derive(Clone)]
pub struct ScalarField(Arc<dyn Fn(&Point) -> f64 + Send + Sync>);

impl ScalarField {
    pub fn new(f: impl Fn(&Point) -> f64 + Send + Sync + 'static) -> Self {
        ScalarField(Arc::new(f))
    }

    pub fn constant(c: f64) -> Self {
        ScalarField::new(move |_| c)
    }

    pub fn zero() -> Self {
        ScalarField::constant(0.0)
    }

    pub fn eval(&self, p: &Point) -> f64 {
        (self.0)(p)
    }
}

impl fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("ScalarField(..)")
    }
}

/// A field that can report its derivatives up to second order.
pub trait DifferentiableField {
    fn jet(&self, p: &Point) -> Result<FieldJet>;
}

/// Closure-backed [`DifferentiableField`].
#[derive(Clone)]
pub struct JetField(Arc<dyn Fn(&Point) -> FieldJet + Send + Sync>);

impl JetField {
    pub fn new(f: impl Fn(&Point) -> FieldJet + Send + Sync + 'static) -> Self {
        JetField(Arc::new(f))
    }
}

impl DifferentiableField for JetField {
    fn jet(&self, p: &Point) -> Result<FieldJet> {
        Ok((self.0)(p))
    }
}

/// Derivatives of `x ↦ φ(‖x − center‖)` up to `order` (≤ 2).
///
/// The gradient is `φ' e` and the pure second partials are
/// `φ'' e_i² + (φ'/r)(1 − e_i²)`. At `r = 0` derivatives need `φ'(0) = 0`;
/// the gradient is then 0 and every pure second partial equals `φ''(0)`.
pub fn kernel_jet(kernel: &RadialKernel, center: &Point, x: &Point, dim: usize, order: usize) -> Result<FieldJet> {
    let dx = [x.x - center.x, if dim > 1 { x.y - center.y } else { 0.0 }];
    let r = dx[0].hypot(dx[1]);
    let d = kernel.radial_derivatives_from(r, center, order)?;
    let mut jet = FieldJet { value: d[0], dim, ..Default::default() };
    if order == 0 {
        return Ok(jet);
    }
    if r == 0.0 {
        if d[1].abs() > 1e-13 * d[0].abs().max(1.0) {
            return Err(Error::SingularAtOrigin { order: 1 });
        }
        if order >= 2 {
            jet.second = [d[2], if dim > 1 { d[2] } else { 0.0 }];
        }
        return Ok(jet);
    }
    let e = [dx[0] / r, dx[1] / r];
    for (a, &ea) in e.iter().enumerate().take(dim) {
        jet.grad[a] = d[1] * ea;
        if order >= 2 {
            jet.second[a] = if dim == 1 { d[2] } else { d[2] * ea * ea + d[1] / r * (1.0 - ea * ea) };
        }
    }
    Ok(jet)
}

/// `(op φ)(x)` for the kernel centered at `center`, in the kernel's dimension.
pub fn apply_to_kernel(op: &LinearOperator, kernel: &RadialKernel, center: &Point, x: &EvalPoint) -> Result<f64> {
    kernel_jet(kernel, center, &x.point, kernel.dim, op.order())?.apply(op, x.normal)
}

/// `(p u)(x) · (q u)(x)`.
pub fn apply_product_to_field(
    p: &LinearOperator,
    q: &LinearOperator,
    u: &dyn DifferentiableField,
    x: &EvalPoint,
) -> Result<f64> {
    let j = u.jet(&x.point)?;
    Ok(j.apply(p, x.normal)? * j.apply(q, x.normal)?)
}

/// `p(u) q(u) + R(u) = f` in Ω, `u = ū` on Γ₁, `∂u/∂n = q̄` on Γ₂.
#[derive(Debug, Clone)]
pub struct ProblemSpec {
    pub p: LinearOperator,
    pub q: LinearOperator,
    pub r: LinearOperator,
    pub f: ScalarField,
    pub dirichlet: ScalarField,
    pub neumann: ScalarField,
    pub domain: Domain,
    pub partition: BoundaryPartition,
}

impl ProblemSpec {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        p: LinearOperator,
        q: LinearOperator,
        r: LinearOperator,
        f: ScalarField,
        dirichlet: ScalarField,
        neumann: ScalarField,
        domain: Domain,
        partition: BoundaryPartition,
    ) -> Result<Self> {
        if r.order() == 0 || r.is_zero() {
            return Err(Error::InvalidArgument(format!("R = `{r}` must have positive differential order")));
        }
        for op in [&p, &q, &r] {
            if op.needs_normal() {
                return Err(Error::InvalidArgument(format!("`{op}`: normal derivatives belong to boundary rows")));
            }
            for (_, t) in op.terms() {
                if let OpTerm::Partial { axis, .. } = t {
                    if *axis >= domain.dim() {
                        return Err(Error::InvalidArgument(format!("`{op}` uses axis {axis} in {}D", domain.dim())));
                    }
                }
            }
        }
        Ok(ProblemSpec { p, q, r, f, dirichlet, neumann, domain, partition })
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }
}
