//! Computational domains, boundary partitions and staggered collocation sets.
//!
//! Domains are intervals or axis-aligned rectangles. A [`CollocationSet`]
//! carries two interior point sets, `interior_u` and its staggered copy
//! `interior_v`, plus boundary points shared by both fields. The centers of the
//! `u` expansion are `interior_u ∪ boundary`, those of `v` are
//! `interior_v ∪ boundary`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance for "point lies on face" checks.
pub const FACE_TOLERANCE: f64 = 1e-12;

/// Minimum separation tolerance, relative to the domain diameter.
pub const SEPARATION_TOLERANCE_FACTOR: f64 = 1e-8;

/// Separation reported for sets with fewer than two points.
pub const NO_PAIR_SEPARATION: f64 = f64::INFINITY;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    /// Point on the real line, `y = 0`.
    pub const fn on_line(x: f64) -> Self {
        Point { x, y: 0.0 }
    }

    pub fn coord(&self, axis: usize) -> f64 {
        if axis == 0 {
            self.x
        } else {
            self.y
        }
    }

    pub fn distance(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Face {
    XMin,
    XMax,
    YMin,
    YMax,
}

impl Face {
    pub fn axis(self) -> usize {
        match self {
            Face::XMin | Face::XMax => 0,
            Face::YMin | Face::YMax => 1,
        }
    }

    pub fn is_upper(self) -> bool {
        matches!(self, Face::XMax | Face::YMax)
    }

    pub fn name(self) -> &'static str {
        match self {
            Face::XMin => "xmin",
            Face::XMax => "xmax",
            Face::YMin => "ymin",
            Face::YMax => "ymax",
        }
    }

    pub fn parse(name: &str) -> Option<Face> {
        match name {
            "xmin" | "x_min" | "left" => Some(Face::XMin),
            "xmax" | "x_max" | "right" => Some(Face::XMax),
            "ymin" | "y_min" | "bottom" => Some(Face::YMin),
            "ymax" | "y_max" | "top" => Some(Face::YMax),
            _ => None,
        }
    }

    fn unit_normal(self) -> [f64; 2] {
        let sign = if self.is_upper() { 1.0 } else { -1.0 };
        let mut n = [0.0; 2];
        n[self.axis()] = sign;
        n
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DomainKind {
    Interval,
    Rectangle,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Domain {
    kind: DomainKind,
    lower: [f64; 2],
    upper: [f64; 2],
}

impl Domain {
    pub fn interval(a: f64, b: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(Error::InvalidDomain(format!("interval [{a}, {b}]")));
        }
        Ok(Domain { kind: DomainKind::Interval, lower: [a, 0.0], upper: [b, 0.0] })
    }

    pub fn rectangle(x0: f64, x1: f64, y0: f64, y1: f64) -> Result<Self> {
        let ok = [x0, x1, y0, y1].iter().all(|v| v.is_finite()) && x0 < x1 && y0 < y1;
        if !ok {
            return Err(Error::InvalidDomain(format!("rectangle [{x0}, {x1}] x [{y0}, {y1}]")));
        }
        Ok(Domain { kind: DomainKind::Rectangle, lower: [x0, y0], upper: [x1, y1] })
    }

    pub fn unit_interval() -> Self {
        Domain::interval(0.0, 1.0).unwrap()
    }

    pub fn unit_square() -> Self {
        Domain::rectangle(0.0, 1.0, 0.0, 1.0).unwrap()
    }

    pub fn kind(&self) -> DomainKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        match self.kind {
            DomainKind::Interval => 1,
            DomainKind::Rectangle => 2,
        }
    }

    pub fn lower(&self, axis: usize) -> f64 {
        self.lower[axis]
    }

    pub fn upper(&self, axis: usize) -> f64 {
        self.upper[axis]
    }

    pub fn extent(&self, axis: usize) -> f64 {
        self.upper[axis] - self.lower[axis]
    }

    pub fn diameter(&self) -> f64 {
        (0..self.dim()).map(|a| self.extent(a).powi(2)).sum::<f64>().sqrt()
    }

    pub fn faces(&self) -> &'static [Face] {
        match self.kind {
            DomainKind::Interval => &[Face::XMin, Face::XMax],
            DomainKind::Rectangle => &[Face::XMin, Face::XMax, Face::YMin, Face::YMax],
        }
    }

    pub fn has_face(&self, face: Face) -> bool {
        self.faces().contains(&face)
    }

    /// Closed-domain membership with an absolute tolerance.
    pub fn contains(&self, p: &Point, tol: f64) -> bool {
        (0..self.dim()).all(|a| {
            let c = p.coord(a);
            c >= self.lower[a] - tol && c <= self.upper[a] + tol
        }) && (self.dim() == 2 || p.y == 0.0)
    }

    pub fn on_face(&self, p: &Point, face: Face, tol: f64) -> bool {
        if !self.has_face(face) || !self.contains(p, tol) {
            return false;
        }
        let bound = if face.is_upper() { self.upper[face.axis()] } else { self.lower[face.axis()] };
        (p.coord(face.axis()) - bound).abs() <= tol
    }

    /// First face (in declaration order) containing `p`, if any.
    pub fn face_of(&self, p: &Point) -> Option<Face> {
        let tol = FACE_TOLERANCE * self.diameter().max(1.0);
        self.faces().iter().copied().find(|f| self.on_face(p, *f, tol))
    }

    pub fn separation_tolerance(&self) -> f64 {
        SEPARATION_TOLERANCE_FACTOR * self.diameter()
    }
}

/// Unit outward normal of `face` at `point`.
pub fn outward_normal(domain: &Domain, point: &Point, face: Face) -> Result<[f64; 2]> {
    let tol = FACE_TOLERANCE * domain.diameter().max(1.0);
    if !domain.on_face(point, face, tol) {
        return Err(Error::NotOnFace { x: point.x, y: point.y, face });
    }
    Ok(face.unit_normal())
}

/// Assignment of every boundary face to Γ₁ (Dirichlet) or Γ₂ (Neumann).
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryPartition {
    dirichlet: Vec<Face>,
    neumann: Vec<Face>,
}

impl BoundaryPartition {
    pub fn new(domain: &Domain, dirichlet: &[Face], neumann: &[Face]) -> Result<Self> {
        for face in dirichlet.iter().chain(neumann) {
            if !domain.has_face(*face) {
                return Err(Error::InvalidArgument(format!("face {face:?} not on this domain")));
            }
        }
        for face in domain.faces() {
            let count = dirichlet.iter().chain(neumann).filter(|f| *f == face).count();
            if count != 1 {
                return Err(Error::InvalidArgument(format!(
                    "face {face:?} assigned {count} times; every face needs exactly one condition"
                )));
            }
        }
        if dirichlet.is_empty() {
            return Err(Error::InvalidArgument("at least one Dirichlet face is required".into()));
        }
        Ok(BoundaryPartition { dirichlet: dirichlet.to_vec(), neumann: neumann.to_vec() })
    }

    pub fn all_dirichlet(domain: &Domain) -> Self {
        BoundaryPartition { dirichlet: domain.faces().to_vec(), neumann: Vec::new() }
    }

    pub fn dirichlet_faces(&self) -> &[Face] {
        &self.dirichlet
    }

    pub fn neumann_faces(&self) -> &[Face] {
        &self.neumann
    }

    pub fn is_dirichlet(&self, face: Face) -> bool {
        self.dirichlet.contains(&face)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryPoint {
    pub point: Point,
    pub face: Face,
    pub normal: [f64; 2],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum PointStrategy {
    #[default]
    Equispaced,
    Halton,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CollocationSet {
    pub interior_u: Vec<Point>,
    pub interior_v: Vec<Point>,
    pub boundary: Vec<BoundaryPoint>,
    pub dim: usize,
}

impl CollocationSet {
    /// Centers of the `u` expansion: interior_u followed by the boundary points.
    pub fn set_u(&self) -> Vec<Point> {
        self.interior_u.iter().copied().chain(self.boundary.iter().map(|b| b.point)).collect()
    }

    /// Centers of the `v` expansion: interior_v followed by the boundary points.
    pub fn set_v(&self) -> Vec<Point> {
        self.interior_v.iter().copied().chain(self.boundary.iter().map(|b| b.point)).collect()
    }

    /// Number of centers per field.
    pub fn n(&self) -> usize {
        self.interior_u.len() + self.boundary.len()
    }

    /// All distinct row locations: interior_u, interior_v, boundary.
    pub fn row_points(&self) -> Vec<Point> {
        self.interior_u.iter().chain(&self.interior_v).copied().chain(self.boundary.iter().map(|b| b.point)).collect()
    }

    pub fn total(&self) -> usize {
        self.interior_u.len() + self.interior_v.len() + self.boundary.len()
    }
}

/// Radical inverse of `index` in `base` (the Halton coordinate).
pub fn halton(mut index: u64, base: u64) -> f64 {
    let mut result = 0.0;
    let mut f = 1.0 / base as f64;
    while index > 0 {
        result += f * (index % base) as f64;
        index /= base;
        f /= base as f64;
    }
    result
}

/// Generate interior, staggered and boundary points.
///
/// The staggered set shifts every interior point by `stagger_offset` times the
/// local spacing along each axis. A shifted coordinate that would reach the
/// upper bound is placed midway between the original coordinate and the bound.
/// Equispaced 2D layouts need `n_interior` to be a perfect square.
pub fn generate_collocation(
    domain: &Domain,
    partition: &BoundaryPartition,
    n_interior: usize,
    n_boundary: usize,
    strategy: PointStrategy,
    stagger_offset: f64,
) -> Result<CollocationSet> {
    let _ = partition;
    if n_interior < 1 {
        return Err(Error::InvalidArgument("n_interior must be at least 1".into()));
    }
    if !(stagger_offset > 0.0 && stagger_offset < 1.0) {
        return Err(Error::InvalidArgument(format!("stagger_offset {stagger_offset} outside (0, 1)")));
    }
    let dim = domain.dim();
    match dim {
        1 if n_boundary != 2 => {
            return Err(Error::InvalidArgument(format!(
                "an interval has exactly 2 boundary points, got n_boundary = {n_boundary}"
            )))
        }
        2 if n_boundary < 4 => {
            return Err(Error::InvalidArgument(format!("a rectangle needs n_boundary >= 4, got {n_boundary}")))
        }
        _ => {}
    }

    let (interior_u, spacing) = match dim {
        1 => interior_1d(domain, n_interior, strategy),
        _ => interior_2d(domain, n_interior, strategy)?,
    };
    let interior_v = interior_u
        .iter()
        .map(|p| {
            let mut c = [p.x, p.y];
            for (axis, c) in c.iter_mut().enumerate().take(dim) {
                let hi = domain.upper(axis);
                let shifted = *c + stagger_offset * spacing[axis];
                *c = if shifted < hi { shifted } else { 0.5 * (*c + hi) };
            }
            Point::new(c[0], c[1])
        })
        .collect();
    let boundary = boundary_points(domain, n_boundary);

    let set = CollocationSet { interior_u, interior_v, boundary, dim };
    let sep = min_separation(&set);
    let tol = domain.separation_tolerance();
    if sep < tol {
        return Err(Error::SeparationTooSmall { found: sep, tolerance: tol });
    }
    Ok(set)
}

fn interior_1d(domain: &Domain, n: usize, strategy: PointStrategy) -> (Vec<Point>, [f64; 2]) {
    let lo = domain.lower(0);
    let len = domain.extent(0);
    let h = len / (n + 1) as f64;
    let pts = (0..n)
        .map(|i| match strategy {
            PointStrategy::Equispaced => Point::on_line(lo + (i + 1) as f64 * h),
            PointStrategy::Halton => Point::on_line(lo + len * halton(i as u64 + 1, 2)),
        })
        .collect();
    (pts, [h, 0.0])
}

fn interior_2d(domain: &Domain, n: usize, strategy: PointStrategy) -> Result<(Vec<Point>, [f64; 2])> {
    let side = (n as f64).sqrt().ceil() as usize;
    let h = [domain.extent(0) / (side + 1) as f64, domain.extent(1) / (side + 1) as f64];
    let pts = match strategy {
        PointStrategy::Equispaced => {
            if side * side != n {
                return Err(Error::InvalidArgument(format!(
                    "equispaced 2D interior needs a perfect square count, got {n}"
                )));
            }
            let mut pts = Vec::with_capacity(n);
            for j in 0..side {
                for i in 0..side {
                    pts.push(Point::new(
                        domain.lower(0) + (i + 1) as f64 * h[0],
                        domain.lower(1) + (j + 1) as f64 * h[1],
                    ));
                }
            }
            pts
        }
        PointStrategy::Halton => (0..n)
            .map(|i| {
                let k = i as u64 + 1;
                Point::new(
                    domain.lower(0) + domain.extent(0) * halton(k, 2),
                    domain.lower(1) + domain.extent(1) * halton(k, 3),
                )
            })
            .collect(),
    };
    Ok((pts, h))
}

fn boundary_points(domain: &Domain, n_boundary: usize) -> Vec<BoundaryPoint> {
    if domain.dim() == 1 {
        return vec![
            BoundaryPoint {
                point: Point::on_line(domain.lower(0)),
                face: Face::XMin,
                normal: Face::XMin.unit_normal(),
            },
            BoundaryPoint {
                point: Point::on_line(domain.upper(0)),
                face: Face::XMax,
                normal: Face::XMax.unit_normal(),
            },
        ];
    }
    let faces = domain.faces();
    let mut out = Vec::with_capacity(n_boundary);
    for (fi, &face) in faces.iter().enumerate() {
        let m = n_boundary / 4 + usize::from(fi < n_boundary % 4);
        // tangential axis runs along the face, corners are never used
        let t_axis = 1 - face.axis();
        let fixed = if face.is_upper() { domain.upper(face.axis()) } else { domain.lower(face.axis()) };
        for j in 0..m {
            let t = domain.lower(t_axis) + (j + 1) as f64 * domain.extent(t_axis) / (m + 1) as f64;
            let mut c = [0.0; 2];
            c[face.axis()] = fixed;
            c[t_axis] = t;
            out.push(BoundaryPoint { point: Point::new(c[0], c[1]), face, normal: face.unit_normal() });
        }
    }
    out
}

/// Smallest pairwise distance among the row locations of `set`.
pub fn min_separation(set: &CollocationSet) -> f64 {
    min_separation_of(&set.row_points())
}

/// Smallest pairwise distance in a point list; [`NO_PAIR_SEPARATION`] for fewer than two points.
pub fn min_separation_of(points: &[Point]) -> f64 {
    let mut best = NO_PAIR_SEPARATION;
    for (i, a) in points.iter().enumerate() {
        for b in &points[i + 1..] {
            best = best.min(a.distance(b));
        }
    }
    best
}
