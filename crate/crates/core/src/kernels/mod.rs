//! Radial kernel families.
//!
//! Classical RBFs, the Laplace fundamental-solution catalogue and the kernels
//! built from it: augmented kernels `r^(2m) w*`, high-order kernels, shape
//! parameter kernels `w*(sqrt(r^2 + c^2))`, operator products for the `v`
//! field and the source-weighted single-RBF forms used by the Newton baseline.

pub mod expr;
pub mod jet;
pub mod logpoly;
pub mod profile;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::operators::{LinearOperator, OpTerm, ProblemSpec, ScalarField};
use expr::Expr;
use logpoly::LogPoly;
pub use profile::Profile;

/// Highest radial derivative order the catalogue promises.
pub const MAX_DERIVATIVE_ORDER: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelFamily {
    Multiquadric,
    InverseMultiquadric,
    Gaussian,
    Polyharmonic,
    ThinPlateSpline,
    FundamentalSolution,
    Eak,
    Hsk,
    Spk,
    ProductPsiV,
    ComposedPsiV,
}

impl KernelFamily {
    pub const ALL: [KernelFamily; 11] = [
        KernelFamily::Multiquadric,
        KernelFamily::InverseMultiquadric,
        KernelFamily::Gaussian,
        KernelFamily::Polyharmonic,
        KernelFamily::ThinPlateSpline,
        KernelFamily::FundamentalSolution,
        KernelFamily::Eak,
        KernelFamily::Hsk,
        KernelFamily::Spk,
        KernelFamily::ProductPsiV,
        KernelFamily::ComposedPsiV,
    ];

    pub fn name(self) -> &'static str {
        match self {
            KernelFamily::Multiquadric => "multiquadric",
            KernelFamily::InverseMultiquadric => "inverse_multiquadric",
            KernelFamily::Gaussian => "gaussian",
            KernelFamily::Polyharmonic => "polyharmonic",
            KernelFamily::ThinPlateSpline => "thin_plate_spline",
            KernelFamily::FundamentalSolution => "fundamental_solution",
            KernelFamily::Eak => "eak",
            KernelFamily::Hsk => "hsk",
            KernelFamily::Spk => "spk",
            KernelFamily::ProductPsiV => "product_psi_v",
            KernelFamily::ComposedPsiV => "composed_psi_v",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FundamentalKind {
    #[serde(rename = "laplace1d")]
    Laplace1D,
    #[serde(rename = "laplace2d")]
    Laplace2D,
    #[serde(rename = "laplace3d")]
    Laplace3D,
}

impl FundamentalKind {
    pub fn name(self) -> &'static str {
        match self {
            FundamentalKind::Laplace1D => "laplace1d",
            FundamentalKind::Laplace2D => "laplace2d",
            FundamentalKind::Laplace3D => "laplace3d",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "laplace1d" => Some(FundamentalKind::Laplace1D),
            "laplace2d" => Some(FundamentalKind::Laplace2D),
            "laplace3d" => Some(FundamentalKind::Laplace3D),
            _ => None,
        }
    }

    pub fn natural_dim(self) -> usize {
        match self {
            FundamentalKind::Laplace1D => 1,
            FundamentalKind::Laplace2D => 2,
            FundamentalKind::Laplace3D => 3,
        }
    }

    /// Catalogue entry for a single-term Laplace-type operator in `dim`.
    pub fn for_operator(op: &LinearOperator, dim: usize) -> Result<Self> {
        let miss = || Error::CatalogueMiss(op.to_string());
        let [(coef, term)] = op.terms() else {
            return Err(miss());
        };
        if *coef == 0.0 {
            return Err(miss());
        }
        match (term, dim) {
            (OpTerm::Laplacian, 1) | (OpTerm::Partial { axis: 0, order: 2 }, 1) => Ok(FundamentalKind::Laplace1D),
            (OpTerm::Laplacian, 2) => Ok(FundamentalKind::Laplace2D),
            (OpTerm::Laplacian, 3) => Ok(FundamentalKind::Laplace3D),
            _ => Err(miss()),
        }
    }

    /// Like [`for_operator`](Self::for_operator), but operators without a radial
    /// fundamental solution give `None` (their product factor is 1).
    pub fn factor_for(op: &LinearOperator, dim: usize) -> Option<Self> {
        Self::for_operator(op, dim).ok()
    }
}

/// One catalogue entry: the order-`k` iterate of a Laplace fundamental solution.
#[derive(Debug, Clone, PartialEq)]
pub struct FundamentalSolution {
    pub kind: FundamentalKind,
    pub order: u32,
    pub profile: LogPoly,
    pub singular_at_origin: bool,
}

impl FundamentalSolution {
    /// Order 1 keeps the physical constants (`r/2`, `ln r / 2π`, `1 / 4πr`);
    /// higher orders drop them (`r^(2k−1)`, `r^(2k−2) ln r`, `r^(2k−3)`).
    pub fn new(kind: FundamentalKind, order: u32) -> Result<Self> {
        if order < 1 {
            return Err(Error::InvalidArgument("fundamental solution order must be >= 1".into()));
        }
        let k = order as i32;
        let pi = std::f64::consts::PI;
        let profile = match (kind, order) {
            (FundamentalKind::Laplace1D, 1) => LogPoly::term(0.5, 1, 0),
            (FundamentalKind::Laplace1D, _) => LogPoly::term(1.0, 2 * k - 1, 0),
            (FundamentalKind::Laplace2D, 1) => LogPoly::term(1.0 / (2.0 * pi), 0, 1),
            (FundamentalKind::Laplace2D, _) => LogPoly::term(1.0, 2 * k - 2, 1),
            (FundamentalKind::Laplace3D, 1) => LogPoly::term(1.0 / (4.0 * pi), -1, 0),
            (FundamentalKind::Laplace3D, _) => LogPoly::term(1.0, 2 * k - 3, 0),
        };
        let singular_at_origin = profile.limit_at_zero().is_none();
        Ok(FundamentalSolution { kind, order, profile, singular_at_origin })
    }
}

/// Construction parameters, kept for labelling and reporting.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct KernelParams {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub order: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base: Option<FundamentalKind>,
}

#[derive(Clone)]
struct SourceTerm {
    f: ScalarField,
    profile: Profile,
}

/// A radial kernel `φ(r)`, optionally with a source-weighted part
/// `f(x_k) · B(r)` that depends on the center `x_k`.
#[derive(Clone)]
pub struct RadialKernel {
    pub family: KernelFamily,
    pub params: KernelParams,
    pub dim: usize,
    pub smooth_at_origin: bool,
    pub max_derivative_order: usize,
    profile: Profile,
    source: Option<SourceTerm>,
    label: String,
}

impl fmt::Debug for RadialKernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RadialKernel")
            .field("label", &self.label)
            .field("family", &self.family)
            .field("dim", &self.dim)
            .field("smooth_at_origin", &self.smooth_at_origin)
            .field("max_derivative_order", &self.max_derivative_order)
            .finish()
    }
}

/// Finite value with zero slope at `r = 0`, so the kernel is at least C¹ in space.
fn is_smooth(profile: &Profile) -> bool {
    match profile.derivatives(0.0, 1) {
        Ok(d) => d[1].abs() <= 1e-13 * d[0].abs().max(1.0),
        Err(_) => false,
    }
}

impl RadialKernel {
    fn build(family: KernelFamily, params: KernelParams, dim: usize, profile: Profile, label: String) -> Self {
        let smooth_at_origin = is_smooth(&profile);
        RadialKernel {
            family,
            params,
            dim,
            smooth_at_origin,
            max_derivative_order: MAX_DERIVATIVE_ORDER,
            profile,
            source: None,
            label,
        }
    }

    /// Build a kernel from an arbitrary profile.
    pub fn from_profile(family: KernelFamily, profile: Profile, dim: usize, label: impl Into<String>) -> Self {
        Self::build(family, KernelParams::default(), dim, profile, label.into())
    }

    pub fn with_dim(mut self, dim: usize) -> Self {
        self.dim = dim;
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn profile(&self) -> &Profile {
        &self.profile
    }

    pub fn is_source_weighted(&self) -> bool {
        self.source.is_some()
    }

    fn check_order(&self, max_order: usize) -> Result<()> {
        if max_order > self.max_derivative_order {
            return Err(Error::DerivativeOrder { requested: max_order, available: self.max_derivative_order });
        }
        Ok(())
    }

    /// `φ(r), φ'(r), …, φ^(max_order)(r)`.
    pub fn radial_derivatives(&self, r: f64, max_order: usize) -> Result<Vec<f64>> {
        if self.source.is_some() {
            return Err(Error::SourceRequired);
        }
        self.check_order(max_order)?;
        self.profile.derivatives(r, max_order)
    }

    /// As [`radial_derivatives`](Self::radial_derivatives), with the center
    /// supplied for source-weighted kernels (ignored otherwise).
    pub fn radial_derivatives_from(&self, r: f64, source: &Point, max_order: usize) -> Result<Vec<f64>> {
        self.check_order(max_order)?;
        let mut d = self.profile.derivatives(r, max_order)?;
        if let Some(s) = &self.source {
            let w = s.f.eval(source);
            let b = s.profile.derivatives(r, max_order)?;
            for (x, y) in d.iter_mut().zip(b) {
                *x += w * y;
            }
        }
        Ok(d)
    }

    pub fn value(&self, r: f64) -> Result<f64> {
        Ok(self.radial_derivatives(r, 0)?[0])
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("{name} must be positive and finite, got {v}")))
    }
}

/// `sqrt(r^2 + c^2)`.
pub fn multiquadric(c: f64) -> Result<RadialKernel> {
    positive("shape parameter c", c)?;
    let params = KernelParams { c: Some(c), ..Default::default() };
    Ok(RadialKernel::build(
        KernelFamily::Multiquadric,
        params,
        2,
        Profile::Smooth(Expr::Shifted(c)),
        format!("mq(c={c})"),
    ))
}

/// `1 / sqrt(r^2 + c^2)`.
pub fn inverse_multiquadric(c: f64) -> Result<RadialKernel> {
    positive("shape parameter c", c)?;
    let params = KernelParams { c: Some(c), ..Default::default() };
    Ok(RadialKernel::build(
        KernelFamily::InverseMultiquadric,
        params,
        2,
        Profile::Smooth(Expr::Shifted(c).pow(-1.0)),
        format!("imq(c={c})"),
    ))
}

/// `exp(−ε² r²)`.
pub fn gaussian(epsilon: f64) -> Result<RadialKernel> {
    positive("epsilon", epsilon)?;
    let params = KernelParams { epsilon: Some(epsilon), ..Default::default() };
    let e = Expr::Const(-epsilon * epsilon).times(Expr::R.pow(2.0)).exp();
    Ok(RadialKernel::build(KernelFamily::Gaussian, params, 2, Profile::Smooth(e), format!("gaussian(eps={epsilon})")))
}

/// `r^k`.
pub fn polyharmonic(k: u32) -> Result<RadialKernel> {
    if k < 1 {
        return Err(Error::InvalidArgument("polyharmonic exponent must be >= 1".into()));
    }
    let params = KernelParams { k: Some(k), ..Default::default() };
    Ok(RadialKernel::build(
        KernelFamily::Polyharmonic,
        params,
        2,
        Profile::Log(LogPoly::term(1.0, k as i32, 0)),
        format!("r^{k}"),
    ))
}

/// `r^(2k) ln r`.
pub fn thin_plate_spline(k: u32) -> Result<RadialKernel> {
    if k < 1 {
        return Err(Error::InvalidArgument("thin-plate exponent must be >= 1".into()));
    }
    let params = KernelParams { k: Some(k), ..Default::default() };
    Ok(RadialKernel::build(
        KernelFamily::ThinPlateSpline,
        params,
        2,
        Profile::Log(LogPoly::term(1.0, 2 * k as i32, 1)),
        format!("tps(k={k})"),
    ))
}

fn default_dim(kind: FundamentalKind) -> usize {
    kind.natural_dim().min(2)
}

/// Catalogue lookup as a kernel. The kernel dimension defaults to the
/// operator's own (3D entries are tagged 2; use [`RadialKernel::with_dim`]).
pub fn fundamental_solution(kind: FundamentalKind, order: u32) -> Result<RadialKernel> {
    let fs = FundamentalSolution::new(kind, order)?;
    let params = KernelParams { order: Some(order), base: Some(kind), ..Default::default() };
    Ok(RadialKernel::build(
        KernelFamily::FundamentalSolution,
        params,
        default_dim(kind),
        Profile::Log(fs.profile),
        format!("w*_{}^{order}", kind.name()),
    ))
}

/// `f · r^(2m) · w*(r)`.
pub fn eak_kernel(f_at_source: f64, m: u32, base: &FundamentalSolution) -> Result<RadialKernel> {
    if base.singular_at_origin && m == 0 {
        return Err(Error::InsufficientAugmentation { given: 0, required: base.profile.required_augmentation() });
    }
    if !f_at_source.is_finite() {
        return Err(Error::InvalidArgument("f_at_source must be finite".into()));
    }
    let params = KernelParams {
        m: Some(m),
        f: Some(f_at_source),
        base: Some(base.kind),
        order: Some(base.order),
        ..Default::default()
    };
    let profile = Profile::Log(base.profile.shift(2 * m as i32).scale(f_at_source));
    Ok(RadialKernel::build(
        KernelFamily::Eak,
        params,
        default_dim(base.kind),
        profile,
        format!("eak(f={f_at_source},m={m},{})", base.kind.name()),
    ))
}

/// `r^(2m) · w*(r)`.
pub fn psi_u_kernel(m: u32, base: &FundamentalSolution) -> Result<RadialKernel> {
    let mut k = eak_kernel(1.0, m, base)?;
    k.params.f = None;
    k.label = format!("psi_u(m={m},{})", base.kind.name());
    Ok(k)
}

fn factor(fs: Option<&FundamentalSolution>) -> LogPoly {
    fs.map_or_else(|| LogPoly::constant(1.0), |f| f.profile.clone())
}

/// `r^(2n) · w*_R · w*_p · w*_q`; a `None` factor stands for an operator with no
/// radial fundamental solution and contributes 1.
pub fn psi_v_product(
    n: u32,
    w_r: &FundamentalSolution,
    w_p: Option<&FundamentalSolution>,
    w_q: Option<&FundamentalSolution>,
) -> Result<RadialKernel> {
    let product = w_r.profile.mul(&factor(w_p)).mul(&factor(w_q));
    let required = product.required_augmentation();
    if n < required {
        return Err(Error::InsufficientAugmentation { given: n, required });
    }
    let params = KernelParams { n: Some(n), base: Some(w_r.kind), ..Default::default() };
    let name = |f: Option<&FundamentalSolution>| f.map_or("1", |f| f.kind.name());
    Ok(RadialKernel::build(
        KernelFamily::ProductPsiV,
        params,
        default_dim(w_r.kind),
        Profile::Log(product.shift(2 * n as i32)),
        format!("psi_v(n={n},{}*{}*{})", w_r.kind.name(), name(w_p), name(w_q)),
    ))
}

/// High-order kernels: `ψ_u = w*_R` of order `m`, `ψ_v` the product of the
/// order-`n` iterates of `w*_R`, `w*_p`, `w*_q`.
pub fn hsk_kernels(
    m: u32,
    n: u32,
    w_r: FundamentalKind,
    w_p: Option<FundamentalKind>,
    w_q: Option<FundamentalKind>,
) -> Result<(RadialKernel, RadialKernel)> {
    if m < 1 || n < 1 {
        return Err(Error::InvalidArgument(format!("hsk orders must be >= 1, got m = {m}, n = {n}")));
    }
    let u = FundamentalSolution::new(w_r, m)?;
    let fac = |k: Option<FundamentalKind>| -> Result<LogPoly> {
        Ok(match k {
            Some(k) => FundamentalSolution::new(k, n)?.profile,
            None => LogPoly::constant(1.0),
        })
    };
    let v = FundamentalSolution::new(w_r, n)?.profile.mul(&fac(w_p)?).mul(&fac(w_q)?);
    let dim = default_dim(w_r);
    let pu = KernelParams { m: Some(m), base: Some(w_r), ..Default::default() };
    let pv = KernelParams { n: Some(n), base: Some(w_r), ..Default::default() };
    Ok((
        RadialKernel::build(
            KernelFamily::Hsk,
            pu,
            dim,
            Profile::Log(u.profile),
            format!("hsk_u(m={m},{})", w_r.name()),
        ),
        RadialKernel::build(KernelFamily::Hsk, pv, dim, Profile::Log(v), format!("hsk_v(n={n},{})", w_r.name())),
    ))
}

/// Shape-parameter kernels: the order-1 fundamental solutions evaluated at
/// `sqrt(r^2 + c^2)`.
pub fn spk_kernels(
    c: f64,
    w_r: FundamentalKind,
    w_p: Option<FundamentalKind>,
    w_q: Option<FundamentalKind>,
) -> Result<(RadialKernel, RadialKernel)> {
    positive("shape parameter c", c)?;
    let base = |k: FundamentalKind| -> Result<LogPoly> { Ok(FundamentalSolution::new(k, 1)?.profile) };
    let u = base(w_r)?;
    let mut v = Profile::shifted(&u, c);
    for k in [w_p, w_q].into_iter().flatten() {
        v = v.mul(&Profile::shifted(&base(k)?, c));
    }
    let dim = default_dim(w_r);
    let params = KernelParams { c: Some(c), base: Some(w_r), ..Default::default() };
    Ok((
        RadialKernel::build(
            KernelFamily::Spk,
            params.clone(),
            dim,
            Profile::shifted(&u, c),
            format!("spk_u(c={c},{})", w_r.name()),
        ),
        RadialKernel::build(KernelFamily::Spk, params, dim, v, format!("spk_v(c={c},{})", w_r.name())),
    ))
}

/// `r^(2s) · (p ψ_u)(r) · (q ψ_u)(r)` with `p`, `q` applied radially.
pub fn psi_v_composed(s: u32, p: &LinearOperator, q: &LinearOperator, psi_u: &RadialKernel) -> Result<RadialKernel> {
    if psi_u.is_source_weighted() {
        return Err(Error::InvalidArgument("composed kernels need a plain psi_u".into()));
    }
    let need = p.order().max(q.order());
    if need > psi_u.max_derivative_order {
        return Err(Error::DerivativeOrder { requested: need, available: psi_u.max_derivative_order });
    }
    let pp = psi_u.profile.apply_radial(p, psi_u.dim)?;
    let qp = psi_u.profile.apply_radial(q, psi_u.dim)?;
    let profile = pp.mul(&qp).augment(s);
    let mut k = RadialKernel::build(
        KernelFamily::ComposedPsiV,
        KernelParams { s: Some(s), ..Default::default() },
        psi_u.dim,
        profile,
        format!("composed(s={s},p={p},q={q},{})", psi_u.label),
    );
    k.max_derivative_order = psi_u.max_derivative_order - need;
    Ok(k)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SingleRbfStyle {
    Eak,
    Hsk,
    Spk,
}

/// Source-weighted single kernels `[−p(w) q(w) + f(x_k)] · B(r)`:
/// EAK uses `w = w*`, `B = r^(2m) w*`; HSK uses `w = B = w*` of order `m`;
/// SPK uses `w = B = w*(sqrt(r^2 + c^2))`.
pub fn single_rbf(style: SingleRbfStyle, problem: &ProblemSpec, params: &KernelParams) -> Result<RadialKernel> {
    let dim = problem.domain.dim();
    let kind = FundamentalKind::for_operator(&problem.r, dim)?;
    let (w, b, family) = match style {
        SingleRbfStyle::Eak => {
            let m = params.m.unwrap_or(1);
            let fs = FundamentalSolution::new(kind, 1)?;
            if fs.singular_at_origin && m == 0 {
                return Err(Error::InsufficientAugmentation { given: 0, required: fs.profile.required_augmentation() });
            }
            let w = Profile::Log(fs.profile);
            let b = w.augment(m);
            (w, b, KernelFamily::Eak)
        }
        SingleRbfStyle::Hsk => {
            let m = params.m.unwrap_or(2);
            let w = Profile::Log(FundamentalSolution::new(kind, m.max(1))?.profile);
            (w.clone(), w, KernelFamily::Hsk)
        }
        SingleRbfStyle::Spk => {
            let c = params.c.unwrap_or(1.0);
            positive("shape parameter c", c)?;
            let w = Profile::shifted(&FundamentalSolution::new(kind, 1)?.profile, c);
            (w.clone(), w, KernelFamily::Spk)
        }
    };
    let nonlinear = w.apply_radial(&problem.p, dim)?.mul(&w.apply_radial(&problem.q, dim)?).scale(-1.0);
    let main = nonlinear.mul(&b);
    let mut params = params.clone();
    params.base = Some(kind);
    let smooth = is_smooth(&main) && is_smooth(&b);
    Ok(RadialKernel {
        family,
        params,
        dim,
        smooth_at_origin: smooth,
        max_derivative_order: MAX_DERIVATIVE_ORDER,
        profile: main,
        source: Some(SourceTerm { f: problem.f.clone(), profile: b }),
        label: format!("single_{}({})", family.name(), kind.name()),
    })
}
