//! TOML run configuration.

use serde::{Deserialize, Serialize};

use super::fields::ExactField;
use super::manufactured::{benchmark, manufacture, BenchmarkCase, ManufacturedCase};
use super::sweep::{SolverSpec, SweepSettings};
use crate::dlm::{ModeKind, SolveMode};
use crate::error::{Error, Result};
use crate::expansion::PolynomialTail;
use crate::geometry::{halton, BoundaryPartition, Domain, Face, Point, PointStrategy};
use crate::kernels::{
    eak_kernel, fundamental_solution, gaussian, hsk_kernels, inverse_multiquadric, multiquadric, polyharmonic,
    psi_u_kernel, psi_v_composed, psi_v_product, single_rbf, spk_kernels, thin_plate_spline, FundamentalKind,
    FundamentalSolution, KernelParams, RadialKernel, SingleRbfStyle,
};
use crate::newton::{Damping, NewtonConfig, Unknowns};
use crate::operators::{LinearOperator, ProblemSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SolverKind {
    #[default]
    Dlm,
    Newton,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum WallTime {
    /// Factorization and solve (DLM) or the iteration loop (Newton).
    #[default]
    Solve,
    /// Including assembly.
    Total,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum VBoundary {
    #[default]
    Exact,
    GoverningEquation,
}

/// Kernel selection: a family name plus named parameters.
///
/// Families: `multiquadric`, `inverse_multiquadric`, `gaussian`, `polyharmonic`,
/// `thin_plate_spline`, `fundamental_solution`, `eak`, `psi_u`,
/// `product_psi_v`, `hsk_u`, `hsk_v`, `spk_u`, `spk_v`, `composed_psi_v`,
/// `single_eak`, `single_hsk`, `single_spk`. A missing `base` defaults to the
/// catalogue entry of the problem's `R`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelSpec {
    pub family: String,
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
    /// Inner `ψ_u` for `composed_psi_v`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inner: Option<Box<KernelSpec>>,
}

/// Family names accepted by [`KernelSpec::build`] (aliases excluded).
pub const FAMILY_NAMES: [&str; 17] = [
    "multiquadric",
    "inverse_multiquadric",
    "gaussian",
    "polyharmonic",
    "thin_plate_spline",
    "fundamental_solution",
    "eak",
    "psi_u",
    "product_psi_v",
    "hsk_u",
    "hsk_v",
    "spk_u",
    "spk_v",
    "composed_psi_v",
    "single_eak",
    "single_hsk",
    "single_spk",
];

impl KernelSpec {
    pub fn family(name: &str) -> Self {
        KernelSpec {
            family: name.to_string(),
            c: None,
            epsilon: None,
            k: None,
            m: None,
            n: None,
            s: None,
            order: None,
            f: None,
            base: None,
            inner: None,
        }
    }

    /// Parse a single kernel table, e.g. `family = "multiquadric"` and `c = 1.0`.
    pub fn from_toml(text: &str) -> Result<Self> {
        let spec: KernelSpec = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        spec.check_names()?;
        Ok(spec)
    }

    /// Reject unknown family names, including nested ones.
    pub fn check_names(&self) -> Result<()> {
        let known =
            FAMILY_NAMES.contains(&self.family.as_str()) || matches!(self.family.as_str(), "mq" | "imq" | "tps");
        if !known {
            return Err(Error::Config(format!("unknown kernel family `{}`", self.family)));
        }
        match &self.inner {
            Some(i) => i.check_names(),
            None => Ok(()),
        }
    }

    pub fn uses_c(&self) -> bool {
        matches!(
            self.family.as_str(),
            "multiquadric" | "mq" | "inverse_multiquadric" | "imq" | "spk_u" | "spk_v" | "single_spk"
        )
    }

    /// Build the kernel; `problem` supplies defaults for catalogue lookups and the
    /// operators used by product, composed and single-RBF families.
    pub fn build(&self, problem: &ProblemSpec) -> Result<RadialKernel> {
        let dim = problem.dim();
        let base = || -> Result<FundamentalKind> {
            match self.base {
                Some(b) => Ok(b),
                None => FundamentalKind::for_operator(&problem.r, dim),
            }
        };
        let fac_p = FundamentalKind::factor_for(&problem.p, dim);
        let fac_q = FundamentalKind::factor_for(&problem.q, dim);
        let kernel = match self.family.as_str() {
            "multiquadric" | "mq" => multiquadric(self.c.unwrap_or(1.0))?,
            "inverse_multiquadric" | "imq" => inverse_multiquadric(self.c.unwrap_or(1.0))?,
            "gaussian" => gaussian(self.epsilon.unwrap_or(1.0))?,
            "polyharmonic" => polyharmonic(self.k.unwrap_or(3))?,
            "thin_plate_spline" | "tps" => thin_plate_spline(self.k.unwrap_or(1))?,
            "fundamental_solution" => fundamental_solution(base()?, self.order.unwrap_or(1))?,
            "eak" => eak_kernel(self.f.unwrap_or(1.0), self.m.unwrap_or(1), &FundamentalSolution::new(base()?, 1)?)?,
            "psi_u" => psi_u_kernel(self.m.unwrap_or(1), &FundamentalSolution::new(base()?, 1)?)?,
            "product_psi_v" => {
                let w_r = FundamentalSolution::new(base()?, 1)?;
                let w_p = fac_p.map(|k| FundamentalSolution::new(k, 1)).transpose()?;
                let w_q = fac_q.map(|k| FundamentalSolution::new(k, 1)).transpose()?;
                psi_v_product(self.n.unwrap_or(0), &w_r, w_p.as_ref(), w_q.as_ref())?
            }
            "hsk_u" => hsk_kernels(self.m.unwrap_or(2), self.n.unwrap_or(1), base()?, fac_p, fac_q)?.0,
            "hsk_v" => hsk_kernels(self.m.unwrap_or(2), self.n.unwrap_or(1), base()?, fac_p, fac_q)?.1,
            "spk_u" => spk_kernels(self.c.unwrap_or(1.0), base()?, fac_p, fac_q)?.0,
            "spk_v" => spk_kernels(self.c.unwrap_or(1.0), base()?, fac_p, fac_q)?.1,
            "composed_psi_v" => {
                let inner = self
                    .inner
                    .as_ref()
                    .ok_or_else(|| Error::Config("composed_psi_v needs an `inner` kernel".into()))?;
                let psi_u = inner.build(problem)?.with_dim(dim);
                psi_v_composed(self.s.unwrap_or(0), &problem.p, &problem.q, &psi_u)?
            }
            "single_eak" | "single_hsk" | "single_spk" => {
                let style = match self.family.as_str() {
                    "single_eak" => SingleRbfStyle::Eak,
                    "single_hsk" => SingleRbfStyle::Hsk,
                    _ => SingleRbfStyle::Spk,
                };
                let params = KernelParams { c: self.c, m: self.m, ..Default::default() };
                single_rbf(style, problem, &params)?
            }
            other => return Err(Error::Config(format!("unknown kernel family `{other}`"))),
        };
        Ok(kernel.with_dim(dim))
    }
}

/// A custom problem manufactured from a named exact field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    /// `[a, b]` for an interval, `[x0, x1, y0, y1]` for a rectangle.
    pub domain: Vec<f64>,
    pub p: String,
    pub q: String,
    pub r: String,
    pub exact: ExactField,
    pub dirichlet: Vec<String>,
    #[serde(default)]
    pub neumann: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointsConfig {
    #[serde(default)]
    pub strategy: PointStrategy,
    #[serde(default = "default_offset")]
    pub stagger_offset: f64,
}

fn default_offset() -> f64 {
    0.5
}

impl Default for PointsConfig {
    fn default() -> Self {
        PointsConfig { strategy: PointStrategy::Equispaced, stagger_offset: 0.5 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DlmConfig {
    #[serde(default = "default_mode")]
    pub mode: ModeKind,
    /// Extra rows in least-squares mode.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub extra_points: Option<usize>,
    #[serde(default)]
    pub v_boundary: VBoundary,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tail_degree: Option<u32>,
    pub psi_u: KernelSpec,
    pub psi_v: KernelSpec,
}

fn default_mode() -> ModeKind {
    ModeKind::Square
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NewtonSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_iterations: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub residual_tolerance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step_tolerance: Option<f64>,
    /// `backtracking` or `none`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub damping: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unknowns: Option<Unknowns>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tail_degree: Option<u32>,
    /// Start from the exact field interpolated at the centers instead of zeros.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exact_initial_guess: Option<bool>,
    pub kernel: KernelSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    /// Benchmark name (`b1`, `b2`, `b3`); alternatively give `[problem]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub case: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub problem: Option<ProblemConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(default)]
    pub solver: SolverKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_list: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eval_grid: Option<usize>,
    #[serde(default)]
    pub wall_time: WallTime,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
    #[serde(default)]
    pub points: PointsConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dlm: Option<DlmConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub newton: Option<NewtonSection>,
}

fn parse_faces(names: &[String]) -> Result<Vec<Face>> {
    names.iter().map(|n| Face::parse(n).ok_or_else(|| Error::Config(format!("unknown face `{n}`")))).collect()
}

impl Config {
    pub fn from_toml(text: &str) -> Result<Self> {
        let c: Config = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_path(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> Result<()> {
        match (&self.case, &self.problem) {
            (Some(_), Some(_)) => return Err(Error::Config("give either `case` or `[problem]`, not both".into())),
            (None, None) => return Err(Error::Config("missing `case` or `[problem]`".into())),
            (Some(c), None) if BenchmarkCase::parse(c).is_none() => {
                return Err(Error::Config(format!("unknown case `{c}`")))
            }
            _ => {}
        }
        if let Some(l) = self.lambda {
            if !l.is_finite() {
                return Err(Error::Config("lambda must be finite".into()));
            }
        }
        if matches!(self.solver, SolverKind::Dlm | SolverKind::Both) && self.dlm.is_none() {
            return Err(Error::Config("solver needs a [dlm] section".into()));
        }
        if matches!(self.solver, SolverKind::Newton | SolverKind::Both) && self.newton.is_none() {
            return Err(Error::Config("solver needs a [newton] section".into()));
        }
        if let Some(g) = self.eval_grid {
            if g < 10 {
                return Err(Error::Config(format!("eval_grid must be >= 10, got {g}")));
            }
        }
        let mut kernels: Vec<&KernelSpec> = Vec::new();
        if let Some(d) = &self.dlm {
            kernels.extend([&d.psi_u, &d.psi_v]);
        }
        if let Some(nw) = &self.newton {
            kernels.push(&nw.kernel);
        }
        for k in kernels {
            k.check_names()?;
        }
        if let Some(d) = &self.dlm {
            if d.extra_points == Some(0) {
                return Err(Error::Config("extra_points must be >= 1".into()));
            }
        }
        if let Some(nw) = &self.newton {
            if let Some(d) = &nw.damping {
                if d != "backtracking" && d != "none" {
                    return Err(Error::Config(format!("unknown damping `{d}`")));
                }
            }
        }
        Ok(())
    }

    pub fn settings(&self) -> SweepSettings {
        SweepSettings { points: self.points.clone(), eval_grid: self.eval_grid_or_default(), wall_time: self.wall_time }
    }

    /// The solvers selected by `solver`, DLM first.
    pub fn solvers(&self) -> Vec<SolverSpec> {
        let mut v = Vec::new();
        if matches!(self.solver, SolverKind::Dlm | SolverKind::Both) {
            v.extend(self.dlm.clone().map(SolverSpec::Dlm));
        }
        if matches!(self.solver, SolverKind::Newton | SolverKind::Both) {
            v.extend(self.newton.clone().map(SolverSpec::Newton));
        }
        v
    }

    pub fn case_dim(&self) -> usize {
        match (&self.case, &self.problem) {
            (Some(c), _) => BenchmarkCase::parse(c).map_or(1, |b| b.dim()),
            (None, Some(p)) if p.domain.len() == 4 => 2,
            _ => 1,
        }
    }

    pub fn manufactured_case(&self) -> Result<ManufacturedCase> {
        let lambda = self.lambda.unwrap_or(1.0);
        if let Some(c) = &self.case {
            let b = BenchmarkCase::parse(c).ok_or_else(|| Error::Config(format!("unknown case `{c}`")))?;
            return benchmark(b, lambda);
        }
        let p = self.problem.as_ref().ok_or_else(|| Error::Config("missing problem".into()))?;
        let domain = match p.domain.as_slice() {
            [a, b] => Domain::interval(*a, *b)?,
            [x0, x1, y0, y1] => Domain::rectangle(*x0, *x1, *y0, *y1)?,
            _ => return Err(Error::Config("domain needs 2 or 4 numbers".into())),
        };
        let partition = BoundaryPartition::new(&domain, &parse_faces(&p.dirichlet)?, &parse_faces(&p.neumann)?)?;
        let op = |s: &str| s.parse::<LinearOperator>();
        let dim = domain.dim();
        let exact = p.exact;
        manufacture(
            "custom",
            op(&p.p)? * lambda,
            op(&p.q)?,
            op(&p.r)?,
            move |x| exact.jet_at(x, dim),
            domain,
            partition,
        )
    }

    pub fn eval_grid_or_default(&self) -> usize {
        self.eval_grid.unwrap_or(if self.case_dim() == 2 { 21 } else { 101 })
    }

    /// Apply `--c` to every kernel that takes a shape parameter.
    pub fn override_c(&mut self, c: f64) {
        fn visit(k: &mut KernelSpec, c: f64) {
            if k.uses_c() {
                k.c = Some(c);
            }
            if let Some(inner) = k.inner.as_mut() {
                visit(inner, c);
            }
        }
        if let Some(d) = self.dlm.as_mut() {
            visit(&mut d.psi_u, c);
            visit(&mut d.psi_v, c);
        }
        if let Some(nw) = self.newton.as_mut() {
            visit(&mut nw.kernel, c);
        }
    }
}

impl DlmConfig {
    pub fn tail(&self) -> Result<Option<PolynomialTail>> {
        self.tail_degree.map(PolynomialTail::new).transpose()
    }

    /// Extra least-squares points: the Halton sequence continued past the
    /// indices used for interior points, scaled into the domain. Without an
    /// explicit count, one extra point per interior point.
    pub fn solve_mode(&self, domain: &Domain, n_interior: usize) -> SolveMode {
        match self.mode {
            ModeKind::Square => SolveMode::Square,
            ModeKind::LeastSquares => {
                let k = self.extra_points.unwrap_or(n_interior.max(1));
                let extra_points = (0..k)
                    .map(|i| {
                        let idx = (n_interior + i + 1) as u64;
                        let x = domain.lower(0) + domain.extent(0) * halton(idx, 2);
                        let y =
                            if domain.dim() == 2 { domain.lower(1) + domain.extent(1) * halton(idx, 3) } else { 0.0 };
                        Point::new(x, y)
                    })
                    .collect();
                SolveMode::LeastSquares { extra_points }
            }
        }
    }
}

impl NewtonSection {
    pub fn newton_config(&self, case: &ManufacturedCase) -> Result<NewtonConfig> {
        let d = NewtonConfig::default();
        let cfg = NewtonConfig {
            max_iterations: self.max_iterations.unwrap_or(d.max_iterations),
            residual_tolerance: self.residual_tolerance.unwrap_or(d.residual_tolerance),
            step_tolerance: self.step_tolerance.unwrap_or(d.step_tolerance),
            damping: match self.damping.as_deref() {
                Some("none") => Damping::None,
                _ => d.damping,
            },
            initial_guess: if self.exact_initial_guess.unwrap_or(false) {
                crate::newton::InitialGuess::Field(case.u_field())
            } else {
                crate::newton::InitialGuess::Zeros
            },
            unknowns: self.unknowns.unwrap_or_default(),
            tail: self.tail_degree.map(PolynomialTail::new).transpose()?,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}
