//! Independent oracles shared by the integration and acceptance tests. Nothing
//! here calls the library's solvers; only plain closed forms and dense algebra.

#![allow(dead_code)]

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};

use dlrbf::bench::config::{
    Config, DlmConfig, KernelSpec, NewtonSection, PointsConfig, ProblemConfig, SolverKind, VBoundary, WallTime,
    FAMILY_NAMES,
};
use dlrbf::bench::fields::ExactField;
use dlrbf::bench::sweep::SweepSettings;
use dlrbf::dlm::ModeKind;
use dlrbf::geometry::PointStrategy;
use dlrbf::geometry::{BoundaryPartition, Domain, Point};
use dlrbf::kernels::{
    eak_kernel, fundamental_solution, gaussian as gaussian_kernel, hsk_kernels, inverse_multiquadric, multiquadric,
    polyharmonic as polyharmonic_kernel, psi_u_kernel, psi_v_composed, psi_v_product, single_rbf, spk_kernels,
    thin_plate_spline, FundamentalKind, FundamentalSolution, KernelParams, RadialKernel, SingleRbfStyle,
};
use dlrbf::operators::{kernel_jet, LinearOperator, OpTerm, ProblemSpec, ScalarField};
use proptest::option;
use proptest::prelude::*;

/// `N` equispaced nodes on [0, 1], endpoints included.
pub fn nodes(n: usize) -> Vec<f64> {
    (0..n).map(|i| i as f64 / (n - 1) as f64).collect()
}

pub fn grid(m: usize) -> Vec<f64> {
    nodes(m)
}

/// Single-field cubic-spline collocation of `u'' = 2`, `u(0) = 0`, `u(1) = 1`
/// with `|x − c|³` plus `{1, x, x²}` and moment conditions. Returns `u` on `at`.
pub fn b1_cubic_collocation(n: usize, at: &[f64]) -> Vec<f64> {
    let c = nodes(n);
    let m = n + 3;
    let mut a = DMatrix::<f64>::zeros(m, m);
    let mut b = DVector::<f64>::zeros(m);
    let mut row = 0;
    for &x in &c[1..n - 1] {
        for (j, &cj) in c.iter().enumerate() {
            a[(row, j)] = 6.0 * (x - cj).abs();
        }
        a[(row, n + 2)] = 2.0;
        b[row] = 2.0;
        row += 1;
    }
    for (x, val) in [(0.0, 0.0), (1.0, 1.0)] {
        for (j, &cj) in c.iter().enumerate() {
            a[(row, j)] = (x - cj).abs().powi(3);
        }
        a[(row, n)] = 1.0;
        a[(row, n + 1)] = x;
        a[(row, n + 2)] = x * x;
        b[row] = val;
        row += 1;
    }
    for k in 0..3 {
        for (j, &cj) in c.iter().enumerate() {
            a[(row, j)] = cj.powi(k);
        }
        row += 1;
    }
    let coef = a.lu().solve(&b).expect("oracle matrix singular");
    at.iter()
        .map(|&x| {
            let s: f64 = c.iter().enumerate().map(|(j, &cj)| coef[j] * (x - cj).abs().powi(3)).sum();
            s + coef[n] + coef[n + 1] * x + coef[n + 2] * x * x
        })
        .collect()
}

/// Right-hand side of `λ u u' + u'' = f` for `u = sin πx`.
pub fn burgers_f(lambda: f64, x: f64) -> f64 {
    let (s, c) = (PI * x).sin_cos();
    lambda * PI * s * c - PI * PI * s
}

/// Second-order central finite differences on `n` nodes, solved by undamped
/// Newton with dense LU. Returns `(nodes, values)`.
pub fn burgers_fd(lambda: f64, n: usize) -> (Vec<f64>, Vec<f64>) {
    let x = nodes(n);
    let h = 1.0 / (n - 1) as f64;
    let m = n - 2;
    let mut u = DVector::<f64>::zeros(m);
    let full = |u: &DVector<f64>, i: isize| -> f64 {
        if i < 0 || i as usize >= m {
            0.0
        } else {
            u[i as usize]
        }
    };
    for _ in 0..50 {
        let mut f = DVector::<f64>::zeros(m);
        let mut j = DMatrix::<f64>::zeros(m, m);
        for i in 0..m {
            let (l, c, r) = (full(&u, i as isize - 1), u[i], full(&u, i as isize + 1));
            f[i] = lambda * c * (r - l) / (2.0 * h) + (r - 2.0 * c + l) / (h * h) - burgers_f(lambda, x[i + 1]);
            j[(i, i)] = lambda * (r - l) / (2.0 * h) - 2.0 / (h * h);
            if i > 0 {
                j[(i, i - 1)] = -lambda * c / (2.0 * h) + 1.0 / (h * h);
            }
            if i + 1 < m {
                j[(i, i + 1)] = lambda * c / (2.0 * h) + 1.0 / (h * h);
            }
        }
        let step = j.lu().solve(&f).expect("FD Jacobian singular");
        u -= &step;
        if step.amax() < 1e-14 {
            break;
        }
    }
    let mut vals = vec![0.0];
    vals.extend(u.iter());
    vals.push(0.0);
    (x, vals)
}

/// Richardson-extrapolated central differences of a scalar function of one
/// variable: first and second derivatives.
pub fn fd1(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    let d = |h: f64| (f(x + h) - f(x - h)) / (2.0 * h);
    (4.0 * d(h / 2.0) - d(h)) / 3.0
}

pub fn fd2(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    let d = |h: f64| (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h);
    (4.0 * d(h / 2.0) - d(h)) / 3.0
}

pub fn settings(eval_grid: usize) -> SweepSettings {
    SweepSettings { points: PointsConfig::default(), eval_grid, wall_time: WallTime::Solve }
}

pub fn kernel(family: &str) -> KernelSpec {
    KernelSpec::family(family)
}

pub fn polyharmonic(k: u32) -> KernelSpec {
    KernelSpec { k: Some(k), ..KernelSpec::family("polyharmonic") }
}

pub fn mq(c: f64) -> KernelSpec {
    KernelSpec { c: Some(c), ..KernelSpec::family("multiquadric") }
}

pub fn gaussian(eps: f64) -> KernelSpec {
    KernelSpec { epsilon: Some(eps), ..KernelSpec::family("gaussian") }
}

/// DLM setup used for B1: cubic `u` with a quadratic tail, linear `v`.
pub fn b1_dlm(mode: ModeKind) -> DlmConfig {
    DlmConfig {
        mode,
        extra_points: None,
        v_boundary: VBoundary::Exact,
        tail_degree: Some(2),
        psi_u: polyharmonic(3),
        psi_v: polyharmonic(1),
    }
}

pub fn b1_newton() -> NewtonSection {
    NewtonSection {
        max_iterations: None,
        residual_tolerance: None,
        step_tolerance: None,
        damping: None,
        unknowns: None,
        tail_degree: Some(2),
        exact_initial_guess: None,
        kernel: polyharmonic(3),
    }
}

/// DLM setup used for B2: multiquadric `u`, narrow Gaussian `v`.
pub fn b2_dlm(mode: ModeKind) -> DlmConfig {
    DlmConfig {
        mode,
        extra_points: None,
        v_boundary: VBoundary::Exact,
        tail_degree: None,
        psi_u: mq(1.0),
        psi_v: gaussian(160.0),
    }
}

pub fn mq_newton(c: f64) -> NewtonSection {
    NewtonSection { tail_degree: None, kernel: mq(c), ..b1_newton() }
}

pub fn b3_dlm(mode: ModeKind) -> DlmConfig {
    DlmConfig {
        mode,
        extra_points: None,
        v_boundary: VBoundary::Exact,
        tail_degree: None,
        psi_u: mq(1.0),
        psi_v: mq(1.0),
    }
}

/// Path of a committed example config.
pub fn config_path(name: &str) -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("configs").join(name)
}

pub fn golden_path(name: &str) -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("tests").join("golden").join(name)
}

pub fn b1_compare_config() -> Config {
    Config::from_path(&config_path("b1_compare.toml")).expect("committed config parses")
}

/// `p = q = identity`, `R = laplacian` on the unit square, with a source term
/// that varies in space so source-weighted kernels are exercised.
pub fn square_problem() -> ProblemSpec {
    let d = Domain::unit_square();
    let part = BoundaryPartition::all_dirichlet(&d);
    ProblemSpec::new(
        LinearOperator::identity(),
        LinearOperator::identity(),
        LinearOperator::laplacian(),
        ScalarField::new(|p| 1.0 + p.x * p.x - 0.5 * p.y),
        ScalarField::zero(),
        ScalarField::zero(),
        d,
        part,
    )
    .unwrap()
}

/// One or more members of every kernel family, all in two dimensions.
pub fn kernel_zoo() -> Vec<RadialKernel> {
    use FundamentalKind::*;
    let fs = |k, o| FundamentalSolution::new(k, o).unwrap();
    let lap = LinearOperator::laplacian();
    let id = LinearOperator::identity();
    let problem = square_problem();
    let mut z = vec![
        multiquadric(0.7).unwrap(),
        inverse_multiquadric(0.7).unwrap(),
        gaussian_kernel(1.3).unwrap(),
        polyharmonic_kernel(1).unwrap(),
        polyharmonic_kernel(3).unwrap(),
        polyharmonic_kernel(5).unwrap(),
        thin_plate_spline(1).unwrap(),
        thin_plate_spline(2).unwrap(),
    ];
    for kind in [Laplace1D, Laplace2D, Laplace3D] {
        for order in 1..=3 {
            z.push(fundamental_solution(kind, order).unwrap());
        }
        z.push(psi_u_kernel(1, &fs(kind, 1)).unwrap());
        z.push(psi_u_kernel(2, &fs(kind, 1)).unwrap());
        z.push(eak_kernel(1.7, 1, &fs(kind, 1)).unwrap());
        let (u, v) = hsk_kernels(2, 2, kind, Some(kind), Some(kind)).unwrap();
        z.push(u);
        z.push(v);
        let (u, v) = spk_kernels(0.8, kind, Some(kind), None).unwrap();
        z.push(u);
        z.push(v);
        z.push(psi_v_product(2, &fs(kind, 1), Some(&fs(kind, 1)), Some(&fs(kind, 1))).unwrap());
    }
    let mq = multiquadric(1.0).unwrap().with_dim(2);
    z.push(psi_v_composed(0, &lap, &id, &mq).unwrap());
    z.push(psi_v_composed(1, &"dx".parse().unwrap(), &id, &mq).unwrap());
    let r5 = polyharmonic_kernel(5).unwrap().with_dim(2);
    z.push(psi_v_composed(0, &lap, &lap, &r5).unwrap());
    for style in [SingleRbfStyle::Eak, SingleRbfStyle::Hsk, SingleRbfStyle::Spk] {
        z.push(single_rbf(style, &problem, &KernelParams { c: Some(0.9), ..Default::default() }).unwrap());
    }
    z.into_iter().map(|k| k.with_dim(2)).collect()
}

/// Every catalogued operator term, plus a mixed sum and a scaling.
pub fn operator_catalogue() -> Vec<LinearOperator> {
    ["identity", "dx", "dy", "dxx", "dyy", "laplacian", "dn", "scale(-2.5)", "0.5*dxx + dy - 3*identity"]
        .iter()
        .map(|s| s.parse().unwrap())
        .collect()
}

/// `op` applied to `x ↦ φ(‖x − c‖)` by Richardson-extrapolated central differences
/// of the kernel value. Also returns `Σ |coef · component|`, the magnitude that
/// relative tolerances refer to (a harmonic kernel has a zero Laplacian but
/// nonzero second partials).
/// Finite-difference `op[k(., c)](x)`. Returns `(value, scale, noise)`: compare with
/// `|exact - value| <= rtol * scale + noise`, where `noise` bounds the stencil roundoff.
pub fn fd_apply(
    op: &LinearOperator,
    k: &RadialKernel,
    c: &Point,
    x: &Point,
    normal: [f64; 2],
    h: f64,
) -> (f64, f64, f64) {
    let val = |p: Point| kernel_jet(k, c, &p, 2, 0).unwrap().value;
    let along = |axis: usize| {
        move |t: f64| {
            let mut p = *x;
            if axis == 0 {
                p.x += t;
            } else {
                p.y += t;
            }
            val(p)
        }
    };
    // A second partial is phi'' e^2 + (phi'/r)(1 - e^2) with e the direction cosine;
    // the two pieces can cancel, so the scale sums them in magnitude.
    let r = c.distance(x);
    let e = [(x.x - c.x) / r, (x.y - c.y) / r];
    let ray = |t: f64| val(Point::new(c.x + (r + t) * e[0], c.y + (r + t) * e[1]));
    let (d1, d2) = (fd1(ray, 0.0, h), fd2(ray, 0.0, h));
    let second_scale = |axis: usize| d2.abs() * e[axis] * e[axis] + (d1 / r).abs() * (1.0 - e[axis] * e[axis]);
    let roundoff = |order: i32| 100.0 * f64::EPSILON * val(*x).abs() / h.powi(order);
    let (mut total, mut scale, mut noise) = (0.0, 0.0, 0.0);
    for &(coef, term) in op.terms() {
        noise += coef.abs()
            * match term {
                OpTerm::Identity => 0.0,
                OpTerm::Partial { order, .. } => roundoff(order as i32),
                OpTerm::Laplacian => 2.0 * roundoff(2),
                OpTerm::NormalDerivative => 2.0 * roundoff(1),
            };
        let parts: Vec<(f64, f64)> = match term {
            OpTerm::Identity => vec![(val(*x), 0.0)],
            OpTerm::Partial { axis, order: 1 } => vec![(fd1(along(axis), 0.0, h), 0.0)],
            OpTerm::Partial { axis, .. } => vec![(fd2(along(axis), 0.0, h), second_scale(axis))],
            OpTerm::Laplacian => {
                vec![(fd2(along(0), 0.0, h), second_scale(0)), (fd2(along(1), 0.0, h), second_scale(1))]
            }
            OpTerm::NormalDerivative => {
                vec![(normal[0] * fd1(along(0), 0.0, h), 0.0), (normal[1] * fd1(along(1), 0.0, h), 0.0)]
            }
        };
        for (v, s) in parts {
            total += coef * v;
            scale += (coef * v).abs().max((coef * s).abs());
        }
    }
    (total, scale, noise)
}

// ---- random valid configs ----

pub fn finite() -> impl Strategy<Value = f64> {
    prop_oneof![0.01..10.0f64, -1e3..1e3f64, Just(1.0)]
}

pub fn kernel_spec() -> impl Strategy<Value = KernelSpec> {
    let leaf = (
        0..FAMILY_NAMES.len(),
        option::of(0.01..10.0f64),
        option::of(0.01..100.0f64),
        option::of(0u32..6),
        option::of(0u32..4),
        option::of(0u32..4),
        option::of(0u32..3),
        option::of(1u32..4),
        option::of(finite()),
        option::of(prop_oneof![
            Just(FundamentalKind::Laplace1D),
            Just(FundamentalKind::Laplace2D),
            Just(FundamentalKind::Laplace3D)
        ]),
    )
        .prop_map(|(fam, c, epsilon, k, m, n, s, order, f, base)| KernelSpec {
            family: FAMILY_NAMES[fam].to_string(),
            c,
            epsilon,
            k,
            m,
            n,
            s,
            order,
            f,
            base,
            inner: None,
        });
    leaf.prop_recursive(2, 4, 1, |inner| {
        (inner.clone(), option::of(inner)).prop_map(|(mut k, i)| {
            k.inner = i.map(Box::new);
            k
        })
    })
}

pub fn config() -> impl Strategy<Value = Config> {
    let dlm = (
        prop_oneof![Just(ModeKind::Square), Just(ModeKind::LeastSquares)],
        option::of(1usize..50),
        prop_oneof![Just(VBoundary::Exact), Just(VBoundary::GoverningEquation)],
        option::of(1u32..3),
        kernel_spec(),
        kernel_spec(),
    )
        .prop_map(|(mode, extra_points, v_boundary, tail_degree, psi_u, psi_v)| DlmConfig {
            mode,
            extra_points,
            v_boundary,
            tail_degree,
            psi_u,
            psi_v,
        });
    let newton = (
        option::of(1usize..100),
        option::of(1e-14..1e-4f64),
        option::of(1e-14..1e-4f64),
        option::of(prop_oneof![Just("none".to_string()), Just("backtracking".to_string())]),
        option::of(prop_oneof![
            Just(dlrbf::newton::Unknowns::NodalValues),
            Just(dlrbf::newton::Unknowns::Coefficients)
        ]),
        option::of(1u32..3),
        option::of(any::<bool>()),
        kernel_spec(),
    )
        .prop_map(|(max_iterations, rt, st, damping, unknowns, tail_degree, exact, kernel)| NewtonSection {
            max_iterations,
            residual_tolerance: rt,
            step_tolerance: st,
            damping,
            unknowns,
            tail_degree,
            exact_initial_guess: exact,
            kernel,
        });
    let problem = (
        prop_oneof![Just(vec![0.0, 1.0]), Just(vec![-1.0, 2.0, 0.0, 0.5])],
        prop_oneof![Just("identity"), Just("scale(0)"), Just("dx + 2*identity")],
        prop_oneof![Just("dx"), Just("identity")],
        prop_oneof![Just(ExactField::Quadratic), Just(ExactField::SinPi), Just(ExactField::Zero)],
    )
        .prop_map(|(domain, p, q, exact)| {
            let two_d = domain.len() == 4;
            ProblemConfig {
                domain,
                p: p.into(),
                q: q.into(),
                r: if two_d { "laplacian".into() } else { "dxx".into() },
                exact,
                dirichlet: if two_d {
                    vec!["xmin".into(), "xmax".into(), "ymin".into()]
                } else {
                    vec!["xmin".into(), "xmax".into()]
                },
                neumann: if two_d { vec!["ymax".into()] } else { vec![] },
            }
        });
    let case_or_problem = prop_oneof![
        prop_oneof![Just("b1"), Just("b2"), Just("b3")].prop_map(|c| (Some(c.to_string()), None)),
        problem.prop_map(|p| (None, Some(p))),
    ];
    (
        case_or_problem,
        option::of(finite()),
        prop_oneof![Just(SolverKind::Dlm), Just(SolverKind::Newton), Just(SolverKind::Both)],
        option::of(3usize..40),
        option::of(prop::collection::btree_set(3usize..60, 1..5)),
        option::of(10usize..200),
        prop_oneof![Just(WallTime::Solve), Just(WallTime::Total)],
        option::of("[a-z]{1,8}\\.csv"),
        (prop_oneof![Just(PointStrategy::Equispaced), Just(PointStrategy::Halton)], 0.05..0.95f64),
        dlm,
        newton,
    )
        .prop_map(
            |(
                (case, problem),
                lambda,
                solver,
                n,
                n_list,
                eval_grid,
                wall_time,
                output,
                (strategy, off),
                dlm,
                newton,
            )| {
                Config {
                    case,
                    problem,
                    lambda,
                    solver,
                    n,
                    n_list: n_list.map(|s| s.into_iter().collect()),
                    eval_grid,
                    wall_time,
                    output,
                    points: PointsConfig { strategy, stagger_offset: off },
                    dlm: Some(dlm),
                    newton: Some(newton),
                }
            },
        )
}
