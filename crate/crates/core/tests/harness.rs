mod common;

use std::f64::consts::PI;

use dlrbf::bench::cli::{run_cli, EXIT_OK, EXIT_SOLVER, EXIT_VALIDATION};
use dlrbf::bench::config::{Config, PointsConfig, ProblemConfig, SolverKind, WallTime};
use dlrbf::bench::csv::{emit_csv, mask_wall_time, to_csv_string, HEADER};
use dlrbf::bench::fields::ExactField;
use dlrbf::bench::manufactured::{benchmark, manufacture, manufactured_defect, BenchmarkCase};
use dlrbf::bench::sweep::{run_convergence, RecordStatus, SolverSpec};
use dlrbf::dlm::ModeKind;
use dlrbf::geometry::{BoundaryPartition, Domain, Point};
use dlrbf::operators::{FieldJet, LinearOperator};
use dlrbf::Error;
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::{RngExt, SeedableRng};

fn cli(args: &[&str]) -> (i32, String) {
    let mut out = Vec::new();
    let code = run_cli(std::iter::once("dlrbf").chain(args.iter().copied()), &mut out);
    (code, String::from_utf8(out).unwrap())
}

fn write_config(dir: &tempfile::TempDir, name: &str, text: &str) -> String {
    let path = dir.path().join(name);
    std::fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

// ---- manufactured cases ----

#[test]
fn manufactured_examples() {
    let id = LinearOperator::identity();
    let dx = LinearOperator::partial(0, 1);
    let dxx = LinearOperator::partial(0, 2);
    let d = Domain::unit_interval();
    let part = BoundaryPartition::all_dirichlet(&d);
    let sq = |p: &Point| FieldJet { value: p.x * p.x, grad: [2.0 * p.x, 0.0], second: [2.0, 0.0], dim: 1 };
    let c = manufacture("sq", id.clone(), dx.clone(), dxx.clone(), sq, d.clone(), part.clone()).unwrap();
    for x in [0.0, 0.3, 1.0] {
        let p = Point::on_line(x);
        assert!((c.problem.f.eval(&p) - (2.0 * x * x * x + 2.0)).abs() <= 1e-14);
    }
    let b2 = benchmark(BenchmarkCase::B2, 1.0).unwrap();
    for x in [0.1, 0.5, 0.77] {
        let p = Point::on_line(x);
        let want = PI * (PI * x).sin() * (PI * x).cos() - PI * PI * (PI * x).sin();
        assert!((b2.problem.f.eval(&p) - want).abs() <= 1e-13);
    }
    let b3 = benchmark(BenchmarkCase::B3, 1.0).unwrap();
    let p = Point::new(0.2, 0.7);
    assert!((b3.problem.f.eval(&p) - 0.81).abs() <= 1e-14);
    assert!((b3.problem.neumann.eval(&Point::new(0.4, 1.0)) - 1.0).abs() <= 1e-15);
}

#[test]
fn manufactured_consistency_at_random_points() {
    let mut rng = StdRng::seed_from_u64(3);
    let mut cases = Vec::new();
    for which in [BenchmarkCase::B1, BenchmarkCase::B2, BenchmarkCase::B3] {
        for lambda in [0.0, 0.01, 1.0, 2.5] {
            cases.push(benchmark(which, lambda).unwrap());
        }
    }
    for field in [ExactField::Quadratic, ExactField::SinPi, ExactField::LinearSum, ExactField::RadialSquare] {
        let cfg = Config {
            case: None,
            problem: Some(ProblemConfig {
                domain: vec![0.0, 1.0, 0.0, 2.0],
                p: "dx + identity".into(),
                q: "dyy - 0.5*dy".into(),
                r: "laplacian".into(),
                exact: field,
                dirichlet: vec!["xmin".into(), "xmax".into(), "ymin".into()],
                neumann: vec!["ymax".into()],
            }),
            ..base_config()
        };
        cases.push(cfg.manufactured_case().unwrap());
    }
    for case in &cases {
        let (dom, dim) = (&case.problem.domain, case.problem.dim());
        for _ in 0..100 {
            let x = dom.lower(0) + dom.extent(0) * rng.random::<f64>();
            let y = if dim == 2 { dom.lower(1) + dom.extent(1) * rng.random::<f64>() } else { 0.0 };
            let defect = manufactured_defect(case, &Point::new(x, y)).unwrap();
            assert!(defect <= 1e-12, "{}: {defect}", case.name);
        }
    }
}

// ---- sweeps and CSV ----

#[test]
fn b1_sweep_error_strictly_decreases() {
    let case = benchmark(BenchmarkCase::B1, 1.0).unwrap();
    let cfg = Config::from_path(&common::config_path("b1_converge.toml")).unwrap();
    let spec = SolverSpec::Dlm(cfg.dlm.clone().unwrap());
    let recs = run_convergence(&case, &spec, &[5, 9, 17], &common::settings(101)).unwrap();
    assert!(recs.iter().all(|r| r.is_ok()));
    assert!(recs.windows(2).all(|w| w[1].max_error_u < w[0].max_error_u), "{recs:?}");
    assert!(recs.iter().all(|r| r.iterations == 1 && r.consistency_residual.is_some()));
}

#[test]
fn sweep_validation() {
    let case = benchmark(BenchmarkCase::B1, 1.0).unwrap();
    let spec = SolverSpec::Dlm(common::b1_dlm(ModeKind::Square));
    assert!(run_convergence(&case, &spec, &[9, 9], &common::settings(101)).is_err());
    assert!(run_convergence(&case, &spec, &[9, 5], &common::settings(101)).is_err());
    assert!(run_convergence(&case, &spec, &[], &common::settings(101)).is_err());
    assert!(run_convergence(&case, &spec, &[9], &common::settings(9)).is_err());
}

#[test]
fn per_n_failures_are_recorded() {
    let case = benchmark(BenchmarkCase::B2, 1.0).unwrap();
    let spec = SolverSpec::Dlm(common::b2_dlm(ModeKind::LeastSquares));
    let recs = run_convergence(&case, &spec, &[9, 33], &common::settings(101)).unwrap();
    assert!(recs[0].is_ok());
    assert!(matches!(recs[1].status, RecordStatus::Failed(_)));
    assert!(recs[1].max_error_u.is_nan());
    let all_bad = run_convergence(&case, &spec, &[33], &common::settings(101)).unwrap_err();
    assert!(matches!(all_bad, Error::SweepFailed(_)));
    assert!(!all_bad.is_validation());
}

#[test]
fn csv_format() {
    let case = benchmark(BenchmarkCase::B1, 1.0).unwrap();
    let spec = SolverSpec::Newton(common::b1_newton());
    let recs = run_convergence(&case, &spec, &[9], &common::settings(101)).unwrap();
    let text = to_csv_string(&recs).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    assert_eq!(lines[0], HEADER.join(","));
    let fields: Vec<&str> = lines[1].split(',').collect();
    assert_eq!(fields.len(), 11);
    assert_eq!(fields[7], "");
    // 17 significant digits.
    let mantissa = fields[5].split('e').next().unwrap();
    assert_eq!(mantissa.chars().filter(|c| c.is_ascii_digit()).count(), 17);
    assert!(to_csv_string(&[]).is_err());

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("out.csv");
    emit_csv(&recs, &path).unwrap();
    assert_eq!(std::fs::read_to_string(&path).unwrap(), text);
    assert!(emit_csv(&recs, &dir.path().join("missing/dir/out.csv")).is_err());
}

#[test]
fn rows_are_sorted_by_case_solver_n() {
    let case = benchmark(BenchmarkCase::B1, 1.0).unwrap();
    let mut recs =
        run_convergence(&case, &SolverSpec::Newton(common::b1_newton()), &[5, 9], &common::settings(50)).unwrap();
    recs.extend(
        run_convergence(&case, &SolverSpec::Dlm(common::b1_dlm(ModeKind::Square)), &[5, 9], &common::settings(50))
            .unwrap(),
    );
    recs.reverse();
    let text = to_csv_string(&recs).unwrap();
    let keys: Vec<(String, String)> = text
        .lines()
        .skip(1)
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[1].to_string(), f[3].to_string())
        })
        .collect();
    let want: Vec<(String, String)> = [("dlm", "5"), ("dlm", "9"), ("newton", "5"), ("newton", "9")]
        .iter()
        .map(|(a, b)| (a.to_string(), b.to_string()))
        .collect();
    assert_eq!(keys, want);
}

#[test]
fn repeated_runs_differ_only_in_wall_time() {
    let cfg = common::config_path("b2_converge.toml");
    let (c1, a) = cli(&["converge", "--config", cfg.to_str().unwrap(), "--n", "9"]);
    let (c2, b) = cli(&["converge", "--config", cfg.to_str().unwrap(), "--n", "9"]);
    assert_eq!((c1, c2), (EXIT_OK, EXIT_OK));
    assert_eq!(mask_wall_time(&a), mask_wall_time(&b));
}

#[test]
fn golden_compare_csv() {
    let cfg = common::config_path("b1_compare.toml");
    let (code, out) = cli(&["compare", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code, EXIT_OK);
    let golden = std::fs::read_to_string(common::golden_path("b1_compare.csv")).unwrap();
    assert_eq!(mask_wall_time(&out), mask_wall_time(&golden));
}

// ---- config ----

fn base_config() -> Config {
    Config {
        case: Some("b1".into()),
        problem: None,
        lambda: None,
        solver: SolverKind::Dlm,
        n: None,
        n_list: Some(vec![5, 9]),
        eval_grid: None,
        wall_time: WallTime::Solve,
        output: None,
        points: PointsConfig::default(),
        dlm: Some(common::b1_dlm(ModeKind::Square)),
        newton: None,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn config_round_trip(cfg in common::config()) {
        cfg.validate().unwrap();
        let text = cfg.to_toml().unwrap();
        let back = Config::from_toml(&text).unwrap();
        prop_assert_eq!(back, cfg);
    }
}

#[test]
fn committed_configs_parse() {
    for name in ["b1_compare.toml", "b1_converge.toml", "b2_converge.toml", "b3_converge.toml"] {
        let cfg = Config::from_path(&common::config_path(name)).unwrap();
        cfg.manufactured_case().unwrap();
    }
}

#[test]
fn config_errors_are_validation_errors() {
    for text in [
        "case = \"b9\"\nsolver = \"dlm\"\n",
        "case = \"b1\"\nsolver = \"dlm\"\n",
        "case = \"b1\"\nbogus = 1\n",
        "not toml at all [",
    ] {
        let e = Config::from_toml(text).unwrap_err();
        assert!(e.is_validation(), "{text}: {e}");
    }
}

// ---- CLI ----

#[test]
fn kernels_subcommand() {
    let (code, out) =
        cli(&["kernels", "--family", "spk", "--base", "laplace1d", "--c", "1", "--rmax", "2", "--steps", "4"]);
    assert_eq!(code, EXIT_OK);
    let rows: Vec<(f64, f64)> = out
        .lines()
        .skip(1)
        .map(|l| {
            let (r, v) = l.split_once(',').unwrap();
            (r.parse().unwrap(), v.parse().unwrap())
        })
        .collect();
    assert_eq!(rows.len(), 5);
    for (i, (r, v)) in rows.iter().enumerate() {
        assert_eq!(*r, 0.5 * i as f64);
        assert!((v - 0.5 * (r * r + 1.0).sqrt()).abs() <= 1e-15);
    }
    let (code, out) = cli(&["kernels"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.lines().any(|l| l == "multiquadric"));
    assert_eq!(cli(&["kernels", "--family", "nope"]).0, EXIT_VALIDATION);
    assert_eq!(cli(&["kernels", "--family", "fundamental", "--base", "laplace2d", "--rmax", "1"]).0, EXIT_SOLVER);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    // validation
    assert_eq!(cli(&["converge", "--config", "/definitely/missing.toml"]).0, EXIT_VALIDATION);
    assert_eq!(cli(&["frobnicate"]).0, EXIT_VALIDATION);
    assert_eq!(cli(&["converge", "--bogus-flag"]).0, EXIT_VALIDATION);
    let bad = write_config(&dir, "bad.toml", "case = \"b1\"\nsolver = \"dlm\"\nn = 9\n[dlm]\npsi_u = { family = \"nope\" }\npsi_v = { family = \"gaussian\" }\n");
    assert_eq!(cli(&["solve", "--config", &bad]).0, EXIT_VALIDATION);
    let b1 = common::config_path("b1_converge.toml");
    assert_eq!(cli(&["converge", "--config", b1.to_str().unwrap(), "--mode", "diagonal"]).0, EXIT_VALIDATION);
    assert_eq!(cli(&["converge", "--config", b1.to_str().unwrap(), "--c=-1"]).0, EXIT_VALIDATION);

    // solver failure
    let capped = write_config(
        &dir,
        "capped.toml",
        "case = \"b2\"\nsolver = \"newton\"\nn = 17\n[newton]\nmax_iterations = 1\nkernel = { family = \"multiquadric\" }\n",
    );
    let (code, out) = cli(&["solve", "--config", &capped]);
    assert_eq!(code, EXIT_SOLVER, "{out}");
    let singular = write_config(
        &dir,
        "singular.toml",
        "case = \"b2\"\nsolver = \"dlm\"\nn_list = [33]\n[dlm]\nmode = \"least_squares\"\npsi_u = { family = \"multiquadric\" }\npsi_v = { family = \"gaussian\", epsilon = 160.0 }\n",
    );
    assert_eq!(cli(&["converge", "--config", &singular]).0, EXIT_SOLVER);

    // success, with flag overrides and output path
    let out_path = dir.path().join("b1.csv");
    let (code, _) = cli(&[
        "converge",
        "--config",
        b1.to_str().unwrap(),
        "--n",
        "9",
        "--c",
        "2",
        "--seed",
        "4",
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(std::fs::read_to_string(&out_path).unwrap().lines().count(), 2);
    let (code, out) = cli(&["solve", "--config", b1.to_str().unwrap(), "--n", "9"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("max_error_u: "));
    assert_eq!(cli(&["--help"]).0, EXIT_OK);
}

#[test]
fn binary_exit_status() {
    let bin = env!("CARGO_BIN_EXE_dlrbf");
    let status = std::process::Command::new(bin).args(["converge", "--config", "/missing.toml"]).output().unwrap();
    assert_eq!(status.status.code(), Some(EXIT_VALIDATION));
    let cfg = common::config_path("b1_compare.toml");
    let run = std::process::Command::new(bin).args(["compare", "--config", cfg.to_str().unwrap()]).output().unwrap();
    assert_eq!(run.status.code(), Some(EXIT_OK));
    let golden = std::fs::read_to_string(common::golden_path("b1_compare.csv")).unwrap();
    assert_eq!(mask_wall_time(&String::from_utf8(run.stdout).unwrap()), mask_wall_time(&golden));
}
