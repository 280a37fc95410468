mod common;

use std::f64::consts::PI;

use dlrbf::geometry::Point;
use dlrbf::kernels::{
    fundamental_solution, inverse_multiquadric, multiquadric, psi_u_kernel, spk_kernels, FundamentalKind,
    FundamentalSolution, KernelFamily,
};
use dlrbf::operators::{apply_to_kernel, kernel_jet, EvalPoint};
use dlrbf::Error;
use proptest::prelude::*;

#[test]
fn spk_laplace1d_is_half_multiquadric() {
    for c in [0.5, 1.0, 2.0] {
        let (spk, _) = spk_kernels(c, FundamentalKind::Laplace1D, None, None).unwrap();
        let mq = multiquadric(c).unwrap();
        for i in 0..100 {
            let r = 10.0 * i as f64 / 99.0;
            let a = spk.value(r).unwrap();
            assert!((a - 0.5 * (r * r + c * c).sqrt()).abs() <= 1e-14, "c={c} r={r}");
            assert!((a - 0.5 * mq.value(r).unwrap()).abs() <= 1e-14);
        }
    }
}

#[test]
fn spk_laplace3d_is_scaled_inverse_multiquadric() {
    for c in [0.5, 1.0, 2.0] {
        let (spk, _) = spk_kernels(c, FundamentalKind::Laplace3D, None, None).unwrap();
        let imq = inverse_multiquadric(c).unwrap();
        for i in 0..100 {
            let r = 10.0 * i as f64 / 99.0;
            let a = spk.value(r).unwrap();
            assert!((a - 1.0 / (4.0 * PI * (r * r + c * c).sqrt())).abs() <= 1e-14, "c={c} r={r}");
            assert!((a - imq.value(r).unwrap() / (4.0 * PI)).abs() <= 1e-14);
        }
    }
}

#[test]
fn origin_values_match_the_numerical_limit() {
    for k in common::kernel_zoo() {
        if k.is_source_weighted() {
            continue;
        }
        match k.value(0.0) {
            Ok(v0) => {
                let seq: Vec<f64> = (4..=8).map(|e| k.value(10f64.powi(-e)).unwrap()).collect();
                let lim = *seq.last().unwrap();
                assert!((v0 - lim).abs() <= 1e-6, "{}: {v0} vs {lim}", k.label());
                // The sequence itself settles.
                assert!((seq[3] - seq[4]).abs() <= (seq[0] - seq[1]).abs() + 1e-15, "{}", k.label());
            }
            Err(Error::SingularAtOrigin { .. }) => {
                assert!(!k.smooth_at_origin, "{}", k.label());
                assert!(k.value(1e-6).unwrap().abs() > 1e-3, "{} should blow up", k.label());
            }
            Err(e) => panic!("{}: {e}", k.label()),
        }
    }
}

#[test]
fn singular_fundamental_solutions() {
    assert!(fundamental_solution(FundamentalKind::Laplace2D, 1).unwrap().value(0.0).is_err());
    assert!(fundamental_solution(FundamentalKind::Laplace3D, 1).unwrap().value(0.0).is_err());
    assert_eq!(fundamental_solution(FundamentalKind::Laplace3D, 2).unwrap().value(0.0).unwrap(), 0.0);
    assert_eq!(fundamental_solution(FundamentalKind::Laplace2D, 2).unwrap().value(0.0).unwrap(), 0.0);
}

#[test]
fn augmented_2d_kernels_are_flat_at_the_origin() {
    let l2 = FundamentalSolution::new(FundamentalKind::Laplace2D, 1).unwrap();
    for m in 1..=3 {
        let k = psi_u_kernel(m, &l2).unwrap();
        let d = k.radial_derivatives(0.0, 1).unwrap();
        assert_eq!(d[1], 0.0);
        let h = 1e-8;
        let fd = (k.value(h).unwrap() - k.value(0.0).unwrap()) / h;
        assert!(fd.abs() <= 1e-6, "m={m}: {fd}");
    }
}

#[test]
fn every_family_is_represented() {
    let zoo = common::kernel_zoo();
    for f in KernelFamily::ALL {
        assert!(zoo.iter().any(|k| k.family == f), "{}", f.name());
    }
}

fn pair() -> impl Strategy<Value = (Point, Point)> {
    (0.0..1.0f64, 0.0..1.0f64, 0.0..1.0f64, 0.0..1.0f64)
        .prop_map(|(a, b, c, d)| (Point::new(a, b), Point::new(c, d)))
        .prop_filter("r > 0.1", |(c, x)| c.distance(x) > 0.1)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn operators_match_finite_differences((c, x) in pair(), theta in 0.0..(2.0 * PI)) {
        let normal = [theta.cos(), theta.sin()];
        let h = 1e-3;
        for k in common::kernel_zoo() {
            for op in common::operator_catalogue() {
                let exact = apply_to_kernel(&op, &k, &c, &EvalPoint::boundary(x, normal)).unwrap();
                let (fd, scale, noise) = common::fd_apply(&op, &k, &c, &x, normal, h);
                let scale = scale.max(exact.abs());
                prop_assert!((exact - fd).abs() <= 1e-5 * scale + noise, "{} {op}: {exact} vs {fd}", k.label());
            }
        }
    }

    #[test]
    fn kernels_depend_only_on_distance((c, x) in pair(), theta in 0.0..(2.0 * PI)) {
        let r = c.distance(&x);
        let y = Point::new(c.x + r * theta.cos(), c.y + r * theta.sin());
        for k in common::kernel_zoo() {
            let a = kernel_jet(&k, &c, &x, 2, 0).unwrap().value;
            let b = kernel_jet(&k, &c, &y, 2, 0).unwrap().value;
            prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0), "{}", k.label());
        }
    }
}
