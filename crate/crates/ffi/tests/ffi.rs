use std::ffi::{CStr, CString};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use dlrbf_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(dlrbf_last_error()) }.to_string_lossy().into_owned()
}

fn config_text(name: &str) -> CString {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/configs").join(name);
    CString::new(std::fs::read_to_string(path).unwrap()).unwrap()
}

fn kernel(spec: &str) -> Result<*mut DlrbfKernel, DlrbfStatus> {
    let spec = CString::new(spec).unwrap();
    let mut k = ptr::null_mut();
    match unsafe { dlrbf_kernel_from_toml(spec.as_ptr(), &mut k) } {
        DlrbfStatus::Ok => Ok(k),
        s => {
            assert!(k.is_null());
            Err(s)
        }
    }
}

#[test]
fn version_matches_the_crate() {
    let v = unsafe { CStr::from_ptr(dlrbf_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

#[test]
fn multiquadric_derivatives() {
    let k = kernel("family = \"multiquadric\"\nc = 1.0").unwrap();
    let mut d = [0.0; 3];
    let r: f64 = 0.5;
    assert_eq!(unsafe { dlrbf_kernel_derivatives(k, r, 2, d.as_mut_ptr(), d.len()) }, DlrbfStatus::Ok);
    let s = (r * r + 1.0).sqrt();
    assert!((d[0] - s).abs() <= 1e-15);
    assert!((d[1] - r / s).abs() <= 1e-15);
    assert!((d[2] - 1.0 / (s * s * s)).abs() <= 1e-15);
    let label = unsafe { CStr::from_ptr(dlrbf_kernel_label(k)) }.to_str().unwrap();
    assert!(label.contains("mq") || label.contains("multiquadric"), "{label}");

    let mut small = [0.0; 2];
    assert_eq!(unsafe { dlrbf_kernel_derivatives(k, r, 2, small.as_mut_ptr(), 2) }, DlrbfStatus::BufferTooSmall);
    unsafe { dlrbf_kernel_free(k) };
}

#[test]
fn spk_kernel_through_the_abi() {
    let k = kernel("family = \"spk_u\"\nc = 1.0\nbase = \"laplace1d\"").unwrap();
    let mut d = [0.0];
    for (r, want) in [(0.0, 0.5), (1.0, 0.5 * 2f64.sqrt())] {
        assert_eq!(unsafe { dlrbf_kernel_derivatives(k, r, 0, d.as_mut_ptr(), 1) }, DlrbfStatus::Ok);
        assert!((d[0] - want).abs() <= 1e-15);
    }
    unsafe { dlrbf_kernel_free(k) };
}

#[test]
fn kernel_errors() {
    assert_eq!(kernel("family = \"nope\"").unwrap_err(), DlrbfStatus::Validation);
    assert!(last_error().contains("nope"));
    assert_eq!(kernel("family = \"multiquadric\"\nc = -1.0").unwrap_err(), DlrbfStatus::Validation);
    assert_eq!(kernel("not = [toml").unwrap_err(), DlrbfStatus::Validation);

    let sing = kernel("family = \"fundamental_solution\"\nbase = \"laplace2d\"").unwrap();
    let mut d = [0.0];
    let s = unsafe { dlrbf_kernel_derivatives(sing, 0.0, 0, d.as_mut_ptr(), 1) };
    assert_ne!(s, DlrbfStatus::Ok);
    assert!(!last_error().is_empty());
    unsafe { dlrbf_kernel_free(sing) };

    let mut out = ptr::null_mut();
    assert_eq!(unsafe { dlrbf_kernel_from_toml(ptr::null(), &mut out) }, DlrbfStatus::NullPointer);
    let spec = CString::new("family = \"gaussian\"").unwrap();
    assert_eq!(unsafe { dlrbf_kernel_from_toml(spec.as_ptr(), ptr::null_mut()) }, DlrbfStatus::NullPointer);
    let bad = [0xffu8, 0xfe, 0];
    assert_eq!(unsafe { dlrbf_kernel_from_toml(bad.as_ptr().cast(), &mut out) }, DlrbfStatus::InvalidUtf8);
    assert_eq!(unsafe { dlrbf_kernel_derivatives(ptr::null(), 1.0, 0, d.as_mut_ptr(), 1) }, DlrbfStatus::NullPointer);
    assert!(unsafe { dlrbf_kernel_label(ptr::null()) }.is_null());
    unsafe { dlrbf_kernel_free(ptr::null_mut()) };
}

#[test]
fn run_config_records_and_csv() {
    let cfg = config_text("b1_converge.toml");
    let mut run = ptr::null_mut();
    assert_eq!(unsafe { dlrbf_run_config(cfg.as_ptr(), &mut run) }, DlrbfStatus::Ok);
    assert_eq!(unsafe { dlrbf_run_len(run) }, 3);
    let mut errors = Vec::new();
    for i in 0..3 {
        let mut r = std::mem::MaybeUninit::<DlrbfRecord>::uninit();
        assert_eq!(unsafe { dlrbf_run_record(run, i, r.as_mut_ptr()) }, DlrbfStatus::Ok);
        let r = unsafe { r.assume_init() };
        assert_eq!(r.status, DlrbfRecordStatus::Ok);
        assert_eq!(r.solver, 0);
        assert!(r.consistency_residual.is_finite());
        errors.push(r.max_error_u);
    }
    assert_eq!(
        [0, 1, 2].map(|i| {
            let mut r = std::mem::MaybeUninit::<DlrbfRecord>::uninit();
            unsafe { dlrbf_run_record(run, i, r.as_mut_ptr()) };
            unsafe { r.assume_init() }.n
        }),
        [5, 9, 17]
    );
    assert!(errors.windows(2).all(|w| w[1] < w[0]));
    let mut r = std::mem::MaybeUninit::<DlrbfRecord>::uninit();
    assert_eq!(unsafe { dlrbf_run_record(run, 3, r.as_mut_ptr()) }, DlrbfStatus::OutOfRange);

    let mut needed = 0usize;
    assert_eq!(unsafe { dlrbf_run_csv(run, ptr::null_mut(), 0, &mut needed) }, DlrbfStatus::BufferTooSmall);
    let mut buf = vec![0 as std::ffi::c_char; needed];
    assert_eq!(unsafe { dlrbf_run_csv(run, buf.as_mut_ptr(), buf.len(), ptr::null_mut()) }, DlrbfStatus::Ok);
    let text = unsafe { CStr::from_ptr(buf.as_ptr()) }.to_str().unwrap();
    assert_eq!(text.len() + 1, needed);
    assert_eq!(text.lines().count(), 4);
    assert!(text.starts_with("case,solver,"));
    unsafe { dlrbf_run_free(run) };
    assert_eq!(unsafe { dlrbf_run_len(ptr::null()) }, 0);
}

#[test]
fn run_config_failures() {
    let mut run = ptr::null_mut();
    let bad = CString::new("case = \"b1\"\nsolver = \"dlm\"\n").unwrap();
    assert_eq!(unsafe { dlrbf_run_config(bad.as_ptr(), &mut run) }, DlrbfStatus::Validation);
    assert!(run.is_null());

    let singular = CString::new(
        "case = \"b2\"\nsolver = \"dlm\"\nn_list = [33]\n[dlm]\nmode = \"least_squares\"\n\
         psi_u = { family = \"multiquadric\" }\npsi_v = { family = \"gaussian\", epsilon = 160.0 }\n",
    )
    .unwrap();
    assert_eq!(unsafe { dlrbf_run_config(singular.as_ptr(), &mut run) }, DlrbfStatus::Solver);
    assert!(last_error().contains("sweep failed"));

    let capped = CString::new(
        "case = \"b2\"\nsolver = \"newton\"\nn = 17\n[newton]\nmax_iterations = 1\nkernel = { family = \"multiquadric\" }\n",
    )
    .unwrap();
    assert_eq!(unsafe { dlrbf_run_config(capped.as_ptr(), &mut run) }, DlrbfStatus::Ok);
    let mut r = std::mem::MaybeUninit::<DlrbfRecord>::uninit();
    assert_eq!(unsafe { dlrbf_run_record(run, 0, r.as_mut_ptr()) }, DlrbfStatus::Ok);
    let r = unsafe { r.assume_init() };
    assert_eq!(r.status, DlrbfRecordStatus::NotConverged);
    assert_eq!(r.solver, 1);
    assert!(r.consistency_residual.is_nan());
    unsafe { dlrbf_run_free(run) };
}

#[test]
fn errors_are_thread_local() {
    assert_eq!(kernel("family = \"nope\"").unwrap_err(), DlrbfStatus::Validation);
    let other = std::thread::spawn(last_error).join().unwrap();
    assert_eq!(other, "");
    assert!(last_error().contains("nope"));
}

const C_PROGRAM: &str = r#"
#include <math.h>
#include <stdio.h>
#include <string.h>
#include "dlrbf.h"

int main(void) {
    DlrbfKernel *k = NULL;
    if (dlrbf_kernel_from_toml("family = \"multiquadric\"\nc = 1.0", &k) != DLRBF_STATUS_OK) return 1;
    double d[2];
    if (dlrbf_kernel_derivatives(k, 0.0, 1, d, 2) != DLRBF_STATUS_OK) return 2;
    if (fabs(d[0] - 1.0) > 1e-15 || fabs(d[1]) > 1e-15) return 3;
    dlrbf_kernel_free(k);

    if (dlrbf_kernel_from_toml("family = \"nope\"", &k) != DLRBF_STATUS_VALIDATION || k != NULL) return 4;
    if (strlen(dlrbf_last_error()) == 0) return 5;

    DlrbfRun *run = NULL;
    if (dlrbf_run_config("case = \"b1\"\nsolver = \"dlm\"\nn = 9\n[dlm]\n"
                         "psi_u = { family = \"polyharmonic\", k = 3 }\n"
                         "psi_v = { family = \"polyharmonic\", k = 1 }\n", &run) != DLRBF_STATUS_OK) return 6;
    if (dlrbf_run_len(run) != 1) return 7;
    DlrbfRecord r;
    if (dlrbf_run_record(run, 0, &r) != DLRBF_STATUS_OK || r.status != DLRBF_RECORD_STATUS_OK || r.n != 9) return 8;
    size_t needed = 0;
    dlrbf_run_csv(run, NULL, 0, &needed);
    char buf[4096];
    if (needed > sizeof buf || dlrbf_run_csv(run, buf, sizeof buf, NULL) != DLRBF_STATUS_OK) return 9;
    dlrbf_run_free(run);
    printf("%s %.3e\n", dlrbf_version(), r.max_error_u);
    return 0;
}
"#;

fn target_dir() -> PathBuf {
    // target/<profile>/deps/<test binary>
    std::env::current_exe().unwrap().parent().unwrap().parent().unwrap().to_path_buf()
}

#[test]
fn c_program_links_against_the_header() {
    let Ok(cc) = which_cc() else {
        eprintln!("no C compiler found; skipping");
        return;
    };
    let lib = target_dir().join("libdlrbf_ffi.a");
    assert!(lib.exists(), "{} missing", lib.display());
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("ffi-c");
    std::fs::create_dir_all(&dir).unwrap();
    let src = dir.join("main.c");
    std::fs::write(&src, C_PROGRAM).unwrap();
    let exe = dir.join("main");
    let include = Path::new(env!("CARGO_MANIFEST_DIR")).join("include");
    let status = Command::new(&cc)
        .args(["-std=c11", "-Wall", "-Werror", "-o"])
        .arg(&exe)
        .arg(&src)
        .arg("-I")
        .arg(&include)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm"])
        .status()
        .unwrap();
    assert!(status.success(), "C compile failed");
    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success(), "C program exited with {:?}", out.status.code());
    assert!(String::from_utf8_lossy(&out.stdout).starts_with(env!("CARGO_PKG_VERSION")));
}

fn which_cc() -> Result<String, ()> {
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    match Command::new(&cc).arg("--version").output() {
        Ok(o) if o.status.success() => Ok(cc),
        _ => Err(()),
    }
}
