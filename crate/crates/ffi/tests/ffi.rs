use std::ffi::{CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use minsupport::constructions::{appendix_fixture, Appendix};
use minsupport::moment::CertificateConfig;
use minsupport_ffi::*;

const H: f64 = std::f64::consts::FRAC_1_SQRT_2;

fn z(re: f64, im: f64) -> MsComplex {
    MsComplex { re, im }
}

fn last_error() -> String {
    let p = ms_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

/// V = span(e1 + e2), W = span(e1 − e2) in C²: a one-dimensional support.
fn diagonal_pair() -> *mut MsPair {
    let v = [z(H, 0.0), z(H, 0.0)];
    let w = [z(H, 0.0), z(-H, 0.0)];
    let mut pair = ptr::null_mut();
    let st = unsafe { ms_pair_new(2, 1, 1, v.as_ptr(), w.as_ptr(), 1e-10, &mut pair) };
    assert_eq!(st, MsStatus::Ok);
    assert!(!pair.is_null());
    pair
}

#[test]
fn pair_lifecycle_and_dimensions() {
    let pair = diagonal_pair();
    let (mut n, mut r, mut s) = (0, 0, 0);
    assert_eq!(
        unsafe { ms_pair_dims(pair, &mut n, &mut r, &mut s) },
        MsStatus::Ok
    );
    assert_eq!((n, r, s), (2, 1, 1));
    assert!(ms_last_error().is_null());
    unsafe { ms_pair_free(pair) };
    unsafe { ms_pair_free(ptr::null_mut()) };
}

#[test]
fn rejects_non_orthogonal_ranges() {
    let v = [z(1.0, 0.0), z(0.0, 0.0)];
    let w = [z(H, 0.0), z(H, 0.0)];
    let mut pair = ptr::null_mut();
    let st = unsafe { ms_pair_new(2, 1, 1, v.as_ptr(), w.as_ptr(), 1e-10, &mut pair) };
    assert_eq!(st, MsStatus::InvalidInput);
    assert!(pair.is_null());
    assert!(!last_error().is_empty());
}

#[test]
fn null_arguments_are_reported() {
    let mut pair = ptr::null_mut();
    let st = unsafe { ms_pair_new(2, 1, 1, ptr::null(), ptr::null(), 1e-10, &mut pair) };
    assert_eq!(st, MsStatus::NullPointer);
    let cfg = ms_descent_config_default();
    let mut out = MsAdequacy::default();
    assert_eq!(
        unsafe { ms_adequacy(ptr::null(), &cfg, &mut out) },
        MsStatus::NullPointer
    );
    assert!(last_error().contains("pair"));
}

#[test]
fn adequacy_and_oracle_agree_on_a_support() {
    let pair = diagonal_pair();
    let mut cfg = ms_descent_config_default();
    cfg.restarts = 4;
    let mut ad = MsAdequacy::default();
    assert_eq!(unsafe { ms_adequacy(pair, &cfg, &mut ad) }, MsStatus::Ok);
    assert!(ad.converged && ad.delta < 1e-10, "{ad:?}");
    let mut fw = MsOracle::default();
    assert_eq!(
        unsafe { ms_oracle(pair, 1e-9, 50_000, &mut fw) },
        MsStatus::Ok
    );
    assert!(fw.delta < 1e-9, "{fw:?}");
    unsafe { ms_pair_free(pair) };
}

#[test]
fn invalid_config_is_input_error() {
    let pair = diagonal_pair();
    let mut cfg = ms_descent_config_default();
    cfg.step = 2.0;
    let mut ad = MsAdequacy::default();
    assert_eq!(
        unsafe { ms_adequacy(pair, &cfg, &mut ad) },
        MsStatus::InvalidInput
    );
    unsafe { ms_pair_free(pair) };
}

#[test]
fn pair_from_json() {
    let json = CString::new(
        r#"{"n": 2, "V": {"rows": 2, "cols": 1, "entries": [[1, 0], [0, 0]]},
            "W": {"rows": 2, "cols": 1, "entries": [[0, 0], [1, 0]]}}"#,
    )
    .unwrap();
    let mut pair = ptr::null_mut();
    assert_eq!(
        unsafe { ms_pair_from_json(json.as_ptr(), &mut pair) },
        MsStatus::Ok
    );
    // Disjoint coordinate axes are as far from a support as possible.
    let mut fw = MsOracle::default();
    assert_eq!(
        unsafe { ms_oracle(pair, 1e-9, 1000, &mut fw) },
        MsStatus::Ok
    );
    assert!((fw.delta - 2.0).abs() < 1e-12);
    unsafe { ms_pair_free(pair) };

    let bad = CString::new("{").unwrap();
    assert_eq!(
        unsafe { ms_pair_from_json(bad.as_ptr(), &mut pair) },
        MsStatus::InvalidInput
    );
    assert!(pair.is_null());
}

#[test]
fn hadamard_square_rows() {
    let m = [z(H, 0.0), z(0.0, H), z(0.0, 0.0), z(1.0, 0.0)];
    let mut out = [0.0; 2];
    assert_eq!(
        unsafe { ms_hadamard_square(2, 2, m.as_ptr(), out.as_mut_ptr()) },
        MsStatus::Ok
    );
    assert!((out[0] - 0.5).abs() < 1e-15 && (out[1] - 1.5).abs() < 1e-15);
}

#[test]
fn certificate_matches_the_library_on_a3() {
    let fx = appendix_fixture(Appendix::A3);
    let flat = |m: &minsupport::linalg::CMat| m.iter().map(|e| z(e.re, e.im)).collect::<Vec<_>>();
    let (columns, w) = (flat(&fx.columns), flat(&fx.w));
    let mut x = [0.0; 3];
    let mut cert = MsCertificate::default();
    let st = unsafe {
        ms_support_certificate(3, columns.as_ptr(), w.as_ptr(), x.as_mut_ptr(), &mut cert)
    };
    assert_eq!(st, MsStatus::Ok);
    let expected = fx.certificate(&CertificateConfig::default());
    assert!(cert.valid);
    assert_eq!(cert.det, expected.det);
    assert_eq!(x.to_vec(), expected.solution);

    let st = unsafe {
        ms_support_certificate(3, columns.as_ptr(), w.as_ptr(), ptr::null_mut(), &mut cert)
    };
    assert_eq!(st, MsStatus::NullPointer);
}

fn target_dir() -> PathBuf {
    let exe = std::env::current_exe().unwrap();
    exe.parent()
        .and_then(|deps| deps.parent())
        .unwrap()
        .to_path_buf()
}

#[test]
fn header_compiles_and_links_from_c() {
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let header = manifest.join("include/minsupport.h");
    let text = std::fs::read_to_string(&header).expect("header is generated by the build script");
    for f in [
        "ms_pair_new",
        "ms_pair_from_json",
        "ms_pair_free",
        "ms_pair_dims",
        "ms_descent_config_default",
        "ms_adequacy",
        "ms_oracle",
        "ms_hadamard_square",
        "ms_support_certificate",
        "ms_last_error",
    ] {
        assert!(text.contains(&format!("{f}(")), "{f} missing from header");
    }

    let lib = target_dir().join("libminsupport_ffi.a");
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    if !lib.exists() || Command::new(&cc).arg("--version").output().is_err() {
        eprintln!("no static library or C compiler; C link check not run");
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("main.c");
    std::fs::write(&src, C_MAIN).unwrap();
    let exe = dir.path().join("main");
    let status = Command::new(&cc)
        .arg(&src)
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success(), "C compilation failed");
    let out = Command::new(&exe).output().unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "ok");
}

const C_MAIN: &str = r#"
#include <math.h>
#include <stdio.h>
#include "minsupport.h"

int main(void) {
    const double h = 0.70710678118654752440;
    MsComplex v[2] = {{h, 0.0}, {h, 0.0}};
    MsComplex w[2] = {{h, 0.0}, {-h, 0.0}};
    MsPair *pair = NULL;
    if (ms_pair_new(2, 1, 1, v, w, 1e-10, &pair) != MS_STATUS_OK) return 1;
    MsDescentConfig cfg = ms_descent_config_default();
    cfg.restarts = 2;
    MsAdequacy res;
    if (ms_adequacy(pair, &cfg, &res) != MS_STATUS_OK) return 2;
    ms_pair_free(pair);
    if (!(res.delta < 1e-10)) return 3;
    if (ms_pair_new(2, 1, 1, v, v, 1e-10, &pair) != MS_STATUS_INVALID_INPUT) return 4;
    if (ms_last_error() == NULL) return 5;
    printf("ok\n");
    return 0;
}
"#;
