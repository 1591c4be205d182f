use std::ffi::{CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use metacode_ffi::*;

fn c(re: f64, im: f64) -> McComplex {
    McComplex { re, im }
}

fn last_error() -> String {
    let p = mc_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn solve_target_at_design_frequency() {
    let (mut gl0, mut gl1) = (c(0.0, 0.0), c(0.0, 0.0));
    assert_eq!(unsafe { mc_pin_load_reflections(5.8e9, &mut gl0, &mut gl1) }, McStatus::Ok);
    let mut s22 = c(0.0, 0.0);
    let (mut a, mut t) = (0.0, 0.0);
    assert_eq!(unsafe { mc_solve_target(gl0, gl1, &mut s22, &mut a, &mut t) }, McStatus::Ok);
    assert!((-0.73..=-0.71).contains(&s22.re) && (0.0..=0.02).contains(&s22.im), "{s22:?}");

    let (mut g0, mut g1) = (c(0.0, 0.0), c(0.0, 0.0));
    unsafe {
        assert_eq!(mc_gamma1_reduced(a, t, gl0, &mut g0), McStatus::Ok);
        assert_eq!(mc_gamma1_reduced(a, t, gl1, &mut g1), McStatus::Ok);
    }
    assert!((g0.re + g1.re).abs() < 1e-8 && (g0.im + g1.im).abs() < 1e-8);

    // Optional outputs may be null.
    assert_eq!(unsafe { mc_solve_target(gl0, gl1, &mut s22, ptr::null_mut(), ptr::null_mut()) }, McStatus::Ok);
}

#[test]
fn errors_set_status_and_message() {
    let mut s22 = c(0.0, 0.0);
    let st = unsafe { mc_solve_target(c(0.5, 0.0), c(0.5, 0.0), &mut s22, ptr::null_mut(), ptr::null_mut()) };
    assert_eq!(st, McStatus::NoSolution);
    assert!(!last_error().is_empty());

    let st = unsafe { mc_reflection_of_load(c(-377.0, 0.0), &mut s22) };
    assert_eq!(st, McStatus::Singular);

    assert_eq!(unsafe { mc_reflection_of_load(c(50.0, 0.0), ptr::null_mut()) }, McStatus::NullPointer);
    assert!(last_error().contains("gamma"));

    // Success clears the message.
    assert_eq!(unsafe { mc_reflection_of_load(c(377.0, 0.0), &mut s22) }, McStatus::Ok);
    assert!(mc_last_error().is_null());
    assert_eq!((s22.re, s22.im), (0.0, 0.0));
}

#[test]
fn genome_round_trip() {
    let hex = CString::new("0123456789ABCDEF").unwrap();
    let mut bits = 0u64;
    assert_eq!(unsafe { mc_genome_parse(hex.as_ptr(), &mut bits) }, McStatus::Ok);
    assert_eq!(bits, 0x0123_4567_89AB_CDEF);

    let mut buf = [0 as std::ffi::c_char; 17];
    assert_eq!(unsafe { mc_genome_format(bits, buf.as_mut_ptr(), buf.len()) }, McStatus::Ok);
    assert_eq!(unsafe { CStr::from_ptr(buf.as_ptr()) }.to_str().unwrap(), "0123456789ABCDEF");
    assert_eq!(unsafe { mc_genome_format(bits, buf.as_mut_ptr(), 16) }, McStatus::BufferTooSmall);

    let bad = CString::new("XYZ").unwrap();
    assert_eq!(unsafe { mc_genome_parse(bad.as_ptr(), &mut bits) }, McStatus::InvalidArgument);
    assert_eq!(unsafe { mc_genome_parse(ptr::null(), &mut bits) }, McStatus::NullPointer);
}

#[test]
fn oracle_handle() {
    let o = mc_oracle_new();
    let mut buf = vec![c(0.0, 0.0); mc_n_freq()];
    assert_eq!(unsafe { mc_oracle_response(o, 0, buf.as_mut_ptr(), buf.len()) }, McStatus::Ok);
    let expect = metacode::oracle::Oracle::default()
        .genome_response(metacode::pattern::Genome::ZEROS)
        .unwrap();
    for (a, b) in buf.iter().zip(expect.values()) {
        assert_eq!((a.re, a.im), (b.re, b.im));
    }
    assert_eq!(unsafe { mc_oracle_response(o, 0, buf.as_mut_ptr(), 10) }, McStatus::BufferTooSmall);
    assert_eq!(unsafe { mc_oracle_response(ptr::null(), 0, buf.as_mut_ptr(), 61) }, McStatus::NullPointer);

    let mut fp = [0 as std::ffi::c_char; 65];
    assert_eq!(unsafe { mc_oracle_fingerprint(o, fp.as_mut_ptr(), fp.len()) }, McStatus::Ok);
    assert_eq!(unsafe { CStr::from_ptr(fp.as_ptr()) }.to_bytes().len(), 64);

    let (mut bits, mut fit) = (0u64, 0.0);
    let st = unsafe { mc_design_oracle(o, 5.7e9, 5.9e9, 30, 5, 1, &mut bits, &mut fit) };
    assert_eq!(st, McStatus::Ok);
    assert!(fit > 0.0);
    let (mut bits2, mut fit2) = (0u64, 0.0);
    unsafe { mc_design_oracle(o, 5.7e9, 5.9e9, 30, 5, 1, &mut bits2, &mut fit2) };
    assert_eq!((bits, fit), (bits2, fit2));
    assert_eq!(
        unsafe { mc_design_oracle(o, 6e9, 5e9, 30, 5, 1, &mut bits, &mut fit) },
        McStatus::InvalidArgument
    );
    unsafe { mc_oracle_free(o) };
    unsafe { mc_oracle_free(ptr::null_mut()) };
    assert_eq!(mc_n_freq(), 61);
    assert_eq!(mc_grid_freq(30), 5.8e9);
    assert!(mc_grid_freq(61).is_nan());
}

#[test]
fn surrogate_handle() {
    use metacode::surrogate::{init_model, SurrogateArch};
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.bin");
    let model = init_model(&SurrogateArch::new(vec![8]).unwrap(), 3).unwrap();
    model.save(&path).unwrap();

    let cpath = CString::new(path.to_str().unwrap()).unwrap();
    let mut h: *mut McSurrogate = ptr::null_mut();
    assert_eq!(unsafe { mc_surrogate_load(cpath.as_ptr(), &mut h) }, McStatus::Ok);
    let mut buf = vec![c(0.0, 0.0); 61];
    assert_eq!(unsafe { mc_surrogate_predict(h, 42, buf.as_mut_ptr(), 61) }, McStatus::Ok);
    let row = model.forward(&[metacode::pattern::Genome::from_bits(42)]);
    assert_eq!(buf[3].re, row[3]);
    assert_eq!(buf[3].im, row[61 + 3]);
    unsafe { mc_surrogate_free(h) };

    let missing = CString::new(dir.path().join("none").to_str().unwrap()).unwrap();
    let mut h2: *mut McSurrogate = ptr::null_mut();
    assert_eq!(unsafe { mc_surrogate_load(missing.as_ptr(), &mut h2) }, McStatus::Io);
    assert!(h2.is_null());
}

fn header() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("include/metacode.h")
}

#[test]
fn header_declares_api() {
    let h = std::fs::read_to_string(header()).unwrap();
    for sym in [
        "mc_solve_target",
        "mc_gamma1_reduced",
        "mc_oracle_new",
        "mc_oracle_free",
        "mc_surrogate_load",
        "mc_design_oracle",
        "typedef struct McOracle McOracle",
        "MC_STATUS_OK = 0",
    ] {
        assert!(h.contains(sym), "missing {sym}");
    }
}

/// Builds and runs a C program against the header and static library when a
/// C compiler is available.
#[test]
fn c_program_links_and_runs() {
    let exe = std::env::current_exe().unwrap();
    let lib_dir = exe.parent().and_then(|p| p.parent()).unwrap();
    let lib = lib_dir.join("libmetacode_ffi.a");
    if !lib.exists() || Command::new("cc").arg("--version").output().is_err() {
        eprintln!("skipping: no C compiler or static library at {}", lib.display());
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("main.c");
    std::fs::write(
        &src,
        r#"
#include <stdio.h>
#include "metacode.h"
int main(void) {
    McComplex gl0, gl1, s22;
    double a, t;
    if (mc_pin_load_reflections(5.8e9, &gl0, &gl1) != MC_STATUS_OK) return 1;
    if (mc_solve_target(gl0, gl1, &s22, &a, &t) != MC_STATUS_OK) return 2;
    McOracle *o = mc_oracle_new();
    McComplex r[61];
    if (mc_oracle_response(o, 0xFFFFFFFFFFFFFFFFull, r, 61) != MC_STATUS_OK) return 3;
    mc_oracle_free(o);
    if (mc_genome_parse("zz", NULL) != MC_STATUS_INVALID_ARGUMENT) return 4;
    printf("%.4f %.4f\n", s22.re, s22.im);
    return 0;
}
"#,
    )
    .unwrap();
    let bin = dir.path().join("main");
    let status = Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-I"])
        .arg(header().parent().unwrap())
        .arg(&src)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .status()
        .unwrap();
    assert!(status.success());
    let out = Command::new(&bin).output().unwrap();
    assert!(out.status.success(), "{out:?}");
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "-0.7148 0.0133");
}
