use std::ffi::{c_char, CStr, CString};
use std::ptr;

use rigidity_ffi::*;

fn c(s: &str) -> CString {
    CString::new(s).unwrap()
}

fn last_error() -> String {
    let p = rigidity_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn klein(k: usize, rank: usize) -> *mut RigidityRep {
    let mut h = ptr::null_mut();
    assert_eq!(unsafe { rigidity_rep_klein(k, rank, 2.0, 0, &mut h) }, RigidityStatus::Ok);
    assert!(!h.is_null());
    h
}

#[test]
fn klein_jordan_matches_translation_length() {
    let h = klein(2, 2);
    unsafe {
        assert_eq!(rigidity_rep_dim(h), 3);
        assert_eq!(rigidity_rep_rank(h), 2);
        let mut buf = [0.0; 3];
        assert_eq!(rigidity_rep_jordan(h, c("a").as_ptr(), buf.as_mut_ptr(), 3), RigidityStatus::Ok);
        // lambda for SO(1, 2) is (l, 0, -l)
        assert!((buf[0] - 2.0).abs() < 1e-12, "{buf:?}");
        assert!(buf[1].abs() < 1e-12);
        assert!((buf[2] + 2.0).abs() < 1e-12);
        rigidity_rep_free(h);
    }
}

#[test]
fn sym_power_exterior_and_perturb() {
    unsafe {
        let mut s = ptr::null_mut();
        assert_eq!(rigidity_rep_sym_power(4, 2, 2.0, 0, &mut s), RigidityStatus::Ok);
        assert_eq!(rigidity_rep_dim(s), 4);
        let mut buf = [0.0; 4];
        assert_eq!(rigidity_rep_jordan(s, c("ab").as_ptr(), buf.as_mut_ptr(), 4), RigidityStatus::Ok);
        // Sym^3 has Jordan vector (3, 1, -1, -3) times half the translation length
        let t = buf[0] / 3.0;
        for (x, m) in buf.iter().zip([3.0, 1.0, -1.0, -3.0]) {
            assert!((x - m * t).abs() < 1e-9, "{buf:?}");
        }
        let mut e = ptr::null_mut();
        assert_eq!(rigidity_rep_exterior(s, 2, &mut e), RigidityStatus::Ok);
        assert_eq!(rigidity_rep_dim(e), 6);
        let mut je = [0.0; 6];
        assert_eq!(rigidity_rep_jordan(e, c("ab").as_ptr(), je.as_mut_ptr(), 6), RigidityStatus::Ok);
        assert!((je[0] - (buf[0] + buf[1])).abs() < 1e-9);
        let mut p = ptr::null_mut();
        assert_eq!(rigidity_rep_perturb(s, 1e-3, 5, &mut p), RigidityStatus::Ok);
        assert_eq!(rigidity_rep_dim(p), 4);
        for h in [s, e, p] {
            rigidity_rep_free(h);
        }
    }
}

#[test]
fn evaluate_is_normalized_and_buffer_checked() {
    let h = klein(2, 2);
    unsafe {
        let mut buf = [0.0; 9];
        assert_eq!(rigidity_rep_evaluate(h, c("aB").as_ptr(), buf.as_mut_ptr(), 9), RigidityStatus::Ok);
        let norm: f64 = buf.iter().map(|x| x * x).sum::<f64>().sqrt();
        assert!((norm - 1.0).abs() < 1e-12);
        assert_eq!(
            rigidity_rep_evaluate(h, c("a").as_ptr(), buf.as_mut_ptr(), 8),
            RigidityStatus::BufferTooSmall
        );
        assert!(last_error().contains("need 9"));
        rigidity_rep_free(h);
    }
}

#[test]
fn errors_are_reported() {
    let h = klein(2, 2);
    unsafe {
        let mut buf = [0.0; 3];
        assert_eq!(rigidity_rep_jordan(h, c("c").as_ptr(), buf.as_mut_ptr(), 3), RigidityStatus::WordParse);
        assert_eq!(rigidity_rep_jordan(h, c("aA").as_ptr(), buf.as_mut_ptr(), 3), RigidityStatus::WordParse);
        assert_eq!(
            rigidity_rep_jordan(ptr::null(), c("a").as_ptr(), buf.as_mut_ptr(), 3),
            RigidityStatus::NullPointer
        );
        assert_eq!(rigidity_rep_jordan(h, ptr::null(), buf.as_mut_ptr(), 3), RigidityStatus::NullPointer);
        let bad = [0xffu8, 0];
        assert_eq!(
            rigidity_rep_jordan(h, bad.as_ptr() as *const c_char, buf.as_mut_ptr(), 3),
            RigidityStatus::InvalidUtf8
        );
        let mut out = ptr::null_mut();
        assert_eq!(rigidity_rep_klein(2, 2, -1.0, 0, &mut out), RigidityStatus::InvalidArgument);
        assert!(out.is_null());
        assert!(!last_error().is_empty());
        assert_eq!(rigidity_rep_klein(2, 2, 2.0, 0, ptr::null_mut()), RigidityStatus::NullPointer);
        assert_eq!(rigidity_rep_dim(ptr::null()), 0);
        rigidity_rep_free(ptr::null_mut());
        rigidity_string_free(ptr::null_mut());
        rigidity_rep_free(h);
    }
}

#[test]
fn json_round_trip() {
    let h = klein(3, 2);
    unsafe {
        let mut s = ptr::null_mut();
        assert_eq!(rigidity_rep_to_json(h, &mut s), RigidityStatus::Ok);
        let text = CStr::from_ptr(s).to_str().unwrap().to_owned();
        let doc: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(doc["dim"], 4);
        let mut g = ptr::null_mut();
        assert_eq!(rigidity_rep_from_json(s, &mut g), RigidityStatus::Ok);
        rigidity_string_free(s);
        let (mut x, mut y) = ([0.0; 16], [0.0; 16]);
        rigidity_rep_evaluate(h, c("ab").as_ptr(), x.as_mut_ptr(), 16);
        rigidity_rep_evaluate(g, c("ab").as_ptr(), y.as_mut_ptr(), 16);
        for (p, q) in x.iter().zip(&y) {
            assert!((p - q).abs() < 1e-12);
        }
        assert_eq!(rigidity_rep_from_json(c("{").as_ptr(), &mut g), RigidityStatus::Serialization);
        rigidity_rep_free(g);
        rigidity_rep_free(h);
    }
}

#[test]
fn weyl_ratios_are_exact() {
    for (kind, p, want) in [("A", 2, (1, 1)), ("A", 7, (2, 7)), ("C", 3, (2, 5)), ("B", 4, (1, 4)), ("G2", 2, (1, 3))] {
        let (mut n, mut d) = (0i64, 0i64);
        assert_eq!(unsafe { rigidity_weyl_ratio_bound(c(kind).as_ptr(), p, &mut n, &mut d) }, RigidityStatus::Ok);
        assert_eq!((n, d), want, "{kind}({p})");
    }
    let (mut n, mut d) = (0i64, 0i64);
    assert_eq!(
        unsafe { rigidity_weyl_ratio_bound(c("E8").as_ptr(), 8, &mut n, &mut d) },
        RigidityStatus::InvalidArgument
    );
}

#[test]
fn class_counts() {
    let mut n = 0usize;
    assert_eq!(unsafe { rigidity_class_count(2, 3, &mut n) }, RigidityStatus::Ok);
    assert_eq!(n, 24);
    assert_eq!(unsafe { rigidity_class_count(0, 3, &mut n) }, RigidityStatus::InvalidArgument);
}

#[test]
fn header_declares_every_export() {
    let header = include_str!("../include/rigidity.h");
    for name in [
        "rigidity_last_error",
        "rigidity_rep_klein",
        "rigidity_rep_sym_power",
        "rigidity_rep_exterior",
        "rigidity_rep_perturb",
        "rigidity_rep_from_json",
        "rigidity_rep_to_json",
        "rigidity_rep_free",
        "rigidity_string_free",
        "rigidity_rep_dim",
        "rigidity_rep_rank",
        "rigidity_rep_evaluate",
        "rigidity_rep_jordan",
        "rigidity_weyl_ratio_bound",
        "rigidity_class_count",
        "typedef struct RigidityRep RigidityRep",
        "RIGIDITY_STATUS_BUFFER_TOO_SMALL = 8",
    ] {
        assert!(header.contains(name), "{name}");
    }
}

#[test]
fn header_compiles_as_c() {
    let Ok(cc) = std::process::Command::new("cc").arg("--version").output() else {
        return;
    };
    assert!(cc.status.success());
    let header = concat!(env!("CARGO_MANIFEST_DIR"), "/include/rigidity.h");
    let out = std::process::Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-x", "c", header])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn c_program_links_against_the_static_library() {
    // test binaries live in target/<profile>/deps, the library one level up
    let exe = std::env::current_exe().unwrap();
    let lib = exe.parent().and_then(|d| d.parent()).unwrap().join("librigidity_ffi.a");
    if !lib.exists() || std::process::Command::new("cc").arg("--version").output().is_err() {
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let bin = dir.path().join("demo");
    let root = env!("CARGO_MANIFEST_DIR");
    let out = std::process::Command::new("cc")
        .arg(format!("{root}/c/demo.c"))
        .arg(format!("-I{root}/include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let run = std::process::Command::new(&bin).output().unwrap();
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    let text = String::from_utf8(run.stdout).unwrap();
    assert!(text.starts_with("a 2.000000000000 "), "{text}");
    assert!(text.ends_with("A(3) 2/3\n"), "{text}");
}
