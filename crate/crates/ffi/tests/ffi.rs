//! Exercises the C ABI from Rust and from a compiled C program.

use std::ffi::{c_char, CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use randjoin_ffi::*;

fn c(s: &str) -> CString {
    CString::new(s).unwrap()
}

unsafe fn take(s: *mut c_char) -> String {
    let out = CStr::from_ptr(s).to_str().unwrap().to_owned();
    rj_string_free(s);
    out
}

unsafe fn last_error() -> String {
    CStr::from_ptr(rj_last_error_message()).to_str().unwrap().to_owned()
}

unsafe fn schedule_012() -> *mut RjSchedule {
    let levels = [0u64, 1, 2];
    let (num, den) = ([1u64, 1, 1], [2u64, 4, 9]);
    let mut s = ptr::null_mut();
    assert_eq!(
        rj_schedule_new(levels.as_ptr(), num.as_ptr(), den.as_ptr(), 3, &mut s),
        RjStatus::Ok
    );
    s
}

#[test]
fn round_trip_through_handles() {
    unsafe {
        let s = schedule_012();
        assert_eq!(rj_schedule_horizon(s), 2);
        let mut level = 0;
        assert_eq!(rj_schedule_level(s, 2, &mut level), RjStatus::Ok);
        assert_eq!(level, 2);

        let mut t = ptr::null_mut();
        assert_eq!(rj_tree_generate(s, 0, 1, 0, &mut t), RjStatus::Ok);
        assert_eq!(rj_tree_leaf_count(t), 4);

        let mut ps = ptr::null_mut();
        assert_eq!(rj_system_from_name(s, c("0110101").as_ptr(), &mut ps), RjStatus::Ok);
        assert_eq!(rj_system_height(ps), 2);

        let mut y = ptr::null_mut();
        let empty = c("");
        assert_eq!(
            rj_encode(ps, t, c("10").as_ptr(), empty.as_ptr(), empty.as_ptr(), &mut y),
            RjStatus::Ok
        );
        let y = take(y);
        let mut z = ptr::null_mut();
        assert_eq!(
            rj_decode(ps, c(&y).as_ptr(), empty.as_ptr(), empty.as_ptr(), &mut z),
            RjStatus::Ok
        );
        assert_eq!(take(z), "10");

        let mut n0 = -2;
        assert_eq!(rj_find_n0(ps, t, &mut n0), RjStatus::Ok);
        assert_eq!(n0, 0);

        rj_system_free(ps);
        rj_tree_free(t);
        rj_schedule_free(s);
    }
}

#[test]
fn trees_prune_measure_and_serialize() {
    unsafe {
        let levels = [0u64, 2];
        let (num, den) = ([1u64, 1], [2u64, 2]);
        let mut s = ptr::null_mut();
        assert_eq!(
            rj_schedule_new(levels.as_ptr(), num.as_ptr(), den.as_ptr(), 2, &mut s),
            RjStatus::Ok
        );
        let mut t = ptr::null_mut();
        assert_eq!(rj_tree_parse(c("L=2\n00\n01\n").as_ptr(), &mut t), RjStatus::Ok);
        let (mut m, mut e) = (0u64, 0u32);
        assert_eq!(rj_tree_measure(t, &mut m, &mut e), RjStatus::Ok);
        assert_eq!((m, e), (1, 1));

        // density 1/2 at the root is not above q_0 = 1/2
        let mut p = ptr::null_mut();
        assert_eq!(rj_tree_prune(t, s, &mut p), RjStatus::Ok);
        assert_eq!(rj_tree_leaf_count(p), 0);
        let mut text = ptr::null_mut();
        assert_eq!(rj_tree_to_text(t, &mut text), RjStatus::Ok);
        assert_eq!(take(text), "L=2\n00\n01\n");

        let mut ps = ptr::null_mut();
        assert_eq!(rj_system_sample(s, 1, 42, &mut ps), RjStatus::Ok);
        let mut text = ptr::null_mut();
        assert_eq!(rj_system_to_text(ps, &mut text), RjStatus::Ok);
        assert!(take(text).starts_with("h=1;schedule=0,2\n"));

        let mut y = ptr::null_mut();
        let empty = c("");
        let mut failures = 0;
        for z in ["0", "1"] {
            match rj_encode(ps, t, c(z).as_ptr(), empty.as_ptr(), empty.as_ptr(), &mut y) {
                RjStatus::Ok => rj_string_free(y),
                RjStatus::CodingFailure => failures += 1,
                other => panic!("{other:?}"),
            }
        }
        assert!(failures <= 1);

        rj_system_free(ps);
        rj_tree_free(p);
        rj_tree_free(t);
        rj_schedule_free(s);
    }
}

#[test]
fn errors_carry_codes_and_messages() {
    unsafe {
        let mut s = ptr::null_mut();
        assert_eq!(
            rj_schedule_from_kind(c("cubic").as_ptr(), 3, &mut s),
            RjStatus::InvalidArgument
        );
        assert!(last_error().contains("cubic"));
        assert_eq!(
            rj_schedule_from_kind(c("nlogn").as_ptr(), 4, ptr::null_mut()),
            RjStatus::NullPointer
        );
        assert_eq!(
            rj_schedule_from_kind(c("exponential").as_ptr(), 3, &mut s),
            RjStatus::Ok
        );
        assert_eq!(last_error(), "");

        let mut t = ptr::null_mut();
        assert_eq!(rj_tree_parse(c("L=2\n10\n01\n").as_ptr(), &mut t), RjStatus::Parse);
        assert!(last_error().contains("line 3"), "{}", last_error());

        let s012 = schedule_012();
        let mut ps = ptr::null_mut();
        assert_eq!(rj_system_from_name(s012, c("0110101").as_ptr(), &mut ps), RjStatus::Ok);
        let mut z = ptr::null_mut();
        let empty = c("");
        assert_eq!(
            rj_decode(ps, c("101").as_ptr(), empty.as_ptr(), empty.as_ptr(), &mut z),
            RjStatus::InvalidArgument
        );
        assert!(last_error().contains("expected one of [0, 1, 2]"), "{}", last_error());
        assert_eq!(
            rj_decode(ps, c("1x").as_ptr(), empty.as_ptr(), empty.as_ptr(), &mut z),
            RjStatus::InvalidArgument
        );

        let mut p = ptr::null_mut();
        assert_eq!(rj_hypergeom_zero_prob(4, 2, 2, &mut p), RjStatus::Ok);
        assert_eq!(take(p), "1/6");
        assert_eq!(rj_hypergeom_zero_prob(4, 5, 2, &mut p), RjStatus::InvalidArgument);

        rj_schedule_free(ptr::null_mut());
        rj_system_free(ps);
        rj_schedule_free(s012);
        rj_schedule_free(s);
        assert_eq!(
            CStr::from_ptr(rj_version()).to_str().unwrap(),
            env!("CARGO_PKG_VERSION")
        );
    }
}

/// `target/<profile>` of the running test binary.
fn profile_dir() -> PathBuf {
    let exe = std::env::current_exe().unwrap();
    exe.parent().unwrap().parent().unwrap().to_path_buf()
}

#[test]
fn c_program_links_against_the_static_library() {
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let header = manifest.join("include").join("randjoin.h");
    assert!(header.exists(), "generated header missing");
    let lib = profile_dir().join("librandjoin_ffi.a");
    assert!(lib.exists(), "static library missing at {}", lib.display());
    let out = tempfile::tempdir().unwrap();
    let exe = out.path().join("smoke");
    let status = Command::new("cc")
        .arg(manifest.join("tests/c/smoke.c"))
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .expect("a C compiler is on PATH");
    assert!(status.success(), "C compile failed");
    let run = Command::new(&exe).output().unwrap();
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    assert!(String::from_utf8_lossy(&run.stdout).starts_with("y="));
}
