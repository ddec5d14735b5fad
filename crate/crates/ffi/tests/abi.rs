use std::ffi::{CStr, CString};
use std::ptr;

use ptspec_ffi::*;

fn c(s: &str) -> CString {
    CString::new(s).unwrap()
}

fn take(s: *mut std::ffi::c_char) -> String {
    assert!(!s.is_null());
    let out = unsafe { CStr::from_ptr(s) }.to_str().unwrap().to_string();
    unsafe { ptspec_string_free(s) };
    out
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(ptspec_last_error()) }
        .to_str()
        .unwrap()
        .to_string()
}

#[test]
fn jacobi_round_trip() {
    let mut h = ptr::null_mut();
    let st = unsafe { ptspec_jacobi_from_json(c(r#"{"p":2,"a":[1,1],"b":[1,-1]}"#).as_ptr(), &mut h) };
    assert_eq!(st, PtspecStatus::Ok);
    let mut d = 0.0;
    assert_eq!(unsafe { ptspec_jacobi_discriminant(h, 1.0, &mut d) }, PtspecStatus::Ok);
    // Δ(E) = E² − 3 for this operator
    assert!((d - (1.0 - 3.0)).abs() < 1e-12, "{d}");
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { ptspec_jacobi_bands_json(h, &mut s) }, PtspecStatus::Ok);
    let bands: ptspec::BandStructure = serde_json::from_str(&take(s)).unwrap();
    let parts = bands.bands.parts();
    assert_eq!(parts.len(), 2);
    assert!((parts[1].hi - 5f64.sqrt()).abs() < 1e-10);
    unsafe { ptspec_jacobi_free(h) };
}

#[test]
fn errors_are_reported() {
    let mut h = ptr::null_mut();
    let st = unsafe { ptspec_jacobi_from_json(c("{bad").as_ptr(), &mut h) };
    assert_eq!(st, PtspecStatus::InvalidInput);
    assert!(h.is_null());
    assert!(last_error().contains("json"));
    let st = unsafe { ptspec_jacobi_from_json(ptr::null(), &mut h) };
    assert_eq!(st, PtspecStatus::NullPointer);
    let mut d = 0.0;
    assert_eq!(
        unsafe { ptspec_jacobi_discriminant(ptr::null(), 0.0, &mut d) },
        PtspecStatus::NullPointer
    );
    let bad_utf8 = [0xffu8, 0xfe, 0];
    let st = unsafe { ptspec_potential_from_json(bad_utf8.as_ptr().cast(), &mut ptr::null_mut()) };
    assert_eq!(st, PtspecStatus::InvalidUtf8);
    // a success clears the message
    assert_eq!(ptspec_schema_version(), 1);
    let mut p = ptr::null_mut();
    assert_eq!(
        unsafe { ptspec_potential_from_json(c(r#"{"T":2,"breakpoints":[0,1,2],"values":[1,0]}"#).as_ptr(), &mut p) },
        PtspecStatus::Ok
    );
    assert_eq!(last_error(), "");
    unsafe { ptspec_potential_free(p) };
    // freeing null is a no-op
    unsafe {
        ptspec_jacobi_free(ptr::null_mut());
        ptspec_string_free(ptr::null_mut());
    }
}

#[test]
fn potential_norms_and_bands() {
    let mut p = ptr::null_mut();
    let json = c(r#"{"T":2,"breakpoints":[0,1,2],"values":[1,0]}"#);
    assert_eq!(
        unsafe { ptspec_potential_from_json(json.as_ptr(), &mut p) },
        PtspecStatus::Ok
    );
    let (mut b, mut s) = (0.0, 0.0);
    assert_eq!(unsafe { ptspec_potential_norms(p, &mut b, &mut s) }, PtspecStatus::Ok);
    assert!((b - 0.5f64.sqrt()).abs() < 1e-15 && (s - 1.0).abs() < 1e-15);
    let mut out = ptr::null_mut();
    assert_eq!(
        unsafe { ptspec_potential_bands_json(p, 30.0, &mut out) },
        PtspecStatus::Ok
    );
    assert!(take(out).contains("\"parts\""));
    assert_eq!(
        unsafe { ptspec_potential_bands_json(p, f64::NAN, &mut out) },
        PtspecStatus::InvalidInput
    );
    unsafe { ptspec_potential_free(p) };
}

#[test]
fn cmv_and_homogeneity() {
    let mut h = ptr::null_mut();
    let st = unsafe { ptspec_cmv_from_json(c(r#"{"p":2,"alpha":[[0.5,0],[0.5,0]]}"#).as_ptr(), &mut h) };
    assert_eq!(st, PtspecStatus::Ok);
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { ptspec_cmv_bands_json(h, &mut out) }, PtspecStatus::Ok);
    let v: serde_json::Value = serde_json::from_str(&take(out)).unwrap();
    let start = v["arcs"][0][0].as_f64().unwrap();
    assert!((start - std::f64::consts::FRAC_PI_3).abs() < 1e-9, "{start}");
    unsafe { ptspec_cmv_free(h) };

    let st = unsafe { ptspec_certify_homogeneity_json(c(r#"{"parts":[[0,1]]}"#).as_ptr(), 0, 0.9, 0.5, &mut out) };
    assert_eq!(st, PtspecStatus::Ok);
    let r: ptspec::HomogeneityReport = serde_json::from_str(&take(out)).unwrap();
    assert!(r.pass && r.min_density == 1.0);
    let st = unsafe { ptspec_certify_homogeneity_json(c("[[0,1],[2,3]]").as_ptr(), 1, 0.5, 0.1, &mut out) };
    assert_eq!(st, PtspecStatus::Ok);
    take(out);
}

#[test]
fn pt_pipeline() {
    let mut seq = ptr::null_mut();
    let st = unsafe { ptspec_pt_generate(c("jacobi").as_ptr(), 7, 4, ptr::null(), &mut seq) };
    assert_eq!(st, PtspecStatus::Ok);
    let mut n = 0usize;
    assert_eq!(unsafe { ptspec_sequence_len(seq, &mut n) }, PtspecStatus::Ok);
    assert_eq!(n, 4);
    let mut out = ptr::null_mut();
    assert_eq!(
        unsafe { ptspec_step_homogeneity_json(seq, c(r#"{"tau":0.5}"#).as_ptr(), &mut out) },
        PtspecStatus::Ok
    );
    let budget: ptspec::verify::StepHomogeneityBudget = serde_json::from_str(&take(out)).unwrap();
    assert!(budget.pass);
    assert_eq!(
        unsafe { ptspec_semicontinuity_json(seq, f64::NAN, &mut out) },
        PtspecStatus::Ok
    );
    let sc: ptspec::verify::SemicontinuityReport = serde_json::from_str(&take(out)).unwrap();
    assert!(sc.pass);

    // sequence JSON round trip through a second handle
    assert_eq!(unsafe { ptspec_sequence_to_json(seq, &mut out) }, PtspecStatus::Ok);
    let text = take(out);
    let mut back = ptr::null_mut();
    assert_eq!(
        unsafe { ptspec_sequence_from_json(c(&text).as_ptr(), &mut back) },
        PtspecStatus::Ok
    );
    assert_eq!(unsafe { ptspec_sequence_to_json(back, &mut out) }, PtspecStatus::Ok);
    assert_eq!(take(out), text);
    unsafe {
        ptspec_sequence_free(seq);
        ptspec_sequence_free(back);
    }

    let st = unsafe { ptspec_pt_generate(c("banana").as_ptr(), 7, 4, ptr::null(), &mut seq) };
    assert_eq!(st, PtspecStatus::InvalidInput);
    assert!(last_error().contains("banana"));
}

#[test]
fn verify_fit_then_check() {
    let ens = c(r#"{"type":"random_jacobi","count":10,"seed":3}"#);
    let mut out = ptr::null_mut();
    let st = unsafe {
        ptspec_verify_json(
            c("derivative-jacobi").as_ptr(),
            ens.as_ptr(),
            f64::NAN,
            f64::NAN,
            10,
            &mut out,
        )
    };
    assert_eq!(st, PtspecStatus::Ok);
    let fit: ptspec::verify::FitResult = serde_json::from_str(&take(out)).unwrap();
    assert!(fit.pass);
    let st = unsafe {
        ptspec_verify_json(
            c("derivative-jacobi").as_ptr(),
            ens.as_ptr(),
            fit.fitted_value,
            f64::NAN,
            10,
            &mut out,
        )
    };
    assert_eq!(st, PtspecStatus::Ok);
    let again: ptspec::verify::FitResult = serde_json::from_str(&take(out)).unwrap();
    assert_eq!(again.violations, 0);
    let st = unsafe { ptspec_verify_json(c("derivative").as_ptr(), ens.as_ptr(), f64::NAN, 50.0, 10, &mut out) };
    assert_eq!(st, PtspecStatus::InvalidInput);
    let st = unsafe { ptspec_verify_json(c("nope").as_ptr(), ens.as_ptr(), f64::NAN, 50.0, 10, &mut out) };
    assert_eq!(st, PtspecStatus::InvalidInput);
}
