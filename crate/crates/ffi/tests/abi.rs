use std::ffi::{c_char, CStr, CString};
use std::ptr;

use confhyp_ffi::*;

fn last_error() -> String {
    let p = confhyp_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn take_string(p: *mut c_char) -> String {
    let s = unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned();
    unsafe { confhyp_string_free(p) };
    s
}

const FLAT: &str = "[meta]\ndimension = 4\norder = 3\nmode = exact\n\n[metric]\n1 1 0 0 0 0 1\n2 2 0 0 0 0 1\n3 3 0 0 0 0 1\n4 4 0 0 0 0 1\n\n[defining_function]\n0 0 0 1 1\n";

#[test]
fn parse_verify_and_read_values() {
    let text = CString::new(FLAT).unwrap();
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { confhyp_scenario_parse(text.as_ptr(), &mut s) }, ConfhypStatus::Ok);
    assert_eq!(unsafe { confhyp_scenario_dimension(s) }, 4);

    let mut r = ptr::null_mut();
    assert_eq!(unsafe { confhyp_verify(s, ConfhypMode::Scenario, 1, 0, &mut r) }, ConfhypStatus::Ok);
    assert!(unsafe { confhyp_report_passed(r) });
    let key = CString::new("residual.identity.gauss").unwrap();
    let mut v = f64::NAN;
    assert_eq!(unsafe { confhyp_report_value(r, key.as_ptr(), &mut v) }, ConfhypStatus::Ok);
    assert_eq!(v, 0.0);
    let missing = CString::new("nope").unwrap();
    assert_eq!(unsafe { confhyp_report_value(r, missing.as_ptr(), &mut v) }, ConfhypStatus::NotFound);
    assert!(last_error().contains("nope"));

    let mut out = ptr::null_mut();
    assert_eq!(unsafe { confhyp_report_text(r, &mut out) }, ConfhypStatus::Ok);
    let report = take_string(out);
    assert!(report.contains("status = pass"));
    assert!(!report.contains("timestamp"));

    let mut out = ptr::null_mut();
    assert_eq!(unsafe { confhyp_scenario_to_text(s, &mut out) }, ConfhypStatus::Ok);
    assert!(take_string(out).contains("dimension = 4"));

    unsafe {
        confhyp_report_free(r);
        confhyp_scenario_free(s);
    }
}

#[test]
fn errors_have_codes_and_messages() {
    let bad = CString::new("[meta]\ndimension = 4\norder = x\n").unwrap();
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { confhyp_scenario_parse(bad.as_ptr(), &mut s) }, ConfhypStatus::InvalidInput);
    assert!(last_error().contains("line 3"));
    assert!(s.is_null());

    assert_eq!(unsafe { confhyp_scenario_parse(ptr::null(), &mut s) }, ConfhypStatus::NullPointer);

    assert_eq!(unsafe { confhyp_scenario_generate(5, 4, 1, true, &mut s) }, ConfhypStatus::Ok);
    let iv = CString::new("IV").unwrap();
    let mut r = ptr::null_mut();
    let status = unsafe { confhyp_probe(s, iv.as_ptr(), ConfhypMode::Exact, -1, 1, 0, &mut r) };
    assert_eq!(status, ConfhypStatus::Computation);
    assert!(last_error().contains("d=5"));
    assert!(r.is_null());

    let bogus = CString::new("V").unwrap();
    let status = unsafe { confhyp_probe(s, bogus.as_ptr(), ConfhypMode::Exact, -1, 1, 0, &mut r) };
    assert_eq!(status, ConfhypStatus::InvalidInput);
    unsafe { confhyp_scenario_free(s) };

    // freeing NULL is a no-op
    unsafe {
        confhyp_scenario_free(ptr::null_mut());
        confhyp_report_free(ptr::null_mut());
        confhyp_string_free(ptr::null_mut());
    }
}

#[test]
fn probe_and_enumerate() {
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { confhyp_scenario_generate(4, 4, 2, true, &mut s) }, ConfhypStatus::Ok);
    let ii = CString::new("II").unwrap();
    let mut r = ptr::null_mut();
    let status = unsafe { confhyp_probe(s, ii.as_ptr(), ConfhypMode::Scenario, 3, 2, 7, &mut r) };
    assert_eq!(status, ConfhypStatus::Ok);
    let key = CString::new("probe.II.detected_order").unwrap();
    let mut v = 0.0;
    assert_eq!(unsafe { confhyp_report_value(r, key.as_ptr(), &mut v) }, ConfhypStatus::Ok);
    assert_eq!(v, 1.0);
    unsafe {
        confhyp_report_free(r);
        confhyp_scenario_free(s);
    }
    assert_eq!(confhyp_enumerate_count(3), 2);
    assert_eq!(confhyp_enumerate_count(8), 2);
    assert_eq!(confhyp_enumerate_count(2), -1);
}
