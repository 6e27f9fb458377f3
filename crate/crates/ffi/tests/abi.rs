use std::ptr;

use ernst_theta_ffi::*;

fn last_error() -> String {
    let mut buf = vec![0u8; 256];
    let n = unsafe { et_last_error(buf.as_mut_ptr() as *mut _, buf.len()) };
    buf.truncate(n.min(255));
    String::from_utf8(buf).unwrap()
}

#[test]
fn curve_and_period_matrix() {
    // symmetric genus-1 curve: branch points ±1, ±2 give a purely imaginary modulus
    let branch = [-2.0, 0.0, -1.0, 0.0, 1.0, 0.0, 2.0, 0.0];
    let mut curve = ptr::null_mut();
    unsafe {
        assert_eq!(et_curve_new(branch.as_ptr(), 4, &mut curve), EtStatus::Ok);
        let mut g = 0;
        assert_eq!(et_curve_genus(curve, &mut g), EtStatus::Ok);
        assert_eq!(g, 1);
        let mut b = [0.0; 2];
        assert_eq!(et_curve_period_matrix(curve, b.as_mut_ptr()), EtStatus::Ok);
        assert!(b[1] > 0.0);
        et_curve_free(curve);
    }
}

#[test]
fn curve_errors() {
    let mut curve = ptr::null_mut();
    let odd = [0.0, 0.0, 1.0, 0.0, 2.0, 0.0];
    unsafe {
        assert_eq!(et_curve_new(odd.as_ptr(), 3, &mut curve), EtStatus::OddBranchCount);
        assert!(curve.is_null());
        assert!(last_error().contains("even number"));
        assert_eq!(et_curve_new(ptr::null(), 4, &mut curve), EtStatus::NullPointer);
        assert_eq!(et_curve_new(odd.as_ptr(), 3, ptr::null_mut()), EtStatus::NullPointer);
        et_curve_free(ptr::null_mut());
    }
}

#[test]
fn theta_against_series() {
    let b = [0.0, 1.0];
    let mut th = ptr::null_mut();
    unsafe {
        assert_eq!(et_theta_new(b.as_ptr(), 1, 1e-14, &mut th), EtStatus::Ok);
        let z = [0.0, 0.0];
        let mut v = [0.0; 2];
        assert_eq!(
            et_theta_eval(th, z.as_ptr(), ptr::null(), ptr::null(), v.as_mut_ptr()),
            EtStatus::Ok
        );
        let series: f64 = (-10i32..=10).map(|m| (-std::f64::consts::PI * (m * m) as f64).exp()).sum();
        assert!((v[0] - series).abs() < 1e-14 && v[1].abs() < 1e-15);
        // odd characteristic vanishes at zero
        let half = [0.5, 0.0];
        assert_eq!(
            et_theta_eval(th, z.as_ptr(), half.as_ptr(), half.as_ptr(), v.as_mut_ptr()),
            EtStatus::Ok
        );
        assert!(v[0].hypot(v[1]) < 1e-14);
        et_theta_free(th);

        let bad = [0.0, -1.0];
        assert_eq!(et_theta_new(bad.as_ptr(), 1, 1e-14, &mut th), EtStatus::DivergentContext);
        assert_eq!(et_theta_new(bad.as_ptr(), 0, 1e-14, &mut th), EtStatus::InvalidInput);
    }
}

#[test]
fn solution_values() {
    let pairs = [-1.0, 2.0, -1.0, -2.0];
    let q = [0.0, 0.2];
    let mut sol = ptr::null_mut();
    unsafe {
        assert_eq!(et_solution_new(pairs.as_ptr(), 1, ptr::null(), q.as_ptr(), &mut sol), EtStatus::Ok);
        let mut e = [0.0; 2];
        assert_eq!(et_solution_eval(sol, 0.7, 0.3, e.as_mut_ptr()), EtStatus::Ok);
        assert!(e[0] > 0.0);
        let mut r = 1.0;
        assert_eq!(et_solution_residual(sol, 0.7, 0.3, &mut r), EtStatus::Ok);
        assert!(r < 1e-8);
        let mut m = EtMetric {
            e2u: 0.0,
            a: 0.0,
            k: 0.0,
            mask: 9,
        };
        assert_eq!(et_solution_metric(sol, 0.7, 0.3, 0.0, 1.0, &mut m), EtStatus::Ok);
        assert_eq!(m.mask, 0);
        assert!((m.e2u - e[0]).abs() < 1e-12);
        assert_eq!(et_solution_metric(sol, 0.0, 0.3, 0.0, 1.0, &mut m), EtStatus::OnAxis);
        // ζ = −1 puts the ξ cut on top of the fixed cut
        assert_eq!(et_solution_eval(sol, 0.7, -1.0, e.as_mut_ptr()), EtStatus::CutsIntersect);
        assert_eq!(et_solution_metric(sol, 0.7, -1.0, 0.0, 1.0, &mut m), EtStatus::Ok);
        assert_eq!(m.mask, 2);
        assert!(m.e2u.is_nan());
        et_solution_free(sol);

        let p = [0.0, 0.3];
        let q = [0.2, 0.0];
        assert_eq!(et_solution_new(pairs.as_ptr(), 1, p.as_ptr(), q.as_ptr(), &mut sol), EtStatus::Ok);
        assert_eq!(et_solution_eval(sol, 0.7, 0.3, e.as_mut_ptr()), EtStatus::RealityViolation);
        et_solution_free(sol);
    }
}

#[test]
fn identity_suite() {
    let (mut passed, mut failed) = (0, 0);
    unsafe {
        assert_eq!(et_run_checks(42, 1, &mut passed, &mut failed), EtStatus::Ok);
    }
    assert!(passed > 30);
    assert_eq!(failed, 0);
}

#[test]
fn header_declares_the_abi() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/ernst_theta.h")).unwrap();
    for name in [
        "et_last_error",
        "et_curve_new",
        "et_curve_period_matrix",
        "et_theta_new",
        "et_theta_eval",
        "et_solution_new",
        "et_solution_eval",
        "et_solution_metric",
        "et_run_checks",
        "ET_STATUS_OK = 0",
        "typedef struct EtSolution EtSolution",
    ] {
        assert!(header.contains(name), "{name}");
    }
}
