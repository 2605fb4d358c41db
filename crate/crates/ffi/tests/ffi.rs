use std::ffi::CStr;
use std::ptr;

use cox_orderflow_ffi::*;

fn params() -> CoxParams {
    CoxParams { sigma: 1.0, mu: 1000.0, horizon: 5.0, bins: 150, p0: 100, seed: 7 }
}

fn last_error() -> String {
    let p = cox_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn simulate_and_estimate_round_trip() {
    unsafe {
        let mut h = ptr::null_mut();
        assert_eq!(cox_response_new(CoxResponseKind::Linear, &mut h), CoxStatus::Ok);
        let mut v = 0.0;
        assert_eq!(cox_response_eval(h, 0.25, &mut v), CoxStatus::Ok);
        assert_eq!(v, 0.5);
        assert_eq!(cox_response_inverse(h, 1.0, &mut v), CoxStatus::Ok);
        assert!((v - 0.5).abs() < 1e-12);

        let p = params();
        let mut rec = ptr::null_mut();
        assert_eq!(cox_simulate(&p, h, 0, &mut rec), CoxStatus::Ok);
        let mut n = 0usize;
        assert_eq!(cox_record_event_count(rec, &mut n), CoxStatus::Ok);
        assert!(n > 3000 && n < 7000, "{n}");

        let mut written = 0usize;
        let mut small = [0.0; 4];
        assert_eq!(
            cox_record_event_times(rec, small.as_mut_ptr(), small.len(), &mut written),
            CoxStatus::BufferTooSmall
        );
        assert_eq!(written, n);
        let mut times = vec![0.0; n];
        assert_eq!(cox_record_event_times(rec, times.as_mut_ptr(), n, &mut written), CoxStatus::Ok);
        assert!(times.windows(2).all(|w| w[0] < w[1]));

        let mut est = ptr::null_mut();
        assert_eq!(cox_estimate_from_record(rec, 150, &mut est), CoxStatus::Ok);
        let mut mu_hat = 0.0;
        assert_eq!(cox_estimate_mu_hat(est, &mut mu_hat), CoxStatus::Ok);
        assert!((mu_hat - n as f64 / 5.0).abs() < 1e-9);
        let mut k = 0usize;
        assert_eq!(cox_estimate_bins(est, &mut k), CoxStatus::Ok);
        assert_eq!(k, 150);

        let mut est2 = ptr::null_mut();
        assert_eq!(cox_estimate_from_events(times.as_ptr(), n, 5.0, 150, &mut est2), CoxStatus::Ok);
        for u in [0.0, 0.3, 0.9] {
            let (mut a, mut b) = (0.0, 0.0);
            assert_eq!(cox_estimate_h(est, u, &mut a), CoxStatus::Ok);
            assert_eq!(cox_estimate_h(est2, u, &mut b), CoxStatus::Ok);
            assert_eq!(a, b);
        }
        let mut y = 0.0;
        assert_eq!(cox_estimate_y(est, 2.5, &mut y), CoxStatus::Ok);
        assert!((0.0..=1.0).contains(&y));
        assert_eq!(cox_estimate_h_inverse(est, 1e9, &mut y), CoxStatus::Ok);
        assert_eq!(y, 1.0);

        cox_estimate_free(est);
        cox_estimate_free(est2);
        cox_record_free(rec);
        cox_response_free(h);
    }
}

#[test]
fn errors_map_to_status_codes() {
    unsafe {
        let mut h = ptr::null_mut();
        assert_eq!(cox_response_new(CoxResponseKind::Cubic, &mut h), CoxStatus::Ok);
        let mut v = 0.0;
        assert_eq!(cox_response_eval(h, 1.0, &mut v), CoxStatus::Domain);
        assert!(last_error().contains("outside"));
        assert_eq!(cox_response_eval(ptr::null(), 0.5, &mut v), CoxStatus::NullPointer);
        assert_eq!(cox_response_eval(h, 0.5, ptr::null_mut()), CoxStatus::NullPointer);

        let mut bad = params();
        bad.sigma = -1.0;
        let mut rec = ptr::null_mut();
        assert_eq!(cox_simulate(&bad, h, 0, &mut rec), CoxStatus::InvalidParams);
        assert!(rec.is_null());

        let times = [0.5, 0.4];
        let mut est = ptr::null_mut();
        assert_eq!(cox_estimate_from_events(times.as_ptr(), 2, 1.0, 2, &mut est), CoxStatus::Domain);
        assert_eq!(cox_estimate_from_events(ptr::null(), 0, 1.0, 2, &mut est), CoxStatus::CannotNormalize);

        let u = [0.0, 1.0];
        let hv = [1.0, 2.0];
        let mut t = ptr::null_mut();
        assert_eq!(cox_response_table(u.as_ptr(), hv.as_ptr(), 2, &mut t), CoxStatus::InvalidResponse);
        let hv = [0.5, 1.5];
        assert_eq!(cox_response_table(u.as_ptr(), hv.as_ptr(), 2, &mut t), CoxStatus::Ok);
        cox_response_free(t);
        cox_response_free(h);
        cox_response_free(ptr::null_mut());
    }
}

#[test]
fn regime_check_through_the_abi() {
    let mut r = CoxRegime {
        intensity_ratio: 0.0,
        coarse_bin_ratio: 0.0,
        sparse_bin_ratio: 0.0,
        passes: true,
        min_bins: 0,
        max_bins: 0,
    };
    let p = params();
    assert_eq!(unsafe { cox_check_regime(&p, &mut r) }, CoxStatus::Ok);
    assert!(r.passes);
    assert!((r.sparse_bin_ratio - 150.0 * 5f64.sqrt() / 1000.0).abs() < 1e-12);
    assert_eq!(r.min_bins, 125);
    assert_eq!(r.max_bins, 447);
}

#[test]
fn generated_header_declares_the_abi() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/cox_orderflow.h")).unwrap();
    for name in [
        "COX_ORDERFLOW_H",
        "typedef struct CoxResponse CoxResponse;",
        "typedef struct CoxRecord CoxRecord;",
        "typedef struct CoxEstimate CoxEstimate;",
        "COX_STATUS_OK = 0",
        "cox_last_error_message",
        "cox_simulate",
        "cox_record_event_times",
        "cox_estimate_from_events",
        "cox_estimate_y",
        "cox_check_regime",
    ] {
        assert!(header.contains(name), "missing {name}");
    }
}
