use std::ffi::{CStr, CString};
use std::ptr;

use remshare_ffi::*;

fn last_error() -> String {
    let p = rems_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn set(cfg: *mut RemsConfig, kv: &str) -> RemsStatus {
    let c = CString::new(kv).unwrap();
    unsafe { rems_config_set(cfg, c.as_ptr()) }
}

#[test]
fn small_campaign_round_trip() {
    let cfg = rems_config_default();
    for kv in ["campaign.iterations=2", "campaign.horizon_ms=60", "scheme=modified_lsa"] {
        assert_eq!(set(cfg, kv), RemsStatus::Ok, "{kv}");
    }
    let mut summary = ptr::null_mut();
    assert_eq!(unsafe { rems_run_campaign(cfg, &mut summary) }, RemsStatus::Ok);
    assert!(!summary.is_null());

    let mut out = RemsNetworkStats::default();
    assert_eq!(unsafe { rems_summary_network(summary, RemsNetwork::Outdoor, &mut out) }, RemsStatus::Ok);
    assert!(out.mean_rate_bps > 0.0 && out.n_ues > 0);
    let mut power = -1.0;
    assert_eq!(unsafe { rems_summary_indoor_power_mw(summary, &mut power) }, RemsStatus::Ok);
    assert!(power >= 0.0);

    let mut json = ptr::null_mut();
    assert_eq!(unsafe { rems_summary_to_json(summary, &mut json) }, RemsStatus::Ok);
    let text = unsafe { CStr::from_ptr(json) }.to_str().unwrap().to_owned();
    assert!(text.contains("\"modified_lsa\""), "{text}");
    unsafe {
        rems_string_free(json);
        rems_summary_free(summary);
        rems_config_free(cfg);
    }
}

#[test]
fn identical_configs_hash_identically() {
    let a = rems_config_default();
    let mut toml = ptr::null_mut();
    assert_eq!(unsafe { rems_config_to_toml(a, &mut toml) }, RemsStatus::Ok);
    let mut b = ptr::null_mut();
    assert_eq!(unsafe { rems_config_from_toml(toml, &mut b) }, RemsStatus::Ok);
    let (mut ha, mut hb) = (ptr::null_mut(), ptr::null_mut());
    unsafe {
        assert_eq!(rems_config_hash(a, &mut ha), RemsStatus::Ok);
        assert_eq!(rems_config_hash(b, &mut hb), RemsStatus::Ok);
        assert_eq!(CStr::from_ptr(ha), CStr::from_ptr(hb));
        assert_eq!(CStr::from_ptr(ha).to_bytes().len(), 64);
        for s in [toml, ha, hb] {
            rems_string_free(s);
        }
        rems_config_free(a);
        rems_config_free(b);
    }
}

#[test]
fn errors_map_to_status_codes() {
    let cfg = rems_config_default();
    assert_eq!(set(cfg, "campaign.nope=3"), RemsStatus::Config);
    assert!(last_error().contains("nope"));
    assert_eq!(set(cfg, "campaign.iterations=0"), RemsStatus::Config);
    // a rejected assignment leaves the handle untouched
    assert_eq!(set(cfg, "campaign.iterations=3"), RemsStatus::Ok);
    assert!(rems_last_error().is_null());

    let bad = CString::new("[campaign\n").unwrap();
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { rems_config_from_toml(bad.as_ptr(), &mut out) }, RemsStatus::Config);
    assert!(out.is_null());

    let invalid = [0xffu8, 0xfe, 0];
    assert_eq!(unsafe { rems_config_set(cfg, invalid.as_ptr().cast()) }, RemsStatus::InvalidUtf8);
    assert_eq!(unsafe { rems_config_set(cfg, ptr::null()) }, RemsStatus::NullPointer);
    assert_eq!(unsafe { rems_run_campaign(ptr::null(), &mut ptr::null_mut()) }, RemsStatus::NullPointer);
    assert_eq!(unsafe { rems_run_campaign(cfg, ptr::null_mut()) }, RemsStatus::NullPointer);
    unsafe {
        rems_config_free(cfg);
        rems_config_free(ptr::null_mut());
        rems_summary_free(ptr::null_mut());
        rems_string_free(ptr::null_mut());
    }
}

#[test]
fn solve_power_matches_small_instances() {
    // W = [[1, 0.01]], cap 1: sum power parks everything on the weak coupler
    let w = [1.0, 0.01];
    let cap = [1.0];
    let mut p = [f64::NAN; 2];
    let mut obj = f64::NAN;
    let st = unsafe {
        rems_solve_power(w.as_ptr(), 1, 2, cap.as_ptr(), 125.89, RemsGoal::SumPower, p.as_mut_ptr(), &mut obj)
    };
    assert_eq!(st, RemsStatus::Ok);
    assert!(p[0].abs() < 1e-9 && (p[1] - 100.0).abs() < 1e-9, "{p:?}");
    assert!((obj - 100.0).abs() < 1e-9);

    let w = [1.0, 1.0];
    for goal in [RemsGoal::MaxMin, RemsGoal::LogSum] {
        let st =
            unsafe { rems_solve_power(w.as_ptr(), 1, 2, cap.as_ptr(), 125.89, goal, p.as_mut_ptr(), ptr::null_mut()) };
        assert_eq!(st, RemsStatus::Ok);
        assert!((p[0] - 0.5).abs() < 1e-6 && (p[1] - 0.5).abs() < 1e-6, "{goal:?} {p:?}");
    }

    let neg = [-1.0];
    let st = unsafe {
        rems_solve_power(w.as_ptr(), 1, 2, neg.as_ptr(), 125.89, RemsGoal::SumPower, p.as_mut_ptr(), ptr::null_mut())
    };
    assert_eq!(st, RemsStatus::Infeasible);
    let st = unsafe {
        rems_solve_power(ptr::null(), 1, 2, cap.as_ptr(), 125.89, RemsGoal::SumPower, p.as_mut_ptr(), ptr::null_mut())
    };
    assert_eq!(st, RemsStatus::NullPointer);
}

#[test]
fn solve_beta_scalar_shannon_case() {
    // S = 10, noise + own interference = 1, cross interference 0.1, target 90%
    let (s, n, i_in, i_out) = ([10.0], [1.0], [0.0], [0.1]);
    let mut beta_db = f64::NAN;
    let st = unsafe {
        rems_solve_beta(
            s.as_ptr(),
            n.as_ptr(),
            i_in.as_ptr(),
            i_out.as_ptr(),
            1,
            90.0,
            180e3,
            RemsRateMode::Shannon,
            0,
            &mut beta_db,
        )
    };
    assert_eq!(st, RemsStatus::Ok);
    // 0.9 log2(11) = log2(1 + 10 / (1 + 0.1 b)) solved by hand: b = 3.06382
    assert!((beta_db - 10.0 * 3.06382f64.log10()).abs() < 0.01, "{beta_db}");
    let st = unsafe {
        rems_solve_beta(
            s.as_ptr(),
            n.as_ptr(),
            i_in.as_ptr(),
            i_out.as_ptr(),
            1,
            0.0,
            180e3,
            RemsRateMode::Shannon,
            0,
            &mut beta_db,
        )
    };
    assert_eq!(st, RemsStatus::Config);
}

#[test]
fn lsa_power_is_the_closed_form() {
    let got = rems_lsa_max_power_at_point(-3.0, 20e6, 0.0, 100.0);
    let want = -174.0 + 10.0 * 20e6f64.log10() + 3.0 + 100.0;
    assert!((got - want).abs() < 1e-9);
}

#[test]
fn version_is_the_crate_version() {
    let v = unsafe { CStr::from_ptr(rems_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}
