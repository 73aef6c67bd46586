//! The C entry points driven from Rust as a C caller would.

use std::ffi::{CStr, CString};
use std::ptr;

use macsim_ffi::*;

const QUEUE_CONFIG: &str = r#"{"algorithm":"queue-backoff",
    "adversary_type":{"rho":"1/2","b":3},
    "strategy":{"name":"queue-persistent"},
    "horizon":1000,
    "invariant_checks":true}"#;

fn new_sim(json: &str) -> (MacsimStatus, *mut MacsimSimulation) {
    let json = CString::new(json).unwrap();
    let mut sim = ptr::null_mut();
    let status = unsafe { macsim_simulation_new(json.as_ptr(), &mut sim) };
    (status, sim)
}

fn last_error() -> String {
    let p = macsim_last_error();
    assert!(!p.is_null());
    let s = unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned();
    unsafe { macsim_string_free(p) };
    s
}

#[test]
fn version_is_the_crate_version() {
    let v = unsafe { CStr::from_ptr(macsim_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn step_run_and_read_back() {
    let (status, sim) = new_sim(QUEUE_CONFIG);
    assert_eq!(status, MacsimStatus::Ok);
    unsafe {
        assert_eq!(macsim_simulation_step(sim, 10), MacsimStatus::Ok);
        assert_eq!(macsim_simulation_rounds(sim), 10);
        assert_eq!(macsim_simulation_run(sim), MacsimStatus::Ok);
        assert_eq!(macsim_simulation_rounds(sim), 1000);
        // stepping past the horizon stays at the horizon
        assert_eq!(macsim_simulation_step(sim, 5), MacsimStatus::Ok);
        assert_eq!(macsim_simulation_rounds(sim), 1000);

        let mut m = MacsimMetrics::default();
        assert_eq!(macsim_simulation_metrics(sim, &mut m), MacsimStatus::Ok);
        assert_eq!(m.rounds, 1000);
        assert_eq!(m.max_latency, 8);
        assert_eq!(m.injected, m.heard + m.unheard);

        let mut csv = ptr::null_mut();
        assert_eq!(macsim_simulation_trace_csv(sim, &mut csv), MacsimStatus::Ok);
        let text = CStr::from_ptr(csv).to_string_lossy().into_owned();
        macsim_string_free(csv);
        assert_eq!(text.lines().count(), 1001);

        macsim_simulation_free(sim);
    }
}

#[test]
fn bad_input_is_reported() {
    let (status, sim) = new_sim("{");
    assert_eq!(status, MacsimStatus::InvalidArgument);
    assert!(sim.is_null());
    assert!(!last_error().is_empty());

    let mut out = ptr::null_mut();
    assert_eq!(
        unsafe { macsim_simulation_new(ptr::null(), &mut out) },
        MacsimStatus::NullPointer
    );
    assert_eq!(
        unsafe { macsim_simulation_run(ptr::null_mut()) },
        MacsimStatus::NullPointer
    );
    assert_eq!(unsafe { macsim_simulation_rounds(ptr::null()) }, 0);
    unsafe {
        macsim_simulation_free(ptr::null_mut());
        macsim_string_free(ptr::null_mut());
    }
}

#[test]
fn over_budget_script_fails_with_budget_status() {
    let (status, sim) = new_sim(
        r#"{"algorithm":"counting-backoff",
            "adversary_type":{"rho":"1/4","b":2},
            "strategy":{"name":"scripted","script":[{"round":1,"station":"fresh","packets":3}]}}"#,
    );
    assert_eq!(status, MacsimStatus::BudgetViolation, "{}", last_error());
    assert!(sim.is_null());
}

#[test]
fn bounds_are_exact_fractions() {
    let mut b = MacsimBounds::default();
    let status = unsafe { macsim_bounds(MacsimAlgorithm::CountingBackoff, 1, 4, 3, &mut b) };
    assert_eq!(status, MacsimStatus::Ok);
    // (3b - 3) / (1 - 3 rho) = 6 / (1/4)
    assert_eq!(
        b.latency,
        MacsimBound {
            finite: true,
            numerator: 24,
            denominator: 1
        }
    );
    assert_eq!(
        unsafe { macsim_bounds(MacsimAlgorithm::QuadrupleRound, 1, 2, 3, &mut b) },
        MacsimStatus::Ok
    );
    assert!(!b.latency.finite);
    assert_eq!(
        unsafe { macsim_bounds(MacsimAlgorithm::QueueBackoff, 1, 0, 3, &mut b) },
        MacsimStatus::InvalidArgument
    );
}

#[test]
fn schedules_are_validated_against_every_window() {
    let mut valid = false;
    let ok = [2u64, 1, 0, 0, 1];
    let status = unsafe { macsim_validate_schedule(ok.as_ptr(), ok.len(), 1, 2, 2, &mut valid) };
    assert_eq!(status, MacsimStatus::Ok);
    assert!(valid);
    let bad = [2u64, 1, 1];
    unsafe { macsim_validate_schedule(bad.as_ptr(), bad.len(), 1, 2, 2, &mut valid) };
    assert!(!valid);
    unsafe { macsim_validate_schedule(ptr::null(), 0, 1, 2, 2, &mut valid) };
    assert!(valid);
}

#[test]
fn header_declares_the_exports() {
    let header =
        std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/macsim.h")).unwrap();
    for name in [
        "macsim_simulation_new",
        "macsim_simulation_step",
        "macsim_simulation_free",
        "macsim_bounds",
        "macsim_validate_schedule",
        "MACSIM_STATUS_BUDGET_VIOLATION",
        "typedef struct MacsimSimulation MacsimSimulation",
    ] {
        assert!(header.contains(name), "{name} missing from header");
    }
}
