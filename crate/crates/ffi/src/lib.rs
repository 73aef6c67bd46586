//! C ABI for the macsim simulator.
//!
//! Simulations are opaque handles created from a JSON run configuration.
//! Every fallible call returns a [`MacsimStatus`]; the message of the most
//! recent failure on the calling thread is available through
//! [`macsim_last_error`]. Strings returned by the library are owned by the
//! caller and released with [`macsim_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use macsim::adversary::validate_trace;
use macsim::bounds::{bounds_for, Bound};
use macsim::simulator::write_csv;
use macsim::{compute_metrics, AdversaryType, AlgorithmKind, Error, Rate, RunConfig, Simulation};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MacsimStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    BudgetViolation = 3,
    InvariantViolation = 4,
    Io = 5,
    Panic = 6,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MacsimAlgorithm {
    CountingBackoff = 0,
    QuadrupleRound = 1,
    QueueBackoff = 2,
    AckPersistent = 3,
}

impl From<MacsimAlgorithm> for AlgorithmKind {
    fn from(a: MacsimAlgorithm) -> Self {
        match a {
            MacsimAlgorithm::CountingBackoff => AlgorithmKind::CountingBackoff,
            MacsimAlgorithm::QuadrupleRound => AlgorithmKind::QuadrupleRound,
            MacsimAlgorithm::QueueBackoff => AlgorithmKind::QueueBackoff,
            MacsimAlgorithm::AckPersistent => AlgorithmKind::AckPersistent,
        }
    }
}

/// Summary of the rounds simulated so far.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct MacsimMetrics {
    pub rounds: u64,
    pub injected: u64,
    pub heard: u64,
    /// Largest latency of a heard packet; meaningful when `heard > 0`.
    pub max_latency: u64,
    pub max_queued: u64,
    pub unheard: u64,
    pub silent_rounds: u64,
    pub collision_rounds: u64,
}

/// An exact bound `numerator / denominator`, or unbounded when `finite` is
/// false.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct MacsimBound {
    pub finite: bool,
    pub numerator: i64,
    pub denominator: i64,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct MacsimBounds {
    pub latency: MacsimBound,
    pub queue: MacsimBound,
}

impl From<Bound> for MacsimBound {
    fn from(b: Bound) -> Self {
        match b {
            Bound::Infinite => MacsimBound::default(),
            Bound::Finite(r) => MacsimBound {
                finite: true,
                numerator: *r.numer(),
                denominator: *r.denom(),
            },
        }
    }
}

/// Opaque simulation handle.
pub struct MacsimSimulation {
    inner: Simulation,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> MacsimStatus {
    match e {
        Error::BudgetViolation { .. }
        | Error::WindowViolation { .. }
        | Error::ActivationLimit { .. }
        | Error::InactiveTarget { .. } => MacsimStatus::BudgetViolation,
        Error::Invariant(_) | Error::DuplicateSender(_) => MacsimStatus::InvariantViolation,
        Error::Io(_) | Error::Csv(_) => MacsimStatus::Io,
        _ => MacsimStatus::InvalidArgument,
    }
}

/// Runs `f`, recording any error or panic as the thread's last error.
fn guard(f: impl FnOnce() -> Result<(), MacsimStatus>) -> MacsimStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => MacsimStatus::Ok,
        Ok(Err(status)) => status,
        Err(_) => {
            set_last_error("panic inside macsim".into());
            MacsimStatus::Panic
        }
    }
}

fn fail(e: Error) -> MacsimStatus {
    let status = status_of(&e);
    set_last_error(e.to_string());
    status
}

fn invalid(message: &str) -> MacsimStatus {
    set_last_error(message.into());
    MacsimStatus::InvalidArgument
}

unsafe fn sim_mut<'a>(
    sim: *mut MacsimSimulation,
) -> Result<&'a mut MacsimSimulation, MacsimStatus> {
    if sim.is_null() {
        set_last_error("simulation handle is null".into());
        return Err(MacsimStatus::NullPointer);
    }
    Ok(&mut *sim)
}

fn into_c_string(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " "))
        .unwrap_or_default()
        .into_raw()
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn macsim_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copy of the last error message on this thread, or null if none. Free with
/// [`macsim_string_free`].
#[no_mangle]
pub extern "C" fn macsim_last_error() -> *mut c_char {
    LAST_ERROR.with(|e| match &*e.borrow() {
        Some(c) => c.clone().into_raw(),
        None => ptr::null_mut(),
    })
}

/// # Safety
/// `s` must be null or a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn macsim_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Creates a simulation from a JSON run configuration.
///
/// # Safety
/// `config_json` must be a valid NUL-terminated string and `out` a valid
/// pointer to write the handle to.
#[no_mangle]
pub unsafe extern "C" fn macsim_simulation_new(
    config_json: *const c_char,
    out: *mut *mut MacsimSimulation,
) -> MacsimStatus {
    guard(|| {
        if config_json.is_null() || out.is_null() {
            set_last_error("null argument".into());
            return Err(MacsimStatus::NullPointer);
        }
        *out = ptr::null_mut();
        let text = CStr::from_ptr(config_json)
            .to_str()
            .map_err(|_| invalid("configuration is not UTF-8"))?;
        let config = RunConfig::from_json(text).map_err(fail)?;
        let inner = Simulation::new(config).map_err(fail)?;
        *out = Box::into_raw(Box::new(MacsimSimulation { inner }));
        Ok(())
    })
}

/// # Safety
/// `sim` must be null or a handle from [`macsim_simulation_new`], not yet
/// freed.
#[no_mangle]
pub unsafe extern "C" fn macsim_simulation_free(sim: *mut MacsimSimulation) {
    if !sim.is_null() {
        drop(Box::from_raw(sim));
    }
}

/// Advances the simulation by `rounds` rounds, stopping at the horizon.
///
/// # Safety
/// `sim` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn macsim_simulation_step(
    sim: *mut MacsimSimulation,
    rounds: u64,
) -> MacsimStatus {
    guard(|| {
        let sim = sim_mut(sim)?;
        let target = (sim.inner.trace().len() as u64)
            .saturating_add(rounds)
            .min(sim.inner.config.horizon);
        sim.inner.run_until(target).map_err(fail)
    })
}

/// Runs the simulation to its horizon.
///
/// # Safety
/// `sim` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn macsim_simulation_run(sim: *mut MacsimSimulation) -> MacsimStatus {
    guard(|| sim_mut(sim)?.inner.run_to_horizon().map_err(fail))
}

/// Number of rounds simulated so far; 0 for a null handle.
///
/// # Safety
/// `sim` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn macsim_simulation_rounds(sim: *const MacsimSimulation) -> u64 {
    sim.as_ref().map_or(0, |s| s.inner.trace().len() as u64)
}

/// # Safety
/// `sim` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn macsim_simulation_metrics(
    sim: *const MacsimSimulation,
    out: *mut MacsimMetrics,
) -> MacsimStatus {
    guard(|| {
        let (Some(sim), false) = (sim.as_ref(), out.is_null()) else {
            set_last_error("null argument".into());
            return Err(MacsimStatus::NullPointer);
        };
        let m = compute_metrics(sim.inner.trace());
        *out = MacsimMetrics {
            rounds: m.rounds,
            injected: m.injected,
            heard: m.heard,
            max_latency: m.max_latency.unwrap_or(0),
            max_queued: m.max_queued,
            unheard: m.unheard_count,
            silent_rounds: m.silent_rounds,
            collision_rounds: m.collision_rounds,
        };
        Ok(())
    })
}

/// The trace so far as CSV. Free `*out` with [`macsim_string_free`].
///
/// # Safety
/// `sim` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn macsim_simulation_trace_csv(
    sim: *const MacsimSimulation,
    out: *mut *mut c_char,
) -> MacsimStatus {
    guard(|| {
        let (Some(sim), false) = (sim.as_ref(), out.is_null()) else {
            set_last_error("null argument".into());
            return Err(MacsimStatus::NullPointer);
        };
        let mut buf = Vec::new();
        write_csv(sim.inner.trace(), &mut buf).map_err(fail)?;
        let text = String::from_utf8(buf).map_err(|_| invalid("trace is not UTF-8"))?;
        *out = into_c_string(text);
        Ok(())
    })
}

/// Latency and queue bounds of `algorithm` against type `(p/q, b)`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn macsim_bounds(
    algorithm: MacsimAlgorithm,
    rho_numerator: i64,
    rho_denominator: i64,
    b: u32,
    out: *mut MacsimBounds,
) -> MacsimStatus {
    guard(|| {
        if out.is_null() {
            set_last_error("null argument".into());
            return Err(MacsimStatus::NullPointer);
        }
        let rho = Rate::new(rho_numerator, rho_denominator).map_err(fail)?;
        let t = AdversaryType::new(rho, b).map_err(fail)?;
        let bounds = bounds_for(algorithm.into(), &t).map_err(fail)?;
        *out = MacsimBounds {
            latency: bounds.latency.into(),
            queue: bounds.queue.into(),
        };
        Ok(())
    })
}

/// Checks per-round injection totals `counts[0..len]` (round 1 first)
/// against every window budget of type `(p/q, b)`.
///
/// # Safety
/// `counts` must point to `len` readable values (or be null with `len == 0`)
/// and `valid` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn macsim_validate_schedule(
    counts: *const u64,
    len: usize,
    rho_numerator: i64,
    rho_denominator: i64,
    b: u32,
    valid: *mut bool,
) -> MacsimStatus {
    guard(|| {
        if valid.is_null() || (counts.is_null() && len > 0) {
            set_last_error("null argument".into());
            return Err(MacsimStatus::NullPointer);
        }
        let rho = Rate::new(rho_numerator, rho_denominator).map_err(fail)?;
        let t = AdversaryType::new(rho, b).map_err(fail)?;
        let counts = if len == 0 {
            &[][..]
        } else {
            std::slice::from_raw_parts(counts, len)
        };
        *valid = validate_trace(counts, &t);
        Ok(())
    })
}
