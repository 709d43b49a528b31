//! C ABI over the simulator. Configurations and campaign summaries cross the
//! boundary as opaque handles; every fallible call returns a [`RemsStatus`]
//! and leaves a message for [`rems_last_error`]. Panics never unwind into C.
//!
//! Ownership: handles from `rems_config_default`, `rems_config_from_toml` and
//! `rems_run_campaign` are released with the matching `*_free`; strings returned through `char **` are released
//! with [`rems_string_free`]. Passing NULL to any `*_free` is a no-op.

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use remshare::config::SimConfig;
use remshare::controllers::{lsa_max_power_at_point, solve_beta};
use remshare::link::{RateMapper, SinrVector};
use remshare::optim::{solve, Goal, PowerProblem};
use remshare::scenario::{Network, Technology};
use remshare::sim::{run_campaign, MetricsSummary};
use remshare::Error;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RemsStatus {
    Ok = 0,
    /// A required pointer argument was NULL.
    NullPointer = 1,
    /// A string argument was not UTF-8.
    InvalidUtf8 = 2,
    /// Configuration or input could not be parsed or failed validation.
    Config = 3,
    /// The interference caps admit no allocation.
    Infeasible = 4,
    /// A numerical solver did not converge.
    Solver = 5,
    /// Any other failure while running.
    Runtime = 6,
    /// A panic was caught at the boundary.
    Panic = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RemsNetwork {
    Outdoor = 0,
    Indoor = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RemsGoal {
    SumPower = 0,
    MaxMin = 1,
    LogSum = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RemsRateMode {
    /// CQI-quantised efficiency per RB.
    Cqi = 0,
    /// Shannon capacity per RB.
    Shannon = 1,
}

/// Per-network statistics of a campaign.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RemsNetworkStats {
    pub mean_rate_bps: f64,
    /// Half-width of the 95% confidence interval over iteration means.
    pub ci95_bps: f64,
    /// 10th percentile of the pooled per-UE mean rates.
    pub p10_rate_bps: f64,
    pub n_ues: usize,
}

/// Opaque simulation configuration.
pub struct RemsConfig {
    inner: SimConfig,
}

/// Opaque campaign result.
pub struct RemsSummary {
    inner: MetricsSummary,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn clear_last_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn status_of(e: &Error) -> RemsStatus {
    match e {
        Error::Config(_) | Error::Parse(_) => RemsStatus::Config,
        Error::Infeasible(_) | Error::EmptyProtection(_) => RemsStatus::Infeasible,
        Error::NonConvergence { .. } => RemsStatus::Solver,
        _ => RemsStatus::Runtime,
    }
}

/// Runs `f`, converting errors and panics into a status plus a last-error message.
fn guard<F>(f: F) -> RemsStatus
where
    F: FnOnce() -> Result<(), (RemsStatus, String)>,
{
    clear_last_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => RemsStatus::Ok,
        Ok(Err((status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".to_string());
            set_last_error(format!("panic: {msg}"));
            RemsStatus::Panic
        }
    }
}

fn lib_err(e: Error) -> (RemsStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(name: &str) -> (RemsStatus, String) {
    (RemsStatus::NullPointer, format!("{name} is NULL"))
}

/// # Safety
/// `p` is NULL or a NUL-terminated string.
unsafe fn read_str<'a>(p: *const c_char, name: &str) -> Result<&'a str, (RemsStatus, String)> {
    if p.is_null() {
        return Err(null(name));
    }
    CStr::from_ptr(p).to_str().map_err(|e| (RemsStatus::InvalidUtf8, format!("{name}: {e}")))
}

/// # Safety
/// `out` is NULL or writable.
unsafe fn write_string(out: *mut *mut c_char, s: String) -> Result<(), (RemsStatus, String)> {
    if out.is_null() {
        return Err(null("out"));
    }
    let c = CString::new(s).map_err(|e| (RemsStatus::Runtime, e.to_string()))?;
    *out = c.into_raw();
    Ok(())
}

/// # Safety
/// `p` is NULL or points to `n` readable doubles.
unsafe fn read_slice<'a>(p: *const f64, n: usize, name: &str) -> Result<&'a [f64], (RemsStatus, String)> {
    if n == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(name));
    }
    Ok(std::slice::from_raw_parts(p, n))
}

/// Message of the last failed call on this thread, or NULL. Valid until the
/// next call into this library on the same thread; do not free.
#[no_mangle]
pub extern "C" fn rems_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static string; do not free.
#[no_mangle]
pub extern "C" fn rems_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Releases a string returned by this library.
///
/// # Safety
/// `s` is NULL or was returned through a `char **` out-parameter of this
/// library and not freed before.
#[no_mangle]
pub unsafe extern "C" fn rems_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// The built-in reference configuration.
#[no_mangle]
pub extern "C" fn rems_config_default() -> *mut RemsConfig {
    Box::into_raw(Box::new(RemsConfig { inner: SimConfig::default() }))
}

/// Parses a TOML document; `*out` receives a new handle on success.
///
/// # Safety
/// `text` is a NUL-terminated string and `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn rems_config_from_toml(text: *const c_char, out: *mut *mut RemsConfig) -> RemsStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let text = read_str(text, "text")?;
        let inner = SimConfig::from_toml_str(text, &[]).map_err(lib_err)?;
        *out = Box::into_raw(Box::new(RemsConfig { inner }));
        Ok(())
    })
}

/// Applies one dotted `key=value` assignment, e.g. `campaign.iterations=20`.
/// The configuration is unchanged when the result does not validate.
///
/// # Safety
/// `config` is a live handle and `assignment` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn rems_config_set(config: *mut RemsConfig, assignment: *const c_char) -> RemsStatus {
    guard(|| {
        let cfg = config.as_mut().ok_or_else(|| null("config"))?;
        let assignment = read_str(assignment, "assignment")?;
        let next = SimConfig::from_toml_str(&cfg.inner.to_toml_string(), &[assignment.to_string()]).map_err(lib_err)?;
        cfg.inner = next;
        Ok(())
    })
}

/// The resolved configuration as TOML.
///
/// # Safety
/// `config` is a live handle and `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn rems_config_to_toml(config: *const RemsConfig, out: *mut *mut c_char) -> RemsStatus {
    guard(|| {
        let cfg = config.as_ref().ok_or_else(|| null("config"))?;
        write_string(out, cfg.inner.to_toml_string())
    })
}

/// Hex SHA-256 of the resolved configuration.
///
/// # Safety
/// `config` is a live handle and `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn rems_config_hash(config: *const RemsConfig, out: *mut *mut c_char) -> RemsStatus {
    guard(|| {
        let cfg = config.as_ref().ok_or_else(|| null("config"))?;
        write_string(out, cfg.inner.hash())
    })
}

/// # Safety
/// `config` is NULL or a handle not freed before.
#[no_mangle]
pub unsafe extern "C" fn rems_config_free(config: *mut RemsConfig) {
    if !config.is_null() {
        drop(Box::from_raw(config));
    }
}

/// Runs a full Monte Carlo campaign; `*out` receives a new summary handle.
///
/// # Safety
/// `config` is a live handle and `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn rems_run_campaign(config: *const RemsConfig, out: *mut *mut RemsSummary) -> RemsStatus {
    guard(|| {
        let cfg = config.as_ref().ok_or_else(|| null("config"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let inner = run_campaign(&cfg.inner).map_err(lib_err)?;
        *out = Box::into_raw(Box::new(RemsSummary { inner }));
        Ok(())
    })
}

/// # Safety
/// `summary` is a live handle and `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn rems_summary_network(
    summary: *const RemsSummary,
    network: RemsNetwork,
    out: *mut RemsNetworkStats,
) -> RemsStatus {
    guard(|| {
        let s = summary.as_ref().ok_or_else(|| null("summary"))?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let n = s.inner.network(match network {
            RemsNetwork::Outdoor => Network::Outdoor,
            RemsNetwork::Indoor => Network::Indoor,
        });
        *out = RemsNetworkStats {
            mean_rate_bps: n.mean_rate_bps,
            ci95_bps: n.ci95_bps,
            p10_rate_bps: n.p10_rate_bps,
            n_ues: n.n_ues,
        };
        Ok(())
    })
}

/// Time-averaged mean indoor BS transmit power, mW.
///
/// # Safety
/// `summary` is a live handle and `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn rems_summary_indoor_power_mw(summary: *const RemsSummary, out: *mut f64) -> RemsStatus {
    guard(|| {
        let s = summary.as_ref().ok_or_else(|| null("summary"))?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = s.inner.mean_indoor_power_mw;
        Ok(())
    })
}

/// The full summary, per-UE samples included, as JSON.
///
/// # Safety
/// `summary` is a live handle and `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn rems_summary_to_json(summary: *const RemsSummary, out: *mut *mut c_char) -> RemsStatus {
    guard(|| {
        let s = summary.as_ref().ok_or_else(|| null("summary"))?;
        let json = serde_json::to_string(&s.inner).map_err(|e| (RemsStatus::Runtime, e.to_string()))?;
        write_string(out, json)
    })
}

/// # Safety
/// `summary` is NULL or a handle not freed before.
#[no_mangle]
pub unsafe extern "C" fn rems_summary_free(summary: *mut RemsSummary) {
    if !summary.is_null() {
        drop(Box::from_raw(summary));
    }
}

/// Indoor powers maximising `goal` subject to `W p <= i_max` and
/// `0 <= p <= p_max`. `w` is row-major with `n_points` rows of `n_bs`
/// gains; `p_out` receives `n_bs` powers in mW and `objective_out`, when not
/// NULL, the goal value.
///
/// # Safety
/// `w` holds `n_points * n_bs` doubles, `i_max` holds `n_points`, `p_out`
/// has room for `n_bs`.
#[no_mangle]
pub unsafe extern "C" fn rems_solve_power(
    w: *const f64,
    n_points: usize,
    n_bs: usize,
    i_max: *const f64,
    p_max: f64,
    goal: RemsGoal,
    p_out: *mut f64,
    objective_out: *mut f64,
) -> RemsStatus {
    guard(|| {
        let flat = read_slice(
            w,
            n_points.checked_mul(n_bs).ok_or_else(|| (RemsStatus::Config, "size overflow".into()))?,
            "w",
        )?;
        let caps = read_slice(i_max, n_points, "i_max")?;
        if p_out.is_null() && n_bs > 0 {
            return Err(null("p_out"));
        }
        let rows =
            if n_bs == 0 { vec![Vec::new(); n_points] } else { flat.chunks(n_bs).map(<[f64]>::to_vec).collect() };
        let goal = match goal {
            RemsGoal::SumPower => Goal::SumPower,
            RemsGoal::MaxMin => Goal::MaxMin,
            RemsGoal::LogSum => Goal::LogSum,
        };
        let problem = PowerProblem::new(rows, caps.to_vec(), p_max, goal).map_err(lib_err)?;
        let sol = solve(&problem).map_err(lib_err)?;
        if n_bs > 0 {
            std::slice::from_raw_parts_mut(p_out, n_bs).copy_from_slice(&sol.p_tx);
        }
        if let Some(o) = objective_out.as_mut() {
            *o = sol.objective_value;
        }
        Ok(())
    })
}

/// Largest factor on the cross-network interference that keeps the full-band
/// rate at `psi_percent` of its value without that interference, in dB.
/// Per-RB powers are in mW; `rb_bandwidth_hz` is the RB width; `is_5g`
/// non-zero applies the 5G rate factor.
///
/// # Safety
/// Each of `signal`, `noise`, `i_in`, `i_out` holds `n_rb` doubles and
/// `beta_db_out` is writable.
#[no_mangle]
pub unsafe extern "C" fn rems_solve_beta(
    signal: *const f64,
    noise: *const f64,
    i_in: *const f64,
    i_out: *const f64,
    n_rb: usize,
    psi_percent: f64,
    rb_bandwidth_hz: f64,
    mode: RemsRateMode,
    is_5g: c_int,
    beta_db_out: *mut f64,
) -> RemsStatus {
    guard(|| {
        let out = beta_db_out.as_mut().ok_or_else(|| null("beta_db_out"))?;
        if !(psi_percent > 0.0 && psi_percent <= 100.0) {
            return Err((RemsStatus::Config, format!("psi_percent must lie in (0, 100], got {psi_percent}")));
        }
        if rb_bandwidth_hz.is_nan() || rb_bandwidth_hz <= 0.0 {
            return Err((RemsStatus::Config, "rb_bandwidth_hz must be positive".into()));
        }
        let sv = SinrVector {
            signal: read_slice(signal, n_rb, "signal")?.to_vec(),
            noise: read_slice(noise, n_rb, "noise")?.to_vec(),
            i_in: read_slice(i_in, n_rb, "i_in")?.to_vec(),
            i_out: read_slice(i_out, n_rb, "i_out")?.to_vec(),
        };
        let mapper = match mode {
            RemsRateMode::Cqi => RateMapper::narrowband(rb_bandwidth_hz),
            RemsRateMode::Shannon => RateMapper::shannon(rb_bandwidth_hz),
        };
        let tech = if is_5g != 0 { Technology::Nr } else { Technology::Lte };
        *out = solve_beta(&sv, psi_percent, &mapper, tech).beta_db;
        Ok(())
    })
}

/// Largest indoor transmit power, dBm, that keeps the received power at a
/// protected point `gamma_db` below the thermal noise in `bandwidth_hz`,
/// given the pathloss `pl_db` and transmit antenna gain `g_tx_dbi`.
#[no_mangle]
pub extern "C" fn rems_lsa_max_power_at_point(gamma_db: f64, bandwidth_hz: f64, g_tx_dbi: f64, pl_db: f64) -> f64 {
    lsa_max_power_at_point(gamma_db, bandwidth_hz, g_tx_dbi, pl_db)
}
