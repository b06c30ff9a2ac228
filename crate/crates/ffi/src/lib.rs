//! C ABI for the `mamab` simulator.
//!
//! Every fallible function returns a [`MamabStatus`] and writes its result
//! through an out-pointer. On failure, [`mamab_last_error`] returns a message
//! for the calling thread. Scenarios and results are opaque handles that must
//! be released with their `_free` function. Agent, arm and round numbers are
//! 1-based, as in the scenario files.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use mamab::analysis::{concentration_bound, eta_threshold, expected_samples_bound, performance_measure, BoundParams};
use mamab::scenario::{load_scenario, run_experiment};
use mamab::{run_monte_carlo, AgentId, ArmId, MonteCarloSummary, ScenarioConfig};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MamabStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Config = 3,
    Io = 4,
    Panic = 5,
}

/// A scenario configuration.
pub struct MamabScenario {
    cfg: ScenarioConfig,
}

/// Monte Carlo regret statistics of one scenario.
pub struct MamabResult {
    mc: MonteCarloSummary,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure(MamabStatus, String);

impl From<mamab::Error> for Failure {
    fn from(e: mamab::Error) -> Self {
        use mamab::Error::*;
        let status = match e {
            Io { .. } => MamabStatus::Io,
            Parse { .. } | Config { .. } | UnknownPreset(_) => MamabStatus::Config,
            _ => MamabStatus::InvalidArgument,
        };
        Failure(status, e.to_string())
    }
}

fn invalid(msg: impl Into<String>) -> Failure {
    Failure(MamabStatus::InvalidArgument, msg.into())
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> MamabStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => MamabStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| payload.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".to_string());
            set_last_error(format!("internal panic: {msg}"));
            MamabStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref()
        .ok_or_else(|| Failure(MamabStatus::NullPointer, format!("{what} is null")))
}

unsafe fn deref_mut<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut()
        .ok_or_else(|| Failure(MamabStatus::NullPointer, format!("{what} is null")))
}

unsafe fn write_out<T>(out: *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure(MamabStatus::NullPointer, "output pointer is null".into()));
    }
    out.write(value);
    Ok(())
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure(MamabStatus::NullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| invalid(format!("{what} is not valid UTF-8")))
}

fn agent_arg(number: usize, num_agents: usize) -> Result<AgentId, Failure> {
    AgentId::from_number(number)
        .filter(|a| a.index() < num_agents)
        .ok_or_else(|| invalid(format!("agent {number} out of range 1..={num_agents}")))
}

fn arm_arg(number: usize, num_arms: usize) -> Result<ArmId, Failure> {
    ArmId::from_number(number)
        .filter(|a| a.index() < num_arms)
        .ok_or_else(|| invalid(format!("arm {number} out of range 1..={num_arms}")))
}

/// Message of the last failed call on this thread, or null. The pointer is
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn mamab_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn mamab_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Loads a preset name or a TOML scenario file.
///
/// # Safety
/// `source` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mamab_scenario_load(source: *const c_char, out: *mut *mut MamabScenario) -> MamabStatus {
    guard(|| {
        let source = str_arg(source, "source")?;
        let cfg = load_scenario(source)?;
        cfg.build()?;
        write_out(out, Box::into_raw(Box::new(MamabScenario { cfg })))
    })
}

/// Parses a scenario from TOML text.
///
/// # Safety
/// `toml` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mamab_scenario_from_toml(toml: *const c_char, out: *mut *mut MamabScenario) -> MamabStatus {
    guard(|| {
        let text = str_arg(toml, "toml")?;
        let cfg = ScenarioConfig::from_toml_str(text, "<toml>")?;
        cfg.build()?;
        write_out(out, Box::into_raw(Box::new(MamabScenario { cfg })))
    })
}

/// # Safety
/// `scenario` must come from this library and not be used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn mamab_scenario_free(scenario: *mut MamabScenario) {
    if !scenario.is_null() {
        drop(Box::from_raw(scenario));
    }
}

/// # Safety
/// `scenario` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn mamab_scenario_set_seed(scenario: *mut MamabScenario, seed: u64) -> MamabStatus {
    guard(|| {
        deref_mut(scenario, "scenario")?.cfg.seed = seed;
        Ok(())
    })
}

/// # Safety
/// `scenario` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn mamab_scenario_set_runs(scenario: *mut MamabScenario, runs: usize) -> MamabStatus {
    guard(|| {
        if runs == 0 {
            return Err(invalid("runs must be at least 1"));
        }
        deref_mut(scenario, "scenario")?.cfg.runs = runs;
        Ok(())
    })
}

/// # Safety
/// `scenario` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn mamab_scenario_set_horizon(scenario: *mut MamabScenario, horizon: u64) -> MamabStatus {
    guard(|| {
        if horizon == 0 {
            return Err(invalid("horizon must be at least 1"));
        }
        deref_mut(scenario, "scenario")?.cfg.horizon = horizon;
        Ok(())
    })
}

/// # Safety
/// `scenario` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn mamab_scenario_set_zeta(scenario: *mut MamabScenario, zeta: f64) -> MamabStatus {
    guard(|| {
        let s = deref_mut(scenario, "scenario")?;
        let mut cfg = s.cfg.clone();
        cfg.bounds.zeta = zeta;
        cfg.build()?;
        s.cfg = cfg;
        Ok(())
    })
}

/// # Safety
/// `scenario` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mamab_scenario_num_agents(scenario: *const MamabScenario, out: *mut usize) -> MamabStatus {
    guard(|| write_out(out, deref(scenario, "scenario")?.cfg.graph.num_agents()))
}

/// # Safety
/// `scenario` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mamab_scenario_num_arms(scenario: *const MamabScenario, out: *mut usize) -> MamabStatus {
    guard(|| write_out(out, deref(scenario, "scenario")?.cfg.arms.means.len()))
}

/// Performance measure of `agent`. Fails for agents without neighbors.
///
/// # Safety
/// `scenario` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mamab_scenario_performance_measure(
    scenario: *const MamabScenario,
    agent: usize,
    out: *mut f64,
) -> MamabStatus {
    guard(|| {
        let sc = deref(scenario, "scenario")?.cfg.build()?;
        let a = agent_arg(agent, sc.network.num_agents())?;
        write_out(out, performance_measure(&sc.network, a)?)
    })
}

/// Runs the Monte Carlo simulation of a scenario.
///
/// # Safety
/// `scenario` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mamab_run_monte_carlo(
    scenario: *const MamabScenario,
    out: *mut *mut MamabResult,
) -> MamabStatus {
    guard(|| {
        let cfg = &deref(scenario, "scenario")?.cfg;
        let sc = cfg.build()?;
        let mc = run_monte_carlo(&sc.instance, &sc.network, &sc.policies, cfg.horizon, cfg.runs, cfg.seed)?;
        write_out(out, Box::into_raw(Box::new(MamabResult { mc })))
    })
}

/// Runs the full experiment and writes `regret.csv`, `summary.csv` and
/// `report.txt` into `out_dir`.
///
/// # Safety
/// `scenario` must be a live handle; `out_dir` must be a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn mamab_run_experiment(scenario: *const MamabScenario, out_dir: *const c_char) -> MamabStatus {
    guard(|| {
        let cfg = &deref(scenario, "scenario")?.cfg;
        let dir = str_arg(out_dir, "out_dir")?;
        run_experiment(cfg)?.write_to_dir(Path::new(dir))?;
        Ok(())
    })
}

/// # Safety
/// `result` must come from this library and not be used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn mamab_result_free(result: *mut MamabResult) {
    if !result.is_null() {
        drop(Box::from_raw(result));
    }
}

/// # Safety
/// `result` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mamab_result_horizon(result: *const MamabResult, out: *mut u64) -> MamabStatus {
    guard(|| write_out(out, deref(result, "result")?.mc.horizon()))
}

/// # Safety
/// `result` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mamab_result_num_agents(result: *const MamabResult, out: *mut usize) -> MamabStatus {
    guard(|| write_out(out, deref(result, "result")?.mc.num_agents()))
}

fn round_and_agent(mc: &MonteCarloSummary, t: u64, agent: usize) -> Result<AgentId, Failure> {
    if t == 0 || t > mc.horizon() {
        return Err(invalid(format!("round {t} out of range 1..={}", mc.horizon())));
    }
    agent_arg(agent, mc.num_agents())
}

/// Mean cumulative regret of `agent` after round `t`.
///
/// # Safety
/// `result` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mamab_result_mean_regret(
    result: *const MamabResult,
    t: u64,
    agent: usize,
    out: *mut f64,
) -> MamabStatus {
    guard(|| {
        let mc = &deref(result, "result")?.mc;
        let a = round_and_agent(mc, t, agent)?;
        write_out(out, mc.mean_regret(t, a))
    })
}

/// Standard error of the mean cumulative regret of `agent` after round `t`.
///
/// # Safety
/// `result` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mamab_result_stderr_regret(
    result: *const MamabResult,
    t: u64,
    agent: usize,
    out: *mut f64,
) -> MamabStatus {
    guard(|| {
        let mc = &deref(result, "result")?.mc;
        let a = round_and_agent(mc, t, agent)?;
        write_out(out, mc.stderr_regret(t, a))
    })
}

/// Mean number of pulls of `arm` by `agent` over the horizon.
///
/// # Safety
/// `result` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mamab_result_mean_pulls(
    result: *const MamabResult,
    agent: usize,
    arm: usize,
    out: *mut f64,
) -> MamabStatus {
    guard(|| {
        let mc = &deref(result, "result")?.mc;
        let a = agent_arg(agent, mc.num_agents())?;
        let i = arm_arg(arm, mc.num_arms())?;
        write_out(out, mc.mean_pulls(a, i))
    })
}

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mamab_gamma_constant(zeta: f64, xi: f64, num_agents: usize, out: *mut f64) -> MamabStatus {
    guard(|| {
        let params = BoundParams::new(zeta, xi, num_agents)?;
        write_out(out, params.gamma())
    })
}

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mamab_eta_threshold(
    sigma: f64,
    gap: f64,
    xi: f64,
    inflation: f64,
    horizon: u64,
    out: *mut f64,
) -> MamabStatus {
    guard(|| write_out(out, eta_threshold(sigma, gap, xi, inflation, horizon)?))
}

/// Bound on the expected number of pulls of an arm with gap `gap`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mamab_expected_samples_bound(
    zeta: f64,
    xi: f64,
    num_agents: usize,
    sigma: f64,
    gap: f64,
    inflation: f64,
    horizon: u64,
    out: *mut f64,
) -> MamabStatus {
    guard(|| {
        let params = BoundParams::new(zeta, xi, num_agents)?;
        write_out(out, expected_samples_bound(&params, sigma, gap, inflation, horizon)?)
    })
}

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mamab_concentration_bound(
    zeta: f64,
    num_agents: usize,
    t: f64,
    delta: f64,
    out: *mut f64,
) -> MamabStatus {
    guard(|| {
        BoundParams::new(zeta, 2.0, num_agents)?;
        if !(t >= 1.0 && delta.is_finite()) {
            return Err(invalid(format!(
                "need t >= 1 and finite delta, got t={t}, delta={delta}"
            )));
        }
        write_out(out, concentration_bound(zeta, num_agents, t, delta))
    })
}
