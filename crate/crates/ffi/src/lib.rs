//! C interface to the `tsvha` library.
//!
//! Every fallible function returns a [`TsvhaStatus`]; on failure a message is
//! available from [`tsvha_last_error`] until the next call on the same thread.
//! Objects are opaque handles released with their matching `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use rand::SeedableRng;
use tsvha::combiner::{self, CombinerSpec};
use tsvha::config::RunConfig;
use tsvha::harness::{self, ExperimentSpec, RegretTrace};
use tsvha::policy::{Policy, PolicySpec, PolicyState};
use tsvha::posterior::PosteriorFamily;
use tsvha::theory::{self, BoundParams, SelectionVariant};
use tsvha::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TsvhaStatus {
    Ok = 0,
    NullPointer = 1,
    Domain = 2,
    Config = 3,
    Io = 4,
    Resource = 5,
    Panic = 6,
    InvalidUtf8 = 7,
    BufferTooSmall = 8,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TsvhaFamily {
    Gaussian = 0,
    Beta = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TsvhaPolicyKind {
    Ts = 0,
    C1 = 1,
    C2 = 2,
    C3 = 3,
    Greedy = 4,
    Sts = 5,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TsvhaVariant {
    Ts = 0,
    C1 = 1,
    C2 = 2,
}

/// A policy, its per-arm state and its own random stream.
pub struct TsvhaPolicy {
    policy: Policy,
    state: PolicyState,
    rng: tsvha::Rng,
    pending_theta: Option<(usize, f64)>,
}

/// A parsed experiment ready to run.
pub struct TsvhaExperiment {
    spec: ExperimentSpec,
}

/// Aggregated traces produced by [`tsvha_experiment_run`].
pub struct TsvhaResult {
    traces: Vec<RegretTrace>,
    labels: Vec<CString>,
}

/// One row of a cumulative-regret trace.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct TsvhaTracePoint {
    pub t: u64,
    pub mean: f64,
    pub std: f64,
    pub q10: f64,
    pub q25: f64,
    pub q50: f64,
    pub q75: f64,
    pub q90: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).unwrap_or_default());
}

fn fail(status: TsvhaStatus, msg: impl Into<String>) -> TsvhaStatus {
    set_error(msg);
    status
}

fn from_error(e: Error) -> TsvhaStatus {
    let status = match &e {
        Error::Domain(_) => TsvhaStatus::Domain,
        Error::Resource(_) => TsvhaStatus::Resource,
        Error::Config(_) | Error::Parse { .. } => TsvhaStatus::Config,
        Error::Io { .. } => TsvhaStatus::Io,
    };
    fail(status, e.to_string())
}

fn guard(f: impl FnOnce() -> TsvhaStatus) -> TsvhaStatus {
    set_error("");
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => fail(TsvhaStatus::Panic, "internal panic"),
    }
}

macro_rules! try_ffi {
    ($e:expr) => {
        match $e {
            Ok(v) => v,
            Err(e) => return from_error(e),
        }
    };
}

macro_rules! non_null {
    ($($p:ident),+) => {
        $(if $p.is_null() {
            return fail(TsvhaStatus::NullPointer, concat!(stringify!($p), " is null"));
        })+
    };
}

unsafe fn str_arg<'a>(p: *const c_char) -> Result<&'a str, TsvhaStatus> {
    if p.is_null() {
        return Err(fail(TsvhaStatus::NullPointer, "string argument is null"));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(TsvhaStatus::InvalidUtf8, "string argument is not UTF-8"))
}

/// Message describing the most recent failure on this thread, or an empty
/// string. Valid until the next library call on the same thread.
#[no_mangle]
pub extern "C" fn tsvha_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

fn write_coefficients(
    coeffs: tsvha::Result<combiner::CoefficientVector>,
    out: *mut f64,
    len: usize,
) -> TsvhaStatus {
    let c = try_ffi!(coeffs);
    if len < c.agents() {
        return fail(
            TsvhaStatus::BufferTooSmall,
            format!("buffer holds {len} values, need {}", c.agents()),
        );
    }
    // SAFETY: caller guarantees `out` points to `len` writable doubles.
    unsafe { ptr::copy_nonoverlapping(c.as_slice().as_ptr(), out, c.agents()) };
    TsvhaStatus::Ok
}

/// Writes the `n` averaging-combiner weights to `out` (capacity `len`).
///
/// # Safety
/// `out` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn tsvha_c1_coefficients(n: usize, out: *mut f64, len: usize) -> TsvhaStatus {
    guard(|| {
        non_null!(out);
        write_coefficients(combiner::c1_coefficients(n), out, len)
    })
}

/// Writes the `n` variance-inflating combiner weights to `out`.
///
/// # Safety
/// `out` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn tsvha_c2_coefficients(n: usize, out: *mut f64, len: usize) -> TsvhaStatus {
    guard(|| {
        non_null!(out);
        write_coefficients(combiner::c2_coefficients(n), out, len)
    })
}

/// Probability that a two-armed Gaussian policy plays arm 1.
///
/// # Safety
/// `out` must be a valid pointer to a double.
#[no_mangle]
pub unsafe extern "C" fn tsvha_selection_probability(
    mu1: f64,
    mu2: f64,
    k1: u64,
    k2: u64,
    variant: TsvhaVariant,
    agents: usize,
    out: *mut f64,
) -> TsvhaStatus {
    guard(|| {
        non_null!(out);
        let v = match variant {
            TsvhaVariant::Ts => SelectionVariant::Ts,
            TsvhaVariant::C1 => SelectionVariant::C1(agents),
            TsvhaVariant::C2 => SelectionVariant::C2(agents),
        };
        *out = try_ffi!(theory::selection_probability(mu1, mu2, k1, k2, v));
        TsvhaStatus::Ok
    })
}

/// Finite-time regret bound for the suboptimal-arm gaps `gaps[0..n_gaps]`.
///
/// # Safety
/// `gaps` must point to `n_gaps` doubles (may be null when `n_gaps` is 0);
/// `out` must be a valid pointer to a double.
#[no_mangle]
pub unsafe extern "C" fn tsvha_theorem1_bound(
    gamma: f64,
    beta: f64,
    epsilon: f64,
    gaps: *const f64,
    n_gaps: usize,
    horizon: u64,
    out: *mut f64,
) -> TsvhaStatus {
    guard(|| {
        non_null!(out);
        let gaps = if n_gaps == 0 {
            Vec::new()
        } else {
            non_null!(gaps);
            std::slice::from_raw_parts(gaps, n_gaps).to_vec()
        };
        let params = BoundParams { gamma, beta, epsilon, gaps, horizon };
        *out = try_ffi!(theory::theorem1_bound(&params));
        TsvhaStatus::Ok
    })
}

/// Creates a policy over `arms` arms with its own seeded stream.
/// `agents` is used by C1 and C2, `epsilon` by STS; both are ignored otherwise.
///
/// # Safety
/// `out` must be a valid pointer; on success it receives a handle owned by
/// the caller.
#[no_mangle]
pub unsafe extern "C" fn tsvha_policy_new(
    kind: TsvhaPolicyKind,
    family: TsvhaFamily,
    agents: usize,
    epsilon: f64,
    arms: usize,
    seed: u64,
    out: *mut *mut TsvhaPolicy,
) -> TsvhaStatus {
    guard(|| {
        non_null!(out);
        *out = ptr::null_mut();
        if arms == 0 {
            return fail(TsvhaStatus::Domain, "a policy needs at least one arm");
        }
        let family = match family {
            TsvhaFamily::Gaussian => PosteriorFamily::Gaussian,
            TsvhaFamily::Beta => PosteriorFamily::Beta,
        };
        let spec = match kind {
            TsvhaPolicyKind::Ts => PolicySpec::ts(family),
            TsvhaPolicyKind::C1 => PolicySpec::tsvha(family, CombinerSpec::c1(agents)),
            TsvhaPolicyKind::C2 => PolicySpec::tsvha(family, CombinerSpec::c2(agents)),
            TsvhaPolicyKind::C3 => PolicySpec::tsvha(family, CombinerSpec::c3()),
            TsvhaPolicyKind::Greedy => PolicySpec::greedy(family),
            TsvhaPolicyKind::Sts => PolicySpec::sts(family, epsilon),
        };
        let policy = try_ffi!(Policy::new(spec));
        let state = policy.initial_state(arms);
        *out = Box::into_raw(Box::new(TsvhaPolicy {
            policy,
            state,
            rng: tsvha::Rng::seed_from_u64(seed),
            pending_theta: None,
        }));
        TsvhaStatus::Ok
    })
}

/// Chooses the arm to play this period.
///
/// # Safety
/// `policy` must be a live handle; `arm` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tsvha_policy_select(policy: *mut TsvhaPolicy, arm: *mut usize) -> TsvhaStatus {
    guard(|| {
        non_null!(policy, arm);
        let p = &mut *policy;
        let (a, theta) = try_ffi!(p.policy.select_arm(&p.state, &mut p.rng));
        p.pending_theta = Some((a, theta));
        *arm = a;
        TsvhaStatus::Ok
    })
}

/// Records the reward observed after playing `arm` and advances one period.
///
/// # Safety
/// `policy` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn tsvha_policy_update(policy: *mut TsvhaPolicy, arm: usize, reward: f64) -> TsvhaStatus {
    guard(|| {
        non_null!(policy);
        let p = &mut *policy;
        if arm >= p.state.arms() {
            return fail(TsvhaStatus::Domain, format!("arm {arm} out of range"));
        }
        let theta = match p.pending_theta.take() {
            Some((a, t)) if a == arm => t,
            _ => f64::NEG_INFINITY,
        };
        let state = std::mem::replace(&mut p.state, PolicyState::from_posteriors(Vec::new(), false));
        match p.policy.step(state.clone(), arm, reward, theta) {
            Ok(next) => {
                p.state = next;
                TsvhaStatus::Ok
            }
            Err(e) => {
                p.state = state;
                from_error(e)
            }
        }
    })
}

/// Number of plays of `arm` so far.
///
/// # Safety
/// `policy` must be a live handle; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tsvha_policy_plays(policy: *const TsvhaPolicy, arm: usize, out: *mut u64) -> TsvhaStatus {
    guard(|| {
        non_null!(policy, out);
        match (&*policy).state.posteriors().get(arm) {
            Some(p) => {
                *out = p.plays();
                TsvhaStatus::Ok
            }
            None => fail(TsvhaStatus::Domain, format!("arm {arm} out of range")),
        }
    })
}

/// # Safety
/// `policy` must be null or a handle from [`tsvha_policy_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn tsvha_policy_free(policy: *mut TsvhaPolicy) {
    if !policy.is_null() {
        drop(Box::from_raw(policy));
    }
}

/// Parses a TOML experiment. Relative table paths resolve against
/// `base_dir`, which may be null for the current directory.
///
/// # Safety
/// `toml` must be a NUL-terminated string, `base_dir` null or one, and `out`
/// a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tsvha_experiment_from_toml(
    toml: *const c_char,
    base_dir: *const c_char,
    out: *mut *mut TsvhaExperiment,
) -> TsvhaStatus {
    guard(|| {
        non_null!(out);
        *out = ptr::null_mut();
        let text = match str_arg(toml) {
            Ok(s) => s,
            Err(s) => return s,
        };
        let base = if base_dir.is_null() {
            "."
        } else {
            match str_arg(base_dir) {
                Ok(s) => s,
                Err(s) => return s,
            }
        };
        let cfg = try_ffi!(RunConfig::parse(text));
        let spec = try_ffi!(cfg.to_spec(Path::new(base)));
        *out = Box::into_raw(Box::new(TsvhaExperiment { spec }));
        TsvhaStatus::Ok
    })
}

/// Runs the experiment with at most `workers` threads (0 for the default).
///
/// # Safety
/// `experiment` must be a live handle; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tsvha_experiment_run(
    experiment: *const TsvhaExperiment,
    workers: usize,
    out: *mut *mut TsvhaResult,
) -> TsvhaStatus {
    guard(|| {
        non_null!(experiment, out);
        *out = ptr::null_mut();
        let workers = (workers > 0).then_some(workers);
        let traces = try_ffi!(harness::run_experiment_with_workers(&(*experiment).spec, workers));
        let labels = traces
            .iter()
            .map(|t| CString::new(t.policy.clone()).unwrap_or_default())
            .collect();
        *out = Box::into_raw(Box::new(TsvhaResult { traces, labels }));
        TsvhaStatus::Ok
    })
}

/// # Safety
/// `experiment` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn tsvha_experiment_free(experiment: *mut TsvhaExperiment) {
    if !experiment.is_null() {
        drop(Box::from_raw(experiment));
    }
}

/// Number of policies in a result; 0 for a null handle.
///
/// # Safety
/// `result` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn tsvha_result_policy_count(result: *const TsvhaResult) -> usize {
    if result.is_null() {
        0
    } else {
        (&*result).traces.len()
    }
}

/// Label of policy `index`, or null when out of range. Owned by the result.
///
/// # Safety
/// `result` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn tsvha_result_policy_label(result: *const TsvhaResult, index: usize) -> *const c_char {
    if result.is_null() {
        return ptr::null();
    }
    (&*result).labels.get(index).map_or(ptr::null(), |s| s.as_ptr())
}

/// Number of recorded periods in policy `index`'s trace, or 0.
///
/// # Safety
/// `result` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn tsvha_result_trace_len(result: *const TsvhaResult, index: usize) -> usize {
    if result.is_null() {
        return 0;
    }
    (&*result).traces.get(index).map_or(0, |t| t.cumulative.len())
}

/// Copies up to `len` trace rows of policy `index` into `out` and stores
/// the number written in `written`.
///
/// # Safety
/// `result` must be a live handle, `out` must point to `len` writable rows
/// and `written` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tsvha_result_trace(
    result: *const TsvhaResult,
    index: usize,
    out: *mut TsvhaTracePoint,
    len: usize,
    written: *mut usize,
) -> TsvhaStatus {
    guard(|| {
        non_null!(result, out, written);
        let Some(trace) = (&*result).traces.get(index) else {
            return fail(TsvhaStatus::Domain, format!("policy index {index} out of range"));
        };
        let n = trace.cumulative.len().min(len);
        let dst = std::slice::from_raw_parts_mut(out, n);
        for (d, p) in dst.iter_mut().zip(&trace.cumulative) {
            let s = &p.summary;
            let q = s.quantiles;
            *d = TsvhaTracePoint {
                t: p.t,
                mean: s.mean,
                std: s.std,
                q10: q[0],
                q25: q[1],
                q50: q[2],
                q75: q[3],
                q90: q[4],
            };
        }
        *written = n;
        TsvhaStatus::Ok
    })
}

/// # Safety
/// `result` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn tsvha_result_free(result: *mut TsvhaResult) {
    if !result.is_null() {
        drop(Box::from_raw(result));
    }
}
