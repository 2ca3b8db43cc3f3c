//! C ABI over `noma_das`.
//!
//! Every fallible function returns a [`NomaStatus`] and writes its result
//! through an out-pointer. On failure a message is kept per thread and can
//! be read with [`noma_last_error_message`]. Handles (`NomaGeometry`,
//! `NomaChannel`, `NomaExperiment`, `NomaResults`) are opaque and must be
//! released with their `*_free` function.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use noma_das::alloc::{
    jt_beta_search, maxmin_cdi_bisection, maxmin_cgi, maxsum_cgi, AllocationResult, JtObjective,
    QosConstraint, DEFAULT_BETA_TOLERANCE,
};
use noma_das::geometry::{
    order_users, sample_channel, ChannelRealization, CsiMode, GainMatrix, NetworkGeometry, Point,
    User, UserPlacement, NUM_RRUS, NUM_TX,
};
use noma_das::harness::{emit_csv, run_custom, ExperimentSpec, ResultRow};
use noma_das::rates::{ErgodicNomaLink, JtLink, NomaLink, PowerSplit, SchemeKind};
use noma_das::specfun::{ergodic_capacity, exp_integral_e};
use noma_das::Error;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NomaStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Domain = 3,
    Divergence = 4,
    Config = 5,
    Io = 6,
    Internal = 7,
    Panic = 8,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NomaScheme {
    NomaSingleSelection = 0,
    NomaBlanket = 1,
    ConventionalNoma = 2,
    ConventionalSingleSelection = 3,
    JtNoma = 4,
}

impl From<NomaScheme> for SchemeKind {
    fn from(s: NomaScheme) -> Self {
        match s {
            NomaScheme::NomaSingleSelection => SchemeKind::NomaSingleSelection,
            NomaScheme::NomaBlanket => SchemeKind::NomaBlanket,
            NomaScheme::ConventionalNoma => SchemeKind::ConventionalNoma,
            NomaScheme::ConventionalSingleSelection => SchemeKind::ConventionalSingleSelection,
            NomaScheme::JtNoma => SchemeKind::JtNoma,
        }
    }
}

/// Outcome of an allocator. `p1` and `p2` are NaN in outage; `beta` is
/// NaN for center-NOMA schemes.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NomaAllocation {
    pub p1: f64,
    pub p2: f64,
    pub objective: f64,
    pub outage: bool,
    pub iterations: usize,
    pub residual: f64,
    pub beta: f64,
}

impl From<AllocationResult> for NomaAllocation {
    fn from(r: AllocationResult) -> Self {
        NomaAllocation {
            p1: r.p1.unwrap_or(f64::NAN),
            p2: r.p2.unwrap_or(f64::NAN),
            objective: r.objective,
            outage: r.outage,
            iterations: r.meta.iterations,
            residual: r.meta.residual,
            beta: r.meta.beta.unwrap_or(f64::NAN),
        }
    }
}

/// Numeric part of one result row; the scheme label is read with
/// [`noma_results_scheme`].
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NomaRow {
    pub sweep_value: f64,
    pub metric_mean: f64,
    pub metric_stderr: f64,
    pub outage_rate: f64,
    pub trials: usize,
}

pub struct NomaGeometry(NetworkGeometry);

pub struct NomaChannel(ChannelRealization);

pub struct NomaExperiment(ExperimentSpec);

pub struct NomaResults {
    rows: Vec<ResultRow>,
    labels: Vec<CString>,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> NomaStatus {
    match e {
        Error::Domain(_) => NomaStatus::Domain,
        Error::Divergence(_) => NomaStatus::Divergence,
        Error::Config(_) => NomaStatus::Config,
        Error::Io { .. } => NomaStatus::Io,
        Error::Internal(_) => NomaStatus::Internal,
    }
}

enum Failure {
    Null(&'static str),
    Invalid(String),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

type FfiResult<T> = Result<T, Failure>;

/// Runs `f`, records any error and converts panics.
fn guard<F: FnOnce() -> FfiResult<()>>(f: F) -> NomaStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => NomaStatus::Ok,
        Ok(Err(Failure::Null(name))) => {
            set_error(&format!("{name} is null"));
            NomaStatus::NullPointer
        }
        Ok(Err(Failure::Invalid(msg))) => {
            set_error(&msg);
            NomaStatus::InvalidArgument
        }
        Ok(Err(Failure::Lib(e))) => {
            set_error(&e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_error("panic inside noma_das");
            NomaStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, name: &'static str) -> FfiResult<&'a T> {
    p.as_ref().ok_or(Failure::Null(name))
}

unsafe fn write<T>(out: *mut T, value: T, name: &'static str) -> FfiResult<()> {
    if out.is_null() {
        return Err(Failure::Null(name));
    }
    out.write(value);
    Ok(())
}

unsafe fn write_handle<T>(out: *mut *mut T, value: T) -> FfiResult<()> {
    if out.is_null() {
        return Err(Failure::Null("out"));
    }
    out.write(Box::into_raw(Box::new(value)));
    Ok(())
}

fn user_of(user: u32) -> FfiResult<User> {
    match user {
        1 => Ok(User::One),
        2 => Ok(User::Two),
        _ => Err(Failure::Invalid(format!("user must be 1 or 2, got {user}"))),
    }
}

/// Message of the last failed call on this thread; empty if none. The
/// pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn noma_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn noma_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Generalized exponential integral `E_n(x)`.
#[no_mangle]
pub unsafe extern "C" fn noma_exp_integral(n: u32, x: f64, out: *mut f64) -> NomaStatus {
    guard(|| write(out, exp_integral_e(n, x)?, "out"))
}

/// `C_t(x)` in bits/s/Hz.
#[no_mangle]
pub unsafe extern "C" fn noma_ergodic_capacity(t: u32, x: f64, out: *mut f64) -> NomaStatus {
    guard(|| write(out, ergodic_capacity(t, x)?, "out"))
}

/// The default layout: six RRUs on a ring of radius 2/3, path-loss exponent 4.
#[no_mangle]
pub unsafe extern "C" fn noma_geometry_default(out: *mut *mut NomaGeometry) -> NomaStatus {
    guard(|| write_handle(out, NomaGeometry(NetworkGeometry::default_geometry())))
}

/// Custom layout from six `(x, y)` pairs (12 doubles).
#[no_mangle]
pub unsafe extern "C" fn noma_geometry_new(
    rru_xy: *const f64,
    alpha: f64,
    out: *mut *mut NomaGeometry,
) -> NomaStatus {
    guard(|| {
        if rru_xy.is_null() {
            return Err(Failure::Null("rru_xy"));
        }
        let xy = std::slice::from_raw_parts(rru_xy, 2 * NUM_RRUS);
        let mut rrus = [Point::new(0.0, 0.0); NUM_RRUS];
        for (k, p) in rrus.iter_mut().enumerate() {
            *p = Point::new(xy[2 * k], xy[2 * k + 1]);
        }
        write_handle(out, NomaGeometry(NetworkGeometry::new(rrus, alpha)?))
    })
}

#[no_mangle]
pub unsafe extern "C" fn noma_geometry_free(geometry: *mut NomaGeometry) {
    if !geometry.is_null() {
        drop(Box::from_raw(geometry));
    }
}

/// Draws a Rayleigh realization for users at `(x1, y1)` (user 1) and
/// `(x2, y2)` (user 2) from the ChaCha8 stream `(seed, stream)`.
#[no_mangle]
pub unsafe extern "C" fn noma_channel_sample(
    geometry: *const NomaGeometry,
    x1: f64,
    y1: f64,
    x2: f64,
    y2: f64,
    seed: u64,
    stream: u64,
    out: *mut *mut NomaChannel,
) -> NomaStatus {
    guard(|| {
        let geom = &deref(geometry, "geometry")?.0;
        let place = UserPlacement::new(geom, Point::new(x1, y1), Point::new(x2, y2))?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        write_handle(out, NomaChannel(sample_channel(geom, &place, &mut rng)))
    })
}

/// Channel from slow fading and fast-fading power, each 7x2 row-major
/// (transmitter-major, user 1 then user 2; transmitter 0 is the center BS).
#[no_mangle]
pub unsafe extern "C" fn noma_channel_from_gains(
    slow: *const f64,
    fading_power: *const f64,
    out: *mut *mut NomaChannel,
) -> NomaStatus {
    guard(|| {
        if slow.is_null() {
            return Err(Failure::Null("slow"));
        }
        if fading_power.is_null() {
            return Err(Failure::Null("fading_power"));
        }
        let matrix = |p: *const f64| {
            let v = std::slice::from_raw_parts(p, 2 * NUM_TX);
            let mut rows = [[0.0; 2]; NUM_TX];
            for (tx, row) in rows.iter_mut().enumerate() {
                *row = [v[2 * tx], v[2 * tx + 1]];
            }
            GainMatrix::from_rows(rows)
        };
        let ch = ChannelRealization::from_gains(matrix(slow), matrix(fading_power))?;
        write_handle(out, NomaChannel(ch))
    })
}

/// Instantaneous power gain `|h_{tx,user}|^2`; `tx` in 0..=6, `user` 1 or 2.
#[no_mangle]
pub unsafe extern "C" fn noma_channel_gain(
    channel: *const NomaChannel,
    tx: usize,
    user: u32,
    out: *mut f64,
) -> NomaStatus {
    guard(|| {
        let ch = &deref(channel, "channel")?.0;
        if tx >= NUM_TX {
            return Err(Failure::Invalid(format!("transmitter index must be below {NUM_TX}, got {tx}")));
        }
        write(out, ch.gain().get(tx, user_of(user)?), "out")
    })
}

#[no_mangle]
pub unsafe extern "C" fn noma_channel_free(channel: *mut NomaChannel) {
    if !channel.is_null() {
        drop(Box::from_raw(channel));
    }
}

fn split_for(kind: SchemeKind, total: f64, center_fraction: f64) -> Result<PowerSplit, Error> {
    match kind {
        SchemeKind::ConventionalNoma => PowerSplit::conventional(total),
        _ => PowerSplit::das(total, center_fraction),
    }
}

fn no_allocation(kind: SchemeKind) -> Failure {
    Failure::Invalid(format!("{kind} has no power allocation"))
}

/// Max-min allocation with instantaneous CGI.
#[no_mangle]
pub unsafe extern "C" fn noma_maxmin_cgi(
    channel: *const NomaChannel,
    scheme: NomaScheme,
    total_power: f64,
    center_fraction: f64,
    noise_var: f64,
    out: *mut NomaAllocation,
) -> NomaStatus {
    guard(|| {
        let ch = &deref(channel, "channel")?.0;
        let kind = SchemeKind::from(scheme);
        let split = split_for(kind, total_power, center_fraction)?;
        let r = match kind {
            SchemeKind::ConventionalSingleSelection => return Err(no_allocation(kind)),
            SchemeKind::JtNoma => {
                let (link, _) = JtLink::instantaneous(ch.gain(), &split, noise_var)?;
                jt_beta_search(&link, total_power, JtObjective::MaxMin, DEFAULT_BETA_TOLERANCE)?
            }
            _ => {
                let roles = order_users(ch, CsiMode::InstantaneousCgi);
                maxmin_cgi(&NomaLink::for_scheme(ch.gain(), ch.gain(), kind, split, roles, noise_var)?)?
            }
        };
        write(out, r.into(), "out")
    })
}

/// Max-min allocation of the closed-form upper bound with only the slow
/// fading known. `epsilon` is the absolute bisection width.
#[no_mangle]
pub unsafe extern "C" fn noma_maxmin_cdi(
    channel: *const NomaChannel,
    scheme: NomaScheme,
    total_power: f64,
    center_fraction: f64,
    noise_var: f64,
    epsilon: f64,
    out: *mut NomaAllocation,
) -> NomaStatus {
    guard(|| {
        let slow = deref(channel, "channel")?.0.slow();
        let kind = SchemeKind::from(scheme);
        let split = split_for(kind, total_power, center_fraction)?;
        let r = match kind {
            SchemeKind::ConventionalSingleSelection => return Err(no_allocation(kind)),
            SchemeKind::JtNoma => {
                let (link, _) = JtLink::ergodic(slow, &split, noise_var)?;
                jt_beta_search(&link, total_power, JtObjective::MaxMin, DEFAULT_BETA_TOLERANCE)?
            }
            _ => maxmin_cdi_bisection(&ErgodicNomaLink::for_scheme(slow, kind, split, noise_var)?, epsilon)?,
        };
        write(out, r.into(), "out")
    })
}

/// Max-sum-rate allocation under `min(R_1, R_2) >= rt` with instantaneous CGI.
#[no_mangle]
pub unsafe extern "C" fn noma_maxsum_cgi(
    channel: *const NomaChannel,
    scheme: NomaScheme,
    total_power: f64,
    center_fraction: f64,
    noise_var: f64,
    rt: f64,
    out: *mut NomaAllocation,
) -> NomaStatus {
    guard(|| {
        let ch = &deref(channel, "channel")?.0;
        let kind = SchemeKind::from(scheme);
        let split = split_for(kind, total_power, center_fraction)?;
        let qos = QosConstraint::new(rt)?;
        let r = match kind {
            SchemeKind::ConventionalSingleSelection => return Err(no_allocation(kind)),
            SchemeKind::JtNoma => {
                let (link, _) = JtLink::instantaneous(ch.gain(), &split, noise_var)?;
                jt_beta_search(&link, total_power, JtObjective::MaxSum(qos), DEFAULT_BETA_TOLERANCE)?
            }
            _ => {
                let roles = order_users(ch, CsiMode::InstantaneousCgi);
                maxsum_cgi(&NomaLink::for_scheme(ch.gain(), ch.gain(), kind, split, roles, noise_var)?, qos)
            }
        };
        write(out, r.into(), "out")
    })
}

/// A preset experiment: `"fig2"` ... `"fig6"`.
#[no_mangle]
pub unsafe extern "C" fn noma_experiment_preset(name: *const c_char, out: *mut *mut NomaExperiment) -> NomaStatus {
    guard(|| {
        if name.is_null() {
            return Err(Failure::Null("name"));
        }
        let name = CStr::from_ptr(name).to_str().map_err(|_| Failure::Invalid("name is not UTF-8".into()))?;
        let spec = match name {
            "fig2" => ExperimentSpec::fig2(),
            "fig3" => ExperimentSpec::fig3(),
            "fig4" => ExperimentSpec::fig4(),
            "fig5" => ExperimentSpec::fig5(),
            "fig6" => ExperimentSpec::fig6(),
            other => return Err(Failure::Invalid(format!("unknown preset {other:?}"))),
        };
        write_handle(out, NomaExperiment(spec))
    })
}

#[no_mangle]
pub unsafe extern "C" fn noma_experiment_set_trials(experiment: *mut NomaExperiment, trials: usize) -> NomaStatus {
    guard(|| {
        let e = experiment.as_mut().ok_or(Failure::Null("experiment"))?;
        e.0.trials = trials;
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn noma_experiment_set_seed(experiment: *mut NomaExperiment, seed: u64) -> NomaStatus {
    guard(|| {
        let e = experiment.as_mut().ok_or(Failure::Null("experiment"))?;
        e.0.seed = seed;
        Ok(())
    })
}

/// Runs the experiment on the global thread pool.
#[no_mangle]
pub unsafe extern "C" fn noma_experiment_run(
    experiment: *const NomaExperiment,
    out: *mut *mut NomaResults,
) -> NomaStatus {
    guard(|| {
        let spec = &deref(experiment, "experiment")?.0;
        if out.is_null() {
            return Err(Failure::Null("out"));
        }
        let rows = run_custom(spec)?;
        let labels = rows
            .iter()
            .map(|r| CString::new(r.scheme.as_str()).map_err(|_| Failure::Invalid("label contains NUL".into())))
            .collect::<FfiResult<Vec<_>>>()?;
        write_handle(out, NomaResults { rows, labels })
    })
}

#[no_mangle]
pub unsafe extern "C" fn noma_experiment_free(experiment: *mut NomaExperiment) {
    if !experiment.is_null() {
        drop(Box::from_raw(experiment));
    }
}

/// Number of rows; 0 for a null handle.
#[no_mangle]
pub unsafe extern "C" fn noma_results_len(results: *const NomaResults) -> usize {
    results.as_ref().map_or(0, |r| r.rows.len())
}

#[no_mangle]
pub unsafe extern "C" fn noma_results_get(results: *const NomaResults, index: usize, out: *mut NomaRow) -> NomaStatus {
    guard(|| {
        let res = deref(results, "results")?;
        let r = res
            .rows
            .get(index)
            .ok_or_else(|| Failure::Invalid(format!("row {index} out of range ({} rows)", res.rows.len())))?;
        let row = NomaRow {
            sweep_value: r.sweep_value,
            metric_mean: r.metric_mean,
            metric_stderr: r.metric_stderr,
            outage_rate: r.outage_rate,
            trials: r.trials,
        };
        write(out, row, "out")
    })
}

/// Scheme label of row `index`, owned by `results`; null when out of range.
#[no_mangle]
pub unsafe extern "C" fn noma_results_scheme(results: *const NomaResults, index: usize) -> *const c_char {
    match results.as_ref().and_then(|r| r.labels.get(index)) {
        Some(label) => label.as_ptr(),
        None => ptr::null(),
    }
}

#[no_mangle]
pub unsafe extern "C" fn noma_results_write_csv(results: *const NomaResults, path: *const c_char) -> NomaStatus {
    guard(|| {
        let res = deref(results, "results")?;
        if path.is_null() {
            return Err(Failure::Null("path"));
        }
        let path = CStr::from_ptr(path).to_str().map_err(|_| Failure::Invalid("path is not UTF-8".into()))?;
        emit_csv(&res.rows, Path::new(path))?;
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn noma_results_free(results: *mut NomaResults) {
    if !results.is_null() {
        drop(Box::from_raw(results));
    }
}
