//! C ABI over `asn_reservoir`.
//!
//! Models and simulators are opaque heap handles released with their
//! `*_free` function. Every fallible call returns an [`AsnStatus`]; on
//! failure [`asn_last_error`] describes the cause for the calling thread.
//! Matrices cross the boundary as row-major `double` arrays.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use nalgebra::DMatrix;

use asn_reservoir::device::{asn_response, DeviceParams};
use asn_reservoir::io::{load_model, save_model, ModelFile};
use asn_reservoir::readout::{pinv, train_readout};
use asn_reservoir::reservoir::{generate_topology, step, ReservoirParams, ReservoirState, TopologySpec};
use asn_reservoir::seed::{component_rng, rng_from, Rng};
use asn_reservoir::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AsnStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Dimension = 3,
    NotFound = 4,
    Version = 5,
    Malformed = 6,
    Io = 7,
    Untrained = 8,
    Numeric = 9,
    Panic = 10,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct AsnTopologySpec {
    pub n: usize,
    pub inputs: usize,
    pub outputs: usize,
    pub connectivity: f64,
    pub spectral_radius: f64,
    pub input_scale: f64,
    pub fb_scale: f64,
    pub tau0: f64,
    pub d_max: u32,
}

/// Ideal-backend dynamics.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct AsnDynamics {
    pub activation_gain: f64,
    pub noise_gain: f64,
    pub decay: f64,
    pub washout: usize,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct AsnDeviceParams {
    pub v_dd: f64,
    pub slope_beta: f64,
    pub noise_amp_alpha: f64,
}

pub struct AsnModel {
    inner: ModelFile,
}

pub struct AsnSimulator {
    model: ModelFile,
    state: ReservoirState,
    rng: Rng,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> AsnStatus {
    match e {
        Error::Dimension { .. } => AsnStatus::Dimension,
        Error::InvalidParam(_) | Error::DegenerateTopology(_) => AsnStatus::InvalidArgument,
        Error::NonFinite(_) => AsnStatus::Numeric,
        Error::Untrained => AsnStatus::Untrained,
        Error::ModelNotFound(_) => AsnStatus::NotFound,
        Error::Version { .. } => AsnStatus::Version,
        Error::Malformed(_) | Error::Json(_) | Error::Csv(_) => AsnStatus::Malformed,
        Error::Io { .. } => AsnStatus::Io,
    }
}

enum Fail {
    Null(&'static str),
    Lib(Error),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Lib(e)
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> AsnStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            AsnStatus::Ok
        }
        Ok(Err(Fail::Null(what))) => {
            set_error(&format!("null pointer: {what}"));
            AsnStatus::NullPointer
        }
        Ok(Err(Fail::Lib(e))) => {
            set_error(&e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_error("internal panic");
            AsnStatus::Panic
        }
    }
}

unsafe fn slice<'a>(p: *const f64, len: usize, what: &'static str) -> Result<&'a [f64], Fail> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(Fail::Null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn slice_mut<'a>(p: *mut f64, len: usize, what: &'static str) -> Result<&'a mut [f64], Fail> {
    if len == 0 {
        return Ok(&mut []);
    }
    if p.is_null() {
        return Err(Fail::Null(what));
    }
    Ok(std::slice::from_raw_parts_mut(p, len))
}

unsafe fn path<'a>(p: *const c_char) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(Fail::Null("path"));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Fail::Lib(Error::InvalidParam("path is not valid UTF-8".into())))
}

fn expect_len(context: &'static str, expected: usize, actual: usize) -> Result<(), Fail> {
    if expected != actual {
        return Err(Fail::Lib(Error::Dimension {
            context,
            expected: expected.to_string(),
            actual: actual.to_string(),
        }));
    }
    Ok(())
}

/// Message for the last failed call on this thread; empty after success.
/// Valid until the next call into this library from the same thread.
#[no_mangle]
pub extern "C" fn asn_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

#[no_mangle]
pub extern "C" fn asn_topology_spec_default() -> AsnTopologySpec {
    let s = TopologySpec::default();
    AsnTopologySpec {
        n: s.n,
        inputs: s.inputs,
        outputs: s.outputs,
        connectivity: s.connectivity,
        spectral_radius: s.spectral_radius,
        input_scale: s.input_scale,
        fb_scale: s.fb_scale,
        tau0: s.tau0,
        d_max: s.d_max,
    }
}

#[no_mangle]
pub extern "C" fn asn_dynamics_default() -> AsnDynamics {
    let p = ReservoirParams::default();
    AsnDynamics {
        activation_gain: p.activation_gain,
        noise_gain: p.noise_gain,
        decay: p.decay,
        washout: p.washout,
    }
}

#[no_mangle]
pub extern "C" fn asn_device_default() -> AsnDeviceParams {
    let d = DeviceParams::default();
    AsnDeviceParams {
        v_dd: d.v_dd,
        slope_beta: d.slope_beta,
        noise_amp_alpha: d.noise_amp_alpha,
    }
}

/// Builds a random topology with ideal-backend dynamics.
///
/// # Safety
/// `spec`, `dynamics` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn asn_model_generate(
    spec: *const AsnTopologySpec,
    dynamics: *const AsnDynamics,
    seed: u64,
    out: *mut *mut AsnModel,
) -> AsnStatus {
    guard(|| {
        let s = spec.as_ref().ok_or(Fail::Null("spec"))?;
        let d = dynamics.as_ref().ok_or(Fail::Null("dynamics"))?;
        if out.is_null() {
            return Err(Fail::Null("out"));
        }
        let spec = TopologySpec {
            n: s.n,
            inputs: s.inputs,
            outputs: s.outputs,
            connectivity: s.connectivity,
            spectral_radius: s.spectral_radius,
            input_scale: s.input_scale,
            fb_scale: s.fb_scale,
            tau0: s.tau0,
            d_max: s.d_max,
        };
        let params = ReservoirParams {
            activation_gain: d.activation_gain,
            noise_gain: d.noise_gain,
            decay: d.decay,
            washout: d.washout,
            ..Default::default()
        };
        params.validate()?;
        let topo = generate_topology(&spec, seed)?;
        *out = Box::into_raw(Box::new(AsnModel {
            inner: ModelFile::new(params, topo),
        }));
        Ok(())
    })
}

/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn asn_model_load(path: *const c_char, out: *mut *mut AsnModel) -> AsnStatus {
    guard(|| {
        let p = self::path(path)?;
        if out.is_null() {
            return Err(Fail::Null("out"));
        }
        let inner = load_model(p)?;
        *out = Box::into_raw(Box::new(AsnModel { inner }));
        Ok(())
    })
}

/// # Safety
/// `model` must come from this library; `path` must be NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn asn_model_save(model: *const AsnModel, path: *const c_char) -> AsnStatus {
    guard(|| {
        let m = model.as_ref().ok_or(Fail::Null("model"))?;
        save_model(&m.inner, self::path(path)?)?;
        Ok(())
    })
}

/// # Safety
/// `model` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn asn_model_free(model: *mut AsnModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// # Safety
/// `model` must come from this library; output pointers may be null.
#[no_mangle]
pub unsafe extern "C" fn asn_model_dims(
    model: *const AsnModel,
    n: *mut usize,
    inputs: *mut usize,
    outputs: *mut usize,
) -> AsnStatus {
    guard(|| {
        let t = &model.as_ref().ok_or(Fail::Null("model"))?.inner.topology;
        for (p, v) in [(n, t.n()), (inputs, t.inputs()), (outputs, t.outputs())] {
            if let Some(p) = p.as_mut() {
                *p = v;
            }
        }
        Ok(())
    })
}

/// 1 if the model carries readout weights, 0 otherwise (or for null).
///
/// # Safety
/// `model` must be null or come from this library.
#[no_mangle]
pub unsafe extern "C" fn asn_model_has_readout(model: *const AsnModel) -> i32 {
    model.as_ref().map_or(0, |m| i32::from(m.inner.readout.is_some()))
}

/// Fits the readout from `states` (n×samples) and `targets`
/// (outputs×samples), both row-major.
///
/// # Safety
/// `model` must come from this library; arrays must hold the stated sizes.
#[no_mangle]
pub unsafe extern "C" fn asn_model_train_readout(
    model: *mut AsnModel,
    states: *const f64,
    targets: *const f64,
    samples: usize,
    ridge: f64,
) -> AsnStatus {
    guard(|| {
        let m = model.as_mut().ok_or(Fail::Null("model"))?;
        let (n, p) = (m.inner.topology.n(), m.inner.topology.outputs());
        let x = slice(states, n * samples, "states")?;
        let y = slice(targets, p * samples, "targets")?;
        let w = train_readout(
            &DMatrix::from_row_slice(n, samples, x),
            &DMatrix::from_row_slice(p, samples, y),
            ridge,
        )?;
        m.inner = m.inner.clone().with_readout(w)?;
        Ok(())
    })
}

/// Starts a simulator from the zero state. The model is copied.
///
/// # Safety
/// `model` must come from this library and `out` be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn asn_simulator_new(model: *const AsnModel, seed: u64, out: *mut *mut AsnSimulator) -> AsnStatus {
    guard(|| {
        let m = model.as_ref().ok_or(Fail::Null("model"))?;
        if out.is_null() {
            return Err(Fail::Null("out"));
        }
        let t = &m.inner.topology;
        *out = Box::into_raw(Box::new(AsnSimulator {
            state: ReservoirState::zeros(t.n(), t.d_max()),
            model: m.inner.clone(),
            rng: component_rng(seed, "reservoir-noise"),
        }));
        Ok(())
    })
}

/// # Safety
/// `sim` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn asn_simulator_free(sim: *mut AsnSimulator) {
    if !sim.is_null() {
        drop(Box::from_raw(sim));
    }
}

/// Advances one step with input `u` and fed-back output `y_prev` (null for
/// zero feedback), writing the new state into `x_out` when non-null.
///
/// # Safety
/// `sim` must come from this library; arrays must hold the stated lengths.
#[no_mangle]
pub unsafe extern "C" fn asn_simulator_step(
    sim: *mut AsnSimulator,
    u: *const f64,
    u_len: usize,
    y_prev: *const f64,
    y_len: usize,
    x_out: *mut f64,
    x_len: usize,
) -> AsnStatus {
    guard(|| {
        let s = sim.as_mut().ok_or(Fail::Null("simulator"))?;
        let t = &s.model.topology;
        let u = slice(u, u_len, "u")?;
        let zeros = vec![0.0; t.outputs()];
        let y = if y_prev.is_null() { &zeros[..] } else { slice(y_prev, y_len, "y_prev")? };
        step(&mut s.state, u, y, t, &s.model.params, &mut s.rng)?;
        if !x_out.is_null() {
            expect_len("x_out length", t.n(), x_len)?;
            slice_mut(x_out, x_len, "x_out")?.copy_from_slice(s.state.current());
        }
        Ok(())
    })
}

/// Readout of the current state into `y_out` (length = outputs).
///
/// # Safety
/// `sim` must come from this library; `y_out` must hold `y_len` doubles.
#[no_mangle]
pub unsafe extern "C" fn asn_simulator_output(sim: *const AsnSimulator, y_out: *mut f64, y_len: usize) -> AsnStatus {
    guard(|| {
        let s = sim.as_ref().ok_or(Fail::Null("simulator"))?;
        let w = s.model.readout.as_ref().ok_or(Error::Untrained)?;
        expect_len("y_out length", w.outputs(), y_len)?;
        let y = w.apply(s.state.current())?;
        slice_mut(y_out, y_len, "y_out")?.copy_from_slice(y.as_slice());
        Ok(())
    })
}

/// Moore-Penrose pseudo-inverse of a rows×cols row-major matrix into `out`
/// (cols×rows, row-major). `rcond <= 0` selects the default cutoff.
///
/// # Safety
/// `a` must hold rows·cols doubles and `out` cols·rows doubles.
#[no_mangle]
pub unsafe extern "C" fn asn_pinv(a: *const f64, rows: usize, cols: usize, rcond: f64, out: *mut f64) -> AsnStatus {
    guard(|| {
        let m = DMatrix::from_row_slice(rows, cols, slice(a, rows * cols, "a")?);
        let p = pinv(&m, (rcond > 0.0).then_some(rcond))?;
        let dst = slice_mut(out, rows * cols, "out")?;
        for (k, v) in dst.iter_mut().enumerate() {
            *v = p[(k / rows, k % rows)];
        }
        Ok(())
    })
}

/// Noise-free device response `(v_dd/2)·tanh(β·v)`.
///
/// # Safety
/// `device` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn asn_device_mean(device: *const AsnDeviceParams, v: f64, out: *mut f64) -> AsnStatus {
    guard(|| {
        let d = device_params(device)?;
        *out.as_mut().ok_or(Fail::Null("out"))? = d.mean_response(v);
        Ok(())
    })
}

/// Draws `count` stochastic device responses at input `v`.
///
/// # Safety
/// `device` must be valid and `out` must hold `count` doubles.
#[no_mangle]
pub unsafe extern "C" fn asn_device_sample(
    device: *const AsnDeviceParams,
    v: f64,
    seed: u64,
    out: *mut f64,
    count: usize,
) -> AsnStatus {
    guard(|| {
        let d = device_params(device)?;
        let mut rng = rng_from(seed);
        for o in slice_mut(out, count, "out")? {
            *o = asn_response(v, &d, &mut rng);
        }
        Ok(())
    })
}

unsafe fn device_params(device: *const AsnDeviceParams) -> Result<DeviceParams, Fail> {
    let d = device.as_ref().ok_or(Fail::Null("device"))?;
    let p = DeviceParams {
        v_dd: d.v_dd,
        slope_beta: d.slope_beta,
        noise_amp_alpha: d.noise_amp_alpha,
    };
    p.validate()?;
    Ok(p)
}
