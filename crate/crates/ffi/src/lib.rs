//! C ABI over `kfd`.
//!
//! Every fallible call returns a [`KfdStatus`]; on failure the message is
//! available from [`kfd_last_error`] on the same thread. Objects cross the
//! boundary as opaque handles that must be released with the matching
//! `*_free` function. Output arrays are caller-allocated.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use kfd::dataset::{read_features, FeatureSequence};
use kfd::labeler::{lda_direction, ClassMatrices};
use kfd::metrics::{location_error, number_error};
use kfd::pipeline::{detect_from_scores, PipelineConfig};
use kfd::regressor::{load_model, model_from_json, predict_video, MlpModel};
use kfd::selector::{local_extrema, Extremum, ExtremumKind};
use kfd::smoother::{fit_spline, select_alpha, SmootherConfig, SplineFit};
use kfd::Error;
use nalgebra::DMatrix;

/// Result code of every fallible call. Values 2 to 5 match the exit codes of
/// the `kfd` binary.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KfdStatus {
    Ok = 0,
    NullPointer = 1,
    Invalid = 2,
    Io = 3,
    Degenerate = 4,
    Divergence = 5,
    BufferTooSmall = 6,
    Panic = 7,
}

/// Feature matrix of one video.
pub struct KfdFeatures(FeatureSequence);

/// Trained regression head.
pub struct KfdModel(MlpModel);

/// Smoothing spline fitted to a score series.
pub struct KfdSpline(SplineFit);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn fail(status: KfdStatus, msg: impl Into<String>) -> KfdStatus {
    set_error(msg.into());
    status
}

fn from_error(e: Error) -> KfdStatus {
    let status = match e.exit_code() {
        3 => KfdStatus::Io,
        4 => KfdStatus::Degenerate,
        5 => KfdStatus::Divergence,
        _ => KfdStatus::Invalid,
    };
    fail(status, e.to_string())
}

struct Failure(KfdStatus);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(from_error(e))
    }
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> KfdStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => KfdStatus::Ok,
        Ok(Err(Failure(s))) => s,
        Err(_) => fail(KfdStatus::Panic, "internal panic"),
    }
}

fn null(what: &str) -> Failure {
    Failure(fail(KfdStatus::NullPointer, format!("{what} is null")))
}

unsafe fn input<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(slice::from_raw_parts(p, len))
}

unsafe fn output<'a, T>(p: *mut T, len: usize, what: &str) -> Result<&'a mut [T], Failure> {
    if len == 0 {
        return Ok(&mut []);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(slice::from_raw_parts_mut(p, len))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn out_ptr<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn path_arg(p: *const c_char) -> Result<String, Failure> {
    if p.is_null() {
        return Err(null("path"));
    }
    CStr::from_ptr(p)
        .to_str()
        .map(str::to_owned)
        .map_err(|_| Failure(fail(KfdStatus::Invalid, "path is not valid UTF-8")))
}

fn write_extrema(
    ex: &[Extremum],
    indices: &mut [usize],
    is_max: &mut [u8],
    count: &mut usize,
) -> Result<(), Failure> {
    *count = ex.len();
    if ex.len() > indices.len() || ex.len() > is_max.len() {
        return Err(Failure(fail(
            KfdStatus::BufferTooSmall,
            format!(
                "{} extrema, capacity {}",
                ex.len(),
                indices.len().min(is_max.len())
            ),
        )));
    }
    for (i, e) in ex.iter().enumerate() {
        indices[i] = e.index;
        is_max[i] = u8::from(e.kind == ExtremumKind::Maximum);
    }
    Ok(())
}

/// Message of the last failed call on this thread, or null after a success.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn kfd_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Read a KFDF feature file.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn kfd_features_read(
    path: *const c_char,
    out: *mut *mut KfdFeatures,
) -> KfdStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let seq = read_features(path_arg(path)?)?;
        *out = Box::into_raw(Box::new(KfdFeatures(seq)));
        Ok(())
    })
}

/// Build a feature matrix from `frames * dim` row-major values.
///
/// # Safety
/// `data` must point to `frames * dim` floats and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn kfd_features_new(
    data: *const f32,
    frames: usize,
    dim: usize,
    out: *mut *mut KfdFeatures,
) -> KfdStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let n = frames
            .checked_mul(dim)
            .ok_or_else(|| Failure(fail(KfdStatus::Invalid, "frames * dim overflows")))?;
        let values = input(data, n, "data")?.to_vec();
        *out = Box::into_raw(Box::new(KfdFeatures(FeatureSequence::new(
            frames, dim, values,
        )?)));
        Ok(())
    })
}

/// # Safety
/// `f` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn kfd_features_frames(f: *const KfdFeatures) -> usize {
    f.as_ref().map_or(0, |f| f.0.frames())
}

/// # Safety
/// `f` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn kfd_features_dim(f: *const KfdFeatures) -> usize {
    f.as_ref().map_or(0, |f| f.0.dim())
}

/// # Safety
/// `f` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn kfd_features_free(f: *mut KfdFeatures) {
    if !f.is_null() {
        drop(Box::from_raw(f));
    }
}

/// Load a model saved by `kfd train`.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn kfd_model_load(path: *const c_char, out: *mut *mut KfdModel) -> KfdStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let m = load_model(path_arg(path)?)?;
        *out = Box::into_raw(Box::new(KfdModel(m)));
        Ok(())
    })
}

/// Parse a model from its JSON text.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn kfd_model_from_json(
    json: *const c_char,
    out: *mut *mut KfdModel,
) -> KfdStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        if json.is_null() {
            return Err(null("json"));
        }
        let text = CStr::from_ptr(json)
            .to_str()
            .map_err(|_| Failure(fail(KfdStatus::Invalid, "json is not valid UTF-8")))?;
        *out = Box::into_raw(Box::new(KfdModel(model_from_json(text)?)));
        Ok(())
    })
}

/// # Safety
/// `m` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn kfd_model_input_dim(m: *const KfdModel) -> usize {
    m.as_ref().map_or(0, |m| m.0.input_dim)
}

/// # Safety
/// `m` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn kfd_model_free(m: *mut KfdModel) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// Per-frame model output. `out` needs room for one value per frame.
///
/// # Safety
/// Handles must be live and `out` must hold `out_len` doubles.
#[no_mangle]
pub unsafe extern "C" fn kfd_model_predict(
    m: *const KfdModel,
    f: *const KfdFeatures,
    out: *mut f64,
    out_len: usize,
) -> KfdStatus {
    guard(|| {
        let (m, f) = (handle(m, "model")?, handle(f, "features")?);
        let k = f.0.frames();
        if out_len < k {
            return Err(Failure(fail(
                KfdStatus::BufferTooSmall,
                format!("{k} frames, capacity {out_len}"),
            )));
        }
        let out = output(out, k, "out")?;
        let s = predict_video(&m.0, "ffi", &f.0)?;
        out.copy_from_slice(&s.values);
        Ok(())
    })
}

/// Default smoothing weight for a clip of `frames` frames.
#[no_mangle]
pub extern "C" fn kfd_select_alpha(frames: usize) -> f64 {
    select_alpha(frames, &SmootherConfig::default())
}

/// Fit a natural cubic smoothing spline with weight `p` in (0, 1].
///
/// # Safety
/// `y` must hold `len` doubles and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn kfd_spline_fit(
    y: *const f64,
    len: usize,
    p: f64,
    out: *mut *mut KfdSpline,
) -> KfdStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let fit = fit_spline(input(y, len, "y")?, p)?;
        *out = Box::into_raw(Box::new(KfdSpline(fit)));
        Ok(())
    })
}

/// # Safety
/// `s` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn kfd_spline_len(s: *const KfdSpline) -> usize {
    s.as_ref().map_or(0, |s| s.0.len())
}

/// Copy the fitted values at the knots.
///
/// # Safety
/// `s` must be live and `out` must hold `out_len` doubles.
#[no_mangle]
pub unsafe extern "C" fn kfd_spline_fitted(
    s: *const KfdSpline,
    out: *mut f64,
    out_len: usize,
) -> KfdStatus {
    guard(|| {
        let s = handle(s, "spline")?;
        let k = s.0.len();
        if out_len < k {
            return Err(Failure(fail(
                KfdStatus::BufferTooSmall,
                format!("{k} knots, capacity {out_len}"),
            )));
        }
        output(out, k, "out")?.copy_from_slice(s.0.fitted());
        Ok(())
    })
}

/// Spline value at `t` in `[0, len - 1]`.
///
/// # Safety
/// `s` must be live and `value` valid.
#[no_mangle]
pub unsafe extern "C" fn kfd_spline_eval(
    s: *const KfdSpline,
    t: f64,
    value: *mut f64,
) -> KfdStatus {
    guard(|| {
        let value = out_ptr(value, "value")?;
        *value = handle(s, "spline")?.0.eval_at(t)?;
        Ok(())
    })
}

/// # Safety
/// `s` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn kfd_spline_free(s: *mut KfdSpline) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// Interior extrema of a series. `count` always receives the number found;
/// if it exceeds `capacity` the call returns `BufferTooSmall` and writes
/// nothing else.
///
/// # Safety
/// `series` must hold `len` doubles; `indices` and `is_max` must hold
/// `capacity` entries; `count` must be valid.
#[no_mangle]
pub unsafe extern "C" fn kfd_local_extrema(
    series: *const f64,
    len: usize,
    indices: *mut usize,
    is_max: *mut u8,
    capacity: usize,
    count: *mut usize,
) -> KfdStatus {
    guard(|| {
        let count = out_ptr(count, "count")?;
        let ex = local_extrema(input(series, len, "series")?)?;
        write_extrema(
            &ex,
            output(indices, capacity, "indices")?,
            output(is_max, capacity, "is_max")?,
            count,
        )
    })
}

/// Smooth raw per-frame scores with the default frame-count rule and report
/// the keyframes. Output contract as [`kfd_local_extrema`].
///
/// # Safety
/// As [`kfd_local_extrema`].
#[no_mangle]
pub unsafe extern "C" fn kfd_detect_keyframes(
    scores: *const f64,
    len: usize,
    indices: *mut usize,
    is_max: *mut u8,
    capacity: usize,
    count: *mut usize,
) -> KfdStatus {
    guard(|| {
        let count = out_ptr(count, "count")?;
        let raw = input(scores, len, "scores")?.to_vec();
        let det = detect_from_scores("ffi", raw, &PipelineConfig::default())?;
        let ex: Vec<Extremum> = det
            .keyframes
            .indices
            .iter()
            .zip(&det.keyframes.kinds)
            .map(|(&index, &kind)| Extremum { index, kind })
            .collect();
        write_extrema(
            &ex,
            output(indices, capacity, "indices")?,
            output(is_max, capacity, "is_max")?,
            count,
        )
    })
}

/// Signed count difference `predicted - ground_truth`.
#[no_mangle]
pub extern "C" fn kfd_number_error(predicted: usize, ground_truth: usize) -> i64 {
    number_error(predicted, ground_truth)
}

/// Mean absolute offset over order-matched keyframes; infinity when exactly
/// one list is empty.
///
/// # Safety
/// Arrays must hold the given counts and `value` must be valid.
#[no_mangle]
pub unsafe extern "C" fn kfd_location_error(
    predicted: *const usize,
    n_predicted: usize,
    ground_truth: *const usize,
    n_ground_truth: usize,
    value: *mut f64,
) -> KfdStatus {
    guard(|| {
        let value = out_ptr(value, "value")?;
        *value = location_error(
            input(predicted, n_predicted, "predicted")?,
            input(ground_truth, n_ground_truth, "ground_truth")?,
        )?;
        Ok(())
    })
}

/// Unit discriminant direction of `target` rows against `rest` rows, both
/// row-major with `dim` columns. Writes `dim` values to `w`.
///
/// # Safety
/// `target` holds `n_target * dim` doubles, `rest` holds `n_rest * dim`,
/// `w` holds `dim`.
#[no_mangle]
pub unsafe extern "C" fn kfd_lda_direction(
    target: *const f64,
    n_target: usize,
    rest: *const f64,
    n_rest: usize,
    dim: usize,
    lambda: f64,
    w: *mut f64,
) -> KfdStatus {
    guard(|| {
        let size = |n: usize| {
            n.checked_mul(dim)
                .ok_or_else(|| Failure(fail(KfdStatus::Invalid, "rows * dim overflows")))
        };
        let a = input(target, size(n_target)?, "target")?;
        let b = input(rest, size(n_rest)?, "rest")?;
        let w = output(w, dim, "w")?;
        let cm = ClassMatrices::new(
            "ffi",
            DMatrix::from_row_slice(n_target, dim, a),
            DMatrix::from_row_slice(n_rest, dim, b),
        )?;
        w.copy_from_slice(&lda_direction(&cm, lambda)?.w);
        Ok(())
    })
}
