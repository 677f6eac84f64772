//! C ABI over the `solvency` crate.
//!
//! Datasets, models and reports are opaque heap handles created by
//! `solv_*` constructors and released with the matching `*_free`. Every
//! fallible call returns a [`SolvStatus`]; on failure a description is
//! available from [`solv_last_error`] until the next call on the same
//! thread. Strings returned through `char **` must be released with
//! [`solv_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::fs::File;
use std::io::BufReader;
use std::panic::{catch_unwind, AssertUnwindSafe};

use solvency::balance::{resample, smote, BalanceMode, BalanceTargets};
use solvency::datagen::{generate, GeneratorSpec};
use solvency::dataset::{label_from_car, load_csv, write_csv, Dataset};
use solvency::error::Error;
use solvency::eval::{cross_validate, evaluate_on, EvalReport};
use solvency::tree::{grow, parse, render, serialize, LearnerParams, TreeModel};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolvStatus {
    Ok = 0,
    InvalidArgument = 1,
    InvalidValue = 2,
    ParseError = 3,
    StateError = 4,
    SamplingError = 5,
    InsufficientClass = 6,
    IoError = 7,
    NullPointer = 8,
    Panic = 9,
}

/// Class indices used across the interface.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolvClass {
    Insolvency = 0,
    Weak = 1,
    Moderate = 2,
    Strong = 3,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolvBalanceMode {
    None = 0,
    Resample = 1,
    Smote = 2,
}

/// Optional per-fold balancing for [`solv_cross_validate`].
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct SolvBalance {
    pub mode: SolvBalanceMode,
    pub bias_to_uniform: f64,
    pub sample_size_percent: f64,
    pub target_counts: [usize; 4],
    pub k_neighbors: usize,
    pub seed: u64,
}

pub struct SolvDataset {
    inner: Dataset,
}

pub struct SolvModel {
    inner: TreeModel,
}

pub struct SolvReport {
    inner: EvalReport,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let mut msg = msg.into();
    msg.retain(|c| c != '\0');
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).unwrap_or_default());
}

fn status_of(e: &Error) -> SolvStatus {
    match e {
        Error::InvalidArgument(_) => SolvStatus::InvalidArgument,
        Error::InvalidValue(_) => SolvStatus::InvalidValue,
        Error::Csv { .. } | Error::ModelParse { .. } | Error::Config(_) => SolvStatus::ParseError,
        Error::State(_) => SolvStatus::StateError,
        Error::Sampling { .. } => SolvStatus::SamplingError,
        Error::InsufficientClass { .. } => SolvStatus::InsufficientClass,
        Error::Io(_) => SolvStatus::IoError,
    }
}

/// Runs `f`, translating errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), SolvStatusError>) -> SolvStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            SolvStatus::Ok
        }
        Ok(Err(SolvStatusError(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            SolvStatus::Panic
        }
    }
}

struct SolvStatusError(SolvStatus, String);

impl From<Error> for SolvStatusError {
    fn from(e: Error) -> Self {
        SolvStatusError(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> SolvStatusError {
    SolvStatusError(SolvStatus::NullPointer, format!("{what} is null"))
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, SolvStatusError> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| SolvStatusError(SolvStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

unsafe fn ref_arg<'a, T>(p: *const T, what: &str) -> Result<&'a T, SolvStatusError> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn put<T>(out: *mut *mut T, value: T) -> Result<(), SolvStatusError> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

unsafe fn put_string(out: *mut *mut c_char, s: String) -> Result<(), SolvStatusError> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    let c = CString::new(s).map_err(|_| SolvStatusError(SolvStatus::InvalidValue, "string contains NUL".into()))?;
    *out = c.into_raw();
    Ok(())
}

/// Message describing the last failed call on this thread; empty after a
/// successful call. Owned by the library.
#[no_mangle]
pub extern "C" fn solv_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// # Safety
/// `s` must be null or a string returned by this library.
#[no_mangle]
pub unsafe extern "C" fn solv_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn solv_label_from_car(car: f64, out: *mut SolvClass) -> SolvStatus {
    guard(|| {
        let class = label_from_car(car)?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = class_to_c(class.index());
        Ok(())
    })
}

fn class_to_c(i: usize) -> SolvClass {
    match i {
        0 => SolvClass::Insolvency,
        1 => SolvClass::Weak,
        2 => SolvClass::Moderate,
        _ => SolvClass::Strong,
    }
}

/// Loads a dataset CSV file.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn solv_dataset_load_csv(path: *const c_char, expect_labels: bool, out: *mut *mut SolvDataset) -> SolvStatus {
    guard(|| {
        let path = str_arg(path, "path")?;
        let file = File::open(path).map_err(Error::from)?;
        let inner = load_csv(BufReader::new(file), expect_labels)?;
        put(out, SolvDataset { inner })
    })
}

/// Parses dataset CSV text held in memory.
///
/// # Safety
/// `text` must be a NUL-terminated string; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn solv_dataset_parse_csv(text: *const c_char, expect_labels: bool, out: *mut *mut SolvDataset) -> SolvStatus {
    guard(|| {
        let text = str_arg(text, "text")?;
        let inner = load_csv(text.as_bytes(), expect_labels)?;
        put(out, SolvDataset { inner })
    })
}

/// # Safety
/// `ds` must be a live dataset handle and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn solv_dataset_write_csv(ds: *const SolvDataset, path: *const c_char) -> SolvStatus {
    guard(|| {
        let ds = ref_arg(ds, "dataset")?;
        let path = str_arg(path, "path")?;
        let file = File::create(path).map_err(Error::from)?;
        write_csv(&ds.inner, std::io::BufWriter::new(file))?;
        Ok(())
    })
}

/// # Safety
/// `ds` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn solv_dataset_free(ds: *mut SolvDataset) {
    if !ds.is_null() {
        drop(Box::from_raw(ds));
    }
}

/// Number of records, or 0 for a null handle.
///
/// # Safety
/// `ds` must be null or a live dataset handle.
#[no_mangle]
pub unsafe extern "C" fn solv_dataset_len(ds: *const SolvDataset) -> usize {
    ds.as_ref().map_or(0, |d| d.inner.len())
}

/// Number of schema attributes, or 0 for a null handle.
///
/// # Safety
/// `ds` must be null or a live dataset handle.
#[no_mangle]
pub unsafe extern "C" fn solv_dataset_attribute_count(ds: *const SolvDataset) -> usize {
    ds.as_ref().map_or(0, |d| d.inner.schema().len())
}

/// # Safety
/// `ds` must be a live dataset handle; `out` must hold 4 elements.
#[no_mangle]
pub unsafe extern "C" fn solv_dataset_class_counts(ds: *const SolvDataset, out: *mut usize) -> SolvStatus {
    guard(|| {
        let ds = ref_arg(ds, "dataset")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let counts = ds.inner.class_distribution()?;
        std::slice::from_raw_parts_mut(out, 4).copy_from_slice(&counts);
        Ok(())
    })
}

/// Synthetic dataset with the given per-class counts.
///
/// # Safety
/// `counts` must point to 4 elements; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn solv_generate(
    counts: *const usize,
    separation: f64,
    n_attributes: usize,
    seed: u64,
    out: *mut *mut SolvDataset,
) -> SolvStatus {
    guard(|| {
        if counts.is_null() {
            return Err(null("counts"));
        }
        let mut class_counts = [0; 4];
        class_counts.copy_from_slice(std::slice::from_raw_parts(counts, 4));
        let inner = generate(&GeneratorSpec {
            class_counts,
            separation,
            n_attributes,
            seed,
        })?;
        put(out, SolvDataset { inner })
    })
}

/// # Safety
/// `ds` must be a live dataset handle; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn solv_resample(
    ds: *const SolvDataset,
    bias_to_uniform: f64,
    sample_size_percent: f64,
    seed: u64,
    out: *mut *mut SolvDataset,
) -> SolvStatus {
    guard(|| {
        let ds = ref_arg(ds, "dataset")?;
        let inner = resample(&ds.inner, bias_to_uniform, sample_size_percent, seed)?;
        put(out, SolvDataset { inner })
    })
}

/// # Safety
/// `ds` must be a live dataset handle; `targets` must point to 4
/// elements; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn solv_smote(
    ds: *const SolvDataset,
    targets: *const usize,
    k_neighbors: usize,
    seed: u64,
    out: *mut *mut SolvDataset,
) -> SolvStatus {
    guard(|| {
        let ds = ref_arg(ds, "dataset")?;
        if targets.is_null() {
            return Err(null("targets"));
        }
        let mut t = [0; 4];
        t.copy_from_slice(std::slice::from_raw_parts(targets, 4));
        let inner = smote(&ds.inner, t, k_neighbors, seed)?;
        put(out, SolvDataset { inner })
    })
}

fn learner(confidence_factor: f64, min_leaf: usize, max_depth: usize) -> LearnerParams {
    LearnerParams {
        confidence_factor,
        min_leaf,
        max_depth: (max_depth > 0).then_some(max_depth),
    }
}

/// Grows and prunes a tree. `max_depth == 0` means unlimited.
///
/// # Safety
/// `ds` must be a live dataset handle; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn solv_model_train(
    ds: *const SolvDataset,
    confidence_factor: f64,
    min_leaf: usize,
    max_depth: usize,
    out: *mut *mut SolvModel,
) -> SolvStatus {
    guard(|| {
        let ds = ref_arg(ds, "dataset")?;
        let inner = grow(&ds.inner, &learner(confidence_factor, min_leaf, max_depth))?;
        put(out, SolvModel { inner })
    })
}

/// # Safety
/// `model` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn solv_model_free(model: *mut SolvModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Number of attributes the model expects in [`solv_model_predict`].
///
/// # Safety
/// `model` must be null or a live model handle.
#[no_mangle]
pub unsafe extern "C" fn solv_model_attribute_count(model: *const SolvModel) -> usize {
    model.as_ref().map_or(0, |m| m.inner.schema.len())
}

/// Predicts one record given its schema-ordered attribute values.
///
/// # Safety
/// `values` must point to `n_values` doubles; `out_class` must be valid for
/// writes; `out_probs` must be null or hold 4 elements.
#[no_mangle]
pub unsafe extern "C" fn solv_model_predict(
    model: *const SolvModel,
    values: *const f64,
    n_values: usize,
    out_class: *mut SolvClass,
    out_probs: *mut f64,
) -> SolvStatus {
    guard(|| {
        let model = ref_arg(model, "model")?;
        if values.is_null() && n_values > 0 {
            return Err(null("values"));
        }
        let values = if n_values == 0 { &[][..] } else { std::slice::from_raw_parts(values, n_values) };
        let (class, probs) = model.inner.predict_values(values)?;
        *out_class.as_mut().ok_or_else(|| null("out_class"))? = class_to_c(class.index());
        if !out_probs.is_null() {
            std::slice::from_raw_parts_mut(out_probs, 4).copy_from_slice(&probs);
        }
        Ok(())
    })
}

/// Model file text.
///
/// # Safety
/// `model` must be a live model handle; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn solv_model_serialize(model: *const SolvModel, out: *mut *mut c_char) -> SolvStatus {
    guard(|| {
        let model = ref_arg(model, "model")?;
        put_string(out, serialize(&model.inner))
    })
}

/// # Safety
/// `text` must be a NUL-terminated string; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn solv_model_parse(text: *const c_char, out: *mut *mut SolvModel) -> SolvStatus {
    guard(|| {
        let text = str_arg(text, "text")?;
        let inner = parse(text)?;
        put(out, SolvModel { inner })
    })
}

/// Indented text rendering of the tree.
///
/// # Safety
/// `model` must be a live model handle; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn solv_model_render(model: *const SolvModel, out: *mut *mut c_char) -> SolvStatus {
    guard(|| {
        let model = ref_arg(model, "model")?;
        put_string(out, render(&model.inner))
    })
}

fn balance_targets(b: &SolvBalance) -> Option<BalanceTargets> {
    let mode = match b.mode {
        SolvBalanceMode::None => return None,
        SolvBalanceMode::Resample => BalanceMode::Resample,
        SolvBalanceMode::Smote => BalanceMode::Smote,
    };
    Some(BalanceTargets {
        mode,
        bias_to_uniform: b.bias_to_uniform,
        sample_size_percent: b.sample_size_percent,
        target_counts: b.target_counts,
        k_neighbors: b.k_neighbors,
        seed: b.seed,
    })
}

/// Stratified k-fold cross-validation. `balance` may be null.
///
/// # Safety
/// `ds` must be a live dataset handle; `balance` must be null or valid;
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn solv_cross_validate(
    ds: *const SolvDataset,
    folds: usize,
    confidence_factor: f64,
    min_leaf: usize,
    balance: *const SolvBalance,
    seed: u64,
    out: *mut *mut SolvReport,
) -> SolvStatus {
    guard(|| {
        let ds = ref_arg(ds, "dataset")?;
        let targets = balance.as_ref().and_then(balance_targets);
        let inner = cross_validate(&ds.inner, folds, &learner(confidence_factor, min_leaf, 0), targets.as_ref(), seed)?;
        put(out, SolvReport { inner })
    })
}

/// Scores a model on a labeled dataset.
///
/// # Safety
/// `model` and `ds` must be live handles; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn solv_evaluate(model: *const SolvModel, ds: *const SolvDataset, out: *mut *mut SolvReport) -> SolvStatus {
    guard(|| {
        let model = ref_arg(model, "model")?;
        let ds = ref_arg(ds, "dataset")?;
        let inner = evaluate_on(&model.inner, &ds.inner)?;
        put(out, SolvReport { inner })
    })
}

/// # Safety
/// `report` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn solv_report_free(report: *mut SolvReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// Accuracy, MAE and RMSE; any output pointer may be null.
///
/// # Safety
/// `report` must be a live report handle.
#[no_mangle]
pub unsafe extern "C" fn solv_report_metrics(
    report: *const SolvReport,
    accuracy: *mut f64,
    mae: *mut f64,
    rmse: *mut f64,
) -> SolvStatus {
    guard(|| {
        let r = &ref_arg(report, "report")?.inner;
        if let Some(a) = accuracy.as_mut() {
            *a = r.overall_accuracy;
        }
        if let Some(m) = mae.as_mut() {
            *m = r.mae;
        }
        if let Some(s) = rmse.as_mut() {
            *s = r.rmse;
        }
        Ok(())
    })
}

/// Row-major 4x4 confusion matrix (rows actual, columns predicted).
///
/// # Safety
/// `report` must be a live report handle; `out` must hold 16 elements.
#[no_mangle]
pub unsafe extern "C" fn solv_report_confusion(report: *const SolvReport, out: *mut usize) -> SolvStatus {
    guard(|| {
        let r = &ref_arg(report, "report")?.inner;
        if out.is_null() {
            return Err(null("out"));
        }
        let cells: Vec<usize> = r.matrix.cells.iter().flatten().copied().collect();
        std::slice::from_raw_parts_mut(out, 16).copy_from_slice(&cells);
        Ok(())
    })
}

/// The plain-text confusion table and summary.
///
/// # Safety
/// `report` must be a live report handle; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn solv_report_render(report: *const SolvReport, out: *mut *mut c_char) -> SolvStatus {
    guard(|| {
        let r = &ref_arg(report, "report")?.inner;
        put_string(out, r.render_table())
    })
}
