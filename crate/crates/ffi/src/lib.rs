//! C interface. Objects cross the boundary as opaque handles that the
//! caller releases with the matching `*_free` function. Every fallible call
//! returns an [`LpStatus`]; on failure [`lp_last_error`] describes it.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use logplace::dataset::{read_dataset, Dataset};
use logplace::eval::evaluate_model;
use logplace::learn::ModelArtifact;
use logplace::metrics::{schema_hash, FEATURE_COUNT};
use logplace::pipeline::extract_source;
use logplace::provenance::Provenance;
use logplace::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    Config = 3,
    Io = 4,
    Parse = 5,
    SchemaMismatch = 6,
    Malformed = 7,
    Data = 8,
    Training = 9,
    OutOfRange = 10,
    Internal = 11,
}

impl From<&Error> for LpStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::Config(_) => LpStatus::Config,
            Error::Io { .. } => LpStatus::Io,
            Error::Parse { .. } => LpStatus::Parse,
            Error::SchemaMismatch { .. } => LpStatus::SchemaMismatch,
            Error::Malformed { .. } => LpStatus::Malformed,
            Error::Data(_) => LpStatus::Data,
            Error::Training(_) => LpStatus::Training,
            Error::Internal(_) => LpStatus::Internal,
        }
    }
}

/// A labelled feature table.
pub struct LpDataset {
    data: Dataset,
    ids: Vec<CString>,
}

/// A trained classifier.
pub struct LpModel {
    model: ModelArtifact,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct LpScores {
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    pub fn_: u64,
    pub balanced_accuracy: f64,
    pub precision: f64,
    pub recall: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct LpRemoval {
    pub methods: usize,
    pub logged_methods: usize,
    pub logs_before: usize,
    pub logs_after: usize,
    pub guards_removed: usize,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

static VERSION: &CStr = match CStr::from_bytes_with_nul(concat!(env!("CARGO_PKG_VERSION"), "\0").as_bytes()) {
    Ok(s) => s,
    Err(_) => panic!("version string"),
};

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).unwrap_or_default());
}

struct Fail(LpStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail((&e).into(), e.to_string())
    }
}

fn fail(status: LpStatus, msg: &str) -> Fail {
    Fail(status, msg.to_string())
}

/// Run `f`, translating errors and panics into a status code.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> LpStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            LpStatus::Ok
        }
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            LpStatus::Internal
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, name: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(fail(LpStatus::NullArgument, &format!("{name} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(LpStatus::InvalidUtf8, &format!("{name} is not UTF-8")))
}

unsafe fn ref_arg<'a, T>(p: *const T, name: &str) -> Result<&'a T, Fail> {
    p.as_ref()
        .ok_or_else(|| fail(LpStatus::NullArgument, &format!("{name} is null")))
}

unsafe fn out_arg<'a, T>(p: *mut T, name: &str) -> Result<&'a mut T, Fail> {
    p.as_mut()
        .ok_or_else(|| fail(LpStatus::NullArgument, &format!("{name} is null")))
}

fn wrap_dataset(data: Dataset) -> *mut LpDataset {
    let ids = data
        .rows()
        .iter()
        .map(|r| CString::new(r.id.to_string().replace('\0', " ")).unwrap_or_default())
        .collect();
    Box::into_raw(Box::new(LpDataset { data, ids }))
}

/// Message of the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn lp_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

#[no_mangle]
pub extern "C" fn lp_version() -> *const c_char {
    VERSION.as_ptr()
}

/// Number of values in one feature row.
#[no_mangle]
pub extern "C" fn lp_feature_count() -> usize {
    FEATURE_COUNT
}

/// Copy the NUL-terminated feature schema hash into `buf`.
///
/// # Safety
/// `buf` must point to at least `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn lp_schema_hash(buf: *mut c_char, len: usize) -> LpStatus {
    guard(|| {
        if buf.is_null() {
            return Err(fail(LpStatus::NullArgument, "buf is null"));
        }
        let hash = schema_hash().as_bytes();
        if len < hash.len() + 1 {
            return Err(fail(LpStatus::OutOfRange, "buffer too small"));
        }
        std::ptr::copy_nonoverlapping(hash.as_ptr(), buf as *mut u8, hash.len());
        *buf.add(hash.len()) = 0;
        Ok(())
    })
}

/// Read a dataset CSV. `expected_schema` may be null to skip the check.
///
/// # Safety
/// String arguments must be null or NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lp_dataset_read(
    path: *const c_char,
    expected_schema: *const c_char,
    out: *mut *mut LpDataset,
) -> LpStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let path = str_arg(path, "path")?;
        let expected = if expected_schema.is_null() {
            None
        } else {
            Some(str_arg(expected_schema, "expected_schema")?)
        };
        *out = wrap_dataset(read_dataset(Path::new(path), expected)?);
        Ok(())
    })
}

/// Remove logs from one Java source and extract its labelled feature rows.
/// `report` may be null.
///
/// # Safety
/// String arguments must be NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lp_extract_source(
    path: *const c_char,
    source: *const c_char,
    strict_log_regex: bool,
    out: *mut *mut LpDataset,
    report: *mut LpRemoval,
) -> LpStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let path = str_arg(path, "path")?;
        let source = str_arg(source, "source")?;
        let (rows, removal) = extract_source(path, source, strict_log_regex)?;
        if let Some(r) = report.as_mut() {
            *r = LpRemoval {
                methods: rows.len(),
                logged_methods: rows.iter().filter(|r| r.label).count(),
                logs_before: removal.logs_before,
                logs_after: removal.logs_after,
                guards_removed: removal.guards_removed,
            };
        }
        *out = wrap_dataset(Dataset::new(Provenance::new("source", 0), rows)?);
        Ok(())
    })
}

/// # Safety
/// `ds` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn lp_dataset_len(ds: *const LpDataset) -> usize {
    ds.as_ref().map_or(0, |d| d.data.len())
}

/// # Safety
/// `ds` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn lp_dataset_positives(ds: *const LpDataset) -> usize {
    ds.as_ref().map_or(0, |d| d.data.positives())
}

/// Copy row `index` into `values` (`lp_feature_count()` doubles) and its
/// label into `label`. Either output may be null.
///
/// # Safety
/// `ds` must be a live handle; `values` must hold `lp_feature_count()`
/// doubles when non-null.
#[no_mangle]
pub unsafe extern "C" fn lp_dataset_row(
    ds: *const LpDataset,
    index: usize,
    values: *mut f64,
    label: *mut bool,
) -> LpStatus {
    guard(|| {
        let ds = ref_arg(ds, "ds")?;
        let row = ds
            .data
            .rows()
            .get(index)
            .ok_or_else(|| fail(LpStatus::OutOfRange, "row index out of range"))?;
        if !values.is_null() {
            std::ptr::copy_nonoverlapping(row.values.as_ptr(), values, row.values.len());
        }
        if let Some(l) = label.as_mut() {
            *l = row.label;
        }
        Ok(())
    })
}

/// Identity of row `index` as `file::class::signature`, or null when out of
/// range. The string lives as long as the dataset.
///
/// # Safety
/// `ds` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn lp_dataset_row_id(ds: *const LpDataset, index: usize) -> *const c_char {
    ds.as_ref()
        .and_then(|d| d.ids.get(index))
        .map_or(std::ptr::null(), |s| s.as_ptr())
}

/// # Safety
/// `ds` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn lp_dataset_free(ds: *mut LpDataset) {
    if !ds.is_null() {
        drop(Box::from_raw(ds));
    }
}

/// Load a model artifact, rejecting one trained on another feature schema.
///
/// # Safety
/// `path` must be NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lp_model_load(path: *const c_char, out: *mut *mut LpModel) -> LpStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let path = str_arg(path, "path")?;
        let model = ModelArtifact::load(Path::new(path), Some(schema_hash()))?;
        *out = Box::into_raw(Box::new(LpModel { model }));
        Ok(())
    })
}

/// Score one feature row. `score` (probability of logging) and `label` may
/// be null.
///
/// # Safety
/// `model` must be a live handle; `values` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn lp_model_predict_row(
    model: *const LpModel,
    values: *const f64,
    len: usize,
    score: *mut f64,
    label: *mut bool,
) -> LpStatus {
    guard(|| {
        let model = ref_arg(model, "model")?;
        if values.is_null() {
            return Err(fail(LpStatus::NullArgument, "values is null"));
        }
        if len != FEATURE_COUNT {
            return Err(fail(
                LpStatus::SchemaMismatch,
                &format!("expected {FEATURE_COUNT} values, got {len}"),
            ));
        }
        let row = std::slice::from_raw_parts(values, len);
        let predicted = model.model.predict_row(row)?;
        if let Some(s) = score.as_mut() {
            *s = model.model.model.score(row);
        }
        if let Some(l) = label.as_mut() {
            *l = predicted;
        }
        Ok(())
    })
}

/// Confusion matrix and scores of `model` on `ds`.
///
/// # Safety
/// Handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lp_model_evaluate(
    model: *const LpModel,
    ds: *const LpDataset,
    out: *mut LpScores,
) -> LpStatus {
    guard(|| {
        let model = ref_arg(model, "model")?;
        let ds = ref_arg(ds, "ds")?;
        let out = out_arg(out, "out")?;
        let r = evaluate_model(&model.model, &ds.data)?;
        *out = LpScores {
            tp: r.confusion.tp,
            fp: r.confusion.fp,
            tn: r.confusion.tn,
            fn_: r.confusion.fn_,
            balanced_accuracy: r.scores.balanced_accuracy,
            precision: r.scores.precision,
            recall: r.scores.recall,
        };
        Ok(())
    })
}

/// # Safety
/// `model` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn lp_model_free(model: *mut LpModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}
