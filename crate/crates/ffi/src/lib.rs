//! C ABI over the typedcrf library.
//!
//! Objects cross the boundary as opaque heap handles created by `*_new`,
//! `*_load` or `*_generate` and released by the matching `*_free`. Every
//! fallible call returns a [`TypedcrfStatus`]; on failure the message is kept
//! per thread and read back with [`typedcrf_last_error_message`]. Panics are
//! caught at the boundary and reported as `TYPEDCRF_STATUS_PANIC`.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;

use typedcrf::crf_model::{read_weights, Weights};
use typedcrf::experiment::predict_images;
use typedcrf::factor_graph::{
    project_factor, solve_map, AdmmSettings, Factor, FactorGraph, FactorKind, Literal, SolveStatus,
};
use typedcrf::snake_data::{generate_dataset, load_dataset, HiddenSnakeSample, ImageLabel};
use typedcrf::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TypedcrfStatus {
    Ok = 0,
    InvalidArgument = 1,
    Dimension = 2,
    InvalidFactor = 3,
    UnsupportedFactor = 4,
    InvalidConstraint = 5,
    Unsatisfiable = 6,
    Capacity = 7,
    DegenerateData = 8,
    Parse = 9,
    Io = 10,
    NullPointer = 11,
    Panic = 12,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TypedcrfFactorKind {
    Xor = 0,
    AtMostOne = 1,
    Or = 2,
    Imply = 3,
}

impl From<TypedcrfFactorKind> for FactorKind {
    fn from(k: TypedcrfFactorKind) -> Self {
        match k {
            TypedcrfFactorKind::Xor => FactorKind::Xor,
            TypedcrfFactorKind::AtMostOne => FactorKind::AtMostOne,
            TypedcrfFactorKind::Or => FactorKind::Or,
            TypedcrfFactorKind::Imply => FactorKind::Imply,
        }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TypedcrfAdmmSettings {
    pub penalty: f64,
    pub max_iterations: usize,
    pub residual_tolerance: f64,
}

impl From<TypedcrfAdmmSettings> for AdmmSettings {
    fn from(s: TypedcrfAdmmSettings) -> Self {
        AdmmSettings {
            penalty: s.penalty,
            max_iterations: s.max_iterations,
            residual_tolerance: s.residual_tolerance,
            ..AdmmSettings::default()
        }
    }
}

/// `status`: 0 integral, 1 fractional, 2 iteration budget exhausted.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TypedcrfSolveInfo {
    pub relaxed_objective: f64,
    pub rounded_objective: f64,
    pub iterations: usize,
    pub violated_factors: usize,
    pub status: c_int,
}

pub struct TypedcrfGraph(FactorGraph);
pub struct TypedcrfWeights(Weights);
pub struct TypedcrfDataset(Vec<HiddenSnakeSample>);

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(e: &Error) -> TypedcrfStatus {
    match e {
        Error::InvalidArgument(_) => TypedcrfStatus::InvalidArgument,
        Error::Dimension(_) => TypedcrfStatus::Dimension,
        Error::InvalidFactor(_) => TypedcrfStatus::InvalidFactor,
        Error::UnsupportedFactor(_) => TypedcrfStatus::UnsupportedFactor,
        Error::InvalidConstraint(_) => TypedcrfStatus::InvalidConstraint,
        Error::Unsatisfiable(_) => TypedcrfStatus::Unsatisfiable,
        Error::Capacity(_) => TypedcrfStatus::Capacity,
        Error::DegenerateData(_) => TypedcrfStatus::DegenerateData,
        Error::Parse { .. } => TypedcrfStatus::Parse,
        Error::Io(_) => TypedcrfStatus::Io,
    }
}

enum Failure {
    Lib(Error),
    Null(&'static str),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

type FfiResult = Result<(), Failure>;

fn guard(f: impl FnOnce() -> FfiResult) -> TypedcrfStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error(String::new());
            TypedcrfStatus::Ok
        }
        Ok(Err(Failure::Lib(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Ok(Err(Failure::Null(what))) => {
            set_error(format!("null pointer: {what}"));
            TypedcrfStatus::NullPointer
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            TypedcrfStatus::Panic
        }
    }
}

unsafe fn as_ref<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or(Failure::Null(what))
}

unsafe fn as_mut<'a, T>(p: *mut T, what: &'static str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or(Failure::Null(what))
}

/// Empty slices may come with a null pointer.
unsafe fn slice<'a, T>(p: *const T, n: usize, what: &'static str) -> Result<&'a [T], Failure> {
    if n == 0 {
        Ok(&[])
    } else if p.is_null() {
        Err(Failure::Null(what))
    } else {
        Ok(std::slice::from_raw_parts(p, n))
    }
}

unsafe fn slice_mut<'a, T>(p: *mut T, n: usize, what: &'static str) -> Result<&'a mut [T], Failure> {
    if n == 0 {
        Ok(&mut [])
    } else if p.is_null() {
        Err(Failure::Null(what))
    } else {
        Ok(std::slice::from_raw_parts_mut(p, n))
    }
}

unsafe fn path(p: *const c_char) -> Result<PathBuf, Failure> {
    if p.is_null() {
        return Err(Failure::Null("path"));
    }
    let s = CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Error::InvalidArgument("path is not valid UTF-8".into()))?;
    Ok(PathBuf::from(s))
}

fn check_len(have: usize, need: usize, what: &str) -> FfiResult {
    if have < need {
        return Err(Error::Dimension(format!("{what} buffer holds {have}, needs {need}")).into());
    }
    Ok(())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn typedcrf_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Length in bytes of the calling thread's last error message, without the
/// terminating NUL; 0 after a successful call.
#[no_mangle]
pub extern "C" fn typedcrf_last_error_length() -> usize {
    LAST_ERROR.with(|e| e.borrow().len())
}

/// Copies the last error message into `buf` (truncated, always
/// NUL-terminated when `len > 0`) and returns the number of bytes written
/// before the NUL.
#[no_mangle]
pub unsafe extern "C" fn typedcrf_last_error_message(buf: *mut c_char, len: usize) -> usize {
    if buf.is_null() || len == 0 {
        return 0;
    }
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        let n = msg.len().min(len - 1);
        ptr::copy_nonoverlapping(msg.as_ptr().cast::<c_char>(), buf, n);
        *buf.add(n) = 0;
        n
    })
}

#[no_mangle]
pub extern "C" fn typedcrf_admm_settings_default() -> TypedcrfAdmmSettings {
    let d = AdmmSettings::default();
    TypedcrfAdmmSettings {
        penalty: d.penalty,
        max_iterations: d.max_iterations,
        residual_tolerance: d.residual_tolerance,
    }
}

#[no_mangle]
pub unsafe extern "C" fn typedcrf_graph_new(out: *mut *mut TypedcrfGraph) -> TypedcrfStatus {
    guard(|| {
        let out = as_mut(out, "out")?;
        *out = Box::into_raw(Box::new(TypedcrfGraph(FactorGraph::new())));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn typedcrf_graph_free(g: *mut TypedcrfGraph) {
    if !g.is_null() {
        drop(Box::from_raw(g));
    }
}

/// Adds a binary variable with linear potential `potential`; its index goes
/// to `out_id` when that is non-null.
#[no_mangle]
pub unsafe extern "C" fn typedcrf_graph_add_variable(
    g: *mut TypedcrfGraph,
    potential: f64,
    out_id: *mut usize,
) -> TypedcrfStatus {
    guard(|| {
        let g = as_mut(g, "graph")?;
        if !potential.is_finite() {
            return Err(Error::InvalidArgument(format!("potential {potential} is not finite")).into());
        }
        let id = g.0.add_variable(potential);
        if let Some(out) = out_id.as_mut() {
            *out = id;
        }
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn typedcrf_graph_num_variables(g: *const TypedcrfGraph) -> usize {
    g.as_ref().map_or(0, |g| g.0.num_variables())
}

/// Adds a hard factor over `n` literals; `negated` may be null when no
/// literal is negated.
#[no_mangle]
pub unsafe extern "C" fn typedcrf_graph_add_factor(
    g: *mut TypedcrfGraph,
    kind: TypedcrfFactorKind,
    variables: *const usize,
    negated: *const bool,
    n: usize,
) -> TypedcrfStatus {
    guard(|| {
        let g = as_mut(g, "graph")?;
        let vars = slice(variables, n, "variables")?;
        let neg = if negated.is_null() {
            vec![false; n]
        } else {
            slice(negated, n, "negated")?.to_vec()
        };
        let literals = vars
            .iter()
            .zip(neg)
            .map(|(&variable, negated)| Literal { variable, negated })
            .collect();
        g.0.add_factor(Factor::new(kind.into(), literals))?;
        Ok(())
    })
}

/// Approximate MAP. Writes one 0/1 byte per variable into `assignment`
/// (`len` must cover every variable) and, when `info` is non-null, the
/// solve summary. A null `settings` selects the defaults.
#[no_mangle]
pub unsafe extern "C" fn typedcrf_graph_solve(
    g: *const TypedcrfGraph,
    settings: *const TypedcrfAdmmSettings,
    assignment: *mut u8,
    len: usize,
    info: *mut TypedcrfSolveInfo,
) -> TypedcrfStatus {
    guard(|| {
        let g = as_ref(g, "graph")?;
        let s = settings
            .as_ref()
            .map_or_else(AdmmSettings::default, |s| AdmmSettings::from(*s));
        check_len(len, g.0.num_variables(), "assignment")?;
        let out = slice_mut(assignment, len, "assignment")?;
        let r = solve_map(&g.0, &s)?;
        out[..r.assignment.len()].copy_from_slice(&r.assignment);
        if let Some(info) = info.as_mut() {
            *info = TypedcrfSolveInfo {
                relaxed_objective: r.relaxed_objective,
                rounded_objective: r.rounded_objective,
                iterations: r.iterations,
                violated_factors: r.violated_factors,
                status: match r.status {
                    SolveStatus::Integral => 0,
                    SolveStatus::Fractional => 1,
                    SolveStatus::MaxIterations => 2,
                },
            };
        }
        Ok(())
    })
}

/// Euclidean projection of `values` onto the polytope of a factor of
/// `kind` over `n` literals; writes `n` values into `out`.
#[no_mangle]
pub unsafe extern "C" fn typedcrf_project_factor(
    kind: TypedcrfFactorKind,
    negated: *const bool,
    values: *const f64,
    n: usize,
    out: *mut f64,
) -> TypedcrfStatus {
    guard(|| {
        let v = slice(values, n, "values")?;
        let neg = if negated.is_null() {
            vec![false; n]
        } else {
            slice(negated, n, "negated")?.to_vec()
        };
        let out = slice_mut(out, n, "out")?;
        out.copy_from_slice(&project_factor(kind.into(), &neg, v)?);
        Ok(())
    })
}

/// Loads a weights file written by `typedcrf train`.
#[no_mangle]
pub unsafe extern "C" fn typedcrf_weights_load(
    file: *const c_char,
    out: *mut *mut TypedcrfWeights,
) -> TypedcrfStatus {
    guard(|| {
        let out = as_mut(out, "out")?;
        let p = path(file)?;
        let f = std::fs::File::open(&p).map_err(|e| Error::Io(format!("{}: {e}", p.display())))?;
        let w = read_weights(std::io::BufReader::new(f))?;
        *out = Box::into_raw(Box::new(TypedcrfWeights(w)));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn typedcrf_weights_free(w: *mut TypedcrfWeights) {
    if !w.is_null() {
        drop(Box::from_raw(w));
    }
}

/// Node types of the model's schema; 0 for a null handle.
#[no_mangle]
pub unsafe extern "C" fn typedcrf_weights_num_types(w: *const TypedcrfWeights) -> usize {
    w.as_ref().map_or(0, |w| w.0.schema().num_types())
}

/// Flattened parameter count (with feature dimensions); 0 for a null handle.
#[no_mangle]
pub unsafe extern "C" fn typedcrf_weights_len(w: *const TypedcrfWeights) -> usize {
    w.as_ref().map_or(0, |w| w.0.schema().weight_len())
}

#[no_mangle]
pub unsafe extern "C" fn typedcrf_dataset_load(
    file: *const c_char,
    out: *mut *mut TypedcrfDataset,
) -> TypedcrfStatus {
    guard(|| {
        let out = as_mut(out, "out")?;
        let data = load_dataset(&path(file)?)?;
        *out = Box::into_raw(Box::new(TypedcrfDataset(data)));
        Ok(())
    })
}

/// Generates `count` Snake images, plus their surviving corruptions when
/// `hidden` is set.
#[no_mangle]
pub unsafe extern "C" fn typedcrf_dataset_generate(
    count: usize,
    hidden: bool,
    seed: u64,
    out: *mut *mut TypedcrfDataset,
) -> TypedcrfStatus {
    guard(|| {
        let out = as_mut(out, "out")?;
        *out = Box::into_raw(Box::new(TypedcrfDataset(generate_dataset(count, hidden, seed))));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn typedcrf_dataset_free(d: *mut TypedcrfDataset) {
    if !d.is_null() {
        drop(Box::from_raw(d));
    }
}

#[no_mangle]
pub unsafe extern "C" fn typedcrf_dataset_len(d: *const TypedcrfDataset) -> usize {
    d.as_ref().map_or(0, |d| d.0.len())
}

/// Height and width of image `index`.
#[no_mangle]
pub unsafe extern "C" fn typedcrf_dataset_shape(
    d: *const TypedcrfDataset,
    index: usize,
    height: *mut usize,
    width: *mut usize,
) -> TypedcrfStatus {
    guard(|| {
        let s = sample(as_ref(d, "dataset")?, index)?;
        *as_mut(height, "height")? = s.image.height();
        *as_mut(width, "width")? = s.image.width();
        Ok(())
    })
}

/// Gold cell labels (row-major, `len` >= cells) and image label
/// (0 Snake, 1 NoSnake) of image `index`. Either output may be null.
#[no_mangle]
pub unsafe extern "C" fn typedcrf_dataset_labels(
    d: *const TypedcrfDataset,
    index: usize,
    labels: *mut usize,
    len: usize,
    image_label: *mut c_int,
) -> TypedcrfStatus {
    guard(|| {
        let s = sample(as_ref(d, "dataset")?, index)?;
        if !labels.is_null() {
            check_len(len, s.image.num_cells(), "labels")?;
            let out = slice_mut(labels, len, "labels")?;
            for (o, &l) in out.iter_mut().zip(s.image.labels()) {
                *o = usize::from(l);
            }
        }
        if let Some(img) = image_label.as_mut() {
            *img = s.image_label.index() as c_int;
        }
        Ok(())
    })
}

fn sample(d: &TypedcrfDataset, index: usize) -> Result<&HiddenSnakeSample, Failure> {
    d.0.get(index).ok_or_else(|| {
        Error::InvalidArgument(format!("image {index} out of range for {} images", d.0.len())).into()
    })
}

/// Decodes image `index` with a single-type or pixel+image model. Cell
/// labels go to `labels` (row-major, `len` >= cells); the image label goes
/// to `image_label` (0 Snake, 1 NoSnake, -1 when the model has no image
/// node). `constrained` adds one AT_MOST_ONE per snake label. A null
/// `settings` selects the defaults.
#[no_mangle]
pub unsafe extern "C" fn typedcrf_predict(
    w: *const TypedcrfWeights,
    d: *const TypedcrfDataset,
    index: usize,
    constrained: bool,
    settings: *const TypedcrfAdmmSettings,
    labels: *mut usize,
    len: usize,
    image_label: *mut c_int,
) -> TypedcrfStatus {
    guard(|| {
        let w = as_ref(w, "weights")?;
        let s = sample(as_ref(d, "dataset")?, index)?;
        let settings = settings
            .as_ref()
            .map_or_else(AdmmSettings::default, |s| AdmmSettings::from(*s));
        check_len(len, s.image.num_cells(), "labels")?;
        let out = slice_mut(labels, len, "labels")?;
        let p = predict_images(&w.0, std::slice::from_ref(s), &settings, constrained)?
            .pop()
            .expect("one prediction per image");
        if let Some(pixels) = &p.pixels {
            out[..pixels.len()].copy_from_slice(pixels);
        }
        if let Some(img) = image_label.as_mut() {
            *img = match p.image {
                Some(ImageLabel::Snake) => 0,
                Some(ImageLabel::NoSnake) => 1,
                None => -1,
            };
        }
        Ok(())
    })
}
