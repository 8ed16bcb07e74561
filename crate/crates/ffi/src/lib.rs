//! C ABI over `gausspsl`.
//!
//! Objects cross the boundary as opaque handles created by `*_new` and
//! released by the matching `*_free`. Every fallible call returns a
//! [`GpslStatus`]; on failure the message is available from
//! [`gpsl_last_error`] on the same thread until the next failing call.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use gausspsl::metrics::hypervolume;
use gausspsl::problems::{ProblemId, ProblemSpec};
use gausspsl::psl_model::{predict, TrainConfig, Trainer};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GpslStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Training = 3,
    Panic = 4,
}

/// Benchmark problem handle.
pub struct GpslProblem {
    spec: ProblemSpec,
}

/// Training session handle. Owns its own copy of the problem.
pub struct GpslTrainer {
    trainer: Trainer,
    k: usize,
    n: usize,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: impl Into<String>) {
    let text = message.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(text).ok());
}

fn guard(f: impl FnOnce() -> Result<(), (GpslStatus, String)>) -> GpslStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => GpslStatus::Ok,
        Ok(Err((status, message))) => {
            set_error(message);
            status
        }
        Err(_) => {
            set_error("panic inside gausspsl");
            GpslStatus::Panic
        }
    }
}

fn null(what: &str) -> (GpslStatus, String) {
    (GpslStatus::NullPointer, format!("{what} is null"))
}

fn invalid(e: impl std::fmt::Display) -> (GpslStatus, String) {
    (GpslStatus::InvalidArgument, e.to_string())
}

unsafe fn read_str<'a>(s: *const c_char, what: &str) -> Result<&'a str, (GpslStatus, String)> {
    if s.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|_| invalid(format!("{what} is not valid UTF-8")))
}

/// Message of the last failed call on this thread, or null. The pointer is
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn gpsl_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn gpsl_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Creates a problem by name (`"ZDT3"`, `"DTLZ5"`, `"DTLZ7"`, `"RE21"`,
/// `"RE36"`, `"RE37"`; case-insensitive).
///
/// # Safety
/// `name` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn gpsl_problem_new(name: *const c_char, out: *mut *mut GpslProblem) -> GpslStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let id: ProblemId = read_str(name, "name")?.parse().map_err(invalid)?;
        *out = Box::into_raw(Box::new(GpslProblem {
            spec: ProblemSpec::new(id),
        }));
        Ok(())
    })
}

/// # Safety
/// `problem` must come from [`gpsl_problem_new`] and not be used afterwards.
/// Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn gpsl_problem_free(problem: *mut GpslProblem) {
    if !problem.is_null() {
        drop(Box::from_raw(problem));
    }
}

/// Objective count `k` and decision dimension `n`.
///
/// # Safety
/// `problem` must be a live handle; `k` and `n` writable pointers.
#[no_mangle]
pub unsafe extern "C" fn gpsl_problem_dims(
    problem: *const GpslProblem,
    k: *mut usize,
    n: *mut usize,
) -> GpslStatus {
    guard(|| {
        let p = problem.as_ref().ok_or_else(|| null("problem"))?;
        if k.is_null() || n.is_null() {
            return Err(null("output"));
        }
        *k = p.spec.k;
        *n = p.spec.n;
        Ok(())
    })
}

/// Evaluates `x` (length `n`) into `objectives` (length `k`).
///
/// # Safety
/// `x` must point to `n_len` readable doubles and `objectives` to `k_len`
/// writable doubles.
#[no_mangle]
pub unsafe extern "C" fn gpsl_problem_evaluate(
    problem: *const GpslProblem,
    x: *const f64,
    n_len: usize,
    objectives: *mut f64,
    k_len: usize,
) -> GpslStatus {
    guard(|| {
        let p = problem.as_ref().ok_or_else(|| null("problem"))?;
        if x.is_null() || objectives.is_null() {
            return Err(null("buffer"));
        }
        if n_len != p.spec.n || k_len != p.spec.k {
            return Err(invalid(format!(
                "buffers of length {n_len}/{k_len}, expected {}/{}",
                p.spec.n, p.spec.k
            )));
        }
        let f = p
            .spec
            .evaluate(slice::from_raw_parts(x, n_len))
            .map_err(invalid)?;
        slice::from_raw_parts_mut(objectives, k_len).copy_from_slice(&f);
        Ok(())
    })
}

/// Starts a training session. `config_toml` holds training settings in the
/// same TOML form as the `[train]` table of an experiment file; null means
/// defaults.
///
/// # Safety
/// `problem` must be a live handle, `config_toml` null or NUL-terminated,
/// `out` writable.
#[no_mangle]
pub unsafe extern "C" fn gpsl_trainer_new(
    problem: *const GpslProblem,
    config_toml: *const c_char,
    out: *mut *mut GpslTrainer,
) -> GpslStatus {
    guard(|| {
        let p = problem.as_ref().ok_or_else(|| null("problem"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let config: TrainConfig = if config_toml.is_null() {
            TrainConfig::default()
        } else {
            toml::from_str(read_str(config_toml, "config")?).map_err(invalid)?
        };
        let trainer = Trainer::new(&p.spec, config).map_err(invalid)?;
        *out = Box::into_raw(Box::new(GpslTrainer {
            trainer,
            k: p.spec.k,
            n: p.spec.n,
        }));
        Ok(())
    })
}

/// # Safety
/// `trainer` must come from [`gpsl_trainer_new`] and not be used afterwards.
/// Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn gpsl_trainer_free(trainer: *mut GpslTrainer) {
    if !trainer.is_null() {
        drop(Box::from_raw(trainer));
    }
}

/// One optimizer step; writes the batch loss to `loss` when non-null.
///
/// # Safety
/// `trainer` must be a live handle; `loss` null or writable.
#[no_mangle]
pub unsafe extern "C" fn gpsl_trainer_step(trainer: *mut GpslTrainer, loss: *mut f64) -> GpslStatus {
    guard(|| {
        let t = trainer.as_mut().ok_or_else(|| null("trainer"))?;
        let l = t
            .trainer
            .step()
            .map_err(|e| (GpslStatus::Training, e.to_string()))?;
        if !loss.is_null() {
            *loss = l;
        }
        Ok(())
    })
}

/// Completed iterations, or 0 for a null handle.
///
/// # Safety
/// `trainer` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn gpsl_trainer_iteration(trainer: *const GpslTrainer) -> usize {
    trainer.as_ref().map_or(0, |t| t.trainer.iteration())
}

/// Live Gaussian subspaces (0 for plain models or a null handle).
///
/// # Safety
/// `trainer` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn gpsl_trainer_subspace_count(trainer: *const GpslTrainer) -> usize {
    trainer.as_ref().map_or(0, |t| t.trainer.model().subspace_count())
}

/// Decisions for `count` preferences. `prefs` is row-major `count × k`,
/// `decisions` row-major `count × n`.
///
/// # Safety
/// `prefs` must hold `count * k` readable doubles and `decisions`
/// `count * n` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn gpsl_trainer_predict(
    trainer: *const GpslTrainer,
    prefs: *const f64,
    count: usize,
    decisions: *mut f64,
) -> GpslStatus {
    guard(|| {
        let t = trainer.as_ref().ok_or_else(|| null("trainer"))?;
        if prefs.is_null() || decisions.is_null() {
            return Err(null("buffer"));
        }
        if count == 0 {
            return Ok(());
        }
        let rows: Vec<Vec<f64>> = slice::from_raw_parts(prefs, count * t.k)
            .chunks(t.k)
            .map(<[f64]>::to_vec)
            .collect();
        let xs = predict(t.trainer.model(), &rows).map_err(invalid)?;
        let out = slice::from_raw_parts_mut(decisions, count * t.n);
        for (dst, x) in out.chunks_mut(t.n).zip(&xs) {
            dst.copy_from_slice(x);
        }
        Ok(())
    })
}

/// Exact hypervolume of `count` points of dimension `k` (2 or 3), row-major,
/// against `reference`.
///
/// # Safety
/// `points` must hold `count * k` readable doubles, `reference` `k`, and
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gpsl_hypervolume(
    points: *const f64,
    count: usize,
    k: usize,
    reference: *const f64,
    out: *mut f64,
) -> GpslStatus {
    guard(|| {
        if points.is_null() || reference.is_null() || out.is_null() {
            return Err(null("buffer"));
        }
        if k == 0 {
            return Err(invalid("dimension must be positive"));
        }
        let pts: Vec<Vec<f64>> = slice::from_raw_parts(points, count * k)
            .chunks(k)
            .map(<[f64]>::to_vec)
            .collect();
        *out = hypervolume(&pts, slice::from_raw_parts(reference, k)).map_err(invalid)?;
        Ok(())
    })
}
