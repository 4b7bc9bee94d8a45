//! C ABI for patrolsynth.
//!
//! Every function returns a `ps_status` code; outputs go through out-pointers.
//! Handles (`PsGame`, `PsStrategy`) are opaque and must be released with the
//! matching `_free` function. Strings returned by the library are owned by the
//! caller and released with `ps_string_free`. On error, a human-readable
//! message is stored per thread and readable via `ps_last_error_message`.
//!
//! The matching declarations live in `include/patrolsynth.h`.

use std::cell::RefCell;
use std::ffi::{CStr, CString};
use std::os::raw::c_char;

use patrolsynth::cli::{synthesize_report, CliError, GameSpecFile, StrategyFile};
use patrolsynth::{min_patrollers, naive_strategy, protection_upper_bound};

pub const PS_OK: i32 = 0;
pub const PS_ERR_INVALID_ARGUMENT: i32 = 1;
pub const PS_ERR_VALIDATION: i32 = 2;
pub const PS_ERR_INFEASIBLE: i32 = 3;
pub const PS_ERR_INTERNAL: i32 = 4;

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::new("").unwrap());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(err: &CliError) -> i32 {
    match err.exit_code() {
        2 => PS_ERR_VALIDATION,
        3 => PS_ERR_INFEASIBLE,
        _ => PS_ERR_INTERNAL,
    }
}

fn fail(err: CliError) -> i32 {
    let code = status_of(&err);
    set_error(&err.to_string());
    code
}

fn invalid(msg: &str) -> i32 {
    set_error(msg);
    PS_ERR_INVALID_ARGUMENT
}

/// Opaque game handle: a parsed spec (groups + detection probability).
pub struct PsGame {
    spec: GameSpecFile,
}

/// Opaque strategy handle: a synthesized strategy plus its evaluation.
pub struct PsStrategy {
    file: StrategyFile,
}

unsafe fn read_utf8<'a>(ptr: *const c_char) -> Result<&'a str, i32> {
    if ptr.is_null() {
        return Err(invalid("null string argument"));
    }
    CStr::from_ptr(ptr)
        .to_str()
        .map_err(|_| invalid("string argument is not valid UTF-8"))
}

/// Message for the most recent error on this thread. The pointer stays valid
/// until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn ps_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Parses a game spec from JSON into a new handle.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ps_game_from_json(json: *const c_char, out: *mut *mut PsGame) -> i32 {
    if out.is_null() {
        return invalid("null out pointer");
    }
    let text = match read_utf8(json) {
        Ok(t) => t,
        Err(code) => return code,
    };
    match GameSpecFile::parse(text) {
        Ok(spec) => {
            // Surface structural problems (bad p, zero counts, duplicate
            // groups are fine) at construction time with a 1-patroller probe.
            if let Err(e) = spec.to_structure(1) {
                return fail(e);
            }
            *out = Box::into_raw(Box::new(PsGame { spec }));
            PS_OK
        }
        Err(e) => fail(e),
    }
}

/// # Safety
/// `game` must come from `ps_game_from_json` and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn ps_game_free(game: *mut PsGame) {
    if !game.is_null() {
        drop(Box::from_raw(game));
    }
}

/// # Safety
/// `game` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn ps_game_vertex_count(game: *const PsGame, out: *mut u64) -> i32 {
    if game.is_null() || out.is_null() {
        return invalid("null pointer argument");
    }
    *out = (*game).spec.groups.iter().map(|g| g.count).sum();
    PS_OK
}

/// Theoretical protection upper bound for `patrollers` patrollers.
///
/// # Safety
/// `game` and `out_bound` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn ps_protection_upper_bound(
    game: *const PsGame,
    patrollers: u64,
    out_bound: *mut f64,
) -> i32 {
    if game.is_null() || out_bound.is_null() {
        return invalid("null pointer argument");
    }
    let gs = match (*game).spec.to_structure(patrollers) {
        Ok(gs) => gs,
        Err(e) => return fail(e),
    };
    *out_bound = protection_upper_bound(&gs, patrollers).rho;
    PS_OK
}

/// Minimum patroller count whose bound reaches `target`.
///
/// # Safety
/// `game` and `out_patrollers` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn ps_min_patrollers(
    game: *const PsGame,
    target: f64,
    out_patrollers: *mut u64,
) -> i32 {
    if game.is_null() || out_patrollers.is_null() {
        return invalid("null pointer argument");
    }
    let gs = match (*game).spec.to_structure(1) {
        Ok(gs) => gs,
        Err(e) => return fail(e),
    };
    match min_patrollers(&gs, target) {
        Ok(k) => {
            *out_patrollers = k;
            PS_OK
        }
        Err(e) => fail(CliError::from(e)),
    }
}

/// Synthesizes and evaluates a strategy for `patrollers` patrollers.
///
/// # Safety
/// `game` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn ps_synthesize(
    game: *const PsGame,
    patrollers: u64,
    out: *mut *mut PsStrategy,
) -> i32 {
    if game.is_null() || out.is_null() {
        return invalid("null pointer argument");
    }
    let gs = match (*game).spec.to_structure(patrollers) {
        Ok(gs) => gs,
        Err(e) => return fail(e),
    };
    match synthesize_report(&gs, patrollers) {
        Ok((file, _)) => {
            *out = Box::into_raw(Box::new(PsStrategy { file }));
            PS_OK
        }
        Err(e) => fail(e),
    }
}

/// # Safety
/// `strategy` must come from `ps_synthesize` and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn ps_strategy_free(strategy: *mut PsStrategy) {
    if !strategy.is_null() {
        drop(Box::from_raw(strategy));
    }
}

/// Exact worst-case protection level achieved by the strategy.
///
/// # Safety
/// `strategy` and `out_level` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn ps_strategy_level(strategy: *const PsStrategy, out_level: *mut f64) -> i32 {
    if strategy.is_null() || out_level.is_null() {
        return invalid("null pointer argument");
    }
    *out_level = (*strategy).file.level;
    PS_OK
}

/// Theoretical bound recorded alongside the strategy.
///
/// # Safety
/// `strategy` and `out_bound` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn ps_strategy_upper_bound(
    strategy: *const PsStrategy,
    out_bound: *mut f64,
) -> i32 {
    if strategy.is_null() || out_bound.is_null() {
        return invalid("null pointer argument");
    }
    *out_bound = (*strategy).file.upper_bound;
    PS_OK
}

/// Serializes the strategy to JSON. Free the result with `ps_string_free`.
///
/// # Safety
/// `strategy` and `out_json` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn ps_strategy_to_json(
    strategy: *const PsStrategy,
    out_json: *mut *mut c_char,
) -> i32 {
    if strategy.is_null() || out_json.is_null() {
        return invalid("null pointer argument");
    }
    let json = (*strategy).file.to_json();
    match CString::new(json) {
        Ok(c) => {
            *out_json = c.into_raw();
            PS_OK
        }
        Err(_) => {
            set_error("strategy JSON contained an interior NUL");
            PS_ERR_INTERNAL
        }
    }
}

/// Protection level of the naive round-independent baseline.
///
/// # Safety
/// `game` and `out_level` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn ps_naive_level(
    game: *const PsGame,
    patrollers: u64,
    out_level: *mut f64,
) -> i32 {
    if game.is_null() || out_level.is_null() {
        return invalid("null pointer argument");
    }
    let gs = match (*game).spec.to_structure(patrollers) {
        Ok(gs) => gs,
        Err(e) => return fail(e),
    };
    *out_level = naive_strategy(&gs, patrollers).level;
    PS_OK
}

/// Releases a string allocated by this library.
///
/// # Safety
/// `s` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn ps_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
