//! C interface to `mines-phase`.
//!
//! Boards and play outcomes are opaque heap handles released with their
//! `*_free` function. Every fallible call returns an [`MpStatus`]; on failure
//! `mp_last_error` describes the problem for the calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use mines_phase::ambiguity::enumerate_ambiguous;
use mines_phase::patterns::occurrences;
use mines_phase::random_gen::{sample_iid, window_mine_max, Seed};
use mines_phase::solver::{play, play_with_guessing, PlayOutcome, Verdict};
use mines_phase::{canonical_p1_p2, Cell, Error, GridDims, MineAssignment};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MpStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    OutOfBounds = 3,
    Parse = 4,
    Panic = 5,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MpVerdict {
    Solved = 0,
    HitMine = 1,
    GaveUpOversized = 2,
    GaveUpAmbiguous = 3,
}

impl From<Verdict> for MpVerdict {
    fn from(v: Verdict) -> Self {
        match v {
            Verdict::Solved => MpVerdict::Solved,
            Verdict::HitMine => MpVerdict::HitMine,
            Verdict::GaveUpOversized => MpVerdict::GaveUpOversized,
            Verdict::GaveUpAmbiguous => MpVerdict::GaveUpAmbiguous,
        }
    }
}

/// A mine assignment.
pub struct MpBoard {
    inner: MineAssignment,
}

/// The result of playing a board.
pub struct MpOutcome {
    inner: PlayOutcome,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> MpStatus {
    match e {
        Error::OutOfBounds { .. } => MpStatus::OutOfBounds,
        Error::Parse { .. } => MpStatus::Parse,
        _ => MpStatus::InvalidArgument,
    }
}

/// Runs `f`, turning errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), (MpStatus, String)>) -> MpStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => MpStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            MpStatus::Panic
        }
    }
}

fn lib_err(e: Error) -> (MpStatus, String) {
    (status_of(&e), e.to_string())
}

fn null() -> (MpStatus, String) {
    (MpStatus::NullPointer, "null pointer argument".into())
}

unsafe fn board_ref<'a>(b: *const MpBoard) -> Result<&'a MineAssignment, (MpStatus, String)> {
    b.as_ref().map(|b| &b.inner).ok_or_else(null)
}

unsafe fn write_out<T>(out: *mut T, value: T) -> Result<(), (MpStatus, String)> {
    if out.is_null() {
        return Err(null());
    }
    out.write(value);
    Ok(())
}

fn boxed_board(m: MineAssignment) -> *mut MpBoard {
    Box::into_raw(Box::new(MpBoard { inner: m }))
}

/// Message of the last failed call on this thread; empty if none. Valid
/// until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn mp_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn mp_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Empty `rows x cols` board.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn mp_board_new(rows: usize, cols: usize, out: *mut *mut MpBoard) -> MpStatus {
    guard(|| {
        let dims = GridDims::new(rows, cols).map_err(lib_err)?;
        write_out(out, boxed_board(MineAssignment::empty(dims)))
    })
}

/// Board with independent mines of probability `p`, drawn from trial
/// `trial` of master seed `seed`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn mp_board_sample(
    rows: usize,
    cols: usize,
    p: f64,
    seed: u64,
    trial: u64,
    out: *mut *mut MpBoard,
) -> MpStatus {
    guard(|| {
        let dims = GridDims::new(rows, cols).map_err(lib_err)?;
        let m = sample_iid(dims, p, &mut Seed(seed).stream(trial)).map_err(lib_err)?;
        write_out(out, boxed_board(m))
    })
}

/// Parses the `rows cols` / `.*` text format.
///
/// # Safety
/// `text` must be a NUL-terminated string; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn mp_board_parse(text: *const c_char, out: *mut *mut MpBoard) -> MpStatus {
    guard(|| {
        if text.is_null() {
            return Err(null());
        }
        let s = CStr::from_ptr(text)
            .to_str()
            .map_err(|_| (MpStatus::Parse, "text is not UTF-8".to_string()))?;
        let m: MineAssignment = s.parse().map_err(lib_err)?;
        write_out(out, boxed_board(m))
    })
}

/// Releases a board; null is ignored.
///
/// # Safety
/// `board` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn mp_board_free(board: *mut MpBoard) {
    if !board.is_null() {
        drop(Box::from_raw(board));
    }
}

/// # Safety
/// `board` must be a live board; `rows` and `cols` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn mp_board_dims(board: *const MpBoard, rows: *mut usize, cols: *mut usize) -> MpStatus {
    guard(|| {
        let d = board_ref(board)?.dims();
        write_out(rows, d.rows)?;
        write_out(cols, d.cols)
    })
}

/// # Safety
/// `board` must be a live board.
#[no_mangle]
pub unsafe extern "C" fn mp_board_add_mine(board: *mut MpBoard, row: usize, col: usize) -> MpStatus {
    guard(|| {
        let b = board.as_mut().ok_or_else(null)?;
        b.inner.add_mine(Cell::new(row, col)).map_err(lib_err)?;
        Ok(())
    })
}

/// # Safety
/// `board` must be a live board; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn mp_board_is_mine(board: *const MpBoard, row: usize, col: usize, out: *mut bool) -> MpStatus {
    guard(|| {
        let m = board_ref(board)?;
        m.dims().check(Cell::new(row, col)).map_err(lib_err)?;
        write_out(out, m.is_mine(Cell::new(row, col)))
    })
}

/// # Safety
/// `board` must be a live board; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn mp_board_mine_count(board: *const MpBoard, out: *mut usize) -> MpStatus {
    guard(|| write_out(out, board_ref(board)?.count()))
}

/// The board in text form; release with `mp_string_free`.
///
/// # Safety
/// `board` must be a live board; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn mp_board_to_text(board: *const MpBoard, out: *mut *mut c_char) -> MpStatus {
    guard(|| {
        let text = board_ref(board)?.to_string();
        let c = CString::new(text).expect("board text has no NUL");
        write_out(out, c.into_raw())
    })
}

/// # Safety
/// `s` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn mp_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Occurrences of P1 (`which = 1`) or P2 (`which = 2`).
///
/// # Safety
/// `board` must be a live board; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn mp_count_occurrences(board: *const MpBoard, which: u32, out: *mut usize) -> MpStatus {
    guard(|| {
        let m = board_ref(board)?;
        let canon = canonical_p1_p2();
        let p = match which {
            1 => canon.p1,
            2 => canon.p2,
            _ => return Err((MpStatus::InvalidArgument, format!("pattern {which} is not 1 or 2"))),
        };
        write_out(out, occurrences(m, &p).len())
    })
}

/// Largest mine count over all `w x w` windows.
///
/// # Safety
/// `board` must be a live board; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn mp_window_mine_max(board: *const MpBoard, w: usize, out: *mut usize) -> MpStatus {
    guard(|| {
        let k = window_mine_max(board_ref(board)?, w).map_err(lib_err)?;
        write_out(out, k)
    })
}

/// Plays the board with inference only.
///
/// # Safety
/// `board` must be a live board; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn mp_play(board: *const MpBoard, out: *mut *mut MpOutcome) -> MpStatus {
    guard(|| {
        let o = play(board_ref(board)?);
        write_out(out, Box::into_raw(Box::new(MpOutcome { inner: o })))
    })
}

/// Plays the board, guessing uniformly among undetermined cells when stuck.
///
/// # Safety
/// `board` must be a live board; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn mp_play_guessing(board: *const MpBoard, seed: u64, out: *mut *mut MpOutcome) -> MpStatus {
    guard(|| {
        let o = play_with_guessing(board_ref(board)?, &mut Seed(seed).stream(0));
        write_out(out, Box::into_raw(Box::new(MpOutcome { inner: o })))
    })
}

/// # Safety
/// `outcome` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn mp_outcome_free(outcome: *mut MpOutcome) {
    if !outcome.is_null() {
        drop(Box::from_raw(outcome));
    }
}

/// Verdict, revealed cell count, guesses and island count of an outcome.
/// Any of the output pointers may be null.
///
/// # Safety
/// `outcome` must be live; non-null outputs must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn mp_outcome_summary(
    outcome: *const MpOutcome,
    verdict: *mut MpVerdict,
    reveals: *mut usize,
    guesses: *mut usize,
    islands: *mut usize,
) -> MpStatus {
    guard(|| {
        let o = &outcome.as_ref().ok_or_else(null)?.inner;
        if !verdict.is_null() {
            verdict.write(o.verdict.into());
        }
        if !reveals.is_null() {
            reveals.write(o.reveals);
        }
        if !guesses.is_null() {
            guesses.write(o.guess_count);
        }
        if !islands.is_null() {
            islands.write(o.islands.len());
        }
        Ok(())
    })
}

/// Number of ambiguous patterns with at most `max_mines` mines (1 to 7).
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn mp_enumerate_ambiguous_count(max_mines: usize, out: *mut usize) -> MpStatus {
    guard(|| {
        let found = enumerate_ambiguous(max_mines).map_err(lib_err)?;
        write_out(out, found.len())
    })
}
