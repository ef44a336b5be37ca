use std::ffi::{CStr, CString};
use std::ptr;

use mines_phase_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(mp_last_error()) }.to_string_lossy().into_owned()
}

#[test]
fn board_lifecycle_and_play() {
    unsafe {
        let mut b = ptr::null_mut();
        assert_eq!(mp_board_new(12, 12, &mut b), MpStatus::Ok);
        for (r, c) in [(5, 5), (5, 7), (7, 5), (7, 7)] {
            assert_eq!(mp_board_add_mine(b, r, c), MpStatus::Ok);
        }
        let mut k = 0;
        assert_eq!(mp_board_mine_count(b, &mut k), MpStatus::Ok);
        assert_eq!(k, 4);
        let mut mine = false;
        assert_eq!(mp_board_is_mine(b, 5, 7, &mut mine), MpStatus::Ok);
        assert!(mine);

        let mut o = ptr::null_mut();
        assert_eq!(mp_play(b, &mut o), MpStatus::Ok);
        let (mut v, mut reveals, mut islands) = (MpVerdict::HitMine, 0, 0);
        assert_eq!(mp_outcome_summary(o, &mut v, &mut reveals, ptr::null_mut(), &mut islands), MpStatus::Ok);
        assert_eq!(v, MpVerdict::Solved);
        assert_eq!(reveals, 140);
        assert_eq!(islands, 1);
        mp_outcome_free(o);

        let mut text = ptr::null_mut();
        assert_eq!(mp_board_to_text(b, &mut text), MpStatus::Ok);
        let s = CStr::from_ptr(text).to_str().unwrap().to_owned();
        mp_string_free(text);
        let c = CString::new(s).unwrap();
        let mut again = ptr::null_mut();
        assert_eq!(mp_board_parse(c.as_ptr(), &mut again), MpStatus::Ok);
        let (mut rows, mut cols) = (0, 0);
        assert_eq!(mp_board_dims(again, &mut rows, &mut cols), MpStatus::Ok);
        assert_eq!((rows, cols), (12, 12));
        mp_board_free(again);
        mp_board_free(b);
    }
}

#[test]
fn errors_are_reported() {
    unsafe {
        let mut b = ptr::null_mut();
        assert_eq!(mp_board_new(0, 5, &mut b), MpStatus::InvalidArgument);
        assert!(b.is_null());
        assert!(!last_error().is_empty());
        assert_eq!(mp_board_new(4, 4, ptr::null_mut()), MpStatus::NullPointer);
        assert_eq!(mp_board_new(4, 4, &mut b), MpStatus::Ok);
        assert_eq!(mp_board_add_mine(b, 4, 0), MpStatus::OutOfBounds);
        assert!(last_error().contains("outside"));
        let mut w = 0;
        assert_eq!(mp_window_mine_max(b, 9, &mut w), MpStatus::InvalidArgument);
        let mut n = 0;
        assert_eq!(mp_count_occurrences(b, 3, &mut n), MpStatus::InvalidArgument);
        mp_board_free(b);
        let bad = CString::new("2 2\n..\n").unwrap();
        assert_eq!(mp_board_parse(bad.as_ptr(), &mut b), MpStatus::Parse);
        assert_eq!(mp_board_parse(ptr::null(), &mut b), MpStatus::NullPointer);
        assert_eq!(mp_board_mine_count(ptr::null(), &mut n), MpStatus::NullPointer);
        mp_board_free(ptr::null_mut());
        mp_outcome_free(ptr::null_mut());
    }
}

#[test]
fn sampling_matches_the_library() {
    use mines_phase::random_gen::{sample_iid, Seed};
    use mines_phase::GridDims;
    unsafe {
        let mut b = ptr::null_mut();
        assert_eq!(mp_board_sample(40, 50, 0.1, 9, 3, &mut b), MpStatus::Ok);
        let mut k = 0;
        mp_board_mine_count(b, &mut k);
        let want = sample_iid(GridDims::new(40, 50).unwrap(), 0.1, &mut Seed(9).stream(3)).unwrap();
        assert_eq!(k, want.count());
        let mut w = 0;
        assert_eq!(mp_window_mine_max(b, 10, &mut w), MpStatus::Ok);
        assert!(w > 0);
        let mut o = ptr::null_mut();
        assert_eq!(mp_play_guessing(b, 1, &mut o), MpStatus::Ok);
        mp_outcome_free(o);
        mp_board_free(b);
        assert_eq!(mp_board_sample(4, 4, 2.0, 0, 0, &mut b), MpStatus::InvalidArgument);
    }
}

#[test]
fn enumeration_count_and_version() {
    unsafe {
        let mut n = 99;
        assert_eq!(mp_enumerate_ambiguous_count(4, &mut n), MpStatus::Ok);
        assert_eq!(n, 0);
        assert_eq!(mp_enumerate_ambiguous_count(0, &mut n), MpStatus::InvalidArgument);
        let v = CStr::from_ptr(mp_version()).to_str().unwrap();
        assert_eq!(v, env!("CARGO_PKG_VERSION"));
    }
}

#[test]
fn header_declares_the_api() {
    let h = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/mines_phase.h")).unwrap();
    for name in [
        "typedef struct MpBoard MpBoard;",
        "typedef struct MpOutcome MpOutcome;",
        "MP_STATUS_NULL_POINTER",
        "MP_VERDICT_GAVE_UP_AMBIGUOUS",
        "mp_board_sample(",
        "mp_play(",
        "mp_outcome_summary(",
        "mp_last_error(void)",
    ] {
        assert!(h.contains(name), "header lacks {name}");
    }
}
