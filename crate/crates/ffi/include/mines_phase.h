#ifndef MINES_PHASE_H
#define MINES_PHASE_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum MpStatus {
  MP_STATUS_OK = 0,
  MP_STATUS_NULL_POINTER = 1,
  MP_STATUS_INVALID_ARGUMENT = 2,
  MP_STATUS_OUT_OF_BOUNDS = 3,
  MP_STATUS_PARSE = 4,
  MP_STATUS_PANIC = 5,
} MpStatus;

typedef enum MpVerdict {
  MP_VERDICT_SOLVED = 0,
  MP_VERDICT_HIT_MINE = 1,
  MP_VERDICT_GAVE_UP_OVERSIZED = 2,
  MP_VERDICT_GAVE_UP_AMBIGUOUS = 3,
} MpVerdict;

// A mine assignment.
typedef struct MpBoard MpBoard;

// The result of playing a board.
typedef struct MpOutcome MpOutcome;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread; empty if none. Valid
// until the next failing call on the same thread.
const char *mp_last_error(void);

// Library version as a static NUL-terminated string.
const char *mp_version(void);

// Empty `rows x cols` board.
//
// # Safety
// `out` must be valid for writes.
enum MpStatus mp_board_new(size_t rows, size_t cols, struct MpBoard **out);

// Board with independent mines of probability `p`, drawn from trial
// `trial` of master seed `seed`.
//
// # Safety
// `out` must be valid for writes.
enum MpStatus mp_board_sample(size_t rows,
                              size_t cols,
                              double p,
                              uint64_t seed,
                              uint64_t trial,
                              struct MpBoard **out);

// Parses the `rows cols` / `.*` text format.
//
// # Safety
// `text` must be a NUL-terminated string; `out` must be valid for writes.
enum MpStatus mp_board_parse(const char *text, struct MpBoard **out);

// Releases a board; null is ignored.
//
// # Safety
// `board` must come from this library and not be used afterwards.
void mp_board_free(struct MpBoard *board);

// # Safety
// `board` must be a live board; `rows` and `cols` valid for writes.
enum MpStatus mp_board_dims(const struct MpBoard *board, size_t *rows, size_t *cols);

// # Safety
// `board` must be a live board.
enum MpStatus mp_board_add_mine(struct MpBoard *board, size_t row, size_t col);

// # Safety
// `board` must be a live board; `out` valid for writes.
enum MpStatus mp_board_is_mine(const struct MpBoard *board, size_t row, size_t col, bool *out);

// # Safety
// `board` must be a live board; `out` valid for writes.
enum MpStatus mp_board_mine_count(const struct MpBoard *board, size_t *out);

// The board in text form; release with `mp_string_free`.
//
// # Safety
// `board` must be a live board; `out` valid for writes.
enum MpStatus mp_board_to_text(const struct MpBoard *board, char **out);

// # Safety
// `s` must come from this library and not be used afterwards.
void mp_string_free(char *s);

// Occurrences of P1 (`which = 1`) or P2 (`which = 2`).
//
// # Safety
// `board` must be a live board; `out` valid for writes.
enum MpStatus mp_count_occurrences(const struct MpBoard *board, uint32_t which, size_t *out);

// Largest mine count over all `w x w` windows.
//
// # Safety
// `board` must be a live board; `out` valid for writes.
enum MpStatus mp_window_mine_max(const struct MpBoard *board, size_t w, size_t *out);

// Plays the board with inference only.
//
// # Safety
// `board` must be a live board; `out` valid for writes.
enum MpStatus mp_play(const struct MpBoard *board, struct MpOutcome **out);

// Plays the board, guessing uniformly among undetermined cells when stuck.
//
// # Safety
// `board` must be a live board; `out` valid for writes.
enum MpStatus mp_play_guessing(const struct MpBoard *board, uint64_t seed, struct MpOutcome **out);

// # Safety
// `outcome` must come from this library and not be used afterwards.
void mp_outcome_free(struct MpOutcome *outcome);

// Verdict, revealed cell count, guesses and island count of an outcome.
// Any of the output pointers may be null.
//
// # Safety
// `outcome` must be live; non-null outputs must be valid for writes.
enum MpStatus mp_outcome_summary(const struct MpOutcome *outcome,
                                 enum MpVerdict *verdict,
                                 size_t *reveals,
                                 size_t *guesses,
                                 size_t *islands);

// Number of ambiguous patterns with at most `max_mines` mines (1 to 7).
//
// # Safety
// `out` must be valid for writes.
enum MpStatus mp_enumerate_ambiguous_count(size_t max_mines, size_t *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MINES_PHASE_H */
