//! Random Minesweeper and its solvability phase transition.
//!
//! * [`grid`]: the game model (assignments, states, reveals, the zero flood).
//! * [`patterns`]: framed mine patterns, occurrence scanning, envelopes.
//! * [`ambiguity`]: exact inference and the search for ambiguous patterns.
//! * [`solver`]: the linear-time corner/flood/island/inference player.
//! * [`random_gen`]: seeded i.i.d. boards, the mine-addition process and
//!   window statistics.
//! * [`experiments`]: Monte Carlo drivers behind the `mines-phase` CLI.
//! * [`acceptance`]: the end-to-end checks run by `mines-phase verify`.

pub mod acceptance;
pub mod ambiguity;
pub mod error;
pub mod experiments;
pub mod grid;
pub mod patterns;
pub mod random_gen;
pub mod solver;
pub mod text;

pub use error::{Error, Result};
pub use grid::{Cell, CellValue, GridDims, GridState, MineAssignment};
pub use patterns::{canonical_p1_p2, CanonicalPatterns, Pattern};
