use crate::grid::Cell;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("grid dimensions must be positive, got {rows}x{cols}")]
    EmptyDims { rows: usize, cols: usize },
    #[error("cell ({}, {}) is outside the {rows}x{cols} grid", .cell.row, .cell.col)]
    OutOfBounds { cell: Cell, rows: usize, cols: usize },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("cell ({}, {}) is not hidden", .0.row, .0.col)]
    NotHidden(Cell),
    #[error("cell ({}, {}) is not a clue", .0.row, .0.col)]
    NotClue(Cell),
    #[error("grid state is not consistent with the mine assignment")]
    Inconsistent,
    #[error("inconsistent state: no mine completion satisfies the clues")]
    NoCompletion,
    #[error("state shows a mine")]
    ShownMine,
    #[error("state has no hidden cell, envelope is vacuous")]
    VacuousEnvelope,
    #[error("invalid pattern: {0}")]
    InvalidPattern(String),
    #[error("constraint search exceeded the budget of {0} nodes")]
    SearchBudget(u64),
    #[error("enumeration refused for max_mines = {0} (supported range 1..=7)")]
    EnumerationTooLarge(usize),
    #[error("window {w} does not fit in a {rows}x{cols} board")]
    WindowTooLarge { w: usize, rows: usize, cols: usize },
    #[error("board is full")]
    BoardFull,
    #[error("board too small: {0}")]
    BoardTooSmall(String),
    #[error("no single-mine addition makes the pattern non-ambiguous")]
    NoWitness,
    #[error("probability {0} is outside [0, 1]")]
    Probability(f64),
    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse { line, msg: msg.into() }
    }

    pub(crate) fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io { context: context.into(), source }
    }
}
