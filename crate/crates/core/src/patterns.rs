//! Patterns: translation-normalized mine layouts framed by two empty rings,
//! the two smallest ambiguous patterns, occurrence scanning and the envelope
//! of a grid state.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Cell, CellValue, GridDims, GridState, MineAssignment};

/// A mine layout on a frame whose two outer rings are empty and whose third
/// ring (row 2, last-but-two row, column 2, last-but-two column) is touched
/// by at least one mine.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Pattern {
    frame: GridDims,
    mines: Vec<Cell>,
}

impl Pattern {
    pub fn new(frame: GridDims, mines: impl IntoIterator<Item = Cell>) -> Result<Self> {
        let mut mines: Vec<Cell> = mines.into_iter().collect();
        mines.sort_unstable();
        mines.dedup();
        let (h, w) = (frame.rows, frame.cols);
        if h < 5 || w < 5 {
            return Err(Error::InvalidPattern(format!("frame {h}x{w} is smaller than 5x5")));
        }
        for &c in &mines {
            if !frame.contains(c) {
                return Err(Error::InvalidPattern(format!("mine ({}, {}) outside frame", c.row, c.col)));
            }
            if c.row < 2 || c.row > h - 3 || c.col < 2 || c.col > w - 3 {
                return Err(Error::InvalidPattern(format!(
                    "mine ({}, {}) lies in the two empty outer rings",
                    c.row, c.col
                )));
            }
        }
        let touches = |pred: &dyn Fn(&Cell) -> bool| mines.iter().any(pred);
        if !touches(&|c| c.row == 2)
            || !touches(&|c| c.row == h - 3)
            || !touches(&|c| c.col == 2)
            || !touches(&|c| c.col == w - 3)
        {
            return Err(Error::InvalidPattern("third ring rows/columns must each hold a mine".into()));
        }
        Ok(Pattern { frame, mines })
    }

    /// Normalizes an arbitrary non-empty set of mine offsets: translates the
    /// bounding box to (2, 2) and adds the two empty rings.
    pub fn from_offsets(offsets: &[(i64, i64)]) -> Result<Self> {
        let min_r = offsets.iter().map(|o| o.0).min().ok_or_else(|| {
            Error::InvalidPattern("a pattern needs at least one mine".into())
        })?;
        let max_r = offsets.iter().map(|o| o.0).max().unwrap();
        let min_c = offsets.iter().map(|o| o.1).min().unwrap();
        let max_c = offsets.iter().map(|o| o.1).max().unwrap();
        let frame = GridDims::new((max_r - min_r) as usize + 5, (max_c - min_c) as usize + 5)?;
        Self::new(
            frame,
            offsets
                .iter()
                .map(|&(r, c)| Cell::new((r - min_r) as usize + 2, (c - min_c) as usize + 2)),
        )
    }

    pub fn from_assignment(m: &MineAssignment) -> Result<Self> {
        Self::new(m.dims(), m.mines())
    }

    pub fn frame(&self) -> GridDims {
        self.frame
    }

    /// Mines in row-major order, relative to the frame.
    pub fn mines(&self) -> &[Cell] {
        &self.mines
    }

    pub fn mine_count(&self) -> usize {
        self.mines.len()
    }

    pub fn is_mine(&self, c: Cell) -> bool {
        self.mines.binary_search(&c).is_ok()
    }

    pub fn to_assignment(&self) -> MineAssignment {
        MineAssignment::from_cells(self.frame, self.mines.iter().copied())
            .expect("pattern mines lie inside the frame")
    }

    fn offsets(&self) -> Vec<(i64, i64)> {
        self.mines.iter().map(|c| (c.row as i64, c.col as i64)).collect()
    }

    /// The image under one of the eight symmetries of the square
    /// (`index` in `0..8`: bit 0 flips columns, bit 1 flips rows, bit 2 transposes).
    pub fn dihedral(&self, index: u8) -> Pattern {
        let offs: Vec<(i64, i64)> = self
            .offsets()
            .into_iter()
            .map(|(mut r, mut c)| {
                if index & 4 != 0 {
                    std::mem::swap(&mut r, &mut c);
                }
                if index & 1 != 0 {
                    c = -c;
                }
                if index & 2 != 0 {
                    r = -r;
                }
                (r, c)
            })
            .collect();
        Pattern::from_offsets(&offs).expect("images of a pattern are patterns")
    }

    /// Left-right mirror image.
    pub fn mirror(&self) -> Pattern {
        self.dihedral(1)
    }

    /// Adds a mine at a position relative to this frame (may be negative or
    /// beyond the frame) and renormalizes.
    pub fn with_extra_mine(&self, row: i64, col: i64) -> Pattern {
        let mut offs = self.offsets();
        if !offs.contains(&(row, col)) {
            offs.push((row, col));
        }
        Pattern::from_offsets(&offs).expect("non-empty")
    }

    /// Whether the frame placed at `anchor` matches `m` exactly, mines and
    /// empties alike. False when the frame does not fit.
    pub fn matches_at(&self, m: &MineAssignment, anchor: Cell) -> bool {
        let dims = m.dims();
        if anchor.row + self.frame.rows > dims.rows || anchor.col + self.frame.cols > dims.cols {
            return false;
        }
        for c in &self.mines {
            if !m.is_mine(Cell::new(anchor.row + c.row, anchor.col + c.col)) {
                return false;
            }
        }
        let mut pattern_mines = self.mines.iter().peekable();
        for r in 0..self.frame.rows {
            let base = (anchor.row + r) * dims.cols + anchor.col;
            for c in 0..self.frame.cols {
                if pattern_mines.peek().is_some_and(|p| p.row == r && p.col == c) {
                    pattern_mines.next();
                    continue;
                }
                if m.is_mine_idx(base + c) {
                    return false;
                }
            }
        }
        true
    }
}

/// The two smallest ambiguous patterns and the grid state they share.
#[derive(Clone, Debug)]
pub struct CanonicalPatterns {
    pub p1: Pattern,
    pub p2: Pattern,
    /// The shared ambiguous state, on a board padded by three rings around
    /// the 8x8 frame.
    pub s_min: GridState,
    /// `p1` embedded in the same padded board.
    pub s_min_board: MineAssignment,
    /// Top-left corner of the frame inside the padded board.
    pub anchor: Cell,
}

/// The four frame-relative mines shared by both patterns.
const CORNER_MINES: [(usize, usize); 4] = [(2, 2), (2, 5), (5, 2), (5, 5)];

pub fn canonical_p1_p2() -> CanonicalPatterns {
    let frame = GridDims::new(8, 8).unwrap();
    let corners = CORNER_MINES.iter().map(|&c| Cell::from(c));
    let p1 = Pattern::new(frame, corners.clone().chain([Cell::new(3, 3), Cell::new(4, 4)]))
        .expect("P1 is a valid pattern");
    let p2 = Pattern::new(frame, corners.chain([Cell::new(3, 4), Cell::new(4, 3)]))
        .expect("P2 is a valid pattern");

    let pad = 3;
    let dims = GridDims::new(8 + 2 * pad, 8 + 2 * pad).unwrap();
    let anchor = Cell::new(pad, pad);
    let board = embed(&p1, dims, anchor).expect("frame fits");
    let mut s = GridState::all_hidden(dims);
    let in_block = |c: Cell| (pad + 3..=pad + 4).contains(&c.row) && (pad + 3..=pad + 4).contains(&c.col);
    for c in dims.cells() {
        if !board.is_mine(c) && !in_block(c) {
            s.reveal_cell(&board, c).unwrap();
        }
    }
    for &(r, c) in &CORNER_MINES {
        s.flag(Cell::new(anchor.row + r, anchor.col + c)).unwrap();
    }
    CanonicalPatterns { p1, p2, s_min: s, s_min_board: board, anchor }
}

/// A board of the given size holding exactly `p` at `anchor`.
pub fn embed(p: &Pattern, dims: GridDims, anchor: Cell) -> Result<MineAssignment> {
    let mut m = MineAssignment::empty(dims);
    plant(&mut m, p, anchor)?;
    Ok(m)
}

/// Overwrites the frame area at `anchor` with `p` (clearing other mines there).
pub fn plant(m: &mut MineAssignment, p: &Pattern, anchor: Cell) -> Result<()> {
    let dims = m.dims();
    let f = p.frame();
    if anchor.row + f.rows > dims.rows || anchor.col + f.cols > dims.cols {
        return Err(Error::BoardTooSmall(format!(
            "{}x{} frame at ({}, {}) exceeds {}x{}",
            f.rows, f.cols, anchor.row, anchor.col, dims.rows, dims.cols
        )));
    }
    for r in 0..f.rows {
        for c in 0..f.cols {
            let cell = Cell::new(anchor.row + r, anchor.col + c);
            if p.is_mine(Cell::new(r, c)) {
                m.add_mine(cell)?;
            } else {
                m.remove_mine(cell)?;
            }
        }
    }
    Ok(())
}

/// Top-left anchors of every exact occurrence of `p` in `m`, row-major.
///
/// Every occurrence contains the pattern's first mine at a fixed offset, so
/// the scan visits one candidate anchor per mine of `m`.
pub fn occurrences(m: &MineAssignment, p: &Pattern) -> Vec<Cell> {
    let dims = m.dims();
    let f = p.frame();
    let Some(&first) = p.mines().first() else {
        return Vec::new();
    };
    if f.rows > dims.rows || f.cols > dims.cols {
        return Vec::new();
    }
    let mut out = Vec::new();
    for x in m.mines() {
        if x.row < first.row || x.col < first.col {
            continue;
        }
        let anchor = Cell::new(x.row - first.row, x.col - first.col);
        if p.matches_at(m, anchor) {
            out.push(anchor);
        }
    }
    // mine order is row-major and the offset is constant, so `out` is sorted
    out
}

/// Number of anchor positions for the frame of `p` in `dims`.
pub fn anchor_count(dims: GridDims, p: &Pattern) -> usize {
    let f = p.frame();
    if f.rows > dims.rows || f.cols > dims.cols {
        0
    } else {
        (dims.rows - f.rows + 1) * (dims.cols - f.cols + 1)
    }
}

/// Exact expected occurrence count of `p` under i.i.d. Bernoulli(`p_mine`) mines.
pub fn expected_occurrences(dims: GridDims, p_mine: f64, p: &Pattern) -> f64 {
    let k = p.mine_count() as i32;
    let empties = (p.frame().n() - p.mine_count()) as i32;
    anchor_count(dims, p) as f64 * p_mine.powi(k) * (1.0 - p_mine).powi(empties)
}

/// Union of the neighborhoods of the hidden cells, with its border and corners.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Envelope {
    pub cells: BTreeSet<Cell>,
    pub border: BTreeSet<Cell>,
    pub corners: BTreeSet<Cell>,
}

impl Envelope {
    /// `(height, width)` when the envelope is a full rectangle.
    pub fn rectangle(&self) -> Option<(usize, usize)> {
        let first = self.cells.first()?;
        let last = self.cells.last()?;
        let min_c = self.cells.iter().map(|c| c.col).min()?;
        let max_c = self.cells.iter().map(|c| c.col).max()?;
        let h = last.row - first.row + 1;
        let w = max_c - min_c + 1;
        (h * w == self.cells.len()).then_some((h, w))
    }
}

pub fn envelope(s: &GridState) -> Result<Envelope> {
    let dims = s.dims();
    let mut cells = BTreeSet::new();
    for h in s.hidden_cells() {
        cells.extend(dims.neighborhood(h));
    }
    if cells.is_empty() {
        return Err(Error::VacuousEnvelope);
    }
    let border: BTreeSet<Cell> = cells
        .iter()
        .copied()
        .filter(|&c| dims.neighborhood(c).filter(|x| cells.contains(x)).count() < 9)
        .collect();
    let outside = |r: i64, c: i64| {
        r < 0
            || c < 0
            || r >= dims.rows as i64
            || c >= dims.cols as i64
            || !cells.contains(&Cell::new(r as usize, c as usize))
    };
    let corners = border
        .iter()
        .copied()
        .filter(|c| {
            let (r, k) = (c.row as i64, c.col as i64);
            [(r - 1, k), (r + 1, k), (r, k - 1), (r, k + 1)]
                .iter()
                .filter(|&&(a, b)| outside(a, b))
                .count()
                >= 2
        })
        .collect();
    Ok(Envelope { cells, border, corners })
}

/// Clue value minus the flags around it.
pub fn s_clue(s: &GridState, c: Cell) -> Result<i32> {
    s.dims().check(c)?;
    let CellValue::Clue(k) = s.get(c) else {
        return Err(Error::NotClue(c));
    };
    let flags = s.dims().neighborhood(c).filter(|&x| s.get(x) == CellValue::Flag).count();
    Ok(k as i32 - flags as i32)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PruneReason {
    /// No hidden cell at all.
    NoHidden,
    /// A clue in the envelope sees fewer than two hidden cells or needs no
    /// further mine.
    DeterminedClue(Cell),
    /// A hidden cell on the envelope border.
    HiddenBorder(Cell),
    /// An envelope corner that is not a flag.
    CornerNotFlag(Cell),
    /// More flags than the regime allows.
    TooManyFlags(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PruneVerdict {
    Pass,
    Fail(PruneReason),
}

/// Necessary conditions satisfied by every ambiguous state. `max_flags` is
/// `Some(5)` when hunting patterns with at most six mines and `None`
/// otherwise; states with more mines can be ambiguous with many flags.
/// A pass says nothing about ambiguity.
pub fn envelope_pruning_checks(s: &GridState, max_flags: Option<usize>) -> PruneVerdict {
    let env = match envelope(s) {
        Ok(e) => e,
        Err(_) => return PruneVerdict::Fail(PruneReason::NoHidden),
    };
    let dims = s.dims();
    for &c in &env.cells {
        if s.get(c).clue().is_some() {
            let hidden = dims.neighborhood(c).filter(|&x| s.get(x).is_hidden()).count();
            if hidden < 2 || s_clue(s, c).unwrap() <= 0 {
                return PruneVerdict::Fail(PruneReason::DeterminedClue(c));
            }
        }
    }
    for &c in &env.border {
        if s.get(c).is_hidden() {
            return PruneVerdict::Fail(PruneReason::HiddenBorder(c));
        }
    }
    for &c in &env.corners {
        if s.get(c) != CellValue::Flag {
            return PruneVerdict::Fail(PruneReason::CornerNotFlag(c));
        }
    }
    if let Some(limit) = max_flags {
        let flags = s.count_flags();
        if flags > limit {
            return PruneVerdict::Fail(PruneReason::TooManyFlags(flags));
        }
    }
    PruneVerdict::Pass
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{is_consistent, is_solved};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn canonical_shapes() {
        let c = canonical_p1_p2();
        assert_eq!(c.p1.mine_count(), 6);
        assert_eq!(c.p2.mine_count(), 6);
        assert_eq!(c.p1.frame(), GridDims::new(8, 8).unwrap());
        assert_eq!(c.p1.mirror(), c.p2);
        assert_eq!(c.p2.mirror(), c.p1);
        assert_ne!(c.p1, c.p2);
    }

    #[test]
    fn frame_rules() {
        let f = GridDims::new(5, 5).unwrap();
        assert!(Pattern::new(f, [Cell::new(2, 2)]).is_ok());
        assert!(Pattern::new(f, [Cell::new(1, 2)]).is_err());
        assert!(Pattern::new(f, []).is_err());
        let f = GridDims::new(6, 5).unwrap();
        assert!(Pattern::new(f, [Cell::new(2, 2)]).is_err());
        assert!(Pattern::new(f, [Cell::new(2, 2), Cell::new(3, 2)]).is_ok());
        assert!(Pattern::new(GridDims::new(4, 5).unwrap(), [Cell::new(2, 2)]).is_err());
    }

    #[test]
    fn s_min_matches_both_patterns() {
        let c = canonical_p1_p2();
        assert!(is_consistent(&c.s_min_board, &c.s_min).unwrap());
        let p2_board = embed(&c.p2, c.s_min.dims(), c.anchor).unwrap();
        assert!(is_consistent(&p2_board, &c.s_min).unwrap());
        assert_eq!(c.s_min.count_hidden(), 4);
        assert_eq!(c.s_min.count_flags(), 4);
    }

    #[test]
    fn s_min_envelope_is_four_by_four() {
        let c = canonical_p1_p2();
        let env = envelope(&c.s_min).unwrap();
        assert_eq!(env.cells.len(), 16);
        assert_eq!(env.rectangle(), Some((4, 4)));
        assert_eq!(env.border.len(), 12);
        assert_eq!(env.corners.len(), 4);
        for &k in &env.corners {
            assert_eq!(c.s_min.get(k), CellValue::Flag);
        }
        for &b in env.border.difference(&env.corners) {
            assert_eq!(c.s_min.get(b), CellValue::Clue(2));
            assert_eq!(s_clue(&c.s_min, b).unwrap(), 1);
        }
    }

    #[test]
    fn s_min_completion_solves() {
        let c = canonical_p1_p2();
        let mut s = c.s_min.clone();
        let a = c.anchor;
        s.reveal_cell(&c.s_min_board, Cell::new(a.row + 3, a.col + 4)).unwrap();
        s.reveal_cell(&c.s_min_board, Cell::new(a.row + 4, a.col + 3)).unwrap();
        assert!(is_solved(&c.s_min_board, &s).unwrap());
        assert!(!is_solved(&c.s_min_board, &c.s_min).unwrap());
    }

    #[test]
    fn p1_clue_at_2_3() {
        let c = canonical_p1_p2();
        assert_eq!(c.p1.to_assignment().clue_value(Cell::new(2, 3)), 2);
    }

    #[test]
    fn envelope_small_cases() {
        let d = GridDims::new(12, 12).unwrap();
        let mut s = GridState::from_values(d, vec![CellValue::Clue(0); d.n()]).unwrap();
        assert!(matches!(envelope(&s), Err(Error::VacuousEnvelope)));
        s.set(Cell::new(5, 5), CellValue::Hidden).unwrap();
        let e = envelope(&s).unwrap();
        assert_eq!(e.cells.len(), 9);
        assert_eq!(e.border.len(), 8);
        assert_eq!(e.corners.len(), 4);
        s.set(Cell::new(5, 10), CellValue::Hidden).unwrap();
        let e = envelope(&s).unwrap();
        assert_eq!(e.cells.len(), 18);
        assert!(e.rectangle().is_none());
    }

    #[test]
    fn s_clue_values() {
        let s: GridState = "3 3\nF3F\n###\n000\n".parse().unwrap();
        assert_eq!(s_clue(&s, Cell::new(0, 1)).unwrap(), 1);
        assert_eq!(s_clue(&s, Cell::new(2, 0)).unwrap(), 0);
        assert!(matches!(s_clue(&s, Cell::new(0, 0)), Err(Error::NotClue(_))));
    }

    #[test]
    fn pruning_on_known_states() {
        let c = canonical_p1_p2();
        assert_eq!(envelope_pruning_checks(&c.s_min, Some(5)), PruneVerdict::Pass);

        let mut hidden_border = c.s_min.clone();
        let a = c.anchor;
        hidden_border.set(Cell::new(a.row + 2, a.col + 3), CellValue::Hidden).unwrap();
        assert!(matches!(
            envelope_pruning_checks(&hidden_border, Some(5)),
            PruneVerdict::Fail(PruneReason::HiddenBorder(_))
                | PruneVerdict::Fail(PruneReason::DeterminedClue(_))
        ));

        // Two unconstrained hidden cells inside a ring of ten flags: ambiguous
        // but far above the five-flag regime.
        let ring: GridState = "5 6\n000000\n0FFFF0\n0F##F0\n0FFFF0\n000000\n".parse().unwrap();
        assert_eq!(
            envelope_pruning_checks(&ring, Some(5)),
            PruneVerdict::Fail(PruneReason::TooManyFlags(10))
        );
        assert_eq!(envelope_pruning_checks(&ring, None), PruneVerdict::Pass);
    }

    #[test]
    fn pruning_rejects_hidden_border_directly() {
        // hidden cell on the grid edge is a border cell of the envelope
        let s: GridState = "3 3\n#F0\nFF0\n000\n".parse().unwrap();
        assert_eq!(
            envelope_pruning_checks(&s, None),
            PruneVerdict::Fail(PruneReason::HiddenBorder(Cell::new(0, 0)))
        );
    }

    #[test]
    fn occurrence_examples() {
        let c = canonical_p1_p2();
        let d = GridDims::new(64, 64).unwrap();
        let mut m = embed(&c.p1, d, Cell::new(10, 10)).unwrap();
        assert_eq!(occurrences(&m, &c.p1), vec![Cell::new(10, 10)]);
        assert!(occurrences(&m, &c.p2).is_empty());
        plant(&mut m, &c.p1, Cell::new(40, 3)).unwrap();
        assert_eq!(occurrences(&m, &c.p1), vec![Cell::new(10, 10), Cell::new(40, 3)]);
        m.add_mine(Cell::new(13, 14)).unwrap();
        assert_eq!(occurrences(&m, &c.p1), vec![Cell::new(40, 3)]);
        // an extra mine in the outer empty ring also breaks the match
        m.add_mine(Cell::new(40, 3)).unwrap();
        assert!(occurrences(&m, &c.p1).is_empty());
        let tiny = MineAssignment::full(GridDims::new(4, 4).unwrap());
        assert!(occurrences(&tiny, &c.p1).is_empty());
    }

    #[test]
    fn expectation_closed_form() {
        let c = canonical_p1_p2();
        let d8 = GridDims::new(8, 8).unwrap();
        assert_eq!(expected_occurrences(d8, 0.0, &c.p1), 0.0);
        let p: f64 = 0.3;
        let want = p.powi(6) * (1.0 - p).powi(58);
        assert!((expected_occurrences(d8, p, &c.p1) - want).abs() < 1e-18);
        let d = GridDims::new(1024, 1024).unwrap();
        let p: f64 = 1.0 / 16.0;
        let want = 1017.0 * 1017.0 * p.powi(6) * (15.0f64 / 16.0).powi(58);
        assert!((expected_occurrences(d, p, &c.p1) / want - 1.0).abs() < 1e-12);
        assert_eq!(expected_occurrences(GridDims::new(7, 100).unwrap(), 0.5, &c.p1), 0.0);
    }

    /// Exact-match scan over every anchor.
    fn naive_occurrences(m: &MineAssignment, p: &Pattern) -> Vec<Cell> {
        let d = m.dims();
        let f = p.frame();
        let mut out = Vec::new();
        if f.rows > d.rows || f.cols > d.cols {
            return out;
        }
        for r in 0..=d.rows - f.rows {
            for c in 0..=d.cols - f.cols {
                let ok = f.cells().all(|x| {
                    m.is_mine(Cell::new(r + x.row, c + x.col)) == p.is_mine(x)
                });
                if ok {
                    out.push(Cell::new(r, c));
                }
            }
        }
        out
    }

    fn domino() -> Pattern {
        Pattern::from_offsets(&[(0, 0), (1, 0)]).unwrap()
    }

    #[test]
    fn scanner_matches_naive_on_random_boards() {
        let c = canonical_p1_p2();
        let d = GridDims::new(64, 64).unwrap();
        let mut rng = rand_xoshiro::Xoshiro256PlusPlus::seed_from_u64(11);
        for trial in 0..40 {
            let p = [0.02, 0.05, 0.1, 0.2][trial % 4];
            let mut m = MineAssignment::empty(d);
            for i in 0..d.n() {
                if rng.random::<f64>() < p {
                    m.set_idx(i);
                }
            }
            if trial % 3 == 0 {
                plant(&mut m, &c.p1, Cell::new(rng.random_range(0..57), rng.random_range(0..57))).unwrap();
            }
            for pat in [&c.p1, &c.p2, &domino()] {
                assert_eq!(occurrences(&m, pat), naive_occurrences(&m, pat));
            }
        }
    }

    #[test]
    fn monte_carlo_mean_matches_expectation() {
        let pat = domino();
        let d = GridDims::new(48, 48).unwrap();
        let p = 0.1;
        let trials = 2000;
        let mut rng = rand_xoshiro::Xoshiro256PlusPlus::seed_from_u64(5);
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        for _ in 0..trials {
            let mut m = MineAssignment::empty(d);
            for i in 0..d.n() {
                if rng.random::<f64>() < p {
                    m.set_idx(i);
                }
            }
            let k = occurrences(&m, &pat).len() as f64;
            sum += k;
            sum_sq += k * k;
        }
        let mean = sum / trials as f64;
        let var = (sum_sq - trials as f64 * mean * mean) / (trials as f64 - 1.0);
        let se = (var / trials as f64).sqrt();
        let want = expected_occurrences(d, p, &pat);
        assert!((mean - want).abs() < 3.0 * se, "mean {mean} want {want} se {se}");
    }

    proptest! {
        #[test]
        fn planted_anchor_is_found(r in 0usize..50, col in 0usize..50, seed in any::<u64>()) {
            let c = canonical_p1_p2();
            let d = GridDims::new(58, 58).unwrap();
            let mut rng = rand_xoshiro::Xoshiro256PlusPlus::seed_from_u64(seed);
            let mut m = MineAssignment::empty(d);
            for i in 0..d.n() {
                if rng.random::<f64>() < 0.03 {
                    m.set_idx(i);
                }
            }
            plant(&mut m, &c.p2, Cell::new(r, col)).unwrap();
            prop_assert!(occurrences(&m, &c.p2).contains(&Cell::new(r, col)));
            prop_assert_eq!(occurrences(&m, &c.p2), naive_occurrences(&m, &c.p2));
        }

        #[test]
        fn normalized_offsets_are_valid(offs in proptest::collection::vec((-9i64..9, -9i64..9), 1..8)) {
            let p = Pattern::from_offsets(&offs).unwrap();
            prop_assert!(Pattern::new(p.frame(), p.mines().iter().copied()).is_ok());
            for k in 0..8u8 {
                prop_assert_eq!(p.dihedral(k).mine_count(), p.mine_count());
            }
        }
    }
}
