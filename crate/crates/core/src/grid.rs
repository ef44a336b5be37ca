//! The game model: grids, neighborhoods, mine assignments, grid states,
//! consistency, single-cell reveals and the zero flood.
//!
//! Neighborhoods include the cell itself, so an interior neighborhood has
//! nine cells and a corner neighborhood has four.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Cell {
    pub row: usize,
    pub col: usize,
}

impl Cell {
    pub const fn new(row: usize, col: usize) -> Self {
        Cell { row, col }
    }
}

impl From<(usize, usize)> for Cell {
    fn from((row, col): (usize, usize)) -> Self {
        Cell { row, col }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GridDims {
    pub rows: usize,
    pub cols: usize,
}

impl GridDims {
    pub fn new(rows: usize, cols: usize) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::EmptyDims { rows, cols });
        }
        Ok(GridDims { rows, cols })
    }

    /// Square board with `side * side` cells.
    pub fn square(side: usize) -> Result<Self> {
        Self::new(side, side)
    }

    /// Number of cells.
    #[inline]
    pub fn n(&self) -> usize {
        self.rows * self.cols
    }

    #[inline]
    pub fn contains(&self, c: Cell) -> bool {
        c.row < self.rows && c.col < self.cols
    }

    pub fn check(&self, c: Cell) -> Result<()> {
        if self.contains(c) {
            Ok(())
        } else {
            Err(Error::OutOfBounds { cell: c, rows: self.rows, cols: self.cols })
        }
    }

    #[inline]
    pub fn index(&self, c: Cell) -> usize {
        c.row * self.cols + c.col
    }

    #[inline]
    pub fn cell(&self, idx: usize) -> Cell {
        Cell { row: idx / self.cols, col: idx % self.cols }
    }

    /// All cells in row-major order.
    pub fn cells(self) -> impl Iterator<Item = Cell> {
        let cols = self.cols;
        (0..self.rows).flat_map(move |row| (0..cols).map(move |col| Cell { row, col }))
    }

    /// `N(c)`: the cell itself plus every in-bounds cell touching it.
    /// The caller guarantees `c` is in bounds.
    #[inline]
    pub fn neighborhood(&self, c: Cell) -> Neighborhood {
        Neighborhood::new(*self, c)
    }
}

/// Row-major iterator over a clipped 3x3 block.
#[derive(Clone, Debug)]
pub struct Neighborhood {
    row: usize,
    col: usize,
    row_end: usize,
    col_start: usize,
    col_end: usize,
}

impl Neighborhood {
    fn new(dims: GridDims, c: Cell) -> Self {
        let col_start = c.col.saturating_sub(1);
        Neighborhood {
            row: c.row.saturating_sub(1),
            col: col_start,
            row_end: (c.row + 1).min(dims.rows - 1),
            col_start,
            col_end: (c.col + 1).min(dims.cols - 1),
        }
    }
}

impl Iterator for Neighborhood {
    type Item = Cell;

    #[inline]
    fn next(&mut self) -> Option<Cell> {
        if self.row > self.row_end {
            return None;
        }
        let out = Cell { row: self.row, col: self.col };
        if self.col == self.col_end {
            self.col = self.col_start;
            self.row += 1;
        } else {
            self.col += 1;
        }
        Some(out)
    }
}

/// `N(c)` as a vector, including `c`.
pub fn neighbors(c: Cell, dims: GridDims) -> Result<Vec<Cell>> {
    dims.check(c)?;
    Ok(dims.neighborhood(c).collect())
}

/// Graph distance in the king-move graph.
pub fn grid_distance(a: Cell, b: Cell) -> usize {
    a.row.abs_diff(b.row).max(a.col.abs_diff(b.col))
}

/// Hidden ground truth. Mines live in a packed bit plane so that callers can
/// iterate them in `O(n / 64 + #mines)`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct MineAssignment {
    dims: GridDims,
    bits: Vec<u64>,
    count: usize,
}

impl std::fmt::Debug for MineAssignment {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("MineAssignment")
            .field("dims", &self.dims)
            .field("mines", &self.mines().collect::<Vec<_>>())
            .finish()
    }
}

impl MineAssignment {
    pub fn empty(dims: GridDims) -> Self {
        MineAssignment { dims, bits: vec![0; dims.n().div_ceil(64)], count: 0 }
    }

    pub fn full(dims: GridDims) -> Self {
        let mut m = Self::empty(dims);
        for i in 0..dims.n() {
            m.set_idx(i);
        }
        m
    }

    pub fn from_cells<I, C>(dims: GridDims, cells: I) -> Result<Self>
    where
        I: IntoIterator<Item = C>,
        C: Into<Cell>,
    {
        let mut m = Self::empty(dims);
        for c in cells {
            m.add_mine(c.into())?;
        }
        Ok(m)
    }

    #[inline]
    pub fn dims(&self) -> GridDims {
        self.dims
    }

    /// Number of mines.
    #[inline]
    pub fn count(&self) -> usize {
        self.count
    }

    #[inline]
    pub fn is_mine(&self, c: Cell) -> bool {
        self.is_mine_idx(self.dims.index(c))
    }

    #[inline]
    pub fn is_mine_idx(&self, idx: usize) -> bool {
        (self.bits[idx >> 6] >> (idx & 63)) & 1 == 1
    }

    /// Places a mine; returns whether the cell was previously empty.
    pub fn add_mine(&mut self, c: Cell) -> Result<bool> {
        self.dims.check(c)?;
        Ok(self.set_idx(self.dims.index(c)))
    }

    #[inline]
    pub(crate) fn set_idx(&mut self, idx: usize) -> bool {
        let word = &mut self.bits[idx >> 6];
        let bit = 1u64 << (idx & 63);
        if *word & bit == 0 {
            *word |= bit;
            self.count += 1;
            true
        } else {
            false
        }
    }

    pub fn remove_mine(&mut self, c: Cell) -> Result<bool> {
        self.dims.check(c)?;
        let idx = self.dims.index(c);
        let word = &mut self.bits[idx >> 6];
        let bit = 1u64 << (idx & 63);
        if *word & bit != 0 {
            *word &= !bit;
            self.count -= 1;
            Ok(true)
        } else {
            Ok(false)
        }
    }

    /// Mine indices in row-major order.
    pub fn mine_indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits.iter().enumerate().flat_map(|(w, &word)| {
            let mut rest = word;
            std::iter::from_fn(move || {
                if rest == 0 {
                    None
                } else {
                    let b = rest.trailing_zeros() as usize;
                    rest &= rest - 1;
                    Some(w * 64 + b)
                }
            })
        })
    }

    /// Mines in row-major order.
    pub fn mines(&self) -> impl Iterator<Item = Cell> + '_ {
        let dims = self.dims;
        self.mine_indices().map(move |i| dims.cell(i))
    }

    /// Number of mines in `N(c)` (the cell itself included).
    pub fn clue_value(&self, c: Cell) -> u8 {
        self.dims.neighborhood(c).filter(|&x| self.is_mine(x)).count() as u8
    }
}

/// Convenience wrapper over [`MineAssignment::clue_value`] with a bounds check.
pub fn clue_value(m: &MineAssignment, c: Cell) -> Result<u8> {
    m.dims().check(c)?;
    Ok(m.clue_value(c))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CellValue {
    Hidden,
    Clue(u8),
    Flag,
    ShownMine,
}

impl CellValue {
    pub fn is_hidden(self) -> bool {
        matches!(self, CellValue::Hidden)
    }

    pub fn clue(self) -> Option<u8> {
        match self {
            CellValue::Clue(k) => Some(k),
            _ => None,
        }
    }
}

/// Order in which the zero frontier is processed by the flood.
/// Both produce the same fixpoint.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum FloodOrder {
    #[default]
    Stack,
    Queue,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct FloodStats {
    /// Cells changed from hidden to revealed.
    pub revealed: usize,
    /// Cells examined: the start cell plus every worklist pop.
    pub touches: usize,
    pub hit_mine: bool,
}

/// The player's view of the board.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct GridState {
    dims: GridDims,
    values: Vec<CellValue>,
}

impl std::fmt::Debug for GridState {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "GridState\n{self}")
    }
}

impl GridState {
    pub fn all_hidden(dims: GridDims) -> Self {
        GridState { dims, values: vec![CellValue::Hidden; dims.n()] }
    }

    pub fn from_values(dims: GridDims, values: Vec<CellValue>) -> Result<Self> {
        if values.len() != dims.n() {
            return Err(Error::DimensionMismatch(format!(
                "{} values for a {}x{} grid",
                values.len(),
                dims.rows,
                dims.cols
            )));
        }
        if values.iter().any(|v| matches!(v, CellValue::Clue(k) if *k > 8)) {
            return Err(Error::DimensionMismatch("clue above 8".into()));
        }
        Ok(GridState { dims, values })
    }

    #[inline]
    pub fn dims(&self) -> GridDims {
        self.dims
    }

    #[inline]
    pub fn get(&self, c: Cell) -> CellValue {
        self.values[self.dims.index(c)]
    }

    #[inline]
    pub fn get_idx(&self, idx: usize) -> CellValue {
        self.values[idx]
    }

    pub fn values(&self) -> &[CellValue] {
        &self.values
    }

    /// Overwrites one cell. Intended for building fixtures and test states;
    /// play goes through [`GridState::reveal_cell`] and the flood.
    pub fn set(&mut self, c: Cell, v: CellValue) -> Result<()> {
        self.dims.check(c)?;
        if matches!(v, CellValue::Clue(k) if k > 8) {
            return Err(Error::DimensionMismatch("clue above 8".into()));
        }
        let i = self.dims.index(c);
        self.values[i] = v;
        Ok(())
    }

    /// Marks a hidden cell as a flag.
    pub fn flag(&mut self, c: Cell) -> Result<()> {
        self.dims.check(c)?;
        let i = self.dims.index(c);
        if !self.values[i].is_hidden() {
            return Err(Error::NotHidden(c));
        }
        self.values[i] = CellValue::Flag;
        Ok(())
    }

    pub fn hidden_cells(&self) -> impl Iterator<Item = Cell> + '_ {
        let dims = self.dims;
        self.values
            .iter()
            .enumerate()
            .filter(|(_, v)| v.is_hidden())
            .map(move |(i, _)| dims.cell(i))
    }

    pub fn count_hidden(&self) -> usize {
        self.values.iter().filter(|v| v.is_hidden()).count()
    }

    pub fn count_flags(&self) -> usize {
        self.values.iter().filter(|v| matches!(v, CellValue::Flag)).count()
    }

    pub fn has_shown_mine(&self) -> bool {
        self.values.iter().any(|v| matches!(v, CellValue::ShownMine))
    }

    /// `Reveal(M, S, c)` in place. Only the cell-level precondition is checked;
    /// global consistency is the caller's contract.
    pub fn reveal_cell(&mut self, m: &MineAssignment, c: Cell) -> Result<CellValue> {
        self.same_dims(m)?;
        self.dims.check(c)?;
        let i = self.dims.index(c);
        if !self.values[i].is_hidden() {
            return Err(Error::NotHidden(c));
        }
        let v = Self::truth(m, c);
        self.values[i] = v;
        Ok(v)
    }

    #[inline]
    fn truth(m: &MineAssignment, c: Cell) -> CellValue {
        if m.is_mine(c) {
            CellValue::ShownMine
        } else {
            CellValue::Clue(m.clue_value(c))
        }
    }

    fn same_dims(&self, m: &MineAssignment) -> Result<()> {
        if self.dims != m.dims() {
            return Err(Error::DimensionMismatch(format!(
                "state {}x{} vs assignment {}x{}",
                self.dims.rows,
                self.dims.cols,
                m.dims().rows,
                m.dims().cols
            )));
        }
        Ok(())
    }

    /// Reveals `start`, then keeps revealing hidden neighbors of revealed
    /// zeros until none remain. Duplicate worklist entries are filtered on pop.
    pub fn flood_from(
        &mut self,
        m: &MineAssignment,
        start: Cell,
        order: FloodOrder,
    ) -> Result<FloodStats> {
        let first = self.reveal_cell(m, start)?;
        let mut stats = FloodStats { revealed: 1, touches: 1, hit_mine: false };
        match first {
            CellValue::ShownMine => {
                stats.hit_mine = true;
                return Ok(stats);
            }
            CellValue::Clue(0) => {}
            _ => return Ok(stats),
        }
        let dims = self.dims;
        let mut work: std::collections::VecDeque<u32> = std::collections::VecDeque::new();
        self.push_hidden_neighbors(dims.index(start), &mut work);
        loop {
            let next = match order {
                FloodOrder::Stack => work.pop_back(),
                FloodOrder::Queue => work.pop_front(),
            };
            let Some(i) = next else { break };
            stats.touches += 1;
            let i = i as usize;
            if !self.values[i].is_hidden() {
                continue;
            }
            // neighbors of a zero are never mines
            let k = m.clue_value(dims.cell(i));
            self.values[i] = CellValue::Clue(k);
            stats.revealed += 1;
            if k == 0 {
                self.push_hidden_neighbors(i, &mut work);
            }
        }
        Ok(stats)
    }

    #[inline]
    fn push_hidden_neighbors(
        &self,
        idx: usize,
        work: &mut std::collections::VecDeque<u32>,
    ) {
        for x in self.dims.neighborhood(self.dims.cell(idx)) {
            let j = self.dims.index(x);
            if self.values[j].is_hidden() {
                work.push_back(j as u32);
            }
        }
    }
}

/// Whether `m` and `s` are consistent: every cell is hidden, shows its true
/// clue, or is a flag / shown mine sitting on a mine.
pub fn is_consistent(m: &MineAssignment, s: &GridState) -> Result<bool> {
    s.same_dims(m)?;
    let dims = s.dims();
    Ok(dims.cells().all(|c| match s.get(c) {
        CellValue::Hidden => true,
        CellValue::Clue(k) => m.clue_value(c) == k,
        CellValue::Flag | CellValue::ShownMine => m.is_mine(c),
    }))
}

/// Pure form of `Reveal(M, S, c)`.
pub fn reveal(m: &MineAssignment, s: &GridState, c: Cell) -> Result<GridState> {
    if !is_consistent(m, s)? {
        return Err(Error::Inconsistent);
    }
    let mut out = s.clone();
    out.reveal_cell(m, c)?;
    Ok(out)
}

/// Pure form of the zero flood started at `start`.
pub fn flood_reveal(m: &MineAssignment, s: &GridState, start: Cell) -> Result<GridState> {
    if !is_consistent(m, s)? {
        return Err(Error::Inconsistent);
    }
    let mut out = s.clone();
    out.flood_from(m, start, FloodOrder::Stack)?;
    Ok(out)
}

/// No mine is shown and every hidden cell hides a mine.
pub fn is_solved(m: &MineAssignment, s: &GridState) -> Result<bool> {
    s.same_dims(m)?;
    let dims = s.dims();
    Ok((0..dims.n()).all(|i| match s.get_idx(i) {
        CellValue::ShownMine => false,
        CellValue::Hidden => m.is_mine_idx(i),
        _ => true,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn dims(r: usize, c: usize) -> GridDims {
        GridDims::new(r, c).unwrap()
    }

    #[test]
    fn neighborhood_sizes() {
        assert_eq!(neighbors(Cell::new(2, 2), dims(5, 5)).unwrap().len(), 9);
        assert_eq!(neighbors(Cell::new(0, 0), dims(2, 2)).unwrap().len(), 4);
        assert_eq!(neighbors(Cell::new(0, 0), dims(7, 3)).unwrap().len(), 4);
        assert_eq!(neighbors(Cell::new(0, 1), dims(3, 3)).unwrap().len(), 6);
        assert_eq!(neighbors(Cell::new(0, 0), dims(1, 1)).unwrap(), vec![Cell::new(0, 0)]);
        assert!(neighbors(Cell::new(3, 0), dims(3, 3)).is_err());
    }

    #[test]
    fn neighborhood_contains_self() {
        let d = dims(4, 6);
        for c in d.cells() {
            assert!(d.neighborhood(c).any(|x| x == c));
        }
    }

    #[test]
    fn distances() {
        assert_eq!(grid_distance(Cell::new(0, 0), Cell::new(0, 0)), 0);
        assert_eq!(grid_distance(Cell::new(0, 0), Cell::new(1, 1)), 1);
        assert_eq!(grid_distance(Cell::new(2, 3), Cell::new(5, 1)), 3);
    }

    #[test]
    fn clue_values() {
        let d = dims(5, 5);
        let empty = MineAssignment::empty(d);
        assert!(d.cells().all(|c| empty.clue_value(c) == 0));
        let one = MineAssignment::from_cells(d, [(2, 2)]).unwrap();
        assert_eq!(clue_value(&one, Cell::new(1, 1)).unwrap(), 1);
        assert_eq!(one.clue_value(Cell::new(0, 0)), 0);
    }

    #[test]
    fn consistency_clauses() {
        let d = dims(3, 3);
        let m = MineAssignment::from_cells(d, [(0, 0)]).unwrap();
        let s = GridState::all_hidden(d);
        assert!(is_consistent(&m, &s).unwrap());
        let empty = MineAssignment::empty(d);
        let mut bad = GridState::all_hidden(d);
        bad.set(Cell::new(1, 1), CellValue::Clue(1)).unwrap();
        assert!(!is_consistent(&empty, &bad).unwrap());
        assert!(is_consistent(&m, &bad).unwrap());
        let mut flagged = GridState::all_hidden(d);
        flagged.set(Cell::new(2, 2), CellValue::Flag).unwrap();
        assert!(!is_consistent(&m, &flagged).unwrap());
        let other = MineAssignment::empty(dims(3, 4));
        assert!(is_consistent(&other, &s).is_err());
    }

    #[test]
    fn reveal_contract() {
        let d = dims(3, 3);
        let empty = MineAssignment::empty(d);
        let s = GridState::all_hidden(d);
        let r = reveal(&empty, &s, Cell::new(0, 0)).unwrap();
        assert_eq!(r.get(Cell::new(0, 0)), CellValue::Clue(0));
        assert_eq!(r.count_hidden(), 8);
        assert!(matches!(reveal(&empty, &r, Cell::new(0, 0)), Err(Error::NotHidden(_))));

        let m = MineAssignment::from_cells(d, [(1, 1)]).unwrap();
        let r = reveal(&m, &s, Cell::new(1, 1)).unwrap();
        assert_eq!(r.get(Cell::new(1, 1)), CellValue::ShownMine);
    }

    #[test]
    fn flood_empty_board() {
        let d = dims(6, 9);
        let m = MineAssignment::empty(d);
        let s = flood_reveal(&m, &GridState::all_hidden(d), Cell::new(3, 4)).unwrap();
        assert!(s.values().iter().all(|&v| v == CellValue::Clue(0)));
    }

    #[test]
    fn flood_around_single_mine() {
        let d = dims(9, 9);
        let m = MineAssignment::from_cells(d, [(4, 4)]).unwrap();
        let s = flood_reveal(&m, &GridState::all_hidden(d), Cell::new(0, 0)).unwrap();
        assert_eq!(s.get(Cell::new(4, 4)), CellValue::Hidden);
        assert_eq!(s.count_hidden(), 1);
        for c in d.neighborhood(Cell::new(4, 4)).filter(|&c| c != Cell::new(4, 4)) {
            assert_eq!(s.get(c), CellValue::Clue(1));
        }
    }

    #[test]
    fn flood_on_mine_stops() {
        let d = dims(4, 4);
        let m = MineAssignment::from_cells(d, [(0, 0)]).unwrap();
        let s = flood_reveal(&m, &GridState::all_hidden(d), Cell::new(0, 0)).unwrap();
        assert_eq!(s.get(Cell::new(0, 0)), CellValue::ShownMine);
        assert_eq!(s.count_hidden(), 15);
    }

    #[test]
    fn solved_definition() {
        let d = dims(3, 3);
        let m = MineAssignment::empty(d);
        let s = flood_reveal(&m, &GridState::all_hidden(d), Cell::new(0, 0)).unwrap();
        assert!(is_solved(&m, &s).unwrap());
        assert!(!is_solved(&m, &GridState::all_hidden(d)).unwrap());
        let mined = MineAssignment::from_cells(d, [(2, 2)]).unwrap();
        let mut shown = GridState::all_hidden(d);
        shown.reveal_cell(&mined, Cell::new(2, 2)).unwrap();
        assert!(!is_solved(&mined, &shown).unwrap());
    }

    fn board_strategy() -> impl Strategy<Value = (MineAssignment, u64)> {
        (1usize..12, 1usize..12, 0.0f64..0.5, any::<u64>()).prop_map(|(r, c, p, seed)| {
            use rand::{Rng, SeedableRng};
            let d = dims(r, c);
            let mut rng = rand_xoshiro::Xoshiro256PlusPlus::seed_from_u64(seed);
            let mut m = MineAssignment::empty(d);
            for i in 0..d.n() {
                if rng.random::<f64>() < p {
                    m.set_idx(i);
                }
            }
            (m, seed)
        })
    }

    proptest! {
        #[test]
        fn clue_matches_brute_force((m, _) in board_strategy()) {
            let d = m.dims();
            for c in d.cells() {
                let mut brute = 0;
                for dr in -1i64..=1 {
                    for dc in -1i64..=1 {
                        let (r, cc) = (c.row as i64 + dr, c.col as i64 + dc);
                        if r >= 0 && cc >= 0 && (r as usize) < d.rows && (cc as usize) < d.cols
                            && m.is_mine(Cell::new(r as usize, cc as usize)) {
                            brute += 1;
                        }
                    }
                }
                prop_assert_eq!(m.clue_value(c), brute);
            }
        }

        #[test]
        fn reveal_is_local_and_consistent((m, seed) in board_strategy()) {
            use rand::{Rng, SeedableRng};
            let d = m.dims();
            let mut rng = rand_xoshiro::Xoshiro256PlusPlus::seed_from_u64(seed ^ 0xabc);
            let mut s = GridState::all_hidden(d);
            for i in 0..d.n() {
                if !m.is_mine_idx(i) && rng.random::<bool>() {
                    s.reveal_cell(&m, d.cell(i)).unwrap();
                }
            }
            let first_hidden = s.hidden_cells().next();
            if let Some(c) = first_hidden {
                let r = reveal(&m, &s, c).unwrap();
                prop_assert!(is_consistent(&m, &r).unwrap());
                for x in d.cells() {
                    if x != c {
                        prop_assert_eq!(r.get(x), s.get(x));
                    }
                }
            }
        }

        #[test]
        fn flood_is_confluent_and_linear((m, seed) in board_strategy()) {
            let d = m.dims();
            let start = d.cell(seed as usize % d.n());
            let mut a = GridState::all_hidden(d);
            let sa = a.flood_from(&m, start, FloodOrder::Stack).unwrap();
            let mut b = GridState::all_hidden(d);
            let sb = b.flood_from(&m, start, FloodOrder::Queue).unwrap();
            prop_assert_eq!(&a, &b);
            prop_assert!(sa.touches <= 8 * d.n() + 1);
            prop_assert!(sb.touches <= 8 * d.n() + 1);
            prop_assert!(is_consistent(&m, &a).unwrap());
        }

        #[test]
        fn fully_revealed_solved_iff_no_shown_mine((m, _) in board_strategy()) {
            let d = m.dims();
            let mut s = GridState::all_hidden(d);
            for i in 0..d.n() {
                if !m.is_mine_idx(i) {
                    s.reveal_cell(&m, d.cell(i)).unwrap();
                }
            }
            prop_assert!(is_solved(&m, &s).unwrap());
            if let Some(c) = m.mines().next() {
                s.reveal_cell(&m, c).unwrap();
                prop_assert!(!is_solved(&m, &s).unwrap());
            }
        }
    }
}
