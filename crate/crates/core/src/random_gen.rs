//! Seeded random boards, the mine-addition process and window statistics.
//!
//! Trial `i` of a run with master seed `s` draws from a xoshiro256++ stream
//! seeded with `splitmix64(s ^ i)`, so results do not depend on how trials
//! are scheduled across threads.

use rand::{Rng, RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Cell, GridDims, MineAssignment};
use crate::patterns::{canonical_p1_p2, Pattern};

pub type TrialRng = Xoshiro256PlusPlus;

/// One SplitMix64 output for input `x`.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Seed(pub u64);

impl Seed {
    pub fn trial_seed(self, trial: u64) -> u64 {
        splitmix64(self.0 ^ trial)
    }

    pub fn stream(self, trial: u64) -> TrialRng {
        TrialRng::seed_from_u64(self.trial_seed(trial))
    }
}

fn check_probability(p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::Probability(p))
    }
}

/// Bernoulli draw comparing a full 64-bit word against `p * 2^64`.
struct Bernoulli {
    threshold: u64,
    always: bool,
}

impl Bernoulli {
    fn new(p: f64) -> Self {
        Bernoulli { threshold: (p * 18_446_744_073_709_551_616.0) as u64, always: p >= 1.0 }
    }

    #[inline]
    fn sample<R: RngCore + ?Sized>(&self, rng: &mut R) -> bool {
        let x = rng.next_u64();
        self.always || x < self.threshold
    }
}

/// Every cell holds a mine independently with probability `p`.
pub fn sample_iid<R: RngCore + ?Sized>(dims: GridDims, p: f64, rng: &mut R) -> Result<MineAssignment> {
    sample_augmented(&MineAssignment::empty(dims), p, rng)
}

/// Keeps the mines of `base` and mines each other cell independently with
/// probability `p`.
pub fn sample_augmented<R: RngCore + ?Sized>(
    base: &MineAssignment,
    p: f64,
    rng: &mut R,
) -> Result<MineAssignment> {
    check_probability(p)?;
    let mut m = base.clone();
    let coin = Bernoulli::new(p);
    for i in 0..m.dims().n() {
        // one draw per cell keeps the stream aligned whatever the base holds
        if coin.sample(rng) {
            m.set_idx(i);
        }
    }
    Ok(m)
}

/// Maximum mine count over all `w x w` windows, in `O(n)` time using
/// running column sums over a band of `w` rows.
pub fn window_mine_max(m: &MineAssignment, w: usize) -> Result<usize> {
    let dims = m.dims();
    if w == 0 || w > dims.rows || w > dims.cols {
        return Err(Error::WindowTooLarge { w, rows: dims.rows, cols: dims.cols });
    }
    let cols = dims.cols;
    let mut band = vec![0u32; cols];
    let mut best = 0u32;
    for r in 0..dims.rows {
        for (c, slot) in band.iter_mut().enumerate() {
            if m.is_mine_idx(r * cols + c) {
                *slot += 1;
            }
            if r >= w && m.is_mine_idx((r - w) * cols + c) {
                *slot -= 1;
            }
        }
        if r + 1 < w {
            continue;
        }
        let mut run: u32 = band[..w].iter().sum();
        best = best.max(run);
        for c in w..cols {
            run += band[c];
            run -= band[c - w];
            best = best.max(run);
        }
    }
    Ok(best as usize)
}

/// Smallest Chebyshev distance from a mine to the outermost ring of cells;
/// `None` without mines.
pub fn border_clearance(m: &MineAssignment) -> Option<usize> {
    let d = m.dims();
    m.mines()
        .map(|c| c.row.min(c.col).min(d.rows - 1 - c.row).min(d.cols - 1 - c.col))
        .min()
}

/// `n^(71/84)` rounded to the nearest integer.
pub fn kappa(n: usize) -> usize {
    (n as f64).powf(71.0 / 84.0).round() as usize
}

/// The mine-addition process: one uniformly chosen empty cell gets a mine
/// per step. Occurrence counts of the tracked patterns and the per-window
/// mine counts are maintained incrementally.
#[derive(Clone, Debug)]
pub struct ProcessState {
    board: MineAssignment,
    t: usize,
    tau: Option<usize>,
    window: usize,
    window_cols: usize,
    window_counts: Vec<u32>,
    window_max: usize,
    patterns: Vec<Pattern>,
    occurrence_counts: Vec<usize>,
    log: Vec<Cell>,
}

impl ProcessState {
    /// Starts from the empty board; `tau` fires on the first occurrence of
    /// any tracked pattern.
    pub fn new(dims: GridDims, window: usize, patterns: Vec<Pattern>) -> Result<Self> {
        if window == 0 || window > dims.rows || window > dims.cols {
            return Err(Error::WindowTooLarge { w: window, rows: dims.rows, cols: dims.cols });
        }
        let window_cols = dims.cols - window + 1;
        let n_windows = (dims.rows - window + 1) * window_cols;
        let k = patterns.len();
        Ok(ProcessState {
            board: MineAssignment::empty(dims),
            t: 0,
            tau: None,
            window,
            window_cols,
            window_counts: vec![0; n_windows],
            window_max: 0,
            patterns,
            occurrence_counts: vec![0; k],
            log: Vec::new(),
        })
    }

    /// Tracks P1 and P2 with a window of `min(100, rows, cols)`.
    pub fn with_canonical(dims: GridDims) -> Result<Self> {
        let c = canonical_p1_p2();
        Self::new(dims, 100.min(dims.rows).min(dims.cols), vec![c.p1, c.p2])
    }

    pub fn board(&self) -> &MineAssignment {
        &self.board
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn tau(&self) -> Option<usize> {
        self.tau
    }

    pub fn window(&self) -> usize {
        self.window
    }

    pub fn window_max(&self) -> usize {
        self.window_max
    }

    pub fn patterns(&self) -> &[Pattern] {
        &self.patterns
    }

    pub fn occurrence_counts(&self) -> &[usize] {
        &self.occurrence_counts
    }

    pub fn total_occurrences(&self) -> usize {
        self.occurrence_counts.iter().sum()
    }

    /// Cells in the order they received mines.
    pub fn log(&self) -> &[Cell] {
        &self.log
    }

    /// Adds one mine uniformly over the empty cells by rejection sampling.
    pub fn step<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<Cell> {
        let dims = self.board.dims();
        if self.board.count() >= dims.n() {
            return Err(Error::BoardFull);
        }
        loop {
            let i = rng.random_range(0..dims.n());
            if !self.board.is_mine_idx(i) {
                let c = dims.cell(i);
                self.add_mine(c)?;
                return Ok(c);
            }
        }
    }

    /// Adds a mine at a chosen empty cell (used for replaying logs).
    pub fn add_mine(&mut self, c: Cell) -> Result<()> {
        let dims = self.board.dims();
        dims.check(c)?;
        if self.board.count() >= dims.n() {
            return Err(Error::BoardFull);
        }
        if self.board.is_mine(c) {
            return Err(Error::DimensionMismatch(format!("cell ({}, {}) already holds a mine", c.row, c.col)));
        }
        // every occurrence whose frame covers c had c empty and is destroyed
        for (k, p) in self.patterns.iter().enumerate() {
            let f = p.frame();
            let r0 = c.row.saturating_sub(f.rows - 1);
            let c0 = c.col.saturating_sub(f.cols - 1);
            for ar in r0..=c.row {
                for ac in c0..=c.col {
                    if p.matches_at(&self.board, Cell::new(ar, ac)) {
                        self.occurrence_counts[k] -= 1;
                    }
                }
            }
        }
        self.board.add_mine(c)?;
        // a new occurrence must have one of its pattern mines at c
        for (k, p) in self.patterns.iter().enumerate() {
            for pm in p.mines() {
                if pm.row <= c.row && pm.col <= c.col {
                    let anchor = Cell::new(c.row - pm.row, c.col - pm.col);
                    if p.matches_at(&self.board, anchor) {
                        self.occurrence_counts[k] += 1;
                    }
                }
            }
        }
        let w = self.window;
        let rows_hi = c.row.min(dims.rows - w);
        let cols_hi = c.col.min(dims.cols - w);
        for wr in c.row.saturating_sub(w - 1)..=rows_hi {
            let base = wr * self.window_cols;
            for wc in c.col.saturating_sub(w - 1)..=cols_hi {
                let slot = &mut self.window_counts[base + wc];
                *slot += 1;
                self.window_max = self.window_max.max(*slot as usize);
            }
        }
        self.t += 1;
        self.log.push(c);
        if self.tau.is_none() && self.total_occurrences() > 0 {
            self.tau = Some(self.t);
        }
        Ok(())
    }

    /// Event log text: one `t row col` line per addition.
    pub fn log_text(&self) -> String {
        let mut out = String::with_capacity(self.log.len() * 12);
        for (i, c) in self.log.iter().enumerate() {
            out.push_str(&format!("{} {} {}\n", i + 1, c.row, c.col));
        }
        out
    }
}

/// Parses `t row col` lines; `t` must count up from 1.
pub fn parse_event_log(text: &str) -> Result<Vec<Cell>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let fields: Vec<&str> = line.split(' ').collect();
        let [t, r, c] = fields[..] else {
            return Err(Error::parse(i + 1, "expected \"t row col\""));
        };
        let num = |s: &str| s.parse::<usize>().map_err(|_| Error::parse(i + 1, format!("bad number {s:?}")));
        if num(t)? != i + 1 {
            return Err(Error::parse(i + 1, "event times must be consecutive from 1"));
        }
        out.push(Cell::new(num(r)?, num(c)?));
    }
    Ok(out)
}

/// Replays an event log into a fresh process.
pub fn replay(dims: GridDims, window: usize, patterns: Vec<Pattern>, events: &[Cell]) -> Result<ProcessState> {
    let mut st = ProcessState::new(dims, window, patterns)?;
    for &c in events {
        st.add_mine(c)?;
    }
    Ok(st)
}
