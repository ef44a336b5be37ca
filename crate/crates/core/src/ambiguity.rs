//! Exact inference over hidden cells, ambiguity of states and patterns, and
//! the exhaustive search for small ambiguous patterns.
//!
//! Completions range over arbitrary mine placements on the hidden cells; the
//! pattern frame rules are only a canonical representation and are not
//! imposed on completions.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Cell, CellValue, GridDims, GridState, MineAssignment};
use crate::patterns::{self, canonical_p1_p2, envelope_pruning_checks, Pattern, PruneVerdict};

/// Search nodes allowed per constraint component.
pub const DEFAULT_NODE_BUDGET: u64 = 10_000_000;

/// Largest mine count the enumerator accepts.
pub const MAX_ENUMERATION_MINES: usize = 7;

/// Empty rings added around a pattern frame before playing it out.
pub const PLAY_OUT_PADDING: usize = 3;

/// One clue seen as an equation over its hidden neighbors.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CompletionConstraint {
    pub clue_cell: Cell,
    /// Clue minus adjacent flags.
    pub required: i32,
    pub unknowns: Vec<Cell>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct InferenceReport {
    pub always_mine: Vec<Cell>,
    pub never_mine: Vec<Cell>,
    pub two_way: Vec<Cell>,
    /// Completions of the constrained cells (saturating). Cells no clue
    /// touches are left out of the count.
    pub completion_count: u128,
    /// Hidden cells touched by no clue; also listed in `two_way`.
    pub unconstrained: usize,
}

/// Constraints contributed by every clue adjacent to a hidden cell.
pub fn completion_constraints(s: &GridState) -> Vec<CompletionConstraint> {
    let dims = s.dims();
    let mut out = Vec::new();
    for c in dims.cells() {
        let CellValue::Clue(k) = s.get(c) else { continue };
        let mut unknowns = Vec::new();
        let mut flags = 0;
        for x in dims.neighborhood(c) {
            match s.get(x) {
                CellValue::Hidden => unknowns.push(x),
                CellValue::Flag => flags += 1,
                _ => {}
            }
        }
        if !unknowns.is_empty() {
            out.push(CompletionConstraint { clue_cell: c, required: k as i32 - flags, unknowns });
        }
    }
    out
}

/// Classifies every hidden cell of `s` as always a mine, never a mine, or
/// either way across all completions consistent with the clues.
pub fn classify_hidden(s: &GridState) -> Result<InferenceReport> {
    if s.has_shown_mine() {
        return Err(Error::ShownMine);
    }
    let dims = s.dims();
    // clues with no hidden neighbor must already be satisfied by flags
    for c in dims.cells() {
        if let CellValue::Clue(k) = s.get(c) {
            let mut hidden = false;
            let mut flags = 0u8;
            for x in dims.neighborhood(c) {
                match s.get(x) {
                    CellValue::Hidden => hidden = true,
                    CellValue::Flag => flags += 1,
                    _ => {}
                }
            }
            if !hidden && flags != k {
                return Err(Error::NoCompletion);
            }
        }
    }
    let hidden: Vec<usize> = (0..dims.n()).filter(|&i| s.get_idx(i).is_hidden()).collect();
    classify_region(s, &hidden, DEFAULT_NODE_BUDGET)
}

/// Exact classification restricted to `region` (hidden cell indices) and the
/// clues around it. Every hidden neighbor of those clues joins the problem.
pub(crate) fn classify_region(s: &GridState, region: &[usize], budget: u64) -> Result<InferenceReport> {
    let dims = s.dims();
    let mut var_of: HashMap<usize, usize> = HashMap::with_capacity(region.len() * 2);
    let mut vars: Vec<usize> = Vec::with_capacity(region.len());
    let mut var_id = |idx: usize, vars: &mut Vec<usize>| -> usize {
        *var_of.entry(idx).or_insert_with(|| {
            vars.push(idx);
            vars.len() - 1
        })
    };
    for &i in region {
        var_id(i, &mut vars);
    }

    let mut clue_cells: Vec<usize> = Vec::new();
    for &i in region {
        for x in dims.neighborhood(dims.cell(i)) {
            if s.get(x).clue().is_some() {
                clue_cells.push(dims.index(x));
            }
        }
    }
    clue_cells.sort_unstable();
    clue_cells.dedup();

    let mut constraints: Vec<(i32, Vec<usize>)> = Vec::with_capacity(clue_cells.len());
    for &ci in &clue_cells {
        let c = dims.cell(ci);
        let k = s.get(c).clue().unwrap() as i32;
        let mut flags = 0;
        let mut unk = Vec::with_capacity(8);
        for x in dims.neighborhood(c) {
            match s.get(x) {
                CellValue::Hidden => unk.push(var_id(dims.index(x), &mut vars)),
                CellValue::Flag => flags += 1,
                _ => {}
            }
        }
        let required = k - flags;
        if required < 0 || required > unk.len() as i32 {
            return Err(Error::NoCompletion);
        }
        constraints.push((required, unk));
    }

    let nv = vars.len();
    let mut uf = UnionFind::new(nv);
    let mut constrained = vec![false; nv];
    for (_, unk) in &constraints {
        for &v in unk {
            constrained[v] = true;
        }
        for w in unk.windows(2) {
            uf.union(w[0], w[1]);
        }
    }

    // group constraints and variables by component root
    let mut comp_vars: HashMap<usize, Vec<usize>> = HashMap::new();
    for v in 0..nv {
        if constrained[v] {
            comp_vars.entry(uf.find(v)).or_default().push(v);
        }
    }
    let mut comp_cons: HashMap<usize, Vec<usize>> = HashMap::new();
    for (ci, (_, unk)) in constraints.iter().enumerate() {
        comp_cons.entry(uf.find(unk[0])).or_default().push(ci);
    }
    let mut components: Vec<(Vec<usize>, Vec<usize>)> = comp_vars
        .into_iter()
        .map(|(root, vs)| (vs, comp_cons.remove(&root).unwrap_or_default()))
        .collect();
    // small components first; ties broken by first variable for determinism
    components.sort_by_key(|(vs, _)| (vs.len(), vars[vs[0]]));

    let mut status = vec![VarStatus::Unconstrained; nv];
    let mut completion_count: u128 = 1;
    for (vs, cs) in &components {
        let (solutions, mine_counts) = count_component(vs, cs, &constraints, budget)?;
        if solutions == 0 {
            return Err(Error::NoCompletion);
        }
        completion_count = completion_count.saturating_mul(solutions);
        for (k, &v) in vs.iter().enumerate() {
            status[v] = match mine_counts[k] {
                0 => VarStatus::Never,
                m if m == solutions => VarStatus::Always,
                _ => VarStatus::TwoWay,
            };
        }
    }

    let mut report = InferenceReport { completion_count, ..Default::default() };
    let mut order: Vec<usize> = (0..nv).collect();
    order.sort_by_key(|&v| vars[v]);
    for v in order {
        let cell = dims.cell(vars[v]);
        match status[v] {
            VarStatus::Never => report.never_mine.push(cell),
            VarStatus::Always => report.always_mine.push(cell),
            VarStatus::TwoWay => report.two_way.push(cell),
            VarStatus::Unconstrained => {
                report.unconstrained += 1;
                report.two_way.push(cell);
            }
        }
    }
    Ok(report)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum VarStatus {
    Unconstrained,
    Never,
    Always,
    TwoWay,
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect() }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// Counts solutions of one component and, per variable, the solutions where
/// it holds a mine. Variables are assigned fail-first (most constrained
/// first) with forward checking on every touched constraint.
fn count_component(
    vars: &[usize],
    cons: &[usize],
    all: &[(i32, Vec<usize>)],
    budget: u64,
) -> Result<(u128, Vec<u128>)> {
    let local: HashMap<usize, usize> = vars.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let n = vars.len();
    let mut incident: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut required = Vec::with_capacity(cons.len());
    let mut unassigned = Vec::with_capacity(cons.len());
    for (k, &ci) in cons.iter().enumerate() {
        let (req, unk) = &all[ci];
        required.push(*req);
        unassigned.push(unk.len() as i32);
        for v in unk {
            incident[local[v]].push(k);
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&v| (std::cmp::Reverse(incident[v].len()), v));

    let mut search = Search {
        incident: &incident,
        order: &order,
        required: &required,
        mines: vec![0; cons.len()],
        unassigned,
        value: vec![false; n],
        solutions: 0,
        mine_counts: vec![0; n],
        nodes: 0,
        budget,
    };
    search.run(0)?;
    Ok((search.solutions, search.mine_counts))
}

struct Search<'a> {
    incident: &'a [Vec<usize>],
    order: &'a [usize],
    required: &'a [i32],
    mines: Vec<i32>,
    unassigned: Vec<i32>,
    value: Vec<bool>,
    solutions: u128,
    mine_counts: Vec<u128>,
    nodes: u64,
    budget: u64,
}

impl Search<'_> {
    fn run(&mut self, depth: usize) -> Result<()> {
        self.nodes += 1;
        if self.nodes > self.budget {
            return Err(Error::SearchBudget(self.budget));
        }
        if depth == self.order.len() {
            self.solutions += 1;
            for (v, &b) in self.value.iter().enumerate() {
                if b {
                    self.mine_counts[v] += 1;
                }
            }
            return Ok(());
        }
        let v = self.order[depth];
        for mine in [false, true] {
            let mut ok = true;
            for &c in &self.incident[v] {
                self.unassigned[c] -= 1;
                if mine {
                    self.mines[c] += 1;
                }
                if self.mines[c] > self.required[c] || self.mines[c] + self.unassigned[c] < self.required[c] {
                    ok = false;
                }
            }
            if ok {
                self.value[v] = mine;
                self.run(depth + 1)?;
                self.value[v] = false;
            }
            for &c in &self.incident[v] {
                self.unassigned[c] += 1;
                if mine {
                    self.mines[c] -= 1;
                }
            }
        }
        Ok(())
    }
}

/// At least one hidden cell, no shown mine, and every hidden cell two-way.
pub fn is_ambiguous_state(s: &GridState) -> Result<bool> {
    let report = classify_hidden(s)?;
    Ok(!report.two_way.is_empty() && report.always_mine.is_empty() && report.never_mine.is_empty())
}

/// Reveals safe cells and flags forced mines using single-clue deductions
/// until nothing changes. Every deduction is also an exact-inference
/// deduction, so this only shortcuts the full classification.
fn propagate_single_clues(m: &MineAssignment, s: &mut GridState) {
    let dims = s.dims();
    loop {
        let mut changed = false;
        for c in dims.cells() {
            let Some(k) = s.get(c).clue() else { continue };
            let mut hidden = 0i32;
            let mut flags = 0i32;
            for x in dims.neighborhood(c) {
                match s.get(x) {
                    CellValue::Hidden => hidden += 1,
                    CellValue::Flag => flags += 1,
                    _ => {}
                }
            }
            if hidden == 0 {
                continue;
            }
            let need = k as i32 - flags;
            if need == 0 {
                for x in dims.neighborhood(c) {
                    if s.get(x).is_hidden() {
                        s.reveal_cell(m, x).expect("deduced safe cell");
                    }
                }
                changed = true;
            } else if need == hidden {
                for x in dims.neighborhood(c) {
                    if s.get(x).is_hidden() {
                        s.flag(x).expect("hidden");
                    }
                }
                changed = true;
            }
        }
        if !changed {
            return;
        }
    }
}

/// The state reached by revealing every zero of `m`, then repeatedly
/// revealing all cells exact inference proves safe, flagging the cells it
/// proves to be mines. Whatever stays hidden is two-way.
pub fn played_out_state(m: &MineAssignment) -> Result<GridState> {
    let dims = m.dims();
    let mut s = GridState::all_hidden(dims);
    for c in dims.cells() {
        if !m.is_mine(c) && m.clue_value(c) == 0 {
            s.reveal_cell(m, c)?;
        }
    }
    loop {
        propagate_single_clues(m, &mut s);
        if s.count_hidden() == 0 {
            return Ok(s);
        }
        let report = classify_hidden(&s)?;
        for &c in &report.always_mine {
            s.flag(c)?;
        }
        if report.never_mine.is_empty() {
            return Ok(s);
        }
        for &c in &report.never_mine {
            s.reveal_cell(m, c)?;
        }
    }
}

fn padded_board(p: &Pattern) -> MineAssignment {
    let f = p.frame();
    let dims = GridDims::new(f.rows + 2 * PLAY_OUT_PADDING, f.cols + 2 * PLAY_OUT_PADDING).unwrap();
    patterns::embed(p, dims, Cell::new(PLAY_OUT_PADDING, PLAY_OUT_PADDING)).expect("padded frame fits")
}

/// The played-out state of `p` embedded with empty padding around its frame.
pub fn pattern_play_out(p: &Pattern) -> Result<GridState> {
    played_out_state(&padded_board(p))
}

/// Whether perfect inference with maximal safe information leaves two-way
/// cells on `p`.
pub fn is_ambiguous_pattern(p: &Pattern) -> bool {
    pattern_play_out(p)
        .map(|s| s.count_hidden() > 0)
        .expect("states played out from a real assignment are consistent")
}

/// Cells with Chebyshev distance at most 3: the mine adjacency used to
/// grow clusters.
const CLUSTER_RADIUS: i32 = 3;

/// Visits every connected set of at most `max` cells under the distance-3
/// adjacency exactly once up to translation (Redelmeier's method). Each set
/// is reported with its lexicographically smallest cell at the origin.
fn for_each_cluster(max: usize, mut visit: impl FnMut(&[(i32, i32)])) {
    if max == 0 {
        return;
    }
    let reach = CLUSTER_RADIUS * (max as i32 - 1);
    let width = (2 * reach + 1 + 2 * CLUSTER_RADIUS) as usize;
    let height = (reach + 1 + CLUSTER_RADIUS) as usize;
    let offset_c = reach + CLUSTER_RADIUS;
    let mut seen = vec![false; width * height];
    let key = |r: i32, c: i32| r as usize * width + (c + offset_c) as usize;
    let allowed = |r: i32, c: i32| r > 0 || (r == 0 && c >= 0);
    let mut deltas = Vec::new();
    for dr in -CLUSTER_RADIUS..=CLUSTER_RADIUS {
        for dc in -CLUSTER_RADIUS..=CLUSTER_RADIUS {
            if (dr, dc) != (0, 0) {
                deltas.push((dr, dc));
            }
        }
    }

    struct Ctx<'a, F: FnMut(&[(i32, i32)])> {
        max: usize,
        reach: i32,
        deltas: Vec<(i32, i32)>,
        seen: Vec<bool>,
        cluster: Vec<(i32, i32)>,
        visit: &'a mut F,
        key: &'a dyn Fn(i32, i32) -> usize,
        allowed: &'a dyn Fn(i32, i32) -> bool,
    }

    fn grow<F: FnMut(&[(i32, i32)])>(ctx: &mut Ctx<'_, F>, mut untried: Vec<(i32, i32)>) {
        while let Some(cell) = untried.pop() {
            ctx.cluster.push(cell);
            (ctx.visit)(&ctx.cluster);
            if ctx.cluster.len() < ctx.max {
                let mut next = untried.clone();
                let mut added = Vec::new();
                for i in 0..ctx.deltas.len() {
                    let (dr, dc) = ctx.deltas[i];
                    let (r, c) = (cell.0 + dr, cell.1 + dc);
                    if !(ctx.allowed)(r, c) || r > ctx.reach || c.abs() > ctx.reach {
                        continue;
                    }
                    let k = (ctx.key)(r, c);
                    if !ctx.seen[k] {
                        ctx.seen[k] = true;
                        added.push(k);
                        next.push((r, c));
                    }
                }
                grow(ctx, next);
                for k in added {
                    ctx.seen[k] = false;
                }
            }
            ctx.cluster.pop();
        }
    }

    seen[key(0, 0)] = true;
    let mut ctx = Ctx {
        max,
        reach,
        deltas,
        seen,
        cluster: Vec::with_capacity(max),
        visit: &mut visit,
        key: &key,
        allowed: &allowed,
    };
    grow(&mut ctx, vec![(0, 0)]);
}

/// Number of translation classes of connected clusters with exactly `k`
/// mines, for each `k` in `1..=max`.
pub fn cluster_counts(max: usize) -> Vec<u64> {
    let mut counts = vec![0u64; max];
    for_each_cluster(max, |c| counts[c.len() - 1] += 1);
    counts
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnumerationStats {
    pub candidates: u64,
    pub single_clue_solved: u64,
    pub pruned: u64,
    pub full_checks: u64,
    pub accepted: u64,
}

/// All ambiguous patterns with at most `max_mines` mines whose mines form a
/// single cluster under the distance-3 adjacency, sorted.
pub fn enumerate_ambiguous(max_mines: usize) -> Result<Vec<Pattern>> {
    enumerate_ambiguous_with_stats(max_mines).map(|(p, _)| p)
}

pub fn enumerate_ambiguous_with_stats(max_mines: usize) -> Result<(Vec<Pattern>, EnumerationStats)> {
    if max_mines == 0 || max_mines > MAX_ENUMERATION_MINES {
        return Err(Error::EnumerationTooLarge(max_mines));
    }
    let flag_limit = (max_mines <= 6).then_some(5);
    let mut stats = EnumerationStats::default();
    let mut found = Vec::new();
    let mut scratch = LocalBoard::new();
    for_each_cluster(max_mines, |cluster| {
        stats.candidates += 1;
        if scratch.single_clue_solves(cluster) {
            stats.single_clue_solved += 1;
            return;
        }
        let offs: Vec<(i64, i64)> = cluster.iter().map(|&(r, c)| (r as i64, c as i64)).collect();
        let p = Pattern::from_offsets(&offs).expect("non-empty cluster");
        match quick_verdict(&p, flag_limit) {
            Quick::Solved => stats.single_clue_solved += 1,
            Quick::Pruned => stats.pruned += 1,
            Quick::Undecided => {
                stats.full_checks += 1;
                if is_ambiguous_pattern(&p) {
                    stats.accepted += 1;
                    found.push(p);
                }
            }
        }
    });
    found.sort();
    found.dedup();
    Ok((found, stats))
}

const LOCAL_STRIDE: usize = 32;
const LOCAL_PAD: i32 = 3;

/// Fixed-size scratch board for the enumerator's first pass. Coordinates are
/// shifted so every neighborhood that matters lies strictly inside.
struct LocalBoard {
    mine: [bool; LOCAL_STRIDE * LOCAL_STRIDE],
    count: [u8; LOCAL_STRIDE * LOCAL_STRIDE],
    /// 0 hidden, 1 revealed, 2 flagged
    state: [u8; LOCAL_STRIDE * LOCAL_STRIDE],
    near: Vec<usize>,
}

const HIDDEN: u8 = 0;
const REVEALED: u8 = 1;
const FLAGGED: u8 = 2;

impl LocalBoard {
    fn new() -> Self {
        LocalBoard {
            mine: [false; LOCAL_STRIDE * LOCAL_STRIDE],
            count: [0; LOCAL_STRIDE * LOCAL_STRIDE],
            state: [REVEALED; LOCAL_STRIDE * LOCAL_STRIDE],
            near: Vec::with_capacity(128),
        }
    }

    #[inline]
    fn around(i: usize) -> [usize; 9] {
        let s = LOCAL_STRIDE;
        [i - s - 1, i - s, i - s + 1, i - 1, i, i + 1, i + s - 1, i + s, i + s + 1]
    }

    /// Whether zeros plus single-clue deductions reveal every safe cell of
    /// the cluster (in which case it cannot be ambiguous).
    fn single_clue_solves(&mut self, cluster: &[(i32, i32)]) -> bool {
        let min_c = cluster.iter().map(|c| c.1).min().unwrap();
        let idx = |&(r, c): &(i32, i32)| {
            (r + LOCAL_PAD) as usize * LOCAL_STRIDE + (c - min_c + LOCAL_PAD) as usize
        };
        // reset only what the previous call touched
        for &i in &self.near {
            self.mine[i] = false;
            self.count[i] = 0;
            self.state[i] = REVEALED;
        }
        self.near.clear();
        for cell in cluster {
            let i = idx(cell);
            self.mine[i] = true;
            for j in Self::around(i) {
                if self.count[j] == 0 {
                    self.near.push(j);
                }
                self.count[j] += 1;
            }
        }
        // a near cell stays hidden unless it touches a zero; cells outside
        // `near` are zeros
        let mut hidden_safe = 0usize;
        for k in 0..self.near.len() {
            let i = self.near[k];
            let touches_zero = Self::around(i).iter().any(|&j| self.count[j] == 0);
            if touches_zero {
                self.state[i] = REVEALED;
            } else {
                self.state[i] = HIDDEN;
                if !self.mine[i] {
                    hidden_safe += 1;
                }
            }
        }
        let mut hidden_mines = cluster.len();
        loop {
            let mut changed = false;
            for k in 0..self.near.len() {
                let i = self.near[k];
                if self.state[i] != REVEALED {
                    continue;
                }
                let mut hidden = 0u8;
                let mut flags = 0u8;
                for j in Self::around(i) {
                    match self.state[j] {
                        HIDDEN => hidden += 1,
                        FLAGGED => flags += 1,
                        _ => {}
                    }
                }
                if hidden == 0 {
                    continue;
                }
                let need = self.count[i] - flags;
                if need == 0 || need == hidden {
                    for j in Self::around(i) {
                        if self.state[j] == HIDDEN {
                            if self.mine[j] {
                                self.state[j] = FLAGGED;
                                hidden_mines -= 1;
                            } else {
                                self.state[j] = REVEALED;
                                hidden_safe -= 1;
                            }
                        }
                    }
                    changed = true;
                }
            }
            if hidden_safe == 0 && hidden_mines == 0 {
                return true;
            }
            if !changed {
                return false;
            }
        }
    }
}

enum Quick {
    Solved,
    Pruned,
    Undecided,
}

fn quick_verdict(p: &Pattern, flag_limit: Option<usize>) -> Quick {
    let m = padded_board(p);
    let dims = m.dims();
    let mut s = GridState::all_hidden(dims);
    for i in 0..dims.n() {
        let c = dims.cell(i);
        if !m.is_mine_idx(i) && m.clue_value(c) == 0 {
            s.reveal_cell(&m, c).unwrap();
        }
    }
    propagate_single_clues(&m, &mut s);
    if s.count_hidden() == 0 {
        return Quick::Solved;
    }
    if let PruneVerdict::Fail(_) = envelope_pruning_checks(&s, flag_limit) {
        return Quick::Pruned;
    }
    Quick::Undecided
}

/// Frame-relative cells (within one ring around P1's frame) where one extra
/// mine makes P1 non-ambiguous.
pub fn non_monotone_witnesses() -> Vec<Cell> {
    let p1 = canonical_p1_p2().p1;
    let f = p1.frame();
    let mut out = Vec::new();
    for r in -1..=f.rows as i64 {
        for c in -1..=f.cols as i64 {
            if r >= 0 && c >= 0 && p1.is_mine(Cell::new(r as usize, c as usize)) {
                continue;
            }
            if !is_ambiguous_pattern(&p1.with_extra_mine(r, c)) {
                // shift by one so the surrounding ring stays non-negative
                out.push(Cell::new((r + 1) as usize, (c + 1) as usize));
            }
        }
    }
    out
}

/// One witness cell, in coordinates of P1's frame shifted by one ring
/// (frame cell `(r, c)` is reported as `(r + 1, c + 1)`).
pub fn non_monotone_witness() -> Result<Cell> {
    non_monotone_witnesses().into_iter().next().ok_or(Error::NoWitness)
}
