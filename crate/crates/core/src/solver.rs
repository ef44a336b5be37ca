//! The linear-time player: reveal the corner, flood the zeros, split the
//! rest into islands, and run exact inference on every island that fits in
//! a 100x100 box.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::ambiguity::{classify_region, DEFAULT_NODE_BUDGET};
use crate::error::Error;
use crate::grid::{grid_distance, Cell, CellValue, FloodOrder, GridState, MineAssignment};
use crate::random_gen::TrialRng;

/// Largest island bounding box (per side) handed to inference.
pub const MAX_ISLAND_SIDE: usize = 100;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Verdict {
    Solved,
    HitMine,
    GaveUpOversized,
    GaveUpAmbiguous,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Solved => "Solved",
            Verdict::HitMine => "HitMine",
            Verdict::GaveUpOversized => "GaveUpOversized",
            Verdict::GaveUpAmbiguous => "GaveUpAmbiguous",
        }
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// An 8-connected component of cells that are not revealed zeros.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Island {
    /// Row-major order.
    pub cells: Vec<Cell>,
    pub top_left: Cell,
    /// `(rows, cols)` of the bounding box anchored at `top_left`.
    pub bounding_box: (usize, usize),
    /// Filled in when the ground truth is known.
    pub mines_inside: Option<usize>,
    /// Hidden cells next to a revealed clue.
    pub frontier: Vec<Cell>,
}

impl Island {
    pub fn fits(&self, side: usize) -> bool {
        self.bounding_box.0 <= side && self.bounding_box.1 <= side
    }

    pub fn count_mines(&mut self, m: &MineAssignment) -> usize {
        let k = self.cells.iter().filter(|&&c| m.is_mine(c)).count();
        self.mines_inside = Some(k);
        k
    }
}

/// Per-island record kept in a [`PlayOutcome`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IslandSummary {
    pub top_left: Cell,
    pub bounding_box: (usize, usize),
    pub size: usize,
    pub mines_inside: usize,
    pub frontier: usize,
    pub verdict: Verdict,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlayOutcome {
    pub verdict: Verdict,
    /// Cells turned from hidden to revealed, flood reveals included.
    pub reveals: usize,
    pub islands: Vec<IslandSummary>,
    pub guess_count: usize,
    /// Flood worklist pops plus one pass over the grid for labeling.
    pub cell_touches: usize,
    /// Island cells visited by labeling and by each inference round.
    pub island_work: usize,
    pub trace: Option<Vec<String>>,
}

impl PlayOutcome {
    pub fn trace_text(&self) -> String {
        let mut out = String::new();
        for line in self.trace.iter().flatten() {
            out.push_str(line);
            out.push('\n');
        }
        out
    }
}

/// Order in which islands are handed to inference. The verdict of the
/// inference-only player does not depend on it.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum IslandOrder {
    #[default]
    Sorted,
    Reversed,
    Shuffled(u64),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct PlayOptions {
    pub trace: bool,
    pub island_order: IslandOrder,
}

/// Mines of one island with edges between mines at distance at most 3.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AdjacencyGraph {
    pub vertices: Vec<Cell>,
    pub edges: Vec<(usize, usize)>,
}

impl AdjacencyGraph {
    pub fn is_connected(&self) -> bool {
        let n = self.vertices.len();
        if n <= 1 {
            return true;
        }
        let mut adj = vec![Vec::new(); n];
        for &(a, b) in &self.edges {
            adj[a].push(b);
            adj[b].push(a);
        }
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        let mut reached = 1;
        while let Some(v) = stack.pop() {
            for &w in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    reached += 1;
                    stack.push(w);
                }
            }
        }
        reached == n
    }
}

fn value_text(v: CellValue) -> String {
    match v {
        CellValue::Clue(k) => k.to_string(),
        CellValue::ShownMine => "mine".into(),
        CellValue::Flag => "flag".into(),
        CellValue::Hidden => "hidden".into(),
    }
}

/// Islands of a state: components of cells whose value is not `Clue(0)`,
/// sorted by top-left cell.
pub fn decompose_islands(s: &GridState) -> Vec<Island> {
    decompose_counted(s).0
}

fn decompose_counted(s: &GridState) -> (Vec<Island>, usize) {
    let dims = s.dims();
    let n = dims.n();
    let mut seen = vec![false; n];
    let mut islands = Vec::new();
    let mut work = 0;
    let mut stack: Vec<usize> = Vec::new();
    for start in 0..n {
        if seen[start] || s.get_idx(start) == CellValue::Clue(0) {
            continue;
        }
        seen[start] = true;
        stack.push(start);
        let mut members = Vec::new();
        while let Some(i) = stack.pop() {
            members.push(i);
            for x in dims.neighborhood(dims.cell(i)) {
                work += 1;
                let j = dims.index(x);
                if !seen[j] && s.get_idx(j) != CellValue::Clue(0) {
                    seen[j] = true;
                    stack.push(j);
                }
            }
        }
        members.sort_unstable();
        let cells: Vec<Cell> = members.iter().map(|&i| dims.cell(i)).collect();
        let (mut r0, mut r1, mut c0, mut c1) = (usize::MAX, 0, usize::MAX, 0);
        for c in &cells {
            r0 = r0.min(c.row);
            r1 = r1.max(c.row);
            c0 = c0.min(c.col);
            c1 = c1.max(c.col);
        }
        let frontier = cells
            .iter()
            .copied()
            .filter(|&c| {
                s.get(c).is_hidden() && dims.neighborhood(c).any(|x| s.get(x).clue().is_some())
            })
            .collect();
        islands.push(Island {
            cells,
            top_left: Cell::new(r0, c0),
            bounding_box: (r1 - r0 + 1, c1 - c0 + 1),
            mines_inside: None,
            frontier,
        });
    }
    islands.sort_by_key(|i| (i.top_left, i.cells[0]));
    (islands, work)
}

/// Graph over the island's mines joining pairs at distance at most 3.
pub fn island_adjacency_graph(island: &Island, m: &MineAssignment) -> AdjacencyGraph {
    let vertices: Vec<Cell> = island.cells.iter().copied().filter(|&c| m.is_mine(c)).collect();
    let mut edges = Vec::new();
    for a in 0..vertices.len() {
        for b in a + 1..vertices.len() {
            if grid_distance(vertices[a], vertices[b]) <= 3 {
                edges.push((a, b));
            }
        }
    }
    AdjacencyGraph { vertices, edges }
}

/// The state with every non-mine cell revealed and every mine hidden.
pub fn clue_map(m: &MineAssignment) -> GridState {
    let dims = m.dims();
    let values = (0..dims.n())
        .map(|i| {
            if m.is_mine_idx(i) {
                CellValue::Hidden
            } else {
                CellValue::Clue(m.clue_value(dims.cell(i)))
            }
        })
        .collect();
    GridState::from_values(dims, values).expect("dimensions agree")
}

pub fn play(m: &MineAssignment) -> PlayOutcome {
    play_with_options(m, PlayOptions::default(), None::<&mut TrialRng>)
}

/// Like [`play`], but an island stuck with two-way cells gets one of them
/// revealed uniformly at random, and solving continues.
pub fn play_with_guessing<R: Rng + ?Sized>(m: &MineAssignment, rng: &mut R) -> PlayOutcome {
    play_with_options(m, PlayOptions::default(), Some(rng))
}

struct Player<'a> {
    m: &'a MineAssignment,
    s: GridState,
    reveals: usize,
    cell_touches: usize,
    island_work: usize,
    guess_count: usize,
    trace: Option<Vec<String>>,
}

impl Player<'_> {
    fn log(&mut self, line: impl FnOnce() -> String) {
        if let Some(t) = self.trace.as_mut() {
            t.push(line());
        }
    }

    /// Reveals `c` with the zero flood; returns whether it was a mine.
    fn open(&mut self, c: Cell) -> bool {
        let stats = self
            .s
            .flood_from(self.m, c, FloodOrder::Stack)
            .expect("cell is hidden and in bounds");
        self.reveals += stats.revealed;
        self.cell_touches += stats.touches;
        let v = self.s.get(c);
        self.log(|| format!("REVEAL {} {} -> {}", c.row, c.col, value_text(v)));
        stats.hit_mine
    }

    fn solve_island<R: Rng + ?Sized>(&mut self, island: &Island, rng: &mut Option<&mut R>) -> Verdict {
        if !island.fits(MAX_ISLAND_SIDE) {
            return Verdict::GaveUpOversized;
        }
        let dims = self.s.dims();
        let mut region: Vec<usize> = island.cells.iter().map(|&c| dims.index(c)).collect();
        loop {
            region.retain(|&i| self.s.get_idx(i).is_hidden());
            self.island_work += island.cells.len();
            if region.is_empty() {
                return Verdict::Solved;
            }
            let report = match classify_region(&self.s, &region, DEFAULT_NODE_BUDGET) {
                Ok(r) => r,
                Err(Error::SearchBudget(_)) => return Verdict::GaveUpOversized,
                Err(e) => panic!("inference on a consistent state failed: {e}"),
            };
            if !report.never_mine.is_empty() {
                let mut safe = report.never_mine;
                safe.sort_unstable();
                for c in safe {
                    if self.s.get(c).is_hidden() && self.open(c) {
                        // never_mine is exact, so this means a bug upstream
                        return Verdict::HitMine;
                    }
                }
                continue;
            }
            if report.two_way.is_empty() {
                return Verdict::Solved;
            }
            let Some(rng) = rng.as_deref_mut() else {
                return Verdict::GaveUpAmbiguous;
            };
            let mut options = report.two_way;
            options.sort_unstable();
            let c = options[rng.random_range(0..options.len())];
            self.guess_count += 1;
            self.log(|| format!("GUESS {} {}", c.row, c.col));
            if self.open(c) {
                return Verdict::HitMine;
            }
        }
    }
}

pub fn play_with_options<R: Rng + ?Sized>(
    m: &MineAssignment,
    opts: PlayOptions,
    mut rng: Option<&mut R>,
) -> PlayOutcome {
    let dims = m.dims();
    let mut p = Player {
        m,
        s: GridState::all_hidden(dims),
        reveals: 0,
        cell_touches: 0,
        island_work: 0,
        guess_count: 0,
        trace: opts.trace.then(Vec::new),
    };
    let finish = |p: Player<'_>, verdict: Verdict, islands: Vec<IslandSummary>| {
        let mut trace = p.trace;
        if let Some(t) = trace.as_mut() {
            t.push(format!("VERDICT {verdict}"));
        }
        PlayOutcome {
            verdict,
            reveals: p.reveals,
            islands,
            guess_count: p.guess_count,
            cell_touches: p.cell_touches,
            island_work: p.island_work,
            trace,
        }
    };

    if p.open(Cell::new(0, 0)) {
        return finish(p, Verdict::HitMine, Vec::new());
    }
    let (mut islands, label_work) = decompose_counted(&p.s);
    p.cell_touches += dims.n();
    p.island_work += label_work;
    for island in &mut islands {
        island.count_mines(m);
    }

    let mut order: Vec<usize> = (0..islands.len()).collect();
    match opts.island_order {
        IslandOrder::Sorted => {}
        IslandOrder::Reversed => order.reverse(),
        IslandOrder::Shuffled(seed) => order.shuffle(&mut TrialRng::seed_from_u64(seed)),
    }

    let mut verdicts = vec![None; islands.len()];
    let mut hit = false;
    for &k in &order {
        let v = p.solve_island(&islands[k], &mut rng);
        verdicts[k] = Some(v);
        if v == Verdict::HitMine {
            hit = true;
            break;
        }
    }
    let summaries: Vec<IslandSummary> = islands
        .iter()
        .zip(&verdicts)
        .filter_map(|(i, v)| {
            v.map(|verdict| IslandSummary {
                top_left: i.top_left,
                bounding_box: i.bounding_box,
                size: i.cells.len(),
                mines_inside: i.mines_inside.unwrap_or(0),
                frontier: i.frontier.len(),
                verdict,
            })
        })
        .collect();
    let has = |x: Verdict| verdicts.iter().any(|v| *v == Some(x));
    let verdict = if hit {
        Verdict::HitMine
    } else if has(Verdict::GaveUpOversized) {
        Verdict::GaveUpOversized
    } else if has(Verdict::GaveUpAmbiguous) {
        Verdict::GaveUpAmbiguous
    } else {
        debug_assert!(crate::grid::is_solved(m, &p.s).unwrap());
        Verdict::Solved
    };
    finish(p, verdict, summaries)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridDims;
    use crate::patterns::{canonical_p1_p2, plant, Pattern};
    use crate::random_gen::{sample_iid, Seed};

    fn board(rows: usize, cols: usize, mines: &[(usize, usize)]) -> MineAssignment {
        MineAssignment::from_cells(GridDims::new(rows, cols).unwrap(), mines.iter().copied()).unwrap()
    }

    #[test]
    fn empty_board_is_solved_by_the_flood() {
        let m = board(20, 30, &[]);
        let out = play(&m);
        assert_eq!(out.verdict, Verdict::Solved);
        assert_eq!(out.reveals, 600);
        assert!(out.islands.is_empty());
        assert_eq!(out.guess_count, 0);
    }

    #[test]
    fn corner_mine_loses_immediately() {
        let m = board(10, 10, &[(0, 0), (5, 5)]);
        let out = play(&m);
        assert_eq!(out.verdict, Verdict::HitMine);
        assert_eq!(out.reveals, 1);
    }

    #[test]
    fn planted_p1_is_ambiguous() {
        let canon = canonical_p1_p2();
        for p in [&canon.p1, &canon.p2] {
            let mut m = MineAssignment::empty(GridDims::square(64).unwrap());
            plant(&mut m, p, Cell::new(28, 28)).unwrap();
            let out = play(&m);
            assert_eq!(out.verdict, Verdict::GaveUpAmbiguous);
            assert_eq!(out.islands.len(), 1);
            assert_eq!(out.islands[0].mines_inside, 6);
        }
    }

    #[test]
    fn single_interior_mine_gives_nine_cell_island() {
        let m = board(20, 20, &[(10, 10)]);
        let mut s = GridState::all_hidden(m.dims());
        s.flood_from(&m, Cell::new(0, 0), FloodOrder::Stack).unwrap();
        let islands = decompose_islands(&s);
        assert_eq!(islands.len(), 1);
        assert_eq!(islands[0].cells.len(), 9);
        assert_eq!(islands[0].top_left, Cell::new(9, 9));
        assert_eq!(islands[0].bounding_box, (3, 3));
        assert_eq!(islands[0].frontier, vec![Cell::new(10, 10)]);
        let g = island_adjacency_graph(&islands[0], &m);
        assert_eq!(g.vertices, vec![Cell::new(10, 10)]);
        assert!(g.is_connected());
        assert_eq!(play(&m).verdict, Verdict::Solved);
    }

    #[test]
    fn separated_mines_give_separate_islands() {
        let m = board(80, 80, &[(10, 10), (10, 60)]);
        let islands = decompose_islands(&clue_map(&m));
        assert_eq!(islands.len(), 2);
        assert!(islands[0].top_left < islands[1].top_left);
        assert!(decompose_islands(&clue_map(&board(8, 8, &[]))).is_empty());
    }

    #[test]
    fn adjacency_edges_at_distance_three() {
        let m = board(20, 20, &[(8, 8), (8, 11)]);
        let islands = decompose_islands(&clue_map(&m));
        assert_eq!(islands.len(), 1);
        let g = island_adjacency_graph(&islands[0], &m);
        assert_eq!(g.vertices.len(), 2);
        assert_eq!(g.edges, vec![(0, 1)]);
        assert!(g.is_connected());
    }

    #[test]
    fn corner_clue_makes_one_oversized_island() {
        let m = board(200, 200, &[(1, 1), (100, 100)]);
        let out = play(&m);
        assert_eq!(out.verdict, Verdict::GaveUpOversized);
        assert_eq!(out.islands.len(), 1);
        assert_eq!(out.islands[0].size, 200 * 200);
    }

    #[test]
    fn clue_corner_on_small_board_leaves_unconstrained_cells() {
        // only the corner clue is visible, so most hidden cells are free
        let m = board(10, 10, &[(1, 1)]);
        let out = play(&m);
        assert_eq!(out.verdict, Verdict::GaveUpAmbiguous);
        assert_eq!(out.reveals, 1);
    }

    #[test]
    fn trace_lines() {
        let m = board(12, 12, &[(6, 6), (6, 7)]);
        let out = play_with_options(&m, PlayOptions { trace: true, ..Default::default() }, None::<&mut TrialRng>);
        let t = out.trace.as_ref().unwrap();
        assert_eq!(t[0], "REVEAL 0 0 -> 0");
        assert_eq!(t.last().unwrap(), &format!("VERDICT {}", out.verdict));
        assert!(play(&m).trace.is_none());
    }

    #[test]
    fn guessing_matches_plain_play_without_ambiguity() {
        for seed in 0..20 {
            let m = sample_iid(GridDims::square(64).unwrap(), 0.02, &mut Seed(seed).stream(0)).unwrap();
            let a = play(&m);
            let b = play_with_guessing(&m, &mut Seed(seed).stream(1));
            if a.verdict != Verdict::GaveUpAmbiguous {
                assert_eq!(a, b);
                assert_eq!(b.guess_count, 0);
            }
        }
    }

    #[test]
    fn guessing_on_a_coin_flip_island() {
        let canon = canonical_p1_p2();
        let mut wins = 0;
        let trials = 2000;
        for i in 0..trials {
            let mut rng = Seed(5).stream(i);
            let p = if rng.random::<bool>() { &canon.p1 } else { &canon.p2 };
            let mut m = MineAssignment::empty(GridDims::square(40).unwrap());
            plant(&mut m, p, Cell::new(16, 16)).unwrap();
            let out = play_with_guessing(&m, &mut rng);
            assert!(out.guess_count >= 1);
            if out.verdict == Verdict::Solved {
                wins += 1;
            }
        }
        let rate = wins as f64 / trials as f64;
        assert!((rate - 0.5).abs() < 0.05, "rate {rate}");
    }

    #[test]
    fn inference_never_hits_a_mine_and_verdicts_are_sound() {
        let mut count = [0usize; 4];
        for seed in 0..200 {
            let p = [0.01, 0.05, 0.1, 0.15][seed as usize % 4];
            let m = sample_iid(GridDims::square(48).unwrap(), p, &mut Seed(seed).stream(0)).unwrap();
            let out = play(&m);
            if out.verdict == Verdict::HitMine {
                assert!(m.is_mine(Cell::new(0, 0)), "inference revealed a mine");
                assert_eq!(out.reveals, 1);
            }
            count[out.verdict as usize] += 1;
        }
        assert!(count[Verdict::Solved as usize] > 0);
    }

    #[test]
    fn solved_verdict_implies_solved_state() {
        // replay the safe reveals by hand: every non-mine cell must be reachable
        for seed in 0..30 {
            let m = sample_iid(GridDims::square(32).unwrap(), 0.04, &mut Seed(seed).stream(0)).unwrap();
            let out = play(&m);
            if out.verdict == Verdict::Solved {
                assert_eq!(out.reveals, m.dims().n() - m.count());
            }
        }
    }

    #[test]
    fn island_order_does_not_change_the_verdict() {
        let canon = canonical_p1_p2();
        for seed in 0..40 {
            let d = GridDims::square(96).unwrap();
            let mut m = sample_iid(d, 0.015, &mut Seed(seed).stream(0)).unwrap();
            m.remove_mine(Cell::new(0, 0)).unwrap();
            if seed % 3 == 0 {
                plant(&mut m, &canon.p1, Cell::new(40, 40)).unwrap();
            }
            let base = play(&m);
            for order in [IslandOrder::Reversed, IslandOrder::Shuffled(seed), IslandOrder::Shuffled(seed + 99)] {
                let out = play_with_options(&m, PlayOptions { trace: false, island_order: order }, None::<&mut TrialRng>);
                assert_eq!(out.verdict, base.verdict);
                assert_eq!(out.reveals, base.reveals);
                assert_eq!(out.islands, base.islands);
            }
        }
    }

    #[test]
    fn planted_non_ambiguous_clusters_are_solved() {
        let shapes: Vec<Pattern> = vec![
            Pattern::from_offsets(&[(0, 0)]).unwrap(),
            Pattern::from_offsets(&[(0, 0), (0, 1), (1, 1)]).unwrap(),
            Pattern::from_offsets(&[(0, 0), (2, 2), (0, 3), (3, 0)]).unwrap(),
            Pattern::from_offsets(&[(0, 0), (1, 0), (2, 0), (3, 0), (4, 0)]).unwrap(),
        ];
        let mut m = MineAssignment::empty(GridDims::square(120).unwrap());
        for (k, p) in shapes.iter().enumerate() {
            plant(&mut m, p, Cell::new(10 + 25 * k, 10 + 20 * k)).unwrap();
        }
        let out = play(&m);
        assert_eq!(out.islands.len(), shapes.len());
        assert_eq!(out.verdict, Verdict::Solved);
    }

    #[test]
    fn flood_touches_stay_within_nine_n() {
        let d = GridDims::square(256).unwrap();
        let m = sample_iid(d, 0.005, &mut Seed(1).stream(0)).unwrap();
        let out = play(&m);
        assert!(out.cell_touches <= 9 * d.n(), "{}", out.cell_touches);
        let out = play(&MineAssignment::empty(d));
        assert!(out.cell_touches <= 9 * d.n());
    }

    #[test]
    fn islands_of_the_clue_map_have_connected_graphs() {
        for seed in 0..10 {
            let m = sample_iid(GridDims::square(200).unwrap(), 0.03, &mut Seed(seed).stream(0)).unwrap();
            for island in decompose_islands(&clue_map(&m)) {
                assert!(island_adjacency_graph(&island, &m).is_connected());
            }
        }
    }
}
