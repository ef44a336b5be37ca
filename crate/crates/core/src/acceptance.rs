//! End-to-end acceptance checks, shared by `mines-phase verify` and the
//! `acceptance` test target. Every check uses fixed seeds.

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use serde::Serialize;

use crate::ambiguity::{classify_hidden, enumerate_ambiguous, non_monotone_witnesses};
use crate::experiments::{
    domino_patterns, planted_schedule, run_criticality, run_hitting_time_planted, run_lemma4,
    run_occurrence_stats, run_sweep, SolverMode, SweepConfig,
};
use crate::grid::{Cell, CellValue, FloodOrder, GridDims, GridState, MineAssignment};
use crate::patterns::{canonical_p1_p2, occurrences, Pattern};
use crate::random_gen::{sample_iid, window_mine_max, ProcessState, Seed, TrialRng};
use crate::solver::{clue_map, decompose_islands, island_adjacency_graph, play, Island, Verdict, MAX_ISLAND_SIDE};

/// Checks that cannot pass as stated; see the README for the analysis.
pub const KNOWN_UNATTAINABLE: &[u8] = &[6, 7, 9];

#[derive(Clone, Debug, Serialize)]
pub struct CriterionResult {
    pub id: u8,
    pub title: &'static str,
    pub passed: bool,
    pub detail: String,
    #[serde(skip)]
    pub elapsed: Duration,
}

impl CriterionResult {
    pub fn line(&self) -> String {
        format!(
            "{} [{}] {}: {} ({:.1}s)",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.title,
            self.detail,
            self.elapsed.as_secs_f64()
        )
    }
}

pub const TITLES: [&str; 10] = [
    "ambiguous pattern enumeration",
    "non-monotone single-mine witness",
    "coin-flip success rates",
    "oracle equivalence",
    "exact expectation of domino counts",
    "solving below criticality",
    "linear-time play",
    "incremental process statistics",
    "island structure",
    "degenerate rates and reproducibility",
];

pub fn run(id: u8) -> CriterionResult {
    let start = Instant::now();
    let (passed, detail) = match id {
        1 => enumeration(),
        2 => non_monotone(),
        3 => coin_flips(),
        4 => oracles(),
        5 => domino_expectation(),
        6 => below_criticality(),
        7 => linear_time(),
        8 => process_statistics(),
        9 => island_structure(),
        10 => degenerate_and_reproducible(),
        _ => (false, format!("no criterion {id}")),
    };
    CriterionResult {
        id,
        title: TITLES.get(id as usize - 1).copied().unwrap_or("unknown"),
        passed,
        detail,
        elapsed: start.elapsed(),
    }
}

pub fn run_all() -> Vec<CriterionResult> {
    (1..=10).map(run).collect()
}

fn enumeration() -> (bool, String) {
    let canon = canonical_p1_p2();
    let six = match enumerate_ambiguous(6) {
        Ok(v) => v,
        Err(e) => return (false, e.to_string()),
    };
    let five = enumerate_ambiguous(5).map(|v| v.len()).unwrap_or(usize::MAX);
    let got: BTreeSet<Pattern> = six.iter().cloned().collect();
    let want: BTreeSet<Pattern> = [canon.p1, canon.p2].into_iter().collect();
    (
        got == want && six.len() == 2 && five == 0,
        format!("max_mines=6 count={} (P1 and P2: {}), max_mines=5 count={five}", six.len(), got == want),
    )
}

fn non_monotone() -> (bool, String) {
    let start = Instant::now();
    let w = non_monotone_witnesses();
    let t = start.elapsed();
    (
        !w.is_empty() && t < Duration::from_secs(60),
        format!("{} witnesses {:?} in {:.2}s", w.len(), w.iter().map(|c| (c.row, c.col)).collect::<Vec<_>>(), t.as_secs_f64()),
    )
}

fn coin_flips() -> (bool, String) {
    let bands = [(1, 0.50, 0.02), (2, 0.25, 0.015), (3, 0.125, 0.012), (4, 0.0625, 0.01)];
    let mut ok = true;
    let mut parts = Vec::new();
    let mut last = 1.0;
    for (k, want, tol) in bands {
        match run_lemma4(k, 10_000, Seed(0x4C34 + k as u64)) {
            Ok(r) => {
                ok &= (r.success_rate - want).abs() <= tol && r.success_rate <= last + 0.02;
                last = r.success_rate;
                parts.push(format!("k={k}: {:.4}", r.success_rate));
            }
            Err(e) => {
                ok = false;
                parts.push(format!("k={k}: {e}"));
            }
        }
    }
    (ok, parts.join(", "))
}

/// Every hidden cell's status over all 2^h fillings of the hidden cells.
fn naive_classify(s: &GridState) -> Option<(Vec<Cell>, Vec<Cell>, Vec<Cell>)> {
    let d = s.dims();
    let hidden: Vec<Cell> = s.hidden_cells().collect();
    let h = hidden.len();
    let clues: Vec<(Cell, u8)> = d.cells().filter_map(|c| s.get(c).clue().map(|k| (c, k))).collect();
    let mut count = 0u64;
    let mut hits = vec![0u64; h];
    let mut m = MineAssignment::empty(d);
    for c in d.cells() {
        if s.get(c) == CellValue::Flag {
            m.add_mine(c).unwrap();
        }
    }
    for mask in 0u64..(1 << h) {
        for (k, &c) in hidden.iter().enumerate() {
            if mask >> k & 1 == 1 {
                m.add_mine(c).unwrap();
            } else {
                m.remove_mine(c).unwrap();
            }
        }
        if clues.iter().all(|&(c, k)| m.clue_value(c) == k) {
            count += 1;
            for (k, hit) in hits.iter_mut().enumerate() {
                *hit += mask >> k & 1;
            }
        }
    }
    if count == 0 {
        return None;
    }
    let (mut a, mut n, mut t) = (vec![], vec![], vec![]);
    for k in 0..h {
        match hits[k] {
            0 => n.push(hidden[k]),
            x if x == count => a.push(hidden[k]),
            _ => t.push(hidden[k]),
        }
    }
    Some((a, n, t))
}

/// A state consistent with a random board, with at most `max_hidden` hidden
/// cells and some mines flagged.
fn random_state(rng: &mut TrialRng, max_hidden: usize) -> GridState {
    let d = GridDims::new(rng.random_range(3..=7), rng.random_range(3..=7)).unwrap();
    let p = rng.random_range(0.05..0.4);
    let m = sample_iid(d, p, rng).unwrap();
    let mut s = GridState::all_hidden(d);
    let mut hidden = d.n();
    let mut order: Vec<Cell> = d.cells().collect();
    for i in (1..order.len()).rev() {
        order.swap(i, rng.random_range(0..=i));
    }
    let target = rng.random_range(0..=max_hidden.min(d.n()));
    for c in order {
        if hidden <= target {
            break;
        }
        if m.is_mine(c) {
            if rng.random_bool(0.5) {
                s.flag(c).unwrap();
                hidden -= 1;
            }
        } else {
            s.reveal_cell(&m, c).unwrap();
            hidden -= 1;
        }
    }
    // mines left hidden may push the count above the target
    while s.count_hidden() > max_hidden {
        let c = s.hidden_cells().next().unwrap();
        if m.is_mine(c) {
            s.flag(c).unwrap();
        } else {
            s.reveal_cell(&m, c).unwrap();
        }
    }
    s
}

fn naive_occurrences(m: &MineAssignment, p: &Pattern) -> Vec<Cell> {
    let d = m.dims();
    let f = p.frame();
    let mut out = Vec::new();
    if f.rows > d.rows || f.cols > d.cols {
        return out;
    }
    for r in 0..=d.rows - f.rows {
        for c in 0..=d.cols - f.cols {
            let hit = (0..f.rows).all(|i| {
                (0..f.cols).all(|j| m.is_mine(Cell::new(r + i, c + j)) == p.is_mine(Cell::new(i, j)))
            });
            if hit {
                out.push(Cell::new(r, c));
            }
        }
    }
    out
}

fn naive_window_max(m: &MineAssignment, w: usize) -> usize {
    let d = m.dims();
    let mut best = 0;
    for r in 0..=d.rows - w {
        for c in 0..=d.cols - w {
            let mut k = 0;
            for i in r..r + w {
                for j in c..c + w {
                    k += m.is_mine(Cell::new(i, j)) as usize;
                }
            }
            best = best.max(k);
        }
    }
    best
}

fn oracles() -> (bool, String) {
    let mut rng = TrialRng::seed_from_u64(0x0AC1E);
    let mut state_mismatch = 0;
    for _ in 0..1000 {
        let s = random_state(&mut rng, 16);
        let fast = classify_hidden(&s).ok().map(|r| {
            let mut v = (r.always_mine, r.never_mine, r.two_way);
            v.0.sort_unstable();
            v.1.sort_unstable();
            v.2.sort_unstable();
            v
        });
        if fast != naive_classify(&s) {
            state_mismatch += 1;
        }
    }

    let canon = canonical_p1_p2();
    let (v, h) = domino_patterns();
    let scan_patterns = [canon.p1.clone(), canon.p2.clone(), v, h, Pattern::from_offsets(&[(0, 0), (1, 2), (2, 1)]).unwrap()];
    let mut scan_mismatch = 0;
    let mut planted = 0;
    for b in 0..100u64 {
        let d = GridDims::square(64).unwrap();
        let mut m = sample_iid(d, [0.02, 0.05, 0.1, 0.2][b as usize % 4], &mut Seed(0x5CA).stream(b)).unwrap();
        if b % 2 == 0 {
            let anchor = Cell::new(rng.random_range(0..56), rng.random_range(0..56));
            crate::patterns::plant(&mut m, if b % 4 == 0 { &canon.p1 } else { &canon.p2 }, anchor).unwrap();
            planted += 1;
        }
        for p in &scan_patterns {
            if occurrences(&m, p) != naive_occurrences(&m, p) {
                scan_mismatch += 1;
            }
        }
    }

    let mut window_mismatch = 0;
    for b in 0..10u64 {
        let d = GridDims::new(200 + 7 * b as usize, 230 - 5 * b as usize).unwrap();
        let m = sample_iid(d, 0.01 + 0.01 * b as f64, &mut Seed(0x3D).stream(b)).unwrap();
        let w = if b % 2 == 0 { 100 } else { 23 + b as usize };
        if window_mine_max(&m, w).ok() != Some(naive_window_max(&m, w)) {
            window_mismatch += 1;
        }
    }
    (
        state_mismatch + scan_mismatch + window_mismatch == 0,
        format!(
            "classify mismatches {state_mismatch}/1000, scan mismatches {scan_mismatch}/{} ({planted} boards planted), window mismatches {window_mismatch}/10",
            100 * scan_patterns.len()
        ),
    )
}

fn domino_expectation() -> (bool, String) {
    let (v, _) = domino_patterns();
    let d = GridDims::square(256).unwrap();
    match run_occurrence_stats(d, 0.05, &[v], 2000, Seed(0xD0)) {
        Ok(r) => {
            let s = &r.stats[0];
            let disp = s.dispersion.unwrap_or(f64::NAN);
            (
                s.within_std_errors(3.0) && (0.9..=1.1).contains(&disp),
                format!(
                    "mean {:.3} vs exact {:.3} (z = {:.2}), dispersion {:.3}",
                    s.empirical_mean,
                    s.exact_mean,
                    s.z_score.unwrap_or(0.0),
                    disp
                ),
            )
        }
        Err(e) => (false, e.to_string()),
    }
}

fn below_criticality() -> (bool, String) {
    let cfg = SweepConfig {
        dims: GridDims::square(512).unwrap(),
        p_values: vec![0.01],
        trials: 300,
        seed: Seed(0x512),
        solver_mode: SolverMode::Inference,
    };
    let r = match run_sweep(&cfg) {
        Ok(r) => r,
        Err(e) => return (false, e.to_string()),
    };
    let count = |v: Verdict| r.records.iter().filter(|t| t.verdict == v).count();
    let stray_hits = r.records.iter().filter(|t| t.verdict == Verdict::HitMine && !t.corner_mine).count();
    let rate = r.rows[0].solve_rate;
    let oversized = count(Verdict::GaveUpOversized);
    (
        rate >= 0.97 && oversized == 0 && stray_hits == 0,
        format!(
            "solve rate {rate:.4}; Solved {}, HitMine {} (off-corner {stray_hits}), GaveUpOversized {oversized}, GaveUpAmbiguous {}",
            count(Verdict::Solved),
            count(Verdict::HitMine),
            count(Verdict::GaveUpAmbiguous)
        ),
    )
}

fn linear_time() -> (bool, String) {
    let sides = [256usize, 512, 1024];
    let boards = 6;
    let mut times = Vec::new();
    let mut touches_ok = true;
    for (i, &side) in sides.iter().enumerate() {
        let d = GridDims::square(side).unwrap();
        let mut best = Duration::MAX;
        for b in 0..boards {
            let mut m = sample_iid(d, 0.005, &mut Seed(0x71).stream((i * 100 + b) as u64)).unwrap();
            m.remove_mine(Cell::new(0, 0)).unwrap();
            let start = Instant::now();
            let out = play(&m);
            best = best.min(start.elapsed());
            touches_ok &= out.cell_touches <= 9 * d.n();
        }
        times.push(best.as_secs_f64());
    }
    let ratios: Vec<f64> = times.windows(2).map(|w| w[1] / w[0]).collect();
    let per_cell: Vec<f64> = ratios.iter().map(|r| r / 4.0).collect();
    (
        touches_ok && ratios.iter().all(|&r| r <= 2.5),
        format!(
            "play times {:?} ms, growth per 4x cells {:.2?} (per cell {:.2?}), touches within 9n: {touches_ok}",
            times.iter().map(|t| (t * 1e4).round() / 10.0).collect::<Vec<_>>(),
            ratios,
            per_cell
        ),
    )
}

fn process_statistics() -> (bool, String) {
    let canon = canonical_p1_p2();
    let (v, h) = domino_patterns();
    let d = GridDims::square(64).unwrap();
    let tracked = vec![canon.p1.clone(), canon.p2.clone(), v, h];
    let window = 16;
    let mut st = ProcessState::new(d, window, tracked.clone()).unwrap();
    let mut rng = Seed(0x64).stream(0);
    let mut mismatches = 0;
    while st.t() < d.n() / 2 {
        st.step(&mut rng).unwrap();
        for (k, p) in tracked.iter().enumerate() {
            if st.occurrence_counts()[k] != occurrences(st.board(), p).len() {
                mismatches += 1;
            }
        }
        if st.window_max() != window_mine_max(st.board(), window).unwrap() {
            mismatches += 1;
        }
    }

    let mut tau_wrong = 0;
    let mut unsolved = 0;
    for i in 0..100u64 {
        let mut rng = Seed(0x7A0).stream(i);
        let pattern = if rng.random_bool(0.5) { &canon.p1 } else { &canon.p2 };
        let anchor = Cell::new(rng.random_range(6..50), rng.random_range(6..50));
        let completion = rng.random_range(6..=40);
        let total = completion + rng.random_range(0..=10);
        let events = match planted_schedule(d, pattern, anchor, total, completion, &mut rng) {
            Ok(e) => e,
            Err(_) => {
                tau_wrong += 1;
                continue;
            }
        };
        match run_hitting_time_planted(d, &events, completion) {
            Ok(r) => {
                if r.detector_agrees != Some(true) {
                    tau_wrong += 1;
                }
                unsolved += r.samples.iter().filter(|s| s.verdict != Verdict::Solved).count();
            }
            Err(_) => tau_wrong += 1,
        }
    }
    (
        mismatches == 0 && tau_wrong == 0 && unsolved == 0,
        format!(
            "incremental mismatches {mismatches} over {} steps, tau errors {tau_wrong}/100, unsolved samples before tau {unsolved}",
            d.n() / 2
        ),
    )
}

fn island_structure() -> (bool, String) {
    let d = GridDims::square(512).unwrap();
    let mut bad_post_flood = 0;
    let mut bad_boards = 0;
    let mut degenerate_corner = 0;
    let mut bad_clue_map = 0;
    let mut islands_total = 0;
    for b in 0..100u64 {
        let m = sample_iid(d, 0.01, &mut Seed(0x15).stream(b)).unwrap();
        let mut s = GridState::all_hidden(d);
        let first = s.flood_from(&m, Cell::new(0, 0), FloodOrder::Stack).unwrap();
        if first.revealed == 1 {
            degenerate_corner += 1;
        }
        let check = |islands: Vec<Island>| {
            islands
                .iter()
                .filter(|i| !i.fits(MAX_ISLAND_SIDE) || !island_adjacency_graph(i, &m).is_connected())
                .count()
        };
        let islands = decompose_islands(&s);
        islands_total += islands.len();
        let bad = check(islands);
        bad_post_flood += bad;
        bad_boards += (bad > 0) as usize;
        bad_clue_map += check(decompose_islands(&clue_map(&m)));
    }
    (
        bad_post_flood == 0,
        format!(
            "{islands_total} islands after the corner flood, {bad_post_flood} oversized or disconnected on {bad_boards} boards; \
             {degenerate_corner} boards had a nonzero or mined corner; islands of the full clue map failing: {bad_clue_map}"
        ),
    )
}

fn degenerate_and_reproducible() -> (bool, String) {
    let cfg = |p_values: Vec<f64>, side: usize, trials: usize| SweepConfig {
        dims: GridDims::square(side).unwrap(),
        p_values,
        trials,
        seed: Seed(0xDE6),
        solver_mode: SolverMode::Inference,
    };
    let ends = match run_sweep(&cfg(vec![0.0, 1.0], 64, 50)) {
        Ok(r) => r,
        Err(e) => return (false, e.to_string()),
    };
    let ends_ok = ends.rows[0].solve_rate == 1.0 && ends.rows[1].solve_rate == 0.0;

    let outputs = |threads: usize| -> Option<Vec<String>> {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().ok()?;
        pool.install(|| {
            let sweep = run_sweep(&cfg(vec![0.01, 0.05, 0.1], 96, 30)).ok()?;
            let guess = run_sweep(&SweepConfig { solver_mode: SolverMode::Guessing, ..cfg(vec![0.08], 64, 30) }).ok()?;
            let crit = run_criticality(GridDims::square(128).unwrap(), 1.5, 20, Seed(5)).ok()?;
            let coin = run_lemma4(2, 300, Seed(6)).ok()?;
            Some(vec![
                sweep.to_csv(),
                sweep.records_jsonl(),
                guess.records_jsonl(),
                serde_json::to_string(&crit).ok()?,
                serde_json::to_string(&coin).ok()?,
            ])
        })
    };
    let base = outputs(1);
    let same = base.is_some() && [1, 2, 4].iter().all(|&t| outputs(t) == base);
    (
        ends_ok && same,
        format!(
            "p=0 rate {}, p=1 rate {}, outputs identical across 1/2/4 threads and reruns: {same}",
            ends.rows[0].solve_rate, ends.rows[1].solve_rate
        ),
    )
}
