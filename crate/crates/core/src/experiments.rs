//! Monte Carlo drivers: solve-rate sweeps, occurrence statistics, the
//! mine-addition process and the planted coin-flip game.
//!
//! Trials run on the current rayon pool. Each trial draws from its own
//! seeded stream and results are collected in trial order, so output does
//! not depend on the number of threads.

use std::io::Write;
use std::path::Path;
use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Cell, GridDims, MineAssignment};
use crate::patterns::{canonical_p1_p2, expected_occurrences, occurrences, plant, Pattern};
use crate::random_gen::{border_clearance, kappa, sample_iid, window_mine_max, ProcessState, Seed};
use crate::solver::{play, play_with_guessing, Verdict};

pub const FORMAT_HEADER: &str = "; mines-phase v1";
pub const SWEEP_CSV_HEADER: &str = "p,solve_rate,mean_p1,mean_p2,mean_window_max,ci";

/// Side of the square window used for mine-concentration statistics.
pub const WINDOW: usize = 100;

fn window_for(dims: GridDims) -> usize {
    WINDOW.min(dims.rows).min(dims.cols)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum SolverMode {
    #[default]
    Inference,
    Guessing,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub dims: GridDims,
    pub p_values: Vec<f64>,
    pub trials: usize,
    pub seed: Seed,
    pub solver_mode: SolverMode,
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::DimensionMismatch("trials must be at least 1".into()));
        }
        for &p in &self.p_values {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Probability(p));
            }
        }
        if self.p_values.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::DimensionMismatch("p values must be sorted ascending".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: u64,
    /// Seed of this trial's stream.
    pub seed: u64,
    pub p: f64,
    pub verdict: Verdict,
    pub guess_count: usize,
    pub occurrences_p1: usize,
    pub occurrences_p2: usize,
    pub window_max: usize,
    pub border_clearance: Option<usize>,
    pub corner_mine: bool,
    /// Wall time; kept out of serialized output so files stay reproducible.
    #[serde(skip)]
    pub elapsed: std::time::Duration,
}

/// Samples one board and plays it.
pub fn run_trial(dims: GridDims, p: f64, seed: Seed, trial: u64, mode: SolverMode) -> Result<TrialRecord> {
    let start = Instant::now();
    let mut rng = seed.stream(trial);
    let m = sample_iid(dims, p, &mut rng)?;
    let canon = canonical_p1_p2();
    let out = match mode {
        SolverMode::Inference => play(&m),
        SolverMode::Guessing => play_with_guessing(&m, &mut rng),
    };
    Ok(TrialRecord {
        trial,
        seed: seed.trial_seed(trial),
        p,
        verdict: out.verdict,
        guess_count: out.guess_count,
        occurrences_p1: occurrences(&m, &canon.p1).len(),
        occurrences_p2: occurrences(&m, &canon.p2).len(),
        window_max: window_mine_max(&m, window_for(dims))?,
        border_clearance: border_clearance(&m),
        corner_mine: m.is_mine(Cell::new(0, 0)),
        elapsed: start.elapsed(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub p: f64,
    pub solve_rate: f64,
    pub mean_p1: f64,
    pub mean_p2: f64,
    pub mean_window_max: f64,
    /// Half-width of the normal-approximation 95% interval for `solve_rate`.
    pub ci: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub config: SweepConfig,
    pub rows: Vec<SweepRow>,
    pub records: Vec<TrialRecord>,
}

fn mean(xs: impl Iterator<Item = f64>) -> f64 {
    let (s, k) = xs.fold((0.0, 0usize), |(s, k), x| (s + x, k + 1));
    if k == 0 {
        0.0
    } else {
        s / k as f64
    }
}

/// Runs `trials` boards for every `p`; trial `j` at the `i`-th probability
/// uses stream `i * trials + j`.
pub fn run_sweep(cfg: &SweepConfig) -> Result<SweepReport> {
    cfg.validate()?;
    let trials = cfg.trials as u64;
    let mut rows = Vec::with_capacity(cfg.p_values.len());
    let mut records = Vec::with_capacity(cfg.p_values.len() * cfg.trials);
    for (i, &p) in cfg.p_values.iter().enumerate() {
        let batch: Vec<TrialRecord> = (0..trials)
            .into_par_iter()
            .map(|j| run_trial(cfg.dims, p, cfg.seed, i as u64 * trials + j, cfg.solver_mode))
            .collect::<Result<_>>()?;
        let rate = batch.iter().filter(|r| r.verdict == Verdict::Solved).count() as f64 / trials as f64;
        rows.push(SweepRow {
            p,
            solve_rate: rate,
            mean_p1: mean(batch.iter().map(|r| r.occurrences_p1 as f64)),
            mean_p2: mean(batch.iter().map(|r| r.occurrences_p2 as f64)),
            mean_window_max: mean(batch.iter().map(|r| r.window_max as f64)),
            ci: 1.96 * (rate * (1.0 - rate) / trials as f64).sqrt(),
        });
        records.extend(batch);
    }
    Ok(SweepReport { config: cfg.clone(), rows, records })
}

impl SweepReport {
    pub fn to_csv(&self) -> String {
        let mut out = format!("{FORMAT_HEADER}\n{SWEEP_CSV_HEADER}\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                r.p, r.solve_rate, r.mean_p1, r.mean_p2, r.mean_window_max, r.ci
            ));
        }
        out
    }

    /// One JSON object per trial.
    pub fn records_jsonl(&self) -> String {
        json_lines(&self.records)
    }

    /// `(x, y, ci)` points of solve rate against `p`.
    pub fn plot_points(&self) -> Vec<(f64, f64, f64)> {
        self.rows.iter().map(|r| (r.p, r.solve_rate, r.ci)).collect()
    }

    pub fn plot_data(&self) -> String {
        let mut out = format!("{FORMAT_HEADER}\n# x y ci\n");
        for (x, y, ci) in self.plot_points() {
            out.push_str(&format!("{x} {y} {ci}\n"));
        }
        out
    }
}

pub fn json_lines<T: Serialize>(items: &[T]) -> String {
    let mut out = format!("{FORMAT_HEADER}\n");
    for it in items {
        out.push_str(&serde_json::to_string(it).expect("records serialize"));
        out.push('\n');
    }
    out
}

/// Count statistics of one pattern against its exact expectation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CountStats {
    pub exact_mean: f64,
    pub empirical_mean: f64,
    pub variance: f64,
    pub std_error: f64,
    /// Variance over mean; absent when the mean is zero.
    pub dispersion: Option<f64>,
    /// Distance of the empirical mean from the exact one in standard errors.
    pub z_score: Option<f64>,
}

impl CountStats {
    fn from_counts(counts: &[f64], exact_mean: f64) -> Self {
        let k = counts.len() as f64;
        let m = mean(counts.iter().copied());
        let variance = if counts.len() > 1 {
            counts.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (k - 1.0)
        } else {
            0.0
        };
        let std_error = (variance / k).sqrt();
        CountStats {
            exact_mean,
            empirical_mean: m,
            variance,
            std_error,
            dispersion: (m > 0.0).then(|| variance / m),
            z_score: (std_error > 0.0).then(|| (m - exact_mean) / std_error),
        }
    }

    pub fn within_std_errors(&self, k: f64) -> bool {
        match self.z_score {
            Some(z) => z.abs() <= k,
            None => self.empirical_mean == self.exact_mean,
        }
    }
}

fn correlation(a: &[f64], b: &[f64]) -> Option<f64> {
    let ma = mean(a.iter().copied());
    let mb = mean(b.iter().copied());
    let mut sab = 0.0;
    let mut saa = 0.0;
    let mut sbb = 0.0;
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    (saa > 0.0 && sbb > 0.0).then(|| sab / (saa * sbb).sqrt())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OccurrenceReport {
    pub dims: GridDims,
    pub p: f64,
    pub trials: usize,
    pub stats: Vec<CountStats>,
    /// Sample correlation of the first two patterns' counts.
    pub correlation: Option<f64>,
}

/// Occurrence counts of each pattern over i.i.d. boards.
pub fn run_occurrence_stats(
    dims: GridDims,
    p: f64,
    patterns: &[Pattern],
    trials: usize,
    seed: Seed,
) -> Result<OccurrenceReport> {
    let per_trial: Vec<Vec<f64>> = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let m = sample_iid(dims, p, &mut seed.stream(t))?;
            Ok(patterns.iter().map(|q| occurrences(&m, q).len() as f64).collect())
        })
        .collect::<Result<_>>()?;
    let column = |k: usize| per_trial.iter().map(|row| row[k]).collect::<Vec<f64>>();
    let stats = patterns
        .iter()
        .enumerate()
        .map(|(k, q)| CountStats::from_counts(&column(k), expected_occurrences(dims, p, q)))
        .collect();
    let correlation = if patterns.len() >= 2 { correlation(&column(0), &column(1)) } else { None };
    Ok(OccurrenceReport { dims, p, trials, stats, correlation })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriticalityReport {
    pub c: f64,
    /// `c * n^(-1/6)`.
    pub p: f64,
    /// The limiting mean of each count.
    pub c6: f64,
    /// P1 and P2 counts.
    pub canonical: OccurrenceReport,
    /// Exact finite-size mean of P1 divided by `c^6`.
    pub finite_size_ratio: Option<f64>,
    /// Set when the exact mean is below 90% of `c^6`.
    pub finite_size_gap: bool,
    /// Vertical and horizontal domino counts at the same density: frequent
    /// enough to show the dispersion and correlation diagnostics.
    pub surrogate: OccurrenceReport,
}

pub fn domino_patterns() -> (Pattern, Pattern) {
    (
        Pattern::from_offsets(&[(0, 0), (1, 0)]).expect("valid"),
        Pattern::from_offsets(&[(0, 0), (0, 1)]).expect("valid"),
    )
}

pub fn run_criticality(dims: GridDims, c: f64, trials: usize, seed: Seed) -> Result<CriticalityReport> {
    if !(c >= 0.0) {
        return Err(Error::Probability(c));
    }
    let p = c * (dims.n() as f64).powf(-1.0 / 6.0);
    if p > 1.0 {
        return Err(Error::Probability(p));
    }
    let canon = canonical_p1_p2();
    let canonical = run_occurrence_stats(dims, p, &[canon.p1.clone(), canon.p2.clone()], trials, seed)?;
    let (v, h) = domino_patterns();
    let surrogate = run_occurrence_stats(dims, p, &[v, h], trials, Seed(seed.0 ^ 0xD0D0))?;
    let c6 = c.powi(6);
    let exact = canonical.stats[0].exact_mean;
    let finite_size_ratio = (c6 > 0.0).then(|| exact / c6);
    Ok(CriticalityReport {
        c,
        p,
        c6,
        canonical,
        finite_size_ratio,
        finite_size_gap: finite_size_ratio.is_some_and(|r| r < 0.9),
        surrogate,
    })
}

/// One sampled time of a process run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProcessSample {
    pub t: usize,
    pub verdict: Verdict,
    pub occurrences: usize,
    pub window_max: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProcessExperimentRecord {
    pub dims: GridDims,
    pub steps: usize,
    pub tau: Option<usize>,
    /// Largest window count seen while no tracked pattern had occurred.
    pub window_max_pre_tau: usize,
    pub kappa: usize,
    pub window_max_at_kappa: Option<usize>,
    /// Solver verdicts at sampled `t < tau`.
    pub samples: Vec<ProcessSample>,
    /// Planted mode: whether the detected `tau` equals the scheduled one.
    pub detector_agrees: Option<bool>,
}

/// Powers of two not exceeding `limit`, starting at 0.
pub fn power_of_two_schedule(limit: usize) -> Vec<usize> {
    let mut out = vec![0];
    let mut t = 1;
    while t <= limit {
        out.push(t);
        t *= 2;
    }
    out
}

fn sample_now(st: &ProcessState) -> ProcessSample {
    ProcessSample {
        t: st.t(),
        verdict: play(st.board()).verdict,
        occurrences: st.total_occurrences(),
        window_max: st.window_max(),
    }
}

/// Drives the process from the empty board for up to `max_steps` steps, or
/// until P1 or P2 first appears, playing the board at each sampled time.
pub fn run_hitting_time(
    dims: GridDims,
    seed: Seed,
    t_samples: &[usize],
    max_steps: usize,
) -> Result<ProcessExperimentRecord> {
    let mut st = ProcessState::with_canonical(dims)?;
    let mut rng = seed.stream(0);
    let max_steps = max_steps.min(dims.n());
    let k = kappa(dims.n());
    let mut samples = Vec::new();
    let mut next = t_samples.iter().copied().filter(|&t| t <= max_steps).peekable();
    let mut pre_tau = 0;
    let mut at_kappa = None;
    loop {
        if st.tau().is_none() {
            pre_tau = st.window_max();
        }
        if st.t() == k {
            at_kappa = Some(st.window_max());
        }
        while next.peek().is_some_and(|&t| t < st.t()) {
            next.next();
        }
        if next.peek() == Some(&st.t()) {
            samples.push(sample_now(&st));
            next.next();
        }
        if st.t() >= max_steps {
            break;
        }
        st.step(&mut rng)?;
        if st.tau().is_some() {
            break;
        }
    }
    Ok(ProcessExperimentRecord {
        dims,
        steps: st.t(),
        tau: st.tau(),
        window_max_pre_tau: pre_tau,
        kappa: k,
        window_max_at_kappa: at_kappa,
        samples,
        detector_agrees: None,
    })
}

/// A schedule of `total` additions whose pattern mines (placed at `anchor`)
/// finish exactly at step `completion`. Other additions are isolated mines
/// kept away from the border, the frame and each other, so no tracked
/// pattern can form earlier.
pub fn planted_schedule<R: Rng + ?Sized>(
    dims: GridDims,
    pattern: &Pattern,
    anchor: Cell,
    total: usize,
    completion: usize,
    rng: &mut R,
) -> Result<Vec<Cell>> {
    let k = pattern.mine_count();
    if completion < k || completion > total {
        return Err(Error::DimensionMismatch(format!(
            "completion step {completion} must lie in {k}..={total}"
        )));
    }
    let f = pattern.frame();
    let mut frame_board = MineAssignment::empty(dims);
    plant(&mut frame_board, pattern, anchor)?;
    let frame_mines: Vec<Cell> = frame_board.mines().collect();
    let in_halo = |c: Cell, gap: usize| {
        c.row + gap >= anchor.row
            && c.row <= anchor.row + f.rows - 1 + gap
            && c.col + gap >= anchor.col
            && c.col <= anchor.col + f.cols - 1 + gap
    };
    let fillers_needed = total - k;
    let mut fillers: Vec<Cell> = Vec::with_capacity(fillers_needed);
    let mut attempts = 0usize;
    let margin = 4;
    if dims.rows <= 2 * margin || dims.cols <= 2 * margin {
        return Err(Error::BoardTooSmall(format!("{}x{} leaves no room for fillers", dims.rows, dims.cols)));
    }
    while fillers.len() < fillers_needed {
        attempts += 1;
        if attempts > 1000 * (fillers_needed + 1) {
            return Err(Error::BoardTooSmall(format!("cannot place {fillers_needed} isolated mines")));
        }
        let c = Cell::new(
            rng.random_range(margin..dims.rows - margin),
            rng.random_range(margin..dims.cols - margin),
        );
        if in_halo(c, 4) || fillers.iter().any(|&x| crate::grid::grid_distance(x, c) < 4) {
            continue;
        }
        fillers.push(c);
    }
    // pattern mines: k-1 of them anywhere before `completion`, the last at it
    let mut slots: Vec<usize> = (0..completion - 1).collect();
    for i in 0..k - 1 {
        let j = rng.random_range(i..slots.len());
        slots.swap(i, j);
    }
    let mut pattern_slots: Vec<usize> = slots[..k - 1].to_vec();
    pattern_slots.push(completion - 1);
    pattern_slots.sort_unstable();
    let mut order = frame_mines;
    for i in (1..order.len()).rev() {
        order.swap(i, rng.random_range(0..=i));
    }
    let mut out = Vec::with_capacity(total);
    let (mut pi, mut fi) = (0, 0);
    for step in 0..total {
        if pi < pattern_slots.len() && pattern_slots[pi] == step {
            out.push(order[pi]);
            pi += 1;
        } else {
            out.push(fillers[fi]);
            fi += 1;
        }
    }
    Ok(out)
}

/// Replays a planted schedule, checks the detected `tau` against
/// `expected_tau` and plays the board at sampled times before it (powers of
/// two and `expected_tau - 1`).
pub fn run_hitting_time_planted(
    dims: GridDims,
    events: &[Cell],
    expected_tau: usize,
) -> Result<ProcessExperimentRecord> {
    let mut st = ProcessState::with_canonical(dims)?;
    let mut schedule = power_of_two_schedule(expected_tau.saturating_sub(1));
    if expected_tau >= 1 && !schedule.contains(&(expected_tau - 1)) {
        schedule.push(expected_tau - 1);
    }
    let k = kappa(dims.n());
    let mut samples = Vec::new();
    let mut pre_tau = 0;
    let mut at_kappa = None;
    let take = |st: &ProcessState, samples: &mut Vec<ProcessSample>| {
        if st.t() < expected_tau && schedule.contains(&st.t()) {
            samples.push(sample_now(st));
        }
    };
    take(&st, &mut samples);
    for &c in events {
        st.add_mine(c)?;
        if st.tau().is_none() {
            pre_tau = st.window_max();
        }
        if st.t() == k {
            at_kappa = Some(st.window_max());
        }
        take(&st, &mut samples);
    }
    Ok(ProcessExperimentRecord {
        dims,
        steps: st.t(),
        tau: st.tau(),
        window_max_pre_tau: pre_tau,
        kappa: k,
        window_max_at_kappa: at_kappa,
        samples,
        detector_agrees: Some(st.tau() == Some(expected_tau)),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonotonicityRecord {
    pub dims: GridDims,
    /// Time at which the planted occurrence is complete.
    pub tau: usize,
    pub horizon: usize,
    /// `(t, occurrence count)` at geometrically spaced times.
    pub samples: Vec<(usize, usize)>,
    /// The planted occurrence survived every step up to the horizon.
    pub persistence: bool,
    pub first_destruction: Option<usize>,
}

/// Plants `pattern` at the center of an empty board, then continues the
/// process until `horizon` total mines, tracking whether the planted
/// occurrence survives.
pub fn run_monotonicity(dims: GridDims, seed: Seed, pattern: &Pattern, horizon: usize) -> Result<MonotonicityRecord> {
    let f = pattern.frame();
    if f.rows > dims.rows || f.cols > dims.cols {
        return Err(Error::BoardTooSmall(format!("{}x{} frame", f.rows, f.cols)));
    }
    let anchor = Cell::new((dims.rows - f.rows) / 2, (dims.cols - f.cols) / 2);
    let mut st = ProcessState::new(dims, f.rows.max(f.cols).min(dims.rows).min(dims.cols), vec![pattern.clone()])?;
    for pm in pattern.mines() {
        st.add_mine(Cell::new(anchor.row + pm.row, anchor.col + pm.col))?;
    }
    let tau = st.t();
    let horizon = horizon.clamp(tau, dims.n());
    let mut rng = seed.stream(0);
    let mut samples = vec![(tau, st.total_occurrences())];
    let mut next_sample = tau.max(1) * 2;
    let mut first_destruction = None;
    while st.t() < horizon {
        st.step(&mut rng)?;
        if first_destruction.is_none() && !pattern.matches_at(st.board(), anchor) {
            first_destruction = Some(st.t());
        }
        if st.t() == next_sample || st.t() == horizon {
            samples.push((st.t(), st.total_occurrences()));
            next_sample *= 2;
        }
    }
    Ok(MonotonicityRecord {
        dims,
        tau,
        horizon,
        samples,
        persistence: first_destruction.is_none(),
        first_destruction,
    })
}

/// Probability that `steps` uniform additions to a board with `empty`
/// empty cells all avoid a fixed set of `protected` empty cells.
pub fn exact_survival(empty: usize, protected: usize, steps: usize) -> f64 {
    if steps > empty {
        return 0.0;
    }
    let mut prob = 1.0;
    for i in 0..steps {
        if empty - i <= protected {
            return 0.0;
        }
        prob *= (empty - protected - i) as f64 / (empty - i) as f64;
    }
    prob
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PersistenceSummary {
    pub trials: usize,
    pub horizon: usize,
    pub survived: usize,
    pub empirical: f64,
    pub exact: f64,
}

/// Repeats [`run_monotonicity`] and compares the survival rate of the
/// planted frame with its closed form.
pub fn run_persistence(dims: GridDims, pattern: &Pattern, horizon: usize, trials: usize, seed: Seed) -> Result<PersistenceSummary> {
    let runs: Vec<MonotonicityRecord> = (0..trials as u64)
        .into_par_iter()
        .map(|t| run_monotonicity(dims, Seed(seed.trial_seed(t)), pattern, horizon))
        .collect::<Result<_>>()?;
    let survived = runs.iter().filter(|r| r.persistence).count();
    let k = pattern.mine_count();
    let protected = pattern.frame().n() - k;
    let horizon = runs.first().map_or(horizon, |r| r.horizon);
    Ok(PersistenceSummary {
        trials,
        horizon,
        survived,
        empirical: survived as f64 / trials.max(1) as f64,
        exact: exact_survival(dims.n() - k, protected, horizon - k),
    })
}

/// Gap between planted frames in the coin-flip layout.
pub const LEMMA4_GAP: usize = 200;
const LEMMA4_MARGIN: usize = 8;

/// Board holding `k` 8x8 frames in a row, 200 columns apart, with an 8-cell
/// empty margin all around.
pub fn lemma4_dims(k: usize) -> GridDims {
    let cols = 2 * LEMMA4_MARGIN + 8 * k + LEMMA4_GAP * k.saturating_sub(1);
    GridDims::new(2 * LEMMA4_MARGIN + 8, cols.max(2 * LEMMA4_MARGIN + 8)).expect("positive")
}

/// Plants P1 or P2 in each of the `choices.len()` slots (`true` picks P1).
pub fn lemma4_board(dims: GridDims, choices: &[bool]) -> Result<MineAssignment> {
    let need = lemma4_dims(choices.len());
    if dims.rows < need.rows || dims.cols < need.cols {
        return Err(Error::BoardTooSmall(format!(
            "{} frames need {}x{}, got {}x{}",
            choices.len(),
            need.rows,
            need.cols,
            dims.rows,
            dims.cols
        )));
    }
    let canon = canonical_p1_p2();
    let mut m = MineAssignment::empty(dims);
    for (i, &first) in choices.iter().enumerate() {
        let anchor = Cell::new(LEMMA4_MARGIN, LEMMA4_MARGIN + i * (8 + LEMMA4_GAP));
        plant(&mut m, if first { &canon.p1 } else { &canon.p2 }, anchor)?;
    }
    Ok(m)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Lemma4Report {
    pub k: usize,
    pub trials: usize,
    pub successes: usize,
    pub success_rate: f64,
    /// `2^-k`.
    pub predicted: f64,
    pub ci: f64,
}

/// Plays the guessing solver on boards with `k` independent coin-flip
/// P1/P2 plantings.
pub fn run_lemma4(k: usize, trials: usize, seed: Seed) -> Result<Lemma4Report> {
    let dims = lemma4_dims(k);
    let wins: Vec<bool> = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let mut rng = seed.stream(t);
            let choices: Vec<bool> = (0..k).map(|_| rng.random::<bool>()).collect();
            let m = lemma4_board(dims, &choices)?;
            Ok(play_with_guessing(&m, &mut rng).verdict == Verdict::Solved)
        })
        .collect::<Result<_>>()?;
    let successes = wins.iter().filter(|&&w| w).count();
    let rate = successes as f64 / trials.max(1) as f64;
    Ok(Lemma4Report {
        k,
        trials,
        successes,
        success_rate: rate,
        predicted: 0.5f64.powi(k as i32),
        ci: 1.96 * (rate * (1.0 - rate) / trials.max(1) as f64).sqrt(),
    })
}

/// Writes `contents` to `path` through a temporary file in the same
/// directory and a rename.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let ctx = || path.display().to_string();
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(ctx(), e))?;
    tmp.write_all(contents).map_err(|e| Error::io(ctx(), e))?;
    tmp.persist(path).map_err(|e| Error::io(ctx(), e.error))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(side: usize, p_values: Vec<f64>, trials: usize) -> SweepConfig {
        SweepConfig {
            dims: GridDims::square(side).unwrap(),
            p_values,
            trials,
            seed: Seed(11),
            solver_mode: SolverMode::Inference,
        }
    }

    #[test]
    fn sweep_endpoints_are_exact() {
        let r = run_sweep(&cfg(32, vec![0.0, 1.0], 20)).unwrap();
        assert_eq!(r.rows[0].solve_rate, 1.0);
        assert_eq!(r.rows[1].solve_rate, 0.0);
        assert_eq!(r.rows[0].ci, 0.0);
        let csv = r.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some(FORMAT_HEADER));
        assert_eq!(lines.next(), Some(SWEEP_CSV_HEADER));
        assert!(lines.next().unwrap().starts_with("0,1,0,0,0,0"));
    }

    #[test]
    fn sweep_rejects_bad_configs() {
        assert!(run_sweep(&cfg(16, vec![0.2, 0.1], 5)).is_err());
        assert!(run_sweep(&cfg(16, vec![0.1], 0)).is_err());
        assert!(run_sweep(&cfg(16, vec![1.1], 1)).is_err());
    }

    #[test]
    fn sweep_is_independent_of_thread_count() {
        let c = cfg(48, vec![0.02, 0.08], 24);
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap().install(|| run_sweep(&c)).unwrap();
        let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap().install(|| run_sweep(&c)).unwrap();
        assert_eq!(one.to_csv(), four.to_csv());
        assert_eq!(one.records_jsonl(), four.records_jsonl());
        let points = one.plot_points();
        for (row, pt) in one.rows.iter().zip(points) {
            assert_eq!((row.p, row.solve_rate, row.ci), pt);
        }
    }

    #[test]
    fn criticality_reports_the_finite_size_gap() {
        let d = GridDims::square(1024).unwrap();
        let canon = canonical_p1_p2();
        let p = 2f64.powf(-10.0 / 3.0);
        let want = 1017.0 * 1017.0 * p.powi(6) * (1.0 - p).powi(58);
        assert!((expected_occurrences(d, p, &canon.p1) - want).abs() < 1e-12 * want.max(1.0));
        let small = GridDims::square(128).unwrap();
        let r = run_criticality(small, 1.0, 4, Seed(1)).unwrap();
        assert_eq!(r.c6, 1.0);
        assert!(r.finite_size_gap);
        let zero = run_criticality(small, 0.0, 3, Seed(1)).unwrap();
        assert_eq!(zero.p, 0.0);
        assert!(zero.canonical.stats.iter().all(|s| s.empirical_mean == 0.0));
        assert!(zero.surrogate.stats.iter().all(|s| s.empirical_mean == 0.0 && s.dispersion.is_none()));
    }

    #[test]
    fn domino_counts_match_expectation() {
        let d = GridDims::square(128).unwrap();
        let (v, h) = domino_patterns();
        let r = run_occurrence_stats(d, 0.05, &[v, h], 400, Seed(3)).unwrap();
        for s in &r.stats {
            assert!(s.within_std_errors(4.0), "{s:?}");
            let disp = s.dispersion.unwrap();
            assert!((0.8..1.2).contains(&disp), "{disp}");
        }
    }

    #[test]
    fn planted_hitting_time_is_detected() {
        let d = GridDims::square(64).unwrap();
        let canon = canonical_p1_p2();
        let mut rng = Seed(4).stream(0);
        let events = planted_schedule(d, &canon.p1, Cell::new(20, 30), 25, 17, &mut rng).unwrap();
        assert_eq!(events.len(), 25);
        let r = run_hitting_time_planted(d, &events, 17).unwrap();
        assert_eq!(r.tau, Some(17));
        assert_eq!(r.detector_agrees, Some(true));
        assert!(r.samples.iter().any(|s| s.t == 16));
        assert!(r.samples.iter().all(|s| s.t < 17 && s.verdict == Verdict::Solved));
        assert!(planted_schedule(d, &canon.p1, Cell::new(20, 30), 10, 5, &mut rng).is_err());
    }

    #[test]
    fn natural_process_from_empty_board() {
        let d = GridDims::square(64).unwrap();
        let r = run_hitting_time(d, Seed(2), &power_of_two_schedule(1 << 10), 1 << 10).unwrap();
        assert_eq!(r.samples[0].t, 0);
        assert_eq!(r.samples[0].verdict, Verdict::Solved);
        assert_eq!(r.tau, None);
        assert_eq!(r.steps, 1 << 10);
        assert!(r.window_max_at_kappa.is_none() || r.kappa <= 1 << 10);
    }

    #[test]
    fn monotonicity_edge_cases() {
        let canon = canonical_p1_p2();
        let r = run_monotonicity(GridDims::square(64).unwrap(), Seed(1), &canon.p1, 0).unwrap();
        assert!(r.persistence);
        assert_eq!(r.horizon, 6);
        let r = run_monotonicity(GridDims::square(8).unwrap(), Seed(1), &canon.p1, 32).unwrap();
        assert!(!r.persistence);
        assert_eq!(r.first_destruction, Some(7));
    }

    #[test]
    fn persistence_matches_closed_form() {
        let d = GridDims::square(64).unwrap();
        let canon = canonical_p1_p2();
        // horizon chosen so the survival probability is near one half
        let horizon = 6 + 48;
        let s = run_persistence(d, &canon.p1, horizon, 2000, Seed(8)).unwrap();
        let se = (s.exact * (1.0 - s.exact) / s.trials as f64).sqrt();
        assert!((s.empirical - s.exact).abs() < 4.0 * se, "{s:?}");
        assert_eq!(exact_survival(100, 10, 0), 1.0);
        assert_eq!(exact_survival(10, 10, 1), 0.0);
    }

    #[test]
    fn lemma4_small_runs() {
        let r = run_lemma4(0, 50, Seed(1)).unwrap();
        assert_eq!(r.success_rate, 1.0);
        let r = run_lemma4(1, 1000, Seed(2)).unwrap();
        assert!((r.success_rate - 0.5).abs() < 0.06);
        assert!(lemma4_board(GridDims::square(24).unwrap(), &[true, false]).is_err());
    }

    #[test]
    fn atomic_write_replaces_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.csv");
        write_atomic(&path, b"first").unwrap();
        write_atomic(&path, b"second").unwrap();
        assert_eq!(std::fs::read(&path).unwrap(), b"second");
        assert!(write_atomic(&dir.path().join("missing/x.csv"), b"x").is_err());
    }
}
