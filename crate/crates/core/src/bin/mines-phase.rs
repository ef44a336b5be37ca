use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use mines_phase::acceptance;
use mines_phase::ambiguity::{enumerate_ambiguous_with_stats, MAX_ENUMERATION_MINES};
use mines_phase::experiments::{
    json_lines, power_of_two_schedule, run_criticality, run_hitting_time, run_hitting_time_planted, run_lemma4,
    run_persistence, run_sweep, write_atomic, SolverMode, SweepConfig, FORMAT_HEADER,
};
use mines_phase::patterns::occurrences;
use mines_phase::random_gen::{parse_event_log, sample_iid, Seed};
use mines_phase::solver::{play_with_options, PlayOptions, Verdict};
use mines_phase::text::{format_pattern, parse_pattern};
use mines_phase::{canonical_p1_p2, Error, GridDims, MineAssignment, Pattern};

#[derive(Parser)]
#[command(name = "mines-phase", version, about = "Random Minesweeper solvability experiments")]
struct Cli {
    /// Master seed; every trial derives its own stream from it.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true)]
    rows: Option<usize>,
    #[arg(long, global = true)]
    cols: Option<usize>,
    /// Worker threads (0 picks the number of cores).
    #[arg(long, global = true, env = "MINES_PHASE_THREADS", default_value_t = 0)]
    threads: usize,
    /// Output file, written atomically; stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Inference,
    Guessing,
}

impl From<Mode> for SolverMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Inference => SolverMode::Inference,
            Mode::Guessing => SolverMode::Guessing,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Sample an i.i.d. board and print it in the text format.
    Gen {
        #[arg(long)]
        p: f64,
    },
    /// Play a board read from a file or sampled from --p.
    Solve {
        #[arg(long, conflicts_with = "p")]
        input: Option<PathBuf>,
        #[arg(long)]
        p: Option<f64>,
        #[arg(long)]
        trace: bool,
        #[arg(long, value_enum, default_value_t = Mode::Inference)]
        mode: Mode,
    },
    /// List every ambiguous pattern with at most --max-mines mines.
    EnumAmbiguous {
        #[arg(long, default_value_t = 6)]
        max_mines: usize,
        /// Directory receiving one pattern file per result.
        #[arg(long)]
        patterns_dir: Option<PathBuf>,
    },
    /// Count pattern occurrences in a board (P1 and P2 by default).
    Scan {
        #[arg(long)]
        input: PathBuf,
        #[arg(long = "pattern")]
        patterns: Vec<PathBuf>,
    },
    /// Solve rate and occurrence statistics over a range of densities.
    Sweep {
        /// Comma-separated, ascending.
        #[arg(long, value_delimiter = ',', required = true)]
        p: Vec<f64>,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, value_enum, default_value_t = Mode::Inference)]
        mode: Mode,
        /// Also write per-trial JSON lines here.
        #[arg(long)]
        records: Option<PathBuf>,
        /// Also write `x y ci` plot data here.
        #[arg(long)]
        plot: Option<PathBuf>,
    },
    /// P1/P2 count statistics at p = c * n^(-1/6).
    Criticality {
        #[arg(long)]
        c: f64,
        #[arg(long, default_value_t = 200)]
        trials: usize,
    },
    /// Run the mine-addition process, or replay an event log.
    Process {
        #[arg(long, default_value_t = 1 << 16)]
        max_steps: usize,
        /// Event log (`t row col` lines) to replay instead of sampling.
        #[arg(long)]
        events: Option<PathBuf>,
        #[arg(long, requires = "events")]
        expected_tau: Option<usize>,
        /// Survival of a planted P1 up to --horizon, over --trials runs.
        #[arg(long, conflicts_with = "events")]
        persistence: bool,
        #[arg(long)]
        horizon: Option<usize>,
        #[arg(long, default_value_t = 200)]
        trials: usize,
    },
    /// Success rate of the guessing solver against k coin-flip plantings.
    Lemma4 {
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 10_000)]
        trials: usize,
    },
    /// Run the acceptance checks; one PASS/FAIL line each.
    Verify {
        /// Restrict to these criteria (comma-separated ids).
        #[arg(long, value_delimiter = ',')]
        only: Vec<u8>,
    },
}

/// Exit status: verdict-level failures are 1, bad input and I/O are 2.
enum Failure {
    Verdict(String),
    Usage(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

type Outcome = std::result::Result<(), Failure>;

struct Ctx {
    seed: Seed,
    rows: Option<usize>,
    cols: Option<usize>,
    out: Option<PathBuf>,
    format: Format,
}

impl Ctx {
    fn dims(&self, default: usize) -> Result<GridDims, Error> {
        GridDims::new(self.rows.unwrap_or(default), self.cols.unwrap_or(self.rows.unwrap_or(default)))
    }

    fn emit(&self, text: &str) -> Outcome {
        match &self.out {
            Some(path) => write_atomic(path, text.as_bytes())?,
            None => print!("{text}"),
        }
        Ok(())
    }

    fn emit_json<T: Serialize>(&self, value: &T) -> Outcome {
        let body = serde_json::to_string_pretty(value).map_err(|e| Failure::Usage(e.to_string()))?;
        self.emit(&format!("{body}\n"))
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn with_context(path: &Path, e: Error) -> Failure {
    Failure::Usage(format!("{}: {e}", path.display()))
}

fn load_board(path: &Path) -> Result<MineAssignment, Failure> {
    read(path)?.parse().map_err(|e| with_context(path, e))
}

#[derive(Serialize)]
struct BoardJson {
    rows: usize,
    cols: usize,
    mines: Vec<(usize, usize)>,
}

fn gen(ctx: &Ctx, p: f64) -> Outcome {
    let m = sample_iid(ctx.dims(16)?, p, &mut ctx.seed.stream(0))?;
    match ctx.format {
        Format::Csv => ctx.emit(&m.to_string()),
        Format::Json => ctx.emit_json(&BoardJson {
            rows: m.dims().rows,
            cols: m.dims().cols,
            mines: m.mines().map(|c| (c.row, c.col)).collect(),
        }),
    }
}

fn solve(ctx: &Ctx, input: Option<PathBuf>, p: Option<f64>, trace: bool, mode: Mode) -> Outcome {
    let mut rng = ctx.seed.stream(0);
    let m = match (input, p) {
        (Some(path), _) => load_board(&path)?,
        (None, Some(p)) => sample_iid(ctx.dims(16)?, p, &mut rng)?,
        (None, None) => return Err(Failure::Usage("solve needs --input or --p".into())),
    };
    let opts = PlayOptions { trace, ..Default::default() };
    let out = match mode {
        Mode::Inference => play_with_options(&m, opts, None::<&mut mines_phase::random_gen::TrialRng>),
        Mode::Guessing => play_with_options(&m, opts, Some(&mut rng)),
    };
    match ctx.format {
        Format::Json => ctx.emit_json(&out)?,
        Format::Csv => {
            let text = if trace {
                out.trace_text()
            } else {
                format!(
                    "verdict={} reveals={} islands={} guesses={}\n",
                    out.verdict,
                    out.reveals,
                    out.islands.len(),
                    out.guess_count
                )
            };
            ctx.emit(&text)?;
        }
    }
    if out.verdict == Verdict::Solved {
        Ok(())
    } else {
        Err(Failure::Verdict(String::new()))
    }
}

fn enum_ambiguous(ctx: &Ctx, max_mines: usize, dir: Option<PathBuf>) -> Outcome {
    if max_mines > MAX_ENUMERATION_MINES {
        return Err(Error::EnumerationTooLarge(max_mines).into());
    }
    let (found, stats) = enumerate_ambiguous_with_stats(max_mines)?;
    if let Some(dir) = &dir {
        std::fs::create_dir_all(dir).map_err(|e| Failure::Usage(format!("{}: {e}", dir.display())))?;
        for (i, p) in found.iter().enumerate() {
            write_atomic(&dir.join(format!("pattern-{}.txt", i + 1)), format_pattern(p).as_bytes())?;
        }
    }
    match ctx.format {
        Format::Csv => {
            let mut text = format!("count={} max_mines={max_mines}\n", found.len());
            for p in &found {
                text.push_str(&format_pattern(p));
            }
            ctx.emit(&text)
        }
        Format::Json => {
            #[derive(Serialize)]
            struct Out {
                count: usize,
                max_mines: usize,
                candidates: u64,
                patterns: Vec<Vec<(usize, usize)>>,
            }
            ctx.emit_json(&Out {
                count: found.len(),
                max_mines,
                candidates: stats.candidates,
                patterns: found.iter().map(|p| p.mines().iter().map(|c| (c.row, c.col)).collect()).collect(),
            })
        }
    }
}

fn scan(ctx: &Ctx, input: PathBuf, pattern_files: Vec<PathBuf>) -> Outcome {
    let m = load_board(&input)?;
    let named: Vec<(String, Pattern)> = if pattern_files.is_empty() {
        let c = canonical_p1_p2();
        vec![("P1".into(), c.p1), ("P2".into(), c.p2)]
    } else {
        pattern_files
            .iter()
            .map(|f| Ok((f.display().to_string(), parse_pattern(&read(f)?).map_err(|e| with_context(f, e))?)))
            .collect::<Result<_, Failure>>()?
    };
    #[derive(Serialize)]
    struct Hit {
        pattern: String,
        count: usize,
        anchors: Vec<(usize, usize)>,
    }
    let hits: Vec<Hit> = named
        .into_iter()
        .map(|(name, p)| {
            let anchors: Vec<(usize, usize)> = occurrences(&m, &p).iter().map(|c| (c.row, c.col)).collect();
            Hit { pattern: name, count: anchors.len(), anchors }
        })
        .collect();
    match ctx.format {
        Format::Json => ctx.emit_json(&hits),
        Format::Csv => {
            let mut text = "pattern,row,col\n".to_string();
            for h in &hits {
                for (r, c) in &h.anchors {
                    text.push_str(&format!("{},{r},{c}\n", h.pattern));
                }
            }
            ctx.emit(&text)
        }
    }
}

fn sweep(ctx: &Ctx, p: Vec<f64>, trials: usize, mode: Mode, records: Option<PathBuf>, plot: Option<PathBuf>) -> Outcome {
    let cfg = SweepConfig { dims: ctx.dims(128)?, p_values: p, trials, seed: ctx.seed, solver_mode: mode.into() };
    let report = run_sweep(&cfg)?;
    if let Some(path) = records {
        write_atomic(&path, report.records_jsonl().as_bytes())?;
    }
    if let Some(path) = plot {
        write_atomic(&path, report.plot_data().as_bytes())?;
    }
    match ctx.format {
        Format::Csv => ctx.emit(&report.to_csv()),
        Format::Json => ctx.emit(&json_lines(&report.rows)),
    }
}

fn criticality(ctx: &Ctx, c: f64, trials: usize) -> Outcome {
    let r = run_criticality(ctx.dims(256)?, c, trials, ctx.seed)?;
    match ctx.format {
        Format::Json => ctx.emit_json(&r),
        Format::Csv => {
            let mut text = format!("{FORMAT_HEADER}\nseries,exact_mean,empirical_mean,variance,std_error,dispersion\n");
            let names = ["p1", "p2", "domino_v", "domino_h"];
            let all = r.canonical.stats.iter().chain(&r.surrogate.stats);
            for (name, s) in names.iter().zip(all) {
                let disp = s.dispersion.map_or(String::new(), |d| d.to_string());
                text.push_str(&format!(
                    "{name},{},{},{},{},{disp}\n",
                    s.exact_mean, s.empirical_mean, s.variance, s.std_error
                ));
            }
            text.push_str(&format!(
                "; p={} c6={} exact/c6={} finite_size_gap={}\n",
                r.p,
                r.c6,
                r.finite_size_ratio.map_or("n/a".into(), |x| x.to_string()),
                r.finite_size_gap
            ));
            ctx.emit(&text)
        }
    }
}

fn process(
    ctx: &Ctx,
    max_steps: usize,
    events: Option<PathBuf>,
    expected_tau: Option<usize>,
    persistence: bool,
    horizon: Option<usize>,
    trials: usize,
) -> Outcome {
    let dims = ctx.dims(128)?;
    if persistence {
        let s = run_persistence(dims, &canonical_p1_p2().p1, horizon.unwrap_or(dims.n() / 2), trials, ctx.seed)?;
        return match ctx.format {
            Format::Json => ctx.emit_json(&s),
            Format::Csv => ctx.emit(&format!(
                "{FORMAT_HEADER}\ntrials,horizon,survived,empirical,exact\n{},{},{},{},{}\n",
                s.trials, s.horizon, s.survived, s.empirical, s.exact
            )),
        };
    }
    let record = match events {
        Some(path) => {
            let log = parse_event_log(&read(&path)?).map_err(|e| with_context(&path, e))?;
            let tau = expected_tau.unwrap_or(usize::MAX);
            run_hitting_time_planted(dims, &log, tau)?
        }
        None => run_hitting_time(dims, ctx.seed, &power_of_two_schedule(max_steps), max_steps)?,
    };
    match ctx.format {
        Format::Json => ctx.emit_json(&record)?,
        Format::Csv => {
            let mut text = format!("{FORMAT_HEADER}\nt,verdict,occurrences,window_max\n");
            for s in &record.samples {
                text.push_str(&format!("{},{},{},{}\n", s.t, s.verdict, s.occurrences, s.window_max));
            }
            text.push_str(&format!(
                "; steps={} tau={} window_max_pre_tau={} kappa={} window_max_at_kappa={}\n",
                record.steps,
                record.tau.map_or("none".into(), |t| t.to_string()),
                record.window_max_pre_tau,
                record.kappa,
                record.window_max_at_kappa.map_or("n/a".into(), |w| w.to_string())
            ));
            ctx.emit(&text)?;
        }
    }
    match record.detector_agrees {
        Some(false) => Err(Failure::Verdict(format!("detected tau {:?} differs from the expected one", record.tau))),
        _ => Ok(()),
    }
}

fn lemma4(ctx: &Ctx, k: usize, trials: usize) -> Outcome {
    let r = run_lemma4(k, trials, ctx.seed)?;
    match ctx.format {
        Format::Json => ctx.emit_json(&r),
        Format::Csv => ctx.emit(&format!(
            "{FORMAT_HEADER}\nk,trials,successes,success_rate,predicted,ci\n{},{},{},{},{},{}\n",
            r.k, r.trials, r.successes, r.success_rate, r.predicted, r.ci
        )),
    }
}

fn verify(ctx: &Ctx, only: Vec<u8>) -> Outcome {
    let ids: Vec<u8> = if only.is_empty() { (1..=10).collect() } else { only };
    let mut text = String::new();
    let mut failed = Vec::new();
    for id in ids {
        let r = acceptance::run(id);
        println!("{}", r.line());
        text.push_str(&r.line());
        text.push('\n');
        if !r.passed {
            failed.push(id);
        }
    }
    if ctx.out.is_some() {
        ctx.emit(&text)?;
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Verdict(format!("failed criteria: {failed:?}")))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.threads > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let ctx = Ctx { seed: Seed(cli.seed), rows: cli.rows, cols: cli.cols, out: cli.out, format: cli.format };
    let result = match cli.command {
        Command::Gen { p } => gen(&ctx, p),
        Command::Solve { input, p, trace, mode } => solve(&ctx, input, p, trace, mode),
        Command::EnumAmbiguous { max_mines, patterns_dir } => enum_ambiguous(&ctx, max_mines, patterns_dir),
        Command::Scan { input, patterns } => scan(&ctx, input, patterns),
        Command::Sweep { p, trials, mode, records, plot } => sweep(&ctx, p, trials, mode, records, plot),
        Command::Criticality { c, trials } => criticality(&ctx, c, trials),
        Command::Process { max_steps, events, expected_tau, persistence, horizon, trials } => {
            process(&ctx, max_steps, events, expected_tau, persistence, horizon, trials)
        }
        Command::Lemma4 { k, trials } => lemma4(&ctx, k, trials),
        Command::Verify { only } => verify(&ctx, only),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verdict(msg)) => {
            if !msg.is_empty() {
                eprintln!("{msg}");
            }
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
