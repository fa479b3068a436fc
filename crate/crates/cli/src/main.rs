//! `tpg`: solve timed parity games from the command line.
//!
//! Exit codes: 0 when every query is won (or the command succeeded), 1 when
//! a query is lost or a check fails, 2 on errors.

use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use tpg_core::enlarged::Mode;
use tpg_core::harness::{cross_check, random_game, sample_region_semantics, shrink_game, RandomGameSpec};
use tpg_core::model::{parse_game, parse_rational, write_game, Player, TimedGame};
use tpg_core::parity::FiniteParityGame;
use tpg_core::pipeline::{check_receptive, solve, SolveResult, SolverChoice, WinMode};
use tpg_core::regions::{enumerate_regions, region_of_valuation, region_string};
use tpg_core::robust::JitterParams;
use tpg_core::solver::RecipeDisplay;

#[derive(Parser)]
#[command(name = "tpg", version, about = "Solver for timed automaton parity games")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a game and report query verdicts, winning regions and a strategy.
    Solve(SolveArgs),
    /// Check whether each player has a receptive strategy.
    Check(GameArgs),
    /// Write the finite parity game built for a mode.
    ExportGame(ExportArgs),
    /// Randomized self-checks of the constructions.
    Verify(VerifyArgs),
    /// Solve a parity game in PGSolver format.
    SolvePg(SolvePgArgs),
}

#[derive(Args)]
struct GameArgs {
    /// Game file in `.tg` format.
    input: PathBuf,
    /// Replaces the file's query states; same syntax as a `state` line,
    /// e.g. `--state "q l0 x=1,y=1/2"`. Repeatable.
    #[arg(long = "state", value_name = "STATE")]
    states: Vec<String>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Exact,
    LimitRobust,
    BoundedRobust,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SolverArg {
    Zielonka,
    Spm,
    Both,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
    Dot,
    Pgsolver,
}

#[derive(Args)]
struct ModeArgs {
    #[arg(long, value_enum, default_value = "exact")]
    mode: ModeArg,
    /// Jitter bound as a rational `p/q` (bounded-robust only).
    #[arg(long)]
    jitter: Option<String>,
    /// Response time as a rational `p/q` (bounded-robust only).
    #[arg(long)]
    response: Option<String>,
    #[arg(long, value_enum, default_value = "zielonka")]
    solver: SolverArg,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    game: GameArgs,
    #[command(flatten)]
    mode: ModeArgs,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
}

#[derive(Args)]
struct ExportArgs {
    #[command(flatten)]
    game: GameArgs,
    #[command(flatten)]
    mode: ModeArgs,
    #[arg(long, value_enum, default_value = "pgsolver")]
    format: Format,
    /// Output file; standard output when absent.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Game to check; random games are generated when absent.
    input: Option<PathBuf>,
    /// Sampled rounds for a given game, or number of random games.
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Directory for shrunk counterexample games.
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct SolvePgArgs {
    input: PathBuf,
    #[arg(long, value_enum, default_value = "zielonka")]
    solver: SolverArg,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Solve(a) => cmd_solve(&a),
        Command::Check(a) => cmd_check(&a),
        Command::ExportGame(a) => cmd_export(&a),
        Command::Verify(a) => cmd_verify(&a),
        Command::SolvePg(a) => cmd_solve_pg(&a),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) if e.downcast_ref::<std::io::Error>().is_some_and(|io| io.kind() == std::io::ErrorKind::BrokenPipe) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn load_game(a: &GameArgs) -> Result<TimedGame> {
    let text = read(&a.input)?;
    let g = parse_game(&text).with_context(|| format!("in {}", a.input.display()))?;
    if a.states.is_empty() {
        return Ok(g);
    }
    let mut base = g;
    base.states.clear();
    let mut doc = write_game(&base);
    for s in &a.states {
        doc.push_str(&format!("state {s}\n"));
    }
    parse_game(&doc).context("in --state")
}

fn rational(flag: &str, s: &str) -> Result<tpg_core::model::Q> {
    parse_rational(s).ok_or_else(|| anyhow!("--{flag}: expected a nonnegative rational, got '{s}'"))
}

fn win_mode(m: &ModeArgs) -> Result<WinMode> {
    match (m.mode, &m.jitter, &m.response) {
        (ModeArg::BoundedRobust, Some(j), Some(r)) => Ok(WinMode::BoundedRobust(JitterParams::new(rational("jitter", j)?, rational("response", r)?)?)),
        (ModeArg::BoundedRobust, _, _) => bail!("bounded-robust mode needs --jitter and --response"),
        (_, None, None) => Ok(if m.mode == ModeArg::Exact { WinMode::Exact } else { WinMode::LimitRobust }),
        _ => bail!("--jitter and --response only apply to bounded-robust mode"),
    }
}

fn solver(s: SolverArg) -> SolverChoice {
    match s {
        SolverArg::Zielonka => SolverChoice::Zielonka,
        SolverArg::Spm => SolverChoice::Spm,
        SolverArg::Both => SolverChoice::Both,
    }
}

fn mode_name(m: &WinMode) -> String {
    match m {
        WinMode::Exact => "exact".into(),
        WinMode::LimitRobust => "limit-robust".into(),
        WinMode::BoundedRobust(p) => format!("bounded-robust jitter={} response={}", p.jitter, p.response),
    }
}

fn color() -> bool {
    std::env::var("TP_COLOR").is_ok_and(|v| v == "1")
}

fn verdict(win: bool) -> String {
    let word = if win { "WIN" } else { "LOSE" };
    match (color(), win) {
        (false, _) => word.into(),
        (true, true) => format!("\x1b[32m{word}\x1b[0m"),
        (true, false) => format!("\x1b[31m{word}\x1b[0m"),
    }
}

#[derive(Serialize)]
struct QueryJson {
    label: String,
    region: String,
    verdict: &'static str,
}

#[derive(Serialize)]
struct RegionJson {
    region: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    strategy: Option<String>,
}

#[derive(Serialize)]
struct SolveJson {
    game: String,
    mode: String,
    queries: Vec<QueryJson>,
    winning_regions: Vec<RegionJson>,
    stats: StatsJson,
}

#[derive(Serialize)]
struct StatsJson {
    regions: usize,
    ext_regions: usize,
    finite_states: usize,
    finite_edges: usize,
}

/// Query verdicts and winning regions, phrased over the input game.
fn report(g: &TimedGame, r: &SolveResult) -> SolveJson {
    let ceil = g.ceilings();
    let queries = g
        .states
        .iter()
        .zip(&r.queries)
        .map(|(s, q)| QueryJson {
            label: q.label.clone(),
            region: region_string(g, &region_of_valuation(&ceil, s.location, &s.valuation)),
            verdict: if q.win { "WIN" } else { "LOSE" },
        })
        .collect();
    let actions = |e: usize| r.game.edges[e].action.clone();
    let winning_regions = match r.jitter {
        Some(_) => r.winning_source_regions(g).iter().map(|reg| RegionJson { region: region_string(g, reg), strategy: None }).collect(),
        None => r
            .regions
            .iter()
            .zip(&r.winning)
            .zip(&r.recipes)
            .filter(|((_, &w), _)| w)
            .map(|((reg, _), rec)| RegionJson {
                region: region_string(g, reg),
                strategy: rec.as_ref().map(|recipe| RecipeDisplay { recipe, actions: &actions }.to_string()),
            })
            .collect(),
    };
    let s = &r.stats;
    SolveJson {
        game: g.name.clone(),
        mode: mode_name(&r.mode),
        queries,
        winning_regions,
        stats: StatsJson { regions: s.regions, ext_regions: s.ext_regions, finite_states: s.finite_states, finite_edges: s.finite_edges },
    }
}

fn cmd_solve(a: &SolveArgs) -> Result<bool> {
    let g = load_game(&a.game)?;
    let mode = win_mode(&a.mode)?;
    let r = solve(&g, &mode, solver(a.mode.solver))?;
    let rep = report(&g, &r);
    let mut out = std::io::stdout().lock();
    match a.format {
        Format::Json => writeln!(out, "{}", serde_json::to_string_pretty(&rep)?)?,
        Format::Text => {
            writeln!(out, "game {}", rep.game)?;
            writeln!(out, "mode {}", rep.mode)?;
            for (q, v) in rep.queries.iter().zip(&r.queries) {
                writeln!(out, "query {} {} {}", q.label, q.region, verdict(v.win))?;
            }
            writeln!(out, "winning regions: {}", rep.winning_regions.len())?;
            for w in &rep.winning_regions {
                match &w.strategy {
                    Some(s) => writeln!(out, "  {}  => {s}", w.region)?,
                    None => writeln!(out, "  {}", w.region)?,
                }
            }
            let s = &rep.stats;
            writeln!(
                out,
                "stats: {} regions, {} ExtRegions, {} finite states, {} finite edges",
                s.regions, s.ext_regions, s.finite_states, s.finite_edges
            )?;
        }
        Format::Dot | Format::Pgsolver => bail!("solve writes text or json; use export-game for dot and pgsolver"),
    }
    Ok(r.all_queries_win())
}

fn cmd_check(a: &GameArgs) -> Result<bool> {
    let g = load_game(a)?;
    let r = check_receptive(&g)?;
    let line = |ok: bool| if ok { "receptive" } else { "NOT receptive" };
    println!("player1: {}", line(r.player1));
    println!("player2: {}", line(r.player2));
    Ok(r.player1 && r.player2)
}

fn cmd_export(a: &ExportArgs) -> Result<bool> {
    let g = load_game(&a.game)?;
    let mode = win_mode(&a.mode)?;
    let r = solve(&g, &mode, solver(a.mode.solver))?;
    let game = r.analysis.reduced.labelled_game(&r.analysis.ext);
    let text = match a.format {
        Format::Pgsolver => game.to_pgsolver(),
        Format::Dot => game.to_dot(),
        Format::Text | Format::Json => bail!("export-game writes pgsolver or dot"),
    };
    match &a.output {
        Some(p) => std::fs::write(p, text).with_context(|| format!("cannot write {}", p.display()))?,
        None => print!("{text}"),
    }
    Ok(true)
}

#[derive(Serialize)]
struct PgJson {
    player1: Vec<u64>,
    player2: Vec<u64>,
    /// Chosen successor per state, for the winner's states.
    strategy: Vec<(u64, u64)>,
}

fn cmd_solve_pg(a: &SolvePgArgs) -> Result<bool> {
    let (game, ids): (FiniteParityGame, Vec<u64>) = FiniteParityGame::parse_pgsolver(&read(&a.input)?)?;
    let sol = tpg_core::pipeline::solve_finite(&game, solver(a.solver))?;
    let pick = |p: Player| (0..game.len()).filter(|&v| sol.winner[v] == p).map(|v| ids[v]).collect::<Vec<_>>();
    let rep = PgJson {
        player1: pick(Player::P1),
        player2: pick(Player::P2),
        strategy: (0..game.len()).filter_map(|v| sol.strategy[v].map(|w| (ids[v], ids[w as usize]))).collect(),
    };
    match a.format {
        Format::Json => println!("{}", serde_json::to_string_pretty(&rep)?),
        Format::Text => {
            let list = |v: &[u64]| v.iter().map(u64::to_string).collect::<Vec<_>>().join(" ");
            println!("player1 wins: {}", list(&rep.player1));
            println!("player2 wins: {}", list(&rep.player2));
            for (v, w) in &rep.strategy {
                println!("  {v} -> {w}");
            }
        }
        _ => bail!("solve-pg writes text or json"),
    }
    Ok(true)
}

#[derive(Serialize)]
#[serde(tag = "check", rename_all = "snake_case")]
enum VerifyLine {
    Sampling { game: String, seed: u64, trials: usize, joint_moves: usize, ties: usize, divergences: Vec<String>, ok: bool },
    CrossCheck {
        game: String,
        seed: Option<u64>,
        mode: &'static str,
        ext_regions: usize,
        af_states: usize,
        af_star_states: usize,
        spm: bool,
        mismatches: usize,
        unsound: Vec<String>,
        ok: bool,
        #[serde(skip_serializing_if = "Option::is_none")]
        counterexample: Option<String>,
    },
    Skipped { game: String, seed: u64, reason: &'static str },
}

/// Games up to this many regions are also cross-checked with progress measures.
const SPM_REGION_LIMIT: usize = 20;

fn cmd_verify(a: &VerifyArgs) -> Result<bool> {
    let mut out = std::io::stdout().lock();
    let mut all_ok = true;
    let emit = |line: VerifyLine, out: &mut std::io::StdoutLock| -> Result<()> {
        writeln!(out, "{}", serde_json::to_string(&line)?)?;
        Ok(())
    };
    let games: Vec<(TimedGame, Option<u64>)> = match &a.input {
        Some(p) => vec![(parse_game(&read(p)?).with_context(|| format!("in {}", p.display()))?, None)],
        None => (0..a.trials as u64).map(|i| (random_game(&RandomGameSpec::new(a.seed + i)), Some(a.seed + i))).collect(),
    };
    for (g, seed) in games {
        if let Some(s) = seed {
            let r = check_receptive(&g)?;
            if !(r.player1 && r.player2) {
                emit(VerifyLine::Skipped { game: g.name.clone(), seed: s, reason: "not receptive" }, &mut out)?;
                continue;
            }
        } else {
            let rep = sample_region_semantics(&g, a.trials, a.seed)?;
            let ok = rep.divergences.is_empty();
            all_ok &= ok;
            emit(
                VerifyLine::Sampling {
                    game: g.name.clone(),
                    seed: a.seed,
                    trials: rep.trials,
                    joint_moves: rep.joint_moves,
                    ties: rep.ties,
                    divergences: rep.divergences,
                    ok,
                },
                &mut out,
            )?;
        }
        let ceil = g.ceilings();
        let mut seeds = enumerate_regions(&g)?;
        for s in &g.states {
            let r = region_of_valuation(&ceil, s.location, &s.valuation);
            if !seeds.contains(&r) {
                seeds.push(r);
            }
        }
        let spm = seeds.len() <= SPM_REGION_LIMIT;
        for (mode, name) in [(Mode::Exact, "exact"), (Mode::LimitRobust, "limit-robust")] {
            let rep = cross_check(&g, &seeds, mode, spm)?;
            let ok = rep.ok();
            all_ok &= ok;
            let counterexample = if ok {
                None
            } else {
                let fails = |h: &TimedGame| {
                    enumerate_regions(h).ok().and_then(|s| cross_check(h, &s, mode, spm).ok()).is_some_and(|r| !r.ok())
                };
                let small = shrink_game(&g, &fails);
                let path = a.out_dir.join(format!("counterexample-{}-{name}.tg", g.name));
                std::fs::write(&path, write_game(&small)).with_context(|| format!("cannot write {}", path.display()))?;
                Some(path.display().to_string())
            };
            emit(
                VerifyLine::CrossCheck {
                    game: g.name.clone(),
                    seed,
                    mode: name,
                    ext_regions: rep.ext_regions,
                    af_states: rep.af_states,
                    af_star_states: rep.af_star_states,
                    spm,
                    mismatches: rep.mismatches.len(),
                    unsound: rep.unsound,
                    ok,
                    counterexample,
                },
                &mut out,
            )?;
        }
    }
    Ok(all_ok)
}
