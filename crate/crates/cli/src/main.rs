use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Parser, Subcommand, ValueEnum};

use worldforge_core::corpus::{self, load_entry, parse_transcript};
use worldforge_core::dsl::check;
use worldforge_core::engine::{Game, GameState};
use worldforge_core::harness::report::{summarize, to_json};
use worldforge_core::harness::{
    evaluate_corpus, evaluate_game, histogram_csv, search_winnable, EvalOptions, EvalReport, Judge, MockJudge,
    SearchOptions, ValidityOptions, Verdict,
};
use worldforge_core::spec::load_spec;
use worldforge_core::stats::{compute_stats, context_fit, render_table};
use worldforge_genloop::{
    reflect_loop, reflect_many, ChatModel, ClientConfig, HttpChatModel, LlmJudge, PromptBundle, RunStore,
};

const SUCCESS: u8 = 0;
const FAILURES: u8 = 1;
const USAGE: u8 = 2;
const IO: u8 = 3;
const LLM: u8 = 4;

/// An error paired with the exit status it maps to.
struct Failure(u8, anyhow::Error);

type CmdResult = Result<u8, Failure>;

trait ExitWith<T> {
    fn exit(self, code: u8) -> Result<T, Failure>;
}

impl<T, E: Into<anyhow::Error>> ExitWith<T> for Result<T, E> {
    fn exit(self, code: u8) -> Result<T, Failure> {
        self.map_err(|e| Failure(code, e.into()))
    }
}

#[derive(Parser)]
#[command(name = "worldforge", version, about = "Play, check, evaluate, and generate text games")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Play a game interactively. Type "help" for the valid actions, "score", or "quit".
    Play {
        game: PathBuf,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
    /// Replay a solution transcript and check its EXPECT line.
    RunSolution {
        game: PathBuf,
        solution: PathBuf,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
    /// Check that a game loads, grounds its actions, and runs without faults.
    Validate {
        game: PathBuf,
        /// Length of the action sequences explored.
        #[arg(long, default_value_t = 3)]
        depth: usize,
        /// Actions expanded per state; larger sets are sampled.
        #[arg(long, default_value_t = 100)]
        branch_cap: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
    /// Evaluate one game or every game in a corpus directory.
    Evaluate {
        /// A .wg file or a corpus directory.
        path: PathBuf,
        /// Task specification for a single game.
        #[arg(long)]
        spec: Option<PathBuf>,
        /// Alignment judge: mock:aligned, mock:misaligned, or llm.
        #[arg(long, default_value = "mock:aligned")]
        judge: String,
        /// Client config for the llm judge.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Directory for report files; without it reports go to standard output.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Games evaluated in parallel.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        /// Also evaluate entries tagged negative.
        #[arg(long)]
        include_negative: bool,
    },
    /// Search for a winning action sequence.
    Winnable {
        game: PathBuf,
        #[arg(long, default_value_t = 20)]
        max_depth: usize,
        #[arg(long, default_value_t = 200_000)]
        node_budget: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
    /// Per-game size statistics for a corpus.
    Stats {
        corpus: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
    },
    /// How many examples of a given size fit in a context window.
    FitContext {
        #[arg(long)]
        context: u64,
        #[arg(long, default_value_t = 0)]
        prelude: u64,
        #[arg(long)]
        per_game: u64,
    },
    /// Ask a model for one game from a task specification.
    Generate(GenArgs),
    /// Generate, then feed back one error per round until the game runs.
    Reflect {
        #[command(flatten)]
        gen: GenArgs,
        /// Override the number of reflection rounds.
        #[arg(long)]
        max_rounds: Option<u32>,
    },
}

#[derive(clap::Args)]
struct GenArgs {
    /// Task specification file; repeat to run several concurrently.
    #[arg(long, required = true)]
    spec: Vec<PathBuf>,
    /// Corpus game used as the one-shot example.
    #[arg(long, default_value = "boil-water")]
    example: String,
    /// Client config JSON.
    #[arg(long)]
    config: PathBuf,
    #[arg(long, default_value = "corpus")]
    corpus: PathBuf,
    /// Root directory for run records.
    #[arg(long, default_value = "runs")]
    runs: PathBuf,
    #[arg(long, default_value_t = 42)]
    seed: u64,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Table,
    Json,
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_writer(std::io::stderr)
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_env("WORLDFORGE_LOG")
                .unwrap_or_else(|_| tracing_subscriber::EnvFilter::new("warn")),
        )
        .init();
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(Failure(code, err)) => {
            eprintln!("error: {err:#}");
            ExitCode::from(code)
        }
    }
}

fn run(command: Command) -> CmdResult {
    match command {
        Command::Play { game, seed } => play(&game, seed),
        Command::RunSolution { game, solution, seed } => run_solution(&game, &solution, seed),
        Command::Validate { game, depth, branch_cap, seed } => validate(&game, ValidityOptions { depth, branch_cap, seed }),
        Command::Evaluate { path, spec, judge, config, out, seed, jobs, include_negative } => {
            let opts = EvalOptions { seed, ..EvalOptions::default() };
            let judge = make_judge(&judge, config.as_deref())?;
            if path.is_dir() {
                evaluate_dir(&path, judge.as_ref(), &opts, out.as_deref(), jobs, include_negative)
            } else {
                evaluate_file(&path, spec.as_deref(), judge.as_ref(), &opts, out.as_deref())
            }
        }
        Command::Winnable { game, max_depth, node_budget, seed } => {
            winnable(&game, SearchOptions { max_depth, node_budget }, seed)
        }
        Command::Stats { corpus, format } => stats(&corpus, format),
        Command::FitContext { context, prelude, per_game } => {
            let n = context_fit(context, prelude, per_game).exit(USAGE)?;
            println!("{n}");
            Ok(SUCCESS)
        }
        Command::Generate(args) => generate(&args, Some(0)),
        Command::Reflect { gen, max_rounds } => generate(&gen, max_rounds),
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display())).exit(IO)
}

fn game_file(path: &Path) -> PathBuf {
    if path.is_dir() {
        path.join("game.wg")
    } else {
        path.to_path_buf()
    }
}

/// Loads and checks a game file, or the `game.wg` inside a corpus entry
/// directory. Diagnostics are an I/O-class failure: the input could not be
/// used at all.
fn load_game(path: &Path) -> Result<Game, Failure> {
    let file = game_file(path);
    let path = file.as_path();
    let source = read(path)?;
    match check(&source) {
        Ok(def) => Ok(Game::new(def)),
        Err(diags) => {
            let text: Vec<String> = diags.iter().map(|d| d.to_string()).collect();
            Err(Failure(IO, anyhow!("{} does not check:\n{}", path.display(), text.join("\n"))))
        }
    }
}

fn print_json(value: &impl serde::Serialize) {
    print!("{}", to_json(value));
}

fn play(path: &Path, seed: u64) -> CmdResult {
    let game = load_game(path)?;
    let mut state = game.instantiate(seed).exit(IO)?;
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    let say = |out: &mut std::io::StdoutLock<'_>, text: &str| -> Result<(), Failure> {
        writeln!(out, "{text}").exit(IO)
    };
    say(&mut out, &state.task_description)?;
    say(&mut out, &game.describe(&state).exit(FAILURES)?)?;
    let stdin = std::io::stdin();
    let mut lines = stdin.lock().lines();
    loop {
        write!(out, "> ").and_then(|_| out.flush()).exit(IO)?;
        let Some(line) = lines.next() else { break };
        let line = line.exit(IO)?;
        match line.trim() {
            "quit" => break,
            "help" => {
                for a in game.enumerate_valid_actions(&state).exit(FAILURES)? {
                    say(&mut out, &a)?;
                }
            }
            "score" => say(&mut out, &score_line(&state))?,
            "" => {}
            cmd => {
                let (obs, next) = game.step(&state, cmd).exit(FAILURES)?;
                say(&mut out, &obs)?;
                state = next;
                if state.game_over {
                    break;
                }
            }
        }
    }
    Ok(SUCCESS)
}

fn score_line(state: &GameState) -> String {
    format!("Score: {}/{} after {} steps.", state.score, state.max_score, state.num_steps)
}

fn run_solution(game_path: &Path, solution: &Path, seed: u64) -> CmdResult {
    let game = load_game(game_path)?;
    let transcript = parse_transcript(&read(solution)?).map_err(|e| Failure(IO, anyhow!("{}: {e}", solution.display())))?;
    let replay = corpus::replay(&game, &transcript, seed).exit(FAILURES)?;
    for (cmd, obs) in transcript.commands.iter().zip(&replay.observations) {
        println!("> {cmd}\n{obs}");
    }
    for (i, cmd) in &replay.ungrounded {
        println!("step {}: '{cmd}' was not a valid action", i + 1);
    }
    let s = &replay.final_state;
    let outcome = if s.game_won { "won" } else { "not-won" };
    println!("result: {outcome} score={} ({})", s.score, replay.expect);
    Ok(if replay.satisfied() { SUCCESS } else { FAILURES })
}

fn validate(path: &Path, opts: ValidityOptions) -> CmdResult {
    let source = read(&game_file(path))?;
    let report = worldforge_core::harness::check_validity(&source, &opts);
    let mut value = serde_json::to_value(&report).exit(IO)?;
    if let serde_json::Value::Object(map) = &mut value {
        map.insert("seed".into(), opts.seed.into());
    }
    print_json(&value);
    let ok = report.init_ok && report.valid_actions_ok && report.runnable_ok;
    Ok(if ok { SUCCESS } else { FAILURES })
}

fn make_judge(name: &str, config: Option<&Path>) -> Result<Box<dyn Judge>, Failure> {
    match name {
        "mock:aligned" => Ok(Box::new(MockJudge::Aligned)),
        "mock:misaligned" => Ok(Box::new(MockJudge::Misaligned)),
        "llm" => {
            let path = config.ok_or_else(|| Failure(USAGE, anyhow!("--judge llm needs --config <client.json>")))?;
            let config = ClientConfig::load(path).exit(IO)?;
            let timeout = config.per_game_timeout();
            let model = HttpChatModel::from_env(config).exit(LLM)?;
            Ok(Box::new(LlmJudge::new(model, timeout)))
        }
        other => Err(Failure(USAGE, anyhow!("unknown judge '{other}' (use mock:aligned, mock:misaligned, or llm)"))),
    }
}

fn passed(r: &EvalReport) -> bool {
    r.validity.init_ok
        && r.validity.valid_actions_ok
        && r.validity.runnable_ok
        && r.winnability.as_ref().is_some_and(|w| w.winnable)
}

fn evaluate_file(
    path: &Path,
    spec: Option<&Path>,
    judge: &dyn Judge,
    opts: &EvalOptions,
    out: Option<&Path>,
) -> CmdResult {
    let source = read(path)?;
    let spec = spec.map(load_spec).transpose().exit(IO)?;
    let id = game_id(path);
    let report = evaluate_game(&id, &source, spec.as_ref(), judge, opts);
    match out {
        Some(dir) => {
            let summary = summarize(std::slice::from_ref(&report), opts.seed);
            std::fs::create_dir_all(dir)
                .and_then(|_| std::fs::write(dir.join(format!("{id}.report.json")), to_json(&report)))
                .and_then(|_| std::fs::write(dir.join("histogram.csv"), histogram_csv(&summary.alignment_histogram)))
                .with_context(|| format!("cannot write reports to {}", dir.display()))
                .exit(IO)?;
        }
        None => print_json(&report),
    }
    Ok(if passed(&report) { SUCCESS } else { FAILURES })
}

/// `corpus/boil-water/game.wg` is "boil-water"; other files use their stem.
fn game_id(path: &Path) -> String {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("game");
    if stem == "game" {
        if let Some(parent) = path.parent().and_then(|p| p.file_name()).and_then(|s| s.to_str()) {
            return parent.to_string();
        }
    }
    stem.to_string()
}

fn evaluate_dir(
    dir: &Path,
    judge: &dyn Judge,
    opts: &EvalOptions,
    out: Option<&Path>,
    jobs: usize,
    include_negative: bool,
) -> CmdResult {
    let eval = evaluate_corpus(dir, judge, opts, include_negative, jobs).exit(IO)?;
    match out {
        Some(out) => {
            eval.write_to(out).with_context(|| format!("cannot write reports to {}", out.display())).exit(IO)?;
            print_json(&eval.summary);
        }
        None => print_json(&serde_json::json!({ "summary": eval.summary, "reports": eval.reports })),
    }
    Ok(if eval.reports.iter().all(passed) { SUCCESS } else { FAILURES })
}

fn winnable(path: &Path, opts: SearchOptions, seed: u64) -> CmdResult {
    let game = load_game(path)?;
    let r = search_winnable(&game, &opts, seed).exit(FAILURES)?;
    println!("seed: {seed}");
    match r.verdict {
        Verdict::Winnable => {
            println!("winnable in {} steps ({} nodes expanded):", r.plan.len(), r.nodes_expanded);
            for a in &r.plan {
                println!("{a}");
            }
        }
        Verdict::Unwinnable => println!("not winnable ({} nodes expanded)", r.nodes_expanded),
        Verdict::Inconclusive => {
            println!("inconclusive: search budget exhausted after {} nodes", r.nodes_expanded)
        }
    }
    for f in &r.faults {
        println!("fault: {f}");
    }
    Ok(if r.winnable { SUCCESS } else { FAILURES })
}

fn stats(dir: &Path, format: Format) -> CmdResult {
    let mut games = Vec::new();
    for entry in corpus::list_corpus(dir).exit(IO)? {
        let loaded = corpus::load(entry).exit(IO)?;
        games.push(compute_stats(&loaded).exit(FAILURES)?);
    }
    let stats = worldforge_core::stats::summarize(games);
    match format {
        Format::Table => print!("{}", render_table(&stats)),
        Format::Json => print_json(&stats),
    }
    Ok(SUCCESS)
}

/// `rounds` of `Some(0)` is a single generation with no reflection.
fn generate(args: &GenArgs, rounds: Option<u32>) -> CmdResult {
    let mut config = ClientConfig::load(&args.config).exit(IO)?;
    if let Some(r) = rounds {
        config.max_rounds = r;
    }
    let example = load_entry(&args.corpus, &args.example).exit(IO)?;
    let mut bundles = Vec::new();
    for path in &args.spec {
        let spec = load_spec(path).exit(IO)?;
        let bundle = PromptBundle::new(&args.example, example.source.clone(), spec).exit(IO)?;
        bundles.push((spec_id(path), bundle));
    }
    let model: Box<dyn ChatModel> = Box::new(HttpChatModel::from_env(config.clone()).exit(LLM)?);
    let store = RunStore::create(&args.runs).exit(IO)?;
    let validity = ValidityOptions { seed: args.seed, ..ValidityOptions::default() };
    let outcomes = if bundles.len() == 1 {
        vec![reflect_loop(model.as_ref(), &config, &bundles[0].1, &validity, Some(&store)).exit(IO)?]
    } else {
        reflect_many(model.as_ref(), &config, &bundles, &validity, Some(&store)).exit(IO)?
    };
    eprintln!("records written to {}", store.dir().display());
    let mut code = SUCCESS;
    for ((name, _), outcome) in bundles.iter().zip(&outcomes) {
        let last = outcome.final_record();
        println!(
            "{name}: {} round(s), runnable={}",
            outcome.records.len(),
            last.is_some_and(|r| r.validity.runnable_ok)
        );
        if let Some(e) = &outcome.error {
            eprintln!("{name}: {e}");
            code = LLM;
        } else if !outcome.succeeded() && code == SUCCESS {
            code = FAILURES;
        }
        if bundles.len() == 1 {
            if let Some(r) = last {
                print!("{}", r.extracted_source);
            }
        }
    }
    Ok(code)
}

fn spec_id(path: &Path) -> String {
    let name = path.file_name().and_then(|s| s.to_str()).unwrap_or("spec");
    let stem = name.strip_suffix(".spec.json").unwrap_or(name);
    if stem == "spec" {
        if let Some(parent) = path.parent().and_then(|p| p.file_name()).and_then(|s| s.to_str()) {
            return parent.to_string();
        }
    }
    stem.to_string()
}
