use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use elhr_prov::ara::{power_family, Ara};
use elhr_prov::wta::WtaState;
use elhr_prov::{
    build_ara_stack, families, parse_goal, parse_query, parse_tbox, saturate, AnnotatedTBox,
    Engine, EngineConfig, Reasoner, SemiringMode, Word,
};

#[derive(Parser)]
#[command(
    name = "elhr-prov",
    version,
    about = "Provenance of subsumptions in annotated ELHr TBoxes"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide whether a TBox entails an annotated subsumption.
    Prove {
        tbox: PathBuf,
        /// `A <= B : m`, e.g. `A <= D : u*v*w`
        #[arg(short, long)]
        query: String,
        #[command(flatten)]
        engine: EngineArgs,
        #[arg(long)]
        json: bool,
    },
    /// List every monomial a goal is entailed with.
    Monomials {
        tbox: PathBuf,
        #[arg(short, long)]
        goal: String,
        #[arg(long, value_enum, default_value_t = Mode::Trio)]
        mode: Mode,
        #[arg(long)]
        max_iterations: Option<usize>,
        /// Print at most this many monomials.
        #[arg(long)]
        limit: Option<usize>,
        #[arg(long)]
        json: bool,
    },
    /// Print the behaviour ARA of a goal.
    DumpAra {
        tbox: PathBuf,
        #[arg(short, long)]
        goal: String,
        #[arg(long, value_enum, default_value_t = Format::Dot)]
        format: Format,
        /// Stack height; defaults to the saturation fixpoint.
        #[arg(long)]
        iterations: Option<usize>,
        #[arg(long, value_enum, default_value_t = Mode::Trio)]
        mode: Mode,
    },
    /// Print the saturation table as TSV, one row per iteration.
    Table {
        tbox: PathBuf,
        #[arg(long, value_enum, default_value_t = Mode::Trio)]
        mode: Mode,
        #[arg(long)]
        max_iterations: Option<usize>,
    },
    /// Generate and measure a benchmark family.
    Bench {
        #[arg(value_enum)]
        family: Family,
        #[arg(short)]
        n: usize,
        /// Write the generated TBox (sword) or ARA JSON (power) here.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Args)]
struct EngineArgs {
    #[arg(long, value_enum, default_value_t = Mode::Trio)]
    mode: Mode,
    #[arg(long, value_enum, default_value_t = EngineKind::Ara)]
    engine: EngineKind,
    #[arg(long)]
    max_iterations: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Trio,
    Lap,
}

impl From<Mode> for SemiringMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Trio => SemiringMode::TrioCommutative,
            Mode::Lap => SemiringMode::LeftAbsorbing,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum EngineKind {
    Ara,
    Saturation,
}

impl From<EngineKind> for Engine {
    fn from(e: EngineKind) -> Self {
        match e {
            EngineKind::Ara => Engine::Ara,
            EngineKind::Saturation => Engine::Saturation,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Dot,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    Sword,
    Power,
}

fn config(mode: Mode, engine: Engine, max_iterations: Option<usize>) -> EngineConfig {
    EngineConfig {
        max_iterations,
        ..EngineConfig::new(mode.into(), engine)
    }
}

fn load(path: &Path) -> Result<AnnotatedTBox> {
    let text =
        fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    parse_tbox(&text).with_context(|| format!("in {}", path.display()))
}

#[derive(Serialize)]
struct QueryResult {
    query: String,
    goal: String,
    monomial: String,
    entailed: bool,
    witness_word: Option<String>,
    witness_ordering: Option<Vec<String>>,
    engine: &'static str,
    mode: &'static str,
    iterations: usize,
    ordering_checks: usize,
    prefix_checks: usize,
    wall_time_ms: f64,
}

fn prove(path: &Path, query: &str, args: &EngineArgs, json: bool) -> Result<bool> {
    let tbox = load(path)?;
    let (goal, vars) = parse_query(query)?;
    let m = Word(vars);
    let config = config(args.mode, args.engine.into(), args.max_iterations);
    let start = Instant::now();
    let e = Reasoner::new(&tbox).entails(&goal, &m, &config)?;
    let wall_time_ms = start.elapsed().as_secs_f64() * 1000.0;
    let result = QueryResult {
        query: query.to_string(),
        goal: goal.to_string(),
        monomial: m.to_string(),
        entailed: e.entailed,
        witness_word: e.witness.as_ref().map(|w| w.word.to_string()),
        witness_ordering: e
            .witness
            .as_ref()
            .map(|w| w.ordering.iter().map(|v| v.to_string()).collect()),
        engine: e.engine.name(),
        mode: e.mode.name(),
        iterations: e.iterations,
        ordering_checks: e.ordering_checks,
        prefix_checks: e.prefix_checks,
        wall_time_ms,
    };
    if json {
        println!("{}", serde_json::to_string_pretty(&result)?);
    } else {
        let verdict = if e.entailed {
            "entailed"
        } else {
            "not entailed"
        };
        println!(
            "{goal} : {m}  {verdict}  [{} {}, {} iterations, {} ordering checks, {:.1} ms]",
            result.engine, result.mode, e.iterations, e.ordering_checks, wall_time_ms
        );
        if let Some(w) = &e.witness {
            let order: Vec<String> = w.ordering.iter().map(|v| v.to_string()).collect();
            println!("witness {} with ordering ({})", w.word, order.join(","));
        }
    }
    Ok(e.entailed)
}

#[derive(Serialize)]
struct Listing {
    goal: String,
    mode: &'static str,
    count: usize,
    monomials: Vec<String>,
    truncated: bool,
}

fn list_monomials(
    path: &Path,
    goal: &str,
    mode: Mode,
    max_iterations: Option<usize>,
    limit: Option<usize>,
    json: bool,
) -> Result<()> {
    let tbox = load(path)?;
    let goal = parse_goal(goal)?;
    let set =
        Reasoner::new(&tbox).monomials(&goal, &config(mode, Engine::Saturation, max_iterations))?;
    let all = set.rendered();
    let count = all.len();
    let shown: Vec<String> = all.into_iter().take(limit.unwrap_or(usize::MAX)).collect();
    let truncated = shown.len() < count;
    if json {
        let listing = Listing {
            goal: goal.to_string(),
            mode: set.mode().name(),
            count,
            monomials: shown,
            truncated,
        };
        println!("{}", serde_json::to_string_pretty(&listing)?);
    } else {
        for m in &shown {
            println!("{m}");
        }
        if truncated {
            println!("... {} more", count - shown.len());
        }
    }
    Ok(())
}

fn dump_ara(
    path: &Path,
    goal: &str,
    format: Format,
    iterations: Option<usize>,
    mode: Mode,
) -> Result<()> {
    let tbox = load(path)?;
    let goal = WtaState::Axiom(parse_goal(goal)?);
    let ara = match iterations {
        Some(n) => build_ara_stack(&tbox, &goal, n),
        None => {
            (*Reasoner::new(&tbox).behaviour_ara(&goal, &config(mode, Engine::Ara, None))?).clone()
        }
    };
    match format {
        Format::Dot => print!("{}", ara.to_dot()),
        Format::Json => println!("{}", ara.to_json()),
    }
    Ok(())
}

fn table(path: &Path, mode: Mode, max_iterations: Option<usize>) -> Result<()> {
    let tbox = load(path)?;
    let table = saturate(&tbox, mode.into(), max_iterations);
    print!("{}", table.to_tsv());
    if table.is_truncated() {
        eprintln!(
            "warning: stopped after {} iterations without reaching the fixpoint",
            table.iterations()
        );
    }
    Ok(())
}

#[derive(Serialize)]
struct SwordReport {
    n: usize,
    axioms: usize,
    monomials: usize,
    iterations: usize,
    ara_states: usize,
    ara_components: usize,
    wall_time_ms: f64,
}

#[derive(Serialize)]
struct PowerReport {
    n: usize,
    states: usize,
    components: usize,
    /// `(k, accepted)` for `a^k` with `k` in `2ⁿ-1, 2ⁿ, 2ⁿ+1`.
    probes: Vec<(u64, bool)>,
    wall_time_ms: f64,
}

fn bench(family: Family, n: usize, out: Option<&Path>, json: bool) -> Result<()> {
    if n == 0 {
        bail!("n must be at least 1");
    }
    let start = Instant::now();
    match family {
        Family::Sword => {
            let text = families::sword_text(n);
            if let Some(out) = out {
                fs::write(out, &text).with_context(|| format!("cannot write {}", out.display()))?;
            }
            let tbox = parse_tbox(&text)?;
            let goal = WtaState::Axiom(parse_goal(&format!("A0 <= A{n}"))?);
            let config = EngineConfig::default();
            let mut reasoner = Reasoner::new(&tbox);
            let table = reasoner.table(&goal, &config)?;
            let ara = reasoner.behaviour_ara(&goal, &config)?;
            let report = SwordReport {
                n,
                axioms: tbox.len(),
                monomials: table.len_at(table.iterations(), &goal).unwrap_or(0),
                iterations: table.iterations(),
                ara_states: ara.size(),
                ara_components: ara.components().len(),
                wall_time_ms: start.elapsed().as_secs_f64() * 1000.0,
            };
            if json {
                println!("{}", serde_json::to_string_pretty(&report)?);
            } else {
                println!("sword T_{n}: {} axioms", report.axioms);
                println!("monomials of A0 <= A{n}: {}", report.monomials);
                println!("saturation iterations: {}", report.iterations);
                println!(
                    "ARA: {} states in {} components",
                    report.ara_states, report.ara_components
                );
            }
        }
        Family::Power => {
            if n > 24 {
                bail!("membership probes need words of length 2^n; n = {n} is too large");
            }
            let ara = power_family(n);
            if let Some(out) = out {
                fs::write(out, ara.to_json())
                    .with_context(|| format!("cannot write {}", out.display()))?;
            }
            let base = 1u64 << n;
            let probes = [base - 1, base, base + 1]
                .into_iter()
                .map(|k| Ok((k, ara.membership(&a_pow(&ara, k))?)))
                .collect::<Result<Vec<_>>>()?;
            let report = PowerReport {
                n,
                states: ara.size(),
                components: ara.components().len(),
                probes,
                wall_time_ms: start.elapsed().as_secs_f64() * 1000.0,
            };
            if json {
                println!("{}", serde_json::to_string_pretty(&report)?);
            } else {
                println!(
                    "power family A_{n}: {} states in {} components",
                    report.states, report.components
                );
                for (k, ok) in &report.probes {
                    println!("a^{k}: {}", if *ok { "accepted" } else { "rejected" });
                }
            }
        }
    }
    Ok(())
}

fn a_pow(ara: &Ara, k: u64) -> Word {
    let a = ara
        .alphabet()
        .iter()
        .next()
        .expect("power family reads `a`")
        .clone();
    Word(vec![a; k as usize])
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Prove {
            tbox,
            query,
            engine,
            json,
        } => prove(tbox, query, engine, *json).map(|entailed| if entailed { 0 } else { 1 }),
        Command::Monomials {
            tbox,
            goal,
            mode,
            max_iterations,
            limit,
            json,
        } => list_monomials(tbox, goal, *mode, *max_iterations, *limit, *json).map(|_| 0),
        Command::DumpAra {
            tbox,
            goal,
            format,
            iterations,
            mode,
        } => dump_ara(tbox, goal, *format, *iterations, *mode).map(|_| 0),
        Command::Table {
            tbox,
            mode,
            max_iterations,
        } => table(tbox, *mode, *max_iterations).map(|_| 0),
        Command::Bench {
            family,
            n,
            out,
            json,
        } => bench(*family, *n, out.as_deref(), *json).map(|_| 0),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
