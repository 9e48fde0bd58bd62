use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use pwd_core::{Grammar, MemoMode, NullabilityMode, ParserConfig};
use serde_json::json;

#[derive(Parser)]
#[command(name = "pwd", version, about = "Parse token files with derivatives of context-free grammars")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    variant: Variant,
}

#[derive(Subcommand)]
enum Command {
    /// Print `accept` or `reject`; exit 0 on accept, 1 on reject.
    Recognize { grammar: PathBuf, tokens: PathBuf },
    /// Print the parse forest as JSON.
    Parse {
        grammar: PathBuf,
        tokens: PathBuf,
        /// Print the number of parse trees instead of the forest.
        #[arg(long)]
        count: bool,
    },
    /// Time every token file in a directory and print one CSV row per file.
    Bench {
        grammar: PathBuf,
        corpus: PathBuf,
        #[arg(long, default_value_t = 10)]
        rounds: u32,
        #[arg(long, default_value_t = 3)]
        warmup: u32,
        /// Minimum duration of one measured round, in seconds.
        #[arg(long, default_value_t = 1.0)]
        round_secs: f64,
    },
    /// Print grammar size and, given a token file, the counters of one parse.
    Stats {
        grammar: PathBuf,
        tokens: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
}

#[derive(Args)]
struct Variant {
    #[arg(long, global = true, value_enum, default_value_t = Memo::Single)]
    memo: Memo,
    #[arg(long, global = true, value_enum, default_value_t = Switch::On)]
    compaction: Switch,
    #[arg(long, global = true, value_enum, default_value_t = Nullability::Optimized)]
    nullability: Nullability,
    /// Name derived nodes and check the naming rules on every memo hit.
    #[arg(long, global = true)]
    debug_names: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum Memo {
    Single,
    Full,
}

#[derive(Clone, Copy, ValueEnum)]
enum Switch {
    On,
    Off,
}

#[derive(Clone, Copy, ValueEnum)]
enum Nullability {
    Optimized,
    Naive,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

impl Variant {
    fn config(&self) -> ParserConfig {
        ParserConfig {
            memo: match self.memo {
                Memo::Single => MemoMode::SingleEntry,
                Memo::Full => MemoMode::FullMap,
            },
            compaction: matches!(self.compaction, Switch::On),
            nullability: match self.nullability {
                Nullability::Optimized => NullabilityMode::Optimized,
                Nullability::Naive => NullabilityMode::Naive,
            },
            debug_names: self.debug_names,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    // Derivation recurses along the grammar graph, which grows with the input.
    let outcome = std::thread::Builder::new()
        .stack_size(1 << 30)
        .spawn(move || run(cli))
        .expect("spawn parser thread")
        .join();
    match outcome {
        Ok(Ok(code)) => code,
        Ok(Err(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(_) => ExitCode::from(2),
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    let config = cli.variant.config();
    match cli.command {
        Command::Recognize { grammar, tokens } => {
            let mut g = load_grammar(&grammar, config)?;
            let toks = load_tokens(&tokens)?;
            let accepted = g.recognize(&toks);
            report_names(&g);
            println!("{}", if accepted { "accept" } else { "reject" });
            Ok(ExitCode::from(if accepted { 0 } else { 1 }))
        }
        Command::Parse { grammar, tokens, count } => {
            let mut g = load_grammar(&grammar, config)?;
            let toks = load_tokens(&tokens)?;
            let forest = g.parse(&toks);
            if count {
                println!("{}", forest.count());
            } else {
                println!("{}", serde_json::to_string_pretty(&forest.to_json())?);
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Bench { grammar, corpus, rounds, warmup, round_secs } => {
            if rounds == 0 {
                bail!("--rounds must be at least 1");
            }
            let mut g = load_grammar(&grammar, config)?;
            let timing = Timing {
                rounds,
                warmup,
                round: Duration::from_secs_f64(round_secs.max(0.0)),
            };
            bench(&mut g, &corpus, timing)
        }
        Command::Stats { grammar, tokens, format } => {
            let mut g = load_grammar(&grammar, config)?;
            stats(&mut g, tokens.as_deref(), format)?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn load_grammar(path: &Path, config: ParserConfig) -> Result<Grammar> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Grammar::load_with(&text, config).with_context(|| format!("{}", path.display()))
}

fn load_tokens(path: &Path) -> Result<Vec<String>> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    let text = String::from_utf8(bytes)
        .with_context(|| format!("{}: token file is not valid UTF-8", path.display()))?;
    Ok(text.split_whitespace().map(String::from).collect())
}

fn report_names(g: &Grammar) {
    if let Some(names) = g.names() {
        eprintln!(
            "names: {} assigned, {} memo hits checked, {} mismatches, {} double bullets",
            names.iter().count(),
            names.checked_hits,
            names.mismatches,
            names.double_bullets
        );
    }
}

#[derive(Clone, Copy)]
struct Timing {
    rounds: u32,
    warmup: u32,
    round: Duration,
}

fn bench(g: &mut Grammar, corpus: &Path, timing: Timing) -> Result<ExitCode> {
    let mut files: Vec<PathBuf> = fs::read_dir(corpus)
        .with_context(|| format!("reading {}", corpus.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file())
        .collect();
    files.sort();

    let mut out = csv::Writer::from_writer(io::stdout());
    out.write_record([
        "file",
        "tokens",
        "nodes_created",
        "derive_cached",
        "derive_uncached",
        "nullable_visits",
        "compactions",
        "seconds_per_token",
        "accepted",
        "parse_count",
    ])?;
    out.flush()?;
    let mut failures = 0;
    for path in &files {
        let name = path.file_name().unwrap_or_default().to_string_lossy().into_owned();
        match bench_file(g, path, timing) {
            Ok(row) => {
                out.write_record(std::iter::once(name).chain(row))?;
                out.flush()?;
            }
            Err(e) => {
                failures += 1;
                eprintln!("error: {e:#}");
            }
        }
    }
    io::stdout().flush()?;
    Ok(ExitCode::from(if failures == 0 { 0 } else { 2 }))
}

fn bench_file(g: &mut Grammar, path: &Path, timing: Timing) -> Result<Vec<String>> {
    let toks = load_tokens(path)?;
    for _ in 0..timing.warmup {
        g.parse_set(&toks);
    }
    let mut per_parse = 0.0;
    for _ in 0..timing.rounds {
        let start = Instant::now();
        let mut parses = 0u32;
        loop {
            g.parse_set(&toks);
            parses += 1;
            if start.elapsed() >= timing.round {
                break;
            }
        }
        per_parse += start.elapsed().as_secs_f64() / f64::from(parses);
    }
    per_parse /= f64::from(timing.rounds);

    let forest = g.parse(&toks);
    let accepted = !forest.is_empty();
    let count = forest.count();
    let c = g.counters();
    Ok(vec![
        toks.len().to_string(),
        c.nodes_created.total().to_string(),
        c.derive_calls_cached.to_string(),
        c.derive_calls_uncached.to_string(),
        c.nullable_visits.to_string(),
        c.compaction_firings.total().to_string(),
        format!("{:e}", per_parse / toks.len().max(1) as f64),
        accepted.to_string(),
        count.to_string(),
    ])
}

fn stats(g: &mut Grammar, tokens: Option<&Path>, format: Format) -> Result<()> {
    let Some(path) = tokens else {
        let nonterminals: Vec<&str> = g.nonterminals().map(|(n, _)| n).collect();
        match format {
            Format::Json => println!(
                "{}",
                serde_json::to_string_pretty(&json!({
                    "nonterminals": nonterminals,
                    "nodes": g.initial_len(),
                }))?
            ),
            Format::Csv => println!("nonterminals,nodes\n{},{}", nonterminals.len(), g.initial_len()),
        }
        return Ok(());
    };
    let toks = load_tokens(path)?;
    let forest = g.parse(&toks);
    let (accepted, count) = (!forest.is_empty(), forest.count());
    let counters = g.counters().snapshot();
    match format {
        Format::Json => {
            let mut value = json!({
                "tokens": toks.len(),
                "accepted": accepted,
                "parse_count": count.to_string(),
                "grammar_nodes": g.initial_len(),
                "counters": counters,
            });
            if let Some(names) = g.names() {
                value["names"] = json!({
                    "assigned": names.iter().count(),
                    "checked_hits": names.checked_hits,
                    "mismatches": names.mismatches,
                    "double_bullets": names.double_bullets,
                });
            }
            println!("{}", serde_json::to_string_pretty(&value)?);
        }
        Format::Csv => print!("{}", counters.emit("csv")?),
    }
    Ok(())
}
