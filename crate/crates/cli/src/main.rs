mod commands;
mod load;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

/// Trace rewriting with level-regular contexts: Foata normal forms,
/// automatic presentations, first-order checks and GTRS exploration.
///
/// Inputs given as `builtin:NAME` load a built-in example instead of a file.
#[derive(Parser)]
#[command(name = "tracerw", version)]
struct Cli {
    /// Print one JSON document instead of text.
    #[arg(long, global = true)]
    json: bool,
    /// Cap on states built by one automaton construction
    /// (default from TRACERW_STATE_BUDGET, else 1000000).
    #[arg(long, global = true, value_name = "N")]
    state_budget: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Foata normal form of a word.
    Foata { alphabet: String, word: String },
    /// Whether two words denote the same trace.
    Eq { alphabet: String, u: String, v: String },
    #[command(subcommand)]
    Rtl(RtlCommand),
    #[command(subcommand)]
    Fo(FoCommand),
    /// RTL system of the unfolding of a concurrent automaton.
    Unfold {
        automaton: String,
        /// Extra edge families, as NAME=LANG with LANG a language file.
        #[arg(long = "rec", value_name = "NAME=LANG")]
        rec: Vec<String>,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Event-structure query on a recognizable language.
    Es {
        language: String,
        /// `prime T`, `le T U`, `conflict T U` or `label A T`.
        #[arg(long)]
        query: String,
    },
    #[command(subcommand)]
    Gtrs(GtrsCommand),
    #[command(subcommand)]
    Minsky(MinskyCommand),
    #[command(subcommand)]
    Export(ExportCommand),
    /// Write a built-in example as a JSON document.
    Builtin {
        /// alphabet, rtl, automaton, language, gtrs, graph or minsky.
        kind: String,
        name: String,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Randomized cross-checks of the compiler against its oracles.
    Selftest {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 10)]
        cases: usize,
    },
}

#[derive(Subcommand)]
enum RtlCommand {
    /// Compile to a presentation bundle directory.
    Compile {
        system: String,
        #[arg(long, short)]
        out: PathBuf,
        #[arg(long)]
        stats: bool,
    },
    /// Edges between traces of at most N letters.
    Edges {
        system: String,
        #[arg(long)]
        bound: usize,
        /// Compare with the brute-force rewriting oracle.
        #[arg(long)]
        oracle: bool,
    },
    /// Successor set of a trace along one label.
    Successors {
        bundle: String,
        trace: String,
        label: String,
        /// Number of sample successors to list.
        #[arg(long, default_value_t = 10)]
        samples: usize,
    },
}

#[derive(Subcommand)]
enum FoCommand {
    /// Decide a sentence, or find a satisfying assignment of a formula.
    Check {
        bundle: String,
        /// Formula text or a file containing it.
        formula: String,
        #[arg(long)]
        witness: bool,
    },
}

#[derive(Subcommand)]
enum GtrsCommand {
    /// Breadth-first fragment of the configuration graph.
    Explore {
        system: String,
        #[arg(long)]
        budget: usize,
        #[arg(long)]
        dot: Option<PathBuf>,
        /// Write the fragment as a graph document.
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Components left after removing edges at terms smaller than K.
    Decompose {
        system: String,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        budget: usize,
        /// Count components cut by the budget in the signature table.
        #[arg(long)]
        include_truncated: bool,
        /// Write the fragment as DOT, frontier vertices double-circled.
        #[arg(long)]
        dot: Option<PathBuf>,
    },
    /// The graph tree of a finite graph, cut at a copy depth.
    Tree(TreeArgs),
}

#[derive(Args)]
struct TreeArgs {
    graph: String,
    #[arg(long)]
    root: String,
    #[arg(long)]
    depth: usize,
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum MinskyCommand {
    /// RTL system of a two-counter machine.
    Compile {
        machine: String,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Bounded search for a halting run.
    Run {
        machine: String,
        #[arg(long)]
        budget: usize,
    },
}

#[derive(Subcommand)]
enum ExportCommand {
    /// DOT text of a graph document, or of a bundle's edges up to a bound.
    Dot {
        input: String,
        #[arg(long, default_value_t = 3)]
        bound: usize,
    },
}

/// What a command produced.
pub struct Outcome {
    pub text: String,
    pub json: serde_json::Value,
    pub code: u8,
}

impl Outcome {
    pub fn ok(text: impl Into<String>, json: serde_json::Value) -> Self {
        Outcome { text: text.into(), json, code: 0 }
    }
}

fn run(command: Command) -> tracerw::Result<(&'static str, Outcome)> {
    use commands as c;
    Ok(match command {
        Command::Foata { alphabet, word } => ("foata", c::foata(&alphabet, &word)?),
        Command::Eq { alphabet, u, v } => ("eq", c::eq(&alphabet, &u, &v)?),
        Command::Rtl(RtlCommand::Compile { system, out, stats }) => ("rtl compile", c::rtl_compile(&system, &out, stats)?),
        Command::Rtl(RtlCommand::Edges { system, bound, oracle }) => ("rtl edges", c::rtl_edges(&system, bound, oracle)?),
        Command::Rtl(RtlCommand::Successors { bundle, trace, label, samples }) => {
            ("rtl successors", c::rtl_successors(&bundle, &trace, &label, samples)?)
        }
        Command::Fo(FoCommand::Check { bundle, formula, witness }) => ("fo check", c::fo_check(&bundle, &formula, witness)?),
        Command::Unfold { automaton, rec, out } => ("unfold", c::unfold(&automaton, &rec, out.as_deref())?),
        Command::Es { language, query } => ("es", c::es(&language, &query)?),
        Command::Gtrs(GtrsCommand::Explore { system, budget, dot, out }) => {
            ("gtrs explore", c::gtrs_explore(&system, budget, dot.as_deref(), out.as_deref())?)
        }
        Command::Gtrs(GtrsCommand::Decompose { system, n, budget, include_truncated, dot }) => {
            ("gtrs decompose", c::gtrs_decompose(&system, n, budget, include_truncated, dot.as_deref())?)
        }
        Command::Gtrs(GtrsCommand::Tree(t)) => ("gtrs tree", c::gtrs_tree(&t.graph, &t.root, t.depth, t.out.as_deref())?),
        Command::Minsky(MinskyCommand::Compile { machine, out }) => ("minsky compile", c::minsky_compile(&machine, out.as_deref())?),
        Command::Minsky(MinskyCommand::Run { machine, budget }) => ("minsky run", c::minsky_run(&machine, budget)?),
        Command::Export(ExportCommand::Dot { input, bound }) => ("export dot", c::export_dot(&input, bound)?),
        Command::Builtin { kind, name, out } => ("builtin", c::builtin(&kind, &name, out.as_deref())?),
        Command::Selftest { seed, cases } => ("selftest", c::selftest(seed, cases)?),
    })
}

/// Prints to stdout; a closed pipe is not an error.
fn emit(text: &str) {
    let _ = writeln!(std::io::stdout().lock(), "{text}");
}

fn main() -> ExitCode {
    // usage errors are parse errors (exit 1), not clap's default 2
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    if let Some(n) = cli.state_budget {
        tracerw::limits::set_state_budget(n);
    }
    let start = Instant::now();
    match run(cli.command) {
        Ok((name, out)) => {
            if cli.json {
                let doc = json!({
                    "command": name,
                    "exit_code": out.code,
                    "result": out.json,
                    "elapsed_ms": start.elapsed().as_millis() as u64,
                });
                emit(&serde_json::to_string_pretty(&doc).expect("json value"));
            } else if !out.text.is_empty() {
                emit(out.text.trim_end());
            }
            ExitCode::from(out.code)
        }
        Err(e) => {
            if cli.json {
                let doc = json!({
                    "error": { "kind": e.kind(), "message": e.to_string() },
                    "exit_code": e.exit_code(),
                });
                emit(&serde_json::to_string_pretty(&doc).expect("json value"));
            } else {
                eprintln!("error: {e}");
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
