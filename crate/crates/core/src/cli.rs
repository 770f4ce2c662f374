//! The `scgs` command-line interface.
//!
//! Exit codes: 0 success (and "yes" for `member`), 1 a negative answer,
//! 2 an inconclusive answer, 64 usage errors, 65 malformed or invalid
//! input, 70 internal failures. Error lines on stderr start with `error:`.

use std::collections::BTreeSet;
use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::engine::{self, format_word, EngineError, Language, SearchBudget, Verdict, Word};
use crate::fuzz::{random_kuroda, random_monotone, FuzzParams};
use crate::grammar::{parse_grammar, serialize_grammar, validate_grammar, MonotoneGrammar};
use crate::kuroda::{is_kuroda, to_kuroda};
use crate::par::{self, Execution};
use crate::system::{parse_system, serialize_system, validate_system, GrammarSystem};
use crate::transform::{reduce_to_degree2, rule_count_report, transform_with, TransformOptions};

pub const EXIT_NO: i32 = 1;
pub const EXIT_UNKNOWN: i32 = 2;
pub const EXIT_USAGE: i32 = 64;
pub const EXIT_DATA: i32 = 65;
pub const EXIT_INTERNAL: i32 = 70;

#[derive(Parser, Debug)]
#[command(name = "scgs", version, about = "Scattered-context CD grammar system toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct BudgetArgs {
    /// Longest sentential form explored.
    #[arg(long, default_value_t = 4)]
    max_len: usize,
    /// Cap on distinct sentential forms.
    #[arg(long, default_value_t = 2_000_000)]
    max_states: usize,
    /// Cap on forms inside one component activation.
    #[arg(long, default_value_t = 1_000_000)]
    max_closure: usize,
    /// Run single-threaded.
    #[arg(long)]
    sequential: bool,
}

impl BudgetArgs {
    fn budget(&self) -> Result<SearchBudget, Failure> {
        if self.max_states == 0 || self.max_closure == 0 {
            return Err(Failure::usage("budgets must be positive"));
        }
        Ok(SearchBudget {
            max_len: self.max_len,
            max_states: self.max_states,
            max_steps_per_closure: self.max_closure,
            execution: if self.sequential { Execution::Sequential } else { Execution::Parallel },
            ..SearchBudget::default()
        })
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check a grammar or grammar system.
    Validate { input: Option<PathBuf> },
    /// Convert a grammar to Kuroda normal form.
    Kuroda {
        input: Option<PathBuf>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Build the equivalent two-component grammar system.
    Transform {
        input: Option<PathBuf>,
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Reduce to scattered rules of degree at most two.
        #[arg(long)]
        degree2: bool,
        /// Leave stranded context-sensitive symbols unblocked.
        #[arg(long)]
        no_strand_blocking: bool,
        /// Print per-family rule counts to stderr.
        #[arg(long)]
        report: bool,
    },
    /// List the words up to a length, one per line.
    Enumerate {
        input: Option<PathBuf>,
        #[command(flatten)]
        budget: BudgetArgs,
    },
    /// Decide membership of a word (exit 0 yes, 1 no, 2 unknown).
    Member {
        input: PathBuf,
        word: String,
        #[arg(long)]
        trace: bool,
        #[arg(long, default_value_t = 2_000_000)]
        max_states: usize,
        #[arg(long)]
        sequential: bool,
    },
    /// Compare two bounded languages.
    Equiv {
        left: PathBuf,
        right: PathBuf,
        #[command(flatten)]
        budget: BudgetArgs,
    },
    /// Run the invariant checks on a grammar system.
    Claims {
        input: Option<PathBuf>,
        #[command(flatten)]
        budget: BudgetArgs,
    },
    /// Differential test of the whole pipeline on random grammars.
    Fuzz {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 25)]
        count: u64,
        #[arg(long, default_value_t = 4)]
        max_len: usize,
        /// Draw general monotone grammars instead of Kuroda ones.
        #[arg(long)]
        monotone: bool,
    },
}

struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn usage(m: impl Into<String>) -> Self {
        Failure { code: EXIT_USAGE, message: m.into() }
    }

    fn data(m: impl ToString) -> Self {
        Failure { code: EXIT_DATA, message: m.to_string() }
    }
}

impl From<EngineError> for Failure {
    fn from(e: EngineError) -> Self {
        let code = match e {
            EngineError::InvalidGrammar(_) | EngineError::InvalidSystem(_) | EngineError::UnknownTerminal(_) => EXIT_DATA,
            _ => EXIT_INTERNAL,
        };
        Failure { code, message: e.to_string() }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure { code: EXIT_INTERNAL, message: e.to_string() }
    }
}

/// Either input format.
enum Input {
    Grammar(MonotoneGrammar),
    System(GrammarSystem),
}

impl Input {
    fn terminals(&self) -> BTreeSet<crate::symbol::Name> {
        match self {
            Input::Grammar(g) => g.terminal_set(),
            Input::System(s) => s.terminal_set(),
        }
    }

    fn enumerate(&self, budget: &SearchBudget) -> Result<Language, Failure> {
        Ok(match self {
            Input::Grammar(g) => engine::enumerate_csg_language(g, budget)?,
            Input::System(s) => engine::enumerate_language(s, budget)?,
        })
    }
}

fn is_system_text(text: &str) -> bool {
    text.lines().any(|l| l.trim_start().starts_with("component"))
}

struct Io<'a> {
    stdin: &'a mut dyn Read,
    out: &'a mut dyn Write,
    err: &'a mut dyn Write,
}

impl Io<'_> {
    fn read(&mut self, path: Option<&Path>) -> Result<String, Failure> {
        match path {
            Some(p) if p != Path::new("-") => {
                fs::read_to_string(p).map_err(|e| Failure::usage(format!("cannot read {}: {e}", p.display())))
            }
            _ => {
                let mut s = String::new();
                self.stdin.read_to_string(&mut s)?;
                Ok(s)
            }
        }
    }

    fn input(&mut self, path: Option<&Path>) -> Result<Input, Failure> {
        let text = self.read(path)?;
        if is_system_text(&text) {
            parse_system(&text).map(Input::System).map_err(Failure::data)
        } else {
            parse_grammar(&text).map(Input::Grammar).map_err(Failure::data)
        }
    }

    fn grammar(&mut self, path: Option<&Path>) -> Result<MonotoneGrammar, Failure> {
        match self.input(path)? {
            Input::Grammar(g) => Ok(g),
            Input::System(_) => Err(Failure::data("expected a grammar, found a grammar system")),
        }
    }

    fn system(&mut self, path: Option<&Path>) -> Result<GrammarSystem, Failure> {
        match self.input(path)? {
            Input::System(s) => Ok(s),
            Input::Grammar(_) => Err(Failure::data("expected a grammar system, found a grammar")),
        }
    }

    fn emit(&mut self, text: &str, output: Option<&Path>) -> Result<(), Failure> {
        match output {
            Some(p) => fs::write(p, text).map_err(|e| Failure::usage(format!("cannot write {}: {e}", p.display()))),
            None => Ok(self.out.write_all(text.as_bytes())?),
        }
    }
}

/// Runs the CLI on `argv` (program name first) and returns the exit code.
pub fn run<I, S>(argv: I, stdin: &mut dyn Read, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => EXIT_USAGE,
            };
            let _ = if code == 0 { write!(stdout, "{e}") } else { write!(stderr, "{e}") };
            return code;
        }
    };
    let mut io = Io { stdin, out: stdout, err: stderr };
    match dispatch(cli.command, &mut io) {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(io.err, "error: {}", f.message);
            f.code
        }
    }
}

/// Applies `SCGS_THREADS` when it holds a positive integer.
pub fn configure_threads_from_env() -> Result<(), String> {
    match std::env::var("SCGS_THREADS") {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => {
                par::init_threads(n);
                Ok(())
            }
            _ => Err(format!("SCGS_THREADS must be a positive integer, got `{v}`")),
        },
        Err(_) => Ok(()),
    }
}

fn dispatch(cmd: Command, io: &mut Io<'_>) -> Result<i32, Failure> {
    match cmd {
        Command::Validate { input } => validate(io, input.as_deref()),
        Command::Kuroda { input, output } => {
            let g = io.grammar(input.as_deref())?;
            let k = to_kuroda(&g).map_err(Failure::data)?;
            writeln!(io.err, "{} rules -> {} rules", g.rules.len(), k.rules.len())?;
            io.emit(&serialize_grammar(&k), output.as_deref())?;
            Ok(0)
        }
        Command::Transform { input, output, degree2, no_strand_blocking, report } => {
            let g = io.grammar(input.as_deref())?;
            if !is_kuroda(&g) && validate_grammar(&g).is_empty() {
                writeln!(io.err, "note: converted to Kuroda normal form first")?;
            }
            let opts = TransformOptions { strand_blocking: !no_strand_blocking };
            let mut sys = transform_with(&g, opts).map_err(Failure::data)?;
            if degree2 {
                sys = reduce_to_degree2(&sys).map_err(Failure::data)?;
            }
            if report {
                writeln!(io.err, "{}", rule_count_report(&sys))?;
            }
            io.emit(&serialize_system(&sys), output.as_deref())?;
            Ok(0)
        }
        Command::Enumerate { input, budget } => {
            let budget = budget.budget()?;
            let input = io.input(input.as_deref())?;
            let lang = input.enumerate(&budget)?;
            for w in lang.formatted() {
                writeln!(io.out, "{w}")?;
            }
            writeln!(io.err, "truncated: {}", lang.truncated)?;
            Ok(0)
        }
        Command::Member { input, word, trace, max_states, sequential } => {
            let budget = BudgetArgs { max_len: 0, max_states, max_closure: 1_000_000, sequential }.budget()?;
            let input = io.input(Some(&input))?;
            let word = engine::parse_word(&word, &input.terminals())?;
            let m = match &input {
                Input::Grammar(g) => engine::is_csg_member(g, &word, &budget)?,
                Input::System(s) => engine::is_member(s, &word, &budget)?,
            };
            let (text, code) = match m.verdict {
                Verdict::Yes => ("yes", 0),
                Verdict::No => ("no", EXIT_NO),
                Verdict::Unknown => ("unknown", EXIT_UNKNOWN),
            };
            writeln!(io.out, "{text}")?;
            if let (true, Some(t)) = (trace, &m.trace) {
                write!(io.out, "{t}")?;
            }
            Ok(code)
        }
        Command::Equiv { left, right, budget } => {
            let budget = budget.budget()?;
            let a = io.input(Some(&left))?.enumerate(&budget)?;
            let b = io.input(Some(&right))?.enumerate(&budget)?;
            equiv(io, &a, &b)
        }
        Command::Claims { input, budget } => {
            let budget = budget.budget()?;
            let sys = io.system(input.as_deref())?;
            let reports = [
                engine::check_mark_invariant(&sys, &budget)?,
                engine::check_terminal_phase(&sys, &budget)?,
                engine::check_single_simulation(&sys, &budget)?,
                engine::check_second_component(&sys, &budget)?,
            ];
            for r in &reports {
                writeln!(io.out, "{r}")?;
            }
            Ok(if reports.iter().all(|r| r.holds()) { 0 } else { EXIT_NO })
        }
        Command::Fuzz { seed, count, max_len, monotone } => fuzz(io, seed, count, max_len, monotone),
    }
}

fn validate(io: &mut Io<'_>, path: Option<&Path>) -> Result<i32, Failure> {
    let problems: Vec<String> = match io.input(path)? {
        Input::Grammar(g) => validate_grammar(&g).iter().map(|v| v.to_string()).collect(),
        Input::System(s) => validate_system(&s),
    };
    if problems.is_empty() {
        writeln!(io.out, "ok")?;
        return Ok(0);
    }
    for p in &problems {
        writeln!(io.out, "{p}")?;
    }
    Err(Failure::data(format!("{} violation(s)", problems.len())))
}

fn braces(words: &BTreeSet<Word>) -> String {
    let w: Vec<String> = words.iter().map(|w| format_word(w)).collect();
    format!("{{{}}}", w.join(", "))
}

fn equiv(io: &mut Io<'_>, a: &Language, b: &Language) -> Result<i32, Failure> {
    if a.words == b.words {
        if a.truncated || b.truncated {
            writeln!(io.out, "UNKNOWN (truncated; common words {})", braces(&a.words))?;
            return Ok(EXIT_UNKNOWN);
        }
        writeln!(io.out, "EQUAL ({})", braces(&a.words))?;
        return Ok(0);
    }
    writeln!(io.out, "DIFFERENT")?;
    for w in a.words.difference(&b.words) {
        writeln!(io.out, "< {}", format_word(w))?;
    }
    for w in b.words.difference(&a.words) {
        writeln!(io.out, "> {}", format_word(w))?;
    }
    Ok(EXIT_NO)
}

fn fuzz(io: &mut Io<'_>, seed: u64, count: u64, max_len: usize, monotone: bool) -> Result<i32, Failure> {
    if max_len > 5 {
        return Err(Failure::usage("fuzz runs are limited to --max-len 5"));
    }
    let params = FuzzParams::default();
    let budget = SearchBudget::with_max_len(max_len);
    let mut failures = 0;
    for s in seed..seed.saturating_add(count) {
        let g = if monotone { random_monotone(s, &params) } else { random_kuroda(s, &params) };
        let source = engine::enumerate_csg_language(&g, &budget)?;
        let sys = transform_with(&g, TransformOptions::default()).map_err(Failure::data)?;
        let full = engine::enumerate_language(&sys, &budget)?;
        let reduced = engine::enumerate_language(&reduce_to_degree2(&sys).map_err(Failure::data)?, &budget)?;
        let truncated = source.truncated || full.truncated || reduced.truncated;
        let ok = !truncated && source.words == full.words && full.words == reduced.words;
        let verdict = if ok { "ok" } else if truncated { "truncated" } else { "MISMATCH" };
        writeln!(io.out, "seed {s}: {verdict} {}", braces(&source.words))?;
        if !ok {
            failures += 1;
            write!(io.err, "{}", serialize_grammar(&g))?;
        }
    }
    writeln!(io.out, "{} of {count} grammars agree", count - failures)?;
    Ok(if failures == 0 { 0 } else { EXIT_NO })
}
