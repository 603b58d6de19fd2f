//! Command-line front end: generate streams from Markov chains, run the
//! limit monitors over streams, solve stationary distributions, and run
//! the statistical lab experiments.
//!
//! Exit codes: 0 ok, 1 usage error, 2 validation error, 3 internal error.

use std::io::{Read, Write};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};

use freqmon::error::Error;
use freqmon::formula::parse_formula;
use freqmon::lab;
use freqmon::markov::MarkovChain;
use freqmon::monitor::{run_monitor, MonitorKind};
use freqmon::{Alphabet, Word};

#[derive(Parser)]
#[command(name = "freqmon", version, about = "Limit monitoring of frequency statistics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a symbol stream from a Markov chain spec
    Generate {
        /// Path to the chain-spec JSON file
        #[arg(long)]
        chain: String,
        /// Number of symbols to emit
        #[arg(long)]
        steps: usize,
        /// PRNG seed (required: no wall-clock default)
        #[arg(long)]
        seed: u64,
        /// Emit CSV "step,state,symbol" instead of bare symbols
        #[arg(long)]
        states: bool,
    },
    /// Stream a word through a monitor, printing CSV "pos,input,output"
    Monitor {
        /// mode | median | naive-mode | formula
        #[arg(long)]
        algorithm: String,
        /// Frequency formula (required iff algorithm=formula)
        #[arg(long)]
        formula: Option<String>,
        /// Comma-separated alphabet in order; required for median unless
        /// the input order is meant
        #[arg(long)]
        order: Option<String>,
        /// Input file of whitespace-separated symbols, or "-" for stdin
        #[arg(long, default_value = "-")]
        input: String,
    },
    /// Print the exact stationary analysis of a chain as CSV
    Stationary {
        #[arg(long)]
        chain: String,
    },
    /// Run a lab experiment and write its CSV series
    Lab {
        #[command(subcommand)]
        experiment: LabCommand,
    },
}

#[derive(Args)]
struct OutArg {
    /// Output CSV path, or "-" for stdout
    #[arg(long, default_value = "-")]
    out: String,
}

#[derive(Subcommand)]
enum LabCommand {
    /// Prefix letter frequencies of one sampled (or supplied) word
    Prefix {
        #[arg(long)]
        chain: String,
        #[arg(long)]
        sigma: String,
        #[arg(long)]
        steps: usize,
        #[arg(long)]
        seed: Option<u64>,
        /// Bypass sampling: read the word from this file
        #[arg(long)]
        word: Option<String>,
        #[command(flatten)]
        out: OutArg,
    },
    /// Chunk letter frequencies under the s(n) = n(n-1)/2 schedule
    Infix {
        #[arg(long)]
        chain: String,
        #[arg(long)]
        sigma: String,
        #[arg(long)]
        levels: u64,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        word: Option<String>,
        #[command(flatten)]
        out: OutArg,
    },
    /// Triangular-array law of large numbers over a finite distribution
    Lln {
        /// Distribution as "value:prob,value:prob,..."
        #[arg(long)]
        dist: String,
        #[arg(long)]
        levels: u64,
        #[arg(long)]
        seed: u64,
        #[command(flatten)]
        out: OutArg,
    },
    /// First-visit time to a state within each chunk, divided by length
    FirstVisit {
        #[arg(long)]
        chain: String,
        #[arg(long)]
        state: String,
        #[arg(long)]
        levels: u64,
        #[arg(long)]
        seed: u64,
        #[command(flatten)]
        out: OutArg,
    },
    /// Empirical mode probability vs. the geometric convergence bound
    ModeRate {
        #[arg(long)]
        pa: f64,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        trials: usize,
        #[arg(long)]
        seed: u64,
        #[command(flatten)]
        out: OutArg,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // help/version requests are not errors
            use clap::error::ErrorKind;
            let kind = e.kind();
            let _ = e.print();
            return if matches!(kind, ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("freqmon: {e}");
            match e {
                Error::Internal(_) | Error::DeterminismViolation { .. } => ExitCode::from(3),
                _ => ExitCode::from(2),
            }
        }
    }
}

fn read_file(path: &str) -> freqmon::Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Io { path: path.to_string(), source: e })
}

fn read_input(path: &str) -> freqmon::Result<String> {
    if path == "-" {
        let mut buf = String::new();
        std::io::stdin()
            .read_to_string(&mut buf)
            .map_err(|e| Error::Io { path: "<stdin>".to_string(), source: e })?;
        Ok(buf)
    } else {
        read_file(path)
    }
}

fn load_chain(path: &str) -> freqmon::Result<MarkovChain> {
    MarkovChain::parse(&read_file(path)?)
}

fn write_series(series: &lab::Series, out: &str) -> freqmon::Result<()> {
    if out == "-" {
        let stdout = std::io::stdout();
        lab::emit_csv(series, stdout.lock())
            .map_err(|e| Error::Io { path: "<stdout>".to_string(), source: e })
    } else {
        lab::emit_csv_to_path(series, out)
    }
}

/// Alphabet for monitoring: an explicit --order wins; otherwise symbols are
/// interned in first-appearance order from the input (plus any symbols that
/// only occur in the formula).
fn infer_alphabet(
    order: &Option<String>,
    tokens: &[&str],
    formula: &Option<String>,
    ordered: bool,
) -> freqmon::Result<Arc<Alphabet>> {
    if let Some(order) = order {
        let names: Vec<String> = order.split(',').map(|s| s.trim().to_string()).collect();
        return Alphabet::new(names, ordered);
    }
    let mut names: Vec<String> = Vec::new();
    for t in tokens {
        if !names.iter().any(|n| n == t) {
            names.push(t.to_string());
        }
    }
    if let Some(text) = formula {
        // pre-scan f(...) occurrences so formula-only symbols are known
        let mut rest = text.as_str();
        while let Some(p) = rest.find("f(") {
            rest = &rest[p + 2..];
            if let Some(close) = rest.find(')') {
                let name = rest[..close].trim().to_string();
                if !name.is_empty() && !names.iter().any(|n| n == &name) {
                    names.push(name);
                }
                rest = &rest[close..];
            }
        }
    }
    if names.is_empty() {
        return Err(Error::InvalidAlphabet("empty input and no --order given".into()));
    }
    Alphabet::new(names, ordered)
}

fn run(cli: Cli) -> freqmon::Result<()> {
    match cli.command {
        Command::Generate { chain, steps, seed, states } => {
            let m = load_chain(&chain)?;
            let trace = m.sample(steps, seed);
            let stdout = std::io::stdout();
            let mut out = stdout.lock();
            let io_err = |e| Error::Io { path: "<stdout>".to_string(), source: e };
            if states {
                writeln!(out, "step,state,symbol").map_err(io_err)?;
                for (i, &q) in trace.states.iter().enumerate() {
                    writeln!(
                        out,
                        "{},{},{}",
                        i + 1,
                        m.states()[q],
                        m.alphabet().name(trace.word.at(i + 1))
                    )
                    .map_err(io_err)?;
                }
            } else if !trace.is_empty() {
                writeln!(out, "{}", trace.word).map_err(io_err)?;
            }
            Ok(())
        }
        Command::Monitor { algorithm, formula, order, input } => {
            let text = read_input(&input)?;
            let tokens: Vec<&str> = text.split_whitespace().collect();
            if tokens.is_empty() {
                return Err(Error::EmptyWord);
            }
            let needs_order = algorithm == "median";
            let alphabet = infer_alphabet(&order, &tokens, &formula, needs_order || order.is_some())?;
            let word = Word::parse(alphabet.clone(), &text)?;
            let kind = match algorithm.as_str() {
                "mode" => MonitorKind::Mode,
                "median" => {
                    if order.is_none() {
                        return Err(Error::UnorderedAlphabet);
                    }
                    MonitorKind::Median
                }
                "naive-mode" => MonitorKind::NaiveMode,
                "formula" => {
                    let text = formula.ok_or_else(|| {
                        Error::InvalidAlphabet("--formula is required for algorithm=formula".into())
                    })?;
                    MonitorKind::Formula(parse_formula(&text, &alphabet)?)
                }
                other => {
                    return Err(Error::InvalidAlphabet(format!("unknown algorithm `{other}`")));
                }
            };
            let outputs = run_monitor(&kind, &word)?;
            let stdout = std::io::stdout();
            let mut out = stdout.lock();
            let io_err = |e| Error::Io { path: "<stdout>".to_string(), source: e };
            writeln!(out, "pos,input,output").map_err(io_err)?;
            for (i, o) in outputs.iter().enumerate() {
                writeln!(out, "{},{},{}", i + 1, tokens[i], o).map_err(io_err)?;
            }
            Ok(())
        }
        Command::Stationary { chain } => {
            let m = load_chain(&chain)?;
            let a = m.stationary()?;
            let stdout = std::io::stdout();
            let mut out = stdout.lock();
            let io_err = |e| Error::Io { path: "<stdout>".to_string(), source: e };
            writeln!(out, "kind,name,value").map_err(io_err)?;
            for (name, v) in &a.state_frequency {
                writeln!(out, "state,{name},{v:.16e}").map_err(io_err)?;
            }
            for (name, v) in &a.return_time {
                writeln!(out, "return,{name},{v:.16e}").map_err(io_err)?;
            }
            for (name, v) in &a.letter_frequency {
                writeln!(out, "letter,{name},{v:.16e}").map_err(io_err)?;
            }
            Ok(())
        }
        Command::Lab { experiment } => run_lab(experiment),
    }
}

fn need_seed(seed: Option<u64>, word: &Option<String>) -> freqmon::Result<u64> {
    match (seed, word) {
        (Some(s), _) => Ok(s),
        (None, Some(_)) => Ok(0), // no sampling happens
        (None, None) => Err(Error::InvalidDistribution(
            "--seed is required when sampling (no wall-clock default)".into(),
        )),
    }
}

fn run_lab(cmd: LabCommand) -> freqmon::Result<()> {
    match cmd {
        LabCommand::Prefix { chain, sigma, steps, seed, word, out } => {
            let m = load_chain(&chain)?;
            let sigma = m.alphabet().symbol(&sigma)?;
            let series = match word {
                Some(path) => {
                    let w = Word::parse(m.alphabet().clone(), &read_file(&path)?)?;
                    let mut s = lab::prefix_series(&w.prefix(steps.min(w.len()))?, sigma);
                    s.params.push(("word".into(), path));
                    s
                }
                None => lab::prefix_convergence(&m, sigma, steps, need_seed(seed, &None)?),
            };
            write_series(&series, &out.out)
        }
        LabCommand::Infix { chain, sigma, levels, seed, word, out } => {
            let m = load_chain(&chain)?;
            let sigma = m.alphabet().symbol(&sigma)?;
            let series = match word {
                Some(path) => {
                    let w = Word::parse(m.alphabet().clone(), &read_file(&path)?)?;
                    let mut s = lab::infix_series(&w, sigma, levels);
                    s.params.push(("word".into(), path));
                    s
                }
                None => lab::infix_convergence(&m, sigma, levels, need_seed(seed, &None)?),
            };
            write_series(&series, &out.out)
        }
        LabCommand::Lln { dist, levels, seed, out } => {
            let d = lab::FiniteDistribution::parse(&dist)?;
            write_series(&lab::triangular_lln(&d, levels, seed)?, &out.out)
        }
        LabCommand::FirstVisit { chain, state, levels, seed, out } => {
            let m = load_chain(&chain)?;
            let q = m.state_index(&state)?;
            write_series(&lab::first_visit_ratio(&m, q, levels, seed), &out.out)
        }
        LabCommand::ModeRate { pa, n, trials, seed, out } => {
            write_series(&lab::mode_error_series(pa, n, trials, seed)?, &out.out)
        }
    }
}
