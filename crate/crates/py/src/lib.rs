//! Python bindings for the freqmon library: batch statistics, the
//! streaming limit monitors, Markov-chain sampling, and the stationary
//! solver. Built as a cdylib; see python/smoke_test.py for usage.

use std::collections::BTreeMap;
use std::sync::Arc;

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use freqmon::machine::Configuration;
use freqmon::monitor::StreamMonitor;
use freqmon::{
    naive_mode_machine, parse_formula, Alphabet, CounterMonitor, FormulaMonitor, MarkovChain,
    MedianMonitor, ModeMonitor, MonitorKind, StatOutcome, Word,
};

fn err(e: freqmon::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn make_alphabet(symbols: Vec<String>, ordered: bool) -> PyResult<Arc<Alphabet>> {
    Alphabet::new(symbols, ordered).map_err(err)
}

fn make_word(alphabet: &Arc<Alphabet>, letters: &[String]) -> PyResult<Word> {
    Word::parse(alphabet.clone(), &letters.join(" ")).map_err(err)
}

/// Alphabet in first-appearance order of the word, for the unordered
/// statistics where no explicit order is needed.
fn inferred_alphabet(letters: &[String]) -> PyResult<Arc<Alphabet>> {
    let mut names: Vec<String> = Vec::new();
    for l in letters {
        if !names.contains(l) {
            names.push(l.clone());
        }
    }
    make_alphabet(names, false)
}

fn render(out: StatOutcome, alphabet: &Alphabet) -> Option<String> {
    match out {
        StatOutcome::Symbol(s) => Some(alphabet.name(s).to_string()),
        StatOutcome::Bottom => None,
    }
}

/// Mode of a word, or None if no letter is strictly most frequent.
#[pyfunction]
fn mode(word: Vec<String>) -> PyResult<Option<String>> {
    let al = inferred_alphabet(&word)?;
    let w = make_word(&al, &word)?;
    Ok(render(freqmon::mode(&w), &al))
}

/// Median of a word under the total order given by `order`, or None if
/// the word has no unique median.
#[pyfunction]
fn median(word: Vec<String>, order: Vec<String>) -> PyResult<Option<String>> {
    let al = make_alphabet(order, true)?;
    let w = make_word(&al, &word)?;
    Ok(render(freqmon::median(&w).map_err(err)?, &al))
}

/// Reference evaluation of a frequency formula over a whole word.
#[pyfunction]
fn eval_formula(formula: &str, word: Vec<String>, alphabet: Vec<String>) -> PyResult<bool> {
    let al = make_alphabet(alphabet, false)?;
    let phi = parse_formula(formula, &al).map_err(err)?;
    let w = make_word(&al, &word)?;
    freqmon::eval_formula(&phi, &w).map_err(err)
}

/// Runs one of the monitors over a whole word and returns the output
/// after every event, rendered as strings ("true"/"false" for formulas).
#[pyfunction]
#[pyo3(signature = (algorithm, word, order=None, formula=None))]
fn run_monitor(
    algorithm: &str,
    word: Vec<String>,
    order: Option<Vec<String>>,
    formula: Option<String>,
) -> PyResult<Vec<String>> {
    let al = match order {
        Some(names) => make_alphabet(names, true)?,
        None => inferred_alphabet(&word)?,
    };
    let kind = match algorithm {
        "mode" => MonitorKind::Mode,
        "median" => MonitorKind::Median,
        "naive-mode" => MonitorKind::NaiveMode,
        "formula" => {
            let text = formula
                .ok_or_else(|| PyValueError::new_err("formula algorithm needs `formula`"))?;
            MonitorKind::Formula(parse_formula(&text, &al).map_err(err)?)
        }
        other => return Err(PyValueError::new_err(format!("unknown algorithm `{other}`"))),
    };
    let w = make_word(&al, &word)?;
    freqmon::run_monitor(&kind, &w).map_err(err)
}

/// Samples a labeled word from a Markov chain spec (JSON text).
#[pyfunction]
fn sample_chain(chain_json: &str, steps: usize, seed: u64) -> PyResult<Vec<String>> {
    let m = MarkovChain::parse(chain_json).map_err(err)?;
    let trace = m.sample(steps, seed);
    Ok(trace
        .word
        .letters()
        .iter()
        .map(|&s| m.alphabet().name(s).to_string())
        .collect())
}

/// Exact stationary analysis of a chain spec: maps under keys "state"
/// (state frequencies), "return" (expected return times), and "letter"
/// (aggregated letter frequencies).
#[pyfunction]
fn stationary(chain_json: &str) -> PyResult<BTreeMap<String, BTreeMap<String, f64>>> {
    let m = MarkovChain::parse(chain_json).map_err(err)?;
    let a = m.stationary().map_err(err)?;
    Ok(BTreeMap::from([
        ("state".to_string(), a.state_frequency),
        ("return".to_string(), a.return_time),
        ("letter".to_string(), a.letter_frequency),
    ]))
}

enum MonitorState {
    Mode(ModeMonitor),
    Median(MedianMonitor),
    Naive(CounterMonitor, Configuration),
    Formula(FormulaMonitor),
}

/// A push-based monitor: construct with the algorithm and alphabet, then
/// feed one symbol at a time; `next` returns the current output.
#[pyclass]
struct Monitor {
    alphabet: Arc<Alphabet>,
    algorithm: String,
    formula: Option<String>,
    state: Option<MonitorState>,
}

#[pymethods]
impl Monitor {
    #[new]
    #[pyo3(signature = (algorithm, alphabet, formula=None))]
    fn new(algorithm: &str, alphabet: Vec<String>, formula: Option<String>) -> PyResult<Self> {
        if !matches!(algorithm, "mode" | "median" | "naive-mode" | "formula") {
            return Err(PyValueError::new_err(format!("unknown algorithm `{algorithm}`")));
        }
        let al = make_alphabet(alphabet, algorithm == "median")?;
        if algorithm == "formula" {
            let text = formula
                .as_deref()
                .ok_or_else(|| PyValueError::new_err("formula algorithm needs `formula`"))?;
            parse_formula(text, &al).map_err(err)?;
        }
        Ok(Monitor {
            alphabet: al,
            algorithm: algorithm.to_string(),
            formula,
            state: None,
        })
    }

    /// Feeds one symbol and returns the monitor's output after it.
    fn next(&mut self, symbol: &str) -> PyResult<String> {
        let s = self.alphabet.symbol(symbol).map_err(err)?;
        let al = self.alphabet.clone();
        match &mut self.state {
            None => {
                let (state, out) = match self.algorithm.as_str() {
                    "mode" => {
                        let (m, out) = ModeMonitor::init(s);
                        (MonitorState::Mode(m), al.name(out).to_string())
                    }
                    "median" => {
                        let (m, out) = MedianMonitor::init(al.clone(), s).map_err(err)?;
                        (MonitorState::Median(m), al.name(out).to_string())
                    }
                    "naive-mode" => {
                        let machine = naive_mode_machine(&al);
                        let c = machine
                            .step(&machine.initial_configuration(), symbol)
                            .map_err(err)?;
                        let out = machine.output(&c).map_err(err)?;
                        (MonitorState::Naive(machine, c), out)
                    }
                    _ => {
                        let phi = parse_formula(self.formula.as_deref().unwrap(), &al)
                            .map_err(err)?;
                        let mut m = FormulaMonitor::new(phi);
                        let out = m.next(s).to_string();
                        (MonitorState::Formula(m), out)
                    }
                };
                self.state = Some(state);
                Ok(out)
            }
            Some(MonitorState::Mode(m)) => Ok(al.name(m.next(s)).to_string()),
            Some(MonitorState::Median(m)) => Ok(al.name(m.next(s)).to_string()),
            Some(MonitorState::Naive(machine, c)) => {
                *c = machine.step(c, symbol).map_err(err)?;
                machine.output(c).map_err(err)
            }
            Some(MonitorState::Formula(m)) => Ok(m.next(s).to_string()),
        }
    }
}

#[pymodule]
fn freqmon_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(mode, m)?)?;
    m.add_function(wrap_pyfunction!(median, m)?)?;
    m.add_function(wrap_pyfunction!(eval_formula, m)?)?;
    m.add_function(wrap_pyfunction!(run_monitor, m)?)?;
    m.add_function(wrap_pyfunction!(sample_chain, m)?)?;
    m.add_function(wrap_pyfunction!(stationary, m)?)?;
    m.add_class::<Monitor>()?;
    Ok(())
}
