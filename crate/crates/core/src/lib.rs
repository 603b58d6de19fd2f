//! Streaming limit monitors for frequency statistics (mode, median, and
//! Boolean frequency formulas) that use a constant number of integer
//! counters, together with the labeled Markov chains that generate the
//! streams, a baseline counter-machine model, and a small statistical lab.

pub mod alphabet;
pub mod error;
pub mod formula;
pub mod lab;
pub mod machine;
pub mod markov;
pub mod monitor;
pub mod rng;

pub use alphabet::{median, mode, Alphabet, StatOutcome, Symbol, Word};
pub use error::{Error, Result};
pub use formula::{
    eval_atom_counts, eval_formula, mode_existence_formula, parse_formula, Atom, FormulaMonitor,
    FrequencyFormula,
};
pub use machine::{naive_mode_machine, Configuration, CounterMonitor};
pub use markov::{MarkovChain, SampleTrace, StationaryAnalysis};
pub use monitor::{
    run_monitor, schedule_offset, ChunkSchedule, MedianMonitor, ModeMonitor, MonitorKind,
    StreamMonitor,
};
