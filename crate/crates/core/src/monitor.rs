//! Constant-counter streaming limit monitors for the mode and the median,
//! plus the chunk schedule they share.
//!
//! The stream is split into chunks of lengths 1, 2, 3, ...; the n'th chunk
//! starts at offset s(n) = n(n-1)/2. Each monitor keeps a candidate and a
//! fixed handful of integer counters, re-deciding the candidate at every
//! chunk boundary.

use std::sync::Arc;

use crate::alphabet::{Alphabet, Symbol, Word};
use crate::error::{Error, Result};
use crate::formula::{FormulaMonitor, FrequencyFormula};

/// Offset of the n'th chunk: s(n) = n(n-1)/2. The chunk occupies stream
/// positions s(n)+1 ..= s(n)+n.
pub fn schedule_offset(n: u64) -> u64 {
    n * (n - 1) / 2
}

/// Position within the chunk decomposition: chunk length `n`, in-chunk
/// index `i` with 1 <= i <= n.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChunkSchedule {
    pub n: u64,
    pub i: u64,
}

impl ChunkSchedule {
    /// Position of the second stream letter: the first letter is consumed
    /// by Init as the whole chunk n = 1.
    pub fn after_init() -> Self {
        ChunkSchedule { n: 2, i: 1 }
    }

    pub fn at_chunk_start(&self) -> bool {
        self.i == 1
    }

    pub fn advance(&mut self) {
        if self.i == self.n {
            self.n += 1;
            self.i = 1;
        } else {
            self.i += 1;
        }
    }
}

/// Streaming interface shared by all limit monitors: feed one event at a
/// time, read the current estimate at any point.
pub trait StreamMonitor {
    type Output: Clone;
    fn next(&mut self, event: Symbol) -> Self::Output;
    fn output(&self) -> Self::Output;
}

/// Mode limit monitor: candidate `x`, contender `y`, and four integer
/// counters (c_x, c_y and the schedule's n, i).
#[derive(Debug, Clone)]
pub struct ModeMonitor {
    x: Symbol,
    y: Symbol,
    c_x: u64,
    c_y: u64,
    sched: ChunkSchedule,
}

impl ModeMonitor {
    pub fn init(first: Symbol) -> (Self, Symbol) {
        let m = ModeMonitor {
            x: first,
            y: first,
            c_x: 0,
            c_y: 0,
            sched: ChunkSchedule::after_init(),
        };
        (m, first)
    }

    pub fn candidate(&self) -> Symbol {
        self.x
    }

    pub fn contender(&self) -> Symbol {
        self.y
    }

    pub fn counters(&self) -> (u64, u64) {
        (self.c_x, self.c_y)
    }

    pub fn schedule(&self) -> ChunkSchedule {
        self.sched
    }

    /// The unbounded registers: c_x, c_y, n, i.
    pub const UNBOUNDED_COUNTERS: usize = 4;
    /// The finite-state letter registers: x, y.
    pub const SYMBOL_REGISTERS: usize = 2;
}

impl StreamMonitor for ModeMonitor {
    type Output = Symbol;

    fn next(&mut self, event: Symbol) -> Symbol {
        if self.sched.at_chunk_start() {
            if self.c_x <= self.c_y {
                self.x = self.y;
            }
            self.y = event;
            self.c_x = 0;
            self.c_y = 0;
        }
        if self.x == event {
            self.c_x += 1;
        }
        if self.y == event {
            self.c_y += 1;
        }
        self.sched.advance();
        self.x
    }

    fn output(&self) -> Symbol {
        self.x
    }
}

/// Median limit monitor over a totally ordered alphabet: candidate `x` and
/// four counters for the two defining inequalities, plus the schedule.
#[derive(Debug, Clone)]
pub struct MedianMonitor {
    alphabet: Arc<Alphabet>,
    x: Symbol,
    c1: u64,
    c2: u64,
    c3: u64,
    c4: u64,
    sched: ChunkSchedule,
}

impl MedianMonitor {
    pub fn init(alphabet: Arc<Alphabet>, first: Symbol) -> Result<(Self, Symbol)> {
        if !alphabet.is_ordered() {
            return Err(Error::UnorderedAlphabet);
        }
        let m = MedianMonitor {
            alphabet,
            x: first,
            c1: 0,
            c2: 0,
            c3: 0,
            c4: 0,
            sched: ChunkSchedule::after_init(),
        };
        Ok((m, first))
    }

    pub fn candidate(&self) -> Symbol {
        self.x
    }

    pub fn counters(&self) -> (u64, u64, u64, u64) {
        (self.c1, self.c2, self.c3, self.c4)
    }

    /// Predecessor in the order, saturating at the minimum.
    fn pre(&self, s: Symbol) -> Symbol {
        if s.index() == 0 { s } else { Symbol(s.index() - 1) }
    }

    /// Successor in the order, saturating at the maximum.
    fn succ(&self, s: Symbol) -> Symbol {
        if s.index() + 1 == self.alphabet.size() { s } else { Symbol(s.index() + 1) }
    }
}

impl StreamMonitor for MedianMonitor {
    type Output = Symbol;

    fn next(&mut self, event: Symbol) -> Symbol {
        if self.sched.at_chunk_start() {
            // both moves test the old counters; pre applies before succ
            let move_down = self.c1 >= self.c2;
            let move_up = self.c3 >= self.c4;
            if move_down {
                self.x = self.pre(self.x);
            }
            if move_up {
                self.x = self.succ(self.x);
            }
            self.c1 = 0;
            self.c2 = 0;
            self.c3 = 0;
            self.c4 = 0;
        }
        if event < self.x {
            self.c1 += 1;
        }
        if event >= self.x {
            self.c2 += 1;
        }
        if event > self.x {
            self.c3 += 1;
        }
        if event <= self.x {
            self.c4 += 1;
        }
        self.sched.advance();
        self.x
    }

    fn output(&self) -> Symbol {
        self.x
    }
}

/// Which monitor a batch run should use.
#[derive(Debug, Clone)]
pub enum MonitorKind {
    Mode,
    Median,
    NaiveMode,
    Formula(FrequencyFormula),
}

/// Batch driver: streams a non-empty word through the chosen monitor and
/// returns the rendered output after every event.
pub fn run_monitor(kind: &MonitorKind, w: &Word) -> Result<Vec<String>> {
    if w.is_empty() {
        return Err(Error::EmptyWord);
    }
    let al = w.alphabet();
    match kind {
        MonitorKind::Mode => {
            let (mut m, first) = ModeMonitor::init(w.at(1));
            let mut out = vec![al.name(first).to_string()];
            for i in 2..=w.len() {
                out.push(al.name(m.next(w.at(i))).to_string());
            }
            Ok(out)
        }
        MonitorKind::Median => {
            let (mut m, first) = MedianMonitor::init(al.clone(), w.at(1))?;
            let mut out = vec![al.name(first).to_string()];
            for i in 2..=w.len() {
                out.push(al.name(m.next(w.at(i))).to_string());
            }
            Ok(out)
        }
        MonitorKind::NaiveMode => {
            let machine = crate::machine::naive_mode_machine(al);
            let (outputs, _) = machine.run(w)?;
            Ok(outputs)
        }
        MonitorKind::Formula(phi) => {
            let mut m = FormulaMonitor::new(phi.clone());
            let mut out = Vec::with_capacity(w.len());
            for &s in w.letters() {
                out.push(m.next(s).to_string());
            }
            Ok(out)
        }
    }
}
