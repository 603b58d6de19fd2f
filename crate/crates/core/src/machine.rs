//! The generic counter-monitor register machine: locations, natural-valued
//! registers, guarded transitions over the signature (0, +1, <=), and a
//! guarded-case output rule per location.
//!
//! Determinism (exactly one enabled edge per location/event/valuation) is
//! enforced at runtime on every step rather than verified statically.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::alphabet::{Alphabet, Word, BOTTOM_TOKEN};
use crate::error::{Error, Result};

/// A term over the signature (0, +1): either `0 + k` or `r + k`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Term {
    pub base: TermBase,
    #[serde(default)]
    pub add: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TermBase {
    Zero,
    Reg(String),
}

impl Term {
    pub fn zero() -> Self {
        Term { base: TermBase::Zero, add: 0 }
    }

    pub fn constant(k: u64) -> Self {
        Term { base: TermBase::Zero, add: k }
    }

    pub fn reg(name: &str) -> Self {
        Term { base: TermBase::Reg(name.to_string()), add: 0 }
    }

    pub fn reg_plus(name: &str, k: u64) -> Self {
        Term { base: TermBase::Reg(name.to_string()), add: k }
    }

    fn eval(&self, v: &BTreeMap<String, u64>) -> Result<u64> {
        let base = match &self.base {
            TermBase::Zero => 0,
            TermBase::Reg(r) => *v
                .get(r)
                .ok_or_else(|| Error::Internal(format!("unknown register `{r}` in term")))?,
        };
        Ok(base + self.add)
    }
}

/// One atomic comparison of a guard: `lhs <= rhs` or its negation `lhs > rhs`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GuardAtom {
    pub lhs: Term,
    pub rel: Rel,
    pub rhs: Term,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rel {
    Le,
    Gt,
}

/// A conjunction of atomic comparisons; the empty conjunction is `true`.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Guard(pub Vec<GuardAtom>);

impl Guard {
    pub fn always() -> Self {
        Guard(Vec::new())
    }

    pub fn holds(&self, v: &BTreeMap<String, u64>) -> Result<bool> {
        for atom in &self.0 {
            let l = atom.lhs.eval(v)?;
            let r = atom.rhs.eval(v)?;
            let ok = match atom.rel {
                Rel::Le => l <= r,
                Rel::Gt => l > r,
            };
            if !ok {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// Simultaneous assignment of terms to registers; registers absent from the
/// map keep their value.
pub type Update = BTreeMap<String, Term>;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Edge {
    pub from: String,
    pub event: String,
    pub guard: Guard,
    pub update: Update,
    pub to: String,
}

/// Output rule of one location: the first case whose guard holds wins,
/// otherwise the default value.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OutputRule {
    pub cases: Vec<(Guard, String)>,
    pub default: String,
}

#[derive(Debug, Clone)]
pub struct CounterMonitor {
    alphabet: Arc<Alphabet>,
    outputs: Vec<String>,
    registers: Vec<String>,
    locations: Vec<String>,
    initial: String,
    edges: Vec<Edge>,
    output_rules: BTreeMap<String, OutputRule>,
}

/// Current location plus register valuation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Configuration {
    pub location: String,
    pub valuation: BTreeMap<String, u64>,
}

#[derive(Serialize, Deserialize)]
struct MachineDoc {
    input_alphabet: Vec<String>,
    #[serde(default)]
    ordered: bool,
    output_alphabet: Vec<String>,
    registers: Vec<String>,
    locations: Vec<String>,
    initial: String,
    edges: Vec<Edge>,
    output_rules: BTreeMap<String, OutputRule>,
}

impl CounterMonitor {
    pub fn new(
        alphabet: Arc<Alphabet>,
        outputs: Vec<String>,
        registers: Vec<String>,
        locations: Vec<String>,
        initial: String,
        edges: Vec<Edge>,
        output_rules: BTreeMap<String, OutputRule>,
    ) -> Result<Self> {
        if !locations.contains(&initial) {
            return Err(Error::Internal(format!("initial location `{initial}` not declared")));
        }
        for e in &edges {
            if !locations.contains(&e.from) || !locations.contains(&e.to) {
                return Err(Error::Internal(format!(
                    "edge {} -> {} references undeclared location",
                    e.from, e.to
                )));
            }
            if !alphabet.contains(&e.event) {
                return Err(Error::UnknownSymbol(e.event.clone()));
            }
            for r in e.update.keys() {
                if !registers.contains(r) {
                    return Err(Error::Internal(format!("update writes undeclared register `{r}`")));
                }
            }
        }
        Ok(CounterMonitor {
            alphabet,
            outputs,
            registers,
            locations,
            initial,
            edges,
            output_rules,
        })
    }

    pub fn alphabet(&self) -> &Arc<Alphabet> {
        &self.alphabet
    }

    pub fn register_count(&self) -> usize {
        self.registers.len()
    }

    pub fn locations(&self) -> &[String] {
        &self.locations
    }

    pub fn initial_configuration(&self) -> Configuration {
        Configuration {
            location: self.initial.clone(),
            valuation: self.registers.iter().map(|r| (r.clone(), 0)).collect(),
        }
    }

    pub fn output(&self, c: &Configuration) -> Result<String> {
        let rule = self
            .output_rules
            .get(&c.location)
            .ok_or_else(|| Error::Internal(format!("no output rule for location `{}`", c.location)))?;
        for (guard, value) in &rule.cases {
            if guard.holds(&c.valuation)? {
                return Ok(value.clone());
            }
        }
        Ok(rule.default.clone())
    }

    /// Takes the unique enabled edge; all assignments read the old valuation.
    pub fn step(&self, c: &Configuration, event: &str) -> Result<Configuration> {
        if !self.alphabet.contains(event) {
            return Err(Error::UnknownSymbol(event.to_string()));
        }
        let mut chosen: Option<&Edge> = None;
        let mut enabled = 0usize;
        for e in &self.edges {
            if e.from == c.location && e.event == event && e.guard.holds(&c.valuation)? {
                enabled += 1;
                chosen = Some(e);
            }
        }
        if enabled != 1 {
            return Err(Error::DeterminismViolation {
                location: c.location.clone(),
                event: event.to_string(),
                valuation: format!("{:?}", c.valuation),
                enabled,
            });
        }
        let e = chosen.unwrap();
        let mut next = c.valuation.clone();
        for (r, term) in &e.update {
            next.insert(r.clone(), term.eval(&c.valuation)?);
        }
        Ok(Configuration { location: e.to.clone(), valuation: next })
    }

    /// Runs the machine over a word, returning the output after every
    /// prefix together with the final configuration.
    pub fn run(&self, w: &Word) -> Result<(Vec<String>, Configuration)> {
        let mut c = self.initial_configuration();
        let mut outputs = Vec::with_capacity(w.len());
        for &s in w.letters() {
            c = self.step(&c, w.alphabet().name(s))?;
            outputs.push(self.output(&c)?);
        }
        Ok((outputs, c))
    }

    pub fn to_json(&self) -> String {
        let doc = MachineDoc {
            input_alphabet: self.alphabet.names().to_vec(),
            ordered: self.alphabet.is_ordered(),
            output_alphabet: self.outputs.clone(),
            registers: self.registers.clone(),
            locations: self.locations.clone(),
            initial: self.initial.clone(),
            edges: self.edges.clone(),
            output_rules: self.output_rules.clone(),
        };
        serde_json::to_string_pretty(&doc).expect("machine serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: MachineDoc =
            serde_json::from_str(text).map_err(|e| Error::ChainSpec(e.to_string()))?;
        let alphabet = Alphabet::new(doc.input_alphabet, doc.ordered)?;
        CounterMonitor::new(
            alphabet,
            doc.output_alphabet,
            doc.registers,
            doc.locations,
            doc.initial,
            doc.edges,
            doc.output_rules,
        )
    }
}

/// The baseline real-time mode monitor: one counter per letter, a single
/// location, and an output rule that selects the strictly most frequent
/// letter (bottom on ties).
pub fn naive_mode_machine(alphabet: &Arc<Alphabet>) -> CounterMonitor {
    let reg = |s: &str| format!("c_{s}");
    let registers: Vec<String> = alphabet.names().iter().map(|s| reg(s)).collect();
    let edges: Vec<Edge> = alphabet
        .names()
        .iter()
        .map(|s| Edge {
            from: "q".to_string(),
            event: s.clone(),
            guard: Guard::always(),
            update: BTreeMap::from([(reg(s), Term::reg_plus(&reg(s), 1))]),
            to: "q".to_string(),
        })
        .collect();
    // a wins iff c_a > c_sigma for all other sigma and c_a > 0
    let cases: Vec<(Guard, String)> = alphabet
        .names()
        .iter()
        .map(|a| {
            let mut atoms = vec![GuardAtom {
                lhs: Term::reg(&reg(a)),
                rel: Rel::Gt,
                rhs: Term::zero(),
            }];
            for s in alphabet.names() {
                if s != a {
                    atoms.push(GuardAtom {
                        lhs: Term::reg(&reg(a)),
                        rel: Rel::Gt,
                        rhs: Term::reg(&reg(s)),
                    });
                }
            }
            (Guard(atoms), a.clone())
        })
        .collect();
    let mut outputs: Vec<String> = alphabet.names().to_vec();
    outputs.push(BOTTOM_TOKEN.to_string());
    let output_rules = BTreeMap::from([(
        "q".to_string(),
        OutputRule { cases, default: BOTTOM_TOKEN.to_string() },
    )]);
    CounterMonitor::new(
        alphabet.clone(),
        outputs,
        registers,
        vec!["q".to_string()],
        "q".to_string(),
        edges,
        output_rules,
    )
    .expect("naive mode machine is well-formed by construction")
}
