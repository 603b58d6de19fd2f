//! Labeled Markov chains: JSON parsing with full validation (row sums,
//! strong connectivity), exact stationary analysis by linear solve, and
//! seeded sampling of finite prefixes of random omega-words.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::Deserialize;

use crate::alphabet::{Alphabet, Symbol, Word};
use crate::error::{Error, Result};
use crate::rng::SplitMix64;

const ROW_SUM_TOL: f64 = 1e-9;
const RESIDUAL_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct MarkovChain {
    alphabet: Arc<Alphabet>,
    states: Vec<String>,
    label: Vec<Symbol>,
    initial: Vec<f64>,
    transition: Vec<Vec<f64>>,
}

/// Exact long-run analysis: state frequencies, expected return times, and
/// letter frequencies aggregated by label.
#[derive(Debug, Clone)]
pub struct StationaryAnalysis {
    pub state_frequency: BTreeMap<String, f64>,
    pub return_time: BTreeMap<String, f64>,
    pub letter_frequency: BTreeMap<String, f64>,
}

/// A sampled run: the hidden state sequence and its labeling.
#[derive(Debug, Clone)]
pub struct SampleTrace {
    pub states: Vec<usize>,
    pub word: Word,
    pub seed: u64,
}

#[derive(Deserialize)]
struct ChainDoc {
    alphabet: Vec<String>,
    #[serde(default)]
    ordered: bool,
    states: Vec<StateDoc>,
    #[serde(default)]
    initial: BTreeMap<String, serde_json::Value>,
    transitions: Vec<TransitionDoc>,
}

#[derive(Deserialize)]
struct StateDoc {
    name: String,
    label: String,
}

#[derive(Deserialize)]
struct TransitionDoc {
    from: String,
    to: String,
    prob: serde_json::Value,
}

/// Probabilities may be decimal numbers or fraction strings like "1/3".
fn parse_prob(v: &serde_json::Value) -> Result<f64> {
    match v {
        serde_json::Value::Number(n) => n
            .as_f64()
            .ok_or_else(|| Error::BadProbability(n.to_string())),
        serde_json::Value::String(s) => {
            if let Some((num, den)) = s.split_once('/') {
                let num: f64 = num.trim().parse().map_err(|_| Error::BadProbability(s.clone()))?;
                let den: f64 = den.trim().parse().map_err(|_| Error::BadProbability(s.clone()))?;
                if den == 0.0 {
                    return Err(Error::BadProbability(s.clone()));
                }
                Ok(num / den)
            } else {
                s.trim().parse().map_err(|_| Error::BadProbability(s.clone()))
            }
        }
        other => Err(Error::BadProbability(other.to_string())),
    }
}

/// Whole-graph strong connectivity: every state reaches state 0 and is
/// reachable from it, in the positive-probability edge graph.
fn check_strongly_connected(states: &[String], transition: &[Vec<f64>]) -> Result<()> {
    let n = states.len();
    let reach = |forward: bool| {
        let mut seen = vec![false; n];
        let mut stack = vec![0usize];
        seen[0] = true;
        while let Some(q) = stack.pop() {
            for r in 0..n {
                let p = if forward { transition[q][r] } else { transition[r][q] };
                if p > 0.0 && !seen[r] {
                    seen[r] = true;
                    stack.push(r);
                }
            }
        }
        seen
    };
    let fwd = reach(true);
    let bwd = reach(false);
    for q in 0..n {
        if !fwd[q] || !bwd[q] {
            return Err(Error::NotStronglyConnected(states[q].clone()));
        }
    }
    Ok(())
}

impl MarkovChain {
    /// Parses and validates a chain-spec JSON document. Omitted transition
    /// and initial entries are probability 0; an entirely omitted initial
    /// distribution defaults to uniform.
    pub fn parse(text: &str) -> Result<Self> {
        let doc: ChainDoc =
            serde_json::from_str(text).map_err(|e| Error::ChainSpec(e.to_string()))?;
        let alphabet = Alphabet::new(doc.alphabet, doc.ordered)?;
        if doc.states.is_empty() {
            return Err(Error::ChainSpec("chain must have at least one state".into()));
        }
        let states: Vec<String> = doc.states.iter().map(|s| s.name.clone()).collect();
        let index = |name: &str| -> Result<usize> {
            states
                .iter()
                .position(|s| s == name)
                .ok_or_else(|| Error::UnknownState(name.to_string()))
        };
        {
            let mut seen = std::collections::HashSet::new();
            for s in &states {
                if !seen.insert(s) {
                    return Err(Error::ChainSpec(format!("duplicate state `{s}`")));
                }
            }
        }
        let label = doc
            .states
            .iter()
            .map(|s| alphabet.symbol(&s.label))
            .collect::<Result<Vec<_>>>()?;

        let n = states.len();
        let mut transition = vec![vec![0.0; n]; n];
        for t in &doc.transitions {
            let p = parse_prob(&t.prob)?;
            if p < 0.0 {
                return Err(Error::NegativeProbability {
                    element: format!("{} -> {}", t.from, t.to),
                    prob: p,
                });
            }
            transition[index(&t.from)?][index(&t.to)?] = p;
        }
        for (q, row) in transition.iter().enumerate() {
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > ROW_SUM_TOL {
                return Err(Error::RowSum { state: states[q].clone(), sum });
            }
        }

        let initial = if doc.initial.is_empty() {
            vec![1.0 / n as f64; n]
        } else {
            let mut pi = vec![0.0; n];
            for (name, v) in &doc.initial {
                let p = parse_prob(v)?;
                if p < 0.0 {
                    return Err(Error::NegativeProbability { element: name.clone(), prob: p });
                }
                pi[index(name)?] = p;
            }
            let sum: f64 = pi.iter().sum();
            if (sum - 1.0).abs() > ROW_SUM_TOL {
                return Err(Error::InitialSum(sum));
            }
            pi
        };

        check_strongly_connected(&states, &transition)?;

        Ok(MarkovChain { alphabet, states, label, initial, transition })
    }

    pub fn alphabet(&self) -> &Arc<Alphabet> {
        &self.alphabet
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn state_index(&self, name: &str) -> Result<usize> {
        self.states
            .iter()
            .position(|s| s == name)
            .ok_or_else(|| Error::UnknownState(name.to_string()))
    }

    pub fn label_of(&self, q: usize) -> Symbol {
        self.label[q]
    }

    /// Solves f P = f, sum f = 1 by Gaussian elimination with partial
    /// pivoting, then derives return times and letter frequencies.
    #[allow(clippy::needless_range_loop)] // indexed loops read better for matrix math
    pub fn stationary(&self) -> Result<StationaryAnalysis> {
        let n = self.states.len();
        // (P^T - I) f = 0 with the last equation replaced by sum f = 1
        let mut a = vec![vec![0.0f64; n + 1]; n];
        for r in 0..n {
            for c in 0..n {
                a[r][c] = self.transition[c][r] - if r == c { 1.0 } else { 0.0 };
            }
        }
        for c in 0..n {
            a[n - 1][c] = 1.0;
        }
        a[n - 1][n] = 1.0;

        for col in 0..n {
            let pivot = (col..n)
                .max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap())
                .unwrap();
            if a[pivot][col].abs() < 1e-14 {
                return Err(Error::Internal("singular stationary system".into()));
            }
            a.swap(col, pivot);
            for row in 0..n {
                if row != col {
                    let factor = a[row][col] / a[col][col];
                    for k in col..=n {
                        a[row][k] -= factor * a[col][k];
                    }
                }
            }
        }
        let f: Vec<f64> = (0..n).map(|i| a[i][n] / a[i][i]).collect();

        // residual check: f P = f component-wise
        for c in 0..n {
            let dot: f64 = (0..n).map(|r| f[r] * self.transition[r][c]).sum();
            if (dot - f[c]).abs() > RESIDUAL_TOL {
                return Err(Error::Internal(format!(
                    "stationary residual {} at state {}",
                    (dot - f[c]).abs(),
                    self.states[c]
                )));
            }
        }

        let mut letter_frequency: BTreeMap<String, f64> = self
            .alphabet
            .names()
            .iter()
            .map(|s| (s.clone(), 0.0))
            .collect();
        for (q, &fq) in f.iter().enumerate() {
            *letter_frequency
                .get_mut(self.alphabet.name(self.label[q]))
                .unwrap() += fq;
        }
        Ok(StationaryAnalysis {
            state_frequency: self
                .states
                .iter()
                .cloned()
                .zip(f.iter().copied())
                .collect(),
            return_time: self
                .states
                .iter()
                .cloned()
                .zip(f.iter().map(|&fq| 1.0 / fq))
                .collect(),
            letter_frequency,
        })
    }

    /// Samples a length-`n` prefix of a random omega-word, deterministically
    /// from the seed.
    pub fn sample(&self, n: usize, seed: u64) -> SampleTrace {
        let mut rng = SplitMix64::new(seed);
        let mut states = Vec::with_capacity(n);
        let mut word = Word::empty(self.alphabet.clone());
        let mut current: Option<usize> = None;
        for _ in 0..n {
            let q = match current {
                None => rng.sample_index(&self.initial),
                Some(prev) => rng.sample_index(self.transition[prev].as_slice()),
            };
            states.push(q);
            word.push(self.label[q]);
            current = Some(q);
        }
        SampleTrace { states, word, seed }
    }
}

impl SampleTrace {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// Number of positions i in [1, k] with X_{offset+i} = q.
    pub fn visits(&self, q: usize, offset: usize, k: usize) -> Result<usize> {
        if offset + k > self.states.len() {
            return Err(Error::PositionOutOfRange {
                i: offset + 1,
                j: offset + k,
                len: self.states.len(),
            });
        }
        Ok(self.states[offset..offset + k].iter().filter(|&&s| s == q).count())
    }

    /// Least i >= 1 with X_{offset+i} = q, or None within this finite trace.
    pub fn first_visit(&self, q: usize, offset: usize) -> Option<usize> {
        self.states[offset..].iter().position(|&s| s == q).map(|p| p + 1)
    }
}
