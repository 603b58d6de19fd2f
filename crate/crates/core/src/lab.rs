//! Seeded desk-scale experiments that check the long-run theory empirically
//! and emit CSV series. Every experiment is a pure function of its
//! parameters and seed.

use std::io::Write;

use crate::alphabet::{Symbol, Word};
use crate::error::{Error, Result};
use crate::markov::MarkovChain;
use crate::monitor::schedule_offset;
use crate::rng::{derive_seed, SplitMix64};

/// One experiment output row. `censored` marks values truncated by the
/// finite sampling horizon.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub index: u64,
    pub value: f64,
    pub censored: bool,
}

/// A named series of (index, value) rows with its provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub experiment: String,
    pub seed: u64,
    pub params: Vec<(String, String)>,
    pub rows: Vec<Row>,
}

impl Series {
    fn new(experiment: &str, seed: u64) -> Self {
        Series { experiment: experiment.to_string(), seed, params: Vec::new(), rows: Vec::new() }
    }

    fn param(mut self, key: &str, value: impl ToString) -> Self {
        self.params.push((key.to_string(), value.to_string()));
        self
    }

    fn push(&mut self, index: u64, value: f64) {
        debug_assert!(self.rows.last().is_none_or(|r| r.index < index));
        self.rows.push(Row { index, value, censored: false });
    }
}

/// A finite probability distribution with labeled support.
#[derive(Debug, Clone)]
pub struct FiniteDistribution {
    labels: Vec<String>,
    probs: Vec<f64>,
}

impl FiniteDistribution {
    pub fn new(items: Vec<(String, f64)>) -> Result<Self> {
        if items.is_empty() {
            return Err(Error::InvalidDistribution("empty support".into()));
        }
        let sum: f64 = items.iter().map(|(_, p)| p).sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidDistribution(format!("probabilities sum to {sum}")));
        }
        for (l, p) in &items {
            if *p < 0.0 {
                return Err(Error::NegativeProbability { element: l.clone(), prob: *p });
            }
        }
        let (labels, probs) = items.into_iter().unzip();
        Ok(FiniteDistribution { labels, probs })
    }

    /// Parses the CLI form "label:prob,label:prob,...".
    pub fn parse(text: &str) -> Result<Self> {
        let items = text
            .split(',')
            .map(|part| {
                let (label, prob) = part
                    .split_once(':')
                    .ok_or_else(|| Error::InvalidDistribution(format!("bad entry `{part}`")))?;
                let p: f64 = prob
                    .trim()
                    .parse()
                    .map_err(|_| Error::BadProbability(prob.to_string()))?;
                Ok((label.trim().to_string(), p))
            })
            .collect::<Result<Vec<_>>>()?;
        FiniteDistribution::new(items)
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Support values as numbers, for the LLN experiment.
    pub fn numeric_values(&self) -> Result<Vec<f64>> {
        self.labels
            .iter()
            .map(|l| {
                l.parse::<f64>()
                    .map_err(|_| Error::InvalidDistribution(format!("non-numeric value `{l}`")))
            })
            .collect()
    }

    pub fn sample_index(&self, rng: &mut SplitMix64) -> usize {
        rng.sample_index(&self.probs)
    }

    pub fn mean(&self) -> Result<f64> {
        let values = self.numeric_values()?;
        Ok(values.iter().zip(&self.probs).map(|(v, p)| v * p).sum())
    }
}

/// Prefix letter frequencies |w_{..n}|_sigma / n for one sampled trace.
pub fn prefix_convergence(chain: &MarkovChain, sigma: Symbol, steps: usize, seed: u64) -> Series {
    let trace = chain.sample(steps, seed);
    let mut series = prefix_series(&trace.word, sigma);
    series.seed = seed;
    series.params.push(("sigma".into(), chain.alphabet().name(sigma).to_string()));
    series.params.push(("steps".into(), steps.to_string()));
    series
}

/// Prefix frequencies of a fixed word (used to reproduce worked tables).
pub fn prefix_series(word: &Word, sigma: Symbol) -> Series {
    let mut series = Series::new("prefix", 0);
    let mut count = 0usize;
    for n in 1..=word.len() {
        if word.at(n) == sigma {
            count += 1;
        }
        series.push(n as u64, count as f64 / n as f64);
    }
    series
}

/// Chunk letter frequencies under s(n) = n(n-1)/2 for one sampled trace.
pub fn infix_convergence(chain: &MarkovChain, sigma: Symbol, levels: u64, seed: u64) -> Series {
    let horizon = (schedule_offset(levels) + levels) as usize;
    let trace = chain.sample(horizon, seed);
    let mut series = infix_series(&trace.word, sigma, levels);
    series.seed = seed;
    series.params.push(("sigma".into(), chain.alphabet().name(sigma).to_string()));
    series.params.push(("levels".into(), levels.to_string()));
    series
}

/// Chunk frequencies of a fixed word, for as many complete chunks as it
/// covers (capped at `levels`).
pub fn infix_series(word: &Word, sigma: Symbol, levels: u64) -> Series {
    let mut series = Series::new("infix", 0);
    for n in 1..=levels {
        let start = schedule_offset(n) as usize + 1;
        let end = schedule_offset(n) as usize + n as usize;
        if end > word.len() {
            break;
        }
        let count = (start..=end).filter(|&i| word.at(i) == sigma).count();
        series.push(n, count as f64 / n as f64);
    }
    series
}

/// Triangular-array law of large numbers: row n draws n fresh i.i.d.
/// samples (no reuse across rows) and records their mean.
pub fn triangular_lln(dist: &FiniteDistribution, levels: u64, seed: u64) -> Result<Series> {
    let values = dist.numeric_values()?;
    let mut series = Series::new("lln", seed)
        .param("dist", format_dist(dist))
        .param("levels", levels)
        .param("mean", dist.mean()?);
    for n in 1..=levels {
        let mut rng = SplitMix64::new(derive_seed(seed, n));
        let mut sum = 0.0;
        for _ in 0..n {
            sum += values[dist.sample_index(&mut rng)];
        }
        series.push(n, sum / n as f64);
    }
    Ok(series)
}

fn format_dist(dist: &FiniteDistribution) -> String {
    dist.labels
        .iter()
        .zip(&dist.probs)
        .map(|(l, p)| format!("{l}:{p}"))
        .collect::<Vec<_>>()
        .join(",")
}

/// First-visit time to state `q` within each chunk, divided by the chunk
/// length. Visits are searched from the chunk offset to the end of the
/// sampled horizon; rows where `q` never appears there are censored at 1.
pub fn first_visit_ratio(chain: &MarkovChain, q: usize, levels: u64, seed: u64) -> Series {
    let horizon = (schedule_offset(levels) + levels) as usize;
    let trace = chain.sample(horizon, seed);
    let mut series = Series::new("first-visit", seed)
        .param("state", chain.states()[q].clone())
        .param("levels", levels);
    for n in 1..=levels {
        let offset = schedule_offset(n) as usize;
        match trace.first_visit(q, offset) {
            Some(t) => series.push(n, t as f64 / n as f64),
            None => series.rows.push(Row { index: n, value: 1.0, censored: true }),
        }
    }
    series
}

/// Empirical probability that the mode of an n-letter i.i.d. word over
/// {a, b} is `a`, next to the geometric lower bound 1 - rho^floor(n/2)
/// with rho = 1 - (2 p(a) - 1)^2.
pub fn mode_error_rate(
    p_a: f64,
    n: usize,
    trials: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    if !(p_a > 0.5 && p_a <= 1.0) {
        return Err(Error::InvalidDistribution(format!(
            "mode-rate requires p(a) > 1/2, got {p_a}"
        )));
    }
    let rho = 1.0 - (2.0 * p_a - 1.0).powi(2);
    let bound = 1.0 - rho.powi((n / 2) as i32);
    let mut hits = 0usize;
    for t in 0..trials {
        let mut rng = SplitMix64::new(derive_seed(seed, t as u64));
        let mut count_a = 0usize;
        for _ in 0..n {
            if rng.next_f64() < p_a {
                count_a += 1;
            }
        }
        // a is the mode iff strictly more than half the letters are a;
        // ties count as failure
        if 2 * count_a > n {
            hits += 1;
        }
    }
    Ok((hits as f64 / trials as f64, bound))
}

/// Packs a mode_error_rate result into a two-row series (empirical, bound).
pub fn mode_error_series(p_a: f64, n: usize, trials: usize, seed: u64) -> Result<Series> {
    let (empirical, bound) = mode_error_rate(p_a, n, trials, seed)?;
    let mut series = Series::new("mode-rate", seed)
        .param("pa", p_a)
        .param("n", n)
        .param("trials", trials)
        .param("bound", format!("{bound:.10}"));
    series.push(1, empirical);
    Ok(series)
}

// ---------------------------------------------------------------------------
// CSV emission
// ---------------------------------------------------------------------------

/// Writes a series as CSV: a commented preamble (experiment, seed,
/// parameters, censored row indices), then `index,value` rows with values
/// at 17 significant digits so doubles round-trip exactly.
pub fn emit_csv<W: Write>(series: &Series, mut out: W) -> std::io::Result<()> {
    writeln!(out, "# experiment={}", series.experiment)?;
    writeln!(out, "# seed={}", series.seed)?;
    for (k, v) in &series.params {
        writeln!(out, "# param {k}={v}")?;
    }
    let censored: Vec<String> = series
        .rows
        .iter()
        .filter(|r| r.censored)
        .map(|r| r.index.to_string())
        .collect();
    if !censored.is_empty() {
        writeln!(out, "# censored={}", censored.join(","))?;
    }
    writeln!(out, "index,value")?;
    for r in &series.rows {
        writeln!(out, "{},{:.16e}", r.index, r.value)?;
    }
    Ok(())
}

pub fn emit_csv_to_path(series: &Series, path: &str) -> Result<()> {
    let mut buf = Vec::new();
    emit_csv(series, &mut buf).map_err(|e| Error::Io { path: path.to_string(), source: e })?;
    std::fs::write(path, buf).map_err(|e| Error::Io { path: path.to_string(), source: e })
}

/// Parses a CSV document produced by emit_csv back into a Series.
pub fn parse_csv(text: &str) -> Result<Series> {
    let mut series = Series::new("", 0);
    let mut censored: Vec<u64> = Vec::new();
    let mut in_rows = false;
    for line in text.lines() {
        if let Some(meta) = line.strip_prefix("# ") {
            if let Some(v) = meta.strip_prefix("experiment=") {
                series.experiment = v.to_string();
            } else if let Some(v) = meta.strip_prefix("seed=") {
                series.seed = v.parse().map_err(|_| Error::ChainSpec("bad seed".into()))?;
            } else if let Some(v) = meta.strip_prefix("param ") {
                let (k, val) = v
                    .split_once('=')
                    .ok_or_else(|| Error::ChainSpec(format!("bad param line `{line}`")))?;
                series.params.push((k.to_string(), val.to_string()));
            } else if let Some(v) = meta.strip_prefix("censored=") {
                censored = v
                    .split(',')
                    .map(|s| s.parse().map_err(|_| Error::ChainSpec("bad censored index".into())))
                    .collect::<Result<_>>()?;
            }
        } else if line == "index,value" {
            in_rows = true;
        } else if in_rows && !line.trim().is_empty() {
            let (i, v) = line
                .split_once(',')
                .ok_or_else(|| Error::ChainSpec(format!("bad row `{line}`")))?;
            let index: u64 = i.parse().map_err(|_| Error::ChainSpec("bad index".into()))?;
            let value: f64 = v.parse().map_err(|_| Error::ChainSpec("bad value".into()))?;
            series.rows.push(Row { index, value, censored: censored.contains(&index) });
        }
    }
    Ok(series)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alphabet::{mode, StatOutcome};

    const XYZ_CHAIN: &str = r#"{
        "alphabet": ["x", "y", "z"],
        "ordered": true,
        "states": [
            {"name": "x", "label": "x"},
            {"name": "y", "label": "y"},
            {"name": "z", "label": "z"}
        ],
        "transitions": [
            {"from": "x", "to": "y", "prob": 1},
            {"from": "y", "to": "x", "prob": "1/3"},
            {"from": "y", "to": "z", "prob": "2/3"},
            {"from": "z", "to": "x", "prob": 1}
        ]
    }"#;

    const TABLE_WORD: &str = "x y z x y z x y x y z x y z x y";

    fn round2(x: f64) -> f64 {
        (x * 100.0).round() / 100.0
    }

    #[test]
    fn prefix_series_matches_worked_table() {
        let m = MarkovChain::parse(XYZ_CHAIN).unwrap();
        let w = Word::parse(m.alphabet().clone(), TABLE_WORD).unwrap();
        let y = m.alphabet().symbol("y").unwrap();
        let series = prefix_series(&w, y);
        let values: Vec<f64> = series.rows.iter().map(|r| round2(r.value)).collect();
        let expected = [
            0.0, 0.5, 0.33, 0.25, 0.4, 0.33, 0.29, 0.38, 0.33, 0.4, 0.36, 0.33, 0.38, 0.36,
            0.33, 0.38,
        ];
        assert_eq!(values, expected);
    }

    #[test]
    fn infix_series_matches_worked_table() {
        let m = MarkovChain::parse(XYZ_CHAIN).unwrap();
        let w = Word::parse(m.alphabet().clone(), TABLE_WORD).unwrap();
        let y = m.alphabet().symbol("y").unwrap();
        let series = infix_series(&w, y, 10);
        let values: Vec<f64> = series.rows.iter().map(|r| round2(r.value)).collect();
        // only 5 complete chunks fit in 16 letters (s(5)+5 = 15)
        assert_eq!(values, [0.0, 0.5, 0.33, 0.5, 0.2]);
    }

    #[test]
    fn prefix_trivial_cases() {
        let m = MarkovChain::parse(XYZ_CHAIN).unwrap();
        let y = m.alphabet().symbol("y").unwrap();
        let s = prefix_convergence(&m, y, 1, 5);
        // the initial state is never labeled y under seed 5? check both cases
        assert!(s.rows[0].value == 0.0 || s.rows[0].value == 1.0);

        let single = MarkovChain::parse(
            r#"{"alphabet": ["a"], "states": [{"name": "s", "label": "a"}],
                "transitions": [{"from": "s", "to": "s", "prob": 1}]}"#,
        )
        .unwrap();
        let a = single.alphabet().symbol("a").unwrap();
        let s = prefix_convergence(&single, a, 50, 1);
        assert!(s.rows.iter().all(|r| r.value == 1.0));
        let s = infix_convergence(&single, a, 10, 1);
        assert!(s.rows.iter().all(|r| r.value == 1.0));
    }

    #[test]
    fn infix_level_one_is_zero_or_one() {
        let m = MarkovChain::parse(XYZ_CHAIN).unwrap();
        let y = m.alphabet().symbol("y").unwrap();
        for seed in 0..20 {
            let s = infix_convergence(&m, y, 1, seed);
            assert!(s.rows[0].value == 0.0 || s.rows[0].value == 1.0);
        }
    }

    #[test]
    fn lln_point_mass_is_constant() {
        let d = FiniteDistribution::parse("5:1").unwrap();
        let s = triangular_lln(&d, 20, 3).unwrap();
        assert!(s.rows.iter().all(|r| r.value == 5.0));
        assert!(s.params.iter().any(|(k, v)| k == "mean" && v == "5"));
    }

    #[test]
    fn lln_uniform_bernoulli_concentrates() {
        let d = FiniteDistribution::parse("0:0.5,1:0.5").unwrap();
        let mut within = 0;
        let total = 100;
        for seed in 0..total {
            let mut rng = SplitMix64::new(derive_seed(seed, 10_000));
            let mut sum = 0.0;
            let values = d.numeric_values().unwrap();
            for _ in 0..10_000 {
                sum += values[d.sample_index(&mut rng)];
            }
            if (sum / 10_000.0 - 0.5).abs() < 0.02 {
                within += 1;
            }
        }
        // Hoeffding: P(|mean - 0.5| >= 0.02) <= 2 exp(-2 * 10^4 * 4e-4) ~ 0.07%
        assert!(within >= 99, "only {within}/{total} seeds within 0.02");
    }

    #[test]
    fn lln_rows_are_freshly_sampled() {
        let d = FiniteDistribution::parse("0:0.5,1:0.5").unwrap();
        let a = triangular_lln(&d, 30, 9).unwrap();
        let b = triangular_lln(&d, 30, 9).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn distribution_validation() {
        assert!(FiniteDistribution::parse("0:0.5,1:0.4").is_err());
        assert!(FiniteDistribution::parse("").is_err());
        assert!(FiniteDistribution::new(vec![("a".into(), 1.5), ("b".into(), -0.5)]).is_err());
    }

    #[test]
    fn first_visit_single_state_chain() {
        let single = MarkovChain::parse(
            r#"{"alphabet": ["a"], "states": [{"name": "s", "label": "a"}],
                "transitions": [{"from": "s", "to": "s", "prob": 1}]}"#,
        )
        .unwrap();
        let s = first_visit_ratio(&single, 0, 10, 1);
        for r in &s.rows {
            assert_eq!(r.value, 1.0 / r.index as f64);
            assert!(!r.censored);
        }
    }

    #[test]
    fn first_visit_ratio_vanishes_on_example_chain() {
        let m = MarkovChain::parse(XYZ_CHAIN).unwrap();
        let y = m.state_index("y").unwrap();
        let s = first_visit_ratio(&m, y, 1000, 42);
        let tail: Vec<&Row> = s
            .rows
            .iter()
            .filter(|r| r.index >= 900 && !r.censored)
            .collect();
        let mean: f64 = tail.iter().map(|r| r.value).sum::<f64>() / tail.len() as f64;
        assert!(mean < 0.02, "tail mean {mean}");
    }

    #[test]
    fn mode_error_rate_bounds() {
        // rho = 0.75, bound at n = 10 is 1 - 0.75^5
        let (_, bound) = mode_error_rate(0.75, 10, 10, 1).unwrap();
        assert_eq!(bound, 0.7626953125);

        let (emp, bound) = mode_error_rate(1.0, 5, 100, 1).unwrap();
        assert_eq!(bound, 1.0);
        assert_eq!(emp, 1.0);

        assert!(mode_error_rate(0.5, 10, 10, 1).is_err());
    }

    #[test]
    fn mode_error_rate_agrees_with_mode_statistic() {
        // cross-check the counting shortcut against the real mode oracle
        let al = crate::alphabet::Alphabet::new(["a", "b"], false).unwrap();
        let a = al.symbol("a").unwrap();
        for t in 0..200u64 {
            let mut rng = SplitMix64::new(derive_seed(99, t));
            let mut w = Word::empty(al.clone());
            for _ in 0..11 {
                let s = if rng.next_f64() < 0.75 { 0 } else { 1 };
                w.push(Symbol(s));
            }
            let by_count = 2 * w.count(a) > w.len();
            let by_mode = mode(&w) == StatOutcome::Symbol(a);
            assert_eq!(by_count, by_mode);
        }
    }

    #[test]
    fn empirical_respects_bound_sweep() {
        let trials = 100_000;
        for &pa in &[0.6, 0.75, 0.9] {
            for &n in &[4usize, 10, 20, 50] {
                let (emp, bound) = mode_error_rate(pa, n, trials, 7).unwrap();
                let se = (bound * (1.0 - bound) / trials as f64).sqrt();
                assert!(
                    emp >= bound - 3.0 * se,
                    "pa={pa} n={n}: empirical {emp} below bound {bound}"
                );
            }
        }
    }

    #[test]
    fn csv_round_trip() {
        let m = MarkovChain::parse(XYZ_CHAIN).unwrap();
        let y = m.state_index("y").unwrap();
        let s = first_visit_ratio(&m, y, 50, 3);
        let mut buf = Vec::new();
        emit_csv(&s, &mut buf).unwrap();
        let parsed = parse_csv(std::str::from_utf8(&buf).unwrap()).unwrap();
        assert_eq!(parsed, s);

        // empty series: header-only with preamble
        let empty = Series::new("nothing", 1).param("k", "v");
        let mut buf = Vec::new();
        emit_csv(&empty, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.ends_with("index,value\n"));
        assert_eq!(parse_csv(&text).unwrap(), empty);
    }

    #[test]
    fn experiments_are_deterministic() {
        let m = MarkovChain::parse(XYZ_CHAIN).unwrap();
        let y = m.alphabet().symbol("y").unwrap();
        assert_eq!(
            prefix_convergence(&m, y, 200, 8).rows,
            prefix_convergence(&m, y, 200, 8).rows
        );
        assert_eq!(
            infix_convergence(&m, y, 50, 8).rows,
            infix_convergence(&m, y, 50, 8).rows
        );
        assert_eq!(
            mode_error_rate(0.75, 10, 1000, 5).unwrap(),
            mode_error_rate(0.75, 10, 1000, 5).unwrap()
        );
    }
}
