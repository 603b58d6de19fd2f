//! Alphabets, words and the reference (whole-word) mode and median
//! statistics. These are the oracles that the streaming monitors are
//! checked against.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Rendering of the "no value" outcome in all text interfaces.
pub const BOTTOM_TOKEN: &str = "_bot_";

/// Index of a symbol in its alphabet. Hot paths only ever touch indices;
/// names are resolved once at construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Symbol(pub(crate) usize);

impl Symbol {
    pub fn index(self) -> usize {
        self.0
    }
}

/// A finite set of event symbols. When `ordered` is set, the declaration
/// order is the total order used by the median.
#[derive(Debug, Clone)]
pub struct Alphabet {
    symbols: Vec<String>,
    by_name: HashMap<String, usize>,
    ordered: bool,
}

impl Alphabet {
    pub fn new<S: Into<String>>(symbols: impl IntoIterator<Item = S>, ordered: bool) -> Result<Arc<Self>> {
        let symbols: Vec<String> = symbols.into_iter().map(Into::into).collect();
        if symbols.is_empty() {
            return Err(Error::InvalidAlphabet("alphabet must be non-empty".into()));
        }
        let mut by_name = HashMap::with_capacity(symbols.len());
        for (i, s) in symbols.iter().enumerate() {
            if s.is_empty() {
                return Err(Error::InvalidAlphabet("empty symbol name".into()));
            }
            if by_name.insert(s.clone(), i).is_some() {
                return Err(Error::InvalidAlphabet(format!("duplicate symbol `{s}`")));
            }
        }
        Ok(Arc::new(Alphabet { symbols, by_name, ordered }))
    }

    pub fn size(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_ordered(&self) -> bool {
        self.ordered
    }

    pub fn symbol(&self, name: &str) -> Result<Symbol> {
        self.by_name
            .get(name)
            .map(|&i| Symbol(i))
            .ok_or_else(|| Error::UnknownSymbol(name.to_string()))
    }

    pub fn contains(&self, name: &str) -> bool {
        self.by_name.contains_key(name)
    }

    pub fn name(&self, s: Symbol) -> &str {
        &self.symbols[s.0]
    }

    /// The symbol at position `i` of the declaration order.
    pub fn symbol_at(&self, i: usize) -> Result<Symbol> {
        if i < self.symbols.len() {
            Ok(Symbol(i))
        } else {
            Err(Error::UnknownSymbol(format!("#{i}")))
        }
    }

    pub fn symbols(&self) -> impl Iterator<Item = Symbol> + '_ {
        (0..self.symbols.len()).map(Symbol)
    }

    pub fn names(&self) -> &[String] {
        &self.symbols
    }
}

/// A finite event sequence over a shared alphabet. Positions are 1-based
/// in every public operation, matching the usual convention for words.
#[derive(Debug, Clone)]
pub struct Word {
    alphabet: Arc<Alphabet>,
    letters: Vec<Symbol>,
}

impl Word {
    pub fn new(alphabet: Arc<Alphabet>, letters: Vec<Symbol>) -> Self {
        debug_assert!(letters.iter().all(|s| s.0 < alphabet.size()));
        Word { alphabet, letters }
    }

    pub fn empty(alphabet: Arc<Alphabet>) -> Self {
        Word { alphabet, letters: Vec::new() }
    }

    /// Parses whitespace-separated symbol names.
    pub fn parse(alphabet: Arc<Alphabet>, text: &str) -> Result<Self> {
        let letters = text
            .split_whitespace()
            .map(|tok| alphabet.symbol(tok))
            .collect::<Result<Vec<_>>>()?;
        Ok(Word { alphabet, letters })
    }

    pub fn alphabet(&self) -> &Arc<Alphabet> {
        &self.alphabet
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    /// Letter at 1-based position `i`.
    pub fn at(&self, i: usize) -> Symbol {
        self.letters[i - 1]
    }

    pub fn letters(&self) -> &[Symbol] {
        &self.letters
    }

    pub fn push(&mut self, s: Symbol) {
        debug_assert!(s.0 < self.alphabet.size());
        self.letters.push(s);
    }

    /// Number of occurrences of `a` in the word.
    pub fn count(&self, a: Symbol) -> usize {
        self.letters.iter().filter(|&&s| s == a).count()
    }

    /// The infix from position `i` to `j`, both inclusive and 1-based.
    pub fn infix(&self, i: usize, j: usize) -> Result<Word> {
        if i < 1 || i > j || j > self.letters.len() {
            return Err(Error::PositionOutOfRange { i, j, len: self.letters.len() });
        }
        Ok(Word {
            alphabet: self.alphabet.clone(),
            letters: self.letters[i - 1..j].to_vec(),
        })
    }

    /// The prefix of length `i`.
    pub fn prefix(&self, i: usize) -> Result<Word> {
        if i == 0 {
            return Ok(Word::empty(self.alphabet.clone()));
        }
        self.infix(1, i)
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, s) in self.letters.iter().enumerate() {
            if k > 0 {
                f.write_str(" ")?;
            }
            f.write_str(self.alphabet.name(*s))?;
        }
        Ok(())
    }
}

/// Value of a symbol-valued statistic: a symbol, or bottom when the
/// statistic is undefined on the word.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StatOutcome {
    Symbol(Symbol),
    Bottom,
}

impl StatOutcome {
    pub fn render(&self, alphabet: &Alphabet) -> String {
        match self {
            StatOutcome::Symbol(s) => alphabet.name(*s).to_string(),
            StatOutcome::Bottom => BOTTOM_TOKEN.to_string(),
        }
    }
}

/// The mode: the unique strictly most frequent letter, or bottom.
pub fn mode(w: &Word) -> StatOutcome {
    let mut counts = vec![0usize; w.alphabet.size()];
    for &s in &w.letters {
        counts[s.0] += 1;
    }
    let mut best: Option<(usize, usize)> = None; // (index, count)
    let mut tied = false;
    for (i, &c) in counts.iter().enumerate() {
        match best {
            Some((_, bc)) if c > bc => {
                best = Some((i, c));
                tied = false;
            }
            Some((_, bc)) if c == bc => tied = true,
            None => best = Some((i, c)),
            _ => {}
        }
    }
    match best {
        Some((i, c)) if !tied && c > 0 => StatOutcome::Symbol(Symbol(i)),
        _ => StatOutcome::Bottom,
    }
}

/// The median under the alphabet's declaration order: the unique letter `a`
/// with strictly fewer occurrences strictly above it than weakly below, and
/// strictly fewer strictly below than weakly above.
pub fn median(w: &Word) -> Result<StatOutcome> {
    if !w.alphabet.is_ordered() {
        return Err(Error::UnorderedAlphabet);
    }
    let mut counts = vec![0usize; w.alphabet.size()];
    for &s in &w.letters {
        counts[s.0] += 1;
    }
    let total: usize = counts.iter().sum();
    let mut found = None;
    let mut below = 0usize; // occurrences strictly before index a in the order
    for (a, &ca) in counts.iter().enumerate() {
        let above = total - below - ca;
        if above < below + ca && below < ca + above {
            debug_assert!(found.is_none(), "median must be unique");
            found = Some(Symbol(a));
        }
        below += ca;
    }
    Ok(found.map_or(StatOutcome::Bottom, StatOutcome::Symbol))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn abc(ordered: bool) -> Arc<Alphabet> {
        Alphabet::new(["a", "b", "c"], ordered).unwrap()
    }

    /// The i.i.d. example word used throughout the worked traces.
    pub(crate) const EXAMPLE_WORD: &str = "c b b a b a c a a b c a c a a a";

    #[test]
    fn count_examples() {
        let al = abc(false);
        let w = Word::parse(al.clone(), EXAMPLE_WORD).unwrap();
        assert_eq!(w.count(al.symbol("a").unwrap()), 8);

        let empty = Word::empty(al.clone());
        assert_eq!(empty.count(al.symbol("a").unwrap()), 0);

        let aaa = Word::parse(al.clone(), "a a a").unwrap();
        assert_eq!(aaa.count(al.symbol("b").unwrap()), 0);
    }

    #[test]
    fn unknown_symbol_is_rejected() {
        let al = abc(false);
        assert!(matches!(
            Word::parse(al, "a d"),
            Err(Error::UnknownSymbol(name)) if name == "d"
        ));
    }

    #[test]
    fn infix_examples() {
        let al = Alphabet::new(["x", "y", "z"], false).unwrap();
        let w = Word::parse(al.clone(), "x y z x y").unwrap();
        assert_eq!(w.infix(2, 3).unwrap().to_string(), "y z");
        assert_eq!(w.infix(1, w.len()).unwrap().to_string(), w.to_string());

        let long = Word::parse(al, "x y z x y z x y x y z x y z x y").unwrap();
        assert_eq!(long.infix(7, 10).unwrap().to_string(), "x y x y");
    }

    #[test]
    fn infix_out_of_range() {
        let al = abc(false);
        let w = Word::parse(al, "a b c").unwrap();
        assert!(w.infix(0, 2).is_err());
        assert!(w.infix(2, 4).is_err());
        assert!(w.infix(3, 2).is_err());
    }

    #[test]
    fn mode_examples() {
        let al = abc(false);
        let w = Word::parse(al.clone(), "c b b a b").unwrap();
        assert_eq!(mode(&w), StatOutcome::Symbol(al.symbol("b").unwrap()));

        let w = Word::parse(al.clone(), "c b").unwrap();
        assert_eq!(mode(&w), StatOutcome::Bottom);

        assert_eq!(mode(&Word::empty(al)), StatOutcome::Bottom);
    }

    #[test]
    fn median_examples() {
        let al = abc(true);
        let w = Word::parse(al.clone(), "a b c").unwrap();
        assert_eq!(median(&w).unwrap(), StatOutcome::Symbol(al.symbol("b").unwrap()));

        let w = Word::parse(al.clone(), "a c c").unwrap();
        assert_eq!(median(&w).unwrap(), StatOutcome::Symbol(al.symbol("c").unwrap()));

        assert_eq!(median(&Word::empty(al)).unwrap(), StatOutcome::Bottom);
    }

    #[test]
    fn median_requires_order() {
        let al = abc(false);
        let w = Word::parse(al, "a b c").unwrap();
        assert!(matches!(median(&w), Err(Error::UnorderedAlphabet)));
    }

    /// Independent brute-force median: try every candidate against the two
    /// defining inequalities directly.
    fn median_brute(w: &Word) -> Vec<Symbol> {
        let al = w.alphabet();
        al.symbols()
            .filter(|&a| {
                let above: usize = al.symbols().filter(|&s| s > a).map(|s| w.count(s)).sum();
                let weakly_below: usize = al.symbols().filter(|&s| s <= a).map(|s| w.count(s)).sum();
                let below: usize = al.symbols().filter(|&s| s < a).map(|s| w.count(s)).sum();
                let weakly_above: usize = al.symbols().filter(|&s| s >= a).map(|s| w.count(s)).sum();
                above < weakly_below && below < weakly_above
            })
            .collect()
    }

    fn all_words(al: &Arc<Alphabet>, max_len: usize) -> Vec<Word> {
        let mut out = vec![Word::empty(al.clone())];
        let mut frontier = vec![Vec::new()];
        for _ in 0..max_len {
            let mut next = Vec::new();
            for w in &frontier {
                for s in al.symbols() {
                    let mut v = w.clone();
                    v.push(s);
                    out.push(Word::new(al.clone(), v.clone()));
                    next.push(v);
                }
            }
            frontier = next;
        }
        out
    }

    #[test]
    fn mode_is_strict_maximum_exhaustive() {
        let al = abc(false);
        for w in all_words(&al, 6) {
            if let StatOutcome::Symbol(a) = mode(&w) {
                for b in al.symbols() {
                    if b != a {
                        assert!(w.count(a) > w.count(b), "word {w}: mode {a:?} not strict");
                    }
                }
            } else {
                // bottom: no strict maximum exists
                let max = al.symbols().map(|s| w.count(s)).max().unwrap();
                let argmax = al.symbols().filter(|&s| w.count(s) == max).count();
                assert!(max == 0 || argmax >= 2, "word {w}: bottom but strict max exists");
            }
        }
    }

    #[test]
    fn median_unique_and_matches_brute_force() {
        let al = Alphabet::new(["a", "b", "c", "d"], true).unwrap();
        for w in all_words(&al, 6) {
            let brute = median_brute(&w);
            assert!(brute.len() <= 1, "word {w}: {} medians", brute.len());
            let expect = brute.first().copied().map_or(StatOutcome::Bottom, StatOutcome::Symbol);
            assert_eq!(median(&w).unwrap(), expect, "word {w}");
        }
    }

    #[test]
    fn infix_prefix_algebra() {
        let al = abc(false);
        for w in all_words(&al, 5) {
            for i in 1..=w.len() {
                assert_eq!(
                    w.infix(1, i).unwrap().to_string(),
                    w.prefix(i).unwrap().to_string()
                );
                for j in i..=w.len() {
                    let inner = w.infix(i, j).unwrap();
                    for k in 1..=inner.len() {
                        for l in k..=inner.len() {
                            assert_eq!(
                                inner.infix(k, l).unwrap().to_string(),
                                w.infix(i + k - 1, i + l - 1).unwrap().to_string()
                            );
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn count_is_additive_over_concatenation() {
        let al = abc(false);
        let words = all_words(&al, 4);
        for w in &words {
            for v in &words {
                let mut cat = w.clone();
                for &s in v.letters() {
                    cat.push(s);
                }
                for s in al.symbols() {
                    assert_eq!(cat.count(s), w.count(s) + v.count(s));
                }
            }
        }
    }
}
