//! Frequency formulas: Boolean combinations of strict linear inequalities
//! over letter frequencies, with integer coefficients.
//!
//! Grammar:
//!
//! ```text
//! formula := or
//! or      := and { "|" and }
//! and     := unary { "&" unary }
//! unary   := "!" unary | "(" formula ")" | atom
//! atom    := linexpr cmp linexpr
//! cmp     := ">" | "<"
//! linexpr := ["-"] term { ("+" | "-") term }
//! term    := integer | integer "*" "f(" symbol ")" | "f(" symbol ")"
//! ```
//!
//! Atoms are normalized at parse time to the form `sum a_s * f(s) > a`;
//! `<` comparisons are rewritten by negating both sides. Non-strict
//! comparators are rejected: only strict inequalities over empirical
//! frequencies stabilize in the limit.

use std::fmt;
use std::sync::Arc;

use crate::alphabet::{Alphabet, Symbol, Word};
use crate::error::{Error, Result};
use crate::monitor::StreamMonitor;

/// A normalized atomic inequality `sum coeffs[s] * f(s) > rhs`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Atom {
    /// One integer coefficient per alphabet symbol (dense, default 0).
    pub coeffs: Vec<i64>,
    pub rhs: i64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Node {
    Atom(Atom),
    Not(Box<Node>),
    And(Vec<Node>),
    Or(Vec<Node>),
}

#[derive(Debug, Clone)]
pub struct FrequencyFormula {
    alphabet: Arc<Alphabet>,
    root: Node,
}

impl PartialEq for FrequencyFormula {
    fn eq(&self, other: &Self) -> bool {
        self.alphabet.names() == other.alphabet.names() && self.root == other.root
    }
}

impl FrequencyFormula {
    pub fn new(alphabet: Arc<Alphabet>, root: Node) -> Self {
        FrequencyFormula { alphabet, root }
    }

    pub fn alphabet(&self) -> &Arc<Alphabet> {
        &self.alphabet
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    /// Atomic subformulas in left-to-right AST order; duplicate occurrences
    /// are kept distinct.
    pub fn atoms(&self) -> Vec<&Atom> {
        fn walk<'a>(node: &'a Node, out: &mut Vec<&'a Atom>) {
            match node {
                Node::Atom(a) => out.push(a),
                Node::Not(c) => walk(c, out),
                Node::And(cs) | Node::Or(cs) => cs.iter().for_each(|c| walk(c, out)),
            }
        }
        let mut out = Vec::new();
        walk(&self.root, &mut out);
        out
    }
}

/// Evaluates a normalized atom over exact occurrence counts:
/// `sum coeffs[s] * counts[s] > rhs * len`, all in integers.
pub fn eval_atom_counts(atom: &Atom, counts: &[usize], len: usize) -> Result<bool> {
    if len == 0 {
        return Err(Error::EmptyWord);
    }
    debug_assert_eq!(counts.len(), atom.coeffs.len());
    let lhs: i128 = atom
        .coeffs
        .iter()
        .zip(counts)
        .map(|(&a, &c)| a as i128 * c as i128)
        .sum();
    Ok(lhs > atom.rhs as i128 * len as i128)
}

/// Reference semantics: Boolean evaluation over the whole word's counts.
pub fn eval_formula(phi: &FrequencyFormula, w: &Word) -> Result<bool> {
    if w.is_empty() {
        return Err(Error::EmptyWord);
    }
    let mut counts = vec![0usize; phi.alphabet.size()];
    for &s in w.letters() {
        counts[s.index()] += 1;
    }
    fn eval(node: &Node, counts: &[usize], len: usize) -> Result<bool> {
        Ok(match node {
            Node::Atom(a) => eval_atom_counts(a, counts, len)?,
            Node::Not(c) => !eval(c, counts, len)?,
            Node::And(cs) => {
                for c in cs {
                    if !eval(c, counts, len)? {
                        return Ok(false);
                    }
                }
                true
            }
            Node::Or(cs) => {
                for c in cs {
                    if eval(c, counts, len)? {
                        return Ok(true);
                    }
                }
                false
            }
        })
    }
    eval(&phi.root, &counts, w.len())
}

/// The mode-existence formula: some letter is strictly more frequent than
/// every other letter.
pub fn mode_existence_formula(alphabet: &Arc<Alphabet>) -> Result<FrequencyFormula> {
    let k = alphabet.size();
    if k < 2 {
        return Err(Error::InvalidAlphabet(
            "mode-existence formula needs at least two symbols".into(),
        ));
    }
    let disjuncts: Vec<Node> = (0..k)
        .map(|a| {
            let conjuncts: Vec<Node> = (0..k)
                .filter(|&s| s != a)
                .map(|s| {
                    let mut coeffs = vec![0i64; k];
                    coeffs[a] = 1;
                    coeffs[s] = -1;
                    Node::Atom(Atom { coeffs, rhs: 0 })
                })
                .collect();
            if conjuncts.len() == 1 {
                conjuncts.into_iter().next().unwrap()
            } else {
                Node::And(conjuncts)
            }
        })
        .collect();
    Ok(FrequencyFormula::new(alphabet.clone(), Node::Or(disjuncts)))
}

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Int(i64),
    Freq(String),
    Punct(char),
    NonStrict(String),
}

struct Lexer {
    chars: Vec<char>,
    pos: usize,
    line: usize,
    col: usize,
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
}

impl Lexer {
    fn new(src: &str) -> Self {
        Lexer { chars: src.chars().collect(), pos: 0, line: 1, col: 1 }
    }

    fn err(&self, msg: impl Into<String>) -> Error {
        Error::FormulaParse { line: self.line, col: self.col, msg: msg.into() }
    }

    fn bump(&mut self) -> char {
        let c = self.chars[self.pos];
        self.pos += 1;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        c
    }

    fn tokens(mut self) -> Result<Vec<Spanned>> {
        let mut out = Vec::new();
        while self.pos < self.chars.len() {
            let c = self.chars[self.pos];
            if c.is_whitespace() {
                self.bump();
                continue;
            }
            let (line, col) = (self.line, self.col);
            let tok = match c {
                '0'..='9' => {
                    let start = self.pos;
                    while self.pos < self.chars.len() && self.chars[self.pos].is_ascii_digit() {
                        self.bump();
                    }
                    let text: String = self.chars[start..self.pos].iter().collect();
                    let n: i64 = text.parse().map_err(|_| Error::CoefficientOverflow)?;
                    Tok::Int(n)
                }
                'f' => {
                    self.bump();
                    if self.pos >= self.chars.len() || self.chars[self.pos] != '(' {
                        return Err(self.err("expected `(` after `f`"));
                    }
                    self.bump();
                    let start = self.pos;
                    while self.pos < self.chars.len() && self.chars[self.pos] != ')' {
                        self.bump();
                    }
                    if self.pos >= self.chars.len() {
                        return Err(self.err("unterminated `f(`"));
                    }
                    let name: String = self.chars[start..self.pos].iter().collect::<String>();
                    let name = name.trim().to_string();
                    self.bump(); // ')'
                    if name.is_empty() {
                        return Err(self.err("empty symbol in f(...)"));
                    }
                    Tok::Freq(name)
                }
                '>' | '<' => {
                    self.bump();
                    if self.pos < self.chars.len() && self.chars[self.pos] == '=' {
                        self.bump();
                        Tok::NonStrict(format!("{c}="))
                    } else {
                        Tok::Punct(c)
                    }
                }
                '=' => {
                    self.bump();
                    if self.pos < self.chars.len() && self.chars[self.pos] == '=' {
                        self.bump();
                        Tok::NonStrict("==".into())
                    } else {
                        Tok::NonStrict("=".into())
                    }
                }
                '(' | ')' | '&' | '|' | '!' | '*' | '+' | '-' => {
                    self.bump();
                    Tok::Punct(c)
                }
                other => {
                    return Err(self.err(format!("unexpected character `{other}`")));
                }
            };
            out.push(Spanned { tok, line, col });
        }
        Ok(out)
    }
}

/// A linear expression over frequencies plus an integer constant, used as
/// an intermediate during normalization.
#[derive(Clone)]
struct LinExpr {
    coeffs: Vec<i64>,
    constant: i64,
}

struct Parser<'a> {
    toks: Vec<Spanned>,
    pos: usize,
    alphabet: &'a Arc<Alphabet>,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|s| &s.tok)
    }

    fn here(&self) -> (usize, usize) {
        self.toks
            .get(self.pos.min(self.toks.len().saturating_sub(1)))
            .map_or((1, 1), |s| (s.line, s.col))
    }

    fn err(&self, msg: impl Into<String>) -> Error {
        let (line, col) = self.here();
        Error::FormulaParse { line, col, msg: msg.into() }
    }

    fn eat_punct(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Punct(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect_punct(&mut self, c: char) -> Result<()> {
        if self.eat_punct(c) {
            Ok(())
        } else {
            Err(self.err(format!("expected `{c}`")))
        }
    }

    fn formula(&mut self) -> Result<Node> {
        let mut items = vec![self.and_chain()?];
        while self.eat_punct('|') {
            items.push(self.and_chain()?);
        }
        Ok(if items.len() == 1 { items.pop().unwrap() } else { Node::Or(items) })
    }

    fn and_chain(&mut self) -> Result<Node> {
        let mut items = vec![self.unary()?];
        while self.eat_punct('&') {
            items.push(self.unary()?);
        }
        Ok(if items.len() == 1 { items.pop().unwrap() } else { Node::And(items) })
    }

    fn unary(&mut self) -> Result<Node> {
        if self.eat_punct('!') {
            return Ok(Node::Not(Box::new(self.unary()?)));
        }
        if self.eat_punct('(') {
            let inner = self.formula()?;
            self.expect_punct(')')?;
            return Ok(inner);
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<Node> {
        let lhs = self.linexpr()?;
        let (line, col) = self.here();
        let cmp = match self.peek() {
            Some(Tok::Punct('>')) => '>',
            Some(Tok::Punct('<')) => '<',
            Some(Tok::NonStrict(op)) => {
                return Err(Error::NonStrictComparator { line, col, op: op.clone() });
            }
            _ => return Err(self.err("expected comparator `>` or `<`")),
        };
        self.pos += 1;
        let rhs = self.linexpr()?;
        // normalize to lhs' > rhs' form; `<` swaps the sides
        let (big, small) = if cmp == '>' { (lhs, rhs) } else { (rhs, lhs) };
        let mut coeffs = Vec::with_capacity(big.coeffs.len());
        for (a, b) in big.coeffs.iter().zip(&small.coeffs) {
            coeffs.push(a.checked_sub(*b).ok_or(Error::CoefficientOverflow)?);
        }
        let rhs_const = small
            .constant
            .checked_sub(big.constant)
            .ok_or(Error::CoefficientOverflow)?;
        Ok(Node::Atom(Atom { coeffs, rhs: rhs_const }))
    }

    fn linexpr(&mut self) -> Result<LinExpr> {
        let mut expr = LinExpr { coeffs: vec![0; self.alphabet.size()], constant: 0 };
        let mut negate = self.eat_punct('-');
        loop {
            self.term(&mut expr, negate)?;
            if self.eat_punct('+') {
                negate = false;
            } else if self.eat_punct('-') {
                negate = true;
            } else {
                break;
            }
        }
        Ok(expr)
    }

    fn term(&mut self, expr: &mut LinExpr, negate: bool) -> Result<()> {
        let apply = |v: i64| if negate { v.checked_neg() } else { Some(v) };
        match self.peek().cloned() {
            Some(Tok::Int(n)) => {
                self.pos += 1;
                if self.eat_punct('*') {
                    match self.peek().cloned() {
                        Some(Tok::Freq(name)) => {
                            self.pos += 1;
                            let s = self.alphabet.symbol(&name)?;
                            let k = apply(n).ok_or(Error::CoefficientOverflow)?;
                            expr.coeffs[s.index()] = expr.coeffs[s.index()]
                                .checked_add(k)
                                .ok_or(Error::CoefficientOverflow)?;
                        }
                        _ => return Err(self.err("expected f(symbol) after `*`")),
                    }
                } else {
                    let k = apply(n).ok_or(Error::CoefficientOverflow)?;
                    expr.constant = expr
                        .constant
                        .checked_add(k)
                        .ok_or(Error::CoefficientOverflow)?;
                }
                Ok(())
            }
            Some(Tok::Freq(name)) => {
                self.pos += 1;
                let s = self.alphabet.symbol(&name)?;
                let k = apply(1).unwrap();
                expr.coeffs[s.index()] = expr.coeffs[s.index()]
                    .checked_add(k)
                    .ok_or(Error::CoefficientOverflow)?;
                Ok(())
            }
            _ => Err(self.err("expected a term")),
        }
    }
}

/// Parses a frequency formula over the given alphabet.
pub fn parse_formula(text: &str, alphabet: &Arc<Alphabet>) -> Result<FrequencyFormula> {
    let toks = Lexer::new(text).tokens()?;
    let mut p = Parser { toks, pos: 0, alphabet };
    let root = p.formula()?;
    if p.pos != p.toks.len() {
        return Err(p.err("trailing input after formula"));
    }
    Ok(FrequencyFormula::new(alphabet.clone(), root))
}

// ---------------------------------------------------------------------------
// Printing (canonical parenthesized form; reparses to an equal AST)
// ---------------------------------------------------------------------------

impl fmt::Display for FrequencyFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn atom(a: &Atom, al: &Alphabet, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            // print as positive-part > negative-part so that no side needs
            // a leading minus
            let mut lhs: Vec<String> = Vec::new();
            let mut rhs: Vec<String> = Vec::new();
            for (i, &c) in a.coeffs.iter().enumerate() {
                let name = al.name(Symbol(i));
                if c > 0 {
                    lhs.push(format!("{c}*f({name})"));
                } else if c < 0 {
                    rhs.push(format!("{}*f({name})", -(c as i128)));
                }
            }
            if a.rhs > 0 {
                rhs.push(a.rhs.to_string());
            } else if a.rhs < 0 {
                lhs.push((-(a.rhs as i128)).to_string());
            }
            let join = |v: Vec<String>| if v.is_empty() { "0".to_string() } else { v.join(" + ") };
            write!(f, "{} > {}", join(lhs), join(rhs))
        }
        fn node(n: &Node, al: &Alphabet, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            match n {
                Node::Atom(a) => atom(a, al, f),
                Node::Not(c) => {
                    f.write_str("!(")?;
                    node(c, al, f)?;
                    f.write_str(")")
                }
                Node::And(cs) => {
                    f.write_str("(")?;
                    for (i, c) in cs.iter().enumerate() {
                        if i > 0 {
                            f.write_str(" & ")?;
                        }
                        node(c, al, f)?;
                    }
                    f.write_str(")")
                }
                Node::Or(cs) => {
                    f.write_str("(")?;
                    for (i, c) in cs.iter().enumerate() {
                        if i > 0 {
                            f.write_str(" | ")?;
                        }
                        node(c, al, f)?;
                    }
                    f.write_str(")")
                }
            }
        }
        node(&self.root, &self.alphabet, f)
    }
}

// ---------------------------------------------------------------------------
// The 4-counter round-robin limit monitor
// ---------------------------------------------------------------------------

/// Limit monitor for a frequency formula with k atoms. The stream is split
/// into consecutive infixes; level n consists of k infixes of length n, one
/// per atom in order. Within an infix each letter contributes its atom's
/// per-letter increment `coeffs[s] - rhs`, split into a positive and a
/// negative counter; at the infix end the cached truth of that atom is
/// `c_pos > c_neg`. After the k'th infix of a level the formula is
/// re-evaluated over the cache.
///
/// Unbounded counters: c_pos, c_neg, n, i — exactly four. The atom index
/// and the truth cache are bounded by the formula, hence finite-state.
#[derive(Debug, Clone)]
pub struct FormulaMonitor {
    formula: FrequencyFormula,
    atoms: Vec<Atom>,
    c_pos: u64,
    c_neg: u64,
    n: u64,
    i: u64,
    atom_index: usize,
    truth_cache: Vec<bool>,
    current_output: bool,
}

impl FormulaMonitor {
    pub fn new(formula: FrequencyFormula) -> Self {
        let atoms: Vec<Atom> = formula.atoms().into_iter().cloned().collect();
        debug_assert!(!atoms.is_empty());
        let k = atoms.len();
        FormulaMonitor {
            formula,
            atoms,
            c_pos: 0,
            c_neg: 0,
            n: 1,
            i: 1,
            atom_index: 0,
            truth_cache: vec![false; k],
            current_output: false,
        }
    }

    pub const UNBOUNDED_COUNTERS: usize = 4;

    pub fn atom_count(&self) -> usize {
        self.atoms.len()
    }

    /// Cached per-atom truths from the most recent completed infixes.
    pub fn truth_cache(&self) -> &[bool] {
        &self.truth_cache
    }

    pub fn level(&self) -> u64 {
        self.n
    }

    fn evaluate_cache(&self) -> bool {
        fn eval(node: &Node, cache: &[bool], idx: &mut usize) -> bool {
            match node {
                Node::Atom(_) => {
                    let v = cache[*idx];
                    *idx += 1;
                    v
                }
                Node::Not(c) => !eval(c, cache, idx),
                Node::And(cs) => {
                    let mut all = true;
                    for c in cs {
                        all &= eval(c, cache, idx);
                    }
                    all
                }
                Node::Or(cs) => {
                    let mut any = false;
                    for c in cs {
                        any |= eval(c, cache, idx);
                    }
                    any
                }
            }
        }
        let mut idx = 0;
        eval(&self.formula.root, &self.truth_cache, &mut idx)
    }
}

impl StreamMonitor for FormulaMonitor {
    type Output = bool;

    fn next(&mut self, event: Symbol) -> bool {
        let atom = &self.atoms[self.atom_index];
        let d = atom.coeffs[event.index()] - atom.rhs;
        if d > 0 {
            self.c_pos += d as u64;
        } else {
            self.c_neg += (-d) as u64;
        }
        if self.i == self.n {
            // infix for the current atom is complete
            self.truth_cache[self.atom_index] = self.c_pos > self.c_neg;
            self.c_pos = 0;
            self.c_neg = 0;
            self.atom_index += 1;
            if self.atom_index == self.atoms.len() {
                self.current_output = self.evaluate_cache();
                self.atom_index = 0;
                self.n += 1;
            }
            self.i = 1;
        } else {
            self.i += 1;
        }
        self.current_output
    }

    fn output(&self) -> bool {
        self.current_output
    }
}
