//! Relational structures and prenex-normal-form first-order sentences.
//!
//! Universes are `{0, …, n−1}`. Each relation is stored as a dense bit array
//! of `n^r` cells in row-major (lexicographic) tuple order, so a membership
//! test is a single array access. Formula variables are canonical indices
//! `1..=k` assigned in prefix order.

mod parse;

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

pub use parse::{parse_instance, parse_instance_with, ParseOptions};

/// Default bound on relation arity.
pub const DEFAULT_ARITY_CAP: usize = 4;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FoError {
    #[error("{line}:{col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("relation `{symbol}` has arity {expected}, got {found} arguments")]
    ArityMismatch { symbol: String, expected: usize, found: usize },
    #[error("arity {arity} of `{symbol}` exceeds the cap {cap}")]
    ArityCap { symbol: String, arity: usize, cap: usize },
    #[error("unknown relation symbol `{0}`")]
    UnknownSymbol(String),
    #[error("duplicate relation symbol `{0}`")]
    DuplicateSymbol(String),
    #[error("duplicate relation block for `{0}`")]
    DuplicateRelation(String),
    #[error("variable `{0}` is not bound by the prefix")]
    UnboundVariable(String),
    #[error("variable `{0}` is quantified twice")]
    DuplicateVariable(String),
    #[error("universe element {value} out of range for universe size {size}")]
    OutOfRange { value: usize, size: usize },
    #[error("universe size must be at least 1")]
    EmptyUniverse,
    #[error("no value assigned to variable x{0}")]
    MissingAssignment(usize),
}

/// Relation symbols with their arities.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Vocabulary {
    entries: Vec<(String, usize)>,
    index: HashMap<String, usize>,
}

impl Vocabulary {
    pub fn new<I, S>(entries: I, arity_cap: usize) -> Result<Self, FoError>
    where
        I: IntoIterator<Item = (S, usize)>,
        S: Into<String>,
    {
        let mut vocab = Self::default();
        for (name, arity) in entries {
            vocab.push(name.into(), arity, arity_cap)?;
        }
        Ok(vocab)
    }

    fn push(&mut self, name: String, arity: usize, cap: usize) -> Result<(), FoError> {
        if arity == 0 || arity > cap {
            return Err(FoError::ArityCap { symbol: name, arity, cap });
        }
        if self.index.contains_key(&name) {
            return Err(FoError::DuplicateSymbol(name));
        }
        self.index.insert(name.clone(), self.entries.len());
        self.entries.push((name, arity));
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn lookup(&self, name: &str) -> Option<SymbolId> {
        self.index.get(name).copied().map(SymbolId)
    }

    pub fn name(&self, id: SymbolId) -> &str {
        &self.entries[id.0].0
    }

    pub fn arity(&self, id: SymbolId) -> usize {
        self.entries[id.0].1
    }

    pub fn symbols(&self) -> impl Iterator<Item = SymbolId> + '_ {
        (0..self.entries.len()).map(SymbolId)
    }
}

/// Index of a relation symbol within its vocabulary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SymbolId(pub usize);

/// Canonical variable index, `1..=k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var(pub usize);

impl Var {
    /// Zero-based slot in an assignment vector.
    pub fn slot(self) -> usize {
        self.0 - 1
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "x{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct Relation {
    bits: Vec<bool>,
    tuples: Vec<Vec<usize>>,
}

/// A finite relational structure with universe `{0, …, n−1}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Structure {
    universe_size: usize,
    vocab: Vocabulary,
    relations: Vec<Relation>,
}

impl Structure {
    /// Builds a structure from tuple lists, one per vocabulary symbol.
    /// Repeated tuples are harmless.
    pub fn new(
        universe_size: usize,
        vocab: Vocabulary,
        tuples: Vec<Vec<Vec<usize>>>,
    ) -> Result<Self, FoError> {
        if universe_size == 0 {
            return Err(FoError::EmptyUniverse);
        }
        assert_eq!(tuples.len(), vocab.len(), "one tuple list per symbol");
        let mut relations = Vec::with_capacity(vocab.len());
        for (id, list) in vocab.symbols().zip(tuples) {
            let arity = vocab.arity(id);
            let mut bits = vec![false; universe_size.pow(arity as u32)];
            for t in &list {
                if t.len() != arity {
                    return Err(FoError::ArityMismatch {
                        symbol: vocab.name(id).to_string(),
                        expected: arity,
                        found: t.len(),
                    });
                }
                bits[cell(universe_size, t)?] = true;
            }
            relations.push(Relation::from_bits(universe_size, arity, bits));
        }
        Ok(Self { universe_size, vocab, relations })
    }

    /// Universe size `n`; elements are `0..n`.
    pub fn universe_size(&self) -> usize {
        self.universe_size
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    /// `|A| + |τ| + Σ |R|·arity(R)`.
    pub fn size(&self) -> usize {
        self.universe_size
            + self.vocab.len()
            + self
                .vocab
                .symbols()
                .map(|id| self.relations[id.0].tuples.len() * self.vocab.arity(id))
                .sum::<usize>()
    }

    /// Membership by symbol name with full validation.
    pub fn membership(&self, symbol: &str, tuple: &[usize]) -> Result<bool, FoError> {
        let id = self
            .vocab
            .lookup(symbol)
            .ok_or_else(|| FoError::UnknownSymbol(symbol.to_string()))?;
        let arity = self.vocab.arity(id);
        if tuple.len() != arity {
            return Err(FoError::ArityMismatch {
                symbol: symbol.to_string(),
                expected: arity,
                found: tuple.len(),
            });
        }
        Ok(self.relations[id.0].bits[cell(self.universe_size, tuple)?])
    }

    /// Unchecked membership: one array access. `tuple` must be in range.
    #[inline]
    pub fn contains(&self, id: SymbolId, tuple: &[usize]) -> bool {
        let idx = tuple.iter().fold(0, |acc, &a| acc * self.universe_size + a);
        self.relations[id.0].bits[idx]
    }

    /// Tuples of a relation in lexicographic order.
    pub fn tuples(&self, id: SymbolId) -> &[Vec<usize>] {
        &self.relations[id.0].tuples
    }

    /// Same structure with `tuple` added to relation `id`.
    pub fn with_tuple(&self, id: SymbolId, tuple: &[usize]) -> Result<Self, FoError> {
        let mut lists: Vec<Vec<Vec<usize>>> =
            self.vocab.symbols().map(|s| self.tuples(s).to_vec()).collect();
        lists[id.0].push(tuple.to_vec());
        Self::new(self.universe_size, self.vocab.clone(), lists)
    }
}

impl Relation {
    fn from_bits(n: usize, arity: usize, bits: Vec<bool>) -> Self {
        let tuples = bits
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(|(mut idx, _)| {
                let mut t = vec![0; arity];
                for slot in t.iter_mut().rev() {
                    *slot = idx % n;
                    idx /= n;
                }
                t
            })
            .collect();
        Self { bits, tuples }
    }
}

fn cell(n: usize, tuple: &[usize]) -> Result<usize, FoError> {
    tuple.iter().try_fold(0, |acc, &a| {
        if a >= n {
            Err(FoError::OutOfRange { value: a, size: n })
        } else {
            Ok(acc * n + a)
        }
    })
}

/// Quantifier-free formula.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Matrix {
    Equal(Var, Var),
    Rel(SymbolId, Vec<Var>),
    Not(Box<Matrix>),
    And(Box<Matrix>, Box<Matrix>),
    Or(Box<Matrix>, Box<Matrix>),
    /// `true` / `false`; the only way to write a ground matrix.
    Const(bool),
}

impl Matrix {
    pub fn not(m: Matrix) -> Self {
        Matrix::Not(Box::new(m))
    }

    pub fn and(a: Matrix, b: Matrix) -> Self {
        Matrix::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Matrix, b: Matrix) -> Self {
        Matrix::Or(Box::new(a), Box::new(b))
    }

    /// Node count `|ψ|`.
    pub fn size(&self) -> usize {
        match self {
            Matrix::Equal(..) | Matrix::Rel(..) | Matrix::Const(_) => 1,
            Matrix::Not(m) => 1 + m.size(),
            Matrix::And(a, b) | Matrix::Or(a, b) => 1 + a.size() + b.size(),
        }
    }

    /// Largest variable index occurring in the matrix.
    pub fn max_var(&self) -> usize {
        match self {
            Matrix::Equal(a, b) => a.0.max(b.0),
            Matrix::Rel(_, args) => args.iter().map(|v| v.0).max().unwrap_or(0),
            Matrix::Not(m) => m.max_var(),
            Matrix::And(a, b) | Matrix::Or(a, b) => a.max_var().max(b.max_var()),
            Matrix::Const(_) => 0,
        }
    }

    /// True when no `Not` node occurs.
    pub fn is_positive(&self) -> bool {
        match self {
            Matrix::Not(_) => false,
            Matrix::And(a, b) | Matrix::Or(a, b) => a.is_positive() && b.is_positive(),
            _ => true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Quantifier {
    Exists,
    Forall,
}

impl Quantifier {
    pub fn dual(self) -> Self {
        match self {
            Quantifier::Exists => Quantifier::Forall,
            Quantifier::Forall => Quantifier::Exists,
        }
    }
}

/// `Q1 x1 … Qk xk . ψ`. Variable `i` is bound by `prefix[i-1]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PnfFormula {
    prefix: Vec<Quantifier>,
    names: Vec<String>,
    matrix: Matrix,
}

impl PnfFormula {
    /// Variables get default names `x1..xk`.
    pub fn new(prefix: Vec<Quantifier>, matrix: Matrix) -> Result<Self, FoError> {
        let names = (1..=prefix.len()).map(|i| format!("x{i}")).collect();
        Self::with_names(prefix, names, matrix)
    }

    pub fn with_names(
        prefix: Vec<Quantifier>,
        names: Vec<String>,
        matrix: Matrix,
    ) -> Result<Self, FoError> {
        assert_eq!(prefix.len(), names.len());
        let m = matrix.max_var();
        if m > prefix.len() {
            return Err(FoError::UnboundVariable(format!("x{m}")));
        }
        Ok(Self { prefix, names, matrix })
    }

    /// Number of quantified variables.
    pub fn k(&self) -> usize {
        self.prefix.len()
    }

    pub fn prefix(&self) -> &[Quantifier] {
        &self.prefix
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn var_name(&self, v: Var) -> &str {
        &self.names[v.slot()]
    }

    /// Dual sentence: every quantifier flipped, matrix negated.
    pub fn dual(&self) -> Self {
        Self {
            prefix: self.prefix.iter().map(|q| q.dual()).collect(),
            names: self.names.clone(),
            matrix: Matrix::not(self.matrix.clone()),
        }
    }
}

/// A model-checking instance: does `structure` satisfy `formula`?
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    structure: Structure,
    formula: PnfFormula,
}

impl Instance {
    pub fn new(structure: Structure, formula: PnfFormula) -> Result<Self, FoError> {
        check_symbols(structure.vocab(), formula.matrix())?;
        Ok(Self { structure, formula })
    }

    pub fn structure(&self) -> &Structure {
        &self.structure
    }

    pub fn formula(&self) -> &PnfFormula {
        &self.formula
    }

    pub fn k(&self) -> usize {
        self.formula.k()
    }
}

fn check_symbols(vocab: &Vocabulary, m: &Matrix) -> Result<(), FoError> {
    match m {
        Matrix::Rel(id, args) => {
            if id.0 >= vocab.len() {
                return Err(FoError::UnknownSymbol(format!("#{}", id.0)));
            }
            let arity = vocab.arity(*id);
            if args.len() != arity {
                return Err(FoError::ArityMismatch {
                    symbol: vocab.name(*id).to_string(),
                    expected: arity,
                    found: args.len(),
                });
            }
            Ok(())
        }
        Matrix::Not(a) => check_symbols(vocab, a),
        Matrix::And(a, b) | Matrix::Or(a, b) => {
            check_symbols(vocab, a)?;
            check_symbols(vocab, b)
        }
        Matrix::Equal(..) | Matrix::Const(_) => Ok(()),
    }
}

/// Boolean semantics. `assignment[i]` is the value of variable `i+1`.
pub fn eval_matrix_bool(
    s: &Structure,
    m: &Matrix,
    assignment: &[usize],
) -> Result<bool, FoError> {
    let need = m.max_var();
    if need > assignment.len() {
        return Err(FoError::MissingAssignment(need));
    }
    if let Some(&a) = assignment.iter().find(|&&a| a >= s.universe_size()) {
        return Err(FoError::OutOfRange { value: a, size: s.universe_size() });
    }
    Ok(eval_bool(s, m, assignment))
}

/// [`eval_matrix_bool`] without validation.
pub(crate) fn eval_bool(s: &Structure, m: &Matrix, asg: &[usize]) -> bool {
    match m {
        Matrix::Equal(a, b) => asg[a.slot()] == asg[b.slot()],
        Matrix::Rel(id, args) => {
            let mut buf = [0usize; DEFAULT_ARITY_CAP];
            if args.len() <= buf.len() {
                for (slot, v) in buf.iter_mut().zip(args) {
                    *slot = asg[v.slot()];
                }
                s.contains(*id, &buf[..args.len()])
            } else {
                let t: Vec<usize> = args.iter().map(|v| asg[v.slot()]).collect();
                s.contains(*id, &t)
            }
        }
        Matrix::Not(a) => !eval_bool(s, a, asg),
        Matrix::And(a, b) => eval_bool(s, a, asg) && eval_bool(s, b, asg),
        Matrix::Or(a, b) => eval_bool(s, a, asg) || eval_bool(s, b, asg),
        Matrix::Const(b) => *b,
    }
}

struct MatrixDisplay<'a> {
    vocab: &'a Vocabulary,
    formula: &'a PnfFormula,
    m: &'a Matrix,
}

impl fmt::Display for MatrixDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sub = |m| MatrixDisplay { vocab: self.vocab, formula: self.formula, m };
        match self.m {
            Matrix::Equal(a, b) => {
                write!(f, "{} = {}", self.formula.var_name(*a), self.formula.var_name(*b))
            }
            Matrix::Rel(id, args) => {
                write!(f, "{}(", self.vocab.name(*id))?;
                for (i, v) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    f.write_str(self.formula.var_name(*v))?;
                }
                f.write_str(")")
            }
            Matrix::Not(a) => write!(f, "!({})", sub(a)),
            Matrix::And(a, b) => write!(f, "({} & {})", sub(a), sub(b)),
            Matrix::Or(a, b) => write!(f, "({} | {})", sub(a), sub(b)),
            Matrix::Const(b) => write!(f, "{b}"),
        }
    }
}

/// Canonical text in the instance grammar; reparses to an equal instance.
impl fmt::Display for Instance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = &self.structure;
        f.write_str("vocab")?;
        for id in s.vocab.symbols() {
            write!(f, " {}/{}", s.vocab.name(id), s.vocab.arity(id))?;
        }
        writeln!(f)?;
        writeln!(f, "universe {}", s.universe_size)?;
        for id in s.vocab.symbols() {
            write!(f, "rel {}:", s.vocab.name(id))?;
            for t in s.tuples(id) {
                let items: Vec<String> = t.iter().map(|a| a.to_string()).collect();
                write!(f, " ({})", items.join(","))?;
            }
            writeln!(f)?;
        }
        f.write_str("formula:")?;
        for (i, q) in self.formula.prefix.iter().enumerate() {
            let kw = match q {
                Quantifier::Exists => "EX",
                Quantifier::Forall => "ALL",
            };
            write!(f, " {kw} {} .", self.formula.names[i])?;
        }
        let m = MatrixDisplay { vocab: &s.vocab, formula: &self.formula, m: &self.formula.matrix };
        writeln!(f, " {m}")
    }
}
