//! Line-oriented instance grammar:
//!
//! ```text
//! vocab E/2 C/1
//! universe 2
//! rel E: (0,1)
//! rel C: (1)
//! formula: EX x . ALL y . ( E(x,y) | x = y )
//! ```
//!
//! `#` starts a comment. Relations without a `rel` line are empty.

use std::collections::HashMap;

use super::{FoError, Instance, Matrix, PnfFormula, Quantifier, Structure, Var, Vocabulary};

#[derive(Debug, Clone, Copy)]
pub struct ParseOptions {
    pub arity_cap: usize,
}

impl Default for ParseOptions {
    fn default() -> Self {
        Self { arity_cap: super::DEFAULT_ARITY_CAP }
    }
}

pub fn parse_instance(text: &str) -> Result<Instance, FoError> {
    parse_instance_with(text, ParseOptions::default())
}

fn syntax(line: usize, col: usize, msg: impl Into<String>) -> FoError {
    FoError::Syntax { line, col, msg: msg.into() }
}

/// A fragment of the source with its 1-based position.
#[derive(Clone, Copy)]
struct Span<'a> {
    text: &'a str,
    line: usize,
    col: usize,
}

impl<'a> Span<'a> {
    fn err(&self, msg: impl Into<String>) -> FoError {
        syntax(self.line, self.col, msg)
    }

    fn advance(&self, bytes: usize) -> Span<'a> {
        Span { text: &self.text[bytes..], line: self.line, col: self.col + bytes }
    }

    fn trim_start(&self) -> Span<'a> {
        let skipped = self.text.len() - self.text.trim_start().len();
        self.advance(skipped)
    }
}

pub fn parse_instance_with(text: &str, opts: ParseOptions) -> Result<Instance, FoError> {
    let mut vocab_line: Option<Span> = None;
    let mut universe_line: Option<Span> = None;
    let mut formula_line: Option<Span> = None;
    let mut rel_lines: Vec<Span> = Vec::new();

    for (i, raw) in text.lines().enumerate() {
        let content = raw.split('#').next().unwrap_or("");
        let span = Span { text: content, line: i + 1, col: 1 }.trim_start();
        let body = span.text.trim_end();
        if body.is_empty() {
            continue;
        }
        let span = Span { text: body, ..span };
        let keyword_end = body
            .find(|c: char| c.is_whitespace() || c == ':')
            .unwrap_or(body.len());
        let slot = match &body[..keyword_end] {
            "vocab" => &mut vocab_line,
            "universe" => &mut universe_line,
            "formula" => &mut formula_line,
            "rel" => {
                rel_lines.push(span.advance(keyword_end));
                continue;
            }
            other => return Err(span.err(format!("unknown directive `{other}`"))),
        };
        if slot.is_some() {
            return Err(span.err(format!("duplicate `{}` line", &body[..keyword_end])));
        }
        *slot = Some(span.advance(keyword_end));
    }

    let vocab = match vocab_line {
        Some(span) => parse_vocab(span, opts)?,
        None => Vocabulary::default(),
    };
    let universe_span = universe_line.ok_or_else(|| syntax(1, 1, "missing `universe` line"))?;
    let universe_size = parse_universe(universe_span)?;

    let mut tuples: Vec<Option<Vec<Vec<usize>>>> = vec![None; vocab.len()];
    for span in rel_lines {
        let (id, list) = parse_rel(span, &vocab, universe_size)?;
        if tuples[id.0].is_some() {
            return Err(FoError::DuplicateRelation(vocab.name(id).to_string()));
        }
        tuples[id.0] = Some(list);
    }
    let tuples = tuples.into_iter().map(Option::unwrap_or_default).collect();
    let structure = Structure::new(universe_size, vocab, tuples)?;

    let formula_span = formula_line.ok_or_else(|| syntax(1, 1, "missing `formula:` line"))?;
    let formula_span = formula_span.trim_start();
    let formula_span = formula_span
        .text
        .strip_prefix(':')
        .map(|_| formula_span.advance(1))
        .ok_or_else(|| formula_span.err("expected `:` after `formula`"))?;
    let formula = FormulaParser::new(formula_span, structure.vocab())?.parse()?;
    Instance::new(structure, formula)
}

fn parse_vocab(span: Span, opts: ParseOptions) -> Result<Vocabulary, FoError> {
    let mut entries = Vec::new();
    let mut rest = span;
    loop {
        rest = rest.trim_start();
        if rest.text.is_empty() {
            break;
        }
        let end = rest.text.find(char::is_whitespace).unwrap_or(rest.text.len());
        let item = &rest.text[..end];
        let (name, arity) = item
            .split_once('/')
            .ok_or_else(|| rest.err(format!("expected SYMBOL/ARITY, found `{item}`")))?;
        if !is_ident(name) {
            return Err(rest.err(format!("invalid relation symbol `{name}`")));
        }
        let arity: usize = arity
            .parse()
            .map_err(|_| rest.err(format!("invalid arity `{arity}`")))?;
        entries.push((name.to_string(), arity));
        rest = rest.advance(end);
    }
    Vocabulary::new(entries, opts.arity_cap)
}

fn parse_universe(span: Span) -> Result<usize, FoError> {
    let s = span.trim_start();
    let n: usize = s
        .text
        .parse()
        .map_err(|_| s.err(format!("invalid universe size `{}`", s.text)))?;
    if n == 0 {
        return Err(FoError::EmptyUniverse);
    }
    Ok(n)
}

fn parse_rel(
    span: Span,
    vocab: &Vocabulary,
    n: usize,
) -> Result<(super::SymbolId, Vec<Vec<usize>>), FoError> {
    let s = span.trim_start();
    let colon = s.text.find(':').ok_or_else(|| s.err("expected `rel SYMBOL: tuples`"))?;
    let name = s.text[..colon].trim();
    let id = vocab
        .lookup(name)
        .ok_or_else(|| FoError::UnknownSymbol(name.to_string()))?;
    let arity = vocab.arity(id);
    let mut rest = s.advance(colon + 1);
    let mut list = Vec::new();
    loop {
        rest = rest.trim_start();
        if rest.text.starts_with(',') {
            rest = rest.advance(1);
            continue;
        }
        if rest.text.is_empty() {
            break;
        }
        if !rest.text.starts_with('(') {
            return Err(rest.err("expected `(`"));
        }
        let close = rest.text.find(')').ok_or_else(|| rest.err("unclosed tuple"))?;
        let inner = &rest.text[1..close];
        let mut tuple = Vec::new();
        for part in inner.split(',') {
            let part = part.trim();
            let v: usize = part
                .parse()
                .map_err(|_| rest.err(format!("invalid universe element `{part}`")))?;
            if v >= n {
                return Err(FoError::OutOfRange { value: v, size: n });
            }
            tuple.push(v);
        }
        if tuple.len() != arity {
            return Err(FoError::ArityMismatch {
                symbol: name.to_string(),
                expected: arity,
                found: tuple.len(),
            });
        }
        list.push(tuple);
        rest = rest.advance(close + 1);
    }
    Ok((id, list))
}

fn is_ident(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '\'')
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Num(String),
    Sym(char),
}

struct FormulaParser<'a> {
    toks: Vec<(Tok, usize, usize)>,
    pos: usize,
    end: (usize, usize),
    vocab: &'a Vocabulary,
    vars: HashMap<String, Var>,
}

impl<'a> FormulaParser<'a> {
    fn new(span: Span, vocab: &'a Vocabulary) -> Result<Self, FoError> {
        let mut toks = Vec::new();
        let bytes = span.text.as_bytes();
        let mut i = 0;
        while i < bytes.len() {
            let c = bytes[i] as char;
            let col = span.col + i;
            if c.is_ascii_whitespace() {
                i += 1;
            } else if c.is_ascii_alphabetic() || c == '_' {
                let start = i;
                while i < bytes.len()
                    && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_' || bytes[i] == b'\'')
                {
                    i += 1;
                }
                toks.push((Tok::Ident(span.text[start..i].to_string()), span.line, col));
            } else if c.is_ascii_digit() {
                let start = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                toks.push((Tok::Num(span.text[start..i].to_string()), span.line, col));
            } else if "!&|().,=".contains(c) {
                toks.push((Tok::Sym(c), span.line, col));
                i += 1;
            } else {
                return Err(syntax(span.line, col, format!("unexpected character `{c}`")));
            }
        }
        Ok(Self {
            toks,
            pos: 0,
            end: (span.line, span.col + span.text.len()),
            vocab,
            vars: HashMap::new(),
        })
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.0)
    }

    fn here(&self) -> (usize, usize) {
        self.toks.get(self.pos).map(|t| (t.1, t.2)).unwrap_or(self.end)
    }

    fn err(&self, msg: impl Into<String>) -> FoError {
        let (line, col) = self.here();
        syntax(line, col, msg)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|t| t.0.clone());
        self.pos += 1;
        t
    }

    fn expect(&mut self, c: char) -> Result<(), FoError> {
        match self.peek() {
            Some(Tok::Sym(d)) if *d == c => {
                self.pos += 1;
                Ok(())
            }
            _ => Err(self.err(format!("expected `{c}`"))),
        }
    }

    fn parse(mut self) -> Result<PnfFormula, FoError> {
        let mut prefix = Vec::new();
        let mut names = Vec::new();
        loop {
            let q = match self.peek() {
                Some(Tok::Ident(kw)) if kw == "EX" => Quantifier::Exists,
                Some(Tok::Ident(kw)) if kw == "ALL" => Quantifier::Forall,
                _ => break,
            };
            self.pos += 1;
            let name = match self.bump() {
                Some(Tok::Ident(name)) if !is_keyword(&name) => name,
                _ => {
                    self.pos -= 1;
                    return Err(self.err("expected a variable name"));
                }
            };
            if self.vars.contains_key(&name) {
                return Err(FoError::DuplicateVariable(name));
            }
            self.expect('.')?;
            prefix.push(q);
            self.vars.insert(name.clone(), Var(prefix.len()));
            names.push(name);
        }
        let matrix = self.parse_or()?;
        if self.pos < self.toks.len() {
            return Err(self.err("unexpected trailing input"));
        }
        PnfFormula::with_names(prefix, names, matrix)
    }

    fn parse_or(&mut self) -> Result<Matrix, FoError> {
        let mut lhs = self.parse_and()?;
        while self.peek() == Some(&Tok::Sym('|')) {
            self.pos += 1;
            lhs = Matrix::or(lhs, self.parse_and()?);
        }
        Ok(lhs)
    }

    fn parse_and(&mut self) -> Result<Matrix, FoError> {
        let mut lhs = self.parse_unary()?;
        while self.peek() == Some(&Tok::Sym('&')) {
            self.pos += 1;
            lhs = Matrix::and(lhs, self.parse_unary()?);
        }
        Ok(lhs)
    }

    fn parse_unary(&mut self) -> Result<Matrix, FoError> {
        match self.peek() {
            Some(Tok::Sym('!')) => {
                self.pos += 1;
                Ok(Matrix::not(self.parse_unary()?))
            }
            Some(Tok::Sym('(')) => {
                self.pos += 1;
                let m = self.parse_or()?;
                self.expect(')')?;
                Ok(m)
            }
            Some(Tok::Ident(kw)) if kw == "true" || kw == "false" => {
                let b = kw == "true";
                self.pos += 1;
                Ok(Matrix::Const(b))
            }
            Some(Tok::Ident(kw)) if kw == "EX" || kw == "ALL" => {
                Err(self.err("quantifiers may only appear in the prefix"))
            }
            Some(Tok::Ident(_)) => self.parse_atom(),
            Some(Tok::Num(_)) => Err(self.err("constant symbols are not supported")),
            _ => Err(self.err("expected an atom, `!` or `(`")),
        }
    }

    fn parse_atom(&mut self) -> Result<Matrix, FoError> {
        let Some(Tok::Ident(name)) = self.bump() else { unreachable!() };
        if self.peek() == Some(&Tok::Sym('(')) {
            self.pos += 1;
            let id = self
                .vocab
                .lookup(&name)
                .ok_or_else(|| FoError::UnknownSymbol(name.clone()))?;
            let mut args = Vec::new();
            loop {
                args.push(self.parse_var()?);
                match self.bump() {
                    Some(Tok::Sym(',')) => continue,
                    Some(Tok::Sym(')')) => break,
                    _ => {
                        self.pos -= 1;
                        return Err(self.err("expected `,` or `)`"));
                    }
                }
            }
            let arity = self.vocab.arity(id);
            if args.len() != arity {
                return Err(FoError::ArityMismatch { symbol: name, expected: arity, found: args.len() });
            }
            Ok(Matrix::Rel(id, args))
        } else {
            self.pos -= 1;
            let lhs = self.parse_var()?;
            self.expect('=')?;
            let rhs = self.parse_var()?;
            Ok(Matrix::Equal(lhs, rhs))
        }
    }

    fn parse_var(&mut self) -> Result<Var, FoError> {
        match self.peek().cloned() {
            Some(Tok::Ident(name)) if !is_keyword(&name) => {
                self.pos += 1;
                self.vars
                    .get(&name)
                    .copied()
                    .ok_or(FoError::UnboundVariable(name))
            }
            Some(Tok::Num(_)) => Err(self.err("constant symbols are not supported")),
            _ => Err(self.err("expected a variable")),
        }
    }
}

fn is_keyword(s: &str) -> bool {
    matches!(s, "EX" | "ALL" | "true" | "false")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fo::SymbolId;

    const WORKED: &str = "\
vocab E/2 C/1
universe 2
rel E: (0,1)
rel C: (1)
formula: EX x . ALL y . ( E(x,y) | x = y )
";

    #[test]
    fn worked_example() {
        let inst = parse_instance(WORKED).unwrap();
        let s = inst.structure();
        assert_eq!(s.universe_size(), 2);
        assert_eq!(inst.k(), 2);
        assert_eq!(s.tuples(SymbolId(0)), &[vec![0, 1]]);
        assert_eq!(s.tuples(SymbolId(1)), &[vec![1]]);
        assert_eq!(
            inst.formula().matrix(),
            &Matrix::or(
                Matrix::Rel(SymbolId(0), vec![Var(1), Var(2)]),
                Matrix::Equal(Var(1), Var(2))
            )
        );
        assert_eq!(inst.formula().prefix(), &[Quantifier::Exists, Quantifier::Forall]);
    }

    #[test]
    fn unparse_reparses() {
        let inst = parse_instance(WORKED).unwrap();
        let again = parse_instance(&inst.to_string()).unwrap();
        assert_eq!(inst, again);
    }

    fn with_line(line: &str) -> String {
        format!("vocab E/2\nuniverse 3\n{line}\nformula: EX x . E(x,x)\n")
    }

    #[test]
    fn arity_mismatch_in_tuple() {
        let err = parse_instance(&with_line("rel E: (0,1,2)")).unwrap_err();
        assert!(matches!(err, FoError::ArityMismatch { expected: 2, found: 3, .. }));
    }

    #[test]
    fn out_of_range_tuple() {
        let err = parse_instance(&with_line("rel E: (0,3)")).unwrap_err();
        assert_eq!(err, FoError::OutOfRange { value: 3, size: 3 });
    }

    #[test]
    fn duplicate_rel_block() {
        let err = parse_instance(&with_line("rel E: (0,1)\nrel E: (1,1)")).unwrap_err();
        assert_eq!(err, FoError::DuplicateRelation("E".into()));
    }

    #[test]
    fn unbound_variable() {
        let text = "vocab E/2\nuniverse 2\nformula: EX x . EX y . E(x,z)\n";
        assert_eq!(parse_instance(text).unwrap_err(), FoError::UnboundVariable("z".into()));
    }

    #[test]
    fn syntax_errors_carry_position() {
        let text = "vocab E/2\nuniverse 2\nformula: EX x . E(x,x) &\n";
        match parse_instance(text).unwrap_err() {
            FoError::Syntax { line, col, .. } => {
                assert_eq!(line, 3);
                assert_eq!(col, 25);
            }
            e => panic!("unexpected {e:?}"),
        }
        let text = "vocab E/2\nuniverse 2\nformula: EX x . E(x,0)\n";
        match parse_instance(text).unwrap_err() {
            FoError::Syntax { line: 3, col: 21, msg } => assert!(msg.contains("constant")),
            e => panic!("unexpected {e:?}"),
        }
        let text = "vocab E/2\nuniverse 2\nformula: EX x . ALL y . E(x,y) & EX z . x = z\n";
        assert!(matches!(parse_instance(text), Err(FoError::Syntax { .. })));
    }

    #[test]
    fn precedence_and_comments() {
        let text = "# header\nvocab E/2 # binary\nuniverse 2\nrel E: (0,1), (1,1)\n\
                    formula: EX x . ALL y . !E(x,y) & x = y | E(y,x)\n";
        let inst = parse_instance(text).unwrap();
        let e = |a, b| Matrix::Rel(SymbolId(0), vec![Var(a), Var(b)]);
        assert_eq!(
            inst.formula().matrix(),
            &Matrix::or(Matrix::and(Matrix::not(e(1, 2)), Matrix::Equal(Var(1), Var(2))), e(2, 1))
        );
        assert_eq!(inst.structure().tuples(SymbolId(0)).len(), 2);
    }

    #[test]
    fn ground_sentence_and_defaults() {
        let inst = parse_instance("universe 1\nformula: true\n").unwrap();
        assert_eq!(inst.k(), 0);
        assert_eq!(inst.formula().matrix(), &Matrix::Const(true));
        assert!(inst.structure().vocab().is_empty());
    }

    #[test]
    fn duplicate_prefix_variable() {
        let text = "universe 2\nformula: EX x . ALL x . x = x\n";
        assert_eq!(parse_instance(text).unwrap_err(), FoError::DuplicateVariable("x".into()));
    }

    #[test]
    fn arity_cap_is_configurable() {
        let text = "vocab R/5\nuniverse 2\nformula: EX x . R(x,x,x,x,x)\n";
        assert!(matches!(parse_instance(text), Err(FoError::ArityCap { .. })));
        let inst = parse_instance_with(text, ParseOptions { arity_cap: 5 }).unwrap();
        assert_eq!(inst.structure().vocab().arity(SymbolId(0)), 5);
    }
}
