use std::fmt;
use std::str::FromStr;

use crate::fo::{Quantifier, Var};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OpKind {
    Exists,
    Forall,
    Reduce,
}

impl OpKind {
    pub fn tag(self) -> char {
        match self {
            OpKind::Exists => 'E',
            OpKind::Forall => 'A',
            OpKind::Reduce => 'R',
        }
    }

    pub fn is_quantifier(self) -> bool {
        !matches!(self, OpKind::Reduce)
    }
}

impl From<Quantifier> for OpKind {
    fn from(q: Quantifier) -> Self {
        match q {
            Quantifier::Exists => OpKind::Exists,
            Quantifier::Forall => OpKind::Forall,
        }
    }
}

/// One operator applied to one variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Op {
    pub kind: OpKind,
    pub var: Var,
}

impl fmt::Display for Op {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.kind.tag(), self.var.0)
    }
}

impl FromStr for Op {
    type Err = String;

    /// `E3`, `A1`, `R2`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut chars = s.chars();
        let kind = match chars.next() {
            Some('E') => OpKind::Exists,
            Some('A') => OpKind::Forall,
            Some('R') => OpKind::Reduce,
            _ => return Err(format!("bad operator `{s}`")),
        };
        let rest = chars.as_str();
        if rest.is_empty() || !rest.bytes().all(|b| b.is_ascii_digit()) {
            return Err(format!("bad operator `{s}`"));
        }
        let v: usize = rest.parse().map_err(|_| format!("bad operator `{s}`"))?;
        if v == 0 {
            return Err(format!("bad operator `{s}`"));
        }
        Ok(Op { kind, var: Var(v) })
    }
}

/// The interleaved operator list `Q1 X1 R X1 Q2 X2 R X1 R X2 …`.
///
/// Position `t` (zero-based) holds the operator that turns `P_{t+1}` into
/// `P_t`; `P_T` is the matrix polynomial.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OperatorSchedule {
    ops: Vec<Op>,
    k: usize,
    /// Zero-based position of the quantifier operator for each variable.
    bound_at: Vec<usize>,
}

impl OperatorSchedule {
    pub fn ops(&self) -> &[Op] {
        &self.ops
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Is `v` a free variable of `P_t`?
    pub fn is_free(&self, t: usize, v: Var) -> bool {
        self.bound_at[v.slot()] < t
    }
}

/// `(k² + 3k) / 2`.
pub fn round_count(k: usize) -> usize {
    (k * k + 3 * k) / 2
}

pub fn build_schedule(prefix: &[Quantifier]) -> OperatorSchedule {
    let k = prefix.len();
    let mut ops = Vec::with_capacity(round_count(k));
    let mut bound_at = Vec::with_capacity(k);
    for (i, &q) in prefix.iter().enumerate() {
        bound_at.push(ops.len());
        ops.push(Op { kind: q.into(), var: Var(i + 1) });
        ops.extend((1..=i + 1).map(|j| Op { kind: OpKind::Reduce, var: Var(j) }));
    }
    OperatorSchedule { ops, k, bound_at }
}
