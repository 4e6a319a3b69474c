//! Arithmetization of PNF sentences over GF(q^4).
//!
//! Atoms become sums of products of `Eq(X, Y) = 1 − (X − Y)^{q−1}`, the
//! connectives become `P·Q`, `P + Q − P·Q` and `1 − P`, and the prefix is
//! expanded into the operator schedule whose suffixes define the polynomial
//! tower `P_0, …, P_T`. The tower is evaluated pointwise by recursion, or,
//! for small instances, expanded into dense polynomials over GF(q).

mod chain;
mod dense;
mod poly;
mod schedule;

use thiserror::Error;

use crate::field::{ExtContext, ExtElement, FieldError};
use crate::fo::{Matrix, Structure, Var};

pub use chain::{chain_eval, op_apply, ChainEvaluator, PartialAssignment, DEFAULT_CACHE_CAP};
pub use dense::{BasePoly, SymbolicTower, DEFAULT_TERM_CAP};
pub use poly::{interpolate, LagrangeBasis, UnivariatePoly};
pub use schedule::{build_schedule, round_count, Op, OpKind, OperatorSchedule};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ArithError {
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("no value assigned to {0}")]
    MissingAssignment(Var),
    #[error("{0} is not free at this position but has a value")]
    UnexpectedAssignment(Var),
    #[error("unknown relation symbol #{0}")]
    UnknownSymbol(usize),
    #[error("position {t} outside 0..={len}")]
    PositionOutOfRange { t: usize, len: usize },
    #[error("duplicate abscissa {0}")]
    DuplicateAbscissa(ExtElement),
    #[error("restriction exceeds the degree bound {bound}")]
    DegreeBoundExceeded { bound: u64 },
    #[error("reduce operator needs the current value of its variable")]
    MissingCurrent,
    #[error("{0} is not the variable operated on at this position")]
    WrongVariable(Var),
    #[error("malformed polynomial `{0}`")]
    Malformed(String),
}

/// `1 − (x − y)^{q−1}`.
pub fn eq_eval(ctx: &ExtContext, x: ExtElement, y: ExtElement) -> ExtElement {
    let d = ctx.sub(x, y);
    // On the base field, Fermat gives d^{q−1} ∈ {0, 1} directly.
    if let Some(b) = d.as_base() {
        return ctx.base((b == 0) as u64);
    }
    ctx.sub(ExtElement::ONE, ctx.pow(d, ctx.q() - 1))
}

/// `Eq(asg[v], z)` for every variable `v` and universe element `z`,
/// laid out as `cells[v.slot() * n + z]`. Small tables live inline.
pub(crate) struct EqTable {
    n: usize,
    inline: [ExtElement; EQ_INLINE],
    heap: Vec<ExtElement>,
}

const EQ_INLINE: usize = 16;

impl EqTable {
    pub(crate) fn new(ctx: &ExtContext, n: usize, asg: &[ExtElement]) -> Self {
        let mut t = Self { n, inline: [ExtElement::ZERO; EQ_INLINE], heap: Vec::new() };
        let len = asg.len() * n;
        let cells = (0..asg.len()).flat_map(|v| (0..n as u64).map(move |z| (v, z)));
        if len <= EQ_INLINE {
            for (i, (v, z)) in cells.enumerate() {
                t.inline[i] = eq_eval(ctx, asg[v], ctx.base(z));
            }
        } else {
            t.heap = cells.map(|(v, z)| eq_eval(ctx, asg[v], ctx.base(z))).collect();
        }
        t
    }

    /// A table that is never read, for matrices without relation atoms.
    fn unused() -> Self {
        Self { n: 0, inline: [ExtElement::ZERO; EQ_INLINE], heap: Vec::new() }
    }

    #[inline]
    fn get(&self, v: Var, z: usize) -> ExtElement {
        let i = v.slot() * self.n + z;
        if self.heap.is_empty() {
            self.inline[i]
        } else {
            self.heap[i]
        }
    }
}

fn has_relation(m: &Matrix) -> bool {
    match m {
        Matrix::Rel(..) => true,
        Matrix::Not(a) => has_relation(a),
        Matrix::And(a, b) | Matrix::Or(a, b) => has_relation(a) || has_relation(b),
        _ => false,
    }
}

fn validate(s: &Structure, m: &Matrix, defined: usize, ctx: &ExtContext, asg: &[ExtElement]) -> Result<(), ArithError> {
    let need = m.max_var();
    if need > defined {
        return Err(ArithError::MissingAssignment(Var(need)));
    }
    if asg.iter().any(|a| !ctx.contains(a)) {
        return Err(FieldError::ContextMismatch.into());
    }
    check_symbols(s, m)
}

fn check_symbols(s: &Structure, m: &Matrix) -> Result<(), ArithError> {
    match m {
        Matrix::Rel(id, _) if id.0 >= s.vocab().len() => Err(ArithError::UnknownSymbol(id.0)),
        Matrix::Not(a) => check_symbols(s, a),
        Matrix::And(a, b) | Matrix::Or(a, b) => {
            check_symbols(s, a)?;
            check_symbols(s, b)
        }
        _ => Ok(()),
    }
}

/// Value of an atom's polynomial. `asg[i]` holds the value of variable `i+1`.
///
/// A relation atom sums, over the tuples consistent with the atom's pattern
/// of repeated variables, one `Eq` factor per distinct variable, so its
/// degree in each variable is `q − 1`.
pub fn atom_eval(
    ctx: &ExtContext,
    s: &Structure,
    atom: &Matrix,
    asg: &[ExtElement],
) -> Result<ExtElement, ArithError> {
    assert!(
        matches!(atom, Matrix::Equal(..) | Matrix::Rel(..)),
        "atom_eval expects an atomic formula"
    );
    validate(s, atom, asg.len(), ctx, asg)?;
    let table = EqTable::new(ctx, s.universe_size(), asg);
    Ok(eval_inner(ctx, s, atom, asg, &table))
}

/// Value of `P_{A,ψ}` at a point of GF(q^4)^k.
pub fn matrix_eval(
    ctx: &ExtContext,
    s: &Structure,
    m: &Matrix,
    asg: &[ExtElement],
) -> Result<ExtElement, ArithError> {
    validate(s, m, asg.len(), ctx, asg)?;
    Ok(matrix_eval_unchecked(ctx, s, m, asg))
}

pub(crate) fn matrix_eval_unchecked(
    ctx: &ExtContext,
    s: &Structure,
    m: &Matrix,
    asg: &[ExtElement],
) -> ExtElement {
    let table = if has_relation(m) { EqTable::new(ctx, s.universe_size(), asg) } else { EqTable::unused() };
    eval_inner(ctx, s, m, asg, &table)
}

fn eval_inner(
    ctx: &ExtContext,
    s: &Structure,
    m: &Matrix,
    asg: &[ExtElement],
    table: &EqTable,
) -> ExtElement {
    match m {
        Matrix::Equal(a, b) => eq_eval(ctx, asg[a.slot()], asg[b.slot()]),
        Matrix::Rel(id, args) => {
            let mut sum = ExtElement::ZERO;
            'tuples: for t in s.tuples(*id) {
                let mut term = ExtElement::ONE;
                for i in 0..args.len() {
                    // earliest position holding the same variable as args[i]
                    let f = args.iter().position(|v| *v == args[i]).unwrap();
                    if f != i {
                        if t[i] != t[f] {
                            continue 'tuples;
                        }
                        continue;
                    }
                    term = ctx.mul(term, table.get(args[i], t[i]));
                }
                sum = ctx.add(sum, term);
            }
            sum
        }
        Matrix::Not(a) => ctx.sub(ExtElement::ONE, eval_inner(ctx, s, a, asg, table)),
        Matrix::And(a, b) => ctx.mul(
            eval_inner(ctx, s, a, asg, table),
            eval_inner(ctx, s, b, asg, table),
        ),
        Matrix::Or(a, b) => {
            let x = eval_inner(ctx, s, a, asg, table);
            let y = eval_inner(ctx, s, b, asg, table);
            ctx.sub(ctx.add(x, y), ctx.mul(x, y))
        }
        Matrix::Const(true) => ExtElement::ONE,
        Matrix::Const(false) => ExtElement::ZERO,
    }
}
