//! Pointwise evaluation of the polynomial tower and the honest prover's
//! univariate restrictions.

use std::collections::HashMap;

use crate::field::{ExtContext, ExtElement};
use crate::fo::{Instance, Var};

use super::{eq_eval, matrix_eval_unchecked, ArithError, LagrangeBasis, OpKind, OperatorSchedule, UnivariatePoly};

/// Entries kept by [`ChainEvaluator`] before its cache is flushed.
pub const DEFAULT_CACHE_CAP: usize = 1 << 20;

/// Values for some of the variables `1..=k`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PartialAssignment {
    values: Vec<Option<ExtElement>>,
}

impl PartialAssignment {
    pub fn empty(k: usize) -> Self {
        Self { values: vec![None; k] }
    }

    pub fn full(values: &[ExtElement]) -> Self {
        Self { values: values.iter().copied().map(Some).collect() }
    }

    pub fn k(&self) -> usize {
        self.values.len()
    }

    pub fn get(&self, v: Var) -> Option<ExtElement> {
        self.values.get(v.slot()).copied().flatten()
    }

    pub fn set(&mut self, v: Var, value: ExtElement) {
        self.values[v.slot()] = Some(value);
    }

    pub fn with(&self, v: Var, value: ExtElement) -> Self {
        let mut out = self.clone();
        out.set(v, value);
        out
    }

    pub fn without(&self, v: Var) -> Self {
        let mut out = self.clone();
        out.values[v.slot()] = None;
        out
    }

    /// Dense values, unassigned variables read as zero.
    pub(crate) fn dense(&self) -> Vec<ExtElement> {
        self.values.iter().map(|v| v.unwrap_or(ExtElement::ZERO)).collect()
    }

    /// The values as a complete assignment, if every variable has one.
    pub fn complete(&self) -> Option<Vec<ExtElement>> {
        self.values.iter().copied().collect()
    }
}

/// Checks that `asg` assigns exactly the free variables of `P_t`.
pub(crate) fn check_domain(
    ctx: &ExtContext,
    schedule: &OperatorSchedule,
    t: usize,
    asg: &PartialAssignment,
) -> Result<(), ArithError> {
    if t > schedule.len() {
        return Err(ArithError::PositionOutOfRange { t, len: schedule.len() });
    }
    assert_eq!(asg.k(), schedule.k(), "assignment arity differs from schedule");
    for i in 1..=schedule.k() {
        let v = Var(i);
        match (schedule.is_free(t, v), asg.get(v)) {
            (true, None) => return Err(ArithError::MissingAssignment(v)),
            (false, Some(_)) => return Err(ArithError::UnexpectedAssignment(v)),
            (true, Some(a)) if !ctx.contains(&a) => {
                return Err(crate::field::FieldError::ContextMismatch.into())
            }
            _ => {}
        }
    }
    Ok(())
}

/// Value of `P_t` at `asg`, by direct recursion over the schedule suffix.
///
/// No caching: this is the reference path. Cost is `n^{T−t}` matrix
/// evaluations.
pub fn chain_eval(
    inst: &Instance,
    ctx: &ExtContext,
    schedule: &OperatorSchedule,
    t: usize,
    asg: &PartialAssignment,
) -> Result<ExtElement, ArithError> {
    check_domain(ctx, schedule, t, asg)?;
    let mut vals = asg.dense();
    Ok(eval_plain(inst, ctx, schedule, t, &mut vals))
}

fn eval_plain(
    inst: &Instance,
    ctx: &ExtContext,
    schedule: &OperatorSchedule,
    t: usize,
    vals: &mut [ExtElement],
) -> ExtElement {
    if t == schedule.len() {
        return matrix_eval_unchecked(ctx, inst.structure(), inst.formula().matrix(), vals);
    }
    let op = schedule.ops()[t];
    let slot = op.var.slot();
    let saved = vals[slot];
    let n = inst.structure().universe_size() as u64;
    let mut acc = fold_start(op.kind);
    for z in 0..n {
        let ez = ctx.base(z);
        vals[slot] = ez;
        let sub = eval_plain(inst, ctx, schedule, t + 1, vals);
        acc = fold_step(ctx, op.kind, acc, sub, saved, ez);
    }
    vals[slot] = saved;
    fold_finish(ctx, op.kind, acc)
}

fn fold_start(kind: OpKind) -> ExtElement {
    match kind {
        // Exists accumulates Π (1 − S(z))
        OpKind::Exists | OpKind::Forall => ExtElement::ONE,
        OpKind::Reduce => ExtElement::ZERO,
    }
}

#[inline]
fn fold_step(
    ctx: &ExtContext,
    kind: OpKind,
    acc: ExtElement,
    value: ExtElement,
    current: ExtElement,
    z: ExtElement,
) -> ExtElement {
    match kind {
        OpKind::Exists => ctx.mul(acc, ctx.sub(ExtElement::ONE, value)),
        OpKind::Forall => ctx.mul(acc, value),
        OpKind::Reduce => ctx.add(acc, ctx.mul(eq_eval(ctx, current, z), value)),
    }
}

fn fold_finish(ctx: &ExtContext, kind: OpKind, acc: ExtElement) -> ExtElement {
    match kind {
        OpKind::Exists => ctx.sub(ExtElement::ONE, acc),
        _ => acc,
    }
}

/// Applies an operator to a univariate message:
/// `∃ → 1 − Π_z (1 − S(z))`, `∀ → Π_z S(z)`, `R → Σ_z Eq(current, z)·S(z)`,
/// with `z` ranging over the universe `{0, …, n−1}`.
pub fn op_apply(
    ctx: &ExtContext,
    universe_size: usize,
    kind: OpKind,
    msg: &UnivariatePoly,
    current: Option<ExtElement>,
) -> Result<ExtElement, ArithError> {
    let current = match (kind, current) {
        (OpKind::Reduce, None) => return Err(ArithError::MissingCurrent),
        (_, c) => c.unwrap_or(ExtElement::ZERO),
    };
    let mut acc = fold_start(kind);
    for z in 0..universe_size as u64 {
        let ez = ctx.base(z);
        acc = fold_step(ctx, kind, acc, msg.evaluate(ctx, ez), current, ez);
    }
    Ok(fold_finish(ctx, kind, acc))
}

/// Memoizing evaluator for one instance and field, shared across all rounds
/// of a protocol run. Keys are `(t, values of every variable)`; variables
/// not yet free at `t` always hold zero, so the key is canonical.
pub struct ChainEvaluator<'a> {
    inst: &'a Instance,
    ctx: &'a ExtContext,
    schedule: &'a OperatorSchedule,
    cache: HashMap<(usize, Vec<ExtElement>), ExtElement>,
    cap: usize,
    basis: Option<LagrangeBasis>,
}

impl<'a> ChainEvaluator<'a> {
    pub fn new(inst: &'a Instance, ctx: &'a ExtContext, schedule: &'a OperatorSchedule) -> Self {
        Self::with_cap(inst, ctx, schedule, DEFAULT_CACHE_CAP)
    }

    pub fn with_cap(
        inst: &'a Instance,
        ctx: &'a ExtContext,
        schedule: &'a OperatorSchedule,
        cap: usize,
    ) -> Self {
        Self { inst, ctx, schedule, cache: HashMap::new(), cap, basis: None }
    }

    pub fn ctx(&self) -> &'a ExtContext {
        self.ctx
    }

    pub fn schedule(&self) -> &'a OperatorSchedule {
        self.schedule
    }

    pub fn instance(&self) -> &'a Instance {
        self.inst
    }

    /// Same contract as [`chain_eval`].
    pub fn eval(&mut self, t: usize, asg: &PartialAssignment) -> Result<ExtElement, ArithError> {
        check_domain(self.ctx, self.schedule, t, asg)?;
        let mut vals = asg.dense();
        Ok(self.eval_cached(t, &mut vals))
    }

    fn eval_cached(&mut self, t: usize, vals: &mut Vec<ExtElement>) -> ExtElement {
        let key = (t, vals.clone());
        if let Some(&v) = self.cache.get(&key) {
            return v;
        }
        let value = if t == self.schedule.len() {
            matrix_eval_unchecked(self.ctx, self.inst.structure(), self.inst.formula().matrix(), vals)
        } else {
            let op = self.schedule.ops()[t];
            let slot = op.var.slot();
            let saved = vals[slot];
            let n = self.inst.structure().universe_size() as u64;
            let mut acc = fold_start(op.kind);
            for z in 0..n {
                let ez = self.ctx.base(z);
                vals[slot] = ez;
                let sub = self.eval_cached(t + 1, vals);
                acc = fold_step(self.ctx, op.kind, acc, sub, saved, ez);
            }
            vals[slot] = saved;
            fold_finish(self.ctx, op.kind, acc)
        };
        if self.cache.len() >= self.cap {
            self.cache.clear();
        }
        self.cache.insert(key, value);
        value
    }

    /// Basis on the first `q² + 1` enumerated field elements.
    pub fn basis(&mut self) -> &LagrangeBasis {
        let ctx = self.ctx;
        self.basis.get_or_insert_with(|| {
            let count = ctx.q() * ctx.q() + 1;
            let xs = (0..count).map(|i| ctx.from_index(i)).collect();
            LagrangeBasis::new(ctx, xs).expect("enumeration is injective")
        })
    }

    /// The univariate restriction `P_t(…, X_var, …)` for round `t` (1-based),
    /// where `var` is the variable operated on by the round's operator.
    ///
    /// Interpolates through the first `q² + 1` enumerated field elements and
    /// confirms the result at one further point; disagreement means the
    /// restriction has degree above `q²`.
    pub fn restrict_univariate(
        &mut self,
        t: usize,
        asg: &PartialAssignment,
        var: Var,
    ) -> Result<UnivariatePoly, ArithError> {
        if t == 0 || t > self.schedule.len() {
            return Err(ArithError::PositionOutOfRange { t, len: self.schedule.len() });
        }
        if self.schedule.ops()[t - 1].var != var {
            return Err(ArithError::WrongVariable(var));
        }
        let base = asg.with(var, ExtElement::ZERO);
        check_domain(self.ctx, self.schedule, t, &base)?;
        let ctx = self.ctx;
        let q2 = ctx.q() * ctx.q();
        let mut vals = base.dense();
        let xs = self.basis().abscissae().to_vec();
        let ys: Vec<ExtElement> = xs
            .iter()
            .map(|&x| {
                vals[var.slot()] = x;
                self.eval_cached(t, &mut vals)
            })
            .collect();
        let poly = self.basis().combine(ctx, var, &ys);
        let probe = ctx.from_index(q2 + 1);
        vals[var.slot()] = probe;
        if self.eval_cached(t, &mut vals) != poly.evaluate(ctx, probe) {
            return Err(ArithError::DegreeBoundExceeded { bound: q2 });
        }
        Ok(poly)
    }
}
