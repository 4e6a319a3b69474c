use std::borrow::Cow;
use std::fmt;
use std::str::FromStr;

use rand_chacha::ChaCha20Rng;

use crate::arith::{eq_eval, op_apply, ChainEvaluator, OpKind, SymbolicTower, UnivariatePoly};
use crate::field::{ExtContext, ExtElement};
use crate::fo::Instance;

use super::{seeded_rng, ProtocolError, ProtocolParams, RoundState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ProverStrategy {
    /// Always sends the true restriction.
    Honest,
    /// Sends the true restriction when it passes the round check; otherwise
    /// moves its value at one universe point so the check passes exactly.
    RoundFixing,
    /// Like `RoundFixing`, but every other interpolation value is drawn at
    /// random before the anchor value is solved for.
    RandomConsistent,
}

impl ProverStrategy {
    pub const ALL: [ProverStrategy; 3] =
        [ProverStrategy::Honest, ProverStrategy::RoundFixing, ProverStrategy::RandomConsistent];

    pub fn name(self) -> &'static str {
        match self {
            ProverStrategy::Honest => "honest",
            ProverStrategy::RoundFixing => "round-fixing",
            ProverStrategy::RandomConsistent => "random-consistent",
        }
    }
}

impl fmt::Display for ProverStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ProverStrategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Self::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| format!("unknown prover `{s}`"))
    }
}

/// A message together with the true restriction it was derived from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProverMessage {
    pub msg: UnivariatePoly,
    pub honest: UnivariatePoly,
}

/// Prover state for one run: the expanded tower when it fits (else a
/// memoizing evaluator) plus the prover's own random stream, separate from
/// the verifier's.
pub struct Prover<'a> {
    strategy: ProverStrategy,
    eval: ChainEvaluator<'a>,
    tower: Option<Cow<'a, SymbolicTower>>,
    params: &'a ProtocolParams,
    rng: ChaCha20Rng,
}

impl<'a> Prover<'a> {
    pub fn new(strategy: ProverStrategy, inst: &'a Instance, params: &'a ProtocolParams) -> Self {
        let tower = SymbolicTower::new(inst, params.q, &params.schedule).map(Cow::Owned);
        Self::build(strategy, inst, params, tower)
    }

    /// Uses a tower built once for `inst` and `params.q`; `None` selects the
    /// recursive evaluator.
    pub fn with_tower(
        strategy: ProverStrategy,
        inst: &'a Instance,
        params: &'a ProtocolParams,
        tower: Option<&'a SymbolicTower>,
    ) -> Self {
        Self::build(strategy, inst, params, tower.map(Cow::Borrowed))
    }

    fn build(
        strategy: ProverStrategy,
        inst: &'a Instance,
        params: &'a ProtocolParams,
        tower: Option<Cow<'a, SymbolicTower>>,
    ) -> Self {
        Self {
            strategy,
            eval: ChainEvaluator::new(inst, &params.ctx, &params.schedule),
            tower,
            params,
            rng: seeded_rng("prover", params.seed, 0),
        }
    }

    pub fn message(&mut self, state: &RoundState) -> Result<ProverMessage, ProtocolError> {
        let op = self.params.schedule.ops()[state.t - 1];
        let honest = match &self.tower {
            Some(t) => t.restrict_univariate(&self.params.ctx, state.t, &state.asg, op.var)?,
            None => self.eval.restrict_univariate(state.t, &state.asg, op.var)?,
        };
        let msg = match self.strategy {
            ProverStrategy::Honest => honest.clone(),
            ProverStrategy::RoundFixing | ProverStrategy::RandomConsistent => {
                self.fixed_message(state, &honest)?
            }
        };
        Ok(ProverMessage { msg, honest })
    }

    fn fixed_message(
        &mut self,
        state: &RoundState,
        honest: &UnivariatePoly,
    ) -> Result<UnivariatePoly, ProtocolError> {
        let ctx = &self.params.ctx;
        let n = self.params.universe_size;
        let op = self.params.schedule.ops()[state.t - 1];
        let current = state.asg.get(op.var);
        let check_current = if op.kind == OpKind::Reduce { current } else { None };
        if op_apply(ctx, n, op.kind, honest, check_current)? == state.claim {
            return Ok(honest.clone());
        }
        let xs = self.eval.basis().abscissae().to_vec();
        let mut ys: Vec<ExtElement> = match self.strategy {
            ProverStrategy::RandomConsistent => xs.iter().map(|_| ctx.random(&mut self.rng)).collect(),
            _ => xs.iter().map(|&x| honest.evaluate(ctx, x)).collect(),
        };
        // Abscissa z of the enumeration is the universe element z.
        let anchor = (0..n).find_map(|z0| {
            solve_anchor(ctx, op.kind, &ys[..n], z0, current, state.claim).map(|v| (z0, v))
        });
        match anchor {
            Some((z0, v)) => {
                ys[z0] = v;
                Ok(self.eval.basis().combine(ctx, op.var, &ys))
            }
            None => Ok(honest.clone()),
        }
    }
}

/// Value at universe point `z0` that makes the round check equal `claim`,
/// given the values at the other universe points; `None` when `z0` carries
/// zero weight in the check.
fn solve_anchor(
    ctx: &ExtContext,
    kind: OpKind,
    vals: &[ExtElement],
    z0: usize,
    current: Option<ExtElement>,
    claim: ExtElement,
) -> Option<ExtElement> {
    let one = ExtElement::ONE;
    let others = vals.iter().enumerate().filter(|(z, _)| *z != z0);
    match kind {
        OpKind::Exists => {
            let rest = others.fold(one, |acc, (_, &v)| ctx.mul(acc, ctx.sub(one, v)));
            let ratio = ctx.div(ctx.sub(one, claim), rest).ok()?;
            Some(ctx.sub(one, ratio))
        }
        OpKind::Forall => {
            let rest = others.fold(one, |acc, (_, &v)| ctx.mul(acc, v));
            ctx.div(claim, rest).ok()
        }
        OpKind::Reduce => {
            let a = current.expect("reduce round has a current value");
            let weight = |z: usize| eq_eval(ctx, a, ctx.base(z as u64));
            let rest = others.fold(ExtElement::ZERO, |acc, (z, &v)| {
                ctx.add(acc, ctx.mul(weight(z), v))
            });
            ctx.div(ctx.sub(claim, rest), weight(z0)).ok()
        }
    }
}

/// One-shot message for `state` (builds a fresh prover; prefer [`Prover`]
/// across rounds so evaluations are shared).
pub fn prover_message(
    strategy: ProverStrategy,
    state: &RoundState,
    inst: &Instance,
    params: &ProtocolParams,
) -> Result<UnivariatePoly, ProtocolError> {
    Ok(Prover::new(strategy, inst, params).message(state)?.msg)
}
