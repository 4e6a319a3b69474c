use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::arith::{matrix_eval, op_apply, OpKind, PartialAssignment, UnivariatePoly};
use crate::field::{ExtContext, ExtElement};
use crate::fo::Instance;

use super::{ProtocolError, ProtocolParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Verdict {
    Accept,
    Reject,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Accept => "accept",
            Verdict::Reject => "reject",
        })
    }
}

impl FromStr for Verdict {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        match s {
            "accept" => Ok(Verdict::Accept),
            "reject" => Ok(Verdict::Reject),
            _ => Err(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RejectReason {
    /// Message degree above `q²`.
    Degree,
    /// Message written in a variable other than the round's.
    WrongVariable,
    /// `∃`/`∀` round: `Q X S(X)` differs from the claim.
    ConstantMismatch,
    /// `R` round: `(R X S)(a)` differs from the claim.
    ReduceMismatch,
    /// The matrix polynomial at the challenges differs from the last claim.
    FinalMismatch,
}

impl RejectReason {
    pub fn tag(self) -> &'static str {
        match self {
            RejectReason::Degree => "degree",
            RejectReason::WrongVariable => "wrong-variable",
            RejectReason::ConstantMismatch => "constant-mismatch",
            RejectReason::ReduceMismatch => "reduce-mismatch",
            RejectReason::FinalMismatch => "final-mismatch",
        }
    }
}

impl fmt::Display for RejectReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for RejectReason {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        [
            RejectReason::Degree,
            RejectReason::WrongVariable,
            RejectReason::ConstantMismatch,
            RejectReason::ReduceMismatch,
            RejectReason::FinalMismatch,
        ]
        .into_iter()
        .find(|r| r.tag() == s)
        .ok_or(())
    }
}

/// Verifier state before round `t`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoundState {
    /// Next round, `1..=T+1`.
    pub t: usize,
    /// Latest challenge for every variable whose quantifier has been processed.
    pub asg: PartialAssignment,
    /// Value `P_{t−1}(asg)` is claimed to have.
    pub claim: ExtElement,
}

impl RoundState {
    pub fn initial(k: usize) -> Self {
        Self { t: 1, asg: PartialAssignment::empty(k), claim: ExtElement::ONE }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StepOutcome {
    Continue { next: RoundState, check: ExtElement, challenge: ExtElement },
    Reject { reason: RejectReason, check: Option<ExtElement> },
}

/// Checks the message for round `state.t`, then draws the next challenge.
pub fn verifier_step<R: Rng + ?Sized>(
    state: &RoundState,
    params: &ProtocolParams,
    msg: &UnivariatePoly,
    rng: &mut R,
) -> Result<StepOutcome, ProtocolError> {
    let ctx = &params.ctx;
    let op = params.schedule.ops()[state.t - 1];
    let q = ctx.q();
    if msg.degree() as u64 > q * q {
        return Ok(StepOutcome::Reject { reason: RejectReason::Degree, check: None });
    }
    if msg.var() != op.var {
        return Ok(StepOutcome::Reject { reason: RejectReason::WrongVariable, check: None });
    }
    let current = match op.kind {
        OpKind::Reduce => state.asg.get(op.var),
        _ => None,
    };
    let check = op_apply(ctx, params.universe_size, op.kind, msg, current)?;
    if check != state.claim {
        let reason = match op.kind {
            OpKind::Reduce => RejectReason::ReduceMismatch,
            _ => RejectReason::ConstantMismatch,
        };
        return Ok(StepOutcome::Reject { reason, check: Some(check) });
    }
    let challenge = ctx.random(rng);
    let next = RoundState {
        t: state.t + 1,
        asg: state.asg.with(op.var, challenge),
        claim: msg.evaluate(ctx, challenge),
    };
    Ok(StepOutcome::Continue { next, check, challenge })
}

/// Accepts iff the matrix polynomial at the challenges equals the claim.
/// Returns the matrix value alongside the verdict.
pub fn final_check(
    state: &RoundState,
    inst: &Instance,
    ctx: &ExtContext,
) -> Result<(ExtElement, Verdict), ProtocolError> {
    let values = match state.asg.complete() {
        Some(v) => v,
        None => {
            let missing = (1..=state.asg.k())
                .map(crate::fo::Var)
                .find(|v| state.asg.get(*v).is_none())
                .unwrap();
            return Err(crate::arith::ArithError::MissingAssignment(missing).into());
        }
    };
    let value = matrix_eval(ctx, inst.structure(), inst.formula().matrix(), &values)?;
    let verdict = if value == state.claim { Verdict::Accept } else { Verdict::Reject };
    Ok((value, verdict))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fo::{parse_instance, Var};
    use crate::protocol::{choose_params, seeded_rng};

    fn setup(text: &str) -> (Instance, ProtocolParams) {
        let inst = parse_instance(text).unwrap();
        let params = choose_params(&inst, 1, 0).unwrap();
        (inst, params)
    }

    #[test]
    fn final_check_examples() {
        let (inst, params) = setup("vocab E/2\nuniverse 2\nrel E: (0,1)\nformula: EX x . E(x,x)\n");
        let ctx = &params.ctx;
        let a = ctx.element([2, 1, 0, 4]).unwrap();
        let value = matrix_eval(ctx, inst.structure(), inst.formula().matrix(), &[a]).unwrap();
        let mut st = RoundState { t: 3, asg: PartialAssignment::full(&[a]), claim: value };
        assert_eq!(final_check(&st, &inst, ctx).unwrap(), (value, Verdict::Accept));
        st.claim = ctx.add(value, ExtElement::ONE);
        assert_eq!(final_check(&st, &inst, ctx).unwrap().1, Verdict::Reject);
    }

    #[test]
    fn ground_sentences() {
        for (text, verdict) in [
            ("universe 1\nformula: true\n", Verdict::Accept),
            ("universe 1\nformula: !true\n", Verdict::Reject),
        ] {
            let (inst, params) = setup(text);
            let st = RoundState::initial(0);
            assert_eq!(final_check(&st, &inst, &params.ctx).unwrap().1, verdict);
        }
    }

    #[test]
    fn oversized_message_is_rejected() {
        let (_, params) = setup("universe 2\nformula: EX x . x = x\n");
        let coeffs = vec![ExtElement::ONE; 27];
        let msg = UnivariatePoly::new(Var(1), coeffs);
        let mut rng = seeded_rng("verifier", 0, 0);
        let out = verifier_step(&RoundState::initial(1), &params, &msg, &mut rng).unwrap();
        assert_eq!(out, StepOutcome::Reject { reason: RejectReason::Degree, check: None });
        let wrong = UnivariatePoly::constant(Var(7), ExtElement::ONE);
        let out = verifier_step(&RoundState::initial(1), &params, &wrong, &mut rng).unwrap();
        assert!(matches!(out, StepOutcome::Reject { reason: RejectReason::WrongVariable, .. }));
    }

    #[test]
    fn reason_tags_roundtrip() {
        for r in ["degree", "wrong-variable", "constant-mismatch", "reduce-mismatch", "final-mismatch"] {
            assert_eq!(r.parse::<RejectReason>().unwrap().tag(), r);
        }
    }
}
