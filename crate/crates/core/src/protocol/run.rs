use crate::arith::{
    build_schedule, matrix_eval, op_apply, OpKind, OperatorSchedule, PartialAssignment, SymbolicTower,
};
use crate::field::{find_irreducible, ExtElement, PrimeModulus};
use crate::fo::Instance;

use super::transcript::{FinalRecord, RoundRecord, Transcript, TranscriptError, TranscriptHeader};
use super::{
    final_check, params_with, select_modulus, ProtocolParams, instance_digest, modulus_lower_bound, seeded_rng, verifier_step,
    Prover, ProverStrategy, ProtocolError, RejectReason, RoundState, StepOutcome, Verdict,
    TRANSCRIPT_VERSION,
};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RunOptions {
    /// Lower bound on the modulus beyond the instance-derived one.
    pub q_min: u64,
}

/// Side information from a run that the transcript does not carry.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RunTrace {
    /// Degree of the true restriction in each round that was played.
    pub honest_degrees: Vec<usize>,
}

pub fn run_protocol(
    inst: &Instance,
    strategy: ProverStrategy,
    seed: u64,
) -> Result<Transcript, ProtocolError> {
    Ok(run_protocol_with(inst, strategy, seed, RunOptions::default())?.0)
}

/// Setup, `T` rounds, final check. Deterministic in `(inst, strategy, seed, opts)`.
pub fn run_protocol_with(
    inst: &Instance,
    strategy: ProverStrategy,
    seed: u64,
    opts: RunOptions,
) -> Result<(Transcript, RunTrace), ProtocolError> {
    Session::new(inst, opts)?.run(strategy, seed)
}

/// Seed-independent setup for one instance, shared by many runs: the
/// modulus, the schedule, the instance digest and, when it fits, the
/// expanded polynomial tower.
pub struct Session<'a> {
    inst: &'a Instance,
    q: PrimeModulus,
    schedule: OperatorSchedule,
    tower: Option<SymbolicTower>,
    digest: String,
}

impl<'a> Session<'a> {
    pub fn new(inst: &'a Instance, opts: RunOptions) -> Result<Self, ProtocolError> {
        let q = select_modulus(inst, opts.q_min)?;
        let schedule = build_schedule(inst.formula().prefix());
        let tower = SymbolicTower::new(inst, q, &schedule);
        Ok(Self { inst, q, schedule, tower, digest: instance_digest(inst) })
    }

    pub fn modulus(&self) -> PrimeModulus {
        self.q
    }

    /// Whether honest messages come from the expanded tower.
    pub fn is_symbolic(&self) -> bool {
        self.tower.is_some()
    }

    pub fn params(&self, seed: u64) -> Result<ProtocolParams, ProtocolError> {
        params_with(self.q, self.schedule.clone(), self.inst.structure().universe_size(), seed)
    }

    pub fn run(&self, strategy: ProverStrategy, seed: u64) -> Result<(Transcript, RunTrace), ProtocolError> {
        let inst = self.inst;
        let params = self.params(seed)?;
        let header = TranscriptHeader {
            version: TRANSCRIPT_VERSION,
            q: params.q,
            irr: *params.ctx.irr(),
            seed,
            rounds: params.rounds,
            instance_digest: self.digest.clone(),
        };
        let mut verifier_rng = seeded_rng("verifier", seed, 0);
        let mut prover = Prover::with_tower(strategy, inst, &params, self.tower.as_ref());
        let mut trace = RunTrace::default();
        let mut rounds = Vec::with_capacity(params.rounds);
        let mut state = RoundState::initial(inst.k());

        while state.t <= params.rounds {
            let op = params.schedule.ops()[state.t - 1];
            let m = prover.message(&state)?;
            trace.honest_degrees.push(m.honest.degree());
            match verifier_step(&state, &params, &m.msg, &mut verifier_rng)? {
                StepOutcome::Continue { next, check, challenge } => {
                    rounds.push(RoundRecord {
                        t: state.t,
                        op,
                        msg: m.msg,
                        check: Some(check),
                        challenge: Some(challenge),
                        claim: Some(next.claim),
                    });
                    state = next;
                }
                StepOutcome::Reject { reason, check } => {
                    rounds.push(RoundRecord { t: state.t, op, msg: m.msg, check, challenge: None, claim: None });
                    let last = FinalRecord { matrix: None, verdict: Verdict::Reject, failure: Some((state.t, reason)) };
                    return Ok((Transcript { header, rounds, last }, trace));
                }
            }
        }
        let (value, verdict) = final_check(&state, inst, &params.ctx)?;
        let failure = (verdict == Verdict::Reject).then_some((state.t, RejectReason::FinalMismatch));
        let last = FinalRecord { matrix: Some(value), verdict, failure };
        Ok((Transcript { header, rounds, last }, trace))
    }
}

/// A discrepancy found while replaying a transcript.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Diagnostic {
    /// The irreducible polynomial is not the one the seed produces.
    SetupDivergence,
    /// The modulus is below what the instance requires.
    ModulusTooSmall { q: u64, required: u64 },
    /// Recorded check value differs from the recomputed one.
    CheckValue { round: usize },
    /// Recorded challenge differs from the one the seed produces.
    ChallengeDivergence { round: usize },
    /// Recorded claim differs from the message at the challenge.
    ClaimValue { round: usize },
    /// Rounds were recorded after the replay rejected.
    ContinuedAfterReject { round: usize },
    /// The transcript stops at a round whose check passes on replay.
    MissingChallenge { round: usize },
    /// Recorded matrix value differs from the recomputed one.
    MatrixValue,
    /// Recorded verdict or failure record differs from the replay.
    Outcome,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Verification {
    pub verdict: Verdict,
    pub failure: Option<(usize, RejectReason)>,
    pub recorded: Verdict,
    pub diagnostics: Vec<Diagnostic>,
}

impl Verification {
    /// The replay reproduced the recorded outcome with no discrepancies.
    pub fn reproduced(&self) -> bool {
        self.diagnostics.is_empty() && self.verdict == self.recorded
    }
}

/// Replays every algebraic check of `transcript` against `inst`, using the
/// recorded challenges, and re-derives setup and challenges from the seed.
pub fn verify_transcript(inst: &Instance, transcript: &Transcript) -> Result<Verification, TranscriptError> {
    let malformed = |m: String| TranscriptError::Malformed(m);
    let h = &transcript.header;
    let digest = instance_digest(inst);
    if h.instance_digest != digest {
        return Err(TranscriptError::DigestMismatch { expected: digest, found: h.instance_digest.clone() });
    }
    let ctx = transcript.context()?;
    let schedule = crate::arith::build_schedule(inst.formula().prefix());
    if h.rounds != schedule.len() {
        return Err(malformed(format!("header says {} rounds, instance needs {}", h.rounds, schedule.len())));
    }
    if transcript.rounds.len() > schedule.len() {
        return Err(malformed("more rounds than the schedule".into()));
    }
    for (i, r) in transcript.rounds.iter().enumerate() {
        if r.t != i + 1 {
            return Err(malformed(format!("round {} recorded at position {}", r.t, i + 1)));
        }
        if r.op != schedule.ops()[i] {
            return Err(malformed(format!("round {} has operator {}, expected {}", r.t, r.op, schedule.ops()[i])));
        }
        if r.challenge.is_some() != r.claim.is_some() {
            return Err(malformed(format!("round {} records only one of challenge/claim", r.t)));
        }
    }
    let stopped_early = transcript.rounds.last().is_some_and(|r| r.challenge.is_none());
    if transcript.rounds.len() < schedule.len() && !stopped_early {
        return Err(malformed("round list is truncated".into()));
    }
    if let Some(pos) = transcript.rounds.iter().position(|r| r.challenge.is_none()) {
        if pos + 1 != transcript.rounds.len() {
            return Err(malformed(format!("round {} has no challenge but is not last", pos + 1)));
        }
    }

    let mut diagnostics = Vec::new();
    let required = modulus_lower_bound(inst);
    if h.q.get() < required {
        diagnostics.push(Diagnostic::ModulusTooSmall { q: h.q.get(), required });
    }
    if find_irreducible(h.q, &mut seeded_rng("setup", h.seed, 0)) != h.irr {
        diagnostics.push(Diagnostic::SetupDivergence);
    }
    let mut seed_rng = seeded_rng("verifier", h.seed, 0);
    let q2 = ctx.q() * ctx.q();
    let n = inst.structure().universe_size();
    let mut asg = PartialAssignment::empty(inst.k());
    let mut claim = ExtElement::ONE;
    let mut outcome: Option<(usize, RejectReason)> = None;

    for r in &transcript.rounds {
        let op = r.op;
        let check = if r.msg.degree() as u64 > q2 {
            outcome = Some((r.t, RejectReason::Degree));
            None
        } else if r.msg.var() != op.var {
            outcome = Some((r.t, RejectReason::WrongVariable));
            None
        } else {
            let current = if op.kind == OpKind::Reduce { asg.get(op.var) } else { None };
            let c = op_apply(&ctx, n, op.kind, &r.msg, current)
                .map_err(|e| malformed(e.to_string()))?;
            if c != claim {
                let reason = match op.kind {
                    OpKind::Reduce => RejectReason::ReduceMismatch,
                    _ => RejectReason::ConstantMismatch,
                };
                outcome = Some((r.t, reason));
            }
            Some(c)
        };
        if r.check != check {
            diagnostics.push(Diagnostic::CheckValue { round: r.t });
        }
        if outcome.is_some() {
            if r.challenge.is_some() {
                diagnostics.push(Diagnostic::ContinuedAfterReject { round: r.t });
            }
            break;
        }
        let Some(challenge) = r.challenge else {
            diagnostics.push(Diagnostic::MissingChallenge { round: r.t });
            outcome = Some((r.t, transcript.last.failure.map_or(RejectReason::ConstantMismatch, |f| f.1)));
            break;
        };
        let expected: ExtElement = ctx.random(&mut seed_rng);
        if expected != challenge {
            diagnostics.push(Diagnostic::ChallengeDivergence { round: r.t });
        }
        claim = r.msg.evaluate(&ctx, challenge);
        if r.claim != Some(claim) {
            diagnostics.push(Diagnostic::ClaimValue { round: r.t });
        }
        asg.set(op.var, challenge);
    }

    let mut matrix = None;
    if outcome.is_none() {
        let values = asg.complete().expect("every variable is challenged once its quantifier round passes");
        let value = matrix_eval(&ctx, inst.structure(), inst.formula().matrix(), &values)
            .map_err(|e| malformed(e.to_string()))?;
        matrix = Some(value);
        if value != claim {
            outcome = Some((schedule.len() + 1, RejectReason::FinalMismatch));
        }
    }
    if transcript.last.matrix != matrix {
        diagnostics.push(Diagnostic::MatrixValue);
    }
    let verdict = if outcome.is_some() { Verdict::Reject } else { Verdict::Accept };
    if transcript.last.verdict != verdict || transcript.last.failure != outcome {
        diagnostics.push(Diagnostic::Outcome);
    }
    Ok(Verification { verdict, failure: outcome, recorded: transcript.last.verdict, diagnostics })
}
