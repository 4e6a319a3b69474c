//! Line-oriented transcript format.
//!
//! ```text
//! version 1
//! q 5
//! irr 2,0,1,3,1
//! seed 7
//! rounds 2
//! instance-digest 3fa2…
//! round 1 op E1 msg var=1; deg=4; coeffs=… check 1,0,0,0 challenge 3,1,0,2 claim 0,4,1,1
//! round 2 op R1 msg var=1; deg=4; coeffs=… check 0,4,1,1 challenge 1,1,2,0 claim 2,2,0,3
//! final matrix 2,2,0,3 verdict accept
//! ```
//!
//! A round the verifier rejected records `-` for its challenge and claim
//! (and for its check when the message was refused before evaluation);
//! the footer then names the failing round and reason. A failed final
//! check is reported as round `T + 1`.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::arith::{Op, UnivariatePoly};
use crate::field::{ExtContext, ExtElement, IrreduciblePoly, PrimeModulus};

use super::{RejectReason, Verdict};

pub const TRANSCRIPT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TranscriptError {
    #[error("malformed transcript: {0}")]
    Malformed(String),
    #[error("transcript is for instance {found}, expected {expected}")]
    DigestMismatch { expected: String, found: String },
}

fn malformed(msg: impl Into<String>) -> TranscriptError {
    TranscriptError::Malformed(msg.into())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TranscriptHeader {
    pub version: u32,
    pub q: PrimeModulus,
    pub irr: IrreduciblePoly,
    pub seed: u64,
    pub rounds: usize,
    pub instance_digest: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoundRecord {
    pub t: usize,
    pub op: Op,
    pub msg: UnivariatePoly,
    pub check: Option<ExtElement>,
    pub challenge: Option<ExtElement>,
    pub claim: Option<ExtElement>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FinalRecord {
    /// Matrix polynomial at the challenges; absent after an early reject.
    pub matrix: Option<ExtElement>,
    pub verdict: Verdict,
    pub failure: Option<(usize, RejectReason)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transcript {
    pub header: TranscriptHeader,
    pub rounds: Vec<RoundRecord>,
    pub last: FinalRecord,
}

impl Transcript {
    pub fn verdict(&self) -> Verdict {
        self.last.verdict
    }

    /// Field context named by the header.
    pub fn context(&self) -> Result<ExtContext, TranscriptError> {
        ExtContext::new(self.header.q, self.header.irr)
            .map_err(|e| malformed(format!("bad field: {e}")))
    }
}

struct Opt<'a>(&'a Option<ExtElement>);

impl fmt::Display for Opt<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            Some(e) => e.fmt(f),
            None => f.write_str("-"),
        }
    }
}

impl fmt::Display for Transcript {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let h = &self.header;
        writeln!(f, "version {}", h.version)?;
        writeln!(f, "q {}", h.q)?;
        writeln!(f, "irr {}", h.irr)?;
        writeln!(f, "seed {}", h.seed)?;
        writeln!(f, "rounds {}", h.rounds)?;
        writeln!(f, "instance-digest {}", h.instance_digest)?;
        for r in &self.rounds {
            writeln!(
                f,
                "round {} op {} msg {} check {} challenge {} claim {}",
                r.t,
                r.op,
                r.msg,
                Opt(&r.check),
                Opt(&r.challenge),
                Opt(&r.claim)
            )?;
        }
        write!(f, "final matrix {} verdict {}", Opt(&self.last.matrix), self.last.verdict)?;
        if let Some((t, reason)) = self.last.failure {
            write!(f, " fail-round {t} reason {reason}")?;
        }
        writeln!(f)
    }
}

fn header_field<'a>(line: Option<&'a str>, key: &str) -> Result<&'a str, TranscriptError> {
    line.and_then(|l| l.strip_prefix(key))
        .and_then(|rest| rest.strip_prefix(' '))
        .ok_or_else(|| malformed(format!("expected `{key}` line")))
}

fn number<T: FromStr>(s: &str, what: &str) -> Result<T, TranscriptError> {
    if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) {
        return Err(malformed(format!("bad {what} `{s}`")));
    }
    s.parse().map_err(|_| malformed(format!("bad {what} `{s}`")))
}

fn optional_elt(ctx: &ExtContext, s: &str) -> Result<Option<ExtElement>, TranscriptError> {
    if s == "-" {
        return Ok(None);
    }
    ctx.parse(s).map(Some).map_err(|_| malformed(format!("bad field element `{s}`")))
}

impl FromStr for Transcript {
    type Err = TranscriptError;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let mut lines = text.lines();
        let version: u32 = number(header_field(lines.next(), "version")?, "version")?;
        if version != TRANSCRIPT_VERSION {
            return Err(malformed(format!("unsupported version {version}")));
        }
        let q: u64 = number(header_field(lines.next(), "q")?, "modulus")?;
        let q = PrimeModulus::new(q).map_err(|e| malformed(e.to_string()))?;
        let irr = IrreduciblePoly::parse(q, header_field(lines.next(), "irr")?)
            .map_err(|e| malformed(e.to_string()))?;
        let seed = number(header_field(lines.next(), "seed")?, "seed")?;
        let rounds = number(header_field(lines.next(), "rounds")?, "round count")?;
        let digest = header_field(lines.next(), "instance-digest")?;
        if digest.len() != 64 || !digest.bytes().all(|b| b.is_ascii_hexdigit()) {
            return Err(malformed("bad instance digest"));
        }
        let header = TranscriptHeader {
            version,
            q,
            irr,
            seed,
            rounds,
            instance_digest: digest.to_string(),
        };
        let ctx = ExtContext::new(q, irr).map_err(|e| malformed(format!("bad field: {e}")))?;

        let mut records = Vec::new();
        let mut last = None;
        for line in lines.by_ref() {
            if let Some(rest) = line.strip_prefix("round ") {
                records.push(parse_round(&ctx, rest)?);
            } else if let Some(rest) = line.strip_prefix("final ") {
                last = Some(parse_final(&ctx, rest)?);
                break;
            } else {
                return Err(malformed(format!("unexpected line `{line}`")));
            }
        }
        let last = last.ok_or_else(|| malformed("missing final line"))?;
        if lines.any(|l| !l.is_empty()) {
            return Err(malformed("trailing content after final line"));
        }
        Ok(Transcript { header, rounds: records, last })
    }
}

fn parse_round(ctx: &ExtContext, rest: &str) -> Result<RoundRecord, TranscriptError> {
    let bad = || malformed(format!("bad round line `round {rest}`"));
    let (t, rest) = rest.split_once(" op ").ok_or_else(bad)?;
    let (op, rest) = rest.split_once(" msg ").ok_or_else(bad)?;
    let (msg, rest) = rest.split_once(" check ").ok_or_else(bad)?;
    let (check, rest) = rest.split_once(" challenge ").ok_or_else(bad)?;
    let (challenge, claim) = rest.split_once(" claim ").ok_or_else(bad)?;
    let op: Op = op.parse().map_err(|_| bad())?;
    let msg = UnivariatePoly::parse(ctx, msg).map_err(|_| bad())?;
    Ok(RoundRecord {
        t: number(t, "round index")?,
        op,
        msg,
        check: optional_elt(ctx, check)?,
        challenge: optional_elt(ctx, challenge)?,
        claim: optional_elt(ctx, claim)?,
    })
}

fn parse_final(ctx: &ExtContext, rest: &str) -> Result<FinalRecord, TranscriptError> {
    let bad = || malformed(format!("bad final line `final {rest}`"));
    let toks: Vec<&str> = rest.split(' ').collect();
    let (matrix, verdict, failure) = match toks.as_slice() {
        ["matrix", m, "verdict", v] => (m, v, None),
        ["matrix", m, "verdict", v, "fail-round", t, "reason", r] => {
            let reason: RejectReason = r.parse().map_err(|_| bad())?;
            (m, v, Some((number(t, "fail round")?, reason)))
        }
        _ => return Err(bad()),
    };
    let verdict: Verdict = verdict.parse().map_err(|_| bad())?;
    if (verdict == Verdict::Reject) != failure.is_some() {
        return Err(bad());
    }
    Ok(FinalRecord { matrix: optional_elt(ctx, matrix)?, verdict, failure })
}
