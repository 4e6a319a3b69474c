//! The interactive proof: setup, the verifier's round checks, honest and
//! adversarial provers, transcripts and soundness experiments.
//!
//! All randomness comes from ChaCha20 streams keyed by SHA-256 of a domain
//! tag, the run seed and an index, so every run is reproducible from its
//! seed and a verifier replay can re-derive each challenge.

mod experiment;
mod prover;
mod run;
mod transcript;
mod verifier;

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::arith::{build_schedule, round_count, ArithError, OperatorSchedule};
use crate::field::{find_irreducible, smallest_prime_geq, ExtContext, FieldError, PrimeModulus};
use crate::fo::Instance;

pub use experiment::{soundness_experiment, three_sigma_margin, ExperimentReport};
pub use prover::{prover_message, Prover, ProverMessage, ProverStrategy};
pub use run::{run_protocol, run_protocol_with, verify_transcript, Diagnostic, RunOptions, RunTrace, Session, Verification};
pub use transcript::{FinalRecord, RoundRecord, Transcript, TranscriptError, TranscriptHeader, TRANSCRIPT_VERSION};
pub use verifier::{final_check, verifier_step, RejectReason, RoundState, StepOutcome, Verdict};

/// Smallest modulus the analysis admits.
pub const MIN_MODULUS: u64 = 5;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProtocolError {
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Arith(#[from] ArithError),
    #[error("soundness experiments need a false instance")]
    TrueInstance,
    #[error("at least one trial is required")]
    NoTrials,
}

/// Setup shared by verifier and prover.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProtocolParams {
    pub q: PrimeModulus,
    pub ctx: ExtContext,
    pub schedule: OperatorSchedule,
    pub rounds: usize,
    pub universe_size: usize,
    pub seed: u64,
}

/// `max(u + 1, T, |ψ|, 5)`: every bound the analysis relies on.
pub fn modulus_lower_bound(inst: &Instance) -> u64 {
    let n = inst.structure().universe_size() as u64;
    let t = round_count(inst.k()) as u64;
    let psi = inst.formula().matrix().size() as u64;
    n.max(t).max(psi).max(MIN_MODULUS)
}

/// Picks `q` as the least prime at or above [`modulus_lower_bound`] (or
/// `q_min`, if larger) and draws the irreducible quartic from the seed.
pub fn choose_params(inst: &Instance, seed: u64, q_min: u64) -> Result<ProtocolParams, ProtocolError> {
    let q = select_modulus(inst, q_min)?;
    params_with(q, build_schedule(inst.formula().prefix()), inst.structure().universe_size(), seed)
}

pub(crate) fn select_modulus(inst: &Instance, q_min: u64) -> Result<PrimeModulus, ProtocolError> {
    Ok(PrimeModulus::new(smallest_prime_geq(modulus_lower_bound(inst).max(q_min)))?)
}

pub(crate) fn params_with(
    q: PrimeModulus,
    schedule: OperatorSchedule,
    universe_size: usize,
    seed: u64,
) -> Result<ProtocolParams, ProtocolError> {
    let irr = find_irreducible(q, &mut seeded_rng("setup", seed, 0));
    let ctx = ExtContext::new(q, irr)?;
    Ok(ProtocolParams { q, ctx, rounds: schedule.len(), schedule, universe_size, seed })
}

fn seed_material(domain: &str, seed: u64, index: u64) -> [u8; 32] {
    let mut h = Sha256::new();
    h.update(b"foip/");
    h.update(domain.as_bytes());
    h.update(seed.to_le_bytes());
    h.update(index.to_le_bytes());
    h.finalize().into()
}

/// Independent random stream for `(domain, seed, index)`.
pub fn seeded_rng(domain: &str, seed: u64, index: u64) -> ChaCha20Rng {
    ChaCha20Rng::from_seed(seed_material(domain, seed, index))
}

/// Seed of trial `index` under `master`.
pub fn trial_seed(master: u64, index: u64) -> u64 {
    let m = seed_material("trial", master, index);
    u64::from_le_bytes(m[..8].try_into().unwrap())
}

/// SHA-256 over the canonical instance text, hex encoded.
pub fn instance_digest(inst: &Instance) -> String {
    hex::encode(Sha256::digest(inst.to_string().as_bytes()))
}
