use rayon::prelude::*;

use crate::fo::Instance;
use crate::oracle::model_check;

use super::{trial_seed, ProtocolError, ProverStrategy, RunOptions, Session, Verdict};

/// Outcome of repeated runs of one prover against a false instance.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub q: u64,
    pub trials: usize,
    pub accepts: usize,
    pub rate: f64,
    /// `1/q`.
    pub bound: f64,
    /// Three standard errors of a rate at the bound.
    pub margin: f64,
    /// Verdicts in trial order.
    pub verdicts: Vec<Verdict>,
}

impl ExperimentReport {
    pub fn passed(&self) -> bool {
        self.rate <= self.bound + self.margin
    }
}

pub fn three_sigma_margin(p: f64, trials: usize) -> f64 {
    3.0 * (p * (1.0 - p) / trials as f64).sqrt()
}

/// Runs `trials` independent protocol executions (trial `i` uses
/// `trial_seed(master_seed, i)`) and compares the acceptance rate to `1/q`.
pub fn soundness_experiment(
    inst: &Instance,
    strategy: ProverStrategy,
    trials: usize,
    master_seed: u64,
    q_min: u64,
) -> Result<ExperimentReport, ProtocolError> {
    if trials == 0 {
        return Err(ProtocolError::NoTrials);
    }
    if model_check(inst) {
        return Err(ProtocolError::TrueInstance);
    }
    let session = Session::new(inst, RunOptions { q_min })?;
    let q = session.modulus().get();
    let verdicts: Vec<Verdict> = (0..trials as u64)
        .into_par_iter()
        .map(|i| Ok(session.run(strategy, trial_seed(master_seed, i))?.0.verdict()))
        .collect::<Result<_, ProtocolError>>()?;
    let accepts = verdicts.iter().filter(|v| **v == Verdict::Accept).count();
    let bound = 1.0 / q as f64;
    Ok(ExperimentReport {
        q,
        trials,
        accepts,
        rate: accepts as f64 / trials as f64,
        bound,
        margin: three_sigma_margin(bound, trials),
        verdicts,
    })
}
