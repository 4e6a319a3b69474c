//! Interactive proofs for first-order model checking.
//!
//! A model-checking instance (a finite relational structure plus a prenex
//! sentence) is arithmetized into a tower of polynomials over GF(q^4). A
//! verifier with pointwise access to the bottom polynomial is convinced of
//! the top value through `(k² + 3k) / 2` rounds of univariate messages.
//!
//! - [`field`]: GF(q) and GF(q^4) arithmetic, irreducible quartics
//! - [`fo`]: structures, PNF formulas and the instance grammar
//! - [`oracle`]: brute-force model checking
//! - [`arith`]: polynomial semantics and the honest prover's restrictions
//! - [`protocol`]: parameters, verifier, provers, transcripts, experiments

pub mod arith;
pub mod field;
pub mod fo;
pub mod oracle;
pub mod protocol;
