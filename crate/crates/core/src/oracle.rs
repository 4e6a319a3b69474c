//! Brute-force model checking by depth-first enumeration of the prefix.
//!
//! Deliberately naive: this is the ground truth every arithmetized
//! computation is compared against.

use crate::fo::{eval_bool, Instance, Quantifier};

/// Does the structure satisfy the sentence?
pub fn model_check(inst: &Instance) -> bool {
    let mut asg = vec![0; inst.k()];
    check_from(inst, 0, &mut asg)
}

fn check_from(inst: &Instance, depth: usize, asg: &mut [usize]) -> bool {
    let formula = inst.formula();
    if depth == formula.k() {
        return eval_bool(inst.structure(), formula.matrix(), asg);
    }
    let n = inst.structure().universe_size();
    match formula.prefix()[depth] {
        Quantifier::Exists => (0..n).any(|z| {
            asg[depth] = z;
            check_from(inst, depth + 1, asg)
        }),
        Quantifier::Forall => (0..n).all(|z| {
            asg[depth] = z;
            check_from(inst, depth + 1, asg)
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fo::{
        parse_instance, Matrix, PnfFormula, Structure, SymbolId, Var, Vocabulary,
    };
    use proptest::prelude::*;

    fn edge_instance(prefix: &str) -> Instance {
        parse_instance(&format!(
            "vocab E/2\nuniverse 2\nrel E: (0,1)\nformula: {prefix} E(x,y)\n"
        ))
        .unwrap()
    }

    #[test]
    fn worked_examples() {
        assert!(model_check(&edge_instance("EX x . EX y .")));
        assert!(!model_check(&edge_instance("ALL x . EX y .")));
        assert!(model_check(&parse_instance("universe 1\nformula: true\n").unwrap()));
        assert!(!model_check(&parse_instance("universe 3\nformula: false\n").unwrap()));
    }

    fn arb_matrix(k: usize, positive: bool) -> impl Strategy<Value = Matrix> {
        let var = (1..=k).prop_map(Var);
        let leaf = prop_oneof![
            (var.clone(), var.clone()).prop_map(|(a, b)| Matrix::Equal(a, b)),
            (var.clone(), var).prop_map(|(a, b)| Matrix::Rel(SymbolId(0), vec![a, b])),
        ];
        leaf.prop_recursive(3, 12, 2, move |inner| {
            let bin = prop_oneof![
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Matrix::and(a, b)),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Matrix::or(a, b)),
            ];
            if positive {
                bin.boxed()
            } else {
                prop_oneof![bin, inner.prop_map(Matrix::not)].boxed()
            }
        })
    }

    fn arb_structure() -> impl Strategy<Value = Structure> {
        (1usize..=3).prop_flat_map(|n| {
            prop::collection::vec(prop::bool::ANY, n * n).prop_map(move |bits| {
                let tuples = (0..n * n)
                    .filter(|&i| bits[i])
                    .map(|i| vec![i / n, i % n])
                    .collect();
                let vocab = Vocabulary::new([("E", 2)], 4).unwrap();
                Structure::new(n, vocab, vec![tuples]).unwrap()
            })
        })
    }

    fn arb_prefix(k: usize) -> impl Strategy<Value = Vec<Quantifier>> {
        prop::collection::vec(
            prop_oneof![Just(Quantifier::Exists), Just(Quantifier::Forall)],
            k,
        )
    }

    proptest! {
        #[test]
        fn adding_tuples_preserves_positive_truth(
            s in arb_structure(),
            prefix in arb_prefix(2),
            m in arb_matrix(2, true),
            a in 0usize..3, b in 0usize..3,
        ) {
            let n = s.universe_size();
            prop_assume!(a < n && b < n);
            let f = PnfFormula::new(prefix, m).unwrap();
            let before = model_check(&Instance::new(s.clone(), f.clone()).unwrap());
            let bigger = s.with_tuple(SymbolId(0), &[a, b]).unwrap();
            let after = model_check(&Instance::new(bigger, f).unwrap());
            prop_assert!(!before || after);
        }
    }

    /// Exhaustive duality over n ≤ 3, k ≤ 3 with a handful of matrices.
    #[test]
    fn duality_exhaustive() {
        let e = |a, b| Matrix::Rel(SymbolId(0), vec![Var(a), Var(b)]);
        for k in 1..=3usize {
            let matrices = [
                e(1, k),
                Matrix::or(e(k, 1), Matrix::Equal(Var(1), Var(k))),
                Matrix::and(Matrix::not(e(1, 1)), e(k, 1)),
            ];
            for n in 1..=3usize {
                for bits in 0u32..(1 << (n * n)) {
                    let tuples = (0..n * n)
                        .filter(|&i| bits >> i & 1 == 1)
                        .map(|i| vec![i / n, i % n])
                        .collect();
                    let vocab = Vocabulary::new([("E", 2)], 4).unwrap();
                    let s = Structure::new(n, vocab, vec![tuples]).unwrap();
                    for pbits in 0u32..(1 << k) {
                        let prefix: Vec<_> = (0..k)
                            .map(|i| if pbits >> i & 1 == 1 { Quantifier::Forall } else { Quantifier::Exists })
                            .collect();
                        for m in &matrices {
                            let f = PnfFormula::new(prefix.clone(), m.clone()).unwrap();
                            let primal = model_check(&Instance::new(s.clone(), f.clone()).unwrap());
                            let dual = model_check(&Instance::new(s.clone(), f.dual()).unwrap());
                            assert_eq!(primal, !dual);
                        }
                    }
                }
            }
        }
    }
}
