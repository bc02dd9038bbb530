//! Exact peephole rewriting of gate sequences.
//!
//! Runs of diagonal gates are folded into a single power of T (mod 8) and re-emitted in
//! their cheapest form (`T·T → S`, `T^3 → Z·T†`, `T^7 → T†`, ...); adjacent `H·H`, `X·X` and
//! `Y·Y` pairs cancel. Every rewrite is an exact matrix identity, phase included.

use crate::gate_algebra::{Gate, GateSeq};

#[derive(Clone, Copy, PartialEq, Eq)]
enum Token {
    Diag(u8),
    Gate(Gate),
}

fn diag_gates(power: u8) -> &'static [Gate] {
    match power % 8 {
        0 => &[],
        1 => &[Gate::T],
        2 => &[Gate::S],
        3 => &[Gate::Z, Gate::Tdg],
        4 => &[Gate::Z],
        5 => &[Gate::Z, Gate::T],
        6 => &[Gate::Sdg],
        _ => &[Gate::Tdg],
    }
}

pub fn simplify_gates(gates: &[Gate]) -> Vec<Gate> {
    let mut stack: Vec<Token> = Vec::with_capacity(gates.len());
    for &g in gates {
        match g.t_power() {
            Some(0) => {}
            Some(k) => match stack.last_mut() {
                Some(Token::Diag(j)) => {
                    *j = (*j + k) % 8;
                    if *j == 0 {
                        stack.pop();
                    }
                }
                _ => stack.push(Token::Diag(k)),
            },
            None => {
                if stack.last() == Some(&Token::Gate(g)) {
                    stack.pop();
                } else {
                    stack.push(Token::Gate(g));
                }
            }
        }
    }
    let mut out = Vec::with_capacity(stack.len() + stack.len() / 2);
    for t in stack {
        match t {
            Token::Diag(k) => out.extend_from_slice(diag_gates(k)),
            Token::Gate(g) => out.push(g),
        }
    }
    out
}

pub fn simplify(seq: &GateSeq) -> GateSeq {
    GateSeq::new(simplify_gates(&seq.gates))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gate_algebra::{seq_to_matrix, Unitary2};
    use proptest::prelude::*;

    fn s(x: &str) -> GateSeq {
        GateSeq::parse(x).unwrap()
    }

    #[test]
    fn folds_t_runs() {
        assert_eq!(simplify(&s("T T")), s("S"));
        assert_eq!(simplify(&s("T T T T")), s("Z"));
        assert_eq!(simplify(&s("T T T T T T T")), s("Tdg"));
        assert_eq!(simplify(&s("T T T T T T T T")), s("-"));
        assert_eq!(simplify(&s("H T Tdg H")), s("-"));
        assert_eq!(simplify(&s("H T T H T")), s("H S H T"));
        assert_eq!(simplify(&s("T T T")), s("Z Tdg"));
    }

    proptest! {
        #[test]
        fn rewriting_is_exact(idx in proptest::collection::vec(0usize..9, 0..40)) {
            let gates: Vec<Gate> = idx.iter().map(|&i| Gate::ALL[i]).collect();
            let seq = GateSeq::new(gates);
            let out = simplify(&seq);
            let a: Unitary2<f64> = seq_to_matrix(&seq);
            let b: Unitary2<f64> = seq_to_matrix(&out);
            prop_assert!(a.max_abs_diff(&b) < 1e-12);
            prop_assert!(out.len() <= seq.len() + seq.len() / 2 + 1);
            prop_assert_eq!(simplify(&out), out.clone());
            prop_assert!(out.counts.unit_cost() <= seq.counts.unit_cost() + 1e-9);
        }
    }
}
