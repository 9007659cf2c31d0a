//! Small TBoxes used by the tests, the benchmarks and the CLI.

use crate::syntax::{parse_tbox, AnnotatedTBox};

/// Five axioms: `B ⊓ C ⊑ D`, `⊤ ⊑ B`, `A ⊑ C`, `A ⊑ ∃R`, `∃R.B ⊑ B`.
pub const EXAMPLE_1: &str = "\
# running example
B & C <= D : u
top <= B : v
A <= C : w
A <= ex R : x
ex R . B <= B : y
";

/// A two-step chain, where order matters under the left-absorbing product.
pub const CHAIN: &str = "\
A <= B : m
B <= C : n
";

/// `A ⊑ B` and `B ⊑ A`; the raw behaviour of `A ⊑ B` is `(uv)*u`.
pub const CYCLE: &str = "\
A <= B : u
B <= A : v
";

pub fn example_1() -> AnnotatedTBox {
    parse_tbox(EXAMPLE_1).expect("fixture parses")
}

pub fn chain() -> AnnotatedTBox {
    parse_tbox(CHAIN).expect("fixture parses")
}

pub fn cycle() -> AnnotatedTBox {
    parse_tbox(CYCLE).expect("fixture parses")
}

/// Text of the TBox `T_n`: for each level `i`,
/// `A(i-1) ⊑ Bi : ui`, `A(i-1) ⊑ Ci : wi`, `Bi ⊑ Ai : vi`, `Ci ⊑ Ai : xi`.
/// `A0 ⊑ An` has `2^n` monomials.
pub fn sword_text(n: usize) -> String {
    let mut out = format!("# sword TBox, n = {n}\n");
    for i in 1..=n {
        let p = i - 1;
        out.push_str(&format!("A{p} <= B{i} : u{i}\n"));
        out.push_str(&format!("A{p} <= C{i} : w{i}\n"));
        out.push_str(&format!("B{i} <= A{i} : v{i}\n"));
        out.push_str(&format!("C{i} <= A{i} : x{i}\n"));
    }
    out
}

pub fn sword(n: usize) -> AnnotatedTBox {
    parse_tbox(&sword_text(n)).expect("generated TBox parses")
}
