//! Provenance for subsumption in annotated ELHr TBoxes.
//!
//! Entailment of `(A ⊑ B, m)` is decided by building a weighted tree
//! automaton whose runs are derivations, computing its behaviour as a
//! fixpoint, representing that behaviour with an acyclic recursive
//! automaton and intersecting it with a regular language of words whose
//! canonical monomial is `m`.
//!
//! - [`syntax`]: TBoxes, parsing and signatures
//! - [`semiring`]: words, canonical monomials, finite languages
//! - [`wta`]: the tree automaton and a brute-force run enumerator
//! - [`nfa`]: finite automata and ordered languages
//! - [`ara`]: acyclic recursive automata
//! - [`behaviour`]: saturation, the automaton stack and entailment

pub mod ara;
pub mod behaviour;
pub mod families;
pub mod nfa;
pub mod semiring;
pub mod syntax;
pub mod wta;

pub use behaviour::{
    behaviour_ara, build_ara_stack, entails, monomials, run_language, saturate, saturate_goal,
    BehaviourError, BehaviourTable, Engine, EngineConfig, Entailment, Reasoner, Witness,
};
pub use semiring::{canonicalize, Monomial, MonomialSet, SemiringMode, Word};
pub use syntax::{
    parse_goal, parse_query, parse_tbox, AnnotatedTBox, Annotation, Axiom, Concept, Var,
};
