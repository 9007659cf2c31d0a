//! ε-free nondeterministic finite automata.
//!
//! States are dense indices local to each automaton. Symbols are provenance
//! variables or call triggers; triggers only mean something inside an
//! [`Ara`](crate::ara::Ara) and are never matched by [`Nfa::accepts`].

use std::collections::BTreeSet;
use std::fmt::{self, Write as _};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::semiring::Word;
use crate::syntax::Var;

/// A transition label.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Symbol {
    Var(Var),
    /// Call trigger `m_j` for the automaton with index `j`.
    Call(usize),
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Symbol::Var(v) => write!(f, "{v}"),
            Symbol::Call(j) => write!(f, "call:{j}"),
        }
    }
}

pub type StateId = usize;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NfaError {
    #[error("symbol `{0}` occurs more than once in the ordering")]
    DuplicateSymbol(Var),
    #[error("state {state} out of range (automaton has {num_states} states)")]
    StateOutOfRange { state: StateId, num_states: usize },
}

#[derive(Clone, PartialEq, Eq)]
pub struct Nfa {
    num_states: usize,
    transitions: BTreeSet<(StateId, Symbol, StateId)>,
    initial: BTreeSet<StateId>,
    finals: BTreeSet<StateId>,
    alphabet: BTreeSet<Var>,
}

impl Nfa {
    /// An automaton with `num_states` states and nothing else.
    pub fn new(num_states: usize) -> Self {
        Nfa {
            num_states,
            transitions: BTreeSet::new(),
            initial: BTreeSet::new(),
            finals: BTreeSet::new(),
            alphabet: BTreeSet::new(),
        }
    }

    /// Two states, accepting `{w}` for a one-letter `w`.
    pub fn symbol(v: Var) -> Self {
        let mut nfa = Nfa::new(2);
        nfa.add_transition(0, Symbol::Var(v), 1);
        nfa.add_initial(0);
        nfa.add_final(1);
        nfa
    }

    /// One state that is initial and final: accepts `{ε}`.
    pub fn epsilon() -> Self {
        let mut nfa = Nfa::new(1);
        nfa.add_initial(0);
        nfa.add_final(0);
        nfa
    }

    /// Builds an automaton from raw parts, checking state bounds.
    pub fn from_parts(
        num_states: usize,
        transitions: impl IntoIterator<Item = (StateId, Symbol, StateId)>,
        initial: impl IntoIterator<Item = StateId>,
        finals: impl IntoIterator<Item = StateId>,
    ) -> Result<Self, NfaError> {
        let mut nfa = Nfa::new(num_states);
        let check = |s: StateId| {
            if s < num_states {
                Ok(s)
            } else {
                Err(NfaError::StateOutOfRange {
                    state: s,
                    num_states,
                })
            }
        };
        for (p, sym, q) in transitions {
            nfa.add_transition(check(p)?, sym, check(q)?);
        }
        for s in initial {
            nfa.add_initial(check(s)?);
        }
        for s in finals {
            nfa.add_final(check(s)?);
        }
        Ok(nfa)
    }

    pub fn add_state(&mut self) -> StateId {
        self.num_states += 1;
        self.num_states - 1
    }

    /// # Panics
    /// If either state is out of range.
    pub fn add_transition(&mut self, from: StateId, symbol: Symbol, to: StateId) {
        assert!(
            from < self.num_states && to < self.num_states,
            "state out of range"
        );
        if let Symbol::Var(v) = &symbol {
            self.alphabet.insert(v.clone());
        }
        self.transitions.insert((from, symbol, to));
    }

    pub fn add_initial(&mut self, s: StateId) {
        assert!(s < self.num_states, "state out of range");
        self.initial.insert(s);
    }

    pub fn add_final(&mut self, s: StateId) {
        assert!(s < self.num_states, "state out of range");
        self.finals.insert(s);
    }

    /// Declares base symbols that may not occur on any transition.
    pub fn extend_alphabet(&mut self, symbols: impl IntoIterator<Item = Var>) {
        self.alphabet.extend(symbols);
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn num_transitions(&self) -> usize {
        self.transitions.len()
    }

    pub fn transitions(&self) -> impl Iterator<Item = &(StateId, Symbol, StateId)> {
        self.transitions.iter()
    }

    pub fn initial(&self) -> &BTreeSet<StateId> {
        &self.initial
    }

    pub fn finals(&self) -> &BTreeSet<StateId> {
        &self.finals
    }

    pub fn alphabet(&self) -> &BTreeSet<Var> {
        &self.alphabet
    }

    pub fn has_triggers(&self) -> bool {
        self.transitions
            .iter()
            .any(|(_, s, _)| matches!(s, Symbol::Call(_)))
    }

    /// Outgoing transitions per state.
    pub(crate) fn adjacency(&self) -> Vec<Vec<(&Symbol, StateId)>> {
        let mut adj = vec![Vec::new(); self.num_states];
        for (p, sym, q) in &self.transitions {
            adj[*p].push((sym, *q));
        }
        adj
    }

    /// Standard subset simulation. Symbols outside the alphabet reject.
    pub fn accepts(&self, w: &Word) -> bool {
        let adj = self.adjacency();
        let mut current: BTreeSet<StateId> = self.initial.clone();
        for v in w.symbols() {
            if !self.alphabet.contains(v) {
                return false;
            }
            let mut next = BTreeSet::new();
            for &p in &current {
                for (sym, q) in &adj[p] {
                    if matches!(sym, Symbol::Var(x) if x == v) {
                        next.insert(*q);
                    }
                }
            }
            if next.is_empty() {
                return false;
            }
            current = next;
        }
        current.iter().any(|s| self.finals.contains(s))
    }

    /// Graphviz rendering; final states are doubled circles.
    pub fn to_dot(&self, name: &str) -> String {
        let mut out = String::new();
        writeln!(out, "digraph \"{}\" {{", escape(name)).unwrap();
        out.push_str("  rankdir=LR;\n  node [shape=circle];\n");
        self.write_dot_body(&mut out, "", "  ");
        out.push_str("}\n");
        out
    }

    /// Nodes and edges, with node ids prefixed by `prefix`. Shared with the
    /// ARA export, which puts each component in its own cluster.
    pub(crate) fn write_dot_body(&self, out: &mut String, prefix: &str, indent: &str) {
        for s in 0..self.num_states {
            let shape = if self.finals.contains(&s) {
                "doublecircle"
            } else {
                "circle"
            };
            writeln!(
                out,
                "{indent}\"{prefix}{s}\" [label=\"{s}\", shape={shape}];"
            )
            .unwrap();
        }
        for &s in &self.initial {
            writeln!(out, "{indent}\"{prefix}start{s}\" [shape=point];").unwrap();
            writeln!(out, "{indent}\"{prefix}start{s}\" -> \"{prefix}{s}\";").unwrap();
        }
        for (p, sym, q) in &self.transitions {
            writeln!(
                out,
                "{indent}\"{prefix}{p}\" -> \"{prefix}{q}\" [label=\"{}\"];",
                escape(&sym.to_string())
            )
            .unwrap();
        }
    }
}

pub(crate) fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

impl fmt::Debug for Nfa {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Nfa")
            .field("num_states", &self.num_states)
            .field("initial", &self.initial)
            .field("finals", &self.finals)
            .field(
                "transitions",
                &self
                    .transitions
                    .iter()
                    .map(|(p, s, q)| format!("{p} -{s}-> {q}"))
                    .collect::<Vec<_>>(),
            )
            .finish()
    }
}

/// Accepts the words whose symbols are exactly `ordering` and whose first
/// occurrences appear in that order:
/// `σ₁⁺σ₂(σ₁∪σ₂)*…σₖ(σ₁∪…∪σₖ)*`, or only ε when the ordering is empty.
///
/// State `j` has self-loops on `σ₁..σⱼ` and advances to `j+1` on `σⱼ₊₁`.
pub fn ordered_language_nfa(ordering: &[Var]) -> Result<Nfa, NfaError> {
    let mut seen = BTreeSet::new();
    for v in ordering {
        if !seen.insert(v) {
            return Err(NfaError::DuplicateSymbol(v.clone()));
        }
    }
    let k = ordering.len();
    let mut nfa = Nfa::new(k + 1);
    for j in 0..=k {
        for v in &ordering[..j] {
            nfa.add_transition(j, Symbol::Var(v.clone()), j);
        }
        if j < k {
            nfa.add_transition(j, Symbol::Var(ordering[j].clone()), j + 1);
        }
    }
    nfa.add_initial(0);
    nfa.add_final(k);
    Ok(nfa)
}

/// Accepts the words over `symbols` whose first occurrences begin with
/// `prefix` in that order: `ordered_language_nfa(prefix)` followed by any
/// word over `symbols`. Every word of `ordered_language_nfa(σ)` for an
/// ordering `σ` of `symbols` extending `prefix` is accepted.
pub fn ordered_prefix_nfa(prefix: &[Var], symbols: &BTreeSet<Var>) -> Result<Nfa, NfaError> {
    let mut nfa = ordered_language_nfa(prefix)?;
    let k = prefix.len();
    for v in symbols {
        if !prefix.contains(v) {
            nfa.add_transition(k, Symbol::Var(v.clone()), k);
        }
    }
    nfa.extend_alphabet(symbols.iter().cloned());
    Ok(nfa)
}
