//! Acyclic recursive automata (hierarchical state machines).
//!
//! An [`Ara`] is a list of NFAs. Component `i` may read base symbols and
//! call triggers `m_j` with `j < i`; reading `m_j` runs component `j` on a
//! factor of the input, from one of its initial states to one of its final
//! states, then continues in component `i`. The list order is a topological
//! order of the call relation and acceptance happens at a designated root.
//!
//! ARAs accept regular languages but can be exponentially smaller than any
//! NFA for the same language; [`power_family`] accepts `{a^(2^n)}` with `3n`
//! states.

use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap, HashMap, HashSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::nfa::{escape, Nfa, StateId, Symbol};
use crate::semiring::Word;
use crate::syntax::Var;

#[derive(Debug, Error)]
pub enum AraError {
    #[error("not a well-formed ARA: {0}")]
    NotWellFormed(String),
    #[error("inlining needs {needed} states, more than the cap of {cap}")]
    SizeBlowup { needed: u128, cap: usize },
    #[error("the intersected NFA must not contain call triggers")]
    TriggerInNfa,
    #[error("invalid ARA JSON: {0}")]
    Json(String),
}

/// One NFA of an ARA. `ids` are its global state names, which must be
/// disjoint from those of every other component.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AraComponent {
    pub label: String,
    pub ids: Vec<u32>,
    pub nfa: Nfa,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ara {
    alphabet: BTreeSet<Var>,
    components: Vec<AraComponent>,
    root: usize,
}

/// Incremental construction with fresh, disjoint state ids.
#[derive(Debug, Default)]
pub struct AraBuilder {
    alphabet: BTreeSet<Var>,
    components: Vec<AraComponent>,
    next_id: u32,
}

impl AraBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends a component and returns its index.
    pub fn push(&mut self, label: impl Into<String>, nfa: Nfa) -> usize {
        let n = nfa.num_states() as u32;
        let ids = (self.next_id..self.next_id + n).collect();
        self.next_id += n;
        self.alphabet.extend(nfa.alphabet().iter().cloned());
        self.components.push(AraComponent {
            label: label.into(),
            ids,
            nfa,
        });
        self.components.len() - 1
    }

    pub fn extend_alphabet(&mut self, symbols: impl IntoIterator<Item = Var>) {
        self.alphabet.extend(symbols);
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    /// Total number of states so far.
    pub fn size(&self) -> usize {
        self.next_id as usize
    }

    pub fn finish(self, root: usize) -> Ara {
        Ara {
            alphabet: self.alphabet,
            components: self.components,
            root,
        }
    }
}

/// Counters from one membership check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MembershipStats {
    /// `(state, start, end)` configurations settled by the DP.
    pub cells: usize,
    /// `|states|² · (|w| + 1)²`.
    pub bound: usize,
}

impl Ara {
    /// An ARA with a single component.
    pub fn single(label: impl Into<String>, nfa: Nfa) -> Ara {
        let mut b = AraBuilder::new();
        let root = b.push(label, nfa);
        b.finish(root)
    }

    /// Builds from raw parts; nothing is checked, see [`Ara::well_formed`].
    pub fn from_parts(alphabet: BTreeSet<Var>, components: Vec<AraComponent>, root: usize) -> Ara {
        Ara {
            alphabet,
            components,
            root,
        }
    }

    pub fn alphabet(&self) -> &BTreeSet<Var> {
        &self.alphabet
    }

    pub fn components(&self) -> &[AraComponent] {
        &self.components
    }

    pub fn root(&self) -> usize {
        self.root
    }

    /// Total number of states.
    pub fn size(&self) -> usize {
        self.components.iter().map(|c| c.nfa.num_states()).sum()
    }

    pub fn well_formed(&self) -> bool {
        self.check().is_ok()
    }

    /// Disjoint state sets, base symbols from the alphabet, triggers only
    /// to lower indices (hence acyclic) and an existing root.
    pub fn check(&self) -> Result<(), AraError> {
        let bad = |msg: String| Err(AraError::NotWellFormed(msg));
        if self.root >= self.components.len() {
            return bad(format!("root {} is not a component", self.root));
        }
        let mut seen = HashSet::new();
        for (i, c) in self.components.iter().enumerate() {
            if c.ids.len() != c.nfa.num_states() {
                return bad(format!(
                    "component {i} names {} of {} states",
                    c.ids.len(),
                    c.nfa.num_states()
                ));
            }
            for id in &c.ids {
                if !seen.insert(*id) {
                    return bad(format!("state id {id} is shared between components"));
                }
            }
            for (_, sym, _) in c.nfa.transitions() {
                match sym {
                    Symbol::Var(v) if !self.alphabet.contains(v) => {
                        return bad(format!("component {i} reads `{v}` outside the alphabet"));
                    }
                    Symbol::Call(j) if *j >= i => {
                        return bad(format!("component {i} calls component {j}"));
                    }
                    _ => {}
                }
            }
        }
        Ok(())
    }

    /// Components reachable from the root through calls, ascending.
    fn reachable(&self) -> Vec<usize> {
        let mut seen = BTreeSet::from([self.root]);
        let mut stack = vec![self.root];
        while let Some(i) = stack.pop() {
            for (_, sym, _) in self.components[i].nfa.transitions() {
                if let Symbol::Call(j) = sym {
                    if seen.insert(*j) {
                        stack.push(*j);
                    }
                }
            }
        }
        seen.into_iter().collect()
    }

    pub fn membership(&self, w: &Word) -> Result<bool, AraError> {
        self.membership_with_stats(w).map(|(ok, _)| ok)
    }

    /// Word membership by dynamic programming over factors of `w`.
    ///
    /// Components are processed in index order. For component `i` and each
    /// start position `a`, a search over `(state, position)` pairs starting
    /// from the initial states at `a` finds every `b` such that `w[a..b]` is
    /// accepted; base symbols advance by one, a call `m_j` from position `c`
    /// jumps to any `d` where `w[c..d]` is accepted by component `j`.
    pub fn membership_with_stats(&self, w: &Word) -> Result<(bool, MembershipStats), AraError> {
        self.check()?;
        let n = w.len();
        let mut cells = 0usize;
        // spans[i][a]: ends b with w[a..b] ∈ L(component i)
        let mut spans: HashMap<usize, Vec<Vec<usize>>> = HashMap::new();
        for i in self.reachable() {
            let nfa = &self.components[i].nfa;
            let adj = nfa.adjacency();
            let width = n + 1;
            let mut accepted = vec![Vec::new(); width];
            for a in 0..=n {
                let mut visited = vec![false; nfa.num_states() * width];
                let mut stack: Vec<(StateId, usize)> = Vec::new();
                for &p in nfa.initial() {
                    if !visited[p * width + a] {
                        visited[p * width + a] = true;
                        stack.push((p, a));
                    }
                }
                let mut ends = BTreeSet::new();
                while let Some((p, pos)) = stack.pop() {
                    cells += 1;
                    if nfa.finals().contains(&p) {
                        ends.insert(pos);
                    }
                    for (sym, q) in &adj[p] {
                        match sym {
                            Symbol::Var(x) => {
                                if pos < n && w.symbols()[pos] == *x {
                                    let cell = q * width + pos + 1;
                                    if !visited[cell] {
                                        visited[cell] = true;
                                        stack.push((*q, pos + 1));
                                    }
                                }
                            }
                            Symbol::Call(j) => {
                                for &end in &spans[j][pos] {
                                    let cell = q * width + end;
                                    if !visited[cell] {
                                        visited[cell] = true;
                                        stack.push((*q, end));
                                    }
                                }
                            }
                        }
                    }
                }
                accepted[a] = ends.into_iter().collect();
            }
            spans.insert(i, accepted);
        }
        let size = self.size();
        let bound = size * size * (n + 1) * (n + 1);
        let ok = spans[&self.root][0].contains(&n);
        Ok((ok, MembershipStats { cells, bound }))
    }

    /// States of the NFA that [`Ara::inline_expand`] would build.
    pub fn expanded_size(&self) -> u128 {
        let mut sizes: Vec<u128> = vec![0; self.components.len()];
        for i in self.reachable() {
            let nfa = &self.components[i].nfa;
            let mut total = nfa.num_states() as u128;
            for (_, sym, _) in nfa.transitions() {
                if let Symbol::Call(j) = sym {
                    total = total.saturating_add(sizes[*j]);
                }
            }
            sizes[i] = total;
        }
        sizes[self.root]
    }

    /// Flattens into one ε-free NFA with the same language by splicing a
    /// fresh copy of the callee in place of every call transition, bottom up.
    /// Fails when the result would have more than `size_cap` states.
    pub fn inline_expand(&self, size_cap: usize) -> Result<Nfa, AraError> {
        self.check()?;
        let needed = self.expanded_size();
        if needed > size_cap as u128 {
            return Err(AraError::SizeBlowup {
                needed,
                cap: size_cap,
            });
        }
        let mut flat = EpsNfa::default();
        let (initial, finals) = self.splice(self.root, &mut flat);
        Ok(flat.into_nfa(initial, finals, &self.alphabet))
    }

    fn splice(&self, i: usize, flat: &mut EpsNfa) -> (Vec<StateId>, Vec<StateId>) {
        let nfa = &self.components[i].nfa;
        let base = flat.num_states;
        flat.num_states += nfa.num_states();
        for (p, sym, q) in nfa.transitions() {
            match sym {
                Symbol::Var(v) => flat.transitions.push((base + p, Some(v.clone()), base + q)),
                Symbol::Call(j) => {
                    let (inits, finals) = self.splice(*j, flat);
                    for s in inits {
                        flat.transitions.push((base + p, None, s));
                    }
                    for f in finals {
                        flat.transitions.push((f, None, base + q));
                    }
                }
            }
        }
        (
            nfa.initial().iter().map(|s| base + s).collect(),
            nfa.finals().iter().map(|s| base + s).collect(),
        )
    }

    /// Shortest word in `L(self) ∩ L(nfa)`, or `None` if the intersection
    /// is empty.
    ///
    /// For every component `i` (in index order) and NFA state `s`, a
    /// shortest-path search over pairs (component state, NFA state) from
    /// the initial states paired with `s` computes the summary: the NFA
    /// states `t` reachable while component `i` accepts, with the length of
    /// a shortest such factor. Base symbols move both sides; a call `m_j`
    /// moves the NFA side along the summaries of component `j`. Base steps
    /// are tried before calls, so ties resolve deterministically.
    pub fn intersect_empty(&self, nfa: &Nfa) -> Result<Option<Word>, AraError> {
        self.check()?;
        if nfa.has_triggers() {
            return Err(AraError::TriggerInNfa);
        }
        let mut search = ProductSearch::new(self, nfa);
        for &s in nfa.initial() {
            search.ensure(self.root, s);
        }
        let mut best: Option<(u64, StateId, StateId)> = None;
        for &s in nfa.initial() {
            for &t in nfa.finals() {
                if let Some(len) = search.summary(self.root, s, t) {
                    if best.is_none_or(|(l, _, _)| len < l) {
                        best = Some((len, s, t));
                    }
                }
            }
        }
        Ok(best.map(|(_, s, t)| {
            let mut out = Vec::new();
            search.witness(self.root, s, t, &mut out);
            Word(out)
        }))
    }

    /// Concatenation: a new root with `n + 1` states calling each part once.
    pub fn concat(parts: &[Ara]) -> Ara {
        let (mut builder, roots) = Self::rebase(parts);
        let mut root = Nfa::new(parts.len() + 1);
        for (k, r) in roots.iter().enumerate() {
            root.add_transition(k, Symbol::Call(*r), k + 1);
        }
        root.add_initial(0);
        root.add_final(parts.len());
        let idx = builder.push("concat", root);
        builder.finish(idx)
    }

    /// Union: a new two-state root calling one of the parts.
    pub fn union(parts: &[Ara]) -> Ara {
        let (mut builder, roots) = Self::rebase(parts);
        let mut root = Nfa::new(2);
        for r in &roots {
            root.add_transition(0, Symbol::Call(*r), 1);
        }
        root.add_initial(0);
        root.add_final(1);
        let idx = builder.push("union", root);
        builder.finish(idx)
    }

    fn rebase(parts: &[Ara]) -> (AraBuilder, Vec<usize>) {
        let mut builder = AraBuilder::new();
        let mut roots = Vec::with_capacity(parts.len());
        for part in parts {
            let offset = builder.len();
            builder.extend_alphabet(part.alphabet.iter().cloned());
            for c in &part.components {
                let mut nfa = Nfa::new(c.nfa.num_states());
                for (p, sym, q) in c.nfa.transitions() {
                    let sym = match sym {
                        Symbol::Call(j) => Symbol::Call(j + offset),
                        other => other.clone(),
                    };
                    nfa.add_transition(*p, sym, *q);
                }
                for &s in c.nfa.initial() {
                    nfa.add_initial(s);
                }
                for &s in c.nfa.finals() {
                    nfa.add_final(s);
                }
                builder.push(c.label.clone(), nfa);
            }
            roots.push(part.root + offset);
        }
        (builder, roots)
    }

    /// Graphviz rendering, one cluster per component; call transitions are
    /// labelled `call:j`.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph ara {\n  rankdir=LR;\n  node [shape=circle];\n");
        for (i, c) in self.components.iter().enumerate() {
            let root = if i == self.root { " (root)" } else { "" };
            writeln!(out, "  subgraph cluster_{i} {{").unwrap();
            writeln!(out, "    label=\"{i}: {}{root}\";", escape(&c.label)).unwrap();
            c.nfa.write_dot_body(&mut out, &format!("c{i}_"), "    ");
            out.push_str("  }\n");
        }
        out.push_str("}\n");
        out
    }

    pub fn to_json(&self) -> String {
        let doc = AraJson {
            alphabet: self.alphabet.iter().cloned().collect(),
            root: self.root,
            components: self
                .components
                .iter()
                .enumerate()
                .map(|(index, c)| ComponentJson {
                    index,
                    label: c.label.clone(),
                    states: c.ids.clone(),
                    initial: c.nfa.initial().iter().copied().collect(),
                    finals: c.nfa.finals().iter().copied().collect(),
                    transitions: c
                        .nfa
                        .transitions()
                        .map(|(from, symbol, to)| TransitionJson {
                            from: *from,
                            symbol: symbol.clone(),
                            to: *to,
                        })
                        .collect(),
                })
                .collect(),
        };
        serde_json::to_string_pretty(&doc).expect("ARA serializes")
    }

    /// Reads the format written by [`Ara::to_json`]. Local state indices are
    /// bounds-checked; well-formedness is left to [`Ara::check`].
    pub fn from_json(text: &str) -> Result<Ara, AraError> {
        let doc: AraJson = serde_json::from_str(text).map_err(|e| AraError::Json(e.to_string()))?;
        let mut components = Vec::with_capacity(doc.components.len());
        for (i, c) in doc.components.into_iter().enumerate() {
            if c.index != i {
                return Err(AraError::Json(format!(
                    "component {i} has index {}",
                    c.index
                )));
            }
            let nfa = Nfa::from_parts(
                c.states.len(),
                c.transitions.into_iter().map(|t| (t.from, t.symbol, t.to)),
                c.initial,
                c.finals,
            )
            .map_err(|e| AraError::Json(format!("component {i}: {e}")))?;
            components.push(AraComponent {
                label: c.label,
                ids: c.states,
                nfa,
            });
        }
        Ok(Ara {
            alphabet: doc.alphabet.into_iter().collect(),
            components,
            root: doc.root,
        })
    }
}

#[derive(Serialize, Deserialize)]
struct AraJson {
    alphabet: Vec<Var>,
    root: usize,
    components: Vec<ComponentJson>,
}

#[derive(Serialize, Deserialize)]
struct ComponentJson {
    index: usize,
    label: String,
    states: Vec<u32>,
    initial: Vec<StateId>,
    finals: Vec<StateId>,
    transitions: Vec<TransitionJson>,
}

#[derive(Serialize, Deserialize)]
struct TransitionJson {
    from: StateId,
    symbol: Symbol,
    to: StateId,
}

/// NFA with ε-moves, only used while inlining.
#[derive(Default)]
struct EpsNfa {
    num_states: usize,
    transitions: Vec<(StateId, Option<Var>, StateId)>,
}

impl EpsNfa {
    fn into_nfa(
        self,
        initial: Vec<StateId>,
        finals: Vec<StateId>,
        alphabet: &BTreeSet<Var>,
    ) -> Nfa {
        let n = self.num_states;
        let mut eps = vec![Vec::new(); n];
        let mut labelled = vec![Vec::new(); n];
        for (p, sym, q) in self.transitions {
            match sym {
                None => eps[p].push(q),
                Some(v) => labelled[p].push((v, q)),
            }
        }
        let is_final: HashSet<StateId> = finals.into_iter().collect();
        let mut nfa = Nfa::new(n);
        nfa.extend_alphabet(alphabet.iter().cloned());
        for s in 0..n {
            let mut closure = vec![s];
            let mut seen = HashSet::from([s]);
            let mut k = 0;
            while k < closure.len() {
                for &t in &eps[closure[k]] {
                    if seen.insert(t) {
                        closure.push(t);
                    }
                }
                k += 1;
            }
            for &t in &closure {
                if is_final.contains(&t) {
                    nfa.add_final(s);
                }
                for (v, u) in &labelled[t] {
                    nfa.add_transition(s, Symbol::Var(v.clone()), *u);
                }
            }
        }
        for s in initial {
            nfa.add_initial(s);
        }
        nfa
    }
}

#[derive(Clone, Copy)]
enum Pred {
    Start,
    Base(usize),
    Call {
        from: usize,
        callee: usize,
        s: StateId,
        t: StateId,
    },
}

/// Best distance, predecessor and (for `Base` steps) the letter read, per
/// product node `p * nfa_states + t`.
#[derive(Default)]
struct SearchTree {
    nodes: HashMap<usize, (u64, Pred, Option<Var>)>,
}

struct ProductSearch<'a> {
    ara: &'a Ara,
    nfa_states: usize,
    nfa_adj: Vec<Vec<(Var, StateId)>>,
    /// (component, source NFA state) -> search tree
    trees: HashMap<(usize, StateId), SearchTree>,
    /// (component, s, t) -> (length, final state reached)
    summaries: HashMap<(usize, StateId, StateId), (u64, StateId)>,
    by_source: HashMap<(usize, StateId), Vec<(StateId, u64)>>,
}

impl<'a> ProductSearch<'a> {
    fn new(ara: &'a Ara, nfa: &Nfa) -> Self {
        let mut nfa_adj = vec![Vec::new(); nfa.num_states()];
        for (p, sym, q) in nfa.transitions() {
            if let Symbol::Var(v) = sym {
                nfa_adj[*p].push((v.clone(), *q));
            }
        }
        ProductSearch {
            ara,
            nfa_states: nfa.num_states(),
            nfa_adj,
            trees: HashMap::new(),
            summaries: HashMap::new(),
            by_source: HashMap::new(),
        }
    }

    fn summary(&self, i: usize, s: StateId, t: StateId) -> Option<u64> {
        self.summaries.get(&(i, s, t)).map(|(len, _)| *len)
    }

    /// Computes the summary of component `i` from NFA state `s`, and
    /// recursively those of the callees it meets, unless already known.
    fn ensure(&mut self, i: usize, s: StateId) {
        if self.by_source.contains_key(&(i, s)) {
            return;
        }
        let ara = self.ara;
        let comp = &ara.components[i].nfa;
        let adj = comp.adjacency();
        let width = self.nfa_states;
        let mut tree = SearchTree::default();
        let mut heap = BinaryHeap::new();
        let mut seq = 0u64;
        for &p in comp.initial() {
            let node = p * width + s;
            tree.nodes.insert(node, (0, Pred::Start, None));
            heap.push(Reverse((0u64, seq, node)));
            seq += 1;
        }
        let mut settled = HashSet::new();
        while let Some(Reverse((d, _, node))) = heap.pop() {
            if !settled.insert(node) {
                continue;
            }
            let (p, t) = (node / width, node % width);
            for (sym, q) in &adj[p] {
                let mut relax = |next: usize, nd: u64, pred: Pred, letter: Option<Var>| {
                    if tree.nodes.get(&next).is_none_or(|(old, _, _)| nd < *old) {
                        tree.nodes.insert(next, (nd, pred, letter));
                        heap.push(Reverse((nd, seq, next)));
                        seq += 1;
                    }
                };
                match sym {
                    Symbol::Var(x) => {
                        for (y, t2) in &self.nfa_adj[t] {
                            if x == y {
                                relax(q * width + t2, d + 1, Pred::Base(node), Some(x.clone()));
                            }
                        }
                    }
                    Symbol::Call(j) => {
                        self.ensure(*j, t);
                        for &(t2, len) in &self.by_source[&(*j, t)] {
                            let pred = Pred::Call {
                                from: node,
                                callee: *j,
                                s: t,
                                t: t2,
                            };
                            relax(q * width + t2, d.saturating_add(len), pred, None);
                        }
                    }
                }
            }
        }
        let mut reached = Vec::new();
        for t in 0..width {
            let best = comp
                .finals()
                .iter()
                .filter_map(|&f| tree.nodes.get(&(f * width + t)).map(|(d, _, _)| (*d, f)))
                .min();
            if let Some((len, f)) = best {
                self.summaries.insert((i, s, t), (len, f));
                reached.push((t, len));
            }
        }
        self.by_source.insert((i, s), reached);
        self.trees.insert((i, s), tree);
    }

    fn witness(&self, i: usize, s: StateId, t: StateId, out: &mut Vec<Var>) {
        let (_, f) = self.summaries[&(i, s, t)];
        let tree = &self.trees[&(i, s)];
        let width = self.nfa_states;
        // walk back to the start, then replay forwards
        let mut steps = Vec::new();
        let mut node = f * width + t;
        loop {
            let (_, pred, letter) = &tree.nodes[&node];
            match *pred {
                Pred::Start => break,
                Pred::Base(prev) => {
                    steps.push(Step::Letter(letter.clone().expect("letter recorded")));
                    node = prev;
                }
                Pred::Call { from, callee, s, t } => {
                    steps.push(Step::Call(callee, s, t));
                    node = from;
                }
            }
        }
        for step in steps.into_iter().rev() {
            match step {
                Step::Letter(v) => out.push(v),
                Step::Call(j, s, t) => self.witness(j, s, t, out),
            }
        }
    }
}

enum Step {
    Letter(Var),
    Call(usize, StateId, StateId),
}

/// `A₁ … Aₙ` with three states each: `A₁` reads `a·a`, `Aᵢ` calls `Aᵢ₋₁`
/// twice. The root `Aₙ` accepts exactly `a^(2^n)`.
///
/// # Panics
/// If `n == 0`.
pub fn power_family(n: usize) -> Ara {
    assert!(n >= 1, "power_family needs n >= 1");
    let a = Var::new("a").expect("valid name");
    let mut builder = AraBuilder::new();
    builder.extend_alphabet([a.clone()]);
    for i in 1..=n {
        let sym = if i == 1 {
            Symbol::Var(a.clone())
        } else {
            Symbol::Call(i - 2)
        };
        let mut nfa = Nfa::new(3);
        nfa.add_transition(0, sym.clone(), 1);
        nfa.add_transition(1, sym, 2);
        nfa.add_initial(0);
        nfa.add_final(2);
        builder.push(format!("A{i}"), nfa);
    }
    builder.finish(n - 1)
}
