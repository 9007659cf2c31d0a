//! The behaviour of the derivation automaton and entailment checking.
//!
//! [`saturate`] iterates
//! `wt₀(q) = f(q)`,
//! `wt_{i+1}(q) = wt_i(q) ∪ ⋃_{(q,q₁…q₅)} wt_i(q₁)·…·wt_i(q₅)`
//! over canonical monomial sets until nothing changes. [`build_ara_stack`]
//! represents the same iterates without canonicalizing: component `A_i^q`
//! accepts `wt_i(q)` by calling the components of level `i - 1`.
//! [`entails`] decides a query either by looking the monomial up in the
//! fixpoint or by intersecting the behaviour ARA with ordered languages.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt::Write as _;
use std::rc::Rc;
use std::sync::Arc;

use rustc_hash::{FxHashMap, FxHashSet};
use serde::{Deserialize, Serialize};
use smallvec::{smallvec, SmallVec};
use thiserror::Error;

use crate::ara::{Ara, AraBuilder, AraError};
use crate::nfa::{ordered_language_nfa, ordered_prefix_nfa, Nfa, Symbol};
use crate::semiring::{canonicalize, lang_concat, FiniteLanguage, MonomialSet, SemiringMode, Word};
use crate::syntax::{AnnotatedTBox, Axiom, Var};
use crate::wta::{exit_weight, live_transitions_for_head, Ranges, WtaState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Engine {
    /// Look the monomial up in the saturated table.
    Saturation,
    /// Intersect the behaviour ARA with ordered languages.
    #[default]
    Ara,
}

impl Engine {
    pub fn name(self) -> &'static str {
        match self {
            Engine::Saturation => "saturation",
            Engine::Ara => "ara",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct EngineConfig {
    pub mode: SemiringMode,
    pub engine: Engine,
    /// Stop saturating after this many iterations; the result is then
    /// truncated and entailment refuses to answer.
    pub max_iterations: Option<usize>,
    /// Abort when a single monomial set grows beyond this size.
    pub set_budget: Option<usize>,
}

impl EngineConfig {
    pub fn new(mode: SemiringMode, engine: Engine) -> Self {
        EngineConfig {
            mode,
            engine,
            max_iterations: None,
            set_budget: None,
        }
    }
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig::new(SemiringMode::TrioCommutative, Engine::Ara)
    }
}

#[derive(Debug, Error)]
pub enum BehaviourError {
    #[error("saturation did not stabilize within {cap} iterations; raise the iteration cap")]
    Truncated { cap: usize },
    #[error("the monomial set of `{state}` reached {size} elements, over the budget of {budget}")]
    Budget {
        state: String,
        size: usize,
        budget: usize,
    },
    #[error("`{0}` is not a queryable goal (expected `A <= B` or `A <= ex R`)")]
    NotQueryable(Axiom),
    #[error(transparent)]
    Ara(#[from] AraError),
}

/// The states relevant to a set of seed states, with the transitions
/// between them that can carry a non-empty weight.
#[derive(Debug)]
struct Universe {
    states: Vec<WtaState>,
    index: HashMap<WtaState, usize>,
    /// per state, the non-`□` children of each transition it heads
    rules: Vec<Vec<Vec<usize>>>,
    exits: Vec<FiniteLanguage>,
}

impl Universe {
    /// Closes `seeds` under transitions, drops transitions with a child whose
    /// behaviour is empty, then keeps the seeds and whatever they still reach.
    fn build(tbox: &AnnotatedTBox, seeds: impl IntoIterator<Item = WtaState>) -> Universe {
        let seeds: BTreeSet<WtaState> = seeds.into_iter().collect();
        let mut states: Vec<WtaState> = Vec::new();
        let mut index: HashMap<WtaState, usize> = HashMap::new();
        let mut rules: Vec<Vec<Vec<usize>>> = Vec::new();
        let mut queue = VecDeque::new();
        let mut intern = |q: WtaState, states: &mut Vec<WtaState>, queue: &mut VecDeque<usize>| {
            *index.entry(q.clone()).or_insert_with(|| {
                states.push(q);
                queue.push_back(states.len() - 1);
                states.len() - 1
            })
        };
        for q in &seeds {
            intern(q.clone(), &mut states, &mut queue);
        }
        while let Some(i) = queue.pop_front() {
            let mut mine = Vec::new();
            for t in live_transitions_for_head(&states[i], tbox) {
                let children = t
                    .children
                    .into_iter()
                    .filter(|c| *c != WtaState::Pad)
                    .map(|c| intern(c, &mut states, &mut queue))
                    .collect();
                mine.push(children);
            }
            if rules.len() <= i {
                rules.resize_with(i + 1, Vec::new);
            }
            rules[i] = mine;
        }
        rules.resize_with(states.len(), Vec::new);
        let exits: Vec<FiniteLanguage> = states.iter().map(|q| exit_weight(q, tbox)).collect();

        let mut alive: Vec<bool> = exits.iter().map(|e| !e.is_empty()).collect();
        loop {
            let mut changed = false;
            for i in 0..states.len() {
                if !alive[i] && rules[i].iter().any(|r| r.iter().all(|&c| alive[c])) {
                    alive[i] = true;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        for r in rules.iter_mut() {
            r.retain(|children| children.iter().all(|&c| alive[c]));
        }

        let mut keep: BTreeSet<usize> = seeds.iter().map(|q| index[q]).collect();
        let mut stack: Vec<usize> = keep.iter().copied().collect();
        while let Some(i) = stack.pop() {
            for r in &rules[i] {
                for &c in r {
                    if keep.insert(c) {
                        stack.push(c);
                    }
                }
            }
        }
        let mut order: Vec<usize> = keep.into_iter().collect();
        order.sort_by(|&a, &b| states[a].cmp(&states[b]));
        let renumber: HashMap<usize, usize> = order
            .iter()
            .enumerate()
            .map(|(new, &old)| (old, new))
            .collect();
        let new_states: Vec<WtaState> = order.iter().map(|&i| states[i].clone()).collect();
        Universe {
            index: new_states
                .iter()
                .cloned()
                .enumerate()
                .map(|(i, q)| (q, i))
                .collect(),
            rules: order
                .iter()
                .map(|&i| {
                    let mut rs: Vec<Vec<usize>> = rules[i]
                        .iter()
                        .map(|r| r.iter().map(|c| renumber[c]).collect())
                        .collect();
                    rs.sort();
                    rs.dedup();
                    rs
                })
                .collect(),
            exits: order.iter().map(|&i| exits[i].clone()).collect(),
            states: new_states,
        }
    }

    /// All head states over the signature, the TBox axioms and `□`.
    fn full(tbox: &AnnotatedTBox) -> Universe {
        let ranges = Ranges::of(tbox);
        let mut seeds = vec![WtaState::Pad];
        for a in &ranges.concepts {
            for b in &ranges.concepts {
                seeds.push(Axiom::atomic(a.clone(), b.clone()).into());
            }
            for r in &ranges.roles {
                seeds.push(Axiom::exist(a.clone(), r.clone()).into());
                seeds.push(Axiom::range(r.clone(), a.clone()).into());
            }
        }
        for r in &ranges.roles {
            for s in &ranges.roles {
                seeds.push(Axiom::role_incl(r.clone(), s.clone()).into());
            }
        }
        seeds.extend(tbox.axioms().cloned().map(WtaState::from));
        Universe::build(tbox, seeds)
    }

    fn goal(tbox: &AnnotatedTBox, goal: &WtaState) -> Universe {
        Universe::build(tbox, [goal.clone()])
    }
}

/// A weight domain for the fixpoint iteration.
trait Domain {
    type W: Clone;
    fn exit(&self, l: &FiniteLanguage) -> Self::W;
    fn is_zero(w: &Self::W) -> bool;
    fn mul(&self, a: &Self::W, b: &Self::W) -> Self::W;
    /// `into ∪= w`, returning whether `into` grew.
    fn absorb(&self, into: &mut Self::W, w: &Self::W) -> bool;
    fn minus(&self, a: &Self::W, b: &Self::W) -> Self::W;
    fn size(w: &Self::W) -> usize;
}

/// A canonical monomial over interned variables: a bitset in trio mode,
/// the first occurrences in order in left-absorbing mode.
type Code = SmallVec<[u16; 8]>;
const BITS: u16 = 16;

#[derive(Debug, Clone, Default, PartialEq, Eq)]
struct CodeSet(FxHashSet<Code>);

/// Canonical monomial sets, with variables interned as indices in sorted
/// order so that ascending indices give sorted names.
#[derive(Debug)]
struct Canonical {
    mode: SemiringMode,
    vars: Vec<Var>,
    index: HashMap<Var, u16>,
    blocks: usize,
}

impl Canonical {
    fn new(mode: SemiringMode, tbox: &AnnotatedTBox) -> Self {
        let vars: Vec<Var> = tbox.signature().vars.iter().cloned().collect();
        assert!(
            vars.len() <= usize::from(u16::MAX),
            "at most 65535 distinct variables"
        );
        let index = vars
            .iter()
            .enumerate()
            .map(|(i, v)| (v.clone(), i as u16))
            .collect();
        let blocks = vars.len().div_ceil(usize::from(BITS));
        Canonical {
            mode,
            vars,
            index,
            blocks,
        }
    }

    fn unit(&self) -> Code {
        match self.mode {
            SemiringMode::TrioCommutative => smallvec![0; self.blocks],
            SemiringMode::LeftAbsorbing => Code::new(),
        }
    }

    /// `[w]`, or `None` if `w` uses a variable outside the TBox.
    fn encode(&self, w: &Word) -> Option<Code> {
        let mut out = self.unit();
        for v in w.symbols() {
            let i = *self.index.get(v)?;
            match self.mode {
                SemiringMode::TrioCommutative => out[usize::from(i / BITS)] |= 1 << (i % BITS),
                SemiringMode::LeftAbsorbing if !out.contains(&i) => out.push(i),
                SemiringMode::LeftAbsorbing => {}
            }
        }
        Some(out)
    }

    fn decode(&self, c: &Code) -> Word {
        let var = |i: u16| self.vars[usize::from(i)].clone();
        match self.mode {
            SemiringMode::TrioCommutative => Word(
                c.iter()
                    .enumerate()
                    .flat_map(|(b, &bits)| {
                        (0..BITS)
                            .filter(move |k| bits >> k & 1 == 1)
                            .map(move |k| b as u16 * BITS + k)
                    })
                    .map(var)
                    .collect(),
            ),
            SemiringMode::LeftAbsorbing => Word(c.iter().map(|&i| var(i)).collect()),
        }
    }

    fn to_set(&self, cs: &CodeSet) -> MonomialSet {
        let mut out = MonomialSet::empty(self.mode);
        for c in &cs.0 {
            out.insert_word(self.decode(c));
        }
        out
    }

    /// The symbols of a left-absorbing code, as a bitset.
    fn symbol_set(&self, c: &Code) -> Code {
        let mut out: Code = smallvec![0; self.blocks];
        for &i in c {
            out[usize::from(i / BITS)] |= 1 << (i % BITS);
        }
        out
    }

    fn combine(&self, a: &Code, b: &Code) -> Code {
        match self.mode {
            SemiringMode::TrioCommutative => a.iter().zip(b).map(|(x, y)| x | y).collect(),
            SemiringMode::LeftAbsorbing => {
                let mut out = a.clone();
                out.extend(b.iter().copied().filter(|x| !a.contains(x)));
                out
            }
        }
    }
}

impl Domain for Canonical {
    type W = CodeSet;

    fn exit(&self, l: &FiniteLanguage) -> CodeSet {
        CodeSet(
            l.iter()
                .map(|w| self.encode(w).expect("exit weights use TBox variables"))
                .collect(),
        )
    }

    fn is_zero(w: &CodeSet) -> bool {
        w.0.is_empty()
    }

    fn mul(&self, a: &CodeSet, b: &CodeSet) -> CodeSet {
        let unit = self.unit();
        if a.0.len() == 1 && a.0.contains(&unit) {
            return b.clone();
        }
        let mut out =
            FxHashSet::with_capacity_and_hasher(a.0.len().max(b.0.len()), Default::default());
        match self.mode {
            SemiringMode::TrioCommutative => {
                for x in &a.0 {
                    for y in &b.0 {
                        out.insert(self.combine(x, y));
                    }
                }
            }
            SemiringMode::LeftAbsorbing => {
                // x·y only depends on y minus the symbols of x, so the right
                // factor is reduced once per symbol set of the left one
                let mut groups: FxHashMap<Code, Vec<&Code>> = FxHashMap::default();
                for x in &a.0 {
                    groups.entry(self.symbol_set(x)).or_default().push(x);
                }
                let mut memo = FxHashMap::default();
                for (set, xs) in groups {
                    let rest = reduced(&mut memo, b, &set);
                    for x in xs {
                        for y in rest.iter() {
                            let mut c = x.clone();
                            c.extend_from_slice(y);
                            out.insert(c);
                        }
                    }
                }
            }
        }
        CodeSet(out)
    }

    fn absorb(&self, into: &mut CodeSet, w: &CodeSet) -> bool {
        let before = into.0.len();
        into.0.extend(w.0.iter().cloned());
        into.0.len() != before
    }

    fn minus(&self, a: &CodeSet, b: &CodeSet) -> CodeSet {
        CodeSet(a.0.difference(&b.0).cloned().collect())
    }

    fn size(w: &CodeSet) -> usize {
        w.0.len()
    }
}

/// Plain languages, for comparison with run enumeration.
struct Raw;

/// `{y minus the symbols in set : y in b}`, built from the set without its
/// highest symbol.
fn reduced(
    memo: &mut FxHashMap<Code, Rc<FxHashSet<Code>>>,
    b: &CodeSet,
    set: &Code,
) -> Rc<FxHashSet<Code>> {
    if let Some(hit) = memo.get(set) {
        return hit.clone();
    }
    let result = match set.iter().rposition(|&block| block != 0) {
        None => Rc::new(b.0.clone()),
        Some(k) => {
            let bit = BITS - 1 - set[k].leading_zeros() as u16;
            let mut parent = set.clone();
            parent[k] &= !(1 << bit);
            let drop = k as u16 * BITS + bit;
            let p = reduced(memo, b, &parent);
            Rc::new(
                p.iter()
                    .map(|y| y.iter().copied().filter(|&i| i != drop).collect())
                    .collect(),
            )
        }
    };
    memo.insert(set.clone(), result.clone());
    result
}

impl Domain for Raw {
    type W = FiniteLanguage;

    fn exit(&self, l: &FiniteLanguage) -> FiniteLanguage {
        l.clone()
    }

    fn is_zero(w: &FiniteLanguage) -> bool {
        w.is_empty()
    }

    fn mul(&self, a: &FiniteLanguage, b: &FiniteLanguage) -> FiniteLanguage {
        lang_concat(a, b)
    }

    fn absorb(&self, into: &mut FiniteLanguage, w: &FiniteLanguage) -> bool {
        let before = into.len();
        into.0.extend(w.iter().cloned());
        into.len() != before
    }

    fn minus(&self, a: &FiniteLanguage, b: &FiniteLanguage) -> FiniteLanguage {
        FiniteLanguage(a.0.difference(&b.0).cloned().collect())
    }

    fn size(w: &FiniteLanguage) -> usize {
        w.len()
    }
}

struct Rows<W> {
    rows: Vec<Vec<Arc<W>>>,
    stable: bool,
}

/// Semi-naive: with `Δ_i = wt_i \ wt_{i-1}` (and `wt_{-1} = ∅`), the
/// products over `wt_i` not already absorbed into `wt_i` are covered by
/// `wt_{i-1}(q₁)…wt_{i-1}(q_{j-1}) · Δ_i(q_j) · wt_i(q_{j+1})…wt_i(q_k)`.
fn iterate<D: Domain>(
    u: &Universe,
    d: &D,
    cap: Option<usize>,
    budget: Option<usize>,
) -> Result<Rows<D::W>, BehaviourError> {
    let first: Vec<Arc<D::W>> = u.exits.iter().map(|e| Arc::new(d.exit(e))).collect();
    let mut delta: Vec<Option<D::W>> = first
        .iter()
        .map(|w| (!D::is_zero(w)).then(|| (**w).clone()))
        .collect();
    let mut rows = vec![first];
    loop {
        if cap.is_some_and(|c| rows.len() > c) {
            return Ok(Rows {
                rows,
                stable: false,
            });
        }
        let cur = &rows[rows.len() - 1];
        let old = (rows.len() > 1).then(|| &rows[rows.len() - 2]);
        let mut next = Vec::with_capacity(cur.len());
        let mut next_delta = Vec::with_capacity(cur.len());
        for (q, rules) in u.rules.iter().enumerate() {
            let mut cell: Option<D::W> = None;
            let mut grew = false;
            for rule in rules {
                for (j, &cj) in rule.iter().enumerate() {
                    let Some(dj) = &delta[cj] else { continue };
                    let mut factors: SmallVec<[&D::W; 5]> = SmallVec::new();
                    for (l, &c) in rule.iter().enumerate() {
                        factors.push(match l.cmp(&j) {
                            std::cmp::Ordering::Less => match old {
                                Some(o) => &o[c],
                                None => break,
                            },
                            std::cmp::Ordering::Equal => dj,
                            std::cmp::Ordering::Greater => &cur[c],
                        });
                    }
                    if factors.len() < rule.len() || factors.iter().any(|f| D::is_zero(f)) {
                        continue;
                    }
                    // products of non-empty sets are non-empty
                    let mut prod: Option<D::W> = None;
                    for f in &factors[1..] {
                        prod = Some(d.mul(prod.as_ref().unwrap_or(factors[0]), f));
                    }
                    let prod = prod.unwrap_or_else(|| factors[0].clone());
                    let target = cell.get_or_insert_with(|| (*cur[q]).clone());
                    grew |= d.absorb(target, &prod);
                }
            }
            match cell {
                Some(w) if grew => {
                    if let Some(b) = budget {
                        if D::size(&w) > b {
                            return Err(BehaviourError::Budget {
                                state: u.states[q].to_string(),
                                size: D::size(&w),
                                budget: b,
                            });
                        }
                    }
                    next_delta.push(Some(d.minus(&w, &cur[q])));
                    next.push(Arc::new(w));
                }
                _ => {
                    next_delta.push(None);
                    next.push(cur[q].clone());
                }
            }
        }
        let changed = next_delta.iter().any(Option::is_some);
        delta = next_delta;
        rows.push(next);
        if !changed {
            return Ok(Rows { rows, stable: true });
        }
    }
}

/// Canonical monomial sets per state and iteration.
///
/// Row `i` holds `wt_i`. Unless truncated, the last two rows are equal and
/// [`BehaviourTable::iterations`] is the index of the first repeated row.
#[derive(Debug, Clone)]
pub struct BehaviourTable {
    canon: Arc<Canonical>,
    states: Vec<WtaState>,
    index: HashMap<WtaState, usize>,
    rows: Vec<Vec<Arc<CodeSet>>>,
    tbox_order: Vec<Axiom>,
    truncated: bool,
}

impl BehaviourTable {
    fn from_rows(
        u: &Universe,
        tbox: &AnnotatedTBox,
        canon: Canonical,
        rows: Rows<CodeSet>,
    ) -> Self {
        BehaviourTable {
            canon: Arc::new(canon),
            states: u.states.clone(),
            index: u.index.clone(),
            rows: rows.rows,
            tbox_order: tbox.axioms().cloned().collect(),
            truncated: !rows.stable,
        }
    }

    pub fn mode(&self) -> SemiringMode {
        self.canon.mode
    }

    /// Number of iterations computed after `wt₀`.
    pub fn iterations(&self) -> usize {
        self.rows.len() - 1
    }

    /// The stabilization index `n`: the least `n` with `wt_{n+1} = wt_n`, or
    /// the last computed row when truncated.
    pub fn height(&self) -> usize {
        if self.truncated {
            self.rows.len() - 1
        } else {
            self.rows.len() - 2
        }
    }

    pub fn is_truncated(&self) -> bool {
        self.truncated
    }

    pub fn states(&self) -> &[WtaState] {
        &self.states
    }

    fn cell(&self, i: usize, q: &WtaState) -> Option<&CodeSet> {
        let idx = *self.index.get(q)?;
        if i < self.rows.len() {
            Some(&self.rows[i][idx])
        } else if !self.truncated {
            Some(&self.rows[self.rows.len() - 1][idx])
        } else {
            None
        }
    }

    /// `wt_i(q)`; rows past the fixpoint repeat it. `None` for unknown
    /// states and for rows past a truncation.
    pub fn get(&self, i: usize, q: &WtaState) -> Option<MonomialSet> {
        self.cell(i, q).map(|c| self.canon.to_set(c))
    }

    /// The last computed row.
    pub fn fixpoint(&self, q: &WtaState) -> Option<MonomialSet> {
        self.get(self.rows.len() - 1, q)
    }

    /// Size of `wt_i(q)`.
    pub fn len_at(&self, i: usize, q: &WtaState) -> Option<usize> {
        self.cell(i, q).map(|c| c.0.len())
    }

    /// Whether `[m]` is in the last computed row of `q`.
    pub fn contains(&self, q: &WtaState, m: &Word) -> bool {
        let Some(code) = self.canon.encode(m) else {
            return false;
        };
        self.cell(self.rows.len() - 1, q)
            .is_some_and(|c| c.0.contains(&code))
    }

    /// Tab-separated: one row per iteration, one column per state. Columns
    /// are `□`, the TBox axioms in order, then every other state whose final
    /// set is non-empty.
    pub fn to_tsv(&self) -> String {
        let mut columns: Vec<usize> = Vec::new();
        let push = |q: &WtaState, columns: &mut Vec<usize>| {
            if let Some(&i) = self.index.get(q) {
                if !columns.contains(&i) {
                    columns.push(i);
                }
            }
        };
        push(&WtaState::Pad, &mut columns);
        for a in &self.tbox_order {
            push(&WtaState::Axiom(a.clone()), &mut columns);
        }
        let last = &self.rows[self.rows.len() - 1];
        for (i, q) in self.states.iter().enumerate() {
            if !last[i].0.is_empty() {
                push(q, &mut columns);
            }
        }
        let mut out = String::from("iteration");
        for &c in &columns {
            write!(out, "\t{}", self.states[c]).unwrap();
        }
        out.push('\n');
        for (i, row) in self.rows.iter().enumerate() {
            write!(out, "{i}").unwrap();
            for &c in &columns {
                write!(out, "\t{}", self.canon.to_set(&row[c])).unwrap();
            }
            out.push('\n');
        }
        out
    }
}

/// Saturates every head state over the signature of `tbox`, plus the TBox
/// axioms and `□`.
pub fn saturate(tbox: &AnnotatedTBox, mode: SemiringMode, cap: Option<usize>) -> BehaviourTable {
    let u = Universe::full(tbox);
    let canon = Canonical::new(mode, tbox);
    let rows = iterate(&u, &canon, cap, None).expect("no budget, no error");
    BehaviourTable::from_rows(&u, tbox, canon, rows)
}

/// Saturates only the states the goal depends on.
pub fn saturate_goal(
    tbox: &AnnotatedTBox,
    goal: &WtaState,
    config: &EngineConfig,
) -> Result<BehaviourTable, BehaviourError> {
    let u = Universe::goal(tbox, goal);
    goal_table(&u, tbox, config)
}

fn goal_table(
    u: &Universe,
    tbox: &AnnotatedTBox,
    config: &EngineConfig,
) -> Result<BehaviourTable, BehaviourError> {
    let canon = Canonical::new(config.mode, tbox);
    let rows = iterate(u, &canon, config.max_iterations, config.set_budget)?;
    Ok(BehaviourTable::from_rows(u, tbox, canon, rows))
}

/// `wt_depth(goal)` as a language, without canonicalization.
pub fn run_language(tbox: &AnnotatedTBox, goal: &WtaState, depth: usize) -> FiniteLanguage {
    let u = Universe::goal(tbox, goal);
    let rows = iterate(&u, &Raw, Some(depth), None).expect("no budget, no error");
    let row = &rows.rows[depth.min(rows.rows.len() - 1)];
    (*row[u.index[goal]]).clone()
}

/// The stack `A_0^q … A_iterations^q` for the states the goal depends on,
/// rooted at `A_iterations^goal`.
///
/// `A_0^q` reads the exit weight of `q`. `A_{i+1}^q` has an initial and a
/// final state joined by a call to `A_i^q` and, per transition headed by
/// `q`, by a chain of calls to `A_i` of its children. A state heading no
/// transition has the same language at every level, so its callers use
/// `A_0` directly.
pub fn build_ara_stack(tbox: &AnnotatedTBox, goal: &WtaState, iterations: usize) -> Ara {
    let u = Universe::goal(tbox, goal);
    stack(&u, tbox, goal, iterations)
}

fn stack(u: &Universe, tbox: &AnnotatedTBox, goal: &WtaState, n: usize) -> Ara {
    let g = u.index[goal];
    let mut dist = vec![usize::MAX; u.states.len()];
    dist[g] = 0;
    let mut queue = VecDeque::from([g]);
    while let Some(q) = queue.pop_front() {
        for rule in &u.rules[q] {
            for &c in rule {
                if dist[c] == usize::MAX {
                    dist[c] = dist[q] + 1;
                    queue.push_back(c);
                }
            }
        }
    }

    let mut builder = AraBuilder::new();
    builder.extend_alphabet(tbox.signature().vars.iter().cloned());
    let mut comp: HashMap<(usize, usize), usize> = HashMap::new();
    for (q, exit) in u.exits.iter().enumerate() {
        if dist[q] == usize::MAX {
            continue;
        }
        let mut nfa = Nfa::new(2);
        nfa.add_initial(0);
        for w in exit.iter() {
            match w.symbols() {
                [] => nfa.add_final(0),
                [v] => {
                    nfa.add_transition(0, Symbol::Var(v.clone()), 1);
                    nfa.add_final(1);
                }
                _ => unreachable!("exit weights are letters or ε"),
            }
        }
        comp.insert((0, q), builder.push(format!("A0[{}]", u.states[q]), nfa));
    }
    for i in 1..=n {
        let below = |q: usize, comp: &HashMap<(usize, usize), usize>| {
            comp.get(&(i - 1, q))
                .copied()
                .unwrap_or_else(|| comp[&(0, q)])
        };
        for (q, &dq) in dist.iter().enumerate() {
            let wanted = q == g || (!u.rules[q].is_empty() && dq <= n - i);
            if !wanted {
                continue;
            }
            let mut nfa = Nfa::new(2);
            nfa.add_initial(0);
            nfa.add_final(1);
            nfa.add_transition(0, Symbol::Call(below(q, &comp)), 1);
            for rule in &u.rules[q] {
                let mut from = 0;
                for (k, &c) in rule.iter().enumerate() {
                    let to = if k + 1 == rule.len() {
                        1
                    } else {
                        nfa.add_state()
                    };
                    nfa.add_transition(from, Symbol::Call(below(c, &comp)), to);
                    from = to;
                }
            }
            comp.insert((i, q), builder.push(format!("A{i}[{}]", u.states[q]), nfa));
        }
    }
    let root = comp[&(n, g)];
    builder.finish(root)
}

/// The ARA at the stabilization height, whose canonical image is the
/// fixpoint of the goal.
pub fn behaviour_ara(
    tbox: &AnnotatedTBox,
    goal: &WtaState,
    config: &EngineConfig,
) -> Result<Ara, BehaviourError> {
    let mut r = Reasoner::new(tbox);
    r.behaviour_ara(goal, config).map(|a| (*a).clone())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Witness {
    /// First-occurrence order of the symbols.
    pub ordering: Vec<Var>,
    /// A behaviour word with that order.
    pub word: Word,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Entailment {
    pub entailed: bool,
    /// Only produced by [`Engine::Ara`].
    pub witness: Option<Witness>,
    /// Intersections with a complete ordering.
    pub ordering_checks: usize,
    /// Intersections with an ordering prefix, used to prune the search.
    pub prefix_checks: usize,
    /// Saturation iterations behind the answer.
    pub iterations: usize,
    pub engine: Engine,
    pub mode: SemiringMode,
}

/// Decides `tbox ⊨ (goal, m)`.
pub fn entails(
    tbox: &AnnotatedTBox,
    goal: &Axiom,
    m: &Word,
    config: &EngineConfig,
) -> Result<Entailment, BehaviourError> {
    Reasoner::new(tbox).entails(goal, m, config)
}

/// All monomials `m` with `tbox ⊨ (goal, m)`.
pub fn monomials(
    tbox: &AnnotatedTBox,
    goal: &Axiom,
    mode: SemiringMode,
) -> Result<MonomialSet, BehaviourError> {
    Reasoner::new(tbox).monomials(goal, &EngineConfig::new(mode, Engine::Saturation))
}

type TableKey = (usize, SemiringMode, Option<usize>, Option<usize>);

/// Answers many queries over one TBox, caching per-goal work.
pub struct Reasoner<'t> {
    tbox: &'t AnnotatedTBox,
    /// goal to universe id; goals with the same dependencies share one
    universes: HashMap<WtaState, usize>,
    interned: HashMap<Vec<WtaState>, usize>,
    by_id: Vec<Arc<Universe>>,
    tables: HashMap<TableKey, Arc<BehaviourTable>>,
    aras: HashMap<(WtaState, usize), Arc<Ara>>,
}

impl<'t> Reasoner<'t> {
    pub fn new(tbox: &'t AnnotatedTBox) -> Self {
        Reasoner {
            tbox,
            universes: HashMap::new(),
            interned: HashMap::new(),
            by_id: Vec::new(),
            tables: HashMap::new(),
            aras: HashMap::new(),
        }
    }

    pub fn tbox(&self) -> &AnnotatedTBox {
        self.tbox
    }

    fn universe(&mut self, goal: &WtaState) -> (usize, Arc<Universe>) {
        if let Some(&id) = self.universes.get(goal) {
            return (id, self.by_id[id].clone());
        }
        let u = Universe::goal(self.tbox, goal);
        let id = match self.interned.get(&u.states) {
            Some(&id) => id,
            None => {
                self.by_id.push(Arc::new(u));
                let id = self.by_id.len() - 1;
                self.interned.insert(self.by_id[id].states.clone(), id);
                id
            }
        };
        self.universes.insert(goal.clone(), id);
        (id, self.by_id[id].clone())
    }

    /// Saturation restricted to the goal's dependencies.
    pub fn table(
        &mut self,
        goal: &WtaState,
        config: &EngineConfig,
    ) -> Result<Arc<BehaviourTable>, BehaviourError> {
        let (id, u) = self.universe(goal);
        let key = (id, config.mode, config.max_iterations, config.set_budget);
        if let Some(t) = self.tables.get(&key) {
            return Ok(t.clone());
        }
        let table = Arc::new(goal_table(&u, self.tbox, config)?);
        self.tables.insert(key, table.clone());
        Ok(table)
    }

    /// The ARA stack at the height where saturation stabilizes.
    pub fn behaviour_ara(
        &mut self,
        goal: &WtaState,
        config: &EngineConfig,
    ) -> Result<Arc<Ara>, BehaviourError> {
        let table = self.table(goal, config)?;
        if table.is_truncated() {
            return Err(BehaviourError::Truncated {
                cap: table.iterations(),
            });
        }
        Ok(self.stack_at(goal, table.height()))
    }

    fn stack_at(&mut self, goal: &WtaState, height: usize) -> Arc<Ara> {
        if let Some(a) = self.aras.get(&(goal.clone(), height)) {
            return a.clone();
        }
        let (_, u) = self.universe(goal);
        let ara = Arc::new(stack(&u, self.tbox, goal, height));
        self.aras.insert((goal.clone(), height), ara.clone());
        ara
    }

    pub fn monomials(
        &mut self,
        goal: &Axiom,
        config: &EngineConfig,
    ) -> Result<MonomialSet, BehaviourError> {
        if !goal.is_queryable() {
            return Err(BehaviourError::NotQueryable(goal.clone()));
        }
        let state = WtaState::Axiom(goal.clone());
        let table = self.table(&state, config)?;
        if table.is_truncated() {
            return Err(BehaviourError::Truncated {
                cap: table.iterations(),
            });
        }
        Ok(table.fixpoint(&state).expect("goal is in its own table"))
    }

    /// Decides `(goal, m)`.
    ///
    /// A monomial with a symbol that annotates no axiom is rejected at once.
    /// The saturation engine looks `[m]` up in the fixpoint. The ARA engine
    /// asks whether some behaviour word has the symbols of `[m]` with a
    /// given first-occurrence order: in left-absorbing mode that order is
    /// `[m]` itself, in trio mode orderings are tried in lexicographic order
    /// and the first success is the witness. Before extending an ordering
    /// prefix, the search checks that some behaviour word over the symbols
    /// starts with that prefix, which skips hopeless subtrees without
    /// changing which ordering is found first. The unit monomial is decided
    /// by whether `ε` is accepted.
    pub fn entails(
        &mut self,
        goal: &Axiom,
        m: &Word,
        config: &EngineConfig,
    ) -> Result<Entailment, BehaviourError> {
        if !goal.is_queryable() {
            return Err(BehaviourError::NotQueryable(goal.clone()));
        }
        let mode = config.mode;
        let m_hat = canonicalize(m, mode).into_word();
        let mut out = Entailment {
            entailed: false,
            witness: None,
            ordering_checks: 0,
            prefix_checks: 0,
            iterations: 0,
            engine: config.engine,
            mode,
        };
        let vars = &self.tbox.signature().vars;
        if m_hat.symbols().iter().any(|v| !vars.contains(v)) {
            return Ok(out);
        }
        let state = WtaState::Axiom(goal.clone());
        let table = self.table(&state, config)?;
        if table.is_truncated() {
            return Err(BehaviourError::Truncated {
                cap: table.iterations(),
            });
        }
        out.iterations = table.iterations();
        match config.engine {
            Engine::Saturation => {
                out.entailed = table.contains(&state, &m_hat);
            }
            Engine::Ara => {
                let ara = self.stack_at(&state, table.height());
                if m_hat.is_empty() {
                    out.ordering_checks = 1;
                    if ara.membership(&Word::epsilon())? {
                        out.entailed = true;
                        out.witness = Some(Witness {
                            ordering: Vec::new(),
                            word: Word::epsilon(),
                        });
                    }
                    return Ok(out);
                }
                match mode {
                    SemiringMode::LeftAbsorbing => {
                        full_check(&ara, m_hat.symbols(), &mut out)?;
                    }
                    SemiringMode::TrioCommutative => {
                        let mut symbols = m_hat.symbols().to_vec();
                        symbols.sort();
                        let all: BTreeSet<Var> = symbols.iter().cloned().collect();
                        out.prefix_checks += 1;
                        let any = ordered_prefix_nfa(&[], &all).expect("no duplicates");
                        if ara.intersect_empty(&any)?.is_some() {
                            let mut used = vec![false; symbols.len()];
                            extend(&ara, &symbols, &all, &mut Vec::new(), &mut used, &mut out)?;
                        }
                    }
                }
            }
        }
        Ok(out)
    }
}

fn full_check(ara: &Ara, ordering: &[Var], out: &mut Entailment) -> Result<bool, AraError> {
    out.ordering_checks += 1;
    let nfa = ordered_language_nfa(ordering).expect("no duplicates");
    if let Some(word) = ara.intersect_empty(&nfa)? {
        out.entailed = true;
        out.witness = Some(Witness {
            ordering: ordering.to_vec(),
            word,
        });
        return Ok(true);
    }
    Ok(false)
}

fn extend(
    ara: &Ara,
    symbols: &[Var],
    all: &BTreeSet<Var>,
    prefix: &mut Vec<Var>,
    used: &mut [bool],
    out: &mut Entailment,
) -> Result<bool, AraError> {
    if prefix.len() == symbols.len() {
        return full_check(ara, prefix, out);
    }
    for i in 0..symbols.len() {
        if used[i] {
            continue;
        }
        prefix.push(symbols[i].clone());
        used[i] = true;
        // with one symbol left the next step is the full check anyway
        let viable = prefix.len() + 1 >= symbols.len() || {
            out.prefix_checks += 1;
            let nfa = ordered_prefix_nfa(prefix, all).expect("no duplicates");
            ara.intersect_empty(&nfa)?.is_some()
        };
        if viable && extend(ara, symbols, all, prefix, used, out)? {
            return Ok(true);
        }
        prefix.pop();
        used[i] = false;
    }
    Ok(false)
}
