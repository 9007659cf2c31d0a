#![allow(dead_code)]

use std::collections::{BTreeSet, HashMap, VecDeque};

use elhr_prov::ara::{Ara, AraBuilder};
use elhr_prov::nfa::{Nfa, Symbol};
use elhr_prov::syntax::RoleName;
use elhr_prov::wta::{exit_weight, transitions_for_head, WtaState};
use elhr_prov::{AnnotatedTBox, Annotation, Axiom, Concept, MonomialSet, SemiringMode, Var, Word};
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::Rng;

pub fn var(s: &str) -> Var {
    Var::new(s).unwrap()
}

/// A TBox with at most `max_axioms` axioms over concept names `A..D`
/// (plus `top`), roles `R, S` and distinct variables `v0, v1, ...`.
pub fn random_tbox(rng: &mut StdRng, max_axioms: usize) -> AnnotatedTBox {
    let names = ["A", "B", "C", "D"];
    let n_concepts = rng.gen_range(1..=names.len());
    let n_roles = rng.gen_range(0..=2);
    let concept = |rng: &mut StdRng| {
        if rng.gen_bool(0.15) {
            Concept::Top
        } else {
            Concept::name(names[rng.gen_range(0..n_concepts)]).unwrap()
        }
    };
    let roles: Vec<RoleName> = ["R", "S"][..n_roles]
        .iter()
        .map(|r| RoleName::new(r).unwrap())
        .collect();
    let target = rng.gen_range(1..=max_axioms);
    let mut axioms: Vec<Axiom> = Vec::new();
    for _ in 0..target * 4 {
        if axioms.len() == target {
            break;
        }
        let shape = if roles.is_empty() {
            rng.gen_range(0..2)
        } else {
            rng.gen_range(0..6)
        };
        let role = |rng: &mut StdRng| roles[rng.gen_range(0..roles.len())].clone();
        let axiom = match shape {
            0 => Axiom::atomic(concept(rng), concept(rng)),
            1 => Axiom::conj(concept(rng), concept(rng), concept(rng)),
            2 => Axiom::exist(concept(rng), role(rng)),
            3 => Axiom::qual_exist(role(rng), concept(rng), concept(rng)),
            4 => Axiom::range(role(rng), concept(rng)),
            _ => Axiom::role_incl(role(rng), role(rng)),
        };
        if !axioms.contains(&axiom) {
            axioms.push(axiom);
        }
    }
    let entries = axioms
        .into_iter()
        .enumerate()
        .map(|(i, a)| (a, Annotation::Var(var(&format!("v{i}")))))
        .collect();
    AnnotatedTBox::new(entries).unwrap()
}

/// Every queryable goal over the signature of `tbox`, with `top`.
pub fn queryable_goals(tbox: &AnnotatedTBox) -> Vec<Axiom> {
    let sig = tbox.signature();
    let mut concepts: Vec<Concept> = sig.concepts.iter().cloned().map(Concept::Name).collect();
    concepts.push(Concept::Top);
    let mut goals = Vec::new();
    for a in &concepts {
        for b in &concepts {
            goals.push(Axiom::atomic(a.clone(), b.clone()));
        }
        for r in &sig.roles {
            goals.push(Axiom::exist(a.clone(), r.clone()));
        }
    }
    goals
}

/// All subsets of `pool`, as sorted words.
pub fn subsets(pool: &[Var]) -> Vec<Word> {
    (0..1u32 << pool.len())
        .map(|mask| {
            Word(
                pool.iter()
                    .enumerate()
                    .filter(|(i, _)| mask >> i & 1 == 1)
                    .map(|(_, v)| v.clone())
                    .collect(),
            )
        })
        .collect()
}

/// All sequences of distinct elements of `pool`, including the empty one.
pub fn arrangements(pool: &[Var]) -> Vec<Word> {
    let mut out = vec![Word::epsilon()];
    let mut frontier = vec![Vec::<Var>::new()];
    for _ in 0..pool.len() {
        let mut next = Vec::new();
        for seq in &frontier {
            for v in pool {
                if !seq.contains(v) {
                    let mut s = seq.clone();
                    s.push(v.clone());
                    out.push(Word(s.clone()));
                    next.push(s);
                }
            }
        }
        frontier = next;
    }
    out
}

/// Up to four TBox variables, chosen at random.
pub fn variable_pool(rng: &mut StdRng, tbox: &AnnotatedTBox) -> Vec<Var> {
    let mut vars: Vec<Var> = tbox.signature().vars.iter().cloned().collect();
    vars.shuffle(rng);
    vars.truncate(4);
    vars.sort();
    vars
}

/// Words over `alphabet` of length at most `max_len`, shortest first.
pub fn all_words(alphabet: &[Var], max_len: usize) -> Vec<Word> {
    let mut out = vec![Word::epsilon()];
    let mut start = 0;
    for _ in 0..max_len {
        let end = out.len();
        for i in start..end {
            for a in alphabet {
                out.push(out[i].concat(&Word::single(a.clone())));
            }
        }
        start = end;
    }
    out
}

/// A random NFA over `alphabet` whose transitions may also call any of
/// the first `callable` components.
pub fn random_component(rng: &mut StdRng, alphabet: &[Var], callable: usize) -> Nfa {
    let n = rng.gen_range(1..=4);
    let mut nfa = Nfa::new(n);
    for _ in 0..rng.gen_range(0..=2 * n + 1) {
        let p = rng.gen_range(0..n);
        let q = rng.gen_range(0..n);
        let sym = if callable > 0 && rng.gen_bool(0.4) {
            Symbol::Call(rng.gen_range(0..callable))
        } else {
            Symbol::Var(alphabet[rng.gen_range(0..alphabet.len())].clone())
        };
        nfa.add_transition(p, sym, q);
    }
    nfa.add_initial(0);
    if rng.gen_bool(0.2) && n > 1 {
        nfa.add_initial(rng.gen_range(1..n));
    }
    for s in 0..n {
        if rng.gen_bool(0.4) {
            nfa.add_final(s);
        }
    }
    if nfa.finals().is_empty() && rng.gen_bool(0.8) {
        nfa.add_final(n - 1);
    }
    nfa
}

/// A well-formed random ARA over `{a, b}` with 1 to 4 components.
pub fn random_ara(rng: &mut StdRng) -> Ara {
    let alphabet = [var("a"), var("b")];
    let k = rng.gen_range(1..=4);
    let mut builder = AraBuilder::new();
    builder.extend_alphabet(alphabet.iter().cloned());
    for i in 0..k {
        builder.push(format!("N{i}"), random_component(rng, &alphabet, i));
    }
    builder.finish(k - 1)
}

/// A random trigger-free NFA over `{a, b}`.
pub fn random_nfa(rng: &mut StdRng) -> Nfa {
    random_component(rng, &[var("a"), var("b")], 0)
}

/// Length of a shortest word accepted by both ε-free NFAs, by breadth-first
/// search over the product.
pub fn shortest_common(x: &Nfa, y: &Nfa) -> Option<usize> {
    let mut seen = BTreeSet::new();
    let mut queue = VecDeque::new();
    for &p in x.initial() {
        for &q in y.initial() {
            if seen.insert((p, q)) {
                queue.push_back((p, q, 0usize));
            }
        }
    }
    while let Some((p, q, d)) = queue.pop_front() {
        if x.finals().contains(&p) && y.finals().contains(&q) {
            return Some(d);
        }
        for (p0, s, p1) in x.transitions() {
            if *p0 != p {
                continue;
            }
            for (q0, t, q1) in y.transitions() {
                if *q0 == q && s == t && seen.insert((*p1, *q1)) {
                    queue.push_back((*p1, *q1, d + 1));
                }
            }
        }
    }
    None
}

/// The first-occurrence order of the symbols of `w`.
pub fn first_occurrences(w: &Word) -> Vec<Var> {
    let mut out: Vec<Var> = Vec::new();
    for v in w.symbols() {
        if !out.contains(v) {
            out.push(v.clone());
        }
    }
    out
}

/// Canonical weights of all runs of height at most `depth` rooted at `q`,
/// by plain recursion over the transitions, canonicalizing at every level.
pub fn run_monomials(
    q: &WtaState,
    depth: usize,
    tbox: &AnnotatedTBox,
    mode: SemiringMode,
) -> MonomialSet {
    fn go(
        q: &WtaState,
        depth: usize,
        tbox: &AnnotatedTBox,
        mode: SemiringMode,
        memo: &mut HashMap<(WtaState, usize), MonomialSet>,
    ) -> MonomialSet {
        if let Some(hit) = memo.get(&(q.clone(), depth)) {
            return hit.clone();
        }
        let mut out = exit_weight(q, tbox).canonical_image(mode);
        if depth > 0 && q.is_head_shape() {
            for t in transitions_for_head(q, tbox).unwrap() {
                let mut weight = MonomialSet::unit(mode);
                for c in &t.children {
                    if weight.is_empty() {
                        break;
                    }
                    weight = weight.product(&go(c, depth - 1, tbox, mode, memo));
                }
                out.union_with(&weight);
            }
        }
        memo.insert((q.clone(), depth), out.clone());
        out
    }
    go(q, depth, tbox, mode, &mut HashMap::new())
}

/// An upper bound on the number of words of `enumerate_runs(q, depth)`: the
/// number of runs, counted without building any language.
pub fn run_count_bound(q: &WtaState, depth: usize, tbox: &AnnotatedTBox) -> u128 {
    fn go(
        q: &WtaState,
        depth: usize,
        tbox: &AnnotatedTBox,
        memo: &mut HashMap<(WtaState, usize), u128>,
    ) -> u128 {
        if let Some(&hit) = memo.get(&(q.clone(), depth)) {
            return hit;
        }
        let mut n = exit_weight(q, tbox).len() as u128;
        if depth > 0 && q.is_head_shape() {
            for t in transitions_for_head(q, tbox).unwrap() {
                let mut p: u128 = 1;
                for c in &t.children {
                    p = p.saturating_mul(go(c, depth - 1, tbox, memo));
                }
                n = n.saturating_add(p);
            }
        }
        memo.insert((q.clone(), depth), n);
        n
    }
    go(q, depth, tbox, &mut HashMap::new())
}

/// `q` and every state reachable from it through transitions.
pub fn reachable_states(q: &WtaState, tbox: &AnnotatedTBox) -> BTreeSet<WtaState> {
    let mut seen = BTreeSet::from([q.clone()]);
    let mut stack = vec![q.clone()];
    while let Some(s) = stack.pop() {
        let Ok(ts) = transitions_for_head(&s, tbox) else {
            continue;
        };
        for t in ts {
            for c in t.children {
                if seen.insert(c.clone()) {
                    stack.push(c);
                }
            }
        }
    }
    seen
}
