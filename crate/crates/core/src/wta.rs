//! The weighted tree automaton whose runs are derivations of a goal axiom.
//!
//! States are normal-form axioms plus the padding state `□`. Every
//! transition has weight `{ε}` and arity 5; the only real weights are exit
//! weights, i.e. the annotations of TBox axioms. Transitions are the
//! completion rules read backwards, from a consequence to its premises:
//!
//! | # | head | children |
//! |---|------|----------|
//! | 1 | `R₁ ⊑ R₃` | `R₁ ⊑ R₂`, `R₂ ⊑ R₃` |
//! | 2 | `ran(R) ⊑ A` | `R ⊑ S`, `ran(S) ⊑ A` |
//! | 3 | `A ⊑ ∃S` | `A ⊑ ∃R`, `R ⊑ S` |
//! | 4 | `A ⊑ C` | `A ⊑ B`, `B ⊑ C` |
//! | 5 | `A ⊑ ∃R` | `A ⊑ B`, `B ⊑ ∃R` |
//! | 6 | `A ⊑ C` | `A ⊑ B₁`, `A ⊑ B₂`, `B₁ ⊓ B₂ ⊑ C` |
//! | 7 | `ran(R) ⊑ C` | `ran(R) ⊑ B₁`, `ran(R) ⊑ B₂`, `B₁ ⊑ C₁`, `B₂ ⊑ C₂`, `C₁ ⊓ C₂ ⊑ C` |
//! | 8 | `A ⊑ C` | `A ⊓ B ⊑ C` (either conjunct order), `⊤ ⊑ B` |
//! | 9 | `A ⊑ D` | `A ⊑ ∃S`, `ran(S) ⊑ B`, `B ⊑ C`, `S ⊑ R`, `∃R.C ⊑ D` |
//! | 10 | `A ⊑ C` | `A ⊑ ∃R`, `⊤ ⊑ B`, `∃R.B ⊑ C` |
//!
//! Unused child positions hold `□`. Quantified names range over
//! `N_C(T) ∪ {⊤}` and `N_R(T)`.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

use crate::semiring::{lang_concat, lang_union, FiniteLanguage, Word};
use crate::syntax::{AnnotatedTBox, Annotation, Axiom, Concept, RoleName};

/// Default bound on the height explored by [`enumerate_runs`].
pub const DEFAULT_DEPTH_CAP: usize = 6;

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum WtaState {
    /// Padding `□`.
    Pad,
    Axiom(Axiom),
}

impl WtaState {
    pub fn axiom(&self) -> Option<&Axiom> {
        match self {
            WtaState::Pad => None,
            WtaState::Axiom(a) => Some(a),
        }
    }

    /// Only atomic and existential GCIs, role inclusions and range
    /// restrictions head a transition.
    pub fn is_head_shape(&self) -> bool {
        matches!(
            self,
            WtaState::Axiom(
                Axiom::Atomic { .. }
                    | Axiom::Exist { .. }
                    | Axiom::RoleIncl { .. }
                    | Axiom::Range { .. }
            )
        )
    }
}

impl From<Axiom> for WtaState {
    fn from(a: Axiom) -> Self {
        WtaState::Axiom(a)
    }
}

impl fmt::Display for WtaState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WtaState::Pad => f.write_str("□"),
            WtaState::Axiom(a) => write!(f, "{a}"),
        }
    }
}

impl fmt::Debug for WtaState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct WtaTransition {
    pub head: WtaState,
    pub children: [WtaState; 5],
}

impl WtaTransition {
    fn new(head: &Axiom, children: Vec<Axiom>) -> Self {
        debug_assert!(!children.is_empty() && children.len() <= 5);
        let mut padded = children.into_iter().map(WtaState::Axiom);
        let children = std::array::from_fn(|_| padded.next().unwrap_or(WtaState::Pad));
        WtaTransition {
            head: WtaState::Axiom(head.clone()),
            children,
        }
    }
}

/// `head <- c1,c2,c3,c4,c5`
impl fmt::Display for WtaTransition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} <- ", self.head)?;
        for (i, c) in self.children.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for WtaTransition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WtaError {
    #[error("`{0}` never heads a transition")]
    NotAHead(WtaState),
    #[error("run depth {depth} exceeds the cap {cap}")]
    DepthCap { depth: usize, cap: usize },
}

/// The automaton for one goal; all automata over a TBox share everything
/// but the initial state.
#[derive(Debug, Clone)]
pub struct Wta<'t> {
    tbox: &'t AnnotatedTBox,
    initial: WtaState,
}

impl<'t> Wta<'t> {
    pub fn new(tbox: &'t AnnotatedTBox, goal: Axiom) -> Self {
        Wta {
            tbox,
            initial: WtaState::Axiom(goal),
        }
    }

    pub fn initial(&self) -> &WtaState {
        &self.initial
    }

    pub fn tbox(&self) -> &AnnotatedTBox {
        self.tbox
    }

    pub fn exit_weight(&self, q: &WtaState) -> FiniteLanguage {
        exit_weight(q, self.tbox)
    }

    pub fn transitions_for_head(&self, q: &WtaState) -> Result<BTreeSet<WtaTransition>, WtaError> {
        transitions_for_head(q, self.tbox)
    }

    /// Weights of all runs of height ≤ `depth` rooted at the goal.
    pub fn enumerate_runs(&self, depth: usize) -> Result<FiniteLanguage, WtaError> {
        enumerate_runs(&self.initial, depth, self.tbox)
    }
}

/// `{v}` for an axiom annotated `v`, `{ε}` for a `1`-annotated axiom and
/// for `X ⊑ X`, `X ⊑ ⊤` and `□`, `∅` otherwise. A tautology that is also a
/// TBox axiom gets both.
pub fn exit_weight(q: &WtaState, tbox: &AnnotatedTBox) -> FiniteLanguage {
    let axiom = match q {
        WtaState::Pad => return FiniteLanguage::epsilon(),
        WtaState::Axiom(a) => a,
    };
    let mut weight = match tbox.annotation(axiom) {
        Some(Annotation::Var(v)) => FiniteLanguage::single(Word::single(v.clone())),
        Some(Annotation::Unit) => FiniteLanguage::epsilon(),
        None => FiniteLanguage::empty(),
    };
    if axiom.is_concept_tautology() {
        weight.0.insert(Word::epsilon());
    }
    weight
}

pub(crate) struct Ranges {
    pub(crate) concepts: Vec<Concept>,
    pub(crate) roles: Vec<RoleName>,
}

impl Ranges {
    pub(crate) fn of(tbox: &AnnotatedTBox) -> Self {
        let sig = tbox.signature();
        let mut concepts: Vec<Concept> = sig.concepts.iter().cloned().map(Concept::Name).collect();
        concepts.push(Concept::Top);
        Ranges {
            concepts,
            roles: sig.roles.iter().cloned().collect(),
        }
    }
}

fn sub(a: &Concept, b: &Concept) -> Axiom {
    Axiom::atomic(a.clone(), b.clone())
}

fn ex(a: &Concept, r: &RoleName) -> Axiom {
    Axiom::exist(a.clone(), r.clone())
}

fn ri(r: &RoleName, s: &RoleName) -> Axiom {
    Axiom::role_incl(r.clone(), s.clone())
}

fn ran(r: &RoleName, a: &Concept) -> Axiom {
    Axiom::range(r.clone(), a.clone())
}

fn conj(a: &Concept, b: &Concept, c: &Concept) -> Axiom {
    Axiom::conj(a.clone(), b.clone(), c.clone())
}

fn qex(r: &RoleName, b: &Concept, c: &Concept) -> Axiom {
    Axiom::qual_exist(r.clone(), b.clone(), c.clone())
}

/// Every instantiation of the ten schemas with head `q`, including ones
/// whose leaves have empty exit weight.
///
/// The conjunction leaf of schema 8 is matched in both conjunct orders:
/// `A ⊓ B ⊑ C` and `B ⊓ A ⊑ C`. In schemas 6 and 7 both orders already
/// arise from the quantified conjuncts.
pub fn transitions_for_head(
    q: &WtaState,
    tbox: &AnnotatedTBox,
) -> Result<BTreeSet<WtaTransition>, WtaError> {
    let head = match q {
        WtaState::Axiom(a) if q.is_head_shape() => a,
        _ => return Err(WtaError::NotAHead(q.clone())),
    };
    let ranges = Ranges::of(tbox);
    let (cs, rs) = (&ranges.concepts, &ranges.roles);
    let mut out = BTreeSet::new();
    let mut emit = |children: Vec<Axiom>| {
        out.insert(WtaTransition::new(head, children));
    };
    match head {
        Axiom::RoleIncl { sub: r1, sup: r3 } => {
            for r2 in rs {
                emit(vec![ri(r1, r2), ri(r2, r3)]);
            }
        }
        Axiom::Range { role: r, rhs: c } => {
            for s in rs {
                emit(vec![ri(r, s), ran(s, c)]);
            }
            for b1 in cs {
                for b2 in cs {
                    for c1 in cs {
                        for c2 in cs {
                            emit(vec![
                                ran(r, b1),
                                ran(r, b2),
                                sub(b1, c1),
                                sub(b2, c2),
                                conj(c1, c2, c),
                            ]);
                        }
                    }
                }
            }
        }
        Axiom::Exist { lhs: a, role: s } => {
            for r in rs {
                emit(vec![ex(a, r), ri(r, s)]);
            }
            for b in cs {
                emit(vec![sub(a, b), ex(b, s)]);
            }
        }
        Axiom::Atomic { lhs: a, rhs: c } => {
            for b in cs {
                emit(vec![sub(a, b), sub(b, c)]);
            }
            for b1 in cs {
                for b2 in cs {
                    emit(vec![sub(a, b1), sub(a, b2), conj(b1, b2, c)]);
                }
            }
            for b in cs {
                emit(vec![conj(a, b, c), sub(&Concept::Top, b)]);
                emit(vec![conj(b, a, c), sub(&Concept::Top, b)]);
            }
            for s in rs {
                for b in cs {
                    for c_mid in cs {
                        for r in rs {
                            emit(vec![
                                ex(a, s),
                                ran(s, b),
                                sub(b, c_mid),
                                ri(s, r),
                                qex(r, c_mid, c),
                            ]);
                        }
                    }
                }
            }
            for r in rs {
                for b in cs {
                    emit(vec![ex(a, r), sub(&Concept::Top, b), qex(r, b, c)]);
                }
            }
        }
        Axiom::Conj { .. } | Axiom::QualExist { .. } => unreachable!("not a head shape"),
    }
    Ok(out)
}

/// The transitions of [`transitions_for_head`] whose conjunction and
/// qualified-existential leaves are TBox axioms. Those shapes never head a
/// transition, so any other instantiation has weight `∅`. Generated from the
/// TBox axioms directly rather than by filtering.
pub(crate) fn live_transitions_for_head(q: &WtaState, tbox: &AnnotatedTBox) -> Vec<WtaTransition> {
    let head = match q {
        WtaState::Axiom(a) if q.is_head_shape() => a,
        _ => return Vec::new(),
    };
    let ranges = Ranges::of(tbox);
    let (cs, rs) = (&ranges.concepts, &ranges.roles);
    let conjs = || {
        tbox.axioms().filter_map(|a| match a {
            Axiom::Conj { left, right, rhs } => Some((left, right, rhs)),
            _ => None,
        })
    };
    let qexs = || {
        tbox.axioms().filter_map(|a| match a {
            Axiom::QualExist { role, filler, rhs } => Some((role, filler, rhs)),
            _ => None,
        })
    };
    let mut out: Vec<WtaTransition> = Vec::new();
    let mut emit = |children: Vec<Axiom>| {
        let t = WtaTransition::new(head, children);
        if !out.contains(&t) {
            out.push(t);
        }
    };
    match head {
        Axiom::RoleIncl { sub: r1, sup: r3 } => {
            for r2 in rs {
                emit(vec![ri(r1, r2), ri(r2, r3)]);
            }
        }
        Axiom::Range { role: r, rhs: c } => {
            for s in rs {
                emit(vec![ri(r, s), ran(s, c)]);
            }
            for (c1, c2, _) in conjs().filter(|(_, _, rhs)| *rhs == c) {
                for b1 in cs {
                    for b2 in cs {
                        emit(vec![
                            ran(r, b1),
                            ran(r, b2),
                            sub(b1, c1),
                            sub(b2, c2),
                            conj(c1, c2, c),
                        ]);
                    }
                }
            }
        }
        Axiom::Exist { lhs: a, role: s } => {
            for r in rs {
                emit(vec![ex(a, r), ri(r, s)]);
            }
            for b in cs {
                emit(vec![sub(a, b), ex(b, s)]);
            }
        }
        Axiom::Atomic { lhs: a, rhs: c } => {
            for b in cs {
                emit(vec![sub(a, b), sub(b, c)]);
            }
            for (b1, b2, _) in conjs().filter(|(_, _, rhs)| *rhs == c) {
                emit(vec![sub(a, b1), sub(a, b2), conj(b1, b2, c)]);
            }
            for (x, y, _) in conjs().filter(|(_, _, rhs)| *rhs == c) {
                if x == a {
                    emit(vec![conj(a, y, c), sub(&Concept::Top, y)]);
                }
                if y == a {
                    emit(vec![conj(x, a, c), sub(&Concept::Top, x)]);
                }
            }
            for (r, c_mid, _) in qexs().filter(|(_, _, rhs)| *rhs == c) {
                for s in rs {
                    for b in cs {
                        emit(vec![
                            ex(a, s),
                            ran(s, b),
                            sub(b, c_mid),
                            ri(s, r),
                            qex(r, c_mid, c),
                        ]);
                    }
                }
            }
            for (r, b, _) in qexs().filter(|(_, _, rhs)| *rhs == c) {
                emit(vec![ex(a, r), sub(&Concept::Top, b), qex(r, b, c)]);
            }
        }
        Axiom::Conj { .. } | Axiom::QualExist { .. } => unreachable!("not a head shape"),
    }
    out
}

/// Weights of all runs of height ≤ `depth` with root `goal`, by plain
/// recursive expansion: a state contributes its exit weight, and each
/// transition the left-to-right concatenation of its children's weights at
/// `depth - 1`. Exponential; meant as a reference for small inputs.
pub fn enumerate_runs(
    goal: &WtaState,
    depth: usize,
    tbox: &AnnotatedTBox,
) -> Result<FiniteLanguage, WtaError> {
    enumerate_runs_capped(goal, depth, tbox, DEFAULT_DEPTH_CAP)
}

pub fn enumerate_runs_capped(
    goal: &WtaState,
    depth: usize,
    tbox: &AnnotatedTBox,
    cap: usize,
) -> Result<FiniteLanguage, WtaError> {
    if depth > cap {
        return Err(WtaError::DepthCap { depth, cap });
    }
    let mut memo = HashMap::new();
    Ok(expand(goal, depth, tbox, &mut memo))
}

fn expand(
    q: &WtaState,
    depth: usize,
    tbox: &AnnotatedTBox,
    memo: &mut HashMap<(WtaState, usize), FiniteLanguage>,
) -> FiniteLanguage {
    if let Some(hit) = memo.get(&(q.clone(), depth)) {
        return hit.clone();
    }
    let mut result = exit_weight(q, tbox);
    if depth > 0 && q.is_head_shape() {
        let transitions = transitions_for_head(q, tbox).expect("head shape checked");
        for t in &transitions {
            let mut weight = FiniteLanguage::epsilon();
            for child in &t.children {
                if weight.is_empty() {
                    break;
                }
                let child_weight = expand(child, depth - 1, tbox, memo);
                weight = lang_concat(&weight, &child_weight);
            }
            result = lang_union(&result, &weight);
        }
    }
    memo.insert((q.clone(), depth), result.clone());
    result
}
