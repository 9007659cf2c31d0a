//! Words over provenance variables and their canonical monomials.
//!
//! Two products are supported. In the trio semiring the product is
//! commutative and idempotent, so a monomial is the sorted set of its
//! variables. Under the left-absorbing product only the first occurrence of
//! a variable counts, so a monomial is the duplicate-free sequence of first
//! occurrences.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::syntax::Var;

/// A finite sequence of provenance variables; the empty word is ε.
#[derive(Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Word(pub Vec<Var>);

impl Word {
    pub fn epsilon() -> Self {
        Word(Vec::new())
    }

    pub fn single(v: Var) -> Self {
        Word(vec![v])
    }

    pub fn is_epsilon(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn symbols(&self) -> &[Var] {
        &self.0
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut symbols = Vec::with_capacity(self.len() + other.len());
        symbols.extend_from_slice(&self.0);
        symbols.extend_from_slice(&other.0);
        Word(symbols)
    }

    /// Builds a word from single-letter variable names, e.g. `"xvywu"`.
    /// Convenient in tests.
    pub fn from_letters(letters: &str) -> Word {
        Word(
            letters
                .chars()
                .map(|c| Var::new(&c.to_string()).expect("letter is a valid variable"))
                .collect(),
        )
    }
}

impl From<Vec<Var>> for Word {
    fn from(symbols: Vec<Var>) -> Self {
        Word(symbols)
    }
}

impl FromIterator<Var> for Word {
    fn from_iter<I: IntoIterator<Item = Var>>(iter: I) -> Self {
        Word(iter.into_iter().collect())
    }
}

/// `u*v*w`, or `1` for ε.
impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("1");
        }
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str("*")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("ε");
        }
        for v in &self.0 {
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum SemiringMode {
    /// Commutative, idempotent product.
    #[serde(rename = "trio")]
    TrioCommutative,
    /// Non-commutative product keeping the left-most occurrence.
    #[serde(rename = "lap")]
    LeftAbsorbing,
}

impl SemiringMode {
    pub fn name(self) -> &'static str {
        match self {
            SemiringMode::TrioCommutative => "trio",
            SemiringMode::LeftAbsorbing => "lap",
        }
    }
}

impl fmt::Display for SemiringMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A canonical representative `[w]` of a word.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial {
    canonical: Word,
    mode: SemiringMode,
}

impl Monomial {
    pub fn unit(mode: SemiringMode) -> Self {
        Monomial {
            canonical: Word::epsilon(),
            mode,
        }
    }

    pub fn canonical(&self) -> &Word {
        &self.canonical
    }

    pub fn into_word(self) -> Word {
        self.canonical
    }

    pub fn mode(&self) -> SemiringMode {
        self.mode
    }

    pub fn is_unit(&self) -> bool {
        self.canonical.is_epsilon()
    }

    pub fn product(&self, other: &Monomial) -> Monomial {
        debug_assert_eq!(self.mode, other.mode);
        Monomial {
            canonical: canonical_product(&self.canonical, &other.canonical, self.mode),
            mode: self.mode,
        }
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.canonical, f)
    }
}

impl fmt::Debug for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:?}]", self.canonical)
    }
}

pub fn canonicalize(w: &Word, mode: SemiringMode) -> Monomial {
    let canonical = match mode {
        SemiringMode::TrioCommutative => {
            let set: BTreeSet<&Var> = w.0.iter().collect();
            Word(set.into_iter().cloned().collect())
        }
        SemiringMode::LeftAbsorbing => {
            let mut seen = BTreeSet::new();
            Word(w.0.iter().filter(|v| seen.insert(*v)).cloned().collect())
        }
    };
    Monomial { canonical, mode }
}

/// `[a·b]` for canonical `a` and `b`.
pub(crate) fn canonical_product(a: &Word, b: &Word, mode: SemiringMode) -> Word {
    if b.is_epsilon() {
        return a.clone();
    }
    if a.is_epsilon() {
        return b.clone();
    }
    match mode {
        SemiringMode::TrioCommutative => {
            let (x, y) = (&a.0, &b.0);
            let mut out = Vec::with_capacity(x.len() + y.len());
            let (mut i, mut j) = (0, 0);
            while i < x.len() && j < y.len() {
                match x[i].cmp(&y[j]) {
                    std::cmp::Ordering::Less => {
                        out.push(x[i].clone());
                        i += 1;
                    }
                    std::cmp::Ordering::Greater => {
                        out.push(y[j].clone());
                        j += 1;
                    }
                    std::cmp::Ordering::Equal => {
                        out.push(x[i].clone());
                        i += 1;
                        j += 1;
                    }
                }
            }
            out.extend_from_slice(&x[i..]);
            out.extend_from_slice(&y[j..]);
            Word(out)
        }
        SemiringMode::LeftAbsorbing => {
            let mut out = a.0.clone();
            for v in &b.0 {
                if !a.0.contains(v) {
                    out.push(v.clone());
                }
            }
            Word(out)
        }
    }
}

/// A finite language, i.e. an element of the language semiring with finite support.
#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct FiniteLanguage(pub BTreeSet<Word>);

impl FiniteLanguage {
    pub fn empty() -> Self {
        FiniteLanguage(BTreeSet::new())
    }

    pub fn epsilon() -> Self {
        FiniteLanguage::single(Word::epsilon())
    }

    pub fn single(w: Word) -> Self {
        FiniteLanguage(BTreeSet::from([w]))
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn contains(&self, w: &Word) -> bool {
        self.0.contains(w)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Word> {
        self.0.iter()
    }

    /// `{[w] | w ∈ self}`.
    pub fn canonical_image(&self, mode: SemiringMode) -> MonomialSet {
        let mut set = MonomialSet::empty(mode);
        for w in &self.0 {
            set.insert_word(canonicalize(w, mode).into_word());
        }
        set
    }
}

impl FromIterator<Word> for FiniteLanguage {
    fn from_iter<I: IntoIterator<Item = Word>>(iter: I) -> Self {
        FiniteLanguage(iter.into_iter().collect())
    }
}

impl fmt::Debug for FiniteLanguage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.0.iter()).finish()
    }
}

/// `{wv | w ∈ a, v ∈ b}`.
pub fn lang_concat(a: &FiniteLanguage, b: &FiniteLanguage) -> FiniteLanguage {
    let mut out = BTreeSet::new();
    for w in &a.0 {
        for v in &b.0 {
            out.insert(w.concat(v));
        }
    }
    FiniteLanguage(out)
}

pub fn lang_union(a: &FiniteLanguage, b: &FiniteLanguage) -> FiniteLanguage {
    FiniteLanguage(a.0.union(&b.0).cloned().collect())
}

/// `a ≡_K b`: both languages have the same canonical image.
pub fn k_equivalent(a: &FiniteLanguage, b: &FiniteLanguage, mode: SemiringMode) -> bool {
    a.canonical_image(mode) == b.canonical_image(mode)
}

/// A set of canonical monomials of one mode.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct MonomialSet {
    mode: SemiringMode,
    items: BTreeSet<Word>,
}

impl MonomialSet {
    pub fn empty(mode: SemiringMode) -> Self {
        MonomialSet {
            mode,
            items: BTreeSet::new(),
        }
    }

    pub fn unit(mode: SemiringMode) -> Self {
        let mut s = MonomialSet::empty(mode);
        s.items.insert(Word::epsilon());
        s
    }

    pub fn mode(&self) -> SemiringMode {
        self.mode
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn contains(&self, m: &Monomial) -> bool {
        m.mode == self.mode && self.items.contains(&m.canonical)
    }

    /// Membership of an already canonical word.
    pub fn contains_word(&self, w: &Word) -> bool {
        self.items.contains(w)
    }

    /// Inserts `[w]`.
    pub fn insert(&mut self, w: &Word) -> bool {
        self.items.insert(canonicalize(w, self.mode).into_word())
    }

    pub(crate) fn insert_word(&mut self, canonical: Word) -> bool {
        self.items.insert(canonical)
    }

    /// Canonical words in sorted order.
    pub fn words(&self) -> impl Iterator<Item = &Word> {
        self.items.iter()
    }

    pub fn iter(&self) -> impl Iterator<Item = Monomial> + '_ {
        self.items.iter().map(|w| Monomial {
            canonical: w.clone(),
            mode: self.mode,
        })
    }

    /// `{[ab] | a ∈ self, b ∈ other}`.
    pub fn product(&self, other: &MonomialSet) -> MonomialSet {
        let mut out = MonomialSet::empty(self.mode);
        for a in &self.items {
            for b in &other.items {
                out.items.insert(canonical_product(a, b, self.mode));
            }
        }
        out
    }

    /// Adds all of `other`; returns whether anything was new.
    pub fn union_with(&mut self, other: &MonomialSet) -> bool {
        let before = self.items.len();
        self.items.extend(other.items.iter().cloned());
        self.items.len() != before
    }

    pub fn is_subset(&self, other: &MonomialSet) -> bool {
        self.items.is_subset(&other.items)
    }

    /// Renders monomials as `u*v*w` strings in sorted order.
    pub fn rendered(&self) -> Vec<String> {
        let mut out: Vec<String> = self.items.iter().map(|w| w.to_string()).collect();
        out.sort();
        out
    }
}

impl fmt::Debug for MonomialSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.items.iter()).finish()
    }
}

/// `{m₁, …}` using `*`-joined monomials, `∅` when empty.
impl fmt::Display for MonomialSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.items.is_empty() {
            return f.write_str("∅");
        }
        f.write_str("{")?;
        for (i, w) in self.items.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{w}")?;
        }
        f.write_str("}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    use SemiringMode::{LeftAbsorbing, TrioCommutative};

    fn w(s: &str) -> Word {
        Word::from_letters(s)
    }

    fn lang(words: &[&str]) -> FiniteLanguage {
        words.iter().map(|s| w(s)).collect()
    }

    #[test]
    fn trio_canonical_form() {
        assert_eq!(
            canonicalize(&w("xuxv"), TrioCommutative).canonical(),
            &w("uvx")
        );
    }

    #[test]
    fn left_absorbing_canonical_form() {
        let uvu = canonicalize(&w("uvu"), LeftAbsorbing);
        assert_eq!(uvu.canonical(), &w("uv"));
        assert_eq!(uvu, canonicalize(&w("uv"), LeftAbsorbing));
        assert_ne!(uvu, canonicalize(&w("vu"), LeftAbsorbing));
    }

    #[test]
    fn epsilon_is_unit() {
        for mode in [TrioCommutative, LeftAbsorbing] {
            let m = canonicalize(&Word::epsilon(), mode);
            assert!(m.is_unit());
            assert_eq!(m, Monomial::unit(mode));
            assert_eq!(m.to_string(), "1");
        }
    }

    #[test]
    fn rendering() {
        assert_eq!(
            canonicalize(&w("wvu"), TrioCommutative).to_string(),
            "u*v*w"
        );
    }

    #[test]
    fn concat_and_union() {
        assert_eq!(lang_concat(&lang(&["u"]), &lang(&["v"])), lang(&["uv"]));
        assert_eq!(
            lang_concat(&FiniteLanguage::empty(), &lang(&["v"])),
            FiniteLanguage::empty()
        );
        assert_eq!(
            lang_concat(&FiniteLanguage::epsilon(), &lang(&["wuv"])),
            lang(&["wuv"])
        );
        assert_eq!(lang_union(&lang(&["u"]), &lang(&["v"])), lang(&["u", "v"]));
    }

    #[test]
    fn k_equivalence_examples() {
        // finite truncation of (uv)*u
        assert!(k_equivalent(
            &lang(&["uv", "u"]),
            &lang(&["uvu", "u", "uvuvu"]),
            TrioCommutative
        ));
        assert!(!k_equivalent(&lang(&["uv"]), &lang(&["vu"]), LeftAbsorbing));
        let l = lang(&["wuv", "vwu", "xvywu"]);
        assert!(k_equivalent(&l, &l, TrioCommutative));
        assert!(k_equivalent(&l, &l, LeftAbsorbing));
    }

    #[test]
    fn monomial_set_product_matches_word_concat() {
        let a = lang(&["v", "xvy"]);
        let b = lang(&["wu", "u"]);
        for mode in [TrioCommutative, LeftAbsorbing] {
            let direct = lang_concat(&a, &b).canonical_image(mode);
            let via_sets = a.canonical_image(mode).product(&b.canonical_image(mode));
            assert_eq!(direct, via_sets);
        }
    }

    #[test]
    fn canonicalize_is_idempotent_exhaustively() {
        // all words of length ≤ 10 over 5 variables
        let vars: Vec<Var> = ["u", "v", "w", "x", "y"]
            .iter()
            .map(|n| Var::new(n).unwrap())
            .collect();
        for len in 0..=10usize {
            let mut digits = vec![0usize; len];
            loop {
                let word = Word(digits.iter().map(|&d| vars[d].clone()).collect());
                for mode in [TrioCommutative, LeftAbsorbing] {
                    let once = canonicalize(&word, mode);
                    assert_eq!(canonicalize(once.canonical(), mode), once, "{word:?}");
                }
                // odometer increment
                let mut i = 0;
                while i < len && digits[i] == vars.len() - 1 {
                    digits[i] = 0;
                    i += 1;
                }
                if i == len {
                    break;
                }
                digits[i] += 1;
            }
        }
    }

    fn word_strategy() -> impl Strategy<Value = Word> {
        proptest::collection::vec(0usize..5, 0..10).prop_map(|ix| {
            Word(
                ix.into_iter()
                    .map(|i| Var::new(["u", "v", "w", "x", "y"][i]).unwrap())
                    .collect(),
            )
        })
    }

    fn lang_strategy() -> impl Strategy<Value = FiniteLanguage> {
        proptest::collection::btree_set(word_strategy(), 0..5).prop_map(FiniteLanguage)
    }

    proptest! {
        #[test]
        fn trio_ignores_permutations(word in word_strategy(), seed in any::<u64>()) {
            let mut shuffled = word.0.clone();
            // deterministic Fisher-Yates from the seed
            let mut s = seed;
            for i in (1..shuffled.len()).rev() {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                let j = (s >> 33) as usize % (i + 1);
                shuffled.swap(i, j);
            }
            prop_assert_eq!(
                canonicalize(&word, TrioCommutative),
                canonicalize(&Word(shuffled), TrioCommutative)
            );
        }

        #[test]
        fn left_absorption_is_a_congruence(a in word_strategy(), b in word_strategy()) {
            let direct = canonicalize(&a.concat(&b), LeftAbsorbing);
            let stepwise = canonicalize(&canonicalize(&a, LeftAbsorbing).canonical().concat(&b), LeftAbsorbing);
            prop_assert_eq!(&direct, &stepwise);
            let both = canonical_product(
                canonicalize(&a, LeftAbsorbing).canonical(),
                canonicalize(&b, LeftAbsorbing).canonical(),
                LeftAbsorbing,
            );
            prop_assert_eq!(direct.canonical(), &both);
        }

        #[test]
        fn trio_product_is_canonical_concat(a in word_strategy(), b in word_strategy()) {
            let direct = canonicalize(&a.concat(&b), TrioCommutative);
            let both = canonical_product(
                canonicalize(&a, TrioCommutative).canonical(),
                canonicalize(&b, TrioCommutative).canonical(),
                TrioCommutative,
            );
            prop_assert_eq!(direct.canonical(), &both);
        }

        #[test]
        fn k_equivalence_is_an_equivalence(a in lang_strategy(), b in lang_strategy(), c in lang_strategy()) {
            for mode in [TrioCommutative, LeftAbsorbing] {
                prop_assert!(k_equivalent(&a, &a, mode));
                prop_assert_eq!(k_equivalent(&a, &b, mode), k_equivalent(&b, &a, mode));
                if k_equivalent(&a, &b, mode) && k_equivalent(&b, &c, mode) {
                    prop_assert!(k_equivalent(&a, &c, mode));
                }
                // a language is equivalent to its own canonical image
                let image: FiniteLanguage = a.canonical_image(mode).words().cloned().collect();
                prop_assert!(k_equivalent(&a, &image, mode));
            }
        }

        #[test]
        fn language_semiring_laws(a in lang_strategy(), b in lang_strategy(), c in lang_strategy()) {
            prop_assert_eq!(
                lang_concat(&lang_concat(&a, &b), &c),
                lang_concat(&a, &lang_concat(&b, &c))
            );
            prop_assert_eq!(lang_union(&a, &b), lang_union(&b, &a));
            prop_assert_eq!(lang_union(&lang_union(&a, &b), &c), lang_union(&a, &lang_union(&b, &c)));
            prop_assert_eq!(lang_union(&a, &a), a.clone());
            prop_assert_eq!(
                lang_concat(&a, &lang_union(&b, &c)),
                lang_union(&lang_concat(&a, &b), &lang_concat(&a, &c))
            );
            prop_assert_eq!(
                lang_concat(&lang_union(&a, &b), &c),
                lang_union(&lang_concat(&a, &c), &lang_concat(&b, &c))
            );
        }
    }
}
