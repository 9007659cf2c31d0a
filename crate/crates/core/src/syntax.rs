//! Annotated ELHr TBoxes in restricted normal form.
//!
//! A TBox is a list of axioms, each labelled with a provenance variable or
//! the unit annotation `1`. Only the six normal-form shapes are accepted;
//! there is no normalizer.
//!
//! The text format is line oriented:
//!
//! ```text
//! # comment
//! A & B <= C : u
//! top <= B : v
//! A <= ex R : x
//! ex R . B <= B : y
//! ran(R) <= A : z
//! R [= S : 1
//! ```

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

macro_rules! name_type {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
        pub struct $name(Arc<str>);

        impl $name {
            /// Builds a name after checking the identifier rule
            /// `[A-Za-z][A-Za-z0-9_]*`; keywords are rejected.
            pub fn new(name: &str) -> Result<Self, NameError> {
                check_identifier(name)?;
                Ok(Self(Arc::from(name)))
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl fmt::Debug for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl Serialize for $name {
            fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
                serializer.serialize_str(&self.0)
            }
        }

        impl<'de> Deserialize<'de> for $name {
            fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
                let s = String::deserialize(deserializer)?;
                $name::new(&s).map_err(serde::de::Error::custom)
            }
        }
    };
}

name_type!(
    /// A concept name from `N_C`.
    ConceptName
);
name_type!(
    /// A role name from `N_R`.
    RoleName
);
name_type!(
    /// A provenance variable.
    Var
);

const KEYWORDS: [&str; 3] = ["ex", "ran", "top"];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NameError {
    #[error("empty identifier")]
    Empty,
    #[error("invalid identifier `{0}`")]
    Invalid(String),
    #[error("`{0}` is a reserved keyword")]
    Keyword(String),
}

fn check_identifier(name: &str) -> Result<(), NameError> {
    let mut chars = name.chars();
    match chars.next() {
        None => return Err(NameError::Empty),
        Some(c) if c.is_ascii_alphabetic() => {}
        Some(_) => return Err(NameError::Invalid(name.to_string())),
    }
    if !chars.all(|c| c.is_ascii_alphanumeric() || c == '_') {
        return Err(NameError::Invalid(name.to_string()));
    }
    if KEYWORDS.contains(&name) {
        return Err(NameError::Keyword(name.to_string()));
    }
    Ok(())
}

/// A concept name or `⊤`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Concept {
    Top,
    Name(ConceptName),
}

impl Concept {
    pub fn name(name: &str) -> Result<Self, NameError> {
        ConceptName::new(name).map(Concept::Name)
    }

    pub fn is_top(&self) -> bool {
        matches!(self, Concept::Top)
    }
}

impl fmt::Display for Concept {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Concept::Top => f.write_str("top"),
            Concept::Name(n) => write!(f, "{n}"),
        }
    }
}

impl fmt::Debug for Concept {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// An axiom in restricted normal form.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Axiom {
    /// `A ⊑ B`
    Atomic { lhs: Concept, rhs: Concept },
    /// `A ⊑ ∃R`
    Exist { lhs: Concept, role: RoleName },
    /// `A ⊓ B ⊑ C`, conjuncts in written order.
    Conj {
        left: Concept,
        right: Concept,
        rhs: Concept,
    },
    /// `∃R.B ⊑ C`
    QualExist {
        role: RoleName,
        filler: Concept,
        rhs: Concept,
    },
    /// `ran(R) ⊑ A`
    Range { role: RoleName, rhs: Concept },
    /// `R ⊑ S`
    RoleIncl { sub: RoleName, sup: RoleName },
}

/// The six normal-form shapes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum AxiomShape {
    Atomic,
    Exist,
    Conj,
    QualExist,
    Range,
    RoleIncl,
}

impl Axiom {
    pub fn atomic(lhs: Concept, rhs: Concept) -> Self {
        Axiom::Atomic { lhs, rhs }
    }

    pub fn exist(lhs: Concept, role: RoleName) -> Self {
        Axiom::Exist { lhs, role }
    }

    pub fn conj(left: Concept, right: Concept, rhs: Concept) -> Self {
        Axiom::Conj { left, right, rhs }
    }

    pub fn qual_exist(role: RoleName, filler: Concept, rhs: Concept) -> Self {
        Axiom::QualExist { role, filler, rhs }
    }

    pub fn range(role: RoleName, rhs: Concept) -> Self {
        Axiom::Range { role, rhs }
    }

    pub fn role_incl(sub: RoleName, sup: RoleName) -> Self {
        Axiom::RoleIncl { sub, sup }
    }

    pub fn shape(&self) -> AxiomShape {
        match self {
            Axiom::Atomic { .. } => AxiomShape::Atomic,
            Axiom::Exist { .. } => AxiomShape::Exist,
            Axiom::Conj { .. } => AxiomShape::Conj,
            Axiom::QualExist { .. } => AxiomShape::QualExist,
            Axiom::Range { .. } => AxiomShape::Range,
            Axiom::RoleIncl { .. } => AxiomShape::RoleIncl,
        }
    }

    /// Goals of entailment queries: `A ⊑ B` and `A ⊑ ∃R`.
    pub fn is_queryable(&self) -> bool {
        matches!(self, Axiom::Atomic { .. } | Axiom::Exist { .. })
    }

    /// `X ⊑ X` or `X ⊑ ⊤`.
    pub fn is_concept_tautology(&self) -> bool {
        match self {
            Axiom::Atomic { lhs, rhs } => lhs == rhs || rhs.is_top(),
            _ => false,
        }
    }

    /// Concept names occurring in the axiom (⊤ excluded).
    pub fn concept_names(&self) -> impl Iterator<Item = &ConceptName> {
        let concepts: [Option<&Concept>; 3] = match self {
            Axiom::Atomic { lhs, rhs } => [Some(lhs), Some(rhs), None],
            Axiom::Exist { lhs, .. } => [Some(lhs), None, None],
            Axiom::Conj { left, right, rhs } => [Some(left), Some(right), Some(rhs)],
            Axiom::QualExist { filler, rhs, .. } => [Some(filler), Some(rhs), None],
            Axiom::Range { rhs, .. } => [Some(rhs), None, None],
            Axiom::RoleIncl { .. } => [None, None, None],
        };
        concepts.into_iter().flatten().filter_map(|c| match c {
            Concept::Top => None,
            Concept::Name(n) => Some(n),
        })
    }

    pub fn role_names(&self) -> impl Iterator<Item = &RoleName> {
        let roles: [Option<&RoleName>; 2] = match self {
            Axiom::Exist { role, .. }
            | Axiom::QualExist { role, .. }
            | Axiom::Range { role, .. } => [Some(role), None],
            Axiom::RoleIncl { sub, sup } => [Some(sub), Some(sup)],
            _ => [None, None],
        };
        roles.into_iter().flatten()
    }
}

impl fmt::Display for Axiom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Axiom::Atomic { lhs, rhs } => write!(f, "{lhs} <= {rhs}"),
            Axiom::Exist { lhs, role } => write!(f, "{lhs} <= ex {role}"),
            Axiom::Conj { left, right, rhs } => write!(f, "{left} & {right} <= {rhs}"),
            Axiom::QualExist { role, filler, rhs } => write!(f, "ex {role} . {filler} <= {rhs}"),
            Axiom::Range { role, rhs } => write!(f, "ran({role}) <= {rhs}"),
            Axiom::RoleIncl { sub, sup } => write!(f, "{sub} [= {sup}"),
        }
    }
}

impl fmt::Debug for Axiom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Provenance label of an axiom.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Annotation {
    Unit,
    Var(Var),
}

impl Annotation {
    pub fn var(&self) -> Option<&Var> {
        match self {
            Annotation::Unit => None,
            Annotation::Var(v) => Some(v),
        }
    }
}

impl fmt::Display for Annotation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Annotation::Unit => f.write_str("1"),
            Annotation::Var(v) => write!(f, "{v}"),
        }
    }
}

impl fmt::Debug for Annotation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// `N_C(T)`, `N_R(T)` and the provenance variables of a TBox.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Signature {
    pub concepts: BTreeSet<ConceptName>,
    pub roles: BTreeSet<RoleName>,
    pub vars: BTreeSet<Var>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TBoxError {
    #[error("axiom `{0}` occurs more than once")]
    DuplicateAxiom(Axiom),
    #[error("variable `{0}` annotates more than one axiom")]
    DuplicateVariable(Var),
    #[error("name `{0}` is used in more than one namespace (concept, role, variable)")]
    NameClash(String),
}

/// A set of annotated normal-form axioms, kept in insertion order.
#[derive(Clone)]
pub struct AnnotatedTBox {
    entries: Vec<(Axiom, Annotation)>,
    lookup: HashMap<Axiom, usize>,
    signature: Signature,
}

impl AnnotatedTBox {
    pub fn new(entries: Vec<(Axiom, Annotation)>) -> Result<Self, TBoxError> {
        let mut lookup = HashMap::with_capacity(entries.len());
        let mut signature = Signature::default();
        for (i, (axiom, annotation)) in entries.iter().enumerate() {
            if lookup.insert(axiom.clone(), i).is_some() {
                return Err(TBoxError::DuplicateAxiom(axiom.clone()));
            }
            signature.concepts.extend(axiom.concept_names().cloned());
            signature.roles.extend(axiom.role_names().cloned());
            if let Annotation::Var(v) = annotation {
                if !signature.vars.insert(v.clone()) {
                    return Err(TBoxError::DuplicateVariable(v.clone()));
                }
            }
        }
        let clash = signature
            .concepts
            .iter()
            .map(ConceptName::as_str)
            .find(|c| {
                signature.roles.iter().any(|r| r.as_str() == *c)
                    || signature.vars.iter().any(|v| v.as_str() == *c)
            })
            .or_else(|| {
                signature
                    .roles
                    .iter()
                    .map(RoleName::as_str)
                    .find(|r| signature.vars.iter().any(|v| v.as_str() == *r))
            });
        if let Some(name) = clash {
            return Err(TBoxError::NameClash(name.to_string()));
        }
        Ok(Self {
            entries,
            lookup,
            signature,
        })
    }

    pub fn empty() -> Self {
        Self {
            entries: Vec::new(),
            lookup: HashMap::new(),
            signature: Signature::default(),
        }
    }

    pub fn entries(&self) -> &[(Axiom, Annotation)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn annotation(&self, axiom: &Axiom) -> Option<&Annotation> {
        self.lookup.get(axiom).map(|&i| &self.entries[i].1)
    }

    pub fn contains(&self, axiom: &Axiom) -> bool {
        self.lookup.contains_key(axiom)
    }

    pub fn signature(&self) -> &Signature {
        &self.signature
    }

    pub fn axioms(&self) -> impl Iterator<Item = &Axiom> {
        self.entries.iter().map(|(a, _)| a)
    }
}

impl PartialEq for AnnotatedTBox {
    fn eq(&self, other: &Self) -> bool {
        self.entries == other.entries
    }
}

impl Eq for AnnotatedTBox {}

impl fmt::Debug for AnnotatedTBox {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.entries.iter()).finish()
    }
}

/// Prints the TBox in the text format accepted by [`parse_tbox`].
impl fmt::Display for AnnotatedTBox {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (axiom, annotation) in &self.entries {
            writeln!(f, "{axiom} : {annotation}")?;
        }
        Ok(())
    }
}

/// Returns `(N_C(T), N_R(T), variables)`.
pub fn signature(
    tbox: &AnnotatedTBox,
) -> (BTreeSet<ConceptName>, BTreeSet<RoleName>, BTreeSet<Var>) {
    let s = tbox.signature();
    (s.concepts.clone(), s.roles.clone(), s.vars.clone())
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("line {line}: syntax error: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: `{axiom}` is not in restricted normal form: {reason}")]
    NotNormalForm {
        line: usize,
        axiom: String,
        reason: String,
    },
    #[error("line {line}: {source}")]
    TBox {
        line: usize,
        #[source]
        source: TBoxError,
    },
    #[error("goal `{0}` is not queryable (expected `A <= B` or `A <= ex R`)")]
    NotQueryable(Axiom),
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Token {
    Ident(String),
    One,
    Top,
    Ex,
    Ran,
    LParen,
    RParen,
    Sub,
    RoleSub,
    And,
    Dot,
    Colon,
    Star,
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Token::Ident(s) => f.write_str(s),
            Token::One => f.write_str("1"),
            Token::Top => f.write_str("top"),
            Token::Ex => f.write_str("ex"),
            Token::Ran => f.write_str("ran"),
            Token::LParen => f.write_str("("),
            Token::RParen => f.write_str(")"),
            Token::Sub => f.write_str("<="),
            Token::RoleSub => f.write_str("[="),
            Token::And => f.write_str("&"),
            Token::Dot => f.write_str("."),
            Token::Colon => f.write_str(":"),
            Token::Star => f.write_str("*"),
        }
    }
}

fn tokenize(text: &str, line: usize) -> Result<Vec<Token>, ParseError> {
    let err = |message: String| ParseError::Syntax { line, message };
    let mut tokens = Vec::new();
    let mut chars = text.char_indices().peekable();
    while let Some(&(start, c)) = chars.peek() {
        if c.is_whitespace() {
            chars.next();
            continue;
        }
        if c.is_ascii_alphabetic() {
            let mut end = start;
            while let Some(&(i, c)) = chars.peek() {
                if c.is_ascii_alphanumeric() || c == '_' {
                    end = i + c.len_utf8();
                    chars.next();
                } else {
                    break;
                }
            }
            let word = &text[start..end];
            tokens.push(match word {
                "top" => Token::Top,
                "ex" => Token::Ex,
                "ran" => Token::Ran,
                _ => Token::Ident(word.to_string()),
            });
            continue;
        }
        chars.next();
        let token = match c {
            '1' => {
                if matches!(chars.peek(), Some((_, d)) if d.is_ascii_alphanumeric() || *d == '_') {
                    return Err(err("identifiers must start with a letter".into()));
                }
                Token::One
            }
            '(' => Token::LParen,
            ')' => Token::RParen,
            '&' => Token::And,
            '.' => Token::Dot,
            ':' => Token::Colon,
            '*' => Token::Star,
            '<' => match chars.next() {
                Some((_, '=')) => Token::Sub,
                _ => return Err(err("expected `<=`".into())),
            },
            '[' => match chars.next() {
                Some((_, '=')) => Token::RoleSub,
                _ => return Err(err("expected `[=`".into())),
            },
            other => return Err(err(format!("unexpected character `{other}`"))),
        };
        tokens.push(token);
    }
    Ok(tokens)
}

/// General concept expression, used to report non-normal-form input precisely.
#[derive(Debug, Clone)]
enum Expr {
    Concept(Concept),
    Exists(RoleName, Option<Box<Expr>>),
    And(Box<Expr>, Box<Expr>),
    Range(RoleName),
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Concept(c) => write!(f, "{c}"),
            Expr::Exists(r, None) => write!(f, "ex {r}"),
            Expr::Exists(r, Some(c)) => write!(f, "ex {r} . {c}"),
            Expr::And(a, b) => write!(f, "{a} & {b}"),
            Expr::Range(r) => write!(f, "ran({r})"),
        }
    }
}

struct Parser<'a> {
    tokens: &'a [Token],
    pos: usize,
    line: usize,
}

impl<'a> Parser<'a> {
    fn new(tokens: &'a [Token], line: usize) -> Self {
        Self {
            tokens,
            pos: 0,
            line,
        }
    }

    fn error<T>(&self, message: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError::Syntax {
            line: self.line,
            message: message.into(),
        })
    }

    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self) -> Option<&Token> {
        let t = self.tokens.get(self.pos);
        self.pos += 1;
        t
    }

    fn expect(&mut self, expected: Token) -> Result<(), ParseError> {
        match self.next() {
            Some(t) if *t == expected => Ok(()),
            Some(t) => {
                let t = t.to_string();
                self.error(format!("expected `{expected}`, found `{t}`"))
            }
            None => self.error(format!("expected `{expected}`, found end of line")),
        }
    }

    fn ident(&mut self, what: &str) -> Result<String, ParseError> {
        match self.next() {
            Some(Token::Ident(s)) => Ok(s.clone()),
            Some(t) => {
                let t = t.to_string();
                self.error(format!("expected {what}, found `{t}`"))
            }
            None => self.error(format!("expected {what}, found end of line")),
        }
    }

    fn role(&mut self) -> Result<RoleName, ParseError> {
        let name = self.ident("role name")?;
        RoleName::new(&name).or_else(|e| self.error(e.to_string()))
    }

    fn concept_expr(&mut self) -> Result<Expr, ParseError> {
        let mut expr = self.concept_atom()?;
        while self.peek() == Some(&Token::And) {
            self.next();
            let right = self.concept_atom()?;
            expr = Expr::And(Box::new(expr), Box::new(right));
        }
        Ok(expr)
    }

    fn concept_atom(&mut self) -> Result<Expr, ParseError> {
        match self.next().cloned() {
            Some(Token::Top) => Ok(Expr::Concept(Concept::Top)),
            Some(Token::Ident(name)) => ConceptName::new(&name)
                .map(|n| Expr::Concept(Concept::Name(n)))
                .or_else(|e| self.error(e.to_string())),
            Some(Token::Ex) => {
                let role = self.role()?;
                if self.peek() == Some(&Token::Dot) {
                    self.next();
                    let filler = self.concept_atom()?;
                    Ok(Expr::Exists(role, Some(Box::new(filler))))
                } else {
                    Ok(Expr::Exists(role, None))
                }
            }
            Some(Token::Ran) => {
                self.expect(Token::LParen)?;
                let role = self.role()?;
                self.expect(Token::RParen)?;
                Ok(Expr::Range(role))
            }
            Some(t) => self.error(format!("expected a concept, found `{t}`")),
            None => self.error("expected a concept, found end of line"),
        }
    }

    /// Parses `axiom` and normalizes its shape; stops before `:`.
    fn axiom(&mut self) -> Result<Axiom, ParseError> {
        // R [= S
        if let (Some(Token::Ident(sub)), Some(Token::RoleSub)) =
            (self.tokens.get(self.pos), self.tokens.get(self.pos + 1))
        {
            let sub = RoleName::new(sub).or_else(|e| self.error(e.to_string()))?;
            self.pos += 2;
            let sup = self.role()?;
            return Ok(Axiom::role_incl(sub, sup));
        }
        let lhs = self.concept_expr()?;
        self.expect(Token::Sub)?;
        let rhs = self.concept_expr()?;
        classify(lhs, rhs, self.line)
    }

    fn at_end(&self) -> bool {
        self.pos >= self.tokens.len()
    }
}

fn classify(lhs: Expr, rhs: Expr, line: usize) -> Result<Axiom, ParseError> {
    let text = format!("{lhs} <= {rhs}");
    let not_normal = |reason: &str| ParseError::NotNormalForm {
        line,
        axiom: text.clone(),
        reason: reason.to_string(),
    };
    let rhs_concept = match &rhs {
        Expr::Concept(c) => Some(c.clone()),
        Expr::Exists(role, None) => {
            return match &lhs {
                Expr::Concept(c) => Ok(Axiom::exist(c.clone(), role.clone())),
                _ => Err(not_normal(
                    "an unqualified existential right-hand side needs an atomic left-hand side",
                )),
            };
        }
        Expr::Exists(_, Some(_)) => {
            return Err(not_normal("qualified existential on the right-hand side"))
        }
        Expr::And(..) => return Err(not_normal("conjunction on the right-hand side")),
        Expr::Range(_) => return Err(not_normal("range restriction on the right-hand side")),
    };
    let rhs = rhs_concept.expect("handled above");
    match lhs {
        Expr::Concept(c) => Ok(Axiom::atomic(c, rhs)),
        Expr::And(a, b) => match (*a, *b) {
            (Expr::Concept(a), Expr::Concept(b)) => Ok(Axiom::conj(a, b, rhs)),
            _ => Err(not_normal(
                "conjunctions must have exactly two atomic conjuncts",
            )),
        },
        Expr::Exists(role, Some(filler)) => match *filler {
            Expr::Concept(f) => Ok(Axiom::qual_exist(role, f, rhs)),
            _ => Err(not_normal("the filler of an existential must be atomic")),
        },
        Expr::Exists(..) => Err(not_normal(
            "an existential on the left-hand side needs a filler (`ex R . top`)",
        )),
        Expr::Range(role) => Ok(Axiom::range(role, rhs)),
    }
}

fn parse_annotation(parser: &mut Parser<'_>) -> Result<Annotation, ParseError> {
    let annotation = match parser.next().cloned() {
        Some(Token::One) => Annotation::Unit,
        Some(Token::Ident(name)) => {
            Annotation::Var(Var::new(&name).or_else(|e| parser.error(e.to_string()))?)
        }
        Some(t) => return parser.error(format!("expected an annotation, found `{t}`")),
        None => return parser.error("expected an annotation, found end of line"),
    };
    if !parser.at_end() {
        return parser.error("trailing input after annotation");
    }
    Ok(annotation)
}

/// Parses a TBox file. Entries keep file order.
pub fn parse_tbox(text: &str) -> Result<AnnotatedTBox, ParseError> {
    let mut entries = Vec::new();
    let mut lines = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.trim();
        if content.is_empty() || content.starts_with('#') {
            continue;
        }
        let tokens = tokenize(content, line)?;
        let mut parser = Parser::new(&tokens, line);
        let axiom = parser.axiom()?;
        parser.expect(Token::Colon)?;
        let annotation = parse_annotation(&mut parser)?;
        entries.push((axiom, annotation));
        lines.push(line);
    }
    AnnotatedTBox::new(entries.clone()).map_err(|source| {
        let line = offending_line(&entries, &lines, &source);
        ParseError::TBox { line, source }
    })
}

fn offending_line(entries: &[(Axiom, Annotation)], lines: &[usize], error: &TBoxError) -> usize {
    let position = match error {
        TBoxError::DuplicateAxiom(ax) => entries.iter().rposition(|(a, _)| a == ax),
        TBoxError::DuplicateVariable(v) => {
            entries.iter().rposition(|(_, ann)| ann.var() == Some(v))
        }
        TBoxError::NameClash(name) => entries.iter().position(|(a, ann)| {
            a.role_names().any(|r| r.as_str() == name)
                || ann.var().is_some_and(|v| v.as_str() == name)
        }),
    };
    position.map(|p| lines[p]).unwrap_or(0)
}

/// Parses a goal axiom `A <= B` or `A <= ex R`.
pub fn parse_goal(text: &str) -> Result<Axiom, ParseError> {
    let tokens = tokenize(text.trim(), 1)?;
    let mut parser = Parser::new(&tokens, 1);
    let goal = parser.axiom()?;
    if !parser.at_end() {
        return parser.error("trailing input after goal");
    }
    if !goal.is_queryable() {
        return Err(ParseError::NotQueryable(goal));
    }
    Ok(goal)
}

/// Parses `<goal> : <monomial>` where the monomial is `1` or `v1*...*vk`.
/// The variables keep their written order.
pub fn parse_query(text: &str) -> Result<(Axiom, Vec<Var>), ParseError> {
    let tokens = tokenize(text.trim(), 1)?;
    let mut parser = Parser::new(&tokens, 1);
    let goal = parser.axiom()?;
    parser.expect(Token::Colon)?;
    let mut word = Vec::new();
    if parser.peek() == Some(&Token::One) {
        parser.next();
    } else {
        loop {
            let name = parser.ident("variable")?;
            word.push(Var::new(&name).or_else(|e| parser.error(e.to_string()))?);
            if parser.peek() == Some(&Token::Star) {
                parser.next();
            } else {
                break;
            }
        }
    }
    if !parser.at_end() {
        return parser.error("trailing input after monomial");
    }
    if !goal.is_queryable() {
        return Err(ParseError::NotQueryable(goal));
    }
    Ok((goal, word))
}
