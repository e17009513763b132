use std::fmt;

use crate::rdf::{Term, Triple};

/// A triple-pattern position: a constant term or a named variable.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PatternTerm {
    Term(Term),
    Var(String),
}

impl PatternTerm {
    pub fn var(name: impl Into<String>) -> Self {
        PatternTerm::Var(name.into())
    }

    pub fn iri(value: impl Into<String>) -> Self {
        PatternTerm::Term(Term::iri(value))
    }

    pub fn as_var(&self) -> Option<&str> {
        match self {
            PatternTerm::Var(v) => Some(v),
            PatternTerm::Term(_) => None,
        }
    }

    pub fn as_term(&self) -> Option<&Term> {
        match self {
            PatternTerm::Term(t) => Some(t),
            PatternTerm::Var(_) => None,
        }
    }
}

impl From<Term> for PatternTerm {
    fn from(t: Term) -> Self {
        PatternTerm::Term(t)
    }
}

impl fmt::Display for PatternTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PatternTerm::Term(t) => t.fmt(f),
            PatternTerm::Var(v) => write!(f, "?{v}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TriplePattern {
    pub s: PatternTerm,
    pub p: PatternTerm,
    pub o: PatternTerm,
}

impl TriplePattern {
    pub fn new(s: impl Into<PatternTerm>, p: impl Into<PatternTerm>, o: impl Into<PatternTerm>) -> Self {
        TriplePattern { s: s.into(), p: p.into(), o: o.into() }
    }

    pub fn positions(&self) -> [&PatternTerm; 3] {
        [&self.s, &self.p, &self.o]
    }

    pub fn vars(&self) -> impl Iterator<Item = &str> {
        self.positions().into_iter().filter_map(PatternTerm::as_var)
    }

    /// True when `t` unifies with the pattern, including repeated variables.
    pub fn unifies(&self, t: &Triple) -> bool {
        let mut seen: Vec<(&str, &Term)> = Vec::with_capacity(3);
        for (pos, term) in self.positions().into_iter().zip([&t.s, &t.p, &t.o]) {
            match pos {
                PatternTerm::Term(c) => {
                    if c != term {
                        return false;
                    }
                }
                PatternTerm::Var(v) => {
                    if let Some((_, bound)) = seen.iter().find(|(name, _)| name == v) {
                        if *bound != term {
                            return false;
                        }
                    } else {
                        seen.push((v, term));
                    }
                }
            }
        }
        true
    }
}

impl fmt::Display for TriplePattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.s, self.p, self.o)
    }
}

impl From<&str> for PatternTerm {
    /// `?name` becomes a variable, anything else an IRI.
    fn from(s: &str) -> Self {
        match s.strip_prefix('?') {
            Some(v) => PatternTerm::Var(v.to_string()),
            None => PatternTerm::Term(Term::iri(s)),
        }
    }
}
