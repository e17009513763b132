use std::cmp::Ordering;
use std::fmt;

use super::vocab::{RDF_LANG_STRING, XSD_STRING};
use super::RdfError;

/// An RDF term: IRI, blank node or literal.
///
/// Literals keep their datatype normalised: `xsd:string` is stored as a plain
/// literal so that `"x"` and `"x"^^xsd:string` compare equal.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Term {
    Iri(String),
    Blank(String),
    Literal(Literal),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Literal {
    lexical: String,
    annotation: Annotation,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum Annotation {
    Plain,
    Typed(String),
    Lang(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TermKind {
    Iri,
    Blank,
    Literal,
}

impl Literal {
    pub fn plain(lexical: impl Into<String>) -> Self {
        Literal { lexical: lexical.into(), annotation: Annotation::Plain }
    }

    pub fn typed(lexical: impl Into<String>, datatype: impl Into<String>) -> Self {
        let datatype = datatype.into();
        let annotation =
            if datatype == XSD_STRING { Annotation::Plain } else { Annotation::Typed(datatype) };
        Literal { lexical: lexical.into(), annotation }
    }

    pub fn lang(lexical: impl Into<String>, lang: impl Into<String>) -> Self {
        Literal { lexical: lexical.into(), annotation: Annotation::Lang(lang.into()) }
    }

    pub fn lexical(&self) -> &str {
        &self.lexical
    }

    /// Explicit datatype, `None` for plain and language-tagged literals.
    pub fn datatype(&self) -> Option<&str> {
        match &self.annotation {
            Annotation::Typed(dt) => Some(dt),
            _ => None,
        }
    }

    pub fn language(&self) -> Option<&str> {
        match &self.annotation {
            Annotation::Lang(l) => Some(l),
            _ => None,
        }
    }

    /// The datatype IRI including the implicit ones.
    pub fn effective_datatype(&self) -> &str {
        match &self.annotation {
            Annotation::Plain => XSD_STRING,
            Annotation::Typed(dt) => dt,
            Annotation::Lang(_) => RDF_LANG_STRING,
        }
    }
}

impl Term {
    pub fn iri(value: impl Into<String>) -> Self {
        Term::Iri(value.into())
    }

    pub fn blank(label: impl Into<String>) -> Self {
        Term::Blank(label.into())
    }

    pub fn literal(lexical: impl Into<String>) -> Self {
        Term::Literal(Literal::plain(lexical))
    }

    pub fn typed(lexical: impl Into<String>, datatype: impl Into<String>) -> Self {
        Term::Literal(Literal::typed(lexical, datatype))
    }

    pub fn lang_literal(lexical: impl Into<String>, lang: impl Into<String>) -> Self {
        Term::Literal(Literal::lang(lexical, lang))
    }

    pub fn kind(&self) -> TermKind {
        match self {
            Term::Iri(_) => TermKind::Iri,
            Term::Blank(_) => TermKind::Blank,
            Term::Literal(_) => TermKind::Literal,
        }
    }

    /// IRI string, blank label, or literal lexical form.
    pub fn value(&self) -> &str {
        match self {
            Term::Iri(v) | Term::Blank(v) => v,
            Term::Literal(l) => &l.lexical,
        }
    }

    pub fn as_iri(&self) -> Option<&str> {
        match self {
            Term::Iri(v) => Some(v),
            _ => None,
        }
    }

    pub fn as_literal(&self) -> Option<&Literal> {
        match self {
            Term::Literal(l) => Some(l),
            _ => None,
        }
    }

    pub fn is_iri(&self) -> bool {
        matches!(self, Term::Iri(_))
    }

    pub fn validate(&self) -> Result<(), RdfError> {
        match self {
            Term::Iri(v) if v.is_empty() => Err(RdfError::InvalidTerm("empty IRI".into())),
            Term::Iri(v) if v.chars().any(char::is_whitespace) => {
                Err(RdfError::InvalidTerm(format!("IRI contains whitespace: {v:?}")))
            }
            Term::Blank(v) if v.is_empty() => {
                Err(RdfError::InvalidTerm("empty blank node label".into()))
            }
            _ => Ok(()),
        }
    }

    fn order_key(&self) -> (TermKind, &str, &str, &str) {
        match self {
            Term::Iri(v) => (TermKind::Iri, v, "", ""),
            Term::Blank(v) => (TermKind::Blank, v, "", ""),
            Term::Literal(l) => {
                (TermKind::Literal, &l.lexical, l.effective_datatype(), l.language().unwrap_or(""))
            }
        }
    }
}

/// Total order: IRIs, then blank nodes, then literals; within a kind by value,
/// datatype and language tag.
impl Ord for Term {
    fn cmp(&self, other: &Self) -> Ordering {
        self.order_key().cmp(&other.order_key())
    }
}

impl PartialOrd for Term {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Iri(v) => write!(f, "<{v}>"),
            Term::Blank(v) => write!(f, "_:{v}"),
            Term::Literal(l) => {
                f.write_str("\"")?;
                super::ntriples::write_escaped(f, &l.lexical)?;
                f.write_str("\"")?;
                match &l.annotation {
                    Annotation::Plain => Ok(()),
                    Annotation::Typed(dt) => write!(f, "^^<{dt}>"),
                    Annotation::Lang(lang) => write!(f, "@{lang}"),
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Triple {
    pub s: Term,
    pub p: Term,
    pub o: Term,
}

impl Triple {
    pub fn new(s: Term, p: Term, o: Term) -> Self {
        Triple { s, p, o }
    }

    pub fn validate(&self) -> Result<(), RdfError> {
        if matches!(self.s, Term::Literal(_)) {
            return Err(RdfError::InvalidTerm("literal in subject position".into()));
        }
        if !self.p.is_iri() {
            return Err(RdfError::InvalidTerm("predicate must be an IRI".into()));
        }
        self.s.validate()?;
        self.p.validate()?;
        self.o.validate()
    }
}

impl fmt::Display for Triple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {} .", self.s, self.p, self.o)
    }
}
