use std::collections::{BTreeSet, HashMap};
use std::io::BufRead;

use crate::rdf::ntriples::{is_blank_line, serialize_ntriple};
use crate::rdf::vocab::{OWL_SAME_AS, RDFS_SUBCLASS_OF};
use crate::rdf::{parse_ntriple, Term, Triple};

use super::closure::SubclassClosure;
use super::sameas::{component_representatives, is_sameas_link};
use super::{KbError, TriplePattern};

type Id = u32;
type Key = [Id; 3];

const KB_BLANK_PREFIX: &str = "kb.";

#[derive(Debug, Default, Clone)]
struct Dictionary {
    terms: Vec<Term>,
    ids: HashMap<Term, Id>,
}

impl Dictionary {
    fn intern(&mut self, t: Term) -> Id {
        if let Some(&id) = self.ids.get(&t) {
            return id;
        }
        let id = self.terms.len() as Id;
        self.terms.push(t.clone());
        self.ids.insert(t, id);
        id
    }

    fn get(&self, t: &Term) -> Option<Id> {
        self.ids.get(t).copied()
    }

    fn term(&self, id: Id) -> &Term {
        &self.terms[id as usize]
    }
}

/// Immutable indexed triple set with eagerly computed closures.
///
/// Triples are held in three sorted permutation indexes (spo, pos, osp); a
/// lookup picks the index whose prefix covers the bound positions.
#[derive(Debug, Clone, Default)]
pub struct TripleStore {
    dict: Dictionary,
    spo: Vec<Key>,
    pos: Vec<Key>,
    osp: Vec<Key>,
    closure: SubclassClosure,
    /// Non-trivial owl:sameAs representatives only; survives canonicalisation
    /// so constants naming an alias can still be resolved.
    sameas_rep: HashMap<Term, Term>,
}

impl TripleStore {
    pub fn new() -> Self {
        Self::default()
    }

    /// Loads N-Triples line by line. Duplicate statements collapse; blank
    /// nodes are renamed into a store-private namespace.
    pub fn load(source: impl BufRead) -> Result<Self, KbError> {
        let mut triples = Vec::new();
        for (idx, line) in source.lines().enumerate() {
            let line = line.map_err(|e| KbError::Io(e.to_string()))?;
            if is_blank_line(&line) {
                continue;
            }
            let t = parse_ntriple(&line).map_err(|source| KbError::Parse { line: idx + 1, source })?;
            triples.push(rename_blanks(t));
        }
        Ok(Self::from_triples(triples))
    }

    pub fn from_ntriples(text: &str) -> Result<Self, KbError> {
        Self::load(text.as_bytes())
    }

    /// Parses, canonicalises owl:sameAs and indexes in one pass. This is the
    /// form a background KB is prepared in before query evaluation.
    pub fn load_canonical(text: &str) -> Result<Self, KbError> {
        let mut triples = Vec::new();
        for (idx, line) in text.lines().enumerate() {
            if is_blank_line(line) {
                continue;
            }
            let t = parse_ntriple(line).map_err(|source| KbError::Parse { line: idx + 1, source })?;
            triples.push(rename_blanks(t));
        }
        Ok(Self::from_triples(triples).canonicalize_sameas())
    }

    pub fn from_triples(triples: impl IntoIterator<Item = Triple>) -> Self {
        let mut dict = Dictionary::default();
        let mut spo: Vec<Key> = triples
            .into_iter()
            .map(|t| [dict.intern(t.s), dict.intern(t.p), dict.intern(t.o)])
            .collect();
        spo.sort_unstable();
        spo.dedup();
        let mut pos: Vec<Key> = spo.iter().map(|&[s, p, o]| [p, o, s]).collect();
        pos.sort_unstable();
        let mut osp: Vec<Key> = spo.iter().map(|&[s, p, o]| [o, s, p]).collect();
        osp.sort_unstable();

        let edges: Vec<(Id, Id)> = match dict.get(&Term::iri(RDFS_SUBCLASS_OF)) {
            Some(sub) => range(&pos, &[sub]).iter().map(|&[_, o, s]| (s, o)).collect(),
            None => Vec::new(),
        };
        let closure = SubclassClosure::compute(&edges);

        let mut sameas_rep = HashMap::new();
        if let Some(same) = dict.get(&Term::iri(OWL_SAME_AS)) {
            let links: Vec<(Id, Id)> = range(&pos, &[same])
                .iter()
                .filter(|&&[_, o, s]| dict.term(s).is_iri() && dict.term(o).is_iri())
                .map(|&[_, o, s]| (s, o))
                .collect();
            let reps = component_representatives(&links, |a, b| dict.term(a).value().cmp(dict.term(b).value()));
            sameas_rep = reps
                .into_iter()
                .filter(|(a, b)| a != b)
                .map(|(a, b)| (dict.term(a).clone(), dict.term(b).clone()))
                .collect();
        }

        TripleStore { dict, spo, pos, osp, closure, sameas_rep }
    }

    pub fn len(&self) -> usize {
        self.spo.len()
    }

    pub fn is_empty(&self) -> bool {
        self.spo.is_empty()
    }

    /// All triples in subject-predicate-object order.
    pub fn triples(&self) -> impl Iterator<Item = Triple> + '_ {
        self.spo.iter().map(move |&k| self.triple(k))
    }

    fn triple(&self, [s, p, o]: Key) -> Triple {
        Triple::new(self.dict.term(s).clone(), self.dict.term(p).clone(), self.dict.term(o).clone())
    }

    pub fn contains(&self, t: &Triple) -> bool {
        match (self.dict.get(&t.s), self.dict.get(&t.p), self.dict.get(&t.o)) {
            (Some(s), Some(p), Some(o)) => self.spo.binary_search(&[s, p, o]).is_ok(),
            _ => false,
        }
    }

    /// Returns every stored triple unifying with `pat`, in index order.
    pub fn match_pattern(&self, pat: &TriplePattern) -> Vec<Triple> {
        let candidates = self.match_terms(pat.s.as_term(), pat.p.as_term(), pat.o.as_term());
        let repeated = {
            let vars: Vec<&str> = pat.vars().collect();
            vars.len() > 1 && (1..vars.len()).any(|i| vars[..i].contains(&vars[i]))
        };
        if repeated {
            candidates.into_iter().filter(|t| pat.unifies(t)).collect()
        } else {
            candidates
        }
    }

    /// Lookup by bound positions; `None` is a wildcard.
    pub fn match_terms(&self, s: Option<&Term>, p: Option<&Term>, o: Option<&Term>) -> Vec<Triple> {
        let mut out = Vec::new();
        self.for_each_match(s, p, o, |t| out.push(t));
        out
    }

    pub fn count_matches(&self, s: Option<&Term>, p: Option<&Term>, o: Option<&Term>) -> usize {
        let mut n = 0;
        self.for_each_match(s, p, o, |_| n += 1);
        n
    }

    fn for_each_match(&self, s: Option<&Term>, p: Option<&Term>, o: Option<&Term>, mut f: impl FnMut(Triple)) {
        let lookup = |t: Option<&Term>| -> Result<Option<Id>, ()> {
            match t {
                None => Ok(None),
                Some(t) => self.dict.get(t).map(Some).ok_or(()),
            }
        };
        let (Ok(s), Ok(p), Ok(o)) = (lookup(s), lookup(p), lookup(o)) else {
            return;
        };
        match (s, p, o) {
            (Some(s), Some(p), Some(o)) => {
                if self.spo.binary_search(&[s, p, o]).is_ok() {
                    f(self.triple([s, p, o]));
                }
            }
            (Some(s), Some(p), None) => range(&self.spo, &[s, p]).iter().for_each(|&k| f(self.triple(k))),
            (Some(s), None, None) => range(&self.spo, &[s]).iter().for_each(|&k| f(self.triple(k))),
            (None, Some(p), Some(o)) => {
                range(&self.pos, &[p, o]).iter().for_each(|&[p, o, s]| f(self.triple([s, p, o])))
            }
            (None, Some(p), None) => {
                range(&self.pos, &[p]).iter().for_each(|&[p, o, s]| f(self.triple([s, p, o])))
            }
            (Some(s), None, Some(o)) => {
                range(&self.osp, &[o, s]).iter().for_each(|&[o, s, p]| f(self.triple([s, p, o])))
            }
            (None, None, Some(o)) => {
                range(&self.osp, &[o]).iter().for_each(|&[o, s, p]| f(self.triple([s, p, o])))
            }
            (None, None, None) => self.spo.iter().for_each(|&k| f(self.triple(k))),
        }
    }

    /// Reflexive-transitive subclasses of `class` (always contains `class`).
    pub fn subclasses_of(&self, class: &Term) -> BTreeSet<Term> {
        self.closure_set(class, |id| self.closure.subclasses(id))
    }

    /// Reflexive-transitive superclasses of `class` (always contains `class`).
    pub fn superclasses_of(&self, class: &Term) -> BTreeSet<Term> {
        self.closure_set(class, |id| self.closure.superclasses(id))
    }

    fn closure_set<'a>(&'a self, class: &Term, get: impl Fn(Id) -> Option<&'a BTreeSet<Id>>) -> BTreeSet<Term> {
        match self.dict.get(class).and_then(get) {
            Some(ids) => ids.iter().map(|&id| self.dict.term(id).clone()).collect(),
            None => BTreeSet::from([class.clone()]),
        }
    }

    /// True when `t` occurs on either side of an rdfs:subClassOf edge.
    pub fn is_hierarchy_node(&self, t: &Term) -> bool {
        self.dict.get(t).is_some_and(|id| self.closure.contains(id))
    }

    /// Every entailed (sub, super) pair, reflexive pairs included.
    pub fn subclass_pairs(&self) -> Vec<(Term, Term)> {
        self.closure
            .pairs()
            .map(|(a, b)| (self.dict.term(a).clone(), self.dict.term(b).clone()))
            .collect()
    }

    /// The asserted rdfs:subClassOf edges lying on some path from `sub` up to
    /// `sup`. For `sub == sup` one incident edge is returned so the class keeps
    /// its place in the hierarchy.
    pub fn subclass_edges_between(&self, sub: &Term, sup: &Term) -> Vec<Triple> {
        let (Some(a), Some(b)) = (self.dict.get(sub), self.dict.get(sup)) else {
            return Vec::new();
        };
        let Some(sc) = self.dict.get(&Term::iri(RDFS_SUBCLASS_OF)) else {
            return Vec::new();
        };
        if a == b {
            let any = range(&self.spo, &[a, sc])
                .first()
                .copied()
                .or_else(|| range(&self.pos, &[sc, a]).first().map(|&[p, o, s]| [s, p, o]));
            return any.map(|k| self.triple(k)).into_iter().collect();
        }
        let (Some(ups), Some(downs)) = (self.closure.superclasses(a), self.closure.subclasses(b)) else {
            return Vec::new();
        };
        let between: BTreeSet<Id> = ups.intersection(downs).copied().collect();
        let mut out = Vec::new();
        for &u in &between {
            for &[_, _, v] in range(&self.spo, &[u, sc]) {
                if u != v && between.contains(&v) {
                    out.push(self.triple([u, sc, v]));
                }
            }
        }
        out
    }

    /// Canonical owl:sameAs representative of `t` (the lexicographically least
    /// IRI of its component); non-members map to themselves.
    pub fn sameas_rep(&self, t: &Term) -> Term {
        self.sameas_rep.get(t).cloned().unwrap_or_else(|| t.clone())
    }

    /// Rewrites every sameAs component onto its representative and drops the
    /// IRI-to-IRI owl:sameAs statements.
    pub fn canonicalize_sameas(&self) -> TripleStore {
        if !self.triples().any(|t| is_sameas_link(&t)) {
            return self.clone();
        }
        let rewritten: Vec<Triple> = self
            .triples()
            .filter(|t| !is_sameas_link(t))
            .map(|t| Triple::new(self.sameas_rep(&t.s), self.sameas_rep(&t.p), self.sameas_rep(&t.o)))
            .collect();
        let mut out = TripleStore::from_triples(rewritten);
        out.sameas_rep = self.sameas_rep.clone();
        out
    }

    pub fn to_ntriples(&self) -> String {
        let mut out = String::with_capacity(self.len() * 80);
        for t in self.triples() {
            out.push_str(&serialize_ntriple(&t));
            out.push('\n');
        }
        out
    }
}

fn rename_blanks(t: Triple) -> Triple {
    let rename = |term: Term| match term {
        Term::Blank(l) if !l.starts_with(KB_BLANK_PREFIX) => Term::Blank(format!("{KB_BLANK_PREFIX}{l}")),
        other => other,
    };
    Triple::new(rename(t.s), t.p, rename(t.o))
}

/// The contiguous run of `index` whose keys start with `prefix`.
fn range<'a>(index: &'a [Key], prefix: &[Id]) -> &'a [Key] {
    let n = prefix.len();
    let lo = index.partition_point(|k| k[..n] < *prefix);
    let hi = lo + index[lo..].partition_point(|k| k[..n] == *prefix);
    &index[lo..hi]
}
