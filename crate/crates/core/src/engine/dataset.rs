use std::cell::{Cell, RefCell};
use std::collections::BTreeSet;

use crate::kb::{TripleStore, UsageTracker};
use crate::rdf::vocab::{RDFS_SUBCLASS_OF, RDF_TYPE};
use crate::rdf::{Term, Triple};

use super::Window;

/// The graph a query sees: window triples layered over an optional KB, with
/// rdf:type and rdfs:subClassOf entailed through the KB class hierarchy.
///
/// Typing triples (from either side) are lifted along the KB subclass
/// closure; rdfs:subClassOf patterns see the closure pairs (reflexive ones for
/// hierarchy members included) plus any raw window edges. Everything else is
/// matched as stored. Results are sets.
pub struct Dataset<'a> {
    window: TripleStore,
    kb: Option<&'a TripleStore>,
    touched: Cell<u64>,
    tracker: Option<&'a RefCell<UsageTracker>>,
    rdf_type: Term,
    subclass_of: Term,
}

impl<'a> Dataset<'a> {
    pub fn new(window: TripleStore, kb: Option<&'a TripleStore>) -> Self {
        Dataset {
            window,
            kb,
            touched: Cell::new(0),
            tracker: None,
            rdf_type: Term::iri(RDF_TYPE),
            subclass_of: Term::iri(RDFS_SUBCLASS_OF),
        }
    }

    /// Window triples with blank labels made unique per event.
    pub fn from_window(w: &Window, kb: Option<&'a TripleStore>) -> Self {
        let mut triples = Vec::with_capacity(w.triple_count);
        for (i, ev) in w.events.iter().enumerate() {
            let rename = |t: &Term| match t {
                Term::Blank(l) => Term::Blank(format!("w{i}.{l}")),
                other => other.clone(),
            };
            for tt in ev.triples() {
                let t = &tt.triple;
                triples.push(Triple::new(rename(&t.s), t.p.clone(), rename(&t.o)));
            }
        }
        Self::new(TripleStore::from_triples(triples), kb)
    }

    pub fn with_tracker(mut self, tracker: &'a RefCell<UsageTracker>) -> Self {
        self.tracker = Some(tracker);
        self
    }

    /// KB triples returned by lookups plus closure pairs used.
    pub fn kb_triples_touched(&self) -> u64 {
        self.touched.get()
    }

    pub fn kb(&self) -> Option<&'a TripleStore> {
        self.kb
    }

    pub fn window(&self) -> &TripleStore {
        &self.window
    }

    pub fn is_subclass_of(&self, p: &Term) -> bool {
        *p == self.subclass_of
    }

    pub fn is_type(&self, p: &Term) -> bool {
        *p == self.rdf_type
    }

    fn kb_raw(&self, s: Option<&Term>, p: Option<&Term>, o: Option<&Term>) -> Vec<Triple> {
        let Some(kb) = self.kb else { return Vec::new() };
        let found = kb.match_terms(s, p, o);
        self.touched.set(self.touched.get() + found.len() as u64);
        if let Some(tr) = self.tracker {
            let mut tr = tr.borrow_mut();
            for t in &found {
                tr.record(t.clone());
            }
        }
        found
    }

    fn raw(&self, s: Option<&Term>, p: Option<&Term>, o: Option<&Term>) -> Vec<Triple> {
        let mut out = self.window.match_terms(s, p, o);
        out.extend(self.kb_raw(s, p, o));
        out
    }

    /// Records that the entailment `sub ⊑ sup` was relied on.
    pub fn note_pair(&self, sub: &Term, sup: &Term) {
        let Some(kb) = self.kb else { return };
        self.touched.set(self.touched.get() + 1);
        if let Some(tr) = self.tracker {
            let mut tr = tr.borrow_mut();
            for e in kb.subclass_edges_between(sub, sup) {
                tr.record(e);
            }
        }
    }

    /// KB superclasses of `c`, always including `c`.
    pub fn supers(&self, c: &Term) -> BTreeSet<Term> {
        match self.kb {
            Some(kb) => kb.superclasses_of(c),
            None => BTreeSet::from([c.clone()]),
        }
    }

    /// KB subclasses of `c`, always including `c`.
    pub fn subs(&self, c: &Term) -> BTreeSet<Term> {
        match self.kb {
            Some(kb) => kb.subclasses_of(c),
            None => BTreeSet::from([c.clone()]),
        }
    }

    fn is_hierarchy_node(&self, c: &Term) -> bool {
        self.kb.is_some_and(|kb| kb.is_hierarchy_node(c))
    }

    /// Whether the window carries its own subclass edges (the closure
    /// shortcut in path evaluation is only exact without them).
    pub fn window_has_subclass_edges(&self) -> bool {
        self.window.count_matches(None, Some(&self.subclass_of), None) > 0
    }

    /// Entailed lookup; `None` positions are wildcards.
    pub fn match_terms(&self, s: Option<&Term>, p: Option<&Term>, o: Option<&Term>) -> Vec<Triple> {
        let set: BTreeSet<Triple> = match p {
            Some(p) if self.is_type(p) => self.match_type(s, o),
            Some(p) if self.is_subclass_of(p) => self.match_subclass(s, o),
            Some(_) => self.raw(s, p, o).into_iter().collect(),
            None => {
                let mut set: BTreeSet<Triple> = self
                    .raw(s, None, o)
                    .into_iter()
                    .filter(|t| !self.is_type(&t.p) && !self.is_subclass_of(&t.p))
                    .collect();
                set.extend(self.match_type(s, o));
                set.extend(self.match_subclass(s, o));
                set
            }
        };
        set.into_iter().collect()
    }

    fn match_type(&self, s: Option<&Term>, o: Option<&Term>) -> BTreeSet<Triple> {
        let ty = &self.rdf_type;
        let mut out = BTreeSet::new();
        match (s, o) {
            (Some(s), Some(c)) => {
                for t in self.raw(Some(s), Some(ty), None) {
                    if t.o == *c {
                        out.insert(t);
                    } else if self.supers(&t.o).contains(c) {
                        self.note_pair(&t.o, c);
                        out.insert(Triple::new(s.clone(), ty.clone(), c.clone()));
                    }
                }
            }
            (None, Some(c)) => {
                for d in self.subs(c) {
                    let found = self.raw(None, Some(ty), Some(&d));
                    if d != *c && !found.is_empty() {
                        self.note_pair(&d, c);
                    }
                    out.extend(found.into_iter().map(|t| Triple::new(t.s, ty.clone(), c.clone())));
                }
            }
            (s, None) => {
                for t in self.raw(s, Some(ty), None) {
                    for sup in self.supers(&t.o) {
                        if sup != t.o {
                            self.note_pair(&t.o, &sup);
                        }
                        out.insert(Triple::new(t.s.clone(), ty.clone(), sup));
                    }
                }
            }
        }
        out
    }

    fn match_subclass(&self, s: Option<&Term>, o: Option<&Term>) -> BTreeSet<Triple> {
        let sc = &self.subclass_of;
        let mut out: BTreeSet<Triple> = self.window.match_terms(s, Some(sc), o).into_iter().collect();
        let mut emit = |a: &Term, b: &Term| {
            self.note_pair(a, b);
            out.insert(Triple::new(a.clone(), sc.clone(), b.clone()));
        };
        match (s, o) {
            (Some(a), Some(b)) => {
                if self.is_hierarchy_node(a) && self.supers(a).contains(b) {
                    emit(a, b);
                }
            }
            (Some(a), None) => {
                if self.is_hierarchy_node(a) {
                    for b in self.supers(a) {
                        emit(a, &b);
                    }
                }
            }
            (None, Some(b)) => {
                if self.is_hierarchy_node(b) {
                    for a in self.subs(b) {
                        emit(&a, b);
                    }
                }
            }
            (None, None) => {
                if let Some(kb) = self.kb {
                    for (a, b) in kb.subclass_pairs() {
                        emit(&a, &b);
                    }
                }
            }
        }
        out
    }

    /// Entailed classes of `s` that lie in `candidates`; only the witnesses
    /// are recorded.
    pub fn types_within(&self, s: &Term, candidates: &BTreeSet<Term>) -> BTreeSet<Term> {
        let mut out = BTreeSet::new();
        for t in self.raw(Some(s), Some(&self.rdf_type), None) {
            for sup in self.supers(&t.o) {
                if candidates.contains(&sup) && !out.contains(&sup) {
                    if sup != t.o {
                        self.note_pair(&t.o, &sup);
                    }
                    out.insert(sup);
                }
            }
        }
        out
    }
}
