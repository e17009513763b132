use std::collections::{BTreeSet, HashMap};

use petgraph::algo::tarjan_scc;
use petgraph::graphmap::DiGraphMap;

/// Reflexive-transitive rdfs:subClassOf closure over dictionary ids.
///
/// Cycles are collapsed with Tarjan's SCC pass so every member of a cycle
/// ends up with identical super- and subclass sets.
#[derive(Debug, Clone, Default)]
pub(crate) struct SubclassClosure {
    supers: HashMap<u32, BTreeSet<u32>>,
    subs: HashMap<u32, BTreeSet<u32>>,
}

impl SubclassClosure {
    /// `edges` are (sub, super) pairs.
    pub(crate) fn compute(edges: &[(u32, u32)]) -> Self {
        if edges.is_empty() {
            return Self::default();
        }
        let graph: DiGraphMap<u32, ()> = DiGraphMap::from_edges(edges.iter().copied());
        // Tarjan yields components sinks-first, so successors are done before us.
        let components = tarjan_scc(&graph);
        let mut comp_of: HashMap<u32, usize> = HashMap::new();
        for (i, comp) in components.iter().enumerate() {
            for &n in comp {
                comp_of.insert(n, i);
            }
        }
        let mut comp_supers: Vec<BTreeSet<u32>> = Vec::with_capacity(components.len());
        for (i, comp) in components.iter().enumerate() {
            let mut set: BTreeSet<u32> = comp.iter().copied().collect();
            for &n in comp {
                for m in graph.neighbors(n) {
                    let j = comp_of[&m];
                    if j != i {
                        set.extend(comp_supers[j].iter().copied());
                    }
                }
            }
            comp_supers.push(set);
        }

        let mut supers = HashMap::with_capacity(comp_of.len());
        let mut subs: HashMap<u32, BTreeSet<u32>> = HashMap::with_capacity(comp_of.len());
        for (&n, &c) in &comp_of {
            let up = comp_supers[c].clone();
            for &u in &up {
                subs.entry(u).or_default().insert(n);
            }
            supers.insert(n, up);
        }
        SubclassClosure { supers, subs }
    }

    pub(crate) fn contains(&self, id: u32) -> bool {
        self.supers.contains_key(&id)
    }

    pub(crate) fn superclasses(&self, id: u32) -> Option<&BTreeSet<u32>> {
        self.supers.get(&id)
    }

    pub(crate) fn subclasses(&self, id: u32) -> Option<&BTreeSet<u32>> {
        self.subs.get(&id)
    }

    /// (sub, super) for every entailed pair, reflexive ones included.
    pub(crate) fn pairs(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        self.supers.iter().flat_map(|(&a, ups)| ups.iter().map(move |&b| (a, b)))
    }
}
