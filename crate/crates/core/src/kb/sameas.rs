use std::cmp::Ordering;
use std::collections::{HashMap, VecDeque};

use crate::rdf::vocab::OWL_SAME_AS;
use crate::rdf::{Term, Triple};

/// An owl:sameAs statement linking two IRIs. Links touching blank nodes or
/// literals are kept as ordinary data.
pub(crate) fn is_sameas_link(t: &Triple) -> bool {
    t.p.as_iri() == Some(OWL_SAME_AS) && matches!((&t.s, &t.o), (Term::Iri(_), Term::Iri(_)))
}

/// Maps every node of every connected component of `links` to the least
/// member of its component under `cmp`.
pub(crate) fn component_representatives(
    links: &[(u32, u32)],
    cmp: impl Fn(u32, u32) -> Ordering,
) -> HashMap<u32, u32> {
    let mut adj: HashMap<u32, Vec<u32>> = HashMap::new();
    for &(a, b) in links {
        adj.entry(a).or_default().push(b);
        adj.entry(b).or_default().push(a);
    }
    let mut nodes: Vec<u32> = adj.keys().copied().collect();
    nodes.sort_unstable();
    let mut rep: HashMap<u32, u32> = HashMap::with_capacity(nodes.len());
    for start in nodes {
        if rep.contains_key(&start) {
            continue;
        }
        let mut members = vec![start];
        let mut queue = VecDeque::from([start]);
        rep.insert(start, start);
        while let Some(n) = queue.pop_front() {
            for &m in &adj[&n] {
                if let std::collections::hash_map::Entry::Vacant(e) = rep.entry(m) {
                    e.insert(start);
                    members.push(m);
                    queue.push_back(m);
                }
            }
        }
        let least = members.iter().copied().min_by(|&a, &b| cmp(a, b)).expect("non-empty component");
        for m in members {
            rep.insert(m, least);
        }
    }
    rep
}
