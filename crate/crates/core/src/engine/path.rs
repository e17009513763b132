use std::collections::{BTreeSet, VecDeque};

use crate::query::{PathModifier, PathStep};
use crate::rdf::Term;

use super::dataset::Dataset;

/// Upper bound on nodes visited by one `*`/`+` expansion over a plain IRI.
pub const PATH_BFS_LIMIT: usize = 10_000;

#[derive(Clone, Copy)]
enum Dir {
    Forward,
    Backward,
}

fn one_hop(ds: &Dataset<'_>, x: &Term, p: &Term, dir: Dir) -> BTreeSet<Term> {
    match dir {
        Dir::Forward => ds.match_terms(Some(x), Some(p), None).into_iter().map(|t| t.o).collect(),
        Dir::Backward => ds.match_terms(None, Some(p), Some(x)).into_iter().map(|t| t.s).collect(),
    }
}

fn expand(ds: &Dataset<'_>, x: &Term, step: &PathStep, dir: Dir) -> BTreeSet<Term> {
    let p = &step.predicate;
    let mut out = match step.modifier {
        PathModifier::One => return one_hop(ds, x, p, dir),
        PathModifier::ZeroOrMore => BTreeSet::from([x.clone()]),
        PathModifier::OneOrMore => BTreeSet::new(),
    };
    let first = one_hop(ds, x, p, dir);
    // The KB closure is already transitive; with no window edges one hop is all.
    if ds.is_subclass_of(p) && !ds.window_has_subclass_edges() {
        out.extend(first);
        return out;
    }
    let mut seen: BTreeSet<Term> = BTreeSet::new();
    let mut queue: VecDeque<Term> = first.into_iter().collect();
    while let Some(n) = queue.pop_front() {
        if !seen.insert(n.clone()) {
            continue;
        }
        if seen.len() >= PATH_BFS_LIMIT {
            log::warn!("path expansion over {p} stopped at {PATH_BFS_LIMIT} nodes");
            break;
        }
        for m in one_hop(ds, &n, p, dir) {
            if !seen.contains(&m) {
                queue.push_back(m);
            }
        }
    }
    out.extend(seen);
    out
}

fn walk(ds: &Dataset<'_>, start: &Term, steps: &[PathStep], dir: Dir) -> BTreeSet<Term> {
    let mut frontier = BTreeSet::from([start.clone()]);
    let ordered: Vec<&PathStep> = match dir {
        Dir::Forward => steps.iter().collect(),
        Dir::Backward => steps.iter().rev().collect(),
    };
    for step in ordered {
        let mut next = BTreeSet::new();
        for x in &frontier {
            next.extend(expand(ds, x, step, dir));
        }
        frontier = next;
        if frontier.is_empty() {
            break;
        }
    }
    frontier
}

/// Distinct (subject, object) pairs connected by the step sequence.
pub fn eval_path(ds: &Dataset<'_>, s: Option<&Term>, steps: &[PathStep], o: Option<&Term>) -> Vec<(Term, Term)> {
    match (s, o) {
        (Some(s), Some(o)) => {
            if connects(ds, s, steps, o) {
                vec![(s.clone(), o.clone())]
            } else {
                Vec::new()
            }
        }
        (Some(s), None) => walk(ds, s, steps, Dir::Forward).into_iter().map(|y| (s.clone(), y)).collect(),
        (None, Some(o)) => walk(ds, o, steps, Dir::Backward).into_iter().map(|x| (x, o.clone())).collect(),
        (None, None) => {
            let first = &steps[0];
            let mut starts: BTreeSet<Term> = BTreeSet::new();
            for t in ds.match_terms(None, Some(&first.predicate), None) {
                if first.modifier == PathModifier::ZeroOrMore {
                    starts.insert(t.o);
                }
                starts.insert(t.s);
            }
            let mut out = Vec::new();
            for x in starts {
                for y in walk(ds, &x, steps, Dir::Forward) {
                    out.push((x.clone(), y));
                }
            }
            out
        }
    }
}

/// Both ends fixed: walk back from the object to the first step, then probe
/// the first step from the subject so only witnesses are looked up.
fn connects(ds: &Dataset<'_>, s: &Term, steps: &[PathStep], o: &Term) -> bool {
    let (first, rest) = steps.split_first().expect("paths have at least one step");
    let candidates = if rest.is_empty() { BTreeSet::from([o.clone()]) } else { walk(ds, o, rest, Dir::Backward) };
    if candidates.is_empty() {
        return false;
    }
    if first.modifier == PathModifier::One && ds.is_type(&first.predicate) {
        return !ds.types_within(s, &candidates).is_empty();
    }
    if first.modifier == PathModifier::One && candidates.len() <= 8 {
        return candidates.iter().any(|c| !ds.match_terms(Some(s), Some(&first.predicate), Some(c)).is_empty());
    }
    let reached = expand(ds, s, first, Dir::Forward);
    reached.iter().any(|y| candidates.contains(y))
}
