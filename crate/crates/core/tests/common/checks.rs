//! Single-instance oracle comparisons; `Err` describes the disagreement.

use std::collections::BTreeSet;

use dscep::engine::{evaluate_window, KbAccessMode, LocalKb};
use dscep::kb::TripleStore;
use dscep::query::to_query_string;
use dscep::rdf::{Term, Triple};

use super::instances::{random_dag, random_instance, random_sameas_graph};
use super::oracle::{canonical_output, canonicalize, reachable, Naive, SUBCLASS};

/// Runs instance `seed` through the engine and the oracle; `Err` describes
/// the disagreement.
pub fn engine_vs_oracle(seed: u64) -> Result<(), String> {
    let inst = random_instance(seed);
    let kb = LocalKb::from_ntriples(inst.kb_ntriples(), false).map_err(|e| e.to_string())?;
    let got = evaluate_window(&inst.query, &inst.window, &KbAccessMode::LocalMerge(kb)).map_err(|e| e.to_string())?;
    let want = Naive::new(&inst.window, &inst.kb).run(&inst.query);
    let (got, want) = (canonical_output(&got.output), canonical_output(&want));
    if got == want {
        Ok(())
    } else {
        Err(format!("seed {seed}\n{}\nengine: {got:#?}\noracle: {want:#?}", to_query_string(&inst.query)))
    }
}

pub fn closure_vs_reachability(seed: u64) -> Result<(), String> {
    let (nodes, edges) = random_dag(seed, 200);
    let store = TripleStore::from_triples(edges.iter().map(|(a, b)| Triple::new(a.clone(), Term::iri(SUBCLASS), b.clone())));
    for n in &nodes {
        let want = reachable(&edges, n);
        let got = store.superclasses_of(n);
        if got != want {
            return Err(format!("seed {seed}: supers of {n} differ: {got:?} vs {want:?}"));
        }
        let subs: BTreeSet<Term> = nodes.iter().filter(|m| reachable(&edges, m).contains(n)).cloned().collect();
        if store.subclasses_of(n) != subs {
            return Err(format!("seed {seed}: subs of {n} differ"));
        }
    }
    Ok(())
}

pub fn sameas_vs_union_find(seed: u64) -> Result<(), String> {
    let triples = random_sameas_graph(seed, 60);
    let (rep, want) = canonicalize(&triples);
    let text: String = triples.iter().map(|t| dscep::rdf::serialize_ntriple(t) + "\n").collect();
    let store = TripleStore::load_canonical(&text).map_err(|e| e.to_string())?;
    for (t, r) in &rep {
        if store.sameas_rep(t) != *r {
            return Err(format!("seed {seed}: {t} maps to {} not {r}", store.sameas_rep(t)));
        }
    }
    let got: BTreeSet<Triple> = store.triples().collect();
    if got != want {
        return Err(format!("seed {seed}: canonical triples differ"));
    }
    Ok(())
}
