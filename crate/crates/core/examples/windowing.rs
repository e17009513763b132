//! Count and time windows over an ordered stream, and the k-way merge that
//! orders several input topics into one.

use dscep::operator::{cut_windows, merge_order, WindowKind};
use dscep::rdf::{GraphEvent, Term, Triple};

fn event(id: &str, n: usize, ts: i64) -> GraphEvent {
    let triples = (0..n)
        .map(|i| Triple::new(Term::iri(format!("http://ex.org/{id}")), Term::iri("http://ex.org/p"), Term::literal(i.to_string())))
        .collect();
    GraphEvent::stamped(id, triples, ts).expect("valid event")
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let left = vec![event("a1", 3, 0), event("a2", 2, 40), event("a3", 6, 130)];
    let right = vec![event("b1", 1, 40), event("b2", 4, 90)];
    let merged = merge_order(vec![("left".into(), left), ("right".into(), right)])?;
    let order: Vec<&str> = merged.iter().map(GraphEvent::graph_id).collect();
    println!("merged order: {}", order.join(" "));

    // Events are never split; the 6-triple event overflows the cap alone.
    for w in cut_windows(merged.clone(), WindowKind::Count { max_triples: 5 }) {
        let ids: Vec<&str> = w.events.iter().map(GraphEvent::graph_id).collect();
        println!("count window {}: {:?} ({} triples)", w.seq, ids, w.triples().count());
    }
    for w in cut_windows(merged, WindowKind::Time { width_ms: 50 }) {
        let ids: Vec<&str> = w.events.iter().map(GraphEvent::graph_id).collect();
        println!("time window {}: {:?}", w.seq, ids);
    }
    Ok(())
}
