//! A KB served over TCP and queried through a SERVICE block, compared with
//! evaluating the same window against a local copy.

use std::collections::BTreeMap;
use std::sync::Arc;

use dscep::engine::{evaluate_window, KbAccessMode, LocalKb};
use dscep::kb::{serve, TripleStore};
use dscep::operator::{cut_windows, WindowKind};
use dscep::query::parse_query;
use dscep::streamgen::{generate, GenConfig};

const PREFIXES: &str = "
PREFIX : <http://dscep.example/ns#>
PREFIX rdf: <http://www.w3.org/1999/02/22-rdf-syntax-ns#>
PREFIX rdfs: <http://www.w3.org/2000/01/rdf-schema#>
";

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let data = generate(&GenConfig { tweet_count: 200, ..GenConfig::default() });
    let store = Arc::new(TripleStore::load_canonical(&data.kb_ntriples())?);
    let service = serve(store.clone(), "127.0.0.1:0")?;
    println!("KB service with {} triples on {}", store.len(), service.local_addr());

    let remote = parse_query(&format!("{PREFIXES} SELECT ?t ?e WHERE {{ ?t :mentions ?e SERVICE <kb> {{ ?e rdf:type :MusicalArtist }} }}"))?;
    let local = parse_query(&format!("{PREFIXES} SELECT ?t ?e WHERE {{ ?t :mentions ?e . ?e rdf:type :MusicalArtist }}"))?;
    let endpoints = BTreeMap::from([("kb".to_string(), service.local_addr().to_string())]);
    let via_service = KbAccessMode::RemoteService(endpoints);
    let via_local = KbAccessMode::LocalMerge(LocalKb::new(store));

    for w in cut_windows(data.events, WindowKind::Count { max_triples: 1_000 }).iter().take(3) {
        let a = evaluate_window(&remote, w, &via_service)?;
        let b = evaluate_window(&local, w, &via_local)?;
        println!(
            "window {}: service {} rows in {:.2} ms ({} KB triples), local {} rows in {:.2} ms",
            w.seq,
            a.len(),
            a.eval_millis,
            a.kb_triples_touched,
            b.len(),
            b.eval_millis
        );
    }
    service.shutdown();
    Ok(())
}
