//! Parses a continuous query and evaluates it window by window against a
//! stream plus a local KB.

use std::sync::Arc;

use dscep::engine::{Engine, KbAccessMode, LocalKb, QueryOutput};
use dscep::operator::{cut_windows, WindowKind};
use dscep::query::{parse_query, to_query_string};
use dscep::rdf::{GraphEvent, Term, Triple};

const KB: &str = r#"
<http://ex.org/Guitarist> <http://www.w3.org/2000/01/rdf-schema#subClassOf> <http://ex.org/Musician> .
<http://ex.org/jimi> <http://www.w3.org/1999/02/22-rdf-syntax-ns#type> <http://ex.org/Guitarist> .
<http://ex.org/nina> <http://www.w3.org/1999/02/22-rdf-syntax-ns#type> <http://ex.org/Musician> .
<http://ex.org/paris> <http://www.w3.org/1999/02/22-rdf-syntax-ns#type> <http://ex.org/City> .
"#;

const QUERY: &str = "
PREFIX : <http://ex.org/>
PREFIX rdf: <http://www.w3.org/1999/02/22-rdf-syntax-ns#>
PREFIX rdfs: <http://www.w3.org/2000/01/rdf-schema#>
SELECT ?who (COUNT(?t) AS ?n)
WHERE { ?t :mentions ?who . ?who rdf:type/rdfs:subClassOf* :Musician }
GROUP BY ?who
";

fn mention(tweet: u32, who: &str, ts: i64) -> GraphEvent {
    let t = Triple::new(
        Term::iri(format!("http://ex.org/tweet/{tweet}")),
        Term::iri("http://ex.org/mentions"),
        Term::iri(format!("http://ex.org/{who}")),
    );
    GraphEvent::stamped(format!("g{tweet}"), vec![t], ts).expect("valid event")
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let query = parse_query(QUERY)?;
    println!("normalised query:\n{}", to_query_string(&query));

    let kb = KbAccessMode::LocalMerge(LocalKb::from_ntriples(KB, false)?);
    let mut engine = Engine::new(Arc::new(query), kb)?;

    let events = vec![
        mention(1, "jimi", 10),
        mention(2, "paris", 20),
        mention(3, "nina", 1_010),
        mention(4, "jimi", 1_020),
        mention(5, "jimi", 1_500),
    ];
    for w in cut_windows(events, WindowKind::Time { width_ms: 1_000 }) {
        let r = engine.evaluate(&w)?;
        println!("window {} ({} triples, {:.3} ms)", r.window_seq, w.triples().count(), r.eval_millis);
        if let QueryOutput::Solutions(rows) = &r.output {
            for row in rows {
                println!("  {row}");
            }
        }
    }
    Ok(())
}
