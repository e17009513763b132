//! Terms, N-Triples lines and the JSON wire form of stream events.

use dscep::rdf::{decode_event, encode_event, parse_ntriple, serialize_ntriple, GraphEvent, StreamEvent, Term, Triple};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let line = r#"<http://ex.org/tweet/1> <http://ex.org/text> "hello \"world\""@en ."#;
    let t = parse_ntriple(line)?;
    println!("parsed:     {t}");
    println!("serialized: {}", serialize_ntriple(&t));

    let score = Triple::new(
        Term::iri("http://ex.org/tweet/1"),
        Term::iri("http://ex.org/score"),
        Term::typed("0.75", "http://www.w3.org/2001/XMLSchema#decimal"),
    );
    score.validate()?;

    // A graph event carries one timestamp for all of its triples.
    let event = GraphEvent::stamped("tweet-1", vec![t, score], 1_000)?;
    let bytes = encode_event(&StreamEvent::Graph(event));
    println!("wire:       {}", String::from_utf8_lossy(&bytes));
    match decode_event(&bytes)? {
        StreamEvent::Graph(g) => println!("decoded {} triples at ts {}", g.len(), g.event_ts()),
        StreamEvent::Triple(t) => println!("decoded single triple {}", t.triple),
    }
    Ok(())
}
