//! Two chained operators and a client on one in-process bus, fed by a
//! generated tweet stream. The first enriches mentions with the KB, the
//! second only looks at the stream.

use std::sync::Arc;

use dscep::bus::{Broker, Bus};
use dscep::engine::{KbAccessMode, LocalKb};
use dscep::operator::{run_client, run_operator, ClientConfig, CollectSink, OperatorConfig, WindowKind};
use dscep::query::parse_query;
use dscep::streamgen::{generate, replay, GenConfig, StreamLine};

const ARTISTS: &str = "
PREFIX : <http://dscep.example/ns#>
PREFIX rdf: <http://www.w3.org/1999/02/22-rdf-syntax-ns#>
PREFIX rdfs: <http://www.w3.org/2000/01/rdf-schema#>
CONSTRUCT { ?t :mentionsArtist ?e }
WHERE { ?t :mentions ?e . ?e rdf:type/rdfs:subClassOf* :MusicalArtist }
";

const POPULAR: &str = "
PREFIX : <http://dscep.example/ns#>
SELECT ?e (COUNT(?t) AS ?n)
WHERE { ?t :mentionsArtist ?e }
GROUP BY ?e
";

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let data = generate(&GenConfig { tweet_count: 400, ..GenConfig::default() });
    let lines: Vec<StreamLine> = data.events.iter().map(StreamLine::from_event).collect();
    let kb = LocalKb::from_ntriples(data.kb_ntriples(), false)?;

    let broker = Broker::new();
    let bus: Arc<dyn Bus> = Arc::new(broker.clone());

    let enrich = OperatorConfig::new("enrich", &["tweets"], "artists", parse_query(ARTISTS)?)
        .with_window(WindowKind::Count { max_triples: 500 })
        .with_kb(KbAccessMode::LocalMerge(kb))
        .with_engines(2);
    let popular = OperatorConfig::new("popular", &["artists"], "results", parse_query(POPULAR)?)
        .with_window(WindowKind::Time { width_ms: 60_000 });
    let ops = [run_operator(enrich, bus.clone(), None)?, run_operator(popular, bus.clone(), None)?];

    let sink = Arc::new(CollectSink::new());
    let client = run_client(ClientConfig::new("printer", &["results"]), bus, sink.clone())?;

    // Replay publishes the end-of-stream marker after the last event.
    let sent = replay(&lines, 0.0, "tweets", &broker)?;
    println!("replayed {} events / {} triples", sent.events, sent.triples);
    for op in ops {
        let r = op.join()?;
        println!("operator {}: {} windows, {} output events", r.operator_id, r.windows, r.output_events);
    }
    client.join()?;
    for (_, w) in sink.take().iter().take(3) {
        println!("client window {} has {} triples, first: {}", w.seq, w.triple_count, w.triples().next().map(|t| t.to_string()).unwrap_or_default());
    }
    Ok(())
}
