//! Operators and clients wired over the in-process bus.

use std::collections::BTreeSet;
use std::sync::Arc;

use dscep::bus::{Broker, Bus, EOS_PAYLOAD};
use dscep::engine::{KbAccessMode, LocalKb};
use dscep::kb::TripleStore;
use dscep::operator::{
    run_client, run_operator, ClientConfig, CollectSink, CsvSink, OperatorConfig, OperatorError, Window, WindowKind,
};
use dscep::query::parse_query;
use dscep::rdf::wire::encode_graph_event;
use dscep::rdf::{GraphEvent, Term, Triple};

const PFX: &str = "PREFIX : <http://ex/>\nPREFIX rdf: <http://www.w3.org/1999/02/22-rdf-syntax-ns#>\nPREFIX rdfs: <http://www.w3.org/2000/01/rdf-schema#>\n";

fn iri(s: &str) -> Term {
    Term::iri(format!("http://ex/{s}"))
}

fn tweet(i: usize, ts: i64, entity: &str) -> GraphEvent {
    let t = iri(&format!("tw{i}"));
    GraphEvent::stamped(
        format!("tw{i}"),
        vec![
            Triple::new(t.clone(), iri("mentions"), iri(entity)),
            Triple::new(t, iri("likes"), Term::literal(i.to_string())),
        ],
        ts,
    )
    .unwrap()
}

fn publish_all(bus: &Broker, topic: &str, events: &[GraphEvent]) {
    for e in events {
        bus.publish(topic, &encode_graph_event(e)).unwrap();
    }
    bus.publish(topic, EOS_PAYLOAD).unwrap();
}

fn identity(id: &str, input: &str, output: &str, engines: usize, cap: usize) -> OperatorConfig {
    let q = parse_query(&format!("{PFX}CONSTRUCT {{ ?s ?p ?o }} WHERE {{ ?s ?p ?o }}")).unwrap();
    OperatorConfig::new(id, &[input], output, q)
        .with_engines(engines)
        .with_window(WindowKind::Count { max_triples: cap })
}

fn collect(bus: &Broker, topic: &str, window: WindowKind) -> (dscep::operator::ClientHandle, Arc<CollectSink>) {
    let sink = Arc::new(CollectSink::new());
    let client = run_client(ClientConfig::new(format!("client-{topic}"), &[topic]).with_window(window), Arc::new(bus.clone()), sink.clone()).unwrap();
    (client, sink)
}

fn spo(windows: &[(usize, Window)]) -> Vec<(String, i64)> {
    let mut v: Vec<(String, i64)> = windows
        .iter()
        .flat_map(|(_, w)| w.events.iter().flat_map(|e| e.triples().iter().map(|t| (format!("{:?}", t.triple), t.ts))))
        .collect();
    v.sort();
    v
}

#[test]
fn identity_operator_reproduces_windows() {
    let bus = Broker::new();
    let op = run_operator(identity("id", "in", "out", 1, 4), Arc::new(bus.clone()), None).unwrap();
    let (client, sink) = collect(&bus, "out", WindowKind::Time { width_ms: 1 });
    let events: Vec<_> = (0..10).map(|i| tweet(i, 100 + i as i64, "adele")).collect();
    publish_all(&bus, "in", &events);
    let report = op.join().unwrap();
    client.join().unwrap();
    assert_eq!(report.windows, 5);
    let seqs: Vec<u64> = report.measurements.iter().map(|m| m.window_seq).collect();
    assert_eq!(seqs, (0..5).collect::<Vec<_>>());

    let got = sink.take();
    assert_eq!(got.len(), 5);
    let mut want: Vec<(String, i64)> = events
        .chunks(2)
        .flat_map(|pair| {
            let high = pair[1].event_ts();
            pair.iter().flat_map(move |e| e.triples().iter().map(move |t| (format!("{:?}", t.triple), high)))
        })
        .collect();
    want.sort();
    assert_eq!(spo(&got), want);
    assert!(got.iter().all(|(_, w)| w.events.iter().all(|e| e.graph_id().starts_with("id/"))));
}

#[test]
fn parallel_engines_partition_and_match_single() {
    let events: Vec<_> = (0..200).map(|i| tweet(i, 10 + i as i64, "adele")).collect();
    let mut outputs = Vec::new();
    for engines in [1, 2, 4] {
        let bus = Broker::new();
        let op = run_operator(identity("par", "in", "out", engines, 4), Arc::new(bus.clone()), None).unwrap();
        let (client, sink) = collect(&bus, "out", WindowKind::Time { width_ms: 1 });
        publish_all(&bus, "in", &events);
        let report = op.join().unwrap();
        client.join().unwrap();
        assert_eq!(report.windows, 100);
        let seqs: BTreeSet<u64> = report.measurements.iter().map(|m| m.window_seq).collect();
        assert_eq!(seqs.len(), 100);
        let used: BTreeSet<usize> = report.measurements.iter().map(|m| m.engine_id).collect();
        assert!(used.iter().all(|&e| e < engines));
        outputs.push(spo(&sink.take()));
    }
    assert_eq!(outputs[0], outputs[1]);
    assert_eq!(outputs[0], outputs[2]);
}

#[test]
fn output_timestamps_are_monotone() {
    let bus = Broker::new();
    let op = run_operator(identity("mono", "in", "out", 3, 5), Arc::new(bus.clone()), None).unwrap();
    let mut raw = bus.subscribe("out", "watch", "w").unwrap();
    let events: Vec<_> = (0..90).map(|i| tweet(i, 1000 + 3 * i as i64, "x")).collect();
    publish_all(&bus, "in", &events);
    op.join().unwrap();
    let mut last = i64::MIN;
    let mut count = 0;
    while let Some(m) = raw.next(std::time::Duration::ZERO).unwrap() {
        if dscep::bus::is_eos(&m.payload) {
            break;
        }
        let dscep::rdf::StreamEvent::Graph(g) = dscep::rdf::wire::decode_event(&m.payload).unwrap() else { panic!() };
        assert!(g.event_ts() >= last);
        last = g.event_ts();
        count += 1;
    }
    assert_eq!(count, 180);
}

#[test]
fn chained_operators_with_kb() {
    let kb = TripleStore::from_triples(vec![
        Triple::new(iri("Singer"), Term::iri(dscep::rdf::vocab::RDFS_SUBCLASS_OF), iri("MusicalArtist")),
        Triple::new(iri("adele"), Term::iri(dscep::rdf::vocab::RDF_TYPE), iri("Singer")),
    ]);
    let a = parse_query(&format!(
        "{PFX}CONSTRUCT {{ ?t :mentionsArtist ?e }} WHERE {{ ?t :mentions ?e . ?e rdf:type/rdfs:subClassOf* :MusicalArtist }}"
    ))
    .unwrap();
    let b = parse_query(&format!("{PFX}SELECT ?t WHERE {{ ?t :mentionsArtist ?e }}")).unwrap();
    let bus = Broker::new();
    let shared: Arc<dyn Bus> = Arc::new(bus.clone());
    let op_a = run_operator(
        OperatorConfig::new("A", &["tweets"], "artists", a).with_kb(KbAccessMode::LocalMerge(LocalKb::new(Arc::new(kb)))),
        shared.clone(),
        None,
    )
    .unwrap();
    let op_b = run_operator(
        OperatorConfig::new("B", &["artists"], "rows", b).with_window(WindowKind::Time { width_ms: 1 }),
        shared,
        None,
    )
    .unwrap();
    let (client, sink) = collect(&bus, "rows", WindowKind::Time { width_ms: 1 });
    let events: Vec<_> = (0..6).map(|i| tweet(i, i as i64, if i % 2 == 0 { "adele" } else { "nobody" })).collect();
    publish_all(&bus, "tweets", &events);
    let ra = op_a.join().unwrap();
    op_b.join().unwrap();
    client.join().unwrap();
    assert!(ra.measurements.iter().all(|m| m.kb_triples_touched > 0));
    let rows: Vec<String> = sink
        .take()
        .iter()
        .flat_map(|(_, w)| w.triples().map(|t| t.o.to_string()).collect::<Vec<_>>())
        .collect();
    assert_eq!(rows.len(), 3);
}

#[test]
fn two_inputs_are_merged_in_time_order() {
    let bus = Broker::new();
    let q = parse_query(&format!("{PFX}CONSTRUCT {{ ?s ?p ?o }} WHERE {{ ?s ?p ?o }}")).unwrap();
    let cfg = OperatorConfig::new("m", &["b", "a"], "out", q).with_window(WindowKind::Count { max_triples: 2 });
    let op = run_operator(cfg, Arc::new(bus.clone()), None).unwrap();
    let (client, sink) = collect(&bus, "out", WindowKind::Time { width_ms: 1 });
    let a: Vec<_> = [1, 4, 6].iter().map(|&ts| tweet(ts as usize, ts, "a")).collect();
    let b: Vec<_> = [2, 3, 6].iter().map(|&ts| tweet(100 + ts as usize, ts, "b")).collect();
    publish_all(&bus, "b", &b);
    publish_all(&bus, "a", &a);
    op.join().unwrap();
    client.join().unwrap();
    let highs: Vec<i64> = sink.take().iter().map(|(_, w)| w.high_ts).collect();
    assert_eq!(highs, [1, 2, 3, 4, 6, 6].iter().copied().collect::<BTreeSet<_>>().into_iter().collect::<Vec<_>>());
}

#[test]
fn client_scripts_partition_windows() {
    let bus = Broker::new();
    let sink = Arc::new(CollectSink::new());
    let cfg = ClientConfig::new("c", &["s"]).with_scripts(3).with_window(WindowKind::Count { max_triples: 2 });
    let client = run_client(cfg, Arc::new(bus.clone()), sink.clone()).unwrap();
    let events: Vec<_> = (0..60).map(|i| tweet(i, i as i64, "x")).collect();
    publish_all(&bus, "s", &events);
    let report = client.join().unwrap();
    assert_eq!(report.windows(), 60);
    let seqs: Vec<u64> = sink.take().iter().map(|(_, w)| w.seq).collect();
    assert_eq!(seqs, (0..60).collect::<Vec<_>>());
}

#[test]
fn csv_sink_rows() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("windows.csv");
    let bus = Broker::new();
    let sink = Arc::new(CsvSink::create(&path).unwrap());
    let client = run_client(ClientConfig::new("c", &["s"]).with_window(WindowKind::Time { width_ms: 10 }), Arc::new(bus.clone()), sink).unwrap();
    publish_all(&bus, "s", &[tweet(0, 1, "x"), tweet(1, 9, "x"), tweet(2, 11, "x")]);
    client.join().unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text, format!("{}\n0,2,4,1,9,0\n1,1,2,11,11,0\n", CsvSink::HEADER));
}

#[test]
fn late_client_sees_nothing_before_join() {
    let bus = Broker::new();
    bus.publish("s", &encode_graph_event(&tweet(0, 1, "x"))).unwrap();
    let sink = Arc::new(CollectSink::new());
    let client = run_client(ClientConfig::new("late", &["s"]), Arc::new(bus.clone()), sink.clone()).unwrap();
    publish_all(&bus, "s", &[tweet(1, 2, "x")]);
    client.join().unwrap();
    let got = sink.take();
    assert_eq!(got.len(), 1);
    assert_eq!(got[0].1.events[0].graph_id(), "tw1");
}

#[test]
fn non_monotone_input_fails_the_operator() {
    let bus = Broker::new();
    let op = run_operator(identity("bad", "in", "out", 1, 100), Arc::new(bus.clone()), None).unwrap();
    publish_all(&bus, "in", &[tweet(0, 5, "x"), tweet(1, 4, "x")]);
    match op.join() {
        Err(OperatorError::NonMonotonic { topic, previous: 5, got: 4 }) => assert_eq!(topic, "in"),
        other => panic!("{other:?}"),
    }
}

#[test]
fn unreachable_service_fails_at_startup() {
    let q = parse_query(&format!("{PFX}SELECT ?e WHERE {{ ?t :mentions ?e SERVICE <kb> {{ ?e rdf:type :X }} }}")).unwrap();
    let endpoints = [("kb".to_string(), "127.0.0.1:1".to_string())].into();
    let cfg = OperatorConfig::new("svc", &["in"], "out", q).with_kb(KbAccessMode::RemoteService(endpoints));
    let err = run_operator(cfg, Arc::new(Broker::new()), None).err().unwrap();
    assert!(err.to_string().contains("kb"), "{err}");
}

#[test]
fn stop_ends_an_idle_operator() {
    let bus = Broker::new();
    let op = run_operator(identity("idle", "in", "out", 2, 10), Arc::new(bus), None).unwrap();
    op.stop();
    assert!(matches!(op.join(), Err(OperatorError::Stopped)));
}
