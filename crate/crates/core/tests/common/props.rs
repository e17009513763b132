//! Property checkers shared by the property suite and the acceptance run.

use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, Barrier};
use std::thread;
use std::time::Duration;

use proptest::prelude::*;

use dscep::bus::Bus;
use dscep::operator::{cut_windows, result_events, Window, WindowKind};
use dscep::rdf::{GraphEvent, Term, Triple};

/// Publishes `n` messages to a fresh topic while `k` members of one group
/// drain it; every offset from the group's start must arrive exactly once.
/// `connect` hands each member (and the publisher) its own bus handle.
pub fn exactly_once_trial(connect: &dyn Fn() -> Arc<dyn Bus>, topic: &str, k: usize, n: u64) -> Result<(), String> {
    let admin = connect();
    let start = admin.create_group(topic, "g").map_err(|e| e.to_string())?;
    let done = Arc::new(AtomicBool::new(false));
    let ready = Arc::new(Barrier::new(k + 1));
    let members: Vec<_> = (0..k)
        .map(|i| {
            let bus = connect();
            let (done, ready, topic) = (done.clone(), ready.clone(), topic.to_string());
            thread::spawn(move || -> Result<Vec<u64>, String> {
                let mut sub = bus.subscribe(&topic, "g", &format!("m{i}")).map_err(|e| e.to_string())?;
                ready.wait();
                let mut got = Vec::new();
                loop {
                    match sub.next(Duration::from_millis(20)).map_err(|e| e.to_string())? {
                        Some(m) => {
                            got.push(m.offset);
                            sub.ack(m.offset).map_err(|e| e.to_string())?;
                        }
                        None if done.load(Ordering::SeqCst) => break,
                        None => {}
                    }
                }
                sub.close();
                Ok(got)
            })
        })
        .collect();
    ready.wait();
    for i in 0..n {
        admin.publish(topic, format!("{{\"i\":{i}}}").as_bytes()).map_err(|e| e.to_string())?;
    }
    // Members stop only after an empty poll that began after the last publish.
    thread::sleep(Duration::from_millis(30));
    done.store(true, Ordering::SeqCst);
    let mut all = Vec::new();
    for m in members {
        all.extend(m.join().map_err(|_| "member panicked".to_string())??);
    }
    all.sort_unstable();
    let want: Vec<u64> = (start..start + n).collect();
    if all != want {
        let dups = all.windows(2).filter(|w| w[0] == w[1]).count();
        return Err(format!("k={k}: {} deliveries for {n} messages, {dups} duplicates", all.len()));
    }
    Ok(())
}

/// Events with the given sizes and non-decreasing timestamps.
pub fn events_strategy() -> impl Strategy<Value = Vec<GraphEvent>> {
    prop::collection::vec((1usize..40, 0i64..5), 0..60).prop_map(|spec| {
        let mut ts = 0;
        spec.into_iter()
            .enumerate()
            .map(|(i, (size, gap))| {
                ts += gap;
                let triples = (0..size)
                    .map(|j| Triple::new(Term::iri(format!("http://e/{i}")), Term::iri("http://p"), Term::literal(j.to_string())))
                    .collect();
                GraphEvent::stamped(format!("g{i}"), triples, ts).unwrap()
            })
            .collect()
    })
}

pub fn kind_strategy() -> impl Strategy<Value = WindowKind> {
    prop_oneof![(1usize..80).prop_map(|max_triples| WindowKind::Count { max_triples }), (1i64..10).prop_map(|width_ms| WindowKind::Time { width_ms })]
}

/// All windowing invariants for one input; `Err` names the first broken one.
pub fn check_windowing(events: &[GraphEvent], kind: WindowKind) -> Result<(), String> {
    let windows = cut_windows(events.iter().cloned(), kind);
    // Conservation: the windows hold exactly the input, in order.
    let flat: Vec<&GraphEvent> = windows.iter().flat_map(|w| &w.events).collect();
    if flat.len() != events.len() || flat.iter().zip(events).any(|(a, b)| *a != b) {
        return Err("conservation".into());
    }
    for (i, w) in windows.iter().enumerate() {
        if w.seq != i as u64 || w.is_empty() {
            return Err(format!("numbering or empty window at {i}"));
        }
        // Atomicity: every event keeps all of its triples.
        if w.triple_count != w.events.iter().map(GraphEvent::len).sum::<usize>() {
            return Err("atomicity".into());
        }
        match kind {
            WindowKind::Count { max_triples } => {
                if w.triple_count > max_triples && w.events.len() > 1 {
                    return Err(format!("window {i} holds {} triples over cap {max_triples}", w.triple_count));
                }
                if let Some(next) = windows.get(i + 1) {
                    if w.triple_count + next.events[0].len() <= max_triples {
                        return Err(format!("window {i} closed early"));
                    }
                }
            }
            WindowKind::Time { width_ms } => {
                let bucket = w.low_ts.div_euclid(width_ms);
                if w.high_ts.div_euclid(width_ms) != bucket {
                    return Err(format!("window {i} spans buckets"));
                }
                if windows.get(i + 1).is_some_and(|n| n.low_ts.div_euclid(width_ms) <= bucket) {
                    return Err(format!("window {i} bucket not followed by a later one"));
                }
            }
        }
    }
    // Windows and the results stamped from them never go back in time.
    let stamps: Vec<i64> = windows
        .iter()
        .flat_map(|w: &Window| result_events("op", w.seq, w.high_ts, vec![w.triples().cloned().collect()]))
        .map(|e| e.event_ts())
        .collect();
    if windows.windows(2).any(|p| p[0].high_ts > p[1].low_ts) || stamps.windows(2).any(|p| p[0] > p[1]) {
        return Err("timestamps not monotone".into());
    }
    Ok(())
}
