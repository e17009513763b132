use std::collections::BTreeSet;
use std::time::Duration;

use super::*;

const NOW: Duration = Duration::ZERO;

fn drain(sub: &mut dyn Subscription) -> Vec<u64> {
    let mut got = Vec::new();
    while let Some(m) = sub.next(NOW).unwrap() {
        sub.ack(m.offset).unwrap();
        got.push(m.offset);
    }
    got
}

#[test]
fn offsets_are_contiguous() {
    let b = Broker::new();
    assert_eq!(b.publish("t", b"{}").unwrap(), 0);
    assert_eq!(b.publish("t", b"{}").unwrap(), 1);
    assert_eq!(b.publish("u", b"{}").unwrap(), 0);
}

#[test]
fn late_subscriber_starts_at_end() {
    let b = Broker::new();
    for _ in 0..5 {
        b.publish("t", b"{}").unwrap();
    }
    let mut s = b.subscribe("t", "g", "c").unwrap();
    assert_eq!(s.joined_at(), 5);
    assert_eq!(s.next(NOW).unwrap(), None);
    b.publish("t", b"{}").unwrap();
    assert_eq!(s.next(NOW).unwrap().unwrap().offset, 5);
}

#[test]
fn no_groups_means_nothing_retained() {
    let b = Broker::new();
    for _ in 0..10 {
        b.publish("t", b"{}").unwrap();
    }
    assert_eq!(b.retained("t"), 0);
    assert_eq!(b.end_offset("t"), 10);
}

#[test]
fn settled_prefix_is_dropped() {
    let b = Broker::new();
    let mut s = b.subscribe("t", "g", "c").unwrap();
    for _ in 0..4 {
        b.publish("t", b"{}").unwrap();
    }
    let m = s.next(NOW).unwrap().unwrap();
    s.ack(m.offset).unwrap();
    assert_eq!(b.retained("t"), 3);
    assert_eq!(drain(s.as_mut()), vec![1, 2, 3]);
    assert_eq!(b.retained("t"), 0);
}

#[test]
fn group_partitions_and_groups_are_isolated() {
    let b = Broker::new();
    let mut a1 = b.subscribe("t", "A", "1").unwrap();
    let mut a2 = b.subscribe("t", "A", "2").unwrap();
    let mut other = b.subscribe("t", "B", "1").unwrap();
    for _ in 0..10 {
        b.publish("t", b"{}").unwrap();
    }
    let mut got1 = Vec::new();
    let mut got2 = Vec::new();
    for _ in 0..5 {
        got1.push(a1.next(NOW).unwrap().unwrap().offset);
        got2.push(a2.next(NOW).unwrap().unwrap().offset);
    }
    let all: BTreeSet<u64> = got1.iter().chain(&got2).copied().collect();
    assert_eq!(all, (0..10).collect());
    assert_eq!(drain(other.as_mut()), (0..10).collect::<Vec<_>>());
}

#[test]
fn single_consumer_fifo() {
    let b = Broker::new();
    let mut s = b.subscribe("t", "g", "c").unwrap();
    for i in 0..100 {
        b.publish("t", format!("{i}").as_bytes()).unwrap();
    }
    let mut seen = Vec::new();
    while let Some(m) = s.next(NOW).unwrap() {
        assert_eq!(&*m.payload, m.offset.to_string().as_bytes());
        seen.push(m.offset);
    }
    assert_eq!(seen, (0..100).collect::<Vec<_>>());
}

#[test]
fn empty_topic_times_out() {
    let b = Broker::new();
    let mut s = b.subscribe("t", "g", "c").unwrap();
    let start = std::time::Instant::now();
    assert_eq!(s.next(Duration::from_millis(30)).unwrap(), None);
    assert!(start.elapsed() >= Duration::from_millis(30));
}

#[test]
fn next_wakes_on_publish() {
    let b = Broker::new();
    let mut s = b.subscribe("t", "g", "c").unwrap();
    let pb = b.clone();
    let t = std::thread::spawn(move || {
        std::thread::sleep(Duration::from_millis(20));
        pb.publish("t", b"{}").unwrap();
    });
    assert_eq!(s.next(Duration::from_secs(5)).unwrap().unwrap().offset, 0);
    t.join().unwrap();
}

#[test]
fn ack_errors() {
    let b = Broker::new();
    let mut s = b.subscribe("t", "g", "c").unwrap();
    let mut peer = b.subscribe("t", "g", "d").unwrap();
    b.publish("t", b"{}").unwrap();
    assert!(matches!(s.ack(0), Err(BusError::NotInFlight { .. })));
    let m = s.next(NOW).unwrap().unwrap();
    assert!(matches!(peer.ack(m.offset), Err(BusError::NotInFlight { .. })));
    s.ack(m.offset).unwrap();
    assert!(matches!(s.ack(m.offset), Err(BusError::NotInFlight { .. })));
}

#[test]
fn unacked_offset_stays_in_flight() {
    let b = Broker::new();
    let mut s = b.subscribe("t", "g", "c").unwrap();
    b.publish("t", b"{}").unwrap();
    s.next(NOW).unwrap().unwrap();
    assert_eq!(s.next(NOW).unwrap(), None);
    assert_eq!(b.retained("t"), 1);
}

#[test]
fn duplicate_consumer_rejected_until_closed() {
    let b = Broker::new();
    let mut s = b.subscribe("t", "g", "c").unwrap();
    assert!(matches!(b.subscribe("t", "g", "c"), Err(BusError::DuplicateConsumer { .. })));
    s.close();
    assert_eq!(s.next(NOW), Err(BusError::Closed));
    b.subscribe("t", "g", "c").unwrap();
}

#[test]
fn declared_group_keeps_backlog_for_first_member() {
    let b = Broker::new();
    assert_eq!(b.create_group("w", "engines").unwrap(), 0);
    for _ in 0..3 {
        b.publish("w", b"{}").unwrap();
    }
    let mut s = b.subscribe("w", "engines", "e0").unwrap();
    assert_eq!(s.joined_at(), 0);
    assert_eq!(drain(s.as_mut()), vec![0, 1, 2]);
}

#[test]
fn two_by_two_interleaving() {
    // Both members race for two pending offsets; each must get a different one.
    for _ in 0..200 {
        let b = Broker::new();
        let s1 = b.subscribe("t", "g", "1").unwrap();
        let s2 = b.subscribe("t", "g", "2").unwrap();
        b.publish("t", b"{}").unwrap();
        b.publish("t", b"{}").unwrap();
        let take = |mut s: Box<dyn Subscription>| std::thread::spawn(move || s.next(NOW).unwrap().unwrap().offset);
        let (h1, h2) = (take(s1), take(s2));
        let mut got = [h1.join().unwrap(), h2.join().unwrap()];
        got.sort();
        assert_eq!(got, [0, 1]);
    }
}

#[test]
fn eos_marker() {
    assert!(is_eos(EOS_PAYLOAD));
    assert!(is_eos(br#"{"op": "eos"}"#));
    assert!(!is_eos(br#"{"graph":"g","triples":[]}"#));
    assert!(!is_eos(b"{\"op\":\"pub\"}"));
}

#[test]
fn socket_roundtrip() {
    let broker = Broker::new();
    let server = serve_broker(broker.clone(), "127.0.0.1:0").unwrap();
    let addr = server.local_addr().to_string();
    let bus = RemoteBus::connect(&addr).unwrap();
    assert_eq!(bus.create_group("t", "g").unwrap(), 0);
    let mut s1 = bus.subscribe("t", "g", "1").unwrap();
    let mut s2 = bus.subscribe("t", "g", "2").unwrap();
    assert!(matches!(bus.subscribe("t", "g", "1"), Err(BusError::Remote(_))));
    for i in 0..6 {
        assert_eq!(bus.publish("t", format!(r#"{{"n":{i}}}"#).as_bytes()).unwrap(), i);
    }
    assert!(bus.publish("t", b"not json").is_err());
    let m = s1.next(Duration::from_millis(100)).unwrap().unwrap();
    assert_eq!(&*m.payload, br#"{"n":0}"#);
    s1.ack(m.offset).unwrap();
    assert!(matches!(s1.ack(m.offset), Err(BusError::Remote(_))));
    let mut seen: BTreeSet<u64> = [m.offset].into();
    for _ in 0..5 {
        let m = s2.next(Duration::from_millis(100)).unwrap().unwrap();
        s2.ack(m.offset).unwrap();
        assert!(seen.insert(m.offset));
    }
    assert_eq!(s1.next(Duration::from_millis(10)).unwrap(), None);
    assert_eq!(seen, (0..6).collect());
    s1.close();
    assert_eq!(s1.next(NOW), Err(BusError::Closed));
    server.shutdown();
}

#[test]
fn remote_connect_gives_up() {
    let err = RemoteBus::connect_with("127.0.0.1:1", 2).err().unwrap();
    assert!(matches!(err, BusError::Connection { .. }));
}
