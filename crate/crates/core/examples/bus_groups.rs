//! In-process topics with consumer groups: each group sees every message
//! once, members of one group split them.

use std::collections::BTreeMap;
use std::time::Duration;

use dscep::bus::{Broker, Bus};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let bus = Broker::new();
    bus.create_group("events", "audit")?;
    let mut w1 = bus.subscribe("events", "workers", "w1")?;
    let mut w2 = bus.subscribe("events", "workers", "w2")?;

    for i in 0..10 {
        bus.publish("events", format!("msg {i}").as_bytes())?;
    }

    // Alternate the two workers; a claimed message is theirs until acked.
    let mut per_worker: BTreeMap<&str, Vec<u64>> = BTreeMap::new();
    loop {
        let mut got = false;
        for (name, sub) in [("w1", &mut w1), ("w2", &mut w2)] {
            if let Some(m) = sub.next(Duration::from_millis(10))? {
                sub.ack(m.offset)?;
                per_worker.entry(name).or_default().push(m.offset);
                got = true;
            }
        }
        if !got {
            break;
        }
    }
    println!("workers split the topic: {per_worker:?}");

    let mut audit = bus.subscribe("events", "audit", "a1")?;
    let mut seen = 0;
    while let Some(m) = audit.next(Duration::from_millis(10))? {
        audit.ack(m.offset)?;
        seen += 1;
    }
    println!("audit group saw all {seen} messages");
    Ok(())
}
