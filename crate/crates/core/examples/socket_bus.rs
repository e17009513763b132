//! The broker served over TCP; processes reach it through `RemoteBus`.
//! Payloads on the wire must be JSON documents.

use std::time::Duration;

use dscep::bus::{serve_broker, Broker, Bus, RemoteBus};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let server = serve_broker(Broker::new(), "127.0.0.1:0")?;
    let addr = server.local_addr().to_string();
    println!("broker on {addr}");

    let consumer = RemoteBus::connect(&addr)?;
    let mut sub = consumer.subscribe("greetings", "readers", "r1")?;

    let producer = RemoteBus::connect(&addr)?;
    for word in ["hello", "from", "another", "connection"] {
        producer.publish("greetings", format!(r#"{{"word":"{word}"}}"#).as_bytes())?;
    }

    while let Some(m) = sub.next(Duration::from_millis(200))? {
        println!("offset {}: {}", m.offset, String::from_utf8_lossy(&m.payload));
        sub.ack(m.offset)?;
    }
    server.shutdown();
    Ok(())
}
