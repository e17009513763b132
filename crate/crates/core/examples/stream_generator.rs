//! Generates a seeded tweet stream with its KB, writes both to disk, reads
//! the stream back and replays it at a fixed triple rate.

use std::fs::File;
use std::io::BufWriter;
use std::time::Duration;

use dscep::bus::{Broker, Bus};
use dscep::streamgen::{generate, read_stream, replay, GenConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = GenConfig { seed: 7, tweet_count: 2_000, ..GenConfig::default() };
    let data = generate(&cfg);
    println!(
        "{} tweets, {} stream triples, {} KB triples (expected {})",
        data.events.len(),
        data.stream_triples(),
        data.kb.len(),
        cfg.expected_kb_triples()
    );

    let dir = tempfile::tempdir()?;
    let stream_path = dir.path().join("stream.jsonl");
    data.write_stream(BufWriter::new(File::create(&stream_path)?))?;
    data.write_kb(BufWriter::new(File::create(dir.path().join("kb.nt"))?))?;
    let lines = read_stream(&stream_path)?;
    println!("read back {} lines from {}", lines.len(), stream_path.display());

    let broker = Broker::new();
    broker.create_group("tweets", "sink")?;
    let report = replay(&lines, 20_000.0, "tweets", &broker)?;
    println!(
        "replayed {} triples in {:.2} s, {:.0} triples/s",
        report.triples,
        report.duration.as_secs_f64(),
        report.achieved_rate
    );

    let mut sub = broker.subscribe("tweets", "sink", "s1")?;
    let mut messages = 0;
    while let Some(m) = sub.next(Duration::from_millis(10))? {
        sub.ack(m.offset)?;
        messages += 1;
    }
    println!("{messages} messages on the topic, end-of-stream marker included");
    Ok(())
}
