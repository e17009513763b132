use std::io::Write;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::vocab::{self as v, ALIAS, RES};
use crate::rdf::vocab::{OWL_SAME_AS, RDFS_LABEL, RDFS_SUBCLASS_OF, RDF_TYPE, XSD_DECIMAL, XSD_INTEGER};
use crate::rdf::wire::encode_graph_event;
use crate::rdf::{serialize_ntriple, GraphEvent, Term, Triple};

/// Generator settings; every field has a default so a TOML file only needs
/// the ones it changes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenConfig {
    pub seed: u64,
    pub tweet_count: usize,
    pub start_ts: i64,
    /// Consecutive tweets are 1..=max_gap_ms apart.
    pub max_gap_ms: i64,
    pub artists: usize,
    pub shows: usize,
    pub others: usize,
    pub cities: usize,
    pub countries: usize,
    /// Inclusive range of distinct entities mentioned per tweet.
    pub entities_per_tweet: (usize, usize),
    pub hashtags_per_tweet: (usize, usize),
    /// Levels below each class root.
    pub hierarchy_depth: u32,
    pub hierarchy_fanout: u32,
    /// Share of entities that get one sameAs alias.
    pub alias_fraction: f64,
    /// Extra KB triples under a predicate no query uses.
    pub noise_triples: usize,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            seed: 1,
            tweet_count: 1000,
            start_ts: 1_600_000_000_000,
            max_gap_ms: 100,
            artists: 400,
            shows: 200,
            others: 800,
            cities: 120,
            countries: 30,
            entities_per_tweet: (2, 6),
            hashtags_per_tweet: (0, 4),
            hierarchy_depth: 3,
            hierarchy_fanout: 3,
            alias_fraction: 0.1,
            noise_triples: 7000,
        }
    }
}

impl GenConfig {
    pub fn from_toml(text: &str) -> Result<Self, String> {
        let cfg: GenConfig = toml::from_str(text).map_err(|e| e.to_string())?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), String> {
        let (lo, hi) = self.entities_per_tweet;
        if lo > hi || self.hashtags_per_tweet.0 > self.hashtags_per_tweet.1 {
            return Err("per-tweet ranges must be (min, max) with min <= max".into());
        }
        if hi > self.entity_count() {
            return Err(format!("{hi} entities per tweet but only {} entities", self.entity_count()));
        }
        if self.artists > 0 && (self.cities == 0 || self.countries == 0) {
            return Err("artists need at least one city and one country".into());
        }
        if self.cities > 0 && self.countries == 0 {
            return Err("cities need at least one country".into());
        }
        if self.max_gap_ms < 1 || self.hierarchy_fanout == 0 && self.hierarchy_depth > 0 {
            return Err("max_gap_ms and hierarchy_fanout must be positive".into());
        }
        if !(0.0..=1.0).contains(&self.alias_fraction) {
            return Err("alias_fraction must lie in [0, 1]".into());
        }
        Ok(())
    }

    pub fn entity_count(&self) -> usize {
        self.artists + self.shows + self.others
    }

    /// Classes below one root.
    pub fn classes_per_root(&self) -> usize {
        (1..=self.hierarchy_depth).map(|d| (self.hierarchy_fanout as usize).pow(d)).sum()
    }

    pub fn alias_count(&self) -> usize {
        (self.alias_fraction * self.entity_count() as f64).round() as usize
    }

    /// Exact size of the generated KB.
    pub fn expected_kb_triples(&self) -> usize {
        3 * self.classes_per_root()
            + 2 * self.entity_count()
            + self.artists
            + 2 * self.cities
            + 2 * self.countries
            + self.alias_count()
            + 2
            + self.noise_triples
    }
}

pub struct Generated {
    /// One event per tweet, strictly increasing in time.
    pub events: Vec<GraphEvent>,
    pub kb: Vec<Triple>,
}

impl Generated {
    pub fn stream_triples(&self) -> usize {
        self.events.iter().map(GraphEvent::len).sum()
    }

    /// One wire graph event per line.
    pub fn write_stream(&self, mut out: impl Write) -> std::io::Result<()> {
        for e in &self.events {
            out.write_all(&encode_graph_event(e))?;
            out.write_all(b"\n")?;
        }
        out.flush()
    }

    pub fn write_kb(&self, mut out: impl Write) -> std::io::Result<()> {
        for t in &self.kb {
            writeln!(out, "{}", serialize_ntriple(t))?;
        }
        out.flush()
    }

    pub fn kb_ntriples(&self) -> String {
        let mut buf = Vec::new();
        self.write_kb(&mut buf).expect("in-memory write");
        String::from_utf8(buf).expect("utf-8")
    }
}

fn ns(i: &str) -> Term {
    Term::iri(i)
}

fn res(kind: &str, i: usize) -> Term {
    Term::iri(format!("{RES}{kind}/{i}"))
}

fn decimal_tenths(tenths: u32) -> Term {
    Term::typed(format!("{}.{}", tenths / 10, tenths % 10), XSD_DECIMAL)
}

fn integer(n: impl std::fmt::Display) -> Term {
    Term::typed(n.to_string(), XSD_INTEGER)
}

fn country_code(i: usize) -> String {
    let a = (b'A' + (i / 26 % 26) as u8) as char;
    let b = (b'A' + (i % 26) as u8) as char;
    if i < 676 {
        format!("{a}{b}")
    } else {
        format!("{a}{b}{}", i / 676)
    }
}

/// All classes of one tree, root first; non-root classes carry their path,
/// e.g. `MusicalArtist_2_1`.
fn class_tree(root: &str, depth: u32, fanout: u32, kb: &mut Vec<Triple>) -> Vec<Term> {
    let root_term = ns(root);
    let mut all = vec![root_term.clone()];
    let mut level = vec![(root.to_string(), root_term)];
    for _ in 0..depth {
        let mut next = Vec::new();
        for (name, term) in &level {
            for k in 1..=fanout {
                let child_name = format!("{name}_{k}");
                let child = ns(&child_name);
                kb.push(Triple::new(child.clone(), ns(RDFS_SUBCLASS_OF), term.clone()));
                all.push(child.clone());
                next.push((child_name, child));
            }
        }
        level = next;
    }
    all
}

/// Deterministic in `cfg`: the KB and the stream draw from separate random
/// streams, so changing only `noise_triples` leaves the stream untouched.
pub fn generate(cfg: &GenConfig) -> Generated {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut kb = Vec::with_capacity(cfg.expected_kb_triples());
    let (depth, fanout) = (cfg.hierarchy_depth, cfg.hierarchy_fanout);
    let roots = [v::MUSICAL_ARTIST, v::TELEVISION_SHOW, v::ORGANISATION];
    let trees: Vec<Vec<Term>> = roots.iter().map(|r| class_tree(r, depth, fanout, &mut kb)).collect();

    let kinds = [("artist", cfg.artists), ("show", cfg.shows), ("other", cfg.others)];
    let mut entities = Vec::with_capacity(cfg.entity_count());
    for (k, &(kind, count)) in kinds.iter().enumerate() {
        for i in 0..count {
            let e = res(kind, i);
            let class = trees[k].choose(&mut rng).expect("tree has a root").clone();
            kb.push(Triple::new(e.clone(), ns(RDF_TYPE), class));
            kb.push(Triple::new(e.clone(), ns(RDFS_LABEL), Term::lang_literal(format!("{kind} {i}"), "en")));
            entities.push((e, format!("{kind} {i}")));
        }
    }
    for i in 0..cfg.countries {
        let c = res("country", i);
        kb.push(Triple::new(c.clone(), ns(RDF_TYPE), ns(v::COUNTRY_CLASS)));
        kb.push(Triple::new(c, ns(v::COUNTRY_CODE), Term::literal(country_code(i))));
    }
    for i in 0..cfg.cities {
        let c = res("city", i);
        kb.push(Triple::new(c.clone(), ns(RDF_TYPE), ns(v::CITY)));
        kb.push(Triple::new(c, ns(v::COUNTRY), res("country", rng.gen_range(0..cfg.countries))));
    }
    for i in 0..cfg.artists {
        kb.push(Triple::new(res("artist", i), ns(v::BIRTH_PLACE), res("city", rng.gen_range(0..cfg.cities))));
    }
    let mut order: Vec<usize> = (0..entities.len()).collect();
    order.shuffle(&mut rng);
    for &i in order.iter().take(cfg.alias_count()) {
        let Term::Iri(canonical) = &entities[i].0 else { unreachable!() };
        let alias = Term::iri(format!("{ALIAS}{}", &canonical[RES.len()..]));
        kb.push(Triple::new(alias, ns(OWL_SAME_AS), entities[i].0.clone()));
    }
    kb.push(Triple::new(ns(v::POSITIVE), ns(v::INDICATOR), Term::typed("1.0", XSD_DECIMAL)));
    kb.push(Triple::new(ns(v::NEGATIVE), ns(v::INDICATOR), Term::typed("0.0", XSD_DECIMAL)));
    for i in 0..cfg.noise_triples {
        kb.push(Triple::new(res("noise", i), ns(v::NOISE), integer(i)));
    }
    debug_assert_eq!(kb.len(), cfg.expected_kb_triples());

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(1);
    let mut events = Vec::with_capacity(cfg.tweet_count);
    let mut ts = cfg.start_ts;
    for n in 0..cfg.tweet_count {
        ts += rng.gen_range(1..=cfg.max_gap_ms);
        events.push(tweet(n, ts, cfg, &entities, &mut rng));
    }
    Generated { events, kb }
}

fn tweet(n: usize, ts: i64, cfg: &GenConfig, entities: &[(Term, String)], rng: &mut ChaCha8Rng) -> GraphEvent {
    let t = res("tweet", n);
    let mut triples = vec![
        Triple::new(t.clone(), ns(RDF_TYPE), ns(v::TWEET)),
        Triple::new(t.clone(), ns(v::CREATED_AT), integer(ts)),
        Triple::new(t.clone(), ns(v::AUTHOR), res("user", rng.gen_range(0..500))),
        Triple::new(t.clone(), ns(v::LANG), Term::literal("en")),
        Triple::new(t.clone(), ns(v::SENTIMENT_POS), decimal_tenths(rng.gen_range(0..=50))),
        Triple::new(t.clone(), ns(v::SENTIMENT_NEG), decimal_tenths(rng.gen_range(0..=50))),
        Triple::new(t.clone(), ns(v::LIKES), integer(rng.gen_range(0..1000))),
        Triple::new(t.clone(), ns(v::SHARES), integer(rng.gen_range(0..200))),
    ];
    let k = rng.gen_range(cfg.entities_per_tweet.0..=cfg.entities_per_tweet.1);
    let mut offset = 0;
    for (j, idx) in rand::seq::index::sample(rng, entities.len(), k).into_iter().enumerate() {
        let (e, label) = &entities[idx];
        let ann = Term::iri(format!("{RES}tweet/{n}/ann/{j}"));
        let len = label.len();
        triples.extend([
            Triple::new(t.clone(), ns(v::MENTIONS), e.clone()),
            Triple::new(t.clone(), ns(v::HAS_ANNOTATION), ann.clone()),
            Triple::new(ann.clone(), ns(v::MATCHED_URI), e.clone()),
            Triple::new(ann.clone(), ns(v::DETECTED_AS), Term::literal(label.clone())),
            Triple::new(ann.clone(), ns(v::CONFIDENCE), Term::typed(format!("0.{}", rng.gen_range(50..100)), XSD_DECIMAL)),
            Triple::new(ann.clone(), ns(v::START), integer(offset)),
            Triple::new(ann, ns(v::END), integer(offset + len)),
        ]);
        offset += len + 1;
    }
    for _ in 0..rng.gen_range(cfg.hashtags_per_tweet.0..=cfg.hashtags_per_tweet.1) {
        triples.push(Triple::new(t.clone(), ns(v::HASHTAG), Term::literal(format!("tag{}", rng.gen_range(0..100)))));
    }
    GraphEvent::stamped(format!("{RES}tweet/{n}"), triples, ts).expect("tweet has triples")
}

/// Tab-separated `local name<TAB>IRI` lines for the generated vocabulary.
pub fn glossary() -> String {
    let mut out = String::from("# vocabulary of generated data\n");
    for (local, iri) in v::ALL {
        out.push_str(&format!("{local}\t{iri}\n"));
    }
    out.push_str(&format!("resources\t{RES}\naliases\t{ALIAS}\n"));
    out
}
