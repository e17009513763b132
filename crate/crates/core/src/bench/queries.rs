//! Benchmark query texts over the generated vocabulary.
//!
//! The hierarchy and path queries and the sentiment correlation query are
//! analogs rebuilt from prose descriptions of the originals, not the
//! originals themselves.

pub const PREFIXES: &str = "\
PREFIX : <http://dscep.example/ns#>
PREFIX rdf: <http://www.w3.org/1999/02/22-rdf-syntax-ns#>
PREFIX rdfs: <http://www.w3.org/2000/01/rdf-schema#>
PREFIX xsd: <http://www.w3.org/2001/XMLSchema#>
";

/// Hierarchy reasoning: tweets mentioning any kind of musical artist.
pub const Q15_LOCAL: &str = "\
CONSTRUCT { ?t :mentionsArtist ?e }
WHERE { ?t :mentions ?e . ?e rdf:type/rdfs:subClassOf* :MusicalArtist }
";

pub const Q15_SERVICE: &str = "\
CONSTRUCT { ?t :mentionsArtist ?e }
WHERE { ?t :mentions ?e SERVICE <kb> { ?e rdf:type :MusicalArtist } }
";

/// Property path: birthplace, country and country code of mentioned
/// artists.
pub const Q16_LOCAL: &str = "\
CONSTRUCT { ?e :birthPlace ?bp . ?bp :country ?c . ?e :countryCode ?cc }
WHERE {
  ?t :mentions ?e . ?e rdf:type/rdfs:subClassOf* :MusicalArtist .
  ?e :birthPlace ?bp . ?bp :country ?c .
  ?e :birthPlace/:country/:countryCode ?cc
}
";

/// SERVICE blocks take plain patterns, so the path is spelled out.
pub const Q16_SERVICE: &str = "\
CONSTRUCT { ?e :birthPlace ?bp . ?bp :country ?c . ?e :countryCode ?cc }
WHERE {
  ?t :mentions ?e
  SERVICE <kb> { ?e rdf:type :MusicalArtist . ?e :birthPlace ?bp . ?bp :country ?c . ?c :countryCode ?cc }
}
";

/// How television shows mentioned alongside an artist relate to the
/// sentiment of those tweets, per (artist, country code, show).
pub const CQUERY1_MONO: &str = "\
SELECT ?a ?cc ?s (COUNT(?t) AS ?n) (AVG(?v) AS ?posFrac)
WHERE {
  ?t :mentions ?a . ?a rdf:type/rdfs:subClassOf* :MusicalArtist .
  OPTIONAL { ?a :birthPlace/:country/:countryCode ?cc }
  ?t :mentions ?s . ?s rdf:type/rdfs:subClassOf* :TelevisionShow .
  { ?t :hasSentimentPos ?p . ?t :hasSentimentNeg ?ng . :Positive :indicator ?v FILTER(?p > ?ng) }
  UNION
  { ?t :hasSentimentPos ?p . ?t :hasSentimentNeg ?ng . :Negative :indicator ?v FILTER(?p <= ?ng) }
}
GROUP BY ?a ?cc ?s
";

/// Artist enrichment (touches the KB).
pub const DAG_A: &str = "\
CONSTRUCT { ?t :mentionsArtist ?a . ?a :countryCode ?cc . ?t :pos ?p . ?t :neg ?ng }
WHERE {
  ?t :mentions ?a . ?a rdf:type/rdfs:subClassOf* :MusicalArtist .
  OPTIONAL { ?a :birthPlace/:country/:countryCode ?cc }
  ?t :hasSentimentPos ?p . ?t :hasSentimentNeg ?ng
}
";

/// Show enrichment (touches the KB).
pub const DAG_B: &str = "\
CONSTRUCT { ?t :mentionsShow ?s . ?t :pos ?p . ?t :neg ?ng }
WHERE {
  ?t :mentions ?s . ?s rdf:type/rdfs:subClassOf* :TelevisionShow .
  ?t :hasSentimentPos ?p . ?t :hasSentimentNeg ?ng
}
";

/// Positive artist tweets. The polarity literal equals the KB indicator.
pub const DAG_C: &str = "\
CONSTRUCT { ?t :artist ?a . ?a :countryCode ?cc . ?t :polarity \"1.0\"^^xsd:decimal }
WHERE { ?t :mentionsArtist ?a . ?a :countryCode ?cc . ?t :pos ?p . ?t :neg ?ng FILTER(?p > ?ng) }
";

pub const DAG_D: &str = "\
CONSTRUCT { ?t :artist ?a . ?a :countryCode ?cc . ?t :polarity \"0.0\"^^xsd:decimal }
WHERE { ?t :mentionsArtist ?a . ?a :countryCode ?cc . ?t :pos ?p . ?t :neg ?ng FILTER(?p <= ?ng) }
";

pub const DAG_E: &str = "\
CONSTRUCT { ?t :show ?s . ?t :polarity \"1.0\"^^xsd:decimal }
WHERE { ?t :mentionsShow ?s . ?t :pos ?p . ?t :neg ?ng FILTER(?p > ?ng) }
";

pub const DAG_F: &str = "\
CONSTRUCT { ?t :show ?s . ?t :polarity \"0.0\"^^xsd:decimal }
WHERE { ?t :mentionsShow ?s . ?t :pos ?p . ?t :neg ?ng FILTER(?p <= ?ng) }
";

pub const DAG_G: &str = "\
SELECT ?a ?cc ?s (COUNT(?t) AS ?n) (AVG(?v) AS ?posFrac)
WHERE { ?t :artist ?a . ?a :countryCode ?cc . ?t :show ?s . ?t :polarity ?v }
GROUP BY ?a ?cc ?s
";

/// Query text with the standard prefixes.
pub fn full(body: &str) -> String {
    format!("{PREFIXES}{body}")
}
