//! An indexed background KB: pattern lookups, the subclass closure and
//! sameAs canonicalisation.

use dscep::kb::TripleStore;
use dscep::rdf::Term;

const KB: &str = r#"
<http://ex.org/Guitarist> <http://www.w3.org/2000/01/rdf-schema#subClassOf> <http://ex.org/Musician> .
<http://ex.org/Musician> <http://www.w3.org/2000/01/rdf-schema#subClassOf> <http://ex.org/Artist> .
<http://ex.org/jimi> <http://www.w3.org/1999/02/22-rdf-syntax-ns#type> <http://ex.org/Guitarist> .
<http://ex.org/jimi> <http://ex.org/birthPlace> <http://ex.org/seattle> .
<http://ex.org/hendrix> <http://www.w3.org/2002/07/owl#sameAs> <http://ex.org/jimi> .
<http://ex.org/hendrix> <http://ex.org/nickname> "Voodoo Child" .
"#;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let raw = TripleStore::from_ntriples(KB)?;
    println!("raw store: {} triples", raw.len());

    let artist = Term::iri("http://ex.org/Artist");
    let subs: Vec<String> = raw.subclasses_of(&artist).iter().map(Term::to_string).collect();
    println!("subclasses of Artist (reflexive): {}", subs.join(" "));

    // Each sameAs component collapses onto its least IRI.
    let kb = TripleStore::load_canonical(KB)?;
    println!("canonical store: {} triples", kb.len());
    for t in kb.match_terms(Some(&Term::iri("http://ex.org/hendrix")), None, None) {
        println!("  {t}");
    }
    println!("facts about hendrix: {}", kb.count_matches(Some(&Term::iri("http://ex.org/hendrix")), None, None));
    Ok(())
}
