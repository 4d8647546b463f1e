use std::collections::HashSet;

use expertrank::corpus::{parse_records, Corpus};
use expertrank::synth::{generate, SyntheticSpec};

const RECORDS: &str = "#* Sparse  graphs\n#@ Ann Lee,  Bo Chen , Ann Lee\n#t 2010\n#c Venue\n#index 1\n\n\
#* Dense graphs\n#@ Bo Chen, Cy Diaz\n#t 20x1\n#index 9\n\n\
#* Dense graphs again\n#@ Bo Chen, Cy Diaz\n#t 2011\n#index 2\n#% 1\n#% 404\n#! An abstract.\n";

#[test]
fn parse_counts_and_indices() {
    let (c, report) = parse_records(RECORDS.as_bytes()).unwrap();
    assert_eq!(report.bad_year, 1);
    assert_eq!(c.len(), 2);
    let first = c.document("1").unwrap();
    assert_eq!(first.authors, ["Ann Lee", "Bo Chen"]);
    assert_eq!(c.citation_count("1"), 1);
    assert_eq!(c.citation_count("2"), 0);
    let docs: Vec<&str> = c
        .author_documents("Bo Chen")
        .iter()
        .map(|d| d.doc_id.as_str())
        .collect();
    assert_eq!(docs, ["1", "2"]);
    assert!(c.author_documents("Nobody").is_empty());
    assert_eq!(c.total_citations("Ann Lee", &HashSet::new()), 1);
    assert_eq!(c.abstract_count(), 1);
}

#[test]
fn record_and_canonical_round_trips() {
    let (c, _) = parse_records(RECORDS.as_bytes()).unwrap();
    let mut records = Vec::new();
    c.write_records(&mut records).unwrap();
    let (again, report) = parse_records(records.as_slice()).unwrap();
    assert_eq!(report.skipped(), 0);
    assert_eq!(again, c);

    let mut canonical = Vec::new();
    c.write_canonical(&mut canonical).unwrap();
    let back = Corpus::read_canonical(canonical.as_slice()).unwrap();
    assert_eq!(back, c);
    let mut twice = Vec::new();
    back.write_canonical(&mut twice).unwrap();
    assert_eq!(twice, canonical);
}

#[test]
fn index_sums_on_a_generated_corpus() {
    let data = generate(&SyntheticSpec::default()).unwrap();
    let c = &data.corpus;
    let by_author: usize = c.authors().map(|a| c.author_documents(a).len()).sum();
    let by_doc: usize = c.documents().iter().map(|d| d.authors.len()).sum();
    assert_eq!(by_author, by_doc);

    let cited: u64 = c.citation_counts().iter().sum();
    let refs: usize = c
        .documents()
        .iter()
        .map(|d| d.references.iter().filter(|r| c.document(r).is_some()).count())
        .sum();
    assert_eq!(cited, refs as u64);
}
