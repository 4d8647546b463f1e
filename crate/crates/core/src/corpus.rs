//! Author–publication records and the indices built over them.
//!
//! Two on-disk formats are understood. The prefixed-line record format used by
//! the Arnetminer/DBLP citation dumps:
//!
//! ```text
//! #*Paper title
//! #@Author One, Author Two
//! #t2010
//! #cVenue
//! #index42
//! #%17
//! #!Abstract text
//! ```
//!
//! and a canonical export with one JSON object per line, keyed by the same
//! prefixes, which is what the pipeline caches.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    #[serde(rename = "#index")]
    pub doc_id: String,
    #[serde(rename = "#*")]
    pub title: String,
    #[serde(rename = "#!", default)]
    pub abstract_text: String,
    #[serde(rename = "#@")]
    pub authors: Vec<String>,
    #[serde(rename = "#t", default)]
    pub year: Option<i32>,
    #[serde(rename = "#c", default)]
    pub venue: String,
    #[serde(rename = "#%", default)]
    pub references: Vec<String>,
}

impl Document {
    /// Title and abstract joined, the text that feeds the topic models.
    pub fn text(&self) -> String {
        if self.abstract_text.is_empty() {
            self.title.clone()
        } else {
            format!("{} {}", self.title, self.abstract_text)
        }
    }
}

/// Trims and collapses internal whitespace. Author identity is this string.
pub fn normalize_name(name: &str) -> String {
    name.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Counters for records dropped while parsing.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ParseReport {
    pub records: usize,
    pub bad_year: usize,
    pub missing_title: usize,
    pub missing_authors: usize,
}

impl ParseReport {
    pub fn skipped(&self) -> usize {
        self.bad_year + self.missing_title + self.missing_authors
    }
}

#[derive(Debug, Clone)]
pub struct Corpus {
    documents: Vec<Document>,
    positions: HashMap<String, usize>,
    author_index: BTreeMap<String, Vec<usize>>,
    citation_count: Vec<u64>,
}

impl PartialEq for Corpus {
    fn eq(&self, other: &Self) -> bool {
        self.documents == other.documents
    }
}

impl Corpus {
    /// Builds the author and citation indices. Author names are normalized,
    /// repeated names on one document collapse to one, self-references and
    /// repeated references are dropped.
    pub fn from_documents(mut documents: Vec<Document>) -> Result<Self> {
        let mut positions = HashMap::with_capacity(documents.len());
        for (pos, doc) in documents.iter_mut().enumerate() {
            if positions.insert(doc.doc_id.clone(), pos).is_some() {
                return Err(Error::DuplicateDocId(doc.doc_id.clone()));
            }
            let mut seen = HashSet::new();
            doc.authors = doc
                .authors
                .iter()
                .map(|a| normalize_name(a))
                .filter(|a| !a.is_empty() && seen.insert(a.clone()))
                .collect();
            if doc.authors.is_empty() {
                return Err(Error::InvalidParameter(format!(
                    "document {:?} has no authors",
                    doc.doc_id
                )));
            }
            let mut seen = HashSet::new();
            let id = doc.doc_id.clone();
            doc.references
                .retain(|r| *r != id && !r.is_empty() && seen.insert(r.clone()));
        }

        let mut author_index: BTreeMap<String, Vec<usize>> = BTreeMap::new();
        let mut citation_count = vec![0u64; documents.len()];
        for (pos, doc) in documents.iter().enumerate() {
            for author in &doc.authors {
                author_index.entry(author.clone()).or_default().push(pos);
            }
            for r in &doc.references {
                if let Some(&cited) = positions.get(r) {
                    citation_count[cited] += 1;
                }
            }
        }

        Ok(Corpus {
            documents,
            positions,
            author_index,
            citation_count,
        })
    }

    pub fn documents(&self) -> &[Document] {
        &self.documents
    }

    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    pub fn position(&self, doc_id: &str) -> Option<usize> {
        self.positions.get(doc_id).copied()
    }

    pub fn document(&self, doc_id: &str) -> Option<&Document> {
        self.position(doc_id).map(|p| &self.documents[p])
    }

    /// Authors in lexicographic order.
    pub fn authors(&self) -> impl Iterator<Item = &str> {
        self.author_index.keys().map(String::as_str)
    }

    pub fn author_count(&self) -> usize {
        self.author_index.len()
    }

    /// Corpus positions of the author's documents, ascending.
    pub fn author_positions(&self, author: &str) -> &[usize] {
        self.author_index.get(author).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn author_documents(&self, author: &str) -> Vec<&Document> {
        self.author_positions(author)
            .iter()
            .map(|&p| &self.documents[p])
            .collect()
    }

    /// Number of corpus documents that reference `doc_id`.
    pub fn citation_count(&self, doc_id: &str) -> u64 {
        self.position(doc_id).map(|p| self.citation_count[p]).unwrap_or(0)
    }

    pub fn citation_counts(&self) -> &[u64] {
        &self.citation_count
    }

    /// Citations summed over the author's documents. An empty `restrict_to`
    /// means every document counts.
    pub fn total_citations(&self, author: &str, restrict_to: &HashSet<String>) -> u64 {
        self.author_positions(author)
            .iter()
            .filter(|&&p| restrict_to.is_empty() || restrict_to.contains(&self.documents[p].doc_id))
            .map(|&p| self.citation_count[p])
            .sum()
    }

    pub fn abstract_count(&self) -> usize {
        self.documents.iter().filter(|d| !d.abstract_text.is_empty()).count()
    }

    /// Writes the canonical one-record-per-line export.
    pub fn write_canonical<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for doc in &self.documents {
            serde_json::to_writer(&mut out, doc)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn read_canonical<R: BufRead>(input: R) -> Result<Self> {
        let mut documents = Vec::new();
        for (n, line) in input.lines().enumerate() {
            let line = line.map_err(|e| Error::Parse {
                line: n + 1,
                message: e.to_string(),
            })?;
            if line.trim().is_empty() {
                continue;
            }
            let doc: Document = serde_json::from_str(&line).map_err(|e| Error::Parse {
                line: n + 1,
                message: e.to_string(),
            })?;
            documents.push(doc);
        }
        Corpus::from_documents(documents)
    }

    /// Writes the prefixed-line record format.
    pub fn write_records<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for doc in &self.documents {
            writeln!(out, "#*{}", doc.title)?;
            writeln!(out, "#@{}", doc.authors.join(", "))?;
            if let Some(year) = doc.year {
                writeln!(out, "#t{year}")?;
            }
            if !doc.venue.is_empty() {
                writeln!(out, "#c{}", doc.venue)?;
            }
            writeln!(out, "#index{}", doc.doc_id)?;
            for r in &doc.references {
                writeln!(out, "#%{r}")?;
            }
            if !doc.abstract_text.is_empty() {
                writeln!(out, "#!{}", doc.abstract_text)?;
            }
            writeln!(out)?;
        }
        Ok(())
    }
}

#[derive(Default)]
struct PendingRecord {
    start_line: usize,
    title: Option<String>,
    authors: Vec<String>,
    year: Option<String>,
    venue: String,
    doc_id: Option<String>,
    references: Vec<String>,
    abstract_text: String,
}

impl PendingRecord {
    fn is_empty(&self) -> bool {
        self.title.is_none()
            && self.authors.is_empty()
            && self.year.is_none()
            && self.doc_id.is_none()
            && self.references.is_empty()
            && self.abstract_text.is_empty()
            && self.venue.is_empty()
    }

    fn finish(self, report: &mut ParseReport) -> Result<Option<Document>> {
        report.records += 1;
        let Some(doc_id) = self.doc_id.filter(|id| !id.is_empty()) else {
            return Err(Error::Parse {
                line: self.start_line,
                message: "record has no #index line".into(),
            });
        };
        let title = match self.title {
            Some(t) if !t.is_empty() => t,
            _ => {
                report.missing_title += 1;
                return Ok(None);
            }
        };
        let year = match self.year.as_deref().map(str::trim) {
            None | Some("") => None,
            Some(y) => match y.parse::<i32>() {
                Ok(y) => Some(y),
                Err(_) => {
                    report.bad_year += 1;
                    return Ok(None);
                }
            },
        };
        let authors: Vec<String> = self
            .authors
            .iter()
            .map(|a| normalize_name(a))
            .filter(|a| !a.is_empty())
            .collect();
        if authors.is_empty() {
            report.missing_authors += 1;
            return Ok(None);
        }
        Ok(Some(Document {
            doc_id,
            title,
            abstract_text: self.abstract_text,
            authors,
            year,
            venue: self.venue,
            references: self.references,
        }))
    }
}

/// Parses the prefixed-line record format.
///
/// Records with a malformed year, no title or no authors are skipped and
/// counted in the returned report; a duplicate `#index` is an error.
pub fn parse_records<R: BufRead>(input: R) -> Result<(Corpus, ParseReport)> {
    let mut report = ParseReport::default();
    let mut documents = Vec::new();
    let mut current = PendingRecord::default();

    let flush = |rec: PendingRecord, docs: &mut Vec<Document>, report: &mut ParseReport| {
        if rec.is_empty() {
            return Ok(());
        }
        if let Some(doc) = rec.finish(report)? {
            docs.push(doc);
        }
        Ok::<(), Error>(())
    };

    for (n, line) in input.lines().enumerate() {
        let lineno = n + 1;
        let line = line.map_err(|e| Error::Parse {
            line: lineno,
            message: e.to_string(),
        })?;
        let line = line.trim_end_matches(['\r', '\n']);
        if line.trim().is_empty() {
            flush(std::mem::take(&mut current), &mut documents, &mut report)?;
            continue;
        }
        // A new title starts a new record even without a separating blank line.
        if line.starts_with("#*") && current.title.is_some() {
            flush(std::mem::take(&mut current), &mut documents, &mut report)?;
        }
        if current.is_empty() {
            current.start_line = lineno;
        }
        if let Some(rest) = line.strip_prefix("#index") {
            current.doc_id = Some(rest.trim().to_string());
        } else if let Some(rest) = line.strip_prefix("#*") {
            current.title = Some(rest.trim().to_string());
        } else if let Some(rest) = line.strip_prefix("#@") {
            current.authors.extend(rest.split(',').map(str::to_string));
        } else if let Some(rest) = line.strip_prefix("#t") {
            current.year = Some(rest.to_string());
        } else if let Some(rest) = line.strip_prefix("#c") {
            current.venue = rest.trim().to_string();
        } else if let Some(rest) = line.strip_prefix("#%") {
            let r = rest.trim();
            if !r.is_empty() {
                current.references.push(r.to_string());
            }
        } else if let Some(rest) = line.strip_prefix("#!") {
            current.abstract_text = rest.trim().to_string();
        }
        // Other prefixes (e.g. #arnetid) are ignored.
    }
    flush(current, &mut documents, &mut report)?;

    let mut seen = HashSet::new();
    for doc in &documents {
        if !seen.insert(doc.doc_id.as_str()) {
            return Err(Error::DuplicateDocId(doc.doc_id.clone()));
        }
    }
    Ok((Corpus::from_documents(documents)?, report))
}
