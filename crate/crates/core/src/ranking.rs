use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RankingKind {
    Topic,
    Citation,
    Betweenness,
    Closeness,
    PageRank,
    Degree,
    Influence,
    HubScore,
    Aggregate,
}

impl RankingKind {
    /// The eight single rankings, in report column order.
    pub const SINGLE: [RankingKind; 8] = [
        RankingKind::Topic,
        RankingKind::Citation,
        RankingKind::Betweenness,
        RankingKind::Closeness,
        RankingKind::PageRank,
        RankingKind::Degree,
        RankingKind::Influence,
        RankingKind::HubScore,
    ];

    pub fn label(self) -> &'static str {
        match self {
            RankingKind::Topic => "topic",
            RankingKind::Citation => "citation",
            RankingKind::Betweenness => "betweenness",
            RankingKind::Closeness => "closeness",
            RankingKind::PageRank => "pagerank",
            RankingKind::Degree => "degree",
            RankingKind::Influence => "influence",
            RankingKind::HubScore => "hubscore",
            RankingKind::Aggregate => "aggregate",
        }
    }

    /// Short column heading used in MAP tables.
    pub fn column(self) -> &'static str {
        match self {
            RankingKind::Topic => "Topic",
            RankingKind::Citation => "Cit.",
            RankingKind::Betweenness => "Bet.",
            RankingKind::Closeness => "Cls",
            RankingKind::PageRank => "PR",
            RankingKind::Degree => "Dgr",
            RankingKind::Influence => "Inf.",
            RankingKind::HubScore => "HS",
            RankingKind::Aggregate => "MC2",
        }
    }
}

impl fmt::Display for RankingKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for RankingKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let all = RankingKind::SINGLE.iter().chain([&RankingKind::Aggregate]);
        for &k in all {
            if s.eq_ignore_ascii_case(k.label()) || s == k.column() {
                return Ok(k);
            }
        }
        Err(Error::InvalidParameter(format!("unknown ranking kind {s:?}")))
    }
}

/// An ordered, possibly partial list of authors, scores non-increasing, ties
/// broken by author name.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ranking {
    pub kind: RankingKind,
    items: Vec<(String, f64)>,
    pub partial: bool,
}

impl Ranking {
    /// Sorts by score descending, then name ascending. Duplicate authors are
    /// an error.
    pub fn from_scores(
        kind: RankingKind,
        scores: impl IntoIterator<Item = (String, f64)>,
        partial: bool,
    ) -> Result<Self> {
        let mut items: Vec<(String, f64)> = scores.into_iter().collect();
        items.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        let mut seen = HashSet::new();
        for (name, _) in &items {
            if !seen.insert(name.as_str()) {
                return Err(Error::DuplicateItem(name.clone()));
            }
        }
        Ok(Ranking { kind, items, partial })
    }

    /// Keeps the given order; scores are assigned as descending ranks
    /// (n, n-1, ..., 1) so the sort invariant holds.
    pub fn from_order(kind: RankingKind, authors: Vec<String>, partial: bool) -> Result<Self> {
        let n = authors.len();
        let mut seen = HashSet::new();
        for a in &authors {
            if !seen.insert(a.as_str()) {
                return Err(Error::DuplicateItem(a.clone()));
            }
        }
        Ok(Ranking {
            kind,
            items: authors
                .into_iter()
                .enumerate()
                .map(|(i, a)| (a, (n - i) as f64))
                .collect(),
            partial,
        })
    }

    pub fn items(&self) -> &[(String, f64)] {
        &self.items
    }

    pub fn authors(&self) -> impl Iterator<Item = &str> {
        self.items.iter().map(|(a, _)| a.as_str())
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn position(&self, author: &str) -> Option<usize> {
        self.items.iter().position(|(a, _)| a == author)
    }

    /// Drops the excluded authors, preserving the order of the rest.
    pub fn without(&self, excluded: &BTreeSet<String>) -> Ranking {
        Ranking {
            kind: self.kind,
            items: self
                .items
                .iter()
                .filter(|(a, _)| !excluded.contains(a))
                .cloned()
                .collect(),
            partial: self.partial,
        }
    }

    /// Ranking file: `rank,author,score,kind`, ranks from 1.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let err = |e: csv::Error| Error::InvalidParameter(format!("csv: {e}"));
        w.write_record(["rank", "author", "score", "kind"]).map_err(err)?;
        for (i, (a, s)) in self.items.iter().enumerate() {
            w.write_record([&(i + 1).to_string(), a, &format_score(*s), self.kind.label()])
                .map_err(err)?;
        }
        w.flush().map_err(|e| Error::InvalidParameter(format!("csv: {e}")))
    }

    /// Score dump: `author,kind,score,rank`.
    pub fn write_score_dump<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let err = |e: csv::Error| Error::InvalidParameter(format!("csv: {e}"));
        w.write_record(["author", "kind", "score", "rank"]).map_err(err)?;
        for (i, (a, s)) in self.items.iter().enumerate() {
            w.write_record([a, self.kind.label(), &format_score(*s), &(i + 1).to_string()])
                .map_err(err)?;
        }
        w.flush().map_err(|e| Error::InvalidParameter(format!("csv: {e}")))
    }

    /// Reads a ranking file; rows are taken in rank order.
    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(input);
        let bad = |m: String| Error::InvalidParameter(format!("ranking csv: {m}"));
        let headers = r.headers().map_err(|e| bad(e.to_string()))?.clone();
        let col = |name: &str| {
            headers
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| bad(format!("missing column {name}")))
        };
        let (rank_c, author_c, score_c, kind_c) = (col("rank")?, col("author")?, col("score")?, col("kind")?);
        let mut rows = Vec::new();
        let mut kind = None;
        for rec in r.records() {
            let rec = rec.map_err(|e| bad(e.to_string()))?;
            let rank: usize = rec[rank_c]
                .parse()
                .map_err(|_| bad(format!("bad rank {:?}", &rec[rank_c])))?;
            let score: f64 = rec[score_c]
                .parse()
                .map_err(|_| bad(format!("bad score {:?}", &rec[score_c])))?;
            let k: RankingKind = rec[kind_c].parse()?;
            if *kind.get_or_insert(k) != k {
                return Err(bad("mixed kinds in one file".into()));
            }
            rows.push((rank, rec[author_c].to_string(), score));
        }
        rows.sort_by_key(|r| r.0);
        let kind = kind.unwrap_or(RankingKind::Aggregate);
        let mut seen = HashSet::new();
        for (_, a, _) in &rows {
            if !seen.insert(a.clone()) {
                return Err(Error::DuplicateItem(a.clone()));
            }
        }
        Ok(Ranking {
            kind,
            items: rows.into_iter().map(|(_, a, s)| (a, s)).collect(),
            partial: false,
        })
    }
}

/// Shortest representation that round-trips.
pub(crate) fn format_score(s: f64) -> String {
    format!("{s:?}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ties_break_by_name() {
        let r = Ranking::from_scores(
            RankingKind::Degree,
            [("b".to_string(), 1.0), ("a".to_string(), 1.0), ("c".to_string(), 2.0)],
            false,
        )
        .unwrap();
        assert_eq!(r.authors().collect::<Vec<_>>(), ["c", "a", "b"]);
    }

    #[test]
    fn duplicates_rejected() {
        let dup = [("a".to_string(), 1.0), ("a".to_string(), 2.0)];
        assert!(Ranking::from_scores(RankingKind::Degree, dup, false).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let r = Ranking::from_scores(
            RankingKind::PageRank,
            [("Doe, J".to_string(), 0.25), ("x".to_string(), 0.75)],
            false,
        )
        .unwrap();
        let mut buf = Vec::new();
        r.write_csv(&mut buf).unwrap();
        assert_eq!(Ranking::read_csv(buf.as_slice()).unwrap(), r);
        let mut dump = Vec::new();
        r.write_score_dump(&mut dump).unwrap();
        assert!(String::from_utf8(dump)
            .unwrap()
            .starts_with("author,kind,score,rank\nx,pagerank,0.75,1\n"));
    }

    #[test]
    fn kinds_parse_from_label_and_column() {
        for k in RankingKind::SINGLE {
            assert_eq!(k.label().parse::<RankingKind>().unwrap(), k);
            assert_eq!(k.column().parse::<RankingKind>().unwrap(), k);
        }
    }
}
