//! Expert splits, precision and average precision at a cutoff, and MAP
//! tables across fields.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::io::Write;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ranking::{format_score, Ranking, RankingKind};
use crate::seed;

pub type ExpertSet = BTreeSet<String>;

/// Report cutoffs N = 5, 10, ..., 50.
pub const CUTOFFS: [usize; 10] = [5, 10, 15, 20, 25, 30, 35, 40, 45, 50];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExpertSplit {
    pub field: String,
    pub train: ExpertSet,
    pub test: ExpertSet,
    pub seed: u64,
}

/// Shuffles the sorted, deduplicated experts with a stream keyed by `seed`
/// and the field name; the first ⌈n/2⌉ go to train.
pub fn split_experts(field: &str, experts: &[String], seed: u64) -> Result<ExpertSplit> {
    let mut all: Vec<String> = experts.iter().cloned().collect::<ExpertSet>().into_iter().collect();
    if all.len() < 2 {
        return Err(Error::InvalidParameter(format!(
            "field {field:?} has {} distinct experts; at least 2 are needed to split",
            all.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed::for_label(seed, field));
    all.shuffle(&mut rng);
    let test = all.split_off(all.len().div_ceil(2));
    Ok(ExpertSplit {
        field: field.to_string(),
        train: all.into_iter().collect(),
        test: test.into_iter().collect(),
        seed,
    })
}

pub fn filter_ranking(ranking: &Ranking, excluded: &ExpertSet) -> Ranking {
    ranking.without(excluded)
}

fn relevance<'a>(ranking: &'a Ranking, experts: &'a ExpertSet, n: usize) -> impl Iterator<Item = bool> + 'a {
    let hits = ranking.authors().take(n).map(|a| experts.contains(a));
    let pad = n.saturating_sub(ranking.len());
    hits.chain(std::iter::repeat_n(false, pad))
}

/// Fraction of the top N that are experts; the denominator is N even when the
/// ranking is shorter.
pub fn precision_at(ranking: &Ranking, experts: &ExpertSet, n: usize) -> f64 {
    assert!(n >= 1, "cutoff must be at least 1");
    relevance(ranking, experts, n).filter(|&r| r).count() as f64 / n as f64
}

/// Σ_{i ≤ N} p@i · rel(i) / R with R the number of experts.
pub fn average_precision_at(ranking: &Ranking, experts: &ExpertSet, n: usize) -> Result<f64> {
    assert!(n >= 1, "cutoff must be at least 1");
    if experts.is_empty() {
        return Err(Error::EmptyExperts);
    }
    let mut hits = 0usize;
    let mut sum = 0.0;
    for (i, rel) in relevance(ranking, experts, n).enumerate() {
        if rel {
            hits += 1;
            sum += hits as f64 / (i + 1) as f64;
        }
    }
    Ok(sum / experts.len() as f64)
}

pub fn map_at(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::InvalidParameter("MAP over zero fields".into()));
    }
    Ok(values.iter().sum::<f64>() / values.len() as f64)
}

/// ap@N at every report cutoff for one field and one ranking kind.
pub fn ap_curve(ranking: &Ranking, experts: &ExpertSet) -> Result<Vec<f64>> {
    CUTOFFS
        .iter()
        .map(|&n| average_precision_at(ranking, experts, n))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldEval {
    pub field: String,
    /// ap@N at each of [`CUTOFFS`], keyed by ranking kind.
    pub ap: BTreeMap<RankingKind, Vec<f64>>,
    /// Rankings fused into the aggregate, in selection order.
    pub chosen: Vec<RankingKind>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    /// Topic model the run used, e.g. `lsi`.
    pub model: String,
    pub fields: Vec<FieldEval>,
}

impl EvalReport {
    pub fn columns() -> impl Iterator<Item = RankingKind> {
        RankingKind::SINGLE.into_iter().chain([RankingKind::Aggregate])
    }

    /// MAP@N per kind: one row per cutoff, columns in report order.
    pub fn map_table(&self) -> Result<Vec<(usize, Vec<f64>)>> {
        CUTOFFS
            .iter()
            .enumerate()
            .map(|(ci, &n)| {
                let row = Self::columns()
                    .map(|k| {
                        let vals: Vec<f64> = self
                            .fields
                            .iter()
                            .map(|f| f.ap.get(&k).map_or(0.0, |c| c[ci]))
                            .collect();
                        map_at(&vals)
                    })
                    .collect::<Result<Vec<f64>>>()?;
                Ok((n, row))
            })
            .collect()
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let err = |e: csv::Error| Error::InvalidParameter(format!("csv: {e}"));
        let header: Vec<&str> = std::iter::once("N")
            .chain(Self::columns().map(|k| k.column()))
            .collect();
        w.write_record(&header).map_err(err)?;
        for (n, row) in self.map_table()? {
            let rec: Vec<String> = std::iter::once(n.to_string())
                .chain(row.iter().map(|&v| format_score(v)))
                .collect();
            w.write_record(&rec).map_err(err)?;
        }
        w.flush().map_err(|e| Error::InvalidParameter(format!("csv: {e}")))
    }

    /// MAP table with three decimals, followed by the per-field selections.
    pub fn to_markdown(&self) -> Result<String> {
        let mut s = String::new();
        writeln!(s, "MAP@N ({}, {} fields)\n", self.model, self.fields.len()).unwrap();
        render_rows(&mut s, &[self])?;
        writeln!(s).unwrap();
        writeln!(s, "| Field | Fused |").unwrap();
        writeln!(s, "|---|---|").unwrap();
        for f in &self.fields {
            let chosen: Vec<&str> = f.chosen.iter().map(|k| k.column()).collect();
            writeln!(s, "| {} | {} |", f.field, chosen.join(" + ")).unwrap();
        }
        Ok(s)
    }
}

fn render_rows(s: &mut String, reports: &[&EvalReport]) -> Result<()> {
    let cols: Vec<&str> = EvalReport::columns().map(|k| k.column()).collect();
    let mut header = String::from("| N |");
    let mut rule = String::from("|---|");
    for r in reports {
        for c in &cols {
            if reports.len() > 1 {
                write!(header, " {c} ({}) |", r.model).unwrap();
            } else {
                write!(header, " {c} |").unwrap();
            }
            rule.push_str("---|");
        }
    }
    writeln!(s, "{header}\n{rule}").unwrap();
    let tables = reports.iter().map(|r| r.map_table()).collect::<Result<Vec<_>>>()?;
    for (ci, &n) in CUTOFFS.iter().enumerate() {
        write!(s, "| {n} |").unwrap();
        for t in &tables {
            for v in &t[ci].1 {
                write!(s, " {v:.3} |").unwrap();
            }
        }
        writeln!(s).unwrap();
    }
    Ok(())
}

/// Side-by-side MAP tables for several runs, one column group per run.
pub fn side_by_side_markdown(reports: &[&EvalReport]) -> Result<String> {
    if reports.is_empty() {
        return Err(Error::InvalidParameter("no reports to render".into()));
    }
    let mut s = String::new();
    let models: Vec<&str> = reports.iter().map(|r| r.model.as_str()).collect();
    writeln!(s, "MAP@N ({})\n", models.join(" vs ")).unwrap();
    render_rows(&mut s, reports)?;
    Ok(s)
}
