//! MC2 Markov-chain rank aggregation over possibly partial lists, and greedy
//! selection of which rankings to fuse.
//!
//! From state x_i the chain picks, uniformly, one of the lists containing
//! x_i, then moves uniformly to an item ranked not lower than x_i in that
//! list. A uniform teleport with weight α makes the chain ergodic. Items are
//! scored by the stationary distribution.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::eval::{average_precision_at, ExpertSet};
use crate::ranking::{Ranking, RankingKind};

pub const DEFAULT_SMOOTHING: f64 = 0.01;

/// Transition rule of a single list: from an item, uniform over the items
/// ranked at or above it.
#[derive(Debug, Clone)]
pub struct ListTransition {
    items: Vec<String>,
    position: HashMap<String, usize>,
}

pub fn list_transition(list: &[String]) -> Result<ListTransition> {
    let mut position = HashMap::with_capacity(list.len());
    for (i, item) in list.iter().enumerate() {
        if position.insert(item.clone(), i).is_some() {
            return Err(Error::DuplicateItem(item.clone()));
        }
    }
    Ok(ListTransition {
        items: list.to_vec(),
        position,
    })
}

impl ListTransition {
    pub fn contains(&self, item: &str) -> bool {
        self.position.contains_key(item)
    }

    /// Outgoing probabilities from `item`, or `None` if the list lacks it.
    pub fn row(&self, item: &str) -> Option<Vec<(&str, f64)>> {
        let p = *self.position.get(item)?;
        let q = (p + 1) as f64;
        Some(self.items[..=p].iter().map(|x| (x.as_str(), 1.0 / q)).collect())
    }
}

/// The smoothed chain R' = (1 − α) R + α U over the item universe, kept in
/// factored form: each list stores state indices in rank order.
#[derive(Debug, Clone)]
pub struct TransitionMatrix {
    states: Vec<String>,
    lists: Vec<Vec<usize>>,
    /// Number of lists containing each state.
    membership: Vec<usize>,
    alpha: f64,
}

/// Universe = union of list items, sorted.
pub fn combine(lists: &[Vec<String>], alpha: f64) -> Result<TransitionMatrix> {
    let universe: BTreeSet<&String> = lists.iter().flatten().collect();
    let universe: Vec<String> = universe.into_iter().cloned().collect();
    combine_over(lists, &universe, alpha)
}

/// Like [`combine`] with an explicit universe. Every state must occur in some
/// list and every list item must be a state.
pub fn combine_over(lists: &[Vec<String>], universe: &[String], alpha: f64) -> Result<TransitionMatrix> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::InvalidParameter(format!("smoothing {alpha} outside [0, 1]")));
    }
    if universe.is_empty() {
        return Err(Error::InvalidParameter("no items to aggregate".into()));
    }
    let mut states = universe.to_vec();
    states.sort();
    if let Some(w) = states.windows(2).find(|w| w[0] == w[1]) {
        return Err(Error::DuplicateItem(w[0].clone()));
    }
    let index: HashMap<&str, usize> = states.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
    let mut membership = vec![0; states.len()];
    let mut encoded = Vec::with_capacity(lists.len());
    for list in lists {
        list_transition(list)?;
        let ids = list
            .iter()
            .map(|item| {
                index
                    .get(item.as_str())
                    .copied()
                    .ok_or_else(|| Error::InvalidParameter(format!("list item {item:?} is not in the universe")))
            })
            .collect::<Result<Vec<usize>>>()?;
        for &i in &ids {
            membership[i] += 1;
        }
        encoded.push(ids);
    }
    if let Some(i) = membership.iter().position(|&c| c == 0) {
        return Err(Error::OrphanItem(states[i].clone()));
    }
    Ok(TransitionMatrix {
        states,
        lists: encoded,
        membership,
        alpha,
    })
}

impl TransitionMatrix {
    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// y = R'ᵀ x, in time linear in the total list length.
    pub fn transpose_apply(&self, x: &[f64]) -> Vec<f64> {
        let n = self.states.len();
        let mut y = vec![0.0; n];
        for list in &self.lists {
            // Item at position p spreads x_i / (c_i (p + 1)) over positions
            // 0..=p, so position j receives the suffix sum from j onwards.
            let mut suffix = 0.0;
            for (p, &i) in list.iter().enumerate().rev() {
                suffix += x[i] / (self.membership[i] as f64 * (p + 1) as f64);
                y[list[p]] += suffix;
            }
        }
        let teleport = self.alpha * x.iter().sum::<f64>() / n as f64;
        for v in &mut y {
            *v = (1.0 - self.alpha) * *v + teleport;
        }
        y
    }

    /// Dense rows of R', indexed like [`states`](Self::states).
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let n = self.states.len();
        let mut rows = vec![vec![0.0; n]; n];
        for list in &self.lists {
            for (p, &i) in list.iter().enumerate() {
                let w = 1.0 / (self.membership[i] as f64 * (p + 1) as f64);
                for &j in &list[..=p] {
                    rows[i][j] += w;
                }
            }
        }
        for row in &mut rows {
            for v in row.iter_mut() {
                *v = (1.0 - self.alpha) * *v + self.alpha / n as f64;
            }
        }
        rows
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StationaryParams {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for StationaryParams {
    fn default() -> Self {
        StationaryParams {
            tol: 1e-10,
            max_iter: 100_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AggregateScore {
    pub states: Vec<String>,
    pub x: Vec<f64>,
}

/// Power iteration from the uniform distribution until ‖x − R'ᵀx‖₁ < tol.
pub fn stationary(matrix: &TransitionMatrix, params: StationaryParams) -> Result<AggregateScore> {
    let n = matrix.len();
    let mut x = vec![1.0 / n as f64; n];
    let mut residual = f64::INFINITY;
    for _ in 0..params.max_iter {
        let mut y = matrix.transpose_apply(&x);
        let total: f64 = y.iter().sum();
        y.iter_mut().for_each(|v| *v /= total);
        residual = y.iter().zip(&x).map(|(a, b)| (a - b).abs()).sum();
        x = y;
        if residual < params.tol {
            return Ok(AggregateScore {
                states: matrix.states.clone(),
                x,
            });
        }
    }
    Err(Error::NonConvergence {
        what: "MC2 stationary distribution",
        iterations: params.max_iter,
        residual,
    })
}

/// Fuses the rankings into one ranked by stationary mass, ties by name.
pub fn mc2(lists: &[Ranking], alpha: f64) -> Result<Ranking> {
    mc2_with(lists, alpha, StationaryParams::default())
}

pub fn mc2_with(lists: &[Ranking], alpha: f64, params: StationaryParams) -> Result<Ranking> {
    if lists.is_empty() {
        return Err(Error::InvalidParameter("nothing to aggregate".into()));
    }
    let orders: Vec<Vec<String>> = lists.iter().map(|r| r.authors().map(String::from).collect()).collect();
    let matrix = combine(&orders, alpha)?;
    let score = stationary(&matrix, params)?;
    Ranking::from_scores(RankingKind::Aggregate, score.states.into_iter().zip(score.x), false)
}

#[derive(Debug, Clone, PartialEq)]
pub struct FuseOutcome {
    /// Indices into the candidates, in selection order.
    pub chosen: Vec<usize>,
    /// Metric after each accepted selection; strictly increasing.
    pub trace: Vec<f64>,
    pub ranking: Ranking,
}

impl FuseOutcome {
    pub fn chosen_kinds(&self, candidates: &[Ranking]) -> Vec<RankingKind> {
        self.chosen.iter().map(|&i| candidates[i].kind).collect()
    }
}

fn fuse_subset(candidates: &[Ranking], subset: &[usize], alpha: f64) -> Result<Ranking> {
    if let [only] = subset {
        return Ok(candidates[*only].clone());
    }
    let lists: Vec<Ranking> = subset.iter().map(|&i| candidates[i].clone()).collect();
    mc2(&lists, alpha)
}

/// Greedy forward selection under ap@20 against `train_experts`.
pub fn greedy_fuse(candidates: &[Ranking], train_experts: &ExpertSet, alpha: f64) -> Result<FuseOutcome> {
    if train_experts.is_empty() {
        return Err(Error::EmptyExperts);
    }
    greedy_fuse_by(candidates, alpha, |r| {
        average_precision_at(r, train_experts, 20).expect("expert set is non-empty")
    })
}

/// Starts from the best single candidate under `metric`, then repeatedly adds
/// the candidate whose inclusion most increases the metric of the fused
/// ranking, stopping when no addition gives a strict increase. Ties go to the
/// earlier candidate.
pub fn greedy_fuse_by<M>(candidates: &[Ranking], alpha: f64, metric: M) -> Result<FuseOutcome>
where
    M: Fn(&Ranking) -> f64 + Sync,
{
    if candidates.is_empty() {
        return Err(Error::InvalidParameter(
            "greedy fusion needs at least one ranking".into(),
        ));
    }
    let singles: Vec<f64> = candidates.par_iter().map(&metric).collect();
    let first = argmax(&singles).expect("non-empty");
    let mut chosen = vec![first];
    let mut trace = vec![singles[first]];
    loop {
        let options: Vec<usize> = (0..candidates.len()).filter(|i| !chosen.contains(i)).collect();
        if options.is_empty() {
            break;
        }
        let scored: Vec<(usize, f64)> = options
            .par_iter()
            .map(|&c| {
                let mut subset = chosen.clone();
                subset.push(c);
                fuse_subset(candidates, &subset, alpha).map(|r| (c, metric(&r)))
            })
            .collect::<Result<_>>()?;
        let values: Vec<f64> = scored.iter().map(|s| s.1).collect();
        let best = argmax(&values).expect("non-empty");
        let (c, value) = scored[best];
        if value > *trace.last().unwrap() {
            chosen.push(c);
            trace.push(value);
        } else {
            break;
        }
    }
    let ranking = fuse_subset(candidates, &chosen, alpha)?;
    Ok(FuseOutcome { chosen, trace, ranking })
}

fn argmax(values: &[f64]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, &v) in values.iter().enumerate() {
        if best.is_none_or(|b| v > values[b]) {
            best = Some(i);
        }
    }
    best
}

/// Selection order of a fusion, as written next to fused ranking files.
pub fn provenance(outcome: &FuseOutcome, candidates: &[Ranking]) -> BTreeMap<&'static str, String> {
    let kinds: Vec<&str> = outcome
        .chosen_kinds(candidates)
        .into_iter()
        .map(|k| k.label())
        .collect();
    let trace: Vec<String> = outcome.trace.iter().map(|v| format!("{v:?}")).collect();
    BTreeMap::from([("chosen", kinds.join(",")), ("trace", trace.join(","))])
}
