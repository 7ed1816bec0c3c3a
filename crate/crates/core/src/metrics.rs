//! Held-out evaluation: RMSE, top-N precision/recall/F1, pattern
//! distinctiveness, and k-fold splitting.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::matrix::{FactorMatrix, KruskalModel};
use crate::rng::{stream_rng, Stream};
use crate::tensor::{Entry, SparseTensor3};

/// Root mean squared residual over exactly the given entries.
pub fn rmse(test: &[Entry], model: &KruskalModel) -> Result<f64> {
    if test.is_empty() {
        return Err(Error::arg("rmse needs at least one test entry"));
    }
    let mut sum = 0.0;
    for e in test {
        let r = e.value - model.predict(e.q, e.p, e.s)?;
        sum += r * r;
    }
    Ok((sum / test.len() as f64).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrecisionRecall {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// Micro-averaged precision, recall and F1 over users. Users are matched by
/// key; a user missing from `recommended` contributes only false negatives.
pub fn precision_recall_f1(
    recommended: &BTreeMap<usize, Vec<usize>>,
    relevant: &BTreeMap<usize, BTreeSet<usize>>,
) -> Result<PrecisionRecall> {
    let relevant_total: usize = relevant.values().map(BTreeSet::len).sum();
    if relevant_total == 0 {
        return Err(Error::arg("no relevant items for any user"));
    }
    let mut tp = 0usize;
    let mut predicted = 0usize;
    for (user, items) in recommended {
        predicted += items.len();
        if let Some(rel) = relevant.get(user) {
            tp += items.iter().filter(|i| rel.contains(i)).count();
        }
    }
    let precision = if predicted == 0 {
        0.0
    } else {
        tp as f64 / predicted as f64
    };
    let recall = tp as f64 / relevant_total as f64;
    let f1 = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * (precision * recall / (precision + recall))
    };
    Ok(PrecisionRecall {
        precision,
        recall,
        f1,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Distinctiveness {
    /// Mean cosine similarity over column pairs `i < r`.
    pub mean: f64,
    pub max: f64,
}

fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dot / (na * nb)
    }
}

/// Pairwise column cosine similarity of a factor. An all-zero column has
/// similarity 0 with everything.
pub fn pattern_distinctiveness_stats(w: &FactorMatrix) -> Result<Distinctiveness> {
    let rank = w.rank();
    if rank < 2 {
        return Err(Error::arg("pattern distinctiveness needs rank >= 2"));
    }
    let cols: Vec<Vec<f64>> = (0..rank).map(|r| w.column(r)).collect();
    let mut sum = 0.0;
    let mut max = f64::NEG_INFINITY;
    let mut pairs = 0usize;
    for i in 0..rank {
        for r in i + 1..rank {
            let c = cosine(&cols[i], &cols[r]);
            sum += c;
            max = max.max(c);
            pairs += 1;
        }
    }
    Ok(Distinctiveness {
        mean: sum / pairs as f64,
        max,
    })
}

pub fn pattern_distinctiveness(w: &FactorMatrix) -> Result<f64> {
    Ok(pattern_distinctiveness_stats(w)?.mean)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitSpec {
    pub folds: usize,
    pub seed: u64,
}

impl Default for SplitSpec {
    fn default() -> Self {
        SplitSpec { folds: 5, seed: 0 }
    }
}

#[derive(Debug, Clone)]
pub struct Fold {
    pub train: SparseTensor3,
    pub test: Vec<Entry>,
}

/// Shuffles the entries once and deals them round-robin into `folds` test
/// sets; each fold trains on the complement.
pub fn kfold_split(x: &SparseTensor3, spec: SplitSpec) -> Result<Vec<Fold>> {
    if spec.folds < 2 {
        return Err(Error::arg(format!("folds must be >= 2, got {}", spec.folds)));
    }
    if x.nnz() < spec.folds {
        return Err(Error::arg(format!(
            "{} entries cannot be split into {} folds",
            x.nnz(),
            spec.folds
        )));
    }
    let mut order: Vec<usize> = (0..x.nnz()).collect();
    order.shuffle(&mut stream_rng(spec.seed, Stream::Folds));
    let mut assignment = vec![0usize; x.nnz()];
    for (rank, &pos) in order.iter().enumerate() {
        assignment[pos] = rank % spec.folds;
    }
    (0..spec.folds)
        .map(|fold| {
            let mut train = Vec::new();
            let mut test = Vec::new();
            for (e, &a) in x.entries().iter().zip(&assignment) {
                if a == fold {
                    test.push(*e);
                } else {
                    train.push(*e);
                }
            }
            Ok(Fold {
                train: SparseTensor3::new(x.dims(), train)?,
                test,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TopNQuery {
    pub n: usize,
    /// Held-out entries with value at or above this count as relevant.
    pub relevance_threshold: Option<f64>,
}

impl TopNQuery {
    pub fn new(n: usize) -> Self {
        TopNQuery {
            n,
            relevance_threshold: None,
        }
    }
}

/// Relevant items per user from held-out entries.
pub fn relevant_items(test: &[Entry], query: &TopNQuery) -> BTreeMap<usize, BTreeSet<usize>> {
    let mut out: BTreeMap<usize, BTreeSet<usize>> = BTreeMap::new();
    for e in test {
        if query.relevance_threshold.is_none_or(|t| e.value >= t) {
            out.entry(e.q).or_default().insert(e.p);
        }
    }
    out
}

/// Top-N items per user. An item is scored by its best context,
/// `max_s predict(q, p, s)`; items the user already has in `train` are not
/// candidates. Ties go to the lower item index.
pub fn recommend_top_n(
    model: &KruskalModel,
    train: &SparseTensor3,
    users: impl IntoIterator<Item = usize>,
    n: usize,
) -> Result<BTreeMap<usize, Vec<usize>>> {
    if n == 0 {
        return Err(Error::arg("top-N cutoff must be at least 1"));
    }
    if model.dims() != train.dims() {
        return Err(Error::arg("model and training tensor dims differ"));
    }
    let [dq, dp, ds] = model.dims();
    let rank = model.rank();
    let seen: HashSet<(usize, usize)> = train.user_item_pairs();
    let mut out = BTreeMap::new();
    let mut scores = vec![f64::NEG_INFINITY; dp];
    let mut weights = vec![0.0; rank];
    for q in users {
        if q >= dq {
            return Err(Error::arg(format!("user {q} outside mode length {dq}")));
        }
        scores.iter_mut().for_each(|s| *s = f64::NEG_INFINITY);
        let u = model.u().row(q);
        for s in 0..ds {
            let w = model.w().row(s);
            for r in 0..rank {
                weights[r] = u[r] * w[r];
            }
            for (p, score) in scores.iter_mut().enumerate() {
                let v = model.v().row(p);
                let value: f64 = weights.iter().zip(v).map(|(a, b)| a * b).sum();
                if value > *score {
                    *score = value;
                }
            }
        }
        let mut candidates: Vec<usize> = (0..dp).filter(|&p| !seen.contains(&(q, p))).collect();
        candidates.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
        candidates.truncate(n);
        out.insert(q, candidates);
    }
    Ok(out)
}
