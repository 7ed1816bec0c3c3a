//! k-fold fit-and-score protocol: each fold trains on the complement,
//! then reports held-out RMSE, top-N precision/recall/F1 for the users
//! present in the held-out part, and the distinctiveness of the `W` factor.

use serde::Serialize;

use crate::error::Result;
use crate::metrics::{
    kfold_split, pattern_distinctiveness, precision_recall_f1, recommend_top_n, relevant_items, rmse,
    SplitSpec, TopNQuery,
};
use crate::solver::{fit, Solver, SolverConfig};
use crate::tensor::SparseTensor3;

#[derive(Debug, Clone, PartialEq)]
pub struct EvalPlan {
    pub config: SolverConfig,
    pub solver: Solver,
    pub workers: usize,
    pub folds: usize,
    pub top_n: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FoldScores {
    pub rmse: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub pd: f64,
    pub train_objective: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FoldRecord {
    pub fold: usize,
    pub train_nnz: usize,
    pub test_nnz: usize,
    #[serde(flatten)]
    pub scores: FoldScores,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub solver: String,
    pub rank: usize,
    pub iters: usize,
    pub seed: u64,
    pub top_n: usize,
    pub folds: Vec<FoldRecord>,
    pub mean: FoldScores,
}

pub fn cross_validate(x: &SparseTensor3, plan: &EvalPlan) -> Result<EvalReport> {
    plan.config.validate()?;
    let query = TopNQuery::new(plan.top_n);
    let splits = kfold_split(
        x,
        SplitSpec {
            folds: plan.folds,
            seed: plan.config.seed,
        },
    )?;
    let mut folds = Vec::with_capacity(splits.len());
    for (i, split) in splits.iter().enumerate() {
        let report = fit(&split.train, &plan.config, plan.solver, plan.workers)?;
        let relevant = relevant_items(&split.test, &query);
        let recs = recommend_top_n(&report.model, &split.train, relevant.keys().copied(), plan.top_n)?;
        let pr = precision_recall_f1(&recs, &relevant)?;
        folds.push(FoldRecord {
            fold: i,
            train_nnz: split.train.nnz(),
            test_nnz: split.test.len(),
            scores: FoldScores {
                rmse: rmse(&split.test, &report.model)?,
                precision: pr.precision,
                recall: pr.recall,
                f1: pr.f1,
                pd: pattern_distinctiveness(report.model.w())?,
                train_objective: report.final_objective(),
            },
        });
    }
    let k = folds.len() as f64;
    let avg = |f: fn(&FoldScores) -> f64| folds.iter().map(|r| f(&r.scores)).sum::<f64>() / k;
    let mean = FoldScores {
        rmse: avg(|s| s.rmse),
        precision: avg(|s| s.precision),
        recall: avg(|s| s.recall),
        f1: avg(|s| s.f1),
        pd: avg(|s| s.pd),
        train_objective: avg(|s| s.train_objective),
    };
    Ok(EvalReport {
        solver: plan.solver.to_string(),
        rank: plan.config.rank,
        iters: plan.config.max_iters,
        seed: plan.config.seed,
        top_n: plan.top_n,
        folds,
        mean,
    })
}
