//! Column-parallel saturating coordinate descent.
//!
//! Each mode pass takes a snapshot of the factor, then runs one task per
//! rank column. A task computes its gradient column from a single
//! tensor-times-vector MTTKRP plus the Gram term of the snapshot, gates and
//! updates its rows, and hands back the new column. Columns therefore see
//! each other's pass-start values (Jacobi across columns, Gauss–Seidel down
//! a column), which makes the result independent of the worker count.
//!
//! Columns are split statically into `workers` contiguous blocks.

use std::ops::Range;

use rayon::prelude::*;
use rayon::{ThreadPool, ThreadPoolBuilder};

use crate::error::{Error, Result};
use crate::kernels::{column_gradient_with, lipschitz_constant, mode_hessian, GramCache};
use crate::matrix::{FactorMatrix, KruskalModel, Matrix};
use crate::tensor::{Mode, SparseTensor3};

use super::sacd::{element_importance, projected_value, Gating};
use super::{check_pass_inputs, run_iterations, FitReport, ImportanceState, PassStats, Solver, SolverConfig};

/// Fixed-size worker pool for column tasks.
pub struct ColumnPool {
    pool: ThreadPool,
    workers: usize,
}

impl ColumnPool {
    pub fn new(workers: usize) -> Result<Self> {
        if workers == 0 {
            return Err(Error::arg("workers must be at least 1"));
        }
        let pool = ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| Error::arg(format!("cannot start {workers} workers: {e}")))?;
        Ok(ColumnPool { pool, workers })
    }

    pub fn workers(&self) -> usize {
        self.workers
    }

    fn blocks(&self, rank: usize) -> Vec<Range<usize>> {
        let n = self.workers.min(rank).max(1);
        let base = rank / n;
        let extra = rank % n;
        let mut start = 0;
        (0..n)
            .map(|b| {
                let len = base + usize::from(b < extra);
                let range = start..start + len;
                start += len;
                range
            })
            .collect()
    }
}

struct ColumnOutcome {
    column: usize,
    values: Vec<f64>,
    z: Vec<f64>,
    updates: usize,
}

struct ColumnTask<'a> {
    x: &'a SparseTensor3,
    model: &'a KruskalModel,
    snapshot: &'a FactorMatrix,
    mode: Mode,
    h: &'a Matrix,
    lipschitz: f64,
    z_prev: &'a Matrix,
    k: usize,
    increased: bool,
    epsilon_h: f64,
}

impl ColumnTask<'_> {
    fn run(&self, r: usize) -> Result<ColumnOutcome> {
        let rows = self.snapshot.rows();
        let mut values = self.snapshot.column(r);
        let mut z = vec![0.0; rows];
        let h_rr = self.h.get(r, r);
        if h_rr.is_nan() || h_rr < self.epsilon_h {
            return Ok(ColumnOutcome {
                column: r,
                values,
                z,
                updates: 0,
            });
        }
        let mut g = column_gradient_with(self.x, self.model, self.snapshot, self.mode, r, self.h)
            .map_err(|e| Error::Task {
                column: r,
                msg: e.to_string(),
            })?;
        let mut updates = 0;
        for q in 0..rows {
            let u = values[q];
            let new = projected_value(u, g[q], h_rr);
            let step = new - u;
            let z_qr = element_importance(g[q], step, self.lipschitz);
            z[q] = z_qr;
            if !Gating::Saturating.accept(self.k, z_qr, self.z_prev.get(q, r), self.increased) {
                continue;
            }
            updates += 1;
            if step != 0.0 {
                values[q] = new;
                g[q] += step * h_rr;
            }
        }
        Ok(ColumnOutcome {
            column: r,
            values,
            z,
            updates,
        })
    }
}

/// One FSaCD pass over `mode`. Refreshes the mode's Gram matrix in `cache`.
#[allow(clippy::too_many_arguments)]
pub fn fsacd_mode_pass(
    x: &SparseTensor3,
    model: &mut KruskalModel,
    mode: Mode,
    state: &mut ImportanceState,
    k: usize,
    cache: &mut GramCache,
    epsilon_h: f64,
    pool: &ColumnPool,
) -> Result<PassStats> {
    check_pass_inputs(x, model, k)?;
    state.check_shape(model.factor(mode))?;
    let h = mode_hessian(cache, mode)?;
    let lipschitz = lipschitz_constant(&h)?;
    let rank = model.rank();
    let rows = x.dim(mode);
    let snapshot = model.factor(mode).clone();

    let outcomes: Vec<ColumnOutcome> = {
        let task = ColumnTask {
            x,
            model,
            snapshot: &snapshot,
            mode,
            h: &h,
            lipschitz,
            z_prev: &state.z_prev,
            k,
            increased: state.total_increased(),
            epsilon_h,
        };
        let blocks = pool.blocks(rank);
        let per_block: Vec<Result<Vec<ColumnOutcome>>> = pool.pool.install(|| {
            blocks
                .into_par_iter()
                .map(|block| block.map(|r| task.run(r)).collect())
                .collect()
        });
        let mut flat = Vec::with_capacity(rank);
        for block in per_block {
            flat.extend(block?);
        }
        flat
    };

    debug_assert!(
        outcomes.iter().enumerate().all(|(i, o)| o.column == i),
        "every column must be owned by exactly one task"
    );

    let mut z = Matrix::zeros(rows, rank);
    let mut updates = 0;
    let factor = model.factor_mut(mode);
    for outcome in &outcomes {
        factor.set_column(outcome.column, &outcome.values);
        for (q, &v) in outcome.z.iter().enumerate() {
            z.set(q, outcome.column, v);
        }
        updates += outcome.updates;
    }
    // Column-major order, matching the serial sweep.
    let mut total = 0.0;
    for r in 0..rank {
        for q in 0..rows {
            total += z.get(q, r);
        }
    }

    state.finish_pass(z, total);
    cache.refresh(mode, model);
    Ok(PassStats { updates, lipschitz })
}

pub fn fit_fsacd(x: &SparseTensor3, config: &SolverConfig, workers: usize) -> Result<FitReport> {
    let pool = ColumnPool::new(workers)?;
    let eps = config.epsilon_h;
    run_iterations(x, config, Solver::Fsacd, |model, mode, state, k, cache| {
        fsacd_mode_pass(x, model, mode, state, k, cache, eps, &pool)
    })
}

/// Runs FSaCD with one worker and with `workers`, and returns the parallel
/// report with `speedup` set to the ratio of total pass wall times.
pub fn measure_fsacd_speedup(x: &SparseTensor3, config: &SolverConfig, workers: usize) -> Result<FitReport> {
    let serial_ms = fit_fsacd(x, config, 1)?.total_wall_ms();
    let mut parallel = fit_fsacd(x, config, workers)?;
    let parallel_ms = parallel.total_wall_ms();
    parallel.speedup = Some(if parallel_ms > 0.0 {
        serial_ms / parallel_ms
    } else {
        1.0
    });
    Ok(parallel)
}
