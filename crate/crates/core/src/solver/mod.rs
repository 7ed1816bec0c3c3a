//! Nonnegative CP solvers: saturating coordinate descent (serial and
//! column-parallel) plus two baselines that update every element.

mod baselines;
mod fsacd;
mod report;
mod sacd;

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand::Rng;

use crate::error::{Error, Result};
use crate::kernels::{sparse_objective, GramCache};
use crate::matrix::{FactorMatrix, KruskalModel, Matrix};
use crate::rng::{stream_rng, Stream};
use crate::tensor::{Mode, SparseTensor3};

pub use baselines::{fit_hals, fit_plain_cd, hals_mode_pass, plain_cd_mode_pass};
pub use fsacd::{fit_fsacd, fsacd_mode_pass, measure_fsacd_speedup, ColumnPool};
pub use report::{FitReport, IterationRecord};
pub use sacd::{element_importance, fit_sacd, newton_step, sacd_mode_pass, saturation_point};

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub rank: usize,
    pub max_iters: usize,
    pub seed: u64,
    /// Stop once `|f_k − f_{k−1}| / max(f_{k−1}, ε)` falls below this.
    pub tolerance: Option<f64>,
    /// Columns whose Hessian diagonal is below this are skipped for the pass.
    pub epsilon_h: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            rank: 10,
            max_iters: 30,
            seed: 0,
            tolerance: None,
            epsilon_h: 1e-12,
        }
    }
}

impl SolverConfig {
    pub fn new(rank: usize, max_iters: usize, seed: u64) -> Self {
        SolverConfig {
            rank,
            max_iters,
            seed,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.rank == 0 {
            return Err(Error::arg("rank must be at least 1"));
        }
        if self.max_iters == 0 {
            return Err(Error::arg("max_iters must be at least 1"));
        }
        if !(self.epsilon_h > 0.0 && self.epsilon_h.is_finite()) {
            return Err(Error::arg("epsilon_h must be positive and finite"));
        }
        if let Some(tol) = self.tolerance {
            if !(tol >= 0.0 && tol.is_finite()) {
                return Err(Error::arg("tolerance must be nonnegative and finite"));
            }
        }
        Ok(())
    }
}

/// Which algorithm to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Solver {
    Sacd,
    Fsacd,
    PlainCd,
    Hals,
}

impl Solver {
    pub fn name(self) -> &'static str {
        match self {
            Solver::Sacd => "sacd",
            Solver::Fsacd => "fsacd",
            Solver::PlainCd => "plain-cd",
            Solver::Hals => "hals",
        }
    }
}

impl fmt::Display for Solver {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Solver {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sacd" => Ok(Solver::Sacd),
            "fsacd" => Ok(Solver::Fsacd),
            "plain-cd" => Ok(Solver::PlainCd),
            "hals" => Ok(Solver::Hals),
            other => Err(Error::arg(format!(
                "unknown solver '{other}' (expected sacd, fsacd, plain-cd or hals)"
            ))),
        }
    }
}

/// Runs `solver`; `workers` only matters for FSaCD.
pub fn fit(x: &SparseTensor3, config: &SolverConfig, solver: Solver, workers: usize) -> Result<FitReport> {
    match solver {
        Solver::Sacd => fit_sacd(x, config),
        Solver::Fsacd => fit_fsacd(x, config, workers),
        Solver::PlainCd => fit_plain_cd(x, config),
        Solver::Hals => fit_hals(x, config),
    }
}

/// Factors with i.i.d. entries uniform on `[0, 1)`, filled U, then V, then W,
/// row by row.
pub fn init_factors(dims: [usize; 3], rank: usize, seed: u64) -> Result<KruskalModel> {
    if rank == 0 {
        return Err(Error::arg("rank must be at least 1"));
    }
    if dims.contains(&0) {
        return Err(Error::arg(format!("dims must be positive, got {dims:?}")));
    }
    let mut rng = stream_rng(seed, Stream::Init);
    let mut factor = |rows: usize| -> Result<FactorMatrix> {
        let data = (0..rows * rank).map(|_| rng.gen::<f64>()).collect();
        FactorMatrix::from_matrix(Matrix::from_vec(rows, rank, data)?)
    };
    let u = factor(dims[0])?;
    let v = factor(dims[1])?;
    let w = factor(dims[2])?;
    KruskalModel::new(u, v, w)
}

/// Per-mode element importance bookkeeping.
#[derive(Debug, Clone, PartialEq)]
pub struct ImportanceState {
    /// Importances computed in the most recent pass.
    pub z: Matrix,
    /// Importances of the previous pass; the saturation point compares against these.
    pub z_prev: Matrix,
    /// Total importance of the most recent completed pass.
    pub ti: f64,
    /// Total importance of the pass before that.
    pub ti_prev: f64,
    passes: usize,
}

impl ImportanceState {
    pub fn new(rows: usize, rank: usize) -> Self {
        ImportanceState {
            z: Matrix::zeros(rows, rank),
            z_prev: Matrix::zeros(rows, rank),
            ti: 0.0,
            ti_prev: 0.0,
            passes: 0,
        }
    }

    pub fn passes(&self) -> usize {
        self.passes
    }

    /// Whether the saturation point uses the flipped sign for the coming
    /// pass: true only once two totals exist and the latest one grew.
    pub fn total_increased(&self) -> bool {
        self.passes >= 2 && self.ti > self.ti_prev
    }

    fn check_shape(&self, factor: &FactorMatrix) -> Result<()> {
        let shape = (factor.rows(), factor.rank());
        if self.z.shape() != shape || self.z_prev.shape() != shape {
            return Err(Error::arg(format!(
                "importance state shape {:?} does not match factor {:?}",
                self.z.shape(),
                shape
            )));
        }
        Ok(())
    }

    /// Stores the freshly computed `z` as the baseline for the next pass.
    fn finish_pass(&mut self, z: Matrix, total: f64) {
        self.z_prev = z.clone();
        self.z = z;
        self.ti_prev = self.ti;
        self.ti = total;
        self.passes += 1;
    }
}

/// Outcome of one mode pass.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PassStats {
    pub updates: usize,
    pub lipschitz: f64,
}

fn check_pass_inputs(x: &SparseTensor3, model: &KruskalModel, k: usize) -> Result<()> {
    if model.dims() != x.dims() {
        return Err(Error::arg(format!(
            "model dims {:?} do not match tensor dims {:?}",
            model.dims(),
            x.dims()
        )));
    }
    if k == 0 {
        return Err(Error::arg("iterations are numbered from 1"));
    }
    Ok(())
}

/// Shared outer loop: K iterations of U, V, W passes with diagnostics.
pub(crate) fn run_iterations<F>(
    x: &SparseTensor3,
    config: &SolverConfig,
    solver: Solver,
    mut pass: F,
) -> Result<FitReport>
where
    F: FnMut(&mut KruskalModel, Mode, &mut ImportanceState, usize, &mut GramCache) -> Result<PassStats>,
{
    config.validate()?;
    let dims = x.dims();
    let mut model = init_factors(dims, config.rank, config.seed)?;
    let mut cache = GramCache::new(&model);
    let initial_objective = sparse_objective(x, &model, &cache)?;
    let mut states = dims.map(|rows| ImportanceState::new(rows, config.rank));
    let mut records = Vec::with_capacity(config.max_iters);
    let mut previous = initial_objective;

    for k in 1..=config.max_iters {
        let start = Instant::now();
        let mut updates = [0usize; 3];
        let mut lipschitz = [0.0; 3];
        for mode in Mode::ALL {
            let stats = pass(&mut model, mode, &mut states[mode.index()], k, &mut cache)?;
            let bound = dims[mode.index()] * config.rank;
            assert!(
                stats.updates <= bound,
                "mode {mode} accepted {} updates, more than rows x rank = {bound}",
                stats.updates
            );
            updates[mode.index()] = stats.updates;
            lipschitz[mode.index()] = stats.lipschitz;
        }
        let wall_ms = start.elapsed().as_secs_f64() * 1e3;
        let objective = sparse_objective(x, &model, &cache)?;
        records.push(IterationRecord {
            iter: k,
            objective,
            updates,
            lipschitz,
            wall_ms,
        });
        if let Some(tol) = config.tolerance {
            let change = (previous - objective).abs() / previous.max(f64::EPSILON);
            if change < tol {
                break;
            }
        }
        previous = objective;
    }

    Ok(FitReport {
        solver: solver.name().to_string(),
        rank: config.rank,
        seed: config.seed,
        initial_objective,
        records,
        speedup: None,
        model,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn init_is_deterministic_and_in_range() {
        let a = init_factors([4, 5, 6], 3, 7).unwrap();
        let b = init_factors([4, 5, 6], 3, 7).unwrap();
        assert_eq!(a, b);
        for mode in Mode::ALL {
            assert!(a
                .factor(mode)
                .as_matrix()
                .as_slice()
                .iter()
                .all(|&v| (0.0..1.0).contains(&v)));
        }
        let c = init_factors([4, 5, 6], 3, 8).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn init_rejects_zero() {
        assert!(init_factors([0, 2, 2], 1, 0).is_err());
        assert!(init_factors([2, 2, 2], 0, 0).is_err());
    }

    #[test]
    fn config_validation() {
        assert!(SolverConfig::new(0, 5, 0).validate().is_err());
        assert!(SolverConfig::new(2, 0, 0).validate().is_err());
        assert!(SolverConfig::new(2, 5, 0).validate().is_ok());
        assert_eq!(SolverConfig::default().max_iters, 30);
    }

    #[test]
    fn solver_names_round_trip() {
        for s in [Solver::Sacd, Solver::Fsacd, Solver::PlainCd, Solver::Hals] {
            assert_eq!(s.name().parse::<Solver>().unwrap(), s);
        }
        assert!("als".parse::<Solver>().is_err());
    }
}
