//! Runtime sweeps over one axis (mode length, density or rank) with the
//! other two held fixed. Every solver in the plan sees the same seeded
//! tensor at each grid point; repetitions run one after another.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::io::{generate_synthetic, SynthSpec};
use crate::solver::{fit, Solver, SolverConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BenchAxis {
    ModeLength,
    Density,
    Rank,
}

impl fmt::Display for BenchAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BenchAxis::ModeLength => "mode-length",
            BenchAxis::Density => "density",
            BenchAxis::Rank => "rank",
        })
    }
}

impl FromStr for BenchAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mode-length" => Ok(BenchAxis::ModeLength),
            "density" => Ok(BenchAxis::Density),
            "rank" => Ok(BenchAxis::Rank),
            other => Err(Error::arg(format!(
                "unknown axis '{other}' (expected mode-length, density or rank)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchPlan {
    pub axis: BenchAxis,
    pub grid: Vec<f64>,
    /// Cube side used when the axis is not mode length.
    pub mode_length: usize,
    pub density: f64,
    pub rank: usize,
    pub reps: usize,
    pub seed: u64,
    pub iters: usize,
    pub solvers: Vec<Solver>,
    pub workers: usize,
}

impl BenchPlan {
    pub fn new(axis: BenchAxis, grid: Vec<f64>) -> Self {
        BenchPlan {
            axis,
            grid,
            mode_length: 64,
            density: 1e-3,
            rank: 10,
            reps: 1,
            seed: 0,
            iters: 30,
            solvers: vec![Solver::Sacd],
            workers: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.grid.is_empty() {
            return Err(Error::arg("bench grid is empty"));
        }
        if let Some(v) = self.grid.iter().find(|v| !(**v > 0.0 && v.is_finite())) {
            return Err(Error::arg(format!("grid values must be positive, got {v}")));
        }
        match self.axis {
            BenchAxis::Density => {
                if let Some(v) = self.grid.iter().find(|v| **v > 1.0) {
                    return Err(Error::arg(format!("density must lie in (0, 1], got {v}")));
                }
            }
            BenchAxis::ModeLength | BenchAxis::Rank => {
                if let Some(v) = self.grid.iter().find(|v| v.fract() != 0.0) {
                    return Err(Error::arg(format!("{} values must be integers, got {v}", self.axis)));
                }
            }
        }
        if !(self.density > 0.0 && self.density <= 1.0) {
            return Err(Error::arg(format!("density must lie in (0, 1], got {}", self.density)));
        }
        if self.mode_length == 0 || self.rank == 0 || self.reps == 0 || self.iters == 0 {
            return Err(Error::arg("mode length, rank, reps and iters must be positive"));
        }
        if self.solvers.is_empty() {
            return Err(Error::arg("no solvers configured"));
        }
        if self.workers == 0 {
            return Err(Error::arg("workers must be at least 1"));
        }
        Ok(())
    }

    /// (dims, density, rank) at one grid value.
    fn point(&self, value: f64) -> ([usize; 3], f64, usize) {
        let n = self.mode_length;
        match self.axis {
            BenchAxis::ModeLength => {
                let n = value as usize;
                ([n, n, n], self.density, self.rank)
            }
            BenchAxis::Density => ([n, n, n], value, self.rank),
            BenchAxis::Rank => ([n, n, n], self.density, value as usize),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub axis_value: f64,
    pub solver: Solver,
    pub rep: usize,
    pub total_wall_ms: f64,
    pub per_iter_ms: f64,
    pub final_objective: f64,
    pub total_updates: usize,
}

pub const BENCH_HEADER: &str = "axis_value,solver,rep,total_wall_ms,per_iter_ms,final_objective,total_E";

impl BenchRow {
    pub fn to_csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            self.axis_value,
            self.solver,
            self.rep,
            self.total_wall_ms,
            self.per_iter_ms,
            self.final_objective,
            self.total_updates
        )
    }
}

/// Runs the plan, calling `sink` after each row so callers can stream output.
pub fn run_bench(plan: &BenchPlan, mut sink: impl FnMut(&BenchRow)) -> Result<Vec<BenchRow>> {
    plan.validate()?;
    let mut rows = Vec::new();
    for (gi, &value) in plan.grid.iter().enumerate() {
        let (dims, density, rank) = plan.point(value);
        for rep in 0..plan.reps {
            let seed = plan.seed.wrapping_add((gi * plan.reps + rep) as u64);
            let x = generate_synthetic(&SynthSpec {
                dims,
                density,
                seed,
                planted_rank: None,
            })?;
            let config = SolverConfig::new(rank, plan.iters, seed);
            for &solver in &plan.solvers {
                let report = fit(&x, &config, solver, plan.workers)?;
                let row = BenchRow {
                    axis_value: value,
                    solver,
                    rep,
                    total_wall_ms: report.total_wall_ms(),
                    per_iter_ms: report.per_iter_ms(),
                    final_objective: report.final_objective(),
                    total_updates: report.total_updates(),
                };
                sink(&row);
                rows.push(row);
            }
        }
    }
    Ok(rows)
}
