use crate::matrix::KruskalModel;

#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    /// 1-based iteration number.
    pub iter: usize,
    /// Full Euclidean loss after the iteration.
    pub objective: f64,
    /// Accepted element updates per mode (U, V, W).
    pub updates: [usize; 3],
    /// Lipschitz constant used in each mode pass.
    pub lipschitz: [f64; 3],
    /// Wall time of the three mode passes, excluding the objective evaluation.
    pub wall_ms: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitReport {
    pub solver: String,
    pub rank: usize,
    pub seed: u64,
    pub initial_objective: f64,
    pub records: Vec<IterationRecord>,
    /// Wall-time ratio of a one-worker run over this run, when measured.
    pub speedup: Option<f64>,
    pub model: KruskalModel,
}

impl FitReport {
    pub fn iterations(&self) -> usize {
        self.records.len()
    }

    pub fn final_objective(&self) -> f64 {
        self.records
            .last()
            .map_or(self.initial_objective, |r| r.objective)
    }

    pub fn total_updates(&self) -> usize {
        self.records
            .iter()
            .map(|r| r.updates.iter().sum::<usize>())
            .sum()
    }

    pub fn total_wall_ms(&self) -> f64 {
        self.records.iter().map(|r| r.wall_ms).sum()
    }

    pub fn per_iter_ms(&self) -> f64 {
        if self.records.is_empty() {
            0.0
        } else {
            self.total_wall_ms() / self.records.len() as f64
        }
    }

    /// Objective after each iteration, preceded by the initial value.
    pub fn objective_trace(&self) -> Vec<f64> {
        std::iter::once(self.initial_objective)
            .chain(self.records.iter().map(|r| r.objective))
            .collect()
    }
}
