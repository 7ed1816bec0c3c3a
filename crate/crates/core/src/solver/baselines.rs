//! Comparison solvers without element selection.

use crate::error::Result;
use crate::kernels::{lipschitz_constant, mode_hessian, mttkrp, GramCache};
use crate::matrix::KruskalModel;
use crate::tensor::{Mode, SparseTensor3};

use super::sacd::{coordinate_pass, projected_value, Gating};
use super::{check_pass_inputs, run_iterations, FitReport, ImportanceState, PassStats, Solver, SolverConfig};

/// Coordinate descent that updates every element: the SaCD sweep with
/// selection disabled.
pub fn plain_cd_mode_pass(
    x: &SparseTensor3,
    model: &mut KruskalModel,
    mode: Mode,
    state: &mut ImportanceState,
    k: usize,
    cache: &mut GramCache,
    epsilon_h: f64,
) -> Result<PassStats> {
    coordinate_pass(x, model, mode, state, k, cache, epsilon_h, Gating::All)
}

pub fn fit_plain_cd(x: &SparseTensor3, config: &SolverConfig) -> Result<FitReport> {
    let eps = config.epsilon_h;
    run_iterations(x, config, Solver::PlainCd, |model, mode, state, k, cache| {
        plain_cd_mode_pass(x, model, mode, state, k, cache, eps)
    })
}

/// Column-wise nonnegative least squares:
/// `x_r ← max(0, x_r + (m_r − (X·H)_r) / h_rr)` for each column in turn,
/// with `(X·H)_r` taken from the current factor.
pub fn hals_mode_pass(
    x: &SparseTensor3,
    model: &mut KruskalModel,
    mode: Mode,
    cache: &mut GramCache,
    epsilon_h: f64,
) -> Result<PassStats> {
    check_pass_inputs(x, model, 1)?;
    let h = mode_hessian(cache, mode)?;
    let lipschitz = lipschitz_constant(&h)?;
    let (a, b) = model.others(mode);
    let m = mttkrp(x, mode, a, b)?;
    let rank = model.rank();
    let rows = x.dim(mode);
    let mut updates = 0;

    let factor = model.factor_mut(mode);
    let mut column = vec![0.0; rows];
    for r in 0..rank {
        let h_rr = h.get(r, r);
        if h_rr.is_nan() || h_rr < epsilon_h {
            continue;
        }
        for (q, slot) in column.iter_mut().enumerate() {
            let g = -m.get(q, r) + factor.times_entry(q, &h, r);
            *slot = projected_value(factor.get(q, r), g, h_rr);
        }
        factor.set_column(r, &column);
        updates += rows;
    }
    cache.refresh(mode, model);
    Ok(PassStats { updates, lipschitz })
}

pub fn fit_hals(x: &SparseTensor3, config: &SolverConfig) -> Result<FitReport> {
    let eps = config.epsilon_h;
    run_iterations(x, config, Solver::Hals, |model, mode, _state, _k, cache| {
        hals_mode_pass(x, model, mode, cache, eps)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::FactorMatrix;
    use crate::tensor::Entry;

    fn exact_instance() -> (SparseTensor3, KruskalModel) {
        let u = FactorMatrix::from_rows(&[vec![1.0, 0.2], vec![0.5, 1.0]]).unwrap();
        let v = FactorMatrix::from_rows(&[vec![0.3, 1.0], vec![1.0, 0.1], vec![0.7, 0.7]]).unwrap();
        let w = FactorMatrix::from_rows(&[vec![1.0, 0.4], vec![0.2, 0.9]]).unwrap();
        let model = KruskalModel::new(u, v, w).unwrap();
        let mut entries = Vec::new();
        for q in 0..2 {
            for p in 0..3 {
                for s in 0..2 {
                    entries.push(Entry::new(q, p, s, model.predict(q, p, s).unwrap()));
                }
            }
        }
        (SparseTensor3::new([2, 3, 2], entries).unwrap(), model)
    }

    #[test]
    fn hals_exact_fit_is_stationary() {
        let (x, truth) = exact_instance();
        let mut model = truth.clone();
        let mut cache = GramCache::new(&model);
        for mode in Mode::ALL {
            hals_mode_pass(&x, &mut model, mode, &mut cache, 1e-12).unwrap();
        }
        let a = model.u().as_matrix().as_slice();
        let b = truth.u().as_matrix().as_slice();
        for (p, q) in a.iter().zip(b) {
            assert!((p - q).abs() < 1e-12);
        }
    }

    #[test]
    fn plain_cd_updates_everything() {
        let (x, _) = exact_instance();
        let report = fit_plain_cd(&x, &SolverConfig::new(2, 4, 5)).unwrap();
        for rec in &report.records {
            assert_eq!(rec.updates, [4, 6, 4]);
        }
        let again = fit_plain_cd(&x, &SolverConfig::new(2, 4, 5)).unwrap();
        assert_eq!(report.model, again.model);
        assert_eq!(report.objective_trace(), again.objective_trace());
    }
}
