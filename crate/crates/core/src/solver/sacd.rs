//! Serial saturating coordinate descent.
//!
//! Per mode pass: compute `G`, `H` and `L = ‖H‖_F` once, then sweep the
//! factor column by column, row by row. Each element gets the projected
//! Newton step `max(0, u − g/h_rr) − u` and the Lipschitz importance
//! `z = −g·d − (L/2)·d²`. On the first iteration an element is updated iff
//! `z > 0`; afterwards iff its saturation point (the change of `z` against
//! the previous iteration, sign-flipped when the mode's total importance
//! grew) is positive.
//!
//! After an accepted update only the gradient entries the sweep still has to
//! read are refreshed: `g_qr` itself and `g_qr'` for the columns `r' > r`
//! of the same row, which pick up `d·h_rr'` through the Gram term.

use crate::error::Result;
use crate::kernels::{mode_gradient, GramCache, ModeDerivatives};
use crate::matrix::{KruskalModel, Matrix};
use crate::tensor::{Mode, SparseTensor3};

use super::{check_pass_inputs, run_iterations, FitReport, ImportanceState, PassStats, Solver, SolverConfig};

/// Lipschitz element importance `−(g·d) − (L/2)·d²`.
pub fn element_importance(g_qr: f64, u_hat_qr: f64, lipschitz: f64) -> f64 {
    -(g_qr * u_hat_qr) - 0.5 * lipschitz * u_hat_qr * u_hat_qr
}

#[inline]
pub(crate) fn projected_value(u: f64, g: f64, h: f64) -> f64 {
    (u - g / h).max(0.0)
}

/// Signed change `max(0, u − g/h) − u`, or `None` when `h` is not positive.
pub fn newton_step(u_qr: f64, g_qr: f64, h_rr: f64) -> Option<f64> {
    if h_rr > 0.0 && h_rr.is_finite() {
        Some(projected_value(u_qr, g_qr, h_rr) - u_qr)
    } else {
        None
    }
}

#[inline]
pub(crate) fn saturation_gap(z_curr: f64, z_prev: f64, total_increased: bool) -> f64 {
    if total_increased {
        z_prev - z_curr
    } else {
        z_curr - z_prev
    }
}

/// `z_prev − z_curr` when total importance grew, `z_curr − z_prev` otherwise.
pub fn saturation_point(z_curr: f64, z_prev: f64, ti_curr: f64, ti_prev: f64) -> f64 {
    saturation_gap(z_curr, z_prev, ti_curr > ti_prev)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Gating {
    Saturating,
    All,
}

impl Gating {
    #[inline]
    pub(crate) fn accept(self, k: usize, z: f64, z_prev: f64, total_increased: bool) -> bool {
        match self {
            Gating::All => true,
            Gating::Saturating if k == 1 => z > 0.0,
            Gating::Saturating => saturation_gap(z, z_prev, total_increased) > 0.0,
        }
    }
}

/// Gauss–Seidel sweep over one factor, shared by SaCD and plain CD.
#[allow(clippy::too_many_arguments)]
pub(crate) fn coordinate_pass(
    x: &SparseTensor3,
    model: &mut KruskalModel,
    mode: Mode,
    state: &mut ImportanceState,
    k: usize,
    cache: &mut GramCache,
    epsilon_h: f64,
    gating: Gating,
) -> Result<PassStats> {
    check_pass_inputs(x, model, k)?;
    state.check_shape(model.factor(mode))?;
    let ModeDerivatives { mut g, h, lipschitz } = mode_gradient(x, model, mode, cache)?;
    let rank = model.rank();
    let rows = x.dim(mode);
    let increased = state.total_increased();
    let mut z = Matrix::zeros(rows, rank);
    let mut total = 0.0;
    let mut updates = 0;

    let factor = model.factor_mut(mode);
    for r in 0..rank {
        let h_rr = h.get(r, r);
        if h_rr.is_nan() || h_rr < epsilon_h {
            continue;
        }
        for q in 0..rows {
            let u = factor.get(q, r);
            let g_qr = g.get(q, r);
            let new = projected_value(u, g_qr, h_rr);
            let step = new - u;
            let z_qr = element_importance(g_qr, step, lipschitz);
            z.set(q, r, z_qr);
            total += z_qr;
            if !gating.accept(k, z_qr, state.z_prev.get(q, r), increased) {
                continue;
            }
            updates += 1;
            if step != 0.0 {
                factor.set(q, r, new);
                g.set(q, r, g_qr + step * h_rr);
                for later in r + 1..rank {
                    let v = g.get(q, later);
                    g.set(q, later, v + step * h.get(r, later));
                }
            }
        }
    }

    state.finish_pass(z, total);
    cache.refresh(mode, model);
    Ok(PassStats { updates, lipschitz })
}

/// One SaCD pass over `mode` at iteration `k` (1-based). Refreshes the
/// mode's Gram matrix in `cache` before returning.
pub fn sacd_mode_pass(
    x: &SparseTensor3,
    model: &mut KruskalModel,
    mode: Mode,
    state: &mut ImportanceState,
    k: usize,
    cache: &mut GramCache,
    epsilon_h: f64,
) -> Result<PassStats> {
    coordinate_pass(x, model, mode, state, k, cache, epsilon_h, Gating::Saturating)
}

pub fn fit_sacd(x: &SparseTensor3, config: &SolverConfig) -> Result<FitReport> {
    let eps = config.epsilon_h;
    run_iterations(x, config, Solver::Sacd, |model, mode, state, k, cache| {
        sacd_mode_pass(x, model, mode, state, k, cache, eps)
    })
}
