//! Sparse MTTKRP, Gram/Hessian bookkeeping, gradients and the sparse
//! objective.
//!
//! Gradient scaling: for mode `U` the stored quantities are
//!
//! ```text
//! G = -X_(1) (W ⊙ V) + U (VᵀV ∗ WᵀW)      H = VᵀV ∗ WᵀW
//! ```
//!
//! which are the first and second derivatives of `½‖X − [[U,V,W]]‖²`.
//! With that scaling the one-variable minimiser is exactly `u − g/h` and the
//! decrease of the halved loss for a step `d` is `−(g·d) − ½·h·d²`. Objective
//! values reported elsewhere are the unhalved loss.

use crate::error::{Error, Result};
use crate::matrix::{gram, hadamard, FactorMatrix, KruskalModel, Matrix};
use crate::tensor::{Mode, SparseTensor3};

/// Gram matrices `UᵀU`, `VᵀV`, `WᵀW` with per-mode freshness flags.
#[derive(Debug, Clone)]
pub struct GramCache {
    grams: [Matrix; 3],
    fresh: [bool; 3],
}

impl GramCache {
    pub fn new(model: &KruskalModel) -> Self {
        GramCache {
            grams: [gram(model.u()), gram(model.v()), gram(model.w())],
            fresh: [true; 3],
        }
    }

    pub fn invalidate(&mut self, mode: Mode) {
        self.fresh[mode.index()] = false;
    }

    /// Recomputes the Gram matrix of `mode` from the model.
    pub fn refresh(&mut self, mode: Mode, model: &KruskalModel) {
        self.grams[mode.index()] = gram(model.factor(mode));
        self.fresh[mode.index()] = true;
    }

    pub fn is_fresh(&self, mode: Mode) -> bool {
        self.fresh[mode.index()]
    }

    pub fn get(&self, mode: Mode) -> Result<&Matrix> {
        if !self.fresh[mode.index()] {
            return Err(Error::State(format!("gram of mode {mode} is stale")));
        }
        Ok(&self.grams[mode.index()])
    }
}

/// Gradient matrix, Hessian and Lipschitz constant of one mode.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeDerivatives {
    pub g: Matrix,
    pub h: Matrix,
    pub lipschitz: f64,
}

fn other_modes(mode: Mode) -> (Mode, Mode) {
    match mode {
        Mode::U => (Mode::W, Mode::V),
        Mode::V => (Mode::W, Mode::U),
        Mode::W => (Mode::V, Mode::U),
    }
}

fn check_other_len(x: &SparseTensor3, mode: Mode, a_len: usize, b_len: usize) -> Result<()> {
    let (ma, mb) = other_modes(mode);
    if a_len != x.dim(ma) || b_len != x.dim(mb) {
        return Err(Error::arg(format!(
            "mode {mode} expects factors of lengths ({}, {}), got ({a_len}, {b_len})",
            x.dim(ma),
            x.dim(mb)
        )));
    }
    Ok(())
}

/// Sparse MTTKRP for `mode`. `a` and `b` are the non-target factors in the
/// order `U: (W, V)`, `V: (W, U)`, `W: (V, U)`; each entry contributes
/// `value * a[..][r] * b[..][r]` to row `coord(mode)`.
pub fn mttkrp(x: &SparseTensor3, mode: Mode, a: &FactorMatrix, b: &FactorMatrix) -> Result<Matrix> {
    check_other_len(x, mode, a.rows(), b.rows())?;
    if a.rank() != b.rank() {
        return Err(Error::arg(format!(
            "factor ranks differ: {} vs {}",
            a.rank(),
            b.rank()
        )));
    }
    let (ma, mb) = other_modes(mode);
    let rank = a.rank();
    let rows = x.dim(mode);
    let mut out = Matrix::zeros(rows, rank);
    let entries = x.entries();
    let mut acc = vec![0.0; rank];
    for i in 0..rows {
        acc.iter_mut().for_each(|v| *v = 0.0);
        for &pos in x.slice_positions(mode, i) {
            let e = &entries[pos];
            let ra = a.row(e.coord(ma));
            let rb = b.row(e.coord(mb));
            for r in 0..rank {
                acc[r] += e.value * ra[r] * rb[r];
            }
        }
        out.as_mut_slice()[i * rank..(i + 1) * rank].copy_from_slice(&acc);
    }
    Ok(out)
}

/// One MTTKRP column via sparse tensor-times-vector. Same summation order
/// as the matching column of [`mttkrp`], so results agree bitwise.
pub fn mttkrp_column(x: &SparseTensor3, mode: Mode, a_col: &[f64], b_col: &[f64]) -> Result<Vec<f64>> {
    check_other_len(x, mode, a_col.len(), b_col.len())?;
    let (ma, mb) = other_modes(mode);
    let entries = x.entries();
    Ok((0..x.dim(mode))
        .map(|i| {
            let mut acc = 0.0;
            for &pos in x.slice_positions(mode, i) {
                let e = &entries[pos];
                acc += e.value * a_col[e.coord(ma)] * b_col[e.coord(mb)];
            }
            acc
        })
        .collect())
}

/// Hadamard product of the two non-target Gram matrices.
pub fn mode_hessian(cache: &GramCache, mode: Mode) -> Result<Matrix> {
    let (ma, mb) = other_modes(mode);
    hadamard(cache.get(ma)?, cache.get(mb)?)
}

/// Frobenius norm of the Hessian.
pub fn lipschitz_constant(h: &Matrix) -> Result<f64> {
    if h.as_slice().iter().any(|v| !v.is_finite()) {
        return Err(Error::arg("hessian contains non-finite values"));
    }
    Ok(h.frobenius_norm())
}

fn check_model(x: &SparseTensor3, model: &KruskalModel) -> Result<()> {
    if model.dims() != x.dims() {
        return Err(Error::arg(format!(
            "model dims {:?} do not match tensor dims {:?}",
            model.dims(),
            x.dims()
        )));
    }
    Ok(())
}

pub fn mode_gradient(
    x: &SparseTensor3,
    model: &KruskalModel,
    mode: Mode,
    cache: &GramCache,
) -> Result<ModeDerivatives> {
    check_model(x, model)?;
    let h = mode_hessian(cache, mode)?;
    let lipschitz = lipschitz_constant(&h)?;
    let (a, b) = model.others(mode);
    let mut g = mttkrp(x, mode, a, b)?;
    let factor = model.factor(mode);
    let rank = model.rank();
    for i in 0..factor.rows() {
        for r in 0..rank {
            let m = g.get(i, r);
            g.set(i, r, -m + factor.times_entry(i, &h, r));
        }
    }
    Ok(ModeDerivatives { g, h, lipschitz })
}

/// Column `r` of the gradient given a precomputed Hessian.
pub(crate) fn column_gradient_with(
    x: &SparseTensor3,
    model: &KruskalModel,
    factor: &FactorMatrix,
    mode: Mode,
    r: usize,
    h: &Matrix,
) -> Result<Vec<f64>> {
    let (a, b) = model.others(mode);
    let m = mttkrp_column(x, mode, &a.column(r), &b.column(r))?;
    Ok(m.iter()
        .enumerate()
        .map(|(i, &mi)| -mi + factor.times_entry(i, h, r))
        .collect())
}

pub fn column_gradient(
    x: &SparseTensor3,
    model: &KruskalModel,
    mode: Mode,
    r: usize,
    cache: &GramCache,
) -> Result<Vec<f64>> {
    check_model(x, model)?;
    if r >= model.rank() {
        return Err(Error::arg(format!(
            "column {r} out of range for rank {}",
            model.rank()
        )));
    }
    let h = mode_hessian(cache, mode)?;
    column_gradient_with(x, model, model.factor(mode), mode, r, &h)
}

/// `‖X‖² − 2 Σ_Ω x·x̂ + 1ᵀ(UᵀU ∗ VᵀV ∗ WᵀW)1`: the full loss without visiting
/// absent cells. Clamped at zero against cancellation.
pub fn sparse_objective(x: &SparseTensor3, model: &KruskalModel, cache: &GramCache) -> Result<f64> {
    check_model(x, model)?;
    let uv = hadamard(cache.get(Mode::U)?, cache.get(Mode::V)?)?;
    let model_norm_sq = hadamard(&uv, cache.get(Mode::W)?)?.sum();
    let inner: f64 = x
        .entries()
        .iter()
        .map(|e| e.value * model.predict_unchecked(e.q, e.p, e.s))
        .sum();
    Ok((x.norm_sq() - 2.0 * inner + model_norm_sq).max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::Entry;

    fn fm(rows: &[Vec<f64>]) -> FactorMatrix {
        FactorMatrix::from_rows(rows).unwrap()
    }

    fn mat(rows: &[Vec<f64>]) -> Matrix {
        Matrix::from_rows(rows).unwrap()
    }

    fn single_entry() -> SparseTensor3 {
        SparseTensor3::new([2, 1, 1], vec![Entry::new(0, 0, 0, 2.0)]).unwrap()
    }

    #[test]
    fn mttkrp_single_entry() {
        let x = single_entry();
        let w = fm(&[vec![3.0, 4.0]]);
        let v = fm(&[vec![1.0, 1.0]]);
        let m = mttkrp(&x, Mode::U, &w, &v).unwrap();
        assert_eq!(m.row(0), &[6.0, 8.0]);
        assert_eq!(m.row(1), &[0.0, 0.0]);

        let col = mttkrp_column(&x, Mode::U, &w.column(0), &v.column(0)).unwrap();
        assert_eq!(col, vec![6.0, 0.0]);
        let zero = mttkrp_column(&x, Mode::U, &[0.0], &[0.0]).unwrap();
        assert_eq!(zero, vec![0.0, 0.0]);
    }

    #[test]
    fn mttkrp_empty_and_mismatch() {
        let x = SparseTensor3::empty([3, 2, 4]).unwrap();
        let a = fm(&vec![vec![1.0, 2.0]; 4]);
        let b = fm(&vec![vec![1.0, 2.0]; 2]);
        assert_eq!(mttkrp(&x, Mode::U, &a, &b).unwrap(), Matrix::zeros(3, 2));
        assert!(mttkrp(&x, Mode::U, &b, &a).is_err());
        assert!(mttkrp_column(&x, Mode::U, &[1.0; 2], &[1.0; 2]).is_err());
    }

    fn cache_with(grams: [Matrix; 3]) -> GramCache {
        GramCache {
            grams,
            fresh: [true; 3],
        }
    }

    #[test]
    fn hessian_cases() {
        let vtv = mat(&[vec![10.0, 14.0], vec![14.0, 20.0]]);
        let ones = mat(&[vec![1.0, 1.0], vec![1.0, 1.0]]);
        let c = cache_with([Matrix::zeros(2, 2), vtv.clone(), ones]);
        assert_eq!(mode_hessian(&c, Mode::U).unwrap(), vtv);
        assert_eq!(mode_hessian(&c, Mode::V).unwrap(), Matrix::zeros(2, 2));

        let c = cache_with([
            Matrix::zeros(2, 2),
            mat(&[vec![2.0, 0.0], vec![0.0, 2.0]]),
            mat(&[vec![3.0, 1.0], vec![1.0, 3.0]]),
        ]);
        assert_eq!(
            mode_hessian(&c, Mode::U).unwrap(),
            mat(&[vec![6.0, 0.0], vec![0.0, 6.0]])
        );
    }

    #[test]
    fn stale_cache_is_an_error() {
        let model = KruskalModel::zeros([2, 2, 2], 1).unwrap();
        let mut c = GramCache::new(&model);
        c.invalidate(Mode::V);
        assert!(matches!(mode_hessian(&c, Mode::U), Err(Error::State(_))));
        assert!(mode_hessian(&c, Mode::V).is_ok());
        c.refresh(Mode::V, &model);
        assert!(mode_hessian(&c, Mode::U).is_ok());
    }

    #[test]
    fn lipschitz_cases() {
        let l = lipschitz_constant(&mat(&[vec![2.0, 0.0], vec![0.0, 2.0]])).unwrap();
        assert!((l - 8f64.sqrt()).abs() < 1e-15);
        assert_eq!(lipschitz_constant(&Matrix::zeros(3, 3)).unwrap(), 0.0);
        assert_eq!(lipschitz_constant(&mat(&[vec![3.0]])).unwrap(), 3.0);
        assert!(lipschitz_constant(&mat(&[vec![f64::NAN]])).is_err());
    }

    #[test]
    fn column_gradient_hand_instance() {
        // x(0,0,0)=2, R=1, u=[1, 0.5], v=[1], w=[3].
        // H = (vᵀv)(wᵀw) = 9; g_q = -m_q + u_q H, m = [6, 0].
        let x = single_entry();
        let model = KruskalModel::new(
            fm(&[vec![1.0], vec![0.5]]),
            fm(&[vec![1.0]]),
            fm(&[vec![3.0]]),
        )
        .unwrap();
        let cache = GramCache::new(&model);
        let g = column_gradient(&x, &model, Mode::U, 0, &cache).unwrap();
        assert_eq!(g, vec![-6.0 + 9.0, 4.5]);
        let full = mode_gradient(&x, &model, Mode::U, &cache).unwrap();
        assert_eq!(full.g.column(0), g);
        assert_eq!(full.lipschitz, 9.0);
    }

    #[test]
    fn zero_factors_give_zero_gradient() {
        let x = SparseTensor3::new([2, 2, 2], vec![Entry::new(1, 1, 0, 4.0)]).unwrap();
        let model = KruskalModel::new(
            fm(&[vec![1.0, 2.0], vec![0.3, 0.1]]),
            FactorMatrix::zeros(2, 2),
            FactorMatrix::zeros(2, 2),
        )
        .unwrap();
        let cache = GramCache::new(&model);
        let d = mode_gradient(&x, &model, Mode::U, &cache).unwrap();
        assert_eq!(d.g, Matrix::zeros(2, 2));

        let empty = SparseTensor3::empty([2, 2, 2]).unwrap();
        let zero = KruskalModel::zeros([2, 2, 2], 2).unwrap();
        let c = GramCache::new(&zero);
        assert_eq!(column_gradient(&empty, &zero, Mode::W, 1, &c).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn sparse_objective_zero_model_and_exact_fit() {
        let x = SparseTensor3::new(
            [2, 2, 2],
            vec![Entry::new(0, 0, 0, 1.5), Entry::new(1, 0, 1, -2.0)],
        )
        .unwrap();
        let zero = KruskalModel::zeros([2, 2, 2], 3).unwrap();
        assert_eq!(sparse_objective(&x, &zero, &GramCache::new(&zero)).unwrap(), 6.25);

        let model = KruskalModel::new(
            fm(&[vec![1.0], vec![2.0]]),
            fm(&[vec![1.0], vec![0.5]]),
            fm(&[vec![0.25], vec![4.0]]),
        )
        .unwrap();
        let mut entries = Vec::new();
        for q in 0..2 {
            for p in 0..2 {
                for s in 0..2 {
                    entries.push(Entry::new(q, p, s, model.predict(q, p, s).unwrap()));
                }
            }
        }
        let exact = SparseTensor3::new([2, 2, 2], entries).unwrap();
        let f = sparse_objective(&exact, &model, &GramCache::new(&model)).unwrap();
        assert!(f.abs() < 1e-10, "{f}");
    }
}
