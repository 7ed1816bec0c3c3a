//! Random sparse tensors for scalability sweeps and recovery tests.
//!
//! Exactly `round(density * Q * P * S)` distinct coordinates are drawn
//! uniformly. Values are uniform on `(0, 1]`, or, with a planted rank, the
//! reconstruction of a random nonnegative model whose factor entries are
//! uniform on `[0, R^(-1/3))`, which keeps every planted value in `[0, 1)`.

use rand::seq::index;
use rand::Rng;

use crate::error::{Error, Result};
use crate::matrix::{FactorMatrix, KruskalModel, Matrix};
use crate::rng::{stream_rng, Stream};
use crate::tensor::{Entry, SparseTensor3};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthSpec {
    pub dims: [usize; 3],
    pub density: f64,
    pub seed: u64,
    pub planted_rank: Option<usize>,
}

pub fn target_nnz(dims: [usize; 3], density: f64) -> Result<usize> {
    if !(density > 0.0 && density <= 1.0) {
        return Err(Error::arg(format!("density must lie in (0, 1], got {density}")));
    }
    if dims.contains(&0) {
        return Err(Error::arg(format!("dims must be positive, got {dims:?}")));
    }
    let cells = dims.iter().map(|&d| d as f64).product::<f64>();
    Ok((density * cells).round() as usize)
}

/// The random nonnegative model used for planted values.
pub fn planted_model(dims: [usize; 3], rank: usize, seed: u64) -> Result<KruskalModel> {
    if rank == 0 {
        return Err(Error::arg("planted rank must be at least 1"));
    }
    let scale = (rank as f64).powf(-1.0 / 3.0);
    let mut rng = stream_rng(seed, Stream::Planted);
    let mut factor = |rows: usize| -> Result<FactorMatrix> {
        let data = (0..rows * rank).map(|_| rng.gen::<f64>() * scale).collect();
        FactorMatrix::from_matrix(Matrix::from_vec(rows, rank, data)?)
    };
    let u = factor(dims[0])?;
    let v = factor(dims[1])?;
    let w = factor(dims[2])?;
    KruskalModel::new(u, v, w)
}

pub fn generate_synthetic(spec: &SynthSpec) -> Result<SparseTensor3> {
    let dims = spec.dims;
    let nnz = target_nnz(dims, spec.density)?;
    let cells = dims.iter().try_fold(1usize, |acc, &d| acc.checked_mul(d));
    let cells = cells.ok_or_else(|| Error::arg(format!("dims {dims:?} overflow the index space")))?;
    let planted = spec
        .planted_rank
        .map(|r| planted_model(dims, r, spec.seed))
        .transpose()?;

    let mut sampler = stream_rng(spec.seed, Stream::Sampling);
    let mut linear = index::sample(&mut sampler, cells, nnz).into_vec();
    linear.sort_unstable();

    let mut values = stream_rng(spec.seed, Stream::Values);
    let (ps, s) = (dims[1] * dims[2], dims[2]);
    let entries = linear
        .into_iter()
        .map(|li| {
            let (q, p, k) = (li / ps, (li % ps) / s, li % s);
            let value = match &planted {
                Some(m) => m.predict_unchecked(q, p, k),
                None => 1.0 - values.gen::<f64>(),
            };
            Entry::new(q, p, k, value)
        })
        .collect();
    SparseTensor3::new(dims, entries)
}
