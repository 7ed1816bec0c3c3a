//! Brute-force references shared by the integration suites.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sacd::matrix::khatri_rao;
use sacd::oracle::{densify, DEFAULT_DENSE_CAP};
use sacd::{Entry, FactorMatrix, KruskalModel, Matrix, Mode, SparseTensor3};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_factor(rng: &mut impl Rng, rows: usize, rank: usize) -> FactorMatrix {
    let data = (0..rows * rank).map(|_| rng.gen::<f64>()).collect();
    FactorMatrix::from_matrix(Matrix::from_vec(rows, rank, data).unwrap()).unwrap()
}

pub fn random_model(rng: &mut impl Rng, dims: [usize; 3], rank: usize) -> KruskalModel {
    KruskalModel::new(
        random_factor(rng, dims[0], rank),
        random_factor(rng, dims[1], rank),
        random_factor(rng, dims[2], rank),
    )
    .unwrap()
}

/// Each cell kept with probability `keep`, value uniform on (0, 2].
pub fn random_tensor(rng: &mut impl Rng, dims: [usize; 3], keep: f64) -> SparseTensor3 {
    let mut entries = Vec::new();
    for q in 0..dims[0] {
        for p in 0..dims[1] {
            for s in 0..dims[2] {
                if rng.gen::<f64>() < keep {
                    entries.push(Entry::new(q, p, s, 2.0 - 2.0 * rng.gen::<f64>()));
                }
            }
        }
    }
    SparseTensor3::new(dims, entries).unwrap()
}

pub fn random_dims(rng: &mut impl Rng, max: usize) -> [usize; 3] {
    [rng.gen_range(1..=max), rng.gen_range(1..=max), rng.gen_range(1..=max)]
}

fn others(mode: Mode) -> (Mode, Mode) {
    match mode {
        Mode::U => (Mode::W, Mode::V),
        Mode::V => (Mode::W, Mode::U),
        Mode::W => (Mode::V, Mode::U),
    }
}

/// Mode unfolding of the dense tensor: row = target index, column
/// `ia * len(b) + ib` for the non-target modes `(a, b)` in solver order.
pub fn unfold(x: &SparseTensor3, mode: Mode) -> Matrix {
    let dense = densify(x, DEFAULT_DENSE_CAP).unwrap();
    let [dq, dp, ds] = x.dims();
    let (ma, mb) = others(mode);
    let (la, lb) = (x.dim(ma), x.dim(mb));
    let mut out = Matrix::zeros(x.dim(mode), la * lb);
    for q in 0..dq {
        for p in 0..dp {
            for s in 0..ds {
                let coord = [q, p, s];
                let v = dense[(q * dp + p) * ds + s];
                let col = coord[ma.index()] * lb + coord[mb.index()];
                out.set(coord[mode.index()], col, v);
            }
        }
    }
    out
}

/// MTTKRP as an explicit unfold-times-Khatri-Rao product.
pub fn dense_mttkrp(x: &SparseTensor3, model: &KruskalModel, mode: Mode) -> Matrix {
    let (a, b) = model.others(mode);
    unfold(x, mode).matmul(&khatri_rao(a, b).unwrap()).unwrap()
}

pub fn replace_factor(model: &KruskalModel, mode: Mode, factor: FactorMatrix) -> KruskalModel {
    let [mut u, mut v, mut w] = model.clone().into_factors();
    match mode {
        Mode::U => u = factor,
        Mode::V => v = factor,
        Mode::W => w = factor,
    }
    KruskalModel::new(u, v, w).unwrap()
}

/// Copy of `f` with entry `(i, r)` set to `value` (must stay nonnegative).
pub fn with_entry(f: &FactorMatrix, i: usize, r: usize, value: f64) -> FactorMatrix {
    let mut m = f.as_matrix().clone();
    m.set(i, r, value);
    FactorMatrix::from_matrix(m).unwrap()
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
}

/// Largest entrywise error relative to the largest magnitude in `b`.
pub fn matrix_rel_err(a: &Matrix, b: &Matrix) -> f64 {
    assert_eq!(a.shape(), b.shape());
    let scale = b.as_slice().iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
    a.as_slice()
        .iter()
        .zip(b.as_slice())
        .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
        / scale
}
