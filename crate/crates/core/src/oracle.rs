//! Brute-force dense reference computations. These visit every cell of the
//! tensor and exist so the sparse kernels have something independent to be
//! checked against.

use crate::error::{Error, Result};
use crate::matrix::KruskalModel;
use crate::tensor::SparseTensor3;

pub const DEFAULT_DENSE_CAP: u128 = 1_000_000;

fn check_cap(dims: [usize; 3], cap: u128) -> Result<usize> {
    let cells = dims.iter().map(|&d| d as u128).product::<u128>();
    if cells > cap {
        return Err(Error::Capacity { cells, limit: cap });
    }
    Ok(cells as usize)
}

/// Dense copy of `x`, indexed `q * P * S + p * S + s`.
pub fn densify(x: &SparseTensor3, cap: u128) -> Result<Vec<f64>> {
    let cells = check_cap(x.dims(), cap)?;
    let [_, dp, ds] = x.dims();
    let mut out = vec![0.0; cells];
    for e in x.entries() {
        out[(e.q * dp + e.p) * ds + e.s] = e.value;
    }
    Ok(out)
}

/// Full Euclidean loss over every cell, absent cells counting as zero.
pub fn dense_oracle_objective_with_cap(
    x: &SparseTensor3,
    model: &KruskalModel,
    cap: u128,
) -> Result<f64> {
    if model.dims() != x.dims() {
        return Err(Error::arg(format!(
            "model dims {:?} do not match tensor dims {:?}",
            model.dims(),
            x.dims()
        )));
    }
    let dense = densify(x, cap)?;
    let [dq, dp, ds] = x.dims();
    let mut total = 0.0;
    for q in 0..dq {
        for p in 0..dp {
            for s in 0..ds {
                let r = dense[(q * dp + p) * ds + s] - model.predict_unchecked(q, p, s);
                total += r * r;
            }
        }
    }
    Ok(total)
}

pub fn dense_oracle_objective(x: &SparseTensor3, model: &KruskalModel) -> Result<f64> {
    dense_oracle_objective_with_cap(x, model, DEFAULT_DENSE_CAP)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::FactorMatrix;
    use crate::tensor::Entry;

    fn fm(rows: &[Vec<f64>]) -> FactorMatrix {
        FactorMatrix::from_rows(rows).unwrap()
    }

    #[test]
    fn perfect_fit_is_zero() {
        let m = KruskalModel::new(
            fm(&[vec![1.0], vec![2.0]]),
            fm(&[vec![3.0], vec![1.0]]),
            fm(&[vec![1.0], vec![0.5]]),
        )
        .unwrap();
        let mut entries = Vec::new();
        for q in 0..2 {
            for p in 0..2 {
                for s in 0..2 {
                    entries.push(Entry::new(q, p, s, m.predict(q, p, s).unwrap()));
                }
            }
        }
        let x = SparseTensor3::new([2, 2, 2], entries).unwrap();
        assert_eq!(dense_oracle_objective(&x, &m).unwrap(), 0.0);
    }

    #[test]
    fn zero_model_gives_norm() {
        let x = SparseTensor3::new(
            [2, 3, 2],
            vec![Entry::new(0, 1, 1, 2.0), Entry::new(1, 2, 0, -3.0)],
        )
        .unwrap();
        let m = KruskalModel::zeros([2, 3, 2], 2).unwrap();
        assert_eq!(dense_oracle_objective(&x, &m).unwrap(), 13.0);
    }

    #[test]
    fn single_cell_residual() {
        // x(0,0,0) = 1 and the model predicts 0.5 there and 0 elsewhere.
        let x = SparseTensor3::new([2, 2, 2], vec![Entry::new(0, 0, 0, 1.0)]).unwrap();
        let m = KruskalModel::new(
            fm(&[vec![0.5], vec![0.0]]),
            fm(&[vec![1.0], vec![0.0]]),
            fm(&[vec![1.0], vec![0.0]]),
        )
        .unwrap();
        assert_eq!(dense_oracle_objective(&x, &m).unwrap(), 0.25);
    }

    #[test]
    fn cap_enforced() {
        let x = SparseTensor3::empty([200, 200, 200]).unwrap();
        let m = KruskalModel::zeros([200, 200, 200], 1).unwrap();
        assert!(matches!(
            dense_oracle_objective(&x, &m),
            Err(Error::Capacity { .. })
        ));
    }
}
