//! Dense matrices, nonnegative factor matrices and the Kruskal model.

use crate::error::{Error, Result};
use crate::tensor::Mode;

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::arg(format!(
                "expected {} values for a {rows}x{cols} matrix, got {}",
                rows * cols,
                data.len()
            )));
        }
        Ok(Matrix { rows, cols, data })
    }

    /// Builds from nested rows; every row must have the same length.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::arg("ragged rows"));
        }
        Self::from_vec(rows.len(), cols, rows.concat())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        self.data[i * self.cols + j] = value;
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub(crate) fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn transpose(&self) -> Matrix {
        let mut out = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(j, i, self.get(i, j));
            }
        }
        out
    }

    /// Plain triple-loop product.
    pub fn matmul(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.rows {
            return Err(Error::arg(format!(
                "cannot multiply {:?} by {:?}",
                self.shape(),
                other.shape()
            )));
        }
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                for j in 0..other.cols {
                    out.data[i * other.cols + j] += a * other.get(k, j);
                }
            }
        }
        Ok(out)
    }

    pub fn sum(&self) -> f64 {
        self.data.iter().sum()
    }
}

/// Dense `rows x rank` nonnegative matrix holding one CP factor.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorMatrix(Matrix);

impl FactorMatrix {
    pub fn zeros(rows: usize, rank: usize) -> Self {
        FactorMatrix(Matrix::zeros(rows, rank))
    }

    /// Rejects negative or non-finite values.
    pub fn from_matrix(m: Matrix) -> Result<Self> {
        if let Some(bad) = m.as_slice().iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(Error::arg(format!(
                "factor entries must be finite and nonnegative, found {bad}"
            )));
        }
        Ok(FactorMatrix(m))
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        Self::from_matrix(Matrix::from_rows(rows)?)
    }

    pub fn rows(&self) -> usize {
        self.0.rows()
    }

    pub fn rank(&self) -> usize {
        self.0.cols()
    }

    #[inline]
    pub fn get(&self, i: usize, r: usize) -> f64 {
        self.0.get(i, r)
    }

    /// Caller keeps the value nonnegative and finite.
    #[inline]
    pub(crate) fn set(&mut self, i: usize, r: usize, value: f64) {
        debug_assert!(value >= 0.0 && value.is_finite());
        self.0.set(i, r, value);
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        self.0.row(i)
    }

    pub fn column(&self, r: usize) -> Vec<f64> {
        self.0.column(r)
    }

    pub(crate) fn set_column(&mut self, r: usize, col: &[f64]) {
        debug_assert_eq!(col.len(), self.rows());
        for (i, &v) in col.iter().enumerate() {
            self.set(i, r, v);
        }
    }

    pub fn as_matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn is_nonnegative(&self) -> bool {
        self.0.as_slice().iter().all(|&v| v >= 0.0 && v.is_finite())
    }

    /// Product with an `R x R` matrix.
    pub fn times(&self, h: &Matrix) -> Result<Matrix> {
        self.0.matmul(h)
    }

    /// `(self * h)[i][r] = sum_j self[i][j] * h[j][r]`, summed in ascending `j`.
    #[inline]
    pub(crate) fn times_entry(&self, i: usize, h: &Matrix, r: usize) -> f64 {
        let row = self.row(i);
        let mut acc = 0.0;
        for (j, &a) in row.iter().enumerate() {
            acc += a * h.get(j, r);
        }
        acc
    }
}

/// CP model `[[U, V, W]]` with a shared rank.
#[derive(Debug, Clone, PartialEq)]
pub struct KruskalModel {
    factors: [FactorMatrix; 3],
}

impl KruskalModel {
    pub fn new(u: FactorMatrix, v: FactorMatrix, w: FactorMatrix) -> Result<Self> {
        if u.rank() != v.rank() || u.rank() != w.rank() {
            return Err(Error::arg(format!(
                "factor ranks differ: {}, {}, {}",
                u.rank(),
                v.rank(),
                w.rank()
            )));
        }
        if u.rank() == 0 {
            return Err(Error::arg("rank must be positive"));
        }
        Ok(KruskalModel { factors: [u, v, w] })
    }

    pub fn zeros(dims: [usize; 3], rank: usize) -> Result<Self> {
        Self::new(
            FactorMatrix::zeros(dims[0], rank),
            FactorMatrix::zeros(dims[1], rank),
            FactorMatrix::zeros(dims[2], rank),
        )
    }

    pub fn rank(&self) -> usize {
        self.factors[0].rank()
    }

    pub fn dims(&self) -> [usize; 3] {
        [
            self.factors[0].rows(),
            self.factors[1].rows(),
            self.factors[2].rows(),
        ]
    }

    pub fn u(&self) -> &FactorMatrix {
        &self.factors[0]
    }

    pub fn v(&self) -> &FactorMatrix {
        &self.factors[1]
    }

    pub fn w(&self) -> &FactorMatrix {
        &self.factors[2]
    }

    pub fn factor(&self, mode: Mode) -> &FactorMatrix {
        &self.factors[mode.index()]
    }

    pub(crate) fn factor_mut(&mut self, mode: Mode) -> &mut FactorMatrix {
        &mut self.factors[mode.index()]
    }

    pub fn into_factors(self) -> [FactorMatrix; 3] {
        self.factors
    }

    /// The two non-target factors in the order used by the gradient
    /// formulas: `U -> (W, V)`, `V -> (W, U)`, `W -> (V, U)`.
    pub fn others(&self, mode: Mode) -> (&FactorMatrix, &FactorMatrix) {
        let [u, v, w] = &self.factors;
        match mode {
            Mode::U => (w, v),
            Mode::V => (w, u),
            Mode::W => (v, u),
        }
    }

    /// Reconstructed value `sum_r u[q][r] v[p][r] w[s][r]` with bounds checks.
    pub fn predict(&self, q: usize, p: usize, s: usize) -> Result<f64> {
        let [dq, dp, ds] = self.dims();
        if q >= dq || p >= dp || s >= ds {
            return Err(Error::arg(format!(
                "index ({q}, {p}, {s}) outside model dims {:?}",
                self.dims()
            )));
        }
        Ok(self.predict_unchecked(q, p, s))
    }

    #[inline]
    pub(crate) fn predict_unchecked(&self, q: usize, p: usize, s: usize) -> f64 {
        let (u, v, w) = (self.u().row(q), self.v().row(p), self.w().row(s));
        u.iter()
            .zip(v)
            .zip(w)
            .map(|((a, b), c)| a * b * c)
            .sum()
    }
}

/// Column-wise Kronecker product: column `r` of the result is `kron(a[:, r], b[:, r])`,
/// so row `i * b.rows() + j` holds `a[i][r] * b[j][r]`.
pub fn khatri_rao(a: &FactorMatrix, b: &FactorMatrix) -> Result<Matrix> {
    if a.rank() != b.rank() {
        return Err(Error::arg(format!(
            "khatri-rao needs equal column counts, got {} and {}",
            a.rank(),
            b.rank()
        )));
    }
    let rank = a.rank();
    let mut out = Matrix::zeros(a.rows() * b.rows(), rank);
    for i in 0..a.rows() {
        for j in 0..b.rows() {
            let row = i * b.rows() + j;
            for r in 0..rank {
                out.set(row, r, a.get(i, r) * b.get(j, r));
            }
        }
    }
    Ok(out)
}

/// Elementwise product of two equally shaped matrices.
pub fn hadamard(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    if a.shape() != b.shape() {
        return Err(Error::arg(format!(
            "hadamard shapes differ: {:?} vs {:?}",
            a.shape(),
            b.shape()
        )));
    }
    let data = a
        .as_slice()
        .iter()
        .zip(b.as_slice())
        .map(|(x, y)| x * y)
        .collect();
    Matrix::from_vec(a.rows(), a.cols(), data)
}

/// `a^T a`, accumulated row by row. Exactly symmetric by construction.
pub fn gram(a: &FactorMatrix) -> Matrix {
    let rank = a.rank();
    let mut out = Matrix::zeros(rank, rank);
    for i in 0..a.rows() {
        let row = a.row(i);
        for x in 0..rank {
            let ax = row[x];
            if ax == 0.0 {
                continue;
            }
            for y in x..rank {
                out.as_mut_slice()[x * rank + y] += ax * row[y];
            }
        }
    }
    for x in 0..rank {
        for y in 0..x {
            let v = out.get(y, x);
            out.set(x, y, v);
        }
    }
    out
}

/// Reconstructed value at `(q, p, s)`.
pub fn predict(model: &KruskalModel, q: usize, p: usize, s: usize) -> Result<f64> {
    model.predict(q, p, s)
}
