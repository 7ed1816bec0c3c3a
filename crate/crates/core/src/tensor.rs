//! Third-order sparse tensor in coordinate format.
//!
//! Entries are kept sorted lexicographically by `(q, p, s)`. For every mode
//! the tensor also carries a slice index: the positions of all entries whose
//! coordinate in that mode equals a given value, stored CSR-style. Within a
//! slice the positions are ordered by the remaining two coordinates, so every
//! kernel that walks a slice accumulates in a fixed order.

use std::collections::HashSet;
use std::fmt;

use crate::error::{Error, Result};

/// One of the three tensor modes. `U` is mode 0, `V` mode 1, `W` mode 2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Mode {
    U,
    V,
    W,
}

impl Mode {
    pub const ALL: [Mode; 3] = [Mode::U, Mode::V, Mode::W];

    pub fn index(self) -> usize {
        match self {
            Mode::U => 0,
            Mode::V => 1,
            Mode::W => 2,
        }
    }
}

impl TryFrom<usize> for Mode {
    type Error = Error;

    fn try_from(value: usize) -> Result<Self> {
        match value {
            0 => Ok(Mode::U),
            1 => Ok(Mode::V),
            2 => Ok(Mode::W),
            other => Err(Error::arg(format!("mode must be 0, 1 or 2, got {other}"))),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Mode::U => "U",
            Mode::V => "V",
            Mode::W => "W",
        };
        f.write_str(name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Entry {
    pub q: usize,
    pub p: usize,
    pub s: usize,
    pub value: f64,
}

impl Entry {
    pub fn new(q: usize, p: usize, s: usize, value: f64) -> Self {
        Entry { q, p, s, value }
    }

    pub fn coord(&self, mode: Mode) -> usize {
        match mode {
            Mode::U => self.q,
            Mode::V => self.p,
            Mode::W => self.s,
        }
    }

    fn key(&self) -> (usize, usize, usize) {
        (self.q, self.p, self.s)
    }
}

#[derive(Debug, Clone, PartialEq)]
struct SliceIndex {
    offsets: Vec<usize>,
    positions: Vec<usize>,
}

impl SliceIndex {
    fn build(entries: &[Entry], mode: Mode, len: usize) -> Self {
        let mut counts = vec![0usize; len + 1];
        for e in entries {
            counts[e.coord(mode) + 1] += 1;
        }
        for i in 0..len {
            counts[i + 1] += counts[i];
        }
        let offsets = counts.clone();
        let mut cursor = counts;
        let mut positions = vec![0usize; entries.len()];
        // Stable bucketing of lexicographically sorted entries keeps the
        // remaining coordinates sorted inside each slice.
        for (pos, e) in entries.iter().enumerate() {
            let c = e.coord(mode);
            positions[cursor[c]] = pos;
            cursor[c] += 1;
        }
        SliceIndex { offsets, positions }
    }

    fn slice(&self, i: usize) -> &[usize] {
        &self.positions[self.offsets[i]..self.offsets[i + 1]]
    }
}

/// Sparse `Q x P x S` tensor. Immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseTensor3 {
    dims: [usize; 3],
    entries: Vec<Entry>,
    index: [SliceIndex; 3],
    norm_sq: f64,
}

impl SparseTensor3 {
    /// Builds a tensor from unordered entries. Duplicate coordinates,
    /// out-of-range indices and non-finite values are rejected.
    pub fn new(dims: [usize; 3], mut entries: Vec<Entry>) -> Result<Self> {
        if dims.contains(&0) {
            return Err(Error::arg(format!("tensor dims must be positive, got {dims:?}")));
        }
        for e in &entries {
            if e.q >= dims[0] || e.p >= dims[1] || e.s >= dims[2] {
                return Err(Error::arg(format!(
                    "entry ({}, {}, {}) outside dims {:?}",
                    e.q, e.p, e.s, dims
                )));
            }
            if !e.value.is_finite() {
                return Err(Error::arg(format!(
                    "entry ({}, {}, {}) has non-finite value",
                    e.q, e.p, e.s
                )));
            }
        }
        entries.sort_by_key(|e| e.key());
        if let Some(w) = entries.windows(2).find(|w| w[0].key() == w[1].key()) {
            return Err(Error::arg(format!(
                "duplicate coordinate ({}, {}, {})",
                w[0].q, w[0].p, w[0].s
            )));
        }
        let norm_sq = entries.iter().map(|e| e.value * e.value).sum::<f64>();
        if !norm_sq.is_finite() {
            return Err(Error::arg("squared norm of tensor overflows"));
        }
        let index = [
            SliceIndex::build(&entries, Mode::U, dims[0]),
            SliceIndex::build(&entries, Mode::V, dims[1]),
            SliceIndex::build(&entries, Mode::W, dims[2]),
        ];
        Ok(SparseTensor3 {
            dims,
            entries,
            index,
            norm_sq,
        })
    }

    pub fn empty(dims: [usize; 3]) -> Result<Self> {
        Self::new(dims, Vec::new())
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn dim(&self, mode: Mode) -> usize {
        self.dims[mode.index()]
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    /// Entries in lexicographic `(q, p, s)` order.
    pub fn entries(&self) -> &[Entry] {
        &self.entries
    }

    /// Sum of squared stored values.
    pub fn norm_sq(&self) -> f64 {
        self.norm_sq
    }

    pub fn density(&self) -> f64 {
        self.nnz() as f64 / self.dims.iter().map(|&d| d as f64).product::<f64>()
    }

    /// Positions into [`entries`](Self::entries) of the entries in slice `i` of `mode`.
    pub(crate) fn slice_positions(&self, mode: Mode, i: usize) -> &[usize] {
        self.index[mode.index()].slice(i)
    }

    pub fn mode_slice_entries(&self, mode: Mode, index: usize) -> Result<Vec<Entry>> {
        if index >= self.dim(mode) {
            return Err(Error::arg(format!(
                "slice index {index} out of range for mode {mode} of length {}",
                self.dim(mode)
            )));
        }
        Ok(self
            .slice_positions(mode, index)
            .iter()
            .map(|&pos| self.entries[pos])
            .collect())
    }

    /// Whether the stored coordinate set contains `(q, p, s)`.
    pub fn contains(&self, q: usize, p: usize, s: usize) -> bool {
        if q >= self.dims[0] {
            return false;
        }
        self.slice_positions(Mode::U, q)
            .binary_search_by(|&pos| {
                let e = &self.entries[pos];
                (e.p, e.s).cmp(&(p, s))
            })
            .is_ok()
    }

    /// Distinct `(q, p)` pairs, used for per-user candidate filtering.
    pub(crate) fn user_item_pairs(&self) -> HashSet<(usize, usize)> {
        self.entries.iter().map(|e| (e.q, e.p)).collect()
    }
}

/// Slice lookup by raw mode number (0, 1 or 2).
pub fn mode_slice_entries(x: &SparseTensor3, mode: usize, index: usize) -> Result<Vec<Entry>> {
    x.mode_slice_entries(Mode::try_from(mode)?, index)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(q: usize, p: usize, s: usize, v: f64) -> Entry {
        Entry::new(q, p, s, v)
    }

    #[test]
    fn empty_slice_is_empty() {
        let x = SparseTensor3::empty([2, 3, 4]).unwrap();
        for mode in Mode::ALL {
            assert!(x.mode_slice_entries(mode, 1).unwrap().is_empty());
        }
    }

    #[test]
    fn singleton_slice() {
        let x = SparseTensor3::new([1, 2, 3], vec![e(0, 1, 2, 5.0)]).unwrap();
        assert_eq!(x.mode_slice_entries(Mode::U, 0).unwrap(), vec![e(0, 1, 2, 5.0)]);
    }

    #[test]
    fn slice_filters_and_orders() {
        let x = SparseTensor3::new(
            [2, 2, 1],
            vec![e(1, 0, 0, 3.0), e(0, 1, 0, 2.0), e(0, 0, 0, 1.0)],
        )
        .unwrap();
        assert_eq!(
            x.mode_slice_entries(Mode::U, 0).unwrap(),
            vec![e(0, 0, 0, 1.0), e(0, 1, 0, 2.0)]
        );
        assert_eq!(
            x.mode_slice_entries(Mode::V, 0).unwrap(),
            vec![e(0, 0, 0, 1.0), e(1, 0, 0, 3.0)]
        );
    }

    #[test]
    fn slice_errors() {
        let x = SparseTensor3::empty([2, 2, 2]).unwrap();
        assert!(mode_slice_entries(&x, 3, 0).is_err());
        assert!(mode_slice_entries(&x, 0, 2).is_err());
    }

    #[test]
    fn rejects_bad_input() {
        assert!(SparseTensor3::new([2, 2, 2], vec![e(0, 0, 0, 1.0), e(0, 0, 0, 2.0)]).is_err());
        assert!(SparseTensor3::new([2, 2, 2], vec![e(2, 0, 0, 1.0)]).is_err());
        assert!(SparseTensor3::new([2, 2, 2], vec![e(0, 0, 0, f64::NAN)]).is_err());
        assert!(SparseTensor3::new([0, 2, 2], vec![]).is_err());
    }

    #[test]
    fn norm_and_contains() {
        let x = SparseTensor3::new([3, 3, 3], vec![e(2, 1, 0, 3.0), e(0, 2, 2, 4.0)]).unwrap();
        assert_eq!(x.norm_sq(), 25.0);
        assert!(x.contains(2, 1, 0));
        assert!(x.contains(0, 2, 2));
        assert!(!x.contains(0, 2, 1));
        assert!(!x.contains(5, 0, 0));
    }

    #[test]
    fn mode_index_covers_entries() {
        let entries = vec![
            e(0, 0, 1, 1.0),
            e(1, 2, 0, 2.0),
            e(1, 0, 1, 3.0),
            e(2, 2, 2, 4.0),
            e(0, 1, 2, 5.0),
        ];
        let x = SparseTensor3::new([3, 3, 3], entries).unwrap();
        for mode in Mode::ALL {
            let mut all: Vec<usize> = (0..x.dim(mode))
                .flat_map(|i| x.slice_positions(mode, i).to_vec())
                .collect();
            all.sort_unstable();
            assert_eq!(all, (0..x.nnz()).collect::<Vec<_>>());
        }
    }
}
