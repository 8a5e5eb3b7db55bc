//! Compressed sparse complex matrices on the symmetric basis.
//!
//! Operators are assembled row by row in a mutable builder and then frozen
//! into compressed sparse row form. Freezing canonicalizes each row: entries
//! are grouped by column and summed in a fixed order, so assembling the same
//! set of contributions in any order yields a bit-identical matrix. Exact
//! zeros are dropped.

use num_complex::Complex64 as C64;
use thiserror::Error;

#[derive(Error, Debug, PartialEq)]
pub enum SparseError {
    #[error("operator is frozen; structure and values are immutable")]
    Frozen,
    #[error("operator is not frozen yet")]
    NotFrozen,
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
}

#[derive(Clone, Debug)]
struct Csr {
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<C64>,
}

#[derive(Clone, Debug)]
enum Repr {
    Building(Vec<Vec<(usize, C64)>>),
    Frozen(Csr),
}

/// A sparse complex operator (Liouvillian, one-sided operator, ...) on a
/// basis of the given dimension.
#[derive(Clone, Debug)]
pub struct SparseOperator {
    dim: usize,
    repr: Repr,
    dropped_arrows: u64,
}

impl SparseOperator {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            repr: Repr::Building(vec![Vec::new(); dim]),
            dropped_arrows: 0,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_frozen(&self) -> bool {
        matches!(self.repr, Repr::Frozen(_))
    }

    /// Arrows silently discarded because their shifted target left the
    /// truncated index space.
    pub fn dropped_arrows(&self) -> u64 {
        self.dropped_arrows
    }

    pub(crate) fn note_dropped(&mut self) {
        self.dropped_arrows += 1;
    }

    /// Accumulate `value` at `(row, col)`.
    pub fn add(&mut self, row: usize, col: usize, value: C64) -> Result<(), SparseError> {
        match &mut self.repr {
            Repr::Building(rows) => {
                rows[row].push((col, value));
                Ok(())
            }
            Repr::Frozen(_) => Err(SparseError::Frozen),
        }
    }

    /// Canonicalize and make immutable. Idempotent.
    pub fn freeze(&mut self) {
        let rows = match &mut self.repr {
            Repr::Building(rows) => std::mem::take(rows),
            Repr::Frozen(_) => return,
        };
        let mut row_ptr = Vec::with_capacity(self.dim + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for mut row in rows {
            // Canonical per-entry summation order: sort by column, then by
            // the bit patterns of the addends. Equal multisets of
            // contributions then freeze to equal floats.
            row.sort_by_key(|&(c, v)| (c, v.re.to_bits(), v.im.to_bits()));
            let mut it = row.into_iter().peekable();
            while let Some((c, mut acc)) = it.next() {
                while let Some(&(c2, v2)) = it.peek() {
                    if c2 != c {
                        break;
                    }
                    acc += v2;
                    it.next();
                }
                if acc != C64::new(0.0, 0.0) {
                    cols.push(c);
                    vals.push(acc);
                }
            }
            row_ptr.push(cols.len());
        }
        self.repr = Repr::Frozen(Csr { row_ptr, cols, vals });
    }

    fn csr(&self) -> &Csr {
        match &self.repr {
            Repr::Frozen(csr) => csr,
            Repr::Building(_) => panic!("operator must be frozen first"),
        }
    }

    pub fn nnz(&self) -> usize {
        match &self.repr {
            Repr::Frozen(csr) => csr.cols.len(),
            Repr::Building(rows) => rows.iter().map(Vec::len).sum(),
        }
    }

    /// Entries of row `i` as `(col, value)` pairs. Requires a frozen operator.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, C64)> + '_ {
        let csr = self.csr();
        let lo = csr.row_ptr[i];
        let hi = csr.row_ptr[i + 1];
        csr.cols[lo..hi].iter().copied().zip(csr.vals[lo..hi].iter().copied())
    }

    /// Entry lookup (frozen only); zero when absent.
    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.row(row)
            .find(|&(c, _)| c == col)
            .map(|(_, v)| v)
            .unwrap_or_else(|| C64::new(0.0, 0.0))
    }

    /// `y = A x` (frozen only).
    pub fn matvec(&self, x: &[C64], y: &mut [C64]) {
        let csr = self.csr();
        assert_eq!(x.len(), self.dim);
        assert_eq!(y.len(), self.dim);
        for i in 0..self.dim {
            let lo = csr.row_ptr[i];
            let hi = csr.row_ptr[i + 1];
            let mut acc = C64::new(0.0, 0.0);
            for k in lo..hi {
                acc += csr.vals[k] * x[csr.cols[k]];
            }
            y[i] = acc;
        }
    }

    pub fn apply(&self, x: &[C64]) -> Vec<C64> {
        let mut y = vec![C64::new(0.0, 0.0); self.dim];
        self.matvec(x, &mut y);
        y
    }

    /// `y = A^T x` (frozen only); no conjugation.
    pub fn matvec_transpose(&self, x: &[C64], y: &mut [C64]) {
        let csr = self.csr();
        assert_eq!(x.len(), self.dim);
        assert_eq!(y.len(), self.dim);
        y.fill(C64::new(0.0, 0.0));
        for i in 0..self.dim {
            let xi = x[i];
            if xi == C64::new(0.0, 0.0) {
                continue;
            }
            for k in csr.row_ptr[i]..csr.row_ptr[i + 1] {
                y[csr.cols[k]] += csr.vals[k] * xi;
            }
        }
    }

    /// Maximum absolute row sum (the operator infinity norm).
    pub fn norm_inf(&self) -> f64 {
        let csr = self.csr();
        (0..self.dim)
            .map(|i| {
                csr.vals[csr.row_ptr[i]..csr.row_ptr[i + 1]]
                    .iter()
                    .map(|v| v.norm())
                    .sum::<f64>()
            })
            .fold(0.0, f64::max)
    }

    /// Sparse matrix product `A * B`; both operands frozen, result frozen.
    pub fn product(&self, other: &Self) -> Result<Self, SparseError> {
        if self.dim != other.dim {
            return Err(SparseError::DimensionMismatch(self.dim, other.dim));
        }
        let a = self.csr();
        let mut out = SparseOperator::new(self.dim);
        let Repr::Building(rows) = &mut out.repr else { unreachable!() };
        for i in 0..self.dim {
            let row = &mut rows[i];
            for k in a.row_ptr[i]..a.row_ptr[i + 1] {
                let va = a.vals[k];
                for (cb, vb) in other.row(a.cols[k]) {
                    row.push((cb, va * vb));
                }
            }
        }
        out.freeze();
        Ok(out)
    }

    /// `self += alpha * other` on a building operator; `other` must be frozen.
    pub fn axpy(&mut self, alpha: C64, other: &Self) -> Result<(), SparseError> {
        if self.dim != other.dim {
            return Err(SparseError::DimensionMismatch(self.dim, other.dim));
        }
        let o = other.csr();
        match &mut self.repr {
            Repr::Frozen(_) => Err(SparseError::Frozen),
            Repr::Building(rows) => {
                for i in 0..self.dim {
                    for k in o.row_ptr[i]..o.row_ptr[i + 1] {
                        rows[i].push((o.cols[k], alpha * o.vals[k]));
                    }
                }
                Ok(())
            }
        }
    }

    /// Identity matrix, frozen.
    pub fn identity(dim: usize) -> Self {
        let mut op = Self::new(dim);
        for i in 0..dim {
            op.add(i, i, C64::new(1.0, 0.0)).unwrap();
        }
        op.freeze();
        op
    }

    /// All stored entries as `(row, col, value)` triples (frozen only).
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        (0..self.dim).flat_map(move |i| self.row(i).map(move |(c, v)| (i, c, v)))
    }

    /// Largest entrywise difference `max |A_ij - B_ij|`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim, other.dim);
        let mut dense_row = vec![C64::new(0.0, 0.0); self.dim];
        let mut worst = 0.0f64;
        for i in 0..self.dim {
            for (c, v) in self.row(i) {
                dense_row[c] = v;
            }
            for (c, v) in other.row(i) {
                let d = (dense_row[c] - v).norm();
                worst = worst.max(d);
                dense_row[c] = C64::new(0.0, 0.0);
            }
            for (c, _) in self.row(i) {
                let d = dense_row[c].norm();
                worst = worst.max(d);
                dense_row[c] = C64::new(0.0, 0.0);
            }
        }
        worst
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn freeze_canonicalizes_and_drops_zeros() {
        let mut a = SparseOperator::new(3);
        a.add(0, 1, c(1.0, 0.0)).unwrap();
        a.add(0, 1, c(-1.0, 0.0)).unwrap();
        a.add(0, 2, c(2.0, 1.0)).unwrap();
        a.freeze();
        assert_eq!(a.nnz(), 1);
        assert_eq!(a.get(0, 2), c(2.0, 1.0));
        assert_eq!(a.get(0, 1), c(0.0, 0.0));
        // frozen operators reject mutation
        assert_eq!(a.add(0, 0, c(1.0, 0.0)), Err(SparseError::Frozen));
    }

    #[test]
    fn assembly_order_is_immaterial() {
        let contributions = [
            (0usize, 0usize, c(0.1, 0.0)),
            (0, 0, c(0.7, -0.3)),
            (0, 0, c(-0.2, 0.11)),
            (1, 2, c(1e-17, 1.0)),
            (1, 2, c(1.0, -1e-17)),
        ];
        let build = |order: &[usize]| {
            let mut a = SparseOperator::new(3);
            for &i in order {
                let (r, col, v) = contributions[i];
                a.add(r, col, v).unwrap();
            }
            a.freeze();
            a
        };
        let a = build(&[0, 1, 2, 3, 4]);
        let b = build(&[4, 2, 0, 3, 1]);
        for ((r1, c1, v1), (r2, c2, v2)) in a.entries().zip(b.entries()) {
            assert_eq!((r1, c1), (r2, c2));
            assert_eq!(v1.re.to_bits(), v2.re.to_bits());
            assert_eq!(v1.im.to_bits(), v2.im.to_bits());
        }
    }

    #[test]
    fn product_with_identity() {
        let mut a = SparseOperator::new(3);
        a.add(0, 1, c(2.0, 0.5)).unwrap();
        a.add(2, 0, c(-1.0, 0.0)).unwrap();
        a.freeze();
        let id = SparseOperator::identity(3);
        let p = a.product(&id).unwrap();
        assert_eq!(p.max_abs_diff(&a), 0.0);
        let q = id.product(&a).unwrap();
        assert_eq!(q.max_abs_diff(&a), 0.0);
    }

    #[test]
    fn axpy_zero_is_identity_op() {
        let mut a = SparseOperator::new(2);
        a.add(0, 0, c(1.0, 0.0)).unwrap();
        let mut b = SparseOperator::new(2);
        b.add(0, 0, c(3.0, 0.0)).unwrap();
        b.add(1, 1, c(4.0, 0.0)).unwrap();
        b.freeze();
        a.axpy(c(0.0, 0.0), &b).unwrap();
        a.freeze();
        let mut plain = SparseOperator::new(2);
        plain.add(0, 0, c(1.0, 0.0)).unwrap();
        plain.freeze();
        assert_eq!(a.max_abs_diff(&plain), 0.0);
    }

    #[test]
    fn matvec_and_transpose() {
        let mut a = SparseOperator::new(2);
        a.add(0, 1, c(0.0, 1.0)).unwrap();
        a.add(1, 0, c(2.0, 0.0)).unwrap();
        a.freeze();
        let x = vec![c(1.0, 0.0), c(0.0, 1.0)];
        let y = a.apply(&x);
        assert_eq!(y[0], c(-1.0, 0.0));
        assert_eq!(y[1], c(2.0, 0.0));
        let mut yt = vec![c(0.0, 0.0); 2];
        a.matvec_transpose(&x, &mut yt);
        assert_eq!(yt[0], c(0.0, 2.0));
        assert_eq!(yt[1], c(0.0, 1.0));
    }
}
