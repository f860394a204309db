//! Compressed sparse row storage: a symmetric variant keeping only the lower
//! triangle, and a general variant for the non-symmetric consistency matrix.

use std::io::Write;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Accumulates `(row, col, value)` contributions; duplicates are summed on compression.
#[derive(Debug, Clone, Default)]
pub struct TripletBuilder {
    rows: usize,
    cols: usize,
    entries: Vec<(usize, usize, f64)>,
}

impl TripletBuilder {
    pub fn new(rows: usize, cols: usize) -> Self {
        Self { rows, cols, entries: Vec::new() }
    }

    pub fn with_capacity(rows: usize, cols: usize, cap: usize) -> Self {
        Self { rows, cols, entries: Vec::with_capacity(cap) }
    }

    pub fn push(&mut self, row: usize, col: usize, value: f64) {
        debug_assert!(row < self.rows && col < self.cols);
        self.entries.push((row, col, value));
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn extend(&mut self, other: TripletBuilder) {
        self.entries.extend(other.entries);
    }

    /// Uncompressed entries in insertion order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.entries.iter().copied()
    }

    fn compress(mut self) -> (Vec<usize>, Vec<usize>, Vec<f64>) {
        // stable sort keeps the accumulation order of duplicates deterministic
        self.entries.sort_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0usize; self.rows + 1];
        let mut cols = Vec::with_capacity(self.entries.len());
        let mut vals: Vec<f64> = Vec::with_capacity(self.entries.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in self.entries {
            if last == Some((r, c)) {
                *vals.last_mut().expect("nonempty") += v;
            } else {
                cols.push(c);
                vals.push(v);
                row_ptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for r in 0..self.rows {
            row_ptr[r + 1] += row_ptr[r];
        }
        (row_ptr, cols, vals)
    }

    /// Symmetric matrix from the entries with `row ≥ col`; upper entries are dropped.
    pub fn into_symmetric(mut self) -> SparseSymmetricMatrix {
        assert_eq!(self.rows, self.cols, "symmetric matrix must be square");
        self.entries.retain(|&(r, c, _)| r >= c);
        let n = self.rows;
        let (row_ptr, col_idx, values) = self.compress();
        SparseSymmetricMatrix { n, row_ptr, col_idx, values }
    }

    pub fn into_general(self) -> SparseMatrix {
        let (rows, cols) = (self.rows, self.cols);
        let (row_ptr, col_idx, values) = self.compress();
        SparseMatrix { rows, cols, row_ptr, col_idx, values }
    }
}

/// Symmetric matrix stored as its lower triangle (diagonal included) in CSR.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSymmetricMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl SparseSymmetricMatrix {
    pub fn zeros(n: usize) -> Self {
        Self { n, row_ptr: vec![0; n + 1], col_idx: Vec::new(), values: Vec::new() }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_diagonal(&vec![1.0; n])
    }

    pub fn from_diagonal(d: &[f64]) -> Self {
        let mut b = TripletBuilder::new(d.len(), d.len());
        for (i, v) in d.iter().enumerate() {
            b.push(i, i, *v);
        }
        b.into_symmetric()
    }

    /// Lower triangle of a dense symmetric matrix (entries with `|a| > 0`).
    pub fn from_dense(a: &DMatrix<f64>) -> Self {
        let mut b = TripletBuilder::new(a.nrows(), a.ncols());
        for i in 0..a.nrows() {
            for j in 0..=i {
                if a[(i, j)] != 0.0 {
                    b.push(i, j, a[(i, j)]);
                }
            }
        }
        b.into_symmetric()
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Stored entries (lower triangle only).
    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Column indices and values of the stored part of row `i` (columns `≤ i`).
    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        (&self.col_idx[r.clone()], &self.values[r])
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (r, c) = if i >= j { (i, j) } else { (j, i) };
        let (cols, vals) = self.row(r);
        cols.binary_search(&c).map_or(0.0, |k| vals[k])
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n);
        let mut y = vec![0.0; self.n];
        for i in 0..self.n {
            let (cols, vals) = self.row(i);
            let mut acc = 0.0;
            for (&j, &v) in cols.iter().zip(vals) {
                acc += v * x[j];
                if j != i {
                    y[j] += v * x[i];
                }
            }
            y[i] += acc;
        }
        y
    }

    /// `xᵀ A x`
    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        dot(x, &self.mul_vec(x))
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn scaled(&self, s: f64) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= s);
        out
    }

    /// `self + s * other`
    pub fn add_scaled(&self, other: &Self, s: f64) -> Self {
        assert_eq!(self.n, other.n);
        let mut b = TripletBuilder::with_capacity(self.n, self.n, self.nnz() + other.nnz());
        for (m, f) in [(self, 1.0), (other, s)] {
            for i in 0..m.n {
                let (cols, vals) = m.row(i);
                for (&j, &v) in cols.iter().zip(vals) {
                    b.push(i, j, f * v);
                }
            }
        }
        b.into_symmetric()
    }

    /// Principal submatrix on the index list `keep` (in the given order).
    pub fn submatrix(&self, keep: &[usize]) -> Self {
        let mut map = vec![usize::MAX; self.n];
        for (new, &old) in keep.iter().enumerate() {
            map[old] = new;
        }
        let mut b = TripletBuilder::new(keep.len(), keep.len());
        for i in 0..self.n {
            if map[i] == usize::MAX {
                continue;
            }
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                if map[j] != usize::MAX {
                    let (a, c) = (map[i], map[j]);
                    if a >= c {
                        b.push(a, c, v);
                    } else {
                        b.push(c, a, v);
                    }
                }
            }
        }
        b.into_symmetric()
    }

    /// The bordered matrix `[[A, m], [mᵀ, 0]]` of size `n + 1`.
    pub fn bordered(&self, border: &[f64]) -> Self {
        assert_eq!(border.len(), self.n);
        let mut b = TripletBuilder::with_capacity(self.n + 1, self.n + 1, self.nnz() + self.n);
        for i in 0..self.n {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                b.push(i, j, v);
            }
        }
        for (j, &v) in border.iter().enumerate() {
            if v != 0.0 {
                b.push(self.n, j, v);
            }
        }
        b.into_symmetric()
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut a = DMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                a[(i, j)] = v;
                a[(j, i)] = v;
            }
        }
        a
    }

    pub fn to_general(&self) -> SparseMatrix {
        let mut b = TripletBuilder::with_capacity(self.n, self.n, 2 * self.nnz());
        for i in 0..self.n {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                b.push(i, j, v);
                if i != j {
                    b.push(j, i, v);
                }
            }
        }
        b.into_general()
    }

    /// Coordinate text format: `N nnz`, then `row col value` per stored
    /// lower-triangle entry, 0-based.
    pub fn write_triplets<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{} {}", self.n, self.nnz())?;
        for i in 0..self.n {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                writeln!(w, "{i} {j} {v:.17e}")?;
            }
        }
        Ok(())
    }

    pub fn read_triplets(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| Error::Parse("empty matrix file".into()))?;
        let mut it = header.split_whitespace();
        let parse_usize = |s: Option<&str>| -> Result<usize> {
            s.ok_or_else(|| Error::Parse("truncated line".into()))?.parse().map_err(|e| Error::Parse(format!("{e}")))
        };
        let n = parse_usize(it.next())?;
        let nnz = parse_usize(it.next())?;
        let mut b = TripletBuilder::with_capacity(n, n, nnz);
        for line in lines {
            let mut it = line.split_whitespace();
            let i = parse_usize(it.next())?;
            let j = parse_usize(it.next())?;
            let v: f64 = it
                .next()
                .ok_or_else(|| Error::Parse("truncated line".into()))?
                .parse()
                .map_err(|e| Error::Parse(format!("{e}")))?;
            if i >= n || j > i {
                return Err(Error::Parse(format!("entry ({i}, {j}) outside the lower triangle of a {n}×{n} matrix")));
            }
            b.push(i, j, v);
        }
        if b.len() != nnz {
            return Err(Error::Parse(format!("header announces {nnz} entries, found {}", b.len())));
        }
        Ok(b.into_symmetric())
    }
}

/// General CSR matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    rows: usize,
    cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl SparseMatrix {
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        (&self.col_idx[r.clone()], &self.values[r])
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (cols, vals) = self.row(i);
        cols.binary_search(&j).map_or(0.0, |k| vals[k])
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.rows)
            .map(|i| {
                let (cols, vals) = self.row(i);
                cols.iter().zip(vals).map(|(&j, v)| v * x[j]).sum()
            })
            .collect()
    }

    pub fn transpose_mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.cols];
        for i in 0..self.rows {
            let (cols, vals) = self.row(i);
            for (&j, v) in cols.iter().zip(vals) {
                y[j] += v * x[i];
            }
        }
        y
    }

    pub fn transpose(&self) -> SparseMatrix {
        let mut b = TripletBuilder::with_capacity(self.cols, self.rows, self.nnz());
        for i in 0..self.rows {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                b.push(j, i, v);
            }
        }
        b.into_general()
    }

    /// `Σ s_k M_k` over matrices of equal shape.
    pub fn linear_combination(terms: &[(&SparseMatrix, f64)]) -> SparseMatrix {
        let (rows, cols) = terms[0].0.shape();
        let mut b = TripletBuilder::new(rows, cols);
        for (m, s) in terms {
            assert_eq!(m.shape(), (rows, cols));
            for i in 0..rows {
                let (cs, vs) = m.row(i);
                for (&j, &v) in cs.iter().zip(vs) {
                    b.push(i, j, s * v);
                }
            }
        }
        b.into_general()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `max |A_ij - A_ji|` over all stored entries.
    pub fn max_asymmetry(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.rows {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                worst = worst.max((v - self.get(j, i)).abs());
            }
        }
        worst
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut a = DMatrix::zeros(self.rows, self.cols);
        for i in 0..self.rows {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                a[(i, j)] = v;
            }
        }
        a
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn sample() -> SparseSymmetricMatrix {
        let mut b = TripletBuilder::new(3, 3);
        b.push(0, 0, 4.0);
        b.push(1, 0, -1.0);
        b.push(0, 1, -1.0); // dropped, lower triangle only
        b.push(1, 1, 2.0);
        b.push(1, 1, 1.0);
        b.push(2, 1, 0.5);
        b.push(2, 2, 5.0);
        b.into_symmetric()
    }

    #[test]
    fn duplicates_summed_and_symmetric_semantics() {
        let a = sample();
        assert_eq!(a.nnz(), 5);
        assert_eq!(a.get(1, 1), 3.0);
        assert_eq!(a.get(0, 1), -1.0);
        assert_eq!(a.get(1, 0), -1.0);
        assert_eq!(a.get(2, 0), 0.0);
        let y = a.mul_vec(&[1.0, 2.0, 3.0]);
        let d = a.to_dense();
        let expect = &d * nalgebra::DVector::from_vec(vec![1.0, 2.0, 3.0]);
        for i in 0..3 {
            assert_abs_diff_eq!(y[i], expect[i], epsilon = 1e-15);
        }
        assert_eq!(a.to_general().max_asymmetry(), 0.0);
    }

    #[test]
    fn submatrix_and_border() {
        let a = sample();
        let s = a.submatrix(&[2, 0]);
        assert_eq!(s.get(0, 0), 5.0);
        assert_eq!(s.get(1, 1), 4.0);
        assert_eq!(s.get(0, 1), 0.0);
        let bo = a.bordered(&[1.0, 1.0, 1.0]);
        assert_eq!(bo.dim(), 4);
        assert_eq!(bo.get(3, 3), 0.0);
        assert_eq!(bo.get(1, 3), 1.0);
    }

    #[test]
    fn triplet_text_round_trip() {
        let a = sample();
        let mut buf = Vec::new();
        a.write_triplets(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("3 5\n"));
        let b = SparseSymmetricMatrix::read_triplets(&text).unwrap();
        assert_eq!(a, b);
        assert!(SparseSymmetricMatrix::read_triplets("2 1\n0 1 3.0\n").is_err());
    }

    #[test]
    fn general_products() {
        let mut b = TripletBuilder::new(2, 3);
        b.push(0, 2, 1.0);
        b.push(1, 0, 2.0);
        let m = b.into_general();
        assert_eq!(m.mul_vec(&[1.0, 1.0, 3.0]), vec![3.0, 2.0]);
        assert_eq!(m.transpose_mul_vec(&[1.0, 1.0]), vec![2.0, 0.0, 1.0]);
        assert_eq!(m.transpose().get(2, 0), 1.0);
    }
}
