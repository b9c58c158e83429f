//! Bit-packed vectors and matrices over GF(2).
//!
//! Rows are stored 64 bits per word. Rank, span and solve queries drive
//! every matroid operation in this crate, so they are kept allocation-light
//! and deterministic.

use std::fmt;

use crate::error::{Error, Result};

/// Dense bit vector over GF(2).
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct BitVec {
    words: Vec<u64>,
    len: usize,
}

impl BitVec {
    pub fn zeros(len: usize) -> Self {
        Self {
            words: vec![0; len.div_ceil(64)],
            len,
        }
    }

    pub fn from_indices(len: usize, idxs: &[usize]) -> Self {
        let mut v = Self::zeros(len);
        for &i in idxs {
            v.set(i, true);
        }
        v
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        (self.words[i / 64] >> (i % 64)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, v: bool) {
        debug_assert!(i < self.len);
        let w = &mut self.words[i / 64];
        if v {
            *w |= 1 << (i % 64);
        } else {
            *w &= !(1 << (i % 64));
        }
    }

    pub fn xor_assign(&mut self, other: &BitVec) {
        debug_assert_eq!(self.len, other.len);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn any(&self) -> bool {
        self.words.iter().any(|&w| w != 0)
    }

    pub fn first_one(&self) -> Option<usize> {
        for (wi, &w) in self.words.iter().enumerate() {
            if w != 0 {
                return Some(wi * 64 + w.trailing_zeros() as usize);
            }
        }
        None
    }

    pub fn iter_ones(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len).filter(move |&i| self.get(i))
    }
}

impl fmt::Debug for BitVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len {
            write!(f, "{}", u8::from(self.get(i)))?;
        }
        Ok(())
    }
}

/// Incremental independence sieve: keeps a reduced pivot basis of the
/// vectors inserted so far.
#[derive(Default)]
pub struct Sieve {
    pivots: Vec<(usize, BitVec)>,
}

impl Sieve {
    pub fn new() -> Self {
        Self::default()
    }

    fn reduce(&self, v: &mut BitVec) {
        for (lead, p) in &self.pivots {
            if v.get(*lead) {
                v.xor_assign(p);
            }
        }
    }

    /// Inserts `v`; returns true when it was independent of the pivots.
    pub fn insert(&mut self, mut v: BitVec) -> bool {
        self.reduce(&mut v);
        match v.first_one() {
            Some(lead) => {
                self.pivots.push((lead, v));
                true
            }
            None => false,
        }
    }

    pub fn contains(&self, v: &BitVec) -> bool {
        let mut w = v.clone();
        self.reduce(&mut w);
        !w.any()
    }

    pub fn rank(&self) -> usize {
        self.pivots.len()
    }
}

/// Independence sieve for vectors packed into a single `u64`.
#[derive(Clone, Default)]
pub(crate) struct MaskSieve {
    pivots: Vec<u64>,
}

impl MaskSieve {
    pub fn new() -> Self {
        Self::default()
    }

    fn reduce(&self, mut v: u64) -> u64 {
        for &p in &self.pivots {
            let lead = 63 - p.leading_zeros();
            if (v >> lead) & 1 == 1 {
                v ^= p;
            }
        }
        v
    }

    pub fn insert(&mut self, v: u64) -> bool {
        let v = self.reduce(v);
        if v != 0 {
            self.pivots.push(v);
            true
        } else {
            false
        }
    }

    pub fn contains(&self, v: u64) -> bool {
        self.reduce(v) == 0
    }

    pub fn rank(&self) -> usize {
        self.pivots.len()
    }
}

/// GF(2) rank of a family of `u64`-packed vectors.
pub(crate) fn mask_rank(vecs: impl IntoIterator<Item = u64>) -> usize {
    let mut s = MaskSieve::new();
    for v in vecs {
        s.insert(v);
    }
    s.rank()
}

/// Row-major matrix over GF(2).
#[derive(Clone, PartialEq, Eq)]
pub struct Gf2Matrix {
    rows: usize,
    cols: usize,
    data: Vec<BitVec>,
}

impl Gf2Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![BitVec::zeros(cols); rows],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, true);
        }
        m
    }

    pub fn from_rows(cols: usize, rows: Vec<BitVec>) -> Result<Self> {
        for r in &rows {
            if r.len() != cols {
                return Err(Error::Input(format!(
                    "row length {} does not match column count {cols}",
                    r.len()
                )));
            }
        }
        Ok(Self {
            rows: rows.len(),
            cols,
            data: rows,
        })
    }

    /// Builds a matrix from one '0'/'1' string per row.
    pub fn from_bit_strings<S: AsRef<str>>(lines: &[S]) -> Result<Self> {
        let cols = lines.first().map(|l| l.as_ref().len()).unwrap_or(0);
        let mut rows = Vec::with_capacity(lines.len());
        for line in lines {
            let line = line.as_ref();
            if line.len() != cols {
                return Err(Error::Parse(format!(
                    "ragged matrix row: expected {cols} bits, got {}",
                    line.len()
                )));
            }
            let mut row = BitVec::zeros(cols);
            for (i, ch) in line.chars().enumerate() {
                match ch {
                    '0' => {}
                    '1' => row.set(i, true),
                    _ => {
                        return Err(Error::Parse(format!(
                            "non-bit character {ch:?} in matrix row"
                        )))
                    }
                }
            }
            rows.push(row);
        }
        Self::from_rows(cols, rows)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> bool {
        self.data[r].get(c)
    }

    pub fn set(&mut self, r: usize, c: usize, v: bool) {
        self.data[r].set(c, v);
    }

    pub fn row(&self, r: usize) -> &BitVec {
        &self.data[r]
    }

    /// The column `c` as a vector over the row index.
    pub fn column(&self, c: usize) -> BitVec {
        let mut v = BitVec::zeros(self.rows);
        for r in 0..self.rows {
            if self.get(r, c) {
                v.set(r, true);
            }
        }
        v
    }

    pub fn rank(&self) -> usize {
        let mut s = Sieve::new();
        for r in &self.data {
            s.insert(r.clone());
        }
        s.rank()
    }

    /// Reduced row echelon form (Gauss-Jordan).
    pub fn rref(&self) -> Gf2Matrix {
        let mut data = self.data.clone();
        let mut pivot_row = 0;
        for c in 0..self.cols {
            if pivot_row == self.rows {
                break;
            }
            let Some(r) = (pivot_row..self.rows).find(|&r| data[r].get(c)) else {
                continue;
            };
            data.swap(pivot_row, r);
            let pivot = data[pivot_row].clone();
            for (r, row) in data.iter_mut().enumerate() {
                if r != pivot_row && row.get(c) {
                    row.xor_assign(&pivot);
                }
            }
            pivot_row += 1;
        }
        Gf2Matrix {
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }

    /// Rank of the column set `cols`.
    pub fn col_rank(&self, cols: &[usize]) -> usize {
        let mut s = Sieve::new();
        for &c in cols {
            s.insert(self.column(c));
        }
        s.rank()
    }

    /// Whether column `c` lies in the span of the columns `span`.
    pub fn col_in_span(&self, span: &[usize], c: usize) -> bool {
        let mut s = Sieve::new();
        for &sc in span {
            s.insert(self.column(sc));
        }
        s.contains(&self.column(c))
    }

    /// Expresses column `target` as a sum of columns in `basis_cols`,
    /// returning the positions (into `basis_cols`) with coefficient 1.
    /// Returns None when `target` is outside the span.
    pub fn express_in_columns(&self, basis_cols: &[usize], target: usize) -> Option<Vec<usize>> {
        let width = self.rows + basis_cols.len();
        let mut pivots: Vec<(usize, BitVec)> = Vec::new();
        for (i, &c) in basis_cols.iter().enumerate() {
            let mut v = BitVec::zeros(width);
            for r in 0..self.rows {
                if self.get(r, c) {
                    v.set(r, true);
                }
            }
            v.set(self.rows + i, true);
            for (lead, p) in &pivots {
                if v.get(*lead) {
                    v.xor_assign(p);
                }
            }
            // only leads inside the vector part may serve as pivots
            match v.first_one() {
                Some(lead) if lead < self.rows => pivots.push((lead, v)),
                _ => {}
            }
        }
        let mut t = BitVec::zeros(width);
        for r in 0..self.rows {
            if self.get(r, target) {
                t.set(r, true);
            }
        }
        for (lead, p) in &pivots {
            if t.get(*lead) {
                t.xor_assign(p);
            }
        }
        if (0..self.rows).any(|r| t.get(r)) {
            return None;
        }
        Some((0..basis_cols.len()).filter(|i| t.get(self.rows + i)).collect())
    }
}

impl fmt::Debug for Gf2Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.data {
            writeln!(f, "{r:?}")?;
        }
        Ok(())
    }
}
