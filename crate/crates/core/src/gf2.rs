//! Dense matrices over F₂ with bit-packed rows.
//!
//! Row `i` is stored as `words_per_row` consecutive `u64` words; bit `j % 64` of
//! word `j / 64` holds entry `(i, j)`. Bits past `n_cols` are always zero, so
//! equality and hashing are word-wise.

use std::fmt;
use std::ops::{Add, Mul};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

const WORD_BITS: usize = 64;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitMatrix {
    n_rows: usize,
    n_cols: usize,
    words_per_row: usize,
    data: Vec<u64>,
}

#[inline]
fn words_for(n_cols: usize) -> usize {
    n_cols.div_ceil(WORD_BITS)
}

#[inline]
fn tail_mask(n_cols: usize) -> u64 {
    match n_cols % WORD_BITS {
        0 => u64::MAX,
        r => (1u64 << r) - 1,
    }
}

impl BitMatrix {
    /// All-zero matrix. Panics if either dimension is zero.
    pub fn zeros(n_rows: usize, n_cols: usize) -> Self {
        assert!(n_rows >= 1 && n_cols >= 1, "BitMatrix dimensions must be positive");
        let words_per_row = words_for(n_cols);
        Self {
            n_rows,
            n_cols,
            words_per_row,
            data: vec![0; n_rows * words_per_row],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, true);
        }
        m
    }

    pub fn from_fn(n_rows: usize, n_cols: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let mut m = Self::zeros(n_rows, n_cols);
        for i in 0..n_rows {
            for j in 0..n_cols {
                if f(i, j) {
                    m.set(i, j, true);
                }
            }
        }
        m
    }

    /// Builds a matrix with at most 64 columns from one word per row.
    pub fn from_row_words(n_cols: usize, rows: &[u64]) -> Result<Self> {
        if rows.is_empty() || n_cols == 0 {
            return Err(Error::shape("matrix must have at least one row and one column"));
        }
        if n_cols > WORD_BITS {
            return Err(Error::shape(format!("{n_cols} columns do not fit one word")));
        }
        let mask = tail_mask(n_cols);
        if rows.iter().any(|&w| w & !mask != 0) {
            return Err(Error::shape("row word has bits beyond the column count"));
        }
        Ok(Self {
            n_rows: rows.len(),
            n_cols,
            words_per_row: 1,
            data: rows.to_vec(),
        })
    }

    /// Parses row bitstrings; the leftmost character is column 0.
    pub fn parse_rows<S: AsRef<str>>(rows: &[S]) -> Result<Self> {
        let first = rows.first().ok_or_else(|| Error::Parse("no rows".into()))?;
        let n_cols = first.as_ref().len();
        if n_cols == 0 {
            return Err(Error::Parse("empty row".into()));
        }
        let mut m = Self::zeros(rows.len(), n_cols);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != n_cols {
                return Err(Error::Parse(format!("row {i} has length {}, expected {n_cols}", row.len())));
            }
            for (j, ch) in row.chars().enumerate() {
                match ch {
                    '0' => {}
                    '1' => m.set(i, j, true),
                    other => return Err(Error::Parse(format!("invalid bit character {other:?}"))),
                }
            }
        }
        Ok(m)
    }

    pub fn to_row_strings(&self) -> Vec<String> {
        (0..self.n_rows)
            .map(|i| (0..self.n_cols).map(|j| if self.get(i, j) { '1' } else { '0' }).collect())
            .collect()
    }

    #[inline]
    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    #[inline]
    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    #[inline]
    pub fn is_square(&self) -> bool {
        self.n_rows == self.n_cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> bool {
        debug_assert!(i < self.n_rows && j < self.n_cols);
        (self.data[i * self.words_per_row + j / WORD_BITS] >> (j % WORD_BITS)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: bool) {
        assert!(i < self.n_rows && j < self.n_cols, "index ({i}, {j}) out of bounds");
        let w = &mut self.data[i * self.words_per_row + j / WORD_BITS];
        let bit = 1u64 << (j % WORD_BITS);
        if value {
            *w |= bit;
        } else {
            *w &= !bit;
        }
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[u64] {
        &self.data[i * self.words_per_row..(i + 1) * self.words_per_row]
    }

    #[inline]
    fn row_mut(&mut self, i: usize) -> &mut [u64] {
        &mut self.data[i * self.words_per_row..(i + 1) * self.words_per_row]
    }

    /// Row `i` as a single word. Only valid for matrices with at most 64 columns.
    #[inline]
    pub fn row_word(&self, i: usize) -> u64 {
        assert!(self.n_cols <= WORD_BITS, "row_word needs at most 64 columns");
        self.data[i]
    }

    /// All packed words, row-major. Two matrices of equal shape are equal iff these are.
    pub fn words(&self) -> &[u64] {
        &self.data
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&w| w == 0)
    }

    pub fn is_identity(&self) -> bool {
        self.is_square() && *self == Self::identity(self.n_rows)
    }

    pub fn is_symmetric(&self) -> bool {
        self.is_square() && *self == self.transpose()
    }

    fn xor_row_into(dst: &mut [u64], src: &[u64]) {
        for (d, s) in dst.iter_mut().zip(src) {
            *d ^= s;
        }
    }

    pub fn mat_mul(&self, other: &BitMatrix) -> Result<BitMatrix> {
        if self.n_cols != other.n_rows {
            return Err(Error::shape(format!(
                "cannot multiply {}x{} by {}x{}",
                self.n_rows, self.n_cols, other.n_rows, other.n_cols
            )));
        }
        let mut out = BitMatrix::zeros(self.n_rows, other.n_cols);
        if self.words_per_row == 1 && other.words_per_row == 1 {
            for i in 0..self.n_rows {
                let mut a = self.data[i];
                let mut acc = 0u64;
                while a != 0 {
                    let k = a.trailing_zeros() as usize;
                    acc ^= other.data[k];
                    a &= a - 1;
                }
                out.data[i] = acc;
            }
            return Ok(out);
        }
        let wpr = out.words_per_row;
        for i in 0..self.n_rows {
            for (wi, &word) in self.row(i).iter().enumerate() {
                let mut a = word;
                while a != 0 {
                    let k = wi * WORD_BITS + a.trailing_zeros() as usize;
                    let src = &other.data[k * wpr..(k + 1) * wpr];
                    Self::xor_row_into(&mut out.data[i * wpr..(i + 1) * wpr], src);
                    a &= a - 1;
                }
            }
        }
        Ok(out)
    }

    pub fn mat_add(&self, other: &BitMatrix) -> Result<BitMatrix> {
        if self.n_rows != other.n_rows || self.n_cols != other.n_cols {
            return Err(Error::shape(format!(
                "cannot add {}x{} and {}x{}",
                self.n_rows, self.n_cols, other.n_rows, other.n_cols
            )));
        }
        let mut out = self.clone();
        Self::xor_row_into(&mut out.data, &other.data);
        Ok(out)
    }

    pub fn transpose(&self) -> BitMatrix {
        let mut out = BitMatrix::zeros(self.n_cols, self.n_rows);
        for i in 0..self.n_rows {
            for (wi, &word) in self.row(i).iter().enumerate() {
                let mut a = word;
                while a != 0 {
                    let j = wi * WORD_BITS + a.trailing_zeros() as usize;
                    out.set(j, i, true);
                    a &= a - 1;
                }
            }
        }
        out
    }

    /// Row-reduces a copy and returns the rank.
    pub fn rank(&self) -> usize {
        let mut work = self.clone();
        work.eliminate(None)
    }

    /// Forward elimination in place; optionally mirrors each row operation on `shadow`.
    /// Returns the rank.
    fn eliminate(&mut self, mut shadow: Option<&mut BitMatrix>) -> usize {
        let mut rank = 0;
        for col in 0..self.n_cols {
            if rank == self.n_rows {
                break;
            }
            let Some(pivot) = (rank..self.n_rows).find(|&r| self.get(r, col)) else {
                continue;
            };
            if pivot != rank {
                self.swap_rows(pivot, rank);
                if let Some(s) = shadow.as_deref_mut() {
                    s.swap_rows(pivot, rank);
                }
            }
            let pivot_row = self.row(rank).to_vec();
            let shadow_row = shadow.as_deref().map(|s| s.row(rank).to_vec());
            for r in 0..self.n_rows {
                if r != rank && self.get(r, col) {
                    Self::xor_row_into(self.row_mut(r), &pivot_row);
                    if let (Some(s), Some(sr)) = (shadow.as_deref_mut(), shadow_row.as_ref()) {
                        Self::xor_row_into(s.row_mut(r), sr);
                    }
                }
            }
            rank += 1;
        }
        rank
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        let w = self.words_per_row;
        for k in 0..w {
            self.data.swap(a * w + k, b * w + k);
        }
    }

    pub fn invertible(&self) -> Result<bool> {
        if !self.is_square() {
            return Err(Error::shape(format!("{}x{} is not square", self.n_rows, self.n_cols)));
        }
        Ok(self.rank() == self.n_rows)
    }

    /// Gauss–Jordan inverse.
    pub fn inverse(&self) -> Result<BitMatrix> {
        if !self.is_square() {
            return Err(Error::shape(format!("{}x{} is not square", self.n_rows, self.n_cols)));
        }
        let mut work = self.clone();
        let mut inv = BitMatrix::identity(self.n_rows);
        if work.eliminate(Some(&mut inv)) != self.n_rows {
            return Err(Error::Singular);
        }
        Ok(inv)
    }

    /// Square-and-multiply power; `pow(0)` is the identity.
    pub fn pow(&self, mut exp: u64) -> Result<BitMatrix> {
        if !self.is_square() {
            return Err(Error::shape("power of a non-square matrix"));
        }
        let mut result = BitMatrix::identity(self.n_rows);
        let mut base = self.clone();
        while exp > 0 {
            if exp & 1 == 1 {
                result = result.mat_mul(&base)?;
            }
            exp >>= 1;
            if exp > 0 {
                base = base.mat_mul(&base)?;
            }
        }
        Ok(result)
    }

    /// Assembles `[[a, b], [c, d]]` from four equal-size square blocks.
    pub fn block2x2(a: &BitMatrix, b: &BitMatrix, c: &BitMatrix, d: &BitMatrix) -> Result<BitMatrix> {
        let m = a.n_rows;
        if [a, b, c, d].iter().any(|x| x.n_rows != m || x.n_cols != m) {
            return Err(Error::shape("block2x2 requires four m x m blocks"));
        }
        let top = a.hstack(b)?;
        let bottom = c.hstack(d)?;
        top.vstack(&bottom)
    }

    /// Splits a 2m×2m matrix into its four m×m blocks (top-left, top-right, bottom-left, bottom-right).
    pub fn split_blocks(&self) -> Result<[BitMatrix; 4]> {
        if !self.is_square() || !self.n_rows.is_multiple_of(2) {
            return Err(Error::shape("split_blocks needs a square matrix of even size"));
        }
        let m = self.n_rows / 2;
        let sub = |r0: usize, c0: usize| BitMatrix::from_fn(m, m, |i, j| self.get(r0 + i, c0 + j));
        Ok([sub(0, 0), sub(0, m), sub(m, 0), sub(m, m)])
    }

    /// Horizontal concatenation `(self | other)`.
    pub fn hstack(&self, other: &BitMatrix) -> Result<BitMatrix> {
        if self.n_rows != other.n_rows {
            return Err(Error::shape("hstack needs equal row counts"));
        }
        let n_cols = self.n_cols + other.n_cols;
        let mut out = BitMatrix::zeros(self.n_rows, n_cols);
        if n_cols <= WORD_BITS {
            for i in 0..self.n_rows {
                out.data[i] = self.data[i] | (other.data[i] << self.n_cols);
            }
            return Ok(out);
        }
        for i in 0..self.n_rows {
            for j in 0..self.n_cols {
                if self.get(i, j) {
                    out.set(i, j, true);
                }
            }
            for j in 0..other.n_cols {
                if other.get(i, j) {
                    out.set(i, self.n_cols + j, true);
                }
            }
        }
        Ok(out)
    }

    /// Vertical concatenation, `self` on top.
    pub fn vstack(&self, other: &BitMatrix) -> Result<BitMatrix> {
        if self.n_cols != other.n_cols {
            return Err(Error::shape("vstack needs equal column counts"));
        }
        let mut data = self.data.clone();
        data.extend_from_slice(&other.data);
        Ok(BitMatrix {
            n_rows: self.n_rows + other.n_rows,
            n_cols: self.n_cols,
            words_per_row: self.words_per_row,
            data,
        })
    }

    /// Permutation matrix with a one at `(i, perm[i])`.
    pub fn permutation(perm: &[usize]) -> Result<BitMatrix> {
        let n = perm.len();
        let mut seen = vec![false; n];
        for &p in perm {
            if p >= n || std::mem::replace(&mut seen[p], true) {
                return Err(Error::arg(format!("{perm:?} is not a permutation of 0..{n}")));
            }
        }
        Ok(BitMatrix::from_fn(n, n, |i, j| perm[i] == j))
    }
}

impl fmt::Debug for BitMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitMatrix[{}]", self.to_row_strings().join("/"))
    }
}

impl fmt::Display for BitMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, row) in self.to_row_strings().iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            f.write_str(row)?;
        }
        Ok(())
    }
}

impl Mul for &BitMatrix {
    type Output = BitMatrix;

    fn mul(self, rhs: &BitMatrix) -> BitMatrix {
        self.mat_mul(rhs).expect("dimension mismatch in BitMatrix product")
    }
}

impl Add for &BitMatrix {
    type Output = BitMatrix;

    fn add(self, rhs: &BitMatrix) -> BitMatrix {
        self.mat_add(rhs).expect("shape mismatch in BitMatrix sum")
    }
}

#[derive(Serialize, Deserialize)]
struct RowsRepr {
    rows: Vec<String>,
}

impl Serialize for BitMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        RowsRepr { rows: self.to_row_strings() }.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for BitMatrix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let repr = RowsRepr::deserialize(deserializer)?;
        BitMatrix::parse_rows(&repr.rows).map_err(serde::de::Error::custom)
    }
}
