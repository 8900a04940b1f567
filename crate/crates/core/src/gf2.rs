//! Bit vectors and sparse binary matrices over GF(2).
//!
//! Vectors multiply matrices from the left (`x = u·G`), matching the
//! systematic encoder. Matrices store one sorted column-index list per row.

use std::fmt;
use std::ops::BitXorAssign;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Gf2Error {
    #[error("dimension mismatch: expected length {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("matrix has no entries ({rows}x{cols})")]
    EmptyMatrix { rows: usize, cols: usize },
    #[error("row {row}: column index {col} out of range for {cols} columns")]
    ColumnOutOfRange { row: usize, col: usize, cols: usize },
    #[error("row {row}: column indices must be strictly increasing")]
    UnsortedRow { row: usize },
    #[error("matrix text, line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

const WORD: usize = 64;

/// Packed bit vector.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct BitVec {
    len: usize,
    words: Vec<u64>,
}

impl BitVec {
    pub fn zeros(len: usize) -> Self {
        BitVec { len, words: vec![0; len.div_ceil(WORD)] }
    }

    pub fn unit(len: usize, i: usize) -> Self {
        let mut v = Self::zeros(len);
        v.set(i, true);
        v
    }

    /// From a slice of 0/1 values; any nonzero byte counts as 1.
    pub fn from_bits(bits: &[u8]) -> Self {
        let mut v = Self::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            if b != 0 {
                v.set(i, true);
            }
        }
        v
    }

    pub fn from_bools(bits: impl IntoIterator<Item = bool>) -> Self {
        let bits: Vec<u8> = bits.into_iter().map(u8::from).collect();
        Self::from_bits(&bits)
    }

    /// Low `len` bits of `x`, bit `i` of the vector is bit `i` of `x`.
    pub fn from_u64(x: u64, len: usize) -> Self {
        assert!(len <= WORD);
        let mut v = Self::zeros(len);
        if len > 0 {
            v.words[0] = if len == WORD { x } else { x & ((1u64 << len) - 1) };
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
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        (self.words[i / WORD] >> (i % WORD)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        let mask = 1u64 << (i % WORD);
        if value {
            self.words[i / WORD] |= mask;
        } else {
            self.words[i / WORD] &= !mask;
        }
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        assert!(i < self.len);
        self.words[i / WORD] ^= 1u64 << (i % WORD);
    }

    /// Hamming weight.
    pub fn weight(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    /// Number of positions where `self` and `other` differ.
    pub fn distance(&self, other: &BitVec) -> usize {
        assert_eq!(self.len, other.len);
        self.words.iter().zip(&other.words).map(|(a, b)| (a ^ b).count_ones() as usize).sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    /// Indices of set bits in increasing order.
    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    None
                } else {
                    let t = w.trailing_zeros() as usize;
                    w &= w - 1;
                    Some(wi * WORD + t)
                }
            })
        })
    }

    pub fn to_bits(&self) -> Vec<u8> {
        self.iter().map(u8::from).collect()
    }

    /// Concatenation `(self, other)`.
    pub fn concat(&self, other: &BitVec) -> BitVec {
        let mut out = BitVec::zeros(self.len + other.len);
        for i in self.ones() {
            out.set(i, true);
        }
        for i in other.ones() {
            out.set(self.len + i, true);
        }
        out
    }

    /// Bits `[start, end)`.
    pub fn slice(&self, start: usize, end: usize) -> BitVec {
        assert!(start <= end && end <= self.len);
        let mut out = BitVec::zeros(end - start);
        for i in start..end {
            if self.get(i) {
                out.set(i - start, true);
            }
        }
        out
    }

    pub fn xor_with(&self, other: &BitVec) -> BitVec {
        let mut out = self.clone();
        out ^= other;
        out
    }
}

impl BitXorAssign<&BitVec> for BitVec {
    fn bitxor_assign(&mut self, rhs: &BitVec) {
        assert_eq!(self.len, rhs.len, "xor of vectors with different lengths");
        for (a, b) in self.words.iter_mut().zip(&rhs.words) {
            *a ^= b;
        }
    }
}

impl fmt::Debug for BitVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitVec[{}]", self)
    }
}

impl fmt::Display for BitVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.iter() {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl std::str::FromStr for BitVec {
    type Err = Gf2Error;

    /// Parses a string of `0`/`1` characters; whitespace is ignored.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut bits = Vec::with_capacity(s.len());
        for ch in s.chars().filter(|c| !c.is_whitespace()) {
            match ch {
                '0' => bits.push(0),
                '1' => bits.push(1),
                other => {
                    return Err(Gf2Error::Parse {
                        line: 1,
                        msg: format!("unexpected character {other:?} in bit string"),
                    })
                }
            }
        }
        Ok(BitVec::from_bits(&bits))
    }
}

/// Sparse binary matrix in row-support form.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BitMatrix {
    rows: usize,
    cols: usize,
    row_supports: Vec<Vec<usize>>,
}

impl BitMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        BitMatrix { rows, cols, row_supports: vec![Vec::new(); rows] }
    }

    pub fn identity(n: usize) -> Self {
        BitMatrix { rows: n, cols: n, row_supports: (0..n).map(|i| vec![i]).collect() }
    }

    /// Validates that every row support is strictly increasing and in range.
    pub fn from_row_supports(rows: usize, cols: usize, row_supports: Vec<Vec<usize>>) -> Result<Self, Gf2Error> {
        if row_supports.len() != rows {
            return Err(Gf2Error::DimensionMismatch { expected: rows, found: row_supports.len() });
        }
        for (r, support) in row_supports.iter().enumerate() {
            if let Some(&c) = support.iter().find(|&&c| c >= cols) {
                return Err(Gf2Error::ColumnOutOfRange { row: r, col: c, cols });
            }
            if support.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Gf2Error::UnsortedRow { row: r });
            }
        }
        Ok(BitMatrix { rows, cols, row_supports })
    }

    /// Sorts and deduplicates by XOR semantics (an index listed twice cancels).
    pub fn from_unsorted_rows(rows: usize, cols: usize, mut row_supports: Vec<Vec<usize>>) -> Result<Self, Gf2Error> {
        for support in &mut row_supports {
            support.sort_unstable();
            let mut out: Vec<usize> = Vec::with_capacity(support.len());
            for &c in support.iter() {
                if out.last() == Some(&c) {
                    out.pop();
                } else {
                    out.push(c);
                }
            }
            *support = out;
        }
        Self::from_row_supports(rows, cols, row_supports)
    }

    pub fn from_dense(dense: &[Vec<u8>]) -> Result<Self, Gf2Error> {
        let rows = dense.len();
        let cols = dense.first().map_or(0, Vec::len);
        let mut supports = Vec::with_capacity(rows);
        for row in dense {
            if row.len() != cols {
                return Err(Gf2Error::DimensionMismatch { expected: cols, found: row.len() });
            }
            supports.push(row.iter().enumerate().filter(|(_, &b)| b != 0).map(|(c, _)| c).collect());
        }
        Ok(BitMatrix { rows, cols, row_supports: supports })
    }

    pub fn from_bit_rows(cols: usize, rows: &[BitVec]) -> Result<Self, Gf2Error> {
        let mut supports = Vec::with_capacity(rows.len());
        for row in rows {
            if row.len() != cols {
                return Err(Gf2Error::DimensionMismatch { expected: cols, found: row.len() });
            }
            supports.push(row.ones().collect());
        }
        Ok(BitMatrix { rows: rows.len(), cols, row_supports: supports })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, r: usize) -> &[usize] {
        &self.row_supports[r]
    }

    pub fn row_supports(&self) -> &[Vec<usize>] {
        &self.row_supports
    }

    pub fn get(&self, r: usize, c: usize) -> bool {
        self.row_supports[r].binary_search(&c).is_ok()
    }

    pub fn nnz(&self) -> usize {
        self.row_supports.iter().map(Vec::len).sum()
    }

    pub fn row_weights(&self) -> Vec<usize> {
        self.row_supports.iter().map(Vec::len).collect()
    }

    pub fn col_weights(&self) -> Vec<usize> {
        let mut w = vec![0; self.cols];
        for support in &self.row_supports {
            for &c in support {
                w[c] += 1;
            }
        }
        w
    }

    /// Row supports of the transpose.
    pub fn col_supports(&self) -> Vec<Vec<usize>> {
        let mut cols = vec![Vec::new(); self.cols];
        for (r, support) in self.row_supports.iter().enumerate() {
            for &c in support {
                cols[c].push(r);
            }
        }
        cols
    }

    pub fn transpose(&self) -> BitMatrix {
        BitMatrix { rows: self.cols, cols: self.rows, row_supports: self.col_supports() }
    }

    pub fn row_vec(&self, r: usize) -> BitVec {
        let mut v = BitVec::zeros(self.cols);
        for &c in &self.row_supports[r] {
            v.set(c, true);
        }
        v
    }

    /// `[I | self]`.
    pub fn with_identity_prefix(&self) -> BitMatrix {
        let supports = self
            .row_supports
            .iter()
            .enumerate()
            .map(|(r, s)| std::iter::once(r).chain(s.iter().map(|&c| c + self.rows)).collect())
            .collect();
        BitMatrix { rows: self.rows, cols: self.rows + self.cols, row_supports: supports }
    }

    /// Fraction of nonzero entries.
    pub fn density(&self) -> Result<f64, Gf2Error> {
        if self.rows == 0 || self.cols == 0 {
            return Err(Gf2Error::EmptyMatrix { rows: self.rows, cols: self.cols });
        }
        Ok(self.nnz() as f64 / (self.rows as f64 * self.cols as f64))
    }

    /// Row vector times matrix: `v·M`, with `v.len() == rows`.
    pub fn mat_vec_mul(&self, v: &BitVec) -> Result<BitVec, Gf2Error> {
        if v.len() != self.rows {
            return Err(Gf2Error::DimensionMismatch { expected: self.rows, found: v.len() });
        }
        let mut out = BitVec::zeros(self.cols);
        for r in v.ones() {
            for &c in &self.row_supports[r] {
                out.flip(c);
            }
        }
        Ok(out)
    }

    /// Product `self · other` over GF(2).
    pub fn mul(&self, other: &BitMatrix) -> Result<BitMatrix, Gf2Error> {
        if self.cols != other.rows {
            return Err(Gf2Error::DimensionMismatch { expected: self.cols, found: other.rows });
        }
        let rows = (0..self.rows)
            .map(|r| {
                let mut acc = BitVec::zeros(other.cols);
                for &k in &self.row_supports[r] {
                    for &c in &other.row_supports[k] {
                        acc.flip(c);
                    }
                }
                acc
            })
            .collect::<Vec<_>>();
        Self::from_bit_rows(other.cols, &rows)
    }

    pub fn dense_rows(&self) -> Vec<BitVec> {
        (0..self.rows).map(|r| self.row_vec(r)).collect()
    }

    /// Rank over GF(2) by Gaussian elimination on packed rows.
    pub fn rank(&self) -> usize {
        let mut rows = self.dense_rows();
        let words = self.cols.div_ceil(WORD);
        let mut rank = 0;
        for col in 0..self.cols {
            let (w, bit) = (col / WORD, 1u64 << (col % WORD));
            let Some(p) = (rank..rows.len()).find(|&i| rows[i].words[w] & bit != 0) else {
                continue;
            };
            rows.swap(rank, p);
            let (head, tail) = rows.split_at_mut(rank + 1);
            let pivot = &head[rank];
            for row in tail.iter_mut() {
                if row.words[w] & bit != 0 {
                    for j in w..words {
                        row.words[j] ^= pivot.words[j];
                    }
                }
            }
            rank += 1;
            if rank == rows.len() {
                break;
            }
        }
        rank
    }

    /// Basis of the right null space `{x : self·xᵀ = 0}`, returned as rows.
    ///
    /// Each basis vector has exactly one free (non-pivot) position set, so the
    /// free positions form an information set.
    pub fn null_space(&self) -> (Vec<BitVec>, Vec<usize>) {
        let mut rows = self.dense_rows();
        let mut pivots: Vec<usize> = Vec::new();
        let mut rank = 0;
        for col in 0..self.cols {
            let Some(p) = (rank..rows.len()).find(|&i| rows[i].get(col)) else {
                continue;
            };
            rows.swap(rank, p);
            let pivot = rows[rank].clone();
            for (i, row) in rows.iter_mut().enumerate() {
                if i != rank && row.get(col) {
                    *row ^= &pivot;
                }
            }
            pivots.push(col);
            rank += 1;
            if rank == rows.len() {
                break;
            }
        }
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        let basis = free
            .iter()
            .map(|&f| {
                let mut v = BitVec::zeros(self.cols);
                v.set(f, true);
                for (r, &pc) in pivots.iter().enumerate() {
                    if rows[r].get(f) {
                        v.set(pc, true);
                    }
                }
                v
            })
            .collect();
        (basis, free)
    }

    /// Plain-text form: a `rows cols` header, then one line per row with its
    /// sorted column indices separated by spaces (empty line for a zero row).
    pub fn to_text(&self) -> String {
        let mut s = format!("{} {}\n", self.rows, self.cols);
        for support in &self.row_supports {
            let line: Vec<String> = support.iter().map(usize::to_string).collect();
            s.push_str(&line.join(" "));
            s.push('\n');
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self, Gf2Error> {
        let mut lines = text.split('\n');
        let header = lines.next().ok_or(Gf2Error::Parse { line: 1, msg: "missing header".into() })?;
        let dims: Vec<&str> = header.split_whitespace().collect();
        let parse = |tok: &str, line: usize| {
            tok.parse::<usize>().map_err(|e| Gf2Error::Parse { line, msg: format!("{tok:?}: {e}") })
        };
        if dims.len() != 2 {
            return Err(Gf2Error::Parse { line: 1, msg: format!("expected `rows cols`, got {header:?}") });
        }
        let (rows, cols) = (parse(dims[0], 1)?, parse(dims[1], 1)?);
        let mut supports = Vec::with_capacity(rows);
        for r in 0..rows {
            let line = lines
                .next()
                .ok_or_else(|| Gf2Error::Parse { line: r + 2, msg: format!("expected {rows} rows, found {r}") })?;
            let support = line.split_whitespace().map(|t| parse(t, r + 2)).collect::<Result<Vec<_>, _>>()?;
            supports.push(support);
        }
        if lines.any(|l| !l.trim().is_empty()) {
            return Err(Gf2Error::Parse { line: rows + 2, msg: "trailing content after last row".into() });
        }
        Self::from_row_supports(rows, cols, supports)
    }
}
