//! Dense matrices over GF(2^b), Cauchy generators and erasure decoding.
//!
//! Codewords are handled block-wise: a message is `k` blocks of equal
//! length and the generator acts position by position, so row `i` of the
//! codeword is `sum_j G[i][j] * M_j`.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::field::{Field, FieldError, Symbol};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CodeError {
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("Cauchy matrix needs {needed} distinct points but GF(2^{bits}) has {available}")]
    FieldTooSmall { needed: u128, available: u128, bits: u32 },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("matrix is singular")]
    Singular,
    #[error("{survivors} surviving rows cannot recover {needed} message blocks")]
    TooManyErasures { survivors: usize, needed: usize },
    #[error("surviving rows are inconsistent with any codeword")]
    Inconsistent,
    #[error("evaluation points collide: x_i + y_j = 0 at ({0}, {1})")]
    CollidingPoints(usize, usize),
}

/// Row-major matrix of field symbols.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<Symbol>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1);
        }
        m
    }

    pub fn from_rows(rows: &[Vec<Symbol>]) -> Result<Self, CodeError> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(CodeError::Dimension("ragged rows".into()));
        }
        Ok(Self {
            rows: rows.len(),
            cols,
            data: rows.concat(),
        })
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<Symbol>) -> Result<Self, CodeError> {
        if data.len() != rows * cols {
            return Err(CodeError::Dimension(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> Symbol {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: Symbol) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[Symbol] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<Symbol>> {
        (0..self.rows).map(|r| self.row(r).to_vec()).collect()
    }

    pub fn select_rows(&self, idx: &[usize]) -> Self {
        let mut data = Vec::with_capacity(idx.len() * self.cols);
        for &r in idx {
            data.extend_from_slice(self.row(r));
        }
        Self {
            rows: idx.len(),
            cols: self.cols,
            data,
        }
    }

    pub fn select_cols(&self, idx: &[usize]) -> Self {
        let mut m = Self::zeros(self.rows, idx.len());
        for r in 0..self.rows {
            for (j, &c) in idx.iter().enumerate() {
                m.set(r, j, self.get(r, c));
            }
        }
        m
    }

    /// Stack `other` below `self`.
    pub fn vstack(&self, other: &Self) -> Result<Self, CodeError> {
        if self.cols != other.cols {
            return Err(CodeError::Dimension(format!(
                "cannot stack {} columns on {}",
                other.cols, self.cols
            )));
        }
        let mut data = self.data.clone();
        data.extend_from_slice(&other.data);
        Ok(Self {
            rows: self.rows + other.rows,
            cols: self.cols,
            data,
        })
    }

    pub fn mul_vec(&self, f: &Field, v: &[Symbol]) -> Result<Vec<Symbol>, CodeError> {
        if v.len() != self.cols {
            return Err(CodeError::Dimension(format!(
                "vector of length {} against {} columns",
                v.len(),
                self.cols
            )));
        }
        Ok((0..self.rows).map(|r| f.dot(self.row(r), v)).collect())
    }

    pub fn mul(&self, f: &Field, other: &Self) -> Result<Self, CodeError> {
        if self.cols != other.rows {
            return Err(CodeError::Dimension(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(r, k);
                if a == 0 {
                    continue;
                }
                for c in 0..other.cols {
                    let v = out.get(r, c) ^ f.mul(a, other.get(k, c));
                    out.set(r, c, v);
                }
            }
        }
        Ok(out)
    }

    /// Apply the matrix to a list of equal-length blocks.
    pub fn mul_blocks(&self, f: &Field, blocks: &[Vec<Symbol>]) -> Result<Vec<Vec<Symbol>>, CodeError> {
        if blocks.len() != self.cols {
            return Err(CodeError::Dimension(format!(
                "{} blocks against {} columns",
                blocks.len(),
                self.cols
            )));
        }
        let len = blocks.first().map_or(0, Vec::len);
        if blocks.iter().any(|b| b.len() != len) {
            return Err(CodeError::Dimension("blocks differ in length".into()));
        }
        let mut out = vec![vec![0; len]; self.rows];
        for (r, row_out) in out.iter_mut().enumerate() {
            for (c, block) in blocks.iter().enumerate() {
                let g = self.get(r, c);
                if g == 0 {
                    continue;
                }
                for (o, &s) in row_out.iter_mut().zip(block) {
                    *o ^= f.mul(g, s);
                }
            }
        }
        Ok(out)
    }

    /// Row-reduce a copy; returns the rank.
    pub fn rank(&self, f: &Field) -> usize {
        let mut m = self.clone();
        let mut rank = 0;
        for c in 0..m.cols {
            let Some(p) = (rank..m.rows).find(|&r| m.get(r, c) != 0) else {
                continue;
            };
            m.swap_rows(rank, p);
            let inv = f.inv(m.get(rank, c)).expect("pivot is nonzero");
            m.scale_row(f, rank, inv);
            for r in 0..m.rows {
                if r != rank && m.get(r, c) != 0 {
                    let factor = m.get(r, c);
                    m.axpy_row(f, r, rank, factor);
                }
            }
            rank += 1;
            if rank == m.rows {
                break;
            }
        }
        rank
    }

    pub fn inverse(&self, f: &Field) -> Result<Self, CodeError> {
        if self.rows != self.cols {
            return Err(CodeError::Dimension(format!(
                "cannot invert a {}x{} matrix",
                self.rows, self.cols
            )));
        }
        let n = self.rows;
        let mut a = self.clone();
        let mut inv = Self::identity(n);
        for c in 0..n {
            let p = (c..n).find(|&r| a.get(r, c) != 0).ok_or(CodeError::Singular)?;
            a.swap_rows(c, p);
            inv.swap_rows(c, p);
            let s = f.inv(a.get(c, c))?;
            a.scale_row(f, c, s);
            inv.scale_row(f, c, s);
            for r in 0..n {
                let factor = a.get(r, c);
                if r != c && factor != 0 {
                    a.axpy_row(f, r, c, factor);
                    inv.axpy_row(f, r, c, factor);
                }
            }
        }
        Ok(inv)
    }

    pub fn is_invertible(&self, f: &Field) -> bool {
        self.rows == self.cols && self.rank(f) == self.rows
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a != b {
            for c in 0..self.cols {
                self.data.swap(a * self.cols + c, b * self.cols + c);
            }
        }
    }

    fn scale_row(&mut self, f: &Field, r: usize, s: Symbol) {
        for c in 0..self.cols {
            let v = f.mul(self.get(r, c), s);
            self.set(r, c, v);
        }
    }

    /// row[dst] -= factor * row[src]
    fn axpy_row(&mut self, f: &Field, dst: usize, src: usize, factor: Symbol) {
        for c in 0..self.cols {
            let v = self.get(dst, c) ^ f.mul(factor, self.get(src, c));
            self.set(dst, c, v);
        }
    }
}

/// A Cauchy matrix `G[i][j] = 1 / (x_i + y_j)` together with its points.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CauchyMatrix {
    pub x: Vec<Symbol>,
    pub y: Vec<Symbol>,
    pub matrix: Matrix,
}

impl CauchyMatrix {
    pub fn from_points(f: &Field, x: &[Symbol], y: &[Symbol]) -> Result<Self, CodeError> {
        let mut m = Matrix::zeros(x.len(), y.len());
        for (i, &xi) in x.iter().enumerate() {
            for (j, &yj) in y.iter().enumerate() {
                let s = f.add(f.check(xi)?, f.check(yj)?);
                if s == 0 {
                    return Err(CodeError::CollidingPoints(i, j));
                }
                m.set(i, j, f.inv(s)?);
            }
        }
        Ok(Self {
            x: x.to_vec(),
            y: y.to_vec(),
            matrix: m,
        })
    }
}

/// Cauchy matrix on the points `seed, seed+1, ...` (mod 2^b): the first
/// `rows` points are the x's, the next `cols` the y's.
pub fn build_cauchy(f: &Field, rows: usize, cols: usize, seed: u64) -> Result<CauchyMatrix, CodeError> {
    let needed = rows as u128 + cols as u128;
    if needed > f.order() {
        return Err(CodeError::FieldTooSmall {
            needed,
            available: f.order(),
            bits: f.bits(),
        });
    }
    let points: Vec<Symbol> = (0..rows + cols)
        .map(|i| seed.wrapping_add(i as u64) & f.mask())
        .collect();
    CauchyMatrix::from_points(f, &points[..rows], &points[rows..])
}

/// Indices of erased codeword rows.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErasurePattern {
    pub erased: BTreeSet<usize>,
}

impl ErasurePattern {
    pub fn new<I: IntoIterator<Item = usize>>(erased: I) -> Self {
        Self {
            erased: erased.into_iter().collect(),
        }
    }

    pub fn survivors(&self, n: usize) -> Vec<usize> {
        (0..n).filter(|i| !self.erased.contains(i)).collect()
    }
}

/// `G * M`, block-wise.
pub fn mds_encode(f: &Field, message: &[Vec<Symbol>], g: &Matrix) -> Result<Vec<Vec<Symbol>>, CodeError> {
    g.mul_blocks(f, message)
}

/// Recover the message from the non-erased rows of a received codeword.
///
/// The first `k` survivors are inverted; any further survivors must agree
/// with the re-encoded message.
pub fn erasure_decode(
    f: &Field,
    received: &[Vec<Symbol>],
    pattern: &ErasurePattern,
    g: &Matrix,
) -> Result<Vec<Vec<Symbol>>, CodeError> {
    if received.len() != g.rows() {
        return Err(CodeError::Dimension(format!(
            "{} received rows for a {}-row generator",
            received.len(),
            g.rows()
        )));
    }
    let k = g.cols();
    let survivors = pattern.survivors(g.rows());
    if survivors.len() < k {
        return Err(CodeError::TooManyErasures {
            survivors: survivors.len(),
            needed: k,
        });
    }
    let (basis, rest) = survivors.split_at(k);
    let inv = g.select_rows(basis).inverse(f)?;
    let rows: Vec<Vec<Symbol>> = basis.iter().map(|&i| received[i].clone()).collect();
    let message = inv.mul_blocks(f, &rows)?;
    if !rest.is_empty() {
        let check = g.select_rows(rest).mul_blocks(f, &message)?;
        if rest.iter().zip(&check).any(|(&i, c)| &received[i] != c) {
            return Err(CodeError::Inconsistent);
        }
    }
    Ok(message)
}

/// Stack `g_sub` on top of unit rows selecting `pinned` columns.
pub fn augmented_system(g_sub: &Matrix, pinned: &[usize]) -> Result<Matrix, CodeError> {
    let mut sel = Matrix::zeros(pinned.len(), g_sub.cols());
    for (r, &c) in pinned.iter().enumerate() {
        if c >= g_sub.cols() {
            return Err(CodeError::Dimension(format!("pinned column {c} out of range")));
        }
        sel.set(r, c, 1);
    }
    g_sub.vstack(&sel)
}

/// Solve `[g_sub; selectors] * U = [observed; pinned values]` for the
/// unknown blocks `U`, where each pinned entry fixes one unknown.
pub fn solve_augmented(
    f: &Field,
    g_sub: &Matrix,
    observed: &[Vec<Symbol>],
    pinned: &[(usize, Vec<Symbol>)],
) -> Result<Vec<Vec<Symbol>>, CodeError> {
    if observed.len() != g_sub.rows() {
        return Err(CodeError::Dimension(format!(
            "{} observations for {} rows",
            observed.len(),
            g_sub.rows()
        )));
    }
    let cols: Vec<usize> = pinned.iter().map(|(c, _)| *c).collect();
    let a = augmented_system(g_sub, &cols)?;
    if a.rows() != a.cols() {
        return Err(CodeError::Dimension(format!(
            "augmented system is {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    let rhs: Vec<Vec<Symbol>> = observed
        .iter()
        .cloned()
        .chain(pinned.iter().map(|(_, v)| v.clone()))
        .collect();
    a.inverse(f)?.mul_blocks(f, &rhs)
}
