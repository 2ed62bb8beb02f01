use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Dense integer matrix, stored as rows.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct IntMatrix {
    rows: Vec<Vec<BigInt>>,
    cols: usize,
}

impl fmt::Debug for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, row) in self.rows.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            let items: Vec<String> = row.iter().map(|x| x.to_string()).collect();
            write!(f, "[{}]", items.join(", "))?;
        }
        f.write_str("]")
    }
}

impl IntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMatrix {
            rows: vec![vec![BigInt::zero(); cols]; rows],
            cols,
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.rows[i][i] = BigInt::one();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<BigInt>>) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::input("ragged matrix"));
        }
        Ok(IntMatrix { rows, cols })
    }

    /// Builds from small-integer rows; panics on ragged input.
    pub fn from_i64(rows: &[Vec<i64>]) -> Self {
        let rows: Vec<Vec<BigInt>> = rows.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect();
        Self::from_rows(rows).expect("rows of equal length")
    }

    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn rows(&self) -> &[Vec<BigInt>] {
        &self.rows
    }

    pub fn row(&self, i: usize) -> &[BigInt] {
        &self.rows[i]
    }

    pub fn get(&self, i: usize, j: usize) -> &BigInt {
        &self.rows[i][j]
    }


    pub fn into_rows(self) -> Vec<Vec<BigInt>> {
        self.rows
    }

    pub fn to_i64_rows(&self) -> Option<Vec<Vec<i64>>> {
        self.rows.iter().map(|r| r.iter().map(|x| x.to_i64()).collect()).collect()
    }

    pub fn to_i128_rows(&self) -> Option<Vec<Vec<i128>>> {
        self.rows.iter().map(|r| r.iter().map(|x| x.to_i128()).collect()).collect()
    }

    pub fn mul(&self, other: &IntMatrix) -> Result<IntMatrix> {
        if self.cols != other.nrows() {
            return Err(Error::input("dimension mismatch in matrix product"));
        }
        let mut out = IntMatrix::zeros(self.nrows(), other.cols);
        for (i, row) in self.rows.iter().enumerate() {
            for (k, a) in row.iter().enumerate() {
                if a.is_zero() {
                    continue;
                }
                for (j, b) in other.rows[k].iter().enumerate() {
                    out.rows[i][j] += a * b;
                }
            }
        }
        Ok(out)
    }

    /// Matrix with columns in reverse order.
    pub fn reverse_columns(&self) -> IntMatrix {
        IntMatrix {
            rows: self.rows.iter().map(|r| r.iter().rev().cloned().collect()).collect(),
            cols: self.cols,
        }
    }

    /// Stack `self` on top of `other`.
    pub fn vstack(&self, other: &IntMatrix) -> Result<IntMatrix> {
        if self.nrows() > 0 && other.nrows() > 0 && self.cols != other.cols {
            return Err(Error::input("column mismatch in vstack"));
        }
        let mut rows = self.rows.clone();
        rows.extend(other.rows.iter().cloned());
        let cols = if self.nrows() > 0 { self.cols } else { other.cols };
        Ok(IntMatrix { rows, cols })
    }

    /// Determinant by fraction-free (Bareiss) elimination.
    pub fn determinant(&self) -> Result<BigInt> {
        let n = self.nrows();
        if n != self.cols {
            return Err(Error::input("determinant of a non-square matrix"));
        }
        if n == 0 {
            return Ok(BigInt::one());
        }
        let mut a = self.rows.clone();
        let mut sign = BigInt::one();
        let mut prev = BigInt::one();
        for k in 0..n - 1 {
            if a[k][k].is_zero() {
                match (k + 1..n).find(|&i| !a[i][k].is_zero()) {
                    Some(i) => {
                        a.swap(i, k);
                        sign = -sign;
                    }
                    None => return Ok(BigInt::zero()),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = (&a[i][j] * &a[k][k] - &a[i][k] * &a[k][j]) / &prev;
                    a[i][j] = v;
                }
            }
            prev = a[k][k].clone();
        }
        Ok(sign * &a[n - 1][n - 1])
    }

    /// Rank over the rationals, by fraction-free elimination.
    pub fn rank(&self) -> usize {
        rank_of_rows(self.rows.clone())
    }

    /// Squared Euclidean norm of each row.
    pub fn row_norms_squared(&self) -> Vec<BigInt> {
        self.rows.iter().map(|r| r.iter().map(|x| x * x).sum()).collect()
    }

    /// Largest Euclidean row norm, as a float (for reporting).
    pub fn max_row_norm(&self) -> f64 {
        self.row_norms_squared()
            .iter()
            .map(|n| n.to_f64().unwrap_or(f64::INFINITY).sqrt())
            .fold(0.0, f64::max)
    }
}

pub(crate) fn rank_of_rows(mut a: Vec<Vec<BigInt>>) -> usize {
    let rows = a.len();
    let cols = a.first().map_or(0, Vec::len);
    let mut rank = 0;
    for col in 0..cols {
        let Some(p) = (rank..rows).find(|&i| !a[i][col].is_zero()) else {
            continue;
        };
        a.swap(rank, p);
        for i in rank + 1..rows {
            if a[i][col].is_zero() {
                continue;
            }
            let g = a[rank][col].gcd(&a[i][col]);
            let fi = &a[rank][col] / &g;
            let fr = &a[i][col] / &g;
            for j in col..cols {
                let v = &a[i][j] * &fi - &a[rank][j] * &fr;
                a[i][j] = v;
            }
        }
        rank += 1;
        if rank == rows {
            break;
        }
    }
    rank
}

/// Incrementally tracks the span of accepted integer vectors and decides
/// whether a new vector raises the rank.
#[derive(Debug, Clone, Default)]
pub(crate) struct RankBuilder {
    /// Echelon rows with their pivot columns.
    echelon: Vec<(usize, Vec<BigInt>)>,
}

impl RankBuilder {
    #[cfg(test)]
    pub fn rank(&self) -> usize {
        self.echelon.len()
    }

    /// Adds `v` if it is independent of the vectors accepted so far.
    pub fn try_add(&mut self, v: &[BigInt]) -> bool {
        let mut w: Vec<BigInt> = v.to_vec();
        for (pivot, row) in &self.echelon {
            if w[*pivot].is_zero() {
                continue;
            }
            let g = row[*pivot].gcd(&w[*pivot]);
            let fr = &row[*pivot] / &g;
            let fw = &w[*pivot] / &g;
            for j in 0..w.len() {
                let val = &w[j] * &fr - &row[j] * &fw;
                w[j] = val;
            }
        }
        match w.iter().position(|x| !x.is_zero()) {
            Some(pivot) => {
                let g = w.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
                if g > BigInt::one() {
                    for x in &mut w {
                        *x /= &g;
                    }
                }
                if w[pivot].is_negative() {
                    for x in &mut w {
                        *x = -&*x;
                    }
                }
                self.echelon.push((pivot, w));
                // Keep later eliminations consistent: rows must be reduced in
                // the order they were added, which the loop above respects.
                true
            }
            None => false,
        }
    }
}
