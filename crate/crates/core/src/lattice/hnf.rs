//! Row-style Hermite normal form.
//!
//! The form is lower triangular in the staircase sense: zero rows come
//! first, the pivot of each nonzero row lies strictly to the right of the
//! pivot of the row above it, every entry right of a pivot is zero, pivots
//! are positive, and entries below a pivot are reduced into `[0, pivot)`.
//! For a full-rank square input this is the familiar lower-triangular form
//! with positive diagonal.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};

use super::matrix::IntMatrix;

/// Hermite form together with the unimodular transform producing it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HermiteDecomposition {
    pub form: IntMatrix,
    /// `transform * input == form`.
    pub transform: IntMatrix,
    /// `(row, column)` of each pivot, by increasing row.
    pub pivots: Vec<(usize, usize)>,
}

impl HermiteDecomposition {
    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    /// Number of leading zero rows.
    pub fn zero_rows(&self) -> usize {
        self.form.nrows() - self.pivots.len()
    }

    /// The nonzero rows of the form, a basis of the row lattice.
    pub fn basis(&self) -> IntMatrix {
        let rows = self.form.rows()[self.zero_rows()..].to_vec();
        let cols = self.form.ncols();
        if rows.is_empty() {
            return IntMatrix::zeros(0, cols);
        }
        IntMatrix::from_rows(rows).expect("rows of a matrix")
    }
}

fn sub_multiple(target: &mut [BigInt], source: &[BigInt], q: &BigInt) {
    if q.is_zero() {
        return;
    }
    for (t, s) in target.iter_mut().zip(source) {
        if !s.is_zero() {
            *t -= q * s;
        }
    }
}

fn negate(row: &mut [BigInt]) {
    for x in row {
        *x = -&*x;
    }
}

/// Computes the Hermite form of `matrix` by unimodular row operations.
pub fn hnf(matrix: &IntMatrix) -> HermiteDecomposition {
    let m = matrix.nrows();
    let n = matrix.ncols();
    let mut a = matrix.clone().into_rows();
    let mut u = IntMatrix::identity(m).into_rows();
    let mut pivots_rev = Vec::new();
    // Rows `0..top` are still unplaced.
    let mut top = m;
    for col in (0..n).rev() {
        if top == 0 {
            break;
        }
        // Euclid across the unplaced rows until one nonzero entry remains.
        loop {
            let mut best: Option<usize> = None;
            for i in 0..top {
                if !a[i][col].is_zero() && best.is_none_or(|b| a[i][col].abs() < a[b][col].abs()) {
                    best = Some(i);
                }
            }
            let Some(p) = best else { break };
            let mut done = true;
            for i in 0..top {
                if i == p || a[i][col].is_zero() {
                    continue;
                }
                let q = a[i][col].div_floor(&a[p][col]);
                let (pa, pu) = (a[p].clone(), u[p].clone());
                sub_multiple(&mut a[i], &pa, &q);
                sub_multiple(&mut u[i], &pu, &q);
                if !a[i][col].is_zero() {
                    done = false;
                }
            }
            if done {
                a.swap(p, top - 1);
                u.swap(p, top - 1);
                top -= 1;
                if a[top][col].is_negative() {
                    negate(&mut a[top]);
                    negate(&mut u[top]);
                }
                pivots_rev.push((top, col));
                break;
            }
        }
    }
    // Reduce entries below each pivot, rightmost pivot first.
    for &(row, col) in &pivots_rev {
        for i in row + 1..m {
            if a[i][col].is_zero() {
                continue;
            }
            let q = a[i][col].div_floor(&a[row][col]);
            let (pa, pu) = (a[row].clone(), u[row].clone());
            sub_multiple(&mut a[i], &pa, &q);
            sub_multiple(&mut u[i], &pu, &q);
        }
    }
    pivots_rev.reverse();
    HermiteDecomposition {
        form: IntMatrix::from_rows(a).unwrap_or_else(|_| IntMatrix::zeros(m, n)),
        transform: IntMatrix::from_rows(u).unwrap_or_else(|_| IntMatrix::identity(m)),
        pivots: pivots_rev,
    }
}

/// Canonical basis of the lattice spanned by the rows of `matrix`.
pub fn hnf_basis(matrix: &IntMatrix) -> IntMatrix {
    hnf(matrix).basis()
}

/// Whether `v` lies in the row lattice of a basis in Hermite form with
/// full column rank (square, lower triangular).
pub fn in_lattice(form: &IntMatrix, v: &[BigInt]) -> bool {
    let n = form.ncols();
    debug_assert_eq!(form.nrows(), n);
    let mut r: Vec<BigInt> = v.to_vec();
    for j in (0..n).rev() {
        let p = form.get(j, j);
        let (q, rem) = r[j].div_rem(p);
        if !rem.is_zero() {
            return false;
        }
        sub_multiple(&mut r, form.row(j), &q);
    }
    r.iter().all(Zero::is_zero)
}
