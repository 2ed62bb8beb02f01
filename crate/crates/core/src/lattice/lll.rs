//! LLL reduction in exact integer arithmetic.
//!
//! Gram-Schmidt data is kept as the integral quantities `d_i` (Gram
//! determinants of the leading sublattices) and `lambda_ij = d_j mu_ij`, so
//! every step is an exact integer update and no rational is ever
//! normalised.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::matrix::IntMatrix;
use crate::error::{Error, Result};

/// Default Lovasz parameter, `99/100`.
pub fn default_delta() -> BigRational {
    BigRational::new(BigInt::from(99), BigInt::from(100))
}

fn dot(a: &[BigInt], b: &[BigInt]) -> BigInt {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Nearest integer to `num / den` for `den > 0`, halves rounded up.
fn round_div(num: &BigInt, den: &BigInt) -> BigInt {
    let two = BigInt::from(2);
    (num * &two + den).div_floor(&(den * &two))
}

struct Reducer {
    b: Vec<Vec<BigInt>>,
    /// `d[0] = 1`, `d[i + 1]` for the first `i + 1` vectors.
    d: Vec<BigInt>,
    lambda: Vec<Vec<BigInt>>,
}

impl Reducer {
    // Indices below are 0-based: vector `k` pairs with `d[k + 1]`.

    fn size_reduce(&mut self, k: usize, l: usize) {
        let two_lambda: BigInt = &self.lambda[k][l] * BigInt::from(2);
        if two_lambda.abs() <= self.d[l + 1] {
            return;
        }
        let q = round_div(&self.lambda[k][l], &self.d[l + 1]);
        let bl = self.b[l].clone();
        for (x, y) in self.b[k].iter_mut().zip(&bl) {
            *x -= &q * y;
        }
        let dl = self.d[l + 1].clone();
        self.lambda[k][l] -= &q * dl;
        for i in 0..l {
            let t = &q * &self.lambda[l][i];
            self.lambda[k][i] -= t;
        }
    }

    fn swap(&mut self, k: usize, kmax: usize) {
        self.b.swap(k, k - 1);
        for j in 0..k.saturating_sub(1) {
            let t = self.lambda[k][j].clone();
            self.lambda[k][j] = std::mem::replace(&mut self.lambda[k - 1][j], t);
        }
        let lam = self.lambda[k][k - 1].clone();
        let b_new = (&self.d[k - 1] * &self.d[k + 1] + &lam * &lam) / &self.d[k];
        for i in k + 1..=kmax {
            let t = self.lambda[i][k].clone();
            self.lambda[i][k] = (&self.d[k + 1] * &self.lambda[i][k - 1] - &lam * &t) / &self.d[k];
            self.lambda[i][k - 1] = (&b_new * &t + &lam * &self.lambda[i][k]) / &self.d[k + 1];
        }
        self.d[k] = b_new;
    }
}

/// LLL-reduces the rows of `basis` with Lovasz parameter `delta` in `(1/4, 1)`.
pub fn lll_reduce(basis: &IntMatrix, delta: &BigRational) -> Result<IntMatrix> {
    let quarter = BigRational::new(BigInt::one(), BigInt::from(4));
    if *delta <= quarter || *delta >= BigRational::one() {
        return Err(Error::input("delta must lie strictly between 1/4 and 1"));
    }
    let n = basis.nrows();
    if n == 0 {
        return Ok(basis.clone());
    }
    let (p, q) = (delta.numer().clone(), delta.denom().clone());
    let mut r = Reducer {
        b: basis.rows().to_vec(),
        d: vec![BigInt::zero(); n + 1],
        lambda: vec![vec![BigInt::zero(); n]; n],
    };
    r.d[0] = BigInt::one();
    r.d[1] = dot(&r.b[0], &r.b[0]);
    if r.d[1].is_zero() {
        return Err(Error::input("basis rows are linearly dependent"));
    }
    let mut k = 1;
    let mut kmax = 0;
    while k < n {
        if k > kmax {
            kmax = k;
            for j in 0..=k {
                let mut u = dot(&r.b[k], &r.b[j]);
                for i in 0..j {
                    u = (&r.d[i + 1] * u - &r.lambda[k][i] * &r.lambda[j][i]) / &r.d[i];
                }
                if j < k {
                    r.lambda[k][j] = u;
                } else {
                    if u.is_zero() {
                        return Err(Error::input("basis rows are linearly dependent"));
                    }
                    r.d[k + 1] = u;
                }
            }
        }
        r.size_reduce(k, k - 1);
        let lam = &r.lambda[k][k - 1];
        let lhs = &q * (&r.d[k + 1] * &r.d[k - 1] + lam * lam);
        let rhs = &p * &r.d[k] * &r.d[k];
        if lhs < rhs {
            r.swap(k, kmax);
            k = (k - 1).max(1);
        } else {
            for l in (0..k - 1).rev() {
                r.size_reduce(k, l);
            }
            k += 1;
        }
    }
    IntMatrix::from_rows(r.b)
}

/// Checks size reduction and the Lovasz condition with exact rational
/// Gram-Schmidt, computed from scratch.
pub fn is_lll_reduced(basis: &IntMatrix, delta: &BigRational) -> bool {
    let n = basis.nrows();
    let to_q = |x: &BigInt| BigRational::from_integer(x.clone());
    let rows: Vec<Vec<BigRational>> = basis.rows().iter().map(|r| r.iter().map(to_q).collect()).collect();
    let mut star: Vec<Vec<BigRational>> = Vec::with_capacity(n);
    let mut norms: Vec<BigRational> = Vec::with_capacity(n);
    let mut mu = vec![vec![BigRational::zero(); n]; n];
    let qdot = |a: &[BigRational], b: &[BigRational]| -> BigRational { a.iter().zip(b).map(|(x, y)| x * y).sum() };
    for i in 0..n {
        let mut v = rows[i].clone();
        for j in 0..i {
            mu[i][j] = qdot(&rows[i], &star[j]) / &norms[j];
            for (x, y) in v.iter_mut().zip(&star[j]) {
                *x -= &mu[i][j] * y;
            }
        }
        let nv = qdot(&v, &v);
        if nv.is_zero() {
            return false;
        }
        star.push(v);
        norms.push(nv);
    }
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    for i in 0..n {
        for j in 0..i {
            if mu[i][j].abs() > half {
                return false;
            }
        }
    }
    (1..n).all(|k| norms[k] >= (delta - &mu[k][k - 1] * &mu[k][k - 1]) * &norms[k - 1])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::hnf::hnf_basis;
    use proptest::prelude::*;

    #[test]
    fn identity_is_fixed() {
        let id = IntMatrix::identity(4);
        assert_eq!(lll_reduce(&id, &default_delta()).unwrap(), id);
    }

    #[test]
    fn skewed_basis_shrinks() {
        let m = IntMatrix::from_i64(&[vec![1, 1_000_000], vec![0, 1]]);
        let r = lll_reduce(&m, &default_delta()).unwrap();
        assert!(r.max_row_norm() <= m.max_row_norm());
        assert!(is_lll_reduced(&r, &default_delta()));
        assert_eq!(hnf_basis(&r), hnf_basis(&m));
        assert!(r.max_row_norm() <= 1.0 + 1e-12);
    }

    #[test]
    fn rejects_bad_inputs() {
        let dep = IntMatrix::from_i64(&[vec![1, 2], vec![2, 4]]);
        assert!(matches!(lll_reduce(&dep, &default_delta()), Err(Error::Input(_))));
        let dep = IntMatrix::from_i64(&[vec![1, 2, 3], vec![0, 1, 1], vec![1, 3, 4]]);
        assert!(matches!(lll_reduce(&dep, &default_delta()), Err(Error::Input(_))));
        let id = IntMatrix::identity(2);
        let quarter = BigRational::new(BigInt::one(), BigInt::from(4));
        assert!(lll_reduce(&id, &quarter).is_err());
        assert!(lll_reduce(&id, &BigRational::one()).is_err());
    }

    #[test]
    fn classic_example() {
        let m = IntMatrix::from_i64(&[vec![1, 1, 1], vec![-1, 0, 2], vec![3, 5, 6]]);
        let r = lll_reduce(&m, &BigRational::new(BigInt::from(3), BigInt::from(4))).unwrap();
        assert_eq!(r, IntMatrix::from_i64(&[vec![0, 1, 0], vec![1, 0, 1], vec![-1, 0, 2]]));
    }

    proptest! {
        #[test]
        fn scrambled_diagonal_is_recovered(
            k in 2i64..1000,
            ops in proptest::collection::vec((0usize..4, 0usize..4, -5i64..=5), 1..30),
        ) {
            let mut rows: Vec<Vec<i64>> = (0..4).map(|i| (0..4).map(|j| i64::from(i == j)).collect()).collect();
            rows[3][3] = k;
            for (i, j, c) in ops {
                if i != j {
                    for col in 0..4 {
                        rows[i][col] += c * rows[j][col];
                    }
                }
            }
            let m = IntMatrix::from_i64(&rows);
            let r = lll_reduce(&m, &default_delta()).unwrap();
            prop_assert!(is_lll_reduced(&r, &default_delta()));
            prop_assert_eq!(hnf_basis(&r), hnf_basis(&m));
        }

        #[test]
        fn random_full_rank(entries in proptest::collection::vec(-50i64..=50, 16)) {
            let rows: Vec<Vec<i64>> = entries.chunks(4).map(|c| c.to_vec()).collect();
            let m = IntMatrix::from_i64(&rows);
            prop_assume!(m.rank() == 4);
            let r = lll_reduce(&m, &default_delta()).unwrap();
            prop_assert!(is_lll_reduced(&r, &default_delta()));
            prop_assert_eq!(hnf_basis(&r), hnf_basis(&m));
        }
    }
}
