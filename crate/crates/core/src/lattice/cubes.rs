//! Unit cubes of the subdivision of `[-L, L]^d` meeting a hyperplane
//! through the origin.
//!
//! Cubes are closed, so a cube that only touches the hyperplane along a
//! face, edge or corner is counted.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HyperplaneCubeCount {
    pub count: u64,
    /// `(d + 1) (2L)^{d - 1}`.
    pub bound: u64,
}

impl HyperplaneCubeCount {
    pub fn within_bound(&self) -> bool {
        self.count <= self.bound
    }
}

/// Clears denominators of a rational normal vector.
pub fn integer_normal(normal: &[BigRational]) -> Result<Vec<i128>> {
    let lcm = normal.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    normal
        .iter()
        .map(|x| {
            (x.numer() * (&lcm / x.denom()))
                .to_i128()
                .filter(|v| v.unsigned_abs() < 1 << 90)
                .ok_or_else(|| Error::input("normal vector entries too large"))
        })
        .collect()
}

pub fn cube_bound(dim: usize, half_width: u64) -> u64 {
    (dim as u64 + 1) * (2 * half_width).pow(dim as u32 - 1)
}

/// Exact number of closed unit cubes `c + [0, 1]^d`, `c in {-L..L-1}^d`,
/// meeting `{x : <x, normal> = 0}`.
pub fn hyperplane_cube_count(dim: usize, half_width: u64, normal: &[BigRational]) -> Result<HyperplaneCubeCount> {
    if !(2..=5).contains(&dim) {
        return Err(Error::input("dimension must lie in 2..=5"));
    }
    if normal.len() != dim {
        return Err(Error::input(format!("normal has length {}, expected {dim}", normal.len())));
    }
    if half_width == 0 || half_width > 64 {
        return Err(Error::input("L must lie in 1..=64"));
    }
    if normal.iter().all(Zero::is_zero) {
        return Err(Error::input("normal vector must be nonzero"));
    }
    let n = integer_normal(normal)?;
    // A cube with lowest corner c meets the plane iff
    // -sum(positive n_i) <= <c, n> <= -sum(negative n_i).
    let lo: i128 = -n.iter().filter(|&&x| x > 0).sum::<i128>();
    let hi: i128 = -n.iter().filter(|&&x| x < 0).sum::<i128>();
    let l = half_width as i128;
    let pivot = (0..dim).max_by_key(|&i| n[i].unsigned_abs()).unwrap_or(0);
    let p = n[pivot];
    let others: Vec<i128> = (0..dim).filter(|&i| i != pivot).map(|i| n[i]).collect();

    let mut count = 0u64;
    let mut c = vec![-l; dim - 1];
    loop {
        let s: i128 = c.iter().zip(&others).map(|(a, b)| a * b).sum();
        // Count t in [-L, L-1] with lo <= s + t p <= hi; p != 0.
        let (a, b) = (lo - s, hi - s);
        let (t_lo, t_hi) = if p > 0 {
            (a.div_ceil_i(p), b.div_euclid(p))
        } else {
            (b.div_ceil_neg(p), a.div_floor_neg(p))
        };
        let t_lo = t_lo.max(-l);
        let t_hi = t_hi.min(l - 1);
        if t_hi >= t_lo {
            count += (t_hi - t_lo + 1) as u64;
        }
        let mut i = 0;
        loop {
            if i == dim - 1 {
                return Ok(HyperplaneCubeCount {
                    count,
                    bound: cube_bound(dim, half_width),
                });
            }
            if c[i] < l - 1 {
                c[i] += 1;
                break;
            }
            c[i] = -l;
            i += 1;
        }
    }
}

trait DivExt {
    fn div_ceil_i(self, d: i128) -> i128;
    fn div_ceil_neg(self, d: i128) -> i128;
    fn div_floor_neg(self, d: i128) -> i128;
}

impl DivExt for i128 {
    /// `ceil(self / d)` for `d > 0`.
    fn div_ceil_i(self, d: i128) -> i128 {
        -(-self).div_euclid(d)
    }
    /// `ceil(self / d)` for `d < 0`.
    fn div_ceil_neg(self, d: i128) -> i128 {
        (-self).div_ceil_i(-d)
    }
    /// `floor(self / d)` for `d < 0`.
    fn div_floor_neg(self, d: i128) -> i128 {
        (-self).div_euclid(-d)
    }
}
