//! Lattice points in the closed cube `[-H, H]^n`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::hnf::hnf_basis;
use super::matrix::{IntMatrix, RankBuilder};
use crate::error::{Error, Result};

/// Grid sizes up to this are scanned point by point; larger boxes are
/// enumerated along the triangular basis.
pub const GRID_SCAN_LIMIT: u128 = 100_000_000;

/// Default cap on the number of lattice points materialised.
pub const POINT_BUDGET: u64 = 20_000_000;

/// Number of lattice points in a cube together with the density ratio
/// `count * covolume / (2H + 1)^n`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CubeCountEstimate {
    pub half_width: u64,
    pub count: u128,
    #[serde(with = "crate::serde_util::rational")]
    pub theta: BigRational,
}

/// Full-rank lower-triangular basis in machine integers.
#[derive(Debug, Clone)]
pub(crate) struct Triangular {
    rows: Vec<Vec<i128>>,
}

impl Triangular {
    pub fn new(basis: &IntMatrix) -> Result<Self> {
        let form = hnf_basis(basis);
        let n = basis.ncols();
        if form.nrows() != n {
            return Err(Error::input("lattice basis is not full rank"));
        }
        let rows = form
            .to_i128_rows()
            .filter(|rows| rows.iter().flatten().all(|x| x.unsigned_abs() < 1 << 60))
            .ok_or_else(|| Error::resource("lattice entries", "more than 60 bits", "60 bits"))?;
        Ok(Triangular { rows })
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn covolume(&self) -> BigInt {
        self.rows.iter().enumerate().map(|(i, r)| BigInt::from(r[i])).product()
    }

    fn contains(&self, v: &[i128]) -> bool {
        let mut r = v.to_vec();
        for j in (0..self.dim()).rev() {
            let p = self.rows[j][j];
            if r[j] % p != 0 {
                return false;
            }
            let q = r[j] / p;
            for (x, y) in r.iter_mut().zip(&self.rows[j]).take(j + 1) {
                *x -= q * y;
            }
        }
        true
    }

    /// Visits every lattice point in the cube; `visit` returns `false` to stop.
    fn walk(&self, h: i128, level: usize, partial: &mut Vec<i128>, visit: &mut dyn FnMut(&[i128]) -> bool) -> bool {
        let row = &self.rows[level];
        let p = row[level];
        let lo = (-h - partial[level]).div_euclid(p) + i128::from((-h - partial[level]).rem_euclid(p) != 0);
        let hi = (h - partial[level]).div_euclid(p);
        for c in lo..=hi {
            for (x, y) in partial.iter_mut().zip(row).take(level + 1) {
                *x += c * y;
            }
            let keep_going = if level == 0 {
                visit(partial)
            } else {
                self.walk(h, level - 1, partial, visit)
            };
            for (x, y) in partial.iter_mut().zip(row).take(level + 1) {
                *x -= c * y;
            }
            if !keep_going {
                return false;
            }
        }
        true
    }

    /// Coefficient range of the last (outermost) basis vector.
    fn outer_range(&self, h: i128) -> std::ops::RangeInclusive<i128> {
        let n = self.dim();
        let p = self.rows[n - 1][n - 1];
        let lo = (-h).div_euclid(p) + i128::from((-h).rem_euclid(p) != 0);
        lo..=h.div_euclid(p)
    }

    fn walk_from_outer(&self, h: i128, c: i128, visit: &mut dyn FnMut(&[i128]) -> bool) -> bool {
        let n = self.dim();
        let mut partial: Vec<i128> = self.rows[n - 1].iter().map(|x| x * c).collect();
        if n == 1 {
            return visit(&partial);
        }
        self.walk(h, n - 2, &mut partial, visit)
    }
}

fn check_width(h: u64) -> Result<i128> {
    if h == 0 {
        return Err(Error::input("cube half-width must be positive"));
    }
    if h > 1 << 40 {
        return Err(Error::resource("cube half-width", h, 1u64 << 40));
    }
    Ok(h as i128)
}

fn grid_size(h: u64, dim: usize) -> Option<u128> {
    u128::from(2 * h + 1).checked_pow(dim as u32)
}

fn count_by_scan(tri: &Triangular, h: i128) -> u128 {
    let n = tri.dim();
    (-h..=h)
        .into_par_iter()
        .map(|first| {
            let mut v = vec![-h; n];
            v[n - 1] = first;
            let mut count = 0u128;
            loop {
                if tri.contains(&v) {
                    count += 1;
                }
                // Odometer over coordinates 0..n-1.
                let mut i = 0;
                loop {
                    if i + 1 >= n {
                        return count;
                    }
                    if v[i] < h {
                        v[i] += 1;
                        break;
                    }
                    v[i] = -h;
                    i += 1;
                }
            }
        })
        .sum()
}

fn count_by_walk(tri: &Triangular, h: i128) -> u128 {
    let ranges: Vec<i128> = tri.outer_range(h).collect();
    let mut parts: Vec<u128> = ranges
        .par_iter()
        .map(|&c| {
            let mut count = 0u128;
            tri.walk_from_outer(h, c, &mut |_| {
                count += 1;
                true
            });
            count
        })
        .collect();
    parts.drain(..).sum()
}

/// Exact number of points of the lattice spanned by the rows of `basis`
/// in `[-H, H]^n`.
pub fn count_cube_points(basis: &IntMatrix, half_width: u64) -> Result<CubeCountEstimate> {
    let h = check_width(half_width)?;
    let dim = basis.ncols();
    if dim == 0 {
        return Ok(CubeCountEstimate {
            half_width,
            count: 1,
            theta: BigRational::from_integer(BigInt::from(1)),
        });
    }
    let tri = Triangular::new(basis)?;
    let grid = grid_size(half_width, dim);
    let count = match grid {
        Some(g) if g <= GRID_SCAN_LIMIT => count_by_scan(&tri, h),
        _ => count_by_walk(&tri, h),
    };
    let volume = BigInt::from(2 * half_width + 1).pow(dim as u32);
    let theta = BigRational::new(BigInt::from(count) * tri.covolume(), volume);
    Ok(CubeCountEstimate {
        half_width,
        count,
        theta,
    })
}

/// All lattice points in the cube, or a resource error past `budget`.
pub fn cube_points(basis: &IntMatrix, half_width: u64, budget: u64) -> Result<Vec<Vec<i64>>> {
    let h = check_width(half_width)?;
    let dim = basis.ncols();
    if dim == 0 {
        return Ok(vec![Vec::new()]);
    }
    let tri = Triangular::new(basis)?;
    let mut out: Vec<Vec<i64>> = Vec::new();
    let mut exceeded = false;
    for c in tri.outer_range(h) {
        let finished = tri.walk_from_outer(h, c, &mut |v| {
            if out.len() as u64 >= budget {
                exceeded = true;
                return false;
            }
            out.push(v.iter().map(|&x| x as i64).collect());
            true
        });
        if !finished {
            break;
        }
    }
    if exceeded {
        return Err(Error::resource("cube enumeration", format!("more than {budget} points"), budget));
    }
    Ok(out)
}

/// `dim` linearly independent lattice vectors of max-norm at most `H1`,
/// chosen greedily by increasing Euclidean norm (ties: lexicographically
/// larger first). `None` when the cube does not contain that many.
pub fn extract_li_vectors(basis: &IntMatrix, half_width: u64, dim: usize, budget: u64) -> Result<Option<Vec<Vec<i64>>>> {
    if dim > basis.ncols() {
        return Ok(None);
    }
    let mut points = cube_points(basis, half_width, budget)?;
    points.retain(|v| v.iter().any(|&x| x != 0));
    let norm = |v: &[i64]| v.iter().map(|&x| i128::from(x) * i128::from(x)).sum::<i128>();
    points.sort_by(|a, b| norm(a).cmp(&norm(b)).then_with(|| b.cmp(a)));
    let mut builder = RankBuilder::default();
    let mut chosen = Vec::with_capacity(dim);
    for p in points {
        if chosen.len() == dim {
            break;
        }
        let big: Vec<BigInt> = p.iter().map(|&x| BigInt::from(x)).collect();
        if builder.try_add(&big) {
            chosen.push(p);
        }
    }
    Ok((chosen.len() == dim).then_some(chosen))
}

/// Result of rebuilding a basis from short independent vectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormBoundedBasis {
    #[serde(with = "crate::serde_util::matrix")]
    pub basis: IntMatrix,
    pub max_norm: f64,
    /// `dim^{3/2} * M * H`.
    pub bound: f64,
    pub bound_ok: bool,
}

/// LLL-reduces the stack of the lattice basis and `M` times the given
/// independent vectors, and checks the row norms against
/// `dim^{3/2} * M * H` exactly.
pub fn basis_with_norm_bound(basis: &IntMatrix, li_vectors: &[Vec<i64>], power: u64, half_width: u64) -> Result<NormBoundedBasis> {
    let dim = basis.ncols();
    if li_vectors.len() != dim || li_vectors.iter().any(|v| v.len() != dim) {
        return Err(Error::input(format!("expected {dim} vectors of length {dim}")));
    }
    let scaled: Vec<Vec<BigInt>> = li_vectors
        .iter()
        .map(|v| v.iter().map(|&x| BigInt::from(x) * BigInt::from(power)).collect())
        .collect();
    let scaled = IntMatrix::from_rows(scaled)?;
    if scaled.rank() != dim {
        return Err(Error::input("vectors are not linearly independent"));
    }
    let lattice_form = hnf_basis(basis);
    if lattice_form.nrows() != dim {
        return Err(Error::input("lattice basis is not full rank"));
    }
    for row in scaled.rows() {
        if !super::hnf::in_lattice(&lattice_form, row) {
            return Err(Error::input("scaled vectors are not in the lattice"));
        }
    }
    let stacked = lattice_form.vstack(&scaled)?;
    let dedup = hnf_basis(&stacked);
    let reduced = super::lll::lll_reduce(&dedup, &super::lll::default_delta())?;
    let max_sq = reduced.row_norms_squared().into_iter().max().unwrap_or_default();
    // max_norm^2 <= dim^3 M^2 H^2
    let bound_sq = BigInt::from(dim as u64).pow(3) * BigInt::from(power).pow(2) * BigInt::from(half_width).pow(2);
    let bound = (dim as f64).powf(1.5) * power as f64 * half_width as f64;
    Ok(NormBoundedBasis {
        max_norm: max_sq.to_f64().unwrap_or(f64::INFINITY).sqrt(),
        bound,
        bound_ok: max_sq <= bound_sq && !max_sq.is_negative(),
        basis: reduced,
    })
}
