//! Relation lattices of tuples of units.
//!
//! For units `g_1..g_k` mod `N` and a power `M`, the lattice is
//! `{e in Z^k : prod g_i^{M e_i} = 1 (mod N)}`. It is computed from the
//! coordinates of the `g_i` in the cyclic decomposition of `(Z/NZ)^x`, as
//! the kernel of `e -> sum e_i M v(g_i)` into `prod Z/o_j`.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive};
use serde::{Deserialize, Serialize};

use super::enumerate::count_cube_points;
use super::hnf::{hnf, hnf_basis};
use super::matrix::IntMatrix;
use crate::arith::{mod_inverse, mod_pow_u64, mul_mod};
use crate::error::{Error, Result};
use crate::group::UnitGroupStructure;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelationLattice {
    pub ambient_dim: usize,
    /// Rows form a basis, in Hermite form.
    #[serde(with = "crate::serde_util::matrix")]
    pub basis: IntMatrix,
    pub generators: Vec<u64>,
    pub power: u128,
    pub modulus: u64,
}

impl RelationLattice {
    /// `|det(basis)|`, the index of the lattice in `Z^k`.
    pub fn index(&self) -> BigInt {
        self.basis.determinant().map(|d| d.abs()).unwrap_or_default()
    }

    /// Same lattice with a different (equivalent) basis.
    pub fn with_basis(&self, basis: IntMatrix) -> Result<Self> {
        if hnf_basis(&basis) != hnf_basis(&self.basis) {
            return Err(Error::input("basis spans a different lattice"));
        }
        Ok(RelationLattice {
            basis,
            ..self.clone()
        })
    }
}

/// Rows `M * v(g_i)` reduced mod the component orders.
fn scaled_coordinates(structure: &UnitGroupStructure, generators: &[u64], power: u128) -> Result<Vec<Vec<u64>>> {
    let orders = structure.orders();
    generators
        .iter()
        .map(|&g| {
            let v = structure.dlog_vector(g)?;
            Ok(v
                .coords()
                .iter()
                .zip(&orders)
                .map(|(&x, &o)| mul_mod(x, (power % o as u128) as u64, o))
                .collect())
        })
        .collect()
}

pub fn relation_lattice(structure: &UnitGroupStructure, generators: &[u64], power: u128) -> Result<RelationLattice> {
    if power == 0 {
        return Err(Error::input("power must be positive"));
    }
    let k = generators.len();
    let orders = structure.orders();
    let c = orders.len();
    let coords = scaled_coordinates(structure, generators, power)?;
    let basis = if k == 0 {
        IntMatrix::zeros(0, 0)
    } else {
        let mut rows: Vec<Vec<BigInt>> = coords.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect();
        for (j, &o) in orders.iter().enumerate() {
            let mut r = vec![BigInt::from(0); c];
            r[j] = BigInt::from(o);
            rows.push(r);
        }
        let stacked = IntMatrix::from_rows(rows)?;
        let h = hnf(&stacked);
        if h.zero_rows() != k {
            return Err(Error::internal("relation matrix has unexpected rank"));
        }
        // Left-kernel rows; their first k coordinates form a basis of the
        // projection, which is injective on the kernel.
        let kernel: Vec<Vec<BigInt>> = h.transform.rows()[..k].iter().map(|r| r[..k].to_vec()).collect();
        hnf_basis(&IntMatrix::from_rows(kernel)?)
    };
    Ok(RelationLattice {
        ambient_dim: k,
        basis,
        generators: generators.iter().map(|&g| g % structure.modulus).collect(),
        power,
        modulus: structure.modulus,
    })
}

/// `|<g_1^M, ..., g_k^M>|` as the index of the relation lattice.
pub fn subgroup_size(structure: &UnitGroupStructure, generators: &[u64], power: u128) -> Result<u64> {
    let lattice = relation_lattice(structure, generators, power)?;
    lattice
        .index()
        .to_u64()
        .ok_or_else(|| Error::internal("subgroup larger than the group"))
}

/// `g^M mod N` using only modular arithmetic.
fn raise(structure: &UnitGroupStructure, g: u64, power: u128) -> u64 {
    let e = (power % structure.group_order as u128) as u64;
    mod_pow_u64(g, e, structure.modulus)
}

/// Size of the subgroup generated by `g_i^M`, by closure under
/// multiplication in `Z/NZ`.
pub fn brute_force_subgroup_size(structure: &UnitGroupStructure, generators: &[u64], power: u128) -> u64 {
    let n = structure.modulus;
    let gens: Vec<u64> = generators.iter().map(|&g| raise(structure, g, power)).collect();
    let mut seen = vec![false; n as usize];
    let mut stack = vec![1 % n];
    seen[(1 % n) as usize] = true;
    let mut count = 1;
    while let Some(x) = stack.pop() {
        for &g in &gens {
            let y = mul_mod(x, g, n);
            if !seen[y as usize] {
                seen[y as usize] = true;
                count += 1;
                stack.push(y);
            }
        }
    }
    count
}

/// `prod g_i^{M e_i} mod N` for integer (possibly negative) `e`.
pub fn evaluate_relation(structure: &UnitGroupStructure, generators: &[u64], power: u128, e: &[BigInt]) -> Result<u64> {
    let n = structure.modulus;
    let phi = BigInt::from(structure.group_order);
    let mut acc = 1 % n;
    for (&g, x) in generators.iter().zip(e) {
        let gm = raise(structure, g, power);
        let base = if x.is_negative() {
            mod_inverse(gm, n).ok_or_else(|| Error::input(format!("{g} is not a unit")))?
        } else {
            gm
        };
        let exp = (x.abs() % &phi).to_u64().unwrap_or(0);
        acc = mul_mod(acc, mod_pow_u64(base, exp, n), n);
    }
    Ok(acc)
}

/// Number of `e in [-R, R]^k` with `prod g_i^{M e_i} = 1`, by a
/// meet-in-the-middle split of the coordinates over group coordinates.
pub fn count_relations_in_box(structure: &UnitGroupStructure, generators: &[u64], power: u128, radius: u64) -> Result<u128> {
    let k = generators.len();
    let orders = structure.orders();
    let coords = scaled_coordinates(structure, generators, power)?;
    let half = k / 2;
    let r = radius as i64;
    let sums = |idx: &[usize]| -> HashMap<Vec<u64>, u128> {
        let mut table: HashMap<Vec<u64>, u128> = HashMap::new();
        let mut e = vec![-r; idx.len()];
        loop {
            let mut s = vec![0u64; orders.len()];
            for (slot, &i) in idx.iter().enumerate() {
                for (j, &o) in orders.iter().enumerate() {
                    let t = (e[slot].rem_euclid(o as i64) as u64 * coords[i][j]) % o;
                    s[j] = (s[j] + t) % o;
                }
            }
            *table.entry(s).or_default() += 1;
            let mut p = 0;
            loop {
                if p == idx.len() {
                    return table;
                }
                if e[p] < r {
                    e[p] += 1;
                    break;
                }
                e[p] = -r;
                p += 1;
            }
        }
    };
    let left_idx: Vec<usize> = (0..half).collect();
    let right_idx: Vec<usize> = (half..k).collect();
    let left = sums(&left_idx);
    let right = sums(&right_idx);
    let mut total = 0u128;
    for (s, &cnt) in &left {
        let neg: Vec<u64> = s.iter().zip(&orders).map(|(&x, &o)| (o - x) % o).collect();
        if let Some(&other) = right.get(&neg) {
            total += cnt * other;
        }
    }
    Ok(total)
}

/// Outcome of checking a relation lattice against the group directly.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatticeInvariantReport {
    /// Every basis row is a relation.
    pub rows_are_relations: bool,
    pub determinant: String,
    pub brute_force_subgroup_size: u64,
    pub determinant_matches: bool,
    pub span_radius: u64,
    /// Relations in `[-R, R]^k`, counted in the group.
    pub relations_in_box: u128,
    /// Points of the row lattice in the same box.
    pub lattice_points_in_box: u128,
    pub spans_all_relations: bool,
}

impl LatticeInvariantReport {
    pub fn holds(&self) -> bool {
        self.rows_are_relations && self.determinant_matches && self.spans_all_relations
    }
}

/// Checks `basis` against the relation lattice of `lattice.generators`.
///
/// Rows that are relations span a sublattice of the true lattice, so equal
/// point counts in the box mean every relation in the box is in the span.
pub fn check_lattice_invariants(structure: &UnitGroupStructure, lattice: &RelationLattice, basis: &IntMatrix, span_radius: u64) -> Result<LatticeInvariantReport> {
    if structure.modulus != lattice.modulus {
        return Err(Error::input("structure and lattice moduli differ"));
    }
    let gens = &lattice.generators;
    let k = gens.len();
    let mut rows_are_relations = basis.ncols() == k;
    for row in basis.rows() {
        rows_are_relations &= evaluate_relation(structure, gens, lattice.power, row)? == 1 % structure.modulus;
    }
    let det = if basis.nrows() == basis.ncols() {
        basis.determinant()?.abs()
    } else {
        BigInt::from(0)
    };
    let brute = brute_force_subgroup_size(structure, gens, lattice.power);
    let relations_in_box = count_relations_in_box(structure, gens, lattice.power, span_radius)?;
    let lattice_points_in_box = if det == BigInt::from(0) {
        0
    } else if span_radius == 0 || k == 0 {
        1
    } else {
        count_cube_points(basis, span_radius)?.count
    };
    Ok(LatticeInvariantReport {
        rows_are_relations,
        determinant: det.to_string(),
        brute_force_subgroup_size: brute,
        determinant_matches: det == BigInt::from(brute),
        span_radius,
        relations_in_box,
        lattice_points_in_box,
        spans_all_relations: rows_are_relations && relations_in_box == lattice_points_in_box,
    })
}
