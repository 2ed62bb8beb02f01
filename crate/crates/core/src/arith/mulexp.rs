//! Product-tree evaluation of `prod a_i^{t_i} mod N` with selector bits `t_i`.
//!
//! The leaves are padded to a power of two with the multiplicative identity and
//! multiplied pairwise, level by level. An intermediate product is reduced
//! modulo `N` only once its bit length exceeds that of `N`, so the lower levels
//! of the tree multiply short operands. Each multiplication of operands with
//! combined bit length `x` is charged `ceil(x * log2(x + 2))` cost units, a
//! stand-in for an `O(x log x)` multiplication algorithm.

use num_bigint::BigUint;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Cost units charged for one multiplication of combined bit length `bits`.
pub fn multiplication_cost(bits: u64) -> u64 {
    if bits == 0 {
        return 0;
    }
    let x = bits as f64;
    (x * (x + 2.0).log2()).ceil() as u64
}

/// One multiply node of the schedule. Children index into the combined
/// array of leaves (`0..leaf_count`) followed by internal nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlanNode {
    pub left: usize,
    pub right: usize,
    /// Combined operand bit length before reduction.
    pub operand_bits: u64,
    /// Bit bound of the product after optional reduction.
    pub product_bits: u64,
}

/// Static schedule and cost bound for a balanced product tree.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MulExpPlan {
    pub leaf_count: usize,
    pub leaf_bit_bound: u64,
    pub modulus_bits: u64,
    /// Internal nodes in evaluation order; the last one is the root.
    pub schedule: Vec<PlanNode>,
    pub cost_units: u64,
}

impl MulExpPlan {
    /// Plans `d` leaves of at most `leaf_bits` bits each under a modulus of
    /// `modulus_bits` bits.
    pub fn new(d: usize, leaf_bits: u64, modulus_bits: u64) -> Result<Self> {
        if d == 0 {
            return Err(Error::input("product tree needs at least one leaf"));
        }
        if leaf_bits == 0 || modulus_bits == 0 {
            return Err(Error::input("bit bounds must be positive"));
        }
        let leaf_count = d.next_power_of_two();
        let mut bounds: Vec<u64> = vec![leaf_bits; leaf_count];
        let mut level: Vec<usize> = (0..leaf_count).collect();
        let mut schedule = Vec::with_capacity(leaf_count - 1);
        let mut cost_units = 0u64;
        while level.len() > 1 {
            let mut next = Vec::with_capacity(level.len() / 2);
            for pair in level.chunks(2) {
                let operand_bits = bounds[pair[0]] + bounds[pair[1]];
                let product_bits = operand_bits.min(modulus_bits);
                cost_units += multiplication_cost(operand_bits);
                schedule.push(PlanNode {
                    left: pair[0],
                    right: pair[1],
                    operand_bits,
                    product_bits,
                });
                bounds.push(product_bits);
                next.push(bounds.len() - 1);
            }
            level = next;
        }
        Ok(MulExpPlan {
            leaf_count,
            leaf_bit_bound: leaf_bits,
            modulus_bits,
            schedule,
            cost_units,
        })
    }

    /// Cost of the left-to-right fold `((a_1 a_2) a_3) ...` under the same
    /// bounds and reduction policy.
    pub fn naive_fold_cost(d: usize, leaf_bits: u64, modulus_bits: u64) -> u64 {
        let mut acc = leaf_bits;
        let mut cost = 0;
        for _ in 1..d {
            let operand_bits = acc + leaf_bits;
            cost += multiplication_cost(operand_bits);
            acc = operand_bits.min(modulus_bits);
        }
        cost
    }
}

/// Residue and the cost actually incurred on the concrete operands.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MulExpResult {
    pub residue: BigUint,
    pub cost_units: u64,
}

fn check_inputs(bases: &[BigUint], selectors: &[bool], modulus: &BigUint) -> Result<()> {
    if bases.len() != selectors.len() {
        return Err(Error::input(format!(
            "{} bases but {} selectors",
            bases.len(),
            selectors.len()
        )));
    }
    if bases.is_empty() {
        return Err(Error::input("at least one base is required"));
    }
    if *modulus < BigUint::from(2u8) {
        return Err(Error::input("modulus must be at least 2"));
    }
    if bases.iter().any(|a| a >= modulus) {
        return Err(Error::input("bases must be reduced modulo the modulus"));
    }
    Ok(())
}

fn multiply_and_maybe_reduce(a: &BigUint, b: &BigUint, modulus: &BigUint, cost: &mut u64) -> BigUint {
    *cost += multiplication_cost(a.bits() + b.bits());
    let product = a * b;
    if product.bits() > modulus.bits() {
        product % modulus
    } else {
        product
    }
}

/// `prod a_i^{t_i} mod N` through the balanced product tree.
pub fn mulexp_product_tree(bases: &[BigUint], selectors: &[bool], modulus: &BigUint) -> Result<MulExpResult> {
    check_inputs(bases, selectors, modulus)?;
    let leaf_count = bases.len().next_power_of_two();
    let mut level: Vec<BigUint> = bases
        .iter()
        .zip(selectors)
        .map(|(a, &t)| if t { a.clone() } else { BigUint::one() })
        .chain(std::iter::repeat_with(BigUint::one))
        .take(leaf_count)
        .collect();
    let mut cost_units = 0;
    while level.len() > 1 {
        level = level
            .chunks(2)
            .map(|pair| multiply_and_maybe_reduce(&pair[0], &pair[1], modulus, &mut cost_units))
            .collect();
    }
    let residue = level.pop().unwrap_or_else(BigUint::zero) % modulus;
    Ok(MulExpResult { residue, cost_units })
}

/// The left-to-right fold with the same reduction policy; used as the
/// baseline schedule.
pub fn mulexp_naive_fold(bases: &[BigUint], selectors: &[bool], modulus: &BigUint) -> Result<MulExpResult> {
    check_inputs(bases, selectors, modulus)?;
    let mut cost_units = 0;
    let mut acc = if selectors[0] { bases[0].clone() } else { BigUint::one() };
    for (a, &t) in bases.iter().zip(selectors).skip(1) {
        let leaf = if t { a.clone() } else { BigUint::one() };
        acc = multiply_and_maybe_reduce(&acc, &leaf, modulus, &mut cost_units);
    }
    Ok(MulExpResult {
        residue: acc % modulus,
        cost_units,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::mod_pow;
    use proptest::prelude::*;

    fn big(v: u64) -> BigUint {
        BigUint::from(v)
    }

    fn sequential_oracle(bases: &[BigUint], selectors: &[bool], modulus: &BigUint) -> BigUint {
        bases.iter().zip(selectors).fold(BigUint::one() % modulus, |acc, (a, &t)| {
            let e = if t { BigUint::one() } else { BigUint::zero() };
            acc * mod_pow(a, &e, modulus) % modulus
        })
    }

    #[test]
    fn known_values() {
        let r = mulexp_product_tree(&[big(3), big(5), big(7)], &[true, false, true], &big(11)).unwrap();
        assert_eq!(r.residue, big(10));
        let r = mulexp_product_tree(&vec![big(2); 4], &[true; 4], &big(100)).unwrap();
        assert_eq!(r.residue, big(16));
    }

    #[test]
    fn length_mismatch_is_an_input_error() {
        let err = mulexp_product_tree(&[big(2), big(3)], &[true], &big(7)).unwrap_err();
        assert!(matches!(err, Error::Input(_)));
        assert!(matches!(
            mulexp_product_tree(&[big(9)], &[true], &big(7)),
            Err(Error::Input(_))
        ));
    }

    #[test]
    fn plan_shape() {
        for d in 1..=70 {
            let plan = MulExpPlan::new(d, 64, 1 << 20).unwrap();
            assert!(plan.leaf_count.is_power_of_two() && plan.leaf_count >= d);
            assert_eq!(plan.schedule.len(), plan.leaf_count - 1);
            // Children bounds add up, capped at the modulus size.
            let mut bounds = vec![64u64; plan.leaf_count];
            for node in &plan.schedule {
                assert_eq!(node.operand_bits, bounds[node.left] + bounds[node.right]);
                assert_eq!(node.product_bits, node.operand_bits.min(plan.modulus_bits));
                bounds.push(node.product_bits);
            }
        }
    }

    #[test]
    fn single_leaf_costs_nothing() {
        let plan = MulExpPlan::new(1, 10, 10).unwrap();
        assert_eq!(plan.cost_units, 0);
        let r = mulexp_product_tree(&[big(5)], &[true], &big(7)).unwrap();
        assert_eq!((r.residue, r.cost_units), (big(5), 0));
    }

    proptest! {
        #[test]
        fn tree_matches_sequential_oracle(
            seeds in proptest::collection::vec((any::<u64>(), any::<bool>()), 1..40),
            modulus in 2u64..u64::MAX,
        ) {
            let n = big(modulus);
            let bases: Vec<BigUint> = seeds.iter().map(|(a, _)| big(a % modulus)).collect();
            let selectors: Vec<bool> = seeds.iter().map(|(_, t)| *t).collect();
            let tree = mulexp_product_tree(&bases, &selectors, &n).unwrap();
            let fold = mulexp_naive_fold(&bases, &selectors, &n).unwrap();
            let oracle = sequential_oracle(&bases, &selectors, &n);
            prop_assert_eq!(&tree.residue, &oracle);
            prop_assert_eq!(&fold.residue, &oracle);
        }
    }
}
