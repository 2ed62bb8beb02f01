//! Modular arithmetic kernels: exponentiation, inverses, primality and the
//! product-tree multi-exponentiation.

mod mulexp;
pub(crate) mod primality;

pub use mulexp::{mulexp_naive_fold, mulexp_product_tree, multiplication_cost, MulExpPlan, MulExpResult, PlanNode};
pub use primality::{is_prime_u64, is_probable_prime, passes_trial_division, DEFAULT_MR_ROUNDS, DETERMINISTIC_MR_LIMIT};

use num_bigint::BigUint;
use num_traits::{One, Zero};

/// `a * b mod m` without overflow for any 64-bit operands.
#[inline]
pub fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

/// Left-to-right square-and-multiply on machine words.
///
/// `modulus` must be at least 1; a modulus of 1 always yields 0.
pub fn mod_pow_u64(base: u64, mut exponent: u64, modulus: u64) -> u64 {
    debug_assert!(modulus >= 1);
    if modulus == 1 {
        return 0;
    }
    let mut result = 1u64;
    let mut b = base % modulus;
    while exponent > 0 {
        if exponent & 1 == 1 {
            result = mul_mod(result, b, modulus);
        }
        b = mul_mod(b, b, modulus);
        exponent >>= 1;
    }
    result
}

/// `base^exponent mod modulus` for arbitrary-precision operands.
pub fn mod_pow(base: &BigUint, exponent: &BigUint, modulus: &BigUint) -> BigUint {
    debug_assert!(*modulus >= BigUint::from(2u8));
    if exponent.is_zero() {
        return BigUint::one() % modulus;
    }
    base.modpow(exponent, modulus)
}

/// Extended Euclid on signed 128-bit integers: returns `(g, x, y)` with `a x + b y = g >= 0`.
pub fn ext_gcd(a: i128, b: i128) -> (i128, i128, i128) {
    let (mut old_r, mut r) = (a, b);
    let (mut old_s, mut s) = (1i128, 0i128);
    let (mut old_t, mut t) = (0i128, 1i128);
    while r != 0 {
        let q = old_r.div_euclid(r);
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
        (old_t, t) = (t, old_t - q * t);
    }
    if old_r < 0 {
        (-old_r, -old_s, -old_t)
    } else {
        (old_r, old_s, old_t)
    }
}

/// Inverse of `a` modulo `m`, if it exists.
pub fn mod_inverse(a: u64, m: u64) -> Option<u64> {
    if m == 1 {
        return Some(0);
    }
    let (g, x, _) = ext_gcd((a % m) as i128, m as i128);
    (g == 1).then(|| x.rem_euclid(m as i128) as u64)
}

pub fn gcd_u64(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

pub fn lcm_u64(a: u64, b: u64) -> u64 {
    if a == 0 || b == 0 {
        return 0;
    }
    a / gcd_u64(a, b) * b
}

/// Floor of the k-th root of `n`, exact.
pub fn integer_root(n: &BigUint, k: u32) -> BigUint {
    n.nth_root(k)
}

/// If `n` is a perfect power `r^k` with `k >= 2`, returns `(r, k)` with the
/// smallest such root.
pub fn perfect_power(n: &BigUint) -> Option<(BigUint, u32)> {
    if *n < BigUint::from(4u8) {
        return None;
    }
    let max_k = n.bits() as u32;
    // Largest k first gives the smallest root.
    for k in (2..=max_k).rev() {
        let r = integer_root(n, k);
        if r > BigUint::one() && r.pow(k) == *n {
            return Some((r, k));
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive_pow(base: u64, exponent: u64, modulus: u64) -> u64 {
        let mut acc = 1 % modulus;
        for _ in 0..exponent {
            acc = acc * base % modulus;
        }
        acc
    }

    #[test]
    fn mod_pow_examples() {
        assert_eq!(mod_pow_u64(2, 4, 15), naive_pow(2, 4, 15));
        assert_eq!(mod_pow_u64(2, 4, 15), 1);
        assert_eq!(mod_pow_u64(7, 0, 15), 1);
        assert_eq!(mod_pow_u64(3, 1, 11), 3);
        let big = |v: u64| BigUint::from(v);
        assert_eq!(mod_pow(&big(2), &big(4), &big(15)), big(1));
        assert_eq!(mod_pow(&big(7), &big(0), &big(15)), big(1));
        assert_eq!(mod_pow(&big(3), &big(1), &big(11)), big(3));
    }

    #[test]
    fn mod_pow_matches_repeated_multiplication() {
        for m in 2..60u64 {
            for b in 0..m {
                for e in 0..20 {
                    assert_eq!(mod_pow_u64(b, e, m), naive_pow(b, e, m), "{b}^{e} mod {m}");
                }
            }
        }
    }

    #[test]
    fn inverse_and_gcd() {
        assert_eq!(mod_inverse(3, 7), Some(5));
        assert_eq!(mod_inverse(6, 9), None);
        assert_eq!(gcd_u64(12, 18), 6);
        assert_eq!(lcm_u64(4, 6), 12);
        let (g, x, y) = ext_gcd(240, 46);
        assert_eq!(g, 2);
        assert_eq!(240 * x + 46 * y, 2);
    }

    #[test]
    fn perfect_powers() {
        assert_eq!(perfect_power(&BigUint::from(9u8)), Some((BigUint::from(3u8), 2)));
        assert_eq!(perfect_power(&BigUint::from(1024u32)), Some((BigUint::from(2u8), 10)));
        assert_eq!(perfect_power(&BigUint::from(15u8)), None);
        assert_eq!(perfect_power(&BigUint::from(675u32)), None);
        assert_eq!(perfect_power(&BigUint::from(216u32)), Some((BigUint::from(6u8), 3)));
    }
}
