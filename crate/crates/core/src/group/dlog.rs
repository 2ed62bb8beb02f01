//! Pohlig-Hellman in a cyclic subgroup of `(Z/qZ)^x`, with baby-step
//! giant-step on each prime-order layer.

use std::collections::HashMap;

use crate::arith::{mod_inverse, mod_pow_u64, mul_mod};

/// Solves `g^x = h (mod q)` for `0 <= x < p` where `g` has prime order `p`.
fn bsgs(g: u64, h: u64, p: u64, q: u64) -> Option<u64> {
    let m = (p as f64).sqrt().ceil() as u64 + 1;
    let mut table = HashMap::with_capacity(m as usize);
    let mut e = 1u64;
    for j in 0..m {
        table.entry(e).or_insert(j);
        e = mul_mod(e, g, q);
    }
    let factor = mod_inverse(mod_pow_u64(g, m, q), q)?;
    let mut gamma = h % q;
    for i in 0..m {
        if let Some(&j) = table.get(&gamma) {
            let x = i * m + j;
            if x < p {
                return Some(x);
            }
        }
        gamma = mul_mod(gamma, factor, q);
    }
    None
}

/// Discrete log of `h` to base `g`, where `g` has order `order` with the given
/// prime factorization. Returns `x` in `[0, order)`.
pub(crate) fn pohlig_hellman(g: u64, h: u64, order: u64, order_factors: &[(u64, u32)], q: u64) -> Option<u64> {
    if order == 1 {
        return (h % q == 1 % q).then_some(0);
    }
    let mut residue = 0u128;
    let mut modulus = 1u128;
    for &(p, e) in order_factors {
        let pe = p.pow(e);
        let cofactor = order / pe;
        let gp = mod_pow_u64(g, cofactor, q);
        let hp = mod_pow_u64(h, cofactor, q);
        // gamma generates the order-p layer.
        let gamma = mod_pow_u64(gp, pe / p, q);
        let gp_inv = mod_inverse(gp, q)?;
        let mut x = 0u64;
        let mut p_i = 1u64;
        for i in 0..e {
            let shifted = mul_mod(hp, mod_pow_u64(gp_inv, x, q), q);
            let hi = mod_pow_u64(shifted, pe / p / p.pow(i), q);
            let digit = bsgs(gamma, hi, p, q)?;
            x += digit * p_i;
            p_i = p_i.saturating_mul(p);
        }
        // CRT merge of x mod p^e into the running residue.
        let (g_, s, _) = crate::arith::ext_gcd(modulus as i128, pe as i128);
        debug_assert_eq!(g_, 1);
        let diff = (x as i128 - residue as i128).rem_euclid(pe as i128);
        let t = (diff * s.rem_euclid(pe as i128)).rem_euclid(pe as i128);
        residue += t as u128 * modulus;
        modulus *= pe as u128;
        residue %= modulus;
    }
    let x = residue as u64;
    (mod_pow_u64(g, x, q) == h % q).then_some(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::factor::factor_by_trial_division;

    #[test]
    fn small_prime_fields() {
        for q in [7u64, 11, 13, 101, 1009] {
            let order = q - 1;
            let factors = factor_by_trial_division(order);
            let g = (2..q)
                .find(|&g| factors.iter().all(|&(p, _)| mod_pow_u64(g, order / p, q) != 1))
                .unwrap();
            for x in 0..order {
                let h = mod_pow_u64(g, x, q);
                assert_eq!(pohlig_hellman(g, h, order, &factors, q), Some(x));
            }
        }
    }

    #[test]
    fn prime_power_modulus() {
        // 2 is a primitive root mod 3^5 = 243, order 162 = 2 * 3^4.
        let q = 243;
        let factors = vec![(2, 1), (3, 4)];
        for x in 0..162 {
            let h = mod_pow_u64(2, x, q);
            assert_eq!(pohlig_hellman(2, h, 162, &factors, q), Some(x));
        }
    }
}
