use crate::error::{Error, Result};

/// Largest integer `factor_integer` will accept.
pub const FACTOR_BUDGET: u64 = 1_000_000_000_000;

/// Prime factorization by trial division; primes strictly increasing.
pub fn factor_integer(n: u64) -> Result<Vec<(u64, u32)>> {
    if n < 2 {
        return Err(Error::input(format!("cannot factor {n}")));
    }
    if n > FACTOR_BUDGET {
        return Err(Error::resource("factor_integer", n, FACTOR_BUDGET));
    }
    Ok(factor_by_trial_division(n))
}

pub(crate) fn factor_by_trial_division(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut push = |p: u64, n: &mut u64| {
        let mut e = 0;
        while (*n).is_multiple_of(p) {
            *n /= p;
            e += 1;
        }
        if e > 0 {
            out.push((p, e));
        }
    };
    push(2, &mut n);
    push(3, &mut n);
    let mut p = 5u64;
    while p.saturating_mul(p) <= n {
        push(p, &mut n);
        push(p + 2, &mut n);
        p += 6;
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

/// Euler's totient from a factorization.
pub fn totient(factorization: &[(u64, u32)]) -> u64 {
    factorization
        .iter()
        .map(|&(p, e)| p.pow(e - 1) * (p - 1))
        .product()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_values() {
        assert_eq!(factor_integer(15).unwrap(), vec![(3, 1), (5, 1)]);
        assert_eq!(factor_integer(1024).unwrap(), vec![(2, 10)]);
        assert_eq!(factor_integer(1081).unwrap(), vec![(23, 1), (47, 1)]);
    }

    #[test]
    fn products_reconstruct() {
        for n in 2..5000u64 {
            let f = factor_integer(n).unwrap();
            assert_eq!(f.iter().map(|&(p, e)| p.pow(e)).product::<u64>(), n);
            assert!(f.windows(2).all(|w| w[0].0 < w[1].0));
            assert!(f.iter().all(|&(p, _)| crate::arith::is_prime_u64(p)));
        }
        let big = 999_999_000_001u64; // 10^12 - 10^6 + 1 (prime factor check only)
        let f = factor_integer(big).unwrap();
        assert_eq!(f.iter().map(|&(p, e)| p.pow(e)).product::<u64>(), big);
    }

    #[test]
    fn budget_and_domain() {
        assert!(matches!(factor_integer(1), Err(Error::Input(_))));
        assert!(matches!(factor_integer(FACTOR_BUDGET + 1), Err(Error::Resource { .. })));
    }

    #[test]
    fn totients() {
        assert_eq!(totient(&factor_integer(15).unwrap()), 8);
        assert_eq!(totient(&factor_integer(1081).unwrap()), 1012);
        assert_eq!(totient(&factor_integer(1024).unwrap()), 512);
    }
}
