use std::sync::OnceLock;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use rand::Rng;

use super::{mod_pow_u64, mul_mod};

/// Rounds used by the pipelines for candidates above [`DETERMINISTIC_MR_LIMIT`].
pub const DEFAULT_MR_ROUNDS: u32 = 64;

/// Below this bound the witnesses 2, 3, ..., 41 decide primality exactly
/// (Sorenson and Webster, 2015: the bound is 3317044064679887385961981).
pub const DETERMINISTIC_MR_LIMIT: u128 = 3_317_044_064_679_887_385_961_981;

const DETERMINISTIC_WITNESSES: [u64; 13] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41];

/// Primes below this bound are used for trial division before Miller-Rabin.
const TRIAL_DIVISION_BOUND: u64 = 1 << 16;

struct SmallPrimeTable {
    primes: Vec<u64>,
    /// Products of consecutive primes, each fitting in 64 bits, with the
    /// index range of the primes they cover.
    chunks: Vec<(u64, usize, usize)>,
}

fn small_primes() -> &'static SmallPrimeTable {
    static TABLE: OnceLock<SmallPrimeTable> = OnceLock::new();
    TABLE.get_or_init(|| {
        let limit = TRIAL_DIVISION_BOUND as usize;
        let mut composite = vec![false; limit];
        let mut primes = Vec::new();
        for i in 2..limit {
            if !composite[i] {
                primes.push(i as u64);
                let mut j = i * i;
                while j < limit {
                    composite[j] = true;
                    j += i;
                }
            }
        }
        let mut chunks = Vec::new();
        let mut start = 0;
        while start < primes.len() {
            let mut product = 1u64;
            let mut end = start;
            while end < primes.len() {
                match product.checked_mul(primes[end]) {
                    Some(p) => {
                        product = p;
                        end += 1;
                    }
                    None => break,
                }
            }
            chunks.push((product, start, end));
            start = end;
        }
        SmallPrimeTable { primes, chunks }
    })
}

fn rem_u64(digits: &[u64], m: u64) -> u64 {
    let mut r = 0u128;
    for &d in digits.iter().rev() {
        r = ((r << 64) | d as u128) % m as u128;
    }
    r as u64
}

/// `false` when `n` has a prime factor below 2^16 other than itself.
pub fn passes_trial_division(n: &BigUint) -> bool {
    let table = small_primes();
    if let Some(small) = n.to_u64() {
        if small < TRIAL_DIVISION_BOUND {
            return small >= 2 && table.primes.binary_search(&small).is_ok();
        }
    }
    let digits = n.to_u64_digits();
    for &(product, start, end) in &table.chunks {
        let r = rem_u64(&digits, product);
        if table.primes[start..end].iter().any(|&p| r.is_multiple_of(p)) {
            return false;
        }
    }
    true
}

fn miller_rabin_u64(n: u64, a: u64) -> bool {
    let a = a % n;
    if a == 0 {
        return true;
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    let mut x = mod_pow_u64(a, d, n);
    if x == 1 || x == n - 1 {
        return true;
    }
    for _ in 1..s {
        x = mul_mod(x, x, n);
        if x == n - 1 {
            return true;
        }
    }
    false
}

/// Deterministic primality for machine words.
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for &p in &DETERMINISTIC_WITNESSES {
        if n == p {
            return true;
        }
        if n.is_multiple_of(p) {
            return false;
        }
    }
    DETERMINISTIC_WITNESSES[..12].iter().all(|&a| miller_rabin_u64(n, a))
}

fn miller_rabin_big(n: &BigUint, n_minus_one: &BigUint, d: &BigUint, s: u64, a: &BigUint) -> bool {
    let mut x = a.modpow(d, n);
    if x.is_one() || x == *n_minus_one {
        return true;
    }
    for _ in 1..s {
        x = &x * &x % n;
        if x == *n_minus_one {
            return true;
        }
    }
    false
}

/// Miller-Rabin probable-prime test.
///
/// Exact for `n < DETERMINISTIC_MR_LIMIT`. Above it, base 2 followed by
/// `rounds` uniformly random bases in `[2, n - 2]`, so a composite survives
/// with probability at most `4^-rounds`.
pub fn is_probable_prime<R: Rng + ?Sized>(n: &BigUint, rounds: u32, rng: &mut R) -> bool {
    if let Some(small) = n.to_u64() {
        return is_prime_u64(small);
    }
    if !passes_trial_division(n) {
        return false;
    }
    let n_minus_one = n - 1u32;
    let s = n_minus_one.trailing_zeros().unwrap_or(0);
    let d = &n_minus_one >> s;
    let deterministic = n.to_u128().is_some_and(|v| v < DETERMINISTIC_MR_LIMIT);
    if deterministic {
        return DETERMINISTIC_WITNESSES
            .iter()
            .all(|&a| miller_rabin_big(n, &n_minus_one, &d, s, &BigUint::from(a)));
    }
    if !miller_rabin_big(n, &n_minus_one, &d, s, &BigUint::from(2u8)) {
        return false;
    }
    let span = n - 3u32; // bases 2..=n-2
    for _ in 0..rounds {
        let a = uniform_below(&span, rng) + 2u32;
        if !miller_rabin_big(n, &n_minus_one, &d, s, &a) {
            return false;
        }
    }
    true
}

/// Uniform integer in `[0, bound)` by rejection from the bit length of `bound`.
///
/// Bytes are drawn in a fixed little-endian order so that a given RNG state
/// yields the same value on every platform.
pub(crate) fn uniform_below<R: Rng + ?Sized>(bound: &BigUint, rng: &mut R) -> BigUint {
    assert!(!bound.is_zero(), "empty range");
    let bits = bound.bits();
    let bytes = bits.div_ceil(8) as usize;
    let excess = (bytes as u64 * 8 - bits) as u32;
    let mut buf = vec![0u8; bytes];
    loop {
        rng.fill_bytes(&mut buf);
        if let Some(top) = buf.last_mut() {
            *top &= 0xffu8 >> excess;
        }
        let candidate = BigUint::from_bytes_le(&buf);
        if candidate < *bound {
            return candidate;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn trial_division(n: u64) -> bool {
        n >= 2 && (2..).take_while(|p| p * p <= n).all(|p| !n.is_multiple_of(p))
    }

    #[test]
    fn known_values() {
        let mut rng = ChaCha20Rng::seed_from_u64(0);
        assert!(!trial_division(561));
        assert!(!is_probable_prime(&BigUint::from(561u32), 64, &mut rng));
        assert!(is_probable_prime(&BigUint::from(2u32), 64, &mut rng));
        assert!(!is_probable_prime(&BigUint::from(1081u32), 64, &mut rng));
        assert_eq!(1081, 23 * 47);
    }

    #[test]
    fn agrees_with_trial_division_below_20000() {
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        for n in 0..20_000u64 {
            assert_eq!(is_prime_u64(n), trial_division(n), "{n}");
            assert_eq!(is_probable_prime(&BigUint::from(n), 8, &mut rng), trial_division(n), "{n}");
        }
    }

    #[test]
    fn carmichael_and_strong_pseudoprimes() {
        let mut rng = ChaCha20Rng::seed_from_u64(2);
        // Carmichael numbers and the strong pseudoprime 3215031751 to bases 2, 3, 5, 7.
        for n in [561u64, 1105, 1729, 2465, 2821, 6601, 8911, 3_215_031_751, 3_825_123_056_546_413_051] {
            assert!(!is_prime_u64(n), "{n}");
            assert!(!is_probable_prime(&BigUint::from(n), 64, &mut rng), "{n}");
        }
    }

    #[test]
    fn large_known_primes() {
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        // 2^127 - 1 and 2^521 - 1 are Mersenne primes; 2^128 + 1 is composite.
        let m127 = (BigUint::one() << 127u32) - 1u32;
        let m521 = (BigUint::one() << 521u32) - 1u32;
        assert!(is_probable_prime(&m127, 16, &mut rng));
        assert!(is_probable_prime(&m521, 16, &mut rng));
        assert!(!is_probable_prime(&((BigUint::one() << 128u32) + 1u32), 16, &mut rng));
        // 2^61 - 1 and 2^89 - 1 are prime; their product sits above the deterministic range.
        let m61 = (BigUint::one() << 61u32) - 1u32;
        let m89 = (BigUint::one() << 89u32) - 1u32;
        assert!(is_probable_prime(&m89, 16, &mut rng));
        assert!(!is_probable_prime(&(&m61 * &m89), 16, &mut rng));
    }

    #[test]
    fn uniform_below_stays_in_range() {
        let mut rng = ChaCha20Rng::seed_from_u64(4);
        let bound = BigUint::from(1000u32);
        let mut seen = [false; 1000];
        for _ in 0..20_000 {
            let v = uniform_below(&bound, &mut rng).to_usize().unwrap();
            seen[v] = true;
        }
        assert!(seen.iter().all(|&s| s));
    }
}
