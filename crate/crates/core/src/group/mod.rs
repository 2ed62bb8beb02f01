//! Exact structure of `G = (Z/NZ)^x` for desk-scale `N`.
//!
//! `G` is written as a product of cyclic components, one per odd prime power
//! dividing `N` and up to two for the power of two. Every unit then has an
//! [`ExponentVector`] of coordinates with respect to the component
//! generators, which is the coordinate system used by the character and
//! lattice code.

mod dlog;
mod factor;

pub use factor::{factor_integer, totient, FACTOR_BUDGET};

use serde::{Deserialize, Serialize};

use crate::arith::{gcd_u64, lcm_u64, mod_inverse, mod_pow_u64, mul_mod};
use crate::error::{Error, Result};
use factor::factor_by_trial_division;

/// How a component sits inside the CRT piece `Z/qZ` it lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ComponentKind {
    /// The full cyclic group `(Z/p^k)^x`, `p` odd.
    OddPrimePower,
    /// The `{+1, -1}` factor of `(Z/2^k)^x`, `k >= 2`.
    TwoSign,
    /// The `<5>` factor of `(Z/2^k)^x`, `k >= 3`.
    TwoPower,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CyclicComponent {
    /// Generator as a residue mod `N` (CRT lift: 1 on the other prime powers).
    pub generator: u64,
    pub order: u64,
    pub prime: u64,
    /// The prime power `q = p^k` this component lives in.
    pub prime_power: u64,
    pub kind: ComponentKind,
    /// Generator reduced mod `q`.
    local_generator: u64,
    order_factors: Vec<(u64, u32)>,
}

/// Coordinates of a unit: `a = prod gen_i^{coords[i]} (mod N)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ExponentVector(pub Vec<u64>);

impl ExponentVector {
    pub fn coords(&self) -> &[u64] {
        &self.0
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UnitGroupStructure {
    pub modulus: u64,
    pub factorization: Vec<(u64, u32)>,
    pub components: Vec<CyclicComponent>,
    pub group_order: u64,
}

fn crt_lift(local: u64, q: u64, n: u64) -> u64 {
    if q == n {
        return local % n;
    }
    let rest = n / q;
    // x = 1 + (local - 1) * rest * (rest^-1 mod q)  (mod n)
    let inv = mod_inverse(rest % q, q).expect("coprime CRT pieces");
    let delta = (local + q - 1) % q;
    let t = mul_mod(delta, inv, q);
    ((1 + t as u128 * rest as u128) % n as u128) as u64
}

fn merge_factors(a: &[(u64, u32)], b: &[(u64, u32)]) -> Vec<(u64, u32)> {
    let mut out: Vec<(u64, u32)> = a.to_vec();
    for &(p, e) in b {
        match out.iter_mut().find(|(q, _)| *q == p) {
            Some(entry) => entry.1 += e,
            None => out.push((p, e)),
        }
    }
    out.sort_unstable();
    out
}

fn has_order(g: u64, order: u64, factors: &[(u64, u32)], q: u64) -> bool {
    mod_pow_u64(g, order, q) == 1 % q && factors.iter().all(|&(p, _)| mod_pow_u64(g, order / p, q) != 1)
}

impl UnitGroupStructure {
    /// Decomposes `(Z/NZ)^x`; requires `3 <= N <= FACTOR_BUDGET`.
    pub fn new(n: u64) -> Result<Self> {
        if n < 3 {
            return Err(Error::input(format!("modulus must be at least 3, got {n}")));
        }
        let factorization = factor_integer(n)?;
        let mut components = Vec::new();
        for &(p, k) in &factorization {
            let q = p.pow(k);
            if p == 2 {
                if k >= 2 {
                    components.push(CyclicComponent {
                        generator: crt_lift(q - 1, q, n),
                        order: 2,
                        prime: 2,
                        prime_power: q,
                        kind: ComponentKind::TwoSign,
                        local_generator: q - 1,
                        order_factors: vec![(2, 1)],
                    });
                }
                if k >= 3 {
                    components.push(CyclicComponent {
                        generator: crt_lift(5, q, n),
                        order: 1 << (k - 2),
                        prime: 2,
                        prime_power: q,
                        kind: ComponentKind::TwoPower,
                        local_generator: 5,
                        order_factors: vec![(2, k - 2)],
                    });
                }
                continue;
            }
            let order = q / p * (p - 1);
            let mut order_factors = factor_by_trial_division(p - 1);
            if k > 1 {
                order_factors = merge_factors(&order_factors, &[(p, k - 1)]);
            }
            let g = (2..q)
                .find(|&g| g % p != 0 && has_order(g, order, &order_factors, q))
                .ok_or_else(|| Error::internal(format!("no primitive root mod {q}")))?;
            components.push(CyclicComponent {
                generator: crt_lift(g, q, n),
                order,
                prime: p,
                prime_power: q,
                kind: ComponentKind::OddPrimePower,
                local_generator: g,
                order_factors,
            });
        }
        let group_order = totient(&factorization);
        Ok(UnitGroupStructure {
            modulus: n,
            factorization,
            components,
            group_order,
        })
    }

    pub fn orders(&self) -> Vec<u64> {
        self.components.iter().map(|c| c.order).collect()
    }

    pub fn rank(&self) -> usize {
        self.components.len()
    }

    /// Exponent of `G`, the lcm of the component orders.
    pub fn exponent(&self) -> u64 {
        self.components.iter().fold(1, |acc, c| lcm_u64(acc, c.order))
    }

    /// Bit length `n = ceil(log2 N)`.
    pub fn bit_length(&self) -> u32 {
        64 - (self.modulus - 1).leading_zeros()
    }

    pub fn is_unit(&self, a: u64) -> bool {
        gcd_u64(a % self.modulus, self.modulus) == 1
    }

    fn require_unit(&self, a: u64) -> Result<u64> {
        let a = a % self.modulus;
        if gcd_u64(a, self.modulus) != 1 {
            return Err(Error::input(format!("{a} is not a unit modulo {}", self.modulus)));
        }
        Ok(a)
    }

    /// Coordinates of `a` with respect to the component generators.
    pub fn dlog_vector(&self, a: u64) -> Result<ExponentVector> {
        let a = self.require_unit(a)?;
        let mut coords = Vec::with_capacity(self.components.len());
        let mut i = 0;
        while i < self.components.len() {
            let c = &self.components[i];
            let q = c.prime_power;
            let local = a % q;
            match c.kind {
                ComponentKind::OddPrimePower => {
                    let x = dlog::pohlig_hellman(c.local_generator, local, c.order, &c.order_factors, q)
                        .ok_or_else(|| Error::internal(format!("dlog failed for {a} mod {q}")))?;
                    coords.push(x);
                    i += 1;
                }
                ComponentKind::TwoSign => {
                    let negative = local % 4 == 3;
                    coords.push(negative as u64);
                    if let Some(next) = self.components.get(i + 1).filter(|n| n.kind == ComponentKind::TwoPower) {
                        let positive = if negative { q - local } else { local };
                        let x = dlog::pohlig_hellman(5, positive, next.order, &next.order_factors, q)
                            .ok_or_else(|| Error::internal(format!("dlog failed for {a} mod {q}")))?;
                        coords.push(x);
                        i += 2;
                    } else {
                        i += 1;
                    }
                }
                ComponentKind::TwoPower => {
                    return Err(Error::internal("power-of-two component without sign component"));
                }
            }
        }
        Ok(ExponentVector(coords))
    }

    /// `prod gen_i^{v_i} mod N` for arbitrary integer exponents.
    pub fn element_from_coords(&self, coords: &[i64]) -> u64 {
        self.components.iter().zip(coords).fold(1 % self.modulus, |acc, (c, &v)| {
            let e = v.rem_euclid(c.order as i64) as u64;
            mul_mod(acc, mod_pow_u64(c.generator, e, self.modulus), self.modulus)
        })
    }

    /// Multiplicative order of `a`, read off its coordinates.
    pub fn element_order(&self, a: u64) -> Result<u64> {
        let v = self.dlog_vector(a)?;
        Ok(self
            .components
            .iter()
            .zip(v.coords())
            .fold(1, |acc, (c, &x)| lcm_u64(acc, c.order / gcd_u64(c.order, x))))
    }

    /// `K(h)`: size of the kernel of `x -> x^h`.
    pub fn kernel_size(&self, h: u128) -> u64 {
        self.components
            .iter()
            .map(|c| gcd_u64((h % c.order as u128) as u64, c.order))
            .product()
    }

    /// The subgroup exponent `M* = prod p^{m_p}` where `m_p` is the largest
    /// `m >= 0` with `K(p^m) >= p^{d m / 10}`.
    ///
    /// Since `K(p^m)` is a power of `p`, say `p^kappa`, the condition is the
    /// exact integer comparison `10 * kappa >= d * m`.
    pub fn m_star(&self, d: u32) -> Result<u128> {
        self.m_star_exponents(d)?.iter().try_fold(1u128, |acc, &(p, m)| {
            (p as u128)
                .checked_pow(m)
                .and_then(|pm| acc.checked_mul(pm))
                .ok_or_else(|| Error::resource("m_star", format!("{p}^{m}"), "u128"))
        })
    }

    /// The pairs `(p, m_p)` with `m_p > 0` that make up `M*`.
    pub fn m_star_exponents(&self, d: u32) -> Result<Vec<(u64, u32)>> {
        if d == 0 {
            return Err(Error::input("d must be positive"));
        }
        let phi_factors = factor_by_trial_division(self.group_order.max(2));
        let mut out = Vec::new();
        for &(p, v) in &phi_factors {
            if !self.group_order.is_multiple_of(p) {
                continue;
            }
            // kappa(m) <= v for all m, so 10 v >= d m bounds the search.
            let bound = (10 * v as u64).div_ceil(d as u64) as u32;
            let mut best = 0;
            for m in 1..=bound {
                let kappa = self.p_kernel_exponent(p, m);
                if 10 * kappa as u64 >= d as u64 * m as u64 {
                    best = m;
                }
            }
            if best > 0 {
                out.push((p, best));
            }
        }
        Ok(out)
    }

    /// `kappa` with `K(p^m) = p^kappa`.
    fn p_kernel_exponent(&self, p: u64, m: u32) -> u32 {
        self.components
            .iter()
            .map(|c| {
                let mut o = c.order;
                let mut v = 0;
                while o % p == 0 && v < m {
                    o /= p;
                    v += 1;
                }
                v
            })
            .sum()
    }

    /// All units in increasing order (brute force; for oracles and small `N`).
    pub fn units(&self) -> Vec<u64> {
        (1..self.modulus).filter(|&a| gcd_u64(a, self.modulus) == 1).collect()
    }
}

/// `d = ceil(sqrt(ln N))` with natural logarithm, exact at perfect-square boundaries.
pub fn default_dimension(n: u64) -> u32 {
    let ln = (n as f64).ln();
    let mut d = ln.sqrt().ceil().max(1.0) as u32;
    // Guard against floating error around ln N = d^2.
    while d > 1 && ((d - 1) as f64).powi(2) >= ln {
        d -= 1;
    }
    while (d as f64).powi(2) < ln {
        d += 1;
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_order(a: u64, n: u64) -> u64 {
        let mut x = a % n;
        let mut r = 1;
        while x != 1 {
            x = x * a % n;
            r += 1;
        }
        r
    }

    #[test]
    fn structure_examples() {
        let g = UnitGroupStructure::new(15).unwrap();
        let mut orders = g.orders();
        orders.sort_unstable();
        assert_eq!(orders, vec![2, 4]);
        assert_eq!(g.group_order, 8);
        // Brute-force check that the units of 15 have that structure:
        // four elements of order <= 2, and exponent 4.
        let units = g.units();
        assert_eq!(units.len(), 8);
        assert_eq!(units.iter().filter(|&&a| brute_order(a, 15) <= 2).count(), 4);
        assert_eq!(units.iter().map(|&a| brute_order(a, 15)).max(), Some(4));

        let g = UnitGroupStructure::new(7).unwrap();
        assert_eq!(g.orders(), vec![6]);

        let g = UnitGroupStructure::new(1081).unwrap();
        assert_eq!(g.orders(), vec![22, 46]);
        assert_eq!(g.group_order, 1012);
    }

    #[test]
    fn powers_of_two() {
        assert!(UnitGroupStructure::new(2).is_err());
        assert_eq!(UnitGroupStructure::new(4).unwrap().orders(), vec![2]);
        assert_eq!(UnitGroupStructure::new(8).unwrap().orders(), vec![2, 2]);
        assert_eq!(UnitGroupStructure::new(32).unwrap().orders(), vec![2, 8]);
        assert_eq!(UnitGroupStructure::new(6).unwrap().orders(), vec![2]);
        assert_eq!(UnitGroupStructure::new(96).unwrap().orders(), vec![2, 8, 2]);
    }

    #[test]
    fn generators_have_stated_orders() {
        for n in 3..600u64 {
            let g = UnitGroupStructure::new(n).unwrap();
            assert_eq!(g.orders().iter().product::<u64>(), g.group_order);
            for c in &g.components {
                assert_eq!(brute_order(c.generator, n), c.order, "N={n}");
            }
        }
    }

    #[test]
    fn dlog_examples() {
        let g7 = UnitGroupStructure::new(7).unwrap();
        assert_eq!(g7.dlog_vector(1).unwrap(), ExponentVector(vec![0]));
        let gen = g7.components[0].generator;
        assert_eq!(g7.dlog_vector(gen).unwrap(), ExponentVector(vec![1]));
        let g15 = UnitGroupStructure::new(15).unwrap();
        let v = g15.dlog_vector(2).unwrap();
        let signed: Vec<i64> = v.coords().iter().map(|&x| x as i64).collect();
        assert_eq!(g15.element_from_coords(&signed), 2);
        assert!(matches!(g15.dlog_vector(5), Err(Error::Input(_))));
    }

    #[test]
    fn order_examples() {
        let g = UnitGroupStructure::new(15).unwrap();
        assert_eq!(g.element_order(2).unwrap(), 4);
        assert_eq!(g.element_order(1).unwrap(), 1);
        assert_eq!(g.element_order(14).unwrap(), 2);
        assert!(g.element_order(3).is_err());
    }

    #[test]
    fn kernel_examples() {
        let g = UnitGroupStructure::new(15).unwrap();
        assert_eq!(g.kernel_size(2), 4);
        assert_eq!(g.kernel_size(1), 1);
        assert_eq!(g.kernel_size(4), 8);
    }

    #[test]
    fn m_star_example() {
        let g = UnitGroupStructure::new(15).unwrap();
        assert_eq!(g.m_star(2).unwrap(), 32768);
        // Exhaustive re-evaluation of the defining inequality for p = 2, 3.
        for m in 0..40u32 {
            let k = g.kernel_size(1u128 << m) as f64;
            let holds = k >= 2f64.powf(2.0 * m as f64 / 10.0);
            assert_eq!(holds, m <= 15, "m={m}");
        }
        assert!((g.kernel_size(3) as f64) < 3f64.powf(0.2));
        assert!((32768f64) <= (20f64).exp());
    }

    #[test]
    fn m_star_trivial_when_no_prime_qualifies() {
        // N = 3: G = Z/2, K(2^m) = 2, and 10 * 1 >= d m fails for m >= 1 once d > 10.
        let g = UnitGroupStructure::new(3).unwrap();
        assert_eq!(g.m_star(11).unwrap(), 1);
        assert_eq!(g.m_star(10).unwrap(), 2);
    }

    #[test]
    fn default_dimension_values() {
        assert_eq!(default_dimension(15), 2);
        assert_eq!(default_dimension(3), 2);
        assert_eq!(default_dimension(2), 1);
        assert_eq!(default_dimension(1081), 3);
        assert_eq!(default_dimension(8103), 3);
        assert_eq!(default_dimension(8104), 4);
        // ln N in (9, 16] gives d = 4.
        assert_eq!(default_dimension(10_000), 4);
        assert_eq!(default_dimension(8_886_110), 4);
        assert_eq!(default_dimension(8_886_111), 5);
    }
}
