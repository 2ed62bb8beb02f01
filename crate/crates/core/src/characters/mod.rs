//! Dirichlet characters modulo `N` and character-sum lattice point counts.
//!
//! A character is stored by its frequencies `f_i` against the cyclic
//! components of `(Z/NZ)^x`: `chi(a) = exp(2 pi i sum f_i v_i / o_i)` where
//! `v = dlog_vector(a)`. Values are handled exactly as powers of
//! `zeta_L`, `L` the group exponent; sums of them live in [`Cyclotomic`].

mod cyclotomic;
mod primes;

pub use cyclotomic::{cyclotomic_polynomial, Cyclotomic};
pub use primes::{
    exceptional_histogram, prime_char_average, prime_char_sum_exact, primes_up_to, residue_tally, second_moment_estimate,
    Bucket, CharSumProfile, ExceptionalHistogram, HistogramRow, PrimeResidueTally, SecondMoment, SIEVE_BUDGET,
};

use std::collections::HashMap;
use std::f64::consts::TAU;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::arith::{gcd_u64, lcm_u64, mul_mod};
use crate::error::{Error, Result};
use crate::group::UnitGroupStructure;
use crate::lattice::subgroup_size;

/// Most characters any single enumeration will visit.
pub const DUAL_BUDGET: u64 = 2_000_000;

/// Most exponent vectors a direct box enumeration will visit.
pub const BOX_BUDGET: u128 = 100_000_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DirichletCharacter<'a> {
    structure: &'a UnitGroupStructure,
    frequencies: Vec<u64>,
}

/// `zeta_order^index`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RootOfUnity {
    pub index: u64,
    pub order: u64,
}

impl RootOfUnity {
    pub fn is_one(&self) -> bool {
        self.index == 0
    }

    pub fn to_complex(&self) -> Complex64 {
        Complex64::from_polar(1.0, TAU * self.index as f64 / self.order as f64)
    }
}

impl<'a> DirichletCharacter<'a> {
    pub fn new(structure: &'a UnitGroupStructure, frequencies: Vec<u64>) -> Result<Self> {
        let orders = structure.orders();
        if frequencies.len() != orders.len() {
            return Err(Error::input(format!(
                "{} frequencies for {} components",
                frequencies.len(),
                orders.len()
            )));
        }
        if frequencies.iter().zip(&orders).any(|(f, o)| f >= o) {
            return Err(Error::input("frequency out of range"));
        }
        Ok(DirichletCharacter { structure, frequencies })
    }

    pub fn principal(structure: &'a UnitGroupStructure) -> Self {
        DirichletCharacter {
            structure,
            frequencies: vec![0; structure.rank()],
        }
    }

    pub fn structure(&self) -> &'a UnitGroupStructure {
        self.structure
    }

    pub fn frequencies(&self) -> &[u64] {
        &self.frequencies
    }

    pub fn is_principal(&self) -> bool {
        self.frequencies.iter().all(|&f| f == 0)
    }

    /// Index of `chi` at the unit with coordinates `v`, modulo the exponent `L`.
    pub fn index_at_coords(&self, v: &[u64]) -> u64 {
        value_index(self.structure, &self.frequencies, v)
    }

    /// `chi(a)` as a power of `zeta_L`.
    pub fn eval_exact(&self, a: u64) -> Result<RootOfUnity> {
        let v = self.structure.dlog_vector(a)?;
        Ok(RootOfUnity {
            index: self.index_at_coords(v.coords()),
            order: self.structure.exponent(),
        })
    }

    pub fn eval(&self, a: u64) -> Result<Complex64> {
        Ok(self.eval_exact(a)?.to_complex())
    }

    /// Least `n >= 1` with `chi^n` principal.
    pub fn order(&self) -> u64 {
        self.structure
            .orders()
            .iter()
            .zip(&self.frequencies)
            .fold(1, |acc, (&o, &f)| lcm_u64(acc, o / gcd_u64(o, f)))
    }

    /// `chi^h`, for any integer `h`.
    pub fn power(&self, h: i64) -> Self {
        let frequencies = self
            .structure
            .orders()
            .iter()
            .zip(&self.frequencies)
            .map(|(&o, &f)| mul_mod(f, h.rem_euclid(o as i64) as u64, o))
            .collect();
        DirichletCharacter {
            structure: self.structure,
            frequencies,
        }
    }
}

fn value_index(structure: &UnitGroupStructure, frequencies: &[u64], v: &[u64]) -> u64 {
    let l = structure.exponent() as u128;
    structure
        .components
        .iter()
        .zip(frequencies)
        .zip(v)
        .fold(0u128, |acc, ((c, &f), &x)| {
            let o = c.order as u128;
            (acc + (f as u128 * x as u128 % o) * (l / o)) % l
        }) as u64
}

/// Iterates frequency vectors `f` with `f_i` a multiple of `steps[i]`.
struct FrequencyOdometer {
    orders: Vec<u64>,
    steps: Vec<u64>,
    next: Option<Vec<u64>>,
}

impl Iterator for FrequencyOdometer {
    type Item = Vec<u64>;

    fn next(&mut self) -> Option<Vec<u64>> {
        let current = self.next.take()?;
        let mut succ = current.clone();
        let mut i = 0;
        loop {
            if i == succ.len() {
                break;
            }
            succ[i] += self.steps[i];
            if succ[i] < self.orders[i] {
                self.next = Some(succ);
                break;
            }
            succ[i] = 0;
            i += 1;
        }
        Some(current)
    }
}

/// Size of the subgroup of `M`-th powers of characters, `prod o_i / gcd(M, o_i)`.
pub fn power_subgroup_size(structure: &UnitGroupStructure, power: u128) -> u64 {
    structure
        .orders()
        .iter()
        .map(|&o| o / gcd_u64((power % o as u128) as u64, o))
        .product()
}

fn odometer(structure: &UnitGroupStructure, power: u128) -> FrequencyOdometer {
    let orders = structure.orders();
    let steps = orders.iter().map(|&o| gcd_u64((power % o as u128) as u64, o)).collect();
    FrequencyOdometer {
        next: Some(vec![0; orders.len()]),
        orders,
        steps,
    }
}

/// Every character of `(Z/NZ)^x`.
pub fn dual_group(structure: &UnitGroupStructure) -> impl Iterator<Item = DirichletCharacter<'_>> {
    power_subgroup(structure, 1)
}

/// The characters that are `M`-th powers: the frequencies divisible by
/// `gcd(M, o_i)` in each coordinate.
pub fn power_subgroup(structure: &UnitGroupStructure, power: u128) -> impl Iterator<Item = DirichletCharacter<'_>> {
    odometer(structure, power).map(move |frequencies| DirichletCharacter { structure, frequencies })
}

fn check_dual_budget(structure: &UnitGroupStructure, power: u128) -> Result<u64> {
    let size = power_subgroup_size(structure, power);
    if size > DUAL_BUDGET {
        return Err(Error::resource("character enumeration", size, DUAL_BUDGET));
    }
    Ok(size)
}

/// `sum_{|h| <= H} zeta_L^{j h}` as a real number.
fn symmetric_sum(j: u64, order: u64, half_width: u64) -> f64 {
    if j.is_multiple_of(order) {
        return (2 * half_width + 1) as f64;
    }
    let theta = TAU * j as f64 / order as f64;
    ((2 * half_width + 1) as f64 * theta / 2.0).sin() / (theta / 2.0).sin()
}

fn symmetric_sum_exact(j: u64, order: u64, half_width: u64) -> Cyclotomic {
    let mut s = Cyclotomic::zero(order);
    let j = j % order;
    for h in 0..=half_width {
        let idx = (j as u128 * h as u128 % order as u128) as u64;
        s.add_monomial(idx, 1);
        if h > 0 {
            s.add_monomial((order - idx) % order, 1);
        }
    }
    s
}

/// `F_{chi,H}(b) = prod_i sum_{|h| <= H} chi(b_i)^h`, by the closed form of
/// each geometric sum.
pub fn f_chi_h(chi: &DirichletCharacter<'_>, half_width: u64, elements: &[u64]) -> Result<Complex64> {
    let l = chi.structure.exponent();
    let mut acc = 1.0;
    for &b in elements {
        acc *= symmetric_sum(chi.eval_exact(b)?.index, l, half_width);
    }
    Ok(Complex64::new(acc, 0.0))
}

/// [`f_chi_h`] as an exact element of `Z[zeta_L]`.
pub fn f_chi_h_exact(chi: &DirichletCharacter<'_>, half_width: u64, elements: &[u64]) -> Result<Cyclotomic> {
    let l = chi.structure.exponent();
    let mut acc = Cyclotomic::from_integer(l, 1);
    for &b in elements {
        acc = acc.mul(&symmetric_sum_exact(chi.eval_exact(b)?.index, l, half_width));
    }
    Ok(acc)
}

fn scaled_coords(structure: &UnitGroupStructure, elements: &[u64], power: u128) -> Result<Vec<Vec<u64>>> {
    let orders = structure.orders();
    elements
        .iter()
        .map(|&b| {
            let v = structure.dlog_vector(b)?;
            Ok(v.coords()
                .iter()
                .zip(&orders)
                .map(|(&x, &o)| mul_mod(x, (power % o as u128) as u64, o))
                .collect())
        })
        .collect()
}

/// `#{e in [-H, H]^k : prod b_i^{M e_i} = 1}` by walking the whole box in
/// exponent-vector coordinates.
pub fn count_box_relations(structure: &UnitGroupStructure, power: u128, half_width: u64, elements: &[u64]) -> Result<u128> {
    let k = elements.len();
    let side = 2 * half_width as u128 + 1;
    let total = side.checked_pow(k as u32).filter(|&t| t <= BOX_BUDGET);
    if total.is_none() {
        return Err(Error::resource("box enumeration", format!("{side}^{k}"), BOX_BUDGET));
    }
    let orders = structure.orders();
    let coords = scaled_coords(structure, elements, power)?;
    let h = half_width as i64;
    // Running sum, updated incrementally as the odometer advances.
    let mut e = vec![-h; k];
    let mut sum = vec![0u64; orders.len()];
    let add = |sum: &mut [u64], row: &[u64], times: i64| {
        for ((s, &x), &o) in sum.iter_mut().zip(row).zip(&orders) {
            let t = mul_mod(x, times.rem_euclid(o as i64) as u64, o);
            *s = (*s + t) % o;
        }
    };
    for (i, row) in coords.iter().enumerate() {
        add(&mut sum, row, e[i]);
    }
    let mut count = 0u128;
    loop {
        if sum.iter().all(|&s| s == 0) {
            count += 1;
        }
        let mut i = 0;
        loop {
            if i == k {
                return Ok(count);
            }
            if e[i] < h {
                e[i] += 1;
                add(&mut sum, &coords[i], 1);
                break;
            }
            add(&mut sum, &coords[i], -2 * h);
            e[i] = -h;
            i += 1;
        }
    }
}

/// Both sides of the lattice point count by characters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CharacterCount {
    /// Direct enumeration.
    pub lhs: u128,
    /// `(1/|G^M|) sum_chi F_{chi,H}` in floating point.
    pub rhs: Complex64Repr,
    /// Canonical coefficients of `sum_chi F_{chi,H}` in `Z[zeta_L]`.
    pub rhs_numerator: Vec<i128>,
    pub dual_size: u64,
}

/// Serializable complex number.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Complex64Repr {
    pub re: f64,
    pub im: f64,
}

impl From<Complex64> for Complex64Repr {
    fn from(z: Complex64) -> Self {
        Complex64Repr { re: z.re, im: z.im }
    }
}

impl CharacterCount {
    /// The character side as an exact rational, if it is one.
    pub fn rhs_exact(&self) -> Option<BigRational> {
        (self.rhs_numerator.len() == 1)
            .then(|| BigRational::new(BigInt::from(self.rhs_numerator[0]), BigInt::from(self.dual_size)))
    }

    pub fn identity_holds(&self) -> bool {
        self.rhs_exact() == Some(BigRational::from_integer(BigInt::from(self.lhs)))
    }
}

fn character_sum<'a>(
    structure: &'a UnitGroupStructure,
    power: u128,
    half_width: u64,
    elements: &[u64],
    mut keep: impl FnMut(&DirichletCharacter<'a>, &[u64]) -> bool,
) -> Result<(Cyclotomic, Complex64, u64)> {
    let l = structure.exponent();
    let coords: Vec<Vec<u64>> = elements
        .iter()
        .map(|&b| Ok(structure.dlog_vector(b)?.0))
        .collect::<Result<_>>()?;
    let mut exact = Cyclotomic::zero(l);
    let mut float = Complex64::zero();
    let mut kept = 0;
    // Inner sums depend only on the value index, so cache them.
    let mut cache: HashMap<u64, Cyclotomic> = HashMap::new();
    for chi in power_subgroup(structure, power) {
        let indices: Vec<u64> = coords.iter().map(|v| chi.index_at_coords(v)).collect();
        if !keep(&chi, &indices) {
            continue;
        }
        kept += 1;
        let mut term = Cyclotomic::from_integer(l, 1);
        let mut fterm = 1.0;
        for &j in &indices {
            let s = cache.entry(j).or_insert_with(|| symmetric_sum_exact(j, l, half_width));
            term = term.mul(s);
            fterm *= symmetric_sum(j, l, half_width);
        }
        exact.add_assign(&term);
        float += fterm;
    }
    Ok((exact, float, kept))
}

/// Counts `e in [-H, H]^k` with `prod b_i^{M e_i} = 1` twice: by direct
/// enumeration, and as the average of `F_{chi,H}(b)` over the `M`-th power
/// characters.
pub fn count_by_characters(structure: &UnitGroupStructure, power: u128, half_width: u64, elements: &[u64]) -> Result<CharacterCount> {
    if power == 0 || half_width == 0 {
        return Err(Error::input("M and H must be positive"));
    }
    let dual_size = check_dual_budget(structure, power)?;
    let lhs = count_box_relations(structure, power, half_width, elements)?;
    let (exact, float, _) = character_sum(structure, power, half_width, elements, |_, _| true)?;
    Ok(CharacterCount {
        lhs,
        rhs: (float / dual_size as f64).into(),
        rhs_numerator: exact.reduced(),
        dual_size,
    })
}

/// `(2H + 1)^k / |<b_1^M, ..., b_k^M>|`, with the subgroup size taken
/// from the relation lattice index.
pub fn orthogonal_contribution(structure: &UnitGroupStructure, power: u128, half_width: u64, elements: &[u64]) -> Result<BigRational> {
    let size = subgroup_size(structure, elements, power)?;
    let volume = BigInt::from(2 * half_width + 1).pow(elements.len() as u32);
    Ok(BigRational::new(volume, BigInt::from(size)))
}

/// Split of the character count into the characters trivial on every
/// `b_i` and the rest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MainTermDecomposition {
    pub lhs: u128,
    #[serde(with = "crate::serde_util::rational")]
    pub orthogonal: BigRational,
    /// Characters of the power subgroup trivial on all `b_i`.
    pub orthogonal_characters: u64,
    pub dual_size: u64,
    /// Canonical coefficients of the remaining character sum.
    pub remainder_numerator: Vec<i128>,
    pub remainder: Complex64Repr,
}

impl MainTermDecomposition {
    pub fn remainder_exact(&self) -> Option<BigRational> {
        match self.remainder_numerator.as_slice() {
            [c] => Some(BigRational::new(BigInt::from(*c), BigInt::from(self.dual_size))),
            _ => None,
        }
    }

    /// `lhs == orthogonal + remainder`, exactly.
    pub fn identity_holds(&self) -> bool {
        self.remainder_exact()
            .is_some_and(|r| &self.orthogonal + r == BigRational::from_integer(BigInt::from(self.lhs)))
    }
}

pub fn decompose_count(structure: &UnitGroupStructure, power: u128, half_width: u64, elements: &[u64]) -> Result<MainTermDecomposition> {
    if power == 0 || half_width == 0 {
        return Err(Error::input("M and H must be positive"));
    }
    let dual_size = check_dual_budget(structure, power)?;
    let lhs = count_box_relations(structure, power, half_width, elements)?;
    let orthogonal = orthogonal_contribution(structure, power, half_width, elements)?;
    let mut orthogonal_characters = 0;
    let (exact, float, _) = character_sum(structure, power, half_width, elements, |_, idx| {
        let trivial = idx.iter().all(|&j| j == 0);
        orthogonal_characters += u64::from(trivial);
        !trivial
    })?;
    Ok(MainTermDecomposition {
        lhs,
        orthogonal,
        orthogonal_characters,
        dual_size,
        remainder_numerator: exact.reduced(),
        remainder: (float / dual_size as f64).into(),
    })
}

/// `sum_{chi} chi(a)` over all characters, in `Z[zeta_L]`.
pub fn orthogonality_sum(structure: &UnitGroupStructure, a: u64) -> Result<Cyclotomic> {
    check_dual_budget(structure, 1)?;
    let v = structure.dlog_vector(a)?;
    let mut s = Cyclotomic::zero(structure.exponent());
    for chi in dual_group(structure) {
        s.add_monomial(chi.index_at_coords(v.coords()), 1);
    }
    Ok(s)
}

/// Largest number of `chi` in the `M`-th power characters sharing the same
/// `chi^h`, by tallying every `chi^h`.
pub fn max_root_multiplicity(structure: &UnitGroupStructure, power: u128, h: u64) -> Result<u64> {
    check_dual_budget(structure, power)?;
    let mut tally: HashMap<Vec<u64>, u64> = HashMap::new();
    for chi in power_subgroup(structure, power) {
        *tally.entry(chi.power(h as i64).frequencies).or_default() += 1;
    }
    Ok(tally.values().copied().max().unwrap_or(0))
}

/// The same multiplicity from the structure: `prod gcd(h, o_i / gcd(M, o_i))`.
pub fn root_multiplicity(structure: &UnitGroupStructure, power: u128, h: u64) -> u64 {
    structure
        .orders()
        .iter()
        .map(|&o| {
            let sub = o / gcd_u64((power % o as u128) as u64, o);
            gcd_u64(h % sub, sub)
        })
        .product()
}

/// Exact test of `n <= h^{d/10}`, i.e. `n^10 <= h^d`.
pub fn within_power_tenth(n: u64, h: u64, d: u32) -> bool {
    BigInt::from(n).pow(10) <= BigInt::from(h).pow(d)
}

/// Number of characters of order exactly `k`.
pub fn count_characters_of_order(structure: &UnitGroupStructure, k: u64) -> Result<u64> {
    check_dual_budget(structure, 1)?;
    Ok(dual_group(structure).filter(|c| c.order() == k).count() as u64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::brute_force_subgroup_size;

    fn s(n: u64) -> UnitGroupStructure {
        UnitGroupStructure::new(n).unwrap()
    }

    fn brute_count(n: u64, power: u128, h: i64, elements: &[u64]) -> u128 {
        // Plain modular arithmetic over the box.
        let g = s(n);
        let k = elements.len();
        let mut e = vec![-h; k];
        let mut count = 0;
        loop {
            let big: Vec<BigInt> = e.iter().map(|&x| BigInt::from(x)).collect();
            if crate::lattice::evaluate_relation(&g, elements, power, &big).unwrap() == 1 {
                count += 1;
            }
            let mut i = 0;
            loop {
                if i == k {
                    return count;
                }
                if e[i] < h {
                    e[i] += 1;
                    break;
                }
                e[i] = -h;
                i += 1;
            }
        }
    }

    #[test]
    fn evaluation_basics() {
        let g = s(15);
        let chi0 = DirichletCharacter::principal(&g);
        for a in g.units() {
            assert_eq!(chi0.eval(a).unwrap(), Complex64::new(1.0, 0.0));
        }
        for chi in dual_group(&g) {
            assert!(chi.eval_exact(1).unwrap().is_one());
            for a in g.units() {
                assert!((chi.eval(a).unwrap().norm() - 1.0).abs() < 1e-12);
                for b in g.units() {
                    let ab = a * b % 15;
                    let lhs = chi.eval_exact(ab).unwrap().index;
                    let rhs = (chi.eval_exact(a).unwrap().index + chi.eval_exact(b).unwrap().index) % g.exponent();
                    assert_eq!(lhs, rhs);
                }
            }
        }
        assert!(matches!(chi0.eval(5), Err(Error::Input(_))));
    }

    #[test]
    fn real_characters_of_15() {
        // Real characters at 14 = -1 square to one.
        let g = s(15);
        for chi in dual_group(&g).filter(|c| c.order() == 2) {
            let v = chi.eval(14).unwrap();
            assert!((v.re.abs() - 1.0).abs() < 1e-12 && v.im.abs() < 1e-12);
            assert!(((v * v).re - 1.0).abs() < 1e-12);
        }
        assert_eq!(count_characters_of_order(&g, 2).unwrap(), 3);
    }

    #[test]
    fn orders() {
        let g = s(15);
        assert_eq!(DirichletCharacter::principal(&g).order(), 1);
        // Orders are (2, 4) in component order; frequencies (2 on the order-4
        // factor, 1 on the order-2 factor).
        let orders = g.orders();
        let freq: Vec<u64> = orders.iter().map(|&o| if o == 4 { 2 } else { 1 }).collect();
        assert_eq!(DirichletCharacter::new(&g, freq).unwrap().order(), 2);
        assert_eq!(count_characters_of_order(&s(1081), 2).unwrap(), 3);
    }

    #[test]
    fn inner_sums() {
        let g = s(7);
        let chi0 = DirichletCharacter::principal(&g);
        assert_eq!(f_chi_h(&chi0, 3, &[2, 3, 5]).unwrap().re, 343.0);
        // A character with chi(b) = -1: the alternating sum over -2..2.
        let quad = dual_group(&g).find(|c| c.order() == 2).unwrap();
        let b = g.units().into_iter().find(|&b| quad.eval_exact(b).unwrap().index != 0).unwrap();
        assert!((f_chi_h(&quad, 2, &[b]).unwrap().re - 1.0).abs() < 1e-12);
        assert_eq!(f_chi_h_exact(&quad, 2, &[b]).unwrap().as_integer(), Some(1));
    }

    #[test]
    fn closed_form_matches_double_loop() {
        for n in [7u64, 15, 16, 21, 45, 63, 100] {
            let g = s(n);
            let units = g.units();
            for chi in dual_group(&g).step_by(3) {
                for hw in 1..=6u64 {
                    let elems = [units[1 % units.len()], units[units.len() - 1], units[units.len() / 2]];
                    let mut brute = Complex64::new(1.0, 0.0);
                    for &b in &elems {
                        let z = chi.eval(b).unwrap();
                        let mut inner = Complex64::zero();
                        for h in -(hw as i32)..=(hw as i32) {
                            inner += z.powi(h);
                        }
                        brute *= inner;
                    }
                    let fast = f_chi_h(&chi, hw, &elems).unwrap();
                    assert!((fast - brute).norm() < 1e-8 * (1.0 + brute.norm()), "N={n}");
                    let exact = f_chi_h_exact(&chi, hw, &elems).unwrap();
                    assert!((exact.to_complex() - brute).norm() < 1e-8 * (1.0 + brute.norm()));
                }
            }
        }
    }

    #[test]
    fn count_examples() {
        let g = s(15);
        let c = count_by_characters(&g, 1, 4, &[2]).unwrap();
        assert_eq!(c.lhs, 3);
        assert!(c.identity_holds());
        let c = count_by_characters(&g, 1, 3, &[1]).unwrap();
        assert_eq!(c.lhs, 7);
        assert!(c.identity_holds());
    }

    #[test]
    fn counts_match_on_grid() {
        for n in [9u64, 15, 21, 35, 45, 105] {
            let g = s(n);
            let units = g.units();
            for k in 1..=3usize {
                for power in [1u128, 2, 6] {
                    for hw in [1u64, 3, 8] {
                        let elems: Vec<u64> = (0..k).map(|i| units[(5 * i + 2) % units.len()]).collect();
                        let c = count_by_characters(&g, power, hw, &elems).unwrap();
                        assert!(c.identity_holds(), "N={n} M={power} H={hw} b={elems:?}: {c:?}");
                        assert_eq!(c.lhs, brute_count(n, power, hw as i64, &elems));
                        assert!((c.rhs.re - c.lhs as f64).abs() < 1e-6 && c.rhs.im.abs() < 1e-9);
                    }
                }
            }
        }
    }

    #[test]
    fn orthogonal_examples() {
        let g = s(15);
        let q = |a: i64, b: i64| BigRational::new(BigInt::from(a), BigInt::from(b));
        assert_eq!(orthogonal_contribution(&g, 1, 4, &[2]).unwrap(), q(9, 4));
        assert_eq!(orthogonal_contribution(&g, 1, 2, &[1, 1]).unwrap(), q(25, 1));
        assert_eq!(orthogonal_contribution(&g, 1, 2, &[2, 7]).unwrap(), q(25, 8));
    }

    #[test]
    fn decomposition_holds() {
        for n in [15u64, 21, 45, 105] {
            let g = s(n);
            let units = g.units();
            for power in [1u128, 2, 6] {
                let elems = [units[1], units[units.len() / 3]];
                let d = decompose_count(&g, power, 3, &elems).unwrap();
                assert!(d.identity_holds(), "{d:?}");
                let size = brute_force_subgroup_size(&g, &elems, power);
                assert_eq!(d.orthogonal, BigRational::new(BigInt::from(49), BigInt::from(size)));
                // The orthogonal characters are exactly the annihilator of <b^M>.
                assert_eq!(d.orthogonal_characters * size, d.dual_size);
            }
        }
    }

    #[test]
    fn orthogonality_relation() {
        for n in 3..=60u64 {
            let g = s(n);
            for a in g.units() {
                let sum = orthogonality_sum(&g, a).unwrap();
                let expected = if a == 1 { g.group_order as i128 } else { 0 };
                assert_eq!(sum.as_integer(), Some(expected), "N={n} a={a}");
            }
        }
    }

    #[test]
    fn power_subgroup_sizes() {
        for n in 3..=120u64 {
            let g = s(n);
            for power in 1..=12u128 {
                let count = power_subgroup(&g, power).count() as u64;
                assert_eq!(count, power_subgroup_size(&g, power));
                assert_eq!(count * g.kernel_size(power), g.group_order);
                // Membership agrees with "is an M-th power of some character".
                let powers: std::collections::HashSet<Vec<u64>> =
                    dual_group(&g).map(|c| c.power(power as i64).frequencies).collect();
                assert_eq!(powers.len() as u64, count);
                for chi in power_subgroup(&g, power) {
                    assert!(powers.contains(chi.frequencies()));
                }
            }
        }
    }

    #[test]
    fn root_multiplicity_formula() {
        for n in [15u64, 63, 64, 105, 360] {
            let g = s(n);
            for power in [1u128, 2, 4] {
                for h in 1..=12 {
                    assert_eq!(max_root_multiplicity(&g, power, h).unwrap(), root_multiplicity(&g, power, h));
                }
            }
        }
        assert!(within_power_tenth(1, 5, 1));
        assert!(!within_power_tenth(2, 2, 9));
        assert!(within_power_tenth(2, 2, 10));
    }
}
