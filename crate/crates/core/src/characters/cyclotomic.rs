//! Exact arithmetic in `Z[zeta_L]`.
//!
//! Elements are accumulated in the group ring `Z[x]/(x^L - 1)`, where
//! character values are plain monomials, and are brought to canonical form by
//! reducing modulo the cyclotomic polynomial `Phi_L`. Two accumulated
//! elements are equal in `Z[zeta_L]` exactly when their reductions agree.

use std::collections::HashMap;
use std::f64::consts::TAU;
use std::sync::{Mutex, OnceLock};

use num_complex::Complex64;

/// Integer polynomial, coefficient `i` belongs to `x^i`.
type Poly = Vec<i128>;

fn trim(p: &mut Poly) {
    while p.len() > 1 && *p.last().unwrap_or(&1) == 0 {
        p.pop();
    }
}

/// Exact division of `num` by the monic polynomial `den`.
fn div_exact_monic(num: &Poly, den: &Poly) -> Poly {
    let mut rem = num.clone();
    let dd = den.len() - 1;
    if rem.len() <= dd {
        return vec![0];
    }
    let mut quot = vec![0i128; rem.len() - dd];
    for i in (0..quot.len()).rev() {
        let c = rem[i + dd];
        quot[i] = c;
        if c != 0 {
            for (j, &dj) in den.iter().enumerate() {
                rem[i + j] -= c * dj;
            }
        }
    }
    debug_assert!(rem.iter().all(|&c| c == 0), "inexact cyclotomic division");
    trim(&mut quot);
    quot
}

/// `Phi_n` via `x^n - 1 = prod_{d | n} Phi_d`, memoized.
pub fn cyclotomic_polynomial(n: u64) -> Poly {
    static CACHE: OnceLock<Mutex<HashMap<u64, Poly>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(p) = cache.lock().expect("cache poisoned").get(&n) {
        return p.clone();
    }
    let mut p: Poly = vec![0; n as usize + 1];
    p[0] = -1;
    p[n as usize] = 1;
    for d in 1..n {
        if n.is_multiple_of(d) {
            p = div_exact_monic(&p, &cyclotomic_polynomial(d));
        }
    }
    cache.lock().expect("cache poisoned").insert(n, p.clone());
    p
}

/// An element of `Z[x]/(x^L - 1)` mapped to `Z[zeta_L]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cyclotomic {
    order: u64,
    coeffs: Vec<i128>,
}

impl Cyclotomic {
    pub fn zero(order: u64) -> Self {
        assert!(order >= 1);
        Cyclotomic {
            order,
            coeffs: vec![0; order as usize],
        }
    }

    pub fn from_integer(order: u64, value: i128) -> Self {
        let mut z = Self::zero(order);
        z.coeffs[0] = value;
        z
    }

    /// `zeta_L^index`.
    pub fn monomial(order: u64, index: u64) -> Self {
        let mut z = Self::zero(order);
        z.coeffs[(index % order) as usize] = 1;
        z
    }

    pub fn order(&self) -> u64 {
        self.order
    }

    pub fn add_monomial(&mut self, index: u64, coefficient: i128) {
        let slot = &mut self.coeffs[(index % self.order) as usize];
        *slot = slot.checked_add(coefficient).expect("cyclotomic coefficient overflow");
    }

    pub fn add_assign(&mut self, other: &Cyclotomic) {
        assert_eq!(self.order, other.order);
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a = a.checked_add(*b).expect("cyclotomic coefficient overflow");
        }
    }

    pub fn scale(&mut self, factor: i128) {
        for c in &mut self.coeffs {
            *c = c.checked_mul(factor).expect("cyclotomic coefficient overflow");
        }
    }

    pub fn mul(&self, other: &Cyclotomic) -> Cyclotomic {
        assert_eq!(self.order, other.order);
        let l = self.order as usize;
        let mut out = Cyclotomic::zero(self.order);
        let nonzero: Vec<(usize, i128)> = other
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, &c)| c != 0)
            .map(|(j, &c)| (j, c))
            .collect();
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for &(j, b) in &nonzero {
                let slot = &mut out.coeffs[(i + j) % l];
                let term = a.checked_mul(b).expect("cyclotomic coefficient overflow");
                *slot = slot.checked_add(term).expect("cyclotomic coefficient overflow");
            }
        }
        out
    }

    /// Canonical coefficients modulo `Phi_L`, of length `< phi(L)`, trimmed.
    pub fn reduced(&self) -> Vec<i128> {
        let phi = cyclotomic_polynomial(self.order);
        let deg = phi.len() - 1;
        let mut rem = self.coeffs.clone();
        for i in (deg..rem.len()).rev() {
            let c = rem[i];
            if c != 0 {
                for (j, &pj) in phi.iter().enumerate() {
                    rem[i - deg + j] -= c * pj;
                }
            }
        }
        rem.truncate(deg.max(1));
        trim(&mut rem);
        rem
    }

    /// `Some(c)` when the element equals the rational integer `c`.
    pub fn as_integer(&self) -> Option<i128> {
        let r = self.reduced();
        (r.len() == 1).then(|| r[0])
    }

    pub fn is_zero(&self) -> bool {
        self.as_integer() == Some(0)
    }

    /// Floating-point value at `zeta_L = exp(2 pi i / L)`.
    pub fn to_complex(&self) -> Complex64 {
        let l = self.order as f64;
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, &c)| c != 0)
            .map(|(j, &c)| Complex64::from_polar(c as f64, TAU * j as f64 / l))
            .sum()
    }
}
