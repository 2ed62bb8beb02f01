//! Factoring, discrete logarithms and order finding from relation lattices.
//!
//! The quantum step is replaced by the exact relation lattice computed from
//! the group structure, so outcomes depend only on the sampled inputs and on
//! the final order-to-factor step.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive};
use serde::{Deserialize, Serialize};

use crate::arith::{
    gcd_u64, is_prime_u64, mod_inverse, mod_pow_u64, mul_mod, mulexp_product_tree, perfect_power,
};
use crate::characters::dual_group;
use crate::error::{Error, Result};
use crate::group::{factor_integer, default_dimension, UnitGroupStructure};
use crate::lattice::{
    check_lattice_invariants, default_delta, hnf_basis, lll_reduce, relation_lattice, IntMatrix, LatticeInvariantReport,
    RelationLattice,
};
use crate::sampler::{default_draws, reduce_mod, sample_primes, sample_unit, SeededStream};

pub const DEFAULT_RETRIES: u32 = 8;

/// Optional replacements for the formula values.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParamOverrides {
    pub d: Option<u32>,
    /// Decimal string, so huge bounds round-trip.
    pub x: Option<String>,
    pub h_cap: Option<u64>,
    pub k_draws: Option<u64>,
    pub retries: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegevParams {
    pub modulus: u64,
    /// Bit length of `N`.
    pub n: u32,
    pub d: u32,
    #[serde(with = "crate::serde_util::biguint")]
    pub x: BigUint,
    pub h_cap: Option<u64>,
    pub k_draws: u64,
    pub retries: u32,
    /// `X` differs from `d^{1000 d}`.
    pub scaled: bool,
    pub overrides: ParamOverrides,
}

/// `d = ceil(sqrt(ln N))`, `X = d^{1000 d}`, `d^4` draws, unless overridden.
pub fn derive_params(modulus: u64, overrides: &ParamOverrides) -> Result<RegevParams> {
    if modulus < 3 {
        return Err(Error::input(format!("modulus must be at least 3, got {modulus}")));
    }
    let d = overrides.d.unwrap_or_else(|| default_dimension(modulus));
    if d == 0 {
        return Err(Error::input("d must be positive"));
    }
    let formula_x = BigUint::from(d).pow(1000 * d);
    let x = match &overrides.x {
        Some(s) => s
            .parse::<BigUint>()
            .map_err(|_| Error::input(format!("X is not a nonnegative integer: {s}")))?,
        None => formula_x.clone(),
    };
    if x < BigUint::from(2u8) {
        return Err(Error::input("X must be at least 2"));
    }
    let k_draws = overrides.k_draws.unwrap_or_else(|| default_draws(d));
    if k_draws < u64::from(d) {
        return Err(Error::input("k_draws must be at least d"));
    }
    Ok(RegevParams {
        modulus,
        n: 64 - modulus.leading_zeros(),
        d,
        scaled: x != formula_x,
        x,
        h_cap: overrides.h_cap,
        k_draws,
        retries: overrides.retries.unwrap_or(DEFAULT_RETRIES),
        overrides: overrides.clone(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Success,
    RetryableFailure,
    InvalidInput,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Witness {
    Divisor(u64),
    Log(u64),
    Order(u64),
    /// Exponents `(h_1, ..., h_d)` with `b_0 prod b_i^{h_i} = x`.
    Representation(Vec<u64>),
}

/// One pass through a pipeline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttemptRecord {
    pub stream: String,
    /// `b_i mod N` for the sampled primes; empty if sampling failed.
    pub prime_residues: Vec<u64>,
    pub prime_bits: Vec<u64>,
    pub unit: Option<u64>,
    pub basis_max_norm: Option<f64>,
    pub lattice_index: Option<String>,
    pub note: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub attempts: Vec<AttemptRecord>,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineOutcome {
    pub status: Status,
    pub witness: Option<Witness>,
    pub diagnostics: Diagnostics,
}

impl PipelineOutcome {
    fn invalid(message: impl Into<String>) -> Self {
        PipelineOutcome {
            status: Status::InvalidInput,
            witness: None,
            diagnostics: Diagnostics {
                attempts: Vec::new(),
                message: message.into(),
            },
        }
    }

    pub fn is_success(&self) -> bool {
        self.status == Status::Success
    }

    pub fn attempts_used(&self) -> usize {
        self.diagnostics.attempts.len()
    }
}

/// Minimal `r >= 1` with `(0, ..., 0, r)` in the lattice.
///
/// With the coordinates reversed, the Hermite form is lower triangular and
/// the vectors supported on the (reversed) first coordinate are exactly the
/// multiples of the first row.
pub fn order_from_lattice(lattice: &RelationLattice) -> Result<u64> {
    let k = lattice.ambient_dim;
    if k == 0 || lattice.basis.nrows() != k {
        return Err(Error::internal("relation lattice is not full rank"));
    }
    let form = hnf_basis(&lattice.basis.reverse_columns());
    let r = form.get(0, 0);
    if !r.is_positive() {
        return Err(Error::internal("degenerate relation lattice"));
    }
    r.to_u64().ok_or_else(|| Error::internal("order exceeds 64 bits"))
}

/// Splits `N` from an even order `r` of `x`: `gcd(N, x^{r/2} - 1)` when
/// `x^{r/2} != +-1`.
pub fn shor_split(modulus: u64, x: u64, r: u64) -> Result<Option<u64>> {
    if modulus < 3 || r == 0 {
        return Err(Error::input("need N >= 3 and r >= 1"));
    }
    if mod_pow_u64(x, r, modulus) != 1 {
        return Err(Error::input(format!("{x}^{r} is not 1 mod {modulus}")));
    }
    if r % 2 == 1 {
        return Ok(None);
    }
    let half = mod_pow_u64(x, r / 2, modulus);
    if half == 1 || half == modulus - 1 {
        return Ok(None);
    }
    let g = gcd_u64(modulus, half + modulus - 1);
    Ok((g > 1 && g < modulus).then_some(g))
}

struct Sampled {
    residues: Vec<u64>,
    bits: Vec<u64>,
}

fn sample_prime_residues(params: &RegevParams, stream: &SeededStream) -> Result<Option<Sampled>> {
    let primes = sample_primes(params.modulus, params.d as usize, &params.x, params.k_draws, stream)?;
    Ok(primes.map(|ps| Sampled {
        residues: ps.iter().map(|p| reduce_mod(p, params.modulus)).collect(),
        bits: ps.iter().map(|p| p.bits()).collect(),
    }))
}

fn record(stream: &SeededStream, sampled: Option<&Sampled>, unit: Option<u64>, note: impl Into<String>) -> AttemptRecord {
    AttemptRecord {
        stream: stream.label(),
        prime_residues: sampled.map(|s| s.residues.clone()).unwrap_or_default(),
        prime_bits: sampled.map(|s| s.bits.clone()).unwrap_or_default(),
        unit,
        basis_max_norm: None,
        lattice_index: None,
        note: note.into(),
    }
}

/// Relation lattice of `generators`, reduced by LLL: the classical stand-in
/// for the quantum output.
fn reduced_lattice(structure: &UnitGroupStructure, generators: &[u64], rec: &mut AttemptRecord) -> Result<RelationLattice> {
    let lattice = relation_lattice(structure, generators, 1)?;
    let reduced = lll_reduce(&lattice.basis, &default_delta())?;
    rec.basis_max_norm = Some(reduced.max_row_norm());
    rec.lattice_index = Some(lattice.index().to_string());
    lattice.with_basis(reduced)
}

/// Why `N` is not a valid factoring input, if it is not.
pub fn factoring_precheck(modulus: u64) -> Option<String> {
    if modulus < 3 {
        return Some(format!("modulus {modulus} is too small"));
    }
    if modulus.is_multiple_of(2) {
        return Some(format!("modulus {modulus} is even (divisor 2)"));
    }
    if is_prime_u64(modulus) {
        return Some(format!("modulus {modulus} is prime"));
    }
    if let Some((root, k)) = perfect_power(&BigUint::from(modulus)) {
        if let Some(root) = root.to_u64().filter(|&r| is_prime_u64(r)) {
            return Some(format!("modulus {modulus} = {root}^{k} is a prime power"));
        }
    }
    None
}

/// Finds a nontrivial divisor of an odd composite `N` that is not a prime
/// power, with up to `params.retries` independent attempts.
pub fn factor(modulus: u64, params: &RegevParams, stream: &SeededStream) -> Result<PipelineOutcome> {
    if let Some(reason) = factoring_precheck(modulus) {
        return Ok(PipelineOutcome::invalid(reason));
    }
    check_params(modulus, params)?;
    let structure = UnitGroupStructure::new(modulus)?;
    let mut diagnostics = Diagnostics::default();
    for attempt in 0..params.retries {
        let s = stream.child(u64::from(attempt));
        let sampled = sample_prime_residues(params, &s.child(0))?;
        let Some(sampled) = sampled else {
            diagnostics.attempts.push(record(&s, None, None, "too few primes among the draws"));
            continue;
        };
        let x = sample_unit(modulus, &s.child(1))?;
        let mut rec = record(&s, Some(&sampled), Some(x), "");
        let mut gens = sampled.residues.clone();
        gens.push(x);
        let lattice = reduced_lattice(&structure, &gens, &mut rec)?;
        let r = order_from_lattice(&lattice)?;
        match shor_split(modulus, x, r)? {
            Some(p) => {
                rec.note = format!("order {r}, split {p}");
                diagnostics.attempts.push(rec);
                return Ok(PipelineOutcome {
                    status: Status::Success,
                    witness: Some(Witness::Divisor(p)),
                    diagnostics,
                });
            }
            None => {
                rec.note = format!("order {r} gives no split");
                diagnostics.attempts.push(rec);
            }
        }
    }
    diagnostics.message = format!("no divisor after {} attempts", params.retries);
    Ok(PipelineOutcome {
        status: Status::RetryableFailure,
        witness: None,
        diagnostics,
    })
}

/// Multiplicative order of `x` from the lattice of `(b_1, ..., b_d, x)`.
pub fn find_order(modulus: u64, x: u64, params: &RegevParams, stream: &SeededStream) -> Result<PipelineOutcome> {
    if modulus < 3 || gcd_u64(x % modulus, modulus) != 1 {
        return Ok(PipelineOutcome::invalid(format!("{x} is not a unit mod {modulus}")));
    }
    check_params(modulus, params)?;
    let structure = UnitGroupStructure::new(modulus)?;
    let mut diagnostics = Diagnostics::default();
    for attempt in 0..params.retries {
        let s = stream.child(u64::from(attempt));
        let Some(sampled) = sample_prime_residues(params, &s.child(0))? else {
            diagnostics.attempts.push(record(&s, None, None, "too few primes among the draws"));
            continue;
        };
        let mut rec = record(&s, Some(&sampled), Some(x % modulus), "");
        let mut gens = sampled.residues.clone();
        gens.push(x % modulus);
        let lattice = reduced_lattice(&structure, &gens, &mut rec)?;
        let r = order_from_lattice(&lattice)?;
        if mod_pow_u64(x, r, modulus) != 1 {
            return Err(Error::internal(format!("lattice order {r} does not annihilate {x}")));
        }
        rec.note = format!("order {r}");
        diagnostics.attempts.push(rec);
        return Ok(PipelineOutcome {
            status: Status::Success,
            witness: Some(Witness::Order(r)),
            diagnostics,
        });
    }
    diagnostics.message = format!("prime sampling failed {} times", params.retries);
    Ok(PipelineOutcome {
        status: Status::RetryableFailure,
        witness: None,
        diagnostics,
    })
}

/// Solution of `g^x = y` from a basis of the lattice of `(b_1, ..., b_d, g, y)`,
/// or `None` if `y` is not in `<g>`. Returns `(x, ord g)` with `0 <= x < ord g`.
pub fn dlog_from_lattice(basis: &IntMatrix) -> Result<Option<(u64, u64)>> {
    if basis.nrows() < 2 || basis.nrows() != basis.ncols() {
        return Err(Error::internal("dlog lattice must be square of dimension >= 2"));
    }
    // Reversed coordinates: (y, g, b_d, ..., b_1). The vectors with zero
    // b-part are spanned by the first two Hermite rows (a, 0), (c, e).
    let form = hnf_basis(&basis.reverse_columns());
    let a = form.get(0, 0).clone();
    let c = form.get(1, 0).clone();
    let e = form.get(1, 1).clone();
    if !a.is_positive() || !e.is_positive() {
        return Err(Error::internal("degenerate dlog lattice"));
    }
    // Need (1, v) = s (a, 0) + t (c, e): t c = 1 mod a, v = t e.
    let egcd = c.extended_gcd(&a);
    if !egcd.gcd.is_one() {
        return Ok(None);
    }
    let t = egcd.x.mod_floor(&a);
    let v = &t * &e;
    // y g^v = 1, so g^{-v} = y; ord g = a e.
    let order = &a * &e;
    let x = (-v).mod_floor(&order);
    let to_u64 = |z: &BigInt| z.to_u64().ok_or_else(|| Error::internal("dlog exceeds 64 bits"));
    Ok(Some((to_u64(&x)?, to_u64(&order)?)))
}

/// `x` with `g^x = y (mod N)`, the least nonnegative one.
pub fn dlog(modulus: u64, g: u64, y: u64, params: &RegevParams, stream: &SeededStream) -> Result<PipelineOutcome> {
    if modulus < 3 {
        return Ok(PipelineOutcome::invalid("modulus must be at least 3"));
    }
    let (g, y) = (g % modulus, y % modulus);
    if gcd_u64(g, modulus) != 1 || gcd_u64(y, modulus) != 1 {
        return Ok(PipelineOutcome::invalid("base and target must be units"));
    }
    check_params(modulus, params)?;
    let structure = UnitGroupStructure::new(modulus)?;
    let mut diagnostics = Diagnostics::default();
    for attempt in 0..params.retries {
        let s = stream.child(u64::from(attempt));
        let Some(sampled) = sample_prime_residues(params, &s.child(0))? else {
            diagnostics.attempts.push(record(&s, None, None, "too few primes among the draws"));
            continue;
        };
        let mut rec = record(&s, Some(&sampled), None, "");
        let mut gens = sampled.residues.clone();
        gens.extend([g, y]);
        let lattice = reduced_lattice(&structure, &gens, &mut rec)?;
        match dlog_from_lattice(&lattice.basis)? {
            Some((x, order)) => {
                if mod_pow_u64(g, x, modulus) != y {
                    return Err(Error::internal(format!("lattice log {x} does not verify")));
                }
                rec.note = format!("log {x} mod {order}");
                diagnostics.attempts.push(rec);
                return Ok(PipelineOutcome {
                    status: Status::Success,
                    witness: Some(Witness::Log(x)),
                    diagnostics,
                });
            }
            None => {
                rec.note = "no lattice vector ends in 1".into();
                diagnostics.attempts.push(rec);
                diagnostics.message = format!("{y} is not in the subgroup generated by {g}");
                return Ok(PipelineOutcome {
                    status: Status::InvalidInput,
                    witness: None,
                    diagnostics,
                });
            }
        }
    }
    diagnostics.message = format!("prime sampling failed {} times", params.retries);
    Ok(PipelineOutcome {
        status: Status::RetryableFailure,
        witness: None,
        diagnostics,
    })
}

fn check_params(modulus: u64, params: &RegevParams) -> Result<()> {
    if params.modulus != modulus {
        return Err(Error::input(format!(
            "parameters were derived for {} but the modulus is {modulus}",
            params.modulus
        )));
    }
    Ok(())
}

/// `N = PQ` with distinct primes `P, Q >= N^{1/4}` and `(P-1)/2`, `(Q-1)/2` prime.
pub fn is_rsa_safe_modulus(modulus: u64) -> Result<bool> {
    if modulus < 3 {
        return Ok(false);
    }
    let f = factor_integer(modulus)?;
    let [(p, 1), (q, 1)] = f.as_slice() else {
        return Ok(false);
    };
    let big = |v: u64| BigUint::from(v).pow(4);
    let large = big(*p) >= BigUint::from(modulus) && big(*q) >= BigUint::from(modulus);
    let safe = |v: u64| v % 2 == 1 && is_prime_u64((v - 1) / 2);
    Ok(large && safe(*p) && safe(*q))
}

/// Number of `h in [0, H)^d` with `prod b_i^{h_i} = t`, by characters:
/// `(1/phi) sum_chi conj(chi(t)) prod_i sum_{h < H} chi(b_i)^h`.
fn count_representations_by_characters(structure: &UnitGroupStructure, bases: &[u64], target: u64, h: u64) -> Result<f64> {
    let l = structure.exponent();
    let one_sided = |j: u64| -> num_complex::Complex64 {
        (0..h)
            .map(|k| {
                let idx = (j as u128 * k as u128 % l as u128) as f64;
                num_complex::Complex64::from_polar(1.0, std::f64::consts::TAU * idx / l as f64)
            })
            .sum()
    };
    let mut total = num_complex::Complex64::new(0.0, 0.0);
    for chi in dual_group(structure) {
        let mut term = chi.eval(target)?.conj();
        for &b in bases {
            term *= one_sided(chi.eval_exact(b)?.index);
        }
        total += term;
    }
    Ok(total.re / structure.group_order as f64)
}

/// All `h in [0, H)^d` with `prod b_i^{h_i} = t`, by meeting in the middle.
fn representations(modulus: u64, bases: &[u64], target: u64, h: u64) -> Result<Vec<Vec<u64>>> {
    let split = bases.len() / 2;
    let (left, right) = bases.split_at(split);
    let table = |part: &[u64]| -> Vec<(u64, Vec<u64>)> {
        let mut out = vec![(1 % modulus, Vec::new())];
        for &b in part {
            let mut next = Vec::with_capacity(out.len() * h as usize);
            for (v, e) in &out {
                let mut acc = *v;
                for k in 0..h {
                    let mut e2 = e.clone();
                    e2.push(k);
                    next.push((acc, e2));
                    acc = mul_mod(acc, b, modulus);
                }
            }
            out = next;
        }
        out
    };
    let size = (h as u128).checked_pow(split.max(bases.len() - split) as u32);
    if size.is_none_or(|s| s > 50_000_000) {
        return Err(Error::resource("representation search", format!("{h}^{}", bases.len()), 50_000_000u64));
    }
    let lt = table(left);
    let mut index: std::collections::HashMap<u64, Vec<usize>> = std::collections::HashMap::new();
    for (i, (v, _)) in lt.iter().enumerate() {
        index.entry(*v).or_default().push(i);
    }
    let mut found = Vec::new();
    for (v, e) in table(right) {
        // left * v = t
        let inv = mod_inverse(v, modulus).ok_or_else(|| Error::internal("non-unit in representation table"))?;
        if let Some(is) = index.get(&mul_mod(target, inv, modulus)) {
            for &i in is {
                let mut full = lt[i].1.clone();
                full.extend(&e);
                found.push(full);
            }
        }
    }
    found.sort();
    Ok(found)
}

/// `b_0 prod b_i^{h_i} mod N` by the product tree over binary digits of `h_i`.
pub fn evaluate_representation(modulus: u64, b0: u64, bases: &[u64], exponents: &[u64]) -> Result<u64> {
    if bases.len() != exponents.len() {
        return Err(Error::input("bases and exponents differ in length"));
    }
    let mut leaves = vec![BigUint::from(b0 % modulus)];
    let mut selectors = vec![true];
    for (&b, &h) in bases.iter().zip(exponents) {
        let mut sq = b % modulus;
        let mut e = h;
        while e > 0 {
            leaves.push(BigUint::from(sq));
            selectors.push(e & 1 == 1);
            sq = mul_mod(sq, sq, modulus);
            e >>= 1;
        }
    }
    let r = mulexp_product_tree(&leaves, &selectors, &BigUint::from(modulus))?;
    r.residue.to_u64().ok_or_else(|| Error::internal("residue exceeds modulus"))
}

/// Details of one toy trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToyTrial {
    pub outcome: PipelineOutcome,
    pub b0: u64,
    pub bases: Vec<u64>,
    pub target: u64,
    /// Representations counted by characters (rounded) and by enumeration.
    pub character_count: f64,
    pub enumerated_count: u64,
}

/// Samples `b_0` and primes `b_1..b_d <= X`, and looks for `0 <= h_i < H`
/// with `b_0 prod b_i^{h_i} = x`.
pub fn toy_short_product(modulus: u64, x: u64, params: &RegevParams, stream: &SeededStream) -> Result<ToyTrial> {
    let fail = |o: PipelineOutcome| ToyTrial {
        outcome: o,
        b0: 0,
        bases: Vec::new(),
        target: x,
        character_count: 0.0,
        enumerated_count: 0,
    };
    if !is_rsa_safe_modulus(modulus)? {
        return Ok(fail(PipelineOutcome::invalid(format!("{modulus} is not a product of two large safe primes"))));
    }
    if gcd_u64(x % modulus, modulus) != 1 {
        return Ok(fail(PipelineOutcome::invalid(format!("{x} is not a unit"))));
    }
    check_params(modulus, params)?;
    let h = params
        .h_cap
        .ok_or_else(|| Error::input("toy experiment needs an H (h_cap) override"))?;
    let structure = UnitGroupStructure::new(modulus)?;
    let b0 = sample_unit(modulus, &stream.child(1))?;
    let Some(sampled) = sample_prime_residues(params, &stream.child(0))? else {
        let mut o = PipelineOutcome {
            status: Status::RetryableFailure,
            witness: None,
            diagnostics: Diagnostics::default(),
        };
        o.diagnostics.attempts.push(record(stream, None, Some(b0), "too few primes among the draws"));
        return Ok(ToyTrial { b0, ..fail(o) });
    };
    let target = mul_mod(x % modulus, mod_inverse(b0, modulus).ok_or_else(|| Error::internal("b0 not a unit"))?, modulus);
    let character_count = count_representations_by_characters(&structure, &sampled.residues, target, h)?;
    let reps = representations(modulus, &sampled.residues, target, h)?;
    if (character_count - reps.len() as f64).abs() > 1e-6 * (1.0 + reps.len() as f64) {
        return Err(Error::internal(format!(
            "character count {character_count} disagrees with enumeration {}",
            reps.len()
        )));
    }
    let mut rec = record(stream, Some(&sampled), Some(b0), "");
    let outcome = match reps.first() {
        Some(e) => {
            if evaluate_representation(modulus, b0, &sampled.residues, e)? != x % modulus {
                return Err(Error::internal("representation does not verify"));
            }
            rec.note = format!("{} representations", reps.len());
            PipelineOutcome {
                status: Status::Success,
                witness: Some(Witness::Representation(e.clone())),
                diagnostics: Diagnostics {
                    attempts: vec![rec],
                    message: String::new(),
                },
            }
        }
        None => {
            rec.note = "no representation in the box".into();
            PipelineOutcome {
                status: Status::RetryableFailure,
                witness: None,
                diagnostics: Diagnostics {
                    attempts: vec![rec],
                    message: format!("no representation with exponents below {h}"),
                },
            }
        }
    };
    Ok(ToyTrial {
        outcome,
        b0,
        bases: sampled.residues,
        target,
        character_count,
        enumerated_count: reps.len() as u64,
    })
}

/// One run of the short-basis experiment: `d` sampled primes and `r` sampled
/// units, the LLL-reduced relation lattice, and its checks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShortBasisTrial {
    pub stream: String,
    pub generators: Vec<u64>,
    pub prime_bits: Vec<u64>,
    pub sampled: bool,
    pub max_norm: Option<f64>,
    /// `ln` of the target `e^{42(d + r)}`.
    pub log_bound: f64,
    pub short: bool,
    pub invariants: Option<LatticeInvariantReport>,
    pub lll_reduced: bool,
}

impl ShortBasisTrial {
    pub fn violations(&self) -> bool {
        self.sampled && !(self.lll_reduced && self.invariants.as_ref().is_some_and(LatticeInvariantReport::holds))
    }
}

pub fn short_basis_trial(modulus: u64, r: usize, params: &RegevParams, span_radius: u64, stream: &SeededStream) -> Result<ShortBasisTrial> {
    check_params(modulus, params)?;
    let structure = UnitGroupStructure::new(modulus)?;
    let log_bound = 42.0 * (params.d as f64 + r as f64);
    let Some(sampled) = sample_prime_residues(params, &stream.child(0))? else {
        return Ok(ShortBasisTrial {
            stream: stream.label(),
            generators: Vec::new(),
            prime_bits: Vec::new(),
            sampled: false,
            max_norm: None,
            log_bound,
            short: false,
            invariants: None,
            lll_reduced: false,
        });
    };
    let mut gens = sampled.residues.clone();
    for i in 0..r {
        gens.push(sample_unit(modulus, &stream.child(1).child(i as u64))?);
    }
    let lattice = relation_lattice(&structure, &gens, 1)?;
    let reduced = lll_reduce(&lattice.basis, &default_delta())?;
    let max_norm = reduced.max_row_norm();
    let invariants = check_lattice_invariants(&structure, &lattice, &reduced, span_radius)?;
    Ok(ShortBasisTrial {
        stream: stream.label(),
        generators: gens,
        prime_bits: sampled.bits,
        sampled: true,
        max_norm: Some(max_norm),
        log_bound,
        short: max_norm.ln() <= log_bound,
        lll_reduced: crate::lattice::is_lll_reduced(&reduced, &default_delta()),
        invariants: Some(invariants),
    })
}

/// Whether `h` satisfies `b_0 prod b_i^{h_i} = x`, in plain modular arithmetic.
pub fn verify_representation(modulus: u64, b0: u64, bases: &[u64], exponents: &[u64], x: u64) -> bool {
    let mut acc = b0 % modulus;
    for (&b, &h) in bases.iter().zip(exponents) {
        acc = mul_mod(acc, mod_pow_u64(b, h, modulus), modulus);
    }
    bases.len() == exponents.len() && acc == x % modulus
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scaled(n: u64, x: u64) -> RegevParams {
        derive_params(
            n,
            &ParamOverrides {
                x: Some(x.to_string()),
                ..Default::default()
            },
        )
        .unwrap()
    }

    #[test]
    fn params() {
        let p = derive_params(15, &ParamOverrides::default()).unwrap();
        assert_eq!(p.d, 2);
        assert_eq!(p.x, BigUint::from(2u8).pow(2000));
        assert!(!p.scaled);
        assert_eq!(p.k_draws, 16);
        assert_eq!(p.n, 4);
        // 9 < ln N <= 16 gives d = 4.
        for n in [8104u64, 100_000, 8_886_110] {
            assert_eq!(derive_params(n, &ParamOverrides::default()).unwrap().d, 4, "{n}");
        }
        let p = scaled(15, 10_000);
        assert_eq!(p.x, BigUint::from(10_000u32));
        assert!(p.scaled);
        assert_eq!(p.overrides.x.as_deref(), Some("10000"));
        assert!(derive_params(2, &ParamOverrides::default()).is_err());
    }

    #[test]
    fn order_examples() {
        let g = UnitGroupStructure::new(15).unwrap();
        assert_eq!(order_from_lattice(&relation_lattice(&g, &[2], 1).unwrap()).unwrap(), 4);
        assert_eq!(order_from_lattice(&relation_lattice(&g, &[1], 1).unwrap()).unwrap(), 1);
        assert_eq!(order_from_lattice(&relation_lattice(&g, &[2, 4], 1).unwrap()).unwrap(), 2);
    }

    #[test]
    fn order_matches_element_order() {
        for n in (3..=2000u64).step_by(7) {
            let g = UnitGroupStructure::new(n).unwrap();
            for x in g.units().into_iter().step_by(5) {
                let r = order_from_lattice(&relation_lattice(&g, &[x], 1).unwrap()).unwrap();
                assert_eq!(r, g.element_order(x).unwrap(), "N={n} x={x}");
            }
        }
    }

    #[test]
    fn order_with_reduced_basis() {
        let g = UnitGroupStructure::new(1001).unwrap();
        let l = relation_lattice(&g, &[2, 3, 5, 10], 1).unwrap();
        let reduced = l.with_basis(lll_reduce(&l.basis, &default_delta()).unwrap()).unwrap();
        assert_eq!(order_from_lattice(&reduced).unwrap(), g.element_order(10).unwrap());
    }

    #[test]
    fn shor_examples() {
        assert_eq!(shor_split(15, 2, 4).unwrap(), Some(3));
        assert_eq!(shor_split(15, 14, 2).unwrap(), None);
        assert_eq!(shor_split(21, 2, 6).unwrap(), Some(7));
        assert!(shor_split(15, 2, 3).is_err());
        assert_eq!(shor_split(15, 4, 2).unwrap(), Some(3));
    }

    #[test]
    fn factor_small() {
        let p = scaled(15, 10_000);
        let mut wins = 0;
        for seed in 0..20 {
            let o = factor(15, &p, &SeededStream::new(seed)).unwrap();
            if let Some(Witness::Divisor(q)) = o.witness {
                assert!(q == 3 || q == 5);
                wins += 1;
            }
        }
        assert!(wins >= 18);
        let o = factor(9, &scaled(9, 100), &SeededStream::new(0)).unwrap();
        assert_eq!(o.status, Status::InvalidInput);
        assert!(o.diagnostics.message.contains("3^2"));
        assert_eq!(factor(14, &scaled(14, 100), &SeededStream::new(0)).unwrap().status, Status::InvalidInput);
        assert_eq!(factor(13, &scaled(13, 100), &SeededStream::new(0)).unwrap().status, Status::InvalidInput);
        // 225 = 15^2 is a perfect power but not a prime power.
        assert!(factoring_precheck(225).is_none());
    }

    #[test]
    fn factor_is_deterministic() {
        let p = scaled(1001, 10_000);
        let a = factor(1001, &p, &SeededStream::new(5)).unwrap();
        let b = factor(1001, &p, &SeededStream::new(5)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn single_attempt_success_rate_105() {
        let mut p = scaled(105, 10_000);
        p.retries = 1;
        let mut wins = 0;
        for seed in 0..100 {
            let o = factor(105, &p, &SeededStream::new(seed)).unwrap();
            if let Some(Witness::Divisor(q)) = o.witness {
                assert!(105 % q == 0 && q > 1 && q < 105);
                wins += 1;
            }
        }
        assert!(wins >= 35, "{wins}");
    }

    #[test]
    fn dlog_examples() {
        let o = dlog(7, 3, 6, &scaled(7, 10_000), &SeededStream::new(1)).unwrap();
        assert_eq!(o.witness, Some(Witness::Log(3)));
        let o = dlog(15, 2, 2, &scaled(15, 10_000), &SeededStream::new(1)).unwrap();
        assert_eq!(o.witness, Some(Witness::Log(1)));
        let o = dlog(15, 2, 7, &scaled(15, 10_000), &SeededStream::new(1)).unwrap();
        assert_eq!(o.status, Status::InvalidInput);
        let o = dlog(15, 1, 1, &scaled(15, 10_000), &SeededStream::new(1)).unwrap();
        assert_eq!(o.witness, Some(Witness::Log(0)));
    }

    #[test]
    fn dlog_agrees_with_brute_force() {
        for n in [11u64, 35, 64, 91, 221, 1000] {
            let g = UnitGroupStructure::new(n).unwrap();
            let p = scaled(n, 10_000);
            for (i, &base) in g.units().iter().enumerate().step_by(3) {
                for &target in g.units().iter().step_by(7) {
                    let mut pow = 1 % n;
                    let mut expected = None;
                    for x in 0..g.element_order(base).unwrap() {
                        if pow == target {
                            expected = Some(x);
                            break;
                        }
                        pow = mul_mod(pow, base, n);
                    }
                    let o = dlog(n, base, target, &p, &SeededStream::new(i as u64)).unwrap();
                    match expected {
                        Some(x) => assert_eq!(o.witness, Some(Witness::Log(x)), "N={n} {base}^x={target}"),
                        None => assert_eq!(o.status, Status::InvalidInput),
                    }
                }
            }
        }
    }

    #[test]
    fn rsa_safe() {
        assert!(is_rsa_safe_modulus(1081).unwrap());
        assert!(!is_rsa_safe_modulus(15).unwrap());
        assert!(!is_rsa_safe_modulus(49).unwrap());
        // 7 and 11 are safe and large enough; 5^4 < 5 * 1019.
        assert!(is_rsa_safe_modulus(77).unwrap());
        assert!(!is_rsa_safe_modulus(5 * 1019).unwrap());
    }

    #[test]
    fn representation_evaluation() {
        assert_eq!(evaluate_representation(1081, 3, &[2, 5], &[10, 3]).unwrap(), {
            let mut v = 3u64;
            v = mul_mod(v, mod_pow_u64(2, 10, 1081), 1081);
            mul_mod(v, 125, 1081)
        });
        assert!(verify_representation(1081, 3, &[2, 5], &[0, 0], 3));
    }

    #[test]
    fn toy_trials_verify() {
        let mut p = scaled(1081, 50);
        p.d = 2;
        p.k_draws = 16;
        p.h_cap = Some(46);
        let mut wins = 0;
        for seed in 0..40 {
            let t = toy_short_product(1081, 5, &p, &SeededStream::new(seed)).unwrap();
            assert_eq!(t.character_count.round() as u64, t.enumerated_count);
            if let Some(Witness::Representation(h)) = &t.outcome.witness {
                assert!(verify_representation(1081, t.b0, &t.bases, h, 5));
                assert!(h.iter().all(|&e| e < 46));
                wins += 1;
            }
        }
        assert!(wins > 0);
    }

    #[test]
    fn toy_full_orbit() {
        // With H at least the group exponent, success iff the target lies in <b_i>.
        let g = UnitGroupStructure::new(1081).unwrap();
        let mut p = scaled(1081, 50);
        p.d = 2;
        p.k_draws = 16;
        p.h_cap = Some(g.exponent());
        for seed in 0..10 {
            let t = toy_short_product(1081, 7, &p, &SeededStream::new(seed)).unwrap();
            if t.bases.is_empty() {
                continue;
            }
            let mut orbit = std::collections::HashSet::new();
            for i in 0..g.exponent() {
                for j in 0..g.exponent() {
                    orbit.insert(mul_mod(mod_pow_u64(t.bases[0], i, 1081), mod_pow_u64(t.bases[1], j, 1081), 1081));
                }
            }
            assert_eq!(t.outcome.is_success(), orbit.contains(&t.target));
        }
        let o = toy_short_product(15, 2, &scaled(15, 50), &SeededStream::new(0)).unwrap();
        assert_eq!(o.outcome.status, Status::InvalidInput);
    }

    #[test]
    fn short_basis_invariants() {
        for (n, r) in [(1009u64 * 3, 0usize), (2021, 1), (5183, 2)] {
            let p = scaled(n, 10_000);
            for seed in 0..5 {
                let t = short_basis_trial(n, r, &p, 3, &SeededStream::new(seed)).unwrap();
                if t.sampled {
                    assert!(!t.violations(), "{t:?}");
                    assert_eq!(t.generators.len(), p.d as usize + r);
                }
            }
        }
    }
}
