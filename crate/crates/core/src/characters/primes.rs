//! Character sums over primes: averages, the `E_j` histogram and second
//! moments of `F_{chi,H}` over sampled primes.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::{check_dual_budget, f_chi_h, power_subgroup, Complex64Repr, Cyclotomic, DirichletCharacter};
use crate::error::{Error, Result};
use crate::group::UnitGroupStructure;
use crate::sampler::{draw_qualifying_primes, SeededStream};

/// Largest sieve bound accepted.
pub const SIEVE_BUDGET: u64 = 100_000_000;

const SEGMENT: u64 = 1 << 18;

/// Primes `<= x` by a segmented sieve of Eratosthenes.
pub fn primes_up_to(x: u64) -> Result<Vec<u64>> {
    if x > SIEVE_BUDGET {
        return Err(Error::resource("prime sieve", x, SIEVE_BUDGET));
    }
    if x < 2 {
        return Ok(Vec::new());
    }
    let root = (x as f64).sqrt() as u64 + 1;
    let mut small = vec![true; root as usize + 1];
    let mut base = Vec::new();
    for i in 2..=root as usize {
        if small[i] {
            base.push(i as u64);
            for j in (i * i..=root as usize).step_by(i) {
                small[j] = false;
            }
        }
    }
    let mut primes = Vec::new();
    let mut lo = 2;
    let mut seg = vec![true; SEGMENT as usize];
    while lo <= x {
        let hi = (lo + SEGMENT - 1).min(x);
        let len = (hi - lo + 1) as usize;
        seg[..len].fill(true);
        for &p in &base {
            if p * p > hi {
                break;
            }
            let start = (p * p).max(lo.div_ceil(p) * p);
            for m in (start..=hi).step_by(p as usize) {
                seg[(m - lo) as usize] = false;
            }
        }
        primes.extend((0..len).filter(|&i| seg[i]).map(|i| lo + i as u64));
        lo = hi + 1;
    }
    Ok(primes)
}

/// Primes `<= x` not dividing `N`, counted by residue class.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrimeResidueTally {
    pub modulus: u64,
    pub bound: u64,
    pub prime_count: u64,
    /// `residue -> number of primes`, residues in increasing order.
    pub counts: BTreeMap<u64, u64>,
}

pub fn residue_tally(modulus: u64, x: u64) -> Result<PrimeResidueTally> {
    let mut counts = BTreeMap::new();
    let mut prime_count = 0;
    for p in primes_up_to(x)? {
        if modulus.is_multiple_of(p) {
            continue;
        }
        *counts.entry(p % modulus).or_default() += 1;
        prime_count += 1;
    }
    Ok(PrimeResidueTally {
        modulus,
        bound: x,
        prime_count,
        counts,
    })
}

fn nonempty(tally: &PrimeResidueTally) -> Result<()> {
    if tally.prime_count == 0 {
        return Err(Error::input(format!(
            "no primes <= {} avoid the divisors of {}",
            tally.bound, tally.modulus
        )));
    }
    Ok(())
}

/// `sum_{p <= x, p not dividing N} chi(p)` exactly, with the number of
/// primes summed.
pub fn prime_char_sum_exact(chi: &DirichletCharacter<'_>, x: u64) -> Result<(Cyclotomic, u64)> {
    let tally = residue_tally(chi.structure().modulus, x)?;
    let mut sum = Cyclotomic::zero(chi.structure().exponent());
    for (&r, &c) in &tally.counts {
        sum.add_monomial(chi.eval_exact(r)?.index, c as i128);
    }
    Ok((sum, tally.prime_count))
}

/// `(1/pi'(x)) sum chi(p)` over primes `p <= x` not dividing `N`.
pub fn prime_char_average(chi: &DirichletCharacter<'_>, x: u64) -> Result<Complex64> {
    let tally = residue_tally(chi.structure().modulus, x)?;
    nonempty(&tally)?;
    let mut sum = Complex64::new(0.0, 0.0);
    for (&r, &c) in &tally.counts {
        sum += chi.eval(r)? * c as f64;
    }
    Ok(sum / tally.prime_count as f64)
}

/// `j` with `value in (e^{-j-1}, e^{-j}]`, or the sentinel for an exact zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Bucket {
    Finite(u32),
    Zero,
}

impl Bucket {
    pub fn of(value: f64) -> Bucket {
        if value <= 0.0 {
            return Bucket::Zero;
        }
        let mut j = (-value.ln()).floor().max(0.0) as u32;
        // Guard the interval ends against rounding in ln.
        while j > 0 && value > (-(j as f64)).exp() {
            j -= 1;
        }
        while value <= (-(j as f64) - 1.0).exp() {
            j += 1;
        }
        Bucket::Finite(j)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CharSumProfile {
    pub frequencies: Vec<u64>,
    /// `max_{0 < h < H} |E_p chi^h(p)|`.
    pub value: f64,
    pub bucket: Bucket,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramRow {
    pub bucket: Bucket,
    pub count: u64,
    pub worst_frequencies: Vec<u64>,
    pub worst_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExceptionalHistogram {
    pub modulus: u64,
    pub bound: u64,
    pub half_width: u64,
    pub subgroup_filter: Option<u128>,
    pub prime_count: u64,
    pub characters_considered: u64,
    pub rows: Vec<HistogramRow>,
    pub profiles: Vec<CharSumProfile>,
}

impl ExceptionalHistogram {
    pub fn total(&self) -> u64 {
        self.rows.iter().map(|r| r.count).sum()
    }
}

/// `S(f) = sum_p chi_f(p)` for every frequency vector, by an unnormalised
/// inverse DFT of the prime counts on the exponent-coordinate grid.
/// Entry `f` sits at `sum f_i * stride_i` with the first coordinate fastest.
fn all_character_sums(structure: &UnitGroupStructure, tally: &PrimeResidueTally) -> Result<Vec<Complex64>> {
    let orders = structure.orders();
    let mut strides = Vec::with_capacity(orders.len());
    let mut size = 1usize;
    for &o in &orders {
        strides.push(size);
        size *= o as usize;
    }
    let mut grid = vec![Complex64::new(0.0, 0.0); size];
    for (&r, &c) in &tally.counts {
        let v = structure.dlog_vector(r)?;
        let at: usize = v.coords().iter().zip(&strides).map(|(&x, &s)| x as usize * s).sum();
        grid[at] += c as f64;
    }
    let mut planner = FftPlanner::new();
    for (axis, &o) in orders.iter().enumerate() {
        let o = o as usize;
        let stride = strides[axis];
        let fft = planner.plan_fft_inverse(o);
        let mut line = vec![Complex64::new(0.0, 0.0); o];
        for base in 0..size {
            if (base / stride) % o != 0 {
                continue;
            }
            for (t, slot) in line.iter_mut().enumerate() {
                *slot = grid[base + t * stride];
            }
            fft.process(&mut line);
            for (t, slot) in line.iter().enumerate() {
                grid[base + t * stride] = *slot;
            }
        }
    }
    Ok(grid)
}

/// Buckets the characters of order greater than 2 (restricted to the `M`-th
/// power characters when a filter is given) by
/// `max_{0 < h < H} |E_{p <= X} chi^h(p)|`.
pub fn exceptional_histogram(
    structure: &UnitGroupStructure,
    x: u64,
    half_width: u64,
    subgroup_filter: Option<u128>,
) -> Result<ExceptionalHistogram> {
    if half_width < 2 {
        return Err(Error::input("H must be at least 2 for 0 < h < H to be nonempty"));
    }
    check_dual_budget(structure, 1)?;
    let tally = residue_tally(structure.modulus, x)?;
    nonempty(&tally)?;
    let sums = all_character_sums(structure, &tally)?;
    let orders = structure.orders();
    let total = tally.prime_count as f64;
    let position = |f: &[u64]| -> usize {
        let mut at = 0;
        let mut stride = 1;
        for (&fi, &o) in f.iter().zip(&orders) {
            at += fi as usize * stride;
            stride *= o as usize;
        }
        at
    };
    let mut profiles = Vec::new();
    for chi in power_subgroup(structure, subgroup_filter.unwrap_or(1)) {
        if chi.order() <= 2 {
            continue;
        }
        let mut value: f64 = 0.0;
        for h in 1..half_width {
            value = value.max(sums[position(chi.power(h as i64).frequencies())].norm() / total);
        }
        // Confirm apparent zeros exactly before using the sentinel bucket.
        let bucket = if value < 1e-9 {
            let mut all_zero = true;
            for h in 1..half_width {
                if !prime_char_sum_exact(&chi.power(h as i64), x)?.0.is_zero() {
                    all_zero = false;
                    break;
                }
            }
            if all_zero {
                value = 0.0;
            }
            Bucket::of(value)
        } else {
            Bucket::of(value)
        };
        profiles.push(CharSumProfile {
            frequencies: chi.frequencies().to_vec(),
            value,
            bucket,
        });
    }
    let mut by_bucket: BTreeMap<Bucket, HistogramRow> = BTreeMap::new();
    for p in &profiles {
        let row = by_bucket.entry(p.bucket).or_insert_with(|| HistogramRow {
            bucket: p.bucket,
            count: 0,
            worst_frequencies: p.frequencies.clone(),
            worst_value: p.value,
        });
        row.count += 1;
        if p.value > row.worst_value {
            row.worst_value = p.value;
            row.worst_frequencies = p.frequencies.clone();
        }
    }
    Ok(ExceptionalHistogram {
        modulus: structure.modulus,
        bound: x,
        half_width,
        subgroup_filter,
        prime_count: tally.prime_count,
        characters_considered: profiles.len() as u64,
        rows: by_bucket.into_values().collect(),
        profiles,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SecondMoment {
    pub trials: u64,
    pub mean: f64,
    pub std_error: f64,
    /// The first trial's `F_{chi,H}`, for spot checks.
    pub first_value: Complex64Repr,
}

/// Monte Carlo mean of `|F_{chi,H}(p_1, ..., p_d)|^2` over independent uniform
/// primes `<= X` not dividing `N`, one substream per trial.
pub fn second_moment_estimate(
    chi: &DirichletCharacter<'_>,
    half_width: u64,
    x: u64,
    d: usize,
    trials: u64,
    stream: &SeededStream,
) -> Result<SecondMoment> {
    if trials == 0 || d == 0 {
        return Err(Error::input("trials and d must be positive"));
    }
    let modulus = chi.structure().modulus;
    let values: Vec<Complex64> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let primes = draw_qualifying_primes(modulus, d, x, &stream.child(i))?;
            let residues: Vec<u64> = primes.iter().map(|p| p % modulus).collect();
            f_chi_h(chi, half_width, &residues)
        })
        .collect::<Result<_>>()?;
    let squares: Vec<f64> = values.iter().map(|z| z.norm_sqr()).collect();
    let n = trials as f64;
    let mean = squares.iter().sum::<f64>() / n;
    let var = if trials > 1 {
        squares.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    Ok(SecondMoment {
        trials,
        mean,
        std_error: (var / n).sqrt(),
        first_value: values[0].into(),
    })
}
