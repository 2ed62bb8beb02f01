//! One function per subcommand. Each returns rows in trial order.

use std::time::Instant;

use num_bigint::BigUint;
use num_rational::BigRational;
use rand::Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

use regev_core::arith::{mulexp_naive_fold, mulexp_product_tree, MulExpPlan};
use regev_core::characters::{
    count_by_characters, count_characters_of_order, decompose_count, dual_group, exceptional_histogram, prime_char_average,
    second_moment_estimate, DirichletCharacter,
};
use regev_core::group::{default_dimension, UnitGroupStructure};
use regev_core::lattice::{brute_force_subgroup_size, hyperplane_cube_count};
use regev_core::pipelines::{
    derive_params, dlog, factor, find_order, short_basis_trial, toy_short_product, PipelineOutcome, RegevParams, Status,
    Witness,
};
use regev_core::sampler::{sample_unit, SeededStream};
use regev_core::Error;

use crate::report::Row;
use crate::{
    Command, CommandOutput, ExperimentConfig, ParamArgs, RunError, EXIT_FAILED_CHECK, EXIT_INVALID, EXIT_OK, EXIT_RETRYABLE,
};

/// Grid moduli for `verify-identities`.
pub const IDENTITY_MODULI: [u64; 7] = [9, 15, 21, 33, 35, 45, 105];

fn row(v: Value) -> Row {
    match v {
        Value::Object(m) => m,
        _ => unreachable!("rows are built from object literals"),
    }
}

/// Runs `f` on every trial index in parallel; results come back in order.
fn timed_trials<T: Send>(trials: u64, f: impl Fn(u64) -> Result<T, Error> + Sync) -> Result<(Vec<T>, Vec<f64>), Error> {
    let out: Vec<(T, f64)> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let t = Instant::now();
            f(i).map(|v| (v, t.elapsed().as_secs_f64() * 1e3))
        })
        .collect::<Result<_, _>>()?;
    Ok(out.into_iter().unzip())
}

fn check_modulus(config: &ExperimentConfig, modulus: u64) -> Result<(), RunError> {
    if modulus > config.modulus_budget {
        return Err(RunError::Core(Error::Resource {
            what: "modulus",
            needed: modulus.to_string(),
            budget: config.modulus_budget.to_string(),
        }));
    }
    Ok(())
}

fn params(modulus: u64, args: &ParamArgs, h_cap: Option<u64>) -> Result<RegevParams, Error> {
    derive_params(modulus, &args.overrides(h_cap))
}

fn witness_value(w: &Option<Witness>) -> Value {
    match w {
        None => Value::Null,
        Some(Witness::Divisor(v) | Witness::Log(v) | Witness::Order(v)) => json!(v),
        Some(Witness::Representation(h)) => json!(h),
    }
}

fn outcome_row(trial: u64, stream: &SeededStream, modulus: u64, o: &PipelineOutcome) -> Row {
    let last = o.diagnostics.attempts.last();
    row(json!({
        "trial": trial,
        "seed_path": stream.label(),
        "modulus": modulus,
        "status": o.status,
        "witness": witness_value(&o.witness),
        "attempts": o.attempts_used(),
        "prime_residues": last.map(|a| json!(a.prime_residues)).unwrap_or(Value::Null),
        "unit": last.and_then(|a| a.unit),
        "basis_max_norm": last.and_then(|a| a.basis_max_norm),
        "lattice_index": last.and_then(|a| a.lattice_index.clone()),
        "note": last.map(|a| a.note.clone()).unwrap_or_else(|| o.diagnostics.message.clone()),
        "success": o.is_success(),
    }))
}

/// Exit status for a batch of pipeline outcomes.
fn pipeline_exit(outcomes: &[PipelineOutcome]) -> i32 {
    if outcomes.iter().any(PipelineOutcome::is_success) {
        EXIT_OK
    } else if outcomes.iter().all(|o| o.status == Status::InvalidInput) {
        EXIT_INVALID
    } else {
        EXIT_RETRYABLE
    }
}

fn pipeline_command(
    config: &ExperimentConfig,
    modulus: u64,
    trials: u64,
    args: &ParamArgs,
    run: impl Fn(&RegevParams, &SeededStream) -> Result<PipelineOutcome, Error> + Sync,
) -> Result<CommandOutput, RunError> {
    check_modulus(config, modulus)?;
    let p = params(modulus, args, None)?;
    let root = SeededStream::new(config.seed);
    let (outcomes, per_trial_ms) = timed_trials(trials, |i| run(&p, &root.child(i)))?;
    let rows = outcomes
        .iter()
        .enumerate()
        .map(|(i, o)| outcome_row(i as u64, &root.child(i as u64), modulus, o))
        .collect();
    Ok(CommandOutput {
        rows,
        per_trial_ms,
        details: json!({
            "params": p,
            "note": "the quantum step is replaced by the exact relation lattice; success depends only on sampling and the order-to-factor step",
        }),
        exit: pipeline_exit(&outcomes),
    })
}

pub fn execute(config: &ExperimentConfig) -> Result<CommandOutput, RunError> {
    match &config.command {
        Command::Factor { modulus, trials, params } => {
            pipeline_command(config, *modulus, *trials, params, |p, s| factor(*modulus, p, s))
        }
        Command::Dlog {
            modulus,
            base,
            target,
            trials,
            params,
        } => pipeline_command(config, *modulus, *trials, params, |p, s| dlog(*modulus, *base, *target, p, s)),
        Command::Order {
            modulus,
            element,
            trials,
            params,
        } => pipeline_command(config, *modulus, *trials, params, |p, s| find_order(*modulus, *element, p, s)),
        Command::ShortBasis {
            modulus,
            r,
            trials,
            span_radius,
            params: args,
        } => short_basis(config, *modulus, *r, *trials, *span_radius, args),
        Command::VerifyIdentities {
            max_modulus,
            moduli,
            tuples,
        } => verify_identities(config, *max_modulus, moduli.as_deref(), *tuples),
        Command::CharDiagnostics {
            modulus,
            x,
            h,
            filter,
            moment_trials,
            moment_d,
        } => char_diagnostics(config, *modulus, *x, *h, *filter, *moment_trials, *moment_d),
        Command::CubeLemma { dims, ls, normals } => cube_lemma(config, dims, ls, *normals),
        Command::BenchMulexp { ds, bits, instances } => bench_mulexp(config, ds, bits, *instances),
        Command::ToyRsa {
            modulus,
            target,
            h,
            trials,
            params: args,
        } => toy_rsa(config, *modulus, *target, *h, *trials, args),
    }
}

fn short_basis(config: &ExperimentConfig, modulus: u64, r: usize, trials: u64, span_radius: u64, args: &ParamArgs) -> Result<CommandOutput, RunError> {
    check_modulus(config, modulus)?;
    let p = params(modulus, args, None)?;
    let root = SeededStream::new(config.seed);
    let (results, per_trial_ms) = timed_trials(trials, |i| short_basis_trial(modulus, r, &p, span_radius, &root.child(i)))?;
    let mut violations = 0;
    let rows: Vec<Row> = results
        .iter()
        .enumerate()
        .map(|(i, t)| {
            violations += u64::from(t.violations());
            row(json!({
                "trial": i,
                "seed_path": t.stream,
                "modulus": modulus,
                "sampled": t.sampled,
                "generators": t.generators,
                "prime_bits": t.prime_bits,
                "max_norm": t.max_norm,
                "log_bound": t.log_bound,
                "lll_reduced": t.lll_reduced,
                "invariants_hold": t.invariants.as_ref().map(|r| r.holds()),
                "determinant": t.invariants.as_ref().map(|r| r.determinant.clone()),
                "success": t.short,
            }))
        })
        .collect();
    let sampled = results.iter().filter(|t| t.sampled).count();
    let exit = if violations > 0 {
        EXIT_FAILED_CHECK
    } else if sampled == 0 && trials > 0 {
        EXIT_RETRYABLE
    } else {
        EXIT_OK
    };
    Ok(CommandOutput {
        rows,
        per_trial_ms,
        details: json!({"params": p, "r": r, "sampled": sampled, "invariant_violations": violations}),
        exit,
    })
}

fn verify_identities(config: &ExperimentConfig, max_modulus: u64, moduli: Option<&[u64]>, tuples: u64) -> Result<CommandOutput, RunError> {
    let moduli: Vec<u64> = moduli
        .map(<[u64]>::to_vec)
        .unwrap_or_else(|| IDENTITY_MODULI.to_vec())
        .into_iter()
        .filter(|&n| n <= max_modulus)
        .collect();
    if moduli.is_empty() {
        return Err(RunError::Usage("no moduli at or below --max-modulus".into()));
    }
    for &n in &moduli {
        check_modulus(config, n)?;
    }
    let mut cases = Vec::new();
    for &n in &moduli {
        let structure = UnitGroupStructure::new(n)?;
        let m_star = structure.m_star(default_dimension(n))?;
        for k in 1..=3usize {
            for h in [2u64, 5, 8] {
                for m in [1u128, 2, 6, m_star] {
                    for t in 0..tuples {
                        cases.push((n, k, h, m, t));
                    }
                }
            }
        }
    }
    let root = SeededStream::new(config.seed);
    let (rows, per_trial_ms) = timed_trials(cases.len() as u64, |i| {
        let (n, k, h, m, _) = cases[i as usize];
        let structure = UnitGroupStructure::new(n)?;
        let s = root.child(i);
        let elements: Vec<u64> = (0..k as u64).map(|j| sample_unit(n, &s.child(j))).collect::<Result<_, _>>()?;
        let count = count_by_characters(&structure, m, h, &elements)?;
        let decomposition = decompose_count(&structure, m, h, &elements)?;
        let brute = brute_force_subgroup_size(&structure, &elements, m);
        let expected = BigRational::new((2 * h + 1).pow(k as u32).into(), brute.into());
        let ok = count.identity_holds() && decomposition.identity_holds() && decomposition.orthogonal == expected;
        Ok(row(json!({
            "case": i,
            "seed_path": s.label(),
            "modulus": n,
            "k": k,
            "h": h,
            "m": m.to_string(),
            "elements": elements,
            "count": count.lhs.to_string(),
            "character_side": count.rhs_exact().map(|q| q.to_string()),
            "orthogonal": decomposition.orthogonal.to_string(),
            "remainder": decomposition.remainder_exact().map(|q| q.to_string()),
            "subgroup_size": brute,
            "success": ok,
        })))
    })?;
    let violations = rows.iter().filter(|r| r["success"] != json!(true)).count();
    Ok(CommandOutput {
        rows,
        per_trial_ms,
        details: json!({"moduli": moduli, "violations": violations}),
        exit: if violations == 0 { EXIT_OK } else { EXIT_FAILED_CHECK },
    })
}

#[allow(clippy::too_many_arguments)]
fn char_diagnostics(
    config: &ExperimentConfig,
    modulus: u64,
    x: u64,
    h: u64,
    filter: Option<u128>,
    moment_trials: u64,
    moment_d: usize,
) -> Result<CommandOutput, RunError> {
    check_modulus(config, modulus)?;
    let structure = UnitGroupStructure::new(modulus)?;
    let start = Instant::now();
    let histogram = exceptional_histogram(&structure, x, h, filter)?;
    let mut rows = Vec::new();
    let mut above_one = 0;
    for chi in dual_group(&structure) {
        let avg = prime_char_average(&chi, x)?;
        let profile = histogram.profiles.iter().find(|p| p.frequencies == chi.frequencies());
        above_one += u64::from(avg.norm() > 1.0 + 1e-12);
        rows.push(row(json!({
            "frequencies": chi.frequencies(),
            "order": chi.order(),
            "average_re": avg.re,
            "average_im": avg.im,
            "average_abs": avg.norm(),
            "exceptional_value": profile.map(|p| p.value),
            "bucket": profile.map(|p| json!(p.bucket)),
            "success": avg.norm() <= 1.0 + 1e-12,
        })));
    }
    let principal = prime_char_average(&DirichletCharacter::principal(&structure), x)?;
    let moment = if moment_trials > 0 {
        let chi = histogram
            .rows
            .first()
            .map(|r| DirichletCharacter::new(&structure, r.worst_frequencies.clone()))
            .transpose()?
            .unwrap_or_else(|| DirichletCharacter::principal(&structure));
        let m = second_moment_estimate(&chi, h, x, moment_d, moment_trials, &SeededStream::new(config.seed))?;
        json!({"frequencies": chi.frequencies(), "d": moment_d, "estimate": m})
    } else {
        Value::Null
    };
    let elapsed = start.elapsed().as_secs_f64() * 1e3;
    let per_trial_ms = vec![elapsed / rows.len().max(1) as f64; rows.len()];
    Ok(CommandOutput {
        details: json!({
            "prime_count": histogram.prime_count,
            "principal_average": [principal.re, principal.im],
            "order_two_characters": count_characters_of_order(&structure, 2)?,
            "histogram": histogram.rows,
            "second_moment": moment,
            "averages_above_one": above_one,
            "convention": "averages run over primes <= X not dividing N",
        }),
        rows,
        per_trial_ms,
        exit: if above_one == 0 { EXIT_OK } else { EXIT_FAILED_CHECK },
    })
}

fn random_normal<R: Rng>(dim: usize, rng: &mut R) -> Vec<BigRational> {
    loop {
        let v: Vec<BigRational> = (0..dim)
            .map(|_| BigRational::new(rng.gen_range(-20i64..=20).into(), rng.gen_range(1i64..=20).into()))
            .collect();
        if v.iter().any(|q| *q != BigRational::from_integer(0.into())) {
            return v;
        }
    }
}

fn cube_lemma(config: &ExperimentConfig, dims: &[usize], ls: &[u64], normals: u64) -> Result<CommandOutput, RunError> {
    let mut cases = Vec::new();
    for &d in dims {
        for &l in ls {
            for t in 0..normals {
                cases.push((d, l, t));
            }
        }
    }
    let root = SeededStream::new(config.seed);
    let (rows, per_trial_ms) = timed_trials(cases.len() as u64, |i| {
        let (d, l, _) = cases[i as usize];
        let s = root.child(i);
        let normal = random_normal(d, &mut s.rng());
        let c = hyperplane_cube_count(d, l, &normal)?;
        let text: Vec<String> = normal.iter().map(ToString::to_string).collect();
        Ok(row(json!({
            "case": i,
            "seed_path": s.label(),
            "dim": d,
            "l": l,
            "normal": text.join(" "),
            "count": c.count,
            "bound": c.bound,
            "success": c.within_bound(),
        })))
    })?;
    let violations = rows.iter().filter(|r| r["success"] != json!(true)).count();
    Ok(CommandOutput {
        rows,
        per_trial_ms,
        details: json!({"violations": violations}),
        exit: if violations == 0 { EXIT_OK } else { EXIT_FAILED_CHECK },
    })
}

fn random_below<R: Rng>(bits: u64, modulus: &BigUint, rng: &mut R) -> BigUint {
    let bytes: Vec<u8> = (0..bits.div_ceil(8)).map(|_| rng.gen()).collect();
    let v = BigUint::from_bytes_le(&bytes) >> (bits.div_ceil(8) * 8 - bits);
    v % modulus
}

fn bench_mulexp(config: &ExperimentConfig, ds: &[usize], bits: &[u64], instances: u64) -> Result<CommandOutput, RunError> {
    let mut cases = Vec::new();
    for &m in bits {
        for &d in ds {
            for t in 0..instances {
                cases.push((d, m, t));
            }
        }
    }
    let root = SeededStream::new(config.seed);
    // Sequential so the timings are not skewed by sharing cores.
    let mut rows = Vec::new();
    let mut per_trial_ms = Vec::new();
    for (i, &(d, m, _)) in cases.iter().enumerate() {
        let s = root.child(i as u64);
        let mut rng = s.rng();
        // Odd modulus of d*m bits, so no reduction happens below the root.
        let modulus = (BigUint::from(1u8) << (d as u64 * m)) - 1u8;
        let bases: Vec<BigUint> = (0..d).map(|_| random_below(m, &modulus, &mut rng)).collect();
        let selectors: Vec<bool> = (0..d).map(|_| rng.gen()).collect();
        let t = Instant::now();
        let tree = mulexp_product_tree(&bases, &selectors, &modulus)?;
        let tree_ms = t.elapsed().as_secs_f64() * 1e3;
        let naive = mulexp_naive_fold(&bases, &selectors, &modulus)?;
        per_trial_ms.push(tree_ms);
        rows.push(row(json!({
            "case": i,
            "seed_path": s.label(),
            "d": d,
            "m": m,
            "tree_cost_units": tree.cost_units,
            "naive_cost_units": naive.cost_units,
            "plan_cost_units": MulExpPlan::new(d, m, d as u64 * m)?.cost_units,
            "plan_naive_cost_units": MulExpPlan::naive_fold_cost(d, m, d as u64 * m),
            "success": tree.residue == naive.residue,
        })));
    }
    let mut ratios = Vec::new();
    for &m in bits {
        let mut sorted: Vec<usize> = ds.to_vec();
        sorted.sort_unstable();
        for w in sorted.windows(2) {
            if w[1] == 2 * w[0] {
                let a = MulExpPlan::new(w[0], m, w[0] as u64 * m)?.cost_units as f64;
                let b = MulExpPlan::new(w[1], m, w[1] as u64 * m)?.cost_units as f64;
                ratios.push(json!({"m": m, "d": w[0], "ratio": b / a}));
            }
        }
    }
    let mismatches = rows.iter().filter(|r| r["success"] != json!(true)).count();
    Ok(CommandOutput {
        rows,
        per_trial_ms,
        details: json!({"doubling_ratios": ratios, "mismatches": mismatches}),
        exit: if mismatches == 0 { EXIT_OK } else { EXIT_FAILED_CHECK },
    })
}

fn toy_rsa(config: &ExperimentConfig, modulus: u64, target: Option<u64>, h: u64, trials: u64, args: &ParamArgs) -> Result<CommandOutput, RunError> {
    check_modulus(config, modulus)?;
    let p = params(modulus, args, Some(h))?;
    let root = SeededStream::new(config.seed);
    let (results, per_trial_ms) = timed_trials(trials, |i| {
        let s = root.child(i);
        let x = match target {
            Some(x) => x,
            None => sample_unit(modulus, &s.child(2))?,
        };
        Ok((x, toy_short_product(modulus, x, &p, &s)?))
    })?;
    if let Some((_, t)) = results.iter().find(|(_, t)| t.outcome.status == Status::InvalidInput) {
        return Err(RunError::Usage(t.outcome.diagnostics.message.clone()));
    }
    let rows = results
        .iter()
        .enumerate()
        .map(|(i, (x, t))| {
            row(json!({
                "trial": i,
                "seed_path": root.child(i as u64).label(),
                "modulus": modulus,
                "target": x,
                "b0": t.b0,
                "bases": t.bases,
                "status": t.outcome.status,
                "witness": witness_value(&t.outcome.witness),
                "representations": t.enumerated_count,
                "character_count": t.character_count,
                "success": t.outcome.is_success(),
            }))
        })
        .collect();
    let outcomes: Vec<PipelineOutcome> = results.into_iter().map(|(_, t)| t.outcome).collect();
    Ok(CommandOutput {
        rows,
        per_trial_ms,
        details: json!({"params": p}),
        exit: pipeline_exit(&outcomes),
    })
}
