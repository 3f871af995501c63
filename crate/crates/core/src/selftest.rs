//! The invariant suite behind the `selftest` command.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::factors::{k, tilde_k};
use crate::families::{bliss_weights, geometric_weights, BlissFamily, GeometricFamily};
use crate::intervals::{extend_zero, restrict, VFill};
use crate::operators::compute_b;
use crate::oracle::{maximize_quotient, OracleConfig};
use crate::refine::{delta_one, delta_upper, lower_trace, KGrid};
use crate::sampling::random_instance;
use crate::types::{validate_exponents, Exponents};

/// Replaces the improved factor, to check that the suite notices a wrong
/// one.
pub type FactorFn = fn(&Exponents) -> f64;

#[derive(Debug, Clone)]
pub struct SelfTestOptions {
    pub seed: u64,
    /// Random instances per sandwich check.
    pub instances: usize,
    pub factor: FactorFn,
}

impl Default for SelfTestOptions {
    fn default() -> Self {
        Self {
            seed: 0,
            instances: 60,
            factor: k,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &str, passed: bool, detail: impl Into<String>) -> CheckResult {
    CheckResult {
        name: name.into(),
        passed,
        detail: detail.into(),
    }
}

fn grid(n: usize) -> impl Iterator<Item = Exponents> {
    let pts: Vec<f64> = (0..n).map(|i| 1.05 + 4.0 * i as f64 / (n - 1) as f64).collect();
    let mut out = Vec::new();
    for &p in &pts {
        for &q in &pts {
            if p <= q {
                out.push(validate_exponents(p, q).expect("grid exponents are valid"));
            }
        }
    }
    out.into_iter()
}

fn factor_checks(opts: &SelfTestOptions) -> Vec<CheckResult> {
    let f = opts.factor;
    let e22 = validate_exponents(2.0, 2.0).unwrap();
    let e24 = validate_exponents(2.0, 4.0).unwrap();
    let mut bad = Vec::new();
    for e in grid(50) {
        if f(&e) > tilde_k(&e) * (1.0 + 1e-12) || f(&e) < 1.0 {
            bad.push((e.p, e.q));
        }
    }
    vec![
        check(
            "factor_diagonal",
            (f(&e22) - 2.0).abs() < 1e-12,
            format!("k(2,2) = {}", f(&e22)),
        ),
        check(
            "factor_two_four",
            (f(&e24) - 3f64.powf(0.25)).abs() < 1e-10,
            format!("k(2,4) = {}", f(&e24)),
        ),
        check(
            "factor_grid",
            bad.is_empty(),
            match bad.first() {
                None => "1 <= k <= tilde_k on the 50x50 grid".to_string(),
                Some((p, q)) => format!("{} violations, first at p={p}, q={q}", bad.len()),
            },
        ),
    ]
}

fn geometric_check() -> CheckResult {
    let e = validate_exponents(2.0, 2.0).unwrap();
    let fam = GeometricFamily::new(0.5, 1.0).unwrap();
    let cf = fam.closed_forms();
    let run = || -> crate::Result<(f64, f64, f64, f64, f64)> {
        let spec = geometric_weights(&fam, 400)?;
        let b = compute_b(&spec, &e).value;
        let d1 = delta_one(&spec, &e)?.value;
        let lo = lower_trace(&spec, &e, 1, &KGrid::Explicit((1..=200).collect()), false)?[0];
        let cfg = OracleConfig {
            restarts: 1,
            ..OracleConfig::default()
        };
        let a = maximize_quotient(&spec, &e, &cfg)?.a_est;
        Ok((b, d1, lo.delta_tilde, lo.delta_bar, a))
    };
    match run() {
        Ok((b, d1, dt, db, a)) => {
            let ok = (b - cf.b).abs() < 1e-6
                && (d1 - cf.a).abs() < 1e-2
                && (dt - cf.delta_lower_1).abs() < 1e-2
                && (db - cf.delta_lower_1).abs() < 1e-2
                && (a - cf.a).abs() < 1e-2
                && b < dt
                && dt < a
                && a <= d1 + 1e-12
                && d1 < 2.0 * b;
            check(
                "geometric_example",
                ok,
                format!("B={b:.6} delta_tilde={dt:.6} delta_bar={db:.6} A={a:.6} delta_1={d1:.6}"),
            )
        }
        Err(err) => check("geometric_example", false, err.to_string()),
    }
}

fn bliss_check(opts: &SelfTestOptions) -> CheckResult {
    let run = || -> crate::Result<(f64, f64, f64)> {
        let e = validate_exponents(2.0, 4.0)?;
        let fam = BlissFamily::new(&e, 1.0, 1e4)?;
        let spec = bliss_weights(&fam, 2000)?;
        Ok((compute_b(&spec, &e).value, delta_one(&spec, &e)?.value, (opts.factor)(&e)))
    };
    match run() {
        Ok((b, d1, kk)) => {
            let bound = 3f64.powf(0.75);
            let ok = b <= 1.0 && b >= 1.0 - 1e-3 && d1 <= bound + 1e-3 && kk * b >= b;
            check(
                "bliss_example",
                ok,
                format!("B={b:.8} delta_1={d1:.6} (bound {bound:.6})"),
            )
        }
        Err(err) => check("bliss_example", false, err.to_string()),
    }
}

fn sandwich_check(opts: &SelfTestOptions, weighted: bool) -> CheckResult {
    let name = if weighted {
        "sandwich_weighted_inner_sum"
    } else {
        "sandwich_unweighted_inner_sum"
    };
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    const SLACK: f64 = 1e-9;
    for i in 0..opts.instances {
        let inst = random_instance(&mut rng, 10, 1.1, 5.0);
        let (spec, e) = (&inst.spec, &inst.e);
        let run = || -> crate::Result<Option<String>> {
            let b = compute_b(spec, e).value;
            let lo = lower_trace(spec, e, 3, &KGrid::All, weighted)?;
            let lower = lo.iter().map(|l| l.best()).fold(f64::NEG_INFINITY, f64::max);
            let a = maximize_quotient(spec, e, &OracleConfig::default())?.a_est;
            let up = delta_upper(spec, e, 10, 0.0)?;
            let ds = up.values();
            let d1 = ds[0];
            let dm = *ds.last().unwrap();
            let links = [
                ("B <= lower", b, lower.max(b)),
                ("lower <= A", lower, a),
                ("A <= delta_m", a, dm),
                ("delta_1 <= tilde_k B", d1, tilde_k(e) * b),
                ("A <= k B", a, (opts.factor)(e) * b),
                ("k B <= tilde_k B", (opts.factor)(e) * b, tilde_k(e) * b),
            ];
            for (label, lhs, rhs) in links {
                if lhs > rhs + SLACK * rhs.abs().max(1.0) {
                    return Ok(Some(format!("instance {i}: {label} fails ({lhs} > {rhs})")));
                }
            }
            if let Some(w) = ds.windows(2).find(|w| w[1] > w[0] + 1e-10) {
                return Ok(Some(format!("instance {i}: delta_m increased {} -> {}", w[0], w[1])));
            }
            Ok(None)
        };
        match run() {
            Ok(None) => {}
            Ok(Some(msg)) => return check(name, false, msg),
            Err(err) => return check(name, false, format!("instance {i}: {err}")),
        }
    }
    check(name, true, format!("{} random instances", opts.instances))
}

fn interval_check(opts: &SelfTestOptions) -> CheckResult {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0x5eed);
    let cfg = OracleConfig::default();
    for i in 0..opts.instances / 2 {
        let inst = random_instance(&mut rng, 8, 1.1, 5.0);
        let (spec, e) = (&inst.spec, &inst.e);
        let run = || -> crate::Result<Option<String>> {
            let a = maximize_quotient(spec, e, &cfg)?.a_est;
            let ext = extend_zero(spec, spec.len() + 4, &VFill::default())?;
            let a_ext = maximize_quotient(&ext, e, &cfg)?.a_est;
            if (a - a_ext).abs() > 1e-8 * a.max(1.0) {
                return Ok(Some(format!("instance {i}: extension moved A {a} -> {a_ext}")));
            }
            let (b, b_ext) = (compute_b(spec, e).value, compute_b(&ext, e).value);
            if (b - b_ext).abs() > 1e-12 * b.max(1.0) {
                return Ok(Some(format!("instance {i}: extension moved B {b} -> {b_ext}")));
            }
            if spec.len() > 1 {
                let a_small = maximize_quotient(&restrict(spec, spec.len() - 1)?, e, &cfg)?.a_est;
                if a_small > a + 1e-9 {
                    return Ok(Some(format!("instance {i}: restriction raised A {a_small} > {a}")));
                }
            }
            Ok(None)
        };
        match run() {
            Ok(None) => {}
            Ok(Some(msg)) => return check("interval_laws", false, msg),
            Err(err) => return check("interval_laws", false, format!("instance {i}: {err}")),
        }
    }
    check("interval_laws", true, format!("{} random instances", opts.instances / 2))
}

/// Runs every check; the suite passes when all of them do.
pub fn run_selftest(opts: &SelfTestOptions) -> Vec<CheckResult> {
    let mut out = factor_checks(opts);
    out.push(geometric_check());
    out.push(bliss_check(opts));
    out.push(sandwich_check(opts, false));
    out.push(sandwich_check(opts, true));
    out.push(interval_check(opts));
    out
}
