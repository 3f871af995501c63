use std::io::Write;
use std::path::Path;

use hardy_core::factors::{k, tilde_k};
use hardy_core::families::{bliss_weights, geometric_weights, BlissFamily, GeometricFamily};
use hardy_core::oracle::{check_maximizer_monotone, maximize_quotient, MonotoneVerdict, OracleConfig, OracleMethod};
use hardy_core::refine::{delta_upper_with, lower_trace, RefineStatus, UpperOptions};
use hardy_core::report::{assemble_bounds, format_number, serialize_sig, serialize_sig_vec, BoundOptions, BoundReport};
use hardy_core::selftest::{run_selftest, SelfTestOptions};
use hardy_core::{validate_exponents, Exponents};
use serde::Serialize;

use crate::exit;
use crate::input::{Failure, OptionFlags, ProblemArgs};
use crate::{ExampleName, Fault};

/// Tolerance for the lower-below-upper check on reports.
const ORDERING_TOL: f64 = 1e-9;

fn emit(text: &str, output: Option<&Path>) -> Result<(), Failure> {
    match output {
        Some(path) => std::fs::write(path, text)
            .map_err(|err| Failure::runtime(format!("{}: {err}", path.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|err| Failure::runtime(err.to_string()))
        }
    }
}

fn report_status(report: &BoundReport) -> u8 {
    let violations = report.ordering_violations(ORDERING_TOL);
    for (lo, up) in &violations {
        eprintln!("invariant violated: lower bound {lo} exceeds upper bound {up}");
    }
    if !violations.is_empty() {
        return exit::INVARIANT;
    }
    let r = &report.residuals;
    if r.oracle_converged == Some(false) || r.truncation_converged == Some(false) {
        for note in &r.notes {
            eprintln!("warning: {note}");
        }
        if r.oracle_converged == Some(false) {
            eprintln!("warning: oracle did not converge");
        }
        return exit::NON_CONVERGENCE;
    }
    0
}

pub fn bound(problem: &ProblemArgs, flags: &OptionFlags, oracle: bool, output: Option<&Path>) -> Result<u8, Failure> {
    let r = problem.resolve(flags)?;
    let opts = BoundOptions {
        oracle: (oracle || r.options.oracle).then(|| r.options.oracle_config()),
        weighted_inner_sum: r.options.weighted_inner_sum,
        k_grid: r.options.k_grid(),
        delta_one: r.options.delta_one,
    };
    let report = assemble_bounds(&r.spec, &r.e, &opts)?;
    emit(&(report.to_json() + "\n"), output)?;
    Ok(report_status(&report))
}

pub fn refine(problem: &ProblemArgs, flags: &OptionFlags, output: Option<&Path>) -> Result<u8, Failure> {
    let r = problem.resolve(flags)?;
    let o = &r.options;
    let upper = delta_upper_with(
        &r.spec,
        &r.e,
        &UpperOptions {
            m_max: o.m,
            tol: o.tol,
            delta_one: o.delta_one,
        },
    )?;
    if upper.rows.is_empty() {
        return Err(Failure {
            code: exit::NON_CONVERGENCE,
            message: "upper iteration diverged at the first step".into(),
        });
    }
    let lower = lower_trace(&r.spec, &r.e, upper.rows.len(), &o.k_grid(), o.weighted_inner_sum)?;

    let mut wtr = csv::Writer::from_writer(Vec::new());
    let csv_err = |err: csv::Error| Failure::runtime(err.to_string());
    wtr.write_record([
        "m",
        "delta_m",
        "delta_m_index",
        "delta_tilde_m",
        "delta_tilde_k",
        "delta_bar_m",
        "delta_bar_k",
    ])
    .map_err(csv_err)?;
    for (up, lo) in upper.rows.iter().zip(&lower) {
        wtr.write_record([
            up.m.to_string(),
            format_number(up.value),
            up.index.to_string(),
            format_number(lo.delta_tilde),
            lo.k_tilde.to_string(),
            format_number(lo.delta_bar),
            lo.k_bar.to_string(),
        ])
        .map_err(csv_err)?;
    }
    let bytes = wtr.into_inner().map_err(|err| Failure::runtime(err.to_string()))?;
    emit(&String::from_utf8_lossy(&bytes), output)?;

    let crossed = upper
        .rows
        .iter()
        .zip(&lower)
        .any(|(up, lo)| lo.best() > up.value + ORDERING_TOL * up.value.max(1.0));
    if crossed {
        eprintln!("invariant violated: a lower estimate exceeds the upper estimate");
        return Ok(exit::INVARIANT);
    }
    if upper.status == RefineStatus::Diverged {
        eprintln!("warning: upper iteration diverged after m = {}", upper.rows.len());
        return Ok(exit::NON_CONVERGENCE);
    }
    Ok(0)
}

#[derive(Serialize)]
struct OracleOutput {
    #[serde(rename = "A_est", serialize_with = "serialize_sig")]
    a_est: f64,
    method: OracleMethod,
    converged: bool,
    iterations: usize,
    restart: usize,
    seed: u64,
    restarts: usize,
    truncation_used: usize,
    monotone: MonotoneVerdict,
    /// Normalized so that `H x(N) = 1`.
    #[serde(serialize_with = "serialize_sig_vec")]
    x_star: Vec<f64>,
}

pub fn oracle(problem: &ProblemArgs, flags: &OptionFlags, output: Option<&Path>) -> Result<u8, Failure> {
    let r = problem.resolve(flags)?;
    let cfg: OracleConfig = r.options.oracle_config();
    let res = maximize_quotient(&r.spec, &r.e, &cfg)?;
    let monotone = check_maximizer_monotone(&res.x_star, &r.spec, &r.e)?;
    let out = OracleOutput {
        a_est: res.a_est,
        method: res.method,
        converged: res.converged,
        iterations: res.iterations,
        restart: res.restart,
        seed: cfg.seed,
        restarts: cfg.restarts,
        truncation_used: r.spec.len(),
        monotone,
        x_star: res.x_star.into_vec(),
    };
    let text = serde_json::to_string_pretty(&out).expect("oracle output serializes");
    emit(&(text + "\n"), output)?;
    if !res.converged {
        eprintln!("warning: oracle reached max_iters; reporting best value found");
        return Ok(exit::NON_CONVERGENCE);
    }
    Ok(0)
}

pub fn example(name: ExampleName, n: Option<usize>, output: Option<&Path>) -> Result<u8, Failure> {
    let (e, spec, oracle) = match name {
        ExampleName::Geometric => {
            let e = validate_exponents(2.0, 2.0)?;
            let f = GeometricFamily::new(0.5, 1.0)?;
            (e, geometric_weights(&f, n.unwrap_or(400))?, true)
        }
        ExampleName::Bliss => {
            let e = validate_exponents(2.0, 4.0)?;
            let f = BlissFamily::new(&e, 1.0, 1e4)?;
            (e, bliss_weights(&f, n.unwrap_or(4000))?, false)
        }
    };
    if n == Some(0) {
        return Err(Failure::parse("--N must be at least 1"));
    }
    let opts = BoundOptions {
        oracle: oracle.then(OracleConfig::default),
        ..BoundOptions::default()
    };
    let report = assemble_bounds(&spec, &e, &opts)?;
    emit(&(report.to_json() + "\n"), output)?;
    Ok(report_status(&report))
}

fn inflated_k(e: &Exponents) -> f64 {
    tilde_k(e) * 1.25
}

pub fn selftest(seed: u64, fault: Option<Fault>) -> Result<u8, Failure> {
    let opts = SelfTestOptions {
        seed,
        factor: match fault {
            None => k,
            Some(Fault::KExceedsTildeK) => inflated_k,
        },
        ..SelfTestOptions::default()
    };
    let results = run_selftest(&opts);
    let mut failed = 0;
    for c in &results {
        println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
        if !c.passed {
            failed += 1;
        }
    }
    println!("{} checks, {} failed", results.len(), failed);
    Ok(if failed == 0 { 0 } else { exit::INVARIANT })
}
