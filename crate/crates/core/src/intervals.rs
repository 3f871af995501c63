//! Restriction and zero-extension of weight pairs between intervals, and the
//! doubling loop that approaches half-line values through finite
//! truncations.

use serde::{Deserialize, Serialize};

use crate::error::{HardyError, Result};
use crate::families::materialize;
use crate::operators::compute_b;
use crate::oracle::{maximize_quotient, OracleConfig};
use crate::refine::delta_one;
use crate::types::{Exponents, Horizon, TruncationMode, TruncationPolicy, WeightKind, WeightSpec};

/// Copy of `spec` on `[1, n]`.
pub fn restrict(spec: &WeightSpec, n: usize) -> Result<WeightSpec> {
    if n < 1 || n > spec.len() {
        return Err(HardyError::IndexOutOfRange {
            index: n,
            lo: 1,
            hi: spec.len(),
        });
    }
    Ok(spec.truncated(n))
}

/// Values for `v` on the new indices `(N, N']`.
#[derive(Debug, Clone, PartialEq)]
pub enum VFill {
    Constant(f64),
    Sequence(Vec<f64>),
}

impl Default for VFill {
    fn default() -> Self {
        VFill::Constant(1.0)
    }
}

/// Extends `spec` to `[1, n_prime]` with `u = 0` and `v = v_fill` on the new
/// indices. The optimal constant and `B` are unchanged.
pub fn extend_zero(spec: &WeightSpec, n_prime: usize, v_fill: &VFill) -> Result<WeightSpec> {
    let n = spec.len();
    if n_prime < n {
        return Err(HardyError::Domain(format!(
            "cannot extend a pair of length {n} to {n_prime}"
        )));
    }
    let extra = n_prime - n;
    let tail = match v_fill {
        VFill::Constant(c) => vec![*c; extra],
        VFill::Sequence(s) => {
            if s.len() != extra {
                return Err(HardyError::InvalidWeights(format!(
                    "v fill has {} values, extension needs {extra}",
                    s.len()
                )));
            }
            s.clone()
        }
    };
    spec.clone().with_zero_tail(tail)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    B,
    Delta1,
    Oracle,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Convergence {
    pub value: f64,
    /// `(N, value)` for every truncation evaluated, in order.
    pub trace: Vec<(usize, f64)>,
    pub converged: bool,
    /// Why the loop stopped without converging, if it did.
    pub note: Option<String>,
}

/// Evaluates `quantity` at `N, 2N, 4N, …` until successive values differ by
/// less than the policy's tail tolerance.
pub fn converge_in_n(
    family: &WeightSpec,
    e: &Exponents,
    quantity: Quantity,
    policy: &TruncationPolicy,
) -> Result<Convergence> {
    converge_in_n_with(family, e, quantity, policy, &OracleConfig::default())
}

pub fn converge_in_n_with(
    family: &WeightSpec,
    e: &Exponents,
    quantity: Quantity,
    policy: &TruncationPolicy,
    oracle: &OracleConfig,
) -> Result<Convergence> {
    policy.validate()?;
    let (start, n_max) = match policy.mode {
        TruncationMode::Doubling { start, n_max } => (start, n_max),
        TruncationMode::Fixed { .. } => {
            return Err(HardyError::Unsupported(
                "converge_in_n needs a doubling truncation policy".into(),
            ))
        }
    };
    if family.horizon() != Horizon::HalfLine
        || matches!(
            family.kind(),
            WeightKind::Explicit | WeightKind::DerivedFromV { .. }
        )
    {
        return Err(HardyError::Unsupported(
            "converge_in_n needs a parametric half-line family".into(),
        ));
    }

    let mut trace = Vec::new();
    let mut n = start;
    let mut note = None;
    let mut converged = false;
    while n <= n_max {
        let spec = match materialize(family, n) {
            Ok(s) => s,
            Err(err) => {
                note = Some(format!("stopped at N = {n}: {err}"));
                break;
            }
        };
        let value = match quantity {
            Quantity::B => compute_b(&spec, e).value,
            Quantity::Delta1 => delta_one(&spec, e)?.value,
            Quantity::Oracle => maximize_quotient(&spec, e, oracle)?.a_est,
        };
        let prev = trace.last().map(|&(_, v)| v);
        trace.push((n, value));
        if !value.is_finite() {
            note = Some(format!("non-finite value at N = {n}"));
            break;
        }
        if let Some(prev) = prev {
            if (value - prev).abs() < policy.tail_tolerance {
                converged = true;
                break;
            }
        }
        n = match n.checked_mul(2) {
            Some(m) => m,
            None => break,
        };
    }
    if !converged && note.is_none() {
        note = Some(format!("N_max = {n_max} reached without convergence"));
    }
    let value = trace.last().map(|&(_, v)| v).unwrap_or(f64::NAN);
    Ok(Convergence {
        value,
        trace,
        converged,
        note,
    })
}
