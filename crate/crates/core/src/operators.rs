//! The partial-sum operator `H`, the four variational operators, the base
//! quantity `B` and the Hardy quotient.
//!
//! Each operator is evaluated for every `n` at once in `O(N)` from a
//! backward-accumulated suffix table, so sup/inf scans cost one pass.

use serde::{Deserialize, Serialize};

use crate::error::{HardyError, Result};
use crate::sum::{prefix_sums, suffix_sums, sum};
use crate::types::{Exponents, TestSequence, WeightSpec};

/// Bases below this are clamped before being raised to a negative power.
pub const POW_FLOOR: f64 = 1e-300;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OperatorKind {
    /// Single-sum upper operator `I*`.
    IStar,
    /// Double-sum upper operator `II*`.
    IIStar,
    /// Single-sum lower operator `I`.
    I,
    /// Double-sum lower operator `II`.
    II,
}

impl OperatorKind {
    /// `(inner, outer)` powers: `q/p*` and `p*/q` for the starred kinds,
    /// `q - 1` and `p* - 1` otherwise.
    pub fn powers(self, e: &Exponents) -> (f64, f64) {
        match self {
            OperatorKind::IStar | OperatorKind::IIStar => (e.q / e.p_star, e.p_star / e.q),
            OperatorKind::I | OperatorKind::II => (e.q - 1.0, e.p_star - 1.0),
        }
    }

    pub fn is_double(self) -> bool {
        matches!(self, OperatorKind::IIStar | OperatorKind::II)
    }
}

/// A scanned extremum with its 1-based attaining index.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Extremum {
    pub value: f64,
    pub index: usize,
    /// The extremum sits at `n = N`; a larger truncation may move it.
    pub at_boundary: bool,
}

/// `B` together with where the supremum is attained.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BaseQuantity {
    pub value: f64,
    pub index: usize,
    /// Some term overflowed; `value` is `+∞`.
    pub overflow: bool,
}

/// `x^y` honouring `1/0 = ∞` for negative powers and clamping tiny bases.
#[inline]
pub fn pow_clamped(base: f64, exp: f64) -> f64 {
    if exp < 0.0 {
        if base == 0.0 {
            return f64::INFINITY;
        }
        return base.max(POW_FLOOR).powf(exp);
    }
    base.powf(exp)
}

fn check_len(x: &TestSequence, spec: &WeightSpec) -> Result<()> {
    if x.len() != spec.len() {
        return Err(HardyError::InvalidSequence(format!(
            "sequence length {} does not match weight length {}",
            x.len(),
            spec.len()
        )));
    }
    Ok(())
}

/// `H x(n)`; `H x(0) = 0`.
pub fn partial_sum(x: &TestSequence, n: usize) -> Result<f64> {
    x.partial_sum(n)
}

/// `B = max_n (Σ_{i≤n} v̂_i)^{1/p*} (Σ_{j=n}^{N} u_j)^{1/q}`.
pub fn compute_b(spec: &WeightSpec, e: &Exponents) -> BaseQuantity {
    let hv = spec.v_hat_prefix(e);
    let us = spec.u_suffix();
    let mut best = BaseQuantity {
        value: f64::NEG_INFINITY,
        index: 1,
        overflow: false,
    };
    for n in 1..=spec.len() {
        let (h, t) = (hv[n], us[n]);
        if !h.is_finite() || !t.is_finite() {
            return BaseQuantity {
                value: f64::INFINITY,
                index: n,
                overflow: true,
            };
        }
        let val = if t == 0.0 { 0.0 } else { b_term(h, t, e) };
        if val > best.value {
            best.value = val;
            best.index = n;
        }
    }
    if !best.value.is_finite() {
        best.overflow = true;
        best.value = f64::INFINITY;
    }
    best
}

// h^{1/p*} t^{1/q}, falling back to logs when the direct product leaves
// the normal range.
fn b_term(h: f64, t: f64, e: &Exponents) -> f64 {
    let direct = if e.p_star == e.q {
        (h * t).powf(1.0 / e.q)
    } else {
        h.powf(1.0 / e.p_star) * t.powf(1.0 / e.q)
    };
    if direct.is_normal() {
        direct
    } else {
        (h.ln() / e.p_star + t.ln() / e.q).exp()
    }
}

/// Values of the operator for `n = 1..=N` (0-based storage).
pub fn operator_profile(
    kind: OperatorKind,
    x: &TestSequence,
    spec: &WeightSpec,
    e: &Exponents,
) -> Result<Vec<f64>> {
    check_len(x, spec)?;
    let n = x.len();
    let (inner, outer) = kind.powers(e);
    let h = x.prefix();
    let u = spec.u();
    let terms: Vec<f64> = (0..n).map(|j| u[j] * h[j + 1].powf(inner)).collect();
    let tail = suffix_sums(&terms);
    let v_hat = spec.v_hat_vec(e);
    // w_i = v̂_i (Σ_{j≥i} u_j H x(j)^inner)^outer
    let w: Vec<f64> = (0..n).map(|i| v_hat[i] * tail[i + 1].powf(outer)).collect();
    let out = if kind.is_double() {
        let cum = prefix_sums(&w);
        (1..=n).map(|m| divide(cum[m], h[m])).collect()
    } else {
        (0..n).map(|i| divide(w[i], x.as_slice()[i])).collect()
    };
    Ok(out)
}

#[inline]
fn divide(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        f64::INFINITY
    } else {
        num / den
    }
}

/// One operator value at a 1-based `n`. `+∞` when the denominator vanishes.
pub fn evaluate_operator(
    kind: OperatorKind,
    x: &TestSequence,
    spec: &WeightSpec,
    e: &Exponents,
    n: usize,
) -> Result<f64> {
    if n == 0 || n > x.len() {
        return Err(HardyError::IndexOutOfRange {
            index: n,
            lo: 1,
            hi: x.len(),
        });
    }
    Ok(operator_profile(kind, x, spec, e)?[n - 1])
}

fn scan(values: &[f64], better: impl Fn(f64, f64) -> bool) -> Extremum {
    let mut idx = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if better(v, values[idx]) {
            idx = i;
        }
    }
    Extremum {
        value: values[idx],
        index: idx + 1,
        at_boundary: idx + 1 == values.len(),
    }
}

pub fn sup_operator(
    kind: OperatorKind,
    x: &TestSequence,
    spec: &WeightSpec,
    e: &Exponents,
) -> Result<Extremum> {
    Ok(scan(&operator_profile(kind, x, spec, e)?, |a, b| a > b))
}

pub fn inf_operator(
    kind: OperatorKind,
    x: &TestSequence,
    spec: &WeightSpec,
    e: &Exponents,
) -> Result<Extremum> {
    Ok(scan(&operator_profile(kind, x, spec, e)?, |a, b| a < b))
}

/// `‖x‖_{l^p(v)}`.
pub fn lp_norm(x: &TestSequence, spec: &WeightSpec, e: &Exponents) -> f64 {
    let s = sum(x
        .as_slice()
        .iter()
        .zip(spec.v())
        .map(|(&xi, &vi)| vi * xi.powf(e.p)));
    s.powf(1.0 / e.p)
}

/// `‖H x‖_{l^q(u)}`.
pub fn hx_lq_norm(x: &TestSequence, spec: &WeightSpec, e: &Exponents) -> f64 {
    let h = &x.prefix()[1..];
    let s = sum(h.iter().zip(spec.u()).map(|(&hi, &ui)| ui * hi.powf(e.q)));
    s.powf(1.0 / e.q)
}

/// The Hardy quotient `‖H x‖_{l^q(u)} / ‖x‖_{l^p(v)}`.
pub fn quotient(x: &TestSequence, spec: &WeightSpec, e: &Exponents) -> Result<f64> {
    check_len(x, spec)?;
    Ok(divide(hx_lq_norm(x, spec, e), lp_norm(x, spec, e)))
}

/// Upper variational value `(sup_n II*_n(x))^{1/p*}`.
pub fn upper_functional(x: &TestSequence, spec: &WeightSpec, e: &Exponents) -> Result<Extremum> {
    upper_functional_with(OperatorKind::IIStar, x, spec, e)
}

pub(crate) fn upper_functional_with(
    kind: OperatorKind,
    x: &TestSequence,
    spec: &WeightSpec,
    e: &Exponents,
) -> Result<Extremum> {
    let mut ext = sup_operator(kind, x, spec, e)?;
    ext.value = ext.value.powf(1.0 / e.p_star);
    Ok(ext)
}

/// Lower variational value `‖x‖^{p/q - 1} (inf_n II_n(x))^{(p-1)/q}`.
pub fn lower_functional(x: &TestSequence, spec: &WeightSpec, e: &Exponents) -> Result<Extremum> {
    let mut ext = inf_operator(OperatorKind::II, x, spec, e)?;
    let norm = lp_norm(x, spec, e);
    ext.value = pow_clamped(norm, e.p / e.q - 1.0) * ext.value.powf((e.p - 1.0) / e.q);
    Ok(ext)
}
