//! Assembly of two-sided bounds into a labelled report, and the number
//! formatting shared by every structured output.

use serde::{Serialize, Serializer};

use crate::error::Result;
use crate::factors::{k, tilde_k};
use crate::families::materialize;
use crate::intervals::{converge_in_n_with, Quantity};
use crate::operators::compute_b;
use crate::oracle::{maximize_quotient, OracleConfig};
use crate::refine::{delta_one_with, lower_trace, DeltaOneRule, KGrid};
use crate::types::{Exponents, TruncationMode, WeightKind, WeightSpec};

/// Significant digits of every number in structured output.
pub const SIGNIFICANT_DIGITS: usize = 15;

/// `x` rounded to 15 significant digits.
pub fn round_sig(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x)
        .parse()
        .unwrap_or(x)
}

/// Text form used in CSV and JSON: shortest round-trip of the rounded
/// value, or `inf`, `-inf`, `nan`.
pub fn format_number(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{}", round_sig(x))
    }
}

/// Serializes finite values rounded to 15 significant digits and
/// non-finite values as strings.
pub fn serialize_sig<S: Serializer>(x: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if x.is_finite() {
        s.serialize_f64(round_sig(*x))
    } else {
        s.serialize_str(&format_number(*x))
    }
}

pub fn serialize_sig_opt<S: Serializer>(x: &Option<f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match x {
        Some(v) => serialize_sig(v, s),
        None => s.serialize_none(),
    }
}

pub fn serialize_sig_vec<S: Serializer>(xs: &[f64], s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    struct Sig(f64);
    impl Serialize for Sig {
        fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
            serialize_sig(&self.0, s)
        }
    }
    let mut seq = s.serialize_seq(Some(xs.len()))?;
    for &x in xs {
        seq.serialize_element(&Sig(x))?;
    }
    seq.end()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MethodLabel {
    ClosedForm,
    TruncatedSum,
    Oracle,
    Refinement,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LabelledValue {
    pub label: String,
    #[serde(serialize_with = "serialize_sig")]
    pub value: f64,
    pub method: MethodLabel,
    /// Attaining index (`n` or `k`) when the value is a scanned extremum.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub index: Option<usize>,
}

impl LabelledValue {
    fn new(label: &str, value: f64, method: MethodLabel, index: Option<usize>) -> Self {
        Self {
            label: label.into(),
            value,
            method,
            index,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Residuals {
    pub b_overflow: bool,
    pub delta_one_at_boundary: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle_converged: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle_iterations: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub truncation_converged: Option<bool>,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub family: String,
    pub exponents: ExponentsOut,
    #[serde(rename = "B", serialize_with = "serialize_sig")]
    pub b: f64,
    pub lower_bounds: Vec<LabelledValue>,
    pub upper_bounds: Vec<LabelledValue>,
    /// Exact half-line values for families that have them.
    pub reference: Vec<LabelledValue>,
    pub truncation_used: usize,
    pub residuals: Residuals,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExponentsOut {
    #[serde(serialize_with = "serialize_sig")]
    pub p: f64,
    #[serde(serialize_with = "serialize_sig")]
    pub q: f64,
    #[serde(serialize_with = "serialize_sig")]
    pub p_star: f64,
    #[serde(serialize_with = "serialize_sig")]
    pub r: f64,
    #[serde(serialize_with = "serialize_sig")]
    pub alpha: f64,
}

impl From<&Exponents> for ExponentsOut {
    fn from(e: &Exponents) -> Self {
        Self {
            p: e.p,
            q: e.q,
            p_star: e.p_star,
            r: e.r,
            alpha: e.alpha,
        }
    }
}

impl BoundReport {
    pub fn lower(&self, label: &str) -> Option<f64> {
        self.lower_bounds.iter().find(|l| l.label == label).map(|l| l.value)
    }

    pub fn upper(&self, label: &str) -> Option<f64> {
        self.upper_bounds.iter().find(|l| l.label == label).map(|l| l.value)
    }

    /// Pairs `(lower, upper)` with `lower > upper + tol·max(1, |upper|)`.
    pub fn ordering_violations(&self, tol: f64) -> Vec<(String, String)> {
        let mut out = Vec::new();
        for lo in &self.lower_bounds {
            for up in &self.upper_bounds {
                if lo.value > up.value + tol * up.value.abs().max(1.0) {
                    out.push((lo.label.clone(), up.label.clone()));
                }
            }
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundOptions {
    pub oracle: Option<OracleConfig>,
    pub weighted_inner_sum: bool,
    pub k_grid: KGrid,
    pub delta_one: DeltaOneRule,
}

impl Default for BoundOptions {
    fn default() -> Self {
        Self {
            oracle: None,
            weighted_inner_sum: false,
            k_grid: KGrid::Auto,
            delta_one: DeltaOneRule::default(),
        }
    }
}

/// Resolves the truncation: a doubling policy on a parametric family runs
/// `B` and `δ₁` to convergence and uses the larger final `N`.
pub fn resolve_truncation(spec: &WeightSpec, e: &Exponents, residuals: &mut Residuals) -> Result<WeightSpec> {
    let policy = *spec.truncation();
    let parametric = !matches!(
        spec.kind(),
        WeightKind::Explicit | WeightKind::DerivedFromV { .. }
    );
    match policy.mode {
        TruncationMode::Doubling { .. } if parametric => {
            let oracle = OracleConfig::default();
            let b = converge_in_n_with(spec, e, Quantity::B, &policy, &oracle)?;
            let d = converge_in_n_with(spec, e, Quantity::Delta1, &policy, &oracle)?;
            residuals.truncation_converged = Some(b.converged && d.converged);
            residuals.notes.extend(b.note.map(|n| format!("B: {n}")));
            residuals.notes.extend(d.note.map(|n| format!("delta_1: {n}")));
            let n = b
                .trace
                .last()
                .map(|t| t.0)
                .max(d.trace.last().map(|t| t.0))
                .unwrap_or(policy.working_n());
            materialize(spec, n)
        }
        _ => Ok(spec.clone()),
    }
}

/// All bounds available for `spec` at its working truncation.
pub fn assemble_bounds(spec: &WeightSpec, e: &Exponents, opts: &BoundOptions) -> Result<BoundReport> {
    let mut residuals = Residuals::default();
    let spec = resolve_truncation(spec, e, &mut residuals)?;

    let b = compute_b(&spec, e);
    residuals.b_overflow = b.overflow;
    let d1 = delta_one_with(&spec, e, opts.delta_one)?;
    residuals.delta_one_at_boundary = d1.at_boundary;
    let lower = lower_trace(&spec, e, 1, &opts.k_grid, opts.weighted_inner_sum)?[0];

    let mut lower_bounds = vec![
        LabelledValue::new("B", b.value, MethodLabel::TruncatedSum, Some(b.index)),
        LabelledValue::new("delta_tilde_1", lower.delta_tilde, MethodLabel::Refinement, Some(lower.k_tilde)),
        LabelledValue::new("delta_bar_1", lower.delta_bar, MethodLabel::Refinement, Some(lower.k_bar)),
    ];
    if let Some(cfg) = &opts.oracle {
        let res = maximize_quotient(&spec, e, cfg)?;
        residuals.oracle_converged = Some(res.converged);
        residuals.oracle_iterations = Some(res.iterations);
        lower_bounds.push(LabelledValue::new("oracle", res.a_est, MethodLabel::Oracle, None));
    }
    let upper_bounds = vec![
        LabelledValue::new("delta_1", d1.value, MethodLabel::Refinement, Some(d1.index)),
        LabelledValue::new("k_qp_times_B", k(e) * b.value, MethodLabel::TruncatedSum, None),
        LabelledValue::new("tilde_k_qp_times_B", tilde_k(e) * b.value, MethodLabel::TruncatedSum, None),
    ];

    Ok(BoundReport {
        family: spec.kind().name().into(),
        exponents: e.into(),
        b: b.value,
        lower_bounds,
        upper_bounds,
        reference: reference_values(&spec, e),
        truncation_used: spec.len(),
        residuals,
    })
}

fn reference_values(spec: &WeightSpec, e: &Exponents) -> Vec<LabelledValue> {
    let cf = MethodLabel::ClosedForm;
    match spec.kind() {
        WeightKind::Geometric(f) if e.p == 2.0 && e.q == 2.0 => {
            let c = f.closed_forms();
            vec![
                LabelledValue::new("B", c.b, cf, None),
                LabelledValue::new("A", c.a, cf, None),
                LabelledValue::new("delta_1", c.a, cf, None),
                LabelledValue::new("delta_tilde_1", c.delta_lower_1, cf, None),
                LabelledValue::new("delta_bar_1", c.delta_lower_1, cf, None),
            ]
        }
        WeightKind::Bliss(f) => vec![
            LabelledValue::new("B", f.closed_form_b(), cf, None),
            LabelledValue::new("A", f.closed_form_a(), cf, None),
        ],
        _ => Vec::new(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::{geometric_weights, GeometricFamily};
    use crate::types::validate_exponents;

    #[test]
    fn rounding() {
        assert_eq!(round_sig(std::f64::consts::PI), 3.14159265358979);
        assert_eq!(format_number(f64::INFINITY), "inf");
        assert_eq!(format_number(f64::NAN), "nan");
        assert_eq!(format_number(2.0), "2");
    }

    #[test]
    fn geometric_report() {
        let e = validate_exponents(2.0, 2.0).unwrap();
        let spec = geometric_weights(&GeometricFamily::new(0.5, 1.0).unwrap(), 60).unwrap();
        let r = assemble_bounds(&spec, &e, &BoundOptions::default()).unwrap();
        assert!(r.ordering_violations(1e-9).is_empty());
        assert!(r.lower("B").is_some());
        assert!(r.upper("k_qp_times_B").is_some());
        assert!(r.upper("tilde_k_qp_times_B").is_some());
        let json: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(json["truncation_used"], 60);
        for b in json["upper_bounds"].as_array().unwrap() {
            assert!(b["method"].is_string());
        }
    }
}
