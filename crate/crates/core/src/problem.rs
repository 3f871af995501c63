//! The JSON problem file: exponents, weights (explicit or a named family),
//! truncation and run options.
//!
//! ```json
//! { "p": 2, "q": 2,
//!   "family": { "kind": "geometric", "gamma": 0.5, "b": 1 },
//!   "N": 400,
//!   "options": { "m": 10, "oracle": true, "seed": 7 } }
//! ```

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::families::{
    bliss_weights, constant_weights, construct_u_from_v, geometric_weights, BlissFamily,
    ConstantFamily, GeometricFamily,
};
use crate::oracle::{OracleConfig, OracleMethod};
use crate::refine::{DeltaOneRule, KGrid, DEFAULT_M_MAX, DEFAULT_TOL};
use crate::types::{validate_exponents, Exponents, TruncationMode, TruncationPolicy, WeightSpec};

/// A problem file that failed to parse or validate.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemError {
    /// 1-based position of a syntax or schema error, when known.
    pub line: Option<usize>,
    pub column: Option<usize>,
    /// Offending field, for semantic errors.
    pub field: Option<String>,
    pub message: String,
}

impl fmt::Display for ProblemError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let (Some(l), Some(c)) = (self.line, self.column) {
            write!(f, "line {l}, column {c}: ")?;
        }
        if let Some(field) = &self.field {
            write!(f, "field `{field}`: ")?;
        }
        f.write_str(&self.message)
    }
}

impl std::error::Error for ProblemError {}

impl ProblemError {
    fn field(field: &str, message: impl Into<String>) -> Self {
        Self {
            line: None,
            column: None,
            field: Some(field.into()),
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FamilySpec {
    Geometric {
        gamma: f64,
        b: f64,
    },
    Bliss {
        #[serde(default = "one")]
        c: f64,
        #[serde(default = "default_d")]
        d: f64,
    },
    Constant {
        u: f64,
        v: f64,
    },
    /// `u` constructed from `v` with scale `c`; `v` needs `N + 1` entries.
    DerivedFromV {
        v: Vec<f64>,
        #[serde(default = "one")]
        c: f64,
    },
}

fn one() -> f64 {
    1.0
}

fn default_d() -> f64 {
    1e4
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Options {
    #[serde(default = "default_m")]
    pub m: usize,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default)]
    pub oracle: bool,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_restarts")]
    pub restarts: usize,
    #[serde(default)]
    pub method: OracleMethod,
    #[serde(default)]
    pub weighted_inner_sum: bool,
    #[serde(default)]
    pub delta_one: DeltaOneRule,
    #[serde(default)]
    pub k_grid: Option<Vec<usize>>,
}

fn default_m() -> usize {
    DEFAULT_M_MAX
}

fn default_tol() -> f64 {
    DEFAULT_TOL
}

fn default_restarts() -> usize {
    OracleConfig::default().restarts
}

impl Default for Options {
    fn default() -> Self {
        Self {
            m: default_m(),
            tol: default_tol(),
            oracle: false,
            seed: 0,
            restarts: default_restarts(),
            method: OracleMethod::default(),
            weighted_inner_sum: false,
            delta_one: DeltaOneRule::default(),
            k_grid: None,
        }
    }
}

impl Options {
    pub fn oracle_config(&self) -> OracleConfig {
        OracleConfig {
            restarts: self.restarts,
            seed: self.seed,
            method: self.method,
            ..OracleConfig::default()
        }
    }

    pub fn k_grid(&self) -> KGrid {
        match &self.k_grid {
            Some(ks) => KGrid::Explicit(ks.clone()),
            None => KGrid::Auto,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Problem {
    pub p: f64,
    pub q: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<FamilySpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v: Option<Vec<f64>>,
    #[serde(rename = "N", default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truncation: Option<TruncationPolicy>,
    #[serde(default)]
    pub options: Options,
}

/// A validated problem ready to run.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub e: Exponents,
    pub spec: WeightSpec,
    pub options: Options,
}

impl Problem {
    pub fn from_json_str(text: &str) -> Result<Problem, ProblemError> {
        serde_json::from_str(text).map_err(|err| ProblemError {
            line: Some(err.line()),
            column: Some(err.column()),
            field: None,
            message: err.to_string(),
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("problem serializes")
    }

    /// Checks the cross-field rules and materializes the weights.
    pub fn resolve(&self) -> Result<Resolved, ProblemError> {
        let e = validate_exponents(self.p, self.q)
            .map_err(|err| ProblemError::field(if self.p <= 1.0 { "p" } else { "q" }, err.to_string()))?;
        let o = &self.options;
        if o.m < 1 {
            return Err(ProblemError::field("options.m", "must be at least 1"));
        }
        if !(o.tol >= 0.0) {
            return Err(ProblemError::field("options.tol", "must be non-negative"));
        }
        if o.restarts < 1 {
            return Err(ProblemError::field("options.restarts", "must be at least 1"));
        }
        if self.n.is_some() && self.truncation.is_some() {
            return Err(ProblemError::field("N", "give either `N` or `truncation`, not both"));
        }
        if let Some(t) = &self.truncation {
            t.validate()
                .map_err(|err| ProblemError::field("truncation", err.to_string()))?;
        }
        let spec = match (&self.family, &self.u, &self.v) {
            (Some(f), None, None) => self.family_spec(f, &e)?,
            (None, Some(u), Some(v)) => self.explicit_spec(u, v)?,
            (Some(_), _, _) => {
                return Err(ProblemError::field(
                    "family",
                    "a family cannot be combined with explicit `u`/`v`",
                ))
            }
            (None, None, _) => return Err(ProblemError::field("u", "missing; give `family` or both `u` and `v`")),
            (None, _, None) => return Err(ProblemError::field("v", "missing; give `family` or both `u` and `v`")),
        };
        Ok(Resolved {
            e,
            spec,
            options: o.clone(),
        })
    }

    fn policy(&self) -> Result<TruncationPolicy, ProblemError> {
        match (self.n, self.truncation) {
            (Some(0), _) => Err(ProblemError::field("N", "must be at least 1")),
            (Some(n), _) => Ok(TruncationPolicy::fixed(n)),
            (None, Some(t)) => Ok(t),
            (None, None) => Err(ProblemError::field("N", "missing; a family needs `N` or `truncation`")),
        }
    }

    fn family_spec(&self, f: &FamilySpec, e: &Exponents) -> Result<WeightSpec, ProblemError> {
        let policy = self.policy()?;
        let n = policy.working_n();
        let built = match f {
            FamilySpec::Geometric { gamma, b } => GeometricFamily::new(*gamma, *b)
                .and_then(|g| geometric_weights(&g, n)),
            FamilySpec::Bliss { c, d } => BlissFamily::new(e, *c, *d).and_then(|b| bliss_weights(&b, n)),
            FamilySpec::Constant { u, v } => constant_weights(&ConstantFamily { u: *u, v: *v }, n),
            FamilySpec::DerivedFromV { v, c } => {
                if matches!(policy.mode, TruncationMode::Doubling { .. }) {
                    return Err(ProblemError::field(
                        "truncation",
                        "derived_from_v needs a fixed `N`",
                    ));
                }
                construct_u_from_v(v, e, *c, n)
            }
        };
        let spec = built.map_err(|err| ProblemError::field("family", err.to_string()))?;
        Ok(spec.with_truncation(policy))
    }

    fn explicit_spec(&self, u: &[f64], v: &[f64]) -> Result<WeightSpec, ProblemError> {
        if matches!(
            self.truncation.map(|t| t.mode),
            Some(TruncationMode::Doubling { .. })
        ) {
            return Err(ProblemError::field(
                "truncation",
                "explicit weights cannot be extended by doubling",
            ));
        }
        let spec = WeightSpec::explicit(u.to_vec(), v.to_vec())
            .map_err(|err| ProblemError::field("u", err.to_string()))?;
        let n = match (self.n, self.truncation.map(|t| t.mode)) {
            (Some(n), _) | (None, Some(TruncationMode::Fixed { n })) => n,
            _ => spec.len(),
        };
        crate::intervals::restrict(&spec, n)
            .map_err(|err| ProblemError::field("N", format!("{err} (explicit weights have {} entries)", spec.len())))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn family_file() {
        let p = Problem::from_json_str(
            r#"{"p": 2, "q": 2, "family": {"kind": "geometric", "gamma": 0.5, "b": 1}, "N": 40}"#,
        )
        .unwrap();
        let r = p.resolve().unwrap();
        assert_eq!(r.spec.len(), 40);
        assert_eq!(r.options, Options::default());
    }

    #[test]
    fn explicit_file() {
        let p = Problem::from_json_str(
            r#"{"p": 1.5, "q": 3, "u": [1, 2, 3], "v": [1, 1, 1], "options": {"m": 3, "oracle": true}}"#,
        )
        .unwrap();
        let r = p.resolve().unwrap();
        assert_eq!(r.spec.len(), 3);
        assert_eq!(r.options.m, 3);
    }

    #[test]
    fn syntax_error_has_position() {
        let err = Problem::from_json_str("{\n  \"p\": 2,\n  \"q\": }").unwrap_err();
        assert_eq!(err.line, Some(3));
        assert!(err.column.is_some());
    }

    #[test]
    fn unknown_field_rejected() {
        let err = Problem::from_json_str(r#"{"p": 2, "q": 2, "u": [1], "v": [1], "w": 3}"#).unwrap_err();
        assert!(err.message.contains("unknown field"));
    }

    #[test]
    fn semantic_errors_name_field() {
        let cases = [
            (r#"{"p": 1, "q": 2, "u": [1], "v": [1]}"#, "p"),
            (r#"{"p": 3, "q": 2, "u": [1], "v": [1]}"#, "q"),
            (r#"{"p": 2, "q": 2, "u": [1]}"#, "v"),
            (r#"{"p": 2, "q": 2, "u": [1], "v": [1, 2]}"#, "u"),
            (r#"{"p": 2, "q": 2, "family": {"kind": "constant", "u": 1, "v": 1}}"#, "N"),
            (r#"{"p": 2, "q": 2, "u": [1], "v": [1], "N": 4}"#, "N"),
            (r#"{"p": 2, "q": 2, "family": {"kind": "geometric", "gamma": 2, "b": 1}, "N": 4}"#, "family"),
            (r#"{"p": 2, "q": 2, "u": [1], "v": [1], "options": {"m": 0}}"#, "options.m"),
        ];
        for (text, field) in cases {
            let err = Problem::from_json_str(text).unwrap().resolve().unwrap_err();
            assert_eq!(err.field.as_deref(), Some(field), "{text}: {err}");
        }
    }

    #[test]
    fn roundtrip() {
        let p = Problem::from_json_str(
            r#"{"p": 2, "q": 4, "family": {"kind": "bliss"}, "truncation": {"mode": "doubling", "start": 64, "n_max": 1024, "tail_tolerance": 1e-6}}"#,
        )
        .unwrap();
        assert_eq!(Problem::from_json_str(&p.to_json()).unwrap(), p);
    }
}
