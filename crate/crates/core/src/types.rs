//! Domain types shared by every module: exponents, weight pairs, test
//! sequences and truncation policies.
//!
//! Indices in the public API are 1-based, matching the usual way the
//! inequality is written. `H x(0) = 0` is stored explicitly in every prefix
//! table.

use serde::{Deserialize, Serialize};

use crate::error::{HardyError, Result};
use crate::families::{BlissFamily, ConstantFamily, GeometricFamily};
use crate::sum::{prefix_sums, suffix_sums};

/// The exponent pair `(p, q)` with `1 < p <= q < ∞` and its derived
/// quantities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Exponents {
    pub p: f64,
    pub q: f64,
    /// Conjugate exponent `p / (p - 1)`.
    pub p_star: f64,
    /// `q/p - 1`; zero exactly when `p == q`.
    pub r: f64,
    /// `q / (p* + q)`, the power used by the upper seed sequence.
    pub alpha: f64,
}

impl Exponents {
    pub fn new(p: f64, q: f64) -> Result<Self> {
        if !(p.is_finite() && q.is_finite()) || p <= 1.0 || q < p {
            return Err(HardyError::InvalidExponents { p, q });
        }
        let p_star = p / (p - 1.0);
        let r = if p == q { 0.0 } else { q / p - 1.0 };
        let alpha = q / (p_star + q);
        Ok(Self {
            p,
            q,
            p_star,
            r,
            alpha,
        })
    }

    pub fn is_diagonal(&self) -> bool {
        self.p == self.q
    }
}

/// Validates `(p, q)` and populates the derived fields.
pub fn validate_exponents(p: f64, q: f64) -> Result<Exponents> {
    Exponents::new(p, q)
}

/// Where a weight pair came from. Parametric kinds can be re-materialized at
/// any truncation; explicit vectors cannot grow.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WeightKind {
    Explicit,
    Geometric(GeometricFamily),
    Bliss(BlissFamily),
    Constant(ConstantFamily),
    /// `u` built from `v` with scale `c` (see `families::construct_u_from_v`).
    DerivedFromV { c: f64 },
}

impl WeightKind {
    pub fn name(&self) -> &'static str {
        match self {
            WeightKind::Explicit => "explicit",
            WeightKind::Geometric(_) => "geometric",
            WeightKind::Bliss(_) => "bliss",
            WeightKind::Constant(_) => "constant",
            WeightKind::DerivedFromV { .. } => "derived-from-v",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Horizon {
    Finite,
    /// The pair is the restriction of a half-line family; computations still
    /// run at the stored truncation.
    HalfLine,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum TruncationMode {
    Fixed { n: usize },
    Doubling { start: usize, n_max: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncationPolicy {
    #[serde(flatten)]
    pub mode: TruncationMode,
    pub tail_tolerance: f64,
}

impl TruncationPolicy {
    pub const DEFAULT_START: usize = 64;
    pub const DEFAULT_N_MAX: usize = 1 << 20;
    pub const DEFAULT_TAIL_TOLERANCE: f64 = 1e-8;

    pub fn fixed(n: usize) -> Self {
        Self {
            mode: TruncationMode::Fixed { n },
            tail_tolerance: Self::DEFAULT_TAIL_TOLERANCE,
        }
    }

    pub fn doubling(start: usize, n_max: usize, tail_tolerance: f64) -> Self {
        Self {
            mode: TruncationMode::Doubling { start, n_max },
            tail_tolerance,
        }
    }

    /// The truncation a single evaluation should run at.
    pub fn working_n(&self) -> usize {
        match self.mode {
            TruncationMode::Fixed { n } => n,
            TruncationMode::Doubling { start, .. } => start,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match self.mode {
            TruncationMode::Fixed { n } => n >= 1,
            TruncationMode::Doubling { start, n_max } => start >= 1 && n_max >= start,
        };
        if !ok || !(self.tail_tolerance > 0.0) {
            return Err(HardyError::Domain(format!(
                "invalid truncation policy {self:?}"
            )));
        }
        Ok(())
    }
}

impl Default for TruncationPolicy {
    fn default() -> Self {
        Self::doubling(
            Self::DEFAULT_START,
            Self::DEFAULT_N_MAX,
            Self::DEFAULT_TAIL_TOLERANCE,
        )
    }
}

/// A weight pair `(u, v)` materialized on `[1, N]`.
///
/// Every `v_i` is positive and finite. Every `u_i` is positive except on a
/// zero tail created by [`crate::intervals::extend_zero`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightSpec {
    kind: WeightKind,
    u: Vec<f64>,
    v: Vec<f64>,
    horizon: Horizon,
    truncation: TruncationPolicy,
    /// First (1-based) index of the zero tail of `u`, if any.
    zero_tail_from: Option<usize>,
}

impl WeightSpec {
    /// An explicit finite pair.
    pub fn explicit(u: Vec<f64>, v: Vec<f64>) -> Result<Self> {
        let n = u.len();
        Self::from_parts(
            WeightKind::Explicit,
            u,
            v,
            Horizon::Finite,
            TruncationPolicy::fixed(n.max(1)),
        )
    }

    pub(crate) fn from_parts(
        kind: WeightKind,
        u: Vec<f64>,
        v: Vec<f64>,
        horizon: Horizon,
        truncation: TruncationPolicy,
    ) -> Result<Self> {
        if u.is_empty() {
            return Err(HardyError::InvalidWeights("empty weight vectors".into()));
        }
        if u.len() != v.len() {
            return Err(HardyError::InvalidWeights(format!(
                "u has length {} but v has length {}",
                u.len(),
                v.len()
            )));
        }
        if let Some(i) = u.iter().position(|&x| !(x.is_finite() && x > 0.0)) {
            return Err(HardyError::InvalidWeights(format!(
                "u[{}] = {} is not positive and finite",
                i + 1,
                u[i]
            )));
        }
        if let Some(i) = v.iter().position(|&x| !(x.is_finite() && x > 0.0)) {
            return Err(HardyError::InvalidWeights(format!(
                "v[{}] = {} is not positive and finite",
                i + 1,
                v[i]
            )));
        }
        Ok(Self {
            kind,
            u,
            v,
            horizon,
            truncation,
            zero_tail_from: None,
        })
    }

    /// Appends a zero `u` tail and a positive `v` tail. Only the intervals
    /// module creates zero weights.
    pub(crate) fn with_zero_tail(mut self, v_tail: Vec<f64>) -> Result<Self> {
        if let Some(i) = v_tail.iter().position(|&x| !(x.is_finite() && x > 0.0)) {
            return Err(HardyError::InvalidWeights(format!(
                "v fill value {} at offset {} is not positive and finite",
                v_tail[i],
                i + 1
            )));
        }
        if v_tail.is_empty() {
            return Ok(self);
        }
        let start = self.u.len() + 1;
        self.u.extend(std::iter::repeat(0.0).take(v_tail.len()));
        self.v.extend(v_tail);
        self.zero_tail_from.get_or_insert(start);
        self.kind = WeightKind::Explicit;
        self.horizon = Horizon::Finite;
        self.truncation = TruncationPolicy::fixed(self.u.len());
        Ok(self)
    }

    /// Copy restricted to `[1, n]`, `1 <= n <= len`.
    pub(crate) fn truncated(&self, n: usize) -> WeightSpec {
        let zero_tail_from = self.zero_tail_from.filter(|&z| z <= n);
        WeightSpec {
            kind: self.kind.clone(),
            u: self.u[..n].to_vec(),
            v: self.v[..n].to_vec(),
            horizon: self.horizon,
            truncation: match self.truncation.mode {
                TruncationMode::Fixed { .. } => TruncationPolicy {
                    mode: TruncationMode::Fixed { n },
                    ..self.truncation
                },
                TruncationMode::Doubling { .. } => self.truncation,
            },
            zero_tail_from,
        }
    }

    pub fn len(&self) -> usize {
        self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }

    pub fn u(&self) -> &[f64] {
        &self.u
    }

    pub fn v(&self) -> &[f64] {
        &self.v
    }

    pub fn kind(&self) -> &WeightKind {
        &self.kind
    }

    pub fn horizon(&self) -> Horizon {
        self.horizon
    }

    pub fn truncation(&self) -> &TruncationPolicy {
        &self.truncation
    }

    pub fn zero_tail_from(&self) -> Option<usize> {
        self.zero_tail_from
    }

    pub fn with_truncation(mut self, truncation: TruncationPolicy) -> Self {
        self.truncation = truncation;
        self
    }

    pub fn with_horizon(mut self, horizon: Horizon) -> Self {
        self.horizon = horizon;
        self
    }

    /// `v_i^(1 - p*)` for a 1-based index.
    pub fn v_hat(&self, e: &Exponents, i: usize) -> Result<f64> {
        if i == 0 || i > self.len() {
            return Err(HardyError::IndexOutOfRange {
                index: i,
                lo: 1,
                hi: self.len(),
            });
        }
        Ok(v_hat_of(self.v[i - 1], e))
    }

    /// All `v_hat` values, 0-based storage.
    pub fn v_hat_vec(&self, e: &Exponents) -> Vec<f64> {
        self.v.iter().map(|&v| v_hat_of(v, e)).collect()
    }

    /// `H v̂(n)` for `n = 0..=N`.
    pub fn v_hat_prefix(&self, e: &Exponents) -> Vec<f64> {
        prefix_sums(&self.v_hat_vec(e))
    }

    /// `Σ_{j=n}^{N} u_j` for `n = 1..=N+1` (1-based, `out[N+1] = 0`).
    pub fn u_suffix(&self) -> Vec<f64> {
        suffix_sums(&self.u)
    }
}

#[inline]
pub(crate) fn v_hat_of(v: f64, e: &Exponents) -> f64 {
    if e.p_star == 2.0 {
        1.0 / v
    } else {
        v.powf(1.0 - e.p_star)
    }
}

/// A candidate sequence in `A[1, N]`: `x_1 > 0`, `x_i >= 0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TestSequence {
    x: Vec<f64>,
    #[serde(skip)]
    prefix: Vec<f64>,
    summable: bool,
}

impl TestSequence {
    pub fn new(x: Vec<f64>) -> Result<Self> {
        if x.is_empty() {
            return Err(HardyError::InvalidSequence("empty sequence".into()));
        }
        if !(x[0] > 0.0) || !x[0].is_finite() {
            return Err(HardyError::InvalidSequence(format!(
                "x_1 = {} must be positive and finite",
                x[0]
            )));
        }
        if let Some(i) = x.iter().position(|&xi| !(xi >= 0.0) || !xi.is_finite()) {
            return Err(HardyError::InvalidSequence(format!(
                "x_{} = {} must be non-negative and finite",
                i + 1,
                x[i]
            )));
        }
        let prefix = prefix_sums(&x);
        Ok(Self {
            x,
            prefix,
            summable: false,
        })
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.x
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.x
    }

    /// `x_i`, 1-based.
    pub fn get(&self, i: usize) -> f64 {
        self.x[i - 1]
    }

    /// Cached `H x(n)` table for `n = 0..=N`.
    pub fn prefix(&self) -> &[f64] {
        &self.prefix
    }

    /// `H x(n)`, with `H x(0) = 0`.
    pub fn partial_sum(&self, n: usize) -> Result<f64> {
        self.prefix
            .get(n)
            .copied()
            .ok_or(HardyError::IndexOutOfRange {
                index: n,
                lo: 0,
                hi: self.len(),
            })
    }

    /// Whether `Σ v_i x_i^p < ∞` has been verified for this sequence.
    pub fn is_summable(&self) -> bool {
        self.summable
    }

    /// Checks membership in `A₀` against `spec` and records the outcome.
    pub fn verify_summable(&mut self, spec: &WeightSpec, e: &Exponents) -> bool {
        let norm = crate::operators::lp_norm(self, spec, e);
        self.summable = norm.is_finite();
        self.summable
    }

    /// The same direction rescaled so that `H x(N) = 1`.
    pub fn normalized(&self) -> TestSequence {
        let total = self.prefix[self.len()];
        let x: Vec<f64> = self.x.iter().map(|&xi| xi / total).collect();
        let prefix = prefix_sums(&x);
        TestSequence {
            x,
            prefix,
            summable: self.summable,
        }
    }

    pub fn scaled(&self, lambda: f64) -> Result<TestSequence> {
        TestSequence::new(self.x.iter().map(|&xi| xi * lambda).collect())
    }
}
