//! Iterative refinement of the two-sided bounds on the optimal constant.
//!
//! The upper branch iterates `x ↦ v̂ (Σ_{i≥n} u_i (H x(i))^{q/p*})^{p*/q}`
//! from the seed `x_n = H v̂(n)^α − H v̂(n−1)^α`; the lower branch iterates a
//! family `y^{(k,m)}` seeded by `v̂` cut off after `k`. Every iterate is
//! rescaled so that `H x(N) = 1`; all reported values are invariant under
//! that rescaling.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{HardyError, Result};
use crate::operators::{
    lower_functional, quotient, upper_functional, upper_functional_with, Extremum, OperatorKind,
};
use crate::parallel::map_ordered;
use crate::sum::suffix_sums;
use crate::types::{Exponents, TestSequence, WeightSpec};

pub const DEFAULT_M_MAX: usize = 50;
pub const DEFAULT_TOL: f64 = 1e-8;
/// Above this truncation the lower k-scan switches from all `k` to a
/// dyadic grid refined by ternary search.
pub const FULL_K_SCAN_LIMIT: usize = 512;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RefineStatus {
    Improving,
    Converged,
    Diverged,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceRow {
    pub m: usize,
    pub value: f64,
    pub index: usize,
    pub at_boundary: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterationTrace {
    pub rows: Vec<TraceRow>,
    pub status: RefineStatus,
}

impl IterationTrace {
    /// The last (smallest) upper value reached.
    pub fn best(&self) -> Option<&TraceRow> {
        self.rows.last()
    }

    pub fn values(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.value).collect()
    }
}

/// Which operator produces `δ₁` from the seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeltaOneRule {
    /// `(sup II*(x^{(1)}))^{1/p*}`, the same functional as every later step.
    #[default]
    StarOperator,
    /// `(sup II(x^{(1)}))^{1/p*}`.
    #[serde(rename = "literal_ii")]
    LiteralII,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UpperOptions {
    pub m_max: usize,
    pub tol: f64,
    pub delta_one: DeltaOneRule,
}

impl Default for UpperOptions {
    fn default() -> Self {
        Self {
            m_max: DEFAULT_M_MAX,
            tol: DEFAULT_TOL,
            delta_one: DeltaOneRule::default(),
        }
    }
}

fn diverged(what: &str) -> HardyError {
    HardyError::Diverged(format!("{what} produced a non-finite or empty iterate"))
}

/// The seed `x^{(1)}` without rescaling.
pub fn seed_upper(spec: &WeightSpec, e: &Exponents) -> Result<TestSequence> {
    let hv = spec.v_hat_prefix(e);
    seed_from_prefix(&hv, e.alpha, 1.0)
}

/// The seed rescaled so that `H x(N) = 1`.
pub fn seed_upper_normalized(spec: &WeightSpec, e: &Exponents) -> Result<TestSequence> {
    let hv = spec.v_hat_prefix(e);
    let total = hv[spec.len()];
    if !(total.is_finite() && total > 0.0) {
        return Err(diverged("seed_upper"));
    }
    let ratios: Vec<f64> = hv.iter().map(|&h| h / total).collect();
    seed_from_prefix(&ratios, e.alpha, 1.0)
}

// x_n = h(n)^α − h(n−1)^α = h(n−1)^α expm1(α ln1p(v̂_n / h(n−1)))
fn seed_from_prefix(h: &[f64], alpha: f64, scale: f64) -> Result<TestSequence> {
    let n = h.len() - 1;
    let mut x = Vec::with_capacity(n);
    x.push(scale * h[1].powf(alpha));
    for i in 2..=n {
        let prev = h[i - 1];
        let step = h[i] - prev;
        x.push(scale * prev.powf(alpha) * (alpha * (step / prev).ln_1p()).exp_m1());
    }
    TestSequence::new(x).map_err(|_| diverged("seed_upper"))
}

/// One upper step without rescaling. Fails when the iterate overflows.
pub fn iterate_upper_raw(x: &TestSequence, spec: &WeightSpec, e: &Exponents) -> Result<TestSequence> {
    let inner = e.q / e.p_star;
    let outer = e.p_star / e.q;
    weighted_step(x, spec, e, inner, outer, true)
        .and_then(|y| TestSequence::new(y).map_err(|_| diverged("iterate_upper")))
}

/// One upper step, rescaled so that `H x(N) = 1`.
pub fn iterate_upper(x: &TestSequence, spec: &WeightSpec, e: &Exponents) -> Result<TestSequence> {
    let x = x.normalized();
    Ok(iterate_upper_raw(&x, spec, e)?.normalized())
}

// y_n = v̂_n (Σ_{i≥n} w_i (H x(i))^inner)^outer with w = u or w ≡ 1
pub(crate) fn weighted_step(
    x: &TestSequence,
    spec: &WeightSpec,
    e: &Exponents,
    inner: f64,
    outer: f64,
    weighted: bool,
) -> Result<Vec<f64>> {
    if x.len() != spec.len() {
        return Err(HardyError::InvalidSequence(format!(
            "sequence length {} does not match weight length {}",
            x.len(),
            spec.len()
        )));
    }
    let h = x.prefix();
    let u = spec.u();
    let terms: Vec<f64> = (0..x.len())
        .map(|j| {
            let w = if weighted { u[j] } else { 1.0 };
            w * pow_fast(h[j + 1], inner)
        })
        .collect();
    let tail = suffix_sums(&terms);
    let v_hat = spec.v_hat_vec(e);
    Ok((0..x.len())
        .map(|i| v_hat[i] * pow_fast(tail[i + 1], outer))
        .collect())
}

#[inline]
fn pow_fast(base: f64, exp: f64) -> f64 {
    if exp == 1.0 {
        base
    } else {
        base.powf(exp)
    }
}

/// `δ₁` from the seed under the given rule.
pub fn delta_one_with(spec: &WeightSpec, e: &Exponents, rule: DeltaOneRule) -> Result<Extremum> {
    let seed = seed_upper_normalized(spec, e)?;
    let kind = match rule {
        DeltaOneRule::StarOperator => OperatorKind::IIStar,
        DeltaOneRule::LiteralII => OperatorKind::II,
    };
    upper_functional_with(kind, &seed, spec, e)
}

pub fn delta_one(spec: &WeightSpec, e: &Exponents) -> Result<Extremum> {
    delta_one_with(spec, e, DeltaOneRule::default())
}

/// The upper branch after `m` steps.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RefinementState {
    pub m: usize,
    pub x_m: TestSequence,
    pub delta_values: IterationTrace,
}

impl RefinementState {
    pub fn start(spec: &WeightSpec, e: &Exponents, rule: DeltaOneRule) -> Result<Self> {
        let x = seed_upper_normalized(spec, e)?;
        let d1 = delta_one_with(spec, e, rule)?;
        if !d1.value.is_finite() {
            return Err(diverged("delta_one"));
        }
        Ok(Self {
            m: 1,
            x_m: x,
            delta_values: IterationTrace {
                rows: vec![row(1, d1)],
                status: RefineStatus::Improving,
            },
        })
    }

    pub fn status(&self) -> RefineStatus {
        self.delta_values.status
    }

    /// Advances one step and returns the new `δ`. Marks the state diverged
    /// instead of failing when the iterate leaves the finite range.
    pub fn advance(&mut self, spec: &WeightSpec, e: &Exponents) -> Option<f64> {
        let next = iterate_upper(&self.x_m, spec, e)
            .and_then(|x| upper_functional(&x, spec, e).map(|d| (x, d)));
        match next {
            Ok((x, d)) if d.value.is_finite() => {
                self.m += 1;
                self.x_m = x;
                self.delta_values.rows.push(row(self.m, d));
                Some(d.value)
            }
            _ => {
                self.delta_values.status = RefineStatus::Diverged;
                None
            }
        }
    }
}

fn row(m: usize, d: Extremum) -> TraceRow {
    TraceRow {
        m,
        value: d.value,
        index: d.index,
        at_boundary: d.at_boundary,
    }
}

/// `δ₁ ≥ δ₂ ≥ …` until `m_max` or until a step improves by less than `tol`.
pub fn delta_upper(spec: &WeightSpec, e: &Exponents, m_max: usize, tol: f64) -> Result<IterationTrace> {
    delta_upper_with(
        spec,
        e,
        &UpperOptions {
            m_max,
            tol,
            ..UpperOptions::default()
        },
    )
}

pub fn delta_upper_with(spec: &WeightSpec, e: &Exponents, opts: &UpperOptions) -> Result<IterationTrace> {
    if opts.m_max < 1 {
        return Err(HardyError::Domain("m_max must be at least 1".into()));
    }
    let mut state = match RefinementState::start(spec, e, opts.delta_one) {
        Ok(s) => s,
        Err(HardyError::Diverged(_)) => {
            return Ok(IterationTrace {
                rows: Vec::new(),
                status: RefineStatus::Diverged,
            })
        }
        Err(err) => return Err(err),
    };
    while state.m < opts.m_max {
        let prev = state.delta_values.rows.last().map(|r| r.value).unwrap();
        match state.advance(spec, e) {
            Some(d) if prev - d < opts.tol => {
                state.delta_values.status = RefineStatus::Converged;
                break;
            }
            Some(_) => {}
            None => break,
        }
    }
    Ok(state.delta_values)
}

/// `y^{(k,1)}`: `v̂` on `[1, k]`, zero beyond.
pub fn seed_lower(spec: &WeightSpec, e: &Exponents, k: usize) -> Result<TestSequence> {
    if k == 0 || k > spec.len() {
        return Err(HardyError::IndexOutOfRange {
            index: k,
            lo: 1,
            hi: spec.len(),
        });
    }
    let mut y = spec.v_hat_vec(e);
    y[k..].iter_mut().for_each(|t| *t = 0.0);
    TestSequence::new(y).map_err(|_| diverged("seed_lower"))
}

/// One lower step `y_n = v̂_n (Σ_{i≥n} (H y(i))^{q−1})^{p*−1}`, rescaled so
/// that `H y(N) = 1`. With `weighted_inner_sum` each inner term carries
/// `u_i`.
pub fn iterate_lower(
    y: &TestSequence,
    spec: &WeightSpec,
    e: &Exponents,
    weighted_inner_sum: bool,
) -> Result<TestSequence> {
    let y = y.normalized();
    let next = weighted_step(&y, spec, e, e.q - 1.0, e.p_star - 1.0, weighted_inner_sum)?;
    if next.iter().any(|t| !t.is_finite()) {
        return Err(HardyError::NonSummable(
            "lower iterate is not finite at the working truncation".into(),
        ));
    }
    Ok(TestSequence::new(next)
        .map_err(|err| HardyError::NonSummable(err.to_string()))?
        .normalized())
}

/// Which `k` the lower branch scans.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KGrid {
    /// Every `k` up to [`FULL_K_SCAN_LIMIT`], otherwise a dyadic grid
    /// including `N`, refined by ternary search.
    #[default]
    Auto,
    All,
    Explicit(Vec<usize>),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LowerEstimates {
    pub m: usize,
    pub delta_tilde: f64,
    pub k_tilde: usize,
    pub delta_bar: f64,
    pub k_bar: usize,
}

impl LowerEstimates {
    pub fn best(&self) -> f64 {
        self.delta_tilde.max(self.delta_bar)
    }
}

/// `(δ̃, δ̄)` for `m = 1..=m_max` at one `k`.
fn lower_values_for_k(
    spec: &WeightSpec,
    e: &Exponents,
    k: usize,
    m_max: usize,
    weighted: bool,
) -> Result<Vec<(f64, f64)>> {
    let mut y = seed_lower(spec, e, k)?.normalized();
    let mut out = Vec::with_capacity(m_max);
    for m in 1..=m_max {
        if m > 1 {
            y = iterate_lower(&y, spec, e, weighted)?;
        }
        let tilde = lower_functional(&y, spec, e)?.value;
        let bar = quotient(&y, spec, e)?;
        out.push((nan_to_neg(tilde), nan_to_neg(bar)));
    }
    Ok(out)
}

fn nan_to_neg(x: f64) -> f64 {
    if x.is_nan() {
        f64::NEG_INFINITY
    } else {
        x
    }
}

/// `δ̃_m` and `δ̄_m` at a single `m`.
pub fn delta_lower(
    spec: &WeightSpec,
    e: &Exponents,
    m: usize,
    k_grid: &KGrid,
    weighted_inner_sum: bool,
) -> Result<LowerEstimates> {
    Ok(*lower_trace(spec, e, m, k_grid, weighted_inner_sum)?
        .last()
        .expect("m >= 1"))
}

/// `δ̃_m` and `δ̄_m` for every `m = 1..=m_max`.
pub fn lower_trace(
    spec: &WeightSpec,
    e: &Exponents,
    m_max: usize,
    k_grid: &KGrid,
    weighted_inner_sum: bool,
) -> Result<Vec<LowerEstimates>> {
    if m_max < 1 {
        return Err(HardyError::Domain("m must be at least 1".into()));
    }
    let n = spec.len();
    let (grid, refine) = match k_grid {
        KGrid::All => ((1..=n).collect::<Vec<_>>(), false),
        KGrid::Auto if n <= FULL_K_SCAN_LIMIT => ((1..=n).collect(), false),
        KGrid::Auto => (dyadic_grid(n), true),
        KGrid::Explicit(ks) => {
            if ks.is_empty() {
                return Err(HardyError::Domain("empty k grid".into()));
            }
            if let Some(&k) = ks.iter().find(|&&k| k == 0 || k > n) {
                return Err(HardyError::IndexOutOfRange { index: k, lo: 1, hi: n });
            }
            let mut ks = ks.clone();
            ks.sort_unstable();
            ks.dedup();
            (ks, false)
        }
    };

    let mut cache: BTreeMap<usize, Vec<(f64, f64)>> = BTreeMap::new();
    let evaluated = map_ordered(&grid, |&k| lower_values_for_k(spec, e, k, m_max, weighted_inner_sum));
    for (&k, vals) in grid.iter().zip(evaluated) {
        cache.insert(k, vals?);
    }

    if refine {
        for m in 0..m_max {
            for pick in [0usize, 1] {
                let score = |vals: &Vec<(f64, f64)>| if pick == 0 { vals[m].0 } else { vals[m].1 };
                let pos = argmax_first(grid.iter().map(|k| score(&cache[k])));
                let lo = if pos == 0 { grid[0] } else { grid[pos - 1] };
                let hi = grid[(pos + 1).min(grid.len() - 1)];
                ternary_refine(lo, hi, &mut cache, |k| {
                    lower_values_for_k(spec, e, k, m_max, weighted_inner_sum)
                }, |vals| score(vals))?;
            }
        }
    }

    let mut out = Vec::with_capacity(m_max);
    for m in 0..m_max {
        let mut est = LowerEstimates {
            m: m + 1,
            delta_tilde: f64::NEG_INFINITY,
            k_tilde: 0,
            delta_bar: f64::NEG_INFINITY,
            k_bar: 0,
        };
        for (&k, vals) in &cache {
            let (t, b) = vals[m];
            if t > est.delta_tilde || est.k_tilde == 0 {
                est.delta_tilde = t;
                est.k_tilde = k;
            }
            if b > est.delta_bar || est.k_bar == 0 {
                est.delta_bar = b;
                est.k_bar = k;
            }
        }
        out.push(est);
    }
    Ok(out)
}

fn dyadic_grid(n: usize) -> Vec<usize> {
    let mut ks: Vec<usize> = std::iter::successors(Some(1usize), |&k| k.checked_mul(2))
        .take_while(|&k| k < n)
        .collect();
    ks.push(n);
    ks
}

fn argmax_first(values: impl Iterator<Item = f64>) -> usize {
    let mut best = (0, f64::NEG_INFINITY);
    for (i, v) in values.enumerate() {
        if v > best.1 {
            best = (i, v);
        }
    }
    best.0
}

fn ternary_refine<F, S>(
    mut lo: usize,
    mut hi: usize,
    cache: &mut BTreeMap<usize, Vec<(f64, f64)>>,
    eval: F,
    score: S,
) -> Result<()>
where
    F: Fn(usize) -> Result<Vec<(f64, f64)>>,
    S: Fn(&Vec<(f64, f64)>) -> f64,
{
    let get = |k: usize, cache: &mut BTreeMap<usize, Vec<(f64, f64)>>| -> Result<f64> {
        if !cache.contains_key(&k) {
            let vals = eval(k)?;
            cache.insert(k, vals);
        }
        Ok(score(&cache[&k]))
    };
    while hi - lo > 2 {
        let a = lo + (hi - lo) / 3;
        let b = hi - (hi - lo) / 3;
        if get(a, cache)? < get(b, cache)? {
            lo = a;
        } else {
            hi = b;
        }
    }
    for k in lo..=hi {
        get(k, cache)?;
    }
    Ok(())
}
