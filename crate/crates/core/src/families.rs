//! Built-in parametric weight families with closed-form ground truth, and
//! the construction of a weight `u` from a given `v`.

use serde::{Deserialize, Serialize};

use crate::error::{HardyError, Result};
use crate::factors;
use crate::sum::prefix_sums;
use crate::types::{Exponents, Horizon, TestSequence, TruncationPolicy, WeightKind, WeightSpec};

/// `u_n = γⁿ`, `v_n = b γⁿ`: a birth–death chain with constant rates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeometricFamily {
    pub gamma: f64,
    pub b: f64,
}

/// Closed-form constants of the geometric family at `p = q = 2` on the half
/// line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GeometricClosedForms {
    pub b: f64,
    /// Common value of the two first lower estimates.
    pub delta_lower_1: f64,
    /// The optimal constant, which also equals the first upper estimate.
    pub a: f64,
}

impl GeometricFamily {
    pub fn new(gamma: f64, b: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma < 1.0) {
            return Err(HardyError::Domain(format!(
                "geometric family needs 0 < gamma < 1, got {gamma}"
            )));
        }
        if !(b > 0.0 && b.is_finite()) {
            return Err(HardyError::Domain(format!(
                "geometric family needs b > 0, got {b}"
            )));
        }
        Ok(Self { gamma, b })
    }

    pub fn closed_forms(&self) -> GeometricClosedForms {
        let sb = self.b.sqrt();
        let g = self.gamma;
        GeometricClosedForms {
            b: 1.0 / (sb * (1.0 - g)),
            delta_lower_1: (1.0 + g).sqrt() / (sb * (1.0 - g)),
            a: 1.0 / (sb * (1.0 - g.sqrt())),
        }
    }

    /// The extremal sequence `a_n = γ^{(1-n)/2} (n - (n-1) γ^{1/2})`.
    pub fn maximizer(&self, n: usize) -> f64 {
        let nf = n as f64;
        self.gamma.powf((1.0 - nf) / 2.0) * (nf - (nf - 1.0) * self.gamma.sqrt())
    }

    /// `H a(n) = n γ^{(1-n)/2}`.
    pub fn maximizer_partial_sum(&self, n: usize) -> f64 {
        let nf = n as f64;
        nf * self.gamma.powf((1.0 - nf) / 2.0)
    }

    /// `Σ_{i=1}^{n} (b γ^i)^{1-p*}` from the geometric-series formula.
    pub fn v_hat_partial_sum(&self, e: &Exponents, n: usize) -> f64 {
        if n == 0 {
            return 0.0;
        }
        let ln_rho = (1.0 - e.p_star) * self.gamma.ln();
        let rho = ln_rho.exp();
        let scale = self.b.powf(1.0 - e.p_star);
        scale * rho * (n as f64 * ln_rho).exp_m1() / ln_rho.exp_m1()
    }

    /// `Σ_{j=from}^{to} γ^j`.
    pub fn u_tail_sum(&self, from: usize, to: usize) -> f64 {
        if from > to {
            return 0.0;
        }
        let g = self.gamma;
        let count = (to - from + 1) as f64;
        -g.powf(from as f64) * (count * g.ln()).exp_m1() / (1.0 - g)
    }
}

/// Geometric weights on `[1, N]`, marked as the restriction of a half-line
/// family.
pub fn geometric_weights(f: &GeometricFamily, n: usize) -> Result<WeightSpec> {
    if n == 0 {
        return Err(HardyError::Domain("truncation N must be at least 1".into()));
    }
    let u: Vec<f64> = (1..=n).map(|i| f.gamma.powi(i as i32)).collect();
    let v: Vec<f64> = u.iter().map(|&g| f.b * g).collect();
    WeightSpec::from_parts(
        WeightKind::Geometric(*f),
        u,
        v,
        Horizon::HalfLine,
        TruncationPolicy::fixed(n),
    )
    .map_err(|err| match err {
        HardyError::InvalidWeights(msg) => HardyError::InvalidWeights(format!(
            "geometric weights underflow at N = {n}: {msg}"
        )),
        other => other,
    })
}

/// `u_n = n^{-q/p*} - (n+1)^{-q/p*}`, `v ≡ 1`; its optimal constant is
/// exactly `k_{q,p}` on the half line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlissFamily {
    pub p: f64,
    pub q: f64,
    /// Scale of the extremal sequence.
    #[serde(default = "one")]
    pub c: f64,
    /// Spread of the extremal sequence.
    #[serde(default = "default_d")]
    pub d: f64,
}

fn one() -> f64 {
    1.0
}

fn default_d() -> f64 {
    1e4
}

impl BlissFamily {
    pub fn new(e: &Exponents, c: f64, d: f64) -> Result<Self> {
        if e.p >= e.q {
            return Err(HardyError::Domain(format!(
                "Bliss family needs p < q, got p={}, q={}",
                e.p, e.q
            )));
        }
        if !(c > 0.0 && c.is_finite() && d > 0.0 && d.is_finite()) {
            return Err(HardyError::Domain(format!(
                "Bliss family needs c, d > 0, got c={c}, d={d}"
            )));
        }
        Ok(Self {
            p: e.p,
            q: e.q,
            c,
            d,
        })
    }

    pub fn exponents(&self) -> Result<Exponents> {
        Exponents::new(self.p, self.q)
    }

    /// `u_n`, written as `n^{-s} (1 - (1 + 1/n)^{-s})` with `s = q/p*`.
    pub fn u(&self, n: usize) -> f64 {
        let e = Exponents::new(self.p, self.q).expect("validated at construction");
        let s = e.q / e.p_star;
        let nf = n as f64;
        nf.powf(-s) * -(-s * (1.0 / nf).ln_1p()).exp_m1()
    }

    /// `B = 1` on the half line.
    pub fn closed_form_b(&self) -> f64 {
        1.0
    }

    /// `A = k_{q,p}` on the half line.
    pub fn closed_form_a(&self) -> f64 {
        factors::k(&self.exponents().expect("validated at construction"))
    }

    /// `c n / (n^r + d)^{1/r}`, the partial sums of the extremal sequence.
    pub fn extremal_partial_sum(&self, n: usize) -> f64 {
        if n == 0 {
            return 0.0;
        }
        let r = self.q / self.p - 1.0;
        let nf = n as f64;
        self.c * (-(self.d * nf.powf(-r)).ln_1p() / r).exp()
    }

    /// The extremal sequence on `[1, N]`.
    ///
    /// Consecutive partial sums are nearly equal for large `n`; each
    /// difference is formed from a log-ratio to avoid cancellation.
    pub fn extremal_sequence(&self, n: usize) -> Result<TestSequence> {
        let r = self.q / self.p - 1.0;
        let d = self.d;
        let mut x = Vec::with_capacity(n);
        for i in 1..=n {
            if i == 1 {
                x.push(self.extremal_partial_sum(1));
                continue;
            }
            let nf = i as f64;
            let a = d * nf.powf(-r);
            // d((n-1)^{-r} - n^{-r})
            let diff = a * (-r * (-1.0 / nf).ln_1p()).exp_m1();
            let log_ratio = (diff / (1.0 + a)).ln_1p() / r;
            x.push(self.extremal_partial_sum(i - 1) * log_ratio.exp_m1());
        }
        TestSequence::new(x)
    }

    /// `∫_N^∞ x^{-q/p*-1} x^q (x^r + d)^{-q/r} dx` through the incomplete
    /// Beta function.
    pub fn tail_integral(&self, n: f64) -> Result<f64> {
        let e = self.exponents()?;
        let r = e.r;
        let a = (e.q - r - 1.0) / r;
        let b = (1.0 + r) / r;
        let x = self.d / (n.powf(r) + self.d);
        Ok(self.d.powf(-e.q / (r * e.p_star)) / r * factors::incomplete_beta(a, b, x)?)
    }
}

pub fn bliss_weights(f: &BlissFamily, n: usize) -> Result<WeightSpec> {
    if n == 0 {
        return Err(HardyError::Domain("truncation N must be at least 1".into()));
    }
    let u: Vec<f64> = (1..=n).map(|i| f.u(i)).collect();
    WeightSpec::from_parts(
        WeightKind::Bliss(*f),
        u,
        vec![1.0; n],
        Horizon::HalfLine,
        TruncationPolicy::fixed(n),
    )
}

/// `u_n ≡ u`, `v_n ≡ v`. On the half line `Σ u_n = ∞`, so the inequality
/// fails there; finite truncations are well posed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstantFamily {
    pub u: f64,
    pub v: f64,
}

pub fn constant_weights(f: &ConstantFamily, n: usize) -> Result<WeightSpec> {
    if n == 0 {
        return Err(HardyError::Domain("truncation N must be at least 1".into()));
    }
    WeightSpec::from_parts(
        WeightKind::Constant(*f),
        vec![f.u; n],
        vec![f.v; n],
        Horizon::HalfLine,
        TruncationPolicy::fixed(n),
    )
}

/// Re-materializes a parametric pair at truncation `n`. Explicit pairs can
/// only be restricted.
pub fn materialize(spec: &WeightSpec, n: usize) -> Result<WeightSpec> {
    let out = match spec.kind() {
        WeightKind::Geometric(f) => geometric_weights(f, n)?,
        WeightKind::Bliss(f) => bliss_weights(f, n)?,
        WeightKind::Constant(f) => constant_weights(f, n)?,
        WeightKind::Explicit | WeightKind::DerivedFromV { .. } => {
            return crate::intervals::restrict(spec, n)
        }
    };
    Ok(out.with_truncation(*spec.truncation()))
}

/// Builds `ũ_n = C^q ((H v̂(n))^{-q/p*} - (H v̂(n+1))^{-q/p*})` on `[1, N]`.
///
/// `v` must hold at least `N + 1` entries: the last `ũ_N` needs
/// `H v̂(N+1)`. The returned pair carries `v` restricted to `[1, N]`.
pub fn construct_u_from_v(v: &[f64], e: &Exponents, c: f64, n: usize) -> Result<WeightSpec> {
    if n == 0 {
        return Err(HardyError::Domain("truncation N must be at least 1".into()));
    }
    if !(c > 0.0 && c.is_finite()) {
        return Err(HardyError::Domain(format!("scale C must be positive, got {c}")));
    }
    if v.len() < n + 1 {
        return Err(HardyError::InvalidWeights(format!(
            "construct_u_from_v needs {} entries of v, got {}",
            n + 1,
            v.len()
        )));
    }
    if let Some(i) = v[..=n].iter().position(|&x| !(x > 0.0 && x.is_finite())) {
        return Err(HardyError::InvalidWeights(format!(
            "v[{}] = {} is not positive and finite",
            i + 1,
            v[i]
        )));
    }
    let v_hat: Vec<f64> = v[..=n]
        .iter()
        .map(|&vi| crate::types::v_hat_of(vi, e))
        .collect();
    let h = prefix_sums(&v_hat);
    let s = e.q / e.p_star;
    let cq = c.powf(e.q);
    // a^{-s} - (a + t)^{-s} = -a^{-s} expm1(-s ln1p(t/a))
    let u: Vec<f64> = (1..=n)
        .map(|i| -cq * h[i].powf(-s) * (-s * (v_hat[i] / h[i]).ln_1p()).exp_m1())
        .collect();
    WeightSpec::from_parts(
        WeightKind::DerivedFromV { c },
        u,
        v[..n].to_vec(),
        Horizon::Finite,
        TruncationPolicy::fixed(n),
    )
}

/// `C^q (H v̂(n))^{-q/p*} - C^q (H v̂(N+1))^{-q/p*}`, the telescoped suffix
/// sum of the constructed `ũ`.
pub fn constructed_suffix(v: &[f64], e: &Exponents, c: f64, n: usize, from: usize) -> f64 {
    let v_hat: Vec<f64> = v[..=n]
        .iter()
        .map(|&vi| crate::types::v_hat_of(vi, e))
        .collect();
    let h = prefix_sums(&v_hat);
    let s = e.q / e.p_star;
    let gap: f64 = crate::sum::sum(v_hat[from..=n].iter().copied());
    // a^{-s} - (a + g)^{-s} = -a^{-s} expm1(-s ln1p(g/a))
    -c.powf(e.q) * h[from].powf(-s) * (-s * (gap / h[from]).ln_1p()).exp_m1()
}
