//! Reference computations that share no code with the library: quadrature
//! for Beta integrals, naive double loops for every operator, and a
//! derivative-free search for the optimal constant.

#![allow(dead_code)]

use std::f64::consts::PI;

/// Tanh-sinh quadrature of `f(s, 1 - s)` over `(0, 1)`. The integrand gets
/// both `s` and `1 - s` so endpoint singularities keep full precision.
pub fn tanh_sinh<F: Fn(f64, f64) -> f64>(f: F, tol: f64) -> f64 {
    let eval = |t: f64| -> f64 {
        let sh = PI * t.sinh();
        let s = 1.0 / (1.0 + (-sh).exp());
        let c = 1.0 / (1.0 + sh.exp());
        if s <= 0.0 || c <= 0.0 {
            return 0.0;
        }
        let w = PI * t.cosh() * s * c;
        let v = f(s, c) * w;
        if v.is_finite() {
            v
        } else {
            0.0
        }
    };
    let t_max = 6.5;
    let mut h = 0.5;
    let mut prev = f64::NAN;
    for _ in 0..12 {
        let n = (t_max / h) as i64;
        let total: f64 = (-n..=n).map(|k| eval(k as f64 * h)).sum::<f64>() * h;
        if (total - prev).abs() <= tol * total.abs() {
            return total;
        }
        prev = total;
        h /= 2.0;
    }
    prev
}

/// `∫₀¹ s^{a-1} (1-s)^{b-1} ds` by quadrature.
pub fn beta_quad(a: f64, b: f64) -> f64 {
    tanh_sinh(|s, c| s.powf(a - 1.0) * c.powf(b - 1.0), 1e-14)
}

/// `∫₀ˣ s^{a-1} (1-s)^{b-1} ds = x^a ∫₀¹ y^{a-1} (1 - x y)^{b-1} dy`.
pub fn incomplete_beta_quad(a: f64, b: f64, x: f64) -> f64 {
    x.powf(a) * tanh_sinh(|y, _| y.powf(a - 1.0) * (1.0 - x * y).powf(b - 1.0), 1e-14)
}

pub fn conj(p: f64) -> f64 {
    p / (p - 1.0)
}

pub fn v_hat(v: &[f64], p: f64) -> Vec<f64> {
    v.iter().map(|&t| t.powf(1.0 - conj(p))).collect()
}

/// `H x(n)` by direct summation, `n` 1-based.
pub fn h(x: &[f64], n: usize) -> f64 {
    x[..n].iter().sum()
}

pub fn b_naive(u: &[f64], v: &[f64], p: f64, q: f64) -> f64 {
    let vh = v_hat(v, p);
    let n = u.len();
    (1..=n)
        .map(|k| {
            let a: f64 = vh[..k].iter().sum();
            let t: f64 = u[k - 1..].iter().sum();
            a.powf(1.0 / conj(p)) * t.powf(1.0 / q)
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

pub fn quotient_naive(x: &[f64], u: &[f64], v: &[f64], p: f64, q: f64) -> f64 {
    let n = x.len();
    let num: f64 = (1..=n).map(|i| u[i - 1] * h(x, i).powf(q)).sum();
    let den: f64 = (0..n).map(|i| v[i] * x[i].powf(p)).sum();
    num.powf(1.0 / q) / den.powf(1.0 / p)
}

/// `v̂_i (Σ_{j≥i} w_j (H x(j))^inner)^outer` for every `i`, by double loop.
pub fn inner_naive(x: &[f64], w: &[f64], v: &[f64], p: f64, inner: f64, outer: f64) -> Vec<f64> {
    let vh = v_hat(v, p);
    let n = x.len();
    (1..=n)
        .map(|i| {
            let s: f64 = (i..=n).map(|j| w[j - 1] * h(x, j).powf(inner)).sum();
            vh[i - 1] * s.powf(outer)
        })
        .collect()
}

/// `(single, double)` operator profiles by double loop.
pub fn operators_naive(
    x: &[f64],
    u: &[f64],
    v: &[f64],
    p: f64,
    inner: f64,
    outer: f64,
) -> (Vec<f64>, Vec<f64>) {
    let w = inner_naive(x, u, v, p, inner, outer);
    let n = x.len();
    let single = (0..n)
        .map(|i| if x[i] == 0.0 { f64::INFINITY } else { w[i] / x[i] })
        .collect();
    let double = (1..=n)
        .map(|m| {
            let s: f64 = w[..m].iter().sum();
            s / h(x, m)
        })
        .collect();
    (single, double)
}

/// Sup of the quotient: a coarse grid over `[0, 1]^N` followed by a
/// shrinking compass search. Practical up to `N ≈ 6`.
pub fn brute_force_sup(u: &[f64], v: &[f64], p: f64, q: f64, grid: usize) -> f64 {
    let n = u.len();
    let f = |x: &[f64]| {
        if x[0] <= 0.0 || x.iter().any(|&t| t < 0.0) {
            f64::NEG_INFINITY
        } else {
            quotient_naive(x, u, v, p, q)
        }
    };
    let mut best_x = vec![1.0; n];
    let mut best = f(&best_x);
    let mut idx = vec![0usize; n];
    loop {
        let x: Vec<f64> = idx.iter().map(|&i| (i + 1) as f64 / grid as f64).collect();
        let val = f(&x);
        if val > best {
            best = val;
            best_x = x;
        }
        let mut d = 0;
        while d < n {
            idx[d] += 1;
            if idx[d] < grid {
                break;
            }
            idx[d] = 0;
            d += 1;
        }
        if d == n {
            break;
        }
    }
    let mut step = 0.5 / grid as f64;
    while step > 1e-12 {
        let mut improved = false;
        for d in 0..n {
            for sgn in [1.0, -1.0] {
                let mut y = best_x.clone();
                y[d] = (y[d] * (1.0 + sgn * step)).max(0.0);
                let val = f(&y);
                if val > best {
                    best = val;
                    best_x = y;
                    improved = true;
                }
            }
        }
        if !improved {
            step /= 2.0;
        }
    }
    best
}
