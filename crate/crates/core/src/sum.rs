//! Compensated (Neumaier) summation and the prefix/suffix tables built on it.

/// Running Neumaier sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        // inf - inf would poison the result with NaN
        if self.sum.is_finite() {
            self.sum + self.comp
        } else {
            self.sum
        }
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = CompensatedSum::new();
        for x in iter {
            s.add(x);
        }
        s
    }
}

pub fn sum(xs: impl IntoIterator<Item = f64>) -> f64 {
    xs.into_iter().collect::<CompensatedSum>().value()
}

/// `out[n] = x_1 + ... + x_n` for `n = 0..=len`, with `out[0] = 0`.
pub fn prefix_sums(xs: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(xs.len() + 1);
    out.push(0.0);
    let mut acc = CompensatedSum::new();
    for &x in xs {
        acc.add(x);
        out.push(acc.value());
    }
    out
}

/// `out[n] = x_n + ... + x_len` for `n = 1..=len+1` (1-based), with
/// `out[len + 1] = 0`. Index 0 holds the full sum as well.
pub fn suffix_sums(xs: &[f64]) -> Vec<f64> {
    let n = xs.len();
    let mut out = vec![0.0; n + 2];
    let mut acc = CompensatedSum::new();
    for i in (0..n).rev() {
        acc.add(xs[i]);
        out[i + 1] = acc.value();
    }
    out[0] = out[1];
    out
}
