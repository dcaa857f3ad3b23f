//! Running moments and goodness-of-fit statistics.

use serde::{Deserialize, Serialize};

/// Welford accumulator. Merging is exact in exact arithmetic; sequential merge order keeps results reproducible.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    pub count: u64,
    pub mean: f64,
    m2: f64,
}

impl Moments {
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let d = x - self.mean;
        self.mean += d / self.count as f64;
        self.m2 += d * (x - self.mean);
    }

    pub fn merge(&mut self, other: &Moments) {
        if other.count == 0 {
            return;
        }
        let n = self.count + other.count;
        let d = other.mean - self.mean;
        self.mean += d * other.count as f64 / n as f64;
        self.m2 += other.m2 + d * d * (self.count as f64 * other.count as f64) / n as f64;
        self.count = n;
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            self.m2 / (self.count - 1) as f64
        }
    }

    pub fn stderr(&self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            (self.variance() / self.count as f64).sqrt()
        }
    }
}

impl FromIterator<f64> for Moments {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut m = Moments::default();
        for x in iter {
            m.push(x);
        }
        m
    }
}

/// One-sample Kolmogorov–Smirnov distance of `sorted` against `cdf`.
pub fn ks_statistic<F: Fn(f64) -> f64>(sorted: &[f64], cdf: F) -> f64 {
    let n = sorted.len() as f64;
    sorted.iter().enumerate().fold(0.0, |acc: f64, (i, &x)| {
        let f = cdf(x);
        acc.max((i + 1) as f64 / n - f).max(f - i as f64 / n)
    })
}

/// Piecewise-linear CDF tabulated on a uniform grid.
#[derive(Clone, Debug)]
pub struct TabulatedCdf {
    lo: f64,
    hi: f64,
    values: Vec<f64>,
}

impl TabulatedCdf {
    /// Integrate `density` panel by panel over `[lo, hi]` and normalize to 1.
    pub fn from_density<F: Fn(f64) -> f64>(density: F, lo: f64, hi: f64, panels: usize) -> Self {
        let h = (hi - lo) / panels as f64;
        let mut values = Vec::with_capacity(panels + 1);
        values.push(0.0);
        let mut acc = 0.0;
        for k in 0..panels {
            let a = lo + k as f64 * h;
            acc += crate::quad::integrate(&density, a, a + h, 1e-13);
            values.push(acc);
        }
        let total = acc;
        for v in &mut values {
            *v /= total;
        }
        TabulatedCdf { lo, hi, values }
    }

    pub fn eval(&self, x: f64) -> f64 {
        if x <= self.lo {
            return 0.0;
        }
        if x >= self.hi {
            return 1.0;
        }
        let panels = self.values.len() - 1;
        let t = (x - self.lo) / (self.hi - self.lo) * panels as f64;
        let k = (t.floor() as usize).min(panels - 1);
        let frac = t - k as f64;
        self.values[k] * (1.0 - frac) + self.values[k + 1] * frac
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn welford_matches_two_pass() {
        let xs: Vec<f64> = (0..100).map(|i| ((i * 37) % 11) as f64 * 0.3 - 1.0).collect();
        let m: Moments = xs.iter().copied().collect();
        let mean = xs.iter().sum::<f64>() / 100.0;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / 99.0;
        assert!((m.mean - mean).abs() < 1e-14 && (m.variance() - var).abs() < 1e-13);
        let mut a: Moments = xs[..40].iter().copied().collect();
        let b: Moments = xs[40..].iter().copied().collect();
        a.merge(&b);
        assert!((a.mean - mean).abs() < 1e-14 && (a.variance() - var).abs() < 1e-13);
    }

    #[test]
    fn ks_of_perfect_uniform_grid() {
        let n = 1000;
        let xs: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect();
        let d = ks_statistic(&xs, |x| x.clamp(0.0, 1.0));
        assert!((d - 0.5 / n as f64).abs() < 1e-12);
    }

    #[test]
    fn tabulated_semicircle_cdf() {
        let cdf = TabulatedCdf::from_density(|x| (4.0 - x * x).max(0.0).sqrt(), -2.0, 2.0, 400);
        assert!((cdf.eval(0.0) - 0.5).abs() < 1e-12);
        // F(1) = 1/2 + (√3/2 + π/3)/(2π)... checked against the closed form.
        let exact = 0.5 + (1.0 * (3.0f64).sqrt() / 2.0 + 2.0 * (0.5f64).asin()) / (2.0 * std::f64::consts::PI);
        assert!((cdf.eval(1.0) - exact).abs() < 1e-6);
    }
}
