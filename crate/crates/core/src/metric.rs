//! The fixed metric `B`: its realized diagonal, spectral density and Cauchy transform `G_B`.

use num_complex::Complex64 as C;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Metric {
    /// `k` entries `+1` followed by `n - k` entries `-1`.
    Signature { k: usize, n: usize },
    /// Explicit real nonzero diagonal.
    Diagonal { values: Vec<f64> },
    /// Uniform density on `[-mu1, -mu1 + lminus] ∪ [mu2 - lplus, mu2]`.
    Flat { mu1: f64, lminus: f64, mu2: f64, lplus: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    /// Fraction of positive eigenvalues.
    pub lambda: f64,
    pub tr_b_over_n: f64,
    pub tr_b2_over_n: f64,
    /// Number of distinct eigenvalues; `None` for continuum metrics.
    pub num_distinct: Option<usize>,
}

/// One distinct eigenvalue and its weight in the normalized density.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Atom {
    pub mu: f64,
    pub weight: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    /// `x + i0`
    Above,
    /// `x - i0`
    Below,
}

impl Metric {
    /// Signature metric with the fraction of `+1` entries closest to `lambda`.
    pub fn signature_for(lambda: f64, n: usize) -> Self {
        let k = (lambda * n as f64).round().clamp(0.0, n as f64) as usize;
        Metric::Signature { k, n }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Metric::Signature { k, n } => {
                if *n == 0 || k > n {
                    return Err(Error::InvalidMetric(format!("signature needs 0 <= k <= n, n >= 1 (k={k}, n={n})")));
                }
            }
            Metric::Diagonal { values } => {
                if values.is_empty() {
                    return Err(Error::InvalidMetric("empty diagonal".into()));
                }
                if let Some(v) = values.iter().find(|v| **v == 0.0 || !v.is_finite()) {
                    return Err(Error::InvalidMetric(format!("diagonal entry {v} is not a finite nonzero real")));
                }
            }
            Metric::Flat { mu1, lminus, mu2, lplus } => {
                let ok = *lminus > 0.0 && mu1 > lminus && *lplus > 0.0 && mu2 > lplus;
                if !ok || ![mu1, lminus, mu2, lplus].iter().all(|v| v.is_finite()) {
                    return Err(Error::InvalidMetric(format!(
                        "flat metric needs mu1 > lminus > 0 and mu2 > lplus > 0 (got {mu1}, {lminus}, {mu2}, {lplus})"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Diagonal of `B` at size `n`. Continuum densities use equal-mass quantile midpoints.
    pub fn realize(&self, n: usize) -> Result<Vec<f64>> {
        self.validate()?;
        match self {
            Metric::Signature { k, n: declared } => {
                if *declared != n {
                    return Err(Error::SizeMismatch { declared: *declared, requested: n });
                }
                Ok((0..n).map(|i| if i < *k { 1.0 } else { -1.0 }).collect())
            }
            Metric::Diagonal { values } => {
                if values.len() != n {
                    return Err(Error::SizeMismatch { declared: values.len(), requested: n });
                }
                Ok(values.clone())
            }
            Metric::Flat { .. } => {
                if n < 2 {
                    return Err(Error::InvalidMetric("flat metric needs N >= 2".into()));
                }
                Ok((0..n).map(|i| self.flat_quantile((i as f64 + 0.5) / n as f64)).collect())
            }
        }
    }

    fn flat_quantile(&self, p: f64) -> f64 {
        let Metric::Flat { mu1, lminus, mu2, lplus } = *self else {
            unreachable!("quantile of a continuum metric")
        };
        let q = p * (lminus + lplus);
        if q < lminus {
            -mu1 + q
        } else {
            mu2 - lplus + (q - lminus)
        }
    }

    /// Distinct eigenvalues with weights; `None` for continuum metrics.
    pub fn atoms(&self) -> Option<Vec<Atom>> {
        match self {
            Metric::Signature { k, n } => {
                let lambda = *k as f64 / *n as f64;
                let mut out = Vec::with_capacity(2);
                if *k > 0 {
                    out.push(Atom { mu: 1.0, weight: lambda });
                }
                if k < n {
                    out.push(Atom { mu: -1.0, weight: 1.0 - lambda });
                }
                Some(out)
            }
            Metric::Diagonal { values } => {
                let mut sorted = values.clone();
                sorted.sort_by(f64::total_cmp);
                let total = values.len() as f64;
                let mut out: Vec<Atom> = Vec::new();
                for v in sorted {
                    match out.last_mut() {
                        Some(a) if a.mu == v => a.weight += 1.0 / total,
                        _ => out.push(Atom { mu: v, weight: 1.0 / total }),
                    }
                }
                Some(out)
            }
            Metric::Flat { .. } => None,
        }
    }

    /// Largest |μ| on the support.
    pub fn support_radius(&self) -> f64 {
        match self {
            Metric::Flat { mu1, mu2, .. } => mu1.max(*mu2),
            _ => self.atoms().unwrap_or_default().iter().map(|a| a.mu.abs()).fold(0.0, f64::max),
        }
    }

    /// Density of a continuum metric at real `mu`.
    pub fn flat_density(&self, mu: f64) -> Option<f64> {
        let Metric::Flat { mu1, lminus, mu2, lplus } = *self else {
            return None;
        };
        let inside = (-mu1..=-mu1 + lminus).contains(&mu) || (mu2 - lplus..=mu2).contains(&mu);
        Some(if inside { 1.0 / (lminus + lplus) } else { 0.0 })
    }

    /// Branch points `(a, b)` of each support interval of a continuum metric.
    fn flat_intervals(&self) -> Option<([(f64, f64); 2], f64)> {
        let Metric::Flat { mu1, lminus, mu2, lplus } = *self else {
            return None;
        };
        Some(([(-mu1, -mu1 + lminus), (mu2 - lplus, mu2)], 1.0 / (lminus + lplus)))
    }

    fn on_support(&self, w: C) -> bool {
        match self.flat_intervals() {
            Some((iv, _)) => w.im == 0.0 && iv.iter().any(|&(a, b)| (a..=b).contains(&w.re)),
            None => self.atoms().unwrap_or_default().iter().any(|a| w == C::new(a.mu, 0.0)),
        }
    }

    /// Cauchy transform `G_B(w) = ∫ρ_B(μ)dμ/(w − μ)`.
    pub fn green_b(&self, w: C) -> Result<C> {
        if self.on_support(w) {
            return Err(Error::OnSupport { re: w.re, im: w.im });
        }
        Ok(match self.flat_intervals() {
            Some((iv, rho)) => iv.iter().map(|&(a, b)| (w - a).ln() - (w - b).ln()).sum::<C>() * rho,
            None => self.atoms().unwrap_or_default().iter().map(|a| a.weight / (w - a.mu)).sum(),
        })
    }

    /// `dG_B/dw`.
    pub fn green_b_derivative(&self, w: C) -> Result<C> {
        if self.on_support(w) {
            return Err(Error::OnSupport { re: w.re, im: w.im });
        }
        Ok(match self.flat_intervals() {
            Some((iv, rho)) => iv.iter().map(|&(a, b)| 1.0 / (w - a) - 1.0 / (w - b)).sum::<C>() * rho,
            None => self
                .atoms()
                .unwrap_or_default()
                .iter()
                .map(|a| -a.weight / ((w - a.mu) * (w - a.mu)))
                .sum(),
        })
    }

    /// Boundary value `G_B(x ± i0)` on the real axis.
    pub fn green_b_limit(&self, x: f64, side: Side) -> Result<C> {
        let shift = match side {
            Side::Above => PI,
            Side::Below => -PI,
        };
        match self.flat_intervals() {
            Some((iv, rho)) => {
                let log_limit = |u: f64| -> Result<C> {
                    if u == 0.0 {
                        return Err(Error::OnSupport { re: x, im: 0.0 });
                    }
                    Ok(if u > 0.0 { C::new(u.ln(), 0.0) } else { C::new((-u).ln(), shift) })
                };
                let mut total = C::new(0.0, 0.0);
                for &(a, b) in &iv {
                    total += log_limit(x - a)? - log_limit(x - b)?;
                }
                Ok(total * rho)
            }
            None => self.green_b(C::new(x, 0.0)),
        }
    }

    pub fn summary(&self) -> MetricSummary {
        match self.flat_intervals() {
            Some((iv, rho)) => {
                let moment = |k: i32| {
                    iv.iter()
                        .map(|&(a, b)| (b.powi(k + 1) - a.powi(k + 1)) / (k + 1) as f64)
                        .sum::<f64>()
                        * rho
                };
                MetricSummary {
                    lambda: (iv[1].1 - iv[1].0) * rho,
                    tr_b_over_n: moment(1),
                    tr_b2_over_n: moment(2),
                    num_distinct: None,
                }
            }
            None => {
                let atoms = self.atoms().unwrap_or_default();
                MetricSummary {
                    lambda: atoms.iter().filter(|a| a.mu > 0.0).map(|a| a.weight).sum(),
                    tr_b_over_n: atoms.iter().map(|a| a.weight * a.mu).sum(),
                    tr_b2_over_n: atoms.iter().map(|a| a.weight * a.mu * a.mu).sum(),
                    num_distinct: Some(atoms.len()),
                }
            }
        }
    }

    /// True when all eigenvalues share one sign.
    pub fn is_definite(&self) -> bool {
        let s = self.summary();
        s.lambda == 0.0 || s.lambda == 1.0
    }
}
