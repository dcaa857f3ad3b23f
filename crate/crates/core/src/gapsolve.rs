//! Large-N gap equations for an arbitrary invertible metric.
//!
//! Holomorphic phase: `b = −(1/m²) ∫ρ_B(μ) μ/(μb + w) dμ`, equivalently
//! `ζ G_B(ζ) = 1 + m²b²` with `ζ = −w/b`, and `wG = 1 + m²b²`.
//!
//! Non-holomorphic phase (`a = iα`, `b = iβ`): with `Q(μ) = (α²+β²)μ² + 2βyμ + |w|²`,
//! `∫ρ μ²/Q = m²` and `∫ρ μ/Q = 0`; then `G = w̄ ∫ρ/Q` and `wG = 1 − m²(α²+β²)`.
//! The roots of `Q` are `ζ, ζ̄` with `ζ = iξ − βy/(α²+β²)`.

use num_complex::Complex64 as C;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::continuation::{self, Path};
use crate::error::{Error, Result};
use crate::metric::{Atom, Metric};
use crate::poly;
use crate::spectral::Grid2D;

/// Geometric inward steps of the continuation ray.
const RAY_STEPS: usize = 128;
/// Continuation starts at this multiple of the spectral support bound.
const START_FACTOR: f64 = 100.0;
const NEWTON_MAX_ITER: usize = 50;
const STEP_TOL: f64 = 1e-12;
const RESIDUAL_TOL: f64 = 1e-10;
const ARMIJO_C: f64 = 1e-4;
const MAX_BACKTRACK: usize = 40;
/// Above this many distinct metric values the branch is followed by local Newton
/// instead of polynomial roots, whose conditioning degrades with degree.
const MAX_POLY_ATOMS: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Holomorphic,
    Nonholomorphic,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapSolution {
    pub w: C,
    pub phase: Phase,
    /// `b`; purely imaginary `iβ` in the non-holomorphic phase.
    pub b: C,
    /// `α²`, zero in the holomorphic phase.
    pub alpha_sq: f64,
    /// Argument of `G_B` in the unified equation; `None` stands for `ζ = ∞` (`b = 0`).
    pub zeta: Option<C>,
    /// `ξ = Im ζ` of the non-holomorphic map; zero in the holomorphic phase.
    pub map_xi: f64,
    pub green: C,
    /// Residual of the equations that were solved.
    pub residual: f64,
}

impl GapSolution {
    pub fn alpha(&self) -> f64 {
        self.alpha_sq.max(0.0).sqrt()
    }

    pub fn beta(&self) -> f64 {
        self.b.im
    }
}

/// One ray of [`GapSolver::phase_boundary`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryRay {
    pub theta: f64,
    /// Radii where non-holomorphic solvability changes, increasing; empty when the ray misses `D`.
    pub crossings: Vec<f64>,
}

/// `ρ⁽²⁾` sampled on grid nodes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityField {
    pub grid: Grid2D,
    /// Row-major in `y`: index `j * nx + i`.
    pub values: Vec<f64>,
    /// Largest imaginary part of `(1/π)∂G/∂w̄`, which vanishes for a consistent solution.
    pub max_imag: f64,
}

impl DensityField {
    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.grid.nx + i]
    }
}

/// Outcome of a non-holomorphic solve attempt.
#[derive(Clone, Copy, Debug)]
enum NhOutcome {
    Solved { alpha_sq: f64, beta: f64, residual: f64 },
    Diverged { residual: f64 },
}

#[derive(Clone, Debug)]
pub struct GapSolver {
    metric: Metric,
    m: f64,
    atoms: Option<Vec<Atom>>,
    mean_mu: f64,
    support: f64,
}

impl GapSolver {
    pub fn new(metric: Metric, m: f64) -> Result<Self> {
        metric.validate()?;
        if !(m > 0.0 && m.is_finite()) {
            return Err(Error::Config(format!("m must be positive (got {m})")));
        }
        let summary = metric.summary();
        Ok(GapSolver {
            atoms: metric.atoms(),
            mean_mu: summary.tr_b_over_n,
            support: metric.support_radius(),
            metric,
            m,
        })
    }

    pub fn metric(&self) -> &Metric {
        &self.metric
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    /// Bound on the spectral radius of `φ`: `‖A‖ ≤ 2/m`, `‖B‖ = max|μ|`.
    pub fn support_bound(&self) -> f64 {
        2.0 * self.support / self.m
    }

    fn m2(&self) -> f64 {
        self.m * self.m
    }

    fn traceless(&self) -> bool {
        self.mean_mu.abs() <= 1e-14 * self.support
    }

    // ---- holomorphic phase ----

    /// Coefficients in `b` of `m² b ∏(μ_j b + w) + Σ_j p_j μ_j ∏_{k≠j}(μ_k b + w)`.
    fn gap_polynomial(&self, atoms: &[Atom], w: C) -> Vec<C> {
        let factors: Vec<[C; 2]> = atoms.iter().map(|a| [w, C::new(a.mu, 0.0)]).collect();
        let full = factors.iter().fold(vec![C::new(1.0, 0.0)], |acc, f| poly::mul(&acc, f));
        let mut coeffs = poly::mul(&full, &[C::new(0.0, 0.0), C::new(self.m2(), 0.0)]);
        for (j, a) in atoms.iter().enumerate() {
            let partial = factors
                .iter()
                .enumerate()
                .filter(|&(k, _)| k != j)
                .fold(vec![C::new(1.0, 0.0)], |acc, (_, f)| poly::mul(&acc, f));
            for (c, p) in coeffs.iter_mut().zip(&partial) {
                *c += a.weight * a.mu * p;
            }
        }
        coeffs
    }

    /// `b + (1/m²)∫ρ μ/(μb + w)` scaled by `1 + |b|`.
    fn holomorphic_residual(&self, b: C, w: C) -> f64 {
        if b == C::new(0.0, 0.0) {
            return self.mean_mu.abs() / (self.m2() * w.norm());
        }
        (self.gap(b, w).0 / self.m2()).norm() / (1.0 + b.norm())
    }

    /// `∫ρ_B μ/(1 + tμ)` and its `t`-derivative for a continuum metric.
    fn flat_kernel(&self, t: C) -> (C, C) {
        let Metric::Flat { mu1, lminus, mu2, lplus } = self.metric else {
            unreachable!("flat_kernel needs a continuum metric");
        };
        let rho = 1.0 / (lminus + lplus);
        let intervals = [(-mu1, -mu1 + lminus), (mu2 - lplus, mu2)];
        if t.norm() * self.support < 0.25 {
            // Geometric series; the closed form cancels badly for small t.
            let moment = |j: i32| rho * intervals.iter().map(|&(a, c)| (c.powi(j + 1) - a.powi(j + 1)) / (j + 1) as f64).sum::<f64>();
            let (mut j0, mut j1) = (C::new(0.0, 0.0), C::new(0.0, 0.0));
            let mut power = C::new(1.0, 0.0);
            for k in 0..48 {
                j0 += power * moment(k + 1);
                if k + 1 < 48 {
                    j1 -= (k + 1) as f64 * power * moment(k + 2);
                }
                power *= -t;
            }
            return (j0, j1);
        }
        let (mut j0, mut j1) = (C::new(0.0, 0.0), C::new(0.0, 0.0));
        for (a, c) in intervals {
            let (ua, uc) = (1.0 + t * a, 1.0 + t * c);
            let log = (uc / ua).ln();
            j0 += rho * ((c - a) / t - log / (t * t));
            j1 -= rho * ((uc - ua) - 2.0 * log - (1.0 / uc - 1.0 / ua)) / (t * t * t);
        }
        (j0, j1)
    }

    /// `m²b + ∫ρ_B μ/(μb + w)` and its derivative in `b`, for a continuum metric.
    fn flat_gap(&self, b: C, w: C) -> (C, C) {
        let (j0, j1) = self.flat_kernel(b / w);
        (self.m2() * b + j0 / w, self.m2() + j1 / (w * w))
    }

    /// `m²b + ∫ρ_B μ/(μb + w)` and its derivative in `b`.
    fn gap(&self, b: C, w: C) -> (C, C) {
        match &self.atoms {
            Some(atoms) => atoms.iter().fold((self.m2() * b, C::new(self.m2(), 0.0)), |(f, df), a| {
                let d = a.mu * b + w;
                (f + a.weight * a.mu / d, df - a.weight * a.mu * a.mu / (d * d))
            }),
            None => self.flat_gap(b, w),
        }
    }

    fn local_newton(&self, w: C, mut b: C) -> Option<C> {
        for _ in 0..NEWTON_MAX_ITER {
            let (f, df) = self.gap(b, w);
            let step = f / df;
            if !step.is_finite() {
                return None;
            }
            b -= step;
            if step.norm() <= STEP_TOL * b.norm().max(1e-300) {
                return Some(b);
            }
        }
        (self.holomorphic_residual(b, w) <= RESIDUAL_TOL).then_some(b)
    }

    fn holomorphic_solution(&self, w: C, b: C) -> GapSolution {
        let zeta = (b != C::new(0.0, 0.0)).then(|| -w / b);
        GapSolution {
            w,
            phase: Phase::Holomorphic,
            b,
            alpha_sq: 0.0,
            zeta,
            map_xi: 0.0,
            green: (1.0 + self.m2() * b * b) / w,
            residual: self.holomorphic_residual(b, w),
        }
    }

    /// Holomorphic solution on the branch continued from `b ~ −(trB/N)/(m²w)`.
    pub fn solve_holomorphic(&self, w: C) -> Result<GapSolution> {
        if w == C::new(0.0, 0.0) {
            return Err(Error::OutsideDomain { re: 0.0, im: 0.0, reason: "the holomorphic branch is not defined at w = 0".into() });
        }
        if self.traceless() {
            return Ok(self.holomorphic_solution(w, C::new(0.0, 0.0)));
        }
        let path = Path::to(w, START_FACTOR * self.support_bound().max(1.0 / self.m), RAY_STEPS);
        let asymptote = |z: C| -self.mean_mu / (self.m2() * z);
        let b = match &self.atoms {
            Some(atoms) if atoms.len() <= MAX_POLY_ATOMS => {
                let roots_at = |z: C, prev: &[C]| {
                    let coeffs = self.gap_polynomial(atoms, z);
                    if prev.len() + 1 == coeffs.len() {
                        if let Some(r) = poly::aberth(&coeffs, prev, 100) {
                            return Some(r);
                        }
                    }
                    poly::roots(&coeffs)
                };
                let (b, _) = continuation::track(&path, roots_at, asymptote)?;
                b
            }
            _ => continuation::track_newton(&path, |z, guess| self.local_newton(z, guess), asymptote(path.start()))?,
        };
        Ok(self.holomorphic_solution(w, b))
    }

    // ---- non-holomorphic phase ----

    /// `(∫ρ/Q, ∫ρμ/Q, ∫ρμ²/Q)`, or `None` where `Q` is not positive on the support.
    fn q_moments(&self, w: C, alpha_sq: f64, beta: f64) -> Option<[f64; 3]> {
        let (x, y) = (w.re, w.im);
        match &self.atoms {
            Some(atoms) => {
                let mut out = [0.0; 3];
                for a in atoms {
                    let q = (alpha_sq + beta * beta) * a.mu * a.mu + 2.0 * beta * y * a.mu + x * x + y * y;
                    if !(q > 0.0) {
                        return None;
                    }
                    out[0] += a.weight / q;
                    out[1] += a.weight * a.mu / q;
                    out[2] += a.weight * a.mu * a.mu / q;
                }
                Some(out)
            }
            None => {
                let (zeta, xi, big_a) = map_zeta(w, alpha_sq, beta)?;
                let g = self.metric.green_b(zeta).ok()?;
                let part = |p: C, lead: f64| (lead - (p * g).im / xi) / big_a;
                Some([part(C::new(1.0, 0.0), 0.0), part(zeta, 0.0), part(zeta * zeta, 1.0)])
            }
        }
    }

    fn nh_equations(&self, w: C, v: [f64; 2]) -> Option<[f64; 2]> {
        let q = self.q_moments(w, v[0], v[1])?;
        Some([q[2] / self.m2() - 1.0, q[1]])
    }

    fn nh_jacobian(&self, w: C, v: [f64; 2]) -> Option<[[f64; 2]; 2]> {
        let (alpha_sq, beta) = (v[0], v[1]);
        let (x, y) = (w.re, w.im);
        match &self.atoms {
            Some(atoms) => {
                let mut j = [[0.0; 2]; 2];
                for a in atoms {
                    let mu = a.mu;
                    let q = (alpha_sq + beta * beta) * mu * mu + 2.0 * beta * y * mu + x * x + y * y;
                    let dq_da = mu * mu;
                    let dq_db = 2.0 * beta * mu * mu + 2.0 * y * mu;
                    let f1 = a.weight * mu * mu / (q * q) / self.m2();
                    let f2 = a.weight * mu / (q * q);
                    j[0][0] -= f1 * dq_da;
                    j[0][1] -= f1 * dq_db;
                    j[1][0] -= f2 * dq_da;
                    j[1][1] -= f2 * dq_db;
                }
                Some(j)
            }
            None => {
                let mut j = [[0.0; 2]; 2];
                for k in 0..2 {
                    let h = 1e-7 * (1.0 + v[k].abs());
                    let mut vp = v;
                    let mut vm = v;
                    vp[k] += h;
                    vm[k] -= h;
                    let fp = self.nh_equations(w, vp)?;
                    let fm = self.nh_equations(w, vm)?;
                    j[0][k] = (fp[0] - fm[0]) / (2.0 * h);
                    j[1][k] = (fp[1] - fm[1]) / (2.0 * h);
                }
                Some(j)
            }
        }
    }

    fn nh_newton(&self, w: C, start: [f64; 2]) -> NhOutcome {
        let norm2 = |f: [f64; 2]| f[0] * f[0] + f[1] * f[1];
        let mut v = start;
        let Some(mut f) = self.nh_equations(w, v) else {
            return NhOutcome::Diverged { residual: f64::INFINITY };
        };
        for _ in 0..NEWTON_MAX_ITER {
            let res = f[0].abs().max(f[1].abs());
            let Some(j) = self.nh_jacobian(w, v) else {
                return NhOutcome::Diverged { residual: res };
            };
            let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
            if (det == 0.0 && w.im != 0.0) || !det.is_finite() {
                return NhOutcome::Diverged { residual: res };
            }
            // On the real axis β only enters through β², so it stays at its start.
            let d = if w.im == 0.0 {
                [-f[0] / j[0][0], 0.0]
            } else {
                [(-f[0] * j[1][1] + f[1] * j[0][1]) / det, (-j[0][0] * f[1] + j[1][0] * f[0]) / det]
            };
            if !(d[0].is_finite() && d[1].is_finite()) {
                return NhOutcome::Diverged { residual: res };
            }
            let mut t = 1.0;
            let mut accepted = None;
            for _ in 0..MAX_BACKTRACK {
                let trial = [v[0] + t * d[0], v[1] + t * d[1]];
                if let Some(ft) = self.nh_equations(w, trial) {
                    if norm2(ft) <= (1.0 - 2.0 * ARMIJO_C * t) * norm2(f) || norm2(ft) == 0.0 {
                        accepted = Some((trial, ft));
                        break;
                    }
                }
                t *= 0.5;
            }
            let Some((next, fnext)) = accepted else {
                if res <= RESIDUAL_TOL {
                    return NhOutcome::Solved { alpha_sq: v[0], beta: v[1], residual: res };
                }
                return NhOutcome::Diverged { residual: res };
            };
            let step = (t * d[0]).abs().max((t * d[1]).abs());
            v = next;
            f = fnext;
            let res = f[0].abs().max(f[1].abs());
            if res <= RESIDUAL_TOL && step <= STEP_TOL * (1.0 + v[0].abs().max(v[1].abs())) {
                return NhOutcome::Solved { alpha_sq: v[0], beta: v[1], residual: res };
            }
        }
        let res = f[0].abs().max(f[1].abs());
        if res <= RESIDUAL_TOL {
            NhOutcome::Solved { alpha_sq: v[0], beta: v[1], residual: res }
        } else {
            NhOutcome::Diverged { residual: res }
        }
    }

    fn nh_starts(&self, w: C) -> Vec<[f64; 2]> {
        let a0 = 0.5 / self.m2();
        let guess = if w.im != 0.0 { self.mean_mu / (2.0 * self.m2() * w.im) } else { 0.0 };
        let mut starts = vec![[a0, guess], [a0, 0.0], [a0, -guess]];
        // Perturbed restarts.
        starts.extend([[0.25 / self.m2(), 0.5 * guess], [1.0 / self.m2(), 2.0 * guess], [a0, guess + 0.1 / self.m], [a0, guess - 0.1 / self.m]]);
        starts
    }

    /// Non-holomorphic solution with `α² > 0`, or `None` if `w` lies outside `D`.
    ///
    /// Returns an error only when no start converged at all.
    pub fn solve_nonholomorphic(&self, w: C) -> Result<Option<GapSolution>> {
        // Positive- or negative-definite metrics admit no solution: ∫ρμ/Q has a fixed sign.
        if self.metric.is_definite() {
            return Ok(None);
        }
        let mut best = f64::INFINITY;
        let mut any_converged = false;
        for start in self.nh_starts(w) {
            match self.nh_newton(w, start) {
                NhOutcome::Solved { alpha_sq, beta, residual } => {
                    any_converged = true;
                    if alpha_sq > 0.0 {
                        return Ok(self.nonholomorphic_solution(w, alpha_sq, beta, residual));
                    }
                }
                NhOutcome::Diverged { residual } => best = best.min(residual),
            }
        }
        if any_converged {
            Ok(None)
        } else {
            Err(Error::NewtonDivergence { re: w.re, im: w.im, residual: best })
        }
    }

    fn nonholomorphic_solution(&self, w: C, alpha_sq: f64, beta: f64, residual: f64) -> Option<GapSolution> {
        let q = self.q_moments(w, alpha_sq, beta)?;
        let (zeta, xi) = match map_zeta(w, alpha_sq, beta) {
            Some((z, xi, _)) => (Some(z), xi),
            None => (None, 0.0),
        };
        Some(GapSolution {
            w,
            phase: Phase::Nonholomorphic,
            b: C::new(0.0, beta),
            alpha_sq,
            zeta,
            map_xi: xi,
            green: w.conj() * q[0],
            residual,
        })
    }

    /// Non-holomorphic solution if one with `α² > 0` exists, else the holomorphic one.
    pub fn classify_phase(&self, w: C) -> Result<GapSolution> {
        let nh = self.solve_nonholomorphic(w);
        if let Ok(Some(s)) = nh {
            return Ok(s);
        }
        self.solve_holomorphic(w).map_err(|e| Error::Unresolved {
            re: w.re,
            im: w.im,
            holomorphic: e.to_string(),
            nonholomorphic_residual: match nh {
                Err(Error::NewtonDivergence { residual, .. }) => residual,
                _ => 0.0,
            },
        })
    }

    fn solvable(&self, w: C) -> bool {
        matches!(self.solve_nonholomorphic(w), Ok(Some(_)))
    }

    /// Radii along each ray where non-holomorphic solvability switches, by scan and bisection.
    pub fn phase_boundary(&self, thetas: &[f64]) -> Vec<BoundaryRay> {
        const SCAN: usize = 400;
        let r_max = 1.2 * self.support_bound();
        thetas
            .par_iter()
            .map(|&theta| {
                let mut crossings = Vec::new();
                if !self.metric.is_definite() {
                    let radius = |k: usize| r_max * (k as f64 + 1e-3) / SCAN as f64;
                    let mut prev = self.solvable(C::from_polar(radius(0), theta));
                    for k in 1..=SCAN {
                        let cur = self.solvable(C::from_polar(radius(k), theta));
                        if cur != prev {
                            let (mut lo, mut hi) = (radius(k - 1), radius(k));
                            for _ in 0..60 {
                                let mid = 0.5 * (lo + hi);
                                if self.solvable(C::from_polar(mid, theta)) == prev {
                                    lo = mid;
                                } else {
                                    hi = mid;
                                }
                            }
                            crossings.push(0.5 * (lo + hi));
                        }
                        prev = cur;
                    }
                }
                BoundaryRay { theta, crossings }
            })
            .collect()
    }

    /// `ρ⁽²⁾ = (1/π)∂G/∂w̄` on grid nodes by centered differences with step `h`,
    /// using `∂/∂w̄ = (∂x + i∂y)/2`.
    pub fn rho2_numeric(&self, grid: Grid2D, h: f64) -> Result<DensityField> {
        let nodes: Vec<(usize, usize)> = (0..grid.ny).flat_map(|j| (0..grid.nx).map(move |i| (i, j))).collect();
        let values: Vec<Result<C>> = nodes
            .par_iter()
            .map(|&(i, j)| {
                let w = grid.node(i, j);
                let centre = self.classify_phase(w)?;
                let mut g = [C::new(0.0, 0.0); 4];
                for (k, d) in [C::new(h, 0.0), C::new(-h, 0.0), C::new(0.0, h), C::new(0.0, -h)].iter().enumerate() {
                    let s = self.classify_phase(w + d)?;
                    if s.phase != centre.phase {
                        return Err(Error::BoundaryStencil { re: w.re, im: w.im });
                    }
                    g[k] = s.green;
                }
                let dx = (g[0] - g[1]) / (2.0 * h);
                let dy = (g[2] - g[3]) / (2.0 * h);
                Ok(0.5 * (dx + C::new(0.0, 1.0) * dy) / PI)
            })
            .collect();
        let mut out = Vec::with_capacity(values.len());
        let mut max_imag: f64 = 0.0;
        for v in values {
            let v = v?;
            max_imag = max_imag.max(v.im.abs());
            out.push(v.re);
        }
        Ok(DensityField { grid, values: out, max_imag })
    }

    /// `max(|ζG_B(ζ) − 1 − m²(a² + b²)|, |wG − ζG_B(ζ)|)`.
    pub fn unified_check(&self, s: &GapSolution) -> f64 {
        let a2_plus_b2 = match s.phase {
            Phase::Holomorphic => s.b * s.b,
            Phase::Nonholomorphic => C::new(-s.alpha_sq - s.beta() * s.beta(), 0.0),
        };
        let zg = match s.zeta {
            None => C::new(1.0, 0.0),
            Some(z) => match self.metric.green_b(z) {
                Ok(g) => z * g,
                Err(_) => return f64::INFINITY,
            },
        };
        (zg - 1.0 - self.m2() * a2_plus_b2).norm().max((s.w * s.green - zg).norm())
    }

    /// Residual of the split real and imaginary forms of the non-holomorphic map equation.
    pub fn nonholomorphic_split_residual(&self, s: &GapSolution) -> f64 {
        let (Phase::Nonholomorphic, Some(z)) = (s.phase, s.zeta) else {
            return 0.0;
        };
        let Ok(g) = self.metric.green_b(z) else {
            return f64::INFINITY;
        };
        let (x, y) = (s.w.re, s.w.im);
        let r2 = x * x + y * y;
        let beta = s.beta();
        let bracket = 1.0 - self.m2() * (s.alpha_sq + beta * beta);
        let im = -(s.alpha_sq * r2 + beta * beta * x * x).sqrt() / r2 * bracket;
        let re = -beta * y / r2 * bracket;
        (g.im - im).abs().max((g.re - re).abs())
    }

    /// `(1/2πi)∮G dw` over the circle `|w| = radius`, by the periodic trapezoidal rule.
    pub fn contour_mass(&self, radius: f64, points: usize) -> Result<C> {
        let mut acc = C::new(0.0, 0.0);
        for k in 0..points {
            let w = C::from_polar(radius, 2.0 * PI * (k as f64 + 0.5) / points as f64);
            acc += w * self.classify_phase(w)?.green;
        }
        Ok(acc / points as f64)
    }
}

/// `(ζ, ξ, α² + β²)` of the non-holomorphic map, if `ξ > 0`.
fn map_zeta(w: C, alpha_sq: f64, beta: f64) -> Option<(C, f64, f64)> {
    let big_a = alpha_sq + beta * beta;
    let radicand = alpha_sq * w.norm_sqr() + beta * beta * w.re * w.re;
    if !(big_a > 0.0 && radicand > 0.0) {
        return None;
    }
    let xi = radicand.sqrt() / big_a;
    Some((C::new(-beta * w.im / big_a, xi), xi, big_a))
}

/// Cauchy integral `(1/2πi)∮ f(w′)/(w′ − w) dw′` over a closed polygon.
///
/// Each edge integrates the kernel exactly with `f` averaged over its end
/// points. The curve is traversed counterclockwise whatever the sample order.
pub fn island_green(curve: &[C], values: &[C], w: C) -> Result<C> {
    if curve.len() != values.len() {
        return Err(Error::OpenCurve(format!("{} points but {} values", curve.len(), values.len())));
    }
    let mut pts = curve.to_vec();
    let mut vals = values.to_vec();
    if pts.len() > 1 && pts.first() == pts.last() {
        pts.pop();
        vals.pop();
    }
    let n = pts.len();
    if n < 3 {
        return Err(Error::OpenCurve("need at least three distinct samples".into()));
    }
    let mut edges: Vec<f64> = (0..n - 1).map(|k| (pts[k + 1] - pts[k]).norm()).collect();
    let closing = (pts[0] - pts[n - 1]).norm();
    edges.sort_by(f64::total_cmp);
    let median = edges[edges.len() / 2];
    if closing > 4.0 * median {
        return Err(Error::OpenCurve(format!("closing gap {closing:e} exceeds typical spacing {median:e}")));
    }
    let signed_area: f64 = (0..n).map(|k| { let (a, b) = (pts[k], pts[(k + 1) % n]); a.re * b.im - b.re * a.im }).sum();
    if signed_area < 0.0 {
        pts.reverse();
        vals.reverse();
    }
    let mut acc = C::new(0.0, 0.0);
    for k in 0..n {
        let (p, q) = (pts[k], pts[(k + 1) % n]);
        let kernel = ((q - w) / (p - w)).ln();
        acc += 0.5 * (vals[k] + vals[(k + 1) % n]) * kernel;
    }
    Ok(acc / C::new(0.0, 2.0 * PI))
}
