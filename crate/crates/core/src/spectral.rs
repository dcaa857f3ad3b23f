//! Eigenvalues of `φ`, real/conjugate-pair classification and empirical densities.

use num_complex::Complex64 as C;
use serde::{Deserialize, Serialize};
use std::io::Write;

use crate::error::Result;
use crate::ensemble::PhSample;
use crate::linalg;
use crate::stats::Moments;

pub const DEFAULT_TOL_FACTOR: f64 = 1e-9;
/// Conjugate partners must lie within this multiple of the spectral radius.
pub const PAIR_MATCH_FACTOR: f64 = 1e-6;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpectrumSample {
    pub eigs: Vec<C>,
    pub real_eigs: Vec<f64>,
    /// One representative per conjugate pair, with positive imaginary part.
    pub pair_eigs: Vec<C>,
    pub tol_used: f64,
    pub sample_seed: u64,
    /// Unpaired non-real eigenvalues that were counted as real.
    pub reclassified: usize,
}

impl SpectrumSample {
    pub fn n(&self) -> usize {
        self.eigs.len()
    }

    pub fn real_count(&self) -> usize {
        self.real_eigs.len()
    }
}

pub fn eigenvalues(phi: &crate::CMat) -> Result<Vec<C>> {
    linalg::eigenvalues(phi)
}

/// Split `eigs` into real eigenvalues and conjugate pairs.
///
/// Real iff `|Im λ| ≤ tol_factor·scale`. The rest are paired globally by
/// increasing `|λ − μ*|`, accepting distances up to `PAIR_MATCH_FACTOR·scale`;
/// leftovers are counted as real and reported in `reclassified`.
pub fn classify(eigs: &[C], scale: f64, tol_factor: f64) -> SpectrumSample {
    let tol = tol_factor * scale;
    let mut real_eigs = Vec::new();
    let mut upper = Vec::new();
    let mut lower = Vec::new();
    for &e in eigs {
        if e.im.abs() <= tol {
            real_eigs.push(e.re);
        } else if e.im > 0.0 {
            upper.push(e);
        } else {
            lower.push(e);
        }
    }
    let max_dist = PAIR_MATCH_FACTOR * scale;
    let mut candidates = Vec::new();
    for (i, u) in upper.iter().enumerate() {
        for (j, l) in lower.iter().enumerate() {
            let d = (u - l.conj()).norm();
            if d <= max_dist {
                candidates.push((d, i, j));
            }
        }
    }
    candidates.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut used_u = vec![false; upper.len()];
    let mut used_l = vec![false; lower.len()];
    let mut pair_eigs = Vec::with_capacity(upper.len());
    for (_, i, j) in candidates {
        if !used_u[i] && !used_l[j] {
            used_u[i] = true;
            used_l[j] = true;
            pair_eigs.push(0.5 * (upper[i] + lower[j].conj()));
        }
    }
    let mut reclassified = 0;
    for (e, used) in upper.iter().zip(&used_u).chain(lower.iter().zip(&used_l)) {
        if !used {
            real_eigs.push(e.re);
            reclassified += 1;
        }
    }
    if reclassified > 0 {
        log::warn!("{reclassified} unpaired non-real eigenvalues counted as real");
    }
    SpectrumSample { eigs: eigs.to_vec(), real_eigs, pair_eigs, tol_used: tol, sample_seed: 0, reclassified }
}

/// Eigensolve and classify one sample with the default tolerance.
pub fn analyze(sample: &PhSample) -> Result<SpectrumSample> {
    let eigs = eigenvalues(&sample.phi)?;
    let scale = eigs.iter().map(|e| e.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let mut s = classify(&eigs, scale, DEFAULT_TOL_FACTOR);
    s.sample_seed = sample.seed;
    Ok(s)
}

/// Uniform 1D histogram with bins `[lo, hi)` and the last bin closed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Histogram1D {
    pub lo: f64,
    pub hi: f64,
    pub counts: Vec<u64>,
    /// Number of eigenvalues the density is normalized by (all eigenvalues, real or not).
    pub normalizer: u64,
    pub out_of_range: u64,
}

impl Histogram1D {
    pub fn new(bins: usize, lo: f64, hi: f64) -> Self {
        assert!(bins >= 1 && hi > lo, "invalid histogram range");
        Histogram1D { lo, hi, counts: vec![0; bins], normalizer: 0, out_of_range: 0 }
    }

    pub fn width(&self) -> f64 {
        (self.hi - self.lo) / self.counts.len() as f64
    }

    pub fn bin_of(&self, x: f64) -> Option<usize> {
        if !(x >= self.lo && x <= self.hi) {
            return None;
        }
        let k = ((x - self.lo) / self.width()).floor() as usize;
        Some(k.min(self.counts.len() - 1))
    }

    pub fn add(&mut self, x: f64) {
        match self.bin_of(x) {
            Some(k) => self.counts[k] += 1,
            None => self.out_of_range += 1,
        }
    }

    pub fn merge(&mut self, other: &Histogram1D) {
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        self.normalizer += other.normalizer;
        self.out_of_range += other.out_of_range;
    }

    pub fn centers(&self) -> Vec<f64> {
        let w = self.width();
        (0..self.counts.len()).map(|k| self.lo + (k as f64 + 0.5) * w).collect()
    }

    pub fn density(&self) -> Vec<f64> {
        let norm = self.normalizer.max(1) as f64 * self.width();
        self.counts.iter().map(|&c| c as f64 / norm).collect()
    }

    /// Total mass: in-range count over the normalizer.
    pub fn mass(&self) -> f64 {
        self.counts.iter().sum::<u64>() as f64 / self.normalizer.max(1) as f64
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "x_center,density")?;
        for (x, d) in self.centers().iter().zip(self.density()) {
            writeln!(out, "{x},{d}")?;
        }
        Ok(())
    }
}

/// Rectangular grid of cell centers or nodes.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid2D {
    pub x_min: f64,
    pub x_max: f64,
    pub nx: usize,
    pub y_min: f64,
    pub y_max: f64,
    pub ny: usize,
}

impl Grid2D {
    pub fn square(half_width: f64, n: usize) -> Self {
        Grid2D { x_min: -half_width, x_max: half_width, nx: n, y_min: -half_width, y_max: half_width, ny: n }
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / self.nx as f64
    }

    pub fn dy(&self) -> f64 {
        (self.y_max - self.y_min) / self.ny as f64
    }

    /// Node `(i, j)` of an `nx × ny` lattice including both end points.
    pub fn node(&self, i: usize, j: usize) -> C {
        let fx = if self.nx > 1 { i as f64 / (self.nx - 1) as f64 } else { 0.5 };
        let fy = if self.ny > 1 { j as f64 / (self.ny - 1) as f64 } else { 0.5 };
        C::new(self.x_min + fx * (self.x_max - self.x_min), self.y_min + fy * (self.y_max - self.y_min))
    }

    pub fn cell_center(&self, i: usize, j: usize) -> C {
        C::new(self.x_min + (i as f64 + 0.5) * self.dx(), self.y_min + (j as f64 + 0.5) * self.dy())
    }

    fn is_mirror_symmetric(&self) -> bool {
        self.y_min == -self.y_max
    }
}

/// Cell counts over a [`Grid2D`] with half-open cells, last row and column closed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Histogram2D {
    pub grid: Grid2D,
    /// Row-major in `y`: index `j * nx + i`.
    pub counts: Vec<u64>,
    pub normalizer: u64,
    pub out_of_range: u64,
}

fn axis_bin(v: f64, lo: f64, hi: f64, n: usize) -> Option<usize> {
    if !(v >= lo && v <= hi) {
        return None;
    }
    Some((((v - lo) / (hi - lo) * n as f64).floor() as usize).min(n - 1))
}

impl Histogram2D {
    pub fn new(grid: Grid2D) -> Self {
        Histogram2D { grid, counts: vec![0; grid.nx * grid.ny], normalizer: 0, out_of_range: 0 }
    }

    pub fn cell_of(&self, z: C) -> Option<(usize, usize)> {
        let g = &self.grid;
        Some((axis_bin(z.re, g.x_min, g.x_max, g.nx)?, axis_bin(z.im, g.y_min, g.y_max, g.ny)?))
    }

    pub fn add(&mut self, z: C) {
        match self.cell_of(z) {
            Some((i, j)) => self.counts[j * self.grid.nx + i] += 1,
            None => self.out_of_range += 1,
        }
    }

    /// Add `p` and `p*`; on a mirror-symmetric grid the partner goes to the mirrored cell.
    pub fn add_pair(&mut self, p: C) {
        if !self.grid.is_mirror_symmetric() {
            self.add(p);
            self.add(p.conj());
            return;
        }
        match self.cell_of(p) {
            Some((i, j)) => {
                let nx = self.grid.nx;
                self.counts[j * nx + i] += 1;
                self.counts[(self.grid.ny - 1 - j) * nx + i] += 1;
            }
            None => self.out_of_range += 2,
        }
    }

    pub fn merge(&mut self, other: &Histogram2D) {
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        self.normalizer += other.normalizer;
        self.out_of_range += other.out_of_range;
    }

    pub fn cell_area(&self) -> f64 {
        self.grid.dx() * self.grid.dy()
    }

    pub fn count(&self, i: usize, j: usize) -> u64 {
        self.counts[j * self.grid.nx + i]
    }

    pub fn density(&self, i: usize, j: usize) -> f64 {
        self.count(i, j) as f64 / (self.normalizer.max(1) as f64 * self.cell_area())
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "x_center,y_center,density")?;
        for j in 0..self.grid.ny {
            for i in 0..self.grid.nx {
                let c = self.grid.cell_center(i, j);
                writeln!(out, "{},{},{}", c.re, c.im, self.density(i, j))?;
            }
        }
        Ok(())
    }
}

pub fn empirical_density_1d(samples: &[SpectrumSample], bins: usize, range: (f64, f64)) -> Histogram1D {
    let mut h = Histogram1D::new(bins, range.0, range.1);
    for s in samples {
        for &x in &s.real_eigs {
            h.add(x);
        }
        h.normalizer += s.n() as u64;
    }
    h
}

/// Density of complex eigenvalues (both members of every pair).
pub fn empirical_density_2d(samples: &[SpectrumSample], grid: Grid2D) -> Histogram2D {
    let mut h = Histogram2D::new(grid);
    for s in samples {
        for &p in &s.pair_eigs {
            h.add_pair(p);
        }
        h.normalizer += s.n() as u64;
    }
    h
}

/// Mean and standard error of the per-sample fraction of real eigenvalues.
pub fn real_fraction(samples: &[SpectrumSample]) -> (f64, f64) {
    let m: Moments = samples.iter().map(|s| s.real_count() as f64 / s.n() as f64).collect();
    (m.mean, m.stderr())
}
