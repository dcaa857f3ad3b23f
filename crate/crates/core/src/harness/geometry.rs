//! Distances to the closed-form boundary of the signature domain `D`.

use num_complex::Complex64 as C;
use std::f64::consts::PI;

use crate::theory::SignatureTheory;

/// `D` with its boundary as closed polygons.
#[derive(Clone, Debug)]
pub struct SignatureDomain {
    theory: SignatureTheory,
    loops: Vec<Vec<C>>,
}

impl SignatureDomain {
    /// `samples` points per boundary branch and blob.
    pub fn new(theory: SignatureTheory, samples: usize) -> Self {
        let s0 = theory.sin_theta0();
        let mut loops = Vec::new();
        if s0 == 0.0 {
            let r = theory.boundary_r(PI / 2.0).expect("the disk meets every ray").1;
            loops.push((0..2 * samples).map(|k| C::from_polar(r, PI * k as f64 / samples as f64)).collect());
        } else if s0 < 1.0 {
            let theta0 = theory.theta0();
            let angle = |k: usize| theta0 + (PI - 2.0 * theta0) * k as f64 / (samples - 1) as f64;
            // At the tips both radii meet at 1/(√2 m); rounding may push sin² just below sin²θ₀.
            let tip = 1.0 / (2f64.sqrt() * theory.m);
            let radii = |k: usize| theory.boundary_r(angle(k)).unwrap_or((tip, tip));
            let mut upper: Vec<C> = (0..samples).map(|k| C::from_polar(radii(k).1, angle(k))).collect();
            upper.extend((0..samples).rev().map(|k| C::from_polar(radii(k).0, angle(k))));
            let lower = upper.iter().map(|p| p.conj()).collect();
            loops.push(upper);
            loops.push(lower);
        }
        SignatureDomain { theory, loops }
    }

    pub fn theory(&self) -> &SignatureTheory {
        &self.theory
    }

    pub fn contains(&self, w: C) -> bool {
        self.theory.in_domain(w)
    }

    /// Euclidean distance to the boundary polygons; infinite when `D` is empty.
    pub fn boundary_distance(&self, w: C) -> f64 {
        let mut best = f64::INFINITY;
        for lp in &self.loops {
            for k in 0..lp.len() {
                best = best.min(segment_distance(w, lp[k], lp[(k + 1) % lp.len()]));
            }
        }
        best
    }

    /// Distance from `w` to `D`: zero inside.
    pub fn distance(&self, w: C) -> f64 {
        if self.contains(w) {
            0.0
        } else {
            self.boundary_distance(w)
        }
    }

    /// True when the closed rectangle `[lo, hi]` lies in `D` at least `margin` from the boundary.
    ///
    /// Tested on a `probes × probes` lattice covering the rectangle.
    pub fn rect_inside(&self, lo: C, hi: C, margin: f64, probes: usize) -> bool {
        (0..probes).all(|i| {
            (0..probes).all(|j| {
                let fx = i as f64 / (probes - 1) as f64;
                let fy = j as f64 / (probes - 1) as f64;
                let p = C::new(lo.re + fx * (hi.re - lo.re), lo.im + fy * (hi.im - lo.im));
                self.contains(p) && self.boundary_distance(p) >= margin
            })
        })
    }
}

fn segment_distance(p: C, a: C, b: C) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_sqr();
    if len2 == 0.0 {
        return (p - a).norm();
    }
    let t = (((p - a) * ab.conj()).re / len2).clamp(0.0, 1.0);
    (p - (a + t * ab)).norm()
}
