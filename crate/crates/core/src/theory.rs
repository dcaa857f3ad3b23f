//! Closed-form large-N predictions for the signature metric and the GUE reference.
//!
//! With `λ = k/N` and width `m`, the holomorphic order parameter solves the
//! cubic `m²b³ + (1 − m²w²)b + (1 − 2λ)w = 0` on the branch `b ~ (1−2λ)/(m²w)`,
//! and `G = λ/(b+w) − (1−λ)/(b−w)`. Inside the two blobs `D` the resolvent is
//! `G = m² w̄` and the complex density is uniform, `m²/π`.

use num_complex::Complex64 as C;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::io::Write;

use crate::continuation::{self, Path};
use crate::error::{Error, Result};
use crate::poly;

/// Geometric inward steps of the continuation ray.
const RAY_STEPS: usize = 64;
/// Start radius of the continuation, in units of `1/m`.
const START_RADIUS: f64 = 100.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SignatureTheory {
    pub lambda: f64,
    pub m: f64,
}

/// Discriminant data of the real-axis cubic.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CubicData {
    pub xi: f64,
    pub delta: f64,
}

/// Fraction of complex eigenvalues, `1 − |1 − 2λ|`.
pub fn nu(lambda: f64) -> f64 {
    1.0 - (1.0 - 2.0 * lambda).abs()
}

pub fn semicircle_density(x: f64, m: f64) -> f64 {
    let r2 = 4.0 / (m * m) - x * x;
    if r2 <= 0.0 {
        0.0
    } else {
        m * m / (2.0 * PI) * r2.sqrt()
    }
}

/// Resolvent of the semicircle law, cut on `[−2/m, 2/m]`.
pub fn gue_green(w: C, m: f64) -> C {
    let e = 2.0 / m;
    0.5 * m * m * (w - (w - e).sqrt() * (w + e).sqrt())
}

impl SignatureTheory {
    pub fn new(lambda: f64, m: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&lambda) || !(m > 0.0 && m.is_finite()) {
            return Err(Error::Config(format!("need λ in [0,1] and m > 0 (got λ={lambda}, m={m})")));
        }
        Ok(SignatureTheory { lambda, m })
    }

    fn skew(&self) -> f64 {
        1.0 - 2.0 * self.lambda
    }

    fn traceless(&self) -> bool {
        self.skew() == 0.0
    }

    pub fn sin_theta0(&self) -> f64 {
        self.skew().abs()
    }

    pub fn theta0(&self) -> f64 {
        self.sin_theta0().asin()
    }

    pub fn nu(&self) -> f64 {
        nu(self.lambda)
    }

    /// Positive edge of the band of real eigenvalues.
    pub fn x0(&self) -> f64 {
        let s = (self.lambda * (1.0 - self.lambda)).sqrt();
        let a = self.skew().abs().powf(2.0 / 3.0);
        let bracket = (1.0 - 2.0 * s).cbrt() + (1.0 + 2.0 * s).cbrt();
        ((3.0 * a * bracket + 2.0) / (2.0 * self.m * self.m)).sqrt()
    }

    pub fn cubic_data(&self, x: f64) -> CubicData {
        let m2 = self.m * self.m;
        let xi = -27.0 * m2 * m2 * self.skew() * x;
        let delta = xi * xi + 108.0 * m2 * m2 * m2 * (1.0 - m2 * x * x).powi(3);
        CubicData { xi, delta }
    }

    /// Density of real eigenvalues, normalized to the real fraction `|1 − 2λ|`.
    pub fn rho_real(&self, x: f64) -> f64 {
        let x0 = self.x0();
        if self.traceless() || x.abs() >= x0 {
            return 0.0;
        }
        let m = self.m;
        if x == 0.0 {
            return m * self.skew().abs() / PI;
        }
        let CubicData { xi, delta } = self.cubic_data(x);
        let sd = delta.max(0.0).sqrt();
        let num = (xi - sd).abs().powf(2.0 / 3.0) - (xi + sd).abs().powf(2.0 / 3.0);
        let den = 3f64.sqrt() * 2f64.powf(2.0 / 3.0) * 6.0 * PI * m * m * x;
        (self.skew().signum() * num / den).max(0.0)
    }

    /// Radii `(r₋, r₊)` where the ray at angle `theta` crosses the blob boundary.
    pub fn boundary_r(&self, theta: f64) -> Option<(f64, f64)> {
        let s2 = theta.sin().powi(2);
        let s02 = self.skew() * self.skew();
        if s2 == 0.0 || s2 < s02 {
            return None;
        }
        let q = (1.0 - s02 / s2).max(0.0).sqrt();
        let scale = 1.0 / (2f64.sqrt() * self.m);
        Some((scale * (1.0 - q).sqrt(), scale * (1.0 + q).sqrt()))
    }

    /// `(α², β)` of the non-holomorphic solution; `w ∈ D ⇔ α² > 0`.
    pub fn alpha_sq(&self, w: C) -> Result<(f64, f64)> {
        let m2 = self.m * self.m;
        let beta = if self.traceless() {
            0.0
        } else if w.im == 0.0 {
            return Err(Error::OutsideDomain {
                re: w.re,
                im: w.im,
                reason: "β is singular on the real axis unless λ = 1/2".into(),
            });
        } else {
            -self.skew() / (2.0 * m2 * w.im)
        };
        Ok((1.0 / m2 - (w.norm_sqr() + beta * beta), beta))
    }

    /// Membership in the closed-form non-holomorphic domain.
    pub fn in_domain(&self, w: C) -> bool {
        self.alpha_sq(w).is_ok_and(|(a2, _)| a2 > 0.0)
    }

    /// The three roots of the cubic at `w`.
    pub fn cubic_roots(&self, w: C) -> [C; 3] {
        let m2 = self.m * self.m;
        let p = (1.0 - m2 * w * w) / m2;
        let q = self.skew() * w / m2;
        poly::depressed_cubic_roots(p, q)
    }

    /// Holomorphic order parameter `b(w)`, continued from infinity.
    pub fn holomorphic_b(&self, w: C) -> Result<C> {
        if self.in_domain(w) {
            return Err(Error::OutsideDomain { re: w.re, im: w.im, reason: "inside the non-holomorphic domain".into() });
        }
        if w.im == 0.0 && w.re.abs() <= self.x0() && !self.traceless() {
            return Err(Error::OnSupport { re: w.re, im: w.im });
        }
        if self.traceless() {
            return Ok(C::new(0.0, 0.0));
        }
        let path = Path::to(w, START_RADIUS / self.m, RAY_STEPS);
        let m2 = self.m * self.m;
        let (b, _) = continuation::track(&path, |z, _| Some(self.cubic_roots(z).to_vec()), |z| self.skew() / (m2 * z))?;
        Ok(b)
    }

    fn green_from_b(&self, b: C, w: C) -> C {
        self.lambda / (b + w) - (1.0 - self.lambda) / (b - w)
    }

    pub fn green_holomorphic(&self, w: C) -> Result<C> {
        let b = self.holomorphic_b(w)?;
        Ok(self.green_from_b(b, w))
    }

    /// `(1/2π) Im[G(x − iε) − G(x + iε)]` with one Richardson step in `ε`.
    pub fn rho_real_via_discontinuity(&self, x: f64, epsilon: f64) -> Result<f64> {
        if self.traceless() {
            return Ok(0.0);
        }
        let jump = |eps: f64| -> Result<f64> {
            let below = self.green_holomorphic(C::new(x, -eps))?;
            let above = self.green_holomorphic(C::new(x, eps))?;
            Ok((below - above).im / (2.0 * PI))
        };
        Ok(2.0 * jump(0.5 * epsilon)? - jump(epsilon)?)
    }

    /// `G = m² w̄` inside `D`.
    pub fn green_nonholomorphic(&self, w: C) -> Result<C> {
        if !self.in_domain(w) {
            return Err(Error::OutsideDomain { re: w.re, im: w.im, reason: "outside the non-holomorphic domain".into() });
        }
        Ok(self.m * self.m * w.conj())
    }

    /// Total area of the blobs and the fraction `ν` of complex eigenvalues.
    pub fn blob_area_and_nu(&self) -> (f64, f64) {
        let nu = self.nu();
        (nu * PI / (self.m * self.m), nu)
    }

    pub fn write_density_csv<W: Write>(&self, xs: &[f64], mut out: W) -> Result<()> {
        writeln!(out, "x,rho1")?;
        for &x in xs {
            writeln!(out, "{x},{}", self.rho_real(x))?;
        }
        Ok(())
    }

    pub fn write_boundary_csv<W: Write>(&self, thetas: &[f64], mut out: W) -> Result<()> {
        writeln!(out, "theta,r_minus,r_plus")?;
        for &t in thetas {
            let (a, b) = self.boundary_r(t).unwrap_or((f64::NAN, f64::NAN));
            writeln!(out, "{t},{a},{b}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad;
    use proptest::prelude::*;

    fn th(lambda: f64) -> SignatureTheory {
        SignatureTheory::new(lambda, 1.0).unwrap()
    }

    /// Sign change of Δ located by bisection.
    fn x0_by_bisection(t: &SignatureTheory) -> f64 {
        let (mut lo, mut hi) = (0.0, 3.0 / t.m);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if t.cubic_data(mid).delta > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn band_edges() {
        assert!((th(0.0).x0() - 2.0).abs() < 1e-15);
        assert!((th(0.5).x0() - 1.0).abs() < 1e-15);
        assert!((SignatureTheory::new(0.0, 2.0).unwrap().x0() - 1.0).abs() < 1e-15);
        for (lambda, frozen) in [(0.125, 1.824_702_728_474_943_9), (0.25, 1.626_919_638_176_463_6), (0.375, 1.390_867_530_694_217_9)] {
            let t = th(lambda);
            assert!((t.x0() - x0_by_bisection(&t)).abs() < 1e-12);
            assert!((t.x0() - frozen).abs() < 1e-12);
        }
    }

    #[test]
    fn discriminant_sign_regimes() {
        let t = th(0.25);
        let x0 = t.x0();
        for x in [0.0, 0.5, 1.0, 0.99 * x0] {
            assert!(t.cubic_data(x).delta > 0.0);
        }
        for x in [1.01 * x0, 2.0, 5.0] {
            assert!(t.cubic_data(x).delta < 0.0);
        }
    }

    #[test]
    fn real_density_values() {
        for lambda in [0.125, 0.25, 0.375, 0.8] {
            let t = th(lambda);
            let centre = (1.0 - 2.0 * lambda).abs() / PI;
            assert_eq!(t.rho_real(0.0), centre);
            assert!((t.rho_real(1e-7) - centre).abs() < 1e-9);
        }
        // High-precision oracle value.
        assert!((th(0.25).rho_real(0.3) - 0.163_966_835_747_854_86).abs() < 1e-12);
        assert_eq!(th(0.5).rho_real(0.3), 0.0);
        assert_eq!(th(0.25).rho_real(3.0), 0.0);
        let t = th(0.25);
        assert!(t.rho_real(t.x0() * (1.0 - 1e-10)) < 1e-3);
    }

    #[test]
    fn real_density_mass() {
        for lambda in [0.125, 0.25, 0.375] {
            let t = th(lambda);
            let x0 = t.x0();
            let mass = quad::integrate_pieces(|x| t.rho_real(x), &[-x0, 0.0, x0], 1e-11);
            assert!((mass - (1.0 - 2.0 * lambda)).abs() < 1e-8, "λ={lambda}: {mass}");
        }
    }

    #[test]
    fn hermitian_limit_is_semicircle() {
        let t = th(0.0);
        for x in [0.0, 0.3, 0.7, 1.2, 1.9, 1.999] {
            assert!((t.rho_real(x) - semicircle_density(x, 1.0)).abs() < 1e-12, "x={x}");
        }
        assert!((semicircle_density(0.0, 1.0) - 1.0 / PI).abs() < 1e-16);
        assert_eq!(semicircle_density(2.0, 1.0), 0.0);
        let mass = quad::integrate(|x| semicircle_density(x, 1.5), -4.0 / 3.0, 4.0 / 3.0, 1e-12);
        assert!((mass - 1.0).abs() < 1e-10);
    }

    #[test]
    fn boundary_examples() {
        let t = th(0.25);
        let (rm, rp) = t.boundary_r(PI / 2.0).unwrap();
        assert!((rm - (t.theta0() / 2.0).sin()).abs() < 1e-15);
        assert!((rm * rm + rp * rp - 1.0).abs() < 1e-15);
        let (rm, rp) = t.boundary_r(t.theta0()).unwrap();
        assert!((rm - 0.5f64.sqrt()).abs() < 1e-7 && (rp - 0.5f64.sqrt()).abs() < 1e-7);
        assert!(t.boundary_r(0.2).is_none());
        assert_eq!(th(0.5).boundary_r(1.0), Some((0.0, 1.0)));
    }

    #[test]
    fn alpha_examples() {
        let t = th(0.5);
        let w = C::new(0.3, 0.2);
        assert_eq!(t.alpha_sq(w).unwrap(), (1.0 - 0.13, 0.0));
        let (a2, _) = th(0.25).alpha_sq(C::new(3f64.sqrt(), 1.0)).unwrap();
        assert!(a2 < 0.0);
        assert!(th(0.25).alpha_sq(C::new(0.5, 0.0)).is_err());
        // The hermcheck reference point.
        let (a2, beta) = th(0.25).alpha_sq(C::new(0.3, 0.4)).unwrap();
        assert!((a2 - 0.359_375).abs() < 1e-15 && (beta + 0.625).abs() < 1e-15);
    }

    #[test]
    fn boundary_is_zero_set_of_alpha() {
        for lambda in [0.125, 0.25, 0.375] {
            let t = th(lambda);
            for k in 1..40 {
                let theta = PI * k as f64 / 40.0;
                if let Some((rm, rp)) = t.boundary_r(theta) {
                    for r in [rm, rp] {
                        let (a2, _) = t.alpha_sq(C::from_polar(r, theta)).unwrap();
                        assert!(a2.abs() < 1e-10, "λ={lambda} θ={theta} r={r}: {a2}");
                    }
                }
            }
        }
    }

    #[test]
    fn holomorphic_branch_at_boundary_equals_i_beta() {
        // b is continuous across the boundary, where it meets the imaginary value iβ.
        for lambda in [0.125, 0.25, 0.375] {
            let t = th(lambda);
            for theta in [PI / 2.0, 1.0, 2.3, -1.0, -2.0] {
                let Some((rm, rp)) = t.boundary_r(theta) else {
                    assert!(theta.sin().abs() < t.sin_theta0());
                    continue;
                };
                for (r, dir) in [(rm, -1.0), (rp, 1.0)] {
                    let w_edge = C::from_polar(r, theta);
                    let (_, beta) = t.alpha_sq(w_edge).unwrap();
                    let b = t.holomorphic_b(C::from_polar(r + dir * 1e-9, theta)).unwrap();
                    assert!((b - C::new(0.0, beta)).norm() < 1e-6, "λ={lambda} θ={theta} r={r}: {b} vs i{beta}");
                    // Continuity condition 2m²yβ + (1 − 2λ) = 0.
                    assert!((2.0 * w_edge.im * beta + 1.0 - 2.0 * lambda).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn green_continuity_at_boundary() {
        let delta = 1e-6;
        for lambda in [0.125, 0.25, 0.375] {
            let t = th(lambda);
            for theta in [PI / 2.0, 1.0, 0.7, 2.3, -1.0] {
                let Some((rm, rp)) = t.boundary_r(theta) else {
                    assert!(theta.sin().abs() < t.sin_theta0());
                    continue;
                };
                for (r, dir) in [(rm, -1.0), (rp, 1.0)] {
                    let outside = t.green_holomorphic(C::from_polar(r + dir * delta, theta)).unwrap();
                    let inside = t.green_nonholomorphic(C::from_polar(r - dir * delta, theta)).unwrap();
                    // Both sides are Lipschitz with constant below 2m²; points are 2δ apart.
                    assert!((outside - inside).norm() < 4.0 * delta, "λ={lambda} θ={theta}");
                    let at_edge = t.m * t.m * C::from_polar(r, theta).conj();
                    let near = t.green_holomorphic(C::from_polar(r + dir * 1e-9, theta)).unwrap();
                    assert!((near - at_edge).norm() < 1e-6);
                }
            }
        }
    }

    #[test]
    fn traceless_metric_has_trivial_branch() {
        let t = th(0.5);
        let w = C::new(0.9, 1.1);
        assert_eq!(t.green_holomorphic(w).unwrap(), 1.0 / w);
        assert!(t.green_holomorphic(C::new(0.1, 0.2)).is_err());
        assert_eq!(t.rho_real_via_discontinuity(0.3, 1e-6).unwrap(), 0.0);
    }

    #[test]
    fn hermitian_limit_matches_semicircle_resolvent() {
        let t = th(0.0);
        for i in 0..12 {
            for j in 0..12 {
                let w = C::new(-3.0 + 0.5 * i as f64 + 0.01, -3.0 + 0.5 * j as f64 + 0.013);
                let g = t.green_holomorphic(w).unwrap();
                assert!((g - gue_green(w, 1.0)).norm() < 1e-10, "w={w}");
            }
        }
    }

    #[test]
    fn asymptotic_resolvent() {
        let t = th(0.25);
        for r in [10.0, 100.0, 1000.0] {
            let w = C::from_polar(r, 0.8);
            let g = t.green_holomorphic(w).unwrap();
            assert!((w * g - 1.0).norm() < 2.0 / r);
        }
    }

    #[test]
    fn discontinuity_matches_closed_form() {
        let t = th(0.25);
        let exact = t.rho_real(0.3);
        let f = |eps: f64| t.rho_real_via_discontinuity(0.3, eps).unwrap();
        assert!((f(1e-6) - exact).abs() < 1e-4);
        // Richardson estimates converge as ε shrinks.
        assert!((f(1e-3) - exact).abs() < 1e-4);
        assert!((f(1e-4) - exact).abs() <= (f(1e-2) - exact).abs());
        assert!(t.rho_real_via_discontinuity(2.5, 1e-6).unwrap().abs() < 1e-9);
    }

    #[test]
    fn area_and_normalization() {
        assert_eq!(th(0.5).blob_area_and_nu(), (PI, 1.0));
        assert_eq!(th(0.0).blob_area_and_nu(), (0.0, 0.0));
        for lambda in [0.125, 0.25, 0.375] {
            let t = th(lambda);
            let t0 = t.theta0();
            let strip = |theta: f64| t.boundary_r(theta).map_or(0.0, |(a, b)| 0.5 * (b * b - a * a));
            let area = 2.0 * quad::integrate(strip, t0, PI - t0, 1e-11);
            let (closed, nu) = t.blob_area_and_nu();
            assert!((area - closed).abs() < 1e-8, "λ={lambda}: {area} vs {closed}");
            let x0 = t.x0();
            let real_mass = quad::integrate_pieces(|x| t.rho_real(x), &[-x0, 0.0, x0], 1e-11);
            assert!((real_mass + closed / PI - 1.0).abs() < 1e-8);
            assert!((nu - 2.0 * lambda).abs() < 1e-15);
        }
    }

    #[test]
    fn csv_emitters() {
        let mut buf = Vec::new();
        th(0.25).write_boundary_csv(&[PI / 2.0, 0.1], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], "theta,r_minus,r_plus");
        assert!(lines[2].ends_with("NaN,NaN"));
        let mut buf = Vec::new();
        th(0.25).write_density_csv(&[0.0, 5.0], &mut buf).unwrap();
        assert!(String::from_utf8(buf).unwrap().ends_with("5,0\n"));
    }

    proptest! {
        #[test]
        fn reflection_symmetry_in_lambda(k in 0u32..(1 << 19), x in 0.0..2.5f64, theta in 0.05..3.1f64) {
            // Dyadic λ keeps 1 − λ exact; x0 is very sensitive to the skew near λ = 1/2.
            let lambda = k as f64 / (1u32 << 20) as f64;
            let (a, b) = (th(lambda), th(1.0 - lambda));
            prop_assert!((a.x0() - b.x0()).abs() < 1e-14);
            prop_assert!((a.rho_real(x) - b.rho_real(x)).abs() < 1e-12);
            prop_assert_eq!(a.boundary_r(theta).is_some(), b.boundary_r(theta).is_some());
            if let (Some(p), Some(q)) = (a.boundary_r(theta), b.boundary_r(theta)) {
                prop_assert!((p.0 - q.0).abs() < 1e-14 && (p.1 - q.1).abs() < 1e-14);
            }
            prop_assert!((a.nu() - b.nu()).abs() < 1e-15);
        }

        #[test]
        fn holomorphic_identities(lambda in 0.05..0.45f64, r in 0.05..4.0f64, theta in -3.1..3.1f64) {
            let t = th(lambda);
            let w = C::from_polar(r, theta);
            prop_assume!(!t.in_domain(w) && w.im.abs() > 1e-6);
            // Stay away from the boundary where the branch is near-degenerate with iβ.
            prop_assume!(t.alpha_sq(w).map_or(true, |(a2, _)| a2 < -1e-6));
            let b = t.holomorphic_b(w).unwrap();
            let g = t.green_holomorphic(w).unwrap();
            let cubic = b * b * b + (1.0 - w * w) * b + (1.0 - 2.0 * lambda) * w;
            prop_assert!(cubic.norm() <= 1e-12 * (1.0 + w.norm().powi(3)));
            prop_assert!((w * g - 1.0 - b * b).norm() <= 1e-10);
            let gc = t.green_holomorphic(w.conj()).unwrap();
            prop_assert!((gc - g.conj()).norm() <= 1e-12);
        }
    }
}
