//! Complex polynomial roots: Aberth–Ehrlich iteration and the closed-form cubic.
//!
//! Coefficients are stored in ascending order, `c[0] + c[1] z + … + c[d] z^d`.

use num_complex::Complex64 as C;

/// Value and derivative by Horner's rule.
pub fn eval_with_derivative(coeffs: &[C], z: C) -> (C, C) {
    let mut p = C::new(0.0, 0.0);
    let mut dp = C::new(0.0, 0.0);
    for &c in coeffs.iter().rev() {
        dp = dp * z + p;
        p = p * z + c;
    }
    (p, dp)
}

pub fn eval(coeffs: &[C], z: C) -> C {
    coeffs.iter().rev().fold(C::new(0.0, 0.0), |acc, &c| acc * z + c)
}

/// Multiply two ascending-order coefficient vectors.
pub fn mul(a: &[C], b: &[C]) -> Vec<C> {
    let mut out = vec![C::new(0.0, 0.0); a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn trim(coeffs: &[C]) -> &[C] {
    let mut d = coeffs.len();
    while d > 1 && coeffs[d - 1] == C::new(0.0, 0.0) {
        d -= 1;
    }
    &coeffs[..d]
}

/// Initial guesses on a circle of radius given by the Fujiwara bound, rotated off the axes.
fn circle_guesses(coeffs: &[C]) -> Vec<C> {
    let d = coeffs.len() - 1;
    let lead = coeffs[d];
    let mut radius: f64 = 0.0;
    for k in 1..=d {
        let r = (coeffs[d - k] / lead).norm().powf(1.0 / k as f64);
        radius = radius.max(if k == d { 0.5f64.powf(1.0 / d as f64) * r } else { r });
    }
    let radius = (2.0 * radius).max(f64::MIN_POSITIVE.sqrt());
    (0..d)
        .map(|k| C::from_polar(radius, std::f64::consts::TAU * (k as f64 + 0.25) / d as f64 + 0.4))
        .collect()
}

/// Refine `guess` into all roots of the polynomial. Returns `None` when the iteration stalls.
pub fn aberth(coeffs: &[C], guess: &[C], max_iter: usize) -> Option<Vec<C>> {
    let coeffs = trim(coeffs);
    let d = coeffs.len() - 1;
    assert_eq!(guess.len(), d, "one initial guess per root");
    let mut z = guess.to_vec();
    let mut done = vec![false; d];
    for _ in 0..max_iter {
        for i in 0..d {
            if done[i] {
                continue;
            }
            let (p, dp) = eval_with_derivative(coeffs, z[i]);
            if p == C::new(0.0, 0.0) {
                done[i] = true;
                continue;
            }
            let ratio = p / dp;
            let mut repulsion = C::new(0.0, 0.0);
            for j in 0..d {
                if j != i {
                    repulsion += 1.0 / (z[i] - z[j]);
                }
            }
            let step = ratio / (1.0 - ratio * repulsion);
            if !step.is_finite() {
                return None;
            }
            z[i] -= step;
            if step.norm() <= 4.0 * f64::EPSILON * z[i].norm().max(1e-300) {
                done[i] = true;
            }
        }
        if done.iter().all(|&x| x) {
            return Some(z);
        }
    }
    // Accept a stalled iteration only if every residual sits at rounding level.
    let scale: f64 = coeffs.iter().map(|c| c.norm()).sum();
    let ok = z.iter().all(|&r| {
        let mag = r.norm().max(1.0).powi(d as i32);
        eval(coeffs, r).norm() <= 1e-12 * scale * mag
    });
    ok.then_some(z)
}

/// All roots of a polynomial of degree ≥ 1.
pub fn roots(coeffs: &[C]) -> Option<Vec<C>> {
    let coeffs = trim(coeffs);
    if coeffs.len() < 2 {
        return Some(Vec::new());
    }
    aberth(coeffs, &circle_guesses(coeffs), 500)
}

/// Roots of the depressed cubic `t³ + p t + q = 0` by Cardano's formula, polished by Newton.
pub fn depressed_cubic_roots(p: C, q: C) -> [C; 3] {
    let omega = C::new(-0.5, 0.75f64.sqrt());
    let disc = (q * 0.5) * (q * 0.5) + (p / 3.0) * (p / 3.0) * (p / 3.0);
    let sd = disc.sqrt();
    let plus = -q * 0.5 + sd;
    let minus = -q * 0.5 - sd;
    let big = if plus.norm() >= minus.norm() { plus } else { minus };
    let raw = if big.norm() == 0.0 {
        [C::new(0.0, 0.0); 3]
    } else {
        let u = big.powf(1.0 / 3.0);
        let v = -p / (3.0 * u);
        [u + v, omega * u + omega.conj() * v, omega.conj() * u + omega * v]
    };
    raw.map(|mut t| {
        for _ in 0..2 {
            let f = t * t * t + p * t + q;
            let df = 3.0 * t * t + p;
            if df.norm() == 0.0 {
                break;
            }
            let step = f / df;
            if !step.is_finite() {
                break;
            }
            t -= step;
        }
        t
    })
}
