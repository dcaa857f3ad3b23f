//! Root continuation from infinity to an evaluation point.
//!
//! The path runs geometrically inward along a ray just off the nearer real
//! half-axis and then along an arc of fixed radius to the target. Within a
//! quadrant this stays in the holomorphic region of symmetric blob-shaped
//! domains, which a straight inward ray through the blobs does not.
//! Points on the real axis are reached from above, giving the `x + i0` limit.

use num_complex::Complex64 as C;
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Angular offset of the inward ray from the real axis.
pub const RAY_ANGLE: f64 = 1e-3;
/// Maximum arc step in radians.
const ARC_STEP: f64 = 0.01;
/// Accept a step only if the nearest root is this much closer than the runner-up.
const AMBIGUITY_RATIO: f64 = 0.25;
const MAX_BISECT: u32 = 30;
/// Roots closer than this (relative) count as a collision.
pub const COLLISION_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug)]
enum Segment {
    Ray { theta: f64, r_from: f64, r_to: f64 },
    Arc { radius: f64, theta_from: f64, theta_to: f64 },
}

impl Segment {
    fn at(&self, t: f64) -> C {
        match *self {
            Segment::Ray { theta, r_from, r_to } => C::from_polar(r_from * (r_to / r_from).powf(t), theta),
            Segment::Arc { radius, theta_from, theta_to } => {
                C::from_polar(radius, theta_from + (theta_to - theta_from) * t)
            }
        }
    }
}

#[derive(Clone, Debug)]
pub struct Path {
    segments: Vec<(Segment, usize)>,
    target: C,
}

impl Path {
    /// Path from radius `r0` to `w` with `ray_steps` geometric radial steps.
    pub fn to(w: C, r0: f64, ray_steps: usize) -> Self {
        let r = w.norm();
        let r0 = r0.max(2.0 * r);
        let sign = if w.im < 0.0 { -1.0 } else { 1.0 };
        let target_theta = sign * w.im.abs().atan2(w.re);
        let start_theta = if w.re >= 0.0 { sign * RAY_ANGLE } else { sign * (PI - RAY_ANGLE) };
        let arc_steps = ((target_theta - start_theta).abs() / ARC_STEP).ceil().max(4.0) as usize;
        Path {
            segments: vec![
                (Segment::Ray { theta: start_theta, r_from: r0, r_to: r }, ray_steps),
                (Segment::Arc { radius: r, theta_from: start_theta, theta_to: target_theta }, arc_steps),
            ],
            target: w,
        }
    }

    pub fn start(&self) -> C {
        self.segments[0].0.at(0.0)
    }
}

struct Tracker<F> {
    roots_at: F,
    current: C,
    roots: Vec<C>,
    slope: Option<C>,
    w: C,
    target: C,
}

impl<F> Tracker<F>
where
    F: FnMut(C, &[C]) -> Option<Vec<C>>,
{
    fn collision(&self, sep: f64) -> Error {
        Error::BranchCollision { re: self.target.re, im: self.target.im, separation: sep }
    }

    fn advance(&mut self, seg: &Segment, t0: f64, t1: f64, depth: u32) -> Result<()> {
        let w1 = seg.at(t1);
        let candidates = (self.roots_at)(w1, &self.roots);
        let accepted = candidates.and_then(|cand| {
            let pred = self.current + self.slope.unwrap_or_default() * (w1 - self.w);
            let mut order: Vec<usize> = (0..cand.len()).collect();
            order.sort_by(|&i, &j| (cand[i] - pred).norm().total_cmp(&(cand[j] - pred).norm()));
            let d1 = (cand[order[0]] - pred).norm();
            let d2 = order.get(1).map_or(f64::INFINITY, |&k| (cand[k] - pred).norm());
            (d1 <= AMBIGUITY_RATIO * d2).then(|| (order[0], cand))
        });
        match accepted {
            Some((sel, cand)) => {
                let b = cand[sel];
                let scale = 1.0 + b.norm();
                let sep = cand
                    .iter()
                    .enumerate()
                    .filter(|&(j, _)| j != sel)
                    .map(|(_, &c)| (c - b).norm())
                    .fold(f64::INFINITY, f64::min);
                if sep <= COLLISION_TOL * scale {
                    return Err(self.collision(sep));
                }
                if w1 != self.w {
                    self.slope = Some((b - self.current) / (w1 - self.w));
                }
                self.current = b;
                self.roots = cand;
                self.w = w1;
                Ok(())
            }
            None if depth < MAX_BISECT => {
                let mid = 0.5 * (t0 + t1);
                self.advance(seg, t0, mid, depth + 1)?;
                self.advance(seg, mid, t1, depth + 1)
            }
            None => Err(self.collision(0.0)),
        }
    }
}

/// Follow one root along `path`.
///
/// `roots_at(w, previous)` returns all roots at `w`, optionally warm-started
/// from the previous root set; the starting root is the one nearest
/// `asymptote(start)`. Returns the tracked root and all roots at the target.
pub fn track<F, A>(path: &Path, mut roots_at: F, asymptote: A) -> Result<(C, Vec<C>)>
where
    F: FnMut(C, &[C]) -> Option<Vec<C>>,
    A: Fn(C) -> C,
{
    let w0 = path.start();
    let roots = roots_at(w0, &[]).ok_or(Error::BranchCollision {
        re: path.target.re,
        im: path.target.im,
        separation: f64::NAN,
    })?;
    let guess = asymptote(w0);
    let current = *roots
        .iter()
        .min_by(|a, b| (**a - guess).norm().total_cmp(&(**b - guess).norm()))
        .expect("polynomial has at least one root");
    let mut tracker = Tracker {
        roots_at: &mut roots_at,
        current,
        roots,
        slope: None,
        w: w0,
        target: path.target,
    };
    for (seg, steps) in &path.segments {
        for k in 0..*steps {
            let t0 = k as f64 / *steps as f64;
            let t1 = (k + 1) as f64 / *steps as f64;
            tracker.advance(seg, t0, t1, 0)?;
        }
    }
    Ok((tracker.current, tracker.roots))
}

/// Follow a solution along `path` when only a local solver is available.
///
/// `newton(w, guess)` returns a converged solution near `guess`. A step is
/// accepted when the solution moves by at most a tenth of its magnitude;
/// otherwise the step is halved.
pub fn track_newton<F>(path: &Path, mut newton: F, start: C) -> Result<C>
where
    F: FnMut(C, C) -> Option<C>,
{
    let w0 = path.start();
    let mut current = newton(w0, start).ok_or(Error::BranchCollision {
        re: path.target.re,
        im: path.target.im,
        separation: f64::NAN,
    })?;
    let mut w_cur = w0;
    let mut slope: Option<C> = None;
    for (seg, steps) in &path.segments {
        let mut stack: Vec<(f64, f64, u32)> = (0..*steps)
            .rev()
            .map(|k| (k as f64 / *steps as f64, (k + 1) as f64 / *steps as f64, 0))
            .collect();
        while let Some((t0, t1, depth)) = stack.pop() {
            let w1 = seg.at(t1);
            let guess = current + slope.unwrap_or_default() * (w1 - w_cur);
            let ok = newton(w1, guess).filter(|b| (b - current).norm() <= 0.1 * current.norm().max(1e-6));
            match ok {
                Some(b) => {
                    if w1 != w_cur {
                        slope = Some((b - current) / (w1 - w_cur));
                    }
                    current = b;
                    w_cur = w1;
                }
                None if depth < MAX_BISECT => {
                    let mid = 0.5 * (t0 + t1);
                    stack.push((mid, t1, depth + 1));
                    stack.push((t0, mid, depth + 1));
                }
                None => {
                    return Err(Error::BranchCollision { re: path.target.re, im: path.target.im, separation: f64::NAN })
                }
            }
        }
    }
    Ok(current)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn path_ends_at_target() {
        for w in [C::new(0.3, 0.4), C::new(-0.7, 0.2), C::new(-0.5, -1.0), C::new(1.5, 0.0), C::new(-2.0, 0.0)] {
            let p = Path::to(w, 100.0, 16);
            let (seg, _) = p.segments.last().unwrap();
            assert!((seg.at(1.0) - w).norm() < 1e-14);
            assert!(p.start().norm() >= 99.999);
        }
    }

    #[test]
    fn tracks_square_root_branch() {
        // b² = w with b ~ √w on the principal branch off the negative axis.
        let w = C::new(0.2, 0.7);
        let path = Path::to(w, 50.0, 64);
        let (b, _) = track(
            &path,
            |w, _| {
                let s = w.sqrt();
                Some(vec![s, -s])
            },
            |w| w.sqrt(),
        )
        .unwrap();
        assert!((b - w.sqrt()).norm() < 1e-14);
    }

    #[test]
    fn newton_tracking_follows_square_root() {
        let w = C::new(-0.6, 0.3);
        let path = Path::to(w, 50.0, 64);
        let newton = |w: C, mut b: C| {
            for _ in 0..50 {
                let step = (b * b - w) / (2.0 * b);
                b -= step;
                if step.norm() < 1e-15 * b.norm() {
                    return Some(b);
                }
            }
            None
        };
        let b = track_newton(&path, newton, path.start().sqrt()).unwrap();
        assert!((b - w.sqrt()).norm() < 1e-13);
    }
}
