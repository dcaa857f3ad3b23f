//! Finite-N checks of the hermitization construction.
//!
//! `H = [[0, A], [B, 0]]` is `2N×2N` and `(z − H)⁻¹` has blocks
//! `[[z(z²−AB)⁻¹, A(z²−BA)⁻¹], [B(z²−AB)⁻¹, z(z²−BA)⁻¹]]`.
//! The `4N×4N` matrix
//!
//! ```text
//! [ η   0   z  −A ]
//! [ 0   η  −B   z ]
//! [ z* −B   η   0 ]
//! [−A   z*  0   η ]
//! ```
//!
//! is inverted at `η = is`; `αβ` denotes `(1/N) tr` of its `(α, β)` block.

use num_complex::Complex64 as C;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ensemble::{EnsembleConfig, PhSample};
use crate::error::{Error, Result};
use crate::gapsolve::{GapSolver, Phase};
use crate::linalg;
use crate::stats::Moments;
use crate::thresholds::{self, Threshold};
use crate::CMat;

const ZERO: C = C::new(0.0, 0.0);

/// `H = [[0, A], [B, 0]]`.
#[derive(Clone, Debug)]
pub struct DoubledMatrix {
    pub h: CMat,
}

impl DoubledMatrix {
    pub fn n(&self) -> usize {
        self.h.nrows() / 2
    }

    /// `‖ΓH + HΓ‖_F` with `Γ = diag(1_N, −1_N)`.
    pub fn anticommutator_norm(&self) -> f64 {
        let n = self.n();
        let sign = |i: usize| if i < n { 1.0 } else { -1.0 };
        let mut acc = 0.0;
        for i in 0..2 * n {
            for j in 0..2 * n {
                acc += ((sign(i) + sign(j)) * self.h[(i, j)]).norm_sqr();
            }
        }
        acc.sqrt()
    }
}

pub fn build_doubled(a: &CMat, b: &[f64]) -> Result<DoubledMatrix> {
    let n = b.len();
    if a.nrows() != n || a.ncols() != n {
        return Err(Error::Dimension(format!("A is {}x{} but B has {} entries", a.nrows(), a.ncols(), n)));
    }
    let h = CMat::from_fn(2 * n, 2 * n, |i, j| match (i < n, j < n) {
        (true, false) => a[(i, j - n)],
        (false, true) if i - n == j => C::new(b[j], 0.0),
        _ => ZERO,
    });
    Ok(DoubledMatrix { h })
}

/// `‖M‖_F ‖M⁻¹‖_F`.
fn condition(m: &CMat, inv: &CMat) -> f64 {
    linalg::frobenius(m) * linalg::frobenius(inv)
}

fn block(m: &CMat, n: usize, bi: usize, bj: usize) -> CMat {
    m.submatrix(bi * n, bj * n, n, n).to_owned()
}

fn scaled(a: &CMat, s: C) -> CMat {
    CMat::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)] * s)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResolventCheck {
    /// Largest block deviation relative to the Frobenius norm of the resolvent.
    pub residual: f64,
    pub condition: f64,
    /// `|(1/2N) tr(z − H)⁻¹ − z G(z²)|` with `G(w) = (1/N) tr(w − φ)⁻¹`.
    pub trace_residual: f64,
    /// `|tr(z − H)⁻¹ − Σ 2z/(z² − w_i)|`, relative to `N`.
    pub eigen_trace_residual: f64,
}

/// Direct inverse of `z − H` against the closed block formulas.
///
/// Fails with [`Error::IllConditioned`] when `z − H` or `z² − AB` is too close to singular.
pub fn check_block_resolvent(a: &CMat, b: &[f64], z: C) -> Result<ResolventCheck> {
    let n = b.len();
    let doubled = build_doubled(a, b)?;
    let zmh = CMat::from_fn(2 * n, 2 * n, |i, j| if i == j { z } else { ZERO } - doubled.h[(i, j)]);
    let direct = linalg::inverse(&zmh);
    let kappa = condition(&zmh, &direct);
    let limit = thresholds::RESOLVENT_CONDITION_MAX.value;
    if !(kappa <= limit) {
        return Err(Error::IllConditioned(kappa));
    }
    let z2 = z * z;
    let ab = CMat::from_fn(n, n, |i, j| a[(i, j)] * b[j]);
    let ba = CMat::from_fn(n, n, |i, j| b[i] * a[(i, j)]);
    let shift = |x: &CMat| CMat::from_fn(n, n, |i, j| if i == j { z2 } else { ZERO } - x[(i, j)]);
    let (s_ab, s_ba) = (shift(&ab), shift(&ba));
    let (r_ab, r_ba) = (linalg::inverse(&s_ab), linalg::inverse(&s_ba));
    let kappa = kappa.max(condition(&s_ab, &r_ab)).max(condition(&s_ba, &r_ba));
    if !(kappa <= limit) {
        return Err(Error::IllConditioned(kappa));
    }
    let bmat = CMat::from_fn(n, n, |i, j| if i == j { C::new(b[i], 0.0) } else { ZERO });
    let formulas = [scaled(&r_ab, z), a * &r_ba, &bmat * &r_ab, scaled(&r_ba, z)];
    let norm = linalg::frobenius(&direct);
    let mut residual: f64 = 0.0;
    for (k, f) in formulas.iter().enumerate() {
        let d = block(&direct, n, k / 2, k % 2);
        residual = residual.max(linalg::frobenius(&(&d - f)) / norm);
    }
    let tr_direct = linalg::trace(&direct);
    let g = linalg::trace(&r_ab) / n as f64;
    let trace_residual = (tr_direct / (2.0 * n as f64) - z * g).norm() / (1.0 + (z * g).norm());
    let eig_sum: C = linalg::eigenvalues(&ab)?.iter().map(|&w| 2.0 * z / (z2 - w)).sum();
    let eigen_trace_residual = (tr_direct - eig_sum).norm() / n as f64;
    Ok(ResolventCheck { residual, condition: kappa, trace_residual, eigen_trace_residual })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymmetryReport {
    /// Largest distance between `eigs(H)` and `−eigs(H)`, relative to the spectral radius.
    pub negation: f64,
    /// Same for complex conjugation.
    pub conjugation: f64,
    /// `eigs(H)²` against `eigs(φ)` with each repeated twice, relative to the squared radius.
    pub squares: f64,
    pub anticommutator: f64,
}

/// Greedy bottleneck distance between two equally sized multisets.
pub fn multiset_distance(a: &[C], b: &[C]) -> f64 {
    assert_eq!(a.len(), b.len(), "multisets differ in size");
    let mut used = vec![false; b.len()];
    let mut worst: f64 = 0.0;
    for &x in a {
        let (k, d) = b
            .iter()
            .enumerate()
            .filter(|&(k, _)| !used[k])
            .map(|(k, &y)| (k, (x - y).norm()))
            .min_by(|p, q| p.1.total_cmp(&q.1))
            .expect("sizes agree");
        used[k] = true;
        worst = worst.max(d);
    }
    worst
}

pub fn check_spectrum_symmetry(a: &CMat, b: &[f64]) -> Result<SymmetryReport> {
    let doubled = build_doubled(a, b)?;
    let eigs = linalg::eigenvalues(&doubled.h)?;
    let n = b.len();
    let phi = CMat::from_fn(n, n, |i, j| a[(i, j)] * b[j]);
    let phi_eigs = linalg::eigenvalues(&phi)?;
    let radius = eigs.iter().map(|e| e.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let neg: Vec<C> = eigs.iter().map(|e| -e).collect();
    let conj: Vec<C> = eigs.iter().map(|e| e.conj()).collect();
    let squares: Vec<C> = eigs.iter().map(|e| e * e).collect();
    let doubled_phi: Vec<C> = phi_eigs.iter().flat_map(|&w| [w, w]).collect();
    Ok(SymmetryReport {
        negation: multiset_distance(&eigs, &neg) / radius,
        conjugation: multiset_distance(&eigs, &conj) / radius,
        squares: multiset_distance(&squares, &doubled_phi) / (radius * radius),
        anticommutator: doubled.anticommutator_norm(),
    })
}

/// The sixteen normalized block traces at `η = is`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockTraceSet {
    pub s: f64,
    pub z: C,
    /// `traces[α−1][β−1] = αβ`.
    pub traces: [[C; 4]; 4],
    pub condition: f64,
}

impl BlockTraceSet {
    /// `αβ` with one-based indices.
    pub fn get(&self, alpha: usize, beta: usize) -> C {
        self.traces[alpha - 1][beta - 1]
    }

    pub fn scale(&self) -> f64 {
        self.traces.iter().flatten().map(|t| t.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE)
    }

    /// Largest `|Re αα|`, relative to [`scale`](Self::scale).
    pub fn diagonal_real_residual(&self) -> f64 {
        (1..=4).map(|k| self.get(k, k).re.abs()).fold(0.0, f64::max) / self.scale()
    }

    /// `|11 + 22 − 33 − 44|`, relative.
    pub fn equal_sums_residual(&self) -> f64 {
        (self.get(1, 1) + self.get(2, 2) - self.get(3, 3) - self.get(4, 4)).norm() / self.scale()
    }
}

fn hermitized(a: &CMat, b: &[f64], eta: C, z: C) -> CMat {
    let n = b.len();
    CMat::from_fn(4 * n, 4 * n, |i, j| {
        let (bi, bj, r, c) = (i / n, j / n, i % n, j % n);
        let diag = r == c;
        match (bi, bj) {
            (x, y) if x == y => if diag { eta } else { ZERO },
            (0, 2) | (1, 3) => if diag { z } else { ZERO },
            (2, 0) | (3, 1) => if diag { z.conj() } else { ZERO },
            (0, 3) | (3, 0) => -a[(r, c)],
            (1, 2) | (2, 1) => if diag { C::new(-b[r], 0.0) } else { ZERO },
            _ => ZERO,
        }
    })
}

pub fn block_traces(a: &CMat, b: &[f64], s: f64, z: C) -> Result<BlockTraceSet> {
    if s == 0.0 {
        return Err(Error::Config("block traces need s ≠ 0".into()));
    }
    let n = b.len();
    if a.nrows() != n || a.ncols() != n {
        return Err(Error::Dimension(format!("A is {}x{} but B has {} entries", a.nrows(), a.ncols(), n)));
    }
    let m = hermitized(a, b, C::new(0.0, s), z);
    let g = linalg::inverse(&m);
    let mut traces = [[ZERO; 4]; 4];
    for (bi, row) in traces.iter_mut().enumerate() {
        for (bj, t) in row.iter_mut().enumerate() {
            *t = (0..n).map(|k| g[(bi * n + k, bj * n + k)]).sum::<C>() / n as f64;
        }
    }
    Ok(BlockTraceSet { s, z, traces, condition: condition(&m, &g) })
}

/// `max(|44(z) − 11(z*)|, |33(z) − 22(z*)|)` from traces at `z` and `z*`, relative.
pub fn interrelation_residual(at_z: &BlockTraceSet, at_conj: &BlockTraceSet) -> f64 {
    let d1 = (at_z.get(4, 4) - at_conj.get(1, 1)).norm();
    let d2 = (at_z.get(3, 3) - at_conj.get(2, 2)).norm();
    d1.max(d2) / at_z.scale().max(at_conj.scale())
}

/// Monte Carlo block traces against the large-N self-consistency conditions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AveragedGapReport {
    pub n: usize,
    pub num_samples: usize,
    pub s: f64,
    pub z: C,
    pub mean_11: C,
    pub mean_14: C,
    pub mean_41: C,
    pub mean_44: C,
    /// `−44/m²`, `−41/m²`, `−11/m²`.
    pub a_bar: C,
    pub b_bar: C,
    pub c_bar: C,
    /// `|ā − c̄|/|ā|`.
    pub a_c_relative: f64,
    /// Finite-η conditions for `44, 11, 41`, relative to the largest of the three averages.
    pub self_consistency: [f64; 3],
    /// The three `η → 0` equations evaluated with the averages; reported, not gated.
    pub self_consistency_s0: [f64; 3],
    /// `|mean 14 − (mean 41)*|`, relative.
    pub adjoint_residual: f64,
    /// Largest `|Re 11|`, `|Re 44|` over samples.
    pub max_real_diagonal: f64,
    /// Standard errors of `Im 44` and `|41|`.
    pub stderr_44: f64,
    pub stderr_41: f64,
    /// Largest per-sample `|11 − 44|/|44|`; reported, not gated.
    pub max_sample_a_c: f64,
}

impl AveragedGapReport {
    pub fn max_self_consistency(&self) -> f64 {
        self.self_consistency.iter().copied().fold(0.0, f64::max)
    }
}

/// Per-sample block traces for `num_samples` draws, in sample order.
pub fn sample_block_traces(config: &EnsembleConfig, s: f64, z: C, num_samples: usize) -> Result<Vec<BlockTraceSet>> {
    config.validate()?;
    (0..num_samples)
        .into_par_iter()
        .map(|i| {
            let sample = config.sample(i)?;
            block_traces(&sample.a_matrix, &sample.b, s, z)
        })
        .collect()
}

pub fn averaged_gap_residual(config: &EnsembleConfig, s: f64, z: C, num_samples: usize) -> Result<AveragedGapReport> {
    let sets = sample_block_traces(config, s, z, num_samples)?;
    let count = sets.len() as f64;
    let mean = |a: usize, b: usize| sets.iter().map(|t| t.get(a, b)).sum::<C>() / count;
    let (t11, t14, t41, t44) = (mean(1, 1), mean(1, 4), mean(4, 1), mean(4, 4));
    let m2 = config.m * config.m;
    let (a_bar, b_bar, c_bar) = (-t44 / m2, -t41 / m2, -t11 / m2);
    let mus = config.metric.realize(config.n)?;
    let eta = C::new(0.0, s);

    let mut predicted = [ZERO; 3];
    for &mu in &mus {
        let g = inverse4(&[
            [eta - t44 / m2, ZERO, z, -t41 / m2],
            [ZERO, eta, C::new(-mu, 0.0), z],
            [z.conj(), C::new(-mu, 0.0), eta, ZERO],
            [-t14 / m2, z.conj(), ZERO, eta - t11 / m2],
        ]);
        predicted[0] += g[3][3];
        predicted[1] += g[0][0];
        predicted[2] += g[3][0];
    }
    let nf = mus.len() as f64;
    let scale = t44.norm().max(t11.norm()).max(t41.norm()).max(f64::MIN_POSITIVE);
    let self_consistency = [
        (predicted[0] / nf - t44).norm() / scale,
        (predicted[1] / nf - t11).norm() / scale,
        (predicted[2] / nf - t41).norm() / scale,
    ];

    let (a, b, c) = (a_bar, b_bar, c_bar);
    let z2 = z * z;
    let mut sums = [ZERO; 2];
    for &mu in &mus {
        let u = b + z2 / mu;
        let den = a * c - u * u.conj();
        sums[0] += 1.0 / den;
        sums[1] += u.conj() / den;
    }
    let k = 1.0 / (nf * m2);
    let rel = |x: C, r: C| x.norm() / r.norm().max(f64::MIN_POSITIVE);
    let self_consistency_s0 = [rel(a + a * k * sums[0], a), rel(c + c * k * sums[0], c), rel(b - k * sums[1], b)];

    let max_real_diagonal = sets.iter().map(|t| t.get(1, 1).re.abs().max(t.get(4, 4).re.abs())).fold(0.0, f64::max);
    let stderr_44 = sets.iter().map(|t| t.get(4, 4).im).collect::<Moments>().stderr();
    let stderr_41 = sets.iter().map(|t| t.get(4, 1).norm()).collect::<Moments>().stderr();
    let max_sample_a_c = sets
        .iter()
        .map(|t| (t.get(1, 1) - t.get(4, 4)).norm() / t.get(4, 4).norm().max(f64::MIN_POSITIVE))
        .fold(0.0, f64::max);
    Ok(AveragedGapReport {
        n: config.n,
        num_samples: sets.len(),
        s,
        z,
        mean_11: t11,
        mean_14: t14,
        mean_41: t41,
        mean_44: t44,
        a_bar,
        b_bar,
        c_bar,
        a_c_relative: (a_bar - c_bar).norm() / a_bar.norm().max(f64::MIN_POSITIVE),
        self_consistency,
        self_consistency_s0,
        adjoint_residual: (t14 - t41.conj()).norm() / scale,
        max_real_diagonal,
        stderr_44,
        stderr_41,
        max_sample_a_c,
    })
}

/// Gauss–Jordan inverse of a 4×4 matrix with partial pivoting.
fn inverse4(m: &[[C; 4]; 4]) -> [[C; 4]; 4] {
    let mut a = *m;
    let mut inv = [[ZERO; 4]; 4];
    for (i, row) in inv.iter_mut().enumerate() {
        row[i] = C::new(1.0, 0.0);
    }
    for col in 0..4 {
        let p = (col..4).max_by(|&i, &j| a[i][col].norm().total_cmp(&a[j][col].norm())).expect("nonempty");
        a.swap(col, p);
        inv.swap(col, p);
        let d = a[col][col];
        for k in 0..4 {
            a[col][k] /= d;
            inv[col][k] /= d;
        }
        for r in 0..4 {
            if r != col {
                let f = a[r][col];
                for k in 0..4 {
                    a[r][k] -= f * a[col][k];
                    inv[r][k] -= f * inv[col][k];
                }
            }
        }
    }
    inv
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResolventComparison {
    pub z: C,
    pub monte_carlo: C,
    pub theory: C,
    pub phase: Phase,
    pub relative_deviation: f64,
    pub stderr: f64,
}

/// Mean of `(1/N) tr[z(z² − AB)⁻¹]` against `z G(z²)` from the gap solver.
pub fn resolvent_vs_formula(config: &EnsembleConfig, z: C, num_samples: usize) -> Result<ResolventComparison> {
    config.validate()?;
    let solver = GapSolver::new(config.metric.clone(), config.m)?;
    let w = z * z;
    let sol = solver.classify_phase(w)?;
    let values: Vec<C> = (0..num_samples)
        .into_par_iter()
        .map(|i| {
            let sample: PhSample = config.sample(i)?;
            let n = sample.n();
            let shifted = CMat::from_fn(n, n, |r, c| if r == c { w } else { ZERO } - sample.phi[(r, c)]);
            Ok(z * linalg::trace(&linalg::inverse(&shifted)) / n as f64)
        })
        .collect::<Result<_>>()?;
    let mc = values.iter().sum::<C>() / values.len() as f64;
    let theory = z * sol.green;
    let re = values.iter().map(|v| v.re).collect::<Moments>().stderr();
    let im = values.iter().map(|v| v.im).collect::<Moments>().stderr();
    Ok(ResolventComparison {
        z,
        monte_carlo: mc,
        theory,
        phase: sol.phase,
        relative_deviation: (mc - theory).norm() / theory.norm(),
        stderr: re.hypot(im),
    })
}

/// One line of the verification report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub check_name: String,
    pub params: serde_json::Value,
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl CheckRecord {
    pub fn new(name: &str, params: serde_json::Value, residual: f64, threshold: Threshold) -> Self {
        Self::with_tolerance(name, params, residual, threshold.value)
    }

    /// A check against an exact tolerance such as a zero count of violations.
    pub fn with_tolerance(name: &str, params: serde_json::Value, residual: f64, tolerance: f64) -> Self {
        CheckRecord { check_name: name.to_string(), params, residual, tolerance, pass: residual <= tolerance }
    }
}

/// Parameters of the finite-N identity suite.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentitySuite {
    pub ensemble: EnsembleConfig,
    pub s_values: Vec<f64>,
    pub z_points: Vec<C>,
}

impl IdentitySuite {
    /// `N = 8`, 100 samples, three values of `s` and five `z`.
    pub fn default_for(metric: crate::Metric, master_seed: u64) -> Self {
        IdentitySuite {
            ensemble: EnsembleConfig { n: 8, m: 1.0, metric, master_seed, num_samples: 100 },
            s_values: vec![0.05, 0.1, 0.5],
            z_points: vec![C::new(0.3, 0.4), C::new(1.2, 0.1), C::new(-0.5, 0.9), C::new(0.05, -0.7), C::new(2.0, 1.5)],
        }
    }
}

/// Maxima of each identity over one sample.
#[derive(Clone, Copy, Debug, Default)]
struct SampleMaxima {
    equal_sums: f64,
    diagonal_real: f64,
    interrelation: f64,
    sign_flip: f64,
    resolvent: f64,
    resolvent_trace: f64,
    resolvent_skipped: usize,
    negation: f64,
    conjugation: f64,
    squares: f64,
    anticommutator: f64,
}

impl SampleMaxima {
    fn merge(mut self, o: SampleMaxima) -> Self {
        self.equal_sums = self.equal_sums.max(o.equal_sums);
        self.diagonal_real = self.diagonal_real.max(o.diagonal_real);
        self.interrelation = self.interrelation.max(o.interrelation);
        self.sign_flip = self.sign_flip.max(o.sign_flip);
        self.resolvent = self.resolvent.max(o.resolvent);
        self.resolvent_trace = self.resolvent_trace.max(o.resolvent_trace);
        self.resolvent_skipped += o.resolvent_skipped;
        self.negation = self.negation.max(o.negation);
        self.conjugation = self.conjugation.max(o.conjugation);
        self.squares = self.squares.max(o.squares);
        self.anticommutator = self.anticommutator.max(o.anticommutator);
        self
    }
}

fn identity_maxima(suite: &IdentitySuite, index: usize) -> Result<SampleMaxima> {
    let sample = suite.ensemble.sample(index)?;
    let (a, b) = (&sample.a_matrix, &sample.b);
    let mut out = SampleMaxima::default();
    for &z in &suite.z_points {
        for &s in &suite.s_values {
            let t = block_traces(a, b, s, z)?;
            let tc = block_traces(a, b, s, z.conj())?;
            let tm = block_traces(a, b, -s, z)?;
            out.equal_sums = out.equal_sums.max(t.equal_sums_residual());
            out.diagonal_real = out.diagonal_real.max(t.diagonal_real_residual());
            out.interrelation = out.interrelation.max(interrelation_residual(&t, &tc));
            // Diagonal traces are odd in s.
            let flip = (1..=4).map(|k| (t.get(k, k) + tm.get(k, k)).norm()).fold(0.0, f64::max) / t.scale();
            out.sign_flip = out.sign_flip.max(flip);
        }
        match check_block_resolvent(a, b, z) {
            Ok(r) => {
                out.resolvent = out.resolvent.max(r.residual);
                out.resolvent_trace = out.resolvent_trace.max(r.trace_residual).max(r.eigen_trace_residual);
            }
            Err(Error::IllConditioned(_)) => out.resolvent_skipped += 1,
            Err(e) => return Err(e),
        }
    }
    let sym = check_spectrum_symmetry(a, b)?;
    out.negation = sym.negation;
    out.conjugation = sym.conjugation;
    out.squares = sym.squares;
    out.anticommutator = sym.anticommutator;
    Ok(out)
}

/// Runs every finite-N identity over the suite and returns one record per identity.
pub fn identity_checks(suite: &IdentitySuite) -> Result<Vec<CheckRecord>> {
    suite.ensemble.validate()?;
    let per_sample: Vec<SampleMaxima> =
        (0..suite.ensemble.num_samples).into_par_iter().map(|i| identity_maxima(suite, i)).collect::<Result<_>>()?;
    let m = per_sample.into_iter().fold(SampleMaxima::default(), SampleMaxima::merge);
    let params = serde_json::json!({
        "n": suite.ensemble.n,
        "samples": suite.ensemble.num_samples,
        "s": suite.s_values,
        "z": suite.z_points.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>(),
        "metric": suite.ensemble.metric,
        "master_seed": suite.ensemble.master_seed,
    });
    let with_skips = serde_json::json!({ "suite": params, "skipped_ill_conditioned": m.resolvent_skipped });
    let t = thresholds::IDENTITY_RESIDUAL;
    Ok(vec![
        CheckRecord::new("gamma_anticommutation", params.clone(), m.anticommutator, t),
        CheckRecord::new("equal_sums", params.clone(), m.equal_sums, t),
        CheckRecord::new("diagonal_traces_imaginary", params.clone(), m.diagonal_real, t),
        CheckRecord::new("trace_interrelations", params.clone(), m.interrelation, t),
        CheckRecord::new("diagonal_sign_flip_in_s", params.clone(), m.sign_flip, t),
        CheckRecord::new("block_resolvent_formula", with_skips.clone(), m.resolvent, t),
        CheckRecord::new("resolvent_trace_identities", with_skips, m.resolvent_trace, t),
        CheckRecord::new("spectrum_negation_pairing", params.clone(), m.negation, thresholds::SPECTRUM_PAIRING),
        CheckRecord::new("spectrum_conjugation_pairing", params.clone(), m.conjugation, thresholds::SPECTRUM_PAIRING),
        CheckRecord::new("spectrum_squares_match_phi", params, m.squares, thresholds::SPECTRUM_SQUARE),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble::sample_gue;
    use crate::Metric;
    use proptest::prelude::*;

    fn random_pair(n: usize, seed: u64) -> (CMat, Vec<f64>) {
        let a = sample_gue(n, 1.0, seed);
        let b = Metric::signature_for(0.375, n).realize(n).unwrap();
        (a, b)
    }

    #[test]
    fn one_by_one_doubled_matrix() {
        let a = CMat::from_fn(1, 1, |_, _| C::new(2.0, 0.0));
        let d = build_doubled(&a, &[-1.0]).unwrap();
        assert_eq!(d.h[(0, 1)], C::new(2.0, 0.0));
        assert_eq!(d.h[(1, 0)], C::new(-1.0, 0.0));
        assert_eq!(d.h[(0, 0)], ZERO);
        assert_eq!(d.anticommutator_norm(), 0.0);
        let mut eigs = linalg::eigenvalues(&d.h).unwrap();
        eigs.sort_by(|p, q| p.im.total_cmp(&q.im));
        let r2 = 2f64.sqrt();
        assert!((eigs[0] - C::new(0.0, -r2)).norm() < 1e-14 && (eigs[1] - C::new(0.0, r2)).norm() < 1e-14);
        let sym = check_spectrum_symmetry(&a, &[-1.0]).unwrap();
        assert!(sym.negation < 1e-14 && sym.conjugation < 1e-14);
    }

    #[test]
    fn dimension_mismatch() {
        let a = CMat::zeros(2, 2);
        assert!(matches!(build_doubled(&a, &[1.0]), Err(Error::Dimension(_))));
        assert!(matches!(block_traces(&a, &[1.0, -1.0], 0.0, C::new(1.0, 0.0)), Err(Error::Config(_))));
    }

    #[test]
    fn block_resolvent_matches_formulas() {
        let (a, b) = random_pair(8, 11);
        let r = check_block_resolvent(&a, &b, C::new(3.0, 0.5)).unwrap();
        assert!(r.residual <= 1e-10 && r.trace_residual <= 1e-12 && r.eigen_trace_residual <= 1e-10, "{r:?}");
    }

    #[test]
    fn singular_shift_is_reported() {
        let (a, b) = random_pair(4, 3);
        let phi = CMat::from_fn(4, 4, |i, j| a[(i, j)] * b[j]);
        let w = linalg::eigenvalues(&phi).unwrap()[0];
        assert!(matches!(check_block_resolvent(&a, &b, w.sqrt()), Err(Error::IllConditioned(_))));
    }

    #[test]
    fn inverse4_matches_dense_inverse() {
        let m = [
            [C::new(1.0, 0.5), ZERO, C::new(0.3, 0.2), C::new(-0.1, 0.0)],
            [ZERO, C::new(0.0, 0.5), C::new(-1.0, 0.0), C::new(0.3, 0.2)],
            [C::new(0.3, -0.2), C::new(-1.0, 0.0), C::new(0.0, 0.5), ZERO],
            [C::new(0.2, 0.1), C::new(0.3, -0.2), ZERO, C::new(0.7, 0.5)],
        ];
        let g = inverse4(&m);
        let dense = linalg::inverse(&CMat::from_fn(4, 4, |i, j| m[i][j]));
        for i in 0..4 {
            for j in 0..4 {
                assert!((g[i][j] - dense[(i, j)]).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn averaged_far_field_is_holomorphic() {
        let config = EnsembleConfig { n: 32, m: 1.0, metric: Metric::signature_for(0.25, 32), master_seed: 5, num_samples: 40 };
        let far = averaged_gap_residual(&config, 0.05, C::new(3.0, 2.0), 40).unwrap();
        assert!(far.a_bar.norm() < 0.01 && far.c_bar.norm() < 0.01, "{far:?}");
        assert!(far.max_real_diagonal < 1e-12);
    }

    #[test]
    fn resolvent_large_w() {
        let config = EnsembleConfig { n: 16, m: 1.0, metric: Metric::signature_for(0.25, 16), master_seed: 2, num_samples: 20 };
        let z = C::new(6.0, 3.0);
        let r = resolvent_vs_formula(&config, z, 20).unwrap();
        assert!((r.theory - 1.0 / z).norm() < 0.01 / z.norm() && r.relative_deviation < 0.01, "{r:?}");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn block_trace_invariants(seed in any::<u64>(), s in 0.05..0.5f64, zr in -2.0..2.0f64, zi in -2.0..2.0f64) {
            let (a, b) = random_pair(8, seed);
            let z = C::new(zr, zi);
            let t = block_traces(&a, &b, s, z).unwrap();
            prop_assert!(t.diagonal_real_residual() <= 1e-10);
            prop_assert!(t.equal_sums_residual() <= 1e-10);
            let tc = block_traces(&a, &b, s, z.conj()).unwrap();
            prop_assert!(interrelation_residual(&t, &tc) <= 1e-10);
            prop_assert!((t.get(1, 4) - t.get(4, 1).conj()).norm() <= 1e-10 * t.scale());
            let tm = block_traces(&a, &b, -s, z).unwrap();
            for k in 1..=4 {
                prop_assert!(t.get(k, k).im * tm.get(k, k).im <= 0.0);
            }
            let sym = check_spectrum_symmetry(&a, &b).unwrap();
            prop_assert!(sym.squares <= 1e-7 && sym.negation <= 1e-8 && sym.conjugation <= 1e-8);
        }
    }
}
