//! GUE sampling and construction of `φ = A·B`.
//!
//! `A` has weight `exp(-N m² tr A²/2)`, so `⟨A_ij A_kl⟩ = δ_il δ_jk/(N m²)`:
//! diagonal entries are real with variance `1/(N m²)`, off-diagonal real and
//! imaginary parts each have variance `1/(2N m²)`. Normals are drawn row by
//! row over the upper triangle: `A_ii`, then `(Re A_ij, Im A_ij)` for `j > i`.

use num_complex::Complex64 as C;
use serde::{Deserialize, Serialize};
use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::linalg;
use crate::metric::Metric;
use crate::rng::{derive_seed, NormalStream};
use crate::CMat;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleConfig {
    pub n: usize,
    pub m: f64,
    pub metric: Metric,
    pub master_seed: u64,
    pub num_samples: usize,
}

#[derive(Clone, Debug)]
pub struct PhSample {
    pub phi: CMat,
    pub a_matrix: CMat,
    /// Diagonal of `B`.
    pub b: Vec<f64>,
    pub sample_index: usize,
    pub seed: u64,
}

impl EnsembleConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::Config(format!("N must be at least 2 (got {})", self.n)));
        }
        if !(self.m > 0.0 && self.m.is_finite()) {
            return Err(Error::Config(format!("m must be positive (got {})", self.m)));
        }
        if self.num_samples == 0 {
            return Err(Error::Config("num_samples must be positive".into()));
        }
        self.metric.realize(self.n).map(|_| ())
    }

    pub fn seed(&self, index: usize) -> u64 {
        derive_seed(self.master_seed, index as u64)
    }

    pub fn sample(&self, index: usize) -> Result<PhSample> {
        let seed = self.seed(index);
        let a = sample_gue(self.n, self.m, seed);
        let mut s = make_ph(a, &self.metric)?;
        s.sample_index = index;
        s.seed = seed;
        Ok(s)
    }
}

pub fn sample_gue(n: usize, m: f64, seed: u64) -> CMat {
    let mut rng = NormalStream::new(seed);
    let sd_diag = (1.0 / n as f64).sqrt();
    let sd_off = (0.5 / n as f64).sqrt();
    let mut a = CMat::zeros(n, n);
    for i in 0..n {
        a[(i, i)] = C::new(rng.next_normal() * sd_diag / m, 0.0);
        for j in i + 1..n {
            let re = rng.next_normal() * sd_off / m;
            let im = rng.next_normal() * sd_off / m;
            a[(i, j)] = C::new(re, im);
            a[(j, i)] = C::new(re, -im);
        }
    }
    a
}

/// `φ = A·diag(b)`.
pub fn make_ph(a: CMat, metric: &Metric) -> Result<PhSample> {
    if a.nrows() != a.ncols() {
        return Err(Error::Dimension(format!("A is {}x{}", a.nrows(), a.ncols())));
    }
    let b = metric.realize(a.nrows())?;
    let phi = CMat::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)] * b[j]);
    Ok(PhSample { phi, a_matrix: a, b, sample_index: 0, seed: 0 })
}

impl PhSample {
    pub fn n(&self) -> usize {
        self.b.len()
    }

    /// `‖φ†B − Bφ‖_F / ‖φ‖_F`.
    pub fn intertwining_residual(&self) -> f64 {
        let n = self.n();
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                let lhs = self.phi[(j, i)].conj() * self.b[j];
                let rhs = self.b[i] * self.phi[(i, j)];
                acc += (lhs - rhs).norm_sqr();
            }
        }
        acc.sqrt() / linalg::frobenius(&self.phi).max(f64::MIN_POSITIVE)
    }

    /// `Re (1/N) tr φ`.
    pub fn trace_statistic(&self) -> f64 {
        linalg::trace(&self.phi).re / self.n() as f64
    }

    /// `(1/N) tr(B φⁿ)` for `n ≤ 8`.
    pub fn moment_statistic(&self, n: usize) -> Result<C> {
        Ok(*self.moment_statistics(n)?.last().expect("at least the zeroth moment"))
    }

    /// `(1/N) tr(B φᵏ)` for `k = 0..=n_max`, `n_max ≤ 8`.
    pub fn moment_statistics(&self, n_max: usize) -> Result<Vec<C>> {
        if n_max > 8 {
            return Err(Error::Config(format!("moment order {n_max} exceeds 8")));
        }
        let n = self.n();
        let bmat = CMat::from_fn(n, n, |i, j| if i == j { C::new(self.b[i], 0.0) } else { C::new(0.0, 0.0) });
        let mut out = vec![C::new(self.b.iter().sum::<f64>() / n as f64, 0.0)];
        // B φ^{k-1}, so that tr(B φ^k) = tr((B φ^{k-1}) φ).
        let mut left = bmat;
        for k in 1..=n_max {
            out.push(linalg::trace_of_product(&left, &self.phi) / n as f64);
            if k < n_max {
                left = &left * &self.phi;
            }
        }
        Ok(out)
    }

    /// Raw dump: `"PHS1"`, `N: u32`, `m: f64`, `seed: u64`, then row-major `φ` as (re, im) pairs, little endian.
    pub fn write_raw<W: Write>(&self, m: f64, mut out: W) -> Result<()> {
        let n = self.n();
        out.write_all(b"PHS1")?;
        out.write_all(&(n as u32).to_le_bytes())?;
        out.write_all(&m.to_le_bytes())?;
        out.write_all(&self.seed.to_le_bytes())?;
        for i in 0..n {
            for j in 0..n {
                let z = self.phi[(i, j)];
                out.write_all(&z.re.to_le_bytes())?;
                out.write_all(&z.im.to_le_bytes())?;
            }
        }
        Ok(())
    }
}

/// Contents of a raw dump.
#[derive(Clone, Debug)]
pub struct RawSample {
    pub m: f64,
    pub seed: u64,
    pub phi: CMat,
}

pub fn read_raw<R: Read>(mut input: R) -> Result<RawSample> {
    let mut magic = [0u8; 4];
    input.read_exact(&mut magic)?;
    if &magic != b"PHS1" {
        return Err(Error::Config("not a PHS1 dump".into()));
    }
    let mut b4 = [0u8; 4];
    let mut b8 = [0u8; 8];
    input.read_exact(&mut b4)?;
    let n = u32::from_le_bytes(b4) as usize;
    input.read_exact(&mut b8)?;
    let m = f64::from_le_bytes(b8);
    input.read_exact(&mut b8)?;
    let seed = u64::from_le_bytes(b8);
    let mut phi = CMat::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            input.read_exact(&mut b8)?;
            let re = f64::from_le_bytes(b8);
            input.read_exact(&mut b8)?;
            phi[(i, j)] = C::new(re, f64::from_le_bytes(b8));
        }
    }
    Ok(RawSample { m, seed, phi })
}
