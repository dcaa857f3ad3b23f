//! Every pass/fail tolerance used by checks and experiments.
//!
//! Statistical entries were pinned from ten independent replicas of the run
//! they gate, ten times its sample count in total. Each recipe records what
//! those replicas measured.

use serde::Serialize;

/// Bumped whenever a value changes.
pub const VERSION: u32 = 2;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Threshold {
    pub key: &'static str,
    pub value: f64,
    pub recipe: &'static str,
}

macro_rules! thresholds {
    ($($name:ident = $value:expr, $recipe:expr;)*) => {
        $(pub const $name: Threshold = Threshold { key: stringify!($name), value: $value, recipe: $recipe };)*
        pub const ALL: &[Threshold] = &[$($name),*];
    };
}

thresholds! {
    KS_REAL_DENSITY = 0.02,
        "10 replicas of N=256, 500 samples, m=1: max KS 6.7e-4 (lambda=1/8), 8.9e-4 (1/4), 1.7e-3 (3/8); 0.02 kept as the 5/sqrt(real count) noise bound";
    REAL_FRACTION_DEVIATION = 0.01,
        "10 replicas of N=256, 500 samples, lambda in {1/8,1/4,3/8}: every sample has exactly |N-2k| real eigenvalues, deviation 0";
    OUTLIER_MARGIN_FACTOR = 4.0,
        "boundary dilation delta = factor/(m sqrt N), the N^-1/2 edge width of Ginibre-like spectra";
    OUTLIER_FRACTION = 0.01,
        "10 replicas of N=1024, 20 samples, lambda=1/4: no complex eigenvalue beyond the dilated boundary";
    UNIFORMITY_MARGIN_FACTOR = 3.0,
        "interior cells lie inside the domain eroded by factor/(m sqrt N)";
    UNIFORMITY_MIN_EXPECTED = 50.0,
        "minimum expected count per interior cell before coarsening";
    UNIFORMITY_TARGET_EXPECTED = 2000.0,
        "expected count per cell when choosing the grid; Poisson noise 1/sqrt(2000) = 0.022";
    UNIFORMITY_RELATIVE_DEVIATION = 0.10,
        "10 replicas of N=1024, 200 samples, lambda=3/8 (16 interior cells): max deviation from m^2/pi 2.8e-2 (mean 2.0e-2)";
    COMPLEX_MASS_DEVIATION = 0.01,
        "same replicas: complex fraction equals nu exactly in every sample";
    KS_SEMICIRCLE = 0.02,
        "10 replicas of N=256, 500 samples, lambda=0: max KS 4.7e-4";
    GUE_GREEN_POINTWISE = 1e-10,
        "double-precision Newton/roots against the closed square-root form";
    ALPHA_SQ_ORACLE = 1e-8,
        "gap solver against the closed-form alpha^2 on interior grid points";
    BOUNDARY_ORACLE = 1e-6,
        "bisection of solvability along rays against the closed-form radii";
    IDENTITY_RESIDUAL = 1e-9,
        "finite-N identities by direct inversion, relative to the largest block trace";
    RESOLVENT_CONDITION_MAX = 1e8,
        "Frobenius condition number above which a block-resolvent point is skipped";
    SPECTRUM_PAIRING = 1e-9,
        "+-z and conjugation pairing of hermitized eigenvalues, relative to the spectral radius";
    SPECTRUM_SQUARE = 1e-7,
        "squared hermitized eigenvalues against eigenvalues of phi, relative to the squared radius";
    AVERAGED_A_C = 0.05,
        "10x run, N=64, 5000 samples, s=0.1, z=sqrt(0.3+0.4i), lambda=1/4: |a-c|/|a| = 1.7e-16";
    AVERAGED_SELF_CONSISTENCY = 0.05,
        "same 10x run: finite-eta self-consistency residuals at most 7.7e-4";
    RESOLVENT_FORMULA = 0.03,
        "10x run, N=128, 5000 samples, w=1.2+0.6i: relative deviation 8.1e-5 with standard error 1.2e-4";
    STATISTICAL_SIGMAS = 4.0,
        "Gaussian tail bound in standard errors; 10 replicas of N=128, 2000 samples, lambda=1/2 gave at most 2.2";
    TRACE_VARIANCE = 0.10,
        "10 replicas of N=128, 2000 samples: max relative deviation 6.3e-2 (lambda=1/4), 4.8e-2 (lambda=1/2)";
    STRUCTURAL_RESIDUAL = 1e-8,
        "identities satisfied by every converged gap solution";
    SOLVER_RESIDUAL = 1e-9,
        "gap-solver convergence criterion on any metric";
    UNRESOLVED_FRACTION = 1e-3,
        "share of grid points where neither phase converges";
}

pub fn by_key(key: &str) -> Option<Threshold> {
    ALL.iter().copied().find(|t| t.key == key)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn keys_are_unique_and_positive() {
        for (i, t) in ALL.iter().enumerate() {
            assert!(t.value > 0.0, "{}", t.key);
            assert!(ALL[i + 1..].iter().all(|u| u.key != t.key));
            assert_eq!(by_key(t.key), Some(*t));
        }
    }
}
