//! Calibration runs for the statistical thresholds, at ten times the gated
//! sample count. Ignored by default; run with
//! `cargo test -p phspec-core --release --test calibration -- --ignored --nocapture`.

use phspec_core::hermcheck::{averaged_gap_residual, resolvent_vs_formula};
use phspec_core::{Complex64 as C, EnsembleConfig, Metric, SignatureTheory};

fn signature(n: usize, lambda: f64, seed: u64, samples: usize) -> EnsembleConfig {
    EnsembleConfig { n, m: 1.0, metric: Metric::signature_for(lambda, n), master_seed: seed, num_samples: samples }
}

#[test]
#[ignore]
fn averaged_gap_equations() {
    let theory = SignatureTheory::new(0.25, 1.0).unwrap();
    for w in [C::new(0.3, 0.4), C::new(0.3, 0.4).powi(2)] {
        println!("w={w} in D: {}", theory.in_domain(w));
    }
    let z = C::new(0.3, 0.4).sqrt();
    let report = averaged_gap_residual(&signature(64, 0.25, 9001, 5000), 0.1, z, 5000).unwrap();
    println!("{}", serde_json::to_string_pretty(&report).unwrap());
}

#[test]
#[ignore]
fn resolvent_formula() {
    let z = C::new(1.2, 0.6).sqrt();
    let r = resolvent_vs_formula(&signature(128, 0.25, 9002, 5000), z, 5000).unwrap();
    println!("{}", serde_json::to_string_pretty(&r).unwrap());
}

#[test]
#[ignore]
fn eigen_timing() {
    for n in [256, 1024] {
        let config = signature(n, 0.25, 1, 2);
        let t = std::time::Instant::now();
        let s = phspec_core::spectral::analyze(&config.sample(0).unwrap()).unwrap();
        println!("N={n}: {:?} real={}", t.elapsed(), s.real_count());
    }
}
