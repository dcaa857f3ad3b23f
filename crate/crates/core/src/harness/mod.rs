//! Experiment orchestration: configuration, dispatch and reports.
//!
//! Samples are processed in parallel and collected in index order; every
//! reduction then runs sequentially, so results do not depend on the thread
//! count.

mod experiments;
pub mod geometry;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use crate::ensemble::EnsembleConfig;
use crate::error::{Error, Result};
use crate::hermcheck::CheckRecord;
use crate::metric::Metric;
use crate::thresholds;

pub use experiments::{
    run_complex_scatter, run_fraction_sweep, run_gap_grid, run_real_density, run_sample_statistics, run_semicircle,
    run_uniformity, run_verify, write_theory,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    RealDensity,
    RealFractionSweep,
    ComplexScatter,
    Uniformity,
    GapGrid,
    Verify,
    Semicircle,
    SampleStatistics,
}

/// Experiment parameters; every field has a default.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Params {
    /// Histogram bins for real-axis densities.
    pub bins: usize,
    /// Requested λ values for the fraction sweep, snapped to `k/N`.
    pub lambdas: Vec<f64>,
    /// Nodes per side of the gap-solver grid.
    pub grid_points: usize,
    /// Half width of the gap-solver grid; defaults to 1.2 times the spectral bound.
    pub grid_half_width: Option<f64>,
    /// Rays for boundary bisection.
    pub rays: usize,
    /// `η = is` for the averaged gap check.
    pub s: f64,
    /// `w = z²` for the averaged gap check, as `[re, im]`.
    pub averaged_w: [f64; 2],
    /// `w` for the resolvent-formula check.
    pub resolvent_w: [f64; 2],
    pub identity_n: usize,
    pub identity_samples: usize,
    /// Highest `n` of `(1/N) tr(B φⁿ)`.
    pub moment_order: usize,
    /// Write per-sample eigenvalues.
    pub write_spectra: bool,
    /// Write raw `φ` dumps.
    pub write_raw: bool,
}

impl Default for Params {
    fn default() -> Self {
        Params {
            bins: 100,
            lambdas: vec![0.0, 0.125, 0.25, 0.375, 0.5],
            grid_points: 101,
            grid_half_width: None,
            rays: 64,
            s: 0.1,
            averaged_w: [0.3, 0.4],
            resolvent_w: [1.2, 0.6],
            identity_n: 8,
            identity_samples: 100,
            moment_order: 4,
            write_spectra: false,
            write_raw: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub ensemble: EnsembleConfig,
    pub experiment: Experiment,
    #[serde(default)]
    pub params: Params,
    #[serde(default = "default_out_dir")]
    pub out_dir: PathBuf,
    /// Worker threads; `None` uses every core.
    #[serde(default)]
    pub threads: Option<usize>,
}

fn default_out_dir() -> PathBuf {
    PathBuf::from("out")
}

impl RunConfig {
    pub fn new(ensemble: EnsembleConfig, experiment: Experiment) -> Self {
        RunConfig { ensemble, experiment, params: Params::default(), out_dir: default_out_dir(), threads: None }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }

    /// Hex SHA-256 of the canonical JSON form.
    pub fn content_hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("configs serialize");
        Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Checks everything the chosen experiment needs before any sampling.
    pub fn validate(&self) -> Result<()> {
        self.ensemble.validate()?;
        let p = &self.params;
        let positive = [("bins", p.bins), ("grid_points", p.grid_points), ("rays", p.rays), ("identity_n", p.identity_n), ("identity_samples", p.identity_samples)];
        for (name, v) in positive {
            if v == 0 {
                return Err(Error::Config(format!("{name} must be positive")));
            }
        }
        if !(p.s > 0.0 && p.s.is_finite()) {
            return Err(Error::Config(format!("s must be positive (got {})", p.s)));
        }
        if let Some(h) = p.grid_half_width {
            if !(h > 0.0 && h.is_finite()) {
                return Err(Error::Config(format!("grid_half_width must be positive (got {h})")));
            }
        }
        if self.threads == Some(0) {
            return Err(Error::Config("threads must be positive".into()));
        }
        let lambda = self.signature_lambda();
        match self.experiment {
            Experiment::RealDensity | Experiment::ComplexScatter | Experiment::Uniformity if lambda.is_none() => {
                Err(Error::Config(format!("{:?} needs a signature metric", self.experiment)))
            }
            Experiment::ComplexScatter | Experiment::Uniformity if matches!(lambda, Some(l) if l == 0.0 || l == 1.0) => {
                Err(Error::Config("complex eigenvalues need 0 < λ < 1".into()))
            }
            Experiment::RealFractionSweep if p.lambdas.is_empty() || p.lambdas.iter().any(|l| !(0.0..=1.0).contains(l)) => {
                Err(Error::Config("lambdas must be a nonempty list in [0, 1]".into()))
            }
            Experiment::Semicircle if !self.ensemble.metric.is_definite() => {
                Err(Error::Config("the semicircle run needs a definite metric such as λ = 0".into()))
            }
            Experiment::SampleStatistics if p.moment_order == 0 || p.moment_order > 8 => {
                Err(Error::Config(format!("moment_order must be in 1..=8 (got {})", p.moment_order)))
            }
            _ => Ok(()),
        }
    }

    /// `k/N` of a signature metric.
    pub fn signature_lambda(&self) -> Option<f64> {
        match self.ensemble.metric {
            Metric::Signature { k, n } => Some(k as f64 / n as f64),
            _ => None,
        }
    }
}

/// A requested λ and the realizable `k/N` actually used.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LambdaSnap {
    pub requested: f64,
    pub k: usize,
    pub n: usize,
    pub realized: f64,
}

pub fn snap_lambda(requested: f64, n: usize) -> LambdaSnap {
    let Metric::Signature { k, n } = Metric::signature_for(requested, n) else {
        unreachable!("signature_for builds a signature metric");
    };
    LambdaSnap { requested, k, n, realized: k as f64 / n as f64 }
}

/// Outcome of one experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub experiment: Experiment,
    pub ks_statistic: Option<f64>,
    pub fraction_mean: Option<f64>,
    pub fraction_err: Option<f64>,
    pub outlier_fraction: Option<f64>,
    pub uniformity_max_rel_dev: Option<f64>,
    pub checks: Vec<CheckRecord>,
    /// Items left out of a statistic, by reason.
    pub skipped: BTreeMap<String, usize>,
    /// Experiment-specific values.
    pub details: serde_json::Value,
    pub runtime_seconds: f64,
}

impl ComparisonReport {
    fn new(experiment: Experiment) -> Self {
        ComparisonReport {
            experiment,
            ks_statistic: None,
            fraction_mean: None,
            fraction_err: None,
            outlier_fraction: None,
            uniformity_max_rel_dev: None,
            checks: Vec::new(),
            skipped: BTreeMap::new(),
            details: serde_json::Value::Null,
            runtime_seconds: 0.0,
        }
    }

    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn check(&self, name: &str) -> Option<&CheckRecord> {
        self.checks.iter().find(|c| c.check_name == name)
    }
}

/// Contents of `report.json`.
#[derive(Clone, Debug, Serialize)]
pub struct ReportFile<'a> {
    pub config: &'a RunConfig,
    pub config_sha256: String,
    pub thresholds_version: u32,
    pub thresholds: &'static [thresholds::Threshold],
    pub pass: bool,
    pub report: &'a ComparisonReport,
}

/// Validates, runs the experiment on the configured thread pool and writes `report.json`.
pub fn run(config: &RunConfig) -> Result<ComparisonReport> {
    config.validate()?;
    crate::linalg::use_sequential_kernels();
    fs::create_dir_all(&config.out_dir)?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = config.threads {
        builder = builder.num_threads(t);
    }
    let pool = builder.build().map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let start = Instant::now();
    let mut report = pool.install(|| match config.experiment {
        Experiment::RealDensity => run_real_density(config),
        Experiment::RealFractionSweep => run_fraction_sweep(config),
        Experiment::ComplexScatter => run_complex_scatter(config),
        Experiment::Uniformity => run_uniformity(config),
        Experiment::GapGrid => run_gap_grid(config),
        Experiment::Verify => run_verify(config),
        Experiment::Semicircle => run_semicircle(config),
        Experiment::SampleStatistics => run_sample_statistics(config),
    })?;
    report.runtime_seconds = start.elapsed().as_secs_f64();
    write_report(config, &report)?;
    Ok(report)
}

pub fn write_report(config: &RunConfig, report: &ComparisonReport) -> Result<()> {
    let file = ReportFile {
        config,
        config_sha256: config.content_hash(),
        thresholds_version: thresholds::VERSION,
        thresholds: thresholds::ALL,
        pass: report.pass(),
        report,
    };
    fs::write(config.out_dir.join("report.json"), serde_json::to_string_pretty(&file)?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base(experiment: Experiment) -> RunConfig {
        RunConfig::new(
            EnsembleConfig { n: 16, m: 1.0, metric: Metric::signature_for(0.25, 16), master_seed: 1, num_samples: 4 },
            experiment,
        )
    }

    #[test]
    fn config_round_trip_and_hash() {
        let c = base(Experiment::GapGrid);
        let text = serde_json::to_string(&c).unwrap();
        let back = RunConfig::from_json(&text).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.content_hash(), c.content_hash());
        let mut d = c.clone();
        d.ensemble.master_seed = 2;
        assert_ne!(d.content_hash(), c.content_hash());
    }

    #[test]
    fn minimal_json_uses_defaults() {
        let c = RunConfig::from_json(
            r#"{"ensemble": {"n": 8, "m": 1.0, "metric": {"type": "signature", "k": 2, "n": 8},
                "master_seed": 3, "num_samples": 2}, "experiment": "verify"}"#,
        )
        .unwrap();
        assert_eq!(c.params, Params::default());
        assert_eq!(c.out_dir, PathBuf::from("out"));
        assert!(RunConfig::from_json(r#"{"ensemble": {}, "experiment": "verify", "bogus": 1}"#).is_err());
    }

    #[test]
    fn experiment_specific_validation() {
        let mut c = base(Experiment::RealDensity);
        c.ensemble.metric = Metric::Diagonal { values: (0..16).map(|i| if i % 2 == 0 { 1.0 } else { -2.0 }).collect() };
        assert!(matches!(c.validate(), Err(Error::Config(_))));
        let mut c = base(Experiment::Uniformity);
        c.ensemble.metric = Metric::Signature { k: 0, n: 16 };
        assert!(c.validate().is_err());
        let mut c = base(Experiment::RealFractionSweep);
        c.params.lambdas = vec![0.25, 1.5];
        assert!(c.validate().is_err());
        let mut c = base(Experiment::GapGrid);
        c.params.bins = 0;
        assert!(c.validate().is_err());
        assert!(base(Experiment::Semicircle).validate().is_err());
        assert!(base(Experiment::Verify).validate().is_ok());
    }

    #[test]
    fn lambda_snapping() {
        let s = snap_lambda(0.3, 16);
        assert_eq!((s.k, s.n), (5, 16));
        assert_eq!(s.realized, 0.3125);
        assert_eq!(snap_lambda(0.25, 256).realized, 0.25);
    }
}
