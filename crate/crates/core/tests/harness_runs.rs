use std::fs;
use std::path::Path;

use phspec_core::harness::{self, Experiment, Params};
use phspec_core::metric::Metric;
use phspec_core::{ComparisonReport, EnsembleConfig, RunConfig};

fn small(experiment: Experiment, dir: &Path) -> RunConfig {
    let mut c = RunConfig::new(
        EnsembleConfig { n: 32, m: 1.0, metric: Metric::signature_for(0.25, 32), master_seed: 11, num_samples: 24 },
        experiment,
    );
    c.out_dir = dir.to_path_buf();
    c
}

fn csv_files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect();
    files.sort();
    files
}

fn same_statistics(a: &ComparisonReport, b: &ComparisonReport, tol: f64) {
    assert_eq!(a.checks.len(), b.checks.len());
    for (x, y) in a.checks.iter().zip(&b.checks) {
        assert_eq!(x.check_name, y.check_name);
        assert_eq!(x.pass, y.pass);
        assert!((x.residual - y.residual).abs() <= tol, "{}: {} vs {}", x.check_name, x.residual, y.residual);
    }
    assert_eq!(a.ks_statistic, b.ks_statistic);
    assert_eq!(a.fraction_mean, b.fraction_mean);
    assert_eq!(a.skipped, b.skipped);
    assert_eq!(a.details, b.details);
}

#[test]
fn identical_configs_give_identical_csv_bytes() {
    let tmp = tempfile::tempdir().unwrap();
    for experiment in [Experiment::RealDensity, Experiment::ComplexScatter, Experiment::SampleStatistics] {
        let a = small(experiment, &tmp.path().join("a"));
        let b = small(experiment, &tmp.path().join("b"));
        let ra = harness::run(&a).unwrap();
        let rb = harness::run(&b).unwrap();
        let files = csv_files(&a.out_dir);
        assert!(!files.is_empty());
        assert_eq!(files, csv_files(&b.out_dir), "{experiment:?}");
        same_statistics(&ra, &rb, 0.0);
    }
}

#[test]
fn thread_count_does_not_change_results() {
    let tmp = tempfile::tempdir().unwrap();
    for experiment in [Experiment::RealDensity, Experiment::ComplexScatter, Experiment::Verify, Experiment::GapGrid] {
        let mut one = small(experiment, &tmp.path().join("one"));
        one.threads = Some(1);
        one.params.grid_points = 21;
        let mut many = one.clone();
        many.threads = Some(4);
        many.out_dir = tmp.path().join("many");
        let r1 = harness::run(&one).unwrap();
        let r4 = harness::run(&many).unwrap();
        assert_eq!(csv_files(&one.out_dir), csv_files(&many.out_dir), "{experiment:?}");
        same_statistics(&r1, &r4, 1e-12);
    }
}

#[test]
fn report_embeds_resolved_config_and_hash() {
    let tmp = tempfile::tempdir().unwrap();
    let mut c = small(Experiment::Semicircle, tmp.path());
    c.ensemble.metric = Metric::signature_for(0.0, 32);
    harness::run(&c).unwrap();
    let v: serde_json::Value = serde_json::from_slice(&fs::read(tmp.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(v["config_sha256"], c.content_hash());
    assert_eq!(RunConfig::from_json(&v["config"].to_string()).unwrap(), c);
    assert_eq!(v["thresholds_version"], phspec_core::thresholds::VERSION);
    assert!(v["report"]["checks"].as_array().unwrap().iter().all(|c| c["pass"].is_boolean()));
}

#[test]
fn fraction_sweep_reports_snapped_lambdas() {
    let tmp = tempfile::tempdir().unwrap();
    let mut c = small(Experiment::RealFractionSweep, tmp.path());
    c.params = Params { lambdas: vec![0.1, 0.5], ..Params::default() };
    let r = harness::run(&c).unwrap();
    let rows = r.details["rows"].as_array().unwrap();
    assert_eq!(rows[0]["snap"]["k"], 3);
    assert_eq!(rows[0]["snap"]["requested"], 0.1);
    assert!(rows[1]["fraction"].as_f64().unwrap() > 0.0);
    let csv = fs::read_to_string(tmp.path().join("fraction_sweep.csv")).unwrap();
    assert!(csv.starts_with("lambda,fraction,err,theory\n"));
    assert_eq!(csv.lines().count(), 3);
}

#[test]
fn invalid_configs_fail_before_sampling() {
    let tmp = tempfile::tempdir().unwrap();
    let mut c = small(Experiment::Uniformity, &tmp.path().join("never"));
    c.ensemble.metric = Metric::signature_for(0.0, 32);
    assert!(harness::run(&c).is_err());
    assert!(!c.out_dir.exists());
}

#[test]
fn theory_curves_without_sampling() {
    let tmp = tempfile::tempdir().unwrap();
    let c = small(Experiment::RealDensity, tmp.path());
    let summary = harness::write_theory(&c).unwrap();
    assert_eq!(summary["nu"], 0.5);
    let density = fs::read_to_string(tmp.path().join("real_theory.csv")).unwrap();
    assert!(density.starts_with("x,rho1\n"));
    let boundary = fs::read_to_string(tmp.path().join("boundary.csv")).unwrap();
    assert!(boundary.starts_with("theta,r_minus,r_plus\n"));
}

#[test]
fn eigenvalues_beyond_the_boundary_become_rarer_with_n() {
    let tmp = tempfile::tempdir().unwrap();
    let fraction = |n: usize| {
        let mut c = small(Experiment::ComplexScatter, &tmp.path().join(n.to_string()));
        c.ensemble.n = n;
        c.ensemble.metric = Metric::signature_for(0.25, n);
        c.ensemble.num_samples = 8;
        let d = harness::run(&c).unwrap().details;
        d["beyond_undilated_boundary"].as_f64().unwrap() / d["complex_eigenvalues"].as_f64().unwrap()
    };
    let (coarse, fine) = (fraction(48), fraction(192));
    assert!(coarse > 1.5 * fine && fine > 0.0, "{coarse} vs {fine}");
}
