use finite_part::pipeline::{
    cross_check, finite_part, finite_part_cached, sample_grid, to_json, Cache, PipelineSpec, Route,
};
use finite_part::quadrature::{default_fit_degree, fit_laurent};
use finite_part::zring::zeta_value;
use std::f64::consts::PI;

#[test]
fn reruns_are_byte_identical() {
    let spec = PipelineSpec::default();
    let a = to_json(&finite_part(2, Route::Pipeline, &spec).unwrap()).unwrap();
    let b = to_json(&finite_part(2, Route::Pipeline, &spec).unwrap()).unwrap();
    assert_eq!(a, b);
}

#[test]
fn cache_round_trip() {
    let dir = std::env::temp_dir().join(format!("fp-cache-test-{}", std::process::id()));
    let cache = Cache::new(&dir);
    let spec = PipelineSpec::default();
    assert!(cache.load(2, Route::ClosedForm, &spec).is_none());
    let fresh = finite_part_cached(2, Route::ClosedForm, &spec, Some(&cache)).unwrap();
    let hit = cache.load(2, Route::ClosedForm, &spec).unwrap();
    assert_eq!(fresh, hit);
    let mut other = spec.clone();
    other.seed += 1;
    assert!(cache.load(2, Route::ClosedForm, &other).is_none());
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn fit_recovers_pole_and_finite_part() {
    let spec = PipelineSpec::default();
    let samples = sample_grid(2, &spec).unwrap();
    let fit = fit_laurent(&samples, 2, default_fit_degree(2), spec.max_condition).unwrap();
    let leading = 3.0 * PI * PI;
    assert!((fit.series.coeff(-2).unwrap() - leading).abs() <= 1e-2 * leading);
    let fp = -9.0 * PI * PI * zeta_value(2);
    assert!((fit.series.coeff(0).unwrap() - fp).abs() <= 2e-2 * fp.abs());
}

#[test]
fn low_dimensional_cross_checks_pass() {
    for n in 1..=2 {
        let report = cross_check(n, &PipelineSpec::default(), None);
        assert!(report.pass, "n={n}: {:?}", report.comparisons);
        assert_eq!(report.comparisons.len(), 2);
    }
}

#[test]
fn unsupported_requests_are_errors() {
    let spec = PipelineSpec::default();
    assert!(finite_part(0, Route::ClosedForm, &spec).is_err());
    assert!(finite_part(4, Route::Pipeline, &spec).is_err());
    assert!(finite_part(3, Route::QuadratureFit, &spec).is_err());
}
