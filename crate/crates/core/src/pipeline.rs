//! End-to-end finite part of ∫_{ℙⁿ} ω_FS^n / ‖s‖² along three independent
//! routes, their cross-check, and a JSON result cache.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::expansion::{generate_terms, reduce_term, symmetry_reduce, ReducedTerm};
use crate::gamma::{closed_form_fp, default_trunc, MAX_CLOSED_FORM_N};
use crate::quadrature::{
    default_fit_degree, default_grid, eval_reduced_terms, fit_laurent, sample_zeta, QuadratureSpec,
    ZetaSample, DEFAULT_MAX_CONDITION,
};
use crate::zring::ZetaExpr;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Route {
    Pipeline,
    ClosedForm,
    QuadratureFit,
}

impl Route {
    pub const ALL: [Route; 3] = [Route::Pipeline, Route::ClosedForm, Route::QuadratureFit];

    /// Largest n the route supports.
    pub fn max_n(self) -> usize {
        match self {
            Route::Pipeline => 3,
            Route::ClosedForm => MAX_CLOSED_FORM_N as usize,
            Route::QuadratureFit => 2,
        }
    }
}

impl fmt::Display for Route {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Route::Pipeline => "pipeline",
            Route::ClosedForm => "closed_form",
            Route::QuadratureFit => "quadrature_fit",
        })
    }
}

/// How the pipeline route evaluates terms supported in dimension ≥ 2.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Evaluation {
    /// Quadrature; points and lines stay exact.
    Numeric,
    /// Simplex pushforward for every term.
    Exact,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PipelineSpec {
    pub evaluation: Evaluation,
    /// Seed of the three-dimensional rule.
    pub seed: u64,
    /// λ-grid of the fit route.
    pub grid: Vec<f64>,
    /// Fit degree; `None` picks the default for n.
    pub fit_degree: Option<usize>,
    pub max_condition: f64,
}

impl Default for PipelineSpec {
    fn default() -> Self {
        Self {
            evaluation: Evaluation::Numeric,
            seed: QuadratureSpec::for_dim(3).seed,
            grid: default_grid(),
            fit_degree: None,
            max_condition: DEFAULT_MAX_CONDITION,
        }
    }
}

impl PipelineSpec {
    pub fn quadrature(&self, dim: usize) -> QuadratureSpec {
        let mut spec = QuadratureSpec::for_dim(dim);
        spec.seed = self.seed;
        spec
    }

    pub fn zeta_quadrature(&self, n: usize) -> QuadratureSpec {
        let mut spec = QuadratureSpec::for_zeta(n);
        spec.seed = self.seed;
        spec
    }

    /// Hex SHA-256 of the canonical JSON encoding.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("spec serializes");
        Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TermContribution {
    pub id: String,
    pub value: f64,
    pub error: f64,
    pub exact: Option<ZetaExpr>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FinitePartResult {
    pub n: usize,
    pub route: Route,
    pub exact: Option<ZetaExpr>,
    pub float_value: f64,
    pub per_term_breakdown: Option<Vec<TermContribution>>,
    pub error_estimate: f64,
    /// Condition number of the fit route.
    pub condition: Option<f64>,
    pub spec: PipelineSpec,
}

/// Finite part of ∫_{ℙⁿ} ω_FS^n/‖s‖² with s = Z₀⋯Zₙ along one route.
pub fn finite_part(n: usize, route: Route, spec: &PipelineSpec) -> Result<FinitePartResult> {
    if n == 0 || n > route.max_n() {
        return Err(Error::InvalidArgument(format!(
            "route {route} supports 1 <= n <= {}, got {n}",
            route.max_n()
        )));
    }
    match route {
        Route::Pipeline => pipeline(n, spec),
        Route::ClosedForm => closed_form(n, spec),
        Route::QuadratureFit => quadrature_fit(n, spec),
    }
}

fn closed_form(n: usize, spec: &PipelineSpec) -> Result<FinitePartResult> {
    let cf = closed_form_fp(n as u32, default_trunc(n as u32))?;
    Ok(FinitePartResult {
        n,
        route: Route::ClosedForm,
        float_value: cf.fp.eval(),
        exact: Some(cf.fp),
        per_term_breakdown: None,
        error_estimate: 0.0,
        condition: None,
        spec: spec.clone(),
    })
}

fn pipeline(n: usize, spec: &PipelineSpec) -> Result<FinitePartResult> {
    let classes = symmetry_reduce(&generate_terms(n)?);
    let mut pieces: Vec<(usize, ReducedTerm)> = Vec::new();
    for (i, class) in classes.iter().enumerate() {
        let reduced = reduce_term(class).map_err(|e| Error::Term {
            term: class.id(),
            source: Box::new(e),
        })?;
        pieces.extend(reduced.into_iter().map(|r| (i, r)));
    }
    let values: Vec<(Option<ZetaExpr>, f64, f64)> = match spec.evaluation {
        Evaluation::Exact => pieces
            .iter()
            .map(|(_, r)| {
                let e = r.exact_value()?;
                Ok((Some(e.clone()), e.eval(), 0.0))
            })
            .collect::<Result<_>>()?,
        Evaluation::Numeric => {
            let terms: Vec<ReducedTerm> = pieces.iter().map(|(_, r)| r.clone()).collect();
            eval_reduced_terms(&terms, &spec.quadrature(3))?
                .into_iter()
                .map(|v| (v.exact, v.value, v.error))
                .collect()
        }
    };
    let mut breakdown: Vec<TermContribution> = classes
        .iter()
        .map(|c| TermContribution {
            id: c.id(),
            value: 0.0,
            error: 0.0,
            exact: Some(ZetaExpr::from_integer(0)),
        })
        .collect();
    for ((class, _), (exact, value, error)) in pieces.iter().zip(values) {
        let slot = &mut breakdown[*class];
        slot.error += error;
        slot.exact = match (slot.exact.take(), exact) {
            (Some(acc), Some(e)) => Some(&acc + &e),
            _ => None,
        };
        slot.value += value;
    }
    for slot in &mut breakdown {
        if let Some(e) = &slot.exact {
            slot.value = e.eval();
        }
    }
    let total_exact = breakdown
        .iter()
        .try_fold(ZetaExpr::from_integer(0), |acc, t| t.exact.as_ref().map(|e| &acc + e));
    let float_value = breakdown.iter().map(|t| t.value).sum();
    let error_estimate = breakdown.iter().map(|t| t.error).sum();
    Ok(FinitePartResult {
        n,
        route: Route::Pipeline,
        exact: total_exact,
        float_value,
        per_term_breakdown: Some(breakdown),
        error_estimate,
        condition: None,
        spec: spec.clone(),
    })
}

/// Samples Z(λ) on the λ-grid of `spec`.
pub fn sample_grid(n: usize, spec: &PipelineSpec) -> Result<Vec<ZetaSample>> {
    let qspec = spec.zeta_quadrature(n);
    spec.grid.iter().map(|&l| sample_zeta(n, l, &qspec)).collect()
}

fn quadrature_fit(n: usize, spec: &PipelineSpec) -> Result<FinitePartResult> {
    let samples = sample_grid(n, spec)?;
    let degree = spec.fit_degree.unwrap_or_else(|| default_fit_degree(n));
    let fit = fit_laurent(&samples, n, degree, spec.max_condition)?;
    let value = fit.series.coeff(0)?;
    // sensitivity to the fit degree stands in for the truncation error
    let lower = fit_laurent(&samples, n, degree - 1, spec.max_condition)?;
    let error_estimate = (lower.series.coeff(0)? - value).abs();
    Ok(FinitePartResult {
        n,
        route: Route::QuadratureFit,
        exact: None,
        float_value: value,
        per_term_breakdown: None,
        error_estimate,
        condition: Some(fit.condition),
        spec: spec.clone(),
    })
}

/// Directory of cached results, one JSON file per (n, route, spec hash).
#[derive(Clone, Debug)]
pub struct Cache {
    dir: PathBuf,
}

impl Cache {
    pub fn new(dir: impl AsRef<Path>) -> Self {
        Self {
            dir: dir.as_ref().to_path_buf(),
        }
    }

    pub fn path(&self, n: usize, route: Route, spec: &PipelineSpec) -> PathBuf {
        self.dir.join(format!("fp-n{n}-{route}-{}.json", &spec.hash()[..16]))
    }

    /// A cached result, if present and matching the key.
    pub fn load(&self, n: usize, route: Route, spec: &PipelineSpec) -> Option<FinitePartResult> {
        let text = fs::read_to_string(self.path(n, route, spec)).ok()?;
        let r: FinitePartResult = serde_json::from_str(&text).ok()?;
        (r.n == n && r.route == route && &r.spec == spec).then_some(r)
    }

    pub fn store(&self, result: &FinitePartResult) -> Result<PathBuf> {
        fs::create_dir_all(&self.dir)?;
        let path = self.path(result.n, result.route, &result.spec);
        fs::write(&path, to_json(result)?)?;
        Ok(path)
    }
}

/// Stable pretty JSON encoding of a result.
pub fn to_json(result: &FinitePartResult) -> Result<String> {
    Ok(serde_json::to_string_pretty(result)?)
}

/// `finite_part` through an optional cache.
pub fn finite_part_cached(
    n: usize,
    route: Route,
    spec: &PipelineSpec,
    cache: Option<&Cache>,
) -> Result<FinitePartResult> {
    if let Some(hit) = cache.and_then(|c| c.load(n, route, spec)) {
        return Ok(hit);
    }
    let result = finite_part(n, route, spec)?;
    if let Some(c) = cache {
        c.store(&result)?;
    }
    Ok(result)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tolerance {
    Relative(f64),
    Absolute(f64),
}

impl Tolerance {
    pub fn deviation(&self, value: f64, reference: f64) -> f64 {
        match self {
            Tolerance::Relative(_) => (value - reference).abs() / reference.abs(),
            Tolerance::Absolute(_) => (value - reference).abs(),
        }
    }

    pub fn limit(&self) -> f64 {
        match *self {
            Tolerance::Relative(t) | Tolerance::Absolute(t) => t,
        }
    }
}

/// Agreement required between a route and the closed form.
pub fn tolerance(n: usize, route: Route) -> Option<Tolerance> {
    let pi_n = std::f64::consts::PI.powi(n as i32);
    match (n, route) {
        (_, Route::ClosedForm) => None,
        (1, Route::Pipeline) => Some(Tolerance::Absolute(1e-6)),
        (1, Route::QuadratureFit) => Some(Tolerance::Absolute(2e-2 * pi_n)),
        (2, Route::Pipeline) => Some(Tolerance::Relative(1e-4)),
        (_, Route::Pipeline) => Some(Tolerance::Relative(1e-2)),
        (_, Route::QuadratureFit) => Some(Tolerance::Relative(2e-2)),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Comparison {
    pub route: Route,
    pub value: Option<f64>,
    pub reference: f64,
    pub deviation: Option<f64>,
    pub tolerance: Tolerance,
    pub error: Option<String>,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct CrossCheckReport {
    pub n: usize,
    pub results: Vec<FinitePartResult>,
    pub comparisons: Vec<Comparison>,
    pub pass: bool,
}

/// Runs every admissible route for n and compares each with the closed form.
pub fn cross_check(n: usize, spec: &PipelineSpec, cache: Option<&Cache>) -> CrossCheckReport {
    let routes: Vec<Route> = Route::ALL.into_iter().filter(|r| (1..=r.max_n()).contains(&n)).collect();
    let reference = finite_part_cached(n, Route::ClosedForm, spec, cache);
    let mut results = Vec::new();
    let mut comparisons = Vec::new();
    let reference_value = match &reference {
        Ok(r) => {
            results.push(r.clone());
            r.float_value
        }
        Err(e) => {
            return CrossCheckReport {
                n,
                results,
                comparisons: vec![Comparison {
                    route: Route::ClosedForm,
                    value: None,
                    reference: f64::NAN,
                    deviation: None,
                    tolerance: Tolerance::Absolute(0.0),
                    error: Some(e.to_string()),
                    pass: false,
                }],
                pass: false,
            }
        }
    };
    for route in routes {
        let Some(tol) = tolerance(n, route) else { continue };
        let outcome = finite_part_cached(n, route, spec, cache);
        let comparison = match outcome {
            Ok(r) => {
                let deviation = tol.deviation(r.float_value, reference_value);
                let c = Comparison {
                    route,
                    value: Some(r.float_value),
                    reference: reference_value,
                    deviation: Some(deviation),
                    tolerance: tol,
                    error: None,
                    pass: deviation <= tol.limit(),
                };
                results.push(r);
                c
            }
            Err(e) => Comparison {
                route,
                value: None,
                reference: reference_value,
                deviation: None,
                tolerance: tol,
                error: Some(e.to_string()),
                pass: false,
            },
        };
        comparisons.push(comparison);
    }
    let pass = comparisons.iter().all(|c| c.pass);
    CrossCheckReport {
        n,
        results,
        comparisons,
        pass,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_route() {
        let r = finite_part(2, Route::ClosedForm, &PipelineSpec::default()).unwrap();
        assert_eq!(r.exact.unwrap().to_string(), "-9*pi^2*zeta(2)");
        assert!(finite_part(13, Route::ClosedForm, &PipelineSpec::default()).is_err());
        assert!(finite_part(3, Route::QuadratureFit, &PipelineSpec::default()).is_err());
        assert!(finite_part(4, Route::Pipeline, &PipelineSpec::default()).is_err());
    }

    #[test]
    fn pipeline_route_n1_is_exact_zero() {
        let r = finite_part(1, Route::Pipeline, &PipelineSpec::default()).unwrap();
        assert_eq!(r.exact, Some(ZetaExpr::from_integer(0)));
        assert_eq!(r.float_value, 0.0);
    }

    #[test]
    fn exact_pipeline_matches_closed_form() {
        let spec = PipelineSpec {
            evaluation: Evaluation::Exact,
            ..PipelineSpec::default()
        };
        for n in 1..=3 {
            let p = finite_part(n, Route::Pipeline, &spec).unwrap();
            let c = finite_part(n, Route::ClosedForm, &spec).unwrap();
            assert_eq!(p.exact, c.exact, "n={n}");
        }
    }

    #[test]
    fn breakdown_sums_to_total() {
        let r = finite_part(2, Route::Pipeline, &PipelineSpec::default()).unwrap();
        let parts = r.per_term_breakdown.as_ref().unwrap();
        assert_eq!(parts.iter().map(|t| t.value).sum::<f64>(), r.float_value);
        assert!(r.exact.is_none());
        let expected = -9.0 * std::f64::consts::PI.powi(2) * crate::zring::zeta_value(2);
        assert!((r.float_value - expected).abs() < 1e-4 * expected.abs());
    }

    #[test]
    fn spec_hash_is_stable() {
        let a = PipelineSpec::default();
        let mut b = a.clone();
        assert_eq!(a.hash(), b.hash());
        b.seed += 1;
        assert_ne!(a.hash(), b.hash());
    }
}
