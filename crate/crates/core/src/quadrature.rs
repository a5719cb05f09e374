//! Deterministic quadrature on [0,1]^d for the integrands produced by the
//! expansion, the local zeta function Z(λ), and Laurent fitting of λ-samples.
//!
//! One and two dimensions use nested tanh-sinh levels on the map
//! `x = 1/(1 + e^{−π sinh t})`, which absorbs logarithmic and algebraic
//! endpoint singularities. Three dimensions use scrambled Sobol points
//! pushed through a smoothing map that vanishes to fifth order at the ends.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expansion::ReducedTerm;
use crate::gamma::beta_log_integral;
use crate::grassmann::{eval_form, FormField, MultiVector};
use crate::laurent::LaurentSeries;
use crate::zring::ZetaExpr;

use std::f64::consts::PI;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rule {
    TanhSinh,
    TensorTanhSinh,
    Stratified,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub dim: usize,
    pub rule: Rule,
    /// Deepest refinement level before giving up.
    pub max_level: usize,
    pub target_rel_tol: f64,
    /// Absolute floor for integrals that vanish.
    pub abs_tol: f64,
    /// Half-width of the t-interval (tanh-sinh rules).
    pub t_max: f64,
    /// Seed of the scrambled sequences (stratified rule only).
    pub seed: u64,
    /// Independent scramblings per level (stratified rule only).
    pub replicates: usize,
}

impl QuadratureSpec {
    /// Defaults tuned for each dimension.
    pub fn for_dim(dim: usize) -> Self {
        match dim {
            0 | 1 => Self {
                dim: 1,
                rule: Rule::TanhSinh,
                max_level: 12,
                target_rel_tol: 1e-12,
                abs_tol: 1e-14,
                t_max: 4.0,
                seed: 0,
                replicates: 1,
            },
            2 => Self {
                dim: 2,
                rule: Rule::TensorTanhSinh,
                max_level: 8,
                target_rel_tol: 1e-9,
                abs_tol: 1e-11,
                t_max: 4.0,
                seed: 0,
                replicates: 1,
            },
            _ => Self {
                dim,
                rule: Rule::Stratified,
                max_level: 9,
                target_rel_tol: 1e-3,
                abs_tol: 1e-6,
                t_max: 4.0,
                seed: 20_240_601,
                replicates: 8,
            },
        }
    }

    /// Defaults for sampling Z(λ), whose algebraic endpoint singularities
    /// need a wider t-interval.
    pub fn for_zeta(n: usize) -> Self {
        let mut spec = Self::for_dim(n);
        spec.t_max = 6.0;
        if n == 1 {
            spec.target_rel_tol = 1e-13;
        }
        if n == 2 {
            spec.target_rel_tol = 1e-10;
            spec.max_level = 9;
        }
        spec
    }

    pub fn with_dim(&self, dim: usize) -> Self {
        let mut spec = Self::for_dim(dim);
        spec.seed = self.seed;
        spec
    }

    fn converged(&self, value: f64, error: f64) -> bool {
        error <= (self.target_rel_tol * value.abs()).max(self.abs_tol)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
    pub level: usize,
    pub evaluations: usize,
}

/// A point of the double-exponential map: x, 1 − x, and log dx/dt.
#[derive(Clone, Copy, Debug)]
struct Node {
    x: f64,
    xc: f64,
    log_dxdt: f64,
}

impl Node {
    fn at(t: f64) -> Self {
        let s = PI * t.sinh();
        let x = 1.0 / (1.0 + (-s).exp());
        let xc = 1.0 / (1.0 + s.exp());
        Node {
            x,
            xc,
            log_dxdt: (PI * t.cosh()).ln() + x.ln() + xc.ln(),
        }
    }
}

struct Ladder {
    h0: f64,
    k0: i64,
}

impl Ladder {
    fn new(t_max: f64) -> Self {
        let k0 = t_max.ceil().max(1.0) as i64;
        Self {
            h0: t_max / k0 as f64,
            k0,
        }
    }

    fn step(&self, level: usize) -> f64 {
        self.h0 / (1u64 << level) as f64
    }

    /// All nodes of a level, flagged as new when absent from the previous one.
    fn nodes(&self, level: usize) -> Vec<(Node, bool)> {
        let k = self.k0 << level;
        let h = self.step(level);
        (-k..=k)
            .map(|i| (Node::at(i as f64 * h), level == 0 || i % 2 != 0))
            .filter(|(node, _)| node.x > 0.0 && node.xc > 0.0)
            .collect()
    }
}

/// Vector-valued integrand on [0,1]^d, given x and 1 − x per axis.
pub trait Integrand: Sync {
    fn dim(&self) -> usize;
    /// Number of components.
    fn width(&self) -> usize;
    /// Writes `e^{log_weight} · f(x)`; the weight is passed in log form so
    /// that integrands with huge values at far nodes can stay finite.
    fn eval(&self, x: &[f64], xc: &[f64], log_weight: f64, out: &mut [f64]);
}

struct ScalarFn<F> {
    dim: usize,
    f: F,
}

impl<F: Fn(&[f64], &[f64]) -> f64 + Sync> Integrand for ScalarFn<F> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn width(&self) -> usize {
        1
    }

    fn eval(&self, x: &[f64], xc: &[f64], log_weight: f64, out: &mut [f64]) {
        let w = log_weight.exp();
        out[0] = if w == 0.0 { 0.0 } else { w * (self.f)(x, xc) };
    }
}

struct LogFn<F> {
    dim: usize,
    log_f: F,
}

impl<F: Fn(&[f64], &[f64]) -> f64 + Sync> Integrand for LogFn<F> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn width(&self) -> usize {
        1
    }

    fn eval(&self, x: &[f64], xc: &[f64], log_weight: f64, out: &mut [f64]) {
        out[0] = ((self.log_f)(x, xc) + log_weight).exp();
    }
}

const CHUNK: usize = 4096;

/// Sums `weight · f` over `count` lazily generated points in fixed-size
/// chunks, so the result does not depend on the thread count. `point`
/// fills x and 1 − x and returns the log weight, or `None` to skip.
fn weighted_sum<I, P>(f: &I, count: usize, point: P) -> Vec<f64>
where
    I: Integrand + ?Sized,
    P: Fn(usize, &mut [f64], &mut [f64]) -> Option<f64> + Sync,
{
    let m = f.width();
    let dim = f.dim();
    let chunks = count.div_ceil(CHUNK);
    let partials: Vec<Vec<f64>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut acc = vec![0.0; m];
            let mut buf = vec![0.0; m];
            let mut x = vec![0.0; dim];
            let mut xc = vec![0.0; dim];
            for i in c * CHUNK..((c + 1) * CHUNK).min(count) {
                let Some(log_w) = point(i, &mut x, &mut xc) else { continue };
                f.eval(&x, &xc, log_w, &mut buf);
                for (a, b) in acc.iter_mut().zip(&buf) {
                    *a += b;
                }
            }
            acc
        })
        .collect();
    let mut total = vec![0.0; m];
    for p in partials {
        for (a, b) in total.iter_mut().zip(p) {
            *a += b;
        }
    }
    total
}

fn tanh_sinh<I: Integrand + ?Sized>(f: &I, spec: &QuadratureSpec) -> Result<Vec<Estimate>> {
    let dim = f.dim();
    let ladder = Ladder::new(spec.t_max);
    let m = f.width();
    let mut sums = vec![0.0; m];
    let mut values = vec![0.0; m];
    let mut errors = vec![f64::INFINITY; m];
    let mut evaluations = 0;
    for level in 0..=spec.max_level {
        let axis = ladder.nodes(level);
        let len = axis.len();
        let count = len.pow(dim as u32);
        // tensor points with at least one coordinate new to this level
        let fresh = weighted_sum(f, count, |mut i, x, xc| {
            let mut any_new = false;
            let mut w = 0.0;
            for k in 0..dim {
                let (node, new) = axis[i % len];
                i /= len;
                any_new |= new;
                x[k] = node.x;
                xc[k] = node.xc;
                w += node.log_dxdt;
            }
            any_new.then_some(w)
        });
        evaluations += count - axis.iter().filter(|n| !n.1).count().pow(dim as u32);
        for (s, new) in sums.iter_mut().zip(&fresh) {
            *s += new;
        }
        let h = ladder.step(level).powi(dim as i32);
        let new_values: Vec<f64> = sums.iter().map(|s| s * h).collect();
        if level > 0 {
            for i in 0..m {
                errors[i] = (new_values[i] - values[i]).abs();
            }
        }
        values = new_values;
        if level >= 2 && values.iter().zip(&errors).all(|(v, e)| spec.converged(*v, *e)) {
            return Ok(estimates(&values, &errors, level, evaluations));
        }
    }
    non_convergence(&values, &errors, spec)
}

fn estimates(values: &[f64], errors: &[f64], level: usize, evaluations: usize) -> Vec<Estimate> {
    values
        .iter()
        .zip(errors)
        .map(|(&value, &error)| Estimate {
            value,
            error,
            level,
            evaluations,
        })
        .collect()
}

fn non_convergence(values: &[f64], errors: &[f64], spec: &QuadratureSpec) -> Result<Vec<Estimate>> {
    let (i, _) = values
        .iter()
        .zip(errors)
        .enumerate()
        .map(|(i, (v, e))| (i, e / (spec.target_rel_tol * v.abs()).max(spec.abs_tol)))
        .fold((0, f64::NEG_INFINITY), |acc, x| if x.1 > acc.1 { x } else { acc });
    Err(Error::NonConvergence {
        level: spec.max_level,
        value: values[i],
        estimate: errors[i],
    })
}

/// Base number of points per replicate at level 0 of the stratified rule.
const QMC_BASE_LOG2: usize = 10;
const QMC_MAX_LOG2: usize = 16;

fn replicate_seed(seed: u64, replicate: usize) -> u32 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (replicate as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    rng.gen()
}

/// Smoothing map x = I_u(6, 6), the regularized incomplete Beta function,
/// returned with 1 − x and log dx/du, where dx/du = 2772 u⁵(1−u)⁵. The fifth-order zeros
/// of dx/du flatten the corner singularities of the integrands.
fn smoothstep(u: f64) -> (f64, f64, f64) {
    const BINOM: [f64; 6] = [462.0, 330.0, 165.0, 55.0, 11.0, 1.0];
    let v = 1.0 - u;
    let tail = |a: f64, b: f64| -> f64 {
        BINOM
            .iter()
            .enumerate()
            .map(|(k, c)| c * a.powi(6 + k as i32) * b.powi(5 - k as i32))
            .sum()
    };
    (tail(u, v), tail(v, u), 2772f64.ln() + 5.0 * (u * v).ln())
}

fn stratified<I: Integrand + ?Sized>(f: &I, spec: &QuadratureSpec) -> Result<Vec<Estimate>> {
    let dim = f.dim();
    let m = f.width();
    let mut previous: Option<Vec<f64>> = None;
    let mut values = vec![0.0; m];
    let mut errors = vec![f64::INFINITY; m];
    let mut evaluations = 0;
    for level in 0..=spec.max_level {
        let log2 = (QMC_BASE_LOG2 + level).min(QMC_MAX_LOG2);
        let replicates = spec.replicates.max(2) << (QMC_BASE_LOG2 + level).saturating_sub(QMC_MAX_LOG2);
        let count = 1usize << log2;
        let mut per_replicate = Vec::with_capacity(replicates);
        for r in 0..replicates {
            let seed = replicate_seed(spec.seed, r);
            let sums = weighted_sum(f, count, |i, x, xc| {
                let mut w = 0.0;
                for axis in 0..dim {
                    let u = sobol_burley::sample(i as u32, axis as u32, seed) as f64;
                    let (a, b, log_dxdu) = smoothstep(u);
                    x[axis] = a;
                    xc[axis] = b;
                    w += log_dxdu;
                }
                x.iter().chain(xc.iter()).all(|&v| v > 0.0).then_some(w)
            });
            per_replicate.push(sums.into_iter().map(|s| s / count as f64).collect::<Vec<f64>>());
            evaluations += count;
        }
        let r = per_replicate.len() as f64;
        for i in 0..m {
            let mean = per_replicate.iter().map(|v| v[i]).sum::<f64>() / r;
            let var = per_replicate.iter().map(|v| (v[i] - mean).powi(2)).sum::<f64>() / (r - 1.0);
            let stderr = (var / r).sqrt();
            let drift = previous.as_ref().map_or(0.0, |p| (p[i] - mean).abs());
            values[i] = mean;
            errors[i] = (3.0 * stderr).max(drift);
        }
        if previous.is_some() && values.iter().zip(&errors).all(|(v, e)| spec.converged(*v, *e)) {
            return Ok(estimates(&values, &errors, level, evaluations));
        }
        previous = Some(values.clone());
    }
    non_convergence(&values, &errors, spec)
}

/// Integrates a vector-valued integrand with the rule selected by `spec`.
pub fn integrate_vec<I: Integrand + ?Sized>(f: &I, spec: &QuadratureSpec) -> Result<Vec<Estimate>> {
    if f.dim() != spec.dim {
        return Err(Error::DimensionMismatch {
            left: f.dim(),
            right: spec.dim,
        });
    }
    match spec.rule {
        Rule::TanhSinh | Rule::TensorTanhSinh => tanh_sinh(f, spec),
        Rule::Stratified => stratified(f, spec),
    }
}

/// Integrates `f(x, 1 − x)` over [0,1]^dim.
pub fn integrate(
    dim: usize,
    f: impl Fn(&[f64], &[f64]) -> f64 + Sync,
    spec: &QuadratureSpec,
) -> Result<Estimate> {
    Ok(integrate_vec(&ScalarFn { dim, f }, spec)?[0])
}

/// Log norms of the surviving labels at the real chart point zᵢ = √tᵢ,
/// with tᵢ = xᵢ/(1 − xᵢ).
fn chart_logs(x: &[f64], xc: &[f64]) -> Vec<f64> {
    let log_t: Vec<f64> = x.iter().zip(xc).map(|(a, b)| a.ln() - b.ln()).collect();
    // log(1 + Σ t) by log-sum-exp
    let top = log_t.iter().copied().fold(0.0f64, f64::max);
    let s = (-top).exp() + log_t.iter().map(|l| (l - top).exp()).sum::<f64>();
    let log_norm = top + s.ln();
    std::iter::once(-log_norm)
        .chain(log_t.iter().map(|l| l - log_norm))
        .collect()
}

/// All reduced terms sharing one ambient component, as one vector integrand.
struct ReducedIntegrand<'a> {
    labels: Vec<usize>,
    terms: Vec<&'a ReducedTerm>,
}

impl ReducedIntegrand<'_> {
    fn local(&self, label: usize) -> usize {
        self.labels.iter().position(|&l| l == label).expect("label on ambient")
    }
}

impl Integrand for ReducedIntegrand<'_> {
    fn dim(&self) -> usize {
        self.labels.len() - 1
    }

    fn width(&self) -> usize {
        self.terms.len()
    }

    fn eval(&self, x: &[f64], xc: &[f64], log_weight: f64, out: &mut [f64]) {
        let d = self.dim();
        // the chart Jacobian Π 1/(1−x)² joins the weight in log form
        let w = (log_weight - 2.0 * xc.iter().map(|b| b.ln()).sum::<f64>()).exp();
        if w == 0.0 {
            out.fill(0.0);
            return;
        }
        let z: Vec<Complex64> = x
            .iter()
            .zip(xc)
            .map(|(a, b)| Complex64::new((a / b).sqrt(), 0.0))
            .collect();
        let u = chart_logs(x, xc);
        let fs = eval_form(FormField::FubiniStudy, &z).expect("smooth form");
        let mut powers: Vec<MultiVector> = vec![MultiVector::scalar(d, Complex64::new(1.0, 0.0))];
        for k in 1..=d {
            let next = powers[k - 1].wedge(&fs).expect("same dimension");
            powers.push(next);
        }
        for (slot, t) in out.iter_mut().zip(&self.terms) {
            let form = match t.mixed {
                None => powers[t.fs_power as usize].density(),
                Some((a, b)) => {
                    let (a, b) = (self.local(a), self.local(b));
                    let pair = if a == b { FormField::Elementary(a) } else { FormField::MixedLogPair(a, b) };
                    let mixed = eval_form(pair, &z).expect("point off the coordinate hyperplanes");
                    powers[t.fs_power as usize].wedge(&mixed).expect("same dimension").density()
                }
            };
            let scalar = t.scalar.eval(|l| u[self.local(l)]);
            *slot = w * PI.powi(d as i32) * scalar * form.re;
        }
    }
}

/// Value of a reduced term: exact on points and lines, numeric above.
#[derive(Clone, Debug, Serialize)]
pub struct TermValue {
    pub exact: Option<ZetaExpr>,
    pub value: f64,
    pub error: f64,
}

/// Exact value of a point- or line-supported term through Beta log integrals.
///
/// On a line with labels (s₀, s₁) the substitution x = t/(1+t) gives
/// u_{s₀} = log(1−x), u_{s₁} = log x and ω_FS = π dx, while the mixed pair
/// (i/2)∂u_{s₀}∧∂̄u_{s₁} equals −ω_FS.
pub fn exact_low_dimensional(t: &ReducedTerm) -> Result<Option<ZetaExpr>> {
    if let Some(v) = t.point_value() {
        return Ok(Some(v));
    }
    if t.dim() != 1 {
        return Ok(None);
    }
    let labels = t.labels();
    let sign = match t.mixed {
        None => 1,
        Some((a, b)) if a != b => -1,
        Some(_) => {
            return Err(Error::InvalidArgument(format!(
                "elementary form in {} is not integrable",
                t.source
            )))
        }
    };
    let mut total = ZetaExpr::from_integer(0);
    for (mono, c) in t.scalar.terms() {
        let (mut k, mut m) = (0, 0);
        for &(l, p) in mono {
            if l == labels[1] {
                k = p;
            } else if l == labels[0] {
                m = p;
            } else {
                return Err(Error::InvalidArgument(format!("u{l} diverges on the ambient of {}", t.source)));
            }
        }
        total += &beta_log_integral(0, 0, k, m)?.scale(c);
    }
    let value = &(&total * &ZetaExpr::pi()) * &t.constant_prefactor;
    Ok(Some(value.scale(&num_rational::BigRational::from_integer(sign.into()))))
}

/// Evaluates one reduced term, routing points and lines to the exact path.
pub fn eval_reduced_term(t: &ReducedTerm, spec: &QuadratureSpec) -> Result<TermValue> {
    Ok(eval_reduced_terms(std::slice::from_ref(t), spec)?.remove(0))
}

/// Evaluates many reduced terms, sharing quadrature points between terms on
/// the same ambient component. `spec` supplies the seed; each dimension uses
/// its own default rule.
pub fn eval_reduced_terms(terms: &[ReducedTerm], spec: &QuadratureSpec) -> Result<Vec<TermValue>> {
    let mut out: Vec<Option<TermValue>> = vec![None; terms.len()];
    let mut groups: std::collections::BTreeMap<Vec<usize>, Vec<usize>> = Default::default();
    for (i, t) in terms.iter().enumerate() {
        if t.dim() > 3 {
            return Err(Error::InvalidArgument(format!(
                "numeric evaluation supports ambient dimension <= 3, got {}",
                t.dim()
            )));
        }
        match exact_low_dimensional(t)? {
            Some(exact) => {
                out[i] = Some(TermValue {
                    value: exact.eval(),
                    exact: Some(exact),
                    error: 0.0,
                })
            }
            None => groups.entry(t.ambient.clone()).or_default().push(i),
        }
    }
    for (_, members) in groups {
        let first = &terms[members[0]];
        let integrand = ReducedIntegrand {
            labels: first.labels(),
            terms: members.iter().map(|&i| &terms[i]).collect(),
        };
        let dim_spec = if spec.dim == integrand.dim() { spec.clone() } else { spec.with_dim(integrand.dim()) };
        let estimates = integrate_vec(&integrand, &dim_spec).map_err(|e| Error::Term {
            term: first.source.clone(),
            source: Box::new(e),
        })?;
        for (&i, est) in members.iter().zip(estimates) {
            let c = terms[i].constant_prefactor.eval();
            out[i] = Some(TermValue {
                exact: None,
                value: c * est.value,
                error: c.abs() * est.error,
            });
        }
    }
    Ok(out.into_iter().map(|v| v.expect("every term evaluated")).collect())
}

/// Numeric 1-D evaluation of a line-supported term, bypassing the exact path.
pub fn eval_line_numeric(t: &ReducedTerm, spec: &QuadratureSpec) -> Result<f64> {
    if t.dim() != 1 {
        return Err(Error::InvalidArgument("line term expected".into()));
    }
    let integrand = ReducedIntegrand {
        labels: t.labels(),
        terms: vec![t],
    };
    let est = integrate_vec(&integrand, spec)?;
    Ok(t.constant_prefactor.eval() * est[0].value)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZetaSample {
    pub lambda: f64,
    pub value: f64,
    pub est_error: f64,
}

/// Z(λ) = πⁿ ∫_{ℝ₊ⁿ} (t₁⋯tₙ)^{λ−1} / (1+Σt)^{(n+1)λ} dt.
pub fn sample_zeta(n: usize, lambda: f64, spec: &QuadratureSpec) -> Result<ZetaSample> {
    if lambda <= 0.0 || !lambda.is_finite() {
        return Err(Error::InvalidArgument(format!("lambda must be positive, got {lambda}")));
    }
    if !(1..=3).contains(&n) {
        return Err(Error::InvalidArgument(format!("sampling supports 1 <= n <= 3, got {n}")));
    }
    let power = (n + 1) as f64 * lambda;
    let integrand = LogFn {
        dim: n,
        log_f: |x: &[f64], xc: &[f64]| {
            let mut log_f = 0.0;
            let mut log_t = [0.0; 3];
            for i in 0..x.len() {
                let (lx, lxc) = (x[i].ln(), xc[i].ln());
                log_t[i] = lx - lxc;
                log_f += (lambda - 1.0) * log_t[i] - 2.0 * lxc;
            }
            let top = log_t[..x.len()].iter().copied().fold(0.0f64, f64::max);
            let s = (-top).exp() + log_t[..x.len()].iter().map(|l| (l - top).exp()).sum::<f64>();
            log_f - power * (top + s.ln())
        },
    };
    let est = integrate_vec(&integrand, spec)?[0];
    let scale = PI.powi(n as i32);
    Ok(ZetaSample {
        lambda,
        value: scale * est.value,
        est_error: scale * est.error,
    })
}

/// The default λ grid {0.05, 0.10, …, 0.60}.
pub fn default_grid() -> Vec<f64> {
    (1..=12).map(|k| 0.05 * k as f64).collect()
}

/// Default fit degree: enough terms that the analytic tail beyond the
/// grid does not bias the constant term.
pub fn default_fit_degree(n: usize) -> usize {
    2 * n + 4
}

pub const DEFAULT_MAX_CONDITION: f64 = 1e12;

#[derive(Clone, Debug, Serialize)]
pub struct LaurentFit {
    pub series: LaurentSeries<f64>,
    /// Condition number of the column-scaled design matrix.
    pub condition: f64,
    pub residual_rms: f64,
}

/// Least-squares fit of λⁿZ(λ) by a polynomial of the given degree.
pub fn fit_laurent(samples: &[ZetaSample], n: usize, degree: usize, max_condition: f64) -> Result<LaurentFit> {
    let rows = samples.len();
    let cols = degree + 1;
    if rows < cols {
        return Err(Error::InvalidArgument(format!(
            "{rows} samples cannot determine {cols} coefficients"
        )));
    }
    for s in samples {
        if !(s.lambda > 0.0 && s.lambda <= 0.6 + 1e-12) {
            return Err(Error::InvalidArgument(format!("lambda {} outside (0, 0.6]", s.lambda)));
        }
    }
    let mut distinct: Vec<f64> = samples.iter().map(|s| s.lambda).collect();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    if distinct.len() < cols {
        return Err(Error::InvalidArgument("fit needs distinct lambda values".into()));
    }
    let mut a = DMatrix::<f64>::zeros(rows, cols);
    let mut b = DVector::<f64>::zeros(rows);
    for (i, s) in samples.iter().enumerate() {
        for j in 0..cols {
            a[(i, j)] = s.lambda.powi(j as i32);
        }
        b[i] = s.lambda.powi(n as i32) * s.value;
    }
    let scales: Vec<f64> = (0..cols).map(|j| a.column(j).norm()).collect();
    for (j, sc) in scales.iter().enumerate() {
        a.column_mut(j).scale_mut(1.0 / sc);
    }
    let svd = a.clone().svd(true, true);
    let sv = &svd.singular_values;
    let condition = sv.max() / sv.min();
    if condition.is_nan() || condition > max_condition {
        return Err(Error::IllConditioned {
            condition,
            limit: max_condition,
        });
    }
    let solution = svd
        .solve(&b, 0.0)
        .map_err(|e| Error::InvalidArgument(format!("least squares failed: {e}")))?;
    let residual = &a * &solution - &b;
    let coeffs: Vec<f64> = solution.iter().zip(&scales).map(|(c, s)| c / s).collect();
    let series = LaurentSeries::new(-(n as i32), coeffs)?;
    Ok(LaurentFit {
        series,
        condition,
        residual_rms: residual.norm() / (rows as f64).sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expansion::{generate_terms, reduce_term, symmetry_reduce};
    use statrs::function::gamma::gamma;

    #[test]
    fn one_dimensional_rule() {
        let spec = QuadratureSpec::for_dim(1);
        let e = integrate(1, |x, _| x[0] * x[0], &spec).unwrap();
        assert!((e.value - 1.0 / 3.0).abs() < 1e-14);
        let e = integrate(1, |x, _| x[0].ln() * x[0].ln(), &spec).unwrap();
        assert!((e.value - 2.0).abs() < 1e-12);
        assert!(e.error >= 0.0);
        let e = integrate(1, |x, xc| x[0].ln() * xc[0].ln(), &spec).unwrap();
        assert!((e.value - (2.0 - PI * PI / 6.0)).abs() < 1e-12);
    }

    #[test]
    fn two_dimensional_rule() {
        let spec = QuadratureSpec::for_dim(2);
        let e = integrate(2, |x, _| x[0].ln() * x[1], &spec).unwrap();
        assert!((e.value + 0.5).abs() < 1e-10);
    }

    #[test]
    fn stratified_rule_is_reproducible() {
        let spec = QuadratureSpec::for_dim(3);
        let f = |x: &[f64], _: &[f64]| x[0] * x[1] * x[2] + 1.0;
        let a = integrate(3, f, &spec).unwrap();
        let b = integrate(3, f, &spec).unwrap();
        assert_eq!(a, b);
        assert!((a.value - 1.125).abs() < 1e-4);
    }

    #[test]
    fn nonconvergence_is_reported() {
        let mut spec = QuadratureSpec::for_dim(1);
        spec.max_level = 3;
        spec.target_rel_tol = 1e-15;
        spec.abs_tol = 0.0;
        let r = integrate(1, |x, _| (1.0 / x[0]).sin().abs() / x[0].sqrt(), &spec);
        assert!(matches!(r, Err(Error::NonConvergence { level: 3, .. })));
        assert!(integrate(2, |_, _| 1.0, &spec).is_err());
    }

    #[test]
    fn gaussian_factorization() {
        // (i/2)∫_ℂ |Z|^{2(λ−1)} e^{−|Z|²} dZ∧dZ̄ = π ∫₀^∞ t^{λ−1} e^{−t} dt = πΓ(λ)
        let spec = QuadratureSpec::for_zeta(1);
        for lambda in [0.5, 1.0, 2.0] {
            let e = integrate(
                1,
                |x, xc| {
                    let t = x[0] / xc[0];
                    ((lambda - 1.0) * t.ln() - t - 2.0 * xc[0].ln()).exp()
                },
                &spec,
            )
            .unwrap();
            let expected = PI * gamma(lambda);
            assert!((PI * e.value - expected).abs() < 1e-8 * expected);
        }
    }

    #[test]
    fn zeta_samples_match_gamma_ratio() {
        for n in 1..=2 {
            let spec = QuadratureSpec::for_zeta(n);
            for lambda in [0.5, 1.0, 1.5] {
                let s = sample_zeta(n, lambda, &spec).unwrap();
                let exact = PI.powi(n as i32) * gamma(lambda).powi(n as i32 + 1) / gamma((n + 1) as f64 * lambda);
                assert!((s.value - exact).abs() < 1e-6 * exact, "n={n} lambda={lambda}");
            }
        }
        let s = sample_zeta(1, 1.0, &QuadratureSpec::for_zeta(1)).unwrap();
        assert!((s.value - PI).abs() < 1e-12);
        let s = sample_zeta(2, 0.5, &QuadratureSpec::for_zeta(2)).unwrap();
        assert!((s.value - 2.0 * PI.powi(3)).abs() < 1e-8 * s.value);
        assert!(sample_zeta(1, 0.0, &QuadratureSpec::for_zeta(1)).is_err());
    }

    #[test]
    fn fit_recovers_synthetic_polynomials() {
        let coeffs = [2.0, -0.5, 0.25, 1.5, -0.75, 0.1];
        let samples: Vec<ZetaSample> = default_grid()
            .into_iter()
            .map(|l| {
                let poly: f64 = coeffs.iter().enumerate().map(|(k, c)| c * l.powi(k as i32)).sum();
                ZetaSample {
                    lambda: l,
                    value: poly / l.powi(2),
                    est_error: 0.0,
                }
            })
            .collect();
        let fit = fit_laurent(&samples, 2, 5, DEFAULT_MAX_CONDITION).unwrap();
        for (k, c) in coeffs.iter().enumerate() {
            assert!((fit.series.coeff(k as i32 - 2).unwrap() - c).abs() < 1e-8);
        }
        assert!(fit.condition > 1.0);
        assert!(matches!(
            fit_laurent(&samples, 2, 11, 10.0),
            Err(Error::IllConditioned { .. })
        ));
        assert!(fit_laurent(&samples[..3], 2, 5, DEFAULT_MAX_CONDITION).is_err());
    }

    #[test]
    fn fit_of_closed_form_series_data() {
        // n = 1: λZ(λ)/π = 2 − 2ζ(2)λ² + …, sampled from the exact Γ ratio.
        let samples: Vec<ZetaSample> = default_grid()
            .into_iter()
            .map(|l| ZetaSample {
                lambda: l,
                value: PI * gamma(l).powi(2) / gamma(2.0 * l),
                est_error: 0.0,
            })
            .collect();
        let fit = fit_laurent(&samples, 1, default_fit_degree(1), DEFAULT_MAX_CONDITION).unwrap();
        assert!((fit.series.coeff(-1).unwrap() - 2.0 * PI).abs() < 1e-4 * 2.0 * PI);
    }

    #[test]
    fn fubini_study_volumes() {
        use crate::expansion::LogPoly;
        use num_rational::BigRational;
        use num_traits::One;
        for d in 1..=2usize {
            let t = ReducedTerm {
                n: d,
                ambient: vec![],
                scalar: LogPoly::constant(BigRational::one()),
                fs_power: d as u32,
                mixed: None,
                constant_prefactor: ZetaExpr::from_integer(1),
                source: "volume".into(),
            };
            let expected = PI.powi(d as i32);
            let numeric = if d == 1 {
                eval_line_numeric(&t, &QuadratureSpec::for_dim(1)).unwrap()
            } else {
                eval_reduced_term(&t, &QuadratureSpec::for_dim(2)).unwrap().value
            };
            assert!((numeric - expected).abs() < 1e-9 * expected, "d={d}: {numeric}");
            assert_eq!(t.exact_value().unwrap(), ZetaExpr::pi_pow(d as u32));
        }
    }

    #[test]
    fn line_terms_agree_with_numeric_path() {
        let spec = QuadratureSpec::for_dim(1);
        for n in 1..=3 {
            for class in symmetry_reduce(&generate_terms(n).unwrap()) {
                for r in reduce_term(&class).unwrap().into_iter().filter(|r| r.dim() == 1) {
                    let exact = exact_low_dimensional(&r).unwrap().unwrap();
                    assert_eq!(exact, r.exact_value().unwrap());
                    let numeric = eval_line_numeric(&r, &spec).unwrap();
                    let e = exact.eval();
                    assert!((numeric - e).abs() <= 1e-8 * e.abs().max(1.0), "{r}: {numeric} vs {e}");
                }
            }
        }
    }

    #[test]
    fn plane_terms_agree_with_exact_values() {
        let spec = QuadratureSpec::for_dim(2);
        let classes = symmetry_reduce(&generate_terms(2).unwrap());
        let reduced: Vec<ReducedTerm> = classes.iter().flat_map(|c| reduce_term(c).unwrap()).collect();
        let values = eval_reduced_terms(&reduced, &spec).unwrap();
        for (r, v) in reduced.iter().zip(&values) {
            let e = r.exact_value().unwrap().eval();
            assert!((v.value - e).abs() <= 1e-7 * e.abs().max(1.0), "{r}: {} vs {e}", v.value);
        }
    }
}
