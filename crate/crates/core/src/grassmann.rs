//! Pointwise exterior algebra on ℂⁿ and the Fubini–Study form catalog.
//!
//! Generators are interleaved: bit `2(j−1)` is dz_j and bit `2(j−1)+1` is
//! dz̄_j, so that `dz₁∧dz̄₁∧dz₂∧dz̄₂∧…` is the positively ordered top word.
//!
//! Forms live on the affine chart {Z₀ ≠ 0} of ℙⁿ with coordinates
//! zⱼ = Zⱼ/Z₀. Homogeneous labels run over 0..=n, and
//! `uⱼ = log‖Zⱼ‖² = log(|Zⱼ|²/|Z|²)` with Z₀ = 1.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const I_HALF: Complex64 = Complex64::new(0.0, 0.5);

#[derive(Clone, Debug, PartialEq)]
pub struct MultiVector {
    n: usize,
    components: BTreeMap<u32, Complex64>,
}

/// Sign of moving word `b` past word `a` into canonical order, or `None`
/// when the words share a generator.
pub fn shuffle_sign(a: u32, b: u32) -> Option<f64> {
    if a & b != 0 {
        return None;
    }
    let mut inversions = 0;
    let mut rest = b;
    while rest != 0 {
        let bit = rest.trailing_zeros();
        inversions += (a >> bit).count_ones();
        rest &= rest - 1;
    }
    Some(if inversions % 2 == 0 { 1.0 } else { -1.0 })
}

impl MultiVector {
    pub fn zero(n: usize) -> Self {
        assert!(n <= 15, "dimension {n} exceeds the 32-generator word size");
        Self {
            n,
            components: BTreeMap::new(),
        }
    }

    pub fn scalar(n: usize, c: Complex64) -> Self {
        Self::word(n, 0, c)
    }

    /// `c` times the basis word with generator mask `mask`.
    pub fn word(n: usize, mask: u32, c: Complex64) -> Self {
        let mut v = Self::zero(n);
        assert!(mask < 1 << (2 * n), "word {mask:#b} outside dimension {n}");
        if c != Complex64::new(0.0, 0.0) {
            v.components.insert(mask, c);
        }
        v
    }

    /// dz_j, 1-based.
    pub fn dz(n: usize, j: usize) -> Self {
        Self::word(n, 1 << (2 * (j - 1)), Complex64::new(1.0, 0.0))
    }

    /// dz̄_j, 1-based.
    pub fn dzbar(n: usize, j: usize) -> Self {
        Self::word(n, 1 << (2 * (j - 1) + 1), Complex64::new(1.0, 0.0))
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn components(&self) -> impl Iterator<Item = (u32, Complex64)> + '_ {
        self.components.iter().map(|(&m, &c)| (m, c))
    }

    pub fn get(&self, mask: u32) -> Complex64 {
        self.components.get(&mask).copied().unwrap_or_default()
    }

    pub fn top_mask(&self) -> u32 {
        (1u32 << (2 * self.n)) - 1
    }

    pub fn top_coefficient(&self) -> Complex64 {
        self.get(self.top_mask())
    }

    /// Top coefficient relative to the volume element (i/2)ⁿ dz₁∧dz̄₁∧⋯.
    pub fn density(&self) -> Complex64 {
        self.top_coefficient() / I_HALF.powi(self.n as i32)
    }

    fn accumulate(&mut self, mask: u32, c: Complex64) {
        let slot = self.components.entry(mask).or_default();
        *slot += c;
        if *slot == Complex64::new(0.0, 0.0) {
            self.components.remove(&mask);
        }
    }

    fn check_dim(&self, other: &Self) -> Result<()> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch {
                left: self.n,
                right: other.n,
            });
        }
        Ok(())
    }

    pub fn wedge(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        let mut out = Self::zero(self.n);
        for (&a, &ca) in &self.components {
            for (&b, &cb) in &other.components {
                if let Some(sign) = shuffle_sign(a, b) {
                    out.accumulate(a | b, ca * cb * sign);
                }
            }
        }
        Ok(out)
    }

    /// k-fold wedge power; the 0-th power is 1.
    pub fn wedge_pow(&self, k: usize) -> Self {
        let mut out = Self::scalar(self.n, Complex64::new(1.0, 0.0));
        for _ in 0..k {
            out = out.wedge(self).expect("same dimension");
        }
        out
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        let mut out = self.clone();
        for (&m, &c) in &other.components {
            out.accumulate(m, c);
        }
        Ok(out)
    }

    pub fn scale(&self, c: Complex64) -> Self {
        let mut out = Self::zero(self.n);
        for (&m, &v) in &self.components {
            out.accumulate(m, v * c);
        }
        out
    }

    /// Degree of each stored word; `None` when the element is zero or mixed.
    pub fn degree(&self) -> Option<u32> {
        let mut degrees = self.components.keys().map(|m| m.count_ones());
        let first = degrees.next()?;
        degrees.all(|d| d == first).then_some(first)
    }

    /// Largest coefficient modulus.
    pub fn max_abs(&self) -> f64 {
        self.components.values().map(|c| c.norm()).fold(0.0, f64::max)
    }
}

/// The closed catalog of forms on the chart {Z₀ ≠ 0} of ℙⁿ.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "index")]
pub enum FormField {
    /// ω_FS = (i/2)∂∂̄ log(1+|z|²).
    FubiniStudy,
    /// The scalar uⱼ = log‖Zⱼ‖².
    LogNormSq(usize),
    /// ∂uⱼ.
    DLogNormSq(usize),
    /// ∂̄uⱼ.
    DbarLogNormSq(usize),
    /// ωⱼ = (i/2)∂uⱼ∧∂̄uⱼ.
    Elementary(usize),
    /// (i/2)∂u_a∧∂̄u_b.
    MixedLogPair(usize, usize),
    /// (i/2)ⁿ dz∧dz̄ / |z₁⋯zₙ|².
    Volume,
}

impl fmt::Display for FormField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FormField::FubiniStudy => write!(f, "omega_fs"),
            FormField::LogNormSq(j) => write!(f, "u{j}"),
            FormField::DLogNormSq(j) => write!(f, "du{j}"),
            FormField::DbarLogNormSq(j) => write!(f, "dbar_u{j}"),
            FormField::Elementary(j) => write!(f, "omega{j}"),
            FormField::MixedLogPair(a, b) => write!(f, "(i/2)du{a}^dbar_u{b}"),
            FormField::Volume => write!(f, "volume"),
        }
    }
}

impl FormField {
    /// Form degree (total, holomorphic plus antiholomorphic).
    pub fn degree(&self, n: usize) -> usize {
        match self {
            FormField::LogNormSq(_) => 0,
            FormField::DLogNormSq(_) | FormField::DbarLogNormSq(_) => 1,
            FormField::FubiniStudy | FormField::Elementary(_) | FormField::MixedLogPair(..) => 2,
            FormField::Volume => 2 * n,
        }
    }

    fn labels(&self) -> Vec<usize> {
        match *self {
            FormField::LogNormSq(j)
            | FormField::DLogNormSq(j)
            | FormField::DbarLogNormSq(j)
            | FormField::Elementary(j) => vec![j],
            FormField::MixedLogPair(a, b) => vec![a, b],
            FormField::FubiniStudy | FormField::Volume => vec![],
        }
    }
}

fn norm_sq(z: &[Complex64]) -> f64 {
    1.0 + z.iter().map(|c| c.norm_sqr()).sum::<f64>()
}

/// uⱼ at z.
pub fn log_norm_sq(j: usize, z: &[Complex64]) -> Result<f64> {
    check_label(j, z.len())?;
    let denom = norm_sq(z).ln();
    if j == 0 {
        return Ok(-denom);
    }
    let zj = z[j - 1].norm_sqr();
    if zj == 0.0 {
        return Err(Error::SingularPoint {
            form: FormField::LogNormSq(j).to_string(),
        });
    }
    Ok(zj.ln() - denom)
}

/// Coefficients ∂uⱼ/∂z_k for k = 1..=n.
fn grad_log_norm_sq(j: usize, z: &[Complex64]) -> Result<Vec<Complex64>> {
    check_label(j, z.len())?;
    let s = norm_sq(z);
    let mut g: Vec<Complex64> = z.iter().map(|c| -c.conj() / s).collect();
    if j > 0 {
        let zj = z[j - 1];
        if zj.norm_sqr() == 0.0 {
            return Err(Error::SingularPoint {
                form: FormField::DLogNormSq(j).to_string(),
            });
        }
        g[j - 1] += zj.inv();
    }
    Ok(g)
}

fn check_label(j: usize, n: usize) -> Result<()> {
    if j > n {
        return Err(Error::InvalidArgument(format!(
            "label {j} outside 0..={n}"
        )));
    }
    Ok(())
}

fn one_form(n: usize, coeffs: &[Complex64], anti: bool) -> MultiVector {
    let mut v = MultiVector::zero(n);
    for (k, &c) in coeffs.iter().enumerate() {
        let bit = 2 * k + usize::from(anti);
        v.accumulate(1 << bit, c);
    }
    v
}

/// Fubini–Study Hermitian matrix h_{jk} = ∂_j∂̄_k log(1+|z|²).
pub fn fubini_study_matrix(z: &[Complex64]) -> Vec<Vec<Complex64>> {
    let s = norm_sq(z);
    let n = z.len();
    (0..n)
        .map(|j| {
            (0..n)
                .map(|k| {
                    let delta = if j == k { 1.0 / s } else { 0.0 };
                    Complex64::new(delta, 0.0) - z[j].conj() * z[k] / (s * s)
                })
                .collect()
        })
        .collect()
}

fn two_form_from_matrix(h: &[Vec<Complex64>]) -> MultiVector {
    let n = h.len();
    let mut v = MultiVector::zero(n);
    for (j, row) in h.iter().enumerate() {
        for (k, &c) in row.iter().enumerate() {
            let dz = 1u32 << (2 * j);
            let dzb = 1u32 << (2 * k + 1);
            let sign = shuffle_sign(dz, dzb).expect("distinct generators");
            v.accumulate(dz | dzb, I_HALF * c * sign);
        }
    }
    v
}

/// Evaluates a catalog form at a chart point z ∈ ℂⁿ.
pub fn eval_form(f: FormField, z: &[Complex64]) -> Result<MultiVector> {
    let n = z.len();
    for j in f.labels() {
        check_label(j, n)?;
    }
    Ok(match f {
        FormField::FubiniStudy => two_form_from_matrix(&fubini_study_matrix(z)),
        FormField::LogNormSq(j) => MultiVector::scalar(n, Complex64::new(log_norm_sq(j, z)?, 0.0)),
        FormField::DLogNormSq(j) => one_form(n, &grad_log_norm_sq(j, z)?, false),
        FormField::DbarLogNormSq(j) => {
            let g: Vec<Complex64> = grad_log_norm_sq(j, z)?.iter().map(|c| c.conj()).collect();
            one_form(n, &g, true)
        }
        FormField::Elementary(j) => mixed_pair(j, j, z)?,
        FormField::MixedLogPair(a, b) => mixed_pair(a, b, z)?,
        FormField::Volume => {
            let prod: f64 = z.iter().map(|c| c.norm_sqr()).product();
            if prod == 0.0 {
                return Err(Error::SingularPoint {
                    form: FormField::Volume.to_string(),
                });
            }
            MultiVector::word(n, (1u32 << (2 * n)) - 1, I_HALF.powi(n as i32) / prod)
        }
    })
}

fn mixed_pair(a: usize, b: usize, z: &[Complex64]) -> Result<MultiVector> {
    let ga = grad_log_norm_sq(a, z)?;
    let gb = grad_log_norm_sq(b, z)?;
    // ∂u_a∧∂̄u_b = Σ_{jk} ∂_j u_a · conj(∂_k u_b) dz_j∧dz̄_k
    let h: Vec<Vec<Complex64>> = ga
        .iter()
        .map(|&x| gb.iter().map(|&y| x * y.conj()).collect())
        .collect();
    Ok(two_form_from_matrix(&h))
}

/// Random chart points with every |zⱼ| in the annulus [0.2, 5].
pub fn sample_points(n: usize, count: usize, seed: u64) -> Vec<Vec<Complex64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            (0..n)
                .map(|_| {
                    let r = rng.gen_range(0.2..=5.0);
                    let theta = rng.gen_range(0.0..std::f64::consts::TAU);
                    Complex64::from_polar(r, theta)
                })
                .collect()
        })
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct ConjectureReport {
    pub n: usize,
    pub points: usize,
    pub seed: u64,
    pub tol: f64,
    pub max_rel_deviation: f64,
    pub worst_point: Option<usize>,
    pub pass: bool,
}

/// Both sides of the pointwise identity
/// `(i/2)ⁿdz∧dz̄/|z₁⋯zₙ|² = Σ_ℓ (ℓ+1)/(n−ℓ)! · ω_FS^ℓ ∧ (Σ_k ω_k)^{n−ℓ}` as densities.
pub fn conjecture_sides(z: &[Complex64]) -> Result<(Complex64, Complex64)> {
    let n = z.len();
    let lhs = eval_form(FormField::Volume, z)?.density();
    let fs = eval_form(FormField::FubiniStudy, z)?;
    let mut sum_elem = MultiVector::zero(n);
    for k in 0..=n {
        sum_elem = sum_elem.add(&eval_form(FormField::Elementary(k), z)?)?;
    }
    let mut rhs = MultiVector::zero(n);
    let mut fact = 1.0;
    for l in (0..=n).rev() {
        // fact = (n−ℓ)!
        let term = fs.wedge_pow(l).wedge(&sum_elem.wedge_pow(n - l))?;
        rhs = rhs.add(&term.scale(Complex64::new((l + 1) as f64 / fact, 0.0)))?;
        fact *= (n - l + 1) as f64;
    }
    Ok((lhs, rhs.density()))
}

pub fn check_conjecture(n: usize, points: &[Vec<Complex64>], seed: u64, tol: f64) -> ConjectureReport {
    let deviations: Vec<f64> = points
        .par_iter()
        .map(|z| match conjecture_sides(z) {
            Ok((l, r)) => (l - r).norm() / l.norm(),
            Err(_) => f64::INFINITY,
        })
        .collect();
    let (worst_point, max_rel_deviation) = deviations
        .iter()
        .copied()
        .enumerate()
        .fold((None, 0.0), |(wi, wv), (i, v)| {
            if v > wv || v.is_nan() {
                (Some(i), v)
            } else {
                (wi, wv)
            }
        });
    ConjectureReport {
        n,
        points: points.len(),
        seed,
        tol,
        max_rel_deviation,
        worst_point,
        pass: max_rel_deviation <= tol && points.iter().all(|p| p.len() == n),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PoincareReport {
    pub label: usize,
    pub max_abs_deviation: f64,
    pub rel_deviation: f64,
    pub pass: bool,
}

/// Checks (i/2)∂∂̄uⱼ = −ω_FS at a point off {Zⱼ = 0}.
///
/// The Hessian is assembled from the gradient formula: differentiating
/// ∂̄_k uⱼ = δ_{jk}/z̄ⱼ − z_k/(1+|z|²) in z_a kills the antiholomorphic pole
/// part and leaves the derivative of the quotient.
pub fn check_poincare_lelong_smooth(j: usize, z: &[Complex64]) -> Result<PoincareReport> {
    let n = z.len();
    check_label(j, n)?;
    if j > 0 && z[j - 1].norm_sqr() == 0.0 {
        return Err(Error::SingularPoint {
            form: FormField::LogNormSq(j).to_string(),
        });
    }
    let s = norm_sq(z);
    let hessian: Vec<Vec<Complex64>> = (0..n)
        .map(|a| {
            (0..n)
                .map(|k| {
                    // ∂_a (z_k / s) = δ_ak/s − z_k·z̄_a/s²
                    let d = if a == k { 1.0 / s } else { 0.0 };
                    -(Complex64::new(d, 0.0) - z[k] * z[a].conj() / (s * s))
                })
                .collect()
        })
        .collect();
    let lhs = two_form_from_matrix(&hessian);
    let fs = eval_form(FormField::FubiniStudy, z)?;
    let diff = lhs.add(&fs)?;
    let max_abs_deviation = diff.max_abs();
    let rel_deviation = max_abs_deviation / fs.max_abs();
    Ok(PoincareReport {
        label: j,
        max_abs_deviation,
        rel_deviation,
        pass: rel_deviation <= 1e-10,
    })
}
