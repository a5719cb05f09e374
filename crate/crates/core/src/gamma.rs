//! Exact expansions of Γ at 0 and at positive integers, the Γ-ratio closed
//! form for the finite part on ℙⁿ, and Beta-derivative log integrals.

use std::collections::HashMap;
use std::sync::{OnceLock, RwLock};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::laurent::LaurentSeries;
use crate::zring::ZetaExpr;

/// Expansion of Γ(λ) at λ → 0 (`anchor == 0`) or of Γ(N + s) in s.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GammaExpansion {
    pub anchor: u32,
    pub series: LaurentSeries<ZetaExpr>,
}

fn ratio(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

fn factorial(n: u32) -> BigInt {
    (2..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

/// Σ_{j=1}^{n} j^{-k}.
fn harmonic(n: u32, k: u32) -> BigRational {
    (1..=n).fold(BigRational::zero(), |acc, j| {
        acc + BigRational::new(BigInt::one(), BigInt::from(j).pow(k))
    })
}

/// log Γ(N + s) − log (N−1)! as a power series in s (no constant term).
fn log_gamma_shifted(anchor: u32, trunc: i32) -> LaurentSeries<ZetaExpr> {
    let base = anchor.max(1) - 1;
    let mut terms = Vec::new();
    if trunc >= 1 {
        let c1 = &ZetaExpr::from_rational(harmonic(base, 1)) - &ZetaExpr::gamma();
        terms.push((1, c1));
    }
    for k in 2..=trunc.max(1) as u32 {
        let sign = if k % 2 == 0 { 1 } else { -1 };
        let c = &ZetaExpr::zeta(k) - &ZetaExpr::from_rational(harmonic(base, k));
        terms.push((k as i32, c.scale(&ratio(sign, k as i64))));
    }
    LaurentSeries::from_terms(&terms, trunc.max(0)).expect("nonempty window")
}

type Memo = RwLock<HashMap<(u32, i32, bool), LaurentSeries<ZetaExpr>>>;

fn memo() -> &'static Memo {
    static MEMO: OnceLock<Memo> = OnceLock::new();
    MEMO.get_or_init(Default::default)
}

fn memoized(
    key: (u32, i32, bool),
    build: impl FnOnce() -> LaurentSeries<ZetaExpr>,
) -> LaurentSeries<ZetaExpr> {
    if let Some(s) = memo().read().expect("gamma memo poisoned").get(&key) {
        return s.clone();
    }
    let s = build();
    memo()
        .write()
        .expect("gamma memo poisoned")
        .entry(key)
        .or_insert(s)
        .clone()
}

/// Γ(λ) near 0 (valid on [−1, trunc]) or Γ(N + s) (valid on [0, trunc]).
pub fn gamma_series(anchor: u32, trunc: i32) -> Result<GammaExpansion> {
    let min_trunc = if anchor == 0 { -1 } else { 0 };
    if trunc < min_trunc {
        return Err(Error::InvalidArgument(format!(
            "truncation {trunc} below {min_trunc} for anchor {anchor}"
        )));
    }
    let series = memoized((anchor, trunc, false), || {
        if anchor == 0 {
            let e = log_gamma_shifted(1, trunc + 1).exp().expect("log series has no constant term");
            e.shift_pow(-1)
        } else {
            let e = log_gamma_shifted(anchor, trunc).exp().expect("log series has no constant term");
            e.scale(&ZetaExpr::from_rational(BigRational::from_integer(factorial(anchor - 1))))
        }
    });
    Ok(GammaExpansion { anchor, series })
}

/// 1/Γ(λ) near 0 (valid on [1, trunc]) or 1/Γ(N + s) (valid on [0, trunc]).
pub fn reciprocal_gamma_series(anchor: u32, trunc: i32) -> Result<LaurentSeries<ZetaExpr>> {
    let min_trunc = if anchor == 0 { 1 } else { 0 };
    if trunc < min_trunc {
        return Err(Error::InvalidArgument(format!(
            "truncation {trunc} below {min_trunc} for anchor {anchor}"
        )));
    }
    Ok(memoized((anchor, trunc, true), || {
        if anchor == 0 {
            let e = log_gamma_shifted(1, trunc - 1).neg().exp().expect("no constant term");
            e.shift_pow(1)
        } else {
            let e = log_gamma_shifted(anchor, trunc).neg().exp().expect("no constant term");
            let inv = BigRational::new(BigInt::one(), factorial(anchor - 1));
            e.scale(&ZetaExpr::from_rational(inv))
        }
    }))
}

/// The holomorphic series F(λ) = λⁿΓ(λ)^{n+1}/Γ((n+1)λ) and the finite part
/// πⁿ·[λⁿ]F.
#[derive(Clone, Debug, Serialize)]
pub struct ClosedForm {
    pub n: u32,
    pub series: LaurentSeries<ZetaExpr>,
    pub fp: ZetaExpr,
    /// Constant term of F, i.e. n + 1.
    pub leading: ZetaExpr,
    /// Largest γ power met in the Γ(λ)^{n+1} factor before cancellation.
    pub intermediate_gamma_degree: u32,
}

pub const MAX_CLOSED_FORM_N: u32 = 12;

pub fn closed_form_fp(n: u32, trunc: i32) -> Result<ClosedForm> {
    if !(1..=MAX_CLOSED_FORM_N).contains(&n) {
        return Err(Error::InvalidArgument(format!(
            "closed form supports 1 <= n <= {MAX_CLOSED_FORM_N}, got {n}"
        )));
    }
    if trunc < n as i32 {
        return Err(Error::InvalidArgument(format!(
            "truncation {trunc} cannot reach the order-{n} coefficient"
        )));
    }
    let m = (n + 1) as i64;
    let log_gamma = log_gamma_shifted(1, trunc);

    // λ^{n+1}Γ(λ)^{n+1} = exp((n+1)·log Γ(1+λ))
    let powered = log_gamma.scale(&ZetaExpr::from_integer(m)).exp()?;
    let intermediate_gamma_degree = powered
        .coeffs()
        .iter()
        .filter_map(|c| c.gamma_degree().ok())
        .max()
        .unwrap_or(0);

    // 1/Γ(mλ) = mλ·exp(−log Γ(1+mλ))
    let reciprocal = log_gamma
        .neg()
        .exp()?
        .scale_var_int(m)
        .scale(&ZetaExpr::from_integer(m))
        .shift_pow(1);

    let series = powered.shift_pow(-1).mul(&reciprocal)?.truncate(trunc)?;
    let fp = &ZetaExpr::pi_pow(n) * &series.coeff(n as i32)?;
    let leading = series.coeff(0)?;
    Ok(ClosedForm {
        n,
        series,
        fp,
        leading,
        intermediate_gamma_degree,
    })
}

/// Default series truncation for problems on ℙⁿ.
pub fn default_trunc(n: u32) -> i32 {
    n as i32 + 6
}

/// ∫₀¹ x^a (1−x)^b log^k(x) log^m(1−x) dx, exactly.
pub fn beta_log_integral(a: u32, b: u32, k: u32, m: u32) -> Result<ZetaExpr> {
    let total = (k + m) as i32;
    let ga = gamma_series(a + 1, k as i32)?.series;
    let gb = gamma_series(b + 1, m as i32)?.series;
    let rc = reciprocal_gamma_series(a + b + 2, total)?;
    let mut acc = ZetaExpr::zero();
    for i in 0..=k {
        let ai = ga.coeff(i as i32)?;
        if ai.is_zero() {
            continue;
        }
        for j in 0..=m {
            let bj = gb.coeff(j as i32)?;
            let (p, q) = (k - i, m - j);
            let c = rc.coeff((p + q) as i32)?;
            let binom = BigRational::from_integer(binomial(p + q, p));
            acc += &(&(&ai * &bj) * &c).scale(&binom);
        }
    }
    Ok(acc.scale(&BigRational::from_integer(factorial(k) * factorial(m))))
}

/// ∫ over the standard d-simplex of ∏ᵢ logᵏⁱ(pᵢ), with p₀ = 1 − p₁ − ⋯ − p_d and
/// Lebesgue measure dp₁⋯dp_d. The slice holds k₀, …, k_d.
pub fn dirichlet_log_integral(k: &[u32]) -> Result<ZetaExpr> {
    if k.is_empty() {
        return Err(Error::InvalidArgument("need at least one coordinate".into()));
    }
    let d = k.len() as u32 - 1;
    let kmax = *k.iter().max().expect("nonempty") as i32;
    let total: u32 = k.iter().sum();
    let g = gamma_series(1, kmax)?.series;
    let rc = reciprocal_gamma_series(d + 1, total as i32)?;
    let mut acc = ZetaExpr::zero();
    let mut split = vec![0u32; k.len()];
    loop {
        let rest: Vec<u32> = k.iter().zip(&split).map(|(a, b)| a - b).collect();
        let j: u32 = rest.iter().sum();
        let mut term = rc.coeff(j as i32)?;
        for &i in &split {
            term = &term * &g.coeff(i as i32)?;
        }
        let multinomial = rest.iter().fold(factorial(j), |acc, &r| acc / factorial(r));
        acc += &term.scale(&BigRational::from_integer(multinomial));
        // odometer over 0 ≤ splitᵣ ≤ kᵣ
        let mut pos = 0;
        while pos < k.len() && split[pos] == k[pos] {
            split[pos] = 0;
            pos += 1;
        }
        if pos == k.len() {
            break;
        }
        split[pos] += 1;
    }
    let scale = k.iter().fold(BigInt::one(), |acc, &r| acc * factorial(r));
    Ok(acc.scale(&BigRational::from_integer(scale)))
}

fn binomial(n: u32, k: u32) -> BigInt {
    factorial(n) / (factorial(k) * factorial(n - k))
}
