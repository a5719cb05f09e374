//! Exact arithmetic in the constant ring ℚ[γ, π, ζ(2), ζ(3), …].
//!
//! Elements are sparse maps from [`ZetaMonomial`] to arbitrary-precision
//! rationals. Monomials are products `γ^g π^p ζ(a₁)⋯ζ(a_r)` of single zeta
//! values; multiple zeta values are not represented. Adding them would mean
//! widening `zeta_args` from a multiset of integers to a multiset of index
//! tuples and teaching [`ZetaMonomial::canonical`] their shuffle relations.
//!
//! Even zeta values are all rational multiples of powers of π, so any product
//! `ζ(2a)ζ(2b)` is a rational multiple of `ζ(2a+2b)`. The canonical form keeps
//! at most one even argument per monomial (for example `ζ(2)² = 5/2 ζ(4)`),
//! which makes equal constants compare equal while keeping `ζ(2)` and `π²`
//! as separate symbols.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};
use std::str::FromStr;
use std::sync::RwLock;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_860_606_512_090_082;

/// ζ(k) for k = 2..=32, 30 significant digits.
#[allow(clippy::excessive_precision)]
const ZETA_TABLE: [f64; 31] = [
    1.644934066848226436472415166646,
    1.202056903159594285399738161511,
    1.082323233711138191516003696541,
    1.036927755143369926331365486457,
    1.017343061984449139714517929791,
    1.008349277381922826839797549850,
    1.004077356197944339378685238509,
    1.002008392826082214417852769232,
    1.000994575127818085337145958900,
    1.000494188604119464558702282526,
    1.000246086553308048298637998048,
    1.000122713347578489146751836526,
    1.000061248135058704829258545105,
    1.000030588236307020493551728511,
    1.000015282259408651871732571488,
    1.000007637197637899762273600294,
    1.000003817293264999839856461645,
    1.000001908212716553938925656958,
    1.000000953962033872796113152039,
    1.000000476932986787806463116720,
    1.000000238450502727732990003648,
    1.000000119219925965311073067789,
    1.000000059608189051259479612440,
    1.000000029803503514652280186064,
    1.000000014901554828365041234659,
    1.000000007450711789835429491981,
    1.000000003725334024788457054819,
    1.000000001862659723513049006404,
    1.000000000931327432419668182872,
    1.000000000465662906503378407299,
    1.000000000232831183367650549200,
];

/// Largest argument covered by the precomputed table.
pub const ZETA_TABLE_MAX: u32 = 32;

/// Float value of ζ(k), k ≥ 2.
pub fn zeta_value(k: u32) -> f64 {
    assert!(k >= 2, "zeta argument must be at least 2, got {k}");
    if k <= ZETA_TABLE_MAX {
        ZETA_TABLE[(k - 2) as usize]
    } else {
        // 2^-33 already sits below 1e-9; a dozen terms exhaust f64.
        (1..=12u32).rev().map(|m| (m as f64).powi(-(k as i32))).sum()
    }
}

static BERNOULLI: RwLock<Vec<BigRational>> = RwLock::new(Vec::new());

/// Bernoulli number B_m (with B_1 = -1/2).
pub fn bernoulli(m: usize) -> BigRational {
    if let Some(b) = BERNOULLI.read().expect("bernoulli cache poisoned").get(m) {
        return b.clone();
    }
    let mut table = BERNOULLI.write().expect("bernoulli cache poisoned");
    while table.len() <= m {
        let k = table.len();
        if k == 0 {
            table.push(BigRational::one());
            continue;
        }
        // Σ_{j=0}^{k} C(k+1, j) B_j = 0
        let mut acc = BigRational::zero();
        let mut binom = BigInt::one();
        for (j, b) in table.iter().enumerate() {
            acc += b * BigRational::from_integer(binom.clone());
            binom = binom * BigInt::from(k + 1 - j) / BigInt::from(j + 1);
        }
        table.push(-acc / BigRational::from_integer(BigInt::from(k + 1)));
    }
    table[m].clone()
}

/// The rational r_k with ζ(2k) = r_k π^{2k}.
fn even_zeta_ratio(k: u32) -> BigRational {
    let b = bernoulli(2 * k as usize).abs();
    let mut fact = BigInt::one();
    for i in 2..=(2 * k) {
        fact *= BigInt::from(i);
    }
    b * BigRational::from_integer(BigInt::one() << (2 * k - 1) as usize)
        / BigRational::from_integer(fact)
}

/// A monomial `γ^g π^p ∏ ζ(aᵢ)` with sorted arguments, at most one of them even.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct ZetaMonomial {
    gamma_pow: u32,
    pi_pow: u32,
    zeta_args: Vec<u32>,
}

impl ZetaMonomial {
    pub fn one() -> Self {
        Self::default()
    }

    pub fn gamma_pow(&self) -> u32 {
        self.gamma_pow
    }

    pub fn pi_pow(&self) -> u32 {
        self.pi_pow
    }

    pub fn zeta_args(&self) -> &[u32] {
        &self.zeta_args
    }

    pub fn is_one(&self) -> bool {
        self.gamma_pow == 0 && self.pi_pow == 0 && self.zeta_args.is_empty()
    }

    /// Brings raw exponents into canonical form. Returns the rational factor
    /// produced by merging even zeta values together with the monomial.
    pub fn canonical(gamma_pow: u32, pi_pow: u32, args: Vec<u32>) -> Result<(BigRational, Self)> {
        if let Some(bad) = args.iter().find(|&&a| a < 2) {
            return Err(Error::InvalidArgument(format!(
                "zeta arguments must be at least 2, got {bad}"
            )));
        }
        let (even, mut odd): (Vec<u32>, Vec<u32>) = args.into_iter().partition(|a| a % 2 == 0);
        let mut factor = BigRational::one();
        if even.len() > 1 {
            let total: u32 = even.iter().map(|a| a / 2).sum();
            for a in &even {
                factor *= even_zeta_ratio(a / 2);
            }
            factor /= even_zeta_ratio(total);
            odd.push(2 * total);
        } else {
            odd.extend(even);
        }
        odd.sort_unstable();
        Ok((
            factor,
            Self {
                gamma_pow,
                pi_pow,
                zeta_args: odd,
            },
        ))
    }

    fn times(&self, other: &Self) -> (BigRational, Self) {
        let mut args = self.zeta_args.clone();
        args.extend_from_slice(&other.zeta_args);
        Self::canonical(
            self.gamma_pow + other.gamma_pow,
            self.pi_pow + other.pi_pow,
            args,
        )
        .expect("canonical monomials multiply to valid arguments")
    }

    pub fn eval(&self) -> f64 {
        let mut v = EULER_GAMMA.powi(self.gamma_pow as i32) * std::f64::consts::PI.powi(self.pi_pow as i32);
        for &a in &self.zeta_args {
            v *= zeta_value(a);
        }
        v
    }
}

impl fmt::Display for ZetaMonomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut factors = Vec::new();
        let power = |base: &str, p: u32| {
            if p == 1 {
                base.to_string()
            } else {
                format!("{base}^{p}")
            }
        };
        if self.gamma_pow > 0 {
            factors.push(power("gamma", self.gamma_pow));
        }
        if self.pi_pow > 0 {
            factors.push(power("pi", self.pi_pow));
        }
        let mut i = 0;
        while i < self.zeta_args.len() {
            let a = self.zeta_args[i];
            let run = self.zeta_args[i..].iter().take_while(|&&b| b == a).count() as u32;
            factors.push(power(&format!("zeta({a})"), run));
            i += run as usize;
        }
        if factors.is_empty() {
            write!(f, "1")
        } else {
            write!(f, "{}", factors.join("*"))
        }
    }
}

/// Exact element of ℚ[γ, π, ζ(2), ζ(3), …]; never stores zero coefficients.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct ZetaExpr {
    terms: BTreeMap<ZetaMonomial, BigRational>,
}

impl ZetaExpr {
    pub fn from_integer(n: i64) -> Self {
        Self::from_rational(BigRational::from_integer(n.into()))
    }

    pub fn from_ratio(num: i64, den: i64) -> Self {
        Self::from_rational(BigRational::new(num.into(), den.into()))
    }

    pub fn from_rational(q: BigRational) -> Self {
        let mut e = Self::default();
        e.insert(ZetaMonomial::one(), q);
        e
    }

    pub fn gamma() -> Self {
        Self::monomial(BigRational::one(), 1, 0, vec![]).expect("valid monomial")
    }

    pub fn pi() -> Self {
        Self::pi_pow(1)
    }

    pub fn pi_pow(k: u32) -> Self {
        Self::monomial(BigRational::one(), 0, k, vec![]).expect("valid monomial")
    }

    /// ζ(k).
    ///
    /// # Panics
    ///
    /// Panics if `k < 2`.
    pub fn zeta(k: u32) -> Self {
        Self::monomial(BigRational::one(), 0, 0, vec![k]).expect("zeta argument must be at least 2")
    }

    /// `coef · γ^g π^p ∏ ζ(aᵢ)`, canonicalized.
    pub fn monomial(coef: BigRational, gamma_pow: u32, pi_pow: u32, args: Vec<u32>) -> Result<Self> {
        let (factor, mono) = ZetaMonomial::canonical(gamma_pow, pi_pow, args)?;
        let mut e = Self::default();
        e.insert(mono, coef * factor);
        Ok(e)
    }

    fn insert(&mut self, mono: ZetaMonomial, coef: BigRational) {
        if coef.is_zero() {
            return;
        }
        match self.terms.entry(mono) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(coef);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += coef;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&ZetaMonomial, &BigRational)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// The coefficient of the empty monomial when the expression is rational.
    pub fn as_rational(&self) -> Option<BigRational> {
        match self.terms.len() {
            0 => Some(BigRational::zero()),
            1 => self
                .terms
                .iter()
                .next()
                .filter(|(m, _)| m.is_one())
                .map(|(_, c)| c.clone()),
            _ => None,
        }
    }

    pub fn scale(&self, q: &BigRational) -> Self {
        if q.is_zero() {
            return Self::default();
        }
        Self {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), c * q)).collect(),
        }
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut result = Self::one();
        let mut base = self.clone();
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                result = &result * &base;
            }
            k >>= 1;
            if k > 0 {
                base = &base * &base;
            }
        }
        result
    }

    /// Largest power of γ among the monomials.
    pub fn gamma_degree(&self) -> Result<u32> {
        self.terms
            .keys()
            .map(ZetaMonomial::gamma_pow)
            .max()
            .ok_or(Error::ZeroExpression)
    }

    /// Float value using the tabulated constants (f64, relative error near
    /// machine epsilon for expressions without heavy cancellation).
    pub fn eval(&self) -> f64 {
        // Neumaier summation keeps cancelling terms honest.
        let mut sum = 0.0f64;
        let mut comp = 0.0f64;
        for (m, c) in &self.terms {
            let term = rational_to_f64(c) * m.eval();
            let t = sum + term;
            if sum.abs() >= term.abs() {
                comp += (sum - t) + term;
            } else {
                comp += (term - t) + sum;
            }
            sum = t;
        }
        sum + comp
    }
}

pub(crate) fn rational_to_f64(q: &BigRational) -> f64 {
    q.to_f64().unwrap_or_else(|| {
        // Ratio::to_f64 only fails on overflow of both parts; fall back to logs.
        let n = q.numer().to_f64().unwrap_or(f64::INFINITY);
        let d = q.denom().to_f64().unwrap_or(f64::INFINITY);
        n / d
    })
}

impl Zero for ZetaExpr {
    fn zero() -> Self {
        Self::default()
    }

    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
}

impl One for ZetaExpr {
    fn one() -> Self {
        Self::from_integer(1)
    }
}

impl<'a> Add<&'a ZetaExpr> for &'a ZetaExpr {
    type Output = ZetaExpr;

    fn add(self, rhs: &'a ZetaExpr) -> ZetaExpr {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl AddAssign<&ZetaExpr> for ZetaExpr {
    fn add_assign(&mut self, rhs: &ZetaExpr) {
        for (m, c) in &rhs.terms {
            self.insert(m.clone(), c.clone());
        }
    }
}

impl Add for ZetaExpr {
    type Output = ZetaExpr;

    fn add(mut self, rhs: ZetaExpr) -> ZetaExpr {
        self += &rhs;
        self
    }
}

impl Neg for ZetaExpr {
    type Output = ZetaExpr;

    fn neg(self) -> ZetaExpr {
        Self {
            terms: self.terms.into_iter().map(|(m, c)| (m, -c)).collect(),
        }
    }
}

impl Neg for &ZetaExpr {
    type Output = ZetaExpr;

    fn neg(self) -> ZetaExpr {
        -self.clone()
    }
}

impl<'a> Sub<&'a ZetaExpr> for &'a ZetaExpr {
    type Output = ZetaExpr;

    fn sub(self, rhs: &'a ZetaExpr) -> ZetaExpr {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.insert(m.clone(), -c.clone());
        }
        out
    }
}

impl Sub for ZetaExpr {
    type Output = ZetaExpr;

    fn sub(self, rhs: ZetaExpr) -> ZetaExpr {
        &self - &rhs
    }
}

impl<'a> Mul<&'a ZetaExpr> for &'a ZetaExpr {
    type Output = ZetaExpr;

    fn mul(self, rhs: &'a ZetaExpr) -> ZetaExpr {
        let mut out = ZetaExpr::default();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &rhs.terms {
                let (factor, m) = ma.times(mb);
                out.insert(m, ca * cb * factor);
            }
        }
        out
    }
}

impl Mul for ZetaExpr {
    type Output = ZetaExpr;

    fn mul(self, rhs: ZetaExpr) -> ZetaExpr {
        &self * &rhs
    }
}

impl fmt::Display for ZetaExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (m, c)) in self.terms.iter().enumerate() {
            let negative = c.is_negative();
            match (i, negative) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            let mag = c.abs();
            if m.is_one() {
                write!(f, "{mag}")?;
            } else if mag.is_one() {
                write!(f, "{m}")?;
            } else {
                write!(f, "{mag}*{m}")?;
            }
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct TermRepr {
    coef: String,
    gamma: u32,
    pi: u32,
    zeta: Vec<u32>,
}

#[derive(Serialize, Deserialize)]
struct ExprRepr {
    terms: Vec<TermRepr>,
}

impl Serialize for ZetaExpr {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let terms = self
            .terms
            .iter()
            .map(|(m, c)| TermRepr {
                coef: format!("{}/{}", c.numer(), c.denom()),
                gamma: m.gamma_pow,
                pi: m.pi_pow,
                zeta: m.zeta_args.clone(),
            })
            .collect();
        ExprRepr { terms }.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ZetaExpr {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let repr = ExprRepr::deserialize(deserializer)?;
        let mut out = ZetaExpr::default();
        for t in repr.terms {
            let coef = BigRational::from_str(&t.coef).map_err(D::Error::custom)?;
            let e = ZetaExpr::monomial(coef, t.gamma, t.pi, t.zeta).map_err(D::Error::custom)?;
            out += &e;
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn add_identity_and_cancellation() {
        let z2 = ZetaExpr::zeta(2);
        assert_eq!(&ZetaExpr::zero() + &z2, z2);
        assert!((&z2 + &(-&z2)).is_zero());
        let a = &ZetaExpr::from_integer(2) - &z2;
        let b = &z2 - &ZetaExpr::one();
        assert_eq!(&a + &b, ZetaExpr::one());
    }

    #[test]
    fn multiplication_merges_monomials() {
        let p = &ZetaExpr::zeta(2) * &ZetaExpr::zeta(3);
        let (m, c) = p.terms().next().unwrap();
        assert_eq!(m.zeta_args(), &[2, 3]);
        assert!(c.is_one());
        assert_eq!(&ZetaExpr::pi_pow(2) * &ZetaExpr::pi_pow(3), ZetaExpr::pi_pow(5));
        let half_gamma = ZetaExpr::gamma().scale(&q(1, 2));
        let two_gamma = ZetaExpr::gamma().scale(&q(2, 1));
        assert_eq!(&half_gamma * &two_gamma, ZetaExpr::gamma().pow(2));
    }

    #[test]
    fn even_zeta_products_reduce() {
        // ζ(2)² = 5/2 ζ(4), ζ(2)ζ(4) = 7/4 ζ(6)
        assert_eq!(ZetaExpr::zeta(2).pow(2), ZetaExpr::zeta(4).scale(&q(5, 2)));
        assert_eq!(&ZetaExpr::zeta(2) * &ZetaExpr::zeta(4), ZetaExpr::zeta(6).scale(&q(7, 4)));
        let lhs = ZetaExpr::zeta(2).pow(3).eval();
        let rhs = zeta_value(2).powi(3);
        assert!((lhs - rhs).abs() < 1e-13 * rhs);
    }

    #[test]
    fn bernoulli_numbers() {
        assert_eq!(bernoulli(1), q(-1, 2));
        assert_eq!(bernoulli(2), q(1, 6));
        assert_eq!(bernoulli(12), q(-691, 2730));
        assert!(bernoulli(13).is_zero());
    }

    #[test]
    fn zeta_two_matches_partial_sums() {
        // Σ_{k≤N} 1/k² + 1/N - 1/(2N²) + 1/(6N³) has error O(N^-5).
        let n = 2000u32;
        let partial: f64 = (1..=n).rev().map(|k| 1.0 / (k as f64 * k as f64)).sum();
        let nf = n as f64;
        let tail = 1.0 / nf - 1.0 / (2.0 * nf * nf) + 1.0 / (6.0 * nf * nf * nf);
        let value = ZetaExpr::zeta(2).eval();
        assert!((value - (partial + tail)).abs() < 1e-14);
        assert!((value - 1.6449340668).abs() < 1e-10);
    }

    #[test]
    fn eval_of_mixed_constant() {
        let e = (&ZetaExpr::pi_pow(2) * &ZetaExpr::zeta(2)).scale(&q(-9, 1));
        let expected = -9.0 * std::f64::consts::PI.powi(2) * zeta_value(2);
        assert!((e.eval() - expected).abs() < 1e-12 * expected.abs());
        assert!((e.eval() + 146.113_636_551_003_65).abs() < 1e-10);
        assert_eq!(ZetaExpr::one().eval(), 1.0);
    }

    #[test]
    fn gamma_degree() {
        assert_eq!(ZetaExpr::zeta(3).gamma_degree().unwrap(), 0);
        let e = &(&ZetaExpr::gamma().pow(2) * &ZetaExpr::zeta(2)) + &ZetaExpr::gamma();
        assert_eq!(e.gamma_degree().unwrap(), 2);
        let p5 = &ZetaExpr::zeta(5).scale(&q(37, 1))
            - &(&ZetaExpr::zeta(2) * &ZetaExpr::zeta(3)).scale(&q(25, 1));
        assert_eq!(p5.gamma_degree().unwrap(), 0);
        assert!(matches!(ZetaExpr::zero().gamma_degree(), Err(Error::ZeroExpression)));
    }

    #[test]
    fn display_and_json() {
        let e = (&ZetaExpr::pi_pow(5)
            * &(&ZetaExpr::zeta(5).scale(&q(37, 1))
                - &(&ZetaExpr::zeta(2) * &ZetaExpr::zeta(3)).scale(&q(25, 1))))
            .scale(&q(252, 1));
        assert_eq!(e.to_string(), "-6300*pi^5*zeta(2)*zeta(3) + 9324*pi^5*zeta(5)");
        let json = serde_json::to_string(&e).unwrap();
        assert_eq!(
            json,
            r#"{"terms":[{"coef":"-6300/1","gamma":0,"pi":5,"zeta":[2,3]},{"coef":"9324/1","gamma":0,"pi":5,"zeta":[5]}]}"#
        );
        let back: ZetaExpr = serde_json::from_str(&json).unwrap();
        assert_eq!(back, e);
        assert_eq!(ZetaExpr::zero().to_string(), "0");
        assert_eq!(ZetaExpr::from_ratio(-3, 2).to_string(), "-3/2");
    }

    #[test]
    fn json_input_is_canonicalized() {
        let json = r#"{"terms":[{"coef":"1","gamma":0,"pi":0,"zeta":[2,2]},{"coef":"0/1","gamma":1,"pi":0,"zeta":[]}]}"#;
        let e: ZetaExpr = serde_json::from_str(json).unwrap();
        assert_eq!(e, ZetaExpr::zeta(4).scale(&q(5, 2)));
        let bad = r#"{"terms":[{"coef":"1","gamma":0,"pi":0,"zeta":[1]}]}"#;
        assert!(serde_json::from_str::<ZetaExpr>(bad).is_err());
    }
}
