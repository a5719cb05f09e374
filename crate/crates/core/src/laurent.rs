//! Truncated Laurent series in one variable λ.
//!
//! A series stores the coefficients of λ^min_order … λ^trunc_order and is
//! known to be exact up to and including `trunc_order`. Arithmetic keeps the
//! largest window on which the result is fully determined.

use std::fmt::{self, Debug, Display};
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Zero};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Deserializer, Serialize};

use crate::error::{Error, Result};
use crate::zring::ZetaExpr;

/// Coefficient ring for [`LaurentSeries`].
pub trait Coeff:
    Clone
    + Debug
    + PartialEq
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
    + Send
    + Sync
{
    fn from_ratio(num: i64, den: i64) -> Self;
}

impl Coeff for ZetaExpr {
    fn from_ratio(num: i64, den: i64) -> Self {
        ZetaExpr::from_ratio(num, den)
    }
}

impl Coeff for f64 {
    fn from_ratio(num: i64, den: i64) -> Self {
        num as f64 / den as f64
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LaurentSeries<C> {
    min_order: i32,
    trunc_order: i32,
    coeffs: Vec<C>,
}

impl<C: Coeff> LaurentSeries<C> {
    /// Series with coefficients for λ^min_order, λ^(min_order+1), …
    pub fn new(min_order: i32, coeffs: Vec<C>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::EmptyWindow);
        }
        let trunc_order = min_order + coeffs.len() as i32 - 1;
        Ok(Self::normalized(min_order, trunc_order, coeffs))
    }

    /// Builds from a sparse list of (order, coefficient) pairs known exactly up to `trunc_order`.
    pub fn from_terms(terms: &[(i32, C)], trunc_order: i32) -> Result<Self> {
        let min_order = terms.iter().map(|(k, _)| *k).min().unwrap_or(trunc_order).min(trunc_order);
        let mut coeffs = vec![C::zero(); (trunc_order - min_order + 1) as usize];
        for (k, c) in terms {
            if *k <= trunc_order {
                let slot = &mut coeffs[(k - min_order) as usize];
                *slot = slot.clone() + c.clone();
            }
        }
        Ok(Self::normalized(min_order, trunc_order, coeffs))
    }

    pub fn zero(trunc_order: i32) -> Self {
        Self::normalized(trunc_order, trunc_order, vec![C::zero()])
    }

    pub fn constant(c: C, trunc_order: i32) -> Result<Self> {
        Self::monomial(c, 0, trunc_order)
    }

    /// `c·λ^k`, valid up to `trunc_order`.
    pub fn monomial(c: C, k: i32, trunc_order: i32) -> Result<Self> {
        if trunc_order < k {
            return Err(Error::EmptyWindow);
        }
        let mut coeffs = vec![C::zero(); (trunc_order - k + 1) as usize];
        coeffs[0] = c;
        Ok(Self::normalized(k, trunc_order, coeffs))
    }

    fn normalized(mut min_order: i32, trunc_order: i32, mut coeffs: Vec<C>) -> Self {
        let lead = coeffs
            .iter()
            .position(|c| !c.is_zero())
            .unwrap_or(coeffs.len() - 1);
        if lead > 0 {
            coeffs.drain(..lead);
            min_order += lead as i32;
        }
        Self {
            min_order,
            trunc_order,
            coeffs,
        }
    }

    pub fn min_order(&self) -> i32 {
        self.min_order
    }

    pub fn trunc_order(&self) -> i32 {
        self.trunc_order
    }

    pub fn coeffs(&self) -> &[C] {
        &self.coeffs
    }

    /// True when every coefficient in the window vanishes.
    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    /// Coefficient of λ^j. Orders below the stored window are genuinely zero;
    /// orders above `trunc_order` are unknown and rejected.
    pub fn coeff(&self, j: i32) -> Result<C> {
        if j > self.trunc_order {
            return Err(Error::OutOfWindow {
                order: j,
                trunc: self.trunc_order,
            });
        }
        Ok(self.get(j))
    }

    fn get(&self, j: i32) -> C {
        if j < self.min_order || j > self.trunc_order {
            C::zero()
        } else {
            self.coeffs[(j - self.min_order) as usize].clone()
        }
    }

    /// Cauchy product.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        let min_order = self.min_order + other.min_order;
        let trunc_order = (self.trunc_order + other.min_order).min(other.trunc_order + self.min_order);
        if trunc_order < min_order {
            return Err(Error::EmptyWindow);
        }
        let len = (trunc_order - min_order + 1) as usize;
        let mut coeffs = vec![C::zero(); len];
        for (i, a) in self.coeffs.iter().enumerate().take(len) {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate().take(len - i) {
                coeffs[i + j] = coeffs[i + j].clone() + a.clone() * b.clone();
            }
        }
        Ok(Self::normalized(min_order, trunc_order, coeffs))
    }

    pub fn add(&self, other: &Self) -> Self {
        self.combine(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.combine(other, |a, b| a - b)
    }

    fn combine(&self, other: &Self, op: impl Fn(C, C) -> C) -> Self {
        let min_order = self.min_order.min(other.min_order);
        let trunc_order = self.trunc_order.min(other.trunc_order);
        let coeffs = (min_order..=trunc_order)
            .map(|k| op(self.get(k), other.get(k)))
            .collect();
        Self::normalized(min_order, trunc_order, coeffs)
    }

    pub fn neg(&self) -> Self {
        Self {
            min_order: self.min_order,
            trunc_order: self.trunc_order,
            coeffs: self.coeffs.iter().cloned().map(Neg::neg).collect(),
        }
    }

    /// Multiplies every coefficient by `c`.
    pub fn scale(&self, c: &C) -> Self {
        let coeffs = self.coeffs.iter().map(|a| a.clone() * c.clone()).collect();
        Self::normalized(self.min_order, self.trunc_order, coeffs)
    }

    /// The series of a(m·λ) for a nonzero integer m, polar part included.
    pub fn scale_var_int(&self, m: i64) -> Self {
        assert!(m != 0, "cannot rescale by zero");
        let up = C::from_ratio(m, 1);
        let down = C::from_ratio(1, m);
        let mut factor = C::one();
        let step = if self.min_order >= 0 { &up } else { &down };
        for _ in 0..self.min_order.unsigned_abs() {
            factor = factor * step.clone();
        }
        let mut coeffs = Vec::with_capacity(self.coeffs.len());
        for a in &self.coeffs {
            coeffs.push(a.clone() * factor.clone());
            factor = factor * up.clone();
        }
        Self::normalized(self.min_order, self.trunc_order, coeffs)
    }

    /// Multiplication by λ^k.
    pub fn shift_pow(&self, k: i32) -> Self {
        Self {
            min_order: self.min_order + k,
            trunc_order: self.trunc_order + k,
            coeffs: self.coeffs.clone(),
        }
    }

    /// Drops coefficients above `trunc_order`.
    pub fn truncate(&self, trunc_order: i32) -> Result<Self> {
        if trunc_order > self.trunc_order {
            return Err(Error::OutOfWindow {
                order: trunc_order,
                trunc: self.trunc_order,
            });
        }
        let coeffs = (self.min_order.min(trunc_order)..=trunc_order)
            .map(|k| self.get(k))
            .collect();
        Ok(Self::normalized(
            self.min_order.min(trunc_order),
            trunc_order,
            coeffs,
        ))
    }

    /// exp(a) for a series without polar part and with zero constant term.
    pub fn exp(&self) -> Result<Self> {
        if self.min_order < 0 || (self.min_order == 0 && !self.coeffs[0].is_zero()) {
            return Err(Error::ExpDomain {
                min_order: self.min_order,
            });
        }
        if self.trunc_order < 0 {
            return Err(Error::EmptyWindow);
        }
        let t = self.trunc_order as usize;
        let a: Vec<C> = (0..=t as i32).map(|k| self.get(k)).collect();
        // n·e_n = Σ_{k=1}^{n} k·a_k·e_{n−k}
        let mut e = vec![C::one()];
        for n in 1..=t {
            let mut acc = C::zero();
            for k in 1..=n {
                if a[k].is_zero() {
                    continue;
                }
                acc = acc + C::from_ratio(k as i64, 1) * a[k].clone() * e[n - k].clone();
            }
            e.push(acc * C::from_ratio(1, n as i64));
        }
        Ok(Self::normalized(0, self.trunc_order, e))
    }

    pub fn map<D: Coeff>(&self, f: impl Fn(&C) -> D) -> LaurentSeries<D> {
        LaurentSeries::normalized(
            self.min_order,
            self.trunc_order,
            self.coeffs.iter().map(f).collect(),
        )
    }
}

impl LaurentSeries<ZetaExpr> {
    pub fn eval(&self) -> LaurentSeries<f64> {
        self.map(ZetaExpr::eval)
    }
}

impl<C: Coeff + Display> Display for LaurentSeries<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let k = self.min_order + i as i32;
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match k {
                0 => write!(f, "({c})")?,
                1 => write!(f, "({c})*lambda")?,
                _ => write!(f, "({c})*lambda^{k}")?,
            }
        }
        if first {
            write!(f, "0")?;
        }
        write!(f, " + O(lambda^{})", self.trunc_order + 1)
    }
}

#[derive(Deserialize)]
struct SeriesRepr<C> {
    min_order: i32,
    trunc_order: i32,
    coeffs: Vec<C>,
}

impl<'de, C: Coeff + DeserializeOwned> Deserialize<'de> for LaurentSeries<C> {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let repr = SeriesRepr::<C>::deserialize(deserializer)?;
        if repr.coeffs.is_empty() || repr.trunc_order - repr.min_order + 1 != repr.coeffs.len() as i32 {
            return Err(D::Error::custom(
                "coeffs must cover min_order..=trunc_order exactly",
            ));
        }
        Ok(Self::normalized(repr.min_order, repr.trunc_order, repr.coeffs))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    fn s(min: i32, c: &[i64]) -> LaurentSeries<ZetaExpr> {
        LaurentSeries::new(min, c.iter().map(|&x| ZetaExpr::from_integer(x)).collect()).unwrap()
    }

    #[test]
    fn product_of_simple_series() {
        let inv = s(-1, &[1, 0, 0]);
        let lam = s(1, &[1, 0, 0]);
        let p = inv.mul(&lam).unwrap();
        assert_eq!(p.coeff(0).unwrap(), ZetaExpr::one());
        assert_eq!(p.coeff(1).unwrap(), ZetaExpr::zero());

        let a = s(-1, &[1, 1, 0, 0]);
        let b = s(-1, &[1, -1, 0, 0]);
        let p = a.mul(&b).unwrap();
        assert_eq!(p.min_order(), -2);
        assert_eq!(p.trunc_order(), 1);
        assert_eq!(p.coeff(-2).unwrap(), ZetaExpr::one());
        assert_eq!(p.coeff(-1).unwrap(), ZetaExpr::zero());
        assert_eq!(p.coeff(0).unwrap(), ZetaExpr::from_integer(-1));
    }

    #[test]
    fn coefficient_reads() {
        let inv = s(-1, &[1, 0]);
        assert_eq!(inv.coeff(-1).unwrap(), ZetaExpr::one());
        assert_eq!(inv.coeff(0).unwrap(), ZetaExpr::zero());
        assert!(matches!(inv.coeff(1), Err(Error::OutOfWindow { order: 1, trunc: 0 })));
        let z = ZetaExpr::zeta(2);
        let f = LaurentSeries::from_terms(&[(0, ZetaExpr::one()), (2, -z.clone())], 2).unwrap();
        assert_eq!(f.coeff(2).unwrap(), -z);
    }

    #[test]
    fn exponential() {
        let zero: LaurentSeries<ZetaExpr> = LaurentSeries::zero(3);
        let e = zero.exp().unwrap();
        assert_eq!(e.coeff(0).unwrap(), ZetaExpr::one());
        assert!(e.coeff(3).unwrap().is_zero());

        let c = ZetaExpr::zeta(3);
        let e = LaurentSeries::monomial(c.clone(), 1, 2).unwrap().exp().unwrap();
        assert_eq!(e.coeff(1).unwrap(), c);
        assert_eq!(e.coeff(2).unwrap(), c.pow(2).scale(&BigRational::new(1.into(), 2.into())));

        // Hand convolution: exp(−γλ + ζ(2)λ²/2) = 1 − γλ + (γ² + ζ(2))λ²/2 + O(λ³)
        let g = ZetaExpr::gamma();
        let half = BigRational::new(1.into(), 2.into());
        let a = LaurentSeries::from_terms(&[(1, -g.clone()), (2, ZetaExpr::zeta(2).scale(&half))], 2).unwrap();
        let e = a.exp().unwrap();
        assert_eq!(e.coeff(1).unwrap(), -g.clone());
        assert_eq!(e.coeff(2).unwrap(), (&g.pow(2) + &ZetaExpr::zeta(2)).scale(&half));

        assert!(matches!(s(-1, &[1, 0]).exp(), Err(Error::ExpDomain { min_order: -1 })));
        assert!(matches!(s(0, &[1, 0]).exp(), Err(Error::ExpDomain { min_order: 0 })));
    }

    #[test]
    fn shifts() {
        let inv = s(-1, &[1, 0]);
        assert_eq!(inv.shift_pow(1).coeff(0).unwrap(), ZetaExpr::one());
        let one = s(0, &[1]);
        let m2 = one.shift_pow(-2);
        assert_eq!(m2.min_order(), -2);
        assert_eq!(m2.coeff(-2).unwrap(), ZetaExpr::one());
        assert_eq!(one.shift_pow(0), one);
    }

    #[test]
    fn rescaling_the_variable() {
        let a = s(-1, &[1, 2, 3]);
        let b = a.scale_var_int(2);
        assert_eq!(b.coeff(-1).unwrap(), ZetaExpr::from_ratio(1, 2));
        assert_eq!(b.coeff(0).unwrap(), ZetaExpr::from_integer(2));
        assert_eq!(b.coeff(1).unwrap(), ZetaExpr::from_integer(6));
        let c = s(0, &[1, 2, 3]).scale_var_int(-3);
        assert_eq!(c.coeff(1).unwrap(), ZetaExpr::from_integer(-6));
        assert_eq!(c.coeff(2).unwrap(), ZetaExpr::from_integer(27));
    }

    #[test]
    fn leading_zeros_are_stripped() {
        let a = s(-2, &[0, 0, 5, 1]);
        assert_eq!(a.min_order(), 0);
        assert_eq!(a.trunc_order(), 1);
        assert_eq!(a.coeff(-2).unwrap(), ZetaExpr::zero());
        let z = s(0, &[0, 0]);
        assert!(z.is_zero());
        assert_eq!(z.trunc_order(), 1);
    }

    #[test]
    fn json_round_trip() {
        let a = LaurentSeries::new(-1, vec![1.0, -0.5, 0.25]).unwrap();
        let json = serde_json::to_string(&a).unwrap();
        assert_eq!(json, r#"{"min_order":-1,"trunc_order":1,"coeffs":[1.0,-0.5,0.25]}"#);
        let back: LaurentSeries<f64> = serde_json::from_str(&json).unwrap();
        assert_eq!(back, a);
        assert!(serde_json::from_str::<LaurentSeries<f64>>(r#"{"min_order":0,"trunc_order":3,"coeffs":[1.0]}"#).is_err());
        let z = s(-1, &[1, 0]);
        let back: LaurentSeries<ZetaExpr> = serde_json::from_str(&serde_json::to_string(&z).unwrap()).unwrap();
        assert_eq!(back, z);
    }
}
