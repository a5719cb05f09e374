//! Term generation and reduction for `⟨μ₀(ω), 1⟩` on ℙⁿ.
//!
//! The volume form ω splits as `Σ_ℓ (ℓ+1)/(n−ℓ)! · ω_FS^ℓ ∧ (Σ_k ω_k)^{n−ℓ}`.
//! Each product of elementary forms ω_J is expanded with its own metric and
//! reweighted by `exp(λ Σ_{i∉J} uᵢ)`, which produces the terms
//!
//! `(ℓ+1)/ℓ′! · (Σ_{i∉J} uᵢ)^{ℓ′} · ω_FS^ℓ ∧ ⋀_k μ_{ℓ_k}(ω_{J_k})`, with `Σ ℓ_k = −ℓ′`.
//!
//! Reduction replaces `μ₋₁(ωⱼ)` by `π[Dⱼ]` and, for ℓ ≥ 0,
//! `μ_ℓ(ωⱼ) = (i/2)∂∂̄(uⱼ^{ℓ+2}/(ℓ+2)!) + uⱼ^{ℓ+1}/(ℓ+1)! · ω_FS`,
//! then moves the ∂∂̄ pieces off by integration by parts.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::gamma::dirichlet_log_integral;
use crate::grassmann::FormField;
use crate::zring::ZetaExpr;

fn ratio(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

fn factorial(n: u32) -> BigInt {
    (2..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

fn inv_factorial(n: u32) -> BigRational {
    BigRational::new(BigInt::one(), factorial(n))
}

fn serialize_rational<S: Serializer>(q: &BigRational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&format!("{}/{}", q.numer(), q.denom()))
}

/// One summand of the expansion on ℙⁿ.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Term {
    pub n: usize,
    pub subset_j: Vec<usize>,
    pub log_power: u32,
    /// ℓ_k paired with `subset_j[k]`.
    pub composition: Vec<i32>,
    pub fs_power: u32,
    #[serde(serialize_with = "serialize_rational")]
    pub multiplicity: BigRational,
}

impl Term {
    /// Labels outside J, whose log norms make up the reweighting factor.
    pub fn complement(&self) -> Vec<usize> {
        (0..=self.n).filter(|i| !self.subset_j.contains(i)).collect()
    }

    pub fn id(&self) -> String {
        let pairs: Vec<String> = self
            .subset_j
            .iter()
            .zip(&self.composition)
            .map(|(j, l)| format!("mu{l}(w{j})"))
            .collect();
        let mut s = format!("{}*", self.multiplicity);
        if self.log_power > 0 {
            let comp: Vec<String> = self.complement().iter().map(|i| format!("u{i}")).collect();
            s += &format!("({})^{}*", comp.join("+"), self.log_power);
        }
        if self.fs_power > 0 {
            s += &format!("wfs^{}", self.fs_power);
            if !pairs.is_empty() {
                s += "^";
            }
        }
        s += &pairs.join("^");
        if self.fs_power == 0 && pairs.is_empty() {
            s += "1";
        }
        s
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.id())
    }
}

/// All compositions of `total` into `parts` integers each ≥ −1, in lexicographic order.
pub fn compositions(total: i32, parts: usize) -> Vec<Vec<i32>> {
    fn rec(total: i32, parts: usize, prefix: &mut Vec<i32>, out: &mut Vec<Vec<i32>>) {
        if parts == 0 {
            if total == 0 {
                out.push(prefix.clone());
            }
            return;
        }
        // the remaining parts−1 entries contribute at least −(parts−1)
        let max_first = total + (parts as i32 - 1);
        for first in -1..=max_first {
            prefix.push(first);
            rec(total - first, parts - 1, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(total, parts, &mut Vec::new(), &mut out);
    out
}

/// All k-subsets of 0..=n in lexicographic order.
pub fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == k {
            out.push(prefix.clone());
            return;
        }
        for i in start..=n {
            prefix.push(i);
            rec(i + 1, n, k, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::new(), &mut out);
    out
}

pub const MAX_EXPANSION_N: usize = 5;

/// Raw terms of the λ^order coefficient `⟨μ_order(ω), 1⟩`.
pub fn generate_terms_at_order(n: usize, order: i32) -> Result<Vec<Term>> {
    if !(1..=MAX_EXPANSION_N).contains(&n) {
        return Err(Error::InvalidArgument(format!(
            "expansion supports 1 <= n <= {MAX_EXPANSION_N}, got {n}"
        )));
    }
    let mut terms = Vec::new();
    for l in 0..=n {
        let size = n - l;
        for subset_j in subsets(n, size) {
            for log_power in 0..=size as u32 {
                for composition in compositions(order - log_power as i32, size) {
                    terms.push(Term {
                        n,
                        subset_j: subset_j.clone(),
                        log_power,
                        composition,
                        fs_power: l as u32,
                        multiplicity: BigRational::from_integer((l + 1).into())
                            * inv_factorial(log_power),
                    });
                }
            }
        }
    }
    Ok(terms)
}

/// Raw terms of the finite part.
pub fn generate_terms(n: usize) -> Result<Vec<Term>> {
    generate_terms_at_order(n, 0)
}

/// Collapses the permutation action on homogeneous labels. Representatives
/// use the last |J| labels with the composition sorted in decreasing order.
pub fn symmetry_reduce(terms: &[Term]) -> Vec<Term> {
    let mut classes: BTreeMap<(u32, u32, Vec<i32>, usize), Term> = BTreeMap::new();
    for t in terms {
        let mut comp = t.composition.clone();
        comp.sort_unstable_by(|a, b| b.cmp(a));
        let key = (t.fs_power, t.log_power, comp.clone(), t.n);
        classes
            .entry(key)
            .and_modify(|c| c.multiplicity += &t.multiplicity)
            .or_insert_with(|| {
                let m = comp.len();
                Term {
                    n: t.n,
                    subset_j: (t.n + 1 - m..=t.n).collect(),
                    log_power: t.log_power,
                    composition: comp,
                    fs_power: t.fs_power,
                    multiplicity: t.multiplicity.clone(),
                }
            });
    }
    classes.into_values().collect()
}

/// Exponent vector over labels 0..=n, stored sparsely.
pub type LogMonomial = BTreeMap<usize, u32>;

/// Polynomial in the log norms u₀, …, uₙ with rational coefficients.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LogPoly {
    terms: BTreeMap<Vec<(usize, u32)>, BigRational>,
}

impl LogPoly {
    pub fn constant(c: BigRational) -> Self {
        let mut p = Self::default();
        p.insert(Vec::new(), c);
        p
    }

    /// c·u_label^power
    pub fn power(label: usize, power: u32, c: BigRational) -> Self {
        let mono = if power == 0 { Vec::new() } else { vec![(label, power)] };
        let mut p = Self::default();
        p.insert(mono, c);
        p
    }

    /// (Σ_{i ∈ labels} uᵢ)^k
    pub fn sum_power(labels: &[usize], k: u32) -> Self {
        let mut base = Self::default();
        for &i in labels {
            base = base.add(&Self::power(i, 1, BigRational::one()));
        }
        let mut out = Self::constant(BigRational::one());
        for _ in 0..k {
            out = out.mul(&base);
        }
        out
    }

    fn insert(&mut self, mono: Vec<(usize, u32)>, c: BigRational) {
        if c.is_zero() {
            return;
        }
        let slot = self.terms.entry(mono.clone()).or_insert_with(BigRational::zero);
        *slot += c;
        if slot.is_zero() {
            self.terms.remove(&mono);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<(usize, u32)>, &BigRational)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.insert(m.clone(), c.clone());
        }
        out
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        let mut out = Self::default();
        for (m, v) in &self.terms {
            out.insert(m.clone(), v * c);
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::default();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                let mut merged: LogMonomial = ma.iter().copied().collect();
                for &(l, p) in mb {
                    *merged.entry(l).or_insert(0) += p;
                }
                out.insert(merged.into_iter().collect(), ca * cb);
            }
        }
        out
    }

    /// ∂/∂u_label
    pub fn derivative(&self, label: usize) -> Self {
        let mut out = Self::default();
        for (m, c) in &self.terms {
            if let Some(pos) = m.iter().position(|&(l, _)| l == label) {
                let p = m[pos].1;
                let mut mono = m.clone();
                if p == 1 {
                    mono.remove(pos);
                } else {
                    mono[pos].1 = p - 1;
                }
                out.insert(mono, c * BigRational::from_integer(p.into()));
            }
        }
        out
    }

    pub fn degree(&self) -> u32 {
        self.terms
            .keys()
            .map(|m| m.iter().map(|&(_, p)| p).sum())
            .max()
            .unwrap_or(0)
    }

    pub fn labels(&self) -> Vec<usize> {
        let mut out: Vec<usize> = self.terms.keys().flatten().map(|&(l, _)| l).collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    pub fn constant_term(&self) -> BigRational {
        self.terms.get(&Vec::new()).cloned().unwrap_or_else(BigRational::zero)
    }

    /// Coefficients of the degree-one part (labels → coefficient).
    pub fn linear_part(&self) -> BTreeMap<usize, BigRational> {
        self.terms
            .iter()
            .filter(|(m, _)| m.len() == 1 && m[0].1 == 1)
            .map(|(m, c)| (m[0].0, c.clone()))
            .collect()
    }

    pub fn eval(&self, u: impl Fn(usize) -> f64) -> f64 {
        self.terms
            .iter()
            .map(|(m, c)| {
                let v: f64 = m.iter().map(|&(l, p)| u(l).powi(p as i32)).product();
                crate::zring::rational_to_f64(c) * v
            })
            .sum()
    }
}

impl fmt::Display for LogPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (m, c)) in self.terms.iter().enumerate() {
            let sign = if c.is_negative() { "-" } else { "+" };
            if i > 0 {
                write!(f, " {sign} ")?;
            } else if c.is_negative() {
                write!(f, "-")?;
            }
            let mag = c.abs();
            let factors: Vec<String> = m
                .iter()
                .map(|&(l, p)| if p == 1 { format!("u{l}") } else { format!("u{l}^{p}") })
                .collect();
            if factors.is_empty() {
                write!(f, "{mag}")?;
            } else if mag.is_one() {
                write!(f, "{}", factors.join("*"))?;
            } else {
                write!(f, "{mag}*{}", factors.join("*"))?;
            }
        }
        Ok(())
    }
}

#[derive(Serialize)]
struct LogTermRepr {
    coef: String,
    powers: Vec<(usize, u32)>,
}

impl Serialize for LogPoly {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let terms: Vec<LogTermRepr> = self
            .terms
            .iter()
            .map(|(m, c)| LogTermRepr {
                coef: format!("{}/{}", c.numer(), c.denom()),
                powers: m.clone(),
            })
            .collect();
        terms.serialize(s)
    }
}

/// An integrable term: `prefactor · ∫_{∩_{r∈ambient} D_r} scalar · ω_FS^k ∧ [mixed pair]`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReducedTerm {
    pub n: usize,
    /// Labels of the divisor components the integral is restricted to.
    pub ambient: Vec<usize>,
    pub scalar: LogPoly,
    pub fs_power: u32,
    /// `(a, b)` stands for the 2-form (i/2)∂u_a∧∂̄u_b.
    pub mixed: Option<(usize, usize)>,
    pub constant_prefactor: ZetaExpr,
    /// Identifier of the term this piece came from.
    pub source: String,
}

impl ReducedTerm {
    pub fn dim(&self) -> usize {
        self.n - self.ambient.len()
    }

    /// Homogeneous labels surviving on the ambient component.
    pub fn labels(&self) -> Vec<usize> {
        (0..=self.n).filter(|i| !self.ambient.contains(i)).collect()
    }

    /// Form factors with the scalar as a product of log-norm powers.
    pub fn forms(&self) -> Vec<FormField> {
        let mut out = vec![FormField::FubiniStudy; self.fs_power as usize];
        if let Some((a, b)) = self.mixed {
            out.push(if a == b { FormField::Elementary(a) } else { FormField::MixedLogPair(a, b) });
        }
        out
    }

    pub fn form_degree(&self) -> usize {
        2 * (self.fs_power as usize + usize::from(self.mixed.is_some()))
    }

    /// Value at the intersection point when the ambient is zero-dimensional.
    /// The surviving label has ‖Z‖² = 1 there, so only the constant term remains.
    pub fn point_value(&self) -> Option<ZetaExpr> {
        (self.dim() == 0).then(|| {
            self.constant_prefactor
                .scale(&self.scalar.constant_term())
        })
    }

    /// Exact value from the simplex pushforward of ω_FS^d.
    ///
    /// `∫_{ℙ^d} P(u) ω_FS^d = d! π^d ∫_Δ P(log p) dp`, and for a ≠ b the
    /// 2-form (i/2)∂u_a∧∂̄u_b wedged with ω_FS^{d−1} equals −ω_FS^d/d pointwise.
    pub fn exact_value(&self) -> Result<ZetaExpr> {
        if let Some(v) = self.point_value() {
            return Ok(v);
        }
        let d = self.dim() as u32;
        let labels = self.labels();
        let mut form_factor = BigRational::from_integer(factorial(d));
        if let Some((a, b)) = self.mixed {
            if a == b {
                return Err(Error::InvalidArgument(format!(
                    "elementary form in reduced term {} is not integrable",
                    self.source
                )));
            }
            form_factor *= ratio(-1, d as i64);
        }
        let mut total = ZetaExpr::zero();
        for (mono, c) in self.scalar.terms() {
            let mut k = vec![0u32; labels.len()];
            for &(l, p) in mono {
                let pos = labels.iter().position(|&x| x == l).ok_or_else(|| {
                    Error::InvalidArgument(format!("u{l} diverges on the ambient of {}", self.source))
                })?;
                k[pos] = p;
            }
            total += &dirichlet_log_integral(&k)?.scale(c);
        }
        let value = &total.scale(&form_factor) * &ZetaExpr::pi_pow(d);
        Ok(&value * &self.constant_prefactor)
    }
}

impl fmt::Display for ReducedTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ambient = if self.ambient.is_empty() {
            format!("P{}", self.n)
        } else {
            let ds: Vec<String> = self.ambient.iter().map(|r| format!("D{r}")).collect();
            ds.join("∩")
        };
        let forms: Vec<String> = self.forms().iter().map(ToString::to_string).collect();
        write!(
            f,
            "({}) * int_{{{}}} ({}) {}",
            self.constant_prefactor,
            ambient,
            self.scalar,
            if forms.is_empty() { "[point]".to_string() } else { forms.join("^") }
        )
    }
}

/// A ∂∂̄ piece (i/2)∂∂̄(u_label^e / e!).
#[derive(Clone, Copy, Debug)]
struct Piece {
    label: usize,
    exponent: u32,
}

struct Reducer<'a> {
    n: usize,
    source: &'a str,
    out: Vec<ReducedTerm>,
}

impl Reducer<'_> {
    fn emit(
        &mut self,
        ambient: &[usize],
        scalar: LogPoly,
        fs_power: u32,
        mixed: Option<(usize, usize)>,
        prefactor: ZetaExpr,
    ) {
        if scalar.is_zero() || prefactor.is_zero() {
            return;
        }
        let mut ambient = ambient.to_vec();
        ambient.sort_unstable();
        self.out.push(ReducedTerm {
            n: self.n,
            ambient,
            scalar,
            fs_power,
            mixed,
            constant_prefactor: prefactor,
            source: self.source.to_string(),
        });
    }

    fn resolve(
        &mut self,
        ambient: &[usize],
        scalar: LogPoly,
        fs_power: u32,
        pieces: &[Piece],
        prefactor: ZetaExpr,
    ) -> Result<()> {
        if pieces.is_empty() {
            self.emit(ambient, scalar, fs_power, None, prefactor);
            return Ok(());
        }
        if scalar.degree() == 0 {
            // ∫ c·∂∂̄(⋯) ∧ closed = 0
            return Ok(());
        }
        if let [q] = pieces {
            // ∫ F (i/2)∂∂̄h ∧ Ψ = −Σ_a ∫ ∂_a F · h′(u_q) (i/2)∂u_a∧∂̄u_q ∧ Ψ
            let h_prime = LogPoly::power(q.label, q.exponent - 1, inv_factorial(q.exponent - 1));
            for a in scalar.labels() {
                if a == q.label {
                    return Err(Error::StokesTransfer(format!(
                        "{}: scalar depends on u{a}, the potential of its own ddbar piece",
                        self.source
                    )));
                }
                let s = scalar.derivative(a).mul(&h_prime).scale(&ratio(-1, 1));
                self.emit(ambient, s, fs_power, Some((a, q.label)), prefactor.clone());
            }
            return Ok(());
        }
        if scalar.degree() > 1 {
            return Err(Error::StokesTransfer(format!(
                "{}: {} ddbar pieces against a scalar of degree {}",
                self.source,
                pieces.len(),
                scalar.degree()
            )));
        }
        // F = c₀ + Σ c_a u_a: ∫ F (i/2)∂∂̄h ∧ Ψ = Σ_a c_a ∫ h (π[D_a] − ω_FS) ∧ Ψ
        let (first, rest) = pieces.split_first().expect("at least two pieces");
        let h = LogPoly::power(first.label, first.exponent, inv_factorial(first.exponent));
        for (a, c) in scalar.linear_part() {
            if a == first.label || rest.iter().any(|p| p.label == a) || ambient.contains(&a) {
                return Err(Error::StokesTransfer(format!(
                    "{}: cannot restrict to D{a} while u{a} is still present",
                    self.source
                )));
            }
            let mut restricted = ambient.to_vec();
            restricted.push(a);
            let pi_c = (&prefactor * &ZetaExpr::pi()).scale(&c);
            self.resolve(&restricted, h.clone(), fs_power, rest, pi_c)?;
            self.resolve(ambient, h.clone(), fs_power + 1, rest, prefactor.scale(&-c))?;
        }
        Ok(())
    }
}

/// Rewrites a term into integrable pieces.
pub fn reduce_term(t: &Term) -> Result<Vec<ReducedTerm>> {
    let source = t.id();
    let mut reducer = Reducer {
        n: t.n,
        source: &source,
        out: Vec::new(),
    };
    let mut ambient = Vec::new();
    let mut pieces = Vec::new();
    for (&j, &l) in t.subset_j.iter().zip(&t.composition) {
        match l {
            -1 => ambient.push(j),
            l if l >= 0 => pieces.push(Piece {
                label: j,
                exponent: (l + 2) as u32,
            }),
            _ => {
                return Err(Error::InvalidArgument(format!(
                    "composition entry {l} below -1 in {source}"
                )))
            }
        }
    }
    let base = LogPoly::sum_power(&t.complement(), t.log_power);
    let prefactor =
        ZetaExpr::from_rational(t.multiplicity.clone()) * ZetaExpr::pi_pow(ambient.len() as u32);

    // choose, for each μ_ℓ with ℓ ≥ 0, either its ∂∂̄ piece (bit set) or its ω_FS piece
    for mask in 0u32..(1 << pieces.len()) {
        let mut scalar = base.clone();
        let mut ddbar = Vec::new();
        let mut fs_power = t.fs_power;
        for (i, p) in pieces.iter().enumerate() {
            if mask >> i & 1 == 1 {
                ddbar.push(*p);
            } else {
                let e = p.exponent - 1;
                scalar = scalar.mul(&LogPoly::power(p.label, e, inv_factorial(e)));
                fs_power += 1;
            }
        }
        reducer.resolve(&ambient, scalar, fs_power, &ddbar, prefactor.clone())?;
    }
    Ok(reducer.out)
}

/// `⟨μ₋ₙ(ω), 1⟩` from the expansion: every term is a product of n Lelong
/// currents meeting in a point.
pub fn leading_coefficient(n: usize) -> Result<ZetaExpr> {
    let mut total = ZetaExpr::zero();
    for t in generate_terms_at_order(n, -(n as i32))? {
        for r in reduce_term(&t)? {
            let v = r.point_value().ok_or_else(|| {
                Error::InvalidArgument(format!("leading term {} is not point-supported", r.source))
            })?;
            total += &v;
        }
    }
    Ok(total)
}
