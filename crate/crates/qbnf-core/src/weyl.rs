//! Sparse exact polynomial algebra in the graded generators `x`, `ξ`, `ħ`.
//!
//! The grading assigns degree `l + m + 2n` to the monomial `x^l ξ^m ħ^n`.
//! On top of the plain ring operations this module provides the graded
//! bracket family `{a,b}_j`, the star product, and the real adjoint series
//! `(i/ħ)[S,·]^⋆` together with its exponential — everything the normal-form
//! engine needs, with no complex arithmetic anywhere: the odd-bracket terms
//! either vanish identically (adjoint series, quadratic arguments) or are
//! checked to cancel (star product).

use crate::rational::{format_rat, parse_rat, Rat, RatParseError};
use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum WeylError {
    /// An odd-order bracket term survived in a star product that the caller
    /// promised would be real.
    #[error("star product has a nonvanishing imaginary part")]
    NonRealResult,
    /// A symbol carried an odd power of ħ where only even powers are legal.
    #[error("symbol has terms of odd degree in hbar")]
    NonRealInput,
    /// The generator of a conjugation must lie in the even-ħ, degree ≥ 3 part.
    #[error("generator is not in the W+ subalgebra (even hbar degree, graded degree >= 3)")]
    NotInWPlus,
}

/// Sign of the quadratic part: `Ω_+ = ½(ξ²+x²)` (elliptic) or
/// `Ω_- = ½(ξ²−x²)` (hyperbolic).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn as_int(self) -> i64 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }

    pub fn as_rat(self) -> Rat {
        crate::rational::rint(self.as_int())
    }

    pub fn parse(s: &str) -> Option<Sign> {
        match s.trim() {
            "+" | "+1" | "1" => Some(Sign::Plus),
            "-" | "-1" => Some(Sign::Minus),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Sign::Plus => "+",
            Sign::Minus => "-",
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Exponents of `x^l ξ^m ħ^n`. Ordering is lexicographic in `(l, m, n)`,
/// which fixes the canonical term order used everywhere.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial {
    pub l: u32,
    pub m: u32,
    pub n: u32,
}

impl Monomial {
    pub fn new(l: u32, m: u32, n: u32) -> Self {
        Monomial { l, m, n }
    }

    /// Graded degree `l + m + 2n`.
    pub fn graded_degree(&self) -> u32 {
        self.l + self.m + 2 * self.n
    }

    /// Degree in `(x, ξ)` alone.
    pub fn xxi_degree(&self) -> u32 {
        self.l + self.m
    }
}

/// Sparse polynomial over exact rationals; zero coefficients are never stored.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct WeylPoly {
    terms: BTreeMap<Monomial, Rat>,
}

impl WeylPoly {
    pub fn zero() -> Self {
        WeylPoly::default()
    }

    pub fn constant(c: Rat) -> Self {
        let mut p = WeylPoly::zero();
        p.add_term(Monomial::new(0, 0, 0), c);
        p
    }

    pub fn one() -> Self {
        WeylPoly::constant(Rat::one())
    }

    pub fn monomial(l: u32, m: u32, n: u32, coeff: Rat) -> Self {
        let mut p = WeylPoly::zero();
        p.add_term(Monomial::new(l, m, n), coeff);
        p
    }

    pub fn x() -> Self {
        WeylPoly::monomial(1, 0, 0, Rat::one())
    }

    pub fn xi() -> Self {
        WeylPoly::monomial(0, 1, 0, Rat::one())
    }

    pub fn hbar() -> Self {
        WeylPoly::monomial(0, 0, 1, Rat::one())
    }

    /// `Ω_σ = ½(ξ² + σ x²)`.
    pub fn omega(sign: Sign) -> Self {
        let mut p = WeylPoly::monomial(0, 2, 0, crate::rational::rat(1, 2));
        p.add_term(
            Monomial::new(2, 0, 0),
            crate::rational::rat(1, 2) * sign.as_rat(),
        );
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rat)> {
        self.terms.iter()
    }

    pub fn coeff(&self, mono: Monomial) -> Rat {
        self.terms.get(&mono).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn add_term(&mut self, mono: Monomial, coeff: Rat) {
        if coeff.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(mono) {
            Entry::Vacant(e) => {
                e.insert(coeff);
            }
            Entry::Occupied(mut e) => {
                *e.get_mut() += coeff;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn max_graded_degree(&self) -> u32 {
        self.terms
            .keys()
            .map(Monomial::graded_degree)
            .max()
            .unwrap_or(0)
    }

    pub fn min_graded_degree(&self) -> Option<u32> {
        self.terms.keys().map(Monomial::graded_degree).min()
    }

    pub fn max_xxi_degree(&self) -> u32 {
        self.terms
            .keys()
            .map(Monomial::xxi_degree)
            .max()
            .unwrap_or(0)
    }

    /// Every term has even ħ-exponent.
    pub fn has_even_hbar(&self) -> bool {
        self.terms.keys().all(|mo| mo.n % 2 == 0)
    }

    /// Membership in `W⁺`: even ħ-exponents and graded degree ≥ 3 throughout.
    pub fn is_in_w_plus(&self) -> bool {
        self.terms
            .keys()
            .all(|mo| mo.n % 2 == 0 && mo.graded_degree() >= 3)
    }

    /// Discard terms of graded degree above `max_degree`.
    pub fn truncate(&self, max_degree: u32) -> Self {
        WeylPoly {
            terms: self
                .terms
                .iter()
                .filter(|(mo, _)| mo.graded_degree() <= max_degree)
                .map(|(mo, c)| (*mo, c.clone()))
                .collect(),
        }
    }

    /// The graded-degree-`d` slice.
    pub fn graded_component(&self, d: u32) -> Self {
        WeylPoly {
            terms: self
                .terms
                .iter()
                .filter(|(mo, _)| mo.graded_degree() == d)
                .map(|(mo, c)| (*mo, c.clone()))
                .collect(),
        }
    }

    /// Split into `ħ-exponent -> (x,ξ)-polynomial` slices (ħ stripped).
    pub fn split_by_hbar(&self) -> BTreeMap<u32, WeylPoly> {
        let mut out: BTreeMap<u32, WeylPoly> = BTreeMap::new();
        for (mo, c) in &self.terms {
            out.entry(mo.n)
                .or_default()
                .add_term(Monomial::new(mo.l, mo.m, 0), c.clone());
        }
        out
    }

    /// Multiply by `ħ^k`.
    pub fn mul_hbar_pow(&self, k: u32) -> Self {
        WeylPoly {
            terms: self
                .terms
                .iter()
                .map(|(mo, c)| (Monomial::new(mo.l, mo.m, mo.n + k), c.clone()))
                .collect(),
        }
    }

    pub fn scaled(&self, factor: &Rat) -> Self {
        if factor.is_zero() {
            return WeylPoly::zero();
        }
        WeylPoly {
            terms: self.terms.iter().map(|(mo, c)| (*mo, c * factor)).collect(),
        }
    }

    /// `∂^p/∂x^p` with falling-factorial coefficients.
    pub fn deriv_x(&self, p: u32) -> Self {
        self.deriv(p, true)
    }

    /// `∂^p/∂ξ^p`.
    pub fn deriv_xi(&self, p: u32) -> Self {
        self.deriv(p, false)
    }

    fn deriv(&self, p: u32, in_x: bool) -> Self {
        if p == 0 {
            return self.clone();
        }
        let mut out = WeylPoly::zero();
        for (mo, c) in &self.terms {
            let e = if in_x { mo.l } else { mo.m };
            if e < p {
                continue;
            }
            let mut fall = BigInt::one();
            for i in 0..p {
                fall *= BigInt::from(e - i);
            }
            let nm = if in_x {
                Monomial::new(mo.l - p, mo.m, mo.n)
            } else {
                Monomial::new(mo.l, mo.m - p, mo.n)
            };
            out.add_term(nm, c * Rat::from_integer(fall));
        }
        out
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = WeylPoly::one();
        for _ in 0..k {
            acc = &acc * self;
        }
        acc
    }

    /// Evaluate at numeric `(x, ξ, ħ)`; used only by verification layers.
    pub fn eval_f64(&self, x: f64, xi: f64, hbar: f64) -> f64 {
        self.terms
            .iter()
            .map(|(mo, c)| {
                crate::rational::rat_to_f64(c)
                    * x.powi(mo.l as i32)
                    * xi.powi(mo.m as i32)
                    * hbar.powi(mo.n as i32)
            })
            .sum()
    }

    pub fn to_records(&self) -> Vec<TermRecord> {
        self.terms
            .iter()
            .map(|(mo, c)| TermRecord {
                l: mo.l,
                m: mo.m,
                n: mo.n,
                coeff: format_rat(c),
            })
            .collect()
    }

    pub fn from_records(records: &[TermRecord]) -> Result<Self, RatParseError> {
        let mut p = WeylPoly::zero();
        for r in records {
            p.add_term(Monomial::new(r.l, r.m, r.n), parse_rat(&r.coeff)?);
        }
        Ok(p)
    }
}

/// Serialized term: `{l, m, n, coeff: "p/q"}`; lists are emitted in the
/// canonical `(l, m, n)` order.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct TermRecord {
    pub l: u32,
    pub m: u32,
    pub n: u32,
    pub coeff: String,
}

impl fmt::Display for WeylPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let mut first = true;
        for (mo, c) in &self.terms {
            if !first {
                f.write_str(" + ")?;
            }
            first = false;
            write!(f, "({})", format_rat(c))?;
            if mo.l > 0 {
                write!(f, " x^{}", mo.l)?;
            }
            if mo.m > 0 {
                write!(f, " xi^{}", mo.m)?;
            }
            if mo.n > 0 {
                write!(f, " h^{}", mo.n)?;
            }
        }
        Ok(())
    }
}

impl AddAssign<&WeylPoly> for WeylPoly {
    fn add_assign(&mut self, rhs: &WeylPoly) {
        for (mo, c) in &rhs.terms {
            self.add_term(*mo, c.clone());
        }
    }
}

impl Add for &WeylPoly {
    type Output = WeylPoly;
    fn add(self, rhs: &WeylPoly) -> WeylPoly {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Sub for &WeylPoly {
    type Output = WeylPoly;
    fn sub(self, rhs: &WeylPoly) -> WeylPoly {
        let mut out = self.clone();
        for (mo, c) in &rhs.terms {
            out.add_term(*mo, -c.clone());
        }
        out
    }
}

impl Neg for &WeylPoly {
    type Output = WeylPoly;
    fn neg(self) -> WeylPoly {
        WeylPoly {
            terms: self.terms.iter().map(|(mo, c)| (*mo, -c.clone())).collect(),
        }
    }
}

impl Mul for &WeylPoly {
    type Output = WeylPoly;
    fn mul(self, rhs: &WeylPoly) -> WeylPoly {
        let mut out = WeylPoly::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &rhs.terms {
                out.add_term(
                    Monomial::new(ma.l + mb.l, ma.m + mb.m, ma.n + mb.n),
                    ca * cb,
                );
            }
        }
        out
    }
}

fn factorial(k: u32) -> BigInt {
    let mut f = BigInt::one();
    for i in 2..=k {
        f *= BigInt::from(i);
    }
    f
}

fn binomial(n: u32, k: u32) -> BigInt {
    num_integer::binomial(BigInt::from(n), BigInt::from(k))
}

/// The graded bracket
/// `{a,b}_j = Σ_{p=0..j} C(j,p) (−1)^p (∂_x^p ∂_ξ^{j−p} a)(∂_x^{j−p} ∂_ξ^p b)`.
///
/// `j = 1` is the Poisson bracket `a_ξ b_x − a_x b_ξ`.
pub fn bracket_j(a: &WeylPoly, b: &WeylPoly, j: u32) -> WeylPoly {
    let mut acc = WeylPoly::zero();
    for p in 0..=j {
        let left = a.deriv_x(p).deriv_xi(j - p);
        if left.is_zero() {
            continue;
        }
        let right = b.deriv_x(j - p).deriv_xi(p);
        if right.is_zero() {
            continue;
        }
        let mut c = Rat::from_integer(binomial(j, p));
        if p % 2 == 1 {
            c = -c;
        }
        acc += &(&left * &right).scaled(&c);
    }
    acc
}

/// Star product `a ⋆ b = Σ_j (1/j!) (ħ/2i)^j {a,b}_j`, truncated at graded
/// degree `max_degree` and rewritten over the reals:
/// `(ħ/2i)^{2m} = (−1)^m ħ^{2m} / 4^m`.
///
/// Inputs must carry only even ħ-powers and the net odd-`j` (imaginary)
/// contribution must cancel; both are checked.
pub fn star_product(a: &WeylPoly, b: &WeylPoly, max_degree: u32) -> Result<WeylPoly, WeylError> {
    if !a.has_even_hbar() || !b.has_even_hbar() {
        return Err(WeylError::NonRealInput);
    }
    let jmax = a.max_xxi_degree().min(b.max_xxi_degree());
    let mut real = (a * b).truncate(max_degree);
    let mut imag = WeylPoly::zero();
    for j in 1..=jmax {
        // ħ^j raises the graded degree of the bracket term by 2j; skip terms
        // that are entirely truncated away.
        if 2 * j > max_degree {
            break;
        }
        let br = bracket_j(a, b, j);
        if br.is_zero() {
            continue;
        }
        let denom = factorial(j) * BigInt::from(2u32).pow(j);
        let mut c = Rat::new(BigInt::one(), denom);
        // i^{-j}: even j = 2m gives (−1)^m, odd j = 2m+1 gives −i·(−1)^m.
        if (j / 2) % 2 == 1 {
            c = -c;
        }
        let term = br.mul_hbar_pow(j).scaled(&c).truncate(max_degree);
        if j % 2 == 0 {
            real += &term;
        } else {
            imag += &term;
        }
    }
    if !imag.is_zero() {
        return Err(WeylError::NonRealResult);
    }
    Ok(real)
}

/// The real adjoint series
/// `(i/ħ)[S,H]^⋆ = Σ_{m≥0} (1/(2m+1)!) (−1/4)^m ħ^{2m} {S,H}_{2m+1}`,
/// truncated at graded degree `max_degree`.
pub fn ad_series(s: &WeylPoly, h: &WeylPoly, max_degree: u32) -> Result<WeylPoly, WeylError> {
    if !s.is_in_w_plus() {
        return Err(WeylError::NotInWPlus);
    }
    let jmax = s.max_xxi_degree().min(h.max_xxi_degree());
    let mut acc = WeylPoly::zero();
    let mut m = 0u32;
    while 2 * m < jmax {
        let j = 2 * m + 1;
        let br = bracket_j(s, h, j);
        if !br.is_zero() {
            let denom = factorial(j) * BigInt::from(4u32).pow(m);
            let mut c = Rat::new(BigInt::one(), denom);
            if m % 2 == 1 {
                c = -c;
            }
            acc += &br.mul_hbar_pow(2 * m).scaled(&c).truncate(max_degree);
        }
        m += 1;
    }
    Ok(acc)
}

/// `exp((i/ħ) ad S) H = Σ_k (1/k!) ad^k(S)(H)`, truncated at `max_degree`.
///
/// For `S ∈ W⁺` of degree ≥ 3 the k-th iterate has graded degree ≥ k+2, so
/// the truncated series terminates.
pub fn exp_ad(s: &WeylPoly, h: &WeylPoly, max_degree: u32) -> Result<WeylPoly, WeylError> {
    if !s.is_in_w_plus() {
        return Err(WeylError::NotInWPlus);
    }
    let mut total = h.truncate(max_degree);
    let mut term = total.clone();
    let mut k: i64 = 1;
    while !term.is_zero() {
        term = ad_series(s, &term, max_degree)?.scaled(&crate::rational::rat(1, k));
        total += &term;
        k += 1;
        assert!(
            k <= max_degree as i64 + 3,
            "adjoint exponential failed to terminate by degree growth"
        );
    }
    Ok(total)
}
