//! The forward Birkhoff engine.
//!
//! `birkhoff_forward` conjugates `H = Ω_σ + O(3)` degree by degree with
//! `exp((i/ħ) ad S)`: at each graded degree the homological equation
//! `{Ω_σ, P}₁ = Q − c·Ω_σ^{N/2}` removes everything removable and the
//! obstruction `c` lands in the normal-form coefficient table. The engine
//! never transcribes assembled coefficient formulas: the adjoint
//! exponential is the single source of truth, and a final verification
//! pass re-expands `exp_ad(S, H)` and checks it equals the reconstructed
//! normal form exactly.

use crate::rational::{format_rat, parse_rat, rat, Rat, RatParseError};
use crate::weyl::{exp_ad, Monomial, Sign, WeylError, WeylPoly};
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum NormalFormError {
    #[error("polynomial is not homogeneous in (x, xi) or depends on hbar")]
    NotHomogeneous,
    #[error("degree-2 part of the symbol is not exactly the requested oscillator")]
    BadQuadraticPart,
    #[error("symbol has terms of odd degree in hbar")]
    NonRealInput,
    #[error("normal-form engine inconsistency: {0}")]
    Inconsistency(String),
    #[error(transparent)]
    Weyl(#[from] WeylError),
}

/// Truncated Taylor data of the potential at the critical point:
/// `V = E₀ + σ x²/2 + a₃ x³ + … + a_M x^M`. The quadratic coefficient is
/// fixed at `σ/2` and never stored.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PotentialJet {
    pub sign: Sign,
    pub e0: Rat,
    /// `a₃, a₄, …` in order; may be empty (pure oscillator).
    pub coeffs: Vec<Rat>,
}

impl PotentialJet {
    pub fn new(sign: Sign, e0: Rat, coeffs: Vec<Rat>) -> Self {
        PotentialJet { sign, e0, coeffs }
    }

    pub fn harmonic() -> Self {
        PotentialJet::new(Sign::Plus, Rat::zero(), vec![])
    }

    /// Highest stored order `M` (2 for the pure oscillator).
    pub fn max_order(&self) -> u32 {
        self.coeffs.len() as u32 + 2
    }

    /// Coefficient `a_n` for `n ≥ 3`; zero beyond the stored range.
    pub fn a(&self, n: u32) -> Rat {
        assert!(n >= 3);
        self.coeffs
            .get((n - 3) as usize)
            .cloned()
            .unwrap_or_else(Rat::zero)
    }

    /// Jet extended (or cut) to order `m` with zero padding.
    pub fn resized(&self, m: u32) -> Self {
        assert!(m >= 2);
        let mut coeffs = self.coeffs.clone();
        coeffs.resize((m - 2) as usize, Rat::zero());
        PotentialJet::new(self.sign, self.e0.clone(), coeffs)
    }

    /// Drop trailing zero coefficients.
    pub fn trimmed(&self) -> Self {
        let mut coeffs = self.coeffs.clone();
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        PotentialJet::new(self.sign, self.e0.clone(), coeffs)
    }

    /// Numeric potential `V(x)` for the verification layers. For hot loops
    /// use [`PotentialJet::numeric`], which converts the coefficients once.
    pub fn eval_f64(&self, x: f64) -> f64 {
        self.numeric().eval(x)
    }

    pub fn numeric(&self) -> NumericPotential {
        NumericPotential {
            e0: crate::rational::rat_to_f64(&self.e0),
            half_sign: 0.5 * self.sign.as_int() as f64,
            coeffs: self
                .coeffs
                .iter()
                .map(crate::rational::rat_to_f64)
                .collect(),
        }
    }
}

/// Floating-point view of a jet's potential.
#[derive(Debug, Clone)]
pub struct NumericPotential {
    e0: f64,
    half_sign: f64,
    coeffs: Vec<f64>,
}

impl NumericPotential {
    pub fn eval(&self, x: f64) -> f64 {
        let mut v = self.e0 + self.half_sign * x * x;
        let mut xp = x * x;
        for c in &self.coeffs {
            xp *= x;
            v += c * xp;
        }
        v
    }
}

/// Normal-form coefficient table `b_{j,k}` for
/// `B = Ω_σ + Σ_{2j+k≥2} b_{j,k} ħ^{2j} Ω_σ^k`; the leading `Ω_σ` is
/// implicit and never stored. The entry `(j,k)` has graded degree `4j+2k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NormalFormSeries {
    pub sign: Sign,
    pub e0: Rat,
    pub max_degree: u32,
    b: BTreeMap<(u32, u32), Rat>,
}

impl NormalFormSeries {
    pub fn new(sign: Sign, e0: Rat, max_degree: u32) -> Self {
        NormalFormSeries {
            sign,
            e0,
            max_degree,
            b: BTreeMap::new(),
        }
    }

    pub fn get(&self, j: u32, k: u32) -> Rat {
        self.b.get(&(j, k)).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn set(&mut self, j: u32, k: u32, value: Rat) {
        assert!(2 * j + k >= 2, "leading terms are implicit");
        assert!(4 * j + 2 * k <= self.max_degree, "entry beyond truncation");
        if value.is_zero() {
            self.b.remove(&(j, k));
        } else {
            self.b.insert((j, k), value);
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&(u32, u32), &Rat)> {
        self.b.iter()
    }

    pub fn is_trivial(&self) -> bool {
        self.b.is_empty()
    }

    /// The ħ⁰ coefficients `{k → b_{0,k}}` (the classical normal form).
    pub fn classical_part(&self) -> BTreeMap<u32, Rat> {
        self.b
            .iter()
            .filter(|((j, _), _)| *j == 0)
            .map(|((_, k), c)| (*k, c.clone()))
            .collect()
    }

    /// Expand the table back into a symbol, leading `Ω_σ` included.
    pub fn to_weyl_poly(&self) -> WeylPoly {
        let omega = WeylPoly::omega(self.sign);
        let mut out = omega.clone();
        for ((j, k), c) in &self.b {
            out += &omega.pow(*k).mul_hbar_pow(2 * j).scaled(c);
        }
        out
    }
}

/// Coefficients `b̂_{j,k}` of the operator-power form
/// `B̂ = Ω̂ + Σ b̂_{j,k} ħ^{2j} Ω̂^k`, used for eigenvalue prediction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FunctionalNormalForm {
    pub sign: Sign,
    pub e0: Rat,
    pub max_degree: u32,
    b: BTreeMap<(u32, u32), Rat>,
}

impl FunctionalNormalForm {
    pub fn get(&self, j: u32, k: u32) -> Rat {
        self.b.get(&(j, k)).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&(u32, u32), &Rat)> {
        self.b.iter()
    }
}

/// Accumulated conjugation generator `S = S₃ + S₄ + …`, an element of `W⁺`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Generator {
    pub s: WeylPoly,
}

// ---------------------------------------------------------------------------
// exact linear algebra on the homogeneous monomial basis
// ---------------------------------------------------------------------------

/// Row-reduce `m` (in place) and return a particular solution of `m p = rhs`,
/// with free variables pinned to zero. `None` if the system is inconsistent.
fn solve_particular(mut m: Vec<Vec<Rat>>, mut rhs: Vec<Rat>) -> Option<Vec<Rat>> {
    let rows = m.len();
    let cols = if rows == 0 { 0 } else { m[0].len() };
    let mut pivot_cols: Vec<usize> = Vec::new();
    let mut r = 0usize;
    for c in 0..cols {
        let Some(pr) = (r..rows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, pr);
        rhs.swap(r, pr);
        let inv = m[r][c].clone();
        for v in m[r].iter_mut() {
            *v = &*v / &inv;
        }
        rhs[r] = &rhs[r] / &inv;
        for i in 0..rows {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                for cc in 0..cols {
                    let sub = &m[r][cc] * &f;
                    m[i][cc] = &m[i][cc] - &sub;
                }
                let sub = &rhs[r] * &f;
                rhs[i] = &rhs[i] - &sub;
            }
        }
        pivot_cols.push(c);
        r += 1;
        if r == rows {
            break;
        }
    }
    // inconsistent if a zero row has nonzero rhs
    for i in r..rows {
        if !rhs[i].is_zero() {
            return None;
        }
    }
    let mut p = vec![Rat::zero(); cols];
    for (row, &c) in pivot_cols.iter().enumerate() {
        p[c] = rhs[row].clone();
    }
    Some(p)
}

/// A nonzero kernel vector of `m`, or `None` if `m` is injective.
fn kernel_vector(m: &[Vec<Rat>]) -> Option<Vec<Rat>> {
    let rows = m.len();
    let cols = if rows == 0 { 0 } else { m[0].len() };
    let mut a: Vec<Vec<Rat>> = m.to_vec();
    let mut pivots: Vec<(usize, usize)> = Vec::new();
    let mut r = 0usize;
    for c in 0..cols {
        let Some(pr) = (r..rows).find(|&i| !a[i][c].is_zero()) else {
            continue;
        };
        a.swap(r, pr);
        let inv = a[r][c].clone();
        for v in a[r].iter_mut() {
            *v = &*v / &inv;
        }
        for i in 0..rows {
            if i != r && !a[i][c].is_zero() {
                let f = a[i][c].clone();
                for cc in 0..cols {
                    let sub = &a[r][cc] * &f;
                    a[i][cc] = &a[i][cc] - &sub;
                }
            }
        }
        pivots.push((r, c));
        r += 1;
        if r == rows {
            break;
        }
    }
    let pivot_cols: Vec<usize> = pivots.iter().map(|&(_, c)| c).collect();
    let free = (0..cols).find(|c| !pivot_cols.contains(c))?;
    let mut v = vec![Rat::zero(); cols];
    v[free] = Rat::one();
    for &(row, c) in &pivots {
        v[c] = -a[row][free].clone();
    }
    Some(v)
}

fn dot(a: &[Rat], b: &[Rat]) -> Rat {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Matrix of `P ↦ {Ω_σ, P}₁` on the basis `x^{N−i} ξ^i`, `i = 0..N`:
/// the basis vector `e_i` maps to `(N−i) e_{i+1} − σ i e_{i−1}`.
fn bracket_matrix(n: u32, sign: Sign) -> Vec<Vec<Rat>> {
    let dim = (n + 1) as usize;
    let mut m = vec![vec![Rat::zero(); dim]; dim];
    for i in 0..dim {
        let xi_exp = i as i64;
        let x_exp = n as i64 - xi_exp;
        if x_exp > 0 {
            m[i + 1][i] = Rat::from_integer(x_exp.into());
        }
        if xi_exp > 0 {
            m[i - 1][i] = rat(-sign.as_int() * xi_exp, 1);
        }
    }
    m
}

fn poly_to_coords(q: &WeylPoly, n: u32) -> Vec<Rat> {
    let mut v = vec![Rat::zero(); (n + 1) as usize];
    for (mo, c) in q.terms() {
        v[mo.m as usize] = c.clone();
    }
    v
}

fn coords_to_poly(v: &[Rat], n: u32) -> WeylPoly {
    let mut p = WeylPoly::zero();
    for (i, c) in v.iter().enumerate() {
        p.add_term(Monomial::new(n - i as u32, i as u32, 0), c.clone());
    }
    p
}

fn omega_power_coords(n_half: u32, n: u32, sign: Sign) -> Vec<Rat> {
    poly_to_coords(&WeylPoly::omega(sign).pow(n_half), n)
}

fn homogeneous_degree(q: &WeylPoly) -> Result<u32, NormalFormError> {
    let mut deg: Option<u32> = None;
    for (mo, _) in q.terms() {
        if mo.n != 0 {
            return Err(NormalFormError::NotHomogeneous);
        }
        match deg {
            None => deg = Some(mo.xxi_degree()),
            Some(d) if d == mo.xxi_degree() => {}
            Some(_) => return Err(NormalFormError::NotHomogeneous),
        }
    }
    Ok(deg.unwrap_or(0))
}

/// Solve `{Ω_σ, P}₁ = Q − c·Ω_σ^{N/2}` exactly for a homogeneous `Q` of
/// `(x,ξ)`-degree `N` with no ħ dependence.
///
/// For odd `N` the bracket operator is invertible and `c = 0`. For even `N`
/// the obstruction functional fixes `c` uniquely and `P` is pinned to have
/// zero component along the kernel direction `Ω_σ^{N/2}`.
pub fn homological_solve(q: &WeylPoly, sign: Sign) -> Result<(WeylPoly, Rat), NormalFormError> {
    let n = homogeneous_degree(q)?;
    if q.is_zero() {
        return Ok((WeylPoly::zero(), Rat::zero()));
    }
    let m = bracket_matrix(n, sign);
    let qv = poly_to_coords(q, n);
    if n % 2 == 1 {
        let p = solve_particular(m, qv)
            .ok_or_else(|| NormalFormError::Inconsistency("odd-degree solve failed".into()))?;
        return Ok((coords_to_poly(&p, n), Rat::zero()));
    }
    // even degree: left null vector y of the bracket matrix, normalized so
    // that y·(coords of Ω^{N/2}) = 1, gives the obstruction functional
    let mt: Vec<Vec<Rat>> = (0..m.len())
        .map(|i| (0..m.len()).map(|j| m[j][i].clone()).collect())
        .collect();
    let y = kernel_vector(&mt)
        .ok_or_else(|| NormalFormError::Inconsistency("missing obstruction direction".into()))?;
    let e = omega_power_coords(n / 2, n, sign);
    let ye = dot(&y, &e);
    if ye.is_zero() {
        return Err(NormalFormError::Inconsistency(
            "obstruction functional degenerate on the kernel direction".into(),
        ));
    }
    let y: Vec<Rat> = y.iter().map(|v| v / &ye).collect();
    let c = dot(&y, &qv);
    let rhs: Vec<Rat> = qv.iter().zip(&e).map(|(qi, ei)| qi - &(ei * &c)).collect();
    let p = solve_particular(m, rhs)
        .ok_or_else(|| NormalFormError::Inconsistency("even-degree solve inconsistent".into()))?;
    // pin the kernel component to zero: P ← P − (y·P) Ω^{N/2}
    let yp = dot(&y, &p);
    let p: Vec<Rat> = p.iter().zip(&e).map(|(pi, ei)| pi - &(ei * &yp)).collect();
    Ok((coords_to_poly(&p, n), c))
}

/// The obstruction `c_σ(Q)` of the homological equation alone.
pub fn c_functional(q: &WeylPoly, sign: Sign) -> Result<Rat, NormalFormError> {
    Ok(homological_solve(q, sign)?.1)
}

/// The canonical odd solution `Σ_{2N−1}^σ` of `{Ω_σ, Σ}₁ = x^{2N−1}`.
pub fn sigma_poly(n: u32, sign: Sign) -> WeylPoly {
    assert!(n >= 1);
    let rhs = WeylPoly::monomial(2 * n - 1, 0, 0, Rat::one());
    let (p, c) = homological_solve(&rhs, sign).expect("odd homological equation always solvable");
    debug_assert!(c.is_zero());
    p
}

/// `Ω_σ + Σ_{j=3..M} a_j x^j`; the base value `E₀` stays out of the symbol
/// and rides along as metadata.
pub fn jet_to_hamiltonian(jet: &PotentialJet) -> WeylPoly {
    let mut h = WeylPoly::omega(jet.sign);
    for (i, c) in jet.coeffs.iter().enumerate() {
        h.add_term(Monomial::new(i as u32 + 3, 0, 0), c.clone());
    }
    h
}

/// Exploration hook for the non-uniqueness of the generator: at stage
/// `(graded degree n, ħ-power j)` add `t·ħ^{2j} Ω_σ^{(n−4j)/2}` to `S`
/// before continuing. The normal-form coefficients must not move.
pub type KernelShifts = BTreeMap<(u32, u32), Rat>;

/// Reduce `H = Ω_σ + O(3)` to its quantum Birkhoff normal form through
/// graded degree `max_degree`. Accepts general polynomial symbols (with
/// even ħ-powers), not only `x`-potentials.
pub fn birkhoff_forward(
    h: &WeylPoly,
    sign: Sign,
    max_degree: u32,
) -> Result<(NormalFormSeries, Generator), NormalFormError> {
    birkhoff_forward_with_shifts(h, sign, max_degree, &KernelShifts::new())
}

/// `birkhoff_forward` with explicit kernel shifts; see [`KernelShifts`].
pub fn birkhoff_forward_with_shifts(
    h: &WeylPoly,
    sign: Sign,
    max_degree: u32,
    shifts: &KernelShifts,
) -> Result<(NormalFormSeries, Generator), NormalFormError> {
    if !h.has_even_hbar() {
        return Err(NormalFormError::NonRealInput);
    }
    if h.truncate(2) != WeylPoly::omega(sign) {
        return Err(NormalFormError::BadQuadraticPart);
    }
    let mut nf = NormalFormSeries::new(sign, Rat::zero(), max_degree);
    let mut s = WeylPoly::zero();
    for n in 3..=max_degree {
        let transformed = exp_ad(&s, h, n)?;
        let slice = transformed.graded_component(n);
        for (hbar_exp, q) in slice.split_by_hbar() {
            if hbar_exp % 2 != 0 {
                return Err(NormalFormError::NonRealInput);
            }
            let j = hbar_exp / 2;
            let n_x = n - 2 * hbar_exp;
            let (p, c) = homological_solve(&q, sign)?;
            s += &p.mul_hbar_pow(hbar_exp);
            if n_x % 2 == 0 && !c.is_zero() {
                nf.set(j, n_x / 2, c);
            }
        }
        for ((sn, sj), t) in shifts {
            if *sn == n && n >= 4 * sj && (n - 4 * sj) % 2 == 0 {
                s += &WeylPoly::omega(sign)
                    .pow((n - 4 * sj) / 2)
                    .mul_hbar_pow(2 * sj)
                    .scaled(t);
            }
        }
    }
    // the adjoint exponential is the single source of truth: re-expand and
    // demand exact agreement with the reconstructed normal form
    let check = exp_ad(&s, h, max_degree)?;
    let expect = nf.to_weyl_poly().truncate(max_degree);
    if check != expect {
        return Err(NormalFormError::Inconsistency(format!(
            "normal form mismatch after reduction: residual {}",
            &check - &expect
        )));
    }
    Ok((nf, Generator { s }))
}

/// Forward normal form of a potential jet; `E₀` is copied onto the result.
pub fn jet_normal_form(
    jet: &PotentialJet,
    max_degree: u32,
) -> Result<(NormalFormSeries, Generator), NormalFormError> {
    let (mut nf, g) = birkhoff_forward(&jet_to_hamiltonian(jet), jet.sign, max_degree)?;
    nf.e0 = jet.e0.clone();
    Ok((nf, g))
}

/// Express a Weyl-symbol normal form in operator powers: find `b̂_{j,k}`
/// with `Σ b̂_{j,k} ħ^{2j} (Ω^{⋆k}) = Ω + Σ b_{j,k} ħ^{2j} Ω^k` as symbols,
/// where `Ω^{⋆k}` is the k-th star power. The change of basis is triangular
/// in `k` and inverted exactly.
pub fn weyl_to_functional(nf: &NormalFormSeries) -> FunctionalNormalForm {
    let k_max = nf.iter().map(|((_, k), _)| *k).max().unwrap_or(0).max(1);
    let omega = WeylPoly::omega(nf.sign);

    // star powers expressed in (j', k') coordinates: Ω^{⋆k} = Σ γ ħ^{2j'} Ω^{k'}
    let mut star_coords: Vec<BTreeMap<(u32, u32), Rat>> = Vec::with_capacity(k_max as usize + 1);
    let mut star_pow = WeylPoly::one();
    for k in 0..=k_max {
        star_coords.push(omega_coordinates(&star_pow, nf.sign));
        if k < k_max {
            star_pow = crate::weyl::star_product(&omega, &star_pow, 2 * (k + 1))
                .expect("star powers of the oscillator are real");
        }
    }

    // symbol-side coordinates, leading Ω included
    let mut c: BTreeMap<(u32, u32), Rat> = BTreeMap::new();
    c.insert((0, 1), Rat::one());
    for ((j, k), v) in nf.iter() {
        c.insert((*j, *k), v.clone());
    }

    let mut bhat: BTreeMap<(u32, u32), Rat> = BTreeMap::new();
    for k in (0..=k_max).rev() {
        let slots: Vec<u32> = c
            .iter()
            .filter(|(&(_, kk), v)| kk == k && !v.is_zero())
            .map(|(&(j, _), _)| j)
            .collect();
        for j in slots {
            let coeff = c.get(&(j, k)).cloned().unwrap_or_else(Rat::zero);
            if coeff.is_zero() {
                continue;
            }
            bhat.insert((j, k), coeff.clone());
            // subtracting the full expansion zeroes the (j, k) slot itself
            // through its leading element γ_{0,k} = 1
            for ((dj, dk), gamma) in &star_coords[k as usize] {
                let slot = (j + dj, *dk);
                let delta = gamma * &coeff;
                let entry = c.entry(slot).or_insert_with(Rat::zero);
                *entry = &*entry - &delta;
                if entry.is_zero() {
                    c.remove(&slot);
                }
            }
        }
    }
    assert!(
        c.values().all(Zero::is_zero),
        "functional conversion left a residue"
    );
    let leading = bhat.remove(&(0, 1));
    assert_eq!(
        leading,
        Some(Rat::one()),
        "leading oscillator term distorted"
    );
    bhat.retain(|_, v| !v.is_zero());
    FunctionalNormalForm {
        sign: nf.sign,
        e0: nf.e0.clone(),
        max_degree: nf.max_degree,
        b: bhat,
    }
}

/// Decompose a polynomial in `(Ω_σ, ħ²)` into `(j, k) → coefficient of
/// ħ^{2j} Ω^k`. Panics if the input is not such a polynomial.
fn omega_coordinates(p: &WeylPoly, sign: Sign) -> BTreeMap<(u32, u32), Rat> {
    let omega = WeylPoly::omega(sign);
    let mut rest = p.clone();
    let mut out = BTreeMap::new();
    while !rest.is_zero() {
        let (mo, coeff) = {
            let (mo, c) = rest
                .terms()
                .max_by_key(|(mo, _)| (mo.xxi_degree(), mo.l))
                .expect("nonzero polynomial has a leading term");
            (*mo, c.clone())
        };
        assert!(
            mo.l % 2 == 0 && mo.m == 0 && mo.n % 2 == 0,
            "not a polynomial in the oscillator: leading term x^{} xi^{} h^{}",
            mo.l,
            mo.m,
            mo.n
        );
        let k = mo.l / 2;
        let j = mo.n / 2;
        // Ω^k has x^{2k} coefficient (σ/2)^k
        let lead = rat(sign.as_int(), 2).pow(k as i32);
        let gamma = &coeff / &lead;
        rest = &rest - &omega.pow(k).mul_hbar_pow(2 * j).scaled(&gamma);
        out.insert((j, k), gamma);
    }
    out
}

// ---------------------------------------------------------------------------
// serialization
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct JetDto {
    pub sign: String,
    #[serde(rename = "E0", default, skip_serializing_if = "Option::is_none")]
    pub e0: Option<String>,
    pub a: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoeffDto {
    pub j: u32,
    pub k: u32,
    pub coeff: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NormalFormDto {
    pub sign: String,
    #[serde(rename = "E0")]
    pub e0: String,
    pub max_degree: u32,
    pub b: Vec<CoeffDto>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParseError {
    #[error("unrecognized sign {0:?} (expected \"+\" or \"-\")")]
    Sign(String),
    #[error(transparent)]
    Rational(#[from] RatParseError),
    #[error("coefficient ({j},{k}) outside truncation degree {max_degree}")]
    DegreeRange { j: u32, k: u32, max_degree: u32 },
}

impl PotentialJet {
    pub fn to_dto(&self) -> JetDto {
        JetDto {
            sign: self.sign.as_str().to_string(),
            e0: Some(format_rat(&self.e0)),
            a: self.coeffs.iter().map(format_rat).collect(),
        }
    }

    pub fn from_dto(dto: &JetDto) -> Result<Self, ParseError> {
        let sign = Sign::parse(&dto.sign).ok_or_else(|| ParseError::Sign(dto.sign.clone()))?;
        let e0 = match &dto.e0 {
            Some(s) => parse_rat(s)?,
            None => Rat::zero(),
        };
        let coeffs = dto
            .a
            .iter()
            .map(|s| parse_rat(s))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(PotentialJet::new(sign, e0, coeffs))
    }
}

impl NormalFormSeries {
    pub fn to_dto(&self) -> NormalFormDto {
        NormalFormDto {
            sign: self.sign.as_str().to_string(),
            e0: format_rat(&self.e0),
            max_degree: self.max_degree,
            b: self
                .b
                .iter()
                .map(|((j, k), c)| CoeffDto {
                    j: *j,
                    k: *k,
                    coeff: format_rat(c),
                })
                .collect(),
        }
    }

    pub fn from_dto(dto: &NormalFormDto) -> Result<Self, ParseError> {
        let sign = Sign::parse(&dto.sign).ok_or_else(|| ParseError::Sign(dto.sign.clone()))?;
        let mut nf = NormalFormSeries::new(sign, parse_rat(&dto.e0)?, dto.max_degree);
        for c in &dto.b {
            if 4 * c.j + 2 * c.k > dto.max_degree || 2 * c.j + c.k < 2 {
                return Err(ParseError::DegreeRange {
                    j: c.j,
                    k: c.k,
                    max_degree: dto.max_degree,
                });
            }
            nf.set(c.j, c.k, parse_rat(&c.coeff)?);
        }
        Ok(nf)
    }
}

impl FunctionalNormalForm {
    pub fn to_dto(&self) -> NormalFormDto {
        NormalFormDto {
            sign: self.sign.as_str().to_string(),
            e0: format_rat(&self.e0),
            max_degree: self.max_degree,
            b: self
                .b
                .iter()
                .map(|((j, k), c)| CoeffDto {
                    j: *j,
                    k: *k,
                    coeff: format_rat(c),
                })
                .collect(),
        }
    }
}

/// Taylor jet of the closed-form example `V(x) = ½(√(1+2x) − 1)²`, computed
/// exactly from the binomial series up to order `m`.
pub fn zoll_jet(m: u32) -> PotentialJet {
    assert!(m >= 2);
    // g(x) = √(1+2x) − 1 = Σ_{k≥1} C(1/2,k) 2^k x^k
    let mut g = vec![Rat::zero(); (m + 1) as usize];
    let mut binom = Rat::one(); // C(1/2, 0)
    let mut two_k = Rat::one();
    for k in 1..=m as i64 {
        binom =
            binom * (rat(1, 2) - Rat::from_integer((k - 1).into())) / Rat::from_integer(k.into());
        two_k *= Rat::from_integer(2.into());
        g[k as usize] = &binom * &two_k;
    }
    // V = ½ g²
    let mut v = vec![Rat::zero(); (m + 1) as usize];
    for i in 1..=m as usize {
        for jj in 1..=m as usize {
            if i + jj <= m as usize {
                v[i + jj] = &v[i + jj] + &(&g[i] * &g[jj]);
            }
        }
    }
    let half = rat(1, 2);
    let coeffs: Vec<Rat> = (3..=m as usize).map(|i| &v[i] * &half).collect();
    debug_assert_eq!(&v[2] * &half, rat(1, 2));
    PotentialJet::new(Sign::Plus, Rat::zero(), coeffs)
}
