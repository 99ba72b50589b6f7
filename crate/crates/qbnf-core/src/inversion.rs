//! Recovering the potential jet from normal-form data.
//!
//! The inverse map is built by probing the implemented forward engine
//! rather than by transcribing closed-form induction coefficients: at each
//! stage `N` the pair `(a_{2N−1}, a_{2N})` enters the freshly determined
//! coefficients `(b_{0,N}, b_{1,N−2})` affinely (for `N = 2`, quadratically
//! in `a₃`, which the 0/1 probes handle the same way), so three forward
//! evaluations pin the stage model exactly and a fourth checks it. This
//! makes `invert ∘ forward = id` hold by construction whenever the forward
//! engine is self-consistent.

use crate::normal_form::{jet_normal_form, NormalFormError, NormalFormSeries, PotentialJet};
use crate::rational::{format_rat, sqrt_exact, sqrt_floor, Rat};
use crate::weyl::Sign;
use num_traits::{Signed, Zero};
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum InversionError {
    #[error("b_{{1,0}} is negative; not an elliptic normal form")]
    NegativeDiscriminant,
    #[error("recovered a3 = 0; inversion beyond a4 is not attempted")]
    DegenerateA3,
    #[error("stage {0} system is singular; forward engine violated its structure")]
    SingularStage(u32),
    #[error("forward map failed affineness probe at stage {0}")]
    EngineInconsistency(u32),
    #[error("jet scaling factor must be nonzero")]
    ZeroScale,
    #[error(transparent)]
    NormalForm(#[from] NormalFormError),
}

/// Fitted affine response of `(b_{0,N}, b_{1,N−2})` to the stage probes
/// `(a_{2N−1}, a_{2N})` on top of a fixed jet prefix.
///
/// `slope_a_*` are the raw responses to `a_{2N−1}`; for `N ≥ 3` they factor
/// as `γ_N·a₃` and `δ_N·a₃`, while for `N = 2` they are the pure-square
/// responses (the probe values 0/1 make `a²` look affine). `beta` is the
/// response of `b_{0,N}` to `a_{2N}` and never vanishes.
#[derive(Debug, Clone, Serialize)]
pub struct ProbeAffineModel {
    pub stage: u32,
    #[serde(serialize_with = "ser_rat")]
    pub known_0: Rat,
    #[serde(serialize_with = "ser_rat")]
    pub known_2: Rat,
    #[serde(serialize_with = "ser_rat")]
    pub slope_a_0: Rat,
    #[serde(serialize_with = "ser_rat")]
    pub beta: Rat,
    #[serde(serialize_with = "ser_rat")]
    pub slope_a_2: Rat,
    #[serde(serialize_with = "ser_rat")]
    pub slope_b_2: Rat,
}

fn ser_rat<S: serde::Serializer>(r: &Rat, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&format_rat(r))
}

impl ProbeAffineModel {
    /// `γ_N = slope_a_0 / a₃` for stages `N ≥ 3` with `a₃ ≠ 0`.
    pub fn gamma(&self, a3: &Rat) -> Rat {
        &self.slope_a_0 / a3
    }

    /// `δ_N = slope_a_2 / a₃` for stages `N ≥ 3` with `a₃ ≠ 0`.
    pub fn delta(&self, a3: &Rat) -> Rat {
        &self.slope_a_2 / a3
    }
}

fn forward_pair(jet: &PotentialJet, n_stage: u32) -> Result<(Rat, Rat), NormalFormError> {
    let (nf, _) = jet_normal_form(jet, 2 * n_stage)?;
    Ok((nf.get(0, n_stage), nf.get(1, n_stage - 2)))
}

/// Probe the forward map at stage `N ≥ 2` over the given prefix (the jet
/// through `a_{2N−2}`; entries beyond it are ignored).
pub fn fit_stage(prefix: &PotentialJet, n_stage: u32) -> Result<ProbeAffineModel, InversionError> {
    assert!(n_stage >= 2, "stages start at N = 2");
    let base = prefix.resized(2 * n_stage);
    let probe = |pa: i64, pb: i64| -> Result<(Rat, Rat), NormalFormError> {
        let mut jet = base.clone();
        let idx = jet.coeffs.len();
        jet.coeffs[idx - 2] = crate::rational::rint(pa);
        jet.coeffs[idx - 1] = crate::rational::rint(pb);
        forward_pair(&jet, n_stage)
    };
    let (f00_0, f00_2) = probe(0, 0)?;
    let (f10_0, f10_2) = probe(1, 0)?;
    let (f01_0, f01_2) = probe(0, 1)?;
    let (f11_0, f11_2) = probe(1, 1)?;

    let slope_a_0 = &f10_0 - &f00_0;
    let beta = &f01_0 - &f00_0;
    let slope_a_2 = &f10_2 - &f00_2;
    let slope_b_2 = &f01_2 - &f00_2;

    // no a·b cross term can occur (its scaling weight is too high), so the
    // (1,1) probe must be reproduced exactly
    if f11_0 != &(&f00_0 + &slope_a_0) + &beta || f11_2 != &(&f00_2 + &slope_a_2) + &slope_b_2 {
        return Err(InversionError::EngineInconsistency(n_stage));
    }
    if beta.is_zero() {
        return Err(InversionError::EngineInconsistency(n_stage));
    }
    // the ħ² pathway must be open whenever a₃ ≠ 0 sits in the prefix
    // (for N = 2 the probe itself plays the role of a₃)
    let a3_active = n_stage == 2 || !base.a(3).is_zero();
    if a3_active && slope_a_2.is_zero() {
        return Err(InversionError::EngineInconsistency(n_stage));
    }
    Ok(ProbeAffineModel {
        stage: n_stage,
        known_0: f00_0,
        known_2: f00_2,
        slope_a_0,
        beta,
        slope_a_2,
        slope_b_2,
    })
}

/// Result of the base-stage recovery; `exact` is false when `b_{1,0}/κ`
/// is not a perfect rational square and `a3` is a floor approximation.
#[derive(Debug, Clone)]
pub struct RecoveredPair {
    pub a3: Rat,
    pub a4: Rat,
    pub exact: bool,
}

/// Recover `(a₃, a₄)` from `(b_{0,2}, b_{1,0})` for the chosen sign of `a₃`.
pub fn recover_a3_a4(
    b02: &Rat,
    b10: &Rat,
    sign_choice: Sign,
    sign: Sign,
) -> Result<RecoveredPair, InversionError> {
    if b10.is_negative() {
        return Err(InversionError::NegativeDiscriminant);
    }
    let stage2 = fit_stage(&PotentialJet::new(sign, Rat::zero(), vec![]), 2)?;
    // b₁₀ = κ a₃², b₀₂ = α a₃² + β a₄ with probed κ, α, β
    let a3_sq = b10 / &stage2.slope_a_2;
    if a3_sq.is_negative() {
        return Err(InversionError::NegativeDiscriminant);
    }
    let (root, exact) = match sqrt_exact(&a3_sq) {
        Some(r) => (r, true),
        None => (sqrt_floor(&a3_sq), false),
    };
    let a3 = &root * &sign_choice.as_rat();
    let a4 = &(b02 - &(&stage2.slope_a_0 * &a3_sq)) / &stage2.beta;
    Ok(RecoveredPair { a3, a4, exact })
}

/// Audit record of an inversion run: the fitted model per stage.
#[derive(Debug, Clone, Serialize)]
pub struct InversionReport {
    pub exact_sqrt: bool,
    pub stages: Vec<ProbeAffineModel>,
}

/// Recover the full jet from a normal form, stage by stage. Requires the
/// recovered `a₃` to be nonzero; the recovered jet extends to order
/// `2·⌊max_degree/2⌋`.
pub fn invert_qbnf(
    nf: &NormalFormSeries,
    sign_choice: Sign,
) -> Result<(PotentialJet, InversionReport), InversionError> {
    let n_max = nf.max_degree / 2;
    let pair = recover_a3_a4(&nf.get(0, 2), &nf.get(1, 0), sign_choice, nf.sign)?;
    if pair.a3.is_zero() {
        return Err(InversionError::DegenerateA3);
    }
    let mut jet = PotentialJet::new(
        nf.sign,
        nf.e0.clone(),
        vec![pair.a3.clone(), pair.a4.clone()],
    );
    let mut report = InversionReport {
        exact_sqrt: pair.exact,
        stages: Vec::new(),
    };
    for n_stage in 3..=n_max {
        let model = fit_stage(&jet, n_stage)?;
        // solve the exact 2×2 system for (a_{2N−1}, a_{2N})
        let rhs0 = &nf.get(0, n_stage) - &model.known_0;
        let rhs2 = &nf.get(1, n_stage - 2) - &model.known_2;
        let det = &(&model.slope_a_0 * &model.slope_b_2) - &(&model.beta * &model.slope_a_2);
        if det.is_zero() {
            return Err(InversionError::SingularStage(n_stage));
        }
        let a_odd = &(&(&rhs0 * &model.slope_b_2) - &(&model.beta * &rhs2)) / &det;
        let a_even = &(&(&model.slope_a_0 * &rhs2) - &(&rhs0 * &model.slope_a_2)) / &det;
        jet.coeffs.push(a_odd);
        jet.coeffs.push(a_even);
        report.stages.push(model);
    }
    Ok((jet, report))
}

/// The substitution `x → t·x` on the jet: `a_n → t^{n−2} a_n`.
pub fn scale_jet(jet: &PotentialJet, t: &Rat) -> Result<PotentialJet, InversionError> {
    if t.is_zero() {
        return Err(InversionError::ZeroScale);
    }
    let mut power = t.clone();
    let coeffs = jet
        .coeffs
        .iter()
        .map(|c| {
            let scaled = c * &power;
            power = &power * t;
            scaled
        })
        .collect();
    Ok(PotentialJet::new(jet.sign, jet.e0.clone(), coeffs))
}
