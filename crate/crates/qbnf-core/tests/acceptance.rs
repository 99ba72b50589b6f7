//! Acceptance suite: one test per release criterion, each printing a
//! `[PASS]`/`[FAIL]` line (run with `--nocapture` to see them all).
//!
//! Every tolerance is pinned here; nothing is deferred to calibration.

use num_traits::{One, Signed, Zero};
use qbnf_core::dos::{auto_config, heaviside_jump_fit, log_singularity_fit};
use qbnf_core::inversion::{fit_stage, invert_qbnf, scale_jet};
use qbnf_core::normal_form::{
    birkhoff_forward, c_functional, jet_normal_form, sigma_poly, weyl_to_functional, zoll_jet,
    PotentialJet,
};
use qbnf_core::rational::{rat, rint, Rat};
use qbnf_core::rng::SplitMix64;
use qbnf_core::spectra::{kappa_arbitration, perturbation_oracle_exact, predicted_hbar2_coeff};
use qbnf_core::weyl::{bracket_j, star_product, Monomial, Sign, WeylPoly};
use std::time::Instant;

fn verdict(number: u32, what: &str, ok: bool, elapsed: std::time::Duration) {
    println!(
        "[{}] criterion {number}: {what} ({elapsed:.2?})",
        if ok { "PASS" } else { "FAIL" }
    );
    assert!(ok, "criterion {number} failed: {what}");
}

#[test]
fn c01_degree_four_classical_coefficient() {
    let t0 = Instant::now();
    let mut rng = SplitMix64::new(101);
    let mut ok = true;
    for _ in 0..20 {
        let a = rng.nonzero_rational(9, 7);
        let b = rng.rational(9, 7);
        let jet = PotentialJet::new(Sign::Plus, Rat::zero(), vec![a.clone(), b.clone()]);
        let (nf, _) = jet_normal_form(&jet, 4).unwrap();
        let want = &(&(&a * &a) * &rat(-15, 4)) + &(&b * &rat(3, 2));
        ok &= nf.get(0, 2) == want;
    }
    let elapsed = t0.elapsed();
    ok &= elapsed.as_secs_f64() < 1.0;
    verdict(
        1,
        "b_{0,2} = -(15/4)a^2 + (3/2)b exactly on 20 random pairs",
        ok,
        elapsed,
    );
}

#[test]
fn c02_hbar2_coefficient_arbitration() {
    let t0 = Instant::now();
    // exact part: a single kappa with b_{1,0} = kappa a^2 across random a
    let mut rng = SplitMix64::new(202);
    let kappa = rat(1, 2);
    let mut ok = true;
    for _ in 0..8 {
        let a = rng.nonzero_rational(9, 7);
        let jet = PotentialJet::new(Sign::Plus, Rat::zero(), vec![a.clone()]);
        let (nf, _) = jet_normal_form(&jet, 4).unwrap();
        ok &= nf.get(1, 0) == &(&a * &a) * &kappa;
    }
    // spectral arbitration: the computed kappa = 1/2 must beat the doubled
    // alternative (the classically quoted value) by at least one order
    let report = kappa_arbitration(&rat(3, 20), &[0.08, 0.04, 0.02, 0.01], 3, 6).unwrap();
    ok &= report.computed_selected && report.gap >= 1.0;
    let elapsed = t0.elapsed();
    ok &= elapsed.as_secs_f64() < 120.0;
    println!(
        "    kappa = 1/2: mean slope {:.2} vs alternative {:.2} (gap {:.2})",
        report.mean_slope_computed, report.mean_slope_alternative, report.gap
    );
    verdict(
        2,
        "b_{1,0} = a^2/2, selected over a^2 by >= 1 order",
        ok,
        elapsed,
    );
}

#[test]
fn c03_inversion_roundtrip_degree_ten() {
    let t0 = Instant::now();
    let mut rng = SplitMix64::new(303);
    let mut ok = true;
    for _ in 0..10 {
        let mut coeffs = vec![rng.nonzero_rational(3, 3)];
        for _ in 4..=10 {
            coeffs.push(rng.rational(3, 3));
        }
        let jet = PotentialJet::new(Sign::Plus, Rat::zero(), coeffs);
        let (nf, _) = jet_normal_form(&jet, 10).unwrap();
        let sign_choice = if jet.a(3).is_negative() {
            Sign::Minus
        } else {
            Sign::Plus
        };
        let (back, report) = invert_qbnf(&nf, sign_choice).unwrap();
        ok &= report.exact_sqrt && back.trimmed() == jet.trimmed();
    }
    let elapsed = t0.elapsed();
    ok &= elapsed.as_secs_f64() < 30.0;
    verdict(
        3,
        "invert(forward(jet)) = jet exactly, 10 random jets, degree 10",
        ok,
        elapsed,
    );
}

#[test]
fn c04_parity_and_homogeneity_degree_ten() {
    let t0 = Instant::now();
    let mut rng = SplitMix64::new(404);
    let mut coeffs = vec![rng.nonzero_rational(3, 3)];
    for _ in 4..=10 {
        coeffs.push(rng.rational(3, 3));
    }
    let jet = PotentialJet::new(Sign::Plus, Rat::zero(), coeffs);
    let (nf, _) = jet_normal_form(&jet, 10).unwrap();

    let reflected = scale_jet(&jet, &rint(-1)).unwrap();
    let (nfr, _) = jet_normal_form(&reflected, 10).unwrap();
    let mut ok = nf == nfr;

    for t in [rint(2), rint(-3), rat(1, 2)] {
        let scaled = scale_jet(&jet, &t).unwrap();
        let (nfs, _) = jet_normal_form(&scaled, 10).unwrap();
        ok &= nfs.iter().count() == nf.iter().count();
        for ((j, k), coeff) in nf.iter() {
            let mut factor = Rat::one();
            for _ in 0..(2 * (2 * j + k) - 2) {
                factor = &factor * &t;
            }
            ok &= nfs.get(*j, *k) == coeff * &factor;
        }
    }
    verdict(
        4,
        "parity invariance and t^{2(2j+k)-2} scaling, all 4j+2k <= 10",
        ok,
        t0.elapsed(),
    );
}

#[test]
fn c05_gauge_counterexample_degree_ten() {
    let t0 = Instant::now();
    // ½((ξ−3x²)² + x²) = Ω₊ − 3x²ξ + (9/2)x⁴
    let mut h = WeylPoly::omega(Sign::Plus);
    h.add_term(Monomial::new(2, 1, 0), rint(-3));
    h.add_term(Monomial::new(4, 0, 0), rat(9, 2));
    let (nf, _) = birkhoff_forward(&h, Sign::Plus, 10).unwrap();
    verdict(
        5,
        "gauge-trivial symbol has all b_{j,k} = 0 through degree 10",
        nf.is_trivial(),
        t0.elapsed(),
    );
}

#[test]
fn c06_zoll_potential_degree_ten() {
    let t0 = Instant::now();
    let jet = zoll_jet(10);
    let (nf, _) = jet_normal_form(&jet, 10).unwrap();
    let ok = nf.classical_part().is_empty() && nf.get(1, 0) == rat(1, 8);
    verdict(
        6,
        "square-root well: zero classical part, b_{1,0} = 1/8",
        ok,
        t0.elapsed(),
    );
}

#[test]
fn c07_induction_non_degeneracy() {
    let t0 = Instant::now();
    let prefix = PotentialJet::new(Sign::Plus, Rat::zero(), vec![rint(1)]);
    let mut ok = true;
    for n in 2..=6u32 {
        let model = fit_stage(&prefix, n).unwrap();
        ok &= !model.beta.is_zero() && !model.slope_a_2.is_zero();
        if n >= 3 {
            // the hbar^2 pathway runs through the obstruction of x^{2N-4},
            // with source strength (N-1)(2N^2-4N+3)/3: same sign, nonzero
            let nn = n as i64;
            let source = rat((nn - 1) * (2 * nn * nn - 4 * nn + 3), 3);
            let obstruction =
                c_functional(&WeylPoly::monomial(2 * n - 4, 0, 0, Rat::one()), Sign::Plus).unwrap();
            ok &= !obstruction.is_zero();
            ok &= model.delta(&rint(1)).is_positive() == (&source * &obstruction).is_positive();
        }
    }
    verdict(
        7,
        "beta_N != 0 and delta_N != 0 for N = 2..6, sign-consistent pathway",
        ok,
        t0.elapsed(),
    );
}

#[test]
fn c08_sigma_polynomials_through_eight() {
    let t0 = Instant::now();
    let mut ok = true;
    for n in 1..=8u32 {
        for sign in [Sign::Plus, Sign::Minus] {
            let sig = sigma_poly(n, sign);
            ok &= bracket_j(&WeylPoly::omega(sign), &sig, 1)
                == WeylPoly::monomial(2 * n - 1, 0, 0, Rat::one());
            ok &= sig.coeff(Monomial::new(2 * n - 2, 1, 0)) == -sign.as_rat();
            if n >= 2 {
                ok &= sig.coeff(Monomial::new(2 * n - 4, 3, 0)) == rat(-(2 * n as i64 - 2), 3);
            }
        }
    }
    verdict(
        8,
        "sigma polynomials: bracket identity and leading coefficients, N = 1..8",
        ok,
        t0.elapsed(),
    );
}

#[test]
fn c09_star_structure_and_functional_prediction() {
    let t0 = Instant::now();
    let mut rng = SplitMix64::new(909);
    let mut ok = true;

    // associativity at degree 10 on random oscillator polynomials
    let omega = WeylPoly::omega(Sign::Plus);
    for _ in 0..6 {
        let make = |rng: &mut SplitMix64| {
            let mut p = WeylPoly::constant(rng.rational(3, 2));
            for k in 1..=3u32 {
                p += &omega.pow(k).scaled(&rng.rational(3, 2));
            }
            p
        };
        let a = make(&mut rng);
        let b = make(&mut rng);
        let c = make(&mut rng);
        let left = star_product(&star_product(&a, &b, 10).unwrap(), &c, 10).unwrap();
        let right = star_product(&a, &star_product(&b, &c, 10).unwrap(), 10).unwrap();
        ok &= left == right;
    }

    // Ω ⋆ Ω = Ω² − ħ²/4 exactly
    let mut want = &omega * &omega;
    want.add_term(Monomial::new(0, 0, 2), rat(-1, 4));
    ok &= star_product(&omega, &omega, 8).unwrap() == want;

    // functional-form prediction matches the perturbation oracle at hbar^2
    // order, exact rational comparison, levels 0..=5
    for _ in 0..4 {
        let a = rng.rational(5, 4);
        let b = rng.rational(5, 4);
        let jet = PotentialJet::new(Sign::Plus, Rat::zero(), vec![a.clone(), b.clone()]);
        let (nf, _) = jet_normal_form(&jet, 4).unwrap();
        let fnf = weyl_to_functional(&nf);
        for n in 0..=5 {
            ok &= predicted_hbar2_coeff(&fnf, n) == perturbation_oracle_exact(&a, &b, n);
        }
    }
    verdict(
        9,
        "star associativity, oscillator star-square, oracle match at hbar^2",
        ok,
        t0.elapsed(),
    );
}

#[test]
fn c10_density_of_states_probes() {
    let t0 = Instant::now();
    let hbar = 0.005;
    let mut ok = true;

    // logarithmic singularity above a nondegenerate maximum
    let double_well = |x: f64| -0.5 * x * x + 0.25 * x.powi(4);
    let cfg = auto_config(&double_well, hbar, 0.25);
    let fit = log_singularity_fit(&double_well, 0.0, hbar, (0.03, 0.25), &cfg).unwrap();
    ok &= fit.rel_gap <= 0.10;
    println!(
        "    log fit: quantum {:.4} vs classical {:.4} (gap {:.2}%)",
        fit.coeff_quantum,
        fit.coeff_classical,
        100.0 * fit.rel_gap
    );

    // Heaviside jump at a nondegenerate minimum
    let well = |x: f64| 0.5 * x * x;
    let cfg = auto_config(&well, hbar, 0.4);
    let jump = heaviside_jump_fit(&well, 0.0, hbar, (-0.15, 0.3), &cfg).unwrap();
    ok &= jump.detected && (jump.ratio - 1.0).abs() <= 0.05;
    println!("    jump ratio: {:.4}", jump.ratio);

    let elapsed = t0.elapsed();
    ok &= elapsed.as_secs_f64() < 300.0;
    verdict(
        10,
        "log-singularity fit within 10%, jump ratio within 5% at hbar = 0.005",
        ok,
        elapsed,
    );
}
