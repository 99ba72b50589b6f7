//! Randomized engine self-checks, reproducible from a seed.

use crate::CliError;
use num_traits::Zero;
use qbnf_core::inversion::{invert_qbnf, scale_jet};
use qbnf_core::normal_form::sigma_poly;
use qbnf_core::normal_form::{jet_normal_form, PotentialJet};
use qbnf_core::rational::{rint, Rat};
use qbnf_core::rng::SplitMix64;
use qbnf_core::weyl::{bracket_j, star_product, Sign, WeylPoly};

fn report(name: &str, ok: bool) -> Result<(), CliError> {
    println!("[{}] {name}", if ok { "PASS" } else { "FAIL" });
    if ok {
        Ok(())
    } else {
        Err(CliError::Internal(format!("selftest failed: {name}")))
    }
}

fn random_jet(rng: &mut SplitMix64, order: u32) -> PotentialJet {
    let mut coeffs = vec![rng.nonzero_rational(4, 4)];
    for _ in 4..=order {
        coeffs.push(rng.rational(4, 4));
    }
    PotentialJet::new(Sign::Plus, Rat::zero(), coeffs)
}

pub fn run(seed: u64, cases: u64) -> Result<(), CliError> {
    let mut rng = SplitMix64::new(seed);

    // first-terms coefficients on random rationals
    let mut ok = true;
    for _ in 0..cases {
        let a = rng.nonzero_rational(6, 5);
        let b = rng.rational(6, 5);
        let jet = PotentialJet::new(Sign::Plus, Rat::zero(), vec![a.clone(), b.clone()]);
        let (nf, _) = jet_normal_form(&jet, 4).map_err(|e| CliError::Internal(e.to_string()))?;
        let a2 = &a * &a;
        ok &= nf.get(0, 2)
            == &(&a2 * &qbnf_core::rational::rat(-15, 4)) + &(&b * &qbnf_core::rational::rat(3, 2));
        ok &= nf.get(1, 0) == &a2 * &qbnf_core::rational::rat(1, 2);
    }
    report("degree-4 coefficients on random jets", ok)?;

    // roundtrip through inversion at degree 6
    let mut ok = true;
    for _ in 0..cases {
        let jet = random_jet(&mut rng, 6);
        let (nf, _) = jet_normal_form(&jet, 6).map_err(|e| CliError::Internal(e.to_string()))?;
        let (back, _) =
            invert_qbnf(&nf, Sign::Plus).map_err(|e| CliError::Internal(e.to_string()))?;
        let want = if num_traits::Signed::is_negative(&jet.a(3)) {
            scale_jet(&jet, &rint(-1)).unwrap()
        } else {
            jet.clone()
        };
        ok &= back.trimmed() == want.trimmed();
    }
    report("inversion roundtrip at degree 6", ok)?;

    // parity invariance of the coefficients
    let mut ok = true;
    for _ in 0..cases {
        let jet = random_jet(&mut rng, 6);
        let reflected = scale_jet(&jet, &rint(-1)).unwrap();
        let (nf, _) = jet_normal_form(&jet, 6).map_err(|e| CliError::Internal(e.to_string()))?;
        let (nfr, _) =
            jet_normal_form(&reflected, 6).map_err(|e| CliError::Internal(e.to_string()))?;
        ok &= nf == nfr;
    }
    report("parity invariance at degree 6", ok)?;

    // star associativity on random polynomials in the oscillator
    let mut ok = true;
    for _ in 0..cases {
        let omega = WeylPoly::omega(Sign::Plus);
        let make = |rng: &mut SplitMix64| {
            let mut p = WeylPoly::constant(rng.rational(3, 2));
            for k in 1..=2u32 {
                p += &omega.pow(k).scaled(&rng.rational(3, 2));
            }
            p
        };
        let a = make(&mut rng);
        let b = make(&mut rng);
        let c = make(&mut rng);
        let d = 10;
        let left = star_product(&star_product(&a, &b, d).unwrap(), &c, d).unwrap();
        let right = star_product(&a, &star_product(&b, &c, d).unwrap(), d).unwrap();
        ok &= left == right;
    }
    report("star associativity on oscillator polynomials", ok)?;

    // bracket symmetry {a,b}_j = (−1)^j {b,a}_j
    let mut ok = true;
    for _ in 0..cases {
        let random_poly = |rng: &mut SplitMix64| {
            let mut p = WeylPoly::zero();
            for _ in 0..4 {
                let l = rng.below(4) as u32;
                let m = rng.below(4) as u32;
                p += &WeylPoly::monomial(l, m, 0, rng.rational(5, 3));
            }
            p
        };
        let a = random_poly(&mut rng);
        let b = random_poly(&mut rng);
        for j in 0..=5u32 {
            let lhs = bracket_j(&a, &b, j);
            let mut rhs = bracket_j(&b, &a, j);
            if j % 2 == 1 {
                rhs = rhs.scaled(&rint(-1));
            }
            ok &= lhs == rhs;
        }
    }
    report("bracket symmetry through j = 5", ok)?;

    // sigma-polynomial defining identity
    let ok = (1..=8u32).all(|n| {
        [Sign::Plus, Sign::Minus].into_iter().all(|sign| {
            let sig = sigma_poly(n, sign);
            bracket_j(&WeylPoly::omega(sign), &sig, 1)
                == WeylPoly::monomial(2 * n - 1, 0, 0, num_traits::One::one())
        })
    });
    report("sigma polynomials solve their bracket equation", ok)?;

    println!("selftest complete (seed {seed}, {cases} cases per family)");
    Ok(())
}
