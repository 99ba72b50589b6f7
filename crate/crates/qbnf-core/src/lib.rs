//! Exact quantum Birkhoff normal forms for one-dimensional semiclassical
//! Schrödinger operators, the inverse map back to the potential jet, and
//! floating-point verification layers (eigensolver, perturbation oracle,
//! density-of-states probes).

#![allow(clippy::needless_range_loop)] // matrix code indexes row/column pairs

pub mod dos;
pub mod inversion;
pub mod normal_form;
pub mod rational;
pub mod rng;
pub mod spectra;
pub mod weyl;

pub use inversion::{fit_stage, invert_qbnf, recover_a3_a4, scale_jet};
pub use normal_form::{
    birkhoff_forward, c_functional, homological_solve, jet_normal_form, jet_to_hamiltonian,
    sigma_poly, weyl_to_functional, FunctionalNormalForm, NormalFormSeries, PotentialJet,
};
pub use rational::Rat;
pub use weyl::{ad_series, bracket_j, exp_ad, star_product, Monomial, Sign, WeylPoly};
