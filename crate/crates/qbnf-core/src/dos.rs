//! Numerical density-of-states probes near a critical value of the
//! potential.
//!
//! Near a nondegenerate local maximum the smoothed level density carries a
//! logarithmic singularity whose strength matches the divergence of the
//! classical orbit period; near a local minimum it jumps like a Heaviside
//! step. Both effects are demonstrated at leading order by comparing the
//! eigenvalue comb of the Dirichlet solver against classical phase-space
//! quadrature; the subleading ħ-corrections are out of scope here.

use crate::spectra::{solve_eigenvalues_below, EigensolverConfig, SpectraError};
use serde::Serialize;
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DosError {
    #[error("eigenvalue computation did not converge across the window: {0}")]
    WindowError(String),
    #[error("singular model rejected: {0}")]
    FitError(String),
}

impl From<SpectraError> for DosError {
    fn from(e: SpectraError) -> Self {
        DosError::WindowError(e.to_string())
    }
}

/// Eigenvalue comb of one ħ inside an energy window, plus the Gaussian
/// kernel width used to smooth it into a density.
#[derive(Debug, Clone)]
pub struct DosSample {
    pub hbar: f64,
    pub e_lo: f64,
    pub e_hi: f64,
    pub eigenvalues: Vec<f64>,
    pub kernel_width: f64,
}

/// Test function given as samples on a grid; linear interpolation between
/// nodes, identically zero outside them.
#[derive(Debug, Clone)]
pub struct TestFunction {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
}

impl TestFunction {
    /// A smooth bump `exp(−1/(1−t²))`-shaped on `[lo, hi]`, sampled densely.
    pub fn bump(lo: f64, hi: f64, nodes: usize) -> Self {
        let mut grid = Vec::with_capacity(nodes);
        let mut values = Vec::with_capacity(nodes);
        for i in 0..nodes {
            let t = -1.0 + 2.0 * i as f64 / (nodes - 1) as f64;
            grid.push(0.5 * (lo + hi) + 0.5 * (hi - lo) * t);
            values.push(if t.abs() < 1.0 {
                (-1.0 / (1.0 - t * t)).exp()
            } else {
                0.0
            });
        }
        TestFunction { grid, values }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let n = self.grid.len();
        if n == 0 || x < self.grid[0] || x > self.grid[n - 1] {
            return 0.0;
        }
        let idx = match self
            .grid
            .binary_search_by(|g| g.partial_cmp(&x).expect("finite grid"))
        {
            Ok(i) => return self.values[i],
            Err(i) => i,
        };
        let (x0, x1) = (self.grid[idx - 1], self.grid[idx]);
        let t = (x - x0) / (x1 - x0);
        self.values[idx - 1] * (1.0 - t) + self.values[idx] * t
    }
}

/// Solve for every eigenvalue up to `e_hi` (plus kernel margin) and keep
/// the ones in the window.
pub fn build_dos_sample<V: Fn(f64) -> f64>(
    v: &V,
    hbar: f64,
    e_lo: f64,
    e_hi: f64,
    kernel_width: f64,
    cfg: &EigensolverConfig,
) -> Result<DosSample, DosError> {
    let margin = 6.0 * kernel_width;
    let sol = solve_eigenvalues_below(v, cfg, e_hi + margin)
        .map_err(|e| DosError::WindowError(e.to_string()))?;
    let eigenvalues = sol
        .eigenvalues
        .iter()
        .copied()
        .filter(|&ev| ev >= e_lo - margin && ev <= e_hi + margin)
        .collect();
    Ok(DosSample {
        hbar,
        e_lo,
        e_hi,
        eigenvalues,
        kernel_width,
    })
}

/// `D_ħ(f) = Σ_n f(λ_n)` over the sample's eigenvalues.
pub fn smoothed_dos(sample: &DosSample, f: &TestFunction) -> f64 {
    sample.eigenvalues.iter().map(|&ev| f.eval(ev)).sum()
}

/// Gaussian-smoothed level density at energy `e` (counts per unit energy).
pub fn smoothed_density(sample: &DosSample, e: f64) -> f64 {
    let w = sample.kernel_width;
    let norm = 1.0 / (w * (2.0 * PI).sqrt());
    sample
        .eigenvalues
        .iter()
        .map(|&ev| {
            let t = (e - ev) / w;
            norm * (-0.5 * t * t).exp()
        })
        .sum()
}

// ---------------------------------------------------------------------------
// classical oracles
// ---------------------------------------------------------------------------

/// Phase-space area `|{ ½ξ² + V(x) ≤ e }|` restricted to `x ∈ [x_lo, x_hi]`,
/// by midpoint quadrature of `2√(2(e−V))₊`.
pub fn phase_space_area<V: Fn(f64) -> f64>(v: &V, e: f64, x_lo: f64, x_hi: f64, n: usize) -> f64 {
    let h = (x_hi - x_lo) / n as f64;
    let mut acc = 0.0;
    for i in 0..n {
        let x = x_lo + (i as f64 + 0.5) * h;
        let gap = e - v(x);
        if gap > 0.0 {
            acc += 2.0 * (2.0 * gap).sqrt();
        }
    }
    acc * h
}

/// Orbit period `T(e) = dA/de` by central differencing of the area.
pub fn classical_period<V: Fn(f64) -> f64>(v: &V, e: f64, x_lo: f64, x_hi: f64) -> f64 {
    let de = 1e-4 * (1.0 + e.abs());
    let n = 120_000;
    (phase_space_area(v, e + de, x_lo, x_hi, n) - phase_space_area(v, e - de, x_lo, x_hi, n))
        / (2.0 * de)
}

/// `∫∫ f(½ξ² + V(x)) dx dξ` by midpoint quadrature on a box.
pub fn phase_space_integral<V: Fn(f64) -> f64>(
    f: &TestFunction,
    v: &V,
    x_half: f64,
    xi_half: f64,
    n: usize,
) -> f64 {
    let hx = 2.0 * x_half / n as f64;
    let hxi = 2.0 * xi_half / n as f64;
    let mut acc = 0.0;
    for i in 0..n {
        let x = -x_half + (i as f64 + 0.5) * hx;
        let vx = v(x);
        for k in 0..n {
            let xi = -xi_half + (k as f64 + 0.5) * hxi;
            acc += f.eval(0.5 * xi * xi + vx);
        }
    }
    acc * hx * hxi
}

// ---------------------------------------------------------------------------
// singularity fits
// ---------------------------------------------------------------------------

/// Least squares for `y ≈ c·g + d`; returns `(c, d, sse, r²)`.
fn fit_two_param(g: &[f64], y: &[f64]) -> (f64, f64, f64, f64) {
    let n = g.len() as f64;
    let sg: f64 = g.iter().sum();
    let sy: f64 = y.iter().sum();
    let sgg: f64 = g.iter().map(|a| a * a).sum();
    let sgy: f64 = g.iter().zip(y).map(|(a, b)| a * b).sum();
    let denom = n * sgg - sg * sg;
    let c = (n * sgy - sg * sy) / denom;
    let d = (sy - c * sg) / n;
    let mean = sy / n;
    let mut sse = 0.0;
    let mut sst = 0.0;
    for (a, b) in g.iter().zip(y) {
        let r = b - (c * a + d);
        sse += r * r;
        sst += (b - mean) * (b - mean);
    }
    let r2 = if sst > 0.0 { 1.0 - sse / sst } else { 0.0 };
    (c, d, sse, r2)
}

#[derive(Debug, Clone, Serialize)]
pub struct LogSingularityFit {
    pub hbar: f64,
    /// Coefficient of `|log(E−E₀)|` in `(2πħ)·(smoothed level density)`.
    pub coeff_quantum: f64,
    /// Same fit applied to the kernel-smoothed classical period.
    pub coeff_classical: f64,
    pub background: f64,
    pub r_squared: f64,
    pub rel_gap: f64,
    /// `(E, density)` pairs of the quantum side, for plotting.
    pub samples: Vec<(f64, f64)>,
}

/// Fit `c·|log(E−E₀)| + d` to the scaled smoothed level density on a grid
/// right of a nondegenerate local maximum with critical value `e0`, and to
/// the identically smoothed classical period for comparison.
///
/// Rejects the fit when the log model does not beat a linear background
/// model or the residual structure is poor.
pub fn log_singularity_fit<V: Fn(f64) -> f64>(
    v: &V,
    e0: f64,
    hbar: f64,
    window: (f64, f64),
    cfg: &EigensolverConfig,
) -> Result<LogSingularityFit, DosError> {
    let (w_lo, w_hi) = window;
    if !(w_lo > 0.0 && w_hi > w_lo) {
        return Err(DosError::FitError("window must sit right of e0".into()));
    }
    let width = 0.15 * hbar.sqrt();
    let sample = build_dos_sample(v, hbar, e0 + w_lo, e0 + w_hi, width, cfg)?;
    if sample.eigenvalues.len() < 10 {
        return Err(DosError::WindowError(format!(
            "only {} eigenvalues in the window",
            sample.eigenvalues.len()
        )));
    }
    let m = 60usize;
    let mut grid = Vec::with_capacity(m);
    let mut g_log = Vec::with_capacity(m);
    let mut y_q = Vec::with_capacity(m);
    for i in 0..m {
        let e = e0 + w_lo + (w_hi - w_lo) * (i as f64 + 0.5) / m as f64;
        grid.push(e);
        g_log.push(-(e - e0).ln());
        y_q.push(2.0 * PI * hbar * smoothed_density(&sample, e));
    }

    // classical side: tabulate T(E) once, then smooth it with the same
    // Gaussian kernel. The table crosses E₀: the sub-barrier branch (both
    // wells) leaks into the window under the kernel exactly like the
    // sub-barrier eigenvalues do on the quantum side.
    let x_half = box_half_width_for(v, e0 + w_hi);
    let table_lo = e0 + w_lo - 6.0 * width;
    let table_hi = e0 + w_hi + 6.0 * width;
    let table_n = 400usize;
    let table: Vec<(f64, f64)> = (0..table_n)
        .map(|i| {
            let e = table_lo + (table_hi - table_lo) * (i as f64 + 0.5) / table_n as f64;
            (e, classical_period(v, e, -x_half, x_half))
        })
        .collect();
    let period = |e: f64| -> f64 {
        let step = (table_hi - table_lo) / table_n as f64;
        let pos = ((e - table_lo) / step - 0.5).clamp(0.0, (table_n - 1) as f64);
        let i = (pos as usize).min(table_n - 2);
        let t = pos - i as f64;
        table[i].1 * (1.0 - t) + table[i + 1].1 * t
    };
    let y_cl: Vec<f64> = grid
        .iter()
        .map(|&e| gauss_convolve(&period, e, width, table_lo - 1.0))
        .collect();

    let (c_q, d_q, sse_log, r2) = fit_two_param(&g_log, &y_q);
    let (c_cl, _, _, _) = fit_two_param(&g_log, &y_cl);

    // competing smooth background model with the same parameter count
    let g_lin: Vec<f64> = grid.iter().map(|&e| e - e0).collect();
    let (_, _, sse_lin, _) = fit_two_param(&g_lin, &y_q);
    if sse_log >= sse_lin {
        return Err(DosError::FitError(
            "linear background model beats the log model".into(),
        ));
    }
    if c_q <= 0.0 || r2 < 0.9 {
        return Err(DosError::FitError(format!(
            "log model not selected: c = {c_q:.4}, R^2 = {r2:.4}"
        )));
    }
    let samples = grid
        .iter()
        .zip(&y_q)
        .map(|(&e, &y)| (e, y / (2.0 * PI * hbar)))
        .collect();
    Ok(LogSingularityFit {
        hbar,
        coeff_quantum: c_q,
        coeff_classical: c_cl,
        background: d_q,
        r_squared: r2,
        rel_gap: (c_q / c_cl - 1.0).abs(),
        samples,
    })
}

/// Kernel-weighted average of a function of energy, avoiding the singular
/// point `e0` by half a quadrature step.
fn gauss_convolve<F: Fn(f64) -> f64>(f: &F, e: f64, width: f64, e0: f64) -> f64 {
    let span = 5.0 * width;
    let n = 80usize;
    let h = 2.0 * span / n as f64;
    let norm = 1.0 / (width * (2.0 * PI).sqrt());
    let mut acc = 0.0;
    for i in 0..n {
        let ep = e - span + (i as f64 + 0.5) * h;
        if ep <= e0 {
            continue;
        }
        let t = (e - ep) / width;
        acc += f(ep) * norm * (-0.5 * t * t).exp();
    }
    acc * h
}

/// Solver configuration sized for a density-of-states window: stretched
/// box wide enough to hold the classical region below `e_max`, grid fine
/// enough for the fastest oscillation in it.
pub fn auto_config<V: Fn(f64) -> f64>(v: &V, hbar: f64, e_max: f64) -> EigensolverConfig {
    let x_half = box_half_width_for(v, e_max);
    let y_half = x_half / hbar.sqrt();
    let depth = (0..200)
        .map(|i| v(-x_half + 2.0 * x_half * i as f64 / 199.0))
        .fold(f64::INFINITY, f64::min);
    let p_max = (2.0 * (e_max - depth).max(0.5) / hbar).sqrt();
    let n = ((y_half * p_max * 4.0) as usize).clamp(2000, 30000);
    EigensolverConfig::new(hbar, 1).with_box(y_half, n)
}

fn box_half_width_for<V: Fn(f64) -> f64>(v: &V, e_max: f64) -> f64 {
    // walk outwards until the potential clears the window comfortably
    let mut x = 1.0;
    while (v(x) < e_max + 1.0 || v(-x) < e_max + 1.0) && x < 64.0 {
        x *= 1.25;
    }
    x
}

#[derive(Debug, Clone, Serialize)]
pub struct HeavisideJumpFit {
    pub hbar: f64,
    /// Whether the window straddles the critical value.
    pub straddles: bool,
    /// ħ·(level density above E₀) − ħ·(level density below E₀); the leading
    /// step has unit dimensionless amplitude.
    pub ratio: f64,
    pub detected: bool,
    pub counts_below: usize,
    pub counts_above: usize,
}

/// Measure the Heaviside step of the level density at a nondegenerate local
/// minimum with critical value `e0`. The dimensionless jump ratio tends to
/// 1 as ħ → 0 when the window straddles `e0`, and no jump is detected when
/// the window sits strictly above it.
pub fn heaviside_jump_fit<V: Fn(f64) -> f64>(
    v: &V,
    e0: f64,
    hbar: f64,
    window: (f64, f64),
    cfg: &EigensolverConfig,
) -> Result<HeavisideJumpFit, DosError> {
    let (e_lo, e_hi) = window;
    if e_hi <= e_lo {
        return Err(DosError::FitError("empty window".into()));
    }
    let sample = build_dos_sample(v, hbar, e_lo, e_hi, 0.0, cfg)?;
    let straddles = e_lo < e0 && e0 < e_hi;
    let (split, lo_width, hi_width) = if straddles {
        (e0, e0 - e_lo, e_hi - e0)
    } else {
        let mid = 0.5 * (e_lo + e_hi);
        (mid, mid - e_lo, e_hi - mid)
    };
    let below = sample
        .eigenvalues
        .iter()
        .filter(|&&ev| ev >= e_lo && ev < split)
        .count();
    let above = sample
        .eigenvalues
        .iter()
        .filter(|&&ev| ev >= split && ev <= e_hi)
        .count();
    let density_below = below as f64 / lo_width;
    let density_above = above as f64 / hi_width;
    let ratio = hbar * (density_above - density_below);
    Ok(HeavisideJumpFit {
        hbar,
        straddles,
        ratio,
        detected: straddles && ratio > 0.5,
        counts_below: below,
        counts_above: above,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn harmonic(x: f64) -> f64 {
        0.5 * x * x
    }

    fn double_well(x: f64) -> f64 {
        -0.5 * x * x + 0.25 * x.powi(4)
    }

    fn dos_cfg(hbar: f64, e_max: f64, v: &impl Fn(f64) -> f64) -> EigensolverConfig {
        // stretched box wide enough for the window in either potential
        let x_half = box_half_width_for(v, e_max);
        let y_half = x_half / hbar.sqrt();
        let n =
            ((y_half * (2.0 * (e_max - (-0.3)) / hbar).sqrt() * 6.0) as usize).clamp(2000, 24000);
        EigensolverConfig::new(hbar, 1).with_box(y_half, n)
    }

    #[test]
    fn zero_test_function_counts_nothing() {
        let sample = DosSample {
            hbar: 0.1,
            e_lo: 0.0,
            e_hi: 1.0,
            eigenvalues: vec![0.05, 0.15, 0.25],
            kernel_width: 0.01,
        };
        let f = TestFunction {
            grid: vec![0.0, 1.0],
            values: vec![0.0, 0.0],
        };
        assert_eq!(smoothed_dos(&sample, &f), 0.0);
    }

    #[test]
    fn bump_isolates_a_single_level() {
        let hbar = 0.1;
        let cfg = dos_cfg(hbar, 0.5, &harmonic);
        let sample = build_dos_sample(&harmonic, hbar, 0.9 * hbar, 1.6 * hbar, 0.0, &cfg).unwrap();
        let f = TestFunction::bump(1.2 * hbar, 1.8 * hbar, 201);
        // only n = 1 at 1.5ħ lies in the support
        let got = smoothed_dos(&sample, &f);
        assert!((got - f.eval(1.5 * hbar)).abs() < 1e-6, "got {got}");
    }

    #[test]
    fn weyl_law_at_leading_order() {
        let hbar = 0.01;
        let cfg = dos_cfg(hbar, 0.5, &harmonic);
        let sample = build_dos_sample(&harmonic, hbar, 0.05, 0.35, 0.0, &cfg).unwrap();
        let f = TestFunction::bump(0.1, 0.3, 801);
        let quantum = 2.0 * PI * hbar * smoothed_dos(&sample, &f);
        let classical = phase_space_integral(&f, &harmonic, 1.2, 1.2, 1200);
        let rel = (quantum / classical - 1.0).abs();
        assert!(rel < 0.03, "relative error {rel}");
    }

    #[test]
    fn regular_window_density_matches_period() {
        let hbar = 0.01;
        let cfg = dos_cfg(hbar, 0.5, &harmonic);
        let sample = build_dos_sample(&harmonic, hbar, 0.1, 0.2, 0.02, &cfg).unwrap();
        let density = smoothed_density(&sample, 0.15);
        let period = classical_period(&harmonic, 0.15, -2.0, 2.0);
        assert!((period - 2.0 * PI).abs() < 1e-3);
        let rel = (2.0 * PI * hbar * density / period - 1.0).abs();
        assert!(rel < 0.05, "relative error {rel}");
    }

    #[test]
    fn harmonic_window_has_no_log_singularity() {
        let hbar = 0.01;
        let cfg = dos_cfg(hbar, 0.5, &harmonic);
        let err = log_singularity_fit(&harmonic, 0.0, hbar, (0.05, 0.25), &cfg);
        assert!(err.is_err(), "log model should be rejected: {err:?}");
    }

    #[test]
    fn double_well_barrier_top_is_logarithmic() {
        let hbar = 0.008;
        let cfg = dos_cfg(hbar, 0.3, &double_well);
        let fit = log_singularity_fit(&double_well, 0.0, hbar, (0.03, 0.25), &cfg).unwrap();
        assert!(
            fit.rel_gap < 0.10,
            "quantum {} vs classical {} (gap {})",
            fit.coeff_quantum,
            fit.coeff_classical,
            fit.rel_gap
        );
    }

    #[test]
    fn curvature_scaling_of_the_classical_coefficient() {
        // doubling |V''(0)| scales the log coefficient by 1/√2
        let v1 = |x: f64| -0.5 * x * x + 0.25 * x.powi(4);
        let v2 = |x: f64| -x * x + 0.25 * x.powi(4);
        let window: Vec<f64> = (0..40).map(|i| 0.02 + 0.18 * i as f64 / 39.0).collect();
        let fit_classical = |v: &dyn Fn(f64) -> f64| -> f64 {
            let x_half = box_half_width_for(&v, 0.3);
            let g: Vec<f64> = window.iter().map(|&e| -(e).ln()).collect();
            let y: Vec<f64> = window
                .iter()
                .map(|&e| classical_period(&v, e, -x_half, x_half))
                .collect();
            fit_two_param(&g, &y).0
        };
        let c1 = fit_classical(&v1);
        let c2 = fit_classical(&v2);
        let expect = 1.0 / 2.0f64.sqrt();
        assert!(
            (c2 / c1 - expect).abs() < 0.06,
            "ratio {} vs {expect}",
            c2 / c1
        );
        // absolute normalization: c ≈ 2/√|V''(0)|
        assert!((c1 - 2.0).abs() < 0.25, "c1 = {c1}");
    }

    #[test]
    fn minimum_jump_ratio_tends_to_one() {
        let hbar = 0.01;
        let cfg = dos_cfg(hbar, 0.5, &harmonic);
        let fit = heaviside_jump_fit(&harmonic, 0.0, hbar, (-0.15, 0.3), &cfg).unwrap();
        assert!(fit.straddles && fit.detected);
        assert!((fit.ratio - 1.0).abs() < 0.05, "ratio {}", fit.ratio);
        assert_eq!(fit.counts_below, 0);
    }

    #[test]
    fn window_above_minimum_sees_no_jump() {
        let hbar = 0.01;
        let cfg = dos_cfg(hbar, 0.6, &harmonic);
        let fit = heaviside_jump_fit(&harmonic, 0.0, hbar, (0.2, 0.5), &cfg).unwrap();
        assert!(!fit.straddles);
        assert!(!fit.detected);
        assert!(fit.ratio.abs() < 0.2, "ratio {}", fit.ratio);
    }

    #[test]
    fn cubic_perturbation_keeps_leading_jump() {
        let hbar = 0.01;
        let v = |x: f64| 0.5 * x * x + 0.1 * x * x * x;
        let cfg = dos_cfg(hbar, 0.5, &v);
        let fit = heaviside_jump_fit(&v, 0.0, hbar, (-0.15, 0.3), &cfg).unwrap();
        assert!(fit.detected);
        assert!((fit.ratio - 1.0).abs() < 0.05, "ratio {}", fit.ratio);
    }
}
