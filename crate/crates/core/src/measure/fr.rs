//! Polynomial-plus-exponentially-small-remainder decomposition of a density
//! and the associated tail-bound check.
//!
//! The controlled quantity is int_0^M e^l |density - P| dl, so the
//! polynomial part is fitted in an e^l-weighted least-squares sense: the
//! weight anchors the fit at the right end of the window, where the
//! polynomial must match the density to exponential accuracy, and keeps the
//! fitted polynomial from leaking into the decay-rate estimate. (A plain
//! unweighted fit absorbs part of the exponential term and its polynomial
//! error then dominates the tail, destroying the rate estimate.) The decay
//! rate itself is measured on unit-window integrals of |residual| over the
//! left half of the fit window, above the precision floor.

use super::grid::DensityGrid;
use crate::error::{Error, Result};
use crate::numeric::{linfit, polyfit_weighted};
use serde::{Deserialize, Serialize};

/// Fitted decomposition density ~ P(l) + residual with residual of
/// exponential type: int_0^M e^l |r| <= c0 (1+M)^c e^{(1-lambda) M}.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FrReport {
    /// Polynomial coefficients, ascending degree.
    #[serde(rename = "polyCoeffs")]
    pub poly_coeffs: Vec<f64>,
    /// density - P on the full grid.
    pub residual: DensityGrid,
    /// Estimated decay rate in (0, 1].
    #[serde(rename = "lambdaHat")]
    pub lambda_hat: f64,
    /// Fitted bound constants (c0, c).
    #[serde(rename = "boundConstants")]
    pub bound_constants: (f64, f64),
    #[serde(rename = "fitWindow")]
    pub fit_window: (f64, f64),
}

impl FrReport {
    pub fn poly_eval(&self, x: f64) -> f64 {
        let mut acc = 0.0;
        for &c in self.poly_coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    /// Degree of the fitted polynomial part (ignoring negligible leading
    /// coefficients).
    pub fn poly_degree(&self) -> usize {
        let scale = self
            .poly_coeffs
            .iter()
            .map(|c| c.abs())
            .fold(0.0f64, f64::max)
            .max(1e-300);
        self.poly_coeffs
            .iter()
            .rposition(|c| c.abs() > 1e-9 * scale)
            .unwrap_or(0)
    }
}

/// Cumulative integral of e^l |r(l)| from 0, sampled at bin right edges
/// (zero extension below the grid).
fn exp_weighted_cumulative(r: &DensityGrid) -> Vec<(f64, f64)> {
    let mut acc = 0.0;
    let mut out = Vec::with_capacity(r.n_bins());
    for j in 0..r.n_bins() {
        let c = r.center(j);
        acc += c.exp() * r.mass[j].abs() * r.bin_width;
        out.push((r.ell_min + (j + 1) as f64 * r.bin_width, acc));
    }
    out
}

/// Unit-window integral int_s^{s+1} |r|.
fn unit_window_integral(r: &DensityGrid, s: f64) -> f64 {
    let mut acc = 0.0;
    for j in 0..r.n_bins() {
        let c = r.center(j);
        if c >= s && c < s + 1.0 {
            acc += r.mass[j].abs() * r.bin_width;
        }
    }
    acc
}

/// Fit a polynomial part of degree <= max_degree on [w0, w1] and estimate
/// the decay rate of the remainder.
pub fn fr_decompose(
    grid: &DensityGrid,
    max_degree: usize,
    fit_window: (f64, f64),
) -> Result<FrReport> {
    let (w0, w1) = fit_window;
    if max_degree > 8 {
        return Err(Error::DegreeTooHigh(format!(
            "degree {max_degree} exceeds the conditioning limit 8"
        )));
    }
    if !(w1 > w0) || w0 < grid.ell_min {
        return Err(Error::InvalidArgument(format!(
            "invalid fit window [{w0}, {w1}]"
        )));
    }
    if grid.ell_max < w1 {
        return Err(Error::InvalidArgument(
            "grid must extend beyond the fit window".into(),
        ));
    }

    // e^l-weighted least squares on the window.
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut ws = Vec::new();
    for j in 0..grid.n_bins() {
        let c = grid.center(j);
        if c >= w0 && c <= w1 {
            xs.push(c);
            ys.push(grid.mass[j]);
            ws.push((c - w1).exp());
        }
    }
    let fit = polyfit_weighted(&xs, &ys, &ws, max_degree)?;
    if fit.cond > 1e12 {
        return Err(Error::DegreeTooHigh(format!(
            "normal equations condition {:.3e} exceeds 1e12",
            fit.cond
        )));
    }
    let poly_coeffs = fit.unscaled_coeffs();

    let mut residual = grid.clone();
    for j in 0..residual.n_bins() {
        let c = residual.center(j);
        residual.mass[j] = grid.mass[j] - fit.eval(c);
    }

    // Decay-rate estimate on the left half of the fit window: unit-window
    // integrals of |r|, restricted above the precision floor.
    let scale = grid.mass.iter().map(|m| m.abs()).fold(0.0f64, f64::max);
    let avg_se = {
        let n = grid.n_bins().max(1);
        grid.variance.iter().map(|v| v.sqrt()).sum::<f64>() / n as f64
    };
    let floor = (3.0 * avg_se).max(1e-12 * scale.max(1e-300));
    let est_end = w0 + 0.5 * (w1 - w0);
    let mut pts: Vec<(f64, f64)> = Vec::new();
    let mut s = w0;
    while s + 1.0 <= est_end.max(w0 + 2.0) && s + 1.0 <= w1 {
        let i = unit_window_integral(&residual, s);
        if i > floor {
            pts.push((s, i.ln()));
        }
        s += 0.5;
    }
    let lambda_hat = if pts.len() < 3 {
        // Residual at the precision floor: decay faster than resolvable.
        1.0
    } else {
        let (xs, ys): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
        let (slope, _) = linfit(&xs, &ys);
        (-slope).clamp(1e-6, 1.0)
    };

    // Bound constants: c = 1, c0 the smallest constant making the tail
    // bound hold on the whole grid.
    let c = 1.0;
    let cum = exp_weighted_cumulative(&residual);
    let mut c0: f64 = 1e-300;
    for &(m, e) in &cum {
        if m >= 1.0 {
            let denom = (1.0 + m).powf(c) * ((1.0 - lambda_hat) * m).exp();
            c0 = c0.max(e / denom);
        }
    }
    Ok(FrReport {
        poly_coeffs,
        residual,
        lambda_hat,
        bound_constants: (c0, c),
        fit_window,
    })
}

/// Check int_0^M e^l |r| <= c0 (1+M)^c e^{(1-lambda) M} at every grid value
/// M >= 1 (compared in logs with a tiny slack).
pub fn fr_bound_check(report: &FrReport) -> bool {
    let (c0, c) = report.bound_constants;
    if !(report.lambda_hat > 0.0 && report.lambda_hat <= 1.0) || !(c0 > 0.0) {
        return false;
    }
    let cum = exp_weighted_cumulative(&report.residual);
    for &(m, e) in &cum {
        if m < 1.0 || e == 0.0 {
            continue;
        }
        let ln_bound = c0.ln() + c * (1.0 + m).ln() + (1.0 - report.lambda_hat) * m;
        if e.ln() > ln_bound + 1e-9 {
            return false;
        }
    }
    true
}

/// Exact convolution of monomials x^{K_1} * ... * x^{K_n} against the linear
/// form x_1 + ... + x_n on the positive orthant:
/// l^{K+n-1} prod Gamma(K_i + 1) / Gamma(K + n), K = sum K_i.
pub fn linear_conv_oracle(degrees: &[u32], ell: f64) -> f64 {
    assert!(!degrees.is_empty() && degrees.len() <= 10);
    let k_total: u32 = degrees.iter().sum();
    let n = degrees.len() as u32;
    let factorial = |m: u32| -> f64 { (1..=m as u64).map(|v| v as f64).product::<f64>().max(1.0) };
    let num: f64 = degrees.iter().map(|&k| factorial(k)).product();
    let den = factorial(k_total + n - 1);
    ell.powi((k_total + n - 1) as i32) * num / den
}
