//! Length functions over Fenchel-Nielsen coordinates and their structural
//! probes: the once-holed-torus coordinate change cross-check, twist-origin
//! calibration, monotonicity/properness probes in boundary lengths, ray
//! asymptotics, and positive exponential-sum fits for single-pants loops.

use crate::error::{Error, Result};
use crate::hypmat::{trace_signed, trace_to_length};
use crate::loops::{holonomy_loop, holonomy_pants, LoopSpec, PantsWord, SurfaceGraph};
use crate::numeric::{golden_min, linfit, nnls, stable_acosh};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// A point of Teichmueller space in Fenchel-Nielsen coordinates: (length,
/// twist) per interior curve, length per boundary curve.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FnPoint {
    #[serde(default)]
    pub interior: BTreeMap<usize, (f64, f64)>,
    #[serde(default)]
    pub boundary: BTreeMap<usize, f64>,
}

impl FnPoint {
    /// Check the point covers exactly the graph's curves with valid values.
    pub fn validate(&self, surface: &SurfaceGraph) -> Result<()> {
        for (c, kind) in surface.curves.iter().enumerate() {
            match kind {
                crate::loops::CurveKind::Interior => {
                    let (l, _) = self.interior.get(&c).ok_or_else(|| {
                        Error::Configuration(format!("missing interior curve {c}"))
                    })?;
                    if !(*l > 0.0) || !l.is_finite() {
                        return Err(Error::Configuration(format!(
                            "interior curve {c} must have positive finite length, got {l}"
                        )));
                    }
                }
                crate::loops::CurveKind::Boundary => {
                    let l = self.boundary.get(&c).ok_or_else(|| {
                        Error::Configuration(format!("missing boundary curve {c}"))
                    })?;
                    if *l < 0.0 || !l.is_finite() {
                        return Err(Error::Configuration(format!(
                            "boundary curve {c} must have nonnegative length, got {l}"
                        )));
                    }
                }
            }
        }
        if self.interior.keys().any(|c| !surface.is_interior(*c))
            || self
                .boundary
                .keys()
                .any(|c| *c >= surface.curves.len() || surface.is_interior(*c))
        {
            return Err(Error::Configuration(
                "point assigns coordinates to curves not in the surface graph".into(),
            ));
        }
        Ok(())
    }

    pub fn curve_length(&self, surface: &SurfaceGraph, curve: usize) -> Result<f64> {
        if surface.is_interior(curve) {
            Ok(self
                .interior
                .get(&curve)
                .ok_or_else(|| Error::Configuration(format!("missing interior curve {curve}")))?
                .0)
        } else {
            self.boundary
                .get(&curve)
                .copied()
                .ok_or_else(|| Error::Configuration(format!("missing boundary curve {curve}")))
        }
    }

    pub fn interior_coords(&self, curve: usize) -> Result<(f64, f64)> {
        self.interior
            .get(&curve)
            .copied()
            .ok_or_else(|| Error::Configuration(format!("curve {curve} carries no twist")))
    }

    pub fn with_twist(&self, curve: usize, tau: f64) -> FnPoint {
        let mut out = self.clone();
        if let Some(entry) = out.interior.get_mut(&curve) {
            entry.1 = tau;
        }
        out
    }

    pub fn with_boundary(&self, curve: usize, l: f64) -> FnPoint {
        let mut out = self.clone();
        out.boundary.insert(curve, l);
        out
    }
}

/// Direction in Fenchel-Nielsen coordinate space (deltas; missing = 0).
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FnDirection {
    #[serde(default)]
    pub interior: BTreeMap<usize, (f64, f64)>,
    #[serde(default)]
    pub boundary: BTreeMap<usize, f64>,
}

impl FnDirection {
    pub fn is_zero(&self) -> bool {
        self.interior.values().all(|&(a, b)| a == 0.0 && b == 0.0)
            && self.boundary.values().all(|&v| v == 0.0)
    }

    pub fn offset(&self, base: &FnPoint, t: f64) -> FnPoint {
        let mut out = base.clone();
        for (c, &(dl, dt)) in &self.interior {
            if let Some(e) = out.interior.get_mut(c) {
                e.0 += t * dl;
                e.1 += t * dt;
            }
        }
        for (c, &dl) in &self.boundary {
            if let Some(e) = out.boundary.get_mut(c) {
                *e += t * dl;
            }
        }
        out
    }
}

/// Geodesic length of a loop at a Fenchel-Nielsen point.
pub fn loop_length(loop_spec: &LoopSpec, surface: &SurfaceGraph, point: &FnPoint) -> Result<f64> {
    let m = holonomy_loop(loop_spec, surface, point)?;
    trace_to_length(&trace_signed(&m))
}

/// Dual-curve length on the once-holed torus from the coordinate-change
/// formula: 2 arccosh( cosh(tau/2)/sinh(l_a/2) * sqrt((cosh l_a + cosh(L/2))/2) ),
/// evaluated in log space so large arguments do not overflow.
pub fn okai_dual_length(ell_a: f64, tau_a: f64, big_l: f64) -> f64 {
    assert!(ell_a > 0.0, "ell_a must be positive");
    use crate::numeric::{ln_cosh, ln_sinh, logaddexp};
    let ln_arg = ln_cosh(0.5 * tau_a) - ln_sinh(0.5 * ell_a)
        + 0.5 * (logaddexp(ln_cosh(ell_a), ln_cosh(0.5 * big_l)) - std::f64::consts::LN_2);
    if ln_arg > 40.0 {
        // arccosh(v) = ln(2v) - O(v^{-2}).
        2.0 * (ln_arg + std::f64::consts::LN_2)
    } else {
        // The expression is bounded below by coth(l_a/2) > 1.
        let arg = ln_arg.exp().max(1.0);
        2.0 * stable_acosh(arg)
    }
}

/// Twist value minimizing the loop length over a window, by golden-section
/// search to 1e-10. Coordinate-change comparisons are then run relative to
/// this origin. Fails when the minimum sits at the window edge.
pub fn calibrate_twist_origin(
    loop_spec: &LoopSpec,
    surface: &SurfaceGraph,
    point: &FnPoint,
    curve: usize,
    window: (f64, f64),
) -> Result<f64> {
    if !surface.is_interior(curve) {
        return Err(Error::InvalidArgument(format!(
            "curve {curve} carries no twist coordinate"
        )));
    }
    let (lo, hi) = window;
    if !(hi > lo) {
        return Err(Error::InvalidArgument("empty calibration window".into()));
    }
    let f = |tau: f64| -> f64 {
        loop_length(loop_spec, surface, &point.with_twist(curve, tau)).unwrap_or(f64::INFINITY)
    };
    let (tau0, _) = golden_min(f, lo, hi, 1e-10);
    let margin = 1e-3 * (hi - lo);
    if tau0 - lo < margin || hi - tau0 < margin {
        return Err(Error::CalibrationFailure(format!(
            "no interior length minimum in twist window [{lo}, {hi}]"
        )));
    }
    Ok(tau0)
}

/// Sampling grid for a boundary-growth probe.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProbeGrid {
    pub start: f64,
    pub stop: f64,
    pub steps: usize,
    /// Growth (final - initial) that counts as divergent; defaults to a
    /// quarter of the grid span (linear growth with slope >= 1/4).
    #[serde(default)]
    pub divergence_threshold: Option<f64>,
}

impl ProbeGrid {
    fn threshold(&self) -> f64 {
        self.divergence_threshold
            .unwrap_or(0.25 * (self.stop - self.start))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GrowthReport {
    pub monotone: bool,
    pub divergent: bool,
    pub samples: Vec<(f64, f64)>,
}

/// Sample the length function along an increasing boundary length:
/// `monotone` means no decrease beyond 1e-9 (relative), `divergent` means
/// growth past the grid's linear-growth threshold.
pub fn boundary_growth_probe(
    loop_spec: &LoopSpec,
    surface: &SurfaceGraph,
    point: &FnPoint,
    curve: usize,
    grid: &ProbeGrid,
) -> Result<GrowthReport> {
    if surface.is_interior(curve) {
        return Err(Error::InvalidArgument(format!(
            "boundary probe requires a boundary curve, got interior {curve}"
        )));
    }
    if grid.steps < 2 || !(grid.stop > grid.start) || grid.start < 0.0 {
        return Err(Error::InvalidArgument("invalid probe grid".into()));
    }
    let mut samples = Vec::with_capacity(grid.steps);
    for i in 0..grid.steps {
        let l = grid.start + (grid.stop - grid.start) * i as f64 / (grid.steps - 1) as f64;
        let len = loop_length(loop_spec, surface, &point.with_boundary(curve, l))?;
        samples.push((l, len));
    }
    let monotone = samples
        .windows(2)
        .all(|w| w[1].1 >= w[0].1 - 1e-9 * w[0].1.abs().max(1.0));
    let divergent = samples.last().unwrap().1 - samples[0].1 >= grid.threshold();
    Ok(GrowthReport {
        monotone,
        divergent,
        samples,
    })
}

/// Affine fit of the length function along a ray.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RayReport {
    /// Fitted growth rate per unit ray parameter.
    pub slope: f64,
    pub intercept: f64,
    /// Sup of |h - (slope t + intercept)| over the fitted window.
    #[serde(rename = "residualSup")]
    pub residual_sup: f64,
    pub samples: usize,
    pub skipped: usize,
}

/// Least-squares affine fit of h(base + t dir) over t in [t_max/2, t_max].
/// Non-hyperbolic samples are skipped and counted.
pub fn ray_asymptotics(
    loop_spec: &LoopSpec,
    surface: &SurfaceGraph,
    base: &FnPoint,
    direction: &FnDirection,
    t_max: f64,
    samples: usize,
) -> Result<RayReport> {
    if direction.is_zero() {
        return Err(Error::InvalidArgument("zero ray direction".into()));
    }
    if samples < 4 || !(t_max > 0.0) {
        return Err(Error::InvalidArgument("need t_max > 0 and >= 4 samples".into()));
    }
    let mut ts = Vec::new();
    let mut hs = Vec::new();
    let mut skipped = 0usize;
    for i in 0..samples {
        let t = 0.5 * t_max + 0.5 * t_max * i as f64 / (samples - 1) as f64;
        let p = direction.offset(base, t);
        p.validate(surface).map_err(|_| {
            Error::InvalidArgument(format!("ray leaves the valid region at t = {t}"))
        })?;
        match loop_length(loop_spec, surface, &p) {
            Ok(h) => {
                ts.push(t);
                hs.push(h);
            }
            Err(Error::NonHyperbolic { .. }) => skipped += 1,
            Err(e) => return Err(e),
        }
    }
    if ts.len() < 2 {
        return Err(Error::NumericFailure(
            "not enough hyperbolic samples along the ray".into(),
        ));
    }
    let (slope, intercept) = linfit(&ts, &hs);
    let residual_sup = ts
        .iter()
        .zip(&hs)
        .map(|(&t, &h)| (h - slope * t - intercept).abs())
        .fold(0.0f64, f64::max);
    Ok(RayReport {
        slope,
        intercept,
        residual_sup,
        samples: ts.len(),
        skipped,
    })
}

/// Linear form c_x x + c_y y + c_z z on boundary-length space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearForm3 {
    pub cx: f64,
    pub cy: f64,
    pub cz: f64,
}

impl LinearForm3 {
    pub fn eval(&self, x: f64, y: f64, z: f64) -> f64 {
        self.cx * x + self.cy * y + self.cz * z
    }
}

/// Fitted positive exponential sum: cosh(l/2) = sum_T a_T e^{T(x,y,z)} with
/// all coefficients strictly positive.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExpSumForm {
    pub terms: Vec<(f64, LinearForm3)>,
}

impl ExpSumForm {
    pub fn eval(&self, x: f64, y: f64, z: f64) -> f64 {
        self.terms
            .iter()
            .map(|(a, form)| a * form.eval(x, y, z).exp())
            .sum()
    }
}

/// Half-integer candidate forms sized to a word: coefficients i/2, j/2, k/2
/// with |i| up to the total a-exponent, |j| up to the total b-exponent and
/// |k| up to the number of ab-pairs.
pub fn candidate_forms_for_word(word: &PantsWord) -> Vec<LinearForm3> {
    let ea = word.total_abs_exponent(crate::hypmat::Letter::A).max(1) as i32;
    let eb = word.total_abs_exponent(crate::hypmat::Letter::B).max(1) as i32;
    let kz = ea.min(eb).max(1);
    let mut out = Vec::new();
    for i in -ea..=ea {
        for j in -eb..=eb {
            for k in -kz..=kz {
                out.push(LinearForm3 {
                    cx: 0.5 * i as f64,
                    cy: 0.5 * j as f64,
                    cz: 0.5 * k as f64,
                });
            }
        }
    }
    out
}

/// Nonnegative least squares of cosh(l_word/2) against exponentials of the
/// candidate forms, with a held-out residual check (relative, < 1e-6).
pub fn exp_sum_fit(
    word: &PantsWord,
    candidates: &[LinearForm3],
    grid: &[(f64, f64, f64)],
    holdout: &[(f64, f64, f64)],
) -> Result<ExpSumForm> {
    if candidates.is_empty() {
        return Err(Error::InvalidArgument("no candidate forms".into()));
    }
    if grid.len() < 10 * candidates.len() {
        return Err(Error::InvalidArgument(format!(
            "need at least 10x as many grid points as candidates ({} < {})",
            grid.len(),
            10 * candidates.len()
        )));
    }
    let target = |&(x, y, z): &(f64, f64, f64)| -> Result<f64> {
        let trig = crate::pants::solve_pants(x, y, z)?;
        let m = holonomy_pants(word, &trig)?;
        let tr = trace_signed(&m);
        Ok(0.5 * tr.log_abs.exp())
    };
    let mut rows = Vec::with_capacity(grid.len());
    let mut rhs = Vec::with_capacity(grid.len());
    for p in grid {
        rows.push(
            candidates
                .iter()
                .map(|f| f.eval(p.0, p.1, p.2).exp())
                .collect::<Vec<f64>>(),
        );
        rhs.push(target(p)?);
    }
    let coeffs = nnls(&rows, &rhs)?;
    let max_coeff = coeffs.iter().cloned().fold(0.0f64, f64::max);
    let keep = 1e-6 * max_coeff.max(1e-300);
    let support: Vec<usize> = (0..candidates.len()).filter(|&j| coeffs[j] > keep).collect();
    // Refit on the pruned support without the active-set regularization to
    // remove its bias from the retained coefficients.
    let m = support.len();
    let mut ata = vec![vec![0.0; m]; m];
    let mut atb = vec![0.0; m];
    for (row, &b) in rows.iter().zip(&rhs) {
        for (r, &jr) in support.iter().enumerate() {
            for (c, &jc) in support.iter().enumerate() {
                ata[r][c] += row[jr] * row[jc];
            }
            atb[r] += row[jr] * b;
        }
    }
    let (refit, _) = crate::numeric::solve_dense(ata, atb)?;
    let form = ExpSumForm {
        terms: support
            .iter()
            .zip(&refit)
            .filter(|(_, c)| **c > keep)
            .map(|(&j, &c)| (c, candidates[j]))
            .collect(),
    };
    // Held-out residual, relative.
    let mut worst = 0.0f64;
    for p in holdout {
        let t = target(p)?;
        let pred = form.eval(p.0, p.1, p.2);
        worst = worst.max((pred - t).abs() / t.abs().max(1e-300));
    }
    if worst >= 1e-6 {
        return Err(Error::FitFailure(format!(
            "held-out relative residual {worst:.3e} (candidate set too small?)"
        )));
    }
    Ok(form)
}

/// Deterministic sample triples in [lo, hi]^3 for exp-sum fitting grids.
pub fn sample_triples(n: usize, lo: f64, hi: f64, seed: u64) -> Vec<(f64, f64, f64)> {
    use rand::Rng;
    let mut rng = crate::rng::stream(seed, 0);
    (0..n)
        .map(|_| {
            (
                rng.gen_range(lo..hi),
                rng.gen_range(lo..hi),
                rng.gen_range(lo..hi),
            )
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypmat::Letter;
    use crate::loops::{CurveKind, Incursion, PantsNode};

    fn pants_surface() -> SurfaceGraph {
        SurfaceGraph::new(
            vec![PantsNode { slots: [0, 1, 2] }],
            vec![CurveKind::Boundary, CurveKind::Boundary, CurveKind::Boundary],
        )
        .unwrap()
    }

    fn pants_point(x: f64, y: f64, z: f64) -> FnPoint {
        let mut p = FnPoint::default();
        p.boundary.insert(0, x);
        p.boundary.insert(1, y);
        p.boundary.insert(2, z);
        p
    }

    fn fig8() -> LoopSpec {
        LoopSpec::single_pants(0, PantsWord::new(vec![(Letter::A, 1), (Letter::B, -1)]))
    }

    fn torus_surface() -> SurfaceGraph {
        SurfaceGraph::new(
            vec![PantsNode { slots: [0, 0, 1] }],
            vec![CurveKind::Interior, CurveKind::Boundary],
        )
        .unwrap()
    }

    fn torus_dual() -> LoopSpec {
        LoopSpec::from_incursions(vec![Incursion {
            pants: 0,
            entry: 0,
            exit: 1,
            word: PantsWord::empty(),
            m: 0,
            twist_sign: 1,
        }])
    }

    fn torus_point(ell: f64, tau: f64, big_l: f64) -> FnPoint {
        let mut p = FnPoint::default();
        p.interior.insert(0, (ell, tau));
        p.boundary.insert(1, big_l);
        p
    }

    #[test]
    fn okai_special_values() {
        // tau = 0, L = 0: cosh(l_b/2) = coth(l_a/2).
        for &ell in &[0.6, 1.3, 4.0] {
            let lb = okai_dual_length(ell, 0.0, 0.0);
            assert!(((0.5 * lb).cosh() - 1.0 / (0.5 * ell).tanh()).abs() < 1e-12);
        }
        // Self-dual point l_a = 2 arcsinh(1).
        let ella = 2.0 * 1f64.asinh();
        let lb = okai_dual_length(ella, 0.0, 0.0);
        assert!((lb - ella).abs() < 1e-12);
        // Even in the twist.
        assert_eq!(okai_dual_length(1.0, 0.7, 2.0), okai_dual_length(1.0, -0.7, 2.0));
    }

    #[test]
    fn loop_length_of_figure_eight_and_boundary_word() {
        let s = pants_surface();
        let p = pants_point(2.0, 2.0, 2.0);
        let l = loop_length(&fig8(), &s, &p).unwrap();
        let expect = 2.0 * (2.0 * 1f64.cosh() * 1f64.cosh() + 1f64.cosh()).acosh();
        assert!((l - expect).abs() < 1e-12);
        let ab = LoopSpec::single_pants(0, PantsWord::new(vec![(Letter::A, 1), (Letter::B, 1)]));
        let l = loop_length(&ab, &s, &pants_point(1.1, 0.4, 3.3)).unwrap();
        assert!((l - 3.3).abs() < 1e-10);
        // Infimum of the figure-eight length near the cusped limit.
        let l = loop_length(&fig8(), &s, &pants_point(1e-4, 1e-4, 0.0)).unwrap();
        assert!((l - 2.0 * 3f64.acosh()).abs() < 1e-4);
    }

    #[test]
    fn calibration_finds_twist_origin() {
        let s = torus_surface();
        let d = torus_dual();
        // Shift the twist by 0.9: the calibrated origin must be 0.9.
        let p = torus_point(1.5, 0.9, 1.0);
        let tau0 = calibrate_twist_origin(&d, &s, &p, 0, (-4.0, 4.0)).unwrap();
        // The argmin of a smooth minimum is resolvable only to ~sqrt(eps).
        assert!(tau0.abs() < 5e-7, "tau0 = {tau0}");
        // Two disjoint windows containing the minimum agree.
        let t1 = calibrate_twist_origin(&d, &s, &p, 0, (-3.0, 1.0)).unwrap();
        let t2 = calibrate_twist_origin(&d, &s, &p, 0, (-1.0, 3.0)).unwrap();
        assert!((t1 - t2).abs() < 1e-6);
        // Window without the minimum fails.
        assert!(calibrate_twist_origin(&d, &s, &p, 0, (2.0, 5.0)).is_err());
    }

    #[test]
    fn okai_agreement_after_calibration() {
        let s = torus_surface();
        let d = torus_dual();
        for &ell in &[0.7, 1.8, 4.5] {
            for &big_l in &[0.0, 1.0, 4.0] {
                let p = torus_point(ell, 0.0, big_l);
                let tau0 = calibrate_twist_origin(&d, &s, &p, 0, (-3.0 * ell, 3.0 * ell)).unwrap();
                for &tau in &[-2.5, -0.9, 0.0, 1.3, 2.9] {
                    let h = loop_length(&d, &s, &p.with_twist(0, tau0 + tau)).unwrap();
                    let o = okai_dual_length(ell, tau, big_l);
                    assert!(
                        (h - o).abs() < 1e-6 * o,
                        "ell={ell} L={big_l} tau={tau}: {h} vs {o}"
                    );
                }
            }
        }
    }

    #[test]
    fn growth_probe_on_figure_eight() {
        let s = pants_surface();
        let p = pants_point(2.0, 1.0, 1.0);
        let grid = ProbeGrid {
            start: 0.5,
            stop: 30.0,
            steps: 40,
            divergence_threshold: None,
        };
        for curve in [0usize, 1, 2] {
            let r = boundary_growth_probe(&fig8(), &s, &p, curve, &grid).unwrap();
            assert!(r.monotone && r.divergent, "curve {curve}: {r:?}");
        }
        // Boundary-parallel word depends only on z: flat in x, divergent in
        // z. The flat probe stops at 24: beyond that the e^{x/2}-scale
        // cancellation in the trace leaves fluctuations above the 1e-9
        // monotonicity gate.
        let flat_grid = ProbeGrid {
            start: 0.5,
            stop: 24.0,
            steps: 40,
            divergence_threshold: None,
        };
        let ab = LoopSpec::single_pants(0, PantsWord::new(vec![(Letter::A, 1), (Letter::B, 1)]));
        let r = boundary_growth_probe(&ab, &s, &p, 0, &flat_grid).unwrap();
        assert!(r.monotone && !r.divergent, "{:?}", r.samples.last());
        let r = boundary_growth_probe(&ab, &s, &p, 2, &grid).unwrap();
        assert!(r.monotone && r.divergent);
    }

    #[test]
    fn ray_slopes_match_direct_log_asymptotics() {
        let s = pants_surface();
        let base = pants_point(1.0, 1.2, 0.9);
        // Pure x direction: h ~ x + const.
        let mut dir = FnDirection::default();
        dir.boundary.insert(0, 1.0);
        let r = ray_asymptotics(&fig8(), &s, &base, &dir, 200.0, 60).unwrap();
        assert!((r.slope - 1.0).abs() < 1e-3, "slope {}", r.slope);
        assert!(r.residual_sup < 1e-2);
        // (1,1,0): slopes add.
        let mut dir = FnDirection::default();
        dir.boundary.insert(0, 1.0);
        dir.boundary.insert(1, 1.0);
        let r = ray_asymptotics(&fig8(), &s, &base, &dir, 200.0, 60).unwrap();
        assert!((r.slope - 2.0).abs() < 1e-3, "slope {}", r.slope);
        // Pure z direction: slope 1, cross-checked against a finite
        // difference of the closed form at T = 200.
        let mut dir = FnDirection::default();
        dir.boundary.insert(2, 1.0);
        let r = ray_asymptotics(&fig8(), &s, &base, &dir, 200.0, 60).unwrap();
        let h = |t: f64| {
            loop_length(&fig8(), &s, &dir.offset(&base, t)).unwrap()
        };
        let fd = (h(200.0) - h(100.0)) / 100.0;
        assert!((r.slope - fd).abs() < 1e-6, "slope {} vs fd {}", r.slope, fd);
        assert!((r.slope - 1.0).abs() < 1e-3);

        // Twist direction on the torus dual curve: slope 1 per unit tau
        // (cosh(l_b/2) grows like e^{tau/2}).
        let ts = torus_surface();
        let tp = torus_point(1.5, 0.0, 1.0);
        let mut dir = FnDirection::default();
        dir.interior.insert(0, (0.0, 1.0));
        let r = ray_asymptotics(&torus_dual(), &ts, &tp, &dir, 200.0, 60).unwrap();
        assert!((r.slope - 1.0).abs() < 1e-3, "slope {}", r.slope);
    }

    #[test]
    fn ray_residual_stabilizes_under_window_doubling() {
        let s = pants_surface();
        let base = pants_point(1.0, 1.2, 0.9);
        let mut dir = FnDirection::default();
        dir.boundary.insert(0, 1.0);
        dir.boundary.insert(2, 0.5);
        let r1 = ray_asymptotics(&fig8(), &s, &base, &dir, 100.0, 80).unwrap();
        let r2 = ray_asymptotics(&fig8(), &s, &base, &dir, 200.0, 80).unwrap();
        // Bounded correction term: the sup-residual must not grow as the
        // window doubles (here it decays, since h approaches its affine
        // asymptote exponentially fast along the ray).
        assert!(
            r2.residual_sup <= 1.1 * r1.residual_sup + 1e-12,
            "{} vs {}",
            r1.residual_sup,
            r2.residual_sup
        );
    }

    #[test]
    fn exp_sum_fit_recovers_figure_eight_expansion() {
        let w = PantsWord::new(vec![(Letter::A, 1), (Letter::B, -1)]);
        let candidates = candidate_forms_for_word(&w);
        let grid = sample_triples(10 * candidates.len(), 0.3, 2.5, 11);
        let holdout = sample_triples(50, 0.3, 2.5, 12);
        let fit = exp_sum_fit(&w, &candidates, &grid, &holdout).unwrap();
        // cosh(l/2) = 1/2 (e^{(x+y)/2} + e^{(x-y)/2} + e^{(y-x)/2} + e^{-(x+y)/2}
        //             + e^{z/2} + e^{-z/2}): six terms, all coefficients 1/2.
        assert_eq!(fit.terms.len(), 6, "{:?}", fit.terms);
        for (a, form) in &fit.terms {
            assert!((a - 0.5).abs() < 1e-6, "coeff {a} on {form:?}");
        }
        let expected_support = [
            (0.5, 0.5, 0.0),
            (0.5, -0.5, 0.0),
            (-0.5, 0.5, 0.0),
            (-0.5, -0.5, 0.0),
            (0.0, 0.0, 0.5),
            (0.0, 0.0, -0.5),
        ];
        for (cx, cy, cz) in expected_support {
            assert!(
                fit.terms
                    .iter()
                    .any(|(_, f)| f.cx == cx && f.cy == cy && f.cz == cz),
                "missing form ({cx},{cy},{cz})"
            );
        }
    }

    #[test]
    fn exp_sum_fit_boundary_word_and_idempotence() {
        let w = PantsWord::new(vec![(Letter::A, 1), (Letter::B, 1)]);
        let candidates = candidate_forms_for_word(&w);
        let grid = sample_triples(10 * candidates.len(), 0.3, 2.5, 21);
        let holdout = sample_triples(40, 0.3, 2.5, 22);
        let fit = exp_sum_fit(&w, &candidates, &grid, &holdout).unwrap();
        assert_eq!(fit.terms.len(), 2, "{:?}", fit.terms);
        for (a, form) in &fit.terms {
            assert!((a - 0.5).abs() < 1e-8);
            assert!(form.cx == 0.0 && form.cy == 0.0 && form.cz.abs() == 0.5);
        }
        // Refit on the fit's own support recovers the same support.
        let refit = exp_sum_fit(&w, &candidates, &grid, &grid).unwrap();
        assert_eq!(refit.terms.len(), fit.terms.len());
    }

    #[test]
    fn positive_words_have_positive_exp_sums() {
        use rand::Rng;
        let mut rng = crate::rng::stream(33, 0);
        for _ in 0..10 {
            let n = rng.gen_range(1..=2usize);
            let mut sylls = Vec::new();
            for i in 0..(2 * n) {
                let letter = if i % 2 == 0 { Letter::B } else { Letter::A };
                sylls.push((letter, rng.gen_range(1..=if n == 1 { 2 } else { 1 })));
            }
            let w = PantsWord::new(sylls);
            let candidates = candidate_forms_for_word(&w);
            let grid = sample_triples(10 * candidates.len(), 0.3, 2.0, 100);
            let holdout = sample_triples(30, 0.3, 2.0, 101);
            let fit = exp_sum_fit(&w, &candidates, &grid, &holdout).unwrap();
            assert!(!fit.terms.is_empty());
            for (a, _) in &fit.terms {
                assert!(*a > 0.0);
            }
        }
    }

    #[test]
    fn fn_point_json_round_trip() {
        let p = torus_point(1.25, -0.5, 2.0);
        let s = serde_json::to_string(&p).unwrap();
        assert!(s.contains("\"interior\""));
        let back: FnPoint = serde_json::from_str(&s).unwrap();
        assert_eq!(back, p);
    }
}
