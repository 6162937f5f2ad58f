//! The two independent density engines.
//!
//! `pushforward_density` histograms Monte Carlo samples of h weighted by the
//! product weight; it needs no structural assumptions. `disintegrate_density`
//! evaluates the level-set formula
//!
//!   density(ell) = int_{U_ell} f_i(root) prod_{j!=i} f_j(x_j) phi(x)
//!                  |d root / d ell|  dx_{j != i}
//!
//! where `root` is the partial inverse of h in the pivot coordinate, found
//! by bracketed bisection plus Newton; it requires h to be strictly monotone
//! in the pivot (checked numerically before running). The two engines
//! validate each other: the first is assumption-free but noisy, the second
//! exact but assumption-laden.

use super::grid::{DensityGrid, DomainSpec, GridParams, WeightSpec};
use crate::error::{Error, Result};
use crate::numeric::{bisect_newton, gauss_legendre};
use rand::Rng;

/// How the disintegration engine integrates over the remaining coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
pub enum InnerIntegration {
    /// Seeded Monte Carlo with the given number of samples per bin.
    MonteCarlo { samples: u64 },
    /// Level-set-fitted iterated Gauss-Legendre quadrature (deterministic,
    /// zero variance; supported for 1 or 2 remaining coordinates, and
    /// requires h monotone in every coordinate).
    Quadrature { order: usize },
}

/// Monte Carlo pushforward of `weight(x) dx` under `h`, histogrammed on the
/// grid. Deterministic for a fixed seed; independent seeds are mergeable.
pub fn pushforward_with<H, W>(
    h: H,
    weight: W,
    dom: &DomainSpec,
    n_samples: u64,
    seed: u64,
    grid: &GridParams,
) -> Result<DensityGrid>
where
    H: Fn(&[f64]) -> f64,
    W: Fn(&[f64]) -> f64,
{
    dom.validate()?;
    let mut out = DensityGrid::zeros(grid)?;
    if n_samples == 0 {
        return Err(Error::EmptyDensity("zero samples requested".into()));
    }
    let vol = dom.volume();
    let dim = dom.dim();
    let mut rng = crate::rng::stream(seed, 0);
    let mut x = vec![0.0; dim];
    let mut sum = vec![0.0f64; out.n_bins()];
    let mut sumsq = vec![0.0f64; out.n_bins()];
    let mut accepted: u64 = 0;
    for _ in 0..n_samples {
        for (xi, &(lo, hi)) in x.iter_mut().zip(&dom.bounds) {
            *xi = rng.gen_range(lo..hi);
        }
        if !dom.contains(&x) {
            continue;
        }
        accepted += 1;
        let v = h(&x);
        if let Some(j) = out.bin_of(v) {
            let c = weight(&x) * vol / out.bin_width;
            sum[j] += c;
            sumsq[j] += c * c;
        }
    }
    if accepted == 0 {
        return Err(Error::EmptyDensity(
            "no samples satisfied the domain constraints".into(),
        ));
    }
    let n = n_samples as f64;
    for j in 0..out.n_bins() {
        let mean = sum[j] / n;
        out.mass[j] = mean;
        if n > 1.0 {
            out.variance[j] = (sumsq[j] / n - mean * mean).max(0.0) / (n - 1.0);
        }
    }
    out.total_samples = n_samples;
    Ok(out)
}

/// Pushforward of the product-weight measure prod f_i(x_i) phi(x) dx.
pub fn pushforward_density<H>(
    h: H,
    w: &WeightSpec,
    dom: &DomainSpec,
    n_samples: u64,
    seed: u64,
    grid: &GridParams,
) -> Result<DensityGrid>
where
    H: Fn(&[f64]) -> f64,
{
    if w.dim() != dom.dim() {
        return Err(Error::InvalidArgument(format!(
            "weight arity {} does not match domain dimension {}",
            w.dim(),
            dom.dim()
        )));
    }
    pushforward_with(h, |x| w.eval(x), dom, n_samples, seed, grid)
}

/// Direction of monotonicity of h in one coordinate over the domain box,
/// established by sampled finite differences.
fn monotone_direction<H: Fn(&[f64]) -> f64>(
    h: &H,
    dom: &DomainSpec,
    coord: usize,
    seed: u64,
) -> Result<f64> {
    let mut rng = crate::rng::stream(seed, 7700 + coord as u64);
    let dim = dom.dim();
    let (lo, hi) = dom.bounds[coord];
    let mut sign = 0.0f64;
    for _ in 0..48 {
        let mut x: Vec<f64> = dom
            .bounds
            .iter()
            .map(|&(a, b)| rng.gen_range(a..b))
            .collect();
        debug_assert_eq!(x.len(), dim);
        // March along the coordinate and require a strictly monotone profile.
        let mut prev = f64::NAN;
        for k in 0..=8 {
            x[coord] = lo + (hi - lo) * k as f64 / 8.0;
            let v = h(&x);
            if prev.is_finite() {
                let d = v - prev;
                if d == 0.0 {
                    return Err(Error::AssumptionViolated(format!(
                        "h is locally constant in coordinate {coord}"
                    )));
                }
                if sign == 0.0 {
                    sign = d.signum();
                } else if d.signum() != sign {
                    return Err(Error::AssumptionViolated(format!(
                        "h is not monotone in pivot coordinate {coord}"
                    )));
                }
            }
            prev = v;
        }
    }
    Ok(sign)
}

/// Partial inverse of h in the pivot coordinate at level `ell`, with the
/// remaining coordinates fixed. Returns None when the level is not
/// bracketed inside the pivot bounds (the point lies outside U_ell).
fn pivot_root<H: Fn(&[f64]) -> f64>(
    h: &H,
    x: &mut [f64],
    pivot: usize,
    bounds: (f64, f64),
    ell: f64,
) -> Option<f64> {
    let (lo, hi) = bounds;
    x[pivot] = lo;
    let flo = h(x) - ell;
    x[pivot] = hi;
    let fhi = h(x) - ell;
    if flo == 0.0 {
        return Some(lo);
    }
    if fhi == 0.0 {
        return Some(hi);
    }
    if flo.signum() == fhi.signum() {
        return None;
    }
    let cell = std::cell::RefCell::new(x.to_vec());
    let f = |v: f64| {
        let mut xs = cell.borrow_mut();
        xs[pivot] = v;
        h(&xs) - ell
    };
    let df = |v: f64| {
        let a = (v - 1e-6 * (1.0 + v.abs())).max(lo);
        let b = (v + 1e-6 * (1.0 + v.abs())).min(hi);
        (f(b) - f(a)) / (b - a)
    };
    bisect_newton(&f, df, lo, hi, 1e-12).ok()
}

/// Numerical partial derivative dh/dx_pivot by central difference with a
/// relative step of 1e-5.
fn pivot_derivative<H: Fn(&[f64]) -> f64>(h: &H, x: &mut [f64], pivot: usize) -> f64 {
    let v = x[pivot];
    let step = 1e-5 * v.abs().max(1.0);
    x[pivot] = v + step;
    let up = h(x);
    x[pivot] = v - step;
    let dn = h(x);
    x[pivot] = v;
    (up - dn) / (2.0 * step)
}

/// Level-set disintegration density. For each grid level the integral over
/// the remaining coordinates is evaluated either by seeded Monte Carlo or by
/// boundary-fitted iterated Gauss-Legendre quadrature.
pub fn disintegrate_density<H>(
    h: H,
    w: &WeightSpec,
    dom: &DomainSpec,
    pivot: usize,
    grid: &GridParams,
    inner: InnerIntegration,
    seed: u64,
) -> Result<DensityGrid>
where
    H: Fn(&[f64]) -> f64,
{
    dom.validate()?;
    grid.validate()?;
    let dim = dom.dim();
    if pivot >= dim {
        return Err(Error::InvalidArgument(format!(
            "pivot {pivot} out of range for dimension {dim}"
        )));
    }
    if w.dim() != dim {
        return Err(Error::InvalidArgument(
            "weight arity does not match domain dimension".into(),
        ));
    }
    // Assumption check: strict monotonicity in the pivot.
    monotone_direction(&h, dom, pivot, seed)?;

    let rest: Vec<usize> = (0..dim).filter(|&j| j != pivot).collect();
    let pivot_bounds = dom.bounds[pivot];
    let mut out = DensityGrid::zeros(grid)?;

    let integrand = |x: &mut [f64], ell: f64| -> f64 {
        match pivot_root(&h, x, pivot, pivot_bounds, ell) {
            None => 0.0,
            Some(root) => {
                x[pivot] = root;
                if !dom.contains(x) {
                    return 0.0;
                }
                let d = pivot_derivative(&h, x, pivot);
                if d == 0.0 || !d.is_finite() {
                    return 0.0;
                }
                w.eval(x) / d.abs()
            }
        }
    };

    match inner {
        InnerIntegration::MonteCarlo { samples } => {
            if samples == 0 {
                return Err(Error::EmptyDensity("zero inner samples".into()));
            }
            let sub_vol: f64 = rest.iter().map(|&j| dom.bounds[j].1 - dom.bounds[j].0).product();
            let mut x = vec![0.0; dim];
            for bin in 0..out.n_bins() {
                let ell = out.center(bin);
                let mut rng = crate::rng::stream(seed, 1000 + bin as u64);
                let mut sum = 0.0f64;
                let mut sumsq = 0.0f64;
                for _ in 0..samples {
                    for &j in &rest {
                        x[j] = rng.gen_range(dom.bounds[j].0..dom.bounds[j].1);
                    }
                    let c = integrand(&mut x, ell) * sub_vol;
                    sum += c;
                    sumsq += c * c;
                }
                let n = samples as f64;
                let mean = sum / n;
                out.mass[bin] = mean;
                if n > 1.0 {
                    out.variance[bin] = (sumsq / n - mean * mean).max(0.0) / (n - 1.0);
                }
            }
            out.total_samples = samples * out.n_bins() as u64;
        }
        InnerIntegration::Quadrature { order } => {
            if rest.len() > 2 {
                return Err(Error::InvalidArgument(
                    "quadrature mode supports at most 2 remaining coordinates; use Monte Carlo"
                        .into(),
                ));
            }
            if order < 4 {
                return Err(Error::InvalidArgument("quadrature order too small".into()));
            }
            // Fitted limits need monotonicity in every coordinate.
            for &j in &rest {
                monotone_direction(&h, dom, j, seed)?;
            }
            let nodes = gauss_legendre(order);
            // Base point used when probing section boundaries.
            let base: Vec<f64> = dom.bounds.iter().map(|&(lo, _)| lo).collect();
            for bin in 0..out.n_bins() {
                let ell = out.center(bin);
                out.mass[bin] = match rest.len() {
                    0 => {
                        let mut xx = base.clone();
                        integrand_scalar(&h, w, dom, pivot, pivot_bounds, &mut xx, ell)
                    }
                    1 => {
                        let j = rest[0];
                        let (ja, jb) =
                            section_interval(&h, &base, j, dom.bounds[j], pivot, pivot_bounds, ell);
                        if !(jb > ja) {
                            0.0
                        } else {
                            crate::numeric::gl_integrate(
                                |xj| {
                                    let mut xx = base.clone();
                                    xx[j] = xj;
                                    integrand(&mut xx, ell)
                                },
                                ja,
                                jb,
                                &nodes,
                            )
                        }
                    }
                    2 => {
                        let (j1, j2) = (rest[0], rest[1]);
                        let (oa, ob) =
                            section_interval(&h, &base, j1, dom.bounds[j1], pivot, pivot_bounds, ell);
                        if !(ob > oa) {
                            0.0
                        } else {
                            crate::numeric::gl_integrate(
                                |x1| {
                                    let mut mid = base.clone();
                                    mid[j1] = x1;
                                    let (ia, ib) = section_interval(
                                        &h,
                                        &mid,
                                        j2,
                                        dom.bounds[j2],
                                        pivot,
                                        pivot_bounds,
                                        ell,
                                    );
                                    if !(ib > ia) {
                                        return 0.0;
                                    }
                                    crate::numeric::gl_integrate(
                                        |x2| {
                                            let mut xx = mid.clone();
                                            xx[j2] = x2;
                                            integrand(&mut xx, ell)
                                        },
                                        ia,
                                        ib,
                                        &nodes,
                                    )
                                },
                                oa,
                                ob,
                                &nodes,
                            )
                        }
                    }
                    _ => unreachable!(),
                };
            }
            out.total_samples = 0;
        }
    }
    Ok(out)
}

fn integrand_scalar<H: Fn(&[f64]) -> f64>(
    h: &H,
    w: &WeightSpec,
    dom: &DomainSpec,
    pivot: usize,
    pivot_bounds: (f64, f64),
    x: &mut [f64],
    ell: f64,
) -> f64 {
    match pivot_root(h, x, pivot, pivot_bounds, ell) {
        None => 0.0,
        Some(root) => {
            x[pivot] = root;
            if !dom.contains(x) {
                return 0.0;
            }
            let d = pivot_derivative(h, x, pivot);
            if d == 0.0 || !d.is_finite() {
                return 0.0;
            }
            w.eval(x) / d.abs()
        }
    }
}

/// The sub-interval of `bounds` in coordinate `coord` (other remaining
/// coordinates fixed to `fill`) on which the pivot root exists. By
/// monotonicity of h this set is an interval; its endpoints are located by
/// bisection on the bracket-existence indicator.
fn section_interval<H: Fn(&[f64]) -> f64>(
    h: &H,
    fill: &[f64],
    coord: usize,
    bounds: (f64, f64),
    pivot: usize,
    pivot_bounds: (f64, f64),
    ell: f64,
) -> (f64, f64) {
    let scratch = std::cell::RefCell::new(fill.to_vec());
    let bracketed = |v: f64| -> bool {
        let mut xs = scratch.borrow_mut();
        xs[coord] = v;
        xs[pivot] = pivot_bounds.0;
        let flo = h(&xs) - ell;
        xs[pivot] = pivot_bounds.1;
        let fhi = h(&xs) - ell;
        flo == 0.0 || fhi == 0.0 || flo.signum() != fhi.signum()
    };
    let (lo, hi) = bounds;
    let at_lo = bracketed(lo);
    let at_hi = bracketed(hi);
    // Bisect between a feasible point a and an infeasible point b.
    let locate = |mut a: f64, mut b: f64| -> f64 {
        for _ in 0..60 {
            let mid = 0.5 * (a + b);
            if bracketed(mid) {
                a = mid;
            } else {
                b = mid;
            }
        }
        0.5 * (a + b)
    };
    match (at_lo, at_hi) {
        (true, true) => (lo, hi),
        (true, false) => (lo, locate(lo, hi)),
        (false, true) => (locate(hi, lo), hi),
        (false, false) => {
            // Scan for an interior feasible stretch.
            let n = 64;
            let mut first = None;
            for k in 0..=n {
                let v = lo + (hi - lo) * k as f64 / n as f64;
                if bracketed(v) {
                    first = Some(v);
                    break;
                }
            }
            match first {
                None => (0.0, -1.0), // empty
                Some(v) => (locate(v, lo), locate(v, hi)),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::grid::ExtraFactor;

    fn sum_map(x: &[f64]) -> f64 {
        x.iter().sum()
    }

    #[test]
    fn uniform_pushforward_of_identity() {
        // h = x1 on [0,1], weight 1: density 1 on [0,1].
        let grid = GridParams {
            min: 0.0,
            max: 1.0,
            bin_width: 0.05,
        };
        let d = pushforward_density(
            sum_map,
            &WeightSpec::ones(1),
            &DomainSpec::unit_box(1),
            200_000,
            1,
            &grid,
        )
        .unwrap();
        for j in 0..d.n_bins() {
            assert!(
                (d.mass[j] - 1.0).abs() < 4.0 * d.variance[j].sqrt() + 0.02,
                "bin {j}: {}",
                d.mass[j]
            );
        }
    }

    #[test]
    fn triangle_density_from_two_coordinates() {
        let grid = GridParams {
            min: 0.0,
            max: 2.0,
            bin_width: 0.05,
        };
        let d = pushforward_density(
            sum_map,
            &WeightSpec::ones(2),
            &DomainSpec::unit_box(2),
            400_000,
            2,
            &grid,
        )
        .unwrap();
        // Value 0.5 at ell = 0.5 and ell = 1.5.
        for target in [0.5, 1.5] {
            let j = d.bin_of(target).unwrap();
            assert!(
                (d.mass[j] - 0.5).abs() < 5.0 * d.variance[j].sqrt() + 0.03,
                "at {target}: {}",
                d.mass[j]
            );
        }
    }

    #[test]
    fn disintegration_of_linear_sums() {
        // h = x1 + x2 on the positive quadrant, f = 1: density ell.
        let grid = GridParams {
            min: 0.0,
            max: 1.0,
            bin_width: 0.1,
        };
        let d = disintegrate_density(
            sum_map,
            &WeightSpec::ones(2),
            &DomainSpec::cube(2, 0.0, 2.0),
            1,
            &grid,
            InnerIntegration::Quadrature { order: 16 },
            3,
        )
        .unwrap();
        for j in 0..d.n_bins() {
            let c = d.center(j);
            assert!((d.mass[j] - c).abs() < 1e-8, "bin {j}: {} vs {c}", d.mass[j]);
        }
        // Three coordinates: density ell^2/2.
        let d = disintegrate_density(
            sum_map,
            &WeightSpec::ones(3),
            &DomainSpec::cube(3, 0.0, 2.0),
            2,
            &grid,
            InnerIntegration::Quadrature { order: 24 },
            3,
        )
        .unwrap();
        for j in 0..d.n_bins() {
            let c = d.center(j);
            assert!(
                (d.mass[j] - 0.5 * c * c).abs() < 1e-7,
                "bin {j}: {} vs {}",
                d.mass[j],
                0.5 * c * c
            );
        }
        // Weight (x, 1): density ell^2/2.
        let d = disintegrate_density(
            sum_map,
            &WeightSpec::monomials(&[1, 0]),
            &DomainSpec::cube(2, 0.0, 2.0),
            0,
            &grid,
            InnerIntegration::Quadrature { order: 16 },
            3,
        )
        .unwrap();
        for j in 0..d.n_bins() {
            let c = d.center(j);
            assert!((d.mass[j] - 0.5 * c * c).abs() < 1e-7, "bin {j}");
        }
    }

    #[test]
    fn disintegration_monte_carlo_matches_quadrature() {
        let grid = GridParams {
            min: 0.0,
            max: 1.5,
            bin_width: 0.1,
        };
        let dom = DomainSpec::cube(2, 0.0, 2.0);
        let w = WeightSpec::ones(2);
        let q = disintegrate_density(
            sum_map,
            &w,
            &dom,
            0,
            &grid,
            InnerIntegration::Quadrature { order: 16 },
            5,
        )
        .unwrap();
        let mc = disintegrate_density(
            sum_map,
            &w,
            &dom,
            0,
            &grid,
            InnerIntegration::MonteCarlo { samples: 20_000 },
            5,
        )
        .unwrap();
        for j in 0..q.n_bins() {
            let se = mc.variance[j].sqrt();
            assert!(
                (q.mass[j] - mc.mass[j]).abs() < 4.0 * se + 1e-3,
                "bin {j}: {} vs {}",
                q.mass[j],
                mc.mass[j]
            );
        }
    }

    #[test]
    fn monotonicity_violation_is_reported() {
        let grid = GridParams {
            min: 0.0,
            max: 1.0,
            bin_width: 0.25,
        };
        let err = disintegrate_density(
            |x: &[f64]| (x[0] - 1.0).powi(2) + x[1],
            &WeightSpec::ones(2),
            &DomainSpec::cube(2, 0.0, 2.0),
            0,
            &grid,
            InnerIntegration::MonteCarlo { samples: 10 },
            1,
        )
        .unwrap_err();
        match err {
            Error::AssumptionViolated(msg) => assert!(msg.contains("0"), "{msg}"),
            other => panic!("expected assumption violation, got {other:?}"),
        }
    }

    #[test]
    fn exp_neg_sum_factor_applies() {
        let w = WeightSpec {
            per_coordinate: vec![vec![1.0], vec![1.0]],
            extra_factor: ExtraFactor::ExpNegSum { coords: vec![0] },
        };
        assert!((w.eval(&[2.0, 5.0]) - (-2.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn determinism_and_merge() {
        let grid = GridParams {
            min: 0.0,
            max: 2.0,
            bin_width: 0.1,
        };
        let dom = DomainSpec::unit_box(2);
        let w = WeightSpec::ones(2);
        let a = pushforward_density(sum_map, &w, &dom, 50_000, 9, &grid).unwrap();
        let b = pushforward_density(sum_map, &w, &dom, 50_000, 9, &grid).unwrap();
        assert_eq!(a, b);
        let c = pushforward_density(sum_map, &w, &dom, 50_000, 10, &grid).unwrap();
        let merged = a.merge(&c).unwrap();
        assert_eq!(merged.total_samples, 100_000);
    }
}
