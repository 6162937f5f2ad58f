//! Expectation and length-spectrum density of a loop class over the moduli
//! space, as a weighted integral over Fenchel-Nielsen coordinates:
//!
//!   E[F] = (1/m) int F(h(x_k, t_k, y_N)) y_1...y_N V(y_N, L_n) dx dt dy / norm
//!
//! with the complement volume V and the stabilizer index m supplied as
//! configuration. The effective domain is truncated by a properness search
//! (doubling radius with safety factor 2); interior twists are integrated
//! over the truncated line, while the complement twist ranges are already
//! absorbed into the y_1...y_N factor and never sampled.

use crate::error::{Error, Result};
use crate::lengths::{loop_length, okai_dual_length, FnPoint};
use crate::loops::{LoopSpec, SurfaceGraph};
use crate::measure::{pushforward_with, DensityGrid, DomainSpec, GridParams};
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Sparse multivariate polynomial with real coefficients; monomial exponent
/// vectors are the map keys.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    nvars: usize,
    terms: BTreeMap<Vec<u32>, f64>,
}

impl Polynomial {
    pub fn zero(nvars: usize) -> Polynomial {
        Polynomial {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, c: f64) -> Polynomial {
        let mut p = Polynomial::zero(nvars);
        if c != 0.0 {
            p.terms.insert(vec![0; nvars], c);
        }
        p
    }

    pub fn monomial(nvars: usize, exponents: Vec<u32>, coeff: f64) -> Result<Polynomial> {
        if exponents.len() != nvars {
            return Err(Error::InvalidArgument(format!(
                "monomial exponent arity {} != {}",
                exponents.len(),
                nvars
            )));
        }
        let mut p = Polynomial::zero(nvars);
        if coeff != 0.0 {
            p.terms.insert(exponents, coeff);
        }
        Ok(p)
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &f64)> {
        self.terms.iter()
    }

    pub fn total_degree(&self) -> u32 {
        self.terms
            .keys()
            .map(|e| e.iter().sum::<u32>())
            .max()
            .unwrap_or(0)
    }

    pub fn is_even_in_all_vars(&self) -> bool {
        self.terms.keys().all(|e| e.iter().all(|&k| k % 2 == 0))
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.nvars {
            return Err(Error::InvalidArgument(format!(
                "polynomial expects {} variables, got {}",
                self.nvars,
                x.len()
            )));
        }
        let mut acc = 0.0;
        for (exp, &c) in &self.terms {
            let mut term = c;
            for (&e, &xi) in exp.iter().zip(x) {
                term *= xi.powi(e as i32);
            }
            acc += term;
        }
        Ok(acc)
    }

    pub fn add(&self, other: &Polynomial) -> Result<Polynomial> {
        if self.nvars != other.nvars {
            return Err(Error::InvalidArgument("variable count mismatch".into()));
        }
        let mut out = self.clone();
        for (e, &c) in &other.terms {
            let entry = out.terms.entry(e.clone()).or_insert(0.0);
            *entry += c;
            if *entry == 0.0 {
                out.terms.remove(e);
            }
        }
        Ok(out)
    }

    pub fn mul(&self, other: &Polynomial) -> Result<Polynomial> {
        if self.nvars != other.nvars {
            return Err(Error::InvalidArgument("variable count mismatch".into()));
        }
        let mut out = Polynomial::zero(self.nvars);
        for (ea, &ca) in &self.terms {
            for (eb, &cb) in &other.terms {
                let e: Vec<u32> = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                let entry = out.terms.entry(e.clone()).or_insert(0.0);
                *entry += ca * cb;
                if *entry == 0.0 {
                    out.terms.remove(&e);
                }
            }
        }
        Ok(out)
    }

    pub fn scale(&self, s: f64) -> Polynomial {
        let mut out = Polynomial::zero(self.nvars);
        if s != 0.0 {
            for (e, &c) in &self.terms {
                out.terms.insert(e.clone(), c * s);
            }
        }
        out
    }

    /// Exact integral over an axis-aligned box (closed-form monomial
    /// primitives).
    pub fn integrate_box(&self, box_bounds: &[(f64, f64)]) -> Result<f64> {
        if box_bounds.len() != self.nvars {
            return Err(Error::InvalidArgument("box arity mismatch".into()));
        }
        let mut acc = 0.0;
        for (exp, &c) in &self.terms {
            let mut term = c;
            for (&e, &(lo, hi)) in exp.iter().zip(box_bounds) {
                let k = e as i32 + 1;
                term *= (hi.powi(k) - lo.powi(k)) / k as f64;
            }
            acc += term;
        }
        Ok(acc)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PolyRepr {
    vars: usize,
    coeffs: BTreeMap<String, f64>,
}

impl Serialize for Polynomial {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let coeffs = self
            .terms
            .iter()
            .map(|(e, &c)| {
                (
                    e.iter()
                        .map(|k| k.to_string())
                        .collect::<Vec<_>>()
                        .join(","),
                    c,
                )
            })
            .collect();
        PolyRepr {
            vars: self.nvars,
            coeffs,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Polynomial {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = PolyRepr::deserialize(d)?;
        let mut p = Polynomial::zero(repr.vars);
        for (key, c) in repr.coeffs {
            let exp: std::result::Result<Vec<u32>, _> =
                key.split(',').map(|s| s.trim().parse::<u32>()).collect();
            let exp = exp.map_err(|e| serde::de::Error::custom(format!("bad exponent key {key:?}: {e}")))?;
            if exp.len() != repr.vars {
                return Err(serde::de::Error::custom(format!(
                    "exponent key {key:?} has arity {} != vars {}",
                    exp.len(),
                    repr.vars
                )));
            }
            if c != 0.0 {
                p.terms.insert(exp, c);
            }
        }
        Ok(p)
    }
}

/// Registry of moduli-space volume polynomials per (genus, boundary count),
/// in the boundary-length variables (even exponents only). Ships with the
/// thrice-holed sphere V_{0,3} = 1; everything else is user-supplied data.
#[derive(Debug, Clone)]
pub struct VolumeRegistry {
    entries: BTreeMap<(u32, u32), Polynomial>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RegistryEntry {
    g: u32,
    n: u32,
    coeffs: BTreeMap<String, f64>,
}

impl Default for VolumeRegistry {
    fn default() -> Self {
        let mut entries = BTreeMap::new();
        entries.insert((0, 3), Polynomial::constant(3, 1.0));
        VolumeRegistry { entries }
    }
}

impl VolumeRegistry {
    pub fn get(&self, g: u32, n: u32) -> Option<&Polynomial> {
        self.entries.get(&(g, n))
    }

    pub fn insert(&mut self, g: u32, n: u32, poly: Polynomial) -> Result<()> {
        if poly.nvars() != n as usize {
            return Err(Error::Configuration(format!(
                "V_{{{g},{n}}} must be a polynomial in {n} variables"
            )));
        }
        if !poly.is_even_in_all_vars() {
            return Err(Error::Configuration(format!(
                "V_{{{g},{n}}} must depend on boundary lengths through even powers only"
            )));
        }
        self.entries.insert((g, n), poly);
        Ok(())
    }

    pub fn load_json(&mut self, text: &str) -> Result<usize> {
        let entries: Vec<RegistryEntry> = serde_json::from_str(text)
            .map_err(|e| Error::Configuration(format!("volume registry parse error: {e}")))?;
        let count = entries.len();
        for e in entries {
            let mut poly = Polynomial::zero(e.n as usize);
            for (key, c) in e.coeffs {
                let exp: std::result::Result<Vec<u32>, _> =
                    key.split(',').map(|s| s.trim().parse::<u32>()).collect();
                let exp = exp
                    .map_err(|er| Error::Configuration(format!("bad exponent key {key:?}: {er}")))?;
                poly = poly.add(&Polynomial::monomial(e.n as usize, exp, c)?)?;
            }
            self.insert(e.g, e.n, poly)?;
        }
        Ok(count)
    }
}

/// The length map h of an expectation/density configuration: either a
/// combinatorial loop over a surface graph, or a named closed-form map used
/// for oracle runs.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum LengthMap {
    /// Loop filling a pair of pants with boundary lengths (y1, y2, y3):
    /// h = 2 arccosh(2 cosh(y1/2) cosh(y2/2) + cosh(y3/2)); k = 0, N = 3.
    Fig8Pants,
    /// Dual-curve length on the once-holed torus in (l_a, tau_a) with fixed
    /// boundary length L: k = 1, N = 0. Not proper in the +l_a direction;
    /// used for the twist-unfolding identity, not for expectations.
    TorusDual,
    /// h = sum of all sampled coordinates (linear oracle).
    LinearSum,
    /// A combinatorial loop; interior lists the curves carrying the (x, t)
    /// pairs, multicurve the curves carrying the y weights, fixed maps the
    /// remaining boundary curves to indices into the configured boundary
    /// lengths.
    Loop {
        surface: SurfaceGraph,
        #[serde(rename = "loop")]
        loop_spec: LoopSpec,
        interior: Vec<usize>,
        multicurve: Vec<usize>,
        #[serde(default)]
        fixed: BTreeMap<usize, usize>,
    },
}

impl LengthMap {
    pub fn eval(&self, x: &[f64], t: &[f64], y: &[f64], big_l: &[f64]) -> Result<f64> {
        match self {
            LengthMap::Fig8Pants => {
                if !x.is_empty() || y.len() != 3 {
                    return Err(Error::Configuration(
                        "fig8-pants map expects k = 0, N = 3".into(),
                    ));
                }
                let v = 2.0 * (0.5 * y[0]).cosh() * (0.5 * y[1]).cosh() + (0.5 * y[2]).cosh();
                Ok(2.0 * crate::numeric::stable_acosh(v))
            }
            LengthMap::TorusDual => {
                if x.len() != 1 || !y.is_empty() {
                    return Err(Error::Configuration(
                        "torus-dual map expects k = 1, N = 0".into(),
                    ));
                }
                let l = big_l.first().copied().unwrap_or(0.0);
                Ok(okai_dual_length(x[0], t[0], l))
            }
            LengthMap::LinearSum => {
                Ok(x.iter().sum::<f64>() + t.iter().sum::<f64>() + y.iter().sum::<f64>())
            }
            LengthMap::Loop {
                surface,
                loop_spec,
                interior,
                multicurve,
                fixed,
            } => {
                if interior.len() != x.len() || multicurve.len() != y.len() {
                    return Err(Error::Configuration(
                        "loop map coordinate arity mismatch".into(),
                    ));
                }
                let mut p = FnPoint::default();
                for (i, &curve) in interior.iter().enumerate() {
                    p.interior.insert(curve, (x[i], t[i]));
                }
                for (i, &curve) in multicurve.iter().enumerate() {
                    p.boundary.insert(curve, y[i]);
                }
                for (&curve, &idx) in fixed {
                    let l = big_l.get(idx).copied().ok_or_else(|| {
                        Error::Configuration(format!("fixed boundary index {idx} out of range"))
                    })?;
                    p.boundary.insert(curve, l);
                }
                loop_length(loop_spec, surface, &p)
            }
        }
    }
}

/// Test function F applied to the length.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum TestFunction {
    /// Indicator of [0, a].
    Indicator { a: f64 },
    /// Quartic bump (1 - s^2)^2, s = (u - center)/halfwidth; compact support.
    Spline { center: f64, halfwidth: f64 },
}

impl TestFunction {
    pub fn eval(&self, u: f64) -> f64 {
        match self {
            TestFunction::Indicator { a } => {
                if (0.0..=*a).contains(&u) {
                    1.0
                } else {
                    0.0
                }
            }
            TestFunction::Spline { center, halfwidth } => {
                let s = (u - center) / halfwidth;
                if s.abs() < 1.0 {
                    (1.0 - s * s).powi(2)
                } else {
                    0.0
                }
            }
        }
    }

    pub fn support_sup(&self) -> f64 {
        match self {
            TestFunction::Indicator { a } => *a,
            TestFunction::Spline { center, halfwidth } => center + halfwidth,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Normalization {
    Unnormalized,
    /// Divide by a fixed positive moduli volume value.
    Value { v: f64 },
}

impl Normalization {
    fn factor(&self) -> Result<f64> {
        match self {
            Normalization::Unnormalized => Ok(1.0),
            Normalization::Value { v } => {
                if *v > 0.0 {
                    Ok(*v)
                } else {
                    Err(Error::Configuration("normalization must be positive".into()))
                }
            }
        }
    }
}

fn default_m_gamma() -> u32 {
    1
}

/// Configuration of one expectation/density run.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExpectationConfig {
    pub map: LengthMap,
    /// Stabilizer index m >= 1 (configuration input; default 1).
    #[serde(rename = "mGamma", default = "default_m_gamma")]
    pub m_gamma: u32,
    #[serde(rename = "testFunction")]
    pub test_function: TestFunction,
    #[serde(rename = "boundaryLengths", default)]
    pub boundary_lengths: Vec<f64>,
    /// Complement volume V(y_N, L_n); polynomial in N + n variables.
    /// Omitted means the constant 1.
    #[serde(rename = "complementVolume", default)]
    pub complement_volume: Option<Polynomial>,
    /// k: number of interior (length, twist) pairs.
    #[serde(rename = "teichHalfDim")]
    pub teich_half_dim: usize,
    /// N: number of multicurve boundaries retained.
    #[serde(rename = "curveCount")]
    pub curve_count: usize,
    pub normalization: Normalization,
}

impl ExpectationConfig {
    pub fn validate(&self) -> Result<()> {
        if self.m_gamma == 0 {
            return Err(Error::Configuration("mGamma must be >= 1".into()));
        }
        let (k, n_curves) = (self.teich_half_dim, self.curve_count);
        match &self.map {
            LengthMap::Fig8Pants => {
                if k != 0 || n_curves != 3 {
                    return Err(Error::Configuration(
                        "fig8-pants map requires teichHalfDim = 0, curveCount = 3".into(),
                    ));
                }
            }
            LengthMap::TorusDual => {
                if k != 1 || n_curves != 0 {
                    return Err(Error::Configuration(
                        "torus-dual map requires teichHalfDim = 1, curveCount = 0".into(),
                    ));
                }
            }
            LengthMap::LinearSum => {}
            LengthMap::Loop {
                surface,
                loop_spec,
                interior,
                multicurve,
                ..
            } => {
                loop_spec.validate(surface)?;
                if interior.len() != k || multicurve.len() != n_curves {
                    return Err(Error::Configuration(
                        "loop map lists must match teichHalfDim and curveCount".into(),
                    ));
                }
            }
        }
        if let Some(p) = &self.complement_volume {
            let want = self.curve_count + self.boundary_lengths.len();
            if p.nvars() != want {
                return Err(Error::Configuration(format!(
                    "complement volume must have {want} variables (y then L), got {}",
                    p.nvars()
                )));
            }
        }
        Ok(())
    }

    fn dims(&self) -> (usize, usize) {
        (self.teich_half_dim, self.curve_count)
    }

    fn eval_h(&self, full: &[f64]) -> Result<f64> {
        let (k, n) = self.dims();
        self.map.eval(
            &full[0..k],
            &full[k..2 * k],
            &full[2 * k..2 * k + n],
            &self.boundary_lengths,
        )
    }

    fn weight(&self, full: &[f64]) -> Result<f64> {
        let (k, n) = self.dims();
        let ys = &full[2 * k..2 * k + n];
        let mut w: f64 = ys.iter().product();
        if let Some(p) = &self.complement_volume {
            let args: Vec<f64> = ys
                .iter()
                .chain(self.boundary_lengths.iter())
                .cloned()
                .collect();
            w *= p.eval(&args)?;
        }
        Ok(w)
    }
}

/// Doubling search for a truncation radius outside which h exceeds the
/// cutoff, probed on the boundary faces of the box; returns twice the first
/// passing radius. Failure at radius 1e4 signals an effectively unbounded
/// domain.
fn find_radius(cfg: &ExpectationConfig, cutoff: f64, seed: u64) -> Result<f64> {
    let (k, n) = cfg.dims();
    let dim = 2 * k + n;
    if dim == 0 {
        return Err(Error::Configuration("map has no sampled coordinates".into()));
    }
    let mut rng = crate::rng::stream(seed, 424_242);
    let mut radius = cutoff.max(4.0);
    'outer: while radius <= 1.0e4 {
        for coord in 0..dim {
            let extremes: &[f64] = if coord >= k && coord < 2 * k {
                &[1.0, -1.0]
            } else {
                &[1.0]
            };
            for &side in extremes {
                // Structured fills catch thin escape slabs that random
                // probes would miss (e.g. all other coordinates near 0),
                // plus random fills for coverage.
                let patterns: [Option<f64>; 4] = [Some(0.01), Some(1.0), Some(0.5 * radius), None];
                for pat in patterns {
                    for _ in 0..16 {
                        let mut x: Vec<f64> = (0..dim)
                            .map(|j| {
                                let twist = j >= k && j < 2 * k;
                                match pat {
                                    Some(v) => {
                                        if twist {
                                            0.0
                                        } else {
                                            v
                                        }
                                    }
                                    None => {
                                        if twist {
                                            rng.gen_range(-radius..radius)
                                        } else {
                                            rng.gen_range(0.0..radius)
                                        }
                                    }
                                }
                            })
                            .collect();
                        x[coord] = side * radius;
                        let h = cfg.eval_h(&x)?;
                        if h <= cutoff {
                            radius *= 2.0;
                            continue 'outer;
                        }
                        if pat.is_some() {
                            break; // deterministic pattern: one probe suffices
                        }
                    }
                }
            }
        }
        return Ok(2.0 * radius);
    }
    Err(Error::Configuration(format!(
        "properness search failed at radius 1e4 (cutoff {cutoff}); effective domain unbounded"
    )))
}

fn sampling_domain(cfg: &ExpectationConfig, radius: f64) -> DomainSpec {
    let (k, n) = cfg.dims();
    let mut bounds = Vec::with_capacity(2 * k + n);
    for _ in 0..k {
        bounds.push((0.0, radius));
    }
    for _ in 0..k {
        bounds.push((-radius, radius));
    }
    for _ in 0..n {
        bounds.push((0.0, radius));
    }
    DomainSpec {
        bounds,
        constraints: Vec::new(),
        cone: false,
    }
}

/// Monte Carlo expectation with standard error.
pub fn expectation_via_formula(
    cfg: &ExpectationConfig,
    n_samples: u64,
    seed: u64,
) -> Result<(f64, f64)> {
    cfg.validate()?;
    if n_samples == 0 {
        return Err(Error::InvalidArgument("zero samples".into()));
    }
    let cutoff = cfg.test_function.support_sup();
    if cutoff <= 0.0 {
        return Ok((0.0, 0.0));
    }
    let radius = find_radius(cfg, cutoff, seed)?;
    let dom = sampling_domain(cfg, radius);
    let vol = dom.volume();
    let norm = cfg.normalization.factor()? * cfg.m_gamma as f64;
    let mut rng = crate::rng::stream(seed, 0);
    let dim = dom.dim();
    let mut x = vec![0.0; dim];
    let (mut s1, mut s2) = (0.0f64, 0.0f64);
    for _ in 0..n_samples {
        for (xi, &(lo, hi)) in x.iter_mut().zip(&dom.bounds) {
            *xi = rng.gen_range(lo..hi);
        }
        let h = cfg.eval_h(&x)?;
        let f = cfg.test_function.eval(h);
        let v = if f != 0.0 {
            f * cfg.weight(&x)? * vol / norm
        } else {
            0.0
        };
        s1 += v;
        s2 += v * v;
    }
    let n = n_samples as f64;
    let mean = s1 / n;
    let var = ((s2 / n - mean * mean).max(0.0)) / (n - 1.0).max(1.0);
    Ok((mean, var.sqrt()))
}

/// Monte Carlo estimate of the length-spectrum density on a grid; the same
/// integrand as [`expectation_via_formula`] with the test function replaced
/// by binning.
pub fn density_via_formula(
    cfg: &ExpectationConfig,
    grid: &GridParams,
    n_samples: u64,
    seed: u64,
) -> Result<DensityGrid> {
    cfg.validate()?;
    grid.validate()?;
    let radius = find_radius(cfg, grid.max, seed)?;
    let dom = sampling_domain(cfg, radius);
    let norm = cfg.normalization.factor()? * cfg.m_gamma as f64;
    pushforward_with(
        |x| cfg.eval_h(x).unwrap_or(f64::NAN),
        |x| cfg.weight(x).map(|w| w / norm).unwrap_or(0.0),
        &dom,
        n_samples,
        seed,
        grid,
    )
}

/// Running integral Q(a) = int_0^a density, sampled at bin right edges;
/// monotone nondecreasing for nonnegative input.
pub fn counting_curve(density: &DensityGrid) -> Result<DensityGrid> {
    let scale = density.mass.iter().cloned().fold(0.0f64, f64::max);
    if density.mass.iter().any(|&m| m < -1e-9 * scale.max(1.0)) {
        return Err(Error::InvalidArgument(
            "counting curve requires a nonnegative density".into(),
        ));
    }
    let mut out = density.clone();
    let mut acc = 0.0;
    let mut var_acc = 0.0;
    for j in 0..out.n_bins() {
        acc += density.mass[j].max(0.0) * density.bin_width;
        var_acc += density.variance[j] * density.bin_width * density.bin_width;
        out.mass[j] = acc;
        out.variance[j] = var_acc;
    }
    Ok(out)
}

/// Both sides of the twist-unfolding identity on the once-holed torus:
/// int_0^l sum_{|k| <= K} F(h(tau + k l)) dtau  vs  int_R F(h(tau)) dtau,
/// evaluated by Simpson quadrature.
pub fn twist_unfolding_check(
    ell_a: f64,
    big_l: f64,
    f: &TestFunction,
    k_max: i64,
    nodes: usize,
) -> (f64, f64) {
    let h = |tau: f64| okai_dual_length(ell_a, tau, big_l);
    let lhs = crate::numeric::simpson(
        |tau| {
            (-k_max..=k_max)
                .map(|k| f.eval(h(tau + k as f64 * ell_a)))
                .sum::<f64>()
        },
        0.0,
        ell_a,
        nodes,
    );
    let t = (k_max + 1) as f64 * ell_a;
    let rhs = crate::numeric::simpson(|tau| f.eval(h(tau)), -t, t, nodes * 16);
    (lhs, rhs)
}
