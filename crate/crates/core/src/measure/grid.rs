//! Binned density estimates and the operators acting on them.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Grid geometry for a binned density.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridParams {
    pub min: f64,
    pub max: f64,
    #[serde(rename = "binWidth")]
    pub bin_width: f64,
}

impl GridParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.bin_width > 0.0) || !(self.max > self.min) || self.min < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "invalid grid: [{}, {}] width {}",
                self.min, self.max, self.bin_width
            )));
        }
        Ok(())
    }
}

/// Binned estimate of a density in the length variable, with per-bin
/// variance of the estimate (zero for quadrature results).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityGrid {
    #[serde(rename = "ellMin")]
    pub ell_min: f64,
    #[serde(rename = "ellMax")]
    pub ell_max: f64,
    #[serde(rename = "binWidth")]
    pub bin_width: f64,
    /// Density values per bin, w.r.t. d(ell).
    pub mass: Vec<f64>,
    /// Variance of each per-bin density estimate.
    pub variance: Vec<f64>,
    #[serde(rename = "totalSamples")]
    pub total_samples: u64,
}

impl DensityGrid {
    pub fn zeros(params: &GridParams) -> Result<DensityGrid> {
        params.validate()?;
        let n = ((params.max - params.min) / params.bin_width).ceil() as usize;
        Ok(DensityGrid {
            ell_min: params.min,
            ell_max: params.max,
            bin_width: params.bin_width,
            mass: vec![0.0; n],
            variance: vec![0.0; n],
            total_samples: 0,
        })
    }

    /// Build from explicit samples of a function at bin centers.
    pub fn from_fn(params: &GridParams, f: impl Fn(f64) -> f64) -> Result<DensityGrid> {
        let mut g = DensityGrid::zeros(params)?;
        for j in 0..g.n_bins() {
            g.mass[j] = f(g.center(j));
        }
        Ok(g)
    }

    pub fn n_bins(&self) -> usize {
        self.mass.len()
    }

    pub fn center(&self, j: usize) -> f64 {
        self.ell_min + (j as f64 + 0.5) * self.bin_width
    }

    pub fn centers(&self) -> Vec<f64> {
        (0..self.n_bins()).map(|j| self.center(j)).collect()
    }

    pub fn bin_of(&self, x: f64) -> Option<usize> {
        if x < self.ell_min || !x.is_finite() {
            return None;
        }
        let j = ((x - self.ell_min) / self.bin_width) as usize;
        if j < self.n_bins() {
            Some(j)
        } else {
            None
        }
    }

    /// Linear interpolation between bin centers; zero outside the grid.
    pub fn value_at(&self, x: f64) -> f64 {
        let n = self.n_bins();
        if n == 0 {
            return 0.0;
        }
        let s = (x - self.ell_min) / self.bin_width - 0.5;
        if s <= 0.0 {
            return if x >= self.ell_min && x <= self.ell_max {
                self.mass[0]
            } else {
                0.0
            };
        }
        let j = s.floor() as usize;
        if j + 1 >= n {
            return if x <= self.ell_max { self.mass[n - 1] } else { 0.0 };
        }
        let frac = s - j as f64;
        self.mass[j] * (1.0 - frac) + self.mass[j + 1] * frac
    }

    pub fn total_mass(&self) -> f64 {
        self.mass.iter().sum::<f64>() * self.bin_width
    }

    /// Pointwise stderr of the density estimate per bin.
    pub fn stderr(&self) -> Vec<f64> {
        self.variance.iter().map(|v| v.sqrt()).collect()
    }

    /// Merge an independent estimate of the same density on the same grid:
    /// sample-weighted average of means, quadratic combination of variances.
    pub fn merge(&self, other: &DensityGrid) -> Result<DensityGrid> {
        if self.ell_min != other.ell_min
            || self.bin_width != other.bin_width
            || self.n_bins() != other.n_bins()
        {
            return Err(Error::InvalidArgument("grid mismatch in merge".into()));
        }
        let (n1, n2) = (self.total_samples as f64, other.total_samples as f64);
        let tot = n1 + n2;
        if tot == 0.0 {
            return Ok(self.clone());
        }
        let mut out = self.clone();
        for j in 0..out.n_bins() {
            out.mass[j] = (n1 * self.mass[j] + n2 * other.mass[j]) / tot;
            out.variance[j] =
                (n1 * n1 * self.variance[j] + n2 * n2 * other.variance[j]) / (tot * tot);
        }
        out.total_samples = self.total_samples + other.total_samples;
        Ok(out)
    }

    /// CSV with columns ell_lo, ell_hi, density, stderr.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("ell_lo,ell_hi,density,stderr\n");
        for j in 0..self.n_bins() {
            let lo = self.ell_min + j as f64 * self.bin_width;
            let hi = lo + self.bin_width;
            out.push_str(&format!(
                "{},{},{},{}\n",
                fmt17(lo),
                fmt17(hi),
                fmt17(self.mass[j]),
                fmt17(self.variance[j].sqrt())
            ));
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<DensityGrid> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines
            .next()
            .ok_or_else(|| Error::InvalidArgument("empty CSV".into()))?;
        if header.trim() != "ell_lo,ell_hi,density,stderr" {
            return Err(Error::InvalidArgument(format!(
                "unexpected CSV header: {header}"
            )));
        }
        let mut rows: Vec<(f64, f64, f64, f64)> = Vec::new();
        for (i, line) in lines.enumerate() {
            let cols: Vec<&str> = line.split(',').collect();
            if cols.len() != 4 {
                return Err(Error::InvalidArgument(format!(
                    "CSV row {} has {} columns",
                    i + 2,
                    cols.len()
                )));
            }
            let parse = |s: &str| -> Result<f64> {
                s.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::InvalidArgument(format!("bad float {s:?}: {e}")))
            };
            rows.push((parse(cols[0])?, parse(cols[1])?, parse(cols[2])?, parse(cols[3])?));
        }
        if rows.is_empty() {
            return Err(Error::InvalidArgument("CSV has no data rows".into()));
        }
        let bin_width = rows[0].1 - rows[0].0;
        let grid = DensityGrid {
            ell_min: rows[0].0,
            ell_max: rows.last().unwrap().1,
            bin_width,
            mass: rows.iter().map(|r| r.2).collect(),
            variance: rows.iter().map(|r| r.3 * r.3).collect(),
            total_samples: 0,
        };
        Ok(grid)
    }
}

pub(crate) fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}

/// L1 distance between two densities over the overlap of their supports,
/// together with the 1-sigma combined error of that distance.
pub fn l1_distance_with_error(a: &DensityGrid, b: &DensityGrid) -> (f64, f64) {
    let lo = a.ell_min.max(b.ell_min);
    let hi = a.ell_max.min(b.ell_max);
    let mut dist = 0.0;
    let mut err = 0.0;
    for j in 0..a.n_bins() {
        let c = a.center(j);
        if c < lo || c > hi {
            continue;
        }
        let bv = b.value_at(c);
        dist += (a.mass[j] - bv).abs() * a.bin_width;
        let bvar = b
            .bin_of(c)
            .map(|k| b.variance[k])
            .unwrap_or(0.0);
        err += (a.variance[j] + bvar).sqrt() * a.bin_width;
    }
    (dist, err)
}

/// Per-coordinate polynomial weights (coefficients ascending) times an
/// optional named bounded factor.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightSpec {
    #[serde(rename = "perCoordinate")]
    pub per_coordinate: Vec<Vec<f64>>,
    #[serde(rename = "extraFactor", default)]
    pub extra_factor: ExtraFactor,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
pub enum ExtraFactor {
    #[default]
    One,
    /// exp(-(x_{i_1} + ... + x_{i_m})) over the designated coordinates.
    ExpNegSum { coords: Vec<usize> },
}

impl WeightSpec {
    pub fn ones(n: usize) -> WeightSpec {
        WeightSpec {
            per_coordinate: vec![vec![1.0]; n],
            extra_factor: ExtraFactor::One,
        }
    }

    /// Monomials x^k per coordinate.
    pub fn monomials(degrees: &[u32]) -> WeightSpec {
        WeightSpec {
            per_coordinate: degrees
                .iter()
                .map(|&k| {
                    let mut c = vec![0.0; k as usize + 1];
                    c[k as usize] = 1.0;
                    c
                })
                .collect(),
            extra_factor: ExtraFactor::One,
        }
    }

    pub fn dim(&self) -> usize {
        self.per_coordinate.len()
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.per_coordinate
            .iter()
            .map(|c| c.len().saturating_sub(1))
            .collect()
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.per_coordinate.len());
        let mut w = 1.0;
        for (coeffs, &xi) in self.per_coordinate.iter().zip(x) {
            let mut p = 0.0;
            for &c in coeffs.iter().rev() {
                p = p * xi + c;
            }
            w *= p;
        }
        match &self.extra_factor {
            ExtraFactor::One => w,
            ExtraFactor::ExpNegSum { coords } => {
                let s: f64 = coords.iter().map(|&i| x[i]).sum();
                w * (-s).exp()
            }
        }
    }

    /// Evaluate only the factor belonging to one coordinate.
    pub fn eval_coordinate(&self, i: usize, xi: f64) -> f64 {
        let mut p = 0.0;
        for &c in self.per_coordinate[i].iter().rev() {
            p = p * xi + c;
        }
        let extra = match &self.extra_factor {
            ExtraFactor::ExpNegSum { coords } if coords.contains(&i) => (-xi).exp(),
            _ => 1.0,
        };
        p * extra
    }
}

/// Linear inequality sum_j coeffs_j x_j <= rhs (strictness retained for
/// documentation only; the sampled measure is indifferent to it).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinearConstraint {
    pub coeffs: Vec<f64>,
    pub rhs: f64,
    #[serde(default)]
    pub strict: bool,
}

/// Finite sampling box with optional linear constraints. Infinite supports
/// are truncated by the caller before construction.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainSpec {
    /// Per-coordinate (lower, upper), finite after truncation.
    pub bounds: Vec<(f64, f64)>,
    #[serde(default)]
    pub constraints: Vec<LinearConstraint>,
    /// Marker for domains stable under x -> t x, t >= 1.
    #[serde(default)]
    pub cone: bool,
}

impl DomainSpec {
    pub fn unit_box(n: usize) -> DomainSpec {
        DomainSpec {
            bounds: vec![(0.0, 1.0); n],
            constraints: Vec::new(),
            cone: false,
        }
    }

    pub fn cube(n: usize, lo: f64, hi: f64) -> DomainSpec {
        DomainSpec {
            bounds: vec![(lo, hi); n],
            constraints: Vec::new(),
            cone: false,
        }
    }

    pub fn dim(&self) -> usize {
        self.bounds.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.bounds.is_empty() {
            return Err(Error::InvalidArgument("empty domain".into()));
        }
        for &(lo, hi) in &self.bounds {
            if !lo.is_finite() || !hi.is_finite() || !(hi > lo) {
                return Err(Error::InvalidArgument(format!(
                    "domain bounds must be finite with lower < upper, got ({lo}, {hi})"
                )));
            }
        }
        for c in &self.constraints {
            if c.coeffs.len() != self.bounds.len() {
                return Err(Error::InvalidArgument(
                    "constraint arity does not match domain dimension".into(),
                ));
            }
        }
        if !self.constraints.is_empty() {
            // Nonempty interior, checked by sampling.
            use rand::Rng;
            let mut rng = crate::rng::stream(0xD0AA11, 0);
            let feasible = (0..4096).any(|_| {
                let x: Vec<f64> = self
                    .bounds
                    .iter()
                    .map(|&(lo, hi)| rng.gen_range(lo..hi))
                    .collect();
                self.contains(&x)
            });
            if !feasible {
                return Err(Error::InvalidArgument(
                    "no feasible point found; domain interior appears empty".into(),
                ));
            }
        }
        Ok(())
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        self.constraints.iter().all(|c| {
            let s: f64 = c.coeffs.iter().zip(x).map(|(a, b)| a * b).sum();
            s <= c.rhs
        })
    }

    pub fn volume(&self) -> f64 {
        self.bounds.iter().map(|&(lo, hi)| hi - lo).product()
    }
}

/// Primitive vanishing at 0, sampled on the same grid (cumulative
/// trapezoid; the density is extended by zero below the grid).
pub fn op_p(grid: &DensityGrid) -> DensityGrid {
    let mut out = grid.clone();
    out.variance = vec![0.0; grid.n_bins()];
    let mut acc = 0.0;
    for j in 0..grid.n_bins() {
        if j == 0 {
            // Zero extension below ell_min, then half a bin to the center.
            acc = grid.mass[0] * 0.5 * grid.bin_width;
        } else {
            acc += 0.5 * (grid.mass[j - 1] + grid.mass[j]) * grid.bin_width;
        }
        out.mass[j] = acc;
    }
    out
}

/// Id - P.
pub fn op_l(grid: &DensityGrid) -> DensityGrid {
    let p = op_p(grid);
    let mut out = grid.clone();
    out.variance = vec![0.0; grid.n_bins()];
    for j in 0..grid.n_bins() {
        out.mass[j] = grid.mass[j] - p.mass[j];
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TransformDirection {
    Forward,
    Inverse,
}

fn u_map(l: f64) -> f64 {
    // 2 log(2 cosh(l/2)) = l + 2 log(1 + e^{-l}).
    l + 2.0 * (-l).exp().ln_1p()
}

fn u_inv(y: f64) -> f64 {
    let arg = (0.5 * y).exp() * 0.5;
    if arg <= 1.0 {
        0.0
    } else {
        2.0 * crate::numeric::stable_acosh(arg)
    }
}

/// Re-express a density computed against h as one against u o h (forward)
/// or back (inverse), u(l) = 2 log(2 cosh(l/2)); the Jacobian factor is
/// u'(l) = tanh(l/2). Total mass is preserved up to interpolation error.
pub fn pseudo_length_transform(grid: &DensityGrid, direction: TransformDirection) -> Result<DensityGrid> {
    if grid.ell_min < 0.0 {
        return Err(Error::InvalidArgument(
            "transform requires a grid supported on ell >= 0".into(),
        ));
    }
    let (lo, hi) = match direction {
        TransformDirection::Forward => (u_map(grid.ell_min), u_map(grid.ell_max)),
        TransformDirection::Inverse => (u_inv(grid.ell_min), u_inv(grid.ell_max)),
    };
    let params = GridParams {
        min: lo,
        max: hi,
        bin_width: grid.bin_width,
    };
    let mut out = DensityGrid::zeros(&params)?;
    out.total_samples = grid.total_samples;
    for j in 0..out.n_bins() {
        let v = out.center(j);
        out.mass[j] = match direction {
            TransformDirection::Forward => {
                // G(y) = F(u^{-1}(y)) / u'(u^{-1}(y)).
                let l = u_inv(v);
                let du = (0.5 * l).tanh();
                if du > 0.0 {
                    grid.value_at(l) / du
                } else {
                    0.0
                }
            }
            TransformDirection::Inverse => {
                // F(l) = u'(l) G(u(l)).
                (0.5 * v).tanh() * grid.value_at(u_map(v))
            }
        };
    }
    Ok(out)
}
