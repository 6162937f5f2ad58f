//! Small numerical utilities shared by the engines: stable elementary
//! functions, root finding, 1-D minimization, quadrature and least squares.

use crate::error::{Error, Result};

/// log(exp(a) + exp(b)) without overflow.
pub fn logaddexp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// ln cosh(v), stable for large |v|.
pub fn ln_cosh(v: f64) -> f64 {
    let a = v.abs();
    a + (-2.0 * a).exp().ln_1p() - std::f64::consts::LN_2
}

/// ln sinh(v) for v > 0, stable for large v.
pub fn ln_sinh(v: f64) -> f64 {
    debug_assert!(v > 0.0);
    v + (-(-2.0 * v).exp()).ln_1p() - std::f64::consts::LN_2
}

/// arccosh that avoids squaring overflow for very large arguments.
pub fn stable_acosh(v: f64) -> f64 {
    debug_assert!(v >= 1.0);
    if v > 1e150 {
        std::f64::consts::LN_2 + v.ln()
    } else {
        v.acosh()
    }
}

/// arcoth(u) = atanh(1/u) for u > 1; +inf at u = 1.
pub fn arcoth(u: f64) -> f64 {
    if u <= 1.0 {
        f64::INFINITY
    } else {
        (1.0 / u).atanh()
    }
}

/// Root of a strictly monotone function on a bracket, by bisection followed
/// by a Newton polish. `f` must have opposite signs at `lo` and `hi`.
pub fn bisect_newton<F, D>(f: F, df: D, lo: f64, hi: f64, tol: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    let (mut a, mut b) = (lo, hi);
    let (fa, fb) = (f(a), f(b));
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::NumericFailure(format!(
            "root not bracketed on [{a}, {b}]: f = ({fa}, {fb})"
        )));
    }
    let increasing = fb > 0.0;
    // Safeguarded Newton: maintain the bracket, take Newton steps when they
    // stay inside it and bisect otherwise. The stopping criterion is
    // relative to the root location so that roots many orders of magnitude
    // smaller than the initial bracket are still resolved.
    let mut x = 0.5 * (a + b);
    for _ in 0..220 {
        let fx = f(x);
        if fx == 0.0 {
            return Ok(x);
        }
        if (fx > 0.0) == increasing {
            b = x;
        } else {
            a = x;
        }
        let width = b - a;
        if width <= tol * a.abs().max(b.abs()) || width <= f64::MIN_POSITIVE {
            return Ok(0.5 * (a + b));
        }
        let d = df(x);
        let mut step = if d != 0.0 { -fx / d } else { 0.0 };
        if !step.is_finite() || x + step <= a || x + step >= b {
            step = 0.5 * (a + b) - x;
        }
        x += step;
    }
    Ok(x)
}

/// Golden-section minimum of a unimodal function on [a, b].
pub fn golden_min<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> (f64, f64) {
    const INVPHI: f64 = 0.618_033_988_749_894_9;
    let (mut a, mut b) = (a, b);
    let mut c = b - INVPHI * (b - a);
    let mut d = a + INVPHI * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INVPHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INVPHI * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}

/// Composite Simpson rule with n (even, >= 2) subintervals.
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    let n = if n % 2 == 0 { n } else { n + 1 };
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let x = a + i as f64 * h;
        s += f(x) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

/// Gauss-Legendre nodes and weights on [-1, 1], computed by Newton iteration
/// on the Legendre recurrence.
pub fn gauss_legendre(order: usize) -> Vec<(f64, f64)> {
    let n = order;
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        // Chebyshev-like initial guess.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0f64, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            // Derivative of P_n via the standard identity.
            let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (mut p0, mut p1) = (1.0f64, x);
        for k in 2..=n {
            let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
            p0 = p1;
            p1 = p2;
        }
        let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        out.push((x, w));
    }
    out.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    out
}

/// Integrate `f` on [a, b] with a fixed-order Gauss-Legendre rule.
pub fn gl_integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, nodes: &[(f64, f64)]) -> f64 {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    nodes.iter().map(|&(x, w)| w * f(c + h * x)).sum::<f64>() * h
}

/// Solve a dense symmetric positive (semi)definite system by Gaussian
/// elimination with partial pivoting. Returns the solution and an estimate
/// of the condition number from the pivot ratio.
pub fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Result<(Vec<f64>, f64)> {
    let n = b.len();
    let mut max_piv = 0.0f64;
    let mut min_piv = f64::INFINITY;
    for col in 0..n {
        let (mut piv, mut pval) = (col, a[col][col].abs());
        for r in col + 1..n {
            if a[r][col].abs() > pval {
                piv = r;
                pval = a[r][col].abs();
            }
        }
        if pval == 0.0 || !pval.is_finite() {
            return Err(Error::NumericFailure("singular normal equations".into()));
        }
        a.swap(col, piv);
        b.swap(col, piv);
        max_piv = max_piv.max(pval);
        min_piv = min_piv.min(pval);
        for r in col + 1..n {
            let factor = a[r][col] / a[col][col];
            for c in col..n {
                a[r][c] -= factor * a[col][c];
            }
            b[r] -= factor * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut s = b[row];
        for c in row + 1..n {
            s -= a[row][c] * x[c];
        }
        x[row] = s / a[row][row];
    }
    Ok((x, max_piv / min_piv))
}

/// Weighted polynomial least squares: fit sum_k c_k basis_k(x) minimizing
/// sum_i w_i (y_i - p(x_i))^2 where basis_k(x) = s^k with s the affine map
/// of [x0, x1] onto [-1, 1]. Returns coefficients in the scaled variable
/// together with the scaling, and the normal-equation condition estimate.
pub struct ScaledPolyFit {
    pub coeffs: Vec<f64>,
    pub x0: f64,
    pub x1: f64,
    pub cond: f64,
}

impl ScaledPolyFit {
    pub fn eval(&self, x: f64) -> f64 {
        let s = if self.x1 > self.x0 {
            2.0 * (x - self.x0) / (self.x1 - self.x0) - 1.0
        } else {
            0.0
        };
        let mut acc = 0.0;
        for &c in self.coeffs.iter().rev() {
            acc = acc * s + c;
        }
        acc
    }

    /// Coefficients in the unscaled variable, ascending degree.
    pub fn unscaled_coeffs(&self) -> Vec<f64> {
        // Expand sum_k c_k ((2x - x0 - x1)/(x1 - x0))^k by repeated
        // multiplication with the affine factor.
        let n = self.coeffs.len();
        let mut out = vec![0.0; n];
        let (alpha, beta) = if self.x1 > self.x0 {
            (
                2.0 / (self.x1 - self.x0),
                -(self.x0 + self.x1) / (self.x1 - self.x0),
            )
        } else {
            (1.0, 0.0)
        };
        // power = (alpha x + beta)^k, maintained as coefficient vector
        let mut power = vec![0.0; n];
        if n > 0 {
            power[0] = 1.0;
        }
        for (k, &c) in self.coeffs.iter().enumerate() {
            if k > 0 {
                // multiply power by (alpha x + beta)
                let mut next = vec![0.0; n];
                for (d, &p) in power.iter().enumerate() {
                    if p != 0.0 {
                        next[d] += p * beta;
                        if d + 1 < n {
                            next[d + 1] += p * alpha;
                        }
                    }
                }
                power = next;
            }
            for d in 0..n {
                out[d] += c * power[d];
            }
        }
        out
    }
}

pub fn polyfit_weighted(xs: &[f64], ys: &[f64], ws: &[f64], degree: usize) -> Result<ScaledPolyFit> {
    assert_eq!(xs.len(), ys.len());
    assert_eq!(xs.len(), ws.len());
    if xs.len() <= degree {
        return Err(Error::InvalidArgument(
            "not enough samples for the requested degree".into(),
        ));
    }
    let x0 = xs.iter().cloned().fold(f64::INFINITY, f64::min);
    let x1 = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let scale = |x: f64| {
        if x1 > x0 {
            2.0 * (x - x0) / (x1 - x0) - 1.0
        } else {
            0.0
        }
    };
    let m = degree + 1;
    let mut ata = vec![vec![0.0; m]; m];
    let mut atb = vec![0.0; m];
    let mut basis = vec![0.0; m];
    for ((&x, &y), &w) in xs.iter().zip(ys).zip(ws) {
        let s = scale(x);
        basis[0] = 1.0;
        for k in 1..m {
            basis[k] = basis[k - 1] * s;
        }
        for r in 0..m {
            for c in 0..m {
                ata[r][c] += w * basis[r] * basis[c];
            }
            atb[r] += w * basis[r] * y;
        }
    }
    let (coeffs, cond) = solve_dense(ata, atb)?;
    Ok(ScaledPolyFit {
        coeffs,
        x0,
        x1,
        cond,
    })
}

/// Plain affine least-squares fit; returns (slope, intercept).
pub fn linfit(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let sx: f64 = xs.iter().sum();
    let sy: f64 = ys.iter().sum();
    let sxx: f64 = xs.iter().map(|x| x * x).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| x * y).sum();
    let det = n * sxx - sx * sx;
    if det == 0.0 {
        return (0.0, sy / n.max(1.0));
    }
    let slope = (n * sxy - sx * sy) / det;
    let intercept = (sy - slope * sx) / n;
    (slope, intercept)
}

/// Nonnegative least squares (Lawson-Hanson active set): minimize
/// ||A c - b||_2 subject to c >= 0. `a` is row-major, rows = observations.
pub fn nnls(a: &[Vec<f64>], b: &[f64]) -> Result<Vec<f64>> {
    let rows = a.len();
    let cols = if rows > 0 { a[0].len() } else { 0 };
    assert_eq!(rows, b.len());
    let mut passive: Vec<bool> = vec![false; cols];
    let mut x = vec![0.0f64; cols];

    let residual = |x: &[f64]| -> Vec<f64> {
        (0..rows)
            .map(|i| b[i] - a[i].iter().zip(x).map(|(aij, xj)| aij * xj).sum::<f64>())
            .collect()
    };

    // Solve the unconstrained LS problem restricted to the passive set.
    let solve_passive = |passive: &[bool]| -> Result<Vec<f64>> {
        let idx: Vec<usize> = (0..cols).filter(|&j| passive[j]).collect();
        if idx.is_empty() {
            return Ok(vec![0.0; cols]);
        }
        let m = idx.len();
        let mut ata = vec![vec![0.0; m]; m];
        let mut atb = vec![0.0; m];
        for i in 0..rows {
            for (r, &jr) in idx.iter().enumerate() {
                let air = a[i][jr];
                if air == 0.0 {
                    continue;
                }
                for (c, &jc) in idx.iter().enumerate() {
                    ata[r][c] += air * a[i][jc];
                }
                atb[r] += air * b[i];
            }
        }
        // Tiny ridge for numerical safety on nearly collinear candidates.
        for r in 0..m {
            ata[r][r] += 1e-12 * (1.0 + ata[r][r]);
        }
        let (z, _) = solve_dense(ata, atb)?;
        let mut full = vec![0.0; cols];
        for (r, &j) in idx.iter().enumerate() {
            full[j] = z[r];
        }
        Ok(full)
    };

    for _outer in 0..10 * cols.max(1) {
        let r = residual(&x);
        // Gradient of 0.5||Ax-b||^2 is -A^T r; candidate = most positive A^T r.
        let mut best = (0usize, 0.0f64);
        for j in 0..cols {
            if passive[j] {
                continue;
            }
            let g: f64 = (0..rows).map(|i| a[i][j] * r[i]).sum();
            if g > best.1 {
                best = (j, g);
            }
        }
        let bnorm = 1.0 + b.iter().map(|v| v * v).sum::<f64>().sqrt();
        if best.1 <= 1e-12 * bnorm {
            break;
        }
        passive[best.0] = true;
        let mut z = solve_passive(&passive)?;
        // Inner loop: move towards z, dropping passive variables that would
        // become negative.
        for _inner in 0..10 * cols.max(1) {
            let neg: Vec<usize> = (0..cols)
                .filter(|&j| passive[j] && z[j] <= 0.0)
                .collect();
            if neg.is_empty() {
                break;
            }
            let mut alpha = f64::INFINITY;
            for &j in &neg {
                let denom = x[j] - z[j];
                if denom > 0.0 {
                    alpha = alpha.min(x[j] / denom);
                }
            }
            if !alpha.is_finite() {
                alpha = 0.0;
            }
            for j in 0..cols {
                if passive[j] {
                    x[j] += alpha * (z[j] - x[j]);
                    if x[j] <= 1e-14 {
                        x[j] = 0.0;
                        passive[j] = false;
                    }
                }
            }
            z = solve_passive(&passive)?;
        }
        x = z;
    }
    for v in &mut x {
        if *v < 0.0 {
            *v = 0.0;
        }
    }
    Ok(x)
}
