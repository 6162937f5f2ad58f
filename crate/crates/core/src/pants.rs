//! Right-angled hexagon/pentagon trigonometry of a hyperbolic pair of pants.
//!
//! Given boundary lengths (x, y, z), the common perpendicular between the
//! x- and y-boundaries meets the arc returning to the z-boundary
//! orthogonally at a point p0. The solver produces the three distances
//!
//!   t      = d(p0, x-boundary)
//!   t_star = d(p0, y-boundary)
//!   ell_star = d(p0, z-boundary)
//!
//! tied together by one hexagon and two pentagon relations:
//!
//!   cosh(t + t*)  = (cosh(x/2) cosh(y/2) + cosh(z/2)) / (sinh(x/2) sinh(y/2))
//!   cosh(t)       = coth(x/2) coth(ell*)
//!   cosh(t*)      = coth(y/2) coth(ell*)
//!
//! Rather than trusting any single closed form, both pentagon relations are
//! imposed and the resulting 1-D problem in u = coth(ell*) is solved by
//! monotone bisection plus a Newton polish; the hexagon identity is then
//! verified as a post-condition. A cusp z = 0 gives u = 1, i.e.
//! ell* = +infinity, with finite t, t*.

use crate::error::{Error, Result};
use crate::numeric::{bisect_newton, ln_cosh, ln_sinh, logaddexp};
use serde::{Deserialize, Serialize};

/// Solved trigonometry of one pair of pants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PantsTrig {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub t: f64,
    pub t_star: f64,
    /// +infinity when z = 0 (cusp).
    pub ell_star: f64,
}

impl PantsTrig {
    /// Hexagon value (cosh(x/2) cosh(y/2) + cosh(z/2)) / (sinh(x/2) sinh(y/2)),
    /// computed in log space so large boundaries do not overflow.
    pub fn hexagon_value(x: f64, y: f64, z: f64) -> f64 {
        let ln_num = logaddexp(ln_cosh(0.5 * x) + ln_cosh(0.5 * y), ln_cosh(0.5 * z));
        let ln_den = ln_sinh(0.5 * x) + ln_sinh(0.5 * y);
        (ln_num - ln_den).exp()
    }

    /// Relative residual of cosh(t + t*) against the hexagon value.
    pub fn hexagon_residual(&self) -> f64 {
        let h = Self::hexagon_value(self.x, self.y, self.z);
        ((self.t + self.t_star).cosh() - h).abs() / h
    }

    /// Relative residual of cosh(t) = coth(x/2) coth(ell*).
    pub fn pentagon_residual_x(&self) -> f64 {
        let rhs = 1.0 / (0.5 * self.x).tanh() * coth_inf(self.ell_star);
        (self.t.cosh() - rhs).abs() / rhs
    }

    /// Relative residual of cosh(t*) = coth(y/2) coth(ell*).
    pub fn pentagon_residual_y(&self) -> f64 {
        let rhs = 1.0 / (0.5 * self.y).tanh() * coth_inf(self.ell_star);
        (self.t_star.cosh() - rhs).abs() / rhs
    }
}

fn coth_inf(v: f64) -> f64 {
    if v.is_infinite() {
        1.0
    } else {
        1.0 / v.tanh()
    }
}

/// arccosh(1 + d) = 2 asinh(sqrt(d/2)), accurate for small d.
fn acosh1p(d: f64) -> f64 {
    2.0 * (0.5 * d).sqrt().asinh()
}

/// Solve the pants trigonometry for boundary lengths x, y > 0, z >= 0
/// (z = 0 encodes a cusp).
pub fn solve_pants(x: f64, y: f64, z: f64) -> Result<PantsTrig> {
    if !(x.is_finite() && y.is_finite() && z.is_finite()) || x <= 0.0 || y <= 0.0 || z < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "solve_pants requires x, y > 0 and z >= 0; got ({x}, {y}, {z})"
        )));
    }
    // a = coth(x/2) - 1 = 2/(e^x - 1), computed without cancellation; the
    // solve runs in the shifted variable w = coth(ell*) - 1 >= 0 so that
    // long boundaries (a, b, w all tiny) keep full relative precision.
    let a = 2.0 / x.exp_m1();
    let b = 2.0 / y.exp_m1();
    let (cx, cy) = (1.0 + a, 1.0 + b);
    let hex = PantsTrig::hexagon_value(x, y, z);
    if !hex.is_finite() {
        return Err(Error::NumericFailure(format!(
            "hexagon value overflows f64 for ({x}, {y}, {z})"
        )));
    }

    // cosh(t) - 1 = a + cx * w and cosh(t*) - 1 = b + cy * w; then
    // g(w) = cosh(t) cosh(t*) + sinh(t) sinh(t*), strictly increasing.
    let parts = |w: f64| {
        let dx = a + cx * w;
        let dy = b + cy * w;
        // sinh^2 = delta (2 + delta)
        let sx2 = dx * (2.0 + dx);
        let sy2 = dy * (2.0 + dy);
        (dx, dy, sx2, sy2)
    };
    let g = |w: f64| {
        let (dx, dy, sx2, sy2) = parts(w);
        (1.0 + dx) * (1.0 + dy) + (sx2 * sy2).sqrt()
    };

    if z == 0.0 || g(0.0) >= hex {
        // Cusp (z = 0), or boundaries so long that the z-term falls below
        // f64 resolution: w = 0, ell* = +inf, and the pentagon relations
        // reduce to cosh(t) = coth(x/2), cosh(t*) = coth(y/2).
        return Ok(PantsTrig {
            x,
            y,
            z,
            t: acosh1p(a),
            t_star: acosh1p(b),
            ell_star: f64::INFINITY,
        });
    }
    let dg = |w: f64| {
        let (dx, dy, sx2, sy2) = parts(w);
        let root = (sx2 * sy2).sqrt();
        let mut d = cy * (1.0 + dx) + cx * (1.0 + dy);
        if root > 0.0 {
            // d/dw sinh^2(t) = 2 cx (1 + dx), etc.
            d += (cx * (1.0 + dx) * sy2 + cy * (1.0 + dy) * sx2) / root;
        }
        d
    };
    // Upper bracket: (1 + w)^2 <= hex / (cx cy) at the root.
    let w_hi = (0.5 * (hex.ln() - cx.ln() - cy.ln())).exp_m1() * (1.0 + 1e-12) + 1e-300;
    let w = bisect_newton(|w| g(w) - hex, dg, 0.0, w_hi, 1e-13).map_err(|e| {
        Error::NumericFailure(format!(
            "pants root-finding failed for ({x}, {y}, {z}): {e}"
        ))
    })?;

    let (dx, dy, _, _) = parts(w);
    let trig = PantsTrig {
        x,
        y,
        z,
        t: acosh1p(dx),
        t_star: acosh1p(dy),
        // arcoth(1 + w) = (1/2) ln((2 + w)/w), stable in w.
        ell_star: 0.5 * ((2.0 + w) / w).ln(),
    };
    // The hexagon identity is the independent post-condition. On moderate
    // boundary lengths the residual sits near machine precision; for very
    // long boundaries (coth(x/2) within a few ulp of 1) the achievable
    // accuracy decays, so the gate is a coarse sanity bound rather than the
    // accuracy contract (which the tests pin on the working range).
    let res = trig.hexagon_residual();
    if !(res < 1e-6) {
        return Err(Error::NumericFailure(format!(
            "hexagon post-condition violated for ({x}, {y}, {z}): residual {res:.3e}"
        )));
    }
    Ok(trig)
}
