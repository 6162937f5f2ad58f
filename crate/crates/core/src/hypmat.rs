//! Overflow-safe 2x2 real matrix algebra for SL2(R) holonomy.
//!
//! A matrix is stored as a normalized block times an exponential scale
//! factor: the represented matrix is `exp(log_scale) * [[e11, e12], [e21,
//! e22]]` with the block renormalized after every construction and
//! multiplication so its largest entry stays in [1/2, 2]. Lengths enter the
//! entries exponentially, so long products at large coordinates would
//! overflow plain doubles; the running scale keeps the pipeline safe for
//! represented magnitudes far beyond f64 range.

use crate::error::{ElementKind, Error, Result};
use crate::numeric::stable_acosh;
use crate::pants::PantsTrig;
use serde::{Deserialize, Serialize};

/// Log-rescaled 2x2 matrix.
///
/// The block entries additionally carry double-double low-order parts
/// (representation detail, not serialized): long products pass through
/// near-cancellations whose lost digits a plain f64 block could never
/// recover, and the compensated terms keep trace identities valid at the
/// 1e-10 level for words of hundreds of generators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mat2 {
    pub e11: f64,
    pub e12: f64,
    pub e21: f64,
    pub e22: f64,
    /// Natural-log magnitude factor.
    pub log_scale: f64,
    #[serde(skip)]
    lo: [f64; 4],
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let e = (a - (s - bb)) + (b - bb);
    (s, e)
}

/// Double-double value (hi, lo) helpers.
#[inline]
fn dd_renorm(hi: f64, lo: f64) -> (f64, f64) {
    two_sum(hi, lo)
}

#[inline]
fn dd_add(a: (f64, f64), b: (f64, f64)) -> (f64, f64) {
    let (s, e) = two_sum(a.0, b.0);
    dd_renorm(s, e + a.1 + b.1)
}

#[inline]
fn dd_mul(a: (f64, f64), b: (f64, f64)) -> (f64, f64) {
    let p = a.0 * b.0;
    let e = a.0.mul_add(b.0, -p);
    dd_renorm(p, e + a.0 * b.1 + a.1 * b.0)
}

/// Generator kinds: rotations R(theta), diagonal translations a(l) and the
/// symmetric offset w(l) = R(-pi/2) a(l) R(pi/2).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GeneratorKind {
    Rotation,
    Translation,
    Woffset,
}

/// Signed trace with a log-magnitude form for the overflow regime.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SignedTrace {
    /// -1, 0 or +1; 0 iff the trace is exactly zero.
    pub sign: i8,
    /// ln |trace|; NEG_INFINITY when the trace is zero.
    pub log_abs: f64,
    /// Direct value sign * exp(log_abs); only meaningful while log_abs < 700.
    pub value: f64,
}

impl SignedTrace {
    /// |trace| as an f64 (infinite in the overflow regime).
    pub fn abs(&self) -> f64 {
        self.log_abs.exp()
    }
}

impl Mat2 {
    pub(crate) fn from_block(e11: f64, e12: f64, e21: f64, e22: f64, log_scale: f64) -> Mat2 {
        let mut m = Mat2 {
            e11,
            e12,
            e21,
            e22,
            log_scale,
            lo: [0.0; 4],
        };
        m.normalize();
        m
    }

    /// Rescale by a power of two (exact on both double-double components),
    /// keeping the largest entry in [1/sqrt2, sqrt2] subset of [1/2, 2].
    fn normalize(&mut self) {
        let mx = self
            .e11
            .abs()
            .max(self.e12.abs())
            .max(self.e21.abs())
            .max(self.e22.abs());
        if mx > 0.0 && mx.is_finite() {
            let k = mx.log2().round();
            if k != 0.0 {
                let s = (-k).exp2();
                self.e11 *= s;
                self.e12 *= s;
                self.e21 *= s;
                self.e22 *= s;
                for l in &mut self.lo {
                    *l *= s;
                }
                self.log_scale += k * std::f64::consts::LN_2;
            }
        }
    }

    pub fn identity() -> Mat2 {
        Mat2 {
            e11: 1.0,
            e12: 0.0,
            e21: 0.0,
            e22: 1.0,
            log_scale: 0.0,
            lo: [0.0; 4],
        }
    }

    /// R(theta) = [[cos(t/2), sin(t/2)], [-sin(t/2), cos(t/2)]].
    pub fn rotation(theta: f64) -> Mat2 {
        let (s, c) = (0.5 * theta).sin_cos();
        Mat2::from_block(c, s, -s, c, 0.0)
    }

    /// a(l) = diag(e^{l/2}, e^{-l/2}), built directly in log form.
    pub fn translation(l: f64) -> Mat2 {
        let h = l.abs() * 0.5;
        Mat2 {
            e11: (0.5 * l - h).exp(),
            e12: 0.0,
            e21: 0.0,
            e22: (-0.5 * l - h).exp(),
            log_scale: h,
            lo: [0.0; 4],
        }
    }

    /// w(l) = [[cosh(l/2), sinh(l/2)], [sinh(l/2), cosh(l/2)]].
    pub fn woffset(l: f64) -> Mat2 {
        let h = l.abs() * 0.5;
        let q = (-2.0 * h).exp();
        let sg = if l >= 0.0 { 1.0 } else { -1.0 };
        // cosh(l/2) = e^{h} (1+q)/2, sinh(l/2) = sign(l) e^{h} (1-q)/2.
        // The entries are seeded as double-double splits 0.5 +- q/2: for
        // large l the block rounds to the exactly singular [[.5,.5],[.5,.5]]
        // in plain f64 and products like w(L) w(-L') would annihilate; the
        // low-order parts keep the q-information alive.
        let (ch, cl) = two_sum(0.5, 0.5 * q);
        let (sh, sl) = two_sum(0.5, -0.5 * q);
        let mut m = Mat2 {
            e11: ch,
            e12: sg * sh,
            e21: sg * sh,
            e22: ch,
            log_scale: h,
            lo: [cl, sg * sl, sg * sl, cl],
        };
        m.normalize();
        m
    }

    /// W = R(pi) = [[0, 1], [-1, 0]].
    pub fn w_rotation() -> Mat2 {
        Mat2 {
            e11: 0.0,
            e12: 1.0,
            e21: -1.0,
            e22: 0.0,
            log_scale: 0.0,
            lo: [0.0; 4],
        }
    }

    #[inline]
    fn entry(&self, i: usize) -> (f64, f64) {
        let hi = match i {
            0 => self.e11,
            1 => self.e12,
            2 => self.e21,
            _ => self.e22,
        };
        (hi, self.lo[i])
    }

    pub fn mul(&self, rhs: &Mat2) -> Mat2 {
        // Double-double dot products a*b + c*d: interior cancellations no
        // longer erase digits, so trace identities of long words survive.
        let dot2 = |i: usize, k: usize, j: usize| -> (f64, f64) {
            dd_add(
                dd_mul(self.entry(i), rhs.entry(k)),
                dd_mul(self.entry(i + 1), rhs.entry(j)),
            )
        };
        let c11 = dot2(0, 0, 2);
        let c12 = dot2(0, 1, 3);
        let c21 = dot2(2, 0, 2);
        let c22 = dot2(2, 1, 3);
        let mut m = Mat2 {
            e11: c11.0,
            e12: c12.0,
            e21: c21.0,
            e22: c22.0,
            log_scale: self.log_scale + rhs.log_scale,
            lo: [c11.1, c12.1, c21.1, c22.1],
        };
        m.normalize();
        m
    }

    /// Adjugate inverse, valid for unimodular matrices:
    /// inv(e^{s} B) = e^{s} adj(B) when det(represented) = 1.
    pub fn inverse(&self) -> Mat2 {
        let mut m = Mat2 {
            e11: self.e22,
            e12: -self.e12,
            e21: -self.e21,
            e22: self.e11,
            log_scale: self.log_scale,
            lo: [self.lo[3], -self.lo[1], -self.lo[2], self.lo[0]],
        };
        m.normalize();
        m
    }

    /// Determinant of the normalized block (the represented determinant is
    /// exp(2 log_scale) times this), in compensated arithmetic.
    pub fn block_det(&self) -> f64 {
        let a = dd_mul(self.entry(0), self.entry(3));
        let b = dd_mul(self.entry(1), self.entry(2));
        let d = dd_add(a, (-b.0, -b.1));
        d.0 + d.1
    }

    /// Residual of the unimodularity invariant det(block) = exp(-2 log_scale).
    ///
    /// Scaled by the magnitude of the products entering the determinant:
    /// deep in the hyperbolic regime exp(-2 log_scale) falls below the
    /// eps-level cancellation noise of e11 e22 - e12 e21, so the diagonal
    /// product is the natural conditioning scale of the check.
    pub fn unimodular_residual(&self) -> f64 {
        let expected = (-2.0 * self.log_scale).exp();
        let det = self.block_det();
        let mx = self
            .e11
            .abs()
            .max(self.e12.abs())
            .max(self.e21.abs())
            .max(self.e22.abs());
        let denom = (self.e11 * self.e22)
            .abs()
            .max((self.e12 * self.e21).abs())
            .max(expected)
            .max(mx * mx)
            .max(1e-300);
        (det - expected).abs() / denom
    }

    pub fn trace_signed(&self) -> SignedTrace {
        let t = dd_add(self.entry(0), self.entry(3));
        let tr = t.0 + t.1;
        if tr == 0.0 {
            return SignedTrace {
                sign: 0,
                log_abs: f64::NEG_INFINITY,
                value: 0.0,
            };
        }
        let sign = if tr > 0.0 { 1i8 } else { -1i8 };
        let log_abs = self.log_scale + tr.abs().ln();
        let value = sign as f64 * log_abs.exp();
        SignedTrace {
            sign,
            log_abs,
            value,
        }
    }

    /// Entrywise comparison of the represented matrices, relative to the
    /// larger magnitude scale.
    pub fn approx_eq(&self, other: &Mat2, tol: f64) -> bool {
        let m = self.log_scale.max(other.log_scale);
        let (fa, fb) = ((self.log_scale - m).exp(), (other.log_scale - m).exp());
        let d = (self.e11 * fa - other.e11 * fb)
            .abs()
            .max((self.e12 * fa - other.e12 * fb).abs())
            .max((self.e21 * fa - other.e21 * fb).abs())
            .max((self.e22 * fa - other.e22 * fb).abs());
        d <= tol
    }

    /// Low-order double-double parts of the block entries (diagnostics).
    pub fn lo_parts(&self) -> [f64; 4] {
        self.lo
    }

    /// Largest entry magnitude of the represented matrix, as (log value).
    pub fn log_max_entry(&self) -> f64 {
        let mx = self
            .e11
            .abs()
            .max(self.e12.abs())
            .max(self.e21.abs())
            .max(self.e22.abs());
        self.log_scale + mx.ln()
    }

    pub fn min_entry(&self) -> f64 {
        self.e11.min(self.e12).min(self.e21).min(self.e22)
    }
}

/// Build one of the three elementary generators.
pub fn make_generator(kind: GeneratorKind, param: f64) -> Result<Mat2> {
    if !param.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "generator parameter must be finite, got {param}"
        )));
    }
    Ok(match kind {
        GeneratorKind::Rotation => Mat2::rotation(param),
        GeneratorKind::Translation => Mat2::translation(param),
        GeneratorKind::Woffset => Mat2::woffset(param),
    })
}

/// Ordered product of a non-empty sequence, renormalized after every
/// binary multiply.
pub fn compose(factors: &[Mat2]) -> Result<Mat2> {
    let mut it = factors.iter();
    let first = it
        .next()
        .ok_or_else(|| Error::InvalidArgument("compose of an empty sequence".into()))?;
    let mut acc = *first;
    for f in it {
        acc = acc.mul(f);
    }
    Ok(acc)
}

/// Inverse, checking the unimodular invariant first.
pub fn invert(m: &Mat2) -> Result<Mat2> {
    if m.unimodular_residual() > 1e-6 {
        return Err(Error::InconsistentInput(format!(
            "matrix is not unimodular (residual {:.3e})",
            m.unimodular_residual()
        )));
    }
    Ok(m.inverse())
}

pub fn trace_signed(m: &Mat2) -> SignedTrace {
    m.trace_signed()
}

/// Translation length of a hyperbolic element from its trace:
/// l = 2 arccosh(|Tr|/2), evaluated in log space when the trace is large.
///
/// `boundary_tol` widens the non-hyperbolic band: |Tr| <= 2 + boundary_tol
/// is rejected. The strict default (0) only rejects |Tr| <= 2; callers that
/// want a guard band pass [`TRACE_BOUNDARY_TOL`].
pub fn trace_to_length_with_tol(t: &SignedTrace, boundary_tol: f64) -> Result<f64> {
    if t.sign == 0 {
        return Err(Error::NonHyperbolic {
            kind: ElementKind::Elliptic,
            trace_abs: 0.0,
        });
    }
    if t.log_abs < 30.0 {
        let abs = t.log_abs.exp();
        if abs <= 2.0 + boundary_tol {
            let kind = if abs < 2.0 - 1e-12 {
                ElementKind::Elliptic
            } else {
                ElementKind::Parabolic
            };
            return Err(Error::NonHyperbolic {
                kind,
                trace_abs: abs,
            });
        }
        Ok(2.0 * stable_acosh(abs * 0.5))
    } else {
        // arccosh(u) = ln u + ln(1 + sqrt(1 - u^{-2})), u = |Tr|/2.
        let inv_u2 = 4.0 * (-2.0 * t.log_abs).exp();
        let ln_u = t.log_abs - std::f64::consts::LN_2;
        Ok(2.0 * (ln_u + (1.0 - inv_u2).sqrt().ln_1p()))
    }
}

/// Default guard band for parabolic/elliptic classification used by callers
/// that prefer to reject near-parabolic traces outright.
pub const TRACE_BOUNDARY_TOL: f64 = 1e-12;

pub fn trace_to_length(t: &SignedTrace) -> Result<f64> {
    trace_to_length_with_tol(t, 0.0)
}

/// Which pair-of-pants generator a word letter winds around.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Letter {
    A,
    B,
}

/// S-form holonomy factor for a power of one pants generator:
///
/// ```text
/// smat(A, n) = eps_n [[ sinh(t) sinh(nx/2),  cosh(t) sinh(nx/2) + cosh(nx/2) ],
///                     [ cosh(t) sinh(nx/2) - cosh(nx/2),  sinh(t) sinh(nx/2) ]]
/// ```
///
/// with (t, x) replaced by (t*, y) for the letter B. All four entries are
/// nonnegative for every n != 0. For the letter A this equals
/// eps_n R(pi/2) A^n R(pi/2) exactly; for the letter B the analogous
/// identity holds up to an overall sign (the two lifts agree in PSL2).
pub fn smat(letter: Letter, n: i32, trig: &PantsTrig) -> Result<Mat2> {
    if n == 0 {
        return Err(Error::InvalidArgument("smat exponent must be nonzero".into()));
    }
    let (t, half) = match letter {
        Letter::A => (trig.t, trig.x * 0.5),
        Letter::B => (trig.t_star, trig.y * 0.5),
    };
    let eps = if n > 0 { 1.0 } else { -1.0 };
    let na = n.unsigned_abs() as f64 * half;
    let sh = na.sinh();
    let ch = na.cosh();
    let (st, ct) = (t.sinh(), t.cosh());
    // eps_n [[sinh t sinh(nx/2), cosh t sinh(nx/2) + cosh(nx/2)], ...]
    // written with |n|: the eps flips the cosh(nx/2) terms only.
    Ok(Mat2::from_block(
        st * sh,
        ct * sh + eps * ch,
        ct * sh - eps * ch,
        st * sh,
        0.0,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pants::solve_pants;

    const PI: f64 = std::f64::consts::PI;

    #[test]
    fn rotation_zero_is_identity() {
        let m = make_generator(GeneratorKind::Rotation, 0.0).unwrap();
        assert!(m.approx_eq(&Mat2::identity(), 1e-15));
    }

    #[test]
    fn rotation_pi_is_w() {
        let m = Mat2::rotation(PI);
        assert!(m.approx_eq(&Mat2::w_rotation(), 1e-15));
    }

    #[test]
    fn woffset_is_conjugated_translation() {
        for &l in &[0.3, 2.0, -1.7, 40.0] {
            let lhs = Mat2::woffset(l);
            let rhs = compose(&[
                Mat2::rotation(-PI / 2.0),
                Mat2::translation(l),
                Mat2::rotation(PI / 2.0),
            ])
            .unwrap();
            assert!(lhs.approx_eq(&rhs, 1e-14), "l = {l}");
        }
    }

    #[test]
    fn translations_form_one_parameter_subgroup() {
        let m = compose(&[Mat2::translation(0.7), Mat2::translation(1.9)]).unwrap();
        assert!(m.approx_eq(&Mat2::translation(2.6), 1e-14));
    }

    #[test]
    fn w_squared_is_minus_identity() {
        let w = Mat2::w_rotation();
        let m = compose(&[w, w]).unwrap();
        let minus_id = Mat2::from_block(-1.0, 0.0, 0.0, -1.0, 0.0);
        assert!(m.approx_eq(&minus_id, 1e-15));
    }

    #[test]
    fn invert_translation() {
        let m = Mat2::translation(3.7);
        assert!(invert(&m).unwrap().approx_eq(&Mat2::translation(-3.7), 1e-14));
        let id = compose(&[m, invert(&m).unwrap()]).unwrap();
        assert!(id.approx_eq(&Mat2::identity(), 1e-12));
    }

    #[test]
    fn trace_of_rotation_and_translation() {
        let t = Mat2::rotation(1.2).trace_signed();
        assert!((t.value - 2.0 * (0.6f64).cos()).abs() < 1e-14);
        let t = Mat2::translation(2.0).trace_signed();
        assert!((t.value - 2.0 * 1f64.cosh()).abs() < 1e-13);
    }

    #[test]
    fn trace_to_length_inverts_translation_trace() {
        // Relative accuracy over the numerically accessible range; below
        // l ~ 1e-2 the arccosh conditioning near 1 limits f64 accuracy.
        let mut l = 1e-2;
        while l < 1e5 {
            let tr = Mat2::translation(l).trace_signed();
            let back = trace_to_length(&tr).unwrap();
            assert!(
                (back - l).abs() <= 1e-10 * l,
                "l = {l}, back = {back}"
            );
            l *= 3.1;
        }
        // Tiny lengths still round-trip monotonically, at reduced accuracy.
        let tr = Mat2::translation(1e-6).trace_signed();
        let back = trace_to_length(&tr).unwrap();
        assert!((back - 1e-6).abs() < 1e-2 * 1e-6 + 1e-9);
    }

    #[test]
    fn trace_to_length_rejects_non_hyperbolic() {
        let id = Mat2::identity().trace_signed();
        match trace_to_length(&id) {
            Err(Error::NonHyperbolic { kind, .. }) => assert_eq!(kind, ElementKind::Parabolic),
            other => panic!("expected parabolic rejection, got {other:?}"),
        }
        let rot = Mat2::rotation(1.0).trace_signed();
        match trace_to_length(&rot) {
            Err(Error::NonHyperbolic { kind, .. }) => assert_eq!(kind, ElementKind::Elliptic),
            other => panic!("expected elliptic rejection, got {other:?}"),
        }
        // |Tr| = 6 -> l = 2 arccosh(3) = 2 ln(3 + sqrt 8).
        let st = SignedTrace {
            sign: 1,
            log_abs: 6f64.ln(),
            value: 6.0,
        };
        let l = trace_to_length(&st).unwrap();
        assert!((l - 2.0 * (3.0 + 8f64.sqrt()).ln()).abs() < 1e-12);
    }

    #[test]
    fn trace_formula_on_generators() {
        let u = compose(&[Mat2::translation(1.1), Mat2::rotation(0.4)]).unwrap();
        let v = compose(&[Mat2::woffset(0.9), Mat2::rotation(-1.3)]).unwrap();
        let uv = u.mul(&v);
        let uinv_v = u.inverse().mul(&v);
        let lhs = uv.trace_signed().value;
        let rhs = u.trace_signed().value * v.trace_signed().value - uinv_v.trace_signed().value;
        assert!((lhs - rhs).abs() < 1e-12 * lhs.abs().max(1.0));
    }

    #[test]
    fn smat_matches_conjugated_power_for_letter_a() {
        let trig = solve_pants(2.0, 1.3, 0.8).unwrap();
        for &n in &[1i32, 2, 5, -1, -3] {
            let s = smat(Letter::A, n, &trig).unwrap();
            let mut a_pow = Mat2::identity();
            let a = crate::loops::pants_generator(Letter::A, if n > 0 { 1 } else { -1 }, &trig);
            for _ in 0..n.unsigned_abs() {
                a_pow = a_pow.mul(&a);
            }
            let eps = if n > 0 { 1.0 } else { -1.0 };
            let conj = compose(&[Mat2::rotation(PI / 2.0), a_pow, Mat2::rotation(PI / 2.0)]).unwrap();
            let scaled = Mat2::from_block(
                eps * conj.e11,
                eps * conj.e12,
                eps * conj.e21,
                eps * conj.e22,
                conj.log_scale,
            );
            assert!(s.approx_eq(&scaled, 1e-11), "n = {n}");
        }
    }

    #[test]
    fn smat_entries_nonnegative() {
        let trig = solve_pants(0.4, 7.0, 3.3).unwrap();
        for &n in &[3i32, -4, 1, -1] {
            for &letter in &[Letter::A, Letter::B] {
                let s = smat(letter, n, &trig).unwrap();
                assert!(s.min_entry() >= -1e-15, "letter {letter:?} n {n}");
            }
        }
    }

    #[test]
    fn smat_letter_swap_symmetry() {
        // smat(B, n) at (x, y, z) equals smat(A, n) at (y, x, z).
        let t1 = solve_pants(1.1, 2.7, 0.5).unwrap();
        let t2 = solve_pants(2.7, 1.1, 0.5).unwrap();
        for &n in &[2i32, -3] {
            let sb = smat(Letter::B, n, &t1).unwrap();
            let sa = smat(Letter::A, n, &t2).unwrap();
            assert!(sb.approx_eq(&sa, 1e-11));
        }
    }

    #[test]
    fn smat_inverse_is_w_conjugate_of_negative_power() {
        let trig = solve_pants(1.4, 0.9, 2.2).unwrap();
        for &n in &[1i32, 4, -2] {
            let s = smat(Letter::A, n, &trig).unwrap();
            let s_neg = smat(Letter::A, -n, &trig).unwrap();
            let w = Mat2::w_rotation();
            let rhs = compose(&[w, s_neg, invert(&w).unwrap()]).unwrap();
            assert!(invert(&s).unwrap().approx_eq(&rhs, 1e-11), "n = {n}");
        }
    }

    #[test]
    fn w_conjugation_flips_translation_and_woffset() {
        let w = Mat2::w_rotation();
        let winv = invert(&w).unwrap();
        for &l in &[0.8, -2.5, 13.0] {
            let lhs = compose(&[w, Mat2::translation(l), winv]).unwrap();
            assert!(lhs.approx_eq(&Mat2::translation(-l), 1e-12));
            let lhs = compose(&[w, Mat2::woffset(l), winv]).unwrap();
            assert!(lhs.approx_eq(&Mat2::woffset(-l), 1e-12));
        }
    }

    #[test]
    fn huge_translation_product_stays_normalized() {
        // Represented magnitude up to exp(1e6) without overflow.
        let factors: Vec<Mat2> = (0..100).map(|_| Mat2::translation(2e4)).collect();
        let m = compose(&factors).unwrap();
        assert!((m.log_scale - 1e6).abs() < 1e-6 * 1e6);
        assert!(m.unimodular_residual() < 1e-10);
        let max = m.e11.abs().max(m.e12.abs()).max(m.e21.abs()).max(m.e22.abs());
        assert!((0.5..=2.0).contains(&max));
    }
}
