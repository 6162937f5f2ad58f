//! Combinatorial loop descriptions over a pants decomposition and their
//! compilation to SL2(R) holonomy.
//!
//! A loop is either contained in a single pair of pants (a word in the two
//! based generators of that pants) or a cyclic chain of *incursions*: each
//! incursion enters a pants through one boundary slot, follows a word in the
//! pants generators, exits through a slot, and carries a twist factor
//! a(sign * tau + (m/2) * ell) on the exit curve. Self-glued pants (e.g. a
//! once-holed torus) are handled by addressing boundary *slots* rather than
//! curve ids: an interior curve may occupy two slots of the same pants.

use crate::error::{Error, Result};
use crate::hypmat::{compose, Letter, Mat2};
use crate::lengths::FnPoint;
use crate::pants::{solve_pants, PantsTrig};
use serde::{Deserialize, Serialize};

/// One syllable of a word in the pants generators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Syllable {
    pub letter: Letter,
    pub exponent: i32,
}

/// Word in the pants generators, kept in linear normal form: nonzero
/// exponents, adjacent syllables with distinct letters.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct PantsWord {
    syllables: Vec<(Letter, i32)>,
}

impl PantsWord {
    pub fn new(raw: Vec<(Letter, i32)>) -> PantsWord {
        let mut syllables: Vec<(Letter, i32)> = Vec::with_capacity(raw.len());
        for (letter, exp) in raw {
            if exp == 0 {
                continue;
            }
            match syllables.last_mut() {
                Some((l, e)) if *l == letter => {
                    *e += exp;
                    if *e == 0 {
                        syllables.pop();
                    }
                }
                _ => syllables.push((letter, exp)),
            }
        }
        // Merging can create new same-letter adjacencies; repeat until stable.
        loop {
            let mut merged = Vec::with_capacity(syllables.len());
            let mut changed = false;
            for (letter, exp) in syllables {
                match merged.last_mut() {
                    Some((l, e)) if *l == letter => {
                        *e += exp;
                        changed = true;
                        if *e == 0 {
                            merged.pop();
                        }
                    }
                    _ => merged.push((letter, exp)),
                }
            }
            syllables = merged;
            if !changed {
                break;
            }
        }
        PantsWord { syllables }
    }

    pub fn empty() -> PantsWord {
        PantsWord { syllables: Vec::new() }
    }

    pub fn from_letters<I: IntoIterator<Item = (Letter, i32)>>(letters: I) -> PantsWord {
        PantsWord::new(letters.into_iter().collect())
    }

    pub fn is_empty(&self) -> bool {
        self.syllables.is_empty()
    }

    pub fn syllables(&self) -> impl Iterator<Item = Syllable> + '_ {
        self.syllables.iter().map(|&(letter, exponent)| Syllable { letter, exponent })
    }

    pub fn syllable_count(&self) -> usize {
        self.syllables.len()
    }

    /// Expand into single letters with exponent +-1.
    pub fn letters(&self) -> Vec<(Letter, i32)> {
        let mut out = Vec::new();
        for &(letter, exp) in &self.syllables {
            let step = exp.signum();
            for _ in 0..exp.unsigned_abs() {
                out.push((letter, step));
            }
        }
        out
    }

    pub fn letter_count(&self) -> usize {
        self.syllables.iter().map(|&(_, e)| e.unsigned_abs() as usize).sum()
    }

    pub fn first_letter(&self) -> Option<Letter> {
        self.syllables.first().map(|&(l, _)| l)
    }

    pub fn last_letter(&self) -> Option<Letter> {
        self.syllables.last().map(|&(l, _)| l)
    }

    pub fn inverse(&self) -> PantsWord {
        PantsWord::new(
            self.syllables
                .iter()
                .rev()
                .map(|&(l, e)| (l, -e))
                .collect(),
        )
    }

    /// Cyclic reduction: merge syllables across the wrap point until stable.
    pub fn cyclic_reduced(&self) -> PantsWord {
        let mut w = self.clone();
        loop {
            let n = w.syllables.len();
            if n < 2 {
                return w;
            }
            let (first, last) = (w.syllables[0], w.syllables[n - 1]);
            if first.0 != last.0 {
                return w;
            }
            let merged = first.1 + last.1;
            let mut inner: Vec<(Letter, i32)> = w.syllables[1..n - 1].to_vec();
            if merged != 0 {
                inner.insert(0, (first.0, merged));
            }
            w = PantsWord::new(inner);
        }
    }

    /// All syllable rotations. On a cyclically reduced word every rotation
    /// is again in linear normal form.
    pub fn rotations(&self) -> Vec<PantsWord> {
        let n = self.syllables.len();
        if n <= 1 {
            return vec![self.clone()];
        }
        (0..n)
            .map(|k| {
                let mut rot: Vec<(Letter, i32)> = self.syllables[k..].to_vec();
                rot.extend_from_slice(&self.syllables[..k]);
                PantsWord::new(rot)
            })
            .collect()
    }

    pub fn total_abs_exponent(&self, letter: Letter) -> u32 {
        self.syllables
            .iter()
            .filter(|&&(l, _)| l == letter)
            .map(|&(_, e)| e.unsigned_abs())
            .sum()
    }

    pub fn all_exponents_positive(&self) -> bool {
        self.syllables.iter().all(|&(_, e)| e > 0)
    }
}

impl std::fmt::Display for PantsWord {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.syllables.is_empty() {
            return write!(f, "1");
        }
        for &(l, e) in &self.syllables {
            let c = match l {
                Letter::A => 'a',
                Letter::B => 'b',
            };
            if e == 1 {
                write!(f, "{c}")?;
            } else {
                write!(f, "{c}^{e}")?;
            }
        }
        Ok(())
    }
}

impl Serialize for PantsWord {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let v: Vec<(char, i32)> = self
            .syllables
            .iter()
            .map(|&(l, e)| (if l == Letter::A { 'a' } else { 'b' }, e))
            .collect();
        v.serialize(s)
    }
}

impl<'de> Deserialize<'de> for PantsWord {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v: Vec<(char, i32)> = Vec::deserialize(d)?;
        let mut raw = Vec::with_capacity(v.len());
        for (c, e) in v {
            let letter = match c {
                'a' => Letter::A,
                'b' => Letter::B,
                other => {
                    return Err(serde::de::Error::custom(format!(
                        "word letter must be 'a' or 'b', got {other:?}"
                    )))
                }
            };
            raw.push((letter, e));
        }
        Ok(PantsWord::new(raw))
    }
}

/// A(x; t)^n or B(y; t*)^n, via the one-parameter closed form
///
/// ```text
/// A^n = [[ cosh(nx/2), e^{-t} sinh(nx/2) ], [ e^{t} sinh(nx/2), cosh(nx/2) ]]
/// B^n = [[ cosh(ny/2), -e^{t*} sinh(ny/2) ], [ -e^{-t*} sinh(ny/2), cosh(ny/2) ]]
/// ```
///
/// built in factored log form so large boundary lengths do not overflow.
pub fn pants_generator(letter: Letter, n: i32, trig: &PantsTrig) -> Mat2 {
    let (len, t, off_sign) = match letter {
        Letter::A => (trig.x, trig.t, 1.0),
        Letter::B => (trig.y, trig.t_star, -1.0),
    };
    let half = 0.5 * n as f64 * len;
    let na = half.abs();
    let q = (-2.0 * na).exp();
    let sg = if half >= 0.0 { 1.0 } else { -1.0 };
    let ta = t.abs();
    // Scale factor e^{na + |t|}; entries below are the block times e^{-(na+|t|)}.
    let diag = 0.5 * (1.0 + q) * (-ta).exp();
    let upper = off_sign * sg * 0.5 * (1.0 - q) * (-off_sign * t - ta).exp();
    let lower = off_sign * sg * 0.5 * (1.0 - q) * (off_sign * t - ta).exp();
    Mat2::from_block(diag, upper, lower, diag, na + ta)
}

/// Holonomy of a word contained in one pair of pants: the ordered product of
/// generator powers.
pub fn holonomy_pants(word: &PantsWord, trig: &PantsTrig) -> Result<Mat2> {
    if word.is_empty() {
        return Err(Error::InvalidArgument(
            "holonomy_pants requires a nonempty word".into(),
        ));
    }
    let factors: Vec<Mat2> = word
        .syllables()
        .map(|s| pants_generator(s.letter, s.exponent, trig))
        .collect();
    compose(&factors)
}

/// Kind of a curve in the surface graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CurveKind {
    /// Carries Fenchel-Nielsen coordinates (length, twist).
    Interior,
    /// Carries a fixed boundary length.
    Boundary,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PantsNode {
    /// Curve id in each of the three boundary slots.
    pub slots: [usize; 3],
}

/// Pants decomposition graph: pants nodes with three curve slots each;
/// interior curves appear in exactly two slots (possibly of the same pants),
/// boundary curves in exactly one.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurfaceGraph {
    pub pants: Vec<PantsNode>,
    pub curves: Vec<CurveKind>,
}

impl SurfaceGraph {
    pub fn new(pants: Vec<PantsNode>, curves: Vec<CurveKind>) -> Result<SurfaceGraph> {
        let g = SurfaceGraph { pants, curves };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if self.pants.is_empty() {
            return Err(Error::InvalidArgument("surface graph has no pants".into()));
        }
        let mut attach = vec![0usize; self.curves.len()];
        for (pi, node) in self.pants.iter().enumerate() {
            for &c in &node.slots {
                if c >= self.curves.len() {
                    return Err(Error::InvalidArgument(format!(
                        "pants {pi} references unknown curve {c}"
                    )));
                }
                attach[c] += 1;
            }
        }
        for (c, (&count, &kind)) in attach.iter().zip(&self.curves).enumerate() {
            let expect = match kind {
                CurveKind::Interior => 2,
                CurveKind::Boundary => 1,
            };
            if count != expect {
                return Err(Error::InvalidArgument(format!(
                    "curve {c} ({kind:?}) has {count} slot attachments, expected {expect}"
                )));
            }
        }
        // Connectivity over pants adjacency through interior curves.
        let n = self.pants.len();
        let mut seen = vec![false; n];
        let mut stack = vec![0usize];
        seen[0] = true;
        while let Some(p) = stack.pop() {
            for &c in &self.pants[p].slots {
                if self.curves[c] == CurveKind::Interior {
                    for (q, node) in self.pants.iter().enumerate() {
                        if !seen[q] && node.slots.contains(&c) {
                            seen[q] = true;
                            stack.push(q);
                        }
                    }
                }
            }
        }
        if seen.iter().any(|&s| !s) {
            return Err(Error::InvalidArgument("surface graph is disconnected".into()));
        }
        // 3 #pants = 2 #interior + #boundary is implied by the attachment
        // counts; genus integrality is a real constraint.
        let b = self.boundary_count();
        if (2 + self.pants.len() as i64 - b as i64) % 2 != 0 {
            return Err(Error::InvalidArgument(
                "pants/boundary counts are not realizable by an orientable surface".into(),
            ));
        }
        Ok(())
    }

    pub fn interior_count(&self) -> usize {
        self.curves.iter().filter(|&&k| k == CurveKind::Interior).count()
    }

    pub fn boundary_count(&self) -> usize {
        self.curves.iter().filter(|&&k| k == CurveKind::Boundary).count()
    }

    /// Genus from chi(S) = -#pants = 2 - 2g - n.
    pub fn genus(&self) -> usize {
        ((2 + self.pants.len() as i64 - self.boundary_count() as i64) / 2) as usize
    }

    /// The (pants, slot) attachments of a curve.
    pub fn attachments(&self, curve: usize) -> Vec<(usize, u8)> {
        let mut out = Vec::new();
        for (pi, node) in self.pants.iter().enumerate() {
            for (s, &c) in node.slots.iter().enumerate() {
                if c == curve {
                    out.push((pi, s as u8));
                }
            }
        }
        out
    }

    pub fn is_interior(&self, curve: usize) -> bool {
        matches!(self.curves.get(curve), Some(CurveKind::Interior))
    }
}

/// One incursion of a loop into a pair of pants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Incursion {
    /// Index of the pants node.
    pub pants: usize,
    /// Entry boundary slot (0..3) of that pants.
    pub entry: u8,
    /// Exit boundary slot (0..3).
    pub exit: u8,
    /// Word in the pants generators followed between entry and exit.
    pub word: PantsWord,
    /// Twist half-count: the twist factor is a(sign*tau + (m/2)*ell).
    pub m: i64,
    /// Sign in front of the twist coordinate.
    #[serde(rename = "twistSign")]
    pub twist_sign: i8,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IncursionForm {
    /// Entry and exit slots differ.
    ThroughDistinct,
    /// Entry and exit through the same slot.
    SameCurveReturn,
}

impl Incursion {
    pub fn form(&self) -> IncursionForm {
        if self.entry != self.exit {
            IncursionForm::ThroughDistinct
        } else {
            IncursionForm::SameCurveReturn
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.entry > 2 || self.exit > 2 {
            return Err(Error::InvalidLoop(format!(
                "slot indices must be 0..3, got entry {} exit {}",
                self.entry, self.exit
            )));
        }
        if self.twist_sign != 1 && self.twist_sign != -1 {
            return Err(Error::InvalidLoop(format!(
                "twist sign must be +1 or -1, got {}",
                self.twist_sign
            )));
        }
        if !self.word.is_empty() {
            if self.word.first_letter() != Some(Letter::B) {
                return Err(Error::InvalidLoop(format!(
                    "incursion word must begin with the letter b, got {}",
                    self.word
                )));
            }
            let want_last = match self.form() {
                IncursionForm::ThroughDistinct => Letter::A,
                IncursionForm::SameCurveReturn => Letter::B,
            };
            if self.word.last_letter() != Some(want_last) {
                return Err(Error::InvalidLoop(format!(
                    "incursion word {} has the wrong final letter for its form",
                    self.word
                )));
            }
        }
        Ok(())
    }
}

/// A loop relative to a pants decomposition: either contained in a single
/// pair of pants, or a cyclic chain of incursions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LoopSpec {
    SinglePants {
        pants: usize,
        word: PantsWord,
    },
    Incursions {
        incursions: Vec<Incursion>,
    },
}

impl LoopSpec {
    pub fn single_pants(pants: usize, word: PantsWord) -> LoopSpec {
        LoopSpec::SinglePants { pants, word }
    }

    pub fn from_incursions(incursions: Vec<Incursion>) -> LoopSpec {
        LoopSpec::Incursions { incursions }
    }

    /// Chaining and shape validation against a surface graph.
    pub fn validate(&self, surface: &SurfaceGraph) -> Result<()> {
        match self {
            LoopSpec::SinglePants { pants, word } => {
                if *pants >= surface.pants.len() {
                    return Err(Error::InvalidLoop(format!("unknown pants {pants}")));
                }
                if word.is_empty() {
                    return Err(Error::InvalidLoop(
                        "single-pants loop requires a nonempty word".into(),
                    ));
                }
                Ok(())
            }
            LoopSpec::Incursions { incursions } => {
                if incursions.is_empty() {
                    return Err(Error::InvalidLoop("loop has no incursions".into()));
                }
                for inc in incursions {
                    inc.validate()?;
                    if inc.pants >= surface.pants.len() {
                        return Err(Error::InvalidLoop(format!("unknown pants {}", inc.pants)));
                    }
                }
                let n = incursions.len();
                for k in 0..n {
                    let cur = &incursions[k];
                    let next = &incursions[(k + 1) % n];
                    let exit_curve = surface.pants[cur.pants].slots[cur.exit as usize];
                    let entry_curve = surface.pants[next.pants].slots[next.entry as usize];
                    if exit_curve != entry_curve {
                        return Err(Error::InvalidLoop(format!(
                            "incursion {k} exits curve {exit_curve} but the next enters {entry_curve}"
                        )));
                    }
                    if !surface.is_interior(exit_curve) {
                        return Err(Error::InvalidLoop(format!(
                            "incursion {k} exits through boundary curve {exit_curve}"
                        )));
                    }
                    // The crossing must use the two distinct attachments.
                    let att = surface.attachments(exit_curve);
                    let used = [(cur.pants, cur.exit), (next.pants, next.entry)];
                    let ok = att.len() == 2
                        && ((used[0] == att[0] && used[1] == att[1])
                            || (used[0] == att[1] && used[1] == att[0]));
                    if !ok {
                        return Err(Error::InvalidLoop(format!(
                            "incursion {k} does not cross curve {exit_curve} between its two sides"
                        )));
                    }
                }
                Ok(())
            }
        }
    }

    /// Curves whose twist factor appears in some incursion (the curves the
    /// loop crosses).
    pub fn crossed_curves(&self, surface: &SurfaceGraph) -> Vec<usize> {
        match self {
            LoopSpec::SinglePants { .. } => Vec::new(),
            LoopSpec::Incursions { incursions } => {
                let mut out: Vec<usize> = incursions
                    .iter()
                    .map(|inc| surface.pants[inc.pants].slots[inc.exit as usize])
                    .collect();
                out.sort_unstable();
                out.dedup();
                out
            }
        }
    }
}

/// Solved trigonometry of a pants node at a Fenchel-Nielsen point, with the
/// slot roles (alpha0 = x-slot, beta0 = y-slot, beta1 = z-slot) resolved.
fn slot_trig(
    surface: &SurfaceGraph,
    fn_point: &FnPoint,
    pants: usize,
    x_slot: u8,
    y_slot: u8,
) -> Result<PantsTrig> {
    let node = &surface.pants[pants];
    let z_slot = (0..3u8)
        .find(|s| *s != x_slot && *s != y_slot)
        .expect("slot triple");
    let x = fn_point.curve_length(surface, node.slots[x_slot as usize])?;
    let y = fn_point.curve_length(surface, node.slots[y_slot as usize])?;
    let z = fn_point.curve_length(surface, node.slots[z_slot as usize])?;
    solve_pants(x, y, z)
}

/// The holonomy factor contributed by one incursion at a Fenchel-Nielsen
/// point:
///
/// through-distinct:  a(t) W(word) a(t*) R(pi/2) a(sigma) R(-pi/2)
/// same-curve-return: a(t) W(word) R(pi) a(t) R(pi/2) a(sigma) R(-pi/2)
///
/// with sigma = twist_sign * tau + (m/2) * ell on the exit curve and W(word)
/// the ordered product of generator powers.
pub fn incursion_matrix(
    inc: &Incursion,
    surface: &SurfaceGraph,
    fn_point: &FnPoint,
) -> Result<Mat2> {
    inc.validate()?;
    let node = &surface.pants[inc.pants];
    let (trig, tw_curve) = match inc.form() {
        IncursionForm::ThroughDistinct => {
            let trig = slot_trig(surface, fn_point, inc.pants, inc.entry, inc.exit)?;
            (trig, node.slots[inc.exit as usize])
        }
        IncursionForm::SameCurveReturn => {
            let beta0 = (0..3u8).find(|s| *s != inc.entry).expect("slot triple");
            let trig = slot_trig(surface, fn_point, inc.pants, inc.entry, beta0)?;
            (trig, node.slots[inc.entry as usize])
        }
    };
    let (ell, tau) = fn_point.interior_coords(tw_curve)?;
    let sigma = inc.twist_sign as f64 * tau + 0.5 * inc.m as f64 * ell;

    let half_pi = std::f64::consts::FRAC_PI_2;
    let mut factors = vec![Mat2::translation(trig.t)];
    for s in inc.word.syllables() {
        factors.push(pants_generator(s.letter, s.exponent, &trig));
    }
    match inc.form() {
        IncursionForm::ThroughDistinct => factors.push(Mat2::translation(trig.t_star)),
        IncursionForm::SameCurveReturn => {
            factors.push(Mat2::rotation(std::f64::consts::PI));
            factors.push(Mat2::translation(trig.t));
        }
    }
    factors.push(Mat2::rotation(half_pi));
    factors.push(Mat2::translation(sigma));
    factors.push(Mat2::rotation(-half_pi));
    compose(&factors)
}

/// Holonomy of a whole loop at a Fenchel-Nielsen point.
pub fn holonomy_loop(loop_spec: &LoopSpec, surface: &SurfaceGraph, fn_point: &FnPoint) -> Result<Mat2> {
    loop_spec.validate(surface)?;
    fn_point.validate(surface)?;
    match loop_spec {
        LoopSpec::SinglePants { pants, word } => {
            let trig = slot_trig(surface, fn_point, *pants, 0, 1)?;
            holonomy_pants(word, &trig)
        }
        LoopSpec::Incursions { incursions } => {
            let mats: Result<Vec<Mat2>> = incursions
                .iter()
                .map(|inc| incursion_matrix(inc, surface, fn_point))
                .collect();
            compose(&mats?)
        }
    }
}

/// Dehn twist along an interior curve: every incursion exiting through the
/// curve gets its twist half-count shifted by 2 * power * twist_sign, which
/// realizes length(twisted loop)(tau) = length(loop)(tau + power * ell).
pub fn dehn_twist(
    loop_spec: &LoopSpec,
    surface: &SurfaceGraph,
    curve: usize,
    power: i64,
) -> Result<LoopSpec> {
    if !surface.is_interior(curve) {
        return Err(Error::InvalidArgument(format!(
            "dehn_twist requires an interior curve, got {curve}"
        )));
    }
    match loop_spec {
        LoopSpec::SinglePants { .. } => Ok(loop_spec.clone()),
        LoopSpec::Incursions { incursions } => {
            let twisted = incursions
                .iter()
                .map(|inc| {
                    let exit_curve = surface.pants[inc.pants].slots[inc.exit as usize];
                    let mut out = inc.clone();
                    if exit_curve == curve {
                        out.m += 2 * power * inc.twist_sign as i64;
                    }
                    out
                })
                .collect();
            Ok(LoopSpec::Incursions { incursions: twisted })
        }
    }
}

/// Open a cyclic word at two cut positions (letter granularity, positions in
/// 0..letter_count): returns the two separating arcs u, v and the
/// non-separating word u * v^{-1}, cyclically reduced.
pub fn split_resolve(
    word: &PantsWord,
    cut_a: usize,
    cut_b: usize,
) -> Result<(PantsWord, PantsWord, PantsWord)> {
    let letters = word.letters();
    let n = letters.len();
    if n < 2 {
        return Err(Error::InvalidArgument(
            "word must have at least two letters to cut".into(),
        ));
    }
    if cut_a >= n || cut_b >= n {
        return Err(Error::InvalidArgument(format!(
            "cut positions must lie in 0..{n}"
        )));
    }
    if cut_a == cut_b {
        return Err(Error::InvalidArgument("cut positions coincide".into()));
    }
    let (p, q) = if cut_a < cut_b { (cut_a, cut_b) } else { (cut_b, cut_a) };
    let u: Vec<(Letter, i32)> = letters[p..q].to_vec();
    let v: Vec<(Letter, i32)> = letters[q..].iter().chain(&letters[..p]).cloned().collect();
    let (u, v) = if cut_a < cut_b { (u, v) } else { (v, u) };
    let u_word = PantsWord::from_letters(u.clone());
    let v_word = PantsWord::from_letters(v.clone());
    let nonsep = PantsWord::from_letters(
        u.into_iter().chain(v.into_iter().rev().map(|(l, e)| (l, -e))),
    )
    .cyclic_reduced();
    Ok((u_word, v_word, nonsep))
}

/// Which of the two resolution sign cases holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SignCase {
    /// cosh(l_g/2) = 2 cosh(l_u/2) cosh(l_v/2) + cosh(l_ns/2)
    Plus,
    /// cosh(l_g/2) = | 2 cosh(l_u/2) cosh(l_v/2) - cosh(l_ns/2) |
    Minus,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResolutionReport {
    #[serde(rename = "signCase")]
    pub sign_case: SignCase,
    /// Relative residual of the matching case.
    pub residual: f64,
    /// Relative residual of the other case (diagnostic).
    #[serde(rename = "residualOther")]
    pub residual_other: f64,
    pub lengths: ResolutionLengths,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResolutionLengths {
    pub whole: f64,
    pub u: f64,
    pub v: f64,
    #[serde(rename = "nonSep")]
    pub non_sep: f64,
}

/// Check the resolution trace identity for a word cut at two positions:
/// exactly one of the two sign cases must hold. Derived from
/// Tr(UV) = Tr(U) Tr(V) - Tr(U^{-1} V) with the sign pattern of the four
/// traces determined numerically.
pub fn check_resolution(
    word: &PantsWord,
    cut_a: usize,
    cut_b: usize,
    trig: &PantsTrig,
) -> Result<ResolutionReport> {
    let (u, v, ns) = split_resolve(word, cut_a, cut_b)?;
    let cosh_half = |w: &PantsWord| -> Result<(f64, f64)> {
        if w.is_empty() {
            return Err(Error::NonHyperbolic {
                kind: crate::error::ElementKind::Parabolic,
                trace_abs: 2.0,
            });
        }
        let m = holonomy_pants(w, trig)?;
        let tr = m.trace_signed();
        // log of cosh(l/2) = |Tr|/2; reject non-hyperbolic resolutions.
        let len = crate::hypmat::trace_to_length(&tr)?;
        Ok((tr.log_abs - std::f64::consts::LN_2, len))
    };
    let (lg, len_g) = cosh_half(word)?;
    let (lu, len_u) = cosh_half(&u)?;
    let (lv, len_v) = cosh_half(&v)?;
    let (ls, len_s) = cosh_half(&ns)?;

    let lp = std::f64::consts::LN_2 + lu + lv; // log of 2 cosh cosh
    let m = lg.max(lp).max(ls);
    let (g, p, s) = ((lg - m).exp(), (lp - m).exp(), (ls - m).exp());
    let r_plus = (g - p - s).abs() / g.max(p + s);
    let diff = (p - s).abs();
    let r_minus = (g - diff).abs() / g.max(diff).max(1e-300);
    let (sign_case, residual, residual_other) = if r_plus <= r_minus {
        (SignCase::Plus, r_plus, r_minus)
    } else {
        (SignCase::Minus, r_minus, r_plus)
    };
    Ok(ResolutionReport {
        sign_case,
        residual,
        residual_other,
        lengths: ResolutionLengths {
            whole: len_g,
            u: len_u,
            v: len_v,
            non_sep: len_s,
        },
    })
}
