//! Desk-scale mapping-class-group orbit enumeration and geodesic counting on
//! the once-holed torus: breadth-first search over Dehn-twist rewritings of
//! free-group words with canonical-form deduplication and length pruning.
//!
//! The fundamental group is free on the two generators; the two twist
//! generators act by a -> a, b -> ba and a -> ab, b -> b (plus inverses).
//! Lengths come from an explicit SL2 pair (rho_a, rho_b) built from the
//! Fenchel-Nielsen data of the curve a; classes are deduplicated by the
//! lexicographically minimal cyclically reduced representative over
//! rotations and inversion.

use crate::error::{Error, Result};
use crate::hypmat::{compose, trace_signed, trace_to_length, Letter, Mat2};
use crate::loops::PantsWord;
use crate::pants::solve_pants;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet, VecDeque};

/// Surfaces supported by the orbit enumerator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OrbitSurface {
    OnceHoledTorus,
}

/// One deduplicated class found by the enumeration.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OrbitEntry {
    pub word: PantsWord,
    pub length: f64,
    /// Breadth-first-search depth at which the class was first reached.
    pub generation: u32,
}

/// Canonical representative of the free-homotopy class of a word up to
/// orientation: cyclic reduction, then the minimum over all rotations of the
/// word and of its inverse. Idempotent.
pub fn canonical_word(w: &PantsWord) -> PantsWord {
    let reduced = w.cyclic_reduced();
    let inv = reduced.inverse().cyclic_reduced();
    reduced
        .rotations()
        .into_iter()
        .chain(inv.rotations())
        .min()
        .unwrap_or_else(PantsWord::empty)
}

fn substitute(w: &PantsWord, image_a: &[(Letter, i32)], image_b: &[(Letter, i32)]) -> PantsWord {
    let mut out: Vec<(Letter, i32)> = Vec::new();
    for (letter, step) in w.letters() {
        let image = match letter {
            Letter::A => image_a,
            Letter::B => image_b,
        };
        if step > 0 {
            out.extend_from_slice(image);
        } else {
            out.extend(image.iter().rev().map(|&(l, e)| (l, -e)));
        }
    }
    PantsWord::new(out)
}

/// The four one-twist images of a word (both twist generators and their
/// inverses), canonicalized.
pub fn mcg_neighbors(w: &PantsWord, surface: OrbitSurface) -> Result<BTreeSet<PantsWord>> {
    match surface {
        OrbitSurface::OnceHoledTorus => {}
    }
    use Letter::{A, B};
    let id_a: &[(Letter, i32)] = &[(A, 1)];
    let id_b: &[(Letter, i32)] = &[(B, 1)];
    let images: [(&[(Letter, i32)], &[(Letter, i32)]); 4] = [
        (id_a, &[(B, 1), (A, 1)]),   // b -> ba
        (id_a, &[(B, 1), (A, -1)]),  // b -> b a^{-1}
        (&[(A, 1), (B, 1)], id_b),   // a -> ab
        (&[(A, 1), (B, -1)], id_b),  // a -> a b^{-1}
    ];
    Ok(images
        .iter()
        .map(|(ia, ib)| canonical_word(&substitute(w, ia, ib)))
        .collect())
}

/// SL2 pair (rho_a, rho_b) realizing the once-holed torus with curve-a
/// length `ell_a`, twist `tau` and boundary length `big_l`: rho_a is the
/// based generator winding around a, rho_b the based crossing loop. The
/// commutator trace is -2 cosh(big_l / 2).
#[derive(Debug, Clone)]
pub struct TorusRep {
    gen_a: Mat2,
    gen_b: Mat2,
    inv_a: Mat2,
    inv_b: Mat2,
}

pub fn torus_rep(ell_a: f64, tau: f64, big_l: f64) -> Result<TorusRep> {
    if !(ell_a > 0.0) {
        return Err(Error::InvalidArgument("ell_a must be positive".into()));
    }
    let trig = solve_pants(ell_a, ell_a, big_l)?;
    let gen_a = crate::loops::pants_generator(Letter::A, 1, &trig);
    let half_pi = std::f64::consts::FRAC_PI_2;
    let gen_b = compose(&[
        Mat2::translation(trig.t_star),
        Mat2::rotation(half_pi),
        Mat2::translation(tau),
        Mat2::rotation(-half_pi),
        Mat2::translation(trig.t),
    ])?;
    Ok(TorusRep {
        gen_a,
        gen_b,
        inv_a: gen_a.inverse(),
        inv_b: gen_b.inverse(),
    })
}

impl TorusRep {
    pub fn holonomy(&self, w: &PantsWord) -> Mat2 {
        let mut acc = Mat2::identity();
        for (letter, step) in w.letters() {
            let m = match (letter, step > 0) {
                (Letter::A, true) => &self.gen_a,
                (Letter::A, false) => &self.inv_a,
                (Letter::B, true) => &self.gen_b,
                (Letter::B, false) => &self.inv_b,
            };
            acc = acc.mul(m);
        }
        acc
    }

    pub fn word_length(&self, w: &PantsWord) -> Result<f64> {
        if w.is_empty() {
            return Err(Error::InvalidArgument("empty word has no geodesic".into()));
        }
        trace_to_length(&trace_signed(&self.holonomy(w)))
    }
}

/// True iff the cyclic word is not a proper power (checked by cyclic-root
/// search on the letter sequence).
pub fn is_primitive(w: &PantsWord) -> bool {
    let letters = w.cyclic_reduced().letters();
    let n = letters.len();
    if n == 0 {
        return false;
    }
    for d in 1..n {
        if n % d != 0 {
            continue;
        }
        if (0..n).all(|i| letters[i] == letters[(i + d) % n]) {
            return false; // period d < n: proper power
        }
    }
    true
}

fn bfs(
    seed: &PantsWord,
    rep: &TorusRep,
    cutoff: f64,
    margin: f64,
) -> Result<BTreeMap<PantsWord, (f64, u32)>> {
    let start = canonical_word(seed);
    if start.is_empty() {
        return Err(Error::InvalidArgument("seed word is trivial".into()));
    }
    let mut lengths: BTreeMap<PantsWord, (f64, u32)> = BTreeMap::new();
    let mut dead: BTreeSet<PantsWord> = BTreeSet::new();
    let mut queue: VecDeque<(PantsWord, u32)> = VecDeque::new();
    queue.push_back((start, 0));
    while let Some((word, generation)) = queue.pop_front() {
        if lengths.contains_key(&word) || dead.contains(&word) {
            continue;
        }
        let len = match rep.word_length(&word) {
            Ok(l) => l,
            // Non-hyperbolic classes cannot carry a geodesic; exclude.
            Err(Error::NonHyperbolic { .. }) => {
                dead.insert(word);
                continue;
            }
            Err(e) => return Err(e),
        };
        if len > cutoff + margin {
            dead.insert(word);
            continue;
        }
        lengths.insert(word.clone(), (len, generation));
        for nb in mcg_neighbors(&word, OrbitSurface::OnceHoledTorus)? {
            if !lengths.contains_key(&nb) && !dead.contains(&nb) {
                queue.push_back((nb, generation + 1));
            }
        }
    }
    Ok(lengths)
}

/// Enumerate the twist orbit of a word up to the length cutoff, pruning
/// branches beyond cutoff + margin. The run is repeated with the margin
/// doubled; disagreement of the collected sets reports the margin as too
/// small. Output is sorted by length.
pub fn enumerate_orbit(
    seed: &PantsWord,
    ell_a: f64,
    tau: f64,
    big_l: f64,
    cutoff: f64,
    margin: f64,
) -> Result<Vec<OrbitEntry>> {
    if !(margin >= 0.0) || !(cutoff > 0.0) {
        return Err(Error::InvalidArgument(
            "cutoff must be positive and margin nonnegative".into(),
        ));
    }
    let rep = torus_rep(ell_a, tau, big_l)?;
    let collect = |m: f64| -> Result<BTreeMap<PantsWord, (f64, u32)>> {
        let all = bfs(seed, &rep, cutoff, m)?;
        Ok(all
            .into_iter()
            .filter(|(_, (len, _))| *len <= cutoff)
            .collect())
    };
    let base = collect(margin)?;
    let doubled = collect(2.0 * margin + 1.0)?;
    if base.keys().ne(doubled.keys()) {
        return Err(Error::MarginTooSmall(format!(
            "enumeration unstable: {} classes at margin {margin}, {} at doubled margin",
            base.len(),
            doubled.len()
        )));
    }
    let mut out: Vec<OrbitEntry> = base
        .into_iter()
        .map(|(word, (length, generation))| OrbitEntry {
            word,
            length,
            generation,
        })
        .collect();
    out.sort_by(|a, b| {
        a.length
            .partial_cmp(&b.length)
            .unwrap()
            .then_with(|| a.word.cmp(&b.word))
    });
    Ok(out)
}

/// Counting step function N(a) from sorted orbit entries.
pub fn counting_steps(entries: &[OrbitEntry]) -> Vec<(f64, usize)> {
    entries
        .iter()
        .enumerate()
        .map(|(i, e)| (e.length, i + 1))
        .collect()
}

/// Lower Christoffel word with `p` letters a and `q` letters b (`q < 0`
/// uses b^{-1}); represents the slope-(p, q) class. Used as the independent
/// enumeration oracle for the orbit of a simple curve.
pub fn christoffel_word(p: u32, q: i32) -> PantsWord {
    use Letter::{A, B};
    if p == 0 {
        return PantsWord::new(vec![(B, q.signum().max(-1))]);
    }
    if q == 0 {
        return PantsWord::new(vec![(A, 1)]);
    }
    let qa = q.unsigned_abs();
    let total = p + qa;
    let step = if q > 0 { 1 } else { -1 };
    let mut letters = Vec::with_capacity(total as usize);
    for k in 1..=total {
        let prev = ((k - 1) as u64 * qa as u64) / total as u64;
        let cur = (k as u64 * qa as u64) / total as u64;
        if cur > prev {
            letters.push((B, step));
        } else {
            letters.push((A, 1));
        }
    }
    PantsWord::new(letters)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn word(s: &[(Letter, i32)]) -> PantsWord {
        PantsWord::new(s.to_vec())
    }

    const SQUARE_ELL: f64 = 1.762747174039086; // 2 arcsinh(1)

    #[test]
    fn canonical_collapses_conjugates_and_rotations() {
        use Letter::{A, B};
        let w = word(&[(A, 1), (B, 1), (A, -1)]);
        // Conjugation collapses to the class of b (canonical form picks one
        // of b, b^{-1}).
        assert_eq!(canonical_word(&w), canonical_word(&word(&[(B, 1)])));
        assert_eq!(
            canonical_word(&word(&[(A, 1), (B, 1)])),
            canonical_word(&word(&[(B, 1), (A, 1)]))
        );
        // Idempotence on pseudo-random words.
        use rand::Rng;
        let mut rng = crate::rng::stream(17, 0);
        for _ in 0..1000 {
            let n = rng.gen_range(1..7usize);
            let sylls: Vec<(Letter, i32)> = (0..n)
                .map(|_| {
                    (
                        if rng.gen_bool(0.5) { A } else { B },
                        *[-2, -1, 1, 2].get(rng.gen_range(0..4)).unwrap(),
                    )
                })
                .collect();
            let w = word(&sylls);
            let c = canonical_word(&w);
            assert_eq!(canonical_word(&c), c, "word {w}");
        }
    }

    #[test]
    fn neighbors_contain_expected_twist_images() {
        use Letter::{A, B};
        let nb = mcg_neighbors(&word(&[(B, 1)]), OrbitSurface::OnceHoledTorus).unwrap();
        // T_a sends b to ba.
        assert!(nb.contains(&canonical_word(&word(&[(B, 1), (A, 1)]))));
        // Symmetry: w' in N(w) iff w in N(w').
        let w = word(&[(A, 1), (B, 1)]);
        for n in mcg_neighbors(&w, OrbitSurface::OnceHoledTorus).unwrap() {
            if n == canonical_word(&w) {
                continue;
            }
            let back = mcg_neighbors(&n, OrbitSurface::OnceHoledTorus).unwrap();
            assert!(back.contains(&canonical_word(&w)), "asymmetric at {n}");
        }
    }

    #[test]
    fn torus_rep_satisfies_boundary_relation() {
        for &(ell, tau, big_l) in &[(1.3, 0.7, 0.9), (2.4, -0.2, 0.0), (0.9, 1.6, 2.0)] {
            let rep = torus_rep(ell, tau, big_l).unwrap();
            // |Tr[a,b]| = 2 cosh(L/2).
            let comm = rep
                .gen_a
                .mul(&rep.gen_b)
                .mul(&rep.inv_a)
                .mul(&rep.inv_b);
            let tr = trace_signed(&comm);
            assert!(
                (tr.value + 2.0 * (0.5 * big_l).cosh()).abs() < 1e-9,
                "({ell},{tau},{big_l}): {}",
                tr.value
            );
            // Generator lengths.
            let la = rep.word_length(&word(&[(Letter::A, 1)])).unwrap();
            assert!((la - ell).abs() < 1e-10);
            let lb = rep.word_length(&word(&[(Letter::B, 1)])).unwrap();
            assert!((lb - crate::lengths::okai_dual_length(ell, tau, big_l)).abs() < 1e-10);
        }
    }

    #[test]
    fn square_torus_trace_values() {
        // At the square once-punctured torus the traces of a, b and ab are
        // (2 sqrt 2, 2 sqrt 2, 4).
        let rep = torus_rep(SQUARE_ELL, 0.0, 0.0).unwrap();
        let tr = |w: &PantsWord| trace_signed(&rep.holonomy(w)).log_abs.exp();
        assert!((tr(&word(&[(Letter::A, 1)])) - 2.0 * 2f64.sqrt()).abs() < 1e-10);
        assert!((tr(&word(&[(Letter::B, 1)])) - 2.0 * 2f64.sqrt()).abs() < 1e-10);
        assert!((tr(&word(&[(Letter::A, 1), (Letter::B, 1)])) - 4.0).abs() < 1e-9);
    }

    #[test]
    fn bfs_depth_three_is_primitive() {
        let mut frontier = vec![canonical_word(&word(&[(Letter::A, 1)]))];
        let mut seen: BTreeSet<PantsWord> = frontier.iter().cloned().collect();
        for _ in 0..3 {
            let mut next = Vec::new();
            for w in &frontier {
                for nb in mcg_neighbors(w, OrbitSurface::OnceHoledTorus).unwrap() {
                    if seen.insert(nb.clone()) {
                        next.push(nb);
                    }
                }
            }
            frontier = next;
        }
        for w in &seen {
            assert!(is_primitive(w), "non-primitive {w}");
        }
    }

    #[test]
    fn enumeration_matches_slope_oracle_at_cutoff_six() {
        let cutoff = 6.0;
        let entries = enumerate_orbit(
            &word(&[(Letter::A, 1)]),
            SQUARE_ELL,
            0.0,
            0.0,
            cutoff,
            2.0,
        )
        .unwrap();
        // Independent oracle: slope classes via Christoffel words.
        let rep = torus_rep(SQUARE_ELL, 0.0, 0.0).unwrap();
        let mut oracle: BTreeSet<PantsWord> = BTreeSet::new();
        for p in 0..=10u32 {
            for q in -10i32..=10 {
                if (p, q) == (0, 0) || (p == 0 && q != 1) || (p > 0 && q != 0 && gcd(p, q.unsigned_abs()) != 1) {
                    continue;
                }
                let w = christoffel_word(p, q);
                if let Ok(l) = rep.word_length(&w) {
                    if l <= cutoff {
                        oracle.insert(canonical_word(&w));
                    }
                }
            }
        }
        let found: BTreeSet<PantsWord> = entries.iter().map(|e| e.word.clone()).collect();
        assert_eq!(found, oracle, "{} vs {}", found.len(), oracle.len());
        assert_eq!(found.len(), 12);
        // Counting is nondecreasing and lengths sorted.
        let steps = counting_steps(&entries);
        assert!(steps.windows(2).all(|w| w[1].0 >= w[0].0 && w[1].1 > w[0].1));
    }

    fn gcd(a: u32, b: u32) -> u32 {
        if b == 0 {
            a
        } else {
            gcd(b, a % b)
        }
    }

    #[test]
    fn enumeration_is_conjugation_invariant() {
        use Letter::{A, B};
        let seed1 = word(&[(A, 1)]);
        let seed2 = word(&[(B, 2), (A, 1), (B, -2)]); // conjugate of a
        let e1 = enumerate_orbit(&seed1, SQUARE_ELL, 0.0, 0.0, 5.0, 2.0).unwrap();
        let e2 = enumerate_orbit(&seed2, SQUARE_ELL, 0.0, 0.0, 5.0, 2.0).unwrap();
        let w1: Vec<_> = e1.iter().map(|e| e.word.clone()).collect();
        let w2: Vec<_> = e2.iter().map(|e| e.word.clone()).collect();
        assert_eq!(w1, w2);
    }

    #[test]
    fn trivial_cases() {
        // Cutoff below the minimum length: empty.
        let entries =
            enumerate_orbit(&word(&[(Letter::A, 1)]), SQUARE_ELL, 0.0, 0.0, 1.0, 2.0).unwrap();
        assert!(entries.is_empty());
        assert!(enumerate_orbit(&PantsWord::empty(), SQUARE_ELL, 0.0, 0.0, 5.0, 1.0).is_err());
    }

    #[test]
    fn closure_under_single_twists() {
        let cutoff = 8.0;
        let entries = enumerate_orbit(
            &word(&[(Letter::A, 1)]),
            SQUARE_ELL,
            0.0,
            0.0,
            cutoff,
            2.0,
        )
        .unwrap();
        let rep = torus_rep(SQUARE_ELL, 0.0, 0.0).unwrap();
        // Bound the one-twist growth over the enumerated set, then check
        // every twist image is re-found below the enlarged cutoff.
        let mut extended_cutoff = cutoff;
        let mut images = Vec::new();
        for e in &entries {
            for nb in mcg_neighbors(&e.word, OrbitSurface::OnceHoledTorus).unwrap() {
                let l = rep.word_length(&nb).unwrap();
                extended_cutoff = extended_cutoff.max(l);
                images.push(nb);
            }
        }
        let big = enumerate_orbit(
            &word(&[(Letter::A, 1)]),
            SQUARE_ELL,
            0.0,
            0.0,
            extended_cutoff + 0.1,
            2.0,
        )
        .unwrap();
        let big_set: BTreeSet<PantsWord> = big.into_iter().map(|e| e.word).collect();
        for im in images {
            assert!(big_set.contains(&im), "image {im} not re-found");
        }
    }
}
