//! Shared surfaces, loops and Fenchel-Nielsen points for the integration
//! test suites: the loop catalog with its declared probe expectations.

#![allow(dead_code)]

use teichlab::*;

pub fn word(s: &[(Letter, i32)]) -> PantsWord {
    PantsWord::new(s.to_vec())
}

/// Thrice-holed sphere: one pants, three boundary curves 0, 1, 2.
pub fn pants_surface() -> SurfaceGraph {
    SurfaceGraph::new(
        vec![PantsNode { slots: [0, 1, 2] }],
        vec![CurveKind::Boundary, CurveKind::Boundary, CurveKind::Boundary],
    )
    .unwrap()
}

pub fn pants_point(x: f64, y: f64, z: f64) -> FnPoint {
    let mut p = FnPoint::default();
    p.boundary.insert(0, x);
    p.boundary.insert(1, y);
    p.boundary.insert(2, z);
    p
}

/// Once-holed torus: one pants with two slots glued along interior curve 0,
/// boundary curve 1.
pub fn torus_surface() -> SurfaceGraph {
    SurfaceGraph::new(
        vec![PantsNode { slots: [0, 0, 1] }],
        vec![CurveKind::Interior, CurveKind::Boundary],
    )
    .unwrap()
}

pub fn torus_point(ell: f64, tau: f64, big_l: f64) -> FnPoint {
    let mut p = FnPoint::default();
    p.interior.insert(0, (ell, tau));
    p.boundary.insert(1, big_l);
    p
}

/// Dual curve crossing the interior curve once with no winding.
pub fn torus_dual() -> LoopSpec {
    LoopSpec::from_incursions(vec![Incursion {
        pants: 0,
        entry: 0,
        exit: 1,
        word: PantsWord::empty(),
        m: 0,
        twist_sign: 1,
    }])
}

/// Crossing loop with winding word (must begin with b and end with a).
pub fn torus_wound(w: PantsWord) -> LoopSpec {
    LoopSpec::from_incursions(vec![Incursion {
        pants: 0,
        entry: 0,
        exit: 1,
        word: w,
        m: 0,
        twist_sign: 1,
    }])
}

/// Four-holed sphere: pants 0 with slots (c=0, b1=1, b2=2), pants 1 with
/// slots (c=0, b3=3, b4=4).
pub fn s04_surface() -> SurfaceGraph {
    SurfaceGraph::new(
        vec![
            PantsNode { slots: [0, 1, 2] },
            PantsNode { slots: [0, 3, 4] },
        ],
        vec![
            CurveKind::Interior,
            CurveKind::Boundary,
            CurveKind::Boundary,
            CurveKind::Boundary,
            CurveKind::Boundary,
        ],
    )
    .unwrap()
}

pub fn s04_point(c: (f64, f64), b: [f64; 4]) -> FnPoint {
    let mut p = FnPoint::default();
    p.interior.insert(0, c);
    for (i, l) in b.into_iter().enumerate() {
        p.boundary.insert(i + 1, l);
    }
    p
}

/// Loop crossing curve c twice, winding once around b1 and once around b3.
pub fn s04_loop() -> LoopSpec {
    LoopSpec::from_incursions(vec![
        Incursion {
            pants: 0,
            entry: 0,
            exit: 0,
            word: word(&[(Letter::B, 1)]),
            m: 0,
            twist_sign: 1,
        },
        Incursion {
            pants: 1,
            entry: 0,
            exit: 0,
            word: word(&[(Letter::B, 1)]),
            m: 0,
            twist_sign: 1,
        },
    ])
}

/// One catalog entry: a loop with its surface, a base point, and the
/// boundary curves along which the length must diverge (every boundary
/// curve is probed for monotonicity).
pub struct CatalogEntry {
    pub name: &'static str,
    pub surface: SurfaceGraph,
    pub loop_spec: LoopSpec,
    pub base: FnPoint,
    /// Boundary curves along which growth must be divergent.
    pub divergent_in: Vec<usize>,
    /// All boundary curves (probed for monotonicity).
    pub boundaries: Vec<usize>,
}

/// The loop catalog used by the probe and twist-equivariance criteria.
pub fn catalog() -> Vec<CatalogEntry> {
    vec![
        CatalogEntry {
            name: "figure-eight on pants",
            surface: pants_surface(),
            loop_spec: LoopSpec::single_pants(0, word(&[(Letter::A, 1), (Letter::B, -1)])),
            base: pants_point(2.0, 1.0, 1.3),
            divergent_in: vec![0, 1, 2],
            boundaries: vec![0, 1, 2],
        },
        CatalogEntry {
            name: "a^2 b^-1 on pants",
            surface: pants_surface(),
            loop_spec: LoopSpec::single_pants(0, word(&[(Letter::A, 2), (Letter::B, -1)])),
            base: pants_point(1.1, 1.7, 0.6),
            divergent_in: vec![0, 1, 2],
            boundaries: vec![0, 1, 2],
        },
        CatalogEntry {
            name: "a b^-2 on pants",
            surface: pants_surface(),
            loop_spec: LoopSpec::single_pants(0, word(&[(Letter::A, 1), (Letter::B, -2)])),
            base: pants_point(0.8, 1.2, 2.0),
            divergent_in: vec![0, 1, 2],
            boundaries: vec![0, 1, 2],
        },
        // Note: the boundary-parallel word ab (length exactly z, flat in x
        // and y) is exercised in the unit tests with a capped probe grid;
        // past x ~ 24 its flat profile sits at the e^{x/2} eps cancellation
        // floor and a 1e-9 monotonicity gate becomes unmeasurable.
        CatalogEntry {
            name: "torus dual curve",
            surface: torus_surface(),
            loop_spec: torus_dual(),
            base: torus_point(1.5, 0.4, 0.8),
            divergent_in: vec![1],
            boundaries: vec![1],
        },
        CatalogEntry {
            name: "torus wound crossing b a",
            surface: torus_surface(),
            loop_spec: torus_wound(word(&[(Letter::B, 1), (Letter::A, 1)])),
            base: torus_point(1.2, -0.3, 0.5),
            divergent_in: vec![1],
            boundaries: vec![1],
        },
        CatalogEntry {
            name: "four-holed-sphere double crossing",
            surface: s04_surface(),
            loop_spec: s04_loop(),
            base: s04_point((1.4, 0.3), [0.9, 1.7, 2.2, 0.4]),
            divergent_in: vec![1, 2, 3, 4],
            boundaries: vec![1, 2, 3, 4],
        },
    ]
}

/// Catalog entries that carry at least one interior curve (twist tests).
pub fn twisted_catalog() -> Vec<CatalogEntry> {
    catalog()
        .into_iter()
        .filter(|e| e.surface.interior_count() > 0)
        .collect()
}

/// Relative difference scaled to the larger magnitude.
pub fn rel_diff(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
}
