//! Property tests for the spec's structural invariants.

use proptest::prelude::*;

use percolab::geom::{Dir, Vertex, DIRS};
use percolab::lattice::{cluster, sample_config, sample_giant, BoundaryMode};
use percolab::rightmost::{
    corner_round, interface_cut_edges, interface_to_path, is_rightmost, path_to_interface, Hull,
    LatticePath, PlanarCurve,
};
use percolab::Ratio;

fn path_from_dirs(dirs: &[u8]) -> LatticePath {
    let mut verts = vec![Vertex::new(0, 0)];
    for &d in dirs {
        verts.push(verts.last().unwrap().step(Dir::from_index(d)));
    }
    LatticePath::new(verts).unwrap()
}

fn enumerated_circuits() -> &'static [LatticePath] {
    use std::sync::OnceLock;
    static CIRCUITS: OnceLock<Vec<LatticePath>> = OnceLock::new();
    CIRCUITS.get_or_init(|| {
        percolab::rightmost::enumerate_rightmost(12, true)
            .into_iter()
            .filter(|p| p.is_circuit())
            .collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Coupled thresholding: every edge open at the smaller p is open at the
    /// larger p, and the giant component can only grow.
    #[test]
    fn coupling_is_monotone(seed in 0u64..1000, lo in 0.55f64..0.7, gap in 0.0f64..0.3) {
        let hi = (lo + gap).min(1.0);
        let a = sample_config(8, lo, seed, 4).unwrap();
        let b = sample_config(8, hi, seed, 4).unwrap();
        for x in -12..12 {
            for y in -12..=12 {
                let e = percolab::geom::Edge::new(Vertex::new(x, y), Vertex::new(x + 1, y));
                prop_assert!(!a.is_open(e) || b.is_open(e));
            }
        }
        let ga = sample_giant(8, lo, seed, 4).map(|g| g.len()).unwrap_or(0);
        let gb = sample_giant(8, hi, seed, 4).map(|g| g.len()).unwrap_or(0);
        prop_assert!(ga <= gb);
    }

    /// Round trip through the medial interface is the identity on right-most
    /// paths, and the cut-through complement is exactly the right boundary.
    #[test]
    fn interface_round_trip(dirs in proptest::collection::vec(0u8..4, 1..10)) {
        let path = path_from_dirs(&dirs);
        prop_assume!(is_rightmost(&path));
        let iface = path_to_interface(&path).unwrap();
        let back = interface_to_path(&iface).unwrap();
        prop_assert_eq!(&back, &path);
        let mut cuts = interface_cut_edges(&iface).unwrap();
        let mut rb = path.right_boundary();
        cuts.sort();
        cuts.dedup();
        rb.sort();
        rb.dedup();
        prop_assert_eq!(cuts, rb);
    }

    /// Corner rounding of a right-most circuit yields a simple closed curve
    /// whose points stay within ℓ∞ distance 1/2 of the medial vertices.
    #[test]
    fn corner_rounding_is_simple(pick in any::<prop::sample::Index>()) {
        let circuits = enumerated_circuits();
        let path = &circuits[pick.index(circuits.len())];
        let iface = path_to_interface(path).unwrap();
        let curve = corner_round(&iface).unwrap();
        prop_assert!(curve.is_simple());
        for (p, e) in curve.points.iter().zip(iface.medial_vertices()) {
            let (mx, my) = e.midpoint();
            prop_assert!((p.0 - mx).abs() <= 0.5 && (p.1 - my).abs() <= 0.5);
        }
    }

    /// Even-odd hulls agree with an independent scan-line oracle on a random
    /// rectilinear circuit.
    #[test]
    fn hull_matches_scanline(w in 1i32..5, h in 1i32..5, px in -6i32..6, py in -6i32..6) {
        let rect = PlanarCurve {
            points: vec![
                (0.0, 0.0),
                (w as f64, 0.0),
                (w as f64, h as f64),
                (0.0, h as f64),
            ],
            closed: true,
        };
        let hull = Hull::new(&rect).unwrap();
        let inside = hull.contains(Vertex::new(px, py));
        let expect = (0..=w).contains(&px) && (0..=h).contains(&py);
        prop_assert_eq!(inside, expect);
    }

    /// Conductance is the boundary count over the size, exactly.
    #[test]
    fn conductance_is_definitional(seed in 0u64..200, take in 1usize..30) {
        let g = sample_giant(5, 0.8, seed, 5).unwrap();
        let take = take.min(g.len());
        let u = g.subset(g.vertices.iter().take(take).copied().collect()).unwrap();
        for mode in [BoundaryMode::WithinBox, BoundaryMode::Infinite] {
            let c = u.conductance(mode);
            prop_assert_eq!(c, Ratio::new(u.edge_boundary(mode).len() as u64, take as u64));
        }
        let inner = u.edge_boundary(BoundaryMode::WithinBox);
        let outer = u.edge_boundary(BoundaryMode::Infinite);
        prop_assert!(inner.iter().all(|e| outer.binary_search(e).is_ok()));
    }

    /// Path text serialization round-trips.
    #[test]
    fn path_text_round_trip(dirs in proptest::collection::vec(0u8..4, 1..12)) {
        let path = path_from_dirs(&dirs);
        let back = LatticePath::from_text(&path.to_text()).unwrap();
        prop_assert_eq!(back, path);
    }

    /// Exact rational order agrees with the float order away from ties.
    #[test]
    fn ratio_order_matches_floats(a in 0u64..10_000, b in 1u64..10_000,
                                  c in 0u64..10_000, d in 1u64..10_000) {
        let (x, y) = (Ratio::new(a, b), Ratio::new(c, d));
        if x < y {
            prop_assert!(x.to_f64() <= y.to_f64());
        }
        if x == y {
            prop_assert_eq!(x.to_f64(), y.to_f64());
        }
    }

    /// The cluster labeling partitions the box: sizes sum to the vertex
    /// count and labels respect open adjacency.
    #[test]
    fn labeling_partitions_box(seed in 0u64..100, p in 0.2f64..0.9) {
        let config = sample_config(5, p, seed, 0).unwrap();
        let labeling = cluster(&config);
        let total: u64 = labeling.sizes().iter().map(|&s| s as u64).sum();
        prop_assert_eq!(total, config.vertex_count() as u64);
        for x in -5..=5 {
            for y in -5..=5 {
                let v = Vertex::new(x, y);
                for d in DIRS {
                    let w = v.step(d);
                    if config.in_padded_box(w) && config.is_open_step(v, d) {
                        prop_assert_eq!(
                            labeling.label_of(&config, v),
                            labeling.label_of(&config, w)
                        );
                    }
                }
            }
        }
    }
}
