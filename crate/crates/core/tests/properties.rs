use carrier_core::generate::{generate_delaunay, generate_hyperbolic};
use carrier_core::io::GraphFile;
use carrier_core::metric::{ball_d0, d0, CablePoint};
use carrier_core::EmbeddedGraph;
use proptest::prelude::*;

fn cable_point(g: &EmbeddedGraph, e: usize, t: f64) -> CablePoint {
    CablePoint::new(e % g.edge_count(), t)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn euler_characteristic(n in 4usize..120, seed in any::<u64>()) {
        let g = generate_delaunay(n, seed).unwrap();
        let chi = g.vertex_count() as i64 - g.edge_count() as i64 + g.faces().len() as i64;
        prop_assert_eq!(chi, 2);
    }

    #[test]
    fn d0_is_a_metric(seed in 0u64..1000, e in proptest::array::uniform3(0usize..10_000), t in proptest::array::uniform3(0.0f64..=1.0)) {
        let g = generate_delaunay(40, seed).unwrap();
        let [x, y, z] = [0, 1, 2].map(|i| cable_point(&g, e[i], t[i]));
        let dxy = d0(&g, x, y);
        prop_assert!(dxy >= 0.0);
        prop_assert!((dxy - d0(&g, y, x)).abs() <= 1e-12 * (1.0 + dxy));
        prop_assert!(d0(&g, x, x).abs() <= 1e-12);
        prop_assert!(dxy <= d0(&g, x, z) + d0(&g, z, y) + 1e-12);
        prop_assert!(dxy + 1e-12 >= (x.position(&g) - y.position(&g)).norm());
    }

    #[test]
    fn balls_grow_with_radius(seed in 0u64..1000, e in 0usize..10_000, t in 0.0f64..=1.0, r in 0.01f64..0.5, grow in 1.0f64..3.0) {
        let g = generate_delaunay(50, seed).unwrap();
        let x = cable_point(&g, e, t);
        let small = ball_d0(&g, x, r);
        let large = ball_d0(&g, x, r * grow);
        prop_assert!(small.length(&g) <= large.length(&g) + 1e-12);
        for k in 0..20 {
            let p = CablePoint::new((e + 7 * k) % g.edge_count(), (k as f64 / 19.0).min(1.0));
            if small.contains(p, &g) {
                prop_assert!(large.contains(p, &g));
            }
        }
    }

    #[test]
    fn graph_file_round_trip(n in 4usize..80, seed in any::<u64>()) {
        let g = generate_delaunay(n, seed).unwrap();
        let text = GraphFile::from_graph(&g).to_canonical_string();
        let back = GraphFile::parse(&text).unwrap();
        prop_assert_eq!(back.to_canonical_string(), text);
        let h = back.to_graph().unwrap();
        prop_assert_eq!(h.positions(), g.positions());
        prop_assert_eq!(h.edge_count(), g.edge_count());
    }
}

#[test]
fn combinatorial_file_round_trip() {
    for depth in 1..=4 {
        let t = generate_hyperbolic(7, depth).unwrap();
        let text = GraphFile::from_triangulation(&t).to_canonical_string();
        let back = GraphFile::parse(&text).unwrap();
        assert_eq!(back.to_canonical_string(), text);
    }
}
