//! Cross-module invariants on randomly generated sets.

use proptest::prelude::*;

use johnforge_core::geometry::{
    distance_transform, rasterize, whitney, BoundingBox, CompactSetMask, Point, ShapeSpec,
};
use johnforge_core::john::{estimate_john_constant, JohnCenter};
use johnforge_core::potential::{capacity_estimate, CapacityMethod};
use johnforge_core::removability::{removability_report, TraceSpec};
use johnforge_core::simplify::{build_graph, cut_slits, verify_simplified};
use johnforge_core::WhitneyFile;

fn disks_spec(disks: &[(f64, f64, f64)]) -> ShapeSpec {
    let s: Vec<String> = disks
        .iter()
        .map(|(x, y, r)| format!("{x},{y},{r}"))
        .collect();
    format!("disks:{}", s.join(";")).parse().unwrap()
}

fn unit_box() -> BoundingBox {
    BoundingBox::new(Point::ORIGIN, 1.0).unwrap()
}

/// Up to four disks well inside the unit box.
fn disk_sets() -> impl Strategy<Value = Vec<(f64, f64, f64)>> {
    prop::collection::vec((-0.5f64..0.5, -0.5f64..0.5, 0.05f64..0.3), 1..5)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn john_certificates_recompute(disks in disk_sets(), seed in 0u64..1000) {
        let mask = rasterize(&disks_spec(&disks), unit_box(), 7).unwrap();
        let w = whitney(&mask, 7).unwrap();
        let est = estimate_john_constant(&w, JohnCenter::INFINITY, 16, seed).unwrap();
        prop_assert!(est.epsilon_lower > 0.0 && est.epsilon_lower <= 1.0);
        for c in &est.samples {
            prop_assert!((c.recompute(&w.distance_field) - c.epsilon).abs() <= 1e-12);
            prop_assert!(c.epsilon >= est.epsilon_lower);
        }
    }

    #[test]
    fn capacity_scales_linearly(disks in disk_sets(), s in 0.25f64..4.0) {
        let mask = rasterize(&disks_spec(&disks), unit_box(), 8).unwrap();
        let scaled = mask.scaled(s).unwrap();
        for method in [CapacityMethod::Energy, CapacityMethod::Fekete] {
            let a = capacity_estimate(&mask, method, 128, 0).unwrap().value;
            let b = capacity_estimate(&scaled, method, 128, 0).unwrap().value;
            // the energy minimizer stops on a relative-change rule, so the
            // two runs agree only to its convergence level
            prop_assert!((b - s * a).abs() <= 0.02 * b, "{method}: {b} vs {}", s * a);
        }
    }

    #[test]
    fn john_certificates_are_dilation_invariant(disks in disk_sets(), s in 0.25f64..4.0) {
        let mask = rasterize(&disks_spec(&disks), unit_box(), 7).unwrap();
        let scaled = mask.scaled(s).unwrap();
        let a = estimate_john_constant(&whitney(&mask, 7).unwrap(), JohnCenter::INFINITY, 16, 3).unwrap();
        let b = estimate_john_constant(&whitney(&scaled, 7).unwrap(), JohnCenter::INFINITY, 16, 3).unwrap();
        prop_assert_eq!(a.samples.len(), b.samples.len());
        for (x, y) in a.samples.iter().zip(&b.samples) {
            prop_assert!((x.epsilon - y.epsilon).abs() <= 1e-12, "{} vs {}", x.epsilon, y.epsilon);
        }
    }

    #[test]
    fn capacity_is_monotone(disks in disk_sets(), extra in (-0.5f64..0.5, -0.5f64..0.5, 0.05f64..0.2)) {
        let small = rasterize(&disks_spec(&disks), unit_box(), 8).unwrap();
        let mut more = disks.clone();
        more.push(extra);
        let large = rasterize(&disks_spec(&more), unit_box(), 8).unwrap();
        for method in [CapacityMethod::Energy, CapacityMethod::Fekete] {
            let a = capacity_estimate(&small, method, 256, 0).unwrap().value;
            let b = capacity_estimate(&large, method, 256, 0).unwrap().value;
            prop_assert!(a <= b * 1.05, "{method}: {a} > {b}");
        }
    }

    #[test]
    fn whitney_file_round_trips(disks in disk_sets()) {
        let mask = rasterize(&disks_spec(&disks), unit_box(), 6).unwrap();
        let w = whitney(&mask, 6).unwrap();
        let file = WhitneyFile::new(&mask, &w);
        let text = serde_json::to_string(&file).unwrap();
        let back: WhitneyFile = serde_json::from_str(&text).unwrap();
        let (m2, w2) = back.load().unwrap();
        prop_assert_eq!(m2.to_bits(), mask.to_bits());
        prop_assert_eq!(&w2.squares, &w.squares);
        prop_assert_eq!(&w2.dist_to_set, &w.dist_to_set);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn simplified_domains_verify(disks in prop::collection::vec((-0.4f64..0.4, -0.4f64..0.4, 0.08f64..0.2), 1..4)) {
        let mask = rasterize(&disks_spec(&disks), unit_box(), 7).unwrap();
        let w = whitney(&mask, 7).unwrap();
        let g = build_graph(&w, 8.0, None).unwrap();
        prop_assert!(g.certificate.passed);
        prop_assert!(g.max_degree() <= 3);
        let s = cut_slits(&w, &g, 0.1).unwrap();
        let r = verify_simplified(&s, 8, 0).unwrap();
        prop_assert!(r.connected.passed, "{}", r.connected.detail);
        prop_assert!(r.simply_connected.passed, "{}", r.simply_connected.detail);
        prop_assert!(r.boundary_contained.passed, "{}", r.boundary_contained.detail);
        prop_assert!(r.john.unwrap().simplified > 0.0);
    }

    #[test]
    fn verdict_gap_is_dilation_invariant(s in 0.5f64..2.0, seed in 0u64..100) {
        let bbox = BoundingBox::new(Point::ORIGIN, 1.0).unwrap();
        let mask = rasterize(&"circle:0.5".parse().unwrap(), bbox, 8).unwrap();
        let scaled = mask.scaled(s).unwrap();
        let trace = TraceSpec::RandomFourier { terms: 4 };
        let a = removability_report(&mask, &trace, &[4, 8], 0.25, seed).unwrap();
        let b = removability_report(&scaled, &trace, &[4, 8], 0.25 * s, seed).unwrap();
        for (x, y) in a.verdict_gaps().iter().zip(b.verdict_gaps()) {
            prop_assert!((x - y).abs() <= 1e-6, "{x} vs {y}");
        }
    }
}

#[test]
fn distance_field_matches_brute_force() {
    let spec: ShapeSpec = "cantor:0.25,3".parse().unwrap();
    let mask: CompactSetMask = rasterize(&spec, spec.default_box().unwrap(), 6).unwrap();
    let df = distance_transform(&mask);
    let occupied = mask.occupied();
    for k in 0..mask.n() * mask.n() {
        let p = mask.pixel_center_of(k);
        let d = occupied
            .iter()
            .map(|&q| p.dist(mask.pixel_center_of(q)))
            .fold(f64::INFINITY, f64::min);
        assert!((df.get_index(k) - d).abs() <= 1e-12, "pixel {k}");
    }
}
