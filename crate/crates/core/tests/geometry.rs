use nlinc::geometry::{
    choose_probe_direction, max_corner_radius, validate_nest, vertex_corner, ConvexPolygon, NestedPartition,
    TruncatedCorner, Vec2, Vec3,
};
use nlinc::mesh::{triangulate, TriMesh};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Convex polygon inscribed in a circle, with vertex angles spread at least `0.4` rad apart.
fn cyclic_polygon(center: (f64, f64), radius: f64) -> impl Strategy<Value = ConvexPolygon> {
    (3usize..7, any::<u64>()).prop_map(move |(n, seed)| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let slack = std::f64::consts::TAU - 0.4 * n as f64;
        let mut cuts: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
        let total: f64 = cuts.iter().sum();
        cuts.iter_mut().for_each(|c| *c = 0.4 + slack * *c / total);
        let phase = rng.gen::<f64>() * std::f64::consts::TAU;
        let mut angle = phase;
        let vertices = cuts
            .iter()
            .map(|gap| {
                let v = Vec2::new(center.0, center.1) + Vec2::from_angle(angle) * radius;
                angle += gap;
                v
            })
            .collect();
        ConvexPolygon::new(vertices).unwrap()
    })
}

fn sector() -> impl Strategy<Value = TruncatedCorner> {
    (-1.0..1.0f64, -1.0..1.0f64, 0.0..std::f64::consts::TAU, 0.05..1.5f64, 0.1..2.0f64).prop_map(
        |(x, y, phi, half, radius)| TruncatedCorner::sector(Vec2::new(x, y), Vec2::from_angle(phi), half, radius).unwrap(),
    )
}

fn cone() -> impl Strategy<Value = TruncatedCorner> {
    (0.0..std::f64::consts::PI, 0.0..std::f64::consts::TAU, 0.05..1.4f64).prop_map(|(theta, phi, half)| {
        let axis = Vec3::new(theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos());
        TruncatedCorner::circular_cone(Vec3::new(0.0, 0.0, 0.0), axis, half, 1.0).unwrap()
    })
}

fn polygon_area_between(outer: &ConvexPolygon, inner: Option<&ConvexPolygon>) -> f64 {
    outer.area() - inner.map_or(0.0, ConvexPolygon::area)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 32, ..ProptestConfig::default() })]

    #[test]
    fn probe_margin_holds_on_every_sampled_ray(corner in prop_oneof![sector(), cone()]) {
        let dir = choose_probe_direction(&corner, 0.0).unwrap();
        let margin = dir.sampled_margin(&corner, 10_000);
        prop_assert!(dir.zeta > 0.0);
        prop_assert!(margin >= dir.zeta - 1e-12, "margin {margin} < zeta {}", dir.zeta);
        prop_assert!(dir.d.dot(dir.d_perp).abs() < 1e-12);
        prop_assert!((dir.d.norm() - dir.d_perp.norm()).abs() < 1e-12);
    }

    #[test]
    fn vertex_corner_is_polygon_near_vertex(poly in cyclic_polygon((0.0, 0.0), 1.0), seed in any::<u64>(), frac in 0.1..0.95f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for i in 0..poly.len() {
            let h = frac * max_corner_radius(&poly, i);
            let corner = vertex_corner(&poly, i, h).unwrap();
            let v = poly.vertex(i);
            for _ in 0..1000 {
                let p = v + Vec2::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * (1.5 * h);
                let margin = poly.boundary_distance(p).min((p.dist(v) - h).abs());
                if margin < 1e-9 {
                    continue;
                }
                let expected = poly.contains(p) && p.dist(v) <= h;
                prop_assert_eq!(corner.contains(p.to_3d(), 0.0), expected, "vertex {} point {:?}", i, p);
            }
        }
    }

    #[test]
    fn shrinking_an_inner_layer_keeps_a_valid_nest(outer in cyclic_polygon((0.0, 0.0), 1.0), s in 0.2..0.9f64, t in 0.05..1.0f64) {
        let inner = outer.scaled(s).unwrap();
        let nest = NestedPartition::new(vec![outer.clone(), inner.clone()]);
        let before = validate_nest(&nest);
        prop_assert!(before.pass);
        let shrunk = NestedPartition::new(vec![outer, inner.scaled(t).unwrap()]);
        let after = validate_nest(&shrunk);
        prop_assert!(after.pass);
        prop_assert!(after.clearances[0] >= before.clearances[0] - 1e-12);
    }

    #[test]
    fn rigid_motions_preserve_polygon_invariants(poly in cyclic_polygon((0.3, -0.2), 0.7), angle in -3.0..3.0f64, dx in -2.0..2.0f64) {
        let moved = poly.rotated(Vec2::new(0.1, 0.4), angle).translated(Vec2::new(dx, -dx));
        prop_assert!((moved.area() - poly.area()).abs() < 1e-12);
        prop_assert!((moved.perimeter() - poly.perimeter()).abs() < 1e-12);
        for i in 0..poly.len() {
            prop_assert!((moved.interior_angle(i) - poly.interior_angle(i)).abs() < 1e-10);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 8, ..ProptestConfig::default() })]

    #[test]
    fn mesh_areas_match_polygons_region_by_region(
        outer in cyclic_polygon((0.0, 0.0), 1.0),
        s1 in 0.5..0.8f64,
        s2 in 0.2..0.6f64,
        h in 0.08..0.2f64,
    ) {
        let l1 = outer.scaled(s1).unwrap();
        let l2 = l1.scaled(s2).unwrap();
        let mesh = triangulate(&outer, &[l1.clone(), l2.clone()], h).unwrap();
        mesh.check().unwrap();
        prop_assert!(mesh.interfaces_conform());
        for t in 0..mesh.triangles.len() {
            prop_assert!(mesh.area(t) > 0.0);
            prop_assert_eq!(mesh.regions[t], TriMesh::classify(&mesh.interfaces, mesh.centroid(t)));
        }
        let rel = |a: f64, b: f64| (a - b).abs() / b;
        prop_assert!(rel(mesh.total_area(), outer.area()) < 1e-12);
        prop_assert!(rel(mesh.region_area(0), polygon_area_between(&outer, Some(&l1))) < 1e-12);
        prop_assert!(rel(mesh.region_area(1), polygon_area_between(&l1, Some(&l2))) < 1e-12);
        prop_assert!(rel(mesh.region_area(2), polygon_area_between(&l2, None)) < 1e-12);
    }
}

#[test]
fn refinement_preserves_regions_and_area() {
    let outer = ConvexPolygon::unit_square();
    let tri = ConvexPolygon::new(vec![Vec2::new(0.3, 0.3), Vec2::new(0.7, 0.35), Vec2::new(0.45, 0.7)]).unwrap();
    let mesh = triangulate(&outer, std::slice::from_ref(&tri), 0.1).unwrap();
    let fine = mesh.refine();
    fine.check().unwrap();
    assert_eq!(fine.triangles.len(), 4 * mesh.triangles.len());
    assert!((fine.region_area(1) - tri.area()).abs() < 1e-12 * tri.area());
    assert!((fine.total_area() - 1.0).abs() < 1e-12);
}

#[test]
fn mesh_text_round_trips() {
    let outer = ConvexPolygon::unit_square();
    let inner = ConvexPolygon::rectangle(0.25, 0.3, 0.7, 0.75).unwrap();
    let mesh = triangulate(&outer, &[inner], 0.1).unwrap();
    let back = TriMesh::from_text(&mesh.to_text()).unwrap();
    assert_eq!(back.triangles, mesh.triangles);
    assert_eq!(back.regions, mesh.regions);
    for (a, b) in back.nodes.iter().zip(&mesh.nodes) {
        assert_eq!(a, b);
    }
}
