use nlinc::forward::{BoundaryData, ContentClass, ContentModel, SolverOptions};
use nlinc::geometry::ConvexPolygon;
use nlinc::inverse::*;
use nlinc::C64;
use proptest::prelude::*;

fn c(x: f64) -> C64 {
    C64::new(x, 0.0)
}

fn triangle(a: [f64; 2], b: [f64; 2], d: [f64; 2]) -> ConvexPolygon {
    ConvexPolygon::new(vec![a.into(), b.into(), d.into()]).unwrap()
}

fn truth() -> ConvexPolygon {
    triangle([0.3, 0.3], [0.72, 0.36], [0.46, 0.74])
}

fn data(tri: &ConvexPolygon, content: &ContentModel, h: f64) -> Measurement {
    let psi = [BoundaryData::plane_wave(1.0, 1.0, 0.4)];
    let outer = ConvexPolygon::unit_square();
    synthesize(&outer, std::slice::from_ref(tri), content, &psi, h, &SolverOptions::default()).unwrap().remove(0)
}

#[test]
fn distinct_triangles_are_distinguished() {
    let content = ContentModel::single(c(1.0), vec![c(20.0), c(5.0)]).unwrap();
    let a = data(&truth(), &content, 0.05);
    let b = data(&triangle([0.32, 0.3], [0.72, 0.36], [0.46, 0.74]), &content, 0.05);
    let a2 = data(&truth(), &content, 0.05);
    let gap = cauchy_gap(&a.data, &b.data).unwrap();
    assert!(gap > 1e-3, "gap {gap}");
    assert_eq!(cauchy_gap(&a.data, &a2.data).unwrap(), 0.0);
}

#[test]
fn scaled_content_gives_small_gap() {
    let content = ContentModel::single(c(1.0), vec![c(20.0), c(5.0)]).unwrap();
    let a = data(&truth(), &content, 0.05);
    let b = data(&truth(), &content.scaled(1.0 + 1e-6), 0.05);
    let gap = cauchy_gap(&a.data, &b.data).unwrap();
    assert!(gap > 0.0 && gap < 1e-4, "gap {gap}");
}

#[test]
fn quadratic_coefficients_from_boundary_data() {
    let outer = ConvexPolygon::unit_square();
    let tri = truth();
    let content = ContentModel::single(c(1.0), vec![c(20.0), c(40.0)]).unwrap();
    let psis = [BoundaryData::plane_wave(0.5, 1.0, 0.4), BoundaryData::plane_wave(1.0, 1.0, 0.4)];
    let opts = SolverOptions::default();
    let data = synthesize(&outer, std::slice::from_ref(&tri), &content, &psis, 0.0125, &opts).unwrap();
    let mut sim = Simulator::new(outer, 0.025, data, opts).unwrap();
    let start = ContentModel::single(c(1.0), vec![c(15.0), c(30.0)]).unwrap();
    let slots = [Slot { region: 1, power: 1 }, Slot { region: 1, power: 2 }];
    let fit = fit_coefficients(&mut sim, &[tri], &start, &slots, &GaussNewtonOptions::default()).unwrap();
    assert!((fit.values[0] - c(20.0)).norm() < 0.2, "{:?}", fit.values);
    assert!((fit.values[1] - c(40.0)).norm() < 0.4, "{:?}", fit.values);
    assert!(!fit.rank_deficient);
}

#[test]
fn gap_grows_with_the_symmetric_difference() {
    let content = ContentModel::single(c(1.0), vec![c(20.0), c(5.0)]).unwrap();
    let base = data(&truth(), &content, 0.05);
    let mut last = 0.0;
    for shift in [0.0, 0.01, 0.02, 0.04, 0.08] {
        let moved = triangle([0.3 + shift, 0.3], [0.72, 0.36], [0.46, 0.74]);
        let gap = cauchy_gap(&base.data, &data(&moved, &content, 0.05).data).unwrap();
        assert!(gap >= last, "shift {shift}: gap {gap} < {last}");
        last = gap;
    }
}

#[test]
fn peeling_its_own_output_is_idempotent() {
    let outer = ConvexPolygon::unit_square();
    let layers = [ConvexPolygon::rectangle(0.2, 0.2, 0.8, 0.8).unwrap(), ConvexPolygon::rectangle(0.37, 0.37, 0.63, 0.63).unwrap()];
    let content = ContentModel::new(c(1.0), vec![vec![c(40.0)], vec![c(120.0)]], ContentClass::B).unwrap();
    let psis = [BoundaryData::plane_wave(1.0, 1.0, 0.4)];
    let opts = SolverOptions::default();
    let h = 0.1;
    let data = synthesize(&outer, &layers, &content, &psis, h, &opts).unwrap();
    let mut sim = Simulator::new(outer, h, data, opts).unwrap();
    let slots = [Slot { region: 1, power: 1 }, Slot { region: 2, power: 1 }];
    let o = NestOptions { stage: ShapeOptions { model: ShapeModel::Similarity, ..Default::default() }, ..Default::default() };
    let r = recover_nest(&mut sim, &layers, &content, &slots, &o).unwrap();
    assert!(r.misfit < 1e-10, "misfit {}", r.misfit);
    for (got, want) in r.layers.iter().zip(&layers) {
        assert!(got.max_vertex_distance(want) < 1e-8);
    }
    assert!((r.content.layers[0][0] - c(40.0)).norm() < 1e-6);
    assert!((r.content.layers[1][0] - c(120.0)).norm() < 1e-6);
}

fn coefficient() -> impl Strategy<Value = C64> {
    (-50.0..50.0f64, -5.0..5.0f64).prop_map(|(re, im)| C64::new(re, im))
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 128, ..ProptestConfig::default() })]

    #[test]
    fn vandermonde_round_trip(coeffs in prop::collection::vec(coefficient(), 1..5), base in 0.2..1.0f64, spread in 0.3..1.0f64) {
        // Apex values spaced `spread` apart keep the system well conditioned.
        let apex: Vec<C64> = (0..coeffs.len()).map(|i| C64::new(base + spread * i as f64, 0.1 * i as f64)).collect();
        let gaps = forward_vandermonde(&apex, &coeffs);
        let r = recover_coefficients(&apex, &gaps).unwrap();
        let scale = coeffs.iter().map(|z| z.norm()).fold(1.0, f64::max);
        for (got, want) in r.coefficients.iter().zip(&coeffs) {
            prop_assert!((got - want).norm() < 1e-8 * scale * r.condition.max(1.0), "{got} vs {want}, cond {}", r.condition);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 4, ..ProptestConfig::default() })]

    #[test]
    fn cauchy_gap_is_a_pseudometric(a in 5.0..40.0f64, b in 5.0..40.0f64, d in 5.0..40.0f64) {
        let tri = truth();
        let m = |l: f64| data(&tri, &ContentModel::single(c(1.0), vec![c(l), c(3.0)]).unwrap(), 0.08).data;
        let (x, y, z) = (m(a), m(b), m(d));
        let g = |p: &nlinc::forward::CauchyData, q: &nlinc::forward::CauchyData| cauchy_gap(p, q).unwrap();
        prop_assert_eq!(g(&x, &x), 0.0);
        prop_assert!((g(&x, &y) - g(&y, &x)).abs() <= 1e-15 * g(&x, &y));
        prop_assert!(g(&x, &z) <= g(&x, &y) + g(&y, &z) + 1e-14);
    }
}
