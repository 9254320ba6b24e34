use std::f64::consts::PI;

use nlinc::fit::log_space;
use nlinc::geometry::{TruncatedCorner, Vec2, Vec3};
use nlinc::indicator::{
    extract_apex_value, extract_two_content_gap, volume_integral, ExtractOptions, FieldDiff, FlankBump, FlankPolicy,
    PlaneWave, RadialBump, ShiftedField,
};
use nlinc::probes::{corner_integral, tau_sweep, CgoProbe, IntegralMethod, Quantity};
use nlinc::quadrature::QuadOptions;
use nlinc::C64;
use proptest::prelude::*;

fn sector(apex: Vec2, phi: f64, half: f64, h: f64) -> TruncatedCorner {
    TruncatedCorner::sector(apex, Vec2::from_angle(phi), half, h).unwrap()
}

fn rel(a: C64, b: C64) -> f64 {
    (a - b).norm() / b.norm()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 32, ..ProptestConfig::default() })]

    #[test]
    fn probe_is_harmonic(phi in 0.0..6.28f64, half in 0.1..1.4f64, tau in 1.0..50.0f64, s in 0.05..0.95f64, t in -1.0..1.0f64) {
        let probe = CgoProbe::new(sector(Vec2::new(0.2, -0.1), phi, half, 1.0), tau).unwrap();
        let (a, b) = probe.harmonicity_defect();
        prop_assert!(a.abs() < 1e-14 && b.abs() < 1e-14);
        let x = probe.corner.apex.xy() + Vec2::from_angle(phi + t * half) * s;
        let step = 1e-4;
        let u = |p: Vec2| probe.eval(p.to_3d()).unwrap();
        let lap = (u(x + Vec2::new(step, 0.0)) + u(x - Vec2::new(step, 0.0)) + u(x + Vec2::new(0.0, step))
            + u(x - Vec2::new(0.0, step)) - u(x) * 4.0)
            / (step * step);
        prop_assert!(lap.norm() < 1e-4 * tau * tau * u(x).norm(), "{} vs {}", lap.norm(), u(x).norm());
    }

    #[test]
    fn closed_form_matches_quadrature(half in 0.1..1.5f64, tau in 1.0..300.0f64, h in 0.1..2.0f64) {
        let probe = CgoProbe::new(sector(Vec2::new(0.0, 0.0), 0.3, half, h), tau).unwrap();
        let opts = QuadOptions::rel(1e-10);
        let exact = corner_integral(&probe, IntegralMethod::ClosedForm2D, opts).unwrap();
        let quad = corner_integral(&probe, IntegralMethod::Quadrature, opts).unwrap();
        prop_assert!(rel(quad, exact) < 1e-9, "{exact} vs {quad}");
    }

    #[test]
    fn corner_integral_is_rotation_invariant(angle in -3.1..3.1f64, half in 0.1..1.4f64, tau in 1.0..100.0f64) {
        let c = sector(Vec2::new(0.3, 0.1), 0.2, half, 1.0);
        let moved = c.rotated_2d(Vec2::new(-0.4, 0.7), angle);
        let opts = QuadOptions::rel(1e-12);
        for method in [IntegralMethod::ClosedForm2D, IntegralMethod::Quadrature] {
            let a = corner_integral(&CgoProbe::new(c.clone(), tau).unwrap(), method, opts).unwrap();
            let b = corner_integral(&CgoProbe::new(moved.clone(), tau).unwrap(), method, opts).unwrap();
            prop_assert!(rel(b, a) < 1e-10, "{method:?}: {a} vs {b}");
        }
    }
}

#[test]
fn measured_quantities_stay_below_their_bounds() {
    let taus = log_space(20.0, 200.0, 10);
    let opts = QuadOptions::rel(1e-10);
    let probe = CgoProbe::new(sector(Vec2::new(0.0, 0.0), 0.0, PI / 4.0, 1.0), 20.0).unwrap();
    for q in [
        Quantity::CornerIntegral { method: IntegralMethod::ClosedForm2D },
        Quantity::Weighted { alpha: 0.5 },
        Quantity::Weighted { alpha: 1.0 },
        Quantity::LidH1,
        Quantity::LidDnu,
    ] {
        let sweep = tau_sweep(&probe, &taus, q, opts).unwrap();
        for row in sweep.top_half() {
            assert!(row.value / row.bound <= 1.05, "{q:?} at tau {}: {} > {}", row.tau, row.value, row.bound);
        }
    }
}

#[test]
fn denominator_agrees_between_modules() {
    let opts = QuadOptions::rel(1e-12);
    for (half, tau) in [(PI / 4.0, 20.0), (PI / 6.0, 75.0), (1.2, 5.0)] {
        let probe = CgoProbe::new(sector(Vec2::new(0.1, 0.2), 1.0, half, 0.8), tau).unwrap();
        let direct = corner_integral(&probe, IntegralMethod::Quadrature, opts).unwrap();
        let volume = volume_integral(&probe, &|_| Ok(C64::new(1.0, 0.0)), opts).unwrap();
        assert!(rel(volume, direct) < 1e-10, "{direct} vs {volume}");
    }
}

#[test]
fn estimates_ignore_a_common_perturbation() {
    let c = sector(Vec2::new(0.0, 0.0), 0.0, PI / 4.0, 1.0);
    let probe = CgoProbe::new(c.clone(), 20.0).unwrap();
    let taus = log_space(20.0, 200.0, 8);
    let v = PlaneWave { amplitude: C64::new(1.0, 0.0), k: 2.0, dir: Vec3::new(0.6, 0.8, 0.0) };
    let w = FlankBump::for_sector(&c, C64::new(0.7, 0.2), Vec2::new(0.3, -0.4)).unwrap();
    let u = FieldDiff::sum(&v, &w);
    let extra = FlankBump::for_sector(&c, C64::new(-2.0, 1.0), Vec2::new(-0.5, 0.1)).unwrap();
    let u2 = FieldDiff::sum(&u, &extra);
    let v2 = FieldDiff::sum(&v, &extra);
    let opts = ExtractOptions::default();
    let a = extract_apex_value(&probe, &u, &v, &taus, &opts).unwrap();
    let b = extract_apex_value(&probe, &u2, &v2, &taus, &opts).unwrap();
    for (x, y) in a.estimates.iter().zip(&b.estimates) {
        assert!((x - y).norm() <= 1e-8 * x.norm().max(1e-12), "{x} vs {y}");
    }
}

#[test]
fn extraction_limit_is_rigid_motion_invariant() {
    let c = sector(Vec2::new(0.0, 0.0), 0.0, PI / 4.0, 1.0);
    let (angle, shift) = (0.9, Vec2::new(0.4, -1.3));
    let apex = shift;
    let moved = TruncatedCorner::sector(apex, Vec2::from_angle(angle), PI / 4.0, 1.0).unwrap();
    let taus = log_space(20.0, 200.0, 10);
    let opts = ExtractOptions { policy: FlankPolicy::IncludeFlanks, ..Default::default() };
    let bump = |at: Vec3| RadialBump { apex: at, dim: 2, c: C64::new(3.0, -1.0), kappa: C64::new(1.0, 0.0), alpha: 0.5 };

    let v = PlaneWave { amplitude: C64::new(1.0, 0.0), k: 1.5, dir: Vec3::new(0.6, 0.8, 0.0) };
    let w = bump(c.apex);
    let u = FieldDiff::sum(&v, &w);
    let a = extract_two_content_gap(&CgoProbe::new(c, 20.0).unwrap(), &u, &v, &taus, &opts).unwrap();

    let mv = ShiftedField { inner: &v, angle, shift };
    let mw = bump(moved.apex);
    let mu = FieldDiff::sum(&mv, &mw);
    let b = extract_two_content_gap(&CgoProbe::new(moved, 20.0).unwrap(), &mu, &mv, &taus, &opts).unwrap();
    assert!((a.limit - b.limit).norm() < 1e-8 * a.limit.norm(), "{} vs {}", a.limit, b.limit);
}
