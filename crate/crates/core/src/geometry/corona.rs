use std::f64::consts::{FRAC_PI_2, TAU};

use serde::{Deserialize, Serialize};

use super::polygon::ConvexPolygon;
use super::vector::{Vec2, Vec3};

/// An infinite strictly convex cone whose part between apex and core forms a spike.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Spike {
    pub apex: Vec3,
    pub axis: Vec3,
    pub half_angle: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", tag = "type")]
pub enum CoronaCore {
    Polygon { polygon: ConvexPolygon },
    Ball { center: Vec3, radius: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CoronaShape {
    pub core: CoronaCore,
    pub spikes: Vec<Spike>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CoronaReport {
    /// Condition (a): apex strictly outside the closed core, per spike.
    pub apex_outside: Vec<bool>,
    /// Both flank rays hit the core, so the spike base lies on the core boundary.
    pub base_on_core: Vec<bool>,
    /// Condition (b): spike pairs whose bases intersect.
    pub overlapping_bases: Vec<(usize, usize)>,
    pub pass: bool,
}

/// First intersection parameter `t > 0` of the ray `o + t dir` with the polygon boundary.
fn ray_polygon_entry(poly: &ConvexPolygon, o: Vec2, dir: Vec2) -> Option<(f64, f64)> {
    // Returns (t, perimeter position) of the entry point.
    let mut best: Option<(f64, f64)> = None;
    let mut offset = 0.0;
    for (a, b) in poly.edges() {
        let e = b - a;
        let denom = dir.cross(e);
        if denom.abs() > 0.0 {
            let t = (a - o).cross(e) / denom;
            let s = (a - o).cross(dir) / denom;
            if t > 0.0 && (0.0..=1.0).contains(&s) && best.is_none_or(|(bt, _)| t < bt) {
                best = Some((t, offset + s * e.norm()));
            }
        }
        offset += e.norm();
    }
    best
}

/// Perimeter arc `[start, start + len]` modulo the perimeter.
#[derive(Debug, Clone, Copy)]
struct Arc {
    start: f64,
    len: f64,
}

fn arcs_intersect(a: Arc, b: Arc, perimeter: f64) -> bool {
    let rel = (b.start - a.start).rem_euclid(perimeter);
    // b starts inside a, or a starts inside b (closed arcs).
    rel <= a.len || perimeter - rel <= b.len || rel == 0.0
}

fn polygon_report(poly: &ConvexPolygon, spikes: &[Spike]) -> CoronaReport {
    let per = poly.perimeter();
    let mut apex_outside = Vec::new();
    let mut base_on_core = Vec::new();
    let mut arcs = Vec::new();
    for s in spikes {
        let apex = s.apex.xy();
        let axis = s.axis.xy().normalized();
        apex_outside.push(!poly.contains_closed(apex, 0.0));
        let lo = ray_polygon_entry(poly, apex, axis.rotate(-s.half_angle));
        let hi = ray_polygon_entry(poly, apex, axis.rotate(s.half_angle));
        let valid = s.half_angle > 0.0 && s.half_angle < FRAC_PI_2;
        match (lo, hi) {
            (Some((_, p0)), Some((_, p1))) if valid => {
                // Pick the arc visible from the apex: its midpoint is where the ray through it enters.
                let fwd = Arc { start: p0, len: (p1 - p0).rem_euclid(per) };
                let mid = perimeter_point(poly, (fwd.start + 0.5 * fwd.len).rem_euclid(per));
                let dist = mid.dist(apex);
                let visible = ray_polygon_entry(poly, apex, (mid - apex).normalized())
                    .is_some_and(|(t, _)| t >= dist * (1.0 - 1e-9));
                let arc = if visible { fwd } else { Arc { start: p1, len: per - fwd.len } };
                base_on_core.push(true);
                arcs.push(Some(arc));
            }
            _ => {
                base_on_core.push(false);
                arcs.push(None);
            }
        }
    }
    let mut overlapping = Vec::new();
    for i in 0..arcs.len() {
        for j in i + 1..arcs.len() {
            if let (Some(a), Some(b)) = (arcs[i], arcs[j]) {
                if arcs_intersect(a, b, per) {
                    overlapping.push((i, j));
                }
            }
        }
    }
    finish(apex_outside, base_on_core, overlapping)
}

fn perimeter_point(poly: &ConvexPolygon, mut s: f64) -> Vec2 {
    for (a, b) in poly.edges() {
        let l = a.dist(b);
        if s <= l {
            return a.lerp(b, s / l);
        }
        s -= l;
    }
    poly.vertex(0)
}

fn ball_report(center: Vec3, radius: f64, spikes: &[Spike]) -> CoronaReport {
    let mut apex_outside = Vec::new();
    let mut base_on_core = Vec::new();
    // (unit direction from center to apex, angular cap radius)
    let mut caps = Vec::new();
    for s in spikes {
        let to_apex = s.apex - center;
        let l = to_apex.norm();
        apex_outside.push(l > radius);
        let aimed = l > 0.0 && s.axis.angle_to(-to_apex) < 1e-9;
        let bounded = l > radius && s.half_angle.sin() < radius / l && s.half_angle > 0.0;
        if aimed && bounded {
            let th = s.half_angle;
            let t = l * th.cos() - (radius * radius - l * l * th.sin().powi(2)).sqrt();
            // Flank ray hit point, seen from the center.
            let hit_r = (l * l + t * t - 2.0 * l * t * th.cos()).sqrt();
            let cos_beta = ((l * l + hit_r * hit_r - t * t) / (2.0 * l * hit_r)).clamp(-1.0, 1.0);
            caps.push(Some((to_apex * (1.0 / l), cos_beta.acos())));
            base_on_core.push(true);
        } else {
            caps.push(None);
            base_on_core.push(false);
        }
    }
    let mut overlapping = Vec::new();
    for i in 0..caps.len() {
        for j in i + 1..caps.len() {
            if let (Some((ui, bi)), Some((uj, bj))) = (caps[i], caps[j]) {
                if ui.angle_to(uj) <= bi + bj {
                    overlapping.push((i, j));
                }
            }
        }
    }
    finish(apex_outside, base_on_core, overlapping)
}

fn finish(apex_outside: Vec<bool>, base_on_core: Vec<bool>, overlapping: Vec<(usize, usize)>) -> CoronaReport {
    let pass = apex_outside.iter().all(|&b| b) && base_on_core.iter().all(|&b| b) && overlapping.is_empty();
    CoronaReport { apex_outside, base_on_core, overlapping_bases: overlapping, pass }
}

pub fn validate_corona(shape: &CoronaShape) -> CoronaReport {
    match &shape.core {
        CoronaCore::Polygon { polygon } => polygon_report(polygon, &shape.spikes),
        CoronaCore::Ball { center, radius } => ball_report(*center, *radius, &shape.spikes),
    }
}

impl CoronaShape {
    /// Planar core with spikes placed at the given polar angles about the centroid,
    /// each apex at `reach` times the centroid-to-boundary distance.
    pub fn planar_with_spikes(core: ConvexPolygon, angles: &[f64], reach: f64, half_angle: f64) -> Self {
        let c = core.centroid();
        let spikes = angles
            .iter()
            .map(|&a| {
                let dir = Vec2::from_angle(a.rem_euclid(TAU));
                let (t, _) = ray_polygon_entry(&core, c, dir).expect("ray from centroid leaves the core");
                let apex = c + dir * (t * reach);
                Spike { apex: apex.to_3d(), axis: (-dir).to_3d(), half_angle }
            })
            .collect();
        Self { core: CoronaCore::Polygon { polygon: core }, spikes }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn opposite_spikes_pass() {
        let core = ConvexPolygon::regular(Vec2::new(0.0, 0.0), 1.0, 8, 0.0).unwrap();
        let s = CoronaShape::planar_with_spikes(core, &[0.0, PI], 1.5, 0.3);
        let r = validate_corona(&s);
        assert!(r.pass, "{r:?}");
    }

    #[test]
    fn shared_base_point_fails() {
        let core = ConvexPolygon::unit_square();
        // Two spikes above the top edge whose flank rays meet the edge at x = 0.5.
        let mk = |x: f64| Spike {
            apex: Vec3::new(x, 1.5, 0.0),
            axis: Vec3::new(0.0, -1.0, 0.0),
            half_angle: (0.25f64 / 0.5).atan(),
        };
        let s = CoronaShape { core: CoronaCore::Polygon { polygon: core }, spikes: vec![mk(0.25), mk(0.75)] };
        let r = validate_corona(&s);
        assert!(!r.pass);
        assert_eq!(r.overlapping_bases, vec![(0, 1)]);
    }

    #[test]
    fn apex_inside_core_fails() {
        let core = ConvexPolygon::unit_square();
        let s = CoronaShape {
            core: CoronaCore::Polygon { polygon: core },
            spikes: vec![Spike {
                apex: Vec3::new(0.5, 0.5, 0.0),
                axis: Vec3::new(0.0, -1.0, 0.0),
                half_angle: 0.2,
            }],
        };
        let r = validate_corona(&s);
        assert!(!r.pass);
        assert_eq!(r.apex_outside, vec![false]);
    }

    #[test]
    fn ball_core_caps() {
        let mk = |dir: Vec3| Spike { apex: dir * 2.0, axis: -dir, half_angle: 0.2 };
        let ok = CoronaShape {
            core: CoronaCore::Ball { center: Vec3::default(), radius: 1.0 },
            spikes: vec![mk(Vec3::new(0.0, 0.0, 1.0)), mk(Vec3::new(0.0, 0.0, -1.0))],
        };
        assert!(validate_corona(&ok).pass);
        let close = CoronaShape {
            core: CoronaCore::Ball { center: Vec3::default(), radius: 1.0 },
            spikes: vec![mk(Vec3::new(0.0, 0.0, 1.0)), mk(Vec3::new(0.05, 0.0, 1.0).normalized())],
        };
        assert!(!validate_corona(&close).pass);
    }
}
