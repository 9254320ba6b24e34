use std::f64::consts::PI;

use serde_json::{json, Value};

use super::ExperimentConfig;

/// A built-in config with the result it exercises and the acceptance criteria it maps to.
pub struct Template {
    pub name: &'static str,
    pub anchor: &'static str,
    pub criteria: &'static [u8],
    pub summary: &'static str,
    build: fn() -> (&'static str, Value),
}

impl Template {
    pub fn config(&self) -> ExperimentConfig {
        let (kind, params) = (self.build)();
        ExperimentConfig { name: self.name.into(), kind: kind.into(), seed: 1, output_dir: None, params, mesh_file: None }
    }
}

fn unit_square() -> Value {
    json!([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])
}

fn rect(x0: f64, y0: f64, x1: f64, y1: f64) -> Value {
    json!([[x0, y0], [x1, y0], [x1, y1], [x0, y1]])
}

fn plane_wave(amplitude: f64, wavenumber: f64, angle: f64) -> Value {
    json!({"type": "planeWave", "amplitude": amplitude, "wavenumber": wavenumber, "direction": [angle.cos(), angle.sin()]})
}

fn right_sector() -> Value {
    json!({"apex": [0.0, 0.0], "axis": [1.0, 0.0], "halfAngle": PI / 4.0, "radius": 1.0})
}

fn taus() -> Value {
    json!({"min": 20.0, "max": 200.0, "points": 10})
}

fn eps_grid() -> Value {
    json!([1e-1, 1e-2, 1e-3, 1e-4])
}

fn square_inclusion(min_slope: f64) -> Value {
    json!({
        "outer": unit_square(),
        "interfaces": [rect(0.3, 0.3, 0.7, 0.7)],
        "class": "singleLayer",
        "wavenumber": 1.0,
        "wavenumberExponent": 0.5,
        "direction": 0.4,
        "linear": [{"scale": 1.0, "exponent": 0.5}],
        "higher": [[1.0]],
        "h": 0.05,
        "minSlope": min_slope
    })
}

fn two_layer_expansion(class: &str) -> Value {
    json!({
        "outer": unit_square(),
        "interfaces": [rect(0.2, 0.2, 0.8, 0.8), rect(0.35, 0.35, 0.65, 0.65)],
        "class": class,
        "wavenumber": 1.0,
        "wavenumberExponent": 0.5,
        "direction": 0.4,
        "linear": [{"scale": 2.0, "exponent": 0.5}, {"scale": -1.0, "exponent": 0.5}],
        "higher": [[], [1.0]],
        "h": 0.05,
        "minSlope": 1.2
    })
}

fn triangle() -> Value {
    json!([[0.3, 0.3], [0.72, 0.36], [0.46, 0.74]])
}

fn nest(class: &str, layers: Value, start: Value, psis: Value, slots: Value) -> Value {
    json!({
        "setup": {"outer": unit_square(), "psis": psis, "h": 0.025, "dataH": 0.00625},
        "truth": [rect(0.2, 0.2, 0.8, 0.8), rect(0.37, 0.37, 0.63, 0.63)],
        "content": {"background": 1.0, "layers": layers, "class": class},
        "start": {"background": 1.0, "layers": start, "class": class},
        "initial": [
            {"type": "polygon", "polygon": rect(0.25, 0.23, 0.79, 0.77)},
            {"type": "polygon", "polygon": rect(0.3505, 0.3505, 0.6495, 0.6495)}
        ],
        "slots": slots,
        "options": {"stage": {"model": "similarity"}, "finePolish": 0.0125},
        "vertexTolFactor": 2.0,
        "coefficientRelTol": 0.02
    })
}

const TEMPLATES: &[Template] = &[
    Template {
        name: "lemma21-sector",
        anchor: "Lemma 2.1",
        criteria: &[1],
        summary: "planar corner integral decays like tau^-2; closed form against quadrature",
        build: || {
            ("lemma21", json!({
                "corner": right_sector(),
                "taus": taus(),
                "quantities": [{"type": "cornerIntegral", "method": "closedForm2D"}],
                "slopeTol": 0.05,
                "closedFormTol": 1e-8
            }))
        },
    },
    Template {
        name: "lemma21-cone",
        anchor: "Lemma 2.1",
        criteria: &[2],
        summary: "circular cone integral decays like tau^-3 and tracks its leading term",
        build: || {
            ("lemma21", json!({
                "corner": {"apex": [0.0, 0.0, 0.0], "axis": [0.0, 0.0, 1.0], "halfAngle": PI / 6.0, "radius": 1.0},
                "taus": taus(),
                "quantities": [{"type": "cornerIntegral", "method": "quadrature"}],
                "slopeTol": 0.1,
                "leadingRatio": [0.5, 2.0],
                "relTol": 1e-8
            }))
        },
    },
    Template {
        name: "lemma21-weighted",
        anchor: "Lemma 2.1",
        criteria: &[3],
        summary: "weighted integrals decay like tau^-(alpha+2)",
        build: || {
            ("lemma21", json!({
                "corner": right_sector(),
                "taus": taus(),
                "quantities": [{"type": "weighted", "alpha": 0.5}, {"type": "weighted", "alpha": 1.0}],
                "slopeTol": 0.05
            }))
        },
    },
    Template {
        name: "lemma21-lid",
        anchor: "Lemma 2.1",
        criteria: &[4],
        summary: "lid norms decay at rate zeta h and respect their bounds",
        build: || {
            ("lemma21", json!({
                "corner": right_sector(),
                "taus": taus(),
                "quantities": [{"type": "lidH1"}, {"type": "lidDnu"}],
                "slopeTol": 0.05,
                "rateTol": 0.05,
                "boundFactor": 1.0
            }))
        },
    },
    Template {
        name: "thm21-green",
        anchor: "Theorem 2.1",
        criteria: &[5],
        summary: "Green identity on a manufactured pair",
        build: || {
            ("extraction", json!({
                "corner": {"apex": [0.2, 0.1], "axis": [0.0, 1.0], "halfAngle": 0.7, "radius": 0.8},
                "background": {"amplitude": 1.0, "wavenumber": 1.5, "direction": [0.0, 0.6, 0.8]},
                "bump": {"c": [1.0, 0.5], "kappa": 2.0, "alpha": 0.7},
                "mode": {"type": "green", "taus": [6.0, 30.0], "tol": 1e-8, "quadTol": 1e-10}
            }))
        },
    },
    Template {
        name: "thm21-extraction",
        anchor: "Theorem 2.1",
        criteria: &[6],
        summary: "extrapolated apex gap and remainder order",
        build: || {
            ("extraction", json!({
                "corner": right_sector(),
                "background": {"amplitude": 0.5, "wavenumber": 1.0, "direction": [1.0, 0.0, 0.0]},
                "bump": {"c": -2.0, "kappa": 1.0, "alpha": 1.0},
                "mode": {"type": "extraction", "taus": taus(), "limitRelTol": 0.02, "orderTol": 0.3}
            }))
        },
    },
    Template {
        name: "appendix-small-data",
        anchor: "Appendix",
        criteria: &[7],
        summary: "Newton iteration counts and ||u||/eps over small data",
        build: || {
            ("forward", json!({
                "geometry": {"outer": unit_square(), "interfaces": [rect(0.3, 0.3, 0.7, 0.7)], "h": 0.05},
                "content": {"background": 1.0, "layers": [[2.0, 5.0]], "class": "singleLayer"},
                "mode": {"type": "smallData", "psi": plane_wave(1.0, 1.0, 0.4), "eps": [1e-1, 1e-2, 1e-3, 1e-4], "maxSpread": 2.0, "maxIterations": 8}
            }))
        },
    },
    Template {
        name: "appendix-zero-data",
        anchor: "Appendix",
        criteria: &[7],
        summary: "zero boundary data give the zero solution without Newton steps",
        build: || {
            ("forward", json!({
                "geometry": {"outer": unit_square(), "interfaces": [rect(0.3, 0.3, 0.7, 0.7)], "h": 0.1},
                "content": {"background": 1.0, "layers": [[2.0, 5.0]], "class": "singleLayer"},
                "mode": {"type": "solve", "psi": {"type": "zero"}}
            }))
        },
    },
    Template {
        name: "forward-manufactured",
        anchor: "Appendix",
        criteria: &[8],
        summary: "second-order L2 convergence on a manufactured semilinear solution",
        build: || {
            ("forward", json!({
                "geometry": {"outer": unit_square(), "interfaces": [rect(0.25, 0.25, 0.75, 0.75)], "h": 0.2},
                "content": {"background": 1.0, "layers": [[2.0, 5.0]], "class": "singleLayer"},
                "mode": {"type": "manufactured", "amplitude": 0.3, "refinements": 3, "expectedRate": 2.0, "rateTol": 0.2}
            }))
        },
    },
    Template {
        name: "prop51-expansion",
        anchor: "Proposition 5.1",
        criteria: &[9],
        summary: "u - psi = o(eps) for scaled wavenumber and content",
        build: || ("admissibility", json!({"mode": {"type": "expansion", "config": square_inclusion(1.2), "eps": eps_grid()}})),
    },
    Template {
        name: "prop53-nest-expansion",
        anchor: "Proposition 5.3",
        criteria: &[9],
        summary: "o(eps) remainder for a class A two-layer nest",
        build: || ("admissibility", json!({"mode": {"type": "expansion", "config": two_layer_expansion("a"), "eps": eps_grid()}})),
    },
    Template {
        name: "prop52-assumption-a",
        anchor: "Proposition 5.2",
        criteria: &[14],
        summary: "Assumption A margin against its leading term",
        build: || {
            ("admissibility", json!({"mode": {
                "type": "leadingOrder", "config": square_inclusion(1.1), "eps": eps_grid(), "amplitudes": [[1.0]], "bounds": [0.8, 1.25]
            }}))
        },
    },
    Template {
        name: "prop52-assumption-b",
        anchor: "Proposition 5.2",
        criteria: &[14],
        summary: "Assumption B with two distinct amplitudes",
        build: || {
            ("admissibility", json!({"mode": {
                "type": "leadingOrder", "config": square_inclusion(1.1), "eps": eps_grid(), "amplitudes": [[1.0, 2.0]], "bounds": [0.8, 1.25]
            }}))
        },
    },
    Template {
        name: "prop54-assumption-c",
        anchor: "Proposition 5.4",
        criteria: &[14],
        summary: "Assumption C for a class A nest",
        build: || {
            ("admissibility", json!({"mode": {
                "type": "leadingOrder", "config": two_layer_expansion("a"), "eps": eps_grid(), "amplitudes": [[1.0], [1.5, 2.5]], "bounds": [0.8, 1.25]
            }}))
        },
    },
    Template {
        name: "prop55-assumption-d",
        anchor: "Proposition 5.5",
        criteria: &[14],
        summary: "Assumption D for a class B nest",
        build: || {
            ("admissibility", json!({"mode": {
                "type": "leadingOrder", "config": two_layer_expansion("b"), "eps": eps_grid(), "amplitudes": [[1.0]], "bounds": [0.8, 1.25]
            }}))
        },
    },
    Template {
        name: "thm31-vandermonde",
        anchor: "Theorem 3.1",
        criteria: &[10],
        summary: "two coefficients from two apex values",
        build: || {
            ("coeffRecover", json!({"mode": {
                "type": "vandermonde", "apex": [[0.3, 0.1], [0.7, -0.2]], "coefficients": [20.0, 40.0], "tol": 1e-10
            }}))
        },
    },
    Template {
        name: "thm31-coefficients",
        anchor: "Theorem 3.1",
        criteria: &[10],
        summary: "linear and quadratic coefficients from two boundary measurements",
        build: || {
            ("coeffRecover", json!({"mode": {
                "type": "boundary",
                "setup": {"outer": unit_square(), "psis": [plane_wave(0.5, 1.0, 0.4), plane_wave(1.0, 1.0, 0.4)], "h": 0.025, "dataH": 0.00625},
                "interfaces": [triangle()],
                "truth": {"background": 1.0, "layers": [[20.0, 40.0]], "class": "singleLayer"},
                "start": {"background": 1.0, "layers": [[15.0, 30.0]], "class": "singleLayer"},
                "slots": [{"region": 1, "power": 1}, {"region": 1, "power": 2}],
                "relTol": 0.01
            }}))
        },
    },
    Template {
        name: "thm23-triangle",
        anchor: "Theorem 2.3",
        criteria: &[11],
        summary: "convex triangle from one measurement, started within 20%",
        build: || {
            ("shapeRecover", json!({
                "setup": {"outer": unit_square(), "psis": [plane_wave(1.0, 1.0, 0.4)], "h": 0.05, "dataH": 0.025},
                "truth": triangle(),
                "content": {"background": 1.0, "layers": [[20.0, 5.0]], "class": "singleLayer"},
                "initial": {"type": "perturbed", "fraction": 0.2},
                "vertexTolFactor": 2.0
            }))
        },
    },
    Template {
        name: "thm42-two-layer",
        anchor: "Theorem 4.2",
        criteria: &[12],
        summary: "class B square nest and both contrasts from a single measurement",
        build: || {
            ("nestRecover", nest(
                "b",
                json!([[40.0], [120.0]]),
                json!([[32.0], [100.0]]),
                json!([plane_wave(1.0, 1.0, 0.4)]),
                json!([{"region": 1, "power": 1}, {"region": 2, "power": 1}]),
            ))
        },
    },
    Template {
        name: "thm41-two-layer",
        anchor: "Theorem 4.1",
        criteria: &[12],
        summary: "class A square nest from sum-of-M_l measurements",
        build: || {
            ("nestRecover", nest(
                "a",
                json!([[40.0], [120.0, 30.0]]),
                json!([[32.0], [100.0, 30.0]]),
                json!([plane_wave(0.5, 1.0, 0.4), plane_wave(1.0, 1.0, 0.4), plane_wave(1.5, 1.0, 0.4)]),
                json!([{"region": 1, "power": 1}, {"region": 2, "power": 1}, {"region": 2, "power": 2}]),
            ))
        },
    },
    Template {
        name: "thm24-distinct-triangles",
        anchor: "Theorem 2.4",
        criteria: &[13],
        summary: "two different triangles leave a Cauchy-data gap",
        build: || {
            ("distinguish", json!({
                "outer": unit_square(),
                "first": {"interfaces": [triangle()], "content": {"background": 1.0, "layers": [[20.0, 5.0]], "class": "singleLayer"}},
                "second": {"interfaces": [[[0.32, 0.3], [0.72, 0.36], [0.46, 0.74]]], "content": {"background": 1.0, "layers": [[20.0, 5.0]], "class": "singleLayer"}},
                "psis": [plane_wave(1.0, 1.0, 0.4)],
                "h": 0.05,
                "expect": {"type": "distinct", "minGap": 1e-3}
            }))
        },
    },
    Template {
        name: "thm24-identical-triangles",
        anchor: "Theorem 2.4",
        criteria: &[13],
        summary: "identical configurations give exactly zero gap",
        build: || {
            ("distinguish", json!({
                "outer": unit_square(),
                "first": {"interfaces": [triangle()], "content": {"background": 1.0, "layers": [[20.0, 5.0]], "class": "singleLayer"}},
                "second": {"interfaces": [triangle()], "content": {"background": 1.0, "layers": [[20.0, 5.0]], "class": "singleLayer"}},
                "psis": [plane_wave(1.0, 1.0, 0.4)],
                "h": 0.05,
                "expect": {"type": "identical"}
            }))
        },
    },
];

pub fn templates() -> &'static [Template] {
    TEMPLATES
}
