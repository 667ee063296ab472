//! The benchmark registry.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::Arc;

use super::{
    eqs, Component, Condition, DataConfig, Locus, OracleKind, PointFn, ProblemSpec, Weights,
};
use crate::diffengine::{Dual, DualJet};
use crate::error::{Error, Result};

/// Every registered problem id.
pub const PROBLEM_IDS: [&str; 15] = [
    "linear_ode",
    "coupled_simple",
    "coupled_linear_bvp",
    "coupled_nonlinear_bvp",
    "lorenz",
    "shm",
    "pendulum",
    "mathieu_a3b1.2",
    "mathieu_a2b1",
    "mathieu_a0.25b0.05",
    "vdp_f1",
    "vdp_f1.7",
    "burgers",
    "allen_cahn_1",
    "allen_cahn_2",
];

const POINTS: usize = 100;

fn point_fn(f: impl Fn(&[DualJet], &[f64]) -> super::Equations + Send + Sync + 'static) -> PointFn {
    Arc::new(f)
}

fn cond(
    name: &str,
    component: Component,
    locus: Locus,
    count: usize,
    order: usize,
    f: impl Fn(&[DualJet], &[f64]) -> super::Equations + Send + Sync + 'static,
) -> Condition {
    Condition {
        name: name.to_string(),
        component,
        locus,
        count,
        order,
        eval: point_fn(f),
    }
}

fn defaults(id: &str) -> Result<BTreeMap<String, f64>> {
    let pairs: Vec<(&str, f64)> = match id {
        "linear_ode" | "coupled_simple" | "coupled_linear_bvp" | "coupled_nonlinear_bvp" => vec![],
        "lorenz" => vec![("sigma", 10.0), ("rho", 6.0), ("beta", 8.0 / 3.0)],
        "shm" | "pendulum" => vec![("omega0", 25.0), ("y0", 0.1), ("v0", 40.0)],
        "mathieu_a3b1.2" => vec![("a", 3.0), ("beta", 1.2)],
        "mathieu_a2b1" => vec![("a", 2.0), ("beta", 1.0)],
        "mathieu_a0.25b0.05" => vec![("a", 0.25), ("beta", 0.05)],
        "vdp_f1" | "vdp_f1.7" => vec![
            ("c0", -1.0),
            ("eps", 0.2),
            ("omega_n", 1.0),
            ("c1", 1.0),
            ("alpha", 1.0),
            ("omega", 0.12),
            ("f0", 0.4),
            ("f1", if id == "vdp_f1" { 1.0 } else { 1.7 }),
        ],
        "burgers" => vec![("nu", 0.1)],
        "allen_cahn_1" => vec![("nu", 0.001), ("reaction", 1.0)],
        "allen_cahn_2" => vec![("nu", 0.0001), ("reaction", 5.0)],
        other => return Err(Error::UnknownProblem(other.to_string())),
    };
    Ok(pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect())
}

/// Problem `id` with its default constants.
pub fn make_problem(id: &str) -> Result<ProblemSpec> {
    make_problem_with(id, &BTreeMap::new())
}

/// Problem `id` with some constants replaced. Unknown constant names are
/// rejected.
pub fn make_problem_with(id: &str, overrides: &BTreeMap<String, f64>) -> Result<ProblemSpec> {
    let mut params = defaults(id)?;
    for (k, v) in overrides {
        match params.get_mut(k) {
            Some(slot) => *slot = *v,
            None => {
                return Err(Error::InvalidArgument(format!(
                    "problem {id} has no constant '{k}'"
                )))
            }
        }
    }
    let p = |k: &str| params[k];
    let zero = || Dual::constant(0.0);

    let mut spec = ProblemSpec {
        id: id.to_string(),
        family: "",
        in_dim: 1,
        out_dim: 1,
        domain: vec![],
        axis_names: vec!["x"],
        output_names: vec!["y"],
        residual: point_fn(move |_, _| eqs(&[zero()])),
        residual_count: 1,
        residual_order: 1,
        conditions: vec![],
        weights: Weights::default(),
        points_per_axis: POINTS,
        data: None,
        oracle: OracleKind::ClosedForm,
        params: BTreeMap::new(),
    };

    match id {
        "linear_ode" => {
            spec.family = "linear_ode";
            spec.domain = vec![(-1.0, 1.0)];
            spec.residual = point_fn(|o, x| eqs(&[o[0].d(0) - 3.0 * x[0] * x[0]]));
            spec.conditions = vec![cond(
                "y(0) = 1",
                Component::Ic,
                Locus::Point(vec![0.0]),
                1,
                0,
                |o, _| eqs(&[o[0].val() - 1.0]),
            )];
            spec.weights.bc = 0.0;
        }
        "coupled_simple" => {
            spec.family = "coupled_simple";
            spec.domain = vec![(0.0, 2.0 * PI)];
            spec.out_dim = 2;
            spec.output_names = vec!["u", "v"];
            spec.residual_count = 2;
            spec.residual = point_fn(|o, _| {
                let (u, v) = (&o[0], &o[1]);
                eqs(&[u.d(0) + v.val(), v.d(0) - u.val()])
            });
            spec.conditions = vec![cond(
                "u(0) = 1, v(0) = 0",
                Component::Ic,
                Locus::Point(vec![0.0]),
                2,
                0,
                |o, _| eqs(&[o[0].val() - 1.0, o[1].val()]),
            )];
        }
        "coupled_linear_bvp" => {
            spec.family = "coupled_linear_bvp";
            spec.domain = vec![(0.0, 1.0)];
            spec.out_dim = 2;
            spec.output_names = vec!["u", "v"];
            spec.residual_count = 2;
            spec.residual_order = 2;
            spec.residual = point_fn(|o, xs| {
                let x = xs[0];
                let (u, v) = (&o[0], &o[1]);
                let u1 = x * x * x + x * x + 2.0 + 2.0 * x.cos();
                let u2 = x * x + x + x.sin();
                eqs(&[
                    u.dd(0, 0) + x * u.val() + 2.0 * v.d(0) - u1,
                    u.val() + v.dd(0, 0) + 2.0 * v.val() - u2,
                ])
            });
            let c1 = 1f64.cos() + 1f64.sin();
            spec.conditions = vec![
                cond("u(0) = 0", Component::Bc, Locus::Point(vec![0.0]), 1, 0, |o, _| {
                    eqs(&[o[0].val()])
                }),
                cond(
                    "v'(1) + v(1) = cos 1 + sin 1",
                    Component::Bc,
                    Locus::Point(vec![1.0]),
                    1,
                    1,
                    move |o, _| eqs(&[o[1].d(0) + o[1].val() - c1]),
                ),
                cond("u(1) = 2", Component::Bc, Locus::Point(vec![1.0]), 1, 0, |o, _| {
                    eqs(&[o[0].val() - 2.0])
                }),
                cond("v'(0) = 1", Component::Bc, Locus::Point(vec![0.0]), 1, 1, |o, _| {
                    eqs(&[o[1].d(0) - 1.0])
                }),
            ];
        }
        "coupled_nonlinear_bvp" => {
            spec.family = "coupled_nonlinear_bvp";
            spec.domain = vec![(0.0, 1.0)];
            spec.out_dim = 2;
            spec.output_names = vec!["u", "v"];
            spec.residual_count = 2;
            spec.residual_order = 2;
            spec.residual = point_fn(|o, xs| {
                let x = xs[0];
                let (u, v) = (&o[0], &o[1]);
                let spx = (PI * x).sin();
                let u3 = 2.0 * x * spx + x.powi(5) - 2.0 * x.powi(4) + x * x - 2.0;
                let u4 = x.powi(3) * (1.0 - x) + spx * (1.0 + x.sin() * spx) + PI * (PI * x).cos();
                let (uv, vv) = (u.val(), v.val());
                eqs(&[
                    u.dd(0, 0) + x * uv + 2.0 * x * vv + x * uv.square() - u3,
                    x * x * uv + v.d(0) + vv + x.sin() * vv.square() - u4,
                ])
            });
            spec.conditions = vec![
                cond(
                    "u(0) = v(0) = 0",
                    Component::Bc,
                    Locus::Point(vec![0.0]),
                    2,
                    0,
                    |o, _| eqs(&[o[0].val(), o[1].val()]),
                ),
                cond(
                    "u(1) = v(1) = 0",
                    Component::Bc,
                    Locus::Point(vec![1.0]),
                    2,
                    0,
                    |o, _| eqs(&[o[0].val(), o[1].val()]),
                ),
            ];
        }
        "lorenz" => {
            spec.family = "lorenz";
            spec.domain = vec![(0.0, 20.0)];
            spec.axis_names = vec!["t"];
            spec.out_dim = 3;
            spec.output_names = vec!["x", "y", "z"];
            spec.residual_count = 3;
            spec.oracle = OracleKind::Rk4;
            let (sigma, rho, beta) = (p("sigma"), p("rho"), p("beta"));
            spec.residual = point_fn(move |o, _| {
                let (x, y, z) = (o[0].val(), o[1].val(), o[2].val());
                eqs(&[
                    o[0].d(0) - sigma * (y - x),
                    o[1].d(0) - (x * (z * -1.0 + rho) - y),
                    o[2].d(0) - (x * y - beta * z),
                ])
            });
            spec.conditions = vec![cond(
                "x(0) = y(0) = z(0) = 1",
                Component::Ic,
                Locus::Point(vec![0.0]),
                3,
                0,
                |o, _| eqs(&[o[0].val() - 1.0, o[1].val() - 1.0, o[2].val() - 1.0]),
            )];
        }
        "shm" | "pendulum" => {
            spec.family = if id == "shm" { "shm" } else { "pendulum" };
            spec.domain = vec![(0.0, 1.0)];
            spec.axis_names = vec!["t"];
            spec.residual_order = 2;
            let w2 = p("omega0") * p("omega0");
            spec.residual = if id == "shm" {
                point_fn(move |o, _| eqs(&[o[0].dd(0, 0) + w2 * o[0].val()]))
            } else {
                spec.oracle = OracleKind::Rk4;
                point_fn(move |o, _| eqs(&[o[0].dd(0, 0) + w2 * o[0].val().sin()]))
            };
            let (y0, v0) = (p("y0"), p("v0"));
            spec.conditions = vec![cond(
                "y(0) = y0, y'(0) = v0",
                Component::Ic,
                Locus::Point(vec![0.0]),
                2,
                1,
                move |o, _| eqs(&[o[0].val() - y0, o[0].d(0) - v0]),
            )];
        }
        "mathieu_a3b1.2" | "mathieu_a2b1" | "mathieu_a0.25b0.05" => {
            spec.family = "mathieu";
            spec.domain = vec![(0.0, 10.0)];
            spec.axis_names = vec!["t"];
            spec.residual_order = 2;
            let (a, beta) = (p("a"), p("beta"));
            // The β = 0 case has a closed form; keep RK4 otherwise.
            spec.oracle = if beta == 0.0 && a > 0.0 {
                OracleKind::ClosedForm
            } else {
                OracleKind::Rk4
            };
            spec.residual =
                point_fn(move |o, t| eqs(&[o[0].dd(0, 0) + (a + beta * t[0].cos()) * o[0].val()]));
            spec.conditions = vec![cond(
                "y(0) = 1, y'(0) = 0",
                Component::Ic,
                Locus::Point(vec![0.0]),
                2,
                1,
                |o, _| eqs(&[o[0].val() - 1.0, o[0].d(0)]),
            )];
        }
        "vdp_f1" | "vdp_f1.7" => {
            spec.family = "vdp";
            spec.domain = vec![(0.0, 20.0)];
            spec.axis_names = vec!["t"];
            spec.residual_order = 2;
            spec.oracle = OracleKind::Rk4;
            let (c0, eps, wn, c1, alpha, w, f0, f1) = (
                p("c0"),
                p("eps"),
                p("omega_n"),
                p("c1"),
                p("alpha"),
                p("omega"),
                p("f0"),
                p("f1"),
            );
            spec.residual = point_fn(move |o, ts| {
                let t = ts[0];
                let y = o[0].val();
                let damping = (y.square() * alpha + (c0 + c1 * (w * t).cos())) * eps;
                eqs(&[o[0].dd(0, 0) + damping * o[0].d(0) + wn * wn * y
                    - (f0 + f1 * (w * t).sin())])
            });
            spec.conditions = vec![cond(
                "y(0) = 0, y'(0) = 2",
                Component::Ic,
                Locus::Point(vec![0.0]),
                2,
                1,
                |o, _| eqs(&[o[0].val(), o[0].d(0) - 2.0]),
            )];
        }
        "burgers" => {
            spec.family = "burgers";
            spec.in_dim = 2;
            spec.domain = vec![(0.0, 1.0), (0.0, 1.0)];
            spec.axis_names = vec!["x", "t"];
            spec.output_names = vec!["u"];
            spec.residual_order = 2;
            spec.oracle = OracleKind::Mol;
            spec.data = Some(DataConfig { fraction: 0.10 });
            let nu = p("nu");
            spec.residual = point_fn(move |o, _| {
                let u = &o[0];
                eqs(&[u.d(1) + u.val() * u.d(0) - u.dd(0, 0) * nu])
            });
            spec.conditions = vec![
                cond(
                    "u(x, 0) = sin(pi x)",
                    Component::Ic,
                    Locus::Line { axis: 1, value: 0.0 },
                    1,
                    0,
                    |o, x| eqs(&[o[0].val() - (PI * x[0]).sin()]),
                ),
                cond(
                    "u(0, t) = 0",
                    Component::Bc,
                    Locus::Line { axis: 0, value: 0.0 },
                    1,
                    0,
                    |o, _| eqs(&[o[0].val()]),
                ),
                cond(
                    "u(1, t) = 0",
                    Component::Bc,
                    Locus::Line { axis: 0, value: 1.0 },
                    1,
                    0,
                    |o, _| eqs(&[o[0].val()]),
                ),
            ];
        }
        "allen_cahn_1" | "allen_cahn_2" => {
            let first = id == "allen_cahn_1";
            spec.family = "allen_cahn";
            spec.in_dim = 2;
            spec.domain = vec![(-1.0, 1.0), (0.0, 1.0)];
            spec.axis_names = vec!["x", "t"];
            spec.output_names = vec!["u"];
            spec.residual_order = 2;
            spec.oracle = OracleKind::Mol;
            if !first {
                spec.data = Some(DataConfig { fraction: 0.10 });
            }
            let (nu, k) = (p("nu"), p("reaction"));
            spec.residual = point_fn(move |o, _| {
                let u = &o[0];
                let v = u.val();
                eqs(&[u.d(1) + (v * v * v - v) * k - u.dd(0, 0) * nu])
            });
            let ic = if first {
                cond(
                    "u(x, 0) = 0.53 x + 0.47 sin(-1.5 pi x)",
                    Component::Ic,
                    Locus::Line { axis: 1, value: 0.0 },
                    1,
                    0,
                    |o, x| eqs(&[o[0].val() - allen_cahn_ic(1, x[0])]),
                )
            } else {
                cond(
                    "u(x, 0) = x^2 cos(pi x)",
                    Component::Ic,
                    Locus::Line { axis: 1, value: 0.0 },
                    1,
                    0,
                    |o, x| eqs(&[o[0].val() - allen_cahn_ic(2, x[0])]),
                )
            };
            spec.conditions = vec![
                ic,
                cond(
                    "u(1, t) = 1",
                    Component::Bc,
                    Locus::Line { axis: 0, value: 1.0 },
                    1,
                    0,
                    |o, _| eqs(&[o[0].val() - 1.0]),
                ),
                cond(
                    "u(-1, t) = -1",
                    Component::Bc,
                    Locus::Line { axis: 0, value: -1.0 },
                    1,
                    0,
                    |o, _| eqs(&[o[0].val() + 1.0]),
                ),
            ];
        }
        _ => unreachable!("defaults() rejected unknown ids"),
    }
    spec.params = params;
    spec.validate()?;
    Ok(spec)
}

/// Initial field of Allen-Cahn case 1 or 2.
pub fn allen_cahn_ic(case: u8, x: f64) -> f64 {
    if case == 1 {
        0.53 * x + 0.47 * (-1.5 * PI * x).sin()
    } else {
        x * x * (PI * x).cos()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_id_builds() {
        for id in PROBLEM_IDS {
            let spec = make_problem(id).unwrap();
            assert_eq!(spec.id, id);
            assert_eq!(spec.points_per_axis, 100);
            assert_eq!(spec.data.is_some(), id == "burgers" || id == "allen_cahn_2");
        }
        assert!(matches!(make_problem("heat"), Err(Error::UnknownProblem(_))));
    }

    #[test]
    fn paper_constants() {
        let lin = make_problem("linear_ode").unwrap();
        assert_eq!(lin.domain, vec![(-1.0, 1.0)]);
        assert_eq!(lin.weights.r, 1.0);
        assert_eq!(lin.weights.ic, 1.0);
        assert_eq!(lin.weights.bc, 0.0);
        assert_eq!(make_problem("burgers").unwrap().data.unwrap().fraction, 0.10);
        let shm = make_problem("shm").unwrap();
        assert_eq!(shm.domain, vec![(0.0, 1.0)]);
        assert_eq!(shm.param("omega0"), 25.0);
        let m = make_problem("mathieu_a0.25b0.05").unwrap();
        assert_eq!((m.param("a"), m.param("beta")), (0.25, 0.05));
        assert_eq!(make_problem("vdp_f1.7").unwrap().param("f1"), 1.7);
        assert_eq!(make_problem("allen_cahn_2").unwrap().param("nu"), 1e-4);
    }

    #[test]
    fn overrides() {
        let mut o = BTreeMap::new();
        o.insert("rho".to_string(), 14.0);
        assert_eq!(make_problem_with("lorenz", &o).unwrap().param("rho"), 14.0);
        o.insert("kappa".to_string(), 1.0);
        assert!(make_problem_with("lorenz", &o).is_err());
    }
}
