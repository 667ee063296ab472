use super::{ReferenceSolution, SolverInfo};
use crate::error::{Error, Result};
use crate::problems::{OracleKind, ProblemSpec};

/// Classical fixed-step RK4 for `y' = f(t, y)` from `t_span.0` to
/// `t_span.1`. The result holds every step (n_steps + 1 points).
pub fn rk4_solve(
    f: impl Fn(f64, &[f64], &mut [f64]),
    y0: &[f64],
    t_span: (f64, f64),
    n_steps: usize,
) -> Result<ReferenceSolution> {
    if n_steps == 0 {
        return Err(Error::InvalidArgument("rk4 needs at least one step".into()));
    }
    let n = y0.len();
    let (t0, t1) = t_span;
    let h = (t1 - t0) / n_steps as f64;
    let mut coords = Vec::with_capacity(n_steps + 1);
    let mut values = vec![Vec::with_capacity(n_steps + 1); n];
    let mut y = y0.to_vec();
    let (mut k1, mut k2, mut k3, mut k4, mut tmp) =
        (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    let record = |t: f64, y: &[f64], coords: &mut Vec<f64>, values: &mut Vec<Vec<f64>>| {
        coords.push(t);
        for (v, yi) in values.iter_mut().zip(y) {
            v.push(*yi);
        }
    };
    record(t0, &y, &mut coords, &mut values);
    for step in 0..n_steps {
        let t = t0 + step as f64 * h;
        f(t, &y, &mut k1);
        for i in 0..n {
            tmp[i] = y[i] + 0.5 * h * k1[i];
        }
        f(t + 0.5 * h, &tmp, &mut k2);
        for i in 0..n {
            tmp[i] = y[i] + 0.5 * h * k2[i];
        }
        f(t + 0.5 * h, &tmp, &mut k3);
        for i in 0..n {
            tmp[i] = y[i] + h * k3[i];
        }
        f(t + h, &tmp, &mut k4);
        for i in 0..n {
            y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::SolverBlowUp {
                step: step + 1,
                detail: format!("non-finite state at t = {}", t + h),
            });
        }
        let t_next = if step + 1 == n_steps { t1 } else { t0 + (step + 1) as f64 * h };
        record(t_next, &y, &mut coords, &mut values);
    }
    Ok(ReferenceSolution {
        method: OracleKind::Rk4,
        dim: 1,
        coords,
        values,
        info: SolverInfo {
            step: Some(h),
            n_steps: Some(n_steps),
            ..SolverInfo::default()
        },
        slices: Vec::new(),
    })
}

pub type Field = Box<dyn Fn(f64, &[f64], &mut [f64]) + Send + Sync>;

/// A problem rewritten as a first-order system; the problem's outputs are
/// the leading state entries.
pub struct IvpSystem {
    pub y0: Vec<f64>,
    pub field: Field,
}

/// First-order form of an initial value problem posed at the left end of
/// its domain.
pub fn ivp_system(spec: &ProblemSpec) -> Result<IvpSystem> {
    let p = |k: &str| spec.param(k);
    Ok(match spec.family {
        "coupled_simple" => IvpSystem {
            y0: vec![1.0, 0.0],
            field: Box::new(|_, y, dy| {
                dy[0] = -y[1];
                dy[1] = y[0];
            }),
        },
        "lorenz" => {
            let (s, r, b) = (p("sigma"), p("rho"), p("beta"));
            IvpSystem {
                y0: vec![1.0, 1.0, 1.0],
                field: Box::new(move |_, y, dy| {
                    dy[0] = s * (y[1] - y[0]);
                    dy[1] = y[0] * (r - y[2]) - y[1];
                    dy[2] = y[0] * y[1] - b * y[2];
                }),
            }
        }
        "shm" | "pendulum" => {
            let w2 = p("omega0") * p("omega0");
            let nonlinear = spec.family == "pendulum";
            IvpSystem {
                y0: vec![p("y0"), p("v0")],
                field: Box::new(move |_, y, dy| {
                    dy[0] = y[1];
                    dy[1] = -w2 * if nonlinear { y[0].sin() } else { y[0] };
                }),
            }
        }
        "mathieu" => {
            let (a, beta) = (p("a"), p("beta"));
            IvpSystem {
                y0: vec![1.0, 0.0],
                field: Box::new(move |t, y, dy| {
                    dy[0] = y[1];
                    dy[1] = -(a + beta * t.cos()) * y[0];
                }),
            }
        }
        "vdp" => {
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
            IvpSystem {
                y0: vec![0.0, 2.0],
                field: Box::new(move |t, y, dy| {
                    dy[0] = y[1];
                    dy[1] = f0 + f1 * (w * t).sin()
                        - eps * (c0 + c1 * (w * t).cos() + alpha * y[0] * y[0]) * y[1]
                        - wn * wn * y[0];
                }),
            }
        }
        _ => {
            return Err(Error::InvalidArgument(format!(
                "problem {} is not an initial value problem at the left end",
                spec.id
            )))
        }
    })
}
