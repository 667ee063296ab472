//! Method of lines: second-order central differences in space, classical
//! RK4 in time, Dirichlet boundaries.
//!
//! The spatial and temporal step counts are rounded up to multiples of the
//! collocation grid's interval count (and of 4 in time) so the 100×100
//! training grid and the exported time slices fall exactly on solver nodes.

use super::{ReferenceSolution, SolverInfo, TimeSlice, PDE_SLICES};
use crate::error::{Error, Result};
use crate::problems::{allen_cahn_ic, OracleKind, ProblemSpec};

/// Largest time step allowed regardless of the diffusive bound.
const MAX_DT: f64 = 1e-4;
/// Diffusive stability factor: dt ≤ 0.4 dx² / ν.
const DIFFUSIVE: f64 = 0.4;

enum Pde {
    Burgers { nu: f64 },
    AllenCahn { nu: f64, k: f64 },
}

fn round_up(n: usize, m: usize) -> usize {
    n.div_ceil(m).max(1) * m
}

/// Spatial intervals and time steps actually used for requested minimums.
pub fn mol_grid_sizes(spec: &ProblemSpec, nx: usize, nt: Option<usize>) -> Result<(usize, usize)> {
    if nx < 64 {
        return Err(Error::InvalidArgument(format!("nx must be at least 64, got {nx}")));
    }
    let cells = spec.points_per_axis - 1;
    let nx = round_up(nx, cells);
    let (xlo, xhi) = spec.domain[0];
    let (tlo, thi) = spec.domain[1];
    let dx = (xhi - xlo) / nx as f64;
    let nu = spec.param("nu");
    let dt_max = (DIFFUSIVE * dx * dx / nu).min(MAX_DT);
    let needed = ((thi - tlo) / dt_max).ceil() as usize;
    let nt = round_up(nt.unwrap_or(0).max(needed), cells * 4);
    Ok((nx, nt))
}

/// Solve a PDE problem and sample it on the collocation grid (axis 0
/// fastest) and at the time slices in [`PDE_SLICES`].
pub fn mol_solve(spec: &ProblemSpec, nx: usize, nt: Option<usize>) -> Result<ReferenceSolution> {
    let pde = match spec.family {
        "burgers" => Pde::Burgers {
            nu: spec.param("nu"),
        },
        "allen_cahn" => Pde::AllenCahn {
            nu: spec.param("nu"),
            k: spec.param("reaction"),
        },
        _ => {
            return Err(Error::InvalidArgument(format!(
                "no method-of-lines solver for {}",
                spec.id
            )))
        }
    };
    let (nx, nt) = mol_grid_sizes(spec, nx, nt)?;
    let (xlo, xhi) = spec.domain[0];
    let (tlo, thi) = spec.domain[1];
    let dx = (xhi - xlo) / nx as f64;
    let dt = (thi - tlo) / nt as f64;
    let x: Vec<f64> = (0..=nx)
        .map(|i| if i == nx { xhi } else { xlo + i as f64 * dx })
        .collect();

    let (mut u, left, right) = match (&pde, spec.id.as_str()) {
        (Pde::Burgers { .. }, _) => (
            x.iter().map(|&xi| (std::f64::consts::PI * xi).sin()).collect::<Vec<_>>(),
            0.0,
            0.0,
        ),
        (Pde::AllenCahn { .. }, id) => {
            let case = if id == "allen_cahn_1" { 1 } else { 2 };
            (x.iter().map(|&xi| allen_cahn_ic(case, xi)).collect(), -1.0, 1.0)
        }
    };

    let cells = spec.points_per_axis - 1;
    let x_stride = nx / cells;
    let t_stride = nt / cells;
    let slice_steps: Vec<usize> = PDE_SLICES
        .iter()
        .map(|s| ((s - tlo) / (thi - tlo) * nt as f64).round() as usize)
        .collect();
    let grid_x = spec.axis_grid(0);
    let grid_t = spec.axis_grid(1);
    let n_grid = spec.points_per_axis;
    let mut coords = Vec::with_capacity(2 * n_grid * n_grid);
    let mut field = Vec::with_capacity(n_grid * n_grid);
    let mut slices = Vec::new();
    let mut sample = |step: usize, u: &[f64], coords: &mut Vec<f64>, field: &mut Vec<f64>| {
        if step % t_stride == 0 {
            let ti = grid_t[step / t_stride];
            for j in 0..=cells {
                coords.push(grid_x[j]);
                coords.push(ti);
                field.push(u[j * x_stride]);
            }
        }
        if let Some(k) = slice_steps.iter().position(|&s| s == step) {
            slices.push(TimeSlice {
                t: PDE_SLICES[k],
                x: grid_x.clone(),
                values: vec![(0..=cells).map(|j| u[j * x_stride]).collect()],
            });
        }
    };
    sample(0, &u, &mut coords, &mut field);

    // Boundary values hold for t > 0 even where the initial field disagrees.
    u[0] = left;
    u[nx] = right;

    let rhs = |u: &[f64], du: &mut [f64]| {
        let inv_dx2 = 1.0 / (dx * dx);
        let inv_2dx = 0.5 / dx;
        du[0] = 0.0;
        du[nx] = 0.0;
        match pde {
            Pde::Burgers { nu } => {
                for i in 1..nx {
                    let ux = (u[i + 1] - u[i - 1]) * inv_2dx;
                    let uxx = (u[i + 1] - 2.0 * u[i] + u[i - 1]) * inv_dx2;
                    du[i] = -u[i] * ux + nu * uxx;
                }
            }
            Pde::AllenCahn { nu, k } => {
                for i in 1..nx {
                    let uxx = (u[i + 1] - 2.0 * u[i] + u[i - 1]) * inv_dx2;
                    du[i] = nu * uxx - k * (u[i] * u[i] * u[i] - u[i]);
                }
            }
        }
    };

    let n = nx + 1;
    let (mut k1, mut k2, mut k3, mut k4, mut tmp) =
        (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    for step in 1..=nt {
        rhs(&u, &mut k1);
        for i in 0..n {
            tmp[i] = u[i] + 0.5 * dt * k1[i];
        }
        rhs(&tmp, &mut k2);
        for i in 0..n {
            tmp[i] = u[i] + 0.5 * dt * k2[i];
        }
        rhs(&tmp, &mut k3);
        for i in 0..n {
            tmp[i] = u[i] + dt * k3[i];
        }
        rhs(&tmp, &mut k4);
        for i in 0..n {
            u[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        if step % 256 == 0 || step == nt {
            if let Some(i) = u.iter().position(|v| !v.is_finite()) {
                return Err(Error::SolverBlowUp {
                    step,
                    detail: format!("non-finite value at x = {}", x[i]),
                });
            }
        }
        sample(step, &u, &mut coords, &mut field);
    }

    Ok(ReferenceSolution {
        method: OracleKind::Mol,
        dim: 2,
        coords,
        values: vec![field],
        info: SolverInfo {
            step: Some(dt),
            n_steps: Some(nt),
            nx: Some(nx),
            nt: Some(nt),
        },
        slices,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::make_problem;

    #[test]
    fn grid_sizes_are_multiples() {
        let spec = make_problem("burgers").unwrap();
        let (nx, nt) = mol_grid_sizes(&spec, 512, None).unwrap();
        assert_eq!(nx, 594);
        assert_eq!(nt % 396, 0);
        let dx = 1.0 / nx as f64;
        assert!(1.0 / nt as f64 <= 0.4 * dx * dx / 0.1);
        assert!(mol_grid_sizes(&spec, 32, None).is_err());
    }

    #[test]
    fn allen_cahn_initial_row_and_boundaries() {
        let spec = make_problem("allen_cahn_1").unwrap();
        let sol = mol_solve(&spec, 64, None).unwrap();
        assert_eq!(sol.len(), 10_000);
        for j in 0..100 {
            let x = sol.point(j)[0];
            assert_eq!(sol.point(j)[1], 0.0);
            assert_eq!(sol.values[0][j], allen_cahn_ic(1, x));
        }
        for i in 1..100 {
            assert_eq!(sol.values[0][i * 100], -1.0);
            assert_eq!(sol.values[0][i * 100 + 99], 1.0);
        }
        assert_eq!(sol.slices.len(), 5);
        assert_eq!(sol.point(9999), &[1.0, 1.0]);
    }
}
