use std::f64::consts::PI;

use super::{ReferenceSolution, SolverInfo};
use crate::diffengine::{Dim, Jet2, JetAdjoint, JetModel};
use crate::error::{Error, Result};
use crate::problems::{OracleKind, ProblemSpec};

fn jet(v: f64, d1: f64, d2: f64) -> Jet2 {
    Jet2::from_parts(v, [d1, 0.0], [d2, 0.0, 0.0], Dim::One)
}

fn sin_jet(w: f64, x: f64) -> Jet2 {
    let (s, c) = (w * x).sin_cos();
    jet(s, w * c, -w * w * s)
}

fn cos_jet(w: f64, x: f64) -> Jet2 {
    let (s, c) = (w * x).sin_cos();
    jet(c, -w * s, -w * w * c)
}

/// Exact solution jets (value, first and second derivative) at `x`.
pub fn closed_form_jets(spec: &ProblemSpec, x: f64) -> Result<Vec<Jet2>> {
    let none = || Error::NoClosedForm(spec.id.clone());
    Ok(match spec.family {
        "linear_ode" => vec![jet(x * x * x + 1.0, 3.0 * x * x, 6.0 * x)],
        "coupled_simple" => vec![cos_jet(1.0, x), sin_jet(1.0, x)],
        "coupled_linear_bvp" => vec![jet(x * x + x, 2.0 * x + 1.0, 2.0), sin_jet(1.0, x)],
        "coupled_nonlinear_bvp" => vec![jet(x - x * x, 1.0 - 2.0 * x, -2.0), sin_jet(PI, x)],
        "shm" => {
            let w = spec.param("omega0");
            let (y0, v0) = (spec.param("y0"), spec.param("v0"));
            vec![cos_jet(w, x).scale(y0) + sin_jet(w, x).scale(v0 / w)]
        }
        "mathieu" if spec.param("beta") == 0.0 && spec.param("a") > 0.0 => {
            vec![cos_jet(spec.param("a").sqrt(), x)]
        }
        _ => return Err(none()),
    })
}

/// Exact solution values at one-dimensional `coords`.
pub fn closed_form(spec: &ProblemSpec, coords: &[f64]) -> Result<ReferenceSolution> {
    if spec.in_dim != 1 {
        return Err(Error::NoClosedForm(spec.id.clone()));
    }
    let mut values = vec![Vec::with_capacity(coords.len()); spec.out_dim];
    for &x in coords {
        for (o, j) in closed_form_jets(spec, x)?.into_iter().enumerate() {
            values[o].push(j.value);
        }
    }
    Ok(ReferenceSolution {
        method: OracleKind::ClosedForm,
        dim: 1,
        coords: coords.to_vec(),
        values,
        info: SolverInfo::default(),
        slices: Vec::new(),
    })
}

/// The exact solution of a closed-form problem viewed as a model without
/// parameters, so it can be scored by the same loss as a network.
pub struct ClosedFormModel<'a> {
    pub spec: &'a ProblemSpec,
}

impl JetModel for ClosedFormModel<'_> {
    type Tape = ();

    fn input_dim(&self) -> Dim {
        Dim::One
    }

    fn output_dim(&self) -> usize {
        self.spec.out_dim
    }

    fn forward(&self, _params: &[f64], x: &[f64], _tape: &mut (), out: &mut Vec<Jet2>) -> Result<()> {
        *out = closed_form_jets(self.spec, x[0])?;
        Ok(())
    }

    fn backward(&self, _params: &[f64], _tape: &mut (), _adjoint: &[JetAdjoint], _grads: &mut [f64]) {}
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::make_problem;

    #[test]
    fn landmark_values() {
        let lin = make_problem("linear_ode").unwrap();
        assert_eq!(closed_form(&lin, &[1.0]).unwrap().values[0][0], 2.0);
        let bvp = make_problem("coupled_linear_bvp").unwrap();
        assert_eq!(closed_form_jets(&bvp, 1.0).unwrap()[0].value, 2.0);
        let shm = make_problem("shm").unwrap();
        let j = &closed_form_jets(&shm, 0.0).unwrap()[0];
        assert_eq!(j.value, 0.1);
        assert_eq!(j.d(0), 40.0);
        assert!(closed_form(&make_problem("lorenz").unwrap(), &[0.0]).is_err());
        assert!(closed_form(&make_problem("burgers").unwrap(), &[0.0]).is_err());
    }
}
