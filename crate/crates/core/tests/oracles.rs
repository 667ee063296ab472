use pikan::diffengine::{Dim, Jet2, JetAdjoint, JetModel};
use pikan::oracle::{self, mol_solve, Resolution};
use pikan::problems::{compute_loss, make_problem, sample_collocation, Component};
use pikan::train::evaluate_fn;

/// The zero function as a model.
struct Zero {
    dim: Dim,
    outputs: usize,
}

impl JetModel for Zero {
    type Tape = ();
    fn input_dim(&self) -> Dim {
        self.dim
    }
    fn output_dim(&self) -> usize {
        self.outputs
    }
    fn forward(&self, _: &[f64], _: &[f64], _: &mut (), out: &mut Vec<Jet2>) -> pikan::Result<()> {
        *out = vec![Jet2::constant(0.0, self.dim); self.outputs];
        Ok(())
    }
    fn backward(&self, _: &[f64], _: &mut (), _: &[JetAdjoint], _: &mut [f64]) {}
}

#[test]
fn zero_network_loss_on_the_linear_ode() {
    let spec = make_problem("linear_ode").unwrap();
    let colloc = sample_collocation(&spec, 0).unwrap();
    let loss = compute_loss(&spec, &Zero { dim: Dim::One, outputs: 1 }, &[], &colloc).unwrap();
    // Residual 0 − 3x² on 100 equally spaced points, IC deviation 0 − 1.
    let l_r: f64 = (0..100)
        .map(|i| {
            let x = -1.0 + 2.0 * i as f64 / 99.0;
            (3.0 * x * x).powi(2)
        })
        .sum::<f64>()
        / 100.0;
    assert!((loss.l_r - l_r).abs() < 1e-12);
    assert_eq!(loss.l_ic, 1.0);
    assert_eq!(loss.l_bc, 0.0);
    assert!((loss.total - (l_r + 1.0)).abs() < 1e-12);
    // Same sum evaluated with numpy.
    assert!((loss.total - 2.873_212_071_742_834).abs() < 1e-12, "total {}", loss.total);
}

#[test]
fn burgers_training_points() {
    let spec = make_problem("burgers").unwrap();
    let colloc = sample_collocation(&spec, 0).unwrap();
    assert_eq!(colloc.residual.len(), 10_000);
    let ic = colloc.ic_points(&spec);
    assert_eq!(ic.len(), 100);
    assert!(ic.iter().all(|p| p[1] == 0.0));
    assert_eq!(colloc.bc_points(&spec).len(), 200);
    assert_eq!(colloc.data.len(), 1000);
    let weights = spec.weights;
    assert_eq!([weights.r, weights.ic, weights.bc, weights.data], [1.0; 4]);

    // With unit weights the total is the plain sum of the components.
    let loss = compute_loss(&spec, &Zero { dim: Dim::Two, outputs: 1 }, &[], &colloc).unwrap();
    assert_eq!(loss.total, loss.l_r + loss.l_ic + loss.l_bc + loss.l_data);
    assert_eq!(loss.l_r, 0.0);
    assert_eq!(loss.l_bc, 0.0);
    // Mean of sin²(πx) over the 100 grid points.
    let ic_mean: f64 = (0..100)
        .map(|i| (std::f64::consts::PI * i as f64 / 99.0).sin().powi(2))
        .sum::<f64>()
        / 100.0;
    assert!((loss.l_ic - ic_mean).abs() < 1e-14);
}

#[test]
fn linear_ode_setup() {
    let spec = make_problem("linear_ode").unwrap();
    assert_eq!(spec.domain, vec![(-1.0, 1.0)]);
    assert_eq!(spec.weights.bc, 0.0);
    assert_eq!(spec.weights.r, 1.0);
    assert_eq!(spec.weights.ic, 1.0);
    let colloc = sample_collocation(&spec, 0).unwrap();
    assert_eq!(colloc.residual.len(), 100);
    assert_eq!(colloc.residual[0], vec![-1.0]);
    assert_eq!(colloc.residual[1], vec![-1.0 + 2.0 / 99.0]);
    assert_eq!(colloc.residual[99], vec![1.0]);
    assert!(spec
        .conditions
        .iter()
        .any(|c| c.component == Component::Ic));
}

#[test]
fn burgers_oracle_is_second_order_in_space() {
    let spec = make_problem("burgers").unwrap();
    let at_half = |nx: usize| {
        let r = mol_solve(&spec, nx, None).unwrap();
        r.slices.iter().find(|s| s.t == 0.5).unwrap().values[0].clone()
    };
    let (a, b, c) = (at_half(256), at_half(512), at_half(1024));
    let dist = |p: &[f64], q: &[f64]| p.iter().zip(q).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let ratio = dist(&a, &b) / dist(&b, &c);
    assert!((2.0..=6.0).contains(&ratio), "ratio {ratio}");
}

#[test]
fn burgers_oracle_keeps_dirichlet_boundaries() {
    let spec = make_problem("burgers").unwrap();
    let r = oracle::reference_solution(&spec, &Resolution::default()).unwrap();
    for i in 0..r.len() {
        let p = r.point(i);
        if p[0] == 0.0 || p[0] == 1.0 {
            assert!(r.values[0][i].abs() < 1e-15, "u({}, {}) = {}", p[0], p[1], r.values[0][i]);
        }
    }
    let u0: Vec<f64> = r.slices[0].values[0].clone();
    let x = &r.slices[0].x;
    for (u, x) in u0.iter().zip(x) {
        assert!((u - (std::f64::consts::PI * x).sin()).abs() < 1e-15);
    }
}

#[test]
fn closed_form_landmarks() {
    let lin = make_problem("coupled_linear_bvp").unwrap();
    let r = oracle::reference_solution(&lin, &Resolution::default()).unwrap();
    let last = r.len() - 1;
    assert_eq!(r.point(last), [1.0]);
    assert!((r.values[0][last] - 2.0).abs() < 1e-15);
    let shm = make_problem("shm").unwrap();
    let r = oracle::reference_solution(&shm, &Resolution::default()).unwrap();
    assert_eq!(r.values[0][0], 0.1);
    assert_eq!(r.info.n_steps, None);
    let jets = oracle::closed_form_jets(&shm, 0.0).unwrap();
    assert!((jets[0].d(0) - 40.0).abs() < 1e-12);
}

#[test]
fn evaluation_examples() {
    let spec = make_problem("coupled_simple").unwrap();
    let r = oracle::reference_solution(&spec, &Resolution::default()).unwrap();
    let exact = evaluate_fn(|x| Ok(vec![x[0].cos(), x[0].sin()]), &r).unwrap();
    assert!(exact.relative_l2.iter().all(|&e| e < 1e-15));
    let scaled = evaluate_fn(|x| Ok(vec![1.01 * x[0].cos(), 1.01 * x[0].sin()]), &r).unwrap();
    for e in scaled.relative_l2 {
        assert!((e - 0.01).abs() < 1e-12);
    }
    let zero = evaluate_fn(|_| Ok(vec![0.0, 0.0]), &r).unwrap();
    assert_eq!(zero.relative_l2, vec![1.0, 1.0]);
    assert!(evaluate_fn(|_| Ok(vec![0.0]), &r).is_err());
}

/// Jets built from the RK4 vector field itself must make the training
/// residual vanish: the residual and the oracle are written separately.
#[test]
fn rk4_fields_agree_with_the_residuals() {
    use pikan::problems::{condition_eval, residual_eval};
    let ids = [
        "coupled_simple",
        "lorenz",
        "pendulum",
        "mathieu_a3b1.2",
        "mathieu_a2b1",
        "mathieu_a0.25b0.05",
        "vdp_f1",
        "vdp_f1.7",
    ];
    for id in ids {
        let spec = make_problem(id).unwrap();
        let sys = oracle::ivp_system(&spec).unwrap();
        let (lo, hi) = spec.domain[0];
        let traj = oracle::rk4_solve(|t, y, dy| (sys.field)(t, y, dy), &sys.y0, (lo, hi), 2000).unwrap();
        let second_order = spec.residual_order == 2;
        let mut worst = 0.0f64;
        for i in (0..traj.len()).step_by(7) {
            let t = traj.point(i)[0];
            let y = traj.at(i);
            let mut dy = vec![0.0; y.len()];
            (sys.field)(t, &y, &mut dy);
            let outputs: Vec<Jet2> = if second_order {
                vec![Jet2::from_parts(y[0], [y[1], 0.0], [dy[1], 0.0, 0.0], Dim::One)]
            } else {
                (0..y.len())
                    .map(|o| Jet2::from_parts(y[o], [dy[o], 0.0], [0.0; 3], Dim::One))
                    .collect()
            };
            for r in residual_eval(&spec, &outputs, &[t]).unwrap() {
                worst = worst.max(r.abs());
            }
            if i == 0 {
                for c in &spec.conditions {
                    for v in condition_eval(c, &outputs, &[t]) {
                        assert!(v.abs() < 1e-15, "{id} {}: {v}", c.name);
                    }
                }
            }
        }
        assert!(worst < 1e-10, "{id}: residual {worst}");
    }
}
