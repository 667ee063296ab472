//! Spline and wavelet edge layers with jet forward passes and exact reverse
//! sweeps.
//!
//! Every edge applies a univariate φ to one input jet. With φ_r the r-th
//! derivative of φ at the input value, the output jet of an edge is
//!
//! ```text
//! value = φ_0,  grad_a = φ_1 g_a,  hess_ab = φ_2 g_a g_b + φ_1 h_ab
//! ```
//!
//! and nodes sum their incoming edges. The reverse sweep therefore needs
//! ∂φ_r/∂θ for r = 0..2 and φ_3 for the input adjoint.

use crate::diffengine::{Dim, Jet2, JetAdjoint, ParamKind, ParamSlot, ParameterBlock};

use super::activation::{BaseActivation, Mother};
use super::bspline::{basis_count, local_basis, uniform_knots, LocalBasis};

/// Lower bound on |scale| for wavelet edges.
pub const MIN_SCALE: f64 = 1e-3;

/// Products g_a g_b in packed Hessian order.
#[inline]
fn grad_products(x: &Jet2) -> [f64; 3] {
    let g = x.grad;
    [g[0] * g[0], g[0] * g[1], g[1] * g[1]]
}

#[inline]
fn push_edge(out: &mut Jet2, x: &Jet2, gg: &[f64; 3], phi: &[f64; 4]) {
    out.value += phi[0];
    out.grad[0] += phi[1] * x.grad[0];
    out.grad[1] += phi[1] * x.grad[1];
    for s in 0..3 {
        out.hess[s] += phi[2] * gg[s] + phi[1] * x.hess[s];
    }
}

/// Adjoints of (φ_0, φ_1, φ_2) for one edge.
#[inline]
fn phi_adjoint(oadj: &JetAdjoint, x: &Jet2, gg: &[f64; 3]) -> [f64; 3] {
    let a1 = oadj.grad[0] * x.grad[0]
        + oadj.grad[1] * x.grad[1]
        + oadj.hess[0] * x.hess[0]
        + oadj.hess[1] * x.hess[1]
        + oadj.hess[2] * x.hess[2];
    let a2 = oadj.hess[0] * gg[0] + oadj.hess[1] * gg[1] + oadj.hess[2] * gg[2];
    [oadj.value, a1, a2]
}

#[inline]
fn push_input_adjoint(
    iadj: &mut JetAdjoint,
    oadj: &JetAdjoint,
    x: &Jet2,
    phi: &[f64; 4],
    abar: &[f64; 3],
) {
    iadj.value += abar[0] * phi[1] + abar[1] * phi[2] + abar[2] * phi[3];
    let g = x.grad;
    let h = oadj.hess;
    iadj.grad[0] += oadj.grad[0] * phi[1] + phi[2] * (2.0 * h[0] * g[0] + h[1] * g[1]);
    iadj.grad[1] += oadj.grad[1] * phi[1] + phi[2] * (h[1] * g[0] + 2.0 * h[2] * g[1]);
    for s in 0..3 {
        iadj.hess[s] += oadj.hess[s] * phi[1];
    }
}

/// Per-point record of one layer's forward pass.
#[derive(Clone, Debug, Default)]
pub struct LayerTape {
    pub inputs: Vec<Jet2>,
    gg: Vec<[f64; 3]>,
    basis: Vec<Option<LocalBasis>>,
    base: Vec<[f64; 4]>,
    /// Spline edges: Σ c B^(r) for r = 0..3. Wavelet edges: ψ^(r)(u) for
    /// r = 0..3 followed by u.
    edge: Vec<[f64; 5]>,
}

impl LayerTape {
    fn begin(&mut self, inputs: &[Jet2]) {
        self.inputs.clear();
        self.inputs.extend_from_slice(inputs);
        self.gg.clear();
        self.gg.extend(inputs.iter().map(grad_products));
    }
}

/// B-spline edges φ(x) = w_b σ(x) + w_s Σ_i c_i B_{i,k}(x).
#[derive(Clone, Debug, PartialEq)]
pub struct SplineEdgeLayer {
    pub in_dim: usize,
    pub out_dim: usize,
    pub order: usize,
    pub grid_size: usize,
    pub knots: Vec<f64>,
    pub base: BaseActivation,
    pub coeff_slot: ParamSlot,
    pub base_weight_slot: ParamSlot,
    pub spline_weight_slot: ParamSlot,
}

impl SplineEdgeLayer {
    /// Allocate the layer's tensors in `params` (zero-initialised). Grid on
    /// [−1, 1] with `order` extra cells on each side.
    pub fn allocate(
        params: &mut ParameterBlock,
        layer: usize,
        in_dim: usize,
        out_dim: usize,
        order: usize,
        grid_size: usize,
        base: BaseActivation,
    ) -> Self {
        let nb = grid_size + order;
        let coeff_slot = params.push(layer, ParamKind::SplineCoeff, vec![out_dim, in_dim, nb]);
        let base_weight_slot = params.push(layer, ParamKind::BaseWeight, vec![out_dim, in_dim]);
        let spline_weight_slot = params.push(layer, ParamKind::SplineWeight, vec![out_dim, in_dim]);
        Self {
            in_dim,
            out_dim,
            order,
            grid_size,
            knots: uniform_knots(grid_size, order, -1.0, 1.0),
            base,
            coeff_slot,
            base_weight_slot,
            spline_weight_slot,
        }
    }

    pub fn basis_len(&self) -> usize {
        basis_count(&self.knots, self.order)
    }

    pub fn coeffs<'a>(&self, params: &'a [f64]) -> &'a [f64] {
        &params[self.coeff_slot.range()]
    }

    /// Edge outputs summed per node. Inputs outside the knot span get no
    /// spline contribution; only the base term acts there.
    pub fn forward(&self, params: &[f64], inputs: &[Jet2], tape: &mut LayerTape, out: &mut Vec<Jet2>) {
        debug_assert_eq!(inputs.len(), self.in_dim);
        let dim = inputs[0].dim();
        let nb = self.basis_len();
        tape.begin(inputs);
        tape.basis.clear();
        tape.base.clear();
        for x in inputs {
            tape.basis.push(local_basis(&self.knots, self.order, x.value));
            tape.base.push(self.base.derivs(x.value));
        }
        tape.edge.clear();
        tape.edge.resize(self.out_dim * self.in_dim, [0.0; 5]);

        let coeffs = self.coeffs(params);
        let wb = &params[self.base_weight_slot.range()];
        let ws = &params[self.spline_weight_slot.range()];
        out.clear();
        for o in 0..self.out_dim {
            let mut acc = Jet2::constant(0.0, dim);
            for i in 0..self.in_dim {
                let e = o * self.in_dim + i;
                let mut s = [0.0; 4];
                if let Some(lb) = &tape.basis[i] {
                    let c = &coeffs[e * nb..(e + 1) * nb];
                    for (g, j) in lb.valid(nb) {
                        for (r, sr) in s.iter_mut().enumerate() {
                            *sr += c[g] * lb.ders[r][j];
                        }
                    }
                }
                tape.edge[e][..4].copy_from_slice(&s);
                let sig = &tape.base[i];
                let phi = [
                    wb[e] * sig[0] + ws[e] * s[0],
                    wb[e] * sig[1] + ws[e] * s[1],
                    wb[e] * sig[2] + ws[e] * s[2],
                    0.0,
                ];
                push_edge(&mut acc, &inputs[i], &tape.gg[i], &phi);
            }
            out.push(acc);
        }
    }

    /// Accumulate parameter gradients; fill `in_adj` when given.
    pub fn backward(
        &self,
        params: &[f64],
        tape: &LayerTape,
        out_adj: &[JetAdjoint],
        grads: &mut [f64],
        mut in_adj: Option<&mut Vec<JetAdjoint>>,
    ) {
        let nb = self.basis_len();
        if let Some(adj) = in_adj.as_deref_mut() {
            adj.clear();
            adj.resize(self.in_dim, JetAdjoint::default());
        }
        let wb = &params[self.base_weight_slot.range()];
        let ws = &params[self.spline_weight_slot.range()];
        let (c_off, wb_off, ws_off) = (
            self.coeff_slot.offset,
            self.base_weight_slot.offset,
            self.spline_weight_slot.offset,
        );
        for o in 0..self.out_dim {
            let oadj = &out_adj[o];
            for i in 0..self.in_dim {
                let e = o * self.in_dim + i;
                let x = &tape.inputs[i];
                let abar = phi_adjoint(oadj, x, &tape.gg[i]);
                let sig = &tape.base[i];
                let s = &tape.edge[e];
                grads[wb_off + e] += abar[0] * sig[0] + abar[1] * sig[1] + abar[2] * sig[2];
                grads[ws_off + e] += abar[0] * s[0] + abar[1] * s[1] + abar[2] * s[2];
                if let Some(lb) = &tape.basis[i] {
                    let base = c_off + e * nb;
                    for (g, j) in lb.valid(nb) {
                        grads[base + g] += ws[e]
                            * (abar[0] * lb.ders[0][j]
                                + abar[1] * lb.ders[1][j]
                                + abar[2] * lb.ders[2][j]);
                    }
                }
                if let Some(adj) = in_adj.as_deref_mut() {
                    let phi = [
                        wb[e] * sig[0] + ws[e] * s[0],
                        wb[e] * sig[1] + ws[e] * s[1],
                        wb[e] * sig[2] + ws[e] * s[2],
                        wb[e] * sig[3] + ws[e] * s[3],
                    ];
                    push_input_adjoint(&mut adj[i], oadj, x, &phi, &abar);
                }
            }
        }
    }
}

/// Wavelet edges φ(x) = w ψ((x − t)/s).
#[derive(Clone, Debug, PartialEq)]
pub struct WaveletEdgeLayer {
    pub in_dim: usize,
    pub out_dim: usize,
    pub mother: Mother,
    pub weight_slot: ParamSlot,
    pub translation_slot: ParamSlot,
    pub scale_slot: ParamSlot,
}

impl WaveletEdgeLayer {
    /// Allocate the layer's tensors; scales start at 1, the rest at 0.
    pub fn allocate(
        params: &mut ParameterBlock,
        layer: usize,
        in_dim: usize,
        out_dim: usize,
        mother: Mother,
    ) -> Self {
        let weight_slot = params.push(layer, ParamKind::WaveletWeight, vec![out_dim, in_dim]);
        let translation_slot =
            params.push(layer, ParamKind::WaveletTranslation, vec![out_dim, in_dim]);
        let scale_slot = params.push(layer, ParamKind::WaveletScale, vec![out_dim, in_dim]);
        params.values[scale_slot.range()].iter_mut().for_each(|s| *s = 1.0);
        Self {
            in_dim,
            out_dim,
            mother,
            weight_slot,
            translation_slot,
            scale_slot,
        }
    }

    pub fn forward(&self, params: &[f64], inputs: &[Jet2], tape: &mut LayerTape, out: &mut Vec<Jet2>) {
        debug_assert_eq!(inputs.len(), self.in_dim);
        let dim: Dim = inputs[0].dim();
        tape.begin(inputs);
        tape.edge.clear();
        tape.edge.resize(self.out_dim * self.in_dim, [0.0; 5]);
        let w = &params[self.weight_slot.range()];
        let t = &params[self.translation_slot.range()];
        let sc = &params[self.scale_slot.range()];
        out.clear();
        for o in 0..self.out_dim {
            let mut acc = Jet2::constant(0.0, dim);
            for i in 0..self.in_dim {
                let e = o * self.in_dim + i;
                let inv = 1.0 / sc[e];
                let u = (inputs[i].value - t[e]) * inv;
                let psi = self.mother.derivs(u);
                tape.edge[e] = [psi[0], psi[1], psi[2], psi[3], u];
                let phi = [w[e] * psi[0], w[e] * psi[1] * inv, w[e] * psi[2] * inv * inv, 0.0];
                push_edge(&mut acc, &inputs[i], &tape.gg[i], &phi);
            }
            out.push(acc);
        }
    }

    pub fn backward(
        &self,
        params: &[f64],
        tape: &LayerTape,
        out_adj: &[JetAdjoint],
        grads: &mut [f64],
        mut in_adj: Option<&mut Vec<JetAdjoint>>,
    ) {
        if let Some(adj) = in_adj.as_deref_mut() {
            adj.clear();
            adj.resize(self.in_dim, JetAdjoint::default());
        }
        let w = &params[self.weight_slot.range()];
        let sc = &params[self.scale_slot.range()];
        let (w_off, t_off, s_off) = (
            self.weight_slot.offset,
            self.translation_slot.offset,
            self.scale_slot.offset,
        );
        for o in 0..self.out_dim {
            let oadj = &out_adj[o];
            for i in 0..self.in_dim {
                let e = o * self.in_dim + i;
                let x = &tape.inputs[i];
                let abar = phi_adjoint(oadj, x, &tape.gg[i]);
                let [p0, p1, p2, p3, u] = tape.edge[e];
                let inv = 1.0 / sc[e];
                let inv2 = inv * inv;
                let inv3 = inv2 * inv;
                let we = w[e];
                let phi = [we * p0, we * p1 * inv, we * p2 * inv2, we * p3 * inv3];
                // ∂φ_r/∂w = ψ_r s^{-r}
                grads[w_off + e] += abar[0] * p0 + abar[1] * p1 * inv + abar[2] * p2 * inv2;
                // ∂φ_r/∂t = −φ_{r+1}
                grads[t_off + e] -= abar[0] * phi[1] + abar[1] * phi[2] + abar[2] * phi[3];
                // ∂φ_r/∂s = −w s^{-(r+1)} (u ψ_{r+1} + r ψ_r)
                grads[s_off + e] -= we
                    * (abar[0] * inv * (u * p1)
                        + abar[1] * inv2 * (u * p2 + p1)
                        + abar[2] * inv3 * (u * p3 + 2.0 * p2));
                if let Some(adj) = in_adj.as_deref_mut() {
                    push_input_adjoint(&mut adj[i], oadj, x, &phi, &abar);
                }
            }
        }
    }
}
