//! Forward-mode sensitivities of a scalar with respect to the components of
//! the network's output jets.
//!
//! Residuals and condition terms are written once over [`Dual`]. Evaluating
//! them yields both the value and its partials with respect to every output
//! jet component, which seeds the reverse sweep through the network.

use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub};

use super::jet::{hess_index, Dim, Jet2};

/// Upper bound on seeded components: 3 outputs × 6 jet components.
pub const MAX_SEEDS: usize = 18;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Dual {
    pub value: f64,
    pub partials: [f64; MAX_SEEDS],
}

impl Dual {
    #[inline]
    pub fn constant(value: f64) -> Self {
        Self {
            value,
            partials: [0.0; MAX_SEEDS],
        }
    }

    #[inline]
    pub fn variable(value: f64, seed: usize) -> Self {
        let mut d = Self::constant(value);
        d.partials[seed] = 1.0;
        d
    }

    #[inline]
    fn chain(&self, f0: f64, f1: f64) -> Self {
        let mut out = Self::constant(f0);
        for (o, p) in out.partials.iter_mut().zip(&self.partials) {
            *o = f1 * p;
        }
        out
    }

    pub fn sin(&self) -> Self {
        let (s, c) = self.value.sin_cos();
        self.chain(s, c)
    }

    pub fn cos(&self) -> Self {
        let (s, c) = self.value.sin_cos();
        self.chain(c, -s)
    }

    pub fn square(&self) -> Self {
        *self * *self
    }

    pub fn powi(&self, n: i32) -> Self {
        self.chain(self.value.powi(n), f64::from(n) * self.value.powi(n - 1))
    }
}

impl Add for Dual {
    type Output = Dual;
    #[inline]
    fn add(mut self, rhs: Dual) -> Dual {
        self += rhs;
        self
    }
}

impl AddAssign for Dual {
    #[inline]
    fn add_assign(&mut self, rhs: Dual) {
        self.value += rhs.value;
        for (a, b) in self.partials.iter_mut().zip(&rhs.partials) {
            *a += b;
        }
    }
}

impl Sub for Dual {
    type Output = Dual;
    #[inline]
    fn sub(self, rhs: Dual) -> Dual {
        self + (-rhs)
    }
}

impl Neg for Dual {
    type Output = Dual;
    #[inline]
    fn neg(self) -> Dual {
        self * -1.0
    }
}

impl Mul for Dual {
    type Output = Dual;
    #[inline]
    fn mul(self, rhs: Dual) -> Dual {
        let mut out = Dual::constant(self.value * rhs.value);
        for k in 0..MAX_SEEDS {
            out.partials[k] = self.partials[k] * rhs.value + self.value * rhs.partials[k];
        }
        out
    }
}

impl Mul<f64> for Dual {
    type Output = Dual;
    #[inline]
    fn mul(mut self, rhs: f64) -> Dual {
        self.value *= rhs;
        self.partials.iter_mut().for_each(|p| *p *= rhs);
        self
    }
}

impl Mul<Dual> for f64 {
    type Output = Dual;
    #[inline]
    fn mul(self, rhs: Dual) -> Dual {
        rhs * self
    }
}

impl Div<f64> for Dual {
    type Output = Dual;
    #[inline]
    fn div(self, rhs: f64) -> Dual {
        self * (1.0 / rhs)
    }
}

impl Add<f64> for Dual {
    type Output = Dual;
    #[inline]
    fn add(mut self, rhs: f64) -> Dual {
        self.value += rhs;
        self
    }
}

impl Sub<f64> for Dual {
    type Output = Dual;
    #[inline]
    fn sub(mut self, rhs: f64) -> Dual {
        self.value -= rhs;
        self
    }
}

/// An output jet whose components are [`Dual`] variables.
#[derive(Clone, Copy, Debug)]
pub struct DualJet {
    value: Dual,
    grad: [Dual; 2],
    hess: [Dual; 3],
}

impl DualJet {
    /// Lift `jet` and seed its components at `base..base + dim.jet_len()`,
    /// ordered value, gradient, packed Hessian.
    pub fn seeded(jet: &Jet2, base: usize) -> Self {
        let dim = jet.dim();
        let d = dim.get();
        let mut out = Self::lift(jet);
        out.value = Dual::variable(jet.value, base);
        for a in 0..d {
            out.grad[a] = Dual::variable(jet.grad[a], base + 1 + a);
        }
        for s in 0..dim.hess_len() {
            out.hess[s] = Dual::variable(jet.hess[s], base + 1 + d + s);
        }
        out
    }

    /// Lift `jet` as constants (no seeded partials).
    pub fn lift(jet: &Jet2) -> Self {
        Self {
            value: Dual::constant(jet.value),
            grad: [Dual::constant(jet.grad[0]), Dual::constant(jet.grad[1])],
            hess: [
                Dual::constant(jet.hess[0]),
                Dual::constant(jet.hess[1]),
                Dual::constant(jet.hess[2]),
            ],
        }
    }

    #[inline]
    pub fn val(&self) -> Dual {
        self.value
    }

    #[inline]
    pub fn d(&self, axis: usize) -> Dual {
        self.grad[axis]
    }

    #[inline]
    pub fn dd(&self, i: usize, j: usize) -> Dual {
        self.hess[hess_index(i, j)]
    }
}

/// Adjoint (∂L/∂component) of one output jet, same packing as [`Jet2`].
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct JetAdjoint {
    pub value: f64,
    pub grad: [f64; 2],
    pub hess: [f64; 3],
}

impl JetAdjoint {
    /// Read the adjoint of output `base`-seeded jet out of `partials`, scaled
    /// by `weight`.
    pub fn from_partials(partials: &[f64; MAX_SEEDS], base: usize, dim: Dim, weight: f64) -> Self {
        let d = dim.get();
        let mut out = Self {
            value: weight * partials[base],
            ..Self::default()
        };
        for a in 0..d {
            out.grad[a] = weight * partials[base + 1 + a];
        }
        for s in 0..dim.hess_len() {
            out.hess[s] = weight * partials[base + 1 + d + s];
        }
        out
    }

    pub fn accumulate(&mut self, other: &JetAdjoint) {
        self.value += other.value;
        for a in 0..2 {
            self.grad[a] += other.grad[a];
        }
        for s in 0..3 {
            self.hess[s] += other.hess[s];
        }
    }
}
