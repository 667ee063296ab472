//! Second-order jets: value, gradient and Hessian with respect to the raw
//! network inputs.
//!
//! Only the unique Hessian entries are stored, so symmetry holds by
//! construction. Storage is fixed-size for `d <= 2`; entries beyond the
//! active dimension stay zero.

use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};

/// Input dimensionality of a jet.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Dim {
    One,
    Two,
}

impl Dim {
    pub fn new(d: usize) -> Result<Self> {
        match d {
            1 => Ok(Dim::One),
            2 => Ok(Dim::Two),
            other => Err(Error::InvalidDimension(other)),
        }
    }

    #[inline]
    pub fn get(self) -> usize {
        match self {
            Dim::One => 1,
            Dim::Two => 2,
        }
    }

    /// Number of unique Hessian entries, d(d+1)/2.
    #[inline]
    pub fn hess_len(self) -> usize {
        match self {
            Dim::One => 1,
            Dim::Two => 3,
        }
    }

    /// Total number of scalar components of a jet: 1 + d + d(d+1)/2.
    #[inline]
    pub fn jet_len(self) -> usize {
        1 + self.get() + self.hess_len()
    }
}

/// Position of `(i, j)` in the packed upper-triangular Hessian storage.
#[inline]
pub fn hess_index(i: usize, j: usize) -> usize {
    let (a, b) = if i <= j { (i, j) } else { (j, i) };
    // (0,0) -> 0, (0,1) -> 1, (1,1) -> 2
    a + b
}

/// The axis pair `(a, b)` with `a <= b` stored at packed index `s`.
#[inline]
pub fn hess_pair(s: usize) -> (usize, usize) {
    match s {
        0 => (0, 0),
        1 => (0, 1),
        _ => (1, 1),
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet2 {
    pub value: f64,
    pub grad: [f64; 2],
    pub hess: [f64; 3],
    dim: Dim,
}

impl Jet2 {
    /// A constant: zero gradient and Hessian.
    pub fn constant(c: f64, dim: Dim) -> Self {
        Self {
            value: c,
            grad: [0.0; 2],
            hess: [0.0; 3],
            dim,
        }
    }

    /// The independent variable along `axis`.
    pub fn seed(x: f64, axis: usize, dim: Dim) -> Result<Self> {
        if axis >= dim.get() {
            return Err(Error::AxisOutOfRange {
                axis,
                dim: dim.get(),
            });
        }
        let mut j = Self::constant(x, dim);
        j.grad[axis] = 1.0;
        Ok(j)
    }

    /// Build a jet from explicit components. Unused slots must be zero.
    pub fn from_parts(value: f64, grad: [f64; 2], hess: [f64; 3], dim: Dim) -> Self {
        Self {
            value,
            grad,
            hess,
            dim,
        }
    }

    #[inline]
    pub fn dim(&self) -> Dim {
        self.dim
    }

    /// First derivative along `axis`.
    #[inline]
    pub fn d(&self, axis: usize) -> f64 {
        self.grad[axis]
    }

    /// Second derivative along `(i, j)`.
    #[inline]
    pub fn dd(&self, i: usize, j: usize) -> f64 {
        self.hess[hess_index(i, j)]
    }

    pub fn is_finite(&self) -> bool {
        self.value.is_finite()
            && self.grad.iter().all(|g| g.is_finite())
            && self.hess.iter().all(|h| h.is_finite())
    }

    fn check_dim(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                left: self.dim.get(),
                right: other.dim.get(),
            });
        }
        Ok(())
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        Ok(*self + *other)
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        Ok(*self - *other)
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        Ok(*self * *other)
    }

    /// Apply a scalar function given its value and first two derivatives at
    /// `self.value`.
    #[inline]
    pub fn chain(&self, f0: f64, f1: f64, f2: f64) -> Self {
        let mut out = Self::constant(f0, self.dim);
        for a in 0..2 {
            out.grad[a] = f1 * self.grad[a];
        }
        for s in 0..3 {
            let (a, b) = hess_pair(s);
            out.hess[s] = f2 * self.grad[a] * self.grad[b] + f1 * self.hess[s];
        }
        out
    }

    /// Apply `f`, which returns `(f(v), f'(v), f''(v))`.
    pub fn map(&self, f: impl Fn(f64) -> (f64, f64, f64)) -> Self {
        let (f0, f1, f2) = f(self.value);
        self.chain(f0, f1, f2)
    }

    pub fn sin(&self) -> Self {
        let (s, c) = self.value.sin_cos();
        self.chain(s, c, -s)
    }

    pub fn cos(&self) -> Self {
        let (s, c) = self.value.sin_cos();
        self.chain(c, -s, -c)
    }

    pub fn exp(&self) -> Self {
        let e = self.value.exp();
        self.chain(e, e, e)
    }

    pub fn scale(&self, c: f64) -> Self {
        let mut out = *self;
        out.value *= c;
        out.grad.iter_mut().for_each(|g| *g *= c);
        out.hess.iter_mut().for_each(|h| *h *= c);
        out
    }

    pub fn add_const(&self, c: f64) -> Self {
        let mut out = *self;
        out.value += c;
        out
    }
}

impl Add for Jet2 {
    type Output = Jet2;
    #[inline]
    fn add(self, rhs: Jet2) -> Jet2 {
        debug_assert_eq!(self.dim, rhs.dim);
        Jet2 {
            value: self.value + rhs.value,
            grad: [self.grad[0] + rhs.grad[0], self.grad[1] + rhs.grad[1]],
            hess: [
                self.hess[0] + rhs.hess[0],
                self.hess[1] + rhs.hess[1],
                self.hess[2] + rhs.hess[2],
            ],
            dim: self.dim,
        }
    }
}

impl Sub for Jet2 {
    type Output = Jet2;
    #[inline]
    fn sub(self, rhs: Jet2) -> Jet2 {
        self + (-rhs)
    }
}

impl Neg for Jet2 {
    type Output = Jet2;
    #[inline]
    fn neg(self) -> Jet2 {
        self.scale(-1.0)
    }
}

impl Mul for Jet2 {
    type Output = Jet2;
    #[inline]
    fn mul(self, b: Jet2) -> Jet2 {
        debug_assert_eq!(self.dim, b.dim);
        let a = self;
        let mut out = Jet2::constant(a.value * b.value, a.dim);
        for i in 0..2 {
            out.grad[i] = a.grad[i] * b.value + a.value * b.grad[i];
        }
        for s in 0..3 {
            let (i, j) = hess_pair(s);
            out.hess[s] = a.hess[s] * b.value
                + a.grad[i] * b.grad[j]
                + a.grad[j] * b.grad[i]
                + a.value * b.hess[s];
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constants_have_zero_derivatives() {
        let j = Jet2::constant(5.0, Dim::One);
        assert_eq!((j.value, j.d(0), j.dd(0, 0)), (5.0, 0.0, 0.0));
        let j = Jet2::constant(0.0, Dim::Two);
        assert_eq!(j.grad, [0.0, 0.0]);
        assert_eq!(j.hess, [0.0; 3]);
        let j = Jet2::constant(-1.0, Dim::One);
        assert_eq!(j.value, -1.0);
    }

    #[test]
    fn seeding() {
        let j = Jet2::seed(2.0, 0, Dim::One).unwrap();
        assert_eq!((j.value, j.d(0), j.dd(0, 0)), (2.0, 1.0, 0.0));
        let j = Jet2::seed(0.5, 1, Dim::Two).unwrap();
        assert_eq!(j.grad, [0.0, 1.0]);
        assert_eq!(j.hess, [0.0; 3]);
        assert!(matches!(
            Jet2::seed(0.5, 1, Dim::One),
            Err(Error::AxisOutOfRange { axis: 1, dim: 1 })
        ));
        assert!(Dim::new(3).is_err());
    }

    #[test]
    fn cube_by_repeated_products() {
        let x = Jet2::seed(2.0, 0, Dim::One).unwrap();
        let c = x.try_mul(&x).unwrap().try_mul(&x).unwrap();
        assert_eq!((c.value, c.d(0), c.dd(0, 0)), (8.0, 12.0, 12.0));
        let sq = x.try_mul(&x).unwrap();
        let x3 = Jet2::seed(3.0, 0, Dim::One).unwrap();
        let sq3 = x3 * x3;
        assert_eq!((sq3.value, sq3.d(0), sq3.dd(0, 0)), (9.0, 6.0, 2.0));
        assert_eq!(sq.value, 4.0);
    }

    #[test]
    fn zero_annihilates() {
        let a = Jet2::from_parts(1.0, [2.0, 0.0], [0.0; 3], Dim::One);
        let b = Jet2::constant(0.0, Dim::One);
        let p = a * b;
        assert_eq!((p.value, p.d(0), p.dd(0, 0)), (0.0, 0.0, 0.0));
    }

    #[test]
    fn mismatched_dimensions_are_rejected() {
        let a = Jet2::constant(1.0, Dim::One);
        let b = Jet2::constant(1.0, Dim::Two);
        assert!(a.try_add(&b).is_err());
        assert!(a.try_sub(&b).is_err());
        assert!(a.try_mul(&b).is_err());
    }

    #[test]
    fn unary_functions() {
        let x = Jet2::seed(0.0, 0, Dim::One).unwrap();
        let s = x.sin();
        assert_eq!((s.value, s.d(0), s.dd(0, 0)), (0.0, 1.0, -0.0));
        let c = x.cos();
        assert_eq!((c.value, c.d(0), c.dd(0, 0)), (1.0, -0.0, -1.0));
        // exp(-u^2/2) at u = 1
        let u = Jet2::seed(1.0, 0, Dim::One).unwrap();
        let g = u.map(|v| {
            let e = (-0.5 * v * v).exp();
            (e, -v * e, (v * v - 1.0) * e)
        });
        let e = (-0.5f64).exp();
        assert!((g.value - e).abs() < 1e-15);
        assert!((g.d(0) + e).abs() < 1e-15);
        assert!(g.dd(0, 0).abs() < 1e-15);
    }

    #[test]
    fn burgers_product_vanishes_at_half() {
        // u = sin(pi x), u * u_x at x = 0.5 is 1 * pi cos(pi/2) = 0.
        let x = Jet2::seed(0.5, 0, Dim::One).unwrap();
        let u = x.scale(std::f64::consts::PI).sin();
        let ux = Jet2::constant(std::f64::consts::PI * u.d(0) / std::f64::consts::PI, Dim::One);
        let prod = Jet2::constant(u.value, Dim::One) * ux;
        assert!(prod.value.abs() < 1e-15);
    }

    #[test]
    fn packed_hessian_layout() {
        assert_eq!(hess_index(0, 0), 0);
        assert_eq!(hess_index(0, 1), 1);
        assert_eq!(hess_index(1, 0), 1);
        assert_eq!(hess_index(1, 1), 2);
        for s in 0..3 {
            let (a, b) = hess_pair(s);
            assert_eq!(hess_index(a, b), s);
        }
    }
}
